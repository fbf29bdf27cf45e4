//! Alternating one-dimensional updates of range, Doppler, azimuth,
//! elevation and amplitude on a decoded observation.

use std::f64::consts::TAU;

use num_complex::Complex64;
use rayon::prelude::*;

use super::spectrum::{argmax_by_key, refine};
use super::{Estimator, Observation, ParameterEstimate};
use crate::config::wrap_angle;
use crate::cube::Cube;
use crate::echo::{doppler_phase, steering, BesselTemplate};

/// Result of one M-step. `degenerate` is set when the observation carried
/// no energy and the prior was returned unchanged.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MStepOutcome {
    pub estimate: ParameterEstimate,
    pub degenerate: bool,
}

/// `(axis value, power)` samples through one estimate.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct Profiles {
    pub range: Vec<(f64, f64)>,
    pub velocity: Vec<(f64, f64)>,
    pub azimuth: Vec<(f64, f64)>,
    pub elevation: Vec<(f64, f64)>,
}

impl Estimator {
    /// Doppler-aligned sum over windows: `d(l,u) = Σ_j ω^{−s_j} D(j,l,u)`.
    pub(crate) fn collapse(&self, obs: &Observation, velocity: f64) -> Vec<Complex64> {
        let phase = doppler_phase(&self.cfg, velocity);
        let n = self.cfg.num_subcarriers * self.wf.num_modes();
        let mut d = vec![Complex64::new(0.0, 0.0); n];
        for (j, &s) in obs.window_starts.iter().enumerate() {
            let w = Complex64::from_polar(1.0, -(s as f64) * phase);
            for (acc, z) in d.iter_mut().zip(obs.cube.row(j)) {
                *acc += w * z;
            }
        }
        d
    }

    fn range_phases(&self, range: f64) -> Vec<Complex64> {
        (0..self.cfg.num_subcarriers)
            .map(|l| Complex64::from_polar(1.0, 2.0 * self.cfg.wavenumber(l) * range))
            .collect()
    }

    fn mode_phases(&self, azimuth: f64) -> Vec<Complex64> {
        self.wf
            .modes
            .as_slice()
            .iter()
            .map(|&m| Complex64::from_polar(1.0, m as f64 * azimuth))
            .collect()
    }

    /// Bin width of the padded range spectrum in meters.
    pub(crate) fn range_bin(&self) -> f64 {
        self.unambiguous_range / self.range_fft.len() as f64
    }

    /// Peak of a range power spectrum restricted to `window` (meters
    /// around a centre) when given, interpolated parabolically.
    pub(crate) fn pick_range(&self, mags: &[f64], window: Option<f64>) -> f64 {
        let n = mags.len();
        let bin = self.range_bin();
        let mut masked = vec![f64::NEG_INFINITY; n];
        let (lo, hi) = match window {
            Some(centre) => {
                let half = (self.options.range_window_cells * self.grids.range_pad) as i64;
                let c = (centre / bin).round() as i64;
                ((c - half).max(1), (c + half).min(n as i64 - 1))
            }
            None => (1, n as i64 - 1),
        };
        for j in lo..=hi {
            masked[j as usize] = mags[j as usize];
        }
        let Some(j) = argmax_by_key(&masked, |i| i as f64) else {
            return window.unwrap_or(bin);
        };
        let r = (j as f64 + refine(mags, j, true)) * bin;
        r.clamp(bin * 0.5, self.unambiguous_range)
    }

    /// Range update: spectrum over subcarriers of the angle-matched sum.
    pub(crate) fn range_step(
        &self,
        d: &[Complex64],
        azimuth: f64,
        bessel: &BesselTemplate,
        window: Option<f64>,
    ) -> f64 {
        let mags = self.range_magnitudes(d, azimuth, bessel);
        self.pick_range(&mags, window)
    }

    fn range_magnitudes(&self, d: &[Complex64], azimuth: f64, bessel: &BesselTemplate) -> Vec<f64> {
        let u_count = self.wf.num_modes();
        let mp = self.mode_phases(azimuth);
        let x: Vec<Complex64> = (0..self.cfg.num_subcarriers)
            .map(|l| {
                let rx = bessel.rx[l];
                (0..u_count)
                    .map(|u| (mp[u] * (rx * bessel.tx[l * u_count + u])).conj() * d[l * u_count + u])
                    .sum()
            })
            .collect();
        self.range_fft.magnitudes(&x)
    }

    /// Spectrum of window projections `h_j` over the velocity grid.
    pub(crate) fn velocity_spectrum(&self, starts: &[usize], h: &[Complex64]) -> Vec<f64> {
        self.grids
            .velocity
            .par_iter()
            .map(|&v| {
                let phase = doppler_phase(&self.cfg, v);
                starts
                    .iter()
                    .zip(h)
                    .map(|(&s, z)| z * Complex64::from_polar(1.0, -(s as f64) * phase))
                    .sum::<Complex64>()
                    .norm()
            })
            .collect()
    }

    /// Peak of a spectrum sampled on the velocity grid.
    pub(crate) fn pick_velocity(&self, spec: &[f64]) -> f64 {
        let grid = &self.grids.velocity;
        let Some(k) = argmax_by_key(spec, |i| grid[i].abs()) else {
            return 0.0;
        };
        let v = grid[k] + refine(spec, k, false) * self.grids.velocity_step;
        v.clamp(-self.grids.velocity_limit, self.grids.velocity_limit)
    }

    /// Doppler update: projections of each window onto the template `t`.
    pub(crate) fn doppler_step(&self, obs: &Observation, t: &[Complex64]) -> f64 {
        self.pick_velocity(&self.doppler_spectrum(obs, t))
    }

    fn doppler_spectrum(&self, obs: &Observation, t: &[Complex64]) -> Vec<f64> {
        let h: Vec<Complex64> = (0..obs.window_starts.len())
            .into_par_iter()
            .map(|j| obs.cube.row(j).iter().zip(t).map(|(z, a)| a.conj() * z).sum())
            .collect();
        self.velocity_spectrum(&obs.window_starts, &h)
    }

    /// Power along each parameter axis through `est`, with the other
    /// parameters held at the estimate. Axes are meters, m/s, degrees
    /// and degrees.
    pub fn profiles(&self, obs: &Observation, est: &ParameterEstimate) -> Profiles {
        let bessel = BesselTemplate::new(&self.cfg, &self.wf.modes, est.elevation);
        let d = self.collapse(obs, est.velocity);
        let bin = self.range_bin();
        let range = self
            .range_magnitudes(&d, est.azimuth, &bessel)
            .into_iter()
            .enumerate()
            .map(|(j, m)| (j as f64 * bin, m * m))
            .collect();
        let t = steering(&self.cfg, &self.wf.modes, est.range, est.azimuth, &bessel);
        let velocity = self
            .grids
            .velocity
            .iter()
            .zip(self.doppler_spectrum(obs, &t))
            .map(|(&v, m)| (v, m * m))
            .collect();
        let az = self
            .azimuth_fft
            .magnitudes(&self.mode_coefficients(&d, est.range, &bessel));
        let n = az.len();
        let azimuth = az
            .into_iter()
            .enumerate()
            .map(|(m, x)| (wrap_angle(m as f64 * TAU / n as f64).to_degrees(), x * x))
            .collect();
        let elevation = self
            .grids
            .elevation
            .iter()
            .zip(self.elevation_scores(&d, est.range, est.azimuth))
            .map(|(&e, s)| (e.to_degrees(), s))
            .collect();
        Profiles {
            range,
            velocity,
            azimuth,
            elevation,
        }
    }

    /// Mode-axis coefficients with range phase and Bessel weights removed.
    fn mode_coefficients(&self, d: &[Complex64], range: f64, bessel: &BesselTemplate) -> Vec<Complex64> {
        let u_count = self.wf.num_modes();
        let rp = self.range_phases(range);
        let mut c = vec![Complex64::new(0.0, 0.0); u_count];
        for l in 0..self.cfg.num_subcarriers {
            let w = rp[l].conj() * bessel.rx[l];
            for u in 0..u_count {
                c[u] += w * bessel.tx[l * u_count + u] * d[l * u_count + u];
            }
        }
        c
    }

    pub(crate) fn azimuth_from_spectrum(&self, mags: &[f64]) -> f64 {
        let n = mags.len();
        let m = argmax_by_key(mags, |i| i as f64).unwrap_or(0);
        wrap_angle((m as f64 + refine(mags, m, true)) * TAU / n as f64)
    }

    /// Azimuth update: spectrum over the mode axis.
    pub(crate) fn azimuth_step(&self, d: &[Complex64], range: f64, bessel: &BesselTemplate) -> f64 {
        let c = self.mode_coefficients(d, range, bessel);
        self.azimuth_from_spectrum(&self.azimuth_fft.magnitudes(&c))
    }

    /// Elevation update: profiled least squares over the Bessel bank.
    pub(crate) fn elevation_step(&self, d: &[Complex64], range: f64, azimuth: f64) -> usize {
        let scores = self.elevation_scores(d, range, azimuth);
        argmax_by_key(&scores, |i| i as f64).unwrap_or(0)
    }

    fn elevation_scores(&self, d: &[Complex64], range: f64, azimuth: f64) -> Vec<f64> {
        let u_count = self.wf.num_modes();
        let rp = self.range_phases(range);
        let mp = self.mode_phases(azimuth);
        let y: Vec<Complex64> = (0..self.cfg.num_subcarriers)
            .flat_map(|l| (0..u_count).map(move |u| (l, u)))
            .map(|(l, u)| (rp[l] * mp[u]).conj() * d[l * u_count + u])
            .collect();
        self.bank
            .templates
            .par_iter()
            .zip(self.bank.energy.par_iter())
            .map(|(t, &e)| {
                let num: Complex64 = (0..self.cfg.num_subcarriers)
                    .map(|l| {
                        let row = &y[l * u_count..(l + 1) * u_count];
                        let s: Complex64 = row
                            .iter()
                            .zip(&t.tx[l * u_count..(l + 1) * u_count])
                            .map(|(z, j)| z * j)
                            .sum();
                        s * t.rx[l]
                    })
                    .sum();
                if e > 0.0 {
                    num.norm_sqr() / e
                } else {
                    0.0
                }
            })
            .collect()
    }

    /// Least-squares amplitude of the raw-domain echo of `est` against
    /// the residual capture `raw`.
    pub(crate) fn amplitude(&self, raw: &Cube, est: &ParameterEstimate) -> Complex64 {
        let unit = ParameterEstimate {
            amplitude: Complex64::new(1.0, 0.0),
            ..*est
        };
        let s = self.synthesize(&unit, raw.symbols());
        let num: Complex64 = s.as_slice().iter().zip(raw.as_slice()).map(|(a, z)| a.conj() * z).sum();
        let den = s.energy();
        if den > 0.0 {
            num / den
        } else {
            Complex64::new(0.0, 0.0)
        }
    }

    /// One pass of range → Doppler → azimuth → elevation → amplitude,
    /// starting from `prior`; `raw` is the residual capture `obs` was
    /// decoded from. The range search stays within the configured
    /// window around the prior range when `local_range` is set.
    pub fn m_step(&self, obs: &Observation, raw: &Cube, prior: &ParameterEstimate, local_range: bool) -> MStepOutcome {
        let windows = obs.window_starts.len();
        let d_prior = self.collapse(obs, prior.velocity);
        if windows == 0 || d_prior.iter().all(|z| *z == Complex64::new(0.0, 0.0)) {
            return MStepOutcome {
                estimate: *prior,
                degenerate: true,
            };
        }
        let bes_prior = BesselTemplate::new(&self.cfg, &self.wf.modes, prior.elevation);
        let range = self.range_step(&d_prior, prior.azimuth, &bes_prior, local_range.then_some(prior.range));
        let t = steering(&self.cfg, &self.wf.modes, range, prior.azimuth, &bes_prior);
        let velocity = self.doppler_step(obs, &t);
        let d = self.collapse(obs, velocity);
        let azimuth = self.azimuth_step(&d, range, &bes_prior);
        let e_idx = self.elevation_step(&d, range, azimuth);
        let elevation = self.grids.elevation[e_idx];
        let mut estimate = ParameterEstimate {
            amplitude: prior.amplitude,
            range,
            velocity,
            azimuth,
            elevation,
        };
        estimate.amplitude = self.amplitude(raw, &estimate);
        MStepOutcome {
            estimate,
            degenerate: false,
        }
    }
}
