//! CLEAN-style bootstrap: estimate the strongest target of the residual
//! without Doppler compensation, subtract it, repeat.

use num_complex::Complex64;
use rayon::prelude::*;

use super::{Estimator, Observation, ParameterEstimate};
use crate::cube::Cube;
use crate::echo::doppler_phase;
use crate::error::Result;

/// Windows used by the incoherent range and Doppler scans are thinned to
/// at most this many.
const MAX_SCAN_WINDOWS: usize = 32;

impl Estimator {
    /// Coarse estimates of `q` targets by successive cancellation.
    pub fn initialize(&self, raw: &Cube, q: usize) -> Result<Vec<ParameterEstimate>> {
        let mut residual = raw.clone();
        let mut out = Vec::with_capacity(q);
        for _ in 0..q {
            let obs = self.observe(&residual, 0.0)?;
            let est = self.bootstrap_one(&obs, &residual);
            residual.sub_assign(&self.synthesize(&est, raw.symbols()));
            out.push(est);
        }
        Ok(out)
    }

    /// Incoherent range and Doppler scans, a joint azimuth–elevation
    /// search, then one M-step.
    pub(crate) fn bootstrap_one(&self, obs: &Observation, raw: &Cube) -> ParameterEstimate {
        let u_count = self.wf.num_modes();
        let l_count = self.cfg.num_subcarriers;
        let n_win = obs.window_starts.len();
        let step = n_win.div_ceil(MAX_SCAN_WINDOWS).max(1);

        // Range: power summed over modes and thinned windows.
        let rows: Vec<usize> = (0..n_win).step_by(step).collect();
        let partial: Vec<Vec<f64>> = rows
            .par_iter()
            .map(|&j| {
                let row = obs.cube.row(j);
                let mut acc = vec![0.0; self.range_fft.len()];
                for u in 0..u_count {
                    let x: Vec<Complex64> = (0..l_count).map(|l| row[l * u_count + u]).collect();
                    for (a, m) in acc.iter_mut().zip(self.range_fft.magnitudes(&x)) {
                        *a += m * m;
                    }
                }
                acc
            })
            .collect();
        let mut power = vec![0.0; self.range_fft.len()];
        for p in &partial {
            for (a, b) in power.iter_mut().zip(p) {
                *a += b;
            }
        }
        let mags: Vec<f64> = power.iter().map(|p| p.sqrt()).collect();
        let range = self.pick_range(&mags, None);

        // Doppler: per-mode range-matched slow-time signals, incoherent over modes.
        let rp: Vec<Complex64> = (0..l_count)
            .map(|l| Complex64::from_polar(1.0, -2.0 * self.cfg.wavenumber(l) * range))
            .collect();
        let f: Vec<Complex64> = (0..n_win)
            .into_par_iter()
            .flat_map_iter(|j| {
                let row = obs.cube.row(j);
                let rp = &rp;
                (0..u_count).map(move |u| (0..l_count).map(|l| rp[l] * row[l * u_count + u]).sum::<Complex64>())
            })
            .collect();
        let spec: Vec<f64> = self
            .grids
            .velocity
            .par_iter()
            .map(|&v| {
                let phase = doppler_phase(&self.cfg, v);
                let mut acc = vec![Complex64::new(0.0, 0.0); u_count];
                for (j, &s) in obs.window_starts.iter().enumerate() {
                    let w = Complex64::from_polar(1.0, -(s as f64) * phase);
                    for u in 0..u_count {
                        acc[u] += w * f[j * u_count + u];
                    }
                }
                acc.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
            })
            .collect();
        let velocity = self.pick_velocity(&spec);

        // Joint azimuth–elevation over the Bessel bank and the mode spectrum.
        let d = self.collapse(obs, velocity);
        let scans: Vec<(f64, Vec<f64>)> = self
            .bank
            .templates
            .par_iter()
            .zip(self.bank.energy.par_iter())
            .map(|(t, &e)| {
                let mut c = vec![Complex64::new(0.0, 0.0); u_count];
                for l in 0..l_count {
                    let w = rp[l] * t.rx[l];
                    for u in 0..u_count {
                        c[u] += w * t.tx[l * u_count + u] * d[l * u_count + u];
                    }
                }
                let mags = self.azimuth_fft.magnitudes(&c);
                let norm = if e > 0.0 { e.sqrt() } else { f64::INFINITY };
                let best = mags.iter().cloned().fold(0.0, f64::max) / norm;
                (best, mags)
            })
            .collect();
        let scores: Vec<f64> = scans.iter().map(|(s, _)| *s).collect();
        let e_idx = super::spectrum::argmax_by_key(&scores, |i| i as f64).unwrap_or(0);
        let azimuth = self.azimuth_from_spectrum(&scans[e_idx].1);
        let elevation = self.grids.elevation[e_idx];
        let mut coarse = ParameterEstimate {
            amplitude: Complex64::new(0.0, 0.0),
            range,
            velocity,
            azimuth,
            elevation,
        };
        coarse.amplitude = self.amplitude(raw, &coarse);
        self.m_step(obs, raw, &coarse, true).estimate
    }
}
