//! Velocity-consistency matching: the compensation velocity whose decoded
//! slow-time signature points back at itself.

use std::f64::consts::TAU;

use num_complex::Complex64;
use rayon::prelude::*;

use super::spectrum::{argmax_by_key, refine, PaddedFft};
use super::{Estimator, ParameterEstimate};
use crate::cube::Cube;
use crate::decode::window_starts;
use crate::echo::{doppler_phase, steering, velocity_from_phase, BesselTemplate};
use crate::error::Result;

/// Selected compensation velocity and the velocity its decode implies.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct VcmOutcome {
    pub velocity: f64,
    pub implied_velocity: f64,
}

impl Estimator {
    /// Scans the velocity grid: for each candidate `v*`, decodes `residual`
    /// compensating `v*`, projects every window onto the prior template and
    /// takes the Doppler-spectrum peak `v̂(v*)`; returns the candidate
    /// minimizing `|v* − v̂(v*)|`.
    pub fn vcm_velocity(&self, residual: &Cube, prior: &ParameterEstimate) -> Result<VcmOutcome> {
        let u_count = self.wf.num_modes();
        let l_count = self.cfg.num_subcarriers;
        let stride = self.kind.stride(u_count);
        let starts = window_starts(residual.symbols(), u_count, stride)?;

        // Decoding and projecting commute, so project each raw symbol once.
        let bessel = BesselTemplate::new(&self.cfg, &self.wf.modes, prior.elevation);
        let t = steering(&self.cfg, &self.wf.modes, prior.range, prior.azimuth, &bessel);
        let w = self.wf.code.matrix();
        let g: Vec<Complex64> = (0..u_count)
            .flat_map(|j| (0..l_count).map(move |l| (j, l)))
            .map(|(j, l)| {
                (0..u_count)
                    .map(|i| (t[l * u_count + i] * self.gain[l * u_count + i]).conj() * w[(j, i)])
                    .sum()
            })
            .collect();
        let e: Vec<Complex64> = (0..residual.symbols())
            .map(|s| {
                let row = &g[(s % u_count) * l_count..(s % u_count + 1) * l_count];
                (0..l_count).map(|l| residual.get(s, l, 0) * row[l]).sum()
            })
            .collect();

        let nfft = (starts.len().next_power_of_two() * 8).max(256);
        let fft = PaddedFft::new(nfft);
        let inv_g = 1.0 / self.wf.code.gram();
        let limit = self.grids.velocity_limit;
        let implied: Vec<f64> = self
            .grids
            .velocity
            .par_iter()
            .map(|&v_star| {
                let phase = doppler_phase(&self.cfg, v_star);
                let comp: Vec<Complex64> = (0..u_count)
                    .map(|k| Complex64::from_polar(inv_g, -(k as f64) * phase))
                    .collect();
                let proj: Vec<Complex64> = starts
                    .iter()
                    .map(|&s| comp.iter().enumerate().map(|(k, c)| c * e[s + k]).sum())
                    .collect();
                let mags = fft.magnitudes(&proj);
                let mut masked = vec![f64::NEG_INFINITY; nfft];
                let bin_velocity = |m: f64| {
                    let m = if m > nfft as f64 / 2.0 { m - nfft as f64 } else { m };
                    velocity_from_phase(&self.cfg, TAU * m / (nfft as f64 * stride as f64))
                };
                for (m, slot) in masked.iter_mut().enumerate() {
                    if bin_velocity(m as f64).abs() <= limit {
                        *slot = mags[m];
                    }
                }
                let m = argmax_by_key(&masked, |i| bin_velocity(i as f64).abs()).unwrap_or(0);
                bin_velocity(m as f64 + refine(&mags, m, true))
            })
            .collect();

        let mismatch: Vec<f64> = self
            .grids
            .velocity
            .iter()
            .zip(&implied)
            .map(|(v, vh)| -(v - vh).abs())
            .collect();
        let k = argmax_by_key(&mismatch, |i| self.grids.velocity[i].abs()).unwrap_or(0);
        Ok(VcmOutcome {
            velocity: self.grids.velocity[k],
            implied_velocity: implied[k],
        })
    }
}
