//! DFT mode (de)multiplexing, sensing-steered beam weights and the
//! effective per-mode channel.

use std::f64::consts::TAU;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::config::{SystemConfig, Target};
use crate::error::{Error, Result};
use crate::estimate::ParameterEstimate;
use crate::waveform::ModeSet;

use super::channel::moving_range;

/// Where the transmitter believes the UE is. Angles in radians.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Pointing {
    pub range: f64,
    pub velocity: f64,
    pub azimuth: f64,
    pub elevation: f64,
}

impl From<&Target> for Pointing {
    fn from(t: &Target) -> Self {
        Self {
            range: t.range,
            velocity: t.radial_velocity,
            azimuth: t.azimuth,
            elevation: t.elevation,
        }
    }
}

impl From<&ParameterEstimate> for Pointing {
    fn from(e: &ParameterEstimate) -> Self {
        Self {
            range: e.range,
            velocity: e.velocity,
            azimuth: e.azimuth,
            elevation: e.elevation,
        }
    }
}

/// Beamforming phases, steering phases and the detection diagonal for one
/// `(p, l)`.
#[derive(Clone, Debug, PartialEq)]
pub struct BeamWeights {
    /// `W_m` per transmit element.
    pub tx_phases: Vec<f64>,
    /// `W_n` per UE element.
    pub rx_phases: Vec<f64>,
    /// `λ(k_l, p, u)` per mode.
    pub lambda: Vec<Complex64>,
}

impl BeamWeights {
    /// `P = 1 ⊗ 𝔭` as an `M×U` mask.
    pub fn tx_mask(&self, modes: usize) -> DMatrix<Complex64> {
        DMatrix::from_fn(self.tx_phases.len(), modes, |m, _| {
            Complex64::from_polar(1.0, self.tx_phases[m])
        })
    }

    /// `B = 1 ⊗ 𝔟` as a `U×N` mask.
    pub fn rx_mask(&self, modes: usize) -> DMatrix<Complex64> {
        DMatrix::from_fn(modes, self.rx_phases.len(), |_, n| {
            Complex64::from_polar(1.0, self.rx_phases[n])
        })
    }
}

/// Order of the leading term of the diagonal for mode `ℓ` over `N` elements.
pub fn tau(mode: i32, elements: usize) -> usize {
    let a = (mode.unsigned_abs() as usize) % elements;
    a.min(elements - a)
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

/// Weights steered at `pointing` for subcarrier `l` and symbol `p` (1-based).
pub fn beam_weights(cfg: &SystemConfig, modes: &ModeSet, pointing: &Pointing, p: usize, l: usize) -> BeamWeights {
    let k = cfg.wavenumber(l);
    let s = pointing.elevation.sin();
    let tx_phases = (0..cfg.num_tx_antennas)
        .map(|m| {
            let phi = TAU * m as f64 / cfg.num_tx_antennas as f64;
            -k * cfg.tx_radius * s * (pointing.azimuth - phi).cos()
        })
        .collect();
    let rx_phases = (0..cfg.num_rx_antennas)
        .map(|n| {
            let alpha = TAU * n as f64 / cfg.num_rx_antennas as f64;
            k * cfg.comm_rx_radius * s * (pointing.azimuth - alpha).cos()
        })
        .collect();
    let r = moving_range(cfg, pointing.range, pointing.velocity, p);
    let lambda = modes
        .as_slice()
        .iter()
        .map(|&ell| diagonal_approx(cfg, ell, r, k))
        .collect();
    BeamWeights {
        tx_phases,
        rx_phases,
        lambda,
    }
}

/// Closed-form leading-order diagonal entry at range `r` and wavenumber `k`.
pub fn diagonal_approx(cfg: &SystemConfig, mode: i32, r: f64, k: f64) -> Complex64 {
    let n = cfg.num_rx_antennas;
    let t = tau(mode, n);
    let a = k * cfg.tx_radius * cfg.comm_rx_radius / r;
    let mag =
        cfg.antenna_constant / (2.0 * k * r) * (n * n) as f64 / 2f64.powi(t as i32) / factorial(t) * a.powi(t as i32);
    Complex64::from_polar(mag, -k * r) * Complex64::i().powi(t as i32)
}

/// Exact diagonal entry of the aligned channel as a finite sum over the
/// element offset.
pub fn diagonal_direct(cfg: &SystemConfig, mode: i32, r: f64, k: f64) -> Complex64 {
    let n = cfg.num_rx_antennas;
    let a = k * cfg.tx_radius * cfg.comm_rx_radius / r;
    let sum: Complex64 = (0..n)
        .map(|w| {
            let d = TAU * w as f64 / n as f64;
            Complex64::from_polar(1.0, a * d.cos() - mode as f64 * d)
        })
        .sum();
    Complex64::from_polar(cfg.antenna_constant / (2.0 * k * r), -k * r) * sum * n as f64
}

/// The same entry through the power series of `e^{ia cos δ}`, truncated at
/// `terms`.
pub fn diagonal_series(cfg: &SystemConfig, mode: i32, r: f64, k: f64, terms: usize) -> Complex64 {
    let n = cfg.num_rx_antennas as i64;
    let a = k * cfg.tx_radius * cfg.comm_rx_radius / r;
    let mut total = Complex64::new(0.0, 0.0);
    let mut coeff = Complex64::new(1.0, 0.0);
    let mut binom = vec![1.0f64];
    for j in 0..terms {
        if j > 0 {
            coeff *= Complex64::new(0.0, a / (2.0 * j as f64));
            let mut next = vec![1.0; j + 1];
            for s in 1..j {
                next[s] = binom[s - 1] + binom[s];
            }
            binom = next;
        }
        let hits: f64 = (0..=j)
            .filter(|&s| (j as i64 - 2 * s as i64 - mode as i64).rem_euclid(n) == 0)
            .map(|s| binom[s])
            .sum();
        total += coeff * hits;
    }
    Complex64::from_polar(cfg.antenna_constant / (2.0 * k * r), -k * r) * total * (n * n) as f64
}

/// Receive DFT `F[u, n] = e^{−iℓ_u α_n}`.
pub fn dft_rx(modes: &ModeSet, elements: usize) -> DMatrix<Complex64> {
    DMatrix::from_fn(modes.len(), elements, |u, n| {
        Complex64::from_polar(1.0, -(modes.get(u) as f64) * TAU * n as f64 / elements as f64)
    })
}

/// Transmit mode generator `Fᴴ_U[m, u] = e^{iℓ_u φ_m}`.
pub fn dft_tx(modes: &ModeSet, elements: usize) -> DMatrix<Complex64> {
    DMatrix::from_fn(elements, modes.len(), |m, u| {
        Complex64::from_polar(1.0, modes.get(u) as f64 * TAU * m as f64 / elements as f64)
    })
}

/// UE post-processing `(F⊙B)`, without the detection diagonal.
pub fn rx_combiner(modes: &ModeSet, weights: Option<&BeamWeights>, elements: usize) -> DMatrix<Complex64> {
    let f = dft_rx(modes, elements);
    match weights {
        Some(w) => f.component_mul(&w.rx_mask(modes.len())),
        None => f,
    }
}

/// Transmit precoder `Fᴴ_U⊙P`.
pub fn tx_precoder(modes: &ModeSet, weights: Option<&BeamWeights>, elements: usize) -> DMatrix<Complex64> {
    let f = dft_tx(modes, elements);
    match weights {
        Some(w) => f.component_mul(&w.tx_mask(modes.len())),
        None => f,
    }
}

/// `U×U` mode-domain channel; plain `F·H·Fᴴ` when `weights` is `None`.
pub fn effective_channel(
    h: &DMatrix<Complex64>,
    modes: &ModeSet,
    weights: Option<&BeamWeights>,
) -> Result<DMatrix<Complex64>> {
    let (n, m) = h.shape();
    if n != m {
        return Err(Error::Dimension(format!("mode channel needs M = N, got {n}×{m}")));
    }
    if let Some(w) = weights {
        if w.tx_phases.len() != m || w.rx_phases.len() != n || w.lambda.len() != modes.len() {
            return Err(Error::Dimension("beam weights do not match the channel".into()));
        }
    }
    Ok(rx_combiner(modes, weights, n) * h * tx_precoder(modes, weights, m))
}

/// Off-diagonal to diagonal power ratio.
pub fn leakage_ratio(h: &DMatrix<Complex64>) -> f64 {
    let mut diag = 0.0;
    let mut off = 0.0;
    for ((i, j), z) in h
        .iter()
        .enumerate()
        .map(|(idx, z)| ((idx % h.nrows(), idx / h.nrows()), z))
    {
        if i == j {
            diag += z.norm_sqr();
        } else {
            off += z.norm_sqr();
        }
    }
    off / diag
}
