//! Analytic identities checked against brute-force evaluation.

use std::f64::consts::TAU;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::comm::{
    approx_distance, beam_weights, effective_channel, exact_distance, leakage_ratio, los_channel, ChannelModel,
    Pointing,
};
use crate::config::{SystemConfig, Target};
use crate::decode::{coupling_diagonal, coupling_matrix, decode};
use crate::echo::{doppler_phasor, synthesize, target_response, Waveform};
use crate::waveform::{hadamard, projection_matrix, CodeKind, ModeSet, PilotKind, SpreadingCode};

/// A deliberate defect used to confirm the checks can fail.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Fault {
    /// Decode with the conjugate of the matched Doppler phasor.
    FlippedCompensation,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    fn new(name: &'static str, passed: bool, detail: String) -> Self {
        Self { name, passed, detail }
    }
}

/// Every product `(ΠW)ᵀ(ΠW)` equals `U·I` in integer arithmetic.
pub fn check_code_orthogonality() -> Check {
    let mut worst = 0i64;
    for kappa in 1..=4u32 {
        let u = 1usize << kappa;
        let w = hadamard(u).expect("power of two");
        for p in 1..=u {
            let pw = projection_matrix(p, u) * &w;
            let m: Vec<i64> = pw.iter().map(|&x| x as i64).collect();
            for i in 0..u {
                for j in 0..u {
                    let dot: i64 = (0..u).map(|k| m[i * u + k] * m[j * u + k]).sum();
                    let want = if i == j { u as i64 } else { 0 };
                    worst = worst.max((dot - want).abs());
                }
            }
        }
    }
    Check::new(
        "code orthogonality",
        worst == 0,
        format!("max integer deviation {worst}"),
    )
}

/// Closed-form diagonal against brute-force coupling for random phasors,
/// plus the `ω → 1` limit.
pub fn check_coupling_closed_form(seed: u64) -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0f64;
    for u in [4usize, 8, 16] {
        let code = SpreadingCode::new(CodeKind::Hadamard, u).expect("power of two");
        for _ in 0..100 {
            let omega = Complex64::from_polar(1.0, rng.random_range(0.0..TAU));
            let p = rng.random_range(1..=u);
            let h = coupling_matrix(&code, p, omega);
            let want = coupling_diagonal(u, omega);
            for i in 0..u {
                worst = worst.max((h[(i, i)] - want).norm());
            }
        }
    }
    let path: Vec<f64> = (1..=12)
        .map(|k| (coupling_diagonal(16, Complex64::from_polar(1.0, 10f64.powi(-k))) - 1.0).norm())
        .collect();
    let shrinking = path.windows(2).all(|w| w[1] < w[0]);
    let limit = path[path.len() - 1];
    Check::new(
        "coupling diagonal closed form",
        worst < 1e-12 && shrinking && limit < 1e-9,
        format!("max deviation {worst:.3e}, |diag - 1| at 1e-12 perturbation {limit:.3e}"),
    )
}

/// Decoding with the matched conjugate phasor returns the ideal mode echo.
pub fn check_matched_decode(cfg: &SystemConfig, fault: Option<Fault>) -> Check {
    let mut c = cfg.clone();
    c.num_sensing_symbols = c.num_sensing_symbols.min(4 * c.num_modes).max(c.num_modes);
    let run = || -> crate::error::Result<f64> {
        let wf = Waveform::new(&c, CodeKind::Hadamard, PilotKind::RandomQpsk, 1)?;
        let t = Target::from_degrees(51.0, 15.0, 25.0, 5.0);
        let raw = synthesize(&c, &wf, &[t]);
        let v = match fault {
            Some(Fault::FlippedCompensation) => -t.radial_velocity,
            None => t.radial_velocity,
        };
        let dec = decode(&c, &wf, &raw, v, 1)?;
        let resp = target_response(&c, &wf, &t);
        let w = doppler_phasor(&c, t.radial_velocity);
        let mut err = 0.0;
        let mut norm = 0.0;
        for (j, &s) in dec.window_starts.iter().enumerate() {
            let ws = w.powi(s as i32);
            for (z, a) in dec.cube.row(j).iter().zip(&resp) {
                err += (z - ws * a).norm_sqr();
                norm += a.norm_sqr();
            }
        }
        Ok((err / norm).sqrt())
    };
    match run() {
        Ok(rel) => Check::new(
            "conjugate-matched decode",
            rel < 1e-12,
            format!("relative error {rel:.3e}"),
        ),
        Err(e) => Check::new("conjugate-matched decode", false, e.to_string()),
    }
}

/// Aligned channel is diagonalized by the mode DFTs; steering restores it
/// when misaligned.
pub fn check_channel_diagonalization(cfg: &SystemConfig) -> Check {
    let modes = ModeSet::centered(cfg.num_modes);
    let run = || -> crate::error::Result<(f64, f64)> {
        let aligned = Target {
            elevation: 0.0,
            ..Target::from_degrees(60.0, 0.0, 1.0, 0.0)
        };
        let h = los_channel(cfg, &aligned, 1, 0, ChannelModel::FarField)?;
        let plain = 10.0 * leakage_ratio(&effective_channel(&h, &modes, None)?).log10();
        let t = Target::from_degrees(60.0, 20.0, 25.0, 0.0);
        let h = los_channel(cfg, &t, 1, 0, ChannelModel::FarField)?;
        let before = leakage_ratio(&effective_channel(&h, &modes, None)?);
        let w = beam_weights(cfg, &modes, &Pointing::from(&t), 1, 0);
        let after = leakage_ratio(&effective_channel(&h, &modes, Some(&w))?);
        Ok((plain, 10.0 * (before / after).log10()))
    };
    match run() {
        Ok((aligned, gain)) => Check::new(
            "channel diagonalization",
            aligned < -200.0 && gain >= 30.0,
            format!("aligned leakage {aligned:.1} dB, steering gain {gain:.1} dB"),
        ),
        Err(e) => Check::new("channel diagonalization", false, e.to_string()),
    }
}

/// Far-field distance expansion error over all element pairs at 60 m.
pub fn check_distance_approximation(cfg: &SystemConfig) -> Check {
    let t = Target::from_degrees(60.0, 20.0, 25.0, 3.0);
    let mut worst = 0.0f64;
    for n in 0..cfg.num_rx_antennas {
        for m in 0..cfg.num_tx_antennas {
            match exact_distance(cfg, &t, 1, n, m) {
                Ok(d) => worst = worst.max((d - approx_distance(cfg, &t, 1, n, m)).abs()),
                Err(e) => return Check::new("distance approximation", false, e.to_string()),
            }
        }
    }
    Check::new(
        "distance approximation",
        worst < 1e-4,
        format!("max error {worst:.3e} m"),
    )
}

pub fn selftest(cfg: &SystemConfig, fault: Option<Fault>) -> Vec<Check> {
    vec![
        check_code_orthogonality(),
        check_coupling_closed_form(7),
        check_matched_decode(cfg, fault),
        check_channel_diagonalization(cfg),
        check_distance_approximation(cfg),
    ]
}
