//! Reference implementations written straight from the signal model, used
//! as oracles by the integration tests.

#![allow(dead_code)]

use std::f64::consts::{PI, TAU};

use nalgebra::DMatrix;
use vortex_isac::{Complex64, SystemConfig, Target};

pub fn small_cfg(subcarriers: usize, symbols: usize, modes: usize) -> SystemConfig {
    let mut cfg = SystemConfig::table1();
    cfg.num_subcarriers = subcarriers;
    cfg.num_sensing_symbols = symbols;
    cfg.num_modes = modes;
    cfg
}

/// `J_n(x)` from the periodic integral `(1/2π)∫ cos(nτ − x sin τ) dτ`; the
/// trapezoid rule is spectrally accurate on a full period.
pub fn bessel(n: i32, x: f64) -> f64 {
    let k = 512;
    (0..k)
        .map(|j| {
            let t = TAU * j as f64 / k as f64;
            (n as f64 * t - x * t.sin()).cos()
        })
        .sum::<f64>()
        / k as f64
}

/// Sylvester Hadamard matrix by repeated doubling.
pub fn sylvester(u: usize) -> DMatrix<f64> {
    let mut h = DMatrix::from_element(1, 1, 1.0);
    while h.nrows() < u {
        let n = h.nrows();
        let mut next = DMatrix::zeros(2 * n, 2 * n);
        for i in 0..n {
            for j in 0..n {
                next[(i, j)] = h[(i, j)];
                next[(i, j + n)] = h[(i, j)];
                next[(i + n, j)] = h[(i, j)];
                next[(i + n, j + n)] = -h[(i, j)];
            }
        }
        h = next;
    }
    h
}

pub fn modes(u: usize) -> Vec<i32> {
    (0..u as i32).map(|i| i - (u / 2) as i32).collect()
}

/// Noise-free mode response `βMN σ e^{−iπℓ/2} s_u(l) J_0 J_ℓ e^{iℓφ} e^{i2kr} / r²`.
pub fn mode_response(
    cfg: &SystemConfig,
    t: &Target,
    pilot: impl Fn(usize, usize) -> Complex64,
    l: usize,
    u: usize,
) -> Complex64 {
    let ell = modes(cfg.num_modes)[u];
    let k = TAU * (cfg.carrier_frequency + l as f64 * cfg.subcarrier_spacing) / cfg.speed_of_light;
    let s = t.elevation.sin();
    let gain = cfg.antenna_constant * (cfg.num_tx_antennas * cfg.num_rx_antennas) as f64 * t.reflectivity;
    let mag = gain * bessel(0, k * cfg.rx_radius * s) * bessel(ell, k * cfg.tx_radius * s) / (t.range * t.range);
    let phase = -PI / 2.0 * ell as f64 + ell as f64 * t.azimuth + 2.0 * k * t.range;
    pilot(l, u) * Complex64::from_polar(mag, phase)
}

pub fn doppler(cfg: &SystemConfig, v: f64) -> Complex64 {
    Complex64::from_polar(
        1.0,
        4.0 * PI * v * cfg.carrier_frequency * cfg.symbol_duration / cfg.speed_of_light,
    )
}

/// Raw echo on 0-based symbol `p`: row `p mod U` of the code spreads the
/// mode responses and the Doppler phase advances once per symbol.
pub fn raw_echo(
    cfg: &SystemConfig,
    code: &DMatrix<f64>,
    targets: &[Target],
    pilot: impl Fn(usize, usize) -> Complex64 + Copy,
    p: usize,
    l: usize,
) -> Complex64 {
    let u_count = cfg.num_modes;
    targets
        .iter()
        .map(|t| {
            let w = doppler(cfg, t.radial_velocity).powi(p as i32);
            (0..u_count)
                .map(|u| code[(p % u_count, u)] * mode_response(cfg, t, pilot, l, u))
                .sum::<Complex64>()
                * w
        })
        .sum()
}

/// `(1/g) Σ_k W[⟨p+k⟩, i] W[⟨p+k⟩, j] ω^k` for a window opening at 0-based
/// symbol `p`.
pub fn coupling(code: &DMatrix<f64>, gram: f64, p: usize, omega: Complex64) -> DMatrix<Complex64> {
    let u = code.nrows();
    DMatrix::from_fn(u, u, |i, j| {
        (0..u)
            .map(|k| omega.powi(k as i32) * code[((p + k) % u, i)] * code[((p + k) % u, j)])
            .sum::<Complex64>()
            / gram
    })
}

/// Transmit element `m` and UE element `n` as points in space, with the UE
/// array parallel to the transmit plane.
pub fn element_distance(cfg: &SystemConfig, t: &Target, r: f64, n: usize, m: usize) -> f64 {
    let phi = TAU * m as f64 / cfg.num_tx_antennas as f64;
    let alpha = TAU * n as f64 / cfg.num_rx_antennas as f64;
    let tx = [cfg.tx_radius * phi.cos(), cfg.tx_radius * phi.sin(), 0.0];
    let c = vortex_isac::config::spherical_to_cartesian(r, t.azimuth, t.elevation);
    let rx = [
        c[0] + cfg.comm_rx_radius * alpha.cos(),
        c[1] + cfg.comm_rx_radius * alpha.sin(),
        c[2],
    ];
    ((rx[0] - tx[0]).powi(2) + (rx[1] - tx[1]).powi(2) + (rx[2] - tx[2]).powi(2)).sqrt()
}

pub fn max_abs_diff(a: &DMatrix<Complex64>, b: &DMatrix<Complex64>) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

/// Power series of `J_q(x)`, accurate in relative terms for small `x`.
pub fn bessel_series(q: i32, x: f64) -> f64 {
    let n = q.unsigned_abs() as i32;
    let mut term = (x / 2.0).powi(n) / (1..=n).map(|k| k as f64).product::<f64>();
    let mut sum = term;
    for k in 1..40 {
        term *= -(x / 2.0).powi(2) / (k as f64 * (k + n) as f64);
        sum += term;
    }
    if q < 0 && n % 2 == 1 {
        -sum
    } else {
        sum
    }
}
