//! Noise-free and noisy radar echoes of the coded vortex transmission.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use crate::bessel::{bessel_j, bessel_j_many};
use crate::config::{SystemConfig, Target};
use crate::cube::Cube;
use crate::error::{Error, Result};
use crate::waveform::{i_pow_neg, CodeKind, ModeSet, PilotKind, Pilots, SpreadingCode};

/// Everything the transmitter puts on the air during the sensing symbols.
#[derive(Clone, Debug)]
pub struct Waveform {
    pub modes: ModeSet,
    pub code: SpreadingCode,
    pub pilots: Pilots,
}

impl Waveform {
    pub fn new(cfg: &SystemConfig, code: CodeKind, pilots: PilotKind, pilot_seed: u64) -> Result<Self> {
        let u = cfg.num_modes;
        Ok(Self {
            modes: ModeSet::centered(u),
            code: SpreadingCode::new(code, u)?,
            pilots: Pilots::new(pilots, cfg.num_subcarriers, u, pilot_seed),
        })
    }

    pub fn num_modes(&self) -> usize {
        self.modes.len()
    }
}

/// Phase advance of one symbol for radial velocity `v`, `ω = e^{−i2π f_D Tc}`
/// with `f_D = −2v fc/c`.
pub fn doppler_phasor(cfg: &SystemConfig, v: f64) -> Complex64 {
    Complex64::from_polar(1.0, doppler_phase(cfg, v))
}

pub fn doppler_phase(cfg: &SystemConfig, v: f64) -> f64 {
    4.0 * PI * v * cfg.carrier_frequency * cfg.symbol_duration / cfg.speed_of_light
}

/// Inverse of [`doppler_phase`].
pub fn velocity_from_phase(cfg: &SystemConfig, phase: f64) -> f64 {
    phase * cfg.speed_of_light / (4.0 * PI * cfg.carrier_frequency * cfg.symbol_duration)
}

/// Bessel factors of one direction: `J_0(k_l R_r sinϑ)` per subcarrier and
/// `J_ℓ(k_l R_t sinϑ)` laid out `(l, u)`.
#[derive(Clone, Debug)]
pub struct BesselTemplate {
    pub rx: Vec<f64>,
    pub tx: Vec<f64>,
}

impl BesselTemplate {
    pub fn new(cfg: &SystemConfig, modes: &ModeSet, elevation: f64) -> Self {
        let s = elevation.sin();
        let l_count = cfg.num_subcarriers;
        let mut rx = Vec::with_capacity(l_count);
        let mut tx = Vec::with_capacity(l_count * modes.len());
        for l in 0..l_count {
            let k = cfg.wavenumber(l);
            rx.push(bessel_j(0, k * cfg.rx_radius * s));
            tx.extend(bessel_j_many(modes.as_slice(), k * cfg.tx_radius * s));
        }
        Self { rx, tx }
    }
}

/// Steering response `e^{i2k_l r} e^{iℓφ} J_0 J_ℓ / r²` laid out `(l, u)`.
pub fn steering(
    cfg: &SystemConfig,
    modes: &ModeSet,
    range: f64,
    azimuth: f64,
    bessel: &BesselTemplate,
) -> Vec<Complex64> {
    let u_count = modes.len();
    let mode_phase: Vec<Complex64> = modes
        .as_slice()
        .iter()
        .map(|&m| Complex64::from_polar(1.0, m as f64 * azimuth))
        .collect();
    let inv_r2 = 1.0 / (range * range);
    let mut out = Vec::with_capacity(cfg.num_subcarriers * u_count);
    for l in 0..cfg.num_subcarriers {
        let range_phase = Complex64::from_polar(inv_r2 * bessel.rx[l], 2.0 * cfg.wavenumber(l) * range);
        let tx = &bessel.tx[l * u_count..(l + 1) * u_count];
        out.extend(mode_phase.iter().zip(tx).map(|(m, j)| range_phase * m * j));
    }
    out
}

/// Per-symbol gain `β₁ i^{−ℓ_u} s_u(l)` applied before spreading, `(l, u)`.
pub fn transmit_gain(cfg: &SystemConfig, wf: &Waveform) -> Vec<Complex64> {
    let beta1 = cfg.combined_gain();
    let u_count = wf.num_modes();
    let mut out = Vec::with_capacity(cfg.num_subcarriers * u_count);
    for l in 0..cfg.num_subcarriers {
        for u in 0..u_count {
            out.push(beta1 * i_pow_neg(wf.modes.get(u)) * wf.pilots.get(l, u));
        }
    }
    out
}

/// Spread response of one target per code row: `g(j, l) = Σ_u a(l,u) W[j,u]`.
fn spread_rows(cfg: &SystemConfig, wf: &Waveform, response: &[Complex64]) -> Vec<Complex64> {
    let u_count = wf.num_modes();
    let l_count = cfg.num_subcarriers;
    let w = wf.code.matrix();
    let mut g = vec![Complex64::new(0.0, 0.0); u_count * l_count];
    for j in 0..u_count {
        for l in 0..l_count {
            g[j * l_count + l] = (0..u_count).map(|u| response[l * u_count + u] * w[(j, u)]).sum();
        }
    }
    g
}

/// Adds the echo of `response` (scaled steering) moving with Doppler phase
/// `phase` into the `symbols × L × 1` cube `out`.
pub fn accumulate_echo(cfg: &SystemConfig, wf: &Waveform, response: &[Complex64], phase: f64, out: &mut Cube) {
    let l_count = cfg.num_subcarriers;
    let u_count = wf.num_modes();
    let g = spread_rows(cfg, wf, response);
    out.as_mut_slice()
        .par_chunks_mut(l_count)
        .enumerate()
        .for_each(|(p, row)| {
            let w = Complex64::from_polar(1.0, p as f64 * phase);
            let j = p % u_count;
            for (l, y) in row.iter_mut().enumerate() {
                *y += w * g[j * l_count + l];
            }
        });
}

/// Full complex response `β₁σ i^{−ℓ} s_u(l) A(l,u)` of one target, `(l, u)`.
pub fn target_response(cfg: &SystemConfig, wf: &Waveform, target: &Target) -> Vec<Complex64> {
    let bessel = BesselTemplate::new(cfg, &wf.modes, target.elevation);
    let a = steering(cfg, &wf.modes, target.range, target.azimuth, &bessel);
    let gain = transmit_gain(cfg, wf);
    a.iter().zip(&gain).map(|(a, g)| a * g * target.reflectivity).collect()
}

/// Noise-free echo of one target over the first `symbols` symbols.
pub fn synthesize_target(cfg: &SystemConfig, wf: &Waveform, target: &Target, symbols: usize) -> Cube {
    let mut cube = Cube::zeros(symbols, cfg.num_subcarriers, 1);
    let resp = target_response(cfg, wf, target);
    accumulate_echo(cfg, wf, &resp, doppler_phase(cfg, target.radial_velocity), &mut cube);
    cube
}

/// Noise-free superposition of all targets over the sensing symbols.
pub fn synthesize(cfg: &SystemConfig, wf: &Waveform, targets: &[Target]) -> Cube {
    let mut cube = Cube::zeros(cfg.num_sensing_symbols, cfg.num_subcarriers, 1);
    for t in targets {
        let resp = target_response(cfg, wf, t);
        accumulate_echo(cfg, wf, &resp, doppler_phase(cfg, t.radial_velocity), &mut cube);
    }
    cube
}

/// Noise variance for the configured SNR, referenced to the strongest
/// single-target echo power.
pub fn noise_variance(cfg: &SystemConfig, wf: &Waveform, targets: &[Target]) -> f64 {
    let p_sig = targets
        .iter()
        .map(|t| synthesize_target(cfg, wf, t, cfg.num_sensing_symbols).mean_power())
        .fold(0.0, f64::max);
    p_sig / 10f64.powf(cfg.snr_db / 10.0)
}

/// Adds circular complex white Gaussian noise of variance `variance`.
/// Symbol row `p` draws from stream `p` of the seeded generator, so the
/// result does not depend on scheduling.
pub fn add_noise(cube: &mut Cube, variance: f64, seed: u64) {
    if variance <= 0.0 {
        return;
    }
    let scale = (variance / 2.0).sqrt();
    let row_len = cube.subcarriers() * cube.modes();
    cube.as_mut_slice()
        .par_chunks_mut(row_len)
        .enumerate()
        .for_each(|(p, row)| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(p as u64);
            for y in row.iter_mut() {
                let re: f64 = StandardNormal.sample(&mut rng);
                let im: f64 = StandardNormal.sample(&mut rng);
                *y += Complex64::new(re * scale, im * scale);
            }
        });
}

/// A simulated sensing capture.
#[derive(Clone, Debug)]
pub struct Echo {
    pub clean: Cube,
    pub noisy: Cube,
    pub noise_variance: f64,
}

pub fn simulate(cfg: &SystemConfig, wf: &Waveform, targets: &[Target], seed: u64) -> Result<Echo> {
    cfg.validate()?;
    if wf.num_modes() != cfg.num_modes || wf.pilots.subcarriers() != cfg.num_subcarriers {
        return Err(Error::Dimension("waveform does not match configuration".into()));
    }
    let clean = synthesize(cfg, wf, targets);
    let noise_variance = noise_variance(cfg, wf, targets);
    let mut noisy = clean.clone();
    add_noise(&mut noisy, noise_variance, seed);
    Ok(Echo {
        clean,
        noisy,
        noise_variance,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::Target;

    fn small_cfg() -> SystemConfig {
        let mut cfg = SystemConfig::table1();
        cfg.num_subcarriers = 8;
        cfg.num_sensing_symbols = 24;
        cfg.num_modes = 4;
        cfg
    }

    // Direct evaluation of the double sum over targets and modes.
    fn direct(cfg: &SystemConfig, wf: &Waveform, t: &Target, p: usize, l: usize) -> Complex64 {
        let k = cfg.wavenumber(l);
        let s = t.elevation.sin();
        let omega = Complex64::from_polar(1.0, doppler_phase(cfg, t.radial_velocity));
        let mut sum = Complex64::new(0.0, 0.0);
        for u in 0..wf.num_modes() {
            let m = wf.modes.get(u);
            sum += Complex64::from_polar(1.0, m as f64 * t.azimuth)
                * Complex64::new(0.0, 1.0).powi(-m)
                * bessel_j(m, k * cfg.tx_radius * s)
                * wf.pilots.get(l, u)
                * wf.code.weight(p, u);
        }
        cfg.combined_gain() * t.reflectivity / (t.range * t.range)
            * Complex64::from_polar(1.0, 2.0 * k * t.range)
            * omega.powi(p as i32 - 1)
            * bessel_j(0, k * cfg.rx_radius * s)
            * sum
    }

    #[test]
    fn synthesis_matches_direct_sum() {
        let cfg = small_cfg();
        let wf = Waveform::new(&cfg, CodeKind::Hadamard, PilotKind::RandomQpsk, 9).unwrap();
        let t = Target::from_degrees(40.0, 33.0, 27.0, 4.1).with_reflectivity(0.7);
        let cube = synthesize(&cfg, &wf, &[t]);
        for p in 1..=cfg.num_sensing_symbols {
            for l in 0..cfg.num_subcarriers {
                let want = direct(&cfg, &wf, &t, p, l);
                assert!((cube.get(p - 1, l, 0) - want).norm() < 1e-12 * want.norm().max(1e-6));
            }
        }
    }

    #[test]
    fn doppler_phase_round_trip() {
        let cfg = SystemConfig::table1();
        let v = 5.0;
        assert!((velocity_from_phase(&cfg, doppler_phase(&cfg, v)) - v).abs() < 1e-12);
        // Phase at the unambiguous velocity is π/M.
        let vmax = cfg.wavelength() / (4.0 * cfg.symbol_duration * cfg.num_tx_antennas as f64);
        assert!((doppler_phase(&cfg, vmax) - PI / cfg.num_tx_antennas as f64).abs() < 1e-12);
    }

    #[test]
    fn noise_power_and_determinism() {
        let cfg = small_cfg();
        let mut a = Cube::zeros(200, 50, 1);
        add_noise(&mut a, 2.0, 5);
        let mut b = Cube::zeros(200, 50, 1);
        add_noise(&mut b, 2.0, 5);
        assert_eq!(a, b);
        assert!((a.mean_power() - 2.0).abs() < 0.1);
        let wf = Waveform::new(&cfg, CodeKind::Hadamard, PilotKind::Unit, 0).unwrap();
        let t = Target::from_degrees(40.0, 33.0, 27.0, 0.0);
        let var = noise_variance(&cfg.clone().with_snr_db(10.0), &wf, &[t]);
        let sig = synthesize(&cfg, &wf, &[t]).mean_power();
        assert!((var * 10.0 / sig - 1.0).abs() < 1e-12);
    }
}
