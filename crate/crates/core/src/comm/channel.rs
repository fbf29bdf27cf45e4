//! Line-of-sight channel between the transmit UCA and the UE's UCA.

use std::f64::consts::TAU;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::config::{SystemConfig, Target};
use crate::error::{Error, Result};

/// Which propagation distance enters the channel phases.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ChannelModel {
    /// Far-field phases with a common amplitude.
    #[default]
    FarField,
    /// Exact element-to-element distances in amplitude and phase.
    Exact,
}

/// Range of the UE at communication symbol `p` (1-based).
pub fn moving_range(cfg: &SystemConfig, range: f64, velocity: f64, p: usize) -> f64 {
    range + (p as f64 - 1.0) * cfg.symbol_duration * velocity
}

fn element_angle(i: usize, count: usize) -> f64 {
    TAU * i as f64 / count as f64
}

/// Exact distance from transmit element `m` to UE element `n` (both
/// 0-based) at symbol `p` (1-based).
pub fn exact_distance(cfg: &SystemConfig, target: &Target, p: usize, n: usize, m: usize) -> Result<f64> {
    let r = moving_range(cfg, target.range, target.radial_velocity, p);
    let (rt, rr) = (cfg.tx_radius, cfg.comm_rx_radius);
    let alpha = element_angle(n, cfg.num_rx_antennas);
    let phi = element_angle(m, cfg.num_tx_antennas);
    let s = target.elevation.sin();
    let d2 = rt * rt + rr * rr + r * r + 2.0 * r * rr * s * (target.azimuth - alpha).cos()
        - 2.0 * r * rt * s * (target.azimuth - phi).cos()
        - 2.0 * rt * rr * (alpha - phi).cos();
    if d2 < 0.0 || !d2.is_finite() {
        return Err(Error::Geometry(format!(
            "negative squared distance {d2} at p={p}, n={n}, m={m}"
        )));
    }
    Ok(d2.sqrt())
}

/// Far-field expansion of [`exact_distance`].
pub fn approx_distance(cfg: &SystemConfig, target: &Target, p: usize, n: usize, m: usize) -> f64 {
    let r = moving_range(cfg, target.range, target.radial_velocity, p);
    let (rt, rr) = (cfg.tx_radius, cfg.comm_rx_radius);
    let alpha = element_angle(n, cfg.num_rx_antennas);
    let phi = element_angle(m, cfg.num_tx_antennas);
    let s = target.elevation.sin();
    r + rr * s * (target.azimuth - alpha).cos()
        - rt * s * (target.azimuth - phi).cos()
        - rt * rr * (alpha - phi).cos() / r
}

/// Whether the UE is too close for the far-field channel to hold.
pub fn is_near_field(cfg: &SystemConfig, target: &Target) -> bool {
    target.range <= 10.0 * cfg.tx_radius.max(cfg.comm_rx_radius)
}

/// `N×M` channel on subcarrier `l` at symbol `p` (1-based).
pub fn los_channel(
    cfg: &SystemConfig,
    target: &Target,
    p: usize,
    l: usize,
    model: ChannelModel,
) -> Result<DMatrix<Complex64>> {
    if is_near_field(cfg, target) {
        log::warn!(
            "UE at {:.3} m is within ten array radii; far-field channel is inaccurate",
            target.range
        );
    }
    let k = cfg.wavenumber(l);
    let beta = cfg.antenna_constant;
    let (n_count, m_count) = (cfg.num_rx_antennas, cfg.num_tx_antennas);
    let mut h = DMatrix::zeros(n_count, m_count);
    match model {
        ChannelModel::FarField => {
            let r = moving_range(cfg, target.range, target.radial_velocity, p);
            if r <= 0.0 {
                return Err(Error::Geometry(format!("UE range {r} m at symbol {p} is not positive")));
            }
            let amp = beta / (2.0 * k * r);
            let s = target.elevation.sin();
            let cross = k * cfg.tx_radius * cfg.comm_rx_radius / r;
            for n in 0..n_count {
                let alpha = element_angle(n, n_count);
                for m in 0..m_count {
                    let phi = element_angle(m, m_count);
                    let phase = -k * r - k * cfg.comm_rx_radius * s * (target.azimuth - alpha).cos()
                        + k * cfg.tx_radius * s * (target.azimuth - phi).cos()
                        + cross * (alpha - phi).cos();
                    h[(n, m)] = Complex64::from_polar(amp, phase);
                }
            }
        }
        ChannelModel::Exact => {
            for n in 0..n_count {
                for m in 0..m_count {
                    let d = exact_distance(cfg, target, p, n, m)?;
                    h[(n, m)] = Complex64::from_polar(beta / (2.0 * k * d), -k * d);
                }
            }
        }
    }
    Ok(h)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn point_antennas_see_the_moving_range() {
        let mut cfg = SystemConfig::table1();
        cfg.tx_radius = 0.0;
        cfg.comm_rx_radius = 0.0;
        let t = Target::from_degrees(60.0, 20.0, 25.0, 4.0);
        for p in [1, 100, 1024] {
            let want = 60.0 + (p as f64 - 1.0) * cfg.symbol_duration * 4.0;
            assert!((exact_distance(&cfg, &t, p, 3, 7).unwrap() - want).abs() < 1e-12);
        }
    }

    #[test]
    fn far_field_distance_error() {
        let cfg = SystemConfig::table1();
        let t = Target::from_degrees(60.0, 20.0, 25.0, 3.0);
        for n in 0..16 {
            for m in 0..16 {
                let e = exact_distance(&cfg, &t, 1, n, m).unwrap();
                let a = approx_distance(&cfg, &t, 1, n, m);
                assert!((e - a).abs() < 1e-4);
            }
        }
    }

    #[test]
    fn leading_phase_advances_with_velocity() {
        let cfg = SystemConfig::table1();
        let t = Target::from_degrees(60.0, 20.0, 25.0, 5.0);
        let h1 = los_channel(&cfg, &t, 10, 0, ChannelModel::FarField).unwrap();
        let h2 = los_channel(&cfg, &t, 11, 0, ChannelModel::FarField).unwrap();
        let k = cfg.wavenumber(0);
        // The cross term also changes with r; it is far below this tolerance.
        let dphi = (h2[(0, 0)] / h1[(0, 0)]).arg();
        let want = (-k * cfg.symbol_duration * 5.0 + std::f64::consts::PI).rem_euclid(TAU) - std::f64::consts::PI;
        assert!((dphi - want).abs() < 1e-9);
        let amp = h1[(0, 0)].norm();
        assert!(h1.iter().all(|z| (z.norm() - amp).abs() < 1e-15 * amp.max(1.0)));
    }
}
