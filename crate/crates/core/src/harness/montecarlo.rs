//! Error statistics over random single-target trials.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::config::{SystemConfig, Target};
use crate::error::{Error, Result};
use crate::estimate::{Estimator, EstimatorKind};
use crate::waveform::PilotKind;

use super::sense::run_sense;

/// Stream reserved for target draws so they never overlap the noise.
const GEOMETRY_STREAM: u64 = u64::MAX - 1;

/// Random target of trial `seed`: range in [30, 60] m, azimuth and
/// elevation in [5°, 80°].
pub fn draw_target(seed: u64, velocity: f64) -> Target {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(GEOMETRY_STREAM);
    let range = rng.random_range(30.0..=60.0);
    let az = rng.random_range(5.0..=80.0);
    let el = rng.random_range(5.0..=80.0);
    Target::from_degrees(range, az, el, velocity)
}

#[derive(Clone, Debug, PartialEq)]
pub struct McSpec {
    pub estimators: Vec<EstimatorKind>,
    pub snrs_db: Vec<f64>,
    pub velocities: Vec<f64>,
    pub trials: usize,
    /// Trial `i` uses seed `seed + i` for both geometry and noise.
    pub seed: u64,
    pub pilots: PilotKind,
}

impl Default for McSpec {
    fn default() -> Self {
        Self {
            estimators: vec![EstimatorKind::CdmmVcmEm, EstimatorKind::TdmmBaseline],
            snrs_db: vec![0.0, 5.0, 10.0, 15.0, 20.0],
            velocities: vec![0.0, 3.0, 5.0, 8.0, 10.0],
            trials: 50,
            seed: 0,
            pilots: PilotKind::Unit,
        }
    }
}

/// Mean absolute errors of one `(estimator, snr, velocity)` cell.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct McRow {
    pub estimator: String,
    pub snr_db: f64,
    pub velocity: f64,
    pub trials: usize,
    pub pos_err_m: f64,
    pub vel_err_mps: f64,
    pub az_err_deg: f64,
    pub el_err_deg: f64,
}

pub const MC_HEADER: [&str; 8] = [
    "estimator",
    "snr_db",
    "velocity",
    "trials",
    "pos_err_m",
    "vel_err_mps",
    "az_err_deg",
    "el_err_deg",
];

/// Runs every cell of `spec` at the sensing length of `cfg`.
pub fn run_mc(cfg: &SystemConfig, spec: &McSpec) -> Result<Vec<McRow>> {
    if spec.trials == 0 {
        return Err(Error::InvalidConfig("trial count must be at least 1".into()));
    }
    let mut rows = Vec::new();
    for &kind in &spec.estimators {
        let est = Estimator::new(cfg, kind, spec.pilots, spec.seed)?;
        for &snr in &spec.snrs_db {
            let cell_cfg = cfg.clone().with_snr_db(snr);
            for &v in &spec.velocities {
                let errs = (0..spec.trials as u64)
                    .into_par_iter()
                    .map(|i| {
                        let seed = spec.seed.wrapping_add(i);
                        let t = draw_target(seed, v);
                        run_sense(&est, &cell_cfg, &[t], seed).map(|run| run.errors[0])
                    })
                    .collect::<Result<Vec<_>>>()?;
                let n = errs.len() as f64;
                let mean =
                    |f: &dyn Fn(&crate::estimate::metrics::TargetError) -> f64| errs.iter().map(f).sum::<f64>() / n;
                rows.push(McRow {
                    estimator: kind.name().to_string(),
                    snr_db: snr,
                    velocity: v,
                    trials: spec.trials,
                    pos_err_m: mean(&|e| e.position),
                    vel_err_mps: mean(&|e| e.velocity),
                    az_err_deg: mean(&|e| e.azimuth.to_degrees()),
                    el_err_deg: mean(&|e| e.elevation.to_degrees()),
                });
            }
        }
    }
    Ok(rows)
}
