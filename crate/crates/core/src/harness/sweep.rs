//! Pilot-length trade-off: sensing accuracy against communication time.

use rayon::prelude::*;
use serde::Serialize;

use crate::comm::{link_report, LinkOptions, Pointing};
use crate::config::{SystemConfig, Target};
use crate::error::{Error, Result};
use crate::estimate::metrics::direction_error;
use crate::estimate::{Estimator, EstimatorKind};
use crate::waveform::PilotKind;

use super::montecarlo::draw_target;
use super::sense::run_sense;

#[derive(Clone, Debug, PartialEq)]
pub struct SweepSpec {
    pub psens: Vec<usize>,
    pub snrs_db: Vec<f64>,
    pub trials: usize,
    pub seed: u64,
    pub estimator: EstimatorKind,
    /// Radial velocity of the UE in every trial.
    pub velocity: f64,
    pub pilots: PilotKind,
    /// Subcarriers and channel model; the SNR is taken from `snrs_db`.
    pub link: LinkOptions,
}

impl SweepSpec {
    pub fn new(total_symbols: usize) -> Self {
        let mut psens: Vec<usize> = vec![8, 16, 24, 32, 48, 64, 96, 128, 192, 256];
        psens.retain(|&p| p <= total_symbols);
        psens.push(total_symbols);
        psens.dedup();
        Self {
            psens,
            snrs_db: vec![15.0],
            trials: 50,
            seed: 0,
            estimator: EstimatorKind::CdmmVcmEm,
            velocity: 3.0,
            pilots: PilotKind::Unit,
            link: LinkOptions::new(15.0),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepRow {
    pub psen: usize,
    pub snr_db: f64,
    pub angle_err_deg: f64,
    pub mean_sinr_db: f64,
    pub c_paper: f64,
    pub se_avg: f64,
}

pub const SWEEP_HEADER: [&str; 6] = ["psen", "snr_db", "angle_err_deg", "mean_sinr_db", "c_paper", "se_avg"];

/// Outcome of one sweep trial. `mean_sinr` is linear.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SweepTrial {
    pub angle_err_deg: f64,
    pub mean_sinr: f64,
    pub c_paper: f64,
    pub se_avg: f64,
}

/// All trials of one `(psen, snr)` point, in trial order.
#[derive(Clone, Debug, PartialEq)]
pub struct SweepCell {
    pub psen: usize,
    pub snr_db: f64,
    pub trials: Vec<SweepTrial>,
}

impl SweepCell {
    pub fn row(&self) -> SweepRow {
        let n = self.trials.len() as f64;
        let mean = |f: fn(&SweepTrial) -> f64| self.trials.iter().map(f).sum::<f64>() / n;
        SweepRow {
            psen: self.psen,
            snr_db: self.snr_db,
            angle_err_deg: mean(|t| t.angle_err_deg),
            mean_sinr_db: crate::comm::to_db(mean(|t| t.mean_sinr)),
            c_paper: mean(|t| t.c_paper),
            se_avg: mean(|t| t.se_avg),
        }
    }
}

/// Senses one UE with `psen` pilots and evaluates the rest of the frame.
/// Below one full code period there is nothing to decode, so the beams
/// stay at boresight.
fn trial(
    est: Option<&Estimator>,
    cfg: &SystemConfig,
    ue: &Target,
    psen: usize,
    seed: u64,
    opts: &LinkOptions,
) -> Result<SweepTrial> {
    let pointing = match est {
        Some(est) => {
            let run = run_sense(est, cfg, std::slice::from_ref(ue), seed)?;
            Some(Pointing::from(&run.outcome.estimates[0]))
        }
        None => None,
    };
    let angle_err = match &pointing {
        Some(p) => direction_error(p.azimuth, p.elevation, ue),
        None => direction_error(0.0, 0.0, ue),
    };
    let report = link_report(cfg, ue, pointing, psen, opts)?;
    let mean_sinr = if report.entries.is_empty() {
        0.0
    } else {
        report.entries.iter().map(|e| e.sinr).sum::<f64>() / report.entries.len() as f64
    };
    Ok(SweepTrial {
        angle_err_deg: angle_err.to_degrees(),
        mean_sinr,
        c_paper: report.c_paper,
        se_avg: report.se_avg,
    })
}

pub fn run_sweep(cfg: &SystemConfig, spec: &SweepSpec) -> Result<Vec<SweepRow>> {
    Ok(run_sweep_trials(cfg, spec)?.iter().map(SweepCell::row).collect())
}

/// Like [`run_sweep`] but keeps every trial.
pub fn run_sweep_trials(cfg: &SystemConfig, spec: &SweepSpec) -> Result<Vec<SweepCell>> {
    if spec.trials == 0 {
        return Err(Error::InvalidConfig("trial count must be at least 1".into()));
    }
    let mut cells = Vec::new();
    for &snr in &spec.snrs_db {
        let opts = LinkOptions {
            snr_db: snr,
            ..spec.link.clone()
        };
        for &psen in &spec.psens {
            let c = cfg.clone().with_sensing_symbols(psen).with_snr_db(snr);
            let est = if psen >= cfg.num_modes {
                Some(Estimator::new(&c, spec.estimator, spec.pilots, spec.seed)?)
            } else {
                None
            };
            let trials = (0..spec.trials as u64)
                .into_par_iter()
                .map(|i| {
                    let seed = spec.seed.wrapping_add(i);
                    let ue = draw_target(seed, spec.velocity);
                    trial(est.as_ref(), &c, &ue, psen, seed, &opts)
                })
                .collect::<Result<Vec<_>>>()?;
            cells.push(SweepCell {
                psen,
                snr_db: snr,
                trials,
            });
        }
    }
    Ok(cells)
}
