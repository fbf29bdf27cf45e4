//! One synthesize → decode → estimate pass over a scenario.

use serde::Serialize;

use crate::comm::to_db;
use crate::config::{SystemConfig, Target};
use crate::echo::{simulate, Echo};
use crate::error::Result;
use crate::estimate::metrics::{match_estimates, matched_errors, TargetError};
use crate::estimate::{EmOutcome, Estimator, ParameterEstimate, Profiles};

/// Outcome of [`run_sense`]. Estimates in `outcome` keep the estimator's
/// order; `assignment[q]` is the estimate matched to `truth[q]`.
#[derive(Clone, Debug)]
pub struct SenseRun {
    pub truth: Vec<Target>,
    pub echo: Echo,
    pub outcome: EmOutcome,
    pub assignment: Vec<usize>,
    pub errors: Vec<TargetError>,
}

impl SenseRun {
    /// Final estimates reordered to follow `truth`.
    pub fn matched(&self) -> Vec<ParameterEstimate> {
        self.assignment.iter().map(|&i| self.outcome.estimates[i]).collect()
    }
}

/// Simulates `targets` with noise seed `seed` and estimates them.
pub fn run_sense(est: &Estimator, cfg: &SystemConfig, targets: &[Target], seed: u64) -> Result<SenseRun> {
    let echo = simulate(cfg, est.waveform(), targets, seed)?;
    let outcome = est.run(&echo.noisy, targets.len())?;
    let assignment = match_estimates(&outcome.estimates, targets);
    let errors = matched_errors(&outcome.estimates, targets);
    Ok(SenseRun {
        truth: targets.to_vec(),
        echo,
        outcome,
        assignment,
        errors,
    })
}

/// Per-target spectra through the final estimates, each target observed
/// with the others cancelled and its chosen compensation applied.
pub fn sense_profiles(est: &Estimator, run: &SenseRun) -> Result<Vec<Profiles>> {
    let ests = &run.outcome.estimates;
    run.assignment
        .iter()
        .map(|&i| {
            let residual = est.residual(&run.echo.noisy, ests, Some(i));
            let obs = est.observe(&residual, run.outcome.compensation[i])?;
            Ok(est.profiles(&obs, &ests[i]))
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EstimateRow {
    pub iter: usize,
    pub target: usize,
    pub sigma_re: f64,
    pub sigma_im: f64,
    pub r: f64,
    pub v: f64,
    pub az_deg: f64,
    pub el_deg: f64,
    pub nmse_db: f64,
}

pub const ESTIMATE_HEADER: [&str; 9] = [
    "iter", "target", "sigma_re", "sigma_im", "r", "v", "az_deg", "el_deg", "nmse_db",
];

fn estimate_row(iter: usize, target: usize, e: &ParameterEstimate, nmse_db: f64) -> EstimateRow {
    EstimateRow {
        iter,
        target,
        sigma_re: e.amplitude.re,
        sigma_im: e.amplitude.im,
        r: e.range,
        v: e.velocity,
        az_deg: e.azimuth.to_degrees(),
        el_deg: e.elevation.to_degrees(),
        nmse_db,
    }
}

/// Final estimates, one row per true target.
pub fn estimate_rows(run: &SenseRun) -> Vec<EstimateRow> {
    let last = run
        .outcome
        .trace
        .last()
        .map(|r| (r.iter, r.nmse_db))
        .unwrap_or((0, 0.0));
    run.matched()
        .iter()
        .enumerate()
        .map(|(q, e)| estimate_row(last.0, q, e, last.1))
        .collect()
}

/// Every iteration of the EM trace, targets in truth order.
pub fn trace_rows(run: &SenseRun) -> Vec<EstimateRow> {
    run.outcome
        .trace
        .iter()
        .flat_map(|rec| {
            run.assignment
                .iter()
                .enumerate()
                .map(move |(q, &i)| estimate_row(rec.iter, q, &rec.estimates[i], rec.nmse_db))
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SpectrumRow {
    pub spectrum: &'static str,
    pub target: usize,
    pub x: f64,
    pub power_db: f64,
}

pub const SPECTRUM_HEADER: [&str; 4] = ["spectrum", "target", "x", "power_db"];

/// Spectra normalized to their own peak.
pub fn spectrum_rows(profiles: &[Profiles]) -> Vec<SpectrumRow> {
    let mut rows = Vec::new();
    for (q, p) in profiles.iter().enumerate() {
        for (name, samples) in [
            ("range", &p.range),
            ("velocity", &p.velocity),
            ("azimuth", &p.azimuth),
            ("elevation", &p.elevation),
        ] {
            let peak = samples.iter().map(|s| s.1).fold(0.0, f64::max);
            rows.extend(samples.iter().map(|&(x, power)| SpectrumRow {
                spectrum: name,
                target: q,
                x,
                power_db: to_db(power / peak),
            }));
        }
    }
    rows
}
