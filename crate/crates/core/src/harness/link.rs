//! Sensing-assisted link evaluation for the communication target of a
//! scenario.

use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::comm::{link_report, LinkOptions, LinkReport, Pointing};
use crate::config::{Scenario, SystemConfig};
use crate::error::{Error, Result};
use crate::estimate::metrics::direction_error;
use crate::estimate::Estimator;

use super::sense::{run_sense, SenseRun};

/// Where the beams are steered.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum PointingSource {
    /// Estimates from the sensing phase.
    #[default]
    Sensed,
    /// Ground-truth geometry.
    Truth,
    /// No steering.
    Boresight,
}

impl fmt::Display for PointingSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Sensed => "sensed",
            Self::Truth => "truth",
            Self::Boresight => "boresight",
        })
    }
}

impl FromStr for PointingSource {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "sensed" => Ok(Self::Sensed),
            "truth" => Ok(Self::Truth),
            "boresight" => Ok(Self::Boresight),
            _ => Err(Error::InvalidConfig(format!("unknown pointing source {s:?}"))),
        }
    }
}

#[derive(Clone, Debug)]
pub struct LinkRun {
    pub sense: Option<SenseRun>,
    pub pointing: Option<Pointing>,
    /// Direction error of the pointing in radians.
    pub angle_error: f64,
    pub report: LinkReport,
}

pub fn run_link(
    est: &Estimator,
    cfg: &SystemConfig,
    sc: &Scenario,
    seed: u64,
    source: PointingSource,
    opts: &LinkOptions,
) -> Result<LinkRun> {
    let ue = *sc
        .comm_target()
        .ok_or_else(|| Error::InvalidScenario(format!("no target at comm index {}", sc.comm_target_index)))?;
    let psen = cfg.num_sensing_symbols;
    let (sense, pointing) = match source {
        PointingSource::Sensed if psen >= cfg.num_modes => {
            let run = run_sense(est, cfg, &sc.targets, seed)?;
            let p = Pointing::from(&run.outcome.estimates[run.assignment[sc.comm_target_index]]);
            (Some(run), Some(p))
        }
        PointingSource::Sensed | PointingSource::Boresight => (None, None),
        PointingSource::Truth => (None, Some(Pointing::from(&ue))),
    };
    let angle_error = match &pointing {
        Some(p) => direction_error(p.azimuth, p.elevation, &ue),
        None => direction_error(0.0, 0.0, &ue),
    };
    let report = link_report(cfg, &ue, pointing, psen, opts)?;
    Ok(LinkRun {
        sense,
        pointing,
        angle_error,
        report,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LinkRow {
    pub p: usize,
    pub subcarrier: usize,
    pub mode: i32,
    pub sinr_db: f64,
}

pub const LINK_HEADER: [&str; 4] = ["p", "subcarrier", "mode", "sinr_db"];

pub fn link_rows(report: &LinkReport) -> Vec<LinkRow> {
    report
        .entries
        .iter()
        .map(|e| LinkRow {
            p: e.symbol,
            subcarrier: e.subcarrier,
            mode: e.mode,
            sinr_db: e.sinr_db(),
        })
        .collect()
}
