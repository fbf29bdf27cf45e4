//! The EM sweep: per target, cancel the others, match the velocity,
//! decode and run the M-step; repeat until the fit stops improving.

use super::{nmse_from_energies, Estimator, ParameterEstimate};
use crate::cube::Cube;
use crate::error::{Error, Result};

/// Estimates after one sweep (iteration 0 is the bootstrap).
#[derive(Clone, Debug, PartialEq)]
pub struct IterationRecord {
    pub iter: usize,
    pub estimates: Vec<ParameterEstimate>,
    pub nmse_db: f64,
}

#[derive(Clone, Debug)]
pub struct EmOutcome {
    pub estimates: Vec<ParameterEstimate>,
    pub trace: Vec<IterationRecord>,
    /// Noise-split weights `β_q`, with `Σ β_q² = 1`.
    pub weights: Vec<f64>,
    pub converged: bool,
    /// Targets whose last M-step saw an all-zero observation.
    pub degenerate: Vec<bool>,
    /// Compensation velocity chosen for each target in the last sweep.
    pub compensation: Vec<f64>,
}

impl EmOutcome {
    pub fn iterations(&self) -> usize {
        self.trace.len().saturating_sub(1)
    }

    pub fn final_nmse_db(&self) -> f64 {
        self.trace.last().map(|r| r.nmse_db).unwrap_or(0.0)
    }
}

impl Estimator {
    /// Estimates `q` targets from the raw capture `raw`.
    pub fn run(&self, raw: &Cube, q: usize) -> Result<EmOutcome> {
        if q == 0 {
            return Err(Error::InvalidScenario("at least one target must be estimated".into()));
        }
        let u = self.wf.num_modes();
        if raw.symbols() < u {
            return Err(Error::Window {
                start: 0,
                width: u,
                available: raw.symbols(),
            });
        }
        let total = raw.energy();
        if total == 0.0 {
            return Err(Error::ZeroNorm("observed cube"));
        }
        let symbols = raw.symbols();
        let mut ests = self.initialize(raw, q)?;
        let mut models: Vec<Cube> = ests.iter().map(|e| self.synthesize(e, symbols)).collect();
        let nmse = |models: &[Cube]| {
            let mut res = raw.clone();
            for m in models {
                res.sub_assign(m);
            }
            nmse_from_energies(res.energy(), total)
        };
        let mut trace = vec![IterationRecord {
            iter: 0,
            estimates: ests.clone(),
            nmse_db: nmse(&models),
        }];
        let mut degenerate = vec![false; q];
        let mut compensation = vec![0.0; q];
        let mut converged = false;

        for iter in 1..=self.options.max_iter {
            for t in 0..q {
                let mut residual = raw.clone();
                for (i, m) in models.iter().enumerate() {
                    if i != t {
                        residual.sub_assign(m);
                    }
                }
                let v_star = if self.kind.compensates_doppler() {
                    self.vcm_velocity(&residual, &ests[t])?.velocity
                } else {
                    0.0
                };
                compensation[t] = v_star;
                let obs = self.observe(&residual, v_star)?;
                let out = self.m_step(&obs, &residual, &ests[t], true);
                degenerate[t] = out.degenerate;
                ests[t] = out.estimate;
                models[t] = self.synthesize(&ests[t], symbols);
            }
            let current = nmse(&models);
            let previous = trace.last().map(|r| r.nmse_db).unwrap_or(0.0);
            trace.push(IterationRecord {
                iter,
                estimates: ests.clone(),
                nmse_db: current,
            });
            let (a, b) = (10f64.powf(previous / 10.0), 10f64.powf(current / 10.0));
            if (a - b).abs() <= self.options.tol * a {
                converged = true;
                break;
            }
        }
        if !converged {
            log::warn!(
                "EM stopped after {} iterations without meeting the tolerance {}",
                self.options.max_iter,
                self.options.tol
            );
        }
        Ok(EmOutcome {
            estimates: ests,
            trace,
            weights: vec![1.0 / (q as f64).sqrt(); q],
            converged,
            degenerate,
            compensation,
        })
    }
}
