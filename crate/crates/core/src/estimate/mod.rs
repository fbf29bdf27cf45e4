//! Multi-target parameter estimation: CLEAN bootstrap, velocity-consistency
//! matching and the alternating EM refinement over the decoded cube.

mod em;
mod init;
pub mod metrics;
mod mstep;
pub mod spectrum;
mod vcm;

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::config::{derive_quantities, spherical_to_cartesian, SystemConfig, Target};
use crate::cube::Cube;
use crate::decode::{decode, normalize};
use crate::echo::{accumulate_echo, doppler_phase, steering, transmit_gain, BesselTemplate, Waveform};
use crate::error::{Error, Result};
use crate::waveform::{CodeKind, PilotKind};

pub use em::{EmOutcome, IterationRecord};
pub use mstep::{MStepOutcome, Profiles};
use spectrum::PaddedFft;

/// One target's estimated parameters. Angles are radians.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ParameterEstimate {
    pub amplitude: Complex64,
    pub range: f64,
    pub velocity: f64,
    pub azimuth: f64,
    pub elevation: f64,
}

impl ParameterEstimate {
    pub fn position(&self) -> [f64; 3] {
        spherical_to_cartesian(self.range, self.azimuth, self.elevation)
    }

    pub fn doppler_hz(&self, cfg: &SystemConfig) -> f64 {
        -2.0 * self.velocity * cfg.carrier_frequency / cfg.speed_of_light
    }

    /// The estimate as a target record (amplitude magnitude as reflectivity).
    pub fn to_target(&self) -> Target {
        Target {
            range: self.range,
            azimuth: self.azimuth,
            elevation: self.elevation,
            radial_velocity: self.velocity,
            reflectivity: self.amplitude.norm(),
        }
    }

    pub fn from_target(t: &Target) -> Self {
        Self {
            amplitude: Complex64::new(t.reflectivity, 0.0),
            range: t.range,
            velocity: t.radial_velocity,
            azimuth: t.azimuth,
            elevation: t.elevation,
        }
    }
}

/// Transmission scheme and receiver processing being evaluated.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EstimatorKind {
    /// Hadamard-coded modes, sliding decode, velocity-consistency matching.
    CdmmVcmEm,
    /// One mode per symbol in non-overlapping frames, no Doppler handling.
    TdmmBaseline,
    /// Hadamard-coded modes decoded without Doppler compensation.
    CdmmNoComp,
}

impl EstimatorKind {
    pub const ALL: [EstimatorKind; 3] = [Self::CdmmVcmEm, Self::TdmmBaseline, Self::CdmmNoComp];

    pub fn code(self) -> CodeKind {
        match self {
            Self::TdmmBaseline => CodeKind::Identity,
            Self::CdmmVcmEm | Self::CdmmNoComp => CodeKind::Hadamard,
        }
    }

    /// Symbols between successive decoding windows.
    pub fn stride(self, modes: usize) -> usize {
        match self {
            Self::TdmmBaseline => modes,
            Self::CdmmVcmEm | Self::CdmmNoComp => 1,
        }
    }

    pub fn compensates_doppler(self) -> bool {
        matches!(self, Self::CdmmVcmEm)
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::CdmmVcmEm => "cdmm-vcmem",
            Self::TdmmBaseline => "tdmm-baseline",
            Self::CdmmNoComp => "cdmm-nocomp",
        }
    }
}

impl fmt::Display for EstimatorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for EstimatorKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::InvalidConfig(format!("unknown estimator {s:?}")))
    }
}

/// Search grids for the spectral estimators.
#[derive(Clone, Debug, PartialEq)]
pub struct SearchGrids {
    /// Symmetric velocity grid `k·δv` covering `[−v_max, v_max]`.
    pub velocity: Vec<f64>,
    pub velocity_step: f64,
    pub velocity_limit: f64,
    pub range_pad: usize,
    pub azimuth_pad: usize,
    /// Elevation grid in radians, ascending.
    pub elevation: Vec<f64>,
}

impl SearchGrids {
    pub fn new(cfg: &SystemConfig) -> Result<Self> {
        let dq = derive_quantities(cfg)?;
        Self::build(dq.unambiguous_velocity, 0.05, 1.0, 89.0, 0.25)
    }

    /// Velocity grid step `dv` up to `vmax`; elevation grid in degrees.
    pub fn build(vmax: f64, dv: f64, el_min_deg: f64, el_max_deg: f64, el_step_deg: f64) -> Result<Self> {
        if !(dv > 0.0 && vmax >= 0.0 && el_step_deg > 0.0 && el_max_deg >= el_min_deg) {
            return Err(Error::InvalidConfig("search grid bounds are inconsistent".into()));
        }
        let k = (vmax / dv + 1e-9).floor() as i64;
        let velocity = (-k..=k).map(|i| i as f64 * dv).collect();
        let n_el = ((el_max_deg - el_min_deg) / el_step_deg + 1e-9).floor() as usize + 1;
        let elevation = (0..n_el)
            .map(|i| (el_min_deg + i as f64 * el_step_deg).to_radians())
            .collect();
        Ok(Self {
            velocity,
            velocity_step: dv,
            velocity_limit: vmax,
            range_pad: 4,
            azimuth_pad: 8,
            elevation,
        })
    }
}

/// Stopping rule and local search widths of the EM loop.
#[derive(Clone, Debug, PartialEq)]
pub struct EmOptions {
    pub max_iter: usize,
    /// Relative NMSE change below which the loop stops.
    pub tol: f64,
    /// Half-width, in range-resolution cells, of the range search around
    /// the previous estimate.
    pub range_window_cells: usize,
}

impl Default for EmOptions {
    fn default() -> Self {
        Self {
            max_iter: 20,
            tol: 1e-4,
            range_window_cells: 4,
        }
    }
}

/// Bessel templates on the elevation grid.
#[derive(Debug)]
pub(crate) struct TemplateBank {
    pub templates: Vec<BesselTemplate>,
    /// `Σ_{l,u} (J_0 J_ℓ)²` per grid point.
    pub energy: Vec<f64>,
}

impl TemplateBank {
    fn new(cfg: &SystemConfig, wf: &Waveform, grid: &[f64]) -> Self {
        let u_count = wf.num_modes();
        let templates: Vec<BesselTemplate> = grid.iter().map(|&e| BesselTemplate::new(cfg, &wf.modes, e)).collect();
        let energy = templates
            .iter()
            .map(|t| {
                (0..cfg.num_subcarriers)
                    .map(|l| {
                        let rx2 = t.rx[l] * t.rx[l];
                        t.tx[l * u_count..(l + 1) * u_count]
                            .iter()
                            .map(|j| j * j * rx2)
                            .sum::<f64>()
                    })
                    .sum()
            })
            .collect();
        Self { templates, energy }
    }
}

/// Decoded cube with the known transmit gain divided out, plus the opening
/// symbol of each window.
#[derive(Clone, Debug)]
pub struct Observation {
    pub cube: Cube,
    pub window_starts: Vec<usize>,
}

/// Receiver for one estimator variant under one configuration.
#[derive(Clone, Debug)]
pub struct Estimator {
    cfg: SystemConfig,
    kind: EstimatorKind,
    wf: Waveform,
    grids: SearchGrids,
    options: EmOptions,
    bank: Arc<TemplateBank>,
    gain: Vec<Complex64>,
    range_fft: PaddedFft,
    azimuth_fft: PaddedFft,
    unambiguous_range: f64,
}

impl Estimator {
    pub fn new(cfg: &SystemConfig, kind: EstimatorKind, pilots: PilotKind, pilot_seed: u64) -> Result<Self> {
        let grids = SearchGrids::new(cfg)?;
        Self::with_grids(cfg, kind, pilots, pilot_seed, grids)
    }

    pub fn with_grids(
        cfg: &SystemConfig,
        kind: EstimatorKind,
        pilots: PilotKind,
        pilot_seed: u64,
        grids: SearchGrids,
    ) -> Result<Self> {
        let dq = derive_quantities(cfg)?;
        if grids.velocity.is_empty() || grids.elevation.is_empty() || grids.range_pad == 0 || grids.azimuth_pad == 0 {
            return Err(Error::InvalidConfig("search grids must be non-empty".into()));
        }
        let wf = Waveform::new(cfg, kind.code(), pilots, pilot_seed)?;
        let bank = Arc::new(TemplateBank::new(cfg, &wf, &grids.elevation));
        let gain = transmit_gain(cfg, &wf);
        Ok(Self {
            range_fft: PaddedFft::new(cfg.num_subcarriers * grids.range_pad),
            azimuth_fft: PaddedFft::new(cfg.num_modes * grids.azimuth_pad),
            cfg: cfg.clone(),
            kind,
            wf,
            grids,
            options: EmOptions::default(),
            bank,
            gain,
            unambiguous_range: dq.unambiguous_range,
        })
    }

    pub fn with_options(mut self, options: EmOptions) -> Self {
        self.options = options;
        self
    }

    pub fn config(&self) -> &SystemConfig {
        &self.cfg
    }

    pub fn kind(&self) -> EstimatorKind {
        self.kind
    }

    pub fn waveform(&self) -> &Waveform {
        &self.wf
    }

    pub fn grids(&self) -> &SearchGrids {
        &self.grids
    }

    pub fn options(&self) -> &EmOptions {
        &self.options
    }

    /// Decodes `raw` compensating `velocity` and divides out the transmit gain.
    pub fn observe(&self, raw: &Cube, velocity: f64) -> Result<Observation> {
        let stride = self.kind.stride(self.wf.num_modes());
        let dec = decode(&self.cfg, &self.wf, raw, velocity, stride)?;
        Ok(Observation {
            cube: normalize(&self.cfg, &self.wf, &dec.cube),
            window_starts: dec.window_starts,
        })
    }

    /// Raw-domain echo of an estimate over `symbols` symbols.
    pub fn synthesize(&self, est: &ParameterEstimate, symbols: usize) -> Cube {
        let mut cube = Cube::zeros(symbols, self.cfg.num_subcarriers, 1);
        self.accumulate(est, &mut cube);
        cube
    }

    fn accumulate(&self, est: &ParameterEstimate, cube: &mut Cube) {
        let bessel = BesselTemplate::new(&self.cfg, &self.wf.modes, est.elevation);
        let a = steering(&self.cfg, &self.wf.modes, est.range, est.azimuth, &bessel);
        let resp: Vec<Complex64> = a.iter().zip(&self.gain).map(|(a, g)| a * g * est.amplitude).collect();
        accumulate_echo(&self.cfg, &self.wf, &resp, doppler_phase(&self.cfg, est.velocity), cube);
    }

    /// Sum of the re-synthesized echoes of `ests`.
    pub fn model(&self, ests: &[ParameterEstimate], symbols: usize) -> Cube {
        let mut cube = Cube::zeros(symbols, self.cfg.num_subcarriers, 1);
        for e in ests {
            self.accumulate(e, &mut cube);
        }
        cube
    }

    /// Raw cube with every estimate except `skip` removed.
    pub fn residual(&self, raw: &Cube, ests: &[ParameterEstimate], skip: Option<usize>) -> Cube {
        let others: Vec<ParameterEstimate> = ests
            .iter()
            .enumerate()
            .filter(|(i, _)| Some(*i) != skip)
            .map(|(_, e)| *e)
            .collect();
        let mut res = raw.clone();
        res.sub_assign(&self.model(&others, raw.symbols()));
        res
    }

    /// `10 log₁₀(‖y − Σ ŷ_q‖² / ‖y‖²)`, floored at −300 dB.
    pub fn nmse_db(&self, raw: &Cube, ests: &[ParameterEstimate]) -> Result<f64> {
        let total = raw.energy();
        if total == 0.0 {
            return Err(Error::ZeroNorm("observed cube"));
        }
        let res = self.residual(raw, ests, None);
        Ok(nmse_from_energies(res.energy(), total))
    }
}

pub(crate) fn nmse_from_energies(residual: f64, total: f64) -> f64 {
    (10.0 * (residual / total).log10()).max(-300.0)
}
