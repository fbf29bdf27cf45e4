//! System configuration, target geometry and the radar quantities derived
//! from them.
//!
//! Every other module reads its array, frame and radio parameters from
//! [`SystemConfig`]. Angles are radians everywhere in the library; the JSON
//! files use degrees and are converted on load.

use std::f64::consts::{PI, TAU};
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const SPEED_OF_LIGHT: f64 = 2.997_924_58e8;

/// Radio, array and frame parameterization of the integrated transceiver.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SystemConfig {
    /// Carrier frequency `fc` in Hz.
    pub carrier_frequency: f64,
    /// Subcarrier spacing `Δf` in Hz.
    pub subcarrier_spacing: f64,
    pub num_subcarriers: usize,
    /// OFDM symbols per coherent processing interval.
    pub num_symbols_per_cpi: usize,
    /// Leading symbols of the CPI used as sensing pilots.
    pub num_sensing_symbols: usize,
    /// Symbol duration `Tc` in seconds (including cyclic prefix).
    pub symbol_duration: f64,
    pub num_tx_antennas: usize,
    pub num_rx_antennas: usize,
    /// Radius of the transmit UCA in meters.
    pub tx_radius: f64,
    /// Radius of the radar receive UCA in meters.
    pub rx_radius: f64,
    /// Radius of the UE's communication UCA in meters.
    pub comm_rx_radius: f64,
    pub num_modes: usize,
    /// Lumped antenna constant `β = β_t β_r`.
    pub antenna_constant: f64,
    pub speed_of_light: f64,
    pub snr_db: f64,
}

/// On-disk form of [`SystemConfig`]: radii may be omitted, in which case the
/// spatial anti-aliasing limit `Mλ/(4π)` is used.
#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
struct SystemConfigFile {
    carrier_frequency: f64,
    subcarrier_spacing: f64,
    num_subcarriers: usize,
    num_symbols_per_cpi: usize,
    num_sensing_symbols: usize,
    symbol_duration: f64,
    num_tx_antennas: usize,
    num_rx_antennas: usize,
    #[serde(default)]
    tx_radius: Option<f64>,
    #[serde(default)]
    rx_radius: Option<f64>,
    #[serde(default)]
    comm_rx_radius: Option<f64>,
    num_modes: usize,
    #[serde(default = "default_beta")]
    antenna_constant: f64,
    #[serde(default = "default_c")]
    speed_of_light: f64,
    #[serde(default = "default_snr")]
    snr_db: f64,
}

fn default_beta() -> f64 {
    1.0
}
fn default_c() -> f64 {
    SPEED_OF_LIGHT
}
fn default_snr() -> f64 {
    15.0
}

impl SystemConfig {
    /// The 77 GHz, 200 MHz, 16-element configuration used throughout the
    /// evaluation, with 512 sensing symbols and 15 dB SNR.
    pub fn table1() -> Self {
        let fc = 77e9;
        let m = 16;
        let r = aliasing_radius(m, SPEED_OF_LIGHT / fc);
        Self {
            carrier_frequency: fc,
            subcarrier_spacing: 1.5625e6,
            num_subcarriers: 128,
            num_symbols_per_cpi: 1024,
            num_sensing_symbols: 512,
            symbol_duration: 6.67e-6,
            num_tx_antennas: m,
            num_rx_antennas: m,
            tx_radius: r,
            rx_radius: r,
            comm_rx_radius: r,
            num_modes: 16,
            antenna_constant: 1.0,
            speed_of_light: SPEED_OF_LIGHT,
            snr_db: 15.0,
        }
    }

    pub fn with_sensing_symbols(mut self, psen: usize) -> Self {
        self.num_sensing_symbols = psen;
        self
    }

    pub fn with_snr_db(mut self, snr_db: f64) -> Self {
        self.snr_db = snr_db;
        self
    }

    pub fn wavelength(&self) -> f64 {
        self.speed_of_light / self.carrier_frequency
    }

    pub fn bandwidth(&self) -> f64 {
        self.num_subcarriers as f64 * self.subcarrier_spacing
    }

    /// `β₁ = βMN`, the gain of zero-mode combining over the receive array.
    pub fn combined_gain(&self) -> f64 {
        self.antenna_constant * (self.num_tx_antennas * self.num_rx_antennas) as f64
    }

    /// Wavenumber of subcarrier `l` (zero based), `2π(fc + lΔf)/c`.
    pub fn wavenumber(&self, l: usize) -> f64 {
        TAU * (self.carrier_frequency + l as f64 * self.subcarrier_spacing) / self.speed_of_light
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidConfig(msg));
        for (name, v) in [
            ("num_subcarriers", self.num_subcarriers),
            ("num_symbols_per_cpi", self.num_symbols_per_cpi),
            ("num_sensing_symbols", self.num_sensing_symbols),
            ("num_tx_antennas", self.num_tx_antennas),
            ("num_rx_antennas", self.num_rx_antennas),
            ("num_modes", self.num_modes),
        ] {
            if v == 0 {
                return bad(format!("{name} must be a positive integer"));
            }
        }
        for (name, v) in [
            ("carrier_frequency", self.carrier_frequency),
            ("subcarrier_spacing", self.subcarrier_spacing),
            ("symbol_duration", self.symbol_duration),
            ("speed_of_light", self.speed_of_light),
            ("antenna_constant", self.antenna_constant),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return bad(format!("{name} must be finite and positive, got {v}"));
            }
        }
        for (name, v) in [
            ("tx_radius", self.tx_radius),
            ("rx_radius", self.rx_radius),
            ("comm_rx_radius", self.comm_rx_radius),
        ] {
            if !(v.is_finite() && v >= 0.0) {
                return bad(format!("{name} must be finite and non-negative, got {v}"));
            }
        }
        if !self.snr_db.is_finite() && self.snr_db != f64::INFINITY {
            return bad(format!("snr_db must be a number, got {}", self.snr_db));
        }
        // Tc ≥ 1/Δf, with a relative slack for configurations that set Tc = 1/Δf exactly.
        let min_tc = 1.0 / self.subcarrier_spacing;
        if self.symbol_duration < min_tc * (1.0 - 1e-12) {
            return bad(format!(
                "symbol_duration {} s is shorter than 1/Δf = {} s",
                self.symbol_duration, min_tc
            ));
        }
        if self.num_sensing_symbols > self.num_symbols_per_cpi {
            return bad(format!(
                "num_sensing_symbols {} exceeds num_symbols_per_cpi {}",
                self.num_sensing_symbols, self.num_symbols_per_cpi
            ));
        }
        if self.num_modes > self.num_tx_antennas {
            return bad(format!(
                "num_modes {} exceeds num_tx_antennas {}",
                self.num_modes, self.num_tx_antennas
            ));
        }
        if self.num_tx_antennas != self.num_rx_antennas {
            return bad(format!(
                "only M = N arrays are supported (M = {}, N = {})",
                self.num_tx_antennas, self.num_rx_antennas
            ));
        }
        let limit = aliasing_radius(self.num_tx_antennas, self.wavelength());
        if self.tx_radius > limit * (1.0 + 1e-9) {
            return bad(format!(
                "tx_radius {} m exceeds the spatial anti-aliasing limit Mλ/(4π) = {} m",
                self.tx_radius, limit
            ));
        }
        Ok(())
    }

    pub fn from_json_str(text: &str) -> std::result::Result<Self, serde_json::Error> {
        let file: SystemConfigFile = serde_json::from_str(text)?;
        let radius = aliasing_radius(file.num_tx_antennas, file.speed_of_light / file.carrier_frequency);
        Ok(Self {
            carrier_frequency: file.carrier_frequency,
            subcarrier_spacing: file.subcarrier_spacing,
            num_subcarriers: file.num_subcarriers,
            num_symbols_per_cpi: file.num_symbols_per_cpi,
            num_sensing_symbols: file.num_sensing_symbols,
            symbol_duration: file.symbol_duration,
            num_tx_antennas: file.num_tx_antennas,
            num_rx_antennas: file.num_rx_antennas,
            tx_radius: file.tx_radius.unwrap_or(radius),
            rx_radius: file.rx_radius.unwrap_or(radius),
            comm_rx_radius: file.comm_rx_radius.unwrap_or(radius),
            num_modes: file.num_modes,
            antenna_constant: file.antenna_constant,
            speed_of_light: file.speed_of_light,
            snr_db: file.snr_db,
        })
    }

    /// Loads and validates a configuration file.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)?;
        let cfg = Self::from_json_str(&text).map_err(|source| Error::Parse {
            path: path.display().to_string(),
            source,
        })?;
        cfg.validate()?;
        Ok(cfg)
    }
}

/// Largest UCA radius whose inter-element arc stays below half a wavelength.
pub fn aliasing_radius(elements: usize, wavelength: f64) -> f64 {
    elements as f64 * wavelength / (4.0 * PI)
}

/// One point target. Angles are radians.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Target {
    pub range: f64,
    pub azimuth: f64,
    pub elevation: f64,
    pub radial_velocity: f64,
    pub reflectivity: f64,
}

impl Target {
    /// Builds a target from degrees; azimuth is wrapped into `[0, 2π)`.
    pub fn from_degrees(range: f64, azimuth_deg: f64, elevation_deg: f64, velocity: f64) -> Self {
        Self {
            range,
            azimuth: wrap_angle(azimuth_deg.to_radians()),
            elevation: elevation_deg.to_radians(),
            radial_velocity: velocity,
            reflectivity: 1.0,
        }
    }

    pub fn with_reflectivity(mut self, sigma: f64) -> Self {
        self.reflectivity = sigma;
        self
    }

    /// Cartesian position with the array in the `z = 0` plane.
    pub fn position(&self) -> [f64; 3] {
        spherical_to_cartesian(self.range, self.azimuth, self.elevation)
    }
}

pub fn spherical_to_cartesian(range: f64, azimuth: f64, elevation: f64) -> [f64; 3] {
    let (se, ce) = elevation.sin_cos();
    let (sa, ca) = azimuth.sin_cos();
    [range * se * ca, range * se * sa, range * ce]
}

/// Wraps an angle into `[0, 2π)`.
pub fn wrap_angle(a: f64) -> f64 {
    let w = a.rem_euclid(TAU);
    if w >= TAU {
        0.0
    } else {
        w
    }
}

/// Absolute azimuth difference folded into `[0, π]`.
pub fn azimuth_distance(a: f64, b: f64) -> f64 {
    let d = wrap_angle(a - b);
    d.min(TAU - d)
}

#[derive(Clone, Debug, PartialEq)]
pub struct Scenario {
    pub targets: Vec<Target>,
    /// Index of the target carrying the communication receiver.
    pub comm_target_index: usize,
    pub rng_seed: u64,
}

#[derive(Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
struct TargetFile {
    range: f64,
    azimuth_deg: f64,
    elevation_deg: f64,
    #[serde(default)]
    velocity: f64,
    #[serde(default = "default_beta")]
    reflectivity: f64,
}

#[derive(Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
struct ScenarioFile {
    targets: Vec<TargetFile>,
    #[serde(default)]
    comm_target_index: usize,
    #[serde(default)]
    rng_seed: u64,
}

impl Scenario {
    pub fn new(targets: Vec<Target>, rng_seed: u64) -> Self {
        Self {
            targets,
            comm_target_index: 0,
            rng_seed,
        }
    }

    /// The three moving targets at (51 m, 15°, 25°, 5 m/s), (69 m, 50°, 30°,
    /// 2.2 m/s) and (60 m, 20°, 55°, 3.5 m/s).
    pub fn three_targets(rng_seed: u64) -> Self {
        Self::new(
            vec![
                Target::from_degrees(51.0, 15.0, 25.0, 5.0),
                Target::from_degrees(69.0, 50.0, 30.0, 2.2),
                Target::from_degrees(60.0, 20.0, 55.0, 3.5),
            ],
            rng_seed,
        )
    }

    pub fn comm_target(&self) -> Option<&Target> {
        self.targets.get(self.comm_target_index)
    }

    pub fn from_json_str(text: &str) -> std::result::Result<Self, serde_json::Error> {
        let file: ScenarioFile = serde_json::from_str(text)?;
        Ok(Self {
            targets: file
                .targets
                .iter()
                .map(|t| {
                    Target::from_degrees(t.range, t.azimuth_deg, t.elevation_deg, t.velocity)
                        .with_reflectivity(t.reflectivity)
                })
                .collect(),
            comm_target_index: file.comm_target_index,
            rng_seed: file.rng_seed,
        })
    }

    pub fn to_json_string(&self) -> String {
        let file = ScenarioFile {
            targets: self
                .targets
                .iter()
                .map(|t| TargetFile {
                    range: t.range,
                    azimuth_deg: t.azimuth.to_degrees(),
                    elevation_deg: t.elevation.to_degrees(),
                    velocity: t.radial_velocity,
                    reflectivity: t.reflectivity,
                })
                .collect(),
            comm_target_index: self.comm_target_index,
            rng_seed: self.rng_seed,
        };
        serde_json::to_string_pretty(&file).expect("scenario serializes")
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)?;
        Self::from_json_str(&text).map_err(|source| Error::Parse {
            path: path.display().to_string(),
            source,
        })
    }
}

/// Radar quantities that follow in closed form from a [`SystemConfig`].
#[derive(Clone, Debug, PartialEq)]
pub struct DerivedQuantities {
    pub wavelength: f64,
    pub unambiguous_range: f64,
    pub range_resolution: f64,
    pub unambiguous_velocity: f64,
    pub velocity_resolution: f64,
    /// `k_l` for every subcarrier, strictly increasing.
    pub wavenumbers: Vec<f64>,
    /// Transmit element azimuths `φ_m = 2π(m−1)/M`.
    pub tx_element_azimuths: Vec<f64>,
    /// Receive element azimuths `α_n = 2π(n−1)/N`.
    pub rx_element_azimuths: Vec<f64>,
}

pub fn derive_quantities(cfg: &SystemConfig) -> Result<DerivedQuantities> {
    cfg.validate()?;
    let lambda = cfg.wavelength();
    let c = cfg.speed_of_light;
    let ring = |n: usize| (0..n).map(|i| TAU * i as f64 / n as f64).collect::<Vec<_>>();
    Ok(DerivedQuantities {
        wavelength: lambda,
        unambiguous_range: c / (2.0 * cfg.subcarrier_spacing),
        range_resolution: c / (2.0 * cfg.bandwidth()),
        unambiguous_velocity: lambda / (4.0 * cfg.symbol_duration * cfg.num_tx_antennas as f64),
        velocity_resolution: lambda / (2.0 * cfg.num_sensing_symbols as f64 * cfg.symbol_duration),
        wavenumbers: (0..cfg.num_subcarriers).map(|l| cfg.wavenumber(l)).collect(),
        tx_element_azimuths: ring(cfg.num_tx_antennas),
        rx_element_azimuths: ring(cfg.num_rx_antennas),
    })
}

/// Non-fatal findings about a scenario.
#[derive(Clone, Debug, PartialEq)]
pub enum ScenarioWarning {
    RangeAliased { target: usize, range: f64, limit: f64 },
    VelocityAliased { target: usize, velocity: f64, limit: f64 },
    DistortedModes { max_abs_mode: i32, limit: f64 },
}

impl fmt::Display for ScenarioWarning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::RangeAliased { target, range, limit } => write!(
                f,
                "target {target}: range {range:.3} m is outside the unambiguous window {limit:.3} m"
            ),
            Self::VelocityAliased { target, velocity, limit } => write!(
                f,
                "target {target}: |v| = {:.3} m/s reaches the unambiguous velocity {limit:.4} m/s; estimates will alias",
                velocity.abs()
            ),
            Self::DistortedModes { max_abs_mode, limit } => write!(
                f,
                "mode set reaches |ℓ| = {max_abs_mode}, at or above the undistorted limit M/2 = {limit}"
            ),
        }
    }
}

/// Checks a scenario against the configuration's unambiguous windows.
pub fn validate_scenario(cfg: &SystemConfig, sc: &Scenario) -> Result<Vec<ScenarioWarning>> {
    let dq = derive_quantities(cfg)?;
    if !sc.targets.is_empty() && sc.comm_target_index >= sc.targets.len() {
        return Err(Error::InvalidScenario(format!(
            "comm_target_index {} out of range for {} targets",
            sc.comm_target_index,
            sc.targets.len()
        )));
    }
    let mut warnings = Vec::new();
    for (q, t) in sc.targets.iter().enumerate() {
        if !(t.range.is_finite() && t.range > 0.0) {
            return Err(Error::InvalidScenario(format!(
                "target {q}: range must be positive, got {}",
                t.range
            )));
        }
        if !(t.elevation > 0.0 && t.elevation < PI / 2.0) {
            return Err(Error::InvalidScenario(format!(
                "target {q}: elevation {:.3}° outside (0°, 90°)",
                t.elevation.to_degrees()
            )));
        }
        if t.range >= dq.unambiguous_range {
            warnings.push(ScenarioWarning::RangeAliased {
                target: q,
                range: t.range,
                limit: dq.unambiguous_range,
            });
        }
        if t.radial_velocity.abs() >= dq.unambiguous_velocity {
            warnings.push(ScenarioWarning::VelocityAliased {
                target: q,
                velocity: t.radial_velocity,
                limit: dq.unambiguous_velocity,
            });
        }
    }
    let modes = crate::waveform::ModeSet::centered(cfg.num_modes);
    let limit = cfg.num_tx_antennas as f64 / 2.0;
    if modes.max_abs() as f64 >= limit {
        warnings.push(ScenarioWarning::DistortedModes {
            max_abs_mode: modes.max_abs(),
            limit,
        });
    }
    Ok(warnings)
}
