//! Per-mode detection, SINR and spectral efficiency of the communication
//! phase.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::{SystemConfig, Target};
use crate::error::{Error, Result};
use crate::waveform::ModeSet;

use super::beam::{beam_weights, effective_channel, rx_combiner, tx_precoder, BeamWeights, Pointing};
use super::channel::{los_channel, ChannelModel};

/// Lowest reported SINR in dB.
pub const SINR_FLOOR_DB: f64 = -300.0;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LinkOptions {
    /// 0-based subcarriers to evaluate.
    pub subcarriers: Vec<usize>,
    pub snr_db: f64,
    pub model: ChannelModel,
}

impl LinkOptions {
    pub fn new(snr_db: f64) -> Self {
        Self {
            subcarriers: vec![0],
            snr_db,
            model: ChannelModel::FarField,
        }
    }
}

/// SINR of one mode at one communication symbol and subcarrier.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SinrEntry {
    /// 1-based symbol index.
    pub symbol: usize,
    pub subcarrier: usize,
    pub mode: i32,
    pub sinr: f64,
}

impl SinrEntry {
    pub fn sinr_db(&self) -> f64 {
        to_db(self.sinr)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct LinkReport {
    pub psen: usize,
    /// Ordered by symbol, then subcarrier, then mode.
    pub entries: Vec<SinrEntry>,
    pub c_paper: f64,
    pub se_avg: f64,
    pub mean_sinr_db: f64,
    /// False when the pilot phase was too short to steer the beams.
    pub sensing_available: bool,
}

pub fn to_db(x: f64) -> f64 {
    if x > 0.0 {
        (10.0 * x.log10()).max(SINR_FLOOR_DB)
    } else {
        SINR_FLOOR_DB
    }
}

/// Per-element receive noise variance at the UE.
pub fn link_noise_variance(cfg: &SystemConfig, target: &Target, snr_db: f64) -> f64 {
    let amp = cfg.antenna_constant / (2.0 * cfg.wavenumber(0) * target.range);
    amp * amp * 10f64.powf(-snr_db / 10.0)
}

/// Detection matrix `D = Λ⁻¹(F⊙B)`.
pub fn detection_matrix(modes: &ModeSet, weights: &BeamWeights, elements: usize) -> DMatrix<Complex64> {
    let mut d = rx_combiner(modes, Some(weights), elements);
    for (u, lambda) in weights.lambda.iter().enumerate() {
        let inv = lambda.inv();
        d.row_mut(u).iter_mut().for_each(|z| *z *= inv);
    }
    d
}

/// Detected symbol vector `D(H T s + n)`.
pub fn detect(
    h: &DMatrix<Complex64>,
    modes: &ModeSet,
    weights: &BeamWeights,
    symbols: &DVector<Complex64>,
    noise: Option<&DVector<Complex64>>,
) -> Result<DVector<Complex64>> {
    let n = h.nrows();
    if symbols.len() != modes.len() {
        return Err(Error::Dimension(format!(
            "{} symbols for {} modes",
            symbols.len(),
            modes.len()
        )));
    }
    let mut rx = h * tx_precoder(modes, Some(weights), h.ncols()) * symbols;
    if let Some(noise) = noise {
        if noise.len() != n {
            return Err(Error::Dimension(format!(
                "{} noise samples for {n} elements",
                noise.len()
            )));
        }
        rx += noise;
    }
    Ok(detection_matrix(modes, weights, n) * rx)
}

/// Per-mode SINR for unit-power symbols, given the true channel and the
/// receiver's weights.
pub fn mode_sinr(
    h: &DMatrix<Complex64>,
    modes: &ModeSet,
    weights: &BeamWeights,
    noise_variance: f64,
) -> Result<Vec<f64>> {
    let heff = effective_channel(h, modes, Some(weights))?;
    let d = detection_matrix(modes, weights, h.nrows());
    Ok((0..modes.len())
        .map(|u| {
            let lam2 = weights.lambda[u].norm_sqr();
            let leak: f64 = (0..modes.len())
                .filter(|&v| v != u)
                .map(|v| heff[(u, v)].norm_sqr())
                .sum();
            let amplified: f64 = d.row(u).iter().map(|z| z.norm_sqr()).sum::<f64>() * noise_variance;
            lam2 / (leak + lam2 * amplified)
        })
        .collect())
}

/// Fallback pointing used when no sensing estimate exists: boresight at the
/// true range, static.
pub fn boresight(target: &Target) -> Pointing {
    Pointing {
        range: target.range,
        velocity: 0.0,
        azimuth: 0.0,
        elevation: 0.0,
    }
}

/// Communication-phase report for symbols `psen+1..=P`.
pub fn link_report(
    cfg: &SystemConfig,
    target: &Target,
    estimate: Option<Pointing>,
    psen: usize,
    opts: &LinkOptions,
) -> Result<LinkReport> {
    let total = cfg.num_symbols_per_cpi;
    if psen > total {
        return Err(Error::InvalidConfig(format!("Psen = {psen} exceeds P = {total}")));
    }
    if let Some(&l) = opts.subcarriers.iter().find(|&&l| l >= cfg.num_subcarriers) {
        return Err(Error::InvalidConfig(format!("subcarrier {l} out of range")));
    }
    if opts.subcarriers.is_empty() {
        return Err(Error::InvalidConfig("no subcarriers selected".into()));
    }
    let modes = ModeSet::centered(cfg.num_modes);
    let sensing_available = estimate.is_some();
    let pointing = estimate.unwrap_or_else(|| boresight(target));
    let sigma2 = link_noise_variance(cfg, target, opts.snr_db);

    let per_symbol: Vec<Vec<SinrEntry>> = (psen + 1..=total)
        .into_par_iter()
        .map(|p| -> Result<Vec<SinrEntry>> {
            let mut out = Vec::with_capacity(opts.subcarriers.len() * modes.len());
            for &l in &opts.subcarriers {
                let h = los_channel(cfg, target, p, l, opts.model)?;
                let w = beam_weights(cfg, &modes, &pointing, p, l);
                for (u, sinr) in mode_sinr(&h, &modes, &w, sigma2)?.into_iter().enumerate() {
                    out.push(SinrEntry {
                        symbol: p,
                        subcarrier: l,
                        mode: modes.get(u),
                        sinr,
                    });
                }
            }
            Ok(out)
        })
        .collect::<Result<_>>()?;
    let entries: Vec<SinrEntry> = per_symbol.into_iter().flatten().collect();

    let discount = 1.0 - psen as f64 / total as f64;
    let (c_paper, se_avg, mean_sinr_db) = if entries.is_empty() {
        (0.0, 0.0, SINR_FLOOR_DB)
    } else {
        let bits: f64 = entries.iter().map(|e| (1.0 + e.sinr).log2()).sum();
        let mean_sinr = entries.iter().map(|e| e.sinr).sum::<f64>() / entries.len() as f64;
        let per_sub = opts.subcarriers.len() as f64;
        (
            discount * bits / per_sub,
            discount * bits / entries.len() as f64,
            to_db(mean_sinr),
        )
    };
    Ok(LinkReport {
        psen,
        entries,
        c_paper,
        se_avg,
        mean_sinr_db,
        sensing_available,
    })
}
