//! Inter-mode coupling of one decoding window as a table.

use serde::Serialize;

use crate::config::SystemConfig;
use crate::decode::coupling_matrix;
use crate::echo::doppler_phasor;
use crate::error::Result;
use crate::waveform::{CodeKind, SpreadingCode};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HRow {
    pub row: usize,
    pub col: usize,
    pub re: f64,
    pub im: f64,
}

pub const HMATRIX_HEADER: [&str; 4] = ["row", "col", "re", "im"];

/// Coupling under `modes` Hadamard-coded modes for a target at `velocity`
/// with the window opening at symbol `window` (1-based) and no
/// compensation.
pub fn hmatrix_rows(cfg: &SystemConfig, modes: usize, velocity: f64, window: usize) -> Result<Vec<HRow>> {
    let code = SpreadingCode::new(CodeKind::Hadamard, modes)?;
    let h = coupling_matrix(&code, window, doppler_phasor(cfg, velocity));
    let mut rows = Vec::with_capacity(modes * modes);
    for row in 0..modes {
        for col in 0..modes {
            let z = h[(row, col)];
            rows.push(HRow {
                row,
                col,
                re: z.re,
                im: z.im,
            });
        }
    }
    Ok(rows)
}
