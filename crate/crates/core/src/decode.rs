//! Slow-time mode decoding with optional Doppler compensation.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;

use crate::config::SystemConfig;
use crate::cube::Cube;
use crate::echo::{doppler_phase, transmit_gain, Waveform};
use crate::error::{Error, Result};
use crate::waveform::SpreadingCode;

/// Decoded cube together with the (0-based) opening symbol of each window.
#[derive(Clone, Debug)]
pub struct Decoded {
    pub cube: Cube,
    pub window_starts: Vec<usize>,
}

/// Opening symbols of every complete `width`-symbol window, `stride` apart.
pub fn window_starts(symbols: usize, width: usize, stride: usize) -> Result<Vec<usize>> {
    if stride == 0 {
        return Err(Error::InvalidConfig("window stride must be positive".into()));
    }
    if symbols < width {
        return Err(Error::Window {
            start: 0,
            width,
            available: symbols,
        });
    }
    Ok((0..=symbols - width).step_by(stride).collect())
}

/// Decodes a raw `P×L×1` cube into `windows×L×U`:
/// `z[j,l,i] = (1/g) Σ_k W_p[k,i] conj(ω*)^k y(p_j + k, l)`,
/// where `ω*` is the phasor of the compensation velocity.
pub fn decode(cfg: &SystemConfig, wf: &Waveform, raw: &Cube, comp_velocity: f64, stride: usize) -> Result<Decoded> {
    let u_count = wf.num_modes();
    let l_count = raw.subcarriers();
    if raw.modes() != 1 {
        return Err(Error::Dimension(format!(
            "raw cube must have one mode column, got {}",
            raw.modes()
        )));
    }
    let starts = window_starts(raw.symbols(), u_count, stride)?;
    let code = &wf.code;
    let inv_g = 1.0 / code.gram();
    let phase = doppler_phase(cfg, comp_velocity);
    let comp: Vec<Complex64> = (0..u_count)
        .map(|k| Complex64::from_polar(inv_g, -(k as f64) * phase))
        .collect();
    let mut cube = Cube::zeros(starts.len(), l_count, u_count);
    cube.as_mut_slice()
        .par_chunks_mut(l_count * u_count)
        .zip(starts.par_iter())
        .for_each(|(out, &s)| {
            let mut buf = vec![Complex64::new(0.0, 0.0); u_count];
            for l in 0..l_count {
                // Reorder into code-row order so a plain Wᵀ applies.
                for (k, c) in comp.iter().enumerate() {
                    buf[(s + k) % u_count] = c * raw.get(s + k, l, 0);
                }
                code.apply_transpose(&mut buf);
                out[l * u_count..(l + 1) * u_count].copy_from_slice(&buf);
            }
        });
    Ok(Decoded {
        cube,
        window_starts: starts,
    })
}

/// Divides out the known transmit gain `β₁ i^{−ℓ} s_u(l)`, leaving
/// `σ A(l,u) ω^{p_j}` per target.
pub fn normalize(cfg: &SystemConfig, wf: &Waveform, decoded: &Cube) -> Cube {
    let gain = transmit_gain(cfg, wf);
    let inv: Vec<Complex64> = gain.iter().map(|g| g.inv()).collect();
    let mut out = decoded.clone();
    let n = inv.len();
    for row in out.as_mut_slice().chunks_mut(n) {
        for (z, g) in row.iter_mut().zip(&inv) {
            *z *= g;
        }
    }
    out
}

/// Residual inter-mode coupling of a window opening at symbol `p` (1-based)
/// under per-symbol phase `ω`:
/// `H̃(i,j) = (1/g) Σ_k W_p[k,i] W_p[k,j] ω^k`.
pub fn coupling_matrix(code: &SpreadingCode, p: usize, omega: Complex64) -> DMatrix<Complex64> {
    let wp = code.window_code(p);
    let u = code.size();
    let inv_g = 1.0 / code.gram();
    let pows: Vec<Complex64> = (0..u).map(|k| omega.powi(k as i32)).collect();
    DMatrix::from_fn(u, u, |i, j| {
        (0..u).map(|k| pows[k] * (wp[(k, i)] * wp[(k, j)])).sum::<Complex64>() * inv_g
    })
}

/// Diagonal of the Hadamard coupling, `(1 − ω^U) / (U(1 − ω))`, equal to
/// 1 at `ω = 1`. Unit-modulus `ω` is evaluated through the Dirichlet
/// kernel, which stays accurate as `ω → 1`.
pub fn coupling_diagonal(u: usize, omega: Complex64) -> Complex64 {
    let one = Complex64::new(1.0, 0.0);
    let n = u as f64;
    if (omega.norm() - 1.0).abs() <= 4.0 * f64::EPSILON {
        let theta = omega.arg();
        let half = 0.5 * theta;
        if half.sin() == 0.0 {
            return one;
        }
        Complex64::from_polar((n * half).sin() / (n * half.sin()), (n - 1.0) * half)
    } else {
        (one - omega.powi(u as i32)) / ((one - omega) * n)
    }
}
