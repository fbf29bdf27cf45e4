//! Peak picking on sampled spectra.

use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

/// Vertex offset of the parabola through three equally spaced samples,
/// clamped to half a bin. Returns 0 when the centre is not a strict peak.
pub fn parabolic_offset(left: f64, centre: f64, right: f64) -> f64 {
    let den = left - 2.0 * centre + right;
    // NaN also lands here.
    if den.is_nan() || den >= 0.0 {
        return 0.0;
    }
    (0.5 * (left - right) / den).clamp(-0.5, 0.5)
}

/// Index of the largest value; exact ties go to the smallest `tie_key`,
/// then to the smallest index.
pub fn argmax_by_key(values: &[f64], tie_key: impl Fn(usize) -> f64) -> Option<usize> {
    let mut best: Option<usize> = None;
    for (i, &v) in values.iter().enumerate() {
        if !v.is_finite() {
            continue;
        }
        best = match best {
            None => Some(i),
            Some(b) if v > values[b] => Some(i),
            Some(b) if v == values[b] && tie_key(i) < tie_key(b) => Some(i),
            keep => keep,
        };
    }
    best
}

/// Refines a peak at `index` of a spectrum sampled with unit spacing.
/// `circular` wraps the neighbours; otherwise edge peaks are not refined.
pub fn refine(values: &[f64], index: usize, circular: bool) -> f64 {
    let n = values.len();
    if n < 3 {
        return 0.0;
    }
    let (left, right) = if circular {
        (values[(index + n - 1) % n], values[(index + 1) % n])
    } else if index == 0 || index + 1 == n {
        return 0.0;
    } else {
        (values[index - 1], values[index + 1])
    };
    parabolic_offset(left, values[index], right)
}

/// Forward transform of a zero-padded input, returning magnitudes.
#[derive(Clone)]
pub struct PaddedFft {
    len: usize,
    fft: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for PaddedFft {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("PaddedFft").field("len", &self.len).finish()
    }
}

impl PaddedFft {
    pub fn new(len: usize) -> Self {
        let fft = FftPlanner::new().plan_fft_forward(len);
        Self { len, fft }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// `|Σ_k x_k e^{−i2πkj/len}|` for `j = 0..len`.
    pub fn magnitudes(&self, input: &[Complex64]) -> Vec<f64> {
        let mut buf = self.transform(input);
        buf.drain(..).map(|z| z.norm()).collect()
    }

    pub fn transform(&self, input: &[Complex64]) -> Vec<Complex64> {
        assert!(input.len() <= self.len, "input longer than transform");
        let mut buf = vec![Complex64::new(0.0, 0.0); self.len];
        buf[..input.len()].copy_from_slice(input);
        self.fft.process(&mut buf);
        buf
    }
}
