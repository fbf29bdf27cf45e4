//! Vortex-wavefront transmit side: mode sets, slow-time spreading codes,
//! projection matrices and pilot symbols.

use std::f64::consts::TAU;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Ordered OAM-mode indices `ℓ_u = u − 1 − ⌊U/2⌋`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ModeSet {
    modes: Vec<i32>,
}

impl ModeSet {
    pub fn centered(u: usize) -> Self {
        let half = (u / 2) as i32;
        Self {
            modes: (0..u as i32).map(|i| i - half).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.modes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.modes.is_empty()
    }

    pub fn as_slice(&self) -> &[i32] {
        &self.modes
    }

    pub fn get(&self, u: usize) -> i32 {
        self.modes[u]
    }

    pub fn max_abs(&self) -> i32 {
        self.modes.iter().map(|m| m.abs()).max().unwrap_or(0)
    }

    /// Whether some mode reaches `M/2` and is distorted by an `M`-element
    /// circular array.
    pub fn exceeds_undistorted(&self, elements: usize) -> bool {
        2 * self.max_abs() as usize >= elements
    }
}

/// `i^{-ℓ}`, exact for every integer order.
pub fn i_pow_neg(l: i32) -> Complex64 {
    match l.rem_euclid(4) {
        0 => Complex64::new(1.0, 0.0),
        1 => Complex64::new(0.0, -1.0),
        2 => Complex64::new(-1.0, 0.0),
        _ => Complex64::new(0.0, 1.0),
    }
}

/// `i^{ℓ}`.
pub fn i_pow(l: i32) -> Complex64 {
    i_pow_neg(-l)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CodeKind {
    Hadamard,
    Identity,
}

/// Real `U×U` slow-time code with `WᵀW = g·I`.
#[derive(Clone, Debug, PartialEq)]
pub struct SpreadingCode {
    kind: CodeKind,
    matrix: DMatrix<f64>,
    gram: f64,
    fast: bool,
}

impl SpreadingCode {
    pub fn new(kind: CodeKind, u: usize) -> Result<Self> {
        if u == 0 {
            return Err(Error::InvalidConfig("code size must be positive".into()));
        }
        let matrix = match kind {
            CodeKind::Hadamard => hadamard(u)?,
            CodeKind::Identity => DMatrix::identity(u, u),
        };
        let mut code = Self::from_matrix(kind, matrix)?;
        code.fast = true;
        Ok(code)
    }

    /// Wraps an arbitrary real code after checking its columns are
    /// orthogonal with equal energy.
    pub fn from_matrix(kind: CodeKind, matrix: DMatrix<f64>) -> Result<Self> {
        let u = matrix.nrows();
        if matrix.ncols() != u {
            return Err(Error::Dimension(format!(
                "code must be square, got {}×{}",
                u,
                matrix.ncols()
            )));
        }
        let wtw = matrix.transpose() * &matrix;
        let gram = wtw[(0, 0)];
        if gram <= 0.0 {
            return Err(Error::ZeroNorm("spreading code column"));
        }
        let off = (&wtw - DMatrix::identity(u, u) * gram).abs().max();
        if off > 1e-9 * gram {
            return Err(Error::InvalidConfig("spreading code columns are not orthogonal".into()));
        }
        Ok(Self {
            kind,
            matrix,
            gram,
            fast: false,
        })
    }

    pub fn kind(&self) -> CodeKind {
        self.kind
    }

    pub fn size(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    /// Common column energy `g` (`U` for Hadamard, 1 for the identity).
    pub fn gram(&self) -> f64 {
        self.gram
    }

    /// Weight `w_{⟨p⟩,u}` sent on mode `u` during symbol `p` (1-based).
    pub fn weight(&self, p: usize, u: usize) -> f64 {
        let row = (p - 1) % self.size();
        self.matrix[(row, u)]
    }

    /// Code seen by a decoding window opening at symbol `p` (1-based):
    /// row `k` is `W[⟨p + k − 1⟩]`.
    pub fn window_code(&self, p: usize) -> DMatrix<f64> {
        let u = self.size();
        let shift = (p - 1) % u;
        DMatrix::from_fn(u, u, |k, j| self.matrix[((shift + k) % u, j)])
    }

    /// Applies `Wᵀ` to `x`, using the fast Walsh–Hadamard transform for the
    /// Sylvester code.
    pub fn apply_transpose(&self, x: &mut [Complex64]) {
        match (self.fast, self.kind) {
            (true, CodeKind::Identity) => {}
            (true, CodeKind::Hadamard) => fwht(x),
            (false, _) => {
                let v = x.to_vec();
                for (i, out) in x.iter_mut().enumerate() {
                    *out = v.iter().enumerate().map(|(k, z)| z * self.matrix[(k, i)]).sum();
                }
            }
        }
    }
}

/// Sylvester Hadamard matrix, `H[i,j] = (−1)^{popcount(i & j)}`.
pub fn hadamard(u: usize) -> Result<DMatrix<f64>> {
    if !u.is_power_of_two() {
        return Err(Error::InvalidConfig(format!(
            "Hadamard code needs a power-of-two size, got {u}"
        )));
    }
    Ok(DMatrix::from_fn(u, u, |i, j| {
        if (i & j).count_ones() % 2 == 0 {
            1.0
        } else {
            -1.0
        }
    }))
}

/// In-place unnormalized Walsh–Hadamard transform in Sylvester order.
pub fn fwht(x: &mut [Complex64]) {
    let n = x.len();
    debug_assert!(n.is_power_of_two());
    let mut h = 1;
    while h < n {
        for block in (0..n).step_by(2 * h) {
            for i in block..block + h {
                let a = x[i];
                let b = x[i + h];
                x[i] = a + b;
                x[i + h] = a - b;
            }
        }
        h *= 2;
    }
}

/// Permutation `Π_p` that moves the first `⟨p⟩` rows of a `U`-row matrix to
/// the end, with `⟨p⟩ = ((p − 1) mod U) + 1`. `Π_p = I` when `⟨p⟩ = U`.
pub fn projection_matrix(p: usize, u: usize) -> DMatrix<f64> {
    assert!(p >= 1 && u >= 1, "p and U are 1-based and positive");
    let shift = ((p - 1) % u + 1) % u;
    DMatrix::from_fn(u, u, |row, col| if col == (row + shift) % u { 1.0 } else { 0.0 })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PilotKind {
    Unit,
    RandomQpsk,
}

/// Known pilot symbols `s_u(l)`, shared by every sensing symbol.
#[derive(Clone, Debug, PartialEq)]
pub struct Pilots {
    subcarriers: usize,
    modes: usize,
    values: Vec<Complex64>,
}

impl Pilots {
    pub fn unit(subcarriers: usize, modes: usize) -> Self {
        Self {
            subcarriers,
            modes,
            values: vec![Complex64::new(1.0, 0.0); subcarriers * modes],
        }
    }

    /// Unit-modulus QPSK drawn from a seeded stream.
    pub fn random_qpsk(subcarriers: usize, modes: usize, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        // Keep clear of the low streams used for per-symbol noise.
        rng.set_stream(u64::MAX);
        let values = (0..subcarriers * modes)
            .map(|_| {
                let q = rng.random_range(0..4u32);
                Complex64::from_polar(1.0, TAU / 8.0 + q as f64 * TAU / 4.0)
            })
            .collect();
        Self {
            subcarriers,
            modes,
            values,
        }
    }

    pub fn new(kind: PilotKind, subcarriers: usize, modes: usize, seed: u64) -> Self {
        match kind {
            PilotKind::Unit => Self::unit(subcarriers, modes),
            PilotKind::RandomQpsk => Self::random_qpsk(subcarriers, modes, seed),
        }
    }

    #[inline]
    pub fn get(&self, l: usize, u: usize) -> Complex64 {
        self.values[l * self.modes + u]
    }

    pub fn subcarriers(&self) -> usize {
        self.subcarriers
    }

    pub fn modes(&self) -> usize {
        self.modes
    }
}

/// Per-antenna transmit samples `x_m = Σ_u s_u(l) e^{iℓ_u φ_m} w_{⟨p⟩,u}` of
/// sensing symbol `p` (1-based) on subcarrier `l`.
pub fn precode_symbol(
    pilots: &Pilots,
    code: &SpreadingCode,
    modes: &ModeSet,
    p: usize,
    l: usize,
    elements: usize,
) -> Result<Vec<Complex64>> {
    let u_count = modes.len();
    if code.size() != u_count || pilots.modes() != u_count || l >= pilots.subcarriers() {
        return Err(Error::Dimension(format!(
            "code of size {}, {} pilot modes and subcarrier {l} for {u_count} modes",
            code.size(),
            pilots.modes()
        )));
    }
    let coeff: Vec<Complex64> = (0..u_count).map(|u| pilots.get(l, u) * code.weight(p, u)).collect();
    Ok((0..elements)
        .map(|m| {
            let phi = TAU * m as f64 / elements as f64;
            (0..u_count)
                .map(|u| coeff[u] * Complex64::from_polar(1.0, modes.get(u) as f64 * phi))
                .sum()
        })
        .collect())
}
