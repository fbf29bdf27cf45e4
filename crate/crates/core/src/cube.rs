//! Dense complex data cubes indexed by (symbol, subcarrier, mode).

use std::io::{Read, Write};
use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Stage {
    Raw,
    Decoded,
}

/// Row-major `(p, l, u)` cube. Raw echoes use a single mode column.
#[derive(Clone, Debug, PartialEq)]
pub struct Cube {
    symbols: usize,
    subcarriers: usize,
    modes: usize,
    data: Vec<Complex64>,
}

impl Cube {
    pub fn zeros(symbols: usize, subcarriers: usize, modes: usize) -> Self {
        Self {
            symbols,
            subcarriers,
            modes,
            data: vec![Complex64::new(0.0, 0.0); symbols * subcarriers * modes],
        }
    }

    pub fn from_vec(symbols: usize, subcarriers: usize, modes: usize, data: Vec<Complex64>) -> Result<Self> {
        if data.len() != symbols * subcarriers * modes {
            return Err(Error::Dimension(format!(
                "cube {symbols}×{subcarriers}×{modes} needs {} samples, got {}",
                symbols * subcarriers * modes,
                data.len()
            )));
        }
        Ok(Self {
            symbols,
            subcarriers,
            modes,
            data,
        })
    }

    pub fn shape(&self) -> [usize; 3] {
        [self.symbols, self.subcarriers, self.modes]
    }

    pub fn symbols(&self) -> usize {
        self.symbols
    }

    pub fn subcarriers(&self) -> usize {
        self.subcarriers
    }

    pub fn modes(&self) -> usize {
        self.modes
    }

    #[inline]
    pub fn index(&self, p: usize, l: usize, u: usize) -> usize {
        (p * self.subcarriers + l) * self.modes + u
    }

    #[inline]
    pub fn get(&self, p: usize, l: usize, u: usize) -> Complex64 {
        self.data[self.index(p, l, u)]
    }

    #[inline]
    pub fn set(&mut self, p: usize, l: usize, u: usize, v: Complex64) {
        let i = self.index(p, l, u);
        self.data[i] = v;
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [Complex64] {
        &mut self.data
    }

    /// All samples of symbol row `p`, laid out `(l, u)`.
    pub fn row(&self, p: usize) -> &[Complex64] {
        let n = self.subcarriers * self.modes;
        &self.data[p * n..(p + 1) * n]
    }

    pub fn row_mut(&mut self, p: usize) -> &mut [Complex64] {
        let n = self.subcarriers * self.modes;
        &mut self.data[p * n..(p + 1) * n]
    }

    pub fn energy(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum()
    }

    /// Mean per-sample power.
    pub fn mean_power(&self) -> f64 {
        if self.data.is_empty() {
            0.0
        } else {
            self.energy() / self.data.len() as f64
        }
    }

    pub fn sub_assign(&mut self, other: &Cube) {
        assert_eq!(self.shape(), other.shape());
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a -= b;
        }
    }

    pub fn add_assign(&mut self, other: &Cube) {
        assert_eq!(self.shape(), other.shape());
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += b;
        }
    }

    /// Writes interleaved little-endian `f64` real/imaginary pairs to `path`
    /// and a JSON sidecar with the shape and stage to `path.json`.
    pub fn write(&self, path: impl AsRef<Path>, stage: Stage) -> Result<()> {
        let path = path.as_ref();
        let mut buf = Vec::with_capacity(self.data.len() * 16);
        for z in &self.data {
            buf.extend_from_slice(&z.re.to_le_bytes());
            buf.extend_from_slice(&z.im.to_le_bytes());
        }
        std::fs::File::create(path)?.write_all(&buf)?;
        let meta = CubeMeta {
            shape: self.shape(),
            stage,
            layout: "row-major (p, l, u), interleaved little-endian f64 re/im".into(),
        };
        std::fs::write(sidecar(path), serde_json::to_string_pretty(&meta)?)?;
        Ok(())
    }

    pub fn read(path: impl AsRef<Path>) -> Result<(Self, Stage)> {
        let path = path.as_ref();
        let meta: CubeMeta = serde_json::from_str(&std::fs::read_to_string(sidecar(path))?)?;
        let mut bytes = Vec::new();
        std::fs::File::open(path)?.read_to_end(&mut bytes)?;
        let data = bytes
            .chunks_exact(16)
            .map(|c| {
                let re = f64::from_le_bytes(c[..8].try_into().expect("8 bytes"));
                let im = f64::from_le_bytes(c[8..].try_into().expect("8 bytes"));
                Complex64::new(re, im)
            })
            .collect();
        let [p, l, u] = meta.shape;
        Ok((Self::from_vec(p, l, u, data)?, meta.stage))
    }
}

fn sidecar(path: &Path) -> std::path::PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".json");
    s.into()
}

#[derive(Debug, Serialize, Deserialize)]
struct CubeMeta {
    shape: [usize; 3],
    stage: Stage,
    layout: String,
}
