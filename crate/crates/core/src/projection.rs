//! Random projection matrices and their application to vectors, datasets and
//! the block structure used by the one-parameter multiclass method.
//!
//! Matrices are stored densely, row-major, with the `1/sqrt(n)` scale already
//! folded into the entries. Sampling uses a `ChaCha8Rng` seeded through
//! `SeedableRng::seed_from_u64(seed)`; Gaussian entries come from
//! `rand_distr::StandardNormal` (ziggurat), sign-coin entries from one fair
//! `bool` draw each. Entries are drawn in row-major order, so a given
//! `(n, d, family, seed)` always reproduces the same matrix on one build.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::margin::LabeledDataset;
use crate::vector::{dot, Vector};

/// Distribution of the unscaled matrix entries.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Family {
    /// i.i.d. N(0, 1).
    Gaussian,
    /// i.i.d. fair +1/-1 coins.
    SignCoin,
}

impl Family {
    pub fn name(self) -> &'static str {
        match self {
            Family::Gaussian => "gaussian",
            Family::SignCoin => "sign",
        }
    }
}

impl std::str::FromStr for Family {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "gaussian" => Ok(Family::Gaussian),
            "sign" | "sign-coin" => Ok(Family::SignCoin),
            other => Err(invalid(format!("unknown projection family '{other}'"))),
        }
    }
}

/// How a matrix came to be.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Origin {
    Sampled { family: Family, seed: u64 },
    Explicit,
}

/// A dense `n x d` projection matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProjectionMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
    origin: Origin,
}

impl ProjectionMatrix {
    /// Samples an `n x d` matrix with entries `r_ij / sqrt(n)`.
    pub fn sample(n: usize, d: usize, family: Family, seed: u64) -> Result<Self> {
        if n == 0 || d == 0 {
            return Err(invalid(format!(
                "projection dimensions must be positive (n={n}, d={d})"
            )));
        }
        let scale = 1.0 / (n as f64).sqrt();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let len = n * d;
        let data: Vec<f64> = match family {
            Family::Gaussian => (0..len).map(|_| scale * rng.sample::<f64, _>(StandardNormal)).collect(),
            Family::SignCoin => (0..len)
                .map(|_| if rng.random::<bool>() { scale } else { -scale })
                .collect(),
        };
        Ok(Self {
            rows: n,
            cols: d,
            data,
            origin: Origin::Sampled { family, seed },
        })
    }

    /// Wraps explicit row-major entries.
    pub fn from_row_major(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(invalid("matrix dimensions must be positive"));
        }
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch {
                expected: rows * cols,
                found: data.len(),
            });
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(invalid("matrix entries must be finite"));
        }
        Ok(Self {
            rows,
            cols,
            data,
            origin: Origin::Explicit,
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn origin(&self) -> Origin {
        self.origin
    }

    pub fn entries(&self) -> &[f64] {
        &self.data
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    /// `R x` for a raw slice of length `cols`.
    pub(crate) fn apply(&self, x: &[f64]) -> Vec<f64> {
        debug_assert_eq!(x.len(), self.cols);
        (0..self.rows).map(|i| dot(self.row(i), x)).collect()
    }

    /// `R x`.
    pub fn project(&self, x: &Vector) -> Result<Vector> {
        x.check_dim(self.cols)?;
        Ok(Vector::from_raw(self.apply(x.as_slice())))
    }

    /// Projects every point, keeping the labels.
    pub fn project_dataset(&self, data: &LabeledDataset) -> Result<LabeledDataset> {
        if !data.is_empty() && data.dim() != self.cols {
            return Err(Error::DimensionMismatch {
                expected: self.cols,
                found: data.dim(),
            });
        }
        let points = data
            .points()
            .iter()
            .map(|x| Vector::from_raw(self.apply(x.as_slice())))
            .collect();
        LabeledDataset::with_dim(points, data.labels().to_vec(), data.flavor(), self.rows)
    }
}

/// Source of projection matrices for Monte Carlo trials.
pub trait MatrixSampler: Sync {
    fn sample(&self, n: usize, d: usize, seed: u64) -> Result<ProjectionMatrix>;
}

impl MatrixSampler for Family {
    fn sample(&self, n: usize, d: usize, seed: u64) -> Result<ProjectionMatrix> {
        ProjectionMatrix::sample(n, d, *self, seed)
    }
}

/// `x ⊗ e_y`: a `d*L` vector that is `x` in block `y` (1-based) and zero elsewhere.
pub fn tensor_embed(x: &Vector, class: usize, classes: usize) -> Result<Vector> {
    check_class(class, classes)?;
    let d = x.dim();
    let mut out = vec![0.0; d * classes];
    out[(class - 1) * d..class * d].copy_from_slice(x.as_slice());
    Ok(Vector::from_raw(out))
}

fn check_class(class: usize, classes: usize) -> Result<()> {
    if class == 0 || class > classes {
        return Err(Error::ClassIndex { index: class, classes });
    }
    Ok(())
}

/// A projection over `d*L` columns read as `L` column blocks `R = [R_1, ..., R_L]`.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockProjection {
    base: ProjectionMatrix,
    block_dim: usize,
    classes: usize,
}

impl BlockProjection {
    pub fn new(base: ProjectionMatrix, block_dim: usize, classes: usize) -> Result<Self> {
        if classes < 2 {
            return Err(invalid(format!("block projection needs L >= 2, got {classes}")));
        }
        if block_dim == 0 {
            return Err(invalid("block dimension must be positive"));
        }
        if base.cols != block_dim * classes {
            return Err(Error::DimensionMismatch {
                expected: block_dim * classes,
                found: base.cols,
            });
        }
        Ok(Self {
            base,
            block_dim,
            classes,
        })
    }

    pub fn sample(n: usize, block_dim: usize, classes: usize, family: Family, seed: u64) -> Result<Self> {
        let base = ProjectionMatrix::sample(n, block_dim.saturating_mul(classes), family, seed)?;
        Self::new(base, block_dim, classes)
    }

    pub fn base(&self) -> &ProjectionMatrix {
        &self.base
    }

    pub fn block_dim(&self) -> usize {
        self.block_dim
    }

    pub fn classes(&self) -> usize {
        self.classes
    }

    pub(crate) fn apply_block(&self, x: &[f64], class: usize) -> Vec<f64> {
        let off = (class - 1) * self.block_dim;
        (0..self.base.rows)
            .map(|i| dot(&self.base.row(i)[off..off + self.block_dim], x))
            .collect()
    }

    /// `R_y x`, the product of column block `y` with `x`.
    pub fn block_project(&self, x: &Vector, class: usize) -> Result<Vector> {
        x.check_dim(self.block_dim)?;
        check_class(class, self.classes)?;
        Ok(Vector::from_raw(self.apply_block(x.as_slice(), class)))
    }
}
