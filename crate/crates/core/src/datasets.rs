//! Synthetic inputs: the stretched-square counter-example, vector pairs with
//! a prescribed cosine, and multiclass data on parallel hyperplanes with a
//! known witness.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::margin::{cosine, LabeledDataset, LinearWitness};
use crate::montecarlo::trial_seed;
use crate::projection::{Family, ProjectionMatrix};
use crate::vector::{dot, Vector};

/// `w` and `x` with `cos(w, x) = target_cosine`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneratedPair {
    pub w: Vector,
    pub x: Vector,
    pub target_cosine: f64,
}

impl GeneratedPair {
    /// Wraps an arbitrary pair, recording its actual cosine.
    pub fn from_vectors(w: Vector, x: Vector) -> Result<Self> {
        let target_cosine = cosine(&w, &x)?;
        Ok(Self { w, x, target_cosine })
    }

    pub fn dim(&self) -> usize {
        self.w.dim()
    }
}

/// Multiclass data generated together with a separating witness.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneratedMulticlass {
    pub dataset: LabeledDataset,
    /// Per-class witness `u_y`.
    pub witness: LinearWitness,
    /// Exact normalised multiclass margin of `witness` on `dataset`.
    pub target_margin: f64,
    /// Common unit normal of the class hyperplanes.
    pub normal: Vector,
    /// `<normal, x>` shared by every point of class `y` (index `y - 1`).
    pub offsets: Vec<f64>,
    /// In-plane coordinates `(t_y, bias)` of each class centre.
    centres: Vec<[f64; 2]>,
    /// Squared norm of each point.
    norms_sq: Vec<f64>,
}

/// A binary view of two-class hyperplane data.
#[derive(Debug, Clone, PartialEq)]
pub struct GeneratedBinary {
    pub dataset: LabeledDataset,
    /// `û_1 - û_2`.
    pub witness: Vector,
    /// Exact normalised binary margin of `witness`.
    pub target_margin: f64,
}

fn check_stretch(s: f64) -> Result<()> {
    if s >= 1.0 && s.is_finite() {
        Ok(())
    } else {
        Err(invalid(format!("stretch must be a finite value >= 1, got {s}")))
    }
}

/// `{((-s,1),+1), ((s,1),+1), ((-s,-1),-1), ((s,-1),-1)}`.
pub fn counterexample_square(s: f64) -> Result<LabeledDataset> {
    check_stretch(s)?;
    let p = |a: f64, b: f64| Vector::new(vec![a, b]);
    LabeledDataset::binary(
        vec![p(-s, 1.0)?, p(s, 1.0)?, p(-s, -1.0)?, p(s, -1.0)?],
        vec![1, 1, -1, -1],
    )
}

/// Probability that a uniformly random line through the origin separates
/// [`counterexample_square`]: the direction must have `|slope| > s`, which
/// leaves an arc of `π - 2 arctan(s)` out of `π`.
pub fn separability_probability_1d(s: f64) -> Result<f64> {
    check_stretch(s)?;
    Ok((PI - 2.0 * s.atan()) / PI)
}

/// Whether 1-D data is separable through the origin by a positive margin.
pub fn separable_1d(data: &LabeledDataset) -> bool {
    let signs: Vec<f64> = data.iter().map(|(x, y)| y as f64 * x[0]).collect();
    signs.iter().all(|&v| v > 0.0) || signs.iter().all(|&v| v < 0.0)
}

/// Monte Carlo estimate of [`separability_probability_1d`]: the fraction of
/// `samples` Gaussian `1 x 2` projections (isotropic, hence uniform in
/// direction) under which the square stays separable. Sample `k` uses seed
/// `trial_seed(seed, 1, k)`.
pub fn separability_probability_mc(s: f64, samples: usize, seed: u64) -> Result<f64> {
    let square = counterexample_square(s)?;
    if samples == 0 {
        return Err(invalid("samples must be positive"));
    }
    let mut hits = 0usize;
    for k in 0..samples {
        let r = ProjectionMatrix::sample(1, 2, Family::Gaussian, trial_seed(seed, 1, k as u64))?;
        if separable_1d(&r.project_dataset(&square)?) {
            hits += 1;
        }
    }
    Ok(hits as f64 / samples as f64)
}

fn gaussian_vec(rng: &mut ChaCha8Rng, d: usize) -> Vec<f64> {
    (0..d).map(|_| rng.sample(StandardNormal)).collect()
}

fn unit(mut v: Vec<f64>) -> Vec<f64> {
    let n = dot(&v, &v).sqrt();
    v.iter_mut().for_each(|x| *x /= n);
    v
}

/// Removes the components along each (unit) vector in `basis`, twice for stability.
fn orthogonalize(mut v: Vec<f64>, basis: &[&[f64]]) -> Vec<f64> {
    for _ in 0..2 {
        for b in basis {
            let c = dot(&v, b);
            v.iter_mut().zip(b.iter()).for_each(|(x, bk)| *x -= c * bk);
        }
    }
    v
}

/// A random unit `w` in `R^d` and `x = γ w + sqrt(1-γ²) q` with `q` a random
/// unit vector orthogonal to `w`.
pub fn random_pair_with_cosine(d: usize, gamma: f64, seed: u64) -> Result<GeneratedPair> {
    if d < 2 {
        return Err(invalid(format!("pair dimension must be >= 2, got {d}")));
    }
    if gamma.is_nan() || gamma.abs() >= 1.0 {
        return Err(invalid(format!("target cosine must lie in (-1, 1), got {gamma}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let w = unit(gaussian_vec(&mut rng, d));
    let q = unit(orthogonalize(gaussian_vec(&mut rng, d), &[&w]));
    let s = (1.0 - gamma * gamma).sqrt();
    let x: Vec<f64> = w.iter().zip(&q).map(|(a, b)| gamma * a + s * b).collect();
    Ok(GeneratedPair {
        w: Vector::new(w)?,
        x: Vector::new(x)?,
        target_cosine: gamma,
    })
}

/// `L` classes on parallel hyperplanes `<g, x> = t_y` with a known witness.
///
/// With `g` a random unit normal and `h` a random unit vector orthogonal to
/// it, class `y` is centred at `μ_y = t_y g + gap h` where
/// `t_y = (y - (L+1)/2) gap` (equally spaced, centred on zero). Each point is
/// `μ_y` plus a noise vector drawn uniformly from `[-spread, spread]^d` and
/// projected onto the complement of `span{g, h}`. The witness is `u_y = μ_y`:
/// since the noise is orthogonal to every `u_k`, class scores depend only on
/// the centres and the margin is computed in closed form from the 2-D
/// centre coordinates and the point norms.
pub fn parallel_hyperplanes(
    classes: usize,
    per_class: usize,
    d: usize,
    gap: f64,
    spread: f64,
    seed: u64,
) -> Result<GeneratedMulticlass> {
    if classes < 2 {
        return Err(invalid(format!("need at least 2 classes, got {classes}")));
    }
    if per_class == 0 {
        return Err(invalid("per_class must be positive"));
    }
    if d < 3 {
        return Err(invalid(format!("hyperplane data needs d >= 3, got {d}")));
    }
    if !(gap > 0.0 && gap.is_finite()) || !(spread > 0.0 && spread.is_finite()) {
        return Err(invalid("gap and spread must be positive and finite"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let g = unit(gaussian_vec(&mut rng, d));
    let h = unit(orthogonalize(gaussian_vec(&mut rng, d), &[&g]));
    let bias = gap;
    let centres: Vec<[f64; 2]> = (1..=classes)
        .map(|y| [(y as f64 - (classes as f64 + 1.0) / 2.0) * gap, bias])
        .collect();
    let embed = |c: &[f64; 2]| -> Vec<f64> { g.iter().zip(&h).map(|(a, b)| c[0] * a + c[1] * b).collect() };

    let mut points = Vec::with_capacity(classes * per_class);
    let mut labels = Vec::with_capacity(classes * per_class);
    let mut norms_sq = Vec::with_capacity(classes * per_class);
    for (k, c) in centres.iter().enumerate() {
        let mu = embed(c);
        for _ in 0..per_class {
            let r: Vec<f64> = (0..d).map(|_| rng.random_range(-spread..=spread)).collect();
            let noise = orthogonalize(r, &[&g, &h]);
            let x: Vec<f64> = mu.iter().zip(&noise).map(|(a, b)| a + b).collect();
            norms_sq.push(c[0] * c[0] + c[1] * c[1] + dot(&noise, &noise));
            points.push(Vector::new(x)?);
            labels.push(k as i64 + 1);
        }
    }
    let dataset = LabeledDataset::multiclass(points, labels, classes)?;
    let witness = LinearWitness::multiclass(centres.iter().map(|c| Vector::new(embed(c))).collect::<Result<_>>()?)?;
    let mut out = GeneratedMulticlass {
        dataset,
        witness,
        target_margin: 0.0,
        normal: Vector::new(g)?,
        offsets: centres.iter().map(|c| c[0]).collect(),
        centres,
        norms_sq,
    };
    out.target_margin = out.closed_form_margin();
    Ok(out)
}

fn norm2(c: &[f64; 2]) -> f64 {
    (c[0] * c[0] + c[1] * c[1]).sqrt()
}

impl GeneratedMulticlass {
    fn closed_form_margin(&self) -> f64 {
        self.dataset
            .labels()
            .iter()
            .zip(&self.norms_sq)
            .map(|(&y, &nsq)| {
                let own = &self.centres[(y - 1) as usize];
                let rival = self
                    .centres
                    .iter()
                    .enumerate()
                    .filter(|&(k, _)| k as i64 != y - 1)
                    .map(|(_, c)| (c[0] * own[0] + c[1] * own[1]) / norm2(c))
                    .fold(f64::NEG_INFINITY, f64::max);
                (norm2(own) - rival) / nsq.sqrt()
            })
            .fold(f64::INFINITY, f64::min)
    }

    /// Relabels two-class data as binary (class 1 -> +1) with witness `û_1 - û_2`.
    pub fn to_binary(&self) -> Result<GeneratedBinary> {
        if self.centres.len() != 2 {
            return Err(invalid("binary view needs exactly two classes"));
        }
        let LinearWitness::Multiclass(us) = &self.witness else {
            unreachable!("hyperplane witness is per-class")
        };
        let witness = us[0].normalized()?.sub(&us[1].normalized()?)?;
        let (c1, c2) = (&self.centres[0], &self.centres[1]);
        let (n1, n2) = (norm2(c1), norm2(c2));
        // |û_1 - û_2| from the centre coordinates.
        let diff = [c1[0] / n1 - c2[0] / n2, c1[1] / n1 - c2[1] / n2];
        let target_margin = self
            .dataset
            .labels()
            .iter()
            .zip(&self.norms_sq)
            .map(|(&y, &nsq)| {
                let c = &self.centres[(y - 1) as usize];
                let sign = if y == 1 { 1.0 } else { -1.0 };
                sign * (diff[0] * c[0] + diff[1] * c[1]) / (norm2(&diff) * nsq.sqrt())
            })
            .fold(f64::INFINITY, f64::min);
        Ok(GeneratedBinary {
            dataset: self.dataset.to_binary()?,
            witness,
            target_margin,
        })
    }
}
