//! Labeled datasets, separating witnesses and the margins they certify.
//!
//! Normalised margins divide every score by the point norm as well as the
//! witness norm; unnormalised margins only normalise the witness. Zero points
//! are rejected with [`Error::Degenerate`] whenever a normalised margin is
//! requested.

mod optimize;

pub use optimize::{optimize_binary_margin, optimize_binary_margin_with, sweep_margin_2d, MaxMargin, OptimizerOptions};

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::projection::{BlockProjection, ProjectionMatrix};
use crate::vector::{dot, Vector};

/// Label convention of a dataset.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Flavor {
    /// Labels in {-1, +1}.
    Binary,
    /// Labels in 1..=L, L >= 2.
    Multiclass(usize),
}

/// `m` points of equal dimension together with their labels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawDataset")]
pub struct LabeledDataset {
    points: Vec<Vector>,
    labels: Vec<i64>,
    flavor: Flavor,
    dim: usize,
}

#[derive(Deserialize)]
struct RawDataset {
    points: Vec<Vector>,
    labels: Vec<i64>,
    flavor: Flavor,
    dim: usize,
}

impl TryFrom<RawDataset> for LabeledDataset {
    type Error = Error;

    fn try_from(raw: RawDataset) -> Result<Self> {
        Self::with_dim(raw.points, raw.labels, raw.flavor, raw.dim)
    }
}

impl LabeledDataset {
    /// Builds a dataset; the dimension is taken from the first point (0 when empty).
    pub fn new(points: Vec<Vector>, labels: Vec<i64>, flavor: Flavor) -> Result<Self> {
        let dim = points.first().map_or(0, Vector::dim);
        Self::with_dim(points, labels, flavor, dim)
    }

    pub fn binary(points: Vec<Vector>, labels: Vec<i64>) -> Result<Self> {
        Self::new(points, labels, Flavor::Binary)
    }

    pub fn multiclass(points: Vec<Vector>, labels: Vec<i64>, classes: usize) -> Result<Self> {
        Self::new(points, labels, Flavor::Multiclass(classes))
    }

    pub(crate) fn with_dim(points: Vec<Vector>, labels: Vec<i64>, flavor: Flavor, dim: usize) -> Result<Self> {
        if points.len() != labels.len() {
            return Err(invalid(format!("{} points but {} labels", points.len(), labels.len())));
        }
        if let Some(p) = points.iter().find(|p| p.dim() != dim) {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: p.dim(),
            });
        }
        match flavor {
            Flavor::Binary => {
                if let Some(l) = labels.iter().find(|&&l| l != 1 && l != -1) {
                    return Err(invalid(format!("binary label {l} is not +1 or -1")));
                }
            }
            Flavor::Multiclass(classes) => {
                if classes < 2 {
                    return Err(invalid(format!("multiclass data needs L >= 2, got {classes}")));
                }
                if let Some(l) = labels.iter().find(|&&l| l < 1 || l > classes as i64) {
                    return Err(invalid(format!("class label {l} outside 1..={classes}")));
                }
            }
        }
        Ok(Self {
            points,
            labels,
            flavor,
            dim,
        })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn flavor(&self) -> Flavor {
        self.flavor
    }

    pub fn points(&self) -> &[Vector] {
        &self.points
    }

    pub fn labels(&self) -> &[i64] {
        &self.labels
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Vector, i64)> {
        self.points.iter().zip(self.labels.iter().copied())
    }

    /// Number of classes: 2 for binary data.
    pub fn classes(&self) -> usize {
        match self.flavor {
            Flavor::Binary => 2,
            Flavor::Multiclass(l) => l,
        }
    }

    /// Maps a two-class multiclass dataset to binary labels (1 -> +1, 2 -> -1).
    pub fn to_binary(&self) -> Result<Self> {
        match self.flavor {
            Flavor::Binary => Ok(self.clone()),
            Flavor::Multiclass(2) => {
                let labels = self.labels.iter().map(|&l| if l == 1 { 1 } else { -1 }).collect();
                Self::with_dim(self.points.clone(), labels, Flavor::Binary, self.dim)
            }
            Flavor::Multiclass(l) => Err(invalid(format!("cannot relabel {l}-class data as binary"))),
        }
    }

    fn require_binary(&self) -> Result<()> {
        match self.flavor {
            Flavor::Binary => Ok(()),
            Flavor::Multiclass(_) => Err(invalid("binary dataset required")),
        }
    }

    fn require_multiclass(&self) -> Result<usize> {
        match self.flavor {
            Flavor::Multiclass(l) => Ok(l),
            Flavor::Binary => Err(invalid("multiclass dataset required")),
        }
    }

    fn require_nonempty(&self) -> Result<()> {
        if self.is_empty() {
            Err(Error::EmptyDataset)
        } else {
            Ok(())
        }
    }
}

/// A separating parameter for a dataset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LinearWitness {
    /// One vector `u` scoring `y <u, x>`.
    Binary(Vector),
    /// One vector `u_y` per class.
    Multiclass(Vec<Vector>),
    /// The concatenation `[u_1; ...; u_L]` of dimension `d*L`, scored through `x ⊗ e_y`.
    OneParam { u: Vector, classes: usize },
}

impl LinearWitness {
    pub fn binary(u: Vector) -> Result<Self> {
        nonzero(&u, "witness vector")?;
        Ok(Self::Binary(u))
    }

    pub fn multiclass(us: Vec<Vector>) -> Result<Self> {
        if us.len() < 2 {
            return Err(invalid("multiclass witness needs at least two vectors"));
        }
        let d = us[0].dim();
        for u in &us {
            u.check_dim(d)?;
            nonzero(u, "class witness vector")?;
        }
        Ok(Self::Multiclass(us))
    }

    pub fn one_param(u: Vector, classes: usize) -> Result<Self> {
        if classes < 2 {
            return Err(invalid("one-parameter witness needs L >= 2"));
        }
        if !u.dim().is_multiple_of(classes) {
            return Err(invalid(format!(
                "one-parameter witness of dim {} is not divisible into {classes} blocks",
                u.dim()
            )));
        }
        nonzero(&u, "one-parameter witness")?;
        Ok(Self::OneParam { u, classes })
    }

    /// Concatenates per-class vectors into a one-parameter witness.
    pub fn concatenate(us: &[Vector]) -> Result<Self> {
        let classes = us.len();
        let u: Vec<f64> = us.iter().flat_map(|u| u.as_slice().iter().copied()).collect();
        Self::one_param(Vector::new(u)?, classes)
    }

    /// Image of the witness under `R`: `Ru` or `{R u_y}`.
    pub fn project(&self, r: &ProjectionMatrix) -> Result<Self> {
        match self {
            Self::Binary(u) => Ok(Self::Binary(r.project(u)?)),
            Self::Multiclass(us) => Ok(Self::Multiclass(
                us.iter().map(|u| r.project(u)).collect::<Result<_>>()?,
            )),
            Self::OneParam { u, classes } => Ok(Self::OneParam {
                u: r.project(u)?,
                classes: *classes,
            }),
        }
    }
}

fn nonzero(v: &Vector, what: &'static str) -> Result<()> {
    if v.is_zero() {
        Err(Error::ZeroVector(what))
    } else {
        Ok(())
    }
}

fn nonzero_point(x: &Vector, i: usize) -> Result<f64> {
    let n = x.norm();
    if n == 0.0 {
        return Err(Error::Degenerate(format!("point {i} is the zero vector")));
    }
    Ok(n)
}

/// Whether scores are divided by the point norm.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MarginKind {
    Normalised,
    Unnormalised,
}

impl MarginKind {
    pub fn is_normalised(self) -> bool {
        self == MarginKind::Normalised
    }

    fn point_scale(self, x: &Vector, i: usize) -> Result<f64> {
        match self {
            MarginKind::Normalised => nonzero_point(x, i),
            MarginKind::Unnormalised => Ok(1.0),
        }
    }
}

/// `<w, x> / (|w| |x|)`, clamped to [-1, 1].
pub fn cosine(w: &Vector, x: &Vector) -> Result<f64> {
    w.check_dim(x.dim())?;
    let (nw, nx) = (w.norm(), x.norm());
    if nw == 0.0 || nx == 0.0 {
        return Err(Error::ZeroVector("cosine of a zero vector"));
    }
    Ok((dot(w.as_slice(), x.as_slice()) / (nw * nx)).clamp(-1.0, 1.0))
}

/// `min_i y_i <u, x_i> / |u|`, further divided by `|x_i|` when normalised.
///
/// A positive value certifies separability by that margin with witness `u`.
pub fn binary_margin(data: &LabeledDataset, u: &Vector, kind: MarginKind) -> Result<f64> {
    data.require_binary()?;
    data.require_nonempty()?;
    u.check_dim(data.dim())?;
    nonzero(u, "witness vector")?;
    let nu = u.norm();
    let mut best = f64::INFINITY;
    for (i, (x, y)) in data.iter().enumerate() {
        let s = kind.point_scale(x, i)?;
        let v = y as f64 * dot(u.as_slice(), x.as_slice()) / (nu * s);
        best = best.min(v);
    }
    Ok(best)
}

/// Crammer-Singer style margin with per-class witnesses:
/// `min_(x,y) [<û_y, x> - max_{y'≠y} <û_y', x>]`, divided by `|x|` when normalised.
pub fn multiclass_margin(data: &LabeledDataset, ws: &[Vector], kind: MarginKind) -> Result<f64> {
    let classes = data.require_multiclass()?;
    data.require_nonempty()?;
    if ws.len() != classes {
        return Err(invalid(format!(
            "witness has {} class vectors but dataset has {classes} classes",
            ws.len()
        )));
    }
    let units: Vec<Vector> = ws
        .iter()
        .map(|w| {
            w.check_dim(data.dim())?;
            w.normalized().map_err(|_| Error::ZeroVector("class witness vector"))
        })
        .collect::<Result<_>>()?;
    let mut best = f64::INFINITY;
    let mut scores = vec![0.0; classes];
    for (i, (x, y)) in data.iter().enumerate() {
        let s = kind.point_scale(x, i)?;
        for (sc, u) in scores.iter_mut().zip(&units) {
            *sc = dot(u.as_slice(), x.as_slice());
        }
        let own = scores[(y - 1) as usize];
        let rival = scores
            .iter()
            .enumerate()
            .filter(|&(k, _)| k as i64 != y - 1)
            .map(|(_, &v)| v)
            .fold(f64::NEG_INFINITY, f64::max);
        best = best.min((own - rival) / s);
    }
    Ok(best)
}

/// One-parameter margin in the original space:
/// `min (<u_y, x> - <u_y', x>) / (|u| sqrt(2) |x|)` over points and rival classes,
/// the same quantity as [`one_param_projected_margin`] with `R` the identity.
/// Unnormalised drops the `sqrt(2)|x|` factor.
pub fn one_param_margin(data: &LabeledDataset, u: &Vector, kind: MarginKind) -> Result<f64> {
    let classes = data.require_multiclass()?;
    data.require_nonempty()?;
    u.check_dim(data.dim() * classes)?;
    nonzero(u, "one-parameter witness")?;
    let d = data.dim();
    let nu = u.norm();
    let block = |k: usize| &u.as_slice()[k * d..(k + 1) * d];
    let mut best = f64::INFINITY;
    for (i, (x, y)) in data.iter().enumerate() {
        let s = match kind {
            MarginKind::Normalised => std::f64::consts::SQRT_2 * nonzero_point(x, i)?,
            MarginKind::Unnormalised => 1.0,
        };
        let own = dot(block((y - 1) as usize), x.as_slice());
        for k in (0..classes).filter(|&k| k as i64 != y - 1) {
            let v = (own - dot(block(k), x.as_slice())) / (nu * s);
            best = best.min(v);
        }
    }
    Ok(best)
}

/// `min (<v, R_y x> - <v, R_y' x>) / (|v| sqrt(|R_y x|^2 + |R_y' x|^2))` over
/// points and rival classes. Unnormalised drops the square-root factor.
pub fn one_param_projected_margin(
    data: &LabeledDataset,
    v: &Vector,
    block: &BlockProjection,
    kind: MarginKind,
) -> Result<f64> {
    let classes = data.require_multiclass()?;
    data.require_nonempty()?;
    if classes != block.classes() {
        return Err(invalid(format!(
            "dataset has {classes} classes but block projection has {}",
            block.classes()
        )));
    }
    if data.dim() != block.block_dim() {
        return Err(Error::DimensionMismatch {
            expected: block.block_dim(),
            found: data.dim(),
        });
    }
    v.check_dim(block.base().rows())?;
    nonzero(v, "projected witness")?;
    let nv = v.norm();
    let mut best = f64::INFINITY;
    let mut images: Vec<(f64, f64)> = vec![(0.0, 0.0); classes];
    for (i, (x, y)) in data.iter().enumerate() {
        for (k, img) in images.iter_mut().enumerate() {
            let rx = block.apply_block(x.as_slice(), k + 1);
            *img = (dot(v.as_slice(), &rx), dot(&rx, &rx));
        }
        let (own, own_sq) = images[(y - 1) as usize];
        for (k, &(rival, rival_sq)) in images.iter().enumerate() {
            if k as i64 == y - 1 {
                continue;
            }
            let s = match kind {
                MarginKind::Normalised => {
                    let s = (own_sq + rival_sq).sqrt();
                    if s == 0.0 {
                        return Err(Error::Degenerate(format!(
                            "point {i}: block projections for classes {y} and {} are both zero",
                            k + 1
                        )));
                    }
                    s
                }
                MarginKind::Unnormalised => 1.0,
            };
            best = best.min((own - rival) / (nv * s));
        }
    }
    Ok(best)
}

/// Margin certified by `witness` on `data`.
///
/// One-parameter witnesses are scored in the original space; use
/// [`one_param_projected_margin`] for projected data.
pub fn witness_margin(data: &LabeledDataset, witness: &LinearWitness, kind: MarginKind) -> Result<f64> {
    match witness {
        LinearWitness::Binary(u) => binary_margin(data, u, kind),
        LinearWitness::Multiclass(us) => multiclass_margin(data, us, kind),
        LinearWitness::OneParam { u, classes } => {
            if *classes != data.classes() {
                return Err(invalid("witness and dataset disagree on the number of classes"));
            }
            one_param_margin(data, u, kind)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::projection::{tensor_embed, Family};
    use proptest::prelude::*;

    fn v(xs: &[f64]) -> Vector {
        Vector::new(xs.to_vec()).unwrap()
    }

    fn square(s: f64) -> LabeledDataset {
        LabeledDataset::binary(
            vec![v(&[-s, 1.0]), v(&[s, 1.0]), v(&[-s, -1.0]), v(&[s, -1.0])],
            vec![1, 1, -1, -1],
        )
        .unwrap()
    }

    fn small_multiclass() -> (LabeledDataset, Vec<Vector>) {
        let data = LabeledDataset::multiclass(
            vec![
                v(&[2.0, 0.1, 0.3]),
                v(&[0.2, 1.5, -0.4]),
                v(&[-0.1, 0.3, 2.2]),
                v(&[1.1, 0.2, 0.1]),
            ],
            vec![1, 2, 3, 1],
            3,
        )
        .unwrap();
        let ws = vec![v(&[1.0, 0.0, 0.0]), v(&[0.0, 2.0, 0.0]), v(&[0.0, 0.0, 0.5])];
        (data, ws)
    }

    #[test]
    fn dataset_validation() {
        assert!(LabeledDataset::binary(vec![v(&[1.0])], vec![2]).is_err());
        assert!(LabeledDataset::binary(vec![v(&[1.0])], vec![]).is_err());
        assert!(LabeledDataset::binary(vec![v(&[1.0]), v(&[1.0, 2.0])], vec![1, -1]).is_err());
        assert!(LabeledDataset::multiclass(vec![v(&[1.0])], vec![1], 1).is_err());
        assert!(LabeledDataset::multiclass(vec![v(&[1.0])], vec![4], 3).is_err());
        assert!(LabeledDataset::binary(vec![], vec![]).unwrap().is_empty());
    }

    #[test]
    fn cosine_basics() {
        let x = v(&[0.3, -1.2, 2.0]);
        assert!((cosine(&x, &x).unwrap() - 1.0).abs() < 1e-15);
        assert!((cosine(&x, &x.scale(-1.0)).unwrap() + 1.0).abs() < 1e-15);
        assert!(matches!(
            cosine(&x, &Vector::zeros(3).unwrap()),
            Err(Error::ZeroVector(_))
        ));
    }

    #[test]
    fn square_margins() {
        let u = v(&[0.0, 1.0]);
        assert_eq!(binary_margin(&square(1.0), &u, MarginKind::Unnormalised).unwrap(), 1.0);
        for s in [1.0, 2.0, 10.0, 1e3] {
            assert_eq!(binary_margin(&square(s), &u, MarginKind::Unnormalised).unwrap(), 1.0);
            let g = binary_margin(&square(s), &u, MarginKind::Normalised).unwrap();
            assert!((g - 1.0 / (s * s + 1.0).sqrt()).abs() < 1e-15);
        }
    }

    #[test]
    fn binary_margin_errors() {
        let u = v(&[0.0, 1.0]);
        let empty = LabeledDataset::binary(vec![], vec![]).unwrap();
        assert_eq!(
            binary_margin(&empty, &u, MarginKind::Normalised),
            Err(Error::EmptyDataset)
        );
        assert!(matches!(
            binary_margin(&square(1.0), &Vector::zeros(2).unwrap(), MarginKind::Normalised),
            Err(Error::ZeroVector(_))
        ));
        let with_zero = LabeledDataset::binary(vec![v(&[0.0, 0.0]), v(&[1.0, 1.0])], vec![1, 1]).unwrap();
        assert!(matches!(
            binary_margin(&with_zero, &u, MarginKind::Normalised),
            Err(Error::Degenerate(_))
        ));
        assert_eq!(binary_margin(&with_zero, &u, MarginKind::Unnormalised).unwrap(), 0.0);
    }

    #[test]
    fn binary_margin_is_min_of_pointwise_cosines() {
        let data = LabeledDataset::binary(
            vec![v(&[1.0, 2.0, 0.5]), v(&[-0.3, -1.0, 0.2]), v(&[2.0, 0.1, -0.7])],
            vec![1, -1, 1],
        )
        .unwrap();
        let u = v(&[0.4, 0.9, -0.1]);
        let expected = data
            .iter()
            .map(|(x, y)| y as f64 * cosine(&u, x).unwrap())
            .fold(f64::INFINITY, f64::min);
        let got = binary_margin(&data, &u, MarginKind::Normalised).unwrap();
        assert!((got - expected).abs() < 1e-15);
    }

    #[test]
    fn two_class_reduction() {
        let pts = vec![v(&[1.0, 0.4]), v(&[0.7, 1.1]), v(&[-1.0, 0.2]), v(&[-0.5, -0.9])];
        let mc = LabeledDataset::multiclass(pts, vec![1, 1, 2, 2], 2).unwrap();
        let u = v(&[1.0, 0.3]);
        let m = multiclass_margin(&mc, &[u.clone(), u.scale(-1.0)], MarginKind::Normalised).unwrap();
        let b = binary_margin(&mc.to_binary().unwrap(), &u, MarginKind::Normalised).unwrap();
        assert!((m - 2.0 * b).abs() < 1e-14);
    }

    #[test]
    fn identical_class_witnesses_give_zero() {
        let (data, _) = small_multiclass();
        let u = v(&[0.3, -0.2, 0.9]);
        let m = multiclass_margin(&data, &[u.clone(), u.clone(), u], MarginKind::Normalised).unwrap();
        assert_eq!(m, 0.0);
    }

    #[test]
    fn multiclass_by_enumeration() {
        let (data, ws) = small_multiclass();
        let mut expected = f64::INFINITY;
        for (x, y) in data.iter() {
            let c: Vec<f64> = ws.iter().map(|w| cosine(w, x).unwrap()).collect();
            let own = c[(y - 1) as usize];
            for (k, &ck) in c.iter().enumerate() {
                if k as i64 != y - 1 {
                    expected = expected.min(own - ck);
                }
            }
        }
        let got = multiclass_margin(&data, &ws, MarginKind::Normalised).unwrap();
        assert!((got - expected).abs() < 1e-14);
        assert!(multiclass_margin(&data, &ws[..2], MarginKind::Normalised).is_err());
    }

    #[test]
    fn one_param_identity_agrees_with_original_space() {
        let (data, ws) = small_multiclass();
        let LinearWitness::OneParam { u, .. } = LinearWitness::concatenate(&ws).unwrap() else {
            unreachable!()
        };
        let d = data.dim();
        let mut eye = vec![0.0; (d * 3) * (d * 3)];
        for i in 0..d * 3 {
            eye[i * d * 3 + i] = 1.0;
        }
        let block = BlockProjection::new(ProjectionMatrix::from_row_major(d * 3, d * 3, eye).unwrap(), d, 3).unwrap();
        for kind in [MarginKind::Normalised, MarginKind::Unnormalised] {
            let a = one_param_margin(&data, &u, kind).unwrap();
            let b = one_param_projected_margin(&data, &u, &block, kind).unwrap();
            assert!((a - b).abs() < 1e-14, "{kind:?}: {a} vs {b}");
        }
    }

    #[test]
    fn one_param_single_point_closed_form() {
        let x = v(&[0.5, -1.0, 2.0]);
        let data = LabeledDataset::multiclass(vec![x.clone()], vec![1], 2).unwrap();
        let block = BlockProjection::sample(4, 3, 2, Family::Gaussian, 3).unwrap();
        let vv = v(&[0.2, 1.0, -0.4, 0.7]);
        let r1 = block.block_project(&x, 1).unwrap();
        let r2 = block.block_project(&x, 2).unwrap();
        let expected =
            (vv.dot(&r1).unwrap() - vv.dot(&r2).unwrap()) / (vv.norm() * (r1.norm_sq() + r2.norm_sq()).sqrt());
        let got = one_param_projected_margin(&data, &vv, &block, MarginKind::Normalised).unwrap();
        assert!((got - expected).abs() < 1e-14);
    }

    #[test]
    fn one_param_orthogonal_witness_gives_zero() {
        // n = 3 with the projected points living in the first two coordinates.
        let data = LabeledDataset::multiclass(vec![v(&[1.0, 2.0]), v(&[-1.0, 0.5])], vec![1, 2], 2).unwrap();
        let base =
            ProjectionMatrix::from_row_major(3, 4, vec![1.0, 0.5, 0.0, 2.0, 0.3, 0.0, 1.0, 1.0, 0.0, 0.0, 0.0, 0.0])
                .unwrap();
        let block = BlockProjection::new(base, 2, 2).unwrap();
        let vv = v(&[0.0, 0.0, 1.0]);
        assert_eq!(
            one_param_projected_margin(&data, &vv, &block, MarginKind::Normalised).unwrap(),
            0.0
        );
    }

    #[test]
    fn one_param_degenerate_block_images() {
        let data = LabeledDataset::multiclass(vec![v(&[1.0, 0.0])], vec![1], 2).unwrap();
        let base = ProjectionMatrix::from_row_major(1, 4, vec![0.0, 1.0, 0.0, 1.0]).unwrap();
        let block = BlockProjection::new(base, 2, 2).unwrap();
        assert!(matches!(
            one_param_projected_margin(&data, &v(&[1.0]), &block, MarginKind::Normalised),
            Err(Error::Degenerate(_))
        ));
    }

    #[test]
    fn one_param_projected_differs_from_cosine_form_by_cross_term() {
        // The cosine of v with R z uses |R_y x - R_y' x|, which includes the cross term.
        let x = v(&[0.4, 1.3, -0.2]);
        let data = LabeledDataset::multiclass(vec![x.clone()], vec![2], 2).unwrap();
        let block = BlockProjection::sample(5, 3, 2, Family::Gaussian, 17).unwrap();
        let vv = v(&[1.0, -0.5, 0.2, 0.9, 0.1]);
        let r2 = block.block_project(&x, 2).unwrap();
        let r1 = block.block_project(&x, 1).unwrap();
        let rz = block
            .base()
            .project(
                &tensor_embed(&x, 2, 2)
                    .unwrap()
                    .sub(&tensor_embed(&x, 1, 2).unwrap())
                    .unwrap(),
            )
            .unwrap();
        let cos_form = cosine(&vv, &rz).unwrap();
        let eq_form = one_param_projected_margin(&data, &vv, &block, MarginKind::Normalised).unwrap();
        let ratio = rz.norm() / (r1.norm_sq() + r2.norm_sq()).sqrt();
        assert!((eq_form - cos_form * ratio).abs() < 1e-13);
        let cross = r1.dot(&r2).unwrap();
        assert!((rz.norm_sq() - (r1.norm_sq() + r2.norm_sq() - 2.0 * cross)).abs() < 1e-12);
    }

    fn arb_binary() -> impl Strategy<Value = (LabeledDataset, Vector)> {
        (2usize..6, 1usize..12).prop_flat_map(|(d, m)| {
            (
                prop::collection::vec(prop::collection::vec(0.1f64..3.0, d), m),
                prop::collection::vec(prop::bool::ANY, m),
                prop::collection::vec(-2.0f64..2.0, d),
            )
                .prop_filter_map("zero witness", move |(pts, signs, u)| {
                    let u = Vector::new(u).ok()?;
                    if u.norm() < 1e-3 {
                        return None;
                    }
                    let points = pts.into_iter().map(|p| Vector::new(p).unwrap()).collect();
                    let labels = signs.into_iter().map(|s| if s { 1 } else { -1 }).collect();
                    Some((LabeledDataset::binary(points, labels).unwrap(), u))
                })
        })
    }

    proptest! {
        #[test]
        fn margins_are_witness_scale_invariant((data, u) in arb_binary(), c in 0.01f64..100.0) {
            for kind in [MarginKind::Normalised, MarginKind::Unnormalised] {
                let a = binary_margin(&data, &u, kind).unwrap();
                let b = binary_margin(&data, &u.scale(c), kind).unwrap();
                prop_assert!((a - b).abs() <= 1e-12 * (1.0 + a.abs()));
            }
        }

        #[test]
        fn normalised_binary_in_unit_interval((data, u) in arb_binary()) {
            let g = binary_margin(&data, &u, MarginKind::Normalised).unwrap();
            prop_assert!((-1.0..=1.0).contains(&g));
        }

        #[test]
        fn margins_are_permutation_invariant((data, u) in arb_binary(), rot in 0usize..12) {
            let m = data.len();
            let idx: Vec<usize> = (0..m).map(|i| (i + rot) % m).rev().collect();
            let perm = LabeledDataset::binary(
                idx.iter().map(|&i| data.points()[i].clone()).collect(),
                idx.iter().map(|&i| data.labels()[i]).collect(),
            ).unwrap();
            let a = binary_margin(&data, &u, MarginKind::Normalised).unwrap();
            let b = binary_margin(&perm, &u, MarginKind::Normalised).unwrap();
            prop_assert_eq!(a, b);
        }

        #[test]
        fn multiclass_scale_invariant_and_bounded(
            ws in prop::collection::vec(prop::collection::vec(0.1f64..2.0, 3), 3),
            cs in prop::collection::vec(0.01f64..50.0, 3),
        ) {
            let (data, _) = small_multiclass();
            let ws: Vec<Vector> = ws.into_iter().map(|w| Vector::new(w).unwrap()).collect();
            let scaled: Vec<Vector> = ws.iter().zip(&cs).map(|(w, &c)| w.scale(c)).collect();
            let a = multiclass_margin(&data, &ws, MarginKind::Normalised).unwrap();
            let b = multiclass_margin(&data, &scaled, MarginKind::Normalised).unwrap();
            prop_assert!((a - b).abs() <= 1e-12);
            prop_assert!((-2.0..=2.0).contains(&a));
        }
    }
}
