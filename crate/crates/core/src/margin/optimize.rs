//! Hard-margin search on length-normalised points.
//!
//! With `z_i = y_i x_i / |x_i|`, the best normalised margin over unit `u` is the
//! distance from the origin to the convex hull of the `z_i`, and the minimiser
//! `p*` of `|p|` over the hull gives `u* = p*/|p*|`. This is the bias-free
//! hard-margin dual (`min |w|` s.t. `y_i <w, x̂_i> >= 1`, `γ* = 1/|w*|`) written
//! over the simplex. We solve it with the Mitchell-Demyanov-Malozemov
//! iteration (pairwise Frank-Wolfe with exact line search). Every iterate
//! brackets the optimum: `min_i <p, z_i>/|p| <= γ* <= |p|`.

use std::f64::consts::TAU;

use super::{binary_margin, LabeledDataset, MarginKind};
use crate::error::{invalid, Error, Result};
use crate::vector::{dot, Vector};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OptimizerOptions {
    /// Stop once the certified bracket on γ* is narrower than this.
    pub tolerance: f64,
    pub max_iterations: usize,
}

impl Default for OptimizerOptions {
    fn default() -> Self {
        Self {
            tolerance: 1e-6,
            max_iterations: 100_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MaxMargin {
    /// Unit-length witness.
    pub direction: Vector,
    /// Normalised binary margin achieved by `direction`.
    pub margin: f64,
    /// Upper bound on the optimum (only meaningful when separable).
    pub upper_bound: f64,
    pub separable: bool,
    pub converged: bool,
    pub iterations: usize,
}

pub fn optimize_binary_margin(data: &LabeledDataset) -> Result<MaxMargin> {
    optimize_binary_margin_with(data, OptimizerOptions::default())
}

pub fn optimize_binary_margin_with(data: &LabeledDataset, opts: OptimizerOptions) -> Result<MaxMargin> {
    data.require_binary()?;
    data.require_nonempty()?;
    if opts.tolerance.is_nan() || opts.tolerance <= 0.0 || opts.max_iterations == 0 {
        return Err(invalid("optimizer tolerance and iteration cap must be positive"));
    }
    let d = data.dim();
    let z: Vec<Vec<f64>> = data
        .iter()
        .enumerate()
        .map(|(i, (x, y))| {
            let n = x.norm();
            if n == 0.0 {
                return Err(Error::Degenerate(format!("point {i} is the zero vector")));
            }
            Ok(x.as_slice().iter().map(|v| y as f64 * v / n).collect())
        })
        .collect::<Result<_>>()?;
    let m = z.len();

    let mut lambda = vec![1.0 / m as f64; m];
    let mut p = vec![0.0; d];
    for zi in &z {
        for (pk, zk) in p.iter_mut().zip(zi) {
            *pk += zk / m as f64;
        }
    }
    let mut g = vec![0.0; m];
    let mut best_dir: Option<Vec<f64>> = None;
    let mut best_lower = f64::NEG_INFINITY;
    let mut upper = f64::INFINITY;
    let mut converged = false;
    let mut iterations = 0;

    while iterations < opts.max_iterations {
        iterations += 1;
        let pn = dot(&p, &p).sqrt();
        if pn <= f64::EPSILON {
            break;
        }
        for (gi, zi) in g.iter_mut().zip(&z) {
            *gi = dot(&p, zi);
        }
        let (s, &gs) = g
            .iter()
            .enumerate()
            .min_by(|a, b| a.1.total_cmp(b.1))
            .expect("non-empty");
        let lower = gs / pn;
        upper = upper.min(pn);
        if lower > best_lower {
            best_lower = lower;
            best_dir = Some(p.iter().map(|v| v / pn).collect());
        }
        if upper - best_lower <= opts.tolerance {
            converged = true;
            break;
        }
        if upper < opts.tolerance {
            // The hull (nearly) contains the origin.
            break;
        }
        let (a, &ga) = g
            .iter()
            .enumerate()
            .filter(|&(i, _)| lambda[i] > 0.0)
            .max_by(|a, b| a.1.total_cmp(b.1))
            .expect("some weight is positive");
        if a == s {
            converged = true;
            break;
        }
        let dir: Vec<f64> = z[s].iter().zip(&z[a]).map(|(u, v)| u - v).collect();
        let dd = dot(&dir, &dir);
        if dd == 0.0 || ga - gs <= 0.0 {
            converged = true;
            break;
        }
        let t = ((ga - gs) / dd).min(lambda[a]);
        lambda[s] += t;
        lambda[a] -= t;
        if lambda[a] < 1e-15 {
            lambda[s] += lambda[a];
            lambda[a] = 0.0;
        }
        for (pk, dk) in p.iter_mut().zip(&dir) {
            *pk += t * dk;
        }
    }

    let separable = best_lower > 0.0;
    let direction = if separable {
        best_dir.expect("set whenever best_lower > -inf")
    } else {
        sphere_search(&z, best_dir)
    };
    let direction = Vector::new(direction)?;
    let margin = binary_margin(data, &direction, MarginKind::Normalised)?;
    Ok(MaxMargin {
        direction,
        margin,
        upper_bound: if separable { upper } else { margin.max(0.0) },
        separable: margin > 0.0,
        converged,
        iterations,
    })
}

/// Best-effort maximisation of `min_i <u, z_i>` over the unit sphere for
/// non-separable data: projected subgradient ascent from several starts.
fn sphere_search(z: &[Vec<f64>], hint: Option<Vec<f64>>) -> Vec<f64> {
    let d = z[0].len();
    let objective = |u: &[f64]| z.iter().map(|zi| dot(u, zi)).fold(f64::INFINITY, f64::min);
    let normalize = |mut u: Vec<f64>| -> Option<Vec<f64>> {
        let n = dot(&u, &u).sqrt();
        if n == 0.0 || !n.is_finite() {
            return None;
        }
        u.iter_mut().for_each(|v| *v /= n);
        Some(u)
    };
    let mut starts: Vec<Vec<f64>> = hint.into_iter().collect();
    starts.extend(z.iter().take(32).cloned());
    let mut mean = vec![0.0; d];
    for zi in z {
        for (m, v) in mean.iter_mut().zip(zi) {
            *m += v;
        }
    }
    starts.push(mean);
    for k in 0..d.min(32) {
        let mut e = vec![0.0; d];
        e[k] = 1.0;
        starts.push(e.clone());
        e[k] = -1.0;
        starts.push(e);
    }

    let mut best = (f64::NEG_INFINITY, Vec::new());
    for start in starts.into_iter().filter_map(normalize) {
        let mut u = start;
        let mut local = (objective(&u), u.clone());
        for k in 1..=2000 {
            let worst = z
                .iter()
                .min_by(|a, b| dot(&u, a).total_cmp(&dot(&u, b)))
                .expect("non-empty");
            let step = 0.5 / (k as f64).sqrt();
            let moved: Vec<f64> = u.iter().zip(worst).map(|(a, b)| a + step * b).collect();
            match normalize(moved) {
                Some(next) => u = next,
                None => break,
            }
            let f = objective(&u);
            if f > local.0 {
                local = (f, u.clone());
            }
        }
        if local.0 > best.0 {
            best = local;
        }
    }
    best.1
}

/// Evaluates the normalised margin at `num_angles` evenly spaced unit
/// directions `(cos θ_k, sin θ_k)`, `θ_k = 2πk/num_angles`, and returns the best.
pub fn sweep_margin_2d(data: &LabeledDataset, num_angles: usize) -> Result<(Vector, f64)> {
    data.require_binary()?;
    data.require_nonempty()?;
    if data.dim() != 2 {
        return Err(Error::DimensionMismatch {
            expected: 2,
            found: data.dim(),
        });
    }
    if num_angles == 0 {
        return Err(invalid("num_angles must be positive"));
    }
    let z: Vec<[f64; 2]> = data
        .iter()
        .enumerate()
        .map(|(i, (x, y))| {
            let n = x.norm();
            if n == 0.0 {
                return Err(Error::Degenerate(format!("point {i} is the zero vector")));
            }
            Ok([y as f64 * x[0] / n, y as f64 * x[1] / n])
        })
        .collect::<Result<_>>()?;
    let mut best = (f64::NEG_INFINITY, [1.0, 0.0]);
    for k in 0..num_angles {
        let theta = TAU * k as f64 / num_angles as f64;
        let u = [theta.cos(), theta.sin()];
        let g = z
            .iter()
            .map(|zi| u[0] * zi[0] + u[1] * zi[1])
            .fold(f64::INFINITY, f64::min);
        if g > best.0 {
            best = (g, u);
        }
    }
    Ok((Vector::new(best.1.to_vec())?, best.0))
}

#[cfg(test)]
mod tests {
    use super::*;

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

    #[test]
    fn square_optimum_is_vertical() {
        let r = optimize_binary_margin(&square(1.0)).unwrap();
        assert!(r.separable && r.converged);
        assert!((r.margin - 0.5f64.sqrt()).abs() < 1e-6);
        assert!(r.direction[0].abs() < 1e-6 && (r.direction[1] - 1.0).abs() < 1e-6);
    }

    #[test]
    fn antipodal_pair() {
        let x = v(&[0.3, -2.0, 1.1]);
        let data = LabeledDataset::binary(vec![x.clone(), x.scale(-1.0)], vec![1, -1]).unwrap();
        let r = optimize_binary_margin(&data).unwrap();
        assert!((r.margin - 1.0).abs() < 1e-12);
    }

    #[test]
    fn non_separable_is_flagged() {
        let data = LabeledDataset::binary(vec![v(&[1.0, 0.0]), v(&[1.0, 0.0])], vec![1, -1]).unwrap();
        let r = optimize_binary_margin(&data).unwrap();
        assert!(!r.separable);
        assert!(r.margin <= 0.0);
        // Best achievable here is 0 (u orthogonal to the point).
        assert!(r.margin > -1e-3, "margin = {}", r.margin);

        let xor = LabeledDataset::binary(
            vec![v(&[1.0, 0.1]), v(&[-1.0, 0.1]), v(&[0.1, 1.0]), v(&[0.1, -1.0])],
            vec![1, 1, -1, -1],
        )
        .unwrap();
        let r = optimize_binary_margin(&xor).unwrap();
        assert!(!r.separable && r.margin < 0.0);
    }

    #[test]
    fn optimizer_errors() {
        let empty = LabeledDataset::binary(vec![], vec![]).unwrap();
        assert_eq!(optimize_binary_margin(&empty), Err(Error::EmptyDataset));
        let mc = LabeledDataset::multiclass(vec![v(&[1.0])], vec![1], 2).unwrap();
        assert!(optimize_binary_margin(&mc).is_err());
    }

    #[test]
    fn sweep_four_angles_on_square() {
        let (u, g) = sweep_margin_2d(&square(1.0), 4).unwrap();
        assert!(u[0].abs() < 1e-15 && (u[1] - 1.0).abs() < 1e-15);
        assert!((g - 0.5f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn sweep_nested_grids_monotone() {
        let data = LabeledDataset::binary(
            vec![v(&[1.0, 0.2]), v(&[0.8, -0.5]), v(&[-0.9, 0.4]), v(&[2.0, 1.5])],
            vec![1, 1, -1, 1],
        )
        .unwrap();
        let mut prev = f64::NEG_INFINITY;
        for k in 0..10 {
            let (_, g) = sweep_margin_2d(&data, 3 << k).unwrap();
            assert!(g >= prev);
            prev = g;
        }
    }

    #[test]
    fn sweep_stretched_square() {
        let (_, g) = sweep_margin_2d(&square(10.0), 1_000_000).unwrap();
        assert!((g - 1.0 / 101f64.sqrt()).abs() < 1e-9);
    }

    #[test]
    fn sweep_rejects_non_planar() {
        let data = LabeledDataset::binary(vec![v(&[1.0, 0.0, 0.0])], vec![1]).unwrap();
        assert!(matches!(
            sweep_margin_2d(&data, 8),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn optimizer_beats_random_witnesses_in_higher_dimension() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        let d = 6;
        let truth: Vec<f64> = (0..d).map(|_| rng.random_range(-1.0..1.0)).collect();
        let mut pts = Vec::new();
        let mut labels = Vec::new();
        while pts.len() < 30 {
            let x: Vec<f64> = (0..d).map(|_| rng.random_range(-1.0..1.0)).collect();
            let s = dot(&x, &truth) / dot(&x, &x).sqrt() / dot(&truth, &truth).sqrt();
            if s.abs() > 0.1 {
                labels.push(if s > 0.0 { 1 } else { -1 });
                pts.push(v(&x));
            }
        }
        let data = LabeledDataset::binary(pts, labels).unwrap();
        let r = optimize_binary_margin(&data).unwrap();
        assert!(r.converged && r.separable);
        assert!(r.upper_bound - r.margin <= 1e-6);
        let truth_margin = binary_margin(&data, &v(&truth), MarginKind::Normalised).unwrap();
        assert!(r.margin >= truth_margin - 1e-12);
        for _ in 0..200 {
            let u: Vec<f64> = truth.iter().map(|t| t + rng.random_range(-0.2..0.2)).collect();
            let g = binary_margin(&data, &v(&u), MarginKind::Normalised).unwrap();
            assert!(r.margin >= g - 1e-12);
        }
    }
}
