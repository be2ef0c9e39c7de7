//! Monte Carlo estimates of how often a random projection distorts angles,
//! inner products, norms and margins beyond a relative tolerance.
//!
//! Every trial draws its own matrix from a seed mixed out of the master seed,
//! the target dimension `n` and the trial index, so results do not depend on
//! thread scheduling and a single grid point can be rerun in isolation.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bounds::{angle_distortion_interval, SuccessBound};
use crate::datasets::GeneratedPair;
use crate::error::{invalid, Error, Result};
use crate::margin::{optimize_binary_margin, witness_margin, LabeledDataset, LinearWitness, MarginKind};
use crate::projection::{BlockProjection, Family, MatrixSampler, ProjectionMatrix};
use crate::vector::{dot, Vector};

/// Two-sided 95% normal quantile.
pub const WILSON_Z: f64 = 1.959_963_984_540_054;

fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of trial `t` at target dimension `n`.
pub fn trial_seed(master: u64, n: u64, t: u64) -> u64 {
    splitmix64(splitmix64(splitmix64(master) ^ n) ^ t)
}

/// Wilson score interval for `k` successes out of `t`, widened if needed so
/// that it always contains `k / t`.
pub fn wilson_interval(k: usize, t: usize) -> (f64, f64) {
    let (k, t) = (k as f64, t as f64);
    let p = k / t;
    let z2 = WILSON_Z * WILSON_Z;
    let denom = 1.0 + z2 / t;
    let centre = (p + z2 / (2.0 * t)) / denom;
    let half = WILSON_Z * (p * (1.0 - p) / t + z2 / (4.0 * t * t)).sqrt() / denom;
    ((centre - half).min(p).max(0.0), (centre + half).max(p).min(1.0))
}

/// Grid, tolerance and sampling settings shared by the rejection estimators.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialConfig {
    pub n_grid: Vec<usize>,
    pub epsilon: f64,
    pub trials: usize,
    pub master_seed: u64,
    pub family: Family,
}

impl TrialConfig {
    pub fn new(n_grid: Vec<usize>, epsilon: f64, trials: usize, master_seed: u64) -> Self {
        Self {
            n_grid,
            epsilon,
            trials,
            master_seed,
            family: Family::Gaussian,
        }
    }

    pub fn validate(&self) -> Result<()> {
        check_grid(&self.n_grid)?;
        check_eps(self.epsilon)?;
        if self.trials == 0 {
            return Err(invalid("trials must be positive"));
        }
        Ok(())
    }
}

fn check_grid(grid: &[usize]) -> Result<()> {
    if grid.is_empty() {
        return Err(invalid("n grid is empty"));
    }
    if grid[0] == 0 {
        return Err(invalid("n grid values must be positive"));
    }
    if grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(invalid("n grid must be strictly increasing"));
    }
    Ok(())
}

fn check_eps(eps: f64) -> Result<()> {
    if eps > 0.0 && eps < 1.0 {
        Ok(())
    } else {
        Err(invalid(format!("epsilon must lie in (0, 1), got {eps}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub n: usize,
    pub trials: usize,
    pub rejections: usize,
    pub p_hat: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
    pub theory_bound: Option<f64>,
}

/// Estimated rejection probability at each grid dimension.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RejectionCurve {
    pub epsilon: f64,
    pub points: Vec<CurvePoint>,
}

impl RejectionCurve {
    fn build(epsilon: f64, grid: &[usize], rejected: &[Vec<bool>], theory: Option<&dyn Fn(usize) -> f64>) -> Self {
        let points = grid
            .iter()
            .zip(rejected)
            .map(|(&n, flags)| {
                let trials = flags.len();
                let rejections = flags.iter().filter(|&&f| f).count();
                let (ci_lo, ci_hi) = wilson_interval(rejections, trials);
                CurvePoint {
                    n,
                    trials,
                    rejections,
                    p_hat: rejections as f64 / trials as f64,
                    ci_lo,
                    ci_hi,
                    theory_bound: theory.map(|f| f(n)),
                }
            })
            .collect();
        Self { epsilon, points }
    }

    pub fn p_hats(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.p_hat).collect()
    }
}

/// Runs `f` on one freshly sampled `n x d` matrix per (grid point, trial).
/// Results are indexed `[grid][trial]`.
pub fn simulate<T, F>(
    grid: &[usize],
    d: usize,
    trials: usize,
    master_seed: u64,
    sampler: &dyn MatrixSampler,
    f: F,
) -> Result<Vec<Vec<T>>>
where
    T: Send,
    F: Fn(&ProjectionMatrix) -> Result<T> + Sync,
{
    check_grid(grid)?;
    if trials == 0 {
        return Err(invalid("trials must be positive"));
    }
    grid.iter()
        .map(|&n| {
            (0..trials)
                .into_par_iter()
                .map(|t| {
                    let r = sampler.sample(n, d, trial_seed(master_seed, n as u64, t as u64))?;
                    if r.rows() != n || r.cols() != d {
                        return Err(Error::DimensionMismatch {
                            expected: n * d,
                            found: r.rows() * r.cols(),
                        });
                    }
                    f(&r)
                })
                .collect()
        })
        .collect()
}

/// Projected inner product and cosine of a pair under one matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairStats {
    pub inner: f64,
    pub cosine: f64,
}

fn pair_stats(r: &ProjectionMatrix, pair: &GeneratedPair) -> Result<PairStats> {
    let rw = r.apply(pair.w.as_slice());
    let rx = r.apply(pair.x.as_slice());
    let inner = dot(&rw, &rx);
    let norms = (dot(&rw, &rw) * dot(&rx, &rx)).sqrt();
    if norms == 0.0 {
        return Err(Error::Degenerate("projected pair contains a zero vector".into()));
    }
    Ok(PairStats {
        inner,
        cosine: (inner / norms).clamp(-1.0, 1.0),
    })
}

/// Angle (`P1`) and inner-product (`P2`) rejection curves for one pair and tolerance.
#[derive(Debug, Clone, PartialEq)]
pub struct PairCurves {
    pub angle: RejectionCurve,
    pub inner: RejectionCurve,
}

/// Below this the original cosine counts as zero and ratios are undefined.
const ZERO_COSINE: f64 = 1e-12;

/// Rejection curves for several pairs and tolerances from one set of
/// matrices: every pair and tolerance sees the same draws. The angle test
/// rejects unless `cos'/cos` lies in `[1-ε, 1+ε)`; the inner-product test
/// rejects unless `<Rw,Rx>/<w,x>` lies in `[1-ε, 1+ε]`. Indexed `[pair][eps]`.
pub fn pair_rejections_with(
    pairs: &[GeneratedPair],
    grid: &[usize],
    epsilons: &[f64],
    trials: usize,
    master_seed: u64,
    sampler: &dyn MatrixSampler,
) -> Result<Vec<Vec<PairCurves>>> {
    let d = pairs.first().ok_or_else(|| invalid("no pairs given"))?.dim();
    let mut originals = Vec::with_capacity(pairs.len());
    for p in pairs {
        p.w.check_dim(d)?;
        p.x.check_dim(d)?;
        let inner = p.w.dot(&p.x)?;
        let cosine = inner / (p.w.norm() * p.x.norm());
        if cosine.is_nan() || cosine.abs() < ZERO_COSINE {
            return Err(Error::Degenerate(
                "original inner product is zero; distortion ratio undefined".into(),
            ));
        }
        originals.push((inner, cosine));
    }
    for &e in epsilons {
        check_eps(e)?;
    }
    let stats = simulate(grid, d, trials, master_seed, sampler, |r| {
        pairs.iter().map(|p| pair_stats(r, p)).collect::<Result<Vec<_>>>()
    })?;
    Ok(originals
        .iter()
        .enumerate()
        .map(|(k, &(inner0, cos0))| {
            epsilons
                .iter()
                .map(|&eps| {
                    let flags = |g: &dyn Fn(&PairStats) -> bool| -> Vec<Vec<bool>> {
                        stats.iter().map(|row| row.iter().map(|s| g(&s[k])).collect()).collect()
                    };
                    let angle = flags(&|s| {
                        let ratio = s.cosine / cos0;
                        !(1.0 - eps <= ratio && ratio < 1.0 + eps)
                    });
                    let inner = flags(&|s| {
                        let ratio = s.inner / inner0;
                        !(1.0 - eps <= ratio && ratio <= 1.0 + eps)
                    });
                    PairCurves {
                        angle: RejectionCurve::build(eps, grid, &angle, None),
                        inner: RejectionCurve::build(eps, grid, &inner, None),
                    }
                })
                .collect()
        })
        .collect())
}

fn single_pair(pair: &GeneratedPair, cfg: &TrialConfig, sampler: &dyn MatrixSampler) -> Result<PairCurves> {
    cfg.validate()?;
    let mut out = pair_rejections_with(
        std::slice::from_ref(pair),
        &cfg.n_grid,
        &[cfg.epsilon],
        cfg.trials,
        cfg.master_seed,
        sampler,
    )?;
    Ok(out.remove(0).remove(0))
}

/// Rejection curve for the cosine ratio (half-open acceptance `[1-ε, 1+ε)`).
pub fn reject_angle(pair: &GeneratedPair, cfg: &TrialConfig) -> Result<RejectionCurve> {
    reject_angle_with(pair, cfg, &cfg.family)
}

pub fn reject_angle_with(
    pair: &GeneratedPair,
    cfg: &TrialConfig,
    sampler: &dyn MatrixSampler,
) -> Result<RejectionCurve> {
    Ok(single_pair(pair, cfg, sampler)?.angle)
}

/// Rejection curve for the inner-product ratio (closed acceptance `[1-ε, 1+ε]`).
pub fn reject_inner(pair: &GeneratedPair, cfg: &TrialConfig) -> Result<RejectionCurve> {
    reject_inner_with(pair, cfg, &cfg.family)
}

pub fn reject_inner_with(
    pair: &GeneratedPair,
    cfg: &TrialConfig,
    sampler: &dyn MatrixSampler,
) -> Result<RejectionCurve> {
    Ok(single_pair(pair, cfg, sampler)?.inner)
}

/// How the projected margin is measured in [`reject_margin`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MarginMode {
    /// Margin of the projected witness on the projected data.
    #[default]
    ProjectedWitness,
    /// Maximum normalised margin of the projected binary data, re-optimised.
    Reoptimize,
}

/// Ratios `γ'/γ` indexed `[grid][trial][kind]`, all kinds from the same matrices.
#[allow(clippy::too_many_arguments)]
pub fn margin_ratios_with(
    data: &LabeledDataset,
    witness: &LinearWitness,
    kinds: &[MarginKind],
    mode: MarginMode,
    grid: &[usize],
    trials: usize,
    master_seed: u64,
    sampler: &dyn MatrixSampler,
) -> Result<Vec<Vec<Vec<f64>>>> {
    if data.is_empty() {
        return Err(Error::EmptyDataset);
    }
    if kinds.is_empty() {
        return Err(invalid("no margin kinds requested"));
    }
    let originals = kinds
        .iter()
        .map(|&k| {
            let g = witness_margin(data, witness, k)?;
            if g == 0.0 {
                Err(Error::Degenerate(
                    "original margin is zero; distortion ratio undefined".into(),
                ))
            } else {
                Ok(g)
            }
        })
        .collect::<Result<Vec<_>>>()?;
    if mode == MarginMode::Reoptimize
        && (!matches!(witness, LinearWitness::Binary(_)) || kinds.iter().any(|k| !k.is_normalised()))
    {
        return Err(invalid(
            "re-optimised margins are defined for normalised binary data only",
        ));
    }
    let in_dim = match witness {
        LinearWitness::OneParam { u, .. } => u.dim(),
        _ => data.dim(),
    };
    simulate(grid, in_dim, trials, master_seed, sampler, |r| {
        let projected: Vec<f64> = match (witness, mode) {
            (LinearWitness::OneParam { u, classes }, _) => {
                let block = BlockProjection::new(r.clone(), data.dim(), *classes)?;
                let v = r.project(u)?;
                kinds
                    .iter()
                    .map(|&k| crate::margin::one_param_projected_margin(data, &v, &block, k))
                    .collect::<Result<_>>()?
            }
            (_, MarginMode::Reoptimize) => {
                let m = optimize_binary_margin(&r.project_dataset(data)?)?.margin;
                vec![m; kinds.len()]
            }
            _ => {
                let pd = r.project_dataset(data)?;
                let pw = witness.project(r)?;
                kinds
                    .iter()
                    .map(|&k| witness_margin(&pd, &pw, k))
                    .collect::<Result<_>>()?
            }
        };
        Ok(projected.iter().zip(&originals).map(|(p, o)| p / o).collect())
    })
}

fn margin_flags(ratios: &[Vec<Vec<f64>>], kind_index: usize, eps: f64) -> Vec<Vec<bool>> {
    ratios
        .iter()
        .map(|row| {
            row.iter()
                .map(|r| {
                    let ratio = r[kind_index];
                    !(1.0 - eps <= ratio && ratio < 1.0 + eps)
                })
                .collect()
        })
        .collect()
}

/// Curves for several margin kinds and tolerances from shared draws, indexed `[kind][eps]`.
#[allow(clippy::too_many_arguments)]
pub fn margin_rejections_with(
    data: &LabeledDataset,
    witness: &LinearWitness,
    kinds: &[MarginKind],
    mode: MarginMode,
    grid: &[usize],
    epsilons: &[f64],
    trials: usize,
    master_seed: u64,
    sampler: &dyn MatrixSampler,
) -> Result<Vec<Vec<RejectionCurve>>> {
    for &e in epsilons {
        check_eps(e)?;
    }
    let ratios = margin_ratios_with(data, witness, kinds, mode, grid, trials, master_seed, sampler)?;
    Ok((0..kinds.len())
        .map(|k| {
            epsilons
                .iter()
                .map(|&eps| RejectionCurve::build(eps, grid, &margin_flags(&ratios, k, eps), None))
                .collect()
        })
        .collect())
}

/// Rejection curve for the margin ratio `γ'/γ` (half-open acceptance `[1-ε, 1+ε)`).
pub fn reject_margin(
    data: &LabeledDataset,
    witness: &LinearWitness,
    cfg: &TrialConfig,
    kind: MarginKind,
    mode: MarginMode,
) -> Result<RejectionCurve> {
    reject_margin_with(data, witness, cfg, kind, mode, &cfg.family)
}

pub fn reject_margin_with(
    data: &LabeledDataset,
    witness: &LinearWitness,
    cfg: &TrialConfig,
    kind: MarginKind,
    mode: MarginMode,
    sampler: &dyn MatrixSampler,
) -> Result<RejectionCurve> {
    cfg.validate()?;
    let mut out = margin_rejections_with(
        data,
        witness,
        &[kind],
        mode,
        &cfg.n_grid,
        &[cfg.epsilon],
        cfg.trials,
        cfg.master_seed,
        sampler,
    )?;
    Ok(out.remove(0).remove(0))
}

/// Frequency with which the projected cosine leaves the guaranteed interval,
/// next to the union bound `6 exp(-(n/2)(ε²/2 - ε³/3))`. Needs `cos(w, x) > 0`.
pub fn verify_eq4(pair: &GeneratedPair, cfg: &TrialConfig) -> Result<RejectionCurve> {
    verify_eq4_with(pair, cfg, &cfg.family)
}

pub fn verify_eq4_with(pair: &GeneratedPair, cfg: &TrialConfig, sampler: &dyn MatrixSampler) -> Result<RejectionCurve> {
    cfg.validate()?;
    let cos0 = crate::margin::cosine(&pair.w, &pair.x)?;
    let (interval, bound) = angle_distortion_interval(cos0, cfg.epsilon)?;
    let flags = simulate(&cfg.n_grid, pair.dim(), cfg.trials, cfg.master_seed, sampler, |r| {
        Ok(!interval.contains(pair_stats(r, pair)?.cosine))
    })?;
    Ok(RejectionCurve::build(
        cfg.epsilon,
        &cfg.n_grid,
        &flags,
        Some(&|n| bound.failure(n as u64)),
    ))
}

/// Frequency with which `‖Rx‖²/‖x‖²` leaves `[1-ε, 1+ε]`, next to the
/// two-sided bound `2 exp(-(n/2)(ε²/2 - ε³/3))`.
pub fn verify_norm_tail(x: &Vector, cfg: &TrialConfig) -> Result<RejectionCurve> {
    verify_norm_tail_with(x, cfg, &cfg.family)
}

pub fn verify_norm_tail_with(x: &Vector, cfg: &TrialConfig, sampler: &dyn MatrixSampler) -> Result<RejectionCurve> {
    cfg.validate()?;
    let nsq = x.norm_sq();
    if nsq == 0.0 {
        return Err(Error::ZeroVector("norm-tail input"));
    }
    let eps = cfg.epsilon;
    let bound = SuccessBound::new(2.0, eps);
    let flags = simulate(&cfg.n_grid, x.dim(), cfg.trials, cfg.master_seed, sampler, |r| {
        let rx = r.apply(x.as_slice());
        let ratio = dot(&rx, &rx) / nsq;
        Ok(!(1.0 - eps <= ratio && ratio <= 1.0 + eps))
    })?;
    Ok(RejectionCurve::build(
        eps,
        &cfg.n_grid,
        &flags,
        Some(&|n| bound.failure(n as u64)),
    ))
}

/// Sample mean and standard error of `<Rw, Rx>` over `trials` draws at dimension `n`.
pub fn verify_mean(
    pair: &GeneratedPair,
    n: usize,
    trials: usize,
    master_seed: u64,
    family: Family,
) -> Result<(f64, f64)> {
    verify_mean_with(pair, n, trials, master_seed, &family)
}

pub fn verify_mean_with(
    pair: &GeneratedPair,
    n: usize,
    trials: usize,
    master_seed: u64,
    sampler: &dyn MatrixSampler,
) -> Result<(f64, f64)> {
    if trials < 2 {
        return Err(invalid("need at least two trials for a standard error"));
    }
    let draws = simulate(&[n], pair.dim(), trials, master_seed, sampler, |r| {
        Ok(dot(&r.apply(pair.w.as_slice()), &r.apply(pair.x.as_slice())))
    })?
    .remove(0);
    let t = trials as f64;
    let mean = draws.iter().sum::<f64>() / t;
    let var = draws.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (t - 1.0);
    Ok((mean, (var / t).sqrt()))
}
