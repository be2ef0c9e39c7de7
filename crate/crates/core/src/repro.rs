//! One-shot reproduction of the rejection-probability and counter-example
//! experiments as deterministic CSV.

use std::fmt;
use std::str::FromStr;

use crate::datasets::{
    parallel_hyperplanes, random_pair_with_cosine, separability_probability_1d, separability_probability_mc,
    GeneratedPair,
};
use crate::error::{invalid, Error, Result};
use crate::format::{curves_to_csv, fmt_sig, separability_to_csv, SeparabilityRow};
use crate::margin::{LinearWitness, MarginKind};
use crate::montecarlo::{
    margin_rejections_with, pair_rejections_with, trial_seed, MarginMode, PairCurves, RejectionCurve,
};
use crate::projection::Family;

/// Cosines of the two acute and two obtuse test pairs.
pub const PAIR_COSINES: [f64; 4] = [0.827, 0.527, -0.062, -0.0165];
pub const PAIR_DIM: usize = 300;
pub const EPSILONS: [f64; 2] = [0.1, 0.3];
pub const FIG2_TRIALS: usize = 2000;
pub const FIG3_TRIALS: usize = 100;
pub const FIG3_DIM: usize = 100;
pub const FIG3_CLASSES: usize = 3;
pub const FIG3_PER_CLASS: usize = 5;
pub const HYPERPLANE_GAP: f64 = 1.0;
pub const HYPERPLANE_SPREAD: f64 = 0.1;
pub const STRETCHES: [f64; 8] = [1.0, 1.5, 2.0, 3.0, 5.0, 10.0, 20.0, 50.0];
pub const SEPARABILITY_SAMPLES: usize = 100_000;

/// `30, 60, ..., 300`.
pub fn n_grid() -> Vec<usize> {
    (1..=10).map(|k| 30 * k).collect()
}

/// Reproducible experiment.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Figure {
    /// Angle rejection for the acute pairs.
    Fig2a,
    /// Inner-product rejection for the acute pairs.
    Fig2b,
    /// Angle rejection for the obtuse pairs.
    Fig2c,
    /// Inner-product rejection for the obtuse pairs.
    Fig2d,
    /// Margin rejection on hyperplane data.
    Fig3,
    /// Separability of the stretched square.
    Counterexample,
}

impl Figure {
    pub const ALL: [Figure; 6] = [
        Figure::Fig2a,
        Figure::Fig2b,
        Figure::Fig2c,
        Figure::Fig2d,
        Figure::Fig3,
        Figure::Counterexample,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Figure::Fig2a => "fig2a",
            Figure::Fig2b => "fig2b",
            Figure::Fig2c => "fig2c",
            Figure::Fig2d => "fig2d",
            Figure::Fig3 => "fig3",
            Figure::Counterexample => "counterexample",
        }
    }
}

impl fmt::Display for Figure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Figure {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Figure::ALL
            .into_iter()
            .find(|f| f.name() == s)
            .ok_or_else(|| invalid(format!("unknown figure '{s}'")))
    }
}

/// Seed and sampling overrides; `None` trial counts use the defaults above.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReproSettings {
    pub seed: u64,
    pub trials: Option<usize>,
    pub family: Family,
}

impl ReproSettings {
    pub fn new(seed: u64) -> Self {
        Self {
            seed,
            trials: None,
            family: Family::Gaussian,
        }
    }
}

/// Seeds for generated inputs live at `n = 0`, which no grid contains.
fn input_seed(master: u64, k: u64) -> u64 {
    trial_seed(master, 0, k)
}

/// The four test pairs for a master seed.
pub fn fig2_pairs(seed: u64) -> Result<Vec<GeneratedPair>> {
    PAIR_COSINES
        .iter()
        .enumerate()
        .map(|(k, &c)| random_pair_with_cosine(PAIR_DIM, c, input_seed(seed, k as u64)))
        .collect()
}

/// Angle and inner-product curves for `pairs` under shared matrices, indexed `[pair][eps]`.
pub fn fig2_curves(pairs: &[GeneratedPair], settings: &ReproSettings) -> Result<Vec<Vec<PairCurves>>> {
    pair_rejections_with(
        pairs,
        &n_grid(),
        &EPSILONS,
        settings.trials.unwrap_or(FIG2_TRIALS),
        settings.seed,
        &settings.family,
    )
}

fn pair_series(cos: f64) -> String {
    format!("cos_{}", fmt_sig(cos))
}

fn fig2_csv(settings: &ReproSettings, obtuse: bool, inner: bool) -> Result<String> {
    let all = fig2_pairs(settings.seed)?;
    let pairs = if obtuse { &all[2..] } else { &all[..2] };
    let curves = fig2_curves(pairs, settings)?;
    let names: Vec<String> = pairs.iter().map(|p| pair_series(p.target_cosine)).collect();
    let rows = names.iter().zip(&curves).flat_map(|(name, per_eps)| {
        per_eps
            .iter()
            .map(move |c| (name.as_str(), if inner { &c.inner } else { &c.angle }))
    });
    Ok(curves_to_csv(rows))
}

/// The margin-rejection series on hyperplane data.
#[derive(Debug, Clone, PartialEq)]
pub struct Fig3Curves {
    /// `(series name, curve)` for every series and tolerance.
    pub series: Vec<(String, RejectionCurve)>,
    pub binary_margin: f64,
    pub multiclass_margin: f64,
}

/// Normalised and unnormalised margin rejection for binary (two hyperplanes)
/// and multiclass (three hyperplanes) data, all from shared matrices.
pub fn fig3_curves(settings: &ReproSettings) -> Result<Fig3Curves> {
    let trials = settings.trials.unwrap_or(FIG3_TRIALS);
    let kinds = [MarginKind::Normalised, MarginKind::Unnormalised];
    let multi = parallel_hyperplanes(
        FIG3_CLASSES,
        FIG3_PER_CLASS,
        FIG3_DIM,
        HYPERPLANE_GAP,
        HYPERPLANE_SPREAD,
        input_seed(settings.seed, 100),
    )?;
    let binary = parallel_hyperplanes(
        2,
        FIG3_PER_CLASS,
        FIG3_DIM,
        HYPERPLANE_GAP,
        HYPERPLANE_SPREAD,
        input_seed(settings.seed, 101),
    )?
    .to_binary()?;
    let binary_witness = LinearWitness::binary(binary.witness.clone())?;
    let grid = n_grid();
    let run = |data, witness| {
        margin_rejections_with(
            data,
            witness,
            &kinds,
            MarginMode::ProjectedWitness,
            &grid,
            &EPSILONS,
            trials,
            settings.seed,
            &settings.family,
        )
    };
    let bin = run(&binary.dataset, &binary_witness)?;
    let mc = run(&multi.dataset, &multi.witness)?;
    let mut series = Vec::new();
    for (label, curves) in [("binary", bin), ("multiclass", mc)] {
        for (kind, per_eps) in kinds.iter().zip(curves) {
            let prefix = if kind.is_normalised() {
                "normalised"
            } else {
                "unnormalised"
            };
            for c in per_eps {
                series.push((format!("{prefix}_{label}"), c));
            }
        }
    }
    Ok(Fig3Curves {
        series,
        binary_margin: binary.target_margin,
        multiclass_margin: multi.target_margin,
    })
}

/// Analytic and Monte Carlo separability of the stretched square.
pub fn counterexample_rows(settings: &ReproSettings) -> Result<Vec<SeparabilityRow>> {
    let samples = settings.trials.unwrap_or(SEPARABILITY_SAMPLES);
    STRETCHES
        .iter()
        .map(|&s| {
            Ok(SeparabilityRow {
                s,
                analytic_prob: separability_probability_1d(s)?,
                mc_prob: separability_probability_mc(s, samples, settings.seed)?,
                mc_trials: samples,
            })
        })
        .collect()
}

/// Runs `figure` and renders its CSV.
pub fn reproduce(figure: Figure, settings: &ReproSettings) -> Result<String> {
    match figure {
        Figure::Fig2a => fig2_csv(settings, false, false),
        Figure::Fig2b => fig2_csv(settings, false, true),
        Figure::Fig2c => fig2_csv(settings, true, false),
        Figure::Fig2d => fig2_csv(settings, true, true),
        Figure::Fig3 => {
            let f = fig3_curves(settings)?;
            Ok(curves_to_csv(f.series.iter().map(|(s, c)| (s.as_str(), c))))
        }
        Figure::Counterexample => Ok(separability_to_csv(&counterexample_rows(settings)?)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quick(seed: u64) -> ReproSettings {
        ReproSettings {
            seed,
            trials: Some(20),
            family: Family::Gaussian,
        }
    }

    #[test]
    fn figure_names_roundtrip() {
        for f in Figure::ALL {
            assert_eq!(f.name().parse::<Figure>().unwrap(), f);
        }
        assert!("fig4".parse::<Figure>().is_err());
    }

    #[test]
    fn grid_is_30_to_300() {
        let g = n_grid();
        assert_eq!((g[0], g[9], g.len()), (30, 300, 10));
    }

    #[test]
    fn fig2_rows_and_series() {
        let csv = reproduce(Figure::Fig2c, &quick(1)).unwrap();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines.len(), 1 + 2 * 2 * 10);
        assert!(lines[1].starts_with("cos_-0.062,30,0.1,20,"));
        assert!(lines.last().unwrap().starts_with("cos_-0.0165,300,0.3,20,"));
    }

    #[test]
    fn fig3_has_four_series_per_tolerance() {
        let f = fig3_curves(&quick(2)).unwrap();
        let names: Vec<&str> = f.series.iter().map(|(s, _)| s.as_str()).collect();
        for s in [
            "normalised_binary",
            "unnormalised_binary",
            "normalised_multiclass",
            "unnormalised_multiclass",
        ] {
            assert_eq!(names.iter().filter(|&&n| n == s).count(), 2);
        }
        assert!(f.binary_margin > 0.0 && f.multiclass_margin > 0.0);
    }

    #[test]
    fn counterexample_first_row() {
        let csv = reproduce(Figure::Counterexample, &quick(3)).unwrap();
        assert!(csv.lines().nth(1).unwrap().starts_with("1,0.5,"));
        assert_eq!(csv.lines().count(), 1 + STRETCHES.len());
    }

    #[test]
    fn deterministic() {
        for f in Figure::ALL {
            assert_eq!(
                reproduce(f, &quick(4)).unwrap(),
                reproduce(f, &quick(4)).unwrap(),
                "{f}"
            );
        }
        assert_ne!(
            reproduce(Figure::Fig2a, &quick(4)).unwrap(),
            reproduce(Figure::Fig2a, &quick(5)).unwrap()
        );
    }
}
