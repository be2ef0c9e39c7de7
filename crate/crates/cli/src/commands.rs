use serde_json::{json, Value};

use rpmargin::bounds;
use rpmargin::datasets::{counterexample_square, parallel_hyperplanes, random_pair_with_cosine, GeneratedPair};
use rpmargin::format::{curves_to_csv, dataset_to_csv, fmt_sig, pair_to_csv, parse_dataset_csv, parse_pair_csv};
use rpmargin::margin::{optimize_binary_margin, witness_margin};
use rpmargin::montecarlo::{self, MarginMode, TrialConfig};
use rpmargin::repro::{self, Figure, ReproSettings};
use rpmargin::{Family, LabeledDataset, LinearWitness, MarginKind, ProjectionMatrix, Vector};

use crate::params::{parse_coords, parse_grid, required, Spec};
use crate::{
    BoundArgs, BoundKind, CliError, GenCommand, KindFlags, MarginArgs, McArgs, McCommand, McMarginArgs, ProjectArgs,
    ReproArgs,
};

type Out = Result<String, CliError>;

fn line(v: f64) -> String {
    format!("{}\n", fmt_sig(v))
}

fn usize_of(v: Option<u64>) -> Option<usize> {
    v.map(|x| x as usize)
}

fn family(spec: &Spec, flag: &Option<String>) -> Result<Family, CliError> {
    match spec.string(flag.clone(), "family")? {
        Some(s) => Ok(s.parse::<Family>()?),
        None => Ok(Family::Gaussian),
    }
}

fn kind(spec: &Spec, flags: &KindFlags) -> Result<MarginKind, CliError> {
    let norm = spec.flag(flags.normalised, "normalised")?;
    let unnorm = spec.flag(flags.unnormalised, "unnormalised")?;
    match (norm, unnorm) {
        (true, true) => Err(CliError::Usage("choose one of --normalised and --unnormalised".into())),
        (_, true) => Ok(MarginKind::Unnormalised),
        _ => Ok(MarginKind::Normalised),
    }
}

fn json_text(v: &Value) -> String {
    format!("{}\n", serde_json::to_string_pretty(v).expect("serializable"))
}

fn to_json<T: serde::Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("serializable")
}

pub fn bound(a: &BoundArgs, spec: &Spec) -> Out {
    let defaults = bounds::DistortionParams::default();
    let eps = spec.f64(a.eps, "eps")?.unwrap_or(defaults.epsilon);
    let delta = spec.f64(a.delta, "delta")?.unwrap_or(defaults.delta);
    let gamma = spec.f64(a.gamma, "gamma")?.unwrap_or(defaults.gamma);
    let m = spec.u64(a.m, "m")?.unwrap_or(defaults.m);
    let classes = spec.u64(a.classes, "L")?.unwrap_or(defaults.classes);
    let rho = spec.f64(a.rho, "rho")?.unwrap_or(defaults.rho);
    let c = spec.f64(a.c, "c")?.unwrap_or(defaults.c);
    let n = || -> Result<u64, CliError> { required(spec.u64(a.n, "n")?, "n") };
    let margin = |g: bounds::MarginGuarantee| {
        if !g.separable {
            eprintln!("note: guaranteed margin is not positive; separability is not guaranteed");
        }
        line(g.margin)
    };
    Ok(match a.kind {
        BoundKind::Tail => line(bounds::tail_success_prob(n()?, eps)?),
        BoundKind::Chi2 => {
            let (lower, upper) = bounds::chi2_tails(n()?, eps)?;
            format!("lower,upper\n{},{}\n", fmt_sig(lower), fmt_sig(upper))
        }
        BoundKind::AngleInterval => {
            let (iv, sb) = bounds::angle_distortion_interval(gamma, eps)?;
            let mut s = format!("lo,hi\n{},{}\n", fmt_sig(iv.lo), fmt_sig(iv.hi));
            if let Some(n) = spec.u64(a.n, "n")? {
                s = format!(
                    "lo,hi,success_prob\n{},{},{}\n",
                    fmt_sig(iv.lo),
                    fmt_sig(iv.hi),
                    fmt_sig(sb.success(n))
                );
            }
            s
        }
        BoundKind::MinDimBinary => format!("{}\n", bounds::min_dim_binary(eps, delta, m)?),
        BoundKind::MinDimMulticlass => format!("{}\n", bounds::min_dim_multiclass(eps, delta, m, classes)?),
        BoundKind::MinDimOneparam => format!("{}\n", bounds::min_dim_oneparam(eps, delta, m, classes)?),
        BoundKind::MarginBinary => margin(bounds::projected_margin_binary(gamma, eps)?),
        BoundKind::MarginMulticlass => margin(bounds::projected_margin_multiclass(gamma, eps)?),
        BoundKind::MarginOneparam => margin(bounds::projected_margin_oneparam(gamma, eps, classes)?),
        BoundKind::Balcan => line(bounds::balcan_min_dim(gamma, rho, delta, c)?),
    })
}

pub fn gen(what: &GenCommand, spec: &Spec) -> Out {
    match what {
        GenCommand::Square { stretch, json } => {
            let s = spec.f64(*stretch, "stretch")?.unwrap_or(1.0);
            let data = counterexample_square(s)?;
            Ok(if spec.flag(*json, "json")? {
                json_text(&json!({ "dataset": to_json(&data) }))
            } else {
                dataset_to_csv(&data)
            })
        }
        GenCommand::Pair { d, cosine, seed, json } => {
            let d = required(usize_of(spec.u64(d.map(|v| v as u64), "d")?), "d")?;
            let cosine = required(spec.f64(*cosine, "cosine")?, "cosine")?;
            let seed = spec.u64(*seed, "seed")?.unwrap_or(0);
            let pair = random_pair_with_cosine(d, cosine, seed)?;
            Ok(if spec.flag(*json, "json")? {
                json_text(&to_json(&pair))
            } else {
                pair_to_csv(&pair)
            })
        }
        GenCommand::Hyperplanes {
            classes,
            per_class,
            d,
            gap,
            spread,
            seed,
            binary,
            json,
        } => {
            let classes = usize_of(spec.u64(*classes, "L")?).unwrap_or(repro::FIG3_CLASSES);
            let per_class = usize_of(spec.u64(*per_class, "per_class")?).unwrap_or(repro::FIG3_PER_CLASS);
            let d = usize_of(spec.u64(d.map(|v| v as u64), "d")?).unwrap_or(repro::FIG3_DIM);
            let gap = spec.f64(*gap, "gap")?.unwrap_or(repro::HYPERPLANE_GAP);
            let spread = spec.f64(*spread, "spread")?.unwrap_or(repro::HYPERPLANE_SPREAD);
            let seed = spec.u64(*seed, "seed")?.unwrap_or(0);
            let gm = parallel_hyperplanes(classes, per_class, d, gap, spread, seed)?;
            let as_json = spec.flag(*json, "json")?;
            if spec.flag(*binary, "binary")? {
                let b = gm.to_binary()?;
                return Ok(if as_json {
                    json_text(&json!({
                        "dataset": to_json(&b.dataset),
                        "witness": to_json(&LinearWitness::binary(b.witness)?),
                        "target_margin": b.target_margin,
                    }))
                } else {
                    dataset_to_csv(&b.dataset)
                });
            }
            Ok(if as_json {
                json_text(&to_json(&gm))
            } else {
                dataset_to_csv(&gm.dataset)
            })
        }
    }
}

fn read_dataset(text: &str, classes: Option<u64>) -> Result<LabeledDataset, CliError> {
    Ok(parse_dataset_csv(text, usize_of(classes))?)
}

pub fn project(a: &ProjectArgs, spec: &Spec, input: &str) -> Out {
    let data = read_dataset(input, spec.u64(a.classes, "L")?)?;
    if let Some(d) = usize_of(spec.u64(a.d.map(|v| v as u64), "d")?) {
        if d != data.dim() {
            return Err(rpmargin::Error::DimensionMismatch {
                expected: d,
                found: data.dim(),
            }
            .into());
        }
    }
    let n = required(usize_of(spec.u64(a.n, "n")?), "n")?;
    let seed = spec.u64(a.seed, "seed")?.unwrap_or(0);
    let r = ProjectionMatrix::sample(n, data.dim(), family(spec, &a.family)?, seed)?;
    Ok(dataset_to_csv(&r.project_dataset(&data)?))
}

fn witness_from_flags(witness: &[String], one_param: bool, data: &LabeledDataset) -> Result<LinearWitness, CliError> {
    let vs: Vec<Vector> = witness
        .iter()
        .map(|w| Ok(Vector::new(parse_coords(w)?)?))
        .collect::<Result<_, CliError>>()?;
    match (vs.len(), one_param) {
        (0, _) => Err(CliError::Usage("missing --witness".into())),
        (1, true) => Ok(LinearWitness::one_param(
            vs.into_iter().next().unwrap(),
            data.classes(),
        )?),
        (_, true) => Ok(LinearWitness::concatenate(&vs)?),
        (1, false) => Ok(LinearWitness::binary(vs.into_iter().next().unwrap())?),
        (_, false) => Ok(LinearWitness::multiclass(vs)?),
    }
}

/// Re-validates a deserialized witness through its constructors.
fn checked_witness(w: LinearWitness) -> Result<LinearWitness, CliError> {
    Ok(match w {
        LinearWitness::Binary(u) => LinearWitness::binary(u)?,
        LinearWitness::Multiclass(us) => LinearWitness::multiclass(us)?,
        LinearWitness::OneParam { u, classes } => LinearWitness::one_param(u, classes)?,
    })
}

pub fn margin(a: &MarginArgs, spec: &Spec, input: &str) -> Out {
    let data = read_dataset(input, spec.u64(a.classes, "L")?)?;
    if spec.flag(a.optimize, "optimize")? {
        let r = optimize_binary_margin(&data)?;
        if !r.separable {
            eprintln!("note: data is not linearly separable through the origin");
        }
        return Ok(if spec.flag(a.json, "json")? {
            json_text(&json!({
                "margin": r.margin,
                "upper_bound": r.upper_bound,
                "direction": to_json(&r.direction),
                "separable": r.separable,
                "converged": r.converged,
                "iterations": r.iterations,
            }))
        } else {
            line(r.margin)
        });
    }
    let w = witness_from_flags(&a.witness, spec.flag(a.one_param, "one_param")?, &data)?;
    Ok(line(witness_margin(&data, &w, kind(spec, &a.kind)?)?))
}

fn trial_config(a: &McArgs, spec: &Spec) -> Result<TrialConfig, CliError> {
    let grid = parse_grid(&spec.string(a.n.clone(), "n")?.unwrap_or_else(|| "30:300:30".into()))?;
    let eps = spec.f64(a.eps, "eps")?.unwrap_or(0.1);
    let trials = usize_of(spec.u64(a.trials, "trials")?).unwrap_or(repro::FIG2_TRIALS);
    let seed = spec.u64(a.seed, "seed")?.unwrap_or(0);
    let mut cfg = TrialConfig::new(grid, eps, trials, seed);
    cfg.family = family(spec, &a.family)?;
    cfg.validate()?;
    Ok(cfg)
}

fn read_pair(text: &str) -> Result<GeneratedPair, CliError> {
    Ok(parse_pair_csv(text)?)
}

/// A pair CSV (its `x` row) or a single row of coordinates.
fn read_vector(text: &str) -> Result<Vector, CliError> {
    if let Ok(p) = parse_pair_csv(text) {
        return Ok(p.x);
    }
    let rows: Vec<&str> = text
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .collect();
    match rows.as_slice() {
        [row] => Ok(Vector::new(parse_coords(row)?)?),
        _ => Err(CliError::Usage("expected one row of coordinates or a pair CSV".into())),
    }
}

fn mc_margin(a: &McMarginArgs, spec: &Spec, input: impl Fn() -> Result<String, CliError>) -> Out {
    let cfg = trial_config(&a.common, spec)?;
    let (data, witness) = match spec.string(a.generated.as_ref().map(|p| p.display().to_string()), "generated")? {
        Some(path) => {
            let text =
                std::fs::read_to_string(&path).map_err(|e| CliError::Runtime(format!("cannot read {path}: {e}")))?;
            let v: Value =
                serde_json::from_str(&text).map_err(|e| CliError::Usage(format!("invalid JSON in {path}: {e}")))?;
            let data: LabeledDataset = serde_json::from_value(v["dataset"].clone())
                .map_err(|e| CliError::Usage(format!("{path}: dataset: {e}")))?;
            let w: LinearWitness = serde_json::from_value(v["witness"].clone())
                .map_err(|e| CliError::Usage(format!("{path}: witness: {e}")))?;
            (data, checked_witness(w)?)
        }
        None => {
            let data = read_dataset(&input()?, spec.u64(a.classes, "L")?)?;
            let w = witness_from_flags(&a.witness, spec.flag(a.one_param, "one_param")?, &data)?;
            (data, w)
        }
    };
    let mode = if spec.flag(a.reoptimize, "reoptimize")? {
        MarginMode::Reoptimize
    } else {
        MarginMode::ProjectedWitness
    };
    let k = kind(spec, &a.kind)?;
    let curve = montecarlo::reject_margin(&data, &witness, &cfg, k, mode)?;
    let series = if k.is_normalised() {
        "normalised_margin"
    } else {
        "unnormalised_margin"
    };
    Ok(curves_to_csv([(series, &curve)]))
}

pub fn mc(what: &McCommand, spec: &Spec, input: impl Fn() -> Result<String, CliError>) -> Out {
    match what {
        McCommand::Angle(a) => {
            let cfg = trial_config(a, spec)?;
            let c = montecarlo::reject_angle(&read_pair(&input()?)?, &cfg)?;
            Ok(curves_to_csv([("angle", &c)]))
        }
        McCommand::Inner(a) => {
            let cfg = trial_config(a, spec)?;
            let c = montecarlo::reject_inner(&read_pair(&input()?)?, &cfg)?;
            Ok(curves_to_csv([("inner", &c)]))
        }
        McCommand::Eq4(a) => {
            let cfg = trial_config(a, spec)?;
            let c = montecarlo::verify_eq4(&read_pair(&input()?)?, &cfg)?;
            Ok(curves_to_csv([("eq4", &c)]))
        }
        McCommand::Norm(a) => {
            let cfg = trial_config(a, spec)?;
            let c = montecarlo::verify_norm_tail(&read_vector(&input()?)?, &cfg)?;
            Ok(curves_to_csv([("norm", &c)]))
        }
        McCommand::Margin(a) => mc_margin(a, spec, input),
        McCommand::Mean(a) => {
            let n = required(usize_of(spec.u64(a.n, "n")?), "n")?;
            let trials = usize_of(spec.u64(a.trials, "trials")?).unwrap_or(10_000);
            let seed = spec.u64(a.seed, "seed")?.unwrap_or(0);
            let pair = read_pair(&input()?)?;
            let (mean, se) = montecarlo::verify_mean(&pair, n, trials, seed, family(spec, &a.family)?)?;
            Ok(format!(
                "n,trials,mean,standard_error,target\n{n},{trials},{},{},{}\n",
                fmt_sig(mean),
                fmt_sig(se),
                fmt_sig(pair.w.dot(&pair.x)?)
            ))
        }
    }
}

pub fn repro(a: &ReproArgs, spec: &Spec) -> Out {
    let figure: Figure = a.figure.parse()?;
    let settings = ReproSettings {
        seed: spec.u64(a.seed, "seed")?.unwrap_or(0),
        trials: usize_of(spec.u64(a.trials, "trials")?),
        family: family(spec, &a.family)?,
    };
    if settings.trials == Some(0) {
        return Err(CliError::Usage("trials must be positive".into()));
    }
    Ok(repro::reproduce(figure, &settings)?)
}
