//! Text formats: rejection curves and counter-example tables as CSV with
//! 12 significant digits, and lossless CSV for datasets, pairs and matrices.
//!
//! All rendering is locale-free (`.` decimal separator, no grouping).

use std::fmt::Write as _;

use crate::datasets::GeneratedPair;
use crate::error::{invalid, Error, Result};
use crate::margin::{Flavor, LabeledDataset};
use crate::montecarlo::{CurvePoint, RejectionCurve};
use crate::projection::ProjectionMatrix;
use crate::vector::Vector;

pub const CURVE_HEADER: &str = "series,n,epsilon,trials,rejections,p_hat,ci_lo,ci_hi,theory_bound";
pub const COUNTEREXAMPLE_HEADER: &str = "s,analytic_prob,mc_prob,mc_trials";

/// `x` with 12 significant digits in the style of C's `%.12g`.
pub fn fmt_sig(x: f64) -> String {
    const P: i32 = 12;
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return if x.is_sign_negative() { "-0".into() } else { "0".into() };
    }
    let sci = format!("{:.*e}", (P - 1) as usize, x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent form");
    let exp: i32 = exp.parse().expect("integer exponent");
    if !(-4..P).contains(&exp) {
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{}e{sign}{:02}", trim_zeros(mantissa), exp.abs())
    } else {
        trim_zeros(&format!("{:.*}", (P - 1 - exp) as usize, x)).to_string()
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

/// Shortest representation that parses back to the same `f64`.
pub fn fmt_exact(x: f64) -> String {
    format!("{x:?}")
}

fn push_curve_rows(out: &mut String, series: &str, curve: &RejectionCurve) {
    for p in &curve.points {
        let _ = writeln!(
            out,
            "{series},{},{},{},{},{},{},{},{}",
            p.n,
            fmt_sig(curve.epsilon),
            p.trials,
            p.rejections,
            fmt_sig(p.p_hat),
            fmt_sig(p.ci_lo),
            fmt_sig(p.ci_hi),
            p.theory_bound.map(fmt_sig).unwrap_or_default()
        );
    }
}

/// Curves in the curve schema, one row per (series, n), header included.
pub fn curves_to_csv<'a>(series: impl IntoIterator<Item = (&'a str, &'a RejectionCurve)>) -> String {
    let mut out = format!("{CURVE_HEADER}\n");
    for (name, curve) in series {
        push_curve_rows(&mut out, name, curve);
    }
    out
}

/// One row of the counter-example table.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeparabilityRow {
    pub s: f64,
    pub analytic_prob: f64,
    pub mc_prob: f64,
    pub mc_trials: usize,
}

pub fn separability_to_csv(rows: &[SeparabilityRow]) -> String {
    let mut out = format!("{COUNTEREXAMPLE_HEADER}\n");
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{}",
            fmt_sig(r.s),
            fmt_sig(r.analytic_prob),
            fmt_sig(r.mc_prob),
            r.mc_trials
        );
    }
    out
}

fn data_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
}

fn parse_f64(field: &str, line: usize) -> Result<f64> {
    field
        .trim()
        .parse::<f64>()
        .map_err(|_| invalid(format!("line {line}: '{}' is not a number", field.trim())))
}

fn parse_row(fields: &[&str], line: usize) -> Result<Vec<f64>> {
    fields.iter().map(|f| parse_f64(f, line)).collect()
}

/// Parses curve CSV back into named curves, in order of first appearance.
pub fn parse_curves_csv(text: &str) -> Result<Vec<(String, RejectionCurve)>> {
    let mut lines = data_lines(text);
    match lines.next() {
        Some((_, h)) if h == CURVE_HEADER => {}
        _ => return Err(invalid(format!("missing curve header '{CURVE_HEADER}'"))),
    }
    let mut out: Vec<(String, RejectionCurve)> = Vec::new();
    for (line, l) in lines {
        let f: Vec<&str> = l.split(',').collect();
        if f.len() != 9 {
            return Err(invalid(format!("line {line}: expected 9 fields, found {}", f.len())));
        }
        let int = |s: &str| {
            s.trim()
                .parse::<usize>()
                .map_err(|_| invalid(format!("line {line}: '{s}' is not a count")))
        };
        let eps = parse_f64(f[2], line)?;
        let point = CurvePoint {
            n: int(f[1])?,
            trials: int(f[3])?,
            rejections: int(f[4])?,
            p_hat: parse_f64(f[5], line)?,
            ci_lo: parse_f64(f[6], line)?,
            ci_hi: parse_f64(f[7], line)?,
            theory_bound: if f[8].trim().is_empty() {
                None
            } else {
                Some(parse_f64(f[8], line)?)
            },
        };
        match out.iter_mut().find(|(s, c)| s == f[0] && c.epsilon == eps) {
            Some((_, c)) => c.points.push(point),
            None => out.push((
                f[0].to_string(),
                RejectionCurve {
                    epsilon: eps,
                    points: vec![point],
                },
            )),
        }
    }
    Ok(out)
}

/// One point per row: `label,coord_1,...,coord_d`.
pub fn dataset_to_csv(data: &LabeledDataset) -> String {
    let mut out = String::new();
    for (x, y) in data.iter() {
        let _ = write!(out, "{y}");
        for v in x.as_slice() {
            let _ = write!(out, ",{}", fmt_exact(*v));
        }
        out.push('\n');
    }
    out
}

/// Parses dataset CSV. Without an explicit class count, labels all in
/// {-1, +1} give a binary dataset and anything else a multiclass dataset with
/// `L` equal to the largest label.
pub fn parse_dataset_csv(text: &str, classes: Option<usize>) -> Result<LabeledDataset> {
    let mut points = Vec::new();
    let mut labels = Vec::new();
    let mut dim = None;
    for (line, l) in data_lines(text) {
        let f: Vec<&str> = l.split(',').collect();
        if f.len() < 2 {
            return Err(invalid(format!(
                "line {line}: expected a label and at least one coordinate"
            )));
        }
        let label: i64 = f[0]
            .trim()
            .parse()
            .map_err(|_| invalid(format!("line {line}: label '{}' is not an integer", f[0].trim())))?;
        let coords = parse_row(&f[1..], line)?;
        match dim {
            None => dim = Some(coords.len()),
            Some(d) if d != coords.len() => {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    found: coords.len(),
                })
            }
            _ => {}
        }
        points.push(Vector::new(coords)?);
        labels.push(label);
    }
    if points.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let flavor = match classes {
        Some(l) => Flavor::Multiclass(l),
        None if labels.iter().all(|&y| y == 1 || y == -1) => Flavor::Binary,
        None => Flavor::Multiclass(labels.iter().copied().max().unwrap_or(0).max(0) as usize),
    };
    LabeledDataset::new(points, labels, flavor)
}

/// Two rows, `w,...` and `x,...`.
pub fn pair_to_csv(pair: &GeneratedPair) -> String {
    let row = |tag: &str, v: &Vector| {
        let mut s = tag.to_string();
        for x in v.as_slice() {
            let _ = write!(s, ",{}", fmt_exact(*x));
        }
        s
    };
    format!("{}\n{}\n", row("w", &pair.w), row("x", &pair.x))
}

pub fn parse_pair_csv(text: &str) -> Result<GeneratedPair> {
    let (mut w, mut x) = (None, None);
    for (line, l) in data_lines(text) {
        let f: Vec<&str> = l.split(',').collect();
        let v = Vector::new(parse_row(&f[1..], line)?)?;
        match f[0].trim() {
            "w" if w.is_none() => w = Some(v),
            "x" if x.is_none() => x = Some(v),
            other => return Err(invalid(format!("line {line}: unexpected row tag '{other}'"))),
        }
    }
    match (w, x) {
        (Some(w), Some(x)) => {
            x.check_dim(w.dim())?;
            GeneratedPair::from_vectors(w, x)
        }
        _ => Err(invalid("pair CSV needs one 'w' row and one 'x' row")),
    }
}

/// Row-major matrix, one row per line.
pub fn matrix_to_csv(r: &ProjectionMatrix) -> String {
    let mut out = String::new();
    for row in r.entries().chunks(r.cols()) {
        let cells: Vec<String> = row.iter().map(|v| fmt_exact(*v)).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}

pub fn parse_matrix_csv(text: &str) -> Result<ProjectionMatrix> {
    let mut data = Vec::new();
    let mut cols = None;
    let mut rows = 0;
    for (line, l) in data_lines(text) {
        let f: Vec<&str> = l.split(',').collect();
        let row = parse_row(&f, line)?;
        match cols {
            None => cols = Some(row.len()),
            Some(c) if c != row.len() => {
                return Err(Error::DimensionMismatch {
                    expected: c,
                    found: row.len(),
                })
            }
            _ => {}
        }
        data.extend(row);
        rows += 1;
    }
    ProjectionMatrix::from_row_major(rows, cols.unwrap_or(0), data)
}
