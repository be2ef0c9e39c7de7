//! Closed-form concentration bounds, distortion intervals, projected-margin
//! guarantees and minimum projection dimensions for Gaussian random projection.
//!
//! All of the failure probabilities share the exponent
//! `-(n/2)(ε²/2 - ε³/3)`; [`exponent_rate`] returns the bracketed rate and
//! [`SuccessBound`] pairs it with the union-bound count in front of the
//! exponential.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

/// `ε²/2 - ε³/3`.
pub fn exponent_rate(eps: f64) -> f64 {
    eps * eps / 2.0 - eps * eps * eps / 3.0
}

fn check_eps(eps: f64) -> Result<()> {
    if eps > 0.0 && eps < 1.0 {
        Ok(())
    } else {
        Err(invalid(format!("epsilon must lie in (0, 1), got {eps}")))
    }
}

fn check_delta(delta: f64) -> Result<()> {
    if delta > 0.0 && delta < 1.0 {
        Ok(())
    } else {
        Err(invalid(format!("delta must lie in (0, 1), got {delta}")))
    }
}

fn check_gamma(gamma: f64) -> Result<()> {
    if gamma > 0.0 && gamma <= 1.0 {
        Ok(())
    } else {
        Err(invalid(format!("gamma must lie in (0, 1], got {gamma}")))
    }
}

fn check_n(n: u64) -> Result<()> {
    if n == 0 {
        Err(invalid("projection dimension n must be positive"))
    } else {
        Ok(())
    }
}

/// A success probability of the form `1 - count * exp(-(n/2) * rate)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SuccessBound {
    pub count: f64,
    pub rate: f64,
}

impl SuccessBound {
    pub fn new(count: f64, eps: f64) -> Self {
        Self {
            count,
            rate: exponent_rate(eps),
        }
    }

    /// `count * exp(-(n/2) * rate)`, not clamped.
    pub fn failure(&self, n: u64) -> f64 {
        self.count * (-(n as f64) / 2.0 * self.rate).exp()
    }

    /// `max(0, 1 - failure(n))`.
    pub fn success(&self, n: u64) -> f64 {
        (1.0 - self.failure(n)).max(0.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn contains(&self, v: f64) -> bool {
        self.lo <= v && v <= self.hi
    }
}

/// A lower bound on the margin after projection. Negative values are legal:
/// they mean separability is no longer guaranteed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MarginGuarantee {
    pub margin: f64,
    pub separable: bool,
}

impl MarginGuarantee {
    fn new(margin: f64) -> Self {
        Self {
            margin,
            separable: margin > 0.0,
        }
    }
}

/// Two-sided norm concentration: `max(0, 1 - 2 exp(-(n/2)(ε²/2 - ε³/3)))`.
pub fn tail_success_prob(n: u64, eps: f64) -> Result<f64> {
    check_n(n)?;
    check_eps(eps)?;
    Ok(SuccessBound::new(2.0, eps).success(n))
}

/// The two one-sided chi-square tail bounds on `|Rx|²/|x|²`:
/// `(exp(-nε²/4), exp(-(n/2)(ε²/2 - ε³/3)))` for the lower and upper tails.
pub fn chi2_tails(n: u64, eps: f64) -> Result<(f64, f64)> {
    check_n(n)?;
    check_eps(eps)?;
    let n = n as f64;
    Ok(((-n * eps * eps / 4.0).exp(), (-n / 2.0 * exponent_rate(eps)).exp()))
}

/// Interval that contains the projected cosine of an acute pair with cosine
/// `gamma`, and the matching success bound (count 6).
pub fn angle_distortion_interval(gamma: f64, eps: f64) -> Result<(Interval, SuccessBound)> {
    if gamma <= 0.0 {
        return Err(invalid(format!(
            "the distortion interval needs an acute angle (gamma > 0), got {gamma}"
        )));
    }
    check_gamma(gamma)?;
    check_eps(eps)?;
    let lo = (1.0 + eps) / (1.0 - eps) * gamma - 2.0 * eps / (1.0 - eps);
    let hi = 1.0 - (1.0 - eps * eps).sqrt() / (1.0 + eps) + eps / (1.0 + eps) + (1.0 - eps) / (1.0 + eps) * gamma;
    Ok((Interval { lo, hi }, SuccessBound::new(6.0, eps)))
}

/// Least integer `n` with `count * exp(-(n/2) rate) < δ`, i.e. the least
/// integer strictly above `12/(3ε² - 2ε³) ln(count/δ)`.
fn min_dim(eps: f64, delta: f64, count: f64) -> Result<u64> {
    let bound = SuccessBound::new(count, eps);
    let threshold = 12.0 / (3.0 * eps * eps - 2.0 * eps.powi(3)) * (count / delta).ln();
    if threshold >= 2f64.powi(53) {
        return Err(invalid(format!(
            "required dimension {threshold:e} exceeds the representable range"
        )));
    }
    let mut n = if threshold < 0.0 {
        1
    } else {
        threshold.floor() as u64 + 1
    };
    // Align with the failure expression where the ceiling lands within rounding of an integer.
    while n > 1 && bound.failure(n - 1) < delta {
        n -= 1;
    }
    while bound.failure(n) >= delta {
        n += 1;
    }
    Ok(n)
}

fn check_m(m: u64) -> Result<()> {
    if m == 0 {
        Err(invalid("dataset size m must be at least 1"))
    } else {
        Ok(())
    }
}

/// Dimension sufficient for binary margin preservation over `m` points.
pub fn min_dim_binary(eps: f64, delta: f64, m: u64) -> Result<u64> {
    check_eps(eps)?;
    check_delta(delta)?;
    check_m(m)?;
    min_dim(eps, delta, 6.0 * m as f64)
}

/// Dimension sufficient for multiclass margin preservation. `classes = 1` is
/// accepted and reduces to [`min_dim_binary`].
pub fn min_dim_multiclass(eps: f64, delta: f64, m: u64, classes: u64) -> Result<u64> {
    check_eps(eps)?;
    check_delta(delta)?;
    check_m(m)?;
    if classes == 0 {
        return Err(invalid("number of classes must be positive"));
    }
    min_dim(eps, delta, 6.0 * classes as f64 * m as f64)
}

/// Dimension sufficient for the one-parameter method.
pub fn min_dim_oneparam(eps: f64, delta: f64, m: u64, classes: u64) -> Result<u64> {
    check_eps(eps)?;
    check_delta(delta)?;
    check_m(m)?;
    if classes < 2 {
        return Err(invalid(format!("one-parameter method needs L >= 2, got {classes}")));
    }
    min_dim(eps, delta, 6.0 * m as f64 * (classes - 1) as f64)
}

/// `γ - 2ε/(1-ε)`.
pub fn projected_margin_binary(gamma: f64, eps: f64) -> Result<MarginGuarantee> {
    check_gamma(gamma)?;
    check_eps(eps)?;
    Ok(MarginGuarantee::new(gamma - 2.0 * eps / (1.0 - eps)))
}

/// `-(1+3ε)/(1-ε²) + sqrt(1-ε²)/(1+ε) + (1+ε)/(1-ε) γ`.
pub fn projected_margin_multiclass(gamma: f64, eps: f64) -> Result<MarginGuarantee> {
    check_gamma(gamma)?;
    check_eps(eps)?;
    let e2 = 1.0 - eps * eps;
    Ok(MarginGuarantee::new(
        -(1.0 + 3.0 * eps) / e2 + e2.sqrt() / (1.0 + eps) + (1.0 + eps) / (1.0 - eps) * gamma,
    ))
}

/// `-2ε/(1-ε) + (1+ε) γ / (sqrt(2L) (1-ε))`.
pub fn projected_margin_oneparam(gamma: f64, eps: f64, classes: u64) -> Result<MarginGuarantee> {
    check_gamma(gamma)?;
    check_eps(eps)?;
    if classes < 2 {
        return Err(invalid(format!("one-parameter method needs L >= 2, got {classes}")));
    }
    let root = (2.0 * classes as f64).sqrt();
    Ok(MarginGuarantee::new(
        -2.0 * eps / (1.0 - eps) + (1.0 + eps) * gamma / (root * (1.0 - eps)),
    ))
}

/// Error-allowed comparison bound `(c/γ²) ln(1/(ρδ))`.
pub fn balcan_min_dim(gamma: f64, rho: f64, delta: f64, c: f64) -> Result<f64> {
    check_gamma(gamma)?;
    check_delta(delta)?;
    if rho == 0.0 {
        return Err(invalid(
            "rho = 0 diverges: ln(1/(rho*delta)) is infinite, so an error-free margin would need n = +inf",
        ));
    }
    if !(rho > 0.0 && rho < 1.0) {
        return Err(invalid(format!("rho must lie in (0, 1), got {rho}")));
    }
    if !(c > 0.0 && c.is_finite()) {
        return Err(invalid(format!("constant c must be positive, got {c}")));
    }
    Ok(c / (gamma * gamma) * (1.0 / (rho * delta)).ln())
}

/// Parameter record for the closed-form bounds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DistortionParams {
    pub epsilon: f64,
    pub delta: f64,
    pub gamma: f64,
    pub m: u64,
    pub classes: u64,
    pub rho: f64,
    /// Constant of the error-allowed bound; unspecified in its source, default 1.
    pub c: f64,
}

impl Default for DistortionParams {
    fn default() -> Self {
        Self {
            epsilon: 0.1,
            delta: 0.05,
            gamma: 0.5,
            m: 100,
            classes: 2,
            rho: 0.01,
            c: 1.0,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * b.abs().max(1e-300)
    }

    #[test]
    fn tail_examples() {
        // 1 - 2e^{-5.4}
        assert!(close(
            tail_success_prob(300, 0.3).unwrap(),
            0.990_966_838_114_774_7,
            1e-13
        ));
        assert_eq!(tail_success_prob(1, 0.01).unwrap(), 0.0);
        let mut prev = 0.0;
        for n in 1..2000 {
            let p = tail_success_prob(n, 0.2).unwrap();
            assert!(p >= prev);
            prev = p;
        }
        assert!(tail_success_prob(10, 1.0).is_err());
        assert!(tail_success_prob(10, 0.0).is_err());
        assert!(tail_success_prob(0, 0.5).is_err());
    }

    #[test]
    fn chi2_examples() {
        let (lo, hi) = chi2_tails(100, 0.2).unwrap();
        assert!(close(lo, (-1.0f64).exp(), 1e-15));
        assert!(close(hi, 0.420_350_384_508_681_9, 1e-13));
        let (lo2, hi2) = chi2_tails(101, 0.2).unwrap();
        assert!(lo2 < lo && hi2 < hi);
        // The combined two-sided bound uses the weaker (upper) exponent on both sides.
        assert!(lo <= hi);
        assert!(close(
            1.0 - 2.0 * hi,
            tail_success_prob(100, 0.2).unwrap().max(1.0 - 2.0 * hi),
            1e-15
        ));
    }

    #[test]
    fn interval_examples() {
        let (iv, sb) = angle_distortion_interval(0.827, 0.1).unwrap();
        assert!(close(iv.lo, 0.788_555_555_555_555_6, 1e-13));
        assert!(close(iv.hi, 0.863_011_420_812_163_7, 1e-12));
        assert_eq!(sb.count, 6.0);
        assert!(close(sb.failure(300), 6.0 * (-150.0 * exponent_rate(0.1)).exp(), 1e-15));
        for eps in [0.01, 0.3, 0.77] {
            let (iv, _) = angle_distortion_interval(1.0, eps).unwrap();
            assert!((iv.lo - 1.0).abs() < 1e-14);
        }
        assert!(angle_distortion_interval(0.0, 0.1).is_err());
        assert!(angle_distortion_interval(-0.3, 0.1).is_err());
    }

    #[test]
    fn interval_contains_gamma_on_grid() {
        for i in 1..=200 {
            let gamma = i as f64 / 200.0;
            for j in 1..200 {
                let eps = j as f64 / 200.0;
                let (iv, _) = angle_distortion_interval(gamma, eps).unwrap();
                // lo cancels terms of size (1+ε)/(1-ε).
                let tol = 4.0 * f64::EPSILON * (1.0 + eps) / (1.0 - eps);
                assert!(iv.lo <= gamma + tol && gamma <= iv.hi + tol, "γ={gamma} ε={eps}");
                let b = projected_margin_binary(gamma, eps).unwrap().margin;
                assert!(b <= iv.lo + tol);
            }
        }
    }

    #[test]
    fn min_dim_examples() {
        assert_eq!(min_dim_binary(0.1, 0.05, 100).unwrap(), 4026);
        assert_eq!(min_dim_multiclass(0.1, 0.05, 100, 1).unwrap(), 4026);
        assert_eq!(min_dim_multiclass(0.1, 0.05, 100, 3).unwrap(), 4497);
        assert_eq!(min_dim_oneparam(0.1, 0.05, 100, 3).unwrap(), 4323);
        assert_eq!(min_dim_oneparam(0.1, 0.05, 100, 2).unwrap(), 4026);
        assert!(min_dim_oneparam(0.1, 0.05, 100, 1).is_err());
        assert!(min_dim_binary(0.1, 0.0, 100).is_err());
        assert!(min_dim_binary(0.1, 0.05, 0).is_err());
    }

    #[test]
    fn min_dim_monotonicity() {
        let mut prev = u64::MAX;
        for k in 1..50 {
            let n = min_dim_binary(0.2, k as f64 / 50.0, 10).unwrap();
            assert!(n <= prev);
            prev = n;
        }
        let mut prev = 0;
        for m in 1..200 {
            let n = min_dim_binary(0.2, 0.1, m).unwrap();
            assert!(n >= prev);
            prev = n;
        }
        for l in 2..20 {
            assert!(min_dim_multiclass(0.2, 0.1, 30, l).unwrap() <= min_dim_multiclass(0.2, 0.1, 30, l + 1).unwrap());
            assert!(min_dim_oneparam(0.2, 0.1, 30, l).unwrap() <= min_dim_multiclass(0.2, 0.1, 30, l).unwrap());
        }
    }

    #[test]
    fn projected_margin_examples() {
        let b = projected_margin_binary(0.5, 0.1).unwrap();
        assert!(close(b.margin, 0.277_777_777_777_777_8, 1e-14));
        assert!(b.separable);
        let root = projected_margin_binary(0.5, 0.2).unwrap();
        assert!(root.margin.abs() < 1e-15);
        let neg = projected_margin_binary(0.1, 0.3).unwrap();
        assert!(neg.margin < 0.0 && !neg.separable);
        for g in [0.01, 0.5, 1.0] {
            assert!(projected_margin_binary(g, 0.01).unwrap().margin < g);
        }

        let mc = projected_margin_multiclass(0.9, 0.05).unwrap().margin;
        assert!(close(mc, 0.793_044_367_802_820_5, 1e-12));
        assert!((projected_margin_multiclass(0.7, 1e-9).unwrap().margin - 0.7).abs() < 1e-6);
        assert!(
            projected_margin_multiclass(0.6, 0.2).unwrap().margin
                < projected_margin_multiclass(0.61, 0.2).unwrap().margin
        );

        let op = projected_margin_oneparam(0.9, 0.1, 3).unwrap().margin;
        assert!(close(op, 0.226_850_897_288_027_1, 1e-12));
        assert!(projected_margin_oneparam(0.9, 0.1, 4).unwrap().margin < op);
        assert!(projected_margin_oneparam(0.9, 0.1, 1).is_err());
    }

    #[test]
    fn balcan_examples() {
        assert!(close(
            balcan_min_dim(0.5, 0.01, 0.05, 1.0).unwrap(),
            4.0 * 2000f64.ln(),
            1e-15
        ));
        assert!(balcan_min_dim(0.5, 1e-12, 0.05, 1.0).unwrap() > balcan_min_dim(0.5, 0.01, 0.05, 1.0).unwrap());
        let a = balcan_min_dim(0.4, 0.01, 0.05, 1.0).unwrap();
        let b = balcan_min_dim(0.2, 0.01, 0.05, 1.0).unwrap();
        assert!(close(b, 4.0 * a, 1e-14));
        let err = balcan_min_dim(0.5, 0.0, 0.05, 1.0).unwrap_err().to_string();
        assert!(err.contains("rho = 0"), "{err}");
        assert!(balcan_min_dim(0.5, 0.01, 0.05, 0.0).is_err());
    }
}
