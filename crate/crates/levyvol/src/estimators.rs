//! Volatility estimators: truncated realized quadratic variation, bipower
//! variation, threshold policies, the one- and two-step debiased
//! estimators in both their ideal and clamped practical forms, and the
//! characteristic-function comparison estimator.

use crate::error::{Error, Result};
use crate::stats::pairwise_sum;

/// Truncated realized quadratic variation: `sum x_i^2 1{|x_i| <= eps}`.
pub fn trqv(increments: &[f64], eps: f64) -> f64 {
    let kept: Vec<f64> = increments
        .iter()
        .filter(|x| x.abs() <= eps)
        .map(|x| x * x)
        .collect();
    pairwise_sum(&kept)
}

/// Bipower variation `(pi/2) sum_{i>=2} |x_{i-1}| |x_i|`.
pub fn bipower(increments: &[f64]) -> Result<f64> {
    if increments.len() < 2 {
        return Err(Error::EstimatorUndefined(
            "bipower variation needs at least 2 increments".into(),
        ));
    }
    let prods: Vec<f64> = increments
        .windows(2)
        .map(|w| w[0].abs() * w[1].abs())
        .collect();
    Ok(std::f64::consts::FRAC_PI_2 * pairwise_sum(&prods))
}

/// Where the threshold scale constant comes from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum C0Source {
    Fixed(f64),
    /// `c0 = sigma_BV`, the square root of the bipower estimate (default)
    BipowerSd,
    /// `c0 = sigma_BV^2`, the bipower estimate itself
    BipowerVariance,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ThresholdVariant {
    /// `eps = c0 h^beta`
    Power { beta: f64 },
    /// `eps = sqrt((2 - y) sigma^2 h ln(1/h))`
    LogOptimal { y: Option<f64> },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThresholdPolicy {
    pub c0: C0Source,
    pub variant: ThresholdVariant,
}

impl ThresholdPolicy {
    pub fn power(c0: C0Source, beta: f64) -> Self {
        ThresholdPolicy {
            c0,
            variant: ThresholdVariant::Power { beta },
        }
    }

    /// The default policy of the Monte Carlo study: `sigma_BV h^{5/12}`.
    pub fn bipower_five_twelfths() -> Self {
        ThresholdPolicy::power(C0Source::BipowerSd, 5.0 / 12.0)
    }

    pub fn validate(&self) -> Result<()> {
        match self.variant {
            ThresholdVariant::Power { beta } => {
                if !(beta > 0.0 && beta < 0.5) {
                    return Err(Error::InvalidConfig(format!(
                        "power threshold needs beta in (0, 1/2), got {beta}"
                    )));
                }
            }
            ThresholdVariant::LogOptimal { .. } => {}
        }
        if let C0Source::Fixed(c0) = self.c0 {
            if !(c0 > 0.0) {
                return Err(Error::InvalidConfig(format!("fixed c0 must be > 0, got {c0}")));
            }
        }
        Ok(())
    }
}

/// Resolve a threshold policy on a series with step `h`. `sigma_hint`
/// overrides the bipower-based variance estimate where one is needed.
pub fn threshold(
    policy: &ThresholdPolicy,
    increments: &[f64],
    h: f64,
    sigma_hint: Option<f64>,
) -> Result<f64> {
    policy.validate()?;
    let bipower_var = || -> Result<f64> {
        match sigma_hint {
            Some(v) if v > 0.0 => Ok(v),
            _ => bipower(increments),
        }
    };
    match policy.variant {
        ThresholdVariant::Power { beta } => {
            let c0 = match policy.c0 {
                C0Source::Fixed(c0) => c0,
                C0Source::BipowerSd => bipower_var()?.sqrt(),
                C0Source::BipowerVariance => bipower_var()?,
            };
            Ok(c0 * h.powf(beta))
        }
        ThresholdVariant::LogOptimal { y } => {
            let y = y.ok_or_else(|| {
                Error::InvalidConfig("log_optimal threshold needs the jump index y".into())
            })?;
            let var = bipower_var()?;
            Ok(((2.0 - y) * var * h * (1.0 / h).ln()).sqrt())
        }
    }
}

/// Admissible power-threshold exponent window for the two-step estimator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BetaWindow {
    pub lower: f64,
    pub upper: f64,
    pub nonempty: bool,
    /// y inside the range where the window is meaningful (1 < y < 8/5)
    pub theory_range: bool,
}

pub fn beta_window(y: f64) -> BetaWindow {
    let lower = (1.0 / (4.0 - y)).max(1.0 / (2.0 + y / 2.0));
    let upper = 4.0 / (8.0 + y);
    BetaWindow {
        lower,
        upper,
        nonempty: lower < upper,
        theory_range: y > 1.0 && y < 1.6,
    }
}

/// Tuning constants for the practical clamped estimators.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DebiasConfig {
    pub zeta1: f64,
    pub zeta2: f64,
    pub p1: f64,
    pub p2: f64,
    pub max_fallbacks: u32,
    pub fallback_factor: f64,
    /// disabling the clamps (tests only) also disables the fallback loop
    pub clamp: bool,
}

impl Default for DebiasConfig {
    /// The Monte Carlo study constants: zeta1 1.45, zeta2 1.2, p1 0.6, p2 0.75.
    fn default() -> Self {
        DebiasConfig {
            zeta1: 1.45,
            zeta2: 1.2,
            p1: 0.6,
            p2: 0.75,
            max_fallbacks: 8,
            fallback_factor: 2.0 / 3.0,
            clamp: true,
        }
    }
}

impl DebiasConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.zeta1 > 1.0) || !(self.zeta2 > 1.0) {
            return Err(Error::InvalidConfig(format!(
                "zeta multipliers must be > 1, got zeta1={} zeta2={}",
                self.zeta1, self.zeta2
            )));
        }
        if !(self.p1 > 0.0 && self.p1 < 1.0) && self.p1 != 1.0 {
            return Err(Error::InvalidConfig(format!("p1 must lie in (0, 1], got {}", self.p1)));
        }
        if !(self.p2 > 0.0 && self.p2 < 1.0) && self.p2 != 1.0 {
            return Err(Error::InvalidConfig(format!("p2 must lie in (0, 1], got {}", self.p2)));
        }
        if !(self.fallback_factor > 0.0 && self.fallback_factor < 1.0) {
            return Err(Error::InvalidConfig(format!(
                "fallback factor must lie in (0, 1), got {}",
                self.fallback_factor
            )));
        }
        Ok(())
    }
}

/// Per-estimate diagnostics; always populated.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Diagnostics {
    /// threshold actually used by the final evaluation
    pub epsilon: f64,
    pub fallback_count: u32,
    pub clamped: bool,
    pub degenerate: bool,
    /// fallback budget exhausted; value is the TRQV at the original threshold
    pub exhausted: bool,
    pub eta1: Option<f64>,
    pub eta2: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EstimateResult {
    pub value: f64,
    pub diagnostics: Diagnostics,
}

impl EstimateResult {
    fn plain(value: f64, epsilon: f64) -> Self {
        EstimateResult {
            value,
            diagnostics: Diagnostics {
                epsilon,
                ..Diagnostics::default()
            },
        }
    }
}

/// Ideal one-step debiased estimator:
/// `C(eps) - (C(z eps) - C(eps))^2 / (C(z^2 eps) - 2 C(z eps) + C(eps))`.
///
/// A zero denominator is a degenerate correction and is reported as an
/// error carrying the TRQV fallback.
pub fn debias_ideal_one(increments: &[f64], eps: f64, zeta1: f64) -> Result<EstimateResult> {
    let c0 = trqv(increments, eps);
    let c1 = trqv(increments, zeta1 * eps);
    let c2 = trqv(increments, zeta1 * zeta1 * eps);
    let den = c2 - 2.0 * c1 + c0;
    if den == 0.0 {
        return Err(Error::DegenerateCorrection { fallback: c0 });
    }
    let num = c1 - c0;
    Ok(EstimateResult::plain(c0 - num * num / den, eps))
}

/// Ideal two-step debiased estimator: the one-step construction applied to
/// one-step values at `eps`, `zeta2 eps`, `zeta2^2 eps`. Inner degeneracies
/// fall back to their own TRQV values and flag the result.
pub fn debias_ideal_two(
    increments: &[f64],
    eps: f64,
    zeta2: f64,
    zeta1: f64,
) -> Result<EstimateResult> {
    let mut inner_degenerate = false;
    let mut inner = |e: f64| -> f64 {
        match debias_ideal_one(increments, e, zeta1) {
            Ok(r) => r.value,
            Err(Error::DegenerateCorrection { fallback }) => {
                inner_degenerate = true;
                fallback
            }
            Err(_) => unreachable!("ideal one-step only fails with a degenerate correction"),
        }
    };
    let c0 = inner(eps);
    let c1 = inner(zeta2 * eps);
    let c2 = inner(zeta2 * zeta2 * eps);
    let den = c2 - 2.0 * c1 + c0;
    if den == 0.0 {
        return Err(Error::DegenerateCorrection { fallback: c0 });
    }
    let num = c1 - c0;
    let mut r = EstimateResult::plain(c0 - num * num / den, eps);
    r.diagnostics.degenerate = inner_degenerate;
    Ok(r)
}

/// One evaluation of the clamped one-step estimator at threshold `eps`
/// (no fallback loop).
fn pb_once(increments: &[f64], eps: f64, cfg: &DebiasConfig) -> (f64, f64, bool, bool) {
    let z = cfg.zeta1;
    let p = cfg.p1;
    let den = trqv(increments, p * z * z * eps) - 2.0 * trqv(increments, p * z * eps)
        + trqv(increments, p * eps);
    let num = trqv(increments, p * z * eps) - trqv(increments, p * eps);
    let (eta1, clamped, degenerate) = if den == 0.0 {
        (0.0, true, true)
    } else {
        let raw = num / den;
        if cfg.clamp && raw < 0.0 {
            (0.0, true, false)
        } else {
            (raw, false, false)
        }
    };
    let c = trqv(increments, eps);
    let value = c - eta1 * (trqv(increments, z * eps) - c);
    (value, eta1, clamped, degenerate)
}

/// Practical one-step estimator removing positive bias:
/// `C(eps) - eta1 (C(zeta1 eps) - C(eps))` with `eta1` from the p1-scaled
/// pilot thresholds, clamped at zero from below. A negative estimate
/// re-runs the whole evaluation at `fallback_factor * eps` up to
/// `max_fallbacks` times; exhaustion returns the TRQV at the original
/// threshold, flagged.
pub fn debias_pb(increments: &[f64], eps: f64, cfg: &DebiasConfig) -> EstimateResult {
    let mut e = eps;
    let mut diag = Diagnostics {
        epsilon: eps,
        ..Diagnostics::default()
    };
    let rounds = if cfg.clamp { cfg.max_fallbacks + 1 } else { 1 };
    for round in 0..rounds {
        let (value, eta1, clamped, degenerate) = pb_once(increments, e, cfg);
        diag.epsilon = e;
        diag.eta1 = Some(eta1);
        diag.clamped |= clamped;
        diag.degenerate |= degenerate;
        diag.fallback_count = round;
        if value >= 0.0 || !cfg.clamp {
            return EstimateResult { value, diagnostics: diag };
        }
        e *= cfg.fallback_factor;
    }
    diag.exhausted = true;
    diag.epsilon = eps;
    EstimateResult {
        value: trqv(increments, eps),
        diagnostics: diag,
    }
}

/// One evaluation of the clamped two-step estimator at threshold `eps`.
fn nb_once(increments: &[f64], eps: f64, cfg: &DebiasConfig) -> (f64, f64, bool, bool, Diagnostics) {
    let z2 = cfg.zeta2;
    let p2 = cfg.p2;
    let mut agg = Diagnostics::default();
    let mut first_stage = |e: f64| -> f64 {
        let r = debias_pb(increments, e, cfg);
        agg.clamped |= r.diagnostics.clamped;
        agg.degenerate |= r.diagnostics.degenerate;
        agg.exhausted |= r.diagnostics.exhausted;
        agg.fallback_count += r.diagnostics.fallback_count;
        r.value
    };
    let den = first_stage(p2 * z2 * z2 * eps) - 2.0 * first_stage(p2 * z2 * eps)
        + first_stage(p2 * eps);
    let num = first_stage(p2 * z2 * eps) - first_stage(p2 * eps);
    let (eta2, clamped, degenerate) = if den == 0.0 {
        (0.0, true, true)
    } else {
        let raw = num / den;
        if cfg.clamp && raw > 0.0 {
            (0.0, true, false)
        } else {
            (raw, false, false)
        }
    };
    let base = first_stage(eps);
    let diff = first_stage(z2 * eps) - base;
    let first = if cfg.clamp { diff.max(0.0) } else { diff };
    let value = base - eta2 * first;
    (value, eta2, clamped, degenerate, agg)
}

/// Practical two-step estimator removing negative bias: first-stage values
/// come from [`debias_pb`]; `eta2` is clamped at zero from above and the
/// first-difference factor at zero from below. A negative result re-runs
/// the evaluation at the shrunken threshold with the same budget.
pub fn debias_nb(increments: &[f64], eps: f64, cfg: &DebiasConfig) -> EstimateResult {
    let mut e = eps;
    let mut diag = Diagnostics {
        epsilon: eps,
        ..Diagnostics::default()
    };
    let rounds = if cfg.clamp { cfg.max_fallbacks + 1 } else { 1 };
    for round in 0..rounds {
        let (value, eta2, clamped, degenerate, inner) = nb_once(increments, e, cfg);
        diag.epsilon = e;
        diag.eta2 = Some(eta2);
        diag.clamped |= clamped | inner.clamped;
        diag.degenerate |= degenerate | inner.degenerate;
        diag.fallback_count = round;
        if value >= 0.0 || !cfg.clamp {
            return EstimateResult { value, diagnostics: diag };
        }
        e *= cfg.fallback_factor;
    }
    diag.exhausted = true;
    diag.epsilon = eps;
    EstimateResult {
        value: trqv(increments, eps),
        diagnostics: diag,
    }
}

/// Threshold-difference diagnostic. `raw` is `C(zeta eps) - C(eps)`; given
/// the jump index, `normalized` is `raw / eps^{2-y}`, whose probability
/// limit is `(C+ + C-)(zeta^{2-Y} - 1)/(2 - Y)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RatioDiagnostic {
    pub raw: f64,
    pub normalized: Option<f64>,
}

pub fn ratio_diagnostic(increments: &[f64], eps: f64, zeta: f64, y: Option<f64>) -> RatioDiagnostic {
    let raw = trqv(increments, zeta * eps) - trqv(increments, eps);
    RatioDiagnostic {
        raw,
        normalized: y.map(|y| raw / eps.powf(2.0 - y)),
    }
}

/// Probability limit of the normalized ratio diagnostic.
pub fn ratio_limit(c_plus: f64, c_minus: f64, y: f64, zeta: f64) -> f64 {
    (c_plus + c_minus) / (2.0 - y) * (zeta.powf(2.0 - y) - 1.0)
}

/// Characteristic-function volatility estimator
/// `-(2/u^2) ln((1/n) sum cos(u x_i / sqrt(h)))`.
///
/// A non-positive cosine average means `u` is far too large; by default
/// this is an error rather than a silent `ln |.|`.
pub fn jt_base(increments: &[f64], h: f64, u: f64, ln_abs: bool) -> Result<f64> {
    if !(u > 0.0) {
        return Err(Error::InvalidConfig(format!("frequency u must be > 0, got {u}")));
    }
    let sqrt_h = h.sqrt();
    let terms: Vec<f64> = increments.iter().map(|x| (u * x / sqrt_h).cos()).collect();
    let avg = pairwise_sum(&terms) / increments.len() as f64;
    if avg <= 0.0 {
        if ln_abs {
            if avg == 0.0 {
                return Err(Error::EstimatorUndefined(
                    "cosine average is exactly zero".into(),
                ));
            }
            return Ok(-2.0 / (u * u) * avg.abs().ln());
        }
        return Err(Error::EstimatorUndefined(format!(
            "cosine average {avg} <= 0 at frequency {u}; reduce u"
        )));
    }
    Ok(-2.0 / (u * u) * avg.ln())
}

/// Tuning constants of the characteristic-function comparison estimator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JtConfig {
    pub zeta: f64,
    pub p0: f64,
    /// explicit frequency; `None` derives `u = (ln(1/h))^{-1/30} / sigma_BV`
    pub u: Option<f64>,
    pub ln_abs: bool,
}

impl Default for JtConfig {
    fn default() -> Self {
        JtConfig {
            zeta: 1.5,
            p0: 0.5,
            u: None,
            ln_abs: false,
        }
    }
}

/// Debiased characteristic-function estimator:
/// `C(u) - eta ((C(zeta u) - C(u)) ^ 0)` with `eta` from p0-scaled
/// frequencies clamped at zero from above.
pub fn jt_53(increments: &[f64], h: f64, cfg: &JtConfig) -> Result<EstimateResult> {
    let u = match cfg.u {
        Some(u) => u,
        None => {
            let sbv = bipower(increments)?.sqrt();
            if !(sbv > 0.0) {
                return Err(Error::EstimatorUndefined(
                    "bipower scale is zero; cannot derive the frequency".into(),
                ));
            }
            (1.0 / h).ln().powf(-1.0 / 30.0) / sbv
        }
    };
    let f = |freq: f64| jt_base(increments, h, freq, cfg.ln_abs);
    let base = f(u)?;
    let den = f(cfg.p0 * cfg.zeta * cfg.zeta * u)? - 2.0 * f(cfg.p0 * cfg.zeta * u)?
        + f(cfg.p0 * u)?;
    let num = f(cfg.p0 * cfg.zeta * u)? - f(cfg.p0 * u)?;
    let (eta, clamped, degenerate) = if den == 0.0 {
        (0.0, true, true)
    } else {
        let raw = num / den;
        if raw > 0.0 {
            (0.0, true, false)
        } else {
            (raw, false, false)
        }
    };
    let diff = (f(cfg.zeta * u)? - base).min(0.0);
    Ok(EstimateResult {
        value: base - eta * diff,
        diagnostics: Diagnostics {
            epsilon: u,
            clamped,
            degenerate,
            eta1: Some(eta),
            ..Diagnostics::default()
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::StandardNormal;

    #[test]
    fn trqv_hand_values() {
        let xs = [0.1, -0.2, 0.05];
        assert_relative_eq!(trqv(&xs, 0.1), 0.0125, max_relative = 1e-15);
        assert_relative_eq!(
            trqv(&xs, f64::INFINITY),
            0.01 + 0.04 + 0.0025,
            max_relative = 1e-15
        );
        assert_eq!(trqv(&xs, 0.0), 0.0);
    }

    #[test]
    fn bipower_closed_forms() {
        assert_eq!(bipower(&[0.0; 8]).unwrap(), 0.0);
        let xs = [0.3f64; 10];
        assert_relative_eq!(
            bipower(&xs).unwrap(),
            std::f64::consts::FRAC_PI_2 * 9.0 * 0.09,
            max_relative = 1e-14
        );
        assert!(bipower(&[1.0]).is_err());
    }

    #[test]
    fn bipower_consistent_for_brownian() {
        // sigma = 0.2, n = 19656: mean over 200 paths within 2 SE of 0.04
        let n = 19656;
        let h: f64 = 1.0 / n as f64;
        let mut vals = Vec::new();
        for seed in 0..200u64 {
            let mut rng = ChaCha8Rng::seed_from_u64(1000 + seed);
            let xs: Vec<f64> = (0..n)
                .map(|_| 0.2 * h.sqrt() * rng.sample::<f64, _>(StandardNormal))
                .collect();
            vals.push(bipower(&xs).unwrap());
        }
        let m = crate::stats::mean(&vals);
        let se = crate::stats::sample_sd(&vals) / (vals.len() as f64).sqrt();
        assert!((m - 0.04).abs() < 2.0 * se, "bipower mean {m} (se {se})");
    }

    #[test]
    fn threshold_fixed_power() {
        let h: f64 = 1.0 / 19656.0;
        let pol = ThresholdPolicy::power(C0Source::Fixed(1.0), 5.0 / 12.0);
        let eps = threshold(&pol, &[0.0, 0.0], h, None).unwrap();
        assert_relative_eq!(eps, h.powf(5.0 / 12.0), max_relative = 1e-15);
    }

    #[test]
    fn threshold_log_optimal() {
        let h = 1e-4;
        let pol = ThresholdPolicy {
            c0: C0Source::BipowerSd,
            variant: ThresholdVariant::LogOptimal { y: Some(1.25) },
        };
        let eps = threshold(&pol, &[0.0, 0.0], h, Some(0.04)).unwrap();
        assert_relative_eq!(
            eps,
            (0.75f64 * 0.04 * h * (1.0 / h).ln()).sqrt(),
            max_relative = 1e-14
        );
        let bad = ThresholdPolicy {
            c0: C0Source::BipowerSd,
            variant: ThresholdVariant::LogOptimal { y: None },
        };
        assert!(threshold(&bad, &[0.0, 0.0], h, Some(0.04)).is_err());
    }

    #[test]
    fn beta_window_values() {
        let w = beta_window(1.25);
        assert_relative_eq!(w.lower, 0.38095238095238093, max_relative = 1e-14);
        assert_relative_eq!(w.upper, 0.43243243243243246, max_relative = 1e-14);
        assert!(w.nonempty && w.theory_range);
        assert!(w.lower < 5.0 / 12.0 && 5.0 / 12.0 < w.upper);

        let w15 = beta_window(1.5);
        assert_relative_eq!(w15.lower, 0.4, max_relative = 1e-14);
        assert_relative_eq!(w15.upper, 4.0 / 9.5, max_relative = 1e-14);
        assert!(w15.lower < 5.0 / 12.0 && 5.0 / 12.0 < w15.upper);

        // boundary y = 1.6: empty window, outside theory range
        let w16 = beta_window(1.6);
        assert_relative_eq!(w16.lower, w16.upper, max_relative = 1e-12);
        assert!(!w16.nonempty && !w16.theory_range);

        // y -> 1+: (0.4, 4/9)
        let w1 = beta_window(1.0 + 1e-12);
        assert_relative_eq!(w1.lower, 0.4, max_relative = 1e-9);
        assert_relative_eq!(w1.upper, 4.0 / 9.0, max_relative = 1e-9);
    }

    #[test]
    fn ideal_one_hand_value() {
        let xs = [0.5, 1.5, 2.5];
        let r = debias_ideal_one(&xs, 1.0, 2.0).unwrap();
        assert_relative_eq!(r.value, -1.015625, max_relative = 1e-15);
    }

    #[test]
    fn ideal_one_degenerate_when_saturated() {
        let xs = [0.1, -0.05, 0.02];
        match debias_ideal_one(&xs, 1.0, 2.0) {
            Err(Error::DegenerateCorrection { fallback }) => {
                assert_relative_eq!(fallback, trqv(&xs, 1.0), max_relative = 1e-15);
            }
            other => panic!("expected degenerate correction, got {other:?}"),
        }
    }

    #[test]
    fn ideal_two_saturated_and_zero_numerator() {
        let xs = [0.1, -0.05, 0.02];
        match debias_ideal_two(&xs, 1.0, 1.2, 1.45) {
            Err(Error::DegenerateCorrection { fallback }) => {
                assert_relative_eq!(fallback, trqv(&xs, 1.0), max_relative = 1e-15);
            }
            other => panic!("expected degenerate correction, got {other:?}"),
        }
        // zero numerator with nonzero denominator: result is the inner value
        // choose eps so that C'(eps) == C'(z2 eps) but C'(z2^2 eps) differs
        let xs = [0.5, 3.0];
        let eps = 1.0;
        let (z2, z1) = (1.5, 1.1);
        let inner = |e: f64| match debias_ideal_one(&xs, e, z1) {
            Ok(r) => r.value,
            Err(Error::DegenerateCorrection { fallback }) => fallback,
            Err(_) => unreachable!(),
        };
        assert_eq!(inner(eps), inner(z2 * eps));
        assert_ne!(inner(eps), inner(z2 * z2 * eps));
        let r = debias_ideal_two(&xs, eps, z2, z1).unwrap();
        assert_relative_eq!(r.value, inner(eps), max_relative = 1e-15);
    }

    #[test]
    fn pb_clamp_and_fallback_trace() {
        // p1 = 1, no clamp triggered on the first round; the raw value is
        // the ideal formula restructured as the eta product, then negative,
        // so the fallback shrinks the threshold
        let xs = [0.5, 1.5, 2.5];
        let cfg = DebiasConfig {
            p1: 1.0,
            zeta1: 2.0,
            ..DebiasConfig::default()
        };
        let r = debias_pb(&xs, 1.0, &cfg);
        // after one shrink (eps = 2/3) the pilot numerator is zero, so
        // eta1 = 0 and the estimate settles at trqv(2/3) = 0.25
        assert_relative_eq!(r.value, 0.25, max_relative = 1e-15);
        assert_eq!(r.diagnostics.fallback_count, 1);
        assert!(!r.diagnostics.exhausted);
        // raw single evaluation matches the ideal value
        let raw = DebiasConfig {
            p1: 1.0,
            zeta1: 2.0,
            clamp: false,
            ..DebiasConfig::default()
        };
        let r = debias_pb(&xs, 1.0, &raw);
        assert_relative_eq!(r.value, -1.015625, max_relative = 1e-15);
    }

    #[test]
    fn pb_negative_pilot_ratio_clamps_to_trqv() {
        // increments arranged so the pilot second difference is negative
        let xs = [0.5, 0.55, 0.6, 1.1, 1.15, 3.0];
        let cfg = DebiasConfig {
            p1: 1.0,
            zeta1: 2.0,
            ..DebiasConfig::default()
        };
        // pilot at eps=1: C(1)=.5^2+.55^2+.6^2, C(2)=..+1.1^2+1.15^2, C(4)=..+9
        let c0 = trqv(&xs, 1.0);
        let c1 = trqv(&xs, 2.0);
        let c2 = trqv(&xs, 4.0);
        assert!(c2 - 2.0 * c1 + c0 > 0.0 || c2 - 2.0 * c1 + c0 < 0.0);
        let r = debias_pb(&xs, 1.0, &cfg);
        if c2 - 2.0 * c1 + c0 < 0.0 {
            assert_eq!(r.value, c0);
            assert!(r.diagnostics.clamped);
            assert_eq!(r.diagnostics.eta1, Some(0.0));
        }
    }

    #[test]
    fn nb_clamp_cases() {
        // eta2 pilot ratio positive -> eta2 = 0 -> result = first-stage value
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let xs: Vec<f64> = (0..4000).map(|_| rng.sample::<f64, _>(StandardNormal) * 0.01).collect();
        let cfg = DebiasConfig::default();
        let eps = 0.025;
        let r = debias_nb(&xs, eps, &cfg);
        let first = debias_pb(&xs, eps, &cfg);
        if r.diagnostics.eta2 == Some(0.0) {
            assert_relative_eq!(r.value, first.value, max_relative = 1e-12);
        }
        // saturated series: everything collapses to the realized QV
        let sat = [0.1, -0.2, 0.15];
        let r = debias_nb(&sat, 10.0, &cfg);
        assert_relative_eq!(r.value, trqv(&sat, 10.0), max_relative = 1e-15);
        assert!(r.diagnostics.degenerate);
        let rp = debias_pb(&sat, 10.0, &cfg);
        assert_relative_eq!(rp.value, trqv(&sat, 10.0), max_relative = 1e-15);
    }

    #[test]
    fn ratio_diagnostic_basics() {
        let xs = [0.1, -0.2, 0.15];
        let r = ratio_diagnostic(&xs, 10.0, 1.45, Some(1.5));
        assert_eq!(r.raw, 0.0);
        assert_eq!(r.normalized, Some(0.0));
        let r = ratio_diagnostic(&xs, 0.12, 1.0 + 1e-12, None);
        assert!(r.raw.abs() < 1e-12);
        // frozen fixture for the probability limit
        assert_relative_eq!(
            ratio_limit(0.028, 0.028, 1.5, 1.45),
            0.022865859282473709,
            max_relative = 1e-12
        );
    }

    #[test]
    fn jt_base_gaussian() {
        // all increments zero
        assert_eq!(jt_base(&[0.0; 16], 0.01, 1.0, false).unwrap(), 0.0);
        // gaussian-only data: population value sigma^2, u-independent
        let n = 19656;
        let h: f64 = 1.0 / n as f64;
        let mut vals = vec![];
        for seed in 0..200u64 {
            let mut rng = ChaCha8Rng::seed_from_u64(3000 + seed);
            let xs: Vec<f64> = (0..n)
                .map(|_| 0.2 * h.sqrt() * rng.sample::<f64, _>(StandardNormal))
                .collect();
            vals.push(jt_base(&xs, h, 1.0, false).unwrap());
        }
        let m = crate::stats::mean(&vals);
        let se = crate::stats::sample_sd(&vals) / (vals.len() as f64).sqrt();
        assert!((m - 0.04).abs() < 3.0 * se, "jt mean {m} (se {se})");

        // spread across frequencies within MC error for one path
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        let xs: Vec<f64> = (0..n)
            .map(|_| 0.2 * h.sqrt() * rng.sample::<f64, _>(StandardNormal))
            .collect();
        let v05 = jt_base(&xs, h, 0.5, false).unwrap();
        let v2 = jt_base(&xs, h, 2.0, false).unwrap();
        assert!((v05 - v2).abs() < 5e-3);
    }

    #[test]
    fn jt_base_rejects_nonpositive_average() {
        // one huge frequency forces the cosine average near zero crossings
        let xs = [1.0, 1.0, 1.0];
        let h = 1.0;
        // cos(pi) = -1 < 0
        let r = jt_base(&xs, h, std::f64::consts::PI, false);
        assert!(matches!(r, Err(Error::EstimatorUndefined(_))));
        let v = jt_base(&xs, h, std::f64::consts::PI, true).unwrap();
        assert!(v.is_finite());
    }

    #[test]
    fn jt53_gaussian_close_to_sigma2() {
        let n = 19656;
        let h: f64 = 1.0 / n as f64;
        let mut rng = ChaCha8Rng::seed_from_u64(2024);
        let xs: Vec<f64> = (0..n)
            .map(|_| 0.2 * h.sqrt() * rng.sample::<f64, _>(StandardNormal))
            .collect();
        let r = jt_53(&xs, h, &JtConfig::default()).unwrap();
        assert!((r.value - 0.04).abs() < 3e-3, "jt53 {}", r.value);
    }

    proptest! {
        /// TRQV monotone in the threshold, exactly
        #[test]
        fn trqv_monotone(xs in proptest::collection::vec(-1.0f64..1.0, 1..200),
                         e1 in 0.0f64..1.5, scale in 1.0f64..4.0) {
            let e2 = e1 * scale;
            prop_assert!(trqv(&xs, e2) >= trqv(&xs, e1));
        }

        /// debias identity: clamps off and p1 = 1 reproduces the ideal
        /// one-step estimator to 1e-12 relative
        #[test]
        fn pb_equals_ideal_when_unclamped(seed in 0u64..400) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let xs: Vec<f64> = (0..300).map(|_| rng.sample::<f64,_>(StandardNormal) * 0.3).collect();
            let eps = 0.2 + rng.random::<f64>() * 0.3;
            let zeta1 = 1.2 + rng.random::<f64>();
            let cfg = DebiasConfig { p1: 1.0, zeta1, clamp: false, ..DebiasConfig::default() };
            let pb = debias_pb(&xs, eps, &cfg);
            match debias_ideal_one(&xs, eps, zeta1) {
                Ok(ideal) => {
                    let denom = ideal.value.abs().max(1e-300);
                    prop_assert!(((pb.value - ideal.value) / denom).abs() < 1e-12);
                }
                Err(Error::DegenerateCorrection { .. }) => {
                    // unclamped pb divides by zero here; both routes agree the
                    // correction is degenerate
                    prop_assert!(pb.value.is_nan() || pb.value.is_infinite() || pb.diagnostics.degenerate);
                }
                Err(_) => prop_assert!(false),
            }
        }

        /// scale equivariance: scaling increments and threshold by lambda
        /// multiplies quadratic estimators by lambda^2; jt is invariant
        /// under (x, u) -> (lambda x, u / lambda)
        #[test]
        fn scale_equivariance(seed in 0u64..200, lambda in 0.1f64..10.0) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let xs: Vec<f64> = (0..200).map(|_| rng.sample::<f64,_>(StandardNormal) * 0.05).collect();
            let ys: Vec<f64> = xs.iter().map(|x| x * lambda).collect();
            let eps = 0.04;
            let l2 = lambda * lambda;
            prop_assert!((trqv(&ys, lambda * eps) - l2 * trqv(&xs, eps)).abs() <= 1e-12 * l2 * trqv(&xs, eps).max(1e-30));
            let b1 = bipower(&xs).unwrap();
            let b2 = bipower(&ys).unwrap();
            prop_assert!(((b2 - l2 * b1) / (l2 * b1)).abs() < 1e-12);
            let cfg = DebiasConfig::default();
            let r1 = debias_nb(&xs, eps, &cfg);
            let r2 = debias_nb(&ys, lambda * eps, &cfg);
            prop_assert!(((r2.value - l2 * r1.value) / (l2 * r1.value.abs()).max(1e-300)).abs() < 1e-9);
            let h = 1.0 / xs.len() as f64;
            let u = 0.7;
            let j1 = jt_base(&xs, h, u, false);
            let j2 = jt_base(&ys, h, u / lambda, false);
            if let (Ok(j1), Ok(j2)) = (j1, j2) {
                prop_assert!(((j2 - l2 * j1) / (l2 * j1.abs()).max(1e-300)).abs() < 1e-9);
            }
        }

        /// clamp directions: eta1 >= 0, eta2 <= 0, fallback count within budget
        #[test]
        fn clamp_directions(seed in 0u64..300) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let n = 200 + (seed as usize % 300);
            let xs: Vec<f64> = (0..n).map(|_| {
                let g: f64 = rng.sample(StandardNormal);
                let spike: f64 = if rng.random::<f64>() < 0.03 { rng.sample::<f64,_>(StandardNormal) * 10.0 } else { 0.0 };
                0.01 * g + 0.05 * spike
            }).collect();
            let cfg = DebiasConfig::default();
            let eps = 0.02;
            let pb = debias_pb(&xs, eps, &cfg);
            prop_assert!(pb.diagnostics.eta1.unwrap() >= 0.0);
            prop_assert!(pb.diagnostics.fallback_count <= cfg.max_fallbacks);
            prop_assert!(pb.value >= 0.0);
            let nb = debias_nb(&xs, eps, &cfg);
            prop_assert!(nb.diagnostics.eta2.unwrap() <= 0.0);
            prop_assert!(nb.diagnostics.fallback_count <= cfg.max_fallbacks);
            prop_assert!(nb.value >= 0.0);
        }

        /// saturation: when nothing exceeds the threshold, every estimator
        /// collapses to the realized QV with flags
        #[test]
        fn estimator_ordering_under_saturation(xs in proptest::collection::vec(-0.5f64..0.5, 3..50)) {
            let eps = 1.0;
            let qv = trqv(&xs, f64::INFINITY);
            prop_assert_eq!(trqv(&xs, eps), qv);
            let cfg = DebiasConfig::default();
            let pb = debias_pb(&xs, eps, &cfg);
            prop_assert_eq!(pb.value, qv);
            prop_assert!(pb.diagnostics.degenerate);
            let nb = debias_nb(&xs, eps, &cfg);
            prop_assert_eq!(nb.value, qv);
        }
    }
}
