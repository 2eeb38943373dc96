//! Numeric verification that a jump-density shape function `q` satisfies
//! the regularity conditions the estimator theory rests on.

use crate::error::Result;
use crate::model::LevyModelSpec;
use crate::quad::adaptive_simpson;

/// One verified condition: the computed value and whether it passed.
#[derive(Debug, Clone, Copy)]
pub struct QCheckItem {
    pub value: f64,
    pub pass: bool,
}

/// Report of the five regularity checks on a q-function.
#[derive(Debug, Clone)]
pub struct QCheckReport {
    /// (i) max |q(x) - 1| over the smallest probed decade
    pub limit_at_zero: QCheckItem,
    /// (ii) converged value of int |q(x) - 1 - alpha_sgn x| |x|^{-Y-1} near 0
    pub small_scale_integral: QCheckItem,
    /// (iii) sup |ln q(x)| / |x| on the far grid, tested for non-divergence
    pub log_growth: QCheckItem,
    /// (iv) inf q on |x| <= 1
    pub positivity: QCheckItem,
    /// (v) converged value of int_{|x|>1} q^2 |x|^{-1-Y}
    pub square_tail_integral: QCheckItem,
    /// both linear slopes are (numerically) zero: q is identically 1
    pub degenerate_alpha: bool,
}

impl QCheckReport {
    pub fn all_pass(&self) -> bool {
        self.limit_at_zero.pass
            && self.small_scale_integral.pass
            && self.log_growth.pass
            && self.positivity.pass
            && self.square_tail_integral.pass
    }
}

/// Verify an arbitrary q-function with declared linear slopes `alpha_plus`
/// (x > 0) and `alpha_minus` (x < 0) at the origin.
pub fn validate_q_function(
    q: &dyn Fn(f64) -> f64,
    alpha_plus: f64,
    alpha_minus: f64,
    y: f64,
) -> QCheckReport {
    // (i) q -> 1 at 0: probe the decade [1e-8, 1e-7]
    let mut worst = 0.0f64;
    for i in 0..=16 {
        let x = 1e-8 * 10f64.powf(i as f64 / 16.0);
        worst = worst.max((q(x) - 1.0).abs()).max((q(-x) - 1.0).abs());
    }
    let limit_at_zero = QCheckItem {
        value: worst,
        pass: worst < 1e-3,
    };

    // (ii) int_(0,1] |q - 1 - alpha x| x^{-Y-1} dx both sides, log
    // substituted, with convergence of the lower cutoff as the pass rule
    let side = |lo: f64, positive: bool| -> f64 {
        let alpha = if positive { alpha_plus } else { alpha_minus };
        let f = |s: f64| {
            let x = s.exp();
            let xs = if positive { x } else { -x };
            (q(xs) - 1.0 - alpha * xs).abs() * (-y * s).exp()
        };
        adaptive_simpson(&f, lo.ln(), 0.0, 1e-9, 1e-14)
    };
    let v8 = side(1e-8, true) + side(1e-8, false);
    let v10 = side(1e-10, true) + side(1e-10, false);
    let small_scale_integral = QCheckItem {
        value: v10,
        pass: (v10 - v8).abs() <= 1e-6 * v10.abs().max(1.0),
    };

    // (iii) |ln q| / |x| must not grow along the far grid
    let slope_at = |x: f64| {
        let v = q(x).max(1e-300).ln().abs() / x.abs();
        let w = q(-x).max(1e-300).ln().abs() / x.abs();
        v.max(w)
    };
    let mid = slope_at(10.0).max(slope_at(31.6));
    let far = slope_at(316.0).max(slope_at(1000.0));
    let log_growth = QCheckItem {
        value: far.max(mid),
        pass: far <= 1.2 * mid + 1e-9,
    };

    // (iv) inf q over |x| <= 1
    let mut inf_q = f64::INFINITY;
    for i in 0..=64 {
        let x = -1.0 + 2.0 * i as f64 / 64.0;
        if x != 0.0 {
            inf_q = inf_q.min(q(x));
        }
    }
    let positivity = QCheckItem {
        value: inf_q,
        pass: inf_q > 0.0,
    };

    // (v) int_{|x|>1} q^2 |x|^{-1-Y}: converged upper-cutoff quadrature
    let tail = |hi: f64| -> f64 {
        let f = |s: f64| {
            let x = s.exp();
            (q(x).powi(2) + q(-x).powi(2)) * (-y * s).exp()
        };
        adaptive_simpson(&f, 0.0, hi.ln(), 1e-9, 1e-14)
    };
    let t1 = tail(1e4);
    let t2 = tail(1e6);
    let square_tail_integral = QCheckItem {
        value: t2,
        pass: (t2 - t1).abs() <= 1e-6 * t2.abs().max(1.0) && t2.is_finite(),
    };

    QCheckReport {
        limit_at_zero,
        small_scale_integral,
        log_growth,
        positivity,
        square_tail_integral,
        degenerate_alpha: alpha_plus == 0.0 && alpha_minus == 0.0,
    }
}

/// Verify the tempered shape function of `model`: `q(x) = exp(-m x)` for
/// `x > 0`, `exp(g x)` for `x < 0`, with slopes `alpha+ = -m`, `alpha- = g`.
/// A pure stable model checks `q = 1` and flags the slopes as degenerate.
pub fn validate_assumption_q(model: &LevyModelSpec) -> Result<QCheckReport> {
    model.validate()?;
    let (g, m, y) = (model.g, model.m, model.y);
    let q = move |x: f64| {
        if x > 0.0 {
            (-m * x).exp()
        } else {
            (g * x).exp()
        }
    };
    Ok(validate_q_function(&q, -m, g, y))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cgmy_table_parameters_pass() {
        let m = LevyModelSpec::cgmy(0.2, 0.028, 2.318, 4.025, 1.25);
        let r = validate_assumption_q(&m).unwrap();
        assert!(r.all_pass(), "{r:?}");
        assert!(!r.degenerate_alpha);
        // the log-growth sup is max(G, M)
        assert!((r.log_growth.value - 4.025).abs() < 1e-9);
    }

    #[test]
    fn pure_stable_passes_with_degenerate_slopes() {
        let m = LevyModelSpec::pure_stable(0.2, 0.028, 0.028, 1.5);
        let r = validate_assumption_q(&m).unwrap();
        assert!(r.all_pass(), "{r:?}");
        assert!(r.degenerate_alpha);
        assert_eq!(r.small_scale_integral.value, 0.0);
    }

    #[test]
    fn super_exponential_tail_fails_log_growth() {
        let q = |x: f64| (x * x).exp();
        let r = validate_q_function(&q, 0.0, 0.0, 1.25);
        assert!(!r.log_growth.pass);
    }
}
