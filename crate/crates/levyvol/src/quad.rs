//! Adaptive quadrature used for Lévy-measure integrals and oracle checks.

/// Adaptive Simpson with Richardson acceptance on a finite interval.
///
/// Tolerances combine as `|err| <= abs_tol + rel_tol * |integral so far|`.
pub fn adaptive_simpson<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    rel_tol: f64,
    abs_tol: f64,
) -> f64 {
    if a == b {
        return 0.0;
    }
    let fa = f(a);
    let fb = f(b);
    let m = 0.5 * (a + b);
    let fm = f(m);
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    simpson_step(f, a, b, fa, fm, fb, whole, rel_tol, abs_tol, 52)
}

#[allow(clippy::too_many_arguments)]
fn simpson_step<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    rel_tol: f64,
    abs_tol: f64,
    depth: u32,
) -> f64 {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * (abs_tol + rel_tol * (left + right).abs()) {
        return left + right + delta / 15.0;
    }
    let half_abs = 0.5 * abs_tol;
    simpson_step(f, a, m, fa, flm, fm, left, rel_tol, half_abs, depth - 1)
        + simpson_step(f, m, b, fm, frm, fb, right, rel_tol, half_abs, depth - 1)
}

/// Trapezoid rule over uniformly spaced samples.
pub fn trapezoid(values: &[f64], dx: f64) -> f64 {
    if values.len() < 2 {
        return 0.0;
    }
    let inner: f64 = crate::stats::pairwise_sum(&values[1..values.len() - 1]);
    dx * (0.5 * (values[0] + values[values.len() - 1]) + inner)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn simpson_polynomial_exact() {
        let v = adaptive_simpson(&|x: f64| x * x * x, 0.0, 2.0, 1e-12, 0.0);
        assert_relative_eq!(v, 4.0, max_relative = 1e-12);
    }

    #[test]
    fn simpson_gaussian() {
        let v = adaptive_simpson(
            &|x: f64| (-0.5 * x * x).exp(),
            -10.0,
            10.0,
            1e-12,
            1e-300,
        );
        assert_relative_eq!(v, (2.0 * std::f64::consts::PI).sqrt(), max_relative = 1e-10);
    }

    #[test]
    fn simpson_endpoint_derivative_singularity() {
        // integrand with unbounded second derivative at 0, as in the
        // log-substituted Lévy integrals
        let v = adaptive_simpson(&|t: f64| (-4.0 * t.powf(1.6)).exp(), 0.0, 1.0, 1e-11, 0.0);
        let oracle = {
            // fine trapezoid reference
            let n = 4_000_000usize;
            let dx = 1.0 / n as f64;
            let vals: Vec<f64> = (0..=n)
                .map(|i| (-4.0 * (i as f64 * dx).powf(1.6)).exp())
                .collect();
            trapezoid(&vals, dx)
        };
        assert_relative_eq!(v, oracle, max_relative = 1e-8);
    }

    #[test]
    fn trapezoid_linear() {
        let vals: Vec<f64> = (0..=10).map(|i| i as f64).collect();
        assert_relative_eq!(trapezoid(&vals, 0.5), 25.0, max_relative = 1e-14);
    }
}
