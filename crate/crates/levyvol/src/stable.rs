//! Exact sampling of strictly stable laws (Chambers-Mallows-Stuck) and the
//! power-tail series of the stable density used to extend FFT grids.

use rand::Rng;

use crate::model::StableParams;

/// One draw from the standard strictly stable law with index `alpha` in
/// (1, 2) and skewness `beta` in the parameterization whose characteristic
/// function is `exp(-|u|^alpha (1 - i beta sgn(u) tan(pi alpha / 2)))`.
///
/// Scale and time enter through `x * scale * t^{1/alpha}`.
pub fn sample_standard_stable<R: Rng + ?Sized>(alpha: f64, beta: f64, rng: &mut R) -> f64 {
    debug_assert!(alpha > 1.0 && alpha < 2.0);
    debug_assert!((-1.0..=1.0).contains(&beta));
    let half_pi = std::f64::consts::FRAC_PI_2;
    let tan_half = (half_pi * alpha).tan();
    let b = (beta * tan_half).atan() / alpha;
    let s = (1.0 + beta * beta * tan_half * tan_half).powf(0.5 / alpha);

    // U uniform on (-pi/2, pi/2), W standard exponential
    let u = (rng.random::<f64>() - 0.5) * std::f64::consts::PI;
    let w = -(1.0 - rng.random::<f64>()).ln();

    let aub = alpha * (u + b);
    s * aub.sin() / u.cos().powf(1.0 / alpha)
        * (((u - aub).cos()) / w).powf((1.0 - alpha) / alpha)
}

/// Exact draw of `S_t` for the strictly stable process with parameters `p`,
/// using self-similarity `S_t =d= t^{1/Y} S_1`.
pub fn sample_stable<R: Rng + ?Sized>(p: &StableParams, t: f64, rng: &mut R) -> f64 {
    p.scale * t.powf(1.0 / p.y) * sample_standard_stable(p.y, p.skewness, rng)
}

/// Coefficients of the far-tail expansion of the stable density of `S_t`:
/// `p(x) ~ sum_k coeff_k |x|^{-kY-1}` for large `|x|`, one coefficient
/// vector per side. The k = 1 coefficient equals `t C+` (resp. `t C-`),
/// which unit tests pin against the Lévy constants.
#[derive(Debug, Clone)]
pub struct StableTailSeries {
    pub y: f64,
    pub pos: Vec<f64>,
    pub neg: Vec<f64>,
}

impl StableTailSeries {
    pub fn build(p: &StableParams, t: f64, kmax: usize) -> Self {
        let y = p.y;
        let a = p.scale.powf(y);
        let rt = p.skewness * (std::f64::consts::PI * y / 2.0).tan();
        let mut pos = Vec::with_capacity(kmax);
        let mut neg = Vec::with_capacity(kmax);
        let base_pos = num_complex::Complex64::new(-a, a * rt);
        let base_neg = num_complex::Complex64::new(-a, -a * rt);
        let mut pow_pos = num_complex::Complex64::new(1.0, 0.0);
        let mut pow_neg = pow_pos;
        let mut factorial = 1.0;
        let mut tk = 1.0;
        for k in 1..=kmax {
            pow_pos *= base_pos;
            pow_neg *= base_neg;
            factorial *= k as f64;
            tk *= t;
            let gk = statrs::function::gamma::gamma(k as f64 * y + 1.0);
            let phase = num_complex::Complex64::from_polar(
                1.0,
                -std::f64::consts::PI * (k as f64 * y + 1.0) / 2.0,
            );
            pos.push(gk / (std::f64::consts::PI * factorial) * (pow_pos * phase).re * tk);
            neg.push(gk / (std::f64::consts::PI * factorial) * (pow_neg * phase).re * tk);
        }
        StableTailSeries { y, pos, neg }
    }

    fn coeffs(&self, positive_side: bool) -> &[f64] {
        if positive_side {
            &self.pos
        } else {
            &self.neg
        }
    }

    /// Density value at `x` (|x| large) together with a truncation-error
    /// estimate. The asymptotic series is summed to its smallest term.
    pub fn density(&self, x: f64) -> (f64, f64) {
        let coeffs = self.coeffs(x > 0.0);
        let z = x.abs();
        let mut value = 0.0;
        let mut last = f64::INFINITY;
        for (k, c) in coeffs.iter().enumerate() {
            let term = c * z.powf(-((k as f64 + 1.0) * self.y) - 1.0);
            if term.abs() >= last {
                return (value, term.abs());
            }
            value += term;
            last = term.abs();
        }
        (value, last)
    }

    /// `int_{z}^{oo} p` on the given side (`z > 0` measures distance from 0),
    /// with a truncation-error estimate.
    pub fn tail_prob(&self, z: f64, positive_side: bool) -> (f64, f64) {
        self.tail_power_integral(z, positive_side, 0)
    }

    /// `int_{z}^{oo} u^{m} p(sgn * u) du` for m below the convergence order;
    /// divergent requests return an error estimate of infinity.
    pub fn tail_power_integral(&self, z: f64, positive_side: bool, m: u32) -> (f64, f64) {
        let coeffs = self.coeffs(positive_side);
        let mut value = 0.0;
        let mut last = f64::INFINITY;
        for (k, c) in coeffs.iter().enumerate() {
            let e = m as f64 - ((k as f64 + 1.0) * self.y);
            if e >= 0.0 {
                return (f64::NAN, f64::INFINITY);
            }
            let term = -c * z.powf(e) / e;
            if term.abs() >= last {
                return (value, term.abs());
            }
            value += term;
            last = term.abs();
        }
        (value, last)
    }

    /// Definite integral `int_a^b u^{2k} p(u) du` for an interval contained
    /// in one tail (`0 < a < b`, side by sign convention of the caller).
    pub fn moment_integral(&self, a: f64, b: f64, positive_side: bool, two_k: u32) -> f64 {
        let coeffs = self.coeffs(positive_side);
        let mut value = 0.0;
        let mut last = f64::INFINITY;
        for (j, c) in coeffs.iter().enumerate() {
            let e = two_k as f64 - ((j as f64 + 1.0) * self.y);
            let term = if e.abs() < 1e-9 {
                c * (b / a).ln()
            } else {
                c * (b.powf(e) - a.powf(e)) / e
            };
            if term.abs() >= last {
                break;
            }
            value += term;
            last = term.abs();
        }
        value
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{derive_stable_params, stable_char_exponent, LevyModelSpec};
    use approx::assert_relative_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn tail_series_leading_coefficient_is_levy_constant() {
        for (cp, cm, y) in [(0.028, 0.028, 1.5), (0.015, 0.041, 1.25), (0.3, 0.3, 1.25)] {
            let m = LevyModelSpec::pure_stable(0.0, cp, cm, y);
            let p = derive_stable_params(&m).unwrap();
            let s = StableTailSeries::build(&p, 1.0, 4);
            assert_relative_eq!(s.pos[0], cp, max_relative = 1e-11);
            assert_relative_eq!(s.neg[0], cm, max_relative = 1e-11);
            // t-scaling multiplies coefficient k by t^k
            let s2 = StableTailSeries::build(&p, 0.01, 3);
            assert_relative_eq!(s2.pos[0], 0.01 * cp, max_relative = 1e-11);
            assert_relative_eq!(s2.pos[1], 1e-4 * s.pos[1], max_relative = 1e-11);
        }
    }

    #[test]
    fn tail_series_fixture_unit_scale() {
        // Y=1.25, scale 1, rho 0.3: frozen from arbitrary-precision runs
        let p = StableParams::new(1.25, 1.0, 0.3).unwrap();
        let s = StableTailSeries::build(&p, 1.0, 6);
        let (v, err) = s.density(12.0);
        assert_relative_eq!(v, 0.00154693017347, max_relative = 1e-9);
        assert!(err < 1e-8 * v.abs() + 1e-12);
    }

    /// characteristic function of CMS draws matches exp(psi) within MC error
    #[test]
    fn cms_matches_char_exponent() {
        let p = StableParams::new(1.5, 1.0, 0.3).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1234);
        let n = 1_000_000usize;
        let u = 1.0;
        let mut sum_re = 0.0;
        let mut sum_im = 0.0;
        let mut sum_re2 = 0.0;
        let mut sum_im2 = 0.0;
        for _ in 0..n {
            let x = sample_stable(&p, 1.0, &mut rng);
            let (s, c) = (u * x).sin_cos();
            sum_re += c;
            sum_im += s;
            sum_re2 += c * c;
            sum_im2 += s * s;
        }
        let nf = n as f64;
        let (m_re, m_im) = (sum_re / nf, sum_im / nf);
        let se_re = ((sum_re2 / nf - m_re * m_re) / nf).sqrt();
        let se_im = ((sum_im2 / nf - m_im * m_im) / nf).sqrt();
        let target = stable_char_exponent(u, &p).exp();
        assert!(
            (m_re - target.re).abs() < 3.0 * se_re,
            "re {m_re} vs {} (se {se_re})",
            target.re
        );
        assert!(
            (m_im - target.im).abs() < 3.0 * se_im,
            "im {m_im} vs {} (se {se_im})",
            target.im
        );
    }

    #[test]
    fn cms_symmetric_median_near_zero() {
        let p = StableParams::new(1.25, 1.0, 0.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let n = 200_000usize;
        let mut pos = 0usize;
        for _ in 0..n {
            if sample_stable(&p, 1.0, &mut rng) > 0.0 {
                pos += 1;
            }
        }
        // sign frequency within 3 binomial SEs of 1/2
        let se = 0.5 / (n as f64).sqrt();
        assert!((pos as f64 / n as f64 - 0.5).abs() < 3.0 * se);
    }

    /// self-similarity: S_t / t^{1/Y} has the law of S_1 (two-sample
    /// Kolmogorov-Smirnov at level 0.01)
    #[test]
    fn cms_time_scaling() {
        let p = StableParams::new(1.4, 0.7, -0.2).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        let n = 20_000usize;
        let t = 0.004;
        let mut a: Vec<f64> = (0..n).map(|_| sample_stable(&p, t, &mut rng) / t.powf(1.0 / 1.4)).collect();
        let mut b: Vec<f64> = (0..n).map(|_| sample_stable(&p, 1.0, &mut rng)).collect();
        a.sort_by(|x, y| x.partial_cmp(y).unwrap());
        b.sort_by(|x, y| x.partial_cmp(y).unwrap());
        // two-sample KS statistic
        let (mut i, mut j, mut d) = (0usize, 0usize, 0.0f64);
        while i < n && j < n {
            if a[i] <= b[j] {
                i += 1;
            } else {
                j += 1;
            }
            let cur = (i as f64 - j as f64).abs() / n as f64;
            d = d.max(cur);
        }
        // critical value at alpha = 0.01 for equal samples
        let crit = 1.628 * (2.0 / n as f64).sqrt();
        assert!(d < crit, "KS statistic {d} above {crit}");
    }
}
