//! Small statistics toolbox: deterministic summation, sample moments,
//! log-log rate fits and an Anderson-Darling normality test.

use statrs::function::erf::erfc;

/// Pairwise (tree) summation. The reduction tree depends only on the slice
/// length, so results are bit-identical across runs and thread counts.
pub fn pairwise_sum(values: &[f64]) -> f64 {
    match values.len() {
        0 => 0.0,
        1 => values[0],
        2 => values[0] + values[1],
        n => {
            let mid = n / 2;
            pairwise_sum(&values[..mid]) + pairwise_sum(&values[mid..])
        }
    }
}

pub fn mean(values: &[f64]) -> f64 {
    pairwise_sum(values) / values.len() as f64
}

/// Sample standard deviation with the n-1 denominator.
pub fn sample_sd(values: &[f64]) -> f64 {
    sample_variance(values).sqrt()
}

pub fn sample_variance(values: &[f64]) -> f64 {
    let n = values.len();
    if n < 2 {
        return 0.0;
    }
    let m = mean(values);
    let sq: Vec<f64> = values.iter().map(|v| (v - m) * (v - m)).collect();
    pairwise_sum(&sq) / (n - 1) as f64
}

/// Median; for even length the average of the two central order statistics.
pub fn median(values: &[f64]) -> f64 {
    assert!(!values.is_empty());
    let mut v = values.to_vec();
    v.sort_by(|a, b| a.partial_cmp(b).expect("non-finite value in median"));
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// Standard normal density.
pub fn norm_pdf(x: f64) -> f64 {
    (-0.5 * x * x).exp() / (2.0 * std::f64::consts::PI).sqrt()
}

/// Standard normal upper tail probability.
pub fn norm_sf(x: f64) -> f64 {
    0.5 * erfc(x / std::f64::consts::SQRT_2)
}

/// Standard normal CDF.
pub fn norm_cdf(x: f64) -> f64 {
    0.5 * erfc(-x / std::f64::consts::SQRT_2)
}

/// Ordinary least squares fit of `y = a + b x`; returns `(b, se_b)`.
pub fn ols_slope(xs: &[f64], ys: &[f64]) -> (f64, f64) {
    assert_eq!(xs.len(), ys.len());
    let n = xs.len();
    assert!(n >= 3, "need at least 3 points for a slope with an SE");
    let xm = mean(xs);
    let ym = mean(ys);
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for (x, y) in xs.iter().zip(ys) {
        sxx += (x - xm) * (x - xm);
        sxy += (x - xm) * (y - ym);
    }
    let slope = sxy / sxx;
    let intercept = ym - slope * xm;
    let mut rss = 0.0;
    for (x, y) in xs.iter().zip(ys) {
        let r = y - intercept - slope * x;
        rss += r * r;
    }
    let se = (rss / (n as f64 - 2.0) / sxx).sqrt();
    (slope, se)
}

/// Fit `log err = a + slope * log h` over positive pairs; returns `(slope, se)`.
pub fn loglog_slope(hs: &[f64], errs: &[f64]) -> (f64, f64) {
    let xs: Vec<f64> = hs.iter().map(|h| h.ln()).collect();
    let ys: Vec<f64> = errs.iter().map(|e| e.abs().max(1e-300).ln()).collect();
    ols_slope(&xs, &ys)
}

/// Anderson-Darling normality statistic with mean and variance estimated
/// from the sample, including the small-sample correction
/// `A*^2 = A^2 (1 + 0.75/n + 2.25/n^2)`.
pub struct AndersonDarling {
    pub a2_star: f64,
    /// true when normality is rejected at the 1% level (critical value 1.035)
    pub reject_at_1pct: bool,
}

pub fn anderson_darling_normal(values: &[f64]) -> AndersonDarling {
    let n = values.len();
    assert!(n >= 8, "Anderson-Darling needs a reasonable sample");
    let mut v = values.to_vec();
    v.sort_by(|a, b| a.partial_cmp(b).expect("non-finite value in AD test"));
    let m = mean(&v);
    let s = sample_sd(&v);
    let nf = n as f64;
    let mut acc = 0.0;
    for i in 0..n {
        let zi = (v[i] - m) / s;
        let zrev = (v[n - 1 - i] - m) / s;
        let u = norm_cdf(zi).clamp(1e-15, 1.0 - 1e-15);
        let urev = norm_cdf(zrev).clamp(1e-15, 1.0 - 1e-15);
        acc += (2.0 * (i as f64 + 1.0) - 1.0) * (u.ln() + (1.0 - urev).ln());
    }
    let a2 = -nf - acc / nf;
    let a2_star = a2 * (1.0 + 0.75 / nf + 2.25 / (nf * nf));
    AndersonDarling {
        a2_star,
        reject_at_1pct: a2_star > 1.035,
    }
}

/// Format with `digits` significant digits, in the style of printf `%g`.
pub fn fmt_sig(x: f64, digits: usize) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let s = format!("{:.*e}", digits.saturating_sub(1), x);
    // split mantissa / exponent
    let (mant, exp) = s.split_once('e').expect("exp format");
    let exp: i32 = exp.parse().expect("exp parse");
    if exp < -4 || exp >= digits as i32 {
        let mant = mant.trim_end_matches('0').trim_end_matches('.');
        format!("{mant}e{exp}")
    } else {
        // plain decimal with the right number of fractional digits
        let frac = (digits as i32 - 1 - exp).max(0) as usize;
        let plain = format!("{:.*}", frac, x);
        if plain.contains('.') {
            plain
                .trim_end_matches('0')
                .trim_end_matches('.')
                .to_string()
        } else {
            plain
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::StandardNormal;

    #[test]
    fn pairwise_matches_naive_on_small() {
        let v = [1.0, 2.0, 3.0, 4.0, 5.5];
        assert_eq!(pairwise_sum(&v), 15.5);
    }

    #[test]
    fn median_even_averages_central_pair() {
        assert_eq!(median(&[4.0, 1.0, 3.0, 2.0]), 2.5);
        assert_eq!(median(&[3.0, 1.0, 2.0]), 2.0);
    }

    #[test]
    fn slope_recovers_power_law() {
        let hs: Vec<f64> = (0..6).map(|i| 1e-3 * 0.5f64.powi(i)).collect();
        let errs: Vec<f64> = hs.iter().map(|h| 3.0 * h.powf(1.75)).collect();
        let (slope, se) = loglog_slope(&hs, &errs);
        assert_relative_eq!(slope, 1.75, max_relative = 1e-10);
        assert!(se < 1e-10);
    }

    #[test]
    fn anderson_darling_accepts_gaussian_rejects_uniform() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let gauss: Vec<f64> = (0..1000).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
        assert!(!anderson_darling_normal(&gauss).reject_at_1pct);
        let unif: Vec<f64> = (0..1000).map(|_| rng.random::<f64>()).collect();
        assert!(anderson_darling_normal(&unif).reject_at_1pct);
    }

    #[test]
    fn normal_functions_agree() {
        assert_relative_eq!(norm_sf(0.0), 0.5, max_relative = 1e-15);
        assert_relative_eq!(norm_sf(1.96), 0.024997895148220435, max_relative = 1e-12);
        assert_relative_eq!(norm_cdf(-1.0) + norm_cdf(1.0), 1.0, max_relative = 1e-14);
    }

    #[test]
    fn fmt_sig_examples() {
        assert_eq!(fmt_sig(0.034962, 6), "0.034962");
        assert_eq!(fmt_sig(2.5381444e-5, 6), "2.53814e-5");
        assert_eq!(fmt_sig(0.0, 6), "0");
        assert_eq!(fmt_sig(-0.1259, 6), "-0.1259");
        assert_eq!(fmt_sig(19656.0, 6), "19656");
    }
}
