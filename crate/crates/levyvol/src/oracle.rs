//! Numeric ground truth for truncated moments and Gaussian-tail
//! functionals of the model laws, independent of the closed-form
//! expansions they are used to validate.

use num_complex::Complex64;

use crate::density::{invert_density, make_stable_density, DensityGrid, GridSpec};
use crate::error::{Error, Result};
use crate::model::{model_char_exponent, LevyModelSpec, StableParams};
use crate::quad::adaptive_simpson;
use crate::stats::norm_sf;

/// A law the oracles can integrate against: Brownian part plus either an
/// exactly stable or a tempered jump part.
#[derive(Debug, Clone, Copy)]
pub enum OracleLaw<'a> {
    GaussStable { sigma: f64, stable: &'a StableParams },
    GaussCgmy { model: &'a LevyModelSpec },
}

impl<'a> OracleLaw<'a> {
    pub fn sigma(&self) -> f64 {
        match self {
            OracleLaw::GaussStable { sigma, .. } => *sigma,
            OracleLaw::GaussCgmy { model } => model.sigma,
        }
    }

    pub fn y(&self) -> f64 {
        match self {
            OracleLaw::GaussStable { stable, .. } => stable.y,
            OracleLaw::GaussCgmy { model } => model.y,
        }
    }

    pub fn c_total(&self) -> f64 {
        match self {
            OracleLaw::GaussStable { stable, .. } => {
                let (cp, cm) = stable.levy_constants();
                cp + cm
            }
            OracleLaw::GaussCgmy { model } => model.c_total(),
        }
    }

    fn jump_scale(&self, h: f64) -> f64 {
        let y = self.y();
        match self {
            OracleLaw::GaussStable { stable, .. } => stable.scale * h.powf(1.0 / y),
            OracleLaw::GaussCgmy { model } => {
                if !model.has_jumps() {
                    return 0.0;
                }
                // scale of the matching stable law; tempering only thins tails
                let cbar = model.c_total();
                let a = cbar
                    * crate::model::gamma_minus(y)
                    * (std::f64::consts::PI * y / 2.0).cos().abs();
                a.powf(1.0 / y) * h.powf(1.0 / y)
            }
        }
    }

    fn exponent(&self, u: f64) -> Complex64 {
        match self {
            OracleLaw::GaussStable { sigma, stable } => {
                Complex64::new(-0.5 * sigma * sigma * u * u, 0.0)
                    + crate::model::stable_char_exponent(u, stable)
            }
            OracleLaw::GaussCgmy { model } => model_char_exponent(u, model, None),
        }
    }
}

/// An oracle value with its numerical-error estimate.
#[derive(Debug, Clone, Copy)]
pub struct OracleValue {
    pub value: f64,
    pub err_estimate: f64,
}

/// Build the FFT grid for the law of `X_h` sized so that tail folding is
/// negligible for `x^{2k}` integrands truncated at `eps`.
fn law_grid(law: &OracleLaw, h: f64, eps: f64, k: usize, tol: f64) -> Result<DensityGrid> {
    let sigma = law.sigma();
    let s_gauss = sigma * h.sqrt();
    let s_jump = law.jump_scale(h);
    let scale = s_gauss.max(s_jump);
    if scale <= 0.0 {
        return Err(Error::InvalidModel("law is degenerate (no scale)".into()));
    }
    let cbar = law.c_total();
    let y = law.y();
    let mut w = (6.0 * eps).max(60.0 * scale);
    for _ in 0..60 {
        // power-law bound on the folded tail density and the lost mass
        let alias_density = h * cbar * w.powf(-1.0 - y);
        let lost_mass = if cbar > 0.0 {
            2.0 * h * cbar / y * w.powf(-y)
        } else {
            0.0
        };
        let moment_leak = alias_density * 2.0 * eps.powi(2 * k as i32 + 1) / (2.0 * k as f64 + 1.0);
        if moment_leak <= 0.01 * tol && lost_mass <= 5e-7 {
            break;
        }
        w *= 1.5;
    }
    let spec = GridSpec::new(scale / 64.0, w);
    let psi = |u: f64| law.exponent(u);
    let grid = invert_density(&psi, h, &spec)?;
    grid.validate_mass()?;
    Ok(grid)
}

/// `E[X_h^{2k} 1{|X_h| <= eps}]` (or the raw moment when `eps` is `None`)
/// by Fourier inversion and composite quadrature with Richardson
/// refinement. The absolute accuracy target is `1e-3` of the leading term.
pub fn oracle_truncated_moment(
    law: &OracleLaw,
    h: f64,
    eps: Option<f64>,
    k: usize,
) -> Result<OracleValue> {
    assert!((1..=4).contains(&k), "moment order 2k with k in 1..=4");
    let sigma = law.sigma();
    let y = law.y();
    let cbar = law.c_total();

    // pure-jump stable laws go through the stitched unit-scale grid, which
    // has no tail-folding error at all
    if sigma == 0.0 {
        if let OracleLaw::GaussStable { stable, .. } = law {
            let eps = eps.ok_or_else(|| {
                Error::InvalidModel("raw stable moments of order >= 2 are infinite".into())
            })?;
            let grid = stable_unit_grid(stable)?;
            let hy = h.powf(1.0 / y);
            let bound = eps / hy;
            let value = h.powf(2.0 * k as f64 / y) * grid.moment_integral(-bound, bound, k);
            return Ok(OracleValue {
                value,
                err_estimate: 1e-9 * value.abs() + 1e-300,
            });
        }
        return Err(Error::InvalidModel(
            "sigma = 0 oracle is only supported for the stable law".into(),
        ));
    }

    let gauss_leading = double_factorial(2 * k - 1) * sigma.powi(2 * k as i32) * h.powi(k as i32);
    let jump_leading = match eps {
        Some(e) if cbar > 0.0 => cbar / (2.0 * k as f64 - y) * h * e.powf(2.0 * k as f64 - y),
        _ => 0.0,
    };
    let tol = 1e-3 * gauss_leading.max(jump_leading).max(1e-300);
    let eps_eff = eps.unwrap_or(f64::INFINITY);
    let grid_eps = if eps_eff.is_finite() { eps_eff } else { 1.0 };
    let grid = law_grid(law, h, grid_eps, k, tol)?;
    match eps {
        Some(e) => {
            let (value, err) = grid.trunc_even_moment(k, e);
            Ok(OracleValue {
                value,
                err_estimate: err,
            })
        }
        None => {
            // raw moment needs the tempered tail beyond the grid to be shown
            // negligible
            let value = grid.even_moment_full(k);
            let beyond = match law {
                OracleLaw::GaussCgmy { model } => {
                    let w = grid.x_max();
                    h * (tempered_tail_moment(model, w, 2 * k as u32))
                }
                OracleLaw::GaussStable { .. } => {
                    return Err(Error::InvalidModel(
                        "raw stable moments of order >= 2 are infinite".into(),
                    ))
                }
            };
            Ok(OracleValue {
                value,
                err_estimate: beyond + 1e-12 * value.abs(),
            })
        }
    }
}

/// `int_{|x| > w} x^p nu(dx)` for a tempered model (upper bound on the
/// moment mass outside the grid).
fn tempered_tail_moment(model: &LevyModelSpec, w: f64, p: u32) -> f64 {
    let f = |s: f64, c: f64, rate: f64| {
        let x: f64 = s.exp();
        c * (p as f64 * s).exp() * (-rate * x).exp() * (-model.y * s).exp()
    };
    let mut total = 0.0;
    if model.c_plus > 0.0 && model.m > 0.0 {
        let hi = (700.0 / model.m).max(2.0 * w);
        total += adaptive_simpson(&|s| f(s, model.c_plus, model.m), w.ln(), hi.ln(), 1e-9, 1e-300);
    }
    if model.c_minus > 0.0 && model.g > 0.0 {
        let hi = (700.0 / model.g).max(2.0 * w);
        total += adaptive_simpson(&|s| f(s, model.c_minus, model.g), w.ln(), hi.ln(), 1e-9, 1e-300);
    }
    total
}

fn double_factorial(n: usize) -> f64 {
    let mut acc = 1.0;
    let mut m = n as i64;
    while m > 1 {
        acc *= m as f64;
        m -= 2;
    }
    acc
}

thread_local! {
    static STABLE_GRID_CACHE: std::cell::RefCell<Vec<(StableParams, std::rc::Rc<DensityGrid>)>> =
        const { std::cell::RefCell::new(Vec::new()) };
}

/// Unit-time stitched stable grid, cached per parameter triple.
fn stable_unit_grid(p: &StableParams) -> Result<std::rc::Rc<DensityGrid>> {
    STABLE_GRID_CACHE.with(|cache| {
        let mut cache = cache.borrow_mut();
        if let Some((_, g)) = cache.iter().find(|(q, _)| q == p) {
            return Ok(g.clone());
        }
        let grid = std::rc::Rc::new(make_stable_density(p, 1.0)?);
        cache.push((*p, grid.clone()));
        if cache.len() > 8 {
            cache.remove(0);
        }
        Ok(grid)
    })
}

/// `E[ Phi_bar((eps + sign * S_h) / (sigma sqrt(h))) ]` by 1-D quadrature
/// of the Gaussian tail against the stable density (grid core plus series
/// tail).
pub fn oracle_phibar(
    stable: &StableParams,
    sigma: f64,
    h: f64,
    eps: f64,
    sign_plus: bool,
) -> Result<OracleValue> {
    if !(sigma > 0.0) || !(h > 0.0) || !(eps > 0.0) {
        return Err(Error::InvalidModel("phibar oracle needs sigma, h, eps > 0".into()));
    }
    let grid = stable_unit_grid(stable)?;
    let hy = h.powf(1.0 / stable.y);
    let sg = sigma * h.sqrt();
    let sign = if sign_plus { 1.0 } else { -1.0 };
    // argument (eps + sign * hy * u) / sg transitions across [-9, 9] for u in
    // an interval around -sign * eps / hy
    let width = 9.0 * sg / hy;
    let center = -sign * eps / hy;
    let (u_lo, u_hi) = (center - width, center + width);
    let integrand = |u: f64| norm_sf((eps + sign * hy * u) / sg) * grid.pdf(u);
    let mid = adaptive_simpson(&integrand, u_lo, u_hi, 1e-9, 1e-300);
    // beyond the transition the tail function is 0 or 1 to double precision
    let saturated = if sign_plus {
        grid.tail_prob_lower(u_lo)
    } else {
        grid.tail_prob_upper(u_hi)
    };
    let value = mid + saturated;
    Ok(OracleValue {
        value,
        err_estimate: 1e-7 * value.abs() + 1e-300,
    })
}

/// Physicists' Gauss-Hermite nodes and weights via Newton iteration on the
/// orthonormal recurrence; exact for polynomials of degree < 2n against
/// `exp(-x^2)`.
pub fn gauss_hermite(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 2);
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    let nf = n as f64;
    let mut z = 0.0f64;
    for i in 0..m {
        z = match i {
            0 => (2.0 * nf + 1.0).sqrt() - 1.85575 * (2.0 * nf + 1.0).powf(-1.0 / 6.0),
            1 => z - 1.14 * nf.powf(0.426) / z,
            2 => 1.86 * z - 0.86 * nodes[0],
            3 => 1.91 * z - 0.91 * nodes[1],
            _ => 2.0 * z - nodes[i - 2],
        };
        // Newton on the orthonormal Hermite polynomial
        for _ in 0..200 {
            let (pn, pn1) = hermite_orthonormal(n, z);
            let dp = (2.0 * nf).sqrt() * pn1;
            let dz = pn / dp;
            z -= dz;
            if dz.abs() < 1e-15 * z.abs().max(1.0) {
                break;
            }
        }
        let (_, pn1) = hermite_orthonormal(n, z);
        nodes[i] = z;
        nodes[n - 1 - i] = -z;
        let w = 1.0 / (nf * pn1 * pn1);
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

/// Returns `(p_n(x), p_{n-1}(x))` for the orthonormal Hermite family.
fn hermite_orthonormal(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = std::f64::consts::PI.powf(-0.25);
    let mut p1 = std::f64::consts::SQRT_2 * x * p0;
    if n == 1 {
        return (p1, p0);
    }
    for k in 1..n {
        let kf = k as f64;
        let p2 = x * (2.0 / (kf + 1.0)).sqrt() * p1 - (kf / (kf + 1.0)).sqrt() * p0;
        p0 = p1;
        p1 = p2;
    }
    (p1, p0)
}

/// `E[S_h^{2k} 1{|sigma W_h + S_h + h gamma0| <= eps}]` by Gauss-Hermite
/// quadrature in the Gaussian coordinate against cumulative moments of the
/// stable grid, with node doubling until the value settles to 1e-3.
pub fn oracle_s2k(
    stable: &StableParams,
    sigma: f64,
    h: f64,
    eps: f64,
    k: usize,
    gamma0: f64,
) -> Result<OracleValue> {
    assert!((1..=3).contains(&k));
    let grid = stable_unit_grid(stable)?;
    let hy = h.powf(1.0 / stable.y);
    let sg = sigma * h.sqrt();
    let moment_scale = h.powf(2.0 * k as f64 / stable.y);
    let eval = |n_nodes: usize| -> f64 {
        let (xs, ws) = gauss_hermite(n_nodes);
        let mut acc = 0.0;
        for (x, w) in xs.iter().zip(&ws) {
            let z = std::f64::consts::SQRT_2 * x;
            let lo = (-eps - sg * z - gamma0 * h) / hy;
            let hi = (eps - sg * z - gamma0 * h) / hy;
            acc += w * grid.moment_integral(lo, hi, k);
        }
        moment_scale * acc / std::f64::consts::PI.sqrt()
    };
    let mut prev = eval(64);
    for n_nodes in [128usize, 256, 512] {
        let cur = eval(n_nodes);
        let diff = (cur - prev).abs();
        if diff <= 1e-3 * cur.abs().max(1e-300) {
            return Ok(OracleValue {
                value: cur,
                err_estimate: diff + 1e-9 * cur.abs(),
            });
        }
        prev = cur;
    }
    Ok(OracleValue {
        value: prev,
        err_estimate: 2e-3 * prev.abs(),
    })
}

/// Truncated second-moment difference between the tempered law and its
/// stable approximation, computed from one inversion of the differenced
/// characteristic function (the two separate moments nearly cancel, the
/// differenced transform does not).
pub fn oracle_2e_difference(model: &LevyModelSpec, h: f64, eps: f64) -> Result<OracleValue> {
    let stable = crate::model::derive_stable_params(model)?;
    let sigma = model.sigma;
    if !(sigma > 0.0) {
        return Err(Error::InvalidModel("difference oracle needs sigma > 0".into()));
    }
    let cf = |u: f64| {
        let gauss = Complex64::new(-0.5 * sigma * sigma * u * u, 0.0);
        let cgmy = (crate::model::cgmy_char_exponent_unchecked(u, model) * h).exp();
        let stab = (crate::model::stable_char_exponent(u, &stable) * h).exp();
        (gauss * h).exp() * (cgmy - stab)
    };
    let scale = sigma * h.sqrt();
    // the difference density decays like the tempered-vs-stable tail gap;
    // reuse the law-grid sizing of the plain moment oracle
    let law = OracleLaw::GaussCgmy { model };
    let tol = 1e-3 * sigma * sigma * h;
    let w = {
        let probe = law_grid(&law, h, eps, 1, tol)?;
        probe.x_max()
    };
    let spec = GridSpec::new(scale / 64.0, w);
    let (x0, dx, values) = crate::density::invert_cf(&cf, &spec)?;
    let diff_grid = DensityGrid::from_raw(x0, dx, values);
    let (value, err) = diff_grid.trunc_even_moment(1, eps);
    Ok(OracleValue {
        value,
        err_estimate: err,
    })
}
