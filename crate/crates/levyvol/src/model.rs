//! Model parameterization: Brownian volatility plus a tempered-stable /
//! stable jump part, the induced strictly stable law of the small-jump
//! limit, characteristic exponents, and Lévy-measure integrals.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use statrs::function::gamma::gamma;

use crate::error::{Error, Result};
use crate::quad::adaptive_simpson;

/// Drift handling for the jump part. The jump component is always built
/// as a centered (martingale) process; `Drift(b)` then adds `b*t` so that
/// `E J_t = b t`, while `ZeroMeanJumps` leaves `E J_t = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum DriftConvention {
    ZeroMeanJumps,
    Drift(f64),
}

impl Default for DriftConvention {
    fn default() -> Self {
        DriftConvention::ZeroMeanJumps
    }
}

/// Full generative model `X = sigma W + J` with jump Lévy density
/// `C_sgn(x) q(x) |x|^{-1-Y}`, where `q(x) = exp(-m x)` for `x > 0` and
/// `exp(g x)` for `x < 0`. `g = m = 0` means pure stable jumps.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LevyModelSpec {
    /// Brownian volatility per sqrt(year); 0 is allowed for degenerate runs.
    pub sigma: f64,
    pub c_plus: f64,
    pub c_minus: f64,
    /// Blumenthal-Getoor index, in (1, 2).
    pub y: f64,
    /// Tempering rate of negative jumps (G), >= 0.
    pub g: f64,
    /// Tempering rate of positive jumps (M), >= 0.
    pub m: f64,
    #[serde(default)]
    pub drift: DriftConvention,
}

impl LevyModelSpec {
    pub fn cgmy(sigma: f64, c: f64, g: f64, m: f64, y: f64) -> Self {
        LevyModelSpec {
            sigma,
            c_plus: c,
            c_minus: c,
            y,
            g,
            m,
            drift: DriftConvention::ZeroMeanJumps,
        }
    }

    pub fn pure_stable(sigma: f64, c_plus: f64, c_minus: f64, y: f64) -> Self {
        LevyModelSpec {
            sigma,
            c_plus,
            c_minus,
            y,
            g: 0.0,
            m: 0.0,
            drift: DriftConvention::ZeroMeanJumps,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidModel(msg));
        if !self.sigma.is_finite() || self.sigma < 0.0 {
            return bad(format!("sigma must be finite and >= 0, got {}", self.sigma));
        }
        if !self.c_plus.is_finite() || self.c_plus < 0.0 {
            return bad(format!("c_plus must be finite and >= 0, got {}", self.c_plus));
        }
        if !self.c_minus.is_finite() || self.c_minus < 0.0 {
            return bad(format!("c_minus must be finite and >= 0, got {}", self.c_minus));
        }
        if !(self.y > 1.0 && self.y < 2.0) {
            return bad(format!("y must lie in (1, 2), got {}", self.y));
        }
        if !self.g.is_finite() || self.g < 0.0 || !self.m.is_finite() || self.m < 0.0 {
            return bad(format!("tempering rates must be >= 0, got g={} m={}", self.g, self.m));
        }
        // Moment centering of a tempered model needs tempering on every
        // active side; a pure stable jump part is centered through strict
        // stability instead.
        let half_tempered = !self.is_pure_stable()
            && ((self.c_plus > 0.0 && self.m == 0.0) || (self.c_minus > 0.0 && self.g == 0.0));
        if half_tempered && matches!(self.drift, DriftConvention::ZeroMeanJumps) {
            return bad("zero_mean_jumps requires g > 0 and m > 0 (or a pure stable model)".into());
        }
        if let DriftConvention::Drift(b) = self.drift {
            if !b.is_finite() {
                return bad(format!("drift rate must be finite, got {b}"));
            }
        }
        Ok(())
    }

    pub fn has_jumps(&self) -> bool {
        self.c_plus > 0.0 || self.c_minus > 0.0
    }

    pub fn is_pure_stable(&self) -> bool {
        self.g == 0.0 && self.m == 0.0
    }

    pub fn c_total(&self) -> f64 {
        self.c_plus + self.c_minus
    }

    /// Lévy density at `x != 0`.
    pub fn levy_density(&self, x: f64) -> f64 {
        if x > 0.0 {
            self.c_plus * (-self.m * x).exp() * x.powf(-1.0 - self.y)
        } else if x < 0.0 {
            self.c_minus * (self.g * x).exp() * (-x).powf(-1.0 - self.y)
        } else {
            0.0
        }
    }

    /// `int_{delta < x <= top} x^p q(x) C |x|^{-1-Y} nu-style integral`,
    /// one side. For a tempered side the closed forms below are preferred;
    /// this is the quadrature route used as the independent implementation.
    fn side_integral(&self, positive: bool, power: f64, lo: f64, hi: f64) -> f64 {
        let (c, rate) = if positive {
            (self.c_plus, self.m)
        } else {
            (self.c_minus, self.g)
        };
        if c == 0.0 || lo >= hi {
            return 0.0;
        }
        let y = self.y;
        if rate == 0.0 {
            // pure power: closed form
            let e = power - y;
            if e.abs() < 1e-12 {
                return c * (hi / lo).ln();
            }
            return c * (hi.powf(e) - lo.powf(e)) / e;
        }
        // log substitution x = e^s keeps the integrand smooth on the whole
        // dynamic range [delta, hi]
        let s_lo = lo.ln();
        let s_hi = hi.ln();
        let f = |s: f64| {
            let x = s.exp();
            c * (power * s).exp() * (-rate * x).exp() * (-y * s).exp()
        };
        adaptive_simpson(&f, s_lo, s_hi, 1e-11, 0.0)
    }

    fn side_upper_limit(&self, positive: bool) -> f64 {
        let rate = if positive { self.m } else { self.g };
        if rate == 0.0 {
            // power decay only; generous cap, integrals of interest converge
            1e12
        } else {
            // e^{-rate x} below 1e-300 contributes nothing
            700.0 / rate
        }
    }

    /// Poisson intensity of jumps with `|x| > delta`.
    pub fn tail_mass(&self, delta: f64) -> f64 {
        self.tail_mass_side(delta, true) + self.tail_mass_side(delta, false)
    }

    pub fn tail_mass_side(&self, delta: f64, positive: bool) -> f64 {
        self.side_integral(positive, 0.0, delta, self.side_upper_limit(positive))
    }

    /// `int_{|x| > delta} x nu(dx)`; finite for Y > 1 even without tempering.
    pub fn tail_mean(&self, delta: f64) -> f64 {
        self.side_integral(true, 1.0, delta, self.side_upper_limit(true))
            - self.side_integral(false, 1.0, delta, self.side_upper_limit(false))
    }

    /// `int_{|x| <= delta} x^2 nu(dx)`, the Gaussian-substitution variance
    /// rate for jumps below the cutoff.
    pub fn truncated_variance_rate(&self, delta: f64) -> f64 {
        self.side_integral(true, 2.0, 0.0, delta) + self.side_integral(false, 2.0, 0.0, delta)
    }

    /// `int x^2 nu(dx)`; infinite for a pure stable side, hence `None`.
    pub fn second_moment_rate(&self) -> Option<f64> {
        if self.is_pure_stable() && self.has_jumps() {
            return None;
        }
        Some(
            self.side_integral(true, 2.0, 0.0, self.side_upper_limit(true))
                + self.side_integral(false, 2.0, 0.0, self.side_upper_limit(false)),
        )
    }

    /// Mean rate `int x nu(dx)` of the uncompensated tempered jump part;
    /// `Gamma(1-Y) (C+ M^{Y-1} - C- G^{Y-1})` in closed form.
    pub fn jump_mean_rate(&self) -> f64 {
        if self.is_pure_stable() {
            return 0.0;
        }
        let y = self.y;
        let g1 = gamma(2.0 - y) / (1.0 - y); // Gamma(1-Y), away from the pole
        let pos = if self.c_plus > 0.0 {
            self.c_plus * self.m.powf(y - 1.0)
        } else {
            0.0
        };
        let neg = if self.c_minus > 0.0 {
            self.c_minus * self.g.powf(y - 1.0)
        } else {
            0.0
        };
        g1 * (pos - neg)
    }
}

/// `Gamma(-y)` for y in (1, 2), computed through the recurrence
/// `Gamma(-y) = Gamma(2-y) / ((-y)(1-y))` so the gamma function is only
/// ever evaluated away from its poles.
pub fn gamma_minus(y: f64) -> f64 {
    gamma(2.0 - y) / ((-y) * (1.0 - y))
}

/// Strictly stable law parameters (location is pinned to 0).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StableParams {
    pub y: f64,
    pub scale: f64,
    pub skewness: f64,
}

impl StableParams {
    pub fn new(y: f64, scale: f64, skewness: f64) -> Result<Self> {
        let p = StableParams { y, scale, skewness };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.y > 1.0 && self.y < 2.0) {
            return Err(Error::InvalidModel(format!("stable index must be in (1,2), got {}", self.y)));
        }
        if !self.scale.is_finite() || self.scale < 0.0 {
            return Err(Error::InvalidModel(format!("stable scale must be >= 0, got {}", self.scale)));
        }
        if !(-1.0..=1.0).contains(&self.skewness) {
            return Err(Error::InvalidModel(format!("skewness must be in [-1,1], got {}", self.skewness)));
        }
        Ok(())
    }

    /// Recover the one-sided Lévy constants `(C+, C-)` of this law.
    pub fn levy_constants(&self) -> (f64, f64) {
        let cbar = self.scale.powf(self.y) / (gamma_minus(self.y) * (std::f64::consts::PI * self.y / 2.0).cos().abs());
        (cbar * (1.0 + self.skewness) / 2.0, cbar * (1.0 - self.skewness) / 2.0)
    }
}

/// Stable parameters of the small-jump limit law of `model`:
/// scale `[(C+ + C-) Gamma(-Y) |cos(pi Y/2)|]^{1/Y}` and skewness
/// `(C+ - C-)/(C+ + C-)`.
pub fn derive_stable_params(model: &LevyModelSpec) -> Result<StableParams> {
    model.validate()?;
    if !model.has_jumps() {
        return Err(Error::InvalidModel("stable parameters need c_plus + c_minus > 0".into()));
    }
    let y = model.y;
    let cbar = model.c_total();
    let scale = (cbar * gamma_minus(y) * (std::f64::consts::PI * y / 2.0).cos().abs()).powf(1.0 / y);
    let skewness = (model.c_plus - model.c_minus) / cbar;
    StableParams::new(y, scale, skewness)
}

/// Log characteristic function rate of the strictly stable law:
/// `psi(u) = -|scale u|^Y (1 - i rho sgn(u) tan(pi Y / 2))`.
pub fn stable_char_exponent(u: f64, p: &StableParams) -> Complex64 {
    if u == 0.0 || p.scale == 0.0 {
        return Complex64::new(0.0, 0.0);
    }
    let a = (p.scale * u.abs()).powf(p.y);
    let skew = p.skewness * (std::f64::consts::PI * p.y / 2.0).tan() * u.signum();
    Complex64::new(-a, a * skew)
}

/// Log characteristic function rate of the tempered jump part with the
/// drift fixed by the model's drift convention:
/// `C+ G(-Y)[(M-iu)^Y - M^Y] + C- G(-Y)[(G+iu)^Y - G^Y] + i u d`.
pub fn cgmy_char_exponent(u: f64, model: &LevyModelSpec) -> Result<Complex64> {
    if model.g == 0.0 || model.m == 0.0 {
        return Err(Error::InvalidModel(
            "tempered characteristic exponent needs g > 0 and m > 0".into(),
        ));
    }
    Ok(cgmy_char_exponent_unchecked(u, model))
}

pub(crate) fn cgmy_char_exponent_unchecked(u: f64, model: &LevyModelSpec) -> Complex64 {
    let y = model.y;
    let gm = gamma_minus(y);
    let mut psi = Complex64::new(0.0, 0.0);
    if model.c_plus > 0.0 {
        let base = Complex64::new(model.m, -u);
        debug_assert!(base.re > 0.0);
        psi += model.c_plus * gm * (base.powf(y) - Complex64::new(model.m.powf(y), 0.0));
    }
    if model.c_minus > 0.0 {
        let base = Complex64::new(model.g, u);
        debug_assert!(base.re > 0.0);
        psi += model.c_minus * gm * (base.powf(y) - Complex64::new(model.g.powf(y), 0.0));
    }
    // centering: remove the mean rate, then add back any requested drift
    let drift = match model.drift {
        DriftConvention::ZeroMeanJumps => -model.jump_mean_rate(),
        DriftConvention::Drift(b) => b - model.jump_mean_rate(),
    };
    psi + Complex64::new(0.0, u * drift)
}

/// Characteristic exponent of the full model `sigma W + J` as used by the
/// density oracles. For pure stable jumps this is Gaussian + stable.
pub fn model_char_exponent(u: f64, model: &LevyModelSpec, stable: Option<&StableParams>) -> Complex64 {
    let gauss = Complex64::new(-0.5 * model.sigma * model.sigma * u * u, 0.0);
    if !model.has_jumps() {
        return gauss;
    }
    if model.is_pure_stable() {
        let p = stable.expect("pure stable model needs stable params");
        return gauss + stable_char_exponent(u, p);
    }
    gauss + cgmy_char_exponent_unchecked(u, model)
}

/// Evenly spaced observation grid over `[0, t_horizon]`; the step is always
/// stored as the ratio `t_horizon / n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SamplingGrid {
    pub t_horizon: f64,
    pub n: usize,
}

impl SamplingGrid {
    pub fn new(t_horizon: f64, n: usize) -> Result<Self> {
        if !(t_horizon > 0.0) || !t_horizon.is_finite() {
            return Err(Error::InvalidConfig(format!("t_horizon must be > 0, got {t_horizon}")));
        }
        if n == 0 {
            return Err(Error::InvalidConfig("n must be >= 1".into()));
        }
        Ok(SamplingGrid { t_horizon, n })
    }

    pub fn h(&self) -> f64 {
        self.t_horizon / self.n as f64
    }
}
