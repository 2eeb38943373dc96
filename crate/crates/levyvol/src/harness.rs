//! Experiment configuration, the reproducible Monte Carlo driver, summary
//! statistics, and report/validation serialization.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimators::{
    bipower, debias_ideal_one, debias_ideal_two, debias_nb, debias_pb, jt_53, jt_base, threshold,
    trqv, C0Source, DebiasConfig, Diagnostics, EstimateResult, JtConfig, ThresholdPolicy,
    ThresholdVariant,
};
use crate::expansions::{
    check_2e_difference, check_estable_expansion, check_ex2k_expansion, check_phibar_expansion,
    check_s2k_expansion, geometric_h_sequence, ks_integral,
};
use crate::model::{derive_stable_params, DriftConvention, LevyModelSpec, SamplingGrid};
use crate::sim::{IncrementSeries, RngAlgorithm, SchemeKind, SimScheme, Simulator};
use crate::stats::{fmt_sig, mean, median, pairwise_sum, sample_sd};

/// Environment variable overriding the configured thread count.
pub const THREADS_ENV: &str = "LEVYVOL_THREADS";

// ---------------------------------------------------------------------------
// configuration (TOML-facing structs; unknown keys are errors)
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    pub sigma: f64,
    pub c_plus: f64,
    pub c_minus: f64,
    pub y: f64,
    #[serde(default)]
    pub g: f64,
    #[serde(default)]
    pub m: f64,
    /// "zero_mean_jumps" or a numeric drift rate
    #[serde(default)]
    pub drift: Option<DriftSpec>,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(untagged)]
pub enum DriftSpec {
    Named(String),
    Rate(f64),
}

impl ModelConfig {
    pub fn build(&self) -> Result<LevyModelSpec> {
        let drift = match &self.drift {
            None => DriftConvention::ZeroMeanJumps,
            Some(DriftSpec::Named(s)) if s == "zero_mean_jumps" => DriftConvention::ZeroMeanJumps,
            Some(DriftSpec::Named(s)) => {
                return Err(Error::InvalidConfig(format!(
                    "unknown drift convention '{s}' (expected \"zero_mean_jumps\" or a number)"
                )))
            }
            Some(DriftSpec::Rate(b)) => DriftConvention::Drift(*b),
        };
        let model = LevyModelSpec {
            sigma: self.sigma,
            c_plus: self.c_plus,
            c_minus: self.c_minus,
            y: self.y,
            g: self.g,
            m: self.m,
            drift,
        };
        model.validate()?;
        Ok(model)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub t_horizon: f64,
    pub n: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub n_paths: usize,
    pub master_seed: u64,
    #[serde(default = "default_rng_name")]
    pub rng_algorithm: String,
    #[serde(default)]
    pub threads: Option<usize>,
}

fn default_rng_name() -> String {
    "chacha8".into()
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct SchemeConfig {
    /// "auto" | "exact_stable_bm" | "cgmy_cp_gauss"
    #[serde(default = "default_scheme_kind")]
    pub kind: String,
    #[serde(default)]
    pub delta: Option<f64>,
    #[serde(default = "default_ar_target")]
    pub ar_target: f64,
    #[serde(default = "default_max_poisson_rate")]
    pub max_poisson_rate: f64,
}

fn default_scheme_kind() -> String {
    "auto".into()
}
fn default_ar_target() -> f64 {
    5.0
}
fn default_max_poisson_rate() -> f64 {
    50.0
}

impl Default for SchemeConfig {
    fn default() -> Self {
        SchemeConfig {
            kind: default_scheme_kind(),
            delta: None,
            ar_target: default_ar_target(),
            max_poisson_rate: default_max_poisson_rate(),
        }
    }
}

impl SchemeConfig {
    pub fn build(&self, model: &LevyModelSpec, rng: RngAlgorithm) -> Result<SimScheme> {
        let cp_gauss = SchemeKind::CgmyCpGauss {
            delta: self.delta,
            ar_target: self.ar_target,
            max_poisson_rate: self.max_poisson_rate,
        };
        let kind = match self.kind.as_str() {
            "auto" => {
                if model.is_pure_stable() {
                    SchemeKind::ExactStableBm
                } else {
                    cp_gauss
                }
            }
            "exact_stable_bm" => SchemeKind::ExactStableBm,
            "cgmy_cp_gauss" => cp_gauss,
            other => {
                return Err(Error::InvalidConfig(format!(
                    "unknown scheme kind '{other}' (expected auto|exact_stable_bm|cgmy_cp_gauss)"
                )))
            }
        };
        Ok(SimScheme { kind, rng })
    }
}

/// Threshold policy as written in configs.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct ThresholdConfig {
    /// "bipower_sd" (default) | "bipower_var" | a positive number
    #[serde(default)]
    pub c0: Option<C0Spec>,
    #[serde(default)]
    pub beta: Option<f64>,
    /// "power" (default) | "log_optimal"
    #[serde(default)]
    pub variant: Option<String>,
    #[serde(default)]
    pub y: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(untagged)]
pub enum C0Spec {
    Named(String),
    Fixed(f64),
}

impl ThresholdConfig {
    pub fn build(&self) -> Result<ThresholdPolicy> {
        let c0 = match &self.c0 {
            None => C0Source::BipowerSd,
            Some(C0Spec::Fixed(v)) => C0Source::Fixed(*v),
            Some(C0Spec::Named(s)) => match s.as_str() {
                "bipower_sd" => C0Source::BipowerSd,
                "bipower_var" => C0Source::BipowerVariance,
                other => {
                    return Err(Error::InvalidConfig(format!(
                        "unknown c0 source '{other}' (expected bipower_sd|bipower_var|number)"
                    )))
                }
            },
        };
        let variant = match self.variant.as_deref() {
            None | Some("power") => ThresholdVariant::Power {
                beta: self.beta.unwrap_or(5.0 / 12.0),
            },
            Some("log_optimal") => ThresholdVariant::LogOptimal { y: self.y },
            Some(other) => {
                return Err(Error::InvalidConfig(format!(
                    "unknown threshold variant '{other}' (expected power|log_optimal)"
                )))
            }
        };
        let policy = ThresholdPolicy { c0, variant };
        policy.validate()?;
        Ok(policy)
    }

    pub fn default_power() -> Self {
        ThresholdConfig {
            c0: None,
            beta: None,
            variant: None,
            y: None,
        }
    }
}

/// One estimator entry; `kind` selects which optional fields apply, and the
/// resolver rejects entries whose fields do not belong to the kind.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct EstimatorSpec {
    pub id: String,
    /// trqv | bipower | debias_pb | debias_nb | ideal_one | ideal_two |
    /// jt_base | jt_53
    pub kind: String,
    #[serde(default)]
    pub threshold: Option<ThresholdConfig>,
    #[serde(default)]
    pub zeta1: Option<f64>,
    #[serde(default)]
    pub zeta2: Option<f64>,
    #[serde(default)]
    pub p1: Option<f64>,
    #[serde(default)]
    pub p2: Option<f64>,
    #[serde(default)]
    pub max_fallbacks: Option<u32>,
    #[serde(default)]
    pub fallback_factor: Option<f64>,
    #[serde(default)]
    pub u: Option<f64>,
    #[serde(default)]
    pub p0: Option<f64>,
    #[serde(default)]
    pub zeta: Option<f64>,
}

impl EstimatorSpec {
    pub fn simple(id: &str, kind: &str) -> Self {
        EstimatorSpec {
            id: id.into(),
            kind: kind.into(),
            threshold: None,
            zeta1: None,
            zeta2: None,
            p1: None,
            p2: None,
            max_fallbacks: None,
            fallback_factor: None,
            u: None,
            p0: None,
            zeta: None,
        }
    }

    fn debias_config(&self) -> DebiasConfig {
        let d = DebiasConfig::default();
        DebiasConfig {
            zeta1: self.zeta1.unwrap_or(d.zeta1),
            zeta2: self.zeta2.unwrap_or(d.zeta2),
            p1: self.p1.unwrap_or(d.p1),
            p2: self.p2.unwrap_or(d.p2),
            max_fallbacks: self.max_fallbacks.unwrap_or(d.max_fallbacks),
            fallback_factor: self.fallback_factor.unwrap_or(d.fallback_factor),
            clamp: true,
        }
    }

    fn reject_fields(&self, allowed: &[&str]) -> Result<()> {
        let mut bad = Vec::new();
        let present: [(&str, bool); 10] = [
            ("threshold", self.threshold.is_some()),
            ("zeta1", self.zeta1.is_some()),
            ("zeta2", self.zeta2.is_some()),
            ("p1", self.p1.is_some()),
            ("p2", self.p2.is_some()),
            ("max_fallbacks", self.max_fallbacks.is_some()),
            ("fallback_factor", self.fallback_factor.is_some()),
            ("u", self.u.is_some()),
            ("p0", self.p0.is_some()),
            ("zeta", self.zeta.is_some()),
        ];
        for (name, is_set) in present {
            if is_set && !allowed.contains(&name) {
                bad.push(name);
            }
        }
        if bad.is_empty() {
            Ok(())
        } else {
            Err(Error::InvalidConfig(format!(
                "estimator '{}' of kind '{}' does not accept fields {bad:?}",
                self.id, self.kind
            )))
        }
    }

    pub fn resolve(&self) -> Result<ResolvedEstimator> {
        let policy = || -> Result<ThresholdPolicy> {
            self.threshold
                .clone()
                .unwrap_or_else(ThresholdConfig::default_power)
                .build()
        };
        let kind = match self.kind.as_str() {
            "trqv" => {
                self.reject_fields(&["threshold"])?;
                EstimatorKind::Trqv { policy: policy()? }
            }
            "bipower" => {
                self.reject_fields(&[])?;
                EstimatorKind::Bipower
            }
            "debias_pb" => {
                self.reject_fields(&[
                    "threshold",
                    "zeta1",
                    "p1",
                    "max_fallbacks",
                    "fallback_factor",
                ])?;
                let cfg = self.debias_config();
                cfg.validate()?;
                EstimatorKind::DebiasPb {
                    policy: policy()?,
                    cfg,
                }
            }
            "debias_nb" => {
                self.reject_fields(&[
                    "threshold",
                    "zeta1",
                    "zeta2",
                    "p1",
                    "p2",
                    "max_fallbacks",
                    "fallback_factor",
                ])?;
                let cfg = self.debias_config();
                cfg.validate()?;
                EstimatorKind::DebiasNb {
                    policy: policy()?,
                    cfg,
                }
            }
            "ideal_one" => {
                self.reject_fields(&["threshold", "zeta1"])?;
                EstimatorKind::IdealOne {
                    policy: policy()?,
                    zeta1: self.zeta1.unwrap_or(1.45),
                }
            }
            "ideal_two" => {
                self.reject_fields(&["threshold", "zeta1", "zeta2"])?;
                EstimatorKind::IdealTwo {
                    policy: policy()?,
                    zeta1: self.zeta1.unwrap_or(1.45),
                    zeta2: self.zeta2.unwrap_or(1.2),
                }
            }
            "jt_base" => {
                self.reject_fields(&["u"])?;
                EstimatorKind::JtBase { u: self.u }
            }
            "jt_53" => {
                self.reject_fields(&["u", "p0", "zeta"])?;
                let d = JtConfig::default();
                EstimatorKind::Jt53 {
                    cfg: JtConfig {
                        zeta: self.zeta.unwrap_or(d.zeta),
                        p0: self.p0.unwrap_or(d.p0),
                        u: self.u,
                        ln_abs: false,
                    },
                }
            }
            other => {
                return Err(Error::InvalidConfig(format!(
                    "unknown estimator kind '{other}'"
                )))
            }
        };
        Ok(ResolvedEstimator {
            id: self.id.clone(),
            kind,
        })
    }
}

#[derive(Debug, Clone)]
pub enum EstimatorKind {
    Trqv { policy: ThresholdPolicy },
    Bipower,
    DebiasPb { policy: ThresholdPolicy, cfg: DebiasConfig },
    DebiasNb { policy: ThresholdPolicy, cfg: DebiasConfig },
    IdealOne { policy: ThresholdPolicy, zeta1: f64 },
    IdealTwo { policy: ThresholdPolicy, zeta1: f64, zeta2: f64 },
    JtBase { u: Option<f64> },
    Jt53 { cfg: JtConfig },
}

#[derive(Debug, Clone)]
pub struct ResolvedEstimator {
    pub id: String,
    pub kind: EstimatorKind,
}

impl ResolvedEstimator {
    /// Evaluate on one series. Degenerate debiasing corrections surface as
    /// flagged fallbacks, never as errors, so Monte Carlo batches always
    /// aggregate a number; only the characteristic-function estimator can
    /// genuinely fail.
    pub fn evaluate(&self, series: &IncrementSeries) -> Result<EstimateResult> {
        let xs = &series.increments;
        let h = series.h();
        let eps = |policy: &ThresholdPolicy| threshold(policy, xs, h, None);
        match &self.kind {
            EstimatorKind::Trqv { policy } => {
                let e = eps(policy)?;
                Ok(EstimateResult {
                    value: trqv(xs, e),
                    diagnostics: Diagnostics {
                        epsilon: e,
                        ..Diagnostics::default()
                    },
                })
            }
            EstimatorKind::Bipower => Ok(EstimateResult {
                value: bipower(xs)?,
                diagnostics: Diagnostics::default(),
            }),
            EstimatorKind::DebiasPb { policy, cfg } => Ok(debias_pb(xs, eps(policy)?, cfg)),
            EstimatorKind::DebiasNb { policy, cfg } => Ok(debias_nb(xs, eps(policy)?, cfg)),
            EstimatorKind::IdealOne { policy, zeta1 } => {
                let e = eps(policy)?;
                match debias_ideal_one(xs, e, *zeta1) {
                    Ok(r) => Ok(r),
                    Err(Error::DegenerateCorrection { fallback }) => Ok(EstimateResult {
                        value: fallback,
                        diagnostics: Diagnostics {
                            epsilon: e,
                            degenerate: true,
                            ..Diagnostics::default()
                        },
                    }),
                    Err(e) => Err(e),
                }
            }
            EstimatorKind::IdealTwo {
                policy,
                zeta1,
                zeta2,
            } => {
                let e = eps(policy)?;
                match debias_ideal_two(xs, e, *zeta2, *zeta1) {
                    Ok(r) => Ok(r),
                    Err(Error::DegenerateCorrection { fallback }) => Ok(EstimateResult {
                        value: fallback,
                        diagnostics: Diagnostics {
                            epsilon: e,
                            degenerate: true,
                            ..Diagnostics::default()
                        },
                    }),
                    Err(e) => Err(e),
                }
            }
            EstimatorKind::JtBase { u } => {
                let u = match u {
                    Some(u) => *u,
                    None => {
                        let sbv = bipower(xs)?.sqrt();
                        (1.0 / h).ln().powf(-1.0 / 30.0) / sbv
                    }
                };
                Ok(EstimateResult {
                    value: jt_base(xs, h, u, false)?,
                    diagnostics: Diagnostics {
                        epsilon: u,
                        ..Diagnostics::default()
                    },
                })
            }
            EstimatorKind::Jt53 { cfg } => jt_53(xs, h, cfg),
        }
    }
}

/// Full experiment configuration (round-trips through TOML bit-exactly).
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub model: ModelConfig,
    pub grid: GridConfig,
    pub run: RunConfig,
    #[serde(default)]
    pub scheme: SchemeConfig,
    pub estimators: Vec<EstimatorSpec>,
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig = toml::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> Result<String> {
        Ok(toml::to_string_pretty(self)?)
    }

    pub fn validate(&self) -> Result<()> {
        self.model.build()?;
        SamplingGrid::new(self.grid.t_horizon, self.grid.n)?;
        if self.run.n_paths == 0 {
            return Err(Error::InvalidConfig("n_paths must be >= 1".into()));
        }
        RngAlgorithm::parse(&self.run.rng_algorithm)?;
        let mut ids = std::collections::HashSet::new();
        for e in &self.estimators {
            if !ids.insert(&e.id) {
                return Err(Error::InvalidConfig(format!("duplicate estimator id '{}'", e.id)));
            }
            e.resolve()?;
        }
        Ok(())
    }
}

// ---------------------------------------------------------------------------
// summaries and reports
// ---------------------------------------------------------------------------

/// Summary statistics of one estimator across paths.
#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub estimator: String,
    pub sample_mean: f64,
    pub sample_sd: f64,
    pub mean_rel_err: f64,
    pub sd_rel_err: f64,
    pub mse: f64,
    pub mad: f64,
    pub clamps: usize,
    pub fallbacks: usize,
    pub degenerates: usize,
}

/// Mean, SD (n-1), relative-error stats, MSE, and the median absolute
/// deviation about the true value.
pub fn summarize(estimates: &[f64], true_sigma2: f64) -> Result<SummaryRow> {
    if estimates.is_empty() {
        return Err(Error::InvalidConfig("cannot summarize an empty sample".into()));
    }
    if true_sigma2 < 0.0 || (true_sigma2 == 0.0 && estimates.iter().any(|&v| v != 0.0)) {
        return Err(Error::InvalidConfig(format!(
            "true variance must be > 0 (got {true_sigma2})"
        )));
    }
    let m = mean(estimates);
    let sd = sample_sd(estimates);
    let (mean_rel, sd_rel) = if true_sigma2 > 0.0 {
        let rel: Vec<f64> = estimates.iter().map(|v| (v - true_sigma2) / true_sigma2).collect();
        (mean(&rel), sample_sd(&rel))
    } else {
        (0.0, 0.0)
    };
    let sq: Vec<f64> = estimates
        .iter()
        .map(|v| (v - true_sigma2) * (v - true_sigma2))
        .collect();
    let mse = pairwise_sum(&sq) / estimates.len() as f64;
    let abs_dev: Vec<f64> = estimates.iter().map(|v| (v - true_sigma2).abs()).collect();
    let mad = median(&abs_dev);
    Ok(SummaryRow {
        estimator: String::new(),
        sample_mean: m,
        sample_sd: sd,
        mean_rel_err: mean_rel,
        sd_rel_err: sd_rel,
        mse,
        mad,
        clamps: 0,
        fallbacks: 0,
        degenerates: 0,
    })
}

/// Full experiment output: per-estimator summaries plus raw per-path values.
#[derive(Debug, Clone)]
pub struct ExperimentReport {
    pub config: ExperimentConfig,
    pub true_sigma2: f64,
    pub rows: Vec<SummaryRow>,
    /// per-estimator per-path estimates, in path order
    pub estimates: Vec<Vec<f64>>,
    pub wall_seconds: f64,
    pub threads_used: usize,
}

fn effective_threads(cfg: &ExperimentConfig) -> usize {
    if let Ok(v) = std::env::var(THREADS_ENV) {
        if let Ok(n) = v.parse::<usize>() {
            if n >= 1 {
                return n;
            }
        }
    }
    cfg.run.threads.unwrap_or(0)
}

/// Run every configured estimator over `n_paths` simulated paths.
/// Path-level work is parallel; aggregation is a deterministic sequential
/// reduce in path order, so the report does not depend on the thread count.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    cfg.validate()?;
    let started = std::time::Instant::now();
    let model = cfg.model.build()?;
    let grid = SamplingGrid::new(cfg.grid.t_horizon, cfg.grid.n)?;
    let rng = RngAlgorithm::parse(&cfg.run.rng_algorithm)?;
    let scheme = cfg.scheme.build(&model, rng)?;
    let sim = Simulator::new(&model, &grid, &scheme)?;
    let estimators: Vec<ResolvedEstimator> =
        cfg.estimators.iter().map(|e| e.resolve()).collect::<Result<_>>()?;

    let run_path = |path: usize| -> Result<Vec<EstimateResult>> {
        let series = sim.path(cfg.run.master_seed, path as u64)?;
        estimators.iter().map(|e| e.evaluate(&series)).collect()
    };

    let threads = effective_threads(cfg);
    let outcomes: Vec<Result<Vec<EstimateResult>>> = if threads == 1 {
        (0..cfg.run.n_paths).map(run_path).collect()
    } else if threads == 0 {
        (0..cfg.run.n_paths).into_par_iter().map(run_path).collect()
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .map_err(|e| Error::InvalidConfig(format!("thread pool: {e}")))?;
        pool.install(|| (0..cfg.run.n_paths).into_par_iter().map(run_path).collect())
    };

    let mut per_estimator: Vec<Vec<f64>> = vec![Vec::with_capacity(cfg.run.n_paths); estimators.len()];
    let mut clamps = vec![0usize; estimators.len()];
    let mut fallbacks = vec![0usize; estimators.len()];
    let mut degenerates = vec![0usize; estimators.len()];
    for outcome in outcomes {
        let results = outcome?;
        for (j, r) in results.into_iter().enumerate() {
            per_estimator[j].push(r.value);
            if r.diagnostics.clamped {
                clamps[j] += 1;
            }
            if r.diagnostics.fallback_count > 0 || r.diagnostics.exhausted {
                fallbacks[j] += 1;
            }
            if r.diagnostics.degenerate {
                degenerates[j] += 1;
            }
        }
    }

    let true_sigma2 = model.sigma * model.sigma * grid.t_horizon;
    let mut rows = Vec::with_capacity(estimators.len());
    for (j, est) in estimators.iter().enumerate() {
        let mut row = summarize(&per_estimator[j], true_sigma2)?;
        row.estimator = est.id.clone();
        row.clamps = clamps[j];
        row.fallbacks = fallbacks[j];
        row.degenerates = degenerates[j];
        rows.push(row);
    }
    let threads_used = if threads == 0 { rayon::current_num_threads() } else { threads };
    Ok(ExperimentReport {
        config: cfg.clone(),
        true_sigma2,
        rows,
        estimates: per_estimator,
        wall_seconds: started.elapsed().as_secs_f64(),
        threads_used,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Csv,
    Markdown,
}

impl ReportFormat {
    pub fn parse(name: &str) -> Result<Self> {
        match name {
            "csv" => Ok(ReportFormat::Csv),
            "markdown" => Ok(ReportFormat::Markdown),
            other => Err(Error::InvalidConfig(format!(
                "unknown format '{other}' (expected csv|markdown)"
            ))),
        }
    }
}

/// Serialize a report. CSV columns are fixed; floats carry 6 significant
/// digits; markdown mirrors the experiment-table layout.
pub fn write_report(report: &ExperimentReport, format: ReportFormat) -> String {
    match format {
        ReportFormat::Csv => {
            let mut out = String::from(
                "estimator,sample_mean,sample_sd,mean_rel_err,sd_rel_err,mse,mad,clamps,fallbacks,degenerates\n",
            );
            for r in &report.rows {
                out.push_str(&format!(
                    "{},{},{},{},{},{},{},{},{},{}\n",
                    r.estimator,
                    fmt_sig(r.sample_mean, 6),
                    fmt_sig(r.sample_sd, 6),
                    fmt_sig(r.mean_rel_err, 6),
                    fmt_sig(r.sd_rel_err, 6),
                    fmt_sig(r.mse, 6),
                    fmt_sig(r.mad, 6),
                    r.clamps,
                    r.fallbacks,
                    r.degenerates
                ));
            }
            out
        }
        ReportFormat::Markdown => {
            let mut out = String::new();
            out.push_str(&format!(
                "true sigma^2 = {} over {} paths\n\n",
                fmt_sig(report.true_sigma2, 6),
                report.config.run.n_paths
            ));
            out.push_str("| estimator | mean | SD | mean rel err | SD rel err | MSE | MAD |\n");
            out.push_str("|---|---|---|---|---|---|---|\n");
            for r in &report.rows {
                out.push_str(&format!(
                    "| {} | {} | {} | {} | {} | {} | {} |\n",
                    r.estimator,
                    fmt_sig(r.sample_mean, 6),
                    fmt_sig(r.sample_sd, 6),
                    fmt_sig(r.mean_rel_err, 6),
                    fmt_sig(r.sd_rel_err, 6),
                    fmt_sig(r.mse, 6),
                    fmt_sig(r.mad, 6)
                ));
            }
            out
        }
    }
}

// ---------------------------------------------------------------------------
// table presets
// ---------------------------------------------------------------------------

/// Built-in experiment cell `(y, sigma)` for table ids 1..=8, matching the
/// Monte Carlo study layout (1..4 sweep y at sigma 0.2; 5..8 at 0.4).
pub fn table_parameters(table_id: usize) -> Result<(f64, f64)> {
    let ys = [1.25, 1.35, 1.5, 1.7];
    match table_id {
        1..=4 => Ok((ys[table_id - 1], 0.2)),
        5..=8 => Ok((ys[table_id - 5], 0.4)),
        other => Err(Error::InvalidConfig(format!(
            "table id {other} out of range 1..=8"
        ))),
    }
}

/// Full experiment configuration reproducing one table cell; per-cell
/// seeding is `master_seed xor (table_id * golden)`.
pub fn table_config(table_id: usize, n_paths: usize, master_seed: u64) -> Result<ExperimentConfig> {
    let (y, sigma) = table_parameters(table_id)?;
    let cell_seed = master_seed ^ (table_id as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15);
    Ok(ExperimentConfig {
        model: ModelConfig {
            sigma,
            c_plus: 0.028,
            c_minus: 0.028,
            y,
            g: 2.318,
            m: 4.025,
            drift: None,
        },
        grid: GridConfig {
            t_horizon: 1.0,
            n: 19656,
        },
        run: RunConfig {
            n_paths,
            master_seed: cell_seed,
            rng_algorithm: "chacha8".into(),
            threads: None,
        },
        scheme: SchemeConfig::default(),
        estimators: vec![
            EstimatorSpec::simple("trqv", "trqv"),
            EstimatorSpec::simple("pb", "debias_pb"),
            EstimatorSpec::simple("nb", "debias_nb"),
            EstimatorSpec::simple("jt53", "jt_53"),
        ],
    })
}

// ---------------------------------------------------------------------------
// validation suite
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Battery {
    Default,
    None,
    Estable,
    Ex2k,
    Phibar,
    S2k,
    TwoE,
    Ks,
}

impl Battery {
    pub fn parse(name: &str) -> Result<Self> {
        match name {
            "default" => Ok(Battery::Default),
            "none" => Ok(Battery::None),
            "estable" => Ok(Battery::Estable),
            "ex2k" => Ok(Battery::Ex2k),
            "phibar" => Ok(Battery::Phibar),
            "s2k" => Ok(Battery::S2k),
            "two-e" | "two_e" => Ok(Battery::TwoE),
            "ks" => Ok(Battery::Ks),
            other => Err(Error::InvalidConfig(format!("unknown battery '{other}'"))),
        }
    }
}

/// One row of the validation report.
#[derive(Debug, Clone)]
pub struct ValidationRow {
    pub check_id: String,
    pub oracle: f64,
    pub expansion: f64,
    pub abs_error: f64,
    pub envelope_pass: bool,
    pub slope: f64,
    pub slope_se: f64,
    pub pass: bool,
}

impl From<&crate::expansions::ExpansionCheck> for ValidationRow {
    fn from(c: &crate::expansions::ExpansionCheck) -> Self {
        let last = c.last();
        ValidationRow {
            check_id: c.check_id.clone(),
            oracle: last.oracle,
            expansion: last.expansion,
            abs_error: last.error,
            envelope_pass: c.envelope_pass,
            slope: c.fitted_slope,
            slope_se: c.slope_se,
            pass: c.pass,
        }
    }
}

/// Run the configured battery of expansion checks and return report rows.
pub fn run_validation_suite(battery: Battery) -> Result<Vec<ValidationRow>> {
    let mut rows = Vec::new();
    if battery == Battery::None {
        return Ok(rows);
    }
    let h_seq = geometric_h_sequence(1e-3, 1e-5, 5);
    let beta = 5.0 / 12.0;
    let sigma = 0.2;
    let want = |b: Battery| battery == Battery::Default || battery == b;

    for y in [1.25f64, 1.5] {
        let stable_model = LevyModelSpec::pure_stable(sigma, 0.028, 0.028, y);
        let stable = derive_stable_params(&stable_model)?;
        let cgmy = LevyModelSpec::cgmy(sigma, 0.028, 2.318, 4.025, y);

        if want(Battery::Estable) {
            rows.push((&check_estable_expansion(sigma, &stable, &h_seq, beta)?).into());
        }
        if want(Battery::Ex2k) {
            for k in [1usize, 2] {
                rows.push((&check_ex2k_expansion(&cgmy, &h_seq, beta, k)?).into());
            }
        }
        if want(Battery::Phibar) {
            let ph = check_phibar_expansion(&stable, sigma, &h_seq, beta)?;
            rows.push((&ph.check).into());
        }
        if want(Battery::S2k) {
            let s2k = check_s2k_expansion(&stable, sigma, &h_seq, beta, 1, 0.0)?;
            rows.push((&s2k.check).into());
        }
        if want(Battery::TwoE) {
            rows.push((&check_2e_difference(&cgmy, &h_seq, beta)?).into());
        }
    }
    if want(Battery::Ks) {
        let sym = derive_stable_params(&LevyModelSpec::pure_stable(0.0, 0.028, 0.028, 1.5))?;
        let r = ks_integral(&sym)?;
        rows.push(ValidationRow {
            check_id: "ks_sym_y150".into(),
            oracle: r.value,
            expansion: 0.0,
            abs_error: r.value.abs(),
            envelope_pass: r.value.abs() < 1e-4,
            slope: f64::NAN,
            slope_se: f64::NAN,
            pass: r.value.abs() < 1e-4,
        });
        let asym = derive_stable_params(&LevyModelSpec::pure_stable(0.0, 0.015, 0.041, 1.25))?;
        let r = ks_integral(&asym)?;
        rows.push(ValidationRow {
            check_id: "ks_asym_y125".into(),
            oracle: r.value,
            expansion: 0.0,
            abs_error: r.value.abs(),
            envelope_pass: r.value.abs() < 1e-4,
            slope: f64::NAN,
            slope_se: f64::NAN,
            pass: r.value.abs() < 1e-4,
        });
    }
    Ok(rows)
}

/// Validation report CSV with the fixed column set.
pub fn write_validation_report(rows: &[ValidationRow]) -> String {
    let mut out =
        String::from("check_id,oracle,expansion,abs_error,envelope_pass,slope,slope_se,pass\n");
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{}\n",
            r.check_id,
            fmt_sig(r.oracle, 6),
            fmt_sig(r.expansion, 6),
            fmt_sig(r.abs_error, 6),
            r.envelope_pass,
            fmt_sig(r.slope, 6),
            fmt_sig(r.slope_se, 6),
            r.pass
        ));
    }
    out
}
