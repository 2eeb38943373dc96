//! Thin command-line front end over the library: simulate paths, estimate
//! a single series, reproduce a study table, or run the validation suite.
//!
//! Exit codes: 0 success, 2 configuration/usage errors, 3 I/O errors,
//! 4 estimator undefined.

use std::io::Write as _;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};

use levyvol::error::{Error, Result};
use levyvol::estimators::{DebiasConfig, JtConfig};
use levyvol::harness::{
    run_experiment, run_validation_suite, table_config, write_report, write_validation_report,
    Battery, ExperimentConfig, ReportFormat, THREADS_ENV,
};
use levyvol::model::SamplingGrid;
use levyvol::sim::{RngAlgorithm, Simulator};
use levyvol::stats::fmt_sig;

#[derive(Parser)]
#[command(name = "levyvol", version, about = "Lévy-process volatility estimation toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate increment series and write one CSV per path plus a manifest
    Simulate {
        /// experiment config (TOML)
        #[arg(long)]
        config: PathBuf,
        /// override the number of paths
        #[arg(long)]
        paths: Option<usize>,
        /// override the master seed
        #[arg(long)]
        seed: Option<u64>,
        /// output directory
        #[arg(long, default_value = "increments")]
        out: PathBuf,
        /// thread-count override
        #[arg(long)]
        threads: Option<usize>,
    },
    /// Evaluate estimators on one increment CSV (columns: index,increment)
    Estimate {
        /// increments CSV file
        increments: PathBuf,
        /// comma-separated estimators: trqv,pb,nb,ideal1,ideal2,jt,jt53,bipower
        #[arg(long, default_value = "trqv,pb,nb")]
        estimators: String,
        /// fixed threshold; default derives sigma_BV h^{5/12}
        #[arg(long)]
        epsilon: Option<f64>,
        /// time horizon the series spans (sets h = t_horizon / n)
        #[arg(long, default_value_t = 1.0)]
        t_horizon: f64,
        #[arg(long, default_value_t = 1.45)]
        zeta1: f64,
        #[arg(long, default_value_t = 1.2)]
        zeta2: f64,
        #[arg(long, default_value_t = 0.6)]
        p1: f64,
        #[arg(long, default_value_t = 0.75)]
        p2: f64,
        /// frequency for the characteristic-function estimators
        #[arg(long)]
        u: Option<f64>,
        #[arg(long, default_value_t = 0.5)]
        p0: f64,
        #[arg(long, default_value_t = 1.5)]
        zeta: f64,
        /// output file; stdout when absent
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, default_value = "csv")]
        format: String,
    },
    /// Reproduce a built-in study table (ids 1..=8)
    Table {
        table_id: usize,
        #[arg(long, default_value_t = 1000)]
        paths: usize,
        #[arg(long, default_value_t = 20260810)]
        seed: u64,
        #[arg(long)]
        threads: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, default_value = "csv")]
        format: String,
    },
    /// Run the expansion validation suite
    Validate {
        #[arg(long, default_value = "default")]
        battery: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn main() {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => {}
        Err(e) => {
            eprintln!("error: {e}");
            std::process::exit(e.exit_code());
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Simulate {
            config,
            paths,
            seed,
            out,
            threads,
        } => cmd_simulate(&config, paths, seed, &out, threads),
        Command::Estimate {
            increments,
            estimators,
            epsilon,
            t_horizon,
            zeta1,
            zeta2,
            p1,
            p2,
            u,
            p0,
            zeta,
            out,
            format,
        } => {
            let debias = DebiasConfig {
                zeta1,
                zeta2,
                p1,
                p2,
                ..DebiasConfig::default()
            };
            let jt = JtConfig {
                zeta,
                p0,
                u,
                ln_abs: false,
            };
            cmd_estimate(
                &increments,
                &estimators,
                epsilon,
                t_horizon,
                &debias,
                &jt,
                out.as_deref(),
                &format,
            )
        }
        Command::Table {
            table_id,
            paths,
            seed,
            threads,
            out,
            format,
        } => cmd_table(table_id, paths, seed, threads, out.as_deref(), &format),
        Command::Validate { battery, out } => cmd_validate(&battery, out.as_deref()),
    }
}

fn read_file(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::io(path.display().to_string(), e))
}

fn write_file(path: &Path, content: &str) -> Result<()> {
    std::fs::write(path, content).map_err(|e| Error::io(path.display().to_string(), e))
}

fn emit(out: Option<&Path>, content: &str) -> Result<()> {
    match out {
        Some(p) => write_file(p, content),
        None => {
            print!("{content}");
            std::io::stdout().flush().ok();
            Ok(())
        }
    }
}

fn cmd_simulate(
    config: &Path,
    paths: Option<usize>,
    seed: Option<u64>,
    out: &Path,
    threads: Option<usize>,
) -> Result<()> {
    let mut cfg = ExperimentConfig::from_toml(&read_file(config)?)?;
    if let Some(p) = paths {
        cfg.run.n_paths = p;
    }
    if let Some(s) = seed {
        cfg.run.master_seed = s;
    }
    if let Some(t) = threads {
        cfg.run.threads = Some(t);
    }
    let model = cfg.model.build()?;
    let grid = SamplingGrid::new(cfg.grid.t_horizon, cfg.grid.n)?;
    let rng = RngAlgorithm::parse(&cfg.run.rng_algorithm)?;
    let scheme = cfg.scheme.build(&model, rng)?;
    let sim = Simulator::new(&model, &grid, &scheme)?;

    std::fs::create_dir_all(out).map_err(|e| Error::io(out.display().to_string(), e))?;
    // allow a zero-path request: manifest only
    let n_paths = if paths == Some(0) { 0 } else { cfg.run.n_paths };
    for path_index in 0..n_paths {
        let series = sim.path(cfg.run.master_seed, path_index as u64)?;
        let mut text = String::from("index,increment\n");
        for (i, x) in series.increments.iter().enumerate() {
            text.push_str(&format!("{i},{x}\n"));
        }
        let file = out.join(format!("path_{path_index:05}.csv"));
        write_file(&file, &text)?;
    }
    let manifest = format!(
        "# increment-series manifest\nscheme_id = {:?}\nmaster_seed = {}\nn_paths = {}\n\n[config]\n{}",
        scheme.id(),
        cfg.run.master_seed,
        n_paths,
        indent_config(&cfg.to_toml()?)
    );
    write_file(&out.join("manifest.toml"), &manifest)?;
    eprintln!("wrote {n_paths} series to {}", out.display());
    Ok(())
}

fn indent_config(toml_text: &str) -> String {
    // nest the config echo under [config] by prefixing table headers
    toml_text
        .lines()
        .map(|l| {
            if let Some(rest) = l.strip_prefix("[[") {
                format!("[[config.{rest}")
            } else if let Some(rest) = l.strip_prefix('[') {
                format!("[config.{rest}")
            } else {
                l.to_string()
            }
        })
        .collect::<Vec<_>>()
        .join("\n")
}

fn parse_increments_csv(text: &str, path: &Path) -> Result<Vec<f64>> {
    let mut out = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') || line.starts_with("index") {
            continue;
        }
        let value = line.rsplit(',').next().unwrap_or(line);
        let x: f64 = value.trim().parse().map_err(|_| {
            Error::InvalidConfig(format!(
                "{}:{}: cannot parse increment '{value}'",
                path.display(),
                lineno + 1
            ))
        })?;
        out.push(x);
    }
    if out.is_empty() {
        return Err(Error::InvalidConfig(format!(
            "{}: no increments found",
            path.display()
        )));
    }
    Ok(out)
}

#[allow(clippy::too_many_arguments)]
fn cmd_estimate(
    increments_path: &Path,
    estimators: &str,
    epsilon: Option<f64>,
    t_horizon: f64,
    debias: &DebiasConfig,
    jt: &JtConfig,
    out: Option<&Path>,
    format: &str,
) -> Result<()> {
    use levyvol::estimators as est;
    let format = ReportFormat::parse(format)?;
    let xs = parse_increments_csv(&read_file(increments_path)?, increments_path)?;
    let n = xs.len();
    let h = t_horizon / n as f64;
    let eps = match epsilon {
        Some(e) => e,
        None => est::threshold(&est::ThresholdPolicy::bipower_five_twelfths(), &xs, h, None)?,
    };

    let mut rows: Vec<(String, f64, String)> = Vec::new();
    for name in estimators.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let (value, diag): (f64, String) = match name {
            "trqv" => (est::trqv(&xs, eps), format!("epsilon={}", fmt_sig(eps, 6))),
            "bipower" => (est::bipower(&xs)?, String::new()),
            "pb" => {
                let r = est::debias_pb(&xs, eps, debias);
                (r.value, diag_string(&r.diagnostics))
            }
            "nb" => {
                let r = est::debias_nb(&xs, eps, debias);
                (r.value, diag_string(&r.diagnostics))
            }
            "ideal1" => {
                let r = est::debias_ideal_one(&xs, eps, debias.zeta1)?;
                (r.value, diag_string(&r.diagnostics))
            }
            "ideal2" => {
                let r = est::debias_ideal_two(&xs, eps, debias.zeta2, debias.zeta1)?;
                (r.value, diag_string(&r.diagnostics))
            }
            "jt" => {
                let u = match jt.u {
                    Some(u) => u,
                    None => (1.0 / h).ln().powf(-1.0 / 30.0) / est::bipower(&xs)?.sqrt(),
                };
                (est::jt_base(&xs, h, u, jt.ln_abs)?, format!("u={}", fmt_sig(u, 6)))
            }
            "jt53" => {
                let r = est::jt_53(&xs, h, jt)?;
                (r.value, diag_string(&r.diagnostics))
            }
            other => {
                return Err(Error::InvalidConfig(format!("unknown estimator '{other}'")))
            }
        };
        rows.push((name.to_string(), value, diag));
    }

    let text = match format {
        ReportFormat::Csv => {
            let mut t = String::from("estimator,value,diagnostics\n");
            for (name, value, diag) in &rows {
                t.push_str(&format!("{name},{},{diag}\n", fmt_sig(*value, 6)));
            }
            t
        }
        ReportFormat::Markdown => {
            let mut t = String::from("| estimator | value | diagnostics |\n|---|---|---|\n");
            for (name, value, diag) in &rows {
                t.push_str(&format!("| {name} | {} | {diag} |\n", fmt_sig(*value, 6)));
            }
            t
        }
    };
    emit(out, &text)
}

fn diag_string(d: &levyvol::estimators::Diagnostics) -> String {
    let mut parts = vec![format!("epsilon={}", fmt_sig(d.epsilon, 6))];
    if let Some(e1) = d.eta1 {
        parts.push(format!("eta1={}", fmt_sig(e1, 6)));
    }
    if let Some(e2) = d.eta2 {
        parts.push(format!("eta2={}", fmt_sig(e2, 6)));
    }
    if d.fallback_count > 0 {
        parts.push(format!("fallbacks={}", d.fallback_count));
    }
    if d.clamped {
        parts.push("clamped".into());
    }
    if d.degenerate {
        parts.push("degenerate".into());
    }
    if d.exhausted {
        parts.push("exhausted".into());
    }
    parts.join(";")
}

fn cmd_table(
    table_id: usize,
    paths: usize,
    seed: u64,
    threads: Option<usize>,
    out: Option<&Path>,
    format: &str,
) -> Result<()> {
    let format = ReportFormat::parse(format)?;
    let mut cfg = table_config(table_id, paths, seed)?;
    cfg.run.threads = threads;
    let report = run_experiment(&cfg)?;
    eprintln!(
        "table {table_id}: {} paths in {:.1}s on {} threads (env {THREADS_ENV} overrides)",
        paths, report.wall_seconds, report.threads_used
    );
    emit(out, &write_report(&report, format))
}

fn cmd_validate(battery: &str, out: Option<&Path>) -> Result<()> {
    let battery = Battery::parse(battery)?;
    let rows = run_validation_suite(battery)?;
    emit(out, &write_validation_report(&rows))
}
