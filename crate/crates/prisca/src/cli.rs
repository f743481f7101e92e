//! Command-line front end.
//!
//! `detect` ingests series files and prints detection reports; `benchmark`
//! runs the synthetic study and prints a metrics row. Exit codes: 0 success,
//! 1 usage, 2 data error, 3 fit did not converge (report still written).
//! With several inputs the worst code wins, in that order.

use std::collections::HashMap;
use std::path::{Path, PathBuf};
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use clap::{ArgGroup, Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;

use crate::config::ModelConfig;
use crate::engine::{self, PriscaFit};
use crate::error::Result;
use crate::ingest::ingest;
use crate::preprocess::{ar_residualize, difference_detrend};
use crate::report::{
    to_csv, to_json, to_json_many, ArEcho, AutoEcho, ConfigEcho, EffectReport, EffectStatus,
    InputDigest, Meta, ReportDocument,
};
use crate::simbench::{run_benchmark, BenchmarkMethod, SimulationSpec};
use crate::summaries::{credible_set, detect, map_estimate, ChangePointReport, CredibleSet};

#[derive(Parser)]
#[command(
    name = "prisca",
    version,
    about = "Detects change points in the variance of a Gaussian sequence"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Detect variance changes in one or more series files
    Detect(DetectArgs),
    /// Run the synthetic benchmark and print one metrics row
    Benchmark(BenchmarkArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum MethodArg {
    /// Fixed effect count T/30
    Prisca,
    /// Automatic effect-count search
    Auto,
    /// Effect count set to the true change count
    Oracle,
}

#[derive(Args)]
#[command(group(ArgGroup::new("effects").required(true).args(["l", "auto"])))]
struct DetectArgs {
    /// Input files: one value per line, or time,value rows
    #[arg(required = true)]
    inputs: Vec<PathBuf>,
    /// Number of effects, the maximum count of detectable changes
    #[arg(long = "L", value_name = "COUNT")]
    l: Option<usize>,
    /// Choose the effect count automatically
    #[arg(long)]
    auto: bool,
    /// Gamma prior shape and rate for each precision scaling
    #[arg(long, default_value_t = 1e-3)]
    a0: f64,
    /// Credible level for the reported sets
    #[arg(long, default_value_t = 0.9)]
    p: f64,
    /// Convergence tolerance on the objective change between effect updates
    #[arg(long, default_value_t = 1e-3)]
    epsilon: f64,
    /// Sweep limit
    #[arg(long = "max-iter", default_value_t = 1000)]
    max_iter: usize,
    /// First-difference the series before fitting (removes level and trend;
    /// reported indices refer to the differenced axis)
    #[arg(long)]
    diff: bool,
    /// Remove autoregressive structure of this order before detection
    #[arg(long, value_name = "ORDER")]
    ar: Option<usize>,
    /// Include each effect's full posterior location weights in the report
    #[arg(long = "emit-alpha")]
    emit_alpha: bool,
    /// Write a t,effect,alpha,in_credible_set table for plotting
    /// (single input only)
    #[arg(long = "plot-data", value_name = "PATH")]
    plot_data: Option<PathBuf>,
    /// Reserved; detection is deterministic and ignores it
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Drop timing and timestamp metadata so reports compare byte-identical
    #[arg(long = "no-meta")]
    no_meta: bool,
    /// Write the report here instead of standard output
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
    /// Worker threads for multi-file runs; 0 uses all cores
    #[arg(long, default_value_t = 0)]
    jobs: usize,
}

#[derive(Args)]
struct BenchmarkArgs {
    /// Series length
    #[arg(long = "T", value_name = "LENGTH")]
    t_len: usize,
    /// Replicates to run
    #[arg(long, default_value_t = 300)]
    reps: usize,
    /// Base seed; replicate r uses stream r
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Effect-count rule
    #[arg(long, value_enum)]
    method: MethodArg,
    /// Worker threads; 0 uses all cores
    #[arg(long, default_value_t = 0)]
    jobs: usize,
    /// Write the metrics row here instead of standard output
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
}

/// Parses process arguments, runs the chosen command, and returns the exit
/// code for `std::process::exit`.
pub fn run() -> i32 {
    run_from(std::env::args_os())
}

fn run_from<I, S>(args: I) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return code;
        }
    };
    match cli.command {
        Command::Detect(args) => cmd_detect(args),
        Command::Benchmark(args) => cmd_benchmark(args),
    }
}

fn usage_error(message: &str) -> i32 {
    eprintln!("error: {message}");
    1
}

fn with_pool<T: Send>(jobs: usize, work: impl FnOnce() -> T + Send) -> std::result::Result<T, String> {
    if jobs == 0 {
        return Ok(work());
    }
    rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map(|pool| pool.install(work))
        .map_err(|e| e.to_string())
}

fn cmd_detect(args: DetectArgs) -> i32 {
    let config = ModelConfig {
        a0: args.a0,
        l: args.l.unwrap_or(1),
        p: args.p,
        epsilon: args.epsilon,
        max_iter: args.max_iter,
        ..ModelConfig::default()
    };
    if let Err(e) = config.validate(1) {
        return usage_error(&e.to_string());
    }
    if args.auto && args.ar.is_some() {
        return usage_error("--ar needs a fixed --L; it cannot combine with --auto");
    }
    if args.plot_data.is_some() && args.inputs.len() > 1 {
        return usage_error("--plot-data works with a single input file");
    }
    let _ = args.seed; // Reserved flag; accepted for forward compatibility.

    let mut inputs = args.inputs.clone();
    inputs.sort();

    let worker = |path: &PathBuf| process_one(path, &args, &config);
    let results: Vec<Result<(ReportDocument, bool)>> =
        match with_pool(args.jobs, || inputs.par_iter().map(worker).collect()) {
            Ok(r) => r,
            Err(e) => return usage_error(&e),
        };

    let mut docs = Vec::new();
    let mut data_error = false;
    let mut nonconverged = false;
    for (path, result) in inputs.iter().zip(results) {
        match result {
            Ok((doc, converged)) => {
                if !converged {
                    nonconverged = true;
                }
                docs.push(doc);
            }
            Err(e) => {
                data_error = true;
                eprintln!("error: {}: {e}", path.display());
            }
        }
    }

    let body = if docs.is_empty() {
        String::new()
    } else if inputs.len() == 1 {
        match args.format {
            Format::Json => to_json(&docs[0]),
            Format::Csv => to_csv(&docs[0]),
        }
    } else {
        match args.format {
            Format::Json => to_json_many(&docs),
            Format::Csv => docs.iter().map(to_csv).collect::<Vec<_>>().join("\n"),
        }
    };
    match &args.out {
        Some(path) => {
            if let Err(e) = std::fs::write(path, body) {
                eprintln!("error: {}: {e}", path.display());
                data_error = true;
            }
        }
        None => print!("{body}"),
    }

    if data_error {
        2
    } else if nonconverged {
        3
    } else {
        0
    }
}

fn process_one(
    path: &Path,
    args: &DetectArgs,
    config: &ModelConfig,
) -> Result<(ReportDocument, bool)> {
    let started = Instant::now();
    let mut series = ingest(path)?;
    let mut preprocessing: Vec<String> = Vec::new();
    let mut axis = "original";
    if args.diff {
        series = difference_detrend(&series)?;
        preprocessing.push("difference".into());
        axis = "differenced";
    }

    let mut ar_echo = None;
    let mut auto_echo = None;
    let mode;
    let fitted: PriscaFit = if let Some(order) = args.ar {
        let out = ar_residualize(&series, order, config)?;
        preprocessing.push(format!("ar({order})"));
        axis = "ar-residual";
        series = out.residuals;
        ar_echo = Some(ArEcho {
            order: out.spec.order,
            coefficients: out.spec.coefficients,
            std_errors: out.coef_std_errors,
            outer_iterations: out.outer_iterations,
        });
        mode = "fixed";
        out.fit
    } else if args.auto {
        let out = engine::auto_fit(&series, config)?;
        auto_echo = Some(AutoEcho { k_hat_trace: out.k_hat_trace, capped: out.capped });
        mode = "auto";
        out.fit
    } else {
        mode = "fixed";
        engine::fit(&series, config)?
    };
    let report = detect(&fitted, config.p);

    if let Some(plot_path) = &args.plot_data {
        std::fs::write(plot_path, plot_rows(&fitted, &report))?;
    }

    let kept: HashMap<usize, &CredibleSet> =
        report.detections.iter().map(|d| (d.effect, &d.credible_set)).collect();
    let effects = fitted
        .effects
        .iter()
        .enumerate()
        .map(|(idx, effect)| {
            let status = if kept.contains_key(&idx) {
                EffectStatus::Kept
            } else if report.discarded_effects.contains(&idx) {
                EffectStatus::Diffuse
            } else {
                EffectStatus::Overlap
            };
            EffectReport {
                effect: idx,
                point_estimate: map_estimate(&effect.alpha).expect("fit is nonempty"),
                credible_set: kept
                    .get(&idx)
                    .map(|cs| (*cs).clone())
                    .unwrap_or_else(|| credible_set(&effect.alpha, config.p)),
                status,
                alpha: args.emit_alpha.then(|| effect.alpha.clone()),
            }
        })
        .collect();

    let converged = fitted.converged;
    let doc = ReportDocument {
        input: InputDigest {
            source: path.display().to_string(),
            length: series.len(),
            num_samples: series.num_samples(),
            preprocessing,
            axis: axis.into(),
        },
        config: ConfigEcho {
            a0: config.a0,
            sigma2: config.sigma2,
            l: fitted.effects.len(),
            p: config.p,
            epsilon: config.epsilon,
            max_iter: config.max_iter,
            mode: mode.into(),
        },
        k_hat: report.k_hat,
        converged,
        effects,
        elbo_trace: fitted.elbo_trace,
        auto: auto_echo,
        ar: ar_echo,
        meta: (!args.no_meta).then(|| Meta {
            timing_seconds: started.elapsed().as_secs_f64(),
            generated_at: SystemTime::now()
                .duration_since(UNIX_EPOCH)
                .map(|d| d.as_secs())
                .unwrap_or(0),
        }),
    };
    Ok((doc, converged))
}

fn plot_rows(fitted: &PriscaFit, report: &ChangePointReport) -> String {
    let kept: HashMap<usize, &CredibleSet> =
        report.detections.iter().map(|d| (d.effect, &d.credible_set)).collect();
    let mut out = String::from("t,effect,alpha,in_credible_set\n");
    for (idx, effect) in fitted.effects.iter().enumerate() {
        for (t0, alpha) in effect.alpha.iter().enumerate() {
            let t = t0 + 1;
            let inside = kept.get(&idx).is_some_and(|cs| cs.contains(t));
            out.push_str(&format!("{t},{idx},{alpha},{}\n", u8::from(inside)));
        }
    }
    out
}

fn cmd_benchmark(args: BenchmarkArgs) -> i32 {
    let spec = match SimulationSpec::new(args.t_len) {
        Ok(spec) => spec.with_seed(args.seed).with_replicates(args.reps),
        Err(e) => {
            eprintln!("error: {e}");
            return 2;
        }
    };
    let (method, name) = match args.method {
        MethodArg::Prisca => (BenchmarkMethod::Prisca, "prisca"),
        MethodArg::Auto => (BenchmarkMethod::Auto, "auto"),
        MethodArg::Oracle => (BenchmarkMethod::Oracle, "oracle"),
    };
    let config = ModelConfig::default();
    let metrics = match with_pool(args.jobs, || run_benchmark(&spec, method, &config)) {
        Ok(Ok(m)) => m,
        Ok(Err(e)) => {
            eprintln!("error: {e}");
            return 2;
        }
        Err(e) => return usage_error(&e),
    };
    if metrics.failures > 0 {
        eprintln!("warning: {} of {} replicates failed", metrics.failures, metrics.replicates);
    }
    let body = format!(
        "t,method,bias,hausdorff,time,length,cond_cov\n{},{},{},{},{},{},{}\n",
        args.t_len,
        name,
        metrics.bias,
        metrics.hausdorff,
        metrics.mean_runtime_seconds,
        metrics.mean_set_length,
        metrics.conditional_coverage,
    );
    match &args.out {
        Some(path) => {
            if let Err(e) = std::fs::write(path, body) {
                eprintln!("error: {}: {e}", path.display());
                return 2;
            }
        }
        None => print!("{body}"),
    }
    0
}
