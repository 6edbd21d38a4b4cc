use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};
use mcomplete::bench::{
    check_methods, parse_beta_grid, run_beta_sweep, run_movielens, run_synth, timed_solve, trace_csv, write_file,
    BetaSweepSpec, Method, MovieLensSpec, SynthSpec,
};
use mcomplete::config_file::load_config;
use mcomplete::formats::{load_instance, load_observed, save_instance, sidecar_path};
use mcomplete::movielens::{load_movielens, MovieLensFormat};
use mcomplete_core::{gen_synthetic, rer, SolverConfig, TolBundle};

#[derive(Parser, Debug)]
#[command(name = "mcomplete", version, about = "Low-rank matrix completion experiments")]
struct Cli {
    /// Directory for result files
    #[arg(long, global = true, env = "MCOMPLETE_OUT_DIR", default_value = "results")]
    out_dir: PathBuf,

    /// Worker threads for independent runs
    #[arg(long, global = true, default_value_t = 1)]
    threads: usize,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Generate a synthetic instance file and its JSON sidecar
    Gen(GenArgs),
    /// Run solvers on synthetic instances over several seeds
    Synth(SynthArgs),
    /// Phase-one iteration counts over a grid of momentum parameters
    BetaSweep(BetaSweepArgs),
    /// Run solvers on a MovieLens rating file
    Movielens(MovieLensArgs),
    /// Per-iteration trace of a single solve
    Trace(TraceArgs),
}

#[derive(Args, Debug, Clone)]
struct SolverArgs {
    /// Tolerance preset: paper-synth or paper-ml
    #[arg(long)]
    tol_bundle: Option<String>,
    /// `key = value` file applied on top of the preset
    #[arg(long)]
    config: Option<PathBuf>,
    /// Phase-one budget
    #[arg(long)]
    w: Option<usize>,
    /// Phase-two and baseline budget
    #[arg(long)]
    it_max: Option<usize>,
    #[arg(long)]
    eps_rho: Option<f64>,
    /// Regularization for soft_impute
    #[arg(long)]
    lambda: Option<f64>,
}

impl SolverArgs {
    fn build(&self, r: usize, default_bundle: TolBundle, beta: Option<f64>) -> anyhow::Result<SolverConfig> {
        let bundle = match &self.tol_bundle {
            Some(name) => TolBundle::from_name(name)
                .with_context(|| format!("unknown tolerance bundle {name:?} (expected paper-synth or paper-ml)"))?,
            None => default_bundle,
        };
        let mut cfg = SolverConfig::with_bundle(r, bundle);
        if let Some(path) = &self.config {
            cfg = load_config(path, cfg).with_context(|| format!("reading {}", path.display()))?;
        }
        cfg.r = r;
        if let Some(b) = beta {
            cfg.beta = b;
        }
        if let Some(w) = self.w {
            cfg.w = w;
        }
        if let Some(it) = self.it_max {
            cfg.it_max = it;
        }
        if let Some(e) = self.eps_rho {
            cfg.eps_rho = e;
        }
        if self.lambda.is_some() {
            cfg.lambda = self.lambda;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Args, Debug)]
struct GenArgs {
    #[arg(long)]
    n: usize,
    #[arg(long)]
    r: usize,
    /// Fraction of deleted entries
    #[arg(long)]
    p: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output file; the sidecar goes next to it with a .json extension
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct SynthArgs {
    #[arg(long)]
    n: usize,
    #[arg(long)]
    r: usize,
    /// Fraction of deleted entries
    #[arg(long)]
    p: f64,
    /// Number of seeds (instances)
    #[arg(long, default_value_t = 5)]
    seeds: u64,
    /// First seed; runs use seed, seed + 1, ...
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_delimiter = ',', default_value = "two_phase,frsi,svt,fpc")]
    methods: Vec<Method>,
    #[arg(long, default_value_t = 2.0)]
    beta: f64,
    #[command(flatten)]
    solver: SolverArgs,
}

#[derive(Args, Debug)]
struct BetaSweepArgs {
    /// Matrix sizes, comma-separated
    #[arg(long, value_delimiter = ',', default_value = "1000")]
    n: Vec<usize>,
    #[arg(long, default_value_t = 5)]
    r: usize,
    /// Deleted fractions, comma-separated
    #[arg(long, value_delimiter = ',', default_value = "0.92")]
    p: Vec<f64>,
    /// Grid such as `2..30` or `2,5,19`
    #[arg(long, default_value = "2..30", value_parser = |s: &str| parse_beta_grid(s).map(BetaGrid))]
    beta: BetaGrid,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    solver: SolverArgs,
}

#[derive(Clone, Debug)]
struct BetaGrid(Vec<f64>);

#[derive(Args, Debug)]
struct MovieLensArgs {
    /// Rating file (u.data or ratings.dat)
    #[arg(long)]
    dataset: PathBuf,
    #[arg(long, default_value = "ml100k")]
    format: MovieLensFormat,
    /// Target rank; a comma-separated list runs a rank sweep
    #[arg(long, value_delimiter = ',', default_value = "130")]
    r: Vec<usize>,
    #[arg(long, default_value_t = 2.0)]
    beta: f64,
    #[arg(long, value_delimiter = ',', default_value = "two_phase")]
    methods: Vec<Method>,
    /// Fraction of ratings held out from the solvers
    #[arg(long, default_value_t = 0.5)]
    holdout: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Keep the matrix at the largest ids seen instead of the published size
    #[arg(long)]
    observed_shape: bool,
    #[command(flatten)]
    solver: SolverArgs,
}

#[derive(Args, Debug)]
struct TraceArgs {
    #[arg(long)]
    method: Method,
    /// Synthetic instance size (ignored with --input or --dataset)
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    r: usize,
    #[arg(long)]
    p: Option<f64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Observed-entry file written by `gen` or by hand
    #[arg(long, conflicts_with = "dataset")]
    input: Option<PathBuf>,
    /// MovieLens rating file
    #[arg(long)]
    dataset: Option<PathBuf>,
    #[arg(long, default_value = "ml100k")]
    format: MovieLensFormat,
    #[arg(long, default_value_t = 2.0)]
    beta: f64,
    /// Record the Fejér slack against the known ground truth (synthetic only)
    #[arg(long)]
    ground_truth: bool,
    #[command(flatten)]
    solver: SolverArgs,
}

/// Solver failures: the run finished but some rows carry `status = error`.
struct RunsFailed;

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn dispatch(cli: &Cli) -> anyhow::Result<bool> {
    let out = &cli.out_dir;
    let ok = match &cli.command {
        Command::Gen(a) => cmd_gen(a)?,
        Command::Synth(a) => cmd_synth(a, out, cli.threads)?,
        Command::BetaSweep(a) => cmd_beta_sweep(a, out, cli.threads)?,
        Command::Movielens(a) => cmd_movielens(a, out, cli.threads)?,
        Command::Trace(a) => cmd_trace(a, out)?,
    };
    Ok(ok.is_ok())
}

fn report_failures(failures: &[String]) -> Result<(), RunsFailed> {
    for f in failures {
        eprintln!("run failed: {f}");
    }
    if failures.is_empty() {
        Ok(())
    } else {
        Err(RunsFailed)
    }
}

fn print_written(paths: &[PathBuf]) {
    for p in paths {
        println!("wrote {}", p.display());
    }
}

fn cmd_gen(a: &GenArgs) -> anyhow::Result<Result<(), RunsFailed>> {
    let inst = gen_synthetic(a.n, a.r, a.p, a.seed)?;
    if let Some(dir) = a.out.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    save_instance(&a.out, &inst)?;
    print_written(&[a.out.clone(), sidecar_path(&a.out)]);
    Ok(Ok(()))
}

fn cmd_synth(a: &SynthArgs, out: &Path, threads: usize) -> anyhow::Result<Result<(), RunsFailed>> {
    if a.seeds == 0 {
        bail!("--seeds must be at least 1");
    }
    check_methods(&a.methods).map_err(anyhow::Error::msg)?;
    let config = a.solver.build(a.r, TolBundle::PaperSynth, Some(a.beta))?;
    let spec = SynthSpec {
        n: a.n,
        r: a.r,
        p: a.p,
        seeds: (a.seed..a.seed + a.seeds).collect(),
        methods: a.methods.clone(),
        config,
        threads,
    };
    let report = run_synth(&spec)?;
    for m in report.summary().methods {
        println!(
            "{:<12} completed {}/{}  median IT {}  median Rer {}  median time {} s",
            m.method.name(),
            m.completed,
            m.runs,
            fmt_opt(m.median_it),
            fmt_opt(m.median_rer),
            fmt_opt(m.median_time_s),
        );
    }
    print_written(&report.write(out)?);
    Ok(report_failures(&report.failures))
}

fn fmt_opt(x: Option<f64>) -> String {
    x.map_or_else(|| "-".into(), |v| format!("{v:.4e}"))
}

fn cmd_beta_sweep(a: &BetaSweepArgs, out: &Path, threads: usize) -> anyhow::Result<Result<(), RunsFailed>> {
    let mut config = a.solver.build(a.r, TolBundle::PaperSynth, None)?;
    if a.solver.eps_rho.is_none() {
        config.eps_rho = 1e-8;
    }
    if a.solver.w.is_none() {
        config.w = 1000;
    }
    let mut failures = Vec::new();
    for &n in &a.n {
        for &p in &a.p {
            let spec = BetaSweepSpec { n, r: a.r, p, seed: a.seed, betas: a.beta.0.clone(), config: config.clone(), threads };
            let report = run_beta_sweep(&spec)?;
            let best = report.rows.iter().filter_map(|r| r.iterations.map(|it| (it, r.beta))).min_by_key(|&(it, _)| it);
            if let Some((it, beta)) = best {
                println!("n={n} r={} p={p}: fewest iterations {it} at beta {beta}", a.r);
            }
            print_written(&report.write(out)?);
            failures.extend(report.failures);
        }
    }
    Ok(report_failures(&failures))
}

fn cmd_movielens(a: &MovieLensArgs, out: &Path, threads: usize) -> anyhow::Result<Result<(), RunsFailed>> {
    check_methods(&a.methods).map_err(anyhow::Error::msg)?;
    let first = *a.r.first().context("--r needs at least one rank")?;
    let config = a.solver.build(first, TolBundle::PaperMl, Some(a.beta))?;
    let spec = MovieLensSpec {
        dataset: a.dataset.clone(),
        format: a.format,
        methods: a.methods.clone(),
        ranks: a.r.clone(),
        config,
        holdout: a.holdout,
        seed: a.seed,
        canonical_shape: !a.observed_shape,
        threads,
    };
    let report = run_movielens(&spec)?;
    println!("{} x {} matrix, {} ratings, {} used for training", report.shape.0, report.shape.1, report.ratings, report.train);
    for row in &report.rows {
        println!(
            "{:<12} r {:<4} IT {}  RMSE (all) {}  RMSE (held out) {}  status {}",
            row.method.name(),
            row.r,
            row.iterations.map_or_else(|| "-".into(), |v| v.to_string()),
            fmt_opt(row.rmse_omega_hat),
            fmt_opt(row.rmse_test),
            row.status
        );
    }
    print_written(&report.write(out)?);
    Ok(report_failures(&report.failures))
}

fn cmd_trace(a: &TraceArgs, out: &Path) -> anyhow::Result<Result<(), RunsFailed>> {
    let config = a.solver.build(a.r, TolBundle::PaperSynth, Some(a.beta))?;
    let (obs, truth) = if let Some(path) = &a.dataset {
        if a.ground_truth {
            bail!("--ground-truth needs a synthetic instance; rating files have none");
        }
        (load_movielens(path, a.format).with_context(|| format!("loading {}", path.display()))?, None)
    } else if let Some(path) = &a.input {
        if sidecar_path(path).exists() {
            let inst = load_instance(path).with_context(|| format!("loading {}", path.display()))?;
            (inst.obs, Some(inst.ground_truth))
        } else if a.ground_truth {
            bail!("--ground-truth needs the sidecar {} next to the input", sidecar_path(path).display());
        } else {
            (load_observed(path).with_context(|| format!("loading {}", path.display()))?, None)
        }
    } else {
        let (Some(n), Some(p)) = (a.n, a.p) else {
            bail!("give --n and --p for a synthetic instance, or --input / --dataset");
        };
        let inst = gen_synthetic(n, a.r, p, a.seed)?;
        (inst.obs, Some(inst.ground_truth))
    };
    let monitor = if a.ground_truth { truth.as_ref() } else { None };
    let timed = timed_solve(a.method, &obs, &config, monitor);
    let res = match timed.result {
        Ok(res) => res,
        Err(e) => {
            eprintln!("run failed: {}: {e}", a.method);
            return Ok(Err(RunsFailed));
        }
    };
    std::fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
    let path = out.join(format!("trace_{}.csv", a.method.name()));
    write_file(&path, &trace_csv(&res.trace, a.ground_truth)?)?;
    print!("{}: {} iterations, status {}, rank {}", a.method, res.iterations, res.status.as_str(), res.recovered_rank);
    if let Some(t) = &truth {
        print!(", Rer {:.4e}", rer(t, &res.x)?);
    }
    println!();
    print_written(&[path]);
    Ok(Ok(()))
}
