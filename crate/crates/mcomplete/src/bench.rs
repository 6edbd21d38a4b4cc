//! Experiment runners behind the `mcomplete` subcommands and their CSV/JSON
//! outputs.
//!
//! Every runner returns its rows in a fixed order (method as requested, then
//! seed or `β` ascending) regardless of how many worker threads ran them.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use mcomplete_core::solvers::{phase_one, SolveContext};
use mcomplete_core::{
    fpc, frsi, gen_synthetic, rer, rmse, soft_impute, svt, two_phase, FactoredMatrix, ObservedMatrix, RatingsDataset,
    SolveResult, SolveTrace, SolverConfig,
};
use rayon::prelude::*;
use serde::Serialize;

use crate::clock::InstantClock;
use crate::error::{Error, Result};
use crate::movielens::{load_movielens, MovieLensFormat};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Method {
    TwoPhase,
    Frsi,
    Svt,
    Fpc,
    SoftImpute,
}

impl Method {
    pub const ALL: [Method; 5] = [Method::TwoPhase, Method::Frsi, Method::Svt, Method::Fpc, Method::SoftImpute];

    pub fn name(self) -> &'static str {
        match self {
            Method::TwoPhase => "two_phase",
            Method::Frsi => "frsi",
            Method::Svt => "svt",
            Method::Fpc => "fpc",
            Method::SoftImpute => "soft_impute",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl Serialize for Method {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(self.name())
    }
}

impl FromStr for Method {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        Method::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| format!("unknown method {s:?} (expected one of two_phase, frsi, svt, fpc, soft_impute)"))
    }
}

/// Rejects an empty list and repeated methods.
pub fn check_methods(methods: &[Method]) -> Result<(), String> {
    if methods.is_empty() {
        return Err("no methods given".into());
    }
    for (k, m) in methods.iter().enumerate() {
        if methods[..k].contains(m) {
            return Err(format!("method {m} listed twice"));
        }
    }
    Ok(())
}

/// Runs `method` on `obs` with the parameters derived from `cfg`.
pub fn solve(method: Method, obs: &ObservedMatrix, cfg: &SolverConfig, ctx: &SolveContext<'_>) -> mcomplete_core::Result<SolveResult> {
    match method {
        Method::TwoPhase => two_phase(obs, cfg, ctx),
        Method::Frsi => frsi(obs, &cfg.frsi(), ctx),
        Method::Svt => svt(obs, &cfg.svt(obs), ctx),
        Method::Fpc => fpc(obs, &cfg.fpc(), ctx),
        Method::SoftImpute => match cfg.soft_impute() {
            Some(p) => soft_impute(obs, &p, ctx),
            None => Err(mcomplete_core::Error::InvalidArgument("soft_impute needs lambda".into())),
        },
    }
}

/// A solve together with its wall-clock duration.
pub struct Timed {
    pub result: mcomplete_core::Result<SolveResult>,
    pub seconds: f64,
}

pub fn timed_solve(
    method: Method,
    obs: &ObservedMatrix,
    cfg: &SolverConfig,
    ground_truth: Option<&FactoredMatrix>,
) -> Timed {
    let clock = InstantClock::new();
    let mut ctx = SolveContext::default().with_clock(&clock);
    ctx.ground_truth = ground_truth;
    let start = Instant::now();
    let result = solve(method, obs, cfg, &ctx);
    Timed { result, seconds: start.elapsed().as_secs_f64() }
}

fn pool(threads: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads.max(1))
        .build()
        .map_err(|e| Error::Mismatch(format!("cannot start worker threads: {e}")))
}

pub(crate) fn real(x: f64) -> String {
    format!("{x:e}")
}

fn opt_real(x: Option<f64>) -> String {
    x.map(real).unwrap_or_default()
}

fn opt_count(x: Option<usize>) -> String {
    x.map(|v| v.to_string()).unwrap_or_default()
}

/// Status column value for a failed run.
pub const STATUS_ERROR: &str = "error";

/// Serializes a header and records into CSV bytes.
pub fn csv_bytes(header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header)?;
    for row in rows {
        w.write_record(&row)?;
    }
    w.into_inner().map_err(|e| Error::Mismatch(format!("csv buffer: {e}")))
}

pub fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    std::fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut bytes = serde_json::to_vec_pretty(value)?;
    bytes.push(b'\n');
    write_file(path, &bytes)
}

fn unix_time() -> u64 {
    std::time::SystemTime::now().duration_since(std::time::UNIX_EPOCH).map_or(0, |d| d.as_secs())
}

/// Run metadata kept out of the CSV tables.
#[derive(Clone, Debug, Serialize)]
pub struct RunMeta {
    pub command: String,
    pub started_unix_s: u64,
    pub wall_s: f64,
    pub threads: usize,
    pub config: String,
    pub failures: Vec<String>,
}

impl RunMeta {
    fn new(command: &str, started: Instant, started_unix_s: u64, threads: usize, cfg: &SolverConfig, failures: Vec<String>) -> Self {
        RunMeta {
            command: command.to_owned(),
            started_unix_s,
            wall_s: started.elapsed().as_secs_f64(),
            threads,
            config: crate::config_file::format_config(cfg),
            failures,
        }
    }
}

// ---------------------------------------------------------------- synth

#[derive(Clone, Debug)]
pub struct SynthSpec {
    pub n: usize,
    pub r: usize,
    pub p: f64,
    pub seeds: Vec<u64>,
    pub methods: Vec<Method>,
    pub config: SolverConfig,
    pub threads: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SynthRow {
    pub method: Method,
    pub n: usize,
    pub r: usize,
    pub p: f64,
    pub seed: u64,
    pub iterations: Option<usize>,
    pub time_s: Option<f64>,
    pub rer: Option<f64>,
    pub rank_hat: Option<usize>,
    pub status: String,
}

impl SynthRow {
    pub const HEADER: [&'static str; 10] = ["method", "n", "r", "p", "seed", "IT", "time_s", "Rer", "rank_hat", "status"];

    pub fn record(&self) -> Vec<String> {
        vec![
            self.method.name().to_owned(),
            self.n.to_string(),
            self.r.to_string(),
            self.p.to_string(),
            self.seed.to_string(),
            opt_count(self.iterations),
            opt_real(self.time_s),
            opt_real(self.rer),
            opt_count(self.rank_hat),
            self.status.clone(),
        ]
    }

    pub fn completed(&self) -> bool {
        self.status != STATUS_ERROR
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct MethodSummary {
    pub method: Method,
    pub runs: usize,
    pub completed: usize,
    pub converged: usize,
    pub median_it: Option<f64>,
    pub mean_it: Option<f64>,
    pub median_time_s: Option<f64>,
    pub mean_time_s: Option<f64>,
    pub median_rer: Option<f64>,
    pub mean_rer: Option<f64>,
    pub rank_hat: Vec<usize>,
}

#[derive(Clone, Debug, Serialize)]
pub struct SynthSummary {
    pub n: usize,
    pub r: usize,
    pub p: f64,
    pub seeds: Vec<u64>,
    pub methods: Vec<MethodSummary>,
}

pub struct SynthReport {
    pub spec: SynthSpec,
    pub rows: Vec<SynthRow>,
    pub failures: Vec<String>,
    pub meta: RunMeta,
}

pub fn median(values: &[f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let k = v.len() / 2;
    Some(if v.len() % 2 == 1 { v[k] } else { 0.5 * (v[k - 1] + v[k]) })
}

pub fn mean(values: &[f64]) -> Option<f64> {
    (!values.is_empty()).then(|| values.iter().sum::<f64>() / values.len() as f64)
}

impl SynthReport {
    pub fn all_completed(&self) -> bool {
        self.rows.iter().all(SynthRow::completed)
    }

    pub fn rows_for(&self, method: Method) -> impl Iterator<Item = &SynthRow> {
        self.rows.iter().filter(move |r| r.method == method)
    }

    pub fn csv(&self) -> Result<Vec<u8>> {
        csv_bytes(&SynthRow::HEADER, self.rows.iter().map(SynthRow::record))
    }

    pub fn summary(&self) -> SynthSummary {
        let methods = self
            .spec
            .methods
            .iter()
            .map(|&m| {
                let rows: Vec<&SynthRow> = self.rows_for(m).collect();
                let done: Vec<&&SynthRow> = rows.iter().filter(|r| r.completed()).collect();
                let its: Vec<f64> = done.iter().filter_map(|r| r.iterations).map(|v| v as f64).collect();
                let times: Vec<f64> = done.iter().filter_map(|r| r.time_s).collect();
                let rers: Vec<f64> = done.iter().filter_map(|r| r.rer).collect();
                MethodSummary {
                    method: m,
                    runs: rows.len(),
                    completed: done.len(),
                    converged: done.iter().filter(|r| r.status == "converged").count(),
                    median_it: median(&its),
                    mean_it: mean(&its),
                    median_time_s: median(&times),
                    mean_time_s: mean(&times),
                    median_rer: median(&rers),
                    mean_rer: mean(&rers),
                    rank_hat: done.iter().filter_map(|r| r.rank_hat).collect(),
                }
            })
            .collect();
        SynthSummary { n: self.spec.n, r: self.spec.r, p: self.spec.p, seeds: self.spec.seeds.clone(), methods }
    }

    /// Writes `synth.csv`, `synth_summary.json` and `synth_meta.json`.
    pub fn write(&self, dir: &Path) -> Result<Vec<PathBuf>> {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let paths = [dir.join("synth.csv"), dir.join("synth_summary.json"), dir.join("synth_meta.json")];
        write_file(&paths[0], &self.csv()?)?;
        write_json(&paths[1], &self.summary())?;
        write_json(&paths[2], &self.meta)?;
        Ok(paths.to_vec())
    }
}

fn check_synth_args(n: usize, r: usize, p: f64) -> Result<()> {
    if r == 0 || r >= n {
        return Err(Error::Mismatch(format!("need 1 <= r < n, got n = {n}, r = {r}")));
    }
    if !(0.0..1.0).contains(&p) {
        return Err(Error::Mismatch(format!("p must lie in [0, 1), got {p}")));
    }
    Ok(())
}

/// Generates one instance per seed and runs every method on each.
///
/// Solver failures are recorded in the row (`status = error`) and in
/// `failures`; the remaining runs still execute.
pub fn run_synth(spec: &SynthSpec) -> Result<SynthReport> {
    check_synth_args(spec.n, spec.r, spec.p)?;
    check_methods(&spec.methods).map_err(Error::Mismatch)?;
    if spec.seeds.is_empty() {
        return Err(Error::Mismatch("need at least one seed".into()));
    }
    let mut cfg = spec.config.clone();
    cfg.r = spec.r;
    cfg.validate()?;
    let started = Instant::now();
    let started_unix = unix_time();
    let workers = pool(spec.threads)?;

    let instances = workers.install(|| {
        spec.seeds.par_iter().map(|&s| gen_synthetic(spec.n, spec.r, spec.p, s)).collect::<Result<Vec<_>, _>>()
    })?;
    let tasks: Vec<(Method, usize)> =
        spec.methods.iter().flat_map(|&m| (0..instances.len()).map(move |i| (m, i))).collect();
    let outcomes: Vec<(SynthRow, Option<String>)> = workers.install(|| {
        tasks
            .par_iter()
            .map(|&(method, i)| {
                let inst = &instances[i];
                let timed = timed_solve(method, &inst.obs, &cfg, None);
                let mut row = SynthRow {
                    method,
                    n: spec.n,
                    r: spec.r,
                    p: spec.p,
                    seed: inst.seed,
                    iterations: None,
                    time_s: None,
                    rer: None,
                    rank_hat: None,
                    status: STATUS_ERROR.into(),
                };
                let failure = match timed.result.and_then(|res| Ok((rer(&inst.ground_truth, &res.x)?, res))) {
                    Ok((e, res)) => {
                        row.iterations = Some(res.iterations);
                        row.time_s = Some(timed.seconds);
                        row.rer = Some(e);
                        row.rank_hat = Some(res.recovered_rank);
                        row.status = res.status.as_str().into();
                        None
                    }
                    Err(e) => Some(format!("{method} seed {}: {e}", inst.seed)),
                };
                (row, failure)
            })
            .collect()
    });
    let (rows, failures): (Vec<SynthRow>, Vec<Option<String>>) = outcomes.into_iter().unzip();
    let failures: Vec<String> = failures.into_iter().flatten().collect();
    let meta = RunMeta::new("synth", started, started_unix, spec.threads, &cfg, failures.clone());
    Ok(SynthReport { spec: SynthSpec { config: cfg, ..spec.clone() }, rows, failures, meta })
}

// ----------------------------------------------------------- beta sweep

#[derive(Clone, Debug)]
pub struct BetaSweepSpec {
    pub n: usize,
    pub r: usize,
    pub p: f64,
    pub seed: u64,
    pub betas: Vec<f64>,
    /// Supplies `ε_ρ` and the budget `w`.
    pub config: SolverConfig,
    pub threads: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct BetaRow {
    pub beta: f64,
    pub iterations: Option<usize>,
    pub rho: Option<f64>,
    pub status: String,
}

impl BetaRow {
    pub const HEADER: [&'static str; 4] = ["beta", "iterations", "rho", "status"];

    pub fn record(&self) -> Vec<String> {
        vec![self.beta.to_string(), opt_count(self.iterations), opt_real(self.rho), self.status.clone()]
    }
}

pub struct BetaSweepReport {
    pub spec: BetaSweepSpec,
    pub rows: Vec<BetaRow>,
    pub failures: Vec<String>,
    pub meta: RunMeta,
}

impl BetaSweepReport {
    pub fn all_completed(&self) -> bool {
        self.rows.iter().all(|r| r.status != STATUS_ERROR)
    }

    pub fn csv(&self) -> Result<Vec<u8>> {
        csv_bytes(&BetaRow::HEADER, self.rows.iter().map(BetaRow::record))
    }

    pub fn file_stem(&self) -> String {
        format!("beta_sweep_n{}_r{}_p{}", self.spec.n, self.spec.r, self.spec.p)
    }

    /// Writes `<stem>.csv` and `<stem>_meta.json`.
    pub fn write(&self, dir: &Path) -> Result<Vec<PathBuf>> {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let stem = self.file_stem();
        let paths = [dir.join(format!("{stem}.csv")), dir.join(format!("{stem}_meta.json"))];
        write_file(&paths[0], &self.csv()?)?;
        write_json(&paths[1], &self.meta)?;
        Ok(paths.to_vec())
    }
}

/// Runs phase one alone on one instance for every `β` of the grid (sorted
/// ascending, duplicates removed).
pub fn run_beta_sweep(spec: &BetaSweepSpec) -> Result<BetaSweepReport> {
    check_synth_args(spec.n, spec.r, spec.p)?;
    let mut betas = spec.betas.clone();
    if betas.is_empty() || betas.iter().any(|b| !(*b > 0.0) || !b.is_finite()) {
        return Err(Error::Mismatch("beta grid must be nonempty and positive".into()));
    }
    betas.sort_by(f64::total_cmp);
    betas.dedup();
    let mut cfg = spec.config.clone();
    cfg.r = spec.r;
    cfg.validate()?;
    let started = Instant::now();
    let started_unix = unix_time();
    let inst = gen_synthetic(spec.n, spec.r, spec.p, spec.seed)?;
    let workers = pool(spec.threads)?;
    let outcomes: Vec<(BetaRow, Option<String>)> = workers.install(|| {
        betas
            .par_iter()
            .map(|&beta| {
                let mut c = cfg.clone();
                c.beta = beta;
                match phase_one(&inst.obs, &c.phase_one(), &SolveContext::default()) {
                    Ok(out) => (
                        BetaRow {
                            beta,
                            iterations: Some(out.iterations),
                            rho: Some(out.rho),
                            status: out.status.as_str().into(),
                        },
                        None,
                    ),
                    Err(e) => (
                        BetaRow { beta, iterations: None, rho: None, status: STATUS_ERROR.into() },
                        Some(format!("beta {beta}: {e}")),
                    ),
                }
            })
            .collect()
    });
    let (rows, failures): (Vec<BetaRow>, Vec<Option<String>>) = outcomes.into_iter().unzip();
    let failures: Vec<String> = failures.into_iter().flatten().collect();
    let meta = RunMeta::new("beta-sweep", started, started_unix, spec.threads, &cfg, failures.clone());
    Ok(BetaSweepReport { spec: BetaSweepSpec { betas, config: cfg, ..spec.clone() }, rows, failures, meta })
}

/// Parses a `β` grid such as `2,5,19` or `2..30` (inclusive integer range)
/// or a mix of both.
pub fn parse_beta_grid(s: &str) -> Result<Vec<f64>, String> {
    let mut out = Vec::new();
    for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        if let Some((a, b)) = part.split_once("..") {
            let a: u32 = a.trim().parse().map_err(|_| format!("bad range start in {part:?}"))?;
            let b: u32 = b.trim_start_matches('=').trim().parse().map_err(|_| format!("bad range end in {part:?}"))?;
            if a > b {
                return Err(format!("empty range {part:?}"));
            }
            out.extend((a..=b).map(f64::from));
        } else {
            out.push(part.parse::<f64>().map_err(|_| format!("bad beta {part:?}"))?);
        }
    }
    if out.is_empty() {
        return Err("empty beta grid".into());
    }
    Ok(out)
}

// ------------------------------------------------------------ movielens

#[derive(Clone, Debug)]
pub struct MovieLensSpec {
    pub dataset: PathBuf,
    pub format: MovieLensFormat,
    pub methods: Vec<Method>,
    /// Target ranks to sweep; each overrides `config.r`.
    pub ranks: Vec<usize>,
    pub config: SolverConfig,
    pub holdout: f64,
    pub seed: u64,
    /// Grow the matrix to the dataset's published size when the largest
    /// ids fall short of it.
    pub canonical_shape: bool,
    pub threads: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct MovieLensRow {
    pub method: Method,
    pub r: usize,
    pub iterations: Option<usize>,
    pub time_s: Option<f64>,
    pub rmse_omega_hat: Option<f64>,
    pub rmse_test: Option<f64>,
    pub status: String,
}

impl MovieLensRow {
    pub const HEADER: [&'static str; 7] = ["method", "r", "IT", "time_s", "RMSE_omega_hat", "RMSE_test", "status"];

    pub fn record(&self) -> Vec<String> {
        vec![
            self.method.name().to_owned(),
            self.r.to_string(),
            opt_count(self.iterations),
            opt_real(self.time_s),
            opt_real(self.rmse_omega_hat),
            opt_real(self.rmse_test),
            self.status.clone(),
        ]
    }
}

pub struct MovieLensReport {
    pub shape: (usize, usize),
    pub ratings: usize,
    pub train: usize,
    pub rows: Vec<MovieLensRow>,
    pub failures: Vec<String>,
    pub meta: RunMeta,
}

impl MovieLensReport {
    pub fn all_completed(&self) -> bool {
        self.rows.iter().all(|r| r.status != STATUS_ERROR)
    }

    pub fn csv(&self) -> Result<Vec<u8>> {
        csv_bytes(&MovieLensRow::HEADER, self.rows.iter().map(MovieLensRow::record))
    }

    /// Writes `movielens.csv` and `movielens_meta.json`.
    pub fn write(&self, dir: &Path) -> Result<Vec<PathBuf>> {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let paths = [dir.join("movielens.csv"), dir.join("movielens_meta.json")];
        write_file(&paths[0], &self.csv()?)?;
        write_json(&paths[1], &self.meta)?;
        Ok(paths.to_vec())
    }
}

/// Fills the SVT defaults used for rectangular rating matrices:
/// `τ = 8·√(mn)` and `t = 1.99`, unless already set.
pub fn ratings_svt_defaults(cfg: &mut SolverConfig, m: usize, n: usize) {
    let mn = m as f64 * n as f64;
    cfg.tau_svt.get_or_insert(8.0 * mn.sqrt());
    cfg.step_svt.get_or_insert(1.99);
}

/// Loads the ratings, holds out a fraction for testing and runs each method
/// on the remainder. RMSE is reported over all ratings and over the held-out
/// ones.
pub fn run_movielens(spec: &MovieLensSpec) -> Result<MovieLensReport> {
    let mut obs = load_movielens(&spec.dataset, spec.format)?;
    if spec.canonical_shape {
        let (cm, cn) = spec.format.canonical_shape();
        let (m, n) = obs.shape();
        obs = obs.with_shape(m.max(cm), n.max(cn))?;
    }
    run_ratings(obs, spec)
}

/// [`run_movielens`] on an already loaded rating matrix.
pub fn run_ratings(obs: ObservedMatrix, spec: &MovieLensSpec) -> Result<MovieLensReport> {
    let started = Instant::now();
    let started_unix = unix_time();
    check_methods(&spec.methods).map_err(Error::Mismatch)?;
    let mut ranks = spec.ranks.clone();
    ranks.sort_unstable();
    ranks.dedup();
    if ranks.len() != spec.ranks.len() || ranks.is_empty() {
        return Err(Error::Mismatch("ranks must be nonempty and distinct".into()));
    }
    let data = RatingsDataset::new(obs, spec.holdout, spec.seed)?;
    let (m, n) = data.obs_full.shape();
    let mut cfg = spec.config.clone();
    ratings_svt_defaults(&mut cfg, m, n);
    for &r in &spec.ranks {
        SolverConfig { r, ..cfg.clone() }.validate()?;
    }
    let workers = pool(spec.threads)?;
    let tasks: Vec<(Method, usize)> =
        spec.methods.iter().flat_map(|&m| spec.ranks.iter().map(move |&r| (m, r))).collect();
    let outcomes: Vec<(MovieLensRow, Option<String>)> = workers.install(|| {
        tasks
            .par_iter()
            .map(|&(method, r)| {
                let cfg = SolverConfig { r, ..cfg.clone() };
                let timed = timed_solve(method, &data.train, &cfg, None);
                let scored = timed.result.and_then(|res| {
                    let all = rmse(&data.obs_full, &res.x)?;
                    let test = rmse(&data.test, &res.x)?;
                    Ok((res, all, test))
                });
                match scored {
                    Ok((res, all, test)) => (
                        MovieLensRow {
                            method,
                            r,
                            iterations: Some(res.iterations),
                            time_s: Some(timed.seconds),
                            rmse_omega_hat: Some(all),
                            rmse_test: Some(test),
                            status: res.status.as_str().into(),
                        },
                        None,
                    ),
                    Err(e) => (
                        MovieLensRow {
                            method,
                            r,
                            iterations: None,
                            time_s: None,
                            rmse_omega_hat: None,
                            rmse_test: None,
                            status: STATUS_ERROR.into(),
                        },
                        Some(format!("{method} r={r}: {e}")),
                    ),
                }
            })
            .collect()
    });
    let (rows, failures): (Vec<MovieLensRow>, Vec<Option<String>>) = outcomes.into_iter().unzip();
    let failures: Vec<String> = failures.into_iter().flatten().collect();
    let meta = RunMeta::new("movielens", started, started_unix, spec.threads, &cfg, failures.clone());
    Ok(MovieLensReport {
        shape: (m, n),
        ratings: data.obs_full.nnz(),
        train: data.train.nnz(),
        rows,
        failures,
        meta,
    })
}

// ---------------------------------------------------------------- trace

pub const TRACE_HEADER: [&str; 9] =
    ["iteration", "phase", "rho", "objective", "rel_residual", "rel_change", "rank_estimate", "rank", "time_s"];

/// One row per iteration; a trailing `fejer_slack` column when
/// `with_fejer` is set.
pub fn trace_csv(trace: &SolveTrace, with_fejer: bool) -> Result<Vec<u8>> {
    let mut header: Vec<&str> = TRACE_HEADER.to_vec();
    if with_fejer {
        header.push("fejer_slack");
    }
    let rows = trace.records.iter().map(|t| {
        let mut row = vec![
            t.iteration.to_string(),
            t.phase.to_string(),
            real(t.rho),
            opt_real(t.objective),
            real(t.rel_residual),
            real(t.rel_change),
            t.rank_estimate.to_string(),
            t.rank.to_string(),
            real(t.time_s),
        ];
        if with_fejer {
            row.push(opt_real(t.fejer_slack));
        }
        row
    });
    csv_bytes(&header, rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn method_names_round_trip() {
        for m in Method::ALL {
            assert_eq!(m.name().parse::<Method>().unwrap(), m);
        }
        assert!("svd".parse::<Method>().is_err());
        assert!(check_methods(&[Method::TwoPhase, Method::Frsi]).is_ok());
        assert!(check_methods(&[Method::Frsi, Method::Svt, Method::Frsi]).is_err());
        assert!(check_methods(&[]).is_err());
    }

    #[test]
    fn beta_grids() {
        assert_eq!(parse_beta_grid("2..4,19").unwrap(), vec![2.0, 3.0, 4.0, 19.0]);
        assert_eq!(parse_beta_grid("2..=3").unwrap(), vec![2.0, 3.0]);
        assert_eq!(parse_beta_grid("0.5").unwrap(), vec![0.5]);
        assert!(parse_beta_grid("5..2").is_err());
        assert!(parse_beta_grid("x").is_err());
    }

    #[test]
    fn medians() {
        assert_eq!(median(&[3.0, 1.0, 2.0]), Some(2.0));
        assert_eq!(median(&[4.0, 1.0, 2.0, 3.0]), Some(2.5));
        assert_eq!(median(&[]), None);
        assert_eq!(mean(&[1.0, 2.0]), Some(1.5));
    }
}
