//! Flat `key = value` serialization of [`SolverConfig`].
//!
//! Recognized keys: `r`, `eps_rho`, `eps_1`, `eps_2`, `eps_3`, `eps_lambda`,
//! `w`, `it_max`, `beta`, `tau_svt`, `step_svt`, `lambda`, `fpc_decay`,
//! `fpc_floor`, `rank_bump`. The instance-dependent keys `tau_svt`,
//! `step_svt` and `lambda` accept `auto`.

use std::collections::HashSet;
use std::fmt::Write as _;
use std::path::Path;

use mcomplete_core::SolverConfig;

use crate::error::{Error, Result};

pub const KEYS: [&str; 15] = [
    "r",
    "eps_rho",
    "eps_1",
    "eps_2",
    "eps_3",
    "eps_lambda",
    "w",
    "it_max",
    "beta",
    "tau_svt",
    "step_svt",
    "lambda",
    "fpc_decay",
    "fpc_floor",
    "rank_bump",
];

fn auto(v: Option<f64>) -> String {
    v.map_or_else(|| "auto".to_owned(), |x| format!("{x:e}"))
}

/// Every key, one per line, in the order of [`KEYS`].
pub fn format_config(cfg: &SolverConfig) -> String {
    let values = [
        cfg.r.to_string(),
        format!("{:e}", cfg.eps_rho),
        format!("{:e}", cfg.eps_1),
        format!("{:e}", cfg.eps_2),
        format!("{:e}", cfg.eps_3),
        format!("{:e}", cfg.eps_lambda),
        cfg.w.to_string(),
        cfg.it_max.to_string(),
        format!("{:e}", cfg.beta),
        auto(cfg.tau_svt),
        auto(cfg.step_svt),
        auto(cfg.lambda),
        format!("{:e}", cfg.fpc_decay),
        format!("{:e}", cfg.fpc_floor),
        cfg.rank_bump.to_string(),
    ];
    let mut out = String::new();
    for (k, v) in KEYS.iter().zip(values) {
        let _ = writeln!(out, "{k} = {v}");
    }
    out
}

/// Applies the assignments in `text` on top of `base` and validates the
/// result. Unknown and repeated keys are errors; absent keys keep their
/// value from `base`.
pub fn parse_config(text: &str, base: SolverConfig) -> Result<SolverConfig> {
    let mut cfg = base;
    let mut seen = HashSet::new();
    for (idx, raw) in text.lines().enumerate() {
        let lineno = idx + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .map(|(k, v)| (k.trim(), v.trim()))
            .ok_or_else(|| Error::parse(lineno, "expected `key = value`"))?;
        if !KEYS.contains(&key) {
            return Err(Error::parse(lineno, format!("unknown key {key:?}")));
        }
        if !seen.insert(key.to_owned()) {
            return Err(Error::parse(lineno, format!("key {key:?} given twice")));
        }
        let real = || value.parse::<f64>().map_err(|_| Error::parse(lineno, format!("{key}: expected a number, found {value:?}")));
        let count = || value.parse::<usize>().map_err(|_| Error::parse(lineno, format!("{key}: expected an integer, found {value:?}")));
        let maybe = || if value == "auto" { Ok(None) } else { real().map(Some) };
        match key {
            "r" => cfg.r = count()?,
            "eps_rho" => cfg.eps_rho = real()?,
            "eps_1" => cfg.eps_1 = real()?,
            "eps_2" => cfg.eps_2 = real()?,
            "eps_3" => cfg.eps_3 = real()?,
            "eps_lambda" => cfg.eps_lambda = real()?,
            "w" => cfg.w = count()?,
            "it_max" => cfg.it_max = count()?,
            "beta" => cfg.beta = real()?,
            "tau_svt" => cfg.tau_svt = maybe()?,
            "step_svt" => cfg.step_svt = maybe()?,
            "lambda" => cfg.lambda = maybe()?,
            "fpc_decay" => cfg.fpc_decay = real()?,
            "fpc_floor" => cfg.fpc_floor = real()?,
            "rank_bump" => cfg.rank_bump = count()?,
            _ => unreachable!(),
        }
    }
    cfg.validate()?;
    Ok(cfg)
}

pub fn load_config(path: &Path, base: SolverConfig) -> Result<SolverConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_config(&text, base)
}
