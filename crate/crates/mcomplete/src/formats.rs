//! Plain-text observed-entry files and the JSON sidecar of synthetic instances.
//!
//! An observed-entry file starts with a header line `m n nnz` followed by
//! `nnz` lines `i j value` with 0-based indices. Blank lines and lines
//! starting with `#` are ignored.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use mcomplete_core::{gen_synthetic, ObservedMatrix, SyntheticInstance};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub fn write_observed<W: Write>(mut w: W, obs: &ObservedMatrix) -> std::io::Result<()> {
    let (m, n) = obs.shape();
    writeln!(w, "{m} {n} {}", obs.nnz())?;
    for (i, j, v) in obs.iter() {
        writeln!(w, "{i} {j} {v:e}")?;
    }
    w.flush()
}

pub fn read_observed<R: BufRead>(r: R) -> Result<ObservedMatrix> {
    let mut header: Option<(usize, usize, usize)> = None;
    let mut entries = Vec::new();
    for (idx, line) in r.lines().enumerate() {
        let lineno = idx + 1;
        let line = line.map_err(|e| Error::parse(lineno, e.to_string()))?;
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() != 3 {
            return Err(Error::parse(lineno, format!("expected 3 fields, found {}", fields.len())));
        }
        match header {
            None => {
                let parse = |s: &str, what: &str| {
                    s.parse::<usize>().map_err(|_| Error::parse(lineno, format!("bad {what} {s:?} in header")))
                };
                let h = (parse(fields[0], "m")?, parse(fields[1], "n")?, parse(fields[2], "nnz")?);
                entries.reserve(h.2);
                header = Some(h);
            }
            Some(_) => {
                let i = fields[0].parse::<usize>().map_err(|_| Error::parse(lineno, format!("bad row index {:?}", fields[0])))?;
                let j = fields[1].parse::<usize>().map_err(|_| Error::parse(lineno, format!("bad column index {:?}", fields[1])))?;
                let v = fields[2].parse::<f64>().map_err(|_| Error::parse(lineno, format!("bad value {:?}", fields[2])))?;
                if !v.is_finite() {
                    return Err(Error::parse(lineno, "value is not finite"));
                }
                entries.push((i, j, v));
            }
        }
    }
    let (m, n, nnz) = header.ok_or_else(|| Error::parse(0, "missing header line \"m n nnz\""))?;
    if entries.len() != nnz {
        return Err(Error::Mismatch(format!("header announces {nnz} entries, file has {}", entries.len())));
    }
    Ok(ObservedMatrix::from_triplets(m, n, entries)?)
}

pub fn save_observed(path: &Path, obs: &ObservedMatrix) -> Result<()> {
    let f = File::create(path).map_err(|e| Error::io(path, e))?;
    write_observed(BufWriter::new(f), obs).map_err(|e| Error::io(path, e))
}

pub fn load_observed(path: &Path) -> Result<ObservedMatrix> {
    let f = File::open(path).map_err(|e| Error::io(path, e))?;
    read_observed(BufReader::new(f))
}

/// Generator parameters of a synthetic instance; enough to rebuild it.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct InstanceMeta {
    pub n: usize,
    pub r: usize,
    pub p: f64,
    pub seed: u64,
}

impl From<&SyntheticInstance> for InstanceMeta {
    fn from(inst: &SyntheticInstance) -> Self {
        InstanceMeta { n: inst.n, r: inst.r, p: inst.p, seed: inst.seed }
    }
}

/// `entries.txt` → `entries.json`
pub fn sidecar_path(path: &Path) -> PathBuf {
    path.with_extension("json")
}

/// Writes the observed entries to `path` and the generator parameters next
/// to it.
pub fn save_instance(path: &Path, inst: &SyntheticInstance) -> Result<()> {
    save_observed(path, &inst.obs)?;
    let side = sidecar_path(path);
    let f = File::create(&side).map_err(|e| Error::io(&side, e))?;
    serde_json::to_writer_pretty(BufWriter::new(f), &InstanceMeta::from(inst))?;
    Ok(())
}

pub fn load_instance_meta(path: &Path) -> Result<InstanceMeta> {
    let side = sidecar_path(path);
    let f = File::open(&side).map_err(|e| Error::io(&side, e))?;
    Ok(serde_json::from_reader(BufReader::new(f))?)
}

/// Reads an instance saved by [`save_instance`], regenerating the ground
/// truth from the sidecar. The stored entries must match the regenerated
/// ones exactly.
pub fn load_instance(path: &Path) -> Result<SyntheticInstance> {
    let meta = load_instance_meta(path)?;
    let obs = load_observed(path)?;
    let inst = gen_synthetic(meta.n, meta.r, meta.p, meta.seed)?;
    if inst.obs != obs {
        return Err(Error::Mismatch(format!(
            "{} does not match the instance described by {}",
            path.display(),
            sidecar_path(path).display()
        )));
    }
    Ok(inst)
}
