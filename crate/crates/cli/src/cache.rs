//! On-disk Gram cache keyed by `(canonical poly, r, precision)`.
//!
//! One file per key holds the largest assembly seen so far; smaller requests
//! take its leading block, larger ones extend it generator by generator.
//! Writes go to a temporary file in the same directory followed by a rename,
//! so concurrent readers never observe a partial file. Reads refresh the
//! modification time, which is what eviction orders by.

use std::fs::{self, File};
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::SystemTime;

use rug::Rational;
use sha2::{Digest, Sha256};
use xdp_core::distance::{GramEntries, StepInner};
use xdp_core::poly::kappa_partial_sums;
use xdp_core::{DirichletPolynomial, Precision};

use crate::error::{CliError, Result};

#[derive(Debug, Clone)]
pub struct GramCache {
    dir: PathBuf,
}

/// How a request was served.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CacheOutcome {
    Hit,
    Extended { from: usize },
    Miss,
}

impl GramCache {
    pub fn open(dir: impl Into<PathBuf>) -> Result<Self> {
        let dir = dir.into();
        fs::create_dir_all(&dir).map_err(|e| CliError::io(&dir, e))?;
        Ok(GramCache { dir })
    }

    pub fn key(poly: &DirichletPolynomial, r: &Rational, prec: Precision) -> String {
        let mut h = Sha256::new();
        h.update(format!("{poly}|{r}|{}", prec.bits()).as_bytes());
        hex::encode(h.finalize())
    }

    pub fn path_for(&self, poly: &DirichletPolynomial, r: &Rational, prec: Precision) -> PathBuf {
        self.dir.join(format!("{}.json", Self::key(poly, r, prec)))
    }

    fn load(&self, path: &Path, poly: &DirichletPolynomial, r: &Rational, prec: Precision) -> Option<GramEntries> {
        let text = fs::read_to_string(path).ok()?;
        let value: serde_json::Value = serde_json::from_str(&text).ok()?;
        let entries = GramEntries::from_json(&value, poly, r).ok()?;
        if entries.precision() != prec || entries.dim() == 0 {
            return None;
        }
        if let Ok(f) = File::options().write(true).open(path) {
            let _ = f.set_modified(SystemTime::now());
        }
        Some(entries)
    }

    /// Entries for the first `n` generators, served from the cache when possible.
    pub fn entries(
        &self,
        poly: &DirichletPolynomial,
        r: &Rational,
        n: usize,
        prec: Precision,
    ) -> Result<(GramEntries, CacheOutcome)> {
        let path = self.path_for(poly, r, prec);
        let cached = self.load(&path, poly, r, prec);
        match cached {
            Some(e) if e.dim() >= n => Ok((e.leading(n), CacheOutcome::Hit)),
            Some(mut e) => {
                let from = e.dim();
                let inner = StepInner::new(kappa_partial_sums(poly, r, prec));
                while e.dim() < n {
                    e.extend(&inner);
                }
                self.store(&path, &e, poly, r)?;
                Ok((e, CacheOutcome::Extended { from }))
            }
            None => {
                let inner = StepInner::new(kappa_partial_sums(poly, r, prec));
                let e = GramEntries::assemble(&inner, n);
                self.store(&path, &e, poly, r)?;
                Ok((e, CacheOutcome::Miss))
            }
        }
    }

    fn store(&self, path: &Path, e: &GramEntries, poly: &DirichletPolynomial, r: &Rational) -> Result<()> {
        let text = serde_json::to_string(&e.to_json(poly, r)).expect("JSON values serialize");
        write_atomic(path, text.as_bytes())
    }
}

/// Write-temp-then-rename in the destination directory.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::Builder::new().prefix(".tmp-").tempfile_in(dir).map_err(|e| CliError::io(dir, e))?;
    tmp.write_all(bytes).map_err(|e| CliError::io(tmp.path(), e))?;
    tmp.as_file().sync_all().map_err(|e| CliError::io(tmp.path(), e))?;
    tmp.persist(path).map_err(|e| CliError::io(path, e.error))?;
    Ok(())
}

/// Evicts least-recently-used cache files until the total fits in `max_bytes`.
pub fn cache_gc(dir: &Path, max_bytes: u64) -> Result<usize> {
    if !dir.exists() {
        return Ok(0);
    }
    let mut files = Vec::new();
    for entry in fs::read_dir(dir).map_err(|e| CliError::io(dir, e))? {
        let entry = entry.map_err(|e| CliError::io(dir, e))?;
        let path = entry.path();
        if path.extension().is_none_or(|x| x != "json") {
            continue;
        }
        let meta = entry.metadata().map_err(|e| CliError::io(&path, e))?;
        if meta.is_file() {
            let mtime = meta.modified().map_err(|e| CliError::io(&path, e))?;
            files.push((mtime, meta.len(), path));
        }
    }
    // Newest first; ties broken by name so the outcome is deterministic.
    files.sort_by(|a, b| b.0.cmp(&a.0).then_with(|| a.2.cmp(&b.2)));
    let mut kept = 0u64;
    let mut evicted = 0;
    for (_, len, path) in files {
        if kept + len <= max_bytes {
            kept += len;
        } else {
            fs::remove_file(&path).map_err(|e| CliError::io(&path, e))?;
            evicted += 1;
        }
    }
    Ok(evicted)
}
