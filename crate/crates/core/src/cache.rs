//! On-disk cache for prime tables and ρ solutions.
//!
//! Prime tables are stored in a small binary format
//! (`magic, format_version, limit, count, primes, prefix sums`, all little
//! endian); solutions as the JSON produced by
//! [`PiecewiseSolution::to_json`].

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::dde::PiecewiseSolution;
use crate::error::{Error, Result};
use crate::primes::{PrefixSums, PrimeTable};
use crate::special_functions::RhoEvaluator;

pub const CACHE_ENV: &str = "FRIABLE_CACHE_DIR";
pub const DEFAULT_CACHE_DIR: &str = ".friable-cache";
pub const PRIME_FORMAT_VERSION: u32 = 1;
const MAGIC: &[u8; 4] = b"FKPT";

#[derive(Debug, Clone)]
pub struct Cache {
    dir: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CacheEntry {
    pub name: String,
    pub bytes: u64,
}

impl Cache {
    pub fn new(dir: impl Into<PathBuf>) -> Self {
        Self { dir: dir.into() }
    }

    /// `explicit`, else `$FRIABLE_CACHE_DIR`, else `./.friable-cache`.
    pub fn resolve(explicit: Option<&Path>) -> Self {
        match explicit {
            Some(p) => Self::new(p),
            None => match std::env::var_os(CACHE_ENV) {
                Some(v) if !v.is_empty() => Self::new(v),
                _ => Self::new(DEFAULT_CACHE_DIR),
            },
        }
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    fn prime_path(&self, limit: u64) -> PathBuf {
        self.dir.join(format!("primes-{limit}.bin"))
    }

    fn rho_path(&self, u_max: f64) -> PathBuf {
        self.dir.join(format!("rho-{u_max}.json"))
    }

    fn write_atomic(&self, path: &Path, bytes: &[u8]) -> Result<()> {
        fs::create_dir_all(&self.dir)?;
        let tmp = path.with_extension(format!("tmp{}", std::process::id()));
        {
            let mut f = fs::File::create(&tmp)?;
            f.write_all(bytes)?;
            f.sync_all()?;
        }
        fs::rename(&tmp, path)?;
        Ok(())
    }

    pub fn store_primes(&self, table: &PrimeTable) -> Result<()> {
        self.write_atomic(&self.prime_path(table.limit()), &encode_table(table))
    }

    pub fn load_primes(&self, limit: u64) -> Result<Option<PrimeTable>> {
        let path = self.prime_path(limit);
        let bytes = match fs::read(&path) {
            Ok(b) => b,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(None),
            Err(e) => return Err(e.into()),
        };
        decode_table(&bytes, limit).map(Some)
    }

    /// Read the table for `limit`, sieving and storing it on a miss. A
    /// corrupt or stale file is replaced.
    pub fn prime_table(&self, limit: u64) -> Result<PrimeTable> {
        if let Ok(Some(t)) = self.load_primes(limit) {
            return Ok(t);
        }
        let table = PrimeTable::sieve(limit)?;
        // a read-only cache directory only costs the reuse
        let _ = self.store_primes(&table);
        Ok(table)
    }

    pub fn store_rho(&self, eval: &RhoEvaluator) -> Result<()> {
        self.write_atomic(&self.rho_path(eval.u_max()), eval.solution().to_json()?.as_bytes())
    }

    pub fn rho_evaluator(&self, u_max: f64) -> Result<RhoEvaluator> {
        if let Ok(text) = fs::read_to_string(self.rho_path(u_max)) {
            if let Ok(e) = PiecewiseSolution::from_json(&text).and_then(|s| RhoEvaluator::from_solution(s, u_max)) {
                return Ok(e);
            }
        }
        let eval = RhoEvaluator::new(u_max)?;
        let _ = self.store_rho(&eval);
        Ok(eval)
    }

    /// Cache files in name order.
    pub fn entries(&self) -> Result<Vec<CacheEntry>> {
        let rd = match fs::read_dir(&self.dir) {
            Ok(r) => r,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(Vec::new()),
            Err(e) => return Err(e.into()),
        };
        let mut out = Vec::new();
        for entry in rd {
            let entry = entry?;
            let name = entry.file_name().to_string_lossy().into_owned();
            if is_cache_file(&name) {
                out.push(CacheEntry {
                    name,
                    bytes: entry.metadata()?.len(),
                });
            }
        }
        out.sort_by(|a, b| a.name.cmp(&b.name));
        Ok(out)
    }

    /// Remove the cache files; other files in the directory are left alone.
    pub fn clear(&self) -> Result<usize> {
        let entries = self.entries()?;
        for e in &entries {
            fs::remove_file(self.dir.join(&e.name))?;
        }
        Ok(entries.len())
    }
}

fn is_cache_file(name: &str) -> bool {
    (name.starts_with("primes-") && name.ends_with(".bin")) || (name.starts_with("rho-") && name.ends_with(".json"))
}

fn encode_table(table: &PrimeTable) -> Vec<u8> {
    let primes = table.primes();
    let prefix = table.prefix();
    let mut out = Vec::with_capacity(24 + primes.len() * 4 + prefix.reciprocal.len() * 24);
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&PRIME_FORMAT_VERSION.to_le_bytes());
    out.extend_from_slice(&table.limit().to_le_bytes());
    out.extend_from_slice(&(primes.len() as u64).to_le_bytes());
    for &p in primes {
        out.extend_from_slice(&p.to_le_bytes());
    }
    for v in [&prefix.reciprocal, &prefix.log, &prefix.log_mertens] {
        for &x in v.iter() {
            out.extend_from_slice(&x.to_le_bytes());
        }
    }
    out
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        let end = self.pos.checked_add(n).filter(|&e| e <= self.bytes.len());
        let end = end.ok_or_else(|| Error::Format("prime cache file is truncated".into()))?;
        let s = &self.bytes[self.pos..end];
        self.pos = end;
        Ok(s)
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().expect("4 bytes")))
    }

    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().expect("8 bytes")))
    }

    fn f64s(&mut self, n: usize) -> Result<Vec<f64>> {
        let raw = self.take(n.checked_mul(8).ok_or_else(|| Error::Format("bad length".into()))?)?;
        Ok(raw.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes"))).collect())
    }
}

fn decode_table(bytes: &[u8], limit: u64) -> Result<PrimeTable> {
    let mut r = Reader { bytes, pos: 0 };
    if r.take(4)? != MAGIC {
        return Err(Error::Format("not a prime cache file".into()));
    }
    let version = r.u32()?;
    if version != PRIME_FORMAT_VERSION {
        return Err(Error::Format(format!("prime cache version {version}, expected {PRIME_FORMAT_VERSION}")));
    }
    let stored = r.u64()?;
    if stored != limit {
        return Err(Error::Format(format!("prime cache holds limit {stored}, expected {limit}")));
    }
    let count = r.u64()? as usize;
    let raw = r.take(count.checked_mul(4).ok_or_else(|| Error::Format("bad length".into()))?)?;
    let primes: Vec<u32> = raw.chunks_exact(4).map(|c| u32::from_le_bytes(c.try_into().expect("4 bytes"))).collect();
    if primes.windows(2).any(|w| w[0] >= w[1]) || primes.last().is_some_and(|&p| p as u64 > limit) {
        return Err(Error::Format("prime cache is not an increasing list below the limit".into()));
    }
    let prefix = PrefixSums {
        reciprocal: r.f64s(count + 1)?,
        log: r.f64s(count + 1)?,
        log_mertens: r.f64s(count + 1)?,
    };
    if r.pos != bytes.len() {
        return Err(Error::Format("trailing bytes in prime cache".into()));
    }
    Ok(PrimeTable::from_parts(limit, primes, Some(prefix)))
}
