//! Prime tables and the prime-indexed sums and products built on them.

use std::sync::OnceLock;

use crate::error::{Error, Result};
use crate::numeric::CompensatedSum;

/// Default ceiling on the sieve limit.
pub const DEFAULT_MAX_LIMIT: u64 = 100_000_000;
/// Default segment length (entries) for the segmented sieve.
pub const DEFAULT_SEGMENT_SIZE: usize = 1 << 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SieveConfig {
    pub max_limit: u64,
    pub segment_size: usize,
}

impl Default for SieveConfig {
    fn default() -> Self {
        Self {
            max_limit: DEFAULT_MAX_LIMIT,
            segment_size: DEFAULT_SEGMENT_SIZE,
        }
    }
}

/// Running sums over the first `i` primes, `i = 0..=len`.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct PrefixSums {
    pub(crate) reciprocal: Vec<f64>,
    pub(crate) log: Vec<f64>,
    /// Σ log(1 - 1/p), the logarithm of the Mertens product.
    pub(crate) log_mertens: Vec<f64>,
}

impl PrefixSums {
    fn build(primes: &[u32]) -> Self {
        let n = primes.len();
        let mut reciprocal = Vec::with_capacity(n + 1);
        let mut log = Vec::with_capacity(n + 1);
        let mut log_mertens = Vec::with_capacity(n + 1);
        let (mut r, mut l, mut m) = (
            CompensatedSum::new(),
            CompensatedSum::new(),
            CompensatedSum::new(),
        );
        reciprocal.push(0.0);
        log.push(0.0);
        log_mertens.push(0.0);
        for &p in primes {
            let pf = p as f64;
            r.add(1.0 / pf);
            l.add(pf.ln());
            m.add((-1.0 / pf).ln_1p());
            reciprocal.push(r.value());
            log.push(l.value());
            log_mertens.push(m.value());
        }
        Self {
            reciprocal,
            log,
            log_mertens,
        }
    }
}

/// All primes up to `limit`, in increasing order.
///
/// Immutable once built; the prefix sums are computed on first use.
#[derive(Debug)]
pub struct PrimeTable {
    limit: u64,
    primes: Vec<u32>,
    prefix: OnceLock<PrefixSums>,
}

impl Clone for PrimeTable {
    fn clone(&self) -> Self {
        let prefix = OnceLock::new();
        if let Some(p) = self.prefix.get() {
            let _ = prefix.set(p.clone());
        }
        Self {
            limit: self.limit,
            primes: self.primes.clone(),
            prefix,
        }
    }
}

impl PrimeTable {
    /// Sieve with the default configuration.
    pub fn sieve(limit: u64) -> Result<Self> {
        Self::sieve_with(limit, &SieveConfig::default())
    }

    pub fn sieve_with(limit: u64, config: &SieveConfig) -> Result<Self> {
        if limit < 2 {
            return Err(Error::Bounds(format!("sieve limit {limit} is below 2")));
        }
        if limit > config.max_limit {
            return Err(Error::Bounds(format!(
                "sieve limit {limit} exceeds the configured maximum {}",
                config.max_limit
            )));
        }
        if limit > u32::MAX as u64 {
            return Err(Error::Bounds(format!("sieve limit {limit} exceeds 2^32")));
        }
        let primes = segmented_sieve(limit, config.segment_size.max(64));
        Ok(Self {
            limit,
            primes,
            prefix: OnceLock::new(),
        })
    }

    /// Rebuild a table from a list previously produced by [`PrimeTable::sieve`].
    pub(crate) fn from_parts(limit: u64, primes: Vec<u32>, prefix: Option<PrefixSums>) -> Self {
        let cell = OnceLock::new();
        if let Some(p) = prefix {
            let _ = cell.set(p);
        }
        Self {
            limit,
            primes,
            prefix: cell,
        }
    }

    pub fn limit(&self) -> u64 {
        self.limit
    }

    pub fn primes(&self) -> &[u32] {
        &self.primes
    }

    pub fn len(&self) -> usize {
        self.primes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.primes.is_empty()
    }

    pub(crate) fn prefix(&self) -> &PrefixSums {
        self.prefix.get_or_init(|| PrefixSums::build(&self.primes))
    }

    /// Number of listed primes `<= x`, without range checking.
    pub fn count_le(&self, x: f64) -> usize {
        if x < 2.0 {
            return 0;
        }
        let xi = if x >= u32::MAX as f64 {
            u32::MAX
        } else {
            x.floor() as u32
        };
        self.primes.partition_point(|&p| p <= xi)
    }

    /// Number of listed primes `< x`.
    pub fn count_lt(&self, x: f64) -> usize {
        if x <= 2.0 {
            return 0;
        }
        self.primes.partition_point(|&p| (p as f64) < x)
    }

    fn check_covers(&self, x: f64) -> Result<()> {
        if x.is_nan() {
            return Err(Error::Bounds("argument is NaN".into()));
        }
        if x > self.limit as f64 {
            return Err(Error::InsufficientTable {
                limit: self.limit,
                needed: x.ceil().min(u64::MAX as f64) as u64,
            });
        }
        Ok(())
    }

    fn check_y(&self, y: f64) -> Result<()> {
        if !(y >= 2.0) {
            return Err(Error::Bounds(format!("y = {y} is below 2")));
        }
        self.check_covers(y)
    }

    /// π(x), the exact number of primes `<= x`.
    pub fn prime_pi(&self, x: f64) -> Result<u64> {
        if x < 0.0 {
            return Err(Error::Bounds(format!("prime_pi argument {x} is negative")));
        }
        self.check_covers(x)?;
        Ok(self.count_le(x) as u64)
    }

    /// Σ_{p ≤ y} 1/p.
    pub fn sum_reciprocal_primes(&self, y: f64) -> Result<f64> {
        self.check_y(y)?;
        Ok(self.prefix().reciprocal[self.count_le(y)])
    }

    /// Σ_{p ≤ y} log p (Chebyshev's θ).
    pub fn sum_log_primes(&self, y: f64) -> Result<f64> {
        self.check_y(y)?;
        Ok(self.prefix().log[self.count_le(y)])
    }

    /// ∏_{p < y} (1 − 1/p); the strict inequality follows the sieve convention.
    pub fn mertens_product(&self, y: f64) -> Result<f64> {
        self.check_y(y)?;
        Ok(self.prefix().log_mertens[self.count_lt(y)].exp())
    }

    /// log ζ(s, y) = −Σ_{p ≤ y} log(1 − p^{−s}).
    pub fn log_partial_zeta(&self, s: f64, y: f64) -> Result<f64> {
        check_s(s)?;
        self.check_y(y)?;
        let n = self.count_le(y);
        let mut acc = CompensatedSum::new();
        for &p in &self.primes[..n] {
            acc.add(-(-(p as f64).powf(-s)).ln_1p());
        }
        Ok(acc.value())
    }

    /// The partial Euler product ζ(s, y) = ∏_{p ≤ y} (1 − p^{−s})^{−1}.
    pub fn partial_zeta(&self, s: f64, y: f64) -> Result<f64> {
        Ok(self.log_partial_zeta(s, y)?.exp())
    }

    /// φ_k(s, y), the k-th derivative in s of log ζ(s, y), for k ∈ {1, 2}.
    ///
    /// φ₁ = −Σ log p/(p^s − 1), φ₂ = Σ (log p)² p^s/(p^s − 1)².
    pub fn log_zeta_derivative(&self, s: f64, y: f64, k: u32) -> Result<f64> {
        check_s(s)?;
        self.check_y(y)?;
        let n = self.count_le(y);
        let mut acc = CompensatedSum::new();
        match k {
            1 => {
                for &p in &self.primes[..n] {
                    let lp = (p as f64).ln();
                    acc.add(-lp / (s * lp).exp_m1());
                }
            }
            2 => {
                for &p in &self.primes[..n] {
                    let lp = (p as f64).ln();
                    let q = (s * lp).exp_m1();
                    // p^s/(p^s-1)^2 = 1/q + 1/q^2 with q = p^s - 1
                    acc.add(lp * lp * (1.0 / q + 1.0 / (q * q)));
                }
            }
            _ => return Err(Error::Input(format!("derivative order {k} not in {{1, 2}}"))),
        }
        Ok(acc.value())
    }

    /// Calls `f(n, P(n))` for every `1 <= n <= x`, in increasing order.
    ///
    /// P is computed segment by segment by dividing out the primes up to √x;
    /// the table must reach √x.
    pub fn for_each_largest_prime_factor<F: FnMut(u64, u64)>(&self, x: u64, mut f: F) -> Result<()> {
        if x == 0 {
            return Ok(());
        }
        let root = isqrt(x);
        if root > self.limit {
            return Err(Error::InsufficientTable {
                limit: self.limit,
                needed: root,
            });
        }
        let small = &self.primes[..self.count_le(root as f64)];
        let seg = DEFAULT_SEGMENT_SIZE as u64;
        let mut rem = vec![0u64; seg as usize];
        let mut big = vec![1u64; seg as usize];
        let mut lo = 1u64;
        while lo <= x {
            let hi = (lo + seg - 1).min(x);
            let len = (hi - lo + 1) as usize;
            for i in 0..len {
                rem[i] = lo + i as u64;
                big[i] = 1;
            }
            for &p in small {
                let p = p as u64;
                let start = lo.div_ceil(p) * p;
                let mut m = start;
                while m <= hi {
                    let i = (m - lo) as usize;
                    while rem[i] % p == 0 {
                        rem[i] /= p;
                    }
                    big[i] = p;
                    m += p;
                }
            }
            for i in 0..len {
                let pf = if rem[i] > 1 { rem[i] } else { big[i] };
                f(lo + i as u64, pf);
            }
            lo = hi + 1;
        }
        Ok(())
    }
}

fn check_s(s: f64) -> Result<()> {
    if !(s > 0.0) {
        return Err(Error::Domain(format!("partial zeta needs s > 0, got {s}")));
    }
    Ok(())
}

pub(crate) fn isqrt(n: u64) -> u64 {
    let mut r = (n as f64).sqrt() as u64;
    while r * r > n {
        r -= 1;
    }
    while (r + 1) * (r + 1) <= n {
        r += 1;
    }
    r
}

fn simple_sieve(limit: usize) -> Vec<u32> {
    let mut composite = vec![false; limit + 1];
    let mut out = Vec::new();
    for i in 2..=limit {
        if !composite[i] {
            out.push(i as u32);
            let mut j = i * i;
            while j <= limit {
                composite[j] = true;
                j += i;
            }
        }
    }
    out
}

fn segmented_sieve(limit: u64, segment: usize) -> Vec<u32> {
    let root = isqrt(limit) as usize;
    let base = simple_sieve(root.max(2));
    let mut primes: Vec<u32> = base.iter().copied().filter(|&p| p as u64 <= limit).collect();
    let mut flags = vec![true; segment];
    let mut lo = root.max(2) as u64 + 1;
    while lo <= limit {
        let hi = (lo + segment as u64 - 1).min(limit);
        let len = (hi - lo + 1) as usize;
        flags[..len].fill(true);
        for &p in &base {
            let p = p as u64;
            if p * p > hi {
                break;
            }
            let mut m = (lo.div_ceil(p) * p).max(p * p);
            while m <= hi {
                flags[(m - lo) as usize] = false;
                m += p;
            }
        }
        primes.extend(
            flags[..len]
                .iter()
                .enumerate()
                .filter(|(_, &f)| f)
                .map(|(i, _)| (lo + i as u64) as u32),
        );
        lo = hi + 1;
    }
    primes
}
