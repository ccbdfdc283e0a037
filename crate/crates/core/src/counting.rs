//! Exact counts of friable (Ψ) and rough (Φ) integers, the identities they
//! satisfy, and the classical estimates for them.

use std::collections::HashMap;
use std::f64::consts::PI;

use serde::Serialize;

use crate::consts::EXP_GAMMA;
use crate::error::{Error, Result};
use crate::numeric::{adaptive_quad, gauss_legendre, CompensatedSum};
use crate::primes::{isqrt, PrimeTable};
use crate::special_functions::{rho, OmegaEvaluator, RhoEvaluator};

/// Default ceiling on x for the exact counters.
pub const DEFAULT_MAX_EXACT_X: f64 = 1e9;
/// Ceiling on x for [`psi_bruteforce`].
pub const BRUTEFORCE_MAX_X: u64 = 1_000_000;
/// Ceiling on x for [`hildebrand_identity_check`].
pub const HILDEBRAND_MAX_X: f64 = 1e5;
/// Ceiling on the number of unit panels x/y used by [`lambda_debruijn`].
pub const LAMBDA_MAX_PANELS: f64 = 1e7;
const MEMO_CAPACITY: usize = 1 << 22;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum CountMethod {
    BuchstabRecursion,
    LegendreRecursion,
    LargestPrimeFactorSieve,
}

/// An exact count together with its inputs.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CountResult {
    pub x: f64,
    pub y: f64,
    pub u: f64,
    pub value: u64,
    pub method: CountMethod,
}

fn u_of(x: f64, y: f64) -> f64 {
    x.ln() / y.ln()
}

fn check_x(x: f64, max_x: f64) -> Result<u64> {
    if !(x >= 1.0) {
        return Err(Error::Domain(format!("x = {x} must be at least 1")));
    }
    if x > max_x {
        return Err(Error::Cost(format!("x = {x} exceeds the exact-count ceiling {max_x:e}")));
    }
    Ok(x.floor() as u64)
}

fn require_table(table: &PrimeTable, needed: f64) -> Result<()> {
    if needed > table.limit() as f64 {
        return Err(Error::InsufficientTable {
            limit: table.limit(),
            needed: needed.ceil() as u64,
        });
    }
    Ok(())
}

fn primes_le(table: &PrimeTable, n: u64) -> usize {
    if n >= u32::MAX as u64 {
        return table.len();
    }
    table.primes().partition_point(|&p| p as u64 <= n)
}

/// Memoized Ψ(n, p_k) over a fixed prime table.
///
/// Uses Ψ(n, p_k) = 1 + Σ_{i ≤ k} Ψ(⌊n/p_i⌋, p_i), where the terms with
/// p_i > √n collapse to ⌊n/p_i⌋.
pub struct PsiCounter<'a> {
    table: &'a PrimeTable,
    memo: HashMap<(u64, u32), u64>,
    max_x: f64,
}

impl<'a> PsiCounter<'a> {
    pub fn new(table: &'a PrimeTable) -> Self {
        Self::with_max_x(table, DEFAULT_MAX_EXACT_X)
    }

    pub fn with_max_x(table: &'a PrimeTable, max_x: f64) -> Self {
        Self {
            table,
            memo: HashMap::new(),
            max_x,
        }
    }

    /// Ψ(x, y) as a bare integer.
    pub fn count(&mut self, x: f64, y: f64) -> Result<u64> {
        if x < 1.0 && x >= 0.0 {
            return Ok(0);
        }
        let n = check_x(x, self.max_x)?;
        if y < 2.0 {
            return Ok(1);
        }
        if y >= x {
            return Ok(n);
        }
        require_table(self.table, y.min(x))?;
        let k = self.table.count_le(y);
        Ok(self.psi(n, k))
    }

    fn psi(&mut self, n: u64, k: usize) -> u64 {
        if n == 0 {
            return 0;
        }
        if k == 0 {
            return 1;
        }
        let primes = self.table.primes();
        if primes[k - 1] as u64 >= n {
            return n;
        }
        let key = (n, k as u32);
        if let Some(&v) = self.memo.get(&key) {
            return v;
        }
        let root = isqrt(n);
        let small = primes_le(self.table, root).min(k);
        let mut total = 1u64;
        for i in 0..small {
            total += self.psi(n / primes[i] as u64, i + 1);
        }
        total += self.floor_sum(n, small, primes_le(self.table, n).min(k));
        if self.memo.len() >= MEMO_CAPACITY {
            self.memo.clear();
        }
        self.memo.insert(key, total);
        total
    }

    // Σ ⌊n/p⌋ over primes with index in [from, to), all of them above √n.
    fn floor_sum(&self, n: u64, from: usize, to: usize) -> u64 {
        if from >= to {
            return 0;
        }
        let primes = &self.table.primes()[from..to];
        let root = isqrt(n);
        if primes.len() as u64 <= 2 * root {
            return primes.iter().map(|&p| n / p as u64).sum();
        }
        // group the primes by q = ⌊n/p⌋ ∈ [1, √n]
        let lo_p = primes[0] as u64;
        let hi_p = *primes.last().expect("nonempty") as u64;
        let mut total = 0u64;
        let q_max = n / lo_p;
        let q_min = n / hi_p;
        for q in q_min..=q_max {
            let upper = (n / q).min(hi_p);
            let lower = (n / (q + 1)).max(lo_p - 1);
            if upper > lower {
                let c = primes_le(self.table, upper) - primes_le(self.table, lower);
                total += q * c as u64;
            }
        }
        total
    }
}

/// Exact Ψ(x, y).
pub fn psi_exact(x: f64, y: f64, table: &PrimeTable) -> Result<CountResult> {
    let value = PsiCounter::new(table).count(x, y)?;
    Ok(CountResult {
        x,
        y,
        u: u_of(x, y),
        value,
        method: CountMethod::BuchstabRecursion,
    })
}

/// Ψ(x, y) by factoring every n ≤ x with its own smallest-prime-factor sieve.
pub fn psi_bruteforce(x: u64, y: f64) -> Result<u64> {
    if x > BRUTEFORCE_MAX_X {
        return Err(Error::Cost(format!("brute force limited to x <= {BRUTEFORCE_MAX_X}")));
    }
    if x == 0 {
        return Ok(0);
    }
    let lpf = largest_prime_factors(x as usize);
    Ok((1..=x as usize).filter(|&n| (lpf[n] as f64) <= y.max(1.0)).count() as u64)
}

/// P(n) for 0 ≤ n ≤ limit, with P(0) = 0 and P(1) = 1.
pub fn largest_prime_factors(limit: usize) -> Vec<u32> {
    let mut lpf = vec![0u32; limit + 1];
    if limit >= 1 {
        lpf[1] = 1;
    }
    for p in 2..=limit {
        if lpf[p] == 0 {
            let mut m = p;
            while m <= limit {
                lpf[m] = p as u32;
                m += p;
            }
        }
    }
    lpf
}

/// Memoized Φ(n, p_a) over a fixed prime table.
pub struct PhiCounter<'a> {
    table: &'a PrimeTable,
    memo: HashMap<(u64, u32), u64>,
    max_x: f64,
}

impl<'a> PhiCounter<'a> {
    pub fn new(table: &'a PrimeTable) -> Self {
        Self {
            table,
            memo: HashMap::new(),
            max_x: DEFAULT_MAX_EXACT_X,
        }
    }

    pub fn count(&mut self, x: f64, y: f64) -> Result<u64> {
        let n = check_x(x, self.max_x)?;
        if y < 2.0 {
            return Ok(n);
        }
        require_table(self.table, y.min(x))?;
        let a = self.table.count_le(y.min(x));
        Ok(self.phi(n, a))
    }

    fn phi(&mut self, n: u64, a: usize) -> u64 {
        if n == 0 {
            return 0;
        }
        if a == 0 {
            return n;
        }
        let primes = self.table.primes();
        if primes[a - 1] as u64 >= n {
            return 1;
        }
        // below p_{a+1}² only 1 and the primes in (p_a, n] survive
        if n <= self.table.limit() && (a == primes.len() || n < (primes[a] as u64).pow(2)) {
            return 1 + primes_le(self.table, n) as u64 - a as u64;
        }
        let key = (n, a as u32);
        if let Some(&v) = self.memo.get(&key) {
            return v;
        }
        let root = isqrt(n);
        let small = primes_le(self.table, root).min(a);
        let mut removed = 0u64;
        for i in 0..small {
            removed += self.phi(n / primes[i] as u64, i);
        }
        // p_i > √n leaves ⌊n/p_i⌋ < p_i, whose only unsifted element is 1
        removed += (primes_le(self.table, n).min(a) - small) as u64;
        let total = n - removed;
        if self.memo.len() >= MEMO_CAPACITY {
            self.memo.clear();
        }
        self.memo.insert(key, total);
        total
    }
}

/// Exact Φ(x, y): the n ≤ x with no prime factor ≤ y.
pub fn phi_exact(x: f64, y: f64, table: &PrimeTable) -> Result<CountResult> {
    let value = PhiCounter::new(table).count(x, y)?;
    Ok(CountResult {
        x,
        y,
        u: u_of(x, y),
        value,
        method: CountMethod::LegendreRecursion,
    })
}

/// Φ(x, y) by direct enumeration, for checking.
pub fn phi_bruteforce(x: u64, y: f64) -> Result<u64> {
    if x > BRUTEFORCE_MAX_X {
        return Err(Error::Cost(format!("brute force limited to x <= {BRUTEFORCE_MAX_X}")));
    }
    let mut spf = vec![0u32; x as usize + 1];
    for p in 2..=x as usize {
        if spf[p] == 0 {
            let mut m = p;
            while m <= x as usize {
                if spf[m] == 0 {
                    spf[m] = p as u32;
                }
                m += p;
            }
        }
    }
    Ok((1..=x as usize).filter(|&n| n == 1 || spf[n] as f64 > y).count() as u64)
}

/// Ψ(x, y) − Ψ(x, z) + Σ_{y<p≤z} Ψ(x/p, p); zero when the counts are right.
pub fn buchstab_identity_check(x: f64, y: f64, z: f64, table: &PrimeTable) -> Result<i128> {
    if !(1.0 <= y && y <= z && z <= x) {
        return Err(Error::Input(format!("need 1 <= y <= z <= x, got y={y}, z={z}, x={x}")));
    }
    require_table(table, z)?;
    let mut counter = PsiCounter::new(table);
    let mut r = counter.count(x, y)? as i128 - counter.count(x, z)? as i128;
    let lo = table.count_le(y);
    let hi = table.count_le(z);
    for &p in &table.primes()[lo..hi] {
        let p = p as f64;
        r += counter.count(x / p, p)? as i128;
    }
    Ok(r)
}

/// Ψ(x,y) log x − Σ_{n∈S(x,y)} log(x/n) − Σ_{p^m≤x, p≤y} Ψ(x/p^m, y) log p.
pub fn hildebrand_identity_check(x: f64, y: f64, table: &PrimeTable) -> Result<f64> {
    if x > HILDEBRAND_MAX_X {
        return Err(Error::Cost(format!("identity check limited to x <= {HILDEBRAND_MAX_X}")));
    }
    if !(y >= 2.0) {
        return Err(Error::Domain(format!("y = {y} must be at least 2")));
    }
    let n = check_x(x, HILDEBRAND_MAX_X)?;
    require_table(table, y.min(x))?;
    let lx = x.ln();
    let mut psi = 0u64;
    let mut logs = CompensatedSum::new();
    table.for_each_largest_prime_factor(n, |m, p| {
        if p as f64 <= y {
            psi += 1;
            logs.add(lx - (m as f64).ln());
        }
    })?;
    let mut counter = PsiCounter::new(table);
    let mut prime_powers = CompensatedSum::new();
    for &p in &table.primes()[..table.count_le(y.min(x))] {
        let p = p as f64;
        let mut q = p;
        while q <= x {
            prime_powers.add(counter.count(x / q, y)? as f64 * p.ln());
            q *= p;
        }
    }
    Ok(psi as f64 * lx - logs.value() - prime_powers.value())
}

/// x ρ(log x / log y).
pub fn psi_dickman(x: f64, y: f64) -> Result<f64> {
    if !(y >= 2.0) {
        return Err(Error::Domain(format!("y = {y} must be at least 2")));
    }
    if !(x >= 1.0) {
        return Err(Error::Domain(format!("x = {x} must be at least 1")));
    }
    Ok(x * rho(u_of(x, y))?)
}

/// de Bruijn's Λ(x, y) = x ∫₀^∞ ρ((log x − log t)/log y) d(⌊t⌋/t).
///
/// Evaluated after integrating by parts:
/// Λ = ⌊x⌋ − (x/log y) ∫₁^{x/y} ⌊t⌋ ρ(g − 1)/(g t²) dt, g = log(x/t)/log y,
/// with panels split at the integers and where g is an integer. Integer x
/// takes the right limit.
pub fn lambda_debruijn(x: f64, y: f64) -> Result<f64> {
    if !(y > 1.0) {
        return Err(Error::Domain(format!("y = {y} must exceed 1")));
    }
    if !(x > 0.0) {
        return Err(Error::Domain(format!("x = {x} must be positive")));
    }
    let floor_x = x.floor();
    if x <= y {
        return Ok(floor_x);
    }
    let top = x / y;
    if top > LAMBDA_MAX_PANELS {
        return Err(Error::Cost(format!("x/y = {top:e} exceeds {LAMBDA_MAX_PANELS:e} panels")));
    }
    let rho_eval = RhoEvaluator::global();
    let ly = y.ln();
    let lx = x.ln();
    // breakpoints: integers and t = x / y^k
    let mut cuts: Vec<f64> = Vec::new();
    let mut t = top;
    while t > 1.0 {
        cuts.push(t);
        t /= y;
    }
    let mut k = 2.0;
    while k < top {
        cuts.push(k);
        k += 1.0;
    }
    cuts.push(1.0);
    cuts.sort_by(f64::total_cmp);
    cuts.dedup_by(|a, b| (*a - *b).abs() <= 1e-12 * b.abs());
    let coarse = gauss_legendre(10);
    let fine = gauss_legendre(20);
    let mut acc = CompensatedSum::new();
    for w in cuts.windows(2) {
        let (a, b) = (w[0], w[1]);
        if b <= a {
            continue;
        }
        // keep ⌊t⌋ constant inside the panel
        let mid_floor = (0.5 * (a + b)).floor().max(1.0);
        let f = |t: f64| {
            let g = (lx - t.ln()) / ly;
            mid_floor * rho_eval.rho(g - 1.0).unwrap_or(f64::NAN) / (g * t * t)
        };
        let v1 = coarse.integrate(a, b, f);
        let v2 = fine.integrate(a, b, f);
        if (v1 - v2).abs() <= 1e-12 * v2.abs().max(1e-300) {
            acc.add(v2);
        } else {
            acc.add(adaptive_quad(f, a, b, 1e-15, 1e-12)?);
        }
    }
    let v = floor_x - x / ly * acc.value();
    if !v.is_finite() {
        return Err(Error::Tolerance(format!("Lambda({x}, {y}) did not evaluate")));
    }
    Ok(v)
}

/// Residual Λ(x,y) − Λ(x,z) + ∫_y^z Λ(x/t, t) dt/log t.
pub fn lambda_buchstab_residual(x: f64, y: f64, z: f64) -> Result<f64> {
    if !(1.0 < y && y <= z) {
        return Err(Error::Input(format!("need 1 < y <= z, got y={y}, z={z}")));
    }
    let mut cuts = vec![y, z];
    // Λ(x/t, t) jumps where x/t crosses an integer
    let mut k = (x / z).ceil();
    while k <= (x / y).floor() {
        cuts.push(x / k);
        k += 1.0;
    }
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();
    let mut acc = CompensatedSum::new();
    for w in cuts.windows(2) {
        if w[1] > w[0] {
            acc.add(adaptive_quad(
                |t: f64| lambda_debruijn(x / t, t).unwrap_or(f64::NAN) / t.ln(),
                w[0],
                w[1],
                1e-9,
                1e-9,
            )?);
        }
    }
    Ok(lambda_debruijn(x, y)? - lambda_debruijn(x, z)? + acc.value())
}

/// The saddle point α(x, y) of x^σ ζ(σ, y).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SaddlePoint {
    pub alpha: f64,
    /// log(1 + y/log x)/log y
    pub approximation: f64,
    /// |Σ log p/(p^α − 1) − log x|
    pub residual: f64,
}

/// Solve Σ_{p≤y} log p/(p^α − 1) = log x.
pub fn rankin_alpha(x: f64, y: f64, table: &PrimeTable) -> Result<SaddlePoint> {
    if !(y >= 2.0) {
        return Err(Error::Domain(format!("y = {y} must be at least 2")));
    }
    if !(x > 1.0) {
        return Err(Error::Domain(format!("x = {x} must exceed 1")));
    }
    require_table(table, y)?;
    let lx = x.ln();
    let g = |s: f64| -> Result<f64> { Ok(-table.log_zeta_derivative(s, y, 1)? - lx) };
    let (mut lo, mut hi) = (0.5f64, 1.0f64);
    while g(hi)? > 0.0 {
        lo = hi;
        hi *= 2.0;
    }
    while g(lo)? < 0.0 {
        hi = lo;
        lo *= 0.5;
    }
    let mut s = 0.5 * (lo + hi);
    for _ in 0..200 {
        let v = g(s)?;
        if v.abs() <= 1e-12 * lx {
            break;
        }
        if v > 0.0 {
            lo = s;
        } else {
            hi = s;
        }
        let d = -table.log_zeta_derivative(s, y, 2)?;
        let newton = s - v / d;
        s = if newton > lo && newton < hi { newton } else { 0.5 * (lo + hi) };
        if hi - lo <= 1e-16 * hi {
            break;
        }
    }
    Ok(SaddlePoint {
        alpha: s,
        approximation: (1.0 + y / lx).ln() / y.ln(),
        residual: g(s)?.abs(),
    })
}

/// Rankin's bound x^σ ζ(σ, y); σ defaults to α(x, y).
pub fn psi_rankin_upper(x: f64, y: f64, table: &PrimeTable, sigma: Option<f64>) -> Result<f64> {
    let s = match sigma {
        Some(s) if !(s > 0.0) => {
            return Err(Error::Domain(format!("sigma = {s} must be positive")));
        }
        Some(s) => s,
        None => rankin_alpha(x, y, table)?.alpha,
    };
    Ok((s * x.ln() + table.log_partial_zeta(s, y)?).exp())
}

/// The largest k with y^k ≤ x.
pub fn floor_u(x: f64, y: f64) -> u64 {
    let mut k = u_of(x, y).floor().max(0.0) as i32;
    while k > 0 && y.powi(k) > x {
        k -= 1;
    }
    while y.powi(k + 1) <= x {
        k += 1;
    }
    k as u64
}

/// C(⌊u⌋ + π(y), π(y)): products of at most ⌊u⌋ primes up to y.
pub fn psi_binomial_lower(x: f64, y: f64, table: &PrimeTable) -> Result<u128> {
    if !(y >= 2.0) || !(x >= 1.0) {
        return Err(Error::Domain(format!("need x >= 1 and y >= 2, got x={x}, y={y}")));
    }
    require_table(table, y)?;
    let k = floor_u(x, y) as u128;
    let m = table.count_le(y) as u128;
    binomial(k + m, m.min(k))
        .ok_or_else(|| Error::Range(format!("binomial C({}, {m}) overflows 128 bits", k + m)))
}

fn binomial(n: u128, k: u128) -> Option<u128> {
    let mut r: u128 = 1;
    for i in 0..k {
        // r·(n−i) is divisible by (i+1) after the product
        r = r.checked_mul(n - i)? / (i + 1);
    }
    Some(r)
}

/// Hildebrand–Tenenbaum: x^α ζ(α, y) / (α sqrt(2π φ₂(α, y))).
pub fn psi_saddle_ht(x: f64, y: f64, table: &PrimeTable) -> Result<f64> {
    if !(y >= 2.0) {
        return Err(Error::Domain(format!("y = {y} must be at least 2")));
    }
    if !(x >= y) {
        return Err(Error::Domain(format!("saddle estimate needs x >= y, got x={x}, y={y}")));
    }
    let a = rankin_alpha(x, y, table)?.alpha;
    let phi2 = table.log_zeta_derivative(a, y, 2)?;
    Ok((a * x.ln() + table.log_partial_zeta(a, y)? - (a * (2.0 * PI * phi2).sqrt()).ln()).exp())
}

/// Z = u log(1 + y/log x) + (y/log y) log(1 + log x/y), an estimate of log Ψ(x, y).
pub fn log_psi_z(x: f64, y: f64) -> Result<f64> {
    if !(y >= 2.0 && x >= y) {
        return Err(Error::Domain(format!("need x >= y >= 2, got x={x}, y={y}")));
    }
    let lx = x.ln();
    let ly = y.ln();
    Ok(lx / ly * (1.0 + y / lx).ln() + y / ly * (1.0 + lx / y).ln())
}

fn phi_prelude(x: f64, y: f64, table: &PrimeTable) -> Result<(f64, f64)> {
    if !(y >= 2.0) {
        return Err(Error::Domain(format!("y = {y} must be at least 2")));
    }
    let u = u_of(x, y);
    if !(u >= 1.0) {
        return Err(Error::Domain(format!("u = {u} must be at least 1")));
    }
    Ok((u, table.mertens_product(y)?))
}

/// x e^γ ω(u) ∏_{p<y} (1 − 1/p).
pub fn phi_buchstab_estimate(x: f64, y: f64, table: &PrimeTable) -> Result<f64> {
    let (u, mertens) = phi_prelude(x, y, table)?;
    Ok(x * EXP_GAMMA * OmegaEvaluator::global().omega(u)? * mertens)
}

/// x ∏_{p<y}(1 − 1/p) e^γ log y ∫₁^u y^{t−u} ω(t) dt.
pub fn phi_debruijn_refined(x: f64, y: f64, table: &PrimeTable) -> Result<f64> {
    let (u, mertens) = phi_prelude(x, y, table)?;
    let omega = OmegaEvaluator::global();
    let ly = y.ln();
    let rule = gauss_legendre(24);
    let mut acc = CompensatedSum::new();
    let mut a = 1.0;
    while a < u {
        let b = (a.floor() + 1.0).min(u);
        acc.add(rule.integrate(a, b, |t| {
            ((t - u) * ly).exp() * omega.omega(t).unwrap_or(f64::NAN)
        }));
        a = b;
    }
    let v = x * mertens * EXP_GAMMA * ly * acc.value();
    if !v.is_finite() {
        return Err(Error::Range(format!("refined estimate at u = {u} did not evaluate")));
    }
    Ok(v)
}

/// Configuration for [`estimate_bundle`].
#[derive(Debug, Clone, Copy)]
pub struct BundleConfig {
    /// Largest x for which the exact count is computed.
    pub max_exact_x: f64,
    /// Include Λ(x, y).
    pub lambda: bool,
}

impl Default for BundleConfig {
    fn default() -> Self {
        Self {
            max_exact_x: 1e8,
            lambda: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EstimateRatios {
    pub dickman: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
    pub rankin_upper: f64,
    pub binomial_lower: f64,
    pub saddle: f64,
    /// log Ψ / Z
    pub z_log: f64,
}

/// Every estimator evaluated at one (x, y).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EstimateBundle {
    pub x: f64,
    pub y: f64,
    pub u: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub exact: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub exact_omitted: Option<String>,
    pub dickman: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
    pub rankin_upper: f64,
    pub binomial_lower: f64,
    pub saddle: f64,
    pub z_log: f64,
    /// Estimate divided by the exact count; present with `exact`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ratios: Option<EstimateRatios>,
}

pub fn estimate_bundle(x: f64, y: f64, table: &PrimeTable, config: &BundleConfig) -> Result<EstimateBundle> {
    if !(y >= 2.0 && x >= y) {
        return Err(Error::Domain(format!("need x >= y >= 2, got x={x}, y={y}")));
    }
    let u = u_of(x, y);
    let (exact, exact_omitted) = if x <= config.max_exact_x {
        (Some(PsiCounter::with_max_x(table, config.max_exact_x).count(x, y)?), None)
    } else {
        (
            None,
            Some(format!("exact count skipped: x exceeds the configured ceiling {:e}", config.max_exact_x)),
        )
    };
    let dickman = psi_dickman(x, y)?;
    let lambda = if config.lambda { Some(lambda_debruijn(x, y)?) } else { None };
    let rankin_upper = psi_rankin_upper(x, y, table, None)?;
    let binomial_lower = psi_binomial_lower(x, y, table)? as f64;
    let saddle = psi_saddle_ht(x, y, table)?;
    let z_log = log_psi_z(x, y)?;
    let ratios = exact.map(|e| {
        let e = e as f64;
        EstimateRatios {
            dickman: dickman / e,
            lambda: lambda.map(|l| l / e),
            rankin_upper: rankin_upper / e,
            binomial_lower: binomial_lower / e,
            saddle: saddle / e,
            z_log: e.ln() / z_log,
        }
    });
    Ok(EstimateBundle {
        x,
        y,
        u,
        exact,
        exact_omitted,
        dickman,
        lambda,
        rankin_upper,
        binomial_lower,
        saddle,
        z_log,
        ratios,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::adaptive_quad;

    fn table() -> PrimeTable {
        PrimeTable::sieve(1_000_000).unwrap()
    }

    // trial-division largest prime factor
    fn lpf(mut n: u64) -> u64 {
        let mut best = 1;
        let mut d = 2;
        while d * d <= n {
            while n % d == 0 {
                best = d;
                n /= d;
            }
            d += 1;
        }
        if n > 1 {
            n
        } else {
            best
        }
    }

    #[test]
    fn psi_small_examples() {
        let t = table();
        assert_eq!(psi_exact(16.0, 3.0, &t).unwrap().value, 9);
        assert_eq!(psi_exact(100.0, 100.0, &t).unwrap().value, 100);
        assert_eq!(psi_exact(9.0, 3.0, &t).unwrap().value, 7);
        assert_eq!(psi_exact(50.0, 1.5, &t).unwrap().value, 1);
        assert_eq!(psi_bruteforce(16, 3.0).unwrap(), 9);
        assert_eq!(psi_bruteforce(1, 2.0).unwrap(), 1);
        assert_eq!(psi_bruteforce(30, 5.0).unwrap(), 18);
        assert!(matches!(psi_bruteforce(2_000_000, 5.0), Err(Error::Cost(_))));
        assert!(matches!(psi_exact(2e9, 5.0, &t), Err(Error::Cost(_))));
    }

    #[test]
    fn psi_matches_trial_division() {
        let t = table();
        let mut counter = PsiCounter::new(&t);
        for x in [1u64, 2, 17, 97, 100, 360, 1000, 4321] {
            for y in [2.0, 3.0, 7.0, 10.0, 31.0, 200.0] {
                let oracle = (1..=x).filter(|&n| lpf(n) as f64 <= y).count() as u64;
                assert_eq!(counter.count(x as f64, y).unwrap(), oracle, "x={x}, y={y}");
            }
        }
    }

    #[test]
    fn floor_sum_grouping_agrees() {
        let t = table();
        let c = PsiCounter::new(&t);
        let n = 500_000u64;
        let from = primes_le(&t, isqrt(n));
        let to = primes_le(&t, n);
        let direct: u64 = t.primes()[from..to].iter().map(|&p| n / p as u64).sum();
        assert_eq!(c.floor_sum(n, from, to), direct);
    }

    #[test]
    fn psi_simple_range_formula() {
        let t = table();
        let x = 10_000u64;
        for y in [100.0, 150.0, 5000.0] {
            let mut v = x;
            for &p in &t.primes()[t.count_le(y)..t.count_le(x as f64)] {
                v -= x / p as u64;
            }
            assert_eq!(psi_exact(x as f64, y, &t).unwrap().value, v);
        }
    }

    #[test]
    fn phi_examples() {
        let t = table();
        assert_eq!(phi_exact(30.0, 5.0, &t).unwrap().value, 8);
        assert_eq!(phi_exact(30.0, 30f64.sqrt(), &t).unwrap().value, 8);
        assert_eq!(phi_exact(10.0, 1.5, &t).unwrap().value, 10);
        for x in [100u64, 1000, 9999] {
            for y in [2.0, 3.0, 10.0, 50.0, 1000.0] {
                assert_eq!(phi_exact(x as f64, y, &t).unwrap().value, phi_bruteforce(x, y).unwrap());
            }
        }
    }

    #[test]
    fn phi_sieve_identity() {
        let t = table();
        for x in [1e3f64, 1e4, 1e5, 1e6] {
            let r = x.sqrt();
            let want = 1 + t.prime_pi(x).unwrap() - t.prime_pi(r).unwrap();
            assert_eq!(phi_exact(x, r, &t).unwrap().value, want);
        }
    }

    #[test]
    fn buchstab_examples() {
        let t = table();
        assert_eq!(buchstab_identity_check(100.0, 3.0, 10.0, &t).unwrap(), 0);
        assert_eq!(buchstab_identity_check(50.0, 7.0, 7.0, &t).unwrap(), 0);
        assert!(matches!(buchstab_identity_check(50.0, 9.0, 7.0, &t), Err(Error::Input(_))));
    }

    #[test]
    fn hildebrand_examples() {
        let t = table();
        for (x, y) in [(100.0f64, 5.0), (10.0, 10.0), (2.0, 2.0), (12345.6, 17.0)] {
            let r = hildebrand_identity_check(x, y, &t).unwrap();
            assert!(r.abs() <= 1e-6 * x * x.ln().max(1.0), "x={x}, y={y}: {r}");
        }
    }

    #[test]
    fn dickman_examples() {
        assert!((psi_dickman(1e6, 1e3).unwrap() - 1e6 * (1.0 - 2f64.ln())).abs() < 1e-3);
        assert_eq!(psi_dickman(10.0, 20.0).unwrap(), 10.0);
        assert!((psi_dickman(1e6, 100.0).unwrap() / 1e6 - 0.0486084).abs() < 5e-7);
    }

    #[test]
    fn lambda_examples() {
        assert_eq!(lambda_debruijn(10.5, 11.0).unwrap(), 10.0);
        // jump part plus continuous part, summed directly
        let (x, y) = (1000.0f64, 31.6f64);
        let g = |t: f64| (x.ln() - t.ln()) / y.ln();
        let mut jump = 0.0;
        for n in 1..=1000 {
            jump += rho(g(n as f64)).unwrap() / n as f64;
        }
        let mut cont = 0.0;
        for k in 1..1000 {
            let k = k as f64;
            cont += adaptive_quad(|t| rho(g(t)).unwrap() * k / (t * t), k, k + 1.0, 1e-14, 1e-12).unwrap();
        }
        let l = lambda_debruijn(x, y).unwrap();
        assert!((l - x * (jump - cont)).abs() < 1e-6, "{l}");
        let t = table();
        let exact = psi_exact(1e6, 1e3, &t).unwrap().value as f64;
        assert!((lambda_debruijn(1e6, 1e3).unwrap() / exact - 1.0).abs() <= 0.02);
        let r = lambda_buchstab_residual(100.5, 10.0, 20.0).unwrap();
        assert!(r.abs() <= 1e-4 * 100.5, "{r}");
    }

    #[test]
    fn rankin_alpha_examples() {
        let t = table();
        let a = rankin_alpha(4.0, 2.0, &t).unwrap().alpha;
        assert!((a - 1.5f64.ln() / 2f64.ln()).abs() < 1e-12);
        assert!((rankin_alpha(2.0, 2.0, &t).unwrap().alpha - 1.0).abs() < 1e-12);
        let s = rankin_alpha(1e6, 100.0, &t).unwrap();
        assert!(s.residual <= 1e-10 * 1e6f64.ln());
        assert!(s.approximation > 0.0 && s.approximation < 1.0);
    }

    #[test]
    fn rankin_bounds() {
        let t = table();
        let exact = psi_exact(1e4, 100.0, &t).unwrap().value as f64;
        assert!(psi_rankin_upper(1e4, 100.0, &t, None).unwrap() >= exact);
        assert!(psi_rankin_upper(50.0, 100.0, &t, Some(1.0)).unwrap() >= 50.0);
        let (x, y) = (1e5f64, 50.0f64);
        let s = 1.0 - 1.0 / (2.0 * y.ln());
        let u = x.ln() / y.ln();
        assert!(psi_rankin_upper(x, y, &t, Some(s)).unwrap() <= 50.0 * x * (-u / 2.0).exp() * y.ln());
        assert!(matches!(psi_rankin_upper(x, y, &t, Some(0.0)), Err(Error::Domain(_))));
    }

    #[test]
    fn binomial_examples() {
        let t = table();
        assert_eq!(psi_binomial_lower(9.0, 3.0, &t).unwrap(), 6);
        assert_eq!(floor_u(1000.0, 10.0), 3);
        assert_eq!(floor_u(999.0, 10.0), 2);
        let exact = psi_exact(1e4, 10.0, &t).unwrap().value as u128;
        assert!(psi_binomial_lower(1e4, 10.0, &t).unwrap() <= exact);
        assert_eq!(psi_binomial_lower(20.0, 20.0, &t).unwrap(), 1 + 8);
        assert!(matches!(psi_binomial_lower(1e300, 1e5, &t), Err(Error::Range(_))));
    }

    #[test]
    fn saddle_examples() {
        let t = table();
        for (x, y, band) in [(1e6, 100.0, 0.25), (1e4, 100.0, 0.3)] {
            let r = psi_saddle_ht(x, y, &t).unwrap() / psi_exact(x, y, &t).unwrap().value as f64;
            assert!((r - 1.0).abs() <= band, "x={x}: {r}");
        }
        let (x, y) = (1e5, 30.0);
        let a = rankin_alpha(x, y, &t).unwrap().alpha;
        let phi2 = t.log_zeta_derivative(a, y, 2).unwrap();
        let q = psi_rankin_upper(x, y, &t, None).unwrap() / psi_saddle_ht(x, y, &t).unwrap();
        assert!((q - a * (2.0 * PI * phi2).sqrt()).abs() < 1e-10 * q);
    }

    #[test]
    fn z_examples() {
        let t = table();
        for y in [5.0, 10.0, 20.0] {
            let e = psi_exact(1e6, y, &t).unwrap().value as f64;
            assert!((e.ln() / log_psi_z(1e6, y).unwrap() - 1.0).abs() <= 0.2, "y={y}");
        }
        let (x, y) = (1e4f64, 1e3f64);
        let u = x.ln() / y.ln();
        let first = u * (1.0 + y / x.ln()).ln();
        assert!(first > log_psi_z(x, y).unwrap() - first);
        let z = log_psi_z(1e4, 1e4).unwrap();
        assert!((1e4f64.ln() / z - 1.0).abs() <= 0.2);
        assert!(log_psi_z(10.0, 20.0).is_err());
    }

    #[test]
    fn phi_estimates() {
        let t = table();
        let exact = phi_exact(1e6, 1e3, &t).unwrap().value as f64;
        let e1 = phi_buchstab_estimate(1e6, 1e3, &t).unwrap();
        assert!((e1 / exact - 1.0).abs() <= 0.2);
        let lx = 1e6f64.ln();
        assert!((e1 / (1e6 / lx) - 1.0).abs() <= 0.3);
        let refined = phi_debruijn_refined(1e6, 1e3, &t).unwrap();
        assert!((refined / e1 - 1.0).abs() <= 0.1);
        assert!(phi_buchstab_estimate(10.0, 100.0, &t).is_err());
        // large u: ω → e^{−γ}, so the estimate tends to x ∏(1 − 1/p)
        let far = phi_buchstab_estimate(1e12, 5.0, &t).unwrap();
        let m = t.mertens_product(5.0).unwrap();
        assert!((far / (1e12 * m) - 1.0).abs() < 1e-6);
    }

    #[test]
    fn bundle_brackets() {
        let t = table();
        let b = estimate_bundle(1e4, 100.0, &t, &BundleConfig::default()).unwrap();
        let e = b.exact.unwrap() as f64;
        assert!(b.binomial_lower <= e && e <= b.rankin_upper);
        let r = b.ratios.unwrap();
        assert!(r.binomial_lower <= 1.0 && r.rankin_upper >= 1.0);
        let small = estimate_bundle(10.0, 10.0, &t, &BundleConfig::default()).unwrap();
        assert_eq!(small.exact, Some(10));
        assert_eq!(small.dickman, 10.0);
        let skipped = estimate_bundle(1e6, 100.0, &t, &BundleConfig { max_exact_x: 1e5, lambda: false }).unwrap();
        assert!(skipped.exact.is_none() && skipped.exact_omitted.is_some());
    }
}
