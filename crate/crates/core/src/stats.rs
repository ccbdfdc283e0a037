//! Statistics of the largest prime factor and of the longest cycle of a
//! random permutation.

use num_rational::Ratio;
use serde::Serialize;

use crate::consts::{EULER_GAMMA, EXP_GAMMA};
use crate::error::{Error, Result};
use crate::numeric::{gauss_legendre, CompensatedSum};
use crate::primes::{isqrt, PrimeTable};
use crate::special_functions::{e1, ein, RhoEvaluator};

/// Largest n accepted by the partition enumerations.
pub const MAX_PARTITION_N: u32 = 20;
/// Largest x accepted by [`sum_log_p`] and [`sum_recip_p`].
pub const MAX_LPF_X: u64 = 10_000_000;

// ρ(u)/(1+u) ≤ 1/((1+u) Γ(u+1)) is below 1e-30 here
const RHO_CUTOFF: f64 = 30.0;
const SHEPP_LLOYD_CUTOFF: f64 = 45.0;

/// λ = ∫₀^∞ ρ(u)/(1+u)² du.
pub fn golomb_dickman_rho() -> Result<f64> {
    golomb_dickman_rho_with(RhoEvaluator::global())
}

pub fn golomb_dickman_rho_with(eval: &RhoEvaluator) -> Result<f64> {
    let rule = gauss_legendre(32);
    let mut acc = CompensatedSum::new();
    acc.add(0.5);
    let mut a = 1.0;
    while a < RHO_CUTOFF {
        let mut err = None;
        acc.add(rule.integrate(a, a + 1.0, |u| match eval.rho(u) {
            Ok(r) => r / ((1.0 + u) * (1.0 + u)),
            Err(e) => {
                err = Some(e);
                f64::NAN
            }
        }));
        if let Some(e) = err {
            return Err(e);
        }
        a += 1.0;
    }
    // ρ is decreasing, so the tail is at most ρ(U)/(1+U)
    let tail = eval.rho(RHO_CUTOFF)? / (1.0 + RHO_CUTOFF);
    if tail > 1e-12 {
        return Err(Error::Tolerance(format!("Golomb-Dickman tail bound {tail:e}")));
    }
    Ok(acc.value())
}

/// exp(−x − E₁(x)); below 1 it is written as e^γ x exp(−x − Ein(x)) to stay
/// finite at 0.
pub fn shepp_lloyd_integrand(x: f64) -> Result<f64> {
    if x == 0.0 {
        return Ok(0.0);
    }
    if x >= 1.0 {
        return Ok((-x - e1(x)?).exp());
    }
    Ok(EXP_GAMMA * x * (-x - ein(x)?).exp())
}

/// λ = ∫₀^∞ exp(−x − E₁(x)) dx.
pub fn golomb_dickman_shepp_lloyd() -> Result<f64> {
    let rule = gauss_legendre(32);
    let mut acc = CompensatedSum::new();
    let mut a = 0.0;
    while a < SHEPP_LLOYD_CUTOFF {
        let mut err = None;
        acc.add(rule.integrate(a, a + 1.0, |x| {
            shepp_lloyd_integrand(x).unwrap_or_else(|e| {
                err = Some(e);
                f64::NAN
            })
        }));
        if let Some(e) = err {
            return Err(e);
        }
        a += 1.0;
    }
    // the integrand is below e^{−x} beyond this point
    let tail = (-SHEPP_LLOYD_CUTOFF).exp();
    if tail > 1e-12 {
        return Err(Error::Tolerance(format!("Shepp-Lloyd tail bound {tail:e}")));
    }
    Ok(acc.value())
}

pub type Rational = Ratio<u128>;

/// Expected longest cycle of a random permutation of n letters.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PartitionCycleSummary {
    pub n: u32,
    /// L_n
    pub expected_longest: Rational,
    /// μ_n = L_n / n
    pub mu: Rational,
}

fn check_n(n: u32) -> Result<()> {
    if n == 0 {
        return Err(Error::Domain("n must be at least 1".into()));
    }
    if n > MAX_PARTITION_N {
        return Err(Error::Cost(format!("partition enumeration limited to n <= {MAX_PARTITION_N}")));
    }
    Ok(())
}

fn factorial(n: u32) -> u128 {
    (1..=n as u128).product()
}

/// Calls `f(largest part, number of permutations with that cycle type)` for
/// each partition of n.
pub fn for_each_cycle_type<F: FnMut(u32, u128)>(n: u32, mut f: F) -> Result<()> {
    check_n(n)?;
    let nf = factorial(n);
    let mut mult = vec![0u32; n as usize + 1];
    fn rec<F: FnMut(u32, u128)>(rest: u32, max: u32, mult: &mut [u32], nf: u128, top: u32, f: &mut F) {
        if rest == 0 {
            let mut denom: u128 = 1;
            for (k, &c) in mult.iter().enumerate().skip(1) {
                denom *= (k as u128).pow(c) * factorial(c);
            }
            f(top, nf / denom);
            return;
        }
        for k in (1..=max.min(rest)).rev() {
            mult[k as usize] += 1;
            rec(rest - k, k, mult, nf, if top == 0 { k } else { top }, f);
            mult[k as usize] -= 1;
        }
    }
    rec(n, n, &mut mult, nf, 0, &mut f);
    Ok(())
}

pub fn mu_exact(n: u32) -> Result<PartitionCycleSummary> {
    let mut total: u128 = 0;
    for_each_cycle_type(n, |top, count| total += top as u128 * count)?;
    let expected_longest = Ratio::new(total, factorial(n));
    Ok(PartitionCycleSummary {
        n,
        expected_longest,
        mu: expected_longest / n as u128,
    })
}

/// Fraction of permutations of n letters whose longest cycle is ≤ n/u.
pub fn longest_cycle_cdf(n: u32, u: f64) -> Result<Rational> {
    if !(u >= 1.0) {
        return Err(Error::Domain(format!("u = {u} must be at least 1")));
    }
    let bound = n as f64 / u;
    let mut good: u128 = 0;
    for_each_cycle_type(n, |top, count| {
        if top as f64 <= bound {
            good += count;
        }
    })?;
    Ok(Ratio::new(good, factorial(n)))
}

/// Σ_{n≤x} log P(n) with its one- and two-term predictions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LogPSum {
    pub x: u64,
    pub exact: f64,
    /// λ x log x
    pub leading: f64,
    /// λ x log x − λ(1−γ) x
    pub sharpened: f64,
}

/// Σ_{2≤n≤x} 1/P(n) with the estimate x ∫₂^x ρ(log x/log t) t^{−2} dt.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RecipPSum {
    pub x: u64,
    pub exact: f64,
    pub estimate: f64,
}

fn check_lpf(x: u64, table: &PrimeTable) -> Result<()> {
    if x > MAX_LPF_X {
        return Err(Error::Cost(format!("largest-prime-factor sieve limited to x <= {MAX_LPF_X}")));
    }
    let root = isqrt(x);
    if root > table.limit() {
        return Err(Error::InsufficientTable {
            limit: table.limit(),
            needed: root,
        });
    }
    Ok(())
}

pub fn sum_log_p(x: u64, table: &PrimeTable) -> Result<LogPSum> {
    check_lpf(x, table)?;
    let mut acc = CompensatedSum::new();
    table.for_each_largest_prime_factor(x, |_, p| acc.add((p as f64).ln()))?;
    let lambda = golomb_dickman_rho()?;
    let xf = x as f64;
    let leading = if x == 0 { 0.0 } else { lambda * xf * xf.ln() };
    Ok(LogPSum {
        x,
        exact: acc.value(),
        leading,
        sharpened: leading - lambda * (1.0 - EULER_GAMMA) * xf,
    })
}

pub fn sum_recip_p(x: u64, table: &PrimeTable) -> Result<RecipPSum> {
    check_lpf(x, table)?;
    let mut acc = CompensatedSum::new();
    table.for_each_largest_prime_factor(x, |n, p| {
        if n >= 2 {
            acc.add(1.0 / p as f64);
        }
    })?;
    Ok(RecipPSum {
        x,
        exact: acc.value(),
        estimate: recip_p_estimate(x as f64)?,
    })
}

/// x ∫₂^x ρ(log x/log t) t^{−2} dt, integrated in s = log t with panels
/// ending where log x/s is an integer.
pub fn recip_p_estimate(x: f64) -> Result<f64> {
    if x <= 2.0 {
        return Ok(0.0);
    }
    let eval = RhoEvaluator::global();
    let lx = x.ln();
    let lo = 2f64.ln();
    let mut cuts = vec![lo, lx];
    let mut k = 2.0;
    while lx / k > lo {
        cuts.push(lx / k);
        k += 1.0;
    }
    cuts.sort_by(f64::total_cmp);
    let rule = gauss_legendre(32);
    let mut acc = CompensatedSum::new();
    let mut err = None;
    for w in cuts.windows(2) {
        // split long panels so the exponential weight stays resolved
        let pieces = ((w[1] - w[0]).ceil() as usize).max(1);
        let h = (w[1] - w[0]) / pieces as f64;
        for i in 0..pieces {
            let a = w[0] + i as f64 * h;
            acc.add(rule.integrate(a, a + h, |s| {
                eval.rho(lx / s).unwrap_or_else(|e| {
                    err = Some(e);
                    f64::NAN
                }) * (-s).exp()
            }));
        }
    }
    if let Some(e) = err {
        return Err(e);
    }
    Ok(x * acc.value())
}
