//! Named solutions of the differential–difference family (ρ, ω, τ_δ, σ_κ),
//! the complementary exponential integral and the identities built on it.

use std::f64::consts::PI;
use std::sync::OnceLock;

use crate::consts::{EULER_GAMMA, EXP_NEG_GAMMA, GOLDEN_RATIO};
use crate::dde::{solve_forward, DdeSpec, PiecewiseSolution};
use crate::error::{Error, Result};
use crate::numeric::{gauss_legendre, CompensatedSum};
use crate::poly::LocalPoly;

/// Default upper end of the shared ρ evaluator.
pub const RHO_U_MAX: f64 = 500.0;
/// Largest |s| accepted by [`ein`].
pub const EIN_MAX_ARG: f64 = 750.0;
/// Above this argument Ein switches to γ + log s + E₁(s).
pub const EIN_SWITCH: f64 = 8.0;

const SEED_DEGREE: usize = 40;
// Kept below the solver degree so the first propagated piece is not truncated.
const SIGMA_FIT_DEGREE: usize = 24;

/// Taylor coefficients of `alpha + beta·log u` about `u = 1.5`.
fn log_taylor(alpha: f64, beta: f64, n: usize) -> Vec<f64> {
    let c = 1.5f64;
    let mut out = Vec::with_capacity(n + 1);
    out.push(alpha + beta * c.ln());
    let mut p = 1.0 / c;
    for k in 1..=n {
        let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
        out.push(beta * sign * p / k as f64);
        p /= c;
    }
    out
}

fn check_u_max(u_max: f64) -> Result<f64> {
    if !u_max.is_finite() || u_max < 2.0 {
        return Err(Error::Input(format!("u_max = {u_max} must be finite and at least 2")));
    }
    Ok(u_max.max(3.0))
}

fn solve_from_two(a: f64, b: f64, seed: LocalPoly, u_max: f64) -> Result<PiecewiseSolution> {
    let intervals = (u_max - 2.0).ceil() as usize + 1;
    let spec = DdeSpec::new(a, b, 2.0, seed)?.with_max_intervals(intervals.max(1));
    solve_forward(&spec, u_max)
}

/// The Dickman–de Bruijn function.
#[derive(Debug, Clone)]
pub struct RhoEvaluator {
    solution: PiecewiseSolution,
    u_max: f64,
}

impl RhoEvaluator {
    pub fn new(u_max: f64) -> Result<Self> {
        let top = check_u_max(u_max)?;
        let seed = LocalPoly::from_taylor(1.0, 2.0, &log_taylor(1.0, -1.0, SEED_DEGREE));
        Ok(Self {
            solution: solve_from_two(0.0, 1.0, seed, top)?,
            u_max,
        })
    }

    /// Wrap a previously computed solution, e.g. one read back from the cache.
    pub fn from_solution(solution: PiecewiseSolution, u_max: f64) -> Result<Self> {
        let top = check_u_max(u_max)?;
        if solution.a() != 0.0 || solution.b() != 1.0 || solution.u0() != 2.0 {
            return Err(Error::Spec(format!(
                "solution has (a, b, u0) = ({}, {}, {}), expected (0, 1, 2)",
                solution.a(),
                solution.b(),
                solution.u0()
            )));
        }
        if solution.u_max() < top {
            return Err(Error::Range(format!(
                "solution reaches {}, below the requested {top}",
                solution.u_max()
            )));
        }
        Ok(Self { solution, u_max })
    }

    /// Shared evaluator covering `[0, 500]`.
    pub fn global() -> &'static RhoEvaluator {
        static RHO: OnceLock<RhoEvaluator> = OnceLock::new();
        RHO.get_or_init(|| RhoEvaluator::new(RHO_U_MAX).expect("rho solve"))
    }

    pub fn u_max(&self) -> f64 {
        self.u_max
    }

    pub fn solution(&self) -> &PiecewiseSolution {
        &self.solution
    }

    fn guard(&self, u: f64) -> Result<()> {
        if u.is_nan() || u > self.u_max {
            return Err(Error::Range(format!("rho({u}) beyond u_max = {}", self.u_max)));
        }
        Ok(())
    }

    pub fn rho(&self, u: f64) -> Result<f64> {
        self.guard(u)?;
        Ok(if u < 0.0 {
            0.0
        } else if u <= 1.0 {
            1.0
        } else if u <= 2.0 {
            1.0 - u.ln()
        } else {
            self.solution.evaluate(u)?
        })
    }

    /// log ρ(u); −∞ for u < 0.
    pub fn ln_rho(&self, u: f64) -> Result<f64> {
        self.guard(u)?;
        Ok(if u < 0.0 {
            f64::NEG_INFINITY
        } else if u <= 1.0 {
            0.0
        } else if u <= 2.0 {
            (1.0 - u.ln()).ln()
        } else {
            self.solution.evaluate_ln(u)?.0
        })
    }
}

/// ρ(u) from the shared evaluator.
pub fn rho(u: f64) -> Result<f64> {
    RhoEvaluator::global().rho(u)
}

pub fn ln_rho(u: f64) -> Result<f64> {
    RhoEvaluator::global().ln_rho(u)
}

/// ρ(τ²) = 1 − 2 log τ + (log τ)² − π²/60 with τ the golden ratio.
pub fn rho_tau_squared() -> f64 {
    let l = GOLDEN_RATIO.ln();
    1.0 - 2.0 * l + l * l - PI * PI / 60.0
}

/// Buchstab's function, together with an accurate tail `ω(u) − e^{−γ}`.
#[derive(Debug, Clone)]
pub struct OmegaEvaluator {
    solution: PiecewiseSolution,
    deviation: PiecewiseSolution,
    reference: f64,
    u_max: f64,
}

impl OmegaEvaluator {
    pub fn new(u_max: f64) -> Result<Self> {
        let top = check_u_max(u_max)?;
        let taylor: Vec<f64> = (0..=SEED_DEGREE as i32)
            .map(|k| (-1f64).powi(k) / 1.5f64.powi(k + 1))
            .collect();
        let seed = LocalPoly::from_taylor(1.0, 2.0, &taylor);
        let solution = solve_from_two(1.0, -1.0, seed.clone(), top)?;
        // Constants solve the equation, so ω − c does too. Rounding feeds the
        // constant mode; reading the difference against a far point removes it.
        let mut shifted = seed;
        shifted.coeffs[0] -= EXP_NEG_GAMMA;
        let far = top + 40.0;
        let deviation = solve_from_two(1.0, -1.0, shifted, far)?;
        let reference = deviation.evaluate(far)?;
        Ok(Self {
            solution,
            deviation,
            reference,
            u_max,
        })
    }

    pub fn global() -> &'static OmegaEvaluator {
        static OMEGA: OnceLock<OmegaEvaluator> = OnceLock::new();
        OMEGA.get_or_init(|| OmegaEvaluator::new(100.0).expect("omega solve"))
    }

    pub fn u_max(&self) -> f64 {
        self.u_max
    }

    pub fn solution(&self) -> &PiecewiseSolution {
        &self.solution
    }

    fn guard(&self, u: f64) -> Result<()> {
        if !(u >= 1.0) {
            return Err(Error::Domain(format!("omega is defined for u >= 1, got {u}")));
        }
        if u > self.u_max {
            return Err(Error::Range(format!("omega({u}) beyond u_max = {}", self.u_max)));
        }
        Ok(())
    }

    pub fn omega(&self, u: f64) -> Result<f64> {
        self.guard(u)?;
        if u <= 2.0 {
            return Ok(1.0 / u);
        }
        self.solution.evaluate(u)
    }

    /// ω(u) − e^{−γ}, resolved far below the rounding level of ω itself.
    pub fn deviation(&self, u: f64) -> Result<f64> {
        self.guard(u)?;
        if u <= 2.0 {
            return Ok(1.0 / u - EXP_NEG_GAMMA);
        }
        Ok(self.deviation.evaluate(u)? - self.reference)
    }

    /// ω̂(s) = ∫₁^∞ ω(u) e^{−us} du, with ω taken as 0 below 1.
    pub fn laplace(&self, s: f64) -> Result<f64> {
        if !(s > 0.0) {
            return Err(Error::Domain(format!("omega transform needs s > 0, got {s}")));
        }
        let rule = gauss_legendre(32);
        let top = self.u_max.min(60.0).floor();
        let mut acc = CompensatedSum::new();
        let mut n = 1.0;
        while n < top {
            acc.add(rule.integrate(n, n + 1.0, |u| {
                let w = if u <= 2.0 { 1.0 / u } else { self.solution.evaluate(u).unwrap_or(f64::NAN) };
                w * (-u * s).exp()
            }));
            n += 1.0;
        }
        acc.add(EXP_NEG_GAMMA * (-top * s).exp() / s);
        let v = acc.value();
        if !v.is_finite() {
            return Err(Error::Range(format!("omega transform at s = {s} is not finite")));
        }
        Ok(v)
    }
}

pub fn omega(u: f64) -> Result<f64> {
    OmegaEvaluator::global().omega(u)
}

/// τ_δ: τ ≡ 1 on [0, 1] and u τ′(u) = −δ τ(u − 1).
#[derive(Debug, Clone)]
pub struct TauEvaluator {
    delta: f64,
    solution: PiecewiseSolution,
    u_max: f64,
}

impl TauEvaluator {
    pub fn new(delta: f64, u_max: f64) -> Result<Self> {
        if !(delta > 0.0 && delta <= 1.0) {
            return Err(Error::Domain(format!("delta = {delta} must lie in (0, 1]")));
        }
        let top = check_u_max(u_max)?;
        let seed = LocalPoly::from_taylor(1.0, 2.0, &log_taylor(1.0, -delta, SEED_DEGREE));
        Ok(Self {
            delta,
            solution: solve_from_two(0.0, delta, seed, top)?,
            u_max,
        })
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn tau(&self, u: f64) -> Result<f64> {
        if !(u >= 0.0) {
            return Err(Error::Domain(format!("tau is defined for u >= 0, got {u}")));
        }
        if u > self.u_max {
            return Err(Error::Range(format!("tau({u}) beyond u_max = {}", self.u_max)));
        }
        Ok(if u <= 1.0 {
            1.0
        } else if u <= 2.0 {
            1.0 - self.delta * u.ln()
        } else {
            self.solution.evaluate(u)?
        })
    }
}

pub fn tau_delta(u: f64, delta: f64) -> Result<f64> {
    TauEvaluator::new(delta, u.max(3.0))?.tau(u)
}

/// σ_κ(u) = u^{κ−1} ρ_κ(u), solving the family with a = 1 − κ, b = κ.
///
/// For non-integer κ, σ_κ has a (u−1)^κ branch point at u = 1 that the
/// polynomial pieces only approximate; expect about 1e-3 relative error just
/// above u = 2 for κ = 1/2, improving with u and with κ.
#[derive(Debug, Clone)]
pub struct SigmaEvaluator {
    kappa: f64,
    solution: PiecewiseSolution,
    u_max: f64,
}

impl SigmaEvaluator {
    pub fn new(kappa: f64, u_max: f64) -> Result<Self> {
        if !(kappa > 0.0 && kappa.is_finite()) {
            return Err(Error::Domain(format!("kappa = {kappa} must be positive")));
        }
        let top = check_u_max(u_max)?;
        let seed = LocalPoly::fit(1.0, 2.0, SIGMA_FIT_DEGREE, |u| sigma_on_one_two(kappa, u));
        Ok(Self {
            kappa,
            solution: solve_from_two(1.0 - kappa, kappa, seed, top)?,
            u_max,
        })
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    pub fn solution(&self) -> &PiecewiseSolution {
        &self.solution
    }

    pub fn sigma(&self, u: f64) -> Result<f64> {
        if !(u > 0.0) {
            return Err(Error::Domain(format!("sigma is defined for u > 0, got {u}")));
        }
        if u > self.u_max {
            return Err(Error::Range(format!("sigma({u}) beyond u_max = {}", self.u_max)));
        }
        Ok(if u <= 1.0 {
            u.powf(self.kappa - 1.0)
        } else if u <= 2.0 {
            sigma_on_one_two(self.kappa, u)
        } else {
            self.solution.evaluate(u)?
        })
    }
}

/// On [1, 2]: ρ_κ(u) = 1 − κ Σ_j W^{κ+j}/(κ+j) with W = 1 − 1/u.
fn sigma_on_one_two(kappa: f64, u: f64) -> f64 {
    let w = 1.0 - 1.0 / u;
    let mut sum = 0.0;
    if w > 0.0 {
        let mut p = w.powf(kappa);
        for j in 0..200 {
            let t = p / (kappa + j as f64);
            sum += t;
            if t < 1e-18 * sum {
                break;
            }
            p *= w;
        }
    }
    u.powf(kappa - 1.0) * (1.0 - kappa * sum)
}

pub fn sigma_kappa(u: f64, kappa: f64) -> Result<f64> {
    SigmaEvaluator::new(kappa, u.max(3.0))?.sigma(u)
}

/// Ein(s) = ∫₀^s (1 − e^{−t})/t dt.
pub fn ein(s: f64) -> Result<f64> {
    if !s.is_finite() || s.abs() > EIN_MAX_ARG {
        return Err(Error::Range(format!("Ein argument {s} exceeds {EIN_MAX_ARG}")));
    }
    if s > EIN_SWITCH {
        return Ok(EULER_GAMMA + s.ln() + e1_continued_fraction(s));
    }
    // Ein(s) = −Σ_{k≥1} (−s)^k / (k·k!)
    let mut term = 1.0;
    let mut acc = CompensatedSum::new();
    let mut k = 1usize;
    loop {
        term *= -s / k as f64;
        let t = term / k as f64;
        acc.add(-t);
        if k as f64 > s.abs() && t.abs() <= 1e-18 * acc.value().abs() {
            break;
        }
        if t == 0.0 || !t.is_finite() {
            break;
        }
        k += 1;
    }
    let v = acc.value();
    if !v.is_finite() {
        return Err(Error::Range(format!("Ein({s}) overflows")));
    }
    Ok(v)
}

/// E₁(x) = ∫ₓ^∞ e^{−t}/t dt for x > 0.
pub fn e1(x: f64) -> Result<f64> {
    if !(x > 0.0) {
        return Err(Error::Domain(format!("E1 needs x > 0, got {x}")));
    }
    if x < 1.0 {
        return Ok(-EULER_GAMMA - x.ln() + ein(x)?);
    }
    Ok(e1_continued_fraction(x))
}

// Modified Lentz evaluation of the continued fraction for e^x E₁(x).
fn e1_continued_fraction(x: f64) -> f64 {
    const TINY: f64 = 1e-300;
    let mut b = x + 1.0;
    let mut c = 1.0 / TINY;
    let mut d = 1.0 / b;
    let mut h = d;
    for i in 1..1000 {
        let an = -((i * i) as f64);
        b += 2.0;
        d = 1.0 / (an * d + b);
        c = b + an / c;
        let del = c * d;
        h *= del;
        if (del - 1.0).abs() < 1e-16 {
            break;
        }
    }
    h * (-x).exp()
}

/// ρ̂(s) = exp(γ − Ein(s)).
pub fn rho_laplace_closed(s: f64) -> Result<f64> {
    let v = (EULER_GAMMA - ein(s)?).exp();
    if !v.is_finite() {
        return Err(Error::Range(format!("Laplace transform at s = {s} overflows")));
    }
    Ok(v)
}

/// ∫₀^∞ ρ(u) e^{−us} du by unit-interval quadrature; the tail is cut once
/// ρ(u) ≤ 1/⌊u⌋! certifies it below 1e-13 of the running value.
pub fn rho_laplace_numeric(s: f64) -> Result<f64> {
    rho_laplace_numeric_with(RhoEvaluator::global(), s)
}

pub fn rho_laplace_numeric_with(eval: &RhoEvaluator, s: f64) -> Result<f64> {
    if !s.is_finite() {
        return Err(Error::Input(format!("s = {s} is not finite")));
    }
    let rule = gauss_legendre(32);
    let mut acc = CompensatedSum::new();
    let mut n = 0usize;
    loop {
        let lo = n as f64;
        if lo + 1.0 > eval.u_max() {
            return Err(Error::Range(format!(
                "tail of the transform at s = {s} not certified below u = {}",
                eval.u_max()
            )));
        }
        acc.add(rule.integrate(lo, lo + 1.0, |u| {
            eval.rho(u).unwrap_or(f64::NAN) * (-u * s).exp()
        }));
        n += 1;
        let tail = factorial_tail(n, s);
        if tail <= 1e-13 * acc.value().abs().max(1e-300) {
            break;
        }
    }
    let v = acc.value();
    if !v.is_finite() {
        return Err(Error::Range(format!("transform at s = {s} is not finite")));
    }
    Ok(v)
}

// Σ_{m≥n} max_{[m,m+1]} e^{−us} / m!
fn factorial_tail(n: usize, s: f64) -> f64 {
    let mut ln_fact: f64 = (1..=n).map(|k| (k as f64).ln()).sum();
    let mut total = 0.0;
    let mut m = n;
    loop {
        let edge = if s >= 0.0 { m as f64 } else { m as f64 + 1.0 };
        let t = (-edge * s - ln_fact).exp();
        total += t;
        if t < 1e-30 * total || t == 0.0 {
            return total;
        }
        m += 1;
        ln_fact += (m as f64).ln();
    }
}

/// δ + Σ_{n≥1} (n+δ) ρ(n+δ).
pub fn euler_gamma_sum_identity(delta: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&delta) {
        return Err(Error::Domain(format!("delta = {delta} must lie in [0, 1]")));
    }
    let eval = RhoEvaluator::global();
    let mut acc = CompensatedSum::new();
    acc.add(delta);
    let mut n = 1.0;
    loop {
        let u = n + delta;
        let t = u * eval.rho(u)?;
        acc.add(t);
        if t < 1e-16 {
            break;
        }
        n += 1.0;
    }
    Ok(acc.value())
}

/// Largest k accepted by [`ramanujan_ik`].
pub const RAMANUJAN_MAX_K: usize = 5;
/// Largest u accepted by [`ramanujan_ik`].
pub const RAMANUJAN_MAX_U: f64 = 6.0;

/// I_k(u): the integral of ∏ dt_i/t_i over t_i ≥ 1, Σ t_i ≤ u.
pub fn ramanujan_ik(u: f64, k: usize) -> Result<f64> {
    if k > RAMANUJAN_MAX_K || u > RAMANUJAN_MAX_U {
        return Err(Error::Range(format!(
            "I_{k}({u}) exceeds the guard k <= {RAMANUJAN_MAX_K}, u <= {RAMANUJAN_MAX_U}"
        )));
    }
    if u.is_nan() {
        return Err(Error::Input("u is NaN".into()));
    }
    Ok(ik_rec(u, k))
}

fn ik_rec(u: f64, k: usize) -> f64 {
    match k {
        0 => 1.0,
        _ if u <= k as f64 => 0.0,
        1 => u.ln(),
        _ => gauss_legendre(24).integrate(1.0, u - k as f64 + 1.0, |t| ik_rec(u - t, k - 1) / t),
    }
}

/// Σ_k (−1)^k I_k(u)/k!, which terminates at k = ⌊u⌋.
pub fn ramanujan_rho_series(u: f64) -> Result<f64> {
    if u > 5.0 {
        return Err(Error::Range(format!("series evaluation limited to u <= 5, got {u}")));
    }
    if u < 0.0 {
        return Ok(0.0);
    }
    let mut acc = CompensatedSum::new();
    let mut fact = 1.0;
    for k in 0..=(u.floor() as usize) {
        if k > 0 {
            fact *= k as f64;
        }
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        acc.add(sign * ramanujan_ik(u, k)? / fact);
    }
    Ok(acc.value())
}

/// Ceiling on N·j for Canfield's step functions.
pub const CANFIELD_MAX_WORK: u64 = 10_000_000;

fn canfield_guard(n: u64, j: u64) -> Result<()> {
    if n < 2 {
        return Err(Error::Domain(format!("N = {n} must be at least 2")));
    }
    if n.saturating_mul(j) > CANFIELD_MAX_WORK {
        return Err(Error::Range(format!("N·j = {n}·{j} exceeds {CANFIELD_MAX_WORK}")));
    }
    Ok(())
}

// j·v_j = Σ_{i=1}^{w} v_{j−i} for j ≥ start, ones before.
fn window_recurrence(start: usize, w: usize, j: usize) -> f64 {
    if j < start {
        return 1.0;
    }
    let mut v = vec![1.0; start];
    let mut window: f64 = v[start - w..start].iter().sum();
    for m in start..=j {
        let next = window / m as f64;
        v.push(next);
        window += next - v[m - w];
    }
    v[j]
}

/// Canfield's upper step function A(N, j).
pub fn canfield_a(n: u64, j: u64) -> Result<f64> {
    canfield_guard(n, j)?;
    Ok(window_recurrence(n as usize, n as usize, j as usize))
}

/// Canfield's lower step function B(N, j), j ≥ 1.
pub fn canfield_b(n: u64, j: u64) -> Result<f64> {
    canfield_guard(n, j)?;
    if j == 0 {
        return Err(Error::Domain("B(N, j) is defined for j >= 1".into()));
    }
    Ok(window_recurrence(n as usize, n as usize - 1, j as usize))
}
