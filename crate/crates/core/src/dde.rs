//! Method-of-steps solver for `u f'(u) + a f(u) + b f(u-1) = 0` and for the
//! adjoint equation `u g'(u) + (1-a) g(u) - b g(u+1) = 0`.
//!
//! Each unit interval is split into `sub` equal pieces (a power of two chosen
//! so that no piece is wider than its distance to the singular point `u = 0`).
//! On a piece the delayed term is a known polynomial in the same local
//! variable, so the piece is the exact power-series solution of a first-order
//! linear ODE with polynomial forcing, truncated at degree `m`. The series is
//! expanded about the piece midpoint and anchored to the neighbouring piece.
//!
//! Every piece carries its own logarithmic scale, so solutions such as ρ can
//! be propagated far past the double-precision underflow threshold.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::CompensatedSum;
use crate::poly::{horner, LocalPoly};

pub const DEFAULT_DEGREE: usize = 30;
pub const DEFAULT_MAX_INTERVALS: usize = 500;
/// Ceiling on the total number of stored pieces.
pub const MAX_PIECES: usize = 1 << 18;
/// Smallest accepted start of propagation.
pub const MIN_U0: f64 = 1e-6;
pub const FORMAT_VERSION: u32 = 1;

/// A forward problem: the equation parameters and the initial segment on
/// `[u0 - 1, u0]`.
#[derive(Debug, Clone, PartialEq)]
pub struct DdeSpec {
    pub a: f64,
    pub b: f64,
    pub u0: f64,
    pub initial: LocalPoly,
    pub degree: usize,
    /// Value of `f(u0+)` when it differs from the initial segment's end value.
    pub anchor: Option<f64>,
    pub max_intervals: usize,
}

impl DdeSpec {
    pub fn new(a: f64, b: f64, u0: f64, initial: LocalPoly) -> Result<Self> {
        let spec = Self {
            a,
            b,
            u0,
            initial,
            degree: DEFAULT_DEGREE,
            anchor: None,
            max_intervals: DEFAULT_MAX_INTERVALS,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn with_degree(mut self, degree: usize) -> Result<Self> {
        self.degree = degree;
        self.validate()?;
        Ok(self)
    }

    pub fn with_anchor(mut self, value: f64) -> Result<Self> {
        if !value.is_finite() {
            return Err(Error::Input(format!("anchor value {value} is not finite")));
        }
        self.anchor = Some(value);
        Ok(self)
    }

    pub fn with_max_intervals(mut self, n: usize) -> Self {
        self.max_intervals = n;
        self
    }

    fn validate(&self) -> Result<()> {
        if !(self.a.is_finite() && self.b.is_finite()) {
            return Err(Error::Input("equation parameters must be finite".into()));
        }
        if !(self.u0 > 0.0) {
            return Err(Error::Singularity(format!(
                "propagation start u0 = {} must be positive",
                self.u0
            )));
        }
        if self.u0 < MIN_U0 {
            return Err(Error::Singularity(format!(
                "propagation start u0 = {} is too close to u = 0",
                self.u0
            )));
        }
        if self.degree < 4 {
            return Err(Error::Input(format!("degree {} is below 4", self.degree)));
        }
        if !self.initial.is_finite() {
            return Err(Error::Input("initial segment is not finite".into()));
        }
        let lo = self.initial.lo();
        let hi = self.initial.hi();
        if (lo - (self.u0 - 1.0)).abs() > 1e-12 || (hi - self.u0).abs() > 1e-12 {
            return Err(Error::Input(format!(
                "initial segment spans [{lo}, {hi}], expected [{}, {}]",
                self.u0 - 1.0,
                self.u0
            )));
        }
        let (l, r) = (self.initial.eval_s(-1.0), self.initial.eval_s(1.0));
        if !(l.is_finite() && r.is_finite()) {
            return Err(Error::Input("initial segment is not finite at its ends".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct Piece {
    coeffs: Vec<f64>,
    log_scale: f64,
}

impl Piece {
    fn from_values(mut coeffs: Vec<f64>, log_scale: f64) -> Self {
        let norm = coeffs.iter().fold(0.0f64, |m, c| m.max(c.abs()));
        if norm > 0.0 && norm.is_finite() {
            for c in &mut coeffs {
                *c /= norm;
            }
            Self {
                coeffs,
                log_scale: log_scale + norm.ln(),
            }
        } else {
            Self { coeffs, log_scale }
        }
    }
}

/// Equal-width pieces tiling `[start, start + len/sub]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct Chain {
    start: f64,
    sub: usize,
    pieces: Vec<Piece>,
}

impl Chain {
    fn width(&self) -> f64 {
        1.0 / self.sub as f64
    }

    fn end(&self) -> f64 {
        self.start + self.pieces.len() as f64 * self.width()
    }

    fn bounds(&self, i: usize) -> (f64, f64) {
        let w = self.width();
        let lo = self.start + i as f64 * w;
        (lo, lo + w)
    }

    fn local(&self, i: usize) -> (f64, f64) {
        let (lo, hi) = self.bounds(i);
        (0.5 * (lo + hi), 0.5 * (hi - lo))
    }

    fn locate(&self, u: f64) -> Option<usize> {
        let tol = 1e-12 * (1.0 + u.abs());
        if !(u >= self.start - tol && u <= self.end() + tol) {
            return None;
        }
        let idx = ((u - self.start) * self.sub as f64).floor();
        let idx = if idx < 0.0 { 0 } else { idx as usize };
        Some(idx.min(self.pieces.len() - 1))
    }

    fn s_of(&self, i: usize, u: f64) -> f64 {
        let (c, h) = self.local(i);
        (u - c) / h
    }

    /// Scaled value `(p(s), log_scale)` so that `f(u) = p * exp(log_scale)`.
    fn scaled(&self, u: f64) -> Option<(f64, f64)> {
        let i = self.locate(u)?;
        let p = &self.pieces[i];
        Some((horner(&p.coeffs, self.s_of(i, u)), p.log_scale))
    }

    fn value(&self, u: f64) -> Option<f64> {
        self.scaled(u).map(|(v, l)| v * l.exp())
    }

    fn ln_value(&self, u: f64) -> Option<(f64, f64)> {
        self.scaled(u).map(|(v, l)| {
            if v == 0.0 {
                (f64::NEG_INFINITY, 0.0)
            } else {
                (l + v.abs().ln(), v.signum())
            }
        })
    }

    fn piece_poly(&self, i: usize) -> LocalPoly {
        let (lo, hi) = self.bounds(i);
        LocalPoly::new(lo, hi, self.pieces[i].coeffs.clone())
    }
}

fn pieces_per_unit(u_ref: f64) -> usize {
    let mut sub = 1usize;
    while 1.0 / (sub as f64) > u_ref {
        sub *= 2;
    }
    sub
}

/// Power series of the solution of `(c + h s) f'(s)/h + a f = src(s)` about
/// `s = 0`, anchored so that `f(anchor_s) = anchor_value`.
fn solve_piece(
    center: f64,
    hw: f64,
    a: f64,
    src: &[f64],
    anchor_s: f64,
    anchor_value: f64,
    degree: usize,
) -> Vec<f64> {
    let ratio = hw / center;
    let mut hom = vec![0.0; degree + 1];
    let mut part = vec![0.0; degree + 1];
    hom[0] = 1.0;
    for k in 0..degree {
        let kf = k as f64;
        let sk = src.get(k).copied().unwrap_or(0.0);
        hom[k + 1] = -(kf + a) * hom[k] * ratio / (kf + 1.0);
        part[k + 1] = (sk - (kf + a) * part[k]) * ratio / (kf + 1.0);
    }
    let f0 = (anchor_value - horner(&part, anchor_s)) / horner(&hom, anchor_s);
    hom.iter().zip(&part).map(|(h, p)| f0 * h + p).collect()
}

/// Residual statistics sampled inside every propagated piece.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResidualReport {
    /// max |residual| / max(|u f'|, |a f|, |b f(u∓1)|)
    pub max_scaled: f64,
    /// max |residual| / max(|f|, 1e-300)
    pub max_relative_to_value: f64,
}

/// Method-of-steps solution of the forward equation.
#[derive(Debug, Clone, PartialEq)]
pub struct PiecewiseSolution {
    a: f64,
    b: f64,
    u0: f64,
    degree: usize,
    chain: Chain,
}

/// Solve the forward problem up to at least `u_max`.
pub fn solve_forward(spec: &DdeSpec, u_max: f64) -> Result<PiecewiseSolution> {
    spec.validate()?;
    if !(u_max > spec.u0) {
        return Err(Error::Range(format!(
            "u_max = {u_max} must exceed u0 = {}",
            spec.u0
        )));
    }
    let intervals = (u_max - spec.u0 - 1e-12).ceil().max(1.0);
    if intervals > spec.max_intervals as f64 {
        return Err(Error::Range(format!(
            "{intervals} unit intervals requested, maximum is {}",
            spec.max_intervals
        )));
    }
    let intervals = intervals as usize;
    let sub = pieces_per_unit(spec.u0);
    let total = (intervals + 1) * sub;
    if total > MAX_PIECES {
        return Err(Error::Cost(format!(
            "{total} pieces needed (u0 = {} forces {sub} pieces per unit)",
            spec.u0
        )));
    }
    let m = spec.degree;
    let start = spec.u0 - 1.0;
    let mut chain = Chain {
        start,
        sub,
        pieces: Vec::with_capacity(total),
    };
    for j in 0..sub {
        let (lo, hi) = chain.bounds(j);
        let seg = spec.initial.recenter(lo, hi).with_degree(m);
        chain.pieces.push(Piece::from_values(seg.coeffs, 0.0));
    }
    // With a + b = 1 the quantity u f(u) - b ∫_{u-1}^{u} f is conserved; anchoring
    // each piece through it avoids the cancellation that otherwise lets rounding
    // excite the slowly decaying companion solution.
    let conserved = if (spec.a + spec.b - 1.0).abs() < 1e-14 {
        let f0 = spec.anchor.unwrap_or_else(|| spec.initial.eval(spec.u0));
        let window = spec.b * spec.initial.integral();
        let c = spec.u0 * f0 - window;
        let size = (spec.u0 * f0).abs().max(window.abs());
        Some(if c.abs() <= 1e-13 * size { 0.0 } else { c })
    } else {
        None
    };
    for i in sub..total {
        let (c, h) = chain.local(i);
        let prev = &chain.pieces[i - 1];
        let delayed = &chain.pieces[i - sub];
        let scale = prev.log_scale;
        let shift = (delayed.log_scale - scale).exp();
        let src: Vec<f64> = delayed.coeffs.iter().map(|d| -spec.b * d * shift).collect();
        let left = match (i == sub, spec.anchor, conserved) {
            (true, Some(v), _) => v * (-scale).exp(),
            (_, _, Some(k)) => {
                let hw = 0.5 * chain.width();
                let window: f64 = chain.pieces[i - sub..i]
                    .iter()
                    .map(|p| hw * LocalPoly::integral_s(&p.coeffs) * (p.log_scale - scale).exp())
                    .sum();
                let k_scaled = if k == 0.0 { 0.0 } else { k * (-scale).exp() };
                (k_scaled + spec.b * window) / (c - h)
            }
            _ => horner(&prev.coeffs, 1.0),
        };
        let coeffs = solve_piece(c, h, spec.a, &src, -1.0, left, m);
        chain.pieces.push(Piece::from_values(coeffs, scale));
    }
    Ok(PiecewiseSolution {
        a: spec.a,
        b: spec.b,
        u0: spec.u0,
        degree: m,
        chain,
    })
}

impl PiecewiseSolution {
    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    pub fn u0(&self) -> f64 {
        self.u0
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn pieces_per_unit(&self) -> usize {
        self.chain.sub
    }

    /// Lowest covered argument, `u0 - 1`.
    pub fn u_min(&self) -> f64 {
        self.chain.start
    }

    /// Last knot.
    pub fn u_max(&self) -> f64 {
        self.chain.end()
    }

    /// Knots `u0, u0 + 1, …` of the propagated part.
    pub fn knots(&self) -> Vec<f64> {
        let k = self.chain.pieces.len() / self.chain.sub;
        (0..k).map(|j| self.u0 + j as f64).collect()
    }

    fn range_error(&self, u: f64) -> Error {
        Error::Range(format!(
            "u = {u} outside the solved range [{}, {}]",
            self.u_min(),
            self.u_max()
        ))
    }

    /// f(u); at knots the right-hand piece is used.
    pub fn evaluate(&self, u: f64) -> Result<f64> {
        self.chain.value(u).ok_or_else(|| self.range_error(u))
    }

    /// `(ln |f(u)|, sign f(u))`, finite far below the f64 underflow threshold.
    pub fn evaluate_ln(&self, u: f64) -> Result<(f64, f64)> {
        self.chain.ln_value(u).ok_or_else(|| self.range_error(u))
    }

    /// f(u) together with f'(u).
    pub fn evaluate_with_derivative(&self, u: f64) -> Result<(f64, f64)> {
        let i = self.chain.locate(u).ok_or_else(|| self.range_error(u))?;
        let poly = self.chain.piece_poly(i);
        let (v, d) = poly.eval_with_derivative(u);
        let k = self.chain.pieces[i].log_scale.exp();
        Ok((v * k, d * k))
    }

    /// The polynomial piece covering `u`, rescaled to true units.
    pub fn piece_at(&self, u: f64) -> Result<LocalPoly> {
        let i = self.chain.locate(u).ok_or_else(|| self.range_error(u))?;
        Ok(self
            .chain
            .piece_poly(i)
            .scaled(self.chain.pieces[i].log_scale.exp()))
    }

    /// Residual of the equation sampled at `samples` interior points of each
    /// propagated piece with right end at most `u_limit`.
    pub fn residual(&self, samples: usize, u_limit: f64) -> ResidualReport {
        residual_of(&self.chain, self.a, self.b, samples, u_limit, Direction::Forward)
    }

    /// Largest relative jump between adjacent propagated pieces.
    pub fn max_knot_jump(&self) -> f64 {
        let sub = self.chain.sub;
        let start = if self.chain.pieces.len() > sub { sub + 1 } else { sub };
        max_jump(&self.chain, start..self.chain.pieces.len())
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string(&SolutionFile::from_chain(
            "forward", self.a, self.b, self.u0, self.degree, &self.chain,
        ))
        .map_err(|e| Error::Format(e.to_string()))
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: SolutionFile =
            serde_json::from_str(text).map_err(|e| Error::Format(e.to_string()))?;
        let chain = file.into_chain("forward")?;
        Ok(Self {
            a: file.a,
            b: file.b,
            u0: file.u0,
            degree: file.m,
            chain,
        })
    }
}

#[derive(Clone, Copy, PartialEq)]
enum Direction {
    Forward,
    Adjoint,
}

fn residual_of(
    chain: &Chain,
    a: f64,
    b: f64,
    samples: usize,
    u_limit: f64,
    dir: Direction,
) -> ResidualReport {
    let sub = chain.sub;
    let n = chain.pieces.len();
    let range: Vec<usize> = match dir {
        Direction::Forward => (sub..n).collect(),
        Direction::Adjoint => (0..n.saturating_sub(sub)).collect(),
    };
    let mut worst = ResidualReport {
        max_scaled: 0.0,
        max_relative_to_value: 0.0,
    };
    for i in range {
        let (lo, hi) = chain.bounds(i);
        if hi > u_limit + 1e-12 {
            continue;
        }
        let (c, h) = chain.local(i);
        let piece = &chain.pieces[i];
        let (other, coef_a, coef_b) = match dir {
            Direction::Forward => (&chain.pieces[i - sub], a, b),
            Direction::Adjoint => (&chain.pieces[i + sub], 1.0 - a, -b),
        };
        let shift = (other.log_scale - piece.log_scale).exp();
        for j in 1..=samples {
            let s = -1.0 + 2.0 * j as f64 / (samples + 1) as f64;
            let u = c + h * s;
            debug_assert!(u > lo && u < hi);
            let poly = LocalPoly {
                center: c,
                half_width: h,
                coeffs: piece.coeffs.clone(),
            };
            let (f, df) = poly.eval_s_with_derivative(s);
            let df = df / h;
            let g = horner(&other.coeffs, s) * shift;
            let terms = [u * df, coef_a * f, coef_b * g];
            let res = terms[0] + terms[1] + terms[2];
            let scale = terms.iter().fold(0.0f64, |m, t| m.max(t.abs()));
            let floor = 1e-300 * (-piece.log_scale).exp();
            if scale > 0.0 {
                worst.max_scaled = worst.max_scaled.max(res.abs() / scale);
            }
            worst.max_relative_to_value = worst
                .max_relative_to_value
                .max(res.abs() / f.abs().max(floor));
        }
    }
    worst
}

fn max_jump(chain: &Chain, range: std::ops::Range<usize>) -> f64 {
    let mut worst = 0.0f64;
    for i in range {
        let prev = &chain.pieces[i - 1];
        let cur = &chain.pieces[i];
        let left = horner(&prev.coeffs, 1.0) * (prev.log_scale - cur.log_scale).exp();
        let right = horner(&cur.coeffs, -1.0);
        let floor = 1e-300 * (-cur.log_scale).exp();
        let denom = left.abs().max(right.abs()).max(floor);
        worst = worst.max((left - right).abs() / denom);
    }
    worst
}

/// Solution of the adjoint equation, propagated towards smaller `u`.
#[derive(Debug, Clone, PartialEq)]
pub struct AdjointSolution {
    a: f64,
    b: f64,
    top: f64,
    degree: usize,
    chain: Chain,
}

/// Propagate a terminal segment on `[U, U+1]` down to `u_min`.
pub fn solve_adjoint_backward(
    a: f64,
    b: f64,
    terminal: &LocalPoly,
    u_min: f64,
) -> Result<AdjointSolution> {
    solve_adjoint_backward_with(a, b, terminal, u_min, DEFAULT_DEGREE)
}

pub fn solve_adjoint_backward_with(
    a: f64,
    b: f64,
    terminal: &LocalPoly,
    u_min: f64,
    degree: usize,
) -> Result<AdjointSolution> {
    if !(u_min > 0.0) || u_min < MIN_U0 {
        return Err(Error::Singularity(format!(
            "adjoint propagation down to u_min = {u_min} reaches the singular point"
        )));
    }
    if degree < 4 {
        return Err(Error::Input(format!("degree {degree} is below 4")));
    }
    if !(a.is_finite() && b.is_finite() && terminal.is_finite()) {
        return Err(Error::Input("non-finite adjoint data".into()));
    }
    let top = terminal.lo();
    if (terminal.hi() - top - 1.0).abs() > 1e-12 {
        return Err(Error::Input("terminal segment must have unit length".into()));
    }
    if top < u_min + 1.0 {
        return Err(Error::Range(format!(
            "terminal start U = {top} must be at least u_min + 1 = {}",
            u_min + 1.0
        )));
    }
    let intervals = (top - u_min - 1e-12).ceil() as usize;
    if intervals > DEFAULT_MAX_INTERVALS {
        return Err(Error::Range(format!(
            "{intervals} unit intervals requested, maximum is {DEFAULT_MAX_INTERVALS}"
        )));
    }
    let sub = pieces_per_unit(top - intervals as f64);
    let total = (intervals + 1) * sub;
    if total > MAX_PIECES {
        return Err(Error::Cost(format!("{total} pieces needed")));
    }
    let start = top - intervals as f64;
    let mut chain = Chain {
        start,
        sub,
        pieces: vec![
            Piece {
                coeffs: Vec::new(),
                log_scale: 0.0,
            };
            total
        ],
    };
    for j in 0..sub {
        let i = total - sub + j;
        let (lo, hi) = chain.bounds(i);
        let seg = terminal.recenter(lo, hi).with_degree(degree);
        chain.pieces[i] = Piece::from_values(seg.coeffs, 0.0);
    }
    for i in (0..total - sub).rev() {
        let (c, h) = chain.local(i);
        let next = &chain.pieces[i + 1];
        let advanced = &chain.pieces[i + sub];
        let scale = next.log_scale;
        let shift = (advanced.log_scale - scale).exp();
        let src: Vec<f64> = advanced.coeffs.iter().map(|d| b * d * shift).collect();
        let right = horner(&next.coeffs, -1.0);
        let coeffs = solve_piece(c, h, 1.0 - a, &src, 1.0, right, degree);
        chain.pieces[i] = Piece::from_values(coeffs, scale);
    }
    Ok(AdjointSolution {
        a,
        b,
        top,
        degree,
        chain,
    })
}

impl AdjointSolution {
    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    /// Start of the terminal segment.
    pub fn terminal_start(&self) -> f64 {
        self.top
    }

    pub fn u_min(&self) -> f64 {
        self.chain.start
    }

    pub fn u_max(&self) -> f64 {
        self.chain.end()
    }

    fn range_error(&self, u: f64) -> Error {
        Error::Range(format!(
            "u = {u} outside the adjoint range [{}, {}]",
            self.u_min(),
            self.u_max()
        ))
    }

    pub fn evaluate(&self, u: f64) -> Result<f64> {
        self.chain.value(u).ok_or_else(|| self.range_error(u))
    }

    pub fn evaluate_ln(&self, u: f64) -> Result<(f64, f64)> {
        self.chain.ln_value(u).ok_or_else(|| self.range_error(u))
    }

    pub fn residual(&self, samples: usize) -> ResidualReport {
        residual_of(
            &self.chain,
            self.a,
            self.b,
            samples,
            f64::INFINITY,
            Direction::Adjoint,
        )
    }

    pub fn max_knot_jump(&self) -> f64 {
        max_jump(&self.chain, 1..self.chain.pieces.len())
    }
}

/// `u0 f(u0) g(u0) − b ∫_{u0−1}^{u0} f(u) g(u+1) du`, evaluated by exact
/// integration of products of polynomial pieces.
pub fn scalar_product(f: &PiecewiseSolution, g: &AdjointSolution, u0: f64) -> Result<f64> {
    if f.a != g.a || f.b != g.b {
        return Err(Error::Spec(format!(
            "forward (a, b) = ({}, {}) but adjoint (a, b) = ({}, {})",
            f.a, f.b, g.a, g.b
        )));
    }
    let tol = 1e-12;
    if u0 - 1.0 < f.u_min() - tol || u0 > f.u_max() + tol {
        return Err(Error::Range(format!(
            "forward solution does not cover [{}, {u0}]",
            u0 - 1.0
        )));
    }
    if u0 < g.u_min() - tol || u0 + 1.0 > g.u_max() + tol {
        return Err(Error::Range(format!(
            "adjoint solution does not cover [{u0}, {}]",
            u0 + 1.0
        )));
    }
    let lo = u0 - 1.0;
    let hi = u0;
    let mut cuts = vec![lo, hi];
    for (chain, shift) in [(&f.chain, 0.0), (&g.chain, -1.0)] {
        let w = chain.width();
        let first = ((lo - shift - chain.start) / w).ceil() as i64;
        let mut k = first.max(0);
        loop {
            let t = chain.start + k as f64 * w + shift;
            if t >= hi {
                break;
            }
            if t > lo {
                cuts.push(t);
            }
            k += 1;
        }
    }
    cuts.sort_by(f64::total_cmp);
    cuts.dedup_by(|x, y| (*x - *y).abs() < 1e-13);
    let mut integral = CompensatedSum::new();
    for w in cuts.windows(2) {
        let (l, r) = (w[0], w[1]);
        if r - l < 1e-15 {
            continue;
        }
        let mid = 0.5 * (l + r);
        let fi = f.chain.locate(mid).expect("covered");
        let gi = g.chain.locate(mid + 1.0).expect("covered");
        let fp = f.chain.piece_poly(fi).recenter(l, r);
        let gp = g.chain.piece_poly(gi).recenter(l + 1.0, r + 1.0);
        let prod = LocalPoly::mul_coeffs(&fp.coeffs, &gp.coeffs);
        let scale = (f.chain.pieces[fi].log_scale + g.chain.pieces[gi].log_scale).exp();
        integral.add(0.5 * (r - l) * LocalPoly::integral_s(&prod) * scale);
    }
    let point = u0 * f.evaluate(u0)? * g.evaluate(u0)?;
    Ok(point - f.b * integral.value())
}

/// Solve `u F(u) = ∫_{u−1}^{u} F` from `F = initial` on `[0, 1]` and report
/// `F(u)/ρ(u)` at the integers `1..=u_max`.
///
/// Differentiating gives the forward equation with `a = 0, b = 1`; the
/// integral relation at `u = 1` fixes `F(1+) = ∫₀¹ F`.
pub fn ratio_convergence_check(initial: &LocalPoly, u_max: usize) -> Result<Vec<(f64, f64)>> {
    if (initial.lo()).abs() > 1e-12 || (initial.hi() - 1.0).abs() > 1e-12 {
        return Err(Error::Input("initial segment must span [0, 1]".into()));
    }
    if u_max < 1 {
        return Err(Error::Range("u_max must be at least 1".into()));
    }
    let top = (u_max as f64).max(2.0);
    let rho = solve_forward(
        &DdeSpec::new(0.0, 1.0, 1.0, LocalPoly::constant(0.0, 1.0, 1.0))?,
        top,
    )?;
    if initial.coeffs.iter().all(|&c| c == 0.0) {
        return Ok((1..=u_max).map(|u| (u as f64, 0.0)).collect());
    }
    let spec = DdeSpec::new(0.0, 1.0, 1.0, initial.clone())?.with_anchor(initial.integral())?;
    let sol = solve_forward(&spec, top)?;
    (1..=u_max)
        .map(|u| {
            let u = u as f64;
            let (lf, sf) = sol.evaluate_ln(u)?;
            let (lr, _) = rho.evaluate_ln(u)?;
            Ok((u, sf * (lf - lr).exp()))
        })
        .collect()
}

/// Portable serialized form of a solution.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolutionFile {
    pub format_version: u32,
    pub kind: String,
    pub a: f64,
    pub b: f64,
    pub u0: f64,
    pub m: usize,
    pub pieces_per_unit: usize,
    pub start: f64,
    pub knots: Vec<f64>,
    pub coefficients: Vec<Vec<f64>>,
    pub log_scales: Vec<f64>,
}

impl SolutionFile {
    fn from_chain(kind: &str, a: f64, b: f64, u0: f64, m: usize, chain: &Chain) -> Self {
        let units = chain.pieces.len() / chain.sub;
        Self {
            format_version: FORMAT_VERSION,
            kind: kind.to_string(),
            a,
            b,
            u0,
            m,
            pieces_per_unit: chain.sub,
            start: chain.start,
            knots: (0..=units).map(|k| chain.start + k as f64).collect(),
            coefficients: chain.pieces.iter().map(|p| p.coeffs.clone()).collect(),
            log_scales: chain.pieces.iter().map(|p| p.log_scale).collect(),
        }
    }

    fn into_chain(&self, kind: &str) -> Result<Chain> {
        if self.format_version != FORMAT_VERSION {
            return Err(Error::Format(format!(
                "unsupported solution format version {}",
                self.format_version
            )));
        }
        if self.kind != kind {
            return Err(Error::Format(format!("expected a {kind} solution, found {}", self.kind)));
        }
        if self.coefficients.len() != self.log_scales.len()
            || self.pieces_per_unit == 0
            || self.coefficients.is_empty()
            || self.coefficients.len() % self.pieces_per_unit != 0
        {
            return Err(Error::Format("inconsistent piece layout".into()));
        }
        Ok(Chain {
            start: self.start,
            sub: self.pieces_per_unit,
            pieces: self
                .coefficients
                .iter()
                .zip(&self.log_scales)
                .map(|(c, &l)| Piece {
                    coeffs: c.clone(),
                    log_scale: l,
                })
                .collect(),
        })
    }
}
