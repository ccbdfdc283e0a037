//! Polynomials on a bounded interval, stored in the normalized variable
//! `s = (u - center) / half_width ∈ [-1, 1]`.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LocalPoly {
    pub center: f64,
    pub half_width: f64,
    /// Monomial coefficients in `s`, lowest degree first.
    pub coeffs: Vec<f64>,
}

impl LocalPoly {
    pub fn new(lo: f64, hi: f64, coeffs: Vec<f64>) -> Self {
        assert!(hi > lo, "empty interval [{lo}, {hi}]");
        Self {
            center: 0.5 * (lo + hi),
            half_width: 0.5 * (hi - lo),
            coeffs,
        }
    }

    pub fn constant(lo: f64, hi: f64, c: f64) -> Self {
        Self::new(lo, hi, vec![c])
    }

    /// Build from Taylor coefficients in powers of `(u - center)`.
    pub fn from_taylor(lo: f64, hi: f64, taylor: &[f64]) -> Self {
        let hw = 0.5 * (hi - lo);
        let mut scale = 1.0;
        let coeffs = taylor
            .iter()
            .map(|c| {
                let v = c * scale;
                scale *= hw;
                v
            })
            .collect();
        Self::new(lo, hi, coeffs)
    }

    /// Interpolate `f` at `degree + 1` Chebyshev points of the interval.
    pub fn fit<F: Fn(f64) -> f64>(lo: f64, hi: f64, degree: usize, f: F) -> Self {
        let n = degree + 1;
        let center = 0.5 * (lo + hi);
        let hw = 0.5 * (hi - lo);
        let nodes: Vec<f64> = (0..n)
            .map(|j| (std::f64::consts::PI * (j as f64 + 0.5) / n as f64).cos())
            .collect();
        let values: Vec<f64> = nodes.iter().map(|&x| f(center + hw * x)).collect();
        let mut cheb = vec![0.0; n];
        for (k, c) in cheb.iter_mut().enumerate() {
            let mut acc = 0.0;
            for j in 0..n {
                acc += values[j]
                    * (std::f64::consts::PI * k as f64 * (j as f64 + 0.5) / n as f64).cos();
            }
            *c = acc * 2.0 / n as f64;
        }
        cheb[0] *= 0.5;
        // T_k in the monomial basis via T_{k+1} = 2x T_k - T_{k-1}
        let mut coeffs = vec![0.0; n];
        let mut t_prev = vec![1.0];
        let mut t_cur = vec![0.0, 1.0];
        coeffs[0] += cheb[0];
        if n > 1 {
            coeffs[1] += cheb[1];
        }
        for c in cheb.iter().skip(2) {
            let mut next = vec![0.0; t_cur.len() + 1];
            for (i, v) in t_cur.iter().enumerate() {
                next[i + 1] += 2.0 * v;
            }
            for (i, v) in t_prev.iter().enumerate() {
                next[i] -= v;
            }
            for (i, v) in next.iter().enumerate() {
                coeffs[i] += c * v;
            }
            t_prev = t_cur;
            t_cur = next;
        }
        Self {
            center,
            half_width: hw,
            coeffs,
        }
    }

    pub fn lo(&self) -> f64 {
        self.center - self.half_width
    }

    pub fn hi(&self) -> f64 {
        self.center + self.half_width
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    pub fn eval_s(&self, s: f64) -> f64 {
        horner(&self.coeffs, s)
    }

    /// Value and d/ds at `s`.
    pub fn eval_s_with_derivative(&self, s: f64) -> (f64, f64) {
        let mut p = 0.0;
        let mut dp = 0.0;
        for &c in self.coeffs.iter().rev() {
            dp = dp * s + p;
            p = p * s + c;
        }
        (p, dp)
    }

    pub fn to_s(&self, u: f64) -> f64 {
        (u - self.center) / self.half_width
    }

    pub fn eval(&self, u: f64) -> f64 {
        self.eval_s(self.to_s(u))
    }

    /// Value and d/du at `u`.
    pub fn eval_with_derivative(&self, u: f64) -> (f64, f64) {
        let (p, dp) = self.eval_s_with_derivative(self.to_s(u));
        (p, dp / self.half_width)
    }

    pub fn is_finite(&self) -> bool {
        self.center.is_finite()
            && self.half_width.is_finite()
            && self.coeffs.iter().all(|c| c.is_finite())
    }

    /// Same polynomial re-expressed on `[lo, hi]`.
    pub fn recenter(&self, lo: f64, hi: f64) -> Self {
        let center = 0.5 * (lo + hi);
        let hw = 0.5 * (hi - lo);
        let alpha = (center - self.center) / self.half_width;
        let beta = hw / self.half_width;
        // Horner in polynomial arithmetic: q(t) = p(alpha + beta t)
        let mut out: Vec<f64> = Vec::with_capacity(self.coeffs.len());
        for &c in self.coeffs.iter().rev() {
            let mut next = vec![0.0; out.len() + 1];
            for (i, v) in out.iter().enumerate() {
                next[i] += alpha * v;
                next[i + 1] += beta * v;
            }
            next[0] += c;
            out = next;
        }
        if out.is_empty() {
            out.push(0.0);
        }
        Self {
            center,
            half_width: hw,
            coeffs: out,
        }
    }

    /// Product of two polynomials expressed on the same normalized variable.
    pub fn mul_coeffs(a: &[f64], b: &[f64]) -> Vec<f64> {
        if a.is_empty() || b.is_empty() {
            return vec![0.0];
        }
        let mut out = vec![0.0; a.len() + b.len() - 1];
        for (i, x) in a.iter().enumerate() {
            for (j, y) in b.iter().enumerate() {
                out[i + j] += x * y;
            }
        }
        out
    }

    /// ∫ over [-1, 1] of the polynomial with the given coefficients in `s`.
    pub fn integral_s(coeffs: &[f64]) -> f64 {
        coeffs
            .iter()
            .enumerate()
            .filter(|(k, _)| k % 2 == 0)
            .map(|(k, c)| 2.0 * c / (k as f64 + 1.0))
            .sum()
    }

    /// ∫ of the polynomial over its own interval.
    pub fn integral(&self) -> f64 {
        self.half_width * Self::integral_s(&self.coeffs)
    }

    /// Pad with zeros or truncate to exactly `degree + 1` coefficients.
    pub fn with_degree(mut self, degree: usize) -> Self {
        self.coeffs.resize(degree + 1, 0.0);
        self
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            center: self.center,
            half_width: self.half_width,
            coeffs: self.coeffs.iter().map(|c| c * factor).collect(),
        }
    }

    /// `alpha * self + beta * other`; both must live on the same interval.
    pub fn combine(&self, alpha: f64, other: &Self, beta: f64) -> Self {
        assert!(
            (self.center - other.center).abs() < 1e-12 && (self.half_width - other.half_width).abs() < 1e-12,
            "combining polynomials on different intervals"
        );
        let n = self.coeffs.len().max(other.coeffs.len());
        let coeffs = (0..n)
            .map(|k| {
                alpha * self.coeffs.get(k).copied().unwrap_or(0.0)
                    + beta * other.coeffs.get(k).copied().unwrap_or(0.0)
            })
            .collect();
        Self {
            center: self.center,
            half_width: self.half_width,
            coeffs,
        }
    }
}

pub(crate) fn horner(coeffs: &[f64], s: f64) -> f64 {
    coeffs.iter().rev().fold(0.0, |acc, &c| acc * s + c)
}
