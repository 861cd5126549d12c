//! One-sided maximal operators on step functions.
//!
//! `M⁺f(x) = sup_{h>0} (1/h)∫_x^{x+h} f` and `M⁻f(x)` its mirror image. On a
//! step function the window average is monotone in `h` across each piece, so
//! the supremum is a maximum over the breakpoints beyond `x` together with the
//! one-sided limit of `f` at `x`.

mod envelope;

pub use envelope::{compile_envelope, Envelope, EnvelopePiece, Formula};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::stepfn::{Interval, StepFunction};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Plus,
    Minus,
}

impl Side {
    pub fn opposite(self) -> Side {
        match self {
            Side::Plus => Side::Minus,
            Side::Minus => Side::Plus,
        }
    }
}

/// `0 ≤ α < 1` and exponents with `1/q = 1/p − α`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FractionalParams {
    pub alpha: f64,
    pub p: f64,
    pub q: f64,
}

impl FractionalParams {
    pub fn new(alpha: f64, p: f64, q: f64) -> Result<Self> {
        let fp = Self::from_alpha_p(alpha, p)?;
        if ((1.0 / q) - (1.0 / fp.q)).abs() > 1e-12 {
            return Err(Error::Parameter(format!("1/q must equal 1/p − α: got 1/{q} vs 1/{p} − {alpha}")));
        }
        Ok(Self { alpha, p, q })
    }

    /// Derives `q` from `α` and `p`.
    pub fn from_alpha_p(alpha: f64, p: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&alpha) {
            return Err(Error::Parameter(format!("α must lie in [0, 1), got {alpha}")));
        }
        if !(p >= 1.0) || !p.is_finite() {
            return Err(Error::Parameter(format!("p must be a finite number ≥ 1, got {p}")));
        }
        let inv_q = 1.0 / p - alpha;
        if !(inv_q > 0.0) {
            return Err(Error::Parameter(format!("need α < 1/p, got α = {alpha}, p = {p}")));
        }
        Ok(Self { alpha, p, q: 1.0 / inv_q })
    }
}

/// `M⁺f(x)` or `M⁻f(x)` by direct maximisation over window endpoints.
pub fn mplus_at(f: &StepFunction, x: f64, side: Side) -> f64 {
    match side {
        Side::Plus => mplus_right(f, x),
        Side::Minus => mplus_right(&f.reflect(), -x),
    }
}

fn mplus_right(f: &StepFunction, x: f64) -> f64 {
    let t = f.breakpoints();
    let v = f.values();
    let start = t.partition_point(|&b| b <= x);
    let mut best = f.value_right(x);
    // mass summed forward from x, not a difference of cumulative masses,
    // so a small local average is not swamped by the mass to its left
    let mut mass = 0.0;
    let mut from = x;
    for j in start..t.len() {
        if j > 0 {
            mass += v[j - 1] * (t[j] - from);
        }
        from = t[j];
        let avg = mass / (t[j] - x);
        if avg > best {
            best = avg;
        }
    }
    best
}

/// `M_α⁺f(x) = sup_h h^{α−1}∫_x^{x+h} f` (or its mirror image).
pub fn malpha_at(f: &StepFunction, fp: &FractionalParams, x: f64, side: Side) -> f64 {
    match side {
        Side::Plus => malpha_right(f, fp.alpha, x),
        Side::Minus => malpha_right(&f.reflect(), fp.alpha, -x),
    }
}

fn malpha_right(f: &StepFunction, alpha: f64, x: f64) -> f64 {
    if alpha == 0.0 {
        return mplus_right(f, x);
    }
    let t = f.breakpoints();
    let vals = f.values();
    let g = |h: f64, mass: f64| mass * h.powf(alpha - 1.0);
    let mut best: f64 = 0.0;
    let start = t.partition_point(|&b| b <= x);
    // window end moves through the pieces beyond x; h_prev is where the
    // current piece begins (relative to x), c_prev the mass collected so far
    let mut h_prev = 0.0;
    let mut c_prev = 0.0;
    for j in start..t.len() {
        let h = t[j] - x;
        let v = if j == 0 { 0.0 } else { vals[j - 1] };
        let mass = c_prev + v * (h - h_prev);
        best = best.max(g(h, mass));
        if v > 0.0 {
            let h_star = (1.0 - alpha) * (c_prev - v * h_prev) / (v * alpha);
            if h_star > h_prev && h_star < h {
                best = best.max(g(h_star, c_prev + v * (h_star - h_prev)));
            }
        }
        h_prev = h;
        c_prev = mass;
    }
    best
}

/// `∫_a^b M⁻(wχ_{(a,b)})`, integrating the compiled envelope in closed form.
pub fn integrate_mminus_exact(w: &StepFunction, interval: &Interval) -> f64 {
    integrate_opposite_exact(w, interval, Side::Minus)
}

/// `∫_I M^{side}(wχ_I)` in closed form.
pub fn integrate_opposite_exact(w: &StepFunction, interval: &Interval, side: Side) -> f64 {
    let local = w.restrict(interval);
    compile_envelope(&local, side).integral_exact(interval.left, interval.right)
}

/// `∫ (M^{side} f)^p w` over the support of `w`.
pub fn integrate_power_weight(env: &Envelope, p: f64, w: &StepFunction, tol: f64) -> Result<f64> {
    env.integrate_power_weight(p, w, tol)
}
