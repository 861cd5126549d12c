//! Exact calculus for nonnegative, compactly supported step functions.
//!
//! A [`StepFunction`] is stored as breakpoints `t_0 < … < t_n` and the values
//! `v_1 … v_n` it takes on `(t_{i-1}, t_i)`; it vanishes outside `(t_0, t_n)`.
//! Every operation here is a finite sum or maximum over pieces, so results are
//! exact up to floating-point rounding.

mod interval;

pub use interval::{Interval, IntervalSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawStepFunction", into = "RawStepFunction")]
pub struct StepFunction {
    breakpoints: Vec<f64>,
    values: Vec<f64>,
    /// `cumulative[i] = ∫_{t_0}^{t_i} f`.
    cumulative: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct RawStepFunction {
    breakpoints: Vec<f64>,
    values: Vec<f64>,
}

impl TryFrom<RawStepFunction> for StepFunction {
    type Error = Error;

    fn try_from(raw: RawStepFunction) -> Result<Self> {
        StepFunction::new(raw.breakpoints, raw.values)
    }
}

impl From<StepFunction> for RawStepFunction {
    fn from(f: StepFunction) -> Self {
        RawStepFunction { breakpoints: f.breakpoints, values: f.values }
    }
}

/// The two Lorentz quantities of a step function.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LorentzNorms {
    /// `‖f‖_{L^{p,∞}} = sup_t t |{f > t}|^{1/p}`
    pub weak: f64,
    /// `‖f‖_{L^{p,1}} = ∫_0^∞ |{f > t}|^{1/p} dt`
    pub l_p1: f64,
}

/// Points `x_0 = a < x_1 < …` splitting `(a, b)` so the σ-mass to the right
/// of `x_i` is `2^{-i} σ(a, b)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HalvingChain {
    pub base: Interval,
    pub points: Vec<f64>,
    /// `σ(x_i, b)` for each point.
    pub masses: Vec<f64>,
}

impl StepFunction {
    pub fn new(breakpoints: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidStepFunction("at least one piece is required".into()));
        }
        if breakpoints.len() != values.len() + 1 {
            return Err(Error::InvalidStepFunction(format!(
                "{} breakpoints cannot carry {} values (need one more breakpoint than values)",
                breakpoints.len(),
                values.len()
            )));
        }
        if let Some(t) = breakpoints.iter().find(|t| !t.is_finite()) {
            return Err(Error::InvalidStepFunction(format!("breakpoint {t} is not finite")));
        }
        if let Some(w) = breakpoints.windows(2).find(|w| w[0] >= w[1]) {
            return Err(Error::InvalidStepFunction(format!(
                "breakpoints must be strictly increasing ({} ≥ {})",
                w[0], w[1]
            )));
        }
        if let Some(v) = values.iter().find(|v| !v.is_finite() || **v < 0.0) {
            return Err(Error::InvalidStepFunction(format!("value {v} is not a finite nonnegative number")));
        }
        let mut cumulative = Vec::with_capacity(breakpoints.len());
        cumulative.push(0.0);
        let mut acc = 0.0;
        for (i, v) in values.iter().enumerate() {
            acc += v * (breakpoints[i + 1] - breakpoints[i]);
            cumulative.push(acc);
        }
        Ok(Self { breakpoints, values, cumulative })
    }

    pub fn constant(left: f64, right: f64, value: f64) -> Result<Self> {
        Self::new(vec![left, right], vec![value])
    }

    /// `χ_(left, right)`.
    pub fn indicator(left: f64, right: f64) -> Result<Self> {
        Self::constant(left, right, 1.0)
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn num_pieces(&self) -> usize {
        self.values.len()
    }

    /// `(left, right, value)` for every piece, left to right.
    pub fn pieces(&self) -> impl Iterator<Item = (f64, f64, f64)> + '_ {
        self.values.iter().enumerate().map(|(i, &v)| (self.breakpoints[i], self.breakpoints[i + 1], v))
    }

    pub fn support(&self) -> Interval {
        Interval { left: self.breakpoints[0], right: *self.breakpoints.last().unwrap() }
    }

    pub fn total_mass(&self) -> f64 {
        *self.cumulative.last().unwrap()
    }

    pub fn max_value(&self) -> f64 {
        self.values.iter().copied().fold(0.0, f64::max)
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|&v| v == 0.0)
    }

    /// Cumulative masses at the breakpoints, `F(t_i)`.
    pub fn cumulative_at_breakpoints(&self) -> &[f64] {
        &self.cumulative
    }

    /// `F(x) = ∫_{-∞}^x f`.
    pub fn cumulative(&self, x: f64) -> f64 {
        let t = &self.breakpoints;
        if x <= t[0] {
            return 0.0;
        }
        if x >= t[t.len() - 1] {
            return self.total_mass();
        }
        // t[i-1] <= x < t[i]
        let i = t.partition_point(|&b| b <= x);
        self.cumulative[i - 1] + self.values[i - 1] * (x - t[i - 1])
    }

    /// `∫_a^b f` for `a ≤ b`, summed piece by piece (no cancellation).
    pub fn integrate_between(&self, a: f64, b: f64) -> f64 {
        if b <= a {
            return 0.0;
        }
        let t = &self.breakpoints;
        let lo = a.max(t[0]);
        let hi = b.min(t[t.len() - 1]);
        if lo >= hi {
            return 0.0;
        }
        // piece i spans (t[i], t[i+1])
        let first = t.partition_point(|&s| s <= lo) - 1;
        let mut sum = 0.0;
        for i in first..self.values.len() {
            if t[i] >= hi {
                break;
            }
            let len = t[i + 1].min(hi) - t[i].max(lo);
            sum += self.values[i] * len;
        }
        sum
    }

    /// `∫_I f`.
    pub fn integrate(&self, interval: &Interval) -> f64 {
        self.integrate_between(interval.left, interval.right)
    }

    /// Value on the piece immediately to the right of `x` (0 off the support).
    pub fn value_right(&self, x: f64) -> f64 {
        let t = &self.breakpoints;
        if x < t[0] || x >= t[t.len() - 1] {
            return 0.0;
        }
        self.values[t.partition_point(|&b| b <= x) - 1]
    }

    /// Value on the piece immediately to the left of `x` (0 off the support).
    pub fn value_left(&self, x: f64) -> f64 {
        let t = &self.breakpoints;
        if x <= t[0] || x > t[t.len() - 1] {
            return 0.0;
        }
        self.values[t.partition_point(|&b| b < x) - 1]
    }

    fn with_values(&self, values: Vec<f64>) -> Result<Self> {
        Self::new(self.breakpoints.clone(), values)
    }

    /// Pointwise power `f^r` (with `0^r = 0` for `r > 0`).
    pub fn pow(&self, r: f64) -> Self {
        self.with_values(self.values.iter().map(|&v| if v == 0.0 { 0.0 } else { v.powf(r) }).collect())
            .expect("powers of finite positive values stay valid")
    }

    pub fn scale(&self, c: f64) -> Result<Self> {
        self.with_values(self.values.iter().map(|&v| v * c).collect())
    }

    /// `x ↦ f(-x)`.
    pub fn reflect(&self) -> Self {
        let breakpoints = self.breakpoints.iter().rev().map(|t| -t).collect();
        let values = self.values.iter().rev().copied().collect();
        Self::new(breakpoints, values).expect("reflection preserves validity")
    }

    /// `x ↦ f((x - shift) / scale)`, the push-forward under `x ↦ scale·x + shift`.
    pub fn affine_image(&self, scale: f64, shift: f64) -> Result<Self> {
        if !(scale > 0.0) {
            return Err(Error::Parameter(format!("affine scale must be positive, got {scale}")));
        }
        Self::new(self.breakpoints.iter().map(|t| scale * t + shift).collect(), self.values.clone())
    }

    /// `f·χ_I` as a step function whose support is exactly `I`.
    pub fn restrict(&self, interval: &Interval) -> Self {
        let (lo, hi) = (interval.left, interval.right);
        let mut bps = vec![lo];
        let mut vals = Vec::new();
        let mut cursor = lo;
        for (a, b, v) in self.pieces() {
            if b <= lo || a >= hi {
                continue;
            }
            let s = a.max(lo);
            let e = b.min(hi);
            if s > cursor {
                vals.push(0.0);
                bps.push(s);
            }
            vals.push(v);
            bps.push(e);
            cursor = e;
        }
        if cursor < hi {
            vals.push(0.0);
            bps.push(hi);
        }
        Self::new(bps, vals).expect("restriction of a valid step function is valid")
    }

    /// `σ = w^{-1/(p-1)}` on the support of `w`.
    pub fn dual_weight(&self, p: f64) -> Result<Self> {
        if !(p > 1.0) {
            return Err(Error::Parameter(format!("dual weight needs p > 1, got {p}")));
        }
        self.negative_power(1.0 / (p - 1.0))
    }

    /// `w^{-e}` for `e > 0`; fails if `w` vanishes on a piece of its support.
    pub fn negative_power(&self, e: f64) -> Result<Self> {
        if let Some(i) = self.values.iter().position(|&v| v == 0.0) {
            return Err(Error::VanishingWeight { piece: i, left: self.breakpoints[i], right: self.breakpoints[i + 1] });
        }
        self.with_values(self.values.iter().map(|&v| v.powf(-e)).collect())
    }

    /// Common refinement with `other` over the union of both supports:
    /// `(left, right, self value, other value)` per cell.
    pub fn refine_with(&self, other: &StepFunction) -> Vec<(f64, f64, f64, f64)> {
        let mut pts: Vec<f64> = self.breakpoints.iter().chain(other.breakpoints.iter()).copied().collect();
        pts.sort_by(f64::total_cmp);
        pts.dedup();
        pts.windows(2)
            .map(|w| {
                let m = 0.5 * (w[0] + w[1]);
                (w[0], w[1], self.value_right(m), other.value_right(m))
            })
            .collect()
    }

    /// Lorentz norms for exponent `p ≥ 1`.
    pub fn lorentz_norms(&self, p: f64) -> LorentzNorms {
        let cells: Vec<(f64, f64)> = self.pieces().map(|(a, b, v)| (b - a, v)).collect();
        lorentz_from_cells(&cells, p)
    }

    /// `‖f χ_I‖_{L^{1,∞}}`.
    pub fn weak_l1inf_on(&self, interval: &Interval) -> f64 {
        let cells: Vec<(f64, f64)> = self
            .pieces()
            .filter_map(|(a, b, v)| {
                let len = interval.overlap(a, b);
                (len > 0.0).then_some((len, v))
            })
            .collect();
        lorentz_from_cells(&cells, 1.0).weak
    }

    /// Leftmost `x` with `F(x) = level`, for `0 ≤ level ≤ ∫ f`.
    pub fn inverse_cumulative(&self, level: f64) -> f64 {
        let c = &self.cumulative;
        let t = &self.breakpoints;
        if level <= 0.0 {
            return t[0];
        }
        if level >= self.total_mass() {
            // leftmost point carrying the full mass
            let j = c.partition_point(|&m| m < self.total_mass());
            return t[j.min(t.len() - 1)];
        }
        // c[i-1] < level <= c[i]
        let i = c.partition_point(|&m| m < level);
        let v = self.values[i - 1];
        (t[i - 1] + (level - c[i - 1]) / v).min(t[i])
    }

    /// The σ-halving chain of `interval` with `depth + 1` points.
    pub fn halving_chain(&self, interval: &Interval, depth: usize) -> Result<HalvingChain> {
        let (a, b) = (interval.left, interval.right);
        let total = self.integrate(interval);
        if !(total > 0.0) {
            return Err(Error::NoMass(a, b));
        }
        let fb = self.cumulative(b);
        let mut points = Vec::with_capacity(depth + 1);
        let mut masses = Vec::with_capacity(depth + 1);
        points.push(a);
        masses.push(total);
        for i in 1..=depth {
            let mass = total * 0.5f64.powi(i as i32);
            let x = self.inverse_cumulative(fb - mass).clamp(a, b);
            points.push(x);
            masses.push(mass);
        }
        Ok(HalvingChain { base: *interval, points, masses })
    }
}

/// Lorentz norms of a nonnegative function given as `(length, value)` cells.
pub fn lorentz_from_cells(cells: &[(f64, f64)], p: f64) -> LorentzNorms {
    let mut sorted: Vec<(f64, f64)> = cells.iter().copied().filter(|c| c.1 > 0.0 && c.0 > 0.0).collect();
    // descending by value
    sorted.sort_by(|x, y| y.1.total_cmp(&x.1));
    let inv_p = 1.0 / p;
    let mut weak: f64 = 0.0;
    let mut l_p1 = 0.0;
    let mut measure = 0.0;
    let mut k = 0;
    while k < sorted.len() {
        let v = sorted[k].1;
        while k < sorted.len() && sorted[k].1 == v {
            measure += sorted[k].0;
            k += 1;
        }
        let next = if k < sorted.len() { sorted[k].1 } else { 0.0 };
        // |{f ≥ v}| = measure; on (next, v) the distribution function equals it
        let m = measure.powf(inv_p);
        weak = weak.max(v * m);
        l_p1 += (v - next) * m;
    }
    LorentzNorms { weak, l_p1 }
}

/// `∫_I f`.
pub fn integrate(f: &StepFunction, interval: &Interval) -> f64 {
    f.integrate(interval)
}

/// `σ = w^{-1/(p-1)}`.
pub fn dual_weight(w: &StepFunction, p: f64) -> Result<StepFunction> {
    w.dual_weight(p)
}

pub fn lorentz_norms(f: &StepFunction, p: f64) -> LorentzNorms {
    f.lorentz_norms(p)
}

pub fn weak_l1inf_on(w: &StepFunction, interval: &Interval) -> f64 {
    w.weak_l1inf_on(interval)
}

/// `‖f‖_{L^p(w)} = (∫ f^p w)^{1/p}`.
pub fn lp_norm(f: &StepFunction, w: &StepFunction, p: f64) -> f64 {
    f.refine_with(w)
        .into_iter()
        .map(|(a, b, fv, wv)| if fv == 0.0 { 0.0 } else { fv.powf(p) * wv * (b - a) })
        .sum::<f64>()
        .powf(1.0 / p)
}

pub fn halving_chain(sigma: &StepFunction, interval: &Interval, depth: usize) -> Result<HalvingChain> {
    sigma.halving_chain(interval, depth)
}
