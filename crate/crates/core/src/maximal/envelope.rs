//! Compiled, piecewise closed-form representation of `M⁺f` and `M⁻f`.

use serde::{Deserialize, Serialize};

use super::Side;
use crate::error::{Error, Result};
use crate::quad::integrate_adaptive;
use crate::stepfn::{IntervalSet, StepFunction};

/// Formula valid on one envelope piece.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Formula {
    Constant(f64),
    /// `constant + residue / |x − anchor|`, i.e. the average of `f` over the
    /// window reaching from `x` to `anchor`.
    Moebius {
        constant: f64,
        residue: f64,
        anchor: f64,
    },
}

impl Formula {
    pub fn eval(&self, x: f64) -> f64 {
        match *self {
            Formula::Constant(c) => c,
            Formula::Moebius { constant, residue, anchor } => constant + residue / (x - anchor).abs(),
        }
    }

    /// `∫_lo^hi` of the formula (finite bounds).
    fn integral(&self, lo: f64, hi: f64) -> f64 {
        match *self {
            Formula::Constant(c) => c * (hi - lo),
            Formula::Moebius { constant, residue, anchor } => {
                let ratio = (hi - anchor).abs() / (lo - anchor).abs();
                constant * (hi - lo) + residue * ratio.ln().abs()
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnvelopePiece {
    /// Possibly unbounded on the outer pieces.
    pub lo: f64,
    pub hi: f64,
    pub formula: Formula,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Envelope {
    side: Side,
    source: StepFunction,
    pieces: Vec<EnvelopePiece>,
    hull_operations: usize,
}

/// `M⁺f` (side plus) or `M⁻f` (side minus) as an ordered list of pieces.
///
/// The plus side is one right-to-left scan keeping the upper concave hull of
/// the cumulative points `(t_j, F(t_j))`; the window end maximising the
/// average from `x` is the tangent vertex of that hull seen from `(x, F(x))`,
/// which moves right as `x` moves left through a piece. The minus side is the
/// mirror image of the plus side of the reflected function.
pub fn compile_envelope(f: &StepFunction, side: Side) -> Envelope {
    match side {
        Side::Plus => {
            let (pieces, hull_operations) = scan_plus(f);
            Envelope { side, source: f.clone(), pieces, hull_operations }
        }
        Side::Minus => {
            let (mirrored, hull_operations) = scan_plus(&f.reflect());
            let pieces = mirrored
                .into_iter()
                .rev()
                .map(|p| EnvelopePiece {
                    lo: -p.hi,
                    hi: -p.lo,
                    formula: match p.formula {
                        Formula::Moebius { constant, residue, anchor } => {
                            Formula::Moebius { constant, residue, anchor: -anchor }
                        }
                        c => c,
                    },
                })
                .collect();
            Envelope { side, source: f.clone(), pieces, hull_operations }
        }
    }
}

fn scan_plus(f: &StepFunction) -> (Vec<EnvelopePiece>, usize) {
    let t = f.breakpoints();
    let cum = f.cumulative_at_breakpoints();
    let vals = f.values();
    let n = vals.len();
    let mut out: Vec<EnvelopePiece> = Vec::with_capacity(2 * n + 2);
    push_piece(&mut out, t[n], f64::INFINITY, Formula::Constant(0.0));

    // hull vertex indices; the bottom is n, the top the leftmost vertex
    let mut hull: Vec<usize> = vec![n];
    let mut ops = 1;
    let slope = |i: usize, j: usize| (cum[j] - cum[i]) / (t[j] - t[i]);

    for i in (0..=n).rev() {
        // piece i covers (t_{i-1}, t_i); i == 0 is the left tail
        let (v, left) = if i == 0 { (0.0, f64::NEG_INFINITY) } else { (vals[i - 1], t[i - 1]) };
        sweep_piece(&mut out, t, cum, &hull, i, v, left);
        if i == 0 {
            break;
        }
        while hull.len() >= 2 {
            let top = hull[hull.len() - 1];
            let second = hull[hull.len() - 2];
            if slope(i - 1, top) <= slope(i - 1, second) {
                hull.pop();
                ops += 1;
            } else {
                break;
            }
        }
        hull.push(i - 1);
        ops += 1;
    }
    out.reverse();
    (out, ops)
}

/// Emits pieces for `x ∈ (left, t_i)`, right to left.
fn sweep_piece(out: &mut Vec<EnvelopePiece>, t: &[f64], cum: &[f64], hull: &[usize], i: usize, v: f64, left: f64) {
    let ti = t[i];
    let len = ti - left;
    // the far end is the breakpoint itself, not t_i − len, so neighbours meet exactly
    let at = |d: f64| if d >= len { left } else { ti - d };
    let fi = cum[i];
    // d = t_i − x; pos indexes the tangent vertex from the top of the hull
    let mut pos = hull.len() - 1;
    let mut d_start = 0.0;
    let dt = |k: usize| t[k] - ti;
    let df = |k: usize| cum[k] - fi;
    if pos == 0 || v >= df(hull[pos - 1]) / dt(hull[pos - 1]) {
        push_piece(out, left, ti, Formula::Constant(v));
        return;
    }
    pos -= 1;
    loop {
        let k = hull[pos];
        // switch to the next vertex right once P rises above the hull edge
        let d_end = if pos == 0 {
            len
        } else {
            let k2 = hull[pos - 1];
            let c0 = df(k) * dt(k2) - df(k2) * dt(k);
            let c1 = df(k) - df(k2) + v * (dt(k2) - dt(k));
            if c1 < 0.0 {
                (-c0 / c1).max(d_start).min(len)
            } else {
                len
            }
        };
        if d_end > d_start {
            let residue = df(k) - v * dt(k);
            push_piece(out, at(d_end), at(d_start), Formula::Moebius { constant: v, residue, anchor: t[k] });
        }
        if d_end >= len {
            break;
        }
        d_start = d_end;
        pos -= 1;
    }
}

/// Appends (scanning right to left), merging with an identical neighbour.
fn push_piece(out: &mut Vec<EnvelopePiece>, lo: f64, hi: f64, formula: Formula) {
    if let Some(last) = out.last_mut() {
        if last.formula == formula && last.lo == hi {
            last.lo = lo;
            return;
        }
    }
    out.push(EnvelopePiece { lo, hi, formula });
}

impl Envelope {
    pub fn side(&self) -> Side {
        self.side
    }

    pub fn source(&self) -> &StepFunction {
        &self.source
    }

    pub fn pieces(&self) -> &[EnvelopePiece] {
        &self.pieces
    }

    /// Hull pushes plus pops performed while compiling.
    pub fn hull_operations(&self) -> usize {
        self.hull_operations
    }

    fn locate(&self, x: f64) -> usize {
        match self.side {
            // pieces are [lo, hi)
            Side::Plus => self.pieces.partition_point(|p| p.hi <= x),
            // pieces are (lo, hi]
            Side::Minus => self.pieces.partition_point(|p| p.hi < x),
        }
        .min(self.pieces.len() - 1)
    }

    pub fn value_at(&self, x: f64) -> f64 {
        self.pieces[self.locate(x)].formula.eval(x)
    }

    pub fn max_value(&self) -> f64 {
        self.pieces
            .iter()
            .map(|p| match p.formula {
                Formula::Constant(c) => c,
                Formula::Moebius { .. } => {
                    let edge = if self.side == Side::Plus { p.hi } else { p.lo };
                    p.formula.eval(edge)
                }
            })
            .fold(0.0, f64::max)
    }

    /// Smallest positive value taken on `[lo, hi]`, if any.
    pub fn min_positive_within(&self, lo: f64, hi: f64) -> Option<f64> {
        self.pieces
            .iter()
            .filter(|p| p.hi > lo && p.lo < hi)
            .map(|p| {
                let a = p.lo.max(lo);
                let b = p.hi.min(hi);
                p.formula.eval(a).min(p.formula.eval(b))
            })
            .filter(|&v| v > 0.0)
            .min_by(f64::total_cmp)
    }

    /// Exact `∫_lo^hi` of the envelope.
    pub fn integral_exact(&self, lo: f64, hi: f64) -> f64 {
        self.pieces
            .iter()
            .filter(|p| p.hi > lo && p.lo < hi)
            .map(|p| p.formula.integral(p.lo.max(lo), p.hi.min(hi)))
            .sum()
    }

    /// `{x : envelope(x) > threshold}` as disjoint open spans.
    pub fn superlevel(&self, threshold: f64) -> IntervalSet {
        self.superlevel_within(threshold, f64::NEG_INFINITY, f64::INFINITY)
    }

    /// `{x ∈ (lo, hi) : envelope(x) > threshold}`.
    pub fn superlevel_within(&self, threshold: f64, lo: f64, hi: f64) -> IntervalSet {
        let spans = self.pieces.iter().filter(|p| p.hi > lo && p.lo < hi).filter_map(|p| {
            let (a, b) = (p.lo.max(lo), p.hi.min(hi));
            match p.formula {
                Formula::Constant(c) => (c > threshold).then_some((a, b)),
                Formula::Moebius { constant, residue, anchor } => {
                    if constant > threshold {
                        return Some((a, b));
                    }
                    if residue <= 0.0 {
                        return None;
                    }
                    // |x − anchor| < residue / (threshold − constant)
                    let reach = residue / (threshold - constant);
                    let (s, e) = match self.side {
                        Side::Plus => (a.max(anchor - reach), b),
                        Side::Minus => (a, b.min(anchor + reach)),
                    };
                    (s < e).then_some((s, e))
                }
            }
        });
        IntervalSet::from_spans(spans.collect::<Vec<_>>())
    }

    /// `∫ envelope^p · w` over the support of `w`, to relative tolerance `tol`.
    ///
    /// Constant cells and integer `p` are integrated in closed form; other
    /// cells go through adaptive quadrature.
    pub fn integrate_power_weight(&self, p: f64, w: &StepFunction, tol: f64) -> Result<f64> {
        if !(p > 0.0) || !p.is_finite() {
            return Err(Error::Parameter(format!("power must be positive, got {p}")));
        }
        let mut total = 0.0;
        for (a, b, wv) in w.pieces() {
            if wv == 0.0 {
                continue;
            }
            let first = self.locate(a);
            for piece in &self.pieces[first..] {
                if piece.lo >= b {
                    break;
                }
                let lo = piece.lo.max(a);
                let hi = piece.hi.min(b);
                if hi <= lo {
                    continue;
                }
                total += wv * power_integral(&piece.formula, p, lo, hi, tol)?;
            }
        }
        Ok(total)
    }

    /// `∫ envelope^p · w` by quadrature on every non-constant cell.
    pub fn integrate_power_weight_quadrature(&self, p: f64, w: &StepFunction, tol: f64) -> Result<f64> {
        let mut total = 0.0;
        for (a, b, wv) in w.pieces() {
            for piece in &self.pieces {
                let lo = piece.lo.max(a);
                let hi = piece.hi.min(b);
                if hi <= lo || wv == 0.0 {
                    continue;
                }
                total += wv
                    * match piece.formula {
                        Formula::Constant(c) => c.powf(p) * (hi - lo),
                        formula => integrate_adaptive(&|x| formula.eval(x).powf(p), lo, hi, tol)?,
                    };
            }
        }
        Ok(total)
    }
}

fn power_integral(formula: &Formula, p: f64, lo: f64, hi: f64, tol: f64) -> Result<f64> {
    match *formula {
        Formula::Constant(c) => Ok(if c == 0.0 { 0.0 } else { c.powf(p) * (hi - lo) }),
        Formula::Moebius { constant, residue, anchor } => {
            if p.fract() == 0.0 && p <= 8.0 {
                // binomial expansion in u = |x − anchor|
                let m = p as i32;
                let (u0, u1) = {
                    let (x, y) = ((lo - anchor).abs(), (hi - anchor).abs());
                    (x.min(y), x.max(y))
                };
                let mut sum = 0.0;
                let mut binom = 1.0;
                for j in 0..=m {
                    let coeff = binom * constant.powi(m - j) * residue.powi(j);
                    if coeff != 0.0 {
                        sum += coeff * inverse_power_integral(j, u0, u1);
                    }
                    binom = binom * (m - j) as f64 / (j + 1) as f64;
                }
                Ok(sum)
            } else {
                integrate_adaptive(&|x| formula.eval(x).powf(p), lo, hi, tol)
            }
        }
    }
}

/// `∫_{u0}^{u1} u^{-j} du` for `0 < u0 ≤ u1`.
fn inverse_power_integral(j: i32, u0: f64, u1: f64) -> f64 {
    match j {
        0 => u1 - u0,
        1 => (u1 / u0).ln(),
        _ => {
            let e = (j - 1) as f64;
            (u0.powf(-e) - u1.powf(-e)) / e
        }
    }
}

#[derive(Serialize, Deserialize)]
struct RawPiece {
    /// `null` marks an unbounded end.
    interval: [Option<f64>; 2],
    kind: String,
    coefficients: Vec<f64>,
    anchor: Option<f64>,
}

#[derive(Serialize, Deserialize)]
struct RawEnvelope {
    side: Side,
    source: StepFunction,
    pieces: Vec<RawPiece>,
}

impl Serialize for Envelope {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let finite = |x: f64| x.is_finite().then_some(x);
        let pieces = self
            .pieces
            .iter()
            .map(|p| {
                let interval = [finite(p.lo), finite(p.hi)];
                match p.formula {
                    Formula::Constant(c) => {
                        RawPiece { interval, kind: "constant".into(), coefficients: vec![c], anchor: None }
                    }
                    Formula::Moebius { constant, residue, anchor } => RawPiece {
                        interval,
                        kind: "moebius".into(),
                        coefficients: vec![constant, residue],
                        anchor: Some(anchor),
                    },
                }
            })
            .collect();
        RawEnvelope { side: self.side, source: self.source.clone(), pieces }.serialize(s)
    }
}

impl<'de> Deserialize<'de> for Envelope {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let raw = RawEnvelope::deserialize(d)?;
        let mut pieces = Vec::with_capacity(raw.pieces.len());
        for p in raw.pieces {
            let lo = p.interval[0].unwrap_or(f64::NEG_INFINITY);
            let hi = p.interval[1].unwrap_or(f64::INFINITY);
            let formula = match (p.kind.as_str(), p.coefficients.as_slice(), p.anchor) {
                ("constant", [c], None) => Formula::Constant(*c),
                ("moebius", [c, k], Some(a)) => Formula::Moebius { constant: *c, residue: *k, anchor: a },
                _ => return Err(D::Error::custom(format!("malformed envelope piece of kind {:?}", p.kind))),
            };
            pieces.push(EnvelopePiece { lo, hi, formula });
        }
        Ok(Envelope { side: raw.side, source: raw.source, pieces, hull_operations: 0 })
    }
}
