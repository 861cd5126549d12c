//! The weight functionals evaluated directly at one triple or interval.
//!
//! These are the slow, table-free forms used to re-evaluate witnesses.

use super::Triple;
use crate::error::Result;
use crate::maximal::{compile_envelope, integrate_opposite_exact, Side};
use crate::stepfn::{Interval, StepFunction};

/// `(w(a,b)/(c−a)) (σ(b,c)/(c−a))^{p−1}`; the minus side swaps the roles of
/// `(a,b)` and `(b,c)`.
pub fn ap(w: &StepFunction, sigma: &StepFunction, p: f64, side: Side, t: &Triple) -> f64 {
    let len = t.c - t.a;
    let (wl, sl) = match side {
        Side::Plus => (w.integrate_between(t.a, t.b), sigma.integrate_between(t.b, t.c)),
        Side::Minus => (w.integrate_between(t.b, t.c), sigma.integrate_between(t.a, t.b)),
    };
    (wl / len) * (sl / len).powf(p - 1.0)
}

/// `(1/w(I)) ∫_I M^{∓}(wχ_I)`; the plus class uses `M⁻`.
pub fn ainf(w: &StepFunction, side: Side, interval: &Interval) -> Option<f64> {
    let mass = w.integrate(interval);
    (mass > 0.0).then(|| integrate_opposite_exact(w, interval, side.opposite()) / mass)
}

/// `(c−a)^{-p} ‖wχ_{(a,b)}‖_{L^{1,∞}} σ(b,c)^{p−1}`.
pub fn ap_star(w: &StepFunction, sigma: &StepFunction, p: f64, t: &Triple) -> f64 {
    let weak = w.weak_l1inf_on(&Interval { left: t.a, right: t.b });
    weak * sigma.integrate_between(t.b, t.c).powf(p - 1.0) / (t.c - t.a).powf(p)
}

/// `((c−a)^{-1}‖w^qχ_{(a,b)}‖_{L^{1,∞}})^{1/q} ((c−a)^{-1}∫_b^c w^{-p'})^{1/p'}`,
/// given `w^q` and `w^{-p'}`.
pub fn apq_star(w_q: &StepFunction, w_neg: &StepFunction, p: f64, q: f64, t: &Triple) -> f64 {
    let len = t.c - t.a;
    let pp = p / (p - 1.0);
    let weak = w_q.weak_l1inf_on(&Interval { left: t.a, right: t.b });
    (weak / len).powf(1.0 / q) * (w_neg.integrate_between(t.b, t.c) / len).powf(1.0 / pp)
}

/// `sup_{E⊂(a,b)} |E|/(c−a) (σ(b,c)/σ(E))^{1/r}`.
pub fn restricted(sigma: &StepFunction, r: f64, t: &Triple) -> Option<f64> {
    let right = sigma.integrate_between(t.b, t.c);
    (right > 0.0).then(|| lightest_subset_gain(sigma, t.a, t.b, r) * right.powf(1.0 / r) / (t.c - t.a))
}

/// `sup_{E⊂(a,b)} |E| σ(E)^{-1/r}`.
///
/// For fixed `|E|` the lightest `E` takes the lowest densities first, and on
/// each density level `m ↦ m σ_min(m)^{-1/r}` decreases then increases, so
/// the supremum sits at a cumulative cell boundary.
pub fn lightest_subset_gain(sigma: &StepFunction, a: f64, b: f64, r: f64) -> f64 {
    let mut cells: Vec<(f64, f64)> = sigma
        .pieces()
        .filter_map(|(lo, hi, v)| {
            let len = hi.min(b) - lo.max(a);
            (len > 0.0).then_some((v, len))
        })
        .collect();
    // σ may not cover (a, b); the uncovered part has density 0
    let covered: f64 = cells.iter().map(|c| c.1).sum();
    if b - a - covered > 1e-12 * (b - a) {
        return f64::INFINITY;
    }
    cells.sort_by(|x, y| x.0.total_cmp(&y.0));
    let (mut m, mut s, mut best) = (0.0, 0.0, 0.0f64);
    for (v, len) in cells {
        m += len;
        s += v * len;
        best = best.max(m * s.powf(-1.0 / r));
    }
    best
}

/// `(1/σ(I)) ∫_I M⁺(σχ_I)^p w`.
pub fn testing(w: &StepFunction, sigma: &StepFunction, p: f64, interval: &Interval, tol: f64) -> Result<Option<f64>> {
    let mass = sigma.integrate(interval);
    if !(mass > 0.0) {
        return Ok(None);
    }
    let env = compile_envelope(&sigma.restrict(interval), Side::Plus);
    let local = w.restrict(interval);
    Ok(Some(env.integrate_power_weight(p, &local, tol)? / mass))
}
