//! Orlicz averages: Luxemburg norms, the Orlicz one-sided maximal operator
//! and the two bump constants.

mod young;

pub use young::{measure_kappa, ConjugatePair, YoungFunction};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::maximal::{compile_envelope, Side};
use crate::quad::gauss_legendre;
use crate::stepfn::{Interval, StepFunction};
use crate::verify::ClaimResult;
use crate::weights::{
    max_over_pairs, max_over_triples, ConstantKind, Enumeration, Middles, PairTable, Parameters, Triple,
    WeightConstantReport, Witness,
};

const MAX_ITERATIONS: usize = 200;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LuxemburgResult {
    pub norm: f64,
    /// `(1/|I|)∫_I Φ(f/norm)`, 0 when `norm = 0`.
    pub achieved: f64,
}

/// `‖f‖_{Φ,I} = inf{λ > 0 : (1/|I|)∫_I Φ(f/λ) ≤ 1}`.
pub fn luxemburg_norm(f: &StepFunction, phi: &YoungFunction, interval: &Interval, tol: f64) -> LuxemburgResult {
    let cells = cells_on(f, interval.left, interval.right);
    luxemburg_cells(phi, &cells, interval.length(), tol)
}

/// `(length, value)` cells of `f` inside `(lo, hi)`, zero cells dropped.
pub fn cells_on(f: &StepFunction, lo: f64, hi: f64) -> Vec<(f64, f64)> {
    f.pieces()
        .filter_map(|(a, b, v)| {
            let len = b.min(hi) - a.max(lo);
            (len > 0.0 && v > 0.0).then_some((len, v))
        })
        .collect()
}

/// Luxemburg norm of a function given by cells on an interval of length
/// `len`; closed form for power functions.
pub fn luxemburg_cells(phi: &YoungFunction, cells: &[(f64, f64)], len: f64, tol: f64) -> LuxemburgResult {
    if cells.is_empty() {
        return LuxemburgResult { norm: 0.0, achieved: 0.0 };
    }
    match phi.is_power() {
        Some(r) => {
            let mean: f64 = cells.iter().map(|&(l, v)| l * v.powf(r)).sum::<f64>() / len;
            LuxemburgResult { norm: mean.powf(1.0 / r), achieved: 1.0 }
        }
        None => luxemburg_solve(phi, cells, len, tol, None),
    }
}

/// The iterative Luxemburg solver, for any Young function.
///
/// Safeguarded Newton on `log λ ↦ log A(λ)` with `A(λ) = (1/len)Σ l Φ(v/λ)`,
/// aimed slightly below 1 so the returned `λ` satisfies
/// `A(λ) ∈ [1 − tol, 1]`. Falls back to bisection in `log λ` whenever the
/// Newton step leaves the bracket.
pub fn luxemburg_solve(
    phi: &YoungFunction,
    cells: &[(f64, f64)],
    len: f64,
    tol: f64,
    hint: Option<f64>,
) -> LuxemburgResult {
    if cells.is_empty() {
        return LuxemburgResult { norm: 0.0, achieved: 0.0 };
    }
    let c1 = phi.inverse(1.0);
    let mean = cells.iter().map(|&(l, v)| l * v).sum::<f64>() / len;
    let max = cells.iter().map(|c| c.1).fold(0.0, f64::max);
    // Jensen gives A(mean/c1) ≥ 1, and A(max/c1) ≤ 1
    let mut lo = (mean / c1).ln();
    let mut hi = (max / c1).ln();
    let eval = |u: f64| {
        let lambda = u.exp();
        let (mut a, mut d) = (0.0, 0.0);
        for &(l, v) in cells {
            let t = v / lambda;
            a += l * phi.eval(t);
            d += l * phi.t_derivative(t);
        }
        (a / len, d / len)
    };
    let target = (1.0 - 0.5 * tol).ln();
    let (a_hi, _) = eval(hi);
    if a_hi >= 1.0 - tol {
        return LuxemburgResult { norm: hi.exp(), achieved: a_hi };
    }
    let mut u = hint.map(f64::ln).filter(|h| *h > lo && *h < hi).unwrap_or(0.5 * (lo + hi));
    let mut best = (hi, a_hi);
    for _ in 0..MAX_ITERATIONS {
        let (a, d) = eval(u);
        if a <= 1.0 {
            if a >= 1.0 - tol {
                return LuxemburgResult { norm: u.exp(), achieved: a };
            }
            hi = u;
            best = (u, a);
        } else {
            lo = u;
        }
        if hi - lo < 1e-3 * tol {
            break;
        }
        // d/du log A = −(Σ l tΦ'(t))/(Σ l Φ(t))
        let slope = if a > 0.0 { -d / a } else { 0.0 };
        let step = if slope < 0.0 { u - (a.ln() - target) / slope } else { f64::NAN };
        u = if step > lo && step < hi { step } else { 0.5 * (lo + hi) };
    }
    LuxemburgResult { norm: best.0.exp(), achieved: best.1 }
}

/// `M_Φ⁺f(x) = sup_h ‖f‖_{Φ,(x,x+h)}` over window ends at the breakpoints
/// beyond `x` and `R` subdivisions of every piece, together with the
/// small-window limit `f(x+)/Φ^{-1}(1)`.
pub fn orlicz_mplus_at(f: &StepFunction, phi: &YoungFunction, x: f64, refinement: usize) -> f64 {
    orlicz_mplus_with_tol(f, phi, x, refinement, 1e-10)
}

fn orlicz_mplus_with_tol(f: &StepFunction, phi: &YoungFunction, x: f64, refinement: usize, tol: f64) -> f64 {
    let r = refinement.max(1);
    let t = f.breakpoints();
    let mut best = f.value_right(x) / phi.inverse(1.0);
    let mut ends = Vec::new();
    let mut prev = x;
    for &b in t.iter().filter(|&&b| b > x) {
        for k in 1..=r {
            ends.push(prev + (b - prev) * (k as f64 / r as f64));
        }
        prev = b;
    }
    let mut hint = None;
    for e in ends {
        let cells = cells_on(f, x, e);
        let res = match phi.is_power() {
            Some(_) => luxemburg_cells(phi, &cells, e - x, tol),
            None => luxemburg_solve(phi, &cells, e - x, tol, hint),
        };
        if res.norm > 0.0 {
            hint = Some(res.norm);
        }
        best = best.max(res.norm);
    }
    best
}

/// `[σ, Φ̄]_{W_p^-}` and `[w, σ, Φ]_{A_p^+}`.
pub fn bump_constants(
    w: &StepFunction,
    sigma: &StepFunction,
    phi: &YoungFunction,
    phi_bar: &YoungFunction,
    p: f64,
    refinement: usize,
) -> Result<(WeightConstantReport, WeightConstantReport)> {
    let en = Enumeration::new(refinement);
    Ok((bump_wp_minus(&en, sigma, phi_bar, p)?, bump_ap_plus(&en, w, sigma, phi, p)?))
}

fn check_inputs(sigma: &StepFunction, p: f64) -> Result<()> {
    if !(p > 1.0) || !p.is_finite() {
        return Err(Error::Parameter(format!("p must be a finite number > 1, got {p}")));
    }
    if let Some(i) = sigma.values().iter().position(|&v| v == 0.0) {
        let t = sigma.breakpoints();
        return Err(Error::VanishingWeight { piece: i, left: t[i], right: t[i + 1] });
    }
    Ok(())
}

/// `[σ, Φ̄]_{W_p^-} = sup_I (1/σ(I)) ∫_I M_Φ̄⁺(σ^{1/p}χ_I)^p`.
///
/// For `Φ̄ = t^r` the identity `M_{t^r}⁺g = M⁺(g^r)^{1/r}` makes the integrand
/// an envelope power; other `Φ̄` are sampled on a composite Gauss–Legendre
/// grid refined until two successive estimates agree.
pub fn bump_wp_minus(
    en: &Enumeration,
    sigma: &StepFunction,
    phi_bar: &YoungFunction,
    p: f64,
) -> Result<WeightConstantReport> {
    check_inputs(sigma, p)?;
    phi_bar.validate()?;
    let grid = en.grid(&[sigma]);
    let sm = PairTable::masses(en.exec, &grid, sigma);
    let failure = std::sync::Mutex::new(None);
    let best = max_over_pairs(en.exec, &grid, |i, k, a, b| {
        let mass = sm.get(i, k);
        if !(mass > 0.0) {
            return None;
        }
        match wp_minus_integral(sigma, phi_bar, p, &Interval { left: a, right: b }, en) {
            Ok(v) => Some(v / mass),
            Err(e) => {
                failure.lock().unwrap().get_or_insert(e);
                None
            }
        }
    });
    if let Some(e) = failure.into_inner().unwrap() {
        return Err(e);
    }
    let params = Parameters { p: Some(p), phi: Some(phi_bar.id()), ..Default::default() };
    Ok(en.report(ConstantKind::BumpWpMinus, best.map(|(v, i)| (v, Witness::Interval(i))), params))
}

/// `∫_I M_Φ̄⁺(σ^{1/p}χ_I)^p`.
pub fn wp_minus_integral(
    sigma: &StepFunction,
    phi_bar: &YoungFunction,
    p: f64,
    interval: &Interval,
    en: &Enumeration,
) -> Result<f64> {
    match phi_bar.is_power() {
        Some(r) => {
            let g = sigma.pow(r / p).restrict(interval);
            let env = compile_envelope(&g, Side::Plus);
            let e = p / r;
            if e == 1.0 {
                Ok(env.integral_exact(interval.left, interval.right))
            } else {
                let chi = StepFunction::indicator(interval.left, interval.right)?;
                env.integrate_power_weight(e, &chi, en.tol)
            }
        }
        None => wp_minus_integral_sampled(sigma, phi_bar, p, interval, en.refinement),
    }
}

/// Relative change accepted between successive sampling levels.
pub const SAMPLING_GATE: f64 = 1e-3;

/// The sampled route for `∫_I M_Φ̄⁺(σ^{1/p}χ_I)^p`, usable for any `Φ̄`.
pub fn wp_minus_integral_sampled(
    sigma: &StepFunction,
    phi_bar: &YoungFunction,
    p: f64,
    interval: &Interval,
    refinement: usize,
) -> Result<f64> {
    let g = sigma.pow(1.0 / p).restrict(interval);
    let integrand = |x: f64| orlicz_mplus_with_tol(&g, phi_bar, x, refinement, 1e-12).powf(p);
    let composite = |n: usize| -> f64 {
        g.pieces()
            .map(|(a, b, _)| {
                let h = (b - a) / n as f64;
                (0..n).map(|k| gauss_legendre(&integrand, a + h * k as f64, a + h * (k + 1) as f64)).sum::<f64>()
            })
            .sum()
    };
    let mut n = 1;
    let mut prev = composite(n);
    let mut change = f64::INFINITY;
    while n < 64 {
        n *= 2;
        let next = composite(n);
        change = (next - prev).abs() / next.abs().max(f64::MIN_POSITIVE);
        prev = next;
        if change <= SAMPLING_GATE {
            return Ok(next);
        }
    }
    Err(Error::Refinement { estimate: prev, change })
}

/// `[w, σ, Φ]_{A_p^+} = sup (w(a,b)/(c−a)) ‖σ^{1/p'}χ_{(b,c)}‖_{Φ,(a,c)}^p`.
pub fn bump_ap_plus(
    en: &Enumeration,
    w: &StepFunction,
    sigma: &StepFunction,
    phi: &YoungFunction,
    p: f64,
) -> Result<WeightConstantReport> {
    check_inputs(sigma, p)?;
    phi.validate()?;
    let pp = p / (p - 1.0);
    let g = sigma.pow(1.0 / pp);
    let grid = en.grid(&[w, sigma]);
    let wm = PairTable::masses(en.exec, &grid, w);
    let best = match phi.is_power() {
        Some(r) => {
            // ‖gχ_{(b,c)}‖_{t^r,(a,c)} = (∫_b^c g^r / (c−a))^{1/r}
            let gr = g.pow(r);
            let gm = PairTable::masses(en.exec, &grid, &gr);
            max_over_triples(en.exec, &grid, Middles::All, |t| {
                let len = t.c - t.a;
                let (wl, gl) = match t.j {
                    Some(j) => (wm.get(t.i, j), gm.get(j, t.k)),
                    None => (w.integrate_between(t.a, t.b), gr.integrate_between(t.b, t.c)),
                };
                Some((wl / len) * (gl / len).powf(p / r))
            })
        }
        None => max_over_triples(en.exec, &grid, Middles::All, |t| {
            let wl = match t.j {
                Some(j) => wm.get(t.i, j),
                None => w.integrate_between(t.a, t.b),
            };
            let norm = luxemburg_solve(phi, &cells_on(&g, t.b, t.c), t.c - t.a, en.tol, None).norm;
            Some(wl / (t.c - t.a) * norm.powf(p))
        }),
    };
    let params = Parameters { p: Some(p), phi: Some(phi.id()), ..Default::default() };
    Ok(en.report(ConstantKind::BumpApPlus, best.map(|(v, t)| (v, Witness::Triple(t))), params))
}

/// The bump `A_p^+` functional at one triple, by the iterative solver.
pub fn bump_ap_plus_at(
    w: &StepFunction,
    sigma: &StepFunction,
    phi: &YoungFunction,
    p: f64,
    t: &Triple,
    tol: f64,
) -> f64 {
    let pp = p / (p - 1.0);
    let g = sigma.pow(1.0 / pp);
    let norm = luxemburg_cells(phi, &cells_on(&g, t.b, t.c), t.c - t.a, tol).norm;
    w.integrate_between(t.a, t.b) / (t.c - t.a) * norm.powf(p)
}

/// `(1/|I|)∫_I fg ≤ 2κ ‖f‖_{Φ,I} ‖g‖_{Φ̄,I}`.
pub fn holder_check(
    f: &StepFunction,
    g: &StepFunction,
    pair: &ConjugatePair,
    interval: &Interval,
    tol: f64,
) -> ClaimResult {
    let lhs = f.refine_with(g).into_iter().map(|(a, b, fv, gv)| fv * gv * interval.overlap(a, b)).sum::<f64>()
        / interval.length();
    let nf = luxemburg_norm(f, &pair.phi, interval, 1e-12).norm;
    let ng = luxemburg_norm(g, &pair.phi_bar, interval, 1e-12).norm;
    let instance =
        format!("phi={},phi_bar={},I=({},{})", pair.phi.id(), pair.phi_bar.id(), interval.left, interval.right);
    ClaimResult::new("holder", instance, lhs, 2.0 * pair.kappa * nf * ng, tol)
}
