//! Level sets of `M⁺f` and the layered sets built from them.
//!
//! For `λ > 1`, `O_k = {M⁺f > λ^k}` splits into disjoint open components
//! `I_{j,k}`; `E_{j,k} = I_{j,k} \ O_{k+1}` and `F_k = ℝ \ O_{k+2}`. Each
//! component also carries its σ-halving chain and the left-most points of
//! `E_{j,k}` between consecutive chain points.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::maximal::{compile_envelope, Envelope, Side};
use crate::stepfn::{HalvingChain, Interval, IntervalSet, StepFunction};
use crate::verify::ClaimResult;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevelComponents {
    pub level: i32,
    pub lambda: f64,
    pub threshold: f64,
    pub intervals: Vec<Interval>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComponentRecord {
    pub interval: Interval,
    /// `E_{j,k}`
    pub e_set: IntervalSet,
    /// `None` when σ has no mass on the component.
    pub halving: Option<HalvingChain>,
    /// `x̃_i = inf E_{j,k} ∩ (x_i, x_{i+1})`, `None` when that part is empty.
    pub x_tilde: Vec<Option<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevelRecord {
    pub level: i32,
    pub threshold: f64,
    pub components: Vec<ComponentRecord>,
    /// `F_k = {M⁺f ≤ λ^{k+2}}`
    pub f_set: IntervalSet,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecompTranscript {
    pub lambda: f64,
    /// Inclusive level range; `None` when `f ≡ 0`.
    pub k_range: Option<(i32, i32)>,
    pub levels: Vec<LevelRecord>,
}

fn check_lambda(lambda: f64) -> Result<()> {
    if lambda > 1.0 && lambda.is_finite() {
        Ok(())
    } else {
        Err(Error::Parameter(format!("λ must be a finite number > 1, got {lambda}")))
    }
}

fn components_of(set: &IntervalSet) -> Vec<Interval> {
    set.spans().iter().map(|&(a, b)| Interval { left: a, right: b }).collect()
}

/// The components of `{M⁺f > λ^k}`.
pub fn level_components(f: &StepFunction, lambda: f64, k: i32) -> Result<LevelComponents> {
    check_lambda(lambda)?;
    let env = compile_envelope(f, Side::Plus);
    Ok(level_components_of(&env, lambda, k))
}

pub fn level_components_of(env: &Envelope, lambda: f64, k: i32) -> LevelComponents {
    let threshold = lambda.powi(k);
    LevelComponents { level: k, lambda, threshold, intervals: components_of(&env.superlevel(threshold)) }
}

/// The levels on which `M⁺f` actually varies over the support of `f`:
/// from the largest `k` with `λ^k` strictly below the least positive value
/// (so `O_k` captures it even when it is an exact power of `λ`) up to
/// `⌈log_λ max⌉`.
pub fn natural_k_range(env: &Envelope, lambda: f64) -> Option<(i32, i32)> {
    let s = env.source().support();
    let min = env.min_positive_within(s.left, s.right)?;
    let max = env.max_value();
    let ln = lambda.ln();
    Some(((min.ln() / ln).ceil() as i32 - 1, (max.ln() / ln).ceil() as i32))
}

/// Builds every level in `k_range` (clipped to the natural range).
pub fn build_transcript(
    f: &StepFunction,
    lambda: f64,
    k_range: Option<(i32, i32)>,
    sigma: &StepFunction,
    halving_depth: usize,
) -> Result<DecompTranscript> {
    check_lambda(lambda)?;
    let env = compile_envelope(f, Side::Plus);
    let natural = natural_k_range(&env, lambda);
    let range = match (natural, k_range) {
        (Some((lo, hi)), Some((a, b))) => Some((lo.max(a), hi.min(b))).filter(|(l, h)| l <= h),
        (n, _) => n,
    };
    let mut levels = Vec::new();
    if let Some((lo, hi)) = range {
        for k in lo..=hi {
            levels.push(build_level(&env, lambda, k, sigma, halving_depth));
        }
    }
    Ok(DecompTranscript { lambda, k_range: range, levels })
}

fn build_level(env: &Envelope, lambda: f64, k: i32, sigma: &StepFunction, depth: usize) -> LevelRecord {
    let threshold = lambda.powi(k);
    let o_k = env.superlevel(threshold);
    let o_next = env.superlevel(lambda.powi(k + 1));
    let f_set = env.superlevel(lambda.powi(k + 2)).complement();
    let components = components_of(&o_k)
        .into_iter()
        .map(|interval| {
            let e_set = IntervalSet::from_spans([(interval.left, interval.right)]).difference(&o_next);
            let halving = sigma.halving_chain(&interval, depth).ok();
            let x_tilde = match &halving {
                Some(chain) => chain.points.windows(2).map(|w| e_set.infimum_within(w[0], w[1])).collect(),
                None => Vec::new(),
            };
            ComponentRecord { interval, e_set, halving, x_tilde }
        })
        .collect();
    LevelRecord { level: k, threshold, components, f_set }
}

impl DecompTranscript {
    /// `Σ_{j,k} |E_{j,k}|`.
    pub fn total_e_measure(&self) -> f64 {
        self.levels.iter().flat_map(|l| l.components.iter()).map(|c| c.e_set.measure()).sum()
    }

    /// All `E_{j,k}` with their level.
    pub fn e_sets(&self) -> impl Iterator<Item = (i32, &IntervalSet)> + '_ {
        self.levels.iter().flat_map(|l| l.components.iter().map(move |c| (l.level, &c.e_set)))
    }
}

/// `|F ∩ (x,y)| ≥ (1 − λ₁/λ₂)|(x,y)|` with `F = {M⁺f ≤ λ₂}`, for every `y`.
///
/// Reports the `y` with the least relative headroom.
pub fn verify_key_lemma(
    f: &StepFunction,
    lambda1: f64,
    lambda2: f64,
    x: f64,
    ys: &[f64],
    tol: f64,
) -> Result<ClaimResult> {
    let env = compile_envelope(f, Side::Plus);
    verify_key_lemma_with(&env, lambda1, lambda2, x, ys, tol)
}

pub fn verify_key_lemma_with(
    env: &Envelope,
    lambda1: f64,
    lambda2: f64,
    x: f64,
    ys: &[f64],
    tol: f64,
) -> Result<ClaimResult> {
    if !(lambda2 > lambda1 && lambda1 > 0.0) {
        return Err(Error::Parameter(format!("need λ₂ > λ₁ > 0, got λ₁ = {lambda1}, λ₂ = {lambda2}")));
    }
    let mx = env.value_at(x);
    if mx > lambda1 {
        return Err(Error::Precondition(format!("x is not a λ1-point: M⁺f({x}) = {mx} > {lambda1}")));
    }
    let o = env.superlevel(lambda2);
    let factor = 1.0 - lambda1 / lambda2;
    let mut worst: Option<ClaimResult> = None;
    for &y in ys.iter().filter(|&&y| y > x) {
        let len = y - x;
        let lhs = factor * len;
        let rhs = len - o.measure_within(x, y);
        let claim = ClaimResult::new("key-lemma", format!("x={x},y={y},l1={lambda1},l2={lambda2}"), lhs, rhs, tol);
        let rel = claim.slack() / len;
        if worst.as_ref().map_or(true, |w| rel < w.slack() / (w.lhs / factor)) {
            worst = Some(claim);
        }
    }
    Ok(worst.unwrap_or_else(|| ClaimResult::new("key-lemma", format!("x={x},no y"), 0.0, 0.0, tol)))
}

/// Ratio report for the restricted-weak-type transfer of sparseness.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RwtypeReport {
    /// `max_z σ(a₀,z) / σ(A ∩ (a₀,z))`
    pub worst_ratio: f64,
    pub worst_z: f64,
    /// `([σ]_{A_r^{R,−}} / η)^r`
    pub bound_shape: f64,
    /// `worst_ratio ≤ gate · bound_shape`
    pub claim: ClaimResult,
}

/// Checks `σ(a₀,z) ≤ gate·([σ]_{A_r^{R,−}}/η)^r σ(A∩(a₀,z))` at every `z`.
///
/// The constant in front is not explicit, so `gate` is the caller's
/// reporting threshold.
#[allow(clippy::too_many_arguments)]
pub fn verify_rwtype(
    sigma: &StepFunction,
    a: &IntervalSet,
    a0: f64,
    eta: f64,
    r: f64,
    zs: &[f64],
    restricted_constant: f64,
    gate: f64,
) -> Result<RwtypeReport> {
    if !(eta > 0.0 && eta < 1.0) {
        return Err(Error::Parameter(format!("η must lie in (0, 1), got {eta}")));
    }
    let mut worst = (0.0f64, a0);
    for &z in zs.iter().filter(|&&z| z > a0) {
        let inside = a.intersect_span(a0, z);
        if !(inside.measure() > eta * (z - a0)) {
            return Err(Error::Precondition(format!(
                "|A ∩ ({a0},{z})| = {} is not above η|(a0,z)| = {}",
                inside.measure(),
                eta * (z - a0)
            )));
        }
        let num = sigma.integrate_between(a0, z);
        let den: f64 = inside.spans().iter().map(|&(s, e)| sigma.integrate_between(s, e)).sum();
        let ratio = if num == 0.0 { 0.0 } else { num / den };
        if ratio > worst.0 {
            worst = (ratio, z);
        }
    }
    let bound_shape = (restricted_constant / eta).powf(r);
    let claim = ClaimResult::new(
        "restricted-weak-type",
        format!("a0={a0},eta={eta},r={r},z={}", worst.1),
        worst.0,
        gate * bound_shape,
        0.0,
    );
    Ok(RwtypeReport { worst_ratio: worst.0, worst_z: worst.1, bound_shape, claim })
}
