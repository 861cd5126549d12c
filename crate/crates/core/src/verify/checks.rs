//! Inequalities checked instance by instance.

use serde::{Deserialize, Serialize};

use super::claim::ClaimResult;
use super::weak::{frac_weak_norm, weak_norm_sampled, weak_norm_tgrid};
use crate::error::{Error, Result};
use crate::maximal::{compile_envelope, malpha_at, mplus_at, FractionalParams, Side};
use crate::orlicz::{bump_ap_plus, bump_wp_minus, ConjugatePair};
use crate::stepfn::{lp_norm, Interval, StepFunction};
use crate::weights::{Enumeration, Triple};

/// Multiplicative constants of the inequalities whose constants are not
/// explicit. Measured as corpus maxima and frozen; see [`FROZEN`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Constants {
    pub strong: f64,
    pub strong_mixed: f64,
    pub mixed_sufficiency: f64,
    pub frac_sufficiency: f64,
    pub two_weight: f64,
    pub two_weight_testing: f64,
}

/// Frozen regression constants: the maximal ratio over the frozen corpus,
/// times 1.05.
pub const FROZEN: Constants = Constants {
    strong: 6.1286,
    strong_mixed: 3.0643,
    mixed_sufficiency: 4.2,
    frac_sufficiency: 2.3098,
    two_weight: 3.0643,
    two_weight_testing: 4.2,
};

impl Constants {
    /// All constants equal to one, so that every ratio is the raw quotient.
    pub const UNIT: Constants = Constants {
        strong: 1.0,
        strong_mixed: 1.0,
        mixed_sufficiency: 1.0,
        frac_sufficiency: 1.0,
        two_weight: 1.0,
        two_weight_testing: 1.0,
    };
}

/// Points per cell when sampling `M_α f`.
pub const FRAC_CELLS: usize = 256;
/// Samples for the independent weak-norm route.
pub const WEAK_SAMPLES: usize = 1 << 16;
/// Agreement required between the two weak-norm routes.
pub const WEAK_CONSISTENCY: f64 = 0.01;
/// Agreement required in the `α → 0` probe.
pub const ALPHA_LIMIT_TOLERANCE: f64 = 0.02;
/// `α` used by the `α → 0` probe.
pub const ALPHA_PROBE: f64 = 1e-3;
/// Points where pointwise inequalities are sampled.
pub const POINTWISE_SAMPLES: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Checker {
    pub en: Enumeration,
    /// Relative tolerance of every inequality.
    pub claim_tol: f64,
    /// Relative tolerance of quadratures.
    pub quad_tol: f64,
    pub constants: Constants,
}

impl Default for Checker {
    fn default() -> Self {
        Self { en: Enumeration::default(), claim_tol: 1e-9, quad_tol: 1e-8, constants: FROZEN }
    }
}

/// `f·g` on the union of both supports.
pub fn product(f: &StepFunction, g: &StepFunction) -> Result<StepFunction> {
    let cells = f.refine_with(g);
    let mut t = vec![cells[0].0];
    t.extend(cells.iter().map(|c| c.1));
    StepFunction::new(t, cells.iter().map(|c| c.2 * c.3).collect())
}

/// `n` equispaced midpoints of `(lo, hi)`.
fn midpoints(lo: f64, hi: f64, n: usize) -> impl Iterator<Item = f64> {
    let h = (hi - lo) / n as f64;
    (0..n).map(move |i| lo + (i as f64 + 0.5) * h)
}

/// `(a, h)` windows for the extremal family `σχ_(a, a+h)`: the midpoint
/// triple `(a − h, a, a + h)` of the reported witness and of every pair of
/// breakpoints of `w`.
fn extremal_windows(w: &StepFunction, witness: Option<Triple>) -> Vec<(f64, f64)> {
    let mut out: Vec<(f64, f64)> = witness.map(|t| (t.b, t.c - t.b)).into_iter().collect();
    let t = w.breakpoints();
    for i in 0..t.len() {
        for k in i + 1..t.len() {
            let h = 0.5 * (t[k] - t[i]);
            out.push((t[i] + h, h));
        }
    }
    out
}

fn worst(claims: impl IntoIterator<Item = ClaimResult>) -> Option<ClaimResult> {
    claims.into_iter().fold(None, |acc: Option<ClaimResult>, c| match acc {
        Some(a) if a.slack() / a.rhs.abs().max(f64::MIN_POSITIVE) <= c.slack() / c.rhs.abs().max(f64::MIN_POSITIVE) => {
            Some(a)
        }
        _ => Some(c),
    })
}

impl Checker {
    pub fn with_constants(self, constants: Constants) -> Self {
        Self { constants, ..self }
    }

    /// `‖M⁺f‖_{L^p(w)}` against `C₁[w]_{A_p^+}^{1/(p−1)}‖f‖_{L^p(w)}` and
    /// `C₂([w]_{A_p^+}[σ]_{A_∞^-})^{1/p}‖f‖_{L^p(w)}`.
    pub fn strong(&self, label: &str, w: &StepFunction, f: &StepFunction, p: f64) -> Result<Vec<ClaimResult>> {
        let env = compile_envelope(f, Side::Plus);
        let lhs = env.integrate_power_weight(p, w, self.quad_tol)?.powf(1.0 / p);
        let norm = lp_norm(f, w, p);
        let ap = self.en.ap_oneside(w, p, Side::Plus)?.value;
        let sigma = w.dual_weight(p)?;
        let ainf = self.en.ainf_oneside(&sigma, Side::Minus).value;
        let c = &self.constants;
        Ok(vec![
            ClaimResult::new("strong-type", label, lhs, c.strong * ap.powf(1.0 / (p - 1.0)) * norm, self.claim_tol),
            ClaimResult::new(
                "strong-type-mixed-constant",
                label,
                lhs,
                c.strong_mixed * (ap * ainf).powf(1.0 / p) * norm,
                self.claim_tol,
            ),
        ])
    }

    /// Weak-type sufficiency for `f`, agreement of the two weak-norm routes,
    /// the pointwise lower bound behind the necessity proof, and the
    /// necessity gate `K ≥ [w]_{A_p^{+,*}}^{1/p}/4`.
    pub fn mixed(&self, label: &str, w: &StepFunction, f: &StepFunction, p: f64) -> Result<Vec<ClaimResult>> {
        let star = self.en.ap_star(w, p, false)?.value;
        let tilde = self.en.ap_star(w, p, true)?;
        let sigma = w.dual_weight(p)?;

        let env = compile_envelope(f, Side::Plus);
        let lhs = weak_norm_tgrid(&env, w, p)?;
        let rhs = self.constants.mixed_sufficiency * star.powf(2.0 / p) * lp_norm(f, w, p);
        let sufficiency = ClaimResult::new("mixed-sufficiency", label, lhs, rhs, self.claim_tol);

        let sampled = weak_norm_sampled(&env, w, p, WEAK_SAMPLES);
        let gap = if lhs > 0.0 { (sampled - lhs).abs() / lhs } else { sampled };
        let consistency = ClaimResult::new("weak-norm-consistency", label, gap, WEAK_CONSISTENCY, 0.0);

        let windows = extremal_windows(w, tilde.triple());
        let mut k_max: f64 = 0.0;
        let mut pointwise = None;
        for (idx, &(a, h)) in windows.iter().enumerate() {
            let g = sigma.restrict(&Interval::new(a, a + h)?);
            let genv = compile_envelope(&g, Side::Plus);
            let k = weak_norm_tgrid(&genv, w, p)? / lp_norm(&g, w, p);
            k_max = k_max.max(k);
            if idx == 0 {
                let bound = g.total_mass() / (2.0 * h);
                pointwise = worst(midpoints(a - h, a, POINTWISE_SAMPLES).map(|x| {
                    ClaimResult::new(
                        "mixed-necessity-pointwise",
                        format!("{label};x={x}"),
                        bound,
                        genv.value_at(x),
                        self.claim_tol,
                    )
                }));
            }
        }
        let necessity = ClaimResult::new("mixed-necessity", label, star.powf(1.0 / p) / 4.0, k_max, self.claim_tol);
        let mut out = vec![sufficiency, consistency, necessity];
        out.extend(pointwise);
        Ok(out)
    }

    /// The reduction inequality at sampled points, the exponent identities,
    /// weak-type sufficiency and the necessity gate
    /// `K ≥ [w]_{A_{p,q}^{+,*}} / 2^{1+1/p'+1/q}`.
    pub fn mixed_frac(
        &self,
        label: &str,
        w: &StepFunction,
        f: &StepFunction,
        fp: &FractionalParams,
    ) -> Result<Vec<ClaimResult>> {
        let FractionalParams { alpha, p, q } = *fp;
        if !(alpha > 0.0) || !(p > 1.0) {
            return Err(Error::Parameter(format!("need 0 < α and p > 1, got α = {alpha}, p = {p}")));
        }
        let pp = p / (p - 1.0);
        let s = 1.0 + q / pp;
        let identity_gap = ((s / p + alpha - 1.0) / alpha - s).abs() / s + ((1.0 - alpha) - s / q).abs();
        let exponents = ClaimResult::new("fractional-exponents", label, identity_gap, 1e-12, 0.0);

        // f = g^{s/p} w^{q/p − 1} with g = f^{p/s} w^{p/s − q/s}
        let wp = w.pow(p);
        let fw_norm = lp_norm(f, &wp, p);
        let g = {
            let cells = f.refine_with(w);
            let mut t = vec![cells[0].0];
            t.extend(cells.iter().map(|c| c.1));
            let vals = cells
                .iter()
                .map(|&(_, _, fv, wv)| if fv == 0.0 { 0.0 } else { fv.powf(p / s) * wv.powf((p - q) / s) })
                .collect();
            StepFunction::new(t, vals)?
        };
        let scale = fw_norm.powf(p * alpha);
        let sup = w.support();
        let reduction = worst(midpoints(sup.left - 0.5 * sup.length(), sup.right, POINTWISE_SAMPLES).map(|x| {
            let lhs = malpha_at(f, fp, x, Side::Plus);
            let rhs = mplus_at(&g, x, Side::Plus).powf(s / q) * scale;
            ClaimResult::new("fractional-reduction", format!("{label};x={x}"), lhs, rhs, self.claim_tol)
        }))
        .expect("at least one sample");

        let star = self.en.apq_star(w, p, q, false)?.value;
        let tilde = self.en.apq_star(w, p, q, true)?;
        let lhs = frac_weak_norm(f, w, fp, Side::Plus, &[], FRAC_CELLS);
        let rhs = self.constants.frac_sufficiency * star * star * fw_norm;
        let sufficiency = ClaimResult::new("fractional-sufficiency", label, lhs, rhs, self.claim_tol);

        let sigma = w.negative_power(pp)?;
        let mut k_max: f64 = 0.0;
        for (a, h) in extremal_windows(w, tilde.triple()) {
            let g = sigma.restrict(&Interval::new(a, a + h)?);
            let k = frac_weak_norm(&g, w, fp, Side::Plus, &[a - h, a, a + h], FRAC_CELLS) / lp_norm(&g, &wp, p);
            k_max = k_max.max(k);
        }
        let factor = 2f64.powf(1.0 + 1.0 / pp + 1.0 / q);
        let necessity = ClaimResult::new("fractional-necessity", label, star / factor, k_max, self.claim_tol);
        Ok(vec![exponents, reduction, sufficiency, necessity])
    }

    /// `α → 0` probe: the fractional weak norm and constant at `α = 10^{-3}`
    /// against their `α = 0` counterparts for the weight `w^p`.
    pub fn fractional_limit(&self, label: &str, w: &StepFunction, f: &StepFunction, p: f64) -> Result<ClaimResult> {
        let fp = FractionalParams::from_alpha_p(ALPHA_PROBE, p)?;
        let wp = w.pow(p);
        let frac = frac_weak_norm(f, w, &fp, Side::Plus, &[], FRAC_CELLS);
        let mixed = weak_norm_tgrid(&compile_envelope(f, Side::Plus), &wp, p)?;
        let apq = self.en.apq_star(w, p, fp.q, false)?.value;
        let ap = self.en.ap_star(&wp, p, false)?.value.powf(1.0 / p);
        let rel = |a: f64, b: f64| if b > 0.0 { (a - b).abs() / b } else { a.abs() };
        let gap = rel(frac, mixed).max(rel(apq, ap));
        Ok(ClaimResult::new("fractional-limit", label, gap, ALPHA_LIMIT_TOLERANCE, 0.0))
    }

    /// `‖M⁺(fσ)‖_{L^p(w)} ≤ C([σ,Φ̄]_{W_p^-}[w,σ,Φ]_{A_p^+})^{1/p}‖f‖_{L^p(σ)}`
    /// and the testing constant against the bump product.
    pub fn two_weight(
        &self,
        label: &str,
        w: &StepFunction,
        sigma: &StepFunction,
        pair: &ConjugatePair,
        p: f64,
        f: &StepFunction,
    ) -> Result<Vec<ClaimResult>> {
        let wp_minus = bump_wp_minus(&self.en, sigma, &pair.phi_bar, p)?.value;
        let ap_plus = bump_ap_plus(&self.en, w, sigma, &pair.phi, p)?.value;
        let bump = wp_minus * ap_plus;
        let env = compile_envelope(&product(f, sigma)?, Side::Plus);
        let lhs = env.integrate_power_weight(p, w, self.quad_tol)?.powf(1.0 / p);
        let rhs = self.constants.two_weight * bump.powf(1.0 / p) * lp_norm(f, sigma, p);
        let testing = self.en.testing_splus(w, sigma, p)?.value;
        let label = format!("{label};phi={}", pair.phi.id());
        Ok(vec![
            ClaimResult::new("two-weight", label.clone(), lhs, rhs, self.claim_tol),
            ClaimResult::new(
                "two-weight-testing",
                label,
                testing,
                self.constants.two_weight_testing * bump,
                self.claim_tol,
            ),
        ])
    }

    /// With the power pair and `σ = w^{-1/(p−1)}` the bump product equals
    /// `[σ]_{A_∞^-}[w]_{A_p^+}`; the claim is the relative gap against `1e-8`.
    pub fn power_identity(&self, label: &str, w: &StepFunction, p: f64) -> Result<ClaimResult> {
        let sigma = w.dual_weight(p)?;
        let pair = ConjugatePair::power(p)?;
        let bump = bump_wp_minus(&self.en, &sigma, &pair.phi_bar, p)?.value
            * bump_ap_plus(&self.en, w, &sigma, &pair.phi, p)?.value;
        let mixed = self.en.ainf_oneside(&sigma, Side::Minus).value * self.en.ap_oneside(w, p, Side::Plus)?.value;
        let gap = (bump - mixed).abs() / mixed;
        Ok(ClaimResult::new("power-bump-identity", label, gap, 1e-8, 0.0))
    }

    /// Comparisons between weight constants with explicit factors.
    pub fn weight_lemmas(&self, label: &str, w: &StepFunction, p: f64, q: f64) -> Result<Vec<ClaimResult>> {
        let en = &self.en;
        let tol = self.claim_tol;
        let pp = p / (p - 1.0);
        let sigma = w.dual_weight(p)?;
        let mut out = Vec::new();

        let restricted = en.restricted_minus(&sigma, pp)?.value;
        let ap_minus = en.ap_oneside(&sigma, pp, Side::Minus)?.value;
        out.push(ClaimResult::new("restricted-vs-ap", label, restricted, ap_minus.powf(1.0 / pp), tol));

        let star = en.ap_star(w, p, false)?.value;
        let tilde = en.ap_star(w, p, true)?.value;
        for s in [2.0, 3.0] {
            let root = en.ap_oneside(&w.pow(1.0 / s), p, Side::Plus)?.value;
            let sp = s / (s - 1.0);
            let rhs = 2f64.powf(p) * sp * star.powf(1.0 / s);
            out.push(ClaimResult::new("root-weight-ap", format!("{label};s={s}"), root, rhs, tol));
        }
        let r2 = en.restricted_minus(&sigma, 2.0 * pp)?.value;
        out.push(ClaimResult::new("restricted-vs-ap-star", label, r2, 8.0 * star.powf(1.0 / (2.0 * pp)), tol));

        out.push(ClaimResult::new("ap-star-midpoint-lower", label, tilde, star, tol));
        out.push(ClaimResult::new("ap-star-midpoint-upper", label, star, 2f64.powf(p) * tilde, tol));

        let apq = en.apq_star(w, p, q, false)?.value;
        let apq_tilde = en.apq_star(w, p, q, true)?.value;
        out.push(ClaimResult::new("apq-star-midpoint-lower", label, apq_tilde, apq, tol));
        let factor = 2f64.powf(1.0 / pp + 1.0 / q);
        out.push(ClaimResult::new("apq-star-midpoint-upper", label, apq, factor * apq_tilde, tol));

        let s = 1.0 + q / pp;
        let via_s = en.ap_star(&w.pow(q), s, false)?.value.powf(1.0 / q);
        let gap = (apq - via_s).abs() / apq;
        out.push(ClaimResult::new("apq-as-ap-star", label, gap, 1e-9, 0.0));
        Ok(out)
    }
}

/// [`Checker::strong`] with default settings and claim tolerance `tol`.
pub fn check_strong(w: &StepFunction, f: &StepFunction, p: f64, tol: f64) -> Result<Vec<ClaimResult>> {
    Checker { claim_tol: tol, ..Checker::default() }.strong(&format!("p={p}"), w, f, p)
}

/// [`Checker::mixed`] with default settings and claim tolerance `tol`.
pub fn check_mixed(w: &StepFunction, f: &StepFunction, p: f64, tol: f64) -> Result<Vec<ClaimResult>> {
    Checker { claim_tol: tol, ..Checker::default() }.mixed(&format!("p={p}"), w, f, p)
}

/// [`Checker::mixed_frac`] with default settings and claim tolerance `tol`.
pub fn check_mixed_frac(
    w: &StepFunction,
    f: &StepFunction,
    p: f64,
    q: f64,
    alpha: f64,
    tol: f64,
) -> Result<Vec<ClaimResult>> {
    let fp = FractionalParams::new(alpha, p, q)?;
    Checker { claim_tol: tol, ..Checker::default() }.mixed_frac(&format!("p={p};q={q};alpha={alpha}"), w, f, &fp)
}

/// [`Checker::two_weight`] with default settings and claim tolerance `tol`.
pub fn check_2w(
    w: &StepFunction,
    sigma: &StepFunction,
    pair: &ConjugatePair,
    p: f64,
    f: &StepFunction,
    tol: f64,
) -> Result<Vec<ClaimResult>> {
    Checker { claim_tol: tol, ..Checker::default() }.two_weight(&format!("p={p}"), w, sigma, pair, p, f)
}
