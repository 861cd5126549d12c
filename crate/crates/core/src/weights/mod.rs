//! One-sided weight constants as maxima over explicit candidate sets.
//!
//! Every supremum over `a < b < c` (or over intervals) is reported as the
//! exact maximum over a grid made of the breakpoints plus `R` equal
//! subdivisions of each piece, together with the midpoint of every grid
//! pair. The result is a lower bound for the true supremum that never
//! decreases when `R` doubles.

pub mod forms;
mod grid;

pub use grid::{max_over_pairs, max_over_triples, Candidate, CandidateGrid, Middles, PairTable, Triple};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::maximal::Side;
use crate::stepfn::{Interval, StepFunction};

pub const DEFAULT_REFINEMENT: usize = 8;
pub const DEFAULT_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ConstantKind {
    #[serde(rename = "ap+")]
    ApPlus,
    #[serde(rename = "ap-")]
    ApMinus,
    #[serde(rename = "ainf+")]
    AinfPlus,
    #[serde(rename = "ainf-")]
    AinfMinus,
    #[serde(rename = "ap*")]
    ApStar,
    #[serde(rename = "apq*")]
    ApqStar,
    #[serde(rename = "ap*~")]
    ApStarTilde,
    #[serde(rename = "apq*~")]
    ApqStarTilde,
    #[serde(rename = "restricted-")]
    RestrictedMinus,
    #[serde(rename = "testing+")]
    TestingSplus,
    #[serde(rename = "bump-wp-")]
    BumpWpMinus,
    #[serde(rename = "bump-ap+")]
    BumpApPlus,
}

impl ConstantKind {
    pub const ALL: [ConstantKind; 12] = [
        ConstantKind::ApPlus,
        ConstantKind::ApMinus,
        ConstantKind::AinfPlus,
        ConstantKind::AinfMinus,
        ConstantKind::ApStar,
        ConstantKind::ApqStar,
        ConstantKind::ApStarTilde,
        ConstantKind::ApqStarTilde,
        ConstantKind::RestrictedMinus,
        ConstantKind::TestingSplus,
        ConstantKind::BumpWpMinus,
        ConstantKind::BumpApPlus,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ConstantKind::ApPlus => "ap+",
            ConstantKind::ApMinus => "ap-",
            ConstantKind::AinfPlus => "ainf+",
            ConstantKind::AinfMinus => "ainf-",
            ConstantKind::ApStar => "ap*",
            ConstantKind::ApqStar => "apq*",
            ConstantKind::ApStarTilde => "ap*~",
            ConstantKind::ApqStarTilde => "apq*~",
            ConstantKind::RestrictedMinus => "restricted-",
            ConstantKind::TestingSplus => "testing+",
            ConstantKind::BumpWpMinus => "bump-wp-",
            ConstantKind::BumpApPlus => "bump-ap+",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::Parse(format!("unknown constant kind {s:?}")))
    }
}

impl std::fmt::Display for ConstantKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Witness {
    Triple(Triple),
    Interval(Interval),
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Parameters {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub q: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub r: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub phi: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightConstantReport {
    pub kind: ConstantKind,
    pub value: f64,
    /// `None` when no candidate was admissible (the value is then 0).
    pub witness: Option<Witness>,
    pub refinement: usize,
    pub parameters: Parameters,
}

impl WeightConstantReport {
    pub fn triple(&self) -> Option<Triple> {
        match self.witness {
            Some(Witness::Triple(t)) => Some(t),
            _ => None,
        }
    }

    pub fn interval(&self) -> Option<Interval> {
        match self.witness {
            Some(Witness::Interval(i)) => Some(i),
            _ => None,
        }
    }
}

/// Grid refinement and execution mode shared by all constants.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Enumeration {
    pub refinement: usize,
    pub exec: Execution,
    /// Relative tolerance for any quadrature involved.
    pub tol: f64,
}

impl Default for Enumeration {
    fn default() -> Self {
        Self { refinement: DEFAULT_REFINEMENT, exec: Execution::default(), tol: DEFAULT_TOLERANCE }
    }
}

fn check_p(p: f64) -> Result<()> {
    if p > 1.0 && p.is_finite() {
        Ok(())
    } else {
        Err(Error::Parameter(format!("p must be a finite number > 1, got {p}")))
    }
}

impl Enumeration {
    pub fn new(refinement: usize) -> Self {
        Self { refinement, ..Self::default() }
    }

    pub fn with_exec(self, exec: Execution) -> Self {
        Self { exec, ..self }
    }

    pub fn grid(&self, fs: &[&StepFunction]) -> CandidateGrid {
        CandidateGrid::for_functions(fs, self.refinement)
    }

    pub fn report(
        &self,
        kind: ConstantKind,
        best: Option<(f64, Witness)>,
        parameters: Parameters,
    ) -> WeightConstantReport {
        let (value, witness) = match best {
            Some((v, w)) => (v, Some(w)),
            None => (0.0, None),
        };
        WeightConstantReport { kind, value, witness, refinement: self.refinement, parameters }
    }

    fn triples<F>(&self, grid: &CandidateGrid, middles: Middles, eval: F) -> Option<(f64, Witness)>
    where
        F: Fn(&Candidate) -> Option<f64> + Sync + Send,
    {
        max_over_triples(self.exec, grid, middles, eval).map(|(v, t)| (v, Witness::Triple(t)))
    }

    fn pairs<F>(&self, grid: &CandidateGrid, eval: F) -> Option<(f64, Witness)>
    where
        F: Fn(usize, usize, f64, f64) -> Option<f64> + Sync + Send,
    {
        max_over_pairs(self.exec, grid, eval).map(|(v, i)| (v, Witness::Interval(i)))
    }

    /// `[w]_{A_p^±}`.
    pub fn ap_oneside(&self, w: &StepFunction, p: f64, side: Side) -> Result<WeightConstantReport> {
        check_p(p)?;
        let sigma = w.dual_weight(p)?;
        let grid = self.grid(&[w]);
        let wm = PairTable::masses(self.exec, &grid, w);
        let sm = PairTable::masses(self.exec, &grid, &sigma);
        let best = self.triples(&grid, Middles::All, |t| {
            let len = t.c - t.a;
            let (left, right) = match t.j {
                Some(j) => match side {
                    Side::Plus => (wm.get(t.i, j), sm.get(j, t.k)),
                    Side::Minus => (wm.get(j, t.k), sm.get(t.i, j)),
                },
                None => match side {
                    Side::Plus => (w.integrate_between(t.a, t.b), sigma.integrate_between(t.b, t.c)),
                    Side::Minus => (w.integrate_between(t.b, t.c), sigma.integrate_between(t.a, t.b)),
                },
            };
            Some((left / len) * (right / len).powf(p - 1.0))
        });
        let kind = if side == Side::Plus { ConstantKind::ApPlus } else { ConstantKind::ApMinus };
        Ok(self.report(kind, best, Parameters { p: Some(p), ..Default::default() }))
    }

    /// `[w]_{A_∞^±}`; zero-mass intervals are skipped.
    pub fn ainf_oneside(&self, w: &StepFunction, side: Side) -> WeightConstantReport {
        let grid = self.grid(&[w]);
        let wm = PairTable::masses(self.exec, &grid, w);
        let best = self.pairs(&grid, |i, k, a, b| {
            let mass = wm.get(i, k);
            if !(mass > 0.0) {
                return None;
            }
            let interval = Interval { left: a, right: b };
            Some(crate::maximal::integrate_opposite_exact(w, &interval, side.opposite()) / mass)
        });
        let kind = if side == Side::Plus { ConstantKind::AinfPlus } else { ConstantKind::AinfMinus };
        self.report(kind, best, Parameters::default())
    }

    /// `[w]_{A_p^{+,*}}`, or its midpoint-only variant when `tilde`.
    pub fn ap_star(&self, w: &StepFunction, p: f64, tilde: bool) -> Result<WeightConstantReport> {
        check_p(p)?;
        let sigma = w.dual_weight(p)?;
        let grid = self.grid(&[w]);
        let sm = PairTable::masses(self.exec, &grid, &sigma);
        let g = grid.points();
        let weak =
            PairTable::build(self.exec, grid.len(), |i, k| w.weak_l1inf_on(&Interval { left: g[i], right: g[k] }));
        let middles = if tilde { Middles::MidpointOnly } else { Middles::All };
        let best = self.triples(&grid, middles, |t| {
            let (wk, s) = match t.j {
                Some(j) => (weak.get(t.i, j), sm.get(j, t.k)),
                None => (w.weak_l1inf_on(&Interval { left: t.a, right: t.b }), sigma.integrate_between(t.b, t.c)),
            };
            Some(wk * s.powf(p - 1.0) / (t.c - t.a).powf(p))
        });
        let kind = if tilde { ConstantKind::ApStarTilde } else { ConstantKind::ApStar };
        Ok(self.report(kind, best, Parameters { p: Some(p), ..Default::default() }))
    }

    /// `[w]_{A_{p,q}^{+,*}}` (exponent `1/p'` on the `w^{-p'}` average), or its
    /// midpoint-only variant when `tilde`.
    pub fn apq_star(&self, w: &StepFunction, p: f64, q: f64, tilde: bool) -> Result<WeightConstantReport> {
        check_p(p)?;
        if !(q >= p) || !q.is_finite() {
            return Err(Error::Parameter(format!("q must be finite and ≥ p, got q = {q}, p = {p}")));
        }
        let pp = p / (p - 1.0);
        let w_q = w.pow(q);
        let w_neg = w.negative_power(pp)?;
        let grid = self.grid(&[w]);
        let nm = PairTable::masses(self.exec, &grid, &w_neg);
        let g = grid.points();
        let weak =
            PairTable::build(self.exec, grid.len(), |i, k| w_q.weak_l1inf_on(&Interval { left: g[i], right: g[k] }));
        let middles = if tilde { Middles::MidpointOnly } else { Middles::All };
        let best = self.triples(&grid, middles, |t| {
            let len = t.c - t.a;
            let (wk, s) = match t.j {
                Some(j) => (weak.get(t.i, j), nm.get(j, t.k)),
                None => (w_q.weak_l1inf_on(&Interval { left: t.a, right: t.b }), w_neg.integrate_between(t.b, t.c)),
            };
            Some((wk / len).powf(1.0 / q) * (s / len).powf(1.0 / pp))
        });
        let kind = if tilde { ConstantKind::ApqStarTilde } else { ConstantKind::ApqStar };
        Ok(self.report(kind, best, Parameters { p: Some(p), q: Some(q), ..Default::default() }))
    }

    /// `[σ]_{A_r^{R,−}}`; triples with `σ(b,c) = 0` are skipped.
    pub fn restricted_minus(&self, sigma: &StepFunction, r: f64) -> Result<WeightConstantReport> {
        check_p(r)?;
        let grid = self.grid(&[sigma]);
        let sm = PairTable::masses(self.exec, &grid, sigma);
        let g = grid.points();
        let gain = PairTable::build(self.exec, grid.len(), |i, k| forms::lightest_subset_gain(sigma, g[i], g[k], r));
        let best = self.triples(&grid, Middles::All, |t| {
            let (e, s) = match t.j {
                Some(j) => (gain.get(t.i, j), sm.get(j, t.k)),
                None => (forms::lightest_subset_gain(sigma, t.a, t.b, r), sigma.integrate_between(t.b, t.c)),
            };
            (s > 0.0).then(|| e * s.powf(1.0 / r) / (t.c - t.a))
        });
        Ok(self.report(ConstantKind::RestrictedMinus, best, Parameters { r: Some(r), ..Default::default() }))
    }

    /// `sup_I (1/σ(I)) ∫_I M⁺(σχ_I)^p w` over grid intervals.
    pub fn testing_splus(&self, w: &StepFunction, sigma: &StepFunction, p: f64) -> Result<WeightConstantReport> {
        check_p(p)?;
        let grid = self.grid(&[w, sigma]);
        let sm = PairTable::masses(self.exec, &grid, sigma);
        let failure = std::sync::Mutex::new(None);
        let best = self.pairs(&grid, |i, k, a, b| {
            if !(sm.get(i, k) > 0.0) {
                return None;
            }
            match forms::testing(w, sigma, p, &Interval { left: a, right: b }, self.tol) {
                Ok(v) => v,
                Err(e) => {
                    failure.lock().unwrap().get_or_insert(e);
                    None
                }
            }
        });
        if let Some(e) = failure.into_inner().unwrap() {
            return Err(e);
        }
        Ok(self.report(ConstantKind::TestingSplus, best, Parameters { p: Some(p), ..Default::default() }))
    }
}

/// `[w]_{A_p^±}` at refinement `R`.
pub fn ap_oneside(w: &StepFunction, p: f64, side: Side, refinement: usize) -> Result<WeightConstantReport> {
    Enumeration::new(refinement).ap_oneside(w, p, side)
}

/// `[w]_{A_∞^±}` at refinement `R`.
pub fn ainf_oneside(w: &StepFunction, side: Side, refinement: usize) -> WeightConstantReport {
    Enumeration::new(refinement).ainf_oneside(w, side)
}

pub fn ap_star(w: &StepFunction, p: f64, refinement: usize, tilde: bool) -> Result<WeightConstantReport> {
    Enumeration::new(refinement).ap_star(w, p, tilde)
}

pub fn apq_star(w: &StepFunction, p: f64, q: f64, refinement: usize, tilde: bool) -> Result<WeightConstantReport> {
    Enumeration::new(refinement).apq_star(w, p, q, tilde)
}

pub fn restricted_minus(sigma: &StepFunction, r: f64, refinement: usize) -> Result<WeightConstantReport> {
    Enumeration::new(refinement).restricted_minus(sigma, r)
}

pub fn testing_splus(
    w: &StepFunction,
    sigma: &StepFunction,
    p: f64,
    refinement: usize,
) -> Result<WeightConstantReport> {
    Enumeration::new(refinement).testing_splus(w, sigma, p)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn one() -> StepFunction {
        StepFunction::constant(0.0, 1.0, 1.0).unwrap()
    }

    #[test]
    fn constant_weight_values() {
        for p in [1.5, 2.0, 3.0] {
            let r = ap_oneside(&one(), p, Side::Plus, 8).unwrap();
            let closed = (p - 1.0f64).powf(p - 1.0) / p.powf(p);
            assert_relative_eq!(r.value, closed, max_relative = 1e-12);
            let star = ap_star(&one(), p, 8, false).unwrap();
            assert_relative_eq!(star.value, closed, max_relative = 1e-12);
        }
        assert_relative_eq!(restricted_minus(&one(), 2.0, 8).unwrap().value, 0.5, max_relative = 1e-12);
        assert_relative_eq!(ainf_oneside(&one(), Side::Plus, 8).value, 1.0, max_relative = 1e-12);
        let t = testing_splus(&one(), &one(), 2.0, 4).unwrap();
        assert_relative_eq!(t.value, 1.0, max_relative = 1e-12);
    }

    #[test]
    fn scaling_invariance() {
        let w = StepFunction::new(vec![0.0, 0.4, 1.0, 2.5], vec![3.0, 0.5, 7.0]).unwrap();
        let w5 = w.scale(5.0).unwrap();
        for side in [Side::Plus, Side::Minus] {
            let a = ap_oneside(&w, 2.5, side, 4).unwrap().value;
            let b = ap_oneside(&w5, 2.5, side, 4).unwrap().value;
            assert_relative_eq!(a, b, max_relative = 1e-12);
        }
    }

    #[test]
    fn witnesses_reproduce() {
        let w = StepFunction::new(vec![0.0, 0.4, 1.0, 2.5], vec![3.0, 0.5, 7.0]).unwrap();
        let p = 2.0;
        let sigma = w.dual_weight(p).unwrap();
        let r = ap_oneside(&w, p, Side::Plus, 4).unwrap();
        assert_relative_eq!(forms::ap(&w, &sigma, p, Side::Plus, &r.triple().unwrap()), r.value, max_relative = 1e-12);
        let r = ap_star(&w, p, 4, false).unwrap();
        assert_relative_eq!(forms::ap_star(&w, &sigma, p, &r.triple().unwrap()), r.value, max_relative = 1e-12);
    }

    #[test]
    fn kind_names_round_trip() {
        for k in ConstantKind::ALL {
            assert_eq!(ConstantKind::parse(k.name()).unwrap(), k);
            assert_eq!(serde_json::to_string(&k).unwrap(), format!("\"{}\"", k.name()));
        }
        assert!(ConstantKind::parse("ap").is_err());
    }
}
