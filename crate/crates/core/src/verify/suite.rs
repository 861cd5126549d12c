//! Batch verification of a corpus, one suite of inequalities at a time.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::checks::{Checker, Constants, FROZEN};
use super::claim::ClaimResult;
use super::corpus::Instance;
use crate::error::{Error, Result};
use crate::exec::{map_slice, Execution};
use crate::maximal::FractionalParams;
use crate::orlicz::ConjugatePair;
use crate::weights::{Enumeration, DEFAULT_REFINEMENT};

/// Exponents of the strong-type suite.
pub const STRONG_P: [f64; 2] = [2.0, 3.0];
/// Exponents of the weak-type suite.
pub const MIXED_P: [f64; 2] = [2.0, 3.0];
/// `(p, q)` pairs for the weight-constant comparisons.
pub const LEMMA_PQ: [(f64, f64); 2] = [(2.0, 4.0), (3.0, 6.0)];
/// `(α, p)` pairs of the fractional suite.
pub const FRAC_ALPHA_P: [(f64, f64); 2] = [(0.25, 2.0), (0.5, 4.0 / 3.0)];
/// Exponent of the two-weight suite.
pub const TWO_WEIGHT_P: f64 = 2.0;
/// Log-bump parameters `(r, δ)` paired with the partner weight.
pub const LOG_BUMP: (f64, f64) = (2.0, 0.5);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Suite {
    All,
    Strong,
    Mixed,
    Frac,
    #[serde(rename = "2w")]
    TwoWeight,
}

impl FromStr for Suite {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "all" => Ok(Suite::All),
            "strong" => Ok(Suite::Strong),
            "mixed" => Ok(Suite::Mixed),
            "frac" => Ok(Suite::Frac),
            "2w" => Ok(Suite::TwoWeight),
            _ => Err(Error::Parameter(format!("unknown suite {s:?}; expected all, strong, mixed, frac or 2w"))),
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Suite::All => "all",
            Suite::Strong => "strong",
            Suite::Mixed => "mixed",
            Suite::Frac => "frac",
            Suite::TwoWeight => "2w",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SuiteConfig {
    pub refinement: usize,
    pub claim_tol: f64,
    pub quad_tol: f64,
    pub bisection_tol: f64,
    pub constants: Constants,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        Self {
            refinement: DEFAULT_REFINEMENT,
            claim_tol: 1e-9,
            quad_tol: 1e-8,
            bisection_tol: 1e-10,
            constants: FROZEN,
        }
    }
}

impl SuiteConfig {
    pub fn validate(&self) -> Result<()> {
        if self.refinement == 0 {
            return Err(Error::Parameter("refinement must be at least 1".into()));
        }
        for (name, t) in [("claim", self.claim_tol), ("quadrature", self.quad_tol), ("bisection", self.bisection_tol)] {
            if !(t > 0.0 && t.is_finite()) {
                return Err(Error::Parameter(format!("{name} tolerance must be positive, got {t}")));
            }
        }
        Ok(())
    }

    fn checker(&self, exec: Execution) -> Checker {
        let en = Enumeration { refinement: self.refinement, exec, tol: self.bisection_tol };
        Checker { en, claim_tol: self.claim_tol, quad_tol: self.quad_tol, constants: self.constants }
    }
}

/// Why a suite stopped early.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteFailure {
    /// The failing claim, or `None` when a check raised an error.
    pub claim: Option<ClaimResult>,
    pub error: Option<String>,
    /// The offending instance, ready to be fed back for replay.
    pub instance: Instance,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct SuiteReport {
    /// Results in instance order, up to and including the first failure.
    pub results: Vec<ClaimResult>,
    pub failure: Option<SuiteFailure>,
}

impl SuiteReport {
    pub fn passed(&self) -> bool {
        self.failure.is_none()
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("claim_id,instance,lhs,rhs,ratio,pass\n");
        for c in &self.results {
            out.push_str(&format!("{},{},{},{},{},{}\n", c.claim_id, c.instance, c.lhs, c.rhs, c.ratio, c.pass));
        }
        out
    }

    /// Largest ratio per claim id, sorted by id.
    pub fn max_ratios(&self) -> Vec<(String, f64)> {
        let mut by: std::collections::BTreeMap<&str, f64> = Default::default();
        for c in &self.results {
            let e = by.entry(&c.claim_id).or_insert(0.0);
            *e = e.max(c.ratio);
        }
        by.into_iter().map(|(k, v)| (k.to_string(), v)).collect()
    }
}

/// Every claim of `suite` on one instance.
pub fn instance_claims(suite: Suite, ch: &Checker, inst: &Instance) -> Result<Vec<ClaimResult>> {
    let (w, f, id) = (&inst.w, &inst.f, inst.id);
    let mut out = Vec::new();
    let all = suite == Suite::All;
    if all || suite == Suite::Strong {
        for p in STRONG_P {
            out.extend(ch.strong(&format!("{id};p={p}"), w, f, p)?);
        }
    }
    if all || suite == Suite::Mixed {
        for p in MIXED_P {
            out.extend(ch.mixed(&format!("{id};p={p}"), w, f, p)?);
        }
        for (p, q) in LEMMA_PQ {
            out.extend(ch.weight_lemmas(&format!("{id};p={p};q={q}"), w, p, q)?);
        }
    }
    if all || suite == Suite::Frac {
        for (alpha, p) in FRAC_ALPHA_P {
            let fp = FractionalParams::from_alpha_p(alpha, p)?;
            out.extend(ch.mixed_frac(&format!("{id};alpha={alpha};p={p}"), w, f, &fp)?);
        }
        out.push(ch.fractional_limit(&format!("{id};p={TWO_WEIGHT_P}"), w, f, TWO_WEIGHT_P)?);
    }
    if all || suite == Suite::TwoWeight {
        let p = TWO_WEIGHT_P;
        let label = format!("{id};p={p}");
        out.push(ch.power_identity(&label, w, p)?);
        let dual = w.dual_weight(p)?;
        out.extend(ch.two_weight(&format!("{label};sigma=dual"), w, &dual, &ConjugatePair::power(p)?, p, f)?);
        let bump = ConjugatePair::log_bump(LOG_BUMP.0, LOG_BUMP.1)?;
        out.extend(ch.two_weight(&format!("{label};sigma=partner"), w, &inst.v, &bump, p, f)?);
    }
    Ok(out)
}

/// Checks `suite` on every instance. Instances run concurrently under
/// `Parallel`; results are reported in the order of `corpus` and cut at the
/// first failing claim.
pub fn run_suite(suite: Suite, corpus: &[Instance], cfg: &SuiteConfig, exec: Execution) -> Result<SuiteReport> {
    cfg.validate()?;
    // parallelism goes across instances; each instance runs sequentially
    let ch = cfg.checker(if exec.is_parallel() { Execution::Sequential } else { exec });
    let per_instance = map_slice(exec, corpus, |inst| instance_claims(suite, &ch, inst));
    let mut report = SuiteReport::default();
    for (inst, res) in corpus.iter().zip(per_instance) {
        match res {
            Ok(claims) => {
                for c in claims {
                    let failed = !c.pass;
                    report.results.push(c.clone());
                    if failed {
                        report.failure = Some(SuiteFailure { claim: Some(c), error: None, instance: inst.clone() });
                        return Ok(report);
                    }
                }
            }
            Err(e) => {
                report.failure = Some(SuiteFailure { claim: None, error: Some(e.to_string()), instance: inst.clone() });
                return Ok(report);
            }
        }
    }
    Ok(report)
}
