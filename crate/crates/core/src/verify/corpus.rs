use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::stepfn::StepFunction;

/// Seed of the frozen regression corpus.
pub const FROZEN_SEED: u64 = 0xC0FFEE;
/// Size of the frozen regression corpus.
pub const FROZEN_COUNT: usize = 200;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Family {
    RandomStep,
    /// Two-sided power weights `|x|^{(1−δ)(p−1)}` on `(−1, 1)`.
    Buckley {
        p: f64,
        deltas: Vec<f64>,
        n_pieces: usize,
    },
    Indicator,
    NecessityExtremal,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CorpusSpec {
    pub seed: u64,
    pub count: usize,
    /// Inclusive range for the number of pieces of random step functions.
    pub pieces: (usize, usize),
    /// Values are drawn log-uniformly from this range.
    pub values: (f64, f64),
    pub families: Vec<Family>,
}

impl Default for CorpusSpec {
    fn default() -> Self {
        Self {
            seed: FROZEN_SEED,
            count: FROZEN_COUNT,
            pieces: (1, 6),
            values: (0.1, 10.0),
            families: vec![
                Family::RandomStep,
                Family::Indicator,
                Family::NecessityExtremal,
                Family::Buckley { p: 2.0, deltas: vec![0.4, 0.2], n_pieces: 8 },
            ],
        }
    }
}

impl CorpusSpec {
    pub fn with_seed(seed: u64, count: usize) -> Self {
        Self { seed, count, ..Self::default() }
    }

    pub fn validate(&self) -> Result<()> {
        let (lo, hi) = self.pieces;
        if lo == 0 || lo > hi {
            return Err(Error::Parameter(format!("piece range must satisfy 1 ≤ min ≤ max, got [{lo}, {hi}]")));
        }
        let (a, b) = self.values;
        if !(a > 0.0 && a <= b && b.is_finite()) {
            return Err(Error::Parameter(format!("value range must satisfy 0 < min ≤ max < ∞, got [{a}, {b}]")));
        }
        if self.families.is_empty() {
            return Err(Error::Parameter("corpus needs at least one family".into()));
        }
        for fam in &self.families {
            if let Family::Buckley { p, deltas, n_pieces } = fam {
                if !(*p > 1.0) || deltas.iter().any(|d| !(*d > 0.0 && *d <= 1.0)) || *n_pieces < 2 {
                    return Err(Error::Parameter("buckley family needs p > 1, δ ∈ (0, 1], n_pieces ≥ 2".into()));
                }
            }
        }
        Ok(())
    }
}

/// A weight `w`, a test function `f` supported inside the support of `w`, and
/// an independent partner weight `v` on the same support.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Instance {
    pub id: usize,
    pub family: String,
    pub w: StepFunction,
    pub f: StepFunction,
    pub v: StepFunction,
}

fn log_uniform(rng: &mut ChaCha8Rng, (lo, hi): (f64, f64)) -> f64 {
    if lo == hi {
        return lo;
    }
    (rng.gen_range(lo.ln()..hi.ln())).exp()
}

fn random_weight(rng: &mut ChaCha8Rng, spec: &CorpusSpec) -> StepFunction {
    let n = rng.gen_range(spec.pieces.0..=spec.pieces.1);
    let mut t = vec![rng.gen_range(-1.0..1.0)];
    for _ in 0..n {
        let len = log_uniform(rng, (0.2, 2.0));
        t.push(t.last().unwrap() + len);
    }
    let values = (0..n).map(|_| log_uniform(rng, spec.values)).collect();
    StepFunction::new(t, values).expect("generated weight is valid")
}

/// Random weight on a fixed support `(lo, hi)`.
fn weight_on(rng: &mut ChaCha8Rng, spec: &CorpusSpec, lo: f64, hi: f64) -> StepFunction {
    let n = rng.gen_range(spec.pieces.0..=spec.pieces.1);
    let t = cuts(rng, lo, hi, n);
    let values = (0..n).map(|_| log_uniform(rng, spec.values)).collect();
    StepFunction::new(t, values).expect("generated weight is valid")
}

/// `n + 1` sorted points from `lo` to `hi` with comparable gaps.
fn cuts(rng: &mut ChaCha8Rng, lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let mut gaps: Vec<f64> = (0..n).map(|_| rng.gen_range(0.25..1.0)).collect();
    let total: f64 = gaps.iter().sum();
    gaps.iter_mut().for_each(|g| *g *= (hi - lo) / total);
    let mut t = vec![lo];
    for g in &gaps[..n - 1] {
        t.push(t.last().unwrap() + g);
    }
    t.push(hi);
    t
}

fn subinterval(rng: &mut ChaCha8Rng, w: &StepFunction) -> (f64, f64) {
    let s = w.support();
    let len = s.length() * rng.gen_range(0.2..1.0);
    let start = s.left + (s.length() - len) * rng.gen::<f64>();
    (start, (start + len).min(s.right))
}

fn random_function(rng: &mut ChaCha8Rng, spec: &CorpusSpec, w: &StepFunction) -> StepFunction {
    let (lo, hi) = subinterval(rng, w);
    let n = rng.gen_range(spec.pieces.0..=spec.pieces.1);
    let t = cuts(rng, lo, hi, n);
    let mut values: Vec<f64> =
        (0..n).map(|_| if rng.gen_bool(0.15) { 0.0 } else { log_uniform(rng, spec.values) }).collect();
    if values.iter().all(|&v| v == 0.0) {
        values[0] = 1.0;
    }
    StepFunction::new(t, values).expect("generated function is valid")
}

/// `σχ_(a, a+h)` for a random window inside the support of `w`.
fn extremal_function(rng: &mut ChaCha8Rng, w: &StepFunction, sigma: &StepFunction) -> StepFunction {
    let (lo, hi) = subinterval(rng, w);
    sigma.restrict(&crate::stepfn::Interval { left: lo, right: hi })
}

/// Ratio between consecutive cells of the graded power-weight partition.
pub const GRADING: f64 = 3.0;

/// Discretized two-sided power weight `|x|^{(1−δ)(p−1)}` on `(−1, 1)` and test
/// function `x^{δ−1}χ_(0,1)`, both by exact cell averages.
///
/// `(0, 1)` is cut into `n_pieces` cells `(g^{-i-1}, g^{-i})` with
/// `g = GRADING`, the innermost one reaching 0, and `(−1, 0)` is its mirror
/// image. The test function vanishes on the innermost cell; its mass there
/// would otherwise dominate `‖f‖_{L^p(w)}` as `δ → 0`.
pub fn buckley_pair(p: f64, delta: f64, n_pieces: usize) -> Result<(StepFunction, StepFunction)> {
    buckley_pair_graded(p, delta, n_pieces, GRADING)
}

/// [`buckley_pair`] with an explicit grading ratio.
pub fn buckley_pair_graded(p: f64, delta: f64, n_pieces: usize, ratio: f64) -> Result<(StepFunction, StepFunction)> {
    if !(p > 1.0 && p.is_finite()) || !(delta > 0.0 && delta <= 1.0) || n_pieces < 2 || !(ratio > 1.0) {
        return Err(Error::Parameter(format!(
            "buckley family needs p > 1, δ ∈ (0, 1], n_pieces ≥ 2, grading > 1; got p = {p}, δ = {delta}, n = {n_pieces}, grading = {ratio}"
        )));
    }
    // 0 = r_0 < r_1 < … < r_n = 1
    let mut right: Vec<f64> = (0..n_pieces).map(|i| ratio.powi(-(i as i32))).collect();
    right.push(0.0);
    right.reverse();
    let gamma_w = (1.0 - delta) * (p - 1.0);
    let avg = |g: f64, a: f64, b: f64| (b.powf(g + 1.0) - a.powf(g + 1.0)) / ((g + 1.0) * (b - a));
    let mut t: Vec<f64> = right.iter().rev().map(|x| -x).collect();
    t.extend_from_slice(&right[1..]);
    let mut wv: Vec<f64> = right.windows(2).rev().map(|c| avg(gamma_w, c[0], c[1])).collect();
    wv.extend(right.windows(2).map(|c| avg(gamma_w, c[0], c[1])));
    let w = StepFunction::new(t, wv)?;
    let fv: Vec<f64> =
        right.windows(2).enumerate().map(|(i, c)| if i == 0 { 0.0 } else { avg(delta - 1.0, c[0], c[1]) }).collect();
    let f = StepFunction::new(right, fv)?;
    Ok((w, f))
}

/// Deterministic corpus; the special families are interleaved with random
/// instances so that every prefix of the corpus contains some of each.
pub fn generate_corpus(spec: &CorpusSpec) -> Result<Vec<Instance>> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut buckley: Vec<(f64, f64, usize)> = Vec::new();
    let mut cyclic = Vec::new();
    for fam in &spec.families {
        match fam {
            Family::Buckley { p, deltas, n_pieces } => buckley.extend(deltas.iter().map(|&d| (*p, d, *n_pieces))),
            other => cyclic.push(other.clone()),
        }
    }
    let mut out = Vec::with_capacity(spec.count);
    let mut next_buckley = buckley.into_iter();
    for id in 0..spec.count {
        // every tenth slot goes to the next buckley instance while any remain
        if id % 10 == 9 {
            if let Some((p, d, n)) = next_buckley.next() {
                let (w, f) = buckley_pair(p, d, n)?;
                let s = w.support();
                let v = weight_on(&mut rng, spec, s.left, s.right);
                out.push(Instance { id, family: format!("buckley(p={p},delta={d})"), w, f, v });
                continue;
            }
        }
        if cyclic.is_empty() {
            break;
        }
        let fam = &cyclic[id % cyclic.len()];
        let w = random_weight(&mut rng, spec);
        let s = w.support();
        let v = weight_on(&mut rng, spec, s.left, s.right);
        let (name, f) = match fam {
            Family::RandomStep => ("random-step", random_function(&mut rng, spec, &w)),
            Family::Indicator => {
                let (lo, hi) = subinterval(&mut rng, &w);
                ("indicator", StepFunction::indicator(lo, hi)?)
            }
            Family::NecessityExtremal => {
                let p = 2.0;
                let sigma = w.dual_weight(p)?;
                ("necessity-extremal", extremal_function(&mut rng, &w, &sigma))
            }
            Family::Buckley { .. } => unreachable!(),
        };
        out.push(Instance { id, family: name.to_string(), w, f, v });
    }
    Ok(out)
}
