//! Acceptance run: one PASS/FAIL line per criterion, nonzero exit if any
//! criterion fails. Lives in the CLI crate so the determinism check can run
//! the binary.

#[path = "../../core/tests/common/mod.rs"]
mod common;

use std::process::Command;
use std::time::{Duration, Instant};

use common::{both, cells, maximal_direct, random_functions, random_weights};
use onesided::decomp::verify_key_lemma_with;
use onesided::maximal::{compile_envelope, Side};
use onesided::verify::sweep::fit_line;
use onesided::verify::{
    generate_corpus, run_suite, sweep_sharpness, CorpusSpec, Instance, Suite, SuiteConfig, SuiteReport,
};
use onesided::weights::{ConstantKind, Enumeration};
use onesided::{Execution, StepFunction};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Outcome {
    pass: bool,
    detail: String,
}

fn timed(limit: Option<Duration>, run: impl FnOnce() -> Outcome) -> Outcome {
    let start = Instant::now();
    let mut out = run();
    let took = start.elapsed();
    out.detail.push_str(&format!("; {:.1} s", took.as_secs_f64()));
    if let Some(limit) = limit {
        out.detail.push_str(&format!(" (limit {} s)", limit.as_secs()));
        out.pass &= took < limit;
    }
    out
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1e-300)
}

fn envelope_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst: f64 = 0.0;
    for f in random_functions(101, 200, 12) {
        let c = cells(&f);
        let s = f.support();
        for (side, plus) in [(Side::Plus, true), (Side::Minus, false)] {
            let env = compile_envelope(&f, side);
            for _ in 0..1000 {
                let x = rng.gen_range(s.left - 1.0..s.right + 1.0);
                worst = worst.max((env.value_at(x) - maximal_direct(&c, x, plus)).abs());
            }
        }
    }
    Outcome { pass: worst <= 1e-10, detail: format!("max abs error {worst:.3e} (limit 1e-10)") }
}

fn constant_oracle() -> Outcome {
    let weights = random_weights(202, 100, 6);
    let (mut err, mut err_at) = (0.0f64, String::new());
    let mut pass = true;
    let mut growth = Vec::new();
    for kind in ConstantKind::ALL {
        let (mut top, mut over) = (0.0f64, 0);
        for (n, w) in weights.iter().enumerate() {
            let (lib, oracle) = both(kind, w, 8);
            if rel(lib, oracle) > err {
                err = rel(lib, oracle);
                err_at = format!("{kind} on weight {n}");
            }
            let g = (both_library(kind, w, 16) - lib) / lib;
            top = top.max(g);
            over += usize::from(g > 0.01);
        }
        pass &= over == 0;
        if over > 0 {
            growth.push(format!("{kind} {:.2}% ({over} weights)", 100.0 * top));
        }
    }
    let growth = if growth.is_empty() { "none".to_string() } else { growth.join(", ") };
    Outcome {
        pass: pass && err <= 1e-12,
        detail: format!("oracle relative error {err:.2e} at {err_at} (limit 1e-12); R=8→16 growth above 1%: {growth}"),
    }
}

/// The library half of [`both`] without running the oracle.
fn both_library(kind: ConstantKind, w: &StepFunction, r: usize) -> f64 {
    use onesided::orlicz::{bump_ap_plus, bump_wp_minus, ConjugatePair};
    let en = Enumeration::new(r);
    let p = 2.0;
    let sigma = w.dual_weight(p).unwrap();
    let pair = ConjugatePair::power(p).unwrap();
    match kind {
        ConstantKind::ApPlus => en.ap_oneside(w, 3.0, Side::Plus).unwrap().value,
        ConstantKind::ApMinus => en.ap_oneside(w, 1.5, Side::Minus).unwrap().value,
        ConstantKind::AinfPlus => en.ainf_oneside(w, Side::Plus).value,
        ConstantKind::AinfMinus => en.ainf_oneside(w, Side::Minus).value,
        ConstantKind::ApStar => en.ap_star(w, p, false).unwrap().value,
        ConstantKind::ApStarTilde => en.ap_star(w, 3.0, true).unwrap().value,
        ConstantKind::ApqStar => en.apq_star(w, p, 4.0, false).unwrap().value,
        ConstantKind::ApqStarTilde => en.apq_star(w, 1.5, 6.0, true).unwrap().value,
        ConstantKind::RestrictedMinus => en.restricted_minus(&sigma, 2.0).unwrap().value,
        ConstantKind::TestingSplus => en.testing_splus(w, &sigma, p).unwrap().value,
        ConstantKind::BumpWpMinus => bump_wp_minus(&en, &sigma, &pair.phi_bar, p).unwrap().value,
        ConstantKind::BumpApPlus => bump_ap_plus(&en, w, &sigma, &pair.phi, p).unwrap().value,
    }
}

fn spot_values() -> Outcome {
    let one = StepFunction::constant(0.0, 1.0, 1.0).unwrap();
    let en = Enumeration::new(8);
    let mut worst: f64 = 0.0;
    let mut checks = vec![(en.ap_oneside(&one, 2.0, Side::Plus).unwrap().value, 0.25)];
    for p in [1.5, 2.0, 3.0] {
        checks.push((en.ap_oneside(&one, p, Side::Plus).unwrap().value, (p - 1.0f64).powf(p - 1.0) / p.powf(p)));
    }
    checks.push((en.restricted_minus(&one, 2.0).unwrap().value, 0.5));
    for (got, want) in checks {
        worst = worst.max((got - want).abs());
    }
    Outcome { pass: worst <= 1e-6, detail: format!("max abs deviation {worst:.2e} (limit 1e-6)") }
}

fn key_lemma() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let fs = random_functions(404, 10_000, 12);
    let (mut failures, mut worst, mut checked) = (0, f64::INFINITY, 0usize);
    for f in &fs {
        let env = compile_envelope(f, Side::Plus);
        let s = f.support();
        let x = rng.gen_range(s.left - 2.0..s.right + 1.0);
        let mx = env.value_at(x);
        let l1 = if mx > 0.0 { mx * rng.gen_range(0.0f64..2.0).exp() } else { rng.gen_range(-3.0f64..3.0).exp() };
        let l2 = l1 * rng.gen_range(0.01f64..3.0).exp();
        // random ends plus the component ends of O, where the bound is tightest
        let mut ys: Vec<f64> = (0..40).map(|_| rng.gen_range(x..s.right + 2.0)).collect();
        for &(a, b) in env.superlevel(l2).spans() {
            ys.extend([a, b].into_iter().filter(|&y| y > x && y.is_finite()));
        }
        checked += ys.len();
        let claim = verify_key_lemma_with(&env, l1, l2, x, &ys, 1e-12).unwrap();
        let scaled = if claim.lhs > 0.0 { claim.slack() / claim.lhs } else { claim.slack() };
        worst = worst.min(scaled);
        if !claim.pass {
            failures += 1;
        }
    }
    Outcome {
        pass: failures == 0,
        detail: format!(
            "{} instances, {checked} windows, {failures} failures, least relative slack {worst:.3e}",
            fs.len()
        ),
    }
}

/// Every claim with one of `ids` passed, and each id appears as often as
/// listed.
fn claims_hold(report: &SuiteReport, ids: &[(&str, usize)]) -> Outcome {
    let mut pass = report.failure.as_ref().is_none_or(|f| {
        let failed = f.claim.as_ref().map(|c| c.claim_id.as_str());
        failed.is_some_and(|id| ids.iter().all(|(i, _)| *i != id)) && f.error.is_none()
    });
    let mut parts = Vec::new();
    for &(id, count) in ids {
        let rows: Vec<_> = report.results.iter().filter(|c| c.claim_id == id).collect();
        let ok = rows.len() == count && rows.iter().all(|c| c.pass);
        pass &= ok;
        let top = rows.iter().map(|c| c.ratio).fold(0.0, f64::max);
        parts.push(format!("{id} {}/{count} max ratio {top:.4}", rows.iter().filter(|c| c.pass).count()));
    }
    if let Some(f) = &report.failure {
        parts.push(format!("suite stopped: {:?} {:?}", f.claim.as_ref().map(|c| &c.claim_id), f.error));
    }
    Outcome { pass, detail: parts.join(", ") }
}

/// Least-squares slope of `ln K` against `ln [w]_{A_p^{+,*}}` over the
/// necessity claims, which record `[w]^{1/p}/4` and `K`. The bounds
/// `[w]^{1/p}/4 ≤ K ≲ [w]^{2/p}` constrain worst cases only, so across a
/// mixed corpus the slope is descriptive.
fn mixed_exponents(report: &SuiteReport) -> String {
    let mut parts = Vec::new();
    for p in [2.0, 3.0] {
        let tag = format!(";p={p}");
        let (xs, ys): (Vec<f64>, Vec<f64>) = report
            .results
            .iter()
            .filter(|c| c.claim_id == "mixed-necessity" && c.instance.ends_with(&tag) && c.lhs > 0.0 && c.rhs > 0.0)
            .map(|c| (p * (4.0 * c.lhs).ln(), c.rhs.ln()))
            .unzip();
        match fit_line(&xs, &ys) {
            Ok((slope, _, _)) => parts.push(format!("p={p}: {slope:.3} (1/p = {:.3})", 1.0 / p)),
            Err(e) => parts.push(format!("p={p}: no fit ({e})")),
        }
    }
    parts.join(", ")
}

fn sweep() -> Outcome {
    let mut pass = true;
    let mut parts = Vec::new();
    for p in [2.0, 3.0] {
        let r = sweep_sharpness(p, &[0.4, 0.2, 0.1, 0.05], 64, Execution::Parallel).unwrap();
        let s = r.normalized_slope();
        pass &= (0.8..=1.05).contains(&s);
        parts.push(format!("p={p}: slope {:.4} = {s:.4}/(p−1)", r.slope));
    }
    Outcome { pass, detail: format!("{} (band [0.8, 1.05]/(p−1))", parts.join(", ")) }
}

fn determinism() -> Outcome {
    let dir = std::env::temp_dir().join(format!("onesided-acceptance-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let run = |name: &str| {
        let path = dir.join(name);
        let out = Command::new(env!("CARGO_BIN_EXE_onesided"))
            .args(["--seed", "12648430", "verify", "--suite", "all", "--out"])
            .arg(&path)
            .output()
            .unwrap();
        (out.status.code(), out.stdout, std::fs::read(&path).unwrap_or_default())
    };
    let first = run("a.csv");
    let second = run("b.csv");
    let _ = std::fs::remove_dir_all(&dir);
    let same = first == second && !first.2.is_empty();
    Outcome {
        pass: same && first.0 == Some(0),
        detail: format!("exit codes {:?}/{:?}, {} report bytes, identical: {same}", first.0, second.0, first.2.len()),
    }
}

fn main() {
    let corpus: Vec<Instance> = generate_corpus(&CorpusSpec::default()).unwrap();
    let cfg = SuiteConfig::default();
    let suite = |s: Suite| run_suite(s, &corpus, &cfg, Execution::Parallel).unwrap();
    let n = corpus.len();

    let mut results: Vec<(usize, &str, Outcome)> = Vec::new();
    results.push((1, "envelope matches direct maximisation", timed(Some(Duration::from_secs(10)), envelope_oracle)));
    results.push((2, "weight constants match the oracle", timed(Some(Duration::from_secs(60)), constant_oracle)));
    results.push((3, "closed-form spot values", timed(None, spot_values)));
    results.push((4, "key lemma on random instances", timed(Some(Duration::from_secs(30)), key_lemma)));

    let mixed = suite(Suite::Mixed);
    let chain = claims_hold(
        &mixed,
        &[
            ("restricted-vs-ap", 2 * n),
            ("root-weight-ap", 4 * n),
            ("restricted-vs-ap-star", 2 * n),
            ("ap-star-midpoint-lower", 2 * n),
            ("ap-star-midpoint-upper", 2 * n),
            ("apq-star-midpoint-lower", 2 * n),
            ("apq-star-midpoint-upper", 2 * n),
            ("apq-as-ap-star", 2 * n),
        ],
    );
    results.push((5, "weight-lemma chain on the frozen corpus", chain));
    let ids = [("mixed-necessity", 2 * n), ("mixed-necessity-pointwise", 2 * n), ("mixed-sufficiency", 2 * n)];
    let mut c7 = claims_hold(&mixed, &ids);
    c7.detail.push_str(&format!("; empirical exponent of K in [w]_(A_p^+*), report only: {}", mixed_exponents(&mixed)));
    results.push((7, "mixed weak-type necessity and sufficiency", c7));

    results.push((6, "sharpness sweep slope", timed(Some(Duration::from_secs(120)), sweep)));

    let frac = suite(Suite::Frac);
    let ids = [("fractional-reduction", 2 * n), ("fractional-limit", n), ("fractional-necessity", 2 * n)];
    let mut c8 = claims_hold(&frac, &ids);
    // the reduction is held to absolute slack, tighter than the claim tolerance
    let least = frac
        .results
        .iter()
        .filter(|c| c.claim_id == "fractional-reduction")
        .map(|c| (c.rhs - c.lhs) / c.rhs.max(1.0))
        .fold(f64::INFINITY, f64::min);
    c8.pass &= least >= -1e-10;
    c8.detail.push_str(&format!("; least reduction slack {least:.2e} (limit −1e-10)"));
    results.push((8, "fractional reduction, limit and necessity", c8));

    let two = suite(Suite::TwoWeight);
    let ids = [("power-bump-identity", n), ("two-weight-testing", 2 * n)];
    results.push((9, "bump identity and testing constant", claims_hold(&two, &ids)));

    results.push((10, "verify reports are byte-identical", timed(None, determinism)));

    results.sort_by_key(|r| r.0);
    let mut failed = 0;
    for (k, name, out) in &results {
        println!("criterion {k:>2} {}: {name}: {}", if out.pass { "PASS" } else { "FAIL" }, out.detail);
        failed += usize::from(!out.pass);
    }
    println!("{} of {} criteria passed", results.len() - failed, results.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
