//! `onesided`: command-line front end for the onesided library.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use onesided::decomp::{build_transcript, natural_k_range};
use onesided::exec::with_threads;
use onesided::maximal::{compile_envelope, malpha_at, mplus_at, FractionalParams, Side};
use onesided::orlicz::{bump_ap_plus, bump_wp_minus, ConjugatePair};
use onesided::verify::{
    generate_corpus, instance_claims, run_suite, sweep_sharpness, Checker, Constants, CorpusSpec, Instance, Suite,
    SuiteConfig, SuiteFailure, SuiteReport,
};
use onesided::weights::{ConstantKind, Enumeration, WeightConstantReport};
use onesided::{Execution, StepFunction};

/// Exit code for malformed input or invalid parameters.
const EXIT_INPUT: u8 = 2;
/// Exit code when a checked inequality fails.
const EXIT_CLAIM: u8 = 3;
/// Exit code when a numerical routine could not certify its result.
const EXIT_NUMERIC: u8 = 4;

const FORMATS: &str = "\
FILE FORMATS:
  Step function   {\"breakpoints\": [t0, ..., tn], \"values\": [v1, ..., vn]}
                  strictly increasing finite breakpoints, finite values >= 0.
  Config          {\"quad_tol\": 1e-8, \"bisection_tol\": 1e-10, \"claim_tol\": 1e-9,
                   \"refinement\": 8, \"lambda\": 2, \"seed\": 12648430}
                  every field optional; command-line flags take precedence.
                  \"constants\" may override the six regression constants of verify.
  Corpus spec     {\"seed\": 12648430, \"count\": 200, \"pieces\": [1, 6],
                   \"values\": [0.1, 10], \"families\": [{\"kind\": \"random-step\"}, ...]}
                  or the word `default` for the frozen corpus.
  Envelope        pieces {\"interval\": [lo, hi], \"kind\", \"coefficients\", \"anchor\"};
                  an unbounded end is written as null.

EXIT CODES:
  0 success, 2 malformed input or parameters, 3 a checked inequality failed,
  4 a numerical routine did not converge.";

#[derive(Parser, Debug)]
#[command(name = "onesided", version, about = "One-sided maximal operators and weight constants on step functions")]
#[command(after_help = FORMATS)]
struct Cli {
    #[command(flatten)]
    global: GlobalArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
struct GlobalArgs {
    /// JSON config file with default tolerances, refinement, λ and seed
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,
    /// Candidate-grid subdivisions per piece (R ≥ 1)
    #[arg(long, global = true, value_name = "R")]
    refine: Option<usize>,
    /// Relative tolerance of checked inequalities
    #[arg(long, global = true)]
    tol: Option<f64>,
    /// Corpus seed
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads (results do not depend on this)
    #[arg(long, global = true, value_name = "N")]
    jobs: Option<usize>,
    /// Output file; standard output when absent
    #[arg(long, global = true, value_name = "FILE")]
    out: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Evaluate a maximal operator at points
    #[command(after_help = FORMATS)]
    Eval(EvalArgs),
    /// Compile M⁺f or M⁻f into closed-form pieces (JSON)
    #[command(after_help = FORMATS)]
    Envelope(EnvelopeArgs),
    /// Compute a weight constant (JSON report)
    #[command(after_help = FORMATS)]
    Constant(ConstantArgs),
    /// Level-set decomposition transcript of M⁺f (JSON)
    #[command(after_help = FORMATS)]
    Decompose(DecomposeArgs),
    /// Check a suite of inequalities on a corpus (CSV)
    #[command(after_help = FORMATS)]
    Verify(VerifyArgs),
    /// Slope of the operator norm against [w]_{A_p^+} on power weights (CSV)
    #[command(after_help = FORMATS)]
    Sweep(SweepArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Op {
    Mplus,
    Mminus,
    MalphaPlus,
    MalphaMinus,
}

#[derive(Args, Debug)]
struct EvalArgs {
    #[arg(long, value_enum)]
    op: Op,
    /// Step function file
    #[arg(long = "fn", value_name = "FILE")]
    func: PathBuf,
    /// Evaluation points (repeat or separate with commas)
    #[arg(long, required = true, value_delimiter = ',', allow_hyphen_values = true)]
    x: Vec<f64>,
    /// Order of the fractional operators
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    p: Option<f64>,
    #[arg(long)]
    q: Option<f64>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum SideArg {
    Plus,
    Minus,
}

impl From<SideArg> for Side {
    fn from(s: SideArg) -> Side {
        match s {
            SideArg::Plus => Side::Plus,
            SideArg::Minus => Side::Minus,
        }
    }
}

#[derive(Args, Debug)]
struct EnvelopeArgs {
    #[arg(long = "fn", value_name = "FILE")]
    func: PathBuf,
    #[arg(long, value_enum, default_value = "plus")]
    side: SideArg,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum BumpArg {
    Power,
    Log,
}

#[derive(Args, Debug)]
struct ConstantArgs {
    /// ap+ ap- ainf+ ainf- ap* apq* ap*~ apq*~ restricted- testing+ bump-wp- bump-ap+
    #[arg(long)]
    kind: String,
    #[arg(long, value_name = "FILE")]
    weight: PathBuf,
    /// Second weight for testing+ and the bump constants; w^{-1/(p-1)} when absent
    #[arg(long, value_name = "FILE")]
    sigma: Option<PathBuf>,
    /// Exponent (the exponent r for restricted-)
    #[arg(long)]
    p: Option<f64>,
    #[arg(long)]
    q: Option<f64>,
    /// Young function pair of the bump constants
    #[arg(long, value_enum, default_value = "power")]
    bump: BumpArg,
    /// Log exponent δ of the log bump
    #[arg(long, default_value_t = 0.5)]
    delta: f64,
}

#[derive(Args, Debug)]
struct DecomposeArgs {
    #[arg(long = "fn", value_name = "FILE")]
    func: PathBuf,
    /// Base λ > 1 of the levels λ^k
    #[arg(long)]
    lambda: Option<f64>,
    /// Weight used for the halving chains; Lebesgue measure when absent
    #[arg(long, value_name = "FILE")]
    sigma: Option<PathBuf>,
    /// Lowest and highest level, clipped to the levels where M⁺f has mass
    #[arg(long, num_args = 2, value_names = ["KMIN", "KMAX"], allow_negative_numbers = true)]
    levels: Option<Vec<i32>>,
    /// Depth of the halving chains
    #[arg(long, default_value_t = 4)]
    depth: usize,
}

#[derive(Args, Debug)]
struct VerifyArgs {
    #[arg(long, default_value = "all")]
    suite: String,
    /// Corpus spec file, or `default`
    #[arg(long, default_value = "default")]
    corpus: String,
    /// Check a single instance file (as written on failure) instead of a corpus
    #[arg(long, value_name = "FILE", conflicts_with = "corpus")]
    instance: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct SweepArgs {
    #[arg(long)]
    p: f64,
    #[arg(long, value_delimiter = ',', default_value = "0.4,0.2,0.1,0.05")]
    deltas: Vec<f64>,
    /// Cells per side of the power weight
    #[arg(long, default_value_t = 64)]
    n_pieces: usize,
}

#[derive(Debug, Clone, Copy, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct Config {
    quad_tol: Option<f64>,
    bisection_tol: Option<f64>,
    claim_tol: Option<f64>,
    refinement: Option<usize>,
    lambda: Option<f64>,
    seed: Option<u64>,
    /// Regression constants of the verify suites
    constants: Option<Constants>,
}

/// Settings after merging defaults, the config file and flags.
#[derive(Debug, Clone, Copy)]
struct Settings {
    suite: SuiteConfig,
    lambda: f64,
    seed: Option<u64>,
}

/// Errors carrying the exit code they map to.
#[derive(Debug)]
enum Failure {
    Input(anyhow::Error),
    Claim(String),
    Numeric(anyhow::Error),
}

impl From<onesided::Error> for Failure {
    fn from(e: onesided::Error) -> Self {
        use onesided::Error as E;
        match e {
            E::Quadrature { .. } | E::Refinement { .. } | E::DegenerateFit(_) | E::NoMass(..) => {
                Failure::Numeric(e.into())
            }
            _ => Failure::Input(e.into()),
        }
    }
}

fn input(e: anyhow::Error) -> Failure {
    Failure::Input(e)
}

fn settings(g: &GlobalArgs) -> Result<Settings, Failure> {
    let cfg: Config = match &g.config {
        Some(path) => serde_json::from_str(&read(path).map_err(input)?)
            .with_context(|| format!("config {}", path.display()))
            .map_err(input)?,
        None => Config::default(),
    };
    let mut suite = SuiteConfig::default();
    suite.quad_tol = cfg.quad_tol.unwrap_or(suite.quad_tol);
    suite.bisection_tol = cfg.bisection_tol.unwrap_or(suite.bisection_tol);
    suite.claim_tol = g.tol.or(cfg.claim_tol).unwrap_or(suite.claim_tol);
    suite.refinement = g.refine.or(cfg.refinement).unwrap_or(suite.refinement);
    suite.constants = cfg.constants.unwrap_or(suite.constants);
    suite.validate()?;
    let lambda = cfg.lambda.unwrap_or(2.0);
    if !(lambda > 1.0 && lambda.is_finite()) {
        return Err(input(anyhow!("lambda must be a finite number > 1, got {lambda}")));
    }
    if g.jobs == Some(0) {
        return Err(input(anyhow!("--jobs must be at least 1")));
    }
    Ok(Settings { suite, lambda, seed: g.seed.or(cfg.seed) })
}

fn read(path: &Path) -> anyhow::Result<String> {
    fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))
}

fn read_step(path: &Path) -> Result<StepFunction, Failure> {
    let text = read(path).map_err(input)?;
    serde_json::from_str(&text).with_context(|| format!("step function {}", path.display())).map_err(input)
}

fn emit(out: &Option<PathBuf>, text: &str) -> Result<(), Failure> {
    match out {
        Some(path) => fs::write(path, text).with_context(|| format!("cannot write {}", path.display())).map_err(input),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(text.as_bytes()).map_err(|e| input(e.into()))
        }
    }
}

fn json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("serializable");
    s.push('\n');
    s
}

fn enumeration(s: &Settings) -> Enumeration {
    Enumeration { refinement: s.suite.refinement, exec: Execution::Parallel, tol: s.suite.bisection_tol }
}

fn need(v: Option<f64>, flag: &str, what: &str) -> Result<f64, Failure> {
    v.ok_or_else(|| input(anyhow!("{what} needs --{flag}")))
}

fn eval(a: &EvalArgs, g: &GlobalArgs) -> Result<(), Failure> {
    let f = read_step(&a.func)?;
    if let Some(x) = a.x.iter().find(|x| !x.is_finite()) {
        return Err(input(anyhow!("evaluation point must be finite, got {x}")));
    }
    let frac = |side: Side| -> Result<Vec<f64>, Failure> {
        let alpha = need(a.alpha, "alpha", "the fractional operator")?;
        let p = need(a.p, "p", "the fractional operator")?;
        let fp = match a.q {
            Some(q) => FractionalParams::new(alpha, p, q)?,
            None => FractionalParams::from_alpha_p(alpha, p)?,
        };
        Ok(a.x.iter().map(|&x| malpha_at(&f, &fp, x, side)).collect())
    };
    let values = match a.op {
        Op::Mplus => a.x.iter().map(|&x| mplus_at(&f, x, Side::Plus)).collect(),
        Op::Mminus => a.x.iter().map(|&x| mplus_at(&f, x, Side::Minus)).collect(),
        Op::MalphaPlus => frac(Side::Plus)?,
        Op::MalphaMinus => frac(Side::Minus)?,
    };
    let text: String = values.iter().map(|v| format!("{v}\n")).collect();
    emit(&g.out, &text)
}

fn envelope(a: &EnvelopeArgs, g: &GlobalArgs) -> Result<(), Failure> {
    let f = read_step(&a.func)?;
    emit(&g.out, &json(&compile_envelope(&f, a.side.into())))
}

fn constant(a: &ConstantArgs, s: &Settings, g: &GlobalArgs) -> Result<(), Failure> {
    let kind = ConstantKind::parse(&a.kind)?;
    let w = read_step(&a.weight)?;
    let en = enumeration(s);
    let p = || need(a.p, "p", kind.name());
    let q = || need(a.q, "q", kind.name());
    let sigma = || -> Result<StepFunction, Failure> {
        match &a.sigma {
            Some(path) => read_step(path),
            None => Ok(w.dual_weight(p()?)?),
        }
    };
    let pair = || -> Result<ConjugatePair, Failure> {
        Ok(match a.bump {
            BumpArg::Power => ConjugatePair::power(p()?)?,
            BumpArg::Log => ConjugatePair::log_bump(p()?, a.delta)?,
        })
    };
    let report: WeightConstantReport = match kind {
        ConstantKind::ApPlus => en.ap_oneside(&w, p()?, Side::Plus)?,
        ConstantKind::ApMinus => en.ap_oneside(&w, p()?, Side::Minus)?,
        ConstantKind::AinfPlus => en.ainf_oneside(&w, Side::Plus),
        ConstantKind::AinfMinus => en.ainf_oneside(&w, Side::Minus),
        ConstantKind::ApStar => en.ap_star(&w, p()?, false)?,
        ConstantKind::ApStarTilde => en.ap_star(&w, p()?, true)?,
        ConstantKind::ApqStar => en.apq_star(&w, p()?, q()?, false)?,
        ConstantKind::ApqStarTilde => en.apq_star(&w, p()?, q()?, true)?,
        ConstantKind::RestrictedMinus => en.restricted_minus(&w, p()?)?,
        ConstantKind::TestingSplus => en.testing_splus(&w, &sigma()?, p()?)?,
        ConstantKind::BumpWpMinus => bump_wp_minus(&en, &sigma()?, &pair()?.phi_bar, p()?)?,
        ConstantKind::BumpApPlus => bump_ap_plus(&en, &w, &sigma()?, &pair()?.phi, p()?)?,
    };
    emit(&g.out, &json(&report))
}

fn decompose(a: &DecomposeArgs, s: &Settings, g: &GlobalArgs) -> Result<(), Failure> {
    let f = read_step(&a.func)?;
    let lambda = a.lambda.unwrap_or(s.lambda);
    let k_range = match a.levels.as_deref() {
        Some([lo, hi]) if lo <= hi => Some((*lo, *hi)),
        Some(_) => return Err(input(anyhow!("--levels needs KMIN ≤ KMAX"))),
        None => None,
    };
    let sigma = match &a.sigma {
        Some(path) => read_step(path)?,
        None => {
            // Lebesgue measure on the largest level set
            let env = compile_envelope(&f, Side::Plus);
            let (left, right) = match natural_k_range(&env, lambda) {
                Some((lo, _)) => {
                    let spans = env.superlevel(lambda.powi(lo)).spans().to_vec();
                    (spans.first().map_or(0.0, |s| s.0), spans.last().map_or(1.0, |s| s.1))
                }
                None => (0.0, 1.0),
            };
            StepFunction::constant(left, right, 1.0)?
        }
    };
    let transcript = build_transcript(&f, lambda, k_range, &sigma, a.depth)?;
    emit(&g.out, &json(&transcript))
}

fn load_corpus(spec: &str, seed: Option<u64>) -> Result<Vec<Instance>, Failure> {
    let mut cs = if spec == "default" {
        CorpusSpec::default()
    } else {
        let path = Path::new(spec);
        serde_json::from_str(&read(path).map_err(input)?)
            .with_context(|| format!("corpus spec {}", path.display()))
            .map_err(input)?
    };
    if let Some(seed) = seed {
        cs.seed = seed;
    }
    Ok(generate_corpus(&cs)?)
}

fn verify(a: &VerifyArgs, s: &Settings, g: &GlobalArgs) -> Result<(), Failure> {
    let suite: Suite = a.suite.parse()?;
    let report = match &a.instance {
        Some(path) => {
            let inst: Instance = serde_json::from_str(&read(path).map_err(input)?)
                .with_context(|| format!("instance {}", path.display()))
                .map_err(input)?;
            let ch = Checker {
                en: enumeration(s),
                claim_tol: s.suite.claim_tol,
                quad_tol: s.suite.quad_tol,
                constants: s.suite.constants,
            };
            let results = instance_claims(suite, &ch, &inst)?;
            let failure = results.iter().find(|c| !c.pass).map(|c| SuiteFailure {
                claim: Some(c.clone()),
                error: None,
                instance: inst.clone(),
            });
            SuiteReport { results, failure }
        }
        None => {
            let corpus = load_corpus(&a.corpus, s.seed)?;
            with_threads(g.jobs, || run_suite(suite, &corpus, &s.suite, Execution::Parallel))?
        }
    };
    emit(&g.out, &report.to_csv())?;
    match &report.failure {
        None => Ok(()),
        Some(f) => {
            let reason = match (&f.claim, &f.error) {
                (Some(c), _) => format!("claim {} failed on {}: lhs {} > rhs {}", c.claim_id, c.instance, c.lhs, c.rhs),
                (None, Some(e)) => format!("instance {} raised: {e}", f.instance.id),
                (None, None) => format!("instance {} failed", f.instance.id),
            };
            Err(Failure::Claim(format!("{reason}\nreplay with --instance on:\n{}", json(&f.instance))))
        }
    }
}

/// Gate on the slope normalised by the sharp exponent `1/(p−1)`.
const SLOPE_GATE: (f64, f64) = (0.8, 1.05);

fn sweep(a: &SweepArgs, g: &GlobalArgs) -> Result<(), Failure> {
    let res = with_threads(g.jobs, || sweep_sharpness(a.p, &a.deltas, a.n_pieces, Execution::Parallel))?;
    emit(&g.out, &res.to_csv())?;
    let k = res.normalized_slope();
    eprintln!("slope {} (normalised {k}), intercept {}, rms residual {}", res.slope, res.intercept, res.residual);
    if k < SLOPE_GATE.0 || k > SLOPE_GATE.1 {
        return Err(Failure::Claim(format!("normalised slope {k} outside [{}, {}]", SLOPE_GATE.0, SLOPE_GATE.1)));
    }
    Ok(())
}

fn run(cli: &Cli) -> Result<(), Failure> {
    let s = settings(&cli.global)?;
    let g = &cli.global;
    match &cli.command {
        Command::Eval(a) => eval(a, g),
        Command::Envelope(a) => envelope(a, g),
        Command::Constant(a) => constant(a, &s, g),
        Command::Decompose(a) => decompose(a, &s, g),
        Command::Verify(a) => verify(a, &s, g),
        Command::Sweep(a) => sweep(a, g),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Input(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_INPUT)
        }
        Err(Failure::Claim(msg)) => {
            eprintln!("failed: {msg}");
            ExitCode::from(EXIT_CLAIM)
        }
        Err(Failure::Numeric(e)) => {
            eprintln!("numerical failure: {e:#}");
            ExitCode::from(EXIT_NUMERIC)
        }
    }
}
