mod claim;
pub mod corpus;
pub mod sweep;

pub use claim::ClaimResult;
pub use corpus::{buckley_pair, generate_corpus, CorpusSpec, Family, Instance};
pub use sweep::{sweep_sharpness, SweepPoint, SweepResult};
pub mod checks;
pub mod weak;
pub use checks::{check_2w, check_mixed, check_mixed_frac, check_strong, Checker, Constants, FROZEN};
pub mod suite;
pub use suite::{instance_claims, run_suite, Suite, SuiteConfig, SuiteFailure, SuiteReport};
