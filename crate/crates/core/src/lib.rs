//! Exact one-sided maximal operators and one-sided weight constants on step
//! functions, with a harness that checks weighted inequalities numerically.

pub mod decomp;
pub mod error;
pub mod exec;
pub mod maximal;
pub mod orlicz;
pub mod quad;
pub mod stepfn;
pub mod verify;
pub mod weights;

pub use error::{Error, Result};
pub use exec::Execution;
pub use stepfn::{HalvingChain, Interval, IntervalSet, LorentzNorms, StepFunction};
