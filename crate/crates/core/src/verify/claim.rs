use serde::{Deserialize, Serialize};

/// One checked inequality `lhs ≤ rhs`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClaimResult {
    pub claim_id: String,
    pub instance: String,
    pub lhs: f64,
    pub rhs: f64,
    pub ratio: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl ClaimResult {
    /// Passes iff `lhs ≤ rhs·(1 + tolerance)`.
    pub fn new(claim_id: impl Into<String>, instance: impl Into<String>, lhs: f64, rhs: f64, tolerance: f64) -> Self {
        let ratio = if lhs == 0.0 { 0.0 } else { lhs / rhs };
        Self {
            claim_id: claim_id.into(),
            instance: instance.into(),
            lhs,
            rhs,
            ratio,
            tolerance,
            pass: lhs <= rhs * (1.0 + tolerance),
        }
    }

    /// Headroom `rhs(1+tol) − lhs`; negative when the claim fails.
    pub fn slack(&self) -> f64 {
        self.rhs * (1.0 + self.tolerance) - self.lhs
    }
}
