use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// The registered Young functions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum YoungFunction {
    /// `t^r`
    Power { r: f64 },
    /// `t^r log(e + t)^{1+δ}`
    PowerLog { r: f64, delta: f64 },
}

impl YoungFunction {
    pub fn power(r: f64) -> Result<Self> {
        let f = YoungFunction::Power { r };
        f.validate()?;
        Ok(f)
    }

    pub fn power_log(r: f64, delta: f64) -> Result<Self> {
        let f = YoungFunction::PowerLog { r, delta };
        f.validate()?;
        Ok(f)
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            YoungFunction::Power { r } if r >= 1.0 && r.is_finite() => Ok(()),
            YoungFunction::PowerLog { r, delta } if r >= 1.0 && r.is_finite() && delta >= 0.0 && delta.is_finite() => {
                Ok(())
            }
            _ => Err(Error::Parameter(format!("not a Young function: {self:?} (need r ≥ 1, δ ≥ 0)"))),
        }
    }

    /// Short identifier used in reports.
    pub fn id(&self) -> String {
        match *self {
            YoungFunction::Power { r } => format!("power(r={r})"),
            YoungFunction::PowerLog { r, delta } => format!("power-log(r={r},delta={delta})"),
        }
    }

    pub fn is_power(&self) -> Option<f64> {
        match *self {
            YoungFunction::Power { r } => Some(r),
            _ => None,
        }
    }

    pub fn eval(&self, t: f64) -> f64 {
        if t <= 0.0 {
            return 0.0;
        }
        match *self {
            YoungFunction::Power { r } => t.powf(r),
            YoungFunction::PowerLog { r, delta } => t.powf(r) * (std::f64::consts::E + t).ln().powf(1.0 + delta),
        }
    }

    /// `t Φ'(t)`.
    pub fn t_derivative(&self, t: f64) -> f64 {
        if t <= 0.0 {
            return 0.0;
        }
        match *self {
            YoungFunction::Power { r } => r * t.powf(r),
            YoungFunction::PowerLog { r, delta } => {
                let e_t = std::f64::consts::E + t;
                let l = e_t.ln();
                t.powf(r) * l.powf(delta) * (r * l + (1.0 + delta) * t / e_t)
            }
        }
    }

    /// `Φ^{-1}(s)`; closed form for powers, bisection otherwise.
    pub fn inverse(&self, s: f64) -> f64 {
        if s <= 0.0 {
            return 0.0;
        }
        match *self {
            YoungFunction::Power { r } => s.powf(1.0 / r),
            YoungFunction::PowerLog { r, .. } => {
                // Φ(t) ≥ t^r, so the root lies below s^{1/r}
                let mut hi = s.powf(1.0 / r);
                let mut lo = 0.0;
                for _ in 0..200 {
                    let mid = 0.5 * (lo + hi);
                    if mid <= lo || mid >= hi {
                        break;
                    }
                    if self.eval(mid) < s {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                0.5 * (lo + hi)
            }
        }
    }
}

/// `(Φ, Φ̄, κ)` with `Φ^{-1}(t) Φ̄^{-1}(t) ≤ κ t`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConjugatePair {
    pub phi: YoungFunction,
    pub phi_bar: YoungFunction,
    pub kappa: f64,
}

impl ConjugatePair {
    /// `(t^{p'}, t^p)` with `κ = 1`.
    pub fn power(p: f64) -> Result<Self> {
        if !(p > 1.0) {
            return Err(Error::Parameter(format!("p must exceed 1, got {p}")));
        }
        Ok(Self { phi: YoungFunction::power(p / (p - 1.0))?, phi_bar: YoungFunction::power(p)?, kappa: 1.0 })
    }

    /// `(t^{p'} log(e+t)^{1+δ}, t^p)` with `κ` measured on a log grid.
    pub fn log_bump(p: f64, delta: f64) -> Result<Self> {
        if !(p > 1.0) {
            return Err(Error::Parameter(format!("p must exceed 1, got {p}")));
        }
        let phi = YoungFunction::power_log(p / (p - 1.0), delta)?;
        let phi_bar = YoungFunction::power(p)?;
        Ok(Self { phi, phi_bar, kappa: measure_kappa(&phi, &phi_bar) })
    }
}

/// `sup_t Φ^{-1}(t) Φ̄^{-1}(t) / t` over 2000 log-spaced `t ∈ [1e-6, 1e12]`.
pub fn measure_kappa(phi: &YoungFunction, phi_bar: &YoungFunction) -> f64 {
    let n = 2000;
    let (lo, hi) = (1e-6f64.ln(), 1e12f64.ln());
    (0..=n)
        .map(|i| {
            let t = (lo + (hi - lo) * i as f64 / n as f64).exp();
            phi.inverse(t) * phi_bar.inverse(t) / t
        })
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn inverse_round_trip() {
        let f = YoungFunction::power_log(2.0, 0.5).unwrap();
        for s in [1e-6, 0.3, 1.0, 7.0, 1e9] {
            assert_relative_eq!(f.eval(f.inverse(s)), s, max_relative = 1e-12);
        }
        assert_eq!(YoungFunction::power(2.0).unwrap().inverse(9.0), 3.0);
    }

    #[test]
    fn convex_and_superlinear_on_samples() {
        for f in [YoungFunction::power(1.5).unwrap(), YoungFunction::power_log(3.0, 0.2).unwrap()] {
            assert_eq!(f.eval(0.0), 0.0);
            let mut prev_ratio = 0.0;
            for i in 1..400 {
                let x = i as f64 * 0.05;
                let y = x + 0.37;
                assert!(f.eval(0.5 * (x + y)) <= 0.5 * (f.eval(x) + f.eval(y)) * (1.0 + 1e-14));
                let ratio = f.eval(x) / x;
                assert!(ratio >= prev_ratio);
                prev_ratio = ratio;
            }
        }
    }

    #[test]
    fn t_derivative_matches_difference() {
        let f = YoungFunction::power_log(2.5, 0.7).unwrap();
        for t in [0.01, 1.0, 30.0] {
            let h = 1e-6 * t;
            let numeric = t * (f.eval(t + h) - f.eval(t - h)) / (2.0 * h);
            assert_relative_eq!(f.t_derivative(t), numeric, max_relative = 1e-7);
        }
    }

    #[test]
    fn kappa_values() {
        assert_eq!(ConjugatePair::power(3.0).unwrap().kappa, 1.0);
        let pair = ConjugatePair::log_bump(2.0, 0.5).unwrap();
        assert!(pair.kappa <= 1.0 && pair.kappa > 0.99);
    }

    #[test]
    fn json_config() {
        let f: YoungFunction = serde_json::from_str(r#"{"kind":"power-log","r":2.0,"delta":0.5}"#).unwrap();
        assert_eq!(f, YoungFunction::PowerLog { r: 2.0, delta: 0.5 });
        let g: YoungFunction = serde_json::from_str(r#"{"kind":"power","r":2.0}"#).unwrap();
        assert_eq!(g, YoungFunction::Power { r: 2.0 });
    }
}
