use serde::{Deserialize, Serialize};

use super::corpus::buckley_pair;
use crate::error::{Error, Result};
use crate::exec::{map_slice, Execution};
use crate::maximal::{compile_envelope, Side};
use crate::stepfn::lp_norm;
use crate::weights::Enumeration;

/// Refinement used for `[w_δ]_{A_p^+}` in the sweep; the graded breakpoints
/// already resolve every scale, and doubling it changes nothing measurable.
pub const SWEEP_REFINEMENT: usize = 4;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub delta: f64,
    pub constant: f64,
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub p: f64,
    pub n_pieces: usize,
    pub points: Vec<SweepPoint>,
    /// Least-squares slope of `ln ratio` against `ln constant`.
    pub slope: f64,
    pub intercept: f64,
    /// Root-mean-square residual of the fit.
    pub residual: f64,
}

impl SweepResult {
    /// Slope divided by the sharp exponent `1/(p−1)`.
    pub fn normalized_slope(&self) -> f64 {
        self.slope * (self.p - 1.0)
    }

    pub fn ratios_nondecreasing(&self) -> bool {
        self.points.windows(2).all(|w| w[1].ratio >= w[0].ratio)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("delta,constant,ratio\n");
        for pt in &self.points {
            out.push_str(&format!("{},{},{}\n", pt.delta, pt.constant, pt.ratio));
        }
        out
    }
}

/// `([w_δ]_{A_p^+}, ‖M⁺f_δ‖_{L^p(w_δ)} / ‖f_δ‖_{L^p(w_δ)})` for one `δ`.
pub fn buckley_point(p: f64, delta: f64, n_pieces: usize, exec: Execution, tol: f64) -> Result<SweepPoint> {
    let (w, f) = buckley_pair(p, delta, n_pieces)?;
    let en = Enumeration { refinement: SWEEP_REFINEMENT, exec, tol };
    let constant = en.ap_oneside(&w, p, Side::Plus)?.value;
    let env = compile_envelope(&f, Side::Plus);
    let lhs = env.integrate_power_weight(p, &w, tol)?.powf(1.0 / p);
    Ok(SweepPoint { delta, constant, ratio: lhs / lp_norm(&f, &w, p) })
}

/// Ordinary least squares `y = slope·x + intercept`.
pub fn fit_line(xs: &[f64], ys: &[f64]) -> Result<(f64, f64, f64)> {
    let pts: Vec<(f64, f64)> =
        xs.iter().zip(ys).filter(|(x, y)| x.is_finite() && y.is_finite()).map(|(&x, &y)| (x, y)).collect();
    if pts.len() < 3 {
        return Err(Error::DegenerateFit(format!("need at least 3 finite points, got {}", pts.len())));
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if !(sxx > 0.0) {
        return Err(Error::DegenerateFit("all abscissae coincide".into()));
    }
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let rss: f64 = pts.iter().map(|p| (p.1 - slope * p.0 - intercept).powi(2)).sum();
    Ok((slope, intercept, (rss / n).sqrt()))
}

/// Log-log slope of the operator ratio against `[w_δ]_{A_p^+}` over the
/// two-sided power-weight family.
pub fn sweep_sharpness(p: f64, deltas: &[f64], n_pieces: usize, exec: Execution) -> Result<SweepResult> {
    if deltas.iter().any(|d| !(*d > 0.0 && *d <= 1.0)) {
        return Err(Error::Parameter("deltas must lie in (0, 1]".into()));
    }
    if deltas.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::Parameter("deltas must be strictly decreasing".into()));
    }
    let points = map_slice(exec, deltas, |&d| buckley_point(p, d, n_pieces, exec, 1e-10))
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    let xs: Vec<f64> = points.iter().map(|pt| pt.constant.ln()).collect();
    let ys: Vec<f64> = points.iter().map(|pt| pt.ratio.ln()).collect();
    let (slope, intercept, residual) = fit_line(&xs, &ys)?;
    Ok(SweepResult { p, n_pieces, points, slope, intercept, residual })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fit_recovers_line() {
        let xs = [0.0, 1.0, 2.0, 3.0];
        let ys: Vec<f64> = xs.iter().map(|x| 2.0 * x - 1.0).collect();
        let (s, b, r) = fit_line(&xs, &ys).unwrap();
        assert!((s - 2.0).abs() < 1e-12 && (b + 1.0).abs() < 1e-12 && r < 1e-12);
    }

    #[test]
    fn fit_needs_three_points() {
        assert!(matches!(fit_line(&[0.0, 1.0], &[0.0, 1.0]), Err(Error::DegenerateFit(_))));
        assert!(matches!(fit_line(&[0.0, 1.0, f64::NAN], &[0.0, 1.0, 2.0]), Err(Error::DegenerateFit(_))));
    }

    #[test]
    fn sweep_rejects_increasing_deltas() {
        assert!(sweep_sharpness(2.0, &[0.1, 0.2, 0.4], 16, Execution::Sequential).is_err());
    }
}
