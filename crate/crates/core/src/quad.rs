//! Adaptive Gauss–Legendre quadrature for smooth integrands on finite cells.

use std::collections::BinaryHeap;
use std::sync::OnceLock;

use crate::error::{Error, Result};

const ORDER: usize = 10;
const MAX_CELLS: usize = 200_000;

/// Nodes and weights on [-1, 1], by Newton iteration on `P_ORDER`.
fn rule() -> &'static [(f64, f64); ORDER] {
    static RULE: OnceLock<[(f64, f64); ORDER]> = OnceLock::new();
    RULE.get_or_init(|| {
        let n = ORDER;
        let mut out = [(0.0, 0.0); ORDER];
        for i in 0..n {
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (mut p0, mut p1) = (1.0, x);
                for k in 2..=n {
                    let k = k as f64;
                    let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                    p0 = p1;
                    p1 = p2;
                }
                dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
                let dx = p1 / dp;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            out[i] = (x, 2.0 / ((1.0 - x * x) * dp * dp));
        }
        out
    })
}

/// Fixed-order Gauss–Legendre estimate of `∫_a^b f`.
pub fn gauss_legendre<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> f64 {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    h * rule().iter().map(|&(x, w)| w * f(c + h * x)).sum::<f64>()
}

/// `∫_a^b f` to relative tolerance `tol`.
///
/// Globally adaptive: the cell with the largest error estimate (whole cell
/// against its two halves) is split until the summed estimate fits `tol`.
pub fn integrate_adaptive<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> Result<f64> {
    if !(tol > 0.0) {
        return Err(Error::Parameter(format!("quadrature tolerance must be positive, got {tol}")));
    }
    if b <= a {
        return Ok(0.0);
    }
    let cell = |lo: f64, hi: f64| {
        let mid = 0.5 * (lo + hi);
        let whole = gauss_legendre(f, lo, hi);
        let est = gauss_legendre(f, lo, mid) + gauss_legendre(f, mid, hi);
        Cell { lo, hi, est, err: (est - whole).abs() }
    };
    let mut heap = BinaryHeap::new();
    let first = cell(a, b);
    let mut sum = first.est;
    let mut err = first.err;
    heap.push(first);
    let mut cells = 1usize;
    loop {
        if !sum.is_finite() || !err.is_finite() {
            return Err(Error::Quadrature { estimate: sum, error: err });
        }
        if err <= tol * sum.abs() || err == 0.0 {
            return Ok(sum);
        }
        if cells >= MAX_CELLS {
            return Err(Error::Quadrature { estimate: sum, error: err });
        }
        let worst = heap.pop().expect("heap holds every live cell");
        let mid = 0.5 * (worst.lo + worst.hi);
        if mid <= worst.lo || mid >= worst.hi {
            // cell cannot shrink further; accept what we have
            return if err <= 1e3 * tol * sum.abs() {
                Ok(sum)
            } else {
                Err(Error::Quadrature { estimate: sum, error: err })
            };
        }
        let l = cell(worst.lo, mid);
        let r = cell(mid, worst.hi);
        sum += l.est + r.est - worst.est;
        err += l.err + r.err - worst.err;
        heap.push(l);
        heap.push(r);
        cells += 1;
        if cells % 64 == 0 {
            // refresh the running sums to shed accumulated rounding
            sum = heap.iter().map(|c| c.est).sum();
            err = heap.iter().map(|c| c.err).sum();
        }
    }
}

struct Cell {
    lo: f64,
    hi: f64,
    est: f64,
    err: f64,
}

impl PartialEq for Cell {
    fn eq(&self, other: &Self) -> bool {
        self.err.total_cmp(&other.err).is_eq()
    }
}

impl Eq for Cell {}

impl PartialOrd for Cell {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Cell {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.err.total_cmp(&other.err)
    }
}
