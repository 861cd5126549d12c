//! Candidate grids and the shared triple/pair enumeration.

use serde::{Deserialize, Serialize};

use crate::exec::{self, Execution};
use crate::stepfn::{Interval, StepFunction};

#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
pub struct Triple {
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

impl Triple {
    pub fn new(a: f64, b: f64, c: f64) -> Option<Self> {
        (a < b && b < c).then_some(Self { a, b, c })
    }
}

/// Breakpoints plus `R` equal subdivisions of every cell between them.
///
/// Grids for `R` and `2R` are nested exactly, so every maximum over the grid
/// is nondecreasing under doubling.
#[derive(Debug, Clone, PartialEq)]
pub struct CandidateGrid {
    points: Vec<f64>,
    refinement: usize,
}

impl CandidateGrid {
    pub fn new(breakpoints: &[f64], refinement: usize) -> Self {
        let r = refinement.max(1);
        let mut points = Vec::with_capacity((breakpoints.len().max(1) - 1) * r + 1);
        for w in breakpoints.windows(2) {
            let len = w[1] - w[0];
            for k in 0..r {
                points.push(w[0] + len * (k as f64 / r as f64));
            }
        }
        if let Some(&last) = breakpoints.last() {
            points.push(last);
        }
        points.dedup();
        Self { points, refinement: r }
    }

    /// Grid over the merged breakpoints of several functions.
    pub fn for_functions(fs: &[&StepFunction], refinement: usize) -> Self {
        let mut bps: Vec<f64> = fs.iter().flat_map(|f| f.breakpoints().iter().copied()).collect();
        bps.sort_by(f64::total_cmp);
        bps.dedup();
        Self::new(&bps, refinement)
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn refinement(&self) -> usize {
        self.refinement
    }

    fn is_point(&self, x: f64) -> bool {
        self.points.binary_search_by(|p| p.total_cmp(&x)).is_ok()
    }
}

/// A candidate triple; `j` is `None` when `b` is the midpoint of `(a, c)`.
#[derive(Debug, Clone, Copy)]
pub struct Candidate {
    pub i: usize,
    pub j: Option<usize>,
    pub k: usize,
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

/// Which middle points a triple enumeration visits.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Middles {
    /// Every grid point strictly between `a` and `c`, plus the midpoint.
    All,
    /// Only `b = (a + c)/2`.
    MidpointOnly,
}

/// Maximum of `eval` over candidate triples, ties to the lexicographically
/// smallest `(a, b, c)`.
pub fn max_over_triples<F>(exec: Execution, grid: &CandidateGrid, middles: Middles, eval: F) -> Option<(f64, Triple)>
where
    F: Fn(&Candidate) -> Option<f64> + Sync + Send,
{
    let g = grid.points();
    let m = g.len();
    exec::max_by_payload(exec, m, |i| {
        let mut best = None;
        let mut offer = |cand: Candidate| {
            if let Some(v) = eval(&cand) {
                let t = Triple { a: cand.a, b: cand.b, c: cand.c };
                best = exec::better(best.take(), Some((v, t)));
            }
        };
        for k in i + 1..m {
            let (a, c) = (g[i], g[k]);
            let mid = 0.5 * (a + c);
            let mid_on_grid = grid.is_point(mid);
            if middles == Middles::All {
                for j in i + 1..k {
                    offer(Candidate { i, j: Some(j), k, a, b: g[j], c });
                }
            }
            if mid > a && mid < c && (middles == Middles::MidpointOnly || !mid_on_grid) {
                let j = if mid_on_grid { g.binary_search_by(|p| p.total_cmp(&mid)).ok() } else { None };
                offer(Candidate { i, j, k, a, b: mid, c });
            }
        }
        best
    })
}

/// Maximum of `eval` over grid pairs `(a, b)`, ties to the smallest `(a, b)`.
pub fn max_over_pairs<F>(exec: Execution, grid: &CandidateGrid, eval: F) -> Option<(f64, Interval)>
where
    F: Fn(usize, usize, f64, f64) -> Option<f64> + Sync + Send,
{
    let g = grid.points();
    let m = g.len();
    exec::max_by_payload(exec, m, |i| {
        let mut best = None;
        for k in i + 1..m {
            if let Some(v) = eval(i, k, g[i], g[k]) {
                best = exec::better(best, Some((v, (g[i], g[k]))));
            }
        }
        best
    })
    .map(|(v, (a, b))| (v, Interval { left: a, right: b }))
}

/// Upper-triangular table `T[i][k]` for `i < k` over grid indices.
#[derive(Debug, Clone)]
pub struct PairTable {
    m: usize,
    data: Vec<f64>,
}

impl PairTable {
    /// `f` is called once per pair.
    pub fn build<F>(exec: Execution, m: usize, f: F) -> Self
    where
        F: Fn(usize, usize) -> f64 + Sync + Send,
    {
        let rows = exec::map_range(exec, m, |i| (0..m).map(|k| if k > i { f(i, k) } else { 0.0 }).collect::<Vec<_>>());
        Self { m, data: rows.concat() }
    }

    /// `∫_{g_i}^{g_k} f` accumulated cell by cell (only positive summands).
    pub fn masses(exec: Execution, grid: &CandidateGrid, f: &StepFunction) -> Self {
        let g = grid.points();
        let cells: Vec<f64> = g.windows(2).map(|w| f.integrate_between(w[0], w[1])).collect();
        let m = g.len();
        let rows = exec::map_range(exec, m, |i| {
            let mut row = vec![0.0; m];
            let mut acc = 0.0;
            for k in i + 1..m {
                acc += cells[k - 1];
                row[k] = acc;
            }
            row
        });
        Self { m, data: rows.concat() }
    }

    #[inline]
    pub fn get(&self, i: usize, k: usize) -> f64 {
        self.data[i * self.m + k]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_nesting() {
        let bps = [0.0, 0.3, 1.7, 2.0];
        let g8 = CandidateGrid::new(&bps, 8);
        let g16 = CandidateGrid::new(&bps, 16);
        assert_eq!(g8.len(), 25);
        assert!(g8.points().iter().all(|p| g16.is_point(*p)));
    }

    #[test]
    fn triple_enumeration_counts() {
        let g = CandidateGrid::new(&[0.0, 1.0], 4);
        let count = std::sync::atomic::AtomicUsize::new(0);
        max_over_triples(Execution::Sequential, &g, Middles::All, |_| {
            count.fetch_add(1, std::sync::atomic::Ordering::Relaxed);
            Some(0.0)
        });
        // C(5,3) grid triples; midpoints of (0,.25),(0,.75),(.25,.5),(.25,1),(.5,.75),(.75,1) are off-grid
        assert_eq!(count.into_inner(), 10 + 6);
    }

    #[test]
    fn masses_table() {
        let f = StepFunction::new(vec![0.0, 1.0, 3.0], vec![2.0, 1.0]).unwrap();
        let g = CandidateGrid::new(f.breakpoints(), 2);
        let t = PairTable::masses(Execution::Sequential, &g, &f);
        assert_eq!(t.get(0, g.len() - 1), 4.0);
        assert_eq!(t.get(1, 3), 1.0 + 1.0);
    }
}
