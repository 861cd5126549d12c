use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// An open interval `(left, right)` with `left < right`.
///
/// Endpoints may be infinite only where documented (envelope tails and the
/// complement sets built in `decomp`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub left: f64,
    pub right: f64,
}

impl Interval {
    pub fn new(left: f64, right: f64) -> Result<Self> {
        if left.is_nan() || right.is_nan() || left >= right {
            return Err(Error::InvalidInterval(left, right));
        }
        Ok(Self { left, right })
    }

    pub fn length(&self) -> f64 {
        self.right - self.left
    }

    pub fn midpoint(&self) -> f64 {
        0.5 * (self.left + self.right)
    }

    pub fn contains(&self, x: f64) -> bool {
        self.left < x && x < self.right
    }

    /// Length of the overlap with `(lo, hi)`.
    pub fn overlap(&self, lo: f64, hi: f64) -> f64 {
        (self.right.min(hi) - self.left.max(lo)).max(0.0)
    }
}

/// A finite union of pairwise disjoint open intervals, kept sorted.
///
/// Touching intervals are merged, so `(0,1) ∪ (1,2)` is stored as `(0,2)`;
/// sets are only ever compared up to measure zero. In JSON each span is a
/// pair `[left, right]` with `null` for an unbounded end.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(into = "Vec<[Option<f64>; 2]>", from = "Vec<[Option<f64>; 2]>")]
pub struct IntervalSet {
    spans: Vec<(f64, f64)>,
}

impl From<IntervalSet> for Vec<[Option<f64>; 2]> {
    fn from(s: IntervalSet) -> Self {
        let finite = |x: f64| x.is_finite().then_some(x);
        s.spans.iter().map(|&(a, b)| [finite(a), finite(b)]).collect()
    }
}

impl From<Vec<[Option<f64>; 2]>> for IntervalSet {
    fn from(v: Vec<[Option<f64>; 2]>) -> Self {
        IntervalSet::from_spans(
            v.into_iter().map(|[a, b]| (a.unwrap_or(f64::NEG_INFINITY), b.unwrap_or(f64::INFINITY))),
        )
    }
}

impl IntervalSet {
    pub fn empty() -> Self {
        Self { spans: Vec::new() }
    }

    pub fn whole_line() -> Self {
        Self { spans: vec![(f64::NEG_INFINITY, f64::INFINITY)] }
    }

    /// Builds a set from arbitrary spans; empty or inverted spans are dropped.
    pub fn from_spans<I: IntoIterator<Item = (f64, f64)>>(spans: I) -> Self {
        let mut v: Vec<(f64, f64)> = spans.into_iter().filter(|(a, b)| a < b).collect();
        v.sort_by(|x, y| x.0.total_cmp(&y.0));
        let mut out: Vec<(f64, f64)> = Vec::with_capacity(v.len());
        for (a, b) in v {
            match out.last_mut() {
                Some(last) if a <= last.1 => last.1 = last.1.max(b),
                _ => out.push((a, b)),
            }
        }
        Self { spans: out }
    }

    pub fn spans(&self) -> &[(f64, f64)] {
        &self.spans
    }

    pub fn is_empty(&self) -> bool {
        self.spans.is_empty()
    }

    pub fn len(&self) -> usize {
        self.spans.len()
    }

    pub fn measure(&self) -> f64 {
        self.spans.iter().map(|(a, b)| b - a).sum()
    }

    /// Measure of the intersection with `(lo, hi)`.
    pub fn measure_within(&self, lo: f64, hi: f64) -> f64 {
        self.spans.iter().map(|&(a, b)| (b.min(hi) - a.max(lo)).max(0.0)).sum()
    }

    pub fn contains(&self, x: f64) -> bool {
        let i = self.spans.partition_point(|s| s.1 <= x);
        i < self.spans.len() && self.spans[i].0 < x
    }

    pub fn complement(&self) -> Self {
        let mut out = Vec::with_capacity(self.spans.len() + 1);
        let mut cursor = f64::NEG_INFINITY;
        for &(a, b) in &self.spans {
            if a > cursor {
                out.push((cursor, a));
            }
            cursor = b;
        }
        if cursor < f64::INFINITY {
            out.push((cursor, f64::INFINITY));
        }
        Self { spans: out }
    }

    pub fn intersect(&self, other: &Self) -> Self {
        let (mut i, mut j) = (0, 0);
        let mut out = Vec::new();
        while i < self.spans.len() && j < other.spans.len() {
            let (a1, b1) = self.spans[i];
            let (a2, b2) = other.spans[j];
            let lo = a1.max(a2);
            let hi = b1.min(b2);
            if lo < hi {
                out.push((lo, hi));
            }
            if b1 < b2 {
                i += 1;
            } else {
                j += 1;
            }
        }
        Self::from_spans(out)
    }

    pub fn intersect_span(&self, lo: f64, hi: f64) -> Self {
        self.intersect(&Self::from_spans([(lo, hi)]))
    }

    pub fn union(&self, other: &Self) -> Self {
        Self::from_spans(self.spans.iter().chain(other.spans.iter()).copied())
    }

    pub fn difference(&self, other: &Self) -> Self {
        self.intersect(&other.complement())
    }

    /// `inf (self ∩ (lo, hi))`, or `None` when the intersection is empty.
    pub fn infimum_within(&self, lo: f64, hi: f64) -> Option<f64> {
        self.spans.iter().find(|&&(a, b)| b > lo && a < hi).map(|&(a, _)| a.max(lo))
    }

    /// True when every span of `self` lies inside some span of `other`.
    pub fn is_subset_of(&self, other: &Self, slack: f64) -> bool {
        self.spans.iter().all(|&(a, b)| other.spans.iter().any(|&(c, d)| c <= a + slack && b <= d + slack))
    }
}
