//! Data-parallel helpers with a sequential fallback.
//!
//! Every parallel entry point takes an [`Execution`] so callers (and the
//! benches) can pick the mode at run time. Without the `parallel` feature
//! `Execution::Parallel` silently runs sequentially.
//!
//! Only order-independent reductions are parallelised: maps collect in input
//! order, and maxima break ties on the smallest index, so results are
//! bit-identical across modes and thread counts.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Execution {
    Sequential,
    #[default]
    Parallel,
}

impl Execution {
    pub fn is_parallel(self) -> bool {
        cfg!(feature = "parallel") && self == Execution::Parallel
    }
}

/// Maps `f` over `0..n`, preserving order.
pub fn map_range<T, F>(exec: Execution, n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if exec.is_parallel() {
        return (0..n).into_par_iter().map(f).collect();
    }
    let _ = exec;
    (0..n).map(f).collect()
}

/// Maps `f` over a slice, preserving order.
pub fn map_slice<S, T, F>(exec: Execution, items: &[S], f: F) -> Vec<T>
where
    S: Sync,
    T: Send,
    F: Fn(&S) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if exec.is_parallel() {
        return items.par_iter().map(f).collect();
    }
    let _ = exec;
    items.iter().map(f).collect()
}

/// Runs `f` on each index in `0..n` and keeps the best `(value, payload)`.
///
/// Ties (equal values) go to the smaller index, which makes the reduction
/// deterministic regardless of how the range is split.
pub fn max_by_index<T, F>(exec: Execution, n: usize, f: F) -> Option<(f64, T)>
where
    T: Send,
    F: Fn(usize) -> Option<(f64, T)> + Sync + Send,
{
    let pick = |a: Option<(usize, f64, T)>, b: Option<(usize, f64, T)>| match (a, b) {
        (None, x) | (x, None) => x,
        (Some(a), Some(b)) => {
            if b.1 > a.1 || (b.1 == a.1 && b.0 < a.0) {
                Some(b)
            } else {
                Some(a)
            }
        }
    };
    #[cfg(feature = "parallel")]
    if exec.is_parallel() {
        return (0..n)
            .into_par_iter()
            .map(|i| f(i).map(|(v, t)| (i, v, t)))
            .reduce(|| None, pick)
            .map(|(_, v, t)| (v, t));
    }
    let _ = exec;
    (0..n).map(|i| f(i).map(|(v, t)| (i, v, t))).fold(None, pick).map(|(_, v, t)| (v, t))
}

/// Runs `f` on each index in `0..n` and keeps the largest value.
///
/// Ties go to the smaller payload, so the result does not depend on how the
/// range is split. NaN values are ignored.
pub fn max_by_payload<T, F>(exec: Execution, n: usize, f: F) -> Option<(f64, T)>
where
    T: Send + PartialOrd,
    F: Fn(usize) -> Option<(f64, T)> + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if exec.is_parallel() {
        return (0..n).into_par_iter().map(f).reduce(|| None, better);
    }
    let _ = exec;
    (0..n).map(f).fold(None, better)
}

/// The larger of two candidates, ties to the smaller payload.
pub fn better<T: PartialOrd>(a: Option<(f64, T)>, b: Option<(f64, T)>) -> Option<(f64, T)> {
    match (a, b) {
        (None, x) | (x, None) => x.filter(|c| !c.0.is_nan()),
        (Some(a), Some(b)) => {
            if b.0.is_nan() {
                return Some(a);
            }
            if a.0.is_nan() || b.0 > a.0 || (b.0 == a.0 && b.1 < a.1) {
                Some(b)
            } else {
                Some(a)
            }
        }
    }
}

/// Runs `f` on a dedicated pool of `threads` workers; `None` keeps the global
/// pool. Without the `parallel` feature this just calls `f`.
pub fn with_threads<R: Send>(threads: Option<usize>, f: impl FnOnce() -> R + Send) -> R {
    #[cfg(feature = "parallel")]
    if let Some(n) = threads {
        if let Ok(pool) = rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build() {
            return pool.install(f);
        }
    }
    let _ = threads;
    f()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn modes_agree() {
        let f = |i: usize| Some((((i * 37) % 11) as f64, i));
        let a = max_by_index(Execution::Sequential, 100, f);
        let b = max_by_index(Execution::Parallel, 100, f);
        assert_eq!(a, b);
        let first = (0..100).find(|&i| (i * 37) % 11 == 10).unwrap();
        assert_eq!(a.unwrap().1, first);
        let m1 = map_range(Execution::Sequential, 50, |i| i * i);
        let m2 = map_range(Execution::Parallel, 50, |i| i * i);
        assert_eq!(m1, m2);
    }

    #[test]
    fn payload_tie_break() {
        let f = |i: usize| Some(((i % 3) as f64, 100 - i));
        let a = max_by_payload(Execution::Sequential, 30, f);
        let b = max_by_payload(Execution::Parallel, 30, f);
        assert_eq!(a, b);
        assert_eq!(a.unwrap().1, 100 - 29);
        assert_eq!(better(Some((f64::NAN, 1)), Some((0.0, 2))), Some((0.0, 2)));
    }

    #[test]
    fn empty_range_has_no_max() {
        assert!(max_by_index(Execution::Parallel, 0, |i| Some((i as f64, ()))).is_none());
    }
}
