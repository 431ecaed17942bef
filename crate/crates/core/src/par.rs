//! Execution mode for the data-parallel loops of the crate.
//!
//! With the `parallel` feature enabled, [`Execution::Parallel`] dispatches to
//! rayon. Without it, both modes run the same sequential code, so callers can
//! pass either mode unconditionally.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Below this many items a parallel reduction costs more than it saves.
pub const PARALLEL_THRESHOLD: usize = 2048;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Execution {
    Sequential,
    Parallel,
}

impl Default for Execution {
    fn default() -> Self {
        if cfg!(feature = "parallel") {
            Execution::Parallel
        } else {
            Execution::Sequential
        }
    }
}

impl Execution {
    /// True when this mode will actually fan out across threads.
    pub fn is_parallel(self) -> bool {
        cfg!(feature = "parallel") && self == Execution::Parallel
    }

    /// Maps `f` over `items`, preserving order.
    pub fn map<T, R, F>(self, items: &[T], f: F) -> Vec<R>
    where
        T: Sync,
        R: Send,
        F: Fn(&T) -> R + Sync + Send,
    {
        #[cfg(feature = "parallel")]
        if self == Execution::Parallel {
            return items.par_iter().map(f).collect();
        }
        items.iter().map(f).collect()
    }

    /// Maps `f` over `0..n`, preserving order.
    pub fn map_range<R, F>(self, n: usize, f: F) -> Vec<R>
    where
        R: Send,
        F: Fn(usize) -> R + Sync + Send,
    {
        #[cfg(feature = "parallel")]
        if self == Execution::Parallel {
            return (0..n).into_par_iter().map(f).collect();
        }
        (0..n).map(f).collect()
    }

    /// Index and value of the maximum of `f(i)` over `0..n`, lowest index on
    /// ties. The reduction is associative, so the parallel result is
    /// bit-identical to the sequential one. Returns `None` for `n == 0`.
    pub fn argmax<F>(self, n: usize, f: F) -> Option<(usize, f64)>
    where
        F: Fn(usize) -> f64 + Sync + Send,
    {
        #[cfg(feature = "parallel")]
        if self == Execution::Parallel && n >= PARALLEL_THRESHOLD {
            return (0..n)
                .into_par_iter()
                .map(|i| (i, f(i)))
                .reduce_with(better);
        }
        (0..n).map(|i| (i, f(i))).reduce(better)
    }
}

fn better(a: (usize, f64), b: (usize, f64)) -> (usize, f64) {
    // NaN never wins; among equal values the lower index does.
    if b.1 > a.1 || (b.1 == a.1 && b.0 < a.0) || (a.1.is_nan() && !b.1.is_nan()) {
        b
    } else {
        a
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn argmax_breaks_ties_by_lowest_index() {
        let values = [1.0, 3.0, 2.0, 3.0, 3.0];
        for exec in [Execution::Sequential, Execution::Parallel] {
            assert_eq!(exec.argmax(values.len(), |i| values[i]), Some((1, 3.0)));
        }
    }

    #[test]
    fn parallel_argmax_matches_sequential_on_large_input() {
        let n = 50_000;
        let f = |i: usize| ((i * 7919) % 1013) as f64;
        assert_eq!(
            Execution::Sequential.argmax(n, f),
            Execution::Parallel.argmax(n, f)
        );
    }

    #[test]
    fn map_preserves_order() {
        let xs: Vec<usize> = (0..5000).collect();
        let ys = Execution::Parallel.map(&xs, |x| x * 2);
        assert!(ys.iter().enumerate().all(|(i, y)| *y == 2 * i));
    }
}
