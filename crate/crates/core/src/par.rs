//! Element-loop parallelism.
//!
//! With the `parallel` feature the helpers here fan out over rayon; without
//! it, or inside a [`sequential`] scope, they run as plain iterators. Every
//! helper returns results in index order, so reductions performed by the
//! caller are bitwise independent of the worker count.

use std::cell::Cell;

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Below this many items the rayon overhead outweighs the work.
const MIN_PARALLEL_LEN: usize = 512;

thread_local! {
    static FORCE_SEQUENTIAL: Cell<bool> = const { Cell::new(false) };
}

/// Run `f` with every helper in this module forced onto the sequential path.
pub fn sequential<R>(f: impl FnOnce() -> R) -> R {
    let previous = FORCE_SEQUENTIAL.with(|flag| flag.replace(true));
    let out = f();
    FORCE_SEQUENTIAL.with(|flag| flag.set(previous));
    out
}

/// Whether calls made from this thread would currently fan out.
pub fn is_parallel() -> bool {
    cfg!(feature = "parallel") && !FORCE_SEQUENTIAL.with(|flag| flag.get())
}

/// `(0..len).map(f).collect()`, possibly in parallel.
pub fn map_range<T, F>(len: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if is_parallel() && len >= MIN_PARALLEL_LEN {
        return (0..len).into_par_iter().map(f).collect();
    }
    (0..len).map(f).collect()
}

/// `items.iter().map(f).collect()`, possibly in parallel.
pub fn map_slice<S, T, F>(items: &[S], f: F) -> Vec<T>
where
    S: Sync,
    T: Send,
    F: Fn(&S) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if is_parallel() && items.len() >= MIN_PARALLEL_LEN {
        return items.par_iter().map(f).collect();
    }
    items.iter().map(f).collect()
}

/// Apply `f` to every element of `items` together with its index.
pub fn for_each_mut<T, F>(items: &mut [T], f: F)
where
    T: Send,
    F: Fn(usize, &mut T) + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if is_parallel() && items.len() >= MIN_PARALLEL_LEN {
        items.par_iter_mut().enumerate().for_each(|(i, x)| f(i, x));
        return;
    }
    items.iter_mut().enumerate().for_each(|(i, x)| f(i, x));
}

/// Sort, possibly in parallel. The result is identical either way.
pub fn sort_unstable<T: Ord + Send>(items: &mut [T]) {
    #[cfg(feature = "parallel")]
    if is_parallel() && items.len() >= MIN_PARALLEL_LEN {
        items.par_sort_unstable();
        return;
    }
    items.sort_unstable();
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sequential_scope_restores_flag() {
        let outer = is_parallel();
        sequential(|| {
            assert!(!is_parallel());
            sequential(|| assert!(!is_parallel()));
            assert!(!is_parallel());
        });
        assert_eq!(is_parallel(), outer);
    }

    #[test]
    fn map_range_preserves_order() {
        let v = map_range(10_000, |i| i * 3);
        assert!(v.iter().enumerate().all(|(i, &x)| x == 3 * i));
        let w = sequential(|| map_range(10_000, |i| i * 3));
        assert_eq!(v, w);
    }
}
