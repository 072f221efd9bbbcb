//! Data-parallel map helpers. With the `parallel` feature (default) these
//! fan out over rayon; without it they degrade to plain sequential loops.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Maps `f` over the slice, in parallel when the `parallel` feature is on.
/// Output order always matches input order.
pub fn map_slice<T, U, F>(items: &[T], f: F) -> Vec<U>
where
    T: Sync,
    U: Send,
    F: Fn(&T) -> U + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        items.par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        items.iter().map(f).collect()
    }
}

/// Like [`map_slice`] but hands `f` the item index as well, for callers that
/// derive a per-item rng stream from the index.
pub fn map_indexed<T, U, F>(items: &[T], f: F) -> Vec<U>
where
    T: Sync,
    U: Send,
    F: Fn(usize, &T) -> U + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        items.par_iter().enumerate().map(|(i, t)| f(i, t)).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        items.iter().enumerate().map(|(i, t)| f(i, t)).collect()
    }
}

/// Always-sequential variant of [`map_slice`], kept callable regardless of
/// features so benches can compare the two paths directly.
pub fn map_slice_seq<T, U, F>(items: &[T], f: F) -> Vec<U>
where
    F: Fn(&T) -> U,
{
    items.iter().map(f).collect()
}

/// Runs `f` inside a worker pool of the given size; 0 means the library
/// default. Without the `parallel` feature the count is ignored.
pub fn with_workers<R, F>(workers: usize, f: F) -> R
where
    R: Send,
    F: FnOnce() -> R + Send,
{
    #[cfg(feature = "parallel")]
    {
        if workers == 0 {
            f()
        } else {
            rayon::ThreadPoolBuilder::new()
                .num_threads(workers)
                .build()
                .expect("failed to build worker pool")
                .install(f)
        }
    }
    #[cfg(not(feature = "parallel"))]
    {
        let _ = workers;
        f()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn map_preserves_order() {
        let xs: Vec<u32> = (0..1000).collect();
        let doubled = map_slice(&xs, |x| x * 2);
        assert_eq!(doubled, xs.iter().map(|x| x * 2).collect::<Vec<_>>());
        assert_eq!(doubled, map_slice_seq(&xs, |x| x * 2));
    }

    #[test]
    fn indexed_map_sees_correct_indices() {
        let xs = vec!["a", "b", "c"];
        let out = map_indexed(&xs, |i, s| format!("{i}:{s}"));
        assert_eq!(out, vec!["0:a", "1:b", "2:c"]);
    }

    #[test]
    fn with_workers_runs_closure() {
        let sum = with_workers(2, || map_slice(&[1, 2, 3], |x| x * x).iter().sum::<i32>());
        assert_eq!(sum, 14);
    }
}
