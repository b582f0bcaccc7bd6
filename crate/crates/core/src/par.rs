//! Order-preserving search over independent work items.
//!
//! With the `parallel` feature the items are evaluated on the rayon pool;
//! otherwise, or when the caller asks for it, they are evaluated in order on
//! the current thread. Both paths return the result of the earliest item
//! that produces one.

/// True when the crate was built with the rayon backend.
pub const PARALLEL_AVAILABLE: bool = cfg!(feature = "parallel");

/// Result of the first item (in slice order) for which `f` returns `Some`.
pub fn find_map_first<T, R, F>(items: &[T], parallel: bool, f: F) -> Option<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> Option<R> + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if parallel && items.len() > 1 {
        use rayon::prelude::*;
        return items.par_iter().find_map_first(f);
    }
    let _ = parallel;
    items.iter().find_map(f)
}

/// Applies `f` to every item, preserving order in the output.
pub fn map_collect<T, R, F>(items: &[T], parallel: bool, f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if parallel && items.len() > 1 {
        use rayon::prelude::*;
        return items.par_iter().map(f).collect();
    }
    let _ = parallel;
    items.iter().map(f).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn earliest_hit_wins_in_both_modes() {
        let items: Vec<u32> = (0..1000).collect();
        for par in [false, true] {
            let r = find_map_first(&items, par, |&i| (i % 7 == 3 && i > 100).then_some(i));
            assert_eq!(r, Some(101));
            assert_eq!(map_collect(&items, par, |&i| i * 2)[999], 1998);
        }
    }
}
