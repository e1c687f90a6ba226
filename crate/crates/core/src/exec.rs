//! Per-index work distribution. With the `parallel` feature (default) the
//! `Parallel` mode fans out over rayon's pool; without it every mode runs
//! sequentially.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Exec {
    Sequential,
    #[default]
    Parallel,
}

impl Exec {
    /// Maps `f` over `lo..hi`, preserving index order in the output.
    pub fn map_range<T, F>(self, lo: i64, hi: i64, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(i64) -> T + Sync + Send,
    {
        let len = (hi - lo).max(0) as usize;
        match self {
            #[cfg(feature = "parallel")]
            Exec::Parallel => (0..len).into_par_iter().map(|i| f(lo + i as i64)).collect(),
            _ => (0..len).map(|i| f(lo + i as i64)).collect(),
        }
    }

    /// Maps `f` over a slice, preserving order.
    pub fn map_slice<S, T, F>(self, items: &[S], f: F) -> Vec<T>
    where
        S: Sync,
        T: Send,
        F: Fn(&S) -> T + Sync + Send,
    {
        match self {
            #[cfg(feature = "parallel")]
            Exec::Parallel => items.par_iter().map(f).collect(),
            _ => items.iter().map(f).collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn modes_agree_and_keep_order() {
        let seq = Exec::Sequential.map_range(-3, 40, |n| n * n);
        let par = Exec::Parallel.map_range(-3, 40, |n| n * n);
        assert_eq!(seq, par);
        assert_eq!(seq[0], 9);
        assert!(Exec::Parallel.map_range(5, 2, |n| n).is_empty());
        assert_eq!(Exec::Parallel.map_slice(&[1, 2, 3], |x| x + 1), vec![2, 3, 4]);
    }
}
