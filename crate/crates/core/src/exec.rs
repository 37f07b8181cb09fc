use rayon::prelude::*;

/// Execution mode for the data-parallel phases.
///
/// `Parallel` runs on the current rayon pool; install a sized pool with
/// [`rayon::ThreadPool::install`] to control the thread count.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Exec {
    #[default]
    Serial,
    Parallel,
}

// Below this many items per task rayon's splitting overhead dominates.
const MIN_CHUNK: usize = 1024;

impl Exec {
    /// Fills `out[i] = f(i)` for every slot.
    pub(crate) fn fill<U, F>(self, out: &mut [U], f: F)
    where
        U: Send,
        F: Fn(usize) -> U + Sync + Send,
    {
        match self {
            Exec::Serial => out.iter_mut().enumerate().for_each(|(i, o)| *o = f(i)),
            Exec::Parallel => out
                .par_iter_mut()
                .with_min_len(MIN_CHUNK)
                .enumerate()
                .for_each(|(i, o)| *o = f(i)),
        }
    }

    /// Indices in `0..n` satisfying `pred`, in increasing order.
    pub(crate) fn filter_indices<F>(self, n: usize, pred: F) -> Vec<usize>
    where
        F: Fn(usize) -> bool + Sync + Send,
    {
        match self {
            Exec::Serial => (0..n).filter(|&i| pred(i)).collect(),
            Exec::Parallel => (0..n)
                .into_par_iter()
                .with_min_len(MIN_CHUNK)
                .filter(|&i| pred(i))
                .collect(),
        }
    }

    pub(crate) fn map<U, F>(self, items: &[usize], f: F) -> Vec<U>
    where
        U: Send,
        F: Fn(usize) -> U + Sync + Send,
    {
        match self {
            Exec::Serial => items.iter().map(|&i| f(i)).collect(),
            Exec::Parallel => items.par_iter().map(|&i| f(i)).collect(),
        }
    }
}
