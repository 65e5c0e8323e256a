//! Trial-level execution. With the `parallel` feature, trials are spread over
//! a rayon pool; without it (or with one thread) they run in order on the
//! calling thread. Results are always returned in trial order, so reductions
//! over them are identical either way.

/// How many worker threads to use. `None` means every available core.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Threads(pub Option<usize>);

impl Threads {
    pub const SEQUENTIAL: Threads = Threads(Some(1));

    pub fn is_sequential(self) -> bool {
        !cfg!(feature = "parallel") || self.0 == Some(1)
    }
}

/// Evaluates `f(0..n)` and collects the results in index order.
pub fn map_trials<T, F>(n: u64, threads: Threads, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(u64) -> T + Sync + Send,
{
    if threads.is_sequential() {
        return (0..n).map(f).collect();
    }
    parallel::map(n, threads.0, f)
}

#[cfg(feature = "parallel")]
mod parallel {
    use rayon::prelude::*;

    pub(super) fn map<T, F>(n: u64, threads: Option<usize>, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(u64) -> T + Sync + Send,
    {
        let run = || (0..n).into_par_iter().map(&f).collect();
        match threads {
            None => run(),
            Some(t) => match rayon::ThreadPoolBuilder::new().num_threads(t).build() {
                Ok(pool) => pool.install(run),
                Err(_) => (0..n).map(&f).collect(),
            },
        }
    }
}

#[cfg(not(feature = "parallel"))]
mod parallel {
    pub(super) fn map<T, F>(n: u64, _threads: Option<usize>, f: F) -> Vec<T>
    where
        F: Fn(u64) -> T,
    {
        (0..n).map(f).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn order_is_preserved() {
        let seq = map_trials(1000, Threads::SEQUENTIAL, |i| i * i);
        let par = map_trials(1000, Threads(Some(4)), |i| i * i);
        let all = map_trials(1000, Threads::default(), |i| i * i);
        assert_eq!(seq, par);
        assert_eq!(seq, all);
    }
}
