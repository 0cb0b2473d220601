//! Monte Carlo runs are independent; with the `parallel` feature they are
//! spread over the rayon pool, otherwise executed in order. Results always
//! come back indexed by run.

use crate::error::Result;

#[cfg(feature = "parallel")]
pub fn map_runs<T, F>(n_runs: usize, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(usize) -> Result<T> + Sync + Send,
{
    use rayon::prelude::*;
    (0..n_runs).into_par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
pub fn map_runs<T, F>(n_runs: usize, f: F) -> Result<Vec<T>>
where
    F: Fn(usize) -> Result<T>,
{
    map_runs_sequential(n_runs, f)
}

/// Always sequential, regardless of features.
pub fn map_runs_sequential<T, F>(n_runs: usize, f: F) -> Result<Vec<T>>
where
    F: Fn(usize) -> Result<T>,
{
    (0..n_runs).map(f).collect()
}
