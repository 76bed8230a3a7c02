//! Deterministic parallel trial execution.
//!
//! Trial `i` draws only from `RngStream::new(seed, i)`, and results come back
//! in trial order, so every reduction over them is independent of the number
//! of workers and of scheduling.

use rayon::prelude::*;

use crate::error::{invalid, Result};

/// Runs `f(0..trials)` on `workers` threads (`None`: rayon's default).
pub fn run_trials<T, F>(trials: u64, workers: Option<usize>, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(u64) -> T + Sync + Send,
{
    match workers {
        Some(0) => Err(invalid("worker count must be positive")),
        Some(w) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(w)
                .build()
                .map_err(|e| invalid(format!("cannot start worker pool: {e}")))?;
            Ok(pool.install(|| (0..trials).into_par_iter().map(&f).collect()))
        }
        None => Ok((0..trials).into_par_iter().map(&f).collect()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stochastic::{gaussian_vector, RngStream};

    #[test]
    fn results_do_not_depend_on_worker_count() {
        let draw = |i: u64| gaussian_vector(3, &mut RngStream::new(9, i).rng()).unwrap();
        let one = run_trials(200, Some(1), draw).unwrap();
        let four = run_trials(200, Some(4), draw).unwrap();
        let default = run_trials(200, None, draw).unwrap();
        assert_eq!(one, four);
        assert_eq!(one, default);
        assert!(run_trials(1, Some(0), draw).is_err());
    }
}
