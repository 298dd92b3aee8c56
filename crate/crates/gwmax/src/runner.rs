//! Parallel execution with rayon.

use gwmax_core::convergence::Executor;
use rayon::prelude::*;

use crate::CliError;

/// Runs convergence work items on the rayon pool, keeping input order.
#[derive(Debug, Clone, Copy, Default)]
pub struct Rayon;

impl Executor for Rayon {
    fn map<T, R, F>(&self, items: Vec<T>, f: F) -> Vec<R>
    where
        T: Send,
        R: Send,
        F: Fn(T) -> R + Send + Sync,
    {
        items.into_par_iter().map(f).collect()
    }
}

/// Limit the global pool to `threads` workers. Has no effect once the pool
/// is running.
pub fn init_threads(threads: Option<usize>) -> Result<(), CliError> {
    if let Some(n) = threads {
        if n == 0 {
            return Err(CliError::Input("--threads must be at least 1".into()));
        }
        // a second call in the same process finds the pool already built
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    Ok(())
}

/// Items per parallel block when producing ordered output.
pub const BLOCK: u64 = 1024;

/// Compute `f(0), …, f(count - 1)` in parallel blocks and hand each result to
/// `sink` in index order. Stops at the first error.
pub fn ordered<R, F, S>(count: u64, f: F, mut sink: S) -> Result<(), CliError>
where
    R: Send,
    F: Fn(u64) -> Result<R, CliError> + Send + Sync,
    S: FnMut(R) -> Result<(), CliError>,
{
    let mut start = 0;
    while start < count {
        let end = (start + BLOCK).min(count);
        let block: Vec<Result<R, CliError>> = (start..end).into_par_iter().map(&f).collect();
        for r in block {
            sink(r?)?;
        }
        start = end;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ordered_keeps_index_order() {
        let mut seen = Vec::new();
        ordered(3000, |i| Ok(i * 2), |r| {
            seen.push(r);
            Ok(())
        })
        .unwrap();
        assert_eq!(seen, (0..3000).map(|i| i * 2).collect::<Vec<_>>());
    }

    #[test]
    fn ordered_stops_at_errors() {
        let mut seen = 0;
        let r = ordered(10, |i| if i == 4 { Err(CliError::Failed("x".into())) } else { Ok(i) }, |_| {
            seen += 1;
            Ok(())
        });
        assert!(r.is_err());
        assert_eq!(seen, 4);
    }

    #[test]
    fn rayon_map_matches_sequential() {
        let items: Vec<u64> = (0..500).collect();
        let a = Rayon.map(items.clone(), |x| x * x);
        let b = gwmax_core::convergence::Sequential.map(items, |x| x * x);
        assert_eq!(a, b);
    }
}
