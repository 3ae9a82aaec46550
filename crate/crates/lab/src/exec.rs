use legendre_core::exec::Executor;
use rayon::prelude::*;

/// Runs maps on a dedicated rayon pool; results keep input order.
pub struct Rayon {
    pool: rayon::ThreadPool,
}

impl Rayon {
    pub fn new(workers: usize) -> Result<Rayon, rayon::ThreadPoolBuildError> {
        Ok(Rayon { pool: rayon::ThreadPoolBuilder::new().num_threads(workers.max(1)).build()? })
    }
}

impl Executor for Rayon {
    fn map<T, R, F>(&self, items: Vec<T>, f: F) -> Vec<R>
    where
        T: Send,
        R: Send,
        F: Fn(T) -> R + Sync + Send,
    {
        self.pool.install(|| items.into_par_iter().map(f).collect())
    }
}
