use rayon::prelude::*;

/// Environment variable capping worker threads for sweeps and grid searches.
pub const THREADS_ENV: &str = "MILLERPOLE_THREADS";

/// Maps `f` over `items` in parallel, honouring the thread cap when set.
/// Output order matches input order.
pub fn par_map<T, R, F>(items: &[T], f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    let cap = std::env::var(THREADS_ENV)
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .filter(|&n| n > 0);
    match cap {
        Some(n) => match rayon::ThreadPoolBuilder::new().num_threads(n).build() {
            Ok(pool) => pool.install(|| items.par_iter().map(&f).collect()),
            Err(_) => items.iter().map(&f).collect(),
        },
        None => items.par_iter().map(&f).collect(),
    }
}
