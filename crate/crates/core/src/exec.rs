//! Data-parallel map over independent grid points.
//!
//! With the `parallel` feature the map runs on rayon; `RELCHAR_THREADS`
//! sets the pool size (`1` forces the sequential path). Output order always
//! follows input order.

use serde::{Deserialize, Serialize};

pub const THREADS_ENV: &str = "RELCHAR_THREADS";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ExecMode {
    Sequential,
    /// `None` uses the global rayon pool.
    Parallel(Option<usize>),
}

impl ExecMode {
    pub fn from_env() -> Self {
        let n = std::env::var(THREADS_ENV).ok().and_then(|s| s.trim().parse::<usize>().ok());
        if !cfg!(feature = "parallel") {
            return ExecMode::Sequential;
        }
        match n {
            Some(1) => ExecMode::Sequential,
            Some(0) | None => ExecMode::Parallel(None),
            Some(k) => ExecMode::Parallel(Some(k)),
        }
    }
}

impl Default for ExecMode {
    fn default() -> Self {
        ExecMode::from_env()
    }
}

pub fn map_ordered<T, R, F>(mode: ExecMode, items: &[T], f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    match mode {
        ExecMode::Sequential => items.iter().map(f).collect(),
        ExecMode::Parallel(threads) => par_map(threads, items, f),
    }
}

#[cfg(feature = "parallel")]
fn par_map<T, R, F>(threads: Option<usize>, items: &[T], f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    use rayon::prelude::*;
    let run = || items.par_iter().map(&f).collect();
    match threads {
        None => run(),
        Some(k) => match rayon::ThreadPoolBuilder::new().num_threads(k).build() {
            Ok(pool) => pool.install(run),
            Err(_) => run(),
        },
    }
}

#[cfg(not(feature = "parallel"))]
fn par_map<T, R, F>(_threads: Option<usize>, items: &[T], f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    items.iter().map(f).collect()
}
