//! Index-parallel maps used by the dense kernels.
//!
//! With the `parallel` feature the maps run on the rayon pool unless the
//! sequential mode is selected at runtime; without the feature they always
//! run in index order on the calling thread. Each mapped closure is a pure
//! function of its index and owns its reduction, so both modes produce
//! bitwise identical output.

use std::sync::atomic::{AtomicBool, Ordering};

static SEQUENTIAL: AtomicBool = AtomicBool::new(false);

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ExecMode {
    Parallel,
    Sequential,
}

pub fn set_mode(mode: ExecMode) {
    SEQUENTIAL.store(mode == ExecMode::Sequential, Ordering::SeqCst);
}

pub fn mode() -> ExecMode {
    if cfg!(feature = "parallel") && !SEQUENTIAL.load(Ordering::SeqCst) {
        ExecMode::Parallel
    } else {
        ExecMode::Sequential
    }
}

/// Size the global worker pool. Only the first call has an effect; later
/// calls (or a pool already built by rayon itself) are ignored.
pub fn configure_threads(threads: usize) {
    #[cfg(feature = "parallel")]
    {
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(threads.max(1))
            .build_global();
    }
    #[cfg(not(feature = "parallel"))]
    let _ = threads;
}

pub fn map_indexed<T, F>(len: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if mode() == ExecMode::Parallel {
        use rayon::prelude::*;
        return (0..len).into_par_iter().map(f).collect();
    }
    (0..len).map(f).collect()
}

/// Fill `out` in chunks of `chunk` elements; `f` gets the chunk index.
pub fn fill_chunks<T, F>(out: &mut [T], chunk: usize, f: F)
where
    T: Send,
    F: Fn(usize, &mut [T]) + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if mode() == ExecMode::Parallel {
        use rayon::prelude::*;
        out.par_chunks_mut(chunk).enumerate().for_each(|(i, c)| f(i, c));
        return;
    }
    for (i, c) in out.chunks_mut(chunk).enumerate() {
        f(i, c);
    }
}
