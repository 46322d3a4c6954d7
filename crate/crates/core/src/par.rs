//! Small helpers that switch to rayon above a size threshold.
//!
//! Both paths produce identical, order-preserving results, so the choice never
//! changes output.

use rayon::prelude::*;

/// Below this many items a loop runs on the calling thread.
pub const PAR_CUTOFF: usize = 4096;

pub fn map<T, R, F>(items: &[T], f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    if items.len() >= PAR_CUTOFF {
        items.par_iter().map(f).collect()
    } else {
        items.iter().map(f).collect()
    }
}

pub fn for_each_mut<T, F>(items: &mut [T], f: F)
where
    T: Send,
    F: Fn(&mut T) + Sync + Send,
{
    if items.len() >= PAR_CUTOFF {
        items.par_iter_mut().for_each(f);
    } else {
        items.iter_mut().for_each(f);
    }
}

/// Concatenates per-item outputs in item order.
pub fn flat_map<T, R, I, F>(items: &[T], f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    I: IntoIterator<Item = R>,
    I::IntoIter: Send,
    F: Fn(&T) -> I + Sync + Send,
{
    if items.len() >= PAR_CUTOFF {
        items.par_iter().flat_map_iter(f).collect()
    } else {
        items.iter().flat_map(f).collect()
    }
}

pub fn sum_u64<T, F>(items: &[T], f: F) -> u64
where
    T: Sync,
    F: Fn(&T) -> u64 + Sync + Send,
{
    if items.len() >= PAR_CUTOFF {
        items.par_iter().map(f).sum()
    } else {
        items.iter().map(f).sum()
    }
}
