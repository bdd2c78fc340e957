//! Deterministic data-parallel primitives: the kernel launch, reduction,
//! prefix sum, key/value sort and stream compaction that LBVH construction
//! and the wavefront renderer are written against.
//!
//! Every primitive takes an [`Exec`]. [`Exec::Sequential`] runs the plain
//! single-threaded reference (a loop, a fold, `sort_unstable`) and is what the
//! parallel path is tested against. [`Exec::Parallel`] runs on the rayon pool
//! when the `parallel` feature is enabled and degrades to the same kernels
//! executed on the calling thread otherwise. Both return only once all work is
//! finished, so consecutive calls behave like kernels separated by a barrier.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::math::Aabb;

/// Execution schedule for the primitives in this module.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub enum Exec {
    Sequential,
    #[default]
    Parallel,
}

impl Exec {
    #[inline]
    pub fn is_parallel(self) -> bool {
        cfg!(feature = "parallel") && self == Exec::Parallel
    }
}

/// Sort key/value pair: a Morton code and the original primitive index.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MortonPair {
    pub code: u32,
    pub index: u32,
}

impl MortonPair {
    /// Code carried by padding entries; sinks to the tail of every sort.
    pub const SENTINEL_CODE: u32 = 0xFFFF_FFFF;

    pub const fn new(code: u32, index: u32) -> Self {
        Self { code, index }
    }

    #[inline]
    pub fn packed(self) -> u64 {
        (u64::from(self.code) << 32) | u64::from(self.index)
    }

    #[inline]
    pub fn from_packed(k: u64) -> Self {
        Self::new((k >> 32) as u32, k as u32)
    }
}

pub fn current_num_threads() -> usize {
    #[cfg(feature = "parallel")]
    return rayon::current_num_threads();

    #[cfg(not(feature = "parallel"))]
    return 1;
}

/// Runs `f` on a dedicated pool of `threads` workers.
pub fn with_threads<R: Send>(threads: usize, f: impl FnOnce() -> R + Send) -> R {
    #[cfg(feature = "parallel")]
    {
        match rayon::ThreadPoolBuilder::new().num_threads(threads.max(1)).build() {
            Ok(pool) => pool.install(f),
            Err(_) => f(),
        }
    }

    #[cfg(not(feature = "parallel"))]
    {
        let _ = threads;
        f()
    }
}

/// Caps the global worker pool. Only the first call in a process has effect.
pub fn configure_global_threads(threads: usize) {
    #[cfg(feature = "parallel")]
    {
        let _ = rayon::ThreadPoolBuilder::new().num_threads(threads.max(1)).build_global();
    }

    #[cfg(not(feature = "parallel"))]
    let _ = threads;
}

/// One-dimensional kernel launch: `body(i, &mut out[i])` for every index.
/// The body may only write through the slot it is handed.
pub fn parallel_for<T, F>(exec: Exec, out: &mut [T], body: F)
where
    T: Send,
    F: Fn(usize, &mut T) + Send + Sync,
{
    if exec.is_parallel() {
        #[cfg(feature = "parallel")]
        out.par_iter_mut().enumerate().for_each(|(i, v)| body(i, v));
        return;
    }
    out.iter_mut().enumerate().for_each(|(i, v)| body(i, v));
}

/// `(0..n).map(f).collect()`, in parallel when requested.
pub fn parallel_map<T, F>(exec: Exec, n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Send + Sync,
{
    if exec.is_parallel() {
        #[cfg(feature = "parallel")]
        return (0..n).into_par_iter().map(f).collect();
    }
    (0..n).map(f).collect()
}

/// Box enclosing every input box.
pub fn reduce_aabb(exec: Exec, boxes: &[Aabb]) -> Result<Aabb> {
    if boxes.is_empty() {
        return Err(Error::EmptyPrimitiveSet);
    }
    if exec.is_parallel() {
        #[cfg(feature = "parallel")]
        return Ok(boxes
            .par_iter()
            .with_min_len(1024)
            .fold(|| Aabb::EMPTY, |a, b| a.union(b))
            .reduce(|| Aabb::EMPTY, |a, b| a.union(&b)));
    }
    Ok(boxes.iter().fold(Aabb::EMPTY, |a, b| a.union(b)))
}

fn chunk_len(n: usize) -> usize {
    let parts = current_num_threads() * 4;
    n.div_ceil(parts).max(4096)
}

/// Exclusive prefix sum with wrapping `u32` addition.
pub fn exclusive_scan(exec: Exec, values: &[u32]) -> Vec<u32> {
    let mut out = vec![0u32; values.len()];
    if !exec.is_parallel() || values.len() <= 4096 {
        let mut acc = 0u32;
        for (o, &v) in out.iter_mut().zip(values) {
            *o = acc;
            acc = acc.wrapping_add(v);
        }
        return out;
    }
    #[cfg(feature = "parallel")]
    {
        let len = chunk_len(values.len());
        let sums: Vec<u32> = values
            .par_chunks(len)
            .map(|c| c.iter().fold(0u32, |a, &v| a.wrapping_add(v)))
            .collect();
        let mut offsets = Vec::with_capacity(sums.len());
        let mut acc = 0u32;
        for s in sums {
            offsets.push(acc);
            acc = acc.wrapping_add(s);
        }
        out.par_chunks_mut(len)
            .zip(values.par_chunks(len))
            .zip(offsets.par_iter())
            .for_each(|((o, v), &base)| {
                let mut acc = base;
                for (o, &v) in o.iter_mut().zip(v) {
                    *o = acc;
                    acc = acc.wrapping_add(v);
                }
            });
    }
    out
}

/// Sorts pairs ascending by `(code, index)`.
///
/// The parallel path is a bitonic network over the packed 64-bit key, run on
/// an array padded to the next power of two with sentinel keys; the padding
/// is dropped before returning. The sequential path is `sort_unstable`.
pub fn bitonic_sort_pairs(exec: Exec, pairs: &[MortonPair]) -> Vec<MortonPair> {
    let mut keys: Vec<u64> = pairs.iter().map(|p| p.packed()).collect();
    if exec == Exec::Sequential {
        keys.sort_unstable();
    } else {
        bitonic_sort_keys(exec, &mut keys);
    }
    keys.into_iter().map(MortonPair::from_packed).collect()
}

/// In-place bitonic sort of arbitrary-length `u64` keys (pads internally).
pub fn bitonic_sort_keys(exec: Exec, keys: &mut Vec<u64>) {
    let n = keys.len();
    if n < 2 {
        return;
    }
    let padded = n.next_power_of_two();
    keys.resize(padded, u64::MAX);
    let mut k = 2;
    while k <= padded {
        let mut j = k / 2;
        while j >= 1 {
            bitonic_stage(exec, keys, k, j);
            j /= 2;
        }
        k *= 2;
    }
    keys.truncate(n);
}

fn bitonic_stage(exec: Exec, keys: &mut [u64], k: usize, j: usize) {
    let body = |(c, chunk): (usize, &mut [u64])| {
        let ascending = (c * 2 * j) & k == 0;
        let (lo, hi) = chunk.split_at_mut(j);
        for (a, b) in lo.iter_mut().zip(hi.iter_mut()) {
            if (*a > *b) == ascending {
                std::mem::swap(a, b);
            }
        }
    };
    if exec.is_parallel() && keys.len() >= 8192 {
        #[cfg(feature = "parallel")]
        {
            let min_chunks = (4096 / (2 * j)).max(1);
            keys.par_chunks_mut(2 * j)
                .enumerate()
                .with_min_len(min_chunks)
                .for_each(body);
            return;
        }
    }
    keys.chunks_mut(2 * j).enumerate().for_each(body);
}

/// Stream compaction ("append"): keeps the items whose flag is set, in order.
/// Output slots come from an exclusive scan over the flags.
pub fn compact<T, F>(exec: Exec, items: &[T], keep: F) -> Vec<T>
where
    T: Clone + Send + Sync + Default,
    F: Fn(&T) -> bool + Send + Sync,
{
    let flags = parallel_map(exec, items.len(), |i| u32::from(keep(&items[i])));
    let slots = exclusive_scan(exec, &flags);
    let total = match (slots.last(), flags.last()) {
        (Some(&s), Some(&f)) => (s + f) as usize,
        _ => 0,
    };
    let mut out = vec![T::default(); total];
    let len = chunk_len(items.len());
    // Each input chunk owns a contiguous output range starting at its first slot.
    let mut pieces = Vec::new();
    let mut rest = out.as_mut_slice();
    let mut start = 0;
    while start < items.len() {
        let end = (start + len).min(items.len());
        let hi = if end == items.len() { total } else { slots[end] as usize };
        let (head, tail) = rest.split_at_mut(hi - slots[start] as usize);
        pieces.push((start, end, head));
        rest = tail;
        start = end;
    }
    let fill = |(s, e, dst): (usize, usize, &mut [T])| {
        let mut w = 0;
        for i in s..e {
            if flags[i] != 0 {
                dst[w] = items[i].clone();
                w += 1;
            }
        }
    };
    if exec.is_parallel() {
        #[cfg(feature = "parallel")]
        {
            pieces.into_par_iter().for_each(fill);
            return out;
        }
    }
    pieces.into_iter().for_each(fill);
    out
}
