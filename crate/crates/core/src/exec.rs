//! Sequential and data-parallel sweeps over index ranges.
//!
//! Every parallel path computes each output element from read-only inputs
//! only, so results are bitwise identical to the sequential sweep.

use crate::error::Result;

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Elements per rayon task.
#[cfg(feature = "parallel")]
const CHUNK: usize = 256;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Execution {
    Sequential,
    /// Falls back to sequential when the `parallel` feature is off.
    Parallel,
}

impl Default for Execution {
    fn default() -> Self {
        if cfg!(feature = "parallel") {
            Execution::Parallel
        } else {
            Execution::Sequential
        }
    }
}

/// `out[i] = f(offset + i)` for every slot.
pub(crate) fn fill_indexed<F>(exec: Execution, out: &mut [f64], offset: usize, f: F) -> Result<()>
where
    F: Fn(usize) -> Result<f64> + Sync + Send,
{
    match exec {
        #[cfg(feature = "parallel")]
        Execution::Parallel => out
            .par_chunks_mut(CHUNK)
            .enumerate()
            .try_for_each(|(c, chunk)| {
                let base = offset + c * CHUNK;
                for (j, slot) in chunk.iter_mut().enumerate() {
                    *slot = f(base + j)?;
                }
                Ok(())
            }),
        _ => {
            for (j, slot) in out.iter_mut().enumerate() {
                *slot = f(offset + j)?;
            }
            Ok(())
        }
    }
}

/// Index and value of the largest `f(i)` over `0..n`, lowest index on ties.
pub(crate) fn argmax<F>(exec: Execution, n: usize, f: F) -> Result<(usize, f64)>
where
    F: Fn(usize) -> Result<f64> + Sync + Send,
{
    let mut vals = vec![0.0; n];
    fill_indexed(exec, &mut vals, 0, f)?;
    let mut best = (0, f64::NEG_INFINITY);
    for (i, &v) in vals.iter().enumerate() {
        if v > best.1 || v.is_nan() {
            best = (i, v);
            if v.is_nan() {
                break;
            }
        }
    }
    Ok(best)
}
