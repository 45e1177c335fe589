//! Order-independent reductions over indexed work units.
//!
//! Work is split into fixed-size chunks; chunk results are collected in index
//! order and combined sequentially, so results do not depend on the thread
//! count or scheduling.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Pairwise (cascade) summation.
pub fn pairwise_sum(values: &[f64]) -> f64 {
    match values.len() {
        0 => 0.0,
        1 => values[0],
        n if n <= 8 => values.iter().sum(),
        n => {
            let (a, b) = values.split_at(n / 2);
            pairwise_sum(a) + pairwise_sum(b)
        }
    }
}

/// Streaming mean and second central moment (Welford), mergeable in order.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Moments {
    pub count: u64,
    pub mean: f64,
    pub m2: f64,
    /// Largest `|x|` seen.
    pub max_abs: f64,
}

impl Moments {
    pub fn push(&mut self, x: f64) {
        self.count += 1;
        let delta = x - self.mean;
        self.mean += delta / self.count as f64;
        self.m2 += delta * (x - self.mean);
        self.max_abs = self.max_abs.max(x.abs());
    }

    /// Chan et al. combination of two disjoint sets.
    pub fn merge(&self, other: &Self) -> Self {
        if self.count == 0 {
            return *other;
        }
        if other.count == 0 {
            return *self;
        }
        let count = self.count + other.count;
        let delta = other.mean - self.mean;
        let (na, nb, n) = (self.count as f64, other.count as f64, count as f64);
        Self {
            count,
            mean: self.mean + delta * nb / n,
            m2: self.m2 + other.m2 + delta * delta * na * nb / n,
            max_abs: self.max_abs.max(other.max_abs),
        }
    }

    /// Unbiased sample variance.
    pub fn variance(&self) -> f64 {
        if self.count < 2 {
            0.0
        } else {
            self.m2 / (self.count - 1) as f64
        }
    }

    /// Standard error of the mean.
    pub fn std_error(&self) -> f64 {
        if self.count < 2 {
            0.0
        } else {
            (self.variance() / self.count as f64).sqrt()
        }
    }
}

pub const DEFAULT_CHUNK: usize = 256;

/// Runs `eval(index)` for `index in 0..n`, each returning `width` values, and
/// reduces to per-component moments. Deterministic for fixed `n`, `chunk`.
pub fn ordered_moments<F, E>(n: u64, width: usize, chunk: usize, eval: F) -> Result<Vec<Moments>, E>
where
    F: Fn(u64) -> Result<Vec<f64>, E> + Sync,
    E: Send,
{
    let chunk = chunk.max(1) as u64;
    let n_chunks = n.div_ceil(chunk);
    let parts: Vec<Vec<Moments>> = (0..n_chunks)
        .into_par_iter()
        .map(|c| {
            let mut acc = vec![Moments::default(); width];
            for i in c * chunk..((c + 1) * chunk).min(n) {
                let values = eval(i)?;
                debug_assert_eq!(values.len(), width);
                for (m, v) in acc.iter_mut().zip(values) {
                    m.push(v);
                }
            }
            Ok(acc)
        })
        .collect::<Result<_, E>>()?;
    Ok(parts.iter().fold(vec![Moments::default(); width], |acc, part| {
        acc.iter().zip(part).map(|(a, b)| a.merge(b)).collect()
    }))
}

/// Ordered per-component sums `sum_i values(i)`.
pub fn ordered_sums<F, E>(n: u64, width: usize, chunk: usize, eval: F) -> Result<Vec<f64>, E>
where
    F: Fn(u64) -> Result<Vec<f64>, E> + Sync,
    E: Send,
{
    let chunk = chunk.max(1) as u64;
    let n_chunks = n.div_ceil(chunk);
    let parts: Vec<Vec<f64>> = (0..n_chunks)
        .into_par_iter()
        .map(|c| {
            let mut acc = vec![0.0; width];
            for i in c * chunk..((c + 1) * chunk).min(n) {
                for (a, v) in acc.iter_mut().zip(eval(i)?) {
                    *a += v;
                }
            }
            Ok(acc)
        })
        .collect::<Result<_, E>>()?;
    Ok((0..width)
        .map(|k| pairwise_sum(&parts.iter().map(|p| p[k]).collect::<Vec<_>>()))
        .collect())
}

/// Ordered weighted sums `sum_i w_i values(i)` together with the largest
/// unweighted `|values(i)|` per component.
pub fn ordered_weighted<F, E>(
    n: u64,
    width: usize,
    chunk: usize,
    eval: F,
) -> Result<(Vec<f64>, Vec<f64>), E>
where
    F: Fn(u64) -> Result<(f64, Vec<f64>), E> + Sync,
    E: Send,
{
    let chunk = chunk.max(1) as u64;
    let n_chunks = n.div_ceil(chunk);
    let parts: Vec<(Vec<f64>, Vec<f64>)> = (0..n_chunks)
        .into_par_iter()
        .map(|c| {
            let mut acc = vec![0.0; width];
            let mut max = vec![0.0f64; width];
            for i in c * chunk..((c + 1) * chunk).min(n) {
                let (w, values) = eval(i)?;
                for ((a, m), v) in acc.iter_mut().zip(max.iter_mut()).zip(values) {
                    *a += w * v;
                    *m = m.max(v.abs());
                }
            }
            Ok((acc, max))
        })
        .collect::<Result<_, E>>()?;
    let sums = (0..width)
        .map(|k| pairwise_sum(&parts.iter().map(|p| p.0[k]).collect::<Vec<_>>()))
        .collect();
    let max = (0..width)
        .map(|k| parts.iter().map(|p| p.1[k]).fold(0.0, f64::max))
        .collect();
    Ok((sums, max))
}
