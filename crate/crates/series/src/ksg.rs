//! Kraskov–Stögbauer–Grassberger mutual information (algorithm 1).

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{domain, Error, Result};
use crate::kdtree::KdTree;
use crate::special::digamma;

pub const DEFAULT_K: usize = 3;
pub const DEFAULT_JITTER: f64 = 1e-10;

/// `n` samples of a `d`-dimensional variable, row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct PointCloud {
    n: usize,
    d: usize,
    data: Vec<f64>,
}

impl PointCloud {
    pub fn new(n: usize, d: usize, data: Vec<f64>) -> Result<PointCloud> {
        if d == 0 {
            return domain("point dimension must be at least 1");
        }
        if data.len() != n * d {
            return domain(format!(
                "expected {} values for {n} × {d}, got {}",
                n * d,
                data.len()
            ));
        }
        if data.iter().any(|v| !v.is_finite()) {
            return domain("point cloud contains non-finite values");
        }
        Ok(PointCloud { n, d, data })
    }

    /// Cloud whose dimensions are the given equal-length columns.
    pub fn from_columns(columns: &[&[f64]]) -> Result<PointCloud> {
        let Some(first) = columns.first() else {
            return domain("at least one column is required");
        };
        let n = first.len();
        if columns.iter().any(|c| c.len() != n) {
            return domain("columns differ in length");
        }
        let d = columns.len();
        let mut data = Vec::with_capacity(n * d);
        for i in 0..n {
            data.extend(columns.iter().map(|c| c[i]));
        }
        PointCloud::new(n, d, data)
    }

    pub fn samples(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.data[i * self.d..(i + 1) * self.d]
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.n).map(|i| self.data[i * self.d + j]).collect()
    }

    /// Points of `self` followed by the coordinates of `other`.
    pub fn concat(&self, other: &PointCloud) -> Result<PointCloud> {
        if self.n != other.n {
            return domain(format!("sample counts differ: {} vs {}", self.n, other.n));
        }
        let d = self.d + other.d;
        let mut data = Vec::with_capacity(self.n * d);
        for i in 0..self.n {
            data.extend_from_slice(self.point(i));
            data.extend_from_slice(other.point(i));
        }
        PointCloud::new(self.n, d, data)
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Result<PointCloud> {
        PointCloud::new(self.n, self.d, self.data.iter().map(|&v| f(v)).collect())
    }
}

/// KSG estimate of `I(X;Y)` in nats with `k` neighbors, max-norm in the joint space.
pub fn ksg_mi(x: &PointCloud, y: &PointCloud, k: usize) -> Result<f64> {
    let n = x.samples();
    if y.samples() != n {
        return domain(format!("sample counts differ: {n} vs {}", y.samples()));
    }
    if k == 0 {
        return domain("k must be at least 1");
    }
    if n <= k {
        return domain(format!("KSG needs more than k = {k} samples, got {n}"));
    }
    let joint = x.concat(y)?;
    let tree_z = KdTree::new(joint.data(), joint.dim());
    let tree_x = KdTree::new(x.data(), x.dim());
    let tree_y = KdTree::new(y.data(), y.dim());
    let terms = (0..n)
        .into_par_iter()
        .map(|i| {
            let eps = tree_z.kth_neighbor_distance(i, k);
            if eps <= 0.0 {
                return Err(Error::Degenerate(format!(
                    "sample {i} has {k} coincident neighbors; jitter the inputs"
                )));
            }
            // counts include the point itself
            let nx = tree_x.count_within(x.point(i), eps);
            let ny = tree_y.count_within(y.point(i), eps);
            Ok(digamma(nx as f64) + digamma(ny as f64))
        })
        .collect::<Result<Vec<f64>>>()?;
    let mean = terms.iter().sum::<f64>() / n as f64;
    Ok(digamma(k as f64) + digamma(n as f64) - mean)
}

/// Add uniform noise in `±amplitude · scale` per dimension, where `scale`
/// is the column's standard deviation, or `max(|mean|, 1)` for a constant
/// column.
pub fn jitter(p: &PointCloud, relative_amplitude: f64, seed: u64) -> Result<PointCloud> {
    if !(relative_amplitude >= 0.0 && relative_amplitude.is_finite()) {
        return domain(format!("invalid jitter amplitude {relative_amplitude}"));
    }
    if relative_amplitude == 0.0 {
        return Ok(p.clone());
    }
    let n = p.samples() as f64;
    let scales: Vec<f64> = (0..p.dim())
        .map(|j| {
            let col = p.column(j);
            let mean = col.iter().sum::<f64>() / n;
            let var = col.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
            if var > 0.0 {
                var.sqrt()
            } else {
                mean.abs().max(1.0)
            }
        })
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let data = p
        .data()
        .iter()
        .enumerate()
        .map(|(idx, &v)| v + relative_amplitude * scales[idx % p.dim()] * rng.random_range(-1.0..1.0))
        .collect();
    PointCloud::new(p.samples(), p.dim(), data)
}
