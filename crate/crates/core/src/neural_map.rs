//! Topological neural maps with Gaussian tuning.
//!
//! A map is a flat set of neurons, each holding a preferred vector in the
//! unit hypercube. Activation of a neuron is a Gaussian of the Euclidean
//! distance between stimulus and preferred vector, so a neuron responds
//! maximally when the stimulus equals its preferred vector. Two plasticity
//! rules move preferred vectors: toward a stimulus (perceptual maps) and
//! toward the currently most active neuron (motor maps). The population
//! vector decodes an activation pattern back into stimulus space, and
//! iterating encode/decode to a fixed point categorizes a stimulus; the
//! fixed points are the map's attractors.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const DEFAULT_SIGMA: f64 = 0.05;
pub const DEFAULT_LEARNING_RATE: f64 = 0.001;
pub const DEFAULT_CATEGORIZE_TOL: f64 = 1e-6;
pub const DEFAULT_CATEGORIZE_MAX_ITER: usize = 1000;
pub const DEFAULT_GRID_RESOLUTION: usize = 25;
pub const DEFAULT_MERGE_TOL: f64 = 0.02;

/// One nonnegative activation value per neuron, aligned with map order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Activation {
    values: Vec<f64>,
}

impl Activation {
    pub fn from_values(values: Vec<f64>) -> Self {
        Activation { values }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn total(&self) -> f64 {
        self.values.iter().sum()
    }

    pub fn is_silent(&self) -> bool {
        self.values.iter().all(|&v| v == 0.0)
    }

    /// Index of the most active neuron; ties break to the lowest index.
    /// `None` when the pattern is all zero.
    pub fn winner(&self) -> Option<usize> {
        let mut best: Option<(usize, f64)> = None;
        for (i, &v) in self.values.iter().enumerate() {
            match best {
                Some((_, bv)) if v <= bv => {}
                _ if v > 0.0 => best = Some((i, v)),
                _ => {}
            }
        }
        best.map(|(i, _)| i)
    }
}

/// A set of neurons with preferred vectors in `[0,1]^dim`, a shared Gaussian
/// tuning width and a learning rate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NeuralMap {
    dim: usize,
    sigma: f64,
    learning_rate: f64,
    /// Flat preferred-vector storage, `len = neurons * dim`.
    vectors: Vec<f64>,
}

impl NeuralMap {
    /// Map with `neurons` preferred vectors drawn uniformly from `[0,1]^dim`.
    /// Draw order: neuron-major, coordinate-minor.
    pub fn new_random<R: Rng>(
        neurons: usize,
        dim: usize,
        sigma: f64,
        learning_rate: f64,
        rng: &mut R,
    ) -> Result<Self> {
        if neurons == 0 || dim == 0 {
            return Err(Error::Config(
                "neural map needs at least one neuron and one dimension".into(),
            ));
        }
        if sigma <= 0.0 {
            return Err(Error::Config(format!("sigma must be > 0, got {sigma}")));
        }
        let vectors = (0..neurons * dim).map(|_| rng.random::<f64>()).collect();
        Ok(NeuralMap {
            dim,
            sigma,
            learning_rate,
            vectors,
        })
    }

    /// Map from explicit preferred vectors (flat, neuron-major).
    pub fn from_vectors(
        dim: usize,
        sigma: f64,
        learning_rate: f64,
        vectors: Vec<f64>,
    ) -> Result<Self> {
        if dim == 0 || vectors.is_empty() || vectors.len() % dim != 0 {
            return Err(Error::Config(format!(
                "vector storage length {} is not a positive multiple of dim {}",
                vectors.len(),
                dim
            )));
        }
        if sigma <= 0.0 {
            return Err(Error::Config(format!("sigma must be > 0, got {sigma}")));
        }
        Ok(NeuralMap {
            dim,
            sigma,
            learning_rate,
            vectors,
        })
    }

    pub fn neurons(&self) -> usize {
        self.vectors.len() / self.dim
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn learning_rate(&self) -> f64 {
        self.learning_rate
    }

    pub fn vector(&self, i: usize) -> &[f64] {
        &self.vectors[i * self.dim..(i + 1) * self.dim]
    }

    pub fn vectors_flat(&self) -> &[f64] {
        &self.vectors
    }

    /// Iterator over preferred vectors as slices.
    pub fn iter_vectors(&self) -> impl Iterator<Item = &[f64]> {
        self.vectors.chunks_exact(self.dim)
    }

    fn check_dim(&self, s: &[f64]) -> Result<()> {
        if s.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: s.len(),
            });
        }
        Ok(())
    }

    fn dist_sq(&self, i: usize, s: &[f64]) -> f64 {
        self.vector(i)
            .iter()
            .zip(s)
            .map(|(v, x)| (v - x) * (v - x))
            .sum()
    }

    /// Gaussian tuning response of every neuron to stimulus `s`:
    /// `g[i] = 1/(sqrt(2*pi)*sigma) * exp(-0.5 * |v_i - s|^2 / sigma^2)`.
    pub fn activate(&self, s: &[f64]) -> Result<Activation> {
        self.check_dim(s)?;
        let peak = self.tuning_peak();
        let inv_two_sigma_sq = 0.5 / (self.sigma * self.sigma);
        let values = (0..self.neurons())
            .map(|i| peak * (-self.dist_sq(i, s) * inv_two_sigma_sq).exp())
            .collect();
        Ok(Activation::from_values(values))
    }

    /// Peak of the tuning curve, reached when the stimulus equals the
    /// preferred vector.
    pub fn tuning_peak(&self) -> f64 {
        1.0 / ((2.0 * std::f64::consts::PI).sqrt() * self.sigma)
    }

    /// Move every preferred vector toward the stimulus by a fraction
    /// `learning_rate * g[i]` of the remaining distance.
    ///
    /// The step factor is capped at 1 so the move stays a convex combination
    /// (the cap never binds for the tuning widths used here; it would only
    /// engage when `learning_rate * peak > 1`, i.e. sigma below ~4e-4).
    pub fn adapt_toward_stimulus(&mut self, s: &[f64], g: &Activation) -> Result<()> {
        self.check_dim(s)?;
        if g.len() != self.neurons() {
            return Err(Error::DimensionMismatch {
                expected: self.neurons(),
                got: g.len(),
            });
        }
        let lr = self.learning_rate;
        let dim = self.dim;
        for (chunk, &gi) in self.vectors.chunks_exact_mut(dim).zip(g.values()) {
            let f = (lr * gi).min(1.0);
            for (v, &x) in chunk.iter_mut().zip(s) {
                *v += f * (x - *v);
            }
        }
        Ok(())
    }

    /// Move every preferred vector toward the preferred vector of the most
    /// active neuron (ties to the lowest index) by `learning_rate * g[j]`.
    /// An all-zero pattern is a no-op.
    pub fn adapt_toward_winner(&mut self, g: &Activation) -> Result<()> {
        if g.len() != self.neurons() {
            return Err(Error::DimensionMismatch {
                expected: self.neurons(),
                got: g.len(),
            });
        }
        let Some(m) = g.winner() else {
            return Ok(());
        };
        let target: Vec<f64> = self.vector(m).to_vec();
        let lr = self.learning_rate;
        let dim = self.dim;
        for (chunk, &gj) in self.vectors.chunks_exact_mut(dim).zip(g.values()) {
            let f = (lr * gj).min(1.0);
            for (v, &x) in chunk.iter_mut().zip(&target) {
                *v += f * (x - *v);
            }
        }
        Ok(())
    }

    /// Activity-weighted mean of the preferred vectors:
    /// `pop(g) = sum_i g[i]*v_i / sum_i g[i]`.
    pub fn population_vector(&self, g: &Activation) -> Result<Vec<f64>> {
        if g.len() != self.neurons() {
            return Err(Error::DimensionMismatch {
                expected: self.neurons(),
                got: g.len(),
            });
        }
        let total = g.total();
        if total <= 0.0 {
            return Err(Error::DegenerateActivation);
        }
        let mut acc = vec![0.0; self.dim];
        for (chunk, &gi) in self.vectors.chunks_exact(self.dim).zip(g.values()) {
            for (a, &v) in acc.iter_mut().zip(chunk) {
                *a += gi * v;
            }
        }
        for a in &mut acc {
            *a /= total;
        }
        Ok(acc)
    }

    /// One encode/decode step `x -> pop(activate(x))`, computed with the
    /// activation rescaled so its maximum is 1. The population vector is
    /// invariant under uniform rescaling, and this keeps the step well
    /// defined at tuning widths where the raw Gaussian underflows to zero
    /// for every neuron.
    pub fn coding_step(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.check_dim(x)?;
        let inv_two_sigma_sq = 0.5 / (self.sigma * self.sigma);
        let n = self.neurons();
        let mut d_sq = Vec::with_capacity(n);
        let mut d_min = f64::INFINITY;
        for i in 0..n {
            let d = self.dist_sq(i, x);
            if d < d_min {
                d_min = d;
            }
            d_sq.push(d);
        }
        let mut total = 0.0;
        let mut acc = vec![0.0; self.dim];
        for (chunk, d) in self.vectors.chunks_exact(self.dim).zip(d_sq) {
            let w = (-(d - d_min) * inv_two_sigma_sq).exp();
            total += w;
            for (a, &v) in acc.iter_mut().zip(chunk) {
                *a += w * v;
            }
        }
        // total >= 1: the nearest neuron always contributes weight 1
        for a in &mut acc {
            *a /= total;
        }
        Ok(acc)
    }

    /// Iterate the encode/decode cycle from `s` until the displacement per
    /// step falls below `tol`; the fixed point is the category prototype.
    pub fn categorize(&self, s: &[f64], tol: f64, max_iter: usize) -> Result<Vec<f64>> {
        self.check_dim(s)?;
        let mut x = s.to_vec();
        let mut displacement = f64::INFINITY;
        for _ in 0..max_iter {
            let next = self.coding_step(&x)?;
            displacement = dist(&next, &x);
            x = next;
            if displacement < tol {
                return Ok(x);
            }
        }
        Err(Error::NonConvergence {
            max_iter,
            last: x,
            displacement,
        })
    }

    /// Pairs `(grid point, one-step image)` for a regular grid over
    /// `[0,1]^dim` with `grid_resolution` points per axis, in row-major
    /// order (last coordinate fastest).
    pub fn attractor_field(&self, grid_resolution: usize) -> Result<Vec<(Vec<f64>, Vec<f64>)>> {
        let mut field = Vec::new();
        for x in grid_points(self.dim, grid_resolution)? {
            let y = self.coding_step(&x)?;
            field.push((x, y));
        }
        Ok(field)
    }

    /// Categorize from every grid point and merge fixed points closer than
    /// `merge_tol` (single linkage); returns cluster centroids sorted
    /// lexicographically.
    pub fn extract_attractors(
        &self,
        grid_resolution: usize,
        merge_tol: f64,
        tol: f64,
        max_iter: usize,
    ) -> Result<Vec<Vec<f64>>> {
        let mut fixed_points = Vec::new();
        for x in grid_points(self.dim, grid_resolution)? {
            fixed_points.push(self.categorize(&x, tol, max_iter)?);
        }
        Ok(merge_points(&fixed_points, merge_tol))
    }
}

/// Euclidean distance between two equal-length points.
pub fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

/// Regular grid over `[0,1]^dim` with `resolution` points per axis
/// (endpoints included), row-major with the last coordinate fastest.
pub fn grid_points(dim: usize, resolution: usize) -> Result<Vec<Vec<f64>>> {
    if resolution < 2 {
        return Err(Error::Config(format!(
            "grid resolution must be >= 2, got {resolution}"
        )));
    }
    let step = 1.0 / (resolution - 1) as f64;
    let total = resolution.pow(dim as u32);
    let mut points = Vec::with_capacity(total);
    let mut idx = vec![0usize; dim];
    for _ in 0..total {
        points.push(idx.iter().map(|&k| k as f64 * step).collect());
        for d in (0..dim).rev() {
            idx[d] += 1;
            if idx[d] < resolution {
                break;
            }
            idx[d] = 0;
        }
    }
    Ok(points)
}

/// Single-linkage merge of points closer than `merge_tol`; returns cluster
/// centroids sorted lexicographically.
pub fn merge_points(points: &[Vec<f64>], merge_tol: f64) -> Vec<Vec<f64>> {
    let n = points.len();
    if n == 0 {
        return Vec::new();
    }
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut Vec<usize>, i: usize) -> usize {
        let mut root = i;
        while parent[root] != root {
            root = parent[root];
        }
        let mut cur = i;
        while parent[cur] != root {
            let next = parent[cur];
            parent[cur] = root;
            cur = next;
        }
        root
    }
    for i in 0..n {
        for j in (i + 1)..n {
            if dist(&points[i], &points[j]) < merge_tol {
                let (ri, rj) = (find(&mut parent, i), find(&mut parent, j));
                if ri != rj {
                    parent[ri.max(rj)] = ri.min(rj);
                }
            }
        }
    }
    let dim = points[0].len();
    let mut sums: std::collections::BTreeMap<usize, (Vec<f64>, usize)> = Default::default();
    for i in 0..n {
        let root = find(&mut parent, i);
        let entry = sums.entry(root).or_insert_with(|| (vec![0.0; dim], 0));
        for (a, &v) in entry.0.iter_mut().zip(&points[i]) {
            *a += v;
        }
        entry.1 += 1;
    }
    let mut centroids: Vec<Vec<f64>> = sums
        .into_values()
        .map(|(sum, count)| sum.into_iter().map(|v| v / count as f64).collect())
        .collect();
    centroids.sort_by(|a, b| a.partial_cmp(b).expect("attractor coords are finite"));
    centroids
}
