//! Shared fixtures for the criterion benchmarks.

use tensorsketch::eval::random_unit_vectors;
use tensorsketch::{InputVector, SketchConfig, TensorSketchMap};

/// Dense unit vectors in `R^dim`, fixed by `seed`.
pub fn unit_vectors(n: usize, dim: usize, seed: u64) -> Vec<InputVector> {
    random_unit_vectors(n, dim, seed).expect("positive dimension")
}

/// Sparse vectors in `R^dim` with `nnz` evenly spaced entries.
pub fn sparse_vectors(n: usize, dim: usize, nnz: usize) -> Vec<InputVector> {
    let step = (dim / nnz.max(1)).max(1);
    (0..n)
        .map(|r| {
            let entries = (0..nnz)
                .map(|k| ((k * step + r) % dim, 1.0 / (1 + k + r) as f64))
                .collect::<std::collections::BTreeMap<_, _>>()
                .into_iter()
                .collect();
            InputVector::sparse(dim, entries).expect("indices below dim")
        })
        .collect()
}

pub fn map(dim: usize, feature_dim: usize, degree: u32) -> TensorSketchMap {
    let config = SketchConfig::new(dim, feature_dim, degree, 0.0, 7).expect("valid config");
    TensorSketchMap::build(config).expect("valid config")
}
