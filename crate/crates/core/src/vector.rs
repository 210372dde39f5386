use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
enum Storage {
    Dense(Vec<f64>),
    /// Strictly increasing indices, parallel to `values`.
    Sparse {
        indices: Vec<usize>,
        values: Vec<f64>,
    },
}

/// A point in `R^d`, stored densely or as sorted `(index, value)` pairs.
///
/// Indices are 0-based.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InputVector {
    dim: usize,
    storage: Storage,
}

impl InputVector {
    pub fn dense(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::dimension("vector dimension must be at least 1"));
        }
        check_finite(&values)?;
        Ok(Self {
            dim: values.len(),
            storage: Storage::Dense(values),
        })
    }

    pub fn sparse(dim: usize, entries: Vec<(usize, f64)>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::dimension("vector dimension must be at least 1"));
        }
        let mut indices = Vec::with_capacity(entries.len());
        let mut values = Vec::with_capacity(entries.len());
        for (i, v) in entries {
            if i >= dim {
                return Err(Error::dimension(format!(
                    "sparse index {i} out of bounds for dimension {dim}"
                )));
            }
            if indices.last().is_some_and(|&last| last >= i) {
                return Err(Error::parameter(format!(
                    "sparse indices must be strictly increasing (at index {i})"
                )));
            }
            indices.push(i);
            values.push(v);
        }
        check_finite(&values)?;
        Ok(Self {
            dim,
            storage: Storage::Sparse { indices, values },
        })
    }

    /// The standard basis vector `e_index` in `R^dim`.
    pub fn basis(dim: usize, index: usize) -> Result<Self> {
        Self::sparse(dim, vec![(index, 1.0)])
    }

    pub fn zeros(dim: usize) -> Result<Self> {
        Self::sparse(dim, Vec::new())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn is_sparse(&self) -> bool {
        matches!(self.storage, Storage::Sparse { .. })
    }

    /// Nonzero entries in increasing index order.
    pub fn iter(&self) -> Box<dyn Iterator<Item = (usize, f64)> + '_> {
        match &self.storage {
            Storage::Dense(v) => Box::new(v.iter().copied().enumerate().filter(|&(_, x)| x != 0.0)),
            Storage::Sparse { indices, values } => Box::new(
                indices
                    .iter()
                    .copied()
                    .zip(values.iter().copied())
                    .filter(|&(_, x)| x != 0.0),
            ),
        }
    }

    pub fn nnz(&self) -> usize {
        self.iter().count()
    }

    pub fn to_dense(&self) -> Vec<f64> {
        match &self.storage {
            Storage::Dense(v) => v.clone(),
            Storage::Sparse { indices, values } => {
                let mut out = vec![0.0; self.dim];
                for (&i, &v) in indices.iter().zip(values) {
                    out[i] = v;
                }
                out
            }
        }
    }

    /// The same vector in sparse storage with zeros dropped.
    pub fn to_sparse(&self) -> Self {
        Self {
            dim: self.dim,
            storage: Storage::Sparse {
                indices: self.iter().map(|(i, _)| i).collect(),
                values: self.iter().map(|(_, v)| v).collect(),
            },
        }
    }

    /// Sets the dimension to `dim >= self.dim()`, padding with zeros.
    pub fn with_dim(&self, dim: usize) -> Result<Self> {
        if dim < self.dim {
            return Err(Error::dimension(format!(
                "cannot shrink dimension {} to {dim}",
                self.dim
            )));
        }
        let mut out = self.clone();
        out.dim = dim;
        if let Storage::Dense(v) = &mut out.storage {
            v.resize(dim, 0.0);
        }
        Ok(out)
    }

    pub fn scale(&self, alpha: f64) -> Self {
        let mut out = self.clone();
        match &mut out.storage {
            Storage::Dense(v) => v.iter_mut().for_each(|x| *x *= alpha),
            Storage::Sparse { values, .. } => values.iter_mut().for_each(|x| *x *= alpha),
        }
        out
    }

    pub fn dot(&self, other: &InputVector) -> Result<f64> {
        if self.dim != other.dim {
            return Err(Error::dimension(format!(
                "dot product of dimensions {} and {}",
                self.dim, other.dim
            )));
        }
        let dense = other.to_dense();
        Ok(self.iter().map(|(i, v)| v * dense[i]).sum())
    }

    pub fn norm_squared(&self) -> f64 {
        self.iter().map(|(_, v)| v * v).sum()
    }

    pub fn l1_norm(&self) -> f64 {
        self.iter().map(|(_, v)| v.abs()).sum()
    }

    /// Appends a coordinate `sqrt(c)` at index `d` when `c > 0`, so that
    /// `<aug(x), aug(y)> = c + <x, y>`. With `c = 0` the vector is unchanged.
    pub fn augment(&self, c: f64) -> Result<Self> {
        if !(c.is_finite() && c >= 0.0) {
            return Err(Error::parameter(format!(
                "offset must be finite and non-negative, got {c}"
            )));
        }
        if c == 0.0 {
            return Ok(self.clone());
        }
        let extra = c.sqrt();
        let storage = match &self.storage {
            Storage::Dense(v) => {
                let mut v = v.clone();
                v.push(extra);
                Storage::Dense(v)
            }
            Storage::Sparse { indices, values } => {
                let mut indices = indices.clone();
                let mut values = values.clone();
                indices.push(self.dim);
                values.push(extra);
                Storage::Sparse { indices, values }
            }
        };
        Ok(Self {
            dim: self.dim + 1,
            storage,
        })
    }
}

fn check_finite(values: &[f64]) -> Result<()> {
    match values.iter().find(|v| !v.is_finite()) {
        Some(v) => Err(Error::parameter(format!("non-finite entry {v}"))),
        None => Ok(()),
    }
}
