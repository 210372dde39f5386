//! Count Sketch and the single-vector AMS sketch.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hashing::{mix64, KWiseHash, SignHash};
use crate::vector::InputVector;

/// Identifies the randomness a sketch was built with. Inner products are
/// only meaningful between sketches carrying the same id.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SketchId(pub u64);

impl SketchId {
    pub(crate) fn of_pair(h: &KWiseHash, s: &SignHash) -> Self {
        SketchId(mix64(h.fingerprint() ^ mix64(s.fingerprint())))
    }
}

/// `Cx` in `R^D` for some `(h, s)` pair.
#[derive(Debug, Clone, PartialEq)]
pub struct CountSketchVector {
    values: Vec<f64>,
    origin_dim: usize,
    hash_ids: SketchId,
}

impl CountSketchVector {
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn origin_dim(&self) -> usize {
        self.origin_dim
    }

    pub fn hash_ids(&self) -> SketchId {
        self.hash_ids
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Accumulates `s(i) x_i` into bucket `h(i)` of `out`, which must be zeroed.
#[inline]
pub(crate) fn accumulate(x: &InputVector, h: &KWiseHash, s: &SignHash, out: &mut [f64]) {
    for (i, v) in x.iter() {
        out[h.evaluate(i) as usize] += s.sign(i) * v;
    }
}

/// `(Cx)_k = Σ_{i: h(i) = k} s(i) x_i`, in time proportional to `nnz(x)`.
pub fn count_sketch(x: &InputVector, h: &KWiseHash, s: &SignHash) -> Result<CountSketchVector> {
    let width = h.range() as usize;
    if !width.is_power_of_two() {
        return Err(Error::dimension(format!(
            "sketch width must be a power of two, got {width}"
        )));
    }
    let mut values = vec![0.0; width];
    accumulate(x, h, s, &mut values);
    Ok(CountSketchVector {
        values,
        origin_dim: x.dim(),
        hash_ids: SketchId::of_pair(h, s),
    })
}

/// The AMS sketch `Z(x) = Σ_i s(i) x_i`.
pub fn ams_sketch(x: &InputVector, s: &SignHash) -> f64 {
    x.iter().map(|(i, v)| s.sign(i) * v).sum()
}

/// `<Cx, Cy>`, an unbiased estimate of `<x, y>` when both share `(h, s)`.
pub fn count_sketch_inner(cx: &CountSketchVector, cy: &CountSketchVector) -> Result<f64> {
    if cx.hash_ids != cy.hash_ids {
        return Err(Error::IncompatibleSketch(format!(
            "sketches built with different hashes ({:#x} vs {:#x})",
            cx.hash_ids.0, cy.hash_ids.0
        )));
    }
    if cx.len() != cy.len() {
        return Err(Error::dimension(format!(
            "sketch widths differ: {} vs {}",
            cx.len(),
            cy.len()
        )));
    }
    Ok(dot(&cx.values, &cy.values))
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}
