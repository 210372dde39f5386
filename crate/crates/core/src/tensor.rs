//! Tensor Sketch: a Count Sketch of the tensor power `x^(p)` computed from `p`
//! independent Count Sketches of `x` without materializing `x^(p)`.
//!
//! With bucket hashes `h_1..h_p` and sign hashes `s_1..s_p`, the map is the
//! Count Sketch of `x^(p)` under the composed pair
//!
//! ```text
//! H(i_1, .., i_p) = (h_1(i_1) + .. + h_p(i_p)) mod D
//! S(i_1, .., i_p) = s_1(i_1) * .. * s_p(i_p)
//! ```
//!
//! which is the circular convolution of the `p` individual sketches. The
//! convolution is done in the frequency domain, or directly when the sketches
//! are so sparse that the direct product is cheaper than `p + 1` transforms.
//! Inner products of two feature vectors are unbiased for `(c + <x, y>)^p`.

use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fft::FftPlan;
use crate::hashing::{mix64, sample_kwise, KWiseHash, SignHash};
use crate::sketch::{accumulate, dot, SketchId};
use crate::vector::InputVector;

/// Largest `d^p` the explicit tensor-power routines will materialize.
pub const MATERIALIZE_LIMIT: usize = 1_000_000;

/// Parameters of a polynomial-kernel feature map `R^d -> R^D` for
/// `k(x, y) = (c + <x, y>)^p`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SketchConfig {
    #[serde(rename = "d")]
    pub input_dim: usize,
    #[serde(rename = "D")]
    pub feature_dim: usize,
    #[serde(rename = "p")]
    pub degree: u32,
    #[serde(rename = "c")]
    pub offset: f64,
    pub seed: u64,
}

impl SketchConfig {
    pub fn new(
        input_dim: usize,
        feature_dim: usize,
        degree: u32,
        offset: f64,
        seed: u64,
    ) -> Result<Self> {
        let config = Self {
            input_dim,
            feature_dim,
            degree,
            offset,
            seed,
        };
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        if self.input_dim == 0 {
            return Err(Error::dimension("input dimension must be at least 1"));
        }
        if self.feature_dim < 2 || !self.feature_dim.is_power_of_two() {
            return Err(Error::dimension(format!(
                "feature dimension must be a power of two >= 2, got {}",
                self.feature_dim
            )));
        }
        if self.feature_dim > 1 << 32 {
            return Err(Error::dimension("feature dimension above 2^32"));
        }
        if self.degree == 0 {
            return Err(Error::parameter("degree must be at least 1"));
        }
        if !(self.offset.is_finite() && self.offset >= 0.0) {
            return Err(Error::parameter(format!(
                "offset must be finite and non-negative, got {}",
                self.offset
            )));
        }
        Ok(())
    }

    pub fn with_seed(self, seed: u64) -> Self {
        Self { seed, ..self }
    }

    pub fn with_feature_dim(self, feature_dim: usize) -> Self {
        Self {
            feature_dim,
            ..self
        }
    }

    /// The exact kernel value `(c + <x, y>)^p`.
    pub fn kernel(&self, x: &InputVector, y: &InputVector) -> Result<f64> {
        Ok((self.offset + x.dot(y)?).powi(self.degree as i32))
    }

    /// Dimension after the offset coordinate is appended.
    pub fn effective_dim(&self) -> usize {
        if self.offset > 0.0 {
            self.input_dim + 1
        } else {
            self.input_dim
        }
    }
}

/// How the `p` Count Sketches are combined.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Convolution {
    /// Direct when the product of sketch supports is at most `D`, else FFT.
    #[default]
    Auto,
    Fft,
    Direct,
}

/// Work performed by one application of a map.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct OpCount {
    pub hash_evaluations: u64,
    pub multiply_adds: u64,
    pub butterflies: u64,
}

impl OpCount {
    pub fn total(&self) -> u64 {
        self.hash_evaluations + self.multiply_adds + self.butterflies
    }
}

impl std::ops::Add for OpCount {
    type Output = OpCount;

    fn add(self, rhs: OpCount) -> OpCount {
        OpCount {
            hash_evaluations: self.hash_evaluations + rhs.hash_evaluations,
            multiply_adds: self.multiply_adds + rhs.multiply_adds,
            butterflies: self.butterflies + rhs.butterflies,
        }
    }
}

/// Reusable buffers for [`TensorSketchMap::apply_with`].
#[derive(Debug, Clone, Default)]
pub struct Workspace {
    sketch: Vec<f64>,
    spectrum: Vec<Complex64>,
    product: Vec<Complex64>,
    support: Vec<(usize, f64)>,
    next_support: Vec<(usize, f64)>,
    sketches: Vec<Vec<f64>>,
}

impl Workspace {
    pub fn new() -> Self {
        Self::default()
    }

    fn prepare(&mut self, width: usize, degree: usize) {
        self.sketch.resize(width, 0.0);
        self.spectrum.resize(width, Complex64::default());
        self.product.resize(width, Complex64::default());
        self.sketches.resize_with(degree, Vec::new);
        for s in &mut self.sketches {
            s.clear();
            s.resize(width, 0.0);
        }
    }
}

/// A sampled Tensor Sketch feature map. Immutable once built.
#[derive(Debug, Clone)]
pub struct TensorSketchMap {
    config: SketchConfig,
    bucket_hashes: Vec<KWiseHash>,
    sign_hashes: Vec<SignHash>,
    effective_dim: usize,
    plan: Arc<FftPlan>,
    id: SketchId,
}

/// Feature vector tagged with the map that produced it.
#[derive(Debug, Clone, PartialEq)]
pub struct TensorSketch {
    values: Vec<f64>,
    map_id: SketchId,
}

impl TensorSketch {
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn map_id(&self) -> SketchId {
        self.map_id
    }

    /// `<f(x), f(y)>`; both sketches must come from the same map.
    pub fn inner(&self, other: &TensorSketch) -> Result<f64> {
        if self.map_id != other.map_id {
            return Err(Error::IncompatibleSketch(format!(
                "feature vectors from different maps ({:#x} vs {:#x})",
                self.map_id.0, other.map_id.0
            )));
        }
        Ok(dot(&self.values, &other.values))
    }
}

impl TensorSketchMap {
    /// Samples `h_j` from stream `2j` and `s_j` from stream `2j + 1` of the
    /// configured seed.
    pub fn build(config: SketchConfig) -> Result<Self> {
        config.validate()?;
        let p = config.degree as u64;
        let width = config.feature_dim as u64;
        let bucket_hashes = (0..p)
            .map(|j| sample_kwise(config.seed, 2 * j, 2, width))
            .collect::<Result<Vec<_>>>()?;
        let sign_hashes: Vec<SignHash> = (0..p)
            .map(|j| SignHash::sample(config.seed, 2 * j + 1))
            .collect();
        Self::from_hashes(config, bucket_hashes, sign_hashes)
    }

    /// Builds a map from explicit hashes, one pair per degree.
    pub fn from_hashes(
        config: SketchConfig,
        bucket_hashes: Vec<KWiseHash>,
        sign_hashes: Vec<SignHash>,
    ) -> Result<Self> {
        config.validate()?;
        let p = config.degree as usize;
        if bucket_hashes.len() != p || sign_hashes.len() != p {
            return Err(Error::parameter(format!(
                "need {p} bucket and sign hashes, got {} and {}",
                bucket_hashes.len(),
                sign_hashes.len()
            )));
        }
        if let Some(h) = bucket_hashes
            .iter()
            .find(|h| h.range() != config.feature_dim as u64)
        {
            return Err(Error::dimension(format!(
                "bucket hash range {} does not match feature dimension {}",
                h.range(),
                config.feature_dim
            )));
        }
        let id = bucket_hashes
            .iter()
            .zip(&sign_hashes)
            .fold(mix64(config.offset.to_bits()), |acc, (h, s)| {
                mix64(acc ^ SketchId::of_pair(h, s).0)
            });
        Ok(Self {
            config,
            bucket_hashes,
            sign_hashes,
            effective_dim: config.effective_dim(),
            plan: Arc::new(FftPlan::new(config.feature_dim)?),
            id: SketchId(id),
        })
    }

    pub fn config(&self) -> &SketchConfig {
        &self.config
    }

    pub fn bucket_hashes(&self) -> &[KWiseHash] {
        &self.bucket_hashes
    }

    pub fn sign_hashes(&self) -> &[SignHash] {
        &self.sign_hashes
    }

    pub fn effective_dim(&self) -> usize {
        self.effective_dim
    }

    pub fn id(&self) -> SketchId {
        self.id
    }

    fn prepare_input(&self, x: &InputVector) -> Result<InputVector> {
        if x.dim() != self.config.input_dim {
            return Err(Error::dimension(format!(
                "input has dimension {}, map expects {}",
                x.dim(),
                self.config.input_dim
            )));
        }
        x.augment(self.config.offset)
    }

    /// The feature vector `f(x)` in `R^D`.
    pub fn apply(&self, x: &InputVector) -> Result<Vec<f64>> {
        self.apply_with(x, Convolution::Auto, &mut Workspace::new())
            .map(|(v, _)| v)
    }

    /// `f(x)` tagged with this map's id.
    pub fn sketch(&self, x: &InputVector) -> Result<TensorSketch> {
        Ok(TensorSketch {
            values: self.apply(x)?,
            map_id: self.id,
        })
    }

    /// `<f(x), f(y)>`, unbiased for `(c + <x, y>)^p` over map draws.
    pub fn estimate_kernel(&self, x: &InputVector, y: &InputVector) -> Result<f64> {
        self.sketch(x)?.inner(&self.sketch(y)?)
    }

    /// Applies the map with an explicit convolution strategy and scratch
    /// buffers, also reporting the work done.
    pub fn apply_with(
        &self,
        x: &InputVector,
        strategy: Convolution,
        ws: &mut Workspace,
    ) -> Result<(Vec<f64>, OpCount)> {
        let x = self.prepare_input(x)?;
        let width = self.config.feature_dim;
        let p = self.config.degree as usize;
        let nnz = x.nnz() as u64;
        let mut ops = OpCount {
            hash_evaluations: 2 * p as u64 * nnz,
            multiply_adds: p as u64 * nnz,
            butterflies: 0,
        };
        ws.prepare(width, p);

        for ((h, s), buf) in self
            .bucket_hashes
            .iter()
            .zip(&self.sign_hashes)
            .zip(ws.sketches.iter_mut())
        {
            accumulate(&x, h, s, buf);
        }
        if p == 1 {
            return Ok((ws.sketches[0].clone(), ops));
        }

        let direct = match strategy {
            Convolution::Fft => false,
            Convolution::Direct => true,
            Convolution::Auto => {
                let work = ws.sketches.iter().try_fold(1usize, |acc, s| {
                    let support = s.iter().filter(|&&v| v != 0.0).count();
                    acc.checked_mul(support).filter(|&w| w <= width)
                });
                work.is_some()
            }
        };
        let mut out = vec![0.0; width];
        if direct {
            ops.multiply_adds += self.convolve_direct(ws, &mut out);
        } else {
            ops.butterflies += self.convolve_fft(ws, &mut out)?;
            ops.multiply_adds += (p as u64 - 1) * width as u64;
        }
        Ok((out, ops))
    }

    /// Sparse product of the sketches in the time domain; returns the number
    /// of multiply-adds performed.
    fn convolve_direct(&self, ws: &mut Workspace, out: &mut [f64]) -> u64 {
        let mask = out.len() - 1;
        let Workspace {
            sketches,
            support,
            next_support,
            sketch,
            ..
        } = ws;
        let mut work = 0u64;
        support.clear();
        support.extend(
            sketches[0]
                .iter()
                .copied()
                .enumerate()
                .filter(|&(_, v)| v != 0.0),
        );
        for factor in &sketches[1..] {
            sketch.iter_mut().for_each(|v| *v = 0.0);
            for &(a, va) in support.iter() {
                for (b, &vb) in factor.iter().enumerate() {
                    if vb != 0.0 {
                        sketch[(a + b) & mask] += va * vb;
                        work += 1;
                    }
                }
            }
            next_support.clear();
            next_support.extend(
                sketch
                    .iter()
                    .copied()
                    .enumerate()
                    .filter(|&(_, v)| v != 0.0),
            );
            std::mem::swap(support, next_support);
        }
        for &(k, v) in support.iter() {
            out[k] = v;
        }
        work
    }

    /// `FFT^{-1}(FFT(C_1 x) ∘ .. ∘ FFT(C_p x))`; returns the butterfly count.
    fn convolve_fft(&self, ws: &mut Workspace, out: &mut [f64]) -> Result<u64> {
        let plan = &self.plan;
        let Workspace {
            sketches,
            spectrum,
            product,
            ..
        } = ws;
        for (j, s) in sketches.iter().enumerate() {
            let target = if j == 0 {
                &mut *product
            } else {
                &mut *spectrum
            };
            for (c, &v) in target.iter_mut().zip(s) {
                *c = Complex64::new(v, 0.0);
            }
            plan.forward(target);
            if j > 0 {
                for (acc, v) in product.iter_mut().zip(spectrum.iter()) {
                    *acc *= v;
                }
            }
        }
        plan.inverse_to_real(product, out)?;
        Ok((sketches.len() as u64 + 1) * plan.butterflies())
    }

    /// Applies the map to many vectors in parallel; output order follows
    /// input order and each row equals [`TensorSketchMap::apply`] exactly.
    pub fn apply_batch(&self, xs: &[InputVector]) -> Result<Vec<Vec<f64>>> {
        xs.par_iter()
            .map_init(Workspace::new, |ws, x| {
                self.apply_with(x, Convolution::Auto, ws).map(|(v, _)| v)
            })
            .collect()
    }

    /// Modeled cost of one application on a vector with `nnz` nonzeros when
    /// the FFT path runs: `2p·nnz` hash evaluations, `p·nnz + (p-1)·D`
    /// multiply-adds and `(p+1)·(D/2)·log2 D` butterflies.
    pub fn fft_path_cost(&self, nnz: usize) -> OpCount {
        let p = self.config.degree as u64;
        let nnz = nnz as u64;
        let width = self.config.feature_dim as u64;
        if p == 1 {
            return OpCount {
                hash_evaluations: 2 * nnz,
                multiply_adds: nnz,
                butterflies: 0,
            };
        }
        OpCount {
            hash_evaluations: 2 * p * nnz,
            multiply_adds: p * nnz + (p - 1) * width,
            butterflies: (p + 1) * self.plan.butterflies(),
        }
    }
}

fn materialized_len(dim: usize, degree: u32) -> Result<usize> {
    dim.checked_pow(degree)
        .filter(|&n| n <= MATERIALIZE_LIMIT)
        .ok_or_else(|| {
            Error::Capacity(format!(
                "tensor power of dimension {dim}^{degree} exceeds {MATERIALIZE_LIMIT} entries"
            ))
        })
}

/// Calls `f(index_tuple)` for every tuple in `[0, dim)^degree`, the first
/// position varying slowest.
fn for_each_tuple(dim: usize, degree: usize, mut f: impl FnMut(&[usize])) {
    let mut tuple = vec![0usize; degree];
    loop {
        f(&tuple);
        let mut pos = degree;
        loop {
            if pos == 0 {
                return;
            }
            pos -= 1;
            tuple[pos] += 1;
            if tuple[pos] < dim {
                break;
            }
            tuple[pos] = 0;
        }
    }
}

/// The explicit tensor power `x^(p)` in `R^(d^p)`, entry `(i_1..i_p)` equal
/// to `x_{i_1} * .. * x_{i_p}`, in row-major tuple order.
pub fn tensor_power(x: &InputVector, degree: u32) -> Result<Vec<f64>> {
    if degree == 0 {
        return Err(Error::parameter("degree must be at least 1"));
    }
    let len = materialized_len(x.dim(), degree)?;
    let dense = x.to_dense();
    let mut out = Vec::with_capacity(len);
    for_each_tuple(x.dim(), degree as usize, |t| {
        out.push(t.iter().map(|&i| dense[i]).product());
    });
    Ok(out)
}

/// Reference implementation: materializes `aug(x)^(p)` and Count-Sketches it
/// under the composed hashes `H` and `S` of `map`. Exponential in `p`;
/// intended for verifying [`TensorSketchMap::apply`].
pub fn explicit_tensor_sketch(map: &TensorSketchMap, x: &InputVector) -> Result<Vec<f64>> {
    let x = map.prepare_input(x)?;
    let config = map.config();
    let degree = config.degree as usize;
    materialized_len(x.dim(), config.degree)?;
    let dense = x.to_dense();
    let width = config.feature_dim as u64;
    let mut out = vec![0.0; config.feature_dim];
    for_each_tuple(x.dim(), degree, |t| {
        let mut value = 1.0;
        let mut bucket = 0u64;
        let mut sign = 1.0;
        for (j, &i) in t.iter().enumerate() {
            value *= dense[i];
            bucket += map.bucket_hashes[j].evaluate(i);
            sign *= map.sign_hashes[j].sign(i);
        }
        out[(bucket % width) as usize] += sign * value;
    });
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sketch::count_sketch;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn config(d: usize, big_d: usize, p: u32, c: f64, seed: u64) -> SketchConfig {
        SketchConfig::new(d, big_d, p, c, seed).unwrap()
    }

    fn random_dense(rng: &mut ChaCha8Rng, d: usize) -> InputVector {
        InputVector::dense((0..d).map(|_| rng.random_range(-1.0..1.0)).collect()).unwrap()
    }

    #[test]
    fn config_validation() {
        assert!(matches!(
            SketchConfig::new(3, 6, 2, 0.0, 0),
            Err(Error::Dimension(_))
        ));
        assert!(matches!(
            SketchConfig::new(3, 8, 0, 0.0, 0),
            Err(Error::Parameter(_))
        ));
        assert!(SketchConfig::new(3, 8, 2, -1.0, 0).is_err());
        assert!(SketchConfig::new(0, 8, 2, 0.0, 0).is_err());
    }

    #[test]
    fn same_config_same_features() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let x = random_dense(&mut rng, 10);
        let a = TensorSketchMap::build(config(10, 32, 3, 0.5, 42)).unwrap();
        let b = TensorSketchMap::build(config(10, 32, 3, 0.5, 42)).unwrap();
        assert_eq!(a.apply(&x).unwrap(), b.apply(&x).unwrap());
        assert_eq!(a.id(), b.id());
    }

    #[test]
    fn different_seed_different_features() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let x = random_dense(&mut rng, 10);
        let a = TensorSketchMap::build(config(10, 32, 2, 0.0, 1)).unwrap();
        let b = TensorSketchMap::build(config(10, 32, 2, 0.0, 2)).unwrap();
        assert_ne!(a.apply(&x).unwrap(), b.apply(&x).unwrap());
    }

    #[test]
    fn degree_one_is_plain_count_sketch() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let map = TensorSketchMap::build(config(12, 16, 1, 0.0, 7)).unwrap();
        for _ in 0..20 {
            let x = random_dense(&mut rng, 12);
            let plain = count_sketch(&x, &map.bucket_hashes()[0], &map.sign_hashes()[0]).unwrap();
            assert_eq!(map.apply(&x).unwrap(), plain.values());
        }
    }

    #[test]
    fn basis_vector_maps_to_signed_basis_vector() {
        for seed in 0..50 {
            for p in 1..=4 {
                let map = TensorSketchMap::build(config(5, 16, p, 0.0, seed)).unwrap();
                let f = map.apply(&InputVector::basis(5, 2).unwrap()).unwrap();
                let nonzero: Vec<f64> = f.iter().copied().filter(|&v| v != 0.0).collect();
                assert_eq!(nonzero.len(), 1);
                assert_eq!(nonzero[0].abs(), 1.0);
                let e = InputVector::basis(5, 2).unwrap();
                assert_eq!(map.estimate_kernel(&e, &e).unwrap(), 1.0);
            }
        }
    }

    #[test]
    fn zero_vector_with_offset() {
        let map = TensorSketchMap::build(config(3, 8, 2, 9.0, 5)).unwrap();
        let zero = InputVector::zeros(3).unwrap();
        assert_eq!(map.estimate_kernel(&zero, &zero).unwrap(), 81.0);
    }

    #[test]
    fn fft_and_direct_paths_agree() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let map = TensorSketchMap::build(config(7, 16, 3, 1.0, 9)).unwrap();
        let mut ws = Workspace::new();
        for _ in 0..20 {
            let x = random_dense(&mut rng, 7);
            let (a, _) = map.apply_with(&x, Convolution::Fft, &mut ws).unwrap();
            let (b, _) = map.apply_with(&x, Convolution::Direct, &mut ws).unwrap();
            for (u, v) in a.iter().zip(&b) {
                assert!((u - v).abs() <= 1e-9);
            }
        }
    }

    #[test]
    fn composed_hash_oracle_d3_p2() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let map = TensorSketchMap::build(config(3, 4, 2, 0.0, 11)).unwrap();
        let x = random_dense(&mut rng, 3);
        let (fast, _) = map
            .apply_with(&x, Convolution::Fft, &mut Workspace::new())
            .unwrap();
        // Hand-rolled H(i, j) = (h1(i) + h2(j)) mod 4, S(i, j) = s1(i) s2(j).
        let dense = x.to_dense();
        let (h, s) = (map.bucket_hashes(), map.sign_hashes());
        let mut expected = [0.0; 4];
        for i in 0..3 {
            for j in 0..3 {
                let bucket = (h[0].evaluate(i) + h[1].evaluate(j)) % 4;
                expected[bucket as usize] += s[0].sign(i) * s[1].sign(j) * dense[i] * dense[j];
            }
        }
        for (a, e) in fast.iter().zip(&expected) {
            assert!((a - e).abs() <= 1e-9);
        }
        let oracle = explicit_tensor_sketch(&map, &x).unwrap();
        for (a, e) in oracle.iter().zip(&expected) {
            assert!((a - e).abs() <= 1e-12);
        }
    }

    #[test]
    fn oracle_degree_one_is_count_sketch() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let map = TensorSketchMap::build(config(6, 8, 1, 0.0, 3)).unwrap();
        let x = random_dense(&mut rng, 6);
        let plain = count_sketch(&x, &map.bucket_hashes()[0], &map.sign_hashes()[0]).unwrap();
        assert_eq!(explicit_tensor_sketch(&map, &x).unwrap(), plain.values());
    }

    #[test]
    fn oracle_d2_p3_matches_fft_path() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let map = TensorSketchMap::build(config(2, 4, 3, 0.0, 8)).unwrap();
        let x = random_dense(&mut rng, 2);
        let (fast, _) = map
            .apply_with(&x, Convolution::Fft, &mut Workspace::new())
            .unwrap();
        for (a, e) in fast.iter().zip(explicit_tensor_sketch(&map, &x).unwrap()) {
            assert!((a - e).abs() <= 1e-9);
        }
    }

    #[test]
    fn oracle_capacity_guard() {
        let map = TensorSketchMap::build(config(101, 8, 3, 0.0, 0)).unwrap();
        let x = InputVector::basis(101, 0).unwrap();
        assert!(matches!(
            explicit_tensor_sketch(&map, &x),
            Err(Error::Capacity(_))
        ));
        assert!(matches!(tensor_power(&x, 3), Err(Error::Capacity(_))));
    }

    #[test]
    fn tensor_power_inner_product_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let x = random_dense(&mut rng, 4);
        let y = random_dense(&mut rng, 4);
        let px = tensor_power(&x, 3).unwrap();
        let py = tensor_power(&y, 3).unwrap();
        let lhs: f64 = px.iter().zip(&py).map(|(a, b)| a * b).sum();
        let rhs = x.dot(&y).unwrap().powi(3);
        assert!((lhs - rhs).abs() <= 1e-9 * rhs.abs());
    }

    #[test]
    fn homogeneity_of_degree_p() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let map = TensorSketchMap::build(config(8, 32, 3, 0.0, 12)).unwrap();
        let x = random_dense(&mut rng, 8);
        let alpha: f64 = -1.7;
        let a = map.apply(&x).unwrap();
        let b = map.apply(&x.scale(alpha)).unwrap();
        let scale = a.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        for (u, v) in a.iter().zip(&b) {
            assert!((alpha.powi(3) * u - v).abs() <= 1e-9 * alpha.abs().powi(3) * scale);
        }
    }

    #[test]
    fn dimension_mismatch() {
        let map = TensorSketchMap::build(config(4, 8, 2, 0.0, 0)).unwrap();
        assert!(matches!(
            map.apply(&InputVector::basis(5, 0).unwrap()),
            Err(Error::Dimension(_))
        ));
    }

    #[test]
    fn sketches_from_different_maps_do_not_mix() {
        let x = InputVector::basis(4, 1).unwrap();
        let a = TensorSketchMap::build(config(4, 8, 2, 0.0, 0)).unwrap();
        let b = TensorSketchMap::build(config(4, 8, 2, 0.0, 1)).unwrap();
        let fa = a.sketch(&x).unwrap();
        let fb = b.sketch(&x).unwrap();
        assert!(matches!(fa.inner(&fb), Err(Error::IncompatibleSketch(_))));
    }

    #[test]
    fn batch_matches_one_shot() {
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        let map = TensorSketchMap::build(config(20, 64, 2, 1.0, 13)).unwrap();
        let xs: Vec<InputVector> = (0..40).map(|_| random_dense(&mut rng, 20)).collect();
        let batch = map.apply_batch(&xs).unwrap();
        for (x, row) in xs.iter().zip(&batch) {
            assert_eq!(&map.apply(x).unwrap(), row);
        }
    }

    #[test]
    fn counted_work_matches_model() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let map = TensorSketchMap::build(config(50, 64, 3, 0.0, 14)).unwrap();
        let x = random_dense(&mut rng, 50);
        let (_, ops) = map
            .apply_with(&x, Convolution::Fft, &mut Workspace::new())
            .unwrap();
        assert_eq!(ops, map.fft_path_cost(50));
    }
}
