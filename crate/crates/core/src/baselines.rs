//! Comparison estimators for `<x, y>^p`: products of AMS sketches, and
//! Maclaurin random features with Rademacher projections.

use crate::error::{Error, Result};
use crate::hashing::{SignHash, SplitMix64};
use crate::sketch::ams_sketch;
use crate::tensor::OpCount;
use crate::vector::InputVector;

fn check_dims(expected: usize, x: &InputVector) -> Result<()> {
    if x.dim() != expected {
        return Err(Error::dimension(format!(
            "input has dimension {}, estimator expects {expected}",
            x.dim()
        )));
    }
    Ok(())
}

/// Averages `D` independent replicas of `Π_j Z_{s_j}(x) Z_{s_j}(y)`.
#[derive(Debug, Clone)]
pub struct AmsTensorEstimator {
    input_dim: usize,
    degree: u32,
    replicas: usize,
    /// Replica `r`, factor `j` lives at `r * degree + j`.
    sign_hashes: Vec<SignHash>,
}

impl AmsTensorEstimator {
    pub fn new(input_dim: usize, degree: u32, replicas: usize, seed: u64) -> Result<Self> {
        if degree == 0 {
            return Err(Error::parameter("degree must be at least 1"));
        }
        if replicas == 0 {
            return Err(Error::parameter("need at least one replica"));
        }
        if input_dim == 0 {
            return Err(Error::dimension("input dimension must be at least 1"));
        }
        let sign_hashes = (0..replicas as u64 * degree as u64)
            .map(|id| SignHash::sample(seed, id))
            .collect();
        Ok(Self {
            input_dim,
            degree,
            replicas,
            sign_hashes,
        })
    }

    pub fn degree(&self) -> u32 {
        self.degree
    }

    pub fn replicas(&self) -> usize {
        self.replicas
    }

    pub fn input_dim(&self) -> usize {
        self.input_dim
    }

    pub fn estimate(&self, x: &InputVector, y: &InputVector) -> Result<f64> {
        self.estimate_counted(x, y).map(|(v, _)| v)
    }

    /// The estimate together with the work it took: `p·D·(nnz(x) + nnz(y))`
    /// hash evaluations.
    pub fn estimate_counted(&self, x: &InputVector, y: &InputVector) -> Result<(f64, OpCount)> {
        check_dims(self.input_dim, x)?;
        check_dims(self.input_dim, y)?;
        let sum: f64 = self
            .sign_hashes
            .chunks(self.degree as usize)
            .map(|replica| {
                replica
                    .iter()
                    .map(|s| ams_sketch(x, s) * ams_sketch(y, s))
                    .product::<f64>()
            })
            .sum();
        let evals = self.sign_hashes.len() as u64 * (x.nnz() + y.nnz()) as u64;
        let ops = OpCount {
            hash_evaluations: evals,
            multiply_adds: evals + self.sign_hashes.len() as u64,
            butterflies: 0,
        };
        Ok((sum / self.replicas as f64, ops))
    }
}

/// Random Maclaurin features for `(c + <x, y>)^p`.
///
/// Feature `r` is `scale_r · Π_{j < t_r} <w_{r,j}, x>` with Rademacher rows
/// `w_{r,j}` realized as sign hashes. Homogeneous maps use `t_r = p` and
/// `scale_r = D^{-1/2}`. Inhomogeneous maps draw `t_r` with
/// `P(t) = 2^{-(t+1)}` and set `scale_r = D^{-1/2} sqrt(a_t 2^{t+1})`, where
/// `a_t = C(p, t) c^{p-t}` is the Maclaurin coefficient of `(c + z)^p`; draws
/// with `t > p` give a zero feature.
#[derive(Debug, Clone)]
pub struct MaclaurinMap {
    input_dim: usize,
    degree: u32,
    offset: f64,
    /// Row `r`, factor `j` lives at `r * degree + j`.
    rows: Vec<SignHash>,
    feature_degrees: Vec<u32>,
    scales: Vec<f64>,
}

fn binomial(n: u32, k: u32) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

impl MaclaurinMap {
    /// Homogeneous map for `<x, y>^p`.
    pub fn homogeneous(input_dim: usize, degree: u32, features: usize, seed: u64) -> Result<Self> {
        Self::validate(input_dim, degree, features)?;
        let scale = (features as f64).sqrt().recip();
        Ok(Self {
            input_dim,
            degree,
            offset: 0.0,
            rows: Self::sample_rows(degree, features, seed),
            feature_degrees: vec![degree; features],
            scales: vec![scale; features],
        })
    }

    /// Inhomogeneous map for `(c + <x, y>)^p` with `c > 0`.
    pub fn inhomogeneous(
        input_dim: usize,
        degree: u32,
        features: usize,
        offset: f64,
        seed: u64,
    ) -> Result<Self> {
        Self::validate(input_dim, degree, features)?;
        if !(offset.is_finite() && offset > 0.0) {
            return Err(Error::parameter(format!(
                "inhomogeneous map needs a positive finite offset, got {offset}"
            )));
        }
        let base = (features as f64).sqrt().recip();
        let mut degree_rng = SplitMix64::for_stream(seed, features as u64 * degree as u64);
        let feature_degrees: Vec<u32> = (0..features)
            .map(|_| degree_rng.next_u64().trailing_zeros())
            .collect();
        let scales = feature_degrees
            .iter()
            .map(|&t| {
                if t > degree {
                    0.0
                } else {
                    let a_t = binomial(degree, t) * offset.powi((degree - t) as i32);
                    base * (a_t * 2f64.powi(t as i32 + 1)).sqrt()
                }
            })
            .collect();
        Ok(Self {
            input_dim,
            degree,
            offset,
            rows: Self::sample_rows(degree, features, seed),
            feature_degrees,
            scales,
        })
    }

    /// Homogeneous when `c = 0`, inhomogeneous otherwise.
    pub fn for_kernel(
        input_dim: usize,
        degree: u32,
        features: usize,
        offset: f64,
        seed: u64,
    ) -> Result<Self> {
        if offset == 0.0 {
            Self::homogeneous(input_dim, degree, features, seed)
        } else {
            Self::inhomogeneous(input_dim, degree, features, offset, seed)
        }
    }

    fn validate(input_dim: usize, degree: u32, features: usize) -> Result<()> {
        if input_dim == 0 {
            return Err(Error::dimension("input dimension must be at least 1"));
        }
        if degree == 0 {
            return Err(Error::parameter("degree must be at least 1"));
        }
        if features == 0 {
            return Err(Error::parameter("need at least one feature"));
        }
        Ok(())
    }

    fn sample_rows(degree: u32, features: usize, seed: u64) -> Vec<SignHash> {
        (0..features as u64 * degree as u64)
            .map(|id| SignHash::sample(seed, id))
            .collect()
    }

    pub fn degree(&self) -> u32 {
        self.degree
    }

    pub fn offset(&self) -> f64 {
        self.offset
    }

    pub fn feature_dim(&self) -> usize {
        self.scales.len()
    }

    pub fn is_homogeneous(&self) -> bool {
        self.offset == 0.0
    }

    pub fn features(&self, x: &InputVector) -> Result<Vec<f64>> {
        check_dims(self.input_dim, x)?;
        Ok(self
            .rows
            .chunks(self.degree as usize)
            .zip(&self.feature_degrees)
            .zip(&self.scales)
            .map(|((row, &t), &scale)| {
                if scale == 0.0 {
                    return 0.0;
                }
                let used = (t as usize).min(row.len());
                scale
                    * row[..used]
                        .iter()
                        .map(|w| ams_sketch(x, w))
                        .product::<f64>()
            })
            .collect())
    }

    pub fn estimate_kernel(&self, x: &InputVector, y: &InputVector) -> Result<f64> {
        let fx = self.features(x)?;
        let fy = self.features(y)?;
        Ok(fx.iter().zip(&fy).map(|(a, b)| a * b).sum())
    }
}
