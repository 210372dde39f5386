//! Monte Carlo harness for kernel estimators: bias and variance over
//! independent map draws, Gram-matrix approximation error, and runtime
//! scaling in the feature dimension.
//!
//! Trial `t` of a run with master seed `s` uses the map seeded with
//! `derive_seed(s, t)`, so runs are reproducible and trial order does not
//! affect the result.

use std::fmt;
use std::io::Write;
use std::str::FromStr;
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::baselines::{AmsTensorEstimator, MaclaurinMap};
use crate::error::{Error, Result};
use crate::hashing::derive_seed;
use crate::sketch::dot;
use crate::tensor::{SketchConfig, TensorSketchMap};
use crate::vector::InputVector;

/// Fewest trials [`run_trials`] accepts.
pub const MIN_TRIALS: usize = 100;

/// Largest dataset [`gram_error`] accepts.
pub const MAX_GRAM_SIZE: usize = 10_000;

/// Multiplicative slack applied to theoretical variance bounds.
pub const VARIANCE_SLACK: f64 = 1.05;

/// Standard errors allowed between the empirical mean and the exact kernel.
pub const MEAN_TOLERANCE_SE: f64 = 3.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EstimatorKind {
    /// Tensor Sketch with `D` features.
    Tensor,
    /// Average of `D` products of AMS sketches.
    Ams,
    /// Random Maclaurin features with `D` features.
    Maclaurin,
}

impl fmt::Display for EstimatorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            EstimatorKind::Tensor => "tensor",
            EstimatorKind::Ams => "ams",
            EstimatorKind::Maclaurin => "maclaurin",
        })
    }
}

impl FromStr for EstimatorKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "tensor" => Ok(EstimatorKind::Tensor),
            "ams" => Ok(EstimatorKind::Ams),
            "maclaurin" => Ok(EstimatorKind::Maclaurin),
            other => Err(Error::parameter(format!("unknown estimator {other:?}"))),
        }
    }
}

/// Empirical mean and variance of a kernel estimator over independent draws.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimateStats {
    pub estimator: EstimatorKind,
    pub trials: usize,
    pub mean: f64,
    /// Unbiased sample variance.
    pub variance: f64,
    pub std_error: f64,
    /// Exact kernel value `(c + <x, y>)^p`.
    pub target: f64,
    /// Theoretical variance bound, when one is known for the estimator.
    pub bound: Option<f64>,
}

impl EstimateStats {
    pub fn from_samples(
        estimator: EstimatorKind,
        samples: &[f64],
        target: f64,
        bound: Option<f64>,
    ) -> Result<Self> {
        if samples.len() < 2 {
            return Err(Error::parameter("need at least two samples"));
        }
        let n = samples.len() as f64;
        let mean = samples.iter().sum::<f64>() / n;
        let variance = samples.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
        Ok(Self {
            estimator,
            trials: samples.len(),
            mean,
            variance,
            std_error: (variance / n).sqrt(),
            target,
            bound,
        })
    }

    /// `|mean - target| <= k * std_error`. A zero-variance run must hit the
    /// target exactly.
    pub fn mean_within(&self, k: f64) -> bool {
        (self.mean - self.target).abs() <= k * self.std_error
    }

    /// `variance <= bound * slack`, or `None` without a bound.
    pub fn variance_within(&self, slack: f64) -> Option<bool> {
        self.bound.map(|b| self.variance <= b * slack)
    }

    /// Human-readable descriptions of every violated check.
    pub fn violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        if !self.mean_within(MEAN_TOLERANCE_SE) {
            out.push(format!(
                "|mean - target| = |{} - {}| = {} > {} * std_error = {}",
                self.mean,
                self.target,
                (self.mean - self.target).abs(),
                MEAN_TOLERANCE_SE,
                MEAN_TOLERANCE_SE * self.std_error
            ));
        }
        if let (Some(false), Some(bound)) = (self.variance_within(VARIANCE_SLACK), self.bound) {
            out.push(format!(
                "variance = {} > {} * bound = {}",
                self.variance,
                VARIANCE_SLACK,
                VARIANCE_SLACK * bound
            ));
        }
        out
    }
}

/// Variance bound `(3^p - 1) / D * ||x||^{2p} ||y||^{2p}` for estimators
/// averaging over `D` features or replicas.
pub fn variance_bound(degree: u32, features: usize, x_norm_sq: f64, y_norm_sq: f64) -> f64 {
    let p = degree as i32;
    (3f64.powi(p) - 1.0) / features as f64 * x_norm_sq.powi(p) * y_norm_sq.powi(p)
}

fn check_pair(config: &SketchConfig, x: &InputVector, y: &InputVector) -> Result<()> {
    for v in [x, y] {
        if v.dim() != config.input_dim {
            return Err(Error::dimension(format!(
                "input has dimension {}, config expects {}",
                v.dim(),
                config.input_dim
            )));
        }
    }
    Ok(())
}

fn validate_for(kind: EstimatorKind, config: &SketchConfig) -> Result<()> {
    match kind {
        EstimatorKind::Tensor => config.validate(),
        EstimatorKind::Ams | EstimatorKind::Maclaurin => {
            // Baselines accept any positive feature count.
            let probe = SketchConfig {
                feature_dim: 2,
                ..*config
            };
            probe.validate()?;
            if config.feature_dim == 0 {
                return Err(Error::parameter("need at least one feature"));
            }
            Ok(())
        }
    }
}

/// One kernel estimate per trial, in trial order.
pub fn trial_estimates(
    kind: EstimatorKind,
    x: &InputVector,
    y: &InputVector,
    config: &SketchConfig,
    trials: usize,
    seed: u64,
) -> Result<Vec<f64>> {
    validate_for(kind, config)?;
    check_pair(config, x, y)?;
    let (ax, ay) = (x.augment(config.offset)?, y.augment(config.offset)?);
    let estimate = |t: usize| -> Result<f64> {
        let trial_seed = derive_seed(seed, t as u64);
        match kind {
            EstimatorKind::Tensor => {
                TensorSketchMap::build(config.with_seed(trial_seed))?.estimate_kernel(x, y)
            }
            EstimatorKind::Ams => {
                AmsTensorEstimator::new(ax.dim(), config.degree, config.feature_dim, trial_seed)?
                    .estimate(&ax, &ay)
            }
            EstimatorKind::Maclaurin => MaclaurinMap::for_kernel(
                config.input_dim,
                config.degree,
                config.feature_dim,
                config.offset,
                trial_seed,
            )?
            .estimate_kernel(x, y),
        }
    };
    (0..trials).into_par_iter().map(estimate).collect()
}

/// Runs `trials` independent draws of the estimator on `(x, y)` and
/// summarizes them against the exact kernel and the variance bound.
pub fn run_trials(
    kind: EstimatorKind,
    x: &InputVector,
    y: &InputVector,
    config: &SketchConfig,
    trials: usize,
    seed: u64,
) -> Result<EstimateStats> {
    if trials < MIN_TRIALS {
        return Err(Error::parameter(format!(
            "need at least {MIN_TRIALS} trials, got {trials}"
        )));
    }
    let samples = trial_estimates(kind, x, y, config, trials, seed)?;
    let target = config.kernel(x, y)?;
    let c = config.offset;
    let bound = match kind {
        EstimatorKind::Maclaurin if c > 0.0 => None,
        _ => Some(variance_bound(
            config.degree,
            config.feature_dim,
            x.norm_squared() + c,
            y.norm_squared() + c,
        )),
    };
    EstimateStats::from_samples(kind, &samples, target, bound)
}

/// Machine-readable bias/variance record.
#[derive(Debug, Clone, Serialize)]
pub struct BiasVarianceReport {
    pub mode: &'static str,
    pub estimator: EstimatorKind,
    pub config: SketchConfig,
    pub trials: usize,
    pub mean: f64,
    pub variance: f64,
    pub std_error: f64,
    pub target: f64,
    pub bound: Option<f64>,
    pub pass: bool,
}

impl BiasVarianceReport {
    pub fn new(config: SketchConfig, stats: &EstimateStats) -> Self {
        Self {
            mode: "bias-variance",
            estimator: stats.estimator,
            config,
            trials: stats.trials,
            mean: stats.mean,
            variance: stats.variance,
            std_error: stats.std_error,
            target: stats.target,
            bound: stats.bound,
            pass: stats.violations().is_empty(),
        }
    }
}

/// Accuracy of a sketched Gram matrix against the exact kernel matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GramErrorReport {
    pub n: usize,
    #[serde(rename = "D")]
    pub feature_dim: usize,
    #[serde(rename = "p")]
    pub degree: u32,
    #[serde(rename = "c")]
    pub offset: f64,
    pub seed: u64,
    /// `||K_hat - K||_F / ||K||_F`.
    pub frobenius_rel_error: f64,
    pub max_abs_entry_error: f64,
}

/// Sketches `data` with one map and compares `<f(x_i), f(x_j)>` against
/// `(c + <x_i, x_j>)^p` over all pairs.
pub fn gram_error(data: &[InputVector], config: &SketchConfig) -> Result<GramErrorReport> {
    if data.len() > MAX_GRAM_SIZE {
        return Err(Error::Capacity(format!(
            "gram error limited to {MAX_GRAM_SIZE} vectors, got {}",
            data.len()
        )));
    }
    let map = TensorSketchMap::build(*config)?;
    let features = map.apply_batch(data)?;
    let dense: Vec<Vec<f64>> = data.iter().map(InputVector::to_dense).collect();
    let p = config.degree as i32;
    let (diff_sq, exact_sq, max_abs) = (0..data.len())
        .into_par_iter()
        .map(|i| {
            let mut acc = (0.0, 0.0, 0.0f64);
            for j in 0..data.len() {
                let exact = (config.offset + dot(&dense[i], &dense[j])).powi(p);
                let approx = dot(&features[i], &features[j]);
                let err = approx - exact;
                acc.0 += err * err;
                acc.1 += exact * exact;
                acc.2 = acc.2.max(err.abs());
            }
            acc
        })
        .collect::<Vec<_>>()
        .into_iter()
        .fold((0.0, 0.0, 0.0f64), |a, b| {
            (a.0 + b.0, a.1 + b.1, a.2.max(b.2))
        });
    let frobenius_rel_error = if exact_sq > 0.0 {
        (diff_sq / exact_sq).sqrt()
    } else if diff_sq == 0.0 {
        0.0
    } else {
        f64::INFINITY
    };
    Ok(GramErrorReport {
        n: data.len(),
        feature_dim: config.feature_dim,
        degree: config.degree,
        offset: config.offset,
        seed: config.seed,
        frobenius_rel_error,
        max_abs_entry_error: max_abs,
    })
}

/// `n` vectors with i.i.d. standard normal entries, scaled to unit norm.
pub fn random_unit_vectors(n: usize, dim: usize, seed: u64) -> Result<Vec<InputVector>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| {
            let v: Vec<f64> = (0..dim).map(|_| StandardNormal.sample(&mut rng)).collect();
            let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            InputVector::dense(v.into_iter().map(|x| x / norm).collect())
        })
        .collect()
}

/// `n` vectors with i.i.d. standard normal entries.
pub fn random_gaussian_vectors(n: usize, dim: usize, seed: u64) -> Result<Vec<InputVector>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| InputVector::dense((0..dim).map(|_| StandardNormal.sample(&mut rng)).collect()))
        .collect()
}

/// Median per-vector sketching time at one feature dimension.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TimingRow {
    pub feature_dim: usize,
    pub per_vector_ns: f64,
    pub repetitions: usize,
}

fn median(mut xs: Vec<f64>) -> f64 {
    xs.sort_by(|a, b| a.total_cmp(b));
    let n = xs.len();
    if n % 2 == 1 {
        xs[n / 2]
    } else {
        0.5 * (xs[n / 2 - 1] + xs[n / 2])
    }
}

fn time_per_item<F: FnMut()>(items: usize, reps: usize, mut pass: F) -> f64 {
    pass();
    let samples = (0..reps)
        .map(|_| {
            let start = Instant::now();
            pass();
            start.elapsed().as_nanos() as f64 / items as f64
        })
        .collect();
    median(samples)
}

/// Times single-threaded sketching of `n` random unit vectors in `R^d` for
/// every feature dimension in `dims`, after one warm-up pass, reporting the
/// median of `reps` passes.
pub fn timing_profile(
    input_dim: usize,
    n: usize,
    dims: &[usize],
    degree: u32,
    reps: usize,
    seed: u64,
) -> Result<Vec<TimingRow>> {
    if reps < 5 {
        return Err(Error::parameter(format!(
            "timing needs at least 5 repetitions, got {reps}"
        )));
    }
    if n == 0 {
        return Err(Error::parameter("timing needs at least one vector"));
    }
    let data = random_unit_vectors(n, input_dim, seed)?;
    dims.iter()
        .map(|&feature_dim| {
            let map = TensorSketchMap::build(SketchConfig::new(
                input_dim,
                feature_dim,
                degree,
                0.0,
                seed,
            )?)?;
            let mut ws = crate::tensor::Workspace::new();
            let per_vector_ns = time_per_item(n, reps, || {
                for x in &data {
                    let out = map
                        .apply_with(x, crate::tensor::Convolution::Auto, &mut ws)
                        .expect("validated input");
                    std::hint::black_box(out);
                }
            });
            Ok(TimingRow {
                feature_dim,
                per_vector_ns,
                repetitions: reps,
            })
        })
        .collect()
}

/// Violations of the timing contract: times must not decrease with `D`, and
/// quadrupling `D` must cost less than 8x.
pub fn timing_violations(rows: &[TimingRow]) -> Vec<String> {
    let mut out = Vec::new();
    for pair in rows.windows(2) {
        if pair[1].feature_dim > pair[0].feature_dim
            && pair[1].per_vector_ns < pair[0].per_vector_ns
        {
            out.push(format!(
                "time decreased from D = {} ({:.1} ns) to D = {} ({:.1} ns)",
                pair[0].feature_dim,
                pair[0].per_vector_ns,
                pair[1].feature_dim,
                pair[1].per_vector_ns
            ));
        }
    }
    for a in rows {
        if let Some(b) = rows.iter().find(|b| b.feature_dim == 4 * a.feature_dim) {
            let ratio = b.per_vector_ns / a.per_vector_ns;
            if ratio.is_nan() || ratio >= 8.0 {
                out.push(format!(
                    "time(D = {}) / time(D = {}) = {ratio:.2} >= 8",
                    b.feature_dim, a.feature_dim
                ));
            }
        }
    }
    out
}

pub fn write_timing_csv<W: Write>(rows: &[TimingRow], writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["D", "per_vector_ns", "repetitions"])
        .map_err(csv_error)?;
    for r in rows {
        w.write_record([
            r.feature_dim.to_string(),
            format!("{:.1}", r.per_vector_ns),
            r.repetitions.to_string(),
        ])
        .map_err(csv_error)?;
    }
    w.flush()?;
    Ok(())
}

pub(crate) fn csv_error(e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::Io(io),
        other => Error::Io(std::io::Error::other(format!("{other:?}"))),
    }
}

/// Median wall time per kernel estimate of Tensor Sketch versus the
/// AMS-product baseline at equal `D`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PairTiming {
    pub tensor_ns: f64,
    pub ams_ns: f64,
}

pub fn pair_timing(
    input_dim: usize,
    feature_dim: usize,
    degree: u32,
    reps: usize,
    seed: u64,
) -> Result<PairTiming> {
    let data = random_unit_vectors(2, input_dim, seed)?;
    let (x, y) = (&data[0], &data[1]);
    let map = TensorSketchMap::build(SketchConfig::new(
        input_dim,
        feature_dim,
        degree,
        0.0,
        seed,
    )?)?;
    let ams = AmsTensorEstimator::new(input_dim, degree, feature_dim, seed)?;
    let tensor_ns = time_per_item(1, reps, || {
        std::hint::black_box(map.estimate_kernel(x, y).expect("validated input"));
    });
    let ams_ns = time_per_item(1, reps, || {
        std::hint::black_box(ams.estimate(x, y).expect("validated input"));
    });
    Ok(PairTiming { tensor_ns, ams_ns })
}
