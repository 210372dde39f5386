//! Tensor Sketch random feature maps for polynomial kernels.
//!
//! For `k(x, y) = (c + <x, y>)^p`, a [`TensorSketchMap`] maps `x` in `R^d` to
//! `f(x)` in `R^D` such that `E[<f(x), f(y)>] = k(x, y)` and
//! `Var[<f(x), f(y)>] <= (3^p - 1) / D * ||x||^{2p} ||y||^{2p}` (with the
//! offset folded into the norms). Each application costs `O(nnz(x) + p D log D)`
//! and the map itself is `2p` small hash functions.
//!
//! ```
//! use tensorsketch::{InputVector, SketchConfig, TensorSketchMap};
//!
//! let config = SketchConfig::new(3, 256, 2, 1.0, 42).unwrap();
//! let map = TensorSketchMap::build(config).unwrap();
//! let x = InputVector::dense(vec![0.5, -0.25, 1.0]).unwrap();
//! let y = InputVector::sparse(3, vec![(0, 1.0), (2, 0.5)]).unwrap();
//! let estimate = map.estimate_kernel(&x, &y).unwrap();
//! let exact = config.kernel(&x, &y).unwrap();
//! assert!(estimate.is_finite() && exact == 4.0);
//! ```
//!
//! Modules:
//!
//! | module | contents |
//! |--------|----------|
//! | [`hashing`] | Carter–Wegman k-wise independent hashes, sign hashes |
//! | [`fft`] | radix-2 FFT and circular convolution |
//! | [`sketch`] | Count Sketch and AMS sketch |
//! | [`tensor`] | Tensor Sketch maps and the explicit tensor-power reference |
//! | [`baselines`] | AMS-product estimator and random Maclaurin features |
//! | [`eval`] | Monte Carlo bias/variance, Gram error, timing |
//! | [`io`] | libsvm / CSV datasets and feature-matrix output |

pub mod baselines;
pub mod error;
pub mod eval;
pub mod fft;
pub mod hashing;
pub mod io;
pub mod sketch;
pub mod tensor;
pub mod vector;

pub use baselines::{AmsTensorEstimator, MaclaurinMap};
pub use error::{Error, Result};
pub use eval::{run_trials, EstimateStats, EstimatorKind, GramErrorReport};
pub use fft::{circular_convolve, fft, ifft, FftPlan, Spectrum};
pub use hashing::{sample_kwise, KWiseHash, SignHash};
pub use io::Dataset;
pub use sketch::{ams_sketch, count_sketch, count_sketch_inner, CountSketchVector, SketchId};
pub use tensor::{
    explicit_tensor_sketch, tensor_power, Convolution, SketchConfig, TensorSketch, TensorSketchMap,
};
pub use vector::InputVector;
