//! Radix-2 iterative Cooley–Tukey FFT over power-of-two lengths.

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Largest imaginary residue, relative to `max(1, Σ|X_k| / n)`, tolerated when
/// an inverse transform is projected back to real values.
pub const IMAGINARY_TOLERANCE: f64 = 1e-9;

/// Frequency-domain representation of a length-`n` real or complex sequence.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    values: Vec<Complex64>,
}

impl Spectrum {
    pub fn new(values: Vec<Complex64>) -> Result<Self> {
        check_len(values.len())?;
        if values
            .iter()
            .any(|v| !v.re.is_finite() || !v.im.is_finite())
        {
            return Err(Error::NumericIntegrity(
                "spectrum contains non-finite entries".into(),
            ));
        }
        Ok(Self { values })
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn into_values(self) -> Vec<Complex64> {
        self.values
    }
}

fn check_len(n: usize) -> Result<()> {
    if n == 0 || !n.is_power_of_two() {
        return Err(Error::dimension(format!(
            "FFT length must be a power of two, got {n}"
        )));
    }
    Ok(())
}

/// Precomputed twiddle factors and bit-reversal permutation for one length.
///
/// Read-only after construction; share freely across threads.
#[derive(Debug, Clone)]
pub struct FftPlan {
    len: usize,
    /// `exp(-2πik/len)` for `k < len/2`.
    twiddles: Vec<Complex64>,
    bit_reverse: Vec<u32>,
}

impl FftPlan {
    pub fn new(len: usize) -> Result<Self> {
        check_len(len)?;
        let twiddles = (0..len / 2)
            .map(|k| {
                let angle = -2.0 * std::f64::consts::PI * k as f64 / len as f64;
                Complex64::new(angle.cos(), angle.sin())
            })
            .collect();
        let bits = len.trailing_zeros();
        let bit_reverse = (0..len as u32)
            .map(|i| {
                if bits == 0 {
                    0
                } else {
                    i.reverse_bits() >> (32 - bits)
                }
            })
            .collect();
        Ok(Self {
            len,
            twiddles,
            bit_reverse,
        })
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// Butterflies performed by one transform: `(len/2) * log2(len)`.
    pub fn butterflies(&self) -> u64 {
        (self.len as u64 / 2) * self.len.trailing_zeros() as u64
    }

    /// In-place forward transform, `X_k = Σ_j x_j exp(-2πijk/n)`.
    pub fn forward(&self, buf: &mut [Complex64]) {
        self.transform(buf, false);
    }

    /// In-place inverse transform, including the `1/n` normalization.
    pub fn inverse(&self, buf: &mut [Complex64]) {
        self.transform(buf, true);
        let scale = 1.0 / self.len as f64;
        for v in buf.iter_mut() {
            *v *= scale;
        }
    }

    fn transform(&self, buf: &mut [Complex64], inverse: bool) {
        assert_eq!(buf.len(), self.len, "buffer length does not match plan");
        for (i, &j) in self.bit_reverse.iter().enumerate() {
            let j = j as usize;
            if i < j {
                buf.swap(i, j);
            }
        }
        let mut half = 1;
        while half < self.len {
            let stride = self.len / (2 * half);
            for start in (0..self.len).step_by(2 * half) {
                for k in 0..half {
                    let mut w = self.twiddles[k * stride];
                    if inverse {
                        w = w.conj();
                    }
                    let a = buf[start + k];
                    let b = buf[start + k + half] * w;
                    buf[start + k] = a + b;
                    buf[start + k + half] = a - b;
                }
            }
            half *= 2;
        }
    }

    /// Inverse-transforms `buf` in place and writes the real parts to `out`.
    ///
    /// Fails if any imaginary residue exceeds [`IMAGINARY_TOLERANCE`], which
    /// means the spectrum was not that of a real sequence.
    pub fn inverse_to_real(&self, buf: &mut [Complex64], out: &mut [f64]) -> Result<()> {
        // Σ|X_k| / n bounds every output magnitude; rounding is relative to it.
        let scale = (buf.iter().map(|v| v.norm()).sum::<f64>() / self.len as f64).max(1.0);
        self.inverse(buf);
        let worst = buf.iter().fold(0.0f64, |m, v| m.max(v.im.abs()));
        if worst.is_nan() || worst > IMAGINARY_TOLERANCE * scale {
            return Err(Error::NumericIntegrity(format!(
                "inverse FFT left imaginary residue {worst:e} (scale {scale:e})"
            )));
        }
        for (o, v) in out.iter_mut().zip(buf.iter()) {
            *o = v.re;
        }
        Ok(())
    }
}

/// Forward transform of a real sequence.
pub fn fft(input: &[f64]) -> Result<Spectrum> {
    let plan = FftPlan::new(input.len())?;
    let mut buf: Vec<Complex64> = input.iter().map(|&x| Complex64::new(x, 0.0)).collect();
    plan.forward(&mut buf);
    Spectrum::new(buf)
}

/// Inverse transform back to a real sequence.
pub fn ifft(spectrum: &Spectrum) -> Result<Vec<f64>> {
    let plan = FftPlan::new(spectrum.len())?;
    let mut buf = spectrum.values.clone();
    let mut out = vec![0.0; buf.len()];
    plan.inverse_to_real(&mut buf, &mut out)?;
    Ok(out)
}

/// `out_k = Σ_{i+j ≡ k (mod n)} a_i b_j`, computed through the spectra product.
pub fn circular_convolve(a: &[f64], b: &[f64]) -> Result<Vec<f64>> {
    if a.len() != b.len() {
        return Err(Error::dimension(format!(
            "convolution operands differ in length: {} vs {}",
            a.len(),
            b.len()
        )));
    }
    let plan = FftPlan::new(a.len())?;
    let mut fa: Vec<Complex64> = a.iter().map(|&x| Complex64::new(x, 0.0)).collect();
    let mut fb: Vec<Complex64> = b.iter().map(|&x| Complex64::new(x, 0.0)).collect();
    plan.forward(&mut fa);
    plan.forward(&mut fb);
    for (x, y) in fa.iter_mut().zip(&fb) {
        *x *= y;
    }
    let mut out = vec![0.0; a.len()];
    plan.inverse_to_real(&mut fa, &mut out)?;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn naive_dft(x: &[f64]) -> Vec<Complex64> {
        let n = x.len();
        (0..n)
            .map(|k| {
                x.iter()
                    .enumerate()
                    .map(|(j, &v)| {
                        let angle = -2.0 * std::f64::consts::PI * (j * k % n) as f64 / n as f64;
                        Complex64::new(angle.cos(), angle.sin()) * v
                    })
                    .sum()
            })
            .collect()
    }

    fn naive_convolve(a: &[f64], b: &[f64]) -> Vec<f64> {
        let n = a.len();
        let mut out = vec![0.0; n];
        for i in 0..n {
            for j in 0..n {
                out[(i + j) % n] += a[i] * b[j];
            }
        }
        out
    }

    fn random_vec(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
        (0..n).map(|_| rng.random_range(-1.0..1.0)).collect()
    }

    fn complex_close(a: &[Complex64], b: &[Complex64], tol: f64) {
        assert_eq!(a.len(), b.len());
        for (x, y) in a.iter().zip(b) {
            assert!((x - y).norm() <= tol, "{x} vs {y}");
        }
    }

    #[test]
    fn delta_transforms_to_constant() {
        let s = fft(&[1.0, 0.0, 0.0, 0.0]).unwrap();
        complex_close(s.values(), &[Complex64::new(1.0, 0.0); 4], 0.0);
    }

    #[test]
    fn constant_transforms_to_delta() {
        let s = fft(&[1.0; 4]).unwrap();
        let expected = [4.0, 0.0, 0.0, 0.0].map(|x| Complex64::new(x, 0.0));
        complex_close(s.values(), &expected, 1e-15);
    }

    #[test]
    fn zeros_transform_to_zeros() {
        let s = fft(&[0.0; 8]).unwrap();
        assert!(s.values().iter().all(|v| *v == Complex64::new(0.0, 0.0)));
    }

    #[test]
    fn matches_naive_dft() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let x = random_vec(&mut rng, 8);
        complex_close(fft(&x).unwrap().values(), &naive_dft(&x), 1e-10);
    }

    #[test]
    fn rejects_non_power_of_two() {
        assert!(matches!(fft(&[1.0; 6]), Err(Error::Dimension(_))));
        assert!(matches!(fft(&[]), Err(Error::Dimension(_))));
        assert!(matches!(
            circular_convolve(&[1.0; 4], &[1.0; 8]),
            Err(Error::Dimension(_))
        ));
    }

    #[test]
    fn round_trip_small() {
        let x = [3.0, -1.0, 2.0, 0.0];
        let back = ifft(&fft(&x).unwrap()).unwrap();
        for (a, b) in x.iter().zip(&back) {
            assert!((a - b).abs() <= 1e-10);
        }
    }

    #[test]
    fn inverse_of_constant_spectrum() {
        let s = Spectrum::new(vec![
            Complex64::new(4.0, 0.0),
            Complex64::new(0.0, 0.0),
            Complex64::new(0.0, 0.0),
            Complex64::new(0.0, 0.0),
        ])
        .unwrap();
        assert_eq!(ifft(&s).unwrap(), vec![1.0; 4]);
    }

    #[test]
    fn round_trip_random_16() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let x = random_vec(&mut rng, 16);
        let back = ifft(&fft(&x).unwrap()).unwrap();
        let err = x
            .iter()
            .zip(&back)
            .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
        assert!(err < 1e-10);
    }

    #[test]
    fn non_hermitian_spectrum_is_rejected() {
        let s = Spectrum::new(vec![
            Complex64::new(0.0, 0.0),
            Complex64::new(1.0, 0.0),
            Complex64::new(0.0, 0.0),
            Complex64::new(0.0, 0.0),
        ])
        .unwrap();
        assert!(matches!(ifft(&s), Err(Error::NumericIntegrity(_))));
    }

    #[test]
    fn non_finite_spectrum_is_rejected() {
        let v = vec![Complex64::new(f64::NAN, 0.0), Complex64::new(0.0, 0.0)];
        assert!(matches!(Spectrum::new(v), Err(Error::NumericIntegrity(_))));
    }

    #[test]
    fn convolution_identity_and_shift() {
        let b = [1.5, -2.0, 0.25, 4.0];
        assert_eq!(circular_convolve(&[1.0, 0.0, 0.0, 0.0], &b).unwrap(), b);
        let shifted = circular_convolve(&[0.0, 1.0, 0.0, 0.0], &b).unwrap();
        let expected = [b[3], b[0], b[1], b[2]];
        for (a, e) in shifted.iter().zip(&expected) {
            assert!((a - e).abs() <= 1e-12);
        }
    }

    #[test]
    fn convolution_matches_naive_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let a = random_vec(&mut rng, 8);
        let b = random_vec(&mut rng, 8);
        let fast = circular_convolve(&a, &b).unwrap();
        for (x, y) in fast.iter().zip(naive_convolve(&a, &b)) {
            assert!((x - y).abs() <= 1e-10);
        }
    }

    #[test]
    fn convolution_theorem_all_small_lengths() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for n in [1, 2, 4, 8, 16] {
            for _ in 0..100 {
                let a = random_vec(&mut rng, n);
                let b = random_vec(&mut rng, n);
                let fast = circular_convolve(&a, &b).unwrap();
                for (x, y) in fast.iter().zip(naive_convolve(&a, &b)) {
                    assert!((x - y).abs() <= 1e-10, "n = {n}");
                }
            }
        }
    }

    proptest! {
        #[test]
        fn parseval(log_n in 0u32..8, seed in any::<u64>()) {
            let n = 1usize << log_n;
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let x = random_vec(&mut rng, n);
            let time: f64 = x.iter().map(|v| v * v).sum();
            let freq: f64 = fft(&x).unwrap().values().iter().map(|v| v.norm_sqr()).sum();
            prop_assert!((freq - n as f64 * time).abs() <= 1e-9 * (n as f64 * time).max(1e-300));
        }

        #[test]
        fn linearity(log_n in 0u32..7, seed in any::<u64>(), alpha in -3.0f64..3.0, beta in -3.0f64..3.0) {
            let n = 1usize << log_n;
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let a = random_vec(&mut rng, n);
            let b = random_vec(&mut rng, n);
            let mix: Vec<f64> = a.iter().zip(&b).map(|(x, y)| alpha * x + beta * y).collect();
            let lhs = fft(&mix).unwrap();
            let fa = fft(&a).unwrap();
            let fb = fft(&b).unwrap();
            for ((l, x), y) in lhs.values().iter().zip(fa.values()).zip(fb.values()) {
                prop_assert!((l - (x * alpha + y * beta)).norm() <= 1e-10);
            }
        }
    }
}
