//! Segmented FFT analysis: split a series into non-overlapping segments and
//! keep the per-segment DFT coefficients.
//!
//! A series of length T cut into `n_f`-point segments yields
//! `n_seg = floor(T / n_f)` rows; the trailing `T - n_seg * n_f` samples are
//! discarded. Each row holds the unnormalized `n_f`-point DFT of one
//! rectangular-windowed segment, so across rows every frequency bin carries
//! `n_seg` complex samples of that bin's spectral content. All bins are
//! retained, including the conjugate-redundant upper half.

use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::mi::RealMatrix;

/// Per-segment DFT coefficients of one series: an `n_seg x n_f` complex matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralTensor {
    n_seg: usize,
    n_f: usize,
    coeffs: Vec<Complex64>,
}

impl SpectralTensor {
    pub fn n_seg(&self) -> usize {
        self.n_seg
    }

    pub fn n_f(&self) -> usize {
        self.n_f
    }

    /// Coefficients of segment `s`, one per frequency bin.
    pub fn row(&self, s: usize) -> &[Complex64] {
        &self.coeffs[s * self.n_f..(s + 1) * self.n_f]
    }

    pub fn coeff(&self, s: usize, k: usize) -> Complex64 {
        self.coeffs[s * self.n_f + k]
    }
}

/// Cut `series` into non-overlapping `n_f`-point segments and take the
/// unnormalized DFT of each.
///
/// Fails unless at least two whole segments fit (`T >= 2 * n_f`), since a
/// single spectral sample per bin supports no dependence estimate.
pub fn segment_and_fft(series: &[f64], n_f: usize) -> Result<SpectralTensor> {
    if n_f == 0 {
        return Err(Error::InvalidConfig("fft length must be positive".into()));
    }
    let t = series.len();
    if t < 2 * n_f {
        return Err(Error::SeriesTooShort {
            len: t,
            n_f,
            min: 2 * n_f,
        });
    }
    let n_seg = t / n_f;
    let fft = FftPlanner::new().plan_fft_forward(n_f);
    let mut coeffs = Vec::with_capacity(n_seg * n_f);
    let mut buf = vec![Complex64::default(); n_f];
    for s in 0..n_seg {
        for (b, &v) in buf.iter_mut().zip(&series[s * n_f..(s + 1) * n_f]) {
            *b = Complex64::new(v, 0.0);
        }
        fft.process(&mut buf);
        coeffs.extend_from_slice(&buf);
    }
    Ok(SpectralTensor { n_seg, n_f, coeffs })
}

/// Extract bin `k` across all segments as an `n_seg x 2` real matrix:
/// column 0 the real parts, column 1 the imaginary parts.
pub fn freq_samples(tensor: &SpectralTensor, k: usize) -> Result<RealMatrix> {
    if k >= tensor.n_f {
        return Err(Error::BinOutOfRange {
            bin: k,
            n_f: tensor.n_f,
        });
    }
    let mut data = Vec::with_capacity(tensor.n_seg * 2);
    for s in 0..tensor.n_seg {
        let c = tensor.coeff(s, k);
        data.push(c.re);
        data.push(c.im);
    }
    RealMatrix::new(tensor.n_seg, 2, data)
}
