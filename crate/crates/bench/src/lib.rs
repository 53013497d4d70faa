//! Deterministic inputs shared by the benchmarks.

use nalgebra::DMatrix;
use num_complex::Complex64;

/// Smooth pseudo-random values in `[-1, 1]`, stable across runs.
pub fn wobble(i: usize, salt: f64) -> f64 {
    ((i as f64 + 1.0) * (12.9898 + salt)).sin()
}

pub fn complex_matrix(rows: usize, cols: usize, salt: f64) -> DMatrix<Complex64> {
    DMatrix::from_fn(rows, cols, |r, c| {
        let i = r * cols + c;
        Complex64::new(wobble(i, salt), wobble(i, salt + 0.5))
    })
}

/// Channel LLRs for an all-zero codeword seen at moderate SNR.
pub fn noisy_llrs(len: usize) -> Vec<f64> {
    (0..len).map(|i| -2.0 + 1.5 * wobble(i, 3.0)).collect()
}
