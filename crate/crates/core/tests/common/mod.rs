#![allow(dead_code)]

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use std::f64::consts::PI;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn phi(x: f64) -> f64 {
    (-0.5 * x * x).exp() / (2.0 * PI).sqrt()
}

pub fn big_phi(x: f64) -> f64 {
    0.5 * statrs::function::erf::erfc(-x / std::f64::consts::SQRT_2)
}

/// Composite Simpson rule with `n` (even) panels.
pub fn simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, n: usize) -> f64 {
    let n = n + n % 2;
    let h = (b - a) / n as f64;
    let mut s = f(a) + f(b);
    for i in 1..n {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        s += w * f(a + h * i as f64);
    }
    s * h / 3.0
}

pub fn random_matrix(rows: usize, cols: usize, r: &mut ChaCha8Rng) -> DMatrix<Complex64> {
    DMatrix::from_fn(rows, cols, |_, _| {
        let a: f64 = r.sample(StandardNormal);
        let b: f64 = r.sample(StandardNormal);
        Complex64::new(a, b) * std::f64::consts::FRAC_1_SQRT_2
    })
}

pub fn random_bits(n: usize, r: &mut ChaCha8Rng) -> Vec<u8> {
    (0..n).map(|_| r.random::<bool>() as u8).collect()
}

pub fn rel_err(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1e-300)
}
