//! SVD-accelerated linear MMSE stage shared by both GEC sweeps.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::channel::CMatrix;
use crate::error::{Error, Result};

/// Thin SVD `A = U·diag(s)·Vᴴ` computed once per channel.
#[derive(Debug, Clone)]
pub struct SvdFactorization {
    pub u: CMatrix,
    pub s: Vec<f64>,
    pub v: CMatrix,
    pub n_rx: usize,
    pub n_tx: usize,
}

impl SvdFactorization {
    pub fn new(a: &CMatrix) -> Result<Self> {
        if a.nrows() == 0 || a.ncols() == 0 {
            return Err(Error::invalid("channel matrix must be nonempty"));
        }
        let svd = a.clone().svd(true, true);
        let u = svd.u.ok_or_else(|| Error::invalid("SVD failed to produce U"))?;
        let v_t = svd.v_t.ok_or_else(|| Error::invalid("SVD failed to produce Vᴴ"))?;
        Ok(Self {
            u,
            s: svd.singular_values.iter().copied().collect(),
            v: v_t.adjoint(),
            n_rx: a.nrows(),
            n_tx: a.ncols(),
        })
    }

    pub fn reconstruct(&self) -> CMatrix {
        let mut us = self.u.clone();
        for (j, &s) in self.s.iter().enumerate() {
            us.column_mut(j).scale_mut(s);
        }
        us * self.v.adjoint()
    }

    /// `A·x` through the factors.
    pub fn apply(&self, x: &CMatrix) -> CMatrix {
        let mut w = self.v.adjoint() * x;
        scale_rows(&mut w, &self.s);
        &self.u * w
    }

    /// `Aᴴ·y` through the factors.
    pub fn apply_adjoint(&self, y: &CMatrix) -> CMatrix {
        let mut w = self.u.adjoint() * y;
        scale_rows(&mut w, &self.s);
        &self.v * w
    }
}

fn scale_rows(m: &mut CMatrix, s: &[f64]) {
    for (j, &sj) in s.iter().enumerate() {
        m.row_mut(j).scale_mut(sj);
    }
}

#[derive(Debug, Clone)]
pub struct LmmseOutput {
    pub x: CMatrix,
    /// `(1/K)·tr(Q_2x)`.
    pub dqx: f64,
    pub z: CMatrix,
    /// `(1/N)·tr(A·Q_2x·Aᴴ)`.
    pub dqz: f64,
}

/// Posterior of `x` under prior `CN(r_2x, v_2x)` and pseudo-observation
/// `r_2z = A·x + CN(0, v_2z)`, for every channel use (column) at once.
pub fn lmmse_stage(r2x: &CMatrix, v2x: f64, r2z: &CMatrix, v2z: f64, svd: &SvdFactorization) -> Result<LmmseOutput> {
    if r2x.nrows() != svd.n_tx || r2z.nrows() != svd.n_rx || r2x.ncols() != r2z.ncols() {
        return Err(Error::invalid("LMMSE input dimensions do not match the channel"));
    }
    if !(v2x > 0.0 && v2z > 0.0) {
        return Err(Error::invalid("LMMSE variances must be positive"));
    }
    let k = svd.n_tx as f64;
    let d: Vec<f64> = svd.s.iter().map(|&s| 1.0 / (1.0 / v2x + s * s / v2z)).collect();
    let mut u = svd.apply_adjoint(r2z);
    u.scale_mut(1.0 / v2z);
    u += r2x.scale(1.0 / v2x);
    let mut w = svd.v.adjoint() * &u;
    for (j, &dj) in d.iter().enumerate() {
        w.row_mut(j).scale_mut(dj - v2x);
    }
    let x = u.scale(v2x) + &svd.v * w;
    let z = svd.apply(&x);
    let rank = svd.s.len() as f64;
    let dqx = (d.iter().sum::<f64>() + (k - rank) * v2x) / k;
    let dqz = svd.s.iter().zip(&d).map(|(s, dj)| s * s * dj).sum::<f64>() / svd.n_rx as f64;
    Ok(LmmseOutput { x, dqx, z, dqz })
}

/// Reference evaluation with an explicit `K × K` inverse.
pub fn lmmse_dense(a: &CMatrix, r2x: &CMatrix, v2x: f64, r2z: &CMatrix, v2z: f64) -> Result<LmmseOutput> {
    let k = a.ncols();
    let ah = a.adjoint();
    let precision = DMatrix::<Complex64>::identity(k, k).scale(1.0 / v2x) + (&ah * a).scale(1.0 / v2z);
    let q = precision
        .try_inverse()
        .ok_or_else(|| Error::invalid("LMMSE precision matrix is singular"))?;
    let x = &q * (r2x.scale(1.0 / v2x) + (&ah * r2z).scale(1.0 / v2z));
    let z = a * &x;
    let dqx = q.trace().re / k as f64;
    let dqz = (a * &q * &ah).trace().re / a.nrows() as f64;
    Ok(LmmseOutput { x, dqx, z, dqz })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn identity_channel_averages() {
        let a = CMatrix::identity(3, 3);
        let svd = SvdFactorization::new(&a).unwrap();
        let rx = CMatrix::from_fn(3, 2, |i, j| Complex64::new(i as f64, j as f64));
        let rz = CMatrix::from_fn(3, 2, |i, j| Complex64::new(1.0, (i * j) as f64));
        let out = lmmse_stage(&rx, 1.0, &rz, 1.0, &svd).unwrap();
        assert_relative_eq!(out.dqx, 0.5, epsilon = 1e-14);
        for (x, (a, b)) in out.x.iter().zip(rx.iter().zip(rz.iter())) {
            assert_relative_eq!(x.re, 0.5 * (a.re + b.re), epsilon = 1e-14);
            assert_relative_eq!(x.im, 0.5 * (a.im + b.im), epsilon = 1e-14);
        }
    }

    #[test]
    fn wide_channel_pads_with_prior_variance() {
        // K = 3 > N = 1: two directions see only the prior.
        let a = CMatrix::from_row_slice(1, 3, &[Complex64::new(1.0, 0.0); 3]);
        let svd = SvdFactorization::new(&a).unwrap();
        let rx = CMatrix::zeros(3, 1);
        let rz = CMatrix::from_element(1, 1, Complex64::new(1.0, 0.0));
        let fast = lmmse_stage(&rx, 0.7, &rz, 0.2, &svd).unwrap();
        let dense = lmmse_dense(&a, &rx, 0.7, &rz, 0.2).unwrap();
        assert_relative_eq!(fast.dqx, dense.dqx, max_relative = 1e-12);
        assert_relative_eq!(fast.dqz, dense.dqz, max_relative = 1e-12);
    }
}
