//! Gray-mapped 4-QAM with soft demodulation and soft remodulation.

use num_complex::Complex64;
use std::f64::consts::{FRAC_1_SQRT_2, SQRT_2};

use crate::error::{Error, Result};

/// Magnitude at which LLRs are clamped so that `tanh`/`exp` stay finite.
pub const LLR_CLAMP: f64 = 60.0;

pub fn clamp_llr(l: f64) -> f64 {
    if l.is_nan() {
        0.0
    } else {
        l.clamp(-LLR_CLAMP, LLR_CLAMP)
    }
}

/// Bit pairs `(re, im)` to symbols; bit 1 maps to `+1/√2`.
pub fn map_qam4(bits: &[u8]) -> Result<Vec<Complex64>> {
    if bits.len() % 2 != 0 {
        return Err(Error::invalid("4-QAM mapping needs an even number of bits"));
    }
    let level = |b: u8| if b == 1 { FRAC_1_SQRT_2 } else { -FRAC_1_SQRT_2 };
    Ok(bits.chunks(2).map(|p| Complex64::new(level(p[0]), level(p[1]))).collect())
}

/// Nearest-point hard decisions, inverse of [`map_qam4`].
pub fn demap_hard(symbols: &[Complex64]) -> Vec<u8> {
    symbols
        .iter()
        .flat_map(|s| [(s.re > 0.0) as u8, (s.im > 0.0) as u8])
        .collect()
}

/// LLRs `2√2·Re(r)/v`, `2√2·Im(r)/v` for a common variance `v`.
pub fn soft_demod(r: &[Complex64], v: f64) -> Result<Vec<f64>> {
    if !(v > 0.0) {
        return Err(Error::invalid(format!("demodulation variance {v} must be positive")));
    }
    let s = 2.0 * SQRT_2 / v;
    Ok(r.iter().flat_map(|x| [clamp_llr(s * x.re), clamp_llr(s * x.im)]).collect())
}

/// Posterior symbol means and variances implied by independent bit LLRs.
pub fn soft_modulate(llrs: &[f64]) -> Result<(Vec<Complex64>, Vec<f64>)> {
    if llrs.len() % 2 != 0 {
        return Err(Error::invalid("soft modulation needs an even number of LLRs"));
    }
    let mut means = Vec::with_capacity(llrs.len() / 2);
    let mut vars = Vec::with_capacity(llrs.len() / 2);
    for p in llrs.chunks(2) {
        let tr = (0.5 * clamp_llr(p[0])).tanh();
        let ti = (0.5 * clamp_llr(p[1])).tanh();
        means.push(Complex64::new(tr, ti) * FRAC_1_SQRT_2);
        vars.push((1.0 - 0.5 * (tr * tr + ti * ti)).clamp(0.0, 1.0));
    }
    Ok((means, vars))
}

/// Symbol-wise MMSE denoiser for uniform 4-QAM observed as `r = x + n`,
/// `n ~ CN(0, v)`: returns posterior means and variances.
pub fn qam4_denoise(r: &[Complex64], v: f64) -> Result<(Vec<Complex64>, Vec<f64>)> {
    soft_modulate(&soft_demod(r, v)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn mapping_examples() {
        let s = map_qam4(&[1, 1, 0, 0, 1, 0]).unwrap();
        assert_relative_eq!(s[0].re, FRAC_1_SQRT_2);
        assert_relative_eq!(s[0].im, FRAC_1_SQRT_2);
        assert_relative_eq!(s[1].re, -FRAC_1_SQRT_2);
        assert_relative_eq!(s[2].im, -FRAC_1_SQRT_2);
        let all = map_qam4(&[0, 0, 0, 1, 1, 0, 1, 1]).unwrap();
        let p: f64 = all.iter().map(|x| x.norm_sqr()).sum::<f64>() / 4.0;
        assert_relative_eq!(p, 1.0, epsilon = 1e-15);
        assert!(map_qam4(&[1]).is_err());
        assert_eq!(demap_hard(&all), vec![0, 0, 0, 1, 1, 0, 1, 1]);
    }

    #[test]
    fn soft_demod_examples() {
        let l = soft_demod(&[Complex64::new(FRAC_1_SQRT_2, 0.0)], 1.0).unwrap();
        assert_relative_eq!(l[0], 2.0, epsilon = 1e-14);
        assert_eq!(l[1], 0.0);
        assert!(soft_demod(&[Complex64::new(1.0, 0.0)], 0.0).is_err());
    }

    #[test]
    fn soft_modulate_examples() {
        let (m, v) = soft_modulate(&[0.0, 0.0, f64::INFINITY, f64::INFINITY]).unwrap();
        assert_eq!(m[0], Complex64::new(0.0, 0.0));
        assert_eq!(v[0], 1.0);
        assert_relative_eq!(m[1].re, FRAC_1_SQRT_2, epsilon = 1e-15);
        assert!(v[1] < 1e-15);
    }
}
