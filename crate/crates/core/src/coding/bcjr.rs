//! Forward-backward APP decoding over the zero-terminated trellis.

use serde::{Deserialize, Serialize};

use super::conv::Trellis;
use super::modulation::{clamp_llr, LLR_CLAMP};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BcjrMode {
    /// Exact sum-product, evaluated with per-step normalized probabilities.
    #[default]
    Exact,
    /// Max-log approximation in the log domain.
    MaxLog,
}

/// APP LLRs (`ln p(1)/p(0)`) of the information bits and of all coded bits.
#[derive(Debug, Clone, PartialEq)]
pub struct BcjrOutput {
    pub info: Vec<f64>,
    pub coded: Vec<f64>,
}

impl BcjrOutput {
    pub fn info_hard(&self) -> Vec<u8> {
        self.info.iter().map(|&l| (l > 0.0) as u8).collect()
    }

    pub fn coded_hard(&self) -> Vec<u8> {
        self.coded.iter().map(|&l| (l > 0.0) as u8).collect()
    }
}

trait Semiring {
    const ZERO: f64;
    const ONE: f64;
    fn add(a: f64, b: f64) -> f64;
    fn mul(a: f64, b: f64) -> f64;
    /// Branch weights for the four output labels, scaled so the largest is `ONE`.
    fn branch(l0: f64, l1: f64) -> [f64; 4];
    fn normalize(v: &mut [f64]);
    fn llr(p1: f64, p0: f64) -> f64;
}

struct Prob;
struct MaxLog;

fn half_metrics(l0: f64, l1: f64) -> [f64; 4] {
    let (a, b) = (0.5 * clamp_llr(l0), 0.5 * clamp_llr(l1));
    let m = a.abs() + b.abs();
    [-a - b - m, a - b - m, -a + b - m, a + b - m]
}

impl Semiring for Prob {
    const ZERO: f64 = 0.0;
    const ONE: f64 = 1.0;
    fn add(a: f64, b: f64) -> f64 {
        a + b
    }
    fn mul(a: f64, b: f64) -> f64 {
        a * b
    }
    fn branch(l0: f64, l1: f64) -> [f64; 4] {
        half_metrics(l0, l1).map(f64::exp)
    }
    fn normalize(v: &mut [f64]) {
        let s: f64 = v.iter().sum();
        if s > 0.0 {
            let inv = 1.0 / s;
            v.iter_mut().for_each(|x| *x *= inv);
        }
    }
    fn llr(p1: f64, p0: f64) -> f64 {
        match (p1 > 0.0, p0 > 0.0) {
            (true, true) => clamp_llr((p1 / p0).ln()),
            (true, false) => LLR_CLAMP,
            (false, true) => -LLR_CLAMP,
            (false, false) => 0.0,
        }
    }
}

impl Semiring for MaxLog {
    const ZERO: f64 = f64::NEG_INFINITY;
    const ONE: f64 = 0.0;
    fn add(a: f64, b: f64) -> f64 {
        a.max(b)
    }
    fn mul(a: f64, b: f64) -> f64 {
        a + b
    }
    fn branch(l0: f64, l1: f64) -> [f64; 4] {
        half_metrics(l0, l1)
    }
    fn normalize(v: &mut [f64]) {
        let m = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if m.is_finite() {
            v.iter_mut().for_each(|x| *x -= m);
        }
    }
    fn llr(p1: f64, p0: f64) -> f64 {
        if p1 == f64::NEG_INFINITY && p0 == f64::NEG_INFINITY {
            0.0
        } else {
            clamp_llr(p1 - p0)
        }
    }
}

/// Decodes one terminated codeword from its coded-bit LLRs (in encoder order).
pub fn bcjr_decode(llrs: &[f64], trellis: &Trellis, mode: BcjrMode) -> Result<BcjrOutput> {
    match mode {
        BcjrMode::Exact => run::<Prob>(llrs, trellis),
        BcjrMode::MaxLog => run::<MaxLog>(llrs, trellis),
    }
}

fn run<S: Semiring>(llrs: &[f64], trellis: &Trellis) -> Result<BcjrOutput> {
    let mem = trellis.memory();
    if llrs.len() % 2 != 0 || llrs.len() / 2 <= mem {
        return Err(Error::invalid(format!(
            "{} LLRs do not form a terminated rate-1/2 codeword",
            llrs.len()
        )));
    }
    let steps = llrs.len() / 2;
    let n_info = steps - mem;
    let ns = trellis.num_states;
    let gammas: Vec<[f64; 4]> = llrs.chunks(2).map(|p| S::branch(p[0], p[1])).collect();
    let inputs = |t: usize| if t < n_info { 2 } else { 1 };

    let mut alpha = vec![S::ZERO; (steps + 1) * ns];
    alpha[0] = S::ONE;
    for t in 0..steps {
        let (cur, nxt) = alpha[t * ns..(t + 2) * ns].split_at_mut(ns);
        let g = &gammas[t];
        for s in 0..ns {
            let a = cur[s];
            if a == S::ZERO {
                continue;
            }
            for u in 0..inputs(t) {
                let to = trellis.next[s][u] as usize;
                let o = trellis.output[s][u] as usize;
                nxt[to] = S::add(nxt[to], S::mul(a, g[o]));
            }
        }
        S::normalize(nxt);
    }

    let mut info = vec![0.0; n_info];
    let mut coded = vec![0.0; 2 * steps];
    let mut beta = vec![S::ZERO; ns];
    beta[0] = S::ONE;
    let mut beta_prev = vec![S::ZERO; ns];
    for t in (0..steps).rev() {
        let a = &alpha[t * ns..(t + 1) * ns];
        let g = &gammas[t];
        let mut pu = [S::ZERO; 2];
        let mut pc0 = [S::ZERO; 2];
        let mut pc1 = [S::ZERO; 2];
        beta_prev.iter_mut().for_each(|x| *x = S::ZERO);
        for s in 0..ns {
            for u in 0..inputs(t) {
                let to = trellis.next[s][u] as usize;
                let o = trellis.output[s][u] as usize;
                let gb = S::mul(g[o], beta[to]);
                beta_prev[s] = S::add(beta_prev[s], gb);
                let p = S::mul(a[s], gb);
                pu[u] = S::add(pu[u], p);
                pc0[o & 1] = S::add(pc0[o & 1], p);
                pc1[o >> 1] = S::add(pc1[o >> 1], p);
            }
        }
        if t < n_info {
            info[t] = S::llr(pu[1], pu[0]);
        }
        coded[2 * t] = S::llr(pc0[1], pc0[0]);
        coded[2 * t + 1] = S::llr(pc1[1], pc1[0]);
        S::normalize(&mut beta_prev);
        std::mem::swap(&mut beta, &mut beta_prev);
    }
    Ok(BcjrOutput { info, coded })
}
