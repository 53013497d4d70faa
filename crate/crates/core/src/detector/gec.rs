//! Generalized expectation-consistent detection (coded and uncoded).

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::lmmse::{lmmse_stage, SvdFactorization};
use crate::channel::CMatrix;
use crate::coding::{bcjr_decode, demap_hard, soft_demod, soft_modulate, BcjrMode, Interleaver, Trellis};
use crate::error::{Error, Result};
use crate::frontend::{extrinsic_update, posterior_z, AdcSpec, QuantizedObs, VarianceClip};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GecConfig {
    pub max_iter: usize,
    /// Convex damping on fed-back means and precisions; 0 disables it.
    pub damping: f64,
    pub clip: VarianceClip,
    /// Stop once successive `v_2x` differ by less than this (or the x posterior sits at the clip floor).
    pub tol: f64,
    pub bcjr: BcjrMode,
}

impl Default for GecConfig {
    fn default() -> Self {
        Self {
            max_iter: 30,
            damping: 0.0,
            clip: VarianceClip::default(),
            tol: 1e-8,
            bcjr: BcjrMode::Exact,
        }
    }
}

impl GecConfig {
    pub fn validate(&self) -> Result<()> {
        if self.max_iter == 0 {
            return Err(Error::invalid("max_iter must be at least 1"));
        }
        if !(0.0..1.0).contains(&self.damping) {
            return Err(Error::invalid("damping must lie in [0, 1)"));
        }
        if !(self.clip.min > 0.0 && self.clip.min < self.clip.max) {
            return Err(Error::invalid("variance clip needs 0 < min < max"));
        }
        Ok(())
    }
}

/// Extrinsic messages of one detector run; matrices are `N × T` or `K × T`
/// with one column per channel use, variances shared across uses.
#[derive(Debug, Clone)]
pub struct GecState {
    pub r1z: CMatrix,
    pub v1z: f64,
    pub r2z: CMatrix,
    pub v2z: f64,
    pub r1x: CMatrix,
    pub v1x: f64,
    pub r2x: CMatrix,
    pub v2x: f64,
    pub iteration: usize,
}

impl GecState {
    /// `r_2x = 0`, `v_2x = 1`, `r_1z = 0`, `v_1z = P_z`.
    pub fn initial(n: usize, k: usize, uses: usize, power: f64) -> Self {
        Self {
            r1z: CMatrix::zeros(n, uses),
            v1z: power,
            r2z: CMatrix::zeros(n, uses),
            v2z: 1.0,
            r1x: CMatrix::zeros(k, uses),
            v1x: 1.0,
            r2x: CMatrix::zeros(k, uses),
            v2x: 1.0,
            iteration: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationDiag {
    pub iteration: usize,
    pub v1z: f64,
    pub v2z: f64,
    pub v1x: f64,
    pub v2x: f64,
    /// Bit errors against the supplied truth, if any.
    pub bit_errors: Option<usize>,
    pub tail_events: usize,
    pub clip_events: usize,
}

#[derive(Debug, Clone)]
pub struct GecOutput {
    /// Information bits (coded detector) or demapped symbol bits (uncoded).
    pub bits: Vec<u8>,
    pub diagnostics: Vec<IterationDiag>,
    pub converged: bool,
    pub state: GecState,
}

/// Everything the detectors need to know about one received block.
#[derive(Debug, Clone, Copy)]
pub struct DetectorInput<'a> {
    pub obs: &'a QuantizedObs,
    pub svd: &'a SvdFactorization,
    /// `P_z = tr(AAᴴ)/N`.
    pub power: f64,
    pub noise_var: f64,
    pub adc: &'a AdcSpec,
}

impl DetectorInput<'_> {
    fn check(&self) -> Result<()> {
        if self.obs.rows != self.svd.n_rx {
            return Err(Error::invalid(format!(
                "observation has {} rows but the channel has {} receive antennas",
                self.obs.rows, self.svd.n_rx
            )));
        }
        if self.obs.cols == 0 {
            return Err(Error::invalid("observation has no channel uses"));
        }
        if !(self.power > 0.0) || self.noise_var < 0.0 {
            return Err(Error::invalid("detector needs P_z > 0 and v_w ≥ 0"));
        }
        Ok(())
    }
}

/// The x-side estimator: maps the extrinsic `(r_1x, v_1x)` to posterior
/// means and their average variance, and reports current hard bits.
trait XEstimator {
    fn estimate(&mut self, r1x: &[Complex64], v1x: f64) -> Result<(Vec<Complex64>, f64)>;
    fn hard_bits(&self) -> Vec<u8>;
}

struct CodedEstimator<'a> {
    trellis: &'a Trellis,
    interleaver: &'a Interleaver,
    mode: BcjrMode,
    info: Vec<f64>,
}

impl XEstimator for CodedEstimator<'_> {
    fn estimate(&mut self, r1x: &[Complex64], v1x: f64) -> Result<(Vec<Complex64>, f64)> {
        let llr = soft_demod(r1x, v1x)?;
        let coded_in = self.interleaver.deinterleave(&llr)?;
        let app = bcjr_decode(&coded_in, self.trellis, self.mode)?;
        let coded_out = self.interleaver.interleave(&app.coded)?;
        self.info = app.info;
        let (mean, var) = soft_modulate(&coded_out)?;
        Ok((mean, avg(&var)))
    }

    fn hard_bits(&self) -> Vec<u8> {
        self.info.iter().map(|&l| (l > 0.0) as u8).collect()
    }
}

struct UncodedEstimator {
    mean: Vec<Complex64>,
}

impl XEstimator for UncodedEstimator {
    fn estimate(&mut self, r1x: &[Complex64], v1x: f64) -> Result<(Vec<Complex64>, f64)> {
        let (mean, var) = soft_modulate(&soft_demod(r1x, v1x)?)?;
        self.mean = mean.clone();
        Ok((mean, avg(&var)))
    }

    fn hard_bits(&self) -> Vec<u8> {
        demap_hard(&self.mean)
    }
}

fn avg(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len().max(1) as f64
}

fn to_matrix(rows: usize, cols: usize, v: Vec<Complex64>) -> CMatrix {
    CMatrix::from_vec(rows, cols, v)
}

fn damp(old: &CMatrix, old_v: f64, new: CMatrix, new_v: f64, rho: f64) -> (CMatrix, f64) {
    if rho == 0.0 {
        return (new, new_v);
    }
    let mean = new.scale(1.0 - rho) + old.scale(rho);
    let var = 1.0 / ((1.0 - rho) / new_v + rho / old_v);
    (mean, var)
}

fn run_gec<E: XEstimator>(
    input: &DetectorInput,
    estimator: &mut E,
    config: &GecConfig,
    truth: Option<&[u8]>,
) -> Result<GecOutput> {
    input.check()?;
    config.validate()?;
    let (n, k, uses) = (input.svd.n_rx, input.svd.n_tx, input.obs.cols);
    let clip = config.clip;
    let mut st = GecState::initial(n, k, uses, input.power);
    let mut diagnostics = Vec::new();
    let mut converged = false;
    for t in 1..=config.max_iter {
        let mut clip_events = 0;
        // Step 1: quantized-output estimator, extrinsic on z.
        let post = posterior_z(input.obs, st.r1z.as_slice(), st.v1z, input.noise_var, input.adc)?;
        let ez = extrinsic_update(&post.mean, post.avg_var(), st.r1z.as_slice(), st.v1z, clip);
        clip_events += ez.clipped as usize;
        st.r2z = to_matrix(n, uses, ez.mean);
        st.v2z = ez.var;

        // Step 2: LMMSE, extrinsic on x.
        let lin = lmmse_stage(&st.r2x, st.v2x, &st.r2z, st.v2z, input.svd)?;
        let ex = extrinsic_update(lin.x.as_slice(), lin.dqx, st.r2x.as_slice(), st.v2x, clip);
        clip_events += ex.clipped as usize;
        st.r1x = to_matrix(k, uses, ex.mean);
        st.v1x = ex.var;

        // Step 3: symbol/code estimator, extrinsic on x.
        let (x1, v1_post) = estimator.estimate(st.r1x.as_slice(), st.v1x)?;
        let ex2 = extrinsic_update(&x1, v1_post, st.r1x.as_slice(), st.v1x, clip);
        clip_events += ex2.clipped as usize;
        let old_v2x = st.v2x;
        let (r2x, v2x) = damp(&st.r2x, st.v2x, to_matrix(k, uses, ex2.mean), ex2.var, if t > 1 { config.damping } else { 0.0 });
        st.r2x = r2x;
        st.v2x = clip.apply(v2x);

        // Step 4: LMMSE again, extrinsic on z.
        let lin = lmmse_stage(&st.r2x, st.v2x, &st.r2z, st.v2z, input.svd)?;
        let ez2 = extrinsic_update(lin.z.as_slice(), lin.dqz, st.r2z.as_slice(), st.v2z, clip);
        clip_events += ez2.clipped as usize;
        let (r1z, v1z) = damp(&st.r1z, st.v1z, to_matrix(n, uses, ez2.mean), ez2.var, if t > 1 { config.damping } else { 0.0 });
        st.r1z = r1z;
        st.v1z = clip.apply(v1z);
        st.iteration = t;

        let bit_errors = truth.map(|tr| {
            let hard = estimator.hard_bits();
            tr.iter().zip(&hard).filter(|(a, b)| a != b).count()
        });
        diagnostics.push(IterationDiag {
            iteration: t,
            v1z: st.v1z,
            v2z: st.v2z,
            v1x: st.v1x,
            v2x: st.v2x,
            bit_errors,
            tail_events: post.tail_events,
            clip_events,
        });
        // A decoder pinned at the variance floor has nothing left to refine.
        if t > 1 && ((st.v2x - old_v2x).abs() < config.tol || v1_post <= clip.min) {
            converged = true;
            break;
        }
    }
    Ok(GecOutput {
        bits: estimator.hard_bits(),
        diagnostics,
        converged,
        state: st,
    })
}

fn check_symbols(input: &DetectorInput, symbols: usize) -> Result<()> {
    let expected = input.svd.n_tx * input.obs.cols;
    if symbols != expected {
        return Err(Error::invalid(format!(
            "{symbols} codeword symbols do not fill {} channel uses × K = {}",
            input.obs.cols, input.svd.n_tx
        )));
    }
    Ok(())
}

/// GEC-C: coded detection with BCJR in the loop; returns decoded information bits.
pub fn detect_gecc(
    input: &DetectorInput,
    trellis: &Trellis,
    interleaver: &Interleaver,
    config: &GecConfig,
    truth: Option<&[u8]>,
) -> Result<GecOutput> {
    if interleaver.len() % 2 != 0 {
        return Err(Error::invalid("interleaver length must be even for 4-QAM"));
    }
    check_symbols(input, interleaver.len() / 2)?;
    let mut est = CodedEstimator {
        trellis,
        interleaver,
        mode: config.bcjr,
        info: Vec::new(),
    };
    run_gec(input, &mut est, config, truth)
}

/// GEC-U: separable 4-QAM prior; returns hard bits of every symbol in order.
pub fn detect_gecu(input: &DetectorInput, config: &GecConfig, truth: Option<&[u8]>) -> Result<GecOutput> {
    let mut est = UncodedEstimator { mean: Vec::new() };
    run_gec(input, &mut est, config, truth)
}
