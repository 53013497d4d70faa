//! Monte-Carlo BER runs, SE curves and parameter sweeps.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};
use std::time::Instant;

use super::config::{ArrayLayout, DetectorKind, ExperimentConfig, SnrMode, SweepAxis, SweepSpec};
use crate::channel::{synthesize, CMatrix, Scenario, SyntheticChannel};
use crate::coding::{conv_encode, map_qam4, Interleaver, InterleaverSpec, Trellis};
use crate::detector::{benchmark_aqnm, detect_gecc, detect_gecu, DetectorInput, SvdFactorization};
use crate::error::{Error, Result};
use crate::frontend::{default_scale, make_thresholds, quantize, AdcSpec};
use crate::se::{se_ascent, se_descent, CodeTransfer, Prior, SeSystem, SingularSpectrum};
use crate::seed::derive_seed;

/// One SNR point of a curve.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BerPoint {
    pub config_hash: String,
    pub curve: String,
    pub point: usize,
    /// Grid value as configured (SNR in dB or transmit power in dBm).
    pub grid_value: f64,
    /// Effective `P_ref/v_w` in dB.
    pub snr_db: f64,
    pub ber: Option<f64>,
    pub bit_errors: Option<u64>,
    pub bits: Option<u64>,
    pub codewords: Option<u64>,
    pub se_descent_ber: Option<f64>,
    pub se_ascent_ber: Option<f64>,
    /// Wall-clock seconds for the point; kept out of the CSV so reruns are bit-identical.
    #[serde(skip)]
    pub wall_time_s: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct BerCurve {
    pub points: Vec<BerPoint>,
}

impl BerCurve {
    pub fn snr_db(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.snr_db).collect()
    }

    pub fn mc_ber(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.ber.unwrap_or(f64::NAN)).collect()
    }

    pub fn se_descent(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.se_descent_ber.unwrap_or(f64::NAN)).collect()
    }

    pub fn se_ascent(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.se_ascent_ber.unwrap_or(f64::NAN)).collect()
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        write_curves(std::slice::from_ref(self), path)
    }

    pub fn read_csv(path: &Path) -> Result<Vec<BerPoint>> {
        let mut r = csv::Reader::from_path(path)?;
        Ok(r.deserialize().collect::<std::result::Result<_, _>>()?)
    }
}

/// Writes every point of every curve to one CSV.
pub fn write_curves(curves: &[BerCurve], path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    for c in curves {
        for p in &c.points {
            w.serialize(p)?;
        }
    }
    w.flush().map_err(|e| Error::io(path, e))?;
    Ok(())
}

/// Physical noise power (W) at the scenario's PSD and bandwidth.
fn physical_noise(s: &Scenario) -> f64 {
    s.noise_power()
}

/// Channel normalized to the continuous-phase reference power.
#[derive(Debug, Clone)]
pub struct PreparedChannel {
    /// `A / √P_ref`; its `P_z` is 1 for continuous phases.
    pub channel: SyntheticChannel,
    /// `P_z` of the continuous-phase version of the scenario (unnormalized).
    pub reference_power: f64,
    pub svd: SvdFactorization,
}

/// Synthesizes the scenario and its continuous-phase twin, normalizing so
/// the twin has unit `P_z`; phase-quantization losses then appear as `P_z < 1`.
pub fn prepare_channel(scenario: &Scenario) -> Result<PreparedChannel> {
    let ch = synthesize(scenario)?;
    let reference_power = if scenario.panels().iter().any(|p| p.phase_bits.is_some()) {
        let mut cont = scenario.clone();
        cont.phase_bits = None;
        cont.ris.iter_mut().for_each(|p| p.phase_bits = None);
        synthesize(&cont)?.power
    } else {
        ch.power
    };
    let channel = ch.normalized(ch.power / reference_power);
    let svd = SvdFactorization::new(&channel.matrix)?;
    Ok(PreparedChannel {
        channel,
        reference_power,
        svd,
    })
}

/// Noise level `v_w` (normalized units) and effective SNR in dB for a grid value.
pub fn noise_for_point(config: &ExperimentConfig, prepared: &PreparedChannel, value: f64) -> (f64, f64) {
    match config.snr.mode {
        SnrMode::Snr => (10f64.powf(-value / 10.0), value),
        SnrMode::Txpower => {
            let p_watt = 10f64.powf((value - 30.0) / 10.0);
            let snr = p_watt * prepared.reference_power / physical_noise(&config.scenario());
            (1.0 / snr, 10.0 * snr.log10())
        }
    }
}

fn adc_for(config: &ExperimentConfig, power: f64, noise_var: f64) -> Result<AdcSpec> {
    make_thresholds(config.adc_bits, default_scale(power, noise_var))
}

fn spectrum_of(ch: &SyntheticChannel) -> Result<SingularSpectrum> {
    SingularSpectrum::new(ch.singular_values.clone(), ch.n_tx(), ch.n_rx())
}

/// Loads (or builds and caches) the code-transfer table for `config`.
pub fn load_transfer(config: &ExperimentConfig) -> Result<CodeTransfer> {
    let dir = config
        .transfer_cache
        .clone()
        .unwrap_or_else(|| PathBuf::from("code-transfer-cache"));
    CodeTransfer::load_or_build(&dir, &config.transfer_params())
}

/// Descent and ascent final BERs at every grid point.
pub fn run_se_curve(config: &ExperimentConfig, transfer: Option<&CodeTransfer>) -> Result<BerCurve> {
    config.validate()?;
    let prepared = prepare_channel(&config.scenario())?;
    let owned;
    let prior = match config.detector {
        DetectorKind::Gecu => Prior::Uncoded,
        _ => {
            let t = match transfer {
                Some(t) => t,
                None => {
                    owned = load_transfer(config)?;
                    &owned
                }
            };
            Prior::Coded(t)
        }
    };
    let hash = config.hash();
    let spectrum = spectrum_of(&prepared.channel)?;
    let points = config
        .snr
        .points()
        .iter()
        .enumerate()
        .map(|(i, &value)| {
            let start = Instant::now();
            let (vw, snr_db) = noise_for_point(config, &prepared, value);
            let system = SeSystem {
                spectrum: spectrum.clone(),
                power: prepared.channel.power,
                noise_var: vw,
                adc: adc_for(config, prepared.channel.power, vw)?,
            };
            let d = se_descent(&system, prior, &config.se)?;
            let a = se_ascent(&system, prior, &config.se)?;
            Ok(BerPoint {
                config_hash: hash.clone(),
                curve: "se".into(),
                point: i,
                grid_value: value,
                snr_db,
                ber: None,
                bit_errors: None,
                bits: None,
                codewords: None,
                se_descent_ber: Some(d.final_ber()),
                se_ascent_ber: Some(a.final_ber()),
                wall_time_s: start.elapsed().as_secs_f64(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(BerCurve { points })
}

/// Bit errors and bit count of one simulated codeword.
fn simulate_codeword(
    config: &ExperimentConfig,
    prepared: &PreparedChannel,
    adc: &AdcSpec,
    noise_var: f64,
    trellis: &Trellis,
    seed: u64,
) -> Result<(u64, u64)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let a = &prepared.channel.matrix;
    let (n, k) = (a.nrows(), a.ncols());
    let coded_len = config.codeword_len;
    let (info, tx_bits, interleaver) = match config.detector {
        DetectorKind::Gecu => {
            let bits: Vec<u8> = (0..coded_len).map(|_| rng.random::<bool>() as u8).collect();
            (bits.clone(), bits, None)
        }
        _ => {
            let info_len = config.code.info_len(coded_len)?;
            let info: Vec<u8> = (0..info_len).map(|_| rng.random::<bool>() as u8).collect();
            let coded = conv_encode(&info, trellis)?;
            let il = Interleaver::new(InterleaverSpec {
                len: coded_len,
                seed: rng.random(),
            });
            let tx = il.interleave(&coded)?;
            (info, tx, Some(il))
        }
    };
    let symbols = map_qam4(&tx_bits)?;
    let uses = symbols.len() / k;
    let x = CMatrix::from_vec(k, uses, symbols);
    let sd = (noise_var / 2.0).sqrt();
    let mut y = a * x;
    for v in y.iter_mut() {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        *v += Complex64::new(sd * re, sd * im);
    }
    debug_assert_eq!(y.nrows(), n);
    let obs = quantize(&y, adc)?;
    let input = DetectorInput {
        obs: &obs,
        svd: &prepared.svd,
        power: prepared.channel.power,
        noise_var,
        adc,
    };
    let decoded = match config.detector {
        DetectorKind::Gecc => detect_gecc(&input, trellis, interleaver.as_ref().expect("coded"), &config.gec, None)?.bits,
        DetectorKind::Gecu => detect_gecu(&input, &config.gec, None)?.bits,
        DetectorKind::AqnmBenchmark => benchmark_aqnm(&obs, a, noise_var, adc, trellis, interleaver.as_ref().expect("coded"))?,
    };
    let errors = info.iter().zip(&decoded).filter(|(a, b)| a != b).count() as u64;
    Ok((errors, info.len() as u64))
}

/// Monte-Carlo BER per grid point, with SE columns for the GEC detectors.
///
/// Codewords run in fixed-size batches (in parallel within a batch); the
/// stopping rule is checked only between batches, so results do not depend
/// on the number of worker threads.
pub fn run_mc_ber(config: &ExperimentConfig, transfer: Option<&CodeTransfer>) -> Result<BerCurve> {
    config.validate()?;
    let prepared = prepare_channel(&config.scenario())?;
    let trellis = config.code.trellis()?;
    let se = match config.detector {
        DetectorKind::AqnmBenchmark => None,
        _ => Some(run_se_curve(config, transfer)?),
    };
    let hash = config.hash();
    let budget = &config.trials;
    let mut points = Vec::new();
    for (i, &value) in config.snr.points().iter().enumerate() {
        let start = Instant::now();
        let (vw, snr_db) = noise_for_point(config, &prepared, value);
        let adc = adc_for(config, prepared.channel.power, vw)?;
        let (mut errors, mut bits, mut done) = (0u64, 0u64, 0usize);
        while done < budget.max_codewords {
            let batch = budget.batch.min(budget.max_codewords - done);
            let results: Vec<(u64, u64)> = (done..done + batch)
                .into_par_iter()
                .map(|trial| {
                    let seed = derive_seed(config.seed, &[i as u64, trial as u64]);
                    simulate_codeword(config, &prepared, &adc, vw, &trellis, seed)
                })
                .collect::<Result<_>>()?;
            for (e, b) in results {
                errors += e;
                bits += b;
            }
            done += batch;
            if done >= budget.min_codewords && errors >= budget.target_errors {
                break;
            }
        }
        let se_point = se.as_ref().map(|c| &c.points[i]);
        points.push(BerPoint {
            config_hash: hash.clone(),
            curve: "mc".into(),
            point: i,
            grid_value: value,
            snr_db,
            ber: Some(errors as f64 / bits as f64),
            bit_errors: Some(errors),
            bits: Some(bits),
            codewords: Some(done as u64),
            se_descent_ber: se_point.and_then(|p| p.se_descent_ber),
            se_ascent_ber: se_point.and_then(|p| p.se_ascent_ber),
            wall_time_s: start.elapsed().as_secs_f64(),
        });
        log::info!("point {i}: snr {snr_db:.2} dB, {errors}/{bits} errors over {done} codewords");
    }
    Ok(BerCurve { points })
}

/// Applies one sweep value to a copy of `config`.
pub fn apply_axis(config: &ExperimentConfig, axis: SweepAxis, value: &serde_json::Value) -> Result<ExperimentConfig> {
    let bad = || Error::Config(format!("sweep value {value} is not valid for axis {axis:?}"));
    let mut c = config.clone();
    let as_usize = || value.as_u64().map(|v| v as usize).ok_or_else(bad);
    let as_bits = || -> Result<Option<u32>> {
        match value {
            serde_json::Value::Number(n) => n.as_u64().map(|b| Some(b as u32)).ok_or_else(bad),
            serde_json::Value::String(s) if matches!(s.as_str(), "inf" | "infinite" | "continuous") => Ok(None),
            _ => Err(bad()),
        }
    };
    if c.scenario.is_some() && matches!(axis, SweepAxis::L | SweepAxis::K | SweepAxis::Layout | SweepAxis::UePosition | SweepAxis::DirectPath) {
        return Err(Error::Config(format!("axis {axis:?} applies to the built-in preset, not an explicit scenario")));
    }
    match axis {
        SweepAxis::L => c.preset.l = as_usize()?,
        SweepAxis::K => c.preset.k = as_usize()?,
        SweepAxis::B => c.adc_bits = as_bits()?,
        SweepAxis::PhaseBits => c.phase_bits = as_bits()?,
        SweepAxis::Layout => {
            c.preset.layout = serde_json::from_value::<ArrayLayout>(value.clone()).map_err(|_| bad())?;
        }
        SweepAxis::UePosition => {
            c.preset.ue_position = serde_json::from_value(value.clone()).map_err(|_| bad())?;
        }
        SweepAxis::DirectPath => c.preset.direct_path = value.as_bool().ok_or_else(bad)?,
    }
    c.sweep = None;
    c.validate().map_err(|e| Error::Config(e.to_string()))?;
    Ok(c)
}

/// Whether [`sweep`] runs Monte-Carlo or SE-only curves.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepKind {
    MonteCarlo,
    StateEvolution,
}

/// Runs one curve per sweep value; curve labels read `axis=value`.
pub fn sweep(spec: &SweepSpec, config: &ExperimentConfig, kind: SweepKind, transfer: Option<&CodeTransfer>) -> Result<Vec<BerCurve>> {
    let owned;
    let transfer = match (transfer, config.detector) {
        (Some(t), _) => Some(t),
        (None, DetectorKind::Gecu) => None,
        (None, _) => {
            owned = load_transfer(config)?;
            Some(&owned)
        }
    };
    spec.values
        .iter()
        .map(|v| {
            let c = apply_axis(config, spec.axis, v)?;
            let mut curve = match kind {
                SweepKind::MonteCarlo => run_mc_ber(&c, transfer)?,
                SweepKind::StateEvolution => run_se_curve(&c, transfer)?,
            };
            let axis = serde_json::to_value(spec.axis).ok().and_then(|a| a.as_str().map(String::from)).unwrap_or_default();
            let label = format!("{axis}={}", v.to_string().trim_matches('"'));
            for p in &mut curve.points {
                p.curve = format!("{}:{label}", p.curve);
            }
            Ok(curve)
        })
        .collect()
}
