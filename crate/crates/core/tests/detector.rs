mod common;

use common::*;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use ris_mimo::coding::{conv_encode, demap_hard, map_qam4, qam4_denoise, Interleaver, InterleaverSpec};
use ris_mimo::detector::{benchmark_aqnm, detect_gecc, detect_gecu, DetectorInput, GecConfig, SvdFactorization};
use ris_mimo::frontend::{default_scale, make_thresholds, quantize, AdcSpec};
use ris_mimo::harness::prepare_channel;
use ris_mimo::{CMatrix, ConvCodeSpec, ExperimentConfig, Scenario};

struct Block {
    info: Vec<u8>,
    interleaver: Interleaver,
    y: CMatrix,
}

fn transmit(a: &CMatrix, coded_len: usize, noise_var: f64, seed: u64) -> Block {
    let mut r = rng(seed);
    let trellis = ConvCodeSpec::default().trellis().unwrap();
    let info = random_bits(coded_len / 2 - 6, &mut r);
    let coded = conv_encode(&info, &trellis).unwrap();
    let interleaver = Interleaver::new(InterleaverSpec {
        len: coded_len,
        seed: r.random(),
    });
    let sym = map_qam4(&interleaver.interleave(&coded).unwrap()).unwrap();
    let x = CMatrix::from_vec(a.ncols(), sym.len() / a.ncols(), sym);
    let sd = (noise_var / 2.0).sqrt();
    let mut y = a * x;
    for v in y.iter_mut() {
        let re: f64 = r.sample(StandardNormal);
        let im: f64 = r.sample(StandardNormal);
        *v += Complex64::new(sd * re, sd * im);
    }
    Block { info, interleaver, y }
}

fn power(a: &CMatrix) -> f64 {
    a.iter().map(|v| v.norm_sqr()).sum::<f64>() / a.nrows() as f64
}

#[test]
fn noiseless_single_stream_decodes_in_two_iterations() {
    let s = Scenario::indoor_ula(1, 1, 1);
    let ch = ris_mimo::synthesize(&s).unwrap();
    let a = ch.matrix.scale(1.0 / ch.power.sqrt());
    let svd = SvdFactorization::new(&a).unwrap();
    let b = transmit(&a, 200, 0.0, 1);
    let adc = AdcSpec::unquantized();
    let obs = quantize(&b.y, &adc).unwrap();
    let input = DetectorInput {
        obs: &obs,
        svd: &svd,
        power: power(&a),
        noise_var: 0.0,
        adc: &adc,
    };
    let trellis = ConvCodeSpec::default().trellis().unwrap();
    let out = detect_gecc(&input, &trellis, &b.interleaver, &GecConfig::default(), Some(&b.info)).unwrap();
    assert_eq!(out.bits, b.info);
    assert!(out.diagnostics.iter().take(2).any(|d| d.bit_errors == Some(0)));
}

#[test]
fn orthogonal_channel_reduces_gecu_to_matched_filter() {
    let mut r = rng(4);
    let m = random_matrix(6, 3, &mut r);
    let q = m.qr().q();
    let vw = 0.4;
    let x = CMatrix::from_vec(3, 20, map_qam4(&random_bits(120, &mut r)).unwrap());
    let mut y = &q * &x;
    for v in y.iter_mut() {
        let re: f64 = r.sample(StandardNormal);
        let im: f64 = r.sample(StandardNormal);
        *v += Complex64::new(re, im) * (vw / 2.0f64).sqrt();
    }
    let adc = AdcSpec::unquantized();
    let obs = quantize(&y, &adc).unwrap();
    let svd = SvdFactorization::new(&q).unwrap();
    let input = DetectorInput {
        obs: &obs,
        svd: &svd,
        power: power(&q),
        noise_var: vw,
        adc: &adc,
    };
    let out = detect_gecu(&input, &GecConfig::default(), None).unwrap();
    let mf = q.adjoint() * &y;
    let (den, _) = qam4_denoise(mf.as_slice(), vw).unwrap();
    assert_eq!(out.bits, demap_hard(&den));
    for (a, b) in out.state.r1x.iter().zip(mf.iter()) {
        assert!((a - b).norm() < 1e-9);
    }
    assert!((out.state.v1x - vw).abs() < 1e-9);
}

fn case_two(seed_snr: f64) -> (CMatrix, SvdFactorization, AdcSpec, f64) {
    let cfg = ExperimentConfig::default();
    let p = prepare_channel(&cfg.scenario()).unwrap();
    let vw = 10f64.powf(-seed_snr / 10.0);
    let adc = make_thresholds(Some(3), default_scale(p.channel.power, vw)).unwrap();
    (p.channel.matrix.clone(), p.svd, adc, vw)
}

#[test]
fn gecc_is_deterministic() {
    let (a, svd, adc, vw) = case_two(4.0);
    let b = transmit(&a, 960, vw, 9);
    let obs = quantize(&b.y, &adc).unwrap();
    let input = DetectorInput {
        obs: &obs,
        svd: &svd,
        power: power(&a),
        noise_var: vw,
        adc: &adc,
    };
    let trellis = ConvCodeSpec::default().trellis().unwrap();
    let cfg = GecConfig::default();
    let first = detect_gecc(&input, &trellis, &b.interleaver, &cfg, None).unwrap();
    let again = detect_gecc(&input, &trellis, &b.interleaver, &cfg, None).unwrap();
    assert_eq!(first.bits, again.bits);
    assert_eq!(first.diagnostics, again.diagnostics);
    assert!(first.converged);
    assert_eq!(first.bits, b.info);

}

#[test]
fn uncoded_fixed_point_is_stable() {
    let mut r = rng(21);
    let a = random_matrix(16, 4, &mut r).scale(0.5);
    let svd = SvdFactorization::new(&a).unwrap();
    let vw = 2.0;
    let adc = make_thresholds(Some(3), default_scale(power(&a), vw)).unwrap();
    let b = transmit(&a, 960, vw, 5);
    let obs = quantize(&b.y, &adc).unwrap();
    let input = DetectorInput {
        obs: &obs,
        svd: &svd,
        power: power(&a),
        noise_var: vw,
        adc: &adc,
    };
    let cfg = GecConfig {
        max_iter: 200,
        ..GecConfig::default()
    };
    let first = detect_gecu(&input, &cfg, None).unwrap();
    assert!(first.converged, "{:?}", first.diagnostics.last());
    let t = first.diagnostics.len();
    let more = GecConfig {
        max_iter: t + 1,
        tol: 0.0,
        ..cfg
    };
    let ext = detect_gecu(&input, &more, None).unwrap();
    assert_eq!(ext.diagnostics.len(), t + 1);
    assert_eq!(ext.diagnostics[..t], first.diagnostics[..]);
    assert!((ext.diagnostics[t].v2x - ext.diagnostics[t - 1].v2x).abs() < 10.0 * cfg.tol);
}

#[test]
fn posterior_variance_settles_monotonically_in_most_runs() {
    let (a, svd, adc, vw) = case_two(5.0);
    let trellis = ConvCodeSpec::default().trellis().unwrap();
    let (mut converged, mut monotone) = (0, 0);
    for seed in 0..100 {
        let b = transmit(&a, 960, vw, 1000 + seed);
        let obs = quantize(&b.y, &adc).unwrap();
        let input = DetectorInput {
            obs: &obs,
            svd: &svd,
            power: power(&a),
            noise_var: vw,
            adc: &adc,
        };
        let out = detect_gecc(&input, &trellis, &b.interleaver, &GecConfig::default(), None).unwrap();
        if !out.converged {
            continue;
        }
        converged += 1;
        let vx: Vec<f64> = out.diagnostics.iter().map(|d| d.v2x).collect();
        if vx.windows(2).skip(1).all(|w| w[1] <= w[0] * (1.0 + 1e-9)) {
            monotone += 1;
        }
    }
    assert!(converged >= 50, "only {converged} runs converged");
    assert!(monotone as f64 >= 0.95 * converged as f64, "{monotone}/{converged} monotone");
}

#[test]
fn aqnm_recovers_a_clean_single_stream() {
    let s = Scenario::indoor_ula(2, 1, 4);
    let ch = ris_mimo::synthesize(&s).unwrap();
    let a = ch.matrix.scale(1.0 / ch.power.sqrt());
    let vw = 1e-4;
    let b = transmit(&a, 400, vw, 2);
    let adc = AdcSpec::unquantized();
    let obs = quantize(&b.y, &adc).unwrap();
    let trellis = ConvCodeSpec::default().trellis().unwrap();
    let bits = benchmark_aqnm(&obs, &a, vw, &adc, &trellis, &b.interleaver).unwrap();
    assert_eq!(bits, b.info);
}

#[test]
fn detectors_reject_mismatched_blocks() {
    let (a, svd, adc, vw) = case_two(4.0);
    let b = transmit(&a, 960, vw, 3);
    let obs = quantize(&b.y, &adc).unwrap();
    let input = DetectorInput {
        obs: &obs,
        svd: &svd,
        power: power(&a),
        noise_var: vw,
        adc: &adc,
    };
    let trellis = ConvCodeSpec::default().trellis().unwrap();
    let wrong = Interleaver::identity(480);
    assert!(detect_gecc(&input, &trellis, &wrong, &GecConfig::default(), None).is_err());
    assert!(benchmark_aqnm(&obs, &a, vw, &adc, &trellis, &wrong).is_err());
    let narrow = SvdFactorization::new(&a.rows(0, 8).into_owned()).unwrap();
    let bad = DetectorInput { svd: &narrow, ..input };
    assert!(detect_gecu(&bad, &GecConfig::default(), None).is_err());
}
