//! Monte-Carlo characterization of the convolutional code under the
//! Gaussian (BER-matched) approximation, and the derived `mmse_c`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::path::{Path, PathBuf};

use super::functions::mmse_u;
use crate::coding::{bcjr_decode, conv_encode, BcjrMode, ConvCodeSpec, Trellis};
use crate::error::{Error, Result};
use crate::numerics::norm_sf_inv;
use crate::seed::derive_seed;

/// Monte-Carlo budget for one `η_x` point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct McParams {
    /// Information bits per block.
    pub block_len: usize,
    pub min_blocks: usize,
    pub max_blocks: usize,
    /// Blocks simulated between stopping-rule checks.
    pub batch: usize,
    /// Target relative standard error of each tail estimate.
    pub rel_se: f64,
    pub seed: u64,
    pub mode: BcjrMode,
}

impl Default for McParams {
    fn default() -> Self {
        Self {
            block_len: 2394,
            min_blocks: 20,
            max_blocks: 2000,
            batch: 20,
            rel_se: 0.05,
            seed: 1,
            mode: BcjrMode::Exact,
        }
    }
}

impl McParams {
    pub fn validate(&self) -> Result<()> {
        if self.block_len == 0 || self.batch == 0 || self.min_blocks == 0 || self.max_blocks < self.min_blocks {
            return Err(Error::invalid("code characterization needs block_len, batch ≥ 1 and max ≥ min blocks"));
        }
        if !(self.rel_se > 0.0) {
            return Err(Error::invalid("rel_se must be positive"));
        }
        Ok(())
    }
}

/// BER-matched precisions at one `η_x`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CodePoint {
    pub eta_x: f64,
    pub eta_b: f64,
    pub eta_0: f64,
    pub eta_1: f64,
    /// Empirical tail probabilities of the information bits, `s⁰` and `s¹`.
    pub tails: [f64; 3],
    pub errors: [u64; 3],
    /// Set where no error was seen and a one-sided 95% upper bound was used.
    pub saturated: [bool; 3],
    pub blocks: usize,
}

/// `η = [Φ⁻¹(1 − p)]²` for `p < 1/2`, otherwise 0.
pub fn ber_to_eta(p: f64) -> f64 {
    if !(p < 0.5) {
        return 0.0;
    }
    let q = norm_sf_inv(p);
    q * q
}

/// One-sided 95% Clopper–Pearson upper bound for zero events in `n` trials.
pub fn zero_event_upper_bound(n: u64) -> f64 {
    1.0 - 0.05f64.powf(1.0 / n as f64)
}

/// Errors of one block: information bits, `s⁰`, `s¹`.
fn simulate_block(eta_x: f64, block_len: usize, trellis: &Trellis, mode: BcjrMode, rng: &mut ChaCha8Rng) -> Result<[u64; 3]> {
    let bits: Vec<u8> = (0..block_len).map(|_| rng.random::<bool>() as u8).collect();
    let coded = conv_encode(&bits, trellis)?;
    let noise = Normal::new(0.0, (1.0 / eta_x).sqrt()).map_err(|e| Error::invalid(e.to_string()))?;
    let llr: Vec<f64> = coded
        .iter()
        .map(|&c| 2.0 * eta_x * (2.0 * c as f64 - 1.0 + noise.sample(rng)))
        .collect();
    let out = bcjr_decode(&llr, trellis, mode)?;
    let wrong = |l: f64, b: u8| ((l > 0.0) != (b == 1)) as u64;
    let mut e = [0u64; 3];
    e[0] = out.info.iter().zip(&bits).map(|(&l, &b)| wrong(l, b)).sum();
    for (i, (&l, &c)) in out.coded.iter().zip(&coded).enumerate() {
        e[1 + i % 2] += wrong(l, c);
    }
    Ok(e)
}

/// Simulates binary-input AWGN blocks at `η_x` through the BCJR decoder and
/// BER-matches the three tails.
///
/// Tails are error rates over both bit values (the code and channel are
/// symmetric, so this equals `P(L < 0 | bit = 1)` with twice the samples).
/// Blocks are added in batches until every tail with errors reaches the
/// target relative standard error (estimated from the per-block counts) or
/// the block budget runs out.
pub fn characterize_code(eta_x: f64, params: &McParams, trellis: &Trellis) -> Result<CodePoint> {
    if !(eta_x > 0.0 && eta_x.is_finite()) {
        return Err(Error::invalid("η_x must be positive and finite"));
    }
    params.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let mut per_block: Vec<[u64; 3]> = Vec::new();
    loop {
        for _ in 0..params.batch {
            per_block.push(simulate_block(eta_x, params.block_len, trellis, params.mode, &mut rng)?);
        }
        let n = per_block.len();
        if n >= params.max_blocks {
            break;
        }
        if n >= params.min_blocks && (0..3).all(|j| rel_se(&per_block, j) <= params.rel_se) {
            break;
        }
    }
    let blocks = per_block.len();
    let coded_steps = params.block_len + trellis.memory();
    let totals = [
        (blocks * params.block_len) as u64,
        (blocks * coded_steps) as u64,
        (blocks * coded_steps) as u64,
    ];
    let mut errors = [0u64; 3];
    for e in &per_block {
        for j in 0..3 {
            errors[j] += e[j];
        }
    }
    let mut tails = [0.0; 3];
    let mut saturated = [false; 3];
    for j in 0..3 {
        if errors[j] == 0 {
            saturated[j] = true;
            tails[j] = zero_event_upper_bound(totals[j]);
        } else {
            tails[j] = errors[j] as f64 / totals[j] as f64;
        }
    }
    Ok(CodePoint {
        eta_x,
        eta_b: ber_to_eta(tails[0]),
        eta_0: ber_to_eta(tails[1]),
        eta_1: ber_to_eta(tails[2]),
        tails,
        errors,
        saturated,
        blocks,
    })
}

/// Relative standard error of the mean per-block count in column `j`;
/// infinite while no error has been seen.
fn rel_se(per_block: &[[u64; 3]], j: usize) -> f64 {
    let n = per_block.len() as f64;
    let mean = per_block.iter().map(|e| e[j] as f64).sum::<f64>() / n;
    if mean == 0.0 {
        return f64::INFINITY;
    }
    let var = per_block.iter().map(|e| (e[j] as f64 - mean).powi(2)).sum::<f64>() / (n - 1.0).max(1.0);
    (var / n).sqrt() / mean
}

/// Table parameters; the grid is `points` log-spaced values on `[lo, hi]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TransferParams {
    pub code: ConvCodeSpec,
    pub lo: f64,
    pub hi: f64,
    pub points: usize,
    pub mc: McParams,
}

impl Default for TransferParams {
    fn default() -> Self {
        Self {
            code: ConvCodeSpec::default(),
            lo: 1e-3,
            hi: 1e3,
            points: 40,
            mc: McParams::default(),
        }
    }
}

impl TransferParams {
    pub fn grid(&self) -> Vec<f64> {
        let (a, b) = (self.lo.ln(), self.hi.ln());
        let n = self.points;
        (0..n)
            .map(|i| (a + (b - a) * i as f64 / (n - 1) as f64).exp())
            .collect()
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.lo > 0.0 && self.hi > self.lo) || self.points < 2 {
            return Err(Error::invalid("transfer grid needs 0 < lo < hi and at least two points"));
        }
        self.code.validate()?;
        self.mc.validate()
    }

    /// Hex digest identifying the table contents, used as the cache key.
    pub fn cache_key(&self) -> String {
        let json = serde_json::to_string(self).expect("params serialize");
        let digest = Sha256::digest(json.as_bytes());
        digest[..8].iter().map(|b| format!("{b:02x}")).collect()
    }
}

/// One processed table row.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TransferRow {
    pub eta_x: f64,
    pub eta_b: f64,
    pub eta_0: f64,
    pub eta_1: f64,
    pub blocks: usize,
    pub block_len: usize,
    pub seed: u64,
}

/// `η_x → (η_b, η_0, η_1)` on a log grid, interpolated log-log.
#[derive(Debug, Clone, PartialEq)]
pub struct CodeTransfer {
    pub rows: Vec<TransferRow>,
    /// Raw Monte-Carlo points (absent when loaded from cache).
    pub raw: Vec<CodePoint>,
}

const ETA_FLOOR: f64 = 1e-12;

impl CodeTransfer {
    /// Runs every grid point (in parallel) and post-processes the table.
    pub fn build(params: &TransferParams) -> Result<Self> {
        params.validate()?;
        let trellis = params.code.trellis()?;
        let grid = params.grid();
        let raw: Vec<CodePoint> = grid
            .par_iter()
            .enumerate()
            .map(|(i, &eta)| {
                let mc = McParams {
                    seed: derive_seed(params.mc.seed, &[i as u64]),
                    ..params.mc.clone()
                };
                characterize_code(eta, &mc, &trellis)
            })
            .collect::<Result<_>>()?;
        Ok(Self::from_points(raw, params))
    }

    /// Post-processing of raw points:
    /// 1. saturated columns are extrapolated with the ratio `η/η_x` of the
    ///    last unsaturated point (the Clopper–Pearson value is kept if larger);
    /// 2. coded-bit precisions are floored at `η_x` (the APP of a coded bit
    ///    includes its own channel observation);
    /// 3. each column is made non-decreasing by a running maximum.
    pub fn from_points(raw: Vec<CodePoint>, params: &TransferParams) -> Self {
        let mut cols: [Vec<f64>; 3] = [
            raw.iter().map(|p| p.eta_b).collect(),
            raw.iter().map(|p| p.eta_0).collect(),
            raw.iter().map(|p| p.eta_1).collect(),
        ];
        for (j, col) in cols.iter_mut().enumerate() {
            let mut ratio: Option<f64> = None;
            for (i, p) in raw.iter().enumerate() {
                if p.saturated[j] {
                    if let Some(r) = ratio {
                        col[i] = col[i].max(r * p.eta_x);
                    }
                } else if col[i] > 0.0 {
                    ratio = Some(col[i] / p.eta_x);
                }
            }
            for (i, p) in raw.iter().enumerate() {
                if j > 0 {
                    col[i] = col[i].max(p.eta_x);
                }
                col[i] = col[i].max(ETA_FLOOR);
            }
            for i in 1..col.len() {
                col[i] = col[i].max(col[i - 1]);
            }
        }
        let rows = raw
            .iter()
            .enumerate()
            .map(|(i, p)| TransferRow {
                eta_x: p.eta_x,
                eta_b: cols[0][i],
                eta_0: cols[1][i],
                eta_1: cols[2][i],
                blocks: p.blocks,
                block_len: params.mc.block_len,
                seed: derive_seed(params.mc.seed, &[i as u64]),
            })
            .collect();
        Self { rows, raw }
    }

    /// Cache path inside `dir` for `params`.
    pub fn cache_path(dir: &Path, params: &TransferParams) -> PathBuf {
        dir.join(format!("code-transfer-{}.csv", params.cache_key()))
    }

    /// Loads the cached table for `params` from `dir`, building and writing
    /// it on a miss.
    pub fn load_or_build(dir: &Path, params: &TransferParams) -> Result<Self> {
        let path = Self::cache_path(dir, params);
        if path.exists() {
            if let Ok(t) = Self::read_csv(&path) {
                if t.rows.len() == params.points {
                    return Ok(t);
                }
            }
            log::warn!("ignoring unreadable transfer cache {}", path.display());
        }
        let t = Self::build(params)?;
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        // Write to a temporary name first so concurrent builders never see a partial file.
        let tmp = path.with_extension(format!("tmp{}", std::process::id()));
        t.write_csv(&tmp)?;
        std::fs::rename(&tmp, &path).map_err(|e| Error::io(&path, e))?;
        Ok(t)
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        for r in &self.rows {
            w.serialize(r)?;
        }
        w.flush().map_err(|e| Error::io(path, e))?;
        Ok(())
    }

    pub fn read_csv(path: &Path) -> Result<Self> {
        let mut r = csv::Reader::from_path(path)?;
        let rows: Vec<TransferRow> = r.deserialize().collect::<std::result::Result<_, _>>()?;
        if rows.len() < 2 || rows.windows(2).any(|w| !(w[0].eta_x < w[1].eta_x)) {
            return Err(Error::invalid(format!("{}: transfer table needs ≥ 2 increasing rows", path.display())));
        }
        Ok(Self { rows, raw: Vec::new() })
    }

    /// `(η_b, η_0, η_1)` at `eta_x`, interpolated linearly in log-log.
    ///
    /// Outside the grid the end segment is replaced by proportionality
    /// (`η ∝ η_x`), which keeps `mmse_c(η_x) < 1/η_x` for every input.
    pub fn eval(&self, eta_x: f64) -> [f64; 3] {
        let rows = &self.rows;
        let get = |r: &TransferRow| [r.eta_b, r.eta_0, r.eta_1];
        let first = rows.first().expect("nonempty table");
        let last = rows.last().expect("nonempty table");
        if !(eta_x > 0.0) {
            return [0.0; 3];
        }
        if eta_x <= first.eta_x {
            let s = eta_x / first.eta_x;
            return get(first).map(|v| v * s);
        }
        if eta_x >= last.eta_x {
            let s = eta_x / last.eta_x;
            return get(last).map(|v| v * s);
        }
        let i = rows.partition_point(|r| r.eta_x <= eta_x) - 1;
        let (a, b) = (&rows[i], &rows[i + 1]);
        let t = (eta_x.ln() - a.eta_x.ln()) / (b.eta_x.ln() - a.eta_x.ln());
        let (va, vb) = (get(a), get(b));
        [0, 1, 2].map(|j| (va[j].ln() + t * (vb[j].ln() - va[j].ln())).exp())
    }

    /// `δ(η_x) = η_b`.
    pub fn delta(&self, eta_x: f64) -> f64 {
        self.eval(eta_x)[0]
    }
}

/// `½·(mmse_u(η_0) + mmse_u(η_1))` at the interpolated `η_x`.
pub fn mmse_c(eta_x: f64, transfer: &CodeTransfer) -> f64 {
    let [_, e0, e1] = transfer.eval(eta_x);
    0.5 * (mmse_u(e0) + mmse_u(e1))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn ber_matching_inverts_gaussian_tail() {
        let eta: f64 = 3.7;
        let p = crate::numerics::norm_sf(eta.sqrt());
        assert_relative_eq!(ber_to_eta(p), eta, max_relative = 1e-10);
        assert_eq!(ber_to_eta(0.5), 0.0);
    }

    #[test]
    fn clopper_pearson_zero_events() {
        // 1 − 0.05^{1/n} ≈ 3/n for large n.
        assert_relative_eq!(zero_event_upper_bound(1_000_000) * 1e6, 2.9957, max_relative = 1e-3);
    }

    #[test]
    fn table_interpolation_and_extrapolation() {
        let mk = |x: f64| TransferRow {
            eta_x: x,
            eta_b: 2.0 * x,
            eta_0: 3.0 * x,
            eta_1: 4.0 * x,
            blocks: 1,
            block_len: 1,
            seed: 0,
        };
        let t = CodeTransfer {
            rows: vec![mk(1.0), mk(10.0), mk(100.0)],
            raw: Vec::new(),
        };
        let v = t.eval(31.6);
        assert_relative_eq!(v[0], 63.2, max_relative = 1e-12);
        assert_relative_eq!(t.eval(1e4)[2], 4e4, max_relative = 1e-12);
        assert_relative_eq!(t.eval(0.01)[1], 0.03, max_relative = 1e-12);
    }

    #[test]
    fn small_point_runs() {
        let trellis = ConvCodeSpec::default().trellis().unwrap();
        let mc = McParams {
            block_len: 200,
            min_blocks: 4,
            max_blocks: 8,
            batch: 4,
            ..McParams::default()
        };
        let p = characterize_code(0.5, &mc, &trellis).unwrap();
        assert!(p.blocks >= 4 && p.blocks <= 8);
        assert!(p.tails.iter().all(|&t| t > 0.0 && t < 0.5));
    }
}
