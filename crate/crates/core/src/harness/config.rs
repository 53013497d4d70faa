//! Declarative experiment configuration.

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use sha2::{Digest, Sha256};
use std::path::{Path, PathBuf};

use crate::channel::{ArrayGeometry, Position, Scenario};
use crate::coding::ConvCodeSpec;
use crate::detector::GecConfig;
use crate::error::{Error, Result};
use crate::se::{SeConfig, TransferParams};

/// Resolution that may be infinite; written as an integer or `"inf"`.
pub mod resolution {
    use super::*;

    pub fn serialize<S: Serializer>(v: &Option<u32>, s: S) -> std::result::Result<S::Ok, S::Error> {
        match v {
            Some(b) => s.serialize_u32(*b),
            None => s.serialize_str("inf"),
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Option<u32>, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Bits(u32),
            Word(String),
        }
        match Raw::deserialize(d)? {
            Raw::Bits(b) => Ok(Some(b)),
            Raw::Word(w) if matches!(w.as_str(), "inf" | "infinite" | "continuous") => Ok(None),
            Raw::Word(w) => Err(serde::de::Error::custom(format!("expected bit count or \"inf\", got {w:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DetectorKind {
    Gecc,
    Gecu,
    AqnmBenchmark,
}

/// Orientation of the terminal arrays for the built-in indoor scenario.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ArrayLayout {
    /// UE and BS ULAs both along y.
    ParallelY,
    /// UE and BS ULAs both along x.
    ParallelX,
    /// UE along x, BS along y.
    Orthogonal,
    /// Near-square URAs at both ends.
    Rectangular,
}

fn near_square(n: usize) -> (usize, usize) {
    let mut a = (n as f64).sqrt().floor() as usize;
    while a > 1 && n % a != 0 {
        a -= 1;
    }
    (a.max(1), n / a.max(1))
}

impl ArrayLayout {
    pub fn arrays(self, k: usize, n: usize) -> (ArrayGeometry, ArrayGeometry) {
        match self {
            ArrayLayout::ParallelY => (ArrayGeometry::linear_y(k), ArrayGeometry::linear_y(n)),
            ArrayLayout::ParallelX => (ArrayGeometry::linear_x(k), ArrayGeometry::linear_x(n)),
            ArrayLayout::Orthogonal => (ArrayGeometry::linear_x(k), ArrayGeometry::linear_y(n)),
            ArrayLayout::Rectangular => {
                let (k1, k2) = near_square(k);
                let (n1, n2) = near_square(n);
                (ArrayGeometry::rectangular(k1, k2), ArrayGeometry::rectangular(n1, n2))
            }
        }
    }
}

/// Built-in indoor room: `l` panels on the ceiling circle, `k`-antenna UE,
/// `n`-antenna BS.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct IndoorPreset {
    pub l: usize,
    pub k: usize,
    pub n: usize,
    /// Reflectors per panel side (`M = ris_side²`).
    pub ris_side: usize,
    pub layout: ArrayLayout,
    pub ue_position: Position,
    pub bs_position: Position,
    pub direct_path: bool,
}

impl Default for IndoorPreset {
    fn default() -> Self {
        Self {
            l: 10,
            k: 8,
            n: 16,
            ris_side: 30,
            layout: ArrayLayout::ParallelX,
            ue_position: crate::channel::scenario::DEFAULT_UE_POSITION,
            bs_position: crate::channel::scenario::DEFAULT_BS_POSITION,
            direct_path: false,
        }
    }
}

impl IndoorPreset {
    pub fn scenario(&self) -> Scenario {
        let (ue, bs) = self.layout.arrays(self.k, self.n);
        let mut s = Scenario::indoor(self.l, self.ris_side, ue, bs);
        s.ue.position = self.ue_position;
        s.bs.position = self.bs_position;
        s.direct_path = self.direct_path;
        s
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SnrMode {
    /// Grid values are SNR in dB; the noise level is set to hit them.
    Snr,
    /// Grid values are transmit power in dBm at the physical noise floor.
    Txpower,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SnrSweep {
    pub mode: SnrMode,
    /// Explicit grid; when empty `start..=stop` in steps of `step` is used.
    pub values: Vec<f64>,
    pub start: f64,
    pub stop: f64,
    pub step: f64,
}

impl Default for SnrSweep {
    fn default() -> Self {
        Self {
            mode: SnrMode::Snr,
            values: Vec::new(),
            start: 0.0,
            stop: 20.0,
            step: 1.0,
        }
    }
}

impl SnrSweep {
    pub fn points(&self) -> Vec<f64> {
        if !self.values.is_empty() {
            return self.values.clone();
        }
        if !(self.step > 0.0) || self.stop < self.start {
            return Vec::new();
        }
        let n = ((self.stop - self.start) / self.step + 1e-9).floor() as usize + 1;
        (0..n).map(|i| self.start + self.step * i as f64).collect()
    }
}

/// Codeword budget per SNR point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrialBudget {
    pub min_codewords: usize,
    pub max_codewords: usize,
    /// Stop once this many bit errors are seen (and `min_codewords` reached).
    pub target_errors: u64,
    /// Codewords simulated between stopping checks.
    pub batch: usize,
}

impl Default for TrialBudget {
    fn default() -> Self {
        Self {
            min_codewords: 8,
            max_codewords: 200,
            target_errors: 100,
            batch: 8,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SweepAxis {
    L,
    K,
    B,
    PhaseBits,
    Layout,
    UePosition,
    DirectPath,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    pub axis: SweepAxis,
    pub values: Vec<serde_json::Value>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ExperimentConfig {
    /// Explicit scenario; overrides `preset` when present.
    pub scenario: Option<Scenario>,
    /// Scenario file (TOML/JSON), resolved relative to the config file.
    pub scenario_file: Option<PathBuf>,
    pub preset: IndoorPreset,
    pub detector: DetectorKind,
    #[serde(with = "resolution")]
    pub adc_bits: Option<u32>,
    #[serde(with = "resolution")]
    pub phase_bits: Option<u32>,
    pub code: ConvCodeSpec,
    /// Coded bits per codeword.
    pub codeword_len: usize,
    pub snr: SnrSweep,
    pub trials: TrialBudget,
    pub seed: u64,
    pub gec: GecConfig,
    pub se: SeConfig,
    pub transfer: TransferParams,
    /// Directory holding cached code-transfer tables.
    pub transfer_cache: Option<PathBuf>,
    pub sweep: Option<SweepSpec>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            scenario: None,
            scenario_file: None,
            preset: IndoorPreset::default(),
            detector: DetectorKind::Gecc,
            adc_bits: Some(3),
            phase_bits: None,
            code: ConvCodeSpec::default(),
            codeword_len: 4800,
            snr: SnrSweep::default(),
            trials: TrialBudget::default(),
            seed: 1,
            gec: GecConfig::default(),
            se: SeConfig::default(),
            transfer: TransferParams::default(),
            transfer_cache: None,
            sweep: None,
        }
    }
}

impl ExperimentConfig {
    /// Loads a TOML or JSON config; a relative `scenario_file` is resolved
    /// against the config's directory and inlined.
    pub fn from_file(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut cfg: ExperimentConfig = crate::channel::scenario::parse_by_extension(path, &text)?;
        if let Some(f) = cfg.scenario_file.take() {
            let f = if f.is_relative() {
                path.parent().unwrap_or(Path::new(".")).join(f)
            } else {
                f
            };
            cfg.scenario = Some(Scenario::from_file(&f).map_err(|e| Error::Config(e.to_string()))?);
        }
        cfg.validate().map_err(|e| match e {
            Error::InvalidArgument(m) => Error::Config(m),
            other => other,
        })?;
        Ok(cfg)
    }

    /// Scenario with the experiment-level phase resolution applied.
    pub fn scenario(&self) -> Scenario {
        let mut s = self.scenario.clone().unwrap_or_else(|| self.preset.scenario());
        if self.phase_bits.is_some() {
            s.phase_bits = self.phase_bits;
        }
        s
    }

    pub fn validate(&self) -> Result<()> {
        let s = self.scenario();
        s.validate()?;
        self.code.validate()?;
        self.gec.validate()?;
        if self.snr.points().is_empty() {
            return Err(Error::invalid("SNR grid is empty"));
        }
        if self.trials.max_codewords == 0 || self.trials.batch == 0 {
            return Err(Error::invalid("trial budget and batch must be at least 1"));
        }
        if self.trials.min_codewords > self.trials.max_codewords {
            return Err(Error::invalid("min_codewords exceeds max_codewords"));
        }
        if let Some(b) = self.adc_bits {
            if b == 0 || b > 15 {
                return Err(Error::invalid("adc_bits must lie in 1..=15 or be \"inf\""));
            }
        }
        if self.phase_bits == Some(0) {
            return Err(Error::invalid("phase_bits must be ≥ 1 or \"inf\""));
        }
        let k = s.ue.array.len();
        match self.detector {
            DetectorKind::Gecu => {
                if self.codeword_len % (2 * k) != 0 {
                    return Err(Error::invalid(format!(
                        "{} bits per block do not fill whole channel uses of K = {k} 4-QAM symbols",
                        self.codeword_len
                    )));
                }
            }
            _ => {
                self.code.info_len(self.codeword_len)?;
                if self.codeword_len % (2 * k) != 0 {
                    return Err(Error::invalid(format!(
                        "codeword of {} coded bits is {} symbols, not a multiple of K = {k}; \
                         choose codeword_len as a multiple of {}",
                        self.codeword_len,
                        self.codeword_len / 2,
                        2 * k
                    )));
                }
            }
        }
        Ok(())
    }

    /// Short hex digest of the canonical JSON form.
    pub fn hash(&self) -> String {
        let json = serde_json::to_string(self).expect("config serializes");
        let d = Sha256::digest(json.as_bytes());
        d[..8].iter().map(|b| format!("{b:02x}")).collect()
    }

    pub fn transfer_params(&self) -> TransferParams {
        TransferParams {
            code: self.code.clone(),
            ..self.transfer.clone()
        }
    }
}
