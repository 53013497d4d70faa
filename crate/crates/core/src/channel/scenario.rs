//! Indoor scenario description and file loading.

use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::path::Path;

use super::geometry::{ArrayGeometry, Convention, Position};
use super::ris::{AntennaGains, RisPanel};
use crate::error::{Error, Result};

pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Terminal {
    pub position: Position,
    pub array: ArrayGeometry,
}

/// `count` identical panels spaced uniformly on a ceiling circle of radius
/// `radius_m` centred over the room; panel `i` sits at angle `2πi/count`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CircleDeployment {
    pub count: usize,
    #[serde(default = "default_radius")]
    pub radius_m: f64,
    #[serde(default = "default_side")]
    pub rows: usize,
    #[serde(default = "default_side")]
    pub cols: usize,
    #[serde(default = "default_cell")]
    pub cell_dx: f64,
    #[serde(default = "default_cell")]
    pub cell_dy: f64,
    #[serde(default = "default_reflection")]
    pub reflection: f64,
    #[serde(default = "default_exponent")]
    pub pattern_exponent: f64,
}

fn default_radius() -> f64 {
    3.0
}
fn default_side() -> usize {
    30
}
fn default_cell() -> f64 {
    0.1
}
fn default_reflection() -> f64 {
    0.9
}
fn default_exponent() -> f64 {
    1.0
}
fn default_carrier() -> f64 {
    28e9
}
fn default_bandwidth() -> f64 {
    100e6
}
fn default_psd() -> f64 {
    -174.0
}

impl CircleDeployment {
    pub fn new(count: usize, radius_m: f64, side: usize) -> Self {
        Self {
            count,
            radius_m,
            rows: side,
            cols: side,
            cell_dx: default_cell(),
            cell_dy: default_cell(),
            reflection: default_reflection(),
            pattern_exponent: default_exponent(),
        }
    }

    pub fn panels(&self, room: [f64; 3]) -> Vec<RisPanel> {
        let (cx, cy) = (room[0] / 2.0, room[1] / 2.0);
        (0..self.count)
            .map(|i| {
                let t = 2.0 * PI * i as f64 / self.count as f64;
                RisPanel {
                    rows: self.rows,
                    cols: self.cols,
                    cell_dx: self.cell_dx,
                    cell_dy: self.cell_dy,
                    reflection: self.reflection,
                    pattern_exponent: self.pattern_exponent,
                    position: [cx + self.radius_m * t.cos(), cy + self.radius_m * t.sin(), room[2]],
                    phase_bits: None,
                }
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    /// Room extent `[x, y, z]` in meters; the ceiling is at `z = room[2]`.
    pub room: [f64; 3],
    pub bs: Terminal,
    pub ue: Terminal,
    /// Explicitly placed panels.
    #[serde(default)]
    pub ris: Vec<RisPanel>,
    /// Panels generated on a ceiling circle, appended after `ris`.
    #[serde(default)]
    pub ris_circle: Option<CircleDeployment>,
    #[serde(default = "default_carrier")]
    pub carrier_hz: f64,
    #[serde(default = "default_bandwidth")]
    pub bandwidth_hz: f64,
    #[serde(default = "default_psd")]
    pub noise_psd_dbm_hz: f64,
    #[serde(default)]
    pub direct_path: bool,
    /// Overrides every panel's phase resolution when set.
    #[serde(default)]
    pub phase_bits: Option<u32>,
    #[serde(default)]
    pub gains: AntennaGains,
    #[serde(default)]
    pub convention: Convention,
}

impl Scenario {
    /// The 6 m × 6 m × 3 m room with `l` panels of `side × side` reflectors on
    /// a 3 m ceiling circle, UE with `ue_array`, BS with `bs_array`.
    pub fn indoor(l: usize, side: usize, ue_array: ArrayGeometry, bs_array: ArrayGeometry) -> Self {
        Self {
            room: [6.0, 6.0, 3.0],
            bs: Terminal {
                position: DEFAULT_BS_POSITION,
                array: bs_array,
            },
            ue: Terminal {
                position: DEFAULT_UE_POSITION,
                array: ue_array,
            },
            ris: Vec::new(),
            ris_circle: Some(CircleDeployment::new(l, 3.0, side)),
            carrier_hz: default_carrier(),
            bandwidth_hz: default_bandwidth(),
            noise_psd_dbm_hz: default_psd(),
            direct_path: false,
            phase_bits: None,
            gains: AntennaGains::default(),
            convention: Convention::default(),
        }
    }

    /// ULA UE with `k` elements and ULA BS with `n` elements, both along x.
    pub fn indoor_ula(l: usize, k: usize, n: usize) -> Self {
        Self::indoor(l, 30, ArrayGeometry::linear_x(k), ArrayGeometry::linear_x(n))
    }

    pub fn wavelength(&self) -> f64 {
        SPEED_OF_LIGHT / self.carrier_hz
    }

    /// Receiver noise level `v_w = PSD · bandwidth` in watts.
    pub fn noise_power(&self) -> f64 {
        10f64.powf((self.noise_psd_dbm_hz - 30.0) / 10.0) * self.bandwidth_hz
    }

    /// All panels with the scenario-level phase override applied.
    pub fn panels(&self) -> Vec<RisPanel> {
        let mut panels = self.ris.clone();
        if let Some(circle) = &self.ris_circle {
            panels.extend(circle.panels(self.room));
        }
        if let Some(bits) = self.phase_bits {
            for p in &mut panels {
                p.phase_bits = Some(bits);
            }
        }
        panels
    }

    pub fn num_panels(&self) -> usize {
        self.ris.len() + self.ris_circle.as_ref().map_or(0, |c| c.count)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.carrier_hz > 0.0) {
            return Err(Error::invalid("carrier frequency must be positive"));
        }
        if !(self.bandwidth_hz > 0.0) {
            return Err(Error::invalid("bandwidth must be positive"));
        }
        if self.room.iter().any(|&d| !(d > 0.0)) {
            return Err(Error::invalid("room dimensions must be positive"));
        }
        self.bs.array.validate()?;
        self.ue.array.validate()?;
        let panels = self.panels();
        if panels.is_empty() {
            return Err(Error::invalid("scenario needs at least one RIS panel"));
        }
        let inside = |p: &Position| (0..3).all(|i| p[i] >= -1e-9 && p[i] <= self.room[i] + 1e-9);
        if !inside(&self.bs.position) {
            return Err(Error::invalid("BS position lies outside the room"));
        }
        if !inside(&self.ue.position) {
            return Err(Error::invalid("UE position lies outside the room"));
        }
        for (i, p) in panels.iter().enumerate() {
            p.validate()?;
            if !inside(&p.position) {
                return Err(Error::invalid(format!("RIS panel {i} lies outside the room")));
            }
        }
        Ok(())
    }

    /// Loads a scenario from TOML or JSON, chosen by file extension.
    pub fn from_file(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let scenario: Scenario = parse_by_extension(path, &text)?;
        scenario.validate()?;
        Ok(scenario)
    }
}

pub const DEFAULT_BS_POSITION: Position = [2.0, 0.5, 1.5];
pub const DEFAULT_UE_POSITION: Position = [1.5, 3.0, 0.5];

pub(crate) fn parse_by_extension<T: serde::de::DeserializeOwned>(path: &Path, text: &str) -> Result<T> {
    match path.extension().and_then(|e| e.to_str()) {
        Some("json") => serde_json::from_str(text).map_err(|e| Error::Config(format!("{}: {e}", path.display()))),
        Some("toml") => toml::from_str(text).map_err(|e| Error::Config(format!("{}: {e}", path.display()))),
        other => Err(Error::Config(format!(
            "{}: unsupported config extension {other:?} (expected .toml or .json)",
            path.display()
        ))),
    }
}
