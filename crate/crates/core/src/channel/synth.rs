//! Synthetic UE→RIS→BS channel assembly and its singular spectrum.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::io::Write;
use std::path::Path;

use super::geometry::{angles_between, direction_cosines, grid_steering, Facing};
use super::ris::{direct_path_gain, egc_phase_profile, panel_response, path_loss_far_field, quantize_phase};
use super::scenario::Scenario;
use crate::error::{Error, Result};

pub type CMatrix = DMatrix<Complex64>;

/// Effective `N × K` MIMO channel and its summary statistics.
#[derive(Debug, Clone)]
pub struct SyntheticChannel {
    pub matrix: CMatrix,
    /// Nominal far-field gains `Mβ_i` per panel.
    pub panel_gains: Vec<f64>,
    /// Realized panel scalars `aᴴ·diag(Ω)·b` (equal to `M` for continuous phase).
    pub panel_responses: Vec<Complex64>,
    pub direct_gain: Option<f64>,
    /// Descending singular values of `matrix`.
    pub singular_values: Vec<f64>,
    /// `P_z = tr(AAᴴ)/N`.
    pub power: f64,
    /// Receiver noise level `v_w`.
    pub noise_var: f64,
}

impl SyntheticChannel {
    pub fn from_matrix(matrix: CMatrix, noise_var: f64) -> Self {
        let singular_values = singular_values(&matrix);
        let power = matrix.iter().map(|a| a.norm_sqr()).sum::<f64>() / matrix.nrows() as f64;
        Self {
            matrix,
            panel_gains: Vec::new(),
            panel_responses: Vec::new(),
            direct_gain: None,
            singular_values,
            power,
            noise_var,
        }
    }

    pub fn n_rx(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn n_tx(&self) -> usize {
        self.matrix.ncols()
    }

    /// Load ratio `α = K/N`.
    pub fn alpha(&self) -> f64 {
        self.n_tx() as f64 / self.n_rx() as f64
    }

    /// Same channel with a different noise level.
    pub fn with_noise(&self, noise_var: f64) -> Self {
        Self {
            noise_var,
            ..self.clone()
        }
    }

    /// Channel scaled so that `P_z = target`.
    pub fn normalized(&self, target: f64) -> Self {
        let s = (target / self.power).sqrt();
        Self {
            matrix: self.matrix.map(|a| a * s),
            panel_gains: self.panel_gains.iter().map(|g| g * s).collect(),
            panel_responses: self.panel_responses.clone(),
            direct_gain: self.direct_gain.map(|g| g * s),
            singular_values: self.singular_values.iter().map(|l| l * s).collect(),
            power: target,
            noise_var: self.noise_var,
        }
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.matrix.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Writes `A` as CSV (one row per receive antenna, interleaved re/im).
    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let mut out = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        for r in 0..self.n_rx() {
            let row: Vec<String> = (0..self.n_tx())
                .flat_map(|c| {
                    let a = self.matrix[(r, c)];
                    [format!("{:e}", a.re), format!("{:e}", a.im)]
                })
                .collect();
            writeln!(out, "{}", row.join(",")).map_err(|e| Error::io(path, e))?;
        }
        Ok(())
    }

    pub fn metadata(&self) -> ChannelMetadata {
        let stats = spectrum_stats(self);
        ChannelMetadata {
            n_rx: self.n_rx(),
            n_tx: self.n_tx(),
            singular_values: stats.singular_values,
            condition_number: stats.condition_number,
            power: stats.power,
            noise_var: self.noise_var,
            panel_gains: self.panel_gains.clone(),
            panel_response_magnitudes: self.panel_responses.iter().map(|s| s.norm()).collect(),
            direct_gain: self.direct_gain,
        }
    }

    /// Reads back a matrix written by [`SyntheticChannel::write_csv`].
    pub fn read_csv(path: impl AsRef<Path>, noise_var: f64) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut rows = Vec::new();
        for line in text.lines().filter(|l| !l.trim().is_empty()) {
            let vals: std::result::Result<Vec<f64>, _> = line.split(',').map(|v| v.trim().parse::<f64>()).collect();
            let vals = vals.map_err(|e| Error::invalid(format!("{}: {e}", path.display())))?;
            if vals.len() % 2 != 0 {
                return Err(Error::invalid("channel CSV rows need interleaved re/im pairs"));
            }
            rows.push(vals.chunks(2).map(|p| Complex64::new(p[0], p[1])).collect::<Vec<_>>());
        }
        let n = rows.len();
        let k = rows.first().map_or(0, |r| r.len());
        if n == 0 || rows.iter().any(|r| r.len() != k) {
            return Err(Error::invalid("channel CSV must be a nonempty rectangular matrix"));
        }
        Ok(Self::from_matrix(CMatrix::from_fn(n, k, |r, c| rows[r][c]), noise_var))
    }
}

/// Sidecar JSON written next to the channel CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChannelMetadata {
    pub n_rx: usize,
    pub n_tx: usize,
    pub singular_values: Vec<f64>,
    pub condition_number: f64,
    pub power: f64,
    pub noise_var: f64,
    pub panel_gains: Vec<f64>,
    pub panel_response_magnitudes: Vec<f64>,
    pub direct_gain: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumStats {
    pub singular_values: Vec<f64>,
    pub condition_number: f64,
    pub power: f64,
}

/// Descending singular values of `m`.
pub fn singular_values(m: &CMatrix) -> Vec<f64> {
    let mut s: Vec<f64> = m.clone().singular_values().iter().copied().collect();
    s.sort_by(|a, b| b.total_cmp(a));
    s
}

pub fn spectrum_stats(channel: &SyntheticChannel) -> SpectrumStats {
    let s = channel.singular_values.clone();
    let smin = s.last().copied().unwrap_or(0.0);
    let condition_number = if smin > 0.0 { s[0] / smin } else { f64::INFINITY };
    let power = s.iter().map(|l| l * l).sum::<f64>() / channel.n_rx() as f64;
    SpectrumStats {
        singular_values: s,
        condition_number,
        power,
    }
}

/// Builds `A = (1/√K)·Σ_i c_i·g_i·h_iᴴ` (+ optional direct path).
///
/// With continuous phases `c_i = Mβ_i`; with `P`-bit phase shifters the EGC
/// profile is rounded to the grid and `c_i = β_i·aᴴ·diag(Ω̂)·b`.
pub fn synthesize(scenario: &Scenario) -> Result<SyntheticChannel> {
    scenario.validate()?;
    let conv = scenario.convention;
    let lambda = scenario.wavelength();
    let (n, k) = (scenario.bs.array.len(), scenario.ue.array.len());
    let bs_pos = scenario.bs.position;
    let ue_pos = scenario.ue.position;
    let terminal_steering = |array: &super::geometry::ArrayGeometry, from, to| -> Result<Vec<Complex64>> {
        let angles = angles_between(from, to, Facing::Up)
            .ok_or_else(|| Error::invalid("terminal colocated with its target"))?;
        let cos = direction_cosines(angles, conv.elevation);
        Ok(grid_steering(array.n1, array.n2, array.spacing, array.spacing, cos, conv.phase_sign))
    };

    let norm = 1.0 / (k as f64).sqrt();
    let mut a = CMatrix::zeros(n, k);
    let panels = scenario.panels();
    let mut gains = Vec::with_capacity(panels.len());
    let mut responses = Vec::with_capacity(panels.len());
    for (i, panel) in panels.iter().enumerate() {
        let colocated = || Error::invalid(format!("UE or BS colocated with RIS panel {i}"));
        let to_ue = angles_between(panel.position, ue_pos, Facing::Down).ok_or_else(colocated)?;
        let to_bs = angles_between(panel.position, bs_pos, Facing::Down).ok_or_else(colocated)?;
        let d_ue = super::geometry::distance(panel.position, ue_pos);
        let d_bs = super::geometry::distance(panel.position, bs_pos);
        let gain = path_loss_far_field(
            panel,
            to_ue.elevation,
            to_bs.elevation,
            d_ue,
            d_bs,
            lambda,
            scenario.gains,
        )?;
        let m = panel.elements() as f64;
        let (coef, response) = match panel.phase_bits {
            None => (Complex64::new(gain, 0.0), Complex64::new(m, 0.0)),
            Some(bits) => {
                let departure = panel.steering(to_bs, conv);
                let incident = panel.steering(to_ue, conv);
                let omega = egc_phase_profile(&departure, &incident)?;
                let phases: Vec<f64> = omega.iter().map(|w| w.arg()).collect();
                let omega_q: Vec<Complex64> = quantize_phase(&phases, bits)
                    .into_iter()
                    .map(|p| Complex64::from_polar(1.0, p))
                    .collect();
                let s = panel_response(&departure, &omega_q, &incident);
                (s * (gain / m), s)
            }
        };
        let g = terminal_steering(&scenario.bs.array, bs_pos, panel.position)?;
        let h = terminal_steering(&scenario.ue.array, ue_pos, panel.position)?;
        add_rank_one(&mut a, coef * norm, &g, &h);
        gains.push(gain);
        responses.push(response);
    }

    let direct_gain = if scenario.direct_path {
        let d = super::geometry::distance(ue_pos, bs_pos);
        let beta = direct_path_gain(d, lambda, scenario.gains)?;
        let g = terminal_steering(&scenario.bs.array, bs_pos, ue_pos)?;
        let h = terminal_steering(&scenario.ue.array, ue_pos, bs_pos)?;
        add_rank_one(&mut a, Complex64::new(beta * norm, 0.0), &g, &h);
        Some(beta)
    } else {
        None
    };

    let mut channel = SyntheticChannel::from_matrix(a, scenario.noise_power());
    channel.panel_gains = gains;
    channel.panel_responses = responses;
    channel.direct_gain = direct_gain;
    Ok(channel)
}

fn add_rank_one(a: &mut CMatrix, coef: Complex64, g: &[Complex64], h: &[Complex64]) {
    for c in 0..a.ncols() {
        let hc = h[c].conj() * coef;
        for r in 0..a.nrows() {
            a[(r, c)] += g[r] * hc;
        }
    }
}
