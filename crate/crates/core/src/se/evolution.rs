//! Descent and ascent state-evolution recursions.

use serde::{Deserialize, Serialize};
use std::path::Path;

use super::code::{mmse_c, CodeTransfer};
use super::functions::{mmse_u, psi_f, psi_r, zeta, SingularSpectrum};
use crate::error::{Error, Result};
use crate::frontend::{AdcSpec, VarianceClip};
use crate::numerics::norm_cdf;

#[derive(Debug, Clone, Copy)]
pub enum Prior<'a> {
    Coded(&'a CodeTransfer),
    Uncoded,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Process {
    Descent,
    Ascent,
}

impl Process {
    pub fn as_str(self) -> &'static str {
        match self {
            Process::Descent => "descent",
            Process::Ascent => "ascent",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeRow {
    pub t: usize,
    pub eta_z: f64,
    pub eta_x: f64,
    pub v_x: f64,
    pub v_z: f64,
    pub ber: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SeTrace {
    pub process: Process,
    pub rows: Vec<SeRow>,
    pub converged: bool,
    /// Iterations in which a precision or variance had to be clipped.
    pub clip_events: usize,
}

impl SeTrace {
    pub fn final_ber(&self) -> f64 {
        self.rows.last().map_or(0.5, |r| r.ber)
    }

    pub fn final_row(&self) -> Option<&SeRow> {
        self.rows.last()
    }

    /// Appends this trace to a CSV (`t, eta_z, eta_x, v_x, v_z, ber, process`).
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        w.write_record(["t", "eta_z", "eta_x", "v_x", "v_z", "ber", "process"])?;
        for r in &self.rows {
            w.write_record([
                r.t.to_string(),
                format!("{:e}", r.eta_z),
                format!("{:e}", r.eta_x),
                format!("{:e}", r.v_x),
                format!("{:e}", r.v_z),
                format!("{:e}", r.ber),
                self.process.as_str().to_string(),
            ])?;
        }
        w.flush().map_err(|e| Error::io(path, e))?;
        Ok(())
    }
}

/// Everything the recursion needs besides the prior.
#[derive(Debug, Clone)]
pub struct SeSystem {
    pub spectrum: SingularSpectrum,
    /// `P_z`.
    pub power: f64,
    pub noise_var: f64,
    pub adc: AdcSpec,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SeConfig {
    pub max_iter: usize,
    /// Stop once successive `v_x` differ by less than this.
    pub tol: f64,
    /// Forced first `η_x` of the ascent process.
    pub eta_x_init: f64,
    pub clip: VarianceClip,
}

impl Default for SeConfig {
    fn default() -> Self {
        Self {
            max_iter: 500,
            tol: 1e-10,
            eta_x_init: 1e4,
            clip: VarianceClip::default(),
        }
    }
}

fn run(system: &SeSystem, prior: Prior, config: &SeConfig, process: Process) -> Result<SeTrace> {
    if config.max_iter == 0 {
        return Err(Error::invalid("SE needs at least one iteration"));
    }
    let clip = config.clip;
    let p_z = system.power;
    let mut v_x = 1.0;
    let mut v_z = p_z;
    let mut rows = Vec::new();
    let mut converged = false;
    let mut clip_events = 0;
    for t in 1..=config.max_iter {
        let mut clipped = false;
        let z = zeta(v_z, p_z, system.noise_var, &system.adc)?;
        let denom = 1.0 / z - v_z;
        let eta_z = if denom > 0.0 && (1.0 / denom).is_finite() {
            1.0 / denom
        } else {
            clipped = true;
            1.0 / clip.min
        };
        let eta_x = match (process, t) {
            (Process::Ascent, 1) => config.eta_x_init,
            _ => ((1.0 / v_x) * (1.0 / psi_r(v_x, eta_z, &system.spectrum) - 1.0)).max(0.0),
        };
        let mmse = match prior {
            Prior::Coded(tr) => mmse_c(eta_x, tr),
            Prior::Uncoded => mmse_u(eta_x),
        };
        let inv = 1.0 / mmse - eta_x;
        let v_x_new = if inv > 0.0 {
            let v = 1.0 / inv;
            let c = clip.apply(v);
            clipped |= c != v;
            c
        } else {
            clipped = true;
            clip.min
        };
        let raw_vz = (1.0 / eta_z) * (1.0 / psi_f(v_x_new, eta_z, &system.spectrum) - 1.0);
        let v_z_new = raw_vz.clamp(clip.min, p_z);
        clipped |= v_z_new != raw_vz;
        let ber = match prior {
            Prior::Coded(tr) => norm_cdf(-tr.delta(eta_x).sqrt()),
            Prior::Uncoded => norm_cdf(-eta_x.sqrt()),
        };
        clip_events += clipped as usize;
        rows.push(SeRow {
            t,
            eta_z,
            eta_x,
            v_x: v_x_new,
            v_z: v_z_new,
            ber: ber.clamp(0.0, 0.5),
        });
        let dv = (v_x_new - v_x).abs();
        v_x = v_x_new;
        v_z = v_z_new;
        if t > 1 && dv < config.tol {
            converged = true;
            break;
        }
    }
    Ok(SeTrace {
        process,
        rows,
        converged,
        clip_events,
    })
}

/// Natural initialization `v_x = 1`, `v_z = P_z`.
pub fn se_descent(system: &SeSystem, prior: Prior, config: &SeConfig) -> Result<SeTrace> {
    run(system, prior, config, Process::Descent)
}

/// Same recursion with the first `η_x` forced to `config.eta_x_init`.
pub fn se_ascent(system: &SeSystem, prior: Prior, config: &SeConfig) -> Result<SeTrace> {
    run(system, prior, config, Process::Ascent)
}
