//! RIS panels: EGC phase design, discrete phase shifters and far-field path loss.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use super::geometry::{grid_steering, Angles, Convention, Position};
use crate::error::{Error, Result};
use crate::numerics::adaptive_gauss_kronrod;

/// Rectangular RIS on the ceiling, broadside normal pointing down.
///
/// Rows run along x with cell size `cell_dx`, columns along y with `cell_dy`
/// (both in wavelengths). `phase_bits = None` means continuous phase shifters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RisPanel {
    pub rows: usize,
    pub cols: usize,
    #[serde(default = "default_cell")]
    pub cell_dx: f64,
    #[serde(default = "default_cell")]
    pub cell_dy: f64,
    #[serde(default = "default_reflection")]
    pub reflection: f64,
    #[serde(default = "default_exponent")]
    pub pattern_exponent: f64,
    pub position: Position,
    #[serde(default)]
    pub phase_bits: Option<u32>,
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

impl RisPanel {
    pub fn new(rows: usize, cols: usize, position: Position) -> Self {
        Self {
            rows,
            cols,
            cell_dx: default_cell(),
            cell_dy: default_cell(),
            reflection: default_reflection(),
            pattern_exponent: default_exponent(),
            position,
            phase_bits: None,
        }
    }

    /// Number of reflectors `M`.
    pub fn elements(&self) -> usize {
        self.rows * self.cols
    }

    pub fn validate(&self) -> Result<()> {
        if self.elements() == 0 {
            return Err(Error::invalid("RIS panel needs at least one reflector"));
        }
        if !(self.reflection > 0.0 && self.reflection <= 1.0) {
            return Err(Error::invalid(format!(
                "reflection coefficient {} outside (0, 1]",
                self.reflection
            )));
        }
        if !(self.cell_dx > 0.0 && self.cell_dy > 0.0) {
            return Err(Error::invalid("RIS cell sizes must be positive"));
        }
        if self.pattern_exponent < 0.0 {
            return Err(Error::invalid("radiation pattern exponent must be ≥ 0"));
        }
        if self.phase_bits == Some(0) {
            return Err(Error::invalid("discrete phase needs at least one bit"));
        }
        Ok(())
    }

    /// Normalized power pattern `F(φa, φe) = cos^q(φe)`, zero behind the panel.
    pub fn pattern(&self, elevation: f64) -> f64 {
        let c = elevation.cos();
        if c <= f64::EPSILON {
            0.0
        } else {
            c.powf(self.pattern_exponent)
        }
    }

    /// Panel steering vector towards `angles` (elevation from the downward normal).
    pub fn steering(&self, angles: Angles, convention: Convention) -> Vec<Complex64> {
        let cosines = super::geometry::direction_cosines(angles, convention.elevation);
        grid_steering(
            self.rows,
            self.cols,
            self.cell_dx,
            self.cell_dy,
            cosines,
            convention.phase_sign,
        )
    }
}

/// EGC phase profile `Ω` with `Ω_m = conj(conj(a_m)·b_m)`, so that
/// `aᴴ·diag(Ω)·b = M` for unit-modulus `a` (departure) and `b` (incidence).
pub fn egc_phase_profile(departure: &[Complex64], incident: &[Complex64]) -> Result<Vec<Complex64>> {
    if departure.len() != incident.len() {
        return Err(Error::invalid(format!(
            "steering lengths differ: {} vs {}",
            departure.len(),
            incident.len()
        )));
    }
    Ok(departure
        .iter()
        .zip(incident)
        .map(|(a, b)| (a.conj() * b).conj())
        .collect())
}

/// Maps each phase (radians) to the nearest point of the uniform `2^bits` grid
/// on `[0, 2π)`; exact ties go to the smaller grid index.
pub fn quantize_phase(phases: &[f64], bits: u32) -> Vec<f64> {
    let n = 1usize << bits;
    let step = 2.0 * PI / n as f64;
    phases
        .iter()
        .map(|&p| {
            let t = p.rem_euclid(2.0 * PI);
            let lo = ((t / step).floor() as usize).min(n - 1);
            let hi = (lo + 1) % n;
            let d_lo = t - lo as f64 * step;
            let d_hi = (lo + 1) as f64 * step - t;
            let k = if d_lo < d_hi || (d_lo == d_hi && lo < hi) {
                lo
            } else {
                hi
            };
            k as f64 * step
        })
        .collect()
}

/// Scalar panel response `aᴴ·diag(Ω)·b`.
pub fn panel_response(departure: &[Complex64], omega: &[Complex64], incident: &[Complex64]) -> Complex64 {
    departure
        .iter()
        .zip(omega)
        .zip(incident)
        .map(|((a, w), b)| a.conj() * w * b)
        .sum()
}

/// Unit-cell gain `G = 4π / ∫∫ cos^q(φe)·sin(φe) dφe dφa` by nested adaptive quadrature.
pub fn cell_gain(pattern_exponent: f64) -> f64 {
    let q = pattern_exponent;
    let inner = |_azimuth: f64| {
        adaptive_gauss_kronrod(
            |el: f64| el.cos().max(0.0).powf(q) * el.sin(),
            0.0,
            PI / 2.0,
            1e-12,
            0.0,
        )
        .0
    };
    let (solid_angle, _) = adaptive_gauss_kronrod(inner, 0.0, 2.0 * PI, 1e-12, 0.0);
    4.0 * PI / solid_angle
}

/// Terminal antenna gains `G_t` (UE) and `G_r` (BS).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AntennaGains {
    pub tx: f64,
    pub rx: f64,
}

impl Default for AntennaGains {
    fn default() -> Self {
        Self { tx: 1.0, rx: 1.0 }
    }
}

/// Far-field amplitude gain `Mβ_i` of one panel.
///
/// `ue_elevation` and `bs_elevation` are RIS-local elevations (from the panel
/// normal) towards the UE and the BS.
pub fn path_loss_far_field(
    panel: &RisPanel,
    ue_elevation: f64,
    bs_elevation: f64,
    d_ue: f64,
    d_bs: f64,
    wavelength: f64,
    gains: AntennaGains,
) -> Result<f64> {
    if !(d_ue > 0.0 && d_bs > 0.0) {
        return Err(Error::invalid("RIS link distances must be positive"));
    }
    if !(wavelength > 0.0) {
        return Err(Error::invalid("wavelength must be positive"));
    }
    let g = cell_gain(panel.pattern_exponent);
    let dx = panel.cell_dx * wavelength;
    let dy = panel.cell_dy * wavelength;
    let num = gains.tx
        * gains.rx
        * g
        * dx
        * dy
        * wavelength.powi(2)
        * panel.pattern(ue_elevation)
        * panel.pattern(bs_elevation)
        * panel.reflection.powi(2);
    let den = 64.0 * PI.powi(3) * d_ue.powi(2) * d_bs.powi(2);
    Ok(panel.elements() as f64 * (num / den).sqrt())
}

/// Free-space amplitude gain `β_los` of the direct UE→BS path.
pub fn direct_path_gain(distance: f64, wavelength: f64, gains: AntennaGains) -> Result<f64> {
    if !(distance > 0.0) {
        return Err(Error::invalid("direct-path distance must be positive"));
    }
    Ok((gains.tx * gains.rx * wavelength.powi(2) / (16.0 * PI * PI * distance * distance)).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn cell_gain_closed_forms() {
        assert_relative_eq!(cell_gain(1.0), 4.0, max_relative = 1e-8);
        assert_relative_eq!(cell_gain(0.0), 2.0, max_relative = 1e-8);
        assert_relative_eq!(cell_gain(2.0), 6.0, max_relative = 1e-8);
    }

    #[test]
    fn quantize_phase_examples() {
        assert_eq!(quantize_phase(&[0.0], 2), vec![0.0]);
        assert_relative_eq!(quantize_phase(&[PI / 3.0], 2)[0], PI / 2.0);
        // Tie between 0 and π/2 resolves to index 0.
        assert_eq!(quantize_phase(&[PI / 4.0], 2)[0], 0.0);
        // Wrap-around: just below 2π maps back to 0.
        assert_eq!(quantize_phase(&[2.0 * PI - 1e-3], 3)[0], 0.0);
        assert_relative_eq!(quantize_phase(&[-PI / 2.0], 2)[0], 3.0 * PI / 2.0);
    }

    #[test]
    fn egc_single_element() {
        let a = [Complex64::from_polar(1.0, 0.4)];
        let b = [Complex64::from_polar(1.0, -1.1)];
        let omega = egc_phase_profile(&a, &b).unwrap();
        let s = panel_response(&a, &omega, &b);
        assert_relative_eq!(s.re, 1.0, epsilon = 1e-15);
        assert!(s.im.abs() < 1e-15);
        assert!(egc_phase_profile(&a, &[b[0], b[0]]).is_err());
    }

    #[test]
    fn path_loss_edge_cases() {
        let panel = RisPanel::new(10, 10, [0.0, 0.0, 3.0]);
        let g = path_loss_far_field(&panel, PI / 2.0, 0.0, 2.0, 3.0, 0.01, AntennaGains::default()).unwrap();
        assert!(g.abs() < 1e-15);
        assert!(path_loss_far_field(&panel, 0.0, 0.0, 0.0, 3.0, 0.01, AntennaGains::default()).is_err());
        let g1 = path_loss_far_field(&panel, 0.2, 0.3, 2.0, 3.0, 0.01, AntennaGains::default()).unwrap();
        let g2 = path_loss_far_field(&panel, 0.2, 0.3, 2.0, 6.0, 0.01, AntennaGains::default()).unwrap();
        assert_relative_eq!(g1, 2.0 * g2, max_relative = 1e-14);
    }

    #[test]
    fn direct_path_scaling() {
        let gains = AntennaGains::default();
        let b = direct_path_gain(5.0, 0.0107, gains).unwrap();
        assert_relative_eq!(direct_path_gain(10.0, 0.0107, gains).unwrap(), b / 2.0, max_relative = 1e-14);
        assert_relative_eq!(direct_path_gain(5.0, 0.0214, gains).unwrap(), 2.0 * b, max_relative = 1e-14);
        assert!(direct_path_gain(0.0, 0.0107, gains).is_err());
    }
}
