//! Array layouts, steering vectors and angle extraction from 3-D positions.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{Error, Result};

pub type Position = [f64; 3];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Layout {
    LinearX,
    LinearY,
    Rectangular,
}

/// Planar antenna array lying in the x-y plane.
///
/// Element `(k1, k2)` sits at `(k1·d, k2·d, 0)` wavelengths and is stored at
/// flat index `k1·n2 + k2`, which is the Kronecker ordering `x ⊗ y`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ArrayGeometry {
    pub layout: Layout,
    #[serde(default = "one")]
    pub n1: usize,
    #[serde(default = "one")]
    pub n2: usize,
    #[serde(default = "half")]
    pub spacing: f64,
}

fn one() -> usize {
    1
}

fn half() -> f64 {
    0.5
}

impl ArrayGeometry {
    pub fn linear_x(n: usize) -> Self {
        Self {
            layout: Layout::LinearX,
            n1: n,
            n2: 1,
            spacing: 0.5,
        }
    }

    pub fn linear_y(n: usize) -> Self {
        Self {
            layout: Layout::LinearY,
            n1: 1,
            n2: n,
            spacing: 0.5,
        }
    }

    pub fn rectangular(n1: usize, n2: usize) -> Self {
        Self {
            layout: Layout::Rectangular,
            n1,
            n2,
            spacing: 0.5,
        }
    }

    pub fn with_spacing(mut self, spacing: f64) -> Self {
        self.spacing = spacing;
        self
    }

    pub fn len(&self) -> usize {
        self.n1 * self.n2
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn validate(&self) -> Result<()> {
        if self.n1 == 0 || self.n2 == 0 {
            return Err(Error::invalid("array needs at least one element per axis"));
        }
        if !(self.spacing > 0.0 && self.spacing.is_finite()) {
            return Err(Error::invalid(format!("array spacing {} must be positive", self.spacing)));
        }
        match self.layout {
            Layout::LinearX if self.n2 != 1 => {
                Err(Error::invalid("linear-x layout requires n2 = 1"))
            }
            Layout::LinearY if self.n1 != 1 => {
                Err(Error::invalid("linear-y layout requires n1 = 1"))
            }
            _ => Ok(()),
        }
    }
}

/// Sign of the phase progression used in every steering vector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PhaseSign {
    /// `exp(-j·2π·d·k·u)`.
    #[default]
    Negative,
    Positive,
}

impl PhaseSign {
    fn factor(self) -> f64 {
        match self {
            PhaseSign::Negative => -1.0,
            PhaseSign::Positive => 1.0,
        }
    }
}

/// How the elevation angle handed to the steering formula is measured.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ElevationRef {
    /// From the array's broadside normal.
    #[default]
    Normal,
    /// From the array plane (complement of the normal-referenced angle).
    Plane,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Convention {
    #[serde(default)]
    pub phase_sign: PhaseSign,
    #[serde(default)]
    pub elevation: ElevationRef,
}

/// Which way an array's broadside normal points.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Facing {
    Up,
    Down,
}

/// Azimuth in the x-y plane from +x and elevation from the broadside normal.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Angles {
    pub azimuth: f64,
    pub elevation: f64,
}

pub fn distance(from: Position, to: Position) -> f64 {
    let (dx, dy, dz) = (to[0] - from[0], to[1] - from[1], to[2] - from[2]);
    (dx * dx + dy * dy + dz * dz).sqrt()
}

/// Angles of `to` as seen by an array at `from` whose normal is `facing`.
pub fn angles_between(from: Position, to: Position, facing: Facing) -> Option<Angles> {
    let r = distance(from, to);
    if !(r > 1e-9) {
        return None;
    }
    let u = [(to[0] - from[0]) / r, (to[1] - from[1]) / r, (to[2] - from[2]) / r];
    let cos_el = match facing {
        Facing::Up => u[2],
        Facing::Down => -u[2],
    };
    Some(Angles {
        azimuth: u[1].atan2(u[0]),
        elevation: cos_el.clamp(-1.0, 1.0).acos(),
    })
}

/// Direction cosines `(cos φa·sin φe, sin φa·sin φe)` under `convention`.
pub fn direction_cosines(angles: Angles, convention: ElevationRef) -> (f64, f64) {
    let el = match convention {
        ElevationRef::Normal => angles.elevation,
        ElevationRef::Plane => PI / 2.0 - angles.elevation,
    };
    (angles.azimuth.cos() * el.sin(), angles.azimuth.sin() * el.sin())
}

fn linear_phases(n: usize, spacing: f64, cosine: f64, sign: f64) -> Vec<Complex64> {
    (0..n)
        .map(|k| Complex64::from_polar(1.0, sign * 2.0 * PI * spacing * k as f64 * cosine))
        .collect()
}

/// Kronecker product of two vectors.
pub fn kron(x: &[Complex64], y: &[Complex64]) -> Vec<Complex64> {
    x.iter().flat_map(|&a| y.iter().map(move |&b| a * b)).collect()
}

/// Steering vector of an `n1 × n2` grid with per-axis spacings (wavelengths).
pub(crate) fn grid_steering(
    n1: usize,
    n2: usize,
    spacing_x: f64,
    spacing_y: f64,
    cosines: (f64, f64),
    sign: PhaseSign,
) -> Vec<Complex64> {
    let s = sign.factor();
    let x = linear_phases(n1, spacing_x, cosines.0, s);
    let y = linear_phases(n2, spacing_y, cosines.1, s);
    kron(&x, &y)
}

/// Unit-modulus steering vector of `geometry` towards `(azimuth, elevation)`.
///
/// Entry `k` of an x-axis line is `exp(-j·2π·d·k·cos φa·sin φe)`; y-axis
/// lines use `sin φa`; rectangular arrays return `x ⊗ y`.
pub fn steering_vector(geometry: &ArrayGeometry, azimuth: f64, elevation: f64) -> Result<Vec<Complex64>> {
    steering_vector_with(geometry, azimuth, elevation, PhaseSign::Negative)
}

pub fn steering_vector_with(
    geometry: &ArrayGeometry,
    azimuth: f64,
    elevation: f64,
    sign: PhaseSign,
) -> Result<Vec<Complex64>> {
    if !azimuth.is_finite() || !elevation.is_finite() {
        return Err(Error::invalid("steering angles must be finite"));
    }
    geometry.validate()?;
    let cosines = (azimuth.cos() * elevation.sin(), azimuth.sin() * elevation.sin());
    Ok(grid_steering(
        geometry.n1,
        geometry.n2,
        geometry.spacing,
        geometry.spacing,
        cosines,
        sign,
    ))
}
