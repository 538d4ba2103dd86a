//! Jones algebra for ideal wire grids and 90° polarization rotators, and the
//! three-state routing of the folded stack.
//!
//! The grid closest to the feeds on the upper (TA) side has its wires along
//! y; the one on the lower (FTA) side has them along x. An x-polarized feed
//! passes the upper grid and is rotated once into y. A y-polarized feed is
//! reflected, then crosses the lower stack of two rotating layers and comes
//! out y-polarized again. A 45° feed splits between both paths.

use std::f64::consts::FRAC_1_SQRT_2;
use std::fmt;
use std::ops::{Add, Mul};
use std::str::FromStr;

use num_complex::Complex64;

use crate::error::Error;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Transverse field `(ex, ey)`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct JonesVector {
    pub ex: Complex64,
    pub ey: Complex64,
}

impl JonesVector {
    pub const fn new(ex: Complex64, ey: Complex64) -> Self {
        JonesVector { ex, ey }
    }

    pub fn real(ex: f64, ey: f64) -> Self {
        JonesVector::new(Complex64::new(ex, 0.0), Complex64::new(ey, 0.0))
    }

    pub fn norm_sqr(&self) -> f64 {
        self.ex.norm_sqr() + self.ey.norm_sqr()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    pub fn is_finite(&self) -> bool {
        self.ex.is_finite() && self.ey.is_finite()
    }
}

impl Mul<Complex64> for JonesVector {
    type Output = JonesVector;
    fn mul(self, rhs: Complex64) -> JonesVector {
        JonesVector::new(self.ex * rhs, self.ey * rhs)
    }
}

impl Mul<f64> for JonesVector {
    type Output = JonesVector;
    fn mul(self, rhs: f64) -> JonesVector {
        JonesVector::new(self.ex * rhs, self.ey * rhs)
    }
}

impl Add for JonesVector {
    type Output = JonesVector;
    fn add(self, rhs: JonesVector) -> JonesVector {
        JonesVector::new(self.ex + rhs.ex, self.ey + rhs.ey)
    }
}

/// Feed polarization, which selects the radiation state.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum PolarizationState {
    /// Forward only (TA state).
    X,
    /// Backward only (FTA state).
    Y,
    /// Both directions (HTA state).
    Slant45,
}

impl PolarizationState {
    pub const ALL: [PolarizationState; 3] = [PolarizationState::X, PolarizationState::Y, PolarizationState::Slant45];

    pub fn unit_vector(self) -> JonesVector {
        match self {
            PolarizationState::X => JonesVector::real(1.0, 0.0),
            PolarizationState::Y => JonesVector::real(0.0, 1.0),
            PolarizationState::Slant45 => JonesVector::real(FRAC_1_SQRT_2, FRAC_1_SQRT_2),
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            PolarizationState::X => "x",
            PolarizationState::Y => "y",
            PolarizationState::Slant45 => "slant45",
        }
    }

    /// Name of the radiation state this polarization selects.
    pub fn state_name(self) -> &'static str {
        match self {
            PolarizationState::X => "TA",
            PolarizationState::Y => "FTA",
            PolarizationState::Slant45 => "HTA",
        }
    }
}

impl fmt::Display for PolarizationState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for PolarizationState {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self, Error> {
        match s.trim().to_ascii_lowercase().as_str() {
            "x" | "ta" => Ok(PolarizationState::X),
            "y" | "fta" => Ok(PolarizationState::Y),
            "slant45" | "45" | "hta" => Ok(PolarizationState::Slant45),
            other => Err(Error::Config(format!(
                "unknown polarization state '{other}' (expected x, y or slant45)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GridOrientation {
    WiresAlongX,
    WiresAlongY,
}

/// Ideal grid transmission: the component parallel to the wires is removed.
pub fn grid_transmit(v: JonesVector, g: GridOrientation) -> JonesVector {
    match g {
        GridOrientation::WiresAlongX => JonesVector::new(ZERO, v.ey),
        GridOrientation::WiresAlongY => JonesVector::new(v.ex, ZERO),
    }
}

/// Default reflection phase of a grid (perfect conductor).
pub const DEFAULT_REFLECTION_PHASE_DEG: f64 = 180.0;

/// Ideal grid reflection of the parallel component with the default 180°
/// reflection phase.
pub fn grid_reflect(v: JonesVector, g: GridOrientation) -> JonesVector {
    grid_reflect_with_phase(v, g, DEFAULT_REFLECTION_PHASE_DEG)
}

pub fn grid_reflect_with_phase(v: JonesVector, g: GridOrientation, phase_deg: f64) -> JonesVector {
    let r = Complex64::from_polar(1.0, phase_deg.to_radians());
    match g {
        GridOrientation::WiresAlongX => JonesVector::new(v.ex * r, ZERO),
        GridOrientation::WiresAlongY => JonesVector::new(ZERO, v.ey * r),
    }
}

/// 90° rotation `(ex, ey) -> (-ey, ex)`.
pub fn rotate_pol_90(v: JonesVector) -> JonesVector {
    JonesVector::new(-v.ey, v.ex)
}

/// Grid nearest the feeds on the TA side.
pub const TA_INNER_GRID: GridOrientation = GridOrientation::WiresAlongY;
/// Grid nearest the feeds on the FTA side.
pub const FTA_INNER_GRID: GridOrientation = GridOrientation::WiresAlongX;

/// Field leaving the TA stack for a feed field `v`: inner grid, one
/// rotation, outer grid.
pub fn forward_path(v: JonesVector) -> JonesVector {
    let v = grid_transmit(v, TA_INNER_GRID);
    let v = rotate_pol_90(v);
    grid_transmit(v, GridOrientation::WiresAlongX)
}

/// Field leaving the FTA stack: reflection off the TA inner grid, then two
/// stacked rotating layers, each bounded by orthogonal grids.
pub fn backward_path(v: JonesVector, reflection_phase_deg: f64) -> JonesVector {
    let v = grid_reflect_with_phase(v, TA_INNER_GRID, reflection_phase_deg);
    let v = grid_transmit(v, FTA_INNER_GRID);
    let v = rotate_pol_90(v);
    let v = grid_transmit(v, GridOrientation::WiresAlongY);
    let v = rotate_pol_90(v);
    grid_transmit(v, GridOrientation::WiresAlongX)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RoutingPlan {
    pub state: PolarizationState,
    pub forward_active: bool,
    pub backward_active: bool,
    pub forward_amplitude: f64,
    pub backward_amplitude: f64,
    pub output_polarization: PolarizationState,
}

impl RoutingPlan {
    pub fn is_active(&self, hemisphere: crate::geometry::Hemisphere) -> bool {
        match hemisphere {
            crate::geometry::Hemisphere::Forward => self.forward_active,
            crate::geometry::Hemisphere::Backward => self.backward_active,
        }
    }
}

const ACTIVE_EPS: f64 = 1e-12;

/// Which directions a feed polarization lights up, derived by pushing the
/// feed's unit Jones vector through both paths.
pub fn route(state: PolarizationState) -> RoutingPlan {
    let v = state.unit_vector();
    let fwd = forward_path(v);
    let bwd = backward_path(v, DEFAULT_REFLECTION_PHASE_DEG);
    let forward_amplitude = fwd.norm();
    let backward_amplitude = bwd.norm();
    // Both paths end on a grid that only passes y.
    debug_assert!(fwd.ex == ZERO && bwd.ex == ZERO);
    RoutingPlan {
        state,
        forward_active: forward_amplitude > ACTIVE_EPS,
        backward_active: backward_amplitude > ACTIVE_EPS,
        forward_amplitude,
        backward_amplitude,
        output_polarization: PolarizationState::Y,
    }
}
