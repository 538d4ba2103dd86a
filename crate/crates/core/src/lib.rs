//! Design and far-field analysis of a bidirectional multibeam hybrid
//! transmitarray: one planar transmitarray (TA) stacked over a folded
//! transmitarray (FTA), fed by a switchable line of feeds whose
//! polarization selects the radiation direction.
//!
//! Lengths are millimetres, angles degrees unless a name says otherwise,
//! frequencies GHz. The feed plane sits at `z = 0`, the TA at `z = f` and
//! the FTA at `z = -h`.

pub mod cli;
pub mod config;
pub mod error;
pub mod farfield;
pub mod feed;
pub mod geometry;
pub mod polarization;
pub mod synthesis;
pub mod unitcell;

pub use error::{Error, Result};
pub use farfield::{run_scenario, BeamMetrics, ScenarioResult, SimulationConfig, Simulator};
pub use geometry::{build_layout, Hemisphere, LayoutConfig, Point3, SystemLayout};
pub use polarization::{route, PolarizationState};
pub use synthesis::{bifocal_phase, single_focus_phase, Compensation, ScanTarget};

use std::f64::consts::PI;

/// Speed of light in mm/ns, so that GHz and mm pair up directly.
pub const C_MM_PER_NS: f64 = 299.792_458;

/// Free-space wavenumber in rad/mm.
pub fn wavenumber(frequency_ghz: f64) -> f64 {
    2.0 * PI * frequency_ghz / C_MM_PER_NS
}

pub fn wavelength_mm(frequency_ghz: f64) -> f64 {
    C_MM_PER_NS / frequency_ghz
}

pub fn frequency_from_wavenumber(k0: f64) -> f64 {
    k0 * C_MM_PER_NS / (2.0 * PI)
}
