//! Compensation-phase synthesis for the TA and FTA apertures.
//!
//! A single (possibly off-axis) focus at distance `R_ij` from element
//! `(i, j)` with a beam toward `(theta, phi)` needs
//! `k0 * (R_ij - sin(theta) * (x_i cos(phi) + y_j sin(phi)))`.
//! The bifocal law averages two such maps for feeds mirrored about the
//! aperture axis whose beams point to `+theta` and `-theta`; the linear
//! terms cancel and what remains is `k0 * (R1 + R2) / 2`. Averaging is done
//! on unwrapped phases and the result wrapped once.

use std::io::Write;

use log::warn;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geometry::{path_length, ApertureSpec, Hemisphere, Point3, SystemLayout, LENGTH_EPS_MM};
use crate::unitcell::{self, circular_diff_deg, wrap_deg, LookupMode, PhaseCurve, UnitCellGeometry};

/// Intended beam direction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScanTarget {
    pub theta: f64,
    pub phi: f64,
}

impl ScanTarget {
    pub fn new(theta: f64, phi: f64) -> Result<Self> {
        if !(0.0..90.0).contains(&theta) {
            return Err(Error::AngleOutOfRange {
                value: theta,
                range: "[0, 90)",
            });
        }
        if !(0.0..360.0).contains(&phi) {
            return Err(Error::AngleOutOfRange {
                value: phi,
                range: "[0, 360)",
            });
        }
        Ok(ScanTarget { theta, phi })
    }

    pub const BROADSIDE: ScanTarget = ScanTarget { theta: 0.0, phi: 0.0 };
}

/// Which phase law drives synthesis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Compensation {
    /// Mean of the two virtual-feed maps.
    #[default]
    Bifocal,
    /// Classic on-axis focusing toward broadside.
    SingleFocus,
}

impl std::str::FromStr for Compensation {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "bifocal" => Ok(Compensation::Bifocal),
            "single_focus" | "single-focus" => Ok(Compensation::SingleFocus),
            o => Err(Error::Config(format!("unknown compensation '{o}'"))),
        }
    }
}

/// Wrapped compensation phases (degrees) over an aperture grid.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseMap {
    pub aperture: ApertureSpec,
    pub phases_deg: Vec<f64>,
    /// rad/mm
    pub k0: f64,
    pub frequency_ghz: f64,
}

impl PhaseMap {
    fn from_unwrapped(aperture: &ApertureSpec, unwrapped_rad: &[f64], k0: f64) -> Self {
        PhaseMap {
            aperture: aperture.clone(),
            phases_deg: unwrapped_rad.iter().map(|p| wrap_deg(p.to_degrees())).collect(),
            k0,
            frequency_ghz: crate::frequency_from_wavenumber(k0),
        }
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.phases_deg[self.aperture.index(i, j)]
    }

    /// The map with every entry wrapped again (a no-op for valid maps).
    pub fn rewrapped(&self) -> Self {
        PhaseMap {
            phases_deg: self.phases_deg.iter().map(|&p| wrap_deg(p)).collect(),
            ..self.clone()
        }
    }

    /// CSV with header `i,j,x_mm,y_mm,phase_deg`.
    pub fn write_csv(&self, mut w: impl Write) -> std::io::Result<()> {
        writeln!(w, "i,j,x_mm,y_mm,phase_deg")?;
        for (i, j, c) in self.aperture.elements() {
            writeln!(w, "{i},{j},{:.3},{:.3},{:.6}", c.x, c.y, self.get(i, j))?;
        }
        Ok(())
    }
}

fn check_feed(aperture: &ApertureSpec, feed: Point3) -> Result<()> {
    if !feed.is_finite() || (feed.z - aperture.plane_z).abs() <= LENGTH_EPS_MM {
        return Err(Error::DegenerateFeed(aperture.plane_z));
    }
    Ok(())
}

fn check_k0(k0: f64) -> Result<f64> {
    crate::error::ensure_positive("k0", k0)
}

/// Unwrapped single-focus phases in radians, storage order.
pub fn single_focus_unwrapped(aperture: &ApertureSpec, feed: Point3, target: ScanTarget, k0: f64) -> Result<Vec<f64>> {
    check_feed(aperture, feed)?;
    check_k0(k0)?;
    let (st, phi) = (target.theta.to_radians().sin(), target.phi.to_radians());
    let (cp, sp) = (phi.cos(), phi.sin());
    Ok(aperture
        .elements()
        .map(|(_, _, c)| k0 * (path_length(feed, c) - st * (c.x * cp + c.y * sp)))
        .collect())
}

pub fn single_focus_phase(aperture: &ApertureSpec, feed: Point3, target: ScanTarget, k0: f64) -> Result<PhaseMap> {
    let raw = single_focus_unwrapped(aperture, feed, target, k0)?;
    Ok(PhaseMap::from_unwrapped(aperture, &raw, k0))
}

fn check_symmetric(vf1: Point3, vf2: Point3) -> Result<()> {
    let tol = LENGTH_EPS_MM * (1.0 + vf1.x.abs().max(vf2.x.abs()));
    if (vf1.x + vf2.x).abs() > tol || (vf1.y - vf2.y).abs() > tol || (vf1.z - vf2.z).abs() > tol {
        return Err(Error::AsymmetricFeeds);
    }
    Ok(())
}

/// Unwrapped bifocal phases in radians: `k0 * (R1 + R2) / 2`.
pub fn bifocal_unwrapped(aperture: &ApertureSpec, vf1: Point3, vf2: Point3, k0: f64) -> Result<Vec<f64>> {
    check_symmetric(vf1, vf2)?;
    check_feed(aperture, vf1)?;
    check_k0(k0)?;
    Ok(aperture
        .elements()
        .map(|(_, _, c)| k0 * (path_length(vf1, c) + path_length(vf2, c)) / 2.0)
        .collect())
}

/// The two single-focus constituents of the bifocal law: `vf1` steering to
/// `theta` in the `phi = 0` half-plane and `vf2` to the `phi = 180` one.
pub fn bifocal_constituents(
    aperture: &ApertureSpec,
    vf1: Point3,
    vf2: Point3,
    theta: f64,
    k0: f64,
) -> Result<(Vec<f64>, Vec<f64>)> {
    let a = single_focus_unwrapped(aperture, vf1, ScanTarget::new(theta, 0.0)?, k0)?;
    let b = single_focus_unwrapped(aperture, vf2, ScanTarget::new(theta, 180.0)?, k0)?;
    Ok((a, b))
}

/// Bifocal compensation. `theta` is the constituent beam angle; for the
/// symmetric arrangement the result does not depend on it, so it is only
/// range-checked.
pub fn bifocal_phase(aperture: &ApertureSpec, vf1: Point3, vf2: Point3, theta: f64, k0: f64) -> Result<PhaseMap> {
    if theta.is_nan() || theta.abs() >= 90.0 {
        return Err(Error::AngleOutOfRange {
            value: theta,
            range: "(-90, 90)",
        });
    }
    let raw = bifocal_unwrapped(aperture, vf1, vf2, k0)?;
    Ok(PhaseMap::from_unwrapped(aperture, &raw, k0))
}

pub fn synthesize_ta(layout: &SystemLayout, k0: f64) -> Result<PhaseMap> {
    let [vf1, vf2] = layout.virtual_feeds;
    bifocal_phase(&layout.ta, vf1, vf2, layout.offset_angle_deg(), k0)
}

pub fn synthesize_fta(layout: &SystemLayout, k0: f64) -> Result<PhaseMap> {
    let [vf1, vf2] = layout.mirrored_virtual_feeds();
    let theta = (layout.d / 2.0).atan2(layout.folded_focal).to_degrees();
    bifocal_phase(&layout.fta, vf1, vf2, theta, k0)
}

/// Synthesizes the map for one side with the chosen law. Single focus uses
/// the on-axis feed (mirrored for the FTA) steering to broadside.
pub fn synthesize(layout: &SystemLayout, side: Hemisphere, compensation: Compensation, k0: f64) -> Result<PhaseMap> {
    match (side, compensation) {
        (Hemisphere::Forward, Compensation::Bifocal) => synthesize_ta(layout, k0),
        (Hemisphere::Backward, Compensation::Bifocal) => synthesize_fta(layout, k0),
        (Hemisphere::Forward, Compensation::SingleFocus) => {
            single_focus_phase(&layout.ta, Point3::default(), ScanTarget::BROADSIDE, k0)
        }
        (Hemisphere::Backward, Compensation::SingleFocus) => single_focus_phase(
            &layout.fta,
            layout.mirror_about_ta(Point3::default()),
            ScanTarget::BROADSIDE,
            k0,
        ),
    }
}

/// Cell geometries realizing a phase map.
#[derive(Debug, Clone, PartialEq)]
pub struct CellMap {
    pub aperture: ApertureSpec,
    pub cells: Vec<UnitCellGeometry>,
    /// The phases the cells were chosen for.
    pub target_deg: Vec<f64>,
    /// Largest |realized - target| over the aperture, degrees.
    pub max_residual_deg: f64,
}

impl CellMap {
    pub fn get(&self, i: usize, j: usize) -> UnitCellGeometry {
        self.cells[self.aperture.index(i, j)]
    }

    /// CSV with header `i,j,x_mm,y_mm,phase_deg,param_mm,rotated`.
    pub fn write_csv(&self, mut w: impl Write) -> std::io::Result<()> {
        writeln!(w, "i,j,x_mm,y_mm,phase_deg,param_mm,rotated")?;
        for (i, j, c) in self.aperture.elements() {
            let k = self.aperture.index(i, j);
            let cell = self.cells[k];
            writeln!(
                w,
                "{i},{j},{:.3},{:.3},{:.6},{:.6},{}",
                c.x,
                c.y,
                self.target_deg[k],
                cell.parameter,
                u8::from(cell.rotated)
            )?;
        }
        Ok(())
    }
}

/// Maps every entry onto a cell of `curve`.
pub fn quantize(map: &PhaseMap, curve: &PhaseCurve, mode: LookupMode) -> CellMap {
    let results: Vec<(UnitCellGeometry, f64)> = map
        .phases_deg
        .par_iter()
        .map(|&want| {
            let cell = unitcell::lookup(curve, want, mode);
            let got = unitcell::phase_of(curve, cell).expect("lookup returns in-range cells");
            (cell, circular_diff_deg(got, want).abs())
        })
        .collect();
    let max_residual_deg = results.iter().map(|r| r.1).fold(0.0, f64::max);
    if max_residual_deg > unitcell::QUANTIZATION_WARN_DEG {
        warn!(
            "quantization residual {max_residual_deg:.2} deg exceeds {} deg",
            unitcell::QUANTIZATION_WARN_DEG
        );
    }
    CellMap {
        aperture: map.aperture.clone(),
        cells: results.into_iter().map(|r| r.0).collect(),
        target_deg: map.phases_deg.clone(),
        max_residual_deg,
    }
}
