//! Aperture illumination, far-field superposition and beam metrics.

mod metrics;
mod radiate;
mod scenario;

pub use metrics::{extract_metrics, BeamMetrics, MetricsOptions};
pub use radiate::{
    directivity, radiate, radiate_cut, radiate_directions, radiated_power, Directivity, PatternCut, PatternGrid,
};
pub use scenario::{run_scenario, Beam, ScenarioResult, SimulationConfig, Simulator};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::feed::{incident_field, off_axis_angle_deg, FeedExcitation};
use crate::geometry::{mirror_feed, ApertureSpec, FeedPlacement, Hemisphere, Point3, SystemLayout};
use crate::polarization::{
    grid_reflect_with_phase, grid_transmit, rotate_pol_90, route, JonesVector, DEFAULT_REFLECTION_PHASE_DEG,
    FTA_INNER_GRID, TA_INNER_GRID,
};
use crate::synthesis::CellMap;
use crate::unitcell::{magnitude_of, phase_at_incidence, PhaseCurve};

/// Outgoing field just past each cell. `ey` is co-polar, `ex` cross-polar.
#[derive(Debug, Clone, PartialEq)]
pub struct ApertureField {
    pub aperture: ApertureSpec,
    pub fields: Vec<JonesVector>,
}

impl ApertureField {
    pub fn scaled(&self, c: Complex64) -> Self {
        ApertureField {
            aperture: self.aperture.clone(),
            fields: self.fields.iter().map(|v| *v * c).collect(),
        }
    }
}

/// Rectangular shadow of the feed board on the FTA, centered on the axis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlockageMask {
    pub half_x_mm: f64,
    pub half_y_mm: f64,
}

impl BlockageMask {
    pub fn covers(&self, p: Point3) -> bool {
        p.x.abs() <= self.half_x_mm && p.y.abs() <= self.half_y_mm
    }
}

impl Default for BlockageMask {
    fn default() -> Self {
        // seven feeds across +/-160 mm plus patch margins
        BlockageMask {
            half_x_mm: 180.0,
            half_y_mm: 20.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IlluminationOptions {
    pub reflection_phase_deg: f64,
    /// Unconverted cell transmission |T_xx|, radiated cross-polarized and
    /// without compensation phase.
    pub cell_leakage: f64,
    pub blockage: Option<BlockageMask>,
}

impl Default for IlluminationOptions {
    fn default() -> Self {
        IlluminationOptions {
            reflection_phase_deg: DEFAULT_REFLECTION_PHASE_DEG,
            cell_leakage: 0.0,
            blockage: None,
        }
    }
}

/// The phase center and pointing of the source that illuminates `side`.
pub fn effective_source(
    layout: &SystemLayout,
    feed: &FeedPlacement,
    excitation: &FeedExcitation,
    side: Hemisphere,
) -> Result<FeedExcitation> {
    let mut src = excitation.clone();
    src.position = feed.position;
    src.boresight = Hemisphere::Forward;
    if side == Hemisphere::Backward {
        src.position = mirror_feed(layout, feed)?;
        src.boresight = Hemisphere::Backward;
    }
    Ok(src)
}

/// Field leaving the TA (forward) or FTA (backward) cells for one feed.
///
/// The feed amplitude split between the two sides comes out of the grid
/// projections: a 45° feed puts `1/sqrt(2)` on each.
#[allow(clippy::too_many_arguments)]
pub fn illuminate(
    layout: &SystemLayout,
    feed: &FeedPlacement,
    excitation: &FeedExcitation,
    side: Hemisphere,
    cells: &CellMap,
    curve: &PhaseCurve,
    k0: f64,
    options: &IlluminationOptions,
) -> Result<ApertureField> {
    if !route(excitation.state).is_active(side) {
        return Err(Error::InactiveSide {
            state: excitation.state.state_name(),
            side: side_name(side),
        });
    }
    let aperture = match side {
        Hemisphere::Forward => &layout.ta,
        Hemisphere::Backward => &layout.fta,
    };
    if &cells.aperture != aperture {
        return Err(Error::InvalidAperture(format!(
            "cell map does not match the {} aperture",
            side_name(side)
        )));
    }
    let src = effective_source(layout, feed, excitation, side)?;
    let mut fields = Vec::with_capacity(aperture.len());
    for (i, j, c) in aperture.elements() {
        let (amp, pol) = incident_field(&src, c, k0)?;
        let incident = pol * amp;
        let cell = cells.get(i, j);
        let incidence = off_axis_angle_deg(src.position, src.boresight, c);
        let phase = phase_at_incidence(curve, cell, incidence)?;
        let mag = 10f64.powf(magnitude_of(curve, cell)? / 20.0);
        let t = Complex64::from_polar(mag, phase.to_radians());
        let out = match side {
            Hemisphere::Forward => {
                let v = grid_transmit(incident, TA_INNER_GRID);
                rotate_pol_90(v) * t + v * options.cell_leakage
            }
            Hemisphere::Backward => {
                let v = grid_reflect_with_phase(incident, TA_INNER_GRID, options.reflection_phase_deg);
                let v = grid_transmit(v, FTA_INNER_GRID);
                let once = rotate_pol_90(v);
                let blocked = options.blockage.is_some_and(|m| m.covers(c));
                if blocked {
                    JonesVector::default()
                } else {
                    rotate_pol_90(once) * t + once * options.cell_leakage
                }
            }
        };
        fields.push(out);
    }
    Ok(ApertureField {
        aperture: aperture.clone(),
        fields,
    })
}

pub(crate) fn side_name(side: Hemisphere) -> &'static str {
    match side {
        Hemisphere::Forward => "TA",
        Hemisphere::Backward => "FTA",
    }
}
