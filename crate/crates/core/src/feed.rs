//! Idealized polarization-switchable feed: a cos^q radiator.

use num_complex::Complex64;

use crate::error::{ensure_positive, Error, Result};
use crate::geometry::{path_length, Hemisphere, Point3};
use crate::polarization::{JonesVector, PolarizationState};

/// Default taper exponent; puts the -10 dB point at 35.09°, just past the rim angle
/// (35.06°) of a 240 mm aperture at f = 171 mm.
pub const DEFAULT_Q: f64 = 5.74;
/// Informational boresight gain of the physical feed.
pub const DEFAULT_GAIN_DBI: f64 = 10.5;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FeedPattern {
    pub q: f64,
    pub boresight_gain_dbi: f64,
    pub frequency_ghz: f64,
}

impl FeedPattern {
    pub fn new(q: f64, boresight_gain_dbi: f64, frequency_ghz: f64) -> Result<Self> {
        ensure_positive("feed q", q)?;
        ensure_positive("feed frequency", frequency_ghz)?;
        Ok(FeedPattern {
            q,
            boresight_gain_dbi,
            frequency_ghz,
        })
    }
}

impl Default for FeedPattern {
    fn default() -> Self {
        FeedPattern {
            q: DEFAULT_Q,
            boresight_gain_dbi: DEFAULT_GAIN_DBI,
            frequency_ghz: crate::unitcell::DESIGN_FREQUENCY_GHZ,
        }
    }
}

/// Field amplitude `cos(angle)^q`; zero beyond 90°.
pub fn pattern_amplitude(pattern: &FeedPattern, off_axis_deg: f64) -> f64 {
    let a = off_axis_deg.abs();
    if a >= 90.0 {
        0.0
    } else {
        a.to_radians().cos().powf(pattern.q)
    }
}

/// Angle where the field pattern is 10 dB below boresight.
pub fn minus10db_angle(pattern: &FeedPattern) -> f64 {
    10f64.powf(-1.0 / (2.0 * pattern.q)).acos().to_degrees()
}

/// Exponent placing the -10 dB point at `angle_deg`.
pub fn q_for_taper_angle(angle_deg: f64) -> Result<f64> {
    if !(angle_deg > 0.0 && angle_deg < 90.0) {
        return Err(Error::AngleOutOfRange {
            value: angle_deg,
            range: "(0, 90)",
        });
    }
    Ok(-0.5 / angle_deg.to_radians().cos().log10())
}

/// One feed switched into a polarization state.
#[derive(Debug, Clone, PartialEq)]
pub struct FeedExcitation {
    /// Phase center. For the folded path this is the image above the TA.
    pub position: Point3,
    pub pattern: FeedPattern,
    pub state: PolarizationState,
    pub boresight: Hemisphere,
    /// Relative amplitude of the orthogonal polarization; 0 for an ideal feed.
    pub crosspol_leakage: f64,
}

impl FeedExcitation {
    pub fn new(position: Point3, pattern: FeedPattern, state: PolarizationState) -> Self {
        FeedExcitation {
            position,
            pattern,
            state,
            boresight: Hemisphere::Forward,
            crosspol_leakage: 0.0,
        }
    }

    fn jones(&self) -> JonesVector {
        let v = self.state.unit_vector();
        if self.crosspol_leakage == 0.0 {
            return v;
        }
        // leak into the orthogonal linear state
        let ortho = JonesVector::new(-v.ey, v.ex);
        v + ortho * self.crosspol_leakage
    }
}

/// Off-axis angle of `point` seen from `from` relative to the boresight.
pub fn off_axis_angle_deg(from: Point3, boresight: Hemisphere, point: Point3) -> f64 {
    let r = path_length(from, point);
    let cos = (boresight.sign() * (point.z - from.z) / r).clamp(-1.0, 1.0);
    cos.acos().to_degrees()
}

/// Complex amplitude and polarization arriving at `point`:
/// `cos^q(angle) * (1 mm / R) * exp(-j k0 R)` times the state's unit vector.
pub fn incident_field(excitation: &FeedExcitation, point: Point3, k0: f64) -> Result<(Complex64, JonesVector)> {
    let r = path_length(excitation.position, point);
    if r <= 0.0 || !r.is_finite() {
        return Err(Error::ZeroDistance);
    }
    let angle = off_axis_angle_deg(excitation.position, excitation.boresight, point);
    let amp = pattern_amplitude(&excitation.pattern, angle) / r;
    Ok((Complex64::from_polar(amp, -k0 * r), excitation.jones()))
}
