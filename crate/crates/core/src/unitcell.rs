//! Parametric unit-cell models.
//!
//! Each cell family is described by a monotone curve of transmission phase
//! versus one geometric parameter spanning 180°. Rotating the polarization
//! conversion layer by 90° adds another 180°, so the pair (curve, rotation
//! flag) covers the full circle.
//!
//! The built-in curves are piecewise-linear through a handful of synthetic
//! knots; only their endpoints, span, monotonicity and magnitude floor are
//! meaningful. Digitized curves can be loaded from CSV instead.

use std::io::BufRead;
use std::path::Path;

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Allowed deviation of a curve's phase span from 180°.
pub const SPAN_TOLERANCE_DEG: f64 = 1.0;

/// Residual above which quantization logs a warning.
pub const QUANTIZATION_WARN_DEG: f64 = 5.0;

/// Wrap an angle in degrees into `[0, 360)`.
pub fn wrap_deg(x: f64) -> f64 {
    let r = x.rem_euclid(360.0);
    if r >= 360.0 {
        0.0
    } else {
        r
    }
}

/// Signed circular difference `a - b`, in `(-180, 180]`.
pub fn circular_diff_deg(a: f64, b: f64) -> f64 {
    let d = wrap_deg(a - b);
    if d > 180.0 {
        d - 360.0
    } else {
        d
    }
}

/// Transmission/reflection coefficients of a polarization-converting cell.
///
/// `t_co` is the converted (cross-polarized) transmission, `t_xx` the
/// unconverted transmission, `r_yx`/`r_xx` the two reflections.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScatterCoeffs {
    pub t_co: Complex64,
    pub t_xx: Complex64,
    pub r_yx: Complex64,
    pub r_xx: Complex64,
}

impl ScatterCoeffs {
    pub fn from_magnitudes(t_co: f64, t_xx: f64, r_yx: f64, r_xx: f64) -> Self {
        let c = |m: f64| Complex64::new(m, 0.0);
        ScatterCoeffs {
            t_co: c(t_co),
            t_xx: c(t_xx),
            r_yx: c(r_yx),
            r_xx: c(r_xx),
        }
    }

    pub fn total_power(&self) -> f64 {
        self.t_co.norm_sqr() + self.t_xx.norm_sqr() + self.r_yx.norm_sqr() + self.r_xx.norm_sqr()
    }

    pub fn is_passive(&self) -> bool {
        self.total_power() <= 1.0 + 1e-12
    }

    pub fn scaled(&self, c: Complex64) -> Self {
        ScatterCoeffs {
            t_co: self.t_co * c,
            t_xx: self.t_xx * c,
            r_yx: self.r_yx * c,
            r_xx: self.r_xx * c,
        }
    }
}

/// Polarization conversion rate: converted transmitted power over the total
/// scattered power.
pub fn pcr(s: &ScatterCoeffs) -> Result<f64> {
    let total = s.total_power();
    if total <= 0.0 || !total.is_finite() {
        return Err(Error::ZeroScattering);
    }
    Ok(s.t_co.norm_sqr() / total)
}

/// Band model of the TA cell's scattering, centered at 10 GHz.
///
/// Leakage terms grow linearly with the detuning from band center and
/// 1% of the power is dissipated. Over 7..13 GHz the PCR stays above 0.94.
pub fn uc1_scatter_model(freq_ghz: f64) -> ScatterCoeffs {
    let detune = (freq_ghz - 10.0).abs();
    let t_xx = 0.05 + 0.02 * detune;
    let r_yx = 0.03 + 0.03 * detune;
    let r_xx = 0.05 + 0.04 * detune;
    let loss = 0.01;
    let t_co = (1.0 - loss - t_xx * t_xx - r_yx * r_yx - r_xx * r_xx).max(0.0).sqrt();
    ScatterCoeffs::from_magnitudes(t_co, t_xx, r_yx, r_xx)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurveSample {
    pub param_mm: f64,
    pub phase_deg: f64,
    pub mag_db: f64,
}

impl CurveSample {
    pub const fn new(param_mm: f64, phase_deg: f64, mag_db: f64) -> Self {
        CurveSample {
            param_mm,
            phase_deg,
            mag_db,
        }
    }
}

/// Transmission phase and magnitude versus one geometric parameter.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseCurve {
    param_name: String,
    samples: Vec<CurveSample>,
    /// Extra phase per degree of incidence angle; zero by default.
    pub oblique_slope_deg_per_deg: f64,
}

impl PhaseCurve {
    /// Validates and builds a curve. Parameters must be strictly increasing,
    /// phases strictly monotone with a span of 180° (±[`SPAN_TOLERANCE_DEG`]),
    /// and magnitudes passive.
    pub fn new(param_name: impl Into<String>, samples: Vec<CurveSample>) -> Result<Self> {
        if samples.len() < 2 {
            return Err(Error::InvalidCurve("need at least two samples".into()));
        }
        if samples
            .iter()
            .any(|s| !(s.param_mm.is_finite() && s.phase_deg.is_finite() && s.mag_db.is_finite()))
        {
            return Err(Error::InvalidCurve("non-finite sample".into()));
        }
        if samples.windows(2).any(|w| w[1].param_mm <= w[0].param_mm) {
            return Err(Error::InvalidCurve("parameter is not strictly increasing".into()));
        }
        let increasing = samples[1].phase_deg > samples[0].phase_deg;
        let monotone = samples.windows(2).all(|w| {
            if increasing {
                w[1].phase_deg > w[0].phase_deg
            } else {
                w[1].phase_deg < w[0].phase_deg
            }
        });
        if !monotone {
            return Err(Error::InvalidCurve("phase is not strictly monotone".into()));
        }
        let span = (samples[samples.len() - 1].phase_deg - samples[0].phase_deg).abs();
        if (span - 180.0).abs() > SPAN_TOLERANCE_DEG {
            return Err(Error::InvalidCurve(format!(
                "phase span is {span:.3} deg, expected 180 deg"
            )));
        }
        if let Some(s) = samples.iter().find(|s| s.mag_db > 1e-9) {
            return Err(Error::InvalidCurve(format!(
                "magnitude {} dB at {} mm exceeds 0 dB",
                s.mag_db, s.param_mm
            )));
        }
        Ok(PhaseCurve {
            param_name: param_name.into(),
            samples,
            oblique_slope_deg_per_deg: 0.0,
        })
    }

    /// TA cell: arrow length `L` from 0.5 to 4.6 mm, lossless.
    pub fn uc1_default() -> Self {
        let knots = [
            (0.5, 0.0),
            (1.0, 12.0),
            (1.8, 40.0),
            (2.6, 85.0),
            (3.4, 135.0),
            (4.0, 165.0),
            (4.6, 180.0),
        ];
        let samples = knots.iter().map(|&(p, ph)| CurveSample::new(p, ph, 0.0)).collect();
        PhaseCurve::new("L", samples).expect("built-in UC1 curve is valid")
    }

    /// FTA cell: width `W` from 1.5 to 4.0 mm, worst magnitude -1.1 dB.
    pub fn uc2_default() -> Self {
        let knots = [
            (1.5, 0.0, -0.4),
            (2.0, 25.0, -0.7),
            (2.5, 65.0, -1.1),
            (3.0, 115.0, -0.9),
            (3.5, 155.0, -0.6),
            (4.0, 180.0, -0.3),
        ];
        let samples = knots.iter().map(|&(p, ph, m)| CurveSample::new(p, ph, m)).collect();
        PhaseCurve::new("W", samples).expect("built-in UC2 curve is valid")
    }

    /// Reads `param_mm,phase_deg,mag_db` CSV.
    pub fn from_csv_reader(param_name: &str, reader: impl BufRead, origin: &Path) -> Result<Self> {
        let fmt_err = |msg: String| Error::FileFormat {
            path: origin.to_path_buf(),
            msg,
        };
        let mut lines = reader.lines().enumerate();
        let header = loop {
            match lines.next() {
                Some((_, line)) => {
                    let line = line.map_err(|e| Error::io(origin, e))?;
                    if !line.trim().is_empty() {
                        break line;
                    }
                }
                None => return Err(fmt_err("empty curve file".into())),
            }
        };
        let cols: Vec<_> = header.split(',').map(str::trim).collect();
        if cols != ["param_mm", "phase_deg", "mag_db"] {
            return Err(fmt_err(format!(
                "expected header 'param_mm,phase_deg,mag_db', found '{header}'"
            )));
        }
        let mut samples = Vec::new();
        for (n, line) in lines {
            let line = line.map_err(|e| Error::io(origin, e))?;
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let vals: std::result::Result<Vec<f64>, _> = line.split(',').map(|v| v.trim().parse::<f64>()).collect();
            match vals.as_deref() {
                Ok([p, ph, m]) => samples.push(CurveSample::new(*p, *ph, *m)),
                _ => return Err(fmt_err(format!("line {}: expected three numbers", n + 1))),
            }
        }
        PhaseCurve::new(param_name, samples).map_err(|e| fmt_err(e.to_string()))
    }

    pub fn from_csv_path(param_name: &str, path: &Path) -> Result<Self> {
        let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        Self::from_csv_reader(param_name, std::io::BufReader::new(file), path)
    }

    pub fn param_name(&self) -> &str {
        &self.param_name
    }

    pub fn samples(&self) -> &[CurveSample] {
        &self.samples
    }

    pub fn param_range(&self) -> (f64, f64) {
        (self.samples[0].param_mm, self.samples[self.samples.len() - 1].param_mm)
    }

    /// Signed phase span, last sample minus first.
    pub fn span_deg(&self) -> f64 {
        self.samples[self.samples.len() - 1].phase_deg - self.samples[0].phase_deg
    }

    /// The same curve with every phase offset by `offset_deg`.
    pub fn shifted(&self, offset_deg: f64) -> Self {
        let mut out = self.clone();
        for s in &mut out.samples {
            s.phase_deg += offset_deg;
        }
        out
    }

    fn check_param(&self, p: f64) -> Result<()> {
        let (min, max) = self.param_range();
        if p.is_finite() && p >= min && p <= max {
            Ok(())
        } else {
            Err(Error::ParameterOutOfRange { value: p, min, max })
        }
    }

    fn segment(&self, p: f64) -> (&CurveSample, &CurveSample) {
        let k = self
            .samples
            .partition_point(|s| s.param_mm <= p)
            .clamp(1, self.samples.len() - 1);
        (&self.samples[k - 1], &self.samples[k])
    }

    /// Unwrapped, unrotated phase at `p`.
    pub fn phase_at_param(&self, p: f64) -> Result<f64> {
        self.check_param(p)?;
        let (a, b) = self.segment(p);
        let t = (p - a.param_mm) / (b.param_mm - a.param_mm);
        Ok(a.phase_deg + t * (b.phase_deg - a.phase_deg))
    }

    pub fn magnitude_at_param(&self, p: f64) -> Result<f64> {
        self.check_param(p)?;
        let (a, b) = self.segment(p);
        let t = (p - a.param_mm) / (b.param_mm - a.param_mm);
        Ok(a.mag_db + t * (b.mag_db - a.mag_db))
    }

    /// Parameter realizing the unwrapped phase `target`, which must lie
    /// within the curve's phase range.
    fn invert(&self, target: f64) -> f64 {
        let seg = self.samples.windows(2).find(|w| {
            let (lo, hi) = minmax(w[0].phase_deg, w[1].phase_deg);
            target >= lo && target <= hi
        });
        match seg {
            Some(w) => {
                let t = (target - w[0].phase_deg) / (w[1].phase_deg - w[0].phase_deg);
                (w[0].param_mm + t * (w[1].param_mm - w[0].param_mm)).clamp(w[0].param_mm, w[1].param_mm)
            }
            // Rounding pushed the target just past an end.
            None => {
                let first = self.samples[0];
                let last = self.samples[self.samples.len() - 1];
                if (target - first.phase_deg).abs() <= (target - last.phase_deg).abs() {
                    first.param_mm
                } else {
                    last.param_mm
                }
            }
        }
    }
}

fn minmax(a: f64, b: f64) -> (f64, f64) {
    if a <= b {
        (a, b)
    } else {
        (b, a)
    }
}

/// One realized cell: parameter value and whether the conversion layer is
/// rotated by 90°.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UnitCellGeometry {
    pub parameter: f64,
    pub rotated: bool,
}

/// Realized transmission phase in `[0, 360)` at normal incidence.
pub fn phase_of(curve: &PhaseCurve, cell: UnitCellGeometry) -> Result<f64> {
    let base = curve.phase_at_param(cell.parameter)?;
    Ok(wrap_deg(if cell.rotated { base + 180.0 } else { base }))
}

/// [`phase_of`] plus the curve's linear oblique-incidence deviation.
pub fn phase_at_incidence(curve: &PhaseCurve, cell: UnitCellGeometry, incidence_deg: f64) -> Result<f64> {
    let p = phase_of(curve, cell)?;
    if curve.oblique_slope_deg_per_deg == 0.0 {
        Ok(p)
    } else {
        Ok(wrap_deg(p + curve.oblique_slope_deg_per_deg * incidence_deg))
    }
}

pub fn magnitude_of(curve: &PhaseCurve, cell: UnitCellGeometry) -> Result<f64> {
    curve.magnitude_at_param(cell.parameter)
}

/// Continuous inverse lookup. Phases within 180° of the curve start (in the
/// curve's direction) use the bare curve, the other half the rotated cell.
/// If the span falls short of 180°, targets in the gap snap to the nearest
/// realizable end.
pub fn lookup_geometry(curve: &PhaseCurve, desired_deg: f64) -> UnitCellGeometry {
    let first = curve.samples[0];
    let span = curve.span_deg();
    let dir = span.signum();
    let reach = span.abs();
    let (pmin, pmax) = curve.param_range();
    let delta = wrap_deg(dir * (desired_deg - first.phase_deg));

    let on_curve = |offset: f64, rotated: bool| UnitCellGeometry {
        parameter: curve.invert(first.phase_deg + dir * offset),
        rotated,
    };

    if delta < 180.0 {
        if delta <= reach {
            on_curve(delta, false)
        } else if delta - reach <= 180.0 - delta {
            UnitCellGeometry {
                parameter: pmax,
                rotated: false,
            }
        } else {
            UnitCellGeometry {
                parameter: pmin,
                rotated: true,
            }
        }
    } else {
        let offset = delta - 180.0;
        if offset <= reach {
            on_curve(offset, true)
        } else if offset - reach <= 360.0 - delta {
            UnitCellGeometry {
                parameter: pmax,
                rotated: true,
            }
        } else {
            UnitCellGeometry {
                parameter: pmin,
                rotated: false,
            }
        }
    }
}

/// Nearest cell among the curve's own samples (and their rotated twins).
pub fn lookup_discrete(curve: &PhaseCurve, desired_deg: f64) -> UnitCellGeometry {
    let mut best = UnitCellGeometry {
        parameter: curve.samples[0].param_mm,
        rotated: false,
    };
    let mut best_err = f64::INFINITY;
    for rotated in [false, true] {
        for s in &curve.samples {
            let ph = s.phase_deg + if rotated { 180.0 } else { 0.0 };
            let err = circular_diff_deg(ph, desired_deg).abs();
            if err < best_err {
                best_err = err;
                best = UnitCellGeometry {
                    parameter: s.param_mm,
                    rotated,
                };
            }
        }
    }
    best
}

/// How desired phases are mapped onto cells.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum LookupMode {
    /// Interpolate the curve (exact inverse).
    #[default]
    Continuous,
    /// Snap to the nearest tabulated sample.
    Discrete,
}

impl std::str::FromStr for LookupMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "continuous" => Ok(LookupMode::Continuous),
            "discrete" => Ok(LookupMode::Discrete),
            o => Err(Error::Config(format!("unknown lookup mode '{o}'"))),
        }
    }
}

pub fn lookup(curve: &PhaseCurve, desired_deg: f64, mode: LookupMode) -> UnitCellGeometry {
    match mode {
        LookupMode::Continuous => lookup_geometry(curve, desired_deg),
        LookupMode::Discrete => lookup_discrete(curve, desired_deg),
    }
}

/// Phase curves keyed by frequency. Lookups pick the nearest stored entry.
#[derive(Debug, Clone, PartialEq)]
pub struct CurveLibrary {
    entries: Vec<(f64, PhaseCurve)>,
}

/// Frequencies of the built-in library, GHz.
pub const BUILTIN_FREQUENCIES_GHZ: [f64; 3] = [9.0, 9.75, 10.5];
/// Design frequency of the built-in curves.
pub const DESIGN_FREQUENCY_GHZ: f64 = 9.75;
/// Parallel shift of the built-in curves with frequency.
pub const BUILTIN_SHIFT_DEG_PER_GHZ: f64 = -20.0;

impl CurveLibrary {
    pub fn single(curve: PhaseCurve) -> Self {
        CurveLibrary {
            entries: vec![(DESIGN_FREQUENCY_GHZ, curve)],
        }
    }

    pub fn new(mut entries: Vec<(f64, PhaseCurve)>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::InvalidCurve("empty curve library".into()));
        }
        entries.sort_by(|a, b| a.0.total_cmp(&b.0));
        Ok(CurveLibrary { entries })
    }

    /// Parallel-shifted copies of `base` at the built-in frequencies.
    pub fn parallel(base: &PhaseCurve) -> Self {
        let entries = BUILTIN_FREQUENCIES_GHZ
            .iter()
            .map(|&f| (f, base.shifted(BUILTIN_SHIFT_DEG_PER_GHZ * (f - DESIGN_FREQUENCY_GHZ))))
            .collect();
        CurveLibrary { entries }
    }

    pub fn uc1_builtin() -> Self {
        Self::parallel(&PhaseCurve::uc1_default())
    }

    pub fn uc2_builtin() -> Self {
        Self::parallel(&PhaseCurve::uc2_default())
    }

    pub fn at(&self, freq_ghz: f64) -> &PhaseCurve {
        let mut best = &self.entries[0];
        for e in &self.entries[1..] {
            if (e.0 - freq_ghz).abs() < (best.0 - freq_ghz).abs() {
                best = e;
            }
        }
        &best.1
    }

    pub fn frequencies(&self) -> impl Iterator<Item = f64> + '_ {
        self.entries.iter().map(|e| e.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn pcr_examples() {
        let perfect = ScatterCoeffs::from_magnitudes(1.0, 0.0, 0.0, 0.0);
        assert_eq!(pcr(&perfect).unwrap(), 1.0);
        let derived = ScatterCoeffs::from_magnitudes(0.98, 0.1, 0.1, 0.15);
        // 0.9604 / (0.9604 + 0.01 + 0.01 + 0.0225)
        assert!((pcr(&derived).unwrap() - 0.9604 / 1.0029).abs() < 1e-15);
        assert!((pcr(&derived).unwrap() - 0.9576).abs() < 5e-5);
        let equal = ScatterCoeffs::from_magnitudes(0.3, 0.3, 0.3, 0.3);
        assert_eq!(pcr(&equal).unwrap(), 0.25);
        let zero = ScatterCoeffs::from_magnitudes(0.0, 0.0, 0.0, 0.0);
        assert!(matches!(pcr(&zero), Err(Error::ZeroScattering)));
    }

    #[test]
    fn uc1_band_model_meets_pcr_floor() {
        for k in 0..=600 {
            let f = 7.0 + k as f64 * 0.01;
            let s = uc1_scatter_model(f);
            assert!(s.is_passive());
            assert!(pcr(&s).unwrap() >= 0.928, "PCR at {f} GHz");
        }
    }

    #[test]
    fn default_curves_span_and_endpoints() {
        let uc1 = PhaseCurve::uc1_default();
        assert_eq!(uc1.param_range(), (0.5, 4.6));
        assert_eq!(uc1.span_deg(), 180.0);
        let uc2 = PhaseCurve::uc2_default();
        assert_eq!(uc2.param_range(), (1.5, 4.0));
        assert_eq!(uc2.span_deg(), 180.0);
        assert_eq!(uc1.phase_at_param(0.5).unwrap(), 0.0);
    }

    #[test]
    fn rotation_adds_half_turn() {
        let c = PhaseCurve::uc1_default();
        for p in [0.5, 1.3, 2.4, 4.6] {
            let a = phase_of(
                &c,
                UnitCellGeometry {
                    parameter: p,
                    rotated: false,
                },
            )
            .unwrap();
            let b = phase_of(
                &c,
                UnitCellGeometry {
                    parameter: p,
                    rotated: true,
                },
            )
            .unwrap();
            assert!((circular_diff_deg(b, a).abs() - 180.0).abs() < 1e-12);
        }
    }

    #[test]
    fn two_sample_midpoint() {
        let c = PhaseCurve::new(
            "p",
            vec![CurveSample::new(1.0, 10.0, 0.0), CurveSample::new(3.0, 190.0, -1.0)],
        )
        .unwrap();
        let g = UnitCellGeometry {
            parameter: 2.0,
            rotated: false,
        };
        assert_eq!(phase_of(&c, g).unwrap(), 100.0);
        assert_eq!(magnitude_of(&c, g).unwrap(), -0.5);
    }

    #[test]
    fn out_of_range_parameter() {
        let c = PhaseCurve::uc1_default();
        let g = UnitCellGeometry {
            parameter: 4.7,
            rotated: false,
        };
        assert!(matches!(phase_of(&c, g), Err(Error::ParameterOutOfRange { .. })));
        assert!(magnitude_of(&c, g).is_err());
    }

    #[test]
    fn lookup_endpoints() {
        let c = PhaseCurve::uc2_default();
        assert_eq!(
            lookup_geometry(&c, 0.0),
            UnitCellGeometry {
                parameter: 1.5,
                rotated: false
            }
        );
        assert_eq!(
            lookup_geometry(&c, 180.0),
            UnitCellGeometry {
                parameter: 1.5,
                rotated: true
            }
        );
    }

    #[test]
    fn lookup_round_trip_64() {
        for c in [PhaseCurve::uc1_default(), PhaseCurve::uc2_default()] {
            for k in 0..64 {
                let want = k as f64 * 360.0 / 64.0;
                let got = phase_of(&c, lookup_geometry(&c, want)).unwrap();
                assert!(circular_diff_deg(got, want).abs() <= 1e-6, "{want} -> {got}");
            }
        }
    }

    #[test]
    fn decreasing_curve_round_trip() {
        let c = PhaseCurve::new(
            "p",
            vec![
                CurveSample::new(0.0, 300.0, 0.0),
                CurveSample::new(1.0, 200.0, 0.0),
                CurveSample::new(2.0, 120.0, 0.0),
            ],
        )
        .unwrap();
        for k in 0..360 {
            let want = k as f64 + 0.5;
            let got = phase_of(&c, lookup_geometry(&c, want)).unwrap();
            assert!(circular_diff_deg(got, want).abs() <= 1e-9);
        }
    }

    #[test]
    fn short_span_snaps_to_nearest_end() {
        let c = PhaseCurve::new(
            "p",
            vec![CurveSample::new(0.0, 0.0, 0.0), CurveSample::new(1.0, 179.5, 0.0)],
        )
        .unwrap();
        let g = lookup_geometry(&c, 179.8);
        assert!(circular_diff_deg(phase_of(&c, g).unwrap(), 179.8).abs() <= 0.25 + 1e-12);
        let g = lookup_geometry(&c, 359.9);
        assert!(circular_diff_deg(phase_of(&c, g).unwrap(), 359.9).abs() <= 0.5);
    }

    #[test]
    fn discrete_lookup_residual_bound() {
        let c = PhaseCurve::new(
            "p",
            vec![CurveSample::new(0.0, 0.0, 0.0), CurveSample::new(1.0, 180.0, 0.0)],
        )
        .unwrap();
        for k in 0..720 {
            let want = k as f64 * 0.5;
            let got = phase_of(&c, lookup_discrete(&c, want)).unwrap();
            // Local step is 180 deg between the two samples.
            assert!(circular_diff_deg(got, want).abs() <= 90.0 + 1e-12);
        }
    }

    #[test]
    fn rejects_bad_curves() {
        let mk = |v: &[(f64, f64, f64)]| {
            PhaseCurve::new("p", v.iter().map(|&(a, b, c)| CurveSample::new(a, b, c)).collect())
        };
        assert!(mk(&[(0.0, 0.0, 0.0)]).is_err());
        assert!(mk(&[(0.0, 0.0, 0.0), (1.0, 100.0, 0.0), (2.0, 90.0, 0.0), (3.0, 180.0, 0.0)]).is_err());
        assert!(mk(&[(0.0, 0.0, 0.0), (0.0, 180.0, 0.0)]).is_err());
        assert!(mk(&[(0.0, 0.0, 0.0), (1.0, 150.0, 0.0)]).is_err());
        assert!(mk(&[(0.0, 0.0, 0.5), (1.0, 180.0, 0.0)]).is_err());
    }

    #[test]
    fn csv_round_trip() {
        let text = "param_mm,phase_deg,mag_db\n0.5,0,0\n2.0,90,-0.5\n4.0,180,-1\n";
        let c = PhaseCurve::from_csv_reader("L", text.as_bytes(), Path::new("mem.csv")).unwrap();
        assert_eq!(c.samples().len(), 3);
        assert_eq!(c.param_name(), "L");
        let bad = "param,phase\n1,2\n";
        assert!(matches!(
            PhaseCurve::from_csv_reader("L", bad.as_bytes(), Path::new("bad.csv")),
            Err(Error::FileFormat { .. })
        ));
    }

    #[test]
    fn library_picks_nearest() {
        let lib = CurveLibrary::uc1_builtin();
        assert_eq!(lib.at(9.75), &PhaseCurve::uc1_default());
        let low = lib.at(9.1);
        assert_eq!(low.samples()[0].phase_deg, 15.0);
        let delta = low.samples()[3].phase_deg - lib.at(10.5).samples()[3].phase_deg;
        assert_eq!(delta, 30.0);
    }

    #[test]
    fn uc_magnitudes() {
        let uc1 = PhaseCurve::uc1_default();
        let uc2 = PhaseCurve::uc2_default();
        for k in 0..=100 {
            let p1 = 0.5 + 4.1 * k as f64 / 100.0;
            let p2 = 1.5 + 2.5 * k as f64 / 100.0;
            for rotated in [false, true] {
                assert_eq!(
                    magnitude_of(&uc1, UnitCellGeometry { parameter: p1, rotated }).unwrap(),
                    0.0
                );
                assert!(magnitude_of(&uc2, UnitCellGeometry { parameter: p2, rotated }).unwrap() >= -1.1);
            }
        }
        let worst = magnitude_of(
            &uc2,
            UnitCellGeometry {
                parameter: 2.5,
                rotated: false,
            },
        )
        .unwrap();
        assert_eq!(worst, -1.1);
    }

    proptest! {
        #[test]
        fn pcr_scale_invariant(
            m in proptest::array::uniform4(0.01..1.0f64),
            re in -3.0..3.0f64, im in -3.0..3.0f64,
        ) {
            prop_assume!(re.abs() + im.abs() > 1e-3);
            let s = ScatterCoeffs::from_magnitudes(m[0], m[1], m[2], m[3]);
            let a = pcr(&s).unwrap();
            let b = pcr(&s.scaled(Complex64::new(re, im))).unwrap();
            prop_assert!((a - b).abs() < 1e-12);
        }

        #[test]
        fn lookup_inverts_phase_of(p in 0.5..4.6f64, rotated in any::<bool>()) {
            let c = PhaseCurve::uc1_default();
            let g = UnitCellGeometry { parameter: p, rotated };
            let ph = phase_of(&c, g).unwrap();
            let back = lookup_geometry(&c, ph);
            let ph2 = phase_of(&c, back).unwrap();
            prop_assert!(circular_diff_deg(ph, ph2).abs() < 1e-9);
            // Same cell, or its rotated twin at the seam.
            if back.rotated == rotated {
                prop_assert!((back.parameter - p).abs() < 1e-9);
            }
        }
    }
}
