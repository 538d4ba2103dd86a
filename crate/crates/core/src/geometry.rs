//! Coordinate frame, aperture grids and the folded focal relations.
//!
//! The feed plane sits at `z = 0`, the transmitarray (TA) aperture at
//! `z = +f` and the folded transmitarray (FTA) aperture at `z = -h`. Waves
//! reflected by the TA grid reach the FTA as if radiated from the image of
//! the feed about the TA plane, so the folded focal length is `F = 2f + h`.

use std::fmt;

use crate::error::{ensure_positive, Error, Result};
use crate::polarization::PolarizationState;

/// Tolerance used when comparing lengths in millimeters.
pub const LENGTH_EPS_MM: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Point3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Point3 {
    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Point3 { x, y, z }
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }
}

impl fmt::Display for Point3 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}, {})", self.x, self.y, self.z)
    }
}

/// Euclidean distance in millimeters.
pub fn path_length(a: Point3, b: Point3) -> f64 {
    let (dx, dy, dz) = (b.x - a.x, b.y - a.y, b.z - a.z);
    (dx * dx + dy * dy + dz * dz).sqrt()
}

/// Which way an aperture radiates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Hemisphere {
    /// Toward +z.
    Forward,
    /// Toward -z.
    Backward,
}

impl Hemisphere {
    pub fn sign(self) -> f64 {
        match self {
            Hemisphere::Forward => 1.0,
            Hemisphere::Backward => -1.0,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Hemisphere::Forward => "forward",
            Hemisphere::Backward => "backward",
        }
    }
}

impl fmt::Display for Hemisphere {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// A planar rectangular grid of unit cells centered on the z axis.
///
/// Element `(i, j)` sits at `x_i = (i - (nx - 1)/2) * period`, and likewise
/// for `y_j`, so the grid is exactly symmetric about its center.
#[derive(Debug, Clone, PartialEq)]
pub struct ApertureSpec {
    pub plane_z: f64,
    pub size_x: f64,
    pub size_y: f64,
    pub period: f64,
    pub nx: usize,
    pub ny: usize,
    pub normal: Hemisphere,
}

impl ApertureSpec {
    pub fn new(
        plane_z: f64,
        size_x: f64,
        size_y: f64,
        period: f64,
        nx: usize,
        ny: usize,
        normal: Hemisphere,
    ) -> Result<Self> {
        ensure_positive("aperture period", period)?;
        ensure_positive("aperture size_x", size_x)?;
        ensure_positive("aperture size_y", size_y)?;
        if !plane_z.is_finite() {
            return Err(Error::InvalidAperture(format!("plane z = {plane_z}")));
        }
        if nx == 0 || ny == 0 {
            return Err(Error::InvalidAperture("element count is zero".into()));
        }
        for (n, size, axis) in [(nx, size_x, "x"), (ny, size_y, "y")] {
            if n as f64 * period > size + period / 2.0 + LENGTH_EPS_MM {
                return Err(Error::InvalidAperture(format!(
                    "{n} cells of {period} mm do not fit {size} mm along {axis}"
                )));
            }
        }
        Ok(ApertureSpec {
            plane_z,
            size_x,
            size_y,
            period,
            nx,
            ny,
            normal,
        })
    }

    /// Square aperture filled with as many whole cells as fit.
    pub fn square(plane_z: f64, size: f64, period: f64, normal: Hemisphere) -> Result<Self> {
        ensure_positive("aperture size", size)?;
        ensure_positive("aperture period", period)?;
        let n = (size / period + 1e-9).floor() as usize;
        Self::new(plane_z, size, size, period, n, n, normal)
    }

    pub fn len(&self) -> usize {
        self.nx * self.ny
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn element_x(&self, i: usize) -> f64 {
        (i as f64 - (self.nx as f64 - 1.0) / 2.0) * self.period
    }

    pub fn element_y(&self, j: usize) -> f64 {
        (j as f64 - (self.ny as f64 - 1.0) / 2.0) * self.period
    }

    pub fn element_center(&self, i: usize, j: usize) -> Point3 {
        Point3::new(self.element_x(i), self.element_y(j), self.plane_z)
    }

    /// Flat storage index; `i` (x) is the slow axis.
    #[inline]
    pub fn index(&self, i: usize, j: usize) -> usize {
        i * self.ny + j
    }

    /// Iterates `(i, j, center)` in storage order.
    pub fn elements(&self) -> impl Iterator<Item = (usize, usize, Point3)> + '_ {
        (0..self.nx).flat_map(move |i| (0..self.ny).map(move |j| (i, j, self.element_center(i, j))))
    }

    /// Physical area `size_x * size_y` in mm².
    pub fn area(&self) -> f64 {
        self.size_x * self.size_y
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FeedPlacement {
    pub id: String,
    pub position: Point3,
    pub polarization: PolarizationState,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FeedSpec {
    pub id: String,
    pub x_mm: f64,
    pub y_mm: f64,
}

impl FeedSpec {
    pub fn new(id: impl Into<String>, x_mm: f64, y_mm: f64) -> Self {
        FeedSpec {
            id: id.into(),
            x_mm,
            y_mm,
        }
    }
}

/// Inputs to [`build_layout`]. Either `h_mm` or `folded_focal_mm` (F) must
/// be given; when both are present they must satisfy `F = 2f + h`.
#[derive(Debug, Clone, PartialEq)]
pub struct LayoutConfig {
    pub f_mm: f64,
    pub h_mm: Option<f64>,
    pub folded_focal_mm: Option<f64>,
    pub d_mm: f64,
    pub ta_size_mm: f64,
    pub ta_period_mm: f64,
    pub fta_size_mm: f64,
    pub fta_period_mm: f64,
    pub feeds: Vec<FeedSpec>,
}

impl Default for LayoutConfig {
    fn default() -> Self {
        LayoutConfig {
            f_mm: 171.0,
            h_mm: None,
            folded_focal_mm: Some(384.0),
            d_mm: 220.0,
            ta_size_mm: 240.0,
            ta_period_mm: 6.0,
            fta_size_mm: 360.0,
            fta_period_mm: 10.0,
            feeds: default_feeds(),
        }
    }
}

/// Seven feeds A1..A7 along x at -160, -110, -50, 0, 50, 110, 160 mm.
pub fn default_feeds() -> Vec<FeedSpec> {
    [-160.0, -110.0, -50.0, 0.0, 50.0, 110.0, 160.0]
        .iter()
        .enumerate()
        .map(|(k, &x)| FeedSpec::new(format!("A{}", k + 1), x, 0.0))
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct SystemLayout {
    pub feed_plane_z: f64,
    pub f: f64,
    pub h: f64,
    /// Folded focal length `F = 2f + h`.
    pub folded_focal: f64,
    pub d: f64,
    pub virtual_feeds: [Point3; 2],
    pub ta: ApertureSpec,
    pub fta: ApertureSpec,
    pub feeds: Vec<FeedPlacement>,
}

impl SystemLayout {
    /// Offset angle of the virtual feeds seen from the TA center, degrees.
    pub fn offset_angle_deg(&self) -> f64 {
        (self.d / 2.0).atan2(self.f).to_degrees()
    }

    pub fn feed(&self, id: &str) -> Result<&FeedPlacement> {
        self.feeds
            .iter()
            .find(|f| f.id == id)
            .ok_or_else(|| Error::UnknownFeed(id.to_string()))
    }

    /// Image of `p` about the TA plane.
    pub fn mirror_about_ta(&self, p: Point3) -> Point3 {
        Point3::new(p.x, p.y, 2.0 * self.f - p.z)
    }

    /// The virtual feeds imaged above the TA, used for FTA synthesis.
    pub fn mirrored_virtual_feeds(&self) -> [Point3; 2] {
        self.virtual_feeds.map(|p| self.mirror_about_ta(p))
    }
}

pub fn build_layout(config: &LayoutConfig) -> Result<SystemLayout> {
    let f = ensure_positive("f", config.f_mm)?;
    let h = match (config.h_mm, config.folded_focal_mm) {
        (Some(h), Some(big_f)) => {
            let expected = 2.0 * f + h;
            if (big_f - expected).abs() > LENGTH_EPS_MM * expected.max(1.0) {
                return Err(Error::InconsistentFocal {
                    folded: big_f,
                    expected,
                });
            }
            h
        }
        (Some(h), None) => h,
        (None, Some(big_f)) => big_f - 2.0 * f,
        (None, None) => return Err(Error::Config("either h_mm or F_mm is required".into())),
    };
    if !(h.is_finite() && h >= 0.0) {
        return Err(Error::NonPositive { name: "h", value: h });
    }
    if !(config.d_mm.is_finite() && config.d_mm >= 0.0) {
        return Err(Error::NonPositive {
            name: "d",
            value: config.d_mm,
        });
    }
    let ta = ApertureSpec::square(f, config.ta_size_mm, config.ta_period_mm, Hemisphere::Forward)?;
    let fta = ApertureSpec::square(-h, config.fta_size_mm, config.fta_period_mm, Hemisphere::Backward)?;
    let half = config.d_mm / 2.0;
    let mut feeds = Vec::with_capacity(config.feeds.len());
    for spec in &config.feeds {
        if !(spec.x_mm.is_finite() && spec.y_mm.is_finite()) {
            return Err(Error::Config(format!("feed {} has non-finite coordinates", spec.id)));
        }
        if feeds.iter().any(|f: &FeedPlacement| f.id == spec.id) {
            return Err(Error::Config(format!("duplicate feed id {}", spec.id)));
        }
        feeds.push(FeedPlacement {
            id: spec.id.clone(),
            position: Point3::new(spec.x_mm, spec.y_mm, 0.0),
            polarization: PolarizationState::X,
        });
    }
    Ok(SystemLayout {
        feed_plane_z: 0.0,
        f,
        h,
        folded_focal: 2.0 * f + h,
        d: config.d_mm,
        virtual_feeds: [Point3::new(-half, 0.0, 0.0), Point3::new(half, 0.0, 0.0)],
        ta,
        fta,
        feeds,
    })
}

/// Mirror a feed about the TA plane: `z' = 2f - z`.
pub fn mirror_feed(layout: &SystemLayout, feed: &FeedPlacement) -> Result<Point3> {
    let p = feed.position;
    if (p.z - layout.feed_plane_z).abs() > LENGTH_EPS_MM {
        return Err(Error::OffFeedPlane {
            x: p.x,
            y: p.y,
            z: p.z,
            plane_z: layout.feed_plane_z,
        });
    }
    Ok(layout.mirror_about_ta(p))
}

/// Focal length giving a -10 dB edge taper at angle `alpha_deg` over an
/// aperture of lateral size `d_mm`: `f = D / (2 tan(alpha))`.
pub fn focal_from_taper(d_mm: f64, alpha_deg: f64) -> Result<f64> {
    ensure_positive("aperture size D", d_mm)?;
    if !(alpha_deg > 0.0 && alpha_deg < 90.0) {
        return Err(Error::AngleOutOfRange {
            value: alpha_deg,
            range: "(0, 90)",
        });
    }
    Ok(d_mm / (2.0 * alpha_deg.to_radians().tan()))
}

/// Inverse of [`focal_from_taper`]: the edge angle subtended by the rim.
pub fn taper_angle_from_focal(d_mm: f64, f_mm: f64) -> Result<f64> {
    ensure_positive("aperture size D", d_mm)?;
    ensure_positive("f", f_mm)?;
    Ok((d_mm / (2.0 * f_mm)).atan().to_degrees())
}
