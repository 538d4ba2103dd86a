use std::collections::VecDeque;
use std::f64::consts::PI;

use serde::Serialize;

use super::radiate::{directivity, PatternGrid};
use crate::error::{Error, Result};
use crate::geometry::Hemisphere;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricsOptions {
    /// Area used for the aperture-efficiency reference `4πA/λ²`, mm².
    pub reference_area_mm2: f64,
    /// Loss budget added to directivity; must not be positive.
    pub gain_offset_db: f64,
    /// Fraction of the feed power routed to this hemisphere (1 unless both
    /// sides radiate).
    pub power_share: f64,
}

impl MetricsOptions {
    pub fn new(reference_area_mm2: f64) -> Self {
        MetricsOptions {
            reference_area_mm2,
            gain_offset_db: 0.0,
            power_share: 1.0,
        }
    }
}

/// Scalar summary of one beam. Levels in dB are relative to the co-polar
/// peak; `-inf` means the component is identically zero.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BeamMetrics {
    pub hemisphere: &'static str,
    pub peak_theta_deg: f64,
    pub peak_phi_deg: f64,
    pub peak_gain_dbi: f64,
    pub directivity_dbi: f64,
    pub sll_db: f64,
    pub beamwidth_3db_deg: f64,
    pub crosspol_peak_db: f64,
    pub crosspol_at_peak_db: f64,
    pub aperture_efficiency: f64,
}

impl BeamMetrics {
    /// Peak angle signed by the side of the xz plane it falls on:
    /// positive toward +x.
    pub fn signed_scan_deg(&self) -> f64 {
        if self.peak_phi_deg.to_radians().cos() < -1e-12 {
            -self.peak_theta_deg
        } else {
            self.peak_theta_deg
        }
    }
}

fn db(ratio: f64) -> f64 {
    10.0 * ratio.log10()
}

/// Cells connected to the peak by non-increasing steps, or that stay
/// within 3 dB of it: the main lobe down to its first nulls.
fn main_lobe_mask(pattern: &PatternGrid, power: &[f64], peak: usize) -> Vec<bool> {
    let (nt, np) = (pattern.n_theta(), pattern.n_phi());
    let half = power[peak] / 2.0;
    let mut inside = vec![false; power.len()];
    let mut queue = VecDeque::new();
    inside[peak] = true;
    queue.push_back(peak);
    let mut neighbors = Vec::with_capacity(8);
    while let Some(c) = queue.pop_front() {
        let (it, ip) = (c / np, c % np);
        neighbors.clear();
        if it == 0 {
            // the pole is one point shared by every phi
            for q in 0..np {
                neighbors.push(q);
                if nt > 1 {
                    neighbors.push(np + q);
                }
            }
        } else {
            neighbors.push(pattern.index(it - 1, ip));
            if it + 1 < nt {
                neighbors.push(pattern.index(it + 1, ip));
            }
            neighbors.push(pattern.index(it, (ip + 1) % np));
            neighbors.push(pattern.index(it, (ip + np - 1) % np));
        }
        for &n in &neighbors {
            if !inside[n] && (power[n] <= power[c] || power[n] >= half) {
                inside[n] = true;
                queue.push_back(n);
            }
        }
    }
    inside
}

/// Signed cut through the peak's plane: (signed theta, power).
fn principal_cut(pattern: &PatternGrid, power: &[f64], peak_phi_index: usize) -> Vec<(f64, f64)> {
    let np = pattern.n_phi();
    let opposite_phi = (pattern.phi_deg[peak_phi_index] + 180.0) % 360.0;
    let opposite = (0..np)
        .min_by(|&a, &b| {
            let da = (pattern.phi_deg[a] - opposite_phi).abs();
            let db = (pattern.phi_deg[b] - opposite_phi).abs();
            da.total_cmp(&db)
        })
        .unwrap_or(peak_phi_index);
    let nt = pattern.n_theta();
    let mut cut = Vec::with_capacity(2 * nt - 1);
    for it in (1..nt).rev() {
        cut.push((-pattern.theta_deg[it], power[pattern.index(it, opposite)]));
    }
    for it in 0..nt {
        cut.push((pattern.theta_deg[it], power[pattern.index(it, peak_phi_index)]));
    }
    cut
}

/// Width between the -3 dB crossings either side of `center` in `cut`,
/// interpolated linearly in dB. NaN if the cut never drops 3 dB.
fn beamwidth(cut: &[(f64, f64)], center: usize) -> f64 {
    let peak = cut[center].1;
    let level = db(0.5);
    let rel = |k: usize| db(cut[k].1 / peak);
    let crossing = |a: usize, b: usize| {
        let (ra, rb) = (rel(a), rel(b));
        if !rb.is_finite() {
            return cut[b].0;
        }
        let t = (ra - level) / (ra - rb);
        cut[a].0 + t * (cut[b].0 - cut[a].0)
    };
    let left = (0..center)
        .rev()
        .find(|&k| cut[k].1 < peak / 2.0)
        .map(|k| crossing(k + 1, k));
    let right = (center + 1..cut.len())
        .find(|&k| cut[k].1 < peak / 2.0)
        .map(|k| crossing(k - 1, k));
    match (left, right) {
        (Some(l), Some(r)) => r - l,
        _ => f64::NAN,
    }
}

pub fn extract_metrics(pattern: &PatternGrid, options: &MetricsOptions) -> Result<BeamMetrics> {
    let dir = directivity(pattern)?;
    let power = pattern.co_power();
    let peak = dir.peak_index;
    if power[peak] <= 0.0 {
        return Err(Error::NoMainLobe("co-polar pattern is zero".into()));
    }
    let np = pattern.n_phi();
    let (it, ip) = (peak / np, peak % np);
    if it + 1 == pattern.n_theta() {
        return Err(Error::NoMainLobe("peak lies on the horizon".into()));
    }

    let inside = main_lobe_mask(pattern, &power, peak);
    let sidelobe = power
        .iter()
        .zip(&inside)
        .filter(|(_, &m)| !m)
        .map(|(p, _)| *p)
        .fold(0.0, f64::max);
    let sll_db = db(sidelobe / power[peak]);

    let cut = principal_cut(pattern, &power, ip);
    let center = pattern.n_theta() - 1 + it;
    let beamwidth_3db_deg = beamwidth(&cut, center);

    let cross_max = pattern.e_cross.iter().map(|e| e.norm_sqr()).fold(0.0, f64::max);
    let crosspol_peak_db = db(cross_max / power[peak]);
    let crosspol_at_peak_db = db(pattern.e_cross[peak].norm_sqr() / power[peak]);

    let lambda = 2.0 * PI / crate::wavenumber(pattern.frequency_ghz);
    let reference = 4.0 * PI * options.reference_area_mm2 / (lambda * lambda);
    let directivity_dbi = dir.peak_dbi();

    Ok(BeamMetrics {
        hemisphere: pattern.hemisphere.label(),
        peak_theta_deg: pattern.theta_deg[it],
        peak_phi_deg: if it == 0 { 0.0 } else { pattern.phi_deg[ip] },
        peak_gain_dbi: directivity_dbi + db(options.power_share) + options.gain_offset_db,
        directivity_dbi,
        sll_db,
        beamwidth_3db_deg,
        crosspol_peak_db,
        crosspol_at_peak_db,
        aperture_efficiency: dir.peak_linear / reference,
    })
}

impl Default for BeamMetrics {
    fn default() -> Self {
        BeamMetrics {
            hemisphere: Hemisphere::Forward.label(),
            peak_theta_deg: f64::NAN,
            peak_phi_deg: f64::NAN,
            peak_gain_dbi: f64::NAN,
            directivity_dbi: f64::NAN,
            sll_db: f64::NAN,
            beamwidth_3db_deg: f64::NAN,
            crosspol_peak_db: f64::NAN,
            crosspol_at_peak_db: f64::NAN,
            aperture_efficiency: f64::NAN,
        }
    }
}
