//! Acceptance criteria. Each test prints one PASS/FAIL line straight to
//! stderr (bypassing the test harness capture) and then asserts.

use std::f64::consts::{FRAC_1_SQRT_2, PI};
use std::io::Write;

use num_complex::Complex64;
use proptest::prelude::*;
use proptest::strategy::ValueTree;
use proptest::test_runner::TestRunner;

use htarray::farfield::{
    directivity, illuminate, radiate, ApertureField, IlluminationOptions, SimulationConfig, Simulator,
};
use htarray::feed::{FeedExcitation, FeedPattern};
use htarray::geometry::{build_layout, ApertureSpec, Hemisphere, LayoutConfig};
use htarray::polarization::{JonesVector, PolarizationState};
use htarray::synthesis::{bifocal_phase, bifocal_unwrapped, Compensation};
use htarray::unitcell::{lookup_geometry, pcr, phase_of, uc1_scatter_model, PhaseCurve, ScatterCoeffs};

// Pinned tolerances.
const EQ4_REL_TOL: f64 = 1e-9;
const ROUNDTRIP_TOL_DEG: f64 = 1e-6;
const PCR_FLOOR: f64 = 0.928;
const RADIATE_REL_TOL: f64 = 1e-12;
const UNIFORM_DIRECTIVITY_TOL_DB: f64 = 0.15;
const POINTING_MIN_TOL_DEG: f64 = 2.0;
const REFERENCE_REPORT_DEG: f64 = 3.0;
const HTA_SPLIT_REL_TOL: f64 = 1e-12;
const BIFOCAL_MARGIN_DB: f64 = 0.2;
const BORESIGHT_SLL_MAX_DB: f64 = -10.0;
const LEAKAGE: f64 = 0.05;
const LEAKAGE_CROSSPOL_MAX_DB: f64 = -25.0;

const DESIGN_GHZ: f64 = 9.75;
const C_MM_PER_NS: f64 = 299.792458;

fn report(n: u32, name: &str, pass: bool, detail: &str) {
    let tag = if pass { "PASS" } else { "FAIL" };
    let mut err = std::io::stderr().lock();
    let _ = writeln!(err, "[acceptance] criterion {n:>2} {tag}  {name}: {detail}");
    assert!(pass, "criterion {n} ({name}) failed: {detail}");
}

fn k0(freq_ghz: f64) -> f64 {
    2.0 * PI * freq_ghz / C_MM_PER_NS
}

fn dist(a: (f64, f64, f64), b: (f64, f64, f64)) -> f64 {
    ((a.0 - b.0).powi(2) + (a.1 - b.1).powi(2) + (a.2 - b.2).powi(2)).sqrt()
}

fn default_sim(config: SimulationConfig) -> Simulator {
    Simulator::new(build_layout(&LayoutConfig::default()).unwrap(), config).unwrap()
}

#[test]
fn c01_focal_relation() {
    let l = build_layout(&LayoutConfig::default()).unwrap();
    let pass = l.f == 171.0 && l.folded_focal == 384.0 && l.h == 42.0 && l.folded_focal == 2.0 * l.f + l.h;
    report(
        1,
        "focal relation F = 2f + h",
        pass,
        &format!("f = {} mm, h = {} mm, F = {} mm", l.f, l.h, l.folded_focal),
    );
}

#[test]
fn c02_bifocal_mean_equivalence() {
    let l = build_layout(&LayoutConfig::default()).unwrap();
    let k = k0(DESIGN_GHZ);
    let [vf1, vf2] = l.virtual_feeds;
    let theta = (l.d / 2.0).atan2(l.f);
    let b = bifocal_unwrapped(&l.ta, vf1, vf2, k).unwrap();

    // independent single-focus constituents: vf1 steering toward +x, vf2 toward -x
    let p1 = (vf1.x, vf1.y, vf1.z);
    let p2 = (vf2.x, vf2.y, vf2.z);
    let mut worst = 0.0f64;
    let mut n = 0;
    for i in 0..l.ta.nx {
        for j in 0..l.ta.ny {
            let c = l.ta.element_center(i, j);
            let e = (c.x, c.y, c.z);
            let s1 = k * (dist(p1, e) - theta.sin() * c.x);
            let s2 = k * (dist(p2, e) + theta.sin() * c.x);
            let mean = (s1 + s2) / 2.0;
            worst = worst.max((b[l.ta.index(i, j)] - mean).abs() / mean.abs());
            n += 1;
        }
    }

    let reference = bifocal_phase(&l.ta, vf1, vf2, 0.0, k).unwrap();
    let theta_independent = [5.0, 17.5, 32.75, 60.0, -40.0, 89.0].iter().all(|&t| {
        let m = bifocal_phase(&l.ta, vf1, vf2, t, k).unwrap();
        m.phases_deg
            .iter()
            .zip(&reference.phases_deg)
            .all(|(a, b)| a.to_bits() == b.to_bits())
    });
    report(
        2,
        "bifocal phase equals mean of single-focus maps",
        n == 1600 && worst <= EQ4_REL_TOL && theta_independent,
        &format!("{n} cells, max rel. deviation {worst:.2e} (tol {EQ4_REL_TOL:e}), theta-independent bit-exact: {theta_independent}"),
    );
}

#[test]
fn c03_unit_cell_coverage() {
    let mut details = Vec::new();
    let mut pass = true;
    for curve in [PhaseCurve::uc1_default(), PhaseCurve::uc2_default()] {
        let mut worst = 0.0f64;
        let mut rotated = 0;
        for k in 0..360 {
            let want = k as f64;
            let cell = lookup_geometry(&curve, want);
            let got = phase_of(&curve, cell).unwrap();
            let mut d = (got - want).rem_euclid(360.0);
            if d > 180.0 {
                d -= 360.0;
            }
            worst = worst.max(d.abs());
            rotated += usize::from(cell.rotated);
        }
        pass &= worst <= ROUNDTRIP_TOL_DEG && rotated == 180;
        details.push(format!(
            "{}: max error {worst:.2e} deg, rotated {rotated}/360",
            curve.param_name()
        ));
    }
    report(3, "unit-cell 360 deg coverage", pass, &details.join("; "));
}

#[test]
fn c04_pcr() {
    let exact = |t: f64, x: f64, ry: f64, rx: f64| pcr(&ScatterCoeffs::from_magnitudes(t, x, ry, rx)).unwrap();
    let perfect = exact(1.0, 0.0, 0.0, 0.0);
    let symmetric = exact(0.3, 0.3, 0.3, 0.3);
    let derived = exact(0.98, 0.1, 0.1, 0.15);
    let oracle = 0.98f64.powi(2) / (0.98f64.powi(2) + 0.01 + 0.01 + 0.0225);
    let model: Vec<f64> = (0..=60)
        .map(|k| pcr(&uc1_scatter_model(7.0 + 0.1 * k as f64)).unwrap())
        .collect();
    let floor = model.iter().cloned().fold(f64::INFINITY, f64::min);
    let at_design = pcr(&uc1_scatter_model(DESIGN_GHZ)).unwrap();
    let pass = perfect == 1.0
        && (symmetric - 0.25).abs() < 1e-15
        && (derived - oracle).abs() < 1e-15
        && (derived - 0.9576).abs() < 5e-5
        && floor >= PCR_FLOOR;
    report(
        4,
        "polarization conversion rate",
        pass,
        &format!(
            "trivial {perfect}, symmetric {symmetric}, derived {derived:.5} (oracle {oracle:.5}); UC1 model {at_design:.4} at design, min {floor:.4} over 7-13 GHz (floor {PCR_FLOOR})"
        ),
    );
}

fn naive_pattern(field: &ApertureField, theta: &[f64], phi: &[f64], k: f64) -> Vec<(Complex64, Complex64)> {
    let ap = &field.aperture;
    let mut out = Vec::new();
    for &t in theta {
        for &p in phi {
            let (st, ct) = (t.to_radians().sin(), t.to_radians().cos());
            let (u, v) = (st * p.to_radians().cos(), st * p.to_radians().sin());
            let mut co = Complex64::new(0.0, 0.0);
            let mut cross = Complex64::new(0.0, 0.0);
            for i in 0..ap.nx {
                for j in 0..ap.ny {
                    let x = (i as f64 - (ap.nx as f64 - 1.0) / 2.0) * ap.period;
                    let y = (j as f64 - (ap.ny as f64 - 1.0) / 2.0) * ap.period;
                    let w = Complex64::from_polar(1.0, k * (x * u + y * v));
                    let f = field.fields[i * ap.ny + j];
                    co += f.ey * w;
                    cross += f.ex * w;
                }
            }
            out.push((co * ct, cross * ct));
        }
    }
    out
}

#[test]
fn c05_radiate_matches_naive_sum() {
    let unit = -1.0f64..1.0;
    let strategy = (1usize..=8, 1usize..=8, 3.0f64..15.0, 8.0f64..12.0).prop_flat_map(move |(nx, ny, p, f)| {
        let cell = (unit.clone(), unit.clone(), unit.clone(), unit.clone());
        (Just((nx, ny, p, f)), proptest::collection::vec(cell, nx * ny))
    });
    let mut runner = TestRunner::deterministic();
    let mut worst = 0.0f64;
    let mut cases = 0;
    for _ in 0..48 {
        let ((nx, ny, period, freq), values) = strategy.new_tree(&mut runner).unwrap().current();
        let ap = ApertureSpec::new(
            0.0,
            nx as f64 * period,
            ny as f64 * period,
            period,
            nx,
            ny,
            Hemisphere::Forward,
        )
        .unwrap();
        let fields = values
            .iter()
            .map(|&(a, b, c, d)| JonesVector::new(Complex64::new(a, b), Complex64::new(c, d)))
            .collect();
        let field = ApertureField { aperture: ap, fields };
        let k = k0(freq);
        let g = radiate(&field, Hemisphere::Forward, 5.0, 10.0, k).unwrap();
        let naive = naive_pattern(&field, &g.theta_deg, &g.phi_deg, k);
        let scale = naive.iter().map(|(c, x)| c.norm().max(x.norm())).fold(0.0, f64::max);
        for (idx, (c, x)) in naive.iter().enumerate() {
            worst = worst.max((g.e_co[idx] - c).norm() / scale);
            worst = worst.max((g.e_cross[idx] - x).norm() / scale);
        }
        cases += 1;
    }
    report(
        5,
        "radiate agrees with naive double-loop summation",
        worst <= RADIATE_REL_TOL,
        &format!("{cases} random apertures up to 8x8, max error {worst:.2e} of pattern peak (tol {RADIATE_REL_TOL:e})"),
    );
}

/// Exact directivity of an n x n uniform array with the cos(theta) element
/// factor, from the closed-form Dirichlet kernel on a fine grid.
fn dirichlet_directivity_dbi(n: usize, period: f64, k: f64) -> f64 {
    let af = |u: f64| {
        let a = k * period * u / 2.0;
        if a.sin().abs() < 1e-12 {
            n as f64
        } else {
            ((n as f64 * a).sin() / a.sin()).abs()
        }
    };
    let (nt, np) = (9000usize, 720usize);
    let (dt, dp) = (PI / 2.0 / nt as f64, 2.0 * PI / np as f64);
    let mut total = 0.0;
    for it in 0..=nt {
        let t = it as f64 * dt;
        let w = if it == 0 || it == nt { 0.5 } else { 1.0 };
        let mut ring = 0.0;
        for ip in 0..np {
            let p = ip as f64 * dp;
            let e = af(t.sin() * p.cos()) * af(t.sin() * p.sin()) * t.cos();
            ring += e * e;
        }
        total += w * t.sin() * dt * dp * ring;
    }
    10.0 * (4.0 * PI * (n * n) as f64 * (n * n) as f64 / total).log10()
}

#[test]
fn c06_uniform_aperture_directivity() {
    let freq = 10.0;
    let lambda = C_MM_PER_NS / freq;
    let ap = ApertureSpec::square(0.0, 240.0, 6.0, Hemisphere::Forward).unwrap();
    let field = ApertureField {
        fields: vec![JonesVector::new(Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)); ap.len()],
        aperture: ap,
    };
    let g = radiate(&field, Hemisphere::Forward, 0.25, 1.0, k0(freq)).unwrap();
    let d = directivity(&g).unwrap().peak_dbi();
    let expect = 10.0 * (4.0 * PI * 240.0 * 240.0 / (lambda * lambda)).log10();
    let exact = dirichlet_directivity_dbi(40, 6.0, k0(freq));
    let err = d - expect;
    report(
        6,
        "uniform 240x240 mm aperture directivity",
        err.abs() <= UNIFORM_DIRECTIVITY_TOL_DB && (expect - 29.06).abs() < 0.005,
        &format!(
            "{d:.3} dBi vs 4*pi*A/lambda^2 = {expect:.3} dBi (error {err:+.3} dB, tol {UNIFORM_DIRECTIVITY_TOL_DB}); \
             closed-form directivity of the same cos(theta) array {exact:.3} dBi, quadrature error {:+.4} dB",
            d - exact
        ),
    );
}

#[test]
fn c07_beam_pointing() {
    let sim = default_sim(SimulationConfig::default());
    let step = sim.config.theta_step_deg;
    let tol = POINTING_MIN_TOL_DEG.max(step);
    // prototype measurements, reported only
    let measured = |side: Hemisphere, x: f64| -> f64 {
        let table: &[(f64, f64)] = match side {
            Hemisphere::Forward => &[(0.0, 0.0), (50.0, 15.0), (110.0, 30.0), (160.0, 40.0)],
            Hemisphere::Backward => &[(0.0, 0.0), (50.0, 7.0), (110.0, 15.0), (160.0, 22.0)],
        };
        table.iter().find(|e| e.0 == x.abs()).map_or(f64::NAN, |e| e.1)
    };
    let mut lines = Vec::new();
    let mut misses = 0;
    let mut beams = 0;
    let mut far_from_measured = 0;
    for state in PolarizationState::ALL {
        for feed in sim.legal_feeds(state) {
            let r = sim.run(state, &feed.id, DESIGN_GHZ).unwrap();
            for beam in r.beams() {
                let side = beam.pattern.hemisphere;
                let focal = match side {
                    Hemisphere::Forward => sim.layout.f,
                    Hemisphere::Backward => sim.layout.folded_focal,
                };
                let x = feed.position.x;
                let predicted = (x.abs() / focal).atan().to_degrees();
                let achieved = beam.metrics.peak_theta_deg;
                // side of the beam must be opposite the feed
                let sign_ok = x == 0.0 || (beam.metrics.signed_scan_deg() * x < 0.0);
                let ok = (achieved - predicted).abs() <= tol && sign_ok;
                let m = measured(side, x);
                if (achieved - m).abs() > REFERENCE_REPORT_DEG {
                    far_from_measured += 1;
                }
                beams += 1;
                if !ok {
                    misses += 1;
                }
                lines.push(format!(
                    "{} {} {}: {achieved:.2} vs {predicted:.2} deg{}",
                    state.state_name(),
                    feed.id,
                    side.label(),
                    if ok { "" } else { " MISS" }
                ));
            }
        }
    }
    let mut err = std::io::stderr().lock();
    for l in &lines {
        let _ = writeln!(err, "[acceptance]     {l}");
    }
    drop(err);
    report(
        7,
        "beam pointing vs atan(x/f), atan(x/F)",
        beams == 26 && misses == 0,
        &format!(
            "{beams} beams at {DESIGN_GHZ} GHz, {misses} outside {tol} deg; {far_from_measured} more than {REFERENCE_REPORT_DEG} deg from prototype measurements"
        ),
    );
}

#[test]
fn c08_hta_linearity_split() {
    let layout = build_layout(&LayoutConfig::default()).unwrap();
    let sim = default_sim(SimulationConfig::default());
    let k = k0(DESIGN_GHZ);
    let mut worst = 0.0f64;
    let mut worst_directivity = 0.0f64;
    let mut fields = 0;
    for feed in &layout.feeds {
        for (pure, side) in [
            (PolarizationState::X, Hemisphere::Forward),
            (PolarizationState::Y, Hemisphere::Backward),
        ] {
            let curve = sim.curve(side, DESIGN_GHZ);
            let field = |state| {
                let exc = FeedExcitation::new(feed.position, FeedPattern::default(), state);
                illuminate(
                    &layout,
                    feed,
                    &exc,
                    side,
                    sim.cells(side),
                    curve,
                    k,
                    &IlluminationOptions::default(),
                )
                .unwrap()
            };
            let a = field(pure);
            let b = field(PolarizationState::Slant45);
            let norm = a.fields.iter().map(|v| v.norm()).fold(0.0, f64::max);
            for (u, s) in a.fields.iter().zip(&b.fields) {
                let d = ((u.ey * FRAC_1_SQRT_2 - s.ey).norm() + (u.ex * FRAC_1_SQRT_2 - s.ex).norm()) / norm;
                worst = worst.max(d);
            }
            let da = directivity(&radiate(&a, side, 1.0, 4.0, k).unwrap())
                .unwrap()
                .peak_dbi();
            let db = directivity(&radiate(&b, side, 1.0, 4.0, k).unwrap())
                .unwrap()
                .peak_dbi();
            worst_directivity = worst_directivity.max((da - db).abs());
            fields += 1;
        }
    }
    report(
        8,
        "HTA fields are 1/sqrt(2) of unidirectional fields",
        fields == 14 && worst <= HTA_SPLIT_REL_TOL && worst_directivity <= 1e-9,
        &format!("{fields} feed/side pairs, max rel. deviation {worst:.2e} (tol {HTA_SPLIT_REL_TOL:e}), directivity difference {worst_directivity:.1e} dB"),
    );
}

fn edge_scan_loss(compensation: Compensation) -> f64 {
    let sim = default_sim(SimulationConfig {
        compensation,
        ..SimulationConfig::default()
    });
    let d = |id: &str| {
        sim.run(PolarizationState::X, id, DESIGN_GHZ)
            .unwrap()
            .forward
            .unwrap()
            .metrics
            .directivity_dbi
    };
    let center = d("A4");
    // worse of the two edge feeds
    (center - d("A2")).max(center - d("A6"))
}

#[test]
fn c09_bifocal_benefit() {
    let bifocal = edge_scan_loss(Compensation::Bifocal);
    let single = edge_scan_loss(Compensation::SingleFocus);
    report(
        9,
        "bifocal edge scan loss below single focus",
        bifocal < single - BIFOCAL_MARGIN_DB,
        &format!("+/-110 mm TA scan loss: bifocal {bifocal:.3} dB, single focus {single:.3} dB (margin required {BIFOCAL_MARGIN_DB} dB)"),
    );
}

#[test]
fn c10_boresight_sll() {
    let sim = default_sim(SimulationConfig::default());
    let m = sim
        .run(PolarizationState::X, "A4", DESIGN_GHZ)
        .unwrap()
        .forward
        .unwrap()
        .metrics;
    report(
        10,
        "boresight TA sidelobe level",
        m.sll_db <= BORESIGHT_SLL_MAX_DB,
        &format!(
            "SLL {:.2} dB (limit {BORESIGHT_SLL_MAX_DB} dB), peak theta {}",
            m.sll_db, m.peak_theta_deg
        ),
    );
}

#[test]
fn c11_polarization_purity() {
    let ideal = default_sim(SimulationConfig::default());
    let leaky = default_sim(SimulationConfig {
        illumination: IlluminationOptions {
            cell_leakage: LEAKAGE,
            ..IlluminationOptions::default()
        },
        ..SimulationConfig::default()
    });
    let mut ideal_beams = 0;
    let mut ideal_nonzero = 0;
    let mut leak_worst = f64::NEG_INFINITY;
    let mut leak_finite = true;
    for state in PolarizationState::ALL {
        for feed in ideal.legal_feeds(state) {
            for beam in ideal.run(state, &feed.id, DESIGN_GHZ).unwrap().beams() {
                let peak = beam.metrics.peak_theta_deg;
                let it = beam.pattern.theta_deg.iter().position(|&t| t == peak).unwrap();
                let ip = if it == 0 {
                    0
                } else {
                    beam.pattern
                        .phi_deg
                        .iter()
                        .position(|&p| p == beam.metrics.peak_phi_deg)
                        .unwrap()
                };
                ideal_beams += 1;
                if beam.pattern.e_cross[beam.pattern.index(it, ip)] != Complex64::new(0.0, 0.0) {
                    ideal_nonzero += 1;
                }
            }
            for beam in leaky.run(state, &feed.id, DESIGN_GHZ).unwrap().beams() {
                leak_finite &= beam.metrics.crosspol_peak_db.is_finite();
                leak_worst = leak_worst.max(beam.metrics.crosspol_peak_db);
            }
        }
    }
    report(
        11,
        "cross-polarization at the beam peak",
        ideal_beams == 26 && ideal_nonzero == 0 && leak_finite && leak_worst < LEAKAGE_CROSSPOL_MAX_DB,
        &format!(
            "ideal: {ideal_nonzero}/{ideal_beams} beams with nonzero cross-pol at peak; |T_xx| = {LEAKAGE}: worst cross-pol peak {leak_worst:.2} dB (limit {LEAKAGE_CROSSPOL_MAX_DB} dB)"
        ),
    );
}

#[test]
fn hta_peaks_share_power() {
    // not a numbered criterion: both HTA hemispheres carry half the power
    let sim = default_sim(SimulationConfig::default());
    let r = sim.run(PolarizationState::Slant45, "A4", DESIGN_GHZ).unwrap();
    let (f, b) = (r.forward.unwrap().metrics, r.backward.unwrap().metrics);
    let ta = sim
        .run(PolarizationState::X, "A4", DESIGN_GHZ)
        .unwrap()
        .forward
        .unwrap()
        .metrics;
    assert_eq!(f.directivity_dbi, ta.directivity_dbi);
    let half = 10.0 * 0.5f64.log10();
    assert!((f.peak_gain_dbi - f.directivity_dbi - half).abs() < 1e-12);
    assert!((b.peak_gain_dbi - b.directivity_dbi - half).abs() < 1e-12);
    assert_eq!(ta.peak_gain_dbi, ta.directivity_dbi);
}
