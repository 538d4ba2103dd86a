//! Discrete aperture superposition onto a (theta, phi) grid.
//!
//! `E(theta, phi) = cos(theta) * sum_ij A_ij exp(j k0 (x_i u + y_j v))` with
//! `u = sin(theta) cos(phi)`, `v = sin(theta) sin(phi)`, evaluated
//! separately for the co (y) and cross (x) components. Directions are
//! independent and evaluated in parallel; within a direction the sum runs
//! in a fixed order, so results do not depend on the thread count.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;

use super::ApertureField;
use crate::error::{Error, Result};
use crate::geometry::Hemisphere;

#[derive(Debug, Clone, PartialEq)]
pub struct PatternGrid {
    pub theta_deg: Vec<f64>,
    pub phi_deg: Vec<f64>,
    /// `theta` is the slow index.
    pub e_co: Vec<Complex64>,
    pub e_cross: Vec<Complex64>,
    pub hemisphere: Hemisphere,
    pub frequency_ghz: f64,
}

impl PatternGrid {
    pub fn n_theta(&self) -> usize {
        self.theta_deg.len()
    }

    pub fn n_phi(&self) -> usize {
        self.phi_deg.len()
    }

    #[inline]
    pub fn index(&self, it: usize, ip: usize) -> usize {
        it * self.phi_deg.len() + ip
    }

    pub fn theta_step(&self) -> f64 {
        self.theta_deg[1] - self.theta_deg[0]
    }

    pub fn phi_step(&self) -> f64 {
        360.0 / self.phi_deg.len() as f64
    }

    /// Co-polar radiation intensity `|E_co|^2`.
    pub fn co_power(&self) -> Vec<f64> {
        self.e_co.iter().map(|e| e.norm_sqr()).collect()
    }
}

fn sample_count(step: f64, range: f64) -> Result<usize> {
    if !(step.is_finite() && step > 0.0 && step <= range) {
        return Err(Error::BadSampling { step, range });
    }
    let n = range / step;
    let r = n.round();
    if (n - r).abs() > 1e-9 * n.max(1.0) {
        return Err(Error::BadSampling { step, range });
    }
    Ok(r as usize)
}

/// Per-element phasors for one aperture, reused across directions.
struct Kernel<'a> {
    field: &'a ApertureField,
    xs: Vec<f64>,
    ys: Vec<f64>,
    k0: f64,
}

impl<'a> Kernel<'a> {
    fn new(field: &'a ApertureField, k0: f64) -> Result<Self> {
        if field.fields.is_empty() {
            return Err(Error::EmptyField);
        }
        let ap = &field.aperture;
        if field.fields.len() != ap.len() {
            return Err(Error::InvalidAperture("field size does not match aperture".into()));
        }
        Ok(Kernel {
            field,
            xs: (0..ap.nx).map(|i| ap.element_x(i)).collect(),
            ys: (0..ap.ny).map(|j| ap.element_y(j)).collect(),
            k0,
        })
    }

    /// (co, cross) in direction (theta, phi), degrees.
    fn eval(&self, theta_deg: f64, phi_deg: f64, row: &mut Vec<Complex64>) -> (Complex64, Complex64) {
        let (st, ct) = theta_deg.to_radians().sin_cos();
        let (sp, cp) = phi_deg.to_radians().sin_cos();
        let (u, v) = (st * cp, st * sp);
        row.clear();
        row.extend(self.ys.iter().map(|&y| Complex64::cis(self.k0 * y * v)));
        let ny = self.ys.len();
        let mut co = Complex64::new(0.0, 0.0);
        let mut cross = Complex64::new(0.0, 0.0);
        for (i, &x) in self.xs.iter().enumerate() {
            let fields = &self.field.fields[i * ny..(i + 1) * ny];
            let mut acc_co = Complex64::new(0.0, 0.0);
            let mut acc_cross = Complex64::new(0.0, 0.0);
            for (f, ph) in fields.iter().zip(row.iter()) {
                acc_co += f.ey * ph;
                acc_cross += f.ex * ph;
            }
            let px = Complex64::cis(self.k0 * x * u);
            co += acc_co * px;
            cross += acc_cross * px;
        }
        (co * ct, cross * ct)
    }
}

/// Field at arbitrary `(theta, phi)` directions (degrees).
pub fn radiate_directions(
    field: &ApertureField,
    directions: &[(f64, f64)],
    k0: f64,
) -> Result<Vec<(Complex64, Complex64)>> {
    let kernel = Kernel::new(field, k0)?;
    Ok(directions
        .par_iter()
        .map_init(Vec::new, |row, &(t, p)| kernel.eval(t, p, row))
        .collect())
}

pub fn radiate(
    field: &ApertureField,
    hemisphere: Hemisphere,
    theta_step: f64,
    phi_step: f64,
    k0: f64,
) -> Result<PatternGrid> {
    let nt = sample_count(theta_step, 90.0)?;
    let np = sample_count(phi_step, 360.0)?;
    let theta_deg: Vec<f64> = (0..=nt).map(|k| k as f64 * 90.0 / nt as f64).collect();
    let phi_deg: Vec<f64> = (0..np).map(|k| k as f64 * 360.0 / np as f64).collect();
    let dirs: Vec<(f64, f64)> = theta_deg
        .iter()
        .flat_map(|&t| phi_deg.iter().map(move |&p| (t, p)))
        .collect();
    let values = radiate_directions(field, &dirs, k0)?;
    let (e_co, e_cross) = values.into_iter().unzip();
    Ok(PatternGrid {
        theta_deg,
        phi_deg,
        e_co,
        e_cross,
        hemisphere,
        frequency_ghz: crate::frequency_from_wavenumber(k0),
    })
}

/// A principal-plane cut: `phi_deg` fixed, `theta_deg` over [0, 90].
#[derive(Debug, Clone, PartialEq)]
pub struct PatternCut {
    pub phi_deg: f64,
    pub theta_deg: Vec<f64>,
    pub e_co: Vec<Complex64>,
    pub e_cross: Vec<Complex64>,
}

/// Half-plane cuts at each of `phis` sampled every `theta_step`.
pub fn radiate_cut(field: &ApertureField, phis: &[f64], theta_step: f64, k0: f64) -> Result<Vec<PatternCut>> {
    let nt = sample_count(theta_step, 90.0)?;
    let theta_deg: Vec<f64> = (0..=nt).map(|k| k as f64 * 90.0 / nt as f64).collect();
    let dirs: Vec<(f64, f64)> = phis
        .iter()
        .flat_map(|&p| theta_deg.iter().map(move |&t| (t, p)))
        .collect();
    let values = radiate_directions(field, &dirs, k0)?;
    Ok(phis
        .iter()
        .zip(values.chunks(theta_deg.len()))
        .map(|(&phi, chunk)| PatternCut {
            phi_deg: phi,
            theta_deg: theta_deg.clone(),
            e_co: chunk.iter().map(|c| c.0).collect(),
            e_cross: chunk.iter().map(|c| c.1).collect(),
        })
        .collect())
}

/// Trapezoid-in-theta, rectangle-in-phi weights for `sin(theta) dtheta dphi`.
fn solid_angle_weights(pattern: &PatternGrid) -> Vec<f64> {
    let nt = pattern.n_theta();
    let dt = pattern.theta_step().to_radians();
    let dp = pattern.phi_step().to_radians();
    (0..nt)
        .map(|k| {
            let end = if k == 0 || k == nt - 1 { 0.5 } else { 1.0 };
            end * dt * dp * pattern.theta_deg[k].to_radians().sin()
        })
        .collect()
}

/// `∮ U dΩ` over the pattern's hemisphere, both polarizations.
pub fn radiated_power(pattern: &PatternGrid) -> f64 {
    let w = solid_angle_weights(pattern);
    let np = pattern.n_phi();
    let mut total = 0.0;
    for (it, wt) in w.iter().enumerate() {
        let mut row = 0.0;
        for ip in 0..np {
            let k = it * np + ip;
            row += pattern.e_co[k].norm_sqr() + pattern.e_cross[k].norm_sqr();
        }
        total += wt * row;
    }
    total
}

/// Co-polar directivity over the grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Directivity {
    /// Linear directivity per grid point.
    pub linear: Vec<f64>,
    pub peak_index: usize,
    pub peak_linear: f64,
    pub radiated_power: f64,
}

impl Directivity {
    pub fn peak_dbi(&self) -> f64 {
        10.0 * self.peak_linear.log10()
    }
}

/// `D = 4π U_co / ∮ (U_co + U_cross) dΩ`.
pub fn directivity(pattern: &PatternGrid) -> Result<Directivity> {
    let power = radiated_power(pattern);
    if !(power > 0.0 && power.is_finite()) {
        return Err(Error::ZeroPattern);
    }
    let linear: Vec<f64> = pattern.e_co.iter().map(|e| 4.0 * PI * e.norm_sqr() / power).collect();
    let mut peak_index = 0;
    for (k, &d) in linear.iter().enumerate() {
        if d > linear[peak_index] {
            peak_index = k;
        }
    }
    Ok(Directivity {
        peak_linear: linear[peak_index],
        peak_index,
        linear,
        radiated_power: power,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::ApertureSpec;
    use crate::polarization::JonesVector;

    fn uniform(n: usize, period: f64) -> ApertureField {
        let ap = ApertureSpec::new(
            0.0,
            n as f64 * period,
            n as f64 * period,
            period,
            n,
            n,
            Hemisphere::Forward,
        )
        .unwrap();
        ApertureField {
            fields: vec![JonesVector::real(0.0, 1.0); ap.len()],
            aperture: ap,
        }
    }

    #[test]
    fn sampling_must_divide() {
        let f = uniform(2, 10.0);
        assert!(radiate(&f, Hemisphere::Forward, 0.7, 2.0, 0.2).is_err());
        assert!(radiate(&f, Hemisphere::Forward, 1.0, 7.0, 0.2).is_err());
        assert!(radiate(&f, Hemisphere::Forward, 1.0, 0.0, 0.2).is_err());
        let g = radiate(&f, Hemisphere::Forward, 1.0, 2.0, 0.2).unwrap();
        assert_eq!((g.n_theta(), g.n_phi()), (91, 180));
    }

    #[test]
    fn empty_field_rejected() {
        let mut f = uniform(2, 10.0);
        f.fields.clear();
        assert!(matches!(
            radiate(&f, Hemisphere::Forward, 1.0, 2.0, 0.2),
            Err(Error::EmptyField)
        ));
    }

    #[test]
    fn broadside_peak_for_uniform_aperture() {
        let f = uniform(10, 15.0);
        let g = radiate(&f, Hemisphere::Forward, 1.0, 5.0, 0.2).unwrap();
        let d = directivity(&g).unwrap();
        assert_eq!(d.peak_index, 0);
    }

    #[test]
    fn single_element_is_cosine() {
        let f = uniform(1, 10.0);
        let g = radiate(&f, Hemisphere::Backward, 2.0, 10.0, 0.2).unwrap();
        for (k, e) in g.e_co.iter().enumerate() {
            let t = g.theta_deg[k / g.n_phi()];
            assert!((e.norm() - t.to_radians().cos()).abs() < 1e-15);
        }
    }

    #[test]
    fn isotropic_hemisphere_directivity_is_two() {
        let g = PatternGrid {
            theta_deg: (0..=360).map(|k| k as f64 * 0.25).collect(),
            phi_deg: (0..360).map(|k| k as f64).collect(),
            e_co: vec![Complex64::new(1.0, 0.0); 361 * 360],
            e_cross: vec![Complex64::new(0.0, 0.0); 361 * 360],
            hemisphere: Hemisphere::Forward,
            frequency_ghz: 10.0,
        };
        let d = directivity(&g).unwrap();
        assert!((d.peak_linear - 2.0).abs() < 1e-5);
        assert!((d.peak_dbi() - 3.0103).abs() < 1e-3);
    }

    #[test]
    fn zero_pattern_rejected() {
        let mut f = uniform(3, 10.0);
        for v in &mut f.fields {
            *v = JonesVector::default();
        }
        let g = radiate(&f, Hemisphere::Forward, 5.0, 10.0, 0.2).unwrap();
        assert!(matches!(directivity(&g), Err(Error::ZeroPattern)));
    }

    #[test]
    fn scaling_leaves_directivity() {
        let f = uniform(6, 12.0);
        let a = directivity(&radiate(&f, Hemisphere::Forward, 1.0, 4.0, 0.2).unwrap()).unwrap();
        let half = f.scaled(Complex64::new(0.5, 0.0));
        let b = directivity(&radiate(&half, Hemisphere::Forward, 1.0, 4.0, 0.2).unwrap()).unwrap();
        assert!((a.peak_linear - b.peak_linear).abs() < 1e-12 * a.peak_linear);
        assert!((b.radiated_power - 0.25 * a.radiated_power).abs() < 1e-12 * a.radiated_power);
    }

    #[test]
    fn cut_matches_grid() {
        let f = uniform(5, 12.0);
        let g = radiate(&f, Hemisphere::Forward, 1.0, 90.0, 0.2).unwrap();
        let cuts = radiate_cut(&f, &[0.0, 90.0, 180.0, 270.0], 1.0, 0.2).unwrap();
        for (ip, cut) in cuts.iter().enumerate() {
            for it in 0..g.n_theta() {
                assert_eq!(cut.e_co[it], g.e_co[g.index(it, ip)]);
            }
        }
    }
}

#[cfg(test)]
mod props {
    use super::*;
    use crate::geometry::ApertureSpec;
    use crate::polarization::JonesVector;
    use proptest::prelude::*;

    fn field_strategy() -> impl Strategy<Value = ApertureField> {
        (1usize..6, 1usize..6).prop_flat_map(|(nx, ny)| {
            proptest::collection::vec((-1.0..1.0f64, -1.0..1.0f64, -1.0..1.0f64, -1.0..1.0f64), nx * ny).prop_map(
                move |v| {
                    let ap = ApertureSpec::new(0.0, 60.0, 60.0, 8.0, nx, ny, Hemisphere::Forward).unwrap();
                    let fields = v
                        .into_iter()
                        .map(|(a, b, c, d)| JonesVector::new(Complex64::new(a, b), Complex64::new(c, d) + 0.1))
                        .collect();
                    ApertureField { aperture: ap, fields }
                },
            )
        })
    }

    fn k0() -> f64 {
        crate::wavenumber(9.75)
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn scaling_is_quadratic(field in field_strategy(), re in -3.0..3.0f64, im in 0.1..3.0f64) {
            let c = Complex64::new(re, im);
            let a = radiate(&field, Hemisphere::Forward, 5.0, 10.0, k0()).unwrap();
            let b = radiate(&field.scaled(c), Hemisphere::Forward, 5.0, 10.0, k0()).unwrap();
            let peak = a.co_power().into_iter().fold(0.0, f64::max);
            for (x, y) in a.e_co.iter().zip(&b.e_co) {
                prop_assert!((y.norm_sqr() - c.norm_sqr() * x.norm_sqr()).abs() <= 1e-9 * c.norm_sqr() * peak);
            }
            let (da, db) = (directivity(&a).unwrap(), directivity(&b).unwrap());
            prop_assert!((da.peak_linear - db.peak_linear).abs() <= 1e-9 * da.peak_linear);
        }

        #[test]
        fn global_phase_keeps_power(field in field_strategy(), phase in 0.0..std::f64::consts::TAU) {
            let a = radiate(&field, Hemisphere::Forward, 5.0, 10.0, k0()).unwrap();
            let b = radiate(&field.scaled(Complex64::cis(phase)), Hemisphere::Forward, 5.0, 10.0, k0()).unwrap();
            let (pa, pb) = (radiated_power(&a), radiated_power(&b));
            prop_assert!((pa - pb).abs() <= 1e-12 * pa);
        }

        #[test]
        fn mirrored_field_mirrors_pattern(field in field_strategy()) {
            let ap = &field.aperture;
            let mut flipped = field.clone();
            for i in 0..ap.nx {
                for j in 0..ap.ny {
                    flipped.fields[ap.index(ap.nx - 1 - i, j)] = field.fields[ap.index(i, j)];
                }
            }
            let a = radiate(&field, Hemisphere::Forward, 5.0, 10.0, k0()).unwrap();
            let b = radiate(&flipped, Hemisphere::Forward, 5.0, 10.0, k0()).unwrap();
            let np = a.n_phi();
            let peak = a.co_power().into_iter().fold(0.0, f64::max).sqrt();
            for it in 0..a.n_theta() {
                for ip in 0..np {
                    let mirrored = (np + np / 2 - ip) % np;
                    let (x, y) = (a.e_co[a.index(it, ip)], b.e_co[b.index(it, mirrored)]);
                    prop_assert!((x.norm() - y.norm()).abs() <= 1e-9 * peak);
                }
            }
        }
    }
}
