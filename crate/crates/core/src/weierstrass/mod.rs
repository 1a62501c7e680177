//! Weierstrass data `g = z`, `η = s dz / (z w)` and the immersion
//! `x(p) = Re ∫_{1}^{p} Φ`.
//!
//! Positions are computed two ways. [`integrate`] walks a [`SheetedPath`]
//! produced by nearest-root continuation; [`chart`] integrates against the
//! closed-form half-plane branches of `w`. The router in [`route`] combines
//! the two.

pub mod chart;
pub mod route;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::curve::{circle_polyline, continue_sheet, curve_rhs, nearest_root, CurvePoint, Half, Lambda, Sheet, SheetedPath};
use crate::curve::half_plane_w;
use crate::error::{Error, Result};
use crate::quadrature::{self, Tolerance, Vec3};

pub use chart::{HalfChart, Piece, SurfaceCharts};
pub use route::Router;

/// How the raw Weierstrass data is rescaled.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NormalizationKind {
    /// `η = dz / (z w)`.
    Unnormalized,
    /// `η` multiplied by `sqrt(λ)` for λ ≥ 1 and by `1/sqrt(λ)` for λ ≤ 1.
    PaperNormalized,
    /// Rescaled so adjacent planar ends sit exactly `2π` apart.
    FixedVerticalSpacing,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Normalization {
    pub kind: NormalizationKind,
    pub lambda: Lambda,
    scale: f64,
}

impl Normalization {
    pub fn new(kind: NormalizationKind, lambda: Lambda) -> Result<Self> {
        let l = lambda.value();
        let scale = match kind {
            NormalizationKind::Unnormalized => 1.0,
            NormalizationKind::PaperNormalized => {
                if l >= 1.0 {
                    l.sqrt()
                } else {
                    1.0 / l.sqrt()
                }
            }
            NormalizationKind::FixedVerticalSpacing => {
                let gap = chart::planar_end_gap(lambda, 1.0)?;
                std::f64::consts::TAU / gap.abs()
            }
        };
        Ok(Normalization { kind, lambda, scale })
    }

    pub fn unnormalized(lambda: Lambda) -> Self {
        Normalization {
            kind: NormalizationKind::Unnormalized,
            lambda,
            scale: 1.0,
        }
    }

    pub fn paper(lambda: Lambda) -> Self {
        Normalization::new(NormalizationKind::PaperNormalized, lambda).expect("closed form")
    }

    /// Factor multiplying `η`; positions scale linearly with it.
    #[inline]
    pub fn scale(&self) -> f64 {
        self.scale
    }
}

/// The integrand vector `Φ` per unit `dz`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhiValue(pub [Complex64; 3]);

impl PhiValue {
    /// `|φ1² + φ2² + φ3²|` divided by `Σ|φk|²`.
    pub fn null_residual(&self) -> f64 {
        let [a, b, c] = self.0;
        let s = a * a + b * b + c * c;
        s.norm() / (a.norm_sqr() + b.norm_sqr() + c.norm_sqr()).max(f64::MIN_POSITIVE)
    }
}

#[inline]
pub(crate) fn phi_raw(z: Complex64, w: Complex64, scale: f64) -> [Complex64; 3] {
    let i = Complex64::i();
    let zw = z * w;
    let z2 = z * z;
    [
        scale * (1.0 - z2) / zw,
        scale * i * (1.0 + z2) / zw,
        scale * 2.0 / w,
    ]
}

#[inline]
pub(crate) fn re_times(phi: &[Complex64; 3], dz: Complex64) -> Vec3 {
    [(phi[0] * dz).re, (phi[1] * dz).re, (phi[2] * dz).re]
}

pub fn phi(point: &CurvePoint, norm: &Normalization) -> Result<PhiValue> {
    if point.z.norm() == 0.0 || point.w.norm() == 0.0 {
        return Err(Error::SingularPoint(point.z));
    }
    Ok(PhiValue(phi_raw(point.z, point.w, norm.scale())))
}

fn segment_integral(
    a: Complex64,
    wa: Complex64,
    b: Complex64,
    wb: Complex64,
    lambda: Lambda,
    scale: f64,
) -> Result<Vec3> {
    let dz = b - a;
    let len = dz.norm();
    quadrature::integrate(
        |t| {
            let z = a + dz * t;
            let hint = wa + (wb - wa) * t;
            let w = nearest_root(curve_rhs(z, lambda), hint);
            re_times(&phi_raw(z, w, scale), dz)
        },
        0.0,
        1.0,
        Tolerance::per_length(len),
    )
}

/// Real part of `∫ Φ` along a continued path.
pub fn integrate(path: &SheetedPath, norm: &Normalization) -> Result<Vec3> {
    let partial = integrate_cumulative(path, norm)?;
    Ok(*partial.last().expect("path is non-empty"))
}

/// Partial integrals at every vertex of the path (first entry is zero).
pub fn integrate_cumulative(path: &SheetedPath, norm: &Normalization) -> Result<Vec<Vec3>> {
    let mut acc = [0.0; 3];
    let mut out = Vec::with_capacity(path.len());
    out.push(acc);
    for k in 1..path.len() {
        let v = segment_integral(
            path.vertices[k - 1],
            path.w_values[k - 1],
            path.vertices[k],
            path.w_values[k],
            path.lambda,
            norm.scale(),
        )?;
        for i in 0..3 {
            acc[i] += v[i];
        }
        out.push(acc);
    }
    Ok(out)
}

/// Real periods over the two basis cycles.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PeriodVector {
    /// Period over the circle α enclosing `{0, -1/λ}`: the translation `T`.
    pub translation: Vec3,
    /// Period over the circle enclosing `{0, λ}`.
    pub companion: Vec3,
}

/// Vertices per basis cycle polygon.
pub const CYCLE_VERTICES: usize = 256;

/// The circle α: center `-1/(2λ)`, radius `(λ + 1/λ)/2`, starting at its
/// rightmost point `λ/2`.
pub fn alpha_cycle(lambda: Lambda) -> Vec<Complex64> {
    let l = lambda.value();
    circle_polyline(Complex64::new(-0.5 / l, 0.0), 0.5 * (l + 1.0 / l), 0.0, CYCLE_VERTICES)
}

/// Mirror image of α under `z -> -z` with `λ -> 1/λ`: center `λ/2`, same
/// radius, starting at its leftmost point `-1/(2λ)`.
pub fn companion_cycle(lambda: Lambda) -> Vec<Complex64> {
    let l = lambda.value();
    circle_polyline(
        Complex64::new(0.5 * l, 0.0),
        0.5 * (l + 1.0 / l),
        std::f64::consts::PI,
        CYCLE_VERTICES,
    )
}

fn loop_period(cycle: &[Complex64], lambda: Lambda, norm: &Normalization, sheet: Sheet) -> Result<Vec3> {
    let w0 = sheet.sign() * half_plane_w(cycle[0], lambda, Half::Upper);
    let path = continue_sheet(cycle, w0, lambda)?;
    integrate(&path, norm)
}

pub fn period_vectors(lambda: Lambda, norm: &Normalization) -> Result<PeriodVector> {
    period_vectors_on(lambda, norm, Sheet::Plus)
}

pub fn period_vectors_on(lambda: Lambda, norm: &Normalization, sheet: Sheet) -> Result<PeriodVector> {
    Ok(PeriodVector {
        translation: loop_period(&alpha_cycle(lambda), lambda, norm, sheet)?,
        companion: loop_period(&companion_cycle(lambda), lambda, norm, sheet)?,
    })
}

/// An immersed point together with the curve point and winding it came from.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SurfacePoint {
    pub position: Vec3,
    pub source: CurvePoint,
    pub winding: i32,
}

/// Unit normal from the stereographic Gauss map `g = z`.
pub fn gauss_map(z: Complex64) -> Vec3 {
    if !z.re.is_finite() || !z.im.is_finite() {
        return [0.0, 0.0, 1.0];
    }
    let r2 = z.norm_sqr();
    let d = r2 + 1.0;
    [2.0 * z.re / d, 2.0 * z.im / d, (r2 - 1.0) / d]
}

/// Coefficient of `|dz|^2` in the induced metric.
pub fn metric_factor(point: &CurvePoint, norm: &Normalization) -> Result<f64> {
    let r2 = point.z.norm_sqr();
    let w2 = point.w.norm_sqr();
    if r2 == 0.0 || w2 == 0.0 {
        return Err(Error::SingularPoint(point.z));
    }
    let s = norm.scale();
    Ok(s * s * (1.0 + r2).powi(2) / (4.0 * r2 * w2))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::reference;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn lam(v: f64) -> Lambda {
        Lambda::new(v).unwrap()
    }

    #[test]
    fn phi_at_unit_point() {
        let lambda = lam(4.0);
        let w = c(0.0, 3.75f64.sqrt());
        let p = CurvePoint::new(c(1.0, 0.0), w, lambda).unwrap();
        let v = phi(&p, &Normalization::unnormalized(lambda)).unwrap();
        assert!(v.0[0].norm() < 1e-16);
        let expected = c(0.0, -2.0 / 3.75f64.sqrt());
        assert!((v.0[2] - expected).norm() < 1e-15);
    }

    #[test]
    fn paper_normalization_at_one_is_identity() {
        let lambda = lam(1.0);
        let p = CurvePoint::nearest(c(0.3, 0.8), c(1.0, 0.0), lambda);
        let a = phi(&p, &Normalization::unnormalized(lambda)).unwrap();
        let b = phi(&p, &Normalization::paper(lambda)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn null_identity_random() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..100 {
            let lambda = lam(10f64.powf(rng.gen_range(-2.0..2.0)));
            let z = c(rng.gen_range(-5.0..5.0), rng.gen_range(-5.0..5.0));
            let p = CurvePoint::nearest(z, c(1.0, 0.0), lambda);
            let v = phi(&p, &Normalization::paper(lambda)).unwrap();
            assert!(v.null_residual() < 1e-9);
        }
    }

    #[test]
    fn phi_rejects_singular_points() {
        let lambda = lam(2.0);
        let p = CurvePoint::new(c(2.0, 0.0), c(0.0, 0.0), lambda).unwrap();
        assert!(matches!(phi(&p, &Normalization::unnormalized(lambda)), Err(Error::SingularPoint(_))));
    }

    #[test]
    fn single_point_path_integrates_to_zero() {
        let lambda = lam(2.0);
        let z = c(1.0, 1.0);
        let path = continue_sheet(&[z], curve_rhs(z, lambda).sqrt(), lambda).unwrap();
        assert_eq!(integrate(&path, &Normalization::unnormalized(lambda)).unwrap(), [0.0; 3]);
    }

    #[test]
    fn reversal_negates() {
        let lambda = lam(0.7);
        let pts = [c(1.0, 0.0), c(1.0, 2.0), c(-2.0, 1.0), c(-3.0, -1.0)];
        let path = continue_sheet(&pts, curve_rhs(pts[0], lambda).sqrt(), lambda).unwrap();
        let norm = Normalization::paper(lambda);
        let a = integrate(&path, &norm).unwrap();
        let b = integrate(&path.reversed(), &norm).unwrap();
        for i in 0..3 {
            assert!((a[i] + b[i]).abs() < 1e-10);
        }
    }

    #[test]
    fn catenoid_integrand_along_real_axis() {
        // Catenoid data: Φ = ((1-z²)/z², i(1+z²)/z², 2/z).
        let v = quadrature::integrate(
            |t| {
                let z = c(t, 0.0);
                let f = reference::catenoid_integrand(z);
                re_times(&f, c(1.0, 0.0))
            },
            1.0,
            std::f64::consts::E,
            Tolerance::per_length(2.0),
        )
        .unwrap();
        assert!((v[2] - 2.0).abs() < 1e-12);
    }

    #[test]
    fn gauss_map_examples() {
        assert_eq!(gauss_map(c(0.0, 0.0)), [0.0, 0.0, -1.0]);
        let n = gauss_map(Complex64::from_polar(1.0, 0.7));
        assert!(n[2].abs() < 1e-16);
        let n = gauss_map(c(0.0, 1.0));
        assert!((n[0]).abs() < 1e-16 && (n[1] - 1.0).abs() < 1e-16 && n[2].abs() < 1e-16);
        assert_eq!(gauss_map(c(f64::INFINITY, 0.0)), [0.0, 0.0, 1.0]);
    }

    #[test]
    fn metric_factor_examples() {
        let lambda = lam(1.0);
        let p = CurvePoint::nearest(c(0.0, 1.0), c(1.0, 0.0), lambda);
        let m = metric_factor(&p, &Normalization::unnormalized(lambda)).unwrap();
        assert!((m - 0.5).abs() < 1e-14);
        let q = p.sheet_partner();
        assert_eq!(m, metric_factor(&q, &Normalization::unnormalized(lambda)).unwrap());
        let near = CurvePoint::nearest(c(1.0 + 1e-10, 0.0), c(1.0, 0.0), lambda);
        assert!(metric_factor(&near, &Normalization::unnormalized(lambda)).unwrap() > 1e9);
    }

    #[test]
    fn periods_basic_structure() {
        for l in [0.2, 1.0, 5.0] {
            let lambda = lam(l);
            let p = period_vectors(lambda, &Normalization::paper(lambda)).unwrap();
            let t = p.translation;
            let tn = (t[0] * t[0] + t[1] * t[1] + t[2] * t[2]).sqrt();
            let cn = p.companion.iter().map(|v| v * v).sum::<f64>().sqrt();
            assert!(tn > 1.0, "lambda {l}: {t:?}");
            assert!(cn < 1e-6 * tn, "lambda {l}: {:?}", p.companion);
            assert!(t[1].abs() < 1e-9 * tn);
        }
    }

    #[test]
    fn sheet_minus_negates_periods() {
        let lambda = lam(3.0);
        let norm = Normalization::paper(lambda);
        let a = period_vectors_on(lambda, &norm, Sheet::Plus).unwrap();
        let b = period_vectors_on(lambda, &norm, Sheet::Minus).unwrap();
        for i in 0..3 {
            assert!((a.translation[i] + b.translation[i]).abs() < 1e-9);
        }
    }
}
