//! Symmetries of the Riemann examples and their fixed-point sets.
//!
//! Each symmetry is an involution `σ` of the curve whose pullback acts on the
//! Weierstrass integrand by a diagonal matrix `A`, so that
//! `x(σ p) = A x(p) + c` for a constant `c`. The checks evaluate
//! `x(σ p) - A x(p)` on samples and compare it with the value at a fixed
//! point of `σ`.

use nalgebra::{Matrix3, SymmetricEigen, Vector3};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::curve::{CurvePoint, Half, Lambda, Sheet};
use crate::error::{Error, Result};
use crate::quadrature::Vec3;
use crate::weierstrass::{Normalization, Piece, SurfaceCharts};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Symmetry {
    /// `(z, w) -> (z̄, w̄)`: reflection in a plane orthogonal to `x2`, fixing
    /// the planar geodesics.
    Reflection,
    /// `(z, w) -> (z̄, -w̄)`: half-turn about the straight lines, which are
    /// parallel to `x2`.
    LineRotation,
    /// `(z, w) -> (-1/z, -w/z²)`: half-turn about a horizontal line meeting
    /// the surface orthogonally where `g = ±i`.
    NormalRotation,
}

impl Symmetry {
    pub const ALL: [Symmetry; 3] = [Symmetry::Reflection, Symmetry::LineRotation, Symmetry::NormalRotation];

    pub fn apply(self, p: &CurvePoint) -> CurvePoint {
        let (z, w) = match self {
            Symmetry::Reflection => (p.z.conj(), p.w.conj()),
            Symmetry::LineRotation => (p.z.conj(), -p.w.conj()),
            Symmetry::NormalRotation => (-1.0 / p.z, -p.w / (p.z * p.z)),
        };
        CurvePoint { z, w, lambda: p.lambda }
    }

    /// Diagonal of the linear part acting on `R³`.
    pub fn linear_part(self) -> Vec3 {
        match self {
            Symmetry::Reflection => [1.0, -1.0, 1.0],
            Symmetry::LineRotation | Symmetry::NormalRotation => [-1.0, 1.0, -1.0],
        }
    }

    fn fixed_point(self, lambda: Lambda, half: Half) -> Complex64 {
        let l = lambda.value();
        match (self, half) {
            (Symmetry::Reflection, _) => Complex64::new(2.0 * l, 0.0),
            (Symmetry::LineRotation, _) => Complex64::new(0.5 * l, 0.0),
            (Symmetry::NormalRotation, Half::Upper) => Complex64::i(),
            (Symmetry::NormalRotation, Half::Lower) => -Complex64::i(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SymmetryCheck {
    pub symmetry: Symmetry,
    /// `x(σ p) - A x(p)` on the base piece, read off at the fixed point.
    pub offset: Vec3,
    pub residuals: Vec<f64>,
    pub max_residual: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SymmetryReport {
    pub lambda: f64,
    pub tolerance: f64,
    pub checks: Vec<SymmetryCheck>,
    pub passed: bool,
}

fn apply_linear(a: Vec3, x: Vec3) -> Vec3 {
    [a[0] * x[0], a[1] * x[1], a[2] * x[2]]
}

fn dist(a: Vec3, b: Vec3) -> f64 {
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2) + (a[2] - b[2]).powi(2)).sqrt()
}

/// Piece containing `p`, treating real `z` as lying in the half `half`.
fn piece_in(charts: &SurfaceCharts, p: &CurvePoint, half: Half) -> Piece {
    let (plus, minus) = match half {
        Half::Upper => (Piece::UpperBase, Piece::UpperOpposite),
        Half::Lower => (Piece::LowerReflected, Piece::LowerRotated),
    };
    let w = charts.chart(plus).w(p.z);
    if (p.w - w).norm_sqr() <= (p.w + w).norm_sqr() {
        plus
    } else {
        minus
    }
}

fn image_half(sym: Symmetry, half: Half) -> Half {
    match (sym, half) {
        (Symmetry::NormalRotation, h) => h,
        (_, Half::Upper) => Half::Lower,
        (_, Half::Lower) => Half::Upper,
    }
}

/// `x(σ p) - A x(p)`, with the pieces of `p` and `σ p` chosen consistently.
fn defect(charts: &SurfaceCharts, sym: Symmetry, p: &CurvePoint, half: Half) -> Result<(Vec3, Piece, Piece)> {
    let q = sym.apply(p);
    let qh = image_half(sym, half);
    let (pp, qp) = (piece_in(charts, p, half), piece_in(charts, &q, qh));
    let xp = charts.position(pp, p.z)?;
    let xq = charts.position(qp, q.z)?;
    let ax = apply_linear(sym.linear_part(), xp);
    Ok(([xq[0] - ax[0], xq[1] - ax[1], xq[2] - ax[2]], pp, qp))
}

fn check_one(charts: &SurfaceCharts, sym: Symmetry, samples: &[CurvePoint], tol: f64) -> Result<SymmetryCheck> {
    let lambda = charts.lambda;
    let base_fixed = sym.fixed_point(lambda, Half::Upper);
    let base_point = CurvePoint {
        z: base_fixed,
        w: charts.chart(Piece::UpperBase).w(base_fixed),
        lambda,
    };
    let (offset, _, _) = defect(charts, sym, &base_point, Half::Upper)?;

    let mut residuals = Vec::with_capacity(samples.len());
    for p in samples {
        let half = Half::of(p.z);
        let (d, pp, qp) = defect(charts, sym, p, half)?;
        // Reference value for this pair of pieces, read off at a fixed point.
        let zf = sym.fixed_point(lambda, half);
        let pf = CurvePoint {
            z: zf,
            w: charts.chart(pp).w(zf),
            lambda,
        };
        let qf = sym.apply(&pf);
        let xf = apply_linear(sym.linear_part(), charts.position(pp, zf)?);
        let xq = charts.position(qp, qf.z)?;
        let c = [xq[0] - xf[0], xq[1] - xf[1], xq[2] - xf[2]];
        residuals.push(dist(d, c));
    }
    let max_residual = residuals.iter().fold(0.0f64, |m, &r| m.max(r));
    Ok(SymmetryCheck {
        symmetry: sym,
        offset,
        residuals,
        max_residual,
        passed: max_residual < tol,
    })
}

/// Verify the three symmetries on the given curve points.
pub fn check_symmetries(lambda: Lambda, norm: &Normalization, samples: &[CurvePoint], tol: f64) -> Result<SymmetryReport> {
    if samples.iter().any(|p| p.lambda != lambda) {
        return Err(Error::InvalidArgument("sample on a different curve".into()));
    }
    let charts = SurfaceCharts::new(lambda, norm, Sheet::Plus)?;
    let checks = Symmetry::ALL
        .iter()
        .map(|&s| check_one(&charts, s, samples, tol))
        .collect::<Result<Vec<_>>>()?;
    let passed = checks.iter().all(|c| c.passed);
    Ok(SymmetryReport {
        lambda: lambda.value(),
        tolerance: tol,
        checks,
        passed,
    })
}

/// Which real parameter interval to sample.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RealInterval {
    /// `(0, λ]`
    LineNear,
    /// `(-∞, -1/λ]`
    LineFar,
    /// `[-1/λ, 0)`
    PlanarNear,
    /// `[λ, ∞)`
    PlanarFar,
}

impl RealInterval {
    pub const ALL: [RealInterval; 4] = [
        RealInterval::LineNear,
        RealInterval::LineFar,
        RealInterval::PlanarNear,
        RealInterval::PlanarFar,
    ];

    /// `n` log-spaced parameters spanning `decades` decades from the branch point.
    pub fn samples(self, lambda: Lambda, n: usize, decades: f64) -> Vec<f64> {
        let l = lambda.value();
        (0..n)
            .map(|k| {
                let f = 10f64.powf(decades * k as f64 / (n - 1).max(1) as f64);
                match self {
                    RealInterval::LineNear => l / f,
                    RealInterval::LineFar => -f / l,
                    RealInterval::PlanarNear => -1.0 / (l * f),
                    RealInterval::PlanarFar => l * f,
                }
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FixedCurveCheck {
    pub interval: RealInterval,
    /// Largest distance from the fitted line (lines) or from the mean `x2`
    /// plane (planar geodesics).
    pub residual: f64,
    /// Diameter of the sampled image.
    pub extent: f64,
    /// Unit direction of the fitted line (lines only, otherwise zero).
    pub direction: Vec3,
}

fn image_of(lambda: Lambda, norm: &Normalization, ts: &[f64]) -> Result<Vec<Vec3>> {
    let charts = SurfaceCharts::new(lambda, norm, Sheet::Plus)?;
    ts.iter()
        .map(|&t| charts.position(Piece::UpperBase, Complex64::new(t, 0.0)))
        .collect()
}

fn extent(points: &[Vec3]) -> f64 {
    let mut m = 0.0f64;
    for a in points {
        for b in points {
            m = m.max(dist(*a, *b));
        }
    }
    m
}

/// Least-squares line through `points`: returns (centroid, unit direction, max distance).
pub fn fit_line_3d(points: &[Vec3]) -> (Vec3, Vec3, f64) {
    let n = points.len() as f64;
    let mut c = Vector3::zeros();
    for p in points {
        c += Vector3::new(p[0], p[1], p[2]);
    }
    c /= n;
    let mut cov = Matrix3::zeros();
    for p in points {
        let d = Vector3::new(p[0], p[1], p[2]) - c;
        cov += d * d.transpose();
    }
    let eig = SymmetricEigen::new(cov);
    let k = eig.eigenvalues.imax();
    let dir = eig.eigenvectors.column(k).normalize();
    let residual = points
        .iter()
        .map(|p| {
            let d = Vector3::new(p[0], p[1], p[2]) - c;
            (d - dir * dir.dot(&d)).norm()
        })
        .fold(0.0, f64::max);
    ([c.x, c.y, c.z], [dir.x, dir.y, dir.z], residual)
}

/// Colinearity of the images of the two line intervals.
pub fn line_colinearity(lambda: Lambda, norm: &Normalization, n: usize) -> Result<[FixedCurveCheck; 2]> {
    let one = |interval: RealInterval| -> Result<FixedCurveCheck> {
        let pts = image_of(lambda, norm, &interval.samples(lambda, n, 3.0))?;
        let (_, direction, residual) = fit_line_3d(&pts);
        Ok(FixedCurveCheck {
            interval,
            residual,
            extent: extent(&pts),
            direction,
        })
    };
    Ok([one(RealInterval::LineNear)?, one(RealInterval::LineFar)?])
}

/// Coplanarity of the images of the two planar intervals in a plane `x2 = const`.
pub fn planar_coplanarity(lambda: Lambda, norm: &Normalization, n: usize) -> Result<[FixedCurveCheck; 2]> {
    let one = |interval: RealInterval| -> Result<FixedCurveCheck> {
        let pts = image_of(lambda, norm, &interval.samples(lambda, n, 3.0))?;
        let mean = pts.iter().map(|p| p[1]).sum::<f64>() / pts.len() as f64;
        let residual = pts.iter().map(|p| (p[1] - mean).abs()).fold(0.0, f64::max);
        Ok(FixedCurveCheck {
            interval,
            residual,
            extent: extent(&pts),
            direction: [0.0; 3],
        })
    };
    Ok([one(RealInterval::PlanarNear)?, one(RealInterval::PlanarFar)?])
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn lam(v: f64) -> Lambda {
        Lambda::new(v).unwrap()
    }

    fn random_samples(lambda: Lambda, n: usize, seed: u64) -> Vec<CurvePoint> {
        let charts = SurfaceCharts::new(lambda, &Normalization::paper(lambda), Sheet::Plus).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n)
            .map(|_| {
                let z = Complex64::from_polar(10f64.powf(rng.gen_range(-1.0..1.0)), rng.gen_range(-3.0..3.0));
                let piece = Piece::ALL[rng.gen_range(0..4)];
                let piece = match (Half::of(z), piece.half()) {
                    (Half::Upper, Half::Lower) => Piece::UpperBase,
                    (Half::Lower, Half::Upper) => Piece::LowerReflected,
                    _ => piece,
                };
                CurvePoint::new(z, charts.chart(piece).w(z), lambda).unwrap()
            })
            .collect()
    }

    #[test]
    fn involutions() {
        let lambda = lam(1.7);
        for p in random_samples(lambda, 10, 1) {
            for s in Symmetry::ALL {
                let q = s.apply(&s.apply(&p));
                assert!((q.z - p.z).norm() < 1e-14 * p.z.norm().max(1.0));
                assert!((q.w - p.w).norm() < 1e-12 * p.w.norm().max(1.0));
                let img = s.apply(&p);
                assert!(CurvePoint::new(img.z, img.w, lambda).is_ok());
            }
        }
    }

    #[test]
    fn random_samples_pass() {
        for l in [0.4, 1.0, 2.5] {
            let lambda = lam(l);
            let rep = check_symmetries(lambda, &Normalization::paper(lambda), &random_samples(lambda, 24, 5), 1e-7).unwrap();
            for c in &rep.checks {
                assert!(c.passed, "lambda {l} {:?}: {}", c.symmetry, c.max_residual);
            }
        }
    }

    #[test]
    fn fixed_points_have_zero_residual() {
        let lambda = lam(2.0);
        let charts = SurfaceCharts::new(lambda, &Normalization::paper(lambda), Sheet::Plus).unwrap();
        let base = charts.chart(Piece::UpperBase);
        let on_line = Complex64::new(1.3, 0.0);
        let p = CurvePoint::new(on_line, base.w(on_line), lambda).unwrap();
        let i = Complex64::i();
        let q = CurvePoint::new(i, base.w(i), lambda).unwrap();
        let rep = check_symmetries(lambda, &Normalization::paper(lambda), &[p, q], 1e-7).unwrap();
        assert!(rep.checks[1].residuals[0] < 1e-12);
        assert!(rep.checks[2].residuals[1] < 1e-12);
        // the reflection plane offset lies in the x2 direction only
        let off = rep.checks[0].offset;
        assert!(off[0].abs() < 1e-12 && off[2].abs() < 1e-12);
    }

    #[test]
    fn literal_normal_map_is_not_a_symmetry_of_this_kind() {
        // (z, w) -> (-1/z, w/z²) has no fixed points: at z = i it sends w to -w.
        let lambda = lam(1.0);
        let i = Complex64::i();
        let w = crate::curve::half_plane_w(i, lambda, Half::Upper);
        let img_w = w / (i * i);
        assert!((img_w + w).norm() < 1e-14);
    }

    #[test]
    fn fixed_curves() {
        for l in [0.3, 1.0, 4.0] {
            let lambda = lam(l);
            let norm = Normalization::paper(lambda);
            for c in line_colinearity(lambda, &norm, 24).unwrap() {
                assert!(c.residual < 1e-7 * c.extent, "lambda {l} {:?}: {} / {}", c.interval, c.residual, c.extent);
                assert!(c.direction[1].abs() > 1.0 - 1e-9);
            }
            for c in planar_coplanarity(lambda, &norm, 24).unwrap() {
                assert!(c.residual < 1e-7, "lambda {l} {:?}: {}", c.interval, c.residual);
            }
        }
    }
}
