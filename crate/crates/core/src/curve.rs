//! The elliptic curve `w^2 = z (z - λ) (z + 1/λ)` viewed as a branched
//! double cover of the punctured `z`-plane.
//!
//! Two ways of fixing the sign of `w` are provided:
//!
//! * [`continue_sheet`] follows `w` along an arbitrary polyline by
//!   nearest-root continuation with adaptive bisection;
//! * [`half_plane_w`] gives a closed-form branch on a closed half-plane.
//!   All finite branch points are real, so each open half-plane carries two
//!   single-valued branches and their boundary values extend continuously
//!   to the real axis.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance of the curve equation, relative to `(1 + |z|)^3`.
pub const CURVE_EPS: f64 = 1e-10;

/// Maximum number of bisections performed on a single path segment.
pub const MAX_BISECTION_DEPTH: u32 = 40;

/// The family parameter λ > 0.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct Lambda(f64);

impl Lambda {
    pub fn new(value: f64) -> Result<Self> {
        if value.is_finite() && value > 0.0 {
            Ok(Lambda(value))
        } else {
            Err(Error::InvalidLambda(value))
        }
    }

    #[inline]
    pub fn value(self) -> f64 {
        self.0
    }

    /// The conjugate parameter 1/λ.
    pub fn recip(self) -> Lambda {
        Lambda(1.0 / self.0)
    }

    /// The branch point `-1/λ`.
    #[inline]
    pub fn neg_recip(self) -> f64 {
        -1.0 / self.0
    }
}

impl TryFrom<f64> for Lambda {
    type Error = Error;
    fn try_from(v: f64) -> Result<Self> {
        Lambda::new(v)
    }
}

impl From<Lambda> for f64 {
    fn from(l: Lambda) -> f64 {
        l.0
    }
}

/// Right-hand side of the curve equation.
#[inline]
pub fn curve_rhs(z: Complex64, lambda: Lambda) -> Complex64 {
    let l = lambda.value();
    z * (z - l) * (z + 1.0 / l)
}

/// Finite branch points of the cover; the fourth one sits at infinity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BranchPoints {
    pub finite: [Complex64; 3],
    pub at_infinity: bool,
}

pub fn branch_points(lambda: Lambda) -> BranchPoints {
    let l = lambda.value();
    BranchPoints {
        finite: [
            Complex64::new(0.0, 0.0),
            Complex64::new(l, 0.0),
            Complex64::new(-1.0 / l, 0.0),
        ],
        at_infinity: true,
    }
}

/// Exclusion radius around finite branch points for continued paths.
pub fn branch_delta(lambda: Lambda) -> f64 {
    let l = lambda.value();
    1e-6 * l.min(1.0 / l)
}

/// Distance from `z` to the nearest finite branch point, and that point.
pub fn nearest_branch(z: Complex64, lambda: Lambda) -> (f64, Complex64) {
    branch_points(lambda)
        .finite
        .iter()
        .map(|&b| ((z - b).norm(), b))
        .fold((f64::INFINITY, Complex64::new(0.0, 0.0)), |acc, x| {
            if x.0 < acc.0 {
                x
            } else {
                acc
            }
        })
}

/// Which of the two sheets the base point `z0 = 1` is taken on.
///
/// `Plus` means `w(1)` is the principal square root of the curve polynomial
/// at 1. For λ = 1 the base point is a branch point; there `Plus` selects the
/// branch behaving like `+sqrt(2 (z - 1))` in the upper half-plane.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Sheet {
    #[default]
    Plus,
    Minus,
}

impl Sheet {
    #[inline]
    pub fn sign(self) -> f64 {
        match self {
            Sheet::Plus => 1.0,
            Sheet::Minus => -1.0,
        }
    }

    pub fn flipped(self) -> Sheet {
        match self {
            Sheet::Plus => Sheet::Minus,
            Sheet::Minus => Sheet::Plus,
        }
    }
}

/// A point `(z, w)` on the affine curve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub z: Complex64,
    pub w: Complex64,
    pub lambda: Lambda,
}

impl CurvePoint {
    pub fn new(z: Complex64, w: Complex64, lambda: Lambda) -> Result<Self> {
        let residual = curve_residual(z, w, lambda);
        if !(residual <= CURVE_EPS * (1.0 + z.norm()).powi(3)) {
            return Err(Error::OffCurve { z, residual });
        }
        Ok(CurvePoint { z, w, lambda })
    }

    /// The point over `z` whose `w` is closest to `hint`.
    pub fn nearest(z: Complex64, hint: Complex64, lambda: Lambda) -> Self {
        CurvePoint {
            z,
            w: nearest_root(curve_rhs(z, lambda), hint),
            lambda,
        }
    }

    /// The base point `z0 = 1` on the requested sheet.
    pub fn base(lambda: Lambda, sheet: Sheet) -> Self {
        let z = Complex64::new(1.0, 0.0);
        CurvePoint {
            z,
            w: sheet.sign() * curve_rhs(z, lambda).sqrt(),
            lambda,
        }
    }

    /// The other point over the same `z`.
    pub fn sheet_partner(&self) -> Self {
        CurvePoint { w: -self.w, ..*self }
    }
}

#[inline]
pub fn curve_residual(z: Complex64, w: Complex64, lambda: Lambda) -> f64 {
    (w * w - curve_rhs(z, lambda)).norm()
}

/// The square root of `value` closest to `hint`.
#[inline]
pub fn nearest_root(value: Complex64, hint: Complex64) -> Complex64 {
    let r = value.sqrt();
    if (r - hint).norm_sqr() <= (r + hint).norm_sqr() {
        r
    } else {
        -r
    }
}

/// Open half-plane (with its real boundary) used for closed-form branches.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Half {
    Upper,
    Lower,
}

impl Half {
    pub fn of(z: Complex64) -> Half {
        if z.im >= 0.0 {
            Half::Upper
        } else {
            Half::Lower
        }
    }
}

const ROT_PI_4: Complex64 = Complex64 {
    re: std::f64::consts::FRAC_1_SQRT_2,
    im: std::f64::consts::FRAC_1_SQRT_2,
};

/// Square root with its cut along the negative imaginary axis, so it is
/// continuous on the closed upper half-plane (`sqrt(-1) = i`).
#[inline]
pub fn sqrt_upper(z: Complex64) -> Complex64 {
    // z * (-i), then rotate back by pi/4.
    Complex64::new(z.im, -z.re).sqrt() * ROT_PI_4
}

/// Square root with its cut along the positive imaginary axis, so it is
/// continuous on the closed lower half-plane (`sqrt(-1) = -i`).
#[inline]
pub fn sqrt_lower(z: Complex64) -> Complex64 {
    Complex64::new(-z.im, z.re).sqrt() * ROT_PI_4.conj()
}

#[inline]
pub fn sqrt_half(z: Complex64, half: Half) -> Complex64 {
    match half {
        Half::Upper => sqrt_upper(z),
        Half::Lower => sqrt_lower(z),
    }
}

/// The three linear factors `z`, `z - λ`, `z + 1/λ` of the curve polynomial.
#[inline]
pub fn curve_factors(z: Complex64, lambda: Lambda) -> [Complex64; 3] {
    let l = lambda.value();
    [z, z - l, z + 1.0 / l]
}

/// Product of half-plane square roots of the three factors. On the upper
/// half-plane this is the branch that takes the principal value at `z = 1`
/// (for λ ≠ 1); on the lower half-plane it is its mirror image.
#[inline]
pub fn half_plane_w(z: Complex64, lambda: Lambda, half: Half) -> Complex64 {
    let [a, b, c] = curve_factors(z, lambda);
    sqrt_half(a, half) * sqrt_half(b, half) * sqrt_half(c, half)
}

/// A polyline in the `z`-plane carrying continuously continued `w` values.
#[derive(Debug, Clone, PartialEq)]
pub struct SheetedPath {
    pub vertices: Vec<Complex64>,
    pub w_values: Vec<Complex64>,
    pub lambda: Lambda,
    /// Index into `vertices` of every vertex of the input polyline, so callers
    /// can read partial results at the points they asked for.
    pub anchors: Vec<usize>,
}

impl SheetedPath {
    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn start(&self) -> CurvePoint {
        CurvePoint {
            z: self.vertices[0],
            w: self.w_values[0],
            lambda: self.lambda,
        }
    }

    pub fn end(&self) -> CurvePoint {
        let n = self.vertices.len() - 1;
        CurvePoint {
            z: self.vertices[n],
            w: self.w_values[n],
            lambda: self.lambda,
        }
    }

    /// The same path traversed backwards.
    pub fn reversed(&self) -> SheetedPath {
        let n = self.vertices.len();
        let mut vertices = self.vertices.clone();
        let mut w_values = self.w_values.clone();
        vertices.reverse();
        w_values.reverse();
        let mut anchors: Vec<usize> = self.anchors.iter().map(|&i| n - 1 - i).collect();
        anchors.reverse();
        SheetedPath {
            vertices,
            w_values,
            lambda: self.lambda,
            anchors,
        }
    }
}

fn check_clearance(z: Complex64, lambda: Lambda) -> Result<f64> {
    let delta = branch_delta(lambda);
    let (d, b) = nearest_branch(z, lambda);
    if d < delta {
        return Err(Error::BranchTooClose {
            z,
            branch: b,
            delta,
        });
    }
    Ok(d)
}

/// Continue `w` from `w_start` along the polyline `path_vertices`.
///
/// Segments are bisected until each one is shorter than half the distance
/// from its ends to the nearest branch point and the nearest-root choice is
/// unambiguous (`|w1 - w0| < |w1 + w0| / 2`).
pub fn continue_sheet(
    path_vertices: &[Complex64],
    w_start: Complex64,
    lambda: Lambda,
) -> Result<SheetedPath> {
    let Some(&z0) = path_vertices.first() else {
        return Err(Error::InvalidArgument("empty path".into()));
    };
    check_clearance(z0, lambda)?;
    let residual = curve_residual(z0, w_start, lambda);
    if !(residual <= CURVE_EPS * (1.0 + z0.norm()).powi(3)) {
        return Err(Error::OffCurve { z: z0, residual });
    }

    let mut vertices = vec![z0];
    let mut w_values = vec![w_start];
    let mut anchors = vec![0];
    for &z in &path_vertices[1..] {
        let a = *vertices.last().unwrap();
        let wa = *w_values.last().unwrap();
        push_segment(a, wa, z, lambda, 0, &mut vertices, &mut w_values)?;
        anchors.push(vertices.len() - 1);
    }
    Ok(SheetedPath {
        vertices,
        w_values,
        lambda,
        anchors,
    })
}

fn push_segment(
    a: Complex64,
    wa: Complex64,
    b: Complex64,
    lambda: Lambda,
    depth: u32,
    vertices: &mut Vec<Complex64>,
    w_values: &mut Vec<Complex64>,
) -> Result<()> {
    if a == b {
        return Ok(());
    }
    let db = check_clearance(b, lambda)?;
    let (da, _) = nearest_branch(a, lambda);
    let wb = nearest_root(curve_rhs(b, lambda), wa);
    let short = (b - a).norm() <= 0.5 * da.min(db);
    let unambiguous = (wb - wa).norm() < 0.5 * (wb + wa).norm();
    if short && unambiguous {
        vertices.push(b);
        w_values.push(wb);
        return Ok(());
    }
    if depth >= MAX_BISECTION_DEPTH {
        return Err(Error::AmbiguousSheet { z: b, depth });
    }
    let mid = (a + b) * 0.5;
    check_clearance(mid, lambda)?;
    push_segment(a, wa, mid, lambda, depth + 1, vertices, w_values)?;
    let am = *vertices.last().unwrap();
    let wm = *w_values.last().unwrap();
    push_segment(am, wm, b, lambda, depth + 1, vertices, w_values)
}

/// Closed polyline approximating the circle `center + radius e^{it}`,
/// starting at angle `start` and running counterclockwise.
pub fn circle_polyline(center: Complex64, radius: f64, start: f64, n: usize) -> Vec<Complex64> {
    let mut v: Vec<Complex64> = (0..n)
        .map(|k| {
            let t = start + std::f64::consts::TAU * k as f64 / n as f64;
            center + Complex64::from_polar(radius, t)
        })
        .collect();
    v.push(v[0]);
    v
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn lam(v: f64) -> Lambda {
        Lambda::new(v).unwrap()
    }

    #[test]
    fn rhs_examples() {
        assert_eq!(curve_rhs(c(2.0, 0.0), lam(2.0)), c(0.0, 0.0));
        assert_relative_eq!(curve_rhs(c(1.0, 0.0), lam(2.0)).re, -1.5);
        let v = curve_rhs(c(0.0, 1.0), lam(1.0));
        assert!((v - c(0.0, -2.0)).norm() < 1e-15);
    }

    #[test]
    fn branch_point_sets() {
        let b = branch_points(lam(2.0));
        assert_eq!(b.finite, [c(0.0, 0.0), c(2.0, 0.0), c(-0.5, 0.0)]);
        assert!(b.at_infinity);
        assert_eq!(branch_points(lam(1.0)).finite[2], c(-1.0, 0.0));
        let b = branch_points(lam(0.1));
        assert_relative_eq!(b.finite[2].re, -10.0);
    }

    #[test]
    fn lambda_validation() {
        assert!(Lambda::new(0.0).is_err());
        assert!(Lambda::new(-1.0).is_err());
        assert!(Lambda::new(f64::NAN).is_err());
        assert!(Lambda::new(f64::INFINITY).is_err());
    }

    #[test]
    fn half_plane_roots() {
        assert!((sqrt_upper(c(-4.0, 0.0)) - c(0.0, 2.0)).norm() < 1e-15);
        assert!((sqrt_lower(c(-4.0, 0.0)) - c(0.0, -2.0)).norm() < 1e-15);
        assert!((sqrt_upper(c(9.0, 0.0)) - c(3.0, 0.0)).norm() < 1e-15);
        assert!((sqrt_lower(c(9.0, 0.0)) - c(3.0, 0.0)).norm() < 1e-15);
        // conjugate symmetry
        let z = c(-0.3, 0.7);
        assert!((sqrt_lower(z.conj()) - sqrt_upper(z).conj()).norm() < 1e-15);
    }

    #[test]
    fn half_plane_branch_matches_base_sheet() {
        for l in [0.2, 0.9, 1.3, 7.0] {
            let lambda = lam(l);
            let w = half_plane_w(c(1.0, 0.0), lambda, Half::Upper);
            let base = CurvePoint::base(lambda, Sheet::Plus);
            assert!((w - base.w).norm() < 1e-14, "lambda {l}");
        }
    }

    #[test]
    fn loop_without_branch_points_closes() {
        let lambda = lam(2.0);
        let loop_ = circle_polyline(c(1.0, 1.0), 0.5, 0.0, 64);
        let w0 = curve_rhs(loop_[0], lambda).sqrt();
        let p = continue_sheet(&loop_, w0, lambda).unwrap();
        assert!((p.end().w - w0).norm() < 1e-9);
    }

    #[test]
    fn loop_around_one_branch_point_flips() {
        let lambda = lam(2.0);
        let loop_ = circle_polyline(c(2.0, 0.0), 0.5, 0.0, 64);
        let w0 = curve_rhs(loop_[0], lambda).sqrt();
        let p = continue_sheet(&loop_, w0, lambda).unwrap();
        assert!((p.end().w + w0).norm() < 1e-9);
    }

    #[test]
    fn loop_around_two_branch_points_closes() {
        for l in [0.3, 1.0, 4.0] {
            let lambda = lam(l);
            let center = c(-0.5 / l, 0.0);
            let radius = 0.5 * (l + 1.0 / l);
            let loop_ = circle_polyline(center, radius, 0.0, 128);
            let w0 = curve_rhs(loop_[0], lambda).sqrt();
            let p = continue_sheet(&loop_, w0, lambda).unwrap();
            assert!((p.end().w - w0).norm() < 1e-9 * w0.norm().max(1.0));
        }
    }

    #[test]
    fn flip_parity_matches_enclosed_branch_count() {
        let lambda = lam(2.0);
        // Loops enclosing each subset of {0, 2, -0.5}: ellipses chosen by hand.
        let cases: [(Complex64, f64, usize); 7] = [
            (c(0.0, 0.0), 0.2, 1),
            (c(2.0, 0.0), 0.2, 1),
            (c(-0.5, 0.0), 0.2, 1),
            (c(1.0, 0.0), 1.2, 2),
            (c(-0.25, 0.0), 0.4, 2),
            (c(0.75, 0.0), 1.4, 3),
            (c(0.75, 5.0), 1.0, 0),
        ];
        for (center, r, count) in cases {
            let loop_ = circle_polyline(center, r, 0.3, 96);
            let w0 = curve_rhs(loop_[0], lambda).sqrt();
            let p = continue_sheet(&loop_, w0, lambda).unwrap();
            let expected = if count % 2 == 0 { w0 } else { -w0 };
            assert!((p.end().w - expected).norm() < 1e-9, "center {center}");
        }
        // {λ, -1/λ} without 0 needs a non-circular loop; use a polygon around
        // the real axis that dodges 0 from above.
        let poly = vec![
            c(-0.8, -0.3),
            c(2.4, -0.3),
            c(2.4, 0.3),
            c(0.2, 0.3),
            c(0.2, -0.1),
            c(-0.2, -0.1),
            c(-0.2, 0.3),
            c(-0.8, 0.3),
            c(-0.8, -0.3),
        ];
        let w0 = curve_rhs(poly[0], lambda).sqrt();
        let p = continue_sheet(&poly, w0, lambda).unwrap();
        assert!((p.end().w - w0).norm() < 1e-9);
    }

    #[test]
    fn too_close_to_branch_point() {
        let lambda = lam(2.0);
        let path = [c(1.0, 0.0), c(2.0, 1e-9)];
        let w0 = curve_rhs(path[0], lambda).sqrt();
        assert!(matches!(
            continue_sheet(&path, w0, lambda),
            Err(Error::BranchTooClose { .. })
        ));
    }

    #[test]
    fn anchors_point_at_input_vertices() {
        let lambda = lam(0.5);
        let path = [c(1.0, 0.0), c(0.0, 1.0), c(-3.0, 1.0)];
        let w0 = curve_rhs(path[0], lambda).sqrt();
        let p = continue_sheet(&path, w0, lambda).unwrap();
        for (k, &i) in p.anchors.iter().enumerate() {
            assert_eq!(p.vertices[i], path[k]);
        }
        let r = p.reversed();
        assert_eq!(r.vertices[r.anchors[0]], path[2]);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(48))]

            #[test]
            fn sheet_involution(l in 0.1f64..10.0, cx in -3.0f64..3.0, cy in 0.5f64..3.0, r in 0.2f64..4.0) {
                let lambda = lam(l);
                let center = c(cx, cy);
                let path: Vec<_> = circle_polyline(center, r, 0.1, 48);
                if path.iter().any(|&z| nearest_branch(z, lambda).0 < 1e-3) {
                    return Ok(());
                }
                let w0 = curve_rhs(path[0], lambda).sqrt();
                let p = continue_sheet(&path, w0, lambda).unwrap();
                let q = continue_sheet(&path, -w0, lambda).unwrap();
                prop_assert_eq!(p.vertices.len(), q.vertices.len());
                for (a, b) in p.w_values.iter().zip(&q.w_values) {
                    prop_assert!((a + b).norm() <= 1e-12 * a.norm().max(1.0));
                }
            }

            #[test]
            fn refinement_stability(l in 0.1f64..10.0, ax in -3.0f64..3.0, ay in 0.2f64..3.0, bx in -3.0f64..3.0, by in -3.0f64..3.0) {
                let lambda = lam(l);
                let a = c(ax, ay);
                let b = c(bx, by);
                let coarse = [c(1.0, 0.0), a, b];
                let mut fine = vec![c(1.0, 0.0)];
                for w in coarse.windows(2) {
                    fine.push((w[0] + w[1]) * 0.5);
                    fine.push(w[1]);
                }
                if fine.iter().any(|&z| nearest_branch(z, lambda).0 < 1e-2) {
                    return Ok(());
                }
                let w0 = curve_rhs(coarse[0], lambda).sqrt();
                let (Ok(p), Ok(q)) = (continue_sheet(&coarse, w0, lambda), continue_sheet(&fine, w0, lambda)) else {
                    return Ok(());
                };
                let (x, y) = (p.end().w, q.end().w);
                prop_assert!((x - y).norm() <= 1e-9 * x.norm().max(1e-300));
            }
        }
    }
}
