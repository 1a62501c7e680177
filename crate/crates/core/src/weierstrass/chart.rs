//! Closed-form charts: the immersion restricted to a closed half-plane of
//! one sheet, using the half-plane branches of `w`.
//!
//! Four pieces cover the surface modulo the translation period:
//!
//! | piece            | half  | `w`      | origin | glued to the base along |
//! |------------------|-------|----------|--------|-------------------------|
//! | `UpperBase`      | upper | `+w_H`   | `1`    |                         |
//! | `LowerReflected` | lower | `+w_L`   | `2λ`   | planar intervals        |
//! | `LowerRotated`   | lower | `-w_L`   | `λ/2`  | line intervals          |
//! | `UpperOpposite`  | upper | `-w_H`   | `λ/2`  | (glued to `LowerReflected`) |
//!
//! Planar intervals are `(-1/λ, 0)` and `(λ, ∞)`; line intervals are
//! `(0, λ)` and `(-∞, -1/λ)`. All signs flip on `Sheet::Minus`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{phi_raw, re_times, Normalization};
use crate::curve::{curve_factors, half_plane_w, sqrt_half, CurvePoint, Half, Lambda, Sheet};
use crate::error::{Error, Result};
use crate::quadrature::{self, Tolerance, Vec3};

/// Relative distance under which an endpoint is treated as a branch point.
const SNAP: f64 = 1e-13;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HalfChart {
    pub lambda: Lambda,
    pub scale: f64,
    pub half: Half,
    pub sign: f64,
    pub origin: f64,
    pub offset: Vec3,
}

#[inline]
fn add(a: Vec3, b: Vec3) -> Vec3 {
    [a[0] + b[0], a[1] + b[1], a[2] + b[2]]
}

impl HalfChart {
    #[inline]
    pub fn w(&self, z: Complex64) -> Complex64 {
        self.sign * half_plane_w(z, self.lambda, self.half)
    }

    pub fn contains(&self, z: Complex64) -> bool {
        match self.half {
            Half::Upper => z.im >= 0.0,
            Half::Lower => z.im <= 0.0,
        }
    }

    /// Immersed position of the chart point over `z`.
    pub fn position(&self, z: Complex64) -> Result<Vec3> {
        let d = self.displacement(Complex64::new(self.origin, 0.0), z)?;
        Ok(add(self.offset, d))
    }

    /// `Re ∫ Φ` from `a` to `b` inside the chart.
    pub fn displacement(&self, a: Complex64, b: Complex64) -> Result<Vec3> {
        if !self.contains(a) || !self.contains(b) {
            return Err(Error::InvalidArgument(format!("{a} -> {b} leaves the {:?} half-plane", self.half)));
        }
        if a == b {
            return Ok([0.0; 3]);
        }
        if a.norm() == 0.0 {
            return Err(Error::SingularPoint(a));
        }
        if b.norm() == 0.0 {
            return Err(Error::SingularPoint(b));
        }
        if a.im == 0.0 && b.im == 0.0 {
            if a.re * b.re < 0.0 {
                let h = (a.re.abs() * b.re.abs()).sqrt();
                let apex = match self.half {
                    Half::Upper => Complex64::new(0.0, h),
                    Half::Lower => Complex64::new(0.0, -h),
                };
                return Ok(add(self.displacement(a, apex)?, self.displacement(apex, b)?));
            }
            return self.real_run(a.re, b.re);
        }
        self.segment(a, b)
    }

    fn real_run(&self, a: f64, b: f64) -> Result<Vec3> {
        let l = self.lambda.value();
        let (lo, hi) = (a.min(b), a.max(b));
        let ka = self.branch_index(Complex64::new(a, 0.0));
        let kb = self.branch_index(Complex64::new(b, 0.0));
        let mut cuts: Vec<f64> = [(1, l), (2, -1.0 / l)]
            .into_iter()
            .filter(|&(k, p)| p > lo && p < hi && ka != Some(k) && kb != Some(k))
            .map(|(_, p)| p)
            .collect();
        if a > b {
            cuts.reverse();
        }
        let mut acc = [0.0; 3];
        let mut from = a;
        for p in cuts.into_iter().chain(std::iter::once(b)) {
            acc = add(acc, self.segment(Complex64::new(from, 0.0), Complex64::new(p, 0.0))?);
            from = p;
        }
        Ok(acc)
    }

    /// 1 for `λ`, 2 for `-1/λ` (index into the curve factors).
    fn branch_index(&self, z: Complex64) -> Option<usize> {
        let l = self.lambda.value();
        if (z - l).norm() <= SNAP * l.max(1.0) {
            Some(1)
        } else if (z + 1.0 / l).norm() <= SNAP * (1.0 / l).max(1.0) {
            Some(2)
        } else {
            None
        }
    }

    fn branch_value(&self, k: usize) -> Complex64 {
        let l = self.lambda.value();
        Complex64::new(if k == 1 { l } else { -1.0 / l }, 0.0)
    }

    fn segment(&self, p: Complex64, q: Complex64) -> Result<Vec3> {
        match (self.branch_index(p), self.branch_index(q)) {
            (Some(i), Some(j)) if i == j => Ok([0.0; 3]),
            (Some(_), Some(_)) => {
                let m = (p + q) * 0.5;
                Ok(add(self.segment(p, m)?, self.segment(m, q)?))
            }
            (Some(k), None) => self.singular(k, q),
            (None, Some(k)) => Ok(self.singular(k, p)?.map(|v| -v)),
            (None, None) => self.regular(p, q),
        }
    }

    /// Straight segment, each half parametrized from its own endpoint so that
    /// `z` keeps full relative precision near either end.
    fn regular(&self, p: Complex64, q: Complex64) -> Result<Vec3> {
        let dz = q - p;
        let half = |base: Complex64, dir: Complex64| {
            quadrature::integrate(
                |s| {
                    let z = base + dir * s;
                    re_times(&phi_raw(z, self.w(z), self.scale), dz)
                },
                0.0,
                0.5,
                Tolerance::per_length(0.5 * dz.norm()),
            )
        };
        Ok(add(half(p, dz)?, half(q, -dz)?))
    }

    /// Integral from the branch point with factor index `k` to `e`. The half
    /// next to the branch point uses `z = b + u^2 (e - b)` so the square-root
    /// singularity cancels.
    fn singular(&self, k: usize, e: Complex64) -> Result<Vec3> {
        let b = self.branch_value(k);
        let m = b + (e - b) * 0.5;
        Ok(add(self.substituted(k, m)?, self.regular(m, e)?))
    }

    fn substituted(&self, k: usize, e: Complex64) -> Result<Vec3> {
        let b = self.branch_value(k);
        let delta = e - b;
        let root = self.sign * sqrt_half(delta, self.half);
        let i = Complex64::i();
        quadrature::integrate(
            |u| {
                let z = b + delta * (u * u);
                let f = curve_factors(z, self.lambda);
                let mut w_red = root;
                for (j, fj) in f.iter().enumerate() {
                    if j != k {
                        w_red *= sqrt_half(*fj, self.half);
                    }
                }
                let c = 2.0 * self.scale * delta / (z * w_red);
                let z2 = z * z;
                [(c * (1.0 - z2)).re, (c * i * (1.0 + z2)).re, (c * 2.0 * z).re]
            },
            0.0,
            1.0,
            Tolerance::per_length(delta.norm()),
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Piece {
    UpperBase,
    LowerReflected,
    LowerRotated,
    UpperOpposite,
}

impl Piece {
    pub const ALL: [Piece; 4] = [
        Piece::UpperBase,
        Piece::LowerReflected,
        Piece::LowerRotated,
        Piece::UpperOpposite,
    ];

    pub fn half(self) -> Half {
        match self {
            Piece::UpperBase | Piece::UpperOpposite => Half::Upper,
            Piece::LowerReflected | Piece::LowerRotated => Half::Lower,
        }
    }

    fn index(self) -> usize {
        self as usize
    }
}

/// The four half-plane charts of one surface.
#[derive(Debug, Clone, PartialEq)]
pub struct SurfaceCharts {
    pub lambda: Lambda,
    pub sheet: Sheet,
    charts: [HalfChart; 4],
}

fn base_chart(lambda: Lambda, scale: f64, sheet: Sheet) -> HalfChart {
    HalfChart {
        lambda,
        scale,
        half: Half::Upper,
        sign: sheet.sign(),
        origin: 1.0,
        offset: [0.0; 3],
    }
}

impl SurfaceCharts {
    pub fn new(lambda: Lambda, norm: &Normalization, sheet: Sheet) -> Result<Self> {
        let scale = norm.scale();
        let l = lambda.value();
        let s = sheet.sign();
        let (t_plane, t_line) = (2.0 * l, 0.5 * l);
        let base = base_chart(lambda, scale, sheet);
        let reflected = HalfChart {
            half: Half::Lower,
            origin: t_plane,
            offset: base.position(Complex64::new(t_plane, 0.0))?,
            ..base
        };
        let rotated = HalfChart {
            half: Half::Lower,
            sign: -s,
            origin: t_line,
            offset: base.position(Complex64::new(t_line, 0.0))?,
            ..base
        };
        let opposite = HalfChart {
            sign: -s,
            origin: t_line,
            offset: reflected.position(Complex64::new(t_line, 0.0))?,
            ..base
        };
        Ok(SurfaceCharts {
            lambda,
            sheet,
            charts: [base, reflected, rotated, opposite],
        })
    }

    pub fn chart(&self, piece: Piece) -> &HalfChart {
        &self.charts[piece.index()]
    }

    /// Gluing point on the planar interval `(λ, ∞)`.
    pub fn t_plane(&self) -> f64 {
        2.0 * self.lambda.value()
    }

    /// Gluing point on the line interval `(0, λ)`.
    pub fn t_line(&self) -> f64 {
        0.5 * self.lambda.value()
    }

    /// The piece whose `w` branch agrees with `p.w`.
    pub fn locate(&self, p: &CurvePoint) -> Piece {
        let (plus, minus) = match Half::of(p.z) {
            Half::Upper => (Piece::UpperBase, Piece::UpperOpposite),
            Half::Lower => (Piece::LowerReflected, Piece::LowerRotated),
        };
        let w = self.chart(plus).w(p.z);
        if (p.w - w).norm_sqr() <= (p.w + w).norm_sqr() {
            plus
        } else {
            minus
        }
    }

    pub fn position(&self, piece: Piece, z: Complex64) -> Result<Vec3> {
        self.chart(piece).position(z)
    }

    pub fn position_of(&self, p: &CurvePoint) -> Result<Vec3> {
        self.position(self.locate(p), p.z)
    }
}

/// `x3(-1/λ) - x3(λ)` on the base chart: vertical distance between the two
/// planar ends, measured along `λ -> i -> -1/λ`.
pub fn planar_end_gap(lambda: Lambda, scale: f64) -> Result<f64> {
    let l = lambda.value();
    let base = base_chart(lambda, scale, Sheet::Plus);
    let d = base.displacement(Complex64::new(l, 0.0), Complex64::new(-1.0 / l, 0.0))?;
    Ok(d[2])
}

/// Heights `(h0, h∞)` of the planar ends over `z = λ` and `z = -1/λ`.
pub fn end_heights(lambda: Lambda, norm: &Normalization, sheet: Sheet) -> Result<(f64, f64)> {
    let base = base_chart(lambda, norm.scale(), sheet);
    let l = lambda.value();
    let h0 = base.position(Complex64::new(l, 0.0))?[2];
    let hi = base.position(Complex64::new(-1.0 / l, 0.0))?[2];
    Ok((h0, hi))
}
