//! Horizontal slices of the surface: circle and line fits, level sets and
//! summary metrics of the foliation.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector, Matrix2, SymmetricEigen, Vector2};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::curve::{Lambda, Sheet};
use crate::error::{Error, Result};
use crate::quadrature::Vec3;
use crate::weierstrass::chart::end_heights;
use crate::weierstrass::{Normalization, Piece, SurfaceCharts};

/// Fewest points a slice must contain to be fitted.
pub const MIN_SLICE_POINTS: usize = 16;

/// Radius above which a slice may be classified as a line.
pub const LINE_RADIUS: f64 = 1e6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SliceKind {
    Circle,
    Line,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FoliationSlice {
    pub height: f64,
    pub kind: SliceKind,
    pub center: Option<[f64; 2]>,
    pub radius: Option<f64>,
    pub residual: f64,
    pub points: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CircleFit {
    pub center: [f64; 2],
    pub radius: f64,
    /// Largest `| |p - c| - r |` over the points.
    pub residual: f64,
}

/// Algebraic (Kåsa) least-squares circle.
pub fn fit_circle(points: &[[f64; 2]]) -> Option<CircleFit> {
    let n = points.len();
    if n < 3 {
        return None;
    }
    let mx = points.iter().map(|p| p[0]).sum::<f64>() / n as f64;
    let my = points.iter().map(|p| p[1]).sum::<f64>() / n as f64;
    let scale = points
        .iter()
        .map(|p| (p[0] - mx).hypot(p[1] - my))
        .fold(0.0, f64::max)
        .max(f64::MIN_POSITIVE);
    let a = DMatrix::from_fn(n, 3, |i, j| match j {
        0 => (points[i][0] - mx) / scale,
        1 => (points[i][1] - my) / scale,
        _ => 1.0,
    });
    let b = DVector::from_fn(n, |i, _| {
        let (x, y) = ((points[i][0] - mx) / scale, (points[i][1] - my) / scale);
        -(x * x + y * y)
    });
    let svd = a.svd(true, true);
    let (smax, smin) = (svd.singular_values.max(), svd.singular_values.min());
    // Collinear points: the best circle has unbounded radius.
    if !(smin > 1e-12 * smax) {
        return None;
    }
    let sol = svd.solve(&b, 1e-14).ok()?;
    let (cx, cy) = (-0.5 * sol[0], -0.5 * sol[1]);
    let r2 = cx * cx + cy * cy - sol[2];
    if !(r2 > 0.0) || !r2.is_finite() {
        return None;
    }
    let center = [mx + cx * scale, my + cy * scale];
    let radius = r2.sqrt() * scale;
    let residual = points
        .iter()
        .map(|p| ((p[0] - center[0]).hypot(p[1] - center[1]) - radius).abs())
        .fold(0.0, f64::max);
    Some(CircleFit { center, radius, residual })
}

/// Principal-axis line fit; returns the largest distance to the line.
pub fn fit_line(points: &[[f64; 2]]) -> f64 {
    let n = points.len() as f64;
    let c = points.iter().fold(Vector2::zeros(), |a, p| a + Vector2::new(p[0], p[1])) / n;
    let mut cov = Matrix2::zeros();
    for p in points {
        let d = Vector2::new(p[0], p[1]) - c;
        cov += d * d.transpose();
    }
    let eig = SymmetricEigen::new(cov);
    let dir = eig.eigenvectors.column(eig.eigenvalues.imax()).normalize();
    points
        .iter()
        .map(|p| {
            let d = Vector2::new(p[0], p[1]) - c;
            (d - dir * dir.dot(&d)).norm()
        })
        .fold(0.0, f64::max)
}

/// Fit and classify one horizontal slice.
pub fn classify_slice(height: f64, points: &[[f64; 2]]) -> Result<FoliationSlice> {
    if points.len() < MIN_SLICE_POINTS {
        return Err(Error::InsufficientSlicePoints {
            height,
            found: points.len(),
            needed: MIN_SLICE_POINTS,
        });
    }
    let line = fit_line(points);
    let circle = fit_circle(points);
    let circle_res = circle.map_or(f64::INFINITY, |c| c.residual);
    let radius = circle.map_or(f64::INFINITY, |c| c.radius);
    if line < circle_res && radius > LINE_RADIUS {
        Ok(FoliationSlice {
            height,
            kind: SliceKind::Line,
            center: None,
            radius: None,
            residual: line,
            points: points.len(),
        })
    } else {
        let c = circle.ok_or_else(|| Error::InvalidArgument(format!("no circle fits slice at {height}")))?;
        Ok(FoliationSlice {
            height,
            kind: SliceKind::Circle,
            center: Some(c.center),
            radius: Some(c.radius),
            residual: c.residual,
            points: points.len(),
        })
    }
}

/// Slice arbitrary immersed samples: points within `band` of each height.
pub fn foliation_slices(points: &[Vec3], heights: &[f64], band: f64) -> Result<Vec<FoliationSlice>> {
    heights
        .par_iter()
        .map(|&h| {
            let sel: Vec<[f64; 2]> = points
                .iter()
                .filter(|p| (p[2] - h).abs() <= band)
                .map(|p| [p[0], p[1]])
                .collect();
            classify_slice(h, &sel)
        })
        .collect()
}

#[derive(Debug, Clone)]
struct Ray {
    piece: Piece,
    theta: f64,
    rho: Vec<f64>,
    x: Vec<Vec3>,
}

/// Exact level sets `x3 = h` traced along rays from the end at `z = 0` to the
/// end at `z = ∞`: upper rays on the base piece, lower rays on its mirror.
#[derive(Debug, Clone)]
pub struct LevelSetSampler {
    charts: SurfaceCharts,
    rays: Vec<Ray>,
    pub end_heights: (f64, f64),
}

/// Radial samples per decade along each ray.
const PER_DECADE: f64 = 16.0;

impl LevelSetSampler {
    pub fn new(lambda: Lambda, norm: &Normalization, sheet: Sheet, rays_per_half: usize) -> Result<Self> {
        if rays_per_half == 0 {
            return Err(Error::InvalidArgument("need at least one ray".into()));
        }
        let charts = SurfaceCharts::new(lambda, norm, sheet)?;
        let l = lambda.value();
        let (lo, hi) = (1e-8 * l.min(1.0 / l), 1e8 * l.max(1.0 / l));
        let n = ((hi / lo).log10() * PER_DECADE).ceil() as usize + 1;
        let rho: Vec<f64> = (0..n)
            .map(|k| lo * (hi / lo).powf(k as f64 / (n - 1) as f64))
            .collect();
        let specs: Vec<(Piece, f64)> = (0..rays_per_half)
            .flat_map(|k| {
                let t = PI * (k as f64 + 0.5) / rays_per_half as f64;
                [(Piece::UpperBase, t), (Piece::LowerReflected, -t)]
            })
            .collect();
        let rays = specs
            .into_par_iter()
            .map(|(piece, theta)| {
                let chart = charts.chart(piece);
                let mut x = Vec::with_capacity(rho.len());
                let mut prev = Complex64::from_polar(rho[0], theta);
                x.push(chart.position(prev)?);
                for &r in &rho[1..] {
                    let z = Complex64::from_polar(r, theta);
                    let d = chart.displacement(prev, z)?;
                    let last: Vec3 = *x.last().unwrap();
                    x.push([last[0] + d[0], last[1] + d[1], last[2] + d[2]]);
                    prev = z;
                }
                Ok(Ray {
                    piece,
                    theta,
                    rho: rho.clone(),
                    x,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let end_heights = end_heights(lambda, norm, sheet)?;
        Ok(LevelSetSampler {
            charts,
            rays,
            end_heights,
        })
    }

    pub fn ray_count(&self) -> usize {
        self.rays.len()
    }

    fn crossing(&self, ray: &Ray, h: f64) -> Result<Option<Vec3>> {
        let f = |x: &Vec3| x[2] - h;
        let Some(k) = (0..ray.x.len() - 1).find(|&k| f(&ray.x[k]) * f(&ray.x[k + 1]) <= 0.0) else {
            return Ok(None);
        };
        let chart = self.charts.chart(ray.piece);
        let za = Complex64::from_polar(ray.rho[k], ray.theta);
        let xa = ray.x[k];
        let at = |u: f64| -> Result<Vec3> {
            let d = chart.displacement(za, Complex64::from_polar(u.exp(), ray.theta))?;
            Ok([xa[0] + d[0], xa[1] + d[1], xa[2] + d[2]])
        };
        // Illinois-modified regula falsi in log radius.
        let (mut a, mut b) = (ray.rho[k].ln(), ray.rho[k + 1].ln());
        let (mut fa, mut fb) = (f(&ray.x[k]), f(&ray.x[k + 1]));
        let (mut xlo, mut xhi) = (ray.x[k], ray.x[k + 1]);
        let tol = 1e-14 * (1.0 + h.abs());
        for _ in 0..200 {
            if fa.abs() <= tol {
                return Ok(Some(xlo));
            }
            if fb.abs() <= tol || (b - a).abs() < 1e-15 {
                return Ok(Some(xhi));
            }
            let m = (a * fb - b * fa) / (fb - fa);
            let xm = at(m)?;
            let fm = f(&xm);
            if fm * fb < 0.0 {
                a = b;
                fa = fb;
                xlo = xhi;
            } else {
                fa *= 0.5;
            }
            b = m;
            fb = fm;
            xhi = xm;
        }
        Ok(Some(if fa.abs() < fb.abs() { xlo } else { xhi }))
    }

    /// Points of the level set `x3 = h`, one per ray that crosses it.
    pub fn level_set(&self, h: f64) -> Result<Vec<Vec3>> {
        let pts: Vec<Option<Vec3>> = self
            .rays
            .par_iter()
            .map(|r| self.crossing(r, h))
            .collect::<Result<_>>()?;
        Ok(pts.into_iter().flatten().collect())
    }

    pub fn slice(&self, h: f64) -> Result<FoliationSlice> {
        let pts: Vec<[f64; 2]> = self.level_set(h)?.iter().map(|p| [p[0], p[1]]).collect();
        classify_slice(h, &pts)
    }

    /// `n` equally spaced heights strictly between the two ends, shrunk
    /// towards the middle by `inset` (a fraction of the gap) on both sides.
    pub fn interior_heights(&self, n: usize, inset: f64) -> Vec<f64> {
        let (h0, h1) = self.end_heights;
        let (a, b) = (h0 + inset * (h1 - h0), h1 - inset * (h1 - h0));
        (1..=n).map(|k| a + (b - a) * k as f64 / (n + 1) as f64).collect()
    }

    /// The slice at the lower end height, sampled on the straight line over
    /// the line interval `(0, λ]`.
    pub fn end_slice(&self, n: usize) -> Result<FoliationSlice> {
        let l = self.charts.lambda.value();
        let base = self.charts.chart(Piece::UpperBase);
        let pts = (0..n)
            .map(|k| {
                let t = l * 10f64.powf(-3.0 * k as f64 / (n - 1).max(1) as f64);
                base.position(Complex64::new(t, 0.0)).map(|p| [p[0], p[1]])
            })
            .collect::<Result<Vec<_>>>()?;
        classify_slice(self.end_heights.0, &pts)
    }
}

/// Discrete (Menger) curvature of three points.
pub fn menger_curvature(a: Vec3, b: Vec3, c: Vec3) -> f64 {
    let sub = |p: Vec3, q: Vec3| [p[0] - q[0], p[1] - q[1], p[2] - q[2]];
    let (u, v) = (sub(b, a), sub(c, a));
    let cross = [
        u[1] * v[2] - u[2] * v[1],
        u[2] * v[0] - u[0] * v[2],
        u[0] * v[1] - u[1] * v[0],
    ];
    let area2 = (cross[0].powi(2) + cross[1].powi(2) + cross[2].powi(2)).sqrt();
    let len = |p: Vec3| (p[0].powi(2) + p[1].powi(2) + p[2].powi(2)).sqrt();
    let d = len(u) * len(v) * len(sub(c, b));
    if d == 0.0 {
        0.0
    } else {
        2.0 * area2 / d
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoliationSummary {
    pub lambda: f64,
    pub end_heights: (f64, f64),
    /// Level-circle radius halfway between the two ends.
    pub mid_radius: f64,
    /// Largest discrete curvature of the curve of circle centers.
    pub max_center_curvature: f64,
    /// Largest circle-fit residual divided by the radius.
    pub max_relative_residual: f64,
    pub slices: Vec<FoliationSlice>,
}

/// Slices at `n_heights` heights in the middle 80% between the ends.
pub fn foliation_summary(
    lambda: Lambda,
    norm: &Normalization,
    n_heights: usize,
    rays_per_half: usize,
) -> Result<FoliationSummary> {
    let sampler = LevelSetSampler::new(lambda, norm, Sheet::Plus, rays_per_half)?;
    let (h0, h1) = sampler.end_heights;
    let heights = sampler.interior_heights(n_heights, 0.1);
    let slices = heights.iter().map(|&h| sampler.slice(h)).collect::<Result<Vec<_>>>()?;
    let mid = sampler.slice(0.5 * (h0 + h1))?;
    let centers: Vec<Vec3> = slices
        .iter()
        .filter_map(|s| s.center.map(|c| [c[0], c[1], s.height]))
        .collect();
    let max_center_curvature = centers
        .windows(3)
        .map(|w| menger_curvature(w[0], w[1], w[2]))
        .fold(0.0, f64::max);
    let max_relative_residual = slices
        .iter()
        .filter_map(|s| s.radius.map(|r| s.residual / r))
        .fold(0.0, f64::max);
    Ok(FoliationSummary {
        lambda: lambda.value(),
        end_heights: (h0, h1),
        mid_radius: mid.radius.unwrap_or(f64::INFINITY),
        max_center_curvature,
        max_relative_residual,
        slices,
    })
}
