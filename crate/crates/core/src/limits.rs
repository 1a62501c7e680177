//! The two degenerations of the normalized family: the catenoid as λ → 0
//! and the helicoid as λ → ∞, plus end spacing, the conjugacy relation
//! between λ and 1/λ, and a stack-of-planes experiment.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analysis::{abs_gauss_curvature, LevelSetSampler, SliceKind};
use crate::curve::{circle_polyline, continue_sheet, half_plane_w, CurvePoint, Half, Lambda, Sheet, SheetedPath};
use crate::error::{Error, Result};
use crate::quadrature::{self, Tolerance, Vec3};
use crate::reference::{catenoid_integrand, catenoid_point, helicoid_integrand, helicoid_point, ReferenceSurface};
use crate::weierstrass::{
    chart, gauss_map, integrate, metric_factor, phi, Normalization, NormalizationKind, Router, SurfacePoint,
};

/// Default bound on the number of turns around the origin in helicoid sweeps.
pub const DEFAULT_MAX_WINDING: i32 = 4;

/// Vertices on the closed loops used for annulus periods.
const LOOP_VERTICES: usize = 512;

fn dist(a: Vec3, b: Vec3) -> f64 {
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2) + (a[2] - b[2]).powi(2)).sqrt()
}

/// `sqrt(z) / sqrt((z - λ)(λ z + 1)) - 1` on `λ < |z| < 1/λ`, continued from
/// `z = 1`.
pub fn f0(z: Complex64, lambda: Lambda) -> Result<Complex64> {
    let l = lambda.value();
    let r = z.norm();
    if !(l < r && r * l < 1.0) {
        return Err(Error::BranchAmbiguity(z));
    }
    // (z - λ)(λz + 1) = z (1 - λ/z)(1 + λz), both factors in the right half-plane
    let a = (1.0 - l / z).sqrt();
    let b = (1.0 + l * z).sqrt();
    Ok(1.0 / (a * b) - 1.0)
}

/// `1 - sqrt(z) / sqrt((1 - z/λ)(z + 1/λ))` on `1/λ < |z| < λ`, continued from
/// `z = 1`.
pub fn f_inf(z: Complex64, lambda: Lambda) -> Result<Complex64> {
    let l = lambda.value();
    let r = z.norm();
    if !(r * l > 1.0 && r < l) {
        return Err(Error::BranchAmbiguity(z));
    }
    // (1 - z/λ)(z + 1/λ) = z (1 - z/λ)(1 + 1/(λz))
    let a = (1.0 - z / l).sqrt();
    let b = (1.0 + 1.0 / (l * z)).sqrt();
    Ok(1.0 - 1.0 / (a * b))
}

/// The parameter ring `1/L < |z| < L` with a log-polar midpoint grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Annulus {
    #[serde(rename = "L")]
    pub l: f64,
    pub radial: usize,
    pub angular: usize,
}

impl Annulus {
    pub fn new(l: f64, radial: usize, angular: usize) -> Result<Self> {
        if !(l > 1.0 && l.is_finite()) {
            return Err(Error::InvalidArgument(format!("annulus needs L > 1, got {l}")));
        }
        if radial < 8 || angular < 8 {
            return Err(Error::InvalidArgument(format!(
                "annulus grid {radial}x{angular} is below 8x8"
            )));
        }
        Ok(Annulus { l, radial, angular })
    }

    /// `L^(-1 + 2(i + 1/2)/n)`, strictly inside the ring.
    pub fn radii(&self) -> Vec<f64> {
        let n = self.radial as f64;
        (0..self.radial)
            .map(|i| self.l.powf(-1.0 + 2.0 * (i as f64 + 0.5) / n))
            .collect()
    }

    /// Cell-centered angles in `(-π, π)`.
    pub fn angles(&self) -> Vec<f64> {
        let n = self.angular as f64;
        (0..self.angular)
            .map(|j| -PI + TAU * (j as f64 + 0.5) / n)
            .collect()
    }

    pub fn points(&self) -> Vec<Complex64> {
        let angles = self.angles();
        self.radii()
            .into_iter()
            .flat_map(|r| angles.iter().map(move |&t| Complex64::from_polar(r, t)).collect::<Vec<_>>())
            .collect()
    }

    pub fn contains(&self, z: Complex64) -> bool {
        let r = z.norm();
        r * self.l > 1.0 && r < self.l
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ClipKind {
    Ball,
    Slab,
}

/// Ball `|x| ≤ r` or slab `|x3| ≤ r`, both centered at the origin.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClipRegion {
    pub kind: ClipKind,
    pub r: f64,
}

impl ClipRegion {
    pub fn new(kind: ClipKind, r: f64) -> Result<Self> {
        if !(r > 0.0) {
            return Err(Error::InvalidArgument(format!("clip radius must be positive, got {r}")));
        }
        Ok(ClipRegion { kind, r })
    }

    pub fn ball(r: f64) -> Result<Self> {
        ClipRegion::new(ClipKind::Ball, r)
    }

    pub fn contains(&self, x: Vec3) -> bool {
        match self.kind {
            ClipKind::Ball => dist(x, [0.0; 3]) <= self.r,
            ClipKind::Slab => x[2].abs() <= self.r,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LimitTarget {
    Catenoid,
    Helicoid,
    Planes,
}

/// Metrics of one run of the plane experiment.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlaneMetrics {
    pub lambda: f64,
    /// Smallest level-circle radius between the two ends.
    pub neck_radius: f64,
    /// Area fraction, inside the clip ball around the neck, of surface whose
    /// unit normal has `|n3| ≥ 1 - 1e-2`.
    pub vertical_fraction: f64,
    /// Largest distance, outside a neck neighborhood of radius
    /// `sqrt(neck_radius)`, to the nearest plane of the stack through the
    /// neck with the end spacing.
    pub plane_distance: f64,
    /// Largest `|x3|` of the raw surface scaled by the homothety `t = λ`.
    pub homothety_height: f64,
}

/// Deviation of a family from its limit along a λ-schedule.
///
/// Rows are ordered towards the limit: decreasing λ for the catenoid and the
/// planes, increasing λ for the helicoid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceReport {
    pub target: LimitTarget,
    pub lambdas: Vec<f64>,
    pub deviations: Vec<f64>,
    pub end_spacings: Vec<f64>,
    pub max_abs_k: Vec<f64>,
    /// Samples that fell inside the clip region, per λ.
    pub retained: Vec<usize>,
    pub annulus: Annulus,
    pub clip: ClipRegion,
    pub normalization: NormalizationKind,
    pub sheet: Sheet,
    pub max_winding: i32,
    pub planes: Vec<PlaneMetrics>,
}

impl ConvergenceReport {
    /// Deviations strictly decrease along the rows.
    pub fn is_monotone(&self) -> bool {
        self.deviations.windows(2).all(|p| p[1] < p[0])
    }
}

fn ordered(lambdas: &[f64], ascending: bool) -> Result<Vec<Lambda>> {
    let mut ls = lambdas.iter().map(|&l| Lambda::new(l)).collect::<Result<Vec<_>>>()?;
    ls.sort_by(|a, b| a.value().total_cmp(&b.value()));
    if !ascending {
        ls.reverse();
    }
    Ok(ls)
}

struct SweepRow {
    deviation: f64,
    spacing: f64,
    max_abs_k: f64,
    retained: usize,
}

fn sweep_row(
    lambda: Lambda,
    annulus: &Annulus,
    clip: &ClipRegion,
    reference: ReferenceSurface,
    windings: &[i32],
) -> Result<SweepRow> {
    let norm = Normalization::paper(lambda);
    let router = Router::new(lambda, norm, Sheet::Plus)?;
    let radii = annulus.radii();
    let base = annulus.angles();
    let angles: Vec<f64> = windings
        .iter()
        .flat_map(|&n| base.iter().map(move |&t| t + TAU * n as f64))
        .collect();
    let pts = router.immerse_polar(&radii, &angles)?;
    let mut deviation = 0.0f64;
    let mut retained = 0;
    for p in &pts {
        let q = reference.point(p.source.z, p.winding);
        if clip.contains(q) {
            retained += 1;
            deviation = deviation.max(dist(p.position, q));
        }
    }
    if !deviation.is_finite() {
        return Err(Error::InvalidArgument(format!("non-finite deviation at λ = {}", lambda.value())));
    }
    let max_abs_k = annulus
        .points()
        .iter()
        .map(|&z| abs_gauss_curvature(z, lambda, &norm))
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .fold(0.0, f64::max);
    Ok(SweepRow {
        deviation,
        spacing: end_spacing(lambda, &norm)?,
        max_abs_k,
        retained,
    })
}

fn sweep(
    target: LimitTarget,
    lambdas: Vec<Lambda>,
    annulus: Annulus,
    clip: ClipRegion,
    max_winding: i32,
) -> Result<ConvergenceReport> {
    let (reference, windings): (ReferenceSurface, Vec<i32>) = match target {
        LimitTarget::Helicoid => (ReferenceSurface::Helicoid, (-max_winding..=max_winding).collect()),
        _ => (ReferenceSurface::Catenoid, vec![0]),
    };
    let rows = lambdas
        .par_iter()
        .map(|&l| sweep_row(l, &annulus, &clip, reference, &windings))
        .collect::<Result<Vec<_>>>()?;
    Ok(ConvergenceReport {
        target,
        lambdas: lambdas.iter().map(|l| l.value()).collect(),
        deviations: rows.iter().map(|r| r.deviation).collect(),
        end_spacings: rows.iter().map(|r| r.spacing).collect(),
        max_abs_k: rows.iter().map(|r| r.max_abs_k).collect(),
        retained: rows.iter().map(|r| r.retained).collect(),
        annulus,
        clip,
        normalization: NormalizationKind::PaperNormalized,
        sheet: Sheet::Plus,
        max_winding,
        planes: Vec::new(),
    })
}

/// Sup deviation from the catenoid over the clipped annulus grid, λ < 1.
pub fn catenoid_limit_sweep(lambdas: &[f64], annulus: Annulus, clip: ClipRegion) -> Result<ConvergenceReport> {
    if let Some(&l) = lambdas.iter().find(|&&l| !(l < 1.0)) {
        return Err(Error::InvalidArgument(format!("catenoid sweep needs λ < 1, got {l}")));
    }
    sweep(LimitTarget::Catenoid, ordered(lambdas, false)?, annulus, clip, 0)
}

/// Sup deviation from the helicoid over the clipped annulus grid, λ > 1,
/// sampling every winding in `-max_winding..=max_winding`.
pub fn helicoid_limit_sweep(
    lambdas: &[f64],
    annulus: Annulus,
    clip: ClipRegion,
    max_winding: i32,
) -> Result<ConvergenceReport> {
    if let Some(&l) = lambdas.iter().find(|&&l| !(l > 1.0)) {
        return Err(Error::InvalidArgument(format!("helicoid sweep needs λ > 1, got {l}")));
    }
    if max_winding < 1 {
        return Err(Error::InvalidArgument("max_winding must be at least 1".into()));
    }
    sweep(LimitTarget::Helicoid, ordered(lambdas, true)?, annulus, clip, max_winding)
}

/// Vertical distance between adjacent planar ends.
pub fn end_spacing(lambda: Lambda, norm: &Normalization) -> Result<f64> {
    chart::planar_end_gap(lambda, norm.scale())
}

/// The upper unit semicircle `e^{it}`, `t ∈ [0, π]`, lifted from the base point.
pub fn semicircle_path(lambda: Lambda) -> Result<SheetedPath> {
    let n = 128;
    let verts: Vec<Complex64> = (0..=n)
        .map(|k| Complex64::from_polar(1.0, PI * k as f64 / n as f64))
        .collect();
    let w0 = CurvePoint::base(lambda, Sheet::Plus).w;
    continue_sheet(&verts, w0, lambda)
}

/// Rise of `x3` along the upper unit semicircle; equals the end spacing for
/// λ > 1, where both endpoints lie on line intervals. At λ = 1 the path
/// starts on a branch point and is rejected.
pub fn semicircle_rise(lambda: Lambda, norm: &Normalization) -> Result<f64> {
    Ok(integrate(&semicircle_path(lambda)?, norm)?[2])
}

/// Real period of the loop `|z| = radius`, started on the given sheet at `radius`.
pub fn annulus_loop_period(lambda: Lambda, norm: &Normalization, sheet: Sheet, radius: f64) -> Result<Vec3> {
    let cycle = circle_polyline(Complex64::new(0.0, 0.0), radius, 0.0, LOOP_VERTICES);
    let w0 = sheet.sign() * half_plane_w(cycle[0], lambda, Half::Upper);
    let path = continue_sheet(&cycle, w0, lambda)?;
    integrate(&path, norm)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConjugacyReport {
    pub lambda: f64,
    pub residuals: Vec<f64>,
    pub max_residual: f64,
}

/// Check `i Φ_λ(z, w) = -diag(-1, -1, 1) Φ_{1/λ}(-z, i w)` for the normalized
/// data at each sample; residuals are relative to `max(1, |Φ_λ|)`.
pub fn conjugate_check(lambda: Lambda, samples: &[CurvePoint]) -> Result<ConjugacyReport> {
    let here = Normalization::paper(lambda);
    let there = Normalization::paper(lambda.recip());
    let i = Complex64::i();
    let residuals = samples
        .iter()
        .map(|p| {
            if p.lambda != lambda {
                return Err(Error::InvalidArgument("sample lies on another curve".into()));
            }
            let a = phi(p, &here)?.0.map(|v| i * v);
            let q = CurvePoint::new(-p.z, i * p.w, lambda.recip())?;
            let b = phi(&q, &there)?.0;
            let expected = [b[0], b[1], -b[2]];
            let scale = a.iter().map(|v| v.norm()).fold(1.0, f64::max);
            Ok((0..3).map(|k| (a[k] - expected[k]).norm()).fold(0.0, f64::max) / scale)
        })
        .collect::<Result<Vec<_>>>()?;
    let max_residual = residuals.iter().copied().fold(0.0, f64::max);
    Ok(ConjugacyReport {
        lambda: lambda.value(),
        residuals,
        max_residual,
    })
}

/// One point of the catenoid (λ < 1) or helicoid (λ > 1) splitting.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecompositionCheck {
    pub z: Complex64,
    pub winding: i32,
    pub immersed: Vec3,
    pub split: Vec3,
    pub residual: f64,
}

/// `Re ∫ f Ψ dz` from 1 along the positive axis to `r` and then around the
/// circle of radius `r` through the unwrapped angle `theta`.
fn correction_integral<F>(f: F, r: f64, theta: f64) -> Result<Vec3>
where
    F: Fn(Complex64) -> [Complex64; 3] + Sync,
{
    let leg = |a: Complex64, b: Complex64| -> Result<Vec3> {
        let d = b - a;
        quadrature::integrate(
            |t| {
                let v = f(a + d * t);
                [(v[0] * d).re, (v[1] * d).re, (v[2] * d).re]
            },
            0.0,
            1.0,
            Tolerance::per_length(d.norm()),
        )
    };
    let arc = |t0: f64, t1: f64| -> Result<Vec3> {
        quadrature::integrate(
            |t| {
                let z = Complex64::from_polar(r, t);
                let dz = Complex64::i() * z;
                let v = f(z);
                [(v[0] * dz).re, (v[1] * dz).re, (v[2] * dz).re]
            },
            t0,
            t1,
            Tolerance::per_length(r * (t1 - t0).abs()),
        )
    };
    let mut acc = leg(Complex64::new(1.0, 0.0), Complex64::new(r, 0.0))?;
    let pieces = (theta.abs() / (PI / 8.0)).ceil().max(1.0) as usize;
    for k in 0..pieces {
        let t0 = theta * k as f64 / pieces as f64;
        let t1 = theta * (k + 1) as f64 / pieces as f64;
        let v = arc(t0, t1)?;
        for c in 0..3 {
            acc[c] += v[c];
        }
    }
    Ok(acc)
}

/// Compare the immersion with `C(z) + Re ∫ f0 Φ_C` (λ < 1) or
/// `H(z) - Re ∫ f_inf Φ_H` (λ > 1) at the given `(z, winding)` targets.
pub fn decomposition_residuals(lambda: Lambda, targets: &[(Complex64, i32)]) -> Result<Vec<DecompositionCheck>> {
    let l = lambda.value();
    if l == 1.0 {
        return Err(Error::InvalidArgument("no splitting at λ = 1".into()));
    }
    let router = Router::new(lambda, Normalization::paper(lambda), Sheet::Plus)?;
    targets
        .par_iter()
        .map(|&(z, winding)| {
            let p: SurfacePoint = router.immerse_with_winding(z, winding)?;
            let theta = z.arg() + TAU * winding as f64;
            let split = if l < 1.0 {
                f0(z, lambda)?;
                let corr = correction_integral(
                    |u| {
                        let f = f0(u, lambda).unwrap_or(Complex64::new(f64::NAN, 0.0));
                        catenoid_integrand(u).map(|v| f * v)
                    },
                    z.norm(),
                    theta,
                )?;
                let c = catenoid_point(z);
                [c[0] + corr[0], c[1] + corr[1], c[2] + corr[2]]
            } else {
                f_inf(z, lambda)?;
                let corr = correction_integral(
                    |u| {
                        let f = f_inf(u, lambda).unwrap_or(Complex64::new(f64::NAN, 0.0));
                        helicoid_integrand(u).map(|v| f * v)
                    },
                    z.norm(),
                    theta,
                )?;
                let h = helicoid_point(z, winding);
                [h[0] - corr[0], h[1] - corr[1], h[2] - corr[2]]
            };
            Ok(DecompositionCheck {
                z,
                winding,
                immersed: p.position,
                split,
                residual: dist(p.position, split),
            })
        })
        .collect()
}

/// Near-vertical threshold on the third component of the unit normal.
const VERTICAL_TOL: f64 = 1e-2;

fn plane_row(lambda: Lambda, annulus: &Annulus, clip: &ClipRegion) -> Result<PlaneMetrics> {
    let norm = Normalization::new(NormalizationKind::FixedVerticalSpacing, lambda)?;
    let sampler = LevelSetSampler::new(lambda, &norm, Sheet::Plus, 16)?;
    let (h0, h1) = sampler.end_heights;
    let spacing = (h1 - h0).abs();
    let mut neck: Option<(f64, [f64; 2], f64)> = None;
    for h in sampler.interior_heights(9, 0.1) {
        let s = sampler.slice(h)?;
        if let (SliceKind::Circle, Some(r), Some(c)) = (s.kind, s.radius, s.center) {
            if neck.is_none_or(|(best, _, _)| r < best) {
                neck = Some((r, c, h));
            }
        }
    }
    let (neck_radius, center, neck_height) =
        neck.ok_or_else(|| Error::InvalidArgument("no circular level set between the ends".into()))?;
    let origin = [center[0], center[1], neck_height];

    let router = Router::new(lambda, norm, Sheet::Plus)?;
    let radii = annulus.radii();
    let angles = annulus.angles();
    let pts = router.immerse_polar(&radii, &angles)?;
    let cell = (2.0 * annulus.l.ln() / annulus.radial as f64) * (TAU / annulus.angular as f64);
    let exclusion = neck_radius.sqrt();
    let (mut area, mut vertical, mut plane_distance) = (0.0, 0.0, 0.0f64);
    for p in &pts {
        let x = p.position;
        let rel = [x[0] - origin[0], x[1] - origin[1], x[2] - origin[2]];
        if !clip.contains(rel) {
            continue;
        }
        let z = p.source.z;
        let da = metric_factor(&p.source, &norm)? * z.norm_sqr() * cell;
        area += da;
        let n = gauss_map(z);
        if n[2].abs() >= 1.0 - VERTICAL_TOL {
            vertical += da;
        }
        if rel[0].hypot(rel[1]) > exclusion {
            let k = (rel[2] / spacing).round();
            plane_distance = plane_distance.max((rel[2] - k * spacing).abs());
        }
    }
    let raw = Normalization::unnormalized(lambda);
    let (r0, r1) = chart::end_heights(lambda, &raw, Sheet::Plus)?;
    Ok(PlaneMetrics {
        lambda: lambda.value(),
        neck_radius,
        vertical_fraction: if area > 0.0 { vertical / area } else { 0.0 },
        plane_distance,
        homothety_height: lambda.value() * r0.abs().max(r1.abs()),
    })
}

/// Fixed end spacing with λ → 0: the necks shrink and the surface flattens
/// into a stack of horizontal planes `2π` apart. The clip is centered on the
/// neck; `deviations` holds the plane distances.
pub fn plane_limit_experiment(lambdas: &[f64], annulus: Annulus, clip: ClipRegion) -> Result<ConvergenceReport> {
    if let Some(&l) = lambdas.iter().find(|&&l| !(l < 1.0)) {
        return Err(Error::InvalidArgument(format!("plane experiment needs λ < 1, got {l}")));
    }
    let ls = ordered(lambdas, false)?;
    let rows = ls
        .par_iter()
        .map(|&l| {
            let m = plane_row(l, &annulus, &clip)?;
            let norm = Normalization::new(NormalizationKind::FixedVerticalSpacing, l)?;
            let k = annulus
                .points()
                .iter()
                .map(|&z| abs_gauss_curvature(z, l, &norm))
                .collect::<Result<Vec<_>>>()?
                .into_iter()
                .fold(0.0, f64::max);
            Ok((m, end_spacing(l, &norm)?, k))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ConvergenceReport {
        target: LimitTarget::Planes,
        lambdas: ls.iter().map(|l| l.value()).collect(),
        deviations: rows.iter().map(|r| r.0.plane_distance).collect(),
        end_spacings: rows.iter().map(|r| r.1).collect(),
        max_abs_k: rows.iter().map(|r| r.2).collect(),
        retained: vec![annulus.radial * annulus.angular; rows.len()],
        annulus,
        clip,
        normalization: NormalizationKind::FixedVerticalSpacing,
        sheet: Sheet::Plus,
        max_winding: 0,
        planes: rows.iter().map(|r| r.0).collect(),
    })
}
