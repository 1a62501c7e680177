//! Gauss curvature of the Riemann examples and the universal bound.

use std::f64::consts::TAU;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::curve::Lambda;
use crate::error::{Error, Result};
use crate::weierstrass::{Normalization, NormalizationKind};

/// Bound on `|K|` for the normalized family.
pub const UNIVERSAL_BOUND: f64 = 4.0;

/// Conjectured optimal bound, attained at `z = ±i` for `λ = 1`.
pub const CONJECTURED_BOUND: f64 = 2.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurvatureSample {
    pub z: Complex64,
    pub abs_k: f64,
    pub normalization: NormalizationKind,
}

/// Closed-form `|K| = 16 |z-λ| |z+1/λ| / (s² |z| (|z| + 1/|z|)^4)`.
pub fn abs_gauss_curvature(z: Complex64, lambda: Lambda, norm: &Normalization) -> Result<f64> {
    let r = z.norm();
    if r == 0.0 {
        return Err(Error::SingularPoint(z));
    }
    if !r.is_finite() {
        return Ok(0.0);
    }
    let l = lambda.value();
    let s = norm.scale();
    let q = r + 1.0 / r;
    Ok(16.0 * (z - l).norm() * (z + 1.0 / l).norm() / (s * s * r * q.powi(4)))
}

/// `(4 |g'| / (|f| (1 + |g|²)²))²` for Weierstrass data `(g, f dz)`.
pub fn general_curvature(g: Complex64, g_prime: Complex64, f: Complex64) -> Result<f64> {
    let fa = f.norm();
    if fa == 0.0 {
        return Err(Error::DivisionByZero);
    }
    let d = 1.0 + g.norm_sqr();
    Ok((4.0 * g_prime.norm() / (fa * d * d)).powi(2))
}

/// Middle term `16 (r+1)² / (r (r + 1/r)^4)` of the chain
/// `|K| ≤ 16 (r+1)² / (r (r + 1/r)^4) ≤ 4` at `|z| = r`.
pub fn intermediate_curvature_bound(z: Complex64) -> f64 {
    let r = z.norm();
    let q = r + 1.0 / r;
    16.0 * (r + 1.0).powi(2) / (r * q.powi(4))
}

/// Log-polar sampling grid over `r_min ≤ |z| ≤ r_max`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PolarGrid {
    pub radial: usize,
    pub angular: usize,
    pub r_min: f64,
    pub r_max: f64,
}

impl PolarGrid {
    pub fn new(radial: usize, angular: usize, r_min: f64, r_max: f64) -> Result<Self> {
        if radial < 2 || angular < 4 || !(r_min > 0.0 && r_max > r_min && r_max.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "bad polar grid {radial}x{angular} over [{r_min}, {r_max}]"
            )));
        }
        Ok(PolarGrid {
            radial,
            angular,
            r_min,
            r_max,
        })
    }

    /// The grid used for the universal bound: 512 × 512 over `[1e-3, 1e3]`.
    pub fn standard() -> Self {
        PolarGrid {
            radial: 512,
            angular: 512,
            r_min: 1e-3,
            r_max: 1e3,
        }
    }

    pub fn log_step(&self) -> f64 {
        (self.r_max / self.r_min).ln() / (self.radial - 1) as f64
    }

    pub fn angle_step(&self) -> f64 {
        TAU / self.angular as f64
    }

    pub fn radius(&self, i: usize) -> f64 {
        self.r_min * (self.log_step() * i as f64).exp()
    }

    pub fn angle(&self, j: usize) -> f64 {
        self.angle_step() * j as f64
    }
}

/// Which symmetry fixed-point set a parameter lies on (to a tolerance).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FixedSet {
    /// `z = ±i`, fixed by the normal rotation.
    NormalRotation,
    /// Real parameters on the planar intervals.
    PlanarGeodesic,
    /// Real parameters on the line intervals.
    StraightLine,
    None,
}

pub fn classify_fixed_set(z: Complex64, lambda: Lambda, tol: f64) -> FixedSet {
    let l = lambda.value();
    if (z - Complex64::i()).norm() <= tol || (z + Complex64::i()).norm() <= tol {
        return FixedSet::NormalRotation;
    }
    if z.im.abs() <= tol * z.norm().max(1.0) {
        let t = z.re;
        if (t > -1.0 / l && t < 0.0) || t > l {
            return FixedSet::PlanarGeodesic;
        }
        return FixedSet::StraightLine;
    }
    FixedSet::None
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurvatureReport {
    pub lambda: f64,
    pub grid: PolarGrid,
    pub max_abs_k: f64,
    pub argmax: Complex64,
    pub refined_max: f64,
    pub refined_argmax: Complex64,
    /// Grid maximum stays below [`UNIVERSAL_BOUND`].
    pub bound_holds: bool,
    /// Refined maximum stays below `CONJECTURED_BOUND + 1e-3`.
    pub conjecture_holds: bool,
    /// Refined argmax lies within one grid cell of `z = i` or `z = -i`.
    pub argmax_near_i: bool,
    pub fixed_set: FixedSet,
}

fn grid_max(lambda: Lambda, norm: &Normalization, grid: &PolarGrid) -> Result<(f64, Complex64)> {
    let rows: Vec<(f64, Complex64)> = (0..grid.radial)
        .into_par_iter()
        .map(|i| {
            let r = grid.radius(i);
            let mut best = (f64::NEG_INFINITY, Complex64::new(r, 0.0));
            for j in 0..grid.angular {
                let z = Complex64::from_polar(r, grid.angle(j));
                let k = abs_gauss_curvature(z, lambda, norm)?;
                if k > best.0 {
                    best = (k, z);
                }
            }
            Ok(best)
        })
        .collect::<Result<_>>()?;
    Ok(rows
        .into_iter()
        .fold((f64::NEG_INFINITY, Complex64::new(0.0, 0.0)), |a, b| if b.0 > a.0 { b } else { a }))
}

/// Compass search on `(ln r, θ)` started at `z0` with the given steps.
fn refine_max(lambda: Lambda, norm: &Normalization, z0: Complex64, dlog: f64, dtheta: f64) -> Result<(f64, Complex64)> {
    let eval = |u: f64, t: f64| abs_gauss_curvature(Complex64::from_polar(u.exp(), t), lambda, norm);
    let (mut u, mut t) = (z0.norm().ln(), z0.arg());
    let mut best = eval(u, t)?;
    let (mut hu, mut ht) = (dlog, dtheta);
    while hu > 1e-13 || ht > 1e-13 {
        let mut moved = false;
        for (du, dt) in [(hu, 0.0), (-hu, 0.0), (0.0, ht), (0.0, -ht)] {
            let k = eval(u + du, t + dt)?;
            if k > best {
                best = k;
                u += du;
                t += dt;
                moved = true;
                break;
            }
        }
        if !moved {
            hu *= 0.5;
            ht *= 0.5;
        }
    }
    Ok((best, Complex64::from_polar(u.exp(), t)))
}

/// Grid maximum of `|K|` plus local refinement around the argmax.
pub fn verify_curvature_bound(lambda: Lambda, grid: &PolarGrid) -> Result<CurvatureReport> {
    let norm = Normalization::new(NormalizationKind::PaperNormalized, lambda)?;
    let (max_abs_k, argmax) = grid_max(lambda, &norm, grid)?;
    let (refined_max, refined_argmax) = refine_max(lambda, &norm, argmax, grid.log_step(), grid.angle_step())?;
    let cell = |target: Complex64| {
        let dl = (refined_argmax.norm().ln() - target.norm().ln()).abs();
        let da = (refined_argmax.arg() - target.arg()).abs();
        dl <= grid.log_step() && da <= grid.angle_step()
    };
    let near_i = cell(Complex64::i()) || cell(-Complex64::i());
    let fixed_tol = 1e-6;
    Ok(CurvatureReport {
        lambda: lambda.value(),
        grid: *grid,
        max_abs_k,
        argmax,
        refined_max,
        refined_argmax,
        bound_holds: max_abs_k <= UNIVERSAL_BOUND,
        conjecture_holds: refined_max <= CONJECTURED_BOUND + 1e-3,
        argmax_near_i: near_i,
        fixed_set: classify_fixed_set(refined_argmax, lambda, fixed_tol),
    })
}
