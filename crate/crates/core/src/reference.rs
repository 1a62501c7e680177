//! Reference surfaces for the two limits of the family: the catenoid
//! (λ → 0) and the helicoid (λ → ∞), both parametrized by `z ∈ C*` and
//! normalized so that `z = 1` maps to the origin.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::Vec3;
use crate::weierstrass::SurfacePoint;

/// Weierstrass integrand of the catenoid, `((1-z²)/z², i(1+z²)/z², 2/z)`.
pub fn catenoid_integrand(z: Complex64) -> [Complex64; 3] {
    let z2 = z * z;
    let i = Complex64::i();
    [(1.0 - z2) / z2, i * (1.0 + z2) / z2, 2.0 / z]
}

/// Weierstrass integrand of the helicoid: `-i` times the catenoid's.
pub fn helicoid_integrand(z: Complex64) -> [Complex64; 3] {
    let i = Complex64::i();
    catenoid_integrand(z).map(|v| -i * v)
}

/// Catenoid with vertical axis through `(2, 0)`.
pub fn catenoid_point(z: Complex64) -> Vec3 {
    let inv = 1.0 / z;
    [(-z - inv).re + 2.0, -(z - inv).im, 2.0 * z.norm().ln()]
}

/// Helicoid with vertical axis through the origin; `branch` selects the
/// sheet of `arg z`, each step raising the height by `4π`.
pub fn helicoid_point(z: Complex64, branch: i32) -> Vec3 {
    let inv = 1.0 / z;
    let theta = z.arg() + std::f64::consts::TAU * branch as f64;
    [-(z + inv).im, (z - inv).re, 2.0 * theta]
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ReferenceSurface {
    Catenoid,
    Helicoid,
}

impl ReferenceSurface {
    pub fn point(self, z: Complex64, branch: i32) -> Vec3 {
        match self {
            ReferenceSurface::Catenoid => catenoid_point(z),
            ReferenceSurface::Helicoid => helicoid_point(z, branch),
        }
    }
}

/// Euclidean distance from each surface point to the reference point with the
/// same `z` (and, for the helicoid, the same winding).
pub fn deviation_field(points: &[SurfacePoint], reference: ReferenceSurface) -> Vec<f64> {
    points
        .iter()
        .map(|p| {
            let q = reference.point(p.source.z, p.winding);
            let x = p.position;
            ((x[0] - q[0]).powi(2) + (x[1] - q[1]).powi(2) + (x[2] - q[2]).powi(2)).sqrt()
        })
        .collect()
}

/// `max_i |immersed_i - reference(z_i)|`; zero for empty input.
pub fn sup_deviation(
    points: &[Complex64],
    immersed: &[Vec3],
    reference: ReferenceSurface,
    branch: i32,
) -> Result<f64> {
    if points.len() != immersed.len() {
        return Err(Error::LengthMismatch(points.len(), immersed.len()));
    }
    Ok(points
        .iter()
        .zip(immersed)
        .map(|(&z, x)| {
            let q = reference.point(z, branch);
            ((x[0] - q[0]).powi(2) + (x[1] - q[1]).powi(2) + (x[2] - q[2]).powi(2)).sqrt()
        })
        .fold(0.0, f64::max))
}
