//! Riemann minimal examples from Weierstrass data on the elliptic curve
//! `w^2 = z (z - λ) (z + 1/λ)`, with tools to check curvature, symmetries,
//! periods and the catenoid and helicoid limits.

pub mod analysis;
pub mod curve;
pub mod error;
pub mod limits;
pub mod mesh;
pub mod quadrature;
pub mod reference;
pub mod weierstrass;

pub use curve::{CurvePoint, Lambda, Sheet};
pub use error::{Error, Result};
pub use weierstrass::{Normalization, NormalizationKind, Router, SurfacePoint};
