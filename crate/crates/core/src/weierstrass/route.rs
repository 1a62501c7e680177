//! Routing from the base point to arbitrary targets.
//!
//! A target `r e^{iΘ}` (with `Θ` unwrapped, so windings around the origin are
//! distinguished) is reached by
//!
//! 1. the base chart along the positive real axis from 1 to `r'`,
//! 2. the circular arc of radius `r'` from angle 0 to `Θ`,
//! 3. the radial leg from `r'` to `r` at angle `Θ`.
//!
//! `r'` is `r` moved (in log scale) away from the branch radii the arc could
//! hit, staying on the same side of each of them as `r` so that the radial
//! leg crosses no branch point.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;
use rayon::prelude::*;

use super::{integrate, integrate_cumulative, Normalization, Piece, SurfaceCharts, SurfacePoint};
use crate::curve::{continue_sheet, CurvePoint, Lambda, Sheet};
use crate::error::{Error, Result};
use crate::quadrature::Vec3;

/// Largest angular step along a routing arc.
pub const ARC_STEP: f64 = PI / 32.0;

/// Pick the arc radius for a target at radius `r`, avoiding `forbidden`.
pub fn choose_radius(r: f64, forbidden: &[f64]) -> f64 {
    let lo = forbidden.iter().copied().filter(|&f| f < r).fold(0.0, f64::max);
    let hi = forbidden.iter().copied().filter(|&f| f >= r).fold(f64::INFINITY, f64::min);
    let (llo, lhi) = (lo.ln(), hi.ln());
    let margin = (0.25 * (lhi - llo)).min(0.05);
    let lr = r.ln();
    if lr >= llo + margin && lr <= lhi - margin {
        r
    } else {
        lr.clamp(llo + margin, lhi - margin).exp()
    }
}

#[derive(Debug, Clone)]
pub struct Router {
    pub lambda: Lambda,
    pub norm: Normalization,
    pub sheet: Sheet,
    charts: SurfaceCharts,
}

fn add(a: Vec3, b: Vec3) -> Vec3 {
    [a[0] + b[0], a[1] + b[1], a[2] + b[2]]
}

impl Router {
    pub fn new(lambda: Lambda, norm: Normalization, sheet: Sheet) -> Result<Self> {
        Ok(Router {
            lambda,
            norm,
            sheet,
            charts: SurfaceCharts::new(lambda, &norm, sheet)?,
        })
    }

    pub fn charts(&self) -> &SurfaceCharts {
        &self.charts
    }

    /// Immerse `z` reached without winding around the origin.
    pub fn immerse(&self, z: Complex64) -> Result<SurfacePoint> {
        self.immerse_with_winding(z, 0)
    }

    /// Immerse `z` reached after `winding` extra turns around the origin.
    pub fn immerse_with_winding(&self, z: Complex64, winding: i32) -> Result<SurfacePoint> {
        let r = z.norm();
        if r == 0.0 || !r.is_finite() {
            return Err(Error::PathBlocked(z));
        }
        let theta = z.arg() + TAU * winding as f64;
        let mut out = self.ring(r, &[theta])?;
        Ok(out.pop().expect("one angle in, one point out"))
    }

    /// Immerse every `r e^{iΘ}`; output is row-major with radii outermost.
    pub fn immerse_polar(&self, radii: &[f64], angles: &[f64]) -> Result<Vec<SurfacePoint>> {
        let rows: Vec<Vec<SurfacePoint>> = radii
            .par_iter()
            .map(|&r| self.ring(r, angles))
            .collect::<Result<_>>()?;
        Ok(rows.into_iter().flatten().collect())
    }

    fn forbidden_radii(&self, sweep: f64) -> Vec<f64> {
        let l = self.lambda.value();
        let mut f = vec![l];
        if sweep >= PI - 1e-12 {
            f.push(1.0 / l);
        }
        f
    }

    /// Points at radius `r` and unwrapped angles `angles`, in input order.
    fn ring(&self, r: f64, angles: &[f64]) -> Result<Vec<SurfacePoint>> {
        if !(r > 0.0 && r.is_finite()) || angles.iter().any(|t| !t.is_finite()) {
            return Err(Error::InvalidArgument(format!("bad polar target r = {r}")));
        }
        let sweep = angles.iter().fold(0.0f64, |m, t| m.max(t.abs()));
        let rp = choose_radius(r, &self.forbidden_radii(sweep));
        let start = Complex64::new(rp, 0.0);
        let base = self.charts.chart(Piece::UpperBase);
        let x0 = base.position(start)?;
        let w0 = base.w(start);

        // (position, w) at r' e^{iΘ} for every target angle
        let mut on_arc: Vec<Option<(Vec3, Complex64)>> = vec![None; angles.len()];
        for positive in [true, false] {
            let mut order: Vec<usize> = (0..angles.len())
                .filter(|&k| if positive { angles[k] > 0.0 } else { angles[k] < 0.0 })
                .collect();
            if order.is_empty() {
                continue;
            }
            order.sort_by(|&a, &b| angles[a].abs().total_cmp(&angles[b].abs()));
            let mut verts = vec![start];
            let mut slot = Vec::with_capacity(order.len());
            let mut at = 0.0f64;
            for &k in &order {
                let target = angles[k].abs();
                let steps = ((target - at) / ARC_STEP).ceil().max(0.0) as usize;
                for s in 1..=steps {
                    let t = at + (target - at) * s as f64 / steps as f64;
                    let t = if positive { t } else { -t };
                    verts.push(Complex64::from_polar(rp, t));
                }
                at = at.max(target);
                slot.push(verts.len() - 1);
            }
            let path = continue_sheet(&verts, w0, self.lambda)?;
            let partial = integrate_cumulative(&path, &self.norm)?;
            for (&k, &v) in order.iter().zip(&slot) {
                let idx = path.anchors[v];
                on_arc[k] = Some((add(x0, partial[idx]), path.w_values[idx]));
            }
        }

        angles
            .iter()
            .zip(on_arc)
            .map(|(&theta, arc)| {
                let (x, w) = arc.unwrap_or((x0, w0));
                let a = Complex64::from_polar(rp, theta);
                let z = Complex64::from_polar(r, theta);
                let (x, w) = if rp == r {
                    (x, w)
                } else {
                    let leg = continue_sheet(&[a, z], w, self.lambda)?;
                    (add(x, integrate(&leg, &self.norm)?), leg.end().w)
                };
                let winding = ((theta - z.arg()) / TAU).round() as i32;
                Ok(SurfacePoint {
                    position: x,
                    source: CurvePoint {
                        z,
                        w,
                        lambda: self.lambda,
                    },
                    winding,
                })
            })
            .collect()
    }
}
