//! Globally adaptive 15-point Gauss–Kronrod quadrature for `R -> R^3`.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};

pub type Vec3 = [f64; 3];

/// Refinement cap: at most this many subintervals per call.
pub const MAX_SUBINTERVALS: usize = 1 << 16;

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];

const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];

// Gauss weights for the nodes XGK[1], XGK[3], XGK[5], XGK[7].
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

#[derive(Debug, Clone, Copy)]
pub struct Tolerance {
    pub abs: f64,
    pub rel: f64,
}

impl Tolerance {
    /// Absolute `1e-10` per unit path length, with a relative floor so that
    /// integrals of very large magnitude still terminate in f64.
    pub fn per_length(length: f64) -> Self {
        Tolerance {
            abs: 1e-10 * length.max(1e-300),
            rel: 1e-13,
        }
    }
}

#[inline]
fn norm(v: &Vec3) -> f64 {
    v[0].abs().max(v[1].abs()).max(v[2].abs())
}

struct Piece {
    a: f64,
    b: f64,
    value: Vec3,
    error: f64,
    floor: f64,
}

impl PartialEq for Piece {
    fn eq(&self, other: &Self) -> bool {
        self.error.total_cmp(&other.error) == Ordering::Equal
    }
}

impl Eq for Piece {}

impl PartialOrd for Piece {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Piece {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

/// Returns the Kronrod estimate, the Gauss-Kronrod difference and the
/// roundoff floor `100 ε ∫|f|` below which that difference is noise.
fn kronrod<F: Fn(f64) -> Vec3>(f: &F, a: f64, b: f64) -> (Vec3, f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let mut k = [0.0; 3];
    let mut g = [0.0; 3];
    let mut abs = 0.0;
    let fc = f(c);
    for i in 0..3 {
        k[i] = WGK[7] * fc[i];
        g[i] = WG[3] * fc[i];
    }
    abs += WGK[7] * norm(&fc);
    for j in 0..7 {
        let dx = h * XGK[j];
        let f1 = f(c - dx);
        let f2 = f(c + dx);
        abs += WGK[j] * (norm(&f1) + norm(&f2));
        for i in 0..3 {
            let s = f1[i] + f2[i];
            k[i] += WGK[j] * s;
            if j % 2 == 1 {
                g[i] += WG[j / 2] * s;
            }
        }
    }
    let mut err = 0.0f64;
    for i in 0..3 {
        k[i] *= h;
        g[i] *= h;
        err = err.max((k[i] - g[i]).abs());
    }
    (k, err, 100.0 * f64::EPSILON * abs * h.abs())
}

/// Integrate `f` over `[a, b]`.
///
/// Pieces whose error estimate has fallen to the roundoff floor are retired:
/// further bisection cannot improve them.
pub fn integrate<F: Fn(f64) -> Vec3>(f: F, a: f64, b: f64, tol: Tolerance) -> Result<Vec3> {
    if a == b {
        return Ok([0.0; 3]);
    }
    let finite = |v: &Vec3| v.iter().all(|x| x.is_finite());
    let (value, error, floor) = kronrod(&f, a, b);
    if !finite(&value) {
        return Err(Error::QuadratureFailure {
            subintervals: 1,
            estimate: f64::INFINITY,
        });
    }
    let mut active = BinaryHeap::new();
    let mut retired: Vec<Piece> = Vec::new();
    let mut count = 1;
    active.push(Piece { a, b, value, error, floor });
    let mut total = value;
    let mut active_err = error;
    loop {
        let target = tol.abs.max(tol.rel * norm(&total));
        if active_err <= target || active.is_empty() {
            return Ok(total);
        }
        if count >= MAX_SUBINTERVALS {
            return Err(Error::QuadratureFailure {
                subintervals: count,
                estimate: active_err,
            });
        }
        let worst = active.pop().expect("checked non-empty");
        if worst.error <= worst.floor {
            active_err -= worst.error;
            retired.push(worst);
            continue;
        }
        let m = 0.5 * (worst.a + worst.b);
        if m <= worst.a.min(worst.b) || m >= worst.a.max(worst.b) {
            return Err(Error::QuadratureFailure {
                subintervals: count,
                estimate: active_err,
            });
        }
        let (v1, e1, f1) = kronrod(&f, worst.a, m);
        let (v2, e2, f2) = kronrod(&f, m, worst.b);
        if !finite(&v1) || !finite(&v2) {
            return Err(Error::QuadratureFailure {
                subintervals: count,
                estimate: f64::INFINITY,
            });
        }
        for i in 0..3 {
            total[i] += v1[i] + v2[i] - worst.value[i];
        }
        active_err += e1 + e2 - worst.error;
        count += 1;
        active.push(Piece { a: worst.a, b: m, value: v1, error: e1, floor: f1 });
        active.push(Piece { a: m, b: worst.b, value: v2, error: e2, floor: f2 });
        // Re-sum occasionally to keep the running totals honest.
        if count % 256 == 0 {
            total = [0.0; 3];
            active_err = 0.0;
            for p in active.iter().chain(retired.iter()) {
                for i in 0..3 {
                    total[i] += p.value[i];
                }
            }
            for p in active.iter() {
                active_err += p.error;
            }
        }
    }
}
