use std::fs;
use std::path::Path;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use riemann_core::analysis::{
    abs_gauss_curvature, check_symmetries, foliation_summary, line_colinearity, planar_coplanarity,
    verify_curvature_bound, PolarGrid,
};
use riemann_core::curve::nearest_branch;
use riemann_core::limits::{
    catenoid_limit_sweep, conjugate_check, helicoid_limit_sweep, plane_limit_experiment, Annulus, ClipRegion,
    ConvergenceReport,
};
use riemann_core::mesh::{build_mesh, export, GridSpec};
use riemann_core::weierstrass::{period_vectors, Piece};
use riemann_core::{CurvePoint, Error, Lambda, Normalization, Router, Sheet};

use crate::config::{LimitsArgs, MeshArgs, Suite, Target, VerifyArgs};

pub const SCHEMA: u32 = 1;

/// Why a command did not succeed; maps onto the exit code.
#[derive(Debug)]
pub enum Failure {
    /// Arguments that parse but are out of range.
    Usage(String),
    /// A numerical or i/o error from the library.
    Numerical(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Numerical(e)
    }
}

impl Failure {
    pub fn exit_code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 2,
            Failure::Numerical(_) => 3,
        }
    }
}

impl std::fmt::Display for Failure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Failure::Usage(m) => write!(f, "error: {m}"),
            Failure::Numerical(e) => write!(f, "numerical failure: {e}"),
        }
    }
}

#[derive(Serialize)]
struct Envelope<'a, C: Serialize, R: Serialize> {
    schema: u32,
    version: &'static str,
    command: &'static str,
    config: &'a C,
    sheet: Sheet,
    passed: bool,
    result: R,
}

fn emit<C: Serialize, R: Serialize>(command: &'static str, config: &C, passed: bool, result: R) {
    let env = Envelope {
        schema: SCHEMA,
        version: env!("CARGO_PKG_VERSION"),
        command,
        config,
        sheet: Sheet::Plus,
        passed,
        result,
    };
    println!("{}", serde_json::to_string_pretty(&env).expect("report serializes"));
}

fn lambda(v: f64) -> Result<Lambda, Failure> {
    Lambda::new(v).map_err(|e| Failure::Usage(e.to_string()))
}

#[derive(Serialize)]
struct MeshSummary {
    out: String,
    vertices: usize,
    triangles: usize,
    euler_characteristic: i64,
    max_abs_k: f64,
    translation: [f64; 3],
}

pub fn mesh(args: &MeshArgs) -> Result<bool, Failure> {
    let l = lambda(args.lambda)?;
    let grid = GridSpec::new(args.resolution.radial, args.resolution.angular, args.l_mesh)
        .map_err(|e| Failure::Usage(e.to_string()))?;
    let norm = Normalization::new(args.normalization.kind(), l)?;
    let mesh = build_mesh(l, &norm, grid, args.copies as usize)?;
    export(&mesh, args.format.format(), &args.out)?;
    let summary = MeshSummary {
        out: args.out.display().to_string(),
        vertices: mesh.vertices.len(),
        triangles: mesh.triangles.len(),
        euler_characteristic: mesh.euler_characteristic(),
        max_abs_k: mesh.max_abs_k(),
        translation: mesh.provenance.map(|p| p.translation).unwrap_or_default(),
    };
    emit("mesh", args, true, summary);
    Ok(true)
}

#[derive(Debug, Clone, Serialize)]
struct CheckRow {
    suite: Suite,
    lambda: f64,
    check: &'static str,
    value: f64,
    threshold: f64,
    passed: bool,
}

impl CheckRow {
    /// Passes when `value <= threshold`.
    fn at_most(suite: Suite, lambda: f64, check: &'static str, value: f64, threshold: f64) -> Self {
        CheckRow {
            suite,
            lambda,
            check,
            value,
            threshold,
            passed: value <= threshold,
        }
    }
}

/// Random curve points with `10^-2 ≤ |z| ≤ 10^2`, away from branch points.
fn random_points(l: Lambda, n: usize, rng: &mut ChaCha8Rng) -> Vec<CurvePoint> {
    let mut out = Vec::with_capacity(n);
    while out.len() < n {
        let r = 10f64.powf(rng.gen_range(-2.0..2.0));
        let z = Complex64::from_polar(r, rng.gen_range(-std::f64::consts::PI..std::f64::consts::PI));
        if nearest_branch(z, l).0 < 1e-3 * r {
            continue;
        }
        let hint = if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
        out.push(CurvePoint::nearest(z, Complex64::new(hint, 0.0), l));
    }
    out
}

fn dist(a: [f64; 3], b: [f64; 3]) -> f64 {
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2) + (a[2] - b[2]).powi(2)).sqrt()
}

fn curvature_rows(l: Lambda) -> Result<Vec<CheckRow>, Failure> {
    let s = Suite::Curvature;
    let v = l.value();
    let mut rows = Vec::new();
    let raw = Normalization::unnormalized(l);
    let paper = Normalization::paper(l);
    let paper_expected = if v < 1.0 { 1.0 + v * v } else { 1.0 + 1.0 / (v * v) };
    let (mut e_raw, mut e_paper) = (0.0f64, 0.0f64);
    for z in [Complex64::i(), -Complex64::i()] {
        let k = abs_gauss_curvature(z, l, &raw)?;
        e_raw = e_raw.max((k - (v + 1.0 / v)).abs() / (v + 1.0 / v));
        let k = abs_gauss_curvature(z, l, &paper)?;
        e_paper = e_paper.max((k - paper_expected).abs() / paper_expected);
    }
    rows.push(CheckRow::at_most(s, v, "abs_k_at_i_raw_rel_error", e_raw, 1e-10));
    rows.push(CheckRow::at_most(s, v, "abs_k_at_i_paper_rel_error", e_paper, 1e-10));
    let report = verify_curvature_bound(l, &PolarGrid::standard())?;
    rows.push(CheckRow::at_most(s, v, "grid_max_abs_k", report.max_abs_k, 4.0));
    rows.push(CheckRow::at_most(s, v, "refined_max_abs_k", report.refined_max, 2.0 + 1e-3));
    rows.push(CheckRow {
        suite: s,
        lambda: v,
        check: "argmax_within_cell_of_i",
        value: if report.argmax_near_i { 1.0 } else { 0.0 },
        threshold: 1.0,
        passed: report.argmax_near_i,
    });
    Ok(rows)
}

fn period_rows(l: Lambda) -> Result<Vec<CheckRow>, Failure> {
    let s = Suite::Periods;
    let v = l.value();
    let norm = Normalization::paper(l);
    let p = period_vectors(l, &norm)?;
    let t = dist(p.translation, [0.0; 3]);
    let mut rows = vec![CheckRow::at_most(
        s,
        v,
        "companion_over_translation",
        dist(p.companion, [0.0; 3]) / t,
        1e-6,
    )];
    // the two lower charts over (-∞, -1/λ) are one α-circuit apart
    let router = Router::new(l, norm, Sheet::Plus)?;
    let z = Complex64::new(-2.0 / v - 1.0, 0.0);
    let d = {
        let a = router.charts().position(Piece::UpperBase, z)?;
        let b = router.charts().position(Piece::LowerRotated, z)?;
        [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
    };
    let defect = dist(d, p.translation).min(dist(d, p.translation.map(|x| -x)));
    rows.push(CheckRow::at_most(s, v, "alpha_circuit_vs_translation", defect, 1e-8));
    Ok(rows)
}

fn symmetry_rows(l: Lambda, pts: &[CurvePoint]) -> Result<Vec<CheckRow>, Failure> {
    let s = Suite::Symmetry;
    let v = l.value();
    let norm = Normalization::paper(l);
    let report = check_symmetries(l, &norm, pts, 1e-7)?;
    let mut rows: Vec<CheckRow> = report
        .checks
        .iter()
        .map(|c| {
            let name = match c.symmetry {
                riemann_core::analysis::Symmetry::Reflection => "reflection_residual",
                riemann_core::analysis::Symmetry::LineRotation => "line_rotation_residual",
                riemann_core::analysis::Symmetry::NormalRotation => "normal_rotation_residual",
            };
            CheckRow::at_most(s, v, name, c.max_residual, report.tolerance)
        })
        .collect();
    let lines = line_colinearity(l, &norm, 64)?;
    let planes = planar_coplanarity(l, &norm, 64)?;
    let worst = |c: &[riemann_core::analysis::symmetry::FixedCurveCheck]| {
        c.iter().map(|x| x.residual).fold(0.0, f64::max)
    };
    rows.push(CheckRow::at_most(s, v, "line_colinearity", worst(&lines), 1e-7));
    rows.push(CheckRow::at_most(s, v, "planar_coplanarity", worst(&planes), 1e-7));
    Ok(rows)
}

fn foliation_rows(ls: &[Lambda]) -> Result<Vec<CheckRow>, Failure> {
    let s = Suite::Foliation;
    let mut rows = Vec::new();
    let mut trend = Vec::new();
    for &l in ls {
        let f = foliation_summary(l, &Normalization::paper(l), 20, 16)?;
        rows.push(CheckRow::at_most(
            s,
            l.value(),
            "circle_fit_relative_residual",
            f.max_relative_residual,
            1e-6,
        ));
        if l.value() >= 1.0 {
            trend.push(f);
        }
    }
    trend.sort_by(|a, b| a.lambda.total_cmp(&b.lambda));
    for w in trend.windows(2) {
        let grows = w[1].mid_radius > w[0].mid_radius;
        rows.push(CheckRow {
            suite: s,
            lambda: w[1].lambda,
            check: "level_radius_increases",
            value: w[1].mid_radius,
            threshold: w[0].mid_radius,
            passed: grows,
        });
        rows.push(CheckRow {
            suite: s,
            lambda: w[1].lambda,
            check: "center_curvature_decreases",
            value: w[1].max_center_curvature,
            threshold: w[0].max_center_curvature,
            passed: w[1].max_center_curvature < w[0].max_center_curvature,
        });
    }
    Ok(rows)
}

pub fn verify(args: &VerifyArgs) -> Result<bool, Failure> {
    let ls = args.lambda_set.iter().map(|&v| lambda(v)).collect::<Result<Vec<_>, _>>()?;
    if args.samples == 0 {
        return Err(Failure::Usage("--samples must be positive".into()));
    }
    let mut rows = Vec::new();
    for suite in args.suite.expand() {
        if suite == Suite::Foliation {
            rows.extend(foliation_rows(&ls)?);
            continue;
        }
        for &l in &ls {
            let mut rng = ChaCha8Rng::seed_from_u64(args.seed ^ l.value().to_bits());
            match suite {
                Suite::Curvature => rows.extend(curvature_rows(l)?),
                Suite::Periods => rows.extend(period_rows(l)?),
                Suite::Symmetry => rows.extend(symmetry_rows(l, &random_points(l, args.samples, &mut rng))?),
                Suite::Conjugate => {
                    let r = conjugate_check(l, &random_points(l, args.samples, &mut rng))?;
                    rows.push(CheckRow::at_most(suite, l.value(), "conjugacy_residual", r.max_residual, 1e-10));
                }
                Suite::Foliation | Suite::All => unreachable!("expanded above"),
            }
        }
    }
    let passed = rows.iter().all(|r| r.passed);
    #[derive(Serialize)]
    struct Out {
        checks: Vec<CheckRow>,
        max_residual: f64,
    }
    let max_residual = rows
        .iter()
        .filter(|r| r.check.contains("residual") || r.check.contains("error"))
        .map(|r| r.value)
        .fold(0.0, f64::max);
    emit("verify", args, passed, Out { checks: rows, max_residual });
    Ok(passed)
}

fn write_csv(path: &Path, report: &ConvergenceReport) -> Result<(), Failure> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let io = |e: csv::Error| Failure::Numerical(Error::IoFailure(e.to_string()));
    w.write_record(["lambda", "deviation", "end_spacing", "max_absK"]).map_err(io)?;
    for i in 0..report.lambdas.len() {
        w.write_record([
            format!("{:.16e}", report.lambdas[i]),
            format!("{:.16e}", report.deviations[i]),
            format!("{:.16e}", report.end_spacings[i]),
            format!("{:.16e}", report.max_abs_k[i]),
        ])
        .map_err(io)?;
    }
    let bytes = w.into_inner().map_err(|e| Failure::Numerical(Error::IoFailure(e.to_string())))?;
    fs::write(path, bytes).map_err(|e| Failure::Numerical(e.into()))
}

pub fn limits(args: &LimitsArgs) -> Result<bool, Failure> {
    let sched = &args.lambda_schedule;
    let check = |ok: fn(f64) -> bool, what: &str| -> Result<(), Failure> {
        match sched.iter().find(|&&l| !ok(l)) {
            Some(l) => Err(Failure::Usage(format!("{what}, got λ = {l}"))),
            None => Ok(()),
        }
    };
    match args.target {
        Target::Catenoid | Target::Planes => check(|l| l < 1.0, "this target needs λ < 1")?,
        Target::Helicoid => check(|l| l > 1.0, "the helicoid target needs λ > 1")?,
    }
    if args.target == Target::Helicoid && args.max_winding < 1 {
        return Err(Failure::Usage("--max-winding must be at least 1".into()));
    }
    let annulus = Annulus::new(args.annulus_l, args.resolution.radial, args.resolution.angular)
        .map_err(|e| Failure::Usage(e.to_string()))?;
    let clip = ClipRegion::new(args.clip.kind(), args.clip_r).map_err(|e| Failure::Usage(e.to_string()))?;
    let report = match args.target {
        Target::Catenoid => catenoid_limit_sweep(sched, annulus, clip)?,
        Target::Helicoid => helicoid_limit_sweep(sched, annulus, clip, args.max_winding)?,
        Target::Planes => plane_limit_experiment(sched, annulus, clip)?,
    };
    if let Some(path) = &args.csv {
        write_csv(path, &report)?;
    }
    let passed = report.is_monotone();
    emit("limits", args, passed, report);
    Ok(passed)
}
