//! Triangle meshes of a fundamental piece, replicated along the translation
//! period, with ASCII OBJ and PLY export.
//!
//! Each sheet is cut along the real axis into an upper and a lower half, and
//! each half-annulus `1/L ≤ |z| ≤ L` carries a log-polar grid. The four
//! pieces are not welded, so every piece is a disk.

use std::collections::HashSet;
use std::f64::consts::PI;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analysis::abs_gauss_curvature;
use crate::curve::{Lambda, Sheet};
use crate::error::{Error, Result};
use crate::quadrature::Vec3;
use crate::weierstrass::{gauss_map, period_vectors_on, Normalization, NormalizationKind, Piece, SurfaceCharts};

/// Default trimming radius for the planar ends.
pub const DEFAULT_L_MESH: f64 = 40.0;

/// Log-polar grid per sheet: `radial` rings in `[1/L, L]` and `angular`
/// cells around the full circle, half of them in each half-plane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub radial: usize,
    pub angular: usize,
    pub l_mesh: f64,
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec {
            radial: 64,
            angular: 128,
            l_mesh: DEFAULT_L_MESH,
        }
    }
}

impl GridSpec {
    pub fn new(radial: usize, angular: usize, l_mesh: f64) -> Result<Self> {
        let g = GridSpec { radial, angular, l_mesh };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<()> {
        if self.radial < 2 || self.angular < 4 || self.angular % 2 != 0 {
            return Err(Error::InvalidArgument(format!(
                "grid {}x{} needs radial ≥ 2 and an even angular count ≥ 4",
                self.radial, self.angular
            )));
        }
        if !(self.l_mesh > 1.0 && self.l_mesh.is_finite()) {
            return Err(Error::InvalidArgument(format!("trimming radius must exceed 1, got {}", self.l_mesh)));
        }
        Ok(())
    }

    fn radius(&self, i: usize) -> f64 {
        self.l_mesh.powf(-1.0 + 2.0 * i as f64 / (self.radial - 1) as f64)
    }

    /// Triangles per sheet per copy.
    pub fn triangles_per_sheet(&self) -> usize {
        2 * (self.radial - 1) * self.angular
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeshProvenance {
    pub lambda: f64,
    pub normalization: NormalizationKind,
    pub sheet: Sheet,
    pub grid: GridSpec,
    pub copies: usize,
    pub translation: Vec3,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SurfaceMesh {
    pub vertices: Vec<Vec3>,
    pub triangles: Vec<[usize; 3]>,
    pub normals: Vec<Vec3>,
    pub abs_k: Vec<f64>,
    pub provenance: Option<MeshProvenance>,
}

fn sub(a: Vec3, b: Vec3) -> Vec3 {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

fn cross(a: Vec3, b: Vec3) -> Vec3 {
    [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
}

fn norm3(a: Vec3) -> f64 {
    (a[0] * a[0] + a[1] * a[1] + a[2] * a[2]).sqrt()
}

impl SurfaceMesh {
    pub fn triangle_area(&self, t: usize) -> f64 {
        let [a, b, c] = self.triangles[t].map(|i| self.vertices[i]);
        0.5 * norm3(cross(sub(b, a), sub(c, a)))
    }

    /// Unit normal of triangle `t` from its vertex order.
    pub fn face_normal(&self, t: usize) -> Vec3 {
        let [a, b, c] = self.triangles[t].map(|i| self.vertices[i]);
        let n = cross(sub(b, a), sub(c, a));
        let l = norm3(n);
        n.map(|v| v / l)
    }

    /// Check indices, unit normals and triangle areas.
    pub fn validate(&self) -> Result<()> {
        let n = self.vertices.len();
        if self.normals.len() != n || self.abs_k.len() != n {
            return Err(Error::LengthMismatch(n, self.normals.len().min(self.abs_k.len())));
        }
        if let Some(t) = self.triangles.iter().find(|t| t.iter().any(|&i| i >= n)) {
            return Err(Error::InvalidArgument(format!("triangle {t:?} indexes past {n} vertices")));
        }
        if let Some(v) = self.normals.iter().find(|v| (norm3(**v) - 1.0).abs() > 1e-9) {
            return Err(Error::InvalidArgument(format!("normal {v:?} is not unit length")));
        }
        if let Some(t) = (0..self.triangles.len()).find(|&t| !(self.triangle_area(t) > 1e-12)) {
            return Err(Error::InvalidArgument(format!("triangle {t} is degenerate")));
        }
        Ok(())
    }

    /// `V - E + F`.
    pub fn euler_characteristic(&self) -> i64 {
        let mut edges = HashSet::new();
        for t in &self.triangles {
            for k in 0..3 {
                let (a, b) = (t[k], t[(k + 1) % 3]);
                edges.insert((a.min(b), a.max(b)));
            }
        }
        self.vertices.len() as i64 - edges.len() as i64 + self.triangles.len() as i64
    }

    pub fn max_abs_k(&self) -> f64 {
        self.abs_k.iter().copied().fold(0.0, f64::max)
    }
}

/// One half-annulus piece: vertices are `(i, j)` with ring `i` outermost.
fn piece_grid(charts: &SurfaceCharts, piece: Piece, grid: &GridSpec) -> Result<Vec<(Complex64, Vec3)>> {
    let half = grid.angular / 2;
    let sign = match piece.half() {
        crate::curve::Half::Upper => 1.0,
        crate::curve::Half::Lower => -1.0,
    };
    let chart = charts.chart(piece);
    let nodes: Vec<Complex64> = (0..grid.radial)
        .flat_map(|i| {
            let r = grid.radius(i);
            (0..=half).map(move |j| {
                let t = PI * j as f64 / half as f64;
                if j == 0 {
                    Complex64::new(r, 0.0)
                } else if j == half {
                    Complex64::new(-r, 0.0)
                } else {
                    Complex64::from_polar(r, sign * t)
                }
            })
        })
        .collect();
    nodes
        .into_par_iter()
        .map(|z| Ok((z, chart.position(z)?)))
        .collect()
}

/// Mesh of the surface over `1/L ≤ |z| ≤ L` plus `copies - 1` translates by `T`.
pub fn build_mesh(lambda: Lambda, norm: &Normalization, grid: GridSpec, copies: usize) -> Result<SurfaceMesh> {
    grid.validate()?;
    if copies == 0 {
        return Err(Error::InvalidArgument("copies must be at least 1".into()));
    }
    let sheet = Sheet::Plus;
    let charts = SurfaceCharts::new(lambda, norm, sheet)?;
    let translation = period_vectors_on(lambda, norm, sheet)?.translation;
    let cols = grid.angular / 2 + 1;

    let mut zs = Vec::new();
    let mut base = Vec::new();
    let mut tris = Vec::new();
    for piece in Piece::ALL {
        let start = base.len();
        for (z, x) in piece_grid(&charts, piece, &grid)? {
            zs.push(z);
            base.push(x);
        }
        let upper = piece.half() == crate::curve::Half::Upper;
        for i in 0..grid.radial - 1 {
            for j in 0..cols - 1 {
                let a = start + i * cols + j;
                let (b, c, d) = (a + 1, a + cols, a + cols + 1);
                // counterclockwise in z on both halves
                if upper {
                    tris.push([a, c, b]);
                    tris.push([b, c, d]);
                } else {
                    tris.push([a, b, c]);
                    tris.push([b, d, c]);
                }
            }
        }
    }
    let normals: Vec<Vec3> = zs.iter().map(|&z| gauss_map(z)).collect();
    let abs_k = zs
        .par_iter()
        .map(|&z| abs_gauss_curvature(z, lambda, norm))
        .collect::<Result<Vec<_>>>()?;

    let n = base.len();
    let mut mesh = SurfaceMesh {
        vertices: Vec::with_capacity(n * copies),
        triangles: Vec::with_capacity(tris.len() * copies),
        normals: Vec::with_capacity(n * copies),
        abs_k: Vec::with_capacity(n * copies),
        provenance: Some(MeshProvenance {
            lambda: lambda.value(),
            normalization: norm.kind,
            sheet,
            grid,
            copies,
            translation,
        }),
    };
    for k in 0..copies {
        let shift = translation.map(|v| v * k as f64);
        mesh.vertices
            .extend(base.iter().map(|x| [x[0] + shift[0], x[1] + shift[1], x[2] + shift[2]]));
        mesh.triangles
            .extend(tris.iter().map(|t| t.map(|i| i + k * n)));
        mesh.normals.extend_from_slice(&normals);
        mesh.abs_k.extend_from_slice(&abs_k);
    }
    Ok(mesh)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MeshFormat {
    Obj,
    Ply,
}

/// Seventeen significant digits, enough to round-trip any `f64`.
fn num(x: f64) -> String {
    format!("{x:.16e}")
}

fn provenance_line(mesh: &SurfaceMesh) -> Result<Option<String>> {
    mesh.provenance
        .as_ref()
        .map(|p| serde_json::to_string(p).map_err(|e| Error::IoFailure(e.to_string())))
        .transpose()
}

pub fn to_obj(mesh: &SurfaceMesh) -> Result<String> {
    let mut s = String::from("# riemann surface mesh\n");
    if let Some(p) = provenance_line(mesh)? {
        writeln!(s, "# provenance {p}").unwrap();
    }
    for v in &mesh.vertices {
        writeln!(s, "v {} {} {}", num(v[0]), num(v[1]), num(v[2])).unwrap();
    }
    for n in &mesh.normals {
        writeln!(s, "vn {} {} {}", num(n[0]), num(n[1]), num(n[2])).unwrap();
    }
    for t in &mesh.triangles {
        let [a, b, c] = t.map(|i| i + 1);
        writeln!(s, "f {a}//{a} {b}//{b} {c}//{c}").unwrap();
    }
    Ok(s)
}

pub fn to_ply(mesh: &SurfaceMesh) -> Result<String> {
    let mut s = String::from("ply\nformat ascii 1.0\n");
    if let Some(p) = provenance_line(mesh)? {
        writeln!(s, "comment provenance {p}").unwrap();
    }
    writeln!(s, "element vertex {}", mesh.vertices.len()).unwrap();
    for p in ["x", "y", "z", "nx", "ny", "nz", "quality"] {
        writeln!(s, "property double {p}").unwrap();
    }
    writeln!(s, "element face {}", mesh.triangles.len()).unwrap();
    s.push_str("property list uchar int vertex_indices\nend_header\n");
    for ((v, n), k) in mesh.vertices.iter().zip(&mesh.normals).zip(&mesh.abs_k) {
        let row: Vec<String> = [v[0], v[1], v[2], n[0], n[1], n[2], *k].iter().map(|&x| num(x)).collect();
        writeln!(s, "{}", row.join(" ")).unwrap();
    }
    for t in &mesh.triangles {
        writeln!(s, "3 {} {} {}", t[0], t[1], t[2]).unwrap();
    }
    Ok(s)
}

pub fn export(mesh: &SurfaceMesh, format: MeshFormat, path: &Path) -> Result<()> {
    let text = match format {
        MeshFormat::Obj => to_obj(mesh)?,
        MeshFormat::Ply => to_ply(mesh)?,
    };
    fs::write(path, text)?;
    Ok(())
}

fn bad(line: usize, what: &str) -> Error {
    Error::IoFailure(format!("line {line}: {what}"))
}

fn floats<const N: usize>(fields: &[&str], line: usize) -> Result<[f64; N]> {
    if fields.len() != N {
        return Err(bad(line, "wrong number of fields"));
    }
    let mut out = [0.0; N];
    for (o, f) in out.iter_mut().zip(fields) {
        *o = f.parse().map_err(|_| bad(line, "bad number"))?;
    }
    Ok(out)
}

fn parse_provenance(json: &str, line: usize) -> Result<MeshProvenance> {
    serde_json::from_str(json).map_err(|_| bad(line, "bad provenance"))
}

pub fn parse_obj(text: &str) -> Result<SurfaceMesh> {
    let mut mesh = SurfaceMesh::default();
    for (k, raw) in text.lines().enumerate() {
        let line = k + 1;
        let fields: Vec<&str> = raw.split_whitespace().collect();
        match fields.first().copied() {
            Some("v") => mesh.vertices.push(floats::<3>(&fields[1..], line)?),
            Some("vn") => mesh.normals.push(floats::<3>(&fields[1..], line)?),
            Some("f") => {
                if fields.len() != 4 {
                    return Err(bad(line, "only triangles are supported"));
                }
                let mut t = [0usize; 3];
                for (slot, f) in t.iter_mut().zip(&fields[1..]) {
                    let idx: usize = f
                        .split('/')
                        .next()
                        .and_then(|s| s.parse().ok())
                        .ok_or_else(|| bad(line, "bad face index"))?;
                    if idx == 0 {
                        return Err(bad(line, "face indices are 1-based"));
                    }
                    *slot = idx - 1;
                }
                mesh.triangles.push(t);
            }
            Some("#") if fields.get(1) == Some(&"provenance") => {
                let json = raw.splitn(3, ' ').nth(2).unwrap_or("");
                mesh.provenance = Some(parse_provenance(json, line)?);
            }
            _ => {}
        }
    }
    mesh.abs_k = vec![0.0; mesh.vertices.len()];
    Ok(mesh)
}

pub fn parse_ply(text: &str) -> Result<SurfaceMesh> {
    let mut mesh = SurfaceMesh::default();
    let mut lines = text.lines().enumerate();
    let (mut nv, mut nf) = (None, None);
    if lines.next().map(|(_, l)| l) != Some("ply") {
        return Err(bad(1, "missing ply magic"));
    }
    for (k, raw) in lines.by_ref() {
        let fields: Vec<&str> = raw.split_whitespace().collect();
        match fields.as_slice() {
            ["format", "ascii", "1.0"] => {}
            ["format", ..] => return Err(bad(k + 1, "only ascii 1.0 is supported")),
            ["comment", "provenance", ..] => {
                let json = raw.splitn(3, ' ').nth(2).unwrap_or("");
                mesh.provenance = Some(parse_provenance(json, k + 1)?);
            }
            ["element", "vertex", n] => nv = Some(n.parse::<usize>().map_err(|_| bad(k + 1, "bad count"))?),
            ["element", "face", n] => nf = Some(n.parse::<usize>().map_err(|_| bad(k + 1, "bad count"))?),
            ["end_header"] => break,
            _ => {}
        }
    }
    let (nv, nf) = (nv.unwrap_or(0), nf.unwrap_or(0));
    for _ in 0..nv {
        let (k, raw) = lines.next().ok_or_else(|| bad(0, "truncated vertex list"))?;
        let fields: Vec<&str> = raw.split_whitespace().collect();
        let [x, y, z, a, b, c, q] = floats::<7>(&fields, k + 1)?;
        mesh.vertices.push([x, y, z]);
        mesh.normals.push([a, b, c]);
        mesh.abs_k.push(q);
    }
    for _ in 0..nf {
        let (k, raw) = lines.next().ok_or_else(|| bad(0, "truncated face list"))?;
        let fields: Vec<usize> = raw
            .split_whitespace()
            .map(|f| f.parse().map_err(|_| bad(k + 1, "bad face")))
            .collect::<Result<_>>()?;
        match fields.as_slice() {
            [3, a, b, c] => mesh.triangles.push([*a, *b, *c]),
            _ => return Err(bad(k + 1, "only triangles are supported")),
        }
    }
    Ok(mesh)
}

pub fn import(format: MeshFormat, path: &Path) -> Result<SurfaceMesh> {
    let text = fs::read_to_string(path)?;
    match format {
        MeshFormat::Obj => parse_obj(&text),
        MeshFormat::Ply => parse_ply(&text),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lam(v: f64) -> Lambda {
        Lambda::new(v).unwrap()
    }

    fn small() -> GridSpec {
        GridSpec::new(12, 16, 10.0).unwrap()
    }

    #[test]
    fn grid_validation() {
        assert!(GridSpec::new(1, 16, 40.0).is_err());
        assert!(GridSpec::new(8, 15, 40.0).is_err());
        assert!(GridSpec::new(8, 16, 1.0).is_err());
        assert_eq!(GridSpec::default().l_mesh, 40.0);
    }

    #[test]
    fn counts_and_validity() {
        let lambda = lam(0.7);
        let norm = Normalization::paper(lambda);
        let g = small();
        let m = build_mesh(lambda, &norm, g, 1).unwrap();
        m.validate().unwrap();
        assert_eq!(m.triangles.len(), 2 * g.triangles_per_sheet());
        assert_eq!(m.euler_characteristic(), 4);
        let m = build_mesh(lambda, &norm, GridSpec::new(20, 24, 10.0).unwrap(), 1).unwrap();
        assert_eq!(m.euler_characteristic(), 4);
    }

    #[test]
    fn copies_are_translates() {
        let lambda = lam(2.0);
        let norm = Normalization::paper(lambda);
        let one = build_mesh(lambda, &norm, small(), 1).unwrap();
        let two = build_mesh(lambda, &norm, small(), 2).unwrap();
        let t = two.provenance.unwrap().translation;
        let n = one.vertices.len();
        assert_eq!(&two.vertices[..n], &one.vertices[..]);
        for (a, b) in one.vertices.iter().zip(&two.vertices[n..]) {
            assert_eq!([a[0] + t[0], a[1] + t[1], a[2] + t[2]], *b);
        }
        assert_eq!(two.euler_characteristic(), 8);
    }

    #[test]
    fn round_trips() {
        let lambda = lam(1.3);
        let m = build_mesh(lambda, &Normalization::paper(lambda), GridSpec::new(6, 8, 5.0).unwrap(), 2).unwrap();
        let ply = to_ply(&m).unwrap();
        let back = parse_ply(&ply).unwrap();
        assert_eq!(back, m);
        assert_eq!(to_ply(&back).unwrap(), ply);
        let obj = to_obj(&m).unwrap();
        let back = parse_obj(&obj).unwrap();
        assert_eq!(back.vertices, m.vertices);
        assert_eq!(back.triangles, m.triangles);
        assert_eq!(to_obj(&back).unwrap(), obj);
    }

    #[test]
    fn empty_mesh_exports() {
        let m = SurfaceMesh::default();
        let ply = to_ply(&m).unwrap();
        assert!(ply.contains("element vertex 0\n") && ply.contains("element face 0\n"));
        assert_eq!(parse_ply(&ply).unwrap(), m);
        assert_eq!(parse_obj(&to_obj(&m).unwrap()).unwrap(), m);
    }
}
