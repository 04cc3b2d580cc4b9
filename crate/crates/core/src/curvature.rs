//! Discrete and fitted Gaussian curvature, boundary turning, Gauss-Bonnet
//! bookkeeping and the topological and area corollaries.

use std::collections::{BTreeMap, BTreeSet};
use std::f64::consts::PI;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::graph::neumaier_sum;
use crate::hyperbolic::AmbientKind;
use crate::mesh::TriMesh;
use crate::{Error, Result};

/// Metric used for intrinsic edge lengths.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EdgeMetric {
    Euclidean,
    /// `ℍ² × ℝ` in the half-plane chart.
    Product,
    /// `ℍ³` in the upper half-space chart with height `y`.
    Hyperbolic,
}

impl From<AmbientKind> for EdgeMetric {
    fn from(a: AmbientKind) -> Self {
        match a {
            AmbientKind::ProductCusp => EdgeMetric::Product,
            AmbientKind::HyperbolicCusp => EdgeMetric::Hyperbolic,
        }
    }
}

/// Geodesic distance between two chart points.
pub fn edge_length(metric: EdgeMetric, a: &[f64; 3], b: &[f64; 3]) -> f64 {
    let (dx, dy, dt) = (a[0] - b[0], a[1] - b[1], a[2] - b[2]);
    match metric {
        EdgeMetric::Euclidean => (dx * dx + dy * dy + dt * dt).sqrt(),
        EdgeMetric::Product => {
            let dh = 2.0 * ((dx * dx + dy * dy).sqrt() / (2.0 * (a[1] * b[1]).sqrt())).asinh();
            (dh * dh + dt * dt).sqrt()
        }
        EdgeMetric::Hyperbolic => {
            2.0 * ((dx * dx + dy * dy + dt * dt).sqrt() / (2.0 * (a[1] * b[1]).sqrt())).asinh()
        }
    }
}

/// A triangle complex whose triangles carry their own coordinates, so that
/// identified vertices may sit at different chart positions.
#[derive(Debug, Clone, Default)]
pub struct IntrinsicMesh {
    pub n_vertices: usize,
    pub triangles: Vec<[usize; 3]>,
    pub coords: Vec<[[f64; 3]; 3]>,
}

impl IntrinsicMesh {
    pub fn from_trimesh(mesh: &TriMesh) -> Self {
        IntrinsicMesh {
            n_vertices: mesh.vertices.len(),
            triangles: mesh.triangles.clone(),
            coords: mesh
                .triangles
                .iter()
                .map(|t| t.map(|v| mesh.vertices[v]))
                .collect(),
        }
    }

    /// Keep the listed triangles, renumbering vertices densely.
    pub fn subset(&self, keep: &[usize]) -> Self {
        let mut renum = BTreeMap::new();
        let mut triangles = Vec::with_capacity(keep.len());
        for &k in keep {
            let t = self.triangles[k].map(|v| {
                let n = renum.len();
                *renum.entry(v).or_insert(n)
            });
            triangles.push(t);
        }
        IntrinsicMesh {
            n_vertices: renum.len(),
            triangles,
            coords: keep.iter().map(|&k| self.coords[k]).collect(),
        }
    }

    /// Undirected edges with incidence counts.
    pub fn edges(&self) -> BTreeMap<(usize, usize), usize> {
        let mut m = BTreeMap::new();
        for t in &self.triangles {
            for k in 0..3 {
                let (a, b) = (t[k], t[(k + 1) % 3]);
                *m.entry((a.min(b), a.max(b))).or_insert(0) += 1;
            }
        }
        m
    }

    pub fn used_vertices(&self) -> usize {
        self.triangles
            .iter()
            .flatten()
            .collect::<BTreeSet<_>>()
            .len()
    }

    pub fn euler_characteristic(&self) -> i64 {
        self.used_vertices() as i64 - self.edges().len() as i64 + self.triangles.len() as i64
    }

    pub fn boundary_mask(&self) -> Vec<bool> {
        let mut mask = vec![false; self.n_vertices];
        for ((a, b), n) in self.edges() {
            if n == 1 {
                mask[a] = true;
                mask[b] = true;
            }
        }
        mask
    }

    /// Boundary loops as vertex cycles; errors on non-manifold boundary.
    pub fn boundary_loops(&self) -> Result<Vec<Vec<usize>>> {
        let mut adj: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for ((a, b), n) in self.edges() {
            if n > 2 {
                return Err(Error::domain(format!(
                    "edge ({a}, {b}) has {n} incident triangles"
                )));
            }
            if n == 1 {
                adj.entry(a).or_default().push(b);
                adj.entry(b).or_default().push(a);
            }
        }
        if let Some((v, _)) = adj.iter().find(|(_, n)| n.len() != 2) {
            return Err(Error::domain(format!(
                "boundary vertex {v} is not on a simple loop"
            )));
        }
        let mut seen = BTreeSet::new();
        let mut loops = Vec::new();
        for &s in adj.keys() {
            if seen.contains(&s) {
                continue;
            }
            let mut lp = vec![s];
            seen.insert(s);
            let (mut prev, mut cur) = (s, adj[&s][0]);
            while cur != s {
                lp.push(cur);
                seen.insert(cur);
                let n = &adj[&cur];
                let next = if n[0] == prev { n[1] } else { n[0] };
                prev = cur;
                cur = next;
            }
            loops.push(lp);
        }
        Ok(loops)
    }

    /// Intrinsic edge lengths `[|v1 v2|, |v2 v0|, |v0 v1|]` of triangle `k`.
    pub fn lengths(&self, k: usize, metric: EdgeMetric) -> [f64; 3] {
        let c = &self.coords[k];
        [
            edge_length(metric, &c[1], &c[2]),
            edge_length(metric, &c[2], &c[0]),
            edge_length(metric, &c[0], &c[1]),
        ]
    }

    /// Corner angles of triangle `k` from its intrinsic edge lengths.
    pub fn angles(&self, k: usize, metric: EdgeMetric) -> Result<[f64; 3]> {
        let l = self.lengths(k, metric);
        let s = l.iter().sum::<f64>();
        if l.iter().any(|&x| !(x > 1e-14 * s)) || l.iter().any(|&x| x >= 0.5 * s * (1.0 + 1e-14)) {
            return Err(Error::domain(format!("degenerate triangle {k}")));
        }
        let ang = |a: f64, b: f64, c: f64| {
            ((b * b + c * c - a * a) / (2.0 * b * c))
                .clamp(-1.0, 1.0)
                .acos()
        };
        Ok([
            ang(l[0], l[1], l[2]),
            ang(l[1], l[2], l[0]),
            ang(l[2], l[0], l[1]),
        ])
    }

    /// Heron area of triangle `k`.
    pub fn area(&self, k: usize, metric: EdgeMetric) -> f64 {
        let mut l = self.lengths(k, metric);
        l.sort_by(|a, b| b.partial_cmp(a).unwrap());
        let (a, b, c) = (l[0], l[1], l[2]);
        let q = (a + (b + c)) * (c - (a - b)) * (c + (a - b)) * (a + (b - c));
        0.25 * q.max(0.0).sqrt()
    }

    /// Angle sum at every vertex.
    pub fn angle_sums(&self, metric: EdgeMetric) -> Result<Vec<f64>> {
        let mut per_vertex: Vec<Vec<f64>> = vec![Vec::new(); self.n_vertices];
        for (k, t) in self.triangles.iter().enumerate() {
            let a = self.angles(k, metric)?;
            for i in 0..3 {
                per_vertex[t[i]].push(a[i]);
            }
        }
        Ok(per_vertex.into_iter().map(neumaier_sum).collect())
    }
}

/// Sum of interior angle defects: the polyhedral `∫K dA`.
pub fn gaussian_total(mesh: &IntrinsicMesh, metric: EdgeMetric) -> Result<f64> {
    let sums = mesh.angle_sums(metric)?;
    let bd = mesh.boundary_mask();
    let used: BTreeSet<usize> = mesh.triangles.iter().flatten().copied().collect();
    Ok(neumaier_sum(
        used.into_iter()
            .filter(|&v| !bd[v])
            .map(|v| 2.0 * PI - sums[v]),
    ))
}

/// Turning-angle total and metric length of a closed boundary loop.
pub fn geodesic_curvature_loop(
    mesh: &IntrinsicMesh,
    lp: &[usize],
    metric: EdgeMetric,
) -> Result<(f64, f64)> {
    if lp.len() < 3 {
        return Err(Error::input("loop needs at least three vertices"));
    }
    let edges = mesh.edges();
    let mut coords: BTreeMap<(usize, usize), ([f64; 3], [f64; 3])> = BTreeMap::new();
    for (t, c) in mesh.triangles.iter().zip(&mesh.coords) {
        for k in 0..3 {
            let (a, b) = (t[k], t[(k + 1) % 3]);
            coords.entry((a.min(b), a.max(b))).or_insert(if a < b {
                (c[k], c[(k + 1) % 3])
            } else {
                (c[(k + 1) % 3], c[k])
            });
        }
    }
    let mut length = Vec::with_capacity(lp.len());
    for i in 0..lp.len() {
        let (a, b) = (lp[i], lp[(i + 1) % lp.len()]);
        let key = (a.min(b), a.max(b));
        if edges.get(&key) != Some(&1) {
            return Err(Error::input(format!(
                "({a}, {b}) is not a boundary edge; the loop is not closed"
            )));
        }
        let (p, q) = coords[&key];
        length.push(edge_length(metric, &p, &q));
    }
    let sums = mesh.angle_sums(metric)?;
    let turning = neumaier_sum(lp.iter().map(|&v| PI - sums[v]));
    Ok((turning, neumaier_sum(length)))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundaryTerm {
    pub loop_id: usize,
    pub kg: f64,
    pub length: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurvatureReport {
    pub total_k: f64,
    pub boundary_terms: Vec<BoundaryTerm>,
    pub chi_truncated: i64,
    pub gb_defect: f64,
    pub y_cut: Option<f64>,
}

/// `∫K + Σ∫k_g − 2πχ`, with `total_k` supplied or taken from angle defects.
pub fn gauss_bonnet_check(
    mesh: &IntrinsicMesh,
    metric: EdgeMetric,
    total_k: Option<f64>,
    y_cut: Option<f64>,
) -> Result<CurvatureReport> {
    let total_k = match total_k {
        Some(k) => k,
        None => gaussian_total(mesh, metric)?,
    };
    let mut boundary_terms = Vec::new();
    for (i, lp) in mesh.boundary_loops()?.iter().enumerate() {
        let (kg, length) = geodesic_curvature_loop(mesh, lp, metric)?;
        boundary_terms.push(BoundaryTerm {
            loop_id: i,
            kg,
            length,
        });
    }
    let chi = mesh.euler_characteristic();
    let kg = neumaier_sum(boundary_terms.iter().map(|b| b.kg));
    Ok(CurvatureReport {
        total_k,
        boundary_terms,
        chi_truncated: chi,
        gb_defect: total_k + kg - 2.0 * PI * chi as f64,
        y_cut,
    })
}

/// Gaussian curvature of the graph `t = u(x, y)` in `ℍ² × ℝ`, half-plane chart,
/// from first and second derivatives.
pub fn graph_gaussian_curvature(y: f64, ux: f64, uy: f64, uxx: f64, uxy: f64, uyy: f64) -> f64 {
    let w2 = 1.0 + y * y * (ux * ux + uy * uy);
    let l = uxx - uy / y;
    let m = uxy + ux / y;
    let n = uyy + uy / y;
    (l * n - m * m) * y.powi(4) / (w2 * w2) - 1.0 / w2
}

fn solve6(mut a: [[f64; 7]; 6]) -> Option<[f64; 6]> {
    for c in 0..6 {
        let p = (c..6).max_by(|&i, &j| a[i][c].abs().partial_cmp(&a[j][c].abs()).unwrap())?;
        if a[p][c].abs() < 1e-12 {
            return None;
        }
        a.swap(c, p);
        for r in 0..6 {
            if r != c {
                let f = a[r][c] / a[c][c];
                for k in c..7 {
                    a[r][k] -= f * a[c][k];
                }
            }
        }
    }
    let mut x = [0.0; 6];
    for i in 0..6 {
        x[i] = a[i][6] / a[i][i];
    }
    Some(x)
}

/// Gaussian curvature at the origin of normal coordinates `(s₁, s₂, t)` of
/// `ℍ² × ℝ` (metric `δ` with vanishing first derivatives there) for the
/// surface `c = f(a, b)` over an orthonormal frame `(e₁, e₂, n)`, where `f`
/// has the given first and second derivatives at the origin and `n_t` is
/// the `t` component of `n`, `e1_t` and `e2_t` those of `e₁` and `e₂`.
pub fn normal_chart_curvature(d: [f64; 5], frame_t: [f64; 3]) -> f64 {
    let [fa, fb, faa, fab, fbb] = d;
    let w2 = 1.0 + fa * fa + fb * fb;
    let nu = (frame_t[2] - fa * frame_t[0] - fb * frame_t[1]) / w2.sqrt();
    (faa * fbb - fab * fab) / (w2 * w2) - nu * nu
}

fn cross(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

fn unit(a: [f64; 3]) -> Option<[f64; 3]> {
    let n = (a[0] * a[0] + a[1] * a[1] + a[2] * a[2]).sqrt();
    (n > 0.0).then(|| [a[0] / n, a[1] / n, a[2] / n])
}

/// Vertex curvature of a mesh in `ℍ² × ℝ` by least-squares quadratics over
/// the two-ring. Each ring is moved to normal coordinates `(2w, t − t₀)`,
/// `w = (z − z₀)/(z − z̄₀)`, and fitted as a height function over the plane
/// orthogonal to the area-weighted vertex normal, so neither the half-plane
/// chart nor vertical parts of the surface affect the fit. Vertices flagged
/// `skip` neither get a value nor enter fits.
pub fn fitted_curvature(mesh: &TriMesh, skip: &[bool]) -> Vec<f64> {
    let n = mesh.vertices.len();
    let mut nbr: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); n];
    let mut incident: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (k, t) in mesh.triangles.iter().enumerate() {
        for i in 0..3 {
            incident[t[i]].push(k);
            for j in 0..3 {
                if i != j {
                    nbr[t[i]].insert(t[j]);
                }
            }
        }
    }
    (0..n)
        .map(|v| {
            if skip[v] {
                return f64::NAN;
            }
            let mut ring: BTreeSet<usize> = nbr[v].clone();
            for &w in &nbr[v] {
                ring.extend(nbr[w].iter().copied());
            }
            ring.insert(v);
            let pts: Vec<usize> = ring.into_iter().filter(|&w| !skip[w]).collect();
            if pts.len() < 8 {
                return f64::NAN;
            }
            let p0 = mesh.vertices[v];
            let local = |q: [f64; 3]| {
                let (nx, ny) = (q[0] - p0[0], q[1] - p0[1]);
                let (dx, dy) = (q[0] - p0[0], q[1] + p0[1]);
                let d = dx * dx + dy * dy;
                [
                    2.0 * (nx * dx + ny * dy) / d,
                    2.0 * (ny * dx - nx * dy) / d,
                    q[2] - p0[2],
                ]
            };
            let mut normal = [0.0; 3];
            for &k in &incident[v] {
                let [a, b, c] = mesh.triangles[k].map(|w| local(mesh.vertices[w]));
                let e1 = [b[0] - a[0], b[1] - a[1], b[2] - a[2]];
                let e2 = [c[0] - a[0], c[1] - a[1], c[2] - a[2]];
                let x = cross(e1, e2);
                normal = [normal[0] + x[0], normal[1] + x[1], normal[2] + x[2]];
            }
            let Some(nz) = unit(normal) else {
                return f64::NAN;
            };
            let helper = if nz[2].abs() < 0.9 {
                [0.0, 0.0, 1.0]
            } else {
                [1.0, 0.0, 0.0]
            };
            let Some(ex) = unit(cross(helper, nz)) else {
                return f64::NAN;
            };
            let ey = cross(nz, ex);
            let dot = |a: [f64; 3], b: [f64; 3]| a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
            let proj: Vec<[f64; 3]> = pts
                .iter()
                .map(|&w| {
                    let q = local(mesh.vertices[w]);
                    [dot(q, ex), dot(q, ey), dot(q, nz)]
                })
                .collect();
            let rho = proj.iter().map(|q| q[0].hypot(q[1])).fold(0.0, f64::max);
            if !(rho > 0.0) {
                return f64::NAN;
            }
            let mut a = [[0.0; 7]; 6];
            for q in &proj {
                let (s, r) = (q[0] / rho, q[1] / rho);
                let phi = [1.0, s, r, s * s, s * r, r * r];
                for i in 0..6 {
                    for j in 0..6 {
                        a[i][j] += phi[i] * phi[j];
                    }
                    a[i][6] += phi[i] * q[2];
                }
            }
            match solve6(a) {
                Some(c) => normal_chart_curvature(
                    [
                        c[1] / rho,
                        c[2] / rho,
                        2.0 * c[3] / (rho * rho),
                        c[4] / (rho * rho),
                        2.0 * c[5] / (rho * rho),
                    ],
                    [ex[2], ey[2], nz[2]],
                ),
                None => f64::NAN,
            }
        })
        .collect()
}

/// `Σ_T K̄_T A_T` over the listed triangles of a graph patch, with `K̄_T` the
/// mean of the finite vertex values and `A_T` the intrinsic product area.
pub fn smooth_total(mesh: &TriMesh, k_vertex: &[f64], triangles: &[usize]) -> f64 {
    let im = IntrinsicMesh::from_trimesh(mesh);
    neumaier_sum(triangles.iter().map(|&k| {
        let vals: Vec<f64> = mesh.triangles[k]
            .iter()
            .map(|&v| k_vertex[v])
            .filter(|x| x.is_finite())
            .collect();
        if vals.is_empty() {
            0.0
        } else {
            vals.iter().sum::<f64>() / vals.len() as f64 * im.area(k, EdgeMetric::Product)
        }
    }))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TruncationRow {
    pub y_cut: f64,
    pub total_k: f64,
    pub polyhedral_k: f64,
    pub boundary_kg: f64,
    pub gb_defect: f64,
    pub chi_truncated: i64,
    /// Per-loop `(∫k_g, length)` in loop order.
    pub loops: Vec<BoundaryTerm>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TruncationSeries {
    pub cuts: Vec<f64>,
    pub totals: Vec<f64>,
    /// Richardson on the two finest cuts, assuming an error `O(1/y)`.
    pub extrapolated_total: f64,
    pub rows: Vec<TruncationRow>,
}

impl TruncationSeries {
    pub fn new(rows: Vec<TruncationRow>) -> Result<Self> {
        if rows.is_empty() || rows.windows(2).any(|w| !(w[0].y_cut < w[1].y_cut)) {
            return Err(Error::input(
                "truncation cuts must be non-empty and strictly increasing",
            ));
        }
        let cuts: Vec<f64> = rows.iter().map(|r| r.y_cut).collect();
        let totals: Vec<f64> = rows.iter().map(|r| r.total_k).collect();
        let n = rows.len();
        let extrapolated_total = if n >= 2 {
            let (y1, y2) = (cuts[n - 2], cuts[n - 1]);
            (y2 * totals[n - 1] - y1 * totals[n - 2]) / (y2 - y1)
        } else {
            totals[0]
        };
        Ok(TruncationSeries {
            cuts,
            totals,
            extrapolated_total,
            rows,
        })
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("y_cut,loop,length,kg,total_k\n");
        for r in &self.rows {
            for l in &r.loops {
                let _ = writeln!(
                    s,
                    "{},{},{:.12e},{:.12e},{:.12e}",
                    r.y_cut, l.loop_id, l.length, l.kg, r.total_k
                );
            }
        }
        s
    }
}

/// Horoball height of each vertex: the largest of `y` (cusp at infinity)
/// and `y/|z − a|²` over finite cusps `a`, the height after `z ↦ −1/(z − a)`.
pub fn horoball_heights(mesh: &TriMesh, cusps: &[Option<f64>]) -> Vec<f64> {
    mesh.vertices
        .iter()
        .map(|v| {
            cusps
                .iter()
                .map(|c| match c {
                    None => v[1],
                    Some(a) => v[1] / ((v[0] - a).powi(2) + v[1] * v[1]),
                })
                .fold(f64::NEG_INFINITY, f64::max)
        })
        .collect()
}

/// Truncation series of a product-model mesh cut where the per-vertex
/// `heights` exceed each cut.
pub fn mesh_truncation_series(
    mesh: &TriMesh,
    heights: &[f64],
    cuts: &[f64],
) -> Result<TruncationSeries> {
    if heights.len() != mesh.vertices.len() {
        return Err(Error::input("one height per vertex required"));
    }
    let k_vertex = fitted_curvature(mesh, &vec![false; mesh.vertices.len()]);
    let intrinsic = IntrinsicMesh::from_trimesh(mesh);
    let mut rows = Vec::with_capacity(cuts.len());
    for &y in cuts {
        let limit = y * (1.0 + 1e-9);
        let keep: Vec<usize> = (0..mesh.triangles.len())
            .filter(|&k| mesh.triangles[k].iter().all(|&v| heights[v] <= limit))
            .collect();
        if keep.is_empty() {
            return Err(Error::input(format!("no triangles below cut {y}")));
        }
        let report =
            gauss_bonnet_check(&intrinsic.subset(&keep), EdgeMetric::Product, None, Some(y))?;
        rows.push(TruncationRow {
            y_cut: y,
            total_k: smooth_total(mesh, &k_vertex, &keep),
            polyhedral_k: report.total_k,
            boundary_kg: neumaier_sum(report.boundary_terms.iter().map(|b| b.kg)),
            gb_defect: report.gb_defect,
            chi_truncated: report.chi_truncated,
            loops: report.boundary_terms,
        });
    }
    TruncationSeries::new(rows)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "verdict")]
pub enum Obstruction {
    Allowed { note: Option<String> },
    Forbidden { reason: String },
}

/// Topological verdict for a properly immersed finite-total-curvature minimal
/// surface of genus `g` with `n` ends.
pub fn obstruction_check(g: u32, n: u32, ambient: AmbientKind) -> Obstruction {
    let chi = 2 - 2 * g as i64 - n as i64;
    if chi > 0 {
        let what = if n == 0 { "a sphere" } else { "a plane" };
        return Obstruction::Forbidden {
            reason: format!("2 - 2g - n = {chi} > 0 rules out {what}"),
        };
    }
    match ambient {
        AmbientKind::HyperbolicCusp if chi == 0 => Obstruction::Forbidden {
            reason: "2g + n - 2 <= 0 leaves no room for positive area".into(),
        },
        AmbientKind::ProductCusp if chi == 0 => Obstruction::Allowed {
            note: Some(if n == 2 {
                "total curvature 0 forces a vertical annulus".into()
            } else {
                "total curvature 0".into()
            }),
        },
        _ => Obstruction::Allowed { note: None },
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AreaBoundReport {
    pub bound: f64,
    pub cuts: Vec<f64>,
    pub areas: Vec<f64>,
    pub extrapolated_area: f64,
    /// `|Σ| − bound`; the integral of extrinsic curvature, non-positive for a true surface.
    pub excess: f64,
    pub violation: bool,
}

/// Compare an area ladder over increasing cuts with `2π(2g + n − 2)`.
pub fn area_bound_check(
    ladder: &[(f64, f64)],
    g: u32,
    n: u32,
    rel_tol: f64,
) -> Result<AreaBoundReport> {
    if ladder.is_empty() || ladder.windows(2).any(|w| !(w[0].0 < w[1].0)) {
        return Err(Error::input(
            "area ladder cuts must be non-empty and strictly increasing",
        ));
    }
    let bound = 2.0 * PI * (2.0 * g as f64 + n as f64 - 2.0);
    let k = ladder.len();
    let extrapolated_area = if k >= 2 {
        let ((y1, a1), (y2, a2)) = (ladder[k - 2], ladder[k - 1]);
        (y2 * a2 - y1 * a1) / (y2 - y1)
    } else {
        ladder[0].1
    };
    let excess = extrapolated_area - bound;
    Ok(AreaBoundReport {
        bound,
        cuts: ladder.iter().map(|l| l.0).collect(),
        areas: ladder.iter().map(|l| l.1).collect(),
        extrapolated_area,
        excess,
        violation: excess > rel_tol * bound.abs().max(1.0),
    })
}

/// Area of the listed triangles in the given metric.
pub fn intrinsic_area(mesh: &IntrinsicMesh, metric: EdgeMetric, triangles: &[usize]) -> f64 {
    neumaier_sum(triangles.iter().map(|&k| mesh.area(k, metric)))
}
