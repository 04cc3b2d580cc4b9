//! Least-area disks in `ℍ² × ℝ` spanning closed polygons.
//!
//! Triangle areas use the product metric `diag(1/y², 1/y², 1)` frozen at the
//! centroid. Vertices move along their metric normals; each sweep runs
//! L-BFGS with an Armijo line search on the normal offsets, so the area trace
//! never increases.

use std::collections::VecDeque;
use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{harmonic_extension, neumaier_sum, Chart, GraphProblem};
use crate::hyperbolic::Geodesic;
use crate::mesh::TriMesh;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PlateauOptions {
    /// Target metric length of boundary segments.
    pub spacing: f64,
    /// Target for the normal residual `|∂A/∂s_v| / A_v`.
    pub tol: f64,
    pub max_iter: usize,
    /// Inner L-BFGS iterations before the normals are recomputed.
    pub sweep: usize,
    pub memory: usize,
    /// Minimum metric shape quality before a remesh.
    pub min_quality: f64,
}

impl Default for PlateauOptions {
    fn default() -> Self {
        PlateauOptions {
            spacing: 0.08,
            tol: 1e-4,
            max_iter: 20_000,
            sweep: 40,
            memory: 8,
            min_quality: 1e-3,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PlateauResult {
    #[serde(skip)]
    pub mesh: TriMesh,
    pub area: f64,
    pub area_trace: Vec<f64>,
    pub residual: f64,
    pub iterations: usize,
    pub remeshes: usize,
    pub boundary_vertices: usize,
    /// Mesh vertices along each polygon segment, corners included; empty for a supplied `init`.
    #[serde(skip)]
    pub sides: Vec<Vec<usize>>,
}

/// Point at fraction `f` of the product-metric geodesic from `p` to `q`.
pub fn product_geodesic_point(p: [f64; 3], q: [f64; 3], f: f64) -> Result<[f64; 3]> {
    let t = p[2] + f * (q[2] - p[2]);
    if (p[0] - q[0]).abs() < 1e-15 && (p[1] - q[1]).abs() < 1e-15 {
        return Ok([p[0], p[1], t]);
    }
    let g = Geodesic::through_points((p[0], p[1]), (q[0], q[1]))?;
    Ok(match g.center_radius() {
        None => [p[0], p[1] * (q[1] / p[1]).powf(f), t],
        Some((c, r)) => {
            let s = |z: [f64; 3]| (z[1].atan2(z[0] - c) / 2.0).tan().ln();
            let v = s(p) + f * (s(q) - s(p));
            let th = 2.0 * v.exp().atan();
            [c + r * th.cos(), r * th.sin(), t]
        }
    })
}

/// Product-metric length of the geodesic segment from `p` to `q`.
pub fn product_distance(p: [f64; 3], q: [f64; 3]) -> f64 {
    let dh = 2.0
        * (((p[0] - q[0]).powi(2) + (p[1] - q[1]).powi(2)).sqrt() / (2.0 * (p[1] * q[1]).sqrt()))
            .asinh();
    (dh * dh + (p[2] - q[2]).powi(2)).sqrt()
}

/// Sample a closed polygon of product geodesic segments; corners are kept.
pub fn sample_polygon(corners: &[[f64; 3]], spacing: f64) -> Result<Vec<[f64; 3]>> {
    Ok(sample_polygon_segments(corners, spacing)?.0)
}

/// As [`sample_polygon`], also returning the index of the first sample of each segment.
pub fn sample_polygon_segments(
    corners: &[[f64; 3]],
    spacing: f64,
) -> Result<(Vec<[f64; 3]>, Vec<usize>)> {
    if corners.len() < 3 {
        return Err(Error::input("polygon needs at least three corners"));
    }
    if corners
        .iter()
        .any(|c| !(c[1] > 0.0) || !c.iter().all(|v| v.is_finite()))
    {
        return Err(Error::input("polygon corners must be finite with y > 0"));
    }
    let n = corners.len();
    let mut counts: Vec<usize> = (0..n)
        .map(|i| {
            (product_distance(corners[i], corners[(i + 1) % n]) / spacing)
                .ceil()
                .max(1.0) as usize
        })
        .collect();
    if counts.iter().sum::<usize>() % 2 == 1 {
        let longest = (0..n)
            .max_by(|&a, &b| {
                let la = product_distance(corners[a], corners[(a + 1) % n]);
                let lb = product_distance(corners[b], corners[(b + 1) % n]);
                la.partial_cmp(&lb).unwrap().then(b.cmp(&a))
            })
            .unwrap();
        counts[longest] += 1;
    }
    let mut out = Vec::new();
    let mut starts = Vec::with_capacity(n);
    for i in 0..n {
        starts.push(out.len());
        let (p, q) = (corners[i], corners[(i + 1) % n]);
        if product_distance(p, q) < 1e-12 {
            return Err(Error::input(format!(
                "polygon has a repeated corner at index {i}"
            )));
        }
        for k in 0..counts[i] {
            out.push(product_geodesic_point(p, q, k as f64 / counts[i] as f64)?);
        }
    }
    Ok((out, starts))
}

/// Ring triangulation of the unit disk with `nb` boundary nodes (`nb` even),
/// symmetric under `θ ↦ −θ`. Boundary node `j` sits at angle `2πj/nb`.
/// Returns the mesh and the indices of the boundary nodes in order.
pub fn symmetric_disk(nb: usize) -> Result<(TriMesh, Vec<usize>)> {
    if nb < 6 || nb % 2 != 0 {
        return Err(Error::input(
            "symmetric disk needs an even boundary count >= 6",
        ));
    }
    let rings = ((nb as f64 / (2.0 * PI)).round() as usize).max(2);
    let mut vertices = vec![[0.0, 0.0, 0.0]];
    let mut ring: Vec<(usize, usize)> = vec![(0, 1)];
    for k in 1..=rings {
        let count = if k == rings {
            nb
        } else {
            (2 * ((nb * k) as f64 / (2 * rings) as f64).round() as usize).max(6)
        };
        let r = k as f64 / rings as f64;
        let start = vertices.len();
        for i in 0..count {
            let th = 2.0 * PI * i as f64 / count as f64;
            vertices.push([r * th.cos(), r * th.sin(), 0.0]);
        }
        ring.push((start, count));
    }
    let mirror = |v: usize| -> usize {
        if v == 0 {
            return 0;
        }
        let &(s, c) = ring.iter().rev().find(|&&(s, _)| s <= v).unwrap();
        s + (c - (v - s)) % c
    };
    let mut upper = Vec::new();
    let (s1, c1) = ring[1];
    for j in 0..c1 / 2 {
        upper.push([0, s1 + j, s1 + j + 1]);
    }
    for k in 1..rings {
        let (sa, na) = ring[k];
        let (sb, nb_) = ring[k + 1];
        let (ha, hb) = (na / 2, nb_ / 2);
        let (mut i, mut j) = (0usize, 0usize);
        while i < ha || j < hb {
            let advance_a = if i == ha {
                false
            } else if j == hb {
                true
            } else {
                (i + 1) as f64 / na as f64 <= (j + 1) as f64 / nb_ as f64
            };
            if advance_a {
                upper.push([sa + i, sb + j, sa + i + 1]);
                i += 1;
            } else {
                upper.push([sa + i, sb + j, sb + j + 1]);
                j += 1;
            }
        }
    }
    let mut triangles = upper.clone();
    for t in &upper {
        triangles.push([mirror(t[0]), mirror(t[2]), mirror(t[1])]);
    }
    let (sl, nl) = ring[rings];
    Ok((TriMesh::new(vertices, triangles), (sl..sl + nl).collect()))
}

/// Harmonic spanning disk of the sampled boundary.
fn initial_disk(boundary: &[[f64; 3]]) -> Result<(TriMesh, Vec<bool>, Vec<usize>)> {
    let (param, bidx) = symmetric_disk(boundary.len())?;
    let mut fixed = vec![false; param.vertices.len()];
    for &b in &bidx {
        fixed[b] = true;
    }
    let mut coords = Vec::new();
    for c in 0..3 {
        let mut dirichlet = vec![None; param.vertices.len()];
        for (j, &b) in bidx.iter().enumerate() {
            dirichlet[b] = Some(boundary[j][c]);
        }
        let problem = GraphProblem::new(param.clone(), Chart::HalfPlane, dirichlet)?;
        coords.push(harmonic_extension(&problem)?);
    }
    let mut mesh = param;
    for (k, p) in mesh.vertices.iter_mut().enumerate() {
        *p = [coords[0][k], coords[1][k], coords[2][k]];
    }
    for (k, t) in mesh.tags.iter_mut().enumerate() {
        *t = fixed[k] as u32;
    }
    Ok((mesh, fixed, bidx))
}

/// Metric area of a triangle and its gradient with respect to the three vertices.
fn tri_area_grad(p: [[f64; 3]; 3]) -> (f64, [[f64; 3]; 3]) {
    let e1 = [p[1][0] - p[0][0], p[1][1] - p[0][1], p[1][2] - p[0][2]];
    let e2 = [p[2][0] - p[0][0], p[2][1] - p[0][1], p[2][2] - p[0][2]];
    let yb = (p[0][1] + p[1][1] + p[2][1]) / 3.0;
    let s = 1.0 / (yb * yb);
    let hdot = |u: &[f64; 3], v: &[f64; 3]| u[0] * v[0] + u[1] * v[1];
    let (h11, h12, h22) = (hdot(&e1, &e1), hdot(&e1, &e2), hdot(&e2, &e2));
    let a = s * h11 + e1[2] * e1[2];
    let b = s * h12 + e1[2] * e2[2];
    let c = s * h22 + e2[2] * e2[2];
    let d = (a * c - b * b).max(0.0);
    let sd = d.sqrt();
    let area = 0.5 * sd;
    if sd == 0.0 {
        return (0.0, [[0.0; 3]; 3]);
    }
    let ge = |e: &[f64; 3]| [s * e[0], s * e[1], e[2]];
    let (g1, g2) = (ge(&e1), ge(&e2));
    let k = 0.5 / sd;
    let mut d1 = [0.0; 3];
    let mut d2 = [0.0; 3];
    for i in 0..3 {
        d1[i] = k * (c * g1[i] - b * g2[i]);
        d2[i] = k * (a * g2[i] - b * g1[i]);
    }
    // dependence of s on the centroid height
    let dd_ds = h11 * c + a * h22 - 2.0 * b * h12;
    let dy = (0.25 / sd) * dd_ds * (-2.0 / (3.0 * yb * yb * yb));
    let mut grad = [[0.0; 3]; 3];
    for i in 0..3 {
        grad[1][i] = d1[i];
        grad[2][i] = d2[i];
        grad[0][i] = -d1[i] - d2[i];
    }
    for g in grad.iter_mut() {
        g[1] += dy;
    }
    (area, grad)
}

/// Metric area of a surface mesh in the product chart.
pub fn product_area(mesh: &TriMesh) -> f64 {
    let parts: Vec<f64> = mesh
        .triangles
        .par_iter()
        .map(|t| {
            tri_area_grad([
                mesh.vertices[t[0]],
                mesh.vertices[t[1]],
                mesh.vertices[t[2]],
            ])
            .0
        })
        .collect();
    neumaier_sum(parts)
}

fn area_and_gradient(mesh: &TriMesh) -> (f64, Vec<[f64; 3]>, Vec<f64>) {
    let locals: Vec<(f64, [[f64; 3]; 3])> = mesh
        .triangles
        .par_iter()
        .map(|t| {
            tri_area_grad([
                mesh.vertices[t[0]],
                mesh.vertices[t[1]],
                mesh.vertices[t[2]],
            ])
        })
        .collect();
    let mut grad = vec![[0.0; 3]; mesh.vertices.len()];
    let mut vert_area = vec![0.0; mesh.vertices.len()];
    for (t, (a, g)) in mesh.triangles.iter().zip(&locals) {
        for k in 0..3 {
            for c in 0..3 {
                grad[t[k]][c] += g[k][c];
            }
            vert_area[t[k]] += a / 3.0;
        }
    }
    (neumaier_sum(locals.iter().map(|l| l.0)), grad, vert_area)
}

/// Metric unit normals: `G⁻¹` applied to the area-weighted chart normal.
fn normals(mesh: &TriMesh) -> Vec<[f64; 3]> {
    let mut n = vec![[0.0; 3]; mesh.vertices.len()];
    for t in &mesh.triangles {
        let p = t.map(|v| mesh.vertices[v]);
        let e1 = [p[1][0] - p[0][0], p[1][1] - p[0][1], p[1][2] - p[0][2]];
        let e2 = [p[2][0] - p[0][0], p[2][1] - p[0][1], p[2][2] - p[0][2]];
        let c = [
            e1[1] * e2[2] - e1[2] * e2[1],
            e1[2] * e2[0] - e1[0] * e2[2],
            e1[0] * e2[1] - e1[1] * e2[0],
        ];
        for &v in t {
            for k in 0..3 {
                n[v][k] += c[k];
            }
        }
    }
    for (v, nv) in n.iter_mut().enumerate() {
        let y = mesh.vertices[v][1];
        let m = [nv[0] * y * y, nv[1] * y * y, nv[2]];
        let len = ((m[0] * m[0] + m[1] * m[1]) / (y * y) + m[2] * m[2]).sqrt();
        *nv = if len > 0.0 {
            [m[0] / len, m[1] / len, m[2] / len]
        } else {
            [0.0; 3]
        };
    }
    n
}

/// Smallest metric shape quality `4√3·A / Σℓ²` over the triangles.
fn min_quality(mesh: &TriMesh) -> f64 {
    mesh.triangles
        .iter()
        .map(|t| {
            let p = t.map(|v| mesh.vertices[v]);
            let (a, _) = tri_area_grad(p);
            let yb = (p[0][1] + p[1][1] + p[2][1]) / 3.0;
            let l2: f64 = (0..3)
                .map(|i| {
                    let (u, v) = (p[i], p[(i + 1) % 3]);
                    ((u[0] - v[0]).powi(2) + (u[1] - v[1]).powi(2)) / (yb * yb)
                        + (u[2] - v[2]).powi(2)
                })
                .sum();
            4.0 * 3f64.sqrt() * a / l2
        })
        .fold(f64::INFINITY, f64::min)
}

struct Minimizer<'a> {
    mesh: TriMesh,
    free: &'a [usize],
    opts: &'a PlateauOptions,
    trace: Vec<f64>,
    iterations: usize,
}

impl<'a> Minimizer<'a> {
    fn residual(&self, grad: &[[f64; 3]], vert_area: &[f64], nrm: &[[f64; 3]]) -> (Vec<f64>, f64) {
        let gs: Vec<f64> = self
            .free
            .iter()
            .map(|&v| grad[v][0] * nrm[v][0] + grad[v][1] * nrm[v][1] + grad[v][2] * nrm[v][2])
            .collect();
        let r = gs
            .iter()
            .zip(self.free)
            .map(|(g, &v)| g.abs() / vert_area[v])
            .fold(0.0, f64::max);
        (gs, r)
    }

    fn displaced(&self, base: &[[f64; 3]], nrm: &[[f64; 3]], s: &[f64]) -> TriMesh {
        let mut m = self.mesh.clone();
        for (i, &v) in self.free.iter().enumerate() {
            for k in 0..3 {
                m.vertices[v][k] = base[v][k] + s[i] * nrm[v][k];
            }
        }
        m
    }

    /// One L-BFGS sweep along fixed normals. Returns the final residual.
    fn sweep(&mut self) -> Result<f64> {
        let nrm = normals(&self.mesh);
        let base = self.mesh.vertices.clone();
        let nf = self.free.len();
        let mut s = vec![0.0; nf];
        let (mut area, grad, va) = area_and_gradient(&self.mesh);
        let (mut g, mut res) = self.residual(&grad, &va, &nrm);
        let mut hist: VecDeque<(Vec<f64>, Vec<f64>, f64)> = VecDeque::new();
        for _ in 0..self.opts.sweep {
            if res <= self.opts.tol || self.iterations >= self.opts.max_iter {
                break;
            }
            // two-loop recursion
            let mut q = g.clone();
            let mut alphas = Vec::with_capacity(hist.len());
            for (sk, yk, rho) in hist.iter().rev() {
                let a = rho * dot(sk, &q);
                axpy(-a, yk, &mut q);
                alphas.push(a);
            }
            let gamma = match hist.back() {
                Some((sk, yk, _)) => dot(sk, yk) / dot(yk, yk),
                None => {
                    let gmax = g.iter().fold(0.0f64, |m, v| m.max(v.abs()));
                    let lmin = va.iter().cloned().fold(f64::INFINITY, f64::min).sqrt();
                    0.1 * lmin / gmax.max(f64::MIN_POSITIVE)
                }
            };
            q.iter_mut().for_each(|v| *v *= gamma);
            for ((sk, yk, rho), a) in hist.iter().zip(alphas.iter().rev()) {
                let b = rho * dot(yk, &q);
                axpy(a - b, sk, &mut q);
            }
            let mut d: Vec<f64> = q.iter().map(|v| -v).collect();
            let mut slope = dot(&d, &g);
            if !(slope < 0.0) {
                hist.clear();
                d = g.iter().map(|v| -v * gamma.abs().max(1e-12)).collect();
                slope = dot(&d, &g);
            }
            let mut step = 1.0;
            let mut accepted = None;
            for _ in 0..50 {
                let s_try: Vec<f64> = s.iter().zip(&d).map(|(a, b)| a + step * b).collect();
                let m_try = self.displaced(&base, &nrm, &s_try);
                let (a_try, g_try, va_try) = area_and_gradient(&m_try);
                if a_try <= area + 1e-4 * step * slope {
                    accepted = Some((s_try, m_try, a_try, g_try, va_try));
                    break;
                }
                step *= 0.5;
            }
            let Some((s_new, m_new, a_new, grad_new, va_new)) = accepted else {
                break;
            };
            let (g_new, r_new) = self.residual(&grad_new, &va_new, &nrm);
            let sk: Vec<f64> = s_new.iter().zip(&s).map(|(a, b)| a - b).collect();
            let yk: Vec<f64> = g_new.iter().zip(&g).map(|(a, b)| a - b).collect();
            let sy = dot(&sk, &yk);
            if sy > 1e-300 {
                hist.push_back((sk, yk, 1.0 / sy));
                if hist.len() > self.opts.memory {
                    hist.pop_front();
                }
            }
            s = s_new;
            self.mesh = m_new;
            area = a_new;
            g = g_new;
            res = r_new;
            self.trace.push(area);
            self.iterations += 1;
        }
        Ok(res)
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn axpy(a: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += a * xi;
    }
}

fn run(mesh: TriMesh, fixed: &[bool], opts: &PlateauOptions) -> Result<(PlateauResult, bool)> {
    let free: Vec<usize> = (0..mesh.vertices.len()).filter(|&v| !fixed[v]).collect();
    let nb = fixed.iter().filter(|&&f| f).count();
    let area0 = product_area(&mesh);
    let mut m = Minimizer {
        mesh,
        free: &free,
        opts,
        trace: vec![area0],
        iterations: 0,
    };
    let mut res = f64::INFINITY;
    let mut degenerate = false;
    let mut stalled = 0;
    while m.iterations < opts.max_iter {
        let before = m.iterations;
        res = m.sweep()?;
        if min_quality(&m.mesh) < opts.min_quality {
            degenerate = true;
            break;
        }
        if res <= opts.tol {
            break;
        }
        if m.iterations == before {
            stalled += 1;
            if stalled > 3 {
                break;
            }
        } else {
            stalled = 0;
        }
    }
    let area = *m.trace.last().unwrap();
    Ok((
        PlateauResult {
            mesh: m.mesh,
            area,
            area_trace: m.trace,
            residual: res,
            iterations: m.iterations,
            remeshes: 0,
            boundary_vertices: nb,
            sides: Vec::new(),
        },
        degenerate,
    ))
}

/// Minimize area among disks spanning the polygon with the given corners.
///
/// With `init = None` the boundary is sampled at `opts.spacing` and spanned
/// by a harmonic disk; otherwise `init` must be a disk whose boundary is
/// kept fixed.
pub fn solve_plateau(
    corners: &[[f64; 3]],
    init: Option<TriMesh>,
    opts: &PlateauOptions,
) -> Result<PlateauResult> {
    if !(opts.tol > 0.0) || !(opts.spacing > 0.0) {
        return Err(Error::input("plateau tolerances must be positive"));
    }
    let mut spacing = opts.spacing;
    let mut remeshes = 0;
    let build = |spacing: f64| -> Result<(TriMesh, Vec<bool>, Vec<Vec<usize>>)> {
        let (samples, starts) = sample_polygon_segments(corners, spacing)?;
        let (mesh, fixed, bidx) = initial_disk(&samples)?;
        let nb = bidx.len();
        let sides = (0..starts.len())
            .map(|i| {
                let end = if i + 1 < starts.len() {
                    starts[i + 1]
                } else {
                    nb
                };
                (starts[i]..=end).map(|j| bidx[j % nb]).collect()
            })
            .collect();
        Ok((mesh, fixed, sides))
    };
    let (mut mesh, mut fixed, mut sides) = match init {
        Some(m) => {
            if m.boundary_loops().len() != 1 {
                return Err(Error::input("initial mesh must be a disk"));
            }
            let f = m.boundary_vertex_mask();
            (m, f, Vec::new())
        }
        None => build(spacing)?,
    };
    loop {
        let (mut result, degenerate) = run(mesh, &fixed, opts)?;
        result.remeshes = remeshes;
        result.sides = sides.clone();
        if !degenerate {
            if result.residual > opts.tol {
                return Err(Error::numeric(format!(
                    "plateau residual {:e} above {:e} after {} iterations",
                    result.residual, opts.tol, result.iterations
                )));
            }
            return Ok(result);
        }
        if remeshes >= 1 {
            return Err(Error::numeric("plateau mesh degenerated after remeshing"));
        }
        remeshes += 1;
        spacing *= 0.7;
        let rebuilt = build(spacing)?;
        mesh = rebuilt.0;
        fixed = rebuilt.1;
        sides = rebuilt.2;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn area_gradient_matches_differences() {
        let p = [[0.1, 1.0, 0.0], [0.5, 1.3, 0.2], [0.2, 1.6, -0.1]];
        let (_, g) = tri_area_grad(p);
        let h = 1e-6;
        for v in 0..3 {
            for c in 0..3 {
                let mut a = p;
                let mut b = p;
                a[v][c] += h;
                b[v][c] -= h;
                let fd = (tri_area_grad(a).0 - tri_area_grad(b).0) / (2.0 * h);
                assert!((fd - g[v][c]).abs() < 1e-7, "{v} {c}: {fd} vs {}", g[v][c]);
            }
        }
    }

    #[test]
    fn symmetric_disk_is_symmetric_and_valid() {
        let (m, b) = symmetric_disk(24).unwrap();
        assert_eq!(b.len(), 24);
        let e = m.edges().len() as i64;
        assert_eq!(m.vertices.len() as i64 - e + m.triangles.len() as i64, 1);
        for k in 0..m.triangles.len() {
            assert!(m.signed_area_xy(k) > 0.0);
        }
    }

    #[test]
    fn geodesic_samples_stay_on_the_geodesic() {
        let p = [-0.5, 1.0, 0.0];
        let q = [0.7, 0.4, 1.0];
        let g = Geodesic::through_points((p[0], p[1]), (q[0], q[1])).unwrap();
        let l = product_distance(p, q);
        let mut prev = p;
        for k in 1..=10 {
            let z = product_geodesic_point(p, q, k as f64 / 10.0).unwrap();
            assert!(g.side((z[0], z[1])).abs() < 1e-12);
            assert!((product_distance(prev, z) - l / 10.0).abs() < 1e-10);
            prev = z;
        }
    }
}
