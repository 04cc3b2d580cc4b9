//! Scherk-type graphs over the disk domains `Ω_n` and their decay ladder.
//!
//! `Ω_n` is bounded by the geodesics orthogonal to the horizontal diameter
//! at `(±(1 − 1/n), 0)`. Its complement in the disk is two lenses where `u_n`
//! takes the value `+∞`, realized as the truncation `Λ`; the ideal arcs carry
//! `0` on the collar circle `|w| = R`. All `n` share one mesh, so the
//! Dirichlet sets are nested and the comparison principle orders the solutions.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::{solve, Chart, GraphProblem, SolverOptions};
use crate::mesh::{Locator, TriMesh};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LadderOptions {
    pub n_list: Vec<u32>,
    pub lambda_trunc: f64,
    /// Collar radius `R` of the truncated disk.
    pub radius: f64,
    /// Target hyperbolic edge length.
    pub spacing: f64,
    /// Cap on nodes per ring.
    pub max_ring: usize,
    /// Half-length of the compact segment `{0} × [−k, k]` of the vertical diameter.
    pub k_half: f64,
    pub samples: usize,
}

impl Default for LadderOptions {
    fn default() -> Self {
        LadderOptions {
            n_list: vec![2, 4, 8, 16],
            lambda_trunc: 8.0,
            radius: 0.98,
            spacing: 0.12,
            max_ring: 384,
            k_half: 0.5,
            samples: 101,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LadderEntry {
    pub n: u32,
    pub sup_on_segment: f64,
    pub center_value: f64,
    pub residual: f64,
    pub newton_steps: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LadderReport {
    pub entries: Vec<LadderEntry>,
    /// Largest `u_{n'}(v) − u_n(v)` over vertices, for consecutive `n < n'`.
    pub max_pointwise_increase: f64,
    pub monotone: bool,
    pub lambda_trunc: f64,
    pub vertex_count: usize,
}

/// Geodesic of the disk orthogonal to the horizontal diameter at `(r, 0)`:
/// center on the axis and radius.
pub fn orthogonal_geodesic(r: f64) -> (f64, f64) {
    ((1.0 + r * r) / (2.0 * r), (1.0 - r * r) / (2.0 * r))
}

/// True when `w` lies strictly beyond `γ_n` or `γ_{−n}`.
pub fn in_lens(n: u32, w: [f64; 2]) -> bool {
    let r = 1.0 - 1.0 / n as f64;
    let (c, rho) = orthogonal_geodesic(r);
    let d_plus = (w[0] - c).powi(2) + w[1] * w[1];
    let d_minus = (w[0] + c).powi(2) + w[1] * w[1];
    d_plus < rho * rho || d_minus < rho * rho
}

/// Ring mesh of the disk `|w| ≤ radius`, graded toward the collar.
///
/// Ring spacing follows the hyperbolic target length until the ring would
/// exceed `max_ring` nodes, after which it follows the angular spacing.
/// Vertices on the collar ring carry tag 1.
pub fn disk_mesh(radius: f64, spacing: f64, max_ring: usize) -> Result<TriMesh> {
    if !(radius > 0.0 && radius < 1.0) || !(spacing > 0.0) || max_ring < 6 {
        return Err(Error::input(
            "disk mesh needs 0 < radius < 1, spacing > 0, max_ring >= 6",
        ));
    }
    let mut radii = vec![0.0];
    loop {
        let r = *radii.last().unwrap();
        let hyp = 0.5 * (1.0 - r * r) * spacing;
        let ang = 2.0 * PI * r.max(1e-12) / max_ring as f64;
        let step = hyp.max(ang);
        if r + step >= radius - 0.3 * step {
            radii.push(radius);
            break;
        }
        radii.push(r + step);
    }
    let mut vertices = vec![[0.0, 0.0, 0.0]];
    let mut rings: Vec<(usize, usize, f64)> = vec![(0, 1, 0.0)];
    for (k, &r) in radii.iter().enumerate().skip(1) {
        let dr = r - radii[k - 1];
        let count = ((2.0 * PI * r / dr).round() as usize).clamp(6, max_ring);
        let offset = if k % 2 == 0 { 0.5 } else { 0.0 };
        let start = vertices.len();
        for i in 0..count {
            let th = 2.0 * PI * (i as f64 + offset) / count as f64;
            vertices.push([r * th.cos(), r * th.sin(), 0.0]);
        }
        rings.push((start, count, offset));
    }
    let mut triangles = Vec::new();
    let (s1, n1, _) = rings[1];
    for j in 0..n1 {
        triangles.push([0, s1 + j, s1 + (j + 1) % n1]);
    }
    for w in rings.windows(2).skip(1) {
        let (sa, na, oa) = w[0];
        let (sb, nb, ob) = w[1];
        let ang_a = |i: usize| 2.0 * PI * (i as f64 + oa) / na as f64;
        let ang_b = |j: usize| 2.0 * PI * (j as f64 + ob) / nb as f64;
        let (mut i, mut j) = (0usize, 0usize);
        while i < na || j < nb {
            let advance_a = if i == na {
                false
            } else if j == nb {
                true
            } else {
                ang_a(i + 1) <= ang_b(j + 1)
            };
            let a0 = sa + i % na;
            let b0 = sb + j % nb;
            if advance_a {
                triangles.push([a0, b0, sa + (i + 1) % na]);
                i += 1;
            } else {
                triangles.push([a0, b0, sb + (j + 1) % nb]);
                j += 1;
            }
        }
    }
    let mut mesh = TriMesh::new(vertices, triangles);
    let (sl, nl, _) = *rings.last().unwrap();
    for k in sl..sl + nl {
        mesh.tags[k] = 1;
    }
    Ok(mesh)
}

fn ladder_problem(mesh: &TriMesh, n: u32, lambda: f64) -> Result<GraphProblem> {
    let dirichlet = mesh
        .vertices
        .iter()
        .zip(&mesh.tags)
        .map(|(p, &tag)| {
            if in_lens(n, [p[0], p[1]]) {
                Some(lambda)
            } else if tag == 1 {
                Some(0.0)
            } else {
                None
            }
        })
        .collect();
    GraphProblem::new(mesh.clone(), Chart::Disk, dirichlet)
}

/// Solve `u_n` for each `n` on a common mesh and report the suprema over the
/// compact segment of the vertical diameter.
pub fn lambda_ladder(opts: &LadderOptions, solver: &SolverOptions) -> Result<LadderReport> {
    if opts.n_list.is_empty() || opts.n_list.windows(2).any(|w| w[0] >= w[1]) || opts.n_list[0] < 2
    {
        return Err(Error::input(
            "n_list must be strictly increasing and start at n >= 2",
        ));
    }
    if !(opts.lambda_trunc > 0.0)
        || !(opts.k_half > 0.0 && opts.k_half < opts.radius)
        || opts.samples < 2
    {
        return Err(Error::input(
            "ladder needs lambda_trunc > 0, 0 < k_half < radius and samples >= 2",
        ));
    }
    let last = *opts.n_list.last().unwrap();
    if 1.0 - 1.0 / last as f64 >= opts.radius {
        return Err(Error::input(
            "collar radius must exceed 1 - 1/n for every n",
        ));
    }
    let mesh = disk_mesh(opts.radius, opts.spacing, opts.max_ring)?;
    let locator = Locator::new(&mesh);
    let mut entries = Vec::new();
    let mut prev: Option<Vec<f64>> = None;
    let mut max_increase = f64::NEG_INFINITY;
    for &n in &opts.n_list {
        let problem = ladder_problem(&mesh, n, opts.lambda_trunc)?;
        let sol = solve(&problem, solver)?;
        let mut sup = f64::NEG_INFINITY;
        for k in 0..opts.samples {
            let s = -opts.k_half + 2.0 * opts.k_half * k as f64 / (opts.samples - 1) as f64;
            let v = locator.interpolate(&sol.u, 0.0, s, 1e-9).ok_or_else(|| {
                Error::numeric(format!("sample (0, {s}) not located in the disk mesh"))
            })?;
            sup = sup.max(v);
        }
        if let Some(p) = &prev {
            let inc = sol
                .u
                .iter()
                .zip(p)
                .map(|(a, b)| a - b)
                .fold(f64::NEG_INFINITY, f64::max);
            max_increase = max_increase.max(inc);
        }
        entries.push(LadderEntry {
            n,
            sup_on_segment: sup,
            center_value: sol.u[0],
            residual: sol.residual,
            newton_steps: sol.newton_steps,
        });
        prev = Some(sol.u);
    }
    if entries.len() == 1 {
        max_increase = 0.0;
    }
    let monotone = max_increase <= 1e-6
        && entries
            .windows(2)
            .all(|w| w[1].sup_on_segment < w[0].sup_on_segment);
    Ok(LadderReport {
        entries,
        max_pointwise_increase: max_increase,
        monotone,
        lambda_trunc: opts.lambda_trunc,
        vertex_count: mesh.vertices.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn geodesic_is_orthogonal_to_the_circle() {
        for r in [0.5, 0.75, 0.9375] {
            let (c, rho) = orthogonal_geodesic(r);
            assert!((c * c - 1.0 - rho * rho).abs() < 1e-12);
            assert!((c - rho - r).abs() < 1e-12);
        }
    }

    #[test]
    fn disk_mesh_is_a_disk() {
        let m = disk_mesh(0.9, 0.4, 48).unwrap();
        let v = m.vertices.len() as i64;
        let e = m.edges().len() as i64;
        assert_eq!(v - e + m.triangles.len() as i64, 1);
        for k in 0..m.triangles.len() {
            assert!(m.signed_area_xy(k) > 0.0);
        }
    }

    #[test]
    fn lenses_are_nested() {
        let m = disk_mesh(0.97, 0.3, 96).unwrap();
        for p in &m.vertices {
            let w = [p[0], p[1]];
            assert!(!in_lens(8, w) || in_lens(4, w));
        }
    }
}
