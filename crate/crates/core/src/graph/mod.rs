//! Minimal vertical graphs `t = u(x, y)` over domains of the hyperbolic plane.
//!
//! The area of a graph over `(Ω, σ²|dz|²)` is `∬ σ² √(1 + |∇u|²/σ²)`; in the
//! half-plane chart `σ² = 1/y²` this is `∬ √(1 + y²|∇u|²)/y² dx dy`. The
//! discrete energy uses piecewise-linear `u` and centroid quadrature, and is
//! minimized by damped Newton with a conjugate-gradient inner solve.

pub mod domains;
pub mod ladder;
pub mod plateau;
pub(crate) mod sparse;

use std::collections::BTreeSet;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::mesh::TriMesh;
use crate::{Error, Result};
use sparse::{pcg, Csr};

pub use domains::{Arc, ArcKind, BoundaryDatum, DomainProblem, HypDomain, IdealPoint};
pub use ladder::{lambda_ladder, LadderEntry, LadderOptions, LadderReport};
pub use plateau::{solve_plateau, PlateauOptions, PlateauResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Chart {
    HalfPlane,
    Disk,
}

impl Chart {
    /// Conformal factor `σ²` of the hyperbolic metric at `(x, y)`.
    pub fn sigma2(&self, x: f64, y: f64) -> Result<f64> {
        match self {
            Chart::HalfPlane => {
                if !(y > 0.0) {
                    return Err(Error::domain(format!("half-plane point with y = {y}")));
                }
                Ok(1.0 / (y * y))
            }
            Chart::Disk => {
                let r2 = x * x + y * y;
                if !(r2 < 1.0) {
                    return Err(Error::domain(format!("disk point with |w|² = {r2}")));
                }
                Ok(4.0 / ((1.0 - r2) * (1.0 - r2)))
            }
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct Element {
    pub idx: [usize; 3],
    pub area: f64,
    pub grad: [[f64; 2]; 3],
    pub sigma2: f64,
}

pub(crate) fn elements(mesh: &TriMesh, chart: Chart) -> Result<Vec<Element>> {
    elements_with(mesh, Some(chart))
}

/// Elements with `σ² = 1` when no chart is given.
pub(crate) fn elements_with(mesh: &TriMesh, chart: Option<Chart>) -> Result<Vec<Element>> {
    mesh.triangles
        .iter()
        .enumerate()
        .map(|(k, t)| {
            let p = [
                mesh.vertices[t[0]],
                mesh.vertices[t[1]],
                mesh.vertices[t[2]],
            ];
            let d = (p[1][0] - p[0][0]) * (p[2][1] - p[0][1])
                - (p[2][0] - p[0][0]) * (p[1][1] - p[0][1]);
            let scale = (0..3)
                .map(|i| {
                    let q = p[(i + 1) % 3];
                    (p[i][0] - q[0]).powi(2) + (p[i][1] - q[1]).powi(2)
                })
                .fold(0.0, f64::max);
            if !(d.abs() > 1e-13 * scale) {
                return Err(Error::input(format!("degenerate triangle {k}")));
            }
            let grad = [
                [(p[1][1] - p[2][1]) / d, (p[2][0] - p[1][0]) / d],
                [(p[2][1] - p[0][1]) / d, (p[0][0] - p[2][0]) / d],
                [(p[0][1] - p[1][1]) / d, (p[1][0] - p[0][0]) / d],
            ];
            let cx = (p[0][0] + p[1][0] + p[2][0]) / 3.0;
            let cy = (p[0][1] + p[1][1] + p[2][1]) / 3.0;
            let sigma2 = match chart {
                Some(c) => c.sigma2(cx, cy)?,
                None => 1.0,
            };
            Ok(Element {
                idx: *t,
                area: d.abs() / 2.0,
                grad,
                sigma2,
            })
        })
        .collect()
}

impl Element {
    fn gradient_of(&self, u: &[f64]) -> [f64; 2] {
        let mut g = [0.0; 2];
        for k in 0..3 {
            g[0] += u[self.idx[k]] * self.grad[k][0];
            g[1] += u[self.idx[k]] * self.grad[k][1];
        }
        g
    }

    fn energy(&self, u: &[f64]) -> f64 {
        let g = self.gradient_of(u);
        self.area * self.sigma2 * (1.0 + (g[0] * g[0] + g[1] * g[1]) / self.sigma2).sqrt()
    }

    fn local(&self, u: &[f64]) -> ([f64; 3], [[f64; 3]; 3]) {
        let g = self.gradient_of(u);
        let w = (1.0 + (g[0] * g[0] + g[1] * g[1]) / self.sigma2).sqrt();
        let gd: Vec<f64> = (0..3)
            .map(|i| g[0] * self.grad[i][0] + g[1] * self.grad[i][1])
            .collect();
        let mut grad = [0.0; 3];
        let mut hess = [[0.0; 3]; 3];
        for i in 0..3 {
            grad[i] = self.area * gd[i] / w;
            for j in 0..3 {
                let dd = self.grad[i][0] * self.grad[j][0] + self.grad[i][1] * self.grad[j][1];
                hess[i][j] = self.area * (dd / w - gd[i] * gd[j] / (self.sigma2 * w * w * w));
            }
        }
        (grad, hess)
    }
}

/// Compensated summation in a fixed order.
pub(crate) fn neumaier_sum<I: IntoIterator<Item = f64>>(it: I) -> f64 {
    let mut s = 0.0f64;
    let mut c = 0.0f64;
    for x in it {
        let t = s + x;
        if s.abs() >= x.abs() {
            c += (s - t) + x;
        } else {
            c += (x - t) + s;
        }
        s = t;
    }
    s + c
}

fn energy_of(elems: &[Element], u: &[f64]) -> f64 {
    let parts: Vec<f64> = elems.par_iter().map(|e| e.energy(u)).collect();
    neumaier_sum(parts)
}

/// Discrete area with centroid quadrature, the functional the solver minimizes.
pub fn discrete_energy(mesh: &TriMesh, chart: Chart, u: &[f64]) -> Result<f64> {
    check_len(mesh, u)?;
    Ok(energy_of(&elements(mesh, chart)?, u))
}

const DUNAVANT5: [([f64; 3], f64); 7] = [
    ([1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0], 0.225),
    (
        [0.059715871789770, 0.470142064105115, 0.470142064105115],
        0.132394152788506,
    ),
    (
        [0.470142064105115, 0.059715871789770, 0.470142064105115],
        0.132394152788506,
    ),
    (
        [0.470142064105115, 0.470142064105115, 0.059715871789770],
        0.132394152788506,
    ),
    (
        [0.797426985353087, 0.101286507323456, 0.101286507323456],
        0.125939180544827,
    ),
    (
        [0.101286507323456, 0.797426985353087, 0.101286507323456],
        0.125939180544827,
    ),
    (
        [0.101286507323456, 0.101286507323456, 0.797426985353087],
        0.125939180544827,
    ),
];

/// Area of the piecewise-linear graph of `u`, integrated with a degree-5 rule per triangle.
pub fn area(mesh: &TriMesh, chart: Chart, u: &[f64]) -> Result<f64> {
    check_len(mesh, u)?;
    let elems = elements(mesh, chart)?;
    let parts: Vec<Result<f64>> = elems
        .par_iter()
        .map(|e| {
            let g = e.gradient_of(u);
            let g2 = g[0] * g[0] + g[1] * g[1];
            let mut s = 0.0;
            for (b, w) in DUNAVANT5.iter() {
                let x: f64 = (0..3).map(|k| b[k] * mesh.vertices[e.idx[k]][0]).sum();
                let y: f64 = (0..3).map(|k| b[k] * mesh.vertices[e.idx[k]][1]).sum();
                let s2 = chart.sigma2(x, y)?;
                s += w * s2 * (1.0 + g2 / s2).sqrt();
            }
            Ok(e.area * s)
        })
        .collect();
    let mut vals = Vec::with_capacity(parts.len());
    for p in parts {
        vals.push(p?);
    }
    Ok(neumaier_sum(vals))
}

fn check_len(mesh: &TriMesh, u: &[f64]) -> Result<()> {
    if u.len() != mesh.vertices.len() {
        return Err(Error::input(format!(
            "{} values for {} vertices",
            u.len(),
            mesh.vertices.len()
        )));
    }
    Ok(())
}

#[derive(Debug, Clone)]
pub struct GraphProblem {
    pub mesh: TriMesh,
    pub chart: Chart,
    /// Dirichlet value per vertex; `None` marks a free vertex.
    pub dirichlet: Vec<Option<f64>>,
}

impl GraphProblem {
    pub fn new(mesh: TriMesh, chart: Chart, dirichlet: Vec<Option<f64>>) -> Result<Self> {
        if dirichlet.len() != mesh.vertices.len() {
            return Err(Error::input("one Dirichlet entry per vertex is required"));
        }
        if dirichlet.iter().all(|d| d.is_none()) {
            return Err(Error::input("no Dirichlet data"));
        }
        if let Some(k) = dirichlet
            .iter()
            .position(|d| matches!(d, Some(v) if !v.is_finite()))
        {
            return Err(Error::input(format!(
                "non-finite Dirichlet value at vertex {k}"
            )));
        }
        Ok(GraphProblem {
            mesh,
            chart,
            dirichlet,
        })
    }

    /// Dirichlet data on the boundary vertices of the mesh, free elsewhere.
    pub fn from_boundary<F: Fn(usize, &[f64; 3]) -> f64>(
        mesh: TriMesh,
        chart: Chart,
        f: F,
    ) -> Result<Self> {
        let mask = mesh.boundary_vertex_mask();
        let dirichlet = mesh
            .vertices
            .iter()
            .enumerate()
            .map(|(k, p)| if mask[k] { Some(f(k, p)) } else { None })
            .collect();
        GraphProblem::new(mesh, chart, dirichlet)
    }

    pub fn data_range(&self) -> (f64, f64) {
        self.dirichlet
            .iter()
            .flatten()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
                (lo.min(v), hi.max(v))
            })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolverOptions {
    /// Target for the scaled Euler-Lagrange residual.
    pub tol: f64,
    pub max_newton: usize,
    pub max_halvings: usize,
    pub cg_rel_tol: f64,
    pub cg_max_iter: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            tol: 1e-8,
            max_newton: 200,
            max_halvings: 40,
            cg_rel_tol: 1e-10,
            cg_max_iter: 50_000,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GraphSolution {
    /// The solved graph: vertex `t` coordinates hold `u`.
    #[serde(skip)]
    pub mesh: TriMesh,
    pub u: Vec<f64>,
    pub residual: f64,
    pub energy: f64,
    pub energy_trace: Vec<f64>,
    pub newton_steps: usize,
    pub min_u: f64,
    pub max_u: f64,
    pub lambda_trunc: Option<f64>,
    pub y_cap: Option<f64>,
}

struct Assembler {
    elems: Vec<Element>,
    /// Index into the free-node numbering, `usize::MAX` for fixed vertices.
    free_id: Vec<usize>,
    free: Vec<usize>,
    /// Lumped hyperbolic area per vertex.
    mass: Vec<f64>,
    matrix: Csr,
    slots: Vec<[usize; 9]>,
}

impl Assembler {
    fn new(problem: &GraphProblem) -> Result<Self> {
        Assembler::with_chart(problem, Some(problem.chart))
    }

    fn with_chart(problem: &GraphProblem, chart: Option<Chart>) -> Result<Self> {
        let elems = elements_with(&problem.mesh, chart)?;
        let nv = problem.mesh.vertices.len();
        let mut free_id = vec![usize::MAX; nv];
        let mut free = Vec::new();
        for (k, d) in problem.dirichlet.iter().enumerate() {
            if d.is_none() {
                free_id[k] = free.len();
                free.push(k);
            }
        }
        let mut mass = vec![0.0; nv];
        let mut pairs = BTreeSet::new();
        for e in &elems {
            for i in 0..3 {
                mass[e.idx[i]] += e.area * e.sigma2 / 3.0;
                for j in 0..3 {
                    let (a, b) = (free_id[e.idx[i]], free_id[e.idx[j]]);
                    if a != usize::MAX && b != usize::MAX && a < b {
                        pairs.insert((a, b));
                    }
                }
            }
        }
        let matrix = Csr::from_pairs(free.len(), &pairs);
        let slots = elems
            .iter()
            .map(|e| {
                let mut s = [usize::MAX; 9];
                for i in 0..3 {
                    for j in 0..3 {
                        let (a, b) = (free_id[e.idx[i]], free_id[e.idx[j]]);
                        if a != usize::MAX && b != usize::MAX {
                            s[3 * i + j] = matrix.position(a, b);
                        }
                    }
                }
                s
            })
            .collect();
        Ok(Assembler {
            elems,
            free_id,
            free,
            mass,
            matrix,
            slots,
        })
    }

    /// Gradient over free nodes; also fills the Hessian when `hessian` is set.
    fn assemble(&mut self, u: &[f64], hessian: bool) -> Vec<f64> {
        let locals: Vec<([f64; 3], [[f64; 3]; 3])> =
            self.elems.par_iter().map(|e| e.local(u)).collect();
        let mut g = vec![0.0; self.free.len()];
        if hessian {
            self.matrix.clear();
        }
        for ((e, (lg, lh)), slots) in self.elems.iter().zip(&locals).zip(&self.slots) {
            for i in 0..3 {
                let a = self.free_id[e.idx[i]];
                if a == usize::MAX {
                    continue;
                }
                g[a] += lg[i];
                if hessian {
                    for j in 0..3 {
                        let s = slots[3 * i + j];
                        if s != usize::MAX {
                            self.matrix.val[s] += lh[i][j];
                        }
                    }
                }
            }
        }
        g
    }

    fn scaled_residual(&self, g: &[f64]) -> f64 {
        g.iter()
            .zip(&self.free)
            .map(|(gi, &k)| gi.abs() / self.mass[k])
            .fold(0.0, f64::max)
    }
}

/// Scaled Euler-Lagrange residual `max |∂E/∂u_i| / m_i` over free vertices.
pub fn residual(problem: &GraphProblem, u: &[f64]) -> Result<f64> {
    check_len(&problem.mesh, u)?;
    let mut asm = Assembler::new(problem)?;
    let g = asm.assemble(u, false);
    Ok(asm.scaled_residual(&g))
}

/// Discrete harmonic extension of the Dirichlet data.
///
/// The Dirichlet energy is conformally invariant, so the Euclidean P1
/// Laplacian of the chart serves for every chart.
pub fn harmonic_extension(problem: &GraphProblem) -> Result<Vec<f64>> {
    let asm = Assembler::with_chart(problem, None)?;
    let mut matrix = asm.matrix.clone();
    matrix.clear();
    let mut u: Vec<f64> = problem.dirichlet.iter().map(|d| d.unwrap_or(0.0)).collect();
    let (lo, hi) = problem.data_range();
    let mean = 0.5 * (lo + hi);
    for &k in &asm.free {
        u[k] = mean;
    }
    let mut rhs = vec![0.0; asm.free.len()];
    for (e, slots) in asm.elems.iter().zip(&asm.slots) {
        for i in 0..3 {
            let a = asm.free_id[e.idx[i]];
            if a == usize::MAX {
                continue;
            }
            for j in 0..3 {
                let kij = e.area * (e.grad[i][0] * e.grad[j][0] + e.grad[i][1] * e.grad[j][1]);
                let s = slots[3 * i + j];
                if s != usize::MAX {
                    matrix.val[s] += kij;
                } else {
                    rhs[a] -= kij * u[e.idx[j]];
                }
            }
        }
    }
    let mut x = vec![mean; asm.free.len()];
    let stats = pcg(&matrix, &rhs, &mut x, 1e-12, 50_000);
    if !(stats.relative_residual <= 1e-8) {
        return Err(Error::numeric(format!(
            "harmonic extension did not converge (relative residual {:e})",
            stats.relative_residual
        )));
    }
    for (a, &k) in asm.free.iter().enumerate() {
        u[k] = x[a];
    }
    Ok(u)
}

/// Minimize the discrete area with the given Dirichlet data.
pub fn solve(problem: &GraphProblem, opts: &SolverOptions) -> Result<GraphSolution> {
    if !(opts.tol > 0.0) || !(opts.cg_rel_tol > 0.0) {
        return Err(Error::input("solver tolerances must be positive"));
    }
    let mut asm = Assembler::new(problem)?;
    let (lo, hi) = problem.data_range();
    let mut u = if lo == hi {
        problem.dirichlet.iter().map(|d| d.unwrap_or(lo)).collect()
    } else {
        harmonic_extension(problem)?
    };
    let mut energy = energy_of(&asm.elems, &u);
    let mut trace = vec![energy];
    let mut steps = 0;
    let mut g = asm.assemble(&u, true);
    let mut res = asm.scaled_residual(&g);
    while res > opts.tol {
        if steps >= opts.max_newton {
            return Err(Error::numeric(format!(
                "Newton did not converge in {steps} steps (residual {res:e}); energy trace {trace:?}"
            )));
        }
        let rhs: Vec<f64> = g.iter().map(|v| -v).collect();
        let mut d = vec![0.0; rhs.len()];
        pcg(&asm.matrix, &rhs, &mut d, opts.cg_rel_tol, opts.cg_max_iter);
        let slope: f64 = d.iter().zip(&g).map(|(a, b)| a * b).sum();
        if !(slope < 0.0) {
            d = rhs.clone();
        }
        let mut s = 1.0;
        let mut accepted = None;
        for _ in 0..=opts.max_halvings {
            let mut trial = u.clone();
            for (a, &k) in asm.free.iter().enumerate() {
                trial[k] += s * d[a];
            }
            let e_trial = energy_of(&asm.elems, &trial);
            if e_trial < energy {
                accepted = Some((trial, e_trial));
                break;
            }
            if e_trial <= energy + 8.0 * f64::EPSILON * energy.abs() {
                // Rounding floor: accept a step that does not raise the energy
                // beyond rounding and lowers the residual.
                let g_trial = asm.assemble(&trial, false);
                if asm.scaled_residual(&g_trial) < res {
                    accepted = Some((trial, e_trial));
                    break;
                }
            }
            s *= 0.5;
        }
        let Some((trial, e_trial)) = accepted else {
            return Err(Error::numeric(format!(
                "Newton stagnated after {} halvings (residual {res:e}); energy trace {trace:?}",
                opts.max_halvings
            )));
        };
        u = trial;
        energy = e_trial;
        trace.push(energy);
        steps += 1;
        g = asm.assemble(&u, true);
        res = asm.scaled_residual(&g);
    }
    let (min_u, max_u) = u
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| {
            (a.min(v), b.max(v))
        });
    let slack = 1e-9 * (hi - lo).abs().max(1.0);
    if min_u < lo - slack || max_u > hi + slack {
        return Err(Error::numeric(format!(
            "discrete maximum principle violated: u in [{min_u}, {max_u}], data in [{lo}, {hi}]"
        )));
    }
    let mut mesh = problem.mesh.clone();
    for (p, &v) in mesh.vertices.iter_mut().zip(&u) {
        p[2] = v;
    }
    mesh.fields.insert("u".into(), u.clone());
    Ok(GraphSolution {
        mesh,
        u,
        residual: res,
        energy,
        energy_trace: trace,
        newton_steps: steps,
        min_u,
        max_u,
        lambda_trunc: None,
        y_cap: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn square(n: usize) -> TriMesh {
        TriMesh::grid(n, n, |i, j| {
            [
                i as f64 / (n - 1) as f64,
                1.0 + j as f64 / (n - 1) as f64,
                0.0,
            ]
        })
    }

    #[test]
    fn constant_data_is_exact() {
        let p = GraphProblem::from_boundary(square(9), Chart::HalfPlane, |_, _| 0.7).unwrap();
        let s = solve(&p, &SolverOptions::default()).unwrap();
        assert_eq!(s.residual, 0.0);
        assert!(s.u.iter().all(|&v| v == 0.7));
    }

    #[test]
    fn tilted_plane_is_a_discrete_solution() {
        let p =
            GraphProblem::from_boundary(square(13), Chart::HalfPlane, |_, q| 1.5 * q[0]).unwrap();
        let s = solve(&p, &SolverOptions::default()).unwrap();
        assert!(s.residual <= 1e-8);
        for (q, v) in p.mesh.vertices.iter().zip(&s.u) {
            assert!((v - 1.5 * q[0]).abs() < 1e-9);
        }
    }

    #[test]
    fn nonlinear_data_converges_with_monotone_energy() {
        let p = GraphProblem::from_boundary(square(17), Chart::HalfPlane, |_, q| {
            (3.0 * q[0]).sin() * q[1]
        })
        .unwrap();
        let s = solve(&p, &SolverOptions::default()).unwrap();
        assert!(s.residual <= 1e-8);
        for w in s.energy_trace.windows(2) {
            assert!(w[1] <= w[0] * (1.0 + 1e-14));
        }
    }

    #[test]
    fn degenerate_triangle_is_reported() {
        let mut m = square(3);
        m.vertices[4] = m.vertices[0];
        let err = discrete_energy(&m, Chart::HalfPlane, &vec![0.0; 9]).unwrap_err();
        assert!(err.to_string().contains("degenerate triangle"));
    }
}
