//! Hyperbolic polygonal domains, their boundary data and their meshes.
//!
//! Ideal vertices are truncated along horocycles; the truncation arc at a
//! cusp between sides carrying values `u_l` and `u_r` receives the linear
//! interpolation of the two, the asymptotic profile of a helicoidal end.

use serde::{Deserialize, Serialize};

use super::{solve, Chart, GraphProblem, GraphSolution, SolverOptions};
use crate::hyperbolic::{Geodesic, Mobius};
use crate::mesh::TriMesh;
use crate::{Error, Result};

/// A point of `ℝ ∪ {∞}` on the ideal boundary of the half-plane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IdealPoint {
    Finite(f64),
    Infinity,
}

impl IdealPoint {
    pub fn as_option(&self) -> Option<f64> {
        match *self {
            IdealPoint::Finite(x) => Some(x),
            IdealPoint::Infinity => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundaryDatum {
    Finite(f64),
    PlusInf,
    MinusInf,
    /// Limit value along an arc at infinity.
    Asymptotic(f64),
}

impl BoundaryDatum {
    pub fn is_infinite(&self) -> bool {
        matches!(self, BoundaryDatum::PlusInf | BoundaryDatum::MinusInf)
    }

    /// Value used by the discrete problem; `±∞` become `±Λ`.
    pub fn value(&self, lambda_trunc: Option<f64>) -> Result<f64> {
        match (*self, lambda_trunc) {
            (BoundaryDatum::Finite(v), _) | (BoundaryDatum::Asymptotic(v), _) => Ok(v),
            (BoundaryDatum::PlusInf, Some(l)) => Ok(l),
            (BoundaryDatum::MinusInf, Some(l)) => Ok(-l),
            _ => Err(Error::input(
                "infinite boundary data needs a truncation level",
            )),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ArcKind {
    Geodesic(Geodesic<f64>),
    Horocycle {
        y: f64,
    },
    /// Horocyclic truncation of an ideal vertex.
    Truncation,
}

/// A boundary arc; endpoints at infinity carry `y = ∞`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Arc {
    pub kind: ArcKind,
    pub start: [f64; 2],
    pub end: [f64; 2],
}

/// Domains of the half-plane the mesher supports.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum HypDomain {
    /// `[x0, x1] × [y0, y1]`; arcs in order left, bottom, right, top.
    Rectangle { x0: f64, x1: f64, y0: f64, y1: f64 },
    /// Ideal triangle; arc `k` is the side opposite vertex `k`.
    IdealTriangle { vertices: [IdealPoint; 3] },
    /// Region above a chain of geodesic arcs through `corners` (increasing
    /// `x`) and between the vertical lines through the first and last corner,
    /// with ideal vertex `∞`. Arcs: left, each bottom arc, right.
    CuspSector { corners: Vec<[f64; 2]> },
}

impl HypDomain {
    pub fn arc_count(&self) -> usize {
        match self {
            HypDomain::Rectangle { .. } => 4,
            HypDomain::IdealTriangle { .. } => 3,
            HypDomain::CuspSector { corners } => corners.len() + 1,
        }
    }

    /// Boundary arcs in order, before truncation.
    pub fn arcs(&self) -> Result<Vec<Arc>> {
        let inf = f64::INFINITY;
        match self {
            &HypDomain::Rectangle { x0, x1, y0, y1 } => Ok(vec![
                Arc {
                    kind: ArcKind::Geodesic(Geodesic::VerticalLine { x: x0 }),
                    start: [x0, y1],
                    end: [x0, y0],
                },
                Arc {
                    kind: ArcKind::Horocycle { y: y0 },
                    start: [x0, y0],
                    end: [x1, y0],
                },
                Arc {
                    kind: ArcKind::Geodesic(Geodesic::VerticalLine { x: x1 }),
                    start: [x1, y0],
                    end: [x1, y1],
                },
                Arc {
                    kind: ArcKind::Horocycle { y: y1 },
                    start: [x1, y1],
                    end: [x0, y1],
                },
            ]),
            HypDomain::IdealTriangle { vertices } => {
                let pt = |v: &IdealPoint| match v {
                    IdealPoint::Finite(x) => [*x, 0.0],
                    IdealPoint::Infinity => [0.0, inf],
                };
                (0..3)
                    .map(|k| {
                        let (p, q) = (vertices[(k + 1) % 3], vertices[(k + 2) % 3]);
                        let g = Geodesic::through_ideal(p.as_option(), q.as_option())?;
                        Ok(Arc {
                            kind: ArcKind::Geodesic(g),
                            start: pt(&p),
                            end: pt(&q),
                        })
                    })
                    .collect()
            }
            HypDomain::CuspSector { corners } => {
                let first = corners[0];
                let last = *corners.last().unwrap();
                let mut arcs = vec![Arc {
                    kind: ArcKind::Geodesic(Geodesic::VerticalLine { x: first[0] }),
                    start: [first[0], inf],
                    end: first,
                }];
                for w in corners.windows(2) {
                    let g = Geodesic::through_points((w[0][0], w[0][1]), (w[1][0], w[1][1]))?;
                    arcs.push(Arc {
                        kind: ArcKind::Geodesic(g),
                        start: w[0],
                        end: w[1],
                    });
                }
                arcs.push(Arc {
                    kind: ArcKind::Geodesic(Geodesic::VerticalLine { x: last[0] }),
                    start: last,
                    end: [last[0], inf],
                });
                Ok(arcs)
            }
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            &HypDomain::Rectangle { x0, x1, y0, y1 } => {
                if !(x0 < x1 && 0.0 < y0 && y0 < y1) {
                    return Err(Error::input("rectangle needs x0 < x1 and 0 < y0 < y1"));
                }
            }
            HypDomain::IdealTriangle { vertices } => {
                for i in 0..3 {
                    for j in i + 1..3 {
                        if vertices[i] == vertices[j] {
                            return Err(Error::input("ideal triangle vertices must be distinct"));
                        }
                    }
                }
            }
            HypDomain::CuspSector { corners } => {
                if corners.len() < 2 {
                    return Err(Error::input("cusp sector needs at least two corners"));
                }
                if corners.iter().any(|c| !(c[1] > 0.0)) {
                    return Err(Error::input("cusp sector corners must lie in y > 0"));
                }
                if corners.windows(2).any(|w| !(w[0][0] < w[1][0])) {
                    return Err(Error::input("cusp sector corners must have increasing x"));
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Resolution {
    /// Columns per quadrilateral (rectangles, sectors) or per cusp quad (triangles).
    pub n: usize,
    /// Rows; for cusp regions, rows per doubling of height.
    pub m: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DomainProblem {
    pub domain: HypDomain,
    /// One datum per arc, in the order of [`HypDomain::arcs`].
    pub data: Vec<BoundaryDatum>,
    pub lambda_trunc: Option<f64>,
    pub resolution: Resolution,
    /// Truncation height of ideal vertices, measured in the normalized cusp chart.
    pub y_cap: f64,
}

impl DomainProblem {
    pub fn validate(&self) -> Result<()> {
        self.domain.validate()?;
        if self.data.len() != self.domain.arc_count() {
            return Err(Error::input(format!(
                "domain has {} arcs but {} data were given",
                self.domain.arc_count(),
                self.data.len()
            )));
        }
        if self.data.iter().all(|d| d.is_infinite()) {
            return Err(Error::input("at least one arc needs finite data"));
        }
        let finite_max = self
            .data
            .iter()
            .filter_map(|d| d.value(None).ok())
            .fold(f64::NEG_INFINITY, |m, v| m.max(v.abs()));
        if self.data.iter().any(|d| d.is_infinite()) {
            match self.lambda_trunc {
                Some(l) if l > finite_max => {}
                _ => return Err(Error::input("truncation level must exceed all finite data")),
            }
        }
        if self.resolution.n < 2 || self.resolution.m < 1 {
            return Err(Error::input("resolution needs n >= 2 and m >= 1"));
        }
        if !(self.y_cap > 1.0) {
            return Err(Error::input("y_cap must exceed 1"));
        }
        Ok(())
    }

    /// Mesh the domain and attach Dirichlet data.
    pub fn build(&self) -> Result<GraphProblem> {
        self.validate()?;
        let values: Vec<f64> = self
            .data
            .iter()
            .map(|d| d.value(self.lambda_trunc))
            .collect::<Result<_>>()?;
        let mut mesh = match &self.domain {
            &HypDomain::Rectangle { x0, x1, y0, y1 } => {
                rectangle_mesh(x0, x1, y0, y1, self.resolution.n, self.resolution.m, true)
            }
            HypDomain::IdealTriangle { vertices } => {
                ideal_triangle_mesh(*vertices, self.resolution.n, self.resolution.m, self.y_cap)?
            }
            HypDomain::CuspSector { corners } => {
                cusp_sector_mesh(corners, self.resolution.n, self.resolution.m, self.y_cap)?
            }
        };
        let dirichlet = boundary_values(&mesh, &values)?;
        mesh.fields.insert(
            "boundary".into(),
            dirichlet.iter().map(|d| d.unwrap_or(f64::NAN)).collect(),
        );
        GraphProblem::new(mesh, Chart::HalfPlane, dirichlet)
    }

    pub fn solve(&self, opts: &SolverOptions) -> Result<GraphSolution> {
        let problem = self.build()?;
        let mut sol = solve(&problem, opts)?;
        sol.lambda_trunc = self.lambda_trunc;
        if !matches!(self.domain, HypDomain::Rectangle { .. }) {
            sol.y_cap = Some(self.y_cap);
        }
        Ok(sol)
    }
}

/// Vertex tag for boundary arc `k`.
pub const fn arc_tag(k: usize) -> u32 {
    k as u32 + 1
}

/// Vertex tag for the truncation of ideal vertex `k`; field `trunc_s` holds the
/// interpolation parameter between the preceding and following arc.
pub const fn truncation_tag(k: usize) -> u32 {
    100 + k as u32
}

/// Pairs of (preceding arc, following arc) around each truncated cusp.
fn boundary_values(mesh: &TriMesh, values: &[f64]) -> Result<Vec<Option<f64>>> {
    let s = mesh.fields.get("trunc_s");
    let cusp = mesh.fields.get("trunc_arcs");
    mesh.tags
        .iter()
        .enumerate()
        .map(|(k, &tag)| match tag {
            0 => Ok(None),
            t if t >= 100 => {
                let (s, pair) = match (s, cusp) {
                    (Some(s), Some(c)) => (s[k], c[k] as usize),
                    _ => return Err(Error::input("truncation tags without interpolation data")),
                };
                let (l, r) = (pair / 1000, pair % 1000);
                Ok(Some((1.0 - s) * values[l] + s * values[r]))
            }
            t => {
                let second = mesh
                    .fields
                    .get("corner_arc")
                    .map(|c| c[k])
                    .filter(|c| c.is_finite());
                let v = values[(t - 1) as usize];
                Ok(Some(match second {
                    Some(c) => 0.5 * (v + values[c as usize]),
                    None => v,
                }))
            }
        })
        .collect()
}

/// Grid over `[x0, x1] × [y0, y1]`; rows geometric in `y` when `log_rows` is set.
pub fn rectangle_mesh(
    x0: f64,
    x1: f64,
    y0: f64,
    y1: f64,
    nx: usize,
    ny: usize,
    log_rows: bool,
) -> TriMesh {
    let (nx, ny) = (nx.max(2), ny.max(2));
    let mut mesh = TriMesh::grid(nx, ny, |i, j| {
        let s = i as f64 / (nx - 1) as f64;
        let r = j as f64 / (ny - 1) as f64;
        let y = if log_rows {
            y0 * (y1 / y0).powf(r)
        } else {
            y0 + (y1 - y0) * r
        };
        [x0 + (x1 - x0) * s, y, 0.0]
    });
    // grid tags: 1 left, 2 right, 3 bottom, 4 top; arcs: left, bottom, right, top
    let mut corner = vec![f64::NAN; mesh.vertices.len()];
    for j in 0..ny {
        for i in 0..nx {
            let k = j * nx + i;
            let left = i == 0;
            let right = i + 1 == nx;
            let bottom = j == 0;
            let top = j + 1 == ny;
            let mut arcs = Vec::new();
            if left {
                arcs.push(0);
            }
            if bottom {
                arcs.push(1);
            }
            if right {
                arcs.push(2);
            }
            if top {
                arcs.push(3);
            }
            mesh.tags[k] = arcs.first().map(|&a| arc_tag(a)).unwrap_or(0);
            if arcs.len() == 2 {
                corner[k] = arcs[1] as f64;
            }
        }
    }
    mesh.fields.insert("corner_arc".into(), corner);
    mesh
}

/// Hyperbolic arclength parameter `ln tan(θ/2)` of a point on a semicircle.
fn arc_param(center: f64, p: [f64; 2]) -> f64 {
    let th = p[1].atan2(p[0] - center);
    (th / 2.0).tan().ln()
}

fn arc_point(center: f64, r: f64, s: f64) -> [f64; 2] {
    let th = 2.0 * s.exp().atan();
    [center + r * th.cos(), r * th.sin()]
}

/// Structured mesh of a cusp region above a chain of geodesic arcs.
///
/// Bottom nodes are equally spaced in hyperbolic arclength along each arc,
/// `n` per arc. Above row `m` the rows are horocycles at heights
/// `y_top · (y_cap / y_top)^(i/M)`, where `y_top` is the highest corner, so
/// that powers of two times `y_top` are exact rows when `y_cap / y_top` is
/// a power of two. Rows below `m` blend from the bottom chain.
///
/// Returns the mesh (grid numbering, `nu` = columns) and the column `x` values.
pub(crate) fn sector_grid(
    corners: &[[f64; 2]],
    n: usize,
    m: usize,
    y_cap: f64,
) -> Result<(TriMesh, Vec<f64>)> {
    let mut bottom: Vec<[f64; 2]> = vec![corners[0]];
    for w in corners.windows(2) {
        let g = Geodesic::through_points((w[0][0], w[0][1]), (w[1][0], w[1][1]))?;
        let (c, r) = g
            .center_radius()
            .ok_or_else(|| Error::input("cusp sector bottom arcs cannot be vertical"))?;
        let (s0, s1) = (arc_param(c, w[0]), arc_param(c, w[1]));
        for k in 1..=n {
            bottom.push(if k == n {
                w[1]
            } else {
                arc_point(c, r, s0 + (s1 - s0) * k as f64 / n as f64)
            });
        }
    }
    let y_top = corners.iter().map(|c| c[1]).fold(0.0, f64::max);
    if !(y_cap > 2.0 * y_top) {
        return Err(Error::input(format!(
            "y_cap must exceed twice the highest corner ({})",
            2.0 * y_top
        )));
    }
    let rows = ((y_cap / y_top).log2() * m as f64).round().max(m as f64) as usize;
    let blend = m.min(rows);
    let cols = bottom.len();
    let xs: Vec<f64> = bottom.iter().map(|b| b[0]).collect();
    let mesh = TriMesh::grid(cols, rows + 1, |j, i| {
        let eta = y_top * (y_cap / y_top).powf(i as f64 / rows as f64);
        let w = (1.0 - i as f64 / blend as f64).max(0.0);
        [bottom[j][0], eta + (bottom[j][1] - y_top) * w, 0.0]
    });
    Ok((mesh, xs))
}

fn cusp_sector_mesh(corners: &[[f64; 2]], n: usize, m: usize, y_cap: f64) -> Result<TriMesh> {
    let (mut mesh, xs) = sector_grid(corners, n, m, y_cap)?;
    let cols = xs.len();
    let rows = mesh.vertices.len() / cols;
    let n_arcs = corners.len() + 1;
    let right = n_arcs - 1;
    let mut s = vec![0.0; mesh.vertices.len()];
    let mut pair = vec![0.0; mesh.vertices.len()];
    let mut corner = vec![f64::NAN; mesh.vertices.len()];
    let (x0, x1) = (xs[0], xs[cols - 1]);
    for i in 0..rows {
        for j in 0..cols {
            let k = i * cols + j;
            let tag = if i + 1 == rows && j > 0 && j + 1 < cols {
                s[k] = (xs[j] - x0) / (x1 - x0);
                pair[k] = right as f64;
                truncation_tag(0)
            } else if j == 0 {
                if i == 0 {
                    corner[k] = 1.0;
                }
                arc_tag(0)
            } else if j + 1 == cols {
                if i == 0 {
                    corner[k] = (right - 1) as f64;
                }
                arc_tag(right)
            } else if i == 0 {
                let arc = 1 + (j - 1) / n;
                if j % n == 0 {
                    corner[k] = (arc + 1) as f64;
                }
                arc_tag(arc)
            } else {
                0
            };
            mesh.tags[k] = tag;
        }
    }
    mesh.fields.insert("trunc_s".into(), s);
    mesh.fields.insert("trunc_arcs".into(), pair);
    mesh.fields.insert("corner_arc".into(), corner);
    Ok(mesh)
}

/// Apply a map to the chart coordinates of every vertex.
pub fn map_mesh<F: Fn((f64, f64)) -> (f64, f64)>(mesh: &TriMesh, f: F) -> TriMesh {
    let mut out = mesh.clone();
    for p in out.vertices.iter_mut() {
        let (x, y) = f((p[0], p[1]));
        p[0] = x;
        p[1] = y;
    }
    out
}

/// Mesh of the ideal triangle `(∞, 0, −1)` as three cusp quadrilaterals meeting
/// at the incenter; quads B and C are images of quad A under the order-three
/// rotation `z ↦ −1/(z+1)`. Arc tags: 1 for `a` (semicircle over `[−1, 0]`),
/// 2 for `b` (`x = −1`), 3 for `c` (`x = 0`).
pub fn standard_ideal_triangle(n: usize, m: usize, y_cap: f64) -> Result<TriMesh> {
    if n < 2 || n % 2 != 0 {
        return Err(Error::input("ideal triangle needs an even column count"));
    }
    let o = [-0.5, 3f64.sqrt() / 2.0];
    let (quad, xs) = sector_grid(&[[-1.0, 1.0], o, [0.0, 1.0]], n / 2, m, y_cap)?;
    let cols = xs.len();
    let rows = quad.vertices.len() / cols;
    let rho = Mobius {
        a: 0.0,
        b: -1.0,
        c: 1.0,
        d: 1.0,
    };
    // (left arc, right arc) per quad; the cusp of quad q sits between them
    let sides = [(1usize, 2usize), (2, 0), (0, 1)];
    let mut mesh = TriMesh::default();
    for (q, &(l, r)) in sides.iter().enumerate() {
        let mut part = quad.clone();
        for _ in 0..q {
            part = map_mesh(&part, |z| rho.apply(z));
        }
        let mut s = vec![0.0; part.vertices.len()];
        let mut pair = vec![0.0; part.vertices.len()];
        for i in 0..rows {
            for j in 0..cols {
                let k = i * cols + j;
                part.tags[k] = if j == 0 {
                    arc_tag(l)
                } else if j + 1 == cols {
                    arc_tag(r)
                } else if i + 1 == rows {
                    s[k] = (xs[j] - xs[0]) / (xs[cols - 1] - xs[0]);
                    pair[k] = (1000 * l + r) as f64;
                    truncation_tag(q)
                } else {
                    0
                };
            }
        }
        part.fields.insert("trunc_s".into(), s);
        part.fields.insert("trunc_arcs".into(), pair);
        part.fields
            .insert("quad".into(), vec![q as f64; part.vertices.len()]);
        part.fields.insert(
            "row".into(),
            (0..part.vertices.len())
                .map(|k| (k / cols) as f64)
                .collect(),
        );
        mesh.append(&part);
    }
    mesh.weld(1e-10);
    Ok(mesh)
}

fn ideal_triangle_mesh(
    vertices: [IdealPoint; 3],
    n: usize,
    m: usize,
    y_cap: f64,
) -> Result<TriMesh> {
    let mesh = standard_ideal_triangle(n, m, y_cap)?;
    let targets = [
        vertices[0].as_option(),
        vertices[1].as_option(),
        vertices[2].as_option(),
    ];
    let mob = Mobius::from_ideal_triple(-1.0, targets)?;
    Ok(map_mesh(&mesh, |z| mob.apply(z)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn standard_triangle_is_a_valid_disk() {
        let m = standard_ideal_triangle(8, 3, 16.0).unwrap();
        let v = m.vertices.len() as i64;
        let e = m.edges().len() as i64;
        let f = m.triangles.len() as i64;
        assert_eq!(v - e + f, 1);
        assert_eq!(m.boundary_loops().len(), 1);
        for p in &m.vertices {
            assert!(p[1] > 0.0);
            assert!(p[0] >= -1.0 - 1e-12 && p[0] <= 1e-12);
        }
    }

    #[test]
    fn triangle_sides_are_tagged_on_their_geodesics() {
        let m = standard_ideal_triangle(8, 3, 16.0).unwrap();
        for (p, &t) in m.vertices.iter().zip(&m.tags) {
            match t {
                1 => assert!(((p[0] + 0.5).powi(2) + p[1] * p[1] - 0.25).abs() < 1e-12),
                2 => assert!((p[0] + 1.0).abs() < 1e-12),
                3 => assert!(p[0].abs() < 1e-12),
                _ => {}
            }
        }
    }

    #[test]
    fn rows_hit_powers_of_two() {
        let m = standard_ideal_triangle(8, 4, 32.0).unwrap();
        for y in [2.0, 4.0, 8.0, 16.0] {
            assert!(m
                .vertices
                .iter()
                .any(|p| (p[1] - y).abs() < 1e-12 && (p[0] + 0.5).abs() < 1e-12));
        }
    }

    #[test]
    fn infinite_data_needs_truncation() {
        let p = DomainProblem {
            domain: HypDomain::Rectangle {
                x0: 0.0,
                x1: 1.0,
                y0: 1.0,
                y1: 2.0,
            },
            data: vec![
                BoundaryDatum::PlusInf,
                BoundaryDatum::Finite(0.0),
                BoundaryDatum::Finite(0.0),
                BoundaryDatum::Finite(0.0),
            ],
            lambda_trunc: None,
            resolution: Resolution { n: 4, m: 4 },
            y_cap: 16.0,
        };
        assert!(p.validate().is_err());
        let all_inf = DomainProblem {
            data: vec![BoundaryDatum::PlusInf; 4],
            lambda_trunc: Some(4.0),
            ..p
        };
        assert!(all_inf.validate().is_err());
    }
}
