//! Triangle meshes in the half-space chart and their file formats.

use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;

use crate::{Error, Result};

#[derive(Debug, Clone, Default, PartialEq)]
pub struct TriMesh {
    /// Chart coordinates `(x, y, t)`.
    pub vertices: Vec<[f64; 3]>,
    pub triangles: Vec<[usize; 3]>,
    /// Per-vertex boundary tag, 0 for untagged.
    pub tags: Vec<u32>,
    /// Named per-vertex scalar fields exported to VTK.
    pub fields: BTreeMap<String, Vec<f64>>,
}

impl TriMesh {
    pub fn new(vertices: Vec<[f64; 3]>, triangles: Vec<[usize; 3]>) -> Self {
        let tags = vec![0; vertices.len()];
        TriMesh {
            vertices,
            triangles,
            tags,
            fields: BTreeMap::new(),
        }
    }

    /// Structured `nu × nv` grid; vertex `(i, j)` has index `j * nu + i`.
    ///
    /// Every cell is split along the same diagonal. Tags: 1 for `i = 0`,
    /// 2 for `i = nu-1`, 3 for `j = 0`, 4 for `j = nv-1` (later tags win at corners).
    pub fn grid<F: Fn(usize, usize) -> [f64; 3]>(nu: usize, nv: usize, f: F) -> Self {
        let mut vertices = Vec::with_capacity(nu * nv);
        let mut tags = Vec::with_capacity(nu * nv);
        for j in 0..nv {
            for i in 0..nu {
                vertices.push(f(i, j));
                let mut tag = 0;
                if i == 0 {
                    tag = 1;
                }
                if i + 1 == nu {
                    tag = 2;
                }
                if j == 0 {
                    tag = 3;
                }
                if j + 1 == nv {
                    tag = 4;
                }
                tags.push(tag);
            }
        }
        let mut triangles = Vec::with_capacity(2 * (nu - 1) * (nv - 1));
        for j in 0..nv - 1 {
            for i in 0..nu - 1 {
                let a = j * nu + i;
                let b = a + 1;
                let c = a + nu + 1;
                let d = a + nu;
                triangles.push([a, b, c]);
                triangles.push([a, c, d]);
            }
        }
        TriMesh {
            vertices,
            triangles,
            tags,
            fields: BTreeMap::new(),
        }
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    /// Undirected edges with the number of incident triangles.
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

    pub fn boundary_vertex_mask(&self) -> Vec<bool> {
        let mut mask = vec![false; self.vertices.len()];
        for ((a, b), n) in self.edges() {
            if n == 1 {
                mask[a] = true;
                mask[b] = true;
            }
        }
        mask
    }

    /// Closed boundary loops, each oriented consistently with the triangles.
    pub fn boundary_loops(&self) -> Vec<Vec<usize>> {
        let counts = self.edges();
        let mut next: HashMap<usize, usize> = HashMap::new();
        for t in &self.triangles {
            for k in 0..3 {
                let (a, b) = (t[k], t[(k + 1) % 3]);
                if counts[&(a.min(b), a.max(b))] == 1 {
                    next.insert(a, b);
                }
            }
        }
        let mut starts: Vec<usize> = next.keys().copied().collect();
        starts.sort_unstable();
        let mut seen = vec![false; self.vertices.len()];
        let mut loops = Vec::new();
        for s in starts {
            if seen[s] {
                continue;
            }
            let mut lp = vec![s];
            seen[s] = true;
            let mut cur = next[&s];
            while cur != s {
                if seen[cur] {
                    break;
                }
                seen[cur] = true;
                lp.push(cur);
                match next.get(&cur) {
                    Some(&n) => cur = n,
                    None => break,
                }
            }
            loops.push(lp);
        }
        loops
    }

    /// Append another mesh; returns the index offset of its vertices.
    pub fn append(&mut self, other: &TriMesh) -> usize {
        let off = self.vertices.len();
        self.vertices.extend_from_slice(&other.vertices);
        self.tags.extend_from_slice(&other.tags);
        self.triangles.extend(
            other
                .triangles
                .iter()
                .map(|t| [t[0] + off, t[1] + off, t[2] + off]),
        );
        for (k, v) in &other.fields {
            let f = self
                .fields
                .entry(k.clone())
                .or_insert_with(|| vec![0.0; off]);
            f.resize(off, 0.0);
            f.extend_from_slice(v);
        }
        off
    }

    /// Merge vertices closer than `tol` (chart distance), keeping first occurrences.
    pub fn weld(&mut self, tol: f64) {
        let key = |p: &[f64; 3]| {
            (
                (p[0] / tol).round() as i64,
                (p[1] / tol).round() as i64,
                (p[2] / tol).round() as i64,
            )
        };
        let mut buckets: HashMap<(i64, i64, i64), Vec<usize>> = HashMap::new();
        let mut remap = vec![usize::MAX; self.vertices.len()];
        let mut kept: Vec<usize> = Vec::new();
        for (i, p) in self.vertices.iter().enumerate() {
            let k = key(p);
            let mut found = None;
            'outer: for dx in -1..=1 {
                for dy in -1..=1 {
                    for dz in -1..=1 {
                        if let Some(list) = buckets.get(&(k.0 + dx, k.1 + dy, k.2 + dz)) {
                            for &j in list {
                                let q = &self.vertices[kept[j]];
                                let d = ((p[0] - q[0]).powi(2)
                                    + (p[1] - q[1]).powi(2)
                                    + (p[2] - q[2]).powi(2))
                                .sqrt();
                                if d <= tol {
                                    found = Some(j);
                                    break 'outer;
                                }
                            }
                        }
                    }
                }
            }
            match found {
                Some(j) => remap[i] = j,
                None => {
                    remap[i] = kept.len();
                    buckets.entry(k).or_default().push(kept.len());
                    kept.push(i);
                }
            }
        }
        self.vertices = kept.iter().map(|&i| self.vertices[i]).collect();
        let old_tags = std::mem::take(&mut self.tags);
        self.tags = kept.iter().map(|&i| old_tags[i]).collect();
        for f in self.fields.values_mut() {
            *f = kept.iter().map(|&i| f[i]).collect();
        }
        self.triangles = self
            .triangles
            .iter()
            .map(|t| [remap[t[0]], remap[t[1]], remap[t[2]]])
            .filter(|t| t[0] != t[1] && t[1] != t[2] && t[0] != t[2])
            .collect();
    }

    /// Longest edge measured in chart coordinates.
    pub fn max_edge_chart(&self) -> f64 {
        self.edges()
            .keys()
            .map(|&(a, b)| dist3(&self.vertices[a], &self.vertices[b]))
            .fold(0.0, f64::max)
    }

    /// Longest edge measured in the product metric at the edge midpoint.
    pub fn max_edge_product(&self) -> f64 {
        self.edges()
            .keys()
            .map(|&(a, b)| product_edge_length(&self.vertices[a], &self.vertices[b]))
            .fold(0.0, f64::max)
    }

    /// Chart area of the projection of triangle `k` to the `(x, y)` plane (signed).
    pub fn signed_area_xy(&self, k: usize) -> f64 {
        let [a, b, c] = self.triangles[k];
        let (p, q, r) = (self.vertices[a], self.vertices[b], self.vertices[c]);
        0.5 * ((q[0] - p[0]) * (r[1] - p[1]) - (r[0] - p[0]) * (q[1] - p[1]))
    }

    pub fn write_obj(&self) -> String {
        let mut s = String::new();
        for v in &self.vertices {
            let _ = writeln!(s, "v {} {} {}", fmt_f(v[0]), fmt_f(v[1]), fmt_f(v[2]));
        }
        for t in &self.triangles {
            let _ = writeln!(s, "f {} {} {}", t[0] + 1, t[1] + 1, t[2] + 1);
        }
        s
    }

    pub fn read_obj(text: &str) -> Result<TriMesh> {
        let mut vertices = Vec::new();
        let mut triangles = Vec::new();
        for (ln, line) in text.lines().enumerate() {
            let mut it = line.split_whitespace();
            match it.next() {
                Some("v") => {
                    let c: Vec<f64> = it
                        .take(3)
                        .map(|s| s.parse::<f64>())
                        .collect::<std::result::Result<_, _>>()
                        .map_err(|e| Error::input(format!("OBJ line {}: {e}", ln + 1)))?;
                    if c.len() != 3 {
                        return Err(Error::input(format!(
                            "OBJ line {}: vertex needs 3 coordinates",
                            ln + 1
                        )));
                    }
                    vertices.push([c[0], c[1], c[2]]);
                }
                Some("f") => {
                    let idx: Vec<usize> = it
                        .map(|s| s.split('/').next().unwrap_or("").parse::<usize>())
                        .collect::<std::result::Result<_, _>>()
                        .map_err(|e| Error::input(format!("OBJ line {}: {e}", ln + 1)))?;
                    if idx.len() < 3 || idx.iter().any(|&i| i == 0 || i > vertices.len()) {
                        return Err(Error::input(format!("OBJ line {}: bad face", ln + 1)));
                    }
                    for k in 1..idx.len() - 1 {
                        triangles.push([idx[0] - 1, idx[k] - 1, idx[k + 1] - 1]);
                    }
                }
                _ => {}
            }
        }
        Ok(TriMesh::new(vertices, triangles))
    }

    /// Legacy ASCII VTK with all per-vertex fields as point data.
    pub fn write_vtk(&self, title: &str) -> String {
        let mut s = String::new();
        let _ = writeln!(
            s,
            "# vtk DataFile Version 3.0\n{title}\nASCII\nDATASET POLYDATA"
        );
        let _ = writeln!(s, "POINTS {} double", self.vertices.len());
        for v in &self.vertices {
            let _ = writeln!(s, "{} {} {}", fmt_f(v[0]), fmt_f(v[1]), fmt_f(v[2]));
        }
        let _ = writeln!(
            s,
            "POLYGONS {} {}",
            self.triangles.len(),
            4 * self.triangles.len()
        );
        for t in &self.triangles {
            let _ = writeln!(s, "3 {} {} {}", t[0], t[1], t[2]);
        }
        if !self.fields.is_empty() {
            let _ = writeln!(s, "POINT_DATA {}", self.vertices.len());
            for (name, vals) in &self.fields {
                let _ = writeln!(s, "SCALARS {name} double 1\nLOOKUP_TABLE default");
                for v in vals {
                    let _ = writeln!(s, "{}", fmt_f(*v));
                }
            }
        }
        s
    }
}

fn fmt_f(v: f64) -> String {
    format!("{v:.17e}")
}

pub fn dist3(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2) + (a[2] - b[2]).powi(2)).sqrt()
}

/// Length of a chart segment in the product metric, evaluated at its midpoint.
pub fn product_edge_length(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    let ym = 0.5 * (a[1] + b[1]);
    let dx = a[0] - b[0];
    let dy = a[1] - b[1];
    let dt = a[2] - b[2];
    ((dx * dx + dy * dy) / (ym * ym) + dt * dt).sqrt()
}

/// Bucketed point location for planar (`x`, `y`) triangulations.
pub struct Locator<'a> {
    mesh: &'a TriMesh,
    origin: (f64, f64),
    cell: f64,
    dims: (usize, usize),
    buckets: Vec<Vec<usize>>,
}

impl<'a> Locator<'a> {
    pub fn new(mesh: &'a TriMesh) -> Self {
        let (mut x0, mut y0, mut x1, mut y1) = (f64::MAX, f64::MAX, f64::MIN, f64::MIN);
        for v in &mesh.vertices {
            x0 = x0.min(v[0]);
            y0 = y0.min(v[1]);
            x1 = x1.max(v[0]);
            y1 = y1.max(v[1]);
        }
        let n = (mesh.triangles.len().max(1) as f64).sqrt().ceil() as usize;
        let cell = ((x1 - x0).max(y1 - y0) / n as f64).max(1e-300);
        let dims = (
            ((x1 - x0) / cell) as usize + 1,
            ((y1 - y0) / cell) as usize + 1,
        );
        let mut buckets = vec![Vec::new(); dims.0 * dims.1];
        for (k, t) in mesh.triangles.iter().enumerate() {
            let xs = t.map(|i| mesh.vertices[i][0]);
            let ys = t.map(|i| mesh.vertices[i][1]);
            let i0 = ((xs.iter().cloned().fold(f64::MAX, f64::min) - x0) / cell) as usize;
            let i1 = ((xs.iter().cloned().fold(f64::MIN, f64::max) - x0) / cell) as usize;
            let j0 = ((ys.iter().cloned().fold(f64::MAX, f64::min) - y0) / cell) as usize;
            let j1 = ((ys.iter().cloned().fold(f64::MIN, f64::max) - y0) / cell) as usize;
            for j in j0..=j1.min(dims.1 - 1) {
                for i in i0..=i1.min(dims.0 - 1) {
                    buckets[j * dims.0 + i].push(k);
                }
            }
        }
        Locator {
            mesh,
            origin: (x0, y0),
            cell,
            dims,
            buckets,
        }
    }

    /// Triangle containing `(x, y)` and barycentric weights, with slack `eps`.
    pub fn locate(&self, x: f64, y: f64, eps: f64) -> Option<(usize, [f64; 3])> {
        let fi = (x - self.origin.0) / self.cell;
        let fj = (y - self.origin.1) / self.cell;
        if fi < -1.0 || fj < -1.0 {
            return None;
        }
        let i = (fi.max(0.0) as usize).min(self.dims.0 - 1);
        let j = (fj.max(0.0) as usize).min(self.dims.1 - 1);
        let mut best: Option<(usize, [f64; 3], f64)> = None;
        for &k in &self.buckets[j * self.dims.0 + i] {
            let t = self.mesh.triangles[k];
            let p = t.map(|v| self.mesh.vertices[v]);
            let det = (p[1][0] - p[0][0]) * (p[2][1] - p[0][1])
                - (p[2][0] - p[0][0]) * (p[1][1] - p[0][1]);
            if det == 0.0 {
                continue;
            }
            let l1 =
                ((x - p[0][0]) * (p[2][1] - p[0][1]) - (p[2][0] - p[0][0]) * (y - p[0][1])) / det;
            let l2 =
                ((p[1][0] - p[0][0]) * (y - p[0][1]) - (x - p[0][0]) * (p[1][1] - p[0][1])) / det;
            let l0 = 1.0 - l1 - l2;
            let worst = l0.min(l1).min(l2);
            if worst >= -eps && best.as_ref().map_or(true, |b| worst > b.2) {
                best = Some((k, [l0, l1, l2], worst));
            }
        }
        best.map(|(k, l, _)| (k, l))
    }

    /// P1 interpolation of a vertex field.
    pub fn interpolate(&self, values: &[f64], x: f64, y: f64, eps: f64) -> Option<f64> {
        self.locate(x, y, eps).map(|(k, l)| {
            let t = self.mesh.triangles[k];
            l[0] * values[t[0]] + l[1] * values[t[1]] + l[2] * values[t[2]]
        })
    }
}
