//! Schwarz reflection of patches and assembly of surface complexes.
//!
//! A complex is a list of patches in one chart together with side
//! identifications by isometries. Gluing merges matched vertices with a
//! union-find, after which the topology is read off the class-level
//! triangle complex.

use std::collections::{BTreeMap, VecDeque};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::curvature::{edge_length, EdgeMetric, IntrinsicMesh};
use crate::hyperbolic::{Generator, Geodesic, Isometry, Point3};
use crate::mesh::TriMesh;
use crate::{Error, Result};

mod examples;

pub use examples::{
    build_example, example5_half_quotient, expected_topology, DeckCheck, EndSpec, ExampleBuild,
    ExampleParams,
};

/// An involutive symmetry whose fixed set lies on a patch boundary.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum ReflectionRule {
    /// `(p, t) ↦ (R_γ p, 2c − t)`: rotation by `π` about `γ × {c}`.
    AcrossGeodesicAtHeight {
        geodesic: Geodesic<f64>,
        height: f64,
    },
    /// Rotation by `π` about the vertical line over `(x, y)`, whose segment
    /// `t ∈ [t_min, t_max]` lies on the patch.
    AboutVerticalAxis {
        x: f64,
        y: f64,
        t_min: f64,
        t_max: f64,
    },
}

impl ReflectionRule {
    pub fn isometry(&self) -> Isometry<f64> {
        match *self {
            ReflectionRule::AcrossGeodesicAtHeight { geodesic, height } => Isometry::identity()
                .then(Generator::GeodesicReflection(geodesic))
                .then(Generator::VerticalReflection(height)),
            ReflectionRule::AboutVerticalAxis { x, y, .. } => {
                Isometry::from_generator(Generator::HalfTurn { x, y })
            }
        }
    }

    pub fn apply(&self, p: [f64; 3]) -> [f64; 3] {
        apply_iso(&self.isometry(), p)
    }

    fn fixes(&self, p: [f64; 3], tol: f64) -> bool {
        match *self {
            ReflectionRule::AcrossGeodesicAtHeight { height, .. } => {
                (p[2] - height).abs() <= tol
                    && edge_length(EdgeMetric::Product, &p, &self.apply(p)) <= tol
            }
            ReflectionRule::AboutVerticalAxis { x, y, t_min, t_max } => {
                edge_length(EdgeMetric::Product, &p, &[x, y, p[2]]) <= tol
                    && p[2] >= t_min - tol
                    && p[2] <= t_max + tol
            }
        }
    }
}

pub(crate) fn apply_iso(iso: &Isometry<f64>, p: [f64; 3]) -> [f64; 3] {
    let q = iso.apply(Point3::new(p[0], p[1], p[2]));
    [q.x, q.y, q.t]
}

/// Image of a mesh under an isometry, vertex order kept.
pub fn map_trimesh(mesh: &TriMesh, iso: &Isometry<f64>) -> TriMesh {
    let mut out = mesh.clone();
    out.vertices = mesh
        .vertices
        .par_iter()
        .map(|&p| apply_iso(iso, p))
        .collect();
    out
}

fn reversed(mut mesh: TriMesh) -> TriMesh {
    mesh.triangles.iter_mut().for_each(|t| t.swap(1, 2));
    mesh
}

/// Reflect a patch; the rule's fixed set must meet the patch boundary in at
/// least two vertices. The image is oriented coherently with the patch
/// across the fixed set.
pub fn reflect(patch: &TriMesh, rule: &ReflectionRule, tol: f64) -> Result<TriMesh> {
    let bd = patch.boundary_vertex_mask();
    let on = patch
        .vertices
        .iter()
        .zip(&bd)
        .filter(|(p, &b)| b && rule.fixes(**p, tol))
        .count();
    if on < 2 {
        return Err(Error::domain("fixed set not on patch boundary"));
    }
    Ok(reversed(map_trimesh(patch, &rule.isometry())))
}

/// A mesh with named boundary sides and the rules that produced it.
#[derive(Debug, Clone)]
pub struct Patch {
    pub name: String,
    pub mesh: TriMesh,
    /// Side name to vertex indices.
    pub sides: BTreeMap<String, Vec<usize>>,
    pub provenance: Vec<String>,
}

impl Patch {
    pub fn new(name: impl Into<String>, mesh: TriMesh) -> Self {
        Patch {
            name: name.into(),
            mesh,
            sides: BTreeMap::new(),
            provenance: Vec::new(),
        }
    }

    /// Image under `iso`, with every side renamed through `rename`. Set
    /// `reverse` when `iso` reverses the orientation of the extended surface,
    /// as a rotation about a line contained in it does.
    pub fn image(
        &self,
        name: &str,
        iso: &Isometry<f64>,
        reverse: bool,
        step: &str,
        rename: impl Fn(&str) -> String,
    ) -> Patch {
        let mut provenance = self.provenance.clone();
        provenance.push(step.to_string());
        let mesh = map_trimesh(&self.mesh, iso);
        Patch {
            name: name.to_string(),
            mesh: if reverse { reversed(mesh) } else { mesh },
            sides: self
                .sides
                .iter()
                .map(|(k, v)| (rename(k), v.clone()))
                .collect(),
            provenance,
        }
    }

    /// Reflection by `rule`; sides fixed by the rule keep their names.
    pub fn reflected(
        &self,
        name: &str,
        rule: &ReflectionRule,
        step: &str,
        prefix: &str,
        tol: f64,
    ) -> Result<Patch> {
        let mesh = reflect(&self.mesh, rule, tol)?;
        let mut provenance = self.provenance.clone();
        provenance.push(step.to_string());
        let sides = self
            .sides
            .iter()
            .map(|(k, v)| {
                let fixed = v.iter().all(|&i| rule.fixes(self.mesh.vertices[i], tol));
                (
                    if fixed {
                        k.clone()
                    } else {
                        format!("{prefix}{k}")
                    },
                    v.clone(),
                )
            })
            .collect();
        Ok(Patch {
            name: name.to_string(),
            mesh,
            sides,
            provenance,
        })
    }

    fn side(&self, name: &str) -> Result<&Vec<usize>> {
        self.sides
            .get(name)
            .ok_or_else(|| Error::input(format!("patch {} has no side {name}", self.name)))
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Identification {
    /// `(patch, side)` mapped by `iso` onto `to`.
    pub from: (usize, String),
    pub to: (usize, String),
    pub iso: Isometry<f64>,
    pub label: String,
}

#[derive(Debug, Clone)]
pub struct SurfaceComplex {
    pub patches: Vec<Patch>,
    pub identifications: Vec<Identification>,
    pub deck: Vec<(String, Isometry<f64>)>,
    /// Matching tolerance in the product metric.
    pub tol: f64,
}

/// The identified complex at the level of vertex classes.
#[derive(Debug, Clone)]
pub struct GluedComplex {
    pub intrinsic: IntrinsicMesh,
    /// Class of each patch vertex.
    pub class_of: Vec<Vec<usize>>,
    /// Originating `(patch, triangle)` of each glued triangle.
    pub source: Vec<(usize, usize)>,
    /// Largest product distance between matched vertices.
    pub max_mismatch: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TopologySummary {
    /// Orientable genus, or the number of cross-caps when non-orientable.
    pub genus: u32,
    pub punctures: u32,
    pub orientable: bool,
    pub chi: i64,
}

fn find(parent: &mut [usize], mut x: usize) -> usize {
    while parent[x] != x {
        parent[x] = parent[parent[x]];
        x = parent[x];
    }
    x
}

impl SurfaceComplex {
    pub fn glue(&self) -> Result<GluedComplex> {
        let offsets: Vec<usize> = self
            .patches
            .iter()
            .scan(0, |acc, p| {
                let o = *acc;
                *acc += p.mesh.vertices.len();
                Some(o)
            })
            .collect();
        let total: usize = self.patches.iter().map(|p| p.mesh.vertices.len()).sum();
        let mut parent: Vec<usize> = (0..total).collect();
        let mut max_mismatch: f64 = 0.0;
        for id in &self.identifications {
            let (pa, pb) = (&self.patches[id.from.0], &self.patches[id.to.0]);
            let (sa, sb) = (pa.side(&id.from.1)?, pb.side(&id.to.1)?);
            if sa.len() != sb.len() {
                return Err(Error::domain(format!(
                    "dangling identification {}: {} vertices against {}",
                    id.label,
                    sa.len(),
                    sb.len()
                )));
            }
            let mut used = vec![false; sb.len()];
            for &a in sa {
                let q = apply_iso(&id.iso, pa.mesh.vertices[a]);
                let (j, d) = sb
                    .iter()
                    .enumerate()
                    .map(|(j, &b)| {
                        (
                            j,
                            edge_length(EdgeMetric::Product, &q, &pb.mesh.vertices[b]),
                        )
                    })
                    .min_by(|x, y| x.1.partial_cmp(&y.1).unwrap().then(x.0.cmp(&y.0)))
                    .ok_or_else(|| {
                        Error::domain(format!("identification {} has an empty side", id.label))
                    })?;
                if !(d <= self.tol) || used[j] {
                    return Err(Error::domain(format!(
                        "dangling identification {}: vertex {a} of {} has no partner (distance {d:e})",
                        id.label, pa.name
                    )));
                }
                used[j] = true;
                max_mismatch = max_mismatch.max(d);
                let (ra, rb) = (
                    find(&mut parent, offsets[id.from.0] + a),
                    find(&mut parent, offsets[id.to.0] + sb[j]),
                );
                if ra != rb {
                    parent[ra.max(rb)] = ra.min(rb);
                }
            }
        }
        let mut dense = BTreeMap::new();
        let mut class_of = Vec::with_capacity(self.patches.len());
        for (p, patch) in self.patches.iter().enumerate() {
            let mut c = Vec::with_capacity(patch.mesh.vertices.len());
            for v in 0..patch.mesh.vertices.len() {
                let r = find(&mut parent, offsets[p] + v);
                let n = dense.len();
                c.push(*dense.entry(r).or_insert(n));
            }
            class_of.push(c);
        }
        let mut intrinsic = IntrinsicMesh {
            n_vertices: dense.len(),
            ..Default::default()
        };
        let mut source = Vec::new();
        for (p, patch) in self.patches.iter().enumerate() {
            for (k, t) in patch.mesh.triangles.iter().enumerate() {
                let c = t.map(|v| class_of[p][v]);
                if c[0] == c[1] || c[1] == c[2] || c[0] == c[2] {
                    return Err(Error::domain(format!(
                        "triangle {k} of {} collapses under gluing",
                        patch.name
                    )));
                }
                intrinsic.triangles.push(c);
                intrinsic.coords.push(t.map(|v| patch.mesh.vertices[v]));
                source.push((p, k));
            }
        }
        Ok(GluedComplex {
            intrinsic,
            class_of,
            source,
            max_mismatch,
        })
    }

    pub fn euler_characteristic(&self) -> Result<i64> {
        Ok(self.glue()?.intrinsic.euler_characteristic())
    }
}

impl GluedComplex {
    /// Number of connected components and whether a coherent orientation exists.
    pub fn components_and_orientability(&self) -> Result<(usize, bool)> {
        let tris = &self.intrinsic.triangles;
        let mut by_edge: BTreeMap<(usize, usize), Vec<usize>> = BTreeMap::new();
        for (k, t) in tris.iter().enumerate() {
            for i in 0..3 {
                let (a, b) = (t[i], t[(i + 1) % 3]);
                by_edge.entry((a.min(b), a.max(b))).or_default().push(k);
            }
        }
        if let Some((e, _)) = by_edge.iter().find(|(_, v)| v.len() > 2) {
            return Err(Error::domain(format!("non-manifold edge {e:?}")));
        }
        let dir =
            |t: &[usize; 3], a: usize, b: usize| (0..3).any(|i| t[i] == a && t[(i + 1) % 3] == b);
        let mut flip: Vec<Option<bool>> = vec![None; tris.len()];
        let mut components = 0;
        let mut orientable = true;
        for s in 0..tris.len() {
            if flip[s].is_some() {
                continue;
            }
            components += 1;
            flip[s] = Some(false);
            let mut queue = VecDeque::from([s]);
            while let Some(k) = queue.pop_front() {
                let t = tris[k];
                for i in 0..3 {
                    let (a, b) = (t[i], t[(i + 1) % 3]);
                    for &j in &by_edge[&(a.min(b), a.max(b))] {
                        if j == k {
                            continue;
                        }
                        // neighbours are coherent when they traverse the shared edge oppositely
                        let same_dir = dir(&tris[j], a, b);
                        let want = flip[k].unwrap() ^ same_dir;
                        match flip[j] {
                            None => {
                                flip[j] = Some(want);
                                queue.push_back(j);
                            }
                            Some(f) if f != want => orientable = false,
                            _ => {}
                        }
                    }
                }
            }
        }
        Ok((components, orientable))
    }

    pub fn topology(&self) -> Result<TopologySummary> {
        let chi = self.intrinsic.euler_characteristic();
        let n = self.intrinsic.boundary_loops()?.len() as i64;
        let (components, orientable) = self.components_and_orientability()?;
        if components != 1 {
            return Err(Error::domain(format!(
                "complex has {components} components"
            )));
        }
        let genus = if orientable {
            let twice = 2 - chi - n;
            if twice < 0 || twice % 2 != 0 {
                return Err(Error::domain(format!(
                    "inconsistent topology: chi = {chi}, n = {n}"
                )));
            }
            twice / 2
        } else {
            2 - chi - n
        };
        Ok(TopologySummary {
            genus: genus as u32,
            punctures: n as u32,
            orientable,
            chi,
        })
    }
}

/// Symmetric product-metric Hausdorff distance between two vertex sets.
pub fn hausdorff(a: &[[f64; 3]], b: &[[f64; 3]]) -> f64 {
    let one_sided = |p: &[[f64; 3]], q: &[[f64; 3]]| {
        p.par_iter()
            .map(|x| {
                q.iter()
                    .map(|y| edge_length(EdgeMetric::Product, x, y))
                    .fold(f64::INFINITY, f64::min)
            })
            .reduce(|| 0.0, f64::max)
    };
    one_sided(a, b).max(one_sided(b, a))
}

/// Side lists from vertex tags, with `corner_arc` adding the second arc of corners.
pub(crate) fn sides_from_tags(
    mesh: &TriMesh,
    names: &[(usize, &str)],
) -> BTreeMap<String, Vec<usize>> {
    let corner = mesh.fields.get("corner_arc");
    names
        .iter()
        .map(|&(arc, name)| {
            let list = (0..mesh.vertices.len())
                .filter(|&k| {
                    mesh.tags[k] == arc as u32 + 1
                        || corner.map_or(false, |c| c[k].is_finite() && c[k] as usize == arc)
                })
                .collect();
            (name.to_string(), list)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn flat_patch() -> TriMesh {
        TriMesh::grid(5, 5, |i, j| [i as f64 * 0.25, 1.0 + j as f64 * 0.25, 0.7])
    }

    #[test]
    fn rules_are_involutions() {
        let rules = [
            ReflectionRule::AcrossGeodesicAtHeight {
                geodesic: Geodesic::semicircle(-1.0, 0.5).unwrap(),
                height: 0.3,
            },
            ReflectionRule::AboutVerticalAxis {
                x: 0.2,
                y: 1.3,
                t_min: 0.0,
                t_max: 1.0,
            },
        ];
        for r in rules {
            for p in [[0.3, 0.7, 0.1], [-2.0, 3.0, -1.0], [0.0, 0.01, 5.0]] {
                let q = r.apply(r.apply(p));
                for k in 0..3 {
                    assert!((q[k] - p[k]).abs() < 1e-12 * (1.0 + p[k].abs()));
                }
            }
        }
    }

    #[test]
    fn constant_patch_reflects_to_itself_at_its_height() {
        let m = flat_patch();
        let rule = ReflectionRule::AcrossGeodesicAtHeight {
            geodesic: Geodesic::VerticalLine { x: 0.0 },
            height: 0.7,
        };
        let r = reflect(&m, &rule, 1e-9).unwrap();
        assert!(r.vertices.iter().all(|p| (p[2] - 0.7).abs() < 1e-15));
        assert!(r.vertices.iter().all(|p| p[0] <= 1e-15));
    }

    #[test]
    fn fixed_set_off_boundary_is_rejected() {
        let m = flat_patch();
        let rule = ReflectionRule::AcrossGeodesicAtHeight {
            geodesic: Geodesic::VerticalLine { x: -3.0 },
            height: 0.7,
        };
        assert!(reflect(&m, &rule, 1e-9).is_err());
    }

    #[test]
    fn torus_and_disk_characteristics() {
        let m = TriMesh::grid(6, 6, |i, j| [i as f64 * 0.2, 1.0, j as f64 * 0.2]);
        let mut p = Patch::new("square", m);
        p.sides
            .insert("left".into(), (0..6).map(|j| j * 6).collect());
        p.sides
            .insert("right".into(), (0..6).map(|j| j * 6 + 5).collect());
        p.sides.insert("bottom".into(), (0..6).collect());
        p.sides.insert("top".into(), (30..36).collect());
        let disk = SurfaceComplex {
            patches: vec![p.clone()],
            identifications: vec![],
            deck: vec![],
            tol: 1e-9,
        };
        assert_eq!(disk.euler_characteristic().unwrap(), 1);
        let side = |a: &str, b: &str, g: Generator<f64>| Identification {
            from: (0, a.into()),
            to: (0, b.into()),
            iso: Isometry::from_generator(g),
            label: format!("{a}-{b}"),
        };
        let torus = SurfaceComplex {
            patches: vec![p.clone()],
            identifications: vec![
                side("left", "right", Generator::Parabolic(1.0)),
                side("bottom", "top", Generator::VerticalTranslate(1.0)),
            ],
            deck: vec![],
            tol: 1e-9,
        };
        let glued = torus.glue().unwrap();
        assert_eq!(glued.intrinsic.euler_characteristic(), 0);
        let top = glued.topology().unwrap();
        assert_eq!((top.genus, top.punctures, top.orientable), (1, 0, true));
        let glide = Isometry::identity()
            .then(Generator::GeodesicReflection(Geodesic::VerticalLine {
                x: 0.5,
            }))
            .then(Generator::VerticalTranslate(1.0));
        let klein = SurfaceComplex {
            patches: vec![p.clone()],
            identifications: vec![
                side("left", "right", Generator::Parabolic(1.0)),
                Identification {
                    from: (0, "bottom".into()),
                    to: (0, "top".into()),
                    iso: glide,
                    label: "glide".into(),
                },
            ],
            deck: vec![],
            tol: 1e-9,
        };
        let top = klein.glue().unwrap().topology().unwrap();
        assert_eq!((top.chi, top.orientable, top.punctures), (0, false, 0));
        let dangling = SurfaceComplex {
            patches: vec![p],
            identifications: vec![side(
                "bottom",
                "top",
                Generator::GeodesicReflection(Geodesic::VerticalLine { x: 0.5 }),
            )],
            deck: vec![],
            tol: 1e-9,
        };
        assert!(dangling.glue().is_err());
    }
}
