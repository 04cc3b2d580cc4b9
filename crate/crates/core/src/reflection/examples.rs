//! The five reflection-built examples.
//!
//! Every example starts from one or two fundamental pieces (graph solutions
//! or least-area disks), extends them by Schwarz reflection and symmetry
//! images, and records the side identifications of the quotient.

use std::collections::BTreeMap;
use std::f64::consts::{FRAC_1_SQRT_2, PI, SQRT_2};

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use super::{
    apply_iso, hausdorff, map_trimesh, reflect, sides_from_tags, GluedComplex, Identification,
    Patch, ReflectionRule, SurfaceComplex, TopologySummary,
};
use crate::curvature::{
    fitted_curvature, gauss_bonnet_check, smooth_total, EdgeMetric, IntrinsicMesh, TruncationRow,
    TruncationSeries,
};
use crate::ends::{classify, BoundaryCurve, CurveSample, EndType};
use crate::graph::domains::{BoundaryDatum, DomainProblem, HypDomain, IdealPoint, Resolution};
use crate::graph::plateau::{solve_plateau, PlateauOptions};
use crate::graph::SolverOptions;
use crate::hyperbolic::{disk_to_halfplane, AmbientKind, CuspModel, Generator, Geodesic, Isometry};
use crate::mesh::TriMesh;
use crate::sweep::{default_tolerance, empirical_trapping_slab, EmpiricalSlab};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExampleParams {
    pub h: f64,
    /// Columns per ideal triangle (even) or per sector arc.
    pub resolution: usize,
    pub rows_per_doubling: usize,
    /// Normalized cusp truncation height; rounded to a power of two.
    pub y_cap: f64,
    /// Disk radius at which the rays of example 4 are cut.
    pub truncation_radius: f64,
    /// Values on `OP, PV, VQ, OQ` for example 5, in units of `h`.
    pub example5_values: [f64; 4],
    pub plateau: PlateauOptions,
    pub solver: SolverOptions,
}

impl Default for ExampleParams {
    fn default() -> Self {
        ExampleParams {
            h: 1.0,
            resolution: 32,
            rows_per_doubling: 8,
            y_cap: 32.0,
            truncation_radius: 0.8,
            example5_values: [1.0, 1.0, 0.0, 0.0],
            plateau: PlateauOptions::default(),
            solver: SolverOptions::default(),
        }
    }
}

impl ExampleParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.h > 0.0) {
            return Err(Error::input("h must be positive"));
        }
        if self.resolution < 4 || self.resolution % 2 != 0 {
            return Err(Error::input("resolution must be even and at least 4"));
        }
        if self.rows_per_doubling < 1 {
            return Err(Error::input("rows_per_doubling must be positive"));
        }
        if !(self.y_cap >= 4.0) {
            return Err(Error::input("y_cap must be at least 4"));
        }
        if !(self.truncation_radius > 0.0 && self.truncation_radius < 1.0) {
            return Err(Error::input("truncation_radius must lie in (0, 1)"));
        }
        Ok(())
    }

    fn cap_power(&self) -> i32 {
        self.y_cap.log2().round().max(2.0) as i32
    }

    fn tol(&self) -> f64 {
        1e-8 * self.h
    }
}

/// One cusp end: the pieces meeting it and the isometries carrying each into
/// a common chart where the cusp sits at infinity.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EndSpec {
    pub name: String,
    pub model: CuspModel<f64>,
    pub pieces: Vec<(usize, Isometry<f64>)>,
    pub expected: Option<EndType>,
    /// `horizontal`, `vertical` or `helicoidal`.
    pub kind: String,
    /// Chart height of the normalized level `y = 1`.
    pub y_unit: f64,
}

impl EndSpec {
    /// Pieces of the end above chart height `y_lo`, welded in the end chart.
    pub fn mesh(&self, complex: &SurfaceComplex, y_lo: f64) -> TriMesh {
        let mut out = TriMesh::default();
        for (p, iso) in &self.pieces {
            let m = map_trimesh(&complex.patches[*p].mesh, iso);
            let keep: Vec<bool> = m
                .vertices
                .iter()
                .map(|v| v[1] >= y_lo * (1.0 - 1e-9))
                .collect();
            let mut remap = vec![usize::MAX; m.vertices.len()];
            let mut part = TriMesh::default();
            for t in &m.triangles {
                if t.iter().all(|&v| keep[v]) {
                    let nt = t.map(|v| {
                        if remap[v] == usize::MAX {
                            remap[v] = part.vertices.len();
                            part.vertices.push(m.vertices[v]);
                            part.tags.push(m.tags[v]);
                        }
                        remap[v]
                    });
                    part.triangles.push(nt);
                }
            }
            out.append(&part);
        }
        out.weld(1e-9 * (1.0 + y_lo));
        out
    }

    /// The end's boundary curve at chart height `y`, one period sorted by `x`.
    pub fn curve(&self, complex: &SurfaceComplex, y: f64) -> Result<BoundaryCurve<f64>> {
        let mesh = self.mesh(complex, y);
        let mut pts: Vec<[f64; 3]> = mesh
            .vertices
            .iter()
            .filter(|v| (v[1] - y).abs() <= 1e-9 * y)
            .copied()
            .collect();
        if pts.len() < 2 {
            return Err(Error::domain(format!(
                "end {} has no mesh row at y = {y}",
                self.name
            )));
        }
        pts.sort_by(|a, b| a[0].total_cmp(&b[0]));
        let n = pts.len() - 1;
        let samples = pts
            .iter()
            .enumerate()
            .map(|(k, p)| CurveSample {
                s: k as f64 / n as f64,
                x: p[0],
                t: p[2],
            })
            .collect();
        let model = CuspModel {
            y0: y.max(1.0),
            ..self.model
        };
        BoundaryCurve::new(samples, model)
    }

    pub fn classify_at(&self, complex: &SurfaceComplex, y: f64) -> Result<EndType> {
        classify(&self.curve(complex, y)?)
    }

    /// Product-metric length of the boundary curve at chart height `y`.
    pub fn length_at(&self, complex: &SurfaceComplex, y: f64) -> Result<f64> {
        let c = self.curve(complex, y)?;
        Ok(c.samples
            .windows(2)
            .map(|w| {
                let a = (((w[1].x - w[0].x) / y).abs()).powi(2);
                (a + (w[1].t - w[0].t).powi(2)).sqrt()
            })
            .sum())
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DeckCheck {
    pub name: String,
    pub hausdorff: f64,
    /// Twice the longest product edge of the compared meshes.
    pub edge_bound: f64,
    pub tolerance: f64,
    pub passed: bool,
}

#[derive(Debug, Clone)]
pub struct ExampleBuild {
    pub id: u8,
    pub params: ExampleParams,
    pub complex: SurfaceComplex,
    pub glued: GluedComplex,
    pub topology: TopologySummary,
    pub deck_checks: Vec<DeckCheck>,
    pub ends: Vec<EndSpec>,
    pub assumptions: Vec<String>,
    pub warnings: Vec<String>,
    /// Pieces whose `row` field counts horocycle rows of their cusp.
    pub row_patches: Vec<usize>,
}

/// Expected topology of each example. Example 3 is closed but its deck
/// group contains orientation-reversing translations along the diagonals.
pub fn expected_topology(id: u8) -> Option<TopologySummary> {
    let t = |chi, genus, punctures, orientable| TopologySummary {
        genus,
        punctures,
        orientable,
        chi,
    };
    match id {
        1 => Some(t(-1, 0, 3, true)),
        2 => Some(t(-2, 0, 4, true)),
        3 => Some(t(-2, 4, 0, false)),
        4 => Some(t(-2, 0, 4, true)),
        5 => Some(t(-4, 2, 2, true)),
        _ => None,
    }
}

pub fn build_example(id: u8, params: &ExampleParams) -> Result<ExampleBuild> {
    params.validate()?;
    let parts = match id {
        1 => example1(params)?,
        2 => example2(params)?,
        3 => example3(params)?,
        4 => example4(params)?,
        5 => example5(params)?,
        _ => {
            return Err(Error::input(format!(
                "unknown example {id}; expected 1 to 5"
            )))
        }
    };
    finish(id, params, parts)
}

struct Parts {
    complex: SurfaceComplex,
    checks: Vec<(String, TriMesh, TriMesh)>,
    ends: Vec<EndSpec>,
    assumptions: Vec<String>,
    row_patches: Vec<usize>,
}

fn finish(id: u8, params: &ExampleParams, parts: Parts) -> Result<ExampleBuild> {
    let glued = parts.complex.glue()?;
    if glued.max_mismatch > 1e-6 * params.h {
        return Err(Error::numeric(format!(
            "identification mismatch {:e} exceeds 1e-6 h",
            glued.max_mismatch
        )));
    }
    let topology = glued.topology()?;
    let mut warnings = Vec::new();
    if let Some(e) = expected_topology(id) {
        if topology != e {
            return Err(Error::domain(format!(
                "example {id} glued to chi = {}, genus = {}, ends = {}, orientable = {}; expected {}, {}, {}, {}",
                topology.chi, topology.genus, topology.punctures, topology.orientable,
                e.chi, e.genus, e.punctures, e.orientable
            )));
        }
    }
    let deck_checks: Vec<DeckCheck> = parts
        .checks
        .iter()
        .map(|(name, a, b)| {
            let d = hausdorff(&a.vertices, &b.vertices);
            let edge_bound = 2.0 * a.max_edge_product().max(b.max_edge_product());
            let tolerance = 1e-6f64.min(edge_bound);
            DeckCheck {
                name: name.clone(),
                hausdorff: d,
                edge_bound,
                tolerance,
                passed: d <= tolerance,
            }
        })
        .collect();
    for c in deck_checks.iter().filter(|c| !c.passed) {
        warnings.push(format!(
            "deck check {} failed: Hausdorff distance {:e}",
            c.name, c.hausdorff
        ));
    }
    Ok(ExampleBuild {
        id,
        params: params.clone(),
        complex: parts.complex,
        glued,
        topology,
        deck_checks,
        ends: parts.ends,
        assumptions: parts.assumptions,
        warnings,
        row_patches: parts.row_patches,
    })
}

impl ExampleBuild {
    pub fn deck_invariant(&self) -> bool {
        self.deck_checks.iter().all(|c| c.passed)
    }

    /// Glued triangles below normalized cusp height `y` (all triangles when the
    /// example has no cusp rows).
    pub fn truncated(&self, y: f64) -> Vec<usize> {
        let limit = (self.params.rows_per_doubling as f64 * y.log2()).round() + 0.5;
        self.glued
            .source
            .iter()
            .enumerate()
            .filter(|(_, &(p, k))| {
                if !self.row_patches.contains(&p) {
                    return true;
                }
                let m = &self.complex.patches[p].mesh;
                match m.fields.get("row") {
                    Some(rows) => m.triangles[k].iter().all(|&v| rows[v] <= limit),
                    None => true,
                }
            })
            .map(|(i, _)| i)
            .collect()
    }

    /// Smooth and polyhedral curvature of the truncations at the given
    /// normalized heights.
    pub fn truncation_series(&self, cuts: &[f64]) -> Result<TruncationSeries> {
        let k_vertex: Vec<Vec<f64>> = self
            .complex
            .patches
            .iter()
            .map(|p| fitted_curvature(&p.mesh, &vec![false; p.mesh.vertices.len()]))
            .collect();
        let mut rows = Vec::with_capacity(cuts.len());
        for &y in cuts {
            let keep = self.truncated(y);
            let mut per_patch: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
            for &i in &keep {
                let (p, k) = self.glued.source[i];
                per_patch.entry(p).or_default().push(k);
            }
            let smooth: f64 = per_patch
                .iter()
                .map(|(&p, tris)| smooth_total(&self.complex.patches[p].mesh, &k_vertex[p], tris))
                .sum();
            let sub: IntrinsicMesh = self.glued.intrinsic.subset(&keep);
            let report = gauss_bonnet_check(&sub, EdgeMetric::Product, None, Some(y))?;
            rows.push(TruncationRow {
                y_cut: y,
                total_k: smooth,
                polyhedral_k: report.total_k,
                boundary_kg: report.boundary_terms.iter().map(|b| b.kg).sum(),
                gb_defect: report.gb_defect,
                chi_truncated: report.chi_truncated,
                loops: report.boundary_terms,
            });
        }
        TruncationSeries::new(rows)
    }

    /// JSON manifest of the complex: patches, identifications, deck generators
    /// and topology.
    pub fn manifest(&self) -> Value {
        let patches: Vec<Value> = self
            .complex
            .patches
            .iter()
            .map(|p| {
                json!({
                    "name": p.name,
                    "vertices": p.mesh.vertices.len(),
                    "triangles": p.mesh.triangles.len(),
                    "sides": p.sides.iter().map(|(k, v)| (k.clone(), v.len())).collect::<BTreeMap<_, _>>(),
                    "provenance": p.provenance,
                })
            })
            .collect();
        json!({
            "example": self.id,
            "patches": patches,
            "identifications": self.complex.identifications,
            "deck_generators": self.complex.deck.iter().map(|(n, g)| json!({"name": n, "isometry": g})).collect::<Vec<_>>(),
            "chi": self.topology.chi,
            "genus": self.topology.genus,
            "punctures": self.topology.punctures,
            "orientable": self.topology.orientable,
            "max_identification_mismatch": self.glued.max_mismatch,
            "deck_checks": self.deck_checks,
            "ends": self.ends.iter().map(|e| json!({
                "name": e.name,
                "kind": e.kind,
                "expected": e.expected,
                "tau": e.model.tau,
                "h": e.model.h,
            })).collect::<Vec<_>>(),
            "assumptions": self.assumptions,
            "warnings": self.warnings,
        })
    }

    /// Empirical trapping slab of `end` above chart height `y`, swept
    /// against the boundary envelope at `y`.
    pub fn end_slab(&self, end: &EndSpec, y: f64) -> Result<EmpiricalSlab> {
        let mesh = end.mesh(&self.complex, y);
        let curve = end.curve(&self.complex, y)?;
        let kind = classify(&curve)?;
        empirical_trapping_slab(
            &mesh,
            &curve,
            kind,
            &end.model,
            default_tolerance(self.params.h),
        )
    }

    /// All pieces welded into one chart mesh (with duplicated glued vertices).
    pub fn combined_mesh(&self) -> TriMesh {
        let mut out = TriMesh::default();
        for p in &self.complex.patches {
            let mut m = p.mesh.clone();
            m.fields.clear();
            out.append(&m);
        }
        out
    }
}

fn iso(gens: &[Generator<f64>]) -> Isometry<f64> {
    Isometry {
        generators: gens.to_vec(),
    }
}

fn gr(g: Geodesic<f64>) -> Generator<f64> {
    Generator::GeodesicReflection(g)
}

fn ht(p: (f64, f64)) -> Generator<f64> {
    Generator::HalfTurn { x: p.0, y: p.1 }
}

fn vt(h: f64) -> Generator<f64> {
    Generator::VerticalTranslate(h)
}

fn rule(geodesic: Geodesic<f64>, height: f64) -> ReflectionRule {
    ReflectionRule::AcrossGeodesicAtHeight { geodesic, height }
}

fn ident(
    from: (usize, &str),
    to: (usize, &str),
    iso: Isometry<f64>,
    label: &str,
) -> Identification {
    Identification {
        from: (from.0, from.1.into()),
        to: (to.0, to.1.into()),
        iso,
        label: label.into(),
    }
}

fn keep_name(s: &str) -> String {
    s.to_string()
}

fn prefixed(prefix: &'static str) -> impl Fn(&str) -> String {
    move |s| format!("{prefix}{s}")
}

/// Graph over the ideal triangle `(∞, 0, −1)` with values on `a` (the
/// semicircle), `b` (`x = −1`) and `c` (`x = 0`).
fn triangle_patch(params: &ExampleParams, values: [f64; 3]) -> Result<Patch> {
    let problem = DomainProblem {
        domain: HypDomain::IdealTriangle {
            vertices: [
                IdealPoint::Infinity,
                IdealPoint::Finite(0.0),
                IdealPoint::Finite(-1.0),
            ],
        },
        data: values.iter().map(|&v| BoundaryDatum::Finite(v)).collect(),
        lambda_trunc: None,
        resolution: Resolution {
            n: params.resolution,
            m: params.rows_per_doubling,
        },
        y_cap: 2f64.powi(params.cap_power()),
    };
    let sol = problem.solve(&params.solver)?;
    let mut p = Patch::new("D", sol.mesh);
    p.sides = sides_from_tags(&p.mesh, &[(0, "a"), (1, "b"), (2, "c")]);
    p.provenance.push(format!(
        "graph over ideal triangle (inf, 0, -1) with data a = {}, b = {}, c = {}",
        values[0], values[1], values[2]
    ));
    Ok(p)
}

fn geodesic_a() -> Geodesic<f64> {
    Geodesic::Semicircle { a: -1.0, b: 0.0 }
}

fn line(x: f64) -> Geodesic<f64> {
    Geodesic::VerticalLine { x }
}

fn semi(a: f64, b: f64) -> Geodesic<f64> {
    Geodesic::Semicircle { a, b }
}

fn end(
    name: &str,
    tau: f64,
    h: f64,
    pieces: Vec<(usize, Isometry<f64>)>,
    expected: Option<EndType>,
    kind: &str,
) -> EndSpec {
    EndSpec {
        name: name.into(),
        model: CuspModel {
            tau,
            h,
            y0: 1.0,
            ambient: AmbientKind::ProductCusp,
        },
        pieces,
        expected,
        kind: kind.into(),
        y_unit: 1.0,
    }
}

fn example1(params: &ExampleParams) -> Result<Parts> {
    let h = params.h;
    let tol = params.tol();
    let d0 = triangle_patch(params, [h, 0.0, 0.0])?;
    let rc = rule(line(0.0), 0.0);
    let d1 = d0.reflected("Rc(D)", &rc, "rotate about c x {0}", "Rc.", tol)?;
    let g_a = iso(&[
        gr(geodesic_a()),
        Generator::VerticalReflection(h),
        gr(line(0.0)),
        Generator::VerticalReflection(0.0),
    ]);
    let identifications = vec![
        ident((0, "c"), (1, "c"), Isometry::identity(), "c"),
        ident(
            (0, "b"),
            (1, "Rc.b"),
            iso(&[Generator::Parabolic(2.0)]),
            "b ~ Rc(b)",
        ),
        ident((0, "a"), (1, "Rc.a"), g_a.clone(), "a ~ Rc(a)"),
    ];
    let checks = vec![
        (
            "Rc Rb".to_string(),
            map_trimesh(&d0.mesh, &iso(&[Generator::Parabolic(2.0)])),
            reflect(&d1.mesh, &rule(line(1.0), 0.0), tol)?,
        ),
        (
            "Rc Ra".to_string(),
            map_trimesh(&d0.mesh, &g_a),
            reflect(&d1.mesh, &rule(semi(0.0, 1.0), -h), tol)?,
        ),
    ];
    let half = ht((0.0, 1.0));
    let ends = vec![
        end(
            "inf",
            2.0,
            2.0 * h,
            vec![(0, Isometry::identity()), (1, Isometry::identity())],
            Some(EndType { p: 1, q: 0 }),
            "horizontal",
        ),
        end(
            "0",
            2.0,
            2.0 * h,
            vec![(0, iso(&[half])), (1, iso(&[half]))],
            Some(EndType { p: 1, q: 1 }),
            "helicoidal",
        ),
        end(
            "pm1",
            2.0,
            2.0 * h,
            vec![
                (0, iso(&[Generator::Parabolic(1.0), half])),
                (1, iso(&[Generator::Parabolic(-1.0), half])),
            ],
            Some(EndType { p: 1, q: -1 }),
            "helicoidal",
        ),
    ];
    let complex = SurfaceComplex {
        patches: vec![d0, d1],
        identifications,
        deck: vec![
            ("Rc Rb".into(), iso(&[Generator::Parabolic(2.0)])),
            ("Rc Ra".into(), g_a),
        ],
        tol,
    };
    Ok(Parts {
        complex,
        checks,
        ends,
        assumptions: Vec::new(),
        row_patches: vec![0, 1],
    })
}

fn example2(params: &ExampleParams) -> Result<Parts> {
    let h = params.h;
    let tol = params.tol();
    let d0 = triangle_patch(params, [h, 0.0, 0.0])?;
    let ra = rule(geodesic_a(), h);
    let rc = rule(line(0.0), 0.0);
    let d1 = d0.reflected("Ra(D)", &ra, "rotate about a x {h}", "Ra.", tol)?;
    let d2 = d0.reflected("Rc(D)", &rc, "rotate about c x {0}", "Rc.", tol)?;
    let d3 = d1.image(
        "RcRa(D)",
        &rc.isometry(),
        true,
        "image under the rotation about c x {0}",
        prefixed("Rc."),
    );
    let rab = semi(-1.0, -0.5);
    let rac = semi(-0.5, 0.0);
    let g_b = iso(&[
        gr(rab),
        Generator::VerticalReflection(2.0 * h),
        gr(line(0.0)),
        Generator::VerticalReflection(0.0),
    ]);
    let g_c = iso(&[
        gr(rac),
        Generator::VerticalReflection(2.0 * h),
        gr(line(0.0)),
        Generator::VerticalReflection(0.0),
    ]);
    let par2 = iso(&[Generator::Parabolic(2.0)]);
    let identifications = vec![
        ident((0, "a"), (1, "a"), Isometry::identity(), "a"),
        ident((0, "c"), (2, "c"), Isometry::identity(), "c"),
        ident((2, "Rc.a"), (3, "Rc.a"), Isometry::identity(), "Rc(a)"),
        ident((0, "b"), (2, "Rc.b"), par2.clone(), "b ~ Rc(b)"),
        ident((1, "Ra.b"), (3, "Rc.Ra.b"), g_b.clone(), "Ra(b) ~ RcRa(b)"),
        ident((1, "Ra.c"), (3, "Rc.Ra.c"), g_c.clone(), "Ra(c) ~ RcRa(c)"),
    ];
    let checks = vec![
        (
            "Rc Rb".to_string(),
            map_trimesh(&d0.mesh, &par2),
            reflect(&d2.mesh, &rule(line(1.0), 0.0), tol)?,
        ),
        (
            "Rc R_Ra(b)".to_string(),
            map_trimesh(&d1.mesh, &g_b),
            reflect(&d3.mesh, &rule(semi(0.5, 1.0), -2.0 * h), tol)?,
        ),
        (
            "Rc R_Ra(c)".to_string(),
            map_trimesh(&d1.mesh, &g_c),
            reflect(&d3.mesh, &rule(semi(0.0, 0.5), -2.0 * h), tol)?,
        ),
    ];
    let half = ht((0.0, 1.0));
    let hm = 4.0 * h;
    let mut ends = vec![
        end(
            "inf",
            2.0,
            hm,
            vec![(0, Isometry::identity()), (2, Isometry::identity())],
            Some(EndType { p: 1, q: 0 }),
            "horizontal",
        ),
        end(
            "0",
            4.0,
            hm,
            (0..4).map(|p| (p, iso(&[half]))).collect(),
            Some(EndType { p: 1, q: 1 }),
            "helicoidal",
        ),
        end(
            "pm1",
            4.0,
            hm,
            vec![
                (0, iso(&[Generator::Parabolic(1.0), half])),
                (1, iso(&[Generator::Parabolic(1.0), half])),
                (2, iso(&[Generator::Parabolic(-1.0), half])),
                (3, iso(&[Generator::Parabolic(-1.0), half])),
            ],
            Some(EndType { p: 1, q: -1 }),
            "helicoidal",
        ),
    ];
    let back = g_c.inverse().then(gr(geodesic_a()));
    ends.push(end(
        "pm1/2",
        2.0,
        hm,
        vec![(1, iso(&[gr(geodesic_a())])), (3, back)],
        Some(EndType { p: 1, q: 0 }),
        "horizontal",
    ));
    let complex = SurfaceComplex {
        patches: vec![d0, d1, d2, d3],
        identifications,
        deck: vec![
            ("Rc Rb".into(), par2),
            ("Rc R_Ra(b)".into(), g_b),
            ("Rc R_Ra(c)".into(), g_c),
            ("T(4h)".into(), iso(&[vt(hm)])),
        ],
        tol,
    };
    Ok(Parts {
        complex,
        checks,
        ends,
        assumptions: Vec::new(),
        row_patches: vec![0, 1, 2, 3],
    })
}

fn chart(w: (f64, f64)) -> Result<(f64, f64)> {
    disk_to_halfplane(w)
}

fn hexagon_patch(
    params: &ExampleParams,
    o: (f64, f64),
    a: (f64, f64),
    b: (f64, f64),
    name: &str,
) -> Result<Patch> {
    let h = params.h;
    let corners = [
        [o.0, o.1, 0.0],
        [a.0, a.1, 0.0],
        [a.0, a.1, h],
        [o.0, o.1, h],
        [b.0, b.1, h],
        [b.0, b.1, 0.0],
    ];
    let res = solve_plateau(&corners, None, &params.plateau).map_err(|e| {
        Error::numeric(format!(
            "partial build: least-area piece {name} failed: {e}"
        ))
    })?;
    let mut p = Patch::new(name, res.mesh);
    for (i, s) in res.sides.into_iter().enumerate() {
        p.sides.insert(format!("s{i}"), s);
    }
    p.provenance.push(format!(
        "least-area disk spanning the hexagon over ({:.6}, {:.6}), ({:.6}, {:.6}), ({:.6}, {:.6}); area {:.9}, residual {:.3e}",
        o.0, o.1, a.0, a.1, b.0, b.1, res.area, res.residual
    ));
    Ok(p)
}

fn example3(params: &ExampleParams) -> Result<Parts> {
    let h = params.h;
    let tol = params.tol();
    let m = 1.0 - FRAC_1_SQRT_2;
    let o = chart((0.0, 0.0))?;
    let m1 = chart((m, m))?;
    let m4 = chart((m, -m))?;
    let p0 = hexagon_patch(params, o, m1, m4, "D")?;
    let alpha = Geodesic::through_points(o, m1)?;
    let beta = Geodesic::through_points(o, m4)?;
    let h_o = iso(&[ht(o)]);
    let m2 = apply_iso(&h_o, [m4.0, m4.1, 0.0]);
    let m2 = (m2[0], m2[1]);
    let p1 = p0.image(
        "H_alpha(D)",
        &rule(alpha, 0.0).isometry(),
        true,
        "rotate about alpha x {0}",
        keep_name,
    );
    let p2 = p0.image(
        "H_O(D)",
        &h_o,
        false,
        "rotate about the vertical axis over O",
        keep_name,
    );
    let p3 = p0.image(
        "H_beta(D)",
        &rule(beta, 0.0).isometry(),
        true,
        "rotate about beta x {0}",
        keep_name,
    );
    let t = |s: f64| iso(&[vt(s)]);
    let id = Isometry::identity;
    let tau1 = iso(&[ht(m1), ht(o)]);
    let tau2 = iso(&[ht(m4), ht(o)]);
    let identifications = vec![
        ident((0, "s0"), (1, "s0"), id(), "alpha x 0"),
        ident((0, "s5"), (3, "s5"), id(), "beta x 0"),
        ident((1, "s5"), (2, "s5"), id(), "H_O(beta) x 0"),
        ident((2, "s0"), (3, "s0"), id(), "H_O(alpha) x 0"),
        ident((0, "s2"), (1, "s2"), t(-2.0 * h), "alpha x h ~ alpha x -h"),
        ident((0, "s3"), (3, "s3"), t(-2.0 * h), "beta x h ~ beta x -h"),
        ident((1, "s3"), (2, "s3"), t(2.0 * h), "H_O(beta) x -h ~ x h"),
        ident((2, "s2"), (3, "s2"), t(-2.0 * h), "H_O(alpha) x h ~ x -h"),
        ident((0, "s1"), (2, "s1"), tau1.clone(), "M1 ~ M3"),
        ident((1, "s1"), (3, "s1"), tau1.clone(), "M1 ~ M3 below"),
        ident((0, "s4"), (2, "s4"), tau2.clone(), "M4 ~ M2"),
        ident((1, "s4"), (3, "s4"), iso(&[ht(m2), ht(o)]), "M2 ~ M4 below"),
    ];
    let checks = vec![
        (
            "tau_1".to_string(),
            map_trimesh(&p2.mesh, &tau1.inverse()),
            reflect(
                &p0.mesh,
                &ReflectionRule::AboutVerticalAxis {
                    x: m1.0,
                    y: m1.1,
                    t_min: 0.0,
                    t_max: h,
                },
                1e-6,
            )?,
        ),
        (
            "tau_2".to_string(),
            map_trimesh(&p2.mesh, &tau2.inverse()),
            reflect(
                &p0.mesh,
                &ReflectionRule::AboutVerticalAxis {
                    x: m4.0,
                    y: m4.1,
                    t_min: 0.0,
                    t_max: h,
                },
                1e-6,
            )?,
        ),
        (
            "T(2h)".to_string(),
            map_trimesh(&p1.mesh, &t(2.0 * h)),
            reflect(&p0.mesh, &rule(alpha, h), 1e-6)?,
        ),
    ];
    let complex = SurfaceComplex {
        patches: vec![p0, p1, p2, p3],
        identifications,
        deck: vec![
            ("T(2h)".into(), t(2.0 * h)),
            ("tau_1".into(), tau1.inverse()),
            ("tau_2".into(), tau2.inverse()),
        ],
        tol,
    };
    let assumptions = vec![
        "quotient taken by T(2h) and the half-turn compositions through the side midpoints".into(),
    ];
    Ok(Parts {
        complex,
        checks,
        ends: Vec::new(),
        assumptions,
        row_patches: Vec::new(),
    })
}

fn example4(params: &ExampleParams) -> Result<Parts> {
    let h = params.h;
    let tol = params.tol();
    let r = params.truncation_radius;
    let o = chart((0.0, 0.0))?;
    let a = chart((r, 0.0))?;
    let b = chart((0.0, r))?;
    let p0 = hexagon_patch(params, o, a, b, "D")?;
    let gx = Geodesic::through_points(o, a)?;
    let gy = Geodesic::through_points(o, b)?;
    let h_o = iso(&[ht(o)]);
    let p1 = p0.image(
        "H_x(D)",
        &rule(gx, 0.0).isometry(),
        true,
        "rotate about the x-axis geodesic x {0}",
        keep_name,
    );
    let p2 = p0.image(
        "H_O(D)",
        &h_o,
        false,
        "rotate about the vertical axis over O",
        keep_name,
    );
    let p3 = p0.image(
        "H_y(D)",
        &rule(gy, 0.0).isometry(),
        true,
        "rotate about the y-axis geodesic x {0}",
        keep_name,
    );
    let t = |s: f64| iso(&[vt(s)]);
    let id = Isometry::identity;
    let identifications = vec![
        ident((0, "s0"), (1, "s0"), id(), "x-ray x 0"),
        ident((0, "s2"), (1, "s2"), t(-2.0 * h), "x-ray x h ~ x -h"),
        ident((0, "s5"), (3, "s5"), id(), "y-ray x 0"),
        ident((0, "s3"), (3, "s3"), t(-2.0 * h), "y-ray x h ~ x -h"),
        ident((1, "s5"), (2, "s5"), id(), "negative y-ray x 0"),
        ident(
            (1, "s3"),
            (2, "s3"),
            t(2.0 * h),
            "negative y-ray x -h ~ x h",
        ),
        ident((2, "s0"), (3, "s0"), id(), "negative x-ray x 0"),
        ident(
            (2, "s2"),
            (3, "s2"),
            t(-2.0 * h),
            "negative x-ray x h ~ x -h",
        ),
    ];
    let checks = vec![(
        "T(2h)".to_string(),
        map_trimesh(&p1.mesh, &t(2.0 * h)),
        reflect(&p0.mesh, &rule(gx, h), 1e-6)?,
    )];
    let complex = SurfaceComplex {
        patches: vec![p0, p1, p2, p3],
        identifications,
        deck: vec![("T(2h)".into(), t(2.0 * h))],
        tol,
    };
    let assumptions = vec![format!("vertical ends truncated at disk radius {r}")];
    Ok(Parts {
        complex,
        checks,
        ends: Vec::new(),
        assumptions,
        row_patches: Vec::new(),
    })
}

/// Split the boundary vertex `v` of a graph patch into a vertical column over
/// its projection, one column vertex per incident fan edge. Returns the column
/// from the first to the last boundary neighbour.
fn split_fan(mesh: &mut TriMesh, v: usize) -> Result<Vec<usize>> {
    let mut fan: Vec<(usize, usize, usize)> = Vec::new();
    for (k, t) in mesh.triangles.iter().enumerate() {
        if let Some(i) = t.iter().position(|&w| w == v) {
            fan.push((k, t[(i + 1) % 3], t[(i + 2) % 3]));
        }
    }
    let start = fan
        .iter()
        .find(|(_, a, _)| !fan.iter().any(|(_, _, b)| b == a))
        .ok_or_else(|| Error::domain("fan vertex is not on the boundary"))?
        .1;
    let mut chain = vec![start];
    let mut order = Vec::new();
    while let Some(&(k, _, b)) = fan.iter().find(|(_, a, _)| *a == *chain.last().unwrap()) {
        order.push(k);
        chain.push(b);
        if order.len() > fan.len() {
            return Err(Error::domain("fan around the split vertex is not a chain"));
        }
    }
    if order.len() != fan.len() {
        return Err(Error::domain("fan around the split vertex is disconnected"));
    }
    let base = mesh.vertices[v];
    let mut column = vec![v];
    mesh.vertices[v][2] = mesh.vertices[chain[0]][2];
    for &a in &chain[1..] {
        column.push(mesh.vertices.len());
        mesh.vertices.push([base[0], base[1], mesh.vertices[a][2]]);
        mesh.tags.push(mesh.tags[v]);
        for f in mesh.fields.values_mut() {
            let val = f[v];
            f.push(val);
        }
    }
    for (i, &k) in order.iter().enumerate() {
        mesh.triangles[k] = [column[i], chain[i], chain[i + 1]];
        mesh.triangles
            .push([column[i], chain[i + 1], column[i + 1]]);
    }
    let mut flag = vec![0.0; mesh.vertices.len()];
    for &c in &column {
        flag[c] = 1.0;
    }
    mesh.fields.insert("column".into(), flag);
    Ok(column)
}

fn example5(params: &ExampleParams) -> Result<Parts> {
    let h = params.h;
    let tol = params.tol();
    let th = -3.0 * PI / 4.0;
    let rot = |w: (f64, f64)| {
        (
            w.0 * th.cos() - w.1 * th.sin(),
            w.0 * th.sin() + w.1 * th.cos(),
        )
    };
    let c5 = |w: (f64, f64)| chart(rot(w));
    let m = SQRT_2 - 1.0;
    let o = c5((0.0, 0.0))?;
    let p = c5((-m, 0.0))?;
    let q = c5((0.0, -m))?;
    let mp = c5((m, 0.0))?;
    let mq = c5((0.0, m))?;
    let [v_op, v_pv, v_vq, v_oq] = params.example5_values.map(|v| v * h);
    // arcs: left vertical, first bottom, second bottom, right vertical
    let p_left = p.0 < q.0;
    let (corners, names, values) = if p_left {
        (
            [p, o, q],
            ["PV", "OP", "OQ", "QV"],
            [v_pv, v_op, v_oq, v_vq],
        )
    } else {
        (
            [q, o, p],
            ["QV", "OQ", "OP", "PV"],
            [v_vq, v_oq, v_op, v_pv],
        )
    };
    let y_top = corners.iter().map(|c| c.1).fold(0.0, f64::max);
    let problem = DomainProblem {
        domain: HypDomain::CuspSector {
            corners: corners.iter().map(|c| [c.0, c.1]).collect(),
        },
        data: values.iter().map(|&v| BoundaryDatum::Finite(v)).collect(),
        lambda_trunc: None,
        resolution: Resolution {
            n: params.resolution / 2,
            m: params.rows_per_doubling,
        },
        y_cap: y_top * 2f64.powi(params.cap_power()),
    };
    let sol = problem.solve(&params.solver)?;
    let mut mesh = sol.mesh;
    let cols = params.resolution + 1;
    let nv = mesh.vertices.len();
    mesh.fields
        .insert("row".into(), (0..nv).map(|k| (k / cols) as f64).collect());
    let v = params.resolution / 2;
    if (mesh.vertices[v][0] - o.0).abs() + (mesh.vertices[v][1] - o.1).abs() > 1e-9 {
        return Err(Error::domain(
            "sector mesh does not place a vertex at the center",
        ));
    }
    let mut sides = sides_from_tags(
        &mesh,
        &[(0, names[0]), (1, names[1]), (2, names[2]), (3, names[3])],
    );
    let column = split_fan(&mut mesh, v)?;
    let (first, last) = (column[0], *column.last().unwrap());
    let arc_of = |w: usize| {
        if mesh.tags[w] == 2 {
            names[1]
        } else {
            names[2]
        }
    };
    let first_nb = mesh
        .triangles
        .iter()
        .find(|t| t[0] == first)
        .map(|t| t[1])
        .unwrap();
    let last_nb = mesh
        .triangles
        .iter()
        .rev()
        .find(|t| t[2] == last)
        .map(|t| t[1])
        .unwrap();
    let (arc_first, arc_last) = (arc_of(first_nb), arc_of(last_nb));
    if arc_first == arc_last {
        return Err(Error::domain(
            "center fan does not connect the two bottom arcs",
        ));
    }
    for name in [names[1], names[2]] {
        let s = sides.get_mut(name).unwrap();
        s.retain(|&w| w != v);
        if name == arc_first {
            s.push(first);
        }
        if name == arc_last {
            s.push(last);
        }
    }
    sides.insert("O".into(), column);
    let mut s1 = Patch::new("S1", mesh);
    s1.sides = sides;
    s1.provenance.push(format!(
        "graph over the quarter of the ideal square with data OP = {v_op}, PV = {v_pv}, VQ = {v_vq}, OQ = {v_oq}, split into a vertical segment over O"
    ));
    let h_o = iso(&[ht(o)]);
    let gx = Geodesic::through_points(o, p)?;
    let s2 = s1.image(
        "S2",
        &h_o,
        true,
        "rotate about the vertical axis over O",
        keep_name,
    );
    let s3 = s1.image(
        "S3",
        &rule(gx, h).isometry(),
        true,
        "rotate about the x-axis geodesic x {h}",
        keep_name,
    );
    let s4 = s3.image(
        "S4",
        &h_o,
        true,
        "rotate about the vertical axis over O",
        keep_name,
    );
    let up = iso(&[vt(2.0 * h)]);
    let lower = [s1, s2, s3, s4];
    let upper: Vec<Patch> = lower
        .iter()
        .enumerate()
        .map(|(i, s)| {
            s.image(
                &format!("S{}", i + 5),
                &up,
                false,
                "translate by T(2h)",
                keep_name,
            )
        })
        .collect();
    let mut patches: Vec<Patch> = lower.into_iter().collect();
    patches.extend(upper);
    let id = Isometry::identity;
    let t = |s: f64| iso(&[vt(s)]);
    let tx = iso(&[ht(o), ht(mp)]);
    let ty_up = iso(&[ht(o), ht(mq), vt(2.0 * h)]);
    let ty_down = iso(&[ht(o), ht(mq), vt(-2.0 * h)]);
    let mut identifications = Vec::new();
    for (a, b) in [(0, 2), (4, 6), (1, 3), (5, 7)] {
        identifications.push(ident((a, "OP"), (b, "OP"), id(), "OP"));
    }
    identifications.push(ident((1, "OQ"), (6, "OQ"), t(4.0 * h), "OQ ~ T(4h) OQ"));
    identifications.push(ident((2, "OQ"), (5, "OQ"), id(), "OQ"));
    identifications.push(ident((0, "OQ"), (7, "OQ"), t(4.0 * h), "OQ ~ T(4h) OQ"));
    identifications.push(ident((3, "OQ"), (4, "OQ"), id(), "OQ"));
    for (a, b) in [(0, 1), (2, 3), (4, 5), (6, 7)] {
        identifications.push(ident((a, "O"), (b, "O"), id(), "O"));
    }
    let tx_up = tx.compose(&t(2.0 * h));
    let tx_down = tx.compose(&t(-2.0 * h));
    for (a, b) in [(0, 7), (2, 5)] {
        identifications.push(ident(
            (a, "PV"),
            (b, "PV"),
            tx_up.clone(),
            "PV ~ tx T(2h) PV",
        ));
    }
    for (a, b) in [(4, 3), (6, 1)] {
        identifications.push(ident(
            (a, "PV"),
            (b, "PV"),
            tx_down.clone(),
            "PV ~ tx T(-2h) PV",
        ));
    }
    for (a, b) in [(0, 2), (4, 6)] {
        identifications.push(ident(
            (a, "QV"),
            (b, "QV"),
            ty_up.clone(),
            "QV ~ ty T(2h) QV",
        ));
    }
    for (a, b) in [(3, 1), (7, 5)] {
        identifications.push(ident(
            (a, "QV"),
            (b, "QV"),
            ty_down.clone(),
            "QV ~ ty T(-2h) QV",
        ));
    }
    let image_line = |g: &Isometry<f64>, x: f64, y: f64| -> Result<Geodesic<f64>> {
        let a = apply_iso(g, [x, y, 0.0]);
        let b = apply_iso(g, [x, 2.0 * y, 0.0]);
        Geodesic::through_points((a[0], a[1]), (b[0], b[1]))
    };
    let right = image_line(&h_o, p.0, p.1)?;
    let top = image_line(&h_o, q.0, q.1)?;
    let checks = vec![
        (
            "tx".to_string(),
            map_trimesh(&patches[2].mesh, &tx),
            reflect(&patches[1].mesh, &rule(right, h), 1e-6)?,
        ),
        (
            "ty T(2h)".to_string(),
            map_trimesh(&patches[0].mesh, &ty_up),
            reflect(&patches[2].mesh, &rule(top, 2.0 * h), 1e-6)?,
        ),
    ];
    let g_inv = ty_up.inverse();
    let chains = [
        (
            "V lower",
            vec![
                (0usize, Isometry::identity()),
                (2, g_inv.clone()),
                (5, tx_up.inverse().compose(&g_inv)),
                (7, ty_down.compose(&tx_up.inverse()).compose(&g_inv)),
            ],
        ),
        (
            "V upper",
            vec![
                (4usize, Isometry::identity()),
                (6, g_inv.clone()),
                (1, tx_down.inverse().compose(&g_inv)),
                (3, ty_down.compose(&tx_down.inverse()).compose(&g_inv)),
            ],
        ),
    ];
    let mut ends = Vec::new();
    for (name, chain) in chains {
        let (lo, hi) = chain
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |acc, (pi, g)| {
                patches[*pi]
                    .mesh
                    .vertices
                    .iter()
                    .map(|v| apply_iso(g, *v))
                    .filter(|w| w[1] > 2.0 * y_top)
                    .fold(acc, |(lo, hi), w| (lo.min(w[0]), hi.max(w[0])))
            });
        let mut e = end(name, hi - lo, 4.0 * h, chain, None, "helicoidal");
        e.y_unit = y_top;
        ends.push(e);
    }
    let complex = SurfaceComplex {
        patches,
        identifications,
        deck: vec![
            ("tx T(2h)".into(), tx_up),
            ("ty T(2h)".into(), ty_up),
            ("T(4h)".into(), t(4.0 * h)),
        ],
        tol,
    };
    let assumptions = vec![format!(
        "boundary values OP = {v_op}, PV = {v_pv}, VQ = {v_vq}, OQ = {v_oq} (build parameter example5_values)"
    )];
    Ok(Parts {
        complex,
        checks,
        ends,
        assumptions,
        row_patches: (0..8).collect(),
    })
}

/// Topology of the `T(2h)` quotient of example 5, glued from the four lower
/// pieces of an example-5 build; reported only, never exported as a mesh.
pub fn example5_half_quotient(build: &ExampleBuild) -> Result<TopologySummary> {
    if build.id != 5 {
        return Err(Error::input(
            "the T(2h) quotient is defined for example 5 only",
        ));
    }
    let h = build.params.h;
    let c = &build.complex;
    let find = |label: &str, from: usize| {
        c.identifications
            .iter()
            .find(|i| i.label.starts_with(label) && i.from.0 == from)
            .map(|i| i.iso.clone())
            .ok_or_else(|| {
                Error::domain(format!(
                    "example 5 lacks identification {label} from {from}"
                ))
            })
    };
    let shift = |g: Isometry<f64>, s: f64| g.compose(&iso(&[vt(s)]));
    let id = Isometry::identity;
    let identifications = vec![
        ident((0, "OP"), (2, "OP"), id(), "OP"),
        ident((1, "OP"), (3, "OP"), id(), "OP"),
        ident((0, "O"), (1, "O"), id(), "O"),
        ident((2, "O"), (3, "O"), id(), "O"),
        ident((1, "OQ"), (2, "OQ"), iso(&[vt(2.0 * h)]), "OQ ~ T(2h) OQ"),
        ident((0, "OQ"), (3, "OQ"), iso(&[vt(2.0 * h)]), "OQ ~ T(2h) OQ"),
        ident(
            (0, "PV"),
            (3, "PV"),
            shift(find("PV", 0)?, -2.0 * h),
            "PV ~ tx PV",
        ),
        ident(
            (2, "PV"),
            (1, "PV"),
            shift(find("PV", 2)?, -2.0 * h),
            "PV ~ tx PV",
        ),
        ident((0, "QV"), (2, "QV"), find("QV", 0)?, "QV ~ ty T(2h) QV"),
        ident((3, "QV"), (1, "QV"), find("QV", 3)?, "QV ~ ty T(-2h) QV"),
    ];
    let half = SurfaceComplex {
        patches: c.patches[..4].to_vec(),
        identifications,
        deck: Vec::new(),
        tol: c.tol,
    };
    half.glue()?.topology()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> ExampleParams {
        ExampleParams {
            resolution: 8,
            rows_per_doubling: 3,
            y_cap: 16.0,
            ..Default::default()
        }
    }

    #[test]
    fn example1_topology_and_deck() {
        let b = build_example(1, &small()).unwrap();
        assert_eq!(
            (b.topology.chi, b.topology.genus, b.topology.punctures),
            (-1, 0, 3)
        );
        assert!(b.deck_invariant(), "{:?}", b.deck_checks);
        for e in &b.ends {
            assert_eq!(
                Some(e.classify_at(&b.complex, 4.0).unwrap()),
                e.expected,
                "end {}",
                e.name
            );
        }
    }

    #[test]
    fn example2_topology_and_ends() {
        let b = build_example(2, &small()).unwrap();
        assert_eq!((b.topology.chi, b.topology.punctures), (-2, 4));
        assert!(b.deck_invariant(), "{:?}", b.deck_checks);
        for e in &b.ends {
            assert_eq!(
                Some(e.classify_at(&b.complex, 4.0).unwrap()),
                e.expected,
                "end {}",
                e.name
            );
        }
    }

    #[test]
    fn example5_topology_and_ends() {
        let b = build_example(5, &small()).unwrap();
        assert_eq!(
            (b.topology.chi, b.topology.genus, b.topology.punctures),
            (-4, 2, 2)
        );
        assert!(b.deck_invariant(), "{:?}", b.deck_checks);
        for e in &b.ends {
            let y = 4.0 * e.y_unit;
            let k = e.classify_at(&b.complex, y).unwrap();
            assert!(k.p != 0 && k.q != 0, "end {} classified {k:?}", e.name);
        }
        let half = example5_half_quotient(&b).unwrap();
        assert_eq!((half.chi, half.orientable, half.punctures), (-2, false, 1));
    }

    #[test]
    fn example3_is_closed() {
        let b = build_example(3, &small()).unwrap();
        assert_eq!(b.topology, expected_topology(3).unwrap());
        assert!(b.deck_invariant(), "{:?}", b.deck_checks);
    }

    #[test]
    fn example4_has_four_ends() {
        let b = build_example(4, &small()).unwrap();
        assert_eq!(b.topology, expected_topology(4).unwrap());
        assert!(b.deck_invariant(), "{:?}", b.deck_checks);
    }

    #[test]
    fn example1_end_slabs_agree() {
        let b = build_example(1, &ExampleParams::default()).unwrap();
        for e in &b.ends {
            let s = b.end_slab(e, 4.0).unwrap();
            assert!(s.agrees, "end {}: {s:?}", e.name);
        }
    }

    #[test]
    fn unknown_example_is_rejected() {
        assert!(build_example(6, &small()).is_err());
    }
}
