use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use hypermin::barrier::{barrier_mesh, default_step, integrate_alpha, BarrierParams};
use hypermin::curvature::{horoball_heights, mesh_truncation_series, obstruction_check};
use hypermin::ends::{classify, classify_with_tolerance, BoundaryCurve, CurveSample, EndType};
use hypermin::graph::plateau::solve_plateau;
use hypermin::graph::{solve, GraphProblem};
use hypermin::hyperbolic::{AmbientKind, CuspModel};
use hypermin::mesh::TriMesh;
use hypermin::reflection::{build_example, example5_half_quotient};
use hypermin::sweep::{default_tolerance, empirical_trapping_slab, hemisphere_sweep, IdealLine};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Deserialize;
use serde_json::{json, Value};

use crate::config::{cusp, positive, RunConfig, TrapMode};
use crate::envelope::to_sorted_json;
use crate::CliError;

pub struct Outcome {
    pub payload: Value,
    pub warnings: Vec<String>,
    pub files: Vec<String>,
}

struct Artifacts {
    dir: PathBuf,
    files: Vec<String>,
}

impl Artifacts {
    fn new(dir: &Path) -> Result<Self, CliError> {
        std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
        Ok(Artifacts {
            dir: dir.to_path_buf(),
            files: Vec::new(),
        })
    }

    fn write(&mut self, name: &str, contents: &str) -> Result<(), CliError> {
        let path = self.dir.join(name);
        std::fs::write(&path, contents).map_err(|e| CliError::io(&path, e))?;
        self.files.push(name.to_string());
        Ok(())
    }

    fn finish(self, payload: Value, warnings: Vec<String>) -> Outcome {
        Outcome {
            payload,
            warnings,
            files: self.files,
        }
    }
}

pub fn run(name: &str, cfg: &RunConfig) -> Result<Outcome, CliError> {
    match name {
        "barrier" => barrier(cfg),
        "solve" => solve_graph(cfg),
        "plateau" => plateau(cfg),
        "example" => example(cfg),
        "classify" => classify_curve(cfg),
        "trap" => trap(cfg),
        "verify" => verify(cfg),
        "report" => report(cfg),
        other => Err(CliError::config(format!("unknown command {other}"))),
    }
}

fn model(cfg: &RunConfig) -> Result<CuspModel<f64>, CliError> {
    let m = &cfg.model;
    Ok(CuspModel::new(m.tau, m.h, m.y0, m.ambient)?)
}

fn read_text(path: &Path, what: &str) -> Result<String, CliError> {
    if path.as_os_str().is_empty() {
        return Err(CliError::config(format!("no {what} file given")));
    }
    std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))
}

fn read_mesh(path: &Path) -> Result<TriMesh, CliError> {
    Ok(TriMesh::read_obj(&read_text(path, "mesh")?)?)
}

fn barrier(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let b = &cfg.barrier;
    if b.lambda.is_empty() || b.t_const.is_empty() {
        return Err(CliError::config(
            "barrier grid needs at least one lambda and one T",
        ));
    }
    let mut out = Artifacts::new(&cfg.out)?;
    let mut points = Vec::new();
    for &lambda in &b.lambda {
        for &t in &b.t_const {
            let params = BarrierParams::new(lambda, t);
            params.validate()?;
            let step = if b.step > 0.0 {
                b.step
            } else {
                default_step(&params)
            };
            let curve = integrate_alpha(params, step)?;
            let patch = barrier_mesh(&curve, (b.u_range[0], b.u_range[1]), b.nu, b.nv)?;
            let stem = format!("barrier_l{lambda}_T{t}");
            let mut csv = String::from("v,alpha,alpha_prime,residual\n");
            for (s, r) in curve.samples.iter().zip(curve.residuals()) {
                csv.push_str(&format!(
                    "{:.17e},{:.17e},{:.17e},{:.17e}\n",
                    s.v, s.alpha, s.alpha_prime, r
                ));
            }
            let point = json!({
                "lambda": lambda,
                "T": t,
                "step": step,
                "v0": curve.v0,
                "samples": curve.samples.len(),
                "max_alpha": curve.max_alpha(),
                "max_residual": curve.max_residual(),
            });
            out.write(&format!("{stem}.obj"), &patch.mesh.write_obj())?;
            out.write(&format!("{stem}.csv"), &csv)?;
            out.write(&format!("{stem}.json"), &(to_sorted_json(&point) + "\n"))?;
            points.push(point);
        }
    }
    Ok(out.finish(json!({ "barriers": points }), Vec::new()))
}

/// Move interior vertices by up to `amount` times their shortest chart edge.
fn jitter(problem: &mut GraphProblem, amount: f64, seed: u64) {
    let mesh = &problem.mesh;
    let mut shortest = vec![f64::INFINITY; mesh.vertices.len()];
    for &(a, b) in mesh.edges().keys() {
        let (p, q) = (mesh.vertices[a], mesh.vertices[b]);
        let d = (p[0] - q[0]).hypot(p[1] - q[1]);
        shortest[a] = shortest[a].min(d);
        shortest[b] = shortest[b].min(d);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for (v, p) in problem.mesh.vertices.iter_mut().enumerate() {
        let (dx, dy): (f64, f64) = (rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        if problem.dirichlet[v].is_none() && shortest[v].is_finite() {
            p[0] += amount * shortest[v] * dx;
            p[1] += amount * shortest[v] * dy;
        }
    }
}

fn solve_graph(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let s = &cfg.solve;
    positive("solver.tol", s.solver.tol)?;
    if !(0.0..0.5).contains(&s.jitter) {
        return Err(CliError::config("jitter must lie in [0, 0.5)"));
    }
    let mut problem = s.problem.build()?;
    if s.jitter > 0.0 {
        jitter(&mut problem, s.jitter, cfg.seed);
        problem = GraphProblem::new(problem.mesh, problem.chart, problem.dirichlet)?;
    }
    let (lo, hi) = problem.data_range();
    let sol = solve(&problem, &s.solver)?;
    let mut mesh = sol.mesh.clone();
    mesh.fields.insert("u".into(), sol.u.clone());
    let mut out = Artifacts::new(&cfg.out)?;
    out.write("solve.obj", &mesh.write_obj())?;
    out.write("solve.vtk", &mesh.write_vtk("minimal graph"))?;
    let payload = json!({
        "vertices": mesh.vertices.len(),
        "triangles": mesh.triangles.len(),
        "residual": sol.residual,
        "energy": sol.energy,
        "newton_steps": sol.newton_steps,
        "min_u": sol.min_u,
        "max_u": sol.max_u,
        "data_range": [lo, hi],
        "within_data_range": sol.min_u >= lo - 1e-9 && sol.max_u <= hi + 1e-9,
    });
    Ok(out.finish(payload, Vec::new()))
}

fn plateau(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let p = &cfg.plateau;
    positive("plateau.tol", p.options.tol)?;
    positive("plateau.spacing", p.options.spacing)?;
    if p.corners.len() < 3 {
        return Err(CliError::config("a polygon needs at least three corners"));
    }
    let res = solve_plateau(&p.corners, None, &p.options)?;
    let mut out = Artifacts::new(&cfg.out)?;
    out.write("plateau.obj", &res.mesh.write_obj())?;
    let monotone = res
        .area_trace
        .windows(2)
        .all(|w| w[1] <= w[0] * (1.0 + 1e-12));
    let payload = json!({
        "vertices": res.mesh.vertices.len(),
        "triangles": res.mesh.triangles.len(),
        "area": res.area,
        "residual": res.residual,
        "iterations": res.iterations,
        "remeshes": res.remeshes,
        "boundary_vertices": res.boundary_vertices,
        "area_non_increasing": monotone,
    });
    Ok(out.finish(payload, Vec::new()))
}

/// Normalized height at which end meshes are cut for export.
const END_CUT: f64 = 4.0;

fn example(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let id = cfg.example.id;
    let build = build_example(id, &cfg.example.params)?;
    let mut out = Artifacts::new(&cfg.out)?;
    out.write(&format!("ex{id}.obj"), &build.combined_mesh().write_obj())?;
    for (k, p) in build.complex.patches.iter().enumerate() {
        out.write(&format!("ex{id}_patch{k}.obj"), &p.mesh.write_obj())?;
    }
    let mut end_files = Vec::new();
    for e in &build.ends {
        let stem: String = e
            .name
            .chars()
            .map(|c| if c.is_ascii_alphanumeric() { c } else { '_' })
            .collect();
        let name = format!("ex{id}_end_{stem}.obj");
        out.write(
            &name,
            &e.mesh(&build.complex, END_CUT * e.y_unit).write_obj(),
        )?;
        end_files.push(json!({ "name": e.name, "file": name, "y_cut": END_CUT * e.y_unit }));
    }
    let mut manifest = build.manifest();
    manifest["end_files"] = json!(end_files);
    manifest["patch_files"] = json!((0..build.complex.patches.len())
        .map(|k| format!("ex{id}_patch{k}.obj"))
        .collect::<Vec<_>>());
    if id == 5 {
        manifest["half_quotient"] = json!(example5_half_quotient(&build)?);
    }
    out.write(
        &format!("ex{id}_manifest.json"),
        &(to_sorted_json(&manifest) + "\n"),
    )?;
    Ok(out.finish(manifest, build.warnings.clone()))
}

#[derive(Debug, Deserialize)]
struct CurveRow {
    #[serde(default)]
    s: Option<f64>,
    x: f64,
    t: f64,
}

fn read_curve(path: &Path, model: CuspModel<f64>) -> Result<BoundaryCurve<f64>, CliError> {
    let text = read_text(path, "curve")?;
    let mut reader = csv::Reader::from_reader(text.as_bytes());
    let rows: Vec<CurveRow> = reader
        .deserialize()
        .collect::<Result<_, _>>()
        .map_err(|e| CliError::config(format!("{}: {e}", path.display())))?;
    let n = rows.len().max(2) - 1;
    let samples = rows
        .iter()
        .enumerate()
        .map(|(k, r)| CurveSample {
            s: r.s.unwrap_or(k as f64 / n as f64),
            x: r.x,
            t: r.t,
        })
        .collect();
    Ok(BoundaryCurve::new(samples, model)?)
}

fn classify_curve(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let curve = read_curve(&cfg.classify.curve, model(cfg)?)?;
    let kind = if cfg.classify.tol > 0.0 {
        classify_with_tolerance(&curve, cfg.classify.tol)?
    } else {
        classify(&curve)?
    };
    Ok(Outcome {
        payload: json!({ "p": kind.p, "q": kind.q }),
        warnings: Vec::new(),
        files: Vec::new(),
    })
}

/// The lowest row of an end mesh as a boundary curve, ordered by `x` then `t`.
fn bottom_curve(mesh: &TriMesh, model: CuspModel<f64>) -> Result<BoundaryCurve<f64>, CliError> {
    let y_min = mesh
        .vertices
        .iter()
        .map(|v| v[1])
        .fold(f64::INFINITY, f64::min);
    let mut row: Vec<[f64; 3]> = mesh
        .vertices
        .iter()
        .filter(|v| v[1] <= y_min * (1.0 + 1e-9))
        .copied()
        .collect();
    row.sort_by(|a, b| a[0].total_cmp(&b[0]).then(a[2].total_cmp(&b[2])));
    let n = row.len().max(2) - 1;
    let samples = row
        .iter()
        .enumerate()
        .map(|(k, v)| CurveSample {
            s: k as f64 / n as f64,
            x: v[0],
            t: v[2],
        })
        .collect();
    Ok(BoundaryCurve::new(samples, model)?)
}

fn trap(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let mesh = read_mesh(&cfg.trap.mesh)?;
    let model = model(cfg)?;
    let tol = if cfg.trap.tol > 0.0 {
        cfg.trap.tol
    } else {
        default_tolerance(model.h)
    };
    let payload = match cfg.trap.mode {
        TrapMode::Slab => {
            let curve = bottom_curve(&mesh, model)?;
            let kind = match cfg.trap.kind {
                [0, 0] => classify(&curve)?,
                [p, q] => EndType::new(p, q)?,
            };
            json!(empirical_trapping_slab(&mesh, &curve, kind, &model, tol)?)
        }
        TrapMode::Hemisphere => {
            let l = cfg.trap.line;
            let line = IdealLine::new([l[0], l[1]], [l[2], l[3]])?;
            json!({
                "line": line,
                "result": hemisphere_sweep(&mesh, line, None, tol)?,
            })
        }
    };
    Ok(Outcome {
        payload,
        warnings: Vec::new(),
        files: Vec::new(),
    })
}

fn verify(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let v = &cfg.verify;
    if cfg.model.ambient != AmbientKind::ProductCusp {
        return Err(CliError::config("verify supports the product model only"));
    }
    let mesh = read_mesh(&v.mesh)?;
    let cusps = v
        .cusps
        .iter()
        .map(|s| cusp(s))
        .collect::<Result<Vec<_>, _>>()?;
    if cusps.is_empty() {
        return Err(CliError::config("at least one cusp point is required"));
    }
    let heights = horoball_heights(&mesh, &cusps);
    let series = mesh_truncation_series(&mesh, &heights, &v.y_cuts)?;
    let target = 2.0 * PI * v.chi as f64;
    let errors: Vec<f64> = series.totals.iter().map(|t| (t - target).abs()).collect();
    let last = *series.totals.last().unwrap();
    let mut out = Artifacts::new(&cfg.out)?;
    out.write("verify.csv", &series.to_csv())?;
    let payload = json!({
        "chi": v.chi,
        "target": target,
        "series": series,
        "relative_gap": (last - target).abs() / target.abs().max(f64::MIN_POSITIVE),
        "monotone_approach": errors.windows(2).all(|w| w[1] <= w[0]),
    });
    Ok(out.finish(payload, Vec::new()))
}

fn report(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let build = build_example(cfg.example.id, &cfg.example.params)?;
    let series = build.truncation_series(&cfg.report.y_cuts)?;
    let topo = build.topology;
    let mut ends = Vec::new();
    for e in &build.ends {
        let mut rows = Vec::new();
        for &y in &cfg.report.y_cuts {
            let y = y * e.y_unit;
            let kind = e.classify_at(&build.complex, y)?;
            let slab = build.end_slab(e, y)?;
            rows.push(json!({
                "y": y,
                "kind": kind,
                "length": e.length_at(&build.complex, y)?,
                "slab": slab.slab,
                "envelope": slab.envelope,
                "slab_agrees": slab.agrees,
            }));
        }
        ends.push(json!({ "name": e.name, "expected": e.expected, "rows": rows }));
    }
    let obstruction = topo
        .orientable
        .then(|| obstruction_check(topo.genus, topo.punctures, AmbientKind::ProductCusp));
    let target = 2.0 * PI * topo.chi as f64;
    let payload = json!({
        "example": build.id,
        "topology": topo,
        "deck_invariant": build.deck_invariant(),
        "deck_checks": build.deck_checks,
        "target_total_curvature": target,
        "truncation": series,
        "ends": ends,
        "obstruction": obstruction,
        "assumptions": build.assumptions,
    });
    Ok(Outcome {
        payload,
        warnings: build.warnings.clone(),
        files: Vec::new(),
    })
}
