//! Barrier sweeps: move a family of minimal surfaces toward a mesh, find the
//! first contact by bisection and turn the stall positions into empirical
//! trapping slabs.
//!
//! A sweep certifies a slab for the truncated mesh it is given. It says
//! nothing about the part of an end above the cut.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::ends::{classify, slab_of_curve, BoundaryCurve, EndType, TrappingSlab};
use crate::hyperbolic::CuspModel;
use crate::mesh::TriMesh;
use crate::quad::gauss_legendre;
use crate::{Error, Result};

pub const BISECTION_DEPTH: usize = 40;

/// Default contact tolerance for period `h`.
pub fn default_tolerance(h: f64) -> f64 {
    1e-3 * h
}

/// Side of the mesh the barriers come from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    /// From smaller values of the swept coordinate; the schedule increases.
    Lower,
    /// From larger values; the schedule decreases.
    Upper,
}

/// Line in the ideal plane `{y = 0}` of the hyperbolic cusp chart, given by
/// a point `(x, t)` and a unit normal pointing away from the mesh.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IdealLine {
    pub point: [f64; 2],
    pub normal: [f64; 2],
}

impl IdealLine {
    /// Line through `point` with direction `dir`; the normal is `dir` turned
    /// counterclockwise.
    pub fn new(point: [f64; 2], dir: [f64; 2]) -> Result<Self> {
        let n = dir[0].hypot(dir[1]);
        if !(n > 0.0) || !n.is_finite() {
            return Err(Error::input("line direction must be a nonzero vector"));
        }
        Ok(IdealLine {
            point,
            normal: [-dir[1] / n, dir[0] / n],
        })
    }

    pub fn flipped(self) -> Self {
        IdealLine {
            point: self.point,
            normal: [-self.normal[0], -self.normal[1]],
        }
    }

    /// Signed offset of the shadow `(x, t)` of `p` along the normal.
    pub fn side(&self, p: &[f64; 3]) -> f64 {
        (p[0] - self.point[0]) * self.normal[0] + (p[2] - self.point[1]) * self.normal[1]
    }
}

/// A one-parameter barrier family with its schedule `(start, end)`.
///
/// The ruled families use the limit-plane level `w = t − λx` of the leading
/// leg as parameter, vertical planes their `x` position, and hemispheres
/// their radius. Hemispheres are tangent to the line at its base point and
/// fill the half-space beyond it as the radius grows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SweepFamily {
    HorizontalBarriers {
        t_const: f64,
        side: Side,
        schedule: (f64, f64),
    },
    TiltedBarriers {
        lambda: f64,
        t_const: f64,
        side: Side,
        schedule: (f64, f64),
    },
    VerticalPlanes {
        side: Side,
        schedule: (f64, f64),
    },
    Hemispheres {
        line: IdealLine,
        schedule: (f64, f64),
    },
}

/// Outcome of a sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "outcome", rename_all = "snake_case")]
pub enum ContactResult {
    Clear {
        param: f64,
        separation: f64,
    },
    Contact {
        param: f64,
        point: [f64; 3],
        barrier_point: [f64; 3],
        separation: f64,
    },
}

impl ContactResult {
    pub fn is_contact(&self) -> bool {
        matches!(self, ContactResult::Contact { .. })
    }

    pub fn param(&self) -> f64 {
        match self {
            ContactResult::Clear { param, .. } | ContactResult::Contact { param, .. } => *param,
        }
    }
}

/// Leg offset `v(y)` of the ruled barrier: the smallest `v` with `α(v) = y`.
///
/// Integrates `dv = dα/α′` with `α′` taken from the first integral
/// `(1 + λ²α′²)(1 + λ²α²) = T`; for `λ = 0` the branch is `α = T sin v`.
pub fn leg_offset(lambda: f64, t_const: f64, y: f64) -> Result<f64> {
    let lambda = lambda.abs();
    if lambda == 0.0 {
        if !(y < t_const) {
            return Err(Error::domain("barrier does not reach the mesh height"));
        }
        return Ok((y / t_const).asin());
    }
    let peak = ((t_const - 1.0) / (lambda * lambda)).sqrt();
    if !(y < peak) {
        return Err(Error::domain("barrier does not reach the mesh height"));
    }
    let f = |a: f64| lambda / (t_const / (1.0 + lambda * lambda * a * a) - 1.0).sqrt();
    Ok(gauss_legendre(f, 0.0, y, 16))
}

/// Barrier constant `T` whose legs stay within `1e-7` of their limit planes
/// below height `y_max`.
pub fn barrier_constant(lambda: f64, y_max: f64) -> f64 {
    let l = lambda.abs();
    if l == 0.0 {
        1e7 * y_max
    } else {
        1.0 + (1e7 * l * y_max).powi(2)
    }
}

impl SweepFamily {
    pub fn schedule(&self) -> (f64, f64) {
        match self {
            SweepFamily::HorizontalBarriers { schedule, .. }
            | SweepFamily::TiltedBarriers { schedule, .. }
            | SweepFamily::VerticalPlanes { schedule, .. }
            | SweepFamily::Hemispheres { schedule, .. } => *schedule,
        }
    }

    fn ruled(&self) -> Option<(f64, f64, Side)> {
        match *self {
            SweepFamily::HorizontalBarriers { t_const, side, .. } => Some((0.0, t_const, side)),
            SweepFamily::TiltedBarriers {
                lambda,
                t_const,
                side,
                ..
            } => Some((lambda, t_const, side)),
            _ => None,
        }
    }

    fn validate(&self) -> Result<()> {
        let (a, b) = self.schedule();
        if !(a.is_finite() && b.is_finite()) {
            return Err(Error::input("schedule endpoints must be finite"));
        }
        let ok = match self {
            SweepFamily::HorizontalBarriers { side, .. }
            | SweepFamily::TiltedBarriers { side, .. }
            | SweepFamily::VerticalPlanes { side, .. } => match side {
                Side::Lower => a < b,
                Side::Upper => a > b,
            },
            SweepFamily::Hemispheres { .. } => 0.0 < a && a < b,
        };
        if !ok {
            return Err(Error::input("schedule must move toward the mesh"));
        }
        if let Some((_, t, _)) = self.ruled() {
            if !(t > 1.0) {
                return Err(Error::input("T must exceed 1"));
            }
        }
        Ok(())
    }

    /// Signed separation of `p` from the member at `param`, negative once the
    /// member has passed `p`. `leg` is the precomputed leg offset at `p`.
    fn gap(&self, p: &[f64; 3], leg: f64, param: f64) -> f64 {
        match *self {
            SweepFamily::HorizontalBarriers { side, .. } => match side {
                Side::Lower => p[2] - param - leg,
                Side::Upper => param - leg - p[2],
            },
            SweepFamily::TiltedBarriers { lambda, side, .. } => {
                let w = p[2] - lambda * p[0];
                match side {
                    Side::Lower => w - param - leg,
                    Side::Upper => param - leg - w,
                }
            }
            SweepFamily::VerticalPlanes { side, .. } => {
                let d = ((p[0] - param) / p[1]).asinh();
                match side {
                    Side::Lower => d,
                    Side::Upper => -d,
                }
            }
            SweepFamily::Hemispheres { line, .. } => {
                let s = line.side(p);
                let q2 = (p[0] - line.point[0]).powi(2) + (p[2] - line.point[1]).powi(2);
                ((q2 + p[1] * p[1] - 2.0 * param * s) / (2.0 * param * p[1])).asinh()
            }
        }
    }

    /// Separation of `p` from the member at `param`.
    pub fn separation(&self, p: &[f64; 3], param: f64) -> Result<f64> {
        Ok(self.gap(p, self.leg(p)?, param))
    }

    fn leg(&self, p: &[f64; 3]) -> Result<f64> {
        match self.ruled() {
            Some((lambda, t, _)) => leg_offset(lambda, t, p[1]),
            None => Ok(0.0),
        }
    }

    /// Parameter at which the family passes exactly through `p`, infinite
    /// when no member does.
    pub fn touch_param(&self, p: &[f64; 3]) -> Result<f64> {
        let leg = self.leg(p)?;
        Ok(match *self {
            SweepFamily::HorizontalBarriers { side, .. } => match side {
                Side::Lower => p[2] - leg,
                Side::Upper => p[2] + leg,
            },
            SweepFamily::TiltedBarriers { lambda, side, .. } => {
                let w = p[2] - lambda * p[0];
                match side {
                    Side::Lower => w - leg,
                    Side::Upper => w + leg,
                }
            }
            SweepFamily::VerticalPlanes { .. } => p[0],
            SweepFamily::Hemispheres { line, .. } => {
                let s = line.side(p);
                if s <= 0.0 {
                    f64::INFINITY
                } else {
                    let q2 = (p[0] - line.point[0]).powi(2) + (p[2] - line.point[1]).powi(2);
                    (q2 + p[1] * p[1]) / (2.0 * s)
                }
            }
        })
    }

    /// Nearest point of the member at `param` to `p`, in the chart.
    pub fn barrier_point(&self, p: &[f64; 3], param: f64) -> Result<[f64; 3]> {
        let leg = self.leg(p)?;
        Ok(match *self {
            SweepFamily::HorizontalBarriers { side, .. } => match side {
                Side::Lower => [p[0], p[1], param + leg],
                Side::Upper => [p[0], p[1], param - leg],
            },
            SweepFamily::TiltedBarriers { lambda, side, .. } => {
                let w = match side {
                    Side::Lower => param + leg,
                    Side::Upper => param - leg,
                };
                [p[0], p[1], w + lambda * p[0]]
            }
            SweepFamily::VerticalPlanes { .. } => {
                // Foot of the perpendicular circle through p centred at (param, 0).
                let r = ((p[0] - param).powi(2) + p[1] * p[1]).sqrt();
                [param, r, p[2]]
            }
            SweepFamily::Hemispheres { line, .. } => {
                let c = [
                    line.point[0] + param * line.normal[0],
                    0.0,
                    line.point[1] + param * line.normal[1],
                ];
                let d = [p[0] - c[0], p[1], p[2] - c[2]];
                let n = (d[0] * d[0] + d[1] * d[1] + d[2] * d[2]).sqrt();
                [
                    c[0] + param * d[0] / n,
                    param * d[1] / n,
                    c[2] + param * d[2] / n,
                ]
            }
        })
    }
}

/// Mesh vertices followed by edge midpoints, in a fixed order.
pub fn sample_points(mesh: &TriMesh) -> Vec<[f64; 3]> {
    let mut pts = mesh.vertices.clone();
    for &(a, b) in mesh.edges().keys() {
        let (p, q) = (mesh.vertices[a], mesh.vertices[b]);
        pts.push([
            0.5 * (p[0] + q[0]),
            0.5 * (p[1] + q[1]),
            0.5 * (p[2] + q[2]),
        ]);
    }
    pts
}

struct Prepared<'a> {
    family: &'a SweepFamily,
    points: Vec<[f64; 3]>,
    legs: Vec<f64>,
}

impl<'a> Prepared<'a> {
    fn new(mesh: &TriMesh, family: &'a SweepFamily) -> Result<Self> {
        family.validate()?;
        let points = sample_points(mesh);
        if points.is_empty() {
            return Err(Error::input("empty mesh"));
        }
        if points
            .iter()
            .any(|p| !(p[1] > 0.0) || p.iter().any(|c| !c.is_finite()))
        {
            return Err(Error::input("mesh vertices must be finite with y > 0"));
        }
        let legs = points
            .par_iter()
            .map(|p| family.leg(p))
            .collect::<Result<Vec<f64>>>()?;
        Ok(Prepared {
            family,
            points,
            legs,
        })
    }

    /// Smallest gap and its sample index; ties go to the lower index.
    fn min_gap(&self, param: f64) -> (f64, usize) {
        self.points
            .par_iter()
            .zip(self.legs.par_iter())
            .enumerate()
            .map(|(i, (p, &l))| (self.family.gap(p, l, param), i))
            .reduce(
                || (f64::INFINITY, usize::MAX),
                |a, b| {
                    if b.0 < a.0 || (b.0 == a.0 && b.1 < a.1) {
                        b
                    } else {
                        a
                    }
                },
            )
    }
}

/// Sweep `family` toward `mesh` and report the first contact.
pub fn sweep(mesh: &TriMesh, family: &SweepFamily, tolerance: f64) -> Result<ContactResult> {
    if !(tolerance > 0.0) {
        return Err(Error::input("tolerance must be positive"));
    }
    let prep = Prepared::new(mesh, family)?;
    let (start, end) = family.schedule();
    let (g0, _) = prep.min_gap(start);
    if !(g0 > tolerance) {
        return Err(Error::domain(format!(
            "invalid sweep start: separation {g0:.3e} at parameter {start} is within tolerance {tolerance:.1e}"
        )));
    }
    let (g1, i1) = prep.min_gap(end);
    if g1 > tolerance {
        return Ok(ContactResult::Clear {
            param: end,
            separation: g1,
        });
    }
    let (mut clear, mut hit, mut at) = (start, end, (g1, i1));
    for _ in 0..BISECTION_DEPTH {
        let mid = 0.5 * (clear + hit);
        let g = prep.min_gap(mid);
        if g.0 > tolerance {
            clear = mid;
        } else {
            hit = mid;
            at = g;
        }
    }
    let point = prep.points[at.1];
    Ok(ContactResult::Contact {
        param: hit,
        point,
        barrier_point: family.barrier_point(&point, hit)?,
        separation: at.0,
    })
}

/// Slabs found by sweeping an end mesh from both sides.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmpiricalSlab {
    pub kind: EndType,
    pub slab: TrappingSlab<f64>,
    /// Envelope of the slab functional over the boundary curve.
    pub envelope: TrappingSlab<f64>,
    pub lower: ContactResult,
    pub upper: ContactResult,
    pub lower_family: SweepFamily,
    pub upper_family: SweepFamily,
    /// Chart heights between which the mesh certifies the slab.
    pub y_cut: (f64, f64),
    pub contains_envelope: bool,
    /// `|width − envelope width| / envelope width`, infinite for a zero-width envelope.
    pub width_gap: f64,
    /// Contact tolerance expressed in units of the slab functional.
    pub functional_tolerance: f64,
    /// Contains the envelope, with widths within 10% plus the functional tolerance.
    pub agrees: bool,
}

/// Sweep the end mesh from both sides with the barrier family matching its
/// type and return the stall levels of the slab functional.
pub fn empirical_trapping_slab(
    mesh: &TriMesh,
    boundary: &BoundaryCurve<f64>,
    kind: EndType,
    model: &CuspModel<f64>,
    tolerance: f64,
) -> Result<EmpiricalSlab> {
    let found = classify(boundary)?;
    if found != kind {
        return Err(Error::input(format!(
            "classification mismatch: boundary has type ({},{}), requested ({},{})",
            found.p, found.q, kind.p, kind.q
        )));
    }
    if mesh.vertices.is_empty() {
        return Err(Error::input("empty mesh"));
    }
    let curve_model = CuspModel {
        y0: boundary.model.y0,
        ..*model
    };
    let envelope = slab_of_curve(
        &BoundaryCurve {
            samples: boundary.samples.clone(),
            model: curve_model,
        },
        kind,
    )?;
    let (ct, cx) = kind.functional(model);
    let (y_lo, y_hi) = mesh
        .vertices
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| {
            (a.min(v[1]), b.max(v[1]))
        });
    // Envelope and schedule in the family's own coordinate.
    let (to_param, scale): (Box<dyn Fn(f64) -> f64>, f64) = if kind.p == 0 {
        (Box::new(move |c| c / cx), model.tau)
    } else {
        (Box::new(move |c| c / ct), model.h)
    };
    let (a, b) = (to_param(envelope.c_min), to_param(envelope.c_max));
    let (lo, hi) = (a.min(b), a.max(b));
    let pad = 10.0 * (hi - lo).max(scale);
    let make = |side: Side| {
        let schedule = match side {
            Side::Lower => (lo - pad, hi + pad),
            Side::Upper => (hi + pad, lo - pad),
        };
        if kind.p == 0 {
            SweepFamily::VerticalPlanes { side, schedule }
        } else if kind.q == 0 {
            SweepFamily::HorizontalBarriers {
                t_const: barrier_constant(0.0, y_hi),
                side,
                schedule,
            }
        } else {
            let lambda = kind.slope(model).unwrap();
            SweepFamily::TiltedBarriers {
                lambda,
                t_const: barrier_constant(lambda, y_hi),
                side,
                schedule,
            }
        }
    };
    let lower_family = make(Side::Lower);
    let upper_family = make(Side::Upper);
    let lower = sweep(mesh, &lower_family, tolerance)?;
    let upper = sweep(mesh, &upper_family, tolerance)?;
    let edge = |r: &ContactResult, f: &SweepFamily| -> Result<f64> {
        match r {
            ContactResult::Contact { point, .. } => f.touch_param(point),
            ContactResult::Clear { .. } => Err(Error::numeric(
                "barrier sweep crossed the schedule without contact",
            )),
        }
    };
    let p_lo = edge(&lower, &lower_family)?;
    let p_hi = edge(&upper, &upper_family)?;
    let to_c = |p: f64| if kind.p == 0 { cx * p } else { ct * p };
    let (c1, c2) = (to_c(p_lo), to_c(p_hi));
    let slab = TrappingSlab {
        c_min: c1.min(c2),
        c_max: c1.max(c2),
        coeff_t: ct,
        coeff_x: cx,
    };
    let c_tol = tolerance * (ct.abs().max(cx.abs()));
    let contains_envelope = slab.contains(&envelope, c_tol);
    let width_gap = if envelope.width() > 0.0 {
        (slab.width() - envelope.width()).abs() / envelope.width()
    } else {
        f64::INFINITY
    };
    let agrees = contains_envelope
        && (slab.width() - envelope.width()).abs() <= 0.1 * envelope.width() + c_tol;
    Ok(EmpiricalSlab {
        kind,
        slab,
        envelope,
        lower,
        upper,
        lower_family,
        upper_family,
        y_cut: (y_lo, y_hi),
        contains_envelope,
        width_gap,
        functional_tolerance: c_tol,
        agrees,
    })
}

/// Grow hemispheres toward `line` from the side away from the mesh.
///
/// The line's normal is re-oriented away from the mesh boundary. With no
/// schedule the radius runs over `[1e-6, 1e6]` times the mesh extent.
pub fn hemisphere_sweep(
    mesh: &TriMesh,
    line: IdealLine,
    schedule: Option<(f64, f64)>,
    tolerance: f64,
) -> Result<ContactResult> {
    let mask = mesh.boundary_vertex_mask();
    let reference: Vec<&[f64; 3]> = if mask.iter().any(|&b| b) {
        mesh.vertices
            .iter()
            .zip(&mask)
            .filter(|(_, &b)| b)
            .map(|(v, _)| v)
            .collect()
    } else {
        mesh.vertices.iter().collect()
    };
    if reference.is_empty() {
        return Err(Error::input("empty mesh"));
    }
    let sides: Vec<f64> = reference.iter().map(|p| line.side(p)).collect();
    let line = if sides.iter().all(|&s| s < 0.0) {
        line
    } else if sides.iter().all(|&s| s > 0.0) {
        line.flipped()
    } else {
        return Err(Error::domain("mesh boundary straddles the line"));
    };
    let schedule = schedule.unwrap_or_else(|| {
        let extent = mesh
            .vertices
            .iter()
            .map(|p| {
                ((p[0] - line.point[0]).powi(2) + (p[2] - line.point[1]).powi(2) + p[1] * p[1])
                    .sqrt()
            })
            .fold(0.0, f64::max)
            .max(1.0);
        (1e-6 * extent, 1e6 * extent)
    });
    sweep(
        mesh,
        &SweepFamily::Hemispheres { line, schedule },
        tolerance,
    )
}
