//! Standard cusp ends, deck-periodic boundary curves and trapping slabs.

use serde::{Deserialize, Serialize};

use crate::hyperbolic::CuspModel;
use crate::mesh::TriMesh;
use crate::real::Real;
use crate::{Error, Result};

/// Deck type `(p, q)` of an end: the boundary is invariant under `ψ^p ∘ T(h)^q`.
///
/// Not reduced by the gcd, since the multiplicity records a covering degree.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct EndType {
    pub p: i64,
    pub q: i64,
}

impl EndType {
    pub fn new(p: i64, q: i64) -> Result<Self> {
        if p == 0 && q == 0 {
            return Err(Error::domain(
                "compact lifted boundary excluded: (p,q) = (0,0)",
            ));
        }
        Ok(EndType { p, q })
    }

    /// Slope `qh/(pτ)` of the helicoidal plane, `None` for `p = 0`.
    pub fn slope<R: Real>(&self, model: &CuspModel<R>) -> Option<R> {
        if self.p == 0 {
            return None;
        }
        Some(R::from_i64(self.q).unwrap() * model.h / (R::from_i64(self.p).unwrap() * model.tau))
    }

    /// Coefficients `(pτ, −qh)` of the slab functional `pτ·t − qh·x`.
    pub fn functional<R: Real>(&self, model: &CuspModel<R>) -> (R, R) {
        (
            R::from_i64(self.p).unwrap() * model.tau,
            -R::from_i64(self.q).unwrap() * model.h,
        )
    }
}

/// A standard end: `{t = t₀}` for `(p, 0)`, `{x = x₀}` for `(0, q)`, and
/// `{pτt − qhx = c₀}` otherwise.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StandardEnd<R> {
    pub kind: EndType,
    pub constant: R,
    pub model: CuspModel<R>,
}

impl<R: Real> StandardEnd<R> {
    /// Value `c₀` of the slab functional on this end.
    pub fn level(&self) -> R {
        let (ct, cx) = self.kind.functional(&self.model);
        if self.kind.q == 0 {
            ct * self.constant
        } else if self.kind.p == 0 {
            cx * self.constant
        } else {
            self.constant
        }
    }

    pub fn functional_at(&self, x: R, t: R) -> R {
        let (ct, cx) = self.kind.functional(&self.model);
        ct * t + cx * x
    }

    /// Product-metric distance from `(x, y, t)` to this end.
    pub fn distance(&self, x: R, y: R, t: R) -> R {
        let (ct, cx) = self.kind.functional(&self.model);
        if self.kind.p == 0 {
            // Vertical plane over the geodesic x = x₀.
            let x0 = self.level() / cx;
            return ((x - x0).abs() / y).asinh();
        }
        let lambda = -cx / ct;
        let b = self.level() / ct;
        if self.kind.q == 0 {
            return (t - b).abs();
        }
        // Minimize asinh(|x − x'|/y)² + (t − λx' − b)² over x'.
        let f = |xp: R| {
            let a = ((x - xp).abs() / y).asinh();
            let d = t - lambda * xp - b;
            a * a + d * d
        };
        let x_plane = (t - b) / lambda;
        let (mut lo, mut hi) = if x_plane < x {
            (x_plane, x)
        } else {
            (x, x_plane)
        };
        let g = R::lit(0.618_033_988_749_894_8);
        for _ in 0..200 {
            let m1 = hi - g * (hi - lo);
            let m2 = lo + g * (hi - lo);
            if f(m1) <= f(m2) {
                hi = m2;
            } else {
                lo = m1;
            }
            if hi - lo <= R::epsilon() * (R::one() + x.abs()) {
                break;
            }
        }
        f((lo + hi) / R::lit(2.0)).sqrt()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurveSample<R> {
    pub s: R,
    pub x: R,
    pub t: R,
}

/// One period `s ∈ [0, 1]` of a lifted boundary curve at height `model.y0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundaryCurve<R> {
    pub samples: Vec<CurveSample<R>>,
    pub model: CuspModel<R>,
}

impl<R: Real> BoundaryCurve<R> {
    pub fn new(samples: Vec<CurveSample<R>>, model: CuspModel<R>) -> Result<Self> {
        if samples.len() < 2 {
            return Err(Error::input("boundary curve needs at least two samples"));
        }
        let mut c = BoundaryCurve { samples, model };
        c.dedup();
        Ok(c)
    }

    /// Sample `f(s) = (x, t)` at `n + 1` uniform parameters.
    pub fn from_fn<F: Fn(R) -> (R, R)>(model: CuspModel<R>, n: usize, f: F) -> Self {
        let samples = (0..=n)
            .map(|k| {
                let s = R::from_usize(k).unwrap() / R::from_usize(n).unwrap();
                let (x, t) = f(s);
                CurveSample { s, x, t }
            })
            .collect();
        BoundaryCurve { samples, model }
    }

    /// Drop consecutive repeated points.
    pub fn dedup(&mut self) {
        self.samples.dedup_by(|b, a| a.x == b.x && a.t == b.t);
    }

    /// Apply the deck transformation `ψ^a ∘ T(h)^b` to every sample.
    pub fn translated(&self, a: i64, b: i64) -> Self {
        let dx = R::from_i64(a).unwrap() * self.model.tau;
        let dt = R::from_i64(b).unwrap() * self.model.h;
        let samples = self
            .samples
            .iter()
            .map(|c| CurveSample {
                s: c.s,
                x: c.x + dx,
                t: c.t + dt,
            })
            .collect();
        BoundaryCurve {
            samples,
            model: self.model,
        }
    }

    pub fn default_tolerance(&self) -> R {
        R::lit(1e-6) * self.model.tau.max(self.model.h)
    }
}

pub fn classify<R: Real>(curve: &BoundaryCurve<R>) -> Result<EndType> {
    classify_with_tolerance(curve, curve.default_tolerance())
}

pub fn classify_with_tolerance<R: Real>(curve: &BoundaryCurve<R>, tol: R) -> Result<EndType> {
    let first = curve
        .samples
        .first()
        .ok_or_else(|| Error::input("empty boundary curve"))?;
    let last = curve.samples.last().unwrap();
    let dx = last.x - first.x;
    let dt = last.t - first.t;
    let pf = (dx / curve.model.tau).round();
    let qf = (dt / curve.model.h).round();
    let res = (dx - pf * curve.model.tau)
        .abs()
        .max((dt - qf * curve.model.h).abs());
    if !(res <= tol) {
        return Err(Error::input(format!(
            "not a deck-periodic curve: closure residual {res} exceeds {tol}"
        )));
    }
    let p = pf.to_i64().unwrap();
    let q = qf.to_i64().unwrap();
    if p == 0 && q == 0 {
        return Err(Error::domain(
            "compact lifted boundary excluded by the annular-end lemma: (p,q) = (0,0)",
        ));
    }
    Ok(EndType { p, q })
}

/// Oscillation `max t − min t` of the curve over one period.
pub fn diameter_g<R: Real>(curve: &BoundaryCurve<R>) -> R {
    let (lo, hi) = curve
        .samples
        .iter()
        .fold((R::infinity(), R::neg_infinity()), |(lo, hi), c| {
            (lo.min(c.t), hi.max(c.t))
        });
    if lo > hi {
        R::zero()
    } else {
        hi - lo
    }
}

/// Smallest `k ≥ 0` with `k·h ≥ G`.
pub fn k0_of<R: Real>(g: R, h: R) -> Result<u64> {
    if !(h > R::zero()) {
        return Err(Error::domain("h must be positive"));
    }
    if !(g >= R::zero()) {
        return Err(Error::domain("G must be non-negative"));
    }
    let mut k = (g / h).ceil().to_u64().unwrap_or(0);
    while k > 0 && R::from_u64(k - 1).unwrap() * h >= g {
        k -= 1;
    }
    while R::from_u64(k).unwrap() * h < g {
        k += 1;
    }
    Ok(k)
}

/// Interval `[c_min, c_max]` of the functional `coeff_t·t + coeff_x·x`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrappingSlab<R> {
    pub c_min: R,
    pub c_max: R,
    pub coeff_t: R,
    pub coeff_x: R,
}

impl<R: Real> TrappingSlab<R> {
    pub fn width(&self) -> R {
        self.c_max - self.c_min
    }

    pub fn contains(&self, other: &TrappingSlab<R>, tol: R) -> bool {
        self.c_min <= other.c_min + tol && self.c_max >= other.c_max - tol
    }
}

/// Exact envelope of the slab functional over the curve samples.
pub fn slab_of_curve<R: Real>(curve: &BoundaryCurve<R>, kind: EndType) -> Result<TrappingSlab<R>> {
    let found = classify(curve)?;
    if found != kind {
        return Err(Error::input(format!(
            "kind mismatch: curve has type ({},{}), requested ({},{})",
            found.p, found.q, kind.p, kind.q
        )));
    }
    let (ct, cx) = kind.functional(&curve.model);
    Ok(envelope(curve.samples.iter().map(|c| (c.x, c.t)), ct, cx))
}

/// Envelope of `ct·t + cx·x` over a point set.
pub fn envelope<R: Real, I: IntoIterator<Item = (R, R)>>(pts: I, ct: R, cx: R) -> TrappingSlab<R> {
    let (lo, hi) = pts
        .into_iter()
        .map(|(x, t)| ct * t + cx * x)
        .fold((R::infinity(), R::neg_infinity()), |(lo, hi), v| {
            (lo.min(v), hi.max(v))
        });
    TrappingSlab {
        c_min: lo,
        c_max: hi,
        coeff_t: ct,
        coeff_x: cx,
    }
}

/// Planar mesh of a standard end over `y ∈ y_range` covering `periods`
/// fundamental periods along the end.
pub fn standard_end_mesh(
    end: &StandardEnd<f64>,
    y_range: (f64, f64),
    periods: f64,
    nu: usize,
    nv: usize,
) -> Result<TriMesh> {
    if !(y_range.0 >= end.model.y0 && y_range.1 > y_range.0) {
        return Err(Error::domain("y range must lie above the truncation level"));
    }
    if nu < 2 || nv < 2 {
        return Err(Error::domain("resolution must be at least 2x2"));
    }
    let (ct, cx) = end.kind.functional(&end.model);
    let c0 = end.level();
    let ratio = (y_range.1 / y_range.0).ln();
    let mut mesh = TriMesh::grid(nu, nv, |i, j| {
        let s = i as f64 / (nu - 1) as f64;
        let y = y_range.0 * (ratio * j as f64 / (nv - 1) as f64).exp();
        if end.kind.p == 0 {
            let t = s * periods * end.kind.q.unsigned_abs() as f64 * end.model.h;
            [c0 / cx, y, t]
        } else {
            let x = s * periods * end.kind.p.unsigned_abs() as f64 * end.model.tau;
            let t = if end.kind.q == 0 {
                c0 / ct
            } else {
                (c0 - cx * x) / ct
            };
            [x, y, t]
        }
    });
    mesh.fields.insert(
        "slab".into(),
        mesh.vertices
            .iter()
            .map(|v| ct * v[2] + cx * v[0])
            .collect(),
    );
    Ok(mesh)
}

/// Envelope slab of a mesh's vertices for the functional of `kind`.
pub fn slab_of_mesh(mesh: &TriMesh, kind: EndType, model: &CuspModel<f64>) -> TrappingSlab<f64> {
    let (ct, cx) = kind.functional(model);
    envelope(mesh.vertices.iter().map(|v| (v[0], v[2])), ct, cx)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProfileEntry {
    pub y: f64,
    pub sup_distance: f64,
    pub samples: usize,
}

/// Sup of the distance to `end` over vertices with `|y_v/y − 1| ≤ band`, per ladder rung.
///
/// Rungs with no vertices are skipped and reported in the warnings.
pub fn asymptotic_distance_profile(
    mesh: &TriMesh,
    end: &StandardEnd<f64>,
    y_ladder: &[f64],
    band: f64,
) -> (Vec<ProfileEntry>, Vec<String>) {
    let mut out = Vec::new();
    let mut warnings = Vec::new();
    for &y in y_ladder {
        let mut sup: f64 = 0.0;
        let mut n = 0;
        for v in &mesh.vertices {
            if (v[1] / y - 1.0).abs() <= band {
                sup = sup.max(end.distance(v[0], v[1], v[2]));
                n += 1;
            }
        }
        if n == 0 {
            warnings.push(format!("no vertices in height band around y = {y}"));
            continue;
        }
        out.push(ProfileEntry {
            y,
            sup_distance: sup,
            samples: n,
        });
    }
    (out, warnings)
}
