//! Half-plane and disk models of the hyperbolic plane, the product and
//! hyperbolic cusp models, and their isometries.

use serde::{Deserialize, Serialize};

use crate::real::Real;
use crate::{Error, Result};

/// A point `(x, y, t)` of the half-space chart.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point3<R> {
    pub x: R,
    pub y: R,
    pub t: R,
}

impl<R: Real> Point3<R> {
    pub fn new(x: R, y: R, t: R) -> Self {
        Point3 { x, y, t }
    }

    /// Checked constructor enforcing `y > 0` and finite coordinates.
    pub fn checked(x: R, y: R, t: R) -> Result<Self> {
        if !(x.is_finite() && y.is_finite() && t.is_finite()) {
            return Err(Error::domain("point coordinates must be finite"));
        }
        if y <= R::zero() {
            return Err(Error::domain(format!(
                "point height y={y} must be positive"
            )));
        }
        Ok(Point3 { x, y, t })
    }

    pub fn xy(&self) -> (R, R) {
        (self.x, self.y)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum AmbientKind {
    /// `(dx² + dy²)/y² + dt²`
    ProductCusp,
    /// `(dx² + dy² + dt²)/y²`
    HyperbolicCusp,
}

/// Cusp end data: parabolic period `tau`, vertical period `h`, truncation level `y0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CuspModel<R> {
    pub tau: R,
    pub h: R,
    pub y0: R,
    pub ambient: AmbientKind,
}

impl<R: Real> CuspModel<R> {
    pub fn new(tau: R, h: R, y0: R, ambient: AmbientKind) -> Result<Self> {
        let m = CuspModel {
            tau,
            h,
            y0,
            ambient,
        };
        m.validate()?;
        Ok(m)
    }

    pub fn product(tau: R, h: R) -> Self {
        CuspModel {
            tau,
            h,
            y0: R::one(),
            ambient: AmbientKind::ProductCusp,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.tau > R::zero()) {
            return Err(Error::domain("tau must be positive"));
        }
        if !(self.h > R::zero()) {
            return Err(Error::domain("h must be positive"));
        }
        if !(self.y0 >= R::one()) {
            return Err(Error::domain("y0 must be at least 1"));
        }
        Ok(())
    }

    /// The deck transformation `ψ^p ∘ T(h)^q`.
    pub fn deck(&self, p: i64, q: i64) -> Isometry<R> {
        let p = R::from_i64(p).unwrap();
        let q = R::from_i64(q).unwrap();
        Isometry::identity()
            .then(Generator::VerticalTranslate(q * self.h))
            .then(Generator::Parabolic(p * self.tau))
    }
}

/// Mean curvature magnitude of the level tori `{y = const}`.
///
/// Orientation: toward the cusp in the product model, toward increasing `y`
/// in the hyperbolic model.
pub fn level_torus_mean_curvature<R: Real>(model: &CuspModel<R>) -> R {
    match model.ambient {
        AmbientKind::ProductCusp => R::lit(0.5),
        AmbientKind::HyperbolicCusp => R::one(),
    }
}

/// Length of the horocycle `{y = const}` modulo the parabolic period.
pub fn horocycle_length<R: Real>(model: &CuspModel<R>, y: R) -> Result<R> {
    if y < model.y0 {
        return Err(Error::domain(format!(
            "height {y} is below the truncation level {}",
            model.y0
        )));
    }
    Ok(model.tau / y)
}

/// Hyperbolic distance between two points of the upper half-plane.
pub fn dist_h2<R: Real>(p: (R, R), q: (R, R)) -> Result<R> {
    if p.1 <= R::zero() || q.1 <= R::zero() {
        return Err(Error::domain("half-plane points need positive y"));
    }
    let dx = p.0 - q.0;
    let dy = p.1 - q.1;
    let chord = (dx * dx + dy * dy).sqrt();
    let two = R::lit(2.0);
    Ok(two * (chord / (two * (p.1 * q.1).sqrt())).asinh())
}

/// Geodesics of the upper half-plane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Geodesic<R> {
    VerticalLine { x: R },
    Semicircle { a: R, b: R },
}

impl<R: Real> Geodesic<R> {
    pub fn semicircle(a: R, b: R) -> Result<Self> {
        if !(a < b) {
            return Err(Error::domain("semicircle endpoints need a < b"));
        }
        Ok(Geodesic::Semicircle { a, b })
    }

    /// Geodesic with the given ideal endpoints; `None` stands for the point at infinity.
    pub fn through_ideal(p: Option<R>, q: Option<R>) -> Result<Self> {
        match (p, q) {
            (Some(a), Some(b)) if a < b => Ok(Geodesic::Semicircle { a, b }),
            (Some(a), Some(b)) if b < a => Ok(Geodesic::Semicircle { a: b, b: a }),
            (Some(x), None) | (None, Some(x)) => Ok(Geodesic::VerticalLine { x }),
            _ => Err(Error::domain("degenerate ideal endpoints")),
        }
    }

    /// Unique geodesic through two distinct interior points.
    pub fn through_points(p: (R, R), q: (R, R)) -> Result<Self> {
        let eps = R::epsilon() * R::lit(64.0) * (R::one() + p.0.abs() + q.0.abs());
        if (p.0 - q.0).abs() <= eps {
            if (p.1 - q.1).abs() <= eps {
                return Err(Error::domain("coincident points"));
            }
            return Ok(Geodesic::VerticalLine { x: p.0 });
        }
        let two = R::lit(2.0);
        let c = ((q.0 * q.0 + q.1 * q.1) - (p.0 * p.0 + p.1 * p.1)) / (two * (q.0 - p.0));
        let r = ((p.0 - c) * (p.0 - c) + p.1 * p.1).sqrt();
        Ok(Geodesic::Semicircle { a: c - r, b: c + r })
    }

    pub fn center_radius(&self) -> Option<(R, R)> {
        match *self {
            Geodesic::Semicircle { a, b } => {
                let two = R::lit(2.0);
                Some(((a + b) / two, (b - a) / two))
            }
            Geodesic::VerticalLine { .. } => None,
        }
    }

    /// Signed defining function: zero on the geodesic, sign tells the side.
    pub fn side(&self, p: (R, R)) -> R {
        match *self {
            Geodesic::VerticalLine { x } => p.0 - x,
            Geodesic::Semicircle { .. } => {
                let (c, r) = self.center_radius().unwrap();
                ((p.0 - c) * (p.0 - c) + p.1 * p.1 - r * r) / (R::lit(2.0) * r)
            }
        }
    }

    /// Reflection of the half-plane in this geodesic.
    pub fn reflect(&self, p: (R, R)) -> (R, R) {
        match *self {
            Geodesic::VerticalLine { x } => (x + x - p.0, p.1),
            Geodesic::Semicircle { .. } => {
                let (c, r) = self.center_radius().unwrap();
                let dx = p.0 - c;
                let d2 = dx * dx + p.1 * p.1;
                let k = r * r / d2;
                (c + k * dx, k * p.1)
            }
        }
    }

    /// Point on the geodesic at parameter `s`: height for vertical lines,
    /// angle in `(0, π)` for semicircles.
    pub fn point_at(&self, s: R) -> (R, R) {
        match *self {
            Geodesic::VerticalLine { x } => (x, s),
            Geodesic::Semicircle { .. } => {
                let (c, r) = self.center_radius().unwrap();
                (c + r * s.cos(), r * s.sin())
            }
        }
    }
}

/// Complex helpers on `(re, im)` pairs.
fn cmul<R: Real>(a: (R, R), b: (R, R)) -> (R, R) {
    (a.0 * b.0 - a.1 * b.1, a.0 * b.1 + a.1 * b.0)
}

fn cdiv<R: Real>(a: (R, R), b: (R, R)) -> (R, R) {
    let d = b.0 * b.0 + b.1 * b.1;
    ((a.0 * b.0 + a.1 * b.1) / d, (a.1 * b.0 - a.0 * b.1) / d)
}

/// Map from the unit disk to the upper half-plane sending 0 to `i` and the
/// disk point `i` to infinity.
pub fn disk_to_halfplane<R: Real>(w: (R, R)) -> Result<(R, R)> {
    let n2 = w.0 * w.0 + w.1 * w.1;
    if !(n2 < R::one()) {
        return Err(Error::domain("disk point must satisfy |p| < 1"));
    }
    // s = -i w, z = i (1 + s) / (1 - s)
    let s = (w.1, -w.0);
    let one = R::one();
    let num = cmul((R::zero(), one), (one + s.0, s.1));
    Ok(cdiv(num, (one - s.0, -s.1)))
}

/// Inverse of [`disk_to_halfplane`].
pub fn halfplane_to_disk<R: Real>(z: (R, R)) -> Result<(R, R)> {
    if !(z.1 > R::zero()) {
        return Err(Error::domain("half-plane point must have y > 0"));
    }
    // w = i (z - i) / (z + i)
    let one = R::one();
    let q = cdiv((z.0, z.1 - one), (z.0, z.1 + one));
    Ok(cmul((R::zero(), one), q))
}

/// Ideal boundary version of [`disk_to_halfplane`]: a unit-circle point goes to
/// a real number, or `None` for the point at infinity.
pub fn disk_ideal_to_halfplane<R: Real>(w: (R, R)) -> Option<R> {
    let s = (w.1, -w.0);
    let one = R::one();
    let den = (one - s.0, -s.1);
    if den.0.abs() + den.1.abs() <= R::epsilon() * R::lit(16.0) {
        return None;
    }
    let z = cdiv(cmul((R::zero(), one), (one + s.0, s.1)), den);
    Some(z.0)
}

/// One generator of an isometry of the half-space chart.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Generator<R> {
    /// `x ↦ x + τ`
    Parabolic(R),
    /// `t ↦ t + h`
    VerticalTranslate(R),
    /// Translation of signed length along a geodesic axis, oriented from
    /// the lower to the upper ideal endpoint (upward for vertical lines).
    HyperbolicTranslate {
        axis: Geodesic<R>,
        length: R,
    },
    GeodesicReflection(Geodesic<R>),
    /// `t ↦ 2c − t`
    VerticalReflection(R),
    /// Rotation by `π` about the vertical line over `(x, y)`.
    HalfTurn {
        x: R,
        y: R,
    },
    /// Disk model to half-plane model (`to_halfplane = true`) or back.
    ModelMap {
        to_halfplane: bool,
    },
}

impl<R: Real> Generator<R> {
    pub fn inverse(&self) -> Self {
        match *self {
            Generator::Parabolic(s) => Generator::Parabolic(-s),
            Generator::VerticalTranslate(h) => Generator::VerticalTranslate(-h),
            Generator::HyperbolicTranslate { axis, length } => Generator::HyperbolicTranslate {
                axis,
                length: -length,
            },
            Generator::GeodesicReflection(g) => Generator::GeodesicReflection(g),
            Generator::VerticalReflection(c) => Generator::VerticalReflection(c),
            Generator::HalfTurn { x, y } => Generator::HalfTurn { x, y },
            Generator::ModelMap { to_halfplane } => Generator::ModelMap {
                to_halfplane: !to_halfplane,
            },
        }
    }

    pub fn apply(&self, p: Point3<R>) -> Point3<R> {
        match *self {
            Generator::Parabolic(s) => Point3::new(p.x + s, p.y, p.t),
            Generator::VerticalTranslate(h) => Point3::new(p.x, p.y, p.t + h),
            Generator::GeodesicReflection(g) => {
                let (x, y) = g.reflect((p.x, p.y));
                Point3::new(x, y, p.t)
            }
            Generator::HyperbolicTranslate { axis, length } => {
                let (x, y) = hyperbolic_translate(axis, length, (p.x, p.y));
                Point3::new(x, y, p.t)
            }
            Generator::VerticalReflection(c) => Point3::new(p.x, p.y, c + c - p.t),
            Generator::HalfTurn { x, y } => {
                // z ↦ x − y²/(z − x)
                let w = cdiv((-y * y, R::zero()), (p.x - x, p.y));
                Point3::new(x + w.0, w.1, p.t)
            }
            Generator::ModelMap { to_halfplane } => {
                let m = if to_halfplane {
                    disk_to_halfplane((p.x, p.y))
                } else {
                    halfplane_to_disk((p.x, p.y))
                };
                let (x, y) = m.unwrap_or((R::nan(), R::nan()));
                Point3::new(x, y, p.t)
            }
        }
    }
}

fn hyperbolic_translate<R: Real>(axis: Geodesic<R>, length: R, z: (R, R)) -> (R, R) {
    let k = length.exp();
    match axis {
        Geodesic::VerticalLine { x } => (x + k * (z.0 - x), k * z.1),
        Geodesic::Semicircle { a, b } => {
            // f(z) = (z - a)/(b - z) sends a to 0 and b to ∞.
            let w = cdiv((z.0 - a, z.1), (b - z.0, -z.1));
            let w = (k * w.0, k * w.1);
            // f⁻¹(w) = (b w + a)/(w + 1)
            cdiv((b * w.0 + a, b * w.1), (w.0 + R::one(), w.1))
        }
    }
}

/// An ordered composition of generators, applied first to last.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Isometry<R> {
    pub generators: Vec<Generator<R>>,
}

impl<R: Real> Isometry<R> {
    pub fn identity() -> Self {
        Isometry {
            generators: Vec::new(),
        }
    }

    pub fn from_generator(g: Generator<R>) -> Self {
        Isometry {
            generators: vec![g],
        }
    }

    /// Append `g`, applied after the current composition.
    pub fn then(mut self, g: Generator<R>) -> Self {
        self.generators.push(g);
        self
    }

    /// `other ∘ self`
    pub fn compose(&self, other: &Isometry<R>) -> Isometry<R> {
        let mut generators = self.generators.clone();
        generators.extend(other.generators.iter().copied());
        Isometry { generators }
    }

    pub fn inverse(&self) -> Isometry<R> {
        Isometry {
            generators: self.generators.iter().rev().map(|g| g.inverse()).collect(),
        }
    }

    pub fn apply(&self, p: Point3<R>) -> Point3<R> {
        self.generators.iter().fold(p, |q, g| g.apply(q))
    }
}

/// `ψ^p ∘ T(h)^q` in closed form.
pub fn deck_apply<R: Real>(model: &CuspModel<R>, p: i64, q: i64, pt: Point3<R>) -> Point3<R> {
    Point3::new(
        pt.x + R::from_i64(p).unwrap() * model.tau,
        pt.y,
        pt.t + R::from_i64(q).unwrap() * model.h,
    )
}

/// Real Möbius map `z ↦ (az + b)/(cz + d)`; a negative determinant is
/// composed with `z ↦ −z̄` so the upper half-plane is preserved.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Mobius<R> {
    pub a: R,
    pub b: R,
    pub c: R,
    pub d: R,
}

impl<R: Real> Mobius<R> {
    pub fn identity() -> Self {
        Mobius {
            a: R::one(),
            b: R::zero(),
            c: R::zero(),
            d: R::one(),
        }
    }

    pub fn det(&self) -> R {
        self.a * self.d - self.b * self.c
    }

    /// The map sending `∞, 0, p` to the three given ideal points (`None` is `∞`).
    pub fn from_ideal_triple(p: R, targets: [Option<R>; 3]) -> Result<Self> {
        let one = R::one();
        let m = match targets {
            [None, Some(b), Some(c)] => Mobius {
                a: (c - b) / p,
                b,
                c: R::zero(),
                d: one,
            },
            [Some(a), None, Some(c)] => Mobius {
                a,
                b: p * (c - a),
                c: one,
                d: R::zero(),
            },
            [Some(a), Some(b), None] => {
                let g = -one / p;
                Mobius {
                    a: a * g,
                    b,
                    c: g,
                    d: one,
                }
            }
            [Some(a), Some(b), Some(c)] => {
                if a == c {
                    return Err(Error::domain("coincident ideal points"));
                }
                let g = (c - b) / (p * (a - c));
                Mobius {
                    a: a * g,
                    b,
                    c: g,
                    d: one,
                }
            }
            _ => return Err(Error::domain("coincident ideal points")),
        };
        if m.det() == R::zero() {
            return Err(Error::domain("coincident ideal points"));
        }
        Ok(m)
    }

    pub fn apply(&self, z: (R, R)) -> (R, R) {
        let w = cdiv(
            (self.a * z.0 + self.b, self.a * z.1),
            (self.c * z.0 + self.d, self.c * z.1),
        );
        if self.det() < R::zero() {
            (w.0, -w.1)
        } else {
            w
        }
    }

    /// Image of an ideal point; `None` is `∞`.
    pub fn apply_ideal(&self, x: Option<R>) -> Option<R> {
        match x {
            None => {
                if self.c == R::zero() {
                    None
                } else {
                    Some(self.a / self.c)
                }
            }
            Some(x) => {
                let den = self.c * x + self.d;
                if den == R::zero() {
                    None
                } else {
                    Some((self.a * x + self.b) / den)
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quad::gauss_legendre;

    #[test]
    fn distance_examples() {
        let e = std::f64::consts::E;
        assert!((dist_h2((0.0, 1.0), (0.0, e)).unwrap() - 1.0).abs() < 1e-14);
        assert_eq!(dist_h2((0.0, 1.0), (0.0, 1.0)).unwrap(), 0.0);
        assert!(dist_h2((0.0, 0.0), (0.0, 1.0)).is_err());
    }

    #[test]
    fn distance_matches_arc_quadrature() {
        // Geodesic through (0,1) and (3,1): semicircle centered at 1.5.
        let g = Geodesic::through_points((0.0, 1.0), (3.0, 1.0)).unwrap();
        let (c, _r) = g.center_radius().unwrap();
        let th0 = (1.0f64).atan2(0.0 - c);
        let th1 = (1.0f64).atan2(3.0 - c);
        // ds = r dθ / (r sin θ)
        let len = gauss_legendre(|th: f64| 1.0 / th.sin(), th1, th0, 64);
        let d = dist_h2((0.0, 1.0), (3.0, 1.0)).unwrap();
        assert!((len - d).abs() < 1e-10, "{len} vs {d}");
    }

    #[test]
    fn deck_closed_form() {
        let m = CuspModel::product(3.0, 1.0);
        let q = m.deck(1, 0).apply(Point3::new(0.0, 2.0, 5.0));
        assert_eq!(q, Point3::new(3.0, 2.0, 5.0));
        let id = Isometry::<f64>::identity();
        let p = Point3::new(0.3, 0.7, -1.0);
        assert_eq!(id.apply(p), p);
    }

    #[test]
    fn level_tori() {
        let mut m = CuspModel::product(1.0, 1.0);
        assert_eq!(level_torus_mean_curvature(&m), 0.5);
        m.ambient = AmbientKind::HyperbolicCusp;
        assert_eq!(level_torus_mean_curvature(&m), 1.0);
    }

    #[test]
    fn horocycles() {
        let m = CuspModel::product(3.0, 1.0);
        assert_eq!(horocycle_length(&m, 3.0).unwrap(), 1.0);
        assert_eq!(horocycle_length(&m, 1.0).unwrap(), 3.0);
        assert!(horocycle_length(&m, 0.5).is_err());
        let mut prev = f64::INFINITY;
        for k in 0..20 {
            let l = horocycle_length(&m, 1.0 + k as f64 * 10.0).unwrap();
            assert!(l < prev);
            prev = l;
        }
    }

    #[test]
    fn model_map_normalization() {
        let z = disk_to_halfplane((0.0f64, 0.0)).unwrap();
        assert!((z.0).abs() < 1e-15 && (z.1 - 1.0).abs() < 1e-15);
        assert!(disk_to_halfplane((0.0, 1.0)).is_err());
        assert_eq!(disk_ideal_to_halfplane((0.0, 1.0)), None);
        assert!((disk_ideal_to_halfplane((0.0f64, -1.0)).unwrap()).abs() < 1e-15);
        assert!((disk_ideal_to_halfplane((-1.0f64, 0.0)).unwrap() + 1.0).abs() < 1e-15);
    }

    #[test]
    fn diameter_maps_to_geodesic() {
        for k in 1..20 {
            let s = -0.95 + 0.1 * k as f64;
            let z = disk_to_halfplane((0.0, s)).unwrap();
            assert!(z.0.abs() < 1e-14);
            let z = disk_to_halfplane((s, 0.0)).unwrap();
            assert!((z.0 * z.0 + z.1 * z.1 - 1.0).abs() < 1e-13);
        }
    }

    #[test]
    fn reflection_involution() {
        let g = Geodesic::semicircle(-1.0f64, 2.0).unwrap();
        let p = Point3::new(0.4, 0.3, 1.0);
        let r = Isometry::from_generator(Generator::GeodesicReflection(g));
        let q = r.compose(&r).apply(p);
        assert!((q.x - p.x).abs() < 1e-12 && (q.y - p.y).abs() < 1e-12);
        for k in 1..10 {
            let on = g.point_at(k as f64 * 0.3);
            let im = g.reflect(on);
            assert!((im.0 - on.0).abs() < 1e-12 && (im.1 - on.1).abs() < 1e-12);
        }
    }

    #[test]
    fn f32_instance() {
        let d = dist_h2((0.0f32, 1.0), (0.0, std::f32::consts::E)).unwrap();
        assert!((d - 1.0).abs() < 1e-5);
    }

    #[test]
    fn mobius_from_triples_hits_targets() {
        for targets in [
            [None, Some(0.0f64), Some(-1.0)],
            [Some(2.0), Some(-1.0), Some(0.5)],
            [Some(0.0), None, Some(3.0)],
            [Some(1.0), Some(-1.0), None],
            [Some(-1.0), Some(0.0), Some(1.0)],
        ] {
            for p in [1.0f64, -1.0] {
                let m = Mobius::from_ideal_triple(p, targets).unwrap();
                for (src, dst) in [None, Some(0.0), Some(p)].into_iter().zip(targets) {
                    let img = m.apply_ideal(src);
                    match (img, dst) {
                        (None, None) => {}
                        (Some(a), Some(b)) => assert!((a - b).abs() < 1e-12),
                        _ => panic!("{src:?} -> {img:?}, expected {dst:?}"),
                    }
                }
                let w = m.apply((0.3, 0.7));
                assert!(w.1 > 0.0);
            }
        }
    }

    #[test]
    fn mobius_preserves_distance() {
        let m = Mobius::from_ideal_triple(-1.0, [Some(2.0f64), Some(-1.0), Some(0.5)]).unwrap();
        let (p, q) = ((0.2, 0.5), (-1.3, 2.0));
        let d0 = dist_h2(p, q).unwrap();
        let d1 = dist_h2(m.apply(p), m.apply(q)).unwrap();
        assert!((d0 - d1).abs() < 1e-12);
    }
}
