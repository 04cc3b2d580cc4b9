//! Numerical laboratory for minimal surfaces in cusped hyperbolic 3-manifolds
//! and in products of hyperbolic surfaces with a circle.
//!
//! Geometry lives in the half-space chart `(x, y, t)` with `y > 0`. The
//! scalar-level modules (`hyperbolic`, `barrier`, `ends`) are generic over
//! [`Real`]; the mesh-based solvers work in `f64`.

pub mod barrier;
pub mod curvature;
pub mod ends;
pub mod error;
pub mod graph;
pub mod hyperbolic;
pub mod mesh;
pub mod quad;
pub mod real;
pub mod reflection;
pub mod sweep;

pub use error::{Error, Result};
pub use real::Real;

pub type Point3f = hyperbolic::Point3<f64>;
pub type Point3f32 = hyperbolic::Point3<f32>;
pub type CuspModelf = hyperbolic::CuspModel<f64>;
pub type Isometryf = hyperbolic::Isometry<f64>;
pub type Geodesicf = hyperbolic::Geodesic<f64>;
pub type BarrierParamsf = barrier::BarrierParams<f64>;
pub type BarrierCurvef = barrier::BarrierCurve<f64>;
pub type BoundaryCurvef = ends::BoundaryCurve<f64>;
pub type TrappingSlabf = ends::TrappingSlab<f64>;
