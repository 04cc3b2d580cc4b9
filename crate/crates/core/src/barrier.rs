//! Ruled minimal surfaces `(u, α(v), v + λu)` in the product model and the
//! barrier families built from them.

use serde::{Deserialize, Serialize};

use crate::mesh::TriMesh;
use crate::quad::adaptive_simpson;
use crate::real::Real;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BarrierParams<R> {
    pub lambda: R,
    #[serde(rename = "T")]
    pub t_const: R,
    pub t_offset: R,
}

impl<R: Real> BarrierParams<R> {
    pub fn new(lambda: R, t_const: R) -> Self {
        BarrierParams {
            lambda,
            t_const,
            t_offset: R::zero(),
        }
    }

    pub fn with_offset(mut self, t_offset: R) -> Self {
        self.t_offset = t_offset;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.lambda >= R::zero()) {
            return Err(Error::domain("lambda must be non-negative"));
        }
        if !(self.t_const > R::one()) {
            return Err(Error::domain("T must exceed 1"));
        }
        Ok(())
    }

    /// Maximum of α: `λ⁻¹√(T−1)`, or `T` on the `λ = 0` branch.
    pub fn alpha_max(&self) -> R {
        if self.lambda == R::zero() {
            self.t_const
        } else {
            (self.t_const - R::one()).sqrt() / self.lambda
        }
    }

    /// Initial slope `α′(0)`.
    pub fn initial_slope(&self) -> R {
        if self.lambda == R::zero() {
            self.t_const
        } else {
            (self.t_const - R::one()).sqrt() / self.lambda
        }
    }

    /// Deviation of the conserved quantity at `(α, α′)`.
    ///
    /// For `λ > 0` this is `(1+λ²α′²)(1+λ²α²) − T`; on the `λ = 0` branch it is
    /// `α² + α′² − T²`, the invariant of `α = T sin v`.
    pub fn first_integral_residual(&self, a: R, ap: R) -> R {
        let l2 = self.lambda * self.lambda;
        if self.lambda == R::zero() {
            a * a + ap * ap - self.t_const * self.t_const
        } else {
            (R::one() + l2 * ap * ap) * (R::one() + l2 * a * a) - self.t_const
        }
    }
}

/// Right-hand side `α″ = −α(1+λ²α′²)/(1+λ²α²)`.
pub fn alpha_second<R: Real>(a: R, ap: R, lambda: R) -> R {
    let l2 = lambda * lambda;
    -a * (R::one() + l2 * ap * ap) / (R::one() + l2 * a * a)
}

/// Mean curvature of `(u, α(v), v + λu)` in the product metric.
pub fn ruled_mean_curvature<R: Real>(alpha: R, alpha_p: R, alpha_pp: R, lambda: R) -> Result<R> {
    if !(alpha > R::zero()) {
        return Err(Error::domain("ruled_mean_curvature needs alpha > 0"));
    }
    let l2 = lambda * lambda;
    let z2 = alpha_p * alpha_p * (R::one() + l2 * alpha * alpha) + alpha * alpha;
    let z3 = z2 * z2.sqrt();
    let bracket =
        alpha_pp * (R::one() + l2 * alpha * alpha) + alpha * (R::one() + l2 * alpha_p * alpha_p);
    Ok(-(alpha * alpha / z3) * bracket / R::lit(2.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BarrierSample<R> {
    pub v: R,
    pub alpha: R,
    pub alpha_prime: R,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BarrierCurve<R> {
    pub samples: Vec<BarrierSample<R>>,
    pub v0: R,
    pub params: BarrierParams<R>,
}

impl<R: Real> BarrierCurve<R> {
    pub fn residuals(&self) -> Vec<R> {
        self.samples
            .iter()
            .map(|s| self.params.first_integral_residual(s.alpha, s.alpha_prime))
            .collect()
    }

    pub fn max_residual(&self) -> R {
        self.residuals()
            .into_iter()
            .fold(R::zero(), |m, r| m.max(r.abs()))
    }

    pub fn max_alpha(&self) -> R {
        // The sampled maximum is refined by the Hermite interpolant around the peak.
        let (k, _) =
            self.samples
                .iter()
                .enumerate()
                .fold((0, R::neg_infinity()), |(bk, ba), (k, s)| {
                    if s.alpha > ba {
                        (k, s.alpha)
                    } else {
                        (bk, ba)
                    }
                });
        let lo = if k > 0 {
            self.samples[k - 1].v
        } else {
            self.samples[k].v
        };
        let hi = if k + 1 < self.samples.len() {
            self.samples[k + 1].v
        } else {
            self.samples[k].v
        };
        let root = bisect(|v| self.eval(v).1, lo, hi, 200);
        self.eval(root).0
    }

    /// Cubic Hermite interpolation of `(α, α′)` at `v ∈ [0, v0]`.
    pub fn eval(&self, v: R) -> (R, R) {
        let s = &self.samples;
        let k = match s.binary_search_by(|p| p.v.partial_cmp(&v).unwrap()) {
            Ok(k) => return (s[k].alpha, s[k].alpha_prime),
            Err(0) => return (s[0].alpha, s[0].alpha_prime),
            Err(k) if k >= s.len() => {
                let l = s.last().unwrap();
                return (l.alpha, l.alpha_prime);
            }
            Err(k) => k - 1,
        };
        let (a, b) = (s[k], s[k + 1]);
        let h = b.v - a.v;
        let x = (v - a.v) / h;
        let (one, two, three) = (R::one(), R::lit(2.0), R::lit(3.0));
        let x2 = x * x;
        let x3 = x2 * x;
        let h00 = two * x3 - three * x2 + one;
        let h10 = x3 - two * x2 + x;
        let h01 = -two * x3 + three * x2;
        let h11 = x3 - x2;
        let val = h00 * a.alpha + h10 * h * a.alpha_prime + h01 * b.alpha + h11 * h * b.alpha_prime;
        let six = R::lit(6.0);
        let d00 = (six * x2 - six * x) / h;
        let d10 = three * x2 - R::lit(4.0) * x + one;
        let d01 = (-six * x2 + six * x) / h;
        let d11 = three * x2 - two * x;
        let der = d00 * a.alpha + d10 * a.alpha_prime + d01 * b.alpha + d11 * b.alpha_prime;
        (val, der)
    }
}

fn bisect<R: Real, F: Fn(R) -> R>(f: F, mut lo: R, mut hi: R, iters: usize) -> R {
    let mut flo = f(lo);
    let two = R::lit(2.0);
    for _ in 0..iters {
        let mid = (lo + hi) / two;
        if mid <= lo || mid >= hi {
            break;
        }
        let fm = f(mid);
        if (fm > R::zero()) == (flo > R::zero()) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    (lo + hi) / two
}

fn rk4_step<R: Real>(a: R, ap: R, lambda: R, h: R) -> (R, R) {
    let two = R::lit(2.0);
    let six = R::lit(6.0);
    let f = |a: R, ap: R| (ap, alpha_second(a, ap, lambda));
    let (k1a, k1p) = f(a, ap);
    let (k2a, k2p) = f(a + h / two * k1a, ap + h / two * k1p);
    let (k3a, k3p) = f(a + h / two * k2a, ap + h / two * k2p);
    let (k4a, k4p) = f(a + h * k3a, ap + h * k3p);
    (
        a + h / six * (k1a + two * k2a + two * k3a + k4a),
        ap + h / six * (k1p + two * k2p + two * k3p + k4p),
    )
}

/// Fixed-step RK4 integration of the ruled-surface ODE from `α(0) = 0`,
/// `α′(0) = params.initial_slope()`, stopped at the return to `α = 0`.
///
/// This is used for every `λ`, including the `λ = 0` branch where the ODE
/// reduces to `α″ = −α`.
pub fn integrate_ode<R: Real>(params: BarrierParams<R>, step: R) -> Result<BarrierCurve<R>> {
    params.validate()?;
    if !(step > R::zero()) {
        return Err(Error::domain("step must be positive"));
    }
    let lambda = params.lambda;
    let mut samples = vec![BarrierSample {
        v: R::zero(),
        alpha: R::zero(),
        alpha_prime: params.initial_slope(),
    }];
    let (mut v, mut a, mut ap) = (R::zero(), R::zero(), params.initial_slope());
    // Generous bound on the positivity interval: v0 ≤ 2(√(T−1)+1)·π/2 + π.
    let vmax = R::lit(4.0) * (params.t_const.sqrt() + R::one()) * R::PI();
    let tol = R::lit(1e-8).max(R::epsilon() * R::lit(100.0));
    loop {
        let (na, nap) = rk4_step(a, ap, lambda, step);
        if na <= R::zero() && ap < R::zero() {
            // Bisection on a single RK4 sub-step from the last accepted state.
            let mut lo = R::zero();
            let mut hi = step;
            let two = R::lit(2.0);
            let mut end = (na, nap, step);
            for _ in 0..200 {
                let mid = (lo + hi) / two;
                let (ma, map) = rk4_step(a, ap, lambda, mid);
                end = (ma, map, mid);
                if ma.abs() <= tol * R::lit(1e-4) || hi - lo <= R::epsilon() * (v + step) {
                    break;
                }
                if ma > R::zero() {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            if end.0.abs() > tol {
                return Err(Error::numeric(format!(
                    "zero crossing not resolved: |alpha| = {}",
                    end.0.abs()
                )));
            }
            let v0 = v + end.2;
            samples.push(BarrierSample {
                v: v0,
                alpha: R::zero(),
                alpha_prime: end.1,
            });
            return Ok(BarrierCurve {
                samples,
                v0,
                params,
            });
        }
        v = v + step;
        a = na;
        ap = nap;
        samples.push(BarrierSample {
            v,
            alpha: a,
            alpha_prime: ap,
        });
        if v > vmax {
            return Err(Error::numeric(format!(
                "alpha did not return to zero before v = {vmax}"
            )));
        }
    }
}

/// Barrier profile: the analytic branch `α = T sin v` when `λ = 0`, otherwise
/// the RK4 solution.
pub fn integrate_alpha<R: Real>(params: BarrierParams<R>, step: R) -> Result<BarrierCurve<R>> {
    params.validate()?;
    if !(step > R::zero()) {
        return Err(Error::domain("step must be positive"));
    }
    if params.lambda > R::zero() {
        return integrate_ode(params, step);
    }
    let pi = R::PI();
    let n = (pi / step).ceil().to_usize().unwrap_or(1).max(2);
    let dv = pi / R::from_usize(n).unwrap();
    let tt = params.t_const;
    let samples = (0..=n)
        .map(|k| {
            let v = if k == n {
                pi
            } else {
                dv * R::from_usize(k).unwrap()
            };
            let alpha = if k == 0 || k == n {
                R::zero()
            } else {
                tt * v.sin()
            };
            BarrierSample {
                v,
                alpha,
                alpha_prime: tt * v.cos(),
            }
        })
        .collect();
    Ok(BarrierCurve {
        samples,
        v0: pi,
        params,
    })
}

/// Default step: fine enough for a `1e-8` first-integral residual on `T ≤ 1e4`.
pub fn default_step<R: Real>(params: &BarrierParams<R>) -> R {
    R::lit(2e-3) / (R::one() + params.t_const.sqrt().sqrt())
}

/// Length of the positivity interval, computed by quadrature.
///
/// With `α = α_max sin θ` the improper integral `2∫ dα/α′` becomes
/// `2∫₀^{π/2} √(1 + λ²α_max² sin²θ) dθ`, which has a smooth integrand.
pub fn v0_of_t<R: Real>(lambda: R, t_const: R) -> Result<R> {
    if !(lambda > R::zero()) {
        return Err(Error::domain("v0_of_T needs lambda > 0"));
    }
    if !(t_const > R::one()) {
        return Err(Error::domain("T must exceed 1"));
    }
    let amax = (t_const - R::one()).sqrt() / lambda;
    let l2a2 = lambda * lambda * amax * amax;
    let half_pi = R::FRAC_PI_2();
    let tol = R::lit(1e-13).max(R::epsilon() * R::lit(64.0)) * (R::one() + amax);
    let integral = adaptive_simpson(
        |th: R| (R::one() + l2a2 * th.sin() * th.sin()).sqrt(),
        R::zero(),
        half_pi,
        tol,
        40,
    )
    .map_err(|e| {
        Error::numeric(format!(
            "v0 quadrature failed for lambda={lambda}, T={t_const}: {e}"
        ))
    })?;
    Ok(R::lit(2.0) * integral)
}

/// Largest `v` on the rising branch with `α(v) ≤ M`.
pub fn compact_convergence_gap<R: Real>(lambda: R, t_const: R, m: R) -> Result<R> {
    if !(m > R::zero()) {
        return Err(Error::domain("M must be positive"));
    }
    if !(lambda >= R::zero()) {
        return Err(Error::domain("lambda must be non-negative"));
    }
    if !(t_const > R::one() + lambda * lambda * m * m) {
        return Err(Error::domain("T must exceed 1 + lambda^2 M^2"));
    }
    if lambda == R::zero() {
        if m > t_const {
            return Err(Error::domain(
                "M must not exceed T on the lambda = 0 branch",
            ));
        }
        return Ok((m / t_const).asin());
    }
    let params = BarrierParams::new(lambda, t_const);
    let step = default_step(&params);
    let (mut v, mut a, mut ap) = (R::zero(), R::zero(), params.initial_slope());
    loop {
        let (na, nap) = rk4_step(a, ap, lambda, step);
        if na >= m {
            let s = bisect(|s| rk4_step(a, ap, lambda, s).0 - m, R::zero(), step, 200);
            return Ok(v + s);
        }
        if nap <= R::zero() {
            return Err(Error::numeric("alpha peaked below M"));
        }
        v = v + step;
        a = na;
        ap = nap;
    }
}

/// Analytic upper bound `Mλ/√(T/(1+λ²M²) − 1)` on the compact-convergence gap.
pub fn gap_bound<R: Real>(lambda: R, t_const: R, m: R) -> R {
    m * lambda / (t_const / (R::one() + lambda * lambda * m * m) - R::one()).sqrt()
}

/// A sampled piece of `S^λ_T(t_offset)`.
#[derive(Debug, Clone)]
pub struct RuledPatch {
    pub mesh: TriMesh,
    pub params: BarrierParams<f64>,
}

/// Mesh of `(u, α(v), v + λu + t_offset)` over `u ∈ u_range`, `v ∈ [0, v0]`.
///
/// The `v` samples are taken from the barrier curve (subsampled to `nv` rows).
pub fn barrier_mesh(
    curve: &BarrierCurve<f64>,
    u_range: (f64, f64),
    nu: usize,
    nv: usize,
) -> Result<RuledPatch> {
    if nu < 2 || nv < 2 {
        return Err(Error::domain(
            "barrier mesh resolution must be at least 2x2",
        ));
    }
    let p = curve.params;
    let mut vs: Vec<(f64, f64)> = (0..nv)
        .map(|j| {
            let v = curve.v0 * j as f64 / (nv - 1) as f64;
            (v, curve.eval(v).0.max(0.0))
        })
        .collect();
    vs[0] = (0.0, 0.0);
    vs[nv - 1] = (curve.v0, 0.0);
    let mesh = TriMesh::grid(nu, nv, |i, j| {
        let u = u_range.0 + (u_range.1 - u_range.0) * i as f64 / (nu - 1) as f64;
        let (v, a) = vs[j];
        [u, a, v + p.lambda * u + p.t_offset]
    });
    Ok(RuledPatch { mesh, params: p })
}
