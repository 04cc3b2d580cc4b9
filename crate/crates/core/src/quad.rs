//! One-dimensional quadrature used by the barrier and oracle code.

use crate::real::Real;
use crate::{Error, Result};

/// Adaptive Simpson quadrature of `f` over `[a, b]` to absolute tolerance `tol`.
pub fn adaptive_simpson<R: Real, F: Fn(R) -> R>(
    f: F,
    a: R,
    b: R,
    tol: R,
    max_depth: u32,
) -> Result<R> {
    let two = R::lit(2.0);
    let m = (a + b) / two;
    let (fa, fm, fb) = (f(a), f(m), f(b));
    let whole = simpson(a, b, fa, fm, fb);
    let mut failed = false;
    let v = recurse(&f, a, b, fa, fm, fb, whole, tol, max_depth, &mut failed);
    if failed || !v.is_finite() {
        return Err(Error::numeric(format!(
            "adaptive quadrature on [{a}, {b}] did not converge within depth {max_depth}"
        )));
    }
    Ok(v)
}

fn simpson<R: Real>(a: R, b: R, fa: R, fm: R, fb: R) -> R {
    (b - a) / R::lit(6.0) * (fa + R::lit(4.0) * fm + fb)
}

#[allow(clippy::too_many_arguments)]
fn recurse<R: Real, F: Fn(R) -> R>(
    f: &F,
    a: R,
    b: R,
    fa: R,
    fm: R,
    fb: R,
    whole: R,
    tol: R,
    depth: u32,
    failed: &mut bool,
) -> R {
    let two = R::lit(2.0);
    let m = (a + b) / two;
    let lm = (a + m) / two;
    let rm = (m + b) / two;
    let (flm, frm) = (f(lm), f(rm));
    let left = simpson(a, m, fa, flm, fm);
    let right = simpson(m, b, fm, frm, fb);
    let delta = left + right - whole;
    if delta.abs() <= R::lit(15.0) * tol {
        return left + right + delta / R::lit(15.0);
    }
    if depth == 0 {
        *failed = true;
        return left + right;
    }
    recurse(f, a, m, fa, flm, fm, left, tol / two, depth - 1, failed)
        + recurse(f, m, b, fm, frm, fb, right, tol / two, depth - 1, failed)
}

/// Composite Gauss-Legendre (5 points per panel) over `[a, b]` with `panels` panels.
pub fn gauss_legendre<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, panels: usize) -> f64 {
    const X: [f64; 5] = [
        0.0,
        -0.538_469_310_105_683_1,
        0.538_469_310_105_683_1,
        -0.906_179_845_938_664,
        0.906_179_845_938_664,
    ];
    const W: [f64; 5] = [
        0.568_888_888_888_888_9,
        0.478_628_670_499_366_5,
        0.478_628_670_499_366_5,
        0.236_926_885_056_189_08,
        0.236_926_885_056_189_08,
    ];
    let h = (b - a) / panels as f64;
    let mut sum = 0.0;
    for k in 0..panels {
        let c = a + (k as f64 + 0.5) * h;
        for (x, w) in X.iter().zip(W.iter()) {
            sum += w * f(c + 0.5 * h * x);
        }
    }
    sum * 0.5 * h
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn simpson_polynomial() {
        let v = adaptive_simpson(|x: f64| x * x * x, 0.0, 2.0, 1e-12, 30).unwrap();
        assert!((v - 4.0).abs() < 1e-12);
    }

    #[test]
    fn gauss_sine() {
        let v = gauss_legendre(f64::sin, 0.0, std::f64::consts::PI, 4);
        assert!((v - 2.0).abs() < 1e-10);
    }
}
