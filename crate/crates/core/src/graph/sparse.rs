//! Compressed sparse rows and Jacobi-preconditioned conjugate gradients.

use std::collections::BTreeSet;

use rayon::prelude::*;

#[derive(Debug, Clone)]
pub(crate) struct Csr {
    pub n: usize,
    pub row_ptr: Vec<usize>,
    pub col: Vec<usize>,
    pub val: Vec<f64>,
}

impl Csr {
    /// Symmetric pattern from the given off-diagonal pairs; the diagonal is always present.
    pub fn from_pairs(n: usize, pairs: &BTreeSet<(usize, usize)>) -> Self {
        let mut rows: Vec<Vec<usize>> = (0..n).map(|i| vec![i]).collect();
        for &(i, j) in pairs {
            if i != j {
                rows[i].push(j);
                rows[j].push(i);
            }
        }
        let mut row_ptr = Vec::with_capacity(n + 1);
        let mut col = Vec::new();
        row_ptr.push(0);
        for mut r in rows {
            r.sort_unstable();
            r.dedup();
            col.extend(r);
            row_ptr.push(col.len());
        }
        let val = vec![0.0; col.len()];
        Csr {
            n,
            row_ptr,
            col,
            val,
        }
    }

    pub fn position(&self, i: usize, j: usize) -> usize {
        let row = &self.col[self.row_ptr[i]..self.row_ptr[i + 1]];
        self.row_ptr[i]
            + row
                .binary_search(&j)
                .expect("entry outside sparsity pattern")
    }

    pub fn clear(&mut self) {
        self.val.iter_mut().for_each(|v| *v = 0.0);
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.val[self.position(i, i)]).collect()
    }

    pub fn matvec(&self, x: &[f64], y: &mut [f64]) {
        y.par_iter_mut().enumerate().for_each(|(i, yi)| {
            let mut s = 0.0;
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                s += self.val[k] * x[self.col[k]];
            }
            *yi = s;
        });
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct CgStats {
    pub relative_residual: f64,
}

/// Solve `A x = b` for symmetric positive definite `A`, starting from `x`.
pub(crate) fn pcg(a: &Csr, b: &[f64], x: &mut [f64], rel_tol: f64, max_iter: usize) -> CgStats {
    let n = a.n;
    let inv_diag: Vec<f64> = a
        .diagonal()
        .iter()
        .map(|&d| if d > 0.0 { 1.0 / d } else { 1.0 })
        .collect();
    let mut r = vec![0.0; n];
    a.matvec(x, &mut r);
    for i in 0..n {
        r[i] = b[i] - r[i];
    }
    let bnorm = dot(b, b).sqrt().max(f64::MIN_POSITIVE);
    let mut z: Vec<f64> = r.iter().zip(&inv_diag).map(|(r, d)| r * d).collect();
    let mut p = z.clone();
    let mut rz = dot(&r, &z);
    let mut ap = vec![0.0; n];
    let mut it = 0;
    let mut rel = dot(&r, &r).sqrt() / bnorm;
    while it < max_iter && rel > rel_tol {
        a.matvec(&p, &mut ap);
        let pap = dot(&p, &ap);
        if !(pap > 0.0) {
            break;
        }
        let alpha = rz / pap;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        for i in 0..n {
            z[i] = r[i] * inv_diag[i];
        }
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
        rel = dot(&r, &r).sqrt() / bnorm;
        it += 1;
    }
    CgStats {
        relative_residual: rel,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pcg_solves_tridiagonal() {
        let n = 50;
        let pairs: BTreeSet<(usize, usize)> = (0..n - 1).map(|i| (i, i + 1)).collect();
        let mut a = Csr::from_pairs(n, &pairs);
        for i in 0..n {
            let p = a.position(i, i);
            a.val[p] = 2.0;
            if i + 1 < n {
                let p = a.position(i, i + 1);
                a.val[p] = -1.0;
                let p = a.position(i + 1, i);
                a.val[p] = -1.0;
            }
        }
        let exact: Vec<f64> = (0..n).map(|i| (i as f64 * 0.3).sin()).collect();
        let mut b = vec![0.0; n];
        a.matvec(&exact, &mut b);
        let mut x = vec![0.0; n];
        let st = pcg(&a, &b, &mut x, 1e-13, 1000);
        assert!(st.relative_residual <= 1e-13);
        for i in 0..n {
            assert!((x[i] - exact[i]).abs() < 1e-10);
        }
    }
}
