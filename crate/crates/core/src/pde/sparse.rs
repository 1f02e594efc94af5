//! Compressed sparse row storage for complex matrices and a Jacobi-
//! preconditioned BiCGStab solver.

use num_complex::Complex64;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct SparseMatrix {
    n: usize,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<Complex64>,
}

impl SparseMatrix {
    /// Builds an `n × n` matrix, summing duplicate entries.
    pub fn from_triplets(n: usize, mut trip: Vec<(usize, usize, Complex64)>) -> Self {
        trip.sort_by_key(|&(i, j, _)| (i, j));
        let mut row_ptr = vec![0; n + 1];
        let mut cols = Vec::with_capacity(trip.len());
        let mut vals: Vec<Complex64> = Vec::with_capacity(trip.len());
        let mut last: Option<(usize, usize)> = None;
        for (i, j, v) in trip {
            if last == Some((i, j)) {
                *vals.last_mut().unwrap() += v;
            } else {
                cols.push(j);
                vals.push(v);
                row_ptr[i + 1] += 1;
                last = Some((i, j));
            }
        }
        for i in 0..n {
            row_ptr[i + 1] += row_ptr[i];
        }
        SparseMatrix { n, row_ptr, cols, vals }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_triplets(n, (0..n).map(|i| (i, i, Complex64::new(1.0, 0.0))).collect())
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        let row = self.row_ptr[i]..self.row_ptr[i + 1];
        match self.cols[row.clone()].binary_search(&j) {
            Ok(k) => self.vals[row.start + k],
            Err(_) => Complex64::new(0.0, 0.0),
        }
    }

    pub fn matvec(&self, x: &[Complex64]) -> Vec<Complex64> {
        let mut y = vec![Complex64::new(0.0, 0.0); self.n];
        self.matvec_into(x, &mut y);
        y
    }

    fn matvec_into(&self, x: &[Complex64], y: &mut [Complex64]) {
        for (i, yi) in y.iter_mut().enumerate() {
            let mut acc = Complex64::new(0.0, 0.0);
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                acc += self.vals[k] * x[self.cols[k]];
            }
            *yi = acc;
        }
    }

    pub fn diagonal(&self) -> Vec<Complex64> {
        (0..self.n).map(|i| self.get(i, i)).collect()
    }

    /// `α I + β self`.
    pub fn shifted(&self, alpha: Complex64, beta: Complex64) -> SparseMatrix {
        let mut trip: Vec<_> = (0..self.n)
            .flat_map(|i| (self.row_ptr[i]..self.row_ptr[i + 1]).map(move |k| (i, k)))
            .map(|(i, k)| (i, self.cols[k], self.vals[k] * beta))
            .collect();
        trip.extend((0..self.n).map(|i| (i, i, alpha)));
        SparseMatrix::from_triplets(self.n, trip)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverConfig {
    pub rel_tol: f64,
    pub max_iter: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig { rel_tol: 1e-12, max_iter: 10_000 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveStats {
    pub iterations: usize,
    pub residual: f64,
}

fn dot(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

fn norm(a: &[Complex64]) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Solves `m x = b` by BiCGStab with Jacobi preconditioning, starting from
/// the contents of `x`.
pub fn bicgstab(m: &SparseMatrix, b: &[Complex64], x: &mut [Complex64], cfg: SolverConfig) -> Result<SolveStats> {
    let n = m.dim();
    let inv_diag: Vec<Complex64> =
        m.diagonal().into_iter().map(|d| if d.norm() > 0.0 { d.inv() } else { Complex64::new(1.0, 0.0) }).collect();
    let b_norm = norm(b);
    if b_norm == 0.0 {
        x.iter_mut().for_each(|v| *v = Complex64::new(0.0, 0.0));
        return Ok(SolveStats { iterations: 0, residual: 0.0 });
    }
    let target = cfg.rel_tol * b_norm;
    let zero = Complex64::new(0.0, 0.0);

    let mut r = m.matvec(x);
    for (ri, bi) in r.iter_mut().zip(b) {
        *ri = bi - *ri;
    }
    let mut res = norm(&r);
    if res <= target {
        return Ok(SolveStats { iterations: 0, residual: res / b_norm });
    }
    let mut r_hat = r.clone();
    let (mut rho, mut alpha, mut omega) =
        (Complex64::new(1.0, 0.0), Complex64::new(1.0, 0.0), Complex64::new(1.0, 0.0));
    let mut v = vec![zero; n];
    let mut p = vec![zero; n];
    let mut y = vec![zero; n];
    let mut s = vec![zero; n];
    let mut z = vec![zero; n];
    let mut t = vec![zero; n];

    let mut iterations = cfg.max_iter;
    for it in 1..=cfg.max_iter {
        let rho_new = dot(&r_hat, &r);
        if rho_new.norm() < f64::MIN_POSITIVE * 1e10 {
            // Breakdown: restart the shadow residual.
            r_hat.copy_from_slice(&r);
            rho = Complex64::new(1.0, 0.0);
            alpha = rho;
            omega = rho;
            v.iter_mut().for_each(|e| *e = zero);
            p.iter_mut().for_each(|e| *e = zero);
            continue;
        }
        let beta = (rho_new / rho) * (alpha / omega);
        rho = rho_new;
        for k in 0..n {
            p[k] = r[k] + beta * (p[k] - omega * v[k]);
            y[k] = inv_diag[k] * p[k];
        }
        m.matvec_into(&y, &mut v);
        alpha = rho / dot(&r_hat, &v);
        for k in 0..n {
            s[k] = r[k] - alpha * v[k];
        }
        if norm(&s) <= target {
            for k in 0..n {
                x[k] += alpha * y[k];
            }
            let mut rr = m.matvec(x);
            for (ri, bi) in rr.iter_mut().zip(b) {
                *ri = bi - *ri;
            }
            res = norm(&rr);
            if res <= target * 10.0 {
                return Ok(SolveStats { iterations: it, residual: res / b_norm });
            }
            r = rr;
            r_hat.copy_from_slice(&r);
            rho = Complex64::new(1.0, 0.0);
            alpha = rho;
            omega = rho;
            v.iter_mut().for_each(|e| *e = zero);
            p.iter_mut().for_each(|e| *e = zero);
            continue;
        }
        for k in 0..n {
            z[k] = inv_diag[k] * s[k];
        }
        m.matvec_into(&z, &mut t);
        let tt = dot(&t, &t);
        omega = if tt.norm() > 0.0 { dot(&t, &s) / tt } else { zero };
        for k in 0..n {
            x[k] += alpha * y[k] + omega * z[k];
            r[k] = s[k] - omega * t[k];
        }
        let next = norm(&r);
        if !next.is_finite() {
            iterations = it;
            break;
        }
        res = next;
        if res <= target {
            return Ok(SolveStats { iterations: it, residual: res / b_norm });
        }
    }
    Err(Error::SolverDivergence { iterations, residual: res / b_norm })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn duplicates_are_summed() {
        let m = SparseMatrix::from_triplets(2, vec![(0, 0, c(1.0, 0.0)), (1, 0, c(0.0, 2.0)), (0, 0, c(3.0, 0.0))]);
        assert_eq!(m.get(0, 0), c(4.0, 0.0));
        assert_eq!(m.get(1, 0), c(0.0, 2.0));
        assert_eq!(m.get(1, 1), c(0.0, 0.0));
        assert_eq!(m.nnz(), 2);
    }

    #[test]
    fn solves_non_hermitian_tridiagonal() {
        let n = 200;
        let mut trip = Vec::new();
        for i in 0..n {
            trip.push((i, i, c(4.0, 1.0)));
            if i > 0 {
                trip.push((i, i - 1, c(-1.0, 0.5)));
            }
            if i + 1 < n {
                trip.push((i, i + 1, c(-1.0, -0.3)));
            }
        }
        let m = SparseMatrix::from_triplets(n, trip);
        let x_true: Vec<_> = (0..n).map(|k| c((k as f64).sin(), (k as f64 * 0.1).cos())).collect();
        let b = m.matvec(&x_true);
        let mut x = vec![c(0.0, 0.0); n];
        let stats = bicgstab(&m, &b, &mut x, SolverConfig::default()).unwrap();
        assert!(stats.residual <= 1e-11);
        let err: f64 = x.iter().zip(&x_true).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        assert!(err < 1e-9);
    }

    #[test]
    fn inconsistent_system_reports_divergence() {
        let one = c(1.0, 0.0);
        let m = SparseMatrix::from_triplets(2, vec![(0, 0, one), (0, 1, one), (1, 0, one), (1, 1, one)]);
        let mut x = vec![c(0.0, 0.0); 2];
        let r = bicgstab(&m, &[one, c(0.0, 0.0)], &mut x, SolverConfig { rel_tol: 1e-12, max_iter: 50 });
        match r {
            Err(Error::SolverDivergence { iterations, residual }) => {
                assert!((1..=50).contains(&iterations));
                assert!(residual.is_finite() && residual > 1e-3);
            }
            other => panic!("{other:?}"),
        }
    }
}
