//! Cyclic Jacobi eigensolver for small dense Hermitian matrices.
//!
//! Each rotation first removes the phase of the pivot element with a diagonal
//! unitary, then applies a real Jacobi rotation. Sweeps continue until the
//! off-diagonal Frobenius norm falls below `1e-15` of the total norm.

use nalgebra::{DMatrix, DVector};

use super::operator::{HermitianOperator, C64};
use crate::error::{Error, Result};

const MAX_SWEEPS: usize = 100;
const OFF_DIAGONAL_TOLERANCE: f64 = 1e-15;

/// Eigendecomposition `H = V diag(values) V†` with ascending `values`.
#[derive(Debug, Clone)]
pub struct Eigen {
    pub values: DVector<f64>,
    /// Orthonormal eigenvectors, one per column.
    pub vectors: DMatrix<C64>,
}

impl Eigen {
    pub fn max(&self) -> (f64, DVector<C64>) {
        let k = self.values.len() - 1;
        (self.values[k], self.vectors.column(k).into_owned())
    }

    /// Gap between the two largest eigenvalues (infinite for 1x1).
    pub fn top_gap(&self) -> f64 {
        let n = self.values.len();
        if n < 2 {
            f64::INFINITY
        } else {
            self.values[n - 1] - self.values[n - 2]
        }
    }
}

pub fn hermitian_eig(h: &HermitianOperator) -> Result<Eigen> {
    jacobi_eigen(h.matrix())
}

pub(crate) fn jacobi_eigen(matrix: &DMatrix<C64>) -> Result<Eigen> {
    let n = matrix.nrows();
    let mut a = (matrix + matrix.adjoint()) * C64::new(0.5, 0.0);
    let mut v = DMatrix::<C64>::identity(n, n);
    let total: f64 = a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    let threshold = OFF_DIAGONAL_TOLERANCE * total.max(f64::MIN_POSITIVE);

    let mut off = off_diagonal_norm(&a);
    let mut sweeps = 0;
    while off > threshold {
        if sweeps == MAX_SWEEPS {
            return Err(Error::EigenNoConvergence { sweeps, residual: off });
        }
        for p in 0..n - 1 {
            for q in p + 1..n {
                rotate(&mut a, &mut v, p, q);
            }
        }
        sweeps += 1;
        off = off_diagonal_norm(&a);
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(i, i)].re.total_cmp(&a[(j, j)].re));
    let values = DVector::from_iterator(n, order.iter().map(|&i| a[(i, i)].re));
    let mut vectors = DMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        vectors.set_column(dst, &v.column(src));
    }
    Ok(Eigen { values, vectors })
}

fn off_diagonal_norm(a: &DMatrix<C64>) -> f64 {
    let n = a.nrows();
    let mut s = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                s += a[(i, j)].norm_sqr();
            }
        }
    }
    s.sqrt()
}

fn rotate(a: &mut DMatrix<C64>, v: &mut DMatrix<C64>, p: usize, q: usize) {
    let apq = a[(p, q)];
    let mag = apq.norm();
    if mag == 0.0 {
        return;
    }
    let phase = apq / mag; // e^{iφ}
    let app = a[(p, p)].re;
    let aqq = a[(q, q)].re;
    let theta = (aqq - app) / (2.0 * mag);
    let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
    let t = if theta == 0.0 { 1.0 } else { t };
    let c = 1.0 / (t * t + 1.0).sqrt();
    let s = t * c;
    // U restricted to (p, q): [[c, s], [-s e^{-iφ}, c e^{-iφ}]]
    let u_pp = C64::new(c, 0.0);
    let u_pq = C64::new(s, 0.0);
    let u_qp = -phase.conj() * s;
    let u_qq = phase.conj() * c;

    let n = a.nrows();
    for k in 0..n {
        let akp = a[(k, p)];
        let akq = a[(k, q)];
        a[(k, p)] = akp * u_pp + akq * u_qp;
        a[(k, q)] = akp * u_pq + akq * u_qq;
    }
    for k in 0..n {
        let apk = a[(p, k)];
        let aqk = a[(q, k)];
        a[(p, k)] = u_pp.conj() * apk + u_qp.conj() * aqk;
        a[(q, k)] = u_pq.conj() * apk + u_qq.conj() * aqk;
    }
    a[(p, q)] = C64::new(0.0, 0.0);
    a[(q, p)] = C64::new(0.0, 0.0);
    a[(p, p)] = C64::new(a[(p, p)].re, 0.0);
    a[(q, q)] = C64::new(a[(q, q)].re, 0.0);
    for k in 0..n {
        let vkp = v[(k, p)];
        let vkq = v[(k, q)];
        v[(k, p)] = vkp * u_pp + vkq * u_qp;
        v[(k, q)] = vkp * u_pq + vkq * u_qq;
    }
}
