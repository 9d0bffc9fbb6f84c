//! Jacobi-preconditioned conjugate gradient for sparse SPD systems.

use crate::error::{Error, Result};
use crate::sparse::CsrMatrix;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CgStats {
    pub iterations: usize,
    /// Achieved `|b - A x| / |b|`.
    pub relative_residual: f64,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Solves `A x = rhs` from a zero initial guess.
pub fn solve_spd(a: &CsrMatrix, rhs: &[f64], tol: f64, max_iter: usize) -> Result<Vec<f64>> {
    let mut x = vec![0.0; rhs.len()];
    solve_spd_from(a, rhs, &mut x, tol, max_iter)?;
    Ok(x)
}

/// Solves `A x = rhs` starting from the contents of `x`, overwriting it.
pub fn solve_spd_from(
    a: &CsrMatrix,
    rhs: &[f64],
    x: &mut [f64],
    tol: f64,
    max_iter: usize,
) -> Result<CgStats> {
    let n = a.dim();
    if rhs.len() != n || x.len() != n {
        return Err(Error::LengthMismatch {
            expected: n,
            actual: if rhs.len() != n { rhs.len() } else { x.len() },
        });
    }
    let rhs_norm = dot(rhs, rhs).sqrt();
    if rhs_norm == 0.0 {
        x.fill(0.0);
        return Ok(CgStats {
            iterations: 0,
            relative_residual: 0.0,
        });
    }

    let inv_diag: Vec<f64> = a.diagonal().iter().map(|d| 1.0 / d).collect();
    let mut r = a.mul_vec(x);
    for (ri, bi) in r.iter_mut().zip(rhs) {
        *ri = bi - *ri;
    }
    let mut residual = dot(&r, &r).sqrt() / rhs_norm;
    if residual <= tol {
        return Ok(CgStats {
            iterations: 0,
            relative_residual: residual,
        });
    }
    let mut z: Vec<f64> = r.iter().zip(&inv_diag).map(|(ri, di)| ri * di).collect();
    let mut p = z.clone();
    let mut ap = vec![0.0; n];
    let mut rz = dot(&r, &z);

    for iteration in 1..=max_iter {
        a.mul_vec_into(&p, &mut ap);
        let pap = dot(&p, &ap);
        if !(pap > 0.0) {
            // loss of positive definiteness or breakdown
            return Err(Error::NonConvergence {
                iterations: iteration,
                residual,
            });
        }
        let step = rz / pap;
        for i in 0..n {
            x[i] += step * p[i];
            r[i] -= step * ap[i];
        }
        residual = dot(&r, &r).sqrt() / rhs_norm;
        if residual <= tol {
            return Ok(CgStats {
                iterations: iteration,
                relative_residual: residual,
            });
        }
        for i in 0..n {
            z[i] = r[i] * inv_diag[i];
        }
        let rz_next = dot(&r, &z);
        let beta = rz_next / rz;
        rz = rz_next;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
    }
    Err(Error::NonConvergence {
        iterations: max_iter,
        residual,
    })
}
