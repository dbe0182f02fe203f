//! Conjugate gradient with diagonal preconditioning, used for SPD systems
//! past the direct-factorization size threshold.

use super::{axpy, dot, CsrMatrix, LinalgError};

pub struct CgOutcome {
    pub iterations: usize,
    pub relative_residual: f64,
}

/// Solve A x = b for SPD A, starting from x = 0, to relative residual `tol`.
pub fn cg_solve(
    a: &CsrMatrix,
    b: &[f64],
    tol: f64,
    max_iter: usize,
) -> Result<(Vec<f64>, CgOutcome), LinalgError> {
    let n = a.n();
    if b.len() != n {
        return Err(LinalgError::DimensionMismatch { expected: n, got: b.len() });
    }
    let diag = a.diagonal();
    let inv_diag: Vec<f64> = diag
        .iter()
        .map(|&d| if d.abs() > 0.0 { 1.0 / d } else { 1.0 })
        .collect();
    let bnorm = dot(b, b).sqrt();
    if bnorm == 0.0 {
        return Ok((vec![0.0; n], CgOutcome { iterations: 0, relative_residual: 0.0 }));
    }
    let mut x = vec![0.0f64; n];
    let mut r = b.to_vec();
    let mut z: Vec<f64> = r.iter().zip(&inv_diag).map(|(ri, di)| ri * di).collect();
    let mut p = z.clone();
    let mut rz = dot(&r, &z);
    let mut res = bnorm;
    for it in 0..max_iter {
        let ap = a.mul_vec(&p);
        let pap = dot(&p, &ap);
        if pap <= 0.0 {
            return Err(LinalgError::CgStalled {
                tol,
                iters: it,
                residual: res / bnorm,
            });
        }
        let alpha = rz / pap;
        axpy(alpha, &p, &mut x);
        axpy(-alpha, &ap, &mut r);
        res = dot(&r, &r).sqrt();
        if res <= tol * bnorm {
            return Ok((x, CgOutcome { iterations: it + 1, relative_residual: res / bnorm }));
        }
        z = r.iter().zip(&inv_diag).map(|(ri, di)| ri * di).collect();
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for (pi, zi) in p.iter_mut().zip(&z) {
            *pi = zi + beta * *pi;
        }
    }
    Err(LinalgError::CgStalled { tol, iters: max_iter, residual: res / bnorm })
}
