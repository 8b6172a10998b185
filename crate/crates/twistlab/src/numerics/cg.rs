//! Conjugate gradients for symmetric positive definite operators.

use crate::error::{Error, Result};

/// Solve `A x = b` for SPD `A` given as a matvec closure.
pub fn solve<F>(apply: F, b: &[f64], tol_rel: f64, max_iter: usize) -> Result<Vec<f64>>
where
    F: Fn(&[f64]) -> Vec<f64>,
{
    let n = b.len();
    let bnorm = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    if bnorm == 0.0 {
        return Ok(vec![0.0; n]);
    }
    let mut x = vec![0.0; n];
    let mut r = b.to_vec();
    let mut p = r.clone();
    let mut rs = bnorm * bnorm;
    for _ in 0..max_iter {
        let ap = apply(&p);
        let pap: f64 = p.iter().zip(&ap).map(|(a, c)| a * c).sum();
        if pap <= 0.0 {
            return Err(Error::SolverFailure {
                msg: "CG: operator not positive definite".into(),
                residuals: vec![pap],
            });
        }
        let alpha = rs / pap;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        let rs_new: f64 = r.iter().map(|v| v * v).sum();
        if rs_new.sqrt() <= tol_rel * bnorm {
            return Ok(x);
        }
        let beta = rs_new / rs;
        rs = rs_new;
        for i in 0..n {
            p[i] = r[i] + beta * p[i];
        }
    }
    Err(Error::SolverFailure {
        msg: format!("CG did not converge in {max_iter} iterations"),
        residuals: vec![rs.sqrt() / bnorm],
    })
}
