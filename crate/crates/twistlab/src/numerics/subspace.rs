//! Inverse subspace iteration with Rayleigh-Ritz projection.
//!
//! Finds the lowest eigenpairs of a symmetric positive definite operator
//! given a solve for `A^{-1} v` and a matvec for `A v`. Block iteration keeps
//! exactly degenerate eigenvalues (which the transverse rectangle spectrum
//! does produce) well separated from the solver's point of view.

use super::rng::SplitMix64;
use super::tridiag::dot;
use crate::error::{Error, Result};
use nalgebra::DMatrix;

pub struct EigenPairs {
    pub values: Vec<f64>,
    pub vectors: Vec<Vec<f64>>,
    pub residuals: Vec<f64>,
}

/// Lowest `k` eigenpairs of a SPD operator.
///
/// `solve(v, inner_tol)` applies `A^{-1} v` to the requested relative
/// accuracy (an exact solver may ignore the hint); `matvec` applies `A`.
/// The hint starts loose and tightens with the eigen-residuals, which keeps
/// iterative inner solvers cheap in the early sweeps. Residuals are
/// `||A v - lambda v||_2` for unit `v`.
pub fn lowest_eigenpairs<S, M>(
    solve: S,
    matvec: M,
    dim: usize,
    k: usize,
    tol: f64,
    max_iter: usize,
) -> Result<EigenPairs>
where
    S: Fn(&[f64], f64) -> Vec<f64>,
    M: Fn(&[f64]) -> Vec<f64>,
{
    assert!(k >= 1 && k <= dim);
    let p = (k + 4).min(dim);
    let mut rng = SplitMix64::new(0x5EED_0002);
    let mut basis: Vec<Vec<f64>> = (0..p).map(|_| rng.vector(dim)).collect();
    orthonormalize(&mut basis);

    let mut inner_tol = 1e-3;
    let mut final_state: Option<EigenPairs> = None;
    for _ in 0..max_iter {
        let mut next: Vec<Vec<f64>> = basis.iter().map(|v| solve(v, inner_tol)).collect();
        orthonormalize(&mut next);
        basis = next;

        // Rayleigh-Ritz on A.
        let av: Vec<Vec<f64>> = basis.iter().map(|v| matvec(v)).collect();
        let mut h = DMatrix::zeros(p, p);
        for i in 0..p {
            for j in 0..=i {
                let v = dot(&basis[i], &av[j]);
                h[(i, j)] = v;
                h[(j, i)] = v;
            }
        }
        let eig = h.symmetric_eigen();
        let mut order: Vec<usize> = (0..p).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));

        let mut values = Vec::with_capacity(k);
        let mut vectors = Vec::with_capacity(k);
        let mut residuals = Vec::with_capacity(k);
        let mut rotated: Vec<Vec<f64>> = Vec::with_capacity(p);
        for &col in order.iter() {
            let mut v = vec![0.0; dim];
            let mut avr = vec![0.0; dim];
            for j in 0..p {
                let c = eig.eigenvectors[(j, col)];
                for i in 0..dim {
                    v[i] += c * basis[j][i];
                    avr[i] += c * av[j][i];
                }
            }
            rotated.push(v.clone());
            if values.len() < k {
                let theta = eig.eigenvalues[col];
                let res = avr
                    .iter()
                    .zip(&v)
                    .map(|(a, x)| (a - theta * x) * (a - theta * x))
                    .sum::<f64>()
                    .sqrt();
                values.push(theta);
                vectors.push(v);
                residuals.push(res);
            }
        }
        basis = rotated;

        let converged = residuals
            .iter()
            .zip(&values)
            .all(|(r, v)| *r <= tol * v.abs().max(1.0));
        // Tighten the inner solves in step with the outer progress.
        let worst_rel = residuals
            .iter()
            .zip(&values)
            .map(|(r, v)| r / v.abs().max(1.0))
            .fold(0.0f64, f64::max);
        inner_tol = (0.03 * worst_rel).clamp(1e-13, 1e-3);
        final_state = Some(EigenPairs {
            values,
            vectors,
            residuals,
        });
        if converged {
            return Ok(final_state.unwrap());
        }
    }
    let st = final_state.unwrap();
    Err(Error::SolverFailure {
        msg: format!("subspace iteration: {k} eigenpairs not converged in {max_iter} sweeps"),
        residuals: st.residuals,
    })
}

fn orthonormalize(basis: &mut Vec<Vec<f64>>) {
    let mut kept: Vec<Vec<f64>> = Vec::with_capacity(basis.len());
    for v in basis.iter() {
        let mut w = v.clone();
        for _ in 0..2 {
            for q in &kept {
                let c = dot(&w, q);
                for i in 0..w.len() {
                    w[i] -= c * q[i];
                }
            }
        }
        let n = dot(&w, &w).sqrt();
        if n > 1e-300 {
            for x in w.iter_mut() {
                *x /= n;
            }
            kept.push(w);
        }
    }
    *basis = kept;
}
