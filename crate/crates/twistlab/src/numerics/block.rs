//! Block-tridiagonal symmetric positive definite systems.
//!
//! The mixed-basis waveguide operators couple a 1D grid index to a small set
//! of transverse modes; with node-major ordering they are block tridiagonal
//! with dense M x M blocks, so a block LDL^T factorization solves them exactly
//! at O(n M^3) cost.

use crate::error::{Error, Result};
use nalgebra::{Cholesky, DMatrix, DVector, Dyn};

/// Symmetric block-tridiagonal matrix: `diag[i]` on the block diagonal,
/// `sub[i]` = block (i+1, i); block (i, i+1) is `sub[i]^T`.
#[derive(Clone, Debug)]
pub struct BlockTridiag {
    pub m: usize,
    pub diag: Vec<DMatrix<f64>>,
    pub sub: Vec<DMatrix<f64>>,
}

impl BlockTridiag {
    pub fn new(diag: Vec<DMatrix<f64>>, sub: Vec<DMatrix<f64>>) -> Self {
        assert!(!diag.is_empty());
        assert_eq!(sub.len() + 1, diag.len());
        let m = diag[0].nrows();
        for d in &diag {
            assert_eq!((d.nrows(), d.ncols()), (m, m));
        }
        for s in &sub {
            assert_eq!((s.nrows(), s.ncols()), (m, m));
        }
        Self { m, diag, sub }
    }

    pub fn n_blocks(&self) -> usize {
        self.diag.len()
    }

    pub fn dim(&self) -> usize {
        self.n_blocks() * self.m
    }

    pub fn matvec(&self, x: &DVector<f64>) -> DVector<f64> {
        let m = self.m;
        let nb = self.n_blocks();
        assert_eq!(x.len(), self.dim());
        let mut y = DVector::zeros(self.dim());
        for i in 0..nb {
            let xi = x.rows(i * m, m);
            let mut yi = &self.diag[i] * xi;
            if i > 0 {
                yi += &self.sub[i - 1] * x.rows((i - 1) * m, m);
            }
            if i + 1 < nb {
                yi += self.sub[i].transpose() * x.rows((i + 1) * m, m);
            }
            y.rows_mut(i * m, m).copy_from(&yi);
        }
        y
    }

    /// Maximum absolute symmetry defect of the assembled blocks.
    pub fn symmetry_defect(&self) -> f64 {
        self.diag
            .iter()
            .map(|d| (d - d.transpose()).abs().max())
            .fold(0.0, f64::max)
    }

    /// Block LDL^T factorization; requires positive definiteness.
    pub fn factor(&self) -> Result<BlockFactor> {
        let nb = self.n_blocks();
        let mut chol: Vec<Cholesky<f64, Dyn>> = Vec::with_capacity(nb);
        let mut w: Vec<DMatrix<f64>> = Vec::with_capacity(nb.saturating_sub(1));
        let mut s = self.diag[0].clone();
        for i in 0..nb {
            let c = Cholesky::new(s.clone()).ok_or_else(|| {
                Error::NearSingular(format!("block pivot {i} not positive definite"))
            })?;
            if i + 1 < nb {
                // W_i = sub_i * S_i^{-1}, kept as the transpose solve.
                let mut sinv_subt = self.sub[i].transpose();
                c.solve_mut(&mut sinv_subt);
                let wi = sinv_subt.transpose();
                s = &self.diag[i + 1] - &wi * self.sub[i].transpose();
                w.push(wi);
            }
            chol.push(c);
        }
        Ok(BlockFactor { m: self.m, chol, w })
    }
}

/// Factorized block-tridiagonal SPD matrix.
pub struct BlockFactor {
    m: usize,
    chol: Vec<Cholesky<f64, Dyn>>,
    w: Vec<DMatrix<f64>>,
}

impl BlockFactor {
    pub fn dim(&self) -> usize {
        self.chol.len() * self.m
    }

    pub fn solve(&self, b: &DVector<f64>) -> DVector<f64> {
        let m = self.m;
        let nb = self.chol.len();
        assert_eq!(b.len(), self.dim());
        let mut y = b.clone();
        for i in 1..nb {
            let prev = y.rows((i - 1) * m, m).clone_owned();
            let corr = &self.w[i - 1] * prev;
            let mut yi = y.rows_mut(i * m, m);
            yi -= corr;
        }
        for i in 0..nb {
            let mut yi = y.rows(i * m, m).clone_owned();
            self.chol[i].solve_mut(&mut yi);
            y.rows_mut(i * m, m).copy_from(&yi);
        }
        for i in (0..nb - 1).rev() {
            let next = y.rows((i + 1) * m, m).clone_owned();
            let corr = self.w[i].transpose() * next;
            let mut yi = y.rows_mut(i * m, m);
            yi -= corr;
        }
        y
    }
}
