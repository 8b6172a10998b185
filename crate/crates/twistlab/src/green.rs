//! Green functions of the 1D operators.
//!
//! Three routes are kept deliberately distinct so they can cross-check each
//! other:
//!  * a truncated spectral sum over grid eigenpairs (the mode-expansion
//!    representation of the kernel),
//!  * the exact discrete resolvent via tridiagonal solves,
//!  * a continuum-grade evaluator at arbitrary points, built from the
//!    semiseparable structure of the tridiagonal inverse on a fine auxiliary
//!    grid with Richardson pairing.
//!
//! The point-Dirichlet kernel is a rank-one correction of the free kernel:
//! `R_D(x,y) = R(x,y) - R(x,0) R(0,y) / R(0,0)`, which at the discrete level
//! is an exact bordered-inverse identity.

use crate::error::{Error, Result};
use crate::numerics::interp;
use crate::numerics::tridiag::TridiagLu;
use crate::oscillator::{solve_eigensystem, Line1DGrid, Osc1d};

/// Which operator a kernel resolves.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum KernelOp {
    Free,
    PointDirichlet,
}

/// Green kernel of a 1D grid operator at a fixed spectral shift, evaluable
/// at node pairs.
pub struct GreenKernel {
    pub op: KernelOp,
    pub k2: f64,
    pub grid: Line1DGrid,
    repr: Repr,
}

enum Repr {
    /// Truncated eigenfunction sum; `tail` is the first omitted eigenvalue.
    Spectral {
        eigs: Vec<f64>,
        funcs: Vec<Vec<f64>>,
        tail: f64,
    },
    /// Exact discrete resolvent (pivoted LU of the shifted matrix).
    Direct { lu: TridiagLu },
    /// Rank-one corrected base kernel.
    Krein {
        base: Box<GreenKernel>,
        r00: f64,
        zero: usize,
    },
}

impl GreenKernel {
    /// Spectral representation from the lowest `n_trunc` eigenpairs of the
    /// operator. Rejects shifts within 1e-6 of a computed eigenvalue.
    pub fn spectral(op: &Osc1d, k2: f64, n_trunc: usize) -> Result<Self> {
        if n_trunc == 0 || n_trunc >= op.grid.n_points {
            return Err(Error::InvalidSpec(format!(
                "spectral truncation must be in 1..dim, got {n_trunc}"
            )));
        }
        let sys = solve_eigensystem(op, n_trunc + 1)?;
        for &lam in &sys.eigenvalues_raw[..n_trunc] {
            if (lam - k2).abs() < 1e-6 {
                return Err(Error::NearSingular(format!(
                    "shift {k2} within 1e-6 of eigenvalue {lam}"
                )));
            }
        }
        let tail = sys.eigenvalues_raw[n_trunc];
        Ok(Self {
            op: KernelOp::Free,
            k2,
            grid: op.grid,
            repr: Repr::Spectral {
                eigs: sys.eigenvalues_raw[..n_trunc].to_vec(),
                funcs: sys.eigenfunctions,
                tail,
            },
        })
    }

    /// Exact discrete resolvent route.
    pub fn direct(op: &Osc1d, k2: f64) -> Result<Self> {
        let below = op.matrix.count_below(k2 + 1e-6);
        let above = op.matrix.count_below(k2 - 1e-6);
        if below != above {
            return Err(Error::NearSingular(format!(
                "shift {k2} within 1e-6 of the spectrum"
            )));
        }
        let diag: Vec<f64> = op.matrix.diag.iter().map(|d| d - k2).collect();
        let lu = TridiagLu::factor(&op.matrix.off, &diag, &op.matrix.off);
        Ok(Self {
            op: KernelOp::Free,
            k2,
            grid: op.grid,
            repr: Repr::Direct { lu },
        })
    }

    #[cfg(test)]
    pub(crate) fn from_spectral_parts(
        grid: Line1DGrid,
        k2: f64,
        eigs: Vec<f64>,
        funcs: Vec<Vec<f64>>,
    ) -> Self {
        let tail = eigs.last().copied().unwrap_or(0.0) + 1.0;
        Self {
            op: KernelOp::Free,
            k2,
            grid,
            repr: Repr::Spectral { eigs, funcs, tail },
        }
    }

    /// Kernel value at the node pair `(i, j)`.
    pub fn eval(&self, i: usize, j: usize) -> f64 {
        match &self.repr {
            Repr::Spectral { eigs, funcs, .. } => eigs
                .iter()
                .zip(funcs)
                .map(|(lam, psi)| psi[i] * psi[j] / (lam - self.k2))
                .sum(),
            Repr::Direct { lu } => {
                let n = self.grid.n_points;
                let mut e = vec![0.0; n];
                e[j] = 1.0;
                lu.solve(&e)[i] / self.grid.spacing
            }
            Repr::Krein { base, r00, zero } => {
                base.eval(i, j) - base.eval(i, *zero) * base.eval(*zero, j) / r00
            }
        }
    }

    /// Upper bound on the omitted spectral tail, `(lambda_N - k^2)^{-1}`;
    /// `None` for exact representations.
    pub fn tail_bound(&self) -> Option<f64> {
        match &self.repr {
            Repr::Spectral { tail, .. } => Some(1.0 / (tail - self.k2)),
            _ => None,
        }
    }

    /// Apply the kernel as a quadrature operator: `(Rg)_i = h sum_j K(i,j) g_j`.
    pub fn apply(&self, g: &[f64]) -> Vec<f64> {
        match &self.repr {
            Repr::Direct { lu } => lu.solve(g),
            _ => {
                let n = self.grid.n_points;
                let h = self.grid.spacing;
                (0..n)
                    .map(|i| (0..n).map(|j| self.eval(i, j) * g[j]).sum::<f64>() * h)
                    .collect()
            }
        }
    }
}

/// Krein/bordered-inverse correction pinning a Dirichlet condition at the
/// origin node: `R_D(x,y) = R(x,y) - R(x,0) R(0,y) / R(0,0)`.
pub fn dirichlet_green_kernel(base: GreenKernel) -> Result<GreenKernel> {
    if base.op != KernelOp::Free {
        return Err(Error::InvalidSpec(
            "point-Dirichlet correction applies to the free kernel".into(),
        ));
    }
    let zero = base.grid.zero_node();
    let r00 = base.eval(zero, zero);
    if r00.abs() < 1e-12 {
        return Err(Error::NearSingular(format!(
            "Krein denominator R(0,0,{}) = {r00:.3e} vanishes",
            base.k2
        )));
    }
    Ok(GreenKernel {
        op: KernelOp::PointDirichlet,
        k2: base.k2,
        grid: base.grid,
        repr: Repr::Krein {
            zero,
            r00,
            base: Box::new(base),
        },
    })
}

/// Continuum-grade evaluator for the free-operator kernel at arbitrary
/// points.
///
/// On each auxiliary grid the inverse of the shifted tridiagonal matrix is
/// semiseparable: `R_ij = a_j b_i / rho` for `i <= j`, with `a`, `b` single
/// columns of the inverse (sources placed at -+SOURCE_X so both stay
/// well-scaled on the evaluation range) and `rho` their cross entry. Factor
/// columns interpolate cubically; two grids Richardson-combine to O(h^4).
pub struct ContinuumGreen {
    pub k2: f64,
    pub half_width: f64,
    fine: SemisepGrid,
    coarse: SemisepGrid,
}

const SOURCE_X: f64 = 4.0;

struct SemisepGrid {
    x0: f64,
    h: f64,
    /// Column from the source at -SOURCE_X, valid for arguments >= -SOURCE_X.
    a: Vec<f64>,
    /// Column from the source at +SOURCE_X, valid for arguments <= SOURCE_X.
    b: Vec<f64>,
    /// Cross entry a[src+] = b[src-].
    rho: f64,
}

impl SemisepGrid {
    fn build(half_width: f64, n_points: usize, k2: f64) -> Result<Self> {
        let grid = Line1DGrid::new(half_width, n_points)?;
        let op = crate::oscillator::assemble_h0(&grid);
        let mut shifted = op.matrix.clone();
        for d in shifted.diag.iter_mut() {
            *d -= k2;
        }
        let factor = shifted.factor_spd()?;
        let node_at = |x: f64| -> usize {
            (((x + half_width) / grid.spacing).round() as usize).saturating_sub(1)
        };
        let src_minus = node_at(-SOURCE_X);
        let src_plus = node_at(SOURCE_X);
        let solve_col = |j: usize| -> Vec<f64> {
            let mut e = vec![0.0; n_points];
            e[j] = 1.0;
            factor.solve(&e)
        };
        let a = solve_col(src_minus);
        let b = solve_col(src_plus);
        let rho = a[src_plus];
        let rho_check = b[src_minus];
        if rho.abs() < 1e-200 || ((rho - rho_check) / rho).abs() > 1e-8 {
            return Err(Error::NearSingular(format!(
                "semiseparable factor inconsistency: {rho:.6e} vs {rho_check:.6e}"
            )));
        }
        Ok(Self {
            x0: grid.node(0),
            h: grid.spacing,
            a,
            b,
            rho,
        })
    }

    fn eval(&self, x: f64, y: f64) -> f64 {
        let (lo, hi) = if x <= y { (x, y) } else { (y, x) };
        let a_hi = interp::cubic(self.x0, self.h, &self.a, hi);
        let b_lo = interp::cubic(self.x0, self.h, &self.b, lo);
        a_hi * b_lo / (self.rho * self.h)
    }
}

impl ContinuumGreen {
    /// `n_fine` must be odd with `(n_fine + 1)` divisible by 4 so the
    /// half-resolution Richardson partner shares the node family.
    pub fn assemble(half_width: f64, n_fine: usize, k2: f64) -> Result<Self> {
        if (n_fine + 1) % 4 != 0 {
            return Err(Error::InvalidSpec(format!(
                "n_fine + 1 must be divisible by 4 for Richardson pairing, got {n_fine}"
            )));
        }
        if half_width <= SOURCE_X + 1.0 {
            return Err(Error::InvalidSpec(format!(
                "half_width must exceed {} for the source placement",
                SOURCE_X + 1.0
            )));
        }
        let n_coarse = (n_fine + 1) / 2 - 1;
        Ok(Self {
            k2,
            half_width,
            fine: SemisepGrid::build(half_width, n_fine, k2)?,
            coarse: SemisepGrid::build(half_width, n_coarse, k2)?,
        })
    }

    /// Kernel value `R(x, y, k2)` with O(h^4) discretization error.
    ///
    /// Valid when `min(x,y) <= SOURCE_X` and `max(x,y) >= -SOURCE_X`, which
    /// covers every pairing of a point near the origin with anything on the
    /// line.
    pub fn eval(&self, x: f64, y: f64) -> f64 {
        debug_assert!(x.min(y) <= SOURCE_X && x.max(y) >= -SOURCE_X);
        let f = self.fine.eval(x, y);
        let c = self.coarse.eval(x, y);
        (4.0 * f - c) / 3.0
    }
}

/// Local expansion `R(x, y) = a + b |x - y| + O(patch^2)` of a kernel around
/// the origin.
#[derive(Clone, Copy, Debug)]
pub struct LocalGreenExpansion {
    /// `R(0, 0, k2)`.
    pub a: f64,
    /// One-sided slope of `x -> R(x, 0)` at `0+` (the kink coefficient).
    pub b: f64,
    /// Max deviation of the affine-in-|x-y| model over the sampled patch.
    pub model_residual: f64,
    /// Raw one-sided slopes at scales {d, 2d, 4d} before extrapolation.
    pub slope_estimates: [f64; 3],
}

/// Extract `(a, b)` by one-sided differencing at scales `{d, 2d, 4d}` with
/// Richardson elimination of the O(d) and O(d^2) terms. Centered stencils are
/// useless here: the kernel kinks across the diagonal, so only the `x > 0`
/// side is sampled.
pub fn local_green_expansion<F: Fn(f64, f64) -> f64>(
    kernel: F,
    d: f64,
    patch: f64,
) -> Result<LocalGreenExpansion> {
    let a = kernel(0.0, 0.0);
    let s = |step: f64| (kernel(step, 0.0) - a) / step;
    let (s1, s2, s4) = (s(d), s(2.0 * d), s(4.0 * d));
    // s(d) = b + c1 d + c2 d^2 + O(d^3).
    let b = (8.0 * s1 - 6.0 * s2 + s4) / 3.0;
    let b21 = 2.0 * s1 - s2;
    let b42 = 2.0 * s2 - s4;
    if (b21 - b42).abs() > 0.05 * b.abs().max(1e-10) {
        return Err(Error::SolverFailure {
            msg: "one-sided slope extrapolation did not converge".into(),
            residuals: vec![s1, s2, s4],
        });
    }
    let mut model_residual = 0.0f64;
    let m = 9;
    for i in 0..m {
        for j in 0..m {
            let x = -patch + 2.0 * patch * i as f64 / (m - 1) as f64;
            let y = -patch + 2.0 * patch * j as f64 / (m - 1) as f64;
            let err = (kernel(x, y) - (a + b * (x - y).abs())).abs();
            model_residual = model_residual.max(err);
        }
    }
    Ok(LocalGreenExpansion {
        a,
        b,
        model_residual,
        slope_estimates: [s1, s2, s4],
    })
}
