//! The 1D core: the harmonic-type operator `-d^2/dx^2 + x^2/16` on a
//! truncated line, its variant with an extra Dirichlet condition at the
//! origin, and the twisted perturbation `h_eps = h0 + C_omega sigma_eps^2`.
//!
//! Matrices are plain symmetric tridiagonal second-difference operators with
//! Dirichlet at the truncation ends. Reported eigenvalues carry an a
//! posteriori h^2 deferred correction (`lambda + (h^2/12) ||D2 psi||^2`),
//! which removes the leading finite-difference defect and is validated
//! against two-grid Richardson extrapolation in the tests; raw Ritz values
//! stay available for matrix-level identities.

use crate::error::{Error, Result};
use crate::numerics::tridiag::{SpdTridiagFactor, SymTridiag};
use crate::twist::ScaledTwist;

/// Uniform symmetric grid on (-L, L), endpoints excluded (Dirichlet by
/// omission), with a node at the origin.
#[derive(Clone, Copy, Debug)]
pub struct Line1DGrid {
    pub half_width: f64,
    /// Number of interior nodes; odd, so the origin is a node.
    pub n_points: usize,
    pub spacing: f64,
}

impl Line1DGrid {
    pub fn new(half_width: f64, n_points: usize) -> Result<Self> {
        if !(half_width > 0.0) {
            return Err(Error::InvalidSpec("half_width must be positive".into()));
        }
        if n_points < 3 || n_points % 2 == 0 {
            return Err(Error::InvalidSpec(format!(
                "n_points must be odd and >= 3 so the origin is a grid node, got {n_points}"
            )));
        }
        let spacing = 2.0 * half_width / (n_points + 1) as f64;
        Ok(Self {
            half_width,
            n_points,
            spacing,
        })
    }

    pub fn node(&self, i: usize) -> f64 {
        -self.half_width + (i + 1) as f64 * self.spacing
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.n_points).map(|i| self.node(i)).collect()
    }

    /// Index of the node sitting at the origin.
    pub fn zero_node(&self) -> usize {
        (self.n_points - 1) / 2
    }

    /// Number of nodes strictly inside (-radius, radius).
    pub fn nodes_in_support(&self, radius: f64) -> usize {
        (0..self.n_points)
            .filter(|&i| self.node(i).abs() < radius)
            .count()
    }

    /// Smallest odd interior-node count that puts at least 20 nodes inside a
    /// support of the given radius.
    pub fn min_points_for_support(half_width: f64, radius: f64) -> usize {
        let needed = (20.0 * half_width / radius).ceil() as usize;
        if needed % 2 == 0 {
            needed + 1
        } else {
            needed
        }
    }
}

/// A 1D operator on a grid: symmetric tridiagonal matrix plus the metadata
/// needed to interpret it.
#[derive(Clone, Debug)]
pub struct Osc1d {
    pub grid: Line1DGrid,
    pub matrix: SymTridiag,
}

/// `h0 = -d^2/dx^2 + x^2/16` with Dirichlet walls at the truncation ends.
pub fn assemble_h0(grid: &Line1DGrid) -> Osc1d {
    let n = grid.n_points;
    let h2 = grid.spacing * grid.spacing;
    let diag: Vec<f64> = (0..n)
        .map(|i| {
            let x = grid.node(i);
            2.0 / h2 + x * x / 16.0
        })
        .collect();
    let off = vec![-1.0 / h2; n - 1];
    Osc1d {
        grid: *grid,
        matrix: SymTridiag::new(diag, off),
    }
}

/// `h_eps = h0 + C_omega sigma_eps^2`, the effective 1D operator induced by
/// the scaled twisting.
pub fn assemble_h_eps(grid: &Line1DGrid, c_omega: f64, twist: &ScaledTwist) -> Result<Osc1d> {
    if !twist.profile.is_zero() {
        let radius = twist.support_radius();
        let inside = grid.nodes_in_support(radius);
        if inside < 20 {
            return Err(Error::UnderResolved {
                msg: format!(
                    "only {inside} grid nodes inside the twist support (radius {radius:.4})"
                ),
                min_n: Line1DGrid::min_points_for_support(grid.half_width, radius),
            });
        }
    }
    let mut op = assemble_h0(grid);
    for i in 0..grid.n_points {
        let s = twist.sigma(grid.node(i));
        op.matrix.diag[i] += c_omega * s * s;
    }
    Ok(op)
}

/// `h0` with the origin node removed: the hard Dirichlet constraint u(0)=0.
/// The matrix decouples into independent left and right halves.
#[derive(Clone, Debug)]
pub struct DirichletOsc {
    pub grid: Line1DGrid,
    pub left: SymTridiag,
    pub right: SymTridiag,
}

pub fn assemble_h0_dirichlet(grid: &Line1DGrid) -> Result<DirichletOsc> {
    if grid.n_points % 2 == 0 {
        return Err(Error::InvalidSpec(
            "grid has no node at the origin; cannot impose the point Dirichlet condition".into(),
        ));
    }
    let h0 = assemble_h0(grid);
    let z = grid.zero_node();
    let left = SymTridiag::new(h0.matrix.diag[..z].to_vec(), h0.matrix.off[..z - 1].to_vec());
    let right = SymTridiag::new(
        h0.matrix.diag[z + 1..].to_vec(),
        h0.matrix.off[z + 1..].to_vec(),
    );
    Ok(DirichletOsc {
        grid: *grid,
        left,
        right,
    })
}

impl DirichletOsc {
    /// The `k` smallest eigenvalues (corrected, raw) of the constrained
    /// operator, merged across the two half-line blocks.
    pub fn smallest_eigenvalues(&self, k: usize) -> (Vec<f64>, Vec<f64>) {
        let dim = self.grid.n_points;
        let z = self.grid.zero_node();
        let mut tagged: Vec<(f64, bool)> = self
            .left
            .smallest_eigenvalues(k)
            .into_iter()
            .map(|v| (v, true))
            .chain(
                self.right
                    .smallest_eigenvalues(k)
                    .into_iter()
                    .map(|v| (v, false)),
            )
            .collect();
        tagged.sort_by(|a, b| a.0.total_cmp(&b.0));
        tagged.truncate(k);
        let _ = (dim, z);
        let mut raw = Vec::with_capacity(k);
        let mut corrected = Vec::with_capacity(k);
        for (lam, is_left) in tagged {
            let block = if is_left { &self.left } else { &self.right };
            let v = block
                .eigenvector(lam, &[])
                .expect("half-line eigenvector (simple spectrum per block)");
            // Correct on the half-line block itself: the constrained node is
            // a genuine Dirichlet wall there, so the zero-extension of the
            // second difference is the right boundary treatment. (Correcting
            // on the embedded full-line vector would see the kink at the
            // origin and inject a spurious O(h) term.)
            let scaled: Vec<f64> = v.iter().map(|x| x / self.grid.spacing.sqrt()).collect();
            raw.push(lam);
            corrected.push(lam + eigenvalue_correction(self.grid.spacing, &scaled));
        }
        (corrected, raw)
    }

    /// Embedded resolvent `(h0^D - k2)^{-1} (+) 0` at the origin node.
    pub fn resolvent(&self, k2: f64) -> Result<DirichletResolvent> {
        let shift_block = |b: &SymTridiag| -> Result<SpdTridiagFactor> {
            let mut m = b.clone();
            for d in m.diag.iter_mut() {
                *d -= k2;
            }
            m.factor_spd()
        };
        Ok(DirichletResolvent {
            zero: self.grid.zero_node(),
            left: shift_block(&self.left)?,
            right: shift_block(&self.right)?,
        })
    }
}

/// Resolvent of the point-constrained operator, extended by zero on the
/// constrained node.
pub struct DirichletResolvent {
    zero: usize,
    left: SpdTridiagFactor,
    right: SpdTridiagFactor,
}

impl DirichletResolvent {
    pub fn apply(&self, v: &[f64]) -> Vec<f64> {
        let n = v.len();
        let mut out = vec![0.0; n];
        let xl = self.left.solve(&v[..self.zero]);
        out[..self.zero].copy_from_slice(&xl);
        let xr = self.right.solve(&v[self.zero + 1..]);
        out[self.zero + 1..].copy_from_slice(&xr);
        out
    }
}

/// A posteriori h^2 eigenvalue correction `(h^2/12) ||D2 psi||^2` for an
/// L^2-normalized grid eigenfunction.
fn eigenvalue_correction(h: f64, psi: &[f64]) -> f64 {
    let h2 = h * h;
    let n = psi.len();
    let mut acc = 0.0;
    for i in 0..n {
        let left = if i > 0 { psi[i - 1] } else { 0.0 };
        let right = if i + 1 < n { psi[i + 1] } else { 0.0 };
        let d2 = (right - 2.0 * psi[i] + left) / h2;
        acc += d2 * d2;
    }
    h2 / 12.0 * (acc * h)
}

/// Eigenvalues and L^2-normalized eigenfunctions of a 1D operator.
#[derive(Clone, Debug)]
pub struct OscillatorEigensystem {
    pub grid: Line1DGrid,
    /// Deferred-corrected eigenvalues (the physical values).
    pub eigenvalues: Vec<f64>,
    /// Raw Ritz values of the discrete matrix.
    pub eigenvalues_raw: Vec<f64>,
    /// Node values, normalized so that `h * sum psi_i^2 = 1`, sign fixed so
    /// the largest-magnitude node is positive.
    pub eigenfunctions: Vec<Vec<f64>>,
}

/// Lowest `n_modes` eigenpairs of a 1D operator via Sturm bisection and
/// inverse iteration. The tridiagonal matrix is irreducible, so every
/// discrete eigenvalue is simple.
pub fn solve_eigensystem(op: &Osc1d, n_modes: usize) -> Result<OscillatorEigensystem> {
    let n = op.grid.n_points;
    if n_modes > n {
        return Err(Error::InvalidSpec(format!(
            "requested {n_modes} eigenpairs from a {n}-dimensional operator"
        )));
    }
    let raw = op.matrix.smallest_eigenvalues(n_modes);
    let h = op.grid.spacing;
    let mut funcs: Vec<Vec<f64>> = Vec::with_capacity(n_modes);
    let mut corrected = Vec::with_capacity(n_modes);
    for (k, &lam) in raw.iter().enumerate() {
        // Orthogonalize against close previous eigenvectors only.
        let close: Vec<Vec<f64>> = (0..k)
            .filter(|&j| (raw[j] - lam).abs() < 1e-6 * lam.abs().max(1.0))
            .map(|j| {
                funcs[j]
                    .iter()
                    .map(|x| x * h.sqrt())
                    .collect::<Vec<f64>>()
            })
            .collect();
        let mut v = op.matrix.eigenvector(lam, &close)?;
        // L^2(h) normalization and the deterministic sign convention.
        let norm = (v.iter().map(|x| x * x).sum::<f64>() * h).sqrt();
        let mut imax = 0;
        for (i, x) in v.iter().enumerate() {
            if x.abs() > v[imax].abs() {
                imax = i;
            }
        }
        let sign = if v[imax] < 0.0 { -1.0 } else { 1.0 };
        for x in v.iter_mut() {
            *x *= sign / norm;
        }
        corrected.push(lam + eigenvalue_correction(op.grid.spacing, &v));
        funcs.push(v);
    }
    Ok(OscillatorEigensystem {
        grid: op.grid,
        eigenvalues: corrected,
        eigenvalues_raw: raw,
        eigenfunctions: funcs,
    })
}

/// Number of sign changes along a grid function, ignoring noise-level values.
pub fn sign_changes(psi: &[f64]) -> usize {
    let scale = psi.iter().fold(0.0f64, |a, &x| a.max(x.abs()));
    let mut last = 0.0f64;
    let mut changes = 0;
    for &x in psi {
        if x.abs() < 1e-8 * scale {
            continue;
        }
        if last != 0.0 && x.signum() != last.signum() {
            changes += 1;
        }
        last = x;
    }
    changes
}

/// Operator-norm gap between the resolvent of the twisted 1D operator and the
/// embedded resolvent of the point-constrained one, at spectral shift `k2`.
pub fn resolvent_gap_1d(
    grid: &Line1DGrid,
    c_omega: f64,
    profile: &crate::twist::TwistProfile,
    epsilon: f64,
    k2: f64,
) -> Result<f64> {
    let twist = crate::twist::scaled_twist(profile, epsilon)?;
    let heps = assemble_h_eps(grid, c_omega, &twist)?;
    let mut shifted = heps.matrix.clone();
    for d in shifted.diag.iter_mut() {
        *d -= k2;
    }
    let heps_factor = shifted.factor_spd()?;
    let dirichlet = assemble_h0_dirichlet(grid)?.resolvent(k2)?;
    let n = grid.n_points;
    let op = |v: &[f64]| -> Vec<f64> {
        let a = heps_factor.solve(v);
        let b = dirichlet.apply(v);
        a.iter().zip(&b).map(|(x, y)| x - y).collect()
    };
    let ext = crate::numerics::lanczos::extreme_eigenvalues(op, n, 1e-9, 400)?;
    Ok(ext.norm())
}

/// Analytic reference data for the continuum operator.
pub mod analytic {
    /// Level spacing scale: substituting x = 2y maps `-d^2/dx^2 + x^2/16`
    /// into `(1/4)(-d^2/dy^2 + y^2)`, whose levels are 2n+1; hence
    /// `lambda_n = LEVEL_SCALE * (n + 1/2)` with `LEVEL_SCALE = 1/2`.
    pub const LEVEL_SCALE: f64 = 0.5;

    /// `lambda_n = (2n + 1)/4`.
    pub fn level(n: usize) -> f64 {
        LEVEL_SCALE * (n as f64 + 0.5)
    }

    /// Normalized eigenfunction `psi_n(x) = 2^{-1/2} phi_n(x/2)` where
    /// `phi_n` are the standard Hermite functions; explicitly
    /// `psi_n(x) = 2^{-1/2} pi^{-1/4} (2^n n!)^{-1/2} e^{-x^2/8} H_n(x/2)`.
    /// The Gaussian width follows from the ground state of the scaled
    /// operator; quadrature unit-norm is checked in the tests.
    pub fn eigenfunction(n: usize, x: f64) -> f64 {
        let y = 0.5 * x;
        // Stable recurrence for normalized Hermite functions.
        let mut h0 = std::f64::consts::PI.powf(-0.25) * (-0.5 * y * y).exp();
        if n == 0 {
            return h0 * std::f64::consts::FRAC_1_SQRT_2;
        }
        let mut h1 = (2.0f64).sqrt() * y * h0;
        for k in 1..n {
            let next = (2.0 / (k as f64 + 1.0)).sqrt() * y * h1
                - (k as f64 / (k as f64 + 1.0)).sqrt() * h0;
            h0 = h1;
            h1 = next;
        }
        h1 * std::f64::consts::FRAC_1_SQRT_2
    }
}
