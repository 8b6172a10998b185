//! Symmetric tridiagonal matrices: direct solves, Sturm-sequence bisection
//! for eigenvalues and inverse iteration for eigenvectors.

use crate::error::{Error, Result};

/// Symmetric tridiagonal matrix given by its diagonal and off-diagonal.
#[derive(Clone, Debug)]
pub struct SymTridiag {
    pub diag: Vec<f64>,
    /// `off[i]` couples rows `i` and `i+1`; length `diag.len() - 1`.
    pub off: Vec<f64>,
}

impl SymTridiag {
    pub fn new(diag: Vec<f64>, off: Vec<f64>) -> Self {
        assert_eq!(off.len() + 1, diag.len());
        Self { diag, off }
    }

    pub fn dim(&self) -> usize {
        self.diag.len()
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        let n = self.dim();
        assert_eq!(x.len(), n);
        let mut y = vec![0.0; n];
        for i in 0..n {
            let mut acc = self.diag[i] * x[i];
            if i > 0 {
                acc += self.off[i - 1] * x[i - 1];
            }
            if i + 1 < n {
                acc += self.off[i] * x[i + 1];
            }
            y[i] = acc;
        }
        y
    }

    /// Number of eigenvalues below `x` (Sturm sequence on the shifted LDL^T
    /// pivots, with the LAPACK-style zero-pivot substitution).
    pub fn count_below(&self, x: f64) -> usize {
        let n = self.dim();
        let e2max = self
            .off
            .iter()
            .fold(1.0f64, |a, &e| a.max(e * e));
        let pivmin = f64::MIN_POSITIVE * e2max;
        let mut count = 0usize;
        let mut q = self.diag[0] - x;
        if q.abs() < pivmin {
            q = -pivmin;
        }
        if q <= 0.0 {
            count += 1;
        }
        for i in 1..n {
            q = (self.diag[i] - x) - self.off[i - 1] * self.off[i - 1] / q;
            if q.abs() < pivmin {
                q = -pivmin;
            }
            if q <= 0.0 {
                count += 1;
            }
        }
        count
    }

    fn gershgorin(&self) -> (f64, f64) {
        let n = self.dim();
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for i in 0..n {
            let mut r = 0.0;
            if i > 0 {
                r += self.off[i - 1].abs();
            }
            if i + 1 < n {
                r += self.off[i].abs();
            }
            lo = lo.min(self.diag[i] - r);
            hi = hi.max(self.diag[i] + r);
        }
        (lo, hi)
    }

    /// The `k` smallest eigenvalues by bisection, ascending, each resolved to
    /// full relative precision.
    pub fn smallest_eigenvalues(&self, k: usize) -> Vec<f64> {
        let (glo, ghi) = self.gershgorin();
        (0..k.min(self.dim()))
            .map(|j| self.bisect_kth(j, glo, ghi))
            .collect()
    }

    fn bisect_kth(&self, j: usize, glo: f64, ghi: f64) -> f64 {
        let mut lo = glo;
        let mut hi = ghi;
        let scale = glo.abs().max(ghi.abs()).max(1.0);
        // ~70 halvings reach f64 resolution on any reasonable scale.
        for _ in 0..140 {
            let mid = 0.5 * (lo + hi);
            if self.count_below(mid) > j {
                hi = mid;
            } else {
                lo = mid;
            }
            if hi - lo <= 2.0 * f64::EPSILON * scale {
                break;
            }
        }
        0.5 * (lo + hi)
    }

    /// LDL^T factorization for a positive definite matrix; used for resolvent
    /// solves where positivity is structural (e.g. `h + 1`).
    pub fn factor_spd(&self) -> Result<SpdTridiagFactor> {
        let n = self.dim();
        let mut d = vec![0.0; n];
        let mut l = vec![0.0; n.saturating_sub(1)];
        d[0] = self.diag[0];
        if d[0] <= 0.0 {
            return Err(Error::NearSingular("tridiagonal pivot <= 0".into()));
        }
        for i in 1..n {
            l[i - 1] = self.off[i - 1] / d[i - 1];
            d[i] = self.diag[i] - l[i - 1] * self.off[i - 1];
            if d[i] <= 0.0 {
                return Err(Error::NearSingular("tridiagonal pivot <= 0".into()));
            }
        }
        Ok(SpdTridiagFactor { d, l })
    }

    /// Eigenvector for an isolated eigenvalue by inverse iteration.
    ///
    /// `previous` holds already-computed eigenvectors of nearby eigenvalues to
    /// orthogonalize against (needed when spacings approach the shift jitter).
    pub fn eigenvector(&self, lambda: f64, previous: &[Vec<f64>]) -> Result<Vec<f64>> {
        let n = self.dim();
        let scale = self
            .diag
            .iter()
            .fold(0.0f64, |a, &x| a.max(x.abs()))
            .max(1.0);
        let jitter = 1e-12 * scale.max(lambda.abs());
        let lu = TridiagLu::factor(
            &self.off.iter().map(|&e| e).collect::<Vec<_>>(),
            &self.diag.iter().map(|&d| d - (lambda + jitter)).collect::<Vec<_>>(),
            &self.off.iter().map(|&e| e).collect::<Vec<_>>(),
        );
        let mut rng = super::rng::SplitMix64::new(0x1234_5EED ^ n as u64);
        let mut v = rng.vector(n);
        normalize(&mut v);
        let mut best_res = f64::INFINITY;
        let mut best = v.clone();
        for _ in 0..10 {
            let mut w = lu.solve(&v);
            for p in previous {
                let c = dot(&w, p);
                for i in 0..n {
                    w[i] -= c * p[i];
                }
            }
            normalize(&mut w);
            v = w;
            let av = self.matvec(&v);
            let res = av
                .iter()
                .zip(&v)
                .map(|(a, x)| (a - lambda * x) * (a - lambda * x))
                .sum::<f64>()
                .sqrt();
            if res < best_res {
                best_res = res;
                best = v.clone();
            }
            // Tight stop: downstream h^2 corrections apply a second
            // difference to this vector, which amplifies residual noise by
            // 1/h^2.
            if res <= 1e-13 * scale {
                break;
            }
        }
        if best_res > 1e-6 * scale {
            return Err(Error::SolverFailure {
                msg: format!("inverse iteration stalled at eigenvalue {lambda}"),
                residuals: vec![best_res],
            });
        }
        Ok(best)
    }
}

/// LDL^T factor of a positive definite tridiagonal matrix.
pub struct SpdTridiagFactor {
    d: Vec<f64>,
    l: Vec<f64>,
}

impl SpdTridiagFactor {
    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.d.len();
        let mut x = b.to_vec();
        for i in 1..n {
            x[i] -= self.l[i - 1] * x[i - 1];
        }
        for i in 0..n {
            x[i] /= self.d[i];
        }
        for i in (0..n - 1).rev() {
            x[i] -= self.l[i] * x[i + 1];
        }
        x
    }
}

/// LU with partial pivoting for a general tridiagonal matrix (the shifted,
/// possibly indefinite systems of inverse iteration).
pub struct TridiagLu {
    dl: Vec<f64>,
    d: Vec<f64>,
    du: Vec<f64>,
    du2: Vec<f64>,
    swapped: Vec<bool>,
}

impl TridiagLu {
    pub fn factor(sub: &[f64], diag: &[f64], sup: &[f64]) -> Self {
        let n = diag.len();
        let mut dl = sub.to_vec();
        let mut d = diag.to_vec();
        let mut du = sup.to_vec();
        let mut du2 = vec![0.0; n.saturating_sub(2)];
        let mut swapped = vec![false; n.saturating_sub(1)];
        for i in 0..n.saturating_sub(1) {
            if d[i].abs() >= dl[i].abs() {
                if d[i] != 0.0 {
                    let fact = dl[i] / d[i];
                    dl[i] = fact;
                    d[i + 1] -= fact * du[i];
                } else {
                    d[i] = f64::MIN_POSITIVE;
                }
            } else {
                let fact = d[i] / dl[i];
                d[i] = dl[i];
                dl[i] = fact;
                let temp = du[i];
                du[i] = d[i + 1];
                d[i + 1] = temp - fact * d[i + 1];
                if i + 2 < n {
                    du2[i] = du[i + 1];
                    du[i + 1] = -fact * du[i + 1];
                }
                swapped[i] = true;
            }
        }
        if n >= 1 && d[n - 1] == 0.0 {
            d[n - 1] = f64::MIN_POSITIVE;
        }
        Self { dl, d, du, du2, swapped }
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.d.len();
        let mut x = b.to_vec();
        for i in 0..n.saturating_sub(1) {
            if self.swapped[i] {
                x.swap(i, i + 1);
            }
            let t = self.dl[i] * x[i];
            x[i + 1] -= t;
        }
        if n >= 1 {
            x[n - 1] /= self.d[n - 1];
        }
        if n >= 2 {
            x[n - 2] = (x[n - 2] - self.du[n - 2] * x[n - 1]) / self.d[n - 2];
        }
        for i in (0..n.saturating_sub(2)).rev() {
            x[i] = (x[i] - self.du[i] * x[i + 1] - self.du2[i] * x[i + 2]) / self.d[i];
        }
        x
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn normalize(v: &mut [f64]) {
    let n = dot(v, v).sqrt();
    if n > 0.0 {
        for x in v.iter_mut() {
            *x /= n;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn laplace_1d(n: usize) -> SymTridiag {
        SymTridiag::new(vec![2.0; n], vec![-1.0; n - 1])
    }

    #[test]
    fn sturm_counts_match_known_spectrum() {
        // Eigenvalues of tridiag(-1,2,-1), size n: 2 - 2 cos(k pi / (n+1)).
        let n = 50;
        let t = laplace_1d(n);
        let exact: Vec<f64> = (1..=n)
            .map(|k| 2.0 - 2.0 * (k as f64 * std::f64::consts::PI / (n as f64 + 1.0)).cos())
            .collect();
        assert_eq!(t.count_below(exact[9] + 1e-12), 10);
        assert_eq!(t.count_below(exact[0] - 1e-12), 0);
        let got = t.smallest_eigenvalues(5);
        for (g, e) in got.iter().zip(&exact) {
            assert!((g - e).abs() < 1e-12, "{g} vs {e}");
        }
    }

    #[test]
    fn spd_solve_roundtrip() {
        let n = 200;
        let mut t = laplace_1d(n);
        for d in t.diag.iter_mut() {
            *d += 1.0;
        }
        let f = t.factor_spd().unwrap();
        let b: Vec<f64> = (0..n).map(|i| ((i * 7919) % 13) as f64 - 6.0).collect();
        let x = f.solve(&b);
        let r = t.matvec(&x);
        let err = r
            .iter()
            .zip(&b)
            .map(|(a, c)| (a - c).abs())
            .fold(0.0f64, f64::max);
        assert!(err < 1e-10);
    }

    #[test]
    fn lu_pivoted_solve_indefinite() {
        let n = 120;
        let t = laplace_1d(n);
        // Shift into the interior of the spectrum: indefinite system.
        let shift = 1.7;
        let diag: Vec<f64> = t.diag.iter().map(|d| d - shift).collect();
        let lu = TridiagLu::factor(&t.off, &diag, &t.off);
        let b: Vec<f64> = (0..n).map(|i| (i as f64 * 0.37).sin()).collect();
        let x = lu.solve(&b);
        // Residual against the shifted matrix.
        let shifted = SymTridiag::new(diag, t.off.clone());
        let r = shifted.matvec(&x);
        let err = r
            .iter()
            .zip(&b)
            .map(|(a, c)| (a - c).abs())
            .fold(0.0f64, f64::max);
        assert!(err < 1e-9, "residual {err}");
    }

    #[test]
    fn inverse_iteration_recovers_eigenvector() {
        let n = 80;
        let t = laplace_1d(n);
        let lam = t.smallest_eigenvalues(1)[0];
        let v = t.eigenvector(lam, &[]).unwrap();
        // Exact eigenvector: sin(k pi (i+1) / (n+1)).
        let exact: Vec<f64> = (0..n)
            .map(|i| ((i as f64 + 1.0) * std::f64::consts::PI / (n as f64 + 1.0)).sin())
            .collect();
        let mut e = exact.clone();
        normalize(&mut e);
        let overlap = dot(&v, &e).abs();
        assert!((overlap - 1.0).abs() < 1e-9, "overlap {overlap}");
    }
}
