//! Least-squares fits for convergence-rate measurements.

use crate::error::{Error, Result};

/// Result of a log-log power-law fit `value ~ C * eps^exponent`.
#[derive(Clone, Copy, Debug, serde::Serialize)]
pub struct RateFit {
    pub exponent: f64,
    /// `ln C` of the fitted model.
    pub intercept: f64,
    /// RMS deviation in log space.
    pub rms_residual: f64,
    /// Number of nonpositive points dropped before fitting.
    pub dropped: usize,
}

/// Fit a least-squares line in (ln eps, ln value).
///
/// Nonpositive values cannot enter a log fit; they are dropped with a warning
/// and counted. Fewer than 3 surviving points is an error.
pub fn fit_rate(points: &[(f64, f64)]) -> Result<RateFit> {
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    let mut dropped = 0usize;
    for &(e, v) in points {
        if v > 0.0 && e > 0.0 {
            xs.push(e.ln());
            ys.push(v.ln());
        } else {
            dropped += 1;
            log::warn!("fit_rate: dropping nonpositive point (eps={e}, value={v})");
        }
    }
    if xs.len() < 3 {
        return Err(Error::InvalidSpec(format!(
            "rate fit needs at least 3 positive points, got {}",
            xs.len()
        )));
    }
    let n = xs.len() as f64;
    let sx: f64 = xs.iter().sum();
    let sy: f64 = ys.iter().sum();
    let sxx: f64 = xs.iter().map(|x| x * x).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| x * y).sum();
    let denom = n * sxx - sx * sx;
    let slope = (n * sxy - sx * sy) / denom;
    let intercept = (sy - slope * sx) / n;
    let rms = (xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| {
            let d = y - (intercept + slope * x);
            d * d
        })
        .sum::<f64>()
        / n)
        .sqrt();
    Ok(RateFit {
        exponent: slope,
        intercept,
        rms_residual: rms,
        dropped,
    })
}

/// Extrapolate `value(eps)` to `eps = 0` with a least-squares quadratic in
/// `eps` over the `tail` smallest epsilons. Returns `(limit, rms_residual)`.
pub fn extrapolate_zero_quadratic(points: &[(f64, f64)], tail: usize) -> Result<(f64, f64)> {
    let mut pts: Vec<(f64, f64)> = points.to_vec();
    if pts.len() < 3 {
        return Err(Error::InvalidSpec(
            "quadratic extrapolation needs at least 3 points".into(),
        ));
    }
    pts.sort_by(|a, b| a.0.total_cmp(&b.0));
    let take = tail.max(3).min(pts.len());
    let pts = &pts[..take];
    // Normal equations for [1, eps, eps^2].
    let mut a = [[0.0f64; 3]; 3];
    let mut b = [0.0f64; 3];
    for &(e, v) in pts {
        let row = [1.0, e, e * e];
        for i in 0..3 {
            for j in 0..3 {
                a[i][j] += row[i] * row[j];
            }
            b[i] += row[i] * v;
        }
    }
    let m = nalgebra::Matrix3::from_fn(|i, j| a[i][j]);
    let rhs = nalgebra::Vector3::from_row_slice(&b);
    let sol = m
        .lu()
        .solve(&rhs)
        .ok_or_else(|| Error::NearSingular("singular extrapolation system".into()))?;
    let rms = (pts
        .iter()
        .map(|&(e, v)| {
            let d = v - (sol[0] + sol[1] * e + sol[2] * e * e);
            d * d
        })
        .sum::<f64>()
        / pts.len() as f64)
        .sqrt();
    Ok((sol[0], rms))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_linear_power_law() {
        let pts: Vec<(f64, f64)> = [0.4, 0.2, 0.1, 0.05]
            .iter()
            .map(|&e| (e, 3.0 * e))
            .collect();
        let fit = fit_rate(&pts).unwrap();
        assert!((fit.exponent - 1.0).abs() < 1e-10);
        assert!((fit.intercept.exp() - 3.0).abs() < 1e-10);
        assert!(fit.rms_residual < 1e-12);
    }

    #[test]
    fn exact_quadratic_power_law() {
        let pts: Vec<(f64, f64)> = [0.4, 0.2, 0.1, 0.05, 0.025]
            .iter()
            .map(|&e| (e, e * e / 29.6))
            .collect();
        let fit = fit_rate(&pts).unwrap();
        assert!((fit.exponent - 2.0).abs() < 1e-10);
    }

    #[test]
    fn drops_nonpositive_points() {
        let pts = vec![(0.4, 0.4), (0.2, 0.2), (0.1, 0.1), (0.05, 0.0)];
        let fit = fit_rate(&pts).unwrap();
        assert_eq!(fit.dropped, 1);
        assert!((fit.exponent - 1.0).abs() < 1e-10);
        let too_few = vec![(0.4, -1.0), (0.2, 0.0), (0.1, 0.1), (0.05, 0.05)];
        assert!(fit_rate(&too_few).is_err());
    }

    #[test]
    fn quadratic_extrapolation_recovers_limit() {
        let pts: Vec<(f64, f64)> = [0.2, 0.1, 0.07, 0.05]
            .iter()
            .map(|&e| (e, 0.75 - 4.0 * e + 6.0 * e * e))
            .collect();
        let (limit, rms) = extrapolate_zero_quadratic(&pts, 4).unwrap();
        assert!((limit - 0.75).abs() < 1e-12);
        assert!(rms < 1e-12);
    }
}
