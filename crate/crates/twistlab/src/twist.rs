//! Compactly supported twist-velocity profiles and their singular scalings.
//!
//! A profile is the velocity `dtheta(x)` of the rotation angle along the tube
//! axis: C^1, compactly supported, with a bounded second derivative. The
//! singular scaling keeps the total twist fixed while the support shrinks:
//! `sigma_eps(x) = dtheta(x/eps) / eps`.

use crate::error::{Error, Result};
use crate::numerics::quad;
use serde::{Deserialize, Serialize};

/// Which analytic family a profile belongs to.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum ProfileKind {
    /// `A * exp(-1/(1-x^2))` on |x| < 1, identically zero outside. Smooth,
    /// flat to all orders at the support edges.
    Bump { amplitude: f64 },
    /// Clamped cubic spline through `(x, dtheta)` knots, zero value and slope
    /// at both ends, zero outside the knot span.
    Spline { knots: Vec<(f64, f64)> },
    /// No twisting at all.
    Zero,
}

/// Twist-velocity profile with callable first and second derivatives.
#[derive(Clone, Debug)]
pub struct TwistProfile {
    pub kind: ProfileKind,
    /// Support is the symmetric-looking interval `[support.0, support.1]`.
    pub support: (f64, f64),
    /// Total twist accumulated across the support: integral of `dtheta`.
    pub total_twist: f64,
    spline: Option<ClampedSpline>,
}

impl TwistProfile {
    /// Velocity of the twisting angle.
    pub fn dtheta(&self, x: f64) -> f64 {
        match &self.kind {
            ProfileKind::Bump { amplitude } => bump(*amplitude, x),
            ProfileKind::Spline { .. } => self.spline.as_ref().unwrap().eval(x),
            ProfileKind::Zero => 0.0,
        }
    }

    /// Second derivative of the twisting angle.
    pub fn ddtheta(&self, x: f64) -> f64 {
        match &self.kind {
            ProfileKind::Bump { amplitude } => bump_derivative(*amplitude, x),
            ProfileKind::Spline { .. } => self.spline.as_ref().unwrap().derivative(x),
            ProfileKind::Zero => 0.0,
        }
    }

    pub fn is_zero(&self) -> bool {
        matches!(self.kind, ProfileKind::Zero)
    }

    /// Half-width of the support (`s` in the scaling formulas); 0 for the
    /// zero profile.
    pub fn support_radius(&self) -> f64 {
        self.support.1.abs().max(self.support.0.abs())
    }

    /// L^2 norm squared of the velocity, by quadrature over the support.
    pub fn velocity_l2_squared(&self) -> f64 {
        if self.is_zero() {
            return 0.0;
        }
        quad::simpson(
            |x| self.dtheta(x) * self.dtheta(x),
            self.support.0,
            self.support.1,
            4000,
        )
    }
}

fn bump(amplitude: f64, x: f64) -> f64 {
    if x.abs() < 1.0 {
        amplitude * (-1.0 / (1.0 - x * x)).exp()
    } else {
        0.0
    }
}

/// d(dtheta)/dx for the bump: `A * exp(-1/(1-x^2)) * (-2x) / (1-x^2)^2`.
/// The exponential flatness at |x| -> 1 keeps it (and every higher
/// derivative) finite there.
fn bump_derivative(amplitude: f64, x: f64) -> f64 {
    if x.abs() < 1.0 {
        let u = 1.0 - x * x;
        amplitude * (-1.0 / u).exp() * (-2.0 * x) / (u * u)
    } else {
        0.0
    }
}

/// Construct a profile, validating the invariants of its kind.
pub fn make_profile(kind: ProfileKind) -> Result<TwistProfile> {
    match kind {
        ProfileKind::Bump { amplitude } => {
            if !amplitude.is_finite() {
                return Err(Error::InvalidSpec("bump amplitude must be finite".into()));
            }
            let total = quad::simpson(|x| bump(amplitude, x), -1.0, 1.0, 4000);
            Ok(TwistProfile {
                kind: ProfileKind::Bump { amplitude },
                support: (-1.0, 1.0),
                total_twist: total,
                spline: None,
            })
        }
        ProfileKind::Spline { knots } => {
            let spline = ClampedSpline::build(&knots)?;
            let (a, b) = (knots[0].0, knots[knots.len() - 1].0);
            let total = quad::simpson(|x| spline.eval(x), a, b, 4000);
            Ok(TwistProfile {
                kind: ProfileKind::Spline { knots },
                support: (a, b),
                total_twist: total,
                spline: Some(spline),
            })
        }
        ProfileKind::Zero => Ok(TwistProfile {
            kind: ProfileKind::Zero,
            support: (0.0, 0.0),
            total_twist: 0.0,
            spline: None,
        }),
    }
}

/// A profile scaled so its support is `eps * support(dtheta)` while the total
/// twist stays fixed: `sigma_eps(x) = dtheta(x/eps)/eps`.
#[derive(Clone, Debug)]
pub struct ScaledTwist {
    pub profile: TwistProfile,
    pub epsilon: f64,
}

impl ScaledTwist {
    pub fn sigma(&self, x: f64) -> f64 {
        self.profile.dtheta(x / self.epsilon) / self.epsilon
    }

    /// Support radius of `sigma`: `eps * s`.
    pub fn support_radius(&self) -> f64 {
        self.epsilon * self.profile.support_radius()
    }

    /// Quadrature of `sigma` over its support; equals the total twist up to
    /// quadrature error, independent of `eps`.
    pub fn integral(&self) -> f64 {
        if self.profile.is_zero() {
            return 0.0;
        }
        let r = self.support_radius();
        quad::simpson(|x| self.sigma(x), -r, r, 4000)
    }

    /// Quadrature of `sigma^2`; scales like `1/eps`.
    pub fn l2_squared(&self) -> f64 {
        if self.profile.is_zero() {
            return 0.0;
        }
        let r = self.support_radius();
        quad::simpson(|x| self.sigma(x) * self.sigma(x), -r, r, 4000)
    }
}

pub fn scaled_twist(profile: &TwistProfile, epsilon: f64) -> Result<ScaledTwist> {
    if !(epsilon > 0.0) {
        return Err(Error::InvalidSpec(format!(
            "scale parameter must be positive, got {epsilon}"
        )));
    }
    Ok(ScaledTwist {
        profile: profile.clone(),
        epsilon,
    })
}

/// Cubic spline with zero value and zero slope at both ends, evaluating to 0
/// outside the knot span. Natural-cubic second-derivative solve on the knots,
/// with the clamped end rows.
#[derive(Clone, Debug)]
struct ClampedSpline {
    xs: Vec<f64>,
    ys: Vec<f64>,
    /// Second derivatives at the knots.
    m: Vec<f64>,
}

impl ClampedSpline {
    fn build(knots: &[(f64, f64)]) -> Result<Self> {
        if knots.len() < 4 {
            return Err(Error::InvalidSpec(
                "spline profile needs at least 4 knots".into(),
            ));
        }
        let xs: Vec<f64> = knots.iter().map(|k| k.0).collect();
        let ys: Vec<f64> = knots.iter().map(|k| k.1).collect();
        for w in xs.windows(2) {
            if !(w[1] > w[0]) {
                // Coincident or decreasing knots make the second derivative
                // blow up; this is the unbounded-curvature rejection.
                return Err(Error::InvalidSpec(
                    "spline knots must be strictly increasing (coincident knots give an unbounded second derivative)"
                        .into(),
                ));
            }
        }
        let n = xs.len();
        if ys[0] != 0.0 || ys[n - 1] != 0.0 {
            return Err(Error::InvalidSpec(
                "spline endpoint values must vanish (compact support)".into(),
            ));
        }
        // Clamped end conditions (zero end slopes) keep dtheta C^1 across the
        // support boundary.
        let mut diag = vec![0.0; n];
        let mut sub = vec![0.0; n - 1];
        let mut sup = vec![0.0; n - 1];
        let mut rhs = vec![0.0; n];
        let h = |i: usize| xs[i + 1] - xs[i];
        diag[0] = 2.0 * h(0);
        sup[0] = h(0);
        rhs[0] = 6.0 * ((ys[1] - ys[0]) / h(0) - 0.0);
        for i in 1..n - 1 {
            sub[i - 1] = h(i - 1);
            diag[i] = 2.0 * (h(i - 1) + h(i));
            sup[i] = h(i);
            rhs[i] = 6.0 * ((ys[i + 1] - ys[i]) / h(i) - (ys[i] - ys[i - 1]) / h(i - 1));
        }
        sub[n - 2] = h(n - 2);
        diag[n - 1] = 2.0 * h(n - 2);
        rhs[n - 1] = 6.0 * (0.0 - (ys[n - 1] - ys[n - 2]) / h(n - 2));
        let lu = crate::numerics::tridiag::TridiagLu::factor(&sub, &diag, &sup);
        let m = lu.solve(&rhs);
        Ok(Self { xs, ys, m })
    }

    fn segment(&self, x: f64) -> Option<usize> {
        if x < self.xs[0] || x > self.xs[self.xs.len() - 1] {
            return None;
        }
        let mut i = match self
            .xs
            .binary_search_by(|p| p.total_cmp(&x))
        {
            Ok(i) => i,
            Err(i) => i.saturating_sub(1),
        };
        if i >= self.xs.len() - 1 {
            i = self.xs.len() - 2;
        }
        Some(i)
    }

    fn eval(&self, x: f64) -> f64 {
        let Some(i) = self.segment(x) else {
            return 0.0;
        };
        let h = self.xs[i + 1] - self.xs[i];
        let a = (self.xs[i + 1] - x) / h;
        let b = (x - self.xs[i]) / h;
        a * self.ys[i]
            + b * self.ys[i + 1]
            + ((a * a * a - a) * self.m[i] + (b * b * b - b) * self.m[i + 1]) * h * h / 6.0
    }

    fn derivative(&self, x: f64) -> f64 {
        let Some(i) = self.segment(x) else {
            return 0.0;
        };
        let h = self.xs[i + 1] - self.xs[i];
        let a = (self.xs[i + 1] - x) / h;
        let b = (x - self.xs[i]) / h;
        (self.ys[i + 1] - self.ys[i]) / h
            + ((3.0 * b * b - 1.0) * self.m[i + 1] - (3.0 * a * a - 1.0) * self.m[i]) * h / 6.0
    }
}
