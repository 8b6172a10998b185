//! Cubic Lagrange interpolation on a uniform grid.

/// Interpolate `values` sampled at `x0 + i*h` at the point `x` with a 4-point
/// Lagrange stencil (clamped near the ends). Error is O(h^4) for smooth data.
pub fn cubic(x0: f64, h: f64, values: &[f64], x: f64) -> f64 {
    let n = values.len();
    assert!(n >= 4);
    let t = (x - x0) / h;
    let i = (t.floor() as isize).clamp(1, n as isize - 3) as usize;
    let s = t - i as f64; // in [0,1] away from the ends
    let (ym1, y0, y1, y2) = (values[i - 1], values[i], values[i + 1], values[i + 2]);
    // Lagrange basis on offsets {-1, 0, 1, 2}.
    let a = -s * (s - 1.0) * (s - 2.0) / 6.0;
    let b = (s + 1.0) * (s - 1.0) * (s - 2.0) / 2.0;
    let c = -(s + 1.0) * s * (s - 2.0) / 2.0;
    let d = (s + 1.0) * s * (s - 1.0) / 6.0;
    a * ym1 + b * y0 + c * y1 + d * y2
}
