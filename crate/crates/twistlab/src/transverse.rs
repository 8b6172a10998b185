//! Transverse spectral data: the Dirichlet Laplacian eigenproblem on the
//! cross-section, the angular derivative of its modes, and the coupling
//! matrices the twisting terms contract against.

use crate::error::{Error, Result};
use crate::numerics::{cg, subspace};
use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

/// Cross-section geometry plus discretization resolution.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CrossSectionSpec {
    pub kind: SectionKind,
    /// Grid points per unit length.
    pub resolution: usize,
    /// Rotation-axis offset from the area centroid; (0, 0) pins the axis at
    /// the centroid.
    pub axis_offset: (f64, f64),
    /// A square cross-section is rejected unless explicitly allowed: its
    /// symmetry group makes the first-order twist-coupling diagnostics
    /// degenerate, which silently weakens the downstream checks.
    pub allow_square: bool,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub enum SectionKind {
    Rectangle { a: f64, b: f64 },
    Polygon { vertices: Vec<(f64, f64)> },
}

/// Discretized cross-section: a uniform square lattice, Dirichlet by
/// omission of every node on or outside the boundary.
#[derive(Clone, Debug)]
pub struct CrossSectionGrid {
    /// Mesh spacing (same in both directions).
    pub spacing: f64,
    pub nx: usize,
    pub ny: usize,
    /// Lattice cell -> compact interior index.
    index: Vec<Option<usize>>,
    /// Compact interior index -> lattice cell (i, j).
    cells: Vec<(usize, usize)>,
    /// Node coordinates relative to the rotation axis.
    pub coords: Vec<(f64, f64)>,
    /// Precomputed neighbor indices [W, E, S, N]; -1 where the neighbor is
    /// outside the mask (the Dirichlet extension).
    nbrs: Vec<[i32; 4]>,
}

impl CrossSectionGrid {
    pub fn n_interior(&self) -> usize {
        self.cells.len()
    }

    /// Quadrature weight of one node (cell area).
    pub fn cell_area(&self) -> f64 {
        self.spacing * self.spacing
    }

    fn at(&self, i: isize, j: isize) -> Option<usize> {
        if i < 0 || j < 0 || i as usize >= self.nx || j as usize >= self.ny {
            return None;
        }
        self.index[j as usize * self.nx + i as usize]
    }

    #[inline]
    fn nb(&self, v: &[f64], q: i32) -> f64 {
        if q >= 0 {
            v[q as usize]
        } else {
            0.0
        }
    }

    /// 5-point minus-Laplacian with Dirichlet by omission.
    pub fn laplacian_matvec(&self, v: &[f64]) -> Vec<f64> {
        let n = self.n_interior();
        assert_eq!(v.len(), n);
        let inv_h2 = 1.0 / (self.spacing * self.spacing);
        let mut y = vec![0.0; n];
        for p in 0..n {
            let [w, e, s, nn] = self.nbrs[p];
            let acc = 4.0 * v[p]
                - self.nb(v, w)
                - self.nb(v, e)
                - self.nb(v, s)
                - self.nb(v, nn);
            y[p] = acc * inv_h2;
        }
        y
    }

    /// Angular derivative x3 d2 - x2 d3 by centered differences; missing
    /// neighbors contribute zero (the Dirichlet extension).
    pub fn angular_derivative(&self, v: &[f64]) -> Vec<f64> {
        let n = self.n_interior();
        assert_eq!(v.len(), n);
        let two_h = 2.0 * self.spacing;
        let mut y = vec![0.0; n];
        for p in 0..n {
            let [w, e, s, nn] = self.nbrs[p];
            let vx = (self.nb(v, e) - self.nb(v, w)) / two_h;
            let vy = (self.nb(v, nn) - self.nb(v, s)) / two_h;
            let (x2, x3) = self.coords[p];
            y[p] = x3 * vx - x2 * vy;
        }
        y
    }

    /// Discrete estimate of ||d2^2 v||^2 + ||d3^2 v||^2, used by the h^2
    /// eigenvalue correction.
    fn fourth_order_energy(&self, v: &[f64]) -> f64 {
        let h2 = self.spacing * self.spacing;
        let mut acc = 0.0;
        for p in 0..self.n_interior() {
            let [w, e, s, nn] = self.nbrs[p];
            let dxx = (self.nb(v, e) - 2.0 * v[p] + self.nb(v, w)) / h2;
            let dyy = (self.nb(v, nn) - 2.0 * v[p] + self.nb(v, s)) / h2;
            acc += dxx * dxx + dyy * dyy;
        }
        acc * self.cell_area()
    }
}

/// One Dirichlet eigenpair of the cross-section with its angular derivative.
#[derive(Clone, Debug)]
pub struct TransverseMode {
    /// 1-based mode index after sorting by energy.
    pub index: usize,
    /// Richardson-corrected eigenvalue (the reported energy).
    pub energy: f64,
    /// Raw Ritz value of the discrete operator.
    pub energy_raw: f64,
    /// Node values, L^2-normalized in the grid quadrature.
    pub values: Vec<f64>,
    /// Angular derivative of `values` on the same nodes.
    pub tau_values: Vec<f64>,
}

/// Twist-coupling matrices over a set of transverse modes.
#[derive(Clone, Debug)]
pub struct CouplingData {
    /// Skew-symmetric: D[n][m] = (J_n, tau J_m).
    pub d: DMatrix<f64>,
    /// Symmetric PSD Gram matrix: G[n][m] = (tau J_n, tau J_m).
    pub g: DMatrix<f64>,
    /// ||tau J_1||^2 = G[0][0]; the effective 1D potential strength.
    pub c_omega: f64,
    /// Largest |D + D^T| entry before symmetrization. With centered
    /// differences this is rounding-level; anything bigger signals corrupted
    /// mode data.
    pub raw_skew_defect: f64,
}

pub fn build_cross_section(spec: &CrossSectionSpec) -> Result<CrossSectionGrid> {
    if spec.resolution == 0 {
        return Err(Error::InvalidSpec("resolution must be positive".into()));
    }
    let h = 1.0 / spec.resolution as f64;
    let (inside, bbox, centroid): (Box<dyn Fn(f64, f64) -> bool>, _, _) = match &spec.kind {
        SectionKind::Rectangle { a, b } => {
            if !(*a > 0.0 && *b > 0.0) {
                return Err(Error::InvalidSpec(format!(
                    "rectangle sides must be positive, got a={a}, b={b}"
                )));
            }
            if (a - b).abs() < 1e-12 * a.max(*b) && !spec.allow_square {
                return Err(Error::InvalidSpec(
                    "square cross-section rejected: its symmetry degenerates the first-mode \
                     twist-coupling diagnostics; pass allow_square / --override-square to proceed"
                        .into(),
                ));
            }
            let (a, b) = (*a, *b);
            let margin = 1e-9 * h;
            (
                Box::new(move |x: f64, y: f64| {
                    x > -a / 2.0 + margin
                        && x < a / 2.0 - margin
                        && y > -b / 2.0 + margin
                        && y < b / 2.0 - margin
                }),
                (-a / 2.0, a / 2.0, -b / 2.0, b / 2.0),
                (0.0, 0.0),
            )
        }
        SectionKind::Polygon { vertices } => {
            validate_polygon(vertices)?;
            let verts = vertices.clone();
            let (cx, cy) = polygon_centroid(&verts);
            let (mut xmin, mut xmax, mut ymin, mut ymax) =
                (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
            for &(x, y) in &verts {
                xmin = xmin.min(x);
                xmax = xmax.max(x);
                ymin = ymin.min(y);
                ymax = ymax.max(y);
            }
            let margin = 1e-9 * h;
            (
                Box::new(move |x: f64, y: f64| {
                    point_in_polygon(&verts, x, y) && edge_distance(&verts, x, y) > margin
                }),
                (xmin, xmax, ymin, ymax),
                (cx, cy),
            )
        }
    };

    let (xmin, xmax, ymin, ymax) = bbox;
    let nx = ((xmax - xmin) / h).round() as usize + 1;
    let ny = ((ymax - ymin) / h).round() as usize + 1;
    let axis = (centroid.0 + spec.axis_offset.0, centroid.1 + spec.axis_offset.1);

    let mut index = vec![None; nx * ny];
    let mut cells = Vec::new();
    let mut coords = Vec::new();
    for j in 0..ny {
        for i in 0..nx {
            let x = xmin + i as f64 * h;
            let y = ymin + j as f64 * h;
            if inside(x, y) {
                index[j * nx + i] = Some(cells.len());
                cells.push((i, j));
                coords.push((x - axis.0, y - axis.1));
            }
        }
    }
    if cells.len() < 100 {
        return Err(Error::UnderResolved {
            msg: format!(
                "cross-section grid has {} interior nodes, need at least 100",
                cells.len()
            ),
            min_n: 100,
        });
    }
    let mut grid = CrossSectionGrid {
        spacing: h,
        nx,
        ny,
        index,
        cells,
        coords,
        nbrs: Vec::new(),
    };
    grid.nbrs = (0..grid.n_interior())
        .map(|p| {
            let (i, j) = grid.cells[p];
            let (i, j) = (i as isize, j as isize);
            [
                grid.at(i - 1, j).map_or(-1, |q| q as i32),
                grid.at(i + 1, j).map_or(-1, |q| q as i32),
                grid.at(i, j - 1).map_or(-1, |q| q as i32),
                grid.at(i, j + 1).map_or(-1, |q| q as i32),
            ]
        })
        .collect();
    Ok(grid)
}

/// Lowest `n_modes` Dirichlet eigenpairs, sorted by energy, normalized and
/// orthonormalized in the grid quadrature, with the angular derivatives
/// attached.
pub fn solve_dirichlet_modes(grid: &CrossSectionGrid, n_modes: usize) -> Result<Vec<TransverseMode>> {
    if n_modes < 2 {
        return Err(Error::InvalidSpec(
            "need at least 2 transverse modes (the mode gap E2 - E1 drives the second bound)"
                .into(),
        ));
    }
    let n = grid.n_interior();
    let matvec = |v: &[f64]| grid.laplacian_matvec(v);
    let solve = |b: &[f64], tol: f64| {
        cg::solve(|v| grid.laplacian_matvec(v), b, tol, 40 * (n + 100))
            .expect("transverse CG solve failed on an SPD operator")
    };
    let pairs = subspace::lowest_eigenpairs(solve, matvec, n, n_modes, 1e-9, 400).map_err(
        |e| match e {
            Error::SolverFailure { msg, residuals } => Error::SolverFailure {
                msg: format!("transverse eigensolve: {msg}"),
                residuals,
            },
            other => other,
        },
    )?;

    let area = grid.cell_area();
    // Orthonormalize exactly in the quadrature inner product so the Gram
    // matrix of the returned modes is the identity to rounding.
    let mut vectors: Vec<Vec<f64>> = pairs.vectors;
    for k in 0..vectors.len() {
        for prev in 0..k {
            let c: f64 = vectors[k]
                .iter()
                .zip(&vectors[prev])
                .map(|(a, b)| a * b)
                .sum::<f64>()
                * area;
            let prev_v = vectors[prev].clone();
            for (a, b) in vectors[k].iter_mut().zip(&prev_v) {
                *a -= c * b;
            }
        }
        let norm = (vectors[k].iter().map(|x| x * x).sum::<f64>() * area).sqrt();
        for x in vectors[k].iter_mut() {
            *x /= norm;
        }
        // Deterministic sign: the node carrying the largest magnitude is
        // positive.
        let mut imax = 0;
        for (i, x) in vectors[k].iter().enumerate() {
            if x.abs() > vectors[k][imax].abs() {
                imax = i;
            }
        }
        if vectors[k][imax] < 0.0 {
            for x in vectors[k].iter_mut() {
                *x = -*x;
            }
        }
    }

    let mut modes = Vec::with_capacity(n_modes);
    for (k, values) in vectors.into_iter().enumerate() {
        let energy_raw = pairs.values[k];
        let h2 = grid.spacing * grid.spacing;
        let energy = energy_raw + h2 / 12.0 * grid.fourth_order_energy(&values);
        let tau_values = grid.angular_derivative(&values);
        modes.push(TransverseMode {
            index: k + 1,
            energy,
            energy_raw,
            values,
            tau_values,
        });
    }
    if modes[1].energy <= modes[0].energy {
        return Err(Error::SolverFailure {
            msg: "transverse spectrum lacks a strict gap between the first two modes".into(),
            residuals: vec![modes[1].energy - modes[0].energy],
        });
    }
    Ok(modes)
}

/// Quadrature tolerance for coupling-data sanity checks.
const SKEW_TOLERANCE: f64 = 1e-8;

pub fn coupling_matrices(modes: &[TransverseMode], grid: &CrossSectionGrid) -> Result<CouplingData> {
    if modes.len() < 2 {
        return Err(Error::InvalidSpec("need at least 2 modes for coupling data".into()));
    }
    let m = modes.len();
    let area = grid.cell_area();
    let mut d_raw = DMatrix::zeros(m, m);
    let mut g_raw = DMatrix::zeros(m, m);
    for a in 0..m {
        for b in 0..m {
            let mut dd = 0.0;
            let mut gg = 0.0;
            for p in 0..grid.n_interior() {
                dd += modes[a].values[p] * modes[b].tau_values[p];
                gg += modes[a].tau_values[p] * modes[b].tau_values[p];
            }
            d_raw[(a, b)] = dd * area;
            g_raw[(a, b)] = gg * area;
        }
    }
    let mut raw_skew_defect = 0.0f64;
    for a in 0..m {
        for b in 0..m {
            raw_skew_defect = raw_skew_defect.max((d_raw[(a, b)] + d_raw[(b, a)]).abs());
        }
    }
    if raw_skew_defect > 10.0 * SKEW_TOLERANCE {
        return Err(Error::UnderResolved {
            msg: format!(
                "angular-derivative coupling is not skew to quadrature accuracy \
                 (defect {raw_skew_defect:.3e}); the mode data are inconsistent with the grid"
            ),
            min_n: grid.n_interior() * 4,
        });
    }
    let d = (&d_raw - d_raw.transpose()) * 0.5;
    let g = (&g_raw + g_raw.transpose()) * 0.5;
    let c_omega = g[(0, 0)];
    Ok(CouplingData {
        d,
        g,
        c_omega,
        raw_skew_defect,
    })
}

fn validate_polygon(vertices: &[(f64, f64)]) -> Result<()> {
    if vertices.len() < 3 {
        return Err(Error::InvalidSpec("polygon needs at least 3 vertices".into()));
    }
    let area = polygon_area(vertices);
    if area.abs() < 1e-12 {
        return Err(Error::InvalidSpec("polygon has (near) zero area".into()));
    }
    let n = vertices.len();
    for i in 0..n {
        for j in i + 1..n {
            // Skip adjacent edges (they share an endpoint).
            if j == i || (j + 1) % n == i || (i + 1) % n == j {
                continue;
            }
            let (a, b) = (vertices[i], vertices[(i + 1) % n]);
            let (c, d) = (vertices[j], vertices[(j + 1) % n]);
            if segments_intersect(a, b, c, d) {
                return Err(Error::InvalidSpec(format!(
                    "polygon is self-intersecting (edges {i} and {j} cross)"
                )));
            }
        }
    }
    Ok(())
}

fn polygon_area(v: &[(f64, f64)]) -> f64 {
    let n = v.len();
    let mut s = 0.0;
    for i in 0..n {
        let (x0, y0) = v[i];
        let (x1, y1) = v[(i + 1) % n];
        s += x0 * y1 - x1 * y0;
    }
    s / 2.0
}

fn polygon_centroid(v: &[(f64, f64)]) -> (f64, f64) {
    let a = polygon_area(v);
    let n = v.len();
    let (mut cx, mut cy) = (0.0, 0.0);
    for i in 0..n {
        let (x0, y0) = v[i];
        let (x1, y1) = v[(i + 1) % n];
        let w = x0 * y1 - x1 * y0;
        cx += (x0 + x1) * w;
        cy += (y0 + y1) * w;
    }
    (cx / (6.0 * a), cy / (6.0 * a))
}

/// Crossing-number point-in-polygon test.
fn point_in_polygon(v: &[(f64, f64)], x: f64, y: f64) -> bool {
    let n = v.len();
    let mut inside = false;
    let mut j = n - 1;
    for i in 0..n {
        let (xi, yi) = v[i];
        let (xj, yj) = v[j];
        if (yi > y) != (yj > y) {
            let x_cross = xi + (y - yi) / (yj - yi) * (xj - xi);
            if x < x_cross {
                inside = !inside;
            }
        }
        j = i;
    }
    inside
}

fn edge_distance(v: &[(f64, f64)], x: f64, y: f64) -> f64 {
    let n = v.len();
    let mut best = f64::INFINITY;
    for i in 0..n {
        let (x0, y0) = v[i];
        let (x1, y1) = v[(i + 1) % n];
        let (dx, dy) = (x1 - x0, y1 - y0);
        let len2 = dx * dx + dy * dy;
        let t = (((x - x0) * dx + (y - y0) * dy) / len2).clamp(0.0, 1.0);
        let (px, py) = (x0 + t * dx, y0 + t * dy);
        best = best.min(((x - px).powi(2) + (y - py).powi(2)).sqrt());
    }
    best
}

fn segments_intersect(a: (f64, f64), b: (f64, f64), c: (f64, f64), d: (f64, f64)) -> bool {
    let cross = |o: (f64, f64), p: (f64, f64), q: (f64, f64)| {
        (p.0 - o.0) * (q.1 - o.1) - (p.1 - o.1) * (q.0 - o.0)
    };
    let d1 = cross(c, d, a);
    let d2 = cross(c, d, b);
    let d3 = cross(a, b, c);
    let d4 = cross(a, b, d);
    ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0))
        && ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn rect_spec(a: f64, b: f64, resolution: usize) -> CrossSectionSpec {
        CrossSectionSpec {
            kind: SectionKind::Rectangle { a, b },
            resolution,
            axis_offset: (0.0, 0.0),
            allow_square: false,
        }
    }

    /// Continuum rectangle eigenvalue: pi^2 (m^2/a^2 + n^2/b^2).
    fn rect_energy(a: f64, b: f64, m: usize, n: usize) -> f64 {
        std::f64::consts::PI.powi(2)
            * ((m * m) as f64 / (a * a) + (n * n) as f64 / (b * b))
    }

    /// Exact eigenvalue of the aligned 5-point discretization:
    /// (4/h^2)[sin^2(m pi h / 2a) + sin^2(n pi h / 2b)].
    fn rect_energy_discrete(a: f64, b: f64, h: f64, m: usize, n: usize) -> f64 {
        let sx = (m as f64 * std::f64::consts::PI * h / (2.0 * a)).sin();
        let sy = (n as f64 * std::f64::consts::PI * h / (2.0 * b)).sin();
        4.0 / (h * h) * (sx * sx + sy * sy)
    }

    /// Analytic C_omega for a centered rectangle: with the normalized ground
    /// mode (2/sqrt(ab)) cos(pi x2/a) cos(pi x3/b),
    /// ||tau J_1||^2 = (pi^2/12 - 1/2)(a^2/b^2 + b^2/a^2) - 1/2.
    fn rect_c_omega(a: f64, b: f64) -> f64 {
        let r = a * a / (b * b) + b * b / (a * a);
        (std::f64::consts::PI.powi(2) / 12.0 - 0.5) * r - 0.5
    }

    #[test]
    fn rectangle_grid_dimensions() {
        let g = build_cross_section(&rect_spec(1.0, 0.5, 40)).unwrap();
        // Interior lattice of an aligned rectangle: (a/h - 1) x (b/h - 1).
        assert_eq!(g.n_interior(), 39 * 19);
        assert!((g.spacing - 0.025).abs() < 1e-15);
    }

    #[test]
    fn square_rejected_without_override() {
        let err = build_cross_section(&rect_spec(1.0, 1.0, 40)).unwrap_err();
        assert!(format!("{err}").contains("square"));
        let mut spec = rect_spec(1.0, 1.0, 40);
        spec.allow_square = true;
        assert!(build_cross_section(&spec).is_ok());
    }

    #[test]
    fn rejects_degenerate_geometry() {
        assert!(build_cross_section(&rect_spec(0.0, 0.5, 40)).is_err());
        let flat = CrossSectionSpec {
            kind: SectionKind::Polygon {
                vertices: vec![(0.0, 0.0), (1.0, 0.0), (2.0, 0.0)],
            },
            resolution: 40,
            axis_offset: (0.0, 0.0),
            allow_square: false,
        };
        assert!(build_cross_section(&flat).is_err());
        // Self-intersecting with nonzero signed area, so the area guard
        // cannot mask the intersection check.
        let bowtie = CrossSectionSpec {
            kind: SectionKind::Polygon {
                vertices: vec![(0.0, 0.0), (3.0, 0.0), (1.0, 2.0), (2.0, -1.0)],
            },
            resolution: 40,
            axis_offset: (0.0, 0.0),
            allow_square: false,
        };
        let err = build_cross_section(&bowtie).unwrap_err();
        assert!(format!("{err}").contains("self-intersecting"));
    }

    #[test]
    fn l_shape_mask_matches_winding_oracle() {
        let verts = vec![
            (0.0, 0.0),
            (2.0, 0.0),
            (2.0, 1.0),
            (1.0, 1.0),
            (1.0, 2.0),
            (0.0, 2.0),
        ];
        let spec = CrossSectionSpec {
            kind: SectionKind::Polygon { vertices: verts.clone() },
            resolution: 24,
            axis_offset: (0.0, 0.0),
            allow_square: false,
        };
        let g = build_cross_section(&spec).unwrap();
        assert!(g.n_interior() >= 100);
        // Winding-number oracle, evaluated on absolute coordinates.
        let (cx, cy) = polygon_centroid(&verts);
        let winding = |x: f64, y: f64| -> bool {
            let mut angle = 0.0f64;
            let n = verts.len();
            for i in 0..n {
                let (x0, y0) = (verts[i].0 - x, verts[i].1 - y);
                let (x1, y1) = (verts[(i + 1) % n].0 - x, verts[(i + 1) % n].1 - y);
                angle += (x0 * y1 - y0 * x1).atan2(x0 * x1 + y0 * y1);
            }
            angle.abs() > std::f64::consts::PI
        };
        for p in 0..g.n_interior() {
            let (rx, ry) = g.coords[p];
            assert!(
                winding(rx + cx, ry + cy),
                "node {p} at ({rx}, {ry}) misclassified"
            );
        }
        // Points clearly outside the notch are not interior nodes.
        assert!(!winding(1.5, 1.5));
    }

    #[test]
    fn rectangle_raw_energies_match_discrete_formula() {
        let g = build_cross_section(&rect_spec(1.0, 0.5, 40)).unwrap();
        let modes = solve_dirichlet_modes(&g, 4).unwrap();
        let h = g.spacing;
        // Sorted continuum labels for rectangle(1, 0.5): (1,1), (2,1), (3,1), (1,2).
        let labels = [(1, 1), (2, 1), (3, 1), (1, 2)];
        for (k, &(m, n)) in labels.iter().enumerate() {
            let exact = rect_energy_discrete(1.0, 0.5, h, m, n);
            assert!(
                (modes[k].energy_raw - exact).abs() < 1e-7 * exact,
                "mode {k}: raw {} vs discrete exact {exact}",
                modes[k].energy_raw
            );
        }
    }

    #[test]
    fn rectangle_corrected_energies_near_continuum() {
        let g = build_cross_section(&rect_spec(1.0, 0.5, 40)).unwrap();
        let modes = solve_dirichlet_modes(&g, 2).unwrap();
        let e1 = rect_energy(1.0, 0.5, 1, 1); // 5 pi^2
        let e2 = rect_energy(1.0, 0.5, 2, 1); // 8 pi^2
        // Raw values carry the O(h^2) defect; corrected ones are O(h^4).
        assert!((modes[0].energy - e1).abs() < 5e-4 * e1);
        assert!((modes[1].energy - e2).abs() < 5e-4 * e2);
        assert!((modes[0].energy - e1).abs() < (modes[0].energy_raw - e1).abs() / 20.0);
    }

    #[test]
    fn rectangle_ground_mode_matches_cosine_product() {
        let g = build_cross_section(&rect_spec(1.0, 0.5, 40)).unwrap();
        let modes = solve_dirichlet_modes(&g, 2).unwrap();
        let norm = 2.0 / (1.0f64 * 0.5).sqrt();
        let mut max_err = 0.0f64;
        for p in 0..g.n_interior() {
            let (x, y) = g.coords[p];
            let exact = norm
                * (std::f64::consts::PI * x / 1.0).cos()
                * (std::f64::consts::PI * y / 0.5).cos();
            max_err = max_err.max((modes[0].values[p] - exact).abs());
        }
        // O(h^2) pointwise.
        assert!(max_err < 30.0 * g.spacing * g.spacing, "max_err {max_err}");
    }

    #[test]
    fn modes_orthonormal_in_quadrature() {
        let g = build_cross_section(&rect_spec(1.0, 0.5, 30)).unwrap();
        let modes = solve_dirichlet_modes(&g, 5).unwrap();
        let area = g.cell_area();
        for a in 0..5 {
            for b in 0..5 {
                let dot: f64 = modes[a]
                    .values
                    .iter()
                    .zip(&modes[b].values)
                    .map(|(x, y)| x * y)
                    .sum::<f64>()
                    * area;
                let expect = if a == b { 1.0 } else { 0.0 };
                assert!((dot - expect).abs() < 1e-8, "gram[{a}][{b}] = {dot}");
            }
        }
    }

    #[test]
    fn energies_sorted_with_strict_first_gap() {
        let g = build_cross_section(&rect_spec(1.0, 0.5, 30)).unwrap();
        let modes = solve_dirichlet_modes(&g, 6).unwrap();
        for w in modes.windows(2) {
            assert!(w[0].energy <= w[1].energy + 1e-12);
        }
        assert!(modes[1].energy > modes[0].energy + 1.0);
    }

    #[test]
    fn coupling_skew_and_positive() {
        let g = build_cross_section(&rect_spec(1.0, 0.5, 40)).unwrap();
        let modes = solve_dirichlet_modes(&g, 5).unwrap();
        let c = coupling_matrices(&modes, &g).unwrap();
        // Centered differences are exactly antisymmetric on the masked grid,
        // so the raw defect is rounding-level.
        assert!(c.raw_skew_defect < 1e-12, "defect {}", c.raw_skew_defect);
        assert!((c.d.clone() + c.d.transpose()).abs().max() < 1e-14);
        assert_eq!(c.d[(0, 0)], 0.0);
        let eig = c.g.clone().symmetric_eigen();
        for ev in eig.eigenvalues.iter() {
            assert!(*ev > -1e-10, "G eigenvalue {ev}");
        }
        assert!(c.c_omega > 0.0);
        // Independent scalar quadrature of ||tau J_1||^2.
        let direct: f64 = modes[0]
            .tau_values
            .iter()
            .map(|t| t * t)
            .sum::<f64>()
            * g.cell_area();
        assert!((c.c_omega - direct).abs() < 1e-12);
    }

    #[test]
    fn c_omega_matches_analytic_rectangle_value() {
        // The integrand (tau J_1)^2 does not vanish on the wall, so the
        // interior-node quadrature carries a half-cell boundary deficit:
        // C(h) = C_exact - kappa h + O(h^2). The interior sum is kept anyway
        // (it is a true Gram matrix, exactly PSD, which the operator
        // positivity checks rely on); here the O(h) model itself is verified
        // and Richardson-extrapolated against the analytic value.
        let exact = rect_c_omega(1.0, 0.5);
        assert!((exact - 0.8704848922).abs() < 1e-9);
        let c_of = |res: usize| {
            let g = build_cross_section(&rect_spec(1.0, 0.5, res)).unwrap();
            let modes = solve_dirichlet_modes(&g, 2).unwrap();
            coupling_matrices(&modes, &g).unwrap().c_omega
        };
        let (c60, c120) = (c_of(60), c_of(120));
        assert!((c60 - exact).abs() < 0.12);
        // Halving h halves the deficit.
        let ratio = (c60 - exact).abs() / (c120 - exact).abs();
        assert!(ratio > 1.7 && ratio < 2.3, "O(h) ratio {ratio}");
        // Linear-in-h Richardson recovers the analytic value.
        let extrap = 2.0 * c120 - c60;
        assert!(
            (extrap - exact).abs() < 4e-3,
            "extrapolated {extrap} vs analytic {exact}"
        );
    }

    #[test]
    fn disk_ground_mode_has_vanishing_coupling() {
        // Regular 64-gon approximating a disk: the radial ground mode is
        // rotation invariant, so tau J_1 ~ 0.
        let verts: Vec<(f64, f64)> = (0..64)
            .map(|k| {
                let t = 2.0 * std::f64::consts::PI * k as f64 / 64.0;
                (0.5 * t.cos(), 0.5 * t.sin())
            })
            .collect();
        let spec = CrossSectionSpec {
            kind: SectionKind::Polygon { vertices: verts },
            resolution: 60,
            axis_offset: (0.0, 0.0),
            allow_square: false,
        };
        let g = build_cross_section(&spec).unwrap();
        let modes = solve_dirichlet_modes(&g, 2).unwrap();
        let c = coupling_matrices(&modes, &g).unwrap();
        assert!(c.c_omega < 0.02, "disk C_omega = {}", c.c_omega);
    }

    #[test]
    fn corrupted_tau_data_rejected() {
        let g = build_cross_section(&rect_spec(1.0, 0.5, 30)).unwrap();
        let mut modes = solve_dirichlet_modes(&g, 2).unwrap();
        // Break the relation between values and tau_values.
        for t in modes[1].tau_values.iter_mut() {
            *t += 0.05;
        }
        assert!(coupling_matrices(&modes, &g).is_err());
    }

    #[test]
    fn raw_energy_error_quarter_per_halving() {
        // O(h'^2) convergence: halving h' divides the E1 error by ~4.
        let e1 = rect_energy(1.0, 0.5, 1, 1);
        let errs: Vec<f64> = [30usize, 60]
            .iter()
            .map(|&r| {
                let g = build_cross_section(&rect_spec(1.0, 0.5, r)).unwrap();
                let modes = solve_dirichlet_modes(&g, 2).unwrap();
                (modes[0].energy_raw - e1).abs()
            })
            .collect();
        let ratio = errs[0] / errs[1];
        assert!(ratio > 3.5 && ratio < 4.5, "ratio {ratio}");
    }
}
