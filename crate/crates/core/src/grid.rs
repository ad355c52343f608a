//! Uniform cell-centred grids on the box `[-L, L]^n`, balls, dyadic ball
//! families and quadrature on the unit sphere `S^{n-1}`.
//!
//! Cell centres sit at `(k + 1/2) h - L` along each axis. With an even number
//! of cells per axis the origin is never a sample point, so power weights and
//! kernels singular at zero are always evaluated at finite values.

use std::f64::consts::PI;

use crate::error::{Error, Result};

/// A point of `R^n`, `n <= 2`. In one dimension the second coordinate is zero.
pub type Point = [f64; 2];

/// Relative slack used by the open-ball membership test. Lattice distances
/// that equal a radius up to rounding are treated as lying on the sphere and
/// are therefore excluded.
const TIE_EPS: f64 = 1e-12;

#[inline]
pub fn distance(a: Point, b: Point) -> f64 {
    let dx = a[0] - b[0];
    let dy = a[1] - b[1];
    (dx * dx + dy * dy).sqrt()
}

#[inline]
pub fn norm(a: Point) -> f64 {
    (a[0] * a[0] + a[1] * a[1]).sqrt()
}

/// True when a point at distance `d` lies in the open ball of radius `r`.
#[inline]
pub fn inside_open(d: f64, r: f64) -> bool {
    d < r * (1.0 - TIE_EPS)
}

/// True when a point at distance `d` lies in the closed ball of radius `r`.
#[inline]
pub fn inside_closed(d: f64, r: f64) -> bool {
    d <= r * (1.0 + TIE_EPS)
}

/// Lebesgue measure of a ball of radius `r` in `R^n`: `v_n r^n` with
/// `v_1 = 2`, `v_2 = pi`.
pub fn lebesgue_ball_measure(dim: usize, r: f64) -> Result<f64> {
    if !(r > 0.0) || !r.is_finite() {
        return Err(Error::domain(format!("ball radius must be positive, got {r}")));
    }
    match dim {
        1 => Ok(2.0 * r),
        2 => Ok(PI * r * r),
        _ => Err(Error::domain(format!("unsupported dimension {dim}"))),
    }
}

/// Volume of the unit ball, `v_n`.
pub fn unit_ball_volume(dim: usize) -> f64 {
    if dim == 1 {
        2.0
    } else {
        PI
    }
}

/// Surface measure of the unit sphere: 2 for `S^0`, `2 pi` for `S^1`.
pub fn sphere_measure(dim: usize) -> f64 {
    if dim == 1 {
        2.0
    } else {
        2.0 * PI
    }
}

/// Truncated uniform discretization of `R^n`.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    dim: usize,
    half_width: f64,
    spacing: f64,
    per_axis: usize,
    axis: Vec<f64>,
}

impl Grid {
    /// Builds the grid with `2L/h` cells per axis. The count must be a
    /// positive even integer and `h <= L`.
    pub fn new(dim: usize, half_width: f64, spacing: f64) -> Result<Self> {
        if dim != 1 && dim != 2 {
            return Err(Error::config(format!("grid dimension must be 1 or 2, got {dim}")));
        }
        if !(half_width > 0.0) || !half_width.is_finite() {
            return Err(Error::config(format!("half-width must be positive, got {half_width}")));
        }
        if !(spacing > 0.0) || spacing > half_width {
            return Err(Error::config(format!(
                "spacing must satisfy 0 < h <= L (h = {spacing}, L = {half_width})"
            )));
        }
        let cells = 2.0 * half_width / spacing;
        let rounded = cells.round();
        if (cells - rounded).abs() > 1e-9 * rounded.max(1.0) {
            return Err(Error::config(format!(
                "2L/h = {cells} is not an integer cell count"
            )));
        }
        let per_axis = rounded as usize;
        if per_axis == 0 || per_axis % 2 != 0 {
            return Err(Error::config(format!(
                "cells per axis must be a positive even integer, got {per_axis}"
            )));
        }
        let axis = (0..per_axis)
            .map(|k| (k as f64 + 0.5) * spacing - half_width)
            .collect();
        Ok(Grid {
            dim,
            half_width,
            spacing,
            per_axis,
            axis,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    pub fn per_axis(&self) -> usize {
        self.per_axis
    }

    /// Number of cells, `(2L/h)^n`.
    pub fn len(&self) -> usize {
        self.per_axis.pow(self.dim as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// `h^n`.
    pub fn cell_volume(&self) -> f64 {
        self.spacing.powi(self.dim as i32)
    }

    /// Axis coordinates of the cell centres.
    pub fn axis(&self) -> &[f64] {
        &self.axis
    }

    /// Linear index of the cell with axis indices `(i, j)`; `j` is ignored in 1D.
    #[inline]
    pub fn index(&self, i: usize, j: usize) -> usize {
        if self.dim == 1 {
            i
        } else {
            i * self.per_axis + j
        }
    }

    #[inline]
    pub fn center(&self, idx: usize) -> Point {
        if self.dim == 1 {
            [self.axis[idx], 0.0]
        } else {
            [self.axis[idx / self.per_axis], self.axis[idx % self.per_axis]]
        }
    }

    pub fn centers(&self) -> impl Iterator<Item = Point> + '_ {
        (0..self.len()).map(move |i| self.center(i))
    }

    /// True when `|x_i| < L` on every axis.
    pub fn contains(&self, x: Point) -> bool {
        (0..self.dim).all(|a| x[a].abs() < self.half_width)
    }

    fn axis_index(&self, coord: f64) -> usize {
        let k = ((coord + self.half_width) / self.spacing - 0.5).round();
        k.clamp(0.0, (self.per_axis - 1) as f64) as usize
    }

    /// Cell whose centre is nearest to `x` (clamped to the box).
    pub fn nearest_cell(&self, x: Point) -> usize {
        let i = self.axis_index(x[0]);
        let j = if self.dim == 2 { self.axis_index(x[1]) } else { 0 };
        self.index(i, j)
    }

    fn axis_range(&self, lo: f64, hi: f64) -> Option<(usize, usize)> {
        let first = ((lo + self.half_width) / self.spacing - 0.5).ceil().max(0.0);
        let last = ((hi + self.half_width) / self.spacing - 0.5)
            .floor()
            .min((self.per_axis - 1) as f64);
        if first > last {
            None
        } else {
            Some((first as usize, last as usize))
        }
    }

    /// All cells whose centre lies strictly inside the ball.
    pub fn ball_cells(&self, ball: &Ball) -> Vec<usize> {
        let c = ball.center;
        let r = ball.radius;
        let mut out = Vec::new();
        let Some((i0, i1)) = self.axis_range(c[0] - r, c[0] + r) else {
            return out;
        };
        if self.dim == 1 {
            for i in i0..=i1 {
                if inside_open((self.axis[i] - c[0]).abs(), r) {
                    out.push(i);
                }
            }
            return out;
        }
        let Some((j0, j1)) = self.axis_range(c[1] - r, c[1] + r) else {
            return out;
        };
        for i in i0..=i1 {
            let dx = self.axis[i] - c[0];
            for j in j0..=j1 {
                let dy = self.axis[j] - c[1];
                if inside_open((dx * dx + dy * dy).sqrt(), r) {
                    out.push(self.index(i, j));
                }
            }
        }
        out
    }

    /// Discrete Lebesgue measure `count * h^n` of the ball.
    pub fn ball_measure(&self, ball: &Ball) -> f64 {
        self.ball_cells(ball).len() as f64 * self.cell_volume()
    }

    /// True when the closed ball lies inside the closed box.
    pub fn ball_within_box(&self, ball: &Ball) -> bool {
        (0..self.dim).all(|a| ball.center[a].abs() + ball.radius <= self.half_width * (1.0 + TIE_EPS))
    }

    /// Number of points of the lattice continuing the grid past the box
    /// (centres `(k + 1/2) h - L`, `k` any integer) strictly inside the ball.
    /// This is the discrete measure of the ball divided by `h^n` when
    /// functions are extended by zero outside the box.
    pub fn lattice_ball_count(&self, ball: &Ball) -> usize {
        let h = self.spacing;
        let l = self.half_width;
        let c = ball.center;
        let r = ball.radius;
        let range = |lo: f64, hi: f64| {
            (
                ((lo + l) / h - 0.5).ceil() as i64,
                ((hi + l) / h - 0.5).floor() as i64,
            )
        };
        let coord = |k: i64| (k as f64 + 0.5) * h - l;
        let (i0, i1) = range(c[0] - r, c[0] + r);
        if self.dim == 1 {
            return (i0..=i1).filter(|&i| inside_open((coord(i) - c[0]).abs(), r)).count();
        }
        let (j0, j1) = range(c[1] - r, c[1] + r);
        let mut n = 0;
        for i in i0..=i1 {
            let dx = coord(i) - c[0];
            for j in j0..=j1 {
                let dy = coord(j) - c[1];
                if inside_open((dx * dx + dy * dy).sqrt(), r) {
                    n += 1;
                }
            }
        }
        n
    }

    /// Distance from `x` to the nearest cell in `cells`.
    pub fn distance_to_cells(&self, x: Point, cells: &[usize]) -> f64 {
        cells
            .iter()
            .map(|&c| distance(x, self.center(c)))
            .fold(f64::INFINITY, f64::min)
    }
}

/// Open ball `B(x0, r)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Ball {
    pub center: Point,
    pub radius: f64,
}

impl Ball {
    pub fn new(center: Point, radius: f64) -> Result<Self> {
        if !(radius > 0.0) || !radius.is_finite() {
            return Err(Error::domain(format!("ball radius must be positive, got {radius}")));
        }
        Ok(Ball { center, radius })
    }

    /// The concentric ball with radius scaled by `factor`.
    pub fn scaled(&self, factor: f64) -> Ball {
        Ball {
            center: self.center,
            radius: self.radius * factor,
        }
    }

    pub fn contains(&self, y: Point) -> bool {
        inside_open(distance(self.center, y), self.radius)
    }
}

/// Dyadic radii `h, 2h, 4h, ...` up to and including `max` (when hit).
pub fn dyadic_radii(base: f64, max: f64) -> Vec<f64> {
    let mut radii = Vec::new();
    let mut r = base;
    while r <= max * (1.0 + TIE_EPS) {
        radii.push(r);
        r *= 2.0;
    }
    radii
}

/// The discrete stand-in for `sup_{x, r > 0}`: every centre paired with every
/// radius.
#[derive(Debug, Clone, PartialEq)]
pub struct BallFamily {
    centers: Vec<Point>,
    radii: Vec<f64>,
}

impl BallFamily {
    pub fn new(centers: Vec<Point>, radii: Vec<f64>) -> Result<Self> {
        if centers.is_empty() || radii.is_empty() {
            return Err(Error::EmptyFamily);
        }
        if radii.iter().any(|r| !(*r > 0.0)) {
            return Err(Error::config("family radii must be positive"));
        }
        if radii.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::config("family radii must be strictly increasing"));
        }
        Ok(BallFamily { centers, radii })
    }

    /// Centres at every `stride`-th cell (per axis) and dyadic radii
    /// `{h, 2h, ..., 2L}`.
    pub fn dyadic(grid: &Grid, stride: usize) -> Result<Self> {
        let radii = dyadic_radii(grid.spacing(), 2.0 * grid.half_width());
        Self::strided(grid, stride, radii)
    }

    /// Centres at every `stride`-th cell with the given radii. The stride
    /// grid is anchored so the two cells nearest the origin are included.
    pub fn strided(grid: &Grid, stride: usize, radii: Vec<f64>) -> Result<Self> {
        if stride == 0 {
            return Err(Error::config("center stride must be positive"));
        }
        let m = grid.per_axis();
        let anchor = (m / 2) % stride;
        let axis_idx: Vec<usize> = (0..m).filter(|k| k % stride == anchor || *k == m / 2 - 1).collect();
        let mut centers = Vec::new();
        if grid.dim() == 1 {
            centers.extend(axis_idx.iter().map(|&i| grid.center(i)));
        } else {
            for &i in &axis_idx {
                for &j in &axis_idx {
                    centers.push(grid.center(grid.index(i, j)));
                }
            }
        }
        Self::new(centers, radii)
    }

    pub fn centers(&self) -> &[Point] {
        &self.centers
    }

    pub fn radii(&self) -> &[f64] {
        &self.radii
    }

    pub fn len(&self) -> usize {
        self.centers.len() * self.radii.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn balls(&self) -> impl Iterator<Item = Ball> + '_ {
        self.centers.iter().flat_map(move |&c| {
            self.radii.iter().map(move |&r| Ball { center: c, radius: r })
        })
    }

    /// A family with the extra centres and radii merged in.
    pub fn extended(&self, centers: &[Point], radii: &[f64]) -> Result<Self> {
        let mut cs = self.centers.clone();
        for c in centers {
            if !cs.contains(c) {
                cs.push(*c);
            }
        }
        let mut rs = self.radii.clone();
        rs.extend_from_slice(radii);
        rs.sort_by(|a, b| a.total_cmp(b));
        rs.dedup();
        Self::new(cs, rs)
    }
}

/// Quadrature on `S^{n-1}` whose weights sum to the surface measure.
#[derive(Debug, Clone, PartialEq)]
pub struct SphereQuadrature {
    dim: usize,
    nodes: Vec<Point>,
    weights: Vec<f64>,
}

pub const DEFAULT_CIRCLE_NODES: usize = 256;

impl SphereQuadrature {
    /// `S^0 = {-1, +1}` with unit weights for `n = 1`; `nodes` equally spaced
    /// angles `2 pi j / N` with weight `2 pi / N` for `n = 2`.
    pub fn new(dim: usize, nodes: usize) -> Result<Self> {
        match dim {
            1 => Ok(SphereQuadrature {
                dim,
                nodes: vec![[-1.0, 0.0], [1.0, 0.0]],
                weights: vec![1.0, 1.0],
            }),
            2 => {
                if nodes < 2 {
                    return Err(Error::config("circle quadrature needs at least 2 nodes"));
                }
                let step = 2.0 * PI / nodes as f64;
                Ok(SphereQuadrature {
                    dim,
                    nodes: (0..nodes)
                        .map(|j| {
                            let t = step * j as f64;
                            [t.cos(), t.sin()]
                        })
                        .collect(),
                    weights: vec![step; nodes],
                })
            }
            _ => Err(Error::config(format!("unsupported dimension {dim}"))),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn nodes(&self) -> &[Point] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Angle of node `j` (n = 2 only).
    pub fn angle(&self, j: usize) -> f64 {
        2.0 * PI * j as f64 / self.nodes.len() as f64
    }

    /// Index of the node nearest to the direction of `x`, `x != 0`.
    #[inline]
    pub fn nearest_node(&self, x: Point) -> usize {
        if self.dim == 1 {
            usize::from(x[0] > 0.0)
        } else {
            let n = self.nodes.len();
            let theta = x[1].atan2(x[0]);
            let k = (theta * n as f64 / (2.0 * PI)).round() as i64;
            k.rem_euclid(n as i64) as usize
        }
    }

    pub fn total(&self) -> f64 {
        self.weights.iter().sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_dimensional_centers() {
        let g = Grid::new(1, 1.0, 0.5).unwrap();
        assert_eq!(g.axis(), &[-0.75, -0.25, 0.25, 0.75]);
        let g = Grid::new(1, 1.0, 1.0).unwrap();
        assert_eq!(g.axis(), &[-0.5, 0.5]);
    }

    #[test]
    fn two_dimensional_centers() {
        let g = Grid::new(2, 1.0, 1.0).unwrap();
        assert_eq!(g.len(), 4);
        let cs: Vec<Point> = g.centers().collect();
        assert_eq!(cs, vec![[-0.5, -0.5], [-0.5, 0.5], [0.5, -0.5], [0.5, 0.5]]);
        let g = Grid::new(2, 2.0, 1.0).unwrap();
        assert_eq!(g.len(), 16);
        assert_eq!(g.center(0), [-1.5, -1.5]);
        assert_eq!(g.center(g.index(3, 2)), [1.5, 0.5]);
    }

    #[test]
    fn spacing_larger_than_half_width_rejected() {
        assert!(Grid::new(1, 1.0, 2.0).is_err());
        assert!(Grid::new(1, 1.0, 0.0).is_err());
    }

    #[test]
    fn odd_and_fractional_counts_rejected() {
        assert!(Grid::new(1, 1.0, 2.0 / 3.0).is_err());
        assert!(Grid::new(1, 1.0, 0.3).is_err());
        assert!(Grid::new(3, 1.0, 0.5).is_err());
        assert!(Grid::new(1, -1.0, 0.5).is_err());
    }

    #[test]
    fn lebesgue_measure_examples() {
        assert_eq!(lebesgue_ball_measure(1, 1.0).unwrap(), 2.0);
        assert_eq!(lebesgue_ball_measure(2, 1.0).unwrap(), PI);
        assert_eq!(lebesgue_ball_measure(2, 2.0).unwrap(), 4.0 * PI);
        assert!(lebesgue_ball_measure(1, 0.0).is_err());
        assert!(lebesgue_ball_measure(1, -1.0).is_err());
    }

    #[test]
    fn ball_cells_examples() {
        let g = Grid::new(1, 1.0, 0.5).unwrap();
        let b = Ball::new([0.0, 0.0], 0.3).unwrap();
        assert_eq!(g.ball_cells(&b), vec![1, 2]);
        let b = Ball::new([0.0, 0.0], 0.2).unwrap();
        assert!(g.ball_cells(&b).is_empty());
        assert_eq!(g.ball_measure(&b), 0.0);
        let b = Ball::new([0.0, 0.0], 10.0).unwrap();
        assert_eq!(g.ball_cells(&b), vec![0, 1, 2, 3]);
    }

    #[test]
    fn lattice_ties_are_outside() {
        let g = Grid::new(1, 1.0, 0.125).unwrap();
        let c = g.center(8);
        // neighbours sit at exactly h: radius h keeps only the centre cell
        let b = Ball::new(c, 0.125).unwrap();
        assert_eq!(g.ball_cells(&b), vec![8]);
        let b = Ball::new(c, 0.25).unwrap();
        assert_eq!(g.ball_cells(&b), vec![7, 8, 9]);
    }

    #[test]
    fn sphere_quadrature_weights() {
        let q = SphereQuadrature::new(1, 0).unwrap();
        assert_eq!(q.total(), 2.0);
        let q = SphereQuadrature::new(2, 256).unwrap();
        assert!((q.total() - 2.0 * PI).abs() <= 1e-12 * 2.0 * PI);
        assert!(q.weights().iter().all(|w| *w > 0.0));
        assert_eq!(q.nearest_node([5.0, 0.0]), 0);
        assert_eq!(q.nearest_node([0.0, 1.0]), 64);
        assert_eq!(q.nearest_node([0.0, -1.0]), 192);
        let q1 = SphereQuadrature::new(1, 0).unwrap();
        assert_eq!(q1.nearest_node([-2.5, 0.0]), 0);
        assert_eq!(q1.nearest_node([2.5, 0.0]), 1);
    }

    #[test]
    fn lattice_count_extends_past_the_box() {
        let g = Grid::new(1, 1.0, 0.25).unwrap();
        let inner = Ball::new([0.125, 0.0], 0.3).unwrap();
        assert_eq!(g.lattice_ball_count(&inner), g.ball_cells(&inner).len());
        let wide = Ball::new(g.center(0), 1.0).unwrap();
        assert_eq!(g.lattice_ball_count(&wide), 7);
        assert_eq!(g.ball_cells(&wide).len(), 4);
        let g2 = Grid::new(2, 1.0, 0.5).unwrap();
        let b = Ball::new(g2.center(0), 0.6).unwrap();
        assert_eq!(g2.lattice_ball_count(&b), 5);
    }

    #[test]
    fn dyadic_family_shape() {
        let g = Grid::new(1, 1.0, 0.125).unwrap();
        let fam = BallFamily::dyadic(&g, 4).unwrap();
        assert_eq!(fam.radii(), &[0.125, 0.25, 0.5, 1.0, 2.0]);
        assert!(fam.centers().contains(&[-0.0625, 0.0]));
        assert!(fam.centers().contains(&[0.0625, 0.0]));
        assert!(BallFamily::new(vec![], vec![1.0]).is_err());
        assert!(BallFamily::new(vec![[0.0, 0.0]], vec![1.0, 1.0]).is_err());
    }
}
