//! The operators as direct sums over the grid.
//!
//! Outputs at cell centres use a precomputed table indexed by the integer
//! offset between two cells, so `Omega(x - y)` and `|x - y|` are evaluated
//! once per offset. Point evaluators (`*_at`) take arbitrary `x` and sum
//! directly. Functions are zero outside the box; averages over balls divide
//! by the number of lattice points of the whole ball, including those past
//! the box edge.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::function::GridFunction;
use crate::grid::{self, Ball, Grid, Point};
use crate::kernels::SphereKernel;

/// Largest admissible cancellation defect for the singular kinds.
pub const CANCELLATION_TOLERANCE: f64 = 1e-10;

/// Whether the cell at the evaluation point enters the numerator of
/// maximal averages. `Omega` is undefined at the origin, so the rough kinds
/// always exclude it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CenterCell {
    Include,
    Exclude,
}

/// Geometric truncation radii `t_min, t_min q, ...` up to `t_max` for the
/// square-function integral.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TGrid {
    pub t_min: f64,
    pub t_max: f64,
    #[serde(default = "default_ratio")]
    pub ratio: f64,
}

fn default_ratio() -> f64 {
    2.0
}

impl TGrid {
    /// `t_min = h`, `t_max` covering the box diagonal.
    pub fn for_grid(grid: &Grid) -> Self {
        TGrid {
            t_min: grid.spacing(),
            t_max: 2.0 * (grid.dim() as f64).sqrt() * grid.half_width(),
            ratio: 2.0,
        }
    }

    pub fn points(&self) -> Result<Vec<f64>> {
        if !(self.t_min > 0.0) || !(self.ratio > 1.0) || !(self.t_max >= self.t_min) {
            return Err(Error::config("t-grid needs 0 < t_min <= t_max and ratio > 1"));
        }
        let mut t = vec![self.t_min];
        loop {
            let next = t[t.len() - 1] * self.ratio;
            if next > self.t_max * (1.0 + 1e-12) {
                break;
            }
            t.push(next);
        }
        if *t.last().expect("nonempty") < self.t_max * (1.0 - 1e-12) {
            t.push(self.t_max);
        }
        Ok(t)
    }

    /// `int_{t_k}^{t_{k+1}} dt / t^3`, with the last cell running to infinity.
    pub fn cell_weights(points: &[f64]) -> Vec<f64> {
        (0..points.len())
            .map(|k| {
                let a = points[k].powi(-2);
                let b = points.get(k + 1).map_or(0.0, |t| t.powi(-2));
                (a - b) / 2.0
            })
            .collect()
    }
}

/// Kernel values and distances indexed by integer cell offsets.
struct Stencil {
    dim: usize,
    m: usize,
    width: usize,
    dist: Vec<f64>,
    omega: Vec<f64>,
}

impl Stencil {
    fn new(grid: &Grid, kernel: Option<&SphereKernel>) -> Self {
        let m = grid.per_axis();
        let width = 2 * m - 1;
        let h = grid.spacing();
        let dim = grid.dim();
        let size = if dim == 1 { width } else { width * width };
        let mut dist = vec![0.0; size];
        let mut omega = vec![1.0; size];
        for k in 0..size {
            let (a, b) = if dim == 1 { (k, m - 1) } else { (k / width, k % width) };
            let z = [(a as f64 - (m - 1) as f64) * h, (b as f64 - (m - 1) as f64) * h];
            dist[k] = grid::norm(z);
            if let Some(kern) = kernel {
                omega[k] = if dist[k] == 0.0 { 0.0 } else { kern.value_at(z) };
            }
        }
        Stencil {
            dim,
            m,
            width,
            dist,
            omega,
        }
    }

    /// Table index of `x - y` for cells `x`, `y`.
    #[inline]
    fn offset(&self, x: usize, y: usize) -> usize {
        let m = self.m;
        if self.dim == 1 {
            x + m - 1 - y
        } else {
            let (xi, xj) = (x / m, x % m);
            let (yi, yj) = (y / m, y % m);
            (xi + m - 1 - yi) * self.width + (xj + m - 1 - yj)
        }
    }
}

fn check_radii(radii: &[f64]) -> Result<()> {
    if radii.is_empty() {
        return Err(Error::config("radius set must be nonempty"));
    }
    if radii.iter().any(|r| !(*r > 0.0)) || radii.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::config("radii must be positive and strictly increasing"));
    }
    Ok(())
}

/// First radius index whose open ball contains distance `d`; `radii.len()` if none.
#[inline]
fn open_bin(d: f64, radii: &[f64]) -> usize {
    radii.partition_point(|&r| !grid::inside_open(d, r))
}

/// First t-grid index whose closed ball contains distance `d`.
#[inline]
fn closed_bin(d: f64, ts: &[f64]) -> usize {
    ts.partition_point(|&t| !grid::inside_closed(d, t))
}

/// Lattice points in `B(x, r)` for every radius, for `x` a cell centre.
fn center_counts(grid: &Grid, radii: &[f64]) -> Vec<f64> {
    radii
        .iter()
        .map(|&r| grid.lattice_ball_count(&Ball { center: grid.center(0), radius: r }) as f64)
        .collect()
}

/// `max_k (sum_{bins <= k} terms) / count_k` given per-bin sums.
fn sup_of_averages(bins: &[f64], counts: &[f64]) -> f64 {
    let mut acc = 0.0;
    let mut best = 0.0_f64;
    for (s, c) in bins.iter().zip(counts) {
        acc += s;
        if *c > 0.0 {
            best = best.max(acc / c);
        }
    }
    best
}

/// Shared engine for the maximal kinds at cell centres: `term(x, y, off)`
/// is the nonnegative integrand for the pair.
fn maximal_engine<F>(grid: &Grid, stencil: &Stencil, radii: &[f64], center: CenterCell, term: F) -> GridFunction
where
    F: Fn(usize, usize, usize) -> f64 + Sync,
{
    let counts = center_counts(grid, radii);
    let bin_of: Vec<usize> = stencil.dist.iter().map(|&d| open_bin(d, radii)).collect();
    let n = grid.len();
    let values: Vec<f64> = (0..n)
        .into_par_iter()
        .map(|x| {
            let mut bins = vec![0.0; radii.len()];
            for y in 0..n {
                if y == x && center == CenterCell::Exclude {
                    continue;
                }
                let off = stencil.offset(x, y);
                let k = bin_of[off];
                if k < radii.len() {
                    bins[k] += term(x, y, off);
                }
            }
            sup_of_averages(&bins, &counts)
        })
        .collect();
    GridFunction::from_vec(values)
}

/// `M f(x) = max_t |B(x,t)|^{-1} sum_{B(x,t)} |f| h^n` over `radii`.
pub fn maximal(f: &GridFunction, grid: &Grid, radii: &[f64], center: CenterCell) -> Result<GridFunction> {
    check_radii(radii)?;
    let st = Stencil::new(grid, None);
    Ok(maximal_engine(grid, &st, radii, center, |_, y, _| f.get(y).abs()))
}

/// `M_Omega f(x) = max_t |B(x,t)|^{-1} sum_{B(x,t), y != x} |Omega(x-y)| |f(y)| h^n`.
pub fn rough_maximal(kernel: &SphereKernel, f: &GridFunction, grid: &Grid, radii: &[f64]) -> Result<GridFunction> {
    check_radii(radii)?;
    check_dim(kernel, grid)?;
    let st = Stencil::new(grid, Some(kernel));
    Ok(maximal_engine(grid, &st, radii, CenterCell::Exclude, |_, y, off| {
        st.omega[off].abs() * f.get(y).abs()
    }))
}

/// `M_{Omega,b} f(x) = max_t |B(x,t)|^{-1} sum |b(x) - b(y)| |Omega(x-y)| |f(y)| h^n`.
pub fn maximal_commutator(
    b: &GridFunction,
    kernel: &SphereKernel,
    f: &GridFunction,
    grid: &Grid,
    radii: &[f64],
) -> Result<GridFunction> {
    check_radii(radii)?;
    check_dim(kernel, grid)?;
    let st = Stencil::new(grid, Some(kernel));
    Ok(maximal_engine(grid, &st, radii, CenterCell::Exclude, |x, y, off| {
        (b.get(x) - b.get(y)).abs() * st.omega[off].abs() * f.get(y).abs()
    }))
}

fn check_dim(kernel: &SphereKernel, grid: &Grid) -> Result<()> {
    if kernel.dim() != grid.dim() {
        return Err(Error::config(format!(
            "kernel lives on S^{} but the grid has dimension {}",
            kernel.dim() - 1,
            grid.dim()
        )));
    }
    Ok(())
}

fn check_cancellation(kernel: &SphereKernel) -> Result<()> {
    let defect = kernel.cancellation_defect();
    if defect > CANCELLATION_TOLERANCE {
        return Err(Error::NonCancelling { defect });
    }
    Ok(())
}

/// Shared engine for the linear kinds at cell centres. Cells are visited in
/// pairs `x + k`, `x - k`, and each pair is added as one term, so an odd
/// integrand over a configuration symmetric about `x` cancels exactly.
fn linear_engine<F>(grid: &Grid, term: F) -> GridFunction
where
    F: Fn(usize, usize) -> f64 + Sync,
{
    let n = grid.len();
    let m = grid.per_axis() as isize;
    let hn = grid.cell_volume();
    let dim = grid.dim();
    let inside = |i: isize| (0..m).contains(&i);
    let values: Vec<f64> = (0..n)
        .into_par_iter()
        .map(|x| {
            let mut s = 0.0;
            if dim == 1 {
                let xi = x as isize;
                for k in 1..m {
                    let a = if inside(xi - k) { term(x, (xi - k) as usize) } else { 0.0 };
                    let b = if inside(xi + k) { term(x, (xi + k) as usize) } else { 0.0 };
                    s += a + b;
                }
            } else {
                let (xi, xj) = ((x as isize) / m, (x as isize) % m);
                let cell = |i: isize, j: isize| {
                    if inside(i) && inside(j) {
                        term(x, (i * m + j) as usize)
                    } else {
                        0.0
                    }
                };
                for di in 0..m {
                    let start = if di == 0 { 1 } else { 1 - m };
                    for dj in start..m {
                        s += cell(xi + di, xj + dj) + cell(xi - di, xj - dj);
                    }
                }
            }
            s * hn
        })
        .collect();
    GridFunction::from_vec(values)
}

/// `T f(x) = sum_{y != x} Omega(x-y) / |x-y|^n f(y) h^n`.
pub fn singular(kernel: &SphereKernel, f: &GridFunction, grid: &Grid) -> Result<GridFunction> {
    check_dim(kernel, grid)?;
    check_cancellation(kernel)?;
    let st = Stencil::new(grid, Some(kernel));
    let n = grid.dim() as i32;
    let k: Vec<f64> = singular_table(&st, n);
    Ok(linear_engine(grid, |x, y| k[st.offset(x, y)] * f.get(y)))
}

fn singular_table(st: &Stencil, n: i32) -> Vec<f64> {
    st.dist
        .iter()
        .zip(&st.omega)
        .map(|(d, o)| if *d == 0.0 { 0.0 } else { o / d.powi(n) })
        .collect()
}

/// Both evaluations of `[b, T] f`.
#[derive(Debug, Clone, PartialEq)]
pub struct CommutatorOutput {
    /// `sum (b(x) - b(y)) Omega(x-y)/|x-y|^n f(y) h^n`.
    pub kernel_form: GridFunction,
    /// `b T f - T(b f)`.
    pub algebraic_form: GridFunction,
    /// Largest pointwise difference between the two.
    pub discrepancy: f64,
}

pub fn singular_commutator(
    b: &GridFunction,
    kernel: &SphereKernel,
    f: &GridFunction,
    grid: &Grid,
) -> Result<CommutatorOutput> {
    check_dim(kernel, grid)?;
    check_cancellation(kernel)?;
    let st = Stencil::new(grid, Some(kernel));
    let k = singular_table(&st, grid.dim() as i32);
    let kernel_form = linear_engine(grid, |x, y| (b.get(x) - b.get(y)) * k[st.offset(x, y)] * f.get(y));
    let tf = linear_engine(grid, |x, y| k[st.offset(x, y)] * f.get(y));
    let bf = b.mul(f);
    let tbf = linear_engine(grid, |x, y| k[st.offset(x, y)] * bf.get(y));
    let algebraic_form = b.mul(&tf).add(&tbf.scale(-1.0));
    let discrepancy = kernel_form
        .values()
        .iter()
        .zip(algebraic_form.values())
        .fold(0.0_f64, |m, (a, c)| m.max((a - c).abs()));
    Ok(CommutatorOutput {
        kernel_form,
        algebraic_form,
        discrepancy,
    })
}

/// Square-function engine at cell centres: `coef(x, y, off)` is the signed
/// integrand of `F_t` for the pair (without the `h^n`).
/// `sum (b(x) - b(y)) K(x - y) f(y) h^n` alone.
fn commutator_kernel_form(b: &GridFunction, kernel: &SphereKernel, f: &GridFunction, grid: &Grid) -> Result<GridFunction> {
    check_dim(kernel, grid)?;
    check_cancellation(kernel)?;
    let st = Stencil::new(grid, Some(kernel));
    let k = singular_table(&st, grid.dim() as i32);
    Ok(linear_engine(grid, |x, y| (b.get(x) - b.get(y)) * k[st.offset(x, y)] * f.get(y)))
}

fn marcinkiewicz_engine<F>(grid: &Grid, stencil: &Stencil, ts: &[f64], coef: F) -> GridFunction
where
    F: Fn(usize, usize, usize) -> f64 + Sync,
{
    let a = TGrid::cell_weights(ts);
    let bin_of: Vec<usize> = stencil.dist.iter().map(|&d| closed_bin(d, ts)).collect();
    let n = grid.len();
    let hn = grid.cell_volume();
    let values: Vec<f64> = (0..n)
        .into_par_iter()
        .map(|x| {
            let mut bins = vec![0.0; ts.len()];
            for y in 0..n {
                if y == x {
                    continue;
                }
                let off = stencil.offset(x, y);
                let k = bin_of[off];
                if k < ts.len() {
                    bins[k] += coef(x, y, off);
                }
            }
            square_sum(&bins, &a, hn)
        })
        .collect();
    GridFunction::from_vec(values)
}

fn square_sum(bins: &[f64], a: &[f64], hn: f64) -> f64 {
    let mut f = 0.0;
    let mut s = 0.0;
    for (b, w) in bins.iter().zip(a) {
        f += b;
        let ft = f * hn;
        s += w * ft * ft;
    }
    s.sqrt()
}

fn marcinkiewicz_table(st: &Stencil, n: i32) -> Vec<f64> {
    st.dist
        .iter()
        .zip(&st.omega)
        .map(|(d, o)| if *d == 0.0 { 0.0 } else { o / d.powi(n - 1) })
        .collect()
}

/// `mu f(x) = (sum_k a_k |F_{t_k} f(x)|^2)^{1/2}` with
/// `F_t f(x) = sum_{0<|x-y|<=t} Omega(x-y)/|x-y|^{n-1} f(y) h^n` and `a_k`
/// the exact `dt/t^3` mass of the k-th t-cell.
pub fn marcinkiewicz(kernel: &SphereKernel, f: &GridFunction, grid: &Grid, tgrid: &TGrid) -> Result<GridFunction> {
    check_dim(kernel, grid)?;
    check_cancellation(kernel)?;
    let ts = tgrid.points()?;
    let st = Stencil::new(grid, Some(kernel));
    let k = marcinkiewicz_table(&st, grid.dim() as i32);
    Ok(marcinkiewicz_engine(grid, &st, &ts, |_, y, off| k[off] * f.get(y)))
}

/// `[b, mu] f` with the factor `b(x) - b(y)` inside `F_t`.
pub fn marcinkiewicz_commutator(
    b: &GridFunction,
    kernel: &SphereKernel,
    f: &GridFunction,
    grid: &Grid,
    tgrid: &TGrid,
) -> Result<GridFunction> {
    check_dim(kernel, grid)?;
    check_cancellation(kernel)?;
    let ts = tgrid.points()?;
    let st = Stencil::new(grid, Some(kernel));
    let k = marcinkiewicz_table(&st, grid.dim() as i32);
    Ok(marcinkiewicz_engine(grid, &st, &ts, |x, y, off| {
        (b.get(x) - b.get(y)) * k[off] * f.get(y)
    }))
}

/// The operator kinds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OperatorKind {
    Maximal,
    RoughMaximal,
    Singular,
    SingularCommutator,
    MaximalCommutator,
    Marcinkiewicz,
    MarcinkiewiczCommutator,
}

impl OperatorKind {
    pub fn is_commutator(self) -> bool {
        matches!(
            self,
            OperatorKind::SingularCommutator | OperatorKind::MaximalCommutator | OperatorKind::MarcinkiewiczCommutator
        )
    }

    pub fn needs_cancellation(self) -> bool {
        matches!(
            self,
            OperatorKind::Singular
                | OperatorKind::SingularCommutator
                | OperatorKind::Marcinkiewicz
                | OperatorKind::MarcinkiewiczCommutator
        )
    }

    pub fn is_maximal(self) -> bool {
        matches!(
            self,
            OperatorKind::Maximal | OperatorKind::RoughMaximal | OperatorKind::MaximalCommutator
        )
    }

    pub fn is_square_function(self) -> bool {
        matches!(self, OperatorKind::Marcinkiewicz | OperatorKind::MarcinkiewiczCommutator)
    }

    pub fn name(self) -> &'static str {
        match self {
            OperatorKind::Maximal => "maximal",
            OperatorKind::RoughMaximal => "rough_maximal",
            OperatorKind::Singular => "singular",
            OperatorKind::SingularCommutator => "singular_commutator",
            OperatorKind::MaximalCommutator => "maximal_commutator",
            OperatorKind::Marcinkiewicz => "marcinkiewicz",
            OperatorKind::MarcinkiewiczCommutator => "marcinkiewicz_commutator",
        }
    }
}

/// A fully specified operator.
#[derive(Debug, Clone, PartialEq)]
pub struct OperatorSpec {
    pub kind: OperatorKind,
    pub kernel: Option<SphereKernel>,
    pub symbol: Option<GridFunction>,
    pub radii: Vec<f64>,
    pub t_grid: Option<TGrid>,
}

impl OperatorSpec {
    pub fn new(kind: OperatorKind, grid: &Grid) -> Self {
        OperatorSpec {
            kind,
            kernel: None,
            symbol: None,
            radii: grid::dyadic_radii(grid.spacing(), 2.0 * grid.half_width()),
            t_grid: kind.is_square_function().then(|| TGrid::for_grid(grid)),
        }
    }

    pub fn with_kernel(mut self, kernel: SphereKernel) -> Self {
        self.kernel = Some(kernel);
        self
    }

    pub fn with_symbol(mut self, b: GridFunction) -> Self {
        self.symbol = Some(b);
        self
    }

    pub fn with_radii(mut self, radii: Vec<f64>) -> Self {
        self.radii = radii;
        self
    }

    pub fn with_t_grid(mut self, t: TGrid) -> Self {
        self.t_grid = Some(t);
        self
    }

    fn kernel(&self) -> Result<&SphereKernel> {
        self.kernel
            .as_ref()
            .ok_or_else(|| Error::config(format!("operator {} needs a kernel", self.kind.name())))
    }

    fn symbol(&self) -> Result<&GridFunction> {
        self.symbol
            .as_ref()
            .ok_or_else(|| Error::config(format!("operator {} needs a symbol b", self.kind.name())))
    }

    fn t_grid(&self) -> Result<&TGrid> {
        self.t_grid
            .as_ref()
            .ok_or_else(|| Error::config(format!("operator {} needs a t-grid", self.kind.name())))
    }

    pub fn validate(&self, grid: &Grid) -> Result<()> {
        if self.kind != OperatorKind::Maximal {
            check_dim(self.kernel()?, grid)?;
        }
        if self.kind.needs_cancellation() {
            check_cancellation(self.kernel()?)?;
        }
        if self.kind.is_commutator() && self.symbol()?.len() != grid.len() {
            return Err(Error::config("symbol b is sampled on a different grid"));
        }
        if self.kind.is_maximal() {
            check_radii(&self.radii)?;
        }
        if self.kind.is_square_function() {
            self.t_grid()?.points()?;
        }
        Ok(())
    }

    /// `T f` at every cell centre. The singular commutator returns its kernel form.
    pub fn apply(&self, f: &GridFunction, grid: &Grid) -> Result<GridFunction> {
        self.validate(grid)?;
        match self.kind {
            OperatorKind::Maximal => maximal(f, grid, &self.radii, CenterCell::Include),
            OperatorKind::RoughMaximal => rough_maximal(self.kernel()?, f, grid, &self.radii),
            OperatorKind::Singular => singular(self.kernel()?, f, grid),
            OperatorKind::SingularCommutator => commutator_kernel_form(self.symbol()?, self.kernel()?, f, grid),
            OperatorKind::MaximalCommutator => {
                maximal_commutator(self.symbol()?, self.kernel()?, f, grid, &self.radii)
            }
            OperatorKind::Marcinkiewicz => marcinkiewicz(self.kernel()?, f, grid, self.t_grid()?),
            OperatorKind::MarcinkiewiczCommutator => {
                marcinkiewicz_commutator(self.symbol()?, self.kernel()?, f, grid, self.t_grid()?)
            }
        }
    }

    /// `T f(x)` at an arbitrary point by direct summation. For commutators
    /// `b(x)` is read at the cell nearest to `x`.
    pub fn apply_at(&self, f: &GridFunction, grid: &Grid, x: Point) -> Result<f64> {
        self.validate(grid)?;
        let n = grid.dim() as i32;
        let hn = grid.cell_volume();
        let bx = match &self.symbol {
            Some(b) => b.get(grid.nearest_cell(x)),
            None => 0.0,
        };
        let pairs = (0..grid.len()).filter_map(|y| {
            let z = sub(x, grid.center(y));
            let d = grid::norm(z);
            (d > 0.0).then_some((y, z, d))
        });
        let omega = |z: Point| self.kernel.as_ref().map_or(1.0, |k| k.value_at(z));
        let diff = |y: usize| self.symbol.as_ref().map_or(1.0, |b| bx - b.get(y));
        match self.kind {
            OperatorKind::Singular | OperatorKind::SingularCommutator => Ok(pairs
                .map(|(y, z, d)| diff(y) * omega(z) / d.powi(n) * f.get(y))
                .sum::<f64>()
                * hn),
            OperatorKind::Maximal | OperatorKind::RoughMaximal | OperatorKind::MaximalCommutator => {
                let mut bins = vec![0.0; self.radii.len()];
                let at_center = grid.center(grid.nearest_cell(x));
                if self.kind == OperatorKind::Maximal && grid::distance(at_center, x) == 0.0 {
                    bins[0] += f.get(grid.nearest_cell(x)).abs();
                }
                for (y, z, d) in pairs {
                    let k = open_bin(d, &self.radii);
                    if k < bins.len() {
                        bins[k] += diff(y).abs() * omega(z).abs() * f.get(y).abs();
                    }
                }
                let counts: Vec<f64> = self
                    .radii
                    .iter()
                    .map(|&r| grid.lattice_ball_count(&Ball { center: x, radius: r }) as f64)
                    .collect();
                Ok(sup_of_averages(&bins, &counts))
            }
            OperatorKind::Marcinkiewicz | OperatorKind::MarcinkiewiczCommutator => {
                let ts = self.t_grid()?.points()?;
                let a = TGrid::cell_weights(&ts);
                let mut bins = vec![0.0; ts.len()];
                for (y, z, d) in pairs {
                    let k = closed_bin(d, &ts);
                    if k < bins.len() {
                        bins[k] += diff(y) * omega(z) / d.powi(n - 1) * f.get(y);
                    }
                }
                Ok(square_sum(&bins, &a, hn))
            }
        }
    }
}

#[inline]
fn sub(a: Point, b: Point) -> Point {
    [a[0] - b[0], a[1] - b[1]]
}

/// `|T f(x)|` against the size-condition majorant
/// `sum_{supp f} |Omega(x-y)| / |x-y|^n |f(y)| h^n` (times `|b(x) - b(y)|`
/// for commutators).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SizeCheck {
    pub value: f64,
    pub majorant: f64,
    /// `value / majorant`; 0 when both vanish.
    pub ratio: f64,
}

/// Requires `dist(x, supp f) >= 2h`.
pub fn size_condition_check(spec: &OperatorSpec, f: &GridFunction, x: Point, grid: &Grid) -> Result<SizeCheck> {
    spec.validate(grid)?;
    let support = f.support();
    if grid.distance_to_cells(x, &support) < 2.0 * grid.spacing() * (1.0 - 1e-12) {
        return Err(Error::precondition("x must lie at distance >= 2h from the support of f"));
    }
    let value = spec.apply_at(f, grid, x)?.abs();
    let n = grid.dim() as i32;
    let bx = spec.symbol.as_ref().map(|b| b.get(grid.nearest_cell(x)));
    let majorant = support
        .iter()
        .map(|&y| {
            let z = sub(x, grid.center(y));
            let om = spec.kernel.as_ref().map_or(1.0, |k| k.value_at(z)).abs();
            let bf = match (bx, &spec.symbol) {
                (Some(bx), Some(b)) => (bx - b.get(y)).abs(),
                _ => 1.0,
            };
            bf * om / grid::norm(z).powi(n) * f.get(y).abs()
        })
        .sum::<f64>()
        * grid.cell_volume();
    let ratio = if majorant == 0.0 {
        if value == 0.0 {
            0.0
        } else {
            f64::INFINITY
        }
    } else {
        value / majorant
    };
    Ok(SizeCheck { value, majorant, ratio })
}
