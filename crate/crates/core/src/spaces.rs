//! Norms on grid functions: weighted Lebesgue and weak Lebesgue norms,
//! rearrangements, Morrey-type suprema over a ball family, and BMO.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::function::GridFunction;
use crate::grid::{self, Ball, BallFamily, Grid, Point};
use crate::scan::{self, BallRow};
use crate::weights::{conjugate, Weight};

/// `(sum_cells |f|^p w h^n)^{1/p}`.
pub fn lp_w_norm(f: &GridFunction, w: &Weight, p: f64, cells: &[usize], grid: &Grid) -> f64 {
    scaled_lp(f, |c| w.get(c), p, cells, grid)
}

/// Unweighted `(sum_cells |f|^p h^n)^{1/p}`.
pub fn lp_norm(f: &GridFunction, p: f64, cells: &[usize], grid: &Grid) -> f64 {
    scaled_lp(f, |_| 1.0, p, cells, grid)
}

// Sums `(|f|/m)^p` with `m = max |f|`: tiny tails would otherwise underflow
// to subnormals and break `weak <= strong`.
fn scaled_lp(f: &GridFunction, w: impl Fn(usize) -> f64, p: f64, cells: &[usize], grid: &Grid) -> f64 {
    let m = cells.iter().fold(0.0_f64, |m, &c| m.max(f.get(c).abs()));
    if m == 0.0 || !m.is_finite() {
        return m;
    }
    let s: f64 = cells.iter().map(|&c| (f.get(c).abs() / m).powf(p) * w(c)).sum();
    m * (s * grid.cell_volume()).powf(1.0 / p)
}

/// `sup_{t>0} t w({|f| > t})^{1/p}`, evaluated exactly at the distinct
/// values `v` of `|f|` as `v w({|f| >= v})^{1/p}`. `w = None` is Lebesgue
/// measure.
pub fn weak_lp_w_norm(f: &GridFunction, w: Option<&Weight>, p: f64, cells: &[usize], grid: &Grid) -> f64 {
    let mut pairs: Vec<(f64, f64)> = cells
        .iter()
        .map(|&c| (f.get(c).abs(), w.map_or(1.0, |w| w.get(c))))
        .filter(|(v, _)| *v > 0.0)
        .collect();
    pairs.sort_by(|a, b| b.0.total_cmp(&a.0));
    let hn = grid.cell_volume();
    let mut best = 0.0_f64;
    let mut acc = 0.0;
    let mut i = 0;
    while i < pairs.len() {
        let level = pairs[i].0;
        while i < pairs.len() && pairs[i].0 == level {
            acc += pairs[i].1;
            i += 1;
        }
        best = best.max(level * (acc * hn).powf(1.0 / p));
    }
    best
}

/// Non-increasing rearrangement of `|f|` on a cell set: a step function
/// taking `values[k]` on `[ends[k-1], ends[k])`. With a weight the steps
/// have length `w_c h^n` (rearrangement with respect to `w dx`).
#[derive(Debug, Clone, PartialEq)]
pub struct Rearrangement {
    pub values: Vec<f64>,
    pub ends: Vec<f64>,
}

pub fn rearrangement(f: &GridFunction, w: Option<&Weight>, cells: &[usize], grid: &Grid) -> Rearrangement {
    let hn = grid.cell_volume();
    let mut pairs: Vec<(f64, f64)> = cells
        .iter()
        .map(|&c| (f.get(c).abs(), w.map_or(1.0, |w| w.get(c)) * hn))
        .collect();
    pairs.sort_by(|a, b| b.0.total_cmp(&a.0));
    let mut ends = Vec::with_capacity(pairs.len());
    let mut acc = 0.0;
    for (_, m) in &pairs {
        acc += m;
        ends.push(acc);
    }
    Rearrangement {
        values: pairs.into_iter().map(|(v, _)| v).collect(),
        ends,
    }
}

impl Rearrangement {
    /// `g*(t)`, zero past the total measure.
    pub fn at(&self, t: f64) -> f64 {
        let k = self.ends.partition_point(|e| *e <= t);
        self.values.get(k).copied().unwrap_or(0.0)
    }

    pub fn total_measure(&self) -> f64 {
        self.ends.last().copied().unwrap_or(0.0)
    }

    pub fn lp_norm(&self, p: f64) -> f64 {
        let mut prev = 0.0;
        let mut s = 0.0;
        for (v, e) in self.values.iter().zip(&self.ends) {
            s += v.powf(p) * (e - prev);
            prev = *e;
        }
        s.powf(1.0 / p)
    }

    /// `sup_{0 < t <= |B|} t^{1/p} g*(t)`; on each step the supremum is
    /// approached at the right end.
    pub fn weak_norm(&self, p: f64) -> f64 {
        self.values
            .iter()
            .zip(&self.ends)
            .fold(0.0_f64, |m, (v, e)| m.max(v * e.powf(1.0 / p)))
    }
}

/// `phi(x, r)` for generalized Morrey norms.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "form", rename_all = "snake_case", deny_unknown_fields)]
pub enum PhiModel {
    /// `r^beta`.
    Power { beta: f64 },
    /// `w(B(x,r))^{(kappa - 1)/p}`.
    KappaWeight { kappa: f64 },
    /// `w(B(x,r))^{-1/p}`.
    InvWeight,
    /// Radius table, interpolated linearly in `(ln r, ln phi)` and held
    /// constant past either end.
    Table { radii: Vec<f64>, values: Vec<f64> },
}

impl PhiModel {
    pub fn validate(&self) -> Result<()> {
        match self {
            PhiModel::Power { beta } if !beta.is_finite() => Err(Error::config("phi power exponent must be finite")),
            PhiModel::KappaWeight { kappa } if !kappa.is_finite() => Err(Error::config("kappa must be finite")),
            PhiModel::Table { radii, values } => {
                if radii.is_empty() || radii.len() != values.len() {
                    return Err(Error::config("phi table needs matching, nonempty radii and values"));
                }
                if radii.windows(2).any(|w| w[1] <= w[0]) || radii[0] <= 0.0 {
                    return Err(Error::config("phi table radii must be positive and increasing"));
                }
                if values.iter().any(|v| !(*v > 0.0 && v.is_finite())) {
                    return Err(Error::config("phi table values must be positive"));
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }

    /// `phi` at radius `r` for a ball of weighted measure `wb`.
    pub fn eval(&self, r: f64, wb: f64, p: f64) -> f64 {
        match self {
            PhiModel::Power { beta } => r.powf(*beta),
            PhiModel::KappaWeight { kappa } => wb.powf((kappa - 1.0) / p),
            PhiModel::InvWeight => wb.powf(-1.0 / p),
            PhiModel::Table { radii, values } => {
                let k = radii.partition_point(|x| *x <= r);
                if k == 0 {
                    values[0]
                } else if k == radii.len() {
                    values[k - 1]
                } else {
                    let (r0, r1) = (radii[k - 1].ln(), radii[k].ln());
                    let (v0, v1) = (values[k - 1].ln(), values[k].ln());
                    (v0 + (v1 - v0) * (r.ln() - r0) / (r1 - r0)).exp()
                }
            }
        }
    }

    /// The factor `phi^{-1} w(B)^{-1/p}` multiplying the local norm.
    pub fn local_factor(&self, r: f64, wb: f64, p: f64) -> Result<f64> {
        let phi = self.eval(r, wb, p);
        if !(phi > 0.0 && phi.is_finite()) {
            return Err(Error::config(format!("phi is not positive at radius {r} (phi = {phi})")));
        }
        Ok(1.0 / (phi * wb.powf(1.0 / p)))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NormReport {
    pub value: f64,
    pub argmax: BallRow,
    pub rows: Vec<BallRow>,
}

impl NormReport {
    fn from_rows(rows: Vec<BallRow>) -> Result<Self> {
        let (value, argmax) = scan::max_row(&rows)?;
        Ok(NormReport { value, argmax, rows })
    }
}

fn check_p(p: f64) -> Result<()> {
    if p >= 1.0 && p.is_finite() {
        Ok(())
    } else {
        Err(Error::domain(format!("exponent must satisfy 1 <= p < inf, got {p}")))
    }
}

/// `sup_B phi(x,r)^{-1} w(B)^{-1/p} ||f||_{L_{p,w}(B)}` (weak norm when
/// `weak`). Balls without cells are skipped.
pub fn generalized_weighted_morrey_norm(
    f: &GridFunction,
    p: f64,
    phi: &PhiModel,
    w: &Weight,
    family: &BallFamily,
    grid: &Grid,
    weak: bool,
) -> Result<NormReport> {
    check_p(p)?;
    phi.validate()?;
    let rows = scan::try_scan(family, |b| {
        let cells = grid.ball_cells(b);
        if cells.is_empty() {
            return Ok(None);
        }
        let wb = w.measure(&cells, grid);
        let factor = phi.local_factor(b.radius, wb, p)?;
        let local = if weak {
            weak_lp_w_norm(f, Some(w), p, &cells, grid)
        } else {
            lp_w_norm(f, w, p, &cells, grid)
        };
        Ok(Some(factor * local))
    })?;
    NormReport::from_rows(rows)
}

/// `sup_B w(B)^{-kappa/p} ||f||_{L_{p,w}(B)}` (weak norm when `weak`).
pub fn weighted_morrey_norm(
    f: &GridFunction,
    p: f64,
    kappa: f64,
    w: &Weight,
    family: &BallFamily,
    grid: &Grid,
    weak: bool,
) -> Result<NormReport> {
    check_p(p)?;
    let rows = scan::scan(family, |b| {
        let cells = grid.ball_cells(b);
        if cells.is_empty() {
            return None;
        }
        let wb: f64 = w.measure(&cells, grid);
        let local = if weak {
            weak_lp_w_norm(f, Some(w), p, &cells, grid)
        } else {
            lp_w_norm(f, w, p, &cells, grid)
        };
        Some(wb.powf(-kappa / p) * local)
    });
    NormReport::from_rows(rows)
}

/// `||f||_{L_p(w)}` over the whole grid.
pub fn weighted_lebesgue_norm(f: &GridFunction, p: f64, w: &Weight, grid: &Grid) -> f64 {
    let all: Vec<usize> = (0..grid.len()).collect();
    lp_w_norm(f, w, p, &all, grid)
}

/// `sup_B r^{-lambda/p} ||f||_{L_p(B)}` (weak norm when `weak`).
pub fn classical_morrey_norm(
    f: &GridFunction,
    p: f64,
    lambda: f64,
    family: &BallFamily,
    grid: &Grid,
    weak: bool,
) -> Result<NormReport> {
    check_p(p)?;
    let n = grid.dim() as f64;
    if !(0.0..=n).contains(&lambda) {
        return Err(Error::domain(format!("lambda must lie in [0, n], got {lambda}")));
    }
    let rows = scan::scan(family, |b| {
        let cells = grid.ball_cells(b);
        if cells.is_empty() {
            return None;
        }
        let local = if weak {
            weak_lp_w_norm(f, None, p, &cells, grid)
        } else {
            lp_norm(f, p, &cells, grid)
        };
        Some(b.radius.powf(-lambda / p) * local)
    });
    NormReport::from_rows(rows)
}

/// Per-ball factor `(v_n r^n / |B|_d)^{1/p}` relating the discrete
/// generalized functional with `phi = r^{(lambda-n)/p}`, `w = 1` to
/// `v_n^{-1/p}` times the classical one; it tends to 1 as `r / h` grows.
pub fn normalization_factors(p: f64, family: &BallFamily, grid: &Grid) -> Vec<BallRow> {
    let dim = grid.dim();
    scan::scan(family, |b| {
        let m = grid.ball_measure(b);
        if m == 0.0 {
            return None;
        }
        let exact = grid::unit_ball_volume(dim) * b.radius.powi(dim as i32);
        Some((exact / m).powf(1.0 / p))
    })
}

/// Plain mean over cells.
pub fn mean(b: &GridFunction, cells: &[usize]) -> f64 {
    cells.iter().map(|&c| b.get(c)).sum::<f64>() / cells.len() as f64
}

/// `b_{B,w} = w(B)^{-1} sum_B b w h^n`.
pub fn weighted_mean(b: &GridFunction, w: &Weight, cells: &[usize]) -> f64 {
    let (num, den) = cells
        .iter()
        .fold((0.0, 0.0), |(n, d), &c| (n + b.get(c) * w.get(c), d + w.get(c)));
    num / den
}

/// `avg_B |b - b_B|`. Samples are first referred to the ball's first cell,
/// so adding a constant to `b` (or scaling it by a power of two) reproduces
/// the value bit for bit whenever the shifted samples are themselves exact.
pub fn mean_oscillation(b: &GridFunction, cells: &[usize]) -> f64 {
    let n = cells.len() as f64;
    let base = b.get(cells[0]);
    let s: f64 = cells.iter().map(|&c| b.get(c) - base).sum();
    cells.iter().map(|&c| (n * (b.get(c) - base) - s).abs()).sum::<f64>() / (n * n)
}

/// `||b||_* = sup_B avg_B |b - b_B|`.
pub fn bmo_norm(b: &GridFunction, family: &BallFamily, grid: &Grid) -> Result<NormReport> {
    let rows = scan::scan(family, |ball| {
        let cells = grid.ball_cells(ball);
        (!cells.is_empty()).then(|| mean_oscillation(b, &cells))
    });
    NormReport::from_rows(rows)
}

/// `||b||_{*,w} = sup_B w(B)^{-1} sum_B |b - b_{B,w}| w h^n`.
pub fn bmo_w_norm(b: &GridFunction, w: &Weight, family: &BallFamily, grid: &Grid) -> Result<NormReport> {
    let rows = scan::scan(family, |ball| {
        let cells = grid.ball_cells(ball);
        if cells.is_empty() {
            return None;
        }
        let m = weighted_mean(b, w, &cells);
        let (num, den) = cells.iter().fold((0.0, 0.0), |(n, d), &c| {
            (n + (b.get(c) - m).abs() * w.get(c), d + w.get(c))
        });
        Some(num / den)
    });
    NormReport::from_rows(rows)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct JnReport {
    pub p: f64,
    pub weighted: bool,
    pub lp_oscillation: f64,
    pub bmo: f64,
    /// `lp_oscillation / bmo`; 1 when both vanish.
    pub ratio: f64,
    pub zero_convention: bool,
    pub argmax: BallRow,
}

/// `sup_B (avg_B |b - b_B|^p)^{1/p}` against `||b||_*`; with a weight the
/// average is taken against `w dx` (the mean `b_B` stays unweighted).
pub fn jn_lp_equivalence(
    b: &GridFunction,
    w: Option<&Weight>,
    p: f64,
    family: &BallFamily,
    grid: &Grid,
) -> Result<JnReport> {
    check_p(p)?;
    let bmo = bmo_norm(b, family, grid)?.value;
    let rows = scan::scan(family, |ball| {
        let cells = grid.ball_cells(ball);
        if cells.is_empty() {
            return None;
        }
        if p == 1.0 && w.is_none() {
            return Some(mean_oscillation(b, &cells));
        }
        let m = mean(b, &cells);
        let (num, den) = cells.iter().fold((0.0, 0.0), |(n, d), &c| {
            let wc = w.map_or(1.0, |w| w.get(c));
            (n + (b.get(c) - m).abs().powf(p) * wc, d + wc)
        });
        Some((num / den).powf(1.0 / p))
    });
    let (lp_oscillation, argmax) = scan::max_row(&rows)?;
    let zero_convention = lp_oscillation == 0.0 && bmo == 0.0;
    Ok(JnReport {
        p,
        weighted: w.is_some(),
        lp_oscillation,
        bmo,
        ratio: if zero_convention { 1.0 } else { lp_oscillation / bmo },
        zero_convention,
        argmax,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ShiftBound {
    pub lhs: f64,
    pub rhs: f64,
    pub ratio: f64,
}

/// Both sides of the two-radius oscillation estimate at `x`:
/// `lhs = (v(B_1)^{-1} sum_{B_1} |b - b_{B_2,w}|^q v h^n)^{1/q}` and
/// `rhs = ||b||_* (1 + |ln(r_1/r_2)|)`, where `(v, q) = (w, p)` or, for the
/// dual form, `(w^{1-p'}, p')`.
#[allow(clippy::too_many_arguments)]
pub fn ball_shift_bound(
    b: &GridFunction,
    w: &Weight,
    p: f64,
    x: Point,
    r1: f64,
    r2: f64,
    bmo: f64,
    dual: bool,
    grid: &Grid,
) -> Result<ShiftBound> {
    check_p(p)?;
    if dual && p == 1.0 {
        return Err(Error::domain("the dual form needs p > 1"));
    }
    let c1 = grid.ball_cells(&Ball::new(x, r1)?);
    let c2 = grid.ball_cells(&Ball::new(x, r2)?);
    if c1.is_empty() || c2.is_empty() {
        return Err(Error::precondition("both balls must contain cells"));
    }
    let m = weighted_mean(b, w, &c2);
    let (v, q) = if dual {
        let pp = conjugate(p);
        (w.pow(1.0 - pp), pp)
    } else {
        (w.clone(), p)
    };
    let (num, den) = c1.iter().fold((0.0, 0.0), |(n, d), &c| {
        (n + (b.get(c) - m).abs().powf(q) * v.get(c), d + v.get(c))
    });
    let lhs = (num / den).powf(1.0 / q);
    let rhs = bmo * (1.0 + (r1 / r2).ln().abs());
    Ok(ShiftBound {
        lhs,
        rhs,
        ratio: if rhs == 0.0 { if lhs == 0.0 { 0.0 } else { f64::INFINITY } } else { lhs / rhs },
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LogFit {
    /// `(k, |b_{B(x,r)} - b_{B(x,2^k r)}|)`.
    pub points: Vec<(u32, f64)>,
    /// Least-squares slope against `k ln 2`.
    pub slope: f64,
    pub intercept: f64,
    /// Root-mean-square residual relative to the mean of the data.
    pub relative_residual: f64,
    /// `slope / ||b||_*`.
    pub slope_over_bmo: f64,
}

/// Fits `|b_{B(x,r)} - b_{B(x,2^k r)}|` against `k ln 2` for `k` in `ks`.
pub fn log_growth_fit(b: &GridFunction, x: Point, r: f64, ks: &[u32], bmo: f64, grid: &Grid) -> Result<LogFit> {
    if ks.len() < 2 {
        return Err(Error::domain("log-growth fit needs at least two dilations"));
    }
    let base_cells = grid.ball_cells(&Ball::new(x, r)?);
    if base_cells.is_empty() {
        return Err(Error::precondition("base ball contains no cells"));
    }
    let base = mean(b, &base_cells);
    let mut points = Vec::with_capacity(ks.len());
    for &k in ks {
        let cells = grid.ball_cells(&Ball::new(x, r * 2f64.powi(k as i32))?);
        points.push((k, (base - mean(b, &cells)).abs()));
    }
    let xs: Vec<f64> = points.iter().map(|(k, _)| *k as f64 * std::f64::consts::LN_2).collect();
    let ys: Vec<f64> = points.iter().map(|(_, d)| *d).collect();
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(&ys).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = xs.iter().map(|a| (a - mx) * (a - mx)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let rms = (xs
        .iter()
        .zip(&ys)
        .map(|(a, b)| (b - slope * a - intercept).powi(2))
        .sum::<f64>()
        / n)
        .sqrt();
    Ok(LogFit {
        points,
        slope,
        intercept,
        relative_residual: if my == 0.0 { 0.0 } else { rms / my },
        slope_over_bmo: if bmo == 0.0 { 0.0 } else { slope / bmo },
    })
}
