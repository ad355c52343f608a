//! Weights and Muckenhoupt machinery.
//!
//! All characteristics are computed from discrete ball averages
//! `avg_B g = (count h^n)^{-1} sum_{cells in B} g h^n`. Because every
//! identity between characteristics is an identity between the same finite
//! sums, duality and the Hölder relations hold to rounding error.

use std::f64::consts::PI;
use std::path::Path;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::grid::{self, Ball, BallFamily, Grid, Point};
use crate::scan::{self, BallRow};

/// Closed-form description of a weight, used for refinement oracles and to
/// extend ball measures past the edge of the grid box.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum WeightModel {
    Constant { value: f64 },
    /// `scale * |x - center|^alpha`.
    Power { alpha: f64, center: Point, scale: f64 },
}

impl WeightModel {
    #[inline]
    pub fn eval(&self, x: Point) -> f64 {
        match *self {
            WeightModel::Constant { value } => value,
            WeightModel::Power { alpha, center, scale } => scale * grid::distance(x, center).powf(alpha),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Weight {
    values: Vec<f64>,
    model: Option<WeightModel>,
}

/// Conjugate exponent `p' = p / (p - 1)`.
pub fn conjugate(p: f64) -> f64 {
    if p.is_infinite() {
        1.0
    } else if p == 1.0 {
        f64::INFINITY
    } else {
        p / (p - 1.0)
    }
}

fn check_p(p: f64) -> Result<()> {
    if p > 1.0 && p.is_finite() {
        Ok(())
    } else {
        Err(Error::domain(format!("exponent must satisfy 1 < p < inf, got {p}")))
    }
}

impl Weight {
    pub fn from_values(grid: &Grid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::config(format!(
                "weight has {} values but the grid has {} cells",
                values.len(),
                grid.len()
            )));
        }
        if values.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
            return Err(Error::config("weight values must be positive and finite"));
        }
        Ok(Weight { values, model: None })
    }

    pub fn constant(grid: &Grid, value: f64) -> Result<Self> {
        let mut w = Self::from_values(grid, vec![value; grid.len()])?;
        w.model = Some(WeightModel::Constant { value });
        Ok(w)
    }

    pub fn unit(grid: &Grid) -> Self {
        Self::constant(grid, 1.0).expect("unit weight is valid")
    }

    /// `|x - center|^alpha`, `alpha > -n`.
    pub fn power(grid: &Grid, alpha: f64, center: Point) -> Result<Self> {
        if !(alpha > -(grid.dim() as f64)) || !alpha.is_finite() {
            return Err(Error::config(format!(
                "power weight exponent must exceed -n = -{}, got {alpha}",
                grid.dim()
            )));
        }
        let model = WeightModel::Power {
            alpha,
            center,
            scale: 1.0,
        };
        let values: Vec<f64> = grid.centers().map(|x| model.eval(x)).collect();
        let mut w = Self::from_values(grid, values)?;
        w.model = Some(model);
        Ok(w)
    }

    /// One value per cell from the first column of a CSV file (a
    /// non-numeric first row is a header).
    pub fn from_csv(grid: &Grid, path: &Path) -> Result<Self> {
        let mut reader = csv::ReaderBuilder::new()
            .has_headers(false)
            .trim(csv::Trim::All)
            .flexible(true)
            .from_path(path)?;
        let mut values = Vec::new();
        for (row, rec) in reader.records().enumerate() {
            let rec = rec?;
            let Some(field) = rec.get(rec.len().saturating_sub(1)) else { continue };
            match field.parse::<f64>() {
                Ok(v) => values.push(v),
                Err(_) if row == 0 => continue,
                Err(_) => {
                    return Err(Error::config(format!(
                        "{}: row {}: '{field}' is not a number",
                        path.display(),
                        row + 1
                    )))
                }
            }
        }
        Self::from_values(grid, values)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn model(&self) -> Option<&WeightModel> {
        self.model.as_ref()
    }

    #[inline]
    pub fn get(&self, idx: usize) -> f64 {
        self.values[idx]
    }

    /// `c w`.
    pub fn scaled(&self, c: f64) -> Result<Self> {
        if !(c > 0.0) {
            return Err(Error::domain("weights can only be scaled by positive factors"));
        }
        let model = self.model.map(|m| match m {
            WeightModel::Constant { value } => WeightModel::Constant { value: c * value },
            WeightModel::Power { alpha, center, scale } => WeightModel::Power {
                alpha,
                center,
                scale: c * scale,
            },
        });
        Ok(Weight {
            values: self.values.iter().map(|v| c * v).collect(),
            model,
        })
    }

    /// `w^e` pointwise, keeping the analytic tag.
    pub fn pow(&self, e: f64) -> Self {
        let model = self.model.map(|m| match m {
            WeightModel::Constant { value } => WeightModel::Constant { value: value.powf(e) },
            WeightModel::Power { alpha, center, scale } => WeightModel::Power {
                alpha: alpha * e,
                center,
                scale: scale.powf(e),
            },
        });
        Weight {
            values: self.values.iter().map(|v| v.powf(e)).collect(),
            model,
        }
    }

    /// `w(E) = sum_E w h^n`.
    pub fn measure(&self, cells: &[usize], grid: &Grid) -> f64 {
        cells.iter().map(|&c| self.values[c]).sum::<f64>() * grid.cell_volume()
    }

    /// `w(B)` over the cells of the ball inside the box.
    pub fn ball_measure(&self, ball: &Ball, grid: &Grid) -> f64 {
        self.measure(&grid.ball_cells(ball), grid)
    }

    /// `w(B)` summed over the infinite lattice that continues the grid, using
    /// the stored cell values inside the box and the analytic model outside.
    /// Without a model the sum stops at the box edge and `truncated` is set.
    pub fn extended_ball_measure(&self, ball: &Ball, grid: &Grid) -> ExtendedMeasure {
        let inside = grid.ball_within_box(ball);
        let model = match self.model {
            Some(m) if !inside => m,
            _ => {
                return ExtendedMeasure {
                    value: self.ball_measure(ball, grid),
                    truncated: !inside,
                }
            }
        };
        let h = grid.spacing();
        let l = grid.half_width();
        let m = grid.per_axis() as i64;
        let c = ball.center;
        let r = ball.radius;
        let range = |lo: f64, hi: f64| {
            let a = ((lo + l) / h - 0.5).ceil() as i64;
            let b = ((hi + l) / h - 0.5).floor() as i64;
            (a, b)
        };
        let coord = |k: i64| (k as f64 + 0.5) * h - l;
        let (i0, i1) = range(c[0] - r, c[0] + r);
        let mut sum = 0.0;
        if grid.dim() == 1 {
            for i in i0..=i1 {
                let x = coord(i);
                if grid::inside_open((x - c[0]).abs(), r) {
                    sum += if (0..m).contains(&i) {
                        self.values[i as usize]
                    } else {
                        model.eval([x, 0.0])
                    };
                }
            }
        } else {
            let (j0, j1) = range(c[1] - r, c[1] + r);
            for i in i0..=i1 {
                let x = coord(i);
                let dx = x - c[0];
                for j in j0..=j1 {
                    let y = coord(j);
                    let dy = y - c[1];
                    if grid::inside_open((dx * dx + dy * dy).sqrt(), r) {
                        sum += if (0..m).contains(&i) && (0..m).contains(&j) {
                            self.values[grid.index(i as usize, j as usize)]
                        } else {
                            model.eval([x, y])
                        };
                    }
                }
            }
        }
        ExtendedMeasure {
            value: sum * grid.cell_volume(),
            truncated: false,
        }
    }

    /// Closed-form `int_B w`: any interval in 1D; in 2D only balls centred
    /// at the weight centre (or any ball for a constant weight).
    pub fn analytic_ball_measure(&self, ball: &Ball, dim: usize) -> Option<f64> {
        match self.model? {
            WeightModel::Constant { value } => Some(value * grid::unit_ball_volume(dim) * ball.radius.powi(dim as i32)),
            WeightModel::Power { alpha, center, scale } => {
                power_ball_integral(dim, alpha, center, ball).map(|v| scale * v)
            }
        }
    }
}

/// `int_B |x - center|^alpha dx` in closed form, when available.
pub fn power_ball_integral(dim: usize, alpha: f64, center: Point, ball: &Ball) -> Option<f64> {
    let a1 = alpha + 1.0;
    if dim == 1 {
        if !(a1 > 0.0) {
            return None;
        }
        let anti = |x: f64| x.signum() * x.abs().powf(a1) / a1;
        let lo = ball.center[0] - ball.radius - center[0];
        let hi = ball.center[0] + ball.radius - center[0];
        Some(anti(hi) - anti(lo))
    } else {
        if !(alpha + 2.0 > 0.0) || grid::distance(ball.center, center) != 0.0 {
            return None;
        }
        Some(2.0 * PI * ball.radius.powf(alpha + 2.0) / (alpha + 2.0))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ExtendedMeasure {
    pub value: f64,
    pub truncated: bool,
}

/// `[w]_{A_p(B)}` from the cells of `B`; `None` for balls with fewer than two cells.
pub fn ap_ball(w: &Weight, p: f64, cells: &[usize]) -> Option<f64> {
    if cells.len() < 2 {
        return None;
    }
    let n = cells.len() as f64;
    let e = 1.0 - conjugate(p);
    let (s1, s2) = cells.iter().fold((0.0, 0.0), |(a, b), &c| {
        let v = w.values[c];
        (a + v, b + v.powf(e))
    });
    Some((s1 / n) * (s2 / n).powf(p - 1.0))
}

/// `avg_B w / min_B w`; `None` for balls with fewer than two cells.
pub fn a1_ball(w: &Weight, cells: &[usize]) -> Option<f64> {
    if cells.len() < 2 {
        return None;
    }
    let (sum, min) = cells
        .iter()
        .fold((0.0, f64::INFINITY), |(s, m), &c| (s + w.values[c], m.min(w.values[c])));
    Some(sum / cells.len() as f64 / min)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ApReport {
    pub p: f64,
    pub characteristic: f64,
    pub argmax: BallRow,
    pub rows: Vec<BallRow>,
}

fn report(p: f64, rows: Vec<BallRow>) -> Result<ApReport> {
    let (characteristic, argmax) = scan::max_row(&rows)?;
    Ok(ApReport {
        p,
        characteristic,
        argmax,
        rows,
    })
}

/// `[w]_{A_p}` as the maximum of `[w]_{A_p(B)}` over the family.
pub fn ap_characteristic(w: &Weight, p: f64, family: &BallFamily, grid: &Grid) -> Result<ApReport> {
    if p == 1.0 {
        return Err(Error::domain("p = 1: use a1_characteristic"));
    }
    check_p(p)?;
    let rows = scan::scan(family, |b| ap_ball(w, p, &grid.ball_cells(b)));
    report(p, rows)
}

/// `[w]_{A_1}` as the maximum of `avg_B w / min_B w` over the family.
pub fn a1_characteristic(w: &Weight, family: &BallFamily, grid: &Grid) -> Result<ApReport> {
    let rows = scan::scan(family, |b| a1_ball(w, &grid.ball_cells(b)));
    report(1.0, rows)
}

/// `[w]_{A_q}` dispatching to the `A_1` form when `q = 1`.
pub fn aq_characteristic(w: &Weight, q: f64, family: &BallFamily, grid: &Grid) -> Result<ApReport> {
    if q == 1.0 {
        a1_characteristic(w, family, grid)
    } else {
        ap_characteristic(w, q, family, grid)
    }
}

/// Exponents tried for `[w]_{A_inf}`.
pub const A_INFINITY_EXPONENTS: [f64; 5] = [1.25, 1.5, 2.0, 4.0, 8.0];

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AInfinity {
    pub characteristic: f64,
    pub p: f64,
}

/// `min_p [w]_{A_p}` over [`A_INFINITY_EXPONENTS`].
pub fn a_infinity_characteristic(w: &Weight, family: &BallFamily, grid: &Grid) -> Result<AInfinity> {
    let mut best = AInfinity {
        characteristic: f64::INFINITY,
        p: f64::NAN,
    };
    for &p in &A_INFINITY_EXPONENTS {
        let c = ap_characteristic(w, p, family, grid)?.characteristic;
        if c < best.characteristic {
            best = AInfinity { characteristic: c, p };
        }
    }
    Ok(best)
}

/// `w^{1 - p'}`.
pub fn dual_weight(w: &Weight, p: f64) -> Result<Weight> {
    check_p(p)?;
    Ok(w.pow(1.0 - conjugate(p)))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DoublingReport {
    pub max_ratio: f64,
    pub bound: f64,
    pub characteristic: f64,
    pub tested: usize,
    pub skipped: usize,
    pub violations: usize,
    pub rows: Vec<BallRow>,
}

/// `w(2B) / w(B)` for family balls whose double lies in the box, compared
/// with `2^{np} [w]_{A_p}`.
pub fn doubling_check(w: &Weight, p: f64, family: &BallFamily, grid: &Grid) -> Result<DoublingReport> {
    let characteristic = if p == 1.0 {
        a1_characteristic(w, family, grid)?.characteristic
    } else {
        ap_characteristic(w, p, family, grid)?.characteristic
    };
    let bound = 2f64.powf(grid.dim() as f64 * p) * characteristic;
    let rows = scan::scan(family, |b| {
        let big = b.scaled(2.0);
        if !grid.ball_within_box(&big) {
            return None;
        }
        let cells = grid.ball_cells(b);
        if cells.len() < 2 {
            return None;
        }
        Some(w.ball_measure(&big, grid) / w.measure(&cells, grid))
    });
    let violations = rows.iter().filter(|r| r.value > bound).count();
    let max_ratio = rows.iter().fold(0.0_f64, |m, r| m.max(r.value));
    Ok(DoublingReport {
        max_ratio,
        bound,
        characteristic,
        tested: rows.len(),
        skipped: family.len() - rows.len(),
        violations,
        rows,
    })
}

/// One line of the identity suite: both sides and, for inequalities, the
/// empirical constant.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IdentityLine {
    pub label: &'static str,
    pub lhs: f64,
    pub rhs: f64,
    pub relative_gap: f64,
}

fn line(label: &'static str, lhs: f64, rhs: f64) -> IdentityLine {
    let scale = lhs.abs().max(rhs.abs());
    IdentityLine {
        label,
        lhs,
        rhs,
        relative_gap: if scale == 0.0 { 0.0 } else { (lhs - rhs).abs() / scale },
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HolderSuite {
    /// `[w]_{A_p(B)}`, at least 1.
    pub ap_ball: f64,
    /// `[w]_{A_p(B)}^{1/p}` against `|B|^{-1} ||w||_1^{1/p} ||w^{-1/p}||_{p'}`.
    pub lower_bound: IdentityLine,
    /// Constant `C` in `||w^{-1/p}||_{L_p'(B)} <= C |B| w(B)^{-1/p}`.
    pub dual_norm_constant: f64,
    /// `||w^{-1}||_{L_inf(B)}` against `1 / min_B w`.
    pub inverse_sup: IdentityLine,
    /// Constant `C` in `||w^{-1}||_{L_inf(B)} <= C |B| / w(B)`.
    pub inverse_sup_constant: f64,
    /// Cell where `w` is smallest.
    pub argmin: Point,
    pub dual_ap: IdentityLine,
    pub dual_aq_first: IdentityLine,
    pub dual_aq_second: IdentityLine,
    pub dual_aq_combined: IdentityLine,
}

impl HolderSuite {
    pub fn identities(&self) -> [&IdentityLine; 5] {
        [
            &self.lower_bound,
            &self.dual_ap,
            &self.dual_aq_first,
            &self.dual_aq_second,
            &self.dual_aq_combined,
        ]
    }

    pub fn max_identity_gap(&self) -> f64 {
        self.identities().iter().fold(0.0, |m, l| m.max(l.relative_gap))
    }
}

/// Evaluates the Hölder-type identities relating `[w]_{A_p(B)}`,
/// `[w^{1-p'}]_{A_{p'}(B)}` and `[w^{1-p'}]_{A_{p'/s'}(B)}` on one ball.
pub fn holder_identity_suite(w: &Weight, p: f64, s: f64, ball: &Ball, grid: &Grid) -> Result<HolderSuite> {
    check_p(p)?;
    if !(s > p) || !s.is_finite() {
        return Err(Error::precondition(format!("need 1 < p < s < inf, got p = {p}, s = {s}")));
    }
    let cells = grid.ball_cells(ball);
    if cells.len() < 2 {
        return Err(Error::precondition("ball must contain at least two cells"));
    }
    let hn = grid.cell_volume();
    let bm = cells.len() as f64 * hn;
    let pp = conjugate(p);
    let sp = conjugate(s);
    let q = pp / sp;
    let qp = conjugate(q);
    let integral = |e: f64| cells.iter().map(|&c| w.values[c].powf(e)).sum::<f64>() * hn;
    let lp = |e: f64, r: f64| integral(e * r).powf(1.0 / r);

    let w1 = integral(1.0);
    let v1 = integral(1.0 - pp);
    let apb = (w1 / bm) * (v1 / bm).powf(p - 1.0);

    let lower_bound = line(
        "holder_lower_bound",
        apb.powf(1.0 / p),
        w1.powf(1.0 / p) * lp(-1.0 / p, pp) / bm,
    );
    let dual_norm_constant = lp(-1.0 / p, pp) * w1.powf(1.0 / p) / bm;

    let (min, argmin) = cells
        .iter()
        .map(|&c| (w.values[c], c))
        .fold((f64::INFINITY, 0), |acc, x| if x.0 < acc.0 { x } else { acc });
    let sup_inv = cells.iter().fold(0.0_f64, |m, &c| m.max(1.0 / w.values[c]));
    let inverse_sup = line("inverse_sup", sup_inv, 1.0 / min);
    let inverse_sup_constant = sup_inv * w1 / bm;

    let v = w.pow(1.0 - pp);
    let vap = ap_ball(&v, pp, &cells).expect("two cells");
    let dual_ap = line(
        "dual_ap",
        vap.powf(1.0 / pp),
        v1.powf(1.0 / pp) * lp(1.0 / p, p) / bm,
    );
    let vaq = ap_ball(&v, q, &cells).expect("two cells");
    let dual_aq_first = line(
        "dual_aq_first",
        vaq.powf(1.0 / q),
        v1.powf(1.0 / q) * lp(sp / p, qp) / bm,
    );
    let wss = lp(1.0, s / (s - p));
    let dual_aq_second = line(
        "dual_aq_second",
        vaq.powf(1.0 / pp),
        bm.powf(-(s - 1.0) / s) * v1.powf(1.0 / pp) * wss.powf(1.0 / p),
    );
    let dual_aq_combined = line(
        "dual_aq_combined",
        vaq.powf(1.0 / pp),
        bm.powf(1.0 / s) * vap.powf(1.0 / pp) / lp(1.0 / p, p) * wss.powf(1.0 / p),
    );
    Ok(HolderSuite {
        ap_ball: apb,
        lower_bound,
        dual_norm_constant,
        inverse_sup,
        inverse_sup_constant,
        argmin: grid.center(argmin),
        dual_ap,
        dual_aq_first,
        dual_aq_second,
        dual_aq_combined,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SubsetReport {
    pub subsets: usize,
    /// Violations of `(|S|/|B|)^p <= [w]_{A_p} w(S)/w(B)`.
    pub standard_violations: usize,
    /// Violations of `|S|/|B| <= [w]_{A_p} w(S)/w(B)`.
    pub linear_violations: usize,
    /// Smallest `w(S)/w(B) / (|S|/|B|)^p` seen; `1/[w]` is a lower bound.
    pub min_standard_quotient: f64,
    /// Fitted exponent `delta` in `w(S)/w(B) <= C (|S|/|B|)^delta` with `C = 1`.
    pub fitted_delta: f64,
}

/// Exhaustive check of the small-set estimates for a ball with at most 16
/// cells: every nonempty proper subset `S` of its cells is compared with `B`.
pub fn subset_check(w: &Weight, p: f64, characteristic: f64, ball: &Ball, grid: &Grid) -> Result<SubsetReport> {
    let cells = grid.ball_cells(ball);
    if cells.len() < 2 || cells.len() > 16 {
        return Err(Error::precondition(format!(
            "subset check needs 2..=16 cells, ball has {}",
            cells.len()
        )));
    }
    let k = cells.len();
    let vals: Vec<f64> = cells.iter().map(|&c| w.values[c]).collect();
    let total: f64 = vals.iter().sum();
    let tol = 1e-12;
    let mut out = SubsetReport {
        subsets: 0,
        standard_violations: 0,
        linear_violations: 0,
        min_standard_quotient: f64::INFINITY,
        fitted_delta: f64::INFINITY,
    };
    for mask in 1u32..((1u32 << k) - 1) {
        let mut ws = 0.0;
        let mut count = 0usize;
        for (i, v) in vals.iter().enumerate() {
            if mask & (1 << i) != 0 {
                ws += v;
                count += 1;
            }
        }
        let frac = count as f64 / k as f64;
        let wr = ws / total;
        out.subsets += 1;
        if frac.powf(p) > characteristic * wr * (1.0 + tol) {
            out.standard_violations += 1;
        }
        if frac > characteristic * wr * (1.0 + tol) {
            out.linear_violations += 1;
        }
        out.min_standard_quotient = out.min_standard_quotient.min(wr / frac.powf(p));
        // largest delta with wr <= frac^delta
        out.fitted_delta = out.fitted_delta.min(wr.ln() / frac.ln());
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn g1(h: f64) -> Grid {
        Grid::new(1, 1.0, h).unwrap()
    }

    #[test]
    fn measure_examples() {
        let g = g1(1.0 / 512.0);
        let b = Ball::new([0.0, 0.0], 1.0).unwrap();
        let one = Weight::unit(&g);
        assert!((one.ball_measure(&b, &g) - 2.0).abs() <= 2.0 * g.spacing());
        let w = Weight::power(&g, 1.0, [0.0, 0.0]).unwrap();
        assert!((w.ball_measure(&b, &g) - 1.0).abs() <= 4.0 * g.spacing());
        assert_eq!(w.measure(&[], &g), 0.0);
        assert_eq!(w.analytic_ball_measure(&b, 1), Some(1.0));
    }

    #[test]
    fn unit_weight_is_exact() {
        let g = g1(1.0 / 64.0);
        let fam = BallFamily::dyadic(&g, 4).unwrap();
        let one = Weight::unit(&g);
        for p in [1.5, 2.0, 4.0] {
            assert_eq!(ap_characteristic(&one, p, &fam, &g).unwrap().characteristic, 1.0);
        }
        assert_eq!(a1_characteristic(&one, &fam, &g).unwrap().characteristic, 1.0);
        assert_eq!(a_infinity_characteristic(&one, &fam, &g).unwrap().characteristic, 1.0);
        assert!(ap_characteristic(&one, 1.0, &fam, &g).is_err());
        assert!(ap_characteristic(&one, 0.5, &fam, &g).is_err());
    }

    #[test]
    fn power_weight_characteristics() {
        let g = g1(1.0 / 128.0);
        let fam = BallFamily::dyadic(&g, 4).unwrap();
        let w = Weight::power(&g, 0.5, [0.0, 0.0]).unwrap();
        let rep = ap_characteristic(&w, 2.0, &fam, &g).unwrap();
        assert!(rep.characteristic >= 1.0);
        // the extremal ball reaches the singular point
        assert!(rep.argmax.center[0].abs() < rep.argmax.radius, "{:?}", rep.argmax);
        let ainf = a_infinity_characteristic(&w, &fam, &g).unwrap();
        assert!(ainf.characteristic <= rep.characteristic);
        let neg = Weight::power(&g, -0.5, [0.0, 0.0]).unwrap();
        let a1 = a1_characteristic(&neg, &fam, &g).unwrap().characteristic;
        assert!(a1.is_finite() && a1 >= 1.0);
        assert!(Weight::power(&g, -1.0, [0.0, 0.0]).is_err());
    }

    #[test]
    fn dual_weight_exponents() {
        let g = g1(0.25);
        let w = Weight::power(&g, 0.5, [0.0, 0.0]).unwrap();
        let d = dual_weight(&w, 2.0).unwrap();
        for i in 0..g.len() {
            assert!((d.get(i) - 1.0 / w.get(i)).abs() < 1e-15);
        }
        match d.model() {
            Some(WeightModel::Power { alpha, .. }) => assert_eq!(*alpha, -0.5),
            other => panic!("{other:?}"),
        }
        let d3 = dual_weight(&w, 3.0).unwrap();
        match d3.model() {
            Some(WeightModel::Power { alpha, .. }) => assert!((alpha - 0.5 * (1.0 - 1.5)).abs() < 1e-15),
            other => panic!("{other:?}"),
        }
        let one = dual_weight(&Weight::unit(&g), 4.0).unwrap();
        assert!(one.values().iter().all(|v| *v == 1.0));
    }

    #[test]
    fn doubling_unit_and_power() {
        let g = g1(1.0 / 128.0);
        let fam = BallFamily::dyadic(&g, 8).unwrap();
        let one = Weight::unit(&g);
        let rep = doubling_check(&one, 2.0, &fam, &g).unwrap();
        assert!(rep.max_ratio <= rep.bound);
        assert!(rep.skipped > 0);
        let w = Weight::power(&g, 0.5, [0.0, 0.0]).unwrap();
        let rep = doubling_check(&w, 2.0, &fam, &g).unwrap();
        assert_eq!(rep.violations, 0);
    }

    #[test]
    fn identity_suite_unit_and_power() {
        let g = g1(1.0 / 256.0);
        let b = Ball::new([0.0, 0.0], 0.5).unwrap();
        let s = holder_identity_suite(&Weight::unit(&g), 2.0, 4.0, &b, &g).unwrap();
        assert!((s.ap_ball - 1.0).abs() < 1e-12);
        assert!(s.max_identity_gap() < 1e-12);
        let w = Weight::power(&g, 0.5, [0.0, 0.0]).unwrap();
        let s = holder_identity_suite(&w, 2.0, 4.0, &b, &g).unwrap();
        assert!(s.ap_ball >= 1.0);
        assert!(s.max_identity_gap() < 1e-10, "{s:?}");
        assert_eq!(s.inverse_sup.relative_gap, 0.0);
        assert!(s.argmin[0].abs() < g.spacing());
        assert!(holder_identity_suite(&w, 2.0, 2.0, &b, &g).is_err());
    }

    #[test]
    fn extended_measure_continues_the_lattice() {
        let g = g1(1.0 / 64.0);
        let w = Weight::power(&g, 0.3, [0.0, 0.0]).unwrap();
        let inner = Ball::new([0.1, 0.0], 0.5).unwrap();
        let e = w.extended_ball_measure(&inner, &g);
        assert_eq!(e.value, w.ball_measure(&inner, &g));
        let big = Ball::new([0.0, 0.0], 4.0).unwrap();
        let e = w.extended_ball_measure(&big, &g);
        assert!(!e.truncated);
        let exact = w.analytic_ball_measure(&big, 1).unwrap();
        assert!((e.value - exact).abs() / exact < 1e-3);
        let table = Weight::from_values(&g, w.values().to_vec()).unwrap();
        assert!(table.extended_ball_measure(&big, &g).truncated);
    }

    #[test]
    fn analytic_two_dimensional_ball() {
        let b = Ball::new([0.0, 0.0], 2.0).unwrap();
        let v = power_ball_integral(2, 0.0, [0.0, 0.0], &b).unwrap();
        assert!((v - 4.0 * PI).abs() < 1e-12);
        assert!(power_ball_integral(2, 0.5, [1.0, 0.0], &b).is_none());
    }

    #[test]
    fn subset_check_small_ball() {
        let g = g1(1.0 / 32.0);
        let w = Weight::power(&g, 0.3, [0.0, 0.0]).unwrap();
        let fam = BallFamily::dyadic(&g, 1).unwrap();
        let c = ap_characteristic(&w, 2.0, &fam, &g).unwrap().characteristic;
        let b = Ball::new(g.center(16), 0.2).unwrap();
        let rep = subset_check(&w, 2.0, c, &b, &g).unwrap();
        assert!(rep.subsets > 100);
        assert_eq!(rep.standard_violations, 0);
        assert!(rep.min_standard_quotient >= 1.0 / c);
    }
}
