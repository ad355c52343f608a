//! Per-ball evaluation of sup-type functionals over a [`BallFamily`].

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::grid::{Ball, BallFamily, Point};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BallRow {
    pub center: Point,
    pub radius: f64,
    pub value: f64,
}

/// Evaluates `f` on every ball of the family in parallel; balls for which
/// `f` returns `None` are skipped. Row order follows the family order.
pub fn scan<F>(family: &BallFamily, f: F) -> Vec<BallRow>
where
    F: Fn(&Ball) -> Option<f64> + Sync,
{
    let balls: Vec<Ball> = family.balls().collect();
    balls
        .par_iter()
        .filter_map(|b| {
            f(b).map(|value| BallRow {
                center: b.center,
                radius: b.radius,
                value,
            })
        })
        .collect()
}

/// Fallible variant of [`scan`]; the first error in family order wins.
pub fn try_scan<F>(family: &BallFamily, f: F) -> Result<Vec<BallRow>>
where
    F: Fn(&Ball) -> Result<Option<f64>> + Sync,
{
    let balls: Vec<Ball> = family.balls().collect();
    let out: Vec<Result<Option<BallRow>>> = balls
        .par_iter()
        .map(|b| {
            f(b).map(|v| {
                v.map(|value| BallRow {
                    center: b.center,
                    radius: b.radius,
                    value,
                })
            })
        })
        .collect();
    let mut rows = Vec::with_capacity(out.len());
    for r in out {
        if let Some(row) = r? {
            rows.push(row);
        }
    }
    Ok(rows)
}

/// Index of the first row attaining the maximum value.
pub fn argmax(rows: &[BallRow]) -> Option<usize> {
    let mut best: Option<usize> = None;
    for (i, r) in rows.iter().enumerate() {
        match best {
            Some(b) if rows[b].value >= r.value => {}
            _ => best = Some(i),
        }
    }
    best
}

/// Maximum over rows with its position, or `EmptyFamily`.
pub fn max_row(rows: &[BallRow]) -> Result<(f64, BallRow)> {
    let i = argmax(rows).ok_or(Error::EmptyFamily)?;
    Ok((rows[i].value, rows[i]))
}
