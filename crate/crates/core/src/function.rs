//! Scalar functions sampled at grid cell centres, and the generators used for
//! `f` and `b` in configurations and test families.

use std::f64::consts::PI;

use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{self, Ball, Grid, Point};
use crate::rng::Rng;

/// One value per grid cell, in the grid's linear cell order.
#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction {
    values: Vec<f64>,
}

impl GridFunction {
    pub fn new(grid: &Grid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::config(format!(
                "function has {} values but the grid has {} cells",
                values.len(),
                grid.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::domain("grid function values must be finite"));
        }
        Ok(GridFunction { values })
    }

    pub(crate) fn from_vec(values: Vec<f64>) -> Self {
        GridFunction { values }
    }

    pub fn zeros(grid: &Grid) -> Self {
        GridFunction {
            values: vec![0.0; grid.len()],
        }
    }

    pub fn constant(grid: &Grid, c: f64) -> Self {
        GridFunction {
            values: vec![c; grid.len()],
        }
    }

    pub fn from_fn(grid: &Grid, f: impl Fn(Point) -> f64) -> Self {
        GridFunction {
            values: grid.centers().map(f).collect(),
        }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    #[inline]
    pub fn get(&self, idx: usize) -> f64 {
        self.values[idx]
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        GridFunction {
            values: self.values.iter().map(|v| f(*v)).collect(),
        }
    }

    pub fn zip_with(&self, other: &Self, f: impl Fn(f64, f64) -> f64) -> Self {
        assert_eq!(self.len(), other.len(), "grid functions on different grids");
        GridFunction {
            values: self.values.iter().zip(&other.values).map(|(a, b)| f(*a, *b)).collect(),
        }
    }

    pub fn scale(&self, c: f64) -> Self {
        self.map(|v| c * v)
    }

    pub fn add(&self, other: &Self) -> Self {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn mul(&self, other: &Self) -> Self {
        self.zip_with(other, |a, b| a * b)
    }

    pub fn shift(&self, c: f64) -> Self {
        self.map(|v| v + c)
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Cells where the function is nonzero.
    pub fn support(&self) -> Vec<usize> {
        (0..self.values.len()).filter(|&i| self.values[i] != 0.0).collect()
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|v| *v == 0.0)
    }

    /// Zero outside `ball`.
    pub fn restricted(&self, grid: &Grid, ball: &Ball) -> Self {
        let mut out = vec![0.0; self.values.len()];
        for c in grid.ball_cells(ball) {
            out[c] = self.values[c];
        }
        GridFunction { values: out }
    }

    /// Zero on `ball`.
    pub fn excluded(&self, grid: &Grid, ball: &Ball) -> Self {
        let mut out = self.values.clone();
        for c in grid.ball_cells(ball) {
            out[c] = 0.0;
        }
        GridFunction { values: out }
    }

    /// Writes `x[,y],value` rows.
    pub fn write_csv<W: std::io::Write>(&self, grid: &Grid, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        if grid.dim() == 1 {
            w.write_record(["x", "value"])?;
        } else {
            w.write_record(["x", "y", "value"])?;
        }
        for (i, v) in self.values.iter().enumerate() {
            let c = grid.center(i);
            let mut row = vec![fmt_f64(c[0])];
            if grid.dim() == 2 {
                row.push(fmt_f64(c[1]));
            }
            row.push(fmt_f64(*v));
            w.write_record(&row)?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Fixed 17-significant-digit formatting shared by every artifact writer.
pub fn fmt_f64(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else if v.is_nan() {
        "nan".into()
    } else if v > 0.0 {
        "inf".into()
    } else {
        "-inf".into()
    }
}

/// Named function generators.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Generator {
    Constant {
        value: f64,
    },
    /// `exp(1 - 1/(1 - (|x-c|/width)^2))` inside the ball, 0 outside (peak 1).
    Bump {
        center: Point,
        width: f64,
    },
    /// Indicator of the open ball.
    Indicator {
        center: Point,
        radius: f64,
    },
    /// Sum of `terms` cosines with frequencies `|xi| <= cutoff`, optionally
    /// cut off outside `support`.
    RandomBandlimited {
        seed: u64,
        cutoff: f64,
        #[serde(default = "default_terms")]
        terms: usize,
        #[serde(default)]
        support: Option<f64>,
    },
    /// `log|x - center|`.
    LogAbs {
        #[serde(default)]
        center: Point,
    },
    /// `slope . x + intercept`.
    Linear {
        slope: Point,
        #[serde(default)]
        intercept: f64,
    },
}

fn default_terms() -> usize {
    8
}

impl Generator {
    pub fn sample(&self, grid: &Grid) -> Result<GridFunction> {
        match *self {
            Generator::Constant { value } => Ok(GridFunction::constant(grid, value)),
            Generator::Bump { center, width } => {
                if !(width > 0.0) {
                    return Err(Error::config("bump width must be positive"));
                }
                Ok(bump(grid, center, width))
            }
            Generator::Indicator { center, radius } => Ok(indicator(grid, &Ball::new(center, radius)?)),
            Generator::RandomBandlimited {
                seed,
                cutoff,
                terms,
                support,
            } => {
                if !(cutoff > 0.0) || terms == 0 {
                    return Err(Error::config("random_bandlimited needs cutoff > 0 and terms > 0"));
                }
                let mut rng = crate::rng::stream(seed, 0);
                let f = random_bandlimited(grid, &mut rng, cutoff, terms);
                match support {
                    Some(r) => Ok(f.restricted(grid, &Ball::new([0.0, 0.0], r)?)),
                    None => Ok(f),
                }
            }
            Generator::LogAbs { center } => Ok(log_abs(grid, center)),
            Generator::Linear { slope, intercept } => Ok(GridFunction::from_fn(grid, |x| {
                slope[0] * x[0] + slope[1] * x[1] + intercept
            })),
        }
    }
}

pub fn bump(grid: &Grid, center: Point, width: f64) -> GridFunction {
    GridFunction::from_fn(grid, |x| {
        let u = grid::distance(x, center) / width;
        if u < 1.0 {
            (1.0 - 1.0 / (1.0 - u * u)).exp()
        } else {
            0.0
        }
    })
}

pub fn indicator(grid: &Grid, ball: &Ball) -> GridFunction {
    let mut values = vec![0.0; grid.len()];
    for c in grid.ball_cells(ball) {
        values[c] = 1.0;
    }
    GridFunction { values }
}

pub fn log_abs(grid: &Grid, center: Point) -> GridFunction {
    GridFunction::from_fn(grid, |x| grid::distance(x, center).ln())
}

pub fn random_bandlimited(grid: &Grid, rng: &mut Rng, cutoff: f64, terms: usize) -> GridFunction {
    let dim = grid.dim();
    let modes: Vec<(Point, f64, f64)> = (0..terms)
        .map(|_| {
            let xi = if dim == 1 {
                [rng.random_range(-cutoff..=cutoff), 0.0]
            } else {
                let r = cutoff * rng.random::<f64>().sqrt();
                let th = rng.random_range(0.0..2.0 * PI);
                [r * th.cos(), r * th.sin()]
            };
            let amp = rng.random_range(-1.0..=1.0);
            let phase = rng.random_range(0.0..2.0 * PI);
            (xi, amp, phase)
        })
        .collect();
    GridFunction::from_fn(grid, |x| {
        modes
            .iter()
            .map(|(xi, a, ph)| a * (2.0 * PI * (xi[0] * x[0] + xi[1] * x[1]) + ph).cos())
            .sum()
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn generators_sample_expected_shapes() {
        let g = Grid::new(1, 1.0, 0.25).unwrap();
        let ind = Generator::Indicator {
            center: [0.0, 0.0],
            radius: 0.5,
        }
        .sample(&g)
        .unwrap();
        assert_eq!(ind.values(), &[0.0, 0.0, 1.0, 1.0, 1.0, 1.0, 0.0, 0.0]);
        let b = bump(&g, [0.125, 0.0], 0.5);
        assert_eq!(b.get(4), 1.0);
        assert_eq!(b.get(0), 0.0);
        let lin = Generator::Linear {
            slope: [2.0, 0.0],
            intercept: 1.0,
        }
        .sample(&g)
        .unwrap();
        assert_eq!(lin.get(0), 2.0 * -0.875 + 1.0);
        let la = log_abs(&g, [0.0, 0.0]);
        assert_eq!(la.get(3), 0.125f64.ln());
    }

    #[test]
    fn bandlimited_is_seeded() {
        let g = Grid::new(2, 1.0, 0.125).unwrap();
        let gen = Generator::RandomBandlimited {
            seed: 3,
            cutoff: 2.0,
            terms: 5,
            support: Some(0.5),
        };
        let a = gen.sample(&g).unwrap();
        assert_eq!(a, gen.sample(&g).unwrap());
        assert!(!a.is_zero());
        assert!(a.support().iter().all(|&c| grid::norm(g.center(c)) < 0.5));
    }

    #[test]
    fn length_mismatch_rejected() {
        let g = Grid::new(1, 1.0, 0.5).unwrap();
        assert!(GridFunction::new(&g, vec![1.0; 3]).is_err());
        assert!(GridFunction::new(&g, vec![f64::NAN; 4]).is_err());
    }

    #[test]
    fn csv_layout() {
        let g = Grid::new(1, 1.0, 1.0).unwrap();
        let f = GridFunction::new(&g, vec![1.0, 2.0]).unwrap();
        let mut buf = Vec::new();
        f.write_csv(&g, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(
            text,
            "x,value\n-5.0000000000000000e-1,1.0000000000000000e0\n5.0000000000000000e-1,2.0000000000000000e0\n"
        );
    }
}
