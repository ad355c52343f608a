//! Rough kernels `Omega` on the unit sphere and their degree-zero
//! homogeneous extension to `R^n \ {0}`.
//!
//! A kernel is stored as its values at the nodes of a [`SphereQuadrature`];
//! `Omega(x)` is the value at the node nearest to `x / |x|`. Because the
//! lookup only depends on the direction of `x`, `Omega(mu x) = Omega(x)` holds
//! exactly for every `mu > 0`, and discontinuous kernels such as `sign` are
//! represented without smearing.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{self, Ball, Grid, Point, SphereQuadrature, DEFAULT_CIRCLE_NODES};

/// Kernels shipped with the toolkit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KernelShape {
    /// `Omega = 1`.
    Constant,
    /// `sign(x_1)`.
    Sign,
    /// `cos(theta)`, n = 2 only.
    Cos,
    /// `sin(theta)`, n = 2 only.
    Sin,
    /// `sign(cos(theta))`; identical to `Sign` in two dimensions.
    SignCos,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SphereKernel {
    name: String,
    quadrature: SphereQuadrature,
    values: Vec<f64>,
    /// Declared integrability exponent `s` in `(1, inf]`.
    s: f64,
    lipschitz_exponent: Option<f64>,
}

fn check_s(s: f64) -> Result<()> {
    if s > 1.0 {
        Ok(())
    } else {
        Err(Error::domain(format!("integrability exponent must satisfy 1 < s <= inf, got {s}")))
    }
}

fn signum_or_zero(v: f64) -> f64 {
    if v.abs() < 1e-12 {
        0.0
    } else {
        v.signum()
    }
}

impl SphereKernel {
    /// One of the library kernels on the default quadrature for `dim`.
    pub fn library(shape: KernelShape, dim: usize, s: f64) -> Result<Self> {
        Self::library_with_nodes(shape, dim, DEFAULT_CIRCLE_NODES, s)
    }

    pub fn library_with_nodes(shape: KernelShape, dim: usize, nodes: usize, s: f64) -> Result<Self> {
        check_s(s)?;
        let quadrature = SphereQuadrature::new(dim, nodes)?;
        let values: Vec<f64> = match (dim, shape) {
            (_, KernelShape::Constant) => vec![1.0; quadrature.len()],
            (1, KernelShape::Sign) | (1, KernelShape::SignCos) => vec![-1.0, 1.0],
            (1, other) => {
                return Err(Error::config(format!("kernel {other:?} is only defined for n = 2")))
            }
            (_, KernelShape::Sign) | (_, KernelShape::SignCos) => (0..quadrature.len())
                .map(|j| signum_or_zero(quadrature.angle(j).cos()))
                .collect(),
            (_, KernelShape::Cos) => (0..quadrature.len()).map(|j| quadrature.angle(j).cos()).collect(),
            (_, KernelShape::Sin) => (0..quadrature.len()).map(|j| quadrature.angle(j).sin()).collect(),
        };
        let lipschitz_exponent = match shape {
            KernelShape::Constant | KernelShape::Cos | KernelShape::Sin => Some(1.0),
            _ => None,
        };
        Ok(SphereKernel {
            name: format!("{shape:?}").to_lowercase(),
            quadrature,
            values,
            s,
            lipschitz_exponent,
        })
    }

    /// A kernel from explicit node values. For `n = 1` the values are at
    /// `-1` and `+1`; for `n = 2` at the equally spaced angles `2 pi j / N`.
    pub fn from_values(dim: usize, values: Vec<f64>, s: f64) -> Result<Self> {
        check_s(s)?;
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::config("kernel values must be finite"));
        }
        let quadrature = match dim {
            1 if values.len() == 2 => SphereQuadrature::new(1, 0)?,
            1 => return Err(Error::config("a kernel on S^0 needs exactly 2 values")),
            _ => SphereQuadrature::new(dim, values.len())?,
        };
        Ok(SphereKernel {
            name: "custom".into(),
            quadrature,
            values,
            s,
            lipschitz_exponent: None,
        })
    }

    /// Reads node values from the first column of a CSV file. A non-numeric
    /// first row is treated as a header.
    pub fn from_csv(path: &Path, dim: usize, s: f64) -> Result<Self> {
        let mut reader = csv::ReaderBuilder::new()
            .has_headers(false)
            .trim(csv::Trim::All)
            .from_path(path)?;
        let mut values = Vec::new();
        for (row, record) in reader.records().enumerate() {
            let record = record?;
            let Some(field) = record.get(0) else { continue };
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
        let mut k = Self::from_values(dim, values, s)?;
        k.name = format!("csv:{}", path.display());
        Ok(k)
    }

    pub fn with_lipschitz_exponent(mut self, gamma: f64) -> Self {
        self.lipschitz_exponent = Some(gamma);
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dim(&self) -> usize {
        self.quadrature.dim()
    }

    pub fn s(&self) -> f64 {
        self.s
    }

    pub fn lipschitz_exponent(&self) -> Option<f64> {
        self.lipschitz_exponent
    }

    pub fn quadrature(&self) -> &SphereQuadrature {
        &self.quadrature
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// `Omega(x)` without the `x != 0` check; callers guarantee it.
    #[inline]
    pub fn value_at(&self, x: Point) -> f64 {
        self.values[self.quadrature.nearest_node(x)]
    }

    /// `Omega(x) = Omega(x / |x|)` by nearest-node lookup.
    pub fn evaluate(&self, x: Point) -> Result<f64> {
        if grid::norm(x) == 0.0 {
            return Err(Error::domain("kernel evaluated at the origin"));
        }
        Ok(self.value_at(x))
    }

    /// True when every node value is `1` (the kernel `Omega = 1`).
    pub fn is_constant_one(&self) -> bool {
        self.values.iter().all(|v| *v == 1.0)
    }

    /// `||Omega||_{L_s(S^{n-1})}`; `s = inf` gives `max |Omega|`.
    pub fn ls_sphere_norm(&self, s: f64) -> Result<f64> {
        check_s(s)?;
        if s.is_infinite() {
            return Ok(self.values.iter().fold(0.0, |m, v| m.max(v.abs())));
        }
        let sum: f64 = self
            .values
            .iter()
            .zip(self.quadrature.weights())
            .map(|(v, w)| w * v.abs().powf(s))
            .sum();
        Ok(sum.powf(1.0 / s))
    }

    /// `|sum_j w_j Omega_j|`; zero certifies the mean-zero condition.
    pub fn cancellation_defect(&self) -> f64 {
        self.values
            .iter()
            .zip(self.quadrature.weights())
            .map(|(v, w)| v * w)
            .sum::<f64>()
            .abs()
    }

    /// `max_{i != j} |Omega_i - Omega_j| / |x'_i - x'_j|^gamma` over node
    /// pairs. Large values flag a rough (discontinuous) kernel; they are not
    /// an error.
    pub fn lip_gamma_seminorm(&self, gamma: f64) -> Result<f64> {
        if !(gamma > 0.0 && gamma <= 1.0) {
            return Err(Error::domain(format!("Lipschitz exponent must lie in (0, 1], got {gamma}")));
        }
        let nodes = self.quadrature.nodes();
        if nodes.len() < 2 {
            return Err(Error::domain("Lipschitz seminorm needs at least two nodes"));
        }
        let mut best = 0.0_f64;
        for i in 0..nodes.len() {
            for j in (i + 1)..nodes.len() {
                let chord = grid::distance(nodes[i], nodes[j]);
                let q = (self.values[i] - self.values[j]).abs() / chord.powf(gamma);
                best = best.max(q);
            }
        }
        Ok(best)
    }

    /// Discrete `(int_{B(x0,t)} |Omega(x - y)|^s dy)^{1/s}` against the
    /// polar-coordinates majorant `||Omega||_{L_s(S)} (|B(x0, 2t)| / sigma)^{1/s}`.
    /// The cell containing `x` itself is skipped (`Omega` is undefined at 0).
    pub fn ls_ball_bound(&self, s: f64, x: Point, ball: &Ball, grid: &Grid) -> Result<LsBallBound> {
        check_s(s)?;
        if !ball.contains(x) {
            return Err(Error::precondition("x must lie inside the ball"));
        }
        let hn = grid.cell_volume();
        let cells = grid.ball_cells(ball);
        let mut acc = 0.0_f64;
        for &c in &cells {
            let y = grid.center(c);
            let z = [x[0] - y[0], x[1] - y[1]];
            if grid::norm(z) == 0.0 {
                continue;
            }
            let v = self.value_at(z).abs();
            if s.is_infinite() {
                acc = acc.max(v);
            } else {
                acc += v.powf(s) * hn;
            }
        }
        let lhs = if s.is_infinite() { acc } else { acc.powf(1.0 / s) };
        let sphere_norm = self.ls_sphere_norm(s)?;
        let rhs = if s.is_infinite() {
            sphere_norm
        } else {
            let dim = grid.dim();
            let big = grid::unit_ball_volume(dim) * (2.0 * ball.radius).powi(dim as i32);
            sphere_norm * (big / grid::sphere_measure(dim)).powf(1.0 / s)
        };
        Ok(LsBallBound {
            lhs,
            rhs,
            ratio: ratio(lhs, rhs),
        })
    }
}

/// Both sides of the ball-restricted `L_s` estimate and their ratio
/// (the empirical dimensional constant).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LsBallBound {
    pub lhs: f64,
    pub rhs: f64,
    pub ratio: f64,
}

fn ratio(lhs: f64, rhs: f64) -> f64 {
    if rhs == 0.0 {
        if lhs == 0.0 {
            0.0
        } else {
            f64::INFINITY
        }
    } else {
        lhs / rhs
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn k(shape: KernelShape, dim: usize) -> SphereKernel {
        SphereKernel::library(shape, dim, 2.0).unwrap()
    }

    #[test]
    fn evaluate_examples() {
        let one = k(KernelShape::Constant, 2);
        let x = [3.0 / 5.0 * 7.0, 4.0 / 5.0 * 7.0];
        assert_eq!(one.evaluate(x).unwrap(), 1.0);
        let sign = k(KernelShape::Sign, 1);
        assert_eq!(sign.evaluate([-2.5, 0.0]).unwrap(), -1.0);
        let cos = k(KernelShape::Cos, 2);
        assert_eq!(cos.evaluate([5.0, 0.0]).unwrap(), 1.0);
        assert!(cos.evaluate([0.0, 0.0]).is_err());
    }

    #[test]
    fn homogeneity_is_exact() {
        let cos = k(KernelShape::Cos, 2);
        for &(x, y) in &[(0.3, 0.7), (-1.2, 0.05), (4.0, -4.1)] {
            let v = cos.value_at([x, y]);
            for mu in [1e-6, 0.5, 3.0, 1e6] {
                assert_eq!(cos.value_at([mu * x, mu * y]), v);
            }
        }
    }

    #[test]
    fn sphere_norm_examples() {
        let one1 = k(KernelShape::Constant, 1);
        assert!((one1.ls_sphere_norm(2.0).unwrap() - 2f64.sqrt()).abs() < 1e-15);
        let one2 = k(KernelShape::Constant, 2);
        assert!((one2.ls_sphere_norm(2.0).unwrap() - (2.0 * PI).sqrt()).abs() < 1e-12);
        let sign = k(KernelShape::Sign, 1);
        assert_eq!(sign.ls_sphere_norm(f64::INFINITY).unwrap(), 1.0);
        assert!(sign.ls_sphere_norm(1.0).is_err());
        for s in [1.5, 2.0, 4.0, 8.0] {
            assert_eq!(sign.ls_sphere_norm(s).unwrap(), one1.ls_sphere_norm(s).unwrap());
        }
    }

    #[test]
    fn cancellation_examples() {
        assert_eq!(k(KernelShape::Sign, 1).cancellation_defect(), 0.0);
        assert_eq!(k(KernelShape::Constant, 1).cancellation_defect(), 2.0);
        assert!(k(KernelShape::Cos, 2).cancellation_defect() <= 1e-12);
        assert!(k(KernelShape::Sin, 2).cancellation_defect() <= 1e-12);
        assert!(k(KernelShape::SignCos, 2).cancellation_defect() <= 1e-12);
    }

    #[test]
    fn lipschitz_examples() {
        assert_eq!(k(KernelShape::Constant, 2).lip_gamma_seminorm(1.0).unwrap(), 0.0);
        let lc = k(KernelShape::Cos, 2).lip_gamma_seminorm(1.0).unwrap();
        assert!(lc > 0.0 && lc <= 1.01, "{lc}");
        let ls = k(KernelShape::SignCos, 2).lip_gamma_seminorm(1.0).unwrap();
        assert!(ls > 10.0, "{ls}");
        assert!(k(KernelShape::Cos, 2).lip_gamma_seminorm(0.0).is_err());
    }

    #[test]
    fn library_rejects_angle_kernels_on_the_line() {
        assert!(SphereKernel::library(KernelShape::Cos, 1, 2.0).is_err());
        assert!(SphereKernel::library(KernelShape::Sign, 1, 1.0).is_err());
    }

    #[test]
    fn custom_values_and_csv() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("omega.csv");
        std::fs::write(&path, "value\n-1\n1\n").unwrap();
        let kern = SphereKernel::from_csv(&path, 1, 2.0).unwrap();
        assert_eq!(kern.values(), &[-1.0, 1.0]);
        std::fs::write(&path, "1\nx\n").unwrap();
        assert!(SphereKernel::from_csv(&path, 1, 2.0).is_err());
        assert!(SphereKernel::from_values(1, vec![1.0, 2.0, 3.0], 2.0).is_err());
    }

    #[test]
    fn ls_ball_bound_single_term_and_sign() {
        let g = Grid::new(1, 1.0, 1.0 / 64.0).unwrap();
        let sign = k(KernelShape::Sign, 1);
        let one = k(KernelShape::Constant, 1);
        let x = g.center(70);
        let ball = Ball::new(g.center(64), 0.3).unwrap();
        let a = sign.ls_ball_bound(2.0, x, &ball, &g).unwrap();
        let b = one.ls_ball_bound(2.0, x, &ball, &g).unwrap();
        assert_eq!(a.lhs, b.lhs);
        // every cell but x contributes |Omega|^2 h = h
        let n = g.ball_cells(&ball).len() as f64 - 1.0;
        assert!((a.lhs - (n * g.spacing()).sqrt()).abs() < 1e-14);
        // single-cell ball around a neighbour of x
        let tiny = Ball::new(g.center(71), g.spacing() * 0.9).unwrap();
        let x2 = [g.center(71)[0] + 0.25 * g.spacing(), 0.0];
        let c = sign.ls_ball_bound(2.0, x2, &tiny, &g).unwrap();
        assert!((c.lhs - g.spacing().sqrt()).abs() < 1e-14);
        assert!(sign.ls_ball_bound(2.0, [0.9, 0.0], &tiny, &g).is_err());
    }
}
