//! TOML experiment configuration.
//!
//! Parsing rejects unknown keys. Semantic checks run before anything is
//! computed and report the line of the offending key when it can be found.

use std::path::{Path, PathBuf};

use rand::Rng as _;
use serde::Deserialize;

use crate::error::{Error, Result};
use crate::function::{Generator, GridFunction};
use crate::grid::{self, BallFamily, Grid, Point};
use crate::harness::{self, CaseId, HarnessCase};
use crate::kernels::{KernelShape, SphereKernel};
use crate::operators::{OperatorKind, OperatorSpec, TGrid};
use crate::rng;
use crate::spaces::PhiModel;
use crate::weights::Weight;

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub seed: u64,
    /// Output directory (overridden by `ROUGH_MORREY_OUT`).
    #[serde(default)]
    pub output: Option<PathBuf>,
    pub grid: GridConfig,
    #[serde(default)]
    pub kernel: Option<KernelConfig>,
    #[serde(default)]
    pub weight: WeightConfig,
    #[serde(default)]
    pub f: Option<Generator>,
    #[serde(default)]
    pub b: Option<Generator>,
    #[serde(default)]
    pub space: SpaceConfig,
    #[serde(default)]
    pub family: FamilyConfig,
    #[serde(default)]
    pub operator: Option<OperatorConfig>,
    #[serde(default)]
    pub norm: Option<NormConfig>,
    #[serde(default)]
    pub bmo: Option<BmoConfig>,
    #[serde(default, rename = "case")]
    pub cases: Vec<CaseConfig>,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub dim: usize,
    pub half_width: f64,
    pub spacing: f64,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KernelConfig {
    #[serde(default)]
    pub shape: Option<KernelShape>,
    /// CSV of node values (last column), in place of `shape`.
    #[serde(default)]
    pub values_csv: Option<PathBuf>,
    #[serde(default)]
    pub nodes: Option<usize>,
    /// `Omega in L_s(S^{n-1})`; `inf` allowed.
    #[serde(default = "infinity")]
    pub s: f64,
    #[serde(default)]
    pub lipschitz_exponent: Option<f64>,
}

fn infinity() -> f64 {
    f64::INFINITY
}

#[derive(Debug, Clone, PartialEq, Deserialize, Default)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum WeightConfig {
    #[default]
    Unit,
    Constant {
        value: f64,
    },
    Power {
        alpha: f64,
        #[serde(default)]
        center: Point,
    },
    Csv {
        path: PathBuf,
    },
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpaceConfig {
    #[serde(default = "two")]
    pub p: f64,
    /// Exponent for the hypothesis gates; defaults to the kernel's `s`.
    #[serde(default)]
    pub s: Option<f64>,
    #[serde(default = "half")]
    pub kappa: f64,
    #[serde(default)]
    pub lambda: Option<f64>,
    #[serde(default = "default_phi")]
    pub phi1: PhiModel,
    #[serde(default = "default_phi")]
    pub phi2: PhiModel,
}

fn two() -> f64 {
    2.0
}

fn half() -> f64 {
    0.5
}

fn default_phi() -> PhiModel {
    PhiModel::KappaWeight { kappa: 0.5 }
}

impl Default for SpaceConfig {
    fn default() -> Self {
        SpaceConfig {
            p: 2.0,
            s: None,
            kappa: 0.5,
            lambda: None,
            phi1: default_phi(),
            phi2: default_phi(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FamilyConfig {
    #[serde(default = "default_stride")]
    pub stride: usize,
    /// Explicit radii; otherwise dyadic from `radius_min` (default `h`) to
    /// `radius_max` (default `2L`).
    #[serde(default)]
    pub radii: Option<Vec<f64>>,
    #[serde(default)]
    pub radius_min: Option<f64>,
    #[serde(default)]
    pub radius_max: Option<f64>,
}

fn default_stride() -> usize {
    8
}

impl Default for FamilyConfig {
    fn default() -> Self {
        FamilyConfig {
            stride: default_stride(),
            radii: None,
            radius_min: None,
            radius_max: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OperatorConfig {
    pub kind: OperatorKind,
    #[serde(default)]
    pub radii: Option<Vec<f64>>,
    #[serde(default)]
    pub t_grid: Option<TGrid>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NormKind {
    Lebesgue,
    WeightedLebesgue,
    ClassicalMorrey,
    WeightedMorrey,
    GeneralizedWeightedMorrey,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NormConfig {
    pub kind: NormKind,
    #[serde(default)]
    pub weak: bool,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BmoConfig {
    /// Exponent of the John-Nirenberg equivalence check.
    #[serde(default = "two")]
    pub jn_p: f64,
    /// Use `w` in the John-Nirenberg averages and report `||b||_{BMO(w)}`.
    #[serde(default)]
    pub weighted: bool,
    /// Log-growth fit at `x`, base radius `r`, dilations `2^k`.
    #[serde(default)]
    pub fit_center: Option<Point>,
    #[serde(default)]
    pub fit_radius: Option<f64>,
    #[serde(default = "default_ks")]
    pub fit_dilations: Vec<u32>,
}

fn default_ks() -> Vec<u32> {
    (1..=6).collect()
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CaseConfig {
    pub id: CaseId,
    /// Size of the seeded test-function family; without it the case uses `f`
    /// (or 50 functions when `f` is absent).
    #[serde(default)]
    pub functions: Option<usize>,
    #[serde(default)]
    pub ceiling: Option<f64>,
    #[serde(default)]
    pub spread_ceiling: Option<f64>,
    #[serde(default)]
    pub gate_ceiling: Option<f64>,
    #[serde(default)]
    pub t_max: Option<f64>,
    #[serde(default)]
    pub phi1: Option<PhiModel>,
    #[serde(default)]
    pub phi2: Option<PhiModel>,
    /// Weight override for this case.
    #[serde(default)]
    pub weight: Option<WeightConfig>,
}

/// Line (1-based) of `key` inside `[table]` (or at top level when `table`
/// is empty); also matches `[[table]]` entries, returning the `index`-th.
pub fn locate(source: &str, table: &str, key: &str, index: usize) -> Option<usize> {
    let mut current = String::new();
    let mut seen = 0usize;
    for (i, raw) in source.lines().enumerate() {
        let line = raw.trim();
        if let Some(h) = line.strip_prefix("[[").and_then(|l| l.strip_suffix("]]")) {
            current = h.trim().to_string();
            if current == table {
                seen += 1;
            }
            if key.is_empty() && current == table && seen == index + 1 {
                return Some(i + 1);
            }
            continue;
        }
        if let Some(h) = line.strip_prefix('[').and_then(|l| l.strip_suffix(']')) {
            current = h.trim().to_string();
            if key.is_empty() && current == table {
                return Some(i + 1);
            }
            continue;
        }
        if current != table || key.is_empty() {
            continue;
        }
        let Some((k, _)) = line.split_once('=') else { continue };
        if k.trim() == key && (seen == 0 || seen == index + 1) {
            return Some(i + 1);
        }
    }
    None
}

/// A configuration together with its source text for diagnostics.
#[derive(Debug, Clone)]
pub struct LoadedConfig {
    pub config: ExperimentConfig,
    pub source: String,
    pub path: PathBuf,
}

impl LoadedConfig {
    pub fn read(path: &Path) -> Result<Self> {
        let source = std::fs::read_to_string(path)
            .map_err(|e| Error::config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&source, path)
    }

    pub fn parse(source: &str, path: &Path) -> Result<Self> {
        let config: ExperimentConfig = toml::from_str(source).map_err(|e| {
            let at = e
                .span()
                .map(|s| {
                    let line = source[..s.start.min(source.len())].matches('\n').count() + 1;
                    format!(" at line {line}")
                })
                .unwrap_or_default();
            Error::config(format!("{}{at}: {}", path.display(), e.message()))
        })?;
        let loaded = LoadedConfig {
            config,
            source: source.to_string(),
            path: path.to_path_buf(),
        };
        loaded.validate()?;
        Ok(loaded)
    }

    fn err(&self, table: &str, key: &str, index: usize, msg: impl std::fmt::Display) -> Error {
        let at = locate(&self.source, table, key, index)
            .map(|l| format!(" at line {l}"))
            .unwrap_or_default();
        let name = if table.is_empty() { key.to_string() } else { format!("{table}.{key}") };
        Error::config(format!("{}{at} ({name}): {msg}", self.path.display()))
    }

    /// Semantic checks that do not need any computation.
    pub fn validate(&self) -> Result<()> {
        let c = &self.config;
        if let Err(e) = self.grid() {
            return Err(self.err("grid", "spacing", 0, e));
        }
        let p = c.space.p;
        if !(p >= 1.0 && p.is_finite()) {
            return Err(self.err("space", "p", 0, format!("p must satisfy 1 <= p < inf, got {p}")));
        }
        if let Some(s) = c.space.s {
            if !(s > 1.0) {
                return Err(self.err("space", "s", 0, format!("s must exceed 1, got {s}")));
            }
        }
        if let Some(k) = &c.kernel {
            if k.shape.is_some() == k.values_csv.is_some() {
                return Err(self.err("kernel", "", 0, "give exactly one of `shape` or `values_csv`"));
            }
            if !(k.s > 1.0) {
                return Err(self.err("kernel", "s", 0, format!("s must exceed 1, got {}", k.s)));
            }
        }
        for (key, phi) in [("phi1", &c.space.phi1), ("phi2", &c.space.phi2)] {
            if let Err(e) = phi.validate() {
                return Err(self.err("space", key, 0, e));
            }
        }
        if c.family.stride == 0 {
            return Err(self.err("family", "stride", 0, "stride must be positive"));
        }
        if let Err(e) = self.family() {
            return Err(self.err("family", "", 0, e));
        }
        for (i, case) in c.cases.iter().enumerate() {
            if let Some(t) = case.t_max {
                if !(t > 0.0 && t.is_finite()) {
                    return Err(self.err("case", "t_max", i, format!("t_max must be positive, got {t}")));
                }
            }
            for (key, v) in [
                ("ceiling", case.ceiling),
                ("spread_ceiling", case.spread_ceiling),
                ("gate_ceiling", case.gate_ceiling),
            ] {
                if let Some(v) = v {
                    if !(v > 0.0) {
                        return Err(self.err("case", key, i, format!("{key} must be positive")));
                    }
                }
            }
            if c.operator.is_none() && !matches!(case.id, CaseId::Z316 | CaseId::Z317 | CaseId::Z47 | CaseId::Z48) {
                return Err(self.err("case", "id", i, format!("case {} needs an [operator] block", case.id)));
            }
            let needs_b = matches!(case.id, CaseId::L5Strong | CaseId::L5Psmall | CaseId::T15);
            if needs_b && c.b.is_none() {
                return Err(self.err("case", "id", i, format!("case {} needs a symbol [b]", case.id)));
            }
            if needs_b && !c.operator.as_ref().is_some_and(|o| o.kind.is_commutator()) {
                return Err(self.err("case", "id", i, format!("case {} needs a commutator operator", case.id)));
            }
        }
        if let Some(op) = &c.operator {
            if op.kind != OperatorKind::Maximal && c.kernel.is_none() {
                return Err(self.err("operator", "kind", 0, format!("operator {} needs a [kernel]", op.kind.name())));
            }
            if op.kind.is_commutator() && c.b.is_none() {
                return Err(self.err("operator", "kind", 0, format!("operator {} needs a symbol [b]", op.kind.name())));
            }
        }
        Ok(())
    }

    pub fn grid(&self) -> Result<Grid> {
        let g = &self.config.grid;
        Grid::new(g.dim, g.half_width, g.spacing)
    }

    pub fn family(&self) -> Result<BallFamily> {
        let grid = self.grid()?;
        let fc = &self.config.family;
        let radii = match &fc.radii {
            Some(r) => r.clone(),
            None => {
                let lo = fc.radius_min.unwrap_or(grid.spacing());
                let hi = fc.radius_max.unwrap_or(2.0 * grid.half_width());
                if !(lo > 0.0 && hi >= lo) {
                    return Err(Error::config("family needs 0 < radius_min <= radius_max"));
                }
                grid::dyadic_radii(lo, hi)
            }
        };
        BallFamily::strided(&grid, fc.stride, radii)
    }

    pub fn kernel(&self) -> Result<Option<SphereKernel>> {
        let Some(k) = &self.config.kernel else { return Ok(None) };
        let dim = self.config.grid.dim;
        let mut kernel = match (&k.shape, &k.values_csv) {
            (Some(shape), None) => match k.nodes {
                Some(n) => SphereKernel::library_with_nodes(*shape, dim, n, k.s)?,
                None => SphereKernel::library(*shape, dim, k.s)?,
            },
            (None, Some(path)) => SphereKernel::from_csv(&self.resolve(path), dim, k.s)?,
            _ => return Err(self.err("kernel", "", 0, "give exactly one of `shape` or `values_csv`")),
        };
        if let Some(g) = k.lipschitz_exponent {
            kernel = kernel.with_lipschitz_exponent(g);
        }
        Ok(Some(kernel))
    }

    /// The `s` used by the gates: `space.s`, else the kernel's.
    pub fn s(&self) -> f64 {
        self.config
            .space
            .s
            .or(self.config.kernel.as_ref().map(|k| k.s))
            .unwrap_or(f64::INFINITY)
    }

    fn resolve(&self, path: &Path) -> PathBuf {
        if path.is_absolute() {
            path.to_path_buf()
        } else {
            self.path.parent().unwrap_or(Path::new(".")).join(path)
        }
    }

    pub fn weight_from(&self, wc: &WeightConfig, grid: &Grid) -> Result<Weight> {
        match wc {
            WeightConfig::Unit => Ok(Weight::unit(grid)),
            WeightConfig::Constant { value } => Weight::constant(grid, *value),
            WeightConfig::Power { alpha, center } => Weight::power(grid, *alpha, *center),
            WeightConfig::Csv { path } => Weight::from_csv(grid, &self.resolve(path)),
        }
    }

    pub fn weight(&self, grid: &Grid) -> Result<Weight> {
        self.weight_from(&self.config.weight, grid)
    }

    pub fn f(&self, grid: &Grid) -> Result<GridFunction> {
        match &self.config.f {
            Some(g) => g.sample(grid),
            None => Err(self.err("f", "", 0, "this command needs an [f] block")),
        }
    }

    pub fn b(&self, grid: &Grid) -> Result<Option<GridFunction>> {
        self.config.b.as_ref().map(|g| g.sample(grid)).transpose()
    }

    pub fn operator(&self, grid: &Grid) -> Result<OperatorSpec> {
        let Some(oc) = &self.config.operator else {
            return Err(self.err("operator", "", 0, "this command needs an [operator] block"));
        };
        let mut spec = OperatorSpec::new(oc.kind, grid);
        if let Some(k) = self.kernel()? {
            spec = spec.with_kernel(k);
        }
        if oc.kind.is_commutator() {
            if let Some(b) = self.b(grid)? {
                spec = spec.with_symbol(b);
            }
        }
        if let Some(r) = &oc.radii {
            spec = spec.with_radii(r.clone());
        }
        if let Some(t) = oc.t_grid {
            spec = spec.with_t_grid(t);
        }
        spec.validate(grid)?;
        Ok(spec)
    }

    /// The harness cases in file order, gates not yet checked.
    pub fn cases(&self, grid: &Grid) -> Result<Vec<HarnessCase>> {
        let c = &self.config;
        let family = self.family()?;
        let w = self.weight(grid)?;
        let operator = match &c.operator {
            Some(_) => self.operator(grid)?,
            None => OperatorSpec::new(OperatorKind::Maximal, grid),
        };
        let mut shared: Option<Vec<GridFunction>> = None;
        let mut out = Vec::with_capacity(c.cases.len());
        for (i, cc) in c.cases.iter().enumerate() {
            let functions = match (cc.functions, &c.f) {
                (None, Some(_)) => vec![self.f(grid)?],
                (n, _) => {
                    let n = n.unwrap_or(harness::DEFAULT_FUNCTIONS);
                    match &shared {
                        Some(v) if v.len() == n => v.clone(),
                        _ => {
                            let v = harness::test_functions(grid, c.seed, n);
                            shared = Some(v.clone());
                            v
                        }
                    }
                }
            };
            let w = match &cc.weight {
                Some(wc) => self.weight_from(wc, grid)?,
                None => w.clone(),
            };
            let mut case = HarnessCase::new(cc.id, operator.clone(), functions, w, c.space.p, self.s(), family.clone(), grid)
                .with_phi(
                    cc.phi1.clone().unwrap_or_else(|| c.space.phi1.clone()),
                    cc.phi2.clone().unwrap_or_else(|| c.space.phi2.clone()),
                );
            if let Some(t) = cc.t_max {
                case.t_max = t;
            }
            if let Some(v) = cc.ceiling {
                case.ceiling = v;
            }
            if let Some(v) = cc.spread_ceiling {
                case.spread_ceiling = v;
            }
            if let Some(v) = cc.gate_ceiling {
                case.gate_ceiling = v;
            }
            case.seed = rng::stream(c.seed, (1 << 32) + i as u64).random();
            out.push(case);
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const BASIC: &str = r#"
seed = 3

[grid]
dim = 1
half_width = 1.0
spacing = 0.0625

[space]
p = 2.0
"#;

    #[test]
    fn parses_minimal() {
        let c = LoadedConfig::parse(BASIC, Path::new("x.toml")).unwrap();
        assert_eq!(c.config.seed, 3);
        assert_eq!(c.grid().unwrap().len(), 32);
        assert_eq!(c.config.weight, WeightConfig::Unit);
    }

    #[test]
    fn unknown_key_is_rejected_with_line() {
        let src = format!("{BASIC}bogus = 1\n");
        let e = LoadedConfig::parse(&src, Path::new("x.toml")).unwrap_err().to_string();
        assert!(e.contains("line 11"), "{e}");
        assert!(e.contains("bogus"), "{e}");
    }

    #[test]
    fn semantic_error_names_line() {
        let src = BASIC.replace("p = 2.0", "p = 0.5");
        let e = LoadedConfig::parse(&src, Path::new("x.toml")).unwrap_err().to_string();
        assert!(e.contains("line 10") && e.contains("space.p"), "{e}");
    }

    #[test]
    fn locate_finds_array_entries() {
        let src = "[[case]]\nid = \"Z316\"\n[[case]]\nid = \"Z47\"\nt_max = 0\n";
        assert_eq!(locate(src, "case", "t_max", 1), Some(5));
        assert_eq!(locate(src, "case", "id", 0), Some(2));
        assert_eq!(locate(src, "case", "id", 1), Some(4));
        assert_eq!(locate(src, "case", "", 1), Some(3));
    }
}
