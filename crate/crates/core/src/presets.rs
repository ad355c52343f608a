//! Named batteries run by `suite --preset NAME`.
//!
//! `paper-core` runs twelve checks, each producing one [`CriterionResult`]
//! with its measured quantities. All sizes are desk scale: one-dimensional
//! grids of at most 2048 cells and two-dimensional grids of at most 32^2.

use std::collections::BTreeMap;

use rand::Rng as _;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::function::{self, GridFunction};
use crate::grid::{self, Ball, BallFamily, Grid};
use crate::harness::{self, CaseId, HarnessCase, VerificationReport, CHEBYSHEV_SLACK};
use crate::kernels::{KernelShape, SphereKernel};
use crate::operators::{self, CenterCell, OperatorKind, OperatorSpec, TGrid};
use crate::report;
use crate::rng;
use crate::spaces::{self, PhiModel};
use crate::weights::{self, conjugate, Weight};

pub const PRESETS: [&str; 1] = ["paper-core"];

/// Default seed of the `paper-core` preset.
pub const DEFAULT_SEED: u64 = 20_240_601;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CriterionResult {
    pub index: usize,
    pub name: String,
    pub pass: bool,
    pub metrics: BTreeMap<String, f64>,
    pub notes: Vec<String>,
}

impl CriterionResult {
    fn new(index: usize, name: &str) -> Self {
        CriterionResult {
            index,
            name: name.to_string(),
            pass: true,
            metrics: BTreeMap::new(),
            notes: Vec::new(),
        }
    }

    fn metric(&mut self, key: &str, v: f64) {
        self.metrics.insert(key.to_string(), v);
    }

    /// Records `v` and requires `ok`.
    fn check(&mut self, key: &str, v: f64, ok: bool) {
        self.metric(key, v);
        if !ok {
            self.pass = false;
            self.notes.push(format!("{key} = {} fails", function::fmt_f64(v)));
        }
    }

    fn require(&mut self, ok: bool, what: &str) {
        if !ok {
            self.pass = false;
            self.notes.push(what.to_string());
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuiteReport {
    pub preset: String,
    pub seed: u64,
    pub pass: bool,
    pub criteria: Vec<CriterionResult>,
    /// Harness reports produced along the way (rows are written as CSV).
    pub cases: Vec<VerificationReport>,
}

pub fn run_preset(name: &str, seed: u64) -> Result<SuiteReport> {
    match name {
        "paper-core" => paper_core(seed),
        other => Err(Error::config(format!(
            "unknown preset `{other}` (available: {})",
            PRESETS.join(", ")
        ))),
    }
}

fn rel(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else {
        (a - b).abs() / a.abs().max(b.abs())
    }
}

fn sign_kernel(dim: usize) -> SphereKernel {
    SphereKernel::library(KernelShape::Sign, dim, f64::INFINITY).expect("library kernel")
}

/// Runs all twelve checks.
pub fn paper_core(seed: u64) -> Result<SuiteReport> {
    let mut criteria = Vec::new();
    let mut cases = Vec::new();
    criteria.push(muckenhoupt()?);
    criteria.push(doubling()?);
    criteria.push(reductions()?);
    criteria.push(operator_identities()?);
    criteria.push(oracles()?);
    criteria.push(marcinkiewicz_size(seed)?);
    let (c7, mut r7) = main_lemma(seed)?;
    criteria.push(c7);
    criteria.push(weak_type(&r7, seed)?);
    cases.append(&mut r7);
    let (c9, mut r9) = zygmund()?;
    criteria.push(c9);
    cases.append(&mut r9);
    let (c10, mut r10) = theorem_ratios(seed)?;
    criteria.push(c10);
    cases.append(&mut r10);
    criteria.push(bmo_battery()?);
    criteria.push(determinism(&criteria)?);
    let pass = criteria.iter().all(|c| c.pass);
    Ok(SuiteReport {
        preset: "paper-core".into(),
        seed,
        pass,
        criteria,
        cases,
    })
}

fn muckenhoupt() -> Result<CriterionResult> {
    let mut c = CriterionResult::new(1, "muckenhoupt exactness");
    let g = Grid::new(1, 1.0, 1.0 / 256.0)?;
    let fam = BallFamily::dyadic(&g, 4)?;
    let one = Weight::unit(&g);
    let mut worst = 0.0_f64;
    for p in [1.5, 2.0, 4.0] {
        let a = weights::ap_characteristic(&one, p, &fam, &g)?.characteristic;
        worst = worst.max((a - 1.0).abs());
    }
    c.check("unit_weight_max_deviation", worst, worst <= 1e-12);
    let w = Weight::power(&g, 0.5, [0.0, 0.0])?;
    let p = 2.0;
    let pp = conjugate(p);
    let direct = weights::ap_characteristic(&w, p, &fam, &g)?.characteristic;
    let dual = weights::ap_characteristic(&weights::dual_weight(&w, p)?, pp, &fam, &g)?.characteristic;
    let gap = rel(dual, direct.powf(1.0 / (p - 1.0)));
    c.metric("power_weight_a2", direct);
    c.check("dual_identity_relative_gap", gap, gap <= 1e-10);
    Ok(c)
}

fn doubling() -> Result<CriterionResult> {
    let mut c = CriterionResult::new(2, "doubling");
    let g = Grid::new(1, 1.0, 1.0 / 256.0)?;
    let fam = BallFamily::dyadic(&g, 4)?;
    let w = Weight::power(&g, 0.3, [0.0, 0.0])?;
    let r = weights::doubling_check(&w, 2.0, &fam, &g)?;
    c.metric("tested", r.tested as f64);
    c.metric("max_ratio", r.max_ratio);
    c.metric("bound", r.bound);
    c.check("violations", r.violations as f64, r.violations == 0 && r.tested > 0);
    Ok(c)
}

fn reductions() -> Result<CriterionResult> {
    let mut c = CriterionResult::new(3, "reduction identities");
    let g = Grid::new(1, 1.0, 1.0 / 128.0)?;
    let fam = BallFamily::dyadic(&g, 4)?;
    let w = Weight::power(&g, 0.3, [0.0, 0.0])?;
    let f = function::bump(&g, [0.2, 0.0], 0.5).add(&function::indicator(&g, &Ball::new([-0.4, 0.0], 0.2)?));
    let p = 2.0;
    for weak in [false, true] {
        let gen = spaces::generalized_weighted_morrey_norm(&f, p, &PhiModel::KappaWeight { kappa: 0.5 }, &w, &fam, &g, weak)?;
        let direct = spaces::weighted_morrey_norm(&f, p, 0.5, &w, &fam, &g, weak)?;
        let gap = rel(gen.value, direct.value);
        let key = if weak { "kappa_weak_relative_gap" } else { "kappa_relative_gap" };
        c.check(key, gap, gap <= 1e-10);
    }
    let gen = spaces::generalized_weighted_morrey_norm(&f, p, &PhiModel::InvWeight, &w, &fam, &g, false)?;
    let leb = spaces::weighted_lebesgue_norm(&f, p, &w, &g);
    let gap = rel(gen.value, leb);
    c.check("inv_weight_relative_gap", gap, gap <= 1e-10);
    Ok(c)
}

fn operator_identities() -> Result<CriterionResult> {
    let mut c = CriterionResult::new(4, "operator identities");
    let mut max_rough = 0.0_f64;
    let mut max_comm = 0.0_f64;
    let mut max_disc = 0.0_f64;
    let mut max_odd = 0.0_f64;
    for (dim, l, h) in [(1, 1.0, 1.0 / 128.0), (2, 1.0, 1.0 / 16.0)] {
        let g = Grid::new(dim, l, h)?;
        let radii = grid::dyadic_radii(h, 2.0 * l);
        let f = function::bump(&g, [0.25, 0.0], 0.5).add(&function::indicator(&g, &Ball::new([-0.3, 0.1], 0.3)?));
        let one = SphereKernel::library(KernelShape::Constant, dim, f64::INFINITY)?;
        let rm = operators::rough_maximal(&one, &f, &g, &radii)?;
        let m = operators::maximal(&f, &g, &radii, CenterCell::Exclude)?;
        let d = rm.values().iter().zip(m.values()).fold(0.0_f64, |a, (x, y)| a.max((x - y).abs()));
        max_rough = max_rough.max(d);
        let kernel = if dim == 1 {
            sign_kernel(1)
        } else {
            SphereKernel::library(KernelShape::Cos, 2, f64::INFINITY)?
        };
        let scale = f.sup_norm();
        let b = GridFunction::constant(&g, 2.5);
        let tg = TGrid::for_grid(&g);
        for out in [
            operators::singular_commutator(&b, &kernel, &f, &g)?.kernel_form,
            operators::maximal_commutator(&b, &kernel, &f, &g, &radii)?,
            operators::marcinkiewicz_commutator(&b, &kernel, &f, &g, &tg)?,
        ] {
            max_comm = max_comm.max(out.sup_norm() / scale);
        }
        let bl = function::log_abs(&g, [0.05, 0.0]);
        let co = operators::singular_commutator(&bl, &kernel, &f, &g)?;
        max_disc = max_disc.max(co.discrepancy);
        // even input, odd kernel: T f is odd
        let even = function::bump(&g, [0.0, 0.0], 0.6);
        let tf = operators::singular(&kernel, &even, &g)?;
        let n = g.len();
        for i in 0..n {
            max_odd = max_odd.max((tf.get(i) + tf.get(n - 1 - i)).abs());
        }
    }
    c.check("rough_maximal_vs_maximal", max_rough, max_rough == 0.0);
    c.check("constant_b_commutators", max_comm, max_comm <= 1e-12);
    c.check("kernel_vs_algebraic", max_disc, max_disc <= 1e-10);
    c.check("odd_symmetry", max_odd, max_odd <= 1e-12);
    Ok(c)
}

fn oracles() -> Result<CriterionResult> {
    let mut c = CriterionResult::new(5, "oracle values");
    let g = Grid::new(1, 8.0, 1.0 / 16.0)?;
    let f = function::indicator(&g, &Ball::new([0.0, 0.0], 1.0)?);
    let radii = grid::dyadic_radii(g.spacing(), 16.0);
    let m = operators::maximal(&f, &g, &radii, CenterCell::Include)?;
    let v = m.get(g.nearest_cell([3.0, 0.0]));
    c.metric("maximal_at_3", v);
    c.check("maximal_error", (v - 0.25).abs(), (v - 0.25).abs() <= 2.0 * g.spacing());
    let g = Grid::new(1, 4.0, 1.0 / 256.0)?;
    let f = GridFunction::from_fn(&g, |x| if x[0] > 1.0 && x[0] < 2.0 { 1.0 } else { 0.0 });
    let spec = OperatorSpec::new(OperatorKind::Singular, &g).with_kernel(sign_kernel(1));
    let v = spec.apply_at(&f, &g, [0.0, 0.0])?;
    c.metric("singular_at_0", v);
    let err = (v + std::f64::consts::LN_2).abs();
    c.check("singular_error", err, err <= 5.0 * g.spacing());
    Ok(c)
}

fn marcinkiewicz_size(seed: u64) -> Result<CriterionResult> {
    let mut c = CriterionResult::new(6, "marcinkiewicz size condition");
    let tail = TGrid::cell_weights(&[0.5]);
    let tail_gap = rel(tail[0], 1.0 / (2.0 * 0.25));
    c.check("tail_oracle_gap", tail_gap, tail_gap <= 1e-15);
    let g = Grid::new(1, 2.0, 1.0 / 64.0)?;
    let spec = OperatorSpec::new(OperatorKind::Marcinkiewicz, &g).with_kernel(sign_kernel(1));
    let bound = std::f64::consts::FRAC_1_SQRT_2 * (1.0 + 1e-6);
    let mut worst = 0.0_f64;
    let mut rng = rng::stream(seed, 6);
    let mut tested = 0;
    while tested < 100 {
        let center = [rng.random_range(-1.5..1.5), 0.0];
        let width = rng.random_range(0.1..0.5);
        let f = if tested % 2 == 0 {
            function::bump(&g, center, width)
        } else {
            function::indicator(&g, &Ball::new(center, width)?)
        };
        let x = [rng.random_range(-2.0..2.0), 0.0];
        if f.is_zero() || g.distance_to_cells(x, &f.support()) < 2.0 * g.spacing() {
            continue;
        }
        let s = operators::size_condition_check(&spec, &f, x, &g)?;
        worst = worst.max(s.ratio);
        tested += 1;
    }
    c.metric("samples", tested as f64);
    c.check("max_ratio", worst, worst <= bound);
    Ok(c)
}

/// Grid and family for the harness criteria: `L = 4`, `h = 1/128`, radii
/// `2h .. L/32` so every ball has at least seven octaves of `[2r, T_max]`.
/// Centres stay in `|x| <= L/2`, where the test functions live; near the box
/// edge the truncated rhs integral starts too close to `T_max` to be stable.
pub fn harness_setup() -> Result<(Grid, BallFamily)> {
    let g = Grid::new(1, 4.0, 1.0 / 128.0)?;
    let radii = grid::dyadic_radii(2.0 * g.spacing(), g.half_width() / 32.0);
    let all = BallFamily::strided(&g, 16, radii)?;
    let inner = all.centers().iter().copied().filter(|c| c[0].abs() <= g.half_width() / 2.0).collect();
    let fam = BallFamily::new(inner, all.radii().to_vec())?;
    Ok((g, fam))
}

fn main_lemma(seed: u64) -> Result<(CriterionResult, Vec<VerificationReport>)> {
    let mut c = CriterionResult::new(7, "main lemma local bounds");
    let (g, fam) = harness_setup()?;
    let w = Weight::power(&g, 0.3, [0.0, 0.0])?;
    let fns = harness::test_functions(&g, seed, harness::DEFAULT_FUNCTIONS);
    let sing = OperatorSpec::new(OperatorKind::Singular, &g).with_kernel(sign_kernel(1));
    let mut case = HarnessCase::new(CaseId::L2Strong, sing, fns.clone(), w.clone(), 2.0, 8.0, fam.clone(), &g);
    case.spread_ceiling = 50.0;
    let strong = harness::run_case(&case, &g)?;
    let weak = harness::run_case(&case.clone().with_id(CaseId::L2Weak), &g)?;
    let comm = OperatorSpec::new(OperatorKind::SingularCommutator, &g)
        .with_kernel(sign_kernel(1))
        .with_symbol(function::log_abs(&g, [0.0, 0.0]));
    let mut case5 = HarnessCase::new(CaseId::L5Strong, comm, fns, w, 2.0, 8.0, fam, &g);
    case5.spread_ceiling = 50.0;
    let l5 = harness::run_case(&case5, &g)?;
    for (tag, r) in [("l2", &strong), ("l5", &l5)] {
        c.check(&format!("{tag}_c_emp"), r.c_emp, r.c_emp.is_finite());
        c.check(&format!("{tag}_spread"), r.spread, r.spread <= 50.0);
        c.check(&format!("{tag}_drift"), r.drift, r.stable);
        c.require(r.pass, &format!("{tag} verdict fails"));
    }
    Ok((c, vec![strong, weak, l5]))
}

fn weak_type(reports: &[VerificationReport], seed: u64) -> Result<CriterionResult> {
    let mut c = CriterionResult::new(8, "weak type");
    let strong = reports.iter().find(|r| r.case == CaseId::L2Strong);
    let weak = reports.iter().find(|r| r.case == CaseId::L2Weak);
    let (Some(strong), Some(weak)) = (strong, weak) else {
        return Err(Error::precondition("weak-type check needs the L2-strong and L2-weak reports"));
    };
    let mut violations = 0;
    for (s, w) in strong.rows.iter().zip(&weak.rows) {
        if w.lhs > s.lhs * (1.0 + CHEBYSHEV_SLACK) || w.ratio > s.ratio * (1.0 + CHEBYSHEV_SLACK) {
            violations += 1;
        }
    }
    c.metric("rows", strong.rows.len() as f64);
    c.metric("weak_c_emp", weak.c_emp);
    c.metric("strong_c_emp", strong.c_emp);
    c.check("violations", violations as f64, violations == 0 && strong.rows.len() == weak.rows.len());
    // weak and strong local norms ball by ball
    let (g, local) = harness_setup()?;
    let fam = BallFamily::strided(&g, 16, grid::dyadic_radii(local.radii()[0], g.half_width()))?;
    let w = Weight::power(&g, 0.3, [0.0, 0.0])?;
    let mut norm_violations = 0;
    for f in harness::test_functions(&g, seed, harness::DEFAULT_FUNCTIONS) {
        let s = spaces::weighted_morrey_norm(&f, 2.0, 0.5, &w, &fam, &g, false)?;
        let wk = spaces::weighted_morrey_norm(&f, 2.0, 0.5, &w, &fam, &g, true)?;
        for (a, b) in s.rows.iter().zip(&wk.rows) {
            norm_violations += (b.value > a.value * (1.0 + CHEBYSHEV_SLACK)) as usize;
        }
    }
    c.check("norm_violations", norm_violations as f64, norm_violations == 0);
    Ok(c)
}

fn zygmund() -> Result<(CriterionResult, Vec<VerificationReport>)> {
    let mut c = CriterionResult::new(9, "zygmund conditions");
    let (g, fam) = harness_setup()?;
    let fam = BallFamily::new(fam.centers().to_vec(), grid::dyadic_radii(2.0 * g.spacing(), g.half_width()))?;
    let op = OperatorSpec::new(OperatorKind::Singular, &g).with_kernel(sign_kernel(1));
    let case = HarnessCase::new(CaseId::Z316, op, vec![], Weight::unit(&g), 2.0, 8.0, fam, &g);
    let z316 = harness::run_case(&case, &g)?;
    let z47 = harness::run_case(&case.clone().with_id(CaseId::Z47), &g)?;
    let bad = harness::run_case(
        &case.with_phi(PhiModel::Power { beta: 0.5 }, PhiModel::Power { beta: 0.5 }),
        &g,
    )?;
    c.check("z316_c_emp", z316.c_emp, z316.pass);
    c.metric("z316_drift", z316.drift);
    c.check("z47_c_emp", z47.c_emp, z47.c_emp >= z316.c_emp);
    c.check("power_drift", bad.drift, !bad.stable);
    let mut bad = bad;
    bad.notes.push("deliberately failing pair".into());
    Ok((c, vec![z316, z47, bad]))
}

fn theorem_ratios(seed: u64) -> Result<(CriterionResult, Vec<VerificationReport>)> {
    let mut c = CriterionResult::new(10, "theorem-level ratios");
    let (g, local) = harness_setup()?;
    // Morrey norms need balls over the whole box.
    let fam = BallFamily::strided(&g, 16, grid::dyadic_radii(local.radii()[0], g.half_width()))?;
    let w = Weight::power(&g, 0.3, [0.0, 0.0])?;
    let fns = harness::test_functions(&g, seed, harness::DEFAULT_FUNCTIONS);
    let m = OperatorSpec::new(OperatorKind::Maximal, &g);
    let t9 = harness::run_case(&HarnessCase::new(CaseId::T9Strong, m, fns.clone(), w.clone(), 2.0, 8.0, fam.clone(), &g), &g)?;
    let comm = OperatorSpec::new(OperatorKind::SingularCommutator, &g)
        .with_kernel(sign_kernel(1))
        .with_symbol(function::log_abs(&g, [0.0, 0.0]));
    let t15 = harness::run_case(&HarnessCase::new(CaseId::T15, comm, fns, w, 2.0, 8.0, fam, &g), &g)?;
    for (tag, r) in [("t9", &t9), ("t15", &t15)] {
        c.check(&format!("{tag}_c_emp"), r.c_emp, r.c_emp.is_finite() && r.c_emp > 0.0);
        c.check(&format!("{tag}_spread"), r.spread, r.spread <= 1e3);
        c.require(r.stable, &format!("{tag}: Zygmund condition unstable"));
    }
    Ok((c, vec![t9, t15]))
}

/// `log|x|` rounded to a multiple of `2^-32`, so that shifts by integers are exact.
pub fn quantized_log(g: &Grid) -> GridFunction {
    let q = 2f64.powi(32);
    function::log_abs(g, [0.0, 0.0]).map(|v| (v * q).round() / q)
}

fn bmo_battery() -> Result<CriterionResult> {
    let mut c = CriterionResult::new(11, "bmo battery");
    let g = Grid::new(1, 1.0, 1.0 / 1024.0)?;
    let fam = BallFamily::dyadic(&g, 8)?;
    let b = quantized_log(&g);
    let n0 = spaces::bmo_norm(&b, &fam, &g)?.value;
    let n1 = spaces::bmo_norm(&b.shift(3.0), &fam, &g)?.value;
    c.metric("bmo", n0);
    c.check("translation_difference", (n0 - n1).abs(), n0 == n1);
    let jn = spaces::jn_lp_equivalence(&b, None, 2.0, &fam, &g)?;
    let fine = Grid::new(1, 1.0, 1.0 / 2048.0)?;
    let fine_fam = BallFamily::dyadic(&fine, 16)?;
    let jn_fine = spaces::jn_lp_equivalence(&quantized_log(&fine), None, 2.0, &fine_fam, &fine)?;
    c.check("jn_ratio", jn.ratio, jn.ratio >= 1.0);
    c.check("jn_ratio_refined", jn_fine.ratio, jn_fine.ratio >= 1.0);
    let drift = rel(jn.ratio, jn_fine.ratio);
    c.check("jn_refinement_drift", drift, drift <= 0.1);
    let ks: Vec<u32> = (1..=6).collect();
    let fit = spaces::log_growth_fit(&b, [g.spacing() / 2.0, 0.0], 1.0 / 128.0, &ks, n0, &g)?;
    c.metric("fit_slope", fit.slope);
    c.metric("fit_slope_over_bmo", fit.slope_over_bmo);
    c.check("fit_relative_residual", fit.relative_residual, fit.relative_residual <= 0.1);
    Ok(c)
}

/// Repeats the cheap criteria and compares their serialized summaries byte
/// for byte. Cross-process identity is checked by running the suite twice.
fn determinism(done: &[CriterionResult]) -> Result<CriterionResult> {
    let mut c = CriterionResult::new(12, "determinism");
    let again = [muckenhoupt()?, doubling()?, reductions()?, oracles()?, bmo_battery()?];
    let mut mismatches = 0;
    for a in &again {
        let Some(b) = done.iter().find(|d| d.index == a.index) else { continue };
        let sa = report::to_json_string(&serde_json::to_value(a)?);
        let sb = report::to_json_string(&serde_json::to_value(b)?);
        mismatches += (sa != sb) as usize;
    }
    c.check("mismatches", mismatches as f64, mismatches == 0);
    Ok(c)
}
