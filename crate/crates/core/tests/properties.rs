//! Invariants checked on random inputs.

use proptest::prelude::*;

use rough_morrey::function::{self, GridFunction};
use rough_morrey::grid::{self, BallFamily, Grid};
use rough_morrey::harness::{self, CaseId, HarnessCase};
use rough_morrey::kernels::{KernelShape, SphereKernel};
use rough_morrey::operators::{self, CenterCell, OperatorKind, OperatorSpec};
use rough_morrey::spaces::{self, PhiModel};
use rough_morrey::weights::{self, Weight};

fn rel(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else {
        (a - b).abs() / a.abs().max(b.abs())
    }
}

fn grid() -> Grid {
    Grid::new(1, 1.0, 1.0 / 64.0).unwrap()
}

fn sign() -> SphereKernel {
    SphereKernel::library(KernelShape::Sign, 1, f64::INFINITY).unwrap()
}

fn two_bumps(g: &Grid, c1: f64, w1: f64, c2: f64, a: f64) -> GridFunction {
    function::bump(g, [c1, 0.0], w1).add(&function::bump(g, [c2, 0.0], 0.2).scale(a))
}

fn small_case(id: CaseId, op: OperatorSpec, fns: Vec<GridFunction>, w: Weight, g: &Grid) -> HarnessCase {
    let fam = BallFamily::strided(g, 8, grid::dyadic_radii(2.0 * g.spacing(), g.half_width() / 8.0)).unwrap();
    HarnessCase::new(id, op, fns, w, 2.0, 8.0, fam, g)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn morrey_norm_is_homogeneous(c in -5.0f64..5.0, x in -0.5f64..0.5, width in 0.1f64..0.6) {
        let g = grid();
        let fam = BallFamily::dyadic(&g, 4).unwrap();
        let w = Weight::power(&g, 0.3, [0.0, 0.0]).unwrap();
        let f = function::bump(&g, [x, 0.0], width);
        let phi = PhiModel::KappaWeight { kappa: 0.5 };
        let a = spaces::generalized_weighted_morrey_norm(&f.scale(c), 2.0, &phi, &w, &fam, &g, false).unwrap().value;
        let b = spaces::generalized_weighted_morrey_norm(&f, 2.0, &phi, &w, &fam, &g, false).unwrap().value;
        prop_assert!(rel(a, c.abs() * b) <= 1e-12);
    }

    #[test]
    fn weighted_morrey_scales_with_weight(c in 0.1f64..10.0, kappa in 0.0f64..1.0, x in -0.5f64..0.5) {
        let g = grid();
        let fam = BallFamily::dyadic(&g, 4).unwrap();
        let w = Weight::power(&g, 0.3, [0.0, 0.0]).unwrap();
        let f = function::bump(&g, [x, 0.0], 0.4);
        let a = spaces::weighted_morrey_norm(&f, 2.0, kappa, &w.scaled(c).unwrap(), &fam, &g, false).unwrap().value;
        let b = spaces::weighted_morrey_norm(&f, 2.0, kappa, &w, &fam, &g, false).unwrap().value;
        prop_assert!(rel(a, c.powf((1.0 - kappa) / 2.0) * b) <= 1e-10);
    }

    #[test]
    fn weak_norm_never_exceeds_strong(x in -0.8f64..0.8, width in 0.05f64..0.5, p in 1.0f64..4.0) {
        let g = grid();
        let fam = BallFamily::dyadic(&g, 4).unwrap();
        let w = Weight::power(&g, -0.4, [0.1, 0.0]).unwrap();
        let f = two_bumps(&g, x, width, -x / 2.0, 0.5);
        let s = spaces::weighted_morrey_norm(&f, p, 0.5, &w, &fam, &g, false).unwrap();
        let k = spaces::weighted_morrey_norm(&f, p, 0.5, &w, &fam, &g, true).unwrap();
        for (a, b) in s.rows.iter().zip(&k.rows) {
            prop_assert!(b.value <= a.value * (1.0 + 1e-12));
        }
    }

    #[test]
    fn bmo_ignores_constants(shift in -100.0f64..100.0, c in -3.0f64..3.0) {
        let g = grid();
        let fam = BallFamily::dyadic(&g, 4).unwrap();
        let b = function::log_abs(&g, [0.01, 0.0]);
        let n = spaces::bmo_norm(&b, &fam, &g).unwrap().value;
        let shifted = spaces::bmo_norm(&b.shift(shift), &fam, &g).unwrap().value;
        let scaled = spaces::bmo_norm(&b.scale(c), &fam, &g).unwrap().value;
        prop_assert!(rel(n, shifted) <= 1e-10);
        prop_assert!(rel(c.abs() * n, scaled) <= 1e-10);
    }

    #[test]
    fn ap_characteristic_is_at_least_one(values in prop::collection::vec(0.01f64..100.0, 128), c in 0.1f64..10.0, p in 1.2f64..5.0) {
        let g = Grid::new(1, 1.0, 1.0 / 64.0).unwrap();
        let fam = BallFamily::dyadic(&g, 4).unwrap();
        let w = Weight::from_values(&g, values).unwrap();
        let a = weights::ap_characteristic(&w, p, &fam, &g).unwrap().characteristic;
        let b = weights::ap_characteristic(&w.scaled(c).unwrap(), p, &fam, &g).unwrap().characteristic;
        prop_assert!(a >= 1.0 - 1e-12);
        prop_assert!(rel(a, b) <= 1e-10);
    }

    #[test]
    fn maximal_is_sublinear(x in -0.8f64..0.8, y in -0.8f64..0.8, a in -2.0f64..2.0) {
        let g = grid();
        let radii = grid::dyadic_radii(g.spacing(), 2.0);
        let f = function::bump(&g, [x, 0.0], 0.3);
        let h = function::bump(&g, [y, 0.0], 0.2).scale(a);
        let mf = operators::maximal(&f, &g, &radii, CenterCell::Include).unwrap();
        let mh = operators::maximal(&h, &g, &radii, CenterCell::Include).unwrap();
        let m = operators::maximal(&f.add(&h), &g, &radii, CenterCell::Include).unwrap();
        for i in 0..g.len() {
            prop_assert!(m.get(i) <= (mf.get(i) + mh.get(i)) * (1.0 + 1e-12));
        }
    }

    #[test]
    fn singular_is_linear(x in -0.8f64..0.8, a in -3.0f64..3.0, b in -3.0f64..3.0) {
        let g = grid();
        let k = sign();
        let f = function::bump(&g, [x, 0.0], 0.3);
        let h = function::indicator(&g, &grid::Ball::new([-x / 2.0, 0.0], 0.2).unwrap());
        let tf = operators::singular(&k, &f, &g).unwrap();
        let th = operators::singular(&k, &h, &g).unwrap();
        let t = operators::singular(&k, &f.scale(a).add(&h.scale(b)), &g).unwrap();
        let scale = tf.sup_norm().max(th.sup_norm()) * (a.abs() + b.abs() + 1.0);
        for i in 0..g.len() {
            prop_assert!((t.get(i) - a * tf.get(i) - b * th.get(i)).abs() <= 1e-12 * scale);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn local_ratio_is_scale_invariant(c in 0.01f64..100.0, cw in 0.1f64..10.0, x in -0.4f64..0.4) {
        let g = grid();
        let w = Weight::power(&g, 0.3, [0.0, 0.0]).unwrap();
        let f = two_bumps(&g, x, 0.3, -x, -0.7);
        let op = OperatorSpec::new(OperatorKind::Singular, &g).with_kernel(sign());
        let base = harness::lemma2_local(&small_case(CaseId::L2Strong, op.clone(), vec![f.clone()], w.clone(), &g), &g).unwrap();
        let scaled_f = harness::lemma2_local(&small_case(CaseId::L2Strong, op.clone(), vec![f.scale(c)], w.clone(), &g), &g).unwrap();
        let scaled_w = harness::lemma2_local(&small_case(CaseId::L2Strong, op, vec![f], w.scaled(cw).unwrap(), &g), &g).unwrap();
        for ((a, b), d) in base.rows.iter().zip(&scaled_f.rows).zip(&scaled_w.rows) {
            prop_assert!(rel(a.ratio, b.ratio) <= 1e-10);
            prop_assert!(rel(a.ratio, d.ratio) <= 1e-10);
        }
    }

    #[test]
    fn commutator_ratio_ignores_constant_shift(k in -20.0f64..20.0, x in -0.4f64..0.4) {
        let g = grid();
        let w = Weight::power(&g, 0.3, [0.0, 0.0]).unwrap();
        let f = two_bumps(&g, x, 0.3, -x, 0.5);
        let b = function::log_abs(&g, [0.0, 0.0]);
        let op = |b: GridFunction| OperatorSpec::new(OperatorKind::SingularCommutator, &g).with_kernel(sign()).with_symbol(b);
        let r0 = harness::lemma5_local(&small_case(CaseId::L5Strong, op(b.clone()), vec![f.clone()], w.clone(), &g), &g).unwrap();
        let r1 = harness::lemma5_local(&small_case(CaseId::L5Strong, op(b.shift(k)), vec![f], w, &g), &g).unwrap();
        for (a, c) in r0.rows.iter().zip(&r1.rows) {
            prop_assert!(rel(a.ratio, c.ratio) <= 1e-10);
        }
    }

    #[test]
    fn rhs_grows_with_t_max(x in -0.4f64..0.4, factor in 1.0f64..4.0) {
        let g = grid();
        let w = Weight::power(&g, 0.3, [0.0, 0.0]).unwrap();
        let f = two_bumps(&g, x, 0.3, -x, 1.0);
        let op = OperatorSpec::new(OperatorKind::Singular, &g).with_kernel(sign());
        let case = small_case(CaseId::L2Strong, op, vec![f], w, &g);
        let t = case.t_max;
        let a = harness::lemma2_local(&case, &g).unwrap();
        let b = harness::lemma2_local(&case.clone().with_t_max(t * factor), &g).unwrap();
        for (r, s) in a.rows.iter().zip(&b.rows) {
            prop_assert!(r.rhs_doubled >= r.rhs);
            prop_assert!(s.rhs >= r.rhs * (1.0 - 1e-12));
        }
        prop_assert!(b.c_emp <= a.c_emp * (1.0 + 1e-12));
        prop_assert!(!a.pass || b.pass || !b.stable);
    }
}
