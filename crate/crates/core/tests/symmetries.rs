use std::f64::consts::FRAC_PI_4;
use std::sync::Arc;

use ermakov_core::integrate::{integrate_cart, resample_by_theta};
use ermakov_core::reduce::AngularLaw;
use ermakov_core::shapefn::ShapeExpr;
use ermakov_core::symexpr::{catalog, parse_generator, Coefficient, ExactScalar, GeneratorSym, Monomial, SymExpr};
use ermakov_core::symflow::{
    corrupted_forms, dt_dtheta_crosscheck, flow_map, induced_original_variables, negative_control, real_forms,
    time_translation_is_symmetry, verify_solution_mapping, GeneratorNum, ReferenceSolution,
};
use ermakov_core::systems::{CartState, SystemSpec};
use proptest::prelude::*;

fn scalar() -> impl Strategy<Value = ExactScalar> {
    (-3i64..4, -3i64..4, -3i64..4, -3i64..4).prop_map(|(a, b, c, d)| ExactScalar::from_i64s(a, b, c, d))
}

fn monomial() -> impl Strategy<Value = Monomial> {
    (scalar(), 0u8..3, 0u8..2).prop_map(|(l, a, b)| Monomial::new(l, vec![a], vec![b]))
}

fn expr() -> impl Strategy<Value = SymExpr> {
    prop::collection::vec((scalar(), monomial()), 0..4)
        .prop_map(|terms| terms.into_iter().fold(SymExpr::zero(), |acc, (c, m)| &acc + &SymExpr::term(c, m)))
}

fn generator() -> impl Strategy<Value = GeneratorSym> {
    (expr(), expr(), expr()).prop_map(|(xi, eta1, eta2)| GeneratorSym { xi, eta1, eta2 })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn residual_is_additive(g in generator(), h in generator()) {
        let sum = (&g + &h).symmetry_residual();
        let (rg, rh) = (g.symmetry_residual(), h.symmetry_residual());
        prop_assert_eq!(sum.r1, &rg.r1 + &rh.r1);
        prop_assert_eq!(sum.r2, &rg.r2 + &rh.r2);
    }

    #[test]
    fn residual_commutes_with_conjugation(g in generator()) {
        prop_assert_eq!(g.conj().symmetry_residual(), g.symmetry_residual().conj());
    }
}

#[test]
fn corrected_catalog_is_closed_under_the_check() {
    let gens = catalog(Coefficient::Corrected);
    for (_, a) in &gens {
        for (_, b) in &gens {
            assert!((a + b).symmetry_residual().is_zero());
        }
    }
    let printed = parse_generator("exp(sqrt2*i*th)*(u1*d_th + i*u1^2*d_u1)").unwrap();
    assert!(!printed.symmetry_residual().is_zero());
}

#[test]
fn flow_group_law() {
    for g in real_forms::<f64>(Coefficient::Corrected) {
        let p = [0.3, 0.8, 1.5];
        let a = flow_map(&g, flow_map(&g, p, 0.04).unwrap(), 0.06).unwrap();
        let b = flow_map(&g, p, 0.1).unwrap();
        let back = flow_map(&g, b, -0.1).unwrap();
        for k in 0..3 {
            assert!((a[k] - b[k]).abs() < 1e-9, "{}", g.label());
            assert!((back[k] - p[k]).abs() < 1e-9, "{}", g.label());
        }
        assert_eq!(flow_map(&g, p, 0.0).unwrap(), p);
    }
}

#[test]
fn mapping_separates_symmetries_from_corruptions() {
    let reference = ReferenceSolution::default();
    for eps in [0.01, 0.1] {
        for g in real_forms::<f64>(Coefficient::Corrected) {
            let c = verify_solution_mapping(&g, eps, 1e-6, &reference).unwrap();
            assert!(c.passed, "{} at {eps}: {:e}", g.label(), c.max_defect);
        }
        for g in corrupted_forms::<f64>() {
            let c = verify_solution_mapping(&g, eps, 1e-6, &reference).unwrap();
            assert!(!c.passed, "{} at {eps}: {:e}", g.label(), c.max_defect);
        }
        let c = verify_solution_mapping(&negative_control::<f64>(), eps, 1e-6, &reference).unwrap();
        assert!(!c.passed);
    }
    let c = verify_solution_mapping(&negative_control::<f64>(), 0.1, 1e-6, &reference).unwrap();
    assert!(c.max_defect > 1e-2);
}

fn orbit() -> (Arc<SystemSpec<f64>>, ermakov_core::integrate::ReducedTrajectory<f64>) {
    let spec = Arc::new(SystemSpec::<f64>::toy(ShapeExpr::parse("0").unwrap()));
    let tr = integrate_cart(spec.clone(), CartState::new(0.0, 1.0, 2.0, 0.3, -0.1), 2.0, 1e-12, 1e-13).unwrap();
    (spec, resample_by_theta(Arc::new(tr), 60).unwrap())
}

#[test]
fn pullback_examples() {
    let (spec, rt) = orbit();
    let law = AngularLaw::calibrate(spec, FRAC_PI_4, &rt).unwrap();
    let forms = real_forms::<f64>(Coefficient::Corrected);

    let g3 = induced_original_variables(&forms[2], &rt, &law).unwrap();
    for row in &g3.rows {
        assert!((row.dr_derived + row.r).abs() < 1e-12);
        assert!((row.dr_paper + row.r.powi(-3)).abs() < 1e-12);
        assert!(row.dt_derived.is_finite());
    }

    let g2 = induced_original_variables(&forms[1], &rt, &law).unwrap();
    for (row, s) in g2.rows.iter().zip(rt.samples()) {
        let ratio = s.r * s.r / s.l;
        assert!((row.dt_derived - ratio).abs() < 1e-12);
        assert!((row.dt_paper - 1.0 / ratio).abs() < 1e-12);
        assert!(row.dr_derived == 0.0 && row.dr_paper == 0.0);
    }

    let zero = induced_original_variables(&GeneratorNum::<f64>::zero(), &rt, &law).unwrap();
    for row in &zero.rows {
        assert!(row.dt_derived == 0.0 && row.dr_derived == 0.0);
        assert!(row.dt_paper.is_nan());
    }

    assert!(dt_dtheta_crosscheck(&rt).unwrap() < 1e-7);
}

#[test]
fn time_translation_needs_constant_frequency() {
    let c = SystemSpec::<f64>::toy(ShapeExpr::parse("2").unwrap());
    let v = SystemSpec::<f64>::toy(ShapeExpr::parse("sqrt(1 + 0.5*sin(t))").unwrap());
    assert!(time_translation_is_symmetry(&c));
    assert!(!time_translation_is_symmetry(&v));

    // shifted starts give shifted solutions only in the constant case
    for (spec, expect) in [(c, true), (v, false)] {
        let spec = Arc::new(spec);
        let a = integrate_cart(spec.clone(), CartState::new(0.0, 1.0, 2.0, 0.3, -0.1), 1.0, 1e-12, 1e-13).unwrap();
        let b = integrate_cart(spec, CartState::new(0.7, 1.0, 2.0, 0.3, -0.1), 1.7, 1e-12, 1e-13).unwrap();
        let (sa, sb) = (a.state_at(1.0), b.state_at(1.7));
        assert_eq!((sa.x - sb.x).abs() < 1e-9, expect);
    }
}
