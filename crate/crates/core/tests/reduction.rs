use std::f64::consts::FRAC_PI_4;
use std::sync::Arc;

use ermakov_core::integrate::{integrate_cart, resample_by_theta, ReducedTrajectory};
use ermakov_core::reduce::{check_angular_law, condition_audit, reduced_residual, AngularLaw, Condition, ReducedForm};
use ermakov_core::shapefn::ShapeExpr;
use ermakov_core::systems::{CartState, SystemSpec};
use ermakov_core::Error;
use proptest::prelude::*;

fn e(t: &str) -> ShapeExpr {
    ShapeExpr::parse(t).unwrap()
}

const RTOL: f64 = 1e-12;

fn reduce(spec: SystemSpec<f64>, t_end: f64, n: usize) -> (Arc<SystemSpec<f64>>, ReducedTrajectory<f64>) {
    let spec = Arc::new(spec);
    let ic = CartState::new(0.0, 1.0, 2.0, 0.3, -0.1);
    let tr = integrate_cart(spec.clone(), ic, t_end, RTOL, 1e-13).unwrap();
    (spec, resample_by_theta(Arc::new(tr), n).unwrap())
}

#[test]
fn derived_reduction_is_an_identity_for_every_class() {
    let cases = [
        SystemSpec::toy(e("0")),
        SystemSpec::generalized(e("1"), e("1"), e("0")),
        SystemSpec::generalized(e("1 + s"), e("2 - s/(1 + s^2)"), e("0")),
        SystemSpec::kepler_ermakov(e("1"), e("1"), e("1"), 0.0, e("0")),
        SystemSpec::kepler_ermakov(e("s"), e("1/s"), e("s^2"), 0.0, e("0")),
    ];
    for spec in cases {
        let (spec, rt) = reduce(spec, 2.0, 200);
        let law = AngularLaw::calibrate(spec.clone(), FRAC_PI_4, &rt).unwrap();
        let res = reduced_residual(&law, &rt, ReducedForm::DerivedFull).unwrap();
        assert!(res.stats.max < 1e2 * RTOL, "{}: {:e}", spec.class(), res.stats.max);
        assert_eq!(res.u2_residual, 0.0);
        let check = check_angular_law(&law, &rt).unwrap();
        assert!(check.stats.max < 1e-7, "{}: {:e}", spec.class(), check.stats.max);
    }
}

#[test]
fn printed_forms_fail_on_true_orbits() {
    let (spec, rt) = reduce(SystemSpec::generalized(e("1"), e("1"), e("0")), 3.0, 200);
    let law = AngularLaw::calibrate(spec, FRAC_PI_4, &rt).unwrap();
    for form in [ReducedForm::Paper2_4, ReducedForm::Paper2_6Or2_9] {
        let res = reduced_residual(&law, &rt, form).unwrap();
        assert!(res.stats.max > 1e-2, "{form}: {:e}", res.stats.max);
    }
    let (spec, rt) = reduce(SystemSpec::toy(e("0")), 2.0, 200);
    let law = AngularLaw::calibrate(spec, FRAC_PI_4, &rt).unwrap();
    let res = reduced_residual(&law, &rt, ReducedForm::Paper2_13).unwrap();
    assert!(res.stats.max > 0.1);
}

#[test]
fn cancellation_case_keeps_angular_momentum_constant() {
    let (spec, rt) = reduce(SystemSpec::generalized(e("s"), e("s^3"), e("0")), 2.0, 100);
    let law = AngularLaw::calibrate(spec, FRAC_PI_4, &rt).unwrap();
    let l0 = rt.samples()[0].l_squared();
    for s in rt.samples() {
        assert!(law.alpha(s.theta).unwrap().abs() < 1e-9);
        assert!((s.l_squared() - l0).abs() < 1e-9);
    }
}

#[test]
fn radial_force_leaves_the_angular_law_alone() {
    let spec = SystemSpec::kepler_ermakov(e("1"), e("1"), e("1"), 1.0, e("0"));
    let (spec, rt) = reduce(spec, 2.0, 200);
    let law = AngularLaw::calibrate(spec.clone(), FRAC_PI_4, &rt).unwrap();
    assert!(check_angular_law(&law, &rt).unwrap().stats.max < 1e-7);
    let err = reduced_residual(&law, &rt, ReducedForm::DerivedFull).unwrap_err();
    assert!(matches!(err, Error::Precondition(_)));
}

#[test]
fn law_and_invariant_are_the_same_first_integral() {
    // L^2 - alpha and L^2 + Phi are both constant, so Phi + alpha is too.
    let specs = [
        SystemSpec::toy(e("0")),
        SystemSpec::generalized(e("1 + s"), e("2"), e("0")),
        SystemSpec::kepler_ermakov(e("1"), e("s"), e("0"), 0.0, e("0")),
    ];
    for spec in specs {
        let (spec, rt) = reduce(spec, 2.0, 100);
        let law = AngularLaw::calibrate(spec.clone(), FRAC_PI_4, &rt).unwrap();
        let vals: Vec<f64> =
            rt.samples().iter().map(|s| spec.phi(s.theta.tan()).unwrap() + law.alpha(s.theta).unwrap()).collect();
        let range = vals.iter().cloned().fold(f64::MIN, f64::max) - vals.iter().cloned().fold(f64::MAX, f64::min);
        assert!(range < 1e-7, "{}: {range:e}", spec.class());
    }
}

#[test]
fn diagonal_toy_orbit_cannot_be_reduced() {
    let spec = Arc::new(SystemSpec::<f64>::toy(e("0")));
    let tr = integrate_cart(spec, CartState::new(0.0, 1.0, 1.0, 0.0, 0.0), 3.0, RTOL, 1e-13).unwrap();
    assert!(matches!(resample_by_theta(Arc::new(tr), 50), Err(Error::TurningPoint { .. })));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    /// The audit vanishes exactly for profiles differing from the true law
    /// by a constant, and not for a perturbed one.
    #[test]
    fn audit_soundness(shift in -5.0f64..5.0, bump in 0.05f64..2.0, a in 0.5f64..2.0) {
        let spec = SystemSpec::<f64>::generalized(e(&format!("{a}")), e("1"), e("0"));
        // alpha = 2 (a + 1) - 2 (a tan + cot)
        let law = format!("{shift} - 2*({a}*tan(t) + 1/tan(t))");
        let grid: Vec<f64> = (1..30).map(|k| 0.05 * k as f64).collect();
        let exact = condition_audit(&spec, &Condition::CustomLSquared(e(&law)), &grid).unwrap();
        for s in &exact {
            prop_assert!(s.defect.abs() < 1e-10 * (1.0 + s.integrand.abs()), "{s:?}");
        }
        let off = format!("{law} + {bump}*sin(t)");
        let perturbed = condition_audit(&spec, &Condition::CustomLSquared(e(&off)), &grid).unwrap();
        prop_assert!(perturbed.iter().any(|s| s.defect.abs() > 1e-3));
    }
}
