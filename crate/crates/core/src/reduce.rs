//! The angular-momentum law, the `u = 1/r` reduction, reduced-equation
//! residuals and the audit of imposed angular-momentum conditions.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::integrate::{quadrature, ReducedSample, ReducedTrajectory};
use crate::shapefn::ShapeExpr;
use crate::systems::{SystemClass, SystemSpec};
use crate::Real;

/// `dL^2/dtheta` as forced by the dynamics; twice the transversal profile.
pub fn angular_integrand<T: Real>(spec: &SystemSpec<T>, theta: T) -> Result<T> {
    Ok(T::lit(2.0) * spec.transversal_profile(theta)?)
}

/// The three candidate toy integrands for `dL^2/dtheta`, in the order
/// (as printed next to the law, implied by the printed transversal
/// equation, derived from the Cartesian force).
pub fn toy_integrand_readings<T: Real>(theta: T) -> Result<(T, T, T)> {
    let (s, c) = theta.sin_cos();
    if s == T::zero() || c == T::zero() {
        return Err(Error::Singular(format!("trigonometric pole at theta = {theta}")));
    }
    let (sec2, csc2) = ((c * c).recip(), (s * s).recip());
    let printed = -(sec2 - csc2);
    let from_transversal = -(sec2 + csc2);
    let tan = s / c;
    let derived = T::lit(2.0) * (csc2 / tan - tan * sec2);
    Ok((printed, from_transversal, derived))
}

fn quadrant<T: Real>(theta: T) -> Option<i64> {
    let q = theta / T::FRAC_PI_2();
    let k = q.floor();
    if q == k {
        None
    } else {
        k.to_i64()
    }
}

fn quad_tol<T: Real>() -> T {
    T::lit(1e-10).max(T::epsilon() * T::lit(64.0))
}

/// `L^2 = L0^2 + alpha(theta)` with `alpha(theta_ref) = 0`.
#[derive(Debug, Clone)]
pub struct AngularLaw<T> {
    spec: Arc<SystemSpec<T>>,
    theta_ref: T,
    l0_sq: T,
}

impl<T: Real> AngularLaw<T> {
    pub fn new(spec: Arc<SystemSpec<T>>, theta_ref: T, l0_sq: T) -> Result<Self> {
        if quadrant(theta_ref).is_none() {
            return Err(Error::InvalidInput(format!("theta_ref = {theta_ref} sits on a pole")));
        }
        Ok(AngularLaw { spec, theta_ref, l0_sq })
    }

    /// Takes `L0^2` from a trajectory: `L^2` at `theta_ref` when the orbit
    /// passes through it, otherwise `L^2 - alpha` at the first sample.
    pub fn calibrate(spec: Arc<SystemSpec<T>>, theta_ref: T, rt: &ReducedTrajectory<T>) -> Result<Self> {
        let mut law = Self::new(spec, theta_ref, T::zero())?;
        law.l0_sq = if rt.contains_theta(theta_ref) {
            rt.sample_at(theta_ref)?.l_squared()
        } else {
            let first = rt.samples().first().ok_or_else(|| Error::InvalidInput("empty reduced trajectory".into()))?;
            first.l_squared() - law.alpha(first.theta)?
        };
        Ok(law)
    }

    pub fn spec(&self) -> &SystemSpec<T> {
        &self.spec
    }

    pub fn theta_ref(&self) -> T {
        self.theta_ref
    }

    pub fn l0_sq(&self) -> T {
        self.l0_sq
    }

    pub fn integrand(&self, theta: T) -> Result<T> {
        angular_integrand(&self.spec, theta)
    }

    pub fn alpha(&self, theta: T) -> Result<T> {
        if theta == self.theta_ref {
            return Ok(T::zero());
        }
        if quadrant(theta) != quadrant(self.theta_ref) {
            let k = (theta / T::FRAC_PI_2()).round();
            return Err(Error::Pole { at: (k * T::FRAC_PI_2()).as_f64() });
        }
        quadrature(|th| self.integrand(th), self.theta_ref, theta, quad_tol())
    }

    pub fn l_sq(&self, theta: T) -> Result<T> {
        Ok(self.l0_sq + self.alpha(theta)?)
    }
}

/// Max and RMS of a residual series.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResidualStats<T> {
    pub max: T,
    pub rms: T,
}

impl<T: Real> ResidualStats<T> {
    pub fn of(values: &[T]) -> Self {
        let mut max = T::zero();
        let mut sum = T::zero();
        for v in values {
            max = max.max(v.abs());
            sum = sum + *v * *v;
        }
        let n = T::lit(values.len().max(1) as f64);
        ResidualStats { max, rms: (sum / n).sqrt() }
    }
}

#[derive(Debug, Clone)]
pub struct AngularLawCheck<T> {
    pub thetas: Vec<T>,
    /// `L^2 - L0^2 - alpha` at each sample.
    pub residuals: Vec<T>,
    pub stats: ResidualStats<T>,
}

/// Compares measured `L^2` with the law at every sample of `rt`.
pub fn check_angular_law<T: Real>(law: &AngularLaw<T>, rt: &ReducedTrajectory<T>) -> Result<AngularLawCheck<T>> {
    let mut thetas = Vec::with_capacity(rt.len());
    let mut residuals = Vec::with_capacity(rt.len());
    for s in rt.samples() {
        thetas.push(s.theta);
        residuals.push(s.l_squared() - law.l_sq(s.theta)?);
    }
    let stats = ResidualStats::of(&residuals);
    Ok(AngularLawCheck { thetas, residuals, stats })
}

/// Which second-order equation in `u(theta)` to test.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ReducedForm {
    /// `u'' + alpha'/(2 L^2) u' + (1 + F/L^2) u = 0`, exact for the dynamics.
    DerivedFull,
    /// `u'' + omega^2 u = 0` with the printed `omega^2`.
    Paper2_4,
    /// `u1'' + 2 u1 = 0` for the Kepler-Ermakov and generalized classes.
    Paper2_6Or2_9,
    /// `u1'' + 2 u1 = 0` for the toy class.
    Paper2_13,
}

impl ReducedForm {
    pub const ALL: [ReducedForm; 4] =
        [ReducedForm::DerivedFull, ReducedForm::Paper2_4, ReducedForm::Paper2_6Or2_9, ReducedForm::Paper2_13];

    pub fn name(self) -> &'static str {
        match self {
            ReducedForm::DerivedFull => "derived_full",
            ReducedForm::Paper2_4 => "paper_2_4",
            ReducedForm::Paper2_6Or2_9 => "paper_2_6_or_2_9",
            ReducedForm::Paper2_13 => "paper_2_13",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|f| f.name() == name)
    }
}

impl fmt::Display for ReducedForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Fails unless `w` is identically zero and `C = 0`.
pub fn check_reduction_preconditions<T: Real>(spec: &SystemSpec<T>) -> Result<()> {
    if !spec.w().is_identically_zero() {
        return Err(Error::Precondition(format!("the reduction needs w = 0, got w = {}", spec.w())));
    }
    if spec.c() != T::zero() {
        return Err(Error::Precondition(format!("the reduction needs C = 0, got C = {}", spec.c())));
    }
    Ok(())
}

/// The radial brace as printed in the frequency of the reduced equation.
fn printed_brace<T: Real>(spec: &SystemSpec<T>, theta: T) -> Result<T> {
    let (s, c) = theta.sin_cos();
    let tan = s / c;
    Ok(match spec.class() {
        SystemClass::Toy => {
            let k = tan + tan.recip();
            k * k
        }
        _ => spec.f().eval(tan)? / (c * c) + spec.g().eval(tan)? / (s * s),
    })
}

/// `(damping, stiffness)` of `form` at `theta`.
pub fn reduced_coeffs<T: Real>(law: &AngularLaw<T>, form: ReducedForm, theta: T) -> Result<(T, T)> {
    let spec = law.spec();
    check_reduction_preconditions(spec)?;
    let l_sq = law.l_sq(theta)?;
    if !(l_sq > T::zero()) {
        return Err(Error::NonPositiveLSquared { theta: theta.as_f64(), l_sq: l_sq.as_f64() });
    }
    let out = match form {
        ReducedForm::DerivedFull => {
            let damping = law.integrand(theta)? / (T::lit(2.0) * l_sq);
            (damping, T::one() + spec.radial_profile(theta)? / l_sq)
        }
        ReducedForm::Paper2_4 => {
            let mut stiffness = T::one() + printed_brace(spec, theta)? / l_sq;
            if spec.class() == SystemClass::KeplerErmakov {
                let (s, c) = theta.sin_cos();
                stiffness = stiffness + spec.h().eval(c / s)? / s;
            }
            (T::zero(), stiffness)
        }
        ReducedForm::Paper2_6Or2_9 | ReducedForm::Paper2_13 => (T::zero(), T::lit(2.0)),
    };
    if !(out.0.is_finite() && out.1.is_finite()) {
        return Err(Error::Pole { at: theta.as_f64() });
    }
    Ok(out)
}

#[derive(Debug, Clone)]
pub struct ReducedResidual<T> {
    pub form: ReducedForm,
    pub thetas: Vec<T>,
    /// `u'' + damping u' + stiffness u` at each sample.
    pub residuals: Vec<T>,
    pub stats: ResidualStats<T>,
    /// `|du2/dtheta|` for `u2 = L0^2`; zero by construction.
    pub u2_residual: T,
}

fn residual_at<T: Real>(law: &AngularLaw<T>, form: ReducedForm, s: &ReducedSample<T>) -> Result<T> {
    let (damping, stiffness) = reduced_coeffs(law, form, s.theta)?;
    Ok(s.u_thetatheta + damping * s.u_theta + stiffness * s.u)
}

/// Pointwise residual of `form` along the samples of `rt`.
pub fn reduced_residual<T: Real>(
    law: &AngularLaw<T>,
    rt: &ReducedTrajectory<T>,
    form: ReducedForm,
) -> Result<ReducedResidual<T>> {
    let mut thetas = Vec::with_capacity(rt.len());
    let mut residuals = Vec::with_capacity(rt.len());
    for s in rt.samples() {
        thetas.push(s.theta);
        residuals.push(residual_at(law, form, s)?);
    }
    let stats = ResidualStats::of(&residuals);
    Ok(ReducedResidual { form, thetas, residuals, stats, u2_residual: T::zero() })
}

/// An angular-momentum profile imposed on the dynamics.
#[derive(Debug, Clone, PartialEq)]
pub enum Condition {
    /// `1/L = sin(theta) cos(theta)`.
    Eq2_5,
    /// `L = tan(theta) + cot(theta)`.
    ToyL,
    /// `L^2` as an expression in `t`, read as the angle.
    CustomLSquared(ShapeExpr),
}

impl Condition {
    pub fn name(&self) -> &'static str {
        match self {
            Condition::Eq2_5 => "eq_2_5",
            Condition::ToyL => "toy_L",
            Condition::CustomLSquared(_) => "custom",
        }
    }

    /// The imposed `L^2(theta)`.
    pub fn l_squared_expr(&self) -> ShapeExpr {
        let text = match self {
            Condition::Eq2_5 => "1/(sin(t)*cos(t))^2",
            Condition::ToyL => "(tan(t) + 1/tan(t))^2",
            Condition::CustomLSquared(e) => return e.clone(),
        };
        ShapeExpr::parse(text).expect("built-in condition parses")
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AuditSample<T> {
    pub theta: T,
    pub l_sq: T,
    pub dl_sq: T,
    pub integrand: T,
    /// `dl_sq - integrand`.
    pub defect: T,
}

/// Defect between the angle derivative of the imposed `L^2` and the
/// `dL^2/dtheta` the dynamics force, at each of `thetas`.
pub fn condition_audit<T: Real>(
    spec: &SystemSpec<T>,
    condition: &Condition,
    thetas: &[T],
) -> Result<Vec<AuditSample<T>>> {
    let l_sq = condition.l_squared_expr();
    let dl_sq = l_sq.deriv();
    thetas
        .iter()
        .map(|&theta| {
            let integrand = angular_integrand(spec, theta)?;
            let d = dl_sq.eval(theta)?;
            Ok(AuditSample { theta, l_sq: l_sq.eval(theta)?, dl_sq: d, integrand, defect: d - integrand })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_3, FRAC_PI_4, FRAC_PI_6};

    fn e(t: &str) -> ShapeExpr {
        ShapeExpr::parse(t).unwrap()
    }

    fn toy() -> Arc<SystemSpec<f64>> {
        Arc::new(SystemSpec::toy(e("0")))
    }

    fn gen(f: &str, g: &str) -> Arc<SystemSpec<f64>> {
        Arc::new(SystemSpec::generalized(e(f), e(g), e("0")))
    }

    #[test]
    fn integrand_examples() {
        let ke = SystemSpec::kepler_ermakov(e("1"), e("1"), e("0"), 0.0, e("0"));
        let v = angular_integrand(&ke, FRAC_PI_6).unwrap();
        let s3 = 3f64.sqrt();
        assert!((v - (8.0 * s3 - 8.0 * s3 / 9.0)).abs() < 1e-12);
        assert!(angular_integrand(&*toy(), FRAC_PI_4).unwrap().abs() < 1e-14);
        let spec = gen("s", "s^3");
        for k in 1..50 {
            let th = 0.03 * k as f64;
            assert!(angular_integrand(&*spec, th).unwrap().abs() < 1e-9 * (1.0 + th.tan().powi(3)));
        }
    }

    #[test]
    fn alpha_closed_forms() {
        let law = AngularLaw::new(toy(), FRAC_PI_4, 0.0).unwrap();
        assert!((law.alpha(FRAC_PI_6).unwrap() + 4.0 / 3.0).abs() < 1e-10);
        assert_eq!(law.alpha(FRAC_PI_4).unwrap(), 0.0);
        let law = AngularLaw::new(gen("1", "1"), FRAC_PI_4, 0.0).unwrap();
        let s3 = 3f64.sqrt();
        assert!((law.alpha(FRAC_PI_3).unwrap() - (4.0 - 2.0 * (s3 + 1.0 / s3))).abs() < 1e-10);
    }

    #[test]
    fn alpha_refuses_to_cross_a_pole() {
        let law = AngularLaw::new(toy(), FRAC_PI_4, 0.0).unwrap();
        assert!(matches!(law.alpha(2.0), Err(Error::Pole { .. })));
        assert!(AngularLaw::new(toy(), 0.0, 0.0).is_err());
    }

    #[test]
    fn alpha_is_an_antiderivative() {
        let law = AngularLaw::new(gen("1 + s", "2"), FRAC_PI_4, 0.0).unwrap();
        for th in [0.3, 0.6, 0.9, 1.2] {
            // five-point stencil
            let h = 2e-3;
            let a = |k: f64| law.alpha(th + k * h).unwrap();
            let d = (a(-2.0) - 8.0 * a(-1.0) + 8.0 * a(1.0) - a(2.0)) / (12.0 * h);
            let want = law.integrand(th).unwrap();
            assert!((d - want).abs() < 1e-8 * (1.0 + want.abs()), "{th}: {d} vs {want}");
        }
    }

    #[test]
    fn toy_readings_disagree() {
        let (printed, from_tr, derived) = toy_integrand_readings(FRAC_PI_6).unwrap();
        let (sec2, csc2) = (4.0 / 3.0, 4.0);
        assert!((printed - (csc2 - sec2)).abs() < 1e-12);
        assert!((from_tr + sec2 + csc2).abs() < 1e-12);
        // -(tan^2 + cot^2)' = -2 tan sec^2 + 2 cot csc^2
        let s3 = 3f64.sqrt();
        assert!((derived - (-2.0 / s3 * sec2 + 2.0 * s3 * csc2)).abs() < 1e-12);
    }

    #[test]
    fn preconditions() {
        let law = AngularLaw::new(Arc::new(SystemSpec::toy(e("1"))), FRAC_PI_4, 4.0).unwrap();
        assert!(matches!(reduced_coeffs(&law, ReducedForm::DerivedFull, 0.5), Err(Error::Precondition(_))));
        let ke = SystemSpec::kepler_ermakov(e("1"), e("1"), e("1"), 1.0, e("0"));
        let law = AngularLaw::new(Arc::new(ke), FRAC_PI_4, 4.0).unwrap();
        assert!(matches!(reduced_coeffs(&law, ReducedForm::Paper2_4, 0.5), Err(Error::Precondition(_))));
        let law = AngularLaw::new(toy(), FRAC_PI_4, -1.0).unwrap();
        assert!(matches!(reduced_coeffs(&law, ReducedForm::DerivedFull, 0.5), Err(Error::NonPositiveLSquared { .. })));
    }

    #[test]
    fn coefficient_examples() {
        let law = AngularLaw::new(toy(), FRAC_PI_4, 4.0).unwrap();
        let (d, k) = reduced_coeffs(&law, ReducedForm::DerivedFull, FRAC_PI_4).unwrap();
        // F = 4 at pi/4, L^2 = 4
        assert!(d.abs() < 1e-14 && (k - 2.0).abs() < 1e-14);
        let (d, k) = reduced_coeffs(&law, ReducedForm::Paper2_13, 1.0).unwrap();
        assert_eq!((d, k), (0.0, 2.0));
        let spec = gen("1", "1");
        let s3 = 3f64.sqrt();
        assert!((spec.radial_profile(FRAC_PI_6).unwrap() - 8.0 / s3).abs() < 1e-12);
        let law = AngularLaw::new(spec, FRAC_PI_4, 10.0).unwrap();
        let l_sq = law.l_sq(FRAC_PI_6).unwrap();
        let (_, k) = reduced_coeffs(&law, ReducedForm::Paper2_4, FRAC_PI_6).unwrap();
        assert!((k - (1.0 + 16.0 / 3.0 / l_sq)).abs() < 1e-12);
    }

    #[test]
    fn stiffness_under_toy_condition_is_two() {
        let spec = SystemSpec::toy(e("0"));
        let mut state = 0x2545_f491_4f6c_dd1du64;
        for _ in 0..100 {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            let u = (state >> 11) as f64 / (1u64 << 53) as f64;
            let th = 0.05 + u * (std::f64::consts::FRAC_PI_2 - 0.1);
            let k = th.tan() + 1.0 / th.tan();
            let stiffness = 1.0 + spec.radial_profile(th).unwrap() / (k * k);
            assert!((stiffness - 2.0).abs() < 1e-13, "{th}: {stiffness}");
        }
    }

    #[test]
    fn audit_examples() {
        let spec = SystemSpec::toy(e("0"));
        let out = condition_audit(&spec, &Condition::ToyL, &[FRAC_PI_4, FRAC_PI_6]).unwrap();
        assert!(out[0].defect.abs() < 1e-12);
        let oracle = -128.0 * 3f64.sqrt() / 9.0;
        assert!((out[1].defect - oracle).abs() < 1e-9, "{}", out[1].defect);

        let ke = SystemSpec::kepler_ermakov(e("s/(1+s^2)"), e("s/(1+s^2)"), e("0"), 0.0, e("0"));
        let sweep: Vec<f64> = (0..=10).map(|k| FRAC_PI_6 + k as f64 * (FRAC_PI_3 - FRAC_PI_6) / 10.0).collect();
        let out = condition_audit(&ke, &Condition::Eq2_5, &sweep).unwrap();
        assert!(out.iter().any(|a| a.defect.abs() > 1e-3));
    }

    #[test]
    fn audit_vanishes_for_the_true_law() {
        let spec = SystemSpec::toy(e("0"));
        let grid: Vec<f64> = (1..40).map(|k| k as f64 * 0.039).collect();
        let exact = Condition::CustomLSquared(e("7 + 2 - tan(t)^2 - 1/tan(t)^2"));
        for a in condition_audit(&spec, &exact, &grid).unwrap() {
            assert!(a.defect.abs() < 1e-10 * (1.0 + a.integrand.abs()), "{a:?}");
        }
        let off = Condition::CustomLSquared(e("9 - tan(t)^2 - 1/tan(t)^2 + 0.01*t"));
        for a in condition_audit(&spec, &off, &grid).unwrap() {
            assert!((a.defect - 0.01).abs() < 1e-9 * (1.0 + a.integrand.abs()));
        }
    }
}
