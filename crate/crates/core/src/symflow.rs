//! Numeric side of the symmetry analysis: real forms of the reduced-system
//! generators, their flows, a solution-mapping check, and the induced
//! variations of `(t, r)` along a trajectory.

use std::fmt;
use std::sync::Arc;

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::integrate::{dopri5, quadrature, Dopri5Options, ReducedSample, ReducedTrajectory};
use crate::reduce::AngularLaw;
use crate::symexpr::{self, Coefficient, GeneratorSym};
use crate::systems::{SystemClass, SystemSpec};
use crate::Real;

/// The catalog family a real generator came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Family {
    G1,
    G2,
    G3,
    G4,
    G6,
    G8,
}

impl Family {
    pub fn name(self) -> &'static str {
        match self {
            Family::G1 => "G1",
            Family::G2 => "G2",
            Family::G3 => "G3",
            Family::G4 => "G4",
            Family::G6 => "G6",
            Family::G8 => "G8",
        }
    }

    fn is_complex(self) -> bool {
        matches!(self, Family::G4 | Family::G6 | Family::G8)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Part {
    Re,
    Im,
}

impl Part {
    fn take<T: Real>(self, z: Complex<T>) -> T {
        match self {
            Part::Re => z.re,
            Part::Im => z.im,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Provenance {
    /// Real or imaginary part of the `+` member of a catalog family.
    Catalog {
        family: Family,
        part: Part,
    },
    Custom,
}

type Field<T> = dyn Fn(T, T, T) -> Result<[T; 3]> + Send + Sync;

/// A real vector field `xi d_th + eta1 d_u1 + eta2 d_u2` on `(th, u1, u2)`.
#[derive(Clone)]
pub struct GeneratorNum<T> {
    label: String,
    provenance: Provenance,
    field: Arc<Field<T>>,
}

impl<T> fmt::Debug for GeneratorNum<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("GeneratorNum")
            .field("label", &self.label)
            .field("provenance", &self.provenance)
            .finish_non_exhaustive()
    }
}

impl<T: Real> GeneratorNum<T> {
    pub fn from_fn<F>(label: impl Into<String>, f: F) -> Self
    where
        F: Fn(T, T, T) -> Result<[T; 3]> + Send + Sync + 'static,
    {
        GeneratorNum { label: label.into(), provenance: Provenance::Custom, field: Arc::new(f) }
    }

    /// Real or imaginary part of an exact generator.
    pub fn from_sym(label: impl Into<String>, g: &GeneratorSym, part: Part) -> Self {
        let g = g.clone();
        let field = move |th: T, u1: T, u2: T| {
            let out = [&g.xi, &g.eta1, &g.eta2].map(|e| part.take(e.eval_complex(th, u1, u2)));
            if out.iter().all(|v| v.is_finite()) {
                Ok(out)
            } else {
                Err(Error::FlowEscape(format!("non-finite generator at th = {th}, u1 = {u1}")))
            }
        };
        GeneratorNum { label: label.into(), provenance: Provenance::Custom, field: Arc::new(field) }
    }

    pub fn zero() -> Self {
        Self::from_fn("zero", |_, _, _| Ok([T::zero(); 3]))
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn provenance(&self) -> &Provenance {
        &self.provenance
    }

    pub fn with_provenance(mut self, p: Provenance) -> Self {
        self.provenance = p;
        self
    }

    pub fn eval(&self, theta: T, u1: T, u2: T) -> Result<[T; 3]> {
        (self.field)(theta, u1, u2)
    }
}

fn family_of(label: &str) -> Option<Family> {
    Some(match label.trim_end_matches(['+', '-']) {
        "G1" => Family::G1,
        "G2" => Family::G2,
        "G3" => Family::G3,
        "G4" => Family::G4,
        "G6" => Family::G6,
        "G8" => Family::G8,
        _ => return None,
    })
}

fn real_forms_of<T: Real>(entries: Vec<(String, GeneratorSym)>) -> Vec<GeneratorNum<T>> {
    let mut out = Vec::new();
    for (label, g) in entries {
        if label.ends_with('-') {
            continue;
        }
        let family = family_of(&label).expect("catalog label");
        let parts: &[Part] = if family.is_complex() { &[Part::Re, Part::Im] } else { &[Part::Re] };
        for &part in parts {
            let name = if family.is_complex() {
                format!("{} {label}", if part == Part::Re { "Re" } else { "Im" })
            } else {
                label.clone()
            };
            out.push(GeneratorNum::from_sym(name, &g, part).with_provenance(Provenance::Catalog { family, part }));
        }
    }
    out
}

/// The nine real generators: `G1, G2, G3` and the real and imaginary parts
/// of `G4+, G6+, G8+` (the `-` members give the same real span).
pub fn real_forms<T: Real>(coeff: Coefficient) -> Vec<GeneratorNum<T>> {
    real_forms_of(symexpr::catalog(coeff).into_iter().map(|(l, g)| (l.to_string(), g)).collect())
}

/// Real forms of `G4+, G6+, G8+` with one constant moved by 10%: the
/// exponent of `G4`, the internal coefficient of `G6` and `G8`. `G1` to
/// `G3` stay symmetries under any rescaling and have no counterpart here.
pub fn corrupted_forms<T: Real>() -> Vec<GeneratorNum<T>> {
    let texts = [
        ("G4+", "exp(1.1*sqrt2*i*th)*d_u1"),
        ("G6+", "exp(2*sqrt2*i*th)*(d_th + 1.1*sqrt2*i*u1*d_u1)"),
        ("G8+", "exp(sqrt2*i*th)*(u1*d_th + 1.1*sqrt2*i*u1^2*d_u1)"),
    ];
    let entries = texts
        .iter()
        .map(|(l, t)| (l.to_string(), symexpr::parse_generator(t).expect("corrupted text parses")))
        .collect();
    real_forms_of(entries)
        .into_iter()
        .map(|g| {
            let label = format!("{} (corrupted)", g.label);
            GeneratorNum { label, provenance: Provenance::Custom, field: g.field }
        })
        .collect()
}

/// `u1^2 d_u1`, not a symmetry of the reduced system.
pub fn negative_control<T: Real>() -> GeneratorNum<T> {
    GeneratorNum::from_fn("u1^2 d_u1", |_, u1, _| Ok([T::zero(), u1 * u1, T::zero()]))
}

const FLOW_TOL: f64 = 1e-12;

/// Moves `point = (th, u1, u2)` a parameter distance `epsilon` along `g`.
pub fn flow_map<T: Real>(g: &GeneratorNum<T>, point: [T; 3], epsilon: T) -> Result<[T; 3]> {
    if epsilon == T::zero() {
        return Ok(point);
    }
    let tol = T::lit(FLOW_TOL).max(T::epsilon() * T::lit(16.0));
    let opts = Dopri5Options::new(tol, tol);
    let rhs = |_: T, y: &[T; 3]| g.eval(y[0], y[1], y[2]);
    let sol = dopri5(rhs, T::zero(), point, epsilon, &opts, |_, _| false).map_err(|e| match e {
        Error::FlowEscape(_) => e,
        other => Error::FlowEscape(format!("{}: {other}", g.label)),
    })?;
    Ok(*sol.ys.last().expect("at least one node"))
}

/// A solution `u1 = a cos(sqrt2 th) + b sin(sqrt2 th)`, `u2` constant,
/// sampled at `n` equally spaced angles.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReferenceSolution<T> {
    pub a: T,
    pub b: T,
    pub u2: T,
    pub theta0: T,
    pub theta1: T,
    pub n: usize,
}

impl<T: Real> Default for ReferenceSolution<T> {
    fn default() -> Self {
        ReferenceSolution { a: T::one(), b: T::lit(0.5), u2: T::one(), theta0: T::zero(), theta1: T::TAU(), n: 600 }
    }
}

impl<T: Real> ReferenceSolution<T> {
    pub fn points(&self) -> Vec<[T; 3]> {
        let w = T::SQRT_2();
        (0..self.n)
            .map(|k| {
                let th = self.theta0 + (self.theta1 - self.theta0) * T::lit(k as f64) / T::lit((self.n - 1) as f64);
                [th, self.a * (w * th).cos() + self.b * (w * th).sin(), self.u2]
            })
            .collect()
    }
}

/// Finite-difference weights for derivatives `0..=m` at `z` (Fornberg).
fn fd_weights<T: Real>(z: T, x: &[T], m: usize) -> Vec<Vec<T>> {
    let n = x.len();
    let mut c = vec![vec![T::zero(); m + 1]; n];
    let mut c1 = T::one();
    let mut c4 = x[0] - z;
    c[0][0] = T::one();
    for i in 1..n {
        let mn = i.min(m);
        let mut c2 = T::one();
        let c5 = c4;
        c4 = x[i] - z;
        for j in 0..i {
            let c3 = x[i] - x[j];
            c2 = c2 * c3;
            if j == i - 1 {
                for k in (1..=mn).rev() {
                    let kk = T::lit(k as f64);
                    c[i][k] = c1 * (kk * c[i - 1][k - 1] - c5 * c[i - 1][k]) / c2;
                }
                c[i][0] = -c1 * c5 * c[i - 1][0] / c2;
            }
            for k in (1..=mn).rev() {
                let kk = T::lit(k as f64);
                c[j][k] = (c4 * c[j][k] - kk * c[j][k - 1]) / c3;
            }
            c[j][0] = c4 * c[j][0] / c3;
        }
        c1 = c2;
    }
    c
}

#[derive(Debug, Clone, PartialEq)]
pub struct MappingCheck<T> {
    pub label: String,
    pub epsilon: T,
    pub tol: T,
    /// Max of `|u1'' + 2 u1|` along the image curve.
    pub max_defect: T,
    pub u2_spread: T,
    pub passed: bool,
}

/// Maps the reference solution by `g` and measures how far the image is
/// from solving `u1'' + 2 u1 = 0`, `u2' = 0`. Second derivatives come from
/// six-point (quintic) local fits on the image's own angle grid.
pub fn verify_solution_mapping<T: Real>(
    g: &GeneratorNum<T>,
    epsilon: T,
    tol: T,
    reference: &ReferenceSolution<T>,
) -> Result<MappingCheck<T>> {
    if reference.n < 6 {
        return Err(Error::InvalidInput("reference solution needs at least 6 samples".into()));
    }
    let image = reference.points().into_iter().map(|p| flow_map(g, p, epsilon)).collect::<Result<Vec<_>>>()?;
    for w in image.windows(2) {
        if !(w[1][0] > w[0][0]) {
            return Err(Error::NotMonotone { theta: w[1][0].as_f64() });
        }
    }
    let th: Vec<T> = image.iter().map(|p| p[0]).collect();
    let n = image.len();
    let mut max_defect = T::zero();
    let (mut u2_min, mut u2_max) = (T::infinity(), T::neg_infinity());
    for i in 0..n {
        let start = i.saturating_sub(2).min(n - 6);
        let w = fd_weights(th[i], &th[start..start + 6], 2);
        let upp = (0..6).fold(T::zero(), |acc, j| acc + w[j][2] * image[start + j][1]);
        max_defect = max_defect.max((upp + T::lit(2.0) * image[i][1]).abs());
        u2_min = u2_min.min(image[i][2]);
        u2_max = u2_max.max(image[i][2]);
    }
    let u2_spread = u2_max - u2_min;
    Ok(MappingCheck {
        label: g.label.clone(),
        epsilon,
        tol,
        max_defect,
        u2_spread,
        passed: max_defect < tol && u2_spread < tol,
    })
}

/// One node of a [`PullbackReport`]. Printed columns are NaN where the
/// generator has no printed counterpart.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PullbackRow<T> {
    pub theta: T,
    pub t: T,
    pub r: T,
    pub dt_derived: T,
    pub dr_derived: T,
    pub dt_paper: T,
    pub dr_paper: T,
    pub mismatch_dt: T,
    pub mismatch_dr: T,
}

#[derive(Debug, Clone)]
pub struct PullbackReport<T> {
    pub label: String,
    pub rows: Vec<PullbackRow<T>>,
    /// Max `|mismatch|` over nodes with a printed value, NaN if none.
    pub max_mismatch_dt: T,
    pub max_mismatch_dr: T,
}

impl<T: Real> PullbackReport<T> {
    pub const CSV_HEADER: &'static str = "theta,t,r,dt_derived,dr_derived,dt_paper,dr_paper,mismatch_dt,mismatch_dr";
}

/// `V1`'s integral term, `int_{theta_ref}^{theta} {...} dtheta`, as printed.
fn v1_integral<T: Real>(spec: &SystemSpec<T>, theta_ref: T, theta: T) -> Result<T> {
    let integrand = |th: T| -> Result<T> {
        let (s, c) = th.sin_cos();
        let (sec2, csc2) = ((c * c).recip(), (s * s).recip());
        Ok(match spec.class() {
            SystemClass::Toy => sec2 - csc2,
            _ => {
                let tan = s / c;
                let f = spec.f().eval(tan)?;
                let g = spec.g().eval(tan)?;
                T::lit(2.0) * (sec2 * tan * f - csc2 * g / tan)
            }
        })
    };
    quadrature(integrand, theta_ref, theta, T::lit(1e-10).max(T::epsilon() * T::lit(64.0)))
}

/// `(dt, dr)` coefficients of the printed `V` matching a catalog family,
/// with the real or imaginary part taken for the complex families.
fn printed_v<T: Real>(
    family: Family,
    part: Part,
    s: &ReducedSample<T>,
    law: &AngularLaw<T>,
    spec: &SystemSpec<T>,
) -> Result<(T, T)> {
    let (r, l) = (s.r, s.l);
    let zero = T::zero();
    let phase = |k: T| Complex::new(zero, k * T::SQRT_2() * s.theta).exp();
    let (dt, dr): (Complex<T>, Complex<T>) = match family {
        Family::G1 => {
            let dt = s.l_squared() + v1_integral(spec, law.theta_ref(), s.theta)?;
            return Ok((dt, -T::lit(2.0) / r.powi(3)));
        }
        Family::G2 => return Ok((l / (r * r), zero)),
        Family::G3 => return Ok((zero, -r.powi(3).recip())),
        Family::G4 => (Complex::new(zero, zero), -phase(T::one()) / (r * r)),
        Family::G6 => {
            let e = phase(T::lit(2.0));
            (e * (l / (r * r)), e * Complex::new(zero, -T::one()) / r.powi(3))
        }
        Family::G8 => {
            let e = phase(T::one());
            (e * (l / (r * r)), e * Complex::new(zero, -T::one()) / r.powi(4))
        }
    };
    Ok((part.take(dt), part.take(dr)))
}

/// Variations `(dt, dr) / epsilon` induced on an orbit by `g`, against the
/// printed `V` fields.
///
/// `dr = -r^2 eta1` from `u1 = 1/r`. `dt` combines the angle shift,
/// `(r^2/L) xi`, with the accumulated variation of `dt = (r^2/L) dtheta`
/// from the first sample: `delta(r^2/L) = 2 r dr / L - r^2 dL / L^2` with
/// `dL = eta2 / (2L)` from `u2 = L0^2`.
pub fn induced_original_variables<T: Real>(
    g: &GeneratorNum<T>,
    rt: &ReducedTrajectory<T>,
    law: &AngularLaw<T>,
) -> Result<PullbackReport<T>> {
    let spec = rt.trajectory().spec();
    let u2 = law.l0_sq();
    let two = T::lit(2.0);
    let variation = |s: &ReducedSample<T>| -> Result<T> {
        let [_, eta1, eta2] = g.eval(s.theta, s.u, u2)?;
        let (r, l) = (s.r, s.l);
        let dr = -r * r * eta1;
        let dl = eta2 / (two * l);
        Ok(two * r * dr / l - r * r * dl / (l * l))
    };
    let tol = T::lit(1e-10).max(T::epsilon() * T::lit(64.0));
    let samples = rt.samples();
    let mut rows = Vec::with_capacity(samples.len());
    let mut accumulated = T::zero();
    let (mut max_dt, mut max_dr) = (T::nan(), T::nan());
    for (k, s) in samples.iter().enumerate() {
        if k > 0 {
            let prev = samples[k - 1].theta;
            accumulated = accumulated + quadrature(|th| variation(&rt.sample_at(th)?), prev, s.theta, tol)?;
        }
        let [xi, eta1, _] = g.eval(s.theta, s.u, u2)?;
        let (r, l) = (s.r, s.l);
        let dt_derived = xi * r * r / l + accumulated;
        let dr_derived = -r * r * eta1;
        let (dt_paper, dr_paper) = match g.provenance() {
            Provenance::Catalog { family, part } => printed_v(*family, *part, s, law, spec)?,
            Provenance::Custom => (T::nan(), T::nan()),
        };
        let (mismatch_dt, mismatch_dr) = (dt_derived - dt_paper, dr_derived - dr_paper);
        if !mismatch_dt.is_nan() {
            max_dt = if max_dt.is_nan() { mismatch_dt.abs() } else { max_dt.max(mismatch_dt.abs()) };
            max_dr = if max_dr.is_nan() { mismatch_dr.abs() } else { max_dr.max(mismatch_dr.abs()) };
        }
        rows.push(PullbackRow {
            theta: s.theta,
            t: s.t,
            r,
            dt_derived,
            dr_derived,
            dt_paper,
            dr_paper,
            mismatch_dt,
            mismatch_dr,
        });
    }
    Ok(PullbackReport { label: g.label.clone(), rows, max_mismatch_dt: max_dt, max_mismatch_dr: max_dr })
}

/// Largest difference between `r^2/L` at each sample and its value at the
/// first sample plus the quadrature of `d(r^2/L)/dtheta`.
pub fn dt_dtheta_crosscheck<T: Real>(rt: &ReducedTrajectory<T>) -> Result<T> {
    let ratio = |s: &ReducedSample<T>| s.r * s.r / s.l;
    let deriv = |s: &ReducedSample<T>| {
        let (u, l) = (s.u, s.l);
        -T::lit(2.0) * s.u_theta / (u.powi(3) * l) - s.l_theta() / (u * u * l * l)
    };
    let tol = T::lit(1e-11).max(T::epsilon() * T::lit(64.0));
    let samples = rt.samples();
    let mut acc = ratio(&samples[0]);
    let mut worst = T::zero();
    for k in 1..samples.len() {
        acc = acc + quadrature(|th| Ok(deriv(&rt.sample_at(th)?)), samples[k - 1].theta, samples[k].theta, tol)?;
        worst = worst.max((acc - ratio(&samples[k])).abs());
    }
    Ok(worst)
}

/// Time translation is a symmetry of the Cartesian system exactly when the
/// frequency is constant.
pub fn time_translation_is_symmetry<T: Real>(spec: &SystemSpec<T>) -> bool {
    spec.has_constant_frequency()
}
