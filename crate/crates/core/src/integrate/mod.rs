//! Time integration of the Cartesian dynamics, quadrature, and resampling of
//! trajectories onto a uniform angle grid.

mod dopri;
mod quadrature;
mod resample;

use std::sync::Arc;

pub use dopri::{dopri5, DenseStep, Dopri5Options, OdeSolution, StepStats};
pub use quadrature::quadrature;
pub use resample::{resample_by_theta, ReducedSample, ReducedTrajectory};

use crate::error::{Error, Result};
use crate::systems::{CartState, SystemSpec};
use crate::Real;

/// Integration stops once `min(|x|, |y|)` falls below this.
pub const SINGULARITY_GUARD: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SingularityEvent<T> {
    pub t: T,
    pub x: T,
    pub y: T,
}

/// A Cartesian solution with dense output.
#[derive(Debug, Clone)]
pub struct Trajectory<T> {
    spec: Arc<SystemSpec<T>>,
    sol: OdeSolution<T, 4>,
    singularity: Option<SingularityEvent<T>>,
}

impl<T: Real> Trajectory<T> {
    pub fn spec(&self) -> &SystemSpec<T> {
        &self.spec
    }

    pub fn spec_arc(&self) -> &Arc<SystemSpec<T>> {
        &self.spec
    }

    pub fn solution(&self) -> &OdeSolution<T, 4> {
        &self.sol
    }

    pub fn len(&self) -> usize {
        self.sol.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sol.is_empty()
    }

    pub fn times(&self) -> &[T] {
        &self.sol.ts
    }

    pub fn node(&self, i: usize) -> CartState<T> {
        CartState::from_array(self.sol.ts[i], &self.sol.ys[i])
    }

    pub fn nodes(&self) -> impl Iterator<Item = CartState<T>> + '_ {
        (0..self.len()).map(|i| self.node(i))
    }

    /// Accelerations `(x'', y'')` stored at node `i`.
    pub fn acceleration(&self, i: usize) -> (T, T) {
        let f = &self.sol.fs[i];
        (f[2], f[3])
    }

    pub fn t_start(&self) -> T {
        self.sol.t_first()
    }

    pub fn t_end(&self) -> T {
        self.sol.t_last()
    }

    /// Dense-output state; `t` is clamped to the covered span.
    pub fn state_at(&self, t: T) -> CartState<T> {
        let t = t.max(self.t_start()).min(self.t_end());
        CartState::from_array(t, &self.sol.eval(t))
    }

    pub fn stats(&self) -> &StepStats<T> {
        &self.sol.stats
    }

    /// Set when integration ended early at a coordinate axis.
    pub fn singularity(&self) -> Option<&SingularityEvent<T>> {
        self.singularity.as_ref()
    }
}

/// Integrates `spec` from `ic` up to `t_end` with the 5(4) pair.
///
/// Approaching a coordinate axis closer than [`SINGULARITY_GUARD`] ends the
/// run early; the returned trajectory then carries a [`SingularityEvent`].
pub fn integrate_cart<T: Real>(
    spec: Arc<SystemSpec<T>>,
    ic: CartState<T>,
    t_end: T,
    rtol: T,
    atol: T,
) -> Result<Trajectory<T>> {
    let guard = T::lit(SINGULARITY_GUARD);
    if !(rtol > T::zero() && atol > T::zero()) {
        return Err(Error::InvalidInput("rtol and atol must be positive".into()));
    }
    if !(t_end > ic.t) {
        return Err(Error::InvalidInput("t_end must exceed the initial time".into()));
    }
    if ic.x.abs().min(ic.y.abs()) < guard {
        return Err(Error::Singular("initial condition on a coordinate axis".into()));
    }
    let opts = Dopri5Options::new(rtol, atol);
    let rhs = |t: T, y: &[T; 4]| -> Result<[T; 4]> {
        let (ax, ay) = spec.cart_rhs(&CartState::from_array(t, y))?;
        Ok([y[2], y[3], ax, ay])
    };
    let (sx, sy) = (ic.x.signum(), ic.y.signum());
    let mut sol = dopri5(rhs, ic.t, ic.to_array(), t_end, &opts, |_, y| {
        y[0].abs().min(y[1].abs()) < guard || y[0].signum() != sx || y[1].signum() != sy
    })?;
    let singularity = if sol.stopped { Some(locate_axis_event(&mut sol, guard, sx, sy)) } else { None };
    Ok(Trajectory { spec, sol, singularity })
}

/// Finds where the last step first came within `guard` of an axis and, if
/// the last node lies beyond an axis, drops it so every node stays in the
/// starting quadrant.
fn locate_axis_event<T: Real>(sol: &mut OdeSolution<T, 4>, guard: T, sx: T, sy: T) -> SingularityEvent<T> {
    let n = sol.len();
    let last = sol.ys[n - 1];
    let crossed = last[0].signum() != sx || last[1].signum() != sy;
    if n < 2 {
        return SingularityEvent { t: sol.t_last(), x: last[0], y: last[1] };
    }
    let step = sol.dense[n - 2];
    let inside = |y: &[T; 4]| y[0].signum() == sx && y[1].signum() == sy && y[0].abs().min(y[1].abs()) >= guard;
    let (mut lo, mut hi) = (sol.ts[n - 2], sol.ts[n - 1]);
    for _ in 0..200 {
        let mid = (lo + hi) / T::lit(2.0);
        if mid == lo || mid == hi {
            break;
        }
        if inside(&step.eval(mid)) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let y = step.eval(hi);
    if crossed {
        sol.ts.pop();
        sol.ys.pop();
        sol.fs.pop();
        sol.dense.pop();
    }
    SingularityEvent { t: hi, x: y[0], y: y[1] }
}
