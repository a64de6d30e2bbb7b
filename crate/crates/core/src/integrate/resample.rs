use std::sync::Arc;

use crate::error::{Error, Result};
use crate::systems::CartState;
use crate::Real;

use super::Trajectory;

/// Reduced variables at one angle of an orbit. `u = 1/r`; derivatives in
/// `theta` come from exact kinematic relations, not differencing.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReducedSample<T> {
    pub theta: T,
    pub t: T,
    pub state: CartState<T>,
    pub r: T,
    pub rdot: T,
    pub rddot: T,
    /// Angular momentum `r^2 theta'`.
    pub l: T,
    pub l_dot: T,
    pub u: T,
    pub u_theta: T,
    pub u_thetatheta: T,
}

impl<T: Real> ReducedSample<T> {
    pub fn l_squared(&self) -> T {
        self.l * self.l
    }

    /// `dL/dtheta = L' r^2 / L`.
    pub fn l_theta(&self) -> T {
        self.l_dot * self.r * self.r / self.l
    }
}

/// A trajectory viewed as a function of the polar angle.
#[derive(Debug, Clone)]
pub struct ReducedTrajectory<T> {
    traj: Arc<Trajectory<T>>,
    /// Continuous (unwrapped) angle at every trajectory node.
    node_theta: Vec<T>,
    samples: Vec<ReducedSample<T>>,
}

fn wrap_pi<T: Real>(a: T) -> T {
    let two_pi = T::TAU();
    let mut a = a % two_pi;
    if a > T::PI() {
        a = a - two_pi;
    } else if a <= -T::PI() {
        a = a + two_pi;
    }
    a
}

impl<T: Real> ReducedTrajectory<T> {
    pub fn trajectory(&self) -> &Arc<Trajectory<T>> {
        &self.traj
    }

    pub fn samples(&self) -> &[ReducedSample<T>] {
        &self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn thetas(&self) -> Vec<T> {
        self.samples.iter().map(|s| s.theta).collect()
    }

    /// Angles at the first and last trajectory node, in traversal order.
    pub fn theta_span(&self) -> (T, T) {
        (self.node_theta[0], *self.node_theta.last().expect("nodes"))
    }

    pub fn contains_theta(&self, theta: T) -> bool {
        let (a, b) = self.theta_span();
        theta >= a.min(b) && theta <= a.max(b)
    }

    /// Continuous angle of the dense-output state at `t` inside step `i`.
    fn theta_in_step(&self, i: usize, state: &CartState<T>) -> T {
        let base = self.node_theta[i];
        base + wrap_pi(state.y.atan2(state.x) - base)
    }

    /// Reduced variables at an arbitrary angle inside the covered span.
    pub fn sample_at(&self, theta: T) -> Result<ReducedSample<T>> {
        if !self.contains_theta(theta) {
            return Err(Error::InvalidInput(format!("theta = {theta} outside the orbit's span")));
        }
        let increasing = self.node_theta[self.node_theta.len() - 1] > self.node_theta[0];
        let idx = self.node_theta.partition_point(|&th| if increasing { th <= theta } else { th >= theta });
        let n = self.node_theta.len();
        let i = idx.saturating_sub(1).min(n - 2);
        if theta == self.node_theta[i] {
            return self.sample_node(theta, self.traj.node(i));
        }
        if theta == self.node_theta[i + 1] {
            return self.sample_node(theta, self.traj.node(i + 1));
        }
        let t = self.locate(i, theta)?;
        let state = self.traj.state_at(t);
        self.sample_node(theta, state)
    }

    /// Time in step `i` at which the orbit crosses `theta`. Safeguarded
    /// Newton iteration on the dense output, `theta' = L / r^2`.
    fn locate(&self, i: usize, theta: T) -> Result<T> {
        let ts = self.traj.times();
        let (mut lo, mut hi) = (ts[i], ts[i + 1]);
        let (th_lo, th_hi) = (self.node_theta[i], self.node_theta[i + 1]);
        let increasing = th_hi > th_lo;
        let g = |t: T| {
            let s = self.traj.state_at(t);
            (self.theta_in_step(i, &s) - theta, s)
        };
        let mut t = lo + (hi - lo) * (theta - th_lo) / (th_hi - th_lo);
        let tol = T::lit(4.0) * T::epsilon() * theta.abs().max(T::one());
        let mut best = (T::infinity(), t);
        for _ in 0..100 {
            let (val, s) = g(t);
            if val.abs() < best.0 {
                best = (val.abs(), t);
            }
            if val.abs() <= tol {
                return Ok(t);
            }
            if (val < T::zero()) == increasing {
                lo = t;
            } else {
                hi = t;
            }
            let r2 = s.x * s.x + s.y * s.y;
            let rate = s.angular_momentum() / r2;
            let newton = t - val / rate;
            t = if rate != T::zero() && newton > lo && newton < hi { newton } else { (lo + hi) / T::lit(2.0) };
            if hi - lo <= T::lit(4.0) * T::epsilon() * hi.abs().max(T::one()) {
                break;
            }
        }
        if best.0 <= T::lit(1e-12) {
            Ok(best.1)
        } else {
            Err(Error::RootFinding { theta: theta.as_f64() })
        }
    }

    fn sample_node(&self, theta: T, state: CartState<T>) -> Result<ReducedSample<T>> {
        build_sample(&self.traj, theta, state)
    }
}

fn build_sample<T: Real>(traj: &Trajectory<T>, theta: T, state: CartState<T>) -> Result<ReducedSample<T>> {
    let (ax, ay) = traj.spec().cart_rhs(&state)?;
    let (x, y, vx, vy) = (state.x, state.y, state.vx, state.vy);
    let r = state.radius();
    let rdot = (x * vx + y * vy) / r;
    // r r'' + r'^2 = v^2 + x x'' + y y''
    let rddot = (vx * vx + vy * vy + x * ax + y * ay - rdot * rdot) / r;
    let l = state.angular_momentum();
    let l_dot = x * ay - y * ax;
    let u = r.recip();
    let u_theta = -rdot / l;
    let u_thetatheta = -(rddot + l_dot * u_theta) / (l * l * u * u);
    Ok(ReducedSample { theta, t: state.t, state, r, rdot, rddot, l, l_dot, u, u_theta, u_thetatheta })
}

/// Samples `traj` on `n` equally spaced angles between its endpoint angles.
///
/// Fails with [`Error::TurningPoint`] when the angular momentum vanishes or
/// changes sign at any node.
pub fn resample_by_theta<T: Real>(traj: Arc<Trajectory<T>>, n: usize) -> Result<ReducedTrajectory<T>> {
    if n < 8 {
        return Err(Error::InvalidInput(format!("need at least 8 angle samples, got {n}")));
    }
    if traj.len() < 2 {
        return Err(Error::InvalidInput("trajectory has a single node".into()));
    }
    let first = traj.node(0);
    let sign = first.angular_momentum().signum();
    let mut node_theta = Vec::with_capacity(traj.len());
    let mut prev = first.y.atan2(first.x);
    for (i, s) in traj.nodes().enumerate() {
        let l = s.angular_momentum();
        if l == T::zero() || l.signum() != sign {
            return Err(Error::TurningPoint { t: s.t.as_f64() });
        }
        let th = if i == 0 { prev } else { prev + wrap_pi(s.y.atan2(s.x) - prev) };
        if i > 0 && (th - prev).signum() != sign {
            return Err(Error::TurningPoint { t: s.t.as_f64() });
        }
        node_theta.push(th);
        prev = th;
    }
    let mut rt = ReducedTrajectory { traj, node_theta, samples: Vec::with_capacity(n) };
    let (a, b) = rt.theta_span();
    let last = n - 1;
    for k in 0..n {
        let theta = if k == last { b } else { a + (b - a) * T::lit(k as f64) / T::lit(last as f64) };
        let sample = rt.sample_at(theta)?;
        rt.samples.push(sample);
    }
    Ok(rt)
}
