//! Dormand-Prince 5(4) with PI step control and the fourth-order continuous
//! extension, for fixed-size systems `y' = f(t, y)` with `y: [T; N]`.

use crate::error::{Error, Result};
use crate::Real;

const C: [f64; 7] = [0.0, 0.2, 0.3, 0.8, 8.0 / 9.0, 1.0, 1.0];

const A: [[f64; 6]; 7] = [
    [0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [0.2, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];

/// Fifth minus fourth order weights.
const E: [f64; 7] =
    [71.0 / 57600.0, 0.0, -71.0 / 16695.0, 71.0 / 1920.0, -17253.0 / 339200.0, 22.0 / 525.0, -1.0 / 40.0];

const D: [f64; 7] = [
    -12715105075.0 / 11282082432.0,
    0.0,
    87487479700.0 / 32700410799.0,
    -10690763975.0 / 1880347072.0,
    701980252875.0 / 199316789632.0,
    -1453857185.0 / 822651844.0,
    69997945.0 / 29380423.0,
];

#[derive(Debug, Clone, Copy)]
pub struct Dopri5Options<T> {
    pub rtol: T,
    pub atol: T,
    pub h_init: Option<T>,
    pub h_max: Option<T>,
    pub max_steps: usize,
    pub safety: T,
    /// PI stabilization exponent.
    pub beta: T,
}

impl<T: Real> Dopri5Options<T> {
    pub fn new(rtol: T, atol: T) -> Self {
        Dopri5Options {
            rtol,
            atol,
            h_init: None,
            h_max: None,
            max_steps: 1_000_000,
            safety: T::lit(0.9),
            beta: T::lit(0.04),
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct StepStats<T> {
    pub accepted: usize,
    pub rejected: usize,
    pub rhs_evals: usize,
    pub min_step: T,
}

/// Interpolation data for one accepted step.
#[derive(Debug, Clone, Copy)]
pub struct DenseStep<T, const N: usize> {
    pub t0: T,
    pub h: T,
    cont: [[T; N]; 5],
}

impl<T: Real, const N: usize> DenseStep<T, N> {
    pub fn eval(&self, t: T) -> [T; N] {
        let s = (t - self.t0) / self.h;
        let s1 = T::one() - s;
        let c = &self.cont;
        std::array::from_fn(|i| c[0][i] + s * (c[1][i] + s1 * (c[2][i] + s * (c[3][i] + s1 * c[4][i]))))
    }
}

/// Accepted nodes plus the continuous extension between them.
#[derive(Debug, Clone)]
pub struct OdeSolution<T, const N: usize> {
    pub ts: Vec<T>,
    pub ys: Vec<[T; N]>,
    /// Right-hand side at each node.
    pub fs: Vec<[T; N]>,
    pub dense: Vec<DenseStep<T, N>>,
    pub stats: StepStats<T>,
    /// Set when the stop predicate fired at the last node.
    pub stopped: bool,
}

impl<T: Real, const N: usize> OdeSolution<T, N> {
    pub fn len(&self) -> usize {
        self.ts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ts.is_empty()
    }

    pub fn t_first(&self) -> T {
        self.ts[0]
    }

    pub fn t_last(&self) -> T {
        *self.ts.last().expect("solution has the initial node")
    }

    /// Index `i` of the step `[ts[i], ts[i+1]]` containing `t`, clamped.
    pub fn step_index(&self, t: T) -> usize {
        let n = self.ts.len();
        if n < 2 {
            return 0;
        }
        let forward = self.ts[n - 1] >= self.ts[0];
        let idx = self.ts.partition_point(|&ti| if forward { ti <= t } else { ti >= t });
        idx.saturating_sub(1).min(n - 2)
    }

    /// Dense-output state at `t`; node states are returned exactly.
    pub fn eval(&self, t: T) -> [T; N] {
        if self.ts.len() == 1 {
            return self.ys[0];
        }
        let i = self.step_index(t);
        if t == self.ts[i] {
            return self.ys[i];
        }
        if t == self.ts[i + 1] {
            return self.ys[i + 1];
        }
        self.dense[i].eval(t)
    }
}

fn wrms<T: Real, const N: usize>(v: &[T; N], y0: &[T; N], y1: &[T; N], rtol: T, atol: T) -> T {
    let mut acc = T::zero();
    for i in 0..N {
        let sc = atol + rtol * y0[i].abs().max(y1[i].abs());
        let q = v[i] / sc;
        acc = acc + q * q;
    }
    (acc / T::lit(N as f64)).sqrt()
}

fn axpy<T: Real, const N: usize>(y: &[T; N], h: T, terms: &[(f64, &[T; N])]) -> [T; N] {
    std::array::from_fn(|i| {
        let mut acc = T::zero();
        for (c, k) in terms {
            if *c != 0.0 {
                acc = acc + T::lit(*c) * k[i];
            }
        }
        y[i] + h * acc
    })
}

fn all_finite<T: Real, const N: usize>(y: &[T; N]) -> bool {
    y.iter().all(|v| v.is_finite())
}

/// Integrates from `t0` to `t_end` (either direction). `stop` is checked at
/// every accepted node; when it returns true integration ends there and the
/// solution is flagged as stopped.
pub fn dopri5<T, const N: usize, F, G>(
    mut rhs: F,
    t0: T,
    y0: [T; N],
    t_end: T,
    opts: &Dopri5Options<T>,
    mut stop: G,
) -> Result<OdeSolution<T, N>>
where
    T: Real,
    F: FnMut(T, &[T; N]) -> Result<[T; N]>,
    G: FnMut(T, &[T; N]) -> bool,
{
    if !(opts.rtol > T::zero() && opts.atol > T::zero()) {
        return Err(Error::InvalidInput("rtol and atol must be positive".into()));
    }
    if !all_finite(&y0) || !t0.is_finite() || !t_end.is_finite() {
        return Err(Error::NonFinite { t: t0.as_f64() });
    }
    let f0 = rhs(t0, &y0)?;
    if !all_finite(&f0) {
        return Err(Error::NonFinite { t: t0.as_f64() });
    }
    let mut sol = OdeSolution {
        ts: vec![t0],
        ys: vec![y0],
        fs: vec![f0],
        dense: Vec::new(),
        stats: StepStats { rhs_evals: 1, min_step: T::infinity(), ..Default::default() },
        stopped: false,
    };
    if t_end == t0 {
        sol.stats.min_step = T::zero();
        return Ok(sol);
    }
    let dir = (t_end - t0).signum();
    let span = (t_end - t0).abs();
    let h_max = opts.h_max.unwrap_or(span).abs();

    let mut h = match opts.h_init {
        Some(h) => h.abs().min(h_max),
        None => initial_step(&mut rhs, t0, &y0, &f0, dir, opts, h_max)?,
    };
    sol.stats.rhs_evals += 1;

    let expo1 = T::lit(0.2) - opts.beta * T::lit(0.75);
    let (fac_lo, fac_hi) = (T::lit(0.1), T::lit(5.0)); // 1/fac_max, 1/fac_min
    let mut fac_old = T::lit(1e-4);
    let mut last_rejected = false;

    let mut t = t0;
    let mut y = y0;
    let mut k1 = f0;

    loop {
        if sol.stats.accepted + sol.stats.rejected >= opts.max_steps {
            return Err(Error::MaxSteps(opts.max_steps));
        }
        let remaining = (t_end - t).abs();
        let mut last = false;
        if h >= remaining * T::lit(0.99) {
            h = remaining;
            last = true;
        }
        let h_min = T::lit(16.0) * T::epsilon() * t.abs().max(span);
        if h < h_min {
            return Err(Error::StepUnderflow { t: t.as_f64(), h: h.as_f64() });
        }
        let hs = h * dir;

        let stages = (|| -> Result<([[T; N]; 7], [T; N])> {
            let mut k = [[T::zero(); N]; 7];
            k[0] = k1;
            for s in 1..7 {
                let terms: Vec<(f64, &[T; N])> = (0..s).map(|j| (A[s][j], &k[j])).collect();
                let ys = axpy(&y, hs, &terms);
                k[s] = rhs(t + T::lit(C[s]) * hs, &ys)?;
                if !all_finite(&k[s]) {
                    return Err(Error::NonFinite { t: (t + T::lit(C[s]) * hs).as_f64() });
                }
            }
            let terms: Vec<(f64, &[T; N])> = (0..6).map(|j| (A[6][j], &k[j])).collect();
            Ok((k, axpy(&y, hs, &terms)))
        })();
        sol.stats.rhs_evals += 6;

        let (k, y1) = match stages {
            Ok(v) => v,
            Err(Error::Singular(_)) | Err(Error::Domain(_)) | Err(Error::NonFinite { .. }) => {
                // A trial stage left the domain; retry with a shorter step.
                sol.stats.rejected += 1;
                last_rejected = true;
                h = h * T::lit(0.25);
                continue;
            }
            Err(e) => return Err(e),
        };

        let err_vec: [T; N] = std::array::from_fn(|i| {
            let mut acc = T::zero();
            for s in 0..7 {
                if E[s] != 0.0 {
                    acc = acc + T::lit(E[s]) * k[s][i];
                }
            }
            hs * acc
        });
        let err = wrms(&err_vec, &y, &y1, opts.rtol, opts.atol);
        if !err.is_finite() {
            sol.stats.rejected += 1;
            last_rejected = true;
            h = h * T::lit(0.25);
            continue;
        }

        let fac11 = err.powf(expo1);
        let fac = (fac11 / fac_old.powf(opts.beta) / opts.safety).max(fac_lo).min(fac_hi);
        let mut h_new = h / fac;

        if err <= T::one() {
            fac_old = err.max(T::lit(1e-4));
            sol.stats.accepted += 1;
            sol.stats.min_step = sol.stats.min_step.min(h);

            let ydiff: [T; N] = std::array::from_fn(|i| y1[i] - y[i]);
            let bspl: [T; N] = std::array::from_fn(|i| hs * k[0][i] - ydiff[i]);
            let cont = [
                y,
                ydiff,
                bspl,
                std::array::from_fn(|i| ydiff[i] - hs * k[6][i] - bspl[i]),
                std::array::from_fn(|i| {
                    let mut acc = T::zero();
                    for s in 0..7 {
                        if D[s] != 0.0 {
                            acc = acc + T::lit(D[s]) * k[s][i];
                        }
                    }
                    hs * acc
                }),
            ];
            let t_new = if last { t_end } else { t + hs };
            sol.dense.push(DenseStep { t0: t, h: t_new - t, cont });
            sol.ts.push(t_new);
            sol.ys.push(y1);
            sol.fs.push(k[6]);
            t = t_new;
            y = y1;
            k1 = k[6];

            if stop(t, &y) {
                sol.stopped = true;
                break;
            }
            if last {
                break;
            }
            if last_rejected {
                h_new = h_new.min(h);
            }
            last_rejected = false;
            h = h_new.min(h_max);
        } else {
            h_new = h / fac_hi.min(fac11 / opts.safety);
            sol.stats.rejected += 1;
            last_rejected = true;
            h = h_new;
        }
    }
    Ok(sol)
}

/// Starting step size after Hairer, Norsett and Wanner (II.4).
fn initial_step<T, const N: usize, F>(
    rhs: &mut F,
    t0: T,
    y0: &[T; N],
    f0: &[T; N],
    dir: T,
    opts: &Dopri5Options<T>,
    h_max: T,
) -> Result<T>
where
    T: Real,
    F: FnMut(T, &[T; N]) -> Result<[T; N]>,
{
    let zero = [T::zero(); N];
    let d0 = wrms(y0, y0, &zero, opts.rtol, opts.atol);
    let d1 = wrms(f0, y0, &zero, opts.rtol, opts.atol);
    let mut h = if d0 < T::lit(1e-10) || d1 < T::lit(1e-10) { T::lit(1e-6) } else { T::lit(0.01) * d0 / d1 };
    h = h.min(h_max);
    let y1: [T; N] = std::array::from_fn(|i| y0[i] + dir * h * f0[i]);
    let d2 = match rhs(t0 + dir * h, &y1) {
        Ok(f1) => {
            let diff: [T; N] = std::array::from_fn(|i| f1[i] - f0[i]);
            wrms(&diff, y0, &zero, opts.rtol, opts.atol) / h
        }
        Err(_) => return Ok(h * T::lit(1e-2)),
    };
    let der = d1.max(d2);
    let h1 = if der <= T::lit(1e-15) {
        (h * T::lit(1e-3)).max(T::lit(1e-6))
    } else {
        (T::lit(0.01) / der).powf(T::lit(0.2))
    };
    Ok((T::lit(100.0) * h).min(h1).min(h_max))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn oscillator(_: f64, y: &[f64; 2]) -> Result<[f64; 2]> {
        Ok([y[1], -y[0]])
    }

    #[test]
    fn harmonic_oscillator_accuracy() {
        let opts = Dopri5Options::new(1e-10, 1e-12);
        let sol = dopri5(oscillator, 0.0, [1.0, 0.0], 10.0, &opts, |_, _| false).unwrap();
        assert_eq!(sol.t_last(), 10.0);
        let y = sol.ys.last().unwrap();
        assert!((y[0] - 10f64.cos()).abs() < 1e-8);
        assert!((y[1] + 10f64.sin()).abs() < 1e-8);
        assert!(sol.ts.windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn backward_integration() {
        let opts = Dopri5Options::new(1e-10, 1e-12);
        let sol = dopri5(oscillator, 0.0, [1.0, 0.0], -3.0, &opts, |_, _| false).unwrap();
        let y = sol.ys.last().unwrap();
        assert!((y[0] - 3f64.cos()).abs() < 1e-8);
        assert!((y[1] - 3f64.sin()).abs() < 1e-8);
        let mid = sol.eval(-1.5);
        assert!((mid[0] - 1.5f64.cos()).abs() < 1e-8);
    }

    #[test]
    fn dense_output_reproduces_nodes() {
        let opts = Dopri5Options::new(1e-8, 1e-10);
        let sol = dopri5(oscillator, 0.0, [1.0, 0.0], 5.0, &opts, |_, _| false).unwrap();
        for (t, y) in sol.ts.iter().zip(&sol.ys) {
            assert_eq!(sol.eval(*t), *y);
        }
        // interior points stay at the tolerance level
        for i in 0..200 {
            let t = 5.0 * i as f64 / 199.0;
            let y = sol.eval(t);
            assert!((y[0] - t.cos()).abs() < 1e-7, "t = {t}");
        }
    }

    #[test]
    fn stop_predicate_ends_early() {
        let opts = Dopri5Options::new(1e-8, 1e-10);
        let sol = dopri5(oscillator, 0.0, [1.0, 0.0], 10.0, &opts, |_, y| y[0] < 0.0).unwrap();
        assert!(sol.stopped);
        assert!(sol.t_last() < 10.0 && sol.t_last() > 1.5);
    }

    #[test]
    fn rejects_bad_tolerances() {
        let opts = Dopri5Options::new(0.0, 1e-10);
        assert!(dopri5(oscillator, 0.0, [1.0, 0.0], 1.0, &opts, |_, _| false).is_err());
    }

    #[test]
    fn blow_up_reports_failure() {
        // y' = y^2 from y(0) = 1 blows up at t = 1.
        let opts = Dopri5Options::new(1e-8, 1e-10);
        let r = dopri5(|_, y: &[f64; 1]| Ok([y[0] * y[0]]), 0.0, [1.0], 2.0, &opts, |_, _| false);
        assert!(matches!(r, Err(Error::StepUnderflow { .. }) | Err(Error::NonFinite { .. }) | Err(Error::MaxSteps(_))));
    }

    #[test]
    fn runs_in_single_precision() {
        let opts = Dopri5Options::new(1e-5f32, 1e-6);
        let sol = dopri5(|_, y: &[f32; 2]| Ok([y[1], -y[0]]), 0.0f32, [1.0, 0.0], 3.0, &opts, |_, _| false).unwrap();
        assert!((sol.ys.last().unwrap()[0] - 3f32.cos()).abs() < 1e-3);
    }
}
