use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_complex::Complex;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::Real;

/// An element `q0 + q1 sqrt2 + i (q2 + q3 sqrt2)` of Q(sqrt 2, i).
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct ExactScalar {
    q: [BigRational; 4],
}

fn rat(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

/// `(a0 + a1 sqrt2)(b0 + b1 sqrt2)`
fn qmul(a0: &BigRational, a1: &BigRational, b0: &BigRational, b1: &BigRational) -> (BigRational, BigRational) {
    (a0 * b0 + rat(2) * a1 * b1, a0 * b1 + a1 * b0)
}

impl ExactScalar {
    pub fn new(q0: BigRational, q1: BigRational, q2: BigRational, q3: BigRational) -> Self {
        ExactScalar { q: [q0, q1, q2, q3] }
    }

    pub fn from_i64s(q0: i64, q1: i64, q2: i64, q3: i64) -> Self {
        Self::new(rat(q0), rat(q1), rat(q2), rat(q3))
    }

    pub fn rational(r: BigRational) -> Self {
        Self::new(r, BigRational::zero(), BigRational::zero(), BigRational::zero())
    }

    pub fn int(n: i64) -> Self {
        Self::from_i64s(n, 0, 0, 0)
    }

    pub fn zero() -> Self {
        Self::int(0)
    }

    pub fn one() -> Self {
        Self::int(1)
    }

    pub fn sqrt2() -> Self {
        Self::from_i64s(0, 1, 0, 0)
    }

    pub fn i() -> Self {
        Self::from_i64s(0, 0, 1, 0)
    }

    pub fn sqrt2_i() -> Self {
        Self::from_i64s(0, 0, 0, 1)
    }

    pub fn parts(&self) -> &[BigRational; 4] {
        &self.q
    }

    pub fn is_zero(&self) -> bool {
        self.q.iter().all(Zero::is_zero)
    }

    pub fn is_one(&self) -> bool {
        *self == Self::one()
    }

    pub fn conj(&self) -> Self {
        let [a, b, c, d] = &self.q;
        Self::new(a.clone(), b.clone(), -c, -d)
    }

    /// Multiplicative inverse, `None` for zero.
    pub fn inverse(&self) -> Option<Self> {
        if self.is_zero() {
            return None;
        }
        let [a0, a1, b0, b1] = &self.q;
        // |z|^2 = A^2 + B^2 = n0 + n1 sqrt2, a nonzero element of Q(sqrt2)
        let (p0, p1) = qmul(a0, a1, a0, a1);
        let (s0, s1) = qmul(b0, b1, b0, b1);
        let (n0, n1) = (p0 + s0, p1 + s1);
        let norm = &n0 * &n0 - rat(2) * &n1 * &n1;
        let (m0, m1) = (&n0 / &norm, -&n1 / &norm);
        let conj = self.conj();
        let (c0, c1) = qmul(&conj.q[0], &conj.q[1], &m0, &m1);
        let (d0, d1) = qmul(&conj.q[2], &conj.q[3], &m0, &m1);
        Some(Self::new(c0, c1, d0, d1))
    }

    pub fn pow(&self, n: u32) -> Self {
        let mut out = Self::one();
        for _ in 0..n {
            out = &out * self;
        }
        out
    }

    pub fn to_complex<T: Real>(&self) -> Complex<T> {
        let f = |r: &BigRational| r.to_f64().unwrap_or(f64::NAN);
        let s2 = std::f64::consts::SQRT_2;
        Complex::new(T::lit(f(&self.q[0]) + f(&self.q[1]) * s2), T::lit(f(&self.q[2]) + f(&self.q[3]) * s2))
    }
}

impl From<i64> for ExactScalar {
    fn from(n: i64) -> Self {
        Self::int(n)
    }
}

impl From<BigRational> for ExactScalar {
    fn from(r: BigRational) -> Self {
        Self::rational(r)
    }
}

impl Add for &ExactScalar {
    type Output = ExactScalar;
    fn add(self, o: &ExactScalar) -> ExactScalar {
        ExactScalar { q: std::array::from_fn(|k| &self.q[k] + &o.q[k]) }
    }
}

impl Sub for &ExactScalar {
    type Output = ExactScalar;
    fn sub(self, o: &ExactScalar) -> ExactScalar {
        ExactScalar { q: std::array::from_fn(|k| &self.q[k] - &o.q[k]) }
    }
}

impl Neg for &ExactScalar {
    type Output = ExactScalar;
    fn neg(self) -> ExactScalar {
        ExactScalar { q: std::array::from_fn(|k| -&self.q[k]) }
    }
}

impl Mul for &ExactScalar {
    type Output = ExactScalar;
    fn mul(self, o: &ExactScalar) -> ExactScalar {
        let [a0, a1, b0, b1] = &self.q;
        let [c0, c1, d0, d1] = &o.q;
        let (ac0, ac1) = qmul(a0, a1, c0, c1);
        let (bd0, bd1) = qmul(b0, b1, d0, d1);
        let (ad0, ad1) = qmul(a0, a1, d0, d1);
        let (bc0, bc1) = qmul(b0, b1, c0, c1);
        ExactScalar::new(ac0 - bd0, ac1 - bd1, ad0 + bc0, ad1 + bc1)
    }
}

#[allow(clippy::suspicious_arithmetic_impl)]
impl Div for &ExactScalar {
    type Output = ExactScalar;
    /// Panics on division by zero, like integer division.
    fn div(self, o: &ExactScalar) -> ExactScalar {
        self * &o.inverse().expect("division by zero in Q(sqrt2, i)")
    }
}

macro_rules! forward_owned {
    ($tr:ident, $m:ident) => {
        impl $tr for ExactScalar {
            type Output = ExactScalar;
            fn $m(self, o: ExactScalar) -> ExactScalar {
                (&self).$m(&o)
            }
        }
    };
}
forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);
forward_owned!(Div, div);

impl Neg for ExactScalar {
    type Output = ExactScalar;
    fn neg(self) -> ExactScalar {
        -&self
    }
}

fn fmt_rat(r: &BigRational) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

impl fmt::Display for ExactScalar {
    /// Renders like `1/2 - 3*sqrt2 + sqrt2*i`; zero prints as `0`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        const UNITS: [&str; 4] = ["", "sqrt2", "i", "sqrt2*i"];
        let mut first = true;
        for (q, unit) in self.q.iter().zip(UNITS) {
            if q.is_zero() {
                continue;
            }
            let mag = q.abs();
            let sign = if q.is_negative() { "-" } else { "+" };
            if first {
                if q.is_negative() {
                    f.write_str("-")?;
                }
            } else {
                write!(f, " {sign} ")?;
            }
            first = false;
            if unit.is_empty() {
                f.write_str(&fmt_rat(&mag))?;
            } else if mag.is_one() {
                f.write_str(unit)?;
            } else {
                write!(f, "{}*{unit}", fmt_rat(&mag))?;
            }
        }
        if first {
            f.write_str("0")?;
        }
        Ok(())
    }
}

impl fmt::Debug for ExactScalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ExactScalar({self})")
    }
}
