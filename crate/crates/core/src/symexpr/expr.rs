use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex;

use super::scalar::ExactScalar;
use crate::Real;

/// `exp(lambda th) * prod_k (u1^(k))^a_k * prod_k (u2^(k))^b_k`, where
/// `u^(k)` is the k-th angle derivative. Trailing zero exponents are trimmed
/// so equal monomials compare equal.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug, Default)]
pub struct Monomial {
    lambda: ExactScalar,
    u1: Vec<u8>,
    u2: Vec<u8>,
}

fn trim(v: &mut Vec<u8>) {
    while v.last() == Some(&0) {
        v.pop();
    }
}

fn exp_at(v: &[u8], k: usize) -> u8 {
    v.get(k).copied().unwrap_or(0)
}

fn bump(v: &mut Vec<u8>, k: usize, by: i16) {
    if v.len() <= k {
        v.resize(k + 1, 0);
    }
    v[k] = u8::try_from(v[k] as i16 + by).expect("exponent in range");
    trim(v);
}

impl Monomial {
    pub fn new(lambda: ExactScalar, mut u1: Vec<u8>, mut u2: Vec<u8>) -> Self {
        trim(&mut u1);
        trim(&mut u2);
        Monomial { lambda, u1, u2 }
    }

    pub fn one() -> Self {
        Self::default()
    }

    pub fn lambda(&self) -> &ExactScalar {
        &self.lambda
    }

    /// Exponent of the k-th derivative of `u1`.
    pub fn u1_exp(&self, k: usize) -> u8 {
        exp_at(&self.u1, k)
    }

    pub fn u2_exp(&self, k: usize) -> u8 {
        exp_at(&self.u2, k)
    }

    /// True when no derivative symbol appears.
    pub fn is_point(&self) -> bool {
        self.u1.len() <= 1 && self.u2.len() <= 1
    }

    fn product(&self, o: &Monomial) -> Monomial {
        let add = |a: &[u8], b: &[u8]| -> Vec<u8> {
            (0..a.len().max(b.len())).map(|k| exp_at(a, k) + exp_at(b, k)).collect()
        };
        Monomial::new(&self.lambda + &o.lambda, add(&self.u1, &o.u1), add(&self.u2, &o.u2))
    }

    fn conj(&self) -> Monomial {
        Monomial { lambda: self.lambda.conj(), u1: self.u1.clone(), u2: self.u2.clone() }
    }
}

fn symbol(name: &str, k: usize) -> String {
    format!("{name}{}", "'".repeat(k))
}

impl fmt::Display for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut factors = Vec::new();
        if !self.lambda.is_zero() {
            factors.push(format!("exp(({})*th)", self.lambda));
        }
        for (name, exps) in [("u1", &self.u1), ("u2", &self.u2)] {
            for (k, &e) in exps.iter().enumerate() {
                match e {
                    0 => {}
                    1 => factors.push(symbol(name, k)),
                    _ => factors.push(format!("{}^{e}", symbol(name, k))),
                }
            }
        }
        if factors.is_empty() {
            f.write_str("1")
        } else {
            f.write_str(&factors.join("*"))
        }
    }
}

/// A finite sum of scalar multiples of [`Monomial`]s, kept canonical: like
/// terms merged, zero coefficients dropped, terms ordered.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct SymExpr {
    terms: BTreeMap<Monomial, ExactScalar>,
}

impl SymExpr {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn constant(c: ExactScalar) -> Self {
        Self::term(c, Monomial::one())
    }

    pub fn term(c: ExactScalar, m: Monomial) -> Self {
        let mut e = Self::zero();
        e.add_term(m, c);
        e
    }

    /// `exp(lambda th)`.
    pub fn exp(lambda: ExactScalar) -> Self {
        Self::term(ExactScalar::one(), Monomial::new(lambda, vec![], vec![]))
    }

    /// The k-th angle derivative of `u1`.
    pub fn u1(k: usize) -> Self {
        let mut e = vec![0; k + 1];
        e[k] = 1;
        Self::term(ExactScalar::one(), Monomial::new(ExactScalar::zero(), e, vec![]))
    }

    pub fn u2(k: usize) -> Self {
        let mut e = vec![0; k + 1];
        e[k] = 1;
        Self::term(ExactScalar::one(), Monomial::new(ExactScalar::zero(), vec![], e))
    }

    fn add_term(&mut self, m: Monomial, c: ExactScalar) {
        if c.is_zero() {
            return;
        }
        match self.terms.get_mut(&m) {
            Some(existing) => {
                let sum = &*existing + &c;
                if sum.is_zero() {
                    self.terms.remove(&m);
                } else {
                    *existing = sum;
                }
            }
            None => {
                self.terms.insert(m, c);
            }
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &ExactScalar)> {
        self.terms.iter()
    }

    pub fn coeff(&self, m: &Monomial) -> ExactScalar {
        self.terms.get(m).cloned().unwrap_or_default()
    }

    /// The constant value if the expression has no symbols.
    pub fn as_constant(&self) -> Option<ExactScalar> {
        match self.terms.len() {
            0 => Some(ExactScalar::zero()),
            1 => self.terms.get(&Monomial::one()).cloned(),
            _ => None,
        }
    }

    /// True when no derivative symbol appears anywhere.
    pub fn is_point(&self) -> bool {
        self.terms.keys().all(Monomial::is_point)
    }

    pub fn scale(&self, c: &ExactScalar) -> Self {
        let mut out = Self::zero();
        for (m, k) in &self.terms {
            out.add_term(m.clone(), k * c);
        }
        out
    }

    pub fn conj(&self) -> Self {
        let mut out = Self::zero();
        for (m, k) in &self.terms {
            out.add_term(m.conj(), k.conj());
        }
        out
    }

    /// Total angle derivative: `d/dth + sum_k u^(k+1) d/du^(k)` on both
    /// dependent variables.
    pub fn total_derivative(&self) -> Self {
        let mut out = Self::zero();
        for (m, c) in &self.terms {
            if !m.lambda.is_zero() {
                out.add_term(m.clone(), c * &m.lambda);
            }
            for which in 0..2 {
                let exps = if which == 0 { &m.u1 } else { &m.u2 };
                for (k, &e) in exps.iter().enumerate() {
                    if e == 0 {
                        continue;
                    }
                    let mut next = m.clone();
                    let v = if which == 0 { &mut next.u1 } else { &mut next.u2 };
                    bump(v, k, -1);
                    bump(v, k + 1, 1);
                    out.add_term(next, c * &ExactScalar::int(e as i64));
                }
            }
        }
        out
    }

    /// Imposes `u1'' = -2 u1` and its consequences, and `u2' = 0`.
    pub fn substitute_onshell(&self) -> Self {
        let mut out = Self::zero();
        'terms: for (m, c) in &self.terms {
            if m.u2.len() > 1 {
                continue 'terms;
            }
            let mut factor = c.clone();
            let mut u1 = vec![0u8; 2];
            for (k, &e) in m.u1.iter().enumerate() {
                if e == 0 {
                    continue;
                }
                u1[k % 2] += e;
                let per = ExactScalar::int(-2).pow((k / 2) as u32);
                factor = &factor * &per.pow(e as u32);
            }
            out.add_term(Monomial::new(m.lambda.clone(), u1, m.u2.clone()), factor);
        }
        out
    }

    /// Evaluates a point expression (no derivative symbols).
    pub fn eval_complex<T: Real>(&self, theta: T, u1: T, u2: T) -> Complex<T> {
        let mut acc = Complex::new(T::zero(), T::zero());
        for (m, c) in &self.terms {
            let lambda: Complex<T> = m.lambda.to_complex();
            let mut v = c.to_complex::<T>() * (lambda * theta).exp();
            v = v * u1.powi(m.u1_exp(0) as i32) * u2.powi(m.u2_exp(0) as i32);
            acc = acc + v;
        }
        acc
    }
}

impl Add for &SymExpr {
    type Output = SymExpr;
    fn add(self, o: &SymExpr) -> SymExpr {
        let mut out = self.clone();
        for (m, c) in &o.terms {
            out.add_term(m.clone(), c.clone());
        }
        out
    }
}

impl Sub for &SymExpr {
    type Output = SymExpr;
    fn sub(self, o: &SymExpr) -> SymExpr {
        let mut out = self.clone();
        for (m, c) in &o.terms {
            out.add_term(m.clone(), -c);
        }
        out
    }
}

impl Neg for &SymExpr {
    type Output = SymExpr;
    fn neg(self) -> SymExpr {
        self.scale(&ExactScalar::int(-1))
    }
}

impl Mul for &SymExpr {
    type Output = SymExpr;
    fn mul(self, o: &SymExpr) -> SymExpr {
        let mut out = SymExpr::zero();
        for (m1, c1) in &self.terms {
            for (m2, c2) in &o.terms {
                out.add_term(m1.product(m2), c1 * c2);
            }
        }
        out
    }
}

macro_rules! forward_owned {
    ($tr:ident, $m:ident) => {
        impl $tr for SymExpr {
            type Output = SymExpr;
            fn $m(self, o: SymExpr) -> SymExpr {
                (&self).$m(&o)
            }
        }
    };
}
forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);

impl Neg for SymExpr {
    type Output = SymExpr;
    fn neg(self) -> SymExpr {
        -&self
    }
}

impl fmt::Display for SymExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        let parts: Vec<String> = self
            .terms
            .iter()
            .map(|(m, c)| {
                if *m == Monomial::one() {
                    format!("({c})")
                } else if c.is_one() {
                    m.to_string()
                } else {
                    format!("({c})*{m}")
                }
            })
            .collect();
        f.write_str(&parts.join(" + "))
    }
}

impl fmt::Debug for SymExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "SymExpr({self})")
    }
}
