//! Text form of point generators.
//!
//! ```text
//! expr   := term (('+' | '-') term)*
//! term   := unary (('*' | '/') unary)*
//! unary  := ('-' | '+') unary | power
//! power  := atom ('^' integer)?
//! atom   := number | name | 'exp' '(' expr ')' | '(' expr ')'
//! ```
//!
//! Names: `th`, `u1`, `u2`, `i`, `sqrt2`, the basis fields `d_th`, `d_u1`,
//! `d_u2`, and any declared unknown. `th` may only appear inside `exp`, as
//! `exp(lambda*th)` with a constant `lambda`. Unknowns must enter linearly.
//! Division is by constants only. Example:
//! `exp(2*sqrt2*i*th)*(d_th + c*u1*d_u1)` with unknown `c`.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use thiserror::Error;

use super::expr::SymExpr;
use super::generator::GeneratorSym;
use super::scalar::ExactScalar;
use super::solve::Ansatz;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{message} at offset {position}")]
pub struct GeneratorParseError {
    pub message: String,
    pub position: usize,
}

/// Function part and the three vector components, keyed by the unknown that
/// multiplies them (`None` for the known part).
type Lin = BTreeMap<Option<String>, [SymExpr; 4]>;

#[derive(Clone, Debug)]
#[allow(clippy::large_enum_variant)]
enum Value {
    Const(ExactScalar),
    /// `a + b th` with `b != 0`.
    Angle(ExactScalar, ExactScalar),
    Field(Lin),
}

fn zero4() -> [SymExpr; 4] {
    std::array::from_fn(|_| SymExpr::zero())
}

fn lin_from(key: Option<String>, slot: usize, e: SymExpr) -> Lin {
    let mut c = zero4();
    c[slot] = e;
    Lin::from([(key, c)])
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
    unknowns: &'a [&'a str],
}

type PResult<T> = Result<T, GeneratorParseError>;

impl<'a> Parser<'a> {
    fn err<T>(&self, message: impl Into<String>) -> PResult<T> {
        Err(GeneratorParseError { message: message.into(), position: self.pos })
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn eat(&mut self, c: u8) -> bool {
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: u8) -> PResult<()> {
        if self.eat(c) {
            Ok(())
        } else {
            self.err(format!("expected '{}'", c as char))
        }
    }

    fn expr(&mut self) -> PResult<Value> {
        let mut v = self.term()?;
        loop {
            if self.eat(b'+') {
                let rhs = self.term()?;
                v = self.add(v, rhs)?;
            } else if self.eat(b'-') {
                let rhs = self.term()?;
                v = self.add(v, neg(rhs))?;
            } else {
                return Ok(v);
            }
        }
    }

    fn term(&mut self) -> PResult<Value> {
        let mut v = self.unary()?;
        loop {
            if self.eat(b'*') {
                let rhs = self.unary()?;
                v = self.mul(v, rhs)?;
            } else if self.eat(b'/') {
                let at = self.pos;
                let rhs = self.unary()?;
                match rhs {
                    Value::Const(c) if !c.is_zero() => {
                        let inv = c.inverse().expect("nonzero");
                        v = self.mul(v, Value::Const(inv))?;
                    }
                    Value::Const(_) => {
                        self.pos = at;
                        return self.err("division by zero");
                    }
                    _ => {
                        self.pos = at;
                        return self.err("only division by constants is supported");
                    }
                }
            } else {
                return Ok(v);
            }
        }
    }

    fn unary(&mut self) -> PResult<Value> {
        if self.eat(b'-') {
            Ok(neg(self.unary()?))
        } else if self.eat(b'+') {
            self.unary()
        } else {
            self.power()
        }
    }

    fn power(&mut self) -> PResult<Value> {
        let base = self.atom()?;
        if !self.eat(b'^') {
            return Ok(base);
        }
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        let n: u32 = match std::str::from_utf8(&self.src[start..self.pos]).unwrap().parse() {
            Ok(n) if n <= 16 => n,
            _ => {
                self.pos = start;
                return self.err("expected a small non-negative integer exponent");
            }
        };
        let mut out = Value::Const(ExactScalar::one());
        for _ in 0..n {
            out = self.mul(out, base.clone())?;
        }
        Ok(out)
    }

    fn atom(&mut self) -> PResult<Value> {
        match self.peek() {
            Some(b'(') => {
                self.pos += 1;
                let v = self.expr()?;
                self.expect(b')')?;
                Ok(v)
            }
            Some(c) if c.is_ascii_digit() || c == b'.' => self.number(),
            Some(c) if c.is_ascii_alphabetic() || c == b'_' => self.name(),
            Some(_) => self.err("unexpected character"),
            None => self.err("unexpected end of input"),
        }
    }

    fn number(&mut self) -> PResult<Value> {
        let start = self.pos;
        while self.pos < self.src.len() && (self.src[self.pos].is_ascii_digit() || self.src[self.pos] == b'.') {
            self.pos += 1;
        }
        let text = std::str::from_utf8(&self.src[start..self.pos]).unwrap();
        let (int, frac) = text.split_once('.').unwrap_or((text, ""));
        if frac.contains('.') || (int.is_empty() && frac.is_empty()) {
            self.pos = start;
            return self.err("malformed number");
        }
        let digits: BigInt = format!("{int}{frac}").parse().expect("digits");
        let denom = BigInt::from(10u32).pow(frac.len() as u32);
        Ok(Value::Const(ExactScalar::rational(BigRational::new(digits, denom))))
    }

    fn name(&mut self) -> PResult<Value> {
        let start = self.pos;
        while self.pos < self.src.len() && (self.src[self.pos].is_ascii_alphanumeric() || self.src[self.pos] == b'_') {
            self.pos += 1;
        }
        let name = std::str::from_utf8(&self.src[start..self.pos]).unwrap();
        let field = |slot: usize, e: SymExpr| Value::Field(lin_from(None, slot, e));
        let one = || SymExpr::constant(ExactScalar::one());
        Ok(match name {
            "th" => Value::Angle(ExactScalar::zero(), ExactScalar::one()),
            "u1" => field(0, SymExpr::u1(0)),
            "u2" => field(0, SymExpr::u2(0)),
            "i" => Value::Const(ExactScalar::i()),
            "sqrt2" => Value::Const(ExactScalar::sqrt2()),
            "d_th" => field(1, one()),
            "d_u1" => field(2, one()),
            "d_u2" => field(3, one()),
            "exp" => {
                self.expect(b'(')?;
                let at = self.pos;
                let arg = self.expr()?;
                self.expect(b')')?;
                match arg {
                    Value::Angle(a, b) if a.is_zero() => field(0, SymExpr::exp(b)),
                    Value::Const(a) if a.is_zero() => Value::Const(ExactScalar::one()),
                    _ => {
                        self.pos = at;
                        return self.err("exp() takes a constant multiple of th");
                    }
                }
            }
            other if self.unknowns.contains(&other) => Value::Field(lin_from(Some(other.to_string()), 0, one())),
            other => {
                self.pos = start;
                return self.err(format!("unknown name '{other}'"));
            }
        })
    }

    fn field(&self, v: Value) -> PResult<Lin> {
        match v {
            Value::Const(c) => Ok(lin_from(None, 0, SymExpr::constant(c))),
            Value::Field(l) => Ok(l),
            Value::Angle(..) => self.err("th may only appear inside exp()"),
        }
    }

    fn add(&self, a: Value, b: Value) -> PResult<Value> {
        match (a, b) {
            (Value::Const(x), Value::Const(y)) => Ok(Value::Const(&x + &y)),
            (Value::Angle(a, b), Value::Const(c)) | (Value::Const(c), Value::Angle(a, b)) => {
                Ok(Value::Angle(&a + &c, b))
            }
            (Value::Angle(a1, b1), Value::Angle(a2, b2)) => {
                let b = &b1 + &b2;
                Ok(if b.is_zero() { Value::Const(&a1 + &a2) } else { Value::Angle(&a1 + &a2, b) })
            }
            (a, b) => {
                let mut out = self.field(a)?;
                for (k, comps) in self.field(b)? {
                    let slot = out.entry(k).or_insert_with(zero4);
                    for (d, s) in slot.iter_mut().zip(comps) {
                        *d = &*d + &s;
                    }
                }
                Ok(Value::Field(out))
            }
        }
    }

    fn mul(&self, a: Value, b: Value) -> PResult<Value> {
        match (a, b) {
            (Value::Const(x), Value::Const(y)) => Ok(Value::Const(&x * &y)),
            (Value::Angle(a, b), Value::Const(c)) | (Value::Const(c), Value::Angle(a, b)) => {
                Ok(if c.is_zero() { Value::Const(c) } else { Value::Angle(&a * &c, &b * &c) })
            }
            (a, b) => {
                let (la, lb) = (self.field(a)?, self.field(b)?);
                let mut out = Lin::new();
                for (ka, ca) in &la {
                    for (kb, cb) in &lb {
                        let key = match (ka, kb) {
                            (Some(_), Some(_)) => return self.err("unknowns must enter linearly"),
                            (Some(k), None) | (None, Some(k)) => Some(k.clone()),
                            (None, None) => None,
                        };
                        let a_vec = ca[1..].iter().any(|e| !e.is_zero());
                        let b_vec = cb[1..].iter().any(|e| !e.is_zero());
                        if a_vec && b_vec {
                            return self.err("product of two vector fields");
                        }
                        let slot = out.entry(key).or_insert_with(zero4);
                        slot[0] = &slot[0] + &(&ca[0] * &cb[0]);
                        for j in 1..4 {
                            slot[j] = &slot[j] + &(&(&ca[0] * &cb[j]) + &(&ca[j] * &cb[0]));
                        }
                    }
                }
                Ok(Value::Field(out))
            }
        }
    }
}

fn neg(v: Value) -> Value {
    let m1 = ExactScalar::int(-1);
    match v {
        Value::Const(c) => Value::Const(-c),
        Value::Angle(a, b) => Value::Angle(-a, -b),
        Value::Field(l) => Value::Field(l.into_iter().map(|(k, c)| (k, c.map(|e| e.scale(&m1)))).collect()),
    }
}

/// Parses a generator whose coefficients may contain the given unknowns.
pub fn parse_ansatz(text: &str, unknowns: &[&str]) -> Result<Ansatz, GeneratorParseError> {
    for u in unknowns {
        let reserved = ["th", "u1", "u2", "i", "sqrt2", "d_th", "d_u1", "d_u2", "exp"];
        let valid = !u.is_empty()
            && u.chars().all(|c| c.is_ascii_alphanumeric() || c == '_')
            && u.chars().next().is_some_and(|c| c.is_ascii_alphabetic() || c == '_');
        if reserved.contains(u) || !valid {
            return Err(GeneratorParseError { message: format!("invalid unknown name '{u}'"), position: 0 });
        }
    }
    let mut p = Parser { src: text.as_bytes(), pos: 0, unknowns };
    let v = p.expr()?;
    if p.peek().is_some() {
        return p.err("trailing input");
    }
    let lin = p.field(v)?;
    let mut ansatz = Ansatz::default();
    for (key, [scalar, xi, eta1, eta2]) in lin {
        if !scalar.is_zero() {
            return Err(GeneratorParseError {
                message: "expression is not a vector field (a term lacks d_th, d_u1 or d_u2)".into(),
                position: text.len(),
            });
        }
        let g = GeneratorSym { xi, eta1, eta2 };
        match key {
            None => ansatz.base = g,
            Some(name) => ansatz.terms.push((name, g)),
        }
    }
    // report unknowns in declaration order, including ones that cancelled
    ansatz.terms = unknowns
        .iter()
        .map(|u| {
            let g = ansatz.terms.iter().find(|(n, _)| n == u).map(|(_, g)| g.clone()).unwrap_or_default();
            (u.to_string(), g)
        })
        .collect();
    Ok(ansatz)
}

/// Parses a generator without unknowns.
pub fn parse_generator(text: &str) -> Result<GeneratorSym, GeneratorParseError> {
    Ok(parse_ansatz(text, &[])?.base)
}
