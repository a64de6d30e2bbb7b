//! One-variable real functions written in a small arithmetic language.
//!
//! ```text
//! expr   := term (('+' | '-') term)*
//! term   := factor (('*' | '/') factor)*
//! factor := base ('^' factor)?
//! base   := number | 's' | 't' | fn '(' expr ')' | '(' expr ')' | '-' base
//! fn     := sin | cos | tan | exp | log | sqrt
//! ```
//!
//! `^` is right associative and a leading minus binds to the base, so
//! `-s^2` is `(-s)^2`. An expression uses at most one of `s` and `t`.

use std::fmt;

use thiserror::Error;

use crate::Real;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UnaryFn {
    Sin,
    Cos,
    Tan,
    Exp,
    Log,
    Sqrt,
    Neg,
}

impl UnaryFn {
    fn name(self) -> &'static str {
        match self {
            UnaryFn::Sin => "sin",
            UnaryFn::Cos => "cos",
            UnaryFn::Tan => "tan",
            UnaryFn::Exp => "exp",
            UnaryFn::Log => "log",
            UnaryFn::Sqrt => "sqrt",
            UnaryFn::Neg => "-",
        }
    }

    fn from_name(name: &str) -> Option<Self> {
        Some(match name {
            "sin" => UnaryFn::Sin,
            "cos" => UnaryFn::Cos,
            "tan" => UnaryFn::Tan,
            "exp" => UnaryFn::Exp,
            "log" => UnaryFn::Log,
            "sqrt" => UnaryFn::Sqrt,
            _ => return None,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

impl BinOp {
    fn symbol(self) -> char {
        match self {
            BinOp::Add => '+',
            BinOp::Sub => '-',
            BinOp::Mul => '*',
            BinOp::Div => '/',
            BinOp::Pow => '^',
        }
    }

    fn precedence(self) -> u8 {
        match self {
            BinOp::Add | BinOp::Sub => 1,
            BinOp::Mul | BinOp::Div => 2,
            BinOp::Pow => 3,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Node {
    Const(f64),
    Var,
    Unary(UnaryFn, Box<Node>),
    Binary(BinOp, Box<Node>, Box<Node>),
}

/// Name of the free variable of an expression.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Variable {
    S,
    T,
}

impl Variable {
    fn as_char(self) -> char {
        match self {
            Variable::S => 's',
            Variable::T => 't',
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{kind} at position {position}")]
pub struct ParseError {
    pub kind: ParseErrorKind,
    /// Zero-based character offset into the source text.
    pub position: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseErrorKind {
    #[error("empty input")]
    Empty,
    #[error("unexpected character '{0}'")]
    UnexpectedChar(char),
    #[error("unexpected end of input")]
    UnexpectedEnd,
    #[error("unknown identifier '{0}'")]
    UnknownIdentifier(String),
    #[error("expected '{0}'")]
    Expected(char),
    #[error("malformed number '{0}'")]
    BadNumber(String),
    #[error("expression mixes the variables s and t")]
    MixedVariables,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DomainErrorKind {
    DivisionByZero,
    LogDomain,
    SqrtDomain,
    PowDomain,
    NonFinite,
}

#[derive(Debug, Clone, Copy, PartialEq, Error)]
#[error("{kind:?} evaluating at {at}")]
pub struct DomainError {
    pub kind: DomainErrorKind,
    pub at: f64,
}

/// A parsed, immutable one-variable expression.
#[derive(Debug, Clone, PartialEq)]
pub struct ShapeExpr {
    root: Node,
    source: String,
    variable: Option<Variable>,
}

impl ShapeExpr {
    pub fn parse(text: &str) -> Result<Self, ParseError> {
        let mut parser = Parser::new(text);
        parser.skip_ws();
        if parser.at_end() {
            return Err(ParseError { kind: ParseErrorKind::Empty, position: 0 });
        }
        let root = parser.expr()?;
        parser.skip_ws();
        if let Some(&(pos, c)) = parser.peek() {
            return Err(ParseError { kind: ParseErrorKind::UnexpectedChar(c), position: pos });
        }
        Ok(ShapeExpr { root, source: text.to_string(), variable: parser.variable })
    }

    /// The constant function `value`.
    pub fn constant(value: f64) -> Self {
        ShapeExpr { root: Node::Const(value), source: format_const(value), variable: None }
    }

    pub fn root(&self) -> &Node {
        &self.root
    }

    pub fn source(&self) -> &str {
        &self.source
    }

    pub fn variable(&self) -> Option<Variable> {
        self.variable
    }

    /// True when the expression does not mention its variable.
    pub fn is_constant(&self) -> bool {
        !mentions_var(&self.root)
    }

    /// True when the expression is constant and evaluates to exactly zero.
    pub fn is_identically_zero(&self) -> bool {
        self.is_constant() && matches!(self.eval(0.0f64), Ok(v) if v == 0.0)
    }

    pub fn eval<T: Real>(&self, point: T) -> Result<T, DomainError> {
        eval_node(&self.root, point)
    }

    /// Symbolic derivative with respect to the expression's variable.
    pub fn deriv(&self) -> ShapeExpr {
        let var = self.variable.unwrap_or(Variable::S).as_char();
        ShapeExpr {
            root: simplify(deriv_node(&self.root)),
            source: format!("d/d{var}({})", self.source),
            variable: self.variable,
        }
    }
}

impl fmt::Display for ShapeExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_node(f, &self.root, 0, self.variable.unwrap_or(Variable::S).as_char())
    }
}

fn format_const(v: f64) -> String {
    if v.fract() == 0.0 && v.abs() < 1e15 {
        format!("{}", v as i64)
    } else {
        format!("{v}")
    }
}

fn write_node(f: &mut fmt::Formatter<'_>, node: &Node, parent_prec: u8, var: char) -> fmt::Result {
    match node {
        Node::Const(v) if *v < 0.0 => write!(f, "({})", format_const(*v)),
        Node::Const(v) => write!(f, "{}", format_const(*v)),
        Node::Var => write!(f, "{var}"),
        Node::Unary(UnaryFn::Neg, a) => {
            write!(f, "-")?;
            write_node(f, a, 4, var)
        }
        Node::Unary(func, a) => {
            write!(f, "{}(", func.name())?;
            write_node(f, a, 0, var)?;
            write!(f, ")")
        }
        Node::Binary(op, a, b) => {
            let prec = op.precedence();
            let paren = prec <= parent_prec;
            if paren {
                write!(f, "(")?;
            }
            // Left operand of '^' and right operand of '-' / '/' need the
            // stricter binding to print unambiguously.
            let (lp, rp) = match op {
                BinOp::Pow => (prec, prec - 1),
                BinOp::Sub | BinOp::Div => (prec - 1, prec),
                _ => (prec - 1, prec - 1),
            };
            write_node(f, a, lp, var)?;
            write!(f, "{}", op.symbol())?;
            write_node(f, b, rp, var)?;
            if paren {
                write!(f, ")")?;
            }
            Ok(())
        }
    }
}

fn mentions_var(node: &Node) -> bool {
    match node {
        Node::Const(_) => false,
        Node::Var => true,
        Node::Unary(_, a) => mentions_var(a),
        Node::Binary(_, a, b) => mentions_var(a) || mentions_var(b),
    }
}

fn domain<T: Real>(kind: DomainErrorKind, at: T) -> DomainError {
    DomainError { kind, at: at.to_f64().unwrap_or(f64::NAN) }
}

fn checked<T: Real>(v: T, at: T) -> Result<T, DomainError> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(domain(DomainErrorKind::NonFinite, at))
    }
}

fn eval_node<T: Real>(node: &Node, x: T) -> Result<T, DomainError> {
    let v = match node {
        Node::Const(c) => T::lit(*c),
        Node::Var => x,
        Node::Unary(func, a) => {
            let a = eval_node(a, x)?;
            match func {
                UnaryFn::Sin => a.sin(),
                UnaryFn::Cos => a.cos(),
                UnaryFn::Tan => a.tan(),
                UnaryFn::Exp => a.exp(),
                UnaryFn::Log => {
                    if a <= T::zero() {
                        return Err(domain(DomainErrorKind::LogDomain, x));
                    }
                    a.ln()
                }
                UnaryFn::Sqrt => {
                    if a < T::zero() {
                        return Err(domain(DomainErrorKind::SqrtDomain, x));
                    }
                    a.sqrt()
                }
                UnaryFn::Neg => -a,
            }
        }
        Node::Binary(op, a, b) => {
            let lhs = eval_node(a, x)?;
            match op {
                BinOp::Add => lhs + eval_node(b, x)?,
                BinOp::Sub => lhs - eval_node(b, x)?,
                BinOp::Mul => lhs * eval_node(b, x)?,
                BinOp::Div => {
                    let rhs = eval_node(b, x)?;
                    if rhs == T::zero() {
                        return Err(domain(DomainErrorKind::DivisionByZero, x));
                    }
                    lhs / rhs
                }
                BinOp::Pow => match b.as_ref() {
                    Node::Const(c) if c.fract() == 0.0 && c.abs() <= i32::MAX as f64 => {
                        if *c < 0.0 && lhs == T::zero() {
                            return Err(domain(DomainErrorKind::DivisionByZero, x));
                        }
                        lhs.powi(*c as i32)
                    }
                    _ => {
                        let rhs = eval_node(b, x)?;
                        if lhs < T::zero() && rhs.fract() != T::zero() {
                            return Err(domain(DomainErrorKind::PowDomain, x));
                        }
                        if lhs == T::zero() && rhs < T::zero() {
                            return Err(domain(DomainErrorKind::DivisionByZero, x));
                        }
                        lhs.powf(rhs)
                    }
                },
            }
        }
    };
    checked(v, x)
}

fn c(v: f64) -> Node {
    Node::Const(v)
}
fn un(f: UnaryFn, a: Node) -> Node {
    Node::Unary(f, Box::new(a))
}
fn bin(op: BinOp, a: Node, b: Node) -> Node {
    Node::Binary(op, Box::new(a), Box::new(b))
}

fn deriv_node(node: &Node) -> Node {
    use BinOp::*;
    match node {
        Node::Const(_) => c(0.0),
        Node::Var => c(1.0),
        Node::Unary(func, a) => {
            let da = deriv_node(a);
            let a = (**a).clone();
            let outer = match func {
                UnaryFn::Neg => return un(UnaryFn::Neg, da),
                UnaryFn::Sin => un(UnaryFn::Cos, a),
                UnaryFn::Cos => un(UnaryFn::Neg, un(UnaryFn::Sin, a)),
                // sec^2 = 1 / cos^2
                UnaryFn::Tan => bin(Div, c(1.0), bin(Pow, un(UnaryFn::Cos, a), c(2.0))),
                UnaryFn::Exp => un(UnaryFn::Exp, a),
                UnaryFn::Log => bin(Div, c(1.0), a),
                UnaryFn::Sqrt => bin(Div, c(1.0), bin(Mul, c(2.0), un(UnaryFn::Sqrt, a))),
            };
            bin(Mul, outer, da)
        }
        Node::Binary(op, a, b) => {
            let (da, db) = (deriv_node(a), deriv_node(b));
            let (a, b) = ((**a).clone(), (**b).clone());
            match op {
                Add => bin(Add, da, db),
                Sub => bin(Sub, da, db),
                Mul => bin(Add, bin(Mul, da, b.clone()), bin(Mul, a, db)),
                Div => bin(Div, bin(Sub, bin(Mul, da, b.clone()), bin(Mul, a, db)), bin(Pow, b, c(2.0))),
                Pow => {
                    if !mentions_var(&b) {
                        // d(a^k) = k a^(k-1) a'
                        bin(Mul, bin(Mul, b.clone(), bin(Pow, a, bin(Sub, b, c(1.0)))), da)
                    } else {
                        // d(a^b) = a^b (b' ln a + b a'/a)
                        bin(
                            Mul,
                            bin(Pow, a.clone(), b.clone()),
                            bin(Add, bin(Mul, db, un(UnaryFn::Log, a.clone())), bin(Div, bin(Mul, b, da), a)),
                        )
                    }
                }
            }
        }
    }
}

/// Constant folding and the unit/zero rules. Never changes the value of the
/// expression at points where the original is defined.
fn simplify(node: Node) -> Node {
    use BinOp::*;
    match node {
        Node::Unary(f, a) => {
            let a = simplify(*a);
            match (f, &a) {
                (UnaryFn::Neg, Node::Const(v)) => c(-v),
                (UnaryFn::Neg, Node::Unary(UnaryFn::Neg, inner)) => (**inner).clone(),
                _ => un(f, a),
            }
        }
        Node::Binary(op, a, b) => {
            let a = simplify(*a);
            let b = simplify(*b);
            match (op, &a, &b) {
                (Add, Node::Const(x), Node::Const(y)) => c(x + y),
                (Sub, Node::Const(x), Node::Const(y)) => c(x - y),
                (Mul, Node::Const(x), Node::Const(y)) => c(x * y),
                (Add, Node::Const(z), _) if *z == 0.0 => b,
                (Add | Sub, _, Node::Const(z)) if *z == 0.0 => a,
                (Sub, Node::Const(z), _) if *z == 0.0 => un(UnaryFn::Neg, b),
                (Mul, Node::Const(z), _) | (Mul, _, Node::Const(z)) if *z == 0.0 => c(0.0),
                (Mul, Node::Const(o), _) if *o == 1.0 => b,
                (Mul, _, Node::Const(o)) if *o == 1.0 => a,
                (Div, Node::Const(z), _) if *z == 0.0 => c(0.0),
                (Div, _, Node::Const(o)) if *o == 1.0 => a,
                (Pow, _, Node::Const(o)) if *o == 1.0 => a,
                (Pow, _, Node::Const(z)) if *z == 0.0 => c(1.0),
                _ => bin(op, a, b),
            }
        }
        other => other,
    }
}

struct Parser {
    chars: Vec<(usize, char)>,
    idx: usize,
    variable: Option<Variable>,
}

impl Parser {
    fn new(text: &str) -> Self {
        Parser { chars: text.chars().enumerate().collect(), idx: 0, variable: None }
    }

    fn peek(&self) -> Option<&(usize, char)> {
        self.chars.get(self.idx)
    }

    fn at_end(&self) -> bool {
        self.idx >= self.chars.len()
    }

    fn pos(&self) -> usize {
        self.peek().map(|p| p.0).unwrap_or(self.chars.len())
    }

    fn skip_ws(&mut self) {
        while matches!(self.peek(), Some((_, c)) if c.is_whitespace()) {
            self.idx += 1;
        }
    }

    fn eat(&mut self, want: char) -> bool {
        self.skip_ws();
        if matches!(self.peek(), Some(&(_, c)) if c == want) {
            self.idx += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, want: char) -> Result<(), ParseError> {
        if self.eat(want) {
            Ok(())
        } else {
            Err(self.error_here(ParseErrorKind::Expected(want)))
        }
    }

    fn error_here(&self, kind: ParseErrorKind) -> ParseError {
        let kind = match (kind, self.peek()) {
            (ParseErrorKind::Expected(_), None) => ParseErrorKind::UnexpectedEnd,
            (k, _) => k,
        };
        ParseError { kind, position: self.pos() }
    }

    fn expr(&mut self) -> Result<Node, ParseError> {
        let mut lhs = self.term()?;
        loop {
            if self.eat('+') {
                lhs = bin(BinOp::Add, lhs, self.term()?);
            } else if self.eat('-') {
                lhs = bin(BinOp::Sub, lhs, self.term()?);
            } else {
                return Ok(lhs);
            }
        }
    }

    fn term(&mut self) -> Result<Node, ParseError> {
        let mut lhs = self.factor()?;
        loop {
            if self.eat('*') {
                lhs = bin(BinOp::Mul, lhs, self.factor()?);
            } else if self.eat('/') {
                lhs = bin(BinOp::Div, lhs, self.factor()?);
            } else {
                return Ok(lhs);
            }
        }
    }

    fn factor(&mut self) -> Result<Node, ParseError> {
        let base = self.base()?;
        if self.eat('^') {
            Ok(bin(BinOp::Pow, base, self.factor()?))
        } else {
            Ok(base)
        }
    }

    fn base(&mut self) -> Result<Node, ParseError> {
        self.skip_ws();
        let Some(&(pos, ch)) = self.peek() else {
            return Err(ParseError { kind: ParseErrorKind::UnexpectedEnd, position: self.chars.len() });
        };
        if ch == '-' {
            self.idx += 1;
            return Ok(un(UnaryFn::Neg, self.base()?));
        }
        if ch == '(' {
            self.idx += 1;
            let inner = self.expr()?;
            self.expect(')')?;
            return Ok(inner);
        }
        if ch.is_ascii_digit() || ch == '.' {
            return self.number();
        }
        if ch.is_ascii_alphabetic() {
            let start = self.idx;
            while matches!(self.peek(), Some((_, c)) if c.is_ascii_alphanumeric() || *c == '_') {
                self.idx += 1;
            }
            let name: String = self.chars[start..self.idx].iter().map(|p| p.1).collect();
            let var = match name.as_str() {
                "s" => Some(Variable::S),
                "t" => Some(Variable::T),
                _ => None,
            };
            if let Some(var) = var {
                match self.variable {
                    Some(v) if v != var => {
                        return Err(ParseError { kind: ParseErrorKind::MixedVariables, position: pos })
                    }
                    _ => self.variable = Some(var),
                }
                return Ok(Node::Var);
            }
            let Some(func) = UnaryFn::from_name(&name) else {
                return Err(ParseError { kind: ParseErrorKind::UnknownIdentifier(name), position: pos });
            };
            self.expect('(')?;
            let arg = self.expr()?;
            self.expect(')')?;
            return Ok(un(func, arg));
        }
        Err(ParseError { kind: ParseErrorKind::UnexpectedChar(ch), position: pos })
    }

    fn number(&mut self) -> Result<Node, ParseError> {
        let start = self.idx;
        let pos = self.pos();
        let digits = |p: &mut Self| {
            while matches!(p.peek(), Some((_, c)) if c.is_ascii_digit()) {
                p.idx += 1;
            }
        };
        digits(self);
        if matches!(self.peek(), Some((_, '.'))) {
            self.idx += 1;
            digits(self);
        }
        if matches!(self.peek(), Some((_, 'e' | 'E'))) {
            // Only an exponent when followed by digits, so "2exp(s)" stays an error
            // about the identifier rather than a bad number.
            let save = self.idx;
            self.idx += 1;
            if matches!(self.peek(), Some((_, '+' | '-'))) {
                self.idx += 1;
            }
            if matches!(self.peek(), Some((_, c)) if c.is_ascii_digit()) {
                digits(self);
            } else {
                self.idx = save;
            }
        }
        let literal: String = self.chars[start..self.idx].iter().map(|p| p.1).collect();
        literal
            .parse::<f64>()
            .map(Node::Const)
            .map_err(|_| ParseError { kind: ParseErrorKind::BadNumber(literal), position: pos })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ev(text: &str, x: f64) -> f64 {
        ShapeExpr::parse(text).unwrap().eval(x).unwrap()
    }

    #[test]
    fn parse_examples() {
        assert_eq!(ev("s", 3.0), 3.0);
        assert_eq!(ev("s^2 + 1/s", 2.0), 4.5);
        assert_eq!(ev("sin(s)*cos(s)", 0.0), 0.0);
    }

    #[test]
    fn eval_examples() {
        assert_eq!(ev("1", 7.0), 1.0);
        assert_eq!(ev("s^3", 2.0), 8.0);
        let err = ShapeExpr::parse("1/s").unwrap().eval(0.0f64).unwrap_err();
        assert_eq!(err.kind, DomainErrorKind::DivisionByZero);
    }

    #[test]
    fn deriv_examples() {
        let d = |t: &str, x: f64| ShapeExpr::parse(t).unwrap().deriv().eval(x).unwrap();
        assert_eq!(d("s^2", 3.0), 6.0);
        assert_eq!(d("sin(s)", 0.0), 1.0);
        assert_eq!(d("1/s", 2.0), -0.25);
    }

    #[test]
    fn power_is_right_associative_and_minus_binds_to_base() {
        assert_eq!(ev("2^3^2", 0.0), 512.0);
        assert_eq!(ev("-s^2", 3.0), 9.0);
        assert_eq!(ev("0-s^2", 3.0), -9.0);
        assert_eq!(ev("--s", 2.0), 2.0);
    }

    #[test]
    fn whitespace_is_insignificant() {
        assert_eq!(ev("  s *  ( 1+ s ) ", 2.0), 6.0);
        assert_eq!(ev("1.5e1 + .5", 0.0), 15.5);
    }

    #[test]
    fn parse_errors_carry_positions() {
        let e = ShapeExpr::parse("").unwrap_err();
        assert_eq!(e.kind, ParseErrorKind::Empty);
        let e = ShapeExpr::parse("   ").unwrap_err();
        assert_eq!(e.kind, ParseErrorKind::Empty);
        let e = ShapeExpr::parse("s + x").unwrap_err();
        assert_eq!(e.kind, ParseErrorKind::UnknownIdentifier("x".into()));
        assert_eq!(e.position, 4);
        let e = ShapeExpr::parse("s + ").unwrap_err();
        assert_eq!(e.kind, ParseErrorKind::UnexpectedEnd);
        let e = ShapeExpr::parse("(s").unwrap_err();
        assert_eq!(e.kind, ParseErrorKind::UnexpectedEnd);
        let e = ShapeExpr::parse("s $ 1").unwrap_err();
        assert_eq!(e.kind, ParseErrorKind::UnexpectedChar('$'));
        assert_eq!(e.position, 2);
        let e = ShapeExpr::parse("s*t").unwrap_err();
        assert_eq!(e.kind, ParseErrorKind::MixedVariables);
        let e = ShapeExpr::parse("sin s").unwrap_err();
        assert_eq!(e.kind, ParseErrorKind::Expected('('));
    }

    #[test]
    fn domain_errors_are_flagged() {
        let kind = |t: &str, x: f64| ShapeExpr::parse(t).unwrap().eval(x).unwrap_err().kind;
        assert_eq!(kind("log(s)", 0.0), DomainErrorKind::LogDomain);
        assert_eq!(kind("sqrt(s)", -1.0), DomainErrorKind::SqrtDomain);
        assert_eq!(kind("s^0.5", -1.0), DomainErrorKind::PowDomain);
        assert_eq!(kind("s^-2", 0.0), DomainErrorKind::DivisionByZero);
        assert_eq!(kind("exp(s)", 1000.0), DomainErrorKind::NonFinite);
    }

    #[test]
    fn constant_detection() {
        assert!(ShapeExpr::parse("0").unwrap().is_identically_zero());
        assert!(ShapeExpr::parse("1 - 1").unwrap().is_identically_zero());
        assert!(!ShapeExpr::parse("1").unwrap().is_identically_zero());
        assert!(!ShapeExpr::parse("0*t").unwrap().is_constant());
        assert!(ShapeExpr::parse("sqrt(2)").unwrap().is_constant());
    }

    #[test]
    fn display_reparses_to_same_values() {
        for text in ["-s^2", "2^3^2", "1/(s-1)/2", "s-(1-s)", "sin(s)^2", "(-2)^s"] {
            let e = ShapeExpr::parse(text).unwrap();
            let again = ShapeExpr::parse(&e.to_string()).unwrap();
            for x in [0.3, 1.7, 2.5] {
                assert_eq!(e.eval(x).ok(), again.eval(x).ok(), "{text} -> {e}");
            }
        }
    }

    #[test]
    fn generic_over_f32() {
        let e = ShapeExpr::parse("s^2 + 1/s").unwrap();
        assert_eq!(e.eval(2.0f32).unwrap(), 4.5f32);
    }
}
