use std::fmt;
use std::ops::{Add, Sub};

use super::expr::SymExpr;
use super::scalar::ExactScalar;

/// A point generator `xi d_th + eta1 d_u1 + eta2 d_u2` on `(th, u1, u2)`.
#[derive(Clone, PartialEq, Eq, Debug, Default)]
pub struct GeneratorSym {
    pub xi: SymExpr,
    pub eta1: SymExpr,
    pub eta2: SymExpr,
}

/// Second prolongation coefficients, computed off-shell.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Prolongation {
    pub eta1_1: SymExpr,
    pub eta1_2: SymExpr,
    pub eta2_1: SymExpr,
}

/// On-shell determining-equation residuals of the reduced system
/// `u1'' + 2 u1 = 0`, `u2' = 0`.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct SymmetryResidual {
    pub r1: SymExpr,
    pub r2: SymExpr,
}

impl SymmetryResidual {
    pub fn is_zero(&self) -> bool {
        self.r1.is_zero() && self.r2.is_zero()
    }

    pub fn conj(&self) -> Self {
        SymmetryResidual { r1: self.r1.conj(), r2: self.r2.conj() }
    }
}

impl GeneratorSym {
    /// Fails if a coefficient mentions a derivative symbol.
    pub fn new(xi: SymExpr, eta1: SymExpr, eta2: SymExpr) -> Result<Self, String> {
        let g = GeneratorSym { xi, eta1, eta2 };
        if g.is_point() {
            Ok(g)
        } else {
            Err("point generator coefficients may depend on th, u1, u2 only".into())
        }
    }

    pub fn zero() -> Self {
        Self::default()
    }

    pub fn is_point(&self) -> bool {
        self.xi.is_point() && self.eta1.is_point() && self.eta2.is_point()
    }

    pub fn is_zero(&self) -> bool {
        self.xi.is_zero() && self.eta1.is_zero() && self.eta2.is_zero()
    }

    pub fn scale(&self, c: &ExactScalar) -> Self {
        GeneratorSym { xi: self.xi.scale(c), eta1: self.eta1.scale(c), eta2: self.eta2.scale(c) }
    }

    /// Multiplies every coefficient by `e`.
    pub fn times(&self, e: &SymExpr) -> Self {
        GeneratorSym { xi: &self.xi * e, eta1: &self.eta1 * e, eta2: &self.eta2 * e }
    }

    pub fn conj(&self) -> Self {
        GeneratorSym { xi: self.xi.conj(), eta1: self.eta1.conj(), eta2: self.eta2.conj() }
    }

    /// `eta^(k) = D eta^(k-1) - u^(k) D xi`.
    pub fn prolong2(&self) -> Prolongation {
        let dxi = self.xi.total_derivative();
        let eta1_1 = &self.eta1.total_derivative() - &(&SymExpr::u1(1) * &dxi);
        let eta1_2 = &eta1_1.total_derivative() - &(&SymExpr::u1(2) * &dxi);
        let eta2_1 = &self.eta2.total_derivative() - &(&SymExpr::u2(1) * &dxi);
        Prolongation { eta1_1, eta1_2, eta2_1 }
    }

    /// Zero exactly when `self` is a point symmetry of the reduced system.
    pub fn symmetry_residual(&self) -> SymmetryResidual {
        let p = self.prolong2();
        let r1 = (&p.eta1_2 + &self.eta1.scale(&ExactScalar::int(2))).substitute_onshell();
        let r2 = p.eta2_1.substitute_onshell();
        SymmetryResidual { r1, r2 }
    }
}

impl Add for &GeneratorSym {
    type Output = GeneratorSym;
    fn add(self, o: &GeneratorSym) -> GeneratorSym {
        GeneratorSym { xi: &self.xi + &o.xi, eta1: &self.eta1 + &o.eta1, eta2: &self.eta2 + &o.eta2 }
    }
}

impl Sub for &GeneratorSym {
    type Output = GeneratorSym;
    fn sub(self, o: &GeneratorSym) -> GeneratorSym {
        GeneratorSym { xi: &self.xi - &o.xi, eta1: &self.eta1 - &o.eta1, eta2: &self.eta2 - &o.eta2 }
    }
}

impl fmt::Display for GeneratorSym {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts = Vec::new();
        for (c, d) in [(&self.xi, "d_th"), (&self.eta1, "d_u1"), (&self.eta2, "d_u2")] {
            if !c.is_zero() {
                parts.push(format!("({c})*{d}"));
            }
        }
        if parts.is_empty() {
            f.write_str("0")
        } else {
            f.write_str(&parts.join(" + "))
        }
    }
}
