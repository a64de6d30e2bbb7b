//! The nine point generators of `u1'' + 2 u1 = 0`, `u2' = 0`, in printed
//! and corrected form.

use super::generator::GeneratorSym;
use super::parse::{parse_ansatz, parse_generator};
use super::solve::Ansatz;

/// Internal coefficient of the `G6` and `G8` families.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Coefficient {
    /// `+-i` as printed.
    Printed,
    /// `+-sqrt2*i` as determined by the solver.
    Corrected,
}

impl Coefficient {
    fn text(self) -> &'static str {
        match self {
            Coefficient::Printed => "i",
            Coefficient::Corrected => "sqrt2*i",
        }
    }
}

/// `(label, text)` for every catalog generator.
pub fn catalog_texts(coeff: Coefficient) -> Vec<(&'static str, String)> {
    let c = coeff.text();
    vec![
        ("G1", "2*u1*d_u1 + u2*d_u2".to_string()),
        ("G2", "d_th".to_string()),
        ("G3", "u1*d_u1".to_string()),
        ("G4+", "exp(sqrt2*i*th)*d_u1".to_string()),
        ("G4-", "exp(-sqrt2*i*th)*d_u1".to_string()),
        ("G6+", format!("exp(2*sqrt2*i*th)*(d_th + {c}*u1*d_u1)")),
        ("G6-", format!("exp(-2*sqrt2*i*th)*(d_th - {c}*u1*d_u1)")),
        ("G8+", format!("exp(sqrt2*i*th)*(u1*d_th + {c}*u1^2*d_u1)")),
        ("G8-", format!("exp(-sqrt2*i*th)*(u1*d_th - {c}*u1^2*d_u1)")),
    ]
}

/// The catalog generators, parsed.
pub fn catalog(coeff: Coefficient) -> Vec<(&'static str, GeneratorSym)> {
    catalog_texts(coeff)
        .into_iter()
        .map(|(label, text)| (label, parse_generator(&text).expect("catalog text parses")))
        .collect()
}

/// `G6` family with the internal coefficient left as the unknown `c`.
pub const G6_ANSATZ: &str = "exp(2*sqrt2*i*th)*(d_th + c*u1*d_u1)";
/// `G8` family with the internal coefficient left as the unknown `c`.
pub const G8_ANSATZ: &str = "exp(sqrt2*i*th)*(u1*d_th + c*u1^2*d_u1)";
/// Span of translations and the two scalings.
pub const SCALING_ANSATZ: &str = "c1*d_th + c2*u1*d_u1 + c3*u2*d_u2";

pub fn g6_ansatz() -> Ansatz {
    parse_ansatz(G6_ANSATZ, &["c"]).expect("ansatz parses")
}

pub fn g8_ansatz() -> Ansatz {
    parse_ansatz(G8_ANSATZ, &["c"]).expect("ansatz parses")
}

pub fn scaling_ansatz() -> Ansatz {
    parse_ansatz(SCALING_ANSATZ, &["c1", "c2", "c3"]).expect("ansatz parses")
}
