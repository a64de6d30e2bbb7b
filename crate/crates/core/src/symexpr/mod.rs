//! Exact point-symmetry checks for the reduced system
//! `u1'' + 2 u1 = 0`, `u2' = 0` over the field Q(sqrt 2, i).

mod catalog;
mod expr;
mod generator;
mod parse;
mod scalar;
mod solve;

pub use catalog::{
    catalog, catalog_texts, g6_ansatz, g8_ansatz, scaling_ansatz, Coefficient, G6_ANSATZ, G8_ANSATZ, SCALING_ANSATZ,
};
pub use expr::{Monomial, SymExpr};
pub use generator::{GeneratorSym, Prolongation, SymmetryResidual};
pub use parse::{parse_ansatz, parse_generator, GeneratorParseError};
pub use scalar::ExactScalar;
pub use solve::{solve_coefficients, Ansatz, SolutionSet};
