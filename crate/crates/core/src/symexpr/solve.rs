use std::collections::BTreeSet;

use super::expr::Monomial;
use super::generator::{GeneratorSym, SymmetryResidual};
use super::scalar::ExactScalar;

/// A generator affine in named unknown scalars:
/// `base + sum_k c_k * terms[k].1`.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Ansatz {
    pub base: GeneratorSym,
    pub terms: Vec<(String, GeneratorSym)>,
}

impl Ansatz {
    pub fn unknowns(&self) -> Vec<String> {
        self.terms.iter().map(|(n, _)| n.clone()).collect()
    }

    /// The generator for specific values of the unknowns.
    pub fn instantiate(&self, values: &[ExactScalar]) -> GeneratorSym {
        self.terms.iter().zip(values).fold(self.base.clone(), |acc, ((_, g), c)| &acc + &g.scale(c))
    }
}

/// Solution set of the determining equations of an [`Ansatz`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SolutionSet {
    /// No choice of the unknowns gives a symmetry.
    Inconsistent,
    /// `particular + span(nullspace)`; unique when `nullspace` is empty.
    Affine { unknowns: Vec<String>, particular: Vec<ExactScalar>, nullspace: Vec<Vec<ExactScalar>> },
}

impl SolutionSet {
    pub fn unique(&self) -> Option<&[ExactScalar]> {
        match self {
            SolutionSet::Affine { particular, nullspace, .. } if nullspace.is_empty() => Some(particular),
            _ => None,
        }
    }

    pub fn dimension(&self) -> Option<usize> {
        match self {
            SolutionSet::Inconsistent => None,
            SolutionSet::Affine { nullspace, .. } => Some(nullspace.len()),
        }
    }
}

/// Matches every monomial of the on-shell residual to zero and solves the
/// resulting linear system exactly.
///
/// The residual is linear in the generator, so the system is assembled from
/// the residuals of `base` and of each unknown's generator separately.
pub fn solve_coefficients(ansatz: &Ansatz) -> SolutionSet {
    let r0 = ansatz.base.symmetry_residual();
    let rk: Vec<_> = ansatz.terms.iter().map(|(_, g)| g.symmetry_residual()).collect();
    let n = rk.len();

    let mut rows: Vec<Vec<ExactScalar>> = Vec::new();
    for first in [true, false] {
        let pick = |r: &SymmetryResidual| if first { r.r1.clone() } else { r.r2.clone() };
        let e0 = pick(&r0);
        let ek: Vec<_> = rk.iter().map(pick).collect();
        let monomials: BTreeSet<Monomial> = e0
            .terms()
            .map(|(m, _)| m.clone())
            .chain(ek.iter().flat_map(|e| e.terms().map(|(m, _)| m.clone())))
            .collect();
        for m in monomials {
            let mut row: Vec<ExactScalar> = ek.iter().map(|e| e.coeff(&m)).collect();
            row.push(-&e0.coeff(&m));
            rows.push(row);
        }
    }

    // reduced row echelon form
    let mut pivots = Vec::new();
    let mut r = 0;
    for col in 0..n {
        let Some(p) = (r..rows.len()).find(|&i| !rows[i][col].is_zero()) else {
            continue;
        };
        rows.swap(r, p);
        let inv = rows[r][col].inverse().expect("nonzero pivot");
        rows[r] = rows[r].iter().map(|v| v * &inv).collect();
        for i in 0..rows.len() {
            if i != r && !rows[i][col].is_zero() {
                let factor = rows[i][col].clone();
                let pivot_row = rows[r].clone();
                for (dst, src) in rows[i].iter_mut().zip(&pivot_row) {
                    *dst = &*dst - &(&factor * src);
                }
            }
        }
        pivots.push(col);
        r += 1;
    }
    if rows[r..].iter().any(|row| !row[n].is_zero()) {
        return SolutionSet::Inconsistent;
    }

    let mut particular = vec![ExactScalar::zero(); n];
    for (i, &col) in pivots.iter().enumerate() {
        particular[col] = rows[i][n].clone();
    }
    let nullspace = (0..n)
        .filter(|c| !pivots.contains(c))
        .map(|free| {
            let mut v = vec![ExactScalar::zero(); n];
            v[free] = ExactScalar::one();
            for (i, &col) in pivots.iter().enumerate() {
                v[col] = -&rows[i][free];
            }
            v
        })
        .collect();
    SolutionSet::Affine { unknowns: ansatz.unknowns(), particular, nullspace }
}
