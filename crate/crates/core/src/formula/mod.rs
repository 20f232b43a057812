//! Formula frontend: parses quantifier-free formulas over the reals and
//! reduces them to one polynomial equation in standard form.
//!
//! The chain is [`parse_formula`] → [`normalize_atoms`] →
//! [`to_equation_system`] → [`flatten`] → [`to_single_polynomial`];
//! [`lift_witness`] carries a satisfying point through the same chain.

mod ast;
mod normalize;
mod system;

pub use ast::{parse_formula, Formula, Relation};
pub use normalize::{is_atom_normalized, normalize_atoms};
pub use system::{
    atom_gadget, flatten, lift_witness, to_equation_system, to_single_polynomial, BinOp, Connective, EquationSystem,
    Expr, Rewrite, SystemError, WitnessAssignment,
};

/// Runs the whole chain on a formula.
pub fn reduce_formula(formula: &Formula) -> Result<(EquationSystem, crate::poly::Polynomial), SystemError> {
    let system = flatten(&to_equation_system(&normalize_atoms(formula))?);
    let poly = to_single_polynomial(&system);
    Ok((system, poly))
}
