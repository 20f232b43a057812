use super::{Formula, Relation};

/// Rewrites every atom into the form `g > 0` under `!`, `&`, `|`.
///
/// `g = 0` becomes `!(g > 0) & !(-g > 0)`, `g != 0` becomes
/// `(g > 0) | (-g > 0)`, `g >= 0` becomes `!(-g > 0)`, `g < 0` becomes
/// `-g > 0` and `g <= 0` becomes `!(g > 0)`.
pub fn normalize_atoms(formula: &Formula) -> Formula {
    match formula {
        Formula::Atom { poly, rel } => {
            let pos = || Formula::gt(poly.clone());
            let neg = || Formula::gt(poly.neg());
            match rel {
                Relation::Gt => pos(),
                Relation::Lt => neg(),
                Relation::Le => Formula::not(pos()),
                Relation::Ge => Formula::not(neg()),
                Relation::Eq => Formula::and(Formula::not(pos()), Formula::not(neg())),
                Relation::Ne => Formula::or(pos(), neg()),
            }
        }
        Formula::Not(f) => Formula::not(normalize_atoms(f)),
        Formula::And(a, b) => Formula::and(normalize_atoms(a), normalize_atoms(b)),
        Formula::Or(a, b) => Formula::or(normalize_atoms(a), normalize_atoms(b)),
    }
}

/// True iff every atom is of the form `g > 0`.
pub fn is_atom_normalized(formula: &Formula) -> bool {
    match formula {
        Formula::Atom { rel, .. } => *rel == Relation::Gt,
        Formula::Not(f) => is_atom_normalized(f),
        Formula::And(a, b) | Formula::Or(a, b) => is_atom_normalized(a) && is_atom_normalized(b),
    }
}
