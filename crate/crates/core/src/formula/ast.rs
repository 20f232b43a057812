use std::fmt;
use std::str::FromStr;

use crate::poly::{parse_poly, Assignment, Lexer, PolyError, Polynomial, TokenKind, VarKind};

/// Comparison of a polynomial against zero.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Relation {
    Gt,
    Ge,
    Eq,
    Ne,
    Lt,
    Le,
}

impl Relation {
    pub fn symbol(self) -> &'static str {
        match self {
            Relation::Gt => ">",
            Relation::Ge => ">=",
            Relation::Eq => "=",
            Relation::Ne => "!=",
            Relation::Lt => "<",
            Relation::Le => "<=",
        }
    }

    /// Whether a value with the given sign (-1, 0, 1) satisfies `value REL 0`.
    pub fn holds(self, sign: i32) -> bool {
        match self {
            Relation::Gt => sign > 0,
            Relation::Ge => sign >= 0,
            Relation::Eq => sign == 0,
            Relation::Ne => sign != 0,
            Relation::Lt => sign < 0,
            Relation::Le => sign <= 0,
        }
    }
}

/// Quantifier-free formula whose atoms compare a polynomial with zero.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Formula {
    Atom { poly: Polynomial, rel: Relation },
    Not(Box<Formula>),
    And(Box<Formula>, Box<Formula>),
    Or(Box<Formula>, Box<Formula>),
}

impl Formula {
    pub fn atom(poly: Polynomial, rel: Relation) -> Formula {
        Formula::Atom { poly: poly.canonicalize(), rel }
    }

    pub fn gt(poly: Polynomial) -> Formula {
        Formula::atom(poly, Relation::Gt)
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(f: Formula) -> Formula {
        Formula::Not(Box::new(f))
    }

    pub fn and(a: Formula, b: Formula) -> Formula {
        Formula::And(Box::new(a), Box::new(b))
    }

    pub fn or(a: Formula, b: Formula) -> Formula {
        Formula::Or(Box::new(a), Box::new(b))
    }

    pub fn evaluate(&self, a: &Assignment) -> Result<bool, PolyError> {
        Ok(match self {
            Formula::Atom { poly, rel } => rel.holds(poly.evaluate(a)?.signum()),
            Formula::Not(f) => !f.evaluate(a)?,
            Formula::And(x, y) => x.evaluate(a)? && y.evaluate(a)?,
            Formula::Or(x, y) => x.evaluate(a)? || y.evaluate(a)?,
        })
    }

    /// Input length: atoms, connectives, and polynomial terms.
    pub fn size(&self) -> usize {
        match self {
            Formula::Atom { poly, .. } => 1 + poly.terms().len(),
            Formula::Not(f) => 1 + f.size(),
            Formula::And(x, y) | Formula::Or(x, y) => 1 + x.size() + y.size(),
        }
    }

    pub fn atom_count(&self) -> usize {
        match self {
            Formula::Atom { .. } => 1,
            Formula::Not(f) => f.atom_count(),
            Formula::And(x, y) | Formula::Or(x, y) => x.atom_count() + y.atom_count(),
        }
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Formula::Atom { poly, rel } => write!(f, "{poly} {} 0", rel.symbol()),
            Formula::Not(x) => write!(f, "!({x})"),
            Formula::And(x, y) => write!(f, "({x}) & ({y})"),
            Formula::Or(x, y) => write!(f, "({x}) | ({y})"),
        }
    }
}

fn err(pos: usize, msg: impl Into<String>) -> PolyError {
    PolyError::Parse { pos, msg: msg.into() }
}

/// Parses the formula grammar:
///
/// ```text
/// formula := or
/// or      := and { "|" and }
/// and     := not { "&" not }
/// not     := "!" not | "(" formula ")" | atom
/// atom    := poly rel poly
/// rel     := ">" | ">=" | "=" | "!=" | "<" | "<="
/// ```
///
/// Only `x<i>` variables are accepted. Atoms are normalized to
/// `lhs - rhs REL 0`.
pub fn parse_formula(text: &str) -> Result<Formula, PolyError> {
    let mut lx = Lexer::new(text)?;
    let f = parse_or(&mut lx)?;
    if lx.peek().is_some() {
        return Err(err(lx.pos(), "trailing input"));
    }
    Ok(f)
}

fn parse_or(lx: &mut Lexer) -> Result<Formula, PolyError> {
    let mut f = parse_and(lx)?;
    while lx.eat(&TokenKind::Pipe) {
        f = Formula::or(f, parse_and(lx)?);
    }
    Ok(f)
}

fn parse_and(lx: &mut Lexer) -> Result<Formula, PolyError> {
    let mut f = parse_not(lx)?;
    while lx.eat(&TokenKind::Amp) {
        f = Formula::and(f, parse_not(lx)?);
    }
    Ok(f)
}

fn parse_not(lx: &mut Lexer) -> Result<Formula, PolyError> {
    if lx.eat(&TokenKind::Bang) {
        return Ok(Formula::not(parse_not(lx)?));
    }
    if lx.eat(&TokenKind::LParen) {
        let f = parse_or(lx)?;
        if !lx.eat(&TokenKind::RParen) {
            return Err(err(lx.pos(), "expected ')'"));
        }
        return Ok(f);
    }
    parse_atom(lx)
}

fn parse_atom(lx: &mut Lexer) -> Result<Formula, PolyError> {
    let original_only = |v: crate::poly::VarId| v.kind == VarKind::Original;
    let lhs = parse_poly(lx, original_only)?;
    let pos = lx.pos();
    let rel = match lx.bump().map(|t| t.kind) {
        Some(TokenKind::Gt) => Relation::Gt,
        Some(TokenKind::Ge) => Relation::Ge,
        Some(TokenKind::Eq) => Relation::Eq,
        Some(TokenKind::Ne) => Relation::Ne,
        Some(TokenKind::Lt) => Relation::Lt,
        Some(TokenKind::Le) => Relation::Le,
        _ => return Err(err(pos, "expected relation")),
    };
    let rhs = parse_poly(lx, original_only)?;
    Ok(Formula::atom(lhs.sub(&rhs), rel))
}

impl FromStr for Formula {
    type Err = PolyError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_formula(s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn poly(s: &str) -> Polynomial {
        s.parse().unwrap()
    }

    #[test]
    fn single_atom() {
        assert_eq!(parse_formula("x1*x1 - 1 = 0").unwrap(), Formula::atom(poly("x1*x1-1"), Relation::Eq));
        assert_eq!(parse_formula("x1 >= 0").unwrap(), Formula::atom(poly("x1"), Relation::Ge));
    }

    #[test]
    fn structure_and_precedence() {
        let f = parse_formula("!(x1 > 0) & (x2 > 0)").unwrap();
        assert_eq!(f, Formula::and(Formula::not(Formula::gt(poly("x1"))), Formula::gt(poly("x2"))));
        let g = parse_formula("x1 > 0 | x2 > 0 & x3 > 0").unwrap();
        assert!(matches!(g, Formula::Or(_, _)));
    }

    #[test]
    fn rhs_moves_left() {
        assert_eq!(parse_formula("x1*x1 = x2 + 1").unwrap(), Formula::atom(poly("x1*x1-x2-1"), Relation::Eq));
    }

    #[test]
    fn errors_carry_positions() {
        match parse_formula("x1 > 0 & (x2 <") {
            Err(PolyError::Parse { pos, .. }) => assert_eq!(pos, 14),
            other => panic!("{other:?}"),
        }
        match parse_formula("x1 > y2") {
            Err(PolyError::Parse { pos, msg }) => {
                assert_eq!(pos, 5);
                assert!(msg.contains("unknown variable"));
            }
            other => panic!("{other:?}"),
        }
        assert!(parse_formula("foo = 0").is_err());
        assert!(parse_formula("x1 = 0 0").is_err());
    }
}
