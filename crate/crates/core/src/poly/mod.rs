//! Exact sparse multivariate polynomials in standard form.
//!
//! A polynomial is a list of signed monomials `±x_{i1}·…·x_{ik}`; integer
//! coefficients are represented by repeating a monomial. The canonical form
//! cancels `+m`/`-m` pairs and orders terms by descending graded-lex order,
//! so `x1*x1-1` and `-1+x1*x1` canonicalize to the same term list.

mod divide;
mod parse;
mod var;

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::number::{Number, Rational};

pub use divide::is_multiple_of;
pub(crate) use parse::{parse_poly, Lexer, TokenKind};
pub use var::{VarClass, VarId, VarKind};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PolyError {
    #[error("no binding for variable {0}")]
    MissingBinding(VarId),
    #[error("operation undefined for the zero polynomial")]
    ZeroPolynomial,
    #[error("variable {0} occurs with an odd power where only its square is known")]
    OddPower(VarId),
    #[error("parse error at byte {pos}: {msg}")]
    Parse { pos: usize, msg: String },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn flip(self) -> Sign {
        match self {
            Sign::Plus => Sign::Minus,
            Sign::Minus => Sign::Plus,
        }
    }

    pub fn times(self, other: Sign) -> Sign {
        if self == other {
            Sign::Plus
        } else {
            Sign::Minus
        }
    }

    fn as_i64(self) -> i64 {
        match self {
            Sign::Plus => 1,
            Sign::Minus => -1,
        }
    }
}

/// Compares power products (sorted variable lists) in graded-lex order,
/// `Greater` meaning "leads". Lower `VarId`s are the more significant
/// variables, so for equal degree the lexicographically smaller list leads.
pub(crate) fn grlex_cmp(a: &[VarId], b: &[VarId]) -> Ordering {
    a.len().cmp(&b.len()).then_with(|| b.cmp(a))
}

/// Sorted variable multiset ordered by graded-lex.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub(crate) struct PowerProduct(pub Vec<VarId>);

impl Ord for PowerProduct {
    fn cmp(&self, other: &Self) -> Ordering {
        grlex_cmp(&self.0, &other.0)
    }
}

impl PartialOrd for PowerProduct {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

fn merge_sorted(a: &[VarId], b: &[VarId]) -> Vec<VarId> {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        if a[i] <= b[j] {
            out.push(a[i]);
            i += 1;
        } else {
            out.push(b[j]);
            j += 1;
        }
    }
    out.extend_from_slice(&a[i..]);
    out.extend_from_slice(&b[j..]);
    out
}

/// `±` times a product of variables; the empty product is `±1`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Monomial {
    sign: Sign,
    vars: Vec<VarId>,
}

impl Monomial {
    pub fn new(sign: Sign, mut vars: Vec<VarId>) -> Self {
        vars.sort();
        Monomial { sign, vars }
    }

    pub fn constant(sign: Sign) -> Self {
        Monomial { sign, vars: Vec::new() }
    }

    pub fn var(v: VarId) -> Self {
        Monomial { sign: Sign::Plus, vars: vec![v] }
    }

    pub fn sign(&self) -> Sign {
        self.sign
    }

    /// Variables with multiplicity, sorted.
    pub fn vars(&self) -> &[VarId] {
        &self.vars
    }

    pub fn degree(&self) -> usize {
        self.vars.len()
    }

    pub fn negated(&self) -> Monomial {
        Monomial { sign: self.sign.flip(), vars: self.vars.clone() }
    }

    pub fn mul(&self, other: &Monomial) -> Monomial {
        Monomial { sign: self.sign.times(other.sign), vars: merge_sorted(&self.vars, &other.vars) }
    }
}

impl Ord for Monomial {
    fn cmp(&self, other: &Self) -> Ordering {
        grlex_cmp(&self.vars, &other.vars).then(self.sign.cmp(&other.sign))
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.sign == Sign::Minus {
            f.write_str("-")?;
        }
        write_product(f, &self.vars)
    }
}

fn write_product(f: &mut fmt::Formatter<'_>, vars: &[VarId]) -> fmt::Result {
    if vars.is_empty() {
        return f.write_str("1");
    }
    for (i, v) in vars.iter().enumerate() {
        if i > 0 {
            f.write_str("*")?;
        }
        write!(f, "{v}")?;
    }
    Ok(())
}

/// A sum of signed monomials.
///
/// Values built through [`Polynomial::from_terms`] keep their term list as
/// given; everything else in this module returns canonical polynomials.
/// Equality and ordering compare term lists, so compare canonical forms.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct Polynomial {
    terms: Vec<Monomial>,
}

impl Ord for Polynomial {
    fn cmp(&self, other: &Self) -> Ordering {
        self.terms.len().cmp(&other.terms.len()).then_with(|| self.terms.cmp(&other.terms))
    }
}

impl PartialOrd for Polynomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

type CoeffMap = BTreeMap<PowerProduct, i64>;

impl Polynomial {
    pub fn zero() -> Self {
        Polynomial::default()
    }

    pub fn one() -> Self {
        Polynomial { terms: vec![Monomial::constant(Sign::Plus)] }
    }

    pub fn minus_one() -> Self {
        Polynomial { terms: vec![Monomial::constant(Sign::Minus)] }
    }

    pub fn var(v: VarId) -> Self {
        Polynomial { terms: vec![Monomial::var(v)] }
    }

    /// The integer `n` as `|n|` repeated `±1` terms.
    pub fn constant(n: i64) -> Self {
        let sign = if n < 0 { Sign::Minus } else { Sign::Plus };
        Polynomial { terms: (0..n.unsigned_abs()).map(|_| Monomial::constant(sign)).collect() }
    }

    /// Wraps a raw term list without canonicalizing it.
    pub fn from_terms(terms: Vec<Monomial>) -> Self {
        Polynomial { terms }
    }

    pub fn from_monomial(m: Monomial) -> Self {
        Polynomial { terms: vec![m] }
    }

    pub fn terms(&self) -> &[Monomial] {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.canonicalize().terms.is_empty()
    }

    fn coeff_map(&self) -> CoeffMap {
        let mut map = CoeffMap::new();
        for t in &self.terms {
            *map.entry(PowerProduct(t.vars.clone())).or_insert(0) += t.sign.as_i64();
        }
        map.retain(|_, c| *c != 0);
        map
    }

    fn from_coeff_map(map: CoeffMap) -> Self {
        let mut terms = Vec::new();
        for (pp, c) in map.into_iter().rev() {
            let sign = if c < 0 { Sign::Minus } else { Sign::Plus };
            for _ in 0..c.unsigned_abs() {
                terms.push(Monomial { sign, vars: pp.0.clone() });
            }
        }
        Polynomial { terms }
    }

    /// Unique canonical form: equal monomials grouped, opposite signs
    /// cancelled, terms in descending graded-lex order.
    pub fn canonicalize(&self) -> Polynomial {
        Polynomial::from_coeff_map(self.coeff_map())
    }

    /// Read-only integer-coefficient view of the canonical form, leading
    /// term first.
    pub fn coefficients(&self) -> Vec<(Vec<VarId>, i64)> {
        self.coeff_map().into_iter().rev().map(|(pp, c)| (pp.0, c)).collect()
    }

    /// Constant value if the canonical form has no variables.
    pub fn as_constant(&self) -> Option<i64> {
        let map = self.coeff_map();
        match map.len() {
            0 => Some(0),
            1 => {
                let (pp, c) = map.into_iter().next().unwrap();
                pp.0.is_empty().then_some(c)
            }
            _ => None,
        }
    }

    pub fn add(&self, other: &Polynomial) -> Polynomial {
        let mut map = self.coeff_map();
        for (pp, c) in other.coeff_map() {
            *map.entry(pp).or_insert(0) += c;
        }
        map.retain(|_, c| *c != 0);
        Polynomial::from_coeff_map(map)
    }

    pub fn neg(&self) -> Polynomial {
        Polynomial { terms: self.canonicalize().terms.iter().map(Monomial::negated).collect() }
    }

    pub fn sub(&self, other: &Polynomial) -> Polynomial {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &Polynomial) -> Polynomial {
        let a = self.coeff_map();
        let b = other.coeff_map();
        let mut map = CoeffMap::new();
        for (pa, ca) in &a {
            for (pb, cb) in &b {
                *map.entry(PowerProduct(merge_sorted(&pa.0, &pb.0))).or_insert(0) += ca * cb;
            }
        }
        map.retain(|_, c| *c != 0);
        Polynomial::from_coeff_map(map)
    }

    pub fn square(&self) -> Polynomial {
        self.mul(self)
    }

    pub fn pow(&self, e: u32) -> Polynomial {
        let mut acc = Polynomial::one();
        for _ in 0..e {
            acc = acc.mul(self);
        }
        acc
    }

    pub fn arith(&self, other: &Polynomial, op: ArithOp) -> Polynomial {
        match op {
            ArithOp::Add => self.add(other),
            ArithOp::Sub => self.sub(other),
            ArithOp::Mul => self.mul(other),
        }
    }

    /// Total degree; `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeff_map().keys().map(|pp| pp.0.len()).max()
    }

    /// Distinct variables, sorted.
    pub fn variables(&self) -> BTreeSet<VarId> {
        self.terms.iter().flat_map(|t| t.vars.iter().copied()).collect()
    }

    /// Number of `±1` terms in the canonical standard form.
    pub fn length(&self) -> Result<usize, PolyError> {
        match self.canonicalize().terms.len() {
            0 => Err(PolyError::ZeroPolynomial),
            n => Ok(n),
        }
    }

    pub fn evaluate(&self, a: &Assignment) -> Result<Number, PolyError> {
        self.evaluate_with_squares(a, &BTreeMap::new())
    }

    /// Evaluates where some variables are known only through their
    /// squares: each such variable must occur with an even power.
    pub fn evaluate_with_squares(
        &self,
        a: &Assignment,
        squares: &BTreeMap<VarId, Number>,
    ) -> Result<Number, PolyError> {
        let mut total = Number::zero();
        for (vars, c) in self.coefficients() {
            let mut value = Number::from_int(c);
            let mut i = 0;
            while i < vars.len() {
                let v = vars[i];
                let run = vars[i..].iter().take_while(|w| **w == v).count();
                if let Some(sq) = squares.get(&v) {
                    if run % 2 != 0 {
                        return Err(PolyError::OddPower(v));
                    }
                    value = &value * &sq.pow(run as u32 / 2);
                } else {
                    let x = a.get(v).ok_or(PolyError::MissingBinding(v))?;
                    value = &value * &x.pow(run as u32);
                }
                i += run;
            }
            total = &total + &value;
        }
        Ok(total)
    }

    /// Substitutes each variable by a polynomial; unmapped variables stay.
    pub fn substitute(&self, map: &BTreeMap<VarId, Polynomial>) -> Polynomial {
        let mut acc = Polynomial::zero();
        for (vars, c) in self.coefficients() {
            let mut term = Polynomial::constant(c);
            for v in vars {
                let factor = map.get(&v).cloned().unwrap_or_else(|| Polynomial::var(v));
                term = term.mul(&factor);
            }
            acc = acc.add(&term);
        }
        acc
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ArithOp {
    Add,
    Sub,
    Mul,
}

impl fmt::Display for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        for (i, t) in self.terms.iter().enumerate() {
            match (i, t.sign) {
                (0, Sign::Plus) => {}
                (_, Sign::Plus) => f.write_str("+")?,
                (_, Sign::Minus) => f.write_str("-")?,
            }
            write_product(f, &t.vars)?;
        }
        Ok(())
    }
}

impl FromStr for Polynomial {
    type Err = PolyError;

    /// Parses `x1*x1-1`-style text. Integer factors expand into repeated
    /// `±1` monomials. The result is canonical.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut lexer = Lexer::new(s)?;
        let p = parse::parse_poly(&mut lexer, |_| true)?;
        if let Some(tok) = lexer.peek() {
            return Err(PolyError::Parse { pos: tok.pos, msg: "trailing input".into() });
        }
        Ok(p)
    }
}

/// Variable bindings for evaluation.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Assignment {
    values: BTreeMap<VarId, Number>,
}

impl Assignment {
    pub fn new() -> Self {
        Assignment::default()
    }

    pub fn set(&mut self, v: VarId, value: impl Into<Number>) {
        self.values.insert(v, value.into());
    }

    pub fn with(mut self, v: VarId, value: impl Into<Number>) -> Self {
        self.set(v, value);
        self
    }

    pub fn get(&self, v: VarId) -> Option<&Number> {
        self.values.get(&v)
    }

    pub fn contains(&self, v: VarId) -> bool {
        self.values.contains_key(&v)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&VarId, &Number)> {
        self.values.iter()
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// True iff every binding is an exact rational.
    pub fn is_exact(&self) -> bool {
        self.values.values().all(Number::is_exact)
    }

    /// Exact assignment `x1 = values[0], x2 = values[1], ...`.
    pub fn from_original(values: &[Rational]) -> Self {
        let mut a = Assignment::new();
        for (i, v) in values.iter().enumerate() {
            a.set(VarId::x(i as u32 + 1), v.clone());
        }
        a
    }

    /// Converts every binding to `f64`.
    pub fn to_float(&self) -> Assignment {
        Assignment { values: self.values.iter().map(|(k, v)| (*k, Number::Float(v.to_f64()))).collect() }
    }
}

impl FromIterator<(VarId, Number)> for Assignment {
    fn from_iter<I: IntoIterator<Item = (VarId, Number)>>(iter: I) -> Self {
        Assignment { values: iter.into_iter().collect() }
    }
}
