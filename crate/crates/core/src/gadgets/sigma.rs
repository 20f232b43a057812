use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use crate::poly::{Monomial, PolyError, Polynomial, Sign};

/// The set `σ(f)`: signed prefix products of every monomial together with
/// `0` and the signed partial sums `±p1, ±(p1+p2), ..., ±f`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SigmaSet {
    elements: Vec<Polynomial>,
}

impl SigmaSet {
    /// Builds `σ(f)` from the canonical standard form of `f`. Prefix
    /// products follow each monomial's sorted variable order.
    pub fn new(f: &Polynomial) -> Result<Self, PolyError> {
        let f = f.canonicalize();
        if f.terms().is_empty() {
            return Err(PolyError::ZeroPolynomial);
        }
        let mut set = BTreeSet::new();
        let mut insert_pm = |p: Polynomial| {
            set.insert(p.neg());
            set.insert(p);
        };
        for term in f.terms() {
            let vars = term.vars();
            for len in 0..=vars.len() {
                insert_pm(Polynomial::from_monomial(Monomial::new(Sign::Plus, vars[..len].to_vec())));
            }
        }
        let mut partial = Polynomial::zero();
        insert_pm(partial.clone());
        for term in f.terms() {
            partial = partial.add(&Polynomial::from_monomial(term.clone()));
            insert_pm(partial.clone());
        }
        Ok(SigmaSet { elements: set.into_iter().collect() })
    }

    /// Elements in ascending canonical order.
    pub fn elements(&self) -> &[Polynomial] {
        &self.elements
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn contains(&self, p: &Polynomial) -> bool {
        self.elements.binary_search(&p.canonicalize()).is_ok()
    }

    pub fn position(&self, p: &Polynomial) -> Option<usize> {
        self.elements.binary_search(&p.canonicalize()).ok()
    }
}

/// A row/column label of the matrices `A`, `B`, `C`: a triple over `σ`
/// with at least one coordinate equal to the constant 1.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LabelVector {
    pub coords: [Polynomial; 3],
}

impl LabelVector {
    pub fn new(a: Polynomial, b: Polynomial, c: Polynomial) -> Self {
        LabelVector { coords: [a.canonicalize(), b.canonicalize(), c.canonicalize()] }
    }

    /// `(e_0, e_1, e_2)` with integer entries.
    pub fn constant(a: i64, b: i64, c: i64) -> Self {
        LabelVector::new(Polynomial::constant(a), Polynomial::constant(b), Polynomial::constant(c))
    }

    pub fn dot(&self, other: &LabelVector) -> Polynomial {
        (0..3).fold(Polynomial::zero(), |acc, i| acc.add(&self.coords[i].mul(&other.coords[i])))
    }
}

impl fmt::Display for LabelVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{},{})", self.coords[0], self.coords[1], self.coords[2])
    }
}

impl FromStr for LabelVector {
    type Err = PolyError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = |msg: &str| PolyError::Parse { pos: 0, msg: msg.to_string() };
        let inner =
            s.strip_prefix('(').and_then(|s| s.strip_suffix(')')).ok_or_else(|| bad("label must be parenthesized"))?;
        let parts: Vec<&str> = inner.split(',').collect();
        if parts.len() != 3 {
            return Err(bad("label must have three coordinates"));
        }
        Ok(LabelVector::new(parts[0].parse()?, parts[1].parse()?, parts[2].parse()?))
    }
}

/// `H(f)`: every triple over `σ(f)` having some coordinate equal to 1, in
/// lexicographic order of coordinate positions in `σ`. Its size is
/// `|σ|^3 - (|σ| - 1)^3`.
pub fn index_set_h(sigma: &SigmaSet) -> Vec<LabelVector> {
    let one = Polynomial::one();
    let els = sigma.elements();
    let mut out = Vec::new();
    for a in els {
        for b in els {
            for c in els {
                if *a == one || *b == one || *c == one {
                    out.push(LabelVector { coords: [a.clone(), b.clone(), c.clone()] });
                }
            }
        }
    }
    out
}
