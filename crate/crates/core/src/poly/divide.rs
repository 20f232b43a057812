use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_traits::Zero;

use super::{PolyError, Polynomial, PowerProduct, VarId};
use crate::number::Rational;

type RatPoly = BTreeMap<PowerProduct, Rational>;

fn to_rat(p: &Polynomial) -> RatPoly {
    p.coefficients()
        .into_iter()
        .map(|(vars, c)| (PowerProduct(vars), Rational::from_integer(BigInt::from(c))))
        .collect()
}

/// `Some(a / b)` when the multiset `b` is contained in `a`.
fn divide_pp(a: &[VarId], b: &[VarId]) -> Option<Vec<VarId>> {
    let mut out = Vec::with_capacity(a.len());
    let mut j = 0;
    for &v in a {
        if j < b.len() && b[j] == v {
            j += 1;
        } else if j < b.len() && b[j] < v {
            return None;
        } else {
            out.push(v);
        }
    }
    (j == b.len()).then_some(out)
}

/// True iff `f` divides `g` over the rationals.
///
/// Runs multivariate division by the single divisor `f` under graded-lex
/// order. `{f}` is a Gröbner basis of the principal ideal it generates, so
/// the remainder vanishes exactly on multiples of `f`.
pub fn is_multiple_of(g: &Polynomial, f: &Polynomial) -> Result<bool, PolyError> {
    let divisor = to_rat(f);
    let (lead_pp, lead_c) = match divisor.iter().next_back() {
        Some((pp, c)) => (pp.0.clone(), c.clone()),
        None => return Err(PolyError::ZeroPolynomial),
    };
    let mut rest = to_rat(g);
    while let Some((pp, c)) = rest.iter().next_back().map(|(pp, c)| (pp.0.clone(), c.clone())) {
        let Some(quot_pp) = divide_pp(&pp, &lead_pp) else {
            // The leading term of the dividend goes to the remainder, which
            // is then nonzero.
            return Ok(false);
        };
        let q = &c / &lead_c;
        for (dpp, dc) in &divisor {
            let key = PowerProduct(super::merge_sorted(&quot_pp, &dpp.0));
            let entry = rest.entry(key).or_insert_with(Rational::zero);
            *entry -= &q * dc;
            if entry.is_zero() {
                let key = PowerProduct(super::merge_sorted(&quot_pp, &dpp.0));
                rest.remove(&key);
            }
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(s: &str) -> Polynomial {
        s.parse().unwrap()
    }

    #[test]
    fn multiples_and_non_multiples() {
        let f = p("x1*x1-1");
        assert_eq!(is_multiple_of(&f.mul(&p("x1")), &f), Ok(true));
        assert_eq!(is_multiple_of(&p("x1*x1"), &f), Ok(false));
        assert_eq!(is_multiple_of(&Polynomial::zero(), &f), Ok(true));
        assert_eq!(is_multiple_of(&f, &Polynomial::zero()), Err(PolyError::ZeroPolynomial));
    }

    #[test]
    fn non_monic_divisor() {
        let f = p("2*x1-1");
        assert_eq!(is_multiple_of(&f.mul(&p("x2+x1")), &f), Ok(true));
        assert_eq!(is_multiple_of(&p("x1"), &f), Ok(false));
    }

    #[test]
    fn constant_divisor_divides_everything() {
        assert_eq!(is_multiple_of(&p("x1*x2+x3"), &p("-1")), Ok(true));
    }

    #[test]
    fn remainder_only_in_lower_terms() {
        // Leading terms divide but the tail leaves a remainder.
        let f = p("x1*x2-1");
        assert_eq!(is_multiple_of(&p("x1*x1*x2*x2-x1"), &f), Ok(false));
        assert_eq!(is_multiple_of(&f.square(), &f), Ok(true));
    }
}
