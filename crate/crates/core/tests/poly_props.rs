use std::collections::BTreeMap;

use proptest::prelude::*;
use psdrank::number::{rational, Number};
use psdrank::poly::{is_multiple_of, Assignment, Monomial, Polynomial, Sign, VarId};

type Dense = BTreeMap<[u32; 4], i64>;

fn term() -> impl Strategy<Value = (bool, Vec<u32>)> {
    (any::<bool>(), prop::collection::vec(1u32..=4, 0..=2))
}

fn poly_terms() -> impl Strategy<Value = Vec<(bool, Vec<u32>)>> {
    prop::collection::vec(term(), 0..6)
}

fn build(terms: &[(bool, Vec<u32>)]) -> Polynomial {
    Polynomial::from_terms(
        terms
            .iter()
            .map(|(neg, vs)| {
                let sign = if *neg { Sign::Minus } else { Sign::Plus };
                Monomial::new(sign, vs.iter().map(|&i| VarId::x(i)).collect())
            })
            .collect(),
    )
}

fn dense(terms: &[(bool, Vec<u32>)]) -> Dense {
    let mut d = Dense::new();
    for (neg, vs) in terms {
        let mut e = [0; 4];
        for &i in vs {
            e[i as usize - 1] += 1;
        }
        *d.entry(e).or_default() += if *neg { -1 } else { 1 };
    }
    d.retain(|_, c| *c != 0);
    d
}

fn dense_of(p: &Polynomial) -> Dense {
    let mut d = Dense::new();
    for (vars, c) in p.coefficients() {
        let mut e = [0; 4];
        for v in vars {
            e[v.index as usize - 1] += 1;
        }
        *d.entry(e).or_default() += c;
    }
    d.retain(|_, c| *c != 0);
    d
}

fn dense_mul(a: &Dense, b: &Dense) -> Dense {
    let mut d = Dense::new();
    for (ea, ca) in a {
        for (eb, cb) in b {
            let e = [ea[0] + eb[0], ea[1] + eb[1], ea[2] + eb[2], ea[3] + eb[3]];
            *d.entry(e).or_default() += ca * cb;
        }
    }
    d.retain(|_, c| *c != 0);
    d
}

fn dense_add(a: &Dense, b: &Dense, sign: i64) -> Dense {
    let mut d = a.clone();
    for (e, c) in b {
        *d.entry(*e).or_default() += sign * c;
    }
    d.retain(|_, c| *c != 0);
    d
}

fn point() -> impl Strategy<Value = Assignment> {
    prop::collection::vec((-20i64..=20, 1i64..=7), 4).prop_map(|vals| {
        let mut a = Assignment::new();
        for (i, (n, d)) in vals.into_iter().enumerate() {
            a.set(VarId::x(i as u32 + 1), rational(n, d));
        }
        a
    })
}

proptest! {
    #[test]
    fn canonicalize_is_idempotent(t in poly_terms()) {
        let p = build(&t).canonicalize();
        prop_assert_eq!(p.canonicalize(), p);
    }

    #[test]
    fn evaluation_ignores_canonicalization(t in poly_terms(), pts in prop::collection::vec(point(), 5)) {
        let p = build(&t);
        for a in &pts {
            let raw = p.evaluate(a).unwrap();
            let can = p.canonicalize().evaluate(a).unwrap();
            prop_assert!(matches!(raw, Number::Exact(_)));
            prop_assert_eq!(raw, can);
        }
    }

    #[test]
    fn arithmetic_matches_dense_expansion(a in poly_terms(), b in poly_terms()) {
        let (pa, pb) = (build(&a), build(&b));
        let (da, db) = (dense(&a), dense(&b));
        prop_assert_eq!(dense_of(&pa.add(&pb)), dense_add(&da, &db, 1));
        prop_assert_eq!(dense_of(&pa.sub(&pb)), dense_add(&da, &db, -1));
        prop_assert_eq!(dense_of(&pa.mul(&pb)), dense_mul(&da, &db));
        prop_assert_eq!(dense_of(&pa.square()), dense_mul(&da, &da));
    }

    #[test]
    fn multiples_are_detected(f in poly_terms(), q in poly_terms()) {
        let f = build(&f).canonicalize();
        prop_assume!(!f.is_zero());
        let q = build(&q);
        let fq = f.mul(&q);
        prop_assert!(is_multiple_of(&fq, &f).unwrap());
        if f.degree().unwrap() > 0 {
            prop_assert!(!is_multiple_of(&fq.add(&Polynomial::one()), &f).unwrap());
        }
    }

    #[test]
    fn display_round_trips(t in poly_terms()) {
        let p = build(&t).canonicalize();
        let back: Polynomial = p.to_string().parse().unwrap();
        prop_assert_eq!(back, p);
    }
}
