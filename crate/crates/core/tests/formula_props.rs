use proptest::prelude::*;
use psdrank::formula::{normalize_atoms, reduce_formula, to_equation_system, Formula, Relation};
use psdrank::number::{int, rational, Number};
use psdrank::poly::{Assignment, Monomial, Polynomial, Sign, VarId};

const RELS: [Relation; 6] = [Relation::Gt, Relation::Ge, Relation::Eq, Relation::Ne, Relation::Lt, Relation::Le];

fn poly() -> impl Strategy<Value = Polynomial> {
    prop::collection::vec((any::<bool>(), prop::collection::vec(1u32..=2, 0..=2)), 1..5).prop_map(|ts| {
        Polynomial::from_terms(
            ts.into_iter()
                .map(|(neg, vs)| {
                    let sign = if neg { Sign::Minus } else { Sign::Plus };
                    Monomial::new(sign, vs.into_iter().map(VarId::x).collect())
                })
                .collect(),
        )
    })
}

fn formula() -> impl Strategy<Value = Formula> {
    let leaf = (poly(), 0..RELS.len()).prop_map(|(p, r)| Formula::atom(p, RELS[r]));
    leaf.prop_recursive(3, 8, 2, |inner| {
        prop_oneof![
            inner.clone().prop_map(Formula::not),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Formula::and(a, b)),
            (inner.clone(), inner).prop_map(|(a, b)| Formula::or(a, b)),
        ]
    })
}

fn point() -> impl Strategy<Value = Assignment> {
    ((-12i64..=12, 1i64..=4), (-12i64..=12, 1i64..=4))
        .prop_map(|((a, b), (c, d))| Assignment::from_original(&[rational(a, b), rational(c, d)]))
}

fn as_int(n: &Number) -> i64 {
    n.as_exact().unwrap().to_integer().try_into().unwrap()
}

#[test]
fn boolean_encoders_match_truth_tables() {
    let w = |i| VarId::new(psdrank::poly::VarKind::Truth, i);
    let wa = Polynomial::var(w(1));
    let wb = Polynomial::var(w(2));
    let not = Polynomial::one().sub(&wa);
    let and = wa.mul(&wb);
    let or = wa.add(&wb).sub(&and);
    for a in [0, 1] {
        for b in [0, 1] {
            let pt = Assignment::new().with(w(1), int(a)).with(w(2), int(b));
            let (ta, tb) = (a == 1, b == 1);
            assert_eq!(as_int(&not.evaluate(&pt).unwrap()) == 1, !ta);
            assert_eq!(as_int(&and.evaluate(&pt).unwrap()) == 1, ta && tb);
            assert_eq!(as_int(&or.evaluate(&pt).unwrap()) == 1, ta || tb);
        }
    }
}

#[test]
fn encoder_uses_the_same_identities() {
    let f = Formula::or(Formula::not(Formula::gt("x1".parse().unwrap())), Formula::gt("x2".parse().unwrap()));
    let sys = to_equation_system(&f).unwrap();
    let polys = sys.polynomials();
    let expect = |s: &str| s.parse::<Polynomial>().unwrap().canonicalize();
    assert_eq!(polys[1], expect("w2-1+w1"));
    assert_eq!(polys[3], expect("w4-w2-w3+w2*w3"));
    assert_eq!(polys[4], expect("w4-1"));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn normalization_preserves_truth(f in formula(), pts in prop::collection::vec(point(), 40)) {
        let g = normalize_atoms(&f);
        for a in &pts {
            prop_assert_eq!(f.evaluate(a).unwrap(), g.evaluate(a).unwrap());
        }
    }

    #[test]
    fn chain_output_is_linear_in_input(f in formula()) {
        let (sys, p) = reduce_formula(&f).unwrap();
        prop_assert!(sys.is_flat());
        prop_assert!(p.terms().len() <= 200 * f.size(), "{} terms for size {}", p.terms().len(), f.size());
    }

    #[test]
    fn lifted_witness_is_a_root(f in formula(), a in point()) {
        let f = if f.evaluate(&a).unwrap() { f } else { Formula::not(f) };
        let w = psdrank::formula::lift_witness(&f, &a).unwrap();
        let (_, p) = reduce_formula(&f).unwrap();
        match p.evaluate(&w.assignment).unwrap() {
            Number::Exact(r) => prop_assert!(num_traits::Zero::is_zero(&r)),
            Number::Float(x) => {
                // Sum of absolute term values bounds the cancellation error.
                let mut abs = Assignment::new();
                for (v, value) in w.assignment.iter() {
                    abs.set(*v, value.abs());
                }
                let scale = p.coefficients().iter().fold(Polynomial::zero(), |acc, (vars, c)| {
                    let t = vars.iter().fold(Polynomial::constant(c.abs()), |t, v| t.mul(&Polynomial::var(*v)));
                    acc.add(&t)
                });
                let scale = scale.evaluate(&abs).unwrap().to_f64();
                prop_assert!(x.abs() <= 1e-12 * scale.max(1.0), "value {x:e} at term scale {scale:e}");
            }
        }
    }
}
