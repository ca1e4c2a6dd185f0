use std::collections::BTreeMap;

use microsymp::jetalg::{Block, FiberGradedPoly, Rational};
use microsymp::text::parse_poly;
use num_traits::Zero;
use proptest::prelude::*;

const F: usize = 2;
const B: usize = 2;
/// Larger than any degree a product of two sampled polynomials can reach.
const HIGH: u32 = 32;

type Terms = Vec<(Vec<u32>, Rational)>;

fn coeff() -> impl Strategy<Value = Rational> {
    (-9i64..=9, 1i64..=9).prop_map(|(n, d)| Rational::new(n.into(), d.into()))
}

fn terms() -> impl Strategy<Value = Terms> {
    prop::collection::vec((prop::collection::vec(0u32..=3, F + B), coeff()), 0..6)
}

fn p_degree(e: &[u32]) -> u32 {
    e[..F].iter().sum()
}

/// Naive merge: sum coefficients per exponent vector, drop zeros and
/// everything above `order`.
fn merge(terms: &Terms, order: u32) -> BTreeMap<Vec<u32>, Rational> {
    let mut out: BTreeMap<Vec<u32>, Rational> = BTreeMap::new();
    for (e, c) in terms {
        if p_degree(e) <= order {
            *out.entry(e.clone()).or_insert_with(Rational::zero) += c;
        }
    }
    out.retain(|_, c| !c.is_zero());
    out
}

fn as_map(p: &FiberGradedPoly) -> BTreeMap<Vec<u32>, Rational> {
    p.terms().map(|(m, c)| (m.exponents().to_vec(), c.clone())).collect()
}

fn poly(t: &Terms, order: u32) -> FiberGradedPoly {
    FiberGradedPoly::from_terms(F, B, order, t.iter().cloned())
}

fn naive_product(a: &Terms, b: &Terms) -> Terms {
    let mut out = Vec::new();
    for (ea, ca) in a {
        for (eb, cb) in b {
            let e = ea.iter().zip(eb).map(|(x, y)| x + y).collect();
            out.push((e, ca * cb));
        }
    }
    out
}

/// Fiber values with no p-degree-0 part, as substitution requires.
fn fiber_value(order: u32) -> impl Strategy<Value = FiberGradedPoly> {
    terms().prop_map(move |t| {
        let kept: Terms = t.into_iter().filter(|(e, _)| p_degree(e) >= 1).collect();
        poly(&kept, order)
    })
}

fn point() -> impl Strategy<Value = Vec<Rational>> {
    prop::collection::vec(coeff(), F + B)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn sum_matches_naive_merge(a in terms(), b in terms(), k in 1u32..=4) {
        let sum = &poly(&a, k) + &poly(&b, k);
        let all: Terms = a.iter().chain(&b).cloned().collect();
        prop_assert_eq!(as_map(&sum), merge(&all, k));
    }

    #[test]
    fn product_matches_naive_expansion(a in terms(), b in terms(), k in 1u32..=4) {
        let prod = &poly(&a, k) * &poly(&b, k);
        prop_assert_eq!(as_map(&prod), merge(&naive_product(&a, &b), k));
    }

    #[test]
    fn truncation_commutes_with_product(a in terms(), b in terms(), k in 1u32..=4) {
        let exact = &poly(&a, HIGH) * &poly(&b, HIGH);
        let truncated = &poly(&a, k) * &poly(&b, k);
        prop_assert_eq!(exact.with_order(k), truncated);
    }

    #[test]
    fn ring_laws(a in terms(), b in terms(), c in terms(), k in 1u32..=3) {
        let (a, b, c) = (poly(&a, k), poly(&b, k), poly(&c, k));
        prop_assert_eq!(&a * &b, &b * &a);
        prop_assert_eq!(&(&a * &b) * &c, &a * &(&b * &c));
        prop_assert_eq!(&a * &(&b + &c), &(&a * &b) + &(&a * &c));
        prop_assert!((&a - &a).is_zero());
    }

    #[test]
    fn evaluation_is_a_homomorphism(a in terms(), b in terms(), pt in point()) {
        let (a, b) = (poly(&a, HIGH), poly(&b, HIGH));
        let (p, x) = pt.split_at(F);
        let lhs = (&a * &b).eval(p, x).unwrap();
        prop_assert_eq!(lhs, a.eval(p, x).unwrap() * b.eval(p, x).unwrap());
    }

    #[test]
    fn substitution_is_a_homomorphism(
        a in terms(),
        b in terms(),
        k in 1u32..=3,
        fv in prop::collection::vec(fiber_value(3), F),
        bv in prop::collection::vec(terms(), B),
    ) {
        let fv: Vec<_> = fv.iter().map(|v| v.with_order(k)).collect();
        let bv: Vec<_> = bv.iter().map(|t| poly(t, k)).collect();
        let (a, b) = (poly(&a, k), poly(&b, k));
        let lhs = (&a * &b).substitute(&fv, &bv).unwrap();
        let rhs = &a.substitute(&fv, &bv).unwrap() * &b.substitute(&fv, &bv).unwrap();
        prop_assert_eq!(lhs, rhs);
        let sum = (&a + &b).substitute(&fv, &bv).unwrap();
        prop_assert_eq!(sum, &a.substitute(&fv, &bv).unwrap() + &b.substitute(&fv, &bv).unwrap());
    }

    #[test]
    fn substitution_commutes_with_truncation(
        a in terms(),
        k in 1u32..=3,
        fv in prop::collection::vec(fiber_value(HIGH), F),
        bv in prop::collection::vec(terms(), B),
    ) {
        let bv_high: Vec<_> = bv.iter().map(|t| poly(t, HIGH)).collect();
        let exact = poly(&a, HIGH).substitute(&fv, &bv_high).unwrap();
        let fv_k: Vec<_> = fv.iter().map(|v| v.with_order(k)).collect();
        let bv_k: Vec<_> = bv.iter().map(|t| poly(t, k)).collect();
        let truncated = poly(&a, k).substitute(&fv_k, &bv_k).unwrap();
        prop_assert_eq!(exact.with_order(k), truncated);
    }

    #[test]
    fn mixed_partials_commute(a in terms(), k in 1u32..=4, i in 0..F, j in 0..B) {
        let a = poly(&a, k);
        let px = a.partial(Block::Fiber, i).unwrap().partial(Block::Base, j).unwrap();
        let xp = a.partial(Block::Base, j).unwrap().partial(Block::Fiber, i).unwrap();
        prop_assert_eq!(px, xp);
    }

    #[test]
    fn leibniz_rule(a in terms(), b in terms(), j in 0..B) {
        let (a, b) = (poly(&a, HIGH), poly(&b, HIGH));
        let d = |p: &FiberGradedPoly| p.partial(Block::Base, j).unwrap();
        prop_assert_eq!(d(&(&a * &b)), &(&d(&a) * &b) + &(&a * &d(&b)));
    }

    #[test]
    fn text_round_trip(a in terms(), k in 1u32..=4) {
        let a = poly(&a, k);
        prop_assert_eq!(parse_poly(&a.to_string(), F, B, k).unwrap(), a);
    }

    #[test]
    fn record_round_trip(a in terms(), k in 1u32..=4) {
        let a = poly(&a, k);
        prop_assert_eq!(FiberGradedPoly::from_records(F, B, k, &a.to_records()).unwrap(), a);
    }
}
