use microsymp::micro::{
    compose, extract_germ, graph_of_germ, identity, inverse, is_micromorphism, symmetry, tensor,
    unit_object, unit_to,
};
use microsymp::text::{parse_morphism, serialize_morphism};
use microsymp::{rat, FiberGradedPoly, MicroObject, Micromorphism, Sampler};
use proptest::prelude::*;

const K: u32 = 3;

fn obj(n: usize) -> MicroObject {
    MicroObject::new(n)
}

/// Chain of morphisms through random dimensions `1..=2`, with linear cores
/// except for at most one quadratic factor to keep composites small.
fn chain(s: &mut Sampler, len: usize) -> Vec<Micromorphism> {
    let dims: Vec<usize> = (0..=len).map(|_| s.range(1, 2)).collect();
    let quadratic = s.below(len);
    (0..len)
        .map(|i| {
            let deg = if i == quadratic { 2 } else { 1 };
            s.morphism_of_degree(dims[i], dims[i + 1], K, deg)
        })
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn identity_is_a_two_sided_unit(seed: u64) {
        let mut s = Sampler::new(seed);
        let f = s.any_morphism(3, 4);
        let k = f.order();
        prop_assert_eq!(compose(&f, &identity(f.source(), k).unwrap()).unwrap(), f.clone());
        prop_assert_eq!(compose(&identity(f.target(), k).unwrap(), &f).unwrap(), f);
    }

    #[test]
    fn composition_is_associative(seed: u64) {
        let mut s = Sampler::new(seed);
        let c = chain(&mut s, 3);
        let left = compose(&c[2], &compose(&c[1], &c[0]).unwrap()).unwrap();
        let right = compose(&compose(&c[2], &c[1]).unwrap(), &c[0]).unwrap();
        prop_assert_eq!(serialize_morphism(&left), serialize_morphism(&right));
    }

    #[test]
    fn composites_are_micromorphisms_with_composite_core(seed: u64) {
        let mut s = Sampler::new(seed);
        let c = chain(&mut s, 2);
        let gf = compose(&c[1], &c[0]).unwrap();
        let check = is_micromorphism(gf.generating_function(), gf.source(), gf.target()).unwrap();
        prop_assert!(check.ok(), "{:?}", check);
        prop_assert_eq!(gf.core(), &c[0].core().after(c[1].core()).unwrap());
    }

    #[test]
    fn symmetry_is_natural(seed: u64) {
        let mut s = Sampler::new(seed);
        let d: Vec<usize> = (0..4).map(|_| s.range(1, 2)).collect();
        let f = s.morphism_of_degree(d[0], d[1], K, 2);
        let g = s.morphism_of_degree(d[2], d[3], K, 2);
        let lhs = compose(&symmetry(f.target(), g.target(), K).unwrap(), &tensor(&f, &g).unwrap()).unwrap();
        let rhs = compose(&tensor(&g, &f).unwrap(), &symmetry(f.source(), g.source(), K).unwrap()).unwrap();
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn tensor_interchange(seed: u64) {
        let mut s = Sampler::new(seed);
        let c1 = chain(&mut s, 2);
        let c2 = chain(&mut s, 2);
        let lhs = tensor(&compose(&c1[1], &c1[0]).unwrap(), &compose(&c2[1], &c2[0]).unwrap()).unwrap();
        let rhs = compose(&tensor(&c1[1], &c2[1]).unwrap(), &tensor(&c1[0], &c2[0]).unwrap()).unwrap();
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn germ_round_trip(seed: u64) {
        let mut s = Sampler::new(seed);
        let n = s.range(1, 2);
        let f = s.affine_morphism(n, K);
        prop_assert_eq!(graph_of_germ(&extract_germ(&f).unwrap()).unwrap(), f);
    }

    #[test]
    fn germs_compose_like_morphisms(seed: u64) {
        let mut s = Sampler::new(seed);
        let n = s.range(1, 2);
        let f = s.affine_morphism(n, K);
        let g = s.affine_morphism(n, K);
        let composite = extract_germ(&compose(&g, &f).unwrap()).unwrap();
        let chained = extract_germ(&f).unwrap().then(&extract_germ(&g).unwrap()).unwrap();
        prop_assert_eq!(composite, chained);
    }

    #[test]
    fn inverse_composes_to_identity(seed: u64) {
        let mut s = Sampler::new(seed);
        let n = s.range(1, 2);
        let f = s.affine_morphism(n, K);
        let fi = inverse(&f).unwrap();
        prop_assert_eq!(compose(&fi, &f).unwrap(), identity(&obj(n), K).unwrap());
        prop_assert_eq!(compose(&f, &fi).unwrap(), identity(&obj(n), K).unwrap());
    }
}

#[test]
fn symmetry_is_an_involution() {
    for a in 0..3 {
        for b in 0..3 {
            let ab = symmetry(&obj(a), &obj(b), K).unwrap();
            let ba = symmetry(&obj(b), &obj(a), K).unwrap();
            assert_eq!(compose(&ba, &ab).unwrap(), identity(&obj(a + b), K).unwrap());
        }
    }
}

#[test]
fn only_zero_leaves_the_unit() {
    let target = obj(2);
    let zero = unit_to(&target, K).unwrap();
    assert!(zero.generating_function().is_zero());
    let x1 = FiberGradedPoly::base_var(0, 2, K, 0).unwrap();
    assert!(Micromorphism::new(unit_object(), target.clone(), x1).is_err());
    let c = FiberGradedPoly::constant(0, 2, K, rat(5));
    assert!(Micromorphism::new(unit_object(), target, c).is_err());
}

#[test]
fn serialization_round_trips() {
    let mut s = Sampler::new(7);
    for _ in 0..100 {
        let f = s.any_morphism(3, 4);
        let text = serialize_morphism(&f);
        assert_eq!(parse_morphism(&text).unwrap(), f, "{text}");
    }
}

#[test]
fn lift_of_square_then_cube_is_sixth_power() {
    use microsymp::micro::cotangent_lift;
    use microsymp::text::parse_poly;
    use microsymp::CoreMap;
    let lift = |e: &str| cotangent_lift(&CoreMap::new(1, vec![parse_poly(e, 0, 1, 0).unwrap()]).unwrap(), K).unwrap();
    let composite = compose(&lift("x1^3"), &lift("x1^2")).unwrap();
    assert_eq!(composite, lift("x1^6"));
    assert_eq!(composite.generating_function().to_string(), "p1*x1^6");
}
