use microsymp::operad::{
    check_operad_axioms, diagonal_lift, is_in_l, is_in_l_delta, operad_compose, AxiomBounds,
};
use microsymp::{MicroObject, OperadElement, Sampler};

const K: u32 = 3;

fn delta(n: usize, k: usize) -> OperadElement {
    diagonal_lift(&MicroObject::new(n), k, K).unwrap()
}

#[test]
fn ternary_diagonal_both_ways() {
    for n in 1..=2 {
        let left = operad_compose(&delta(n, 2), &[delta(n, 2), delta(n, 1)]).unwrap();
        let right = operad_compose(&delta(n, 2), &[delta(n, 1), delta(n, 2)]).unwrap();
        assert_eq!(left, delta(n, 3));
        assert_eq!(right, delta(n, 3));
    }
}

#[test]
fn inserting_the_unit_drops_an_input() {
    let out = operad_compose(&delta(1, 2), &[delta(1, 0), delta(1, 1)]).unwrap();
    assert_eq!(out, delta(1, 1));
    assert!(is_in_l_delta(&out));
}

#[test]
fn l_is_closed_and_contains_l_delta() {
    let base = MicroObject::new(1);
    let mut s = Sampler::new(3);
    for _ in 0..20 {
        let f = OperadElement::new(base.clone(), 2, s.l_element(1, 2, K)).unwrap();
        let g1 = OperadElement::new(base.clone(), 2, s.l_element(1, 2, K)).unwrap();
        let g2 = OperadElement::new(base.clone(), 1, s.l_element(1, 1, K)).unwrap();
        let h = operad_compose(&f, &[g1, g2]).unwrap();
        assert_eq!(h.arity(), 3);
        assert!(is_in_l(&h));
    }
    assert!(is_in_l(&delta(1, 3)));
}

#[test]
fn arity_mismatch_is_rejected() {
    assert!(operad_compose(&delta(1, 2), &[delta(1, 1)]).is_err());
}

#[test]
fn small_axiom_run_passes() {
    let bounds = AxiomBounds {
        samples: 5,
        ..AxiomBounds::default()
    };
    let report = check_operad_axioms(&MicroObject::new(1), 11, bounds).unwrap();
    assert!(report.all_passed(), "{}", report.render());
    assert_eq!(report.failed(), 0);
}
