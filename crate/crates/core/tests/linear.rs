use microsymp::jetalg::Rational;
use microsymp::linsympl::{compose_linear, image_of_point, is_lagrangian, LinCanonicalRelation};
use microsymp::{Matrix, Sampler};
use proptest::prelude::*;

fn relations(s: &mut Sampler, dims: &[usize]) -> Vec<LinCanonicalRelation> {
    dims.windows(2)
        .map(|w| s.lagrangian_relation(w[0], w[1]).unwrap())
        .collect()
}

/// Random vector in the column span of `m`.
fn in_span(s: &mut Sampler, m: &Matrix) -> Vec<Rational> {
    let a = s.point(m.cols());
    m.mul_vec(&a).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn composition_is_lagrangian_and_associative(seed: u64) {
        let mut s = Sampler::new(seed);
        let dims: Vec<usize> = (0..4).map(|_| s.range(0, 3)).collect();
        let r = relations(&mut s, &dims);
        let vw = compose_linear(&r[1], &r[0]).unwrap();
        let wu = compose_linear(&r[2], &r[1]).unwrap();
        prop_assert!(is_lagrangian(&vw.factors(), vw.basis()).unwrap().ok());
        let left = compose_linear(&r[2], &vw).unwrap();
        let right = compose_linear(&wu, &r[0]).unwrap();
        prop_assert!(left.same_as(&right));
    }

    #[test]
    fn identity_is_a_unit(seed: u64) {
        let mut s = Sampler::new(seed);
        let (m, n) = (s.range(0, 3), s.range(0, 3));
        let v = s.lagrangian_relation(m, n).unwrap();
        let l = compose_linear(&LinCanonicalRelation::identity(n), &v).unwrap();
        let r = compose_linear(&v, &LinCanonicalRelation::identity(m)).unwrap();
        prop_assert!(l.same_as(&v));
        prop_assert!(r.same_as(&v));
    }

    #[test]
    fn graphs_compose_as_matrix_products(seed: u64) {
        let mut s = Sampler::new(seed);
        let n = s.range(1, 2);
        let (a, b) = (s.symplectic(n), s.symplectic(n));
        let composite = compose_linear(
            &LinCanonicalRelation::graph(&b).unwrap(),
            &LinCanonicalRelation::graph(&a).unwrap(),
        )
        .unwrap();
        let product = LinCanonicalRelation::graph(&b.mul(&a).unwrap()).unwrap();
        prop_assert!(composite.same_as(&product));
    }

    /// Chaining a pair of V with a pair of W through a common middle vector
    /// lands in the composite, and in the image of the start point.
    #[test]
    fn chained_pairs_lie_in_composite(seed: u64) {
        let mut s = Sampler::new(seed);
        let dims: Vec<usize> = (0..3).map(|_| s.range(1, 3)).collect();
        let r = relations(&mut s, &dims);
        let (v, w) = (&r[0], &r[1]);
        let comp = compose_linear(w, v).unwrap();
        let uv = in_span(&mut s, v.basis());
        let (u, mid) = uv.split_at(2 * dims[0]);
        let w_src = w.basis().row_block(0, 2 * dims[1]);
        let w_tgt = w.basis().row_block(2 * dims[1], 2 * (dims[1] + dims[2]));
        if let Some(coeffs) = w_src.solve(mid).unwrap() {
            let end = w_tgt.mul_vec(&coeffs).unwrap();
            prop_assert!(comp.contains_pair(u, &end).unwrap());
            let image = image_of_point(&comp, u).unwrap().expect("u is in the domain");
            prop_assert!(image.contains(&end).unwrap());
        }
    }
}
