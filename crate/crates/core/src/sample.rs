//! Seeded generators of random test instances.
//!
//! Every generator draws from a ChaCha8 stream, so a seed fixes the whole
//! sequence. Coefficient numerators and denominators are bounded by 9.

use num_traits::{One, Zero};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::jetalg::{frac, rat, FiberGradedPoly, Rational};
use crate::linsympl::{LinCanonicalRelation, Splitting};
use crate::matrix::Matrix;
use crate::micro::{CoreMap, MicroObject, Micromorphism};

/// Bound on numerators and denominators of sampled coefficients.
pub const COEFF_BOUND: i64 = 9;

#[derive(Debug, Clone)]
pub struct Sampler {
    rng: ChaCha8Rng,
}

impl Sampler {
    pub fn new(seed: u64) -> Self {
        Sampler {
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.rng.gen()
    }

    pub fn below(&mut self, n: usize) -> usize {
        self.rng.gen_range(0..n)
    }

    pub fn range(&mut self, lo: usize, hi: usize) -> usize {
        self.rng.gen_range(lo..=hi)
    }

    pub fn chance(&mut self, p: f64) -> bool {
        self.rng.gen_bool(p)
    }

    pub fn small_int(&mut self, bound: i64) -> i64 {
        self.rng.gen_range(-bound..=bound)
    }

    /// Nonzero rational `a/b` with `|a|, b <= 9`.
    pub fn coeff(&mut self) -> Rational {
        let a = self.rng.gen_range(1..=COEFF_BOUND);
        let b = if self.chance(0.6) {
            1
        } else {
            self.rng.gen_range(2..=COEFF_BOUND)
        };
        if self.chance(0.5) {
            frac(a, b)
        } else {
            frac(-a, b)
        }
    }

    /// Rational point with small entries, used for pointwise evaluation.
    pub fn point(&mut self, n: usize) -> Vec<Rational> {
        (0..n)
            .map(|_| {
                let a = self.small_int(3);
                let b = self.rng.gen_range(1..=3);
                frac(a, b)
            })
            .collect()
    }

    fn exponents(&mut self, nvars: usize, degree: u32) -> Vec<u32> {
        let mut e = vec![0; nvars];
        for _ in 0..degree {
            e[self.below(nvars)] += 1;
        }
        e
    }

    /// Polynomial map `R^n -> R^m` of degree at most `max_degree`: a random
    /// affine part plus a few sparse higher terms.
    pub fn core_map(&mut self, n: usize, m: usize, max_degree: u32) -> CoreMap {
        let comps = (0..m)
            .map(|_| {
                let mut terms = Vec::new();
                if self.chance(0.3) {
                    terms.push((vec![0; n], self.coeff()));
                }
                for j in 0..n {
                    if self.chance(0.6) {
                        let mut e = vec![0; n];
                        e[j] = 1;
                        terms.push((e, self.coeff()));
                    }
                }
                if n > 0 {
                    for d in 2..=max_degree {
                        if self.chance(0.4) {
                            terms.push((self.exponents(n, d), self.coeff()));
                        }
                    }
                }
                FiberGradedPoly::from_terms(0, n, 0, terms)
            })
            .collect();
        CoreMap::new(n, comps).expect("shape by construction")
    }

    /// Sparse terms of p-degree `2..=order` and x-degree at most one.
    pub fn fiber_tail(&mut self, fiber: usize, base: usize, order: u32) -> FiberGradedPoly {
        let mut terms = Vec::new();
        if fiber == 0 {
            return FiberGradedPoly::zero(fiber, base, order);
        }
        for d in 2..=order {
            for _ in 0..self.below(3) {
                let mut e = self.exponents(fiber, d);
                let mut x = vec![0; base];
                if base > 0 && self.chance(0.4) {
                    x[self.below(base)] = 1;
                }
                e.extend(x);
                terms.push((e, self.coeff()));
            }
        }
        FiberGradedPoly::from_terms(fiber, base, order, terms)
    }

    /// `S = <p, phi(x)> + tail` with a random polynomial core `phi`.
    pub fn morphism(&mut self, m: usize, n: usize, order: u32) -> Micromorphism {
        self.morphism_of_degree(m, n, order, 2)
    }

    /// As [`morphism`](Self::morphism) with core degree at most `core_degree`.
    pub fn morphism_of_degree(&mut self, m: usize, n: usize, order: u32, core_degree: u32) -> Micromorphism {
        let phi = self.core_map(n, m, core_degree);
        self.morphism_with_core(&phi, order)
    }

    pub fn morphism_with_core(&mut self, phi: &CoreMap, order: u32) -> Micromorphism {
        let (m, n) = (phi.target_dim(), phi.source_dim());
        let lift = crate::micro::cotangent_lift(phi, order).expect("valid lift");
        let s = lift.generating_function() + &self.fiber_tail(m, n, order);
        Micromorphism::new(MicroObject::new(m), MicroObject::new(n), s).expect("normal form by construction")
    }

    /// Morphism with random dimensions `1..=max_dim` and order `1..=max_order`.
    pub fn any_morphism(&mut self, max_dim: usize, max_order: u32) -> Micromorphism {
        let m = self.range(1, max_dim);
        let n = self.range(1, max_dim);
        let k = self.range(1, max_order as usize) as u32;
        self.morphism(m, n, k)
    }

    /// Invertible matrix `L D U` with unit triangular factors.
    pub fn invertible(&mut self, n: usize) -> Matrix {
        let l = Matrix::from_fn(n, n, |i, j| match i.cmp(&j) {
            std::cmp::Ordering::Equal => Rational::one(),
            std::cmp::Ordering::Greater if self.chance(0.5) => rat(self.small_int(3)),
            _ => Rational::zero(),
        });
        let u = Matrix::from_fn(n, n, |i, j| match i.cmp(&j) {
            std::cmp::Ordering::Equal => self.coeff(),
            std::cmp::Ordering::Less if self.chance(0.5) => rat(self.small_int(3)),
            _ => Rational::zero(),
        });
        l.mul(&u).expect("square")
    }

    /// Morphism `[n] -> [n]` with an invertible affine core.
    pub fn affine_morphism(&mut self, n: usize, order: u32) -> Micromorphism {
        let a = self.invertible(n);
        let c: Vec<Rational> = (0..n)
            .map(|_| if self.chance(0.4) { self.coeff() } else { Rational::zero() })
            .collect();
        self.morphism_with_core(&CoreMap::affine(&a, &c), order)
    }

    /// Generating function that fails the normal form through a
    /// non-constant `S(0, x)` term, with the shape of a morphism `[m] -> [n]`.
    pub fn violating(&mut self, m: usize, n: usize, order: u32) -> FiberGradedPoly {
        let f = self.morphism(m, n, order);
        let d = self.range(1, 2) as u32;
        let mut e = vec![0; m];
        e.extend(self.exponents(n, d));
        let bad = FiberGradedPoly::from_terms(m, n, order, [(e, self.coeff())]);
        f.generating_function() + &bad
    }

    pub fn symmetric(&mut self, n: usize) -> Matrix {
        let mut b = Matrix::zeros(n, n);
        for i in 0..n {
            for j in i..n {
                if self.chance(0.6) {
                    let c = self.coeff();
                    b[(i, j)] = c.clone();
                    b[(j, i)] = c;
                }
            }
        }
        b
    }

    pub fn splitting(&mut self, n: usize) -> Splitting {
        Splitting::new(self.symmetric(n)).expect("symmetric")
    }

    /// Symplectic `2n x 2n` matrix: a product of shears `[[I,S],[0,I]]`,
    /// `[[I,0],[S,I]]` and block-diagonal `[[G,0],[0,G^-T]]` factors.
    pub fn symplectic(&mut self, n: usize) -> Matrix {
        let mut acc = Matrix::identity(2 * n);
        for _ in 0..3 {
            let factor = match self.below(3) {
                0 => {
                    let s = self.symmetric(n);
                    Matrix::identity(n)
                        .hstack(&s)
                        .and_then(|top| top.vstack(&Matrix::zeros(n, n).hstack(&Matrix::identity(n))?))
                }
                1 => {
                    let s = self.symmetric(n);
                    Matrix::identity(n)
                        .hstack(&Matrix::zeros(n, n))
                        .and_then(|top| top.vstack(&s.hstack(&Matrix::identity(n))?))
                }
                _ => {
                    let g = self.invertible(n);
                    let g_inv_t = g.inverse().expect("invertible").transpose();
                    Ok(g.direct_sum(&g_inv_t))
                }
            }
            .expect("block shapes");
            acc = factor.mul(&acc).expect("square");
        }
        acc
    }

    /// Random lagrangian relation `R^{2m} -> R^{2n}`.
    ///
    /// A seed relation is transformed by random symplectic maps of the two
    /// factors. Seeds are products of coordinate lagrangians (often making
    /// compositions degenerate) or linear cotangent lifts.
    pub fn lagrangian_relation(&mut self, m: usize, n: usize) -> Result<LinCanonicalRelation> {
        let seed = if self.chance(0.4) {
            let l1 = self.coordinate_lagrangian(m);
            let l2 = self.coordinate_lagrangian(n);
            l1.direct_sum(&l2)
        } else {
            let c = Matrix::from_fn(m, n, |_, _| {
                if self.chance(0.5) {
                    rat(self.small_int(3))
                } else {
                    Rational::zero()
                }
            });
            linear_lift_basis(&c)
        };
        let a1 = self.symplectic(m);
        let a2 = self.symplectic(n);
        let basis = a1.direct_sum(&a2).mul(&seed)?;
        LinCanonicalRelation::new(m, n, basis)
    }

    /// Span of a random choice of `e_{x_i}` or `e_{p_i}` for each `i`.
    fn coordinate_lagrangian(&mut self, n: usize) -> Matrix {
        let cols: Vec<Vec<Rational>> = (0..n)
            .map(|i| {
                let mut v = vec![Rational::zero(); 2 * n];
                let at = if self.chance(0.5) { i } else { n + i };
                v[at] = Rational::one();
                v
            })
            .collect();
        Matrix::from_columns(2 * n, &cols)
    }

    /// Element of `L(k)` over `R^n`: `sum_j <p^(j), x>` plus terms of
    /// p-degree at least two.
    pub fn l_element(&mut self, n: usize, arity: usize, order: u32) -> Micromorphism {
        self.morphism_with_core(&CoreMap::diagonal(n, arity), order)
    }

    pub fn shuffle<T>(&mut self, items: &mut [T]) {
        items.shuffle(&mut self.rng);
    }
}

/// Basis of `{(C x2, p1, x2, C^T p1)}`, the linear cotangent lift of
/// `C: R^n -> R^m`, in coordinates `(x1, p1, x2, p2)`.
pub fn linear_lift_basis(c: &Matrix) -> Matrix {
    let (m, n) = (c.rows(), c.cols());
    let mut b = Matrix::zeros(2 * m + 2 * n, m + n);
    for j in 0..n {
        for i in 0..m {
            b[(i, j)] = c[(i, j)].clone();
        }
        b[(2 * m + j, j)] = Rational::one();
    }
    for i in 0..m {
        b[(m + i, n + i)] = Rational::one();
        for j in 0..n {
            b[(2 * m + n + j, n + i)] = c[(i, j)].clone();
        }
    }
    b
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linsympl::is_lagrangian;
    use crate::micro::is_micromorphism;

    #[test]
    fn same_seed_same_stream() {
        let a = Sampler::new(7).any_morphism(3, 4);
        let b = Sampler::new(7).any_morphism(3, 4);
        assert_eq!(a, b);
    }

    #[test]
    fn coefficients_are_bounded() {
        let mut s = Sampler::new(1);
        for _ in 0..200 {
            let c = s.coeff();
            assert!(!c.is_zero());
            assert!(c.numer().magnitude() <= &9u32.into());
            assert!(c.denom() <= &9.into());
        }
    }

    #[test]
    fn generated_objects_are_valid() {
        let mut s = Sampler::new(3);
        for _ in 0..10 {
            let f = s.any_morphism(3, 3);
            assert!(is_micromorphism(f.generating_function(), f.source(), f.target()).unwrap().ok());
            let a = s.symplectic(2);
            assert!(LinCanonicalRelation::graph(&a).is_ok());
            let v = s.lagrangian_relation(2, 1).unwrap();
            assert!(is_lagrangian(&v.factors(), v.basis()).unwrap().ok());
            let bad = s.violating(2, 2, 2);
            assert!(!bad.core_part().is_zero());
        }
    }

    #[test]
    fn linear_lift_is_lagrangian() {
        let c = Matrix::from_rows(vec![vec![rat(1), rat(2), rat(0)], vec![rat(0), rat(-1), rat(3)]]);
        assert!(LinCanonicalRelation::new(2, 3, linear_lift_basis(&c)).is_ok());
    }
}
