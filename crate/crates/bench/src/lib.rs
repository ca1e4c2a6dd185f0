//! Fixed inputs shared by the criterion benchmarks.

use microsymp::micro::{self, CoreMap, MicroObject, Micromorphism};
use microsymp::{rat, FiberGradedPoly, Matrix};

/// `S = p1*x1 + p1^2*x1 + 1/2*p1^3` on `[T*R, R]` at order `k`.
pub fn deformed_identity(k: u32) -> Micromorphism {
    let s = FiberGradedPoly::from_terms(
        1,
        1,
        k,
        [
            (vec![1, 1], rat(1)),
            (vec![2, 1], rat(1)),
            (vec![3, 0], microsymp::frac(1, 2)),
        ],
    );
    Micromorphism::new(MicroObject::new(1), MicroObject::new(1), s).expect("normal form")
}

/// Cotangent lift of `x -> (x1 + x2^2, x2)` at order `k`.
pub fn shear_lift(k: u32) -> Micromorphism {
    let c1 = FiberGradedPoly::from_terms(0, 2, 0, [(vec![1, 0], rat(1)), (vec![0, 2], rat(1))]);
    let c2 = FiberGradedPoly::from_terms(0, 2, 0, [(vec![0, 1], rat(1))]);
    micro::cotangent_lift(&CoreMap::new(2, vec![c1, c2]).expect("core"), k).expect("lift")
}

/// A 4x4 symplectic shear.
pub fn symplectic_shear() -> Matrix {
    let mut m = Matrix::identity(4);
    m[(0, 2)] = rat(2);
    m[(0, 3)] = rat(1);
    m[(1, 2)] = rat(1);
    m
}
