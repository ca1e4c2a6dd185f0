//! Exact linear symplectic algebra: lagrangian subspaces, linear canonical
//! relations, splittings and the transversality predicates.
//!
//! Coordinates on `R^{2n}` are ordered `(x, p)` and the form is
//! `omega((x,p),(x',p')) = <p,x'> - <p',x>`. A linear canonical relation from
//! `R^{2m}` to `R^{2n}` is a lagrangian subspace of the product with form
//! `-omega_source + omega_target`, in coordinates `(x1, p1, x2, p2)`.
//! Subspaces are compared by mutual containment, never by basis.

use num_traits::Zero;

use crate::error::{shape, Error, Result};
use crate::jetalg::Rational;
use crate::matrix::Matrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Sign {
    Plus,
    Minus,
}

/// `R^{2n}` with the standard form, or its opposite.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SymplecticVectorSpace {
    pub half_dim: usize,
    pub sign: Sign,
}

impl SymplecticVectorSpace {
    pub fn standard(n: usize) -> Self {
        SymplecticVectorSpace { half_dim: n, sign: Sign::Plus }
    }

    pub fn opposite(n: usize) -> Self {
        SymplecticVectorSpace { half_dim: n, sign: Sign::Minus }
    }
}

/// Gram matrix of the signed product form on `factors`.
pub fn form_matrix(factors: &[SymplecticVectorSpace]) -> Matrix {
    let total: usize = factors.iter().map(|f| 2 * f.half_dim).sum();
    let mut out = Matrix::zeros(total, total);
    let mut off = 0;
    for f in factors {
        let n = f.half_dim;
        let s = match f.sign {
            Sign::Plus => Rational::from_integer(1.into()),
            Sign::Minus => Rational::from_integer((-1).into()),
        };
        for i in 0..n {
            // omega(e_{x_i}, e_{p_i}) = -1, omega(e_{p_i}, e_{x_i}) = 1
            out[(off + i, off + n + i)] = -s.clone();
            out[(off + n + i, off + i)] = s.clone();
        }
        off += 2 * n;
    }
    out
}

/// `u^T J v` for the Gram matrix `J`.
fn pair(j: &Matrix, u: &[Rational], v: &[Rational]) -> Rational {
    let jv = j.mul_vec(v).expect("form dimension");
    u.iter().zip(&jv).fold(Rational::zero(), |acc, (a, b)| acc + a * b)
}

/// Outcome of a structural check, with human-readable reasons on failure.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Diagnosis {
    pub failures: Vec<String>,
}

impl Diagnosis {
    pub fn ok(&self) -> bool {
        self.failures.is_empty()
    }

    fn fail(&mut self, msg: impl Into<String>) {
        self.failures.push(msg.into());
    }
}

/// `true` iff the columns of `basis` span a lagrangian subspace of the
/// signed product of `factors`.
pub fn is_lagrangian(factors: &[SymplecticVectorSpace], basis: &Matrix) -> Result<Diagnosis> {
    let half: usize = factors.iter().map(|f| f.half_dim).sum();
    if basis.rows() != 2 * half {
        return Err(shape(format!(
            "basis has {} rows, ambient dimension is {}",
            basis.rows(),
            2 * half
        )));
    }
    let mut d = Diagnosis::default();
    let rank = basis.rank();
    if rank != half {
        d.fail(format!("rank {rank}, expected {half}"));
    }
    let j = form_matrix(factors);
    let cols = basis.columns();
    'outer: for a in 0..cols.len() {
        for b in a + 1..cols.len() {
            let w = pair(&j, &cols[a], &cols[b]);
            if !w.is_zero() {
                d.fail(format!("form pairs columns {a} and {b} to {w}"));
                break 'outer;
            }
        }
    }
    Ok(d)
}

/// `true` iff every column of `b` lies in the span of `a`.
pub fn contains(a: &Matrix, b: &Matrix) -> Result<bool> {
    if b.cols() == 0 {
        return Ok(true);
    }
    Ok(a.hstack(b)?.rank() == a.rank())
}

pub fn same_subspace(a: &Matrix, b: &Matrix) -> Result<bool> {
    Ok(contains(a, b)? && contains(b, a)?)
}

/// Basis of `span(a) ∩ span(b)`.
pub fn intersection(a: &Matrix, b: &Matrix) -> Result<Matrix> {
    let a = a.column_basis();
    let b = b.column_basis();
    let k = a.hstack(&b.scale(&Rational::from_integer((-1).into())))?.nullspace();
    let coeffs = k.row_block(0, a.cols());
    Ok(a.mul(&coeffs)?.column_basis())
}

fn check_symplectic_matrix(a: &Matrix) -> Result<()> {
    let n2 = a.rows();
    if a.cols() != n2 || !n2.is_multiple_of(2) {
        return Err(shape("symplectic matrix must be square of even size"));
    }
    let j = form_matrix(&[SymplecticVectorSpace::standard(n2 / 2)]);
    if a.transpose().mul(&j)?.mul(a)? != j {
        return Err(Error::Validity("matrix does not preserve the symplectic form".into()));
    }
    Ok(())
}

/// Lagrangian subspace of `(R^{2m}, -omega) x (R^{2n}, omega)`.
#[derive(Debug, Clone)]
pub struct LinCanonicalRelation {
    source: usize,
    target: usize,
    basis: Matrix,
}

impl LinCanonicalRelation {
    /// Validates the basis; redundant columns are dropped.
    pub fn new(source: usize, target: usize, basis: Matrix) -> Result<Self> {
        let d = is_lagrangian(&Self::factors_for(source, target), &basis)?;
        if !d.ok() {
            return Err(Error::Validity(format!(
                "not a lagrangian relation: {}",
                d.failures.join("; ")
            )));
        }
        Ok(LinCanonicalRelation {
            source,
            target,
            basis: basis.column_basis(),
        })
    }

    fn factors_for(source: usize, target: usize) -> [SymplecticVectorSpace; 2] {
        [
            SymplecticVectorSpace::opposite(source),
            SymplecticVectorSpace::standard(target),
        ]
    }

    pub fn factors(&self) -> [SymplecticVectorSpace; 2] {
        Self::factors_for(self.source, self.target)
    }

    pub fn source_half_dim(&self) -> usize {
        self.source
    }

    pub fn target_half_dim(&self) -> usize {
        self.target
    }

    pub fn basis(&self) -> &Matrix {
        &self.basis
    }

    pub fn identity(n: usize) -> Self {
        let i = Matrix::identity(2 * n);
        Self::graph(&i).expect("identity is symplectic")
    }

    /// `{(u, A u)}` for a symplectic `A`.
    pub fn graph(a: &Matrix) -> Result<Self> {
        check_symplectic_matrix(a)?;
        let n = a.rows() / 2;
        let basis = Matrix::identity(2 * n).vstack(a)?;
        Self::new(n, n, basis)
    }

    /// `L1 x L2` for lagrangian `L1 ⊂ R^{2m}`, `L2 ⊂ R^{2n}`.
    pub fn product(l1: &Matrix, l2: &Matrix) -> Result<Self> {
        if !l1.rows().is_multiple_of(2) || !l2.rows().is_multiple_of(2) {
            return Err(shape("product factors must have even dimension"));
        }
        Self::new(l1.rows() / 2, l2.rows() / 2, l1.direct_sum(l2))
    }

    /// Zero section `{p = 0}` of `R^{2n}`, as a basis.
    pub fn zero_section(n: usize) -> Matrix {
        Matrix::from_fn(2 * n, n, |i, j| {
            if i == j {
                Rational::from_integer(1.into())
            } else {
                Rational::zero()
            }
        })
    }

    fn source_block(&self) -> Matrix {
        self.basis.row_block(0, 2 * self.source)
    }

    fn target_block(&self) -> Matrix {
        self.basis
            .row_block(2 * self.source, 2 * (self.source + self.target))
    }

    /// Subspace equality by mutual containment.
    pub fn same_as(&self, other: &Self) -> bool {
        self.source == other.source
            && self.target == other.target
            && same_subspace(&self.basis, &other.basis).unwrap_or(false)
    }

    /// `true` iff `(u, w)` lies in the relation.
    pub fn contains_pair(&self, u: &[Rational], w: &[Rational]) -> Result<bool> {
        if u.len() != 2 * self.source || w.len() != 2 * self.target {
            return Err(shape("contains_pair: vector dimension"));
        }
        let v: Vec<Rational> = u.iter().chain(w).cloned().collect();
        contains(&self.basis, &Matrix::from_columns(v.len(), &[v]))
    }
}

/// `W ∘ V = {(u, w) : exists v, (u, v) in V, (v, w) in W}`.
pub fn compose_linear(w: &LinCanonicalRelation, v: &LinCanonicalRelation) -> Result<LinCanonicalRelation> {
    if v.target != w.source {
        return Err(shape(format!(
            "compose_linear: middle dimensions {} and {}",
            v.target, w.source
        )));
    }
    let (m, q) = (v.source, w.target);
    let vu = v.source_block();
    let vv = v.target_block();
    let wv = w.source_block();
    let ww = w.target_block();
    // pairs (a, b) with V_v a = W_v b
    let k = vv
        .hstack(&wv.scale(&Rational::from_integer((-1).into())))?
        .nullspace();
    let a = k.row_block(0, vv.cols());
    let b = k.row_block(vv.cols(), k.rows());
    let span = vu.mul(&a)?.vstack(&ww.mul(&b)?)?;
    let basis = span.column_basis();
    let d = is_lagrangian(&LinCanonicalRelation::factors_for(m, q), &basis)?;
    if !d.ok() {
        return Err(Error::Internal(format!(
            "linear composite is not lagrangian: {}",
            d.failures.join("; ")
        )));
    }
    Ok(LinCanonicalRelation { source: m, target: q, basis })
}

/// Affine subspace `point + span(directions)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AffineSubspace {
    pub point: Vec<Rational>,
    pub directions: Matrix,
}

impl AffineSubspace {
    pub fn contains(&self, w: &[Rational]) -> Result<bool> {
        if w.len() != self.point.len() {
            return Err(shape("affine subspace dimension"));
        }
        let diff: Vec<Rational> = w.iter().zip(&self.point).map(|(a, b)| a - b).collect();
        contains(&self.directions, &Matrix::from_columns(diff.len(), &[diff]))
    }

    pub fn same_as(&self, other: &Self) -> Result<bool> {
        Ok(self.contains(&other.point)? && same_subspace(&self.directions, &other.directions)?)
    }
}

/// `V(u) = {w : (u, w) in V}`, `None` when empty.
pub fn image_of_point(v: &LinCanonicalRelation, u: &[Rational]) -> Result<Option<AffineSubspace>> {
    if u.len() != 2 * v.source {
        return Err(shape("image_of_point: source vector dimension"));
    }
    let vu = v.source_block();
    let vw = v.target_block();
    let Some(a0) = vu.solve(u)? else {
        return Ok(None);
    };
    let point = vw.mul_vec(&a0)?;
    let directions = vw.mul(&vu.nullspace())?.column_basis();
    Ok(Some(AffineSubspace { point, directions }))
}

/// Checks `V ∩ ({p1 = 0} x R^{2n}) = {(Phi b, 0, b, 0)}` for the core map
/// matrix `phi` (`m x n`, from target core to source core).
pub fn check_linear_micromorphism(v: &LinCanonicalRelation, phi: &Matrix) -> Result<Diagnosis> {
    let (m, n) = (v.source, v.target);
    if phi.rows() != m || phi.cols() != n {
        return Err(shape(format!(
            "core matrix is {}x{}, expected {m}x{n}",
            phi.rows(),
            phi.cols()
        )));
    }
    let mut d = Diagnosis::default();
    let p1_rows = v.basis.row_block(m, 2 * m);
    let meet = v.basis.mul(&p1_rows.nullspace())?.column_basis();
    let graph = core_graph(phi);
    if meet.cols() != n {
        d.fail(format!(
            "intersection with the source core has dimension {}, expected {n}",
            meet.cols()
        ));
    }
    if !contains(&meet, &graph)? {
        d.fail("graph of the core map is not contained in the intersection");
    } else if !contains(&graph, &meet)? {
        d.fail("intersection leaves the graph of the core map");
    }
    Ok(d)
}

/// `{(Phi b, 0, b, 0)}` as a basis.
pub fn core_graph(phi: &Matrix) -> Matrix {
    let (m, n) = (phi.rows(), phi.cols());
    Matrix::from_fn(2 * m + 2 * n, n, |i, j| {
        if i < m {
            phi[(i, j)].clone()
        } else if i >= 2 * m && i < 2 * m + n {
            if i - 2 * m == j {
                Rational::from_integer(1.into())
            } else {
                Rational::zero()
            }
        } else {
            Rational::zero()
        }
    })
}

/// Lagrangian complement `K_B = {(B u, u)}` to the horizontal in `R^{2n}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Splitting {
    b: Matrix,
}

impl Splitting {
    pub fn new(b: Matrix) -> Result<Self> {
        if !b.is_symmetric() {
            return Err(Error::Validity("splitting matrix must be symmetric".into()));
        }
        let s = Splitting { b };
        // K_B meets {p = 0} trivially: the p-block of the basis is the identity.
        debug_assert_eq!(s.basis().row_block(s.half_dim(), 2 * s.half_dim()).rank(), s.half_dim());
        Ok(s)
    }

    /// The vertical splitting `B = 0`.
    pub fn vertical(n: usize) -> Self {
        Splitting { b: Matrix::zeros(n, n) }
    }

    pub fn half_dim(&self) -> usize {
        self.b.rows()
    }

    pub fn matrix(&self) -> &Matrix {
        &self.b
    }

    /// Columns `(B e_i, e_i)`.
    pub fn basis(&self) -> Matrix {
        self.b.vstack(&Matrix::identity(self.half_dim())).expect("square")
    }
}

/// `V` transverse to `TA x K` inside `R^{2m} x R^{2n}`, where `TA` is the
/// horizontal of the source.
pub fn transverse_to_splitting(v: &LinCanonicalRelation, k: &Splitting) -> Result<bool> {
    let (m, n) = (v.source, v.target);
    if k.half_dim() != n {
        return Err(shape(format!(
            "splitting of dimension {}, relation target is {n}",
            k.half_dim()
        )));
    }
    let ta = Matrix::from_fn(2 * m, m, |i, j| {
        if i == j {
            Rational::from_integer(1.into())
        } else {
            Rational::zero()
        }
    });
    let t = ta.direct_sum(&k.basis());
    let dim_v = v.basis.cols();
    let dims_ok = dim_v + t.cols() == 2 * (m + n);
    Ok(dims_ok && v.basis.hstack(&t)?.rank() == dim_v + t.cols())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::jetalg::rat;

    fn m(rows: &[&[i64]]) -> Matrix {
        Matrix::from_rows(rows.iter().map(|r| r.iter().map(|&v| rat(v)).collect()).collect())
    }

    #[test]
    fn zero_section_and_symmetric_graph_are_lagrangian() {
        let f = [SymplecticVectorSpace::standard(2)];
        let zs = LinCanonicalRelation::zero_section(2);
        assert!(is_lagrangian(&f, &zs).unwrap().ok());
        let s = m(&[&[1, 2], &[2, -3]]);
        let graph = Matrix::identity(2).vstack(&s).unwrap();
        assert!(is_lagrangian(&f, &graph).unwrap().ok());
    }

    #[test]
    fn x1_and_p1_axes_are_not_isotropic() {
        let f = [SymplecticVectorSpace::standard(2)];
        // columns e_{x1}, e_{p1} in (x1, x2, p1, p2)
        let b = m(&[&[1, 0], &[0, 0], &[0, 1], &[0, 0]]);
        let d = is_lagrangian(&f, &b).unwrap();
        assert!(!d.ok());
        // full rank, but omega(e_x1, e_p1) = -1
        assert_eq!(d.failures, vec!["form pairs columns 0 and 1 to -1".to_string()]);
        assert!(is_lagrangian(&f, &Matrix::zeros(3, 1)).is_err());
    }

    #[test]
    fn identity_is_a_unit() {
        let a = m(&[&[1, 1], &[0, 1]]);
        let g = LinCanonicalRelation::graph(&a).unwrap();
        let id = LinCanonicalRelation::identity(1);
        assert!(compose_linear(&g, &id).unwrap().same_as(&g));
        assert!(compose_linear(&id, &g).unwrap().same_as(&g));
    }

    #[test]
    fn graphs_compose_to_product() {
        let a = m(&[&[1, 1], &[0, 1]]);
        let b = m(&[&[2, 0], &[3, 1]]).scale(&rat(1));
        // b has determinant 2: not symplectic in dimension 2
        assert!(LinCanonicalRelation::graph(&b).is_err());
        let b = m(&[&[1, 0], &[3, 1]]);
        let ga = LinCanonicalRelation::graph(&a).unwrap();
        let gb = LinCanonicalRelation::graph(&b).unwrap();
        let ab = LinCanonicalRelation::graph(&a.mul(&b).unwrap()).unwrap();
        assert!(compose_linear(&ga, &gb).unwrap().same_as(&ab));
    }

    #[test]
    fn zero_sections_compose_to_zero_sections() {
        let zs = LinCanonicalRelation::zero_section(1);
        let v = LinCanonicalRelation::product(&zs, &zs).unwrap();
        let c = compose_linear(&v, &v).unwrap();
        assert!(c.same_as(&v));
    }

    #[test]
    fn image_of_point_cases() {
        let id = LinCanonicalRelation::identity(1);
        let u = vec![rat(3), rat(-2)];
        let img = image_of_point(&id, &u).unwrap().unwrap();
        assert_eq!(img.point, u);
        assert_eq!(img.directions.cols(), 0);

        let zs = LinCanonicalRelation::zero_section(1);
        let v = LinCanonicalRelation::product(&zs, &zs).unwrap();
        let img = image_of_point(&v, &[rat(5), rat(0)]).unwrap().unwrap();
        assert!(img.directions.cols() == 1 && same_subspace(&img.directions, &zs).unwrap());
        assert!(image_of_point(&v, &[rat(5), rat(1)]).unwrap().is_none());

        let a = m(&[&[1, 1], &[0, 1]]);
        let g = LinCanonicalRelation::graph(&a).unwrap();
        let img = image_of_point(&g, &u).unwrap().unwrap();
        assert_eq!(img.point, a.mul_vec(&u).unwrap());
    }

    #[test]
    fn linear_micromorphism_check() {
        let id = LinCanonicalRelation::identity(1);
        assert!(check_linear_micromorphism(&id, &Matrix::identity(1)).unwrap().ok());
        assert!(!check_linear_micromorphism(&id, &m(&[&[2]])).unwrap().ok());
        let zs = LinCanonicalRelation::zero_section(1);
        let v = LinCanonicalRelation::product(&zs, &zs).unwrap();
        // intersection is all of V (dimension 2 > 1)
        let d = check_linear_micromorphism(&v, &m(&[&[0]])).unwrap();
        assert!(!d.ok());
        assert!(d.failures[0].contains("dimension 2"));
    }

    #[test]
    fn transversality_cases() {
        let id = LinCanonicalRelation::identity(2);
        for b in [m(&[&[0, 0], &[0, 0]]), m(&[&[1, 2], &[2, 5]]), m(&[&[-3, 1], &[1, 0]])] {
            assert!(transverse_to_splitting(&id, &Splitting::new(b).unwrap()).unwrap());
        }
        // horizontal source vector paired with vertical target vector
        let zs = LinCanonicalRelation::zero_section(1);
        let fiber = m(&[&[0], &[1]]);
        let v = LinCanonicalRelation::product(&zs, &fiber).unwrap();
        assert!(!transverse_to_splitting(&v, &Splitting::vertical(1)).unwrap());
        assert!(Splitting::new(m(&[&[0, 1], &[2, 0]])).is_err());
    }
}
