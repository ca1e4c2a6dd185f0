//! Symplectic micromorphisms between cotangent microbundles `[T*R^n, R^n]`.
//!
//! A micromorphism `f: [T*R^m, R^m] -> [T*R^n, R^n]` is stored as a generating
//! function `S(p, x)` of mixed type: `p` are the fiber coordinates of the
//! source, `x` the base coordinates of the target, and the canonical relation
//! is
//!
//! ```text
//! V = { ((dS/dp, p), (x, dS/dx)) }.
//! ```
//!
//! The normal form `S(0, x) = 0` forces `V ∩ (A x N)` to be the graph of the
//! core map `phi(x) = dS/dp(0, x)`, which runs from the target core to the
//! source core. Because `d^2 S/dx^2 (0, x)` then vanishes, the tangent
//! condition holds automatically; [`is_micromorphism`] re-checks it at the
//! linear level instead of assuming it.
//!
//! `S` is exact in `x` and truncated at fiber order `K`. Every object is
//! represented by its canonical chart, so objects are equal iff their core
//! dimensions are.

use std::fmt;

use num_traits::{One, Zero};

use crate::error::{shape, Error, Result};
use crate::jetalg::{rat, solve_triangular_fixed_point, Block, FiberGradedPoly, Rational, Substitution};
use crate::linsympl::{self, LinCanonicalRelation};
use crate::matrix::Matrix;

/// A cotangent microbundle `[T*R^n, R^n]`.
#[derive(Debug, Clone, Eq)]
pub struct MicroObject {
    dim: usize,
    label: Option<String>,
}

impl MicroObject {
    pub fn new(dim: usize) -> Self {
        MicroObject { dim, label: None }
    }

    pub fn labeled(dim: usize, label: impl Into<String>) -> Self {
        MicroObject {
            dim,
            label: Some(label.into()),
        }
    }

    /// The unit `E = [T*{*}, {*}]`.
    pub fn unit() -> Self {
        MicroObject::labeled(0, "E")
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn label(&self) -> Option<&str> {
        self.label.as_deref()
    }

    pub fn tensor(&self, other: &Self) -> Self {
        MicroObject::new(self.dim + other.dim)
    }

    /// `self^{⊗k}`; `k = 0` gives `E`.
    pub fn power(&self, k: usize) -> Self {
        if k == 0 {
            Self::unit()
        } else {
            MicroObject::new(self.dim * k)
        }
    }
}

impl PartialEq for MicroObject {
    fn eq(&self, other: &Self) -> bool {
        self.dim == other.dim
    }
}

impl std::hash::Hash for MicroObject {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        self.dim.hash(state);
    }
}

impl fmt::Display for MicroObject {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.label {
            Some(l) => write!(f, "{l}[{}]", self.dim),
            None => write!(f, "[T*R^{0}, R^{0}]", self.dim),
        }
    }
}

/// The unit object `E`.
pub fn unit_object() -> MicroObject {
    MicroObject::unit()
}

/// Polynomial map `R^n -> R^m` between cores.
///
/// Components are polynomials in `n` base variables with no fiber block.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct CoreMap {
    source_dim: usize,
    components: Vec<FiberGradedPoly>,
}

impl CoreMap {
    pub fn new(source_dim: usize, components: Vec<FiberGradedPoly>) -> Result<Self> {
        for (i, c) in components.iter().enumerate() {
            if c.fiber_arity() != 0 || c.base_arity() != source_dim {
                return Err(shape(format!(
                    "core component {} must be a polynomial in {source_dim} base variables",
                    i + 1
                )));
            }
        }
        let components = components.into_iter().map(|c| c.with_order(0)).collect();
        Ok(CoreMap { source_dim, components })
    }

    pub fn identity(n: usize) -> Self {
        Self::linear(&Matrix::identity(n))
    }

    /// `x -> A x`.
    pub fn linear(a: &Matrix) -> Self {
        Self::affine(a, &vec![Rational::zero(); a.rows()])
    }

    /// `x -> A x + c`.
    pub fn affine(a: &Matrix, c: &[Rational]) -> Self {
        let n = a.cols();
        let components = (0..a.rows())
            .map(|i| {
                let mut terms = vec![(vec![0; n], c[i].clone())];
                for j in 0..n {
                    let mut e = vec![0; n];
                    e[j] = 1;
                    terms.push((e, a[(i, j)].clone()));
                }
                FiberGradedPoly::from_terms(0, n, 0, terms)
            })
            .collect();
        CoreMap { source_dim: n, components }
    }

    /// `Δ^k : R^n -> R^{kn}`, `x -> (x, ..., x)`.
    pub fn diagonal(n: usize, k: usize) -> Self {
        let block = Matrix::identity(n);
        let mut a = Matrix::zeros(0, n);
        for _ in 0..k {
            a = a.vstack(&block).expect("same width");
        }
        Self::linear(&a)
    }

    /// The unique map to the point.
    pub fn to_point(n: usize) -> Self {
        CoreMap {
            source_dim: n,
            components: Vec::new(),
        }
    }

    pub fn source_dim(&self) -> usize {
        self.source_dim
    }

    pub fn target_dim(&self) -> usize {
        self.components.len()
    }

    pub fn components(&self) -> &[FiberGradedPoly] {
        &self.components
    }

    /// `self ∘ inner`.
    pub fn after(&self, inner: &CoreMap) -> Result<CoreMap> {
        if inner.target_dim() != self.source_dim {
            return Err(shape(format!(
                "core composition: {} outputs into {} inputs",
                inner.target_dim(),
                self.source_dim
            )));
        }
        let components = self
            .components
            .iter()
            .map(|c| c.substitute_in(0, inner.source_dim, 0, &[], &inner.components))
            .collect::<Result<_>>()?;
        Ok(CoreMap {
            source_dim: inner.source_dim,
            components,
        })
    }

    /// `self x other` on `R^{n1 + n2}`.
    pub fn product(&self, other: &CoreMap) -> CoreMap {
        let n = self.source_dim + other.source_dim;
        let mut components: Vec<FiberGradedPoly> = self
            .components
            .iter()
            .map(|c| c.embed(0, 0, n, 0).expect("fits"))
            .collect();
        components.extend(
            other
                .components
                .iter()
                .map(|c| c.embed(0, 0, n, self.source_dim).expect("fits")),
        );
        CoreMap { source_dim: n, components }
    }

    pub fn eval(&self, x: &[Rational]) -> Result<Vec<Rational>> {
        self.components.iter().map(|c| c.eval(&[], x)).collect()
    }

    /// Jacobian at `x`, a `target_dim x source_dim` matrix.
    pub fn jacobian(&self, x: &[Rational]) -> Result<Matrix> {
        let mut out = Matrix::zeros(self.target_dim(), self.source_dim);
        for (i, c) in self.components.iter().enumerate() {
            for j in 0..self.source_dim {
                out[(i, j)] = c.partial(Block::Base, j)?.eval(&[], x)?;
            }
        }
        Ok(out)
    }

    /// `(A, c)` if the map is `x -> A x + c`.
    pub fn as_affine(&self) -> Option<(Matrix, Vec<Rational>)> {
        if self.components.iter().any(|c| c.terms().any(|(m, _)| m.degree() > 1)) {
            return None;
        }
        let zero = vec![Rational::zero(); self.source_dim];
        let a = self.jacobian(&zero).ok()?;
        let c = self.eval(&zero).ok()?;
        Some((a, c))
    }

    /// Inverse of an affine map with invertible linear part.
    pub fn affine_inverse(&self) -> Result<CoreMap> {
        let (a, c) = self.as_affine().ok_or_else(|| {
            Error::UnsupportedCore("core map is not affine".into())
        })?;
        let inv = a.inverse().ok_or_else(|| {
            Error::UnsupportedCore("affine core map has a singular linear part".into())
        })?;
        let shift = inv.mul_vec(&c)?.into_iter().map(|v| -v).collect::<Vec<_>>();
        Ok(CoreMap::affine(&inv, &shift))
    }

    /// Components placed into a space with `fiber` fiber variables at `order`.
    fn lifted(&self, fiber: usize, order: u32) -> Vec<FiberGradedPoly> {
        self.components
            .iter()
            .map(|c| c.embed(fiber, 0, self.source_dim, 0).expect("fits").with_order(order))
            .collect()
    }
}

impl fmt::Display for CoreMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("(")?;
        for (i, c) in self.components.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{c}")?;
        }
        f.write_str(")")
    }
}

/// A symplectic micromorphism in generating-function normal form.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Micromorphism {
    source: MicroObject,
    target: MicroObject,
    s: FiberGradedPoly,
    core: CoreMap,
}

impl Micromorphism {
    /// Validates arities, `K >= 1` and the normal form `S(0, x) = 0`.
    pub fn new(source: MicroObject, target: MicroObject, s: FiberGradedPoly) -> Result<Self> {
        if s.fiber_arity() != source.dim || s.base_arity() != target.dim {
            return Err(shape(format!(
                "generating function in ({} p, {} x) for a morphism {} -> {}",
                s.fiber_arity(),
                s.base_arity(),
                source.dim,
                target.dim
            )));
        }
        if s.order() < 1 {
            return Err(shape("fiber order must be at least 1"));
        }
        let bad = s.core_part();
        if !bad.is_zero() {
            return Err(Error::NormalForm(bad.to_string()));
        }
        let core = core_of(&s);
        Ok(Micromorphism { source, target, s, core })
    }

    pub fn source(&self) -> &MicroObject {
        &self.source
    }

    pub fn target(&self) -> &MicroObject {
        &self.target
    }

    pub fn order(&self) -> u32 {
        self.s.order()
    }

    pub fn generating_function(&self) -> &FiberGradedPoly {
        &self.s
    }

    /// `phi(x) = dS/dp(0, x)`, from the target core to the source core.
    pub fn core(&self) -> &CoreMap {
        &self.core
    }

    /// Same relation at a lower fiber order.
    pub fn truncate(&self, order: u32) -> Result<Self> {
        if order > self.order() {
            return Err(shape("cannot raise the order of a micromorphism"));
        }
        Micromorphism::new(self.source.clone(), self.target.clone(), self.s.with_order(order))
    }

    /// `g ∘ self`.
    pub fn then(&self, g: &Micromorphism) -> Result<Micromorphism> {
        compose(g, self)
    }
}

fn core_of(s: &FiberGradedPoly) -> CoreMap {
    let n = s.base_arity();
    let components = s
        .fiber_gradient()
        .into_iter()
        .map(|d| drop_fibers(&d.core_part()))
        .collect();
    CoreMap { source_dim: n, components }
}

/// Re-expresses a p-degree-0 polynomial without its fiber block.
fn drop_fibers(a: &FiberGradedPoly) -> FiberGradedPoly {
    let f = a.fiber_arity();
    FiberGradedPoly::from_terms(
        0,
        a.base_arity(),
        0,
        a.terms()
            .filter(|(m, _)| a.p_degree_of(m) == 0)
            .map(|(m, c)| (m.exponents()[f..].to_vec(), c.clone())),
    )
}

fn fiber_vars(fiber: usize, base: usize, order: u32) -> Vec<FiberGradedPoly> {
    (0..fiber)
        .map(|i| FiberGradedPoly::fiber_var(fiber, base, order, i).expect("in range"))
        .collect()
}

fn base_vars(fiber: usize, base: usize, order: u32) -> Vec<FiberGradedPoly> {
    (0..base)
        .map(|i| FiberGradedPoly::base_var(fiber, base, order, i).expect("in range"))
        .collect()
}

fn at_order(v: &[FiberGradedPoly], d: u32) -> Vec<FiberGradedPoly> {
    v.iter().map(|x| x.with_order(d)).collect()
}

fn dot(a: &[FiberGradedPoly], b: &[FiberGradedPoly], fiber: usize, base: usize, order: u32) -> FiberGradedPoly {
    a.iter()
        .zip(b)
        .fold(FiberGradedPoly::zero(fiber, base, order), |acc, (u, v)| &acc + &(u * v))
}

/// `id` with `S = sum_i p_i x_i`.
pub fn identity(obj: &MicroObject, order: u32) -> Result<Micromorphism> {
    cotangent_lift(&CoreMap::identity(obj.dim), order)
}

/// `T*phi` for `phi: R^n -> R^m`, with `S(p, x) = <p, phi(x)>`, a morphism
/// `[T*R^m, R^m] -> [T*R^n, R^n]`.
pub fn cotangent_lift(phi: &CoreMap, order: u32) -> Result<Micromorphism> {
    let (m, n) = (phi.target_dim(), phi.source_dim());
    let s = dot(&fiber_vars(m, n, order), &phi.lifted(m, order), m, n, order);
    Micromorphism::new(MicroObject::new(m), MicroObject::new(n), s)
}

/// `g ∘ f` for `f: [m] -> [n]` and `g: [n] -> [q]`.
///
/// With `S_f(p1, x2)` and `S_g(p2, x3)`, the composite is
/// `S(p1, x3) = S_f(p1, x2) + S_g(p2, x3) - <p2, x2>` at the critical point
/// `x2 = dS_g/dp(p2, x3)`, `p2 = dS_f/dx(p1, x2)`. The critical point is
/// reached by iterating on `x2` from `psi(x3)`; each step gains one order in
/// `p1` because `dS_f/dx` vanishes on the zero section. The composite is
/// stationary in `(x2, p2)`, so the order lost to the fiber derivative does
/// not reach `S` below p-degree `K + 1`.
pub fn compose(g: &Micromorphism, f: &Micromorphism) -> Result<Micromorphism> {
    if f.target != g.source {
        return Err(shape(format!(
            "cannot compose {} -> {} with {} -> {}",
            f.source, f.target, g.source, g.target
        )));
    }
    if f.order() != g.order() {
        return Err(shape(format!(
            "order mismatch: {} vs {}",
            f.order(),
            g.order()
        )));
    }
    let (m, q, k) = (f.source.dim, g.target.dim, f.order());
    let sf_x = f.s.base_gradient();
    let sg_p = g.s.fiber_gradient();
    let seed = g.core.lifted(m, k);
    let x2 = solve_triangular_fixed_point(seed, k, |x2, d| {
        let p2 = Substitution::new(m, q, d, &fiber_vars(m, q, d), x2)?.apply_all(&sf_x)?;
        Substitution::new(m, q, d, &p2, &base_vars(m, q, d))?.apply_all(&sg_p)
    })
    .map_err(|e| match e {
        Error::Convergence(msg) => Error::Internal(format!("composition fixed point: {msg}")),
        other => other,
    })?;
    let mut at_x2 = Substitution::new(m, q, k, &fiber_vars(m, q, k), &x2)?;
    let p2 = at_x2.apply_all(&sf_x)?;
    let mut at_p2 = Substitution::new(m, q, k, &p2, &base_vars(m, q, k))?;
    let s = &(&at_x2.apply(&f.s)? + &at_p2.apply(&g.s)?) - &dot(&p2, &x2, m, q, k);
    Micromorphism::new(f.source.clone(), g.target.clone(), s).map_err(|e| match e {
        Error::NormalForm(t) => Error::Internal(format!("composite violates the normal form: {t}")),
        other => other,
    })
}

/// `f1 ⊗ f2`, with `S = S1 + S2` in disjoint variable blocks.
pub fn tensor(f1: &Micromorphism, f2: &Micromorphism) -> Result<Micromorphism> {
    if f1.order() != f2.order() {
        return Err(shape(format!(
            "order mismatch: {} vs {}",
            f1.order(),
            f2.order()
        )));
    }
    let m = f1.source.dim + f2.source.dim;
    let n = f1.target.dim + f2.target.dim;
    let s = &f1.s.embed(m, 0, n, 0)? + &f2.s.embed(m, f1.source.dim, n, f1.target.dim)?;
    Micromorphism::new(f1.source.tensor(&f2.source), f1.target.tensor(&f2.target), s)
}

/// `f1 ⊗ ... ⊗ fk`; the empty product is `id_E`.
pub fn tensor_all(fs: &[Micromorphism], order: u32) -> Result<Micromorphism> {
    let mut acc = identity(&unit_object(), order)?;
    for f in fs {
        acc = tensor(&acc, f)?;
    }
    Ok(acc)
}

/// `σ_{a,b}: a ⊗ b -> b ⊗ a`, the cotangent lift of the factor swap
/// `(y_b, y_a) -> (y_a, y_b)`.
pub fn symmetry(a: &MicroObject, b: &MicroObject, order: u32) -> Result<Micromorphism> {
    let (da, db) = (a.dim, b.dim);
    let mut swap = Matrix::zeros(da + db, da + db);
    for i in 0..da {
        swap[(i, db + i)] = Rational::one();
    }
    for j in 0..db {
        swap[(da + j, j)] = Rational::one();
    }
    cotangent_lift(&CoreMap::linear(&swap), order)
}

/// `e_obj: E -> obj`, the unique morphism out of the unit, with `S = 0`.
pub fn unit_to(obj: &MicroObject, order: u32) -> Result<Micromorphism> {
    Micromorphism::new(
        unit_object(),
        obj.clone(),
        FiberGradedPoly::zero(0, obj.dim, order),
    )
}

/// Morphism `obj -> E` from a lagrangian germ through the point `∇tail(0)`,
/// transverse to the core.
pub fn point_morphism(obj: &MicroObject, tail: &FiberGradedPoly) -> Result<Micromorphism> {
    if tail.base_arity() != 0 || tail.fiber_arity() != obj.dim {
        return Err(shape(format!(
            "tail must be a polynomial in {} fiber variables only",
            obj.dim
        )));
    }
    Micromorphism::new(obj.clone(), unit_object(), tail.clone())
}

/// Result of [`is_micromorphism`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MicroCheck {
    /// Terms of `S(0, x)`; empty iff the normal form holds.
    pub offending_terms: Vec<String>,
    /// Failures of the linear-level checks at the sampled core points.
    pub linear_failures: Vec<String>,
}

impl MicroCheck {
    pub fn ok(&self) -> bool {
        self.offending_terms.is_empty() && self.linear_failures.is_empty()
    }
}

/// Deterministic sample points on the core `R^n`.
pub fn sample_core_points(n: usize) -> Vec<Vec<Rational>> {
    let vals = [rat(0), rat(1), crate::jetalg::frac(-1, 2), rat(2)];
    let mut out = vec![vec![rat(0); n], vec![rat(1); n]];
    out.push((0..n).map(|i| vals[(i + 2) % vals.len()].clone()).collect());
    out.push((0..n).map(|i| vals[(3 * i + 3) % vals.len()].clone()).collect());
    out.dedup();
    out
}

/// Checks that `S` generates a micromorphism `source -> target`.
///
/// Normal form I is checked symbolically. At each sampled core point `b`,
/// the linearization of `V` over `(p1, x2) = (0, b)` is then checked: the
/// base point must lie on the core of the target (`dS/dx(0, b) = 0`) and the
/// tangent relation must meet `TA x TN` exactly in the graph of `Dphi(b)`.
pub fn is_micromorphism(
    s: &FiberGradedPoly,
    source: &MicroObject,
    target: &MicroObject,
) -> Result<MicroCheck> {
    if s.fiber_arity() != source.dim || s.base_arity() != target.dim {
        return Err(shape(format!(
            "generating function in ({} p, {} x) for a morphism {} -> {}",
            s.fiber_arity(),
            s.base_arity(),
            source.dim,
            target.dim
        )));
    }
    let offending_terms: Vec<String> = s
        .core_part()
        .terms()
        .map(|(m, v)| {
            FiberGradedPoly::from_terms(
                s.fiber_arity(),
                s.base_arity(),
                s.order(),
                [(m.exponents().to_vec(), v.clone())],
            )
            .to_string()
        })
        .collect();
    let mut linear_failures = Vec::new();
    let core = core_of(s);
    let zero_p = vec![Rational::zero(); s.fiber_arity()];
    for b in sample_core_points(target.dim) {
        let tag = format_point(&b);
        for (j, d) in s.base_gradient().iter().enumerate() {
            let v = d.eval(&zero_p, &b)?;
            if !v.is_zero() {
                linear_failures.push(format!(
                    "at x = {tag}: image point has p{} = {v}, off the core",
                    j + 1
                ));
            }
        }
        let rel = raw_tangent_relation(s, &b)?;
        let phi = core.jacobian(&b)?;
        let d = linsympl::check_linear_micromorphism(&rel, &phi)?;
        for f in d.failures {
            linear_failures.push(format!("at x = {tag}: {f}"));
        }
    }
    Ok(MicroCheck {
        offending_terms,
        linear_failures,
    })
}

fn format_point(b: &[Rational]) -> String {
    let parts: Vec<String> = b.iter().map(ToString::to_string).collect();
    format!("({})", parts.join(", "))
}

/// Second partials of `s` at `(0, b)` as an `rows x cols` matrix.
fn hessian_block(s: &FiberGradedPoly, rb: Block, cb: Block, b: &[Rational]) -> Result<Matrix> {
    let count = |blk| match blk {
        Block::Fiber => s.fiber_arity(),
        Block::Base => s.base_arity(),
    };
    let zero_p = vec![Rational::zero(); s.fiber_arity()];
    let mut out = Matrix::zeros(count(rb), count(cb));
    for i in 0..count(rb) {
        let di = s.partial(rb, i)?;
        for j in 0..count(cb) {
            out[(i, j)] = di.partial(cb, j)?.eval(&zero_p, b)?;
        }
    }
    Ok(out)
}

/// Tangent space of the parametrized `V` over `(p1, x2) = (0, b)`, without
/// assuming the normal form.
fn raw_tangent_relation(s: &FiberGradedPoly, b: &[Rational]) -> Result<LinCanonicalRelation> {
    let (m, n) = (s.fiber_arity(), s.base_arity());
    let spp = hessian_block(s, Block::Fiber, Block::Fiber, b)?;
    let spx = hessian_block(s, Block::Fiber, Block::Base, b)?;
    let sxx = hessian_block(s, Block::Base, Block::Base, b)?;
    // parameters (dp1, dx2); rows (dx1, dp1, dx2, dp2)
    let top = spp.hstack(&spx)?;
    let ident = Matrix::identity(m + n);
    let bottom = spx.transpose().hstack(&sxx)?;
    let basis = top
        .vstack(&ident.row_block(0, m))?
        .vstack(&ident.row_block(m, m + n))?
        .vstack(&bottom)?;
    LinCanonicalRelation::new(m, n, basis)
        .map_err(|e| Error::Internal(format!("generating-function tangent space: {e}")))
}

/// `TV` at the core point `(phi(b), 0, b, 0)`:
/// `dx1 = Q dp1 + Dphi(b) dx2`, `dp2 = Dphi(b)^T dp1`, `Q = d^2S/dp^2(0, b)`.
pub fn tangent_relation_at(f: &Micromorphism, b: &[Rational]) -> Result<LinCanonicalRelation> {
    if b.len() != f.target.dim {
        return Err(shape(format!(
            "core point of dimension {}, target core is {}",
            b.len(),
            f.target.dim
        )));
    }
    raw_tangent_relation(&f.s, b)
}

/// Jets of a symplectomorphism germ `(x1, p1) -> (x2(x1, p1), p2(x1, p1))`
/// along the core.
///
/// Both maps live in `n` fiber variables `p1` and `n` base variables `x1`.
/// The position map is kept at fiber order `K - 1` and the momentum map at
/// order `K`: that is exactly what an order-`K` generating function
/// determines.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SymplectoGerm {
    order: u32,
    position: Vec<FiberGradedPoly>,
    momentum: Vec<FiberGradedPoly>,
}

impl SymplectoGerm {
    pub fn new(order: u32, position: Vec<FiberGradedPoly>, momentum: Vec<FiberGradedPoly>) -> Result<Self> {
        if order < 1 {
            return Err(shape("germ order must be at least 1"));
        }
        let n = position.len();
        if momentum.len() != n {
            return Err(shape("position and momentum maps differ in dimension"));
        }
        for x in &position {
            if (x.fiber_arity(), x.base_arity(), x.order()) != (n, n, order - 1) {
                return Err(shape(format!(
                    "position components must be in ({n} p, {n} x) at order {}",
                    order - 1
                )));
            }
        }
        for p in &momentum {
            if (p.fiber_arity(), p.base_arity(), p.order()) != (n, n, order) {
                return Err(shape(format!(
                    "momentum components must be in ({n} p, {n} x) at order {order}"
                )));
            }
        }
        Ok(SymplectoGerm { order, position, momentum })
    }

    pub fn identity(n: usize, order: u32) -> Result<Self> {
        Self::new(order, base_vars(n, n, order - 1), fiber_vars(n, n, order))
    }

    pub fn dim(&self) -> usize {
        self.position.len()
    }

    pub fn order(&self) -> u32 {
        self.order
    }

    pub fn position(&self) -> &[FiberGradedPoly] {
        &self.position
    }

    pub fn momentum(&self) -> &[FiberGradedPoly] {
        &self.momentum
    }

    /// `other ∘ self` as maps.
    pub fn then(&self, other: &SymplectoGerm) -> Result<SymplectoGerm> {
        if self.dim() != other.dim() || self.order != other.order {
            return Err(shape("germ composition: dimension or order mismatch"));
        }
        let (n, k) = (self.dim(), self.order);
        for p in &self.momentum {
            if p.min_p_degree() == Some(0) {
                return Err(Error::Validity("germ does not map the core into the core".into()));
            }
        }
        let p_low: Vec<_> = self.momentum.iter().map(|p| p.with_order(k - 1)).collect();
        let x_high: Vec<_> = self.position.iter().map(|x| x.with_order(k)).collect();
        let position = other
            .position
            .iter()
            .map(|x| x.substitute_in(n, n, k - 1, &p_low, &self.position))
            .collect::<Result<_>>()?;
        let momentum = other
            .momentum
            .iter()
            .map(|p| p.substitute_in(n, n, k, &self.momentum, &x_high))
            .collect::<Result<_>>()?;
        SymplectoGerm::new(k, position, momentum)
    }

    /// `(x1, p1) -> (x2, p2)` applied to a concrete point, using the
    /// polynomial representatives.
    pub fn apply(&self, x: &[Rational], p: &[Rational]) -> Result<(Vec<Rational>, Vec<Rational>)> {
        let xs = self.position.iter().map(|c| c.eval(p, x)).collect::<Result<_>>()?;
        let ps = self.momentum.iter().map(|c| c.eval(p, x)).collect::<Result<_>>()?;
        Ok((xs, ps))
    }
}

/// Affine core with invertible linear part, as `(A, c, A^{-1})`.
fn affine_invertible(core: &CoreMap) -> Result<(Matrix, Vec<Rational>, Matrix)> {
    let (a, c) = core
        .as_affine()
        .ok_or_else(|| Error::UnsupportedCore(format!("core map {core} is not affine")))?;
    let inv = a
        .inverse()
        .ok_or_else(|| Error::UnsupportedCore(format!("core map {core} is not invertible")))?;
    Ok((a, c, inv))
}

/// Applies a constant matrix to a vector of polynomials.
fn mat_apply(a: &Matrix, v: &[FiberGradedPoly], template: (usize, usize, u32)) -> Vec<FiberGradedPoly> {
    let (f, b, k) = template;
    (0..a.rows())
        .map(|i| {
            v.iter()
                .enumerate()
                .fold(FiberGradedPoly::zero(f, b, k), |acc, (j, vj)| {
                    &acc + &vj.scale(&a[(i, j)])
                })
        })
        .collect()
}

fn constants(c: &[Rational], template: (usize, usize, u32)) -> Vec<FiberGradedPoly> {
    c.iter()
        .map(|v| FiberGradedPoly::constant(template.0, template.1, template.2, v.clone()))
        .collect()
}

fn sub_all(a: &[FiberGradedPoly], b: &[FiberGradedPoly]) -> Vec<FiberGradedPoly> {
    a.iter().zip(b).map(|(u, v)| u - v).collect()
}

/// The symplectomorphism germ whose graph is `f`, for an affine invertible
/// core `phi(x) = A x + c`.
///
/// Solves `x1 = dS/dp(p1, x2)` for `x2` by the filtered fixed point
/// `x2 = A^{-1}(x1 - c - R(p1, x2))`, where `R = dS/dp - phi` has p-degree at
/// least one, seeded at `phi^{-1}(x1)`; then `p2 = dS/dx(p1, x2)`.
pub fn extract_germ(f: &Micromorphism) -> Result<SymplectoGerm> {
    let n = f.target.dim;
    if f.source.dim != n {
        return Err(Error::UnsupportedCore(format!(
            "core map R^{n} -> R^{} cannot be a diffeomorphism",
            f.source.dim
        )));
    }
    let (_, c, inv) = affine_invertible(&f.core)?;
    let k = f.order();
    let low = (n, n, k - 1);
    let x1 = base_vars(n, n, k - 1);
    let phi = f.core.lifted(n, k - 1);
    let rest: Vec<FiberGradedPoly> = sub_all(
        &f.s.fiber_gradient().iter().map(|d| d.with_order(k - 1)).collect::<Vec<_>>(),
        &phi,
    );
    let shifted = sub_all(&x1, &constants(&c, low));
    let seed = mat_apply(&inv, &shifted, low);
    let position = solve_triangular_fixed_point(seed, k - 1, |x2, d| {
        let p1 = fiber_vars(n, n, d);
        let r: Vec<_> = rest
            .iter()
            .map(|s| s.substitute_in(n, n, d, &p1, x2))
            .collect::<Result<_>>()?;
        Ok(mat_apply(&inv, &sub_all(&at_order(&shifted, d), &r), (n, n, d)))
    })
    .map_err(|e| match e {
        Error::Convergence(msg) => Error::Internal(format!("germ extraction fixed point: {msg}")),
        other => other,
    })?;
    let p1k = fiber_vars(n, n, k);
    let x2k: Vec<_> = position.iter().map(|x| x.with_order(k)).collect();
    let momentum = f
        .s
        .base_gradient()
        .iter()
        .map(|d| d.substitute_in(n, n, k, &p1k, &x2k))
        .collect::<Result<_>>()?;
    SymplectoGerm::new(k, position, momentum)
}

/// The graph of a symplectomorphism germ as a micromorphism.
///
/// The position map is inverted for `x1(p1, x2)` and the generating
/// function rebuilt by Euler's identity `S_d = <p, dS/dp>_d / d` on each
/// p-homogeneous part. The momentum map is then checked against `dS/dx`.
pub fn graph_of_germ(germ: &SymplectoGerm) -> Result<Micromorphism> {
    let (n, k) = (germ.dim(), germ.order());
    let low = (n, n, k - 1);
    for (i, p) in germ.momentum.iter().enumerate() {
        if !p.core_part().is_zero() {
            return Err(Error::Validity(format!(
                "momentum component {} does not vanish on the core",
                i + 1
            )));
        }
    }
    let core_inv = CoreMap::new(
        n,
        germ.position.iter().map(|x| drop_fibers(&x.core_part())).collect(),
    )?;
    let (a, d, inv) = affine_invertible(&core_inv)?;
    check_germ_linearization(germ)?;

    let x2 = base_vars(n, n, k - 1);
    let affine_part = {
        let lin = mat_apply(&a, &x2, low);
        lin.iter()
            .zip(constants(&d, low))
            .map(|(l, c)| l + &c)
            .collect::<Vec<_>>()
    };
    // H(x1, p1) = position - (A x1 + d), p-degree >= 1
    let higher = sub_all(&germ.position, &affine_part);
    let shifted = sub_all(&x2, &constants(&d, low));
    let seed = mat_apply(&inv, &shifted, low);
    let x1 = solve_triangular_fixed_point(seed, k - 1, |x1, d| {
        let p1 = fiber_vars(n, n, d);
        let h: Vec<_> = higher
            .iter()
            .map(|c| c.substitute_in(n, n, d, &p1, x1))
            .collect::<Result<_>>()?;
        Ok(mat_apply(&inv, &sub_all(&at_order(&shifted, d), &h), (n, n, d)))
    })
    .map_err(|e| match e {
        Error::Convergence(msg) => Error::Internal(format!("germ inversion fixed point: {msg}")),
        other => other,
    })?;

    let p1k = fiber_vars(n, n, k);
    let x1k: Vec<_> = x1.iter().map(|v| v.with_order(k)).collect();
    let euler = dot(&p1k, &x1k, n, n, k);
    let mut s = FiberGradedPoly::zero(n, n, k);
    for deg in 1..=k {
        s = &s + &euler.p_homogeneous_part(deg).scale(&Rational::new(1.into(), deg.into()));
    }

    // dS/dx must equal the momentum map expressed in (p1, x2)
    let pulled: Vec<_> = germ
        .momentum
        .iter()
        .map(|p| p.substitute_in(n, n, k, &p1k, &x1k))
        .collect::<Result<_>>()?;
    for (j, (ds, pm)) in s.base_gradient().iter().zip(&pulled).enumerate() {
        if ds.with_order(k - 1) != pm.with_order(k - 1) {
            return Err(Error::Validity(format!(
                "germ is not symplectic: momentum component {} disagrees with the generating function",
                j + 1
            )));
        }
    }
    Micromorphism::new(MicroObject::new(n), MicroObject::new(n), s)
}

/// `J^T Ω J = Ω` for the linearization at sampled core points.
fn check_germ_linearization(germ: &SymplectoGerm) -> Result<()> {
    let n = germ.dim();
    let omega = linsympl::form_matrix(&[linsympl::SymplecticVectorSpace::standard(n)]);
    let zero_p = vec![Rational::zero(); n];
    for b in sample_core_points(n) {
        let mut j = Matrix::zeros(2 * n, 2 * n);
        for (rows, maps) in [(0, &germ.position), (n, &germ.momentum)] {
            for (i, c) in maps.iter().enumerate() {
                for v in 0..n {
                    j[(rows + i, v)] = c.partial(Block::Base, v)?.eval(&zero_p, &b)?;
                    j[(rows + i, n + v)] = c.partial(Block::Fiber, v)?.eval(&zero_p, &b)?;
                }
            }
        }
        if j.transpose().mul(&omega)?.mul(&j)? != omega {
            return Err(Error::Validity(format!(
                "linearization at x = {} is not symplectic",
                format_point(&b)
            )));
        }
    }
    Ok(())
}

/// Inverse of a micromorphism with affine invertible core.
///
/// For `f` with `S(p1, x2)`, the inverse has
/// `S'(p2, x1) = <p2, x2> + <p1, x1> - S(p1, x2)` at the critical point
/// `x1 = dS/dp(p1, x2)`, `p2 = dS/dx(p1, x2)`.
pub fn inverse(f: &Micromorphism) -> Result<Micromorphism> {
    let n = f.target.dim;
    if f.source.dim != n {
        return Err(Error::UnsupportedCore("only endomorphism-shaped cores invert".into()));
    }
    let (a, c, inv) = affine_invertible(&f.core)?;
    let inv_t = inv.transpose();
    let k = f.order();
    let full = (n, n, k);
    // new variables: fiber p2, base x1
    let p2 = fiber_vars(n, n, k);
    let x1 = base_vars(n, n, k);
    let phi = f.core.lifted(n, k);
    let rest = sub_all(&f.s.fiber_gradient(), &phi);
    let p_lin = mat_apply(&a.transpose(), &fiber_vars(n, n, k), full);
    let curl = sub_all(&f.s.base_gradient(), &p_lin);
    let shifted = sub_all(&x1, &constants(&c, full));
    let mut seed = mat_apply(&inv_t, &p2, full);
    seed.extend(mat_apply(&inv, &shifted, full));
    let state = solve_triangular_fixed_point(seed, k, |z, d| {
        let (p1, x2) = z.split_at(n);
        let g: Vec<_> = curl
            .iter()
            .map(|s| s.substitute_in(n, n, d, p1, x2))
            .collect::<Result<_>>()?;
        let p1_new = mat_apply(&inv_t, &sub_all(&at_order(&p2, d), &g), (n, n, d));
        let r: Vec<_> = rest
            .iter()
            .map(|s| s.substitute_in(n, n, d, &p1_new, x2))
            .collect::<Result<_>>()?;
        let mut out = p1_new;
        out.extend(mat_apply(&inv, &sub_all(&at_order(&shifted, d), &r), (n, n, d)));
        Ok(out)
    })
    .map_err(|e| match e {
        Error::Convergence(msg) => Error::Internal(format!("inverse fixed point: {msg}")),
        other => other,
    })?;
    let (p1, x2) = state.split_at(n);
    let s = &(&dot(&p2, x2, n, n, k) + &dot(p1, &x1, n, n, k)) - &f.s.substitute_in(n, n, k, p1, x2)?;
    Micromorphism::new(f.target.clone(), f.source.clone(), s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::jetalg::frac;

    fn poly(fiber: usize, base: usize, k: u32, terms: &[(&[u32], Rational)]) -> FiberGradedPoly {
        FiberGradedPoly::from_terms(fiber, base, k, terms.iter().map(|(e, c)| (e.to_vec(), c.clone())))
    }

    fn morph(m: usize, n: usize, k: u32, terms: &[(&[u32], Rational)]) -> Micromorphism {
        Micromorphism::new(MicroObject::new(m), MicroObject::new(n), poly(m, n, k, terms)).unwrap()
    }

    fn power_map(e: u32) -> CoreMap {
        CoreMap::new(1, vec![poly(0, 1, 0, &[(&[e], rat(1))])]).unwrap()
    }

    #[test]
    fn identity_generating_functions() {
        let id = identity(&MicroObject::new(1), 2).unwrap();
        assert_eq!(id.generating_function().to_string(), "p1*x1");
        let e = identity(&unit_object(), 2).unwrap();
        assert!(e.generating_function().is_zero());
    }

    #[test]
    fn normal_form_violation_is_rejected() {
        let s = poly(1, 1, 2, &[(&[1, 1], rat(1)), (&[0, 2], rat(1))]);
        let err = Micromorphism::new(MicroObject::new(1), MicroObject::new(1), s).unwrap_err();
        assert_eq!(err, Error::NormalForm("x1^2".into()));
    }

    #[test]
    fn deformation_coefficients_add() {
        let (a, b) = (frac(2, 3), frac(-5, 7));
        let f = morph(1, 1, 3, &[(&[1, 1], rat(1)), (&[2, 0], a.clone())]);
        let g = morph(1, 1, 3, &[(&[1, 1], rat(1)), (&[2, 0], b.clone())]);
        let h = compose(&g, &f).unwrap();
        assert_eq!(h, morph(1, 1, 3, &[(&[1, 1], rat(1)), (&[2, 0], a + b)]));
    }

    #[test]
    fn lifts_of_powers_compose() {
        let f = cotangent_lift(&power_map(2), 3).unwrap();
        let g = cotangent_lift(&power_map(3), 3).unwrap();
        assert_eq!(f.generating_function().to_string(), "p1*x1^2");
        let h = compose(&g, &f).unwrap();
        assert_eq!(h.generating_function().to_string(), "p1*x1^6");
    }

    #[test]
    fn identity_is_a_unit() {
        let f = morph(1, 1, 2, &[(&[1, 1], rat(1)), (&[2, 1], rat(1))]);
        let id = identity(&MicroObject::new(1), 2).unwrap();
        assert_eq!(compose(&id, &f).unwrap(), f);
        assert_eq!(compose(&f, &id).unwrap(), f);
    }

    #[test]
    fn composition_shape_errors() {
        let f = identity(&MicroObject::new(1), 2).unwrap();
        let g = identity(&MicroObject::new(2), 2).unwrap();
        assert!(matches!(compose(&g, &f), Err(Error::Shape(_))));
        let h = identity(&MicroObject::new(1), 3).unwrap();
        assert!(matches!(compose(&h, &f), Err(Error::Shape(_))));
        assert!(matches!(tensor(&h, &f), Err(Error::Shape(_))));
    }

    #[test]
    fn diagonal_lift_and_core() {
        let f = cotangent_lift(&CoreMap::diagonal(1, 2), 2).unwrap();
        assert_eq!(f.generating_function().to_string(), "p1*x1 + p2*x1");
        assert_eq!(f.core(), &CoreMap::diagonal(1, 2));
    }

    #[test]
    fn tensor_of_identities() {
        let i1 = identity(&MicroObject::new(1), 2).unwrap();
        let i2 = identity(&MicroObject::new(2), 2).unwrap();
        assert_eq!(tensor(&i1, &i1).unwrap(), i2);
        let f = morph(1, 1, 2, &[(&[1, 1], rat(3)), (&[2, 0], rat(1))]);
        let e = identity(&unit_object(), 2).unwrap();
        assert_eq!(tensor(&e, &f).unwrap(), f);
        assert_eq!(tensor(&f, &e).unwrap(), f);
    }

    #[test]
    fn symmetry_squares_to_identity() {
        let (a, b) = (MicroObject::new(1), MicroObject::new(2));
        let s_ab = symmetry(&a, &b, 2).unwrap();
        let s_ba = symmetry(&b, &a, 2).unwrap();
        let id = identity(&a.tensor(&b), 2).unwrap();
        assert_eq!(compose(&s_ba, &s_ab).unwrap(), id);
        let e = unit_object();
        assert_eq!(symmetry(&e, &e, 2).unwrap(), identity(&e, 2).unwrap());
    }

    #[test]
    fn unit_morphisms() {
        let e = unit_object();
        assert_eq!(unit_to(&e, 2).unwrap(), identity(&e, 2).unwrap());
        let obj = MicroObject::new(2);
        let f = morph(2, 1, 2, &[(&[1, 0, 2], rat(1)), (&[0, 1, 1], rat(1)), (&[1, 1, 0], rat(4))]);
        let composed = compose(&f, &unit_to(&obj, 2).unwrap()).unwrap();
        assert_eq!(composed, unit_to(&MicroObject::new(1), 2).unwrap());
        // any p-free S in normal form is zero
        let s = poly(0, 2, 2, &[(&[1, 0], rat(1))]);
        assert!(Micromorphism::new(e.clone(), obj, s).is_err());
    }

    #[test]
    fn point_morphisms() {
        let obj = MicroObject::new(1);
        let tail = poly(1, 0, 2, &[(&[1], frac(3, 2)), (&[2], frac(5, 2))]);
        let nu = point_morphism(&obj, &tail).unwrap();
        assert_eq!(nu.core().components()[0].to_string(), "3/2");
        let rel = tangent_relation_at(&nu, &[]).unwrap();
        // dx1 = 5 dp1: basis column (5, 1)
        assert!(rel.contains_pair(&[rat(5), rat(1)], &[]).unwrap());
        let bad = poly(1, 0, 2, &[(&[0], rat(1)), (&[1], rat(1))]);
        assert!(matches!(point_morphism(&obj, &bad), Err(Error::NormalForm(_))));
        // composing with the unit closes to a scalar morphism E -> E
        let closed = compose(&nu, &unit_to(&obj, 2).unwrap()).unwrap();
        assert_eq!(closed, identity(&unit_object(), 2).unwrap());
    }

    #[test]
    fn micromorphism_checker() {
        let (a, b) = (MicroObject::new(1), MicroObject::new(1));
        let ok = poly(1, 1, 2, &[(&[1, 1], rat(1))]);
        assert!(is_micromorphism(&ok, &a, &b).unwrap().ok());
        let bad = poly(1, 1, 2, &[(&[1, 1], rat(1)), (&[0, 2], rat(1))]);
        let r = is_micromorphism(&bad, &a, &b).unwrap();
        assert_eq!(r.offending_terms, vec!["x1^2".to_string()]);
        assert!(!r.linear_failures.is_empty());
        assert!(is_micromorphism(&ok, &a, &MicroObject::new(2)).is_err());
    }

    #[test]
    fn tangent_relation_of_square_lift() {
        let f = cotangent_lift(&power_map(2), 2).unwrap();
        let rel = tangent_relation_at(&f, &[rat(1)]).unwrap();
        let d = linsympl::check_linear_micromorphism(&rel, &Matrix::from_rows(vec![vec![rat(2)]]))
            .unwrap();
        assert!(d.ok());
        // dx2 = 1 gives dx1 = 2
        assert!(rel.contains_pair(&[rat(2), rat(0)], &[rat(1), rat(0)]).unwrap());
    }

    #[test]
    fn germ_of_quadratic_generating_function() {
        let f = morph(1, 1, 2, &[(&[1, 1], rat(1)), (&[2, 0], frac(1, 2))]);
        let g = extract_germ(&f).unwrap();
        assert_eq!(g.position()[0].to_string(), "-p1 + x1");
        assert_eq!(g.momentum()[0].to_string(), "p1");
        assert_eq!(graph_of_germ(&g).unwrap(), f);
    }

    #[test]
    fn germ_of_affine_lift() {
        let a = Matrix::from_rows(vec![vec![rat(2), rat(1)], vec![rat(1), rat(1)]]);
        let phi = CoreMap::affine(&a, &[rat(1), rat(-3)]);
        let f = cotangent_lift(&phi, 2).unwrap();
        let g = extract_germ(&f).unwrap();
        let phi_inv = phi.affine_inverse().unwrap();
        for (pos, inv) in g.position().iter().zip(phi_inv.components()) {
            assert_eq!(pos.to_string(), inv.to_string());
        }
        // p2 = A^T p1
        assert_eq!(g.momentum()[0].to_string(), "2*p1 + p2");
        assert_eq!(g.momentum()[1].to_string(), "p1 + p2");
        assert_eq!(graph_of_germ(&g).unwrap(), f);
    }

    #[test]
    fn germ_extraction_rejects_unsupported_cores() {
        let f = cotangent_lift(&power_map(2), 2).unwrap();
        assert!(matches!(extract_germ(&f), Err(Error::UnsupportedCore(_))));
        let f = cotangent_lift(&CoreMap::linear(&Matrix::zeros(1, 1)), 2).unwrap();
        assert!(matches!(extract_germ(&f), Err(Error::UnsupportedCore(_))));
    }

    #[test]
    fn non_symplectic_germ_is_rejected() {
        // x2 = x1, p2 = 2 p1 scales the form
        let g = SymplectoGerm::new(
            2,
            vec![poly(1, 1, 1, &[(&[0, 1], rat(1))])],
            vec![poly(1, 1, 2, &[(&[1, 0], rat(2))])],
        )
        .unwrap();
        assert!(matches!(graph_of_germ(&g), Err(Error::Validity(_))));
    }

    #[test]
    fn inverse_round_trip() {
        let f = morph(1, 1, 3, &[(&[1, 1], rat(2)), (&[1, 0], rat(1)), (&[2, 1], rat(1)), (&[3, 0], frac(1, 3))]);
        let h = inverse(&f).unwrap();
        let id = identity(&MicroObject::new(1), 3).unwrap();
        assert_eq!(compose(&h, &f).unwrap(), id);
        assert_eq!(compose(&f, &h).unwrap(), id);
    }
}
