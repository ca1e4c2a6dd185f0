//! Seeded end-to-end verification suite.
//!
//! Each criterion draws its instances from its own stream derived from the
//! seed and reports exact pass/fail counts. Reports contain no timings, so a
//! fixed seed yields byte-identical output.

use std::fmt;

use crate::error::Result;
use crate::jetalg::{rat, Block, FiberGradedPoly, Rational};
use crate::linsympl::{compose_linear, is_lagrangian, transverse_to_splitting, LinCanonicalRelation};
use crate::matrix::Matrix;
use crate::micro::{
    compose, cotangent_lift, extract_germ, graph_of_germ, identity, is_micromorphism,
    symmetry, tangent_relation_at, tensor, CoreMap, MicroObject, Micromorphism,
};
use crate::operad::{check_operad_axioms, diagonal_lift, operad_compose, AxiomBounds};
use crate::sample::Sampler;
use crate::text::serialize_morphism;

/// Outcome of one criterion.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CriterionResult {
    pub number: u32,
    pub name: String,
    pub checks: usize,
    pub failures: Vec<String>,
}

impl CriterionResult {
    fn new(number: u32, name: &str) -> Self {
        CriterionResult {
            number,
            name: name.to_string(),
            checks: 0,
            failures: Vec::new(),
        }
    }

    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }

    fn check(&mut self, ok: bool, what: impl FnOnce() -> String) {
        self.checks += 1;
        if !ok {
            self.failures.push(what());
        }
    }

    fn check_result(&mut self, outcome: Result<bool>, what: impl FnOnce() -> String) {
        match outcome {
            Ok(ok) => self.check(ok, what),
            Err(e) => {
                self.checks += 1;
                self.failures.push(format!("{}: {e}", what()));
            }
        }
    }
}

impl fmt::Display for CriterionResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "criterion {}: {} ... {} ({} checks, {} failed)",
            self.number,
            self.name,
            if self.passed() { "pass" } else { "FAIL" },
            self.checks,
            self.failures.len()
        )?;
        for msg in &self.failures {
            write!(f, "\n  - {msg}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SelfCheckReport {
    pub seed: u64,
    pub criteria: Vec<CriterionResult>,
}

impl SelfCheckReport {
    pub fn passed(&self) -> bool {
        self.criteria.iter().all(CriterionResult::passed)
    }
}

impl fmt::Display for SelfCheckReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "selfcheck seed={}", self.seed)?;
        for c in &self.criteria {
            writeln!(f, "{c}")?;
        }
        let ok = self.criteria.iter().filter(|c| c.passed()).count();
        writeln!(f, "[summary]")?;
        writeln!(f, "criteria={}", self.criteria.len())?;
        writeln!(f, "passed={ok}")?;
        writeln!(f, "failed={}", self.criteria.len() - ok)?;
        writeln!(f, "status={}", if self.passed() { "pass" } else { "fail" })
    }
}

fn sampler(seed: u64, criterion: u64) -> Sampler {
    Sampler::new(seed.wrapping_mul(0x9E37_79B9_7F4A_7C15).wrapping_add(criterion))
}

fn obj(n: usize) -> MicroObject {
    MicroObject::new(n)
}

/// Criteria 1 and 2: unit and associativity laws, then closure and the core
/// functor on every composite formed along the way.
pub fn category_laws(seed: u64) -> (CriterionResult, CriterionResult) {
    let mut laws = CriterionResult::new(1, "category laws");
    let mut closure = CriterionResult::new(2, "closure of composition");
    let mut s = sampler(seed, 1);
    let mut composites: Vec<(Micromorphism, Micromorphism, Micromorphism)> = Vec::new();

    for i in 0..200 {
        let f = s.any_morphism(3, 4);
        let k = f.order();
        let left = identity(f.target(), k).and_then(|id| compose(&id, &f));
        let right = identity(f.source(), k).and_then(|id| compose(&f, &id));
        laws.check_result(
            left.and_then(|l| Ok(l == f && right? == f)),
            || format!("unit law, morphism {i}: {}", f.generating_function()),
        );
    }

    for i in 0..100 {
        // at most two nonlinear cores per triple, except in dimension one
        let (dims, degrees) = if i % 10 == 0 {
            (vec![1; 4], [2, 2, 2])
        } else {
            let mut degrees = [2, 2, 1];
            s.shuffle(&mut degrees);
            ((0..4).map(|_| s.range(1, 3)).collect::<Vec<_>>(), degrees)
        };
        let k = s.range(1, 4) as u32;
        let f = s.morphism_of_degree(dims[0], dims[1], k, degrees[0]);
        let g = s.morphism_of_degree(dims[1], dims[2], k, degrees[1]);
        let h = s.morphism_of_degree(dims[2], dims[3], k, degrees[2]);
        let outcome = (|| {
            let gf = compose(&g, &f)?;
            let hg = compose(&h, &g)?;
            let a = compose(&h, &gf)?;
            let b = compose(&hg, &f)?;
            let same = serialize_morphism(&a) == serialize_morphism(&b);
            composites.push((a, h.clone(), gf.clone()));
            composites.push((gf, g.clone(), f.clone()));
            composites.push((hg, h.clone(), g.clone()));
            Ok(same)
        })();
        laws.check_result(outcome, || format!("associativity, triple {i} (dims {dims:?}, K={k})"));
    }

    for (i, (gf, g, f)) in composites.iter().enumerate() {
        let valid = is_micromorphism(gf.generating_function(), gf.source(), gf.target()).map(|c| c.ok());
        closure.check_result(valid, || format!("composite {i} fails the micromorphism check"));
        let cores = f.core().after(g.core()).map(|c| c == *gf.core());
        closure.check_result(cores, || format!("composite {i}: core is not the reversed composite"));
    }
    (laws, closure)
}

/// Criterion 3: `T*ψ ∘ T*φ = T*(φ ∘ ψ)`.
pub fn lift_functoriality(seed: u64) -> CriterionResult {
    let mut r = CriterionResult::new(3, "cotangent-lift functoriality");
    let x = |k| FiberGradedPoly::base_var(0, 1, 0, 0).map(|v| v.pow(k));
    let worked = (|| {
        let phi = CoreMap::new(1, vec![x(2)?])?;
        let psi = CoreMap::new(1, vec![x(3)?])?;
        let c = compose(&cotangent_lift(&psi, 2)?, &cotangent_lift(&phi, 2)?)?;
        Ok(c.generating_function().to_string() == "p1*x1^6")
    })();
    r.check_result(worked, || "p*x^2 then p*x^3 does not give p*x^6".into());

    let mut s = sampler(seed, 3);
    for i in 0..100 {
        let (m, n, q) = (s.range(1, 3), s.range(1, 3), s.range(1, 3));
        let k = s.range(1, 4) as u32;
        let phi = s.core_map(n, m, 2);
        let psi = s.core_map(q, n, 2);
        let outcome = (|| {
            let lhs = compose(&cotangent_lift(&psi, k)?, &cotangent_lift(&phi, k)?)?;
            Ok(lhs == cotangent_lift(&phi.after(&psi)?, k)?)
        })();
        r.check_result(outcome, || format!("pair {i}: phi = {phi}, psi = {psi}"));
    }
    r
}

/// Criterion 4: transversality to sampled splittings along the core, and
/// rejection of normal-form violations.
pub fn transversality(seed: u64) -> CriterionResult {
    let mut r = CriterionResult::new(4, "transversality equivalences");
    let mut s = sampler(seed, 4);
    for i in 0..50 {
        let f = s.any_morphism(3, 4);
        let n = f.target().dim();
        for _ in 0..5 {
            let b = s.point(n);
            let v = match tangent_relation_at(&f, &b) {
                Ok(v) => v,
                Err(e) => {
                    r.check(false, || format!("morphism {i}: tangent relation: {e}"));
                    continue;
                }
            };
            for _ in 0..20 {
                let k = s.splitting(n);
                r.check_result(transverse_to_splitting(&v, &k), || {
                    format!("morphism {i} at {b:?}: not transverse to B = {}", k.matrix())
                });
            }
        }
    }
    for i in 0..50 {
        let (m, n) = (s.range(1, 3), s.range(1, 3));
        let k = s.range(1, 4) as u32;
        let bad = s.violating(m, n, k);
        let outcome = is_micromorphism(&bad, &obj(m), &obj(n))
            .map(|c| !c.ok() && !c.linear_failures.is_empty());
        r.check_result(outcome, || format!("violation {i} accepted: {bad}"));
    }
    r
}

/// Criterion 5: linear relation composition.
pub fn linear_layer(seed: u64) -> CriterionResult {
    let mut r = CriterionResult::new(5, "linear canonical relations");
    let mut s = sampler(seed, 5);
    for i in 0..500 {
        let (a, b, c) = (s.range(1, 3), s.range(1, 3), s.range(1, 3));
        let outcome = (|| {
            let v = s.lagrangian_relation(a, b)?;
            let w = s.lagrangian_relation(b, c)?;
            let wv = compose_linear(&w, &v)?;
            Ok(is_lagrangian(&wv.factors(), wv.basis())?.ok())
        })();
        r.check_result(outcome, || format!("composition {i} ({a} -> {b} -> {c})"));
    }
    for i in 0..100 {
        let n = if i % 2 == 0 { 1 } else { 2 };
        let a = s.symplectic(n);
        let b = s.symplectic(n);
        let outcome = (|| {
            let lhs = compose_linear(&LinCanonicalRelation::graph(&b)?, &LinCanonicalRelation::graph(&a)?)?;
            Ok(lhs.same_as(&LinCanonicalRelation::graph(&b.mul(&a)?)?))
        })();
        r.check_result(outcome, || format!("graph composition {i}: A = {a}, B = {b}"));
    }
    r
}

/// Criterion 6: symmetric monoidal structure and the unit object.
pub fn monoidal(seed: u64) -> CriterionResult {
    let mut r = CriterionResult::new(6, "symmetric monoidal axioms");
    let mut s = sampler(seed, 6);
    for a in 0..=3 {
        for b in 0..=3 {
            let outcome = (|| {
                let k = 3;
                let twice = compose(&symmetry(&obj(b), &obj(a), k)?, &symmetry(&obj(a), &obj(b), k)?)?;
                Ok(twice == identity(&obj(a + b), k)?)
            })();
            r.check_result(outcome, || format!("symmetry squared, dims ({a}, {b})"));
        }
    }
    for i in 0..50 {
        let d: Vec<usize> = (0..4).map(|_| s.range(1, 2)).collect();
        let k = s.range(1, 3) as u32;
        let f = s.morphism(d[0], d[1], k);
        let g = s.morphism(d[2], d[3], k);
        let outcome = (|| {
            let lhs = compose(&symmetry(f.target(), g.target(), k)?, &tensor(&f, &g)?)?;
            let rhs = compose(&tensor(&g, &f)?, &symmetry(f.source(), g.source(), k)?)?;
            Ok(lhs == rhs)
        })();
        r.check_result(outcome, || format!("naturality square {i}"));
    }
    for i in 0..50 {
        let d: Vec<usize> = (0..6).map(|_| s.range(1, 2)).collect();
        let k = s.range(1, 3) as u32;
        let f1 = s.morphism(d[0], d[1], k);
        let g1 = s.morphism(d[1], d[2], k);
        let f2 = s.morphism(d[3], d[4], k);
        let g2 = s.morphism(d[4], d[5], k);
        let outcome = (|| {
            let lhs = compose(&tensor(&g1, &g2)?, &tensor(&f1, &f2)?)?;
            let rhs = tensor(&compose(&g1, &f1)?, &compose(&g2, &f2)?)?;
            Ok(lhs == rhs)
        })();
        r.check_result(outcome, || format!("interchange quadruple {i}"));
    }
    let unit = MicroObject::unit();
    for n in 0..=3 {
        let k = 2;
        let zero = FiberGradedPoly::zero(0, n, k);
        r.check_result(
            is_micromorphism(&zero, &unit, &obj(n)).map(|c| c.ok()),
            || format!("S = 0 rejected as a morphism E -> {n}"),
        );
        if n == 0 {
            continue;
        }
        for j in 0..5 {
            let terms: Vec<(Vec<u32>, Rational)> = (0..s.range(1, 3))
                .map(|_| {
                    let e: Vec<u32> = (0..n).map(|_| s.range(0, 2) as u32).collect();
                    (e, s.coeff())
                })
                .collect();
            let other = FiberGradedPoly::from_terms(0, n, k, terms);
            if other.is_zero() {
                continue;
            }
            r.check_result(
                is_micromorphism(&other, &unit, &obj(n)).map(|c| !c.ok()),
                || format!("nonzero S = {other} accepted as a morphism E -> {n} ({j})"),
            );
        }
    }
    r
}

/// Criterion 7: operad axioms on `L_Δ` and on random elements of `L`.
pub fn operad_axioms(seed: u64) -> CriterionResult {
    let mut r = CriterionResult::new(7, "operad axioms");
    let x = obj(1);
    let named = (|| {
        let k = 3;
        let d = |a| diagonal_lift(&x, a, k);
        let left = operad_compose(&d(2)?, &[d(2)?, d(1)?])?;
        let right = operad_compose(&d(2)?, &[d(1)?, d(2)?])?;
        let e_insert = operad_compose(&d(2)?, &[d(1)?, d(0)?])?;
        Ok(left == d(3)? && right == d(3)? && e_insert == d(1)?)
    })();
    r.check_result(named, || "diagonal identities in arity 2 and 3".into());

    let seed = sampler(seed, 7).next_u64();
    match check_operad_axioms(&x, seed, AxiomBounds::default()) {
        Ok(report) => {
            for c in report.cases {
                r.check(c.passed, || {
                    format!("{} seed={:?} arities={:?}: {}", c.identity, c.seed, c.arities, c.detail)
                });
            }
        }
        Err(e) => r.check(false, || format!("axiom suite: {e}")),
    }
    r
}

/// Criterion 8: germ round trip on affine-invertible cores.
pub fn germ_round_trip(seed: u64) -> CriterionResult {
    let mut r = CriterionResult::new(8, "germ round trip");
    let worked = (|| {
        let s = crate::text::parse_poly("p1*x1 + 1/2*p1^2", 1, 1, 2)?;
        let f = Micromorphism::new(obj(1), obj(1), s)?;
        let g = extract_germ(&f)?;
        Ok(g.position()[0].to_string() == "-p1 + x1"
            && g.momentum()[0].to_string() == "p1"
            && graph_of_germ(&g)? == f)
    })();
    r.check_result(worked, || "S = p*x + p^2/2".into());

    let mut s = sampler(seed, 8);
    for i in 0..50 {
        let n = s.range(1, 3);
        let k = s.range(1, 4) as u32;
        let f = s.affine_morphism(n, k);
        let outcome = extract_germ(&f).and_then(|g| graph_of_germ(&g)).map(|h| h == f);
        r.check_result(outcome, || format!("morphism {i}: {}", f.generating_function()));
    }
    r
}

fn gradient_at(s: &FiberGradedPoly, block: Block, p: &[Rational], x: &[Rational]) -> Result<Vec<Rational>> {
    let len = match block {
        Block::Fiber => s.fiber_arity(),
        Block::Base => s.base_arity(),
    };
    (0..len).map(|i| s.partial(block, i)?.eval(p, x)).collect()
}

/// A truncation-free composable pair `f: [m] -> [n]`, `g: [n] -> [q]`.
///
/// Either `g` is a cotangent lift, or `dS_f/dx` is linear in `p1` and the
/// p-nonlinear part of `S_g` is free of `x3`.
fn truncation_free_pair(s: &mut Sampler, i: usize) -> (Micromorphism, Micromorphism) {
    let (m, n, q) = (s.range(1, 3), s.range(1, 3), s.range(1, 3));
    let k = s.range(2, 4) as u32;
    if i.is_multiple_of(2) {
        let f = s.morphism(m, n, k);
        let g = cotangent_lift(&s.core_map(q, n, 2), k).expect("lift");
        (f, g)
    } else {
        let lin = Matrix::from_fn(m, n, |_, _| rat(s.small_int(3)));
        let c: Vec<Rational> = (0..m).map(|_| s.coeff()).collect();
        let f = s.morphism_with_core(&CoreMap::affine(&lin, &c), k);
        let psi = s.core_map(q, n, 2);
        let g = s.morphism_with_core(&psi, k);
        (strip_base(&f), strip_base(&g))
    }
}

/// Drops the x-dependence of all terms of p-degree at least two.
fn strip_base(f: &Micromorphism) -> Micromorphism {
    let s = f.generating_function();
    let (m, n) = (s.fiber_arity(), s.base_arity());
    let terms = s.terms().filter_map(|(mono, c)| {
        let e = mono.exponents();
        let p_deg: u32 = e[..m].iter().sum();
        let x_deg: u32 = e[m..].iter().sum();
        (p_deg <= 1 || x_deg == 0).then(|| (e.to_vec(), c.clone()))
    });
    let s = FiberGradedPoly::from_terms(m, n, s.order(), terms);
    Micromorphism::new(f.source().clone(), f.target().clone(), s).expect("normal form kept")
}

/// Criterion 9: pointwise composition of the relations `V` and `W`.
///
/// For sampled `(p1, x3)`, the middle point `(x2, p2)` is found by exact
/// pointwise iteration, and the resulting `(x1, p1, x3, p3)` must satisfy
/// the equations of `V`, of `W`, and of the composite generating function.
pub fn pointwise_oracle(seed: u64) -> CriterionResult {
    let mut r = CriterionResult::new(9, "pointwise relation composition");
    let mut s = sampler(seed, 9);
    for i in 0..20 {
        let (f, g) = truncation_free_pair(&mut s, i);
        let composite = match compose(&g, &f) {
            Ok(c) => c,
            Err(e) => {
                r.check(false, || format!("instance {i}: {e}"));
                continue;
            }
        };
        let (sf, sg, sc) = (f.generating_function(), g.generating_function(), composite.generating_function());
        for j in 0..5 {
            let p1 = s.point(f.source().dim());
            let x3 = s.point(g.target().dim());
            let outcome = (|| {
                let mut x2 = g.core().eval(&x3)?;
                let mut settled = false;
                for _ in 0..=sf.order() + 2 {
                    let p2 = gradient_at(sf, Block::Base, &p1, &x2)?;
                    let next = gradient_at(sg, Block::Fiber, &p2, &x3)?;
                    if next == x2 {
                        settled = true;
                        break;
                    }
                    x2 = next;
                }
                if !settled {
                    return Ok(false);
                }
                let p2 = gradient_at(sf, Block::Base, &p1, &x2)?;
                let x1 = gradient_at(sf, Block::Fiber, &p1, &x2)?;
                let p3 = gradient_at(sg, Block::Base, &p2, &x3)?;
                let in_v = x1 == gradient_at(sf, Block::Fiber, &p1, &x2)?
                    && p2 == gradient_at(sf, Block::Base, &p1, &x2)?;
                let in_w = x2 == gradient_at(sg, Block::Fiber, &p2, &x3)?
                    && p3 == gradient_at(sg, Block::Base, &p2, &x3)?;
                let in_c = x1 == gradient_at(sc, Block::Fiber, &p1, &x3)?
                    && p3 == gradient_at(sc, Block::Base, &p1, &x3)?;
                Ok(in_v && in_w && in_c)
            })();
            r.check_result(outcome, || format!("instance {i}, point {j}: p1 = {p1:?}, x3 = {x3:?}"));
        }
    }
    r
}

/// Criteria 1 through 9 in order.
pub fn run_all(seed: u64) -> SelfCheckReport {
    let (c1, c2) = category_laws(seed);
    let criteria = vec![
        c1,
        c2,
        lift_functoriality(seed),
        transversality(seed),
        linear_layer(seed),
        monoidal(seed),
        operad_axioms(seed),
        germ_round_trip(seed),
        pointwise_oracle(seed),
    ];
    SelfCheckReport { seed, criteria }
}
