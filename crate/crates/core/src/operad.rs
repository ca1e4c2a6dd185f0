//! Endomorphism operads of a micro-object and the lagrangian suboperads:
//! `L_Δ`, the cotangent lifts of diagonals, and `L`, the elements whose core
//! is a diagonal.

use std::fmt::Write as _;

use crate::error::{shape, Result};
use crate::micro::{self, CoreMap, MicroObject, Micromorphism};
use crate::sample::Sampler;

/// Element of `End(X)(k) = hom(X^⊗k, X)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OperadElement {
    base: MicroObject,
    arity: usize,
    morphism: Micromorphism,
}

impl OperadElement {
    pub fn new(base: MicroObject, arity: usize, morphism: Micromorphism) -> Result<Self> {
        if morphism.source().dim() != arity * base.dim() || morphism.target().dim() != base.dim() {
            return Err(shape(format!(
                "arity-{arity} element over {base} needs a morphism {} -> {}, got {} -> {}",
                base.power(arity),
                base,
                morphism.source(),
                morphism.target()
            )));
        }
        Ok(OperadElement { base, arity, morphism })
    }

    pub fn base(&self) -> &MicroObject {
        &self.base
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn morphism(&self) -> &Micromorphism {
        &self.morphism
    }

    pub fn order(&self) -> u32 {
        self.morphism.order()
    }
}

/// `T*Δ^k`; arity 1 is the identity and arity 0 is `e`.
pub fn diagonal_lift(obj: &MicroObject, k: usize, order: u32) -> Result<OperadElement> {
    let f = if k == 0 {
        micro::unit_to(obj, order)?
    } else {
        micro::cotangent_lift(&CoreMap::diagonal(obj.dim(), k), order)?
    };
    OperadElement::new(obj.clone(), k, f)
}

/// `F(G_1, ..., G_k) = F ∘ (G_1 ⊗ ... ⊗ G_k)`.
pub fn operad_compose(f: &OperadElement, gs: &[OperadElement]) -> Result<OperadElement> {
    if gs.len() != f.arity {
        return Err(shape(format!(
            "arity-{} element composed with {} inputs",
            f.arity,
            gs.len()
        )));
    }
    if let Some(g) = gs.iter().find(|g| g.base != f.base || g.order() != f.order()) {
        return Err(shape(format!(
            "input over {} at order {} does not match {} at order {}",
            g.base,
            g.order(),
            f.base,
            f.order()
        )));
    }
    let inputs: Vec<Micromorphism> = gs.iter().map(|g| g.morphism.clone()).collect();
    let t = micro::tensor_all(&inputs, f.order())?;
    let arity = gs.iter().map(|g| g.arity).sum();
    OperadElement::new(f.base.clone(), arity, micro::compose(&f.morphism, &t)?)
}

/// `true` iff the core is the `k`-diagonal.
pub fn is_in_l(elem: &OperadElement) -> bool {
    *elem.morphism.core() == CoreMap::diagonal(elem.base.dim(), elem.arity)
}

/// `true` iff the element is exactly `T*Δ^k`.
pub fn is_in_l_delta(elem: &OperadElement) -> bool {
    diagonal_lift(&elem.base, elem.arity, elem.order())
        .map(|d| d == *elem)
        .unwrap_or(false)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AxiomBounds {
    pub max_arity: usize,
    pub levels: usize,
    pub samples: usize,
    pub order: u32,
}

impl Default for AxiomBounds {
    fn default() -> Self {
        AxiomBounds {
            max_arity: 3,
            levels: 2,
            samples: 50,
            order: 3,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AxiomCase {
    pub identity: String,
    pub seed: Option<u64>,
    pub arities: Vec<usize>,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct AxiomReport {
    pub cases: Vec<AxiomCase>,
}

impl AxiomReport {
    pub fn passed(&self) -> usize {
        self.cases.iter().filter(|c| c.passed).count()
    }

    pub fn failed(&self) -> usize {
        self.cases.len() - self.passed()
    }

    pub fn all_passed(&self) -> bool {
        self.failed() == 0
    }

    fn push(&mut self, identity: &str, seed: Option<u64>, arities: Vec<usize>, outcome: Result<bool>) {
        let (passed, detail) = match outcome {
            Ok(true) => (true, String::new()),
            Ok(false) => (false, "sides differ".to_string()),
            Err(e) => (false, e.to_string()),
        };
        self.cases.push(AxiomCase {
            identity: identity.to_string(),
            seed,
            arities,
            passed,
            detail,
        });
    }

    /// One line per case, then a `key=value` summary block.
    pub fn render(&self) -> String {
        let mut out = String::new();
        for c in &self.cases {
            let seed = c.seed.map_or("-".to_string(), |s| s.to_string());
            let arities: Vec<String> = c.arities.iter().map(|a| a.to_string()).collect();
            let _ = write!(
                out,
                "{} seed={} arities=[{}] {}",
                c.identity,
                seed,
                arities.join(","),
                if c.passed { "pass" } else { "FAIL" }
            );
            if !c.detail.is_empty() {
                let _ = write!(out, " ({})", c.detail);
            }
            out.push('\n');
        }
        let mut per_identity: Vec<(&str, usize, usize)> = Vec::new();
        for c in &self.cases {
            match per_identity.iter_mut().find(|(n, _, _)| *n == c.identity) {
                Some(e) => {
                    e.1 += 1;
                    e.2 += usize::from(c.passed);
                }
                None => per_identity.push((&c.identity, 1, usize::from(c.passed))),
            }
        }
        out.push_str("[summary]\n");
        for (name, total, ok) in per_identity {
            let _ = writeln!(out, "{name}.total={total}\n{name}.passed={ok}");
        }
        let _ = writeln!(out, "total={}\npassed={}\nfailed={}", self.cases.len(), self.passed(), self.failed());
        let _ = writeln!(out, "status={}", if self.all_passed() { "pass" } else { "fail" });
        out
    }
}

/// All arity tuples `(k_1, ..., k_n)` with entries in `0..=max`.
fn tuples(n: usize, max: usize) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new()];
    for _ in 0..n {
        out = out
            .into_iter()
            .flat_map(|t| {
                (0..=max).map(move |k| {
                    let mut t = t.clone();
                    t.push(k);
                    t
                })
            })
            .collect();
    }
    out
}

/// `F(G_1(H..), ..., G_n(H..)) = F(G_1, ..., G_n)(H..)`.
fn two_level_associativity(
    f: &OperadElement,
    gs: &[OperadElement],
    hs: &[OperadElement],
) -> Result<bool> {
    let mut inner = Vec::with_capacity(gs.len());
    let mut rest = hs;
    for g in gs {
        let (mine, tail) = rest.split_at(g.arity);
        inner.push(operad_compose(g, mine)?);
        rest = tail;
    }
    let left = operad_compose(f, &inner)?;
    let right = operad_compose(&operad_compose(f, gs)?, hs)?;
    Ok(left == right)
}

/// Unit axioms `F(I, ..., I) = F` and `I(F) = F`.
fn unit_axiom(f: &OperadElement) -> Result<bool> {
    let id = diagonal_lift(&f.base, 1, f.order())?;
    let ids = vec![id.clone(); f.arity];
    Ok(operad_compose(f, &ids)? == *f && operad_compose(&id, std::slice::from_ref(f))? == *f)
}

/// Verifies the operad axioms on `L_Δ` exhaustively within `bounds` and on
/// `bounds.samples` random elements of `L` drawn from `seed`.
///
/// Exhaustive checks cover the unit axiom, `F(G_i) = T*Δ^{Σk_i}` for all
/// arity tuples (which includes `T*Δ²(T*Δ², id) = T*Δ³ = T*Δ²(id, T*Δ²)`
/// and the `e`-insertion identities), and, with two or more levels,
/// two-level associativity for every arity pattern. Random checks cover the
/// unit axiom, closure of `L` and two-level associativity.
pub fn check_operad_axioms(base: &MicroObject, seed: u64, bounds: AxiomBounds) -> Result<AxiomReport> {
    let k = bounds.order;
    let mut report = AxiomReport::default();
    let max = bounds.max_arity;
    let diag: Vec<OperadElement> = (0..=max).map(|a| diagonal_lift(base, a, k)).collect::<Result<_>>()?;

    for f in &diag {
        report.push("delta.unit", None, vec![f.arity], unit_axiom(f));
    }
    if bounds.levels >= 1 {
        for n in 0..=max {
            for t in tuples(n, max) {
                let gs: Vec<_> = t.iter().map(|&a| diag[a].clone()).collect();
                let outcome = operad_compose(&diag[n], &gs).and_then(|c| {
                    Ok(is_in_l_delta(&c) && c == diagonal_lift(base, t.iter().sum(), k)?)
                });
                let mut arities = vec![n];
                arities.extend(&t);
                report.push("delta.composite", None, arities, outcome);
            }
        }
    }
    if bounds.levels >= 2 {
        for n in 0..=max {
            for t in tuples(n, max) {
                let total: usize = t.iter().sum();
                if total > max {
                    continue;
                }
                for u in tuples(total, max) {
                    let gs: Vec<_> = t.iter().map(|&a| diag[a].clone()).collect();
                    let hs: Vec<_> = u.iter().map(|&a| diag[a].clone()).collect();
                    let mut arities = vec![n];
                    arities.extend(&t);
                    arities.extend(&u);
                    report.push(
                        "delta.associativity",
                        None,
                        arities,
                        two_level_associativity(&diag[n], &gs, &hs),
                    );
                }
            }
        }
    }

    let mut master = Sampler::new(seed);
    for _ in 0..bounds.samples {
        let instance_seed: u64 = master.next_u64();
        let mut s = Sampler::new(instance_seed);
        let random_arity = |s: &mut Sampler, lo: usize| s.range(lo.min(max), max.min(2));
        let n = random_arity(&mut s, 1);
        let f = OperadElement::new(base.clone(), n, s.l_element(base.dim(), n, k))?;
        report.push("l.unit", Some(instance_seed), vec![n], unit_axiom(&f));

        let t: Vec<usize> = (0..n).map(|_| random_arity(&mut s, 0)).collect();
        let gs: Vec<OperadElement> = t
            .iter()
            .map(|&a| OperadElement::new(base.clone(), a, s.l_element(base.dim(), a, k)))
            .collect::<Result<_>>()?;
        let total: usize = t.iter().sum();
        let u: Vec<usize> = (0..total).map(|_| random_arity(&mut s, 0)).collect();
        let hs: Vec<OperadElement> = u
            .iter()
            .map(|&a| OperadElement::new(base.clone(), a, s.l_element(base.dim(), a, k)))
            .collect::<Result<_>>()?;
        let mut arities = vec![n];
        arities.extend(&t);
        report.push(
            "l.closure",
            Some(instance_seed),
            arities.clone(),
            operad_compose(&f, &gs).map(|c| is_in_l(&c)),
        );
        if bounds.levels >= 2 {
            arities.extend(&u);
            report.push(
                "l.associativity",
                Some(instance_seed),
                arities,
                two_level_associativity(&f, &gs, &hs),
            );
        }
    }
    Ok(report)
}
