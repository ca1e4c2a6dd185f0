//! Exact polynomial algebra in a fiber block `p` and a base block `x`,
//! truncated at a fixed order in `p` and exact in `x`.
//!
//! Germs along a zero section only need to be truncated transversally to it,
//! so every polynomial here carries a fiber order `K`: terms of total
//! p-degree above `K` are discarded after every operation. Truncation is the
//! quotient map by the ideal `(p)^(K+1)`, hence a ring homomorphism, and all
//! operations commute with it.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rustc_hash::FxHashMap;

use crate::error::{shape, Error, Result};

/// Exact rational scalar.
pub type Rational = num_rational::BigRational;

/// Parses an integer into a [`Rational`].
pub fn rat(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

/// `n / d` as a reduced [`Rational`]. Panics on `d == 0`.
pub fn frac(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

/// Which variable block a derivative or index refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Block {
    Fiber,
    Base,
}

/// Exponent vector over the concatenated variables `(p1..pm, x1..xn)`.
///
/// Ordered by ascending total degree, then lexicographically with a larger
/// exponent on an earlier variable coming first (`p1^2 < p1*x1 < x1^2`).
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Monomial(Vec<u32>);

impl Monomial {
    pub fn new(exps: Vec<u32>) -> Self {
        Monomial(exps)
    }

    pub fn one(nvars: usize) -> Self {
        Monomial(vec![0; nvars])
    }

    pub fn exponents(&self) -> &[u32] {
        &self.0
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().sum()
    }

    fn product(&self, other: &Monomial) -> Monomial {
        Monomial(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }
}

impl Ord for Monomial {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.degree()
            .cmp(&other.degree())
            .then_with(|| other.0.cmp(&self.0))
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

/// Sparse polynomial over the rationals in `fiber_arity` fiber variables and
/// `base_arity` base variables, truncated above p-degree `order`.
///
/// Invariants: every stored term has p-degree at most `order`; no stored
/// coefficient is zero. `BigRational` keeps coefficients reduced.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct FiberGradedPoly {
    fiber: usize,
    base: usize,
    order: u32,
    terms: BTreeMap<Monomial, Rational>,
}

/// One serialized term: p-exponents, x-exponents, numerator, denominator.
pub type TermRecord = (Vec<u32>, Vec<u32>, BigInt, BigInt);

impl FiberGradedPoly {
    pub fn zero(fiber: usize, base: usize, order: u32) -> Self {
        FiberGradedPoly {
            fiber,
            base,
            order,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(fiber: usize, base: usize, order: u32, c: Rational) -> Self {
        let mut out = Self::zero(fiber, base, order);
        out.add_term(Monomial::one(fiber + base), c);
        out
    }

    pub fn one(fiber: usize, base: usize, order: u32) -> Self {
        Self::constant(fiber, base, order, Rational::one())
    }

    /// The fiber variable `p_{index+1}`.
    pub fn fiber_var(fiber: usize, base: usize, order: u32, index: usize) -> Result<Self> {
        if index >= fiber {
            return Err(shape(format!("fiber index {index} out of range for arity {fiber}")));
        }
        let mut e = vec![0; fiber + base];
        e[index] = 1;
        Ok(Self::from_terms(fiber, base, order, [(e, Rational::one())]))
    }

    /// The base variable `x_{index+1}`.
    pub fn base_var(fiber: usize, base: usize, order: u32, index: usize) -> Result<Self> {
        if index >= base {
            return Err(shape(format!("base index {index} out of range for arity {base}")));
        }
        let mut e = vec![0; fiber + base];
        e[fiber + index] = 1;
        Ok(Self::from_terms(fiber, base, order, [(e, Rational::one())]))
    }

    /// Builds a polynomial from `(exponents, coefficient)` pairs, merging
    /// duplicates, dropping zeros and truncating above `order`.
    ///
    /// Panics if an exponent vector does not have `fiber + base` entries.
    pub fn from_terms<I>(fiber: usize, base: usize, order: u32, terms: I) -> Self
    where
        I: IntoIterator<Item = (Vec<u32>, Rational)>,
    {
        let mut out = Self::zero(fiber, base, order);
        for (e, c) in terms {
            assert_eq!(e.len(), fiber + base, "exponent vector length");
            out.add_term(Monomial(e), c);
        }
        out
    }

    pub fn fiber_arity(&self) -> usize {
        self.fiber
    }

    pub fn base_arity(&self) -> usize {
        self.base
    }

    pub fn order(&self) -> u32 {
        self.order
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Terms in canonical monomial order.
    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &Rational)> {
        self.terms.iter()
    }

    pub fn coeff(&self, exps: &[u32]) -> Rational {
        self.terms
            .get(&Monomial(exps.to_vec()))
            .cloned()
            .unwrap_or_else(Rational::zero)
    }

    pub fn p_degree_of(&self, m: &Monomial) -> u32 {
        m.0[..self.fiber].iter().sum()
    }

    pub fn x_degree_of(&self, m: &Monomial) -> u32 {
        m.0[self.fiber..].iter().sum()
    }

    /// Smallest p-degree among stored terms, `None` for the zero polynomial.
    pub fn min_p_degree(&self) -> Option<u32> {
        self.terms.keys().map(|m| self.p_degree_of(m)).min()
    }

    pub fn max_p_degree(&self) -> Option<u32> {
        self.terms.keys().map(|m| self.p_degree_of(m)).max()
    }

    pub fn same_shape(&self, other: &Self) -> bool {
        self.fiber == other.fiber && self.base == other.base && self.order == other.order
    }

    fn check_shape(&self, other: &Self, what: &str) -> Result<()> {
        if self.same_shape(other) {
            Ok(())
        } else {
            Err(shape(format!(
                "{what}: (fiber {}, base {}, order {}) vs (fiber {}, base {}, order {})",
                self.fiber, self.base, self.order, other.fiber, other.base, other.order
            )))
        }
    }

    fn add_term(&mut self, m: Monomial, c: Rational) {
        if c.is_zero() || self.p_degree_of(&m) > self.order {
            return;
        }
        match self.terms.entry(m) {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                let sum = add_rationals(o.get(), &c);
                *o.get_mut() = sum;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    pub fn try_add(&self, other: &Self) -> Result<Self> {
        self.check_shape(other, "add")?;
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), c.clone());
        }
        Ok(out)
    }

    pub fn try_sub(&self, other: &Self) -> Result<Self> {
        self.check_shape(other, "sub")?;
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), -c.clone());
        }
        Ok(out)
    }

    /// Truncated product.
    ///
    /// Coefficients are multiplied as integers over the common denominators
    /// of the two factors and reduced once per output monomial.
    pub fn try_mul(&self, other: &Self) -> Result<Self> {
        self.check_shape(other, "mul")?;
        let (da, na) = self.integer_form();
        let (db, nb) = other.integer_form();
        let mut acc: FxHashMap<Monomial, Accumulator> = FxHashMap::default();
        for a in &na {
            for b in &nb {
                if a.p_degree + b.p_degree > self.order {
                    continue;
                }
                acc.entry(a.monomial.product(b.monomial))
                    .or_insert(Accumulator::Small(0))
                    .add_product(a, b);
            }
        }
        let den = da * db;
        let terms = acc
            .into_iter()
            .map(|(m, c)| (m, c.into_big()))
            .filter(|(_, c)| !c.is_zero())
            .map(|(m, c)| (m, reduced(c, &den)))
            .collect();
        Ok(FiberGradedPoly {
            fiber: self.fiber,
            base: self.base,
            order: self.order,
            terms,
        })
    }

    /// Common denominator `D` of the coefficients and the numerators `D * c`.
    fn integer_form(&self) -> (BigInt, Vec<ScaledTerm<'_>>) {
        let den = self.terms.values().fold(BigInt::one(), |d, c| {
            let g = gcd(&d, c.denom());
            d * (c.denom() / g)
        });
        let nums = self
            .terms
            .iter()
            .map(|(m, c)| {
                let big = c.numer() * (&den / c.denom());
                ScaledTerm {
                    monomial: m,
                    p_degree: self.p_degree_of(m),
                    small: big.to_i64(),
                    big,
                }
            })
            .collect();
        (den, nums)
    }

    pub fn scale(&self, c: &Rational) -> Self {
        if c.is_zero() {
            return Self::zero(self.fiber, self.base, self.order);
        }
        let mut out = self.clone();
        for v in out.terms.values_mut() {
            *v *= c;
        }
        out
    }

    pub fn pow(&self, e: u32) -> Self {
        let mut acc = Self::one(self.fiber, self.base, self.order);
        for _ in 0..e {
            acc = &acc * self;
        }
        acc
    }

    /// Formal partial derivative; the stored order is kept.
    pub fn partial(&self, block: Block, index: usize) -> Result<Self> {
        let var = match block {
            Block::Fiber if index < self.fiber => index,
            Block::Base if index < self.base => self.fiber + index,
            _ => {
                return Err(shape(format!(
                    "derivative index {index} out of range for {block:?} block"
                )))
            }
        };
        let mut out = Self::zero(self.fiber, self.base, self.order);
        for (m, c) in &self.terms {
            let e = m.0[var];
            if e == 0 {
                continue;
            }
            let mut d = m.0.clone();
            d[var] -= 1;
            out.add_term(Monomial(d), c * rat(e as i64));
        }
        Ok(out)
    }

    /// Fiber gradient `(dS/dp_1, ..., dS/dp_m)`.
    pub fn fiber_gradient(&self) -> Vec<Self> {
        (0..self.fiber)
            .map(|i| self.partial(Block::Fiber, i).expect("index in range"))
            .collect()
    }

    /// Base gradient `(dS/dx_1, ..., dS/dx_n)`.
    pub fn base_gradient(&self) -> Vec<Self> {
        (0..self.base)
            .map(|i| self.partial(Block::Base, i).expect("index in range"))
            .collect()
    }

    /// Truncation of the exact substitution `p := fiber_values, x := base_values`.
    ///
    /// All values must share one target shape. Every fiber value must have
    /// p-degree at least one, which makes truncation commute with substitution.
    /// With no values at all the polynomial is a constant and is returned as is;
    /// use [`substitute_in`](Self::substitute_in) to fix the target shape.
    pub fn substitute(&self, fiber_values: &[Self], base_values: &[Self]) -> Result<Self> {
        match fiber_values.first().or(base_values.first()) {
            Some(t) => {
                let (f, b, k) = (t.fiber, t.base, t.order);
                self.substitute_in(f, b, k, fiber_values, base_values)
            }
            None if self.fiber == 0 && self.base == 0 => Ok(self.clone()),
            None => Err(shape("substitute: wrong number of values")),
        }
    }

    /// [`substitute`](Self::substitute) into the explicit target space
    /// `(fiber, base, order)`.
    pub fn substitute_in(
        &self,
        fiber: usize,
        base: usize,
        order: u32,
        fiber_values: &[Self],
        base_values: &[Self],
    ) -> Result<Self> {
        if fiber_values.len() != self.fiber || base_values.len() != self.base {
            return Err(shape(format!(
                "substitute: expected {} fiber and {} base values, got {} and {}",
                self.fiber,
                self.base,
                fiber_values.len(),
                base_values.len()
            )));
        }
        for v in fiber_values.iter().chain(base_values) {
            if (v.fiber, v.base, v.order) != (fiber, base, order) {
                return Err(shape(format!(
                    "substitute: value in (fiber {}, base {}, order {}), target is (fiber {fiber}, base {base}, order {order})",
                    v.fiber, v.base, v.order
                )));
            }
        }
        for (i, v) in fiber_values.iter().enumerate() {
            if v.min_p_degree() == Some(0) {
                return Err(Error::Filtration(format!(
                    "value for p{} has a p-degree-0 part",
                    i + 1
                )));
            }
        }
        let mut sub = Substitution {
            fiber,
            base,
            order,
            powers: fiber_values
                .iter()
                .chain(base_values)
                .map(|v| vec![Self::one(fiber, base, order), v.clone()])
                .collect(),
        };
        Ok(sub.apply_unchecked(self))
    }

    /// Drops all terms above `order` and records the new order. Raising the
    /// order only relabels; the result is then faithful to the old order only.
    pub fn with_order(&self, order: u32) -> Self {
        let mut out = Self::zero(self.fiber, self.base, order);
        for (m, c) in &self.terms {
            out.add_term(m.clone(), c.clone());
        }
        out
    }

    /// Terms of exact p-degree `d`.
    pub fn p_homogeneous_part(&self, d: u32) -> Self {
        let mut out = Self::zero(self.fiber, self.base, self.order);
        for (m, c) in &self.terms {
            if self.p_degree_of(m) == d {
                out.terms.insert(m.clone(), c.clone());
            }
        }
        out
    }

    /// `self(0, x)`: the restriction to the zero section.
    pub fn core_part(&self) -> Self {
        self.p_homogeneous_part(0)
    }

    /// Reindexes into a larger variable space: fiber variable `i` becomes
    /// `fiber_offset + i` of `fiber`, base variable `j` becomes
    /// `base_offset + j` of `base`.
    pub fn embed(
        &self,
        fiber: usize,
        fiber_offset: usize,
        base: usize,
        base_offset: usize,
    ) -> Result<Self> {
        if fiber_offset + self.fiber > fiber || base_offset + self.base > base {
            return Err(shape("embed: target space too small"));
        }
        let mut out = Self::zero(fiber, base, self.order);
        for (m, c) in &self.terms {
            let mut e = vec![0; fiber + base];
            e[fiber_offset..fiber_offset + self.fiber].copy_from_slice(&m.0[..self.fiber]);
            e[fiber + base_offset..fiber + base_offset + self.base]
                .copy_from_slice(&m.0[self.fiber..]);
            out.terms.insert(Monomial(e), c.clone());
        }
        Ok(out)
    }

    /// Renames base variables: base variable `j` becomes `perm[j]`.
    pub fn permute_base(&self, perm: &[usize]) -> Result<Self> {
        if perm.len() != self.base {
            return Err(shape("permute_base: permutation length"));
        }
        let mut out = Self::zero(self.fiber, self.base, self.order);
        for (m, c) in &self.terms {
            let mut e = m.0.clone();
            for (j, &t) in perm.iter().enumerate() {
                e[self.fiber + t] = m.0[self.fiber + j];
            }
            out.terms.insert(Monomial(e), c.clone());
        }
        Ok(out)
    }

    /// Exact evaluation at a rational point.
    pub fn eval(&self, p: &[Rational], x: &[Rational]) -> Result<Rational> {
        if p.len() != self.fiber || x.len() != self.base {
            return Err(shape("eval: point dimension"));
        }
        let point: Vec<&Rational> = p.iter().chain(x).collect();
        let mut acc = Rational::zero();
        for (m, c) in &self.terms {
            let mut t = c.clone();
            for (v, &e) in point.iter().zip(&m.0) {
                if e > 0 {
                    t *= num_traits::pow::pow((*v).clone(), e as usize);
                }
            }
            acc += t;
        }
        Ok(acc)
    }

    /// Evaluates the base variables only, keeping the fiber variables.
    pub fn eval_base(&self, x: &[Rational]) -> Result<Self> {
        if x.len() != self.base {
            return Err(shape("eval_base: point dimension"));
        }
        let mut out = Self::zero(self.fiber, 0, self.order);
        for (m, c) in &self.terms {
            let mut t = c.clone();
            for (v, &e) in x.iter().zip(&m.0[self.fiber..]) {
                if e > 0 {
                    t *= num_traits::pow::pow(v.clone(), e as usize);
                }
            }
            out.add_term(Monomial(m.0[..self.fiber].to_vec()), t);
        }
        Ok(out)
    }

    /// Serialized form in canonical monomial order.
    pub fn to_records(&self) -> Vec<TermRecord> {
        self.terms
            .iter()
            .map(|(m, c)| {
                (
                    m.0[..self.fiber].to_vec(),
                    m.0[self.fiber..].to_vec(),
                    c.numer().clone(),
                    c.denom().clone(),
                )
            })
            .collect()
    }

    pub fn from_records(fiber: usize, base: usize, order: u32, records: &[TermRecord]) -> Result<Self> {
        let mut out = Self::zero(fiber, base, order);
        for (pe, xe, n, d) in records {
            if pe.len() != fiber || xe.len() != base {
                return Err(shape("record exponent length"));
            }
            if d.is_zero() {
                return Err(shape("record with zero denominator"));
            }
            let mut e = pe.clone();
            e.extend_from_slice(xe);
            let m = Monomial(e);
            if out.p_degree_of(&m) > order {
                return Err(shape(format!("record of p-degree above order {order}")));
            }
            out.add_term(m, Rational::new(n.clone(), d.clone()));
        }
        Ok(out)
    }

    /// Records rendered as `[([p..],[x..],num,den), ...]`.
    pub fn records_text(&self) -> String {
        let items: Vec<String> = self
            .to_records()
            .into_iter()
            .map(|(pe, xe, n, d)| format!("({:?},{:?},{},{})", pe, xe, n, d))
            .collect();
        format!("[{}]", items.join(", "))
    }
}

fn write_monomial(f: &mut fmt::Formatter<'_>, fiber: usize, m: &Monomial) -> fmt::Result {
    let mut first = true;
    for (i, &e) in m.0.iter().enumerate() {
        if e == 0 {
            continue;
        }
        if !first {
            f.write_str("*")?;
        }
        first = false;
        if i < fiber {
            write!(f, "p{}", i + 1)?;
        } else {
            write!(f, "x{}", i - fiber + 1)?;
        }
        if e > 1 {
            write!(f, "^{e}")?;
        }
    }
    Ok(())
}

/// Text grammar: `p1*x1 + 1/2*p1^2*x1 - x2`, terms in canonical order.
impl fmt::Display for FiberGradedPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        for (k, (m, c)) in self.terms.iter().enumerate() {
            let neg = c.is_negative();
            match (k, neg) {
                (0, true) => f.write_str("-")?,
                (0, false) => {}
                (_, true) => f.write_str(" - ")?,
                (_, false) => f.write_str(" + ")?,
            }
            let a = c.abs();
            let is_const = m.degree() == 0;
            if is_const {
                write!(f, "{a}")?;
            } else {
                if !a.is_one() {
                    write!(f, "{a}*")?;
                }
                write_monomial(f, self.fiber, m)?;
            }
        }
        Ok(())
    }
}

impl Add for &FiberGradedPoly {
    type Output = FiberGradedPoly;
    fn add(self, rhs: Self) -> FiberGradedPoly {
        self.try_add(rhs).expect("polynomial shape mismatch in +")
    }
}

impl Sub for &FiberGradedPoly {
    type Output = FiberGradedPoly;
    fn sub(self, rhs: Self) -> FiberGradedPoly {
        self.try_sub(rhs).expect("polynomial shape mismatch in -")
    }
}

impl Mul for &FiberGradedPoly {
    type Output = FiberGradedPoly;
    fn mul(self, rhs: Self) -> FiberGradedPoly {
        self.try_mul(rhs).expect("polynomial shape mismatch in *")
    }
}

impl Neg for &FiberGradedPoly {
    type Output = FiberGradedPoly;
    fn neg(self) -> FiberGradedPoly {
        self.scale(&-Rational::one())
    }
}

struct ScaledTerm<'a> {
    monomial: &'a Monomial,
    p_degree: u32,
    small: Option<i64>,
    big: BigInt,
}

/// Integer sum that stays in machine words until it overflows.
enum Accumulator {
    Small(i128),
    Big(BigInt),
}

impl Accumulator {
    fn add_product(&mut self, a: &ScaledTerm<'_>, b: &ScaledTerm<'_>) {
        if let (Some(x), Some(y)) = (a.small, b.small) {
            let prod = i128::from(x) * i128::from(y);
            match self {
                Accumulator::Small(s) => match s.checked_add(prod) {
                    Some(v) => *s = v,
                    None => *self = Accumulator::Big(BigInt::from(*s) + prod),
                },
                Accumulator::Big(s) => *s += prod,
            }
            return;
        }
        let prod = &a.big * &b.big;
        match self {
            Accumulator::Small(s) => *self = Accumulator::Big(BigInt::from(*s) + prod),
            Accumulator::Big(s) => *s += prod,
        }
    }

    fn into_big(self) -> BigInt {
        match self {
            Accumulator::Small(s) => BigInt::from(s),
            Accumulator::Big(b) => b,
        }
    }
}

/// A substitution `p := fiber_values, x := base_values` that caches the
/// powers of its values across the polynomials it is applied to.
#[derive(Debug, Clone)]
pub struct Substitution {
    fiber: usize,
    base: usize,
    order: u32,
    powers: Vec<Vec<FiberGradedPoly>>,
}

impl Substitution {
    /// Same contract as [`FiberGradedPoly::substitute_in`].
    pub fn new(
        fiber: usize,
        base: usize,
        order: u32,
        fiber_values: &[FiberGradedPoly],
        base_values: &[FiberGradedPoly],
    ) -> Result<Self> {
        let probe = FiberGradedPoly::zero(fiber_values.len(), base_values.len(), 0);
        probe.substitute_in(fiber, base, order, fiber_values, base_values)?;
        Ok(Substitution {
            fiber,
            base,
            order,
            powers: fiber_values
                .iter()
                .chain(base_values)
                .map(|v| vec![FiberGradedPoly::one(fiber, base, order), v.clone()])
                .collect(),
        })
    }

    pub fn apply(&mut self, poly: &FiberGradedPoly) -> Result<FiberGradedPoly> {
        if poly.fiber + poly.base != self.powers.len() {
            return Err(shape(format!(
                "substitution of {} values applied to a polynomial in {} variables",
                self.powers.len(),
                poly.fiber + poly.base
            )));
        }
        Ok(self.apply_unchecked(poly))
    }

    pub fn apply_all(&mut self, polys: &[FiberGradedPoly]) -> Result<Vec<FiberGradedPoly>> {
        polys.iter().map(|p| self.apply(p)).collect()
    }

    fn apply_unchecked(&mut self, poly: &FiberGradedPoly) -> FiberGradedPoly {
        let (fiber, base, order) = (self.fiber, self.base, self.order);
        let mut out = FiberGradedPoly::zero(fiber, base, order);
        for (m, c) in &poly.terms {
            if poly.p_degree_of(m) > order {
                // fiber values have p-degree >= 1, so the image vanishes
                continue;
            }
            let mut term = FiberGradedPoly::constant(fiber, base, order, c.clone());
            for (var, &e) in m.0.iter().enumerate() {
                if e == 0 {
                    continue;
                }
                let cache = &mut self.powers[var];
                while cache.len() <= e as usize {
                    let next = cache.last().unwrap() * &cache[1];
                    cache.push(next);
                }
                term = &term * &cache[e as usize];
                if term.is_zero() {
                    break;
                }
            }
            for (tm, tc) in term.terms {
                out.add_term(tm, tc);
            }
        }
        out
    }
}

fn gcd(a: &BigInt, b: &BigInt) -> BigInt {
    match (a.magnitude().to_u128(), b.magnitude().to_u128()) {
        (Some(mut x), Some(mut y)) => {
            while y != 0 {
                (x, y) = (y, x % y);
            }
            BigInt::from(x)
        }
        _ => a.gcd(b),
    }
}

fn add_rationals(a: &Rational, b: &Rational) -> Rational {
    if a.denom() == b.denom() {
        reduced(a.numer() + b.numer(), a.denom())
    } else {
        reduced(a.numer() * b.denom() + b.numer() * a.denom(), &(a.denom() * b.denom()))
    }
}

/// `num / den` in lowest terms for a positive `den`.
fn reduced(num: BigInt, den: &BigInt) -> Rational {
    if den.is_one() {
        return Rational::from_integer(num);
    }
    let g = gcd(&num, den);
    if g.is_one() {
        Rational::new_raw(num, den.clone())
    } else {
        Rational::new_raw(num / &g, den / &g)
    }
}

/// Solves `z = update(z, d)` modulo p-degree `order + 1`.
///
/// The update must be a filtration contraction: the p-degree-`d` part of
/// its value may only depend on the parts of `z` below degree `d`. Step `d`
/// then runs at truncation order `d`, receiving `z` truncated to `d` and
/// returning values of order `d`, and after step `order` the fixed point is
/// exact. An update that changes a degree fixed by an earlier step is
/// reported as [`Error::Convergence`].
pub fn solve_triangular_fixed_point<F>(
    initial: Vec<FiberGradedPoly>,
    order: u32,
    mut update: F,
) -> Result<Vec<FiberGradedPoly>>
where
    F: FnMut(&[FiberGradedPoly], u32) -> Result<Vec<FiberGradedPoly>>,
{
    let Some(first) = initial.first() else {
        return Ok(initial);
    };
    for v in &initial {
        first.check_shape(v, "fixed point seed")?;
    }
    let mut z = initial;
    for d in 0..=order {
        let trunc: Vec<_> = z.iter().map(|v| v.with_order(d)).collect();
        let next = update(&trunc, d)?;
        if next.len() != z.len() {
            return Err(shape("fixed point update changed the sequence length"));
        }
        for (a, b) in next.iter().zip(&trunc) {
            if (a.fiber, a.base, a.order) != (b.fiber, b.base, d) {
                return Err(shape("fixed point update changed the value shape"));
            }
            if d > 0 {
                let below = d - 1;
                if a.with_order(below) != b.with_order(below) {
                    return Err(Error::Convergence(format!(
                        "step {d} changed a term of p-degree below {d}"
                    )));
                }
            }
        }
        z = next;
    }
    Ok(z.into_iter().map(|v| v.with_order(order)).collect())
}
