//! Exact rational functions in partially factored form.
//!
//! A value is `c * m * prod(P_i^e_i)` with `c` rational, `m` a Laurent
//! monomial and each `P_i` a polynomial normalized to have no monomial
//! content and leading coefficient 1. Products and quotients only touch
//! exponents, so identical factors cancel for free. Sums pull out the common
//! factors and expand what is left. There is no multivariate GCD, so the
//! representation is not a canonical form; the zero test is still exact
//! because a sum is zero iff its expanded cofactor is the zero polynomial.

use std::collections::BTreeMap;

use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::expr::{fold_dag, Expr, Node};

type Mono = Vec<(u16, i32)>;

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Poly {
    terms: BTreeMap<Mono, BigRational>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Limits {
    pub max_nodes: usize,
    pub max_terms: usize,
}

impl Default for Limits {
    fn default() -> Self {
        Limits { max_nodes: 20_000, max_terms: 200_000 }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ExactError {
    /// The input DAG exceeds the node bound.
    TooManyNodes(usize),
    /// An intermediate expansion exceeded the term bound.
    TooManyTerms(usize),
    /// A denominator normalized to zero.
    ZeroDenominator,
}

fn mono_mul(a: &Mono, b: &Mono) -> Mono {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].0.cmp(&b[j].0) {
            std::cmp::Ordering::Less => {
                out.push(a[i]);
                i += 1;
            }
            std::cmp::Ordering::Greater => {
                out.push(b[j]);
                j += 1;
            }
            std::cmp::Ordering::Equal => {
                let e = a[i].1 + b[j].1;
                if e != 0 {
                    out.push((a[i].0, e));
                }
                i += 1;
                j += 1;
            }
        }
    }
    out.extend_from_slice(&a[i..]);
    out.extend_from_slice(&b[j..]);
    out
}

impl Poly {
    pub fn zero() -> Poly {
        Poly { terms: BTreeMap::new() }
    }

    pub fn constant(c: BigRational) -> Poly {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(Vec::new(), c);
        }
        Poly { terms }
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

    fn add_assign(&mut self, other: &Poly) {
        for (m, c) in &other.terms {
            add_term(&mut self.terms, m.clone(), c.clone());
        }
    }

    fn mul(&self, other: &Poly, limits: &Limits) -> Result<Poly, ExactError> {
        let mut terms = BTreeMap::new();
        for (ma, ca) in &self.terms {
            for (mb, cb) in &other.terms {
                add_term(&mut terms, mono_mul(ma, mb), ca * cb);
            }
            if terms.len() > limits.max_terms {
                return Err(ExactError::TooManyTerms(terms.len()));
            }
        }
        Ok(Poly { terms })
    }

    fn mul_mono(&self, m: &Mono) -> Poly {
        Poly { terms: self.terms.iter().map(|(k, c)| (mono_mul(k, m), c.clone())).collect() }
    }

    /// Splits into `(c, m, P)` with `self = c * m * P`, where `P` has no
    /// monomial content and leading coefficient 1.
    fn normalize(&self) -> (BigRational, Mono, Poly) {
        let mut content: BTreeMap<u16, i32> = BTreeMap::new();
        let first = self.terms.keys().next().expect("nonzero polynomial");
        for (s, e) in first {
            content.insert(*s, *e);
        }
        for m in self.terms.keys().skip(1) {
            let present: BTreeMap<u16, i32> = m.iter().copied().collect();
            let keys: Vec<u16> = content.keys().copied().collect();
            for s in keys {
                let e = present.get(&s).copied().unwrap_or(0);
                let entry = content.get_mut(&s).unwrap();
                *entry = (*entry).min(e);
            }
            for (s, e) in &present {
                if !content.contains_key(s) && *e < 0 {
                    content.insert(*s, *e);
                }
            }
        }
        let mono: Mono = content.into_iter().filter(|(_, e)| *e != 0).collect();
        let inv_mono: Mono = mono.iter().map(|(s, e)| (*s, -e)).collect();
        let shifted = self.mul_mono(&inv_mono);
        let lead = shifted.terms.values().next().unwrap().clone();
        let scale = lead.recip();
        let terms = shifted.terms.into_iter().map(|(m, c)| (m, c * &scale)).collect();
        (lead, mono, Poly { terms })
    }

    fn is_one(&self) -> bool {
        self.terms.len() == 1 && self.terms.iter().next().is_some_and(|(m, c)| m.is_empty() && c.is_one())
    }
}

fn add_term(terms: &mut BTreeMap<Mono, BigRational>, m: Mono, c: BigRational) {
    use std::collections::btree_map::Entry;
    match terms.entry(m) {
        Entry::Vacant(v) => {
            if !c.is_zero() {
                v.insert(c);
            }
        }
        Entry::Occupied(mut o) => {
            *o.get_mut() += c;
            if o.get().is_zero() {
                o.remove();
            }
        }
    }
}

/// Partially factored rational function.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RatFun {
    coeff: BigRational,
    mono: BTreeMap<u16, i32>,
    factors: BTreeMap<Poly, i32>,
}

impl RatFun {
    pub fn zero() -> RatFun {
        RatFun::constant(BigRational::zero())
    }

    pub fn constant(c: BigRational) -> RatFun {
        RatFun { coeff: c, mono: BTreeMap::new(), factors: BTreeMap::new() }
    }

    pub fn symbol(index: u16) -> RatFun {
        RatFun {
            coeff: BigRational::one(),
            mono: [(index, 1)].into_iter().collect(),
            factors: BTreeMap::new(),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.coeff.is_zero()
    }

    /// Number of distinct polynomial factors (numerator and denominator).
    pub fn factor_count(&self) -> usize {
        self.factors.len()
    }

    pub fn mul(&self, other: &RatFun) -> RatFun {
        if self.is_zero() || other.is_zero() {
            return RatFun::zero();
        }
        let mut out = self.clone();
        out.coeff *= &other.coeff;
        for (s, e) in &other.mono {
            bump(&mut out.mono, *s, *e);
        }
        for (p, e) in &other.factors {
            bump(&mut out.factors, p.clone(), *e);
        }
        out
    }

    pub fn pow(&self, k: i32) -> Result<RatFun, ExactError> {
        if k == 0 {
            return Ok(RatFun::constant(BigRational::one()));
        }
        if self.is_zero() {
            return if k < 0 { Err(ExactError::ZeroDenominator) } else { Ok(RatFun::zero()) };
        }
        let c = num_traits::pow(self.coeff.clone(), k.unsigned_abs() as usize);
        Ok(RatFun {
            coeff: if k < 0 { c.recip() } else { c },
            mono: self.mono.iter().map(|(s, e)| (*s, e * k)).collect(),
            factors: self.factors.iter().map(|(p, e)| (p.clone(), e * k)).collect(),
        })
    }

    pub fn div(&self, other: &RatFun) -> Result<RatFun, ExactError> {
        Ok(self.mul(&other.pow(-1)?))
    }

    pub fn add(&self, other: &RatFun, limits: &Limits) -> Result<RatFun, ExactError> {
        if self.is_zero() {
            return Ok(other.clone());
        }
        if other.is_zero() {
            return Ok(self.clone());
        }
        // Common part G: per-factor minimum exponent.
        let mut g_mono: BTreeMap<u16, i32> = BTreeMap::new();
        for s in self.mono.keys().chain(other.mono.keys()) {
            let e = self.mono.get(s).copied().unwrap_or(0).min(other.mono.get(s).copied().unwrap_or(0));
            if e != 0 {
                g_mono.insert(*s, e);
            }
        }
        let mut g_factors: BTreeMap<Poly, i32> = BTreeMap::new();
        for p in self.factors.keys().chain(other.factors.keys()) {
            let e = self.factors.get(p).copied().unwrap_or(0).min(other.factors.get(p).copied().unwrap_or(0));
            if e != 0 {
                g_factors.insert(p.clone(), e);
            }
        }
        let a = self.expand_over(&g_mono, &g_factors, limits)?;
        let b = other.expand_over(&g_mono, &g_factors, limits)?;
        let mut sum = a;
        sum.add_assign(&b);
        if sum.len() > limits.max_terms {
            return Err(ExactError::TooManyTerms(sum.len()));
        }
        if sum.is_zero() {
            return Ok(RatFun::zero());
        }
        let (c, m, p) = sum.normalize();
        let mut out = RatFun { coeff: c, mono: g_mono, factors: g_factors };
        for (s, e) in m {
            bump(&mut out.mono, s, e);
        }
        if !p.is_one() {
            bump(&mut out.factors, p, 1);
        }
        Ok(out)
    }

    /// Expands `self / G` into a polynomial; every exponent of the quotient is
    /// nonnegative by choice of `G`.
    fn expand_over(
        &self,
        g_mono: &BTreeMap<u16, i32>,
        g_factors: &BTreeMap<Poly, i32>,
        limits: &Limits,
    ) -> Result<Poly, ExactError> {
        let mut mono: Mono = Vec::new();
        for (s, e) in &self.mono {
            let r = e - g_mono.get(s).copied().unwrap_or(0);
            if r != 0 {
                mono.push((*s, r));
            }
        }
        for (s, e) in g_mono {
            if !self.mono.contains_key(s) {
                mono.push((*s, -e));
            }
        }
        mono.sort_unstable();
        let mut acc = Poly { terms: [(mono, self.coeff.clone())].into_iter().collect() };
        for (p, e) in &self.factors {
            let r = e - g_factors.get(p).copied().unwrap_or(0);
            debug_assert!(r >= 0);
            for _ in 0..r {
                acc = acc.mul(p, limits)?;
            }
        }
        for (p, e) in g_factors {
            if !self.factors.contains_key(p) {
                debug_assert!(*e <= 0);
                for _ in 0..(-e) {
                    acc = acc.mul(p, limits)?;
                }
            }
        }
        Ok(acc)
    }
}

fn bump<K: Ord>(map: &mut BTreeMap<K, i32>, k: K, e: i32) {
    use std::collections::btree_map::Entry;
    match map.entry(k) {
        Entry::Vacant(v) => {
            if e != 0 {
                v.insert(e);
            }
        }
        Entry::Occupied(mut o) => {
            *o.get_mut() += e;
            if *o.get() == 0 {
                o.remove();
            }
        }
    }
}

/// Converts an expression to a partially factored rational function.
pub fn from_expr(e: &Expr, limits: &Limits) -> Result<RatFun, ExactError> {
    let size = e.dag_size();
    if size > limits.max_nodes {
        return Err(ExactError::TooManyNodes(size));
    }
    fold_dag(e, |node: &Expr, kids: &[RatFun]| -> Result<RatFun, ExactError> {
        Ok(match node.node() {
            Node::Const(c) => RatFun::constant(c.clone()),
            Node::Sym(s) => RatFun::symbol(s.index() as u16),
            Node::Add(_) => {
                let mut acc = kids[0].clone();
                for k in &kids[1..] {
                    acc = acc.add(k, limits)?;
                }
                acc
            }
            Node::Mul(_) => kids.iter().skip(1).fold(kids[0].clone(), |acc, k| acc.mul(k)),
            Node::Div(_, _) => kids[0].div(&kids[1])?,
            Node::Pow(_, k) => kids[0].pow(*k)?,
        })
    })
}

/// Rewrites `e` as a quotient of products of normalized factors. Used for
/// display; `None` when the limits are exceeded or a denominator vanishes.
pub fn simplify(e: &Expr, limits: &Limits) -> Option<Expr> {
    from_expr(e, limits).ok().map(|r| r.to_expr())
}

impl Poly {
    fn to_expr(&self) -> Expr {
        Expr::add_all(self.terms.iter().map(|(m, c)| {
            let mut f = vec![Expr::constant(c.clone())];
            f.extend(m.iter().map(|(s, k)| sym_power(*s, *k)));
            Expr::mul_all(f)
        }))
    }
}

fn sym_power(s: u16, k: i32) -> Expr {
    Expr::sym(crate::symbol::Symbol::from_index(s as usize)).pow(k).expect("symbol power")
}

impl RatFun {
    pub fn to_expr(&self) -> Expr {
        if self.is_zero() {
            return Expr::zero();
        }
        let mut num = vec![Expr::constant(self.coeff.clone())];
        let mut den = Vec::new();
        for (s, k) in &self.mono {
            if *k > 0 { num.push(sym_power(*s, *k)) } else { den.push(sym_power(*s, -k)) }
        }
        for (p, k) in &self.factors {
            let b = p.to_expr();
            if *k > 0 {
                num.push(b.pow(*k).expect("factor power"));
            } else {
                den.push(b.pow(-k).expect("factor power"));
            }
        }
        let num = Expr::mul_all(num);
        if den.is_empty() {
            num
        } else {
            num.checked_div(&Expr::mul_all(den)).expect("nonzero denominator")
        }
    }
}

/// Exact zero test; fails only when the limits are exceeded.
pub fn is_identically_zero(e: &Expr, limits: &Limits) -> Result<bool, ExactError> {
    from_expr(e, limits).map(|r| r.is_zero())
}
