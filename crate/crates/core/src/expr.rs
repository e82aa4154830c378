//! Hash-consed rational expressions over ℚ.
//!
//! Every [`Expr`] is a handle to an immutable node in a global table, so two
//! handles are equal exactly when the expressions are structurally equal.
//! Constructors do only local clean-up (flattening, constant folding, unit
//! removal); there is no general simplification.

use std::collections::hash_map::DefaultHasher;
use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::hash::{Hash, Hasher};
use std::ops;
use std::sync::{Arc, LazyLock, Mutex, Weak};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::ExprError;
use crate::symbol::Symbol;

#[derive(Debug)]
pub enum Node {
    Const(BigRational),
    Sym(Symbol),
    Add(Vec<Expr>),
    Mul(Vec<Expr>),
    Div(Expr, Expr),
    Pow(Expr, i32),
}

pub struct Inner {
    node: Node,
    hash: u64,
}

/// Shared handle to an interned expression node.
#[derive(Clone)]
pub struct Expr(Arc<Inner>);

impl PartialEq for Expr {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.0, &other.0)
    }
}
impl Eq for Expr {}

impl Hash for Expr {
    fn hash<H: Hasher>(&self, state: &mut H) {
        state.write_u64(self.0.hash);
    }
}

struct Interner {
    buckets: HashMap<u64, Vec<Weak<Inner>>>,
    entries: usize,
    prune_at: usize,
}

static INTERNER: LazyLock<Mutex<Interner>> = LazyLock::new(|| {
    Mutex::new(Interner { buckets: HashMap::new(), entries: 0, prune_at: 1 << 16 })
});

fn shallow_hash(node: &Node) -> u64 {
    let mut h = DefaultHasher::new();
    match node {
        Node::Const(r) => {
            0u8.hash(&mut h);
            r.hash(&mut h);
        }
        Node::Sym(s) => {
            1u8.hash(&mut h);
            s.hash(&mut h);
        }
        Node::Add(ts) => {
            2u8.hash(&mut h);
            for t in ts {
                t.0.hash.hash(&mut h);
            }
        }
        Node::Mul(fs) => {
            3u8.hash(&mut h);
            for t in fs {
                t.0.hash.hash(&mut h);
            }
        }
        Node::Div(a, b) => {
            4u8.hash(&mut h);
            a.0.hash.hash(&mut h);
            b.0.hash.hash(&mut h);
        }
        Node::Pow(b, e) => {
            5u8.hash(&mut h);
            b.0.hash.hash(&mut h);
            e.hash(&mut h);
        }
    }
    h.finish()
}

fn shallow_eq(a: &Node, b: &Node) -> bool {
    match (a, b) {
        (Node::Const(x), Node::Const(y)) => x == y,
        (Node::Sym(x), Node::Sym(y)) => x == y,
        (Node::Add(x), Node::Add(y)) | (Node::Mul(x), Node::Mul(y)) => x == y,
        (Node::Div(a1, b1), Node::Div(a2, b2)) => a1 == a2 && b1 == b2,
        (Node::Pow(b1, e1), Node::Pow(b2, e2)) => b1 == b2 && e1 == e2,
        _ => false,
    }
}

fn intern(node: Node) -> Expr {
    let hash = shallow_hash(&node);
    let mut table = INTERNER.lock().expect("expression table poisoned");
    if let Some(bucket) = table.buckets.get(&hash) {
        for weak in bucket {
            if let Some(existing) = weak.upgrade() {
                if shallow_eq(&existing.node, &node) {
                    return Expr(existing);
                }
            }
        }
    }
    let inner = Arc::new(Inner { node, hash });
    table.buckets.entry(hash).or_default().push(Arc::downgrade(&inner));
    table.entries += 1;
    if table.entries >= table.prune_at {
        let mut live = 0;
        table.buckets.retain(|_, bucket| {
            bucket.retain(|w| w.strong_count() > 0);
            live += bucket.len();
            !bucket.is_empty()
        });
        table.entries = live;
        table.prune_at = (2 * live).max(1 << 16);
    }
    Expr(inner)
}

impl Expr {
    pub fn node(&self) -> &Node {
        &self.0.node
    }

    /// Stable structural hash, independent of allocation addresses.
    pub fn structural_hash(&self) -> u64 {
        self.0.hash
    }

    pub(crate) fn addr(&self) -> usize {
        Arc::as_ptr(&self.0) as usize
    }

    pub fn constant(r: BigRational) -> Expr {
        intern(Node::Const(r))
    }

    pub fn int(n: i64) -> Expr {
        Expr::constant(BigRational::from_integer(BigInt::from(n)))
    }

    pub fn rational(n: i64, d: i64) -> Result<Expr, ExprError> {
        if d == 0 {
            return Err(ExprError::ZeroDenominator);
        }
        Ok(Expr::constant(BigRational::new(n.into(), d.into())))
    }

    pub fn zero() -> Expr {
        Expr::int(0)
    }

    pub fn one() -> Expr {
        Expr::int(1)
    }

    pub fn sym(s: Symbol) -> Expr {
        intern(Node::Sym(s))
    }

    pub fn nu(i: usize) -> Expr {
        Expr::sym(Symbol::nu(i))
    }

    pub fn as_const(&self) -> Option<&BigRational> {
        match self.node() {
            Node::Const(r) => Some(r),
            _ => None,
        }
    }

    pub fn as_symbol(&self) -> Option<Symbol> {
        match self.node() {
            Node::Sym(s) => Some(*s),
            _ => None,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.as_const().is_some_and(|r| r.is_zero())
    }

    pub fn is_one(&self) -> bool {
        self.as_const().is_some_and(|r| r.is_one())
    }

    /// Sum with flattening; constants are folded into one trailing term.
    pub fn add_all(terms: impl IntoIterator<Item = Expr>) -> Expr {
        let mut out = Vec::new();
        let mut constant = BigRational::zero();
        for t in terms {
            match t.node() {
                Node::Const(r) => constant += r,
                Node::Add(inner) => {
                    for s in inner {
                        match s.node() {
                            Node::Const(r) => constant += r,
                            _ => out.push(s.clone()),
                        }
                    }
                }
                _ => out.push(t),
            }
        }
        if !constant.is_zero() {
            out.push(Expr::constant(constant));
        }
        match out.len() {
            0 => Expr::zero(),
            1 => out.pop().unwrap(),
            _ => intern(Node::Add(out)),
        }
    }

    /// Product with flattening; constants are folded into one leading factor.
    pub fn mul_all(factors: impl IntoIterator<Item = Expr>) -> Expr {
        let mut out = Vec::new();
        let mut constant = BigRational::one();
        for t in factors {
            match t.node() {
                Node::Const(r) => constant *= r,
                Node::Mul(inner) => {
                    for s in inner {
                        match s.node() {
                            Node::Const(r) => constant *= r,
                            _ => out.push(s.clone()),
                        }
                    }
                }
                _ => out.push(t),
            }
        }
        if constant.is_zero() {
            return Expr::zero();
        }
        if !constant.is_one() || out.is_empty() {
            out.insert(0, Expr::constant(constant));
        }
        match out.len() {
            1 => out.pop().unwrap(),
            _ => intern(Node::Mul(out)),
        }
    }

    pub fn neg(&self) -> Expr {
        Expr::mul_all([Expr::int(-1), self.clone()])
    }

    /// Quotient; fails only when the denominator is the literal zero.
    pub fn checked_div(&self, den: &Expr) -> Result<Expr, ExprError> {
        if let Some(d) = den.as_const() {
            if d.is_zero() {
                return Err(ExprError::ZeroDenominator);
            }
            return Ok(Expr::mul_all([Expr::constant(d.recip()), self.clone()]));
        }
        if self.is_zero() {
            return Ok(Expr::zero());
        }
        Ok(intern(Node::Div(self.clone(), den.clone())))
    }

    pub fn recip(&self) -> Result<Expr, ExprError> {
        Expr::one().checked_div(self)
    }

    /// Integer power; fails for a negative power of the literal zero.
    pub fn pow(&self, e: i32) -> Result<Expr, ExprError> {
        if e == 0 {
            return Ok(Expr::one());
        }
        if e == 1 {
            return Ok(self.clone());
        }
        match self.node() {
            Node::Const(r) => {
                if r.is_zero() {
                    return if e < 0 { Err(ExprError::ZeroDenominator) } else { Ok(Expr::zero()) };
                }
                let p = num_traits::pow(r.clone(), e.unsigned_abs() as usize);
                Ok(Expr::constant(if e < 0 { p.recip() } else { p }))
            }
            Node::Pow(b, k) => match k.checked_mul(e) {
                Some(n) => b.pow(n),
                None => Ok(intern(Node::Pow(self.clone(), e))),
            },
            _ => Ok(intern(Node::Pow(self.clone(), e))),
        }
    }

    /// Number of distinct DAG nodes reachable from this expression.
    pub fn dag_size(&self) -> usize {
        let mut seen = std::collections::HashSet::new();
        let mut stack = vec![self.clone()];
        while let Some(e) = stack.pop() {
            if !seen.insert(e.addr()) {
                continue;
            }
            stack.extend(e.children().iter().map(|c| (*c).clone()));
        }
        seen.len()
    }

    pub fn children(&self) -> Vec<&Expr> {
        match self.node() {
            Node::Const(_) | Node::Sym(_) => vec![],
            Node::Add(ts) | Node::Mul(ts) => ts.iter().collect(),
            Node::Div(a, b) => vec![a, b],
            Node::Pow(b, _) => vec![b],
        }
    }

    pub fn free_symbols(&self) -> BTreeSet<Symbol> {
        let mut out = BTreeSet::new();
        let mut seen = std::collections::HashSet::new();
        let mut stack = vec![self.clone()];
        while let Some(e) = stack.pop() {
            if !seen.insert(e.addr()) {
                continue;
            }
            if let Node::Sym(s) = e.node() {
                out.insert(*s);
            }
            stack.extend(e.children().iter().map(|c| (*c).clone()));
        }
        out
    }

    pub fn contains_symbol(&self, s: Symbol) -> bool {
        self.free_symbols().contains(&s)
    }

    /// Simultaneous substitution. Symbols for which `image` returns `None`
    /// are left in place.
    pub fn substitute_with(
        &self,
        image: &dyn Fn(Symbol) -> Option<Expr>,
    ) -> Result<Expr, ExprError> {
        fold_dag(self, |e, kids: &[Expr]| -> Result<Expr, ExprError> {
            Ok(match e.node() {
                Node::Const(_) => e.clone(),
                Node::Sym(s) => image(*s).unwrap_or_else(|| e.clone()),
                Node::Add(_) => {
                    if same_children(e, kids) {
                        e.clone()
                    } else {
                        Expr::add_all(kids.iter().cloned())
                    }
                }
                Node::Mul(_) => {
                    if same_children(e, kids) {
                        e.clone()
                    } else {
                        Expr::mul_all(kids.iter().cloned())
                    }
                }
                Node::Div(_, _) => kids[0].checked_div(&kids[1])?,
                Node::Pow(_, k) => kids[0].pow(*k)?,
            })
        })
    }

    pub fn substitute_map(&self, map: &HashMap<Symbol, Expr>) -> Result<Expr, ExprError> {
        self.substitute_with(&|s| map.get(&s).cloned())
    }

    pub fn substitute_one(&self, s: Symbol, by: &Expr) -> Result<Expr, ExprError> {
        self.substitute_with(&|t| (t == s).then(|| by.clone()))
    }

    /// LaTeX rendering.
    pub fn to_latex(&self) -> String {
        let mut out = String::new();
        write_latex(self, &mut out);
        out
    }
}

fn same_children(e: &Expr, kids: &[Expr]) -> bool {
    e.children().iter().zip(kids).all(|(a, b)| *a == b)
}

/// Post-order fold over the DAG; every shared node is visited once.
pub(crate) fn fold_dag<T: Clone, E>(
    root: &Expr,
    mut f: impl FnMut(&Expr, &[T]) -> Result<T, E>,
) -> Result<T, E> {
    let mut memo: HashMap<usize, T> = HashMap::new();
    fold_dag_memo(root, &mut memo, &mut f)
}

pub(crate) fn fold_dag_memo<T: Clone, E>(
    root: &Expr,
    memo: &mut HashMap<usize, T>,
    f: &mut impl FnMut(&Expr, &[T]) -> Result<T, E>,
) -> Result<T, E> {
    if let Some(v) = memo.get(&root.addr()) {
        return Ok(v.clone());
    }
    let mut stack: Vec<(Expr, bool)> = vec![(root.clone(), false)];
    let mut kids_buf: Vec<T> = Vec::new();
    while let Some((e, expanded)) = stack.pop() {
        if memo.contains_key(&e.addr()) {
            continue;
        }
        if expanded {
            kids_buf.clear();
            for c in e.children() {
                kids_buf.push(memo[&c.addr()].clone());
            }
            let v = f(&e, &kids_buf)?;
            memo.insert(e.addr(), v);
        } else {
            stack.push((e.clone(), true));
            for c in e.children() {
                if !memo.contains_key(&c.addr()) {
                    stack.push((c.clone(), false));
                }
            }
        }
    }
    Ok(memo[&root.addr()].clone())
}

impl From<Symbol> for Expr {
    fn from(s: Symbol) -> Expr {
        Expr::sym(s)
    }
}

impl From<i64> for Expr {
    fn from(n: i64) -> Expr {
        Expr::int(n)
    }
}

macro_rules! binop {
    ($tr:ident, $m:ident, $body:expr) => {
        impl ops::$tr<Expr> for Expr {
            type Output = Expr;
            fn $m(self, rhs: Expr) -> Expr {
                $body(&self, &rhs)
            }
        }
        impl ops::$tr<&Expr> for Expr {
            type Output = Expr;
            fn $m(self, rhs: &Expr) -> Expr {
                $body(&self, rhs)
            }
        }
        impl ops::$tr<Expr> for &Expr {
            type Output = Expr;
            fn $m(self, rhs: Expr) -> Expr {
                $body(self, &rhs)
            }
        }
        impl ops::$tr<&Expr> for &Expr {
            type Output = Expr;
            fn $m(self, rhs: &Expr) -> Expr {
                $body(self, rhs)
            }
        }
    };
}

binop!(Add, add, |a: &Expr, b: &Expr| Expr::add_all([a.clone(), b.clone()]));
binop!(Sub, sub, |a: &Expr, b: &Expr| Expr::add_all([a.clone(), b.neg()]));
binop!(Mul, mul, |a: &Expr, b: &Expr| Expr::mul_all([a.clone(), b.clone()]));
// Panics on a literal zero denominator; use `checked_div` for untrusted input.
binop!(Div, div, |a: &Expr, b: &Expr| a.checked_div(b).expect("division by literal zero"));

impl ops::Neg for Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        Expr::neg(&self)
    }
}

impl ops::Neg for &Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        Expr::neg(self)
    }
}

// ---------------------------------------------------------------------------
// Printing. The output reparses to the same node (see parse.rs tests).

const PREC_ADD: u8 = 1;
const PREC_MUL: u8 = 2;
const PREC_POW: u8 = 3;

fn write_rational(r: &BigRational, out: &mut String) {
    if r.is_integer() {
        out.push_str(&r.numer().to_string());
    } else {
        out.push_str(&format!("{}/{}", r.numer(), r.denom()));
    }
}

/// True when the printed form starts with a minus sign.
fn leads_negative(e: &Expr) -> bool {
    match e.node() {
        Node::Const(r) => r.is_negative(),
        Node::Mul(fs) => fs[0].as_const().is_some_and(|r| r.is_negative()),
        Node::Add(ts) => leads_negative(&ts[0]),
        Node::Div(a, _) => leads_negative(a),
        _ => false,
    }
}

fn precedence(e: &Expr) -> u8 {
    match e.node() {
        Node::Add(_) => PREC_ADD,
        Node::Mul(_) | Node::Div(_, _) => PREC_MUL,
        Node::Const(r) if !r.is_integer() => PREC_MUL,
        Node::Pow(_, _) => PREC_POW,
        _ => 4,
    }
}

fn write_expr(e: &Expr, out: &mut String) {
    match e.node() {
        Node::Const(r) => write_rational(r, out),
        Node::Sym(s) => out.push_str(&s.name()),
        Node::Add(ts) => {
            for (i, t) in ts.iter().enumerate() {
                if i == 0 {
                    write_term(t, out);
                    continue;
                }
                match negated_term(t) {
                    Some(pos) => {
                        out.push_str(" - ");
                        let wrap = matches!(pos.node(), Node::Add(_));
                        write_wrapped(&pos, wrap, out);
                    }
                    None => {
                        out.push_str(" + ");
                        write_term(t, out);
                    }
                }
            }
        }
        Node::Mul(fs) => {
            let mut rest: &[Expr] = fs;
            if let Some(r) = fs[0].as_const() {
                if *r == -BigRational::one() {
                    out.push('-');
                    rest = &fs[1..];
                } else {
                    write_rational(r, out);
                    out.push('*');
                    rest = &fs[1..];
                }
            }
            for (i, t) in rest.iter().enumerate() {
                if i > 0 {
                    out.push('*');
                }
                let wrap = match t.node() {
                    Node::Add(_) | Node::Div(_, _) | Node::Mul(_) => true,
                    Node::Const(_) => true,
                    _ => false,
                };
                write_wrapped(t, wrap, out);
            }
        }
        Node::Div(a, b) => {
            let wrap_num = precedence(a) < PREC_MUL || leads_negative(a);
            write_wrapped(a, wrap_num, out);
            out.push('/');
            let wrap_den = precedence(b) <= PREC_MUL || leads_negative(b);
            write_wrapped(b, wrap_den, out);
        }
        Node::Pow(b, k) => {
            let wrap = precedence(b) <= PREC_POW || leads_negative(b);
            write_wrapped(b, wrap, out);
            if *k < 0 {
                out.push_str(&format!("^({k})"));
            } else {
                out.push_str(&format!("^{k}"));
            }
        }
    }
}

/// Terms inside a sum never need parentheses except nested sums, which the
/// constructors flatten away.
fn write_term(t: &Expr, out: &mut String) {
    write_expr(t, out)
}

/// For a sum term printed after the first position, returns the positive
/// counterpart when the term should be shown as `- pos`.
fn negated_term(t: &Expr) -> Option<Expr> {
    match t.node() {
        Node::Const(r) if r.is_negative() => Some(Expr::constant(-r)),
        Node::Mul(fs) => match fs[0].as_const() {
            Some(r) if r.is_negative() => {
                let pos = -r;
                let mut rest = vec![Expr::constant(pos)];
                rest.extend(fs[1..].iter().cloned());
                Some(Expr::mul_all(rest))
            }
            _ => None,
        },
        _ => None,
    }
}

fn write_wrapped(e: &Expr, wrap: bool, out: &mut String) {
    if wrap {
        out.push('(');
        write_expr(e, out);
        out.push(')');
    } else {
        write_expr(e, out);
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut out = String::new();
        write_expr(self, &mut out);
        f.write_str(&out)
    }
}

impl fmt::Debug for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

fn latex_rational(r: &BigRational, out: &mut String) {
    if r.is_integer() {
        out.push_str(&r.numer().to_string());
    } else {
        let sign = if r.is_negative() { "-" } else { "" };
        out.push_str(&format!("{sign}\\frac{{{}}}{{{}}}", r.numer().abs(), r.denom()));
    }
}

fn write_latex(e: &Expr, out: &mut String) {
    match e.node() {
        Node::Const(r) => latex_rational(r, out),
        Node::Sym(s) => out.push_str(&s.latex()),
        Node::Add(ts) => {
            for (i, t) in ts.iter().enumerate() {
                if i == 0 {
                    write_latex(t, out);
                    continue;
                }
                match negated_term(t) {
                    Some(pos) => {
                        out.push_str(" - ");
                        if matches!(pos.node(), Node::Add(_)) {
                            out.push_str("\\left(");
                            write_latex(&pos, out);
                            out.push_str("\\right)");
                        } else {
                            write_latex(&pos, out);
                        }
                    }
                    None => {
                        out.push_str(" + ");
                        write_latex(t, out);
                    }
                }
            }
        }
        Node::Mul(fs) => {
            let mut rest: &[Expr] = fs;
            if let Some(r) = fs[0].as_const() {
                if *r == -BigRational::one() {
                    out.push('-');
                } else {
                    latex_rational(r, out);
                    out.push_str(" \\, ");
                }
                rest = &fs[1..];
            }
            for (i, t) in rest.iter().enumerate() {
                if i > 0 {
                    out.push_str(" \\, ");
                }
                if matches!(t.node(), Node::Add(_)) {
                    out.push_str("\\left(");
                    write_latex(t, out);
                    out.push_str("\\right)");
                } else {
                    write_latex(t, out);
                }
            }
        }
        Node::Div(a, b) => {
            out.push_str("\\frac{");
            write_latex(a, out);
            out.push_str("}{");
            write_latex(b, out);
            out.push('}');
        }
        Node::Pow(b, k) => {
            if matches!(b.node(), Node::Sym(_)) {
                write_latex(b, out);
            } else {
                out.push_str("\\left(");
                write_latex(b, out);
                out.push_str("\\right)");
            }
            out.push_str(&format!("^{{{k}}}"));
        }
    }
}
