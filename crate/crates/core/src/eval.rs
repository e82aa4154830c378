//! Evaluation of expressions into a field.
//!
//! Expressions are compiled once into a flat instruction list ([`Program`])
//! so that repeated evaluation at many points does not re-walk the DAG.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use num_rational::BigRational;

use crate::error::EvalError;
use crate::expr::{fold_dag_memo, Expr, Node};
use crate::field::{FieldOps, PrimeField, RationalField};
use crate::symbol::Symbol;

/// Assignment of field values to symbols.
#[derive(Clone, Debug, PartialEq)]
pub enum Valuation {
    Rational(BTreeMap<Symbol, BigRational>),
    Prime { p: u64, values: BTreeMap<Symbol, u64> },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum FieldValue {
    Rational(BigRational),
    Prime(u64),
}

impl std::fmt::Display for FieldValue {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            FieldValue::Rational(r) => write!(f, "{r}"),
            FieldValue::Prime(v) => write!(f, "{v}"),
        }
    }
}

pub fn eval(e: &Expr, v: &Valuation) -> Result<FieldValue, EvalError> {
    let prog = Program::compile(std::slice::from_ref(e));
    match v {
        Valuation::Rational(values) => {
            let out = prog.run(&RationalField, &|s| values.get(&s).cloned())?;
            Ok(FieldValue::Rational(out.into_iter().next().unwrap()))
        }
        Valuation::Prime { p, values } => {
            let field = PrimeField::new(*p).expect("valuation modulus must be prime");
            let out = prog.run(&field, &|s| values.get(&s).copied())?;
            Ok(FieldValue::Prime(out.into_iter().next().unwrap()))
        }
    }
}

pub fn eval_rational(
    e: &Expr,
    values: &BTreeMap<Symbol, BigRational>,
) -> Result<BigRational, EvalError> {
    let prog = Program::compile(std::slice::from_ref(e));
    Ok(prog.run(&RationalField, &|s| values.get(&s).cloned())?.remove(0))
}

#[derive(Clone, Debug)]
enum Op {
    Const(BigRational),
    Sym(Symbol),
    Add(Vec<usize>),
    Mul(Vec<usize>),
    Div(usize, usize),
    Pow(usize, i32),
}

/// A topologically ordered evaluation plan for several roots sharing one DAG.
#[derive(Clone, Debug)]
pub struct Program {
    ops: Vec<Op>,
    nodes: Vec<Expr>,
    roots: Vec<usize>,
    symbols: BTreeSet<Symbol>,
}

impl Program {
    pub fn compile(roots: &[Expr]) -> Program {
        let mut ops = Vec::new();
        let mut nodes = Vec::new();
        let mut symbols = BTreeSet::new();
        let mut memo: HashMap<usize, usize> = HashMap::new();
        let mut root_slots = Vec::with_capacity(roots.len());
        for r in roots {
            let slot = fold_dag_memo(r, &mut memo, &mut |e: &Expr, kids: &[usize]| {
                let op = match e.node() {
                    Node::Const(c) => Op::Const(c.clone()),
                    Node::Sym(s) => {
                        symbols.insert(*s);
                        Op::Sym(*s)
                    }
                    Node::Add(_) => Op::Add(kids.to_vec()),
                    Node::Mul(_) => Op::Mul(kids.to_vec()),
                    Node::Div(_, _) => Op::Div(kids[0], kids[1]),
                    Node::Pow(_, k) => Op::Pow(kids[0], *k),
                };
                ops.push(op);
                nodes.push(e.clone());
                Ok::<usize, ()>(ops.len() - 1)
            })
            .unwrap();
            root_slots.push(slot);
        }
        Program { ops, nodes, roots: root_slots, symbols }
    }

    pub fn symbols(&self) -> &BTreeSet<Symbol> {
        &self.symbols
    }

    pub fn len(&self) -> usize {
        self.ops.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ops.is_empty()
    }

    /// Evaluates every root. A vanishing denominator is reported with the
    /// offending subexpression.
    pub fn run<F: FieldOps>(
        &self,
        field: &F,
        value: &dyn Fn(Symbol) -> Option<F::Elem>,
    ) -> Result<Vec<F::Elem>, EvalError> {
        let mut vals: Vec<F::Elem> = Vec::with_capacity(self.ops.len());
        for (i, op) in self.ops.iter().enumerate() {
            let v = match op {
                Op::Const(c) => field.from_rational(c).ok_or_else(|| EvalError::DivisionByZero {
                    denominator: self.nodes[i].clone(),
                })?,
                Op::Sym(s) => value(*s).ok_or(EvalError::Unbound(*s))?,
                Op::Add(ks) => {
                    let mut acc = vals[ks[0]].clone();
                    for k in &ks[1..] {
                        acc = field.add(&acc, &vals[*k]);
                    }
                    acc
                }
                Op::Mul(ks) => {
                    let mut acc = vals[ks[0]].clone();
                    for k in &ks[1..] {
                        acc = field.mul(&acc, &vals[*k]);
                    }
                    acc
                }
                Op::Div(a, b) => {
                    let inv = field.inv(&vals[*b]).ok_or_else(|| EvalError::DivisionByZero {
                        denominator: self.nodes[*b].clone(),
                    })?;
                    field.mul(&vals[*a], &inv)
                }
                Op::Pow(b, k) => field.pow(&vals[*b], *k).ok_or_else(|| {
                    EvalError::DivisionByZero { denominator: self.nodes[*b].clone() }
                })?,
            };
            vals.push(v);
        }
        Ok(self.roots.iter().map(|r| vals[*r].clone()).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::MERSENNE_61;
    use crate::parse::parse;

    fn rat(n: i64) -> BigRational {
        BigRational::from_integer(n.into())
    }

    #[test]
    fn cancellation_evaluates_exactly() {
        let e = parse("q*nu1/nu1").unwrap();
        let v = Valuation::Rational([(Symbol::Q, rat(3)), (Symbol::nu(1), rat(5))].into());
        assert_eq!(eval(&e, &v).unwrap(), FieldValue::Rational(rat(3)));
    }

    #[test]
    fn constraint_residual_vanishes_at_a_constraint_point() {
        let e = parse("kappa1^2*kappa2^2 - q*nu1*nu2*nu3*nu4*nu5*nu6*nu7*nu8").unwrap();
        // q=2, nu=(1..7), nu8 = k1^2 k2^2/(q*7!) with k1=k2=6
        let mut m: BTreeMap<Symbol, BigRational> = BTreeMap::new();
        m.insert(Symbol::Q, rat(2));
        for i in 1..=7 {
            m.insert(Symbol::nu(i), rat(i as i64));
        }
        m.insert(Symbol::KAPPA1, rat(6));
        m.insert(Symbol::KAPPA2, rat(6));
        m.insert(Symbol::nu(8), BigRational::new(1296.into(), (2 * 5040).into()));
        assert_eq!(eval_rational(&e, &m).unwrap(), rat(0));
    }

    #[test]
    fn division_by_zero_names_the_denominator() {
        let e = parse("f/(g - 1)").unwrap();
        let v = Valuation::Prime { p: MERSENNE_61, values: [(Symbol::F, 2), (Symbol::G, 1)].into() };
        match eval(&e, &v) {
            Err(EvalError::DivisionByZero { denominator }) => {
                assert_eq!(denominator, parse("g - 1").unwrap())
            }
            other => panic!("{other:?}"),
        }
        let v = Valuation::Prime { p: MERSENNE_61, values: [(Symbol::F, 2)].into() };
        assert!(matches!(eval(&e, &v), Err(EvalError::Unbound(s)) if s == Symbol::G));
    }

    #[test]
    fn prime_and_rational_agree() {
        let e = parse("(nu1 - 1/3)^(-2)*kappa1 + q").unwrap();
        let r = eval_rational(
            &e,
            &[(Symbol::nu(1), rat(2)), (Symbol::KAPPA1, rat(5)), (Symbol::Q, rat(7))].into(),
        )
        .unwrap();
        let pf = PrimeField::new(MERSENNE_61).unwrap();
        let p = eval(
            &e,
            &Valuation::Prime {
                p: MERSENNE_61,
                values: [(Symbol::nu(1), 2), (Symbol::KAPPA1, 5), (Symbol::Q, 7)].into(),
            },
        )
        .unwrap();
        assert_eq!(p, FieldValue::Prime(pf.from_rational(&r).unwrap()));
    }
}
