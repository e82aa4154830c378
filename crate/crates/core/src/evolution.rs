//! Time evolutions `T = Xi . w^2`, the theorems they satisfy, and exact
//! rational iteration of the nonlinear maps.

use std::collections::BTreeMap;
use std::fmt;
use std::time::Instant;

use num_rational::BigRational;
use num_traits::{One, Zero};
use serde_json::{json, Value};

use crate::error::{EvalError, ExprError, OrbitError, WeylError};
use crate::eval::Program;
use crate::expr::Expr;
use crate::field::{parse_rational, rational_to_string, FieldOps, Fraction, FractionField};
use crate::identity::{check_pairs, IdentityConfig, Verdict};
use crate::lax::{d_scaling, g_scaling, s_scaling};
use crate::parse::parse;
use crate::report::{CheckRecord, Report};
use crate::symbol::Symbol;
use crate::weyl::{compose, word_to_transform, FamilyDescriptor, FamilyName, Transformation, WeylWord};

fn p(src: &str) -> Expr {
    parse(src).expect("built-in expression parses")
}

pub fn fbar() -> Symbol {
    Symbol::declare("fbar").expect("valid symbol name")
}

pub fn gbar() -> Symbol {
    Symbol::declare("gbar").expect("valid symbol name")
}

pub fn make_xi(fam: &FamilyDescriptor) -> Transformation {
    fam.xi.clone()
}

pub fn time_evolution(fam: &FamilyDescriptor) -> Result<Transformation, WeylError> {
    time_evolution_from(fam, &fam.evolution_word, &fam.xi)
}

pub fn time_evolution_from(
    fam: &FamilyDescriptor,
    word: &WeylWord,
    xi: &Transformation,
) -> Result<Transformation, WeylError> {
    let w2 = word_to_transform(fam, &word.repeat(2))?;
    Ok(compose(xi, &w2)?.with_label("T"))
}

/// The family's two nonlinear relations as `(lhs, rhs)`, cross-multiplied so
/// that each is linear in every one of `f, g, fbar, gbar`. `after` is applied
/// to the parameter combinations that the relations evaluate at the next step.
pub fn nonlinear_pairs(
    fam: FamilyName,
    fb: &Expr,
    gb: &Expr,
    after: &dyn Fn(&Expr) -> Result<Expr, ExprError>,
) -> Result<[(Expr, Expr); 2], ExprError> {
    let f = Expr::sym(Symbol::F);
    let g = Expr::sym(Symbol::G);
    let one = Expr::one();
    let prod = |terms: Vec<Expr>| Expr::mul_all(terms);
    let g_minus = |srcs: &[&str]| prod(srcs.iter().map(|s| &g - &p(s)).collect());
    let fb_minus = |es: Vec<Expr>| prod(es.into_iter().map(|e| fb - &e).collect());
    let nus = |r: std::ops::RangeInclusive<usize>| r.map(Expr::nu).collect::<Vec<_>>();
    let shifted = |src: &[&str]| src.iter().map(|s| after(&p(s))).collect::<Result<Vec<_>, _>>();
    let fbg = fb * &g;
    let fg = &f * &g;
    Ok(match fam {
        FamilyName::D5 => [
            (
                prod(vec![f.clone(), fb.clone(), g_minus(&["1/nu1", "1/nu2"])]),
                prod(vec![p("nu3*nu4"), g_minus(&["nu5/kappa2", "nu6/kappa2"])]),
            ),
            (
                prod(vec![g.clone(), gb.clone(), p("nu1*nu2"), fb_minus(nus(3..=4))]),
                fb_minus(shifted(&["kappa1/nu7", "kappa1/nu8"])?),
            ),
        ],
        FamilyName::E6 => [
            (
                prod(vec![&fbg - &one, &fg - &one, g_minus(&["nu5/kappa2", "nu6/kappa2"])]),
                prod(vec![f.clone(), fb.clone(), g_minus(&["1/nu1", "1/nu2", "1/nu3", "1/nu4"])]),
            ),
            (
                prod(vec![&fbg - &one, fb * gb - one.clone(), fb_minus(shifted(&["kappa1/nu7", "kappa1/nu8"])?)]),
                prod(vec![g.clone(), gb.clone(), fb_minus(nus(1..=4))]),
            ),
        ],
        FamilyName::E7 => [
            (
                prod(vec![
                    &fbg - &p("kappa1/(q*kappa2)"),
                    &fg - &p("kappa1/kappa2"),
                    g_minus(&["1/nu1", "1/nu2", "1/nu3", "1/nu4"]),
                ]),
                prod(vec![
                    &fbg - &one,
                    &fg - &one,
                    g_minus(&["nu5/kappa2", "nu6/kappa2", "nu7/kappa2", "nu8/kappa2"]),
                ]),
            ),
            (
                prod(vec![
                    gb * fb - p("kappa1/(q^2*kappa2)"),
                    &fbg - &p("kappa1/(q*kappa2)"),
                    fb_minus(nus(1..=4)),
                ]),
                prod(vec![
                    gb * fb - one.clone(),
                    &fbg - &one,
                    fb_minus(shifted(&["kappa1/nu5", "kappa1/nu6", "kappa1/nu7", "kappa1/nu8"])?),
                ]),
            ),
        ],
    })
}

/// `kappa1 -> kappa1/q`, `kappa2 -> q kappa2`: the parameter part of one step.
pub fn kappa_shift() -> Transformation {
    Transformation::new("kappa shift", [(Symbol::KAPPA1, p("kappa1/q")), (Symbol::KAPPA2, p("q*kappa2"))])
}

#[derive(Clone, Debug)]
pub struct EvolutionSpec {
    pub family: FamilyName,
    pub word: WeylWord,
    pub xi: Transformation,
    /// Residuals `lhs - rhs` in `f, g, fbar, gbar` and the parameters.
    pub qp_relations: [Expr; 2],
}

impl EvolutionSpec {
    pub fn new(fam: &FamilyDescriptor) -> Self {
        let shift = kappa_shift();
        let pairs = nonlinear_pairs(fam.name, &Expr::sym(fbar()), &Expr::sym(gbar()), &|e| shift.apply(e))
            .expect("relations build");
        let [(a, b), (c, d)] = pairs;
        EvolutionSpec {
            family: fam.name,
            word: fam.evolution_word.clone(),
            xi: fam.xi.clone(),
            qp_relations: [a - b, c - d],
        }
    }
}

fn timed(id: String, run: impl FnOnce() -> Result<Verdict, crate::error::IdentityError>) -> CheckRecord {
    let start = Instant::now();
    let mut r = CheckRecord::from_verdict(id, run());
    r.elapsed = Some(start.elapsed());
    r
}

/// `T` fixes every `nu_i`, moves `kappa1, kappa2` by `1/q, q`, and solves the
/// family's nonlinear system.
pub fn verify_theorem_i(fam: &FamilyDescriptor, cfg: &IdentityConfig) -> Report {
    let mut report = Report::new(format!("{} time evolution", fam.name));
    match time_evolution(fam) {
        Ok(t) => report.extend(verify_theorem_i_for(fam, &t, cfg)),
        Err(e) => report.push(CheckRecord::fail("T", e.to_string())),
    }
    report
}

/// Theorem (i) checks for an arbitrary candidate `T`.
pub fn verify_theorem_i_for(fam: &FamilyDescriptor, t: &Transformation, cfg: &IdentityConfig) -> Report {
    let mut report = Report::new(format!("{} time evolution ({})", fam.name, t.label()));
    let k = fam.constraint();
    let mut checks: Vec<(String, Expr, Expr)> = Vec::new();
    for i in 1..=8 {
        checks.push((format!("T(nu{i}) = nu{i}"), t.image(Symbol::nu(i)), Expr::nu(i)));
    }
    checks.push(("T(kappa1) = kappa1/q".into(), t.image(Symbol::KAPPA1), p("kappa1/q")));
    checks.push(("T(kappa2) = q*kappa2".into(), t.image(Symbol::KAPPA2), p("q*kappa2")));
    let tf = t.image(Symbol::F);
    let tg = t.image(Symbol::G);
    match nonlinear_checks(fam.name, &tf, &tg, t) {
        Ok(more) => checks.extend(more),
        Err(e) => report.push(CheckRecord::fail("nonlinear relations", e.to_string())),
    }
    let exact_first = fam.name == FamilyName::D5;
    let records = crate::weyl::par_records(&checks, |(id, a, b)| {
        let mut c = *cfg;
        if exact_first && id.starts_with("T(f) =") {
            c.exact = true;
        }
        timed(id.clone(), || {
            let mut v = check_pairs(&[(a.clone(), b.clone())], k, &c)?;
            Ok(v.pop().unwrap())
        })
    });
    for r in records {
        report.push(r);
    }
    report
}

fn nonlinear_checks(
    fam: FamilyName,
    tf: &Expr,
    tg: &Expr,
    t: &Transformation,
) -> Result<Vec<(String, Expr, Expr)>, ExprError> {
    if fam == FamilyName::D5 {
        // the two displayed closed forms
        let rhs_f = p("nu3*nu4*(g - nu5/kappa2)*(g - nu6/kappa2)/(f*(g - 1/nu1)*(g - 1/nu2))");
        let a7 = t.apply(&p("kappa1/nu7"))?;
        let a8 = t.apply(&p("kappa1/nu8"))?;
        let rhs_g = ((tf - &a7) * (tf - &a8))
            .checked_div(&(p("g*nu1*nu2") * (tf - &Expr::nu(3)) * (tf - &Expr::nu(4))))?;
        return Ok(vec![
            ("T(f) = nu3 nu4 (g - nu5/kappa2)(g - nu6/kappa2)/(f (g - 1/nu1)(g - 1/nu2))".into(), tf.clone(), rhs_f),
            ("T(g) = (T(f) - T(kappa1/nu7))(T(f) - T(kappa1/nu8))/(g nu1 nu2 (T(f) - nu3)(T(f) - nu4))".into(), tg.clone(), rhs_g),
        ]);
    }
    let [(a, b), (c, d)] = nonlinear_pairs(fam, tf, tg, &|e| t.apply(e))?;
    Ok(vec![("first relation".into(), a, b), ("second relation".into(), c, d)])
}

/// The generators on which theorem (ii) compares `Xi` with a scaling map.
pub fn theorem_ii_generators(fam: FamilyName) -> Vec<Expr> {
    let mut out: Vec<Expr> = (1..=4).map(Expr::nu).collect();
    let rest: &[&str] = match fam {
        FamilyName::D5 | FamilyName::E6 => &["nu5/kappa2", "nu6/kappa2", "nu7/kappa1", "nu8/kappa1", "f", "g"],
        FamilyName::E7 => &["nu5/kappa1", "nu6/kappa1", "nu7/kappa1", "nu8/kappa1", "kappa2/kappa1", "f", "g"],
    };
    out.extend(rest.iter().map(|s| p(s)));
    out
}

/// The scaling map that `Xi` factors through on the generators.
pub fn xi_factorization(fam: FamilyName) -> Transformation {
    match fam {
        FamilyName::D5 => compose(&g_scaling(&p("kappa2/(nu5*nu6)")), &d_scaling(&p("kappa1/(q*nu3*nu4)")))
            .expect("scalings compose"),
        FamilyName::E6 => s_scaling(&p("nu5*nu6/kappa2")),
        FamilyName::E7 => s_scaling(&p("kappa1/(q*kappa2)")),
    }
}

/// The factorization as printed, where it differs.
pub fn printed_xi_factorization(fam: FamilyName) -> Option<Transformation> {
    match fam {
        FamilyName::D5 => Some(
            compose(&g_scaling(&p("kappa2/(nu5*nu6)")), &d_scaling(&p("kappa1/(q*nu7*nu8)")))
                .expect("scalings compose"),
        ),
        FamilyName::E6 => Some(s_scaling(&p("kappa2/(nu5*nu6*kappa1^2)"))),
        FamilyName::E7 => None,
    }
}

pub fn verify_theorem_ii(fam: &FamilyDescriptor, cfg: &IdentityConfig) -> Report {
    verify_theorem_ii_for(fam, &fam.xi, &xi_factorization(fam.name), cfg)
}

pub fn verify_theorem_ii_for(
    fam: &FamilyDescriptor,
    xi: &Transformation,
    scaling: &Transformation,
    cfg: &IdentityConfig,
) -> Report {
    let mut report = Report::new(format!("{} adjustment map factorization", fam.name));
    let checks: Vec<(String, Result<(Expr, Expr), ExprError>)> = theorem_ii_generators(fam.name)
        .into_iter()
        .map(|z| (format!("Xi({z}) = {}({z})", scaling.label()), xi.apply(&z).and_then(|a| Ok((a, scaling.apply(&z)?)))))
        .collect();
    let records = crate::weyl::par_records(&checks, |(id, pair)| match pair {
        Ok((a, b)) => timed(id.clone(), || {
            let mut v = check_pairs(&[(a.clone(), b.clone())], fam.constraint(), cfg)?;
            Ok(v.pop().unwrap())
        }),
        Err(e) => CheckRecord::fail(id.clone(), e.to_string()),
    });
    for r in records {
        report.push(r);
    }
    report
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OrbitState {
    pub t: i64,
    pub q: BigRational,
    pub nu: [BigRational; 8],
    pub kappa1: BigRational,
    pub kappa2: BigRational,
    pub f: BigRational,
    pub g: BigRational,
}

fn nonzero(name: &str, v: &BigRational) -> Result<(), OrbitError> {
    if v.is_zero() {
        return Err(OrbitError::InvalidState(format!("{name} must be nonzero")));
    }
    Ok(())
}

impl OrbitState {
    /// `nu8` is computed from the constraint.
    pub fn new(
        q: BigRational,
        nu: [BigRational; 7],
        kappa1: BigRational,
        kappa2: BigRational,
        f: BigRational,
        g: BigRational,
    ) -> Result<Self, OrbitError> {
        nonzero("q", &q)?;
        nonzero("kappa1", &kappa1)?;
        nonzero("kappa2", &kappa2)?;
        if q.is_one() {
            return Err(OrbitError::InvalidState("q must differ from 1".into()));
        }
        let mut den = q.clone();
        for (i, v) in nu.iter().enumerate() {
            nonzero(&format!("nu{}", i + 1), v)?;
            den *= v;
        }
        let nu8 = &kappa1 * &kappa1 * &kappa2 * &kappa2 / den;
        let [a, b, c, d, e, f6, g7] = nu;
        Ok(OrbitState { t: 0, q, nu: [a, b, c, d, e, f6, g7, nu8], kappa1, kappa2, f, g })
    }

    /// `kappa1^2 kappa2^2 - q nu1 ... nu8`.
    pub fn constraint_residual(&self) -> BigRational {
        let lhs = &self.kappa1 * &self.kappa1 * &self.kappa2 * &self.kappa2;
        let rhs = self.nu.iter().fold(self.q.clone(), |acc, v| acc * v);
        lhs - rhs
    }

    pub fn valuation(&self) -> BTreeMap<Symbol, BigRational> {
        let mut m = BTreeMap::new();
        m.insert(Symbol::Q, self.q.clone());
        for (i, v) in self.nu.iter().enumerate() {
            m.insert(Symbol::nu(i + 1), v.clone());
        }
        m.insert(Symbol::KAPPA1, self.kappa1.clone());
        m.insert(Symbol::KAPPA2, self.kappa2.clone());
        m.insert(Symbol::F, self.f.clone());
        m.insert(Symbol::G, self.g.clone());
        m
    }

    pub fn to_json(&self) -> Value {
        let s = rational_to_string;
        json!({
            "t": self.t,
            "q": s(&self.q),
            "nu": self.nu.iter().map(s).collect::<Vec<_>>(),
            "kappa1": s(&self.kappa1),
            "kappa2": s(&self.kappa2),
            "f": s(&self.f),
            "g": s(&self.g),
            "residual": s(&self.constraint_residual()),
        })
    }

    /// Accepts 7 or 8 `nu` entries; `nu8` is recomputed either way.
    pub fn from_json(v: &Value) -> Result<Self, OrbitError> {
        let bad = |m: String| OrbitError::InvalidState(m);
        let field = |name: &str| -> Result<BigRational, OrbitError> {
            let x = v.get(name).ok_or_else(|| bad(format!("missing field {name}")))?;
            rational_value(x).ok_or_else(|| bad(format!("{name} is not a rational")))
        };
        let nu = v
            .get("nu")
            .and_then(Value::as_array)
            .ok_or_else(|| bad("missing array nu".into()))?;
        if nu.len() != 7 && nu.len() != 8 {
            return Err(bad(format!("nu has {} entries, expected 7 or 8", nu.len())));
        }
        let nu7: Vec<BigRational> = nu[..7]
            .iter()
            .enumerate()
            .map(|(i, x)| rational_value(x).ok_or_else(|| bad(format!("nu{} is not a rational", i + 1))))
            .collect::<Result<_, _>>()?;
        let mut st = OrbitState::new(
            field("q")?,
            nu7.try_into().expect("seven entries"),
            field("kappa1")?,
            field("kappa2")?,
            field("f")?,
            field("g")?,
        )?;
        st.t = v.get("t").and_then(Value::as_i64).unwrap_or(0);
        Ok(st)
    }
}

fn rational_value(v: &Value) -> Option<BigRational> {
    match v {
        Value::String(s) => parse_rational(s),
        Value::Number(n) => n.as_i64().map(|i| BigRational::from_integer(i.into())),
        _ => None,
    }
}

impl fmt::Display for OrbitState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "t={} kappa1={} kappa2={} f={} g={}",
            self.t,
            rational_to_string(&self.kappa1),
            rational_to_string(&self.kappa2),
            rational_to_string(&self.f),
            rational_to_string(&self.g)
        )
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum Direction {
    Forward,
    Backward,
}

/// Solves `r(u) = 0` for an `r` affine in `u`.
#[derive(Clone, Debug)]
struct LinearSolve {
    unknown: Symbol,
    coefficient: Expr,
    program: Program,
}

impl LinearSolve {
    fn new(r: &Expr, unknown: Symbol) -> Self {
        let r0 = r.substitute_one(unknown, &Expr::zero()).expect("substitution by a constant");
        let r1 = r.substitute_one(unknown, &Expr::one()).expect("substitution by a constant");
        let coefficient = &r1 - &r0;
        let program = Program::compile(&[r0, coefficient.clone()]);
        LinearSolve { unknown, coefficient, program }
    }

    fn solve(&self, values: &BTreeMap<Symbol, BigRational>, step: i64) -> Result<BigRational, OrbitError> {
        debug_assert!(!values.contains_key(&self.unknown));
        let field = FractionField;
        let out = run_fractions(&self.program, values, step)?;
        let inv = field
            .inv(&out[1])
            .ok_or_else(|| OrbitError::Pole { step, denominator: self.coefficient.clone() })?;
        Ok(field.neg(&field.mul(&out[0], &inv)).reduce())
    }
}

fn run_fractions(
    prog: &Program,
    values: &BTreeMap<Symbol, BigRational>,
    step: i64,
) -> Result<Vec<Fraction>, OrbitError> {
    let field = FractionField;
    prog.run(&field, &|s| values.get(&s).and_then(|v| field.from_rational(v))).map_err(|e| match e {
        EvalError::DivisionByZero { denominator } => OrbitError::Pole { step, denominator },
        e => OrbitError::Eval(e),
    })
}

fn run_exact(
    prog: &Program,
    values: &BTreeMap<Symbol, BigRational>,
    step: i64,
) -> Result<Vec<BigRational>, OrbitError> {
    Ok(run_fractions(prog, values, step)?.iter().map(Fraction::reduce).collect())
}

/// Exact rational iteration of one family's nonlinear map.
#[derive(Clone, Debug)]
pub struct Stepper {
    pub spec: EvolutionSpec,
    forward: [LinearSolve; 2],
    backward: [LinearSolve; 2],
}

impl Stepper {
    pub fn new(fam: &FamilyDescriptor) -> Self {
        let spec = EvolutionSpec::new(fam);
        let [r1, r2] = &spec.qp_relations;
        let forward = [LinearSolve::new(r1, fbar()), LinearSolve::new(r2, gbar())];
        let backward = [LinearSolve::new(r2, Symbol::G), LinearSolve::new(r1, Symbol::F)];
        Stepper { spec, forward, backward }
    }

    pub fn step(&self, st: &OrbitState, dir: Direction) -> Result<OrbitState, OrbitError> {
        let mut next = st.clone();
        match dir {
            Direction::Forward => {
                let mut vals = st.valuation();
                let fb = self.forward[0].solve(&vals, st.t)?;
                vals.insert(fbar(), fb.clone());
                let gb = self.forward[1].solve(&vals, st.t)?;
                next.t += 1;
                next.kappa1 = &st.kappa1 / &st.q;
                next.kappa2 = &st.kappa2 * &st.q;
                next.f = fb;
                next.g = gb;
            }
            Direction::Backward => {
                next.t -= 1;
                next.kappa1 = &st.kappa1 * &st.q;
                next.kappa2 = &st.kappa2 / &st.q;
                let mut vals = next.valuation();
                vals.remove(&Symbol::F);
                vals.remove(&Symbol::G);
                vals.insert(fbar(), st.f.clone());
                vals.insert(gbar(), st.g.clone());
                let g = self.backward[0].solve(&vals, next.t)?;
                vals.insert(Symbol::G, g.clone());
                let f = self.backward[1].solve(&vals, next.t)?;
                next.f = f;
                next.g = g;
            }
        }
        Ok(next)
    }

    /// `n` forward steps, stopping at the first pole.
    pub fn orbit(&self, st0: &OrbitState, n: usize) -> Orbit {
        self.walk(st0, n, Direction::Forward)
    }

    pub fn walk(&self, st0: &OrbitState, n: usize, dir: Direction) -> Orbit {
        let mut states = vec![st0.clone()];
        for _ in 0..n {
            match self.step(states.last().unwrap(), dir) {
                Ok(s) => states.push(s),
                Err(e) => return Orbit { states, pole: Some(e) },
            }
        }
        Orbit { states, pole: None }
    }
}

pub fn orbit_step(fam: &FamilyDescriptor, st: &OrbitState, dir: Direction) -> Result<OrbitState, OrbitError> {
    Stepper::new(fam).step(st, dir)
}

pub fn orbit(fam: &FamilyDescriptor, st0: &OrbitState, n: usize) -> Orbit {
    Stepper::new(fam).orbit(st0, n)
}

#[derive(Clone, Debug)]
pub struct Orbit {
    pub states: Vec<OrbitState>,
    pub pole: Option<OrbitError>,
}

impl Orbit {
    pub fn to_json(&self, fam: FamilyName) -> Value {
        let mut v = json!({
            "family": fam.as_str(),
            "states": self.states.iter().map(OrbitState::to_json).collect::<Vec<_>>(),
        });
        if let Some(e) = &self.pole {
            v["error"] = match e {
                OrbitError::Pole { step, denominator } => json!({
                    "kind": "pole",
                    "step": step,
                    "denominator": denominator.to_string(),
                }),
                e => json!({ "kind": "error", "message": e.to_string() }),
            };
        }
        v
    }
}

/// Evaluates every image of `t` at the state; the result carries `t + 1`.
pub fn apply_at(t: &Transformation, st: &OrbitState) -> Result<OrbitState, OrbitError> {
    let syms: Vec<Symbol> = Symbol::family_symbols();
    let roots: Vec<Expr> = syms.iter().map(|s| t.image(*s)).collect();
    let prog = Program::compile(&roots);
    let out = run_exact(&prog, &st.valuation(), st.t)?;
    let at: BTreeMap<Symbol, BigRational> = syms.into_iter().zip(out).collect();
    Ok(OrbitState {
        t: st.t + 1,
        q: at[&Symbol::Q].clone(),
        nu: std::array::from_fn(|i| at[&Symbol::nu(i + 1)].clone()),
        kappa1: at[&Symbol::KAPPA1].clone(),
        kappa2: at[&Symbol::KAPPA2].clone(),
        f: at[&Symbol::F].clone(),
        g: at[&Symbol::G].clone(),
    })
}
