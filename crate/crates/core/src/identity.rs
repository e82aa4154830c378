//! Randomized identity testing over a large prime field, with an optional
//! exact confirmation for small expressions.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{EvalError, ExprError, IdentityError};
use crate::eval::Program;
use crate::expr::Expr;
use crate::field::{is_prime_u64, FieldOps, PrimeField, MERSENNE_61};
use crate::ratfun::{self, ExactError, Limits};
use crate::symbol::Symbol;

/// Attempts per trial before a comparison is declared degenerate.
pub const RESAMPLE_FACTOR: usize = 100;

/// Elimination of one symbol by an explicit replacement.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConstraintRelation {
    eliminated: Symbol,
    replacement: Expr,
}

impl ConstraintRelation {
    pub fn new(eliminated: Symbol, replacement: Expr) -> Result<Self, ExprError> {
        if replacement.contains_symbol(eliminated) {
            return Err(ExprError::InvalidSymbolName(format!(
                "replacement for {eliminated} mentions {eliminated}"
            )));
        }
        Ok(ConstraintRelation { eliminated, replacement })
    }

    /// `nu8 = kappa1^2 kappa2^2 / (q nu1 ... nu7)`.
    pub fn standard() -> Self {
        let k1 = Expr::sym(Symbol::KAPPA1);
        let k2 = Expr::sym(Symbol::KAPPA2);
        let mut den = vec![Expr::sym(Symbol::Q)];
        den.extend((1..=7).map(Expr::nu));
        let replacement = Expr::mul_all([k1.pow(2).unwrap(), k2.pow(2).unwrap()]) / Expr::mul_all(den);
        ConstraintRelation { eliminated: Symbol::nu(8), replacement }
    }

    pub fn eliminated(&self) -> Symbol {
        self.eliminated
    }

    pub fn replacement(&self) -> &Expr {
        &self.replacement
    }

    pub fn eliminate(&self, e: &Expr) -> Result<Expr, ExprError> {
        e.substitute_one(self.eliminated, &self.replacement)
    }

    /// `eliminated - replacement`, which vanishes on the constraint variety.
    pub fn residual(&self) -> Expr {
        Expr::sym(self.eliminated) - &self.replacement
    }
}

impl std::fmt::Display for ConstraintRelation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{} = {}", self.eliminated, self.replacement)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct IdentityConfig {
    pub trials: usize,
    pub prime: u64,
    pub seed: u64,
    pub exact: bool,
    pub limits: Limits,
}

impl Default for IdentityConfig {
    fn default() -> Self {
        IdentityConfig { trials: 16, prime: MERSENNE_61, seed: 0, exact: false, limits: Limits::default() }
    }
}

impl IdentityConfig {
    pub fn validate(&self) -> Result<PrimeField, IdentityError> {
        if self.trials == 0 {
            return Err(IdentityError::Config("trials must be at least 1".into()));
        }
        if self.prime <= 1 << 60 {
            return Err(IdentityError::Config(format!("prime {} is not above 2^60", self.prime)));
        }
        if !is_prime_u64(self.prime) {
            return Err(IdentityError::Config(format!("{} is not prime", self.prime)));
        }
        Ok(PrimeField::new(self.prime).unwrap())
    }
}

/// A point where the two sides differ. `values` covers every symbol of the
/// original expressions, including the eliminated one.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Witness {
    pub prime: u64,
    pub values: BTreeMap<Symbol, u64>,
    pub lhs: u64,
    pub rhs: u64,
}

impl std::fmt::Display for Witness {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let vals: Vec<String> = self.values.iter().map(|(s, v)| format!("{s}={v}")).collect();
        write!(f, "{{{}}} mod {}: lhs={} rhs={}", vals.join(", "), self.prime, self.lhs, self.rhs)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Verdict {
    /// Every trial agreed.
    Equal,
    /// Every trial agreed and the difference normalized to zero exactly.
    ExactProved,
    Unequal(Witness),
}

impl Verdict {
    pub fn holds(&self) -> bool {
        !matches!(self, Verdict::Unequal(_))
    }

    pub fn witness(&self) -> Option<&Witness> {
        match self {
            Verdict::Unequal(w) => Some(w),
            _ => None,
        }
    }
}

pub fn identities_equal(
    a: &Expr,
    b: &Expr,
    k: Option<&ConstraintRelation>,
    cfg: &IdentityConfig,
) -> Result<Verdict, IdentityError> {
    let mut out = check_pairs(&[(a.clone(), b.clone())], k, cfg)?;
    Ok(out.pop().unwrap())
}

/// Checks several identities at shared random points. Subexpressions common
/// to several pairs are evaluated once per point.
pub fn check_pairs(
    pairs: &[(Expr, Expr)],
    k: Option<&ConstraintRelation>,
    cfg: &IdentityConfig,
) -> Result<Vec<Verdict>, IdentityError> {
    let field = cfg.validate()?;
    if pairs.is_empty() {
        return Ok(Vec::new());
    }
    let mut roots = Vec::with_capacity(2 * pairs.len() + 1);
    for (a, b) in pairs {
        roots.push(a.clone());
        roots.push(b.clone());
    }
    // The eliminated symbol is computed from the others at each point, so
    // evaluating the original expressions is the same as evaluating the
    // eliminated ones, and the witness is directly reusable.
    if let Some(k) = k {
        roots.push(k.replacement.clone());
    }
    let prog = Program::compile(&roots);
    let mut free: Vec<Symbol> = prog.symbols().iter().copied().collect();
    if let Some(k) = k {
        free.retain(|s| *s != k.eliminated);
    }

    let rep = k.map(|k| Program::compile(std::slice::from_ref(&k.replacement)));
    let run_trial = |trial: usize| -> Result<TrialOutcome, IdentityError> {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        rng.set_stream(trial as u64);
        for _ in 0..RESAMPLE_FACTOR {
            let mut values: BTreeMap<Symbol, u64> = BTreeMap::new();
            for s in &free {
                values.insert(*s, rng.gen_range(1..cfg.prime));
            }
            if let (Some(k), Some(rep)) = (k, rep.as_ref()) {
                match rep.run(&field, &|s| values.get(&s).copied()) {
                    Ok(v) if !field.is_zero(&v[0]) => {
                        values.insert(k.eliminated, v[0]);
                    }
                    Ok(_) | Err(EvalError::DivisionByZero { .. }) => continue,
                    Err(e) => panic!("constraint evaluation: {e}"),
                }
            }
            match prog.run(&field, &|s| values.get(&s).copied()) {
                Ok(v) => return Ok(TrialOutcome { values, results: v }),
                Err(EvalError::DivisionByZero { .. }) => continue,
                Err(e) => panic!("unbound symbol during identity test: {e}"),
            }
        }
        Err(IdentityError::ResamplingExhausted { attempts: RESAMPLE_FACTOR * cfg.trials })
    };

    let outcomes: Vec<Result<TrialOutcome, IdentityError>> = {
        #[cfg(feature = "parallel")]
        {
            use rayon::prelude::*;
            (0..cfg.trials).into_par_iter().map(run_trial).collect()
        }
        #[cfg(not(feature = "parallel"))]
        {
            (0..cfg.trials).map(run_trial).collect()
        }
    };

    let mut verdicts: Vec<Option<Verdict>> = vec![None; pairs.len()];
    for outcome in outcomes {
        let TrialOutcome { values, results } = outcome?;
        for (i, slot) in verdicts.iter_mut().enumerate() {
            if slot.is_some() {
                continue;
            }
            let (lhs, rhs) = (results[2 * i], results[2 * i + 1]);
            if lhs != rhs {
                let mut used = pairs[i].0.free_symbols();
                used.extend(pairs[i].1.free_symbols());
                if let Some(k) = k {
                    if used.contains(&k.eliminated) {
                        used.extend(k.replacement.free_symbols());
                    }
                }
                let mut keep = values.clone();
                keep.retain(|s, _| used.contains(s));
                *slot = Some(Verdict::Unequal(Witness { prime: cfg.prime, values: keep, lhs, rhs }));
            }
        }
    }

    let mut out = Vec::with_capacity(pairs.len());
    for (i, slot) in verdicts.into_iter().enumerate() {
        match slot {
            Some(v) => out.push(v),
            None if cfg.exact => out.push(exact_check(&pairs[i].0, &pairs[i].1, k, cfg)?),
            None => out.push(Verdict::Equal),
        }
    }
    Ok(out)
}

struct TrialOutcome {
    values: BTreeMap<Symbol, u64>,
    results: Vec<u64>,
}

fn exact_check(
    a: &Expr,
    b: &Expr,
    k: Option<&ConstraintRelation>,
    cfg: &IdentityConfig,
) -> Result<Verdict, IdentityError> {
    let mut r = a - b;
    if let Some(k) = k {
        r = k.eliminate(&r)?;
    }
    match ratfun::is_identically_zero(&r, &cfg.limits) {
        Ok(true) => Ok(Verdict::ExactProved),
        Ok(false) => Err(IdentityError::ExactDisagrees),
        Err(ExactError::TooManyNodes(_)) | Err(ExactError::TooManyTerms(_)) => Ok(Verdict::Equal),
        Err(ExactError::ZeroDenominator) => Err(IdentityError::Expr(ExprError::ZeroDenominator)),
    }
}

/// Exact verdict alone, without sampling. `None` when the limits are hit.
pub fn exact_verdict(
    a: &Expr,
    b: &Expr,
    k: Option<&ConstraintRelation>,
    limits: &Limits,
) -> Result<Option<bool>, IdentityError> {
    let mut r = a - b;
    if let Some(k) = k {
        r = k.eliminate(&r)?;
    }
    match ratfun::is_identically_zero(&r, limits) {
        Ok(z) => Ok(Some(z)),
        Err(ExactError::ZeroDenominator) => Err(IdentityError::Expr(ExprError::ZeroDenominator)),
        Err(_) => Ok(None),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eval::{eval, FieldValue, Valuation};
    use crate::parse::parse;
    use proptest::prelude::*;

    fn p(s: &str) -> Expr {
        parse(s).unwrap()
    }

    #[test]
    fn distinct_symbols_are_unequal_with_witness() {
        let v = identities_equal(&p("nu3"), &p("nu4"), None, &IdentityConfig::default()).unwrap();
        let w = v.witness().expect("witness");
        assert_ne!(w.values[&Symbol::nu(3)], w.values[&Symbol::nu(4)]);
    }

    #[test]
    fn constraint_makes_dual_expressions_equal() {
        let cfg = IdentityConfig::default();
        let k = ConstraintRelation::standard();
        let a = p("kappa1*kappa2^2/(nu1*nu2*nu5*nu6)");
        let b = p("q*nu3*nu4*nu7*nu8/kappa1");
        assert!(identities_equal(&a, &b, None, &cfg).unwrap().witness().is_some());
        assert_eq!(identities_equal(&a, &b, Some(&k), &cfg).unwrap(), Verdict::Equal);
    }

    #[test]
    fn elimination_is_idempotent() {
        let k = ConstraintRelation::standard();
        let e = p("nu8*f + kappa1/nu8");
        let once = k.eliminate(&e).unwrap();
        assert_eq!(k.eliminate(&once).unwrap(), once);
        assert!(ConstraintRelation::new(Symbol::nu(8), p("nu8*q")).is_err());
    }

    #[test]
    fn exact_flag_proves_small_identities() {
        let cfg = IdentityConfig { exact: true, ..Default::default() };
        let v = identities_equal(&p("(f^2 - 1)/(f + 1)"), &p("f - 1"), None, &cfg).unwrap();
        assert_eq!(v, Verdict::ExactProved);
    }

    #[test]
    fn degenerate_comparison_is_reported() {
        let e = p("1/(f - f*1)");
        // `f - f*1` does not fold syntactically but is identically zero
        let cfg = IdentityConfig { trials: 2, ..Default::default() };
        if !e.is_zero() {
            assert!(matches!(
                identities_equal(&e, &p("f"), None, &cfg),
                Err(IdentityError::ResamplingExhausted { .. })
            ));
        }
    }

    #[test]
    fn config_is_validated() {
        let bad = IdentityConfig { trials: 0, ..Default::default() };
        assert!(identities_equal(&p("f"), &p("f"), None, &bad).is_err());
        let small = IdentityConfig { prime: 97, ..Default::default() };
        assert!(identities_equal(&p("f"), &p("f"), None, &small).is_err());
        let composite = IdentityConfig { prime: (1 << 61) + 1, ..Default::default() };
        assert!(identities_equal(&p("f"), &p("f"), None, &composite).is_err());
    }

    #[test]
    fn same_seed_same_witness() {
        let cfg = IdentityConfig { seed: 42, ..Default::default() };
        let a = identities_equal(&p("f*g"), &p("g*f + 1/q"), None, &cfg).unwrap();
        let b = identities_equal(&p("f*g"), &p("g*f + 1/q"), None, &cfg).unwrap();
        assert_eq!(a, b);
    }

    fn arb_expr() -> impl Strategy<Value = Expr> {
        let leaf = prop_oneof![
            (-4i64..5).prop_map(Expr::int),
            prop::sample::select(vec!["q", "nu1", "nu8", "kappa1", "f", "g"]).prop_map(p),
        ];
        leaf.prop_recursive(3, 16, 3, |inner| {
            prop_oneof![
                prop::collection::vec(inner.clone(), 2..3).prop_map(Expr::add_all),
                prop::collection::vec(inner.clone(), 2..3).prop_map(Expr::mul_all),
                (inner.clone(), inner).prop_map(|(a, b)| a.checked_div(&b).unwrap_or(a)),
            ]
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn witnesses_are_sound(a in arb_expr(), b in arb_expr(), constrained in any::<bool>()) {
            let k = ConstraintRelation::standard();
            let k = constrained.then_some(&k);
            let cfg = IdentityConfig { trials: 4, ..Default::default() };
            if let Ok(Verdict::Unequal(w)) = identities_equal(&a, &b, k, &cfg) {
                let v = Valuation::Prime { p: w.prime, values: w.values.clone() };
                let la = eval(&a, &v).unwrap();
                let lb = eval(&b, &v).unwrap();
                prop_assert_eq!(&la, &FieldValue::Prime(w.lhs));
                prop_assert_eq!(&lb, &FieldValue::Prime(w.rhs));
                prop_assert_ne!(la, lb);
            }
        }

        #[test]
        fn exact_and_random_agree(a in arb_expr(), b in arb_expr()) {
            let cfg = IdentityConfig { trials: 8, ..Default::default() };
            let exact = exact_verdict(&a, &b, None, &Limits::default());
            let random = identities_equal(&a, &b, None, &cfg);
            if let (Ok(Some(z)), Ok(v)) = (exact, random) {
                prop_assert_eq!(z, v.holds());
            }
        }
    }
}
