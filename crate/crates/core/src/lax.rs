//! Spectral linear equations `up*y(qz) + mid*y(z) + down*y(z/q) = 0`, the
//! gauge transformations acting on them, and the registry of gauge claims.
//!
//! Infinite Pochhammer products never appear: a gauge factor enters only
//! through the rational ratios `p(qz)/p(z)` and `p(z/q)/p(z)`.

use std::fmt;

use crate::error::{ExprError, IdentityError, LaxError};
use crate::expr::Expr;
use crate::identity::{check_pairs, ConstraintRelation, IdentityConfig, Verdict};
use crate::parse::parse;
use crate::report::{CheckRecord, Report};
use crate::symbol::Symbol;
use crate::weyl::{FamilyDescriptor, FamilyName, Transformation, WeylWord, word_to_transform};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LinearQDE {
    /// Coefficient of `y(q*shift)`.
    pub up: Expr,
    /// Coefficient of `y(shift)`.
    pub mid: Expr,
    /// Coefficient of `y(shift/q)`.
    pub down: Expr,
    pub shift: Symbol,
}

impl LinearQDE {
    pub fn new(up: Expr, mid: Expr, down: Expr, shift: Symbol) -> Self {
        LinearQDE { up, mid, down, shift }
    }

    pub fn coefficients(&self) -> [&Expr; 3] {
        [&self.up, &self.mid, &self.down]
    }

    fn map(&self, f: impl Fn(&Expr) -> Result<Expr, ExprError>, shift: Symbol) -> Result<Self, ExprError> {
        Ok(LinearQDE { up: f(&self.up)?, mid: f(&self.mid)?, down: f(&self.down)?, shift })
    }

    /// Renames the shift variable.
    pub fn with_shift(&self, shift: Symbol) -> Result<Self, ExprError> {
        if shift == self.shift {
            return Ok(self.clone());
        }
        let to = Expr::sym(shift);
        self.map(|e| e.substitute_one(self.shift, &to), shift)
    }

    pub fn scale(&self, factor: &Expr) -> LinearQDE {
        LinearQDE {
            up: &self.up * factor,
            mid: &self.mid * factor,
            down: &self.down * factor,
            shift: self.shift,
        }
    }
}

impl fmt::Display for LinearQDE {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let x = self.shift;
        write!(f, "({})*y(q*{x}) + ({})*y({x}) + ({})*y({x}/q) = 0", self.up, self.mid, self.down)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum GaugeSpec {
    /// `y = ỹ * prod_i (q a_i/z; q)_inf / (q b_i/z; q)_inf`.
    Pochhammer { a: Vec<Expr>, b: Vec<Expr> },
    /// `y = z^d ỹ` with `delta = q^d`.
    Power(Expr),
    /// `z = u/c`.
    Dilation(Expr),
    /// `z = c/u`, `y = z^d ỹ(u)` with `delta = q^d`.
    Inversion { c: Expr, delta: Expr },
}

impl GaugeSpec {
    pub fn pochhammer(a: Expr, b: Expr) -> Self {
        GaugeSpec::Pochhammer { a: vec![a], b: vec![b] }
    }

    fn parameters(&self) -> Vec<&Expr> {
        match self {
            GaugeSpec::Pochhammer { a, b } => a.iter().chain(b).collect(),
            GaugeSpec::Power(d) | GaugeSpec::Dilation(d) => vec![d],
            GaugeSpec::Inversion { c, delta } => vec![c, delta],
        }
    }
}

impl fmt::Display for GaugeSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GaugeSpec::Pochhammer { a, b } => {
                let list = |v: &[Expr]| v.iter().map(|e| e.to_string()).collect::<Vec<_>>().join(", ");
                write!(f, "pochhammer([{}], [{}])", list(a), list(b))
            }
            GaugeSpec::Power(d) => write!(f, "power({d})"),
            GaugeSpec::Dilation(c) => write!(f, "dilation({c})"),
            GaugeSpec::Inversion { c, delta } => write!(f, "inversion({c}, {delta})"),
        }
    }
}

fn p(src: &str) -> Expr {
    parse(src).expect("built-in expression parses")
}

/// The spectral equation of each family, collected by shift.
pub fn build_l1(fam: FamilyName) -> LinearQDE {
    match fam {
        FamilyName::D5 => {
            let down = p("nu1*nu2*(z - q*nu3)*(z - q*nu4)/(q*(q*f - z))");
            let up = p("(z - kappa1/nu7)*(z - kappa1/nu8)/(q*(f - z))");
            let mid = p("z*(g*nu1 - 1)*(g*nu2 - 1)/(q*g) - nu1*nu2*nu3*nu4*(g - nu5/kappa2)*(g - nu6/kappa2)/(f*g)")
                + &down * &p("g")
                + &up * &p("1/g");
            LinearQDE::new(up.neg(), mid, down.neg(), Symbol::Z)
        }
        FamilyName::E6 => {
            let down = p("(nu1 - z/q)*(nu2 - z/q)*(nu3 - z/q)*(nu4 - z/q)/(f - z/q)");
            let up = p("(kappa1/nu7 - z)*(kappa1/nu8 - z)/(q*(f - z))");
            let mid = p("z*(g*nu1 - 1)*(g*nu2 - 1)*(g*nu3 - 1)*(g*nu4 - 1)/(g*(f*g - 1)*(g*z - q)) - (g*kappa2/nu5 - 1)*(g*kappa2/nu6 - 1)*kappa1^2/(q*f*g*nu7*nu8)")
                + &down * &p("g/(1 - g*z/q)")
                + &up * &p("1/g - z");
            LinearQDE::new(up.neg(), mid, down.neg(), Symbol::Z)
        }
        FamilyName::E7 => {
            let down = p("(q*nu1 - z)*(q*nu2 - z)*(q*nu3 - z)*(q*nu4 - z)/(q*nu1*nu2*nu3*nu4*(f*q - z)*z^2)");
            let up = p("q*(kappa1 - nu5*z)*(kappa1 - nu6*z)*(kappa1 - nu7*z)*(kappa1 - nu8*z)/(kappa1^4*(f - z)*z^2)");
            let mid = p("q*(kappa1 - kappa2)*(g*kappa2 - nu5)*(g*kappa2 - nu6)*(g*kappa2 - nu7)*(g*kappa2 - nu8)/(g*kappa1*kappa2^2*(f*g*kappa2 - kappa1)*(g*kappa2*z - kappa1)) - q*(kappa1 - kappa2)*(g*nu1 - 1)*(g*nu2 - 1)*(g*nu3 - 1)*(g*nu4 - 1)/(g*(f*g - 1)*kappa1*nu1*nu2*nu3*nu4*(g*z - q))")
                + &down * &p("(g*kappa2*z - kappa1*q)/(kappa1*(q - g*z))")
                + &up * &p("kappa1*(1 - g*z)/(g*kappa2*z - kappa1)");
            LinearQDE::new(up, mid, down, Symbol::Z)
        }
    }
}

pub fn apply_gauge(eq: &LinearQDE, g: &GaugeSpec) -> Result<LinearQDE, LaxError> {
    for par in g.parameters() {
        if par.contains_symbol(eq.shift) {
            return Err(LaxError::MovesShiftVariable(eq.shift));
        }
    }
    let x = Expr::sym(eq.shift);
    let q = Expr::sym(Symbol::Q);
    Ok(match g {
        GaugeSpec::Pochhammer { a, b } => {
            let mut up = eq.up.clone();
            let mut down = eq.down.clone();
            for (ai, bi) in a.iter().zip(b) {
                // p(qz)/p(z) = (z - a)/(z - b), p(z/q)/p(z) = (z - qb)/(z - qa)
                up = up * (&x - ai).checked_div(&(&x - bi))?;
                down = down * (&x - &(&q * bi)).checked_div(&(&x - &(&q * ai)))?;
            }
            LinearQDE { up, mid: eq.mid.clone(), down, shift: eq.shift }
        }
        GaugeSpec::Power(delta) => LinearQDE {
            up: &eq.up * delta,
            mid: eq.mid.clone(),
            down: eq.down.checked_div(delta)?,
            shift: eq.shift,
        },
        GaugeSpec::Dilation(c) => {
            let image = Expr::sym(Symbol::U).checked_div(c)?;
            eq.map(|e| e.substitute_one(eq.shift, &image), Symbol::U)?
        }
        GaugeSpec::Inversion { c, delta } => {
            let image = c.checked_div(&Expr::sym(Symbol::U))?;
            let at = |e: &Expr| e.substitute_one(eq.shift, &image);
            LinearQDE {
                up: at(&eq.down)?.checked_div(delta)?,
                mid: at(&eq.mid)?,
                down: at(&eq.up)? * delta,
                shift: Symbol::U,
            }
        }
    })
}

pub fn apply_gauges(eq: &LinearQDE, gs: &[GaugeSpec]) -> Result<LinearQDE, LaxError> {
    gs.iter().try_fold(eq.clone(), |acc, g| apply_gauge(&acc, g))
}

pub fn substitute_params(eq: &LinearQDE, t: &Transformation) -> Result<LinearQDE, LaxError> {
    if t.moves(eq.shift) {
        return Err(LaxError::MovesShiftVariable(eq.shift));
    }
    Ok(eq.map(|e| t.apply(e), eq.shift)?)
}

/// Equality up to one common factor, tested by cross-multiplying against a
/// pivot coefficient (mid, then up, then down).
pub fn equations_equivalent(
    e1: &LinearQDE,
    e2: &LinearQDE,
    k: Option<&ConstraintRelation>,
    cfg: &IdentityConfig,
) -> Result<Verdict, LaxError> {
    if e1.shift != e2.shift {
        return Err(LaxError::ShiftMismatch(e1.shift, e2.shift));
    }
    let c1 = e1.coefficients();
    let c2 = e2.coefficients();
    let zero_pairs: Vec<(Expr, Expr)> =
        c1.iter().chain(c2.iter()).map(|c| ((*c).clone(), Expr::zero())).collect();
    let is_zero = check_pairs(&zero_pairs, k, cfg).map_err(degenerate)?;
    let pivot = [1usize, 0, 2]
        .into_iter()
        .find(|&i| !is_zero[i].holds() && !is_zero[3 + i].holds())
        .ok_or(LaxError::Degenerate)?;
    let pairs: Vec<(Expr, Expr)> = (0..3)
        .filter(|&i| i != pivot)
        .map(|i| (c1[i] * c2[pivot], c2[i] * c1[pivot]))
        .collect();
    let verdicts = check_pairs(&pairs, k, cfg).map_err(degenerate)?;
    Ok(verdicts
        .into_iter()
        .find(|v| !v.holds())
        .unwrap_or(if cfg.exact { Verdict::ExactProved } else { Verdict::Equal }))
}

fn degenerate(e: IdentityError) -> LaxError {
    match e {
        IdentityError::ResamplingExhausted { .. } => LaxError::Degenerate,
        e => LaxError::Identity(e),
    }
}

/// `G[s]`: the parameter change induced by `y = z^d ỹ` with `s = q^d`.
pub fn g_scaling(s: &Expr) -> Transformation {
    scaling("G", s, &[(1, -1), (2, -1), (5, 1), (6, 1)], None, Some(1))
}

/// `D[c]`: the parameter change induced by `z = u/c`.
pub fn d_scaling(c: &Expr) -> Transformation {
    scaling("D", c, &[(3, 1), (4, 1), (7, -1), (8, -1)], Some(1), None)
}

/// `S_E6[c]` and `S_E7[c]` share this realization on primitive symbols.
pub fn s_scaling(c: &Expr) -> Transformation {
    scaling(
        "S",
        c,
        &[(1, 1), (2, 1), (3, 1), (4, 1), (5, -1), (6, -1), (7, -1), (8, -1)],
        Some(1),
        Some(-1),
    )
}

fn scaling(label: &str, c: &Expr, nus: &[(usize, i32)], f: Option<i32>, g: Option<i32>) -> Transformation {
    let factor = |k: i32| c.pow(k).expect("scale factor is not the literal zero");
    let mut images: Vec<(Symbol, Expr)> =
        nus.iter().map(|&(i, k)| (Symbol::nu(i), Expr::nu(i) * factor(k))).collect();
    if let Some(k) = f {
        images.push((Symbol::F, Expr::sym(Symbol::F) * factor(k)));
    }
    if let Some(k) = g {
        images.push((Symbol::G, Expr::sym(Symbol::G) * factor(k)));
    }
    Transformation::new(format!("{label}[{c}]"), images)
}

pub const CLAIM_IDS: [&str; 9] = [
    "d5.s2",
    "d5.s2s1s0s2",
    "d5.G",
    "d5.D",
    "d5.inversion",
    "e6.s6",
    "e6.S",
    "e7.s0s4s0",
    "e7.S",
];

#[derive(Clone, Debug)]
pub struct GaugeClaim {
    pub id: &'static str,
    pub family: FamilyName,
    pub gauges: Vec<GaugeSpec>,
    /// The induced parameter change, as a word or an explicit map.
    pub target: ClaimTarget,
}

#[derive(Clone, Debug)]
pub enum ClaimTarget {
    Word(WeylWord),
    Map(Transformation),
}

pub fn claim(id: &str) -> Result<GaugeClaim, LaxError> {
    let delta = Expr::sym(Symbol::DELTA);
    let c = Expr::sym(Symbol::C);
    let word = |w: &str| ClaimTarget::Word(WeylWord::parse(w).expect("claim word parses"));
    let (id, family, gauges, target) = match id {
        "d5.s2" => ("d5.s2", FamilyName::D5, vec![GaugeSpec::pochhammer(p("nu3"), p("kappa1/nu7"))], word("s2")),
        "d5.s2s1s0s2" => (
            "d5.s2s1s0s2",
            FamilyName::D5,
            vec![GaugeSpec::Pochhammer { a: vec![p("nu3"), p("nu4")], b: vec![p("kappa1/nu7"), p("kappa1/nu8")] }],
            word("s2 s1 s0 s2"),
        ),
        "d5.G" => ("d5.G", FamilyName::D5, vec![GaugeSpec::Power(delta.clone())], ClaimTarget::Map(g_scaling(&delta))),
        "d5.D" => ("d5.D", FamilyName::D5, vec![GaugeSpec::Dilation(c.clone())], ClaimTarget::Map(d_scaling(&c))),
        "d5.inversion" => (
            "d5.inversion",
            FamilyName::D5,
            vec![GaugeSpec::Inversion { c: p("q*kappa1"), delta: p("kappa2") }],
            word("pi2 pi1 pi2 pi1"),
        ),
        "e6.s6" => ("e6.s6", FamilyName::E6, vec![GaugeSpec::pochhammer(p("nu1"), p("kappa1/nu7"))], word("s6")),
        "e6.S" => (
            "e6.S",
            FamilyName::E6,
            vec![GaugeSpec::Power(c.recip()?), GaugeSpec::Dilation(c.clone())],
            ClaimTarget::Map(s_scaling(&c)),
        ),
        "e7.s0s4s0" => (
            "e7.s0s4s0",
            FamilyName::E7,
            // (z/a;q)_inf convention: relative to (qa/z;q)_inf this carries z^d, q^d = kappa1/(nu1 nu5)
            vec![GaugeSpec::pochhammer(p("nu1"), p("kappa1/nu5")), GaugeSpec::Power(p("kappa1/(nu1*nu5)"))],
            word("s0 s4 s0"),
        ),
        "e7.S" => ("e7.S", FamilyName::E7, vec![GaugeSpec::Dilation(c.clone())], ClaimTarget::Map(s_scaling(&c))),
        other => return Err(LaxError::UnknownClaim(other.to_string())),
    };
    Ok(GaugeClaim { id, family, gauges, target })
}

pub fn claims_for(fam: FamilyName) -> Vec<&'static str> {
    CLAIM_IDS.iter().copied().filter(|id| claim(id).map(|c| c.family == fam).unwrap_or(false)).collect()
}

/// The gauged spectral equation and the parameter-transformed target.
pub fn claim_equations(fam: &FamilyDescriptor, cl: &GaugeClaim) -> Result<(LinearQDE, LinearQDE), LaxError> {
    let l1 = build_l1(cl.family);
    let gauged = apply_gauges(&l1, &cl.gauges)?;
    let t = match &cl.target {
        ClaimTarget::Word(w) => word_to_transform(fam, w)?,
        ClaimTarget::Map(t) => t.clone(),
    };
    let target = substitute_params(&l1, &t)?.with_shift(gauged.shift)?;
    Ok((gauged, target))
}

pub fn verify_gauge_claim(fam: &FamilyDescriptor, id: &str, cfg: &IdentityConfig) -> Result<CheckRecord, LaxError> {
    let cl = claim(id)?;
    if cl.family != fam.name {
        return Err(LaxError::UnknownClaim(format!("{id} (not a {} claim)", fam.name)));
    }
    let (gauged, target) = claim_equations(fam, &cl)?;
    let record = match equations_equivalent(&gauged, &target, fam.constraint(), cfg) {
        Ok(v) => CheckRecord::from_verdict(id, Ok(v)),
        Err(LaxError::Degenerate) => {
            CheckRecord::from_verdict(id, Err(IdentityError::ResamplingExhausted { attempts: 0 }))
                .with_detail("degenerate comparison")
        }
        Err(e) => CheckRecord::fail(id, e.to_string()),
    };
    Ok(record)
}

/// Every registered claim of the family; the double gauge is additionally
/// compared with two successive single gauges.
pub fn verify_gauge_claims(fam: &FamilyDescriptor, cfg: &IdentityConfig) -> Report {
    let mut report = Report::new(format!("{} gauge claims", fam.name));
    for id in claims_for(fam.name) {
        match verify_gauge_claim(fam, id, cfg) {
            Ok(r) => report.push(r),
            Err(e) => report.push(CheckRecord::fail(id, e.to_string())),
        }
    }
    if fam.name == FamilyName::D5 {
        report.push(double_gauge_record(fam, cfg));
    }
    report
}

fn double_gauge_record(fam: &FamilyDescriptor, cfg: &IdentityConfig) -> CheckRecord {
    let id = "d5.s2s1s0s2 = two single gauges";
    let run = || -> Result<Verdict, LaxError> {
        let l1 = build_l1(FamilyName::D5);
        let both = apply_gauges(&l1, &claim("d5.s2s1s0s2")?.gauges)?;
        let seq = apply_gauges(
            &l1,
            &[GaugeSpec::pochhammer(p("nu3"), p("kappa1/nu7")), GaugeSpec::pochhammer(p("nu4"), p("kappa1/nu8"))],
        )?;
        equations_equivalent(&both, &seq, fam.constraint(), cfg)
    };
    match run() {
        Ok(v) => CheckRecord::from_verdict(id, Ok(v)),
        Err(e) => CheckRecord::fail(id, e.to_string()),
    }
}
