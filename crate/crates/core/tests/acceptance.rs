//! The eight acceptance criteria, one line each. Runs without the libtest
//! harness so the lines are always printed; exits nonzero if any fails.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use num_rational::BigRational;
use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use qpainleve::evolution::{
    apply_at, printed_xi_factorization, verify_theorem_i, verify_theorem_ii, verify_theorem_ii_for, Direction, Stepper,
};
use qpainleve::lax::verify_gauge_claims;
use qpainleve::weyl::verify_relations;
use qpainleve::*;

/// Pinned: 16 trials over 2^61 - 1, seed 0.
fn cfg() -> IdentityConfig {
    IdentityConfig { trials: 16, prime: (1 << 61) - 1, seed: 0, ..IdentityConfig::default() }
}

fn p(s: &str) -> Expr {
    parse(s).unwrap_or_else(|e| panic!("{s}: {e}"))
}

struct Outcome {
    pass: bool,
    note: String,
}

fn outcome(pass: bool, note: impl Into<String>) -> Outcome {
    Outcome { pass, note: note.into() }
}

fn summarize(reports: &[Report]) -> Outcome {
    let total: usize = reports.iter().map(|r| r.records.len()).sum();
    let failed: Vec<String> = reports
        .iter()
        .flat_map(|r| r.failures().map(move |f| format!("{}: {}", r.title, f.id)))
        .collect();
    if failed.is_empty() {
        outcome(true, format!("{total} checks"))
    } else {
        outcome(false, format!("{} of {total} failed, first: {}", failed.len(), failed[0]))
    }
}

fn relations() -> Outcome {
    let start = Instant::now();
    let reports: Vec<Report> = FamilyName::ALL.iter().map(|f| verify_relations(&family(*f), &cfg())).collect();
    let mut o = summarize(&reports);
    let t = start.elapsed();
    if t > Duration::from_secs(60) {
        o = outcome(false, format!("took {t:?}"));
    }
    o.note += &format!(", {:.2}s", t.as_secs_f64());
    o
}

/// `(argument, expected image)` under the word, compared mod the constraint.
fn fixture_report(fam: &FamilyDescriptor, title: &str, word: &WeylWord, rows: &[(&str, &str)]) -> Report {
    let mut report = Report::new(format!("{} {title}", fam.name));
    let t = word_to_transform(fam, word).expect("word builds");
    let c = IdentityConfig { exact: true, ..cfg() };
    for (arg, want) in rows {
        let id = format!("{title}({arg}) = {want}");
        let v = t.apply(&p(arg)).map_err(IdentityError::from).and_then(|img| {
            identities_equal(&img, &p(want), fam.constraint(), &c)
        });
        report.push(CheckRecord::from_verdict(id, v));
    }
    report
}

/// Compares an identity in `s`-images, given as a function of the transformation.
fn fixture_identity(
    fam: &FamilyDescriptor,
    id: &str,
    word: &WeylWord,
    build: impl Fn(&Transformation) -> (Expr, Expr),
) -> CheckRecord {
    let t = word_to_transform(fam, word).expect("word builds");
    let (a, b) = build(&t);
    CheckRecord::from_verdict(id, identities_equal(&a, &b, fam.constraint(), &cfg()))
}

fn proof_fixtures() -> Outcome {
    let mut reports = Vec::new();

    let d5 = family(FamilyName::D5);
    let s = WeylWord::parse("pi2 pi1 s2 s1 s0 s2").unwrap();
    reports.push(fixture_report(&d5, "s", &s, &[
        ("nu1", "nu7"),
        ("nu2", "nu8"),
        ("nu3", "kappa2/nu6"),
        ("nu4", "kappa2/nu5"),
        ("nu5", "nu3"),
        ("nu6", "nu4"),
        ("nu7", "kappa2/nu2"),
        ("nu8", "kappa2/nu1"),
        ("kappa1", "kappa2"),
        ("kappa2", "kappa1*kappa2^2/(nu1*nu2*nu5*nu6)"),
        ("kappa2", "q*nu3*nu4*nu7*nu8/kappa1"),
        ("f", "1/g"),
        ("g", "kappa1*f/(q*nu3*nu4*nu7*nu8)*(g - 1/nu1)*(g - 1/nu2)/((g - nu5/kappa2)*(g - nu6/kappa2))"),
    ]));
    reports.push(fixture_report(&d5, "s^2", &s.repeat(2), &[
        ("nu1", "kappa2/nu2"),
        ("nu2", "kappa2/nu1"),
        ("nu3", "q*nu3*nu7*nu8/kappa1"),
        ("nu4", "q*nu4*nu7*nu8/kappa1"),
        ("nu5", "kappa2/nu6"),
        ("nu6", "kappa2/nu5"),
        ("nu7", "q*nu3*nu4*nu7/kappa1"),
        ("nu8", "q*nu3*nu4*nu8/kappa1"),
        ("kappa1", "q*nu3*nu4*nu7*nu8/kappa1"),
        ("kappa2", "q*kappa2^3/(nu1*nu2*nu5*nu6)"),
        ("f", "q*nu3*nu4*nu7*nu8/(kappa1*f)*(g - nu5/kappa2)*(g - nu6/kappa2)/((g - 1/nu1)*(g - 1/nu2))"),
    ]));

    let e6 = family(FamilyName::E6);
    let s = WeylWord::parse("pi1 pi2 s4 s5 s3 s6 s4 s3 s0 s6").unwrap();
    let e6_bracket = "g + f*(g - 1/nu1)*(g - 1/nu2)*(g - 1/nu3)*(g - 1/nu4)/((1 - f*g)*(g - nu5/kappa2)*(g - nu6/kappa2))";
    reports.push(fixture_report(&e6, "s", &s, &[
        ("nu1", "kappa2/nu4"),
        ("nu2", "kappa2/nu3"),
        ("nu3", "kappa2/nu2"),
        ("nu4", "kappa2/nu1"),
        ("nu5", "nu8"),
        ("nu6", "nu7"),
        ("nu7", "kappa2/nu5"),
        ("nu8", "kappa2/nu6"),
        ("kappa1", "kappa2"),
        ("kappa2", "kappa1*kappa2^3/(nu1*nu2*nu3*nu4*nu5*nu6)"),
        ("f", "kappa2*g"),
    ]));
    reports.last_mut().unwrap().push(fixture_identity(&e6, "1/(kappa2 s(g))", &s, |t| {
        let lhs = Expr::one().checked_div(&(p("kappa2") * t.image(Symbol::G))).unwrap();
        (lhs, p(e6_bracket))
    }));
    reports.push(fixture_report(&e6, "s^2", &s.repeat(2), &[
        ("nu1", "q*nu1*nu7*nu8/kappa1"),
        ("nu2", "q*nu2*nu7*nu8/kappa1"),
        ("nu3", "q*nu3*nu7*nu8/kappa1"),
        ("nu4", "q*nu4*nu7*nu8/kappa1"),
        ("nu5", "kappa2/nu6"),
        ("nu6", "kappa2/nu5"),
        ("nu7", "q*nu7*kappa2/kappa1"),
        ("nu8", "q*nu8*kappa2/kappa1"),
        ("kappa1", "q*nu7*nu8*kappa2/kappa1"),
        ("kappa2", "q^2*nu7*nu8*kappa2^2/(nu5*nu6*kappa1)"),
        ("1/f", &format!("kappa1/(q*nu7*nu8)*({e6_bracket})")),
    ]));

    let e7 = family(FamilyName::E7);
    let s = e7.evolution_word.clone();
    let mut rows: Vec<(String, String)> = (1..=8).map(|i| (format!("nu{i}"), format!("kappa2/nu{}", 9 - i))).collect();
    rows.push(("kappa1".into(), "kappa2".into()));
    rows.push(("kappa2".into(), "q*kappa2^2/kappa1".into()));
    rows.push(("f".into(), "1/g".into()));
    let rows_ref: Vec<(&str, &str)> = rows.iter().map(|(a, b)| (a.as_str(), b.as_str())).collect();
    let mut e7_report = fixture_report(&e7, "s", &s, &rows_ref);
    e7_report.push(fixture_identity(&e7, "s(g) relation", &s, |t| {
        let sg = t.image(Symbol::G);
        let ratio = &sg / &p("g");
        let lhs = (&ratio - &p("kappa1/(q*kappa2)")) * p("f*g - 1") / ((&ratio - &Expr::one()) * p("f*g - kappa1/kappa2"));
        let rhs = p("kappa1/(q*kappa2)*(g - 1/nu1)*(g - 1/nu2)*(g - 1/nu3)*(g - 1/nu4)/((g - nu5/kappa2)*(g - nu6/kappa2)*(g - nu7/kappa2)*(g - nu8/kappa2))");
        (lhs, rhs)
    }));
    reports.push(e7_report);
    let mut rows: Vec<(String, String)> = (1..=8).map(|j| (format!("nu{j}"), format!("q*nu{j}*kappa2/kappa1"))).collect();
    rows.push(("kappa1".into(), "q*kappa2^2/kappa1".into()));
    rows.push(("kappa2".into(), "q^3*kappa2^3/kappa1^2".into()));
    let rows_ref: Vec<(&str, &str)> = rows.iter().map(|(a, b)| (a.as_str(), b.as_str())).collect();
    reports.push(fixture_report(&e7, "s^2", &s.repeat(2), &rows_ref));

    summarize(&reports)
}

fn theorem_i() -> Outcome {
    let reports: Vec<Report> = FamilyName::ALL.iter().map(|f| verify_theorem_i(&family(*f), &cfg())).collect();
    let mut o = summarize(&reports);
    let exact = reports[0].records.iter().any(|r| r.id.starts_with("T(f) =") && r.detail.as_deref() == Some("exact"));
    if !exact {
        o.pass = false;
        o.note += ", D5 T(f) residual not exact-proved";
    } else {
        o.note += ", D5 T(f) exact";
    }
    o
}

fn theorem_ii() -> Outcome {
    let reports: Vec<Report> = FamilyName::ALL.iter().map(|f| verify_theorem_ii(&family(*f), &cfg())).collect();
    let mut o = summarize(&reports);
    // the printed scale factors, against the map that satisfies (i)
    for f in [FamilyName::D5, FamilyName::E6] {
        let fam = family(f);
        let printed = printed_xi_factorization(f).expect("printed factorization");
        let r = verify_theorem_ii_for(&fam, &fam.xi, &printed, &cfg());
        o.note += &format!("; printed {f} factor fails {} of {}", r.failures().count(), r.records.len());
    }
    o
}

fn gauge_claims() -> Outcome {
    let reports: Vec<Report> = FamilyName::ALL.iter().map(|f| verify_gauge_claims(&family(*f), &cfg())).collect();
    let mut o = summarize(&reports);
    let double = reports[0].get("d5.s2s1s0s2 = two single gauges").is_some_and(CheckRecord::passed);
    if !double {
        o.pass = false;
        o.note += ", double gauge differs from two single gauges";
    }
    o
}

fn constraint_discovery() -> Outcome {
    let e6 = family(FamilyName::E6);
    let e7 = family(FamilyName::E7);
    let mut notes = Vec::new();
    let dual = identities_equal(
        &p("kappa1*kappa2^3/(nu1*nu2*nu3*nu4*nu5*nu6)"),
        &p("q*nu7*nu8*kappa2/kappa1"),
        e6.constraint(),
        &cfg(),
    );
    let s = word_to_transform(&e7, &e7.evolution_word).unwrap();
    let claim = identities_equal(&s.image(Symbol::KAPPA2), &p("q*kappa2^2/kappa1"), e7.constraint(), &cfg());
    let mut pass = true;
    for (name, v) in [("E6 dual expression", dual), ("E7 s(kappa2)", claim)] {
        match v {
            Ok(Verdict::Unequal(w)) => notes.push(format!("{name} refuted at {w}")),
            Ok(_) => notes.push(format!("{name} confirmed")),
            Err(e) => {
                pass = false;
                notes.push(format!("{name}: {e}"));
            }
        }
    }
    outcome(pass, notes.join(", "))
}

fn random_d5_state(rng: &mut ChaCha8Rng) -> OrbitState {
    let mut q = || -> BigRational {
        let n: i64 = rng.gen_range(1..=9);
        let d: i64 = rng.gen_range(1..=5);
        BigRational::new(n.into(), d.into())
    };
    loop {
        let qv = q();
        if qv == BigRational::from_integer(1.into()) {
            continue;
        }
        let nu = std::array::from_fn(|_| q());
        return OrbitState::new(qv, nu, q(), q(), q(), q()).unwrap();
    }
}

fn orbit_cross_check() -> Outcome {
    let start = Instant::now();
    let fam = family(FamilyName::D5);
    let t = time_evolution(&fam).unwrap();
    let stepper = Stepper::new(&fam);
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let mut done = 0;
    let mut skipped = 0;
    while done < 10 {
        let st = random_d5_state(&mut rng);
        let o = stepper.orbit(&st, 20);
        if o.pole.is_some() {
            skipped += 1;
            continue;
        }
        for w in o.states.windows(2) {
            match apply_at(&t, &w[0]) {
                Ok(x) if x == w[1] => {}
                _ => return outcome(false, format!("step map disagrees with T at t={}", w[0].t)),
            }
            if !w[1].constraint_residual().is_zero() {
                return outcome(false, format!("constraint residual nonzero at t={}", w[1].t));
            }
        }
        let back = stepper.walk(o.states.last().unwrap(), 20, Direction::Backward);
        if back.states.last() != Some(&st) {
            return outcome(false, "backward iteration does not return to the start");
        }
        done += 1;
    }
    let t = start.elapsed();
    let pass = t < Duration::from_secs(30);
    outcome(pass, format!("10 orbits x 20 steps ({skipped} hit poles and were redrawn), {:.2}s", t.as_secs_f64()))
}


/// `(family, generator, symbol, mutated image)`; `@` stands for the original image.
const MUTATIONS: [(FamilyName, &str, &str, &str); 12] = [
    (FamilyName::D5, "s1", "nu1", "2*@"),
    (FamilyName::D5, "s2", "f", "q*@"),
    (FamilyName::D5, "pi1", "g", "@ + 1"),
    (FamilyName::D5, "s3", "kappa2", "nu1*@"),
    (FamilyName::D5, "s0", "nu3", "@/nu4"),
    (FamilyName::E6, "s6", "nu1", "@/q"),
    (FamilyName::E6, "pi2", "f", "2*@"),
    (FamilyName::E6, "s2", "g", "@ - nu1"),
    (FamilyName::E7, "s0", "g", "@ + 1"),
    (FamilyName::E7, "s4", "nu1", "1/@"),
    (FamilyName::E7, "pi", "nu3", "nu4"),
    (FamilyName::E7, "s7", "kappa2", "q*@"),
];

fn mutated(f: FamilyName, gen: &str, sym: &str, template: &str) -> FamilyDescriptor {
    let fam = family(f);
    let s = Symbol::lookup(sym).unwrap();
    let old = fam.generator(gen).unwrap().image(s);
    let src = template.replace('@', &format!("({old})"));
    fam.with_override(gen, s, p(&src)).unwrap()
}

fn mutation_sensitivity() -> Outcome {
    let mut missed = Vec::new();
    for (f, gen, sym, template) in MUTATIONS {
        let fam = mutated(f, gen, sym, template);
        let caught = [
            verify_relations(&fam, &cfg()),
            verify_theorem_i(&fam, &cfg()),
            verify_theorem_ii(&fam, &cfg()),
            verify_gauge_claims(&fam, &cfg()),
        ]
        .iter()
        .any(|r| r.records.iter().any(|x| x.status == Status::Fail && x.witness.is_some()));
        if !caught {
            missed.push(format!("{f} {gen}({sym})"));
        }
    }
    if missed.is_empty() {
        outcome(true, format!("{} mutations caught", MUTATIONS.len()))
    } else {
        outcome(false, format!("not caught: {}", missed.join(", ")))
    }
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 8] = [
        ("relation suites", relations),
        ("proof fixtures", proof_fixtures),
        ("time evolution theorem (i)", theorem_i),
        ("adjustment map factorization (ii)", theorem_ii),
        ("gauge claims", gauge_claims),
        ("constraint discovery", constraint_discovery),
        ("orbit cross-check", orbit_cross_check),
        ("mutation sensitivity", mutation_sensitivity),
    ];
    let mut all = true;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let o = run();
        all &= o.pass;
        println!("criterion {} {:<36} {}  ({})", i + 1, name, if o.pass { "PASS" } else { "FAIL" }, o.note);
    }
    if all {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
