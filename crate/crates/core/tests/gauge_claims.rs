use proptest::prelude::*;
use qpainleve::lax::{claim, claim_equations, claims_for, verify_gauge_claims, CLAIM_IDS};
use qpainleve::*;

fn cfg() -> IdentityConfig {
    IdentityConfig::default()
}

fn p(s: &str) -> Expr {
    parse(s).unwrap()
}

#[test]
fn all_claims_hold_mod_constraint() {
    let mut seen = 0;
    for f in FamilyName::ALL {
        let report = verify_gauge_claims(&family(f), &cfg());
        assert!(report.all_pass(), "{}", report.to_text());
        seen += claims_for(f).len();
    }
    assert_eq!(seen, CLAIM_IDS.len());
}

#[test]
fn which_claims_use_the_constraint() {
    let mut needs = Vec::new();
    for f in FamilyName::ALL {
        let bare = family(f).without_constraint();
        for r in verify_gauge_claims(&bare, &cfg()).records {
            if !r.passed() {
                needs.push(r.id);
            }
        }
    }
    assert_eq!(needs, vec!["d5.s2", "d5.s2s1s0s2", "d5.inversion", "e6.s6", "e7.s0s4s0"]);
}

#[test]
fn wrong_target_is_detected() {
    let fam = family(FamilyName::D5);
    let mut cl = claim("d5.s2").unwrap();
    cl.target = lax::ClaimTarget::Word(WeylWord::parse("s3").unwrap());
    let (a, b) = claim_equations(&fam, &cl).unwrap();
    let v = equations_equivalent(&a, &b, fam.constraint(), &cfg()).unwrap();
    assert!(v.witness().is_some());
}

#[test]
fn claims_are_bound_to_their_family() {
    let e6 = family(FamilyName::E6);
    assert!(lax::verify_gauge_claim(&e6, "d5.s2", &cfg()).is_err());
}

fn scale_factor() -> impl Strategy<Value = Expr> {
    prop::sample::select(vec!["2", "q", "kappa1/nu3", "nu5*nu6/kappa2", "c", "-3/7"]).prop_map(p)
}

fn l1_strategy() -> impl Strategy<Value = LinearQDE> {
    prop::sample::select(FamilyName::ALL.to_vec()).prop_map(build_l1)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn pochhammer_pairs_cancel(
        eq in l1_strategy(),
        a in prop::sample::select(vec!["nu1", "nu4", "kappa1/nu7", "q*nu2"]),
        b in prop::sample::select(vec!["nu3", "kappa1/nu5", "kappa2", "nu8/q"]),
    ) {
        let (a, b) = (p(a), p(b));
        let there = apply_gauge(&eq, &GaugeSpec::pochhammer(a.clone(), b.clone())).unwrap();
        let back = apply_gauge(&there, &GaugeSpec::pochhammer(b, a)).unwrap();
        prop_assert!(equations_equivalent(&back, &eq, None, &cfg()).unwrap().holds());
    }

    #[test]
    fn dilations_cancel(eq in l1_strategy(), c in scale_factor()) {
        let there = apply_gauge(&eq, &GaugeSpec::Dilation(c.clone())).unwrap();
        let renamed = there.with_shift(Symbol::Z).unwrap();
        let back = apply_gauge(&renamed, &GaugeSpec::Dilation(c.recip().unwrap())).unwrap();
        prop_assert!(equations_equivalent(&back, &eq.with_shift(Symbol::U).unwrap(), None, &cfg()).unwrap().holds());
    }

    #[test]
    fn inversions_cancel(eq in l1_strategy(), c in scale_factor(), d in scale_factor()) {
        let g = GaugeSpec::Inversion { c, delta: d };
        let once = apply_gauge(&eq, &g).unwrap().with_shift(Symbol::Z).unwrap();
        let twice = apply_gauge(&once, &g).unwrap();
        prop_assert!(equations_equivalent(&twice, &eq.with_shift(Symbol::U).unwrap(), None, &cfg()).unwrap().holds());
    }

    #[test]
    fn equivalence_is_an_equivalence(eq in l1_strategy(), a in scale_factor(), b in scale_factor()) {
        let x = eq.scale(&a);
        let y = eq.scale(&b);
        let holds = |l: &LinearQDE, r: &LinearQDE| equations_equivalent(l, r, None, &cfg()).unwrap().holds();
        prop_assert!(holds(&eq, &eq));
        prop_assert!(holds(&x, &y) && holds(&y, &x));
        prop_assert!(holds(&eq, &x) && holds(&x, &y) && holds(&eq, &y));
        let shifted = apply_gauge(&eq, &GaugeSpec::Power(p("2"))).unwrap().scale(&a);
        prop_assert_eq!(holds(&x, &shifted), holds(&shifted, &x));
        prop_assert!(!holds(&x, &shifted));
    }
}
