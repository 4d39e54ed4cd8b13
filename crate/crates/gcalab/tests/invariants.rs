use std::sync::{Arc, OnceLock};

use proptest::prelude::*;

use gcalab::abelian::Laurent;
use gcalab::corpus::generate_corpus;
use gcalab::decompose::{explicit_decomposition, replay, DecomposeOptions};
use gcalab::gca::{LocalRule, PeriodicConfiguration};
use gcalab::group::library::*;
use gcalab::group::{center, commutator_subgroup, invariantly_simple_factorization, Elem, FiniteGroup};
use gcalab::io::tree_to_json;
use gcalab::oracle::{debruijn_injective, debruijn_surjective, radius_growth_profile, simulate};
use gcalab::properties::{entropy, full_report, EngineOptions, EntropyValue, PropertyReport};
use gcalab::verdict::Truth;

fn pool() -> &'static [(String, LocalRule)] {
    static POOL: OnceLock<Vec<(String, LocalRule)>> = OnceLock::new();
    POOL.get_or_init(|| generate_corpus(0xC0FFEE, 12))
}

fn rule_and_config() -> impl Strategy<Value = (LocalRule, Vec<Elem>)> {
    (0..pool().len(), prop::collection::vec(any::<u32>(), 1..=12)).prop_map(|(i, raw)| {
        let r = pool()[i].1.clone();
        let q = r.group().order() as u32;
        (r, raw.into_iter().map(|x| x % q).collect())
    })
}

fn any_rule() -> impl Strategy<Value = LocalRule> {
    (0..pool().len()).prop_map(|i| pool()[i].1.clone())
}

fn truth() -> impl Strategy<Value = Truth> {
    prop_oneof![Just(Truth::True), Just(Truth::False), Just(Truth::Unknown)]
}

fn laurent(p: u32) -> impl Strategy<Value = Laurent> {
    prop::collection::vec((0..p, -3i64..=3), 0..4).prop_map(move |terms| {
        terms.into_iter().fold(Laurent::zero(p), |acc, (c, e)| acc.add(&Laurent::monomial(p, c, e)))
    })
}

fn fast() -> EngineOptions {
    EngineOptions { cross_check: false, ..EngineOptions::default() }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn semigroup_law((r, cells) in rule_and_config(), n in 0usize..=8) {
        let c = PeriodicConfiguration::new(cells);
        let mut iter = c.clone();
        for _ in 0..n {
            iter = r.apply(&iter);
        }
        prop_assert_eq!(r.power(n).apply(&c), iter);
    }

    #[test]
    fn power_radius_is_at_most_linear(r in any_rule(), n in 0usize..=8) {
        prop_assert!(r.power(n).radius() <= n * r.radius());
    }

    #[test]
    fn simulated_rows_match_powers((r, cells) in rule_and_config(), n in 1usize..=6) {
        let c = PeriodicConfiguration::new(cells);
        let long = simulate(&r, &c, n + 1);
        let once = simulate(&r.power(n), &c, 2);
        prop_assert_eq!(&long.cells[n], &once.cells[1]);
    }

    #[test]
    fn quotient_by_commutator_commutes_with_apply((r, cells) in rule_and_config()) {
        let g = r.group();
        let h = commutator_subgroup(g);
        let (rq, q) = r.quotient_gca(&h).unwrap();
        let project = |cs: &[Elem]| cs.iter().map(|&x| q.coset_of[x as usize]).collect::<Vec<_>>();
        prop_assert_eq!(project(&r.apply_cells(&cells)), rq.apply_cells(&project(&cells)));

        let members = h.members();
        let sub: Vec<Elem> = cells.iter().map(|&x| members[x as usize % members.len()]).collect();
        let pos = |x: Elem| members.iter().position(|&m| m == x).unwrap() as Elem;
        let rh = r.restrict(&h).unwrap();
        let local: Vec<Elem> = sub.iter().map(|&x| pos(x)).collect();
        let image: Vec<Elem> = r.apply_cells(&sub).into_iter().map(pos).collect();
        prop_assert_eq!(image, rh.apply_cells(&local));
    }

    #[test]
    fn surjective_rules_preserve_the_center(r in any_rule()) {
        if full_report(&r, &fast()).surjective.is_true() {
            prop_assert!(r.preserves_center());
            prop_assert!(r.images_normal());
            let z = center(r.group());
            prop_assert!(r.quotient_gca(&z).is_ok());
        }
    }

    #[test]
    fn decomposition_invariants(r in any_rule()) {
        let opts = DecomposeOptions::default();
        let t = explicit_decomposition(&r, &opts).unwrap();
        prop_assert_eq!(t.leaf_orders().iter().product::<usize>(), r.group().order());
        for leaf in &t.leaves {
            prop_assert_eq!(&replay(&r, &leaf.ancestry).unwrap(), &leaf.gca);
            if leaf.gca.group().order() > 1 {
                prop_assert!(invariantly_simple_factorization(leaf.gca.group()).is_some());
            }
        }
        let again = explicit_decomposition(&r, &opts).unwrap();
        prop_assert_eq!(
            serde_json::to_string(&tree_to_json(&t)).unwrap(),
            serde_json::to_string(&tree_to_json(&again)).unwrap()
        );
    }

    #[test]
    fn engine_matches_oracle(r in any_rule()) {
        let rep = full_report(&r, &fast());
        if let Ok(s) = debruijn_surjective(&r, 1 << 16) {
            prop_assert_eq!(rep.surjective.value, Truth::from_bool(s));
        }
        if let Ok(i) = debruijn_injective(&r, 1 << 16) {
            prop_assert_eq!(rep.injective.value, Truth::from_bool(i));
        }
    }

    #[test]
    fn sensitivity_matches_radius_profile(r in any_rule()) {
        let rep = full_report(&r, &fast());
        let p = radius_growth_profile(&r, 64);
        match rep.sensitive.value {
            Truth::True => prop_assert!(p.exceeds(16).is_some()),
            Truth::False => {
                prop_assert!(p.repeat.is_some());
                prop_assert!(p.max_radius() <= 16);
            }
            Truth::Unknown => {}
        }
    }

    #[test]
    fn reports_are_consistent_and_round_trip(r in any_rule()) {
        let rep = full_report(&r, &fast());
        prop_assert_eq!(rep.consistency_violations(r.group().order() == 1), Vec::<String>::new());
        let back: PropertyReport = serde_json::from_str(&serde_json::to_string(&rep).unwrap()).unwrap();
        prop_assert_eq!(back, rep);
    }

    #[test]
    fn kleene_de_morgan(a in truth(), b in truth()) {
        prop_assert_eq!(a.and(b).not(), a.not().or(b.not()));
        prop_assert_eq!(a.or(b).not(), a.not().and(b.not()));
        prop_assert_eq!(a.and(b), b.and(a));
    }

    #[test]
    fn laurent_ring_laws(a in laurent(3), b in laurent(3), c in laurent(3)) {
        prop_assert_eq!(a.mul(&b), b.mul(&a));
        prop_assert_eq!(a.mul(&b).mul(&c), a.mul(&b.mul(&c)));
        prop_assert_eq!(a.mul(&b.add(&c)), a.mul(&b).add(&a.mul(&c)));
        prop_assert!(a.sub(&a).is_zero());
        if !a.is_zero() && !b.is_zero() {
            prop_assert_eq!(a.mul(&b).spread(), a.spread() + b.spread());
            prop_assert_eq!(a.mul(&b).is_monomial(), a.is_monomial() && b.is_monomial());
        }
    }

    #[test]
    fn entropy_values_compare_canonically(bases in prop::collection::vec(2u64..40, 0..5)) {
        let mut product = 1u64;
        let mut sum = EntropyValue::zero();
        for &b in &bases {
            product *= b;
            sum.add(&EntropyValue::log(b));
        }
        prop_assert!(sum.same_value(&EntropyValue::log(product)));
        let back: EntropyValue = serde_json::from_value(serde_json::to_value(&sum).unwrap()).unwrap();
        prop_assert_eq!(back, sum);
    }
}

fn corpus_groups() -> Vec<FiniteGroup> {
    vec![cyclic(2), cyclic(3), cyclic(4), cyclic(6), klein_four(), symmetric(3), dihedral(4), quaternion(), symmetric(4)]
}

#[test]
fn shift_entropy_is_offset_times_log_order() {
    for g in corpus_groups().into_iter().chain([alternating(5)]) {
        let g = Arc::new(g);
        for r in -3i64..=3 {
            let e = entropy(&LocalRule::shift(g.clone(), r), &fast());
            let mut expect = EntropyValue::zero();
            expect.add_term(num_rational::Ratio::from_integer(r.abs()), g.order() as u64);
            assert!(e.same_value(&expect), "σ^{r} on order {}: {e}", g.order());
        }
    }
}
