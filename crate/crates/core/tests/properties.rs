//! Property tests over seeded random instances.

use proptest::prelude::*;

use tdatalog::chase::{check_k_model, run_chase, StrategyConfig};
use tdatalog::degrees::TruthDegree;
use tdatalog::lang::{parse_dataset, parse_program};
use tdatalog::model::minimal_interpretation;
use tdatalog::oracle::gen::{datalog_instance, stratified_instance, weakly_acyclic_instance};
use tdatalog::oracle::{differential_check, Caps};
use tdatalog::reason::{entails, EntailOptions, EntailmentQuery};

fn degree(tenths: u32) -> TruthDegree {
    TruthDegree::new(tenths as f64 / 10.0).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn texts_round_trip(seed in any::<u64>(), existentials in any::<bool>()) {
        let inst = weakly_acyclic_instance(seed, existentials, false);
        prop_assert_eq!(parse_program(&inst.program_text()).unwrap(), inst.program.clone());
        prop_assert_eq!(parse_dataset(&inst.dataset_text()).unwrap(), inst.dataset.clone());
        let strat = stratified_instance(seed);
        prop_assert_eq!(parse_program(&strat.program_text()).unwrap(), strat.program);
    }

    #[test]
    fn lower_k_gives_a_smaller_model(seed in any::<u64>(), k in 0u32..=10) {
        let inst = weakly_acyclic_instance(seed, seed % 2 == 0, false);
        let k = degree(k);
        let full = run_chase(&inst.program, &inst.dataset, StrategyConfig::default()).unwrap();
        let low = run_chase(&inst.program, &inst.dataset, StrategyConfig::default().with_k(k)).unwrap();
        prop_assert!(check_k_model(&low.interpretation, &inst.program, k));
        prop_assert!(low.interpretation.dominates(&minimal_interpretation(&inst.dataset)));
        // Compare degrees of null-free atoms; null names are shared.
        for (atom, d) in low.interpretation.constant_part() {
            prop_assert!(full.get(&atom) >= d, "{} at K = {}", atom, k);
        }
    }

    #[test]
    fn entailment_is_antitone_in_c(seed in any::<u64>(), lo in 0u32..=10, hi in 0u32..=10) {
        let (lo, hi) = (lo.min(hi), lo.max(hi));
        let inst = datalog_instance(seed);
        let res = run_chase(&inst.program, &inst.dataset, StrategyConfig::default()).unwrap();
        for (goal, _) in res.interpretation.entries().into_iter().take(5) {
            let ask = |c| {
                let q = EntailmentQuery::new(goal.clone(), degree(c));
                entails(&inst.program, &inst.dataset, &q, &EntailOptions::default()).unwrap().answer
            };
            prop_assert!(!ask(hi) || ask(lo), "{} at c = {} but not at {}", goal, hi, lo);
        }
    }

    #[test]
    fn runs_are_reproducible(seed in any::<u64>()) {
        let inst = weakly_acyclic_instance(seed, true, false);
        for name in ["so-greedy", "r-greedy", "so-fifo", "r-fifo"] {
            let cfg: StrategyConfig = name.parse().unwrap();
            let a = run_chase(&inst.program, &inst.dataset, cfg.clone()).unwrap();
            let b = run_chase(&inst.program, &inst.dataset, cfg).unwrap();
            prop_assert_eq!(a.trace_json_lines(), b.trace_json_lines());
            prop_assert_eq!(a.interpretation, b.interpretation);
        }
    }

    #[test]
    fn differential_checks_pass(seed in any::<u64>()) {
        for inst in [
            datalog_instance(seed),
            weakly_acyclic_instance(seed, true, false),
            weakly_acyclic_instance(seed, true, true),
            stratified_instance(seed),
        ] {
            let r = differential_check(&format!("seed {seed}"), &inst.program, &inst.dataset, &Caps::TINY);
            prop_assert!(r.passed(), "{}", r);
        }
    }
}
