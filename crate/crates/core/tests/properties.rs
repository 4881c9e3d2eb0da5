mod common;

use common::{
    brute_force_extremes, distinguishing_word, exhaustive_paths, minimal_states, random_dfa,
    random_mdp, rng,
};
use proptest::prelude::*;
use rand::Rng;
use supsyn::agr::{
    compositional_check, initial_partition, is_stable, signature_class, unstable_blocks,
};
use supsyn::counterexample::{PathEnumerator, Polarity};
use supsyn::io::{parse_model, serialize_model, ModelFile};
use supsyn::lstar::LStar;
use supsyn::model::{parallel_compose, supervised_compose, Dtmc, Mdp};
use supsyn::pctl::{check, parse_formula, sat, BoundedFormula};
use supsyn::synthesis::{spvsyn, ActionOwnership, Agent, SynthesisOptions};

fn until(bound: &str, k: usize) -> BoundedFormula {
    parse_formula(&format!(r#"P<={bound} [ !"h" U<={k} "g" ]"#)).unwrap()
}

fn keep_hit(m: &Mdp<f64>, f: &BoundedFormula) -> (Vec<bool>, Vec<bool>) {
    (sat(m, &f.lhs()), sat(m, f.target()))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn value_iteration_matches_every_scheduler(seed in any::<u64>(), n in 1usize..=4, acts in 1usize..=2, k in 0usize..=3) {
        let mut r = rng(seed);
        let m = random_mdp(&mut r, n, &["a", "b"][..acts], "g");
        let f = until("0.5", k);
        let v = check(&m, &f).unwrap();
        let (keep, hit) = keep_hit(&m, &f);
        let (hi, lo) = brute_force_extremes(&m, &keep, &hit, k);
        prop_assert!((v.pmax - hi).abs() <= 1e-12, "{} vs {}", v.pmax, hi);
        prop_assert!((v.pmin - lo).abs() <= 1e-12, "{} vs {}", v.pmin, lo);
    }

    #[test]
    fn enumeration_order_matches_sorting(seed in any::<u64>(), n in 1usize..=6, k in 0usize..=4) {
        let mut r = rng(seed);
        let m = random_mdp(&mut r, n, &["a"], "g");
        let chain = Dtmc::from_mdp(&m).unwrap();
        let f = until("0.5", k);
        let keep: Vec<bool> = (0..chain.num_nodes()).map(|i| f.lhs().eval(chain.labels(i))).collect();
        let hit: Vec<bool> = (0..chain.num_nodes()).map(|i| f.target().eval(chain.labels(i))).collect();
        let expected = exhaustive_paths(&chain, &keep, &hit, k);
        let got: Vec<(f64, Vec<usize>)> = PathEnumerator::for_formula(&chain, &f)
            .map(|p| (p.probability, p.nodes))
            .collect();
        prop_assert_eq!(got, expected);
    }

    #[test]
    fn lstar_learns_minimal_equivalent_automata(seed in any::<u64>(), n in 1usize..=4, sigma in 1usize..=4) {
        let mut r = rng(seed);
        let target = random_dfa(&mut r, n, sigma);
        let mut teacher = |w: &[usize]| target.accepts(w);
        let mut learner = LStar::new((0..sigma).collect::<Vec<_>>(), &mut teacher);
        let mut longest = 1usize;
        let learned = learner
            .learn(
                &mut teacher,
                |c| {
                    distinguishing_word(c, &target).map(|w| {
                        longest = longest.max(w.len());
                        let polarity = if target.accepts(&w) { Polarity::Positive } else { Polarity::Negative };
                        (w, polarity)
                    })
                },
                64,
            )
            .unwrap();
        prop_assert_eq!(distinguishing_word(&learned, &target), None);
        let minimal = minimal_states(&target);
        prop_assert_eq!(learned.num_states(), minimal);
        let nf = minimal as f64;
        let bound = 5.0 * (sigma as f64 * nf * nf + nf * (longest.max(2) as f64).log2());
        prop_assert!((learner.queries() as f64) <= bound, "{} queries > {}", learner.queries(), bound);
    }

    #[test]
    fn compositional_verdicts_match_the_product(seed in any::<u64>(), n1 in 1usize..=4, n2 in 1usize..=4, k in 1usize..=3) {
        let mut r = rng(seed);
        let m1 = random_mdp(&mut r, n1, &["a", "b"], "x");
        let m2 = random_mdp(&mut r, n2, &["b", "c"], "g");
        let bound = ["0.1", "0.3", "0.5", "0.8"][r.gen_range(0..4)];
        let f = parse_formula(&format!(r#"P<={bound} [ true U<={k} "g" ]"#)).unwrap();
        let product = parallel_compose(&m1, &m2).unwrap().mdp;
        let mono = check(&product, &f).unwrap();
        let comp = compositional_check(&m1, &m2, &f).unwrap();
        prop_assert_eq!(comp.holds, mono.holds);
        for round in &comp.rounds {
            prop_assert!(round.abstract_pmax + 1e-12 >= mono.pmax, "abstraction under-approximates");
        }
        if let Some(w) = comp.counterexample {
            let p = w.probability_in(&m1, &m2);
            prop_assert!(p > 0.0);
            prop_assert!((p - w.probability).abs() < 1e-12);
        }
    }

    #[test]
    fn splitting_an_unstable_block_adds_one_block(seed in any::<u64>(), n in 2usize..=5) {
        let mut r = rng(seed);
        let m = random_mdp(&mut r, n, &["a", "b"], "g");
        let f = until("0.5", 2);
        let mut p = initial_partition(&m, &f);
        while !is_stable(&m, &p) {
            let b = unstable_blocks(&m, &p)[0];
            let next = p.split(b, &signature_class(&m, &p, b)).unwrap();
            prop_assert_eq!(next.num_blocks(), p.num_blocks() + 1);
            prop_assert!(next.refines(&p));
            p = next;
        }
        prop_assert!(p.num_blocks() <= m.num_states());
    }

    #[test]
    fn model_files_round_trip(seed in any::<u64>(), n in 1usize..=5) {
        let mut r = rng(seed);
        let file = ModelFile {
            agents: vec![Agent { name: "x".into(), mdp: random_mdp(&mut r, n, &["a", "b"], "g") }],
            ownership: ActionOwnership::all_normal(1),
        };
        let text = serialize_model(&file);
        let back: ModelFile<f64> = parse_model(&text).unwrap();
        prop_assert_eq!(&back.agents[0].mdp, &file.agents[0].mdp);
        prop_assert_eq!(serialize_model(&back), text);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn synthesis_is_sound_monotone_and_bounded(seed in any::<u64>(), n in 2usize..=4, k in 1usize..=3) {
        let mut r = rng(seed);
        let m = random_mdp(&mut r, n, &["a", "b"], "g");
        let bound = ["0.2", "0.4", "0.6"][r.gen_range(0..3)];
        let f = until(bound, k);
        let run = spvsyn(&m, &f, &SynthesisOptions::default()).unwrap();
        let rep = &run.report;
        prop_assert!(rep.is_monotone());
        prop_assert!((rep.iterations as f64) <= rep.iteration_bound);
        match run.termination() {
            supsyn::synthesis::Termination::Infeasible => prop_assert!(check(&m, &f).unwrap().infeasible()),
            _ => {
                let sup = supervised_compose(&m, run.supervisor()).unwrap();
                prop_assert!(check(&sup.mdp, &f).unwrap().holds);
            }
        }
        for (i, sups) in run.history.iter().enumerate() {
            for neg in run.negatives[0].iter().take(i + 1) {
                prop_assert!(!sups[0].accepts_symbols(neg));
            }
        }
    }
}

#[test]
fn every_abstraction_round_grows_the_partition() {
    let m2 = common::counter(5);
    let m1 = common::shuttle();
    let f = parse_formula(r#"P<=0.3 [ true U<=4 "failure" ]"#).unwrap();
    let comp = compositional_check(&m1, &m2, &f).unwrap();
    let sizes: Vec<usize> = comp
        .rounds
        .iter()
        .map(|r| r.partition.num_blocks())
        .collect();
    assert!(sizes.windows(2).all(|w| w[1] > w[0]));
}
