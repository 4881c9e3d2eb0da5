mod common;

use std::collections::BTreeSet;

use common::{counter, shuttle};
use supsyn::agr::{
    build_quotient, compositional_check, initial_partition, realize, refine, AbstractCe,
    AbstractStep, Realization,
};
use supsyn::model::{parallel_compose, StateId};
use supsyn::pctl::{check, parse_formula};

fn blocks_by_name(
    m: &supsyn::model::Mdp<f64>,
    p: &supsyn::agr::Partition,
) -> BTreeSet<BTreeSet<String>> {
    p.blocks()
        .iter()
        .map(|b| b.iter().map(|s| m.state_name(*s).to_string()).collect())
        .collect()
}

fn set(names: &[&str]) -> BTreeSet<String> {
    names.iter().map(|s| s.to_string()).collect()
}

#[test]
fn first_quotient_has_three_blocks() {
    let m2 = counter(5);
    let f = parse_formula(r#"P<=0.3 [ true U<=4 "failure" ]"#).unwrap();
    let p = initial_partition(&m2, &f);
    assert_eq!(
        blocks_by_name(&m2, &p),
        BTreeSet::from([
            set(&["<0>"]),
            set(&["<1>", "<2>", "<3>", "<4>"]),
            set(&["<4,bad>"])
        ])
    );
    let q = build_quotient(&m2, &p);
    let a = m2.action_by_name("a").unwrap();
    let middle = p.block_of(m2.state_by_name("<1>").unwrap());
    let bad = p.block_of(m2.state_by_name("<4,bad>").unwrap());
    let lifted = q.distributions(middle, a);
    assert_eq!(lifted.len(), 2);
    assert_eq!(lifted[0].prob(StateId(middle)), 1.0);
    assert_eq!(lifted[1].prob(StateId(bad)), 0.1);
}

#[test]
fn hand_counterexample_through_the_counter_is_spurious() {
    let (m1, m2) = (shuttle(), counter(5));
    let f = parse_formula(r#"P<=0.3 [ true U<=4 "failure" ]"#).unwrap();
    let p = initial_partition(&m2, &f);
    let b = |n: &str| p.block_of(m2.state_by_name(n).unwrap());
    let s = |n: &str| m1.state_by_name(n).unwrap();
    let ce = AbstractCe {
        steps: vec![
            AbstractStep {
                m1: s("s0"),
                block: b("<0>"),
                action: "a".into(),
                choice: 0,
            },
            AbstractStep {
                m1: s("s1"),
                block: b("<1>"),
                action: "a".into(),
                choice: 1,
            },
        ],
        last: (s("s0"), b("<4,bad>")),
        probability: 0.09,
    };
    let r = realize(&m1, &m2, &p, &ce).unwrap();
    assert_eq!(
        r,
        Realization::Spurious {
            step: 1,
            block: b("<1>")
        }
    );
    let refined = refine(&p, 1, b("<1>"), &ce, &m2).unwrap();
    assert_eq!(
        blocks_by_name(&m2, &refined),
        BTreeSet::from([
            set(&["<0>"]),
            set(&["<1>", "<2>", "<3>"]),
            set(&["<4>"]),
            set(&["<4,bad>"]),
        ])
    );
}

#[test]
fn the_counter_path_is_not_the_heaviest_abstract_counterexample() {
    let (m1, m2) = (shuttle(), counter(5));
    let f = parse_formula(r#"P<=0.3 [ true U<=4 "failure" ]"#).unwrap();
    let r = compositional_check(&m1, &m2, &f).unwrap();
    assert!(!r.holds);
    let w = r.counterexample.unwrap();
    assert_eq!(w.actions.len(), 1);
    assert_eq!(w.probability, 0.5);
    assert_eq!(m2.state_name(w.states[1].1), "<4,bad>");
}

#[test]
fn verdicts_match_the_monolithic_product() {
    let m1 = shuttle();
    for n in 3..7 {
        let m2 = counter(n);
        let mono_mdp = parallel_compose(&m1, &m2).unwrap().mdp;
        for bound in ["0", "0.3", "0.5", "0.9", "0.95", "1"] {
            for k in 1..=n {
                let f = parse_formula(&format!(r#"P<={bound} [ true U<={k} "failure" ]"#)).unwrap();
                let comp = compositional_check(&m1, &m2, &f).unwrap();
                let mono = check(&mono_mdp, &f).unwrap();
                assert_eq!(comp.holds, mono.holds, "n={n} bound={bound} k={k}");
                assert!(comp.refinements() <= m2.num_states());
                if let Some(w) = comp.counterexample {
                    assert!((w.probability_in(&m1, &m2) - w.probability).abs() < 1e-12);
                }
            }
        }
    }
}
