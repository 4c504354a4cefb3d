use std::collections::HashSet;

use proptest::prelude::*;

use super::*;
use crate::contract::Contract;

const C_BASE: &str = "payload ∈ Σ*.[0-9].Σ* ∧ len(payload) ≥ y";
const C_CONFIRM: &str = "payload in Σ*.[0-9].Σ* and len(payload) >= 6";

/// The example document, as printed in the literature on this encoding.
const EXAMPLE_SMT: &str = r#"(declare-const payload String)
(declare-const y Int)
(assert
  (str.in.re payload
    (re.++ (re.* (re.range " " "~"))
      (re.++ (re.range "0" "9")
        (re.* (re.range " " "~"))))))
(assert (>= (str.len payload) y))
"#;

fn squash(s: &str) -> String {
    s.split_whitespace().collect::<Vec<_>>().join(" ")
}

#[test]
fn stream_yields_distinct_models() {
    let c = Contract::parse(C_BASE).unwrap();
    let mut s = ModelStream::new(c.clone(), Domain::default(), 7);
    let mut seen = HashSet::new();
    for _ in 0..50 {
        let Sample::Model(v) = s.next_model() else { panic!("expected a model") };
        assert!(c.holds_for(&v), "{v}");
        assert!(seen.insert(v));
    }
    assert_eq!(s.excluded().len(), 50);
}

#[test]
fn negative_length_bound_is_unsat() {
    let c = Contract::parse("len(x) < 0").unwrap();
    assert_eq!(ModelStream::new(c, Domain::default(), 1).next_model(), Sample::Unsat);
    let c = Contract::parse("x in \"a\" and not (x in \"a\" + \"b\")").unwrap();
    assert_eq!(ModelStream::new(c, Domain::default(), 1).next_model(), Sample::Unsat);
}

#[test]
fn finite_languages_exhaust() {
    let c = Contract::parse("x in \"a\" + \"b\"").unwrap();
    let mut s = ModelStream::new(c, Domain::default(), 3);
    s.budget = 500;
    let mut got = vec![s.next_model(), s.next_model()];
    got.sort_by_key(|m| format!("{m:?}"));
    assert_eq!(got, vec![Sample::Model(ParamVector(vec!["a".into()])), Sample::Model(ParamVector(vec!["b".into()]))]);
    assert_eq!(s.next_model(), Sample::Exhausted);
}

#[test]
fn seed_population_for_confirm_contract() {
    let c = Contract::parse(C_CONFIRM).unwrap();
    let pop = seed_population(&c, 5, 11, &Domain::default()).unwrap();
    assert_eq!(pop.len(), 5);
    for v in &pop {
        let s = v.values()[0].as_str().unwrap();
        assert!(s.chars().count() >= 6 && s.chars().any(|ch| ch.is_ascii_digit()), "{s:?}");
    }
}

#[test]
fn seed_population_edge_cases() {
    let t = Contract::parse("true").unwrap();
    assert_eq!(seed_population(&t, 3, 0, &Domain::default()).unwrap(), vec![ParamVector::default(); 3]);
    let u = Contract::parse("len(x) < 0").unwrap();
    assert!(matches!(seed_population(&u, 4, 0, &Domain::default()), Err(SamplerError::UnsatContract(_))));
    // Two models only: the rest are cyclic copies.
    let two = Contract::parse("x in \"a\" + \"b\"").unwrap();
    let pop = seed_population(&two, 5, 0, &Domain::default()).unwrap();
    assert_eq!(pop[0], pop[2]);
    assert_eq!(pop[1], pop[3]);
    assert_ne!(pop[0], pop[1]);
}

#[test]
fn mixed_constraints_are_satisfied() {
    let c = Contract::parse("x > len(s) and s in [a-c]* and not b and x * 2 < 40").unwrap();
    let pop = seed_population(&c, 32, 5, &Domain::default()).unwrap();
    assert!(pop.iter().all(|v| c.holds_for(v)));
    assert_eq!(pop.iter().collect::<HashSet<_>>().len(), 32);
}

#[test]
fn domain_restricts_samples() {
    let d = Domain { max_str_len: 3, alphabet: Some(vec!['a', 'b']), int_min: 0, int_max: 4, ..Domain::default() };
    let c = Contract::parse("len(s) >= 0 and n >= 0").unwrap();
    let mut st = ModelStream::new(c, d.clone(), 9);
    let mut n = 0;
    while let Sample::Model(v) = st.next_model() {
        assert!(v.values().iter().all(|x| d.contains(x)), "{v}");
        n += 1;
    }
    // 15 strings of length at most 3 over two letters, times 5 integers.
    assert_eq!(n, 75);
}

#[test]
fn export_reproduces_the_example_document() {
    let c = Contract::parse(C_BASE).unwrap();
    let out = export_smtlib(&c, &[]);
    assert_eq!(squash(&out), squash(EXAMPLE_SMT));
    assert_eq!(out.lines().count(), 8);
    read_smtlib(&out).unwrap();
}

#[test]
fn export_appends_invalidated_models() {
    let c = Contract::parse(C_BASE).unwrap();
    let out = export_smtlib(&c, &[ParamVector(vec!["7".into(), 0i64.into()])]);
    let tail: Vec<&str> = out.lines().rev().take(2).collect();
    assert_eq!(tail, ["(assert (not (= y 0)))", "(assert (not (= payload \"7\")))"]);
    read_smtlib(&out).unwrap();
}

#[test]
fn export_of_true_has_no_assertions() {
    let out = export_smtlib(&Contract::parse("true").unwrap(), &[]);
    assert!(!out.contains("assert"));
    assert_eq!(read_smtlib(&out).unwrap(), vec![]);
}

#[test]
fn reader_rejects_malformed_documents() {
    assert_eq!(read_smtlib("(assert (> x 1)"), Err(SmtError::Unbalanced));
    assert_eq!(read_smtlib("(assert (> x 1))"), Err(SmtError::Undeclared("x".into())));
    assert_eq!(read_smtlib("(declare-const x Int) (assert \"oops)"), Err(SmtError::UnterminatedString));
    assert!(read_smtlib("(declare-const x Int)\n(assert (> x (- 3)))").is_ok());
}

#[test]
fn export_handles_every_construct() {
    let c = Contract::parse(r#"s in i"<a>".("x" + [0-9a-f])*.any^2 and not (n / 2 != 3 - n) and b or t != "q\"w""#)
        .unwrap();
    let out = export_smtlib(&c, &[]);
    read_smtlib(&out).unwrap();
}

proptest! {
    #[test]
    fn sampled_models_satisfy_random_contracts(seed in any::<u64>(), lo in 0i64..5, width in 0i64..5) {
        let text = format!("s in [ab]*.\"c\".[ab]* and len(s) >= {lo} and n >= {lo} and n <= {lo} + {width}");
        let c = Contract::parse(&text).unwrap();
        let mut st = ModelStream::new(c.clone(), Domain::default(), seed);
        let mut seen = HashSet::new();
        for _ in 0..10 {
            match st.next_model() {
                Sample::Model(v) => {
                    prop_assert!(c.holds_for(&v));
                    prop_assert!(seen.insert(v));
                }
                other => prop_assert!(false, "{other:?}"),
            }
        }
    }
}
