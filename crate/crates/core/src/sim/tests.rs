use proptest::prelude::*;

use super::*;
use crate::value::{ParamVector, Value};

fn scw() -> AutModel {
    AutModel::from_toml(crate::fixtures::SCW_MODEL).unwrap()
}

fn xss() -> VulnSpec {
    VulnSpec::from_toml(crate::fixtures::SCW_VULN).unwrap()
}

fn click(x: u32, y: u32) -> Action {
    Action::Click { x, y }
}

fn typ(s: &str) -> Action {
    Action::Type(s.to_string())
}

const FIELD: (u32, u32) = (10, 10);
const SUBMIT: (u32, u32) = (10, 40);
const CONFIRM: (u32, u32) = (10, 10);
const BACK: (u32, u32) = (70, 10);

fn submit_sequence(s: &str) -> Vec<Action> {
    vec![click(FIELD.0, FIELD.1), typ(s), click(SUBMIT.0, SUBMIT.1), click(CONFIRM.0, CONFIRM.1)]
}

const MINIMAL: &str = r#"
schema_version = 1
entry = "a"
[[procedures]]
name = "a"
"#;

#[test]
fn loads_scw_fixture() {
    let m = scw();
    assert_eq!(m.names().collect::<Vec<_>>(), ["signup", "confirm", "welcome"]);
    assert_eq!((m.width, m.height, m.max_input_len), (128, 128, 30));
    assert_eq!(m.entry, 0);
    let confirm = m.procedure("confirm").unwrap();
    assert_eq!(confirm.call_contract.arity(), 1);
    assert_eq!(confirm.contract_params, vec![0]);
}

#[test]
fn dangling_target_is_rejected() {
    let text = format!("{MINIMAL}on_fail = \"nowhere\"\n");
    assert_eq!(
        AutModel::from_toml(&text).unwrap_err(),
        SimError::DanglingTarget { from: "a".into(), target: "nowhere".into() }
    );
    let link = format!(
        "{MINIMAL}[[procedures.page.controls]]\nname = \"l\"\nkind = \"link\"\ntarget = \"b\"\nx = 0\ny = 0\nw = 64\nh = 32\n"
    );
    assert!(matches!(AutModel::from_toml(&link), Err(SimError::DanglingTarget { .. })));
}

#[test]
fn empty_procedure_set_is_a_schema_error() {
    let text = "schema_version = 1\nentry = \"signup\"\n";
    assert!(matches!(AutModel::from_toml(text), Err(SimError::Schema(_))));
}

#[test]
fn invalid_models_are_rejected() {
    let outside = format!(
        "{MINIMAL}[[procedures.page.controls]]\nname = \"f\"\nkind = \"text_field\"\nx = 100\ny = 0\nw = 64\nh = 32\n"
    );
    assert!(matches!(AutModel::from_toml(&outside), Err(SimError::Schema(_))));
    let bad_guard = format!("{MINIMAL}guard = \"len(q) > 1\"\n");
    assert!(matches!(AutModel::from_toml(&bad_guard), Err(SimError::Contract { .. })));
    let bad_version = MINIMAL.replace("schema_version = 1", "schema_version = 7");
    assert!(matches!(AutModel::from_toml(&bad_version), Err(SimError::Schema(_))));
    let dup = format!("{MINIMAL}[[procedures]]\nname = \"a\"\n");
    assert!(matches!(AutModel::from_toml(&dup), Err(SimError::Schema(_))));
    let bad_sink = format!("{MINIMAL}[[procedures.sinks]]\nsignature = \"not an id\"\nvalue = \"v\"\n");
    assert!(matches!(AutModel::from_toml(&bad_sink), Err(SimError::Schema(_))));
}

#[test]
fn target_procedures_by_sink_label() {
    let m = scw();
    assert_eq!(target_procedures(&m, &xss()), vec![2]);
    let none = VulnSpec::new("sql", "x", "true").unwrap();
    assert!(target_procedures(&m, &none).is_empty());
    let text = format!(
        "{MINIMAL}[[procedures.sinks]]\nsignature = \"echo\"\nvalue = \"a\"\n\
         [[procedures]]\nname = \"b\"\n[[procedures.sinks]]\nsignature = \"echo\"\nvalue = \"b\"\n"
    );
    let two = AutModel::from_toml(&text).unwrap();
    assert_eq!(target_procedures(&two, &xss()), vec![0, 1]);
}

#[test]
fn call_graph_distances_of_scw() {
    let m = scw();
    assert_eq!(call_graph_distances(&m, &[2]), vec![Some(2), Some(1), Some(0)]);
    let text = format!("{MINIMAL}[[procedures]]\nname = \"island\"\n");
    let two = AutModel::from_toml(&text).unwrap();
    assert_eq!(call_graph_distances(&two, &[0]), vec![Some(0), None]);
}

#[test]
fn exploit_sequence_reaches_and_triggers_the_sink() {
    let m = scw();
    let payload = "<script>alert(1)</script>";
    let tr = execute_test(&m, &submit_sequence(payload)).unwrap();
    assert_eq!(tr.procedure_names(), ["signup", "confirm", "welcome"]);
    assert_eq!(tr.invocations[1].params, ParamVector(vec![Value::from(payload)]));
    assert_eq!(tr.invocations[2].params, ParamVector(vec![Value::from(payload)]));
    assert_eq!(tr.sinks.len(), 1);
    assert_eq!(tr.sinks[0].value, format!("Hello {payload}!"));
    assert!(is_successful(&tr, &xss()));
}

#[test]
fn john42_then_back_returns_to_signup() {
    let m = scw();
    let actions = vec![click(FIELD.0, FIELD.1), typ("john42"), click(SUBMIT.0, SUBMIT.1), click(BACK.0, BACK.1)];
    let tr = execute_test(&m, &actions).unwrap();
    assert_eq!(tr.procedure_names(), ["signup", "confirm", "signup"]);
    assert_eq!(tr.invocations[1].params, ParamVector(vec![Value::from("john42")]));
    assert!(!is_successful(&tr, &xss()));
}

#[test]
fn empty_sequence_invokes_only_the_entry() {
    let tr = execute_test(&scw(), &[]).unwrap();
    assert_eq!(tr.procedure_names(), ["signup"]);
    assert!(tr.sinks.is_empty());
    assert!(!is_successful(&tr, &xss()));
}

#[test]
fn failed_guard_redirects_with_the_submitted_params_recorded() {
    let tr = execute_test(&scw(), &submit_sequence("john")).unwrap();
    assert_eq!(tr.procedure_names(), ["signup", "confirm", "signup"]);
    assert_eq!(tr.invocations[1].params, ParamVector(vec![Value::from("john")]));
}

#[test]
fn quotes_are_filtered_before_the_sink() {
    let typed = "'<scr'Ipt>'alert'(9)</script>'";
    assert_eq!(typed.len(), 30);
    let tr = execute_test(&scw(), &submit_sequence(typed)).unwrap();
    assert_eq!(tr.invocations[1].params, ParamVector(vec![Value::from(typed)]));
    assert_eq!(tr.sinks[0].value, "Hello <scrIpt>alert(9)</script>!");
    assert!(is_successful(&tr, &xss()));
}

#[test]
fn typing_without_focus_and_background_clicks_are_no_ops() {
    let m = scw();
    let actions = vec![typ("abc123"), click(120, 120), click(SUBMIT.0, SUBMIT.1)];
    let tr = execute_test(&m, &actions).unwrap();
    assert_eq!(tr.invocations[1].params, ParamVector(vec![Value::from("")]));
}

#[test]
fn typing_overwrites_and_truncates() {
    let m = scw();
    let long: String = "9".repeat(40);
    let actions = vec![click(FIELD.0, FIELD.1), typ("first1"), typ(&long), click(SUBMIT.0, SUBMIT.1)];
    let tr = execute_test(&m, &actions).unwrap();
    assert_eq!(tr.invocations[1].params, ParamVector(vec![Value::from("9".repeat(30))]));
}

#[test]
fn out_of_canvas_click_is_an_unknown_action() {
    assert!(matches!(execute_test(&scw(), &[click(128, 0)]), Err(SimError::UnknownAction(_))));
    assert!(matches!(execute_test(&scw(), &[typ("tab\there")]), Err(SimError::UnknownAction(_))));
}

#[test]
fn sink_values_are_judged_by_the_vulnerability_contract() {
    let v = xss();
    assert!(v.triggers("<script>alert(1)</script>"));
    assert!(v.triggers("Hello <SCRIPT>alert('x1')</script>!"));
    assert!(!v.triggers("Hello <script>alert(xss)</script>!"));
    assert!(!v.triggers("Hello <script>alert(01)</script>!"));
    let hit = |label: &str, value: &str| ExecutionTrace {
        invocations: vec![Invocation { procedure: 2, name: "welcome".into(), params: ParamVector::default() }],
        sinks: vec![SinkHit { invocation: 0, procedure: "welcome".into(), label: label.into(), value: value.into() }],
    };
    assert!(is_successful(&hit("echo", "<script>alert(1)</script>"), &v));
    assert!(!is_successful(&hit("echo", "Hello <script>alert(xss)</script>!"), &v));
    assert!(!is_successful(&hit("log", "<script>alert(1)</script>"), &v));
}

#[test]
fn replace_uses_leftmost_longest_matches() {
    let d = crate::contract::Dfa::compile(&crate::contract::parse_regex("\"ab\"+\"abab\"").unwrap());
    assert_eq!(replace_all("xababab", &d, "-"), "x--");
    assert_eq!(replace_all("", &d, "-"), "");
}

fn arb_action() -> impl Strategy<Value = Action> {
    prop_oneof![
        3 => (0u32..128, 0u32..128).prop_map(|(x, y)| Action::Click { x, y }),
        1 => "[ -~]{0,32}".prop_map(Action::Type),
    ]
}

proptest! {
    #[test]
    fn execution_is_deterministic(actions in prop::collection::vec(arb_action(), 0..8)) {
        let m = scw();
        prop_assert_eq!(execute_test(&m, &actions).unwrap(), execute_test(&m, &actions).unwrap());
    }

    #[test]
    fn prefixes_yield_invocation_prefixes(actions in prop::collection::vec(arb_action(), 0..8), cut in 0usize..8) {
        let m = scw();
        let cut = cut.min(actions.len());
        let full = execute_test(&m, &actions).unwrap();
        let part = execute_test(&m, &actions[..cut]).unwrap();
        prop_assert!(full.invocations.starts_with(&part.invocations));
    }

    #[test]
    fn filter_removes_every_quote(prefix in "[ -~]{0,14}", digit in 0u8..10, suffix in "[ -~]{5,14}") {
        let s = format!("{prefix}{digit}{suffix}");
        let tr = execute_test(&scw(), &submit_sequence(&s)).unwrap();
        prop_assert_eq!(tr.procedure_names(), vec!["signup", "confirm", "welcome"]);
        prop_assert_eq!(&tr.sinks[0].value, &format!("Hello {}!", s.replace('\'', "")));
    }

    #[test]
    fn success_requires_reaching_a_target(actions in prop::collection::vec(arb_action(), 0..8)) {
        let m = scw();
        let tr = execute_test(&m, &actions).unwrap();
        if is_successful(&tr, &xss()) {
            prop_assert!(tr.invocations.iter().any(|i| target_procedures(&m, &xss()).contains(&i.procedure)));
        }
    }
}
