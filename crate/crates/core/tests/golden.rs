use rep_core::canonical_form::cf_circuit;
use rep_core::compiler::{compile, CompiledProtocol};
use serde_json::Value;

const PATH: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/tests/golden/compile_n3.json");

fn current() -> CompiledProtocol {
    compile(&cf_circuit(3).unwrap()).unwrap()
}

/// Set `REP_UPDATE_GOLDEN=1` to regenerate after an intended change.
#[test]
fn compile_n3_matches_golden() {
    let cp = current();
    let text = serde_json::to_string_pretty(&cp).unwrap() + "\n";
    if std::env::var_os("REP_UPDATE_GOLDEN").is_some() {
        std::fs::write(PATH, &text).unwrap();
    }
    let golden: Value = serde_json::from_str(&std::fs::read_to_string(PATH).unwrap()).unwrap();
    let now: Value = serde_json::from_str(&text).unwrap();
    assert_eq!(golden, now, "compile output drifted from {PATH}");
}

#[test]
fn golden_round_trips() {
    let golden: CompiledProtocol = serde_json::from_str(&std::fs::read_to_string(PATH).unwrap()).unwrap();
    assert_eq!(golden, current());
    assert_eq!(golden.circuit_hash(), current().circuit_hash());
}
