use rdcn_web::{design, simulate, tradeoff};
use serde_json::Value;

fn parse(s: String) -> Value {
    serde_json::from_str(&s).unwrap()
}

#[test]
fn design_matches_buffer_budget() {
    let v = parse(design(16, 2, 100.0, 400.0, 20.0, 0.0));
    assert_eq!(v["degree"], 4);
    assert_eq!(v["period"], 2);
    assert_eq!(v["theta"], 0.25);
    assert_eq!(v["switches"].as_array().unwrap().len(), 2);
}

#[test]
fn design_without_budget_is_an_error() {
    let v = parse(design(16, 2, 100.0, 400.0, 0.0, 0.0));
    assert_eq!(v["error"], "validation");
    let v = parse(design(16, 2, 100.0, 400.0, 0.0, 1.0));
    assert_eq!(v["error"], "infeasible");
}

#[test]
fn tradeoff_lists_even_degrees() {
    let v = parse(tradeoff(16, 2, 100.0, 400.0, 0.0));
    let degrees: Vec<u64> = v.as_array().unwrap().iter().map(|r| r["degree"].as_u64().unwrap()).collect();
    assert_eq!(degrees, [2, 4, 6, 8, 10, 12, 14, 16]);
    assert_eq!(v[7]["theta"], 0.5);
    assert_eq!(v[7]["buffer_mb"], 80.0);
}

#[test]
fn simulate_small_run() {
    let v = parse(simulate(8, 2, 4, 100.0, 100.0, 10.0, 0.2, 200, 1));
    let t = v["throughput"].as_f64().unwrap();
    assert!(t > 0.0 && t <= 1.0, "{v}");
    assert_eq!(v, parse(simulate(8, 2, 4, 100.0, 100.0, 10.0, 0.2, 200, 1)));
    let v = parse(simulate(8, 2, 4, 100.0, 100.0, 10.0, 0.2, 1_000_000, 1));
    assert_eq!(v["error"], "validation");
}
