use std::f64::consts::PI;

use heisenfft::config::{ExperimentConfig, Scenario, SCHEMA};

#[test]
fn defaults_validate_cleanly_and_round_trip() {
    for scenario in Scenario::ALL {
        let cfg = ExperimentConfig::defaults(scenario);
        assert!(cfg.validate().is_empty(), "{scenario}: {:?}", cfg.validate());
        let back = ExperimentConfig::from_json(&cfg.to_json()).unwrap();
        assert_eq!(back, cfg);
        assert_eq!(scenario.name().parse::<Scenario>().unwrap(), scenario);
    }
}

#[test]
fn unknown_keys_are_errors() {
    let mut value: serde_json::Value =
        serde_json::from_str(&ExperimentConfig::defaults(Scenario::Observability).to_json()).unwrap();
    value["grdi"] = serde_json::json!(1);
    assert!(ExperimentConfig::from_json(&value.to_string()).is_err());
    let mut nested: serde_json::Value =
        serde_json::from_str(&ExperimentConfig::defaults(Scenario::Observability).to_json()).unwrap();
    nested["observability"]["tolerances"]["reductoin"] = serde_json::json!(1e-3);
    assert!(ExperimentConfig::from_json(&nested.to_string()).is_err());
}

#[test]
fn schema_and_missing_block_are_diagnosed() {
    let mut cfg = ExperimentConfig::defaults(Scenario::Annihilation);
    cfg.schema = "heisenfft-config/0".into();
    cfg.annihilation = None;
    let fields: Vec<String> = cfg.validate().into_iter().map(|d| d.field).collect();
    assert!(fields.contains(&"schema".to_string()) && fields.contains(&"annihilation".to_string()), "{fields:?}");
}

#[test]
fn odd_grid_is_diagnosed() {
    let mut cfg = ExperimentConfig::defaults(Scenario::PropagatorSelftest);
    cfg.grid.points = 33;
    let d = cfg.validate();
    assert!(d.iter().any(|x| x.field == "grid.points"), "{d:?}");
}

#[test]
fn singular_pair_is_named() {
    let mut cfg = ExperimentConfig::defaults(Scenario::PropagatorSelftest);
    let block = cfg.propagator.as_mut().unwrap();
    block.lambdas.push(PI / 0.3);
    let d = cfg.validate();
    assert_eq!(d.len(), 1, "{d:?}");
    assert_eq!(d[0].field, "propagator.lambdas[3] with propagator.times[0]");
    assert!(d[0].message.contains("singular pair"));
}

#[test]
fn small_box_triggers_boundary_decay_warning() {
    let mut cfg = ExperimentConfig::defaults(Scenario::Counterexample);
    cfg.counterexample.as_mut().unwrap().alpha = 1.0;
    cfg.grid.half_width = 6.0;
    // e^{−36/4} ≈ 1.2e-4 > 1e-10.
    let d = cfg.validate();
    assert!(d.iter().any(|x| x.field == "grid.half_width" && x.message.contains("boundary decay")), "{d:?}");
    cfg.grid.half_width = 10.0;
    assert!(cfg.validate().is_empty());
}

#[test]
fn sets_accept_centers_and_balls() {
    let text = ExperimentConfig::defaults(Scenario::Observability)
        .to_json()
        .replace(r#""shape": "rect","#, r#""shape": "rect", "center": [0.5, -0.5],"#);
    let cfg = ExperimentConfig::from_json(&text).unwrap();
    assert_eq!(cfg.schema, SCHEMA);
    assert!(cfg.validate().is_empty());
    let bad = text.replace("[0.5, -0.5]", "[0.5]");
    let d = ExperimentConfig::from_json(&bad).unwrap().validate();
    assert!(d.iter().any(|x| x.field == "observability.s_set"), "{d:?}");
}
