use ap_kinetic::{Boundary, EquilibriumSpec, InitialData};
use ap_kinetic_cli::config::{parse_config, preset, ConfigError, RunConfig, SolverKind, PRESETS};

#[test]
fn minimal_config_fills_defaults() {
    let cfg = parse_config("solver = micro_macro\n").unwrap();
    let expected = RunConfig::default();
    assert_eq!(cfg, expected);
    assert_eq!(cfg.solver, SolverKind::MicroMacro);
    assert_eq!((cfg.eps, cfg.r), (1.0, 0.0));
    assert_eq!(cfg.equilibrium, EquilibriumSpec::Uniform);
    assert_eq!(cfg.boundary, Boundary::Periodic);
}

#[test]
fn comments_and_blank_lines_are_ignored() {
    let text = "# a run\n\n  eps = 0.5   # moderate\nr=1\n";
    let cfg = parse_config(text).unwrap();
    assert_eq!((cfg.eps, cfg.r), (0.5, 1.0));
}

#[test]
fn cfl_violation_names_the_time_step() {
    // v_max dt / dx = 1.25
    let err = parse_config("dx = 0.01\ndt = 0.0125\nt_final = 1\n").unwrap_err();
    let msg = err.to_string();
    assert!(matches!(err, ConfigError::Invalid { key: "dt", .. }), "{msg}");
    assert!(msg.contains("CFL"), "{msg}");
}

#[test]
fn odd_cell_count_is_rejected() {
    let err = parse_config("dx = 0.016\n").unwrap_err();
    assert!(err.to_string().contains("dx"), "{err}");
}

#[test]
fn unknown_key_reports_line_and_name() {
    let err = parse_config("eps = 1\nepsilon = 2\n").unwrap_err();
    assert!(matches!(err, ConfigError::UnknownKey { line: 2, .. }));
    assert!(err.to_string().contains("epsilon"));
}

#[test]
fn duplicate_and_malformed_lines_are_rejected() {
    assert!(matches!(
        parse_config("eps = 1\neps = 2\n").unwrap_err(),
        ConfigError::Duplicate { line: 2, .. }
    ));
    assert!(matches!(parse_config("eps 1\n").unwrap_err(), ConfigError::Syntax { line: 1, .. }));
    let err = parse_config("eps = fast\n").unwrap_err();
    assert!(err.to_string().contains("`eps`"), "{err}");
}

#[test]
fn kinetic_solvers_need_positive_eps() {
    let err = parse_config("eps = 0\n").unwrap_err();
    assert!(err.to_string().contains("eps"), "{err}");
    assert!(parse_config("solver = limit\neps = 0\n").is_ok());
}

#[test]
fn reference_preset() {
    let cfg = parse_config("preset = fig_phi_reg_ep1\n").unwrap();
    assert_eq!(cfg.eps, 1.0);
    assert_eq!((cfg.dt, cfg.dx), (2.5e-3, 1e-2));
    assert_eq!(cfg.snapshots, vec![0.25, 0.5, 0.75, 1.0]);
    assert_eq!(cfg.initial, InitialData::Quadratic);
}

#[test]
fn explicit_keys_override_the_preset_wherever_it_appears() {
    let cfg = parse_config("eps = 0.3\npreset = fig_phi_reg_ep1\n").unwrap();
    assert_eq!(cfg.eps, 0.3);
}

#[test]
fn every_preset_validates() {
    for name in PRESETS {
        preset(name).unwrap().validate().unwrap_or_else(|e| panic!("{name}: {e}"));
    }
    assert!(matches!(parse_config("preset = nope\n").unwrap_err(), ConfigError::UnknownPreset(_)));
}

#[test]
fn overrides_apply_in_order_and_revalidate() {
    let cfg = RunConfig::default();
    let set = |k: &str, v: &str| (k.to_string(), v.to_string());
    let cfg = cfg.with_overrides(&[set("eps", "0.1"), set("eps", "0.2")]).unwrap();
    assert_eq!(cfg.eps, 0.2);
    assert!(cfg.clone().with_overrides(&[set("dt", "0.02")]).is_err());
    assert!(matches!(
        cfg.with_overrides(&[set("bogus", "1")]).unwrap_err(),
        ConfigError::UnknownOverride { .. }
    ));
}

#[test]
fn tabulated_initial_data_and_custom_equilibrium() {
    let values: Vec<String> = (0..200).map(|i| format!("{}", i as f64 / 200.0)).collect();
    let text = format!(
        "initial_values = {}\nv_max = 1\ndv = 0.5\nequilibrium_values = 1, 2, 2, 1\n",
        values.join(",")
    );
    let cfg = parse_config(&text).unwrap();
    assert!(matches!(cfg.initial, InitialData::Table(ref v) if v.len() == 200));
    assert_eq!(cfg.equilibrium, EquilibriumSpec::Custom(vec![1.0, 2.0, 2.0, 1.0]));
    // Wrong table length is caught at validation.
    assert!(parse_config("initial_values = 1, 2, 3\n").is_err());
}

#[test]
fn snapshots_outside_the_run_are_rejected() {
    assert!(parse_config("snapshots = 0.5, 2\n").is_err());
}
