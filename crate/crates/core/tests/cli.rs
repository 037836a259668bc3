use microloc::cli::{
    main_with_args, parse_and_validate, Study, EXIT_HYPOTHESIS, EXIT_IO, EXIT_OK, EXIT_USAGE,
};
use microloc::quantize::SymbolVariant;

fn args(line: &str) -> Vec<String> {
    std::iter::once("microloc".to_string()).chain(line.split_whitespace().map(String::from)).collect()
}

fn parse_code(line: &str) -> i32 {
    match parse_and_validate(args(line)) {
        Ok(_) => EXIT_OK,
        Err(e) => e.code,
    }
}

#[test]
fn accepted_parameter_sets() {
    let run = parse_and_validate(args("converge --model schrodinger --delta 0.25")).unwrap();
    assert_eq!(run.study, Study::Converge);
    assert_eq!(run.experiment.cutoff.delta, 0.25);
    let run = parse_and_validate(args("converge --delta -0.25 --set schedule.count=3")).unwrap();
    assert_eq!(run.experiment.cutoff.delta, -0.25);
    assert_eq!(run.experiment.schedule.count, 3);
    let kg = parse_and_validate(args("kg-micro")).unwrap();
    assert_eq!(kg.experiment.model, "half-kg");
    assert_eq!(kg.experiment.variant, SymbolVariant::Kg);
}

#[test]
fn hypothesis_and_regime_violations_exit_three() {
    // half-kg has P₁ = 1, so the plain symbol is not defined for it
    assert_eq!(parse_code("converge --model half-kg --variant plain"), EXIT_HYPOTHESIS);
    assert_eq!(parse_code("converge --delta 0.6"), EXIT_HYPOTHESIS);
    assert_eq!(parse_code("converge --model half-kg --variant modified --set cutoff.eps0=0.7"), EXIT_HYPOTHESIS);
    assert_eq!(parse_code("kg-micro --variant plain"), EXIT_HYPOTHESIS);
}

#[test]
fn configuration_errors_exit_two() {
    assert_eq!(parse_code("converge --set cutoff.dleta=0.1"), EXIT_USAGE);
    assert_eq!(parse_code("converge --set nonsense"), EXIT_USAGE);
    assert_eq!(parse_code("converge --model bogus"), EXIT_USAGE);
    assert_eq!(parse_code("converge --dim 3"), EXIT_USAGE);
    assert_eq!(parse_code("converge --variant sideways"), EXIT_USAGE);
    assert_eq!(parse_code("frobnicate"), EXIT_USAGE);
}

#[test]
fn config_files_are_read_and_missing_ones_exit_four() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("run.json");
    std::fs::write(&path, r#"{"cutoff.delta": -0.25, "model": "capillary-ww"}"#).unwrap();
    let run = parse_and_validate(args(&format!("converge --config {}", path.display()))).unwrap();
    assert_eq!(run.experiment.model, "capillary-ww");
    assert_eq!(run.experiment.cutoff.delta, -0.25);
    let missing = dir.path().join("absent.json");
    assert_eq!(parse_code(&format!("converge --config {}", missing.display())), EXIT_IO);
    std::fs::write(&path, "[1, 2]").unwrap();
    assert_eq!(parse_code(&format!("converge --config {}", path.display())), EXIT_USAGE);
}

#[test]
fn a_passing_study_writes_its_files() {
    let dir = tempfile::tempdir().unwrap();
    let code = main_with_args(args(&format!("gchi --delta 0 --set gchi.count=4 --out {}", dir.path().display())));
    assert_eq!(code, EXIT_OK);
    for name in ["gchi.csv", "gchi.json", "gchi.gp"] {
        assert!(dir.path().join(name).is_file(), "{name}");
    }
}

#[test]
fn unwritable_output_exits_four() {
    let dir = tempfile::tempdir().unwrap();
    let blocker = dir.path().join("file");
    std::fs::write(&blocker, "x").unwrap();
    let code = main_with_args(args(&format!("gchi --set gchi.count=2 --out {}", blocker.display())));
    assert_eq!(code, EXIT_IO);
}
