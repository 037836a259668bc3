//! Kept in its own binary: the execution mode is process-global.

use microloc::config::ExperimentConfig;
use microloc::exec::{set_mode, ExecMode};
use microloc::experiments::{run_convergence_study, write_report};
use serde_json::json;

#[test]
fn sequential_reruns_are_byte_identical_and_match_parallel() {
    let config = ExperimentConfig::from_dotted([("schedule.t_min", json!(8.0)), ("schedule.count", json!(2))]).unwrap();
    let dir = tempfile::tempdir().unwrap();
    set_mode(ExecMode::Sequential);
    let mut bodies = Vec::new();
    for name in ["a.csv", "b.csv"] {
        let path = dir.path().join(name);
        let report = run_convergence_study(&config).unwrap();
        assert!(report.metadata.wall_time_s.is_none());
        write_report(&report, &path).unwrap();
        bodies.push((std::fs::read(&path).unwrap(), std::fs::read(path.with_extension("json")).unwrap()));
    }
    assert_eq!(bodies[0], bodies[1]);
    let sequential = run_convergence_study(&config).unwrap();
    set_mode(ExecMode::Parallel);
    let parallel = run_convergence_study(&config).unwrap();
    assert_eq!(sequential.rows, parallel.rows);
}
