// SPDX-License-Identifier: Apache-2.0

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn cohwalk(experiment: &str, config: &Path, output: &Path, extra: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cohwalk"))
        .args(["--experiment", experiment, "--config"])
        .arg(config)
        .arg("--output")
        .arg(output)
        .args(extra)
        .output()
        .expect("binary runs")
}

#[test]
fn writes_preamble_and_columns() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("css.csv");
    let config = dir.path().join("css.json");
    std::fs::write(
        &config,
        r#"{"theta2": ["pi/8", "pi/2"], "alphas": [1.0], "steps": [4]}"#,
    )
    .unwrap();
    let result = cohwalk("css-sweep", &config, &out, &["--workers", "2"]);
    assert!(
        result.status.success(),
        "{}",
        String::from_utf8_lossy(&result.stderr)
    );
    let text = std::fs::read_to_string(&out).unwrap();
    let mut lines = text.lines().skip_while(|l| l.starts_with('#'));
    assert_eq!(
        lines.next(),
        Some("spin,theta1,theta2,alpha,N,Nw,M2,tildeN,deltaN,deltaNw_shifted")
    );
    assert_eq!(lines.count(), 2);
    assert!(text.starts_with("# cohwalk css-sweep"));
    assert!(text.contains("#   \"workers\": 2"));
}

#[test]
fn critical_points_leave_k_space_cells_empty() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("moments.csv");
    let config = dir.path().join("moments.json");
    std::fs::write(
        &config,
        r#"{"theta2": ["pi/4"], "steps": [3], "initial_spins": ["chiral-minus"]}"#,
    )
    .unwrap();
    let result = cohwalk("moments-sweep", &config, &out, &["--k-grid", "256"]);
    assert!(result.status.success());
    let text = std::fs::read_to_string(&out).unwrap();
    let row = text.lines().last().unwrap();
    let fields: Vec<&str> = row.split(',').collect();
    assert_eq!(fields.len(), 9);
    assert_eq!((fields[6], fields[7]), ("", ""));
    assert!(!fields[4].is_empty() && !fields[8].is_empty());
}

#[test]
fn zero_steps_exits_with_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("bad.json");
    std::fs::write(&config, r#"{"steps": [0]}"#).unwrap();
    let result = cohwalk("moments-sweep", &config, &dir.path().join("x.csv"), &[]);
    assert_eq!(result.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&result.stderr).contains("steps must be ≥ 1"));
}

#[test]
fn malformed_or_missing_config_exits_with_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("bad.json");
    std::fs::write(&config, "{ not json").unwrap();
    let out = dir.path().join("x.csv");
    assert_eq!(
        cohwalk("phase-diagram", &config, &out, &[]).status.code(),
        Some(2)
    );
    let missing = dir.path().join("missing.json");
    assert_eq!(
        cohwalk("phase-diagram", &missing, &out, &[]).status.code(),
        Some(2)
    );
    assert!(!out.exists());
}

#[test]
fn small_cavity_aborts_oracle_check() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("oracle.csv");
    let result = cohwalk(
        "oracle-check",
        &configs().join("oracle_check.json"),
        &out,
        &["--fock-dim", "30"],
    );
    assert_eq!(result.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&result.stderr).contains("truncation"));
}

#[test]
fn shipped_configs_validate() {
    use cohwalk_cli::{validate, Experiment, ExperimentConfig};
    for (file, experiment) in [
        ("fig1_phase_diagram.json", Experiment::PhaseDiagram),
        ("fig2_moments.json", Experiment::MomentsSweep),
        ("fig3_cross_moments.json", Experiment::MomentsSweep),
        ("fig4_css.json", Experiment::CssSweep),
        ("reconstruct.json", Experiment::Reconstruct),
        ("oracle_check.json", Experiment::OracleCheck),
        ("compile_check.json", Experiment::CompileCheck),
    ] {
        let mut config = ExperimentConfig::load(&configs().join(file)).unwrap();
        config.experiment = Some(experiment);
        assert_eq!(validate(&config), vec![], "{file}");
    }
}
