//! End-to-end runner behaviour: snapshots, serialization, determinism and
//! cross-class relations.

use std::path::{Path, PathBuf};
use std::process::Command;

use orqc::circuit::{CircuitClass, CircuitSpec};
use orqc::experiment::{
    emit, read_csv, read_json, run_experiment, write_csv, ExperimentConfig, Observable, OutputConfig,
    OutputFormat,
};

fn data(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/data").join(name)
}

fn smoke() -> ExperimentConfig {
    let text = std::fs::read_to_string(Path::new(env!("CARGO_MANIFEST_DIR")).join("configs/smoke.toml")).unwrap();
    ExperimentConfig::from_toml_str(&text).unwrap()
}

/// Frozen output of `configs/smoke.toml`. Regenerate with
/// `ORQC_BLESS=1 cargo test --test experiments` after an intended change.
#[test]
fn smoke_run_matches_snapshot() {
    let out = run_experiment(&smoke()).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let written = dir.path().join("logneg.csv");
    write_csv(&written, out.primary()).unwrap();
    let snapshot = data("smoke_logneg.csv");
    if std::env::var_os("ORQC_BLESS").is_some() {
        std::fs::create_dir_all(snapshot.parent().unwrap()).unwrap();
        std::fs::copy(&written, &snapshot).unwrap();
    }
    let got = std::fs::read_to_string(&written).unwrap();
    let want = std::fs::read_to_string(&snapshot).expect("snapshot missing; run with ORQC_BLESS=1");
    assert_eq!(got, want);
}

#[test]
fn csv_and_json_round_trip() {
    let mut config = smoke();
    config.realizations = 3;
    let out = run_experiment(&config).unwrap();
    let dir = tempfile::tempdir().unwrap();

    let csv_dir = dir.path().join("csv");
    emit(&out, &OutputConfig { dir: csv_dir.clone(), format: OutputFormat::Csv }).unwrap();
    for s in &out.series {
        let back = read_csv(&csv_dir.join(format!("{}.csv", s.name))).unwrap();
        assert_eq!(back, s.records, "series {}", s.name);
    }
    let head = std::fs::read_to_string(csv_dir.join("logneg.csv")).unwrap();
    assert!(head.starts_with("t,mean,variance,n_realizations\n"));
    assert!(!head.contains('\r'));
    assert!(csv_dir.join("manifest.json").exists());

    let json_dir = dir.path().join("json");
    emit(&out, &OutputConfig { dir: json_dir.clone(), format: OutputFormat::Json }).unwrap();
    assert_eq!(read_json(&json_dir.join("results.json")).unwrap(), out);
}

#[test]
fn manifest_records_every_realization() {
    let mut config = smoke();
    config.realizations = 5;
    let out = run_experiment(&config).unwrap();
    let m = &out.manifest;
    assert_eq!(m.realization_seeds.len(), 5);
    assert_eq!(m.master_seed, config.master_seed);
    let mut seeds = m.realization_seeds.clone();
    seeds.sort_unstable();
    seeds.dedup();
    assert_eq!(seeds.len(), 5);
    assert!(out.series.iter().all(|s| s.records.iter().all(|r| r.n_realizations == 5 && r.variance >= 0.0)));
}

#[test]
fn results_do_not_depend_on_parallel_width() {
    let base = ExperimentConfig::new(Observable::Sre, CircuitSpec::mforc(4), 6, 99).with_steps(6);
    let runs: Vec<_> = [1, 2, 3]
        .into_iter()
        .map(|w| {
            let mut c = base.clone();
            c.parallel_width = Some(w);
            run_experiment(&c).unwrap().series
        })
        .collect();
    assert_eq!(runs[0], runs[1]);
    assert_eq!(runs[0], runs[2]);
}

#[test]
fn zero_exposure_mlorc_is_the_unitary_circuit() {
    for observable in [Observable::Logneg, Observable::Sre] {
        let ruc = run_experiment(&ExperimentConfig::new(observable, CircuitSpec::ruc(4), 4, 5).with_steps(8)).unwrap();
        let closed = run_experiment(&ExperimentConfig::new(observable, CircuitSpec::mlorc(4, 0), 4, 5).with_steps(8)).unwrap();
        assert_eq!(ruc.series, closed.series, "{observable:?}");
    }
}

#[test]
fn open_circuits_fluctuate_less_than_unitary_ones() {
    for observable in [Observable::Logneg, Observable::MutualInfo] {
        let last_variance = |class| {
            let c = ExperimentConfig::new(observable, CircuitSpec::new(class, 4), 100, 2024).with_steps(30);
            run_experiment(&c).unwrap().primary().last().unwrap().variance
        };
        let ruc = last_variance(CircuitClass::Ruc);
        for class in [CircuitClass::Mlorc, CircuitClass::Mforc] {
            let ratio = last_variance(class) / ruc;
            assert!(ratio < 0.5, "{observable:?} {class:?}: variance ratio {ratio:.3}");
        }
    }
}

fn orqc(args: &[&str]) -> i32 {
    Command::new(env!("CARGO_BIN_EXE_orqc"))
        .args(args)
        .output()
        .unwrap()
        .status
        .code()
        .unwrap()
}

#[test]
fn cli_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let write = |name: &str, body: &str| {
        let p = dir.path().join(name);
        std::fs::write(&p, body).unwrap();
        p.to_string_lossy().into_owned()
    };
    let ok = write("ok.toml", "observable = \"logneg\"\nrealizations = 1\nmaster_seed = 1\nsteps = 2\n[circuit]\nclass = \"ruc\"\nn_system = 2\n");
    let unknown = write("unknown.toml", "observable = \"logneg\"\nrealizations = 1\nmaster_seed = 1\nspeed = 9\n[circuit]\nclass = \"ruc\"\nn_system = 2\n");
    let odd = write("odd.toml", "observable = \"logneg\"\nrealizations = 1\nmaster_seed = 1\n[circuit]\nclass = \"ruc\"\nn_system = 3\n");
    let huge = write(
        "huge.toml",
        "observable = \"krylov\"\nrealizations = 1\nmaster_seed = 1\nmemory_budget_mb = 4\n[circuit]\nclass = \"ruc\"\nn_system = 6\n",
    );
    assert_eq!(orqc(&["validate", "--config", &ok]), 0);
    assert_eq!(orqc(&["run", "--config", &ok]), 0);
    assert_eq!(orqc(&["validate", "--config", &unknown]), 2);
    assert_eq!(orqc(&["validate", "--config", &odd]), 2);
    assert_eq!(orqc(&["run", "--config", "/nonexistent/config.toml"]), 2);
    assert_eq!(orqc(&["run", "--config", &huge]), 3);
}

#[test]
fn width_override_must_be_positive() {
    let status = Command::new(env!("CARGO_BIN_EXE_orqc"))
        .args(["run", "--config", concat!(env!("CARGO_MANIFEST_DIR"), "/configs/smoke.toml")])
        .env("ORQC_PARALLEL_WIDTH", "0")
        .output()
        .unwrap()
        .status;
    assert_eq!(status.code(), Some(2));
}
