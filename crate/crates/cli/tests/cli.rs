use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use capelli_cli::{run, RSource, RunConfig, Suite, CACHE_ENV};
use capelli_core::algebras::{build_system, AlgebraPreset};
use capelli_core::capelli::{IDENTITY_IDS, RMATRIX_VALIDATION};
use capelli_core::ncpoly::{load_system, store_system, CacheOutcome};
use capelli_core::rmatrix::dj_rmatrix;
use capelli_core::scalars::Field;

fn capelli(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_capelli"))
        .args(args)
        .env_remove(CACHE_ENV)
        .output()
        .expect("binary runs")
}

fn config(suite: Suite, n: usize) -> RunConfig {
    RunConfig { suite, n, ..RunConfig::default() }
}

#[test]
fn classical_suite_has_four_checks() {
    let report = run(&config(Suite::Classical, 2)).unwrap();
    let ids: Vec<&str> = report.checks.iter().map(|c| c.id.as_str()).collect();
    assert_eq!(ids, ["eq1-cdet", "eq2-classical", "eq3-immanant", "eq3-immanant"]);
    assert_eq!(report.exit_code(), 0);
}

#[test]
fn all_suite_covers_every_identity() {
    let report = run(&RunConfig::default()).unwrap();
    for id in IDENTITY_IDS {
        assert!(report.checks.iter().any(|c| c.id == id), "no check for {id}");
    }
    assert!(report.checks.iter().all(|c| c.verified()), "{}", report.to_text());
    assert!(report.systems.iter().all(|s| s.audit_ok));
    assert_eq!(report.summary.exit_code, 0);
}

#[test]
fn exit_codes() {
    let ok = capelli(&["--suite", "quantum", "--N", "2", "--n", "2"]);
    assert_eq!(ok.status.code(), Some(0), "{}", String::from_utf8_lossy(&ok.stderr));

    let guarded = capelli(&["--suite", "quantum", "--n", "3", "--q", "symbolic"]);
    assert_eq!(guarded.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&guarded.stderr).contains("--force"));

    let bad_n = capelli(&["--N", "9"]);
    assert_eq!(bad_n.status.code(), Some(2));
}

#[test]
fn permutation_matrix_fails_validation() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("perm.txt");
    fs::write(&path, "N 2 q 2\n1 1 1 1 1\n1 2 2 1 1\n2 1 1 2 1\n2 2 2 2 1\n").unwrap();
    let out = capelli(&["--suite", "quantum", "--rmatrix", path.to_str().unwrap(), "--report", "json"]);
    assert_eq!(out.status.code(), Some(1));
    let json: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let checks = json["checks"].as_array().unwrap();
    let validation = checks.iter().find(|c| c["id"] == RMATRIX_VALIDATION).unwrap();
    assert_eq!(validation["status"], "failed");
    let notes: Vec<&str> = validation["notes"].as_array().unwrap().iter().map(|n| n.as_str().unwrap()).collect();
    assert!(notes.contains(&"hecke_ok=false"));
    // R-dependent identities are not attempted with an invalid R.
    assert!(checks.iter().all(|c| c["id"] != "eq6-quantum" || c["status"] == "failed"));
}

#[test]
fn cache_store_load_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let field = Field::Symbolic;
    let r = dj_rmatrix(2, &field).unwrap();
    let preset = AlgebraPreset::quantum_weyl(&r).unwrap();
    let system = build_system(&preset, 4).unwrap();
    let key = preset.cache_key(4);
    store_system(dir.path(), &key, &system, &field).unwrap();
    match load_system(dir.path(), &key, &field) {
        CacheOutcome::Hit(loaded) => {
            assert_eq!(loaded.degree_bound(), system.degree_bound());
            assert_eq!(loaded.rules(), system.rules());
        }
        other => panic!("expected a cache hit, got {other:?}"),
    }
    assert!(matches!(load_system(dir.path(), &key, &Field::default_specialized()), CacheOutcome::Invalid(_)));
}

fn cached_run(dir: &Path) -> capelli_cli::SuiteReport {
    let cfg = RunConfig { cache_dir: Some(dir.to_path_buf()), ..config(Suite::Quantum, 2) };
    run(&cfg).unwrap()
}

#[test]
fn cold_and_warm_runs_agree() {
    let dir = tempfile::tempdir().unwrap();
    let cold = cached_run(dir.path());
    let warm = cached_run(dir.path());
    assert!(cold.runtime.cache.computed > 0);
    assert_eq!(warm.runtime.cache.computed, 0);
    assert!(warm.runtime.cache.disk > 0);
    assert_eq!(cold.deterministic_json(), warm.deterministic_json());
}

#[test]
fn tampered_cache_is_recomputed_with_warning() {
    let dir = tempfile::tempdir().unwrap();
    let cold = cached_run(dir.path());
    let mut tampered = 0;
    for entry in fs::read_dir(dir.path()).unwrap() {
        let path = entry.unwrap().path();
        let mut file: serde_json::Value = serde_json::from_str(&fs::read_to_string(&path).unwrap()).unwrap();
        let rules = file["rules"].as_array_mut().unwrap();
        if let Some(rule) = rules.iter_mut().find(|r| !r["tail"].as_array().unwrap().is_empty()) {
            rule["tail"][0][1] = serde_json::Value::from("7");
            tampered += 1;
        }
        fs::write(&path, file.to_string()).unwrap();
    }
    assert!(tampered > 0);
    let again = cached_run(dir.path());
    assert_eq!(again.runtime.cache.recomputed, tampered);
    assert_eq!(again.runtime.warnings.len(), tampered);
    assert_eq!(cold.deterministic_json(), again.deterministic_json());
}

#[test]
fn reports_do_not_depend_on_thread_count() {
    let one = run(&RunConfig { jobs: Some(1), ..config(Suite::Quantum, 2) }).unwrap();
    let four = run(&RunConfig { jobs: Some(4), ..config(Suite::Quantum, 2) }).unwrap();
    assert_eq!(one.deterministic_json(), four.deterministic_json());
}

#[test]
fn dumped_dj_matrix_loads_as_valid() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("dj.txt");
    fs::write(&path, dj_rmatrix(2, &Field::Symbolic).unwrap().dump()).unwrap();
    let cfg = RunConfig { rmatrix: RSource::File(path), ..config(Suite::Rmatrix, 2) };
    let report = run(&cfg).unwrap();
    assert_eq!(report.checks.len(), 1);
    assert!(report.checks[0].verified());
}

#[test]
fn text_and_json_reports() {
    let out = capelli(&["--suite", "rmatrix", "--report", "json"]);
    let json: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(json["summary"]["exit_code"], 0);
    let out = capelli(&["--suite", "rmatrix"]);
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains(RMATRIX_VALIDATION));
}
