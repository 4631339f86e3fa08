use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_infogeom"));
    c.env_remove("INFOGEOM_JOBS").env_remove("INFOGEOM_GRID_NODES");
    c
}

fn write_config(dir: &Path, name: &str, text: &str) -> PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path
}

fn verify(suite: &str, config: &Path, out: &Path, extra: &[&str]) -> Output {
    bin()
        .args(["verify", suite, "--config"])
        .arg(config)
        .arg("--out")
        .arg(out)
        .args(extra)
        .output()
        .unwrap()
}

fn read_report(path: &Path) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn monotonicity_seed_42_hundred_trials_passes() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), "m.json", r#"{"trials": 100, "seed": 42}"#);
    let out = dir.path().join("out");
    let run = verify("monotonicity", &config, &out, &[]);
    assert_eq!(run.status.code(), Some(0), "{}", String::from_utf8_lossy(&run.stderr));
    let report = read_report(&out.join("monotonicity.json"));
    let records = report["records"].as_array().unwrap();
    assert_eq!(records.len(), 100);
    for r in records {
        assert!(r["quantities"]["loss"].as_f64().unwrap() >= -1e-10);
        assert_eq!(r["passed"], true);
    }
    let csv = std::fs::read_to_string(out.join("monotonicity.csv")).unwrap();
    assert_eq!(csv.lines().count(), 101);
    assert!(csv.starts_with("check,trial,seed,inputs_digest,verdict,asserted,passed"));
}

#[test]
fn zero_trials_is_a_schema_error() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), "z.json", r#"{"trials": 0}"#);
    let run = verify("monotonicity", &config, &dir.path().join("out"), &[]);
    assert_eq!(run.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&run.stderr).contains("trials"));
    let ok = write_config(dir.path(), "ok.json", r#"{"trials": 3}"#);
    assert_eq!(
        verify("monotonicity", &ok, &dir.path().join("out"), &["--trials", "0"])
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn malformed_configs_exit_with_a_diagnostic() {
    let dir = tempfile::tempdir().unwrap();
    for (name, text) in [
        ("syntax.json", "{"),
        ("field.json", r#"{"trials": 1, "colour": 1}"#),
        ("model.json", r#"{"model": {"kind": "example"}}"#),
        ("suite.json", r#"{"suite": "chentsov"}"#),
    ] {
        let config = write_config(dir.path(), name, text);
        let run = verify("monotonicity", &config, &dir.path().join("out"), &[]);
        assert_eq!(run.status.code(), Some(2), "{name}");
        assert!(!run.stderr.is_empty());
    }
}

#[test]
fn same_seed_gives_identical_reports() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), "c.json", r#"{"trials": 40, "seed": 9}"#);
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    assert!(verify("contraction", &config, &a, &["--jobs", "1"]).status.success());
    assert!(verify("contraction", &config, &b, &["--jobs", "4"]).status.success());
    for file in ["contraction.csv", "contraction.json"] {
        assert_eq!(
            std::fs::read(a.join(file)).unwrap(),
            std::fs::read(b.join(file)).unwrap(),
            "{file}"
        );
    }
    let c = dir.path().join("c");
    assert!(verify("contraction", &config, &c, &["--seed", "10"]).status.success());
    assert_ne!(
        std::fs::read(a.join("contraction.csv")).unwrap(),
        std::fs::read(c.join("contraction.csv")).unwrap()
    );
}

#[test]
fn euclidean_form_violates_chentsov_with_digest() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(
        dir.path(),
        "e.json",
        r#"{"tensor": {"kind": "euclidean"}, "trials": 20, "seed": 3, "params": {"min_blocks": 2}}"#,
    );
    let run = verify("chentsov", &config, &dir.path().join("out"), &[]);
    assert_eq!(run.status.code(), Some(1));
    let report = read_report(&dir.path().join("out/chentsov.json"));
    let digest = report["records"][0]["inputs_digest"].as_str().unwrap().to_string();
    assert!(String::from_utf8_lossy(&run.stderr).contains(&digest));
    let fisher = write_config(dir.path(), "f.json", r#"{"trials": 20, "seed": 3}"#);
    assert!(verify("chentsov", &fisher, &dir.path().join("out"), &[])
        .status
        .success());
}

#[test]
fn plot_data_extracts_uniqueness_curve() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), "u.json", r#"{"params": {"nodes": 1024, "levels": 10}}"#);
    let out = dir.path().join("out");
    assert!(verify("uniqueness", &config, &out, &[]).status.success());
    let plot = dir.path().join("values.csv");
    let run = bin()
        .arg("plot-data")
        .arg(out.join("uniqueness.json"))
        .arg("values")
        .arg("--out")
        .arg(&plot)
        .output()
        .unwrap();
    assert!(run.status.success());
    let text = std::fs::read_to_string(&plot).unwrap();
    let rows: Vec<f64> = text
        .lines()
        .skip(1)
        .map(|l| l.split(',').nth(1).unwrap().parse().unwrap())
        .collect();
    assert_eq!(rows.len(), 11);
    assert!((rows[10] - 1.0 / 3.0).abs() <= 1e-3);
    assert!(rows
        .windows(2)
        .all(|w| (w[1] - 1.0 / 3.0).abs() <= (w[0] - 1.0 / 3.0).abs()));
}

#[test]
fn plot_data_errors() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), "i.json", r#"{}"#);
    let out = dir.path().join("out");
    assert!(verify("integrability", &config, &out, &[]).status.success());
    let unknown = bin()
        .arg("plot-data")
        .arg(out.join("integrability.json"))
        .arg("nope")
        .output()
        .unwrap();
    assert_eq!(unknown.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&unknown.stderr).contains("available: "));
    let norms = bin()
        .arg("plot-data")
        .arg(out.join("integrability.json"))
        .arg("norms")
        .output()
        .unwrap();
    assert!(norms.status.success());
    assert_eq!(String::from_utf8_lossy(&norms.stdout).lines().count(), 51);

    let empty = write_config(
        dir.path(),
        "empty.json",
        r#"{"suite": "x", "seed": 0, "trials": 1, "config_digest": "", "violations": 0, "records": []}"#,
    );
    let run = bin().arg("plot-data").arg(empty).arg("loss").output().unwrap();
    assert_eq!(run.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&run.stderr).contains("no records"));
}

#[test]
fn tolerance_environment_override() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(
        dir.path(),
        "s.json",
        r#"{"trials": 5, "model": {"kind": "factorized", "params": {"q": {"kind": "bernoulli"}, "r": [0.5, 0.5], "perturbation": 0.5}}}"#,
    );
    let strict = verify("sufficiency", &config, &dir.path().join("a"), &[]);
    assert_eq!(strict.status.code(), Some(1));
    let loose = bin()
        .env("INFOGEOM_TOLERANCE_SUFFICIENCY", "1e3")
        .args(["verify", "sufficiency", "--config"])
        .arg(&config)
        .arg("--out")
        .arg(dir.path().join("b"))
        .output()
        .unwrap();
    assert_eq!(loose.status.code(), Some(0));
    let bad = bin()
        .env("INFOGEOM_GRID_NODES", "one")
        .args(["verify", "uniqueness", "--config"])
        .arg(write_config(dir.path(), "u.json", "{}"))
        .arg("--out")
        .arg(dir.path().join("c"))
        .output()
        .unwrap();
    assert_eq!(bad.status.code(), Some(2));
}

#[test]
fn schema_subcommand_matches_shipped_file() {
    let run = bin().arg("schema").output().unwrap();
    assert!(run.status.success());
    let shipped =
        std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/schema/suite-config.schema.json")).unwrap();
    assert_eq!(String::from_utf8(run.stdout).unwrap(), shipped);
}

#[test]
fn shipped_configs_parse_and_run() {
    let root = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    let dir = tempfile::tempdir().unwrap();
    for entry in std::fs::read_dir(root).unwrap() {
        let path = entry.unwrap().path();
        let config: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
        let suite = config["suite"].as_str().unwrap();
        let run = verify(
            suite,
            &path,
            &dir.path().join(path.file_stem().unwrap()),
            &["--trials", "5"],
        );
        let expected = if path.file_stem().unwrap() == "chentsov-euclidean" {
            1
        } else {
            0
        };
        assert_eq!(run.status.code(), Some(expected), "{}", path.display());
    }
}
