use std::process::Command;

use varpot::cli::*;
use varpot::Error;

const CONFIG: &str = r#"
name = "unit"
lower = [-1.5, -1.5, -1.5]
upper = [1.5, 1.5, 1.5]
h = 0.125

[exponent]
rule = "bump"
base = 2.0
height = 0.5
center = [0.0, 0.0, 0.0]
radius = 1.0

[family]
count = 3
seed = 11

[tolerances]
poisson_residual = 0.1

[[checks]]
kind = "norm"

[[checks]]
kind = "solve"
problem = "poisson"
space = "whole"

[[checks]]
kind = "estimate"
estimate = "whole-poisson"
arm = "weak"

[[checks]]
kind = "acceptance"
criteria = [5]
"#;

fn config() -> ExperimentConfig {
    ExperimentConfig::from_toml_str(CONFIG).unwrap()
}

#[test]
fn empty_check_list_gives_empty_tables_and_provenance() {
    let mut c = config();
    c.checks.clear();
    let b = run(&c).unwrap();
    assert!(b.tables.is_empty() && b.binaries.is_empty());
    assert!(b.passed());
    assert_eq!(b.exit_code(), EXIT_PASS);
    let p = &b.summary.provenance;
    assert_eq!(p.config_sha256.len(), 64);
    assert_eq!(p.version, env!("CARGO_PKG_VERSION"));
    assert_eq!(p.seed, 11);
    assert!(b.summary.criteria.iter().all(|c| c.status == CriterionStatus::NotRun));
}

#[test]
fn runs_are_deterministic() {
    let (a, b) = (run(&config()).unwrap(), run(&config()).unwrap());
    assert_eq!(a.tables, b.tables);
    assert_eq!(a.binaries, b.binaries);
    assert_eq!(a.summary_json(), b.summary_json());
}

#[test]
fn every_criterion_appears_once_and_rows_carry_provenance_columns() {
    let b = run(&config()).unwrap();
    let ids: Vec<u8> = b.summary.criteria.iter().map(|c| c.id).collect();
    assert_eq!(ids, (1..=11).collect::<Vec<u8>>());
    for c in &b.summary.criteria {
        let expected = if c.id == 5 { CriterionStatus::Pass } else { CriterionStatus::NotRun };
        assert_eq!(c.status, expected, "{c:?}");
    }
    assert_eq!(b.summary.checks.len(), 4);
    assert!(b.passed(), "{}", b.summary_json());
    for name in ["norms.csv", "residuals.csv", "estimates.csv", "acceptance.csv"] {
        let table = &b.tables[name];
        let mut lines = table.lines();
        let header: Vec<&str> = lines.next().unwrap().split(',').collect();
        for col in ["experiment", "h", "exponent", "seed"] {
            assert!(header.contains(&col), "{name} lacks {col}");
        }
        let at = |col: &str| header.iter().position(|c| *c == col).unwrap();
        let mut rows = 0;
        for line in lines {
            // Exponent ids of bump rules are quoted because they contain commas.
            let fields = split_csv(line);
            assert_eq!(fields.len(), header.len(), "{name}: {line}");
            assert_eq!(fields[at("experiment")], "unit");
            assert!(fields[at("h")].parse::<f64>().is_ok());
            rows += 1;
        }
        assert!(rows > 0, "{name} is empty");
    }
    assert!(b.tables["norms.csv"].contains("\"bump(2,0.5,1)\""));
    assert!(b.binaries.contains_key("solution-poisson-whole.bin"));
}

fn split_csv(line: &str) -> Vec<String> {
    let mut out = vec![String::new()];
    let mut quoted = false;
    for ch in line.chars() {
        match ch {
            '"' => quoted = !quoted,
            ',' if !quoted => out.push(String::new()),
            c => out.last_mut().unwrap().push(c),
        }
    }
    out
}

#[test]
fn invalid_config_lists_every_offending_field() {
    let text = CONFIG
        .replace("h = 0.125", "h = -1.0")
        .replace("name = \"unit\"", "name = \"a b\"")
        .replace("criteria = [5]", "criteria = [5, 5, 40]");
    let err = ExperimentConfig::from_toml_str(&text).unwrap_err();
    let Error::Config(fields) = err else { panic!("{err:?}") };
    for needle in ["name", "h:", "listed twice", "unknown criterion 40"] {
        assert!(fields.iter().any(|f| f.contains(needle)), "{needle} missing from {fields:?}");
    }
    let mut c = config();
    c.tolerances.poisson_residual = 0.0;
    c.checks.push(CheckSpec::Estimate {
        estimate: varpot::solvers::EstimateId::BoundaryOperator,
        arm: varpot::solvers::Arm::Strong,
    });
    let Err(Error::Config(fields)) = run(&c) else { panic!() };
    assert_eq!(fields.len(), 2, "{fields:?}");
    assert!(matches!(ExperimentConfig::from_toml_str("name = 3"), Err(Error::Config(_))));
    assert!(matches!(ExperimentConfig::from_toml_str(&format!("bogus = 1\n{CONFIG}")), Err(Error::Config(_))));
}

#[test]
fn config_round_trips_and_hash_tracks_content() {
    let c = config();
    let again = ExperimentConfig::from_toml_str(&c.to_toml_string()).unwrap();
    assert_eq!(again, c);
    let mut moved = c.clone();
    moved.output = Some("elsewhere".into());
    assert_eq!(moved.hash(), c.hash());
    let mut reseeded = c.clone();
    reseeded.family.seed += 1;
    assert_ne!(reseeded.hash(), c.hash());
    assert_eq!(output_dir(&moved, Some("flag".into())), Some("flag".into()));
}

#[test]
fn shipped_configs_validate() {
    let root = concat!(env!("CARGO_MANIFEST_DIR"), "/../../configs");
    for name in ["demo.toml", "half.toml", "acceptance.toml"] {
        let c = ExperimentConfig::from_file(std::path::Path::new(&format!("{root}/{name}"))).unwrap();
        assert!(!c.checks.is_empty(), "{name}");
    }
    let preset = ExperimentConfig::acceptance_preset();
    let shipped = ExperimentConfig::from_file(std::path::Path::new(&format!("{root}/acceptance.toml"))).unwrap();
    assert_eq!(preset.checks, shipped.checks);
}

#[test]
fn bundle_writes_its_files() {
    let dir = tempfile::tempdir().unwrap();
    let b = run(&config()).unwrap();
    b.write_to(dir.path()).unwrap();
    for name in b.tables.keys().chain(b.binaries.keys()) {
        assert!(dir.path().join(name).is_file(), "{name}");
    }
    let json: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("summary.json")).unwrap()).unwrap();
    assert_eq!(json["criteria"].as_array().unwrap().len(), 11);
    assert_eq!(json["criteria"][0]["status"], "not-run");
}

#[test]
fn binary_exit_codes() {
    let exe = env!("CARGO_BIN_EXE_varpot");
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.toml");
    std::fs::write(&bad, CONFIG.replace("h = 0.125", "h = 0.0")).unwrap();
    let out = Command::new(exe).arg("run").arg(&bad).env_remove(OUTPUT_ENV).output().unwrap();
    assert_eq!(out.status.code(), Some(EXIT_CONFIG));

    let out = Command::new(exe).args(["kernel-check", "--points", "5"]).env_remove(OUTPUT_ENV).output().unwrap();
    assert_eq!(out.status.code(), Some(EXIT_PASS));
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert!(stdout.starts_with("experiment,check,value,bound,passed,h,exponent,seed"));

    let good = dir.path().join("good.toml");
    std::fs::write(&good, CONFIG).unwrap();
    let target = dir.path().join("from-env");
    let out = Command::new(exe)
        .args(["solve", "poisson", "--space", "whole", "--config"])
        .arg(&good)
        .env(OUTPUT_ENV, &target)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(EXIT_PASS));
    assert!(target.join("residuals.csv").is_file());

    // A tolerance no solve can meet makes the run fail with code 1.
    std::fs::write(&good, CONFIG.replace("poisson_residual = 0.1", "poisson_residual = 1e-12")).unwrap();
    let out = Command::new(exe)
        .args(["solve", "poisson", "--config"])
        .arg(&good)
        .env_remove(OUTPUT_ENV)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(EXIT_FAIL));
}
