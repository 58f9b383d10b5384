//! End-to-end checks of the `dynregret` binary.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use dynregret::harness::{read_summary, SUMMARY_HEADER};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_dynregret"))
}

fn write_config(dir: &Path, body: &str) -> PathBuf {
    let path = dir.join("exp.toml");
    fs::write(&path, body).unwrap();
    path
}

fn run(config: &Path, out: &Path) -> Output {
    bin().arg("run").arg(config).arg("--output-dir").arg(out).output().unwrap()
}

fn rows(path: &Path) -> Vec<Vec<String>> {
    fs::read_to_string(path)
        .unwrap()
        .lines()
        .map(|l| l.split(',').map(str::to_owned).collect())
        .collect()
}

const MINIMAL: &str = r#"
output_dir = "out"
comparators = [{ type = "fixed_optimum" }]

[scenario]
kind = { type = "stationary" }
horizon = 100
dim = 2

[[algorithms]]
learner = { type = "rls" }
schedule = { kind = "fixed", gamma = 0.9 }
"#;

#[test]
fn minimal_config_writes_one_round_file_and_one_summary_row() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), MINIMAL);
    let out = dir.path().join("out");
    let o = run(&config, &out);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));

    let summary = read_summary(&out.join("summary.csv")).unwrap();
    assert_eq!(summary.len(), 1);
    assert!(summary[0].is_ok());
    assert_eq!(fs::read_to_string(out.join("summary.csv")).unwrap().lines().next(), Some(SUMMARY_HEADER));

    let round_files: Vec<_> = fs::read_dir(&out)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.file_name().unwrap() != "summary.csv")
        .collect();
    assert_eq!(round_files.len(), 1);
    let table = rows(&round_files[0]);
    assert_eq!(table[0].join(","), "t,loss,comparator_loss,cum_regret,eta_t,gamma");
    assert_eq!(table.len(), 101);
    for row in &table[2..] {
        let r: f64 = row[3].parse().unwrap();
        assert!(r.is_finite() && r >= 0.0);
    }

    // The final cumulative regret in the round file is the summary's.
    let last: f64 = table[100][3].parse().unwrap();
    assert!((last - summary[0].final_regret).abs() <= 1e-9);
}

#[test]
fn meta_weight_columns_sum_to_one() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(
        dir.path(),
        r#"
output_dir = "out"
comparators = [{ type = "per_round_minimizer" }]

[scenario]
kind = { type = "random_walk", budget = 3.0 }
horizon = 400
dim = 2

[[algorithms]]
id = "meta_ons"
learner = { type = "meta", base = { type = "newton", case = "exp_concave" }, mixing = "exp_concave", include_gamma_one = true }
"#,
    );
    let out = dir.path().join("out");
    assert!(run(&config, &out).status.success());
    let file = fs::read_dir(&out)
        .unwrap()
        .map(|e| e.unwrap().path())
        .find(|p| p.to_string_lossy().contains("meta_ons"))
        .unwrap();
    let table = rows(&file);
    let first_weight = table[0].iter().position(|h| h.starts_with("weight_")).unwrap();
    assert_eq!(first_weight, 6);
    assert!(table[0].len() > 7);
    for row in &table[1..] {
        let s: f64 = row[first_weight..].iter().map(|x| x.parse::<f64>().unwrap()).sum();
        assert!((s - 1.0).abs() <= 1e-9);
    }
}

#[test]
fn config_errors_exit_with_one() {
    let dir = tempfile::tempdir().unwrap();
    let bad = write_config(dir.path(), &MINIMAL.replace("dim = 2", "dim = 2\ncolour = \"red\""));
    let o = bin().arg("validate").arg(&bad).output().unwrap();
    assert_eq!(o.status.code(), Some(1));
    assert!(!o.stderr.is_empty());

    let o = bin().arg("run").arg(dir.path().join("missing.toml")).output().unwrap();
    assert_eq!(o.status.code(), Some(1));

    let no_algorithms = write_config(
        dir.path(),
        "output_dir = \"o\"\ncomparators = [{ type = \"fixed_optimum\" }]\nalgorithms = []\n[scenario]\nkind = { type = \"stationary\" }\nhorizon = 10\ndim = 1\n",
    );
    assert_eq!(bin().arg("validate").arg(&no_algorithms).output().unwrap().status.code(), Some(1));
}

#[test]
fn validate_accepts_shipped_configs() {
    let configs = Path::new(env!("CARGO_MANIFEST_DIR")).join("configs");
    let mut seen = 0;
    for entry in fs::read_dir(configs).unwrap() {
        let path = entry.unwrap().path();
        let o = bin().arg("validate").arg(&path).output().unwrap();
        assert!(o.status.success(), "{}: {}", path.display(), String::from_utf8_lossy(&o.stderr));
        seen += 1;
    }
    assert!(seen > 0);
}

#[test]
fn fit_reads_a_multi_horizon_summary() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(
        dir.path(),
        &MINIMAL.replace("output_dir = \"out\"", "output_dir = \"out\"\nhorizons = [200, 400, 800, 1600]\nseeds = [1, 2]"),
    );
    let out = dir.path().join("out");
    let o = bin().env("DYNREGRET_WORKERS", "2").arg("run").arg(&config).arg("--output-dir").arg(&out).output().unwrap();
    assert!(o.status.success());
    assert_eq!(read_summary(&out.join("summary.csv")).unwrap().len(), 8);

    let o = bin().arg("fit").arg(out.join("summary.csv")).output().unwrap();
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = String::from_utf8(o.stdout).unwrap();
    assert_eq!(text.lines().count(), 2, "{text}");
}
