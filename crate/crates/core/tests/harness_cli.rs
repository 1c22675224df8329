use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use dsge_pipelines::harness::RunReport;
use dsge_pipelines::ml::synthetic::Blobs;
use dsge_pipelines::PIPELINE_GRAMMAR;
use tempfile::TempDir;

fn cli() -> Command {
    Command::new(env!("CARGO_BIN_EXE_dsge-pipelines"))
}

fn check(output: Output) -> Output {
    assert!(
        output.status.success(),
        "exit {:?}\nstdout:\n{}\nstderr:\n{}",
        output.status,
        String::from_utf8_lossy(&output.stdout),
        String::from_utf8_lossy(&output.stderr)
    );
    output
}

fn write_dataset(dir: &Path) -> PathBuf {
    let path = dir.join("blobs.csv");
    Blobs { n_samples: 120, ..Blobs::default() }.generate(7).write_csv(&path, "class").unwrap();
    path
}

fn run_into(dir: &Path, dataset: &Path, out: &str, extra: &[&str]) -> PathBuf {
    let out = dir.join(out);
    let mut cmd = cli();
    cmd.args(["run", "--label", "class", "--seed", "4", "--population", "8", "--generations", "3"])
        .args(["--elite-count", "1", "--top-k", "4"])
        .arg("--dataset")
        .arg(dataset)
        .arg("--out")
        .arg(&out)
        .args(extra);
    check(cmd.output().unwrap());
    out
}

#[test]
fn run_writes_the_report_files() {
    let tmp = TempDir::new().unwrap();
    let data = write_dataset(tmp.path());
    let out = run_into(tmp.path(), &data, "out", &[]);
    for name in ["report.json", "generations.csv", "best_pipeline.json"] {
        assert!(out.join(name).is_file(), "{name} missing");
    }
    let report = RunReport::read(&out.join("report.json")).unwrap();
    assert_eq!(report.generations.len(), 3);
    assert!(report.generations.iter().enumerate().all(|(i, g)| g.generation == i));

    let mut csv = csv::Reader::from_path(out.join("generations.csv")).unwrap();
    let headers = csv.headers().unwrap().clone();
    let best_col = headers.iter().position(|h| h == "best").unwrap();
    for (record, generation) in csv.records().zip(&report.generations) {
        let best: f64 = record.unwrap()[best_col].parse().unwrap();
        let max = generation.fitnesses.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        assert_eq!(best, max);
    }

    let best: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("best_pipeline.json")).unwrap()).unwrap();
    assert_eq!(best["phenotype"], serde_json::json!(report.best.phenotype.text()));
}

#[test]
fn repeated_runs_are_identical_apart_from_execution_details() {
    let tmp = TempDir::new().unwrap();
    let data = write_dataset(tmp.path());
    let a = run_into(tmp.path(), &data, "a", &["--workers", "1"]);
    let b = run_into(tmp.path(), &data, "b", &["--workers", "3"]);
    let read = |dir: &Path| RunReport::read(&dir.join("report.json")).unwrap().deterministic_json();
    assert_eq!(read(&a), read(&b));
    assert_eq!(std::fs::read(a.join("generations.csv")).unwrap(), std::fs::read(b.join("generations.csv")).unwrap());
}

#[test]
fn replay_of_a_fresh_report_matches() {
    let tmp = TempDir::new().unwrap();
    let data = write_dataset(tmp.path());
    let out = run_into(tmp.path(), &data, "out", &[]);
    let output = check(cli().arg("replay").arg("--report").arg(out.join("report.json")).output().unwrap());
    let report = RunReport::read(&out.join("report.json")).unwrap();
    let stdout = String::from_utf8_lossy(&output.stdout);
    assert!(stdout.contains(&report.best.phenotype.text()), "{stdout}");
}

#[test]
fn corrupted_codon_is_reported_as_divergence() {
    let tmp = TempDir::new().unwrap();
    let data = write_dataset(tmp.path());
    let out = run_into(tmp.path(), &data, "out", &[]);
    let path = out.join("report.json");
    let mut json: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    let codon = &mut json["best"]["genotype"]["codons"]["pipeline"][0];
    *codon = serde_json::json!(1 - codon.as_u64().unwrap());
    std::fs::write(&path, serde_json::to_string_pretty(&json).unwrap()).unwrap();

    let output = cli().arg("replay").arg("--report").arg(&path).output().unwrap();
    assert!(!output.status.success());
    let stderr = String::from_utf8_lossy(&output.stderr);
    assert!(stderr.contains("phenotype diverges at token 0"), "{stderr}");
}

#[test]
fn different_grammar_names_the_first_divergent_token() {
    let tmp = TempDir::new().unwrap();
    let data = write_dataset(tmp.path());
    let out = run_into(tmp.path(), &data, "out", &[]);
    let other = tmp.path().join("renamed.bnf");
    std::fs::write(&other, PIPELINE_GRAMMAR.replace("classifier:", "classifier:alt_")).unwrap();

    let report = RunReport::read(&out.join("report.json")).unwrap();
    let tokens = report.best.phenotype.tokens();
    let position = tokens.iter().position(|t| t.starts_with("classifier:")).unwrap();

    let output =
        cli().arg("replay").arg("--report").arg(out.join("report.json")).arg("--grammar").arg(&other).output().unwrap();
    assert!(!output.status.success());
    let stderr = String::from_utf8_lossy(&output.stderr);
    let expected = format!("token {position}: stored `{}`", tokens[position]);
    assert!(stderr.contains(&expected), "{stderr}");
}

#[test]
fn config_file_values_are_used_and_flags_override_them() {
    let tmp = TempDir::new().unwrap();
    let data = write_dataset(tmp.path());
    let config = tmp.path().join("run.toml");
    std::fs::write(
        &config,
        format!(
            "dataset = {:?}\nlabel = \"class\"\nseed = 9\npopulation = 6\ngenerations = 2\nelite_count = 1\nouter_fold = \"1/5\"\n",
            data.to_str().unwrap()
        ),
    )
    .unwrap();
    let out = tmp.path().join("out");
    check(
        cli()
            .arg("run")
            .arg("--config")
            .arg(&config)
            .arg("--generations")
            .arg("4")
            .arg("--out")
            .arg(&out)
            .output()
            .unwrap(),
    );
    let report = RunReport::read(&out.join("report.json")).unwrap();
    assert_eq!(report.master_seed, 9);
    assert_eq!(report.config.evolution.population_size, 6);
    assert_eq!(report.config.evolution.max_generations, 4);
    assert_eq!(report.partition.outer, "fold 1/5");
    assert_eq!(report.partition.test.len(), 24);
}

#[test]
fn bad_input_exits_non_zero() {
    let tmp = TempDir::new().unwrap();
    let data = write_dataset(tmp.path());
    let bad_config = tmp.path().join("bad.toml");
    std::fs::write(&bad_config, "populaton = 3\n").unwrap();
    let cases: Vec<Vec<std::ffi::OsString>> = vec![
        vec!["run".into(), "--config".into(), bad_config.into()],
        vec!["run".into(), "--dataset".into(), tmp.path().join("missing.csv").into(), "--label".into(), "class".into()],
        vec!["run".into(), "--dataset".into(), data.clone().into(), "--label".into(), "nope".into()],
        vec![
            "run".into(),
            "--dataset".into(),
            data.into(),
            "--label".into(),
            "class".into(),
            "--inner-k".into(),
            "1".into(),
        ],
        vec!["grammar-check".into(), "--grammar".into(), tmp.path().join("missing.bnf").into()],
    ];
    for args in cases {
        let output = cli().args(&args).output().unwrap();
        assert!(!output.status.success(), "{args:?} should fail");
        assert!(!output.stderr.is_empty());
    }
}

#[test]
fn grammar_check_prints_the_combination_count() {
    let tmp = TempDir::new().unwrap();
    let grammar = tmp.path().join("pipeline.bnf");
    std::fs::write(&grammar, PIPELINE_GRAMMAR).unwrap();
    let output = check(cli().arg("grammar-check").arg("--grammar").arg(&grammar).output().unwrap());
    assert!(String::from_utf8_lossy(&output.stdout).contains("combinations: 450"));

    std::fs::write(&grammar, "<s> ::= a <s> | a\n").unwrap();
    let output = check(cli().arg("grammar-check").arg("--grammar").arg(&grammar).output().unwrap());
    assert!(String::from_utf8_lossy(&output.stdout).contains("combinations: non-finite"));
}
