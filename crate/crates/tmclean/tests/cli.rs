//! End-to-end tests of the `tmclean` binary: exit codes, output files,
//! and config/flag interaction.

mod common;

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tmclean::ingestion;

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_tmclean")
}

fn run(args: &[&str]) -> Output {
    Command::new(bin()).args(args).output().expect("binary runs")
}

struct Fixture {
    _dir: tempfile::TempDir,
    labeled: PathBuf,
    glossary: PathBuf,
    root: PathBuf,
}

fn fixture(n: usize, seed: u64) -> Fixture {
    let dir = tempfile::tempdir().unwrap();
    let corpus = common::synthetic_corpus(n, 0.3, seed);
    let labeled = dir.path().join("data.tsv");
    ingestion::write_labeled_tsv(&labeled, &corpus.units).unwrap();
    let glossary = dir.path().join("glossary.tsv");
    common::write_glossary_tsv(&glossary);
    let root = dir.path().to_path_buf();
    Fixture { _dir: dir, labeled, glossary, root }
}

fn glossary_args(f: &Fixture) -> Vec<String> {
    vec![
        "--glossary".into(),
        f.glossary.display().to_string(),
        "--glossary-src".into(),
        "en".into(),
        "--glossary-tgt".into(),
        "de".into(),
        "--n-best".into(),
        "4".into(),
    ]
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).to_string()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).to_string()
}

#[test]
fn stats_reports_class_counts() {
    let f = fixture(60, 1);
    let out = run(&["stats", f.labeled.to_str().unwrap()]);
    assert!(out.status.success(), "{}", stderr(&out));
    let text = stdout(&out);
    assert!(text.contains("class\tcount"));
    assert!(text.contains("total\t60"));
    assert!(text.contains("en-de\t60") || text.contains("en-de"));
}

#[test]
fn unknown_flag_is_a_usage_error() {
    let out = run(&["stats", "--bogus-flag", "x.tsv"]);
    assert_eq!(out.status.code(), Some(1), "{}", stderr(&out));
}

#[test]
fn missing_input_is_reported() {
    let out = run(&["stats", "/nonexistent/input.tsv"]);
    assert_ne!(out.status.code(), Some(0));
}

#[test]
fn malformed_data_exits_2_in_strict_mode() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.tsv");
    std::fs::write(&bad, "u1\ten\tde\tonly four columns\n").unwrap();
    let out = run(&["stats", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2), "{}", stderr(&out));
}

#[test]
fn mt_schema_without_provider_exits_1() {
    let f = fixture(30, 2);
    let model = f.root.join("model.json");
    let out = run(&[
        "train",
        f.labeled.to_str().unwrap(),
        "--model",
        model.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(1), "{}", stderr(&out));
    assert!(stderr(&out).contains("MT"));
}

#[test]
fn train_predict_evaluate_clean_round_trip() {
    let f = fixture(150, 3);
    let gargs = glossary_args(&f);
    let gargs: Vec<&str> = gargs.iter().map(String::as_str).collect();
    let model = f.root.join("model.json");

    let mut args = vec!["train", f.labeled.to_str().unwrap(), "--model", model.to_str().unwrap(), "--trees", "30", "--seed", "5"];
    args.extend(&gargs);
    let out = run(&args);
    assert!(out.status.success(), "{}", stderr(&out));
    assert!(model.exists());

    // predict over the same file, treating it as labeled input
    let predictions = f.root.join("pred.tsv");
    let mut args = vec![
        "predict",
        f.labeled.to_str().unwrap(),
        "--model",
        model.to_str().unwrap(),
        "--out",
        predictions.to_str().unwrap(),
        "--labeled",
    ];
    args.extend(&gargs);
    let out = run(&args);
    assert!(out.status.success(), "{}", stderr(&out));
    let pred_text = std::fs::read_to_string(&predictions).unwrap();
    assert!(pred_text.starts_with("id\tpredicted\tp_0\tp_1"));
    assert_eq!(pred_text.lines().count(), 151);

    // evaluate emits the per-class table and a JSON report
    let report = f.root.join("report.json");
    let mut args = vec![
        "evaluate",
        f.labeled.to_str().unwrap(),
        "--model",
        model.to_str().unwrap(),
        "--out",
        report.to_str().unwrap(),
    ];
    args.extend(&gargs);
    let out = run(&args);
    assert!(out.status.success(), "{}", stderr(&out));
    assert!(stdout(&out).contains("weighted"));
    let parsed: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&report).unwrap()).unwrap();
    assert!(parsed.get("weighted_f1").is_some());

    // clean an unlabeled copy of the same memory
    let tm = f.root.join("tm.tsv");
    let units: Vec<_> = ingestion::read_labeled_tsv(&f.labeled, ingestion::ReadMode::Strict)
        .unwrap()
        .records
        .into_iter()
        .map(|lu| lu.unit)
        .collect();
    ingestion::write_unlabeled_tsv(&tm, &units).unwrap();
    let kept = f.root.join("kept.tsv");
    let rejected = f.root.join("rejected.tsv");
    let summary = f.root.join("summary.json");
    let mut args = vec![
        "clean",
        tm.to_str().unwrap(),
        "--model",
        model.to_str().unwrap(),
        "--kept",
        kept.to_str().unwrap(),
        "--rejected",
        rejected.to_str().unwrap(),
        "--summary",
        summary.to_str().unwrap(),
    ];
    args.extend(&gargs);
    let out = run(&args);
    assert!(out.status.success(), "{}", stderr(&out));
    let kept_units = ingestion::read_unlabeled_tsv(&kept, ingestion::ReadMode::Strict).unwrap();
    let rejected_units =
        ingestion::read_unlabeled_tsv(&rejected, ingestion::ReadMode::Strict).unwrap();
    assert_eq!(kept_units.records.len() + rejected_units.records.len(), units.len());
    let parsed: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&summary).unwrap()).unwrap();
    assert_eq!(parsed["input_count"], 150);
}

#[test]
fn corrupt_model_file_exits_2() {
    let f = fixture(30, 4);
    let model = f.root.join("model.json");
    std::fs::write(&model, "{\"format_version\": 1, \"checksum\": \"00\", \"model\": {}}").unwrap();
    let out = run(&[
        "evaluate",
        f.labeled.to_str().unwrap(),
        "--model",
        model.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2), "{}", stderr(&out));
}

#[test]
fn extract_writes_feature_matrix_with_header() {
    let f = fixture(25, 6);
    let gargs = glossary_args(&f);
    let gargs: Vec<&str> = gargs.iter().map(String::as_str).collect();
    let matrix = f.root.join("matrix.tsv");
    let mut args = vec![
        "extract",
        f.labeled.to_str().unwrap(),
        "--out",
        matrix.to_str().unwrap(),
        "--labeled",
    ];
    args.extend(&gargs);
    let out = run(&args);
    assert!(out.status.success(), "{}", stderr(&out));
    let text = std::fs::read_to_string(&matrix).unwrap();
    let header = text.lines().next().unwrap();
    assert!(header.starts_with("id\tlabel\tratio_words\t"));
    assert!(header.ends_with("punctuation_similarity"));
    assert_eq!(text.lines().count(), 26);
}

#[test]
fn cv_with_config_file_and_flag_override() {
    let f = fixture(120, 7);
    let config_path = f.root.join("config.json");
    let config = serde_json::json!({
        "mt": {
            "mode": "glossary",
            "glossary_path": f.glossary.display().to_string(),
            "source_lang": "en",
            "target_lang": "de"
        },
        "n_best": 4,
        "n_trees": 20,
        "repetitions": 2,
        "seed": 1
    });
    std::fs::write(&config_path, serde_json::to_string_pretty(&config).unwrap()).unwrap();
    let report_a = f.root.join("a.json");
    let report_b = f.root.join("b.json");
    let base = |out: &Path, seed: &str| {
        run(&[
            "cv",
            f.labeled.to_str().unwrap(),
            "--config",
            config_path.to_str().unwrap(),
            "--out",
            out.to_str().unwrap(),
            "--seed",
            seed,
        ])
    };
    let out = base(&report_a, "1");
    assert!(out.status.success(), "{}", stderr(&out));
    let out = base(&report_b, "2");
    assert!(out.status.success(), "{}", stderr(&out));
    // the --seed flag overrides the config seed, so reports must differ
    assert_ne!(std::fs::read(&report_a).unwrap(), std::fs::read(&report_b).unwrap());
    let parsed: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&report_a).unwrap()).unwrap();
    assert_eq!(parsed["repetitions"].as_array().unwrap().len(), 2);
}

#[test]
fn config_with_unknown_key_exits_1() {
    let f = fixture(20, 8);
    let config_path = f.root.join("config.json");
    std::fs::write(&config_path, "{\"no_such_option\": true}").unwrap();
    let out = run(&[
        "stats",
        f.labeled.to_str().unwrap(),
        "--config",
        config_path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(1), "{}", stderr(&out));
}

#[test]
fn lenient_mode_skips_bad_rows_with_warning() {
    let f = fixture(10, 9);
    let mut content = std::fs::read_to_string(&f.labeled).unwrap();
    content.push_str("broken row without enough columns\n");
    let mixed = f.root.join("mixed.tsv");
    std::fs::write(&mixed, content).unwrap();
    let out = run(&["stats", mixed.to_str().unwrap(), "--lenient"]);
    assert!(out.status.success(), "{}", stderr(&out));
    assert!(stderr(&out).contains("skipped"));
    assert!(stdout(&out).contains("total\t10"));
}

#[test]
fn clean_reads_tmx_input() {
    let f = fixture(40, 10);
    let gargs = glossary_args(&f);
    let gargs: Vec<&str> = gargs.iter().map(String::as_str).collect();
    let model = f.root.join("model.json");
    let mut args = vec!["train", f.labeled.to_str().unwrap(), "--model", model.to_str().unwrap(), "--trees", "20"];
    args.extend(&gargs);
    assert!(run(&args).status.success());

    let units: Vec<_> = ingestion::read_labeled_tsv(&f.labeled, ingestion::ReadMode::Strict)
        .unwrap()
        .records;
    let mut tmx = String::from("<?xml version=\"1.0\"?>\n<tmx version=\"1.4\"><body>\n");
    for lu in units.iter().take(12) {
        tmx.push_str(&format!(
            "<tu tuid=\"{}\"><tuv xml:lang=\"en\"><seg>{}</seg></tuv><tuv xml:lang=\"de\"><seg>{}</seg></tuv></tu>\n",
            lu.unit.id, lu.unit.source_text, lu.unit.target_text
        ));
    }
    tmx.push_str("</body></tmx>\n");
    let tmx_path = f.root.join("memory.tmx");
    std::fs::write(&tmx_path, tmx).unwrap();

    let kept = f.root.join("kept.tsv");
    let rejected = f.root.join("rejected.tsv");
    let mut args = vec![
        "clean",
        tmx_path.to_str().unwrap(),
        "--model",
        model.to_str().unwrap(),
        "--kept",
        kept.to_str().unwrap(),
        "--rejected",
        rejected.to_str().unwrap(),
        "--source-lang",
        "en",
        "--target-lang",
        "de",
    ];
    args.extend(&gargs);
    let out = run(&args);
    assert!(out.status.success(), "{}", stderr(&out));
    let kept_n = ingestion::read_unlabeled_tsv(&kept, ingestion::ReadMode::Strict)
        .unwrap()
        .records
        .len();
    let rejected_n = ingestion::read_unlabeled_tsv(&rejected, ingestion::ReadMode::Strict)
        .unwrap()
        .records
        .len();
    assert_eq!(kept_n + rejected_n, 12);
}
