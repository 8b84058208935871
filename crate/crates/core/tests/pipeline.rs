use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use bilanz::pipeline::{
    emit, emit_report, run, OntologyOutput, PipelineConfig, PipelineError, ReportFormat,
};
use bilanz::scoring::Zone;
use bilanz::statement::{write_statement, Format};
use bilanz::synthetic;

fn data(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("data")
        .join(name)
}

fn config(inputs: Vec<PathBuf>, out: &Path) -> PipelineConfig {
    PipelineConfig {
        inputs,
        out_dir: out.to_path_buf(),
        report_formats: BTreeSet::from([ReportFormat::Json, ReportFormat::Csv]),
        ..PipelineConfig::default()
    }
}

fn write_corpus(dir: &Path, firms: usize, periods: usize) -> PathBuf {
    let input = dir.join("in");
    std::fs::create_dir_all(&input).unwrap();
    for stmt in synthetic::corpus(firms, periods, 11) {
        let name = format!("{}_{}.json", stmt.firm_id, stmt.period.unwrap());
        std::fs::write(input.join(name), write_statement(&stmt, Format::Json)).unwrap();
    }
    input
}

#[test]
fn one_gray_firm() {
    let tmp = tempfile::tempdir().unwrap();
    let out = run(&config(vec![data("gray_firm.json")], tmp.path())).unwrap();
    let firm = &out.report.firms[0];
    assert!((firm.z.unwrap() - 2.029).abs() < 1e-12);
    assert_eq!(firm.zone, Some(Zone::Gray));
    assert_eq!(firm.bankrupt_95_flag, Some(true));
    assert_eq!(out.report.zone_counts[&Zone::Gray], 1);
    assert_eq!(out.report.exit_code(), 0);
}

#[test]
fn no_inputs_parse() {
    let tmp = tempfile::tempdir().unwrap();
    let bad = tmp.path().join("bad.csv");
    std::fs::write(&bad, "not,a,statement\nx,y,z\n").unwrap();
    let err = run(&config(vec![bad], &tmp.path().join("out"))).unwrap_err();
    assert!(matches!(err, PipelineError::NoStatements(1)), "{err}");
    let empty_dir = tmp.path().join("empty");
    std::fs::create_dir(&empty_dir).unwrap();
    assert!(matches!(
        run(&config(vec![empty_dir], &tmp.path().join("out"))),
        Err(PipelineError::NoStatements(0))
    ));
}

#[test]
fn table1_without_supplementals() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = config(vec![data("table1_feb2010.csv")], tmp.path());
    let out = run(&cfg).unwrap();
    let firm = &out.report.firms[0];
    assert_eq!(firm.key, "table1@2010-02");
    assert!(firm.z.is_none());
    assert!(
        firm.errors.iter().any(|e| e.contains("missing input")),
        "{:?}",
        firm.errors
    );
    assert!(firm.validation.passed);
    assert!(!out.report.mining.performed);
    assert!(out.report.rules.is_empty());
    assert_eq!(out.report.exit_code(), 1);

    emit(&out, &cfg).unwrap();
    let json: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(tmp.path().join("report.json")).unwrap())
            .unwrap();
    assert_eq!(json["rules"], serde_json::json!([]));
    assert_eq!(
        std::fs::read_to_string(tmp.path().join("rules.jsonl")).unwrap(),
        ""
    );
    assert!(tmp.path().join("ontology.owl").exists());
}

#[test]
fn book_equity_fallback_needs_the_other_figures() {
    // table 1 lacks sales and EBIT, so the fallback alone cannot score it
    let tmp = tempfile::tempdir().unwrap();
    let mut cfg = config(vec![data("table1_feb2010.csv")], tmp.path());
    cfg.x4_fallback = true;
    let out = run(&cfg).unwrap();
    assert!(out.report.firms[0].errors[0].contains("missing input"));
}

#[test]
fn every_input_is_accounted_for() {
    let tmp = tempfile::tempdir().unwrap();
    let input = write_corpus(tmp.path(), 4, 2);
    std::fs::write(
        input.join("zz_broken.csv"),
        "name,category,amount\nCash,Nowhere,1\n",
    )
    .unwrap();
    let out = run(&config(
        vec![input, data("table1_feb2010.csv")],
        &tmp.path().join("out"),
    ))
    .unwrap();
    let r = &out.report;
    assert_eq!(r.firms.len() + r.unparsed.len(), 10);
    assert_eq!(r.unparsed.len(), 1);
    assert!(r.unparsed[0].error.contains("Nowhere"));
    assert_eq!(r.firms.iter().filter(|f| f.scored()).count(), 8);
    assert_eq!(r.mining.firms_mined, 8);
    let keys: BTreeSet<_> = r.firms.iter().map(|f| f.key.clone()).collect();
    assert_eq!(keys.len(), r.firms.len());
    assert_eq!(r.exit_code(), 1);
}

fn parse_or_empty(v: &serde_json::Value) -> String {
    match v {
        serde_json::Value::Null => String::new(),
        serde_json::Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

fn same_number(csv: &str, json: &serde_json::Value) -> bool {
    match json.as_f64() {
        Some(j) => csv.parse::<f64>().ok() == Some(j),
        None => csv.is_empty() && json.is_null(),
    }
}

#[test]
fn json_and_csv_reports_agree() {
    let tmp = tempfile::tempdir().unwrap();
    let input = write_corpus(tmp.path(), 6, 2);
    let cfg = config(vec![input], &tmp.path().join("out"));
    let out = run(&cfg).unwrap();
    emit_report(&out.report, &cfg.report_formats, &cfg.out_dir).unwrap();

    let json: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(cfg.out_dir.join("report.json")).unwrap())
            .unwrap();
    let mut reader = csv::Reader::from_path(cfg.out_dir.join("report.csv")).unwrap();
    let header = reader.headers().unwrap().clone();
    let rows: Vec<csv::StringRecord> = reader.records().map(Result::unwrap).collect();
    let firms = json["firms"].as_array().unwrap();
    assert_eq!(rows.len(), firms.len());
    let col = |row: &csv::StringRecord, name: &str| {
        row[header.iter().position(|h| h == name).unwrap()].to_string()
    };
    for (row, firm) in rows.iter().zip(firms) {
        for name in ["key", "firm_id", "period", "zone"] {
            assert_eq!(col(row, name), parse_or_empty(&firm[name]), "{name}");
        }
        for (i, x) in ["x1", "x2", "x3", "x4", "x5"].iter().enumerate() {
            assert!(
                same_number(
                    &col(row, x),
                    &firm["ratios"][["x1", "x2", "x3", "x4", "x5"][i]]
                ),
                "{x}"
            );
        }
        assert!(same_number(&col(row, "z"), &firm["z"]));
        assert!(same_number(&col(row, "cluster"), &firm["cluster"]));
        assert_eq!(
            col(row, "bankrupt_95_flag"),
            parse_or_empty(&firm["bankrupt_95_flag"])
        );
        assert_eq!(
            col(row, "validation_passed"),
            firm["validation"]["passed"].to_string()
        );
        let matched = col(row, "matched_rules");
        let n = if matched.is_empty() {
            0
        } else {
            matched.split(';').count()
        };
        assert_eq!(n, firm["matched_rules"].as_array().unwrap().len());
    }
}

#[test]
fn reruns_are_byte_identical() {
    let tmp = tempfile::tempdir().unwrap();
    let input = write_corpus(tmp.path(), 5, 3);
    let mut snapshots = Vec::new();
    for (i, mode) in [OntologyOutput::PerFirm, OntologyOutput::PerFirm]
        .iter()
        .enumerate()
    {
        let mut cfg = config(vec![input.clone()], &tmp.path().join(format!("out{i}")));
        cfg.ontology = *mode;
        let out = run(&cfg).unwrap();
        assert_eq!(out.ontologies.len(), 15);
        let files: Vec<(String, Vec<u8>)> = emit(&out, &cfg)
            .unwrap()
            .into_iter()
            .map(|p| {
                (
                    p.strip_prefix(&cfg.out_dir).unwrap().display().to_string(),
                    std::fs::read(p).unwrap(),
                )
            })
            .collect();
        snapshots.push(files);
    }
    assert_eq!(snapshots[0], snapshots[1]);
}

#[test]
fn growth_feature_appears_for_later_periods() {
    let tmp = tempfile::tempdir().unwrap();
    let input = write_corpus(tmp.path(), 3, 3);
    let out = run(&config(vec![input], &tmp.path().join("out"))).unwrap();
    let csv = &out.transactions_csv;
    let first = csv
        .lines()
        .find(|l| l.starts_with("firm00@2008-12"))
        .unwrap();
    let later = csv
        .lines()
        .find(|l| l.starts_with("firm00@2009-12"))
        .unwrap();
    assert!(!first.contains("ASSET_GROWTH="));
    assert!(later.contains("ASSET_GROWTH="));
}

#[test]
fn scope_restricts_mining() {
    let tmp = tempfile::tempdir().unwrap();
    let input = write_corpus(tmp.path(), 4, 1);
    let mut cfg = config(
        vec![input, data("table1_feb2010.csv")],
        &tmp.path().join("out"),
    );
    cfg.scope = Some("Assets".into());
    let all = run(&cfg).unwrap();
    assert_eq!(all.report.mining.firms_mined, 4);

    // only table 1 has a "Retirement" item, and it is not scorable
    cfg.scope = Some("Retirement".into());
    let none = run(&cfg).unwrap();
    assert!(!none.report.mining.performed);
    assert!(none.report.rules.is_empty());

    cfg.scope = Some("NoSuchClass".into());
    assert!(matches!(run(&cfg), Err(PipelineError::Scope(_))));
}

#[test]
fn k_larger_than_corpus_is_clamped() {
    let tmp = tempfile::tempdir().unwrap();
    let input = write_corpus(tmp.path(), 2, 1);
    let mut cfg = config(vec![input], &tmp.path().join("out"));
    cfg.mining.k_clusters = 5;
    let out = run(&cfg).unwrap();
    assert_eq!(out.report.mining.k, 2);
    assert!(out
        .report
        .mining
        .notes
        .iter()
        .any(|n| n.contains("k reduced")));
}

#[test]
fn unwritable_output_is_an_io_error() {
    let tmp = tempfile::tempdir().unwrap();
    let blocker = tmp.path().join("file");
    std::fs::write(&blocker, "").unwrap();
    let err = run(&config(vec![data("gray_firm.json")], &blocker.join("out"))).unwrap_err();
    assert!(matches!(err, PipelineError::Io { .. }), "{err}");
}
