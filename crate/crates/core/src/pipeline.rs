//! End-to-end bankruptcy report: parse, validate, build the ontology, score,
//! mine, and assemble one deterministic report.
//!
//! A bad statement never aborts the run. It is annotated in the report and
//! left out of mining; only "nothing parseable at all" is fatal.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::io;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rust_decimal::prelude::ToPrimitive;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::mining::{
    mine, FirmFeatures, MiningConfig, MiningError, MiningOutcome, RuleRecord, Scope,
};
use crate::ontology::{export_owl, query_subtree, OntologyBuilder, OntologyError, OntologyTree};
use crate::scoring::{compute_ratios_with, z_score, MarketValueFallback, RatioVector, Zone};
use crate::statement::{
    parse_statement, validate, FinancialStatement, Format, Period, ValidationReport,
    DEFAULT_TOLERANCE,
};

pub const ASSET_GROWTH: &str = "ASSET_GROWTH";

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("no parseable statements among {0} input(s)")]
    NoStatements(usize),
    #[error("configuration: {0}")]
    Config(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("scope: {0}")]
    Scope(#[from] OntologyError),
    #[error("mining: {0}")]
    Mining(#[from] MiningError),
}

impl PipelineError {
    fn io(path: &Path, source: io::Error) -> Self {
        PipelineError::Io {
            path: path.to_path_buf(),
            source,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ReportFormat {
    Json,
    Csv,
}

impl FromStr for ReportFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "json" => Ok(ReportFormat::Json),
            "csv" => Ok(ReportFormat::Csv),
            other => Err(format!("unknown report format {other:?}")),
        }
    }
}

/// Parses `json,csv` style lists.
pub fn parse_report_formats(s: &str) -> Result<BTreeSet<ReportFormat>, String> {
    s.split(',')
        .filter(|p| !p.trim().is_empty())
        .map(str::parse)
        .collect()
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OntologyOutput {
    /// One `ontology.owl` for the corpus.
    #[default]
    Merged,
    /// One file per firm-period under `ontology/`.
    PerFirm,
}

impl FromStr for OntologyOutput {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "merged" => Ok(OntologyOutput::Merged),
            "per-firm" => Ok(OntologyOutput::PerFirm),
            other => Err(format!("unknown ontology output {other:?}")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineConfig {
    pub inputs: Vec<PathBuf>,
    /// `None` infers the format from each file extension.
    pub format: Option<Format>,
    pub tolerance: f64,
    pub mining: MiningConfig,
    pub x4_fallback: bool,
    /// Restrict mining to firm-periods with instances under this class.
    pub scope: Option<String>,
    pub out_dir: PathBuf,
    pub report_formats: BTreeSet<ReportFormat>,
    pub ontology: OntologyOutput,
    /// Matched rules listed per firm.
    pub top_rules: usize,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            inputs: Vec::new(),
            format: None,
            tolerance: DEFAULT_TOLERANCE,
            mining: MiningConfig::default(),
            x4_fallback: false,
            scope: None,
            out_dir: PathBuf::from("bilanz-out"),
            report_formats: BTreeSet::from([ReportFormat::Json]),
            ontology: OntologyOutput::Merged,
            top_rules: 5,
        }
    }
}

/// JSON config file; keys mirror the CLI flags. Absent keys keep defaults.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields, rename_all = "kebab-case")]
pub struct ConfigFile {
    pub input: Option<Vec<PathBuf>>,
    pub format: Option<Format>,
    pub min_support: Option<crate::mining::MinSupport>,
    pub min_confidence: Option<f64>,
    pub bins: Option<usize>,
    pub k: Option<usize>,
    pub seed: Option<u64>,
    pub tolerance: Option<f64>,
    pub x4_fallback: Option<bool>,
    pub scope: Option<String>,
    pub out: Option<PathBuf>,
    pub report: Option<Vec<ReportFormat>>,
    pub ontology: Option<OntologyOutput>,
    pub top_rules: Option<usize>,
}

impl ConfigFile {
    pub fn load(path: &Path) -> Result<Self, PipelineError> {
        let text = fs::read_to_string(path).map_err(|e| PipelineError::io(path, e))?;
        serde_json::from_str(&text)
            .map_err(|e| PipelineError::Config(format!("{}: {e}", path.display())))
    }

    /// Values set here override `config`.
    pub fn apply(&self, config: &mut PipelineConfig) {
        if let Some(v) = &self.input {
            config.inputs = v.clone();
        }
        if let Some(v) = self.format {
            config.format = Some(v);
        }
        if let Some(v) = self.min_support {
            config.mining.min_support = v;
        }
        if let Some(v) = self.min_confidence {
            config.mining.min_confidence = v;
        }
        if let Some(v) = self.bins {
            config.mining.bins = v;
        }
        if let Some(v) = self.k {
            config.mining.k_clusters = v;
        }
        if let Some(v) = self.seed {
            config.mining.seed = v;
        }
        if let Some(v) = self.tolerance {
            config.tolerance = v;
        }
        if let Some(v) = self.x4_fallback {
            config.x4_fallback = v;
        }
        if let Some(v) = &self.scope {
            config.scope = Some(v.clone());
        }
        if let Some(v) = &self.out {
            config.out_dir = v.clone();
        }
        if let Some(v) = &self.report {
            config.report_formats = v.iter().copied().collect();
        }
        if let Some(v) = self.ontology {
            config.ontology = v;
        }
        if let Some(v) = self.top_rules {
            config.top_rules = v;
        }
    }
}

impl PipelineConfig {
    /// Checks the configuration and that the output directory is writable.
    pub fn check(&self) -> Result<(), PipelineError> {
        if self.inputs.is_empty() {
            return Err(PipelineError::Config(
                "at least one input path is required".into(),
            ));
        }
        if self.tolerance.is_nan() || self.tolerance < 0.0 {
            return Err(PipelineError::Config(format!(
                "tolerance must be >= 0, got {}",
                self.tolerance
            )));
        }
        if self.report_formats.is_empty() {
            return Err(PipelineError::Config("no report format selected".into()));
        }
        self.mining.validate()?;
        fs::create_dir_all(&self.out_dir).map_err(|e| PipelineError::io(&self.out_dir, e))?;
        let probe = self.out_dir.join(".bilanz-write-check");
        fs::write(&probe, b"").map_err(|e| PipelineError::io(&self.out_dir, e))?;
        fs::remove_file(&probe).map_err(|e| PipelineError::io(&probe, e))?;
        Ok(())
    }

    fn fallback(&self) -> MarketValueFallback {
        if self.x4_fallback {
            MarketValueFallback::BookEquity
        } else {
            MarketValueFallback::Disabled
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InputFailure {
    pub source: String,
    pub error: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationSummary {
    pub passed: bool,
    pub failed_checks: Vec<String>,
    pub max_relative_error: f64,
}

impl From<&ValidationReport> for ValidationSummary {
    fn from(r: &ValidationReport) -> Self {
        ValidationSummary {
            passed: r.passed(),
            failed_checks: r.failures().map(|c| c.check_name.clone()).collect(),
            max_relative_error: r
                .checks
                .iter()
                .map(|c| c.relative_error)
                .fold(0.0, f64::max),
        }
    }
}

/// One firm-period of the report. Scoring fields are `None` when the firm
/// could not be scored; `errors` says why.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FirmReport {
    pub key: String,
    pub firm_id: String,
    pub period: Option<Period>,
    pub source: String,
    pub ratios: Option<RatioVector>,
    pub z: Option<f64>,
    pub zone: Option<Zone>,
    pub bankrupt_95_flag: Option<bool>,
    pub x4_proxy: bool,
    pub validation: ValidationSummary,
    pub cluster: Option<usize>,
    pub matched_rules: Vec<RuleRecord>,
    pub errors: Vec<String>,
}

impl FirmReport {
    pub fn scored(&self) -> bool {
        self.z.is_some()
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct MiningSection {
    pub performed: bool,
    pub firms_mined: usize,
    pub k: usize,
    pub cluster_sizes: Vec<usize>,
    pub global_min_support_count: u64,
    pub frequent_itemsets: usize,
    pub scope: Option<String>,
    pub notes: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BankruptcyReport {
    pub firms: Vec<FirmReport>,
    pub unparsed: Vec<InputFailure>,
    pub zone_counts: BTreeMap<Zone, usize>,
    pub mining: MiningSection,
    /// Global rules, then each cluster's.
    pub rules: Vec<RuleRecord>,
}

impl BankruptcyReport {
    pub fn all_scored(&self) -> bool {
        self.unparsed.is_empty() && self.firms.iter().all(|f| f.scored() && f.errors.is_empty())
    }

    /// 0 when every firm-period was scored cleanly, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        if self.all_scored() {
            0
        } else {
            1
        }
    }
}

/// Everything a run produces.
#[derive(Debug, Clone)]
pub struct PipelineOutput {
    pub report: BankruptcyReport,
    /// (relative path, OWL document)
    pub ontologies: Vec<(String, String)>,
    pub transactions_csv: String,
    pub mining: Option<MiningOutcome>,
}

fn expand_inputs(inputs: &[PathBuf]) -> Result<Vec<PathBuf>, PipelineError> {
    let mut out = Vec::new();
    for path in inputs {
        if path.is_dir() {
            let mut found: Vec<PathBuf> = fs::read_dir(path)
                .map_err(|e| PipelineError::io(path, e))?
                .filter_map(|e| e.ok().map(|e| e.path()))
                .filter(|p| p.is_file() && Format::from_extension(p).is_some())
                .collect();
            found.sort();
            out.extend(found);
        } else {
            out.push(path.clone());
        }
    }
    Ok(out)
}

fn load(path: &Path, format: Option<Format>) -> Result<FinancialStatement, String> {
    let format = format
        .or_else(|| Format::from_extension(path))
        .ok_or_else(|| "cannot infer format from extension; pass --format".to_string())?;
    let file = fs::File::open(path).map_err(|e| e.to_string())?;
    let mut stmt = parse_statement(io::BufReader::new(file), format).map_err(|e| e.to_string())?;
    if stmt.firm_id.is_empty() {
        stmt.firm_id = path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_default();
    }
    Ok(stmt)
}

fn file_name_for(key: &str) -> String {
    key.chars()
        .map(|c| {
            if c.is_alphanumeric() || c == '-' || c == '_' {
                c
            } else {
                '_'
            }
        })
        .collect()
}

struct Entry {
    stmt: FinancialStatement,
    validation: ValidationReport,
    report: FirmReport,
}

/// Runs every stage over already-parsed statements. `sources` labels each
/// statement in the report (usually its path).
pub fn run_statements(
    statements: Vec<(String, FinancialStatement)>,
    unparsed: Vec<InputFailure>,
    config: &PipelineConfig,
) -> Result<PipelineOutput, PipelineError> {
    if statements.is_empty() {
        return Err(PipelineError::NoStatements(unparsed.len()));
    }
    config.mining.validate()?;
    let mut unparsed = unparsed;

    let mut seen = BTreeSet::new();
    let mut entries = Vec::new();
    for (source, stmt) in statements {
        if !seen.insert(stmt.key()) {
            unparsed.push(InputFailure {
                source,
                error: format!("duplicate firm-period {}", stmt.key()),
            });
            continue;
        }
        let validation = validate(&stmt, config.tolerance);
        let report = FirmReport {
            key: stmt.key(),
            firm_id: stmt.firm_id.clone(),
            period: stmt.period,
            source,
            ratios: None,
            z: None,
            zone: None,
            bankrupt_95_flag: None,
            x4_proxy: false,
            validation: ValidationSummary::from(&validation),
            cluster: None,
            matched_rules: Vec::new(),
            errors: Vec::new(),
        };
        entries.push(Entry {
            stmt,
            validation,
            report,
        });
    }

    // ontology: always one corpus tree (scope queries run against it)
    let mut builder = OntologyBuilder::new();
    let mut ontologies = Vec::new();
    for e in &mut entries {
        if let Err(err) = builder.add_statement(&e.stmt, &e.stmt.supplemental, Some(&e.validation))
        {
            e.report.errors.push(format!("ontology: {err}"));
            continue;
        }
        if config.ontology == OntologyOutput::PerFirm {
            let mut single = OntologyBuilder::new();
            single
                .add_statement(&e.stmt, &e.stmt.supplemental, Some(&e.validation))
                .expect("statement already accepted by the corpus builder");
            ontologies.push((
                format!("ontology/{}.owl", file_name_for(&e.report.key)),
                export_owl(&single.finish()),
            ));
        }
    }
    let corpus_tree: OntologyTree = builder.finish();
    if config.ontology == OntologyOutput::Merged {
        ontologies.push(("ontology.owl".to_string(), export_owl(&corpus_tree)));
    }

    // scoring
    for e in &mut entries {
        match compute_ratios_with(&e.stmt, &e.stmt.supplemental, config.fallback()) {
            Ok(outcome) => match z_score(&outcome.ratios) {
                Ok(z) => {
                    e.report.ratios = Some(outcome.ratios);
                    e.report.x4_proxy = outcome.x4_proxy;
                    e.report.z = Some(z.z);
                    e.report.zone = Some(z.zone);
                    e.report.bankrupt_95_flag = Some(z.bankrupt_95_flag);
                }
                Err(err) => e.report.errors.push(format!("scoring: {err}")),
            },
            Err(err) => e.report.errors.push(format!("scoring: {err}")),
        }
    }

    let growth = asset_growth(&entries);

    let in_scope: Option<BTreeSet<String>> = match &config.scope {
        None => None,
        Some(class) => Some(
            query_subtree(&corpus_tree, class)?
                .into_iter()
                .filter_map(|inst| inst.id.rsplit_once('/').map(|(k, _)| k.to_string()))
                .collect(),
        ),
    };

    let features: Vec<FirmFeatures> = entries
        .iter()
        .filter(|e| e.report.scored())
        .filter(|e| in_scope.as_ref().is_none_or(|s| s.contains(&e.report.key)))
        .map(|e| {
            let ratios = e.report.ratios.expect("scored");
            let mut extra = BTreeMap::new();
            if let Some(g) = growth.get(&e.report.key) {
                extra.insert(ASSET_GROWTH.to_string(), *g);
            }
            FirmFeatures {
                key: e.report.key.clone(),
                ratios,
                zscore: z_score(&ratios).expect("scored"),
                extra,
            }
        })
        .collect();

    let mut section = MiningSection {
        scope: config.scope.clone(),
        ..MiningSection::default()
    };
    let mut outcome = None;
    if features.is_empty() {
        section
            .notes
            .push("no scored firm-periods available for mining".into());
    } else {
        let mut mining = config.mining.clone();
        if mining.k_clusters > features.len() {
            section.notes.push(format!(
                "k reduced from {} to {} (number of firm-periods mined)",
                mining.k_clusters,
                features.len()
            ));
            mining.k_clusters = features.len();
        }
        let mined = mine(&features, &mining)?;
        section.performed = true;
        section.firms_mined = features.len();
        section.k = mined.clusters.k();
        section.cluster_sizes = (0..mined.clusters.k())
            .map(|c| {
                mined
                    .clusters
                    .assignments
                    .values()
                    .filter(|l| **l == c)
                    .count()
            })
            .collect();
        section.global_min_support_count = mined.global.min_support_count;
        section.frequent_itemsets = mined.global.frequent.len();
        section
            .notes
            .extend(mined.discretization.warnings.iter().cloned());

        for tx in &mined.discretization.transactions.transactions {
            let entry = entries
                .iter_mut()
                .find(|e| e.report.key == tx.key)
                .expect("transactions come from entries");
            entry.report.cluster = mined.clusters.cluster_of(&tx.key);
            let items = tx.item_vec();
            entry.report.matched_rules = mined
                .global
                .rules
                .iter()
                .filter(|r| r.antecedent_matches(&items))
                .take(config.top_rules)
                .map(|r| RuleRecord::new(Scope::Global, r))
                .collect();
        }
        outcome = Some(mined);
    }

    let mut zone_counts: BTreeMap<Zone, usize> = Zone::ALL.iter().map(|z| (*z, 0)).collect();
    for e in &entries {
        if let Some(z) = e.report.zone {
            *zone_counts.get_mut(&z).unwrap() += 1;
        }
    }
    let transactions_csv = outcome
        .as_ref()
        .map(|m| m.discretization.transactions.to_csv())
        .unwrap_or_else(|| "key,items\n".to_string());
    let rules = outcome
        .as_ref()
        .map(MiningOutcome::records)
        .unwrap_or_default();

    Ok(PipelineOutput {
        report: BankruptcyReport {
            firms: entries.into_iter().map(|e| e.report).collect(),
            unparsed,
            zone_counts,
            mining: section,
            rules,
        },
        ontologies,
        transactions_csv,
        mining: outcome,
    })
}

/// Relative change in total assets against the same firm's previous
/// period, where one exists.
fn asset_growth(entries: &[Entry]) -> BTreeMap<String, f64> {
    let mut by_firm: BTreeMap<&str, Vec<(Period, &Entry)>> = BTreeMap::new();
    for e in entries {
        if let Some(p) = e.stmt.period {
            by_firm
                .entry(e.stmt.firm_id.as_str())
                .or_default()
                .push((p, e));
        }
    }
    let mut out = BTreeMap::new();
    for periods in by_firm.values_mut() {
        periods.sort_by_key(|(p, _)| *p);
        for pair in periods.windows(2) {
            let prev = pair[0].1.stmt.totals().total_assets;
            let cur = pair[1].1.stmt.totals().total_assets;
            if prev > rust_decimal::Decimal::ZERO {
                if let Some(g) = ((cur - prev) / prev).to_f64() {
                    out.insert(pair[1].1.report.key.clone(), g);
                }
            }
        }
    }
    out
}

/// Reads every input and runs the pipeline. Files that fail to parse are
/// listed in [`BankruptcyReport::unparsed`].
pub fn run(config: &PipelineConfig) -> Result<PipelineOutput, PipelineError> {
    config.check()?;
    let paths = expand_inputs(&config.inputs)?;
    let mut statements = Vec::new();
    let mut unparsed = Vec::new();
    for path in &paths {
        let source = path.display().to_string();
        match load(path, config.format) {
            Ok(stmt) => statements.push((source, stmt)),
            Err(error) => unparsed.push(InputFailure { source, error }),
        }
    }
    if statements.is_empty() {
        return Err(PipelineError::NoStatements(paths.len()));
    }
    run_statements(statements, unparsed, config)
}

pub const CSV_COLUMNS: [&str; 17] = [
    "key",
    "firm_id",
    "period",
    "x1",
    "x2",
    "x3",
    "x4",
    "x5",
    "z",
    "zone",
    "bankrupt_95_flag",
    "x4_proxy",
    "validation_passed",
    "failed_checks",
    "cluster",
    "matched_rules",
    "errors",
];

fn opt<T: ToString>(v: Option<T>) -> String {
    v.map(|v| v.to_string()).unwrap_or_default()
}

/// Per-firm table with [`CSV_COLUMNS`]; list fields are `;`-joined.
pub fn report_csv(report: &BankruptcyReport) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(CSV_COLUMNS).expect("in-memory write");
    for f in &report.firms {
        let r = f.ratios.map(RatioVector::to_array);
        let rules: Vec<String> = f
            .matched_rules
            .iter()
            .map(|r| {
                let side = |items: &[crate::mining::Item]| {
                    items
                        .iter()
                        .map(ToString::to_string)
                        .collect::<Vec<_>>()
                        .join("&")
                };
                format!("{}->{}", side(&r.antecedent), side(&r.consequent))
            })
            .collect();
        let row = [
            f.key.clone(),
            f.firm_id.clone(),
            opt(f.period),
            opt(r.map(|r| r[0])),
            opt(r.map(|r| r[1])),
            opt(r.map(|r| r[2])),
            opt(r.map(|r| r[3])),
            opt(r.map(|r| r[4])),
            opt(f.z),
            opt(f.zone),
            opt(f.bankrupt_95_flag),
            f.x4_proxy.to_string(),
            f.validation.passed.to_string(),
            f.validation.failed_checks.join(";"),
            opt(f.cluster),
            rules.join(";"),
            f.errors.join(";"),
        ];
        w.write_record(&row).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("flush")).expect("utf-8")
}

pub fn report_json(report: &BankruptcyReport) -> String {
    let mut s = serde_json::to_string_pretty(report).expect("report serializes");
    s.push('\n');
    s
}

/// One JSON object per line, global scope first.
pub fn rules_jsonl(rules: &[RuleRecord]) -> String {
    rules
        .iter()
        .map(|r| serde_json::to_string(r).expect("rule serializes") + "\n")
        .collect()
}

fn write(dir: &Path, name: &str, contents: &str) -> Result<PathBuf, PipelineError> {
    let path = dir.join(name);
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent).map_err(|e| PipelineError::io(parent, e))?;
    }
    fs::write(&path, contents).map_err(|e| PipelineError::io(&path, e))?;
    Ok(path)
}

/// Writes `report.json` and/or `report.csv` plus `rules.jsonl`.
pub fn emit_report(
    report: &BankruptcyReport,
    formats: &BTreeSet<ReportFormat>,
    out_dir: &Path,
) -> Result<Vec<PathBuf>, PipelineError> {
    let mut written = Vec::new();
    for format in formats {
        written.push(match format {
            ReportFormat::Json => write(out_dir, "report.json", &report_json(report))?,
            ReportFormat::Csv => write(out_dir, "report.csv", &report_csv(report))?,
        });
    }
    written.push(write(out_dir, "rules.jsonl", &rules_jsonl(&report.rules))?);
    Ok(written)
}

/// Writes the reports, `transactions.csv` and the ontology documents.
pub fn emit(
    output: &PipelineOutput,
    config: &PipelineConfig,
) -> Result<Vec<PathBuf>, PipelineError> {
    let mut written = emit_report(&output.report, &config.report_formats, &config.out_dir)?;
    written.push(write(
        &config.out_dir,
        "transactions.csv",
        &output.transactions_csv,
    )?);
    for (name, doc) in &output.ontologies {
        written.push(write(&config.out_dir, name, doc)?);
    }
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::statement::{Category, LineItem, SupplementalFigures};
    use rust_decimal::dec;

    fn fixture_firm() -> FinancialStatement {
        let mut stmt = FinancialStatement::new(
            "fixture",
            Some(Period::new(2020, 12).unwrap()),
            vec![
                LineItem::new("Cash", Category::CurrentAsset, dec!(600)),
                LineItem::new("Plant", Category::LongTermAsset, dec!(400)),
                LineItem::new("Payables", Category::CurrentLiability, dec!(500)),
                LineItem::new("Bonds", Category::LongTermLiability, dec!(500)),
            ],
        )
        .unwrap();
        stmt.supplemental = SupplementalFigures {
            sales: Some(dec!(1000)),
            ebit: Some(dec!(100)),
            retained_earnings: Some(dec!(200)),
            market_value_equity: Some(dec!(500)),
        };
        stmt
    }

    #[test]
    fn single_fixture_firm() {
        let out = run_statements(
            vec![("mem".into(), fixture_firm())],
            vec![],
            &PipelineConfig::default(),
        )
        .unwrap();
        let firm = &out.report.firms[0];
        assert!((firm.z.unwrap() - 2.029).abs() < 1e-12);
        assert_eq!(firm.zone, Some(Zone::Gray));
        assert!(out.report.mining.performed);
        assert_eq!(out.report.mining.k, 1);
        assert_eq!(out.report.exit_code(), 0);
    }

    #[test]
    fn no_statements_is_an_error() {
        assert!(matches!(
            run_statements(vec![], vec![], &PipelineConfig::default()),
            Err(PipelineError::NoStatements(0))
        ));
    }

    #[test]
    fn missing_supplementals_are_annotated() {
        let stmt = FinancialStatement::new(
            "t1",
            None,
            vec![
                LineItem::new("Cash in Banks", Category::CurrentAsset, dec!(130490)),
                LineItem::new("Accounts payable", Category::CurrentLiability, dec!(5125)),
            ],
        )
        .unwrap();
        let out = run_statements(
            vec![("t1".into(), stmt)],
            vec![],
            &PipelineConfig::default(),
        )
        .unwrap();
        let firm = &out.report.firms[0];
        assert!(!firm.scored());
        assert!(
            firm.errors[0].contains("missing input"),
            "{:?}",
            firm.errors
        );
        assert!(!out.report.mining.performed);
        assert!(out.report.rules.is_empty());
        assert_eq!(out.report.exit_code(), 1);
        let json = report_json(&out.report);
        assert!(json.contains("\"rules\": []"));
    }

    #[test]
    fn duplicates_are_reported_not_dropped() {
        let out = run_statements(
            vec![("a".into(), fixture_firm()), ("b".into(), fixture_firm())],
            vec![],
            &PipelineConfig::default(),
        )
        .unwrap();
        assert_eq!(out.report.firms.len(), 1);
        assert_eq!(out.report.unparsed.len(), 1);
        assert_eq!(out.report.exit_code(), 1);
    }

    #[test]
    fn unknown_scope_is_fatal() {
        let config = PipelineConfig {
            scope: Some("Nope".into()),
            ..Default::default()
        };
        assert!(matches!(
            run_statements(vec![("a".into(), fixture_firm())], vec![], &config),
            Err(PipelineError::Scope(_))
        ));
    }

    #[test]
    fn config_file_overrides() {
        let file: ConfigFile = serde_json::from_str(
            r#"{"input": ["a.csv"], "min-support": 2, "k": 3, "report": ["json", "csv"], "x4-fallback": true}"#,
        )
        .unwrap();
        let mut config = PipelineConfig::default();
        file.apply(&mut config);
        assert_eq!(config.inputs, [PathBuf::from("a.csv")]);
        assert_eq!(
            config.mining.min_support,
            crate::mining::MinSupport::Count(2)
        );
        assert_eq!(config.mining.k_clusters, 3);
        assert!(config.x4_fallback);
        assert_eq!(config.report_formats.len(), 2);
        assert!(serde_json::from_str::<ConfigFile>(r#"{"bogus": 1}"#).is_err());
    }

    #[test]
    fn report_format_lists() {
        assert_eq!(parse_report_formats("json,csv").unwrap().len(), 2);
        assert!(parse_report_formats("xml").is_err());
    }
}
