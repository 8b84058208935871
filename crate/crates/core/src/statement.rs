//! Balance-sheet data model, ingestion (CSV and JSON) and accounting-identity
//! validation.
//!
//! Monetary amounts are exact [`Decimal`]s with at most two fractional
//! digits. Floating point only appears once ratios are formed in
//! [`crate::scoring`].

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::io::Read;
use std::str::FromStr;

use rust_decimal::prelude::ToPrimitive;
use rust_decimal::Decimal;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

/// Default relative tolerance for [`validate`].
pub const DEFAULT_TOLERANCE: f64 = 1e-3;

#[derive(Debug, Error, PartialEq)]
pub enum StatementError {
    #[error("line {line}: {message}")]
    Malformed { line: u64, message: String },
    #[error("line {line}: unknown category {label:?}")]
    UnknownCategory { line: u64, label: String },
    #[error("line {line}: duplicate line item ({name:?}, {category})")]
    DuplicateItem {
        line: u64,
        name: String,
        category: Category,
    },
    #[error("line {line}: line item name must not be empty")]
    EmptyName { line: u64 },
    #[error("invalid amount {raw:?}: {reason}")]
    InvalidAmount { raw: String, reason: String },
    #[error("invalid period {0:?}, expected YYYY-MM")]
    InvalidPeriod(String),
    #[error("json: {0}")]
    Json(String),
    #[error("io: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, StatementError>;

/// Which section of the statement a line item belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Category {
    CurrentAsset,
    LongTermAsset,
    CurrentLiability,
    LongTermLiability,
    Equity,
    Supplemental,
}

impl Category {
    pub const ALL: [Category; 6] = [
        Category::CurrentAsset,
        Category::LongTermAsset,
        Category::CurrentLiability,
        Category::LongTermLiability,
        Category::Equity,
        Category::Supplemental,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Category::CurrentAsset => "CurrentAsset",
            Category::LongTermAsset => "LongTermAsset",
            Category::CurrentLiability => "CurrentLiability",
            Category::LongTermLiability => "LongTermLiability",
            Category::Equity => "Equity",
            Category::Supplemental => "Supplemental",
        }
    }
}

impl fmt::Display for Category {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Category {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        let s = s.trim();
        Category::ALL
            .into_iter()
            .find(|c| c.as_str().eq_ignore_ascii_case(s))
            .ok_or_else(|| s.to_string())
    }
}

/// Calendar year-month of a statement.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Period {
    pub year: i32,
    pub month: u8,
}

impl Period {
    pub fn new(year: i32, month: u8) -> Result<Self> {
        if !(1..=12).contains(&month) {
            return Err(StatementError::InvalidPeriod(format!("{year}-{month}")));
        }
        Ok(Period { year, month })
    }
}

impl fmt::Display for Period {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:04}-{:02}", self.year, self.month)
    }
}

impl FromStr for Period {
    type Err = StatementError;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || StatementError::InvalidPeriod(s.to_string());
        let (y, m) = s.trim().split_once('-').ok_or_else(bad)?;
        let year = y.parse().map_err(|_| bad())?;
        let month = m.parse().map_err(|_| bad())?;
        Period::new(year, month).map_err(|_| bad())
    }
}

impl Serialize for Period {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Period {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw = String::deserialize(d)?;
        raw.parse().map_err(serde::de::Error::custom)
    }
}

/// Parses a monetary amount. Thousands separators and surrounding whitespace
/// are stripped; more than two fractional digits is an error.
pub fn parse_amount(raw: &str) -> Result<Decimal> {
    let cleaned: String = raw.trim().chars().filter(|c| *c != ',').collect();
    let invalid = |reason: &str| StatementError::InvalidAmount {
        raw: raw.to_string(),
        reason: reason.to_string(),
    };
    if cleaned.is_empty() {
        return Err(invalid("empty"));
    }
    let value = Decimal::from_str(&cleaned).map_err(|e| invalid(&e.to_string()))?;
    if value.scale() > 2 && value.normalize().scale() > 2 {
        return Err(invalid("more than two fractional digits"));
    }
    Ok(value.normalize())
}

mod amount_serde {
    use super::*;

    pub fn serialize<S: Serializer>(v: &Decimal, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(v)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Decimal, D::Error> {
        let raw = serde_json::Value::deserialize(d)?;
        match raw {
            serde_json::Value::Number(n) => parse_amount(&n.to_string()),
            serde_json::Value::String(s) => parse_amount(&s),
            other => Err(StatementError::InvalidAmount {
                raw: other.to_string(),
                reason: "expected number or string".into(),
            }),
        }
        .map_err(serde::de::Error::custom)
    }

    pub mod opt {
        use super::*;

        pub fn serialize<S: Serializer>(
            v: &Option<Decimal>,
            s: S,
        ) -> std::result::Result<S::Ok, S::Error> {
            match v {
                Some(v) => s.collect_str(v),
                None => s.serialize_none(),
            }
        }

        pub fn deserialize<'de, D: Deserializer<'de>>(
            d: D,
        ) -> std::result::Result<Option<Decimal>, D::Error> {
            let raw = Option::<serde_json::Value>::deserialize(d)?;
            match raw {
                None | Some(serde_json::Value::Null) => Ok(None),
                Some(v) => super::deserialize(v)
                    .map(Some)
                    .map_err(serde::de::Error::custom),
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LineItem {
    pub name: String,
    #[serde(with = "amount_serde")]
    pub amount: Decimal,
    pub category: Category,
    /// Extra columns carried alongside the amount (e.g. "Prior Mo" changes).
    /// Never used in any computation.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub metadata: BTreeMap<String, String>,
}

impl LineItem {
    pub fn new(name: impl Into<String>, category: Category, amount: Decimal) -> Self {
        LineItem {
            name: name.into(),
            amount,
            category,
            metadata: BTreeMap::new(),
        }
    }
}

/// Income-statement and market inputs the balance sheet cannot supply.
/// Absent values stay `None`; zero is a real value.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SupplementalFigures {
    #[serde(
        default,
        with = "amount_serde::opt",
        skip_serializing_if = "Option::is_none"
    )]
    pub sales: Option<Decimal>,
    #[serde(
        default,
        with = "amount_serde::opt",
        skip_serializing_if = "Option::is_none"
    )]
    pub ebit: Option<Decimal>,
    #[serde(
        default,
        with = "amount_serde::opt",
        skip_serializing_if = "Option::is_none"
    )]
    pub retained_earnings: Option<Decimal>,
    #[serde(
        default,
        with = "amount_serde::opt",
        skip_serializing_if = "Option::is_none"
    )]
    pub market_value_equity: Option<Decimal>,
}

impl SupplementalFigures {
    fn is_empty(&self) -> bool {
        *self == SupplementalFigures::default()
    }

    /// Maps a `Supplemental` row label onto its field.
    fn slot_for(&mut self, label: &str) -> Option<&mut Option<Decimal>> {
        let slot = match normalize_label(label).as_str() {
            "sales" | "revenue" | "netsales" => &mut self.sales,
            "ebit" | "earningsbeforeinterestandtaxes" => &mut self.ebit,
            "retainedearnings" => &mut self.retained_earnings,
            "marketvalueequity" | "marketvalueofequity" | "marketcap" | "marketcapitalization" => {
                &mut self.market_value_equity
            }
            _ => return None,
        };
        Some(slot)
    }

    /// Fills absent fields from `Supplemental` rows and from a retained
    /// earnings row in equity.
    fn fill_from_items(&mut self, items: &[LineItem]) {
        for item in items {
            let slot = match item.category {
                Category::Supplemental => self.slot_for(&item.name),
                Category::Equity if normalize_label(&item.name) == "retainedearnings" => {
                    Some(&mut self.retained_earnings)
                }
                _ => None,
            };
            if let Some(slot) = slot {
                if slot.is_none() {
                    *slot = Some(item.amount);
                }
            }
        }
    }
}

/// Balance-sheet aggregates.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Totals {
    pub total_current_assets: Decimal,
    pub total_long_term_assets: Decimal,
    pub total_assets: Decimal,
    pub total_current_liabilities: Decimal,
    pub total_long_term_liabilities: Decimal,
    pub total_liabilities: Decimal,
    pub equity: Decimal,
}

impl Totals {
    pub fn from_items(items: &[LineItem]) -> Self {
        let sum = |cat: Category| -> Decimal {
            items
                .iter()
                .filter(|i| i.category == cat)
                .map(|i| i.amount)
                .sum()
        };
        let ca = sum(Category::CurrentAsset);
        let la = sum(Category::LongTermAsset);
        let cl = sum(Category::CurrentLiability);
        let ll = sum(Category::LongTermLiability);
        Totals {
            total_current_assets: ca,
            total_long_term_assets: la,
            total_assets: ca + la,
            total_current_liabilities: cl,
            total_long_term_liabilities: ll,
            total_liabilities: cl + ll,
            equity: sum(Category::Equity),
        }
    }
}

/// Totals as stated by explicit total rows of the source document.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct DeclaredTotals {
    #[serde(
        default,
        with = "amount_serde::opt",
        skip_serializing_if = "Option::is_none"
    )]
    pub total_current_assets: Option<Decimal>,
    #[serde(
        default,
        with = "amount_serde::opt",
        skip_serializing_if = "Option::is_none"
    )]
    pub total_long_term_assets: Option<Decimal>,
    #[serde(
        default,
        with = "amount_serde::opt",
        skip_serializing_if = "Option::is_none"
    )]
    pub total_assets: Option<Decimal>,
    #[serde(
        default,
        with = "amount_serde::opt",
        skip_serializing_if = "Option::is_none"
    )]
    pub total_current_liabilities: Option<Decimal>,
    #[serde(
        default,
        with = "amount_serde::opt",
        skip_serializing_if = "Option::is_none"
    )]
    pub total_long_term_liabilities: Option<Decimal>,
    #[serde(
        default,
        with = "amount_serde::opt",
        skip_serializing_if = "Option::is_none"
    )]
    pub total_liabilities: Option<Decimal>,
    #[serde(
        default,
        with = "amount_serde::opt",
        skip_serializing_if = "Option::is_none"
    )]
    pub equity: Option<Decimal>,
}

impl DeclaredTotals {
    fn is_empty(&self) -> bool {
        *self == DeclaredTotals::default()
    }

    /// Recognises total rows by label. Returns the slot a label maps to.
    fn slot_for(&mut self, label: &str) -> Option<&mut Option<Decimal>> {
        let slot = match normalize_label(label).as_str() {
            "totalcurrentassets" => &mut self.total_current_assets,
            "totallongtermassets" | "totalfixedassets" | "totalnoncurrentassets" => {
                &mut self.total_long_term_assets
            }
            "totalassets" => &mut self.total_assets,
            "totalcurrentliabilities" => &mut self.total_current_liabilities,
            "totallongtermliabilities" | "totalnoncurrentliabilities" => {
                &mut self.total_long_term_liabilities
            }
            "totalliabilities" => &mut self.total_liabilities,
            "overalltotal"
            | "totalequity"
            | "totalownersequity"
            | "ownersequity"
            | "totalshareholdersequity"
            | "totalstockholdersequity" => &mut self.equity,
            _ => return None,
        };
        Some(slot)
    }

    fn rows(&self) -> Vec<(&'static str, Decimal)> {
        [
            ("Total Current Assets", self.total_current_assets),
            ("Total Long-term Assets", self.total_long_term_assets),
            ("Total Assets", self.total_assets),
            ("Total Current Liabilities", self.total_current_liabilities),
            (
                "Total Long-term Liabilities",
                self.total_long_term_liabilities,
            ),
            ("Total Liabilities", self.total_liabilities),
            ("Overall Total", self.equity),
        ]
        .into_iter()
        .filter_map(|(n, v)| v.map(|v| (n, v)))
        .collect()
    }
}

fn normalize_label(label: &str) -> String {
    label
        .chars()
        .filter(|c| c.is_alphanumeric())
        .flat_map(char::to_lowercase)
        .collect()
}

/// One firm-period balance sheet.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FinancialStatement {
    pub firm_id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub period: Option<Period>,
    pub items: Vec<LineItem>,
    #[serde(default, skip_serializing_if = "DeclaredTotals::is_empty")]
    pub declared: DeclaredTotals,
    #[serde(default, skip_serializing_if = "SupplementalFigures::is_empty")]
    pub supplemental: SupplementalFigures,
}

impl FinancialStatement {
    /// Builds a statement from component rows, rejecting empty names and
    /// duplicate `(name, category)` pairs.
    pub fn new(
        firm_id: impl Into<String>,
        period: Option<Period>,
        items: Vec<LineItem>,
    ) -> Result<Self> {
        check_items(&items, |i| i as u64 + 1)?;
        let mut stmt = FinancialStatement {
            firm_id: firm_id.into(),
            period,
            items,
            declared: DeclaredTotals::default(),
            supplemental: SupplementalFigures::default(),
        };
        stmt.supplemental.fill_from_items(&stmt.items);
        Ok(stmt)
    }

    /// Totals computed from the component rows alone.
    pub fn derived_totals(&self) -> Totals {
        Totals::from_items(&self.items)
    }

    /// Declared totals where present, derived totals otherwise.
    pub fn totals(&self) -> Totals {
        let d = self.derived_totals();
        let t = &self.declared;
        Totals {
            total_current_assets: t.total_current_assets.unwrap_or(d.total_current_assets),
            total_long_term_assets: t.total_long_term_assets.unwrap_or(d.total_long_term_assets),
            total_assets: t.total_assets.unwrap_or(d.total_assets),
            total_current_liabilities: t
                .total_current_liabilities
                .unwrap_or(d.total_current_liabilities),
            total_long_term_liabilities: t
                .total_long_term_liabilities
                .unwrap_or(d.total_long_term_liabilities),
            total_liabilities: t.total_liabilities.unwrap_or(d.total_liabilities),
            equity: t.equity.unwrap_or(d.equity),
        }
    }

    /// `firm_id@period`, used as a key in reports.
    pub fn key(&self) -> String {
        match self.period {
            Some(p) => format!("{}@{}", self.firm_id, p),
            None => self.firm_id.clone(),
        }
    }
}

fn check_items(items: &[LineItem], line_of: impl Fn(usize) -> u64) -> Result<()> {
    let mut seen = BTreeSet::new();
    for (idx, item) in items.iter().enumerate() {
        if item.name.trim().is_empty() {
            return Err(StatementError::EmptyName { line: line_of(idx) });
        }
        if !seen.insert((item.name.as_str(), item.category)) {
            return Err(StatementError::DuplicateItem {
                line: line_of(idx),
                name: item.name.clone(),
                category: item.category,
            });
        }
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

impl Format {
    pub fn from_extension(path: &std::path::Path) -> Option<Format> {
        match path.extension()?.to_str()?.to_ascii_lowercase().as_str() {
            "csv" => Some(Format::Csv),
            "json" => Some(Format::Json),
            _ => None,
        }
    }
}

impl FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            other => Err(format!("unknown statement format {other:?}")),
        }
    }
}

/// Reads one statement from `source`.
///
/// CSV input has the header `name,category,amount`; further columns are kept
/// as per-item metadata. Lines starting with `#` may carry `key: value`
/// directives for `firm_id` and `period`. Rows labelled like totals
/// ("Total Assets", "OVERALL TOTAL", ...) are kept as declared totals rather
/// than items.
pub fn parse_statement<R: Read>(mut source: R, format: Format) -> Result<FinancialStatement> {
    let mut text = String::new();
    source
        .read_to_string(&mut text)
        .map_err(|e| StatementError::Io(e.to_string()))?;
    match format {
        Format::Csv => parse_csv(&text),
        Format::Json => parse_json(&text),
    }
}

fn parse_csv(text: &str) -> Result<FinancialStatement> {
    let mut firm_id = String::new();
    let mut period = None;
    for line in text.lines() {
        let Some(directive) = line.trim_start().strip_prefix('#') else {
            continue;
        };
        if let Some((k, v)) = directive
            .split_once(':')
            .or_else(|| directive.split_once('='))
        {
            match k.trim() {
                "firm_id" | "firm" => firm_id = v.trim().to_string(),
                "period" => period = Some(v.trim().parse()?),
                _ => {}
            }
        }
    }

    let mut reader = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .flexible(true)
        .from_reader(text.as_bytes());
    let headers = reader
        .headers()
        .map_err(|e| csv_error(&e, 1))?
        .iter()
        .map(|h| h.to_string())
        .collect::<Vec<_>>();
    let expected = ["name", "category", "amount"];
    if headers.len() < 3
        || !headers[..3]
            .iter()
            .zip(expected)
            .all(|(h, e)| h.eq_ignore_ascii_case(e))
    {
        return Err(StatementError::Malformed {
            line: 1,
            message: format!("expected header name,category,amount, found {headers:?}"),
        });
    }

    let mut items = Vec::new();
    let mut lines = Vec::new();
    let mut declared = DeclaredTotals::default();
    let mut supplemental = SupplementalFigures::default();
    for record in reader.records() {
        let record = record.map_err(|e| csv_error(&e, 0))?;
        let line = record.position().map(|p| p.line()).unwrap_or(0);
        if record.iter().all(|f| f.is_empty()) {
            continue;
        }
        if record.len() < 3 {
            return Err(StatementError::Malformed {
                line,
                message: format!("expected at least 3 fields, found {}", record.len()),
            });
        }
        let name = record[0].to_string();
        let category: Category = record[1]
            .parse()
            .map_err(|label| StatementError::UnknownCategory { line, label })?;
        let amount = parse_amount(&record[2]).map_err(|e| StatementError::Malformed {
            line,
            message: e.to_string(),
        })?;
        if let Some(slot) = declared.slot_for(&name) {
            *slot = Some(amount);
            continue;
        }
        if category == Category::Supplemental {
            if let Some(slot) = supplemental.slot_for(&name) {
                if slot.replace(amount).is_some() {
                    return Err(StatementError::DuplicateItem {
                        line,
                        name,
                        category,
                    });
                }
                continue;
            }
        }
        let metadata = headers
            .iter()
            .zip(record.iter())
            .skip(3)
            .filter(|(_, v)| !v.is_empty())
            .map(|(h, v)| (h.clone(), v.to_string()))
            .collect();
        items.push(LineItem {
            name,
            amount,
            category,
            metadata,
        });
        lines.push(line);
    }
    check_items(&items, |i| lines[i])?;

    let mut stmt = FinancialStatement {
        firm_id,
        period,
        items,
        declared,
        supplemental,
    };
    stmt.supplemental.fill_from_items(&stmt.items);
    Ok(stmt)
}

fn csv_error(e: &csv::Error, fallback_line: u64) -> StatementError {
    let line = e.position().map(|p| p.line()).unwrap_or(fallback_line);
    StatementError::Malformed {
        line,
        message: e.to_string(),
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct JsonStatement {
    #[serde(default)]
    firm_id: String,
    #[serde(default)]
    period: Option<Period>,
    #[serde(default)]
    items: Vec<JsonItem>,
    #[serde(default)]
    declared: DeclaredTotals,
    #[serde(default)]
    supplemental: SupplementalFigures,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct JsonItem {
    name: String,
    category: String,
    #[serde(with = "amount_serde")]
    amount: Decimal,
    #[serde(default)]
    metadata: BTreeMap<String, String>,
}

fn parse_json(text: &str) -> Result<FinancialStatement> {
    let doc: JsonStatement =
        serde_json::from_str(text).map_err(|e| StatementError::Json(e.to_string()))?;
    // JSON items are reported by their 1-based position in the items array.
    let mut declared = doc.declared;
    let mut supplemental = doc.supplemental;
    let mut items = Vec::with_capacity(doc.items.len());
    let mut positions = Vec::with_capacity(doc.items.len());
    for (idx, raw) in doc.items.into_iter().enumerate() {
        let line = idx as u64 + 1;
        let category: Category = raw
            .category
            .parse()
            .map_err(|label| StatementError::UnknownCategory { line, label })?;
        if let Some(slot) = declared.slot_for(&raw.name) {
            if slot.is_none() {
                *slot = Some(raw.amount);
            }
            continue;
        }
        if category == Category::Supplemental {
            if let Some(slot) = supplemental.slot_for(&raw.name) {
                if slot.is_none() {
                    *slot = Some(raw.amount);
                }
                continue;
            }
        }
        items.push(LineItem {
            name: raw.name,
            amount: raw.amount,
            category,
            metadata: raw.metadata,
        });
        positions.push(line);
    }
    check_items(&items, |i| positions[i])?;
    let mut stmt = FinancialStatement {
        firm_id: doc.firm_id,
        period: doc.period,
        items,
        declared,
        supplemental,
    };
    stmt.supplemental.fill_from_items(&stmt.items);
    Ok(stmt)
}

/// Writes a statement in the given format; [`parse_statement`] reads it back
/// to an equal statement.
pub fn write_statement(stmt: &FinancialStatement, format: Format) -> String {
    match format {
        Format::Json => serde_json::to_string_pretty(stmt).expect("statement serializes"),
        Format::Csv => {
            let meta_keys: BTreeSet<&str> = stmt
                .items
                .iter()
                .flat_map(|i| i.metadata.keys().map(String::as_str))
                .collect();
            let mut out = String::new();
            if !stmt.firm_id.is_empty() {
                out.push_str(&format!("# firm_id: {}\n", stmt.firm_id));
            }
            if let Some(p) = stmt.period {
                out.push_str(&format!("# period: {p}\n"));
            }
            let mut w = csv::WriterBuilder::new()
                .flexible(false)
                .from_writer(Vec::new());
            let mut header = vec!["name", "category", "amount"];
            header.extend(meta_keys.iter().copied());
            w.write_record(&header).expect("in-memory write");
            for item in &stmt.items {
                let mut row = vec![
                    item.name.clone(),
                    item.category.to_string(),
                    item.amount.to_string(),
                ];
                row.extend(
                    meta_keys
                        .iter()
                        .map(|k| item.metadata.get(*k).cloned().unwrap_or_default()),
                );
                w.write_record(&row).expect("in-memory write");
            }
            let s = &stmt.supplemental;
            // a statement built in code may already hold the figure as a row
            let present_as_item = |name: &str, v: Decimal| {
                stmt.items
                    .iter()
                    .any(|i| normalize_label(&i.name) == normalize_label(name) && i.amount == v)
            };
            for (name, value) in [
                ("Sales", s.sales),
                ("EBIT", s.ebit),
                ("Retained Earnings", s.retained_earnings),
                ("Market Value Equity", s.market_value_equity),
            ] {
                if let Some(v) = value {
                    if !present_as_item(name, v) {
                        let mut row = vec![name.to_string(), "Supplemental".into(), v.to_string()];
                        row.resize(header.len(), String::new());
                        w.write_record(&row).expect("in-memory write");
                    }
                }
            }
            for (name, v) in stmt.declared.rows() {
                let category = if name.contains("Liabilities") {
                    Category::CurrentLiability
                } else if name == "Overall Total" {
                    Category::Equity
                } else {
                    Category::CurrentAsset
                };
                let mut row = vec![name.to_string(), category.to_string(), v.to_string()];
                row.resize(header.len(), String::new());
                w.write_record(&row).expect("in-memory write");
            }
            out.push_str(&String::from_utf8(w.into_inner().expect("flush")).expect("utf-8"));
            out
        }
    }
}

/// One row of a [`ValidationReport`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub check_name: String,
    #[serde(with = "amount_serde")]
    pub expected: Decimal,
    #[serde(with = "amount_serde")]
    pub actual: Decimal,
    pub relative_error: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub firm_id: String,
    pub period: Option<Period>,
    pub tolerance: f64,
    pub checks: Vec<Check>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.passed)
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.check_name == name)
    }
}

/// `|expected - actual| / max(|expected|, 1)`
pub fn relative_error(expected: Decimal, actual: Decimal) -> f64 {
    let denom = expected.abs().max(Decimal::ONE);
    ((expected - actual).abs() / denom)
        .to_f64()
        .unwrap_or(f64::INFINITY)
}

/// Checks the statement's accounting identities. Inconsistencies are
/// reported, never raised.
///
/// Always present: `total_assets` (declared vs component sum),
/// `total_liabilities` (declared vs component sum) and `balance_identity`
/// (equity vs total assets minus total liabilities). Declared subtotals add
/// their own component checks.
pub fn validate(stmt: &FinancialStatement, tolerance: f64) -> ValidationReport {
    let tolerance = tolerance.max(0.0);
    let derived = stmt.derived_totals();
    let totals = stmt.totals();
    let d = &stmt.declared;
    let mut checks = Vec::new();
    let mut push = |name: &str, expected: Decimal, actual: Decimal| {
        let relative_error = relative_error(expected, actual);
        checks.push(Check {
            check_name: name.to_string(),
            expected,
            actual,
            relative_error,
            passed: relative_error <= tolerance,
        });
    };

    if let Some(v) = d.total_current_assets {
        push("total_current_assets", v, derived.total_current_assets);
    }
    if let Some(v) = d.total_long_term_assets {
        push("total_long_term_assets", v, derived.total_long_term_assets);
    }
    push(
        "total_assets",
        totals.total_assets,
        totals.total_current_assets + totals.total_long_term_assets,
    );
    if let Some(v) = d.total_current_liabilities {
        push(
            "total_current_liabilities",
            v,
            derived.total_current_liabilities,
        );
    }
    if let Some(v) = d.total_long_term_liabilities {
        push(
            "total_long_term_liabilities",
            v,
            derived.total_long_term_liabilities,
        );
    }
    push(
        "total_liabilities",
        totals.total_liabilities,
        totals.total_current_liabilities + totals.total_long_term_liabilities,
    );
    push(
        "balance_identity",
        totals.equity,
        totals.total_assets - totals.total_liabilities,
    );

    ValidationReport {
        firm_id: stmt.firm_id.clone(),
        period: stmt.period,
        tolerance,
        checks,
    }
}

/// Current assets minus current liabilities. May be negative.
pub fn working_capital(stmt: &FinancialStatement) -> Decimal {
    let t = stmt.totals();
    t.total_current_assets - t.total_current_liabilities
}

#[cfg(test)]
mod tests {
    use super::*;
    use rust_decimal::dec;

    const FEB_2010: &str = "\
# firm_id: table1
# period: 2010-02
name,category,amount,Prior Mo,YTD,Prior Yr
Cash in Banks,CurrentAsset,\"130,490\",5.6%,-1.3%,33.2%
Accounts Receivable,CurrentAsset,\"12,663\",14.3%,86.9%,-61.4%
Total Current Assets,CurrentAsset,\"143,153\",6.3%,3.0%,9.5%
Investments,LongTermAsset,\"40,707\",3.8%,8.3%,+20.9%
Retirement,LongTermAsset,\"128,891\",4.0%,1.3%,
2004 Honda Civic,LongTermAsset,\"6,898\",0.0%,0.0%,13.1%
Total Long-term Assets,LongTermAsset,\"176,496\",3.8%,2.8%,-11.3%
Total Assets,LongTermAsset,\"319,649\",4.9%,2.9%,58.9%
Accounts payable,CurrentLiability,\"5,125\",21.7%,48.9%,-223.3%
Total Current Liabilities,CurrentLiability,\"5,125\",21.7%,48.9%,-223.3%
Student Loans,LongTermLiability,0,,,
Total Long-term Liabilities,LongTermLiability,0,,,
TOTAL LIABILITIES,CurrentLiability,\"5,125\",21.7%,48.9%,-223.3%
OVERALL TOTAL,Equity,\"314,525\",5.5%,4.6%,57.6%
";

    fn feb_2010() -> FinancialStatement {
        parse_statement(FEB_2010.as_bytes(), Format::Csv).unwrap()
    }

    #[test]
    fn parses_table1_row() {
        let stmt = feb_2010();
        let cash = &stmt.items[0];
        assert_eq!(cash.name, "Cash in Banks");
        assert_eq!(cash.category, Category::CurrentAsset);
        assert_eq!(cash.amount, dec!(130490));
        assert_eq!(cash.metadata["Prior Mo"], "5.6%");
        assert_eq!(stmt.firm_id, "table1");
        assert_eq!(stmt.period, Some(Period::new(2010, 2).unwrap()));
        assert_eq!(stmt.items.len(), 7);
    }

    #[test]
    fn table1_totals() {
        let stmt = feb_2010();
        let derived = stmt.derived_totals();
        assert_eq!(derived.total_current_assets, dec!(143153));
        assert_eq!(derived.total_long_term_assets, dec!(176496));
        assert_eq!(derived.total_assets, dec!(319649));
        assert_eq!(stmt.declared.total_assets, Some(dec!(319649)));
        assert_eq!(stmt.totals().equity, dec!(314525));
    }

    #[test]
    fn empty_statement_is_all_zero() {
        let stmt = parse_statement("name,category,amount\n".as_bytes(), Format::Csv).unwrap();
        assert!(stmt.items.is_empty());
        assert_eq!(stmt.totals(), Totals::default());
        let report = validate(&stmt, DEFAULT_TOLERANCE);
        assert!(report.checks.len() >= 3);
        assert!(report
            .checks
            .iter()
            .all(|c| c.passed && c.relative_error == 0.0));
    }

    #[test]
    fn table1_validation() {
        let report = validate(&feb_2010(), DEFAULT_TOLERANCE);
        let assets = report.check("total_assets").unwrap();
        assert_eq!(assets.relative_error, 0.0);
        assert!(assets.passed);
        let identity = report.check("balance_identity").unwrap();
        assert_eq!(identity.expected, dec!(314525));
        assert_eq!(identity.actual, dec!(314524));
        assert!((identity.relative_error - 1.0 / 314525.0).abs() < 1e-12);
        assert!(identity.passed);
        assert!(report.passed());
        assert!(!validate(&feb_2010(), 1e-7).passed());
    }

    #[test]
    fn working_capital_cases() {
        assert_eq!(working_capital(&feb_2010()), dec!(138028));
        let empty = FinancialStatement::new("z", None, vec![]).unwrap();
        assert_eq!(working_capital(&empty), Decimal::ZERO);
        let neg = FinancialStatement::new(
            "n",
            None,
            vec![
                LineItem::new("Cash", Category::CurrentAsset, dec!(100)),
                LineItem::new("Payables", Category::CurrentLiability, dec!(150)),
            ],
        )
        .unwrap();
        assert_eq!(working_capital(&neg), dec!(-50));
    }

    #[test]
    fn rejects_unknown_category() {
        let err = parse_statement(
            "name,category,amount\nCash,CurrentAsset,1\nGoodwill,Intangible,3\n".as_bytes(),
            Format::Csv,
        )
        .unwrap_err();
        assert_eq!(
            err,
            StatementError::UnknownCategory {
                line: 3,
                label: "Intangible".into()
            }
        );
    }

    #[test]
    fn rejects_duplicates() {
        let err = parse_statement(
            "name,category,amount\nCash,CurrentAsset,1\nCash,CurrentAsset,2\n".as_bytes(),
            Format::Csv,
        )
        .unwrap_err();
        assert!(matches!(err, StatementError::DuplicateItem { line: 3, .. }));
        // same name in another category is fine
        parse_statement(
            "name,category,amount\nCash,CurrentAsset,1\nCash,LongTermAsset,2\n".as_bytes(),
            Format::Csv,
        )
        .unwrap();
    }

    #[test]
    fn malformed_rows_carry_line_numbers() {
        let err = parse_statement(
            "name,category,amount\nCash,CurrentAsset,1\nBroken,CurrentAsset,abc\n".as_bytes(),
            Format::Csv,
        )
        .unwrap_err();
        assert!(
            matches!(err, StatementError::Malformed { line: 3, .. }),
            "{err}"
        );
        let err = parse_statement(
            "name,category,amount\nCash,CurrentAsset\n".as_bytes(),
            Format::Csv,
        )
        .unwrap_err();
        assert!(
            matches!(err, StatementError::Malformed { line: 2, .. }),
            "{err}"
        );
        let err = parse_statement("foo,bar\n".as_bytes(), Format::Csv).unwrap_err();
        assert!(matches!(err, StatementError::Malformed { line: 1, .. }));
    }

    #[test]
    fn amounts() {
        assert_eq!(parse_amount("1,234.50").unwrap(), dec!(1234.5));
        assert_eq!(parse_amount(" -7 ").unwrap(), dec!(-7));
        assert!(parse_amount("1.234").is_err());
        assert!(parse_amount("").is_err());
    }

    #[test]
    fn json_statement() {
        let doc = r#"{
            "firm_id": "acme", "period": "2010-02",
            "items": [
                {"name": "Cash", "category": "CurrentAsset", "amount": 100},
                {"name": "Loan", "category": "LongTermLiability", "amount": "1,000.25"}
            ],
            "supplemental": {"sales": 10, "ebit": 0, "retained_earnings": null}
        }"#;
        let stmt = parse_statement(doc.as_bytes(), Format::Json).unwrap();
        assert_eq!(stmt.items[1].amount, dec!(1000.25));
        assert_eq!(stmt.supplemental.sales, Some(dec!(10)));
        assert_eq!(stmt.supplemental.ebit, Some(Decimal::ZERO));
        assert_eq!(stmt.supplemental.retained_earnings, None);
        assert_eq!(stmt.supplemental.market_value_equity, None);

        let bad = r#"{"firm_id":"a","items":[{"name":"X","category":"Nope","amount":1}]}"#;
        assert!(matches!(
            parse_statement(bad.as_bytes(), Format::Json),
            Err(StatementError::UnknownCategory { .. })
        ));
    }

    #[test]
    fn supplemental_rows_in_csv() {
        let stmt = parse_statement(
            "name,category,amount\nSales,Supplemental,1000\nEBIT,Supplemental,100\nRetained Earnings,Equity,200\n"
                .as_bytes(),
            Format::Csv,
        )
        .unwrap();
        assert_eq!(stmt.supplemental.sales, Some(dec!(1000)));
        assert_eq!(stmt.supplemental.ebit, Some(dec!(100)));
        assert_eq!(stmt.supplemental.retained_earnings, Some(dec!(200)));
        assert_eq!(stmt.supplemental.market_value_equity, None);
    }

    #[test]
    fn table1_roundtrips_in_both_formats() {
        let stmt = feb_2010();
        for format in [Format::Csv, Format::Json] {
            let text = write_statement(&stmt, format);
            let back = parse_statement(text.as_bytes(), format).unwrap();
            assert_eq!(back, stmt, "{format:?}\n{text}");
        }
    }
}
