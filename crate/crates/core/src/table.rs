//! Table parsing, cell cleaning and cell data types.

use std::fs;
use std::path::Path;
use std::sync::LazyLock;

use regex::Regex;
use serde::{Deserialize, Serialize};

use crate::text::clean_cell;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum DataType {
    Textual,
    Numerical,
    Empty,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Cell {
    pub raw: String,
    pub clean: String,
    pub dtype: DataType,
}

impl Cell {
    pub fn new(raw: impl Into<String>, typer: &dyn CellTyper) -> Self {
        let raw = raw.into();
        let clean = clean_cell(&raw);
        let dtype = typer.dtype(&clean);
        Cell { raw, clean, dtype }
    }

    pub fn empty() -> Self {
        Cell { raw: String::new(), clean: String::new(), dtype: DataType::Empty }
    }

    pub fn is_empty(&self) -> bool {
        self.dtype == DataType::Empty
    }

    /// Character count of the cleaned text.
    pub fn len(&self) -> usize {
        self.clean.chars().count()
    }
}

/// Assigns a data type to a cleaned cell. External taggers can be plugged in
/// here; the pipeline only consumes the textual/numerical distinction.
pub trait CellTyper: Send + Sync {
    fn dtype(&self, clean: &str) -> DataType;
}

const UNITS: &str = "km|kms|m|cm|mm|mi|miles?|ft|feet|yd|yards?|kg|kgs|g|mg|lbs?|oz|t|tons?|tonnes?|l|ml|gal|\
                     mph|kmh|kph|km h|c|f|degrees?|percent|pct|hrs?|hours?|h|mins?|minutes?|secs?|seconds?|s|\
                     ms|days?|weeks?|months?|years?|yrs?|usd|eur|euros?|gbp|dollars?|pounds?|yen|rs|inr|\
                     thousand|million|billion|trillion|k|mn|bn|am|pm|st|nd|rd|th|ha|acres?|sq km|sq mi|mw|kw|gw";
const MONTHS: &str = "january|february|march|april|may|june|july|august|september|october|november|december|\
                      jan|feb|mar|apr|jun|jul|aug|sep|sept|oct|nov|dec";
const CURRENCY_PREFIX: &str = "usd|us|eur|gbp|rs|inr|cad|aud|chf|jpy|cny";

/// Whole-cell numeric and temporal patterns over cleaned text.
static NUMERIC_RULES: LazyLock<Vec<Regex>> = LazyLock::new(|| {
    let groups = r"\d+(?: \d+)*";
    let magnitude = r"(?: (?:thousand|million|billion|trillion|k|mn|bn))?";
    [
        // integers, decimals, signed numbers, percentages, dates, times,
        // year literals and phone numbers all reduce to digit groups
        format!("^{groups}$"),
        // ordinals: 3rd, 21st
        r"^\d+(?:st|nd|rd|th)$".to_string(),
        // quantities and suffixed currency: 12 km, 12km, 5 million usd, 10 30 pm
        format!("^{groups}{magnitude} ?(?:{UNITS})$"),
        format!("^{groups}(?:{UNITS})(?: {groups})?$"),
        // prefixed currency: usd 100, us 5 million
        format!("^(?:{CURRENCY_PREFIX}) ?{groups}{magnitude}$"),
        // dates with month names: 5 january 2005, jan 5th 2005, may 2005
        format!(r"^(?:\d{{1,2}}(?:st|nd|rd|th)? )?(?:{MONTHS})(?: \d{{1,2}}(?:st|nd|rd|th)?)?(?: \d{{4}})?$"),
        // month name must carry a number; bare "may" is rejected below
    ]
    .iter()
    .map(|p| Regex::new(p).unwrap())
    .collect()
});

static MONTH_ONLY: LazyLock<Regex> = LazyLock::new(|| Regex::new(&format!("^(?:{MONTHS})$")).unwrap());

/// Deterministic regular-grammar typer.
#[derive(Debug, Clone, Copy, Default)]
pub struct RuleTyper;

impl CellTyper for RuleTyper {
    fn dtype(&self, clean: &str) -> DataType {
        let s = clean.trim();
        if s.is_empty() {
            return DataType::Empty;
        }
        if !s.bytes().any(|b| b.is_ascii_digit()) || MONTH_ONLY.is_match(s) {
            return DataType::Textual;
        }
        if NUMERIC_RULES.iter().any(|r| r.is_match(s)) {
            DataType::Numerical
        } else {
            DataType::Textual
        }
    }
}

/// Data type of a cleaned cell under the default rules.
pub fn parse_cell_dtype(clean: &str) -> DataType {
    RuleTyper.dtype(clean)
}

#[derive(Debug, thiserror::Error)]
pub enum TableError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: bad record {record}: {message}")]
    BadRecord { path: String, record: usize, message: String },
    #[error("{path}: table has no cells")]
    Empty { path: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TableFormat {
    Csv,
    JsonRows,
}

impl TableFormat {
    /// `.json` means rows-of-strings JSON; everything else is CSV.
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some(e) if e.eq_ignore_ascii_case("json") => TableFormat::JsonRows,
            _ => TableFormat::Csv,
        }
    }
}

/// Rectangular grid of cells; short rows are padded with empty cells.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Table {
    pub id: String,
    pub rows: Vec<Vec<Cell>>,
    pub n_rows: usize,
    pub n_cols: usize,
}

impl Table {
    pub fn from_rows(id: impl Into<String>, rows: Vec<Vec<String>>) -> Option<Self> {
        Self::from_rows_with(id, rows, &RuleTyper)
    }

    /// `None` when there is no row or no column.
    pub fn from_rows_with(id: impl Into<String>, rows: Vec<Vec<String>>, typer: &dyn CellTyper) -> Option<Self> {
        let n_cols = rows.iter().map(Vec::len).max().unwrap_or(0);
        if rows.is_empty() || n_cols == 0 {
            return None;
        }
        let rows: Vec<Vec<Cell>> = rows
            .into_iter()
            .map(|r| {
                let mut cells: Vec<Cell> = r.into_iter().map(|v| Cell::new(v, typer)).collect();
                cells.resize_with(n_cols, Cell::empty);
                cells
            })
            .collect();
        Some(Table { id: id.into(), n_rows: rows.len(), n_cols, rows })
    }

    pub fn cell(&self, row: usize, col: usize) -> &Cell {
        &self.rows[row][col]
    }

    pub fn column(&self, col: usize) -> impl Iterator<Item = &Cell> + '_ {
        self.rows.iter().map(move |r| &r[col])
    }
}

fn stem(path: &Path) -> String {
    path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default()
}

fn csv_rows(text: &str, path: &str) -> Result<Vec<Vec<String>>, TableError> {
    let mut reader = csv::ReaderBuilder::new().has_headers(false).flexible(true).from_reader(text.as_bytes());
    let mut rows = Vec::new();
    for (i, rec) in reader.records().enumerate() {
        let rec = rec.map_err(|e| TableError::BadRecord {
            path: path.to_string(),
            record: e.position().map(|p| p.record() as usize + 1).unwrap_or(i + 1),
            message: e.to_string(),
        })?;
        rows.push(rec.iter().map(str::to_string).collect());
    }
    Ok(rows)
}

fn json_rows(text: &str, path: &str) -> Result<Vec<Vec<String>>, TableError> {
    let bad = |record: usize, message: String| TableError::BadRecord { path: path.to_string(), record, message };
    let value: serde_json::Value = serde_json::from_str(text).map_err(|e| bad(0, e.to_string()))?;
    let records = value.as_array().ok_or_else(|| bad(0, "top level is not an array".into()))?;
    records
        .iter()
        .enumerate()
        .map(|(i, rec)| {
            let cells = rec.as_array().ok_or_else(|| bad(i + 1, "record is not an array".into()))?;
            cells
                .iter()
                .map(|c| c.as_str().map(str::to_string).ok_or_else(|| bad(i + 1, "cell is not a string".into())))
                .collect()
        })
        .collect()
}

/// Parse a table file. The table id is the file stem.
pub fn parse_table(path: impl AsRef<Path>, format: TableFormat) -> Result<Table, TableError> {
    let path = path.as_ref();
    let display = path.display().to_string();
    let text = fs::read_to_string(path).map_err(|source| TableError::Io { path: display.clone(), source })?;
    let rows = match format {
        TableFormat::Csv => csv_rows(&text, &display)?,
        TableFormat::JsonRows => json_rows(&text, &display)?,
    };
    Table::from_rows(stem(path), rows).ok_or(TableError::Empty { path: display })
}
