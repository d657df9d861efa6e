//! Scoring annotation output against gold standards.
//!
//! Entity annotation is scored with micro-averaged precision, recall and
//! F1 over pooled counts; core-attribute detection with per-table accuracy.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::kg::KnowledgeGraph;

pub type RowKey = (String, usize);

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GoldRecord {
    pub table_id: String,
    pub row_index: usize,
    /// `None` for a row that should stay unannotated.
    pub iri: Option<String>,
    /// False when the IRI is absent from the target graph.
    pub valid: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Prediction {
    pub table_id: String,
    pub row_index: usize,
    pub iri: Option<String>,
}

#[derive(Debug, thiserror::Error)]
pub enum EvalError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}, record {record}: {message}")]
    Format { path: PathBuf, record: usize, message: String },
    #[error("duplicate gold entry for table {0}, row {1}")]
    DuplicateGold(String, usize),
    #[error("duplicate prediction for table {0}, row {1}")]
    DuplicatePrediction(String, usize),
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> EvalError + '_ {
    move |source| EvalError::Io { path: path.to_path_buf(), source }
}

fn non_empty(s: &str) -> Option<String> {
    let s = s.trim();
    (!s.is_empty() && !s.eq_ignore_ascii_case("none")).then(|| s.to_string())
}

fn csv_records(path: &Path) -> Result<Vec<csv::StringRecord>, EvalError> {
    let file = File::open(path).map_err(io_err(path))?;
    let mut rdr = csv::ReaderBuilder::new().has_headers(false).flexible(true).from_reader(file);
    rdr.records()
        .enumerate()
        .map(|(i, r)| {
            r.map_err(|e| EvalError::Format { path: path.to_path_buf(), record: i + 1, message: e.to_string() })
        })
        .collect()
}

fn parse_index(path: &Path, record: usize, s: &str) -> Result<usize, EvalError> {
    s.trim().parse().map_err(|_| EvalError::Format {
        path: path.to_path_buf(),
        record,
        message: format!("'{s}' is not a row or column index"),
    })
}

/// `table_id,row_index,iri` rows, IRI empty for "none". A first record whose
/// second field is not a number is taken as a header.
pub fn read_gold_csv(path: impl AsRef<Path>) -> Result<Vec<GoldRecord>, EvalError> {
    let path = path.as_ref();
    let mut out = Vec::new();
    for (i, rec) in csv_records(path)?.iter().enumerate() {
        if i == 0 && rec.get(1).is_some_and(|f| f.trim().parse::<usize>().is_err()) {
            continue;
        }
        if rec.len() < 2 {
            return Err(EvalError::Format { path: path.into(), record: i + 1, message: "expected 3 fields".into() });
        }
        out.push(GoldRecord {
            table_id: rec[0].trim().to_string(),
            row_index: parse_index(path, i + 1, &rec[1])?,
            iri: rec.get(2).and_then(non_empty),
            valid: true,
        });
    }
    Ok(out)
}

/// A directory of per-table entity gold files as distributed with T2D:
/// one `<table id>.csv` per table with `"iri","label","row"` records.
pub fn read_t2d_gold_dir(dir: impl AsRef<Path>) -> Result<Vec<GoldRecord>, EvalError> {
    let dir = dir.as_ref();
    let mut files: Vec<PathBuf> = std::fs::read_dir(dir)
        .map_err(io_err(dir))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "csv"))
        .collect();
    files.sort();
    let mut out = Vec::new();
    for path in files {
        let table_id = path.file_stem().unwrap_or_default().to_string_lossy().into_owned();
        for (i, rec) in csv_records(&path)?.iter().enumerate() {
            if rec.len() < 3 {
                return Err(EvalError::Format { path, record: i + 1, message: "expected iri,label,row".into() });
            }
            out.push(GoldRecord {
                table_id: table_id.clone(),
                row_index: parse_index(&path, i + 1, &rec[2])?,
                iri: non_empty(&rec[0]),
                valid: true,
            });
        }
    }
    Ok(out)
}

/// Flag gold IRIs missing from the graph as invalid.
pub fn mark_validity(gold: &mut [GoldRecord], index: &KnowledgeGraph) {
    for g in gold {
        g.valid = g.iri.as_deref().is_none_or(|iri| index.id(iri).is_some());
    }
}

/// Annotation output as JSON lines (`.jsonl`, `.json`) or CSV (otherwise).
pub fn read_predictions(path: impl AsRef<Path>) -> Result<Vec<Prediction>, EvalError> {
    let path = path.as_ref();
    let ext = path.extension().and_then(|e| e.to_str()).unwrap_or("");
    if ext == "jsonl" || ext == "json" {
        let file = File::open(path).map_err(io_err(path))?;
        let mut out = Vec::new();
        for (i, line) in BufReader::new(file).lines().enumerate() {
            let line = line.map_err(io_err(path))?;
            if line.trim().is_empty() {
                continue;
            }
            let p: Prediction = serde_json::from_str(&line).map_err(|e| EvalError::Format {
                path: path.into(),
                record: i + 1,
                message: e.to_string(),
            })?;
            out.push(Prediction { iri: p.iri.as_deref().and_then(non_empty), ..p });
        }
        return Ok(out);
    }
    let records = csv_records(path)?;
    let mut out = Vec::new();
    for (i, rec) in records.iter().enumerate() {
        if i == 0 && rec.get(0) == Some("table_id") {
            continue;
        }
        if rec.len() < 4 {
            return Err(EvalError::Format { path: path.into(), record: i + 1, message: "too few fields".into() });
        }
        out.push(Prediction {
            table_id: rec[0].to_string(),
            row_index: parse_index(path, i + 1, &rec[1])?,
            iri: non_empty(&rec[3]),
        });
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct EvalOptions {
    /// Skip gold "none" rows entirely instead of counting predictions on
    /// them as false positives.
    pub ignore_none_rows: bool,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct EntityScores {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub tp: usize,
    pub fp: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
    pub gold_matches: usize,
    pub invalid_gold: usize,
    pub predicted_on_none: usize,
    pub ignored_on_invalid: usize,
    pub unknown_predictions: Vec<RowKey>,
}

pub fn prf(tp: usize, fp: usize, fn_: usize) -> (f64, f64, f64) {
    let div = |a: usize, b: usize| if b == 0 { 0.0 } else { a as f64 / b as f64 };
    let p = div(tp, tp + fp);
    let r = div(tp, tp + fn_);
    let f1 = if p + r == 0.0 { 0.0 } else { 2.0 * p * r / (p + r) };
    (p, r, f1)
}

pub fn score_entities(
    gold: &[GoldRecord],
    predictions: &[Prediction],
    opts: EvalOptions,
) -> Result<EntityScores, EvalError> {
    let mut by_key: BTreeMap<RowKey, &GoldRecord> = BTreeMap::new();
    for g in gold {
        if by_key.insert((g.table_id.clone(), g.row_index), g).is_some() {
            return Err(EvalError::DuplicateGold(g.table_id.clone(), g.row_index));
        }
    }
    let mut s = EntityScores {
        gold_matches: gold.iter().filter(|g| g.iri.is_some() && g.valid).count(),
        invalid_gold: gold.iter().filter(|g| !g.valid).count(),
        ..Default::default()
    };

    let mut seen: BTreeSet<RowKey> = BTreeSet::new();
    for p in predictions {
        let key = (p.table_id.clone(), p.row_index);
        if !seen.insert(key.clone()) {
            return Err(EvalError::DuplicatePrediction(p.table_id.clone(), p.row_index));
        }
        let Some(iri) = &p.iri else { continue };
        match by_key.get(&key) {
            None => {
                s.fp += 1;
                s.unknown_predictions.push(key);
            }
            Some(g) if !g.valid => s.ignored_on_invalid += 1,
            Some(g) => match &g.iri {
                None => {
                    s.predicted_on_none += 1;
                    if !opts.ignore_none_rows {
                        s.fp += 1;
                    }
                }
                Some(gi) if gi == iri => s.tp += 1,
                Some(_) => s.fp += 1,
            },
        }
    }
    s.fn_ = s.gold_matches - s.tp;
    (s.precision, s.recall, s.f1) = prf(s.tp, s.fp, s.fn_);
    Ok(s)
}

impl EntityScores {
    pub fn summary(&self) -> String {
        let mut out = String::new();
        writeln!(out, "precision  {:.4}", self.precision).unwrap();
        writeln!(out, "recall     {:.4}", self.recall).unwrap();
        writeln!(out, "f1         {:.4}", self.f1).unwrap();
        writeln!(out, "tp {}  fp {}  fn {}", self.tp, self.fp, self.fn_).unwrap();
        writeln!(out, "gold matches {}  invalid gold {}", self.gold_matches, self.invalid_gold).unwrap();
        writeln!(out, "predicted on none {}", self.predicted_on_none).unwrap();
        if self.ignored_on_invalid > 0 {
            writeln!(out, "ignored on invalid gold {}", self.ignored_on_invalid).unwrap();
        }
        if !self.unknown_predictions.is_empty() {
            writeln!(out, "predictions for unknown rows {}", self.unknown_predictions.len()).unwrap();
        }
        out
    }
}

/// `table_id,core_column` rows, optional header.
pub fn read_core_gold_csv(path: impl AsRef<Path>) -> Result<BTreeMap<String, usize>, EvalError> {
    let path = path.as_ref();
    let mut out = BTreeMap::new();
    for (i, rec) in csv_records(path)?.iter().enumerate() {
        if i == 0 && rec.get(1).is_some_and(|f| f.trim().parse::<usize>().is_err()) {
            continue;
        }
        if rec.len() < 2 {
            return Err(EvalError::Format { path: path.into(), record: i + 1, message: "expected 2 fields".into() });
        }
        let table = rec[0].trim().to_string();
        if out.insert(table.clone(), parse_index(path, i + 1, &rec[1])?).is_some() {
            return Err(EvalError::DuplicateGold(table, 0));
        }
    }
    Ok(out)
}

/// Core columns from a structure sidecar (JSON lines with `table_id` and
/// `core_column`) or a `table_id,core_column` CSV. Tables without a core
/// column are left out.
pub fn read_core_predictions(path: impl AsRef<Path>) -> Result<BTreeMap<String, usize>, EvalError> {
    let path = path.as_ref();
    if path.extension().is_some_and(|e| e == "csv") {
        return read_core_gold_csv(path);
    }
    #[derive(Deserialize)]
    struct Row {
        table_id: String,
        core_column: Option<usize>,
    }
    let file = File::open(path).map_err(io_err(path))?;
    let mut out = BTreeMap::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(io_err(path))?;
        if line.trim().is_empty() {
            continue;
        }
        let r: Row = serde_json::from_str(&line).map_err(|e| EvalError::Format {
            path: path.into(),
            record: i + 1,
            message: e.to_string(),
        })?;
        if let Some(c) = r.core_column {
            out.insert(r.table_id, c);
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoreScores {
    pub accuracy: f64,
    pub correct: usize,
    pub tables: usize,
    pub missing: usize,
}

/// Share of gold tables whose predicted core column matches; a missing
/// prediction counts as wrong.
pub fn score_core_attribute(gold: &BTreeMap<String, usize>, predicted: &BTreeMap<String, usize>) -> CoreScores {
    let correct = gold.iter().filter(|(t, c)| predicted.get(*t) == Some(c)).count();
    let missing = gold.keys().filter(|t| !predicted.contains_key(*t)).count();
    let tables = gold.len();
    let accuracy = if tables == 0 { 0.0 } else { correct as f64 / tables as f64 };
    CoreScores { accuracy, correct, tables, missing }
}

impl CoreScores {
    pub fn summary(&self) -> String {
        format!(
            "accuracy   {:.4}\ncorrect {} of {} tables ({} without prediction)\n",
            self.accuracy, self.correct, self.tables, self.missing
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn gold(rows: &[(&str, usize, Option<&str>)]) -> Vec<GoldRecord> {
        rows.iter()
            .map(|(t, r, i)| GoldRecord {
                table_id: t.to_string(),
                row_index: *r,
                iri: i.map(String::from),
                valid: true,
            })
            .collect()
    }

    fn preds(rows: &[(&str, usize, Option<&str>)]) -> Vec<Prediction> {
        rows.iter()
            .map(|(t, r, i)| Prediction { table_id: t.to_string(), row_index: *r, iri: i.map(String::from) })
            .collect()
    }

    #[test]
    fn perfect_on_matchable_rows() {
        let g = gold(&[("t", 1, Some("A")), ("t", 2, None)]);
        let s = score_entities(&g, &preds(&[("t", 1, Some("A"))]), EvalOptions::default()).unwrap();
        assert_eq!((s.precision, s.recall, s.f1), (1.0, 1.0, 1.0));
    }

    #[test]
    fn wrong_prediction_is_fp_and_fn() {
        let g = gold(&[("t", 1, Some("A")), ("t", 2, Some("B"))]);
        let p = preds(&[("t", 1, Some("A")), ("t", 2, Some("C"))]);
        let s = score_entities(&g, &p, EvalOptions::default()).unwrap();
        assert_eq!((s.tp, s.fp, s.fn_), (1, 1, 1));
        assert_eq!((s.precision, s.recall, s.f1), (0.5, 0.5, 0.5));
    }

    #[test]
    fn empty_predictions_score_zero() {
        let g = gold(&[("t", 1, Some("A"))]);
        let s = score_entities(&g, &[], EvalOptions::default()).unwrap();
        assert_eq!((s.precision, s.recall, s.f1), (0.0, 0.0, 0.0));
        assert_eq!(s.fn_, 1);
    }

    #[test]
    fn none_rows_and_unknown_keys() {
        let g = gold(&[("t", 1, Some("A")), ("t", 2, None)]);
        let p = preds(&[("t", 1, Some("A")), ("t", 2, Some("X")), ("u", 0, Some("Y")), ("t", 3, None)]);
        let s = score_entities(&g, &p, EvalOptions::default()).unwrap();
        assert_eq!((s.tp, s.fp, s.fn_, s.predicted_on_none), (1, 2, 0, 1));
        assert_eq!(s.unknown_predictions, vec![("u".to_string(), 0)]);

        let s = score_entities(&g, &p, EvalOptions { ignore_none_rows: true }).unwrap();
        assert_eq!((s.tp, s.fp, s.predicted_on_none), (1, 1, 1));
    }

    #[test]
    fn invalid_gold_is_dropped() {
        let mut g = gold(&[("t", 1, Some("http://kg/A")), ("t", 2, Some("http://kg/Gone"))]);
        let nt = "<http://kg/A> <http://www.w3.org/2000/01/rdf-schema#label> \"A\" .\n";
        let (index, _) = KnowledgeGraph::from_reader(nt.as_bytes()).unwrap();
        mark_validity(&mut g, &index);
        assert!(g[0].valid && !g[1].valid);
        let p = preds(&[("t", 1, Some("http://kg/A")), ("t", 2, Some("http://kg/B"))]);
        let s = score_entities(&g, &p, EvalOptions::default()).unwrap();
        assert_eq!((s.tp, s.fp, s.fn_, s.ignored_on_invalid), (1, 0, 0, 1));
        assert_eq!(s.f1, 1.0);
    }

    #[test]
    fn duplicates_are_errors() {
        let g = gold(&[("t", 1, Some("A")), ("t", 1, Some("B"))]);
        assert!(matches!(score_entities(&g, &[], EvalOptions::default()), Err(EvalError::DuplicateGold(..))));
        let g = gold(&[("t", 1, Some("A"))]);
        let p = preds(&[("t", 1, Some("A")), ("t", 1, None)]);
        assert!(matches!(score_entities(&g, &p, EvalOptions::default()), Err(EvalError::DuplicatePrediction(..))));
    }

    #[test]
    fn f1_is_harmonic_mean() {
        for (tp, fp, fn_) in [(3, 1, 2), (0, 4, 4), (7, 0, 0), (1, 9, 3)] {
            let (p, r, f) = prf(tp, fp, fn_);
            if p + r > 0.0 {
                assert!((f * (p + r) - 2.0 * p * r).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn core_accuracy() {
        let gold: BTreeMap<String, usize> = (0..10).map(|i| (format!("t{i}"), 0)).collect();
        let mut pred = gold.clone();
        pred.insert("t3".into(), 1);
        assert_eq!(score_core_attribute(&gold, &pred).accuracy, 0.9);
        assert_eq!(score_core_attribute(&gold, &gold).accuracy, 1.0);
        let none = score_core_attribute(&gold, &BTreeMap::new());
        assert_eq!((none.accuracy, none.missing), (0.0, 10));
    }

    #[test]
    fn gold_csv_with_and_without_header() {
        let dir = tempfile::tempdir().unwrap();
        let a = dir.path().join("a.csv");
        std::fs::write(&a, "table_id,row_index,iri\nt,1,http://kg/A\nt,2,\n").unwrap();
        let b = dir.path().join("b.csv");
        std::fs::write(&b, "t,1,http://kg/A\nt,2,\n").unwrap();
        let ga = read_gold_csv(&a).unwrap();
        assert_eq!(ga, read_gold_csv(&b).unwrap());
        assert_eq!(ga[1].iri, None);
        let bad = dir.path().join("bad.csv");
        std::fs::write(&bad, "t,1,x\nt,two,y\n").unwrap();
        assert!(matches!(read_gold_csv(&bad), Err(EvalError::Format { record: 2, .. })));
    }

    #[test]
    fn t2d_directory_layout() {
        let dir = tempfile::tempdir().unwrap();
        let mut f = File::create(dir.path().join("1146722_1_7558140036342906956.csv")).unwrap();
        writeln!(f, "\"http://dbpedia.org/resource/Germany\",\"Germany\",\"3\"").unwrap();
        writeln!(f, "\"http://dbpedia.org/resource/France\",\"France\",\"4\"").unwrap();
        std::fs::write(dir.path().join("readme.txt"), "ignored").unwrap();
        let g = read_t2d_gold_dir(dir.path()).unwrap();
        assert_eq!(g.len(), 2);
        assert_eq!(g[0].table_id, "1146722_1_7558140036342906956");
        assert_eq!(g[1].row_index, 4);
        assert_eq!(g[0].iri.as_deref(), Some("http://dbpedia.org/resource/Germany"));
    }

    #[test]
    fn predictions_from_both_formats() {
        let dir = tempfile::tempdir().unwrap();
        let j = dir.path().join("p.jsonl");
        std::fs::write(
            &j,
            "{\"table_id\":\"t\",\"row_index\":1,\"core_column\":0,\"iri\":\"http://kg/A\",\"score\":0.9}\n\
             {\"table_id\":\"t\",\"row_index\":2,\"core_column\":0,\"iri\":null,\"score\":0.0}\n",
        )
        .unwrap();
        let c = dir.path().join("p.csv");
        std::fs::write(&c, "table_id,row_index,core_column,iri,score\nt,1,0,http://kg/A,0.9\nt,2,0,,0\n").unwrap();
        assert_eq!(read_predictions(&j).unwrap(), read_predictions(&c).unwrap());
    }
}
