//! Whole-table annotation: structure, candidates, disambiguation.
//!
//! Pass 1 (per row): candidates and lookup probabilities. Pass 2 (column):
//! direct and transitive type distributions. Pass 3 (per row): the five
//! signals and the final choice.

use std::collections::BTreeMap;
use std::io::{self, Write};

use serde::Serialize;

use crate::candidates::{generate_candidates, CandidateParams, RowCandidateSet};
use crate::config::PipelineConfig;
use crate::disambiguation::{
    apply_value_threshold, choose, signal_lookup, signal_value_match, AnnotationResult, ColumnTypes, SignalVector,
    TypeMode,
};
use crate::exec::{map_slice, Execution};
use crate::kg::{IriId, KnowledgeGraph, TypeFilter};
use crate::structure::{annotate_structure, StructureAnnotation, StructureError};
use crate::table::{DataType, Table};

pub struct Annotator<'a> {
    index: &'a KnowledgeGraph,
    config: &'a PipelineConfig,
    params: CandidateParams,
    filter: TypeFilter,
    exec: Execution,
}

struct RowState {
    row: usize,
    candidates: RowCandidateSet,
    lookup: BTreeMap<IriId, f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TableOutcome {
    pub table_id: String,
    pub structure: Result<StructureAnnotation, StructureError>,
    pub rows: Vec<AnnotationResult>,
}

impl<'a> Annotator<'a> {
    pub fn new(index: &'a KnowledgeGraph, config: &'a PipelineConfig, exec: Execution) -> Self {
        Annotator {
            index,
            config,
            params: CandidateParams {
                max_per_query: config.max_candidates_per_query,
                surface_threshold: config.surface_threshold,
                lookup: config.lookup_options(),
            },
            filter: index.type_filter(&config.excluded_type_iris),
            exec,
        }
    }

    pub fn annotate(&self, table: &Table) -> TableOutcome {
        let structure = annotate_structure(table);
        let rows = match &structure {
            Ok(s) => self.annotate_rows(table, s),
            Err(e) => {
                log::warn!("table {}: {e}", table.id);
                Vec::new()
            }
        };
        TableOutcome { table_id: table.id.clone(), structure, rows }
    }

    fn annotate_rows(&self, table: &Table, structure: &StructureAnnotation) -> Vec<AnnotationResult> {
        let data_rows: Vec<usize> = (0..table.n_rows).filter(|&r| Some(r) != structure.header_row).collect();
        let temperature = self.config.softmax_temperature;

        let states: Vec<RowState> = map_slice(self.exec, &data_rows, |&row| {
            let candidates = generate_candidates(self.index, table, structure, row, &self.params);
            let lookup = signal_lookup(&candidates, temperature, self.config.renormalize_lookup);
            RowState { row, candidates, lookup }
        });

        let lookups: Vec<BTreeMap<IriId, f64>> = states.iter().map(|s| s.lookup.clone()).collect();
        let direct = ColumnTypes::aggregate(self.index, &lookups, TypeMode::Direct, &self.filter, temperature);
        let transitive = ColumnTypes::aggregate(self.index, &lookups, TypeMode::Transitive, &self.filter, temperature);

        map_slice(self.exec, &states, |state| self.finish_row(table, structure, state, &direct, &transitive))
    }

    fn finish_row(
        &self,
        table: &Table,
        structure: &StructureAnnotation,
        state: &RowState,
        direct: &ColumnTypes,
        transitive: &ColumnTypes,
    ) -> AnnotationResult {
        let core = structure.core_column;
        let context: Vec<&str> = table.rows[state.row]
            .iter()
            .enumerate()
            .filter(|(c, cell)| *c != core && !cell.is_empty())
            .map(|(_, cell)| cell.clean.as_str())
            .collect();

        let scored: Vec<(&str, SignalVector)> = state
            .candidates
            .entities()
            .into_iter()
            .map(|(e, surface)| {
                let signals = SignalVector {
                    p_lookup: state.lookup.get(&e).copied().unwrap_or(0.0),
                    p_direct_type: direct.signal(self.index, e, TypeMode::Direct, &self.filter),
                    p_transitive_type: transitive.signal(self.index, e, TypeMode::Transitive, &self.filter),
                    s_surface: surface,
                    s_value: signal_value_match(self.index, e, &context),
                };
                (self.index.iri(e), signals)
            })
            .collect();
        let scored = apply_value_threshold(scored, self.config.value_match_threshold);

        let weights = &self.config.signal_weights;
        let (iri, score, signals) = match choose(&scored, weights) {
            Some(i) => {
                let (iri, s) = scored[i];
                (Some(iri.to_string()), s.final_score(weights), s)
            }
            None => (None, 0.0, SignalVector::default()),
        };
        AnnotationResult { table_id: table.id.clone(), row_index: state.row, core_column: core, iri, score, signals }
    }
}

/// Per-table structure record written beside the annotations.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StructureRecord {
    pub table_id: String,
    pub status: &'static str,
    pub header_row: Option<usize>,
    pub core_column: Option<usize>,
    pub column_dtypes: Vec<DataType>,
    pub uniqueness_scores: Vec<f64>,
    pub annotated_rows: usize,
    pub error: Option<String>,
}

impl From<&TableOutcome> for StructureRecord {
    fn from(o: &TableOutcome) -> Self {
        match &o.structure {
            Ok(s) => StructureRecord {
                table_id: o.table_id.clone(),
                status: "ok",
                header_row: s.header_row,
                core_column: Some(s.core_column),
                column_dtypes: s.column_dtypes.clone(),
                uniqueness_scores: s.uniqueness_scores.clone(),
                annotated_rows: o.rows.len(),
                error: None,
            },
            Err(e) => StructureRecord {
                table_id: o.table_id.clone(),
                status: match e {
                    StructureError::NoTextualColumn => "NoTextualColumn",
                },
                header_row: None,
                core_column: None,
                column_dtypes: Vec::new(),
                uniqueness_scores: Vec::new(),
                annotated_rows: 0,
                error: Some(e.to_string()),
            },
        }
    }
}

pub const CSV_HEADER: [&str; 10] = [
    "table_id",
    "row_index",
    "core_column",
    "iri",
    "score",
    "p_lookup",
    "p_direct_type",
    "p_transitive_type",
    "s_surface",
    "s_value",
];

pub fn write_jsonl<W: Write, T: Serialize>(mut w: W, records: &[T]) -> io::Result<()> {
    for r in records {
        serde_json::to_writer(&mut w, r)?;
        w.write_all(b"\n")?;
    }
    Ok(())
}

pub fn csv_writer<W: Write>(w: W) -> io::Result<csv::Writer<W>> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(CSV_HEADER)?;
    Ok(out)
}

pub fn write_csv_rows<W: Write>(out: &mut csv::Writer<W>, results: &[AnnotationResult]) -> io::Result<()> {
    for r in results {
        let s = &r.signals;
        out.write_record([
            r.table_id.clone(),
            r.row_index.to_string(),
            r.core_column.to_string(),
            r.iri.clone().unwrap_or_default(),
            r.score.to_string(),
            s.p_lookup.to_string(),
            s.p_direct_type.to_string(),
            s.p_transitive_type.to_string(),
            s.s_surface.to_string(),
            s.s_value.to_string(),
        ])?;
    }
    Ok(())
}
