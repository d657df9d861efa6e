//! Per-row candidate generation: one one-cell lookup on the core cell plus a
//! two-cell lookup for every other non-empty cell, each surface-filtered.

use std::collections::HashMap;

use serde::Serialize;

use crate::kg::{FacetHit, IriId, KnowledgeGraph, LookupOptions};
use crate::similarity::aggregate_clean;
use crate::structure::StructureAnnotation;
use crate::table::Table;
use crate::text::clean_cell;

#[derive(Debug, Clone, PartialEq)]
pub struct CandidateParams {
    pub max_per_query: usize,
    pub surface_threshold: f64,
    pub lookup: LookupOptions,
}

impl Default for CandidateParams {
    fn default() -> Self {
        CandidateParams { max_per_query: 3, surface_threshold: 0.8, lookup: LookupOptions::default() }
    }
}

/// A lookup hit that survived surface filtering.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScoredHit {
    pub hit: FacetHit,
    /// The entity label closest to the core cell.
    pub best_label: String,
    /// Aggregate similarity between `best_label` and the core cell.
    pub similarity: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QueryResult {
    /// `None` for the one-cell query.
    pub context_column: Option<usize>,
    pub context_text: String,
    pub survivors: Vec<ScoredHit>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RowCandidateSet {
    pub row: usize,
    pub core_text: String,
    pub queries: Vec<QueryResult>,
}

impl RowCandidateSet {
    pub fn is_empty(&self) -> bool {
        self.queries.iter().all(|q| q.survivors.is_empty())
    }

    /// Distinct surviving entities with their surface similarity, by id.
    pub fn entities(&self) -> Vec<(IriId, f64)> {
        let mut out: Vec<(IriId, f64)> =
            self.queries.iter().flat_map(|q| q.survivors.iter().map(|s| (s.hit.entity, s.similarity))).collect();
        out.sort_by_key(|e| e.0);
        out.dedup_by_key(|e| e.0);
        out
    }
}

/// The label of `entity` with the highest aggregate similarity to the
/// cleaned core text; the first such label on ties.
pub fn best_label(index: &KnowledgeGraph, entity: IriId, core_clean: &str) -> Option<(String, f64)> {
    let mut best: Option<(String, f64)> = None;
    for label in index.labels(entity) {
        let sim = aggregate_clean(&clean_cell(label), core_clean);
        if best.as_ref().is_none_or(|(_, b)| sim > *b) {
            best = Some((label.to_string(), sim));
        }
    }
    best
}

type LabelCache = HashMap<IriId, Option<(String, f64)>>;

/// Keep hits whose best-label similarity reaches the threshold, then the
/// first `max_per_query` of those in lookup order.
pub fn filter_hits(
    index: &KnowledgeGraph,
    hits: Vec<FacetHit>,
    core_clean: &str,
    params: &CandidateParams,
) -> Vec<ScoredHit> {
    filter_hits_cached(index, hits, core_clean, params, &mut HashMap::new())
}

fn filter_hits_cached(
    index: &KnowledgeGraph,
    hits: Vec<FacetHit>,
    core_clean: &str,
    params: &CandidateParams,
    cache: &mut LabelCache,
) -> Vec<ScoredHit> {
    let mut out = Vec::new();
    for hit in hits {
        if out.len() >= params.max_per_query {
            break;
        }
        let scored = cache.entry(hit.entity).or_insert_with(|| best_label(index, hit.entity, core_clean));
        if let Some((label, sim)) = scored {
            if *sim >= params.surface_threshold {
                out.push(ScoredHit { best_label: label.clone(), similarity: *sim, hit });
            }
        }
    }
    out
}

/// Candidates for one data row. An empty core cell gives an empty set.
pub fn generate_candidates(
    index: &KnowledgeGraph,
    table: &Table,
    structure: &StructureAnnotation,
    row: usize,
    params: &CandidateParams,
) -> RowCandidateSet {
    let core_col = structure.core_column;
    let core = &table.rows[row][core_col];
    let mut set = RowCandidateSet { row, core_text: core.clean.clone(), queries: Vec::new() };
    if core.is_empty() {
        return set;
    }
    let mut cache = LabelCache::new();
    let hits = index.one_cell_lookup(&core.clean, usize::MAX, &params.lookup);
    set.queries.push(QueryResult {
        context_column: None,
        context_text: String::new(),
        survivors: filter_hits_cached(index, hits, &core.clean, params, &mut cache),
    });
    for (col, cell) in table.rows[row].iter().enumerate() {
        if col == core_col || cell.is_empty() {
            continue;
        }
        let hits = index.two_cell_lookup(&core.clean, &cell.clean, usize::MAX, &params.lookup);
        set.queries.push(QueryResult {
            context_column: Some(col),
            context_text: cell.clean.clone(),
            survivors: filter_hits_cached(index, hits, &core.clean, params, &mut cache),
        });
    }
    set
}
