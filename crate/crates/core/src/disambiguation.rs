//! Five-signal candidate disambiguation.
//!
//! Per candidate: lookup probability, direct-type and transitive-type
//! probabilities at column scope, surface similarity to the core cell, and
//! value-match similarity of the remaining cells against the entity's
//! attribute values. The final score is their weighted mean.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::candidates::RowCandidateSet;
use crate::kg::{IriId, KnowledgeGraph, TypeFilter};
use crate::similarity::aggregate_clean;
use crate::text::clean_cell;

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct SignalVector {
    pub p_lookup: f64,
    pub p_direct_type: f64,
    pub p_transitive_type: f64,
    pub s_surface: f64,
    pub s_value: f64,
}

impl SignalVector {
    pub fn as_array(&self) -> [f64; 5] {
        [self.p_lookup, self.p_direct_type, self.p_transitive_type, self.s_surface, self.s_value]
    }

    /// Weighted mean of the five signals.
    pub fn final_score(&self, weights: &[f64; 5]) -> f64 {
        let total: f64 = weights.iter().sum();
        self.as_array().iter().zip(weights).map(|(s, w)| s * w).sum::<f64>() / total
    }
}

/// Numerically stable softmax. Empty input gives empty output.
pub fn softmax(xs: &[f64], temperature: f64) -> Vec<f64> {
    if xs.is_empty() {
        return Vec::new();
    }
    let max = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = xs.iter().map(|x| ((x - max) / temperature).exp()).collect();
    let sum: f64 = exps.iter().sum();
    exps.into_iter().map(|e| e / sum).collect()
}

/// Mean of per-query probability maps over the maps given, an entity
/// absent from a map contributing 0 there; optionally renormalized.
pub fn aggregate_lookup(per_query: &[BTreeMap<IriId, f64>], renormalize: bool) -> BTreeMap<IriId, f64> {
    let mut sums: BTreeMap<IriId, f64> = BTreeMap::new();
    if per_query.is_empty() {
        return sums;
    }
    for q in per_query {
        for (&e, &p) in q {
            *sums.entry(e).or_insert(0.0) += p;
        }
    }
    let n = per_query.len() as f64;
    for v in sums.values_mut() {
        *v /= n;
    }
    if renormalize {
        let total: f64 = sums.values().sum();
        for v in sums.values_mut() {
            *v /= total;
        }
    }
    sums
}

/// Lookup probability per candidate: softmax of facet scores within each
/// non-empty query, averaged over those queries.
pub fn signal_lookup(set: &RowCandidateSet, temperature: f64, renormalize: bool) -> BTreeMap<IriId, f64> {
    let per_query: Vec<BTreeMap<IriId, f64>> = set
        .queries
        .iter()
        .filter(|q| !q.survivors.is_empty())
        .map(|q| {
            let scores: Vec<f64> = q.survivors.iter().map(|s| s.hit.facet_score).collect();
            let mut m = BTreeMap::new();
            for (s, p) in q.survivors.iter().zip(softmax(&scores, temperature)) {
                // an entity listed twice in one query keeps its larger share
                let slot = m.entry(s.hit.entity).or_insert(0.0f64);
                *slot = slot.max(p);
            }
            m
        })
        .collect();
    aggregate_lookup(&per_query, renormalize)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TypeMode {
    Direct,
    Transitive,
}

pub fn entity_types(index: &KnowledgeGraph, entity: IriId, mode: TypeMode, filter: &TypeFilter) -> Vec<IriId> {
    match mode {
        TypeMode::Direct => index.direct_type_ids(entity, filter),
        TypeMode::Transitive => index.transitive_type_ids(entity, filter),
    }
}

/// Column-level type probabilities: each candidate adds its lookup
/// probability to the mass of each of its types; the masses are softmaxed.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ColumnTypes {
    pub mass: BTreeMap<IriId, f64>,
    pub probability: BTreeMap<IriId, f64>,
}

impl ColumnTypes {
    /// `rows` holds each row's lookup probabilities; summed in row order.
    pub fn aggregate(
        index: &KnowledgeGraph,
        rows: &[BTreeMap<IriId, f64>],
        mode: TypeMode,
        filter: &TypeFilter,
        temperature: f64,
    ) -> Self {
        let mut mass: BTreeMap<IriId, f64> = BTreeMap::new();
        for row in rows {
            for (&entity, &p) in row {
                for t in entity_types(index, entity, mode, filter) {
                    *mass.entry(t).or_insert(0.0) += p;
                }
            }
        }
        let masses: Vec<f64> = mass.values().copied().collect();
        let probability = mass.keys().copied().zip(softmax(&masses, temperature)).collect();
        ColumnTypes { mass, probability }
    }

    /// Highest column probability among the entity's types; 0 without types.
    pub fn signal(&self, index: &KnowledgeGraph, entity: IriId, mode: TypeMode, filter: &TypeFilter) -> f64 {
        entity_types(index, entity, mode, filter)
            .iter()
            .filter_map(|t| self.probability.get(t))
            .copied()
            .fold(0.0, f64::max)
    }
}

/// Mean over the cleaned context cells of the best aggregate similarity to
/// any attribute value; 1 when there are no context cells.
pub fn signal_value_match(index: &KnowledgeGraph, entity: IriId, context_cells: &[&str]) -> f64 {
    if context_cells.is_empty() {
        return 1.0;
    }
    let values: Vec<String> = index.attribute_values(entity).into_iter().map(clean_cell).collect();
    let total: f64 =
        context_cells.iter().map(|cell| values.iter().map(|v| aggregate_clean(v, cell)).fold(0.0, f64::max)).sum();
    total / context_cells.len() as f64
}

/// Drop candidates below the value-match threshold unless that would drop all.
pub fn apply_value_threshold<T>(candidates: Vec<(T, SignalVector)>, threshold: f64) -> Vec<(T, SignalVector)> {
    if candidates.iter().any(|(_, s)| s.s_value >= threshold) {
        candidates.into_iter().filter(|(_, s)| s.s_value >= threshold).collect()
    } else {
        candidates
    }
}

/// Index of the highest final score, lowest IRI on ties.
pub fn choose<S: AsRef<str>>(candidates: &[(S, SignalVector)], weights: &[f64; 5]) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for (i, (iri, signals)) in candidates.iter().enumerate() {
        let score = signals.final_score(weights);
        let better = match best {
            None => true,
            Some((b, bs)) => score > bs || (score == bs && iri.as_ref() < candidates[b].0.as_ref()),
        };
        if better {
            best = Some((i, score));
        }
    }
    best.map(|(i, _)| i)
}

/// One output record per data row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnnotationResult {
    pub table_id: String,
    pub row_index: usize,
    pub core_column: usize,
    pub iri: Option<String>,
    pub score: f64,
    #[serde(flatten)]
    pub signals: SignalVector,
}
