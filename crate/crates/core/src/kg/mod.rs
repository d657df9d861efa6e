//! In-memory knowledge-graph index.
//!
//! Built once from an N-Triples dump, then immutable. IRIs are interned in
//! lexicographic order so that iterating ids is iterating IRIs, which makes
//! every tie-break by IRI a tie-break by id.

mod build;
pub mod ntriples;
mod persist;

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

pub use build::{ingest_ntriples, min_max_link_ranks, IngestReport, SkippedLine};
pub use persist::{FORMAT_VERSION, MAGIC};

pub const RDFS_LABEL: &str = "http://www.w3.org/2000/01/rdf-schema#label";
pub const RDF_TYPE: &str = "http://www.w3.org/1999/02/22-rdf-syntax-ns#type";
pub const RDFS_SUBCLASS_OF: &str = "http://www.w3.org/2000/01/rdf-schema#subClassOf";
pub const OWL_THING: &str = "http://www.w3.org/2002/07/owl#Thing";
pub const DBO_AGENT: &str = "http://dbpedia.org/ontology/Agent";

/// Suffix of disambiguation pages, which never become candidates.
pub const DISAMBIGUATION_SUFFIX: &str = "_(disambiguation)";

#[derive(Debug, thiserror::Error)]
pub enum KgError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{path} is not a rowlink index (bad magic header)")]
    BadMagic { path: String },
    #[error("{path} has index format version {found}, this build reads version {expected}")]
    VersionMismatch { path: String, found: u32, expected: u32 },
    #[error("corrupt index {path}: {source}")]
    Codec {
        path: String,
        #[source]
        source: bincode::Error,
    },
}

/// Interned IRI. Ids are assigned in IRI order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct IriId(pub u32);

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Object {
    Iri(u32),
    Literal(u32),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct StoredTriple {
    pub subject: u32,
    pub predicate: u32,
    pub object: Object,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
struct LabelPosting {
    entity: u32,
    slot: u32,
}

/// Compressed adjacency: `values[start[i]..start[i + 1]]` belongs to key `i`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct Csr<T> {
    start: Vec<u32>,
    values: Vec<T>,
}

impl<T> Default for Csr<T> {
    fn default() -> Self {
        Csr { start: Vec::new(), values: Vec::new() }
    }
}

impl<T> Csr<T> {
    fn from_groups(n_keys: usize, mut pairs: Vec<(u32, T)>) -> Self
    where
        T: Ord,
    {
        pairs.sort();
        let mut start = Vec::with_capacity(n_keys + 1);
        let mut values = Vec::with_capacity(pairs.len());
        let mut it = pairs.into_iter().peekable();
        for key in 0..n_keys as u32 {
            start.push(values.len() as u32);
            while let Some((_, v)) = it.next_if(|(k, _)| *k == key) {
                values.push(v);
            }
        }
        start.push(values.len() as u32);
        Csr { start, values }
    }

    fn get(&self, key: u32) -> &[T] {
        let k = key as usize;
        if k + 1 >= self.start.len() {
            return &[];
        }
        &self.values[self.start[k] as usize..self.start[k + 1] as usize]
    }

    fn range(&self, key: u32) -> std::ops::Range<usize> {
        let k = key as usize;
        self.start[k] as usize..self.start[k + 1] as usize
    }
}

/// A lookup result: an entity with its text-hit and combined facet score.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FacetHit {
    pub entity: IriId,
    pub iri: String,
    pub text_hit: f64,
    pub rank: f64,
    pub facet_score: f64,
}

/// Query-time knobs shared by one-cell and two-cell lookups.
#[derive(Debug, Clone, PartialEq)]
pub struct LookupOptions {
    /// Weight on the text-hit score in the facet score.
    pub text_weight: f64,
    /// Only entities whose IRI starts with this prefix are returned.
    pub entity_prefix: String,
}

impl Default for LookupOptions {
    fn default() -> Self {
        LookupOptions { text_weight: 0.3, entity_prefix: String::new() }
    }
}

/// Classes left out of type signals, resolved to ids.
#[derive(Debug, Clone, Default)]
pub struct TypeFilter {
    excluded: Vec<u32>,
}

impl TypeFilter {
    fn allows(&self, id: u32) -> bool {
        self.excluded.binary_search(&id).is_err()
    }
}

pub fn default_excluded_types() -> Vec<String> {
    vec![OWL_THING.to_string(), DBO_AGENT.to_string()]
}

/// Materialized view of one entity.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EntityRecord {
    pub iri: String,
    pub labels: Vec<String>,
    pub direct_types: BTreeSet<String>,
    pub transitive_types: BTreeSet<String>,
    pub inbound_count: u32,
    pub outbound_count: u32,
    pub rank: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct KnowledgeGraph {
    iris: Vec<String>,
    literals: Vec<String>,
    /// Sorted by (subject, predicate, object), deduplicated.
    triples: Vec<StoredTriple>,
    subject_start: Vec<u32>,
    /// rdfs:label literal ids per IRI; a position in `labels.values` is a label slot.
    labels: Csr<u32>,
    /// Distinct token count per label slot.
    label_width: Vec<u32>,
    direct_types: Csr<u32>,
    /// Reflexive-transitive superclass closure per class IRI.
    ancestors: Csr<u32>,
    inbound: Vec<u32>,
    outbound: Vec<u32>,
    rank: Vec<f64>,
    /// Sorted token vocabulary shared by both postings tables.
    vocab: Vec<String>,
    label_postings: Csr<LabelPosting>,
    literal_postings: Csr<u32>,
}

impl KnowledgeGraph {
    pub fn iri_count(&self) -> usize {
        self.iris.len()
    }

    pub fn triple_count(&self) -> usize {
        self.triples.len()
    }

    pub fn literal_count(&self) -> usize {
        self.literals.len()
    }

    pub fn label_count(&self) -> usize {
        self.labels.values.len()
    }

    /// Entities are the IRIs that occur as a subject.
    pub fn entity_count(&self) -> usize {
        (0..self.iris.len() as u32).filter(|&i| self.is_entity(IriId(i))).count()
    }

    pub fn entities(&self) -> impl Iterator<Item = IriId> + '_ {
        (0..self.iris.len() as u32).map(IriId).filter(|&i| self.is_entity(i))
    }

    pub fn is_entity(&self, id: IriId) -> bool {
        let i = id.0 as usize;
        i + 1 < self.subject_start.len() && self.subject_start[i] < self.subject_start[i + 1]
    }

    pub fn id(&self, iri: &str) -> Option<IriId> {
        self.iris.binary_search_by(|probe| probe.as_str().cmp(iri)).ok().map(|i| IriId(i as u32))
    }

    pub fn iri(&self, id: IriId) -> &str {
        &self.iris[id.0 as usize]
    }

    pub fn literal(&self, id: u32) -> &str {
        &self.literals[id as usize]
    }

    pub fn triples(&self) -> &[StoredTriple] {
        &self.triples
    }

    pub fn triples_of(&self, id: IriId) -> &[StoredTriple] {
        let i = id.0 as usize;
        if i + 1 >= self.subject_start.len() {
            return &[];
        }
        &self.triples[self.subject_start[i] as usize..self.subject_start[i + 1] as usize]
    }

    pub fn labels(&self, id: IriId) -> impl Iterator<Item = &str> + '_ {
        self.labels.get(id.0).iter().map(|&l| self.literal(l))
    }

    pub fn rank(&self, id: IriId) -> f64 {
        self.rank.get(id.0 as usize).copied().unwrap_or(0.0)
    }

    pub fn link_counts(&self, id: IriId) -> (u32, u32) {
        let i = id.0 as usize;
        (self.inbound.get(i).copied().unwrap_or(0), self.outbound.get(i).copied().unwrap_or(0))
    }

    /// Recompute every entity's rank from its link counts.
    ///
    /// `raw = ln(1 + inbound) + ln(1 + outbound)`, min-max scaled to `[0, 1]`
    /// over entities; all zero when every entity has the same raw score.
    pub fn compute_entity_rank(&mut self) {
        let entities: Vec<IriId> = self.entities().collect();
        let counts: Vec<(u32, u32)> = entities.iter().map(|&e| self.link_counts(e)).collect();
        let scaled = min_max_link_ranks(&counts);
        self.rank = vec![0.0; self.iris.len()];
        for (e, r) in entities.into_iter().zip(scaled) {
            self.rank[e.0 as usize] = r;
        }
    }

    pub fn type_filter<S: AsRef<str>>(&self, excluded: &[S]) -> TypeFilter {
        let mut ids: Vec<u32> = excluded.iter().filter_map(|s| self.id(s.as_ref())).map(|i| i.0).collect();
        ids.sort_unstable();
        ids.dedup();
        TypeFilter { excluded: ids }
    }

    pub fn direct_type_ids(&self, id: IriId, filter: &TypeFilter) -> Vec<IriId> {
        self.direct_types.get(id.0).iter().copied().filter(|&t| filter.allows(t)).map(IriId).collect()
    }

    pub fn transitive_type_ids(&self, id: IriId, filter: &TypeFilter) -> Vec<IriId> {
        let mut out: Vec<u32> = self
            .direct_types
            .get(id.0)
            .iter()
            .flat_map(|&t| self.ancestors.get(t).iter().copied())
            .filter(|&t| filter.allows(t))
            .collect();
        out.sort_unstable();
        out.dedup();
        out.into_iter().map(IriId).collect()
    }

    /// Direct `rdf:type` classes minus the excluded ones; empty for unknown IRIs.
    pub fn get_direct_types(&self, iri: &str, filter: &TypeFilter) -> BTreeSet<String> {
        self.id(iri)
            .map(|id| self.direct_type_ids(id, filter).into_iter().map(|t| self.iri(t).to_string()).collect())
            .unwrap_or_default()
    }

    /// Direct types closed over `rdfs:subClassOf`, minus the excluded ones.
    pub fn get_transitive_types(&self, iri: &str, filter: &TypeFilter) -> BTreeSet<String> {
        self.id(iri)
            .map(|id| self.transitive_type_ids(id, filter).into_iter().map(|t| self.iri(t).to_string()).collect())
            .unwrap_or_default()
    }

    /// Literal objects of the entity's triples plus the labels of its IRI
    /// objects, in triple order. Duplicates are kept.
    pub fn attribute_values(&self, id: IriId) -> Vec<&str> {
        let mut out = Vec::new();
        for t in self.triples_of(id) {
            match t.object {
                Object::Literal(l) => out.push(self.literal(l)),
                Object::Iri(o) => out.extend(self.labels(IriId(o))),
            }
        }
        out
    }

    pub fn get_attribute_values(&self, iri: &str) -> Vec<String> {
        self.id(iri).map(|id| self.attribute_values(id).into_iter().map(str::to_string).collect()).unwrap_or_default()
    }

    pub fn entity(&self, iri: &str, filter: &TypeFilter) -> Option<EntityRecord> {
        let id = self.id(iri).filter(|&id| self.is_entity(id))?;
        let (inbound_count, outbound_count) = self.link_counts(id);
        Some(EntityRecord {
            iri: iri.to_string(),
            labels: self.labels(id).map(str::to_string).collect(),
            direct_types: self.get_direct_types(iri, filter),
            transitive_types: self.get_transitive_types(iri, filter),
            inbound_count,
            outbound_count,
            rank: self.rank(id),
        })
    }

    fn token_id(&self, token: &str) -> Option<u32> {
        self.vocab.binary_search_by(|probe| probe.as_str().cmp(token)).ok().map(|i| i as u32)
    }

    fn eligible(&self, id: IriId, opts: &LookupOptions) -> bool {
        let iri = self.iri(id);
        iri.starts_with(&opts.entity_prefix) && !iri.ends_with(DISAMBIGUATION_SUFFIX)
    }

    /// Entities having every query token in at least one label, ranked by
    /// `text_hit * text_weight + rank`, ties by IRI ascending.
    ///
    /// `text_hit` is the best label coverage: matched query tokens over the
    /// label's distinct token count.
    pub fn one_cell_lookup(&self, text: &str, limit: usize, opts: &LookupOptions) -> Vec<FacetHit> {
        let mut hits = self.label_matches(text, opts);
        sort_hits(&mut hits);
        hits.truncate(limit);
        hits
    }

    fn label_matches(&self, text: &str, opts: &LookupOptions) -> Vec<FacetHit> {
        let query = crate::text::distinct_tokens(text);
        if query.is_empty() {
            return Vec::new();
        }
        let mut lists: Vec<&[LabelPosting]> = Vec::with_capacity(query.len());
        for tok in &query {
            match self.token_id(tok) {
                Some(t) => lists.push(self.label_postings.get(t)),
                None => return Vec::new(),
            }
        }
        lists.sort_by_key(|l| l.len());

        let mut candidates: Vec<u32> = lists[0].iter().map(|p| p.entity).collect();
        candidates.dedup();
        for list in &lists[1..] {
            candidates.retain(|&e| {
                let at = list.partition_point(|p| p.entity < e);
                at < list.len() && list[at].entity == e
            });
            if candidates.is_empty() {
                return Vec::new();
            }
        }

        let mut hits = Vec::with_capacity(candidates.len());
        for e in candidates {
            let id = IriId(e);
            if !self.eligible(id, opts) {
                continue;
            }
            let mut best = 0.0f64;
            for slot in self.labels.range(e) {
                let width = self.label_width[slot];
                if width == 0 {
                    continue;
                }
                let posting = LabelPosting { entity: e, slot: slot as u32 };
                let matched = lists.iter().filter(|l| l.binary_search(&posting).is_ok()).count();
                best = best.max(matched as f64 / width as f64);
            }
            let rank = self.rank(id);
            hits.push(FacetHit {
                entity: id,
                iri: self.iri(id).to_string(),
                text_hit: best,
                rank,
                facet_score: best * opts.text_weight + rank,
            });
        }
        hits
    }

    /// Literal ids whose text contains every token of `text`, sorted.
    fn literals_containing(&self, text: &str) -> Vec<u32> {
        let query = crate::text::distinct_tokens(text);
        if query.is_empty() {
            return Vec::new();
        }
        let mut lists = Vec::with_capacity(query.len());
        for tok in &query {
            match self.token_id(tok) {
                Some(t) => lists.push(self.literal_postings.get(t)),
                None => return Vec::new(),
            }
        }
        lists.sort_by_key(|l| l.len());
        let mut out = lists[0].to_vec();
        for list in &lists[1..] {
            out.retain(|l| list.binary_search(l).is_ok());
        }
        out
    }

    fn reaches_context(&self, entity: IriId, matching: &[u32]) -> bool {
        let hit = |o: &Object| matches!(o, Object::Literal(l) if matching.binary_search(l).is_ok());
        self.triples_of(entity).iter().any(|t| match t.object {
            Object::Literal(_) => hit(&t.object),
            Object::Iri(o) => self.triples_of(IriId(o)).iter().any(|t2| hit(&t2.object)),
        })
    }

    /// One-cell candidates for `core_text` restricted to entities with a
    /// triple whose object is a literal containing every token of
    /// `context_text`, or an IRI that itself has such a literal object.
    pub fn two_cell_lookup(
        &self,
        core_text: &str,
        context_text: &str,
        limit: usize,
        opts: &LookupOptions,
    ) -> Vec<FacetHit> {
        let matching = self.literals_containing(context_text);
        if matching.is_empty() {
            return Vec::new();
        }
        let mut hits = self.label_matches(core_text, opts);
        hits.retain(|h| self.reaches_context(h.entity, &matching));
        sort_hits(&mut hits);
        hits.truncate(limit);
        hits
    }
}

fn sort_hits(hits: &mut [FacetHit]) {
    hits.sort_by(|a, b| b.facet_score.total_cmp(&a.facet_score).then(a.entity.cmp(&b.entity)));
}

#[cfg(test)]
mod tests;
