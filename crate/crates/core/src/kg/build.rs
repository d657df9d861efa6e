use std::collections::HashMap;
use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;

use flate2::read::MultiGzDecoder;
use serde::Serialize;

use super::ntriples::{parse_line, Term};
use super::{Csr, KgError, KnowledgeGraph, LabelPosting, Object, StoredTriple, RDFS_LABEL, RDFS_SUBCLASS_OF, RDF_TYPE};
use crate::text::distinct_tokens;

const MAX_REPORTED_SKIPS: usize = 20;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SkippedLine {
    pub line: usize,
    pub reason: String,
}

/// Tally of an ingest run. Malformed lines are skipped, never fatal.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct IngestReport {
    pub lines: usize,
    pub triples: usize,
    pub duplicates: usize,
    pub skipped: usize,
    /// The first few skipped lines, for diagnostics.
    pub first_skipped: Vec<SkippedLine>,
}

#[derive(Default)]
struct Interner {
    ids: HashMap<String, u32>,
    items: Vec<String>,
}

impl Interner {
    fn intern(&mut self, s: String) -> u32 {
        if let Some(&id) = self.ids.get(&s) {
            return id;
        }
        let id = self.items.len() as u32;
        self.ids.insert(s.clone(), id);
        self.items.push(s);
        id
    }

    /// Items in sorted order plus the old-id -> new-id map.
    fn into_sorted(self) -> (Vec<String>, Vec<u32>) {
        let mut order: Vec<u32> = (0..self.items.len() as u32).collect();
        order.sort_by(|&a, &b| self.items[a as usize].cmp(&self.items[b as usize]));
        let mut remap = vec![0u32; order.len()];
        for (new, &old) in order.iter().enumerate() {
            remap[old as usize] = new as u32;
        }
        let mut items: Vec<Option<String>> = self.items.into_iter().map(Some).collect();
        let sorted = order.iter().map(|&old| items[old as usize].take().unwrap()).collect();
        (sorted, remap)
    }
}

/// Read an N-Triples file (gzip when the name ends in `.gz`) and build the
/// ranked index.
pub fn ingest_ntriples(path: impl AsRef<Path>) -> Result<(KnowledgeGraph, IngestReport), KgError> {
    let path = path.as_ref();
    let io_err = |source| KgError::Io { path: path.display().to_string(), source };
    let file = File::open(path).map_err(io_err)?;
    let reader: Box<dyn BufRead> = if path.extension().is_some_and(|e| e == "gz") {
        Box::new(BufReader::new(MultiGzDecoder::new(file)))
    } else {
        Box::new(BufReader::new(file))
    };
    KnowledgeGraph::from_reader(reader).map_err(io_err)
}

/// Min-max scaled `ln(1 + in) + ln(1 + out)` for each (in, out) pair.
pub fn min_max_link_ranks(counts: &[(u32, u32)]) -> Vec<f64> {
    let raw: Vec<f64> = counts.iter().map(|&(i, o)| (1.0 + i as f64).ln() + (1.0 + o as f64).ln()).collect();
    let lo = raw.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = raw.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if raw.is_empty() || hi <= lo {
        return vec![0.0; raw.len()];
    }
    raw.iter().map(|r| (r - lo) / (hi - lo)).collect()
}

impl KnowledgeGraph {
    /// Build from any line source. Only I/O failures are errors.
    pub fn from_reader<R: BufRead>(reader: R) -> std::io::Result<(Self, IngestReport)> {
        let mut report = IngestReport::default();
        let mut iris = Interner::default();
        let mut literals = Interner::default();
        let mut raw = Vec::new();

        for (n, line) in reader.lines().enumerate() {
            let line = line?;
            report.lines += 1;
            match parse_line(&line) {
                Ok(None) => {}
                Ok(Some(t)) => {
                    let s = iris.intern(t.subject);
                    let p = iris.intern(t.predicate);
                    let o = match t.object {
                        Term::Iri(o) => Object::Iri(iris.intern(o)),
                        Term::Literal(l) => Object::Literal(literals.intern(l)),
                    };
                    raw.push(StoredTriple { subject: s, predicate: p, object: o });
                }
                Err(e) => {
                    report.skipped += 1;
                    if report.first_skipped.len() < MAX_REPORTED_SKIPS {
                        report.first_skipped.push(SkippedLine { line: n + 1, reason: e.to_string() });
                    }
                }
            }
        }

        let (iris, iri_map) = iris.into_sorted();
        let (literals, lit_map) = literals.into_sorted();
        let mut triples: Vec<StoredTriple> = raw
            .into_iter()
            .map(|t| StoredTriple {
                subject: iri_map[t.subject as usize],
                predicate: iri_map[t.predicate as usize],
                object: match t.object {
                    Object::Iri(o) => Object::Iri(iri_map[o as usize]),
                    Object::Literal(l) => Object::Literal(lit_map[l as usize]),
                },
            })
            .collect();
        let parsed = triples.len();
        triples.sort_unstable();
        triples.dedup();
        report.duplicates = parsed - triples.len();
        report.triples = triples.len();

        let graph = Self::assemble(iris, literals, triples);
        Ok((graph, report))
    }

    fn assemble(iris: Vec<String>, literals: Vec<String>, triples: Vec<StoredTriple>) -> Self {
        let n = iris.len();
        let find = |s: &str| iris.binary_search_by(|p| p.as_str().cmp(s)).ok().map(|i| i as u32);
        let (label_p, type_p, subclass_p) = (find(RDFS_LABEL), find(RDF_TYPE), find(RDFS_SUBCLASS_OF));

        let mut subject_start = vec![0u32; n + 1];
        for t in &triples {
            subject_start[t.subject as usize + 1] += 1;
        }
        for i in 0..n {
            subject_start[i + 1] += subject_start[i];
        }

        let mut label_pairs = Vec::new();
        let mut type_pairs = Vec::new();
        let mut super_pairs = Vec::new();
        let mut is_class = vec![false; n];
        let mut inbound = vec![0u32; n];
        let mut outbound = vec![0u32; n];
        for t in &triples {
            let p = Some(t.predicate);
            match t.object {
                Object::Literal(l) if p == label_p => label_pairs.push((t.subject, l)),
                Object::Iri(o) if p == type_p => {
                    type_pairs.push((t.subject, o));
                    is_class[o as usize] = true;
                }
                Object::Iri(o) => {
                    if p == subclass_p {
                        super_pairs.push((t.subject, o));
                        is_class[t.subject as usize] = true;
                        is_class[o as usize] = true;
                    }
                    if p != label_p {
                        outbound[t.subject as usize] += 1;
                        inbound[o as usize] += 1;
                    }
                }
                Object::Literal(_) => {}
            }
        }
        let labels = Csr::from_groups(n, label_pairs);
        let direct_types = Csr::from_groups(n, type_pairs);
        let supers = Csr::from_groups(n, super_pairs);

        let mut ancestor_pairs = Vec::new();
        let mut seen = vec![u32::MAX; n];
        let mut stack = Vec::new();
        for class in (0..n as u32).filter(|&c| is_class[c as usize]) {
            stack.push(class);
            seen[class as usize] = class;
            while let Some(c) = stack.pop() {
                ancestor_pairs.push((class, c));
                for &s in supers.get(c) {
                    if seen[s as usize] != class {
                        seen[s as usize] = class;
                        stack.push(s);
                    }
                }
            }
        }
        let ancestors = Csr::from_groups(n, ancestor_pairs);

        let mut label_width = Vec::with_capacity(labels.values.len());
        let mut vocab_map: HashMap<String, (Vec<LabelPosting>, Vec<u32>)> = HashMap::new();
        for entity in 0..n as u32 {
            for slot in labels.range(entity) {
                let toks = distinct_tokens(&literals[labels.values[slot] as usize]);
                label_width.push(toks.len() as u32);
                for tok in toks {
                    vocab_map.entry(tok).or_default().0.push(LabelPosting { entity, slot: slot as u32 });
                }
            }
        }
        for (lit, text) in literals.iter().enumerate() {
            for tok in distinct_tokens(text) {
                vocab_map.entry(tok).or_default().1.push(lit as u32);
            }
        }
        let mut vocab_entries: Vec<_> = vocab_map.into_iter().collect();
        vocab_entries.sort_unstable_by(|a, b| a.0.cmp(&b.0));
        let mut vocab = Vec::with_capacity(vocab_entries.len());
        let mut label_postings = Csr { start: vec![0], values: Vec::new() };
        let mut literal_postings = Csr { start: vec![0], values: Vec::new() };
        for (tok, (lp, mut litp)) in vocab_entries {
            vocab.push(tok);
            // label postings were pushed in (entity, slot) order already
            label_postings.values.extend(lp);
            label_postings.start.push(label_postings.values.len() as u32);
            litp.sort_unstable();
            literal_postings.values.extend(litp);
            literal_postings.start.push(literal_postings.values.len() as u32);
        }

        let mut graph = KnowledgeGraph {
            iris,
            literals,
            triples,
            subject_start,
            labels,
            label_width,
            direct_types,
            ancestors,
            inbound,
            outbound,
            rank: Vec::new(),
            vocab,
            label_postings,
            literal_postings,
        };
        graph.compute_entity_rank();
        graph
    }
}
