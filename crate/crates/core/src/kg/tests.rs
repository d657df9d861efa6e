use std::io::Write;

use super::*;

const LABEL: &str = "<http://www.w3.org/2000/01/rdf-schema#label>";
const TYPE: &str = "<http://www.w3.org/1999/02/22-rdf-syntax-ns#type>";
const SUBCLASS: &str = "<http://www.w3.org/2000/01/rdf-schema#subClassOf>";

fn graph(nt: &str) -> (KnowledgeGraph, IngestReport) {
    KnowledgeGraph::from_reader(nt.as_bytes()).unwrap()
}

fn six_triples() -> String {
    format!(
        "<http://kg/e1> {LABEL} \"The Island\" .\n\
         <http://kg/e2> {LABEL} \"Michael Bay\" .\n\
         <http://kg/e1> <http://kg/director> <http://kg/e2> .\n\
         <http://kg/e1> {TYPE} <http://kg/Film> .\n\
         <http://kg/e2> {TYPE} <http://kg/Person> .\n\
         <http://kg/e1> <http://kg/year> \"2005\" .\n"
    )
}

fn iris(hits: &[FacetHit]) -> Vec<&str> {
    hits.iter().map(|h| h.iri.as_str()).collect()
}

#[test]
fn single_label_triple() {
    let (g, report) = graph(&format!("<http://kg/e1> {LABEL} \"The Island\" .\n"));
    assert_eq!(report.triples, 1);
    assert_eq!(g.entity_count(), 1);
    let rec = g.entity("http://kg/e1", &TypeFilter::default()).unwrap();
    assert_eq!(rec.labels, vec!["The Island"]);
}

#[test]
fn empty_dump() {
    let (g, report) = graph("");
    assert_eq!(g.entity_count(), 0);
    assert_eq!(report, IngestReport::default());
    assert!(g.one_cell_lookup("anything", 10, &LookupOptions::default()).is_empty());
}

#[test]
fn link_counts_skip_label_and_type_edges() {
    let src = six_triples();
    let (g, _) = graph(&src);
    assert_eq!(g.entity_count(), 2);

    // brute-force scan of the raw lines
    let mut counts = std::collections::BTreeMap::<&str, (u32, u32)>::new();
    for line in src.lines() {
        let parts: Vec<&str> = line.split_whitespace().collect();
        let (s, p, o) = (parts[0], parts[1], parts[2]);
        if p == LABEL || p == TYPE || !o.starts_with('<') {
            continue;
        }
        counts.entry(s).or_default().1 += 1;
        counts.entry(o).or_default().0 += 1;
    }
    assert_eq!(counts["<http://kg/e1>"], (0, 1));
    assert_eq!(counts["<http://kg/e2>"], (1, 0));
    assert_eq!(g.link_counts(g.id("http://kg/e1").unwrap()), (0, 1));
    assert_eq!(g.link_counts(g.id("http://kg/e2").unwrap()), (1, 0));
}

#[test]
fn malformed_lines_are_tallied() {
    let src = format!("{}this is junk\n<http://kg/e3> {LABEL} \"x\" .\n", six_triples());
    let (g, report) = graph(&src);
    assert_eq!(report.skipped, 1);
    assert_eq!(report.first_skipped[0].line, 7);
    assert_eq!(g.entity_count(), 3);
}

#[test]
fn duplicate_triples_are_merged() {
    let line = "<http://kg/a> <http://kg/p> <http://kg/b> .\n".to_string();
    let (g, report) = graph(&line.repeat(3));
    assert_eq!(report.duplicates, 2);
    assert_eq!(g.triple_count(), 1);
    assert_eq!(g.link_counts(g.id("http://kg/b").unwrap()), (1, 0));
}

#[test]
fn rank_formula() {
    assert_eq!(min_max_link_ranks(&[(3, 2), (3, 2), (3, 2)]), vec![0.0, 0.0, 0.0]);
    assert_eq!(min_max_link_ranks(&[(0, 0), (1, 1)]), vec![0.0, 1.0]);
    let raw = |i: f64, o: f64| (1.0 + i).ln() + (1.0 + o).ln();
    let r = min_max_link_ranks(&[(0, 1), (2, 2), (5, 7)]);
    let expected = (raw(2.0, 2.0) - raw(0.0, 1.0)) / (raw(5.0, 7.0) - raw(0.0, 1.0));
    assert!((r[1] - expected).abs() < 1e-15);
    assert!(min_max_link_ranks(&[]).is_empty());
}

#[test]
fn equal_link_counts_give_zero_rank() {
    let (g, _) = graph(&six_triples());
    for e in g.entities() {
        assert_eq!(g.rank(e), 0.0);
    }
}

fn island_fixture() -> KnowledgeGraph {
    let nt = format!(
        "<http://kg/The_Island> {LABEL} \"The Island\" .\n\
         <http://kg/The_Island> <http://kg/director> <http://kg/Michael_Bay> .\n\
         <http://kg/The_Island> <http://kg/year> \"2005\" .\n\
         <http://kg/The_Island> <http://kg/studio> <http://kg/DreamWorks> .\n\
         <http://kg/The_Island> <http://kg/starring> <http://kg/Scarlett_Johansson> .\n\
         <http://kg/The_Island> <http://kg/writer> <http://kg/Caspian_Tredwell-Owen> .\n\
         <http://kg/Michael_Bay> {LABEL} \"Michael Bay\" .\n\
         <http://kg/DreamWorks> {LABEL} \"DreamWorks\" .\n\
         <http://kg/DreamWorks> <http://kg/founder> <http://kg/Spielberg> .\n\
         <http://kg/Spielberg> {LABEL} \"Steven Spielberg\" .\n\
         <http://kg/Island_Records> {LABEL} \"Island Records\" .\n\
         <http://kg/Island_(disambiguation)> {LABEL} \"Island\" .\n"
    );
    graph(&nt).0
}

#[test]
fn one_cell_unique_and_empty() {
    let g = island_fixture();
    let opts = LookupOptions::default();
    assert_eq!(iris(&g.one_cell_lookup("the island", 10, &opts)), vec!["http://kg/The_Island"]);
    assert!(g.one_cell_lookup("zzz qqq", 10, &opts).is_empty());
    assert!(g.one_cell_lookup("  ,, ", 10, &opts).is_empty());
}

#[test]
fn one_cell_ranks_by_facet_then_iri() {
    let g = island_fixture();
    let island = g.id("http://kg/The_Island").unwrap();
    let records = g.id("http://kg/Island_Records").unwrap();
    assert_eq!(g.rank(island), 1.0);
    assert_eq!(g.rank(records), 0.0);

    let hits = g.one_cell_lookup("island", 10, &LookupOptions::default());
    assert_eq!(iris(&hits), vec!["http://kg/The_Island", "http://kg/Island_Records"]);
    // both labels have two tokens, one matched
    assert_eq!(hits[0].text_hit, 0.5);
    assert_eq!(hits[1].text_hit, 0.5);
    assert_eq!(hits[0].facet_score, 0.5 * 0.3 + 1.0);
    assert_eq!(hits[1].facet_score, 0.5 * 0.3);
    assert_eq!(g.one_cell_lookup("island", 1, &LookupOptions::default()).len(), 1);
}

#[test]
fn prefix_filter() {
    let g = island_fixture();
    let opts = LookupOptions { entity_prefix: "http://kg/Island".into(), ..Default::default() };
    assert_eq!(iris(&g.one_cell_lookup("island", 10, &opts)), vec!["http://kg/Island_Records"]);
}

#[test]
fn two_cell_follows_one_and_two_hops() {
    let g = island_fixture();
    let opts = LookupOptions::default();
    assert_eq!(iris(&g.two_cell_lookup("the island", "bay michael", 10, &opts)), vec!["http://kg/The_Island"]);
    // literal object of the entity itself
    assert_eq!(iris(&g.two_cell_lookup("island", "2005", 10, &opts)), vec!["http://kg/The_Island"]);
    assert!(g.two_cell_lookup("the island", "nomatchtoken", 10, &opts).is_empty());
    // three hops away is out of reach
    assert!(g.two_cell_lookup("the island", "steven", 10, &opts).is_empty());
    assert!(g.two_cell_lookup("the island", "", 10, &opts).is_empty());
}

#[test]
fn two_cell_separates_homonyms() {
    let nt = format!(
        "<http://kg/Mercury_(planet)> {LABEL} \"Mercury\" .\n\
         <http://kg/Mercury_(planet)> <http://kg/partOf> <http://kg/Solar_System> .\n\
         <http://kg/Solar_System> {LABEL} \"Solar System\" .\n\
         <http://kg/Mercury_(element)> {LABEL} \"Mercury\" .\n\
         <http://kg/Mercury_(element)> <http://kg/group> <http://kg/Group_12> .\n\
         <http://kg/Group_12> {LABEL} \"Group 12 element\" .\n\
         <http://kg/Mercury_(element)> <http://kg/symbol> \"Hg\" .\n"
    );
    let (g, _) = graph(&nt);
    let opts = LookupOptions::default();
    assert_eq!(g.one_cell_lookup("mercury", 10, &opts).len(), 2);

    // exhaustive scan of (s1, p1, s2) triples for the context token
    let mut expected = Vec::new();
    for hit in g.one_cell_lookup("mercury", 10, &opts) {
        let reaches = g.triples_of(hit.entity).iter().any(|t| match t.object {
            Object::Literal(l) => g.literal(l).to_lowercase().contains("solar"),
            Object::Iri(o) => g
                .triples_of(IriId(o))
                .iter()
                .any(|t2| matches!(t2.object, Object::Literal(l2) if g.literal(l2).to_lowercase().contains("solar"))),
        });
        if reaches {
            expected.push(hit.iri.clone());
        }
    }
    assert_eq!(expected, vec!["http://kg/Mercury_(planet)"]);
    assert_eq!(iris(&g.two_cell_lookup("mercury", "solar", 10, &opts)), expected);
    assert_eq!(iris(&g.two_cell_lookup("mercury", "hg", 10, &opts)), vec!["http://kg/Mercury_(element)"]);
}

#[test]
fn disambiguation_pages_never_returned() {
    let g = island_fixture();
    let hits = g.one_cell_lookup("island", 100, &LookupOptions::default());
    assert!(hits.iter().all(|h| !h.iri.ends_with(DISAMBIGUATION_SUFFIX)));
}

#[test]
fn types_exclude_over_general_classes() {
    let nt = format!(
        "<http://kg/x> {TYPE} <{OWL_THING}> .\n\
         <http://kg/f> {TYPE} <http://kg/Film> .\n\
         <http://kg/Film> {SUBCLASS} <http://kg/Work> .\n\
         <http://kg/Work> {SUBCLASS} <{OWL_THING}> .\n"
    );
    let (g, _) = graph(&nt);
    let filter = g.type_filter(&default_excluded_types());
    assert!(g.get_direct_types("http://kg/x", &filter).is_empty());
    assert!(g.get_transitive_types("http://kg/x", &filter).is_empty());
    let direct: Vec<_> = g.get_direct_types("http://kg/f", &filter).into_iter().collect();
    let trans: Vec<_> = g.get_transitive_types("http://kg/f", &filter).into_iter().collect();
    assert_eq!(direct, vec!["http://kg/Film"]);
    assert_eq!(trans, vec!["http://kg/Film", "http://kg/Work"]);
    assert!(g.get_direct_types("http://kg/unknown", &filter).is_empty());

    let unfiltered = g.get_transitive_types("http://kg/f", &TypeFilter::default());
    assert!(unfiltered.contains(OWL_THING));
}

#[test]
fn diamond_closure_has_no_duplicates() {
    let nt = format!(
        "<http://kg/e> {TYPE} <http://kg/A> .\n\
         <http://kg/A> {SUBCLASS} <http://kg/B> .\n\
         <http://kg/A> {SUBCLASS} <http://kg/C> .\n\
         <http://kg/B> {SUBCLASS} <http://kg/D> .\n\
         <http://kg/C> {SUBCLASS} <http://kg/D> .\n\
         <http://kg/D> {SUBCLASS} <http://kg/A> .\n"
    );
    let (g, _) = graph(&nt);
    let e = g.id("http://kg/e").unwrap();
    let ids = g.transitive_type_ids(e, &TypeFilter::default());
    let names: Vec<_> = ids.iter().map(|&t| g.iri(t)).collect();
    assert_eq!(names, vec!["http://kg/A", "http://kg/B", "http://kg/C", "http://kg/D"]);
}

#[test]
fn attribute_values_collect_literals_and_object_labels() {
    let nt = format!(
        "<http://kg/e> <http://kg/year> \"2005\" .\n\
         <http://kg/e> <http://kg/released> \"2005\" .\n\
         <http://kg/e> <http://kg/director> <http://kg/m> .\n\
         <http://kg/m> {LABEL} \"Michael Bay\" .\n"
    );
    let (g, _) = graph(&nt);
    let mut vals = g.get_attribute_values("http://kg/e");
    vals.sort();
    assert_eq!(vals, vec!["2005", "2005", "Michael Bay"]);
    assert!(g.get_attribute_values("http://kg/m").contains(&"Michael Bay".to_string()));
    assert!(g.get_attribute_values("http://kg/none").is_empty());
}

#[test]
fn persisted_index_round_trips_byte_identically() {
    let src = six_triples();
    let (a, _) = graph(&src);
    let (b, _) = graph(&src);
    let mut bytes_a = Vec::new();
    let mut bytes_b = Vec::new();
    a.write_to(&mut bytes_a).unwrap();
    b.write_to(&mut bytes_b).unwrap();
    assert_eq!(bytes_a, bytes_b);
    assert_eq!(&bytes_a[..8], MAGIC);

    let loaded = KnowledgeGraph::read_from(bytes_a.as_slice(), "mem").unwrap();
    assert_eq!(loaded, a);
}

#[test]
fn version_and_magic_are_checked() {
    let (g, _) = graph(&six_triples());
    let mut bytes = Vec::new();
    g.write_to(&mut bytes).unwrap();

    let mut wrong_version = bytes.clone();
    wrong_version[8..12].copy_from_slice(&(FORMAT_VERSION + 1).to_le_bytes());
    match KnowledgeGraph::read_from(wrong_version.as_slice(), "x") {
        Err(KgError::VersionMismatch { found, expected, .. }) => {
            assert_eq!(found, FORMAT_VERSION + 1);
            assert_eq!(expected, FORMAT_VERSION);
        }
        other => panic!("expected version mismatch, got {other:?}"),
    }
    let mut wrong_magic = bytes;
    wrong_magic[0] = b'X';
    assert!(matches!(KnowledgeGraph::read_from(wrong_magic.as_slice(), "x"), Err(KgError::BadMagic { .. })));
    assert!(matches!(KnowledgeGraph::read_from(&b"RL"[..], "x"), Err(KgError::BadMagic { .. })));
}

#[test]
fn gzip_dump_is_detected_by_suffix() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("dump.nt.gz");
    let mut enc = flate2::write::GzEncoder::new(std::fs::File::create(&path).unwrap(), Default::default());
    enc.write_all(six_triples().as_bytes()).unwrap();
    enc.finish().unwrap();
    let (g, report) = ingest_ntriples(&path).unwrap();
    assert_eq!(report.triples, 6);
    assert_eq!(g.entity_count(), 2);
}

#[test]
fn unreadable_dump_names_path() {
    let err = ingest_ntriples("/nonexistent/dump.nt").unwrap_err();
    assert!(err.to_string().contains("/nonexistent/dump.nt"));
}
