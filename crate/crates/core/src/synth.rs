//! Seeded synthetic graphs and tables for benchmarks and smoke tests.
//!
//! Entity `i` has a unique two-word label built from syllables, one type,
//! a year literal and `links` links to other entities. All of it is a pure
//! function of `(seed, i)`, so tables can be generated without the graph.

use std::io::{self, Write};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const SYLLABLES: [&str; 24] = [
    "ka", "lo", "mi", "ne", "ru", "ta", "vo", "zi", "be", "du", "fa", "gu", "ho", "ji", "ke", "la", "mo", "nu", "pa",
    "ri", "so", "te", "wa", "yo",
];
const CLASSES: usize = 10;
const NS: &str = "http://synth.example/";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SynthSpec {
    pub entities: usize,
    pub links: usize,
    pub seed: u64,
}

impl SynthSpec {
    /// Enough entities for roughly `triples` triples.
    pub fn with_triples(triples: usize, seed: u64) -> Self {
        let links = 2;
        SynthSpec { entities: (triples / (3 + links)).max(1), links, seed }
    }

    fn rng(&self, i: usize) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.seed ^ (i as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15))
    }

    pub fn iri(&self, i: usize) -> String {
        format!("{NS}e{i}")
    }

    pub fn label(&self, i: usize) -> String {
        let n = SYLLABLES.len();
        let d = [i % n, (i / n) % n, (i / n / n) % n, (i / n / n / n) % n];
        let word = |a: usize, b: usize| {
            let mut w = format!("{}{}", SYLLABLES[a], SYLLABLES[b]);
            w[..1].make_ascii_uppercase();
            w
        };
        let mut label = format!("{} {}", word(d[0], d[1]), word(d[2], d[3]));
        let extra = i / n.pow(4);
        if extra > 0 {
            label.push_str(&format!(" {extra}"));
        }
        label
    }

    pub fn year(&self, i: usize) -> u32 {
        self.rng(i).gen_range(1900..2020)
    }

    pub fn link_targets(&self, i: usize) -> Vec<usize> {
        let mut rng = self.rng(i);
        let _year: u32 = rng.gen_range(1900..2020);
        (0..self.links).map(|_| rng.gen_range(0..self.entities)).collect()
    }

    pub fn class(&self, i: usize) -> usize {
        i % CLASSES
    }

    /// Writes the graph as N-Triples; returns the number of triples.
    pub fn write_ntriples<W: Write>(&self, mut w: W) -> io::Result<usize> {
        let label = "<http://www.w3.org/2000/01/rdf-schema#label>";
        let ty = "<http://www.w3.org/1999/02/22-rdf-syntax-ns#type>";
        let sub = "<http://www.w3.org/2000/01/rdf-schema#subClassOf>";
        let mut n = 0;
        for c in 0..CLASSES {
            writeln!(w, "<{NS}Class{c}> {sub} <{NS}Thing> .")?;
            n += 1;
        }
        for i in 0..self.entities {
            let s = self.iri(i);
            writeln!(w, "<{s}> {label} \"{}\" .", self.label(i))?;
            writeln!(w, "<{s}> {ty} <{NS}Class{}> .", self.class(i))?;
            writeln!(w, "<{s}> <{NS}year> \"{}\" .", self.year(i))?;
            n += 3;
            for t in self.link_targets(i) {
                writeln!(w, "<{s}> <{NS}related> <{}> .", self.iri(t))?;
                n += 1;
            }
        }
        Ok(n)
    }

    /// A header row plus `rows` rows of (label, year, first linked label),
    /// with the sampled entity indices.
    pub fn table(&self, rows: usize, table_seed: u64) -> (Vec<Vec<String>>, Vec<usize>) {
        let mut rng = ChaCha8Rng::seed_from_u64(table_seed);
        let mut out = vec![vec!["Name".to_string(), "Year".to_string(), "Related".to_string()]];
        let mut picked = Vec::with_capacity(rows);
        for _ in 0..rows {
            let i = rng.gen_range(0..self.entities);
            let mut name = self.label(i);
            if rng.gen_bool(0.3) {
                name = name.to_lowercase();
            }
            let related = self.link_targets(i).first().map(|&t| self.label(t)).unwrap_or_default();
            out.push(vec![name, self.year(i).to_string(), related]);
            picked.push(i);
        }
        (out, picked)
    }
}
