//! Levenshtein-based fuzzy string similarities.
//!
//! Four scores in `[0, 1]`, each equal to 1 for identical inputs:
//!
//! * [`ratio`]: `1 - lev(a, b) / max(|a|, |b|)`,
//! * [`partial_ratio`]: best [`ratio`] of the shorter string against every
//!   equally long window of the longer one,
//! * [`token_sort_ratio`]: [`ratio`] of the whitespace tokens sorted and re-joined,
//! * [`token_set_ratio`]: best pairwise [`ratio`] among the sorted token
//!   intersection and the intersection extended by each side's remainder.
//!
//! Lengths are counted in characters. The functions do not clean their inputs;
//! [`SimilaritySuite::between`] does.

use serde::{Deserialize, Serialize};
use smallvec::SmallVec;

use crate::text::clean_cell;

/// Edit distance with unit costs for insertion, deletion and substitution.
pub fn levenshtein<T: PartialEq>(a: &[T], b: &[T]) -> usize {
    let (a, b) = if a.len() < b.len() { (b, a) } else { (a, b) };
    if b.is_empty() {
        return a.len();
    }
    let mut row: SmallVec<[usize; 64]> = (0..=b.len()).collect();
    for (i, ca) in a.iter().enumerate() {
        let mut diag = row[0];
        row[0] = i + 1;
        for (j, cb) in b.iter().enumerate() {
            let above = row[j + 1];
            let sub = diag + usize::from(ca != cb);
            row[j + 1] = sub.min(above + 1).min(row[j] + 1);
            diag = above;
        }
    }
    row[b.len()]
}

fn ratio_slices<T: PartialEq>(a: &[T], b: &[T]) -> f64 {
    let longest = a.len().max(b.len());
    if longest == 0 {
        return 1.0;
    }
    1.0 - levenshtein(a, b) as f64 / longest as f64
}

fn chars(s: &str) -> SmallVec<[char; 32]> {
    s.chars().collect()
}

/// Normalized Levenshtein similarity; 1 when both strings are empty.
pub fn ratio(a: &str, b: &str) -> f64 {
    if a.is_ascii() && b.is_ascii() {
        ratio_slices(a.as_bytes(), b.as_bytes())
    } else {
        ratio_slices(&chars(a), &chars(b))
    }
}

fn partial_slices<T: PartialEq>(a: &[T], b: &[T]) -> f64 {
    let (short, long) = if a.len() <= b.len() { (a, b) } else { (b, a) };
    if short.is_empty() {
        return 1.0;
    }
    let mut best = 0.0f64;
    for window in long.windows(short.len()) {
        let r = 1.0 - levenshtein(short, window) as f64 / short.len() as f64;
        if r > best {
            best = r;
            if best >= 1.0 {
                break;
            }
        }
    }
    best
}

/// Best match of the shorter string against same-length windows of the longer.
pub fn partial_ratio(a: &str, b: &str) -> f64 {
    if a.is_ascii() && b.is_ascii() {
        partial_slices(a.as_bytes(), b.as_bytes())
    } else {
        partial_slices(&chars(a), &chars(b))
    }
}

fn sorted_tokens(s: &str) -> SmallVec<[&str; 8]> {
    let mut toks: SmallVec<[&str; 8]> = s.split_whitespace().collect();
    toks.sort_unstable();
    toks
}

fn join_into(buf: &mut String, parts: &[&[&str]]) {
    buf.clear();
    for tok in parts.iter().flat_map(|p| p.iter()) {
        if !buf.is_empty() {
            buf.push(' ');
        }
        buf.push_str(tok);
    }
}

/// [`ratio`] after sorting each side's tokens; duplicates are kept.
pub fn token_sort_ratio(a: &str, b: &str) -> f64 {
    let (mut sa, mut sb) = (String::new(), String::new());
    join_into(&mut sa, &[&sorted_tokens(a)]);
    join_into(&mut sb, &[&sorted_tokens(b)]);
    ratio(&sa, &sb)
}

/// Set-based token comparison; duplicate tokens are collapsed.
pub fn token_set_ratio(a: &str, b: &str) -> f64 {
    let mut ta = sorted_tokens(a);
    ta.dedup();
    let mut tb = sorted_tokens(b);
    tb.dedup();

    let mut common: SmallVec<[&str; 8]> = SmallVec::new();
    let mut only_a: SmallVec<[&str; 8]> = SmallVec::new();
    let mut only_b: SmallVec<[&str; 8]> = SmallVec::new();
    let (mut i, mut j) = (0, 0);
    while i < ta.len() || j < tb.len() {
        match (ta.get(i), tb.get(j)) {
            (Some(x), Some(y)) if x == y => {
                common.push(x);
                i += 1;
                j += 1;
            }
            (Some(x), Some(y)) if x < y => {
                only_a.push(x);
                i += 1;
            }
            (Some(x), None) => {
                only_a.push(x);
                i += 1;
            }
            (_, Some(y)) => {
                only_b.push(y);
                j += 1;
            }
            (None, None) => unreachable!(),
        }
    }

    let (mut t0, mut t1, mut t2) = (String::new(), String::new(), String::new());
    join_into(&mut t0, &[&common]);
    join_into(&mut t1, &[&common, &only_a]);
    join_into(&mut t2, &[&common, &only_b]);
    ratio(&t0, &t1).max(ratio(&t0, &t2)).max(ratio(&t1, &t2))
}

/// The four similarities between two strings and their mean.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimilaritySuite {
    pub ratio: f64,
    pub partial_ratio: f64,
    pub token_sort_ratio: f64,
    pub token_set_ratio: f64,
}

impl SimilaritySuite {
    /// Scores for strings that are already cleaned.
    pub fn of_clean(a: &str, b: &str) -> Self {
        SimilaritySuite {
            ratio: ratio(a, b),
            partial_ratio: partial_ratio(a, b),
            token_sort_ratio: token_sort_ratio(a, b),
            token_set_ratio: token_set_ratio(a, b),
        }
    }

    /// Cleans both sides, then scores.
    pub fn between(a: &str, b: &str) -> Self {
        Self::of_clean(&clean_cell(a), &clean_cell(b))
    }

    pub fn aggregate(&self) -> f64 {
        (self.ratio + self.partial_ratio + self.token_sort_ratio + self.token_set_ratio) / 4.0
    }
}

/// Mean of the four similarities over already-cleaned strings.
pub fn aggregate_clean(a: &str, b: &str) -> f64 {
    SimilaritySuite::of_clean(a, b).aggregate()
}
