//! Cell text cleaning and tokenization.
//!
//! Table cells and knowledge-graph labels go through the same [`clean_cell`]
//! pipeline so that lookup tokens on both sides line up:
//!
//! 1. repair common UTF-8-read-as-Latin-1/CP1252 mojibake,
//! 2. strip HTML tags and decode HTML entities,
//! 3. fold accents to ASCII (compatibility decomposition, combining marks dropped),
//! 4. turn punctuation, control and leftover non-ASCII characters into spaces,
//! 5. collapse whitespace and trim,
//! 6. lowercase.
//!
//! The output is always lowercase ASCII made of alphanumeric runs separated by
//! single spaces, and cleaning is idempotent.

use std::sync::LazyLock;

use regex::{Captures, Regex};
use unicode_normalization::char::is_combining_mark;
use unicode_normalization::UnicodeNormalization;

/// Characters whose UTF-8 encoding commonly shows up mis-decoded.
const MOJIBAKE_TARGETS: &[char] = &[
    '\u{2014}', '\u{2013}', '\u{2018}', '\u{2019}', '\u{201C}', '\u{201D}', '\u{2026}', '\u{2022}', '\u{20AC}',
    '\u{2122}', '\u{00A0}', '\u{00B0}', '\u{00A9}', '\u{00AE}', '\u{00A3}', 'é', 'è', 'ê', 'ë', 'á', 'à', 'â', 'ä',
    'å', 'ã', 'í', 'ì', 'î', 'ï', 'ó', 'ò', 'ô', 'ö', 'õ', 'ø', 'ú', 'ù', 'û', 'ü', 'ñ', 'ç', 'ß', 'É', 'Á', 'Ö', 'Ü',
    'Å',
];

/// CP1252 code points for bytes 0x80..=0x9F. Undefined slots map to the C1
/// control with the same value, which is what lenient decoders emit.
const CP1252_HIGH: [char; 32] = [
    '\u{20AC}', '\u{0081}', '\u{201A}', '\u{0192}', '\u{201E}', '\u{2026}', '\u{2020}', '\u{2021}', '\u{02C6}',
    '\u{2030}', '\u{0160}', '\u{2039}', '\u{0152}', '\u{008D}', '\u{017D}', '\u{008F}', '\u{0090}', '\u{2018}',
    '\u{2019}', '\u{201C}', '\u{201D}', '\u{2022}', '\u{2013}', '\u{2014}', '\u{02DC}', '\u{2122}', '\u{0161}',
    '\u{203A}', '\u{0153}', '\u{009D}', '\u{017E}', '\u{0178}',
];

fn decode_latin1(bytes: &[u8]) -> String {
    bytes.iter().map(|&b| b as char).collect()
}

fn decode_cp1252(bytes: &[u8]) -> String {
    bytes
        .iter()
        .map(|&b| match b {
            0x80..=0x9F => CP1252_HIGH[(b - 0x80) as usize],
            _ => b as char,
        })
        .collect()
}

/// (garbled, repaired) pairs, longest garbled form first.
static MOJIBAKE_TABLE: LazyLock<Vec<(String, char)>> = LazyLock::new(|| {
    let mut table = Vec::new();
    for &target in MOJIBAKE_TARGETS {
        let mut buf = [0u8; 4];
        let bytes = target.encode_utf8(&mut buf).as_bytes();
        for garbled in [decode_latin1(bytes), decode_cp1252(bytes)] {
            if !table.iter().any(|(g, _): &(String, char)| *g == garbled) {
                table.push((garbled, target));
            }
        }
    }
    table.sort_by(|a, b| b.0.chars().count().cmp(&a.0.chars().count()).then(a.0.cmp(&b.0)));
    table
});

/// Replace known mojibake sequences with the character they were meant to be.
pub fn repair_mojibake(s: &str) -> String {
    if s.is_ascii() {
        return s.to_string();
    }
    let mut out = s.to_string();
    for (garbled, fixed) in MOJIBAKE_TABLE.iter() {
        if out.contains(garbled.as_str()) {
            out = out.replace(garbled.as_str(), fixed.encode_utf8(&mut [0u8; 4]));
        }
    }
    out
}

static HTML_TAG: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"</?[A-Za-z!][^<>]*>").unwrap());
static HTML_ENTITY: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"&(?:#([0-9]{1,7})|#[xX]([0-9a-fA-F]{1,6})|([A-Za-z][A-Za-z0-9]{1,9}));?").unwrap());

fn named_entity(name: &str) -> Option<&'static str> {
    Some(match name {
        "amp" => "&",
        "nbsp" | "ensp" | "emsp" | "thinsp" => " ",
        "lt" => "<",
        "gt" => ">",
        "quot" => "\"",
        "apos" => "'",
        "ndash" => "\u{2013}",
        "mdash" => "\u{2014}",
        "lsquo" | "rsquo" => "'",
        "ldquo" | "rdquo" => "\"",
        "hellip" => "...",
        "copy" => "\u{00A9}",
        "reg" => "\u{00AE}",
        "deg" => "\u{00B0}",
        "middot" | "bull" => "\u{00B7}",
        "eacute" => "é",
        "egrave" => "è",
        "aacute" => "á",
        "agrave" => "à",
        "iacute" => "í",
        "oacute" => "ó",
        "uacute" => "ú",
        "ouml" => "ö",
        "uuml" => "ü",
        "auml" => "ä",
        "ntilde" => "ñ",
        "ccedil" => "ç",
        "szlig" => "ß",
        _ => return None,
    })
}

/// Remove HTML tags and decode HTML character references.
pub fn strip_html(s: &str) -> String {
    if !s.contains('<') && !s.contains('&') {
        return s.to_string();
    }
    let untagged = HTML_TAG.replace_all(s, " ");
    HTML_ENTITY
        .replace_all(&untagged, |caps: &Captures| {
            let whole = caps.get(0).unwrap().as_str();
            if let Some(dec) = caps.get(1) {
                return numeric_ref(dec.as_str(), 10);
            }
            if let Some(hex) = caps.get(2) {
                return numeric_ref(hex.as_str(), 16);
            }
            let name = caps.get(3).unwrap().as_str();
            match named_entity(name) {
                Some(rep) => rep.to_string(),
                None => whole.to_string(),
            }
        })
        .into_owned()
}

fn numeric_ref(digits: &str, radix: u32) -> String {
    u32::from_str_radix(digits, radix)
        .ok()
        .and_then(char::from_u32)
        .map(String::from)
        .unwrap_or_else(|| " ".to_string())
}

/// ASCII spelling of letters that survive canonical decomposition.
fn fold_special(c: char) -> Option<&'static str> {
    Some(match c {
        'ß' => "ss",
        'æ' => "ae",
        'Æ' => "AE",
        'œ' => "oe",
        'Œ' => "OE",
        'ø' => "o",
        'Ø' => "O",
        'đ' | 'ð' => "d",
        'Đ' | 'Ð' => "D",
        'ł' => "l",
        'Ł' => "L",
        'þ' => "th",
        'Þ' => "TH",
        'ı' => "i",
        _ => return None,
    })
}

/// Full cleaning pipeline applied to every table cell and every label.
pub fn clean_cell(raw: &str) -> String {
    let repaired = repair_mojibake(raw);
    let stripped = strip_html(&repaired);

    let mut out = String::with_capacity(stripped.len());
    let mut pending_space = false;
    let push = |out: &mut String, c: char, pending: &mut bool| {
        if c.is_ascii_alphanumeric() {
            if *pending && !out.is_empty() {
                out.push(' ');
            }
            *pending = false;
            out.push(c.to_ascii_lowercase());
        } else {
            *pending = true;
        }
    };
    for c in stripped.nfkd() {
        if c.is_ascii() {
            push(&mut out, c, &mut pending_space);
        } else if is_combining_mark(c) {
            continue;
        } else if let Some(folded) = fold_special(c) {
            for f in folded.chars() {
                push(&mut out, f, &mut pending_space);
            }
        } else {
            pending_space = true;
        }
    }
    out
}

/// Tokens of a string after cleaning, in order, duplicates kept.
pub fn tokens(s: &str) -> Vec<String> {
    clean_cell(s).split(' ').filter(|t| !t.is_empty()).map(str::to_string).collect()
}

/// Sorted, deduplicated tokens.
pub fn distinct_tokens(s: &str) -> Vec<String> {
    let mut toks = tokens(s);
    toks.sort_unstable();
    toks.dedup();
    toks
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn accent_folding() {
        assert_eq!(clean_cell("caf\u{e9}"), "cafe");
        assert_eq!(clean_cell("Cafe\u{301}"), "cafe");
        assert_eq!(clean_cell("Straße Ærø"), "strasse aero");
    }

    #[test]
    fn empty_and_blank() {
        assert_eq!(clean_cell(""), "");
        assert_eq!(clean_cell("  \t\n "), "");
        assert_eq!(clean_cell("&nbsp;"), "");
    }

    #[test]
    fn html_entities_and_tags() {
        assert_eq!(clean_cell("A&amp;B <b>Co.</b>"), "a b co");
        assert_eq!(clean_cell("x&nbsp;y"), "x y");
        assert_eq!(clean_cell("line<br/>break"), "line break");
        assert_eq!(clean_cell("Beyonc&#233;"), "beyonce");
        assert_eq!(clean_cell("Beyonc&#xE9;"), "beyonce");
        assert_eq!(clean_cell("a < b > c"), "a b c");
    }

    #[test]
    fn mojibake_repair() {
        // UTF-8 bytes of the em dash read as CP1252 and as Latin-1
        assert_eq!(repair_mojibake("a\u{e2}\u{20ac}\u{201d}b"), "a\u{2014}b");
        assert_eq!(repair_mojibake("a\u{e2}\u{80}\u{94}b"), "a\u{2014}b");
        assert_eq!(repair_mojibake("caf\u{c3}\u{a9}"), "café");
        assert_eq!(clean_cell("Caf\u{c3}\u{a9} \u{e2}\u{20ac}\u{201c} Paris"), "cafe paris");
    }

    #[test]
    fn punctuation_keeps_token_boundaries() {
        assert_eq!(clean_cell("U.S.A"), "u s a");
        assert_eq!(clean_cell("The Island (2005 film)"), "the island 2005 film");
        assert_eq!(tokens("Bay, Michael"), vec!["bay", "michael"]);
    }

    #[test]
    fn non_latin_scripts_become_spaces() {
        assert_eq!(clean_cell("東京 Tokyo"), "tokyo");
    }

    proptest! {
        #[test]
        fn idempotent(s in "\\PC{0,40}") {
            let once = clean_cell(&s);
            prop_assert_eq!(clean_cell(&once), once.clone());
        }

        #[test]
        fn ascii_lowercase_single_spaced(s in "\\PC{0,40}") {
            let c = clean_cell(&s);
            prop_assert!(c.is_ascii());
            prop_assert!(!c.chars().any(|ch| ch.is_ascii_uppercase()));
            prop_assert!(!c.starts_with(' ') && !c.ends_with(' ') && !c.contains("  "));
            prop_assert!(c.chars().all(|ch| ch == ' ' || ch.is_ascii_alphanumeric()));
        }
    }
}
