//! Line-oriented N-Triples reader.
//!
//! Only what the index needs: absolute IRIs in subject and predicate
//! position, IRI or literal objects. Language tags and datatypes are
//! dropped from literals. Blank nodes are rejected.

use std::fmt;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Term {
    Iri(String),
    Literal(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Triple {
    pub subject: String,
    pub predicate: String,
    pub object: Term,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SyntaxError {
    pub column: usize,
    pub message: &'static str,
}

impl fmt::Display for SyntaxError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "column {}: {}", self.column + 1, self.message)
    }
}

impl std::error::Error for SyntaxError {}

struct Cursor<'a> {
    src: &'a str,
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn err<T>(&self, message: &'static str) -> Result<T, SyntaxError> {
        Err(SyntaxError { column: self.pos, message })
    }

    fn skip_ws(&mut self) {
        let rest = &self.src[self.pos..];
        self.pos += rest.len() - rest.trim_start_matches([' ', '\t']).len();
    }

    fn peek(&self) -> Option<char> {
        self.src[self.pos..].chars().next()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.peek()?;
        self.pos += c.len_utf8();
        Some(c)
    }

    fn expect(&mut self, c: char, message: &'static str) -> Result<(), SyntaxError> {
        if self.peek() == Some(c) {
            self.pos += c.len_utf8();
            Ok(())
        } else {
            self.err(message)
        }
    }

    fn hex_escape(&mut self, digits: usize) -> Result<char, SyntaxError> {
        let start = self.pos;
        let end = start + digits;
        let hex = self.src.get(start..end).ok_or(SyntaxError { column: start, message: "truncated \\u escape" })?;
        let cp = u32::from_str_radix(hex, 16)
            .map_err(|_| SyntaxError { column: start, message: "bad hex in \\u escape" })?;
        self.pos = end;
        char::from_u32(cp).ok_or(SyntaxError { column: start, message: "escape is not a scalar value" })
    }

    fn iri(&mut self) -> Result<String, SyntaxError> {
        self.expect('<', "expected '<'")?;
        let mut out = String::new();
        loop {
            match self.bump() {
                None => return self.err("unterminated IRI"),
                Some('>') => return Ok(out),
                Some('\\') => match self.bump() {
                    Some('u') => out.push(self.hex_escape(4)?),
                    Some('U') => out.push(self.hex_escape(8)?),
                    _ => return self.err("bad escape in IRI"),
                },
                Some(c) if c == ' ' || c == '<' || c == '"' => return self.err("illegal character in IRI"),
                Some(c) => out.push(c),
            }
        }
    }

    fn literal(&mut self) -> Result<String, SyntaxError> {
        self.expect('"', "expected '\"'")?;
        let mut out = String::new();
        loop {
            match self.bump() {
                None => return self.err("unterminated literal"),
                Some('"') => break,
                Some('\\') => {
                    let c = match self.bump() {
                        Some('t') => '\t',
                        Some('b') => '\u{8}',
                        Some('n') => '\n',
                        Some('r') => '\r',
                        Some('f') => '\u{c}',
                        Some('"') => '"',
                        Some('\'') => '\'',
                        Some('\\') => '\\',
                        Some('u') => self.hex_escape(4)?,
                        Some('U') => self.hex_escape(8)?,
                        _ => return self.err("bad escape in literal"),
                    };
                    out.push(c);
                }
                Some(c) => out.push(c),
            }
        }
        match self.peek() {
            Some('@') => {
                self.pos += 1;
                let rest = &self.src[self.pos..];
                let n = rest.find(|c: char| !(c.is_ascii_alphanumeric() || c == '-')).unwrap_or(rest.len());
                if n == 0 {
                    return self.err("empty language tag");
                }
                self.pos += n;
            }
            Some('^') => {
                self.pos += 1;
                self.expect('^', "expected '^^'")?;
                self.iri()?;
            }
            _ => {}
        }
        Ok(out)
    }
}

fn is_absolute(iri: &str) -> bool {
    iri.contains("://")
}

/// Parse one line. Blank lines and comments yield `Ok(None)`.
pub fn parse_line(line: &str) -> Result<Option<Triple>, SyntaxError> {
    let mut cur = Cursor { src: line.trim_end_matches(['\r', '\n']), pos: 0 };
    cur.skip_ws();
    match cur.peek() {
        None | Some('#') => return Ok(None),
        Some('_') => return cur.err("blank nodes are not supported"),
        _ => {}
    }
    let subject = cur.iri()?;
    if !is_absolute(&subject) {
        return cur.err("subject is not an absolute IRI");
    }
    cur.skip_ws();
    let predicate = cur.iri()?;
    if !is_absolute(&predicate) {
        return cur.err("predicate is not an absolute IRI");
    }
    cur.skip_ws();
    let object = match cur.peek() {
        Some('<') => Term::Iri(cur.iri()?),
        Some('"') => Term::Literal(cur.literal()?),
        Some('_') => return cur.err("blank nodes are not supported"),
        _ => return cur.err("expected IRI or literal object"),
    };
    cur.skip_ws();
    cur.expect('.', "expected '.' terminating the triple")?;
    cur.skip_ws();
    match cur.peek() {
        None | Some('#') => Ok(Some(Triple { subject, predicate, object })),
        _ => cur.err("trailing content after '.'"),
    }
}
