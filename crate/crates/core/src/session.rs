//! Text form of a calculation session.
//!
//! ```text
//! session  := cover decl* ;
//! cover    := "cover" ( "KP" "n=" INT "a=" INT | "S" "n=" INT ) ;
//! decl     := "cuspidal" IDENT "r0=" INT "l=" INT | "m" IDENT "=" seg ("+" seg)* ;
//! seg      := "[" INT "," INT "]" "_" IDENT ;
//! ```
//!
//! Whitespace is insignificant and `#` starts a comment running to the end of
//! the line.

use std::collections::BTreeMap;
use std::fmt;

use thiserror::Error;

use crate::covers::{CoverSpec, Family};
use crate::segments::{CuspidalDatum, Multisegment, Segment};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}, column {col}: {reason}")]
pub struct ParseError {
    pub line: usize,
    pub col: usize,
    pub reason: String,
}

/// A cover together with named cuspidal lines and multisegments.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Session {
    pub cover: CoverSpec,
    pub cuspidals: BTreeMap<String, CuspidalDatum>,
    pub multisegments: BTreeMap<String, Multisegment>,
}

impl Session {
    pub fn new(cover: CoverSpec) -> Self {
        Self {
            cover,
            cuspidals: BTreeMap::new(),
            multisegments: BTreeMap::new(),
        }
    }

    pub fn parse(input: &str) -> Result<Session, ParseError> {
        Parser::new(input)?.session()
    }

    pub fn multisegment(&self, name: &str) -> Option<&Multisegment> {
        self.multisegments.get(name)
    }
}

impl fmt::Display for Session {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "cover {}", self.cover)?;
        for datum in self.cuspidals.values() {
            writeln!(f, "{datum}")?;
        }
        for (name, m) in &self.multisegments {
            writeln!(f, "m {name} = {m}")?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum Tok {
    Word(String),
    Int(i64),
    Sym(char),
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Word(w) => write!(f, "'{w}'"),
            Tok::Int(i) => write!(f, "'{i}'"),
            Tok::Sym(c) => write!(f, "'{c}'"),
        }
    }
}

#[derive(Clone, Debug)]
struct Spanned {
    tok: Tok,
    line: usize,
    col: usize,
}

fn lex(input: &str) -> Result<Vec<Spanned>, ParseError> {
    let mut out = Vec::new();
    for (line_idx, line) in input.lines().enumerate() {
        let line_no = line_idx + 1;
        let chars: Vec<char> = line.chars().collect();
        let mut i = 0;
        while i < chars.len() {
            let c = chars[i];
            let col = i + 1;
            if c == '#' {
                break;
            }
            if c.is_whitespace() {
                i += 1;
                continue;
            }
            if c.is_ascii_alphabetic() {
                let start = i;
                while i < chars.len()
                    && (chars[i].is_ascii_alphanumeric() || chars[i] == '_' || chars[i] == '\'')
                {
                    i += 1;
                }
                out.push(Spanned {
                    tok: Tok::Word(chars[start..i].iter().collect()),
                    line: line_no,
                    col,
                });
                continue;
            }
            if c.is_ascii_digit()
                || (c == '-' && chars.get(i + 1).is_some_and(char::is_ascii_digit))
            {
                let start = i;
                i += 1;
                while i < chars.len() && chars[i].is_ascii_digit() {
                    i += 1;
                }
                let text: String = chars[start..i].iter().collect();
                let value = text.parse::<i64>().map_err(|_| ParseError {
                    line: line_no,
                    col,
                    reason: format!("integer out of range: {text}"),
                })?;
                out.push(Spanned {
                    tok: Tok::Int(value),
                    line: line_no,
                    col,
                });
                continue;
            }
            if "=[],+_".contains(c) {
                out.push(Spanned {
                    tok: Tok::Sym(c),
                    line: line_no,
                    col,
                });
                i += 1;
                continue;
            }
            return Err(ParseError {
                line: line_no,
                col,
                reason: format!("unexpected character '{c}'"),
            });
        }
    }
    Ok(out)
}

struct Parser {
    toks: Vec<Spanned>,
    pos: usize,
    end: (usize, usize),
}

impl Parser {
    fn new(input: &str) -> Result<Self, ParseError> {
        let toks = lex(input)?;
        let lines = input.lines().count().max(1);
        let last_len = input.lines().last().map_or(0, |l| l.chars().count());
        Ok(Self {
            toks,
            pos: 0,
            end: (lines, last_len + 1),
        })
    }

    fn here(&self) -> (usize, usize) {
        self.toks
            .get(self.pos)
            .map_or(self.end, |t| (t.line, t.col))
    }

    fn error_at(&self, (line, col): (usize, usize), reason: impl Into<String>) -> ParseError {
        ParseError {
            line,
            col,
            reason: reason.into(),
        }
    }

    fn error(&self, reason: impl Into<String>) -> ParseError {
        self.error_at(self.here(), reason)
    }

    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|t| &t.tok)
    }

    fn next(&mut self, expected: &str) -> Result<Tok, ParseError> {
        match self.toks.get(self.pos) {
            Some(t) => {
                self.pos += 1;
                Ok(t.tok.clone())
            }
            None => Err(self.error(format!("expected {expected}, found end of input"))),
        }
    }

    fn expect_sym(&mut self, c: char) -> Result<(), ParseError> {
        let at = self.here();
        match self.next(&format!("'{c}'"))? {
            Tok::Sym(s) if s == c => Ok(()),
            other => Err(self.error_at(at, format!("expected '{c}', found {other}"))),
        }
    }

    fn expect_word(&mut self, word: &str) -> Result<(), ParseError> {
        let at = self.here();
        match self.next(&format!("'{word}'"))? {
            Tok::Word(w) if w == word => Ok(()),
            other => Err(self.error_at(at, format!("expected '{word}', found {other}"))),
        }
    }

    fn ident(&mut self, what: &str) -> Result<String, ParseError> {
        let at = self.here();
        match self.next(what)? {
            Tok::Word(w) => Ok(w),
            other => Err(self.error_at(at, format!("expected {what}, found {other}"))),
        }
    }

    fn int(&mut self, what: &str) -> Result<i64, ParseError> {
        let at = self.here();
        match self.next(what)? {
            Tok::Int(i) => Ok(i),
            other => Err(self.error_at(at, format!("expected {what}, found {other}"))),
        }
    }

    fn positive(&mut self, what: &str) -> Result<u64, ParseError> {
        let at = self.here();
        let v = self.int(what)?;
        u64::try_from(v)
            .ok()
            .filter(|&v| v > 0)
            .ok_or_else(|| self.error_at(at, format!("{what} must be a positive integer, got {v}")))
    }

    /// `key "=" INT`
    fn keyed(&mut self, key: &str) -> Result<i64, ParseError> {
        self.expect_word(key)?;
        self.expect_sym('=')?;
        self.int(&format!("integer after '{key}='"))
    }

    fn keyed_positive(&mut self, key: &str) -> Result<u64, ParseError> {
        self.expect_word(key)?;
        self.expect_sym('=')?;
        self.positive(key)
    }

    fn session(&mut self) -> Result<Session, ParseError> {
        if self.toks.is_empty() {
            return Err(self.error_at((1, 1), "no cover declared"));
        }
        let at = self.here();
        match self.peek() {
            Some(Tok::Word(w)) if w == "cover" => {}
            _ => return Err(self.error_at(at, "no cover declared")),
        }
        let cover = self.cover()?;
        let mut session = Session::new(cover);
        while self.pos < self.toks.len() {
            let at = self.here();
            match self.ident("declaration")?.as_str() {
                "cuspidal" => self.cuspidal(&mut session, at)?,
                "m" => self.multisegment(&mut session)?,
                "cover" => return Err(self.error_at(at, "cover declared twice")),
                other => {
                    return Err(
                        self.error_at(at, format!("expected 'cuspidal' or 'm', found '{other}'"))
                    )
                }
            }
        }
        Ok(session)
    }

    fn cover(&mut self) -> Result<CoverSpec, ParseError> {
        self.expect_word("cover")?;
        let at = self.here();
        let family = match self.ident("cover family")?.as_str() {
            "KP" => {
                let n = self.keyed_positive("n")?;
                let a = self.keyed("a")?;
                (Family::KazhdanPatterson { a }, n)
            }
            "S" => (Family::Savin, self.keyed_positive("n")?),
            other => {
                return Err(self.error_at(
                    at,
                    format!("unknown cover family '{other}', expected KP or S"),
                ))
            }
        };
        CoverSpec::new(family.0, family.1, true).map_err(|e| self.error_at(at, e.to_string()))
    }

    fn cuspidal(&mut self, session: &mut Session, at: (usize, usize)) -> Result<(), ParseError> {
        let id_at = self.here();
        let id = self.ident("cuspidal name")?;
        let r0 = self.keyed_positive("r0")?;
        let l = self.keyed_positive("l")?;
        if session.cuspidals.contains_key(&id) {
            return Err(self.error_at(id_at, format!("duplicate cuspidal '{id}'")));
        }
        let datum = CuspidalDatum::for_cover(id.clone(), r0, l, &session.cover)
            .map_err(|e| self.error_at(at, e.to_string()))?;
        session.cuspidals.insert(id, datum);
        Ok(())
    }

    fn multisegment(&mut self, session: &mut Session) -> Result<(), ParseError> {
        let name_at = self.here();
        let name = self.ident("multisegment name")?;
        if session.multisegments.contains_key(&name) {
            return Err(self.error_at(name_at, format!("duplicate multisegment '{name}'")));
        }
        self.expect_sym('=')?;
        let mut segments = vec![self.segment(session)?];
        while self.peek() == Some(&Tok::Sym('+')) {
            self.pos += 1;
            segments.push(self.segment(session)?);
        }
        session
            .multisegments
            .insert(name, Multisegment::new(segments));
        Ok(())
    }

    fn segment(&mut self, session: &Session) -> Result<Segment, ParseError> {
        let at = self.here();
        self.expect_sym('[')?;
        let a = self.int("segment start")?;
        self.expect_sym(',')?;
        let b = self.int("segment end")?;
        self.expect_sym(']')?;
        self.expect_sym('_')?;
        let id_at = self.here();
        let id = self.ident("cuspidal name")?;
        let rho = session
            .cuspidals
            .get(&id)
            .ok_or_else(|| self.error_at(id_at, format!("unknown cuspidal '{id}'")))?;
        Segment::new(rho.clone(), a, b)
            .map_err(|e| self.error_at(at, format!("malformed segment: {e}")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_the_basic_session() {
        let s =
            Session::parse("cover KP n=2 a=0\ncuspidal rho1 r0=1 l=1\nm M1 = [0,2]_rho1").unwrap();
        assert_eq!(s.cover, CoverSpec::kp(2, 0).unwrap());
        assert_eq!(s.multisegments.len(), 1);
        assert_eq!(s.multisegment("M1").unwrap().total_size(), 3);
    }

    #[test]
    fn empty_input_has_no_cover() {
        let err = Session::parse("").unwrap_err();
        assert_eq!(err.reason, "no cover declared");
        let err = Session::parse("  # only a comment\n").unwrap_err();
        assert_eq!(err.reason, "no cover declared");
        let err = Session::parse("cuspidal p r0=1 l=1").unwrap_err();
        assert_eq!(err.reason, "no cover declared");
    }

    #[test]
    fn savin_skips_the_kp_divisibility() {
        let s = Session::parse("cover S n=4\ncuspidal p r0=2 l=2\nm X = [0,1]_p").unwrap();
        assert!(!s.cover.is_kp());
        let s = Session::parse("cover S n=4\ncuspidal p r0=1 l=2").unwrap();
        assert_eq!(s.cuspidals["p"].l(), 2);
        let err = Session::parse("cover KP n=4 a=1\ncuspidal p r0=1 l=2").unwrap_err();
        assert!(err.reason.contains("divide r0"), "{err}");
    }

    #[test]
    fn whitespace_and_comments() {
        let text = "# header\ncover   KP n = 3 a = -1 # trailing\n cuspidal rho r0 =2 l= 1\nm A = [0,1]_rho+[ -2 , 0 ]_rho\n";
        let s = Session::parse(text).unwrap();
        assert_eq!(s.cover.twist(), Some(-1));
        assert_eq!(
            s.multisegment("A").unwrap().to_string(),
            "[0,1]_rho + [-2,0]_rho"
        );
        // statements can share a line
        let one_line =
            Session::parse("cover S n=2 cuspidal p r0=1 l=1 m A = [0,0]_p m B = [1,1]_p").unwrap();
        assert_eq!(one_line.multisegments.len(), 2);
    }

    #[test]
    fn reports_errors_with_positions() {
        let err = Session::parse("cover KP n=2 a=0\nm M = [0,1]_nope").unwrap_err();
        assert_eq!((err.line, err.col), (2, 13));
        assert!(err.reason.contains("unknown cuspidal"));

        let err = Session::parse("cover KP n=4 a=0\ncuspidal p r0=3 l=3").unwrap_err();
        assert_eq!(err.line, 2);
        assert!(err.reason.contains("does not divide n"), "{err}");

        let err = Session::parse("cover S n=2\ncuspidal p r0=1 l=1\nm M = [2,0]_p").unwrap_err();
        assert!(err.reason.starts_with("malformed segment"), "{err}");

        let err =
            Session::parse("cover S n=2\ncuspidal p r0=1 l=1\ncuspidal p r0=1 l=2").unwrap_err();
        assert_eq!(
            (err.line, err.col, err.reason.as_str()),
            (3, 10, "duplicate cuspidal 'p'")
        );

        let err = Session::parse("cover S n=2\ncuspidal p r0=1 l=1\nm M = [0,0]_p\nm M = [1,1]_p")
            .unwrap_err();
        assert!(err.reason.contains("duplicate multisegment"));

        let err = Session::parse("cover S n=2\ncuspidal p r0=1 l=1\nm M = [0,0]_p +").unwrap_err();
        assert!(err.reason.contains("end of input"), "{err}");

        let err = Session::parse("cover T n=2").unwrap_err();
        assert!(err.reason.contains("unknown cover family"));

        assert!(Session::parse("cover S n=0").is_err());
        assert!(Session::parse("cover S n=2 cuspidal p r0=0 l=1").is_err());
        assert!(Session::parse("cover S n=2 ; ").is_err());
        assert!(Session::parse("cover S n=2 cover S n=3").is_err());
    }

    #[test]
    fn prints_canonically_and_round_trips() {
        let text = "cover KP n=2 a=0\ncuspidal rho1 r0=1 l=1\ncuspidal sigma r0=2 l=2\nm M2 = [0,0]_rho1 + [0,2]_rho1 + [3,3]_sigma\nm M1 = [0,2]_rho1\n";
        let s = Session::parse(text).unwrap();
        let printed = s.to_string();
        assert_eq!(
            printed,
            "cover KP n=2 a=0\ncuspidal rho1 r0=1 l=1\ncuspidal sigma r0=2 l=2\nm M1 = [0,2]_rho1\nm M2 = [0,2]_rho1 + [0,0]_rho1 + [3,3]_sigma\n"
        );
        assert_eq!(Session::parse(&printed).unwrap(), s);
    }
}
