//! Pieces shared by the line-oriented container formats (`.tkm`, `.tkb`).

use crate::error::{Error, SyntaxError};
use crate::lexer::{quote, tokenize, Cursor, Tok, Token};
use crate::model::{format_number, natural_lines, CellValue};
use crate::units::UnitRegistry;

pub const VERSION: &str = "tkd/1";

/// `"text" [num N] [unit "u"] [lines "l1" ...]`
pub fn encode_value(value: &CellValue) -> String {
    let mut out = quote(&value.text);
    if let Some(n) = value.numeric {
        out.push_str(" num ");
        out.push_str(&format_number(n));
    }
    if let Some(u) = &value.unit {
        out.push_str(" unit ");
        out.push_str(&quote(u));
    }
    if value.wrapped_lines != natural_lines(&value.text) {
        out.push_str(" lines");
        for l in &value.wrapped_lines {
            out.push(' ');
            out.push_str(&quote(l));
        }
    }
    out
}

pub fn decode_value(cur: &mut Cursor) -> Result<CellValue, SyntaxError> {
    let (start, text) = cur.string("cell text")?;
    let mut value = CellValue::text(text);
    if cur.is_word("num") {
        cur.next();
        let (_, n) = cur.number("number")?;
        value.numeric = Some(n);
    }
    if cur.is_word("unit") {
        cur.next();
        let (t, u) = cur.string("unit")?;
        if UnitRegistry::standard().canonical(&u) != Some(u.as_str()) {
            return Err(t.error(format!("unknown unit {u:?}")));
        }
        value.unit = Some(u);
    }
    if cur.is_word("lines") {
        cur.next();
        let mut lines = Vec::new();
        while let Some(Tok::Str(_)) = cur.peek_tok() {
            lines.push(cur.string("line")?.1);
        }
        value.wrapped_lines = lines;
    }
    value.check().map_err(|e| start.error(e.to_string()))?;
    Ok(value)
}

/// One non-blank line of a container file, already tokenized.
pub struct Line<'s> {
    pub number: usize,
    pub text: &'s str,
    pub tokens: Vec<Token>,
}

impl<'s> Line<'s> {
    pub fn cursor(&mut self) -> Cursor<'_> {
        Cursor::for_line(&mut self.tokens, self.number, self.text)
    }

    pub fn first_word(&self) -> Option<&str> {
        match self.tokens.first().map(|t| &t.tok) {
            Some(Tok::Word(w)) => Some(w),
            _ => None,
        }
    }
}

pub fn tokenize_line(number: usize, text: &str) -> Result<Vec<Token>, SyntaxError> {
    tokenize(text, false).map_err(|e| SyntaxError::new(number, e.column, e.message))
}

/// Checks the `tkd/1 <kind>` first line.
pub fn check_header(first: Option<(usize, &str)>, kind: &str) -> Result<(), Error> {
    let Some((number, text)) = first else {
        return Err(SyntaxError::new(1, 1, format!("expected `{VERSION} {kind}`")).into());
    };
    let mut words = text.split_whitespace();
    let version = words.next().unwrap_or_default();
    if version != VERSION {
        if version.starts_with("tkd/") {
            return Err(Error::VersionMismatch {
                found: version.to_string(),
            });
        }
        return Err(SyntaxError::new(number, 1, format!("expected `{VERSION} {kind}`")).into());
    }
    match (words.next(), words.next()) {
        (Some(k), None) if k == kind => Ok(()),
        _ => Err(SyntaxError::new(
            number,
            VERSION.len() + 2,
            format!("expected `{VERSION} {kind}`"),
        )
        .into()),
    }
}

pub fn encode_path(steps: &[usize]) -> String {
    if steps.is_empty() {
        "-".to_string()
    } else {
        steps
            .iter()
            .map(usize::to_string)
            .collect::<Vec<_>>()
            .join("/")
    }
}

pub fn decode_path(cur: &mut Cursor) -> Result<Vec<usize>, SyntaxError> {
    let (t, text) = cur.text("cell path")?;
    if text == "-" {
        return Ok(Vec::new());
    }
    text.split('/')
        .map(|s| s.parse::<usize>())
        .collect::<Result<Vec<_>, _>>()
        .map_err(|_| t.error(format!("malformed path `{text}`")))
}
