//! Tokenizer shared by the `.tks`, `.tkm`, `.tkb`, `.cat`, `.rules` and
//! `.dwgp` formats.

use crate::error::SyntaxError;

#[derive(Debug, Clone, PartialEq)]
pub enum Tok {
    /// Bare word: anything up to whitespace or punctuation.
    Word(String),
    /// Double-quoted string with `\"`, `\\`, `\n`, `\t` escapes.
    Str(String),
    LBrace,
    RBrace,
    LBracket,
    RBracket,
    Eq,
    Comma,
    Pipe,
    Semi,
    Newline,
}

impl Tok {
    pub fn describe(&self) -> String {
        match self {
            Tok::Word(w) => format!("`{w}`"),
            Tok::Str(s) => format!("string {s:?}"),
            Tok::LBrace => "`{`".into(),
            Tok::RBrace => "`}`".into(),
            Tok::LBracket => "`[`".into(),
            Tok::RBracket => "`]`".into(),
            Tok::Eq => "`=`".into(),
            Tok::Comma => "`,`".into(),
            Tok::Pipe => "`|`".into(),
            Tok::Semi => "`;`".into(),
            Tok::Newline => "end of line".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Token {
    pub tok: Tok,
    pub line: usize,
    pub column: usize,
}

impl Token {
    pub fn error(&self, message: impl Into<String>) -> SyntaxError {
        SyntaxError::new(self.line, self.column, message)
    }
}

fn is_punct(c: char) -> bool {
    matches!(c, '{' | '}' | '[' | ']' | '=' | ',' | '|' | ';' | '"' | '#')
}

/// Splits `src` into tokens. `#` starts a comment running to the end of the
/// line. Newline tokens are emitted only when `newlines` is set.
pub fn tokenize(src: &str, newlines: bool) -> Result<Vec<Token>, SyntaxError> {
    let mut out = Vec::new();
    let mut chars = src.chars().peekable();
    let (mut line, mut column) = (1usize, 1usize);

    while let Some(&c) = chars.peek() {
        let (tl, tc) = (line, column);
        let push = |out: &mut Vec<Token>, tok| {
            out.push(Token {
                tok,
                line: tl,
                column: tc,
            })
        };
        match c {
            '\n' => {
                chars.next();
                if newlines {
                    push(&mut out, Tok::Newline);
                }
                line += 1;
                column = 1;
            }
            c if c.is_whitespace() => {
                chars.next();
                column += 1;
            }
            '#' => {
                while let Some(&c) = chars.peek() {
                    if c == '\n' {
                        break;
                    }
                    chars.next();
                    column += 1;
                }
            }
            '"' => {
                chars.next();
                column += 1;
                let mut s = String::new();
                loop {
                    match chars.next() {
                        None => return Err(SyntaxError::new(tl, tc, "unterminated string")),
                        Some('"') => {
                            column += 1;
                            break;
                        }
                        Some('\\') => {
                            column += 1;
                            let esc = chars.next();
                            column += 1;
                            match esc {
                                Some('"') => s.push('"'),
                                Some('\\') => s.push('\\'),
                                Some('n') => s.push('\n'),
                                Some('t') => s.push('\t'),
                                Some(other) => {
                                    return Err(SyntaxError::new(
                                        line,
                                        column - 1,
                                        format!("unknown escape `\\{other}`"),
                                    ))
                                }
                                None => {
                                    return Err(SyntaxError::new(tl, tc, "unterminated string"))
                                }
                            }
                        }
                        Some('\n') => {
                            return Err(SyntaxError::new(tl, tc, "newline inside string"));
                        }
                        Some(ch) => {
                            column += 1;
                            s.push(ch);
                        }
                    }
                }
                push(&mut out, Tok::Str(s));
            }
            '{' | '}' | '[' | ']' | '=' | ',' | '|' | ';' => {
                chars.next();
                column += 1;
                let tok = match c {
                    '{' => Tok::LBrace,
                    '}' => Tok::RBrace,
                    '[' => Tok::LBracket,
                    ']' => Tok::RBracket,
                    '=' => Tok::Eq,
                    ',' => Tok::Comma,
                    '|' => Tok::Pipe,
                    _ => Tok::Semi,
                };
                push(&mut out, tok);
            }
            _ => {
                let mut w = String::new();
                while let Some(&c) = chars.peek() {
                    if c.is_whitespace() || is_punct(c) {
                        break;
                    }
                    w.push(c);
                    chars.next();
                    column += 1;
                }
                push(&mut out, Tok::Word(w));
            }
        }
    }
    Ok(out)
}

/// Quotes a string for any of the text formats.
pub fn quote(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    out.push('"');
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\t' => out.push_str("\\t"),
            c => out.push(c),
        }
    }
    out.push('"');
    out
}

/// Cursor over a token list with position-aware errors.
pub struct Cursor<'a> {
    tokens: &'a [Token],
    pos: usize,
    /// Position reported for errors at end of input.
    eof: (usize, usize),
}

impl<'a> Cursor<'a> {
    pub fn new(tokens: &'a [Token], src: &str) -> Self {
        let line = src.split('\n').count().max(1);
        let column = src.rsplit('\n').next().map_or(0, |l| l.chars().count()) + 1;
        Cursor {
            tokens,
            pos: 0,
            eof: (line, column),
        }
    }

    /// Cursor over the tokens of a single line numbered `line`.
    pub fn for_line(tokens: &'a mut [Token], line: usize, text: &str) -> Self {
        for t in tokens.iter_mut() {
            t.line = line;
        }
        Cursor {
            tokens,
            pos: 0,
            eof: (line, text.chars().count() + 1),
        }
    }

    pub fn peek(&self) -> Option<&'a Token> {
        self.tokens.get(self.pos)
    }

    pub fn peek_tok(&self) -> Option<&'a Tok> {
        self.peek().map(|t| &t.tok)
    }

    #[allow(clippy::should_implement_trait)]
    pub fn next(&mut self) -> Option<&'a Token> {
        let t = self.tokens.get(self.pos);
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    pub fn at_end(&self) -> bool {
        self.pos >= self.tokens.len()
    }

    pub fn eof_error(&self, message: impl Into<String>) -> SyntaxError {
        SyntaxError::new(self.eof.0, self.eof.1, message)
    }

    /// Error located at the next token (or end of input).
    pub fn error_here(&self, message: impl Into<String>) -> SyntaxError {
        match self.peek() {
            Some(t) => t.error(message),
            None => self.eof_error(message),
        }
    }

    pub fn expect(&mut self, want: &Tok) -> Result<&'a Token, SyntaxError> {
        match self.next() {
            Some(t) if &t.tok == want => Ok(t),
            Some(t) => Err(t.error(format!(
                "expected {}, found {}",
                want.describe(),
                t.tok.describe()
            ))),
            None => {
                Err(self.eof_error(format!("expected {}, found end of input", want.describe())))
            }
        }
    }

    pub fn eat(&mut self, want: &Tok) -> bool {
        if self.peek_tok() == Some(want) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    pub fn is_word(&self, word: &str) -> bool {
        matches!(self.peek_tok(), Some(Tok::Word(w)) if w == word)
    }

    pub fn expect_word(&mut self, word: &str) -> Result<&'a Token, SyntaxError> {
        match self.next() {
            Some(t) if matches!(&t.tok, Tok::Word(w) if w == word) => Ok(t),
            Some(t) => Err(t.error(format!("expected `{word}`, found {}", t.tok.describe()))),
            None => Err(self.eof_error(format!("expected `{word}`, found end of input"))),
        }
    }

    /// A bare word or a quoted string.
    pub fn text(&mut self, what: &str) -> Result<(&'a Token, String), SyntaxError> {
        match self.next() {
            Some(t) => match &t.tok {
                Tok::Word(w) => Ok((t, w.clone())),
                Tok::Str(s) => Ok((t, s.clone())),
                other => Err(t.error(format!("expected {what}, found {}", other.describe()))),
            },
            None => Err(self.eof_error(format!("expected {what}, found end of input"))),
        }
    }

    pub fn string(&mut self, what: &str) -> Result<(&'a Token, String), SyntaxError> {
        match self.next() {
            Some(t) => match &t.tok {
                Tok::Str(s) => Ok((t, s.clone())),
                other => Err(t.error(format!("expected {what}, found {}", other.describe()))),
            },
            None => Err(self.eof_error(format!("expected {what}, found end of input"))),
        }
    }

    pub fn number(&mut self, what: &str) -> Result<(&'a Token, f64), SyntaxError> {
        let (t, text) = self.text(what)?;
        match text.parse::<f64>() {
            Ok(v) if v.is_finite() => Ok((t, v)),
            _ => Err(t.error(format!("expected {what}, found {}", t.tok.describe()))),
        }
    }

    pub fn integer(&mut self, what: &str) -> Result<(&'a Token, u64), SyntaxError> {
        let (t, text) = self.text(what)?;
        text.parse::<u64>()
            .map(|v| (t, v))
            .map_err(|_| t.error(format!("expected {what}, found {}", t.tok.describe())))
    }

    pub fn skip_newlines(&mut self) {
        while self.eat(&Tok::Newline) {}
    }

    /// Requires the end of a line (or of input).
    pub fn end_line(&mut self) -> Result<(), SyntaxError> {
        match self.next() {
            None => Ok(()),
            Some(t) if t.tok == Tok::Newline => Ok(()),
            Some(t) => Err(t.error(format!("expected end of line, found {}", t.tok.describe()))),
        }
    }
}
