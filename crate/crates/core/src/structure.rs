//! The `.tks` table-structure format.
//!
//! ```text
//! file  := "table" STRING attrs? block
//! block := ("cols" | "rows") ("fixed" INT | "arb")? attrs? "{" (block | leaf)+ "}"
//! leaf  := "leaf" STRING attrs?
//! attrs := "[" key "=" value ("," key "=" value)* "]"
//! ```
//!
//! Attribute keys: `id`, `header`, `data`, `width`, `prop`, `object`, `unit`,
//! `role`, `insert_unit`, `group`, `line`, `font`, `h`, plus `note` on the
//! table line. A leaf's string is its header text; its graph id defaults to
//! that text. Attributes may also be written bare (`width 10`).

use std::collections::HashSet;

use crate::error::{Error, Position, Result, SyntaxError};
use crate::lexer::{quote, tokenize, Cursor, Tok, Token};
use crate::model::{
    format_number, Axis, BlockNode, ConstraintRole, Leaf, LineType, Split, SplitCount,
    StyleOverride, StyleSpec, TableTemplate,
};
use crate::units::UnitRegistry;
use crate::validate::{validate_template, Diagnostic};

/// A parsed template plus the structural diagnostics found in it.
#[derive(Debug, Clone, PartialEq)]
pub struct ParsedStructure {
    pub template: TableTemplate,
    pub diagnostics: Vec<Diagnostic>,
}

impl ParsedStructure {
    pub fn has_errors(&self) -> bool {
        self.diagnostics.iter().any(Diagnostic::is_error)
    }

    /// The template, or `InvalidTemplate` when any diagnostic is an error.
    pub fn into_valid(self) -> Result<TableTemplate> {
        if self.has_errors() {
            Err(Error::InvalidTemplate {
                diagnostics: self.diagnostics,
            })
        } else {
            Ok(self.template)
        }
    }
}

pub fn parse_structure(text: &str) -> Result<ParsedStructure> {
    let tokens = tokenize(text, false)?;
    let mut cur = Cursor::new(&tokens, text);
    let mut parser = Parser {
        cur: &mut cur,
        ids: HashSet::new(),
    };
    let template = parser.file()?;
    let diagnostics = validate_template(&template);
    Ok(ParsedStructure {
        template,
        diagnostics,
    })
}

/// Parses raw bytes; invalid UTF-8 becomes a located syntax error.
pub fn parse_structure_bytes(bytes: &[u8]) -> Result<ParsedStructure> {
    match std::str::from_utf8(bytes) {
        Ok(text) => parse_structure(text),
        Err(e) => {
            let valid = &bytes[..e.valid_up_to()];
            let prefix = std::str::from_utf8(valid).unwrap_or_default();
            let line = prefix.matches('\n').count() + 1;
            let column = prefix.rsplit('\n').next().map_or(0, |l| l.chars().count()) + 1;
            Err(SyntaxError::new(line, column, "invalid UTF-8").into())
        }
    }
}

#[derive(Clone, Copy, PartialEq)]
enum Owner {
    Table,
    Block,
    Leaf,
}

const TABLE_KEYS: &[&str] = &["note", "line", "font", "h"];
const BLOCK_KEYS: &[&str] = &[
    "header",
    "data",
    "insert_unit",
    "group",
    "line",
    "font",
    "h",
];
const LEAF_KEYS: &[&str] = &[
    "id", "header", "data", "width", "prop", "object", "unit", "role", "line", "font", "h",
];

fn keys(owner: Owner) -> &'static [&'static str] {
    match owner {
        Owner::Table => TABLE_KEYS,
        Owner::Block => BLOCK_KEYS,
        Owner::Leaf => LEAF_KEYS,
    }
}

struct Attr<'a> {
    key: String,
    value: String,
    value_token: &'a Token,
}

struct Parser<'c, 'a> {
    cur: &'c mut Cursor<'a>,
    ids: HashSet<String>,
}

impl<'a> Parser<'_, 'a> {
    fn file(&mut self) -> Result<TableTemplate> {
        self.cur.expect_word("table")?;
        let (_, name) = self.cur.string("table name")?;
        let attrs = self.attrs(Owner::Table)?;
        let mut style = StyleSpec::default();
        let mut units_note = String::new();
        for a in &attrs {
            match a.key.as_str() {
                "note" => units_note = a.value.clone(),
                "line" => style.line = line_value(a)?,
                "font" => style.font_tag = a.value.clone(),
                "h" => style.text_height_mm = number_value(a)?,
                _ => unreachable!(),
            }
        }
        let root = if self.cur.eat(&Tok::LBrace) {
            // `{ ... }` around the root: one node is the root itself, several
            // form a columns split.
            let mut nodes = self.children()?;
            if nodes.len() == 1 {
                nodes.remove(0)
            } else {
                let n = nodes.len();
                BlockNode::Split(Split::new(Axis::Columns, SplitCount::Fixed(n), nodes))
            }
        } else {
            self.node()?
        };
        if let Some(t) = self.cur.peek() {
            return Err(t
                .error(format!("expected end of input, found {}", t.tok.describe()))
                .into());
        }
        Ok(TableTemplate {
            name,
            units_note,
            root,
            style_defaults: style,
        })
    }

    fn node(&mut self) -> Result<BlockNode> {
        let t = self
            .cur
            .next()
            .ok_or_else(|| self.cur.eof_error("expected `cols`, `rows` or `leaf`"))?;
        match &t.tok {
            Tok::Word(w) if w == "leaf" => self.leaf(),
            Tok::Word(w) if w == "cols" => self.block(Axis::Columns),
            Tok::Word(w) if w == "rows" => self.block(Axis::Rows),
            other => Err(t
                .error(format!(
                    "expected `cols`, `rows` or `leaf`, found {}",
                    other.describe()
                ))
                .into()),
        }
    }

    fn block(&mut self, axis: Axis) -> Result<BlockNode> {
        let declared = if self.cur.is_word("fixed") {
            self.cur.next();
            let (_, n) = self.cur.integer("part count")?;
            Some(SplitCount::Fixed(n as usize))
        } else if self.cur.is_word("arb") {
            self.cur.next();
            Some(SplitCount::Arbitrary)
        } else {
            None
        };
        let attrs = self.attrs(Owner::Block)?;
        self.cur.expect(&Tok::LBrace)?;
        let children = self.children()?;
        let count = declared.unwrap_or(SplitCount::Fixed(children.len()));
        let mut split = Split::new(axis, count, children);
        for a in &attrs {
            match a.key.as_str() {
                "header" => split.visible_in_header = bool_value(a)?,
                "data" => split.visible_in_data = bool_value(a)?,
                "insert_unit" => split.insert_unit = u32_value(a)?,
                "group" => split.insert_group = Some(a.value.clone()),
                "line" => split.style.line = Some(line_value(a)?),
                "font" => split.style.font_tag = Some(a.value.clone()),
                "h" => split.style.text_height_mm = Some(number_value(a)?),
                _ => unreachable!(),
            }
        }
        Ok(BlockNode::Split(split))
    }

    /// Nodes up to and including the closing `}`.
    fn children(&mut self) -> Result<Vec<BlockNode>> {
        let mut children = Vec::new();
        loop {
            match self.cur.peek_tok() {
                Some(Tok::RBrace) => {
                    if children.is_empty() {
                        return Err(self.cur.error_here("expected a block or leaf").into());
                    }
                    self.cur.next();
                    return Ok(children);
                }
                None => return Err(self.cur.eof_error("expected `}`").into()),
                _ => children.push(self.node()?),
            }
        }
    }

    fn leaf(&mut self) -> Result<BlockNode> {
        let (name_token, header_text) = self.cur.string("leaf header text")?;
        let attrs = self.attrs(Owner::Leaf)?;
        let mut leaf = Leaf::new(&header_text, 0.0);
        let mut id_token = name_token;
        for a in &attrs {
            match a.key.as_str() {
                "id" => {
                    leaf.graph_id = a.value.clone();
                    id_token = a.value_token;
                }
                "header" => leaf.visible_in_header = bool_value(a)?,
                "data" => leaf.visible_in_data = bool_value(a)?,
                "width" => leaf.width_mm = number_value(a)?,
                "prop" => leaf.property_id = Some(u32_value(a)?),
                "object" => leaf.object_class = Some(a.value.clone()),
                "unit" => {
                    let canonical =
                        UnitRegistry::standard()
                            .canonical(&a.value)
                            .ok_or_else(|| Error::UnknownUnit {
                                unit: a.value.clone(),
                                pos: Some(pos(a.value_token)),
                            })?;
                    leaf.unit = Some(canonical.to_string());
                }
                "role" => {
                    leaf.constraint_role = Some(match a.value.as_str() {
                        "source" => ConstraintRole::Source,
                        "subject" => ConstraintRole::Subject,
                        _ => {
                            return Err(a
                                .value_token
                                .error("role must be `source` or `subject`")
                                .into())
                        }
                    })
                }
                "line" => leaf.style.line = Some(line_value(a)?),
                "font" => leaf.style.font_tag = Some(a.value.clone()),
                "h" => leaf.style.text_height_mm = Some(number_value(a)?),
                _ => unreachable!(),
            }
        }
        if !self.ids.insert(leaf.graph_id.clone()) {
            return Err(Error::DuplicateGraphId {
                id: leaf.graph_id,
                pos: Some(pos(id_token)),
            });
        }
        Ok(BlockNode::Leaf(leaf))
    }

    fn attrs(&mut self, owner: Owner) -> Result<Vec<Attr<'a>>, SyntaxError> {
        let mut out: Vec<Attr<'a>> = Vec::new();
        let allowed = keys(owner);
        let push = |out: &mut Vec<Attr<'a>>,
                    key_token: &'a Token,
                    key: String,
                    value: (&'a Token, String)| {
            if !allowed.contains(&key.as_str()) {
                return Err(key_token.error(format!("unknown attribute `{key}`")));
            }
            if out.iter().any(|a| a.key == key) {
                return Err(key_token.error(format!("attribute `{key}` given twice")));
            }
            out.push(Attr {
                key,
                value: value.1,
                value_token: value.0,
            });
            Ok(())
        };
        if self.cur.eat(&Tok::LBracket) {
            loop {
                let key_token = self
                    .cur
                    .next()
                    .ok_or_else(|| self.cur.eof_error("expected attribute"))?;
                let Tok::Word(key) = &key_token.tok else {
                    return Err(key_token.error(format!(
                        "expected attribute name, found {}",
                        key_token.tok.describe()
                    )));
                };
                self.cur.expect(&Tok::Eq)?;
                let value = self.cur.text("attribute value")?;
                push(&mut out, key_token, key.clone(), value)?;
                if self.cur.eat(&Tok::Comma) {
                    continue;
                }
                self.cur.expect(&Tok::RBracket)?;
                break;
            }
        } else {
            // Bare `key value` pairs, ended by anything that is not a known key.
            while let Some(key_token) = self.cur.peek() {
                let Tok::Word(key) = &key_token.tok else {
                    break;
                };
                if !allowed.contains(&key.as_str()) {
                    break;
                }
                self.cur.next();
                self.cur.eat(&Tok::Eq);
                let value = self.cur.text("attribute value")?;
                push(&mut out, key_token, key.clone(), value)?;
            }
        }
        Ok(out)
    }
}

fn pos(t: &Token) -> Position {
    Position {
        line: t.line,
        column: t.column,
    }
}

fn bool_value(a: &Attr) -> Result<bool, SyntaxError> {
    match a.value.as_str() {
        "true" => Ok(true),
        "false" => Ok(false),
        _ => Err(a
            .value_token
            .error(format!("`{}` expects true or false", a.key))),
    }
}

fn number_value(a: &Attr) -> Result<f64, SyntaxError> {
    match a.value.parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(v),
        _ => Err(a.value_token.error(format!("`{}` expects a number", a.key))),
    }
}

fn u32_value(a: &Attr) -> Result<u32, SyntaxError> {
    a.value.parse::<u32>().map_err(|_| {
        a.value_token
            .error(format!("`{}` expects a non-negative integer", a.key))
    })
}

fn line_value(a: &Attr) -> Result<LineType, SyntaxError> {
    LineType::parse(&a.value)
        .ok_or_else(|| a.value_token.error("`line` expects thin, thick or none"))
}

/// Canonical text of a template: two-space indentation, attributes in a
/// fixed key order, defaults omitted.
pub fn serialize_structure(template: &TableTemplate) -> String {
    let mut out = String::new();
    out.push_str("table ");
    out.push_str(&quote(&template.name));
    let defaults = StyleSpec::default();
    let mut attrs = Vec::new();
    if !template.units_note.is_empty() {
        attrs.push(format!("note={}", quote(&template.units_note)));
    }
    let s = &template.style_defaults;
    if s.line != defaults.line {
        attrs.push(format!("line={}", s.line.name()));
    }
    if s.font_tag != defaults.font_tag {
        attrs.push(format!("font={}", quote(&s.font_tag)));
    }
    if s.text_height_mm != defaults.text_height_mm {
        attrs.push(format!("h={}", format_number(s.text_height_mm)));
    }
    push_attrs(&mut out, &attrs);
    out.push('\n');
    write_node(&mut out, &template.root, 0);
    out
}

fn push_attrs(out: &mut String, attrs: &[String]) {
    if !attrs.is_empty() {
        out.push_str(" [");
        out.push_str(&attrs.join(", "));
        out.push(']');
    }
}

fn style_attrs(attrs: &mut Vec<String>, style: &StyleOverride) {
    if let Some(l) = style.line {
        attrs.push(format!("line={}", l.name()));
    }
    if let Some(f) = &style.font_tag {
        attrs.push(format!("font={}", quote(f)));
    }
    if let Some(h) = style.text_height_mm {
        attrs.push(format!("h={}", format_number(h)));
    }
}

fn write_node(out: &mut String, node: &BlockNode, depth: usize) {
    let indent = "  ".repeat(depth);
    out.push_str(&indent);
    match node {
        BlockNode::Leaf(l) => {
            out.push_str("leaf ");
            out.push_str(&quote(&l.header_text));
            let mut attrs = Vec::new();
            if l.graph_id != l.header_text {
                attrs.push(format!("id={}", quote(&l.graph_id)));
            }
            if !l.visible_in_header {
                attrs.push("header=false".into());
            }
            if !l.visible_in_data {
                attrs.push("data=false".into());
            }
            attrs.push(format!("width={}", format_number(l.width_mm)));
            if let Some(p) = l.property_id {
                attrs.push(format!("prop={p}"));
            }
            if let Some(o) = &l.object_class {
                attrs.push(format!("object={}", quote(o)));
            }
            if let Some(u) = &l.unit {
                attrs.push(format!("unit={}", quote(u)));
            }
            if let Some(r) = l.constraint_role {
                attrs.push(format!("role={}", r.name()));
            }
            style_attrs(&mut attrs, &l.style);
            push_attrs(out, &attrs);
            out.push('\n');
        }
        BlockNode::Split(s) => {
            out.push_str(match s.axis {
                Axis::Columns => "cols",
                Axis::Rows => "rows",
            });
            match s.count {
                SplitCount::Arbitrary => out.push_str(" arb"),
                SplitCount::Fixed(n) if n != s.children.len() => {
                    out.push_str(&format!(" fixed {n}"))
                }
                SplitCount::Fixed(_) => {}
            }
            let mut attrs = Vec::new();
            if !s.visible_in_header {
                attrs.push("header=false".into());
            }
            if !s.visible_in_data {
                attrs.push("data=false".into());
            }
            if s.insert_unit != 1 {
                attrs.push(format!("insert_unit={}", s.insert_unit));
            }
            if let Some(g) = &s.insert_group {
                attrs.push(format!("group={}", quote(g)));
            }
            style_attrs(&mut attrs, &s.style);
            push_attrs(out, &attrs);
            out.push_str(" {\n");
            for c in &s.children {
                write_node(out, c, depth + 1);
            }
            out.push_str(&indent);
            out.push_str("}\n");
        }
    }
}
