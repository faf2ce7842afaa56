//! `.dwgp` drawing-property files: the specifying properties of the elements
//! placed on a drawing.
//!
//! ```text
//! drawing = { element }
//! element = "element" TYPE "qty" NUM "{" prop { prop } "}"
//! prop    = "prop" INT "=" (STRING | WORD) [ UNIT ]
//! ```

use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::catalog::PropertySet;
use crate::error::{Error, Position, Result};
use crate::lexer::{tokenize, Cursor, Tok};
use crate::model::CellValue;
use crate::units::UnitRegistry;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ElementType {
    Axonometric,
    NetworkProfile,
    PositionLabel,
}

impl ElementType {
    pub const ALL: [ElementType; 3] = [
        ElementType::Axonometric,
        ElementType::NetworkProfile,
        ElementType::PositionLabel,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ElementType::Axonometric => "axonometric",
            ElementType::NetworkProfile => "network_profile",
            ElementType::PositionLabel => "position_label",
        }
    }
}

impl fmt::Display for ElementType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ElementType {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ElementType::ALL
            .into_iter()
            .find(|t| t.name() == s)
            .ok_or_else(|| Error::UnknownElementType {
                name: s.to_string(),
                pos: None,
            })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DrawingElement {
    pub element_type: ElementType,
    pub properties: PropertySet,
    pub quantity: f64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct DrawingFile {
    pub name: String,
    pub elements: Vec<DrawingElement>,
}

pub fn load_drawing(name: &str, text: &str) -> Result<DrawingFile> {
    let tokens = tokenize(text, false)?;
    let mut cur = Cursor::new(&tokens, text);
    let mut elements = Vec::new();
    while !cur.at_end() {
        cur.expect_word("element")?;
        let (tt, type_name) = cur.text("element type")?;
        let element_type =
            type_name
                .parse::<ElementType>()
                .map_err(|_| Error::UnknownElementType {
                    name: type_name.clone(),
                    pos: Some(Position {
                        line: tt.line,
                        column: tt.column,
                    }),
                })?;
        cur.expect_word("qty")?;
        let (qt, quantity) = cur.number("quantity")?;
        if quantity < 0.0 {
            return Err(qt.error("quantity must not be negative").into());
        }
        let open = cur.expect(&Tok::LBrace)?;
        let mut properties = PropertySet::new();
        let mut seen = HashSet::new();
        while cur.is_word("prop") {
            cur.next();
            let (idt, id) = cur.integer("property number")?;
            let id = id as u32;
            if !seen.insert(id) {
                return Err(Error::DuplicateProperty {
                    id,
                    pos: Some(Position {
                        line: idt.line,
                        column: idt.column,
                    }),
                });
            }
            cur.expect(&Tok::Eq)?;
            let (vt, raw) = cur.text("property value")?;
            let quoted = matches!(vt.tok, Tok::Str(_));
            let unit = match cur.peek_tok() {
                Some(Tok::Word(w)) if w != "prop" => Some(cur.text("unit")?),
                Some(Tok::Str(_)) => Some(cur.text("unit")?),
                _ => None,
            };
            let value = match unit {
                Some((ut, u)) => {
                    let canonical = UnitRegistry::standard().canonical(&u).ok_or_else(|| {
                        Error::UnknownUnit {
                            unit: u.clone(),
                            pos: Some(Position {
                                line: ut.line,
                                column: ut.column,
                            }),
                        }
                    })?;
                    let n: f64 = raw
                        .trim()
                        .parse()
                        .map_err(|_| vt.error(format!("{raw:?} is not a number")))?;
                    CellValue::number(n, Some(canonical))
                }
                None => match raw.parse::<f64>() {
                    Ok(n) if !quoted && n.is_finite() => CellValue::number(n, None),
                    _ => CellValue::text(raw),
                },
            };
            properties.insert(id, value);
        }
        cur.expect(&Tok::RBrace)?;
        if properties.is_empty() {
            return Err(open.error("element has no properties").into());
        }
        elements.push(DrawingElement {
            element_type,
            properties,
            quantity,
        });
    }
    Ok(DrawingFile {
        name: name.to_string(),
        elements,
    })
}

pub fn save_drawing(drawing: &DrawingFile) -> String {
    let mut out = String::new();
    for e in &drawing.elements {
        out.push_str(&format!(
            "element {} qty {} {{\n",
            e.element_type,
            crate::model::format_number(e.quantity)
        ));
        for (id, v) in &e.properties {
            out.push_str(&format!("  prop {id} = "));
            match (v.numeric, &v.unit) {
                (Some(_), Some(u)) => {
                    out.push_str(&format!("{} {}", v.text, crate::lexer::quote(u)))
                }
                (Some(_), None) => out.push_str(&v.text),
                _ => out.push_str(&crate::lexer::quote(&v.text)),
            }
            out.push('\n');
        }
        out.push_str("}\n");
    }
    out
}
