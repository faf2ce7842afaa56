//! The `.tkm` table-module container.
//!
//! ```text
//! tkd/1 module
//! continuation [height=H, direction=right, repeat_header=B, number_row=B, first_number=N]
//! structure <line count>
//! <canonical .tks text>
//! record <index> [counts <n> ...]
//! cell <path> <value>
//! ```
//!
//! `counts` lists the part count of every arbitrary split of the record in
//! depth-first order. Only non-blank cells are written.

use crate::codec::{self, decode_path, decode_value, encode_path, encode_value, Line};
use crate::error::{Error, Position, Result, SyntaxError};
use crate::lexer::{Cursor, Tok};
use crate::model::{
    format_number, BlockNode, CellValue, ContinuationSpec, Direction, InstanceNode, Region,
    SplitCount, TableModule,
};
use crate::structure::{parse_structure, serialize_structure};

pub fn save_module(table: &TableModule) -> String {
    let mut out = String::new();
    out.push_str(codec::VERSION);
    out.push_str(" module\n");
    out.push_str(&continuation_line(&table.continuation));
    let structure = serialize_structure(&table.template);
    out.push_str(&format!("structure {}\n", structure.lines().count()));
    out.push_str(&structure);
    for (index, record) in table.records.iter().enumerate() {
        let mut counts = Vec::new();
        collect_counts(&table.template.root, record, &mut counts);
        out.push_str(&format!("record {index}"));
        if !counts.is_empty() {
            out.push_str(" counts");
            for c in counts {
                out.push_str(&format!(" {c}"));
            }
        }
        out.push('\n');
        for (path, value) in record.leaf_values() {
            if *value != CellValue::blank() {
                out.push_str(&format!(
                    "cell {} {}\n",
                    encode_path(&path),
                    encode_value(value)
                ));
            }
        }
    }
    out
}

fn continuation_line(c: &ContinuationSpec) -> String {
    let mut attrs = Vec::new();
    if let Some(h) = c.chunk_height_mm {
        attrs.push(format!("height={}", format_number(h)));
    }
    attrs.push(format!(
        "direction={}",
        match c.direction {
            Direction::Left => "left",
            Direction::Right => "right",
        }
    ));
    attrs.push(format!("repeat_header={}", c.repeat_header));
    attrs.push(format!("number_row={}", c.number_row));
    attrs.push(format!("first_number={}", c.first_graph_number));
    format!("continuation [{}]\n", attrs.join(", "))
}

fn collect_counts(block: &BlockNode, inst: &InstanceNode, out: &mut Vec<usize>) {
    if let (BlockNode::Split(s), InstanceNode::Split(children)) = (block, inst) {
        match s.count {
            SplitCount::Arbitrary => {
                out.push(children.len());
                if let Some(proto) = s.children.first() {
                    for c in children {
                        collect_counts(proto, c, out);
                    }
                }
            }
            SplitCount::Fixed(_) => {
                for (b, c) in s.children.iter().zip(children) {
                    collect_counts(b, c, out);
                }
            }
        }
    }
}

fn build(block: &BlockNode, counts: &mut std::slice::Iter<usize>) -> Option<InstanceNode> {
    match block {
        BlockNode::Leaf(_) => Some(InstanceNode::Leaf(CellValue::blank())),
        BlockNode::Split(s) => match s.count {
            SplitCount::Arbitrary => {
                let n = *counts.next()?;
                let proto = s.children.first()?;
                (0..n)
                    .map(|_| build(proto, counts))
                    .collect::<Option<Vec<_>>>()
                    .map(InstanceNode::Split)
            }
            SplitCount::Fixed(_) => s
                .children
                .iter()
                .map(|c| build(c, counts))
                .collect::<Option<Vec<_>>>()
                .map(InstanceNode::Split),
        },
    }
}

/// Lines with their 1-based numbers.
pub(crate) fn numbered_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.split('\n')
        .enumerate()
        .map(|(i, l)| (i + 1, l.strip_suffix('\r').unwrap_or(l)))
}

fn shift(err: Error, offset: usize) -> Error {
    match err {
        Error::Syntax(e) => Error::Syntax(SyntaxError::new(e.line + offset, e.column, e.message)),
        Error::DuplicateGraphId { id, pos } => Error::DuplicateGraphId {
            id,
            pos: pos.map(|p| Position {
                line: p.line + offset,
                column: p.column,
            }),
        },
        Error::UnknownUnit { unit, pos } => Error::UnknownUnit {
            unit,
            pos: pos.map(|p| Position {
                line: p.line + offset,
                column: p.column,
            }),
        },
        other => other,
    }
}

pub fn load_module(text: &str) -> Result<TableModule> {
    let mut lines = numbered_lines(text)
        .filter(|(_, l)| !l.trim().is_empty())
        .peekable();
    codec::check_header(lines.next(), "module")?;

    let mut continuation = ContinuationSpec::default();
    let mut template = None;
    let mut records: Vec<InstanceNode> = Vec::new();

    while let Some((number, raw)) = lines.next() {
        let mut line = Line {
            number,
            text: raw,
            tokens: codec::tokenize_line(number, raw)?,
        };
        if line.tokens.is_empty() {
            continue;
        }
        let keyword = line.first_word().unwrap_or_default().to_string();
        let mut cur = line.cursor();
        let first = cur.next().expect("non-empty line");
        match keyword.as_str() {
            "continuation" => {
                continuation = parse_continuation(&mut cur)?;
                cur.end_line()?;
            }
            "structure" => {
                let (t, count) = cur.integer("line count")?;
                cur.end_line()?;
                let mut body = String::new();
                let mut taken = 0;
                // Structure lines are taken verbatim, blank ones included.
                for (n, l) in numbered_lines(text).skip(number).take(count as usize) {
                    body.push_str(l);
                    body.push('\n');
                    taken = n;
                }
                if (taken as u64) < number as u64 + count {
                    return Err(t.error("structure section is truncated").into());
                }
                let parsed = parse_structure(&body).map_err(|e| shift(e, number))?;
                template = Some(parsed.into_valid()?);
                // Skip the consumed lines.
                while let Some(&(n, _)) = lines.peek() {
                    if n > taken {
                        break;
                    }
                    lines.next();
                }
            }
            "record" => {
                let Some(template) = &template else {
                    return Err(first.error("record before structure").into());
                };
                let (t, index) = cur.integer("record index")?;
                if index as usize != records.len() {
                    return Err(t
                        .error(format!("expected record {}, found {index}", records.len()))
                        .into());
                }
                let mut counts = Vec::new();
                if cur.is_word("counts") {
                    cur.next();
                    while !cur.at_end() {
                        counts.push(cur.integer("part count")?.1 as usize);
                    }
                }
                cur.end_line()?;
                let mut iter = counts.iter();
                let record = build(&template.root, &mut iter)
                    .filter(|_| iter.next().is_none())
                    .ok_or_else(|| t.error("part counts do not match the structure"))?;
                records.push(record);
            }
            "cell" => {
                let (Some(template), Some(record)) = (&template, records.last_mut()) else {
                    return Err(first.error("cell before record").into());
                };
                let path_token = cur.peek().cloned();
                let steps = decode_path(&mut cur)?;
                let value = decode_value(&mut cur)?;
                cur.end_line()?;
                let is_leaf = matches!(template.root.descend(&steps), Some(BlockNode::Leaf(_)));
                match record.get_mut(&steps) {
                    Some(InstanceNode::Leaf(v)) if is_leaf => *v = value,
                    _ => {
                        let t = path_token.expect("path token");
                        return Err(t.error("path does not address a leaf").into());
                    }
                }
            }
            other => {
                return Err(first.error(format!("unexpected `{other}`")).into());
            }
        }
    }

    let template = template.ok_or_else(|| SyntaxError::new(1, 1, "missing structure section"))?;
    if records.is_empty() {
        // A module without records still has its header.
        records.push(InstanceNode::blank(&template.root, Region::Header));
    }
    Ok(TableModule {
        template,
        records,
        continuation,
    })
}

fn parse_continuation(cur: &mut Cursor) -> Result<ContinuationSpec, SyntaxError> {
    let mut c = ContinuationSpec::default();
    cur.expect(&Tok::LBracket)?;
    if cur.eat(&Tok::RBracket) {
        return Ok(c);
    }
    loop {
        let (key_token, key) = cur.text("attribute")?;
        cur.expect(&Tok::Eq)?;
        let (value_token, value) = cur.text("value")?;
        let bad = || value_token.error(format!("bad value for `{key}`"));
        match key.as_str() {
            "height" => c.chunk_height_mm = Some(value.parse().map_err(|_| bad())?),
            "direction" => {
                c.direction = match value.as_str() {
                    "left" => Direction::Left,
                    "right" => Direction::Right,
                    _ => return Err(bad()),
                }
            }
            "repeat_header" => c.repeat_header = value.parse().map_err(|_| bad())?,
            "number_row" => c.number_row = value.parse().map_err(|_| bad())?,
            "first_number" => c.first_graph_number = value.parse().map_err(|_| bad())?,
            _ => return Err(key_token.error(format!("unknown attribute `{key}`"))),
        }
        if cur.eat(&Tok::Comma) {
            continue;
        }
        cur.expect(&Tok::RBracket)?;
        return Ok(c);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::CellPath;

    const SRC: &str = "table \"T\"\ncols {\n  leaf \"A\" [width=10]\n  rows arb {\n    leaf \"B\" [width=10, unit=\"кг\"]\n  }\n}\n";

    fn table() -> TableModule {
        let t = parse_structure(SRC).unwrap().into_valid().unwrap();
        let mut m = TableModule::new(t).unwrap();
        m.insert_record(0).unwrap();
        m.insert_part(&CellPath::new(1, [1]), 0).unwrap();
        m.insert_part(&CellPath::new(1, [1]), 0).unwrap();
        m.set_cell(&CellPath::new(1, [0]), CellValue::text("x\ny"))
            .unwrap();
        m.set_cell(
            &CellPath::new(1, [1, 1]),
            CellValue::number(2.5, Some("кг")),
        )
        .unwrap();
        m.continuation.chunk_height_mm = Some(180.0);
        m
    }

    #[test]
    fn module_round_trips() {
        let m = table();
        let text = save_module(&m);
        let back = load_module(&text).unwrap();
        assert_eq!(back, m);
        assert_eq!(save_module(&back), text);
    }

    #[test]
    fn header_only_round_trips() {
        let t = parse_structure(SRC).unwrap().into_valid().unwrap();
        let m = TableModule::new(t).unwrap();
        assert_eq!(load_module(&save_module(&m)).unwrap(), m);
    }

    #[test]
    fn version_and_shape_errors() {
        let text = save_module(&table()).replacen("tkd/1", "tkd/9", 1);
        assert_eq!(load_module(&text).unwrap_err().code(), "version-mismatch");

        let text = save_module(&table()).replace("record 1 counts 2", "record 1 counts 2 4");
        let err = load_module(&text).unwrap_err();
        assert_eq!(err.code(), "syntax-error");
        assert!(err.to_string().contains("part counts"));

        let text = save_module(&table()).replace("cell 1/0", "cell 1/7");
        assert!(load_module(&text)
            .unwrap_err()
            .to_string()
            .contains("does not address a leaf"));
    }

    #[test]
    fn structure_errors_point_into_the_file() {
        let text = save_module(&table()).replace("width=10]", "width=ten]");
        let err = load_module(&text).unwrap_err();
        assert_eq!(err.position().unwrap().line, 6);
    }
}
