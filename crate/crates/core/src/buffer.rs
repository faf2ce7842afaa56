//! The item buffer: rows carried between tables as property-tagged values.
//!
//! `.tkb` layout:
//!
//! ```text
//! tkd/1 buffer
//! row
//! prop <id> <value>
//! ```

use serde::{Deserialize, Serialize};

use crate::catalog::PropertySet;
use crate::codec::{self, decode_value, encode_value, Line};
use crate::error::{Error, Result};
use crate::model::{BlockNode, CellPath, PropertyId, TableModule};
use crate::module_file::numbered_lines;
use crate::pipeline::fill_row;
use crate::rows::{check_range, data_rows, insert_row_at, row_node};

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct ItemBuffer {
    pub rows: Vec<PropertySet>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct PasteReport {
    pub rows: Vec<CellPath>,
    /// Per pasted row, the properties the target has no graph for.
    pub dropped: Vec<Vec<PropertyId>>,
}

/// Property values of the data rows in `range` (data rows count from 0).
pub fn copy_to_buffer(table: &TableModule, range: std::ops::Range<usize>) -> Result<ItemBuffer> {
    let rows = data_rows(table);
    check_range(&range, rows.len())?;
    let mut buffer = ItemBuffer::default();
    for row in &rows[range] {
        let mut set = PropertySet::new();
        for (rel, value) in row_node(table, row)?.leaf_values() {
            let full: Vec<usize> = row.path.steps.iter().chain(&rel).copied().collect();
            let Some(leaf) = table
                .template
                .root
                .descend(&full)
                .and_then(BlockNode::as_leaf)
            else {
                continue;
            };
            let Some(id) = leaf.property_id else { continue };
            if value.is_blank() || set.contains_key(&id) {
                continue;
            }
            let mut value = value.clone();
            if value.numeric.is_some() && value.unit.is_none() {
                value.unit = leaf.unit.clone();
            }
            set.insert(id, value);
        }
        buffer.rows.push(set);
    }
    Ok(buffer)
}

/// Inserts one row per buffer row after data row `at_index` (0 = top).
/// Either every row is pasted or the table is left unchanged.
pub fn paste_from_buffer(
    buffer: &ItemBuffer,
    table: &mut TableModule,
    at_index: usize,
) -> Result<PasteReport> {
    let count = data_rows(table).len();
    if at_index > count {
        return Err(Error::RangeOutOfBounds {
            start: at_index,
            end: at_index,
            len: count,
        });
    }
    let mut work = table.clone();
    let mut report = PasteReport::default();
    for (k, set) in buffer.rows.iter().enumerate() {
        let row = insert_row_at(&mut work, at_index + k)?;
        let dropped = fill_row(&mut work, &row, set)?;
        report.rows.push(row);
        report.dropped.push(dropped);
    }
    *table = work;
    Ok(report)
}

pub fn save_buffer(buffer: &ItemBuffer) -> String {
    let mut out = format!("{} buffer\n", codec::VERSION);
    for row in &buffer.rows {
        out.push_str("row\n");
        for (id, value) in row {
            out.push_str(&format!("prop {id} {}\n", encode_value(value)));
        }
    }
    out
}

pub fn load_buffer(text: &str) -> Result<ItemBuffer> {
    let mut lines = numbered_lines(text).filter(|(_, l)| !l.trim().is_empty());
    codec::check_header(lines.next(), "buffer")?;
    let mut buffer = ItemBuffer::default();
    for (number, raw) in lines {
        let mut line = Line {
            number,
            text: raw,
            tokens: codec::tokenize_line(number, raw)?,
        };
        if line.tokens.is_empty() {
            continue;
        }
        let mut cur = line.cursor();
        let first = cur.next().expect("non-empty line");
        match &first.tok {
            crate::lexer::Tok::Word(w) if w == "row" => {
                cur.end_line()?;
                buffer.rows.push(PropertySet::new());
            }
            crate::lexer::Tok::Word(w) if w == "prop" => {
                let Some(row) = buffer.rows.last_mut() else {
                    return Err(first.error("`prop` before `row`").into());
                };
                let (t, id) = cur.integer("property number")?;
                let id = id as PropertyId;
                let value = decode_value(&mut cur)?;
                cur.end_line()?;
                if row.insert(id, value).is_some() {
                    return Err(Error::DuplicateProperty {
                        id,
                        pos: Some(crate::error::Position {
                            line: t.line,
                            column: t.column,
                        }),
                    });
                }
            }
            other => {
                return Err(first
                    .error(format!(
                        "expected `row` or `prop`, found {}",
                        other.describe()
                    ))
                    .into())
            }
        }
    }
    Ok(buffer)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::CellValue;
    use crate::structure::parse_structure;

    fn table(src: &str) -> TableModule {
        TableModule::new(parse_structure(src).unwrap().into_valid().unwrap()).unwrap()
    }

    const EXPL: &str = r#"table "E" cols {
  leaf "№ п/п" [width=10]
  leaf "Наименование" [width=60, prop=3]
  leaf "Характеристика" [width=40, prop=7]
  leaf "Кол." [width=10, prop=4]
}"#;
    const SPEC: &str = r#"table "S" cols {
  leaf "Наименование" [width=60, prop=3]
  leaf "Кол" [width=10, prop=4]
  leaf "Масса, кг" [width=20, prop=5, unit="кг"]
}"#;

    #[test]
    fn copy_paste_between_kinds() {
        let mut e = table(EXPL);
        let r = e.insert_record(0).unwrap();
        e.set_cell(&CellPath::new(r, [0]), CellValue::text("1"))
            .unwrap();
        e.set_cell(&CellPath::new(r, [1]), CellValue::text("Вентилятор"))
            .unwrap();
        e.set_cell(&CellPath::new(r, [2]), CellValue::text("L=500"))
            .unwrap();
        e.set_cell(&CellPath::new(r, [3]), CellValue::number(9.0, None))
            .unwrap();
        let buffer = copy_to_buffer(&e, 0..1).unwrap();
        assert_eq!(
            buffer.rows[0].keys().copied().collect::<Vec<_>>(),
            vec![3, 4, 7]
        );

        let mut s = table(SPEC);
        let report = paste_from_buffer(&buffer, &mut s, 0).unwrap();
        assert_eq!(report.dropped, vec![vec![7]]);
        assert_eq!(
            s.resolve_cell(&CellPath::new(1, [1])).unwrap().numeric,
            Some(9.0)
        );
        assert!(s.resolve_cell(&CellPath::new(1, [2])).unwrap().is_blank());
        assert_eq!(
            paste_from_buffer(&buffer, &mut s, 5).unwrap_err().code(),
            "range-out-of-bounds"
        );
    }

    #[test]
    fn failed_paste_leaves_table_alone() {
        let mut set = PropertySet::new();
        set.insert(5, CellValue::number(1.0, Some("МПа")));
        let buffer = ItemBuffer { rows: vec![set] };
        let mut s = table(SPEC);
        let before = s.clone();
        assert_eq!(
            paste_from_buffer(&buffer, &mut s, 0).unwrap_err().code(),
            "unit-dimension-mismatch"
        );
        assert_eq!(s, before);
    }

    #[test]
    fn buffer_round_trips() {
        let mut set = PropertySet::new();
        set.insert(3, CellValue::text("Труба \"A\"\nB"));
        set.insert(5, CellValue::number(4.62, Some("кг")));
        let buffer = ItemBuffer {
            rows: vec![set, PropertySet::new()],
        };
        let text = save_buffer(&buffer);
        assert_eq!(load_buffer(&text).unwrap(), buffer);
        assert_eq!(
            load_buffer(&save_buffer(&ItemBuffer::default())).unwrap(),
            ItemBuffer::default()
        );
        assert_eq!(
            load_buffer("tkd/1 buffer\nprop 3 \"x\"\n")
                .unwrap_err()
                .code(),
            "syntax-error"
        );
    }
}
