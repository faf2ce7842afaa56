//! Data rows: the unit of the row operations (merge, sort, packing, buffer).
//!
//! A template's row split is the deepest arbitrary rows split enclosing every
//! data leaf that carries a property. Its parts are the rows; parts of one
//! split instance form a section. Without such a split every data record is a
//! row and all records form one section.

use std::ops::Range;

use crate::error::{Error, Result};
use crate::model::{
    BlockNode, CellPath, InstanceNode, Region, SplitCount, TableModule, TableTemplate,
};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RowSplit {
    Records,
    /// Template path of the row split.
    Nested(Vec<usize>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DataRow {
    /// Root of the row: a record, or a part of the row split.
    pub path: CellPath,
    /// The split instance holding the row; `None` for record rows.
    pub section: Option<CellPath>,
}

pub fn row_split(template: &TableTemplate) -> RowSplit {
    let mut paths: Vec<Vec<usize>> = Vec::new();
    template.root.walk(&mut |path, node| {
        if let BlockNode::Leaf(l) = node {
            if l.property_id.is_some() && l.visible_in_data {
                paths.push(path.to_vec());
            }
        }
    });
    let Some(first) = paths.first() else {
        return RowSplit::Records;
    };
    let lca_len = (0..first.len())
        .take_while(|&i| paths.iter().all(|p| p.len() > i && p[i] == first[i]))
        .count();
    let mut deepest = None;
    let mut node = &template.root;
    for depth in 0..=lca_len {
        if let BlockNode::Split(s) = node {
            if s.count == SplitCount::Arbitrary {
                deepest = Some(first[..depth].to_vec());
            }
        }
        if depth == lca_len {
            break;
        }
        match node.as_split().and_then(|s| s.children.get(first[depth])) {
            Some(child) => node = child,
            None => break,
        }
    }
    match deepest {
        Some(path) => RowSplit::Nested(path),
        None => RowSplit::Records,
    }
}

pub fn data_rows(table: &TableModule) -> Vec<DataRow> {
    match row_split(&table.template) {
        RowSplit::Records => (1..table.records.len())
            .map(|r| DataRow {
                path: CellPath::new(r, []),
                section: None,
            })
            .collect(),
        RowSplit::Nested(tpath) => {
            let mut out = Vec::new();
            for (r, record) in table.records.iter().enumerate().skip(1) {
                collect(
                    record,
                    &table.template.root,
                    &tpath,
                    CellPath::new(r, []),
                    &mut out,
                );
            }
            out
        }
    }
}

fn collect(
    inst: &InstanceNode,
    block: &BlockNode,
    tpath: &[usize],
    prefix: CellPath,
    out: &mut Vec<DataRow>,
) {
    let (Some(children), Some(split)) = (inst.children(), block.as_split()) else {
        return;
    };
    let Some((&step, rest)) = tpath.split_first() else {
        for i in 0..children.len() {
            out.push(DataRow {
                path: prefix.child(i),
                section: Some(prefix.clone()),
            });
        }
        return;
    };
    match split.count {
        SplitCount::Arbitrary => {
            let proto = &split.children[0];
            for (i, part) in children.iter().enumerate() {
                collect(part, proto, rest, prefix.child(i), out);
            }
        }
        SplitCount::Fixed(_) => {
            if let (Some(c), Some(b)) = (children.get(step), split.children.get(step)) {
                collect(c, b, rest, prefix.child(step), out);
            }
        }
    }
}

pub fn check_range(range: &Range<usize>, len: usize) -> Result<()> {
    if range.start > range.end || range.end > len {
        return Err(Error::RangeOutOfBounds {
            start: range.start,
            end: range.end,
            len,
        });
    }
    Ok(())
}

/// Consecutive row index ranges sharing a section.
pub fn sections(rows: &[DataRow], range: Range<usize>) -> Vec<Range<usize>> {
    let mut out: Vec<Range<usize>> = Vec::new();
    for i in range {
        match out.last_mut() {
            Some(last) if rows[last.start].section == rows[i].section => last.end = i + 1,
            _ => out.push(i..i + 1),
        }
    }
    out
}

fn blank_part(table: &TableModule, split: &CellPath) -> Result<InstanceNode> {
    let proto = table
        .template
        .root
        .descend(&split.steps)
        .and_then(BlockNode::as_split)
        .filter(|s| s.count == SplitCount::Arbitrary)
        .and_then(|s| s.children.first())
        .ok_or_else(|| Error::NotArbitrarySplit {
            path: split.clone(),
        })?;
    Ok(InstanceNode::blank(proto, Region::Data))
}

fn parts_mut<'a>(
    table: &'a mut TableModule,
    split: &CellPath,
) -> Result<&'a mut Vec<InstanceNode>> {
    table
        .records
        .get_mut(split.record)
        .and_then(|r| r.get_mut(&split.steps))
        .and_then(InstanceNode::children_mut)
        .ok_or_else(|| Error::PathOutOfRange {
            path: split.clone(),
        })
}

/// Inserts a single blank part at `index`, ignoring insert units and groups.
pub(crate) fn insert_blank_part(
    table: &mut TableModule,
    split: &CellPath,
    index: usize,
) -> Result<CellPath> {
    let part = blank_part(table, split)?;
    let parts = parts_mut(table, split)?;
    let index = index.min(parts.len());
    parts.insert(index, part);
    Ok(split.child(index))
}

/// Appends a blank row to the last section, creating sections as needed.
pub fn append_row(table: &mut TableModule) -> Result<CellPath> {
    match row_split(&table.template) {
        RowSplit::Records => {
            let last = table.records.len() - 1;
            let r = table.insert_record(last)?;
            Ok(CellPath::new(r, []))
        }
        RowSplit::Nested(tpath) => {
            if table.records.len() == 1 {
                table.insert_record(0)?;
            }
            let mut path = CellPath::new(table.records.len() - 1, []);
            let mut block = table.template.root.clone();
            for &step in &tpath {
                let split = block.as_split().cloned().ok_or(Error::NoDataSplit)?;
                if split.count == SplitCount::Arbitrary {
                    let len = parts_mut(table, &path)?.len();
                    let part = if len == 0 {
                        insert_blank_part(table, &path, 0)?
                    } else {
                        path.child(len - 1)
                    };
                    path = part;
                } else {
                    path = path.child(step);
                }
                block = split.children[step].clone();
            }
            let len = parts_mut(table, &path)?.len();
            insert_blank_part(table, &path, len)
        }
    }
}

/// Inserts a blank row so it lands after data row `after - 1` (`after` = 0
/// puts it before the first row). Returns the new row's path.
pub fn insert_row_at(table: &mut TableModule, after: usize) -> Result<CellPath> {
    let rows = data_rows(table);
    if after > rows.len() {
        return Err(Error::RangeOutOfBounds {
            start: after,
            end: after,
            len: rows.len(),
        });
    }
    if rows.is_empty() {
        return append_row(table);
    }
    let (anchor, offset) = if after == 0 {
        (&rows[0], 0)
    } else {
        (&rows[after - 1], 1)
    };
    match &anchor.section {
        None => {
            let r = table.insert_record(anchor.path.record + offset - 1)?;
            Ok(CellPath::new(r, []))
        }
        Some(split) => {
            let index = *anchor
                .path
                .steps
                .last()
                .expect("nested row has a part index");
            insert_blank_part(table, split, index + offset)
        }
    }
}

/// Inserts a blank row directly above `row`, in the same section.
pub fn insert_row_before(table: &mut TableModule, row: &DataRow) -> Result<CellPath> {
    match &row.section {
        None => {
            let r = table.insert_record(row.path.record - 1)?;
            Ok(CellPath::new(r, []))
        }
        Some(split) => {
            let index = *row.path.steps.last().expect("nested row has a part index");
            insert_blank_part(table, split, index)
        }
    }
}

pub fn remove_row(table: &mut TableModule, row: &DataRow) -> Result<()> {
    match &row.section {
        None => table.delete_record(row.path.record),
        Some(split) => {
            let index = *row.path.steps.last().expect("nested row has a part index");
            let parts = parts_mut(table, split)?;
            if index >= parts.len() {
                return Err(Error::PathOutOfRange {
                    path: row.path.clone(),
                });
            }
            parts.remove(index);
            Ok(())
        }
    }
}

pub fn row_node<'a>(table: &'a TableModule, row: &DataRow) -> Result<&'a InstanceNode> {
    table.node(&row.path).map(|(_, inst)| inst)
}

pub(crate) fn row_node_mut<'a>(
    table: &'a mut TableModule,
    row: &DataRow,
) -> Option<&'a mut InstanceNode> {
    table
        .records
        .get_mut(row.path.record)?
        .get_mut(&row.path.steps)
}

/// Rearranges consecutive rows of one section: position `i` of the section
/// receives the row that was at `order[i]`.
pub fn reorder_section(table: &mut TableModule, rows: &[DataRow], order: &[usize]) -> Result<()> {
    let nodes: Vec<InstanceNode> = order
        .iter()
        .map(|&i| row_node(table, &rows[i]).cloned())
        .collect::<Result<_>>()?;
    for (slot, node) in rows.iter().zip(nodes) {
        if let Some(target) = row_node_mut(table, slot) {
            *target = node;
        }
    }
    Ok(())
}
