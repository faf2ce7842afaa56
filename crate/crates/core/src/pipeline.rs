//! Specification generation from drawings and the row operations applied
//! to the result (merging, sorting, common names, packing).
//!
//! Row ranges count data rows from 0.

use std::cmp::Ordering;
use std::collections::HashSet;
use std::ops::Range;
use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::catalog::{fill_cells, PropertySet};
use crate::drawing::{load_drawing, DrawingFile, ElementType};
use crate::error::{Error, Result};
use crate::layout::Metrics;
use crate::model::{
    enumerate_graphs, props, template_steps, BlockNode, CellPath, CellValue, InstanceNode,
    PropertyId, SplitCount, TableModule,
};
use crate::rows::{
    append_row, check_range, data_rows, insert_blank_part, insert_row_before, remove_row,
    reorder_section, row_node, sections, DataRow,
};
use crate::units::UnitRegistry;
use crate::wrap::{char_budget, wrap_text};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CollectionScope {
    pub files: Vec<PathBuf>,
    pub element_types: Vec<ElementType>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Collected {
    pub properties: PropertySet,
    pub quantity: f64,
}

#[derive(Debug, Clone, PartialEq)]
enum Norm {
    Text(String),
    Measure(f64, crate::units::Dimension),
}

fn normalize(props: &PropertySet) -> Vec<(PropertyId, Norm)> {
    props
        .iter()
        .map(|(id, v)| {
            let norm = match (v.numeric, &v.unit) {
                (Some(n), Some(u)) => match UnitRegistry::standard().to_base(n, u) {
                    Ok((b, d)) => Norm::Measure(b, d),
                    Err(_) => Norm::Text(v.text.clone()),
                },
                _ => Norm::Text(v.text.clone()),
            };
            (*id, norm)
        })
        .collect()
}

/// Merges elements of the given types with equal properties, summing their
/// quantities, in order of first appearance.
pub fn collect_drawings(drawings: &[DrawingFile], types: &[ElementType]) -> Vec<Collected> {
    let mut keys: Vec<Vec<(PropertyId, Norm)>> = Vec::new();
    let mut out: Vec<Collected> = Vec::new();
    for e in drawings.iter().flat_map(|d| &d.elements) {
        if !types.contains(&e.element_type) {
            continue;
        }
        let key = normalize(&e.properties);
        match keys.iter().position(|k| *k == key) {
            Some(i) => out[i].quantity += e.quantity,
            None => {
                keys.push(key);
                out.push(Collected {
                    properties: e.properties.clone(),
                    quantity: e.quantity,
                });
            }
        }
    }
    out
}

/// Reads the scope's files (concurrently) and collects their elements.
pub fn collect(scope: &CollectionScope) -> Result<Vec<Collected>> {
    let drawings: Vec<Result<DrawingFile>> = std::thread::scope(|s| {
        let handles: Vec<_> = scope
            .files
            .iter()
            .map(|path| {
                s.spawn(move || {
                    let text = std::fs::read_to_string(path)
                        .map_err(|_| Error::FileNotFound(path.clone()))?;
                    load_drawing(&path.display().to_string(), &text)
                })
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("reader thread panicked"))
            .collect()
    });
    let drawings = drawings.into_iter().collect::<Result<Vec<_>>>()?;
    Ok(collect_drawings(&drawings, &scope.element_types))
}

/// Instance path of graph `tpath` inside the row, creating single parts in
/// empty arbitrary splits on the way. `None` when the graph lies outside
/// the row.
pub(crate) fn ensure_leaf(
    table: &mut TableModule,
    row: &CellPath,
    tpath: &[usize],
) -> Result<Option<CellPath>> {
    let root_t = template_steps(&table.template.root, &row.steps)
        .ok_or_else(|| Error::PathOutOfRange { path: row.clone() })?;
    if !tpath.starts_with(&root_t) {
        return Ok(None);
    }
    let mut path = row.clone();
    for &step in &tpath[root_t.len()..] {
        let split = table
            .template
            .root
            .descend(&path.steps)
            .and_then(BlockNode::as_split)
            .cloned()
            .ok_or_else(|| Error::PathOutOfRange { path: path.clone() })?;
        if split.count == SplitCount::Arbitrary {
            let (_, node) = table.node(&path)?;
            if node.children().is_none_or(Vec::is_empty) {
                insert_blank_part(table, &path, 0)?;
            }
            path = path.child(0);
        } else {
            path = path.child(step);
        }
    }
    Ok(Some(path))
}

/// Writes a property set into one row. Returns the properties without a
/// graph in the row.
pub fn fill_row(
    table: &mut TableModule,
    row: &CellPath,
    properties: &PropertySet,
) -> Result<Vec<PropertyId>> {
    let graphs = enumerate_graphs(&table.template);
    for g in &graphs {
        if g.property_id.is_some_and(|id| properties.contains_key(&id)) {
            ensure_leaf(table, row, &g.path)?;
        }
    }
    fill_cells(table, row, properties)
}

fn has_property_graph(table: &TableModule) -> bool {
    enumerate_graphs(&table.template)
        .iter()
        .any(|g| g.property_id.is_some())
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct AutofillReport {
    pub rows: Vec<CellPath>,
    /// Per entry, the properties that found no graph.
    pub dropped: Vec<Vec<PropertyId>>,
}

/// Appends one row per collected entry; the quantity goes to property 4.
pub fn autofill(table: &mut TableModule, collected: &[Collected]) -> Result<AutofillReport> {
    if !has_property_graph(table) {
        return Err(Error::NoDataSplit);
    }
    let mut report = AutofillReport::default();
    for entry in collected {
        let mut properties = entry.properties.clone();
        properties.insert(props::QUANTITY, CellValue::number(entry.quantity, None));
        let row = append_row(table)?;
        let dropped = fill_row(table, &row, &properties)?;
        report.rows.push(row);
        report.dropped.push(dropped);
    }
    Ok(report)
}

/// Relative path, value and property of one leaf in a row.
type RowLeaf<'a> = (Vec<usize>, &'a CellValue, Option<PropertyId>);
/// Relative path, amount, unit and whether the cell held a value.
type LeafKey = (Vec<usize>, CellValue);
type QtyCell = (Vec<usize>, f64, Option<String>, bool);

fn row_leaves<'a>(table: &'a TableModule, row: &DataRow) -> Result<Vec<RowLeaf<'a>>> {
    let node = row_node(table, row)?;
    Ok(node
        .leaf_values()
        .into_iter()
        .map(|(rel, v)| {
            let full: Vec<usize> = row.path.steps.iter().chain(&rel).copied().collect();
            let prop = table
                .template
                .root
                .descend(&full)
                .and_then(BlockNode::as_leaf)
                .and_then(|l| l.property_id);
            (rel, v, prop)
        })
        .collect())
}

fn quantity_of(v: &CellValue) -> f64 {
    v.numeric
        .or_else(|| v.text.trim().parse().ok())
        .unwrap_or(0.0)
}

/// Collapses rows equal on every graph but quantity, summing quantities.
pub fn merge_identical(table: &mut TableModule, range: Range<usize>) -> Result<usize> {
    let rows = data_rows(table);
    check_range(&range, rows.len())?;
    let mut doomed: Vec<usize> = Vec::new();
    let mut writes: Vec<(CellPath, CellValue)> = Vec::new();
    for part in sections(&rows, range) {
        let mut survivors: Vec<(usize, Vec<LeafKey>)> = Vec::new();
        let mut sums: Vec<Vec<QtyCell>> = Vec::new();
        for i in part {
            let leaves = row_leaves(table, &rows[i])?;
            let shape = row_node(table, &rows[i])?;
            let key: Vec<LeafKey> = leaves
                .iter()
                .filter(|(_, _, p)| *p != Some(props::QUANTITY))
                .map(|(rel, v, _)| (rel.clone(), strip(v)))
                .collect();
            let qty: Vec<QtyCell> = leaves
                .iter()
                .filter(|(_, _, p)| *p == Some(props::QUANTITY))
                .map(|(rel, v, _)| (rel.clone(), quantity_of(v), v.unit.clone(), !v.is_blank()))
                .collect();
            let found = survivors
                .iter()
                .position(|(s, k)| *k == key && same_shape(row_node(table, &rows[*s]).ok(), shape));
            match found {
                Some(j) => {
                    for (acc, q) in sums[j].iter_mut().zip(&qty) {
                        acc.1 += q.1;
                        acc.3 |= q.3;
                        if acc.2.is_none() {
                            acc.2 = q.2.clone();
                        }
                    }
                    doomed.push(i);
                }
                None => {
                    survivors.push((i, key));
                    sums.push(qty);
                }
            }
        }
        for ((i, _), qty) in survivors.iter().zip(sums) {
            for (rel, total, unit, present) in qty {
                if present {
                    writes.push((
                        rows[*i].path.join(&rel),
                        CellValue::number(total, unit.as_deref()),
                    ));
                }
            }
        }
    }
    for (path, value) in writes {
        table.write_leaf(&path, value);
    }
    for &i in doomed.iter().rev() {
        remove_row(table, &rows[i])?;
    }
    Ok(doomed.len())
}

fn strip(v: &CellValue) -> CellValue {
    CellValue {
        wrapped_lines: Vec::new(),
        ..v.clone()
    }
}

fn same_shape(a: Option<&InstanceNode>, b: &InstanceNode) -> bool {
    match (a, b) {
        (Some(InstanceNode::Leaf(_)), InstanceNode::Leaf(_)) => true,
        (Some(InstanceNode::Split(x)), InstanceNode::Split(y)) => {
            x.len() == y.len() && x.iter().zip(y).all(|(p, q)| same_shape(Some(p), q))
        }
        _ => false,
    }
}

/// Sort key of one cell: blanks first, then numbers, then text.
#[derive(Debug, Clone, PartialEq)]
pub enum SortKey {
    Blank,
    Number(f64),
    Text(String),
}

impl SortKey {
    pub fn of(v: Option<&CellValue>) -> SortKey {
        match v {
            None => SortKey::Blank,
            Some(v) if v.is_blank() => SortKey::Blank,
            Some(v) => match v
                .numeric
                .or_else(|| v.text.trim().parse::<f64>().ok().filter(|n| n.is_finite()))
            {
                Some(n) => SortKey::Number(n),
                None => SortKey::Text(v.text.clone()),
            },
        }
    }

    pub fn compare(&self, other: &SortKey) -> Ordering {
        use SortKey::*;
        match (self, other) {
            (Blank, Blank) => Ordering::Equal,
            (Blank, _) => Ordering::Less,
            (_, Blank) => Ordering::Greater,
            (Number(a), Number(b)) => a.total_cmp(b),
            (Number(_), Text(_)) => Ordering::Less,
            (Text(_), Number(_)) => Ordering::Greater,
            (Text(a), Text(b)) => a.cmp(b),
        }
    }
}

/// First value of a graph within a row.
fn graph_value<'a>(
    table: &'a TableModule,
    row: &DataRow,
    tpath: &[usize],
) -> Option<&'a CellValue> {
    let (_, node) = table.node(&row.path).ok()?;
    let root_t = template_steps(&table.template.root, &row.path.steps)?;
    if !tpath.starts_with(&root_t) {
        return None;
    }
    node.leaf_values()
        .into_iter()
        .find(|(rel, _)| {
            let full: Vec<usize> = row.path.steps.iter().chain(rel).copied().collect();
            template_steps(&table.template.root, &full).as_deref() == Some(tpath)
        })
        .map(|(_, v)| v)
}

fn graph_path(table: &TableModule, graph_id: &str) -> Result<Vec<usize>> {
    table
        .template
        .leaf_by_graph(graph_id)
        .map(|(p, _)| p)
        .ok_or_else(|| Error::UnknownGraph(graph_id.to_string()))
}

/// Stable sort of the data rows by the listed graphs, within each section.
pub fn sort_records(table: &mut TableModule, graph_ids: &[String]) -> Result<()> {
    let paths = graph_ids
        .iter()
        .map(|g| graph_path(table, g))
        .collect::<Result<Vec<_>>>()?;
    let rows = data_rows(table);
    for part in sections(&rows, 0..rows.len()) {
        let slice = &rows[part.clone()];
        let keys: Vec<Vec<SortKey>> = slice
            .iter()
            .map(|r| {
                paths
                    .iter()
                    .map(|p| SortKey::of(graph_value(table, r, p)))
                    .collect()
            })
            .collect();
        let mut order: Vec<usize> = (0..slice.len()).collect();
        order.sort_by(|&a, &b| {
            keys[a]
                .iter()
                .zip(&keys[b])
                .map(|(x, y)| x.compare(y))
                .find(|o| o.is_ne())
                .unwrap_or(Ordering::Equal)
        });
        reorder_section(table, slice, &order)?;
    }
    Ok(())
}

fn is_cut(chars: &[char], p: usize) -> bool {
    p == chars.len() || chars[p] == ' ' || chars[p] == '×' || (p > 0 && chars[p - 1] == '×')
}

/// Header and member parts of `text` cut at character `p`.
fn cut(text: &str, p: usize) -> (String, String) {
    let chars: Vec<char> = text.chars().collect();
    let head: String = chars[..p].iter().collect();
    let rest = &chars[p..];
    let member = match rest.first() {
        Some(' ') if !head.ends_with('×') => rest[1..].iter().collect(),
        _ => rest.iter().collect(),
    };
    (head, member)
}

/// Inverse of the cut: rebuilds a member's full text.
pub fn join_name(header: &str, member: &str) -> String {
    if member.is_empty() {
        header.to_string()
    } else if header.ends_with('×') || member.starts_with('×') {
        format!("{header}{member}")
    } else {
        format!("{header} {member}")
    }
}

/// Longest shared name head of `texts` and the remainders, or `None` when
/// the shared part is shorter than two characters.
pub fn common_name(texts: &[&str]) -> Option<(String, Vec<String>)> {
    let chars: Vec<Vec<char>> = texts.iter().map(|t| t.chars().collect()).collect();
    let first = chars.first()?;
    let lcp = (0..first.len())
        .take_while(|&i| chars.iter().all(|c| c.get(i) == Some(&first[i])))
        .count();
    for p in (2..=lcp).rev() {
        if !chars.iter().all(|c| is_cut(c, p)) {
            continue;
        }
        let parts: Vec<(String, String)> = texts.iter().map(|t| cut(t, p)).collect();
        let head = parts[0].0.clone();
        if head.trim().chars().count() < 2 {
            continue;
        }
        if parts
            .iter()
            .zip(texts)
            .all(|((h, m), t)| join_name(h, m) == *t)
        {
            return Some((head, parts.into_iter().map(|(_, m)| m).collect()));
        }
    }
    None
}

/// Moves the common head of a graph's texts into a new row above each
/// section's part of the range. Returns the inserted header rows.
pub fn extract_common_names(
    table: &mut TableModule,
    range: Range<usize>,
    graph_id: &str,
) -> Result<Vec<CellPath>> {
    let rows = data_rows(table);
    check_range(&range, rows.len())?;
    if range.len() < 2 {
        return Err(Error::RangeOutOfBounds {
            start: range.start,
            end: range.end,
            len: rows.len(),
        });
    }
    let tpath = graph_path(table, graph_id)?;
    let mut inserted = Vec::new();
    // Later sections first so earlier row indices stay valid.
    for part in sections(&rows, range).into_iter().rev() {
        if part.len() < 2 {
            continue;
        }
        let cells: Vec<(CellPath, String)> = rows[part.clone()]
            .iter()
            .filter_map(|r| {
                let (rel, v) =
                    row_node(table, r)
                        .ok()?
                        .leaf_values()
                        .into_iter()
                        .find(|(rel, _)| {
                            let full: Vec<usize> =
                                r.path.steps.iter().chain(rel).copied().collect();
                            template_steps(&table.template.root, &full).as_deref()
                                == Some(tpath.as_slice())
                        })?;
                Some((r.path.join(&rel), v.text.clone()))
            })
            .collect();
        if cells.len() != part.len() {
            continue;
        }
        let texts: Vec<&str> = cells.iter().map(|(_, t)| t.as_str()).collect();
        let Some((head, members)) = common_name(&texts) else {
            continue;
        };
        for ((path, _), member) in cells.iter().zip(members) {
            table.write_leaf(path, CellValue::text(member));
        }
        let row = insert_row_before(table, &rows[part.start])?;
        if let Some(leaf) = ensure_leaf(table, &row, &tpath)? {
            table.write_leaf(&leaf, CellValue::text(head));
        }
        inserted.push(row);
    }
    inserted.reverse();
    Ok(inserted)
}

/// Re-wraps every cell of the rows to its graph width.
pub fn pack_rows(table: &mut TableModule, range: Range<usize>, metrics: &Metrics) -> Result<()> {
    let rows = data_rows(table);
    check_range(&range, rows.len())?;
    let mut writes = Vec::new();
    for row in &rows[range] {
        for (rel, v, _) in row_leaves(table, row)? {
            let path = row.path.join(&rel);
            let Some(leaf) = table
                .template
                .root
                .descend(&path.steps)
                .and_then(BlockNode::as_leaf)
            else {
                continue;
            };
            let lines = wrap_text(&v.text, char_budget(leaf.width_mm, metrics.char_width_mm));
            if lines != v.wrapped_lines {
                let mut value = v.clone();
                value.wrapped_lines = lines;
                writes.push((path, value));
            }
        }
    }
    for (path, value) in writes {
        table.write_leaf(&path, value);
    }
    Ok(())
}

/// Sum of the quantity cells over all data rows.
pub fn total_quantity(table: &TableModule) -> f64 {
    let mut seen = HashSet::new();
    let mut total = 0.0;
    for row in data_rows(table) {
        if let Ok(leaves) = row_leaves(table, &row) {
            for (rel, v, p) in leaves {
                if p == Some(props::QUANTITY) && seen.insert(row.path.join(&rel)) {
                    total += quantity_of(v);
                }
            }
        }
    }
    total
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::structure::parse_structure;

    fn spec() -> TableModule {
        let t = parse_structure(
            r#"table "S" cols {
  leaf "Поз" [width=15, prop=1]
  leaf "Наименование" [width=65, prop=3]
  leaf "Кол" [width=10, prop=4]
}"#,
        )
        .unwrap()
        .into_valid()
        .unwrap();
        TableModule::new(t).unwrap()
    }

    fn entry(name: &str, qty: f64) -> Collected {
        let mut properties = PropertySet::new();
        properties.insert(3, CellValue::text(name));
        Collected {
            properties,
            quantity: qty,
        }
    }

    fn names(t: &TableModule) -> Vec<String> {
        data_rows(t)
            .iter()
            .map(|r| t.resolve_cell(&r.path.child(1)).unwrap().text.clone())
            .collect()
    }

    #[test]
    fn collect_merges_equal_sets() {
        let a = load_drawing(
            "a",
            "element position_label qty 4 { prop 3 = \"Труба 57×3.5\" prop 9 = 1 МПа }",
        )
        .unwrap();
        let b = load_drawing(
            "b",
            "element position_label qty 6 { prop 3 = \"Труба 57×3.5\" prop 9 = 1000 кПа }\nelement network_profile qty 1 { prop 3 = \"x\" }",
        )
        .unwrap();
        let c = collect_drawings(&[a.clone(), b.clone()], &[ElementType::PositionLabel]);
        assert_eq!(c.len(), 1);
        assert_eq!(c[0].quantity, 10.0);
        assert_eq!(collect_drawings(&[a, b], &ElementType::ALL).len(), 2);
    }

    #[test]
    fn autofill_then_merge_and_sort() {
        let mut t = spec();
        let mut with_note = entry("Труба 108×4", 9.0);
        with_note.properties.insert(7, CellValue::text("dropped"));
        let report = autofill(
            &mut t,
            &[
                entry("Труба 57×3.5", 4.0),
                with_note,
                entry("Труба 57×3.5", 6.0),
            ],
        )
        .unwrap();
        assert_eq!(report.rows.len(), 3);
        assert_eq!(report.dropped[1], vec![7]);
        assert_eq!(
            t.resolve_cell(&CellPath::new(2, [2])).unwrap().numeric,
            Some(9.0)
        );

        assert_eq!(merge_identical(&mut t, 0..3).unwrap(), 1);
        assert_eq!(names(&t), vec!["Труба 57×3.5", "Труба 108×4"]);
        assert_eq!(
            t.resolve_cell(&CellPath::new(1, [2])).unwrap().numeric,
            Some(10.0)
        );
        assert_eq!(merge_identical(&mut t, 0..2).unwrap(), 0);
        assert_eq!(total_quantity(&t), 19.0);

        sort_records(&mut t, &["Кол".to_string()]).unwrap();
        assert_eq!(names(&t), vec!["Труба 108×4", "Труба 57×3.5"]);
        assert_eq!(
            sort_records(&mut t, &["nope".to_string()])
                .unwrap_err()
                .code(),
            "unknown-graph"
        );
    }

    #[test]
    fn common_names() {
        let (h, m) = common_name(&["Труба 57×3.5", "Труба 108×4"]).unwrap();
        assert_eq!(
            (h.as_str(), m),
            ("Труба", vec!["57×3.5".to_string(), "108×4".to_string()])
        );
        let (h, m) = common_name(&["Труба 57×3.5", "Труба 57×4"]).unwrap();
        assert_eq!(
            (h.as_str(), m),
            ("Труба 57×", vec!["3.5".to_string(), "4".to_string()])
        );
        let (h, m) = common_name(&["Кран", "Кран"]).unwrap();
        assert_eq!(
            (h.as_str(), m),
            ("Кран", vec![String::new(), String::new()])
        );
        assert_eq!(common_name(&["Кран", "Труба"]), None);
        assert_eq!(common_name(&["a b", "a c"]), None);
    }

    #[test]
    fn extract_inserts_header_row() {
        let mut t = spec();
        autofill(
            &mut t,
            &[entry("Труба 57×3.5", 1.0), entry("Труба 108×4", 1.0)],
        )
        .unwrap();
        let inserted = extract_common_names(&mut t, 0..2, "Наименование").unwrap();
        assert_eq!(inserted, vec![CellPath::new(1, [])]);
        assert_eq!(names(&t), vec!["Труба", "57×3.5", "108×4"]);
    }

    #[test]
    fn packing_wraps_to_width() {
        let mut t = spec();
        autofill(
            &mut t,
            &[entry(
                "Труба стальная электросварная прямошовная 57×3.5 ГОСТ 10704-91",
                1.0,
            )],
        )
        .unwrap();
        pack_rows(&mut t, 0..1, &Metrics::default()).unwrap();
        let v = t.resolve_cell(&CellPath::new(1, [1])).unwrap().clone();
        assert_eq!(v.wrapped_lines.len(), 3);
        assert!(v.wrapped_lines.iter().all(|l| l.chars().count() <= 31));
        let before = t.clone();
        pack_rows(&mut t, 0..1, &Metrics::default()).unwrap();
        assert_eq!(t, before);
    }
}
