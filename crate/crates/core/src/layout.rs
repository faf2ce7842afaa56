//! Geometry of a table module: rectangles, text boxes and ruling lines.
//!
//! Coordinates are millimetres from the table's top-left corner, y down.
//! Rectangles include their top and left edges only.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{
    Axis, BlockNode, CellPath, InstanceNode, LineType, Region, SplitCount, StyleOverride,
    TableModule,
};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub row_height_mm: f64,
    /// Character cell width of the text renderer and the packing budget.
    pub char_width_mm: f64,
}

impl Default for Metrics {
    fn default() -> Self {
        Metrics {
            row_height_mm: 8.0,
            char_width_mm: 2.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rect {
    pub x: f64,
    pub y: f64,
    pub width: f64,
    pub height: f64,
}

impl Rect {
    pub fn new(x: f64, y: f64, width: f64, height: f64) -> Self {
        Rect {
            x,
            y,
            width,
            height,
        }
    }

    pub fn right(&self) -> f64 {
        self.x + self.width
    }

    pub fn bottom(&self) -> f64 {
        self.y + self.height
    }

    pub fn area(&self) -> f64 {
        self.width * self.height
    }

    pub fn center(&self) -> (f64, f64) {
        (self.x + self.width / 2.0, self.y + self.height / 2.0)
    }

    pub fn contains(&self, x: f64, y: f64) -> bool {
        x >= self.x && x < self.right() && y >= self.y && y < self.bottom()
    }

    pub fn translate(&self, dx: f64, dy: f64) -> Rect {
        Rect::new(self.x + dx, self.y + dy, self.width, self.height)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LayoutNode {
    pub path: CellPath,
    pub rect: Rect,
    pub leaf: bool,
    pub children: Vec<LayoutNode>,
}

impl LayoutNode {
    pub fn walk<'a>(&'a self, f: &mut impl FnMut(&'a LayoutNode)) {
        f(self);
        for c in &self.children {
            c.walk(f);
        }
    }
}

/// A leaf rectangle.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellBox {
    pub path: CellPath,
    pub graph_id: String,
    pub rect: Rect,
}

/// One wrapped line of text.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TextBox {
    pub rect: Rect,
    pub text: String,
    pub height_mm: f64,
    pub font: String,
    /// The leaf the text belongs to; `None` for generated bands.
    pub path: Option<CellPath>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Stroke {
    pub x1: f64,
    pub y1: f64,
    pub x2: f64,
    pub y2: f64,
    pub line: LineType,
}

/// Everything a renderer draws.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Sheet {
    pub width_mm: f64,
    pub height_mm: f64,
    pub strokes: Vec<Stroke>,
    pub texts: Vec<TextBox>,
}

impl Sheet {
    /// Merges identical segments, keeping the heavier line.
    pub fn dedup_strokes(&mut self) {
        let um = |v: f64| (v * 1000.0).round() as i64;
        let mut seen: BTreeMap<(i64, i64, i64, i64), Stroke> = BTreeMap::new();
        for s in self.strokes.drain(..) {
            let (a, b) = if (um(s.x1), um(s.y1)) <= (um(s.x2), um(s.y2)) {
                ((s.x1, s.y1), (s.x2, s.y2))
            } else {
                ((s.x2, s.y2), (s.x1, s.y1))
            };
            if s.line == LineType::None || (um(a.0) == um(b.0) && um(a.1) == um(b.1)) {
                continue;
            }
            let stroke = Stroke {
                x1: a.0,
                y1: a.1,
                x2: b.0,
                y2: b.1,
                line: s.line,
            };
            seen.entry((um(a.0), um(a.1), um(b.0), um(b.1)))
                .and_modify(|old| old.line = old.line.max(s.line))
                .or_insert(stroke);
        }
        self.strokes = seen.into_values().collect();
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LayoutTree {
    pub metrics: Metrics,
    /// One node per record, top to bottom.
    pub records: Vec<LayoutNode>,
    pub cells: Vec<CellBox>,
    pub sheet: Sheet,
}

impl LayoutTree {
    pub fn width(&self) -> f64 {
        self.sheet.width_mm
    }

    pub fn height(&self) -> f64 {
        self.sheet.height_mm
    }

    pub fn cell(&self, path: &CellPath) -> Option<&CellBox> {
        self.cells.iter().find(|c| &c.path == path)
    }

    pub fn record_height(&self, record: usize) -> Option<f64> {
        self.records.get(record).map(|n| n.rect.height)
    }
}

/// Height a node needs before any stretching.
pub fn natural_height(block: &BlockNode, inst: &InstanceNode, region: Region, row_h: f64) -> f64 {
    match (block, inst) {
        (BlockNode::Leaf(l), InstanceNode::Leaf(v)) => {
            if l.visible_in(region) {
                v.line_count() as f64 * row_h
            } else {
                0.0
            }
        }
        (BlockNode::Split(s), InstanceNode::Split(children)) => {
            let heights = children.iter().enumerate().map(|(i, c)| {
                let b = match s.count {
                    SplitCount::Arbitrary => &s.children[0],
                    SplitCount::Fixed(_) => &s.children[i],
                };
                natural_height(b, c, region, row_h)
            });
            match s.axis {
                Axis::Columns => heights.fold(0.0, f64::max),
                Axis::Rows => heights.sum(),
            }
        }
        _ => 0.0,
    }
}

fn child_block(block: &BlockNode, i: usize) -> &BlockNode {
    match block {
        BlockNode::Split(s) => match s.count {
            SplitCount::Arbitrary => &s.children[0],
            SplitCount::Fixed(_) => &s.children[i],
        },
        BlockNode::Leaf(_) => unreachable!("leaves have no children"),
    }
}

/// Heights of the children of a rows split filling `total`: natural heights
/// with the last child taking the rest.
fn row_heights(
    block: &BlockNode,
    children: &[InstanceNode],
    total: f64,
    region: Region,
    row_h: f64,
) -> Vec<f64> {
    let mut heights: Vec<f64> = children
        .iter()
        .enumerate()
        .map(|(i, c)| natural_height(child_block(block, i), c, region, row_h))
        .collect();
    if let Some(last) = heights.len().checked_sub(1) {
        let before: f64 = heights[..last].iter().sum();
        heights[last] = (total - before).max(0.0);
    }
    heights
}

fn column_widths(block: &BlockNode, count: usize) -> Vec<f64> {
    (0..count).map(|i| child_block(block, i).width()).collect()
}

struct Ctx<'a> {
    region: Region,
    row_h: f64,
    cells: &'a mut Vec<CellBox>,
    sheet: &'a mut Sheet,
}

#[derive(Clone)]
struct TextStyle {
    font: String,
    height: f64,
}

impl TextStyle {
    fn with(&self, o: &StyleOverride) -> TextStyle {
        TextStyle {
            font: o.font_tag.clone().unwrap_or_else(|| self.font.clone()),
            height: o.text_height_mm.unwrap_or(self.height),
        }
    }
}

fn place(
    block: &BlockNode,
    inst: &InstanceNode,
    rect: Rect,
    path: CellPath,
    visible: bool,
    style: &TextStyle,
    ctx: &mut Ctx,
) -> LayoutNode {
    match (block, inst) {
        (BlockNode::Leaf(l), InstanceNode::Leaf(v)) => {
            let style = style.with(&l.style);
            if visible && l.visible_in(ctx.region) {
                for (i, line) in v.wrapped_lines.iter().enumerate() {
                    ctx.sheet.texts.push(TextBox {
                        rect: Rect::new(
                            rect.x,
                            rect.y + i as f64 * ctx.row_h,
                            rect.width,
                            ctx.row_h,
                        ),
                        text: line.clone(),
                        height_mm: style.height,
                        font: style.font.clone(),
                        path: Some(path.clone()),
                    });
                }
            }
            ctx.cells.push(CellBox {
                path: path.clone(),
                graph_id: l.graph_id.clone(),
                rect,
            });
            LayoutNode {
                path,
                rect,
                leaf: true,
                children: Vec::new(),
            }
        }
        (BlockNode::Split(s), InstanceNode::Split(children)) => {
            let style = style.with(&s.style);
            let shown = s.visible_in(ctx.region);
            let visible = visible && shown;
            let line = s.style.line.unwrap_or(LineType::Thin);
            let rects: Vec<Rect> = match s.axis {
                Axis::Columns => {
                    let mut x = rect.x;
                    column_widths(block, children.len())
                        .into_iter()
                        .map(|w| {
                            let r = Rect::new(x, rect.y, w, rect.height);
                            x += w;
                            r
                        })
                        .collect()
                }
                Axis::Rows => {
                    let mut y = rect.y;
                    row_heights(block, children, rect.height, ctx.region, ctx.row_h)
                        .into_iter()
                        .map(|h| {
                            let r = Rect::new(rect.x, y, rect.width, h);
                            y += h;
                            r
                        })
                        .collect()
                }
            };
            if shown {
                for r in rects.iter().skip(1) {
                    let stroke = match s.axis {
                        Axis::Columns => Stroke {
                            x1: r.x,
                            y1: rect.y,
                            x2: r.x,
                            y2: rect.bottom(),
                            line,
                        },
                        Axis::Rows => Stroke {
                            x1: rect.x,
                            y1: r.y,
                            x2: rect.right(),
                            y2: r.y,
                            line,
                        },
                    };
                    ctx.sheet.strokes.push(stroke);
                }
            }
            let nodes = children
                .iter()
                .zip(rects)
                .enumerate()
                .map(|(i, (c, r))| {
                    place(
                        child_block(block, i),
                        c,
                        r,
                        path.child(i),
                        visible,
                        &style,
                        ctx,
                    )
                })
                .collect();
            LayoutNode {
                path,
                rect,
                leaf: false,
                children: nodes,
            }
        }
        _ => LayoutNode {
            path,
            rect,
            leaf: false,
            children: Vec::new(),
        },
    }
}

fn border(sheet: &mut Sheet, r: Rect, line: LineType) {
    let (x0, y0, x1, y1) = (r.x, r.y, r.right(), r.bottom());
    for (a, b, c, d) in [
        (x0, y0, x1, y0),
        (x0, y1, x1, y1),
        (x0, y0, x0, y1),
        (x1, y0, x1, y1),
    ] {
        sheet.strokes.push(Stroke {
            x1: a,
            y1: b,
            x2: c,
            y2: d,
            line,
        });
    }
}

/// Lays out the records in `records`, stacked from `y0`.
pub(crate) fn layout_records(
    table: &TableModule,
    metrics: &Metrics,
    records: impl IntoIterator<Item = usize>,
    y0: f64,
) -> (Vec<LayoutNode>, Vec<CellBox>, Sheet) {
    let template = &table.template;
    let width = template.width();
    let base = TextStyle {
        font: template.style_defaults.font_tag.clone(),
        height: template.style_defaults.text_height_mm,
    };
    let mut cells = Vec::new();
    let mut sheet = Sheet {
        width_mm: width,
        ..Sheet::default()
    };
    let mut nodes = Vec::new();
    let mut y = y0;
    for r in records {
        let inst = &table.records[r];
        let region = Region::of_record(r);
        let h = natural_height(&template.root, inst, region, metrics.row_height_mm);
        let rect = Rect::new(0.0, y, width, h);
        let mut ctx = Ctx {
            region,
            row_h: metrics.row_height_mm,
            cells: &mut cells,
            sheet: &mut sheet,
        };
        nodes.push(place(
            &template.root,
            inst,
            rect,
            CellPath::new(r, []),
            true,
            &base,
            &mut ctx,
        ));
        border(&mut sheet, rect, template.style_defaults.line);
        y += h;
    }
    sheet.height_mm = y - y0;
    (nodes, cells, sheet)
}

pub fn layout(table: &TableModule, metrics: &Metrics) -> LayoutTree {
    let (records, cells, mut sheet) = layout_records(table, metrics, 0..table.records.len(), 0.0);
    sheet.dedup_strokes();
    LayoutTree {
        metrics: *metrics,
        records,
        cells,
        sheet,
    }
}

/// What a point falls on: a leaf, or the padded area of an empty
/// arbitrary split.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "path", rename_all = "lowercase")]
pub enum Hit {
    Leaf(CellPath),
    Empty(CellPath),
}

/// Finds the node under a point by recomputing heights from the record
/// root down; no layout is built.
pub fn locate(table: &TableModule, metrics: &Metrics, x: f64, y: f64) -> Result<Hit> {
    let outside = || Error::OutsideTable { x, y };
    let template = &table.template;
    let width = template.width();
    if !(x >= 0.0 && x < width && y >= 0.0) {
        return Err(outside());
    }
    let row_h = metrics.row_height_mm;
    let mut top = 0.0;
    for (r, inst) in table.records.iter().enumerate() {
        let region = Region::of_record(r);
        let h = natural_height(&template.root, inst, region, row_h);
        let rect = Rect::new(0.0, top, width, h);
        if rect.contains(x, y) {
            return Ok(descend(
                &template.root,
                inst,
                rect,
                CellPath::new(r, []),
                region,
                row_h,
                x,
                y,
            ));
        }
        top += h;
    }
    Err(outside())
}

#[allow(clippy::too_many_arguments)]
fn descend(
    block: &BlockNode,
    inst: &InstanceNode,
    rect: Rect,
    path: CellPath,
    region: Region,
    row_h: f64,
    x: f64,
    y: f64,
) -> Hit {
    let (BlockNode::Split(s), InstanceNode::Split(children)) = (block, inst) else {
        return Hit::Leaf(path);
    };
    if children.is_empty() {
        return Hit::Empty(path);
    }
    let last = children.len() - 1;
    match s.axis {
        Axis::Columns => {
            let mut left = rect.x;
            for (i, w) in column_widths(block, children.len()).into_iter().enumerate() {
                if x < left + w || i == last {
                    let r = Rect::new(left, rect.y, w, rect.height);
                    return descend(
                        child_block(block, i),
                        &children[i],
                        r,
                        path.child(i),
                        region,
                        row_h,
                        x,
                        y,
                    );
                }
                left += w;
            }
        }
        Axis::Rows => {
            let mut top = rect.y;
            for (i, h) in row_heights(block, children, rect.height, region, row_h)
                .into_iter()
                .enumerate()
            {
                if y < top + h || i == last {
                    let r = Rect::new(rect.x, top, rect.width, h);
                    return descend(
                        child_block(block, i),
                        &children[i],
                        r,
                        path.child(i),
                        region,
                        row_h,
                        x,
                        y,
                    );
                }
                top += h;
            }
        }
    }
    unreachable!("non-empty split always yields a child")
}

/// The leaf under a point.
pub fn hit_test(table: &TableModule, metrics: &Metrics, x: f64, y: f64) -> Result<CellPath> {
    match locate(table, metrics, x, y)? {
        Hit::Leaf(path) => Ok(path),
        Hit::Empty(path) => Err(Error::EmptyBlock { path }),
    }
}

/// Inserts one act into the innermost arbitrary split under the point, after
/// the part that was hit. Returns the created parts (or the new record).
pub fn insert_at_point(
    table: &mut TableModule,
    metrics: &Metrics,
    x: f64,
    y: f64,
) -> Result<Vec<CellPath>> {
    let hit = locate(table, metrics, x, y)?;
    let path = match &hit {
        Hit::Leaf(p) | Hit::Empty(p) => p.clone(),
    };
    if path.record == 0 {
        return Err(Error::HeaderRecord);
    }
    if let Hit::Empty(split) = hit {
        return table.insert_part(&split, 0);
    }
    let root = &table.template.root;
    for depth in (0..path.steps.len()).rev() {
        let prefix = &path.steps[..depth];
        let Some(split) = root.descend(prefix).and_then(BlockNode::as_split) else {
            continue;
        };
        if split.is_arbitrary() {
            let unit = split.insert_unit.max(1) as usize;
            let part = path.steps[depth];
            let at = (part / unit + 1) * unit;
            return table.insert_part(&CellPath::new(path.record, prefix), at);
        }
    }
    let record = table.insert_record(path.record)?;
    Ok(vec![CellPath::new(record, [])])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::CellValue;
    use crate::structure::parse_structure;

    fn module(src: &str) -> TableModule {
        TableModule::new(parse_structure(src).unwrap().into_valid().unwrap()).unwrap()
    }

    #[test]
    fn single_leaf_is_one_row() {
        let mut t = module(r#"table "T" leaf "A" [width=10]"#);
        t.insert_record(0).unwrap();
        let l = layout(&t, &Metrics::default());
        assert_eq!(l.height(), 16.0);
        assert_eq!(l.records[1].rect, Rect::new(0.0, 8.0, 10.0, 8.0));
    }

    #[test]
    fn columns_pad_shorter_children() {
        let mut t =
            module(r#"table "T" cols { leaf "A" [width=10] rows arb { leaf "B" [width=10] } }"#);
        t.insert_record(0).unwrap();
        let split = CellPath::new(1, [1]);
        for _ in 0..3 {
            t.insert_part(&split, 0).unwrap();
        }
        let l = layout(&t, &Metrics::default());
        assert_eq!(l.records[1].rect.height, 24.0);
        assert_eq!(l.cell(&CellPath::new(1, [0])).unwrap().rect.height, 24.0);
        assert_eq!(
            hit_test(&t, &Metrics::default(), 15.0, 8.0 + 17.0).unwrap(),
            CellPath::new(1, [1, 2])
        );
        assert_eq!(
            hit_test(&t, &Metrics::default(), 5.0, 30.0).unwrap(),
            CellPath::new(1, [0])
        );
    }

    #[test]
    fn outside_and_header() {
        let mut t = module(r#"table "T" leaf "A" [width=10]"#);
        let m = Metrics::default();
        assert_eq!(
            hit_test(&t, &m, -1.0, 0.0).unwrap_err().code(),
            "outside-table"
        );
        assert_eq!(
            hit_test(&t, &m, 10.0, 0.0).unwrap_err().code(),
            "outside-table"
        );
        assert_eq!(
            insert_at_point(&mut t, &m, 1.0, 1.0).unwrap_err().code(),
            "header-record"
        );
    }

    #[test]
    fn insert_after_plain_record() {
        let mut t = module(r#"table "T" cols { leaf "A" [width=10] leaf "B" [width=10] }"#);
        t.insert_record(0).unwrap();
        t.insert_record(1).unwrap();
        t.set_cell(&CellPath::new(1, [0]), CellValue::text("x"))
            .unwrap();
        let created = insert_at_point(&mut t, &Metrics::default(), 1.0, 9.0).unwrap();
        assert_eq!(created, vec![CellPath::new(2, [])]);
        assert_eq!(t.records.len(), 4);
    }

    #[test]
    fn hidden_division_draws_nothing_in_data() {
        let mut t =
            module(r#"table "T" cols [data=false] { leaf "A" [width=10] leaf "B" [width=10] }"#);
        t.insert_record(0).unwrap();
        let l = layout(&t, &Metrics::default());
        let interior: Vec<_> = l.sheet.strokes.iter().filter(|s| s.x1 == 10.0).collect();
        assert_eq!(interior.len(), 1);
        assert_eq!((interior[0].y1, interior[0].y2), (0.0, 8.0));
    }
}
