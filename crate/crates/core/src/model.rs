//! The parametric table model.
//!
//! A [`TableTemplate`] describes the structure shared by every record as a tree
//! of splits. A [`TableModule`] holds the template plus the ordered records;
//! record 0 is always the header.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::units::UnitRegistry;
use crate::validate::{self, Diagnostic};

pub type PropertyId = u32;

/// Property numbers shared by the bundled templates and fixtures.
pub mod props {
    use super::PropertyId;

    pub const POSITION: PropertyId = 1;
    pub const DESIGNATION: PropertyId = 2;
    pub const NAME: PropertyId = 3;
    pub const QUANTITY: PropertyId = 4;
    pub const UNIT_MASS: PropertyId = 5;
    pub const NOTE: PropertyId = 6;
    pub const CHARACTERISTIC: PropertyId = 7;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    Columns,
    Rows,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SplitCount {
    Fixed(usize),
    Arbitrary,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LineType {
    None,
    Thin,
    Thick,
}

impl LineType {
    pub fn name(self) -> &'static str {
        match self {
            LineType::None => "none",
            LineType::Thin => "thin",
            LineType::Thick => "thick",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "none" => Some(LineType::None),
            "thin" => Some(LineType::Thin),
            "thick" => Some(LineType::Thick),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StyleSpec {
    pub line: LineType,
    pub font_tag: String,
    pub text_height_mm: f64,
}

impl Default for StyleSpec {
    fn default() -> Self {
        StyleSpec {
            line: LineType::Thick,
            font_tag: "gost-a".to_string(),
            text_height_mm: 3.5,
        }
    }
}

/// Per-node style settings; unset fields inherit from the enclosing node.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct StyleOverride {
    pub line: Option<LineType>,
    pub font_tag: Option<String>,
    pub text_height_mm: Option<f64>,
}

impl StyleOverride {
    pub fn is_empty(&self) -> bool {
        self.line.is_none() && self.font_tag.is_none() && self.text_height_mm.is_none()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ConstraintRole {
    /// Supplies a constraint value (pressure, temperature, DN).
    Source,
    /// Receives catalog picks filtered by the constraints.
    Subject,
}

impl ConstraintRole {
    pub fn name(self) -> &'static str {
        match self {
            ConstraintRole::Source => "source",
            ConstraintRole::Subject => "subject",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Split {
    pub axis: Axis,
    pub count: SplitCount,
    pub visible_in_header: bool,
    pub visible_in_data: bool,
    pub insert_unit: u32,
    pub insert_group: Option<String>,
    pub style: StyleOverride,
    pub children: Vec<BlockNode>,
}

impl Split {
    pub fn new(axis: Axis, count: SplitCount, children: Vec<BlockNode>) -> Self {
        Split {
            axis,
            count,
            visible_in_header: true,
            visible_in_data: true,
            insert_unit: 1,
            insert_group: None,
            style: StyleOverride::default(),
            children,
        }
    }

    pub fn is_arbitrary(&self) -> bool {
        self.count == SplitCount::Arbitrary
    }

    pub fn visible_in(&self, region: Region) -> bool {
        match region {
            Region::Header => self.visible_in_header,
            Region::Data => self.visible_in_data,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Leaf {
    pub graph_id: String,
    pub header_text: String,
    pub width_mm: f64,
    pub visible_in_header: bool,
    pub visible_in_data: bool,
    pub property_id: Option<PropertyId>,
    pub object_class: Option<String>,
    pub unit: Option<String>,
    pub constraint_role: Option<ConstraintRole>,
    pub style: StyleOverride,
}

impl Leaf {
    pub fn new(header_text: &str, width_mm: f64) -> Self {
        Leaf {
            graph_id: header_text.to_string(),
            header_text: header_text.to_string(),
            width_mm,
            visible_in_header: true,
            visible_in_data: true,
            property_id: None,
            object_class: None,
            unit: None,
            constraint_role: None,
            style: StyleOverride::default(),
        }
    }

    pub fn visible_in(&self, region: Region) -> bool {
        match region {
            Region::Header => self.visible_in_header,
            Region::Data => self.visible_in_data,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum BlockNode {
    Split(Split),
    Leaf(Leaf),
}

impl BlockNode {
    pub fn width(&self) -> f64 {
        match self {
            BlockNode::Leaf(l) => l.width_mm,
            BlockNode::Split(s) => match s.axis {
                Axis::Columns => s.children.iter().map(BlockNode::width).sum(),
                Axis::Rows => s.children.first().map_or(0.0, BlockNode::width),
            },
        }
    }

    pub fn as_split(&self) -> Option<&Split> {
        match self {
            BlockNode::Split(s) => Some(s),
            BlockNode::Leaf(_) => None,
        }
    }

    pub fn as_leaf(&self) -> Option<&Leaf> {
        match self {
            BlockNode::Leaf(l) => Some(l),
            BlockNode::Split(_) => None,
        }
    }

    /// Template child followed by an instance step.
    pub fn child_for_step(&self, step: usize) -> Option<&BlockNode> {
        let split = self.as_split()?;
        match split.count {
            SplitCount::Arbitrary => split.children.first(),
            SplitCount::Fixed(_) => split.children.get(step),
        }
    }

    /// Template node reached by following instance steps from this node.
    pub fn descend(&self, steps: &[usize]) -> Option<&BlockNode> {
        steps
            .iter()
            .try_fold(self, |node, &step| node.child_for_step(step))
    }

    /// Depth-first visit of every node with its template path.
    pub fn walk<'a>(&'a self, f: &mut impl FnMut(&[usize], &'a BlockNode)) {
        fn go<'a>(
            node: &'a BlockNode,
            path: &mut Vec<usize>,
            f: &mut impl FnMut(&[usize], &'a BlockNode),
        ) {
            f(path, node);
            if let BlockNode::Split(s) = node {
                for (i, child) in s.children.iter().enumerate() {
                    path.push(i);
                    go(child, path, f);
                    path.pop();
                }
            }
        }
        go(self, &mut Vec::new(), f)
    }

    pub fn leaves(&self) -> Vec<&Leaf> {
        let mut out = Vec::new();
        self.walk(&mut |_, node| {
            if let BlockNode::Leaf(l) = node {
                out.push(l);
            }
        });
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Region {
    Header,
    Data,
}

impl Region {
    pub fn of_record(record: usize) -> Self {
        if record == 0 {
            Region::Header
        } else {
            Region::Data
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableTemplate {
    pub name: String,
    pub units_note: String,
    pub root: BlockNode,
    pub style_defaults: StyleSpec,
}

impl TableTemplate {
    pub fn new(name: &str, root: BlockNode) -> Self {
        TableTemplate {
            name: name.to_string(),
            units_note: String::new(),
            root,
            style_defaults: StyleSpec::default(),
        }
    }

    pub fn width(&self) -> f64 {
        self.root.width()
    }

    pub fn leaf_by_graph(&self, graph_id: &str) -> Option<(Vec<usize>, &Leaf)> {
        let mut found = None;
        self.root.walk(&mut |path, node| {
            if let BlockNode::Leaf(l) = node {
                if found.is_none() && l.graph_id == graph_id {
                    found = Some((path.to_vec(), l));
                }
            }
        });
        found
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellValue {
    pub text: String,
    pub numeric: Option<f64>,
    pub unit: Option<String>,
    pub wrapped_lines: Vec<String>,
}

impl Default for CellValue {
    fn default() -> Self {
        CellValue::blank()
    }
}

/// Shortest text that parses back to the same number.
pub fn format_number(value: f64) -> String {
    if value == 0.0 {
        return "0".to_string();
    }
    format!("{value}")
}

/// Line split used before a cell has been packed.
pub fn natural_lines(text: &str) -> Vec<String> {
    if text.is_empty() {
        Vec::new()
    } else {
        text.split('\n').map(str::to_string).collect()
    }
}

impl CellValue {
    pub fn blank() -> Self {
        CellValue {
            text: String::new(),
            numeric: None,
            unit: None,
            wrapped_lines: Vec::new(),
        }
    }

    pub fn text(text: impl Into<String>) -> Self {
        let text = text.into();
        let wrapped_lines = natural_lines(&text);
        CellValue {
            text,
            numeric: None,
            unit: None,
            wrapped_lines,
        }
    }

    pub fn number(value: f64, unit: Option<&str>) -> Self {
        let text = format_number(value);
        CellValue {
            wrapped_lines: natural_lines(&text),
            text,
            numeric: Some(value),
            unit: unit.map(str::to_string),
        }
    }

    pub fn is_blank(&self) -> bool {
        self.text.is_empty() && self.numeric.is_none()
    }

    pub fn line_count(&self) -> usize {
        self.wrapped_lines.len().max(1)
    }

    /// Checks the text/numeric/unit invariants.
    pub fn check(&self) -> Result<()> {
        if let Some(v) = self.numeric {
            if !v.is_finite() {
                return Err(Error::InvalidValue {
                    reason: "numeric value must be finite".into(),
                });
            }
            if self.text != format_number(v) {
                return Err(Error::InvalidValue {
                    reason: format!("text {:?} is not the rendering of {v}", self.text),
                });
            }
        }
        if self.unit.is_some() && self.numeric.is_none() && !self.text.is_empty() {
            return Err(Error::InvalidValue {
                reason: "a unit requires a numeric value".into(),
            });
        }
        Ok(())
    }

    /// Same content, ignoring how the text is wrapped.
    pub fn same_content(&self, other: &CellValue) -> bool {
        self.text == other.text && self.numeric == other.numeric && self.unit == other.unit
    }
}

impl fmt::Display for CellValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.unit {
            Some(u) if self.numeric.is_some() => write!(f, "{} {}", self.text, u),
            _ => f.write_str(&self.text),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum InstanceNode {
    Split(Vec<InstanceNode>),
    Leaf(CellValue),
}

impl InstanceNode {
    pub fn children(&self) -> Option<&Vec<InstanceNode>> {
        match self {
            InstanceNode::Split(c) => Some(c),
            InstanceNode::Leaf(_) => None,
        }
    }

    pub fn children_mut(&mut self) -> Option<&mut Vec<InstanceNode>> {
        match self {
            InstanceNode::Split(c) => Some(c),
            InstanceNode::Leaf(_) => None,
        }
    }

    pub fn value(&self) -> Option<&CellValue> {
        match self {
            InstanceNode::Leaf(v) => Some(v),
            InstanceNode::Split(_) => None,
        }
    }

    pub fn get(&self, steps: &[usize]) -> Option<&InstanceNode> {
        steps
            .iter()
            .try_fold(self, |node, &i| node.children()?.get(i))
    }

    pub fn get_mut(&mut self, steps: &[usize]) -> Option<&mut InstanceNode> {
        let mut node = self;
        for &i in steps {
            node = node.children_mut()?.get_mut(i)?;
        }
        Some(node)
    }

    /// Blank instance of a template node. Arbitrary splits get one part in the
    /// header and none in data records.
    pub fn blank(block: &BlockNode, region: Region) -> InstanceNode {
        match block {
            BlockNode::Leaf(l) => match region {
                Region::Header => InstanceNode::Leaf(CellValue::text(l.header_text.clone())),
                Region::Data => InstanceNode::Leaf(CellValue::blank()),
            },
            BlockNode::Split(s) => match (s.count, region) {
                (SplitCount::Arbitrary, Region::Data) => InstanceNode::Split(Vec::new()),
                _ => InstanceNode::Split(
                    s.children
                        .iter()
                        .map(|c| InstanceNode::blank(c, region))
                        .collect(),
                ),
            },
        }
    }

    /// Every leaf value with its path relative to this node, depth first.
    pub fn leaf_values(&self) -> Vec<(Vec<usize>, &CellValue)> {
        fn go<'a>(
            node: &'a InstanceNode,
            path: &mut Vec<usize>,
            out: &mut Vec<(Vec<usize>, &'a CellValue)>,
        ) {
            match node {
                InstanceNode::Leaf(v) => out.push((path.clone(), v)),
                InstanceNode::Split(children) => {
                    for (i, c) in children.iter().enumerate() {
                        path.push(i);
                        go(c, path, out);
                        path.pop();
                    }
                }
            }
        }
        let mut out = Vec::new();
        go(self, &mut Vec::new(), &mut out);
        out
    }

    /// Checks that this instance has the shape of `block`.
    pub fn conforms(&self, block: &BlockNode) -> bool {
        match (self, block) {
            (InstanceNode::Leaf(_), BlockNode::Leaf(_)) => true,
            (InstanceNode::Split(children), BlockNode::Split(s)) => match s.count {
                SplitCount::Fixed(_) => {
                    children.len() == s.children.len()
                        && children.iter().zip(&s.children).all(|(c, b)| c.conforms(b))
                }
                SplitCount::Arbitrary => match s.children.first() {
                    Some(proto) => children.iter().all(|c| c.conforms(proto)),
                    None => children.is_empty(),
                },
            },
            _ => false,
        }
    }
}

/// Address of a node: a record index plus child indices from the record root.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct CellPath {
    pub record: usize,
    pub steps: Vec<usize>,
}

impl CellPath {
    pub fn new(record: usize, steps: impl Into<Vec<usize>>) -> Self {
        CellPath {
            record,
            steps: steps.into(),
        }
    }

    pub fn child(&self, index: usize) -> CellPath {
        let mut steps = self.steps.clone();
        steps.push(index);
        CellPath {
            record: self.record,
            steps,
        }
    }

    pub fn join(&self, rest: &[usize]) -> CellPath {
        let mut steps = self.steps.clone();
        steps.extend_from_slice(rest);
        CellPath {
            record: self.record,
            steps,
        }
    }

    pub fn starts_with(&self, prefix: &CellPath) -> bool {
        self.record == prefix.record && self.steps.starts_with(&prefix.steps)
    }
}

impl fmt::Display for CellPath {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.record)?;
        for s in &self.steps {
            write!(f, "/{s}")?;
        }
        Ok(())
    }
}

/// Parses the `record/step/step` form written by `Display`.
impl std::str::FromStr for CellPath {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidValue {
            reason: format!("malformed cell path {s:?}"),
        };
        let mut parts = s
            .trim()
            .split('/')
            .map(|p| p.parse::<usize>().map_err(|_| bad()));
        let record = parts.next().ok_or_else(bad)??;
        let steps = parts.collect::<Result<Vec<_>>>()?;
        Ok(CellPath { record, steps })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Left,
    Right,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContinuationSpec {
    pub chunk_height_mm: Option<f64>,
    pub direction: Direction,
    pub repeat_header: bool,
    pub number_row: bool,
    pub first_graph_number: u32,
}

impl Default for ContinuationSpec {
    fn default() -> Self {
        ContinuationSpec {
            chunk_height_mm: None,
            direction: Direction::Right,
            repeat_header: false,
            number_row: false,
            first_graph_number: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphDescriptor {
    pub graph_id: String,
    pub header_text: String,
    pub width_mm: f64,
    /// Left edge of the graph relative to the table origin.
    pub x_mm: f64,
    pub property_id: Option<PropertyId>,
    pub unit: Option<String>,
    pub object_class: Option<String>,
    pub constraint_role: Option<ConstraintRole>,
    /// Template path of the leaf.
    pub path: Vec<usize>,
}

/// Data-visible leaves in left-to-right (depth-first) order.
pub fn enumerate_graphs(template: &TableTemplate) -> Vec<GraphDescriptor> {
    fn go(
        node: &BlockNode,
        x: f64,
        visible: bool,
        path: &mut Vec<usize>,
        out: &mut Vec<GraphDescriptor>,
    ) {
        match node {
            BlockNode::Leaf(l) => {
                if visible && l.visible_in_data {
                    out.push(GraphDescriptor {
                        graph_id: l.graph_id.clone(),
                        header_text: l.header_text.clone(),
                        width_mm: l.width_mm,
                        x_mm: x,
                        property_id: l.property_id,
                        unit: l.unit.clone(),
                        object_class: l.object_class.clone(),
                        constraint_role: l.constraint_role,
                        path: path.clone(),
                    });
                }
            }
            BlockNode::Split(s) => {
                let visible = visible && s.visible_in_data;
                let mut x = x;
                for (i, c) in s.children.iter().enumerate() {
                    path.push(i);
                    go(c, x, visible, path, out);
                    path.pop();
                    if s.axis == Axis::Columns {
                        x += c.width();
                    }
                }
            }
        }
    }
    let mut out = Vec::new();
    go(&template.root, 0.0, true, &mut Vec::new(), &mut out);
    out
}

/// Instance steps converted to template steps (arbitrary parts map to the
/// prototype). `None` when the steps do not fit the template.
pub fn template_steps(root: &BlockNode, steps: &[usize]) -> Option<Vec<usize>> {
    let mut node = root;
    let mut out = Vec::with_capacity(steps.len());
    for &step in steps {
        let split = node.as_split()?;
        let t = match split.count {
            SplitCount::Arbitrary => 0,
            SplitCount::Fixed(_) => step,
        };
        node = split.children.get(t)?;
        out.push(t);
    }
    Some(out)
}

/// Members of one insert group, located relative to their common ancestor.
#[derive(Debug, Clone, PartialEq)]
pub struct InsertGroup {
    pub label: String,
    /// Template path of the common columns split.
    pub anchor: Vec<usize>,
    /// Member paths relative to the anchor, with their insert units.
    pub members: Vec<(Vec<usize>, u32)>,
}

/// Resolves the insert group of the split at `template_path`, if any.
pub fn insert_group_of(template: &TableTemplate, template_path: &[usize]) -> Option<InsertGroup> {
    let label = template
        .root
        .descend(template_path)?
        .as_split()?
        .insert_group
        .clone()?;
    let mut paths: Vec<(Vec<usize>, u32)> = Vec::new();
    template.root.walk(&mut |path, node| {
        if let BlockNode::Split(s) = node {
            if s.insert_group.as_deref() == Some(label.as_str()) {
                paths.push((path.to_vec(), s.insert_unit));
            }
        }
    });
    let anchor_len = paths
        .iter()
        .map(|(p, _)| p.as_slice())
        .reduce(common_prefix)
        .map_or(0, <[usize]>::len);
    // A lone member anchors at its parent.
    let anchor_len = if paths.len() == 1 {
        anchor_len.saturating_sub(1)
    } else {
        anchor_len
    };
    let anchor = template_path[..anchor_len].to_vec();
    let members = paths
        .into_iter()
        .map(|(p, u)| (p[anchor_len..].to_vec(), u))
        .collect();
    Some(InsertGroup {
        label,
        anchor,
        members,
    })
}

fn common_prefix<'a>(a: &'a [usize], b: &'a [usize]) -> &'a [usize] {
    let n = a.iter().zip(b).take_while(|(x, y)| x == y).count();
    &a[..n]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableModule {
    pub template: TableTemplate,
    pub records: Vec<InstanceNode>,
    pub continuation: ContinuationSpec,
}

impl TableModule {
    /// A table holding only the header record.
    pub fn new(template: TableTemplate) -> Result<Self> {
        let diagnostics = validate::validate_template(&template);
        if diagnostics.iter().any(Diagnostic::is_error) {
            return Err(Error::InvalidTemplate { diagnostics });
        }
        let header = InstanceNode::blank(&template.root, Region::Header);
        Ok(TableModule {
            template,
            records: vec![header],
            continuation: ContinuationSpec::default(),
        })
    }

    pub fn data_record_count(&self) -> usize {
        self.records.len() - 1
    }

    pub fn node(&self, path: &CellPath) -> Result<(&BlockNode, &InstanceNode)> {
        let out_of_range = || Error::PathOutOfRange { path: path.clone() };
        let record = self.records.get(path.record).ok_or_else(out_of_range)?;
        let inst = record.get(&path.steps).ok_or_else(out_of_range)?;
        let block = self
            .template
            .root
            .descend(&path.steps)
            .ok_or_else(out_of_range)?;
        Ok((block, inst))
    }

    pub fn leaf_at(&self, path: &CellPath) -> Result<(&Leaf, &CellValue)> {
        match self.node(path)? {
            (BlockNode::Leaf(l), InstanceNode::Leaf(v)) => Ok((l, v)),
            _ => Err(Error::PathNotLeaf { path: path.clone() }),
        }
    }

    pub fn resolve_cell(&self, path: &CellPath) -> Result<&CellValue> {
        self.leaf_at(path).map(|(_, v)| v)
    }

    /// Writes one data cell. Numeric values are converted to the leaf unit.
    pub fn set_cell(&mut self, path: &CellPath, value: CellValue) -> Result<()> {
        if path.record == 0 {
            return Err(Error::HeaderReadonly);
        }
        let (leaf, _) = self.leaf_at(path)?;
        let value = coerce_to_leaf(leaf, value)?;
        self.write_leaf(path, value);
        Ok(())
    }

    pub(crate) fn write_leaf(&mut self, path: &CellPath, value: CellValue) {
        if let Some(InstanceNode::Leaf(v)) = self.records[path.record].get_mut(&path.steps) {
            *v = value;
        }
    }

    fn arbitrary_split(&self, path: &CellPath) -> Result<(&Split, usize)> {
        if path.record == 0 {
            return Err(Error::HeaderRecord);
        }
        match self.node(path)? {
            (BlockNode::Split(s), InstanceNode::Split(parts)) if s.is_arbitrary() => {
                Ok((s, parts.len()))
            }
            _ => Err(Error::NotArbitrarySplit { path: path.clone() }),
        }
    }

    /// Splits taking part in one insertion act on `split_path`, with units.
    fn act_members(&self, split_path: &CellPath) -> Result<Vec<(CellPath, u32)>> {
        let (split, _) = self.arbitrary_split(split_path)?;
        let tpath = template_steps(&self.template.root, &split_path.steps).ok_or_else(|| {
            Error::PathOutOfRange {
                path: split_path.clone(),
            }
        })?;
        match insert_group_of(&self.template, &tpath) {
            Some(group) if split.insert_group.is_some() => {
                let prefix =
                    CellPath::new(split_path.record, &split_path.steps[..group.anchor.len()]);
                let mut out = Vec::new();
                for (rel, unit) in group.members {
                    let path = prefix.join(&rel);
                    self.arbitrary_split(&path)?;
                    out.push((path, unit));
                }
                Ok(out)
            }
            _ => Ok(vec![(split_path.clone(), split.insert_unit)]),
        }
    }

    /// Inserts one act of blank parts into an arbitrary split (and into every
    /// split sharing its insert group). Returns the created part paths.
    pub fn insert_part(&mut self, split_path: &CellPath, at_index: usize) -> Result<Vec<CellPath>> {
        let (split, _) = self.arbitrary_split(split_path)?;
        let act = at_index / split.insert_unit.max(1) as usize;
        let members = self.act_members(split_path)?;
        let mut created = Vec::new();
        for (path, unit) in members {
            let proto = self
                .template
                .root
                .descend(&path.steps)
                .and_then(BlockNode::as_split)
                .and_then(|s| s.children.first())
                .cloned()
                .ok_or_else(|| Error::NotArbitrarySplit { path: path.clone() })?;
            let parts = self.records[path.record]
                .get_mut(&path.steps)
                .and_then(InstanceNode::children_mut)
                .ok_or_else(|| Error::PathOutOfRange { path: path.clone() })?;
            let pos = (act * unit as usize).min(parts.len());
            for k in 0..unit as usize {
                parts.insert(pos + k, InstanceNode::blank(&proto, Region::Data));
                created.push(path.child(pos + k));
            }
        }
        Ok(created)
    }

    /// Removes the insertion act containing part `index`, in every grouped split.
    pub fn delete_part(&mut self, split_path: &CellPath, index: usize) -> Result<()> {
        let (split, len) = self.arbitrary_split(split_path)?;
        if index >= len {
            return Err(Error::PathOutOfRange {
                path: split_path.child(index),
            });
        }
        let act = index / split.insert_unit.max(1) as usize;
        let members = self.act_members(split_path)?;
        for (path, unit) in members {
            if let Some(parts) = self.records[path.record]
                .get_mut(&path.steps)
                .and_then(InstanceNode::children_mut)
            {
                let start = (act * unit as usize).min(parts.len());
                let end = (start + unit as usize).min(parts.len());
                parts.drain(start..end);
            }
        }
        Ok(())
    }

    /// Inserts a blank data record after record `after` and returns its index.
    pub fn insert_record(&mut self, after: usize) -> Result<usize> {
        if after >= self.records.len() {
            return Err(Error::PathOutOfRange {
                path: CellPath::new(after, []),
            });
        }
        let blank = InstanceNode::blank(&self.template.root, Region::Data);
        self.records.insert(after + 1, blank);
        Ok(after + 1)
    }

    pub fn delete_record(&mut self, index: usize) -> Result<()> {
        if index == 0 {
            return Err(Error::HeaderRecord);
        }
        if index >= self.records.len() {
            return Err(Error::PathOutOfRange {
                path: CellPath::new(index, []),
            });
        }
        self.records.remove(index);
        Ok(())
    }

    /// True when every record has the template's shape.
    pub fn conforms(&self) -> bool {
        !self.records.is_empty() && self.records.iter().all(|r| r.conforms(&self.template.root))
    }
}

/// Applies the leaf's unit rules to a value about to be stored.
pub(crate) fn coerce_to_leaf(leaf: &Leaf, value: CellValue) -> Result<CellValue> {
    value.check()?;
    let registry = UnitRegistry::standard();
    let Some(number) = value.numeric else {
        return Ok(value);
    };
    let value_unit = match &value.unit {
        Some(u) => Some(
            registry
                .canonical(u)
                .ok_or_else(|| Error::UnknownUnit {
                    unit: u.clone(),
                    pos: None,
                })?
                .to_string(),
        ),
        None => None,
    };
    match (&leaf.unit, value_unit) {
        (Some(target), Some(from)) => {
            if from == *target {
                return Ok(CellValue {
                    unit: Some(from),
                    ..value
                });
            }
            let converted = registry.convert(number, &from, target).map_err(|_| {
                Error::UnitDimensionMismatch {
                    from: from.clone(),
                    to: target.clone(),
                }
            })?;
            Ok(CellValue::number(converted, Some(target)))
        }
        (Some(target), None) => Ok(CellValue {
            unit: Some(target.clone()),
            ..value
        }),
        (None, unit) => Ok(CellValue { unit, ..value }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn leaf(name: &str, w: f64) -> BlockNode {
        BlockNode::Leaf(Leaf::new(name, w))
    }

    fn cols(children: Vec<BlockNode>) -> BlockNode {
        let n = children.len();
        BlockNode::Split(Split::new(Axis::Columns, SplitCount::Fixed(n), children))
    }

    fn arb(child: BlockNode, unit: u32, group: Option<&str>) -> BlockNode {
        let mut s = Split::new(Axis::Rows, SplitCount::Arbitrary, vec![child]);
        s.insert_unit = unit;
        s.insert_group = group.map(str::to_string);
        BlockNode::Split(s)
    }

    fn grouped() -> TableModule {
        let root = cols(vec![
            arb(leaf("a", 10.0), 1, Some("g")),
            arb(leaf("b", 10.0), 3, Some("g")),
            leaf("c", 10.0),
        ]);
        let mut t = TableModule::new(TableTemplate::new("g", root)).unwrap();
        t.insert_record(0).unwrap();
        t
    }

    #[test]
    fn header_record_carries_header_texts() {
        let t = grouped();
        assert_eq!(t.resolve_cell(&CellPath::new(0, [0, 0])).unwrap().text, "a");
        assert_eq!(t.resolve_cell(&CellPath::new(0, [2])).unwrap().text, "c");
    }

    #[test]
    fn paths_parse_their_display() {
        let p = CellPath::new(3, [0, 12, 1]);
        assert_eq!(p.to_string().parse::<CellPath>().unwrap(), p);
        assert_eq!("7".parse::<CellPath>().unwrap(), CellPath::new(7, []));
        assert!("1/x".parse::<CellPath>().is_err());
        assert!("".parse::<CellPath>().is_err());
    }

    #[test]
    fn path_errors() {
        let t = grouped();
        let err = t.resolve_cell(&CellPath::new(5, [2])).unwrap_err();
        assert_eq!(err.code(), "path-out-of-range");
        let err = t.resolve_cell(&CellPath::new(0, [0])).unwrap_err();
        assert_eq!(err.code(), "path-not-leaf");
    }

    #[test]
    fn grouped_insert_adds_all_units() {
        let mut t = grouped();
        let created = t.insert_part(&CellPath::new(1, [1]), 0).unwrap();
        assert_eq!(created.len(), 4);
        let parts = |t: &TableModule, i| t.records[1].get(&[i]).unwrap().children().unwrap().len();
        assert_eq!((parts(&t, 0), parts(&t, 1)), (1, 3));
        t.delete_part(&CellPath::new(1, [0]), 0).unwrap();
        assert_eq!((parts(&t, 0), parts(&t, 1)), (0, 0));
        assert!(t.conforms());
    }

    #[test]
    fn insert_rejects_fixed_and_header() {
        let mut t = grouped();
        assert_eq!(
            t.insert_part(&CellPath::new(1, []), 0).unwrap_err().code(),
            "not-arbitrary-split"
        );
        assert_eq!(
            t.insert_part(&CellPath::new(0, [0]), 0).unwrap_err().code(),
            "header-record"
        );
        assert_eq!(
            t.delete_part(&CellPath::new(1, [2]), 0).unwrap_err().code(),
            "not-arbitrary-split"
        );
    }

    #[test]
    fn set_cell_converts_and_checks_units() {
        let mut l = Leaf::new("P", 20.0);
        l.unit = Some("МПа".into());
        let root = cols(vec![BlockNode::Leaf(l), leaf("x", 10.0)]);
        let mut t = TableModule::new(TableTemplate::new("p", root)).unwrap();
        t.insert_record(0).unwrap();
        let p = CellPath::new(1, [0]);
        let err = t
            .set_cell(&p, CellValue::number(3.0, Some("кг")))
            .unwrap_err();
        assert_eq!(err.code(), "unit-dimension-mismatch");
        t.set_cell(&p, CellValue::number(10.0, Some("бар")))
            .unwrap();
        assert_eq!(t.resolve_cell(&p).unwrap().numeric, Some(1.0));
        assert_eq!(t.resolve_cell(&p).unwrap().unit.as_deref(), Some("МПа"));
        let err = t
            .set_cell(&CellPath::new(0, [0]), CellValue::text("x"))
            .unwrap_err();
        assert_eq!(err.code(), "header-readonly");
    }

    #[test]
    fn inconsistent_values_are_rejected() {
        let bad = CellValue {
            text: "ten".into(),
            numeric: Some(10.0),
            unit: None,
            wrapped_lines: vec![],
        };
        assert_eq!(bad.check().unwrap_err().code(), "invalid-value");
    }

    #[test]
    fn number_rendering_round_trips() {
        for v in [9.0, 1.6, 0.0980665, -273.15, 1e-7, 1e21] {
            assert_eq!(format_number(v).parse::<f64>().unwrap(), v);
        }
        assert_eq!(format_number(9.0), "9");
        assert_eq!(format_number(-0.0), "0");
    }
}
