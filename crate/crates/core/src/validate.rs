use std::collections::{BTreeMap, HashSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::model::{Axis, BlockNode, ConstraintRole, SplitCount, TableTemplate};
use crate::units::{Dimension, UnitRegistry};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Severity {
    Error,
    Warning,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Diagnostic {
    pub severity: Severity,
    /// Template path of the offending node.
    pub path: Vec<usize>,
    pub message: String,
}

impl Diagnostic {
    fn error(path: &[usize], message: impl Into<String>) -> Self {
        Diagnostic {
            severity: Severity::Error,
            path: path.to_vec(),
            message: message.into(),
        }
    }

    fn warning(path: &[usize], message: impl Into<String>) -> Self {
        Diagnostic {
            severity: Severity::Warning,
            path: path.to_vec(),
            message: message.into(),
        }
    }

    pub fn is_error(&self) -> bool {
        self.severity == Severity::Error
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sev = match self.severity {
            Severity::Error => "error",
            Severity::Warning => "warning",
        };
        f.write_str("/")?;
        let path: Vec<String> = self.path.iter().map(usize::to_string).collect();
        write!(f, "{}: {sev}: {}", path.join("/"), self.message)
    }
}

const EPS: f64 = 1e-9;

/// Checks every structural rule of a template. An empty result means the
/// template is fully valid.
pub fn validate_template(template: &TableTemplate) -> Vec<Diagnostic> {
    let mut out = Vec::new();
    let registry = UnitRegistry::standard();

    if !positive(template.style_defaults.text_height_mm) {
        out.push(Diagnostic::error(&[], "text height must be positive"));
    }

    let mut seen_ids = HashSet::new();
    // group label -> member template paths
    let mut groups: BTreeMap<&str, Vec<Vec<usize>>> = BTreeMap::new();
    check_node(
        &template.root,
        &mut Vec::new(),
        true,
        &mut seen_ids,
        &mut groups,
        registry,
        &mut out,
    );

    for (label, members) in &groups {
        check_group(template, label, members, &mut out);
    }
    out
}

fn check_node<'a>(
    node: &'a BlockNode,
    path: &mut Vec<usize>,
    header_visible: bool,
    seen_ids: &mut HashSet<&'a str>,
    groups: &mut BTreeMap<&'a str, Vec<Vec<usize>>>,
    registry: &UnitRegistry,
    out: &mut Vec<Diagnostic>,
) {
    match node {
        BlockNode::Leaf(l) => {
            if !(l.width_mm.is_finite() && l.width_mm > 0.0) {
                out.push(Diagnostic::error(
                    path,
                    format!("width must be positive, got {}", l.width_mm),
                ));
            }
            if !seen_ids.insert(l.graph_id.as_str()) {
                out.push(Diagnostic::error(
                    path,
                    format!("duplicate graph id {:?}", l.graph_id),
                ));
            }
            if !l.header_text.is_empty() && !(header_visible && l.visible_in_header) {
                out.push(Diagnostic::warning(
                    path,
                    format!(
                        "header text {:?} is hidden and will be ignored",
                        l.header_text
                    ),
                ));
            }
            if let Some(h) = l.style.text_height_mm {
                if !positive(h) {
                    out.push(Diagnostic::error(path, "text height must be positive"));
                }
            }
            if l.style.line.is_some() {
                out.push(Diagnostic::warning(
                    path,
                    "line type has no effect on a leaf",
                ));
            }
            let dimension = match &l.unit {
                Some(u) => match registry.lookup(u) {
                    Some(def) => Some(def.dimension),
                    None => {
                        out.push(Diagnostic::error(path, format!("unknown unit {u:?}")));
                        None
                    }
                },
                None => None,
            };
            if l.constraint_role == Some(ConstraintRole::Source)
                && !matches!(
                    dimension,
                    Some(Dimension::Pressure | Dimension::Temperature | Dimension::Length)
                )
            {
                out.push(Diagnostic::error(
                    path,
                    "constraint source needs a pressure, temperature or length unit",
                ));
            }
        }
        BlockNode::Split(s) => {
            match s.count {
                SplitCount::Fixed(n) => {
                    if n != s.children.len() {
                        out.push(Diagnostic::error(
                            path,
                            format!("declared {n} parts but has {}", s.children.len()),
                        ));
                    }
                    if s.children.len() < 2 {
                        out.push(Diagnostic::error(path, "split needs ≥2 children"));
                    }
                }
                SplitCount::Arbitrary => {
                    if s.axis == Axis::Columns {
                        out.push(Diagnostic::error(
                            path,
                            "arbitrary count is only allowed on rows splits",
                        ));
                    }
                    if s.children.len() != 1 {
                        out.push(Diagnostic::error(
                            path,
                            "arbitrary split needs exactly one prototype child",
                        ));
                    }
                }
            }
            if s.insert_unit < 1 {
                out.push(Diagnostic::error(path, "insert unit must be at least 1"));
            } else if s.insert_unit != 1 && !s.is_arbitrary() {
                out.push(Diagnostic::error(
                    path,
                    "insert unit applies to arbitrary rows splits only",
                ));
            }
            if let Some(label) = &s.insert_group {
                if s.is_arbitrary() && s.axis == Axis::Rows {
                    groups.entry(label.as_str()).or_default().push(path.clone());
                } else {
                    out.push(Diagnostic::error(
                        path,
                        format!("insert group {label:?} on a split that is not arbitrary rows"),
                    ));
                }
            }
            if let Some(h) = s.style.text_height_mm {
                if !positive(h) {
                    out.push(Diagnostic::error(path, "text height must be positive"));
                }
            }
            if s.axis == Axis::Rows {
                if let Some(first) = s.children.first() {
                    let w = first.width();
                    if s.children.iter().any(|c| (c.width() - w).abs() > EPS) {
                        out.push(Diagnostic::error(path, "unequal widths in rows split"));
                    }
                }
            }
            let header_visible = header_visible && s.visible_in_header;
            for (i, child) in s.children.iter().enumerate() {
                path.push(i);
                check_node(child, path, header_visible, seen_ids, groups, registry, out);
                path.pop();
            }
        }
    }
}

fn check_group(
    template: &TableTemplate,
    label: &str,
    members: &[Vec<usize>],
    out: &mut Vec<Diagnostic>,
) {
    if members.len() < 2 {
        return;
    }
    let anchor_len = members
        .iter()
        .map(|m| m.len())
        .min()
        .map(|min| {
            (0..min)
                .take_while(|&i| members.iter().all(|m| m[i] == members[0][i]))
                .count()
        })
        .unwrap_or(0);
    let anchor = &members[0][..anchor_len];
    let is_columns = template
        .root
        .descend(anchor)
        .and_then(BlockNode::as_split)
        .is_some_and(|s| s.axis == Axis::Columns);
    if !is_columns {
        out.push(Diagnostic::error(
            anchor,
            format!("insert group {label:?} members must share a columns split"),
        ));
        return;
    }
    // Between the anchor and each member only fixed splits may occur, so the
    // member instance is unique per anchor instance.
    for m in members {
        let mut node = template.root.descend(anchor);
        for &step in &m[anchor_len..m.len() - 1] {
            node = node
                .and_then(BlockNode::as_split)
                .and_then(|s| s.children.get(step));
            if let Some(BlockNode::Split(s)) = node {
                if s.is_arbitrary() {
                    out.push(Diagnostic::error(
                        m,
                        format!(
                            "insert group {label:?} member is nested in another arbitrary split"
                        ),
                    ));
                    break;
                }
            }
        }
    }
}

fn positive(x: f64) -> bool {
    x.partial_cmp(&0.0) == Some(std::cmp::Ordering::Greater)
}
