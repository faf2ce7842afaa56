//! Open documents with revision counters, the catalog store and the item
//! buffer, plus the edit operations shared by the HTTP API and the CLI.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::Range;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use tkd_core::layout::CellBox;
use tkd_core::{
    apply_rules, copy_to_buffer, extract_common_names, fill_cells, fill_target, insert_at_point,
    layout, load_module, merge_identical, pack_rows, parse_structure, paste_from_buffer,
    sort_records, CatalogStore, CellPath, CellValue, ItemBuffer, ItemRef, Metrics, Rect,
    TableModule,
};

#[derive(Debug)]
pub enum WorkspaceError {
    UnknownDocument(String),
    StaleRevision { given: u64, current: u64 },
    BadRequest(String),
    Domain(tkd_core::Error),
}

impl fmt::Display for WorkspaceError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            WorkspaceError::UnknownDocument(id) => write!(f, "no document {id:?}"),
            WorkspaceError::StaleRevision { given, current } => {
                write!(f, "revision {given} is stale, document is at {current}")
            }
            WorkspaceError::BadRequest(m) => f.write_str(m),
            WorkspaceError::Domain(e) => write!(f, "{e}"),
        }
    }
}

impl std::error::Error for WorkspaceError {}

impl From<tkd_core::Error> for WorkspaceError {
    fn from(e: tkd_core::Error) -> Self {
        WorkspaceError::Domain(e)
    }
}

pub type Result<T, E = WorkspaceError> = std::result::Result<T, E>;

/// Everything a client needs to draw and hit-test the table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Geometry {
    pub width_mm: f64,
    pub height_mm: f64,
    pub records: Vec<Rect>,
    pub cells: Vec<CellBox>,
}

impl Geometry {
    pub fn of(module: &TableModule, metrics: &Metrics) -> Geometry {
        let tree = layout(module, metrics);
        Geometry {
            width_mm: tree.width(),
            height_mm: tree.height(),
            records: tree.records.iter().map(|r| r.rect).collect(),
            cells: tree.cells,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RowRange {
    pub start: usize,
    pub end: usize,
}

impl From<RowRange> for Range<usize> {
    fn from(r: RowRange) -> Self {
        r.start..r.end
    }
}

/// One edit of a document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "snake_case")]
pub enum Op {
    SetCell { path: CellPath, value: CellValue },
    InsertAtPoint { x: f64, y: f64 },
    InsertRecord { after: usize },
    DeleteRecord { record: usize },
    InsertPart { split: CellPath, at: usize },
    DeletePart { split: CellPath, index: usize },
    Merge { rows: RowRange },
    Sort { graphs: Vec<String> },
    Extract { rows: RowRange, graph: String },
    Pack { rows: RowRange },
    CatalogPick { subject: CellPath, item: ItemRef },
    PasteBuffer { at: usize },
}

/// What an edit needs besides the document itself.
pub struct OpContext<'a> {
    pub metrics: &'a Metrics,
    pub catalogs: &'a CatalogStore,
    pub buffer: &'a ItemBuffer,
}

impl Op {
    /// Applies the edit; on error the module may be partly changed, so
    /// callers work on a copy.
    pub fn apply(&self, module: &mut TableModule, ctx: &OpContext) -> Result<Value> {
        Ok(match self {
            Op::SetCell { path, value } => {
                module.set_cell(path, value.clone())?;
                Value::Null
            }
            Op::InsertAtPoint { x, y } => {
                json!({ "created": insert_at_point(module, ctx.metrics, *x, *y)? })
            }
            Op::InsertRecord { after } => json!({ "record": module.insert_record(*after)? }),
            Op::DeleteRecord { record } => {
                module.delete_record(*record)?;
                Value::Null
            }
            Op::InsertPart { split, at } => json!({ "created": module.insert_part(split, *at)? }),
            Op::DeletePart { split, index } => {
                module.delete_part(split, *index)?;
                Value::Null
            }
            Op::Merge { rows } => json!({ "removed": merge_identical(module, (*rows).into())? }),
            Op::Sort { graphs } => {
                sort_records(module, graphs)?;
                Value::Null
            }
            Op::Extract { rows, graph } => {
                json!({ "inserted": extract_common_names(module, (*rows).into(), graph)? })
            }
            Op::Pack { rows } => {
                pack_rows(module, (*rows).into(), ctx.metrics)?;
                Value::Null
            }
            Op::CatalogPick { subject, item } => {
                let (entry, row) = ctx.catalogs.get(*item).ok_or_else(|| {
                    WorkspaceError::BadRequest(format!(
                        "no catalog item {}:{}",
                        item.catalog, item.item
                    ))
                })?;
                let props = apply_rules(&entry.rules, &entry.catalog, row)?;
                let target = fill_target(module, subject);
                json!({ "target": target, "ignored": fill_cells(module, &target, &props)? })
            }
            Op::PasteBuffer { at } => {
                json!({ "report": paste_from_buffer(ctx.buffer, module, *at)? })
            }
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Document {
    pub module: TableModule,
    pub revision: u64,
}

#[derive(Debug, Default)]
pub struct Workspace {
    docs: BTreeMap<String, Document>,
    next_id: u64,
    pub catalogs: CatalogStore,
    pub buffer: ItemBuffer,
    pub data_dir: Option<PathBuf>,
    pub metrics: Metrics,
}

impl Workspace {
    pub fn new() -> Self {
        Self::default()
    }

    /// A workspace over a data directory; catalogs come from its
    /// `catalogs/` subdirectory when there is one.
    pub fn open(data_dir: &Path) -> Result<Self> {
        let mut ws = Workspace {
            data_dir: Some(data_dir.to_path_buf()),
            ..Workspace::default()
        };
        let catalogs = data_dir.join("catalogs");
        if catalogs.is_dir() {
            ws.catalogs = CatalogStore::load_dir(&catalogs)?;
        }
        Ok(ws)
    }

    pub fn add(&mut self, module: TableModule) -> String {
        self.next_id += 1;
        let id = self.next_id.to_string();
        self.docs.insert(
            id.clone(),
            Document {
                module,
                revision: 1,
            },
        );
        id
    }

    /// Opens a document from `.tkm` text, `.tks` text, or a file in the data
    /// directory.
    pub fn load(&mut self, source: &DocumentSource) -> Result<String> {
        let module = match source {
            DocumentSource {
                tkm: Some(text),
                tks: None,
                file: None,
            } => load_module(text)?,
            DocumentSource {
                tkm: None,
                tks: Some(text),
                file: None,
            } => TableModule::new(parse_structure(text)?.into_valid()?)?,
            DocumentSource {
                tkm: None,
                tks: None,
                file: Some(name),
            } => {
                let path = self.data_file(name)?;
                let text = std::fs::read_to_string(&path)
                    .map_err(|_| tkd_core::Error::FileNotFound(path.clone()))?;
                if name.ends_with(".tks") {
                    TableModule::new(parse_structure(&text)?.into_valid()?)?
                } else {
                    load_module(&text)?
                }
            }
            _ => {
                return Err(WorkspaceError::BadRequest(
                    "give exactly one of tkm, tks, file".into(),
                ))
            }
        };
        Ok(self.add(module))
    }

    fn data_file(&self, name: &str) -> Result<PathBuf> {
        let dir = self
            .data_dir
            .as_ref()
            .ok_or_else(|| WorkspaceError::BadRequest("no data directory configured".into()))?;
        let rel = Path::new(name);
        if rel.is_absolute()
            || rel
                .components()
                .any(|c| matches!(c, std::path::Component::ParentDir))
        {
            return Err(WorkspaceError::BadRequest(format!(
                "file {name:?} is outside the data directory"
            )));
        }
        Ok(dir.join(rel))
    }

    pub fn get(&self, id: &str) -> Result<&Document> {
        self.docs
            .get(id)
            .ok_or_else(|| WorkspaceError::UnknownDocument(id.to_string()))
    }

    pub fn ids(&self) -> impl Iterator<Item = &str> {
        self.docs.keys().map(String::as_str)
    }

    /// Applies `op` if `revision` is current. The document only changes when
    /// the edit succeeds; the revision then goes up by one.
    pub fn apply(&mut self, id: &str, revision: u64, op: &Op) -> Result<(u64, Value)> {
        let doc = self
            .docs
            .get(id)
            .ok_or_else(|| WorkspaceError::UnknownDocument(id.to_string()))?;
        if doc.revision != revision {
            return Err(WorkspaceError::StaleRevision {
                given: revision,
                current: doc.revision,
            });
        }
        let mut work = doc.module.clone();
        let ctx = OpContext {
            metrics: &self.metrics,
            catalogs: &self.catalogs,
            buffer: &self.buffer,
        };
        let result = op.apply(&mut work, &ctx)?;
        let doc = self.docs.get_mut(id).expect("checked above");
        doc.module = work;
        doc.revision += 1;
        Ok((doc.revision, result))
    }

    pub fn copy_buffer(&mut self, id: &str, rows: RowRange) -> Result<&ItemBuffer> {
        let buffer = copy_to_buffer(&self.get(id)?.module, rows.into())?;
        self.buffer = buffer;
        Ok(&self.buffer)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct DocumentSource {
    #[serde(default)]
    pub tkm: Option<String>,
    #[serde(default)]
    pub tks: Option<String>,
    #[serde(default)]
    pub file: Option<String>,
}

#[cfg(test)]
mod tests {
    use super::*;

    const SPEC: &str =
        r#"table "S" cols { leaf "Поз" [width=15, prop=1] leaf "Кол" [width=10, prop=4] }"#;

    fn ws() -> (Workspace, String) {
        let mut ws = Workspace::new();
        let id = ws
            .load(&DocumentSource {
                tks: Some(SPEC.into()),
                ..Default::default()
            })
            .unwrap();
        (ws, id)
    }

    #[test]
    fn revisions_advance_only_on_success() {
        let (mut ws, id) = ws();
        let (rev, _) = ws.apply(&id, 1, &Op::InsertRecord { after: 0 }).unwrap();
        assert_eq!(rev, 2);
        let e = ws
            .apply(&id, 1, &Op::InsertRecord { after: 0 })
            .unwrap_err();
        assert!(matches!(
            e,
            WorkspaceError::StaleRevision {
                given: 1,
                current: 2
            }
        ));
        let bad = Op::SetCell {
            path: CellPath::new(1, [1]),
            value: CellValue::number(1.0, Some("кг")),
        };
        ws.apply(&id, 2, &bad).unwrap();
        let e = ws
            .apply(&id, 3, &Op::DeleteRecord { record: 0 })
            .unwrap_err();
        assert!(matches!(e, WorkspaceError::Domain(_)));
        assert_eq!(ws.get(&id).unwrap().revision, 3);
    }

    #[test]
    fn sources_are_exclusive() {
        let mut ws = Workspace::new();
        let both = DocumentSource {
            tkm: Some(String::new()),
            tks: Some(String::new()),
            file: None,
        };
        assert!(matches!(ws.load(&both), Err(WorkspaceError::BadRequest(_))));
        let file = DocumentSource {
            file: Some("x.tkm".into()),
            ..Default::default()
        };
        assert!(matches!(ws.load(&file), Err(WorkspaceError::BadRequest(_))));
    }

    #[test]
    fn ops_serialize_with_a_tag() {
        let op: Op = serde_json::from_str(r#"{"op":"merge","rows":{"start":0,"end":3}}"#).unwrap();
        assert_eq!(
            op,
            Op::Merge {
                rows: RowRange { start: 0, end: 3 }
            }
        );
        let back = serde_json::to_value(&op).unwrap();
        assert_eq!(back["op"], "merge");
    }
}
