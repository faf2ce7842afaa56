//! The `tkd` subcommands as plain functions over files and text.

use std::fmt::Write;
use std::path::{Path, PathBuf};

use tkd_core::units::parse_quantity;
use tkd_core::{
    autofill, collect, copy_to_buffer, load_buffer, load_module, merge_identical, page_sheet,
    paginate, parse_structure, paste_from_buffer, query, render_svg, render_text, save_buffer,
    save_module, sheet_to_svg, sheet_to_text, sort_records, validate_template, CatalogStore,
    CellPath, CollectionScope, ConstraintSet, ContinuationSpec, Direction, ElementType, ItemBuffer,
    ItemRef, Metrics, Severity, TableModule, TableTemplate,
};

use crate::workspace::{Op, OpContext, RowRange, WorkspaceError};

#[derive(Debug, Clone, PartialEq)]
pub enum Failure {
    /// Bad arguments (exit code 2).
    Usage(String),
    /// The input was read but the operation failed (exit code 1).
    Domain(String),
}

impl Failure {
    pub fn exit_code(&self) -> i32 {
        match self {
            Failure::Usage(_) => 2,
            Failure::Domain(_) => 1,
        }
    }

    pub fn message(&self) -> &str {
        match self {
            Failure::Usage(m) | Failure::Domain(m) => m,
        }
    }
}

pub type Outcome<T = Output> = Result<T, Failure>;

/// Text for stdout (or the `-o` file) and remarks for stderr.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Output {
    pub body: String,
    pub notes: Vec<String>,
}

impl Output {
    fn text(body: String) -> Self {
        Output {
            body,
            notes: Vec::new(),
        }
    }
}

/// A domain error with the file it came from.
fn in_file(file: &Path, e: tkd_core::Error) -> Failure {
    match e.position() {
        Some(_) => Failure::Domain(format!("{}:{e}", file.display())),
        None => Failure::Domain(format!("{}: {e}", file.display())),
    }
}

fn read(path: &Path) -> Outcome<String> {
    std::fs::read_to_string(path).map_err(|e| Failure::Domain(format!("{}: {e}", path.display())))
}

pub fn read_template(path: &Path) -> Outcome<TableTemplate> {
    let text = read(path)?;
    parse_structure(&text)
        .and_then(|p| p.into_valid())
        .map_err(|e| in_file(path, e))
}

/// A `.tkm` file, or a fresh table for a `.tks` file.
pub fn read_module(path: &Path) -> Outcome<TableModule> {
    if path.extension().is_some_and(|e| e == "tks") {
        return TableModule::new(read_template(path)?).map_err(|e| in_file(path, e));
    }
    load_module(&read(path)?).map_err(|e| in_file(path, e))
}

pub fn read_buffer(path: &Path) -> Outcome<ItemBuffer> {
    load_buffer(&read(path)?).map_err(|e| in_file(path, e))
}

/// `a..b` (data rows, end exclusive) or a single row `a`.
pub fn parse_rows(text: &str) -> Outcome<RowRange> {
    let bad = || Failure::Usage(format!("bad row range {text:?}, expected START..END"));
    let (start, end) = match text.split_once("..") {
        Some((a, b)) => (
            a.trim().parse().map_err(|_| bad())?,
            b.trim().parse().map_err(|_| bad())?,
        ),
        None => {
            let a: usize = text.trim().parse().map_err(|_| bad())?;
            (a, a + 1)
        }
    };
    if start > end {
        return Err(bad());
    }
    Ok(RowRange { start, end })
}

/// `catalog:item` as printed by `catalog query`.
pub fn parse_item(text: &str) -> Outcome<ItemRef> {
    let bad = || Failure::Usage(format!("bad item {text:?}, expected CATALOG:ITEM"));
    let (c, i) = text.split_once(':').ok_or_else(bad)?;
    Ok(ItemRef {
        catalog: c.parse().map_err(|_| bad())?,
        item: i.parse().map_err(|_| bad())?,
    })
}

pub fn parse_path(text: &str) -> Outcome<CellPath> {
    text.parse()
        .map_err(|e: tkd_core::Error| Failure::Usage(e.to_string()))
}

pub fn parse_types(list: &[String]) -> Outcome<Vec<ElementType>> {
    if list.is_empty() {
        return Ok(ElementType::ALL.to_vec());
    }
    list.iter()
        .map(|t| {
            t.parse()
                .map_err(|e: tkd_core::Error| Failure::Usage(e.to_string()))
        })
        .collect()
}

pub fn validate(path: &Path) -> Outcome {
    let text = read(path)?;
    let parsed = parse_structure(&text).map_err(|e| in_file(path, e))?;
    let mut out = Output::default();
    let diagnostics = validate_template(&parsed.template);
    for d in &diagnostics {
        out.notes.push(format!("{}: {d}", path.display()));
    }
    if diagnostics.iter().any(|d| d.severity == Severity::Error) {
        let first = diagnostics
            .iter()
            .find(|d| d.severity == Severity::Error)
            .expect("checked");
        return Err(Failure::Domain(format!("{}: {first}", path.display())));
    }
    let graphs = tkd_core::enumerate_graphs(&parsed.template).len();
    out.body = format!("{}: ok, {graphs} graphs\n", path.display());
    Ok(out)
}

pub fn new_module(tks: &Path, records: usize) -> Outcome {
    let mut module = TableModule::new(read_template(tks)?).map_err(|e| in_file(tks, e))?;
    for r in 0..records {
        module.insert_record(r).map_err(|e| in_file(tks, e))?;
    }
    Ok(Output::text(save_module(&module)))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Text,
    Svg,
}

impl std::str::FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "text" => Ok(Format::Text),
            "svg" => Ok(Format::Svg),
            _ => Err(format!("unknown format {s:?} (text or svg)")),
        }
    }
}

pub fn render(file: &Path, fmt: Format) -> Outcome {
    let module = read_module(file)?;
    let metrics = Metrics::default();
    Ok(Output::text(match fmt {
        Format::Text => render_text(&module, &metrics),
        Format::Svg => render_svg(&module, &metrics),
    }))
}

#[derive(Debug, Clone, Default)]
pub struct PageOptions {
    pub height: Option<f64>,
    pub repeat_header: bool,
    pub numbers: Option<u32>,
    pub direction: Option<Direction>,
}

/// Lays the chunks out on one sheet. Flags override the file's own settings.
pub fn paginate_file(file: &Path, opts: &PageOptions, fmt: Format) -> Outcome {
    let module = read_module(file)?;
    let metrics = Metrics::default();
    let mut spec: ContinuationSpec = module.continuation.clone();
    if opts.height.is_some() {
        spec.chunk_height_mm = opts.height;
    }
    if opts.repeat_header {
        spec.repeat_header = true;
    }
    if let Some(n) = opts.numbers {
        spec.number_row = true;
        spec.first_graph_number = n;
    }
    if let Some(d) = opts.direction {
        spec.direction = d;
    }
    let segments = paginate(&module, &metrics, &spec).map_err(|e| in_file(file, e))?;
    let sheet = page_sheet(&module, &metrics, &spec, &segments);
    let mut out = Output::text(match fmt {
        Format::Text => sheet_to_text(&sheet, &metrics),
        Format::Svg => sheet_to_svg(&sheet),
    });
    for (i, s) in segments.iter().enumerate() {
        out.notes.push(format!(
            "segment {}: records {}..{}, height {} mm",
            i + 1,
            s.records.start,
            s.records.end,
            tkd_core::model::format_number(s.rect.height)
        ));
    }
    Ok(out)
}

#[derive(Debug, Clone, Default)]
pub struct SpecGenOptions {
    pub scope: Vec<PathBuf>,
    pub types: Vec<ElementType>,
    pub template: PathBuf,
    pub merge: bool,
    pub sort: Vec<String>,
}

pub fn spec_gen(opts: &SpecGenOptions) -> Outcome {
    let mut module = read_module(&opts.template)?;
    let scope = CollectionScope {
        files: opts.scope.clone(),
        element_types: opts.types.clone(),
    };
    let collected = collect(&scope).map_err(|e| Failure::Domain(e.to_string()))?;
    let report = autofill(&mut module, &collected).map_err(|e| in_file(&opts.template, e))?;
    let mut out = Output::default();
    for (row, dropped) in report.rows.iter().zip(&report.dropped) {
        if !dropped.is_empty() {
            out.notes
                .push(format!("row {row}: no graph for properties {dropped:?}"));
        }
    }
    if opts.merge {
        let n = tkd_core::data_rows(&module).len();
        let removed =
            merge_identical(&mut module, 0..n).map_err(|e| Failure::Domain(e.to_string()))?;
        out.notes.push(format!("merged {removed} rows"));
    }
    if !opts.sort.is_empty() {
        sort_records(&mut module, &opts.sort).map_err(|e| in_file(&opts.template, e))?;
    }
    out.body = save_module(&module);
    Ok(out)
}

pub fn load_catalogs(dir: &Path) -> Outcome<CatalogStore> {
    CatalogStore::load_dir(dir).map_err(|e| in_file(dir, e))
}

#[derive(Debug, Clone, Default)]
pub struct QueryOptions {
    pub class: String,
    pub pressure: Option<String>,
    pub temperature: Option<String>,
    pub dn: Option<u32>,
}

pub fn catalog_query(dir: &Path, opts: &QueryOptions) -> Outcome {
    let store = load_catalogs(dir)?;
    let quantity = |s: &str| parse_quantity(s).map_err(|e| Failure::Usage(e.to_string()));
    let constraints = ConstraintSet {
        pressure: opts.pressure.as_deref().map(quantity).transpose()?,
        temperature: opts.temperature.as_deref().map(quantity).transpose()?,
        dn: opts.dn,
    };
    let hits =
        query(&store, &opts.class, &constraints).map_err(|e| Failure::Domain(e.to_string()))?;
    let mut body = String::new();
    for r in hits {
        let (entry, item) = store.get(r).expect("query returns valid refs");
        let _ = writeln!(
            body,
            "{}:{}\t{}",
            r.catalog,
            r.item,
            tkd_core::catalog::describe_item(&entry.catalog, item)
        );
    }
    Ok(Output::text(body))
}

fn apply(
    module: &mut TableModule,
    op: &Op,
    file: &Path,
    catalogs: &CatalogStore,
    buffer: &ItemBuffer,
) -> Outcome<serde_json::Value> {
    let ctx = OpContext {
        metrics: &Metrics::default(),
        catalogs,
        buffer,
    };
    op.apply(module, &ctx).map_err(|e| match e {
        WorkspaceError::Domain(e) => in_file(file, e),
        other => Failure::Usage(other.to_string()),
    })
}

/// Applies one edit to a module file and returns the new `.tkm` text.
pub fn edit(file: &Path, op: &Op) -> Outcome {
    let mut module = read_module(file)?;
    let result = apply(
        &mut module,
        op,
        file,
        &CatalogStore::default(),
        &ItemBuffer::default(),
    )?;
    let mut out = Output::text(save_module(&module));
    if !result.is_null() {
        out.notes.push(result.to_string());
    }
    Ok(out)
}

pub fn catalog_fill(file: &Path, dir: &Path, subject: CellPath, item: ItemRef) -> Outcome {
    let store = load_catalogs(dir)?;
    let mut module = read_module(file)?;
    let result = apply(
        &mut module,
        &Op::CatalogPick { subject, item },
        file,
        &store,
        &ItemBuffer::default(),
    )?;
    Ok(Output {
        body: save_module(&module),
        notes: vec![result.to_string()],
    })
}

pub fn buffer_copy(file: &Path, rows: RowRange) -> Outcome {
    let module = read_module(file)?;
    let buffer = copy_to_buffer(&module, rows.into()).map_err(|e| in_file(file, e))?;
    Ok(Output::text(save_buffer(&buffer)))
}

pub fn buffer_paste(buffer: &Path, file: &Path, at: usize) -> Outcome {
    let buffer = read_buffer(buffer)?;
    let mut module = read_module(file)?;
    let report = paste_from_buffer(&buffer, &mut module, at).map_err(|e| in_file(file, e))?;
    let mut out = Output::text(save_module(&module));
    for (row, dropped) in report.rows.iter().zip(&report.dropped) {
        if !dropped.is_empty() {
            out.notes
                .push(format!("row {row}: dropped properties {dropped:?}"));
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn row_ranges() {
        assert_eq!(parse_rows("2..5").unwrap(), RowRange { start: 2, end: 5 });
        assert_eq!(parse_rows("3").unwrap(), RowRange { start: 3, end: 4 });
        assert!(matches!(parse_rows("5..2"), Err(Failure::Usage(_))));
        assert!(matches!(parse_rows("x"), Err(Failure::Usage(_))));
    }

    #[test]
    fn items_and_types() {
        assert_eq!(
            parse_item("1:6").unwrap(),
            ItemRef {
                catalog: 1,
                item: 6
            }
        );
        assert!(parse_item("16").is_err());
        assert_eq!(parse_types(&[]).unwrap().len(), 3);
        assert_eq!(
            parse_types(&["position_label".into()]).unwrap(),
            [ElementType::PositionLabel]
        );
        assert_eq!(parse_types(&["tank".into()]).unwrap_err().exit_code(), 2);
    }
}
