//! Parametric engine for tabular design documents: tables built from
//! recursive block splits, filled from constraint-filtered catalogs and
//! drawing-element properties, then laid out, paginated and rendered.

pub mod buffer;
pub mod catalog;
pub mod codec;
pub mod drawing;
pub mod error;
pub mod layout;
pub mod lexer;
pub mod model;
pub mod module_file;
pub mod paginate;
pub mod pipeline;
pub mod region;
pub mod render;
pub mod rows;
pub mod structure;
pub mod units;
pub mod validate;
pub mod wrap;

pub use buffer::{
    copy_to_buffer, load_buffer, paste_from_buffer, save_buffer, ItemBuffer, PasteReport,
};
pub use catalog::{
    apply_rules, fill_cells, fill_target, gather_constraints, load_catalog, load_rules, query,
    Catalog, CatalogStore, ConstraintSet, ItemRef, PropertyRules, PropertySet,
};
pub use drawing::{load_drawing, save_drawing, DrawingElement, DrawingFile, ElementType};
pub use error::{Error, Position, Result, SyntaxError};
pub use layout::{
    hit_test, insert_at_point, layout, locate, Hit, LayoutTree, Metrics, Rect, Sheet, Stroke,
    TextBox,
};
pub use model::{
    enumerate_graphs, props, Axis, BlockNode, CellPath, CellValue, ConstraintRole,
    ContinuationSpec, Direction, GraphDescriptor, InstanceNode, Leaf, LineType, PropertyId, Region,
    Split, SplitCount, StyleOverride, StyleSpec, TableModule, TableTemplate,
};
pub use module_file::{load_module, save_module};
pub use paginate::{graph_numbers, page_sheet, paginate, Segment};
pub use pipeline::{
    autofill, collect, collect_drawings, extract_common_names, fill_row, merge_identical,
    pack_rows, sort_records, total_quantity, AutofillReport, Collected, CollectionScope,
};
pub use region::{flat_region, FlatRegion};
pub use render::{render_svg, render_text, sheet_to_svg, sheet_to_text};
pub use rows::{data_rows, DataRow};
pub use structure::{parse_structure, serialize_structure, ParsedStructure};
pub use units::{convert, Dimension, UnitRegistry};
pub use validate::{validate_template, Diagnostic, Severity};
