//! Inputs shared by the benchmarks.

use tkd_core::{
    insert_at_point, layout, parse_structure, CatalogStore, CellPath, CellValue, Metrics,
    TableModule,
};

pub const FLANGE_TKS: &str = include_str!("../../core/fixtures/flange.tks");
pub const SPEC_TKS: &str = include_str!("../../core/fixtures/spec.tks");

pub fn catalog_dir() -> std::path::PathBuf {
    std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/fixtures/catalogs")
}

pub fn catalogs() -> CatalogStore {
    CatalogStore::load_dir(&catalog_dir()).expect("fixture catalogs load")
}

/// A flange table with `records` joints, every third one grown by a click.
pub fn flange_table(records: usize) -> TableModule {
    let template = parse_structure(FLANGE_TKS).unwrap().into_valid().unwrap();
    let mut t = TableModule::new(template).unwrap();
    let m = Metrics::default();
    for r in 0..records {
        t.insert_record(r).unwrap();
    }
    for r in (1..=records).step_by(3) {
        let rect = layout(&t, &m).records[r].rect;
        insert_at_point(&mut t, &m, 20.0, rect.y + rect.height / 2.0).unwrap();
        t.set_cell(
            &CellPath::new(r, [3, 1, 0]),
            CellValue::text(format!("С{r}")),
        )
        .unwrap();
    }
    t
}

/// A specification table with `records` filled rows.
pub fn spec_table(records: usize) -> TableModule {
    let template = parse_structure(SPEC_TKS).unwrap().into_valid().unwrap();
    let mut t = TableModule::new(template).unwrap();
    for r in 0..records {
        let rec = t.insert_record(r).unwrap();
        t.set_cell(
            &CellPath::new(rec, [0]),
            CellValue::text((r + 1).to_string()),
        )
        .unwrap();
        t.set_cell(
            &CellPath::new(rec, [2]),
            CellValue::text(format!("Труба {}×4 ГОСТ 8732-78", 57 + r % 50)),
        )
        .unwrap();
        t.set_cell(
            &CellPath::new(rec, [3]),
            CellValue::number((r % 7 + 1) as f64, None),
        )
        .unwrap();
    }
    t
}
