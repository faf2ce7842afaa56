mod common;

use tkd_core::*;

fn text_of(t: &TableModule, path: &CellPath) -> String {
    t.resolve_cell(path).unwrap().text.clone()
}

#[test]
fn explication_module_file() {
    let t = common::explication_module();
    common::check_golden("explication.tkm", &save_module(&t));
    assert_eq!(load_module(&common::fixture("explication.tkm")).unwrap(), t);
}

#[test]
fn explication_render() {
    let t = common::explication_module();
    let m = Metrics::default();
    common::check_golden("golden/explication.txt", &render_text(&t, &m));
    common::check_golden("golden/explication.svg", &render_svg(&t, &m));
}

#[test]
fn explication_to_specification() {
    let source = load_module(&common::fixture("explication.tkm")).unwrap();
    let buffer = copy_to_buffer(&source, 0..12).unwrap();
    common::check_golden("golden/explication.tkb", &save_buffer(&buffer));

    let mut spec = common::module("spec.tks");
    let report = paste_from_buffer(&buffer, &mut spec, 0).unwrap();
    assert_eq!(report.rows.len(), 12);
    assert_eq!(text_of(&spec, &CellPath::new(1, [0])), "1");
    assert_eq!(
        text_of(&spec, &CellPath::new(1, [2])),
        "Трубопровод пневмотранспорта"
    );
    assert_eq!(text_of(&spec, &CellPath::new(1, [5])), "Централизованно");
    assert_eq!(text_of(&spec, &CellPath::new(2, [0])), "4A1-3039-45");
    assert_eq!(
        spec.resolve_cell(&CellPath::new(2, [3])).unwrap().numeric,
        Some(9.0)
    );
    assert!(spec
        .resolve_cell(&CellPath::new(2, [4]))
        .unwrap()
        .is_blank());
    assert_eq!(report.dropped[3], vec![7]);

    let m = Metrics::default();
    common::check_golden("golden/specification.tkm", &save_module(&spec));
    common::check_golden("golden/specification.txt", &render_text(&spec, &m));
    common::check_golden("golden/specification.svg", &render_svg(&spec, &m));
}

#[test]
fn flange_joint_sheet() {
    let mut t = common::module("flange.tks");
    let m = Metrics::default();
    t.insert_record(0).unwrap();
    insert_at_point(&mut t, &m, 40.0, 20.0).unwrap();
    t.set_cell(
        &CellPath::new(1, [0, 1, 0, 0]),
        CellValue::number(50.0, Some("мм")),
    )
    .unwrap();
    for (i, name) in ["Шпилька", "Гайка", "Шайба"].into_iter().enumerate() {
        t.set_cell(&CellPath::new(1, [1, 1, i, 0]), CellValue::text(name))
            .unwrap();
    }
    t.set_cell(&CellPath::new(1, [3, 1, 0]), CellValue::text("С17"))
        .unwrap();
    let spec = ContinuationSpec {
        number_row: true,
        first_graph_number: 25,
        ..ContinuationSpec::default()
    };
    let segments = paginate(&t, &m, &spec).unwrap();
    let sheet = page_sheet(&t, &m, &spec, &segments);
    common::check_golden("golden/flange.txt", &sheet_to_text(&sheet, &m));
    common::check_golden("golden/flange.svg", &sheet_to_svg(&sheet));
}
