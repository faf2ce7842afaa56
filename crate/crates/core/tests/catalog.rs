mod common;

use tkd_core::*;

#[test]
fn fixture_catalogs_load() {
    let store = common::pipes_store();
    assert_eq!(store.classes(), ["Фланцы", "Трубы"]);
    let (entry, _) = store
        .get(ItemRef {
            catalog: 1,
            item: 0,
        })
        .unwrap();
    assert_eq!(entry.name, "pipes");
    assert_eq!(entry.rules.rules.len(), 2);
}

#[test]
fn query_matches_brute_force() {
    let store = common::pipes_store();
    for seed in 0..2000 {
        let c = common::random_constraints(&mut common::rng(seed));
        for class in ["Трубы", "Фланцы"] {
            let got = query(&store, class, &c).unwrap();
            assert_eq!(
                got,
                common::brute_force_query(&store, class, &c),
                "seed {seed}: {c:?}"
            );
        }
    }
}

#[test]
fn unknown_class_is_an_error() {
    let store = common::pipes_store();
    let e = query(&store, "Насосы", &ConstraintSet::default()).unwrap_err();
    assert_eq!(e.code(), "unknown-object-class");
}

#[test]
fn pick_fills_the_row() {
    let store = common::pipes_store();
    let mut t = common::module("piping.tks");
    let r = t.insert_record(0).unwrap();
    t.set_cell(
        &CellPath::new(r, [1]),
        CellValue::number(16.0, Some("кгс/см²")),
    )
    .unwrap();
    t.set_cell(&CellPath::new(r, [2]), CellValue::number(200.0, None))
        .unwrap();
    t.set_cell(&CellPath::new(r, [3]), CellValue::number(50.0, None))
        .unwrap();

    let subject = CellPath::new(r, [4]);
    let c = gather_constraints(&t, &subject).unwrap();
    assert_eq!(c.dn, Some(50));
    let (p, unit) = c.pressure.clone().unwrap();
    assert!((convert(p, &unit, "МПа").unwrap() - 1.569064).abs() < 1e-9);

    let hits = query(&store, "Трубы", &c).unwrap();
    assert_eq!(
        hits,
        [
            ItemRef {
                catalog: 1,
                item: 1
            },
            ItemRef {
                catalog: 1,
                item: 6
            }
        ]
    );

    let (entry, item) = store.get(hits[0]).unwrap();
    let props = apply_rules(&entry.rules, &entry.catalog, item).unwrap();
    let target = fill_target(&t, &subject);
    let ignored = fill_cells(&mut t, &target, &props).unwrap();
    assert!(ignored.is_empty());
    assert_eq!(
        t.resolve_cell(&subject).unwrap().text,
        "Труба 57×4 ГОСТ 8732-78"
    );
    let mass = t.resolve_cell(&CellPath::new(r, [6])).unwrap();
    assert_eq!(mass.numeric, Some(5.23));
}

#[test]
fn header_cannot_be_filled() {
    let mut t = common::module("piping.tks");
    let e = fill_cells(&mut t, &CellPath::new(0, []), &PropertySet::new()).unwrap_err();
    assert_eq!(e.code(), "header-readonly");
}

#[test]
fn catalog_errors_have_positions() {
    let e = load_catalog("catalog X\nfield a unit=furlong\n").unwrap_err();
    assert_eq!(e.code(), "unknown-unit");
    assert_eq!(e.position().unwrap().line, 2);
    let e = load_catalog("catalog X\nfield a\nitem 1 | 2\n").unwrap_err();
    assert_eq!(e.position().unwrap().line, 3);
}
