#![allow(dead_code)]

use std::path::PathBuf;

use tkd_core::{parse_structure, TableModule, TableTemplate};

pub fn fixture_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("fixtures")
        .join(name)
}

pub fn fixture(name: &str) -> String {
    std::fs::read_to_string(fixture_path(name)).unwrap_or_else(|e| panic!("{name}: {e}"))
}

pub fn template(name: &str) -> TableTemplate {
    parse_structure(&fixture(name))
        .unwrap()
        .into_valid()
        .unwrap()
}

pub fn module(name: &str) -> TableModule {
    TableModule::new(template(name)).unwrap()
}

use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tkd_core::{
    Axis, BlockNode, CellPath, CellValue, ContinuationSpec, Direction, InstanceNode, ItemBuffer,
    Leaf, LineType, PropertySet, Split, SplitCount,
};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

const WORDS: &[&str] = &[
    "Труба",
    "Отвод",
    "Фланец",
    "Кран",
    "шаровой",
    "ГОСТ",
    "10704-91",
    "57×3.5",
    "DN50",
    "Ст3сп",
    "A<B",
    "x&y",
    "\"Engel\"",
    "back\\slash",
    "Ø108",
    "",
];
const UNITS: &[Option<&str>] = &[None, None, Some("мм"), Some("кг"), Some("МПа"), Some("°C")];

pub fn random_text(rng: &mut impl Rng) -> String {
    let n = rng.random_range(0..4);
    let mut s = (0..n)
        .map(|_| *WORDS.choose(rng).unwrap())
        .collect::<Vec<_>>()
        .join(" ");
    if rng.random_bool(0.1) {
        s.push('\n');
        s.push_str(WORDS.choose(rng).unwrap());
    }
    s
}

struct Gen<'r, R: Rng> {
    rng: &'r mut R,
    next_id: usize,
}

impl<R: Rng> Gen<'_, R> {
    fn leaf(&mut self, width: f64) -> BlockNode {
        self.next_id += 1;
        let mut leaf = Leaf::new(&format!("g{}", self.next_id), width);
        leaf.header_text = if self.rng.random_bool(0.8) {
            format!("Графа {}", self.next_id)
        } else {
            String::new()
        };
        leaf.visible_in_data = self.rng.random_bool(0.9);
        if self.rng.random_bool(0.6) {
            leaf.property_id = Some(self.rng.random_range(1..9));
        }
        leaf.unit = UNITS.choose(self.rng).unwrap().map(str::to_string);
        BlockNode::Leaf(leaf)
    }

    fn block(&mut self, width: f64, depth: usize) -> BlockNode {
        if depth >= 4 || self.rng.random_bool(0.25 + depth as f64 * 0.15) {
            return self.leaf(width);
        }
        let mut split = match self.rng.random_range(0..3) {
            0 if width >= 10.0 => {
                let n = self.rng.random_range(2..=(width / 5.0).min(4.0) as usize);
                let mut widths = vec![5.0; n];
                let mut rest = width - 5.0 * n as f64;
                for w in widths.iter_mut().take(n - 1) {
                    let extra = self.rng.random_range(0..=rest as u32) as f64;
                    *w += extra;
                    rest -= extra;
                }
                widths[n - 1] += rest;
                let children = widths
                    .into_iter()
                    .map(|w| self.block(w, depth + 1))
                    .collect();
                Split::new(Axis::Columns, SplitCount::Fixed(n), children)
            }
            1 => {
                let n = self.rng.random_range(2..4);
                let children = (0..n).map(|_| self.block(width, depth + 1)).collect();
                Split::new(Axis::Rows, SplitCount::Fixed(n), children)
            }
            _ => {
                let child = self.block(width, depth + 1);
                let mut s = Split::new(Axis::Rows, SplitCount::Arbitrary, vec![child]);
                s.insert_unit = self.rng.random_range(1..3);
                s
            }
        };
        split.visible_in_data = self.rng.random_bool(0.85);
        split.visible_in_header = self.rng.random_bool(0.9);
        if self.rng.random_bool(0.2) {
            split.style.line = Some(
                *[LineType::Thin, LineType::Thick, LineType::None]
                    .choose(self.rng)
                    .unwrap(),
            );
        }
        BlockNode::Split(split)
    }
}

/// A random valid template, 20 to 200 mm wide.
pub fn random_template(rng: &mut impl Rng) -> TableTemplate {
    let width = rng.random_range(20..200) as f64;
    let mut gen = Gen { rng, next_id: 0 };
    let root = gen.block(width, 0);
    let mut t = TableTemplate::new(&format!("T{}", gen.rng.random_range(0..1000)), root);
    if gen.rng.random_bool(0.3) {
        t.units_note = "Масса в кг".into();
    }
    t
}

/// Instance paths of every arbitrary split in the data records.
pub fn arbitrary_splits(table: &TableModule) -> Vec<(CellPath, usize)> {
    fn go(
        block: &BlockNode,
        inst: &InstanceNode,
        path: CellPath,
        out: &mut Vec<(CellPath, usize)>,
    ) {
        if let (BlockNode::Split(s), InstanceNode::Split(children)) = (block, inst) {
            if s.is_arbitrary() {
                out.push((path.clone(), children.len()));
            }
            for (i, c) in children.iter().enumerate() {
                let b = if s.is_arbitrary() {
                    &s.children[0]
                } else {
                    &s.children[i]
                };
                go(b, c, path.child(i), out);
            }
        }
    }
    let mut out = Vec::new();
    for (r, rec) in table.records.iter().enumerate().skip(1) {
        go(&table.template.root, rec, CellPath::new(r, []), &mut out);
    }
    out
}

pub fn random_value(rng: &mut impl Rng, unit: Option<&str>) -> CellValue {
    match unit {
        Some(u) if rng.random_bool(0.7) => {
            CellValue::number(rng.random_range(-1000..100_000) as f64 / 100.0, Some(u))
        }
        Some(_) => CellValue::blank(),
        None if rng.random_bool(0.3) => CellValue::number(rng.random_range(0..1000) as f64, None),
        None => CellValue::text(random_text(rng)),
    }
}

/// A module over `template` with random records, parts and cell values.
pub fn random_module_for(rng: &mut impl Rng, template: TableTemplate) -> TableModule {
    let mut t = TableModule::new(template).unwrap();
    for _ in 0..rng.random_range(0..5) {
        let after = rng.random_range(0..t.records.len());
        t.insert_record(after).unwrap();
    }
    for _ in 0..rng.random_range(0..8) {
        let splits = arbitrary_splits(&t);
        let Some((path, len)) = splits.choose(rng).cloned() else {
            break;
        };
        t.insert_part(&path, rng.random_range(0..=len)).unwrap();
    }
    let leaves: Vec<(CellPath, Option<String>)> = (1..t.records.len())
        .flat_map(|r| {
            t.records[r]
                .leaf_values()
                .into_iter()
                .map(move |(steps, _)| CellPath::new(r, steps))
        })
        .map(|p| {
            let unit = t.leaf_at(&p).unwrap().0.unit.clone();
            (p, unit)
        })
        .collect();
    for (path, unit) in leaves {
        if rng.random_bool(0.7) {
            t.set_cell(&path, random_value(rng, unit.as_deref()))
                .unwrap();
        }
    }
    if rng.random_bool(0.5) {
        t.continuation = ContinuationSpec {
            chunk_height_mm: Some(rng.random_range(40..300) as f64),
            direction: if rng.random_bool(0.5) {
                Direction::Left
            } else {
                Direction::Right
            },
            repeat_header: rng.random_bool(0.5),
            number_row: rng.random_bool(0.5),
            first_graph_number: rng.random_range(1..50),
        };
    }
    t
}

pub fn random_module(rng: &mut impl Rng) -> TableModule {
    let template = random_template(rng);
    random_module_for(rng, template)
}

pub fn random_buffer(rng: &mut impl Rng) -> ItemBuffer {
    let rows = (0..rng.random_range(0..6))
        .map(|_| {
            let mut set = PropertySet::new();
            for _ in 0..rng.random_range(0..5) {
                let unit = *UNITS.choose(rng).unwrap();
                let v = random_value(rng, unit);
                if !v.is_blank() {
                    set.insert(rng.random_range(1..20), v);
                }
            }
            set
        })
        .collect();
    ItemBuffer { rows }
}

/// Compares `actual` with `fixtures/<name>`; `TKD_BLESS=1` rewrites the file.
pub fn check_golden(name: &str, actual: &str) {
    let path = fixture_path(name);
    if std::env::var_os("TKD_BLESS").is_some() {
        std::fs::write(&path, actual).unwrap();
        return;
    }
    let expected = std::fs::read_to_string(&path)
        .unwrap_or_else(|e| panic!("{name}: {e} (run with TKD_BLESS=1)"));
    assert_eq!(
        actual, expected,
        "{name} differs; rerun with TKD_BLESS=1 after checking the change"
    );
}

/// Rows of the equipment list (№, Позиция, Наименование, Характеристика, Кол., Примечание).
pub const EXPLICATION_ROWS: [[&str; 6]; 12] = [
    [
        "1",
        "1",
        "Трубопровод пневмотранспорта",
        "",
        "",
        "Централизованно",
    ],
    ["2", "4A1-3039-45", "Накопительный бункер", "", "9", ""],
    ["3", "3", "Ручная завбужка", "", "9", ""],
    ["4", "4C102-8", "Литьевая машина", "\"Engel\"", "9", ""],
    ["5", "4A510", "Аспиратор (фильтр)", "", "1", ""],
    ["6", "588-9/8-12", "Ввод коммуникаций", "", "1", ""],
    [
        "7",
        "7",
        "Участок по первичной обработке фитингов",
        "",
        "9",
        "У каждой машины",
    ],
    [
        "8",
        "1C110-40",
        "Ленточный транспортер",
        "\"Kuffner\"",
        "",
        "",
    ],
    ["9", "1C129", "Транспортировочный ящик", "", "", ""],
    [
        "10",
        "10",
        "Участок по окончательной обработке фитингов",
        "",
        "",
        "",
    ],
    [
        "11",
        "11",
        "Участок контроля и упаковки фитингов",
        "",
        "",
        "",
    ],
    ["12", "12", "Оклад", "", "", ""],
];

/// The explication table filled with [`EXPLICATION_ROWS`].
pub fn explication_module() -> TableModule {
    let mut t = module("explication.tks");
    for (i, row) in EXPLICATION_ROWS.iter().enumerate() {
        let r = t.insert_record(i).unwrap();
        for (c, text) in row.iter().enumerate() {
            if text.is_empty() {
                continue;
            }
            let value = match text.parse::<f64>() {
                Ok(n) if c == 4 => CellValue::number(n, None),
                _ => CellValue::text(*text),
            };
            t.set_cell(&CellPath::new(r, [c]), value).unwrap();
        }
    }
    t
}

use tkd_core::{DrawingElement, DrawingFile, ElementType};

const NAMES: &[&str] = &[
    "Труба 57×3.5 ГОСТ 10704-91",
    "Труба 57×4 ГОСТ 8732-78",
    "Труба 108×4 ГОСТ 8732-78",
    "Отвод 90° 57×3.5",
    "Кран шаровой DN50",
    "Кран шаровой DN80",
];

/// A drawing whose elements reuse a small pool of property values, so that
/// collection has something to merge.
pub fn random_drawing(rng: &mut impl Rng, name: &str) -> DrawingFile {
    let elements = (0..rng.random_range(0..12))
        .map(|_| {
            let mut properties = PropertySet::new();
            properties.insert(3, CellValue::text(*NAMES.choose(rng).unwrap()));
            if rng.random_bool(0.5) {
                properties.insert(1, CellValue::text(rng.random_range(1..4).to_string()));
            }
            if rng.random_bool(0.4) {
                let kg = [4.62, 5.23, 10.26][rng.random_range(0..3)];
                let v = if rng.random_bool(0.5) {
                    CellValue::number(kg, Some("кг"))
                } else {
                    CellValue::number(kg * 1000.0, Some("г"))
                };
                properties.insert(5, v);
            }
            if rng.random_bool(0.2) {
                properties.insert(7, CellValue::text("R=1.5DN"));
            }
            DrawingElement {
                element_type: *ElementType::ALL.choose(rng).unwrap(),
                properties,
                quantity: rng.random_range(0..20) as f64,
            }
        })
        .collect();
    DrawingFile {
        name: name.to_string(),
        elements,
    }
}

use tkd_core::{Catalog, CatalogStore, ConstraintSet, ItemRef};

pub fn pipes_store() -> CatalogStore {
    CatalogStore::load_dir(&fixture_path("catalogs")).unwrap()
}

/// Pressure units with their size in pascal, temperature units as (scale, offset) to °C.
pub const PRESSURE_UNITS: [(&str, f64); 5] = [
    ("МПа", 1e6),
    ("кгс/см²", 98_066.5),
    ("бар", 1e5),
    ("м вод.ст.", 9_806.65),
    ("кПа", 1e3),
];
pub const TEMPERATURE_UNITS: [(&str, f64, f64); 3] = [
    ("°C", 1.0, 0.0),
    ("K", 1.0, -273.15),
    ("°F", 5.0 / 9.0, -160.0 / 9.0),
];

pub fn random_constraints(rng: &mut impl Rng) -> ConstraintSet {
    let mut set = ConstraintSet::default();
    if rng.random_bool(0.7) {
        let (u, pa) = PRESSURE_UNITS[rng.random_range(0..PRESSURE_UNITS.len())];
        let mpa = rng.random_range(0.0..5.0);
        set.pressure = Some((mpa * 1e6 / pa, u.to_string()));
    }
    if rng.random_bool(0.7) {
        let (u, k, off) = TEMPERATURE_UNITS[rng.random_range(0..TEMPERATURE_UNITS.len())];
        let c: f64 = rng.random_range(-60.0..500.0);
        set.temperature = Some(((c - off) / k, u.to_string()));
    }
    if rng.random_bool(0.6) {
        set.dn = Some(*[50u32, 65, 80, 100, 150, 200].choose(rng).unwrap());
    }
    set
}

/// Exhaustive scan with its own conversion table.
pub fn brute_force_query(store: &CatalogStore, class: &str, c: &ConstraintSet) -> Vec<ItemRef> {
    let mpa = c.pressure.as_ref().map(|(v, u)| {
        let pa = PRESSURE_UNITS.iter().find(|(s, _)| s == u).unwrap().1;
        v * pa / 1e6
    });
    let celsius = c.temperature.as_ref().map(|(v, u)| {
        let (_, k, off) = TEMPERATURE_UNITS.iter().find(|(s, _, _)| s == u).unwrap();
        v * k + off
    });
    let mut out = Vec::new();
    for (ci, entry) in store.entries.iter().enumerate() {
        let cat: &Catalog = &entry.catalog;
        if cat.object_class != class {
            continue;
        }
        for (ii, item) in cat.items.iter().enumerate() {
            let a = &item.applicability;
            let inside = |b: &tkd_core::catalog::Bounds, v: f64| {
                // A relative tolerance absorbs the rounding of the unit round trip.
                let eps = 1e-9 * v.abs().max(1.0);
                b.min.is_none_or(|m| v >= m - eps) && b.max.is_none_or(|m| v <= m + eps)
            };
            let ok = a
                .pressure
                .as_ref()
                .zip(mpa)
                .is_none_or(|(b, v)| inside(b, v))
                && a.temperature
                    .as_ref()
                    .zip(celsius)
                    .is_none_or(|(b, v)| inside(b, v))
                && a.dn
                    .as_ref()
                    .zip(c.dn)
                    .is_none_or(|(set, dn)| set.contains(&dn));
            if ok {
                out.push(ItemRef {
                    catalog: ci,
                    item: ii,
                });
            }
        }
    }
    out
}

/// The flange table with `acts` insertion acts in each of `records` data records.
pub fn flange_module(rng: &mut impl Rng, records: usize) -> TableModule {
    let mut t = module("flange.tks");
    for r in 0..records {
        t.insert_record(r).unwrap();
        for _ in 0..rng.random_range(0..3) {
            t.insert_part(&CellPath::new(r + 1, [0, 1]), 0).unwrap();
        }
    }
    t
}

/// Largest all-plain rectangle around `seed` by trying every rectangle.
pub fn brute_force_region(
    table: &TableModule,
    seed: &CellPath,
) -> (std::ops::Range<usize>, std::ops::Range<usize>) {
    let grid = tkd_core::region::flat_cells(table);
    let graphs = tkd_core::enumerate_graphs(&table.template);
    let tpath = tkd_core::model::template_steps(&table.template.root, &seed.steps).unwrap();
    let g0 = graphs.iter().position(|g| g.path == tpath).unwrap();
    let r0 = seed.record - 1;
    let mut best = (g0..g0 + 1, seed.record..seed.record + 1);
    let mut best_key = None;
    for gs in 0..=g0 {
        for ge in g0 + 1..=graphs.len() {
            for rs in 0..=r0 {
                for re in r0 + 1..=grid.len() {
                    let all = (rs..re).all(|r| (gs..ge).all(|g| grid[r][g].is_some()));
                    if !all {
                        continue;
                    }
                    let (w, h) = (ge - gs, re - rs);
                    let key = (w * h, w, h, std::cmp::Reverse(gs), std::cmp::Reverse(rs));
                    if best_key.as_ref().is_none_or(|k| key > *k) {
                        best_key = Some(key);
                        best = (gs..ge, rs + 1..re + 1);
                    }
                }
            }
        }
    }
    best
}
