//! Electronic catalogs, constraint filtering and property rules.
//!
//! `.cat` grammar (one statement per line, `#` comments):
//!
//! ```text
//! catalog  = "catalog" TEXT NL { field NL } { item NL }
//! field    = "field" TEXT [ "prop" "=" INT ] [ "unit" "=" TEXT ]
//! item     = "item" value { "|" value } [ ";" range { range } ]
//! value    = { WORD | STRING }
//! range    = ("T" | "P") "=" [ NUM ] ".." [ NUM ] | "DN" "=" INT { "," INT }
//! ```
//!
//! `T` bounds are in °C, `P` bounds in МПа; both are inclusive.
//!
//! `.rules` grammar:
//!
//! ```text
//! rules = { "rule" INT "=" STRING [ "unit" TEXT ] NL }
//! ```

use std::collections::{BTreeMap, HashSet};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Position, Result, SyntaxError};
use crate::lexer::{tokenize, Cursor, Tok, Token};
use crate::model::{
    format_number, BlockNode, CellPath, CellValue, ConstraintRole, PropertyId, TableModule,
};
use crate::units::{convert, Dimension, UnitRegistry};

pub type PropertySet = BTreeMap<PropertyId, CellValue>;

pub const PRESSURE_UNIT: &str = "МПа";
pub const TEMPERATURE_UNIT: &str = "°C";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CatalogField {
    pub name: String,
    pub property_id: Option<PropertyId>,
    pub unit: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Bounds {
    pub min: Option<f64>,
    pub max: Option<f64>,
}

impl Bounds {
    pub fn contains(&self, v: f64) -> bool {
        self.min.is_none_or(|m| v >= m) && self.max.is_none_or(|m| v <= m)
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Applicability {
    /// °C.
    pub temperature: Option<Bounds>,
    /// МПа.
    pub pressure: Option<Bounds>,
    pub dn: Option<Vec<u32>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CatalogItem {
    pub values: Vec<String>,
    pub applicability: Applicability,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Catalog {
    pub object_class: String,
    pub fields: Vec<CatalogField>,
    pub items: Vec<CatalogItem>,
}

impl Catalog {
    pub fn field_index(&self, name: &str) -> Option<usize> {
        self.fields.iter().position(|f| f.name == name)
    }

    pub fn value(&self, item: usize, field: &str) -> Option<&str> {
        let i = self.field_index(field)?;
        self.items.get(item)?.values.get(i).map(String::as_str)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Rule {
    pub property_id: PropertyId,
    pub template: String,
    pub unit: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct PropertyRules {
    pub rules: Vec<Rule>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct ConstraintSet {
    pub temperature: Option<(f64, String)>,
    pub pressure: Option<(f64, String)>,
    pub dn: Option<u32>,
}

impl ConstraintSet {
    pub fn is_empty(&self) -> bool {
        self.temperature.is_none() && self.pressure.is_none() && self.dn.is_none()
    }
}

/// A catalog with the rules used to turn its rows into properties.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CatalogEntry {
    pub name: String,
    pub catalog: Catalog,
    pub rules: PropertyRules,
}

/// Index of one catalog row within a store.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ItemRef {
    pub catalog: usize,
    pub item: usize,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct CatalogStore {
    pub entries: Vec<CatalogEntry>,
}

impl CatalogStore {
    pub fn add(&mut self, name: &str, catalog: Catalog, rules: PropertyRules) {
        self.entries.push(CatalogEntry {
            name: name.to_string(),
            catalog,
            rules,
        });
    }

    /// Loads every `*.cat` file of a directory, in name order, each with the
    /// `.rules` file of the same stem when present.
    pub fn load_dir(dir: &Path) -> Result<CatalogStore> {
        let read =
            |p: &Path| std::fs::read_to_string(p).map_err(|_| Error::FileNotFound(p.to_path_buf()));
        let entries = std::fs::read_dir(dir).map_err(|_| Error::FileNotFound(dir.to_path_buf()))?;
        let mut paths: Vec<_> = entries
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.extension().is_some_and(|e| e == "cat"))
            .collect();
        paths.sort();
        let mut store = CatalogStore::default();
        for path in paths {
            let catalog = load_catalog(&read(&path)?)?;
            let rules_path = path.with_extension("rules");
            let rules = if rules_path.exists() {
                load_rules(&read(&rules_path)?)?
            } else {
                PropertyRules::default()
            };
            let name = path
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_default();
            store.add(&name, catalog, rules);
        }
        Ok(store)
    }

    pub fn classes(&self) -> Vec<&str> {
        let mut out: Vec<&str> = Vec::new();
        for e in &self.entries {
            if !out.contains(&e.catalog.object_class.as_str()) {
                out.push(&e.catalog.object_class);
            }
        }
        out
    }

    pub fn get(&self, r: ItemRef) -> Option<(&CatalogEntry, &CatalogItem)> {
        let entry = self.entries.get(r.catalog)?;
        Some((entry, entry.catalog.items.get(r.item)?))
    }
}

fn pos(t: &Token) -> Option<Position> {
    Some(Position {
        line: t.line,
        column: t.column,
    })
}

fn canonical_unit(t: &Token, unit: &str) -> Result<String> {
    UnitRegistry::standard()
        .canonical(unit)
        .map(str::to_string)
        .ok_or_else(|| Error::UnknownUnit {
            unit: unit.to_string(),
            pos: pos(t),
        })
}

fn at_line_end(cur: &Cursor) -> bool {
    matches!(cur.peek_tok(), None | Some(Tok::Newline))
}

pub fn load_catalog(text: &str) -> Result<Catalog> {
    let tokens = tokenize(text, true)?;
    let mut cur = Cursor::new(&tokens, text);
    cur.skip_newlines();
    cur.expect_word("catalog")?;
    let (_, object_class) = cur.text("object class")?;
    cur.end_line()?;
    let mut catalog = Catalog {
        object_class,
        fields: Vec::new(),
        items: Vec::new(),
    };
    let mut props = HashSet::new();
    loop {
        cur.skip_newlines();
        let Some(t) = cur.next() else { break };
        match &t.tok {
            Tok::Word(w) if w == "field" => {
                if !catalog.items.is_empty() {
                    return Err(t.error("fields must precede items").into());
                }
                let (name_token, name) = cur.text("field name")?;
                if catalog.field_index(&name).is_some() {
                    return Err(name_token.error(format!("duplicate field {name:?}")).into());
                }
                let mut field = CatalogField {
                    name,
                    property_id: None,
                    unit: None,
                };
                while !at_line_end(&cur) {
                    let (key_token, key) = cur.text("attribute")?;
                    cur.expect(&Tok::Eq)?;
                    match key.as_str() {
                        "prop" => {
                            let (vt, id) = cur.integer("property number")?;
                            let id = id as PropertyId;
                            if !props.insert(id) {
                                return Err(Error::DuplicateProperty { id, pos: pos(vt) });
                            }
                            field.property_id = Some(id);
                        }
                        "unit" => {
                            let (vt, u) = cur.text("unit")?;
                            field.unit = Some(canonical_unit(vt, &u)?);
                        }
                        _ => {
                            return Err(key_token
                                .error(format!("unknown attribute `{key}`"))
                                .into())
                        }
                    }
                }
                cur.end_line()?;
                catalog.fields.push(field);
            }
            Tok::Word(w) if w == "item" => {
                let item = item(&mut cur, t, &catalog.fields)?;
                catalog.items.push(item);
            }
            other => {
                return Err(t
                    .error(format!(
                        "expected `field` or `item`, found {}",
                        other.describe()
                    ))
                    .into())
            }
        }
    }
    Ok(catalog)
}

fn item(
    cur: &mut Cursor,
    start: &Token,
    fields: &[CatalogField],
) -> Result<CatalogItem, SyntaxError> {
    let mut values: Vec<(Option<&Token>, String)> = Vec::new();
    let mut current: (Option<&Token>, Vec<String>) = (None, Vec::new());
    let mut ranges = false;
    loop {
        match cur.peek_tok() {
            None | Some(Tok::Newline) => break,
            Some(Tok::Pipe) | Some(Tok::Semi) => {
                let t = cur.next().expect("peeked");
                let (first, words) = std::mem::take(&mut current);
                values.push((first, words.join(" ")));
                if t.tok == Tok::Semi {
                    ranges = true;
                    break;
                }
            }
            Some(Tok::Word(_)) | Some(Tok::Str(_)) => {
                let (t, w) = cur.text("value")?;
                current.0.get_or_insert(t);
                current.1.push(w);
            }
            Some(other) => {
                return Err(cur.error_here(format!("unexpected {} in item", other.describe())))
            }
        }
    }
    if !ranges {
        let (first, words) = current;
        values.push((first, words.join(" ")));
    }
    if values.len() != fields.len() {
        return Err(start.error(format!(
            "item has {} values but the catalog declares {} fields",
            values.len(),
            fields.len()
        )));
    }
    for ((t, v), f) in values.iter().zip(fields) {
        if f.unit.is_some() && !v.is_empty() && v.parse::<f64>().is_err() {
            let t = t.unwrap_or(start);
            return Err(t.error(format!("field {:?} needs a number, found {v:?}", f.name)));
        }
    }
    let mut applicability = Applicability::default();
    if ranges {
        while !at_line_end(cur) {
            let (key_token, key) = cur.text("range")?;
            cur.expect(&Tok::Eq)?;
            match key.as_str() {
                "T" | "P" => {
                    let (vt, v) = cur.text("range")?;
                    let b = bounds(vt, &v)?;
                    if key == "T" {
                        applicability.temperature = Some(b);
                    } else {
                        applicability.pressure = Some(b);
                    }
                }
                "DN" => {
                    let mut set = vec![cur.integer("DN")?.1 as u32];
                    while cur.eat(&Tok::Comma) {
                        set.push(cur.integer("DN")?.1 as u32);
                    }
                    applicability.dn = Some(set);
                }
                _ => return Err(key_token.error(format!("unknown range `{key}`"))),
            }
        }
    }
    cur.end_line()?;
    Ok(CatalogItem {
        values: values.into_iter().map(|(_, v)| v).collect(),
        applicability,
    })
}

fn bounds(t: &Token, text: &str) -> Result<Bounds, SyntaxError> {
    let bad = || t.error(format!("malformed range `{text}`"));
    let num = |s: &str| -> Result<Option<f64>, SyntaxError> {
        if s.is_empty() {
            Ok(None)
        } else {
            s.parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .map(Some)
                .ok_or_else(bad)
        }
    };
    let b = match text.split_once("..") {
        Some((lo, hi)) => Bounds {
            min: num(lo)?,
            max: num(hi)?,
        },
        None => {
            let v = num(text)?.ok_or_else(bad)?;
            Bounds {
                min: Some(v),
                max: Some(v),
            }
        }
    };
    if let (Some(lo), Some(hi)) = (b.min, b.max) {
        if lo > hi {
            return Err(t.error(format!("range `{text}` is reversed")));
        }
    }
    Ok(b)
}

pub fn load_rules(text: &str) -> Result<PropertyRules> {
    let tokens = tokenize(text, true)?;
    let mut cur = Cursor::new(&tokens, text);
    let mut rules = PropertyRules::default();
    let mut seen = HashSet::new();
    loop {
        cur.skip_newlines();
        if cur.at_end() {
            break;
        }
        cur.expect_word("rule")?;
        let (idt, id) = cur.integer("property number")?;
        let id = id as PropertyId;
        if !seen.insert(id) {
            return Err(Error::DuplicateProperty { id, pos: pos(idt) });
        }
        cur.expect(&Tok::Eq)?;
        let (tt, template) = cur.string("rule text")?;
        placeholders(&template).map_err(|m| tt.error(m))?;
        let mut unit = None;
        if cur.is_word("unit") {
            cur.next();
            let (ut, u) = cur.text("unit")?;
            unit = Some(canonical_unit(ut, &u)?);
        }
        cur.end_line()?;
        rules.rules.push(Rule {
            property_id: id,
            template,
            unit,
        });
    }
    Ok(rules)
}

enum Piece<'a> {
    Text(&'a str),
    Field(&'a str),
}

fn placeholders(template: &str) -> std::result::Result<Vec<Piece<'_>>, String> {
    let mut out = Vec::new();
    let mut rest = template;
    while let Some(open) = rest.find('{') {
        if open > 0 {
            out.push(Piece::Text(&rest[..open]));
        }
        let after = &rest[open + 1..];
        let close = after.find('}').ok_or("unclosed `{` in rule")?;
        out.push(Piece::Field(&after[..close]));
        rest = &after[close + 1..];
    }
    if !rest.is_empty() {
        out.push(Piece::Text(rest));
    }
    Ok(out)
}

fn field_value(catalog: &Catalog, item: &CatalogItem, field: usize) -> CellValue {
    let text = &item.values[field];
    match (&catalog.fields[field].unit, text.parse::<f64>()) {
        (Some(u), Ok(v)) => CellValue::number(v, Some(u)),
        _ => CellValue::text(text.clone()),
    }
}

/// Properties produced from one catalog row.
pub fn apply_rules(
    rules: &PropertyRules,
    catalog: &Catalog,
    item: &CatalogItem,
) -> Result<PropertySet> {
    let mut out = PropertySet::new();
    for (i, f) in catalog.fields.iter().enumerate() {
        if let Some(id) = f.property_id {
            if !rules.rules.iter().any(|r| r.property_id == id) {
                out.insert(id, field_value(catalog, item, i));
            }
        }
    }
    for rule in &rules.rules {
        let pieces =
            placeholders(&rule.template).map_err(|reason| Error::InvalidValue { reason })?;
        let mut text = String::new();
        for p in &pieces {
            match p {
                Piece::Text(t) => text.push_str(t),
                Piece::Field(name) => {
                    let i =
                        catalog
                            .field_index(name)
                            .ok_or_else(|| Error::UnresolvedPlaceholder {
                                name: name.to_string(),
                            })?;
                    text.push_str(&item.values[i]);
                }
            }
        }
        let value = match &rule.unit {
            None => CellValue::text(text),
            Some(unit) => {
                let v: f64 = text.trim().parse().map_err(|_| Error::InvalidValue {
                    reason: format!("rule {} yields {text:?}, not a number", rule.property_id),
                })?;
                // A lone placeholder of a measured field converts to the rule unit.
                let v = match pieces.as_slice() {
                    [Piece::Field(name)] => match catalog.fields
                        [catalog.field_index(name).expect("resolved")]
                    .unit
                    .as_deref()
                    {
                        Some(from) => convert(v, from, unit)?,
                        None => v,
                    },
                    _ => v,
                };
                CellValue::number(v, Some(unit))
            }
        };
        out.insert(rule.property_id, value);
    }
    Ok(out)
}

fn constraint_kind(unit: Option<&str>) -> Option<Dimension> {
    let d = UnitRegistry::standard().dimension(unit?).ok()?;
    matches!(
        d,
        Dimension::Pressure | Dimension::Temperature | Dimension::Length
    )
    .then_some(d)
}

/// Constraint values from the source leaves of the subject's record. When a
/// kind has several sources, the one sharing the longest path prefix with the
/// subject wins.
pub fn gather_constraints(table: &TableModule, subject: &CellPath) -> Result<ConstraintSet> {
    table.leaf_at(subject)?;
    let record = &table.records[subject.record];
    let mut best: BTreeMap<Dimension, (usize, f64, String)> = BTreeMap::new();
    for (steps, value) in record.leaf_values() {
        let Some(BlockNode::Leaf(leaf)) = table.template.root.descend(&steps) else {
            continue;
        };
        if leaf.constraint_role != Some(ConstraintRole::Source) {
            continue;
        }
        let Some(kind) = constraint_kind(leaf.unit.as_deref()) else {
            continue;
        };
        let number = match value.numeric {
            Some(v) => Some(v),
            None => value.text.trim().parse::<f64>().ok(),
        };
        let Some(number) = number else { continue };
        let unit = value
            .unit
            .clone()
            .or_else(|| leaf.unit.clone())
            .expect("kind implies a unit");
        let shared = steps
            .iter()
            .zip(&subject.steps)
            .take_while(|(a, b)| a == b)
            .count();
        match best.get(&kind) {
            Some((s, _, _)) if *s >= shared => {}
            _ => {
                best.insert(kind, (shared, number, unit));
            }
        }
    }
    let mut set = ConstraintSet::default();
    for (kind, (_, v, unit)) in best {
        match kind {
            Dimension::Pressure => set.pressure = Some((v, unit)),
            Dimension::Temperature => set.temperature = Some((v, unit)),
            Dimension::Length => set.dn = Some(convert(v, &unit, "мм")?.round() as u32),
            Dimension::Mass => {}
        }
    }
    Ok(set)
}

/// Does one item accept the constraints?
pub fn item_matches(item: &CatalogItem, constraints: &ConstraintSet) -> Result<bool> {
    let a = &item.applicability;
    if let (Some(b), Some((v, u))) = (&a.pressure, &constraints.pressure) {
        if !b.contains(convert(*v, u, PRESSURE_UNIT)?) {
            return Ok(false);
        }
    }
    if let (Some(b), Some((v, u))) = (&a.temperature, &constraints.temperature) {
        if !b.contains(convert(*v, u, TEMPERATURE_UNIT)?) {
            return Ok(false);
        }
    }
    if let (Some(set), Some(dn)) = (&a.dn, constraints.dn) {
        if !set.contains(&dn) {
            return Ok(false);
        }
    }
    Ok(true)
}

pub fn query(
    store: &CatalogStore,
    object_class: &str,
    constraints: &ConstraintSet,
) -> Result<Vec<ItemRef>> {
    let mut known = false;
    let mut out = Vec::new();
    for (c, entry) in store.entries.iter().enumerate() {
        if entry.catalog.object_class != object_class {
            continue;
        }
        known = true;
        for (i, item) in entry.catalog.items.iter().enumerate() {
            if item_matches(item, constraints)? {
                out.push(ItemRef {
                    catalog: c,
                    item: i,
                });
            }
        }
    }
    if !known {
        return Err(Error::UnknownObjectClass(object_class.to_string()));
    }
    Ok(out)
}

/// Writes each property into every leaf of the subtree at `target` bound to
/// it. Returns the properties no leaf accepted.
pub fn fill_cells(
    table: &mut TableModule,
    target: &CellPath,
    properties: &PropertySet,
) -> Result<Vec<PropertyId>> {
    if target.record == 0 {
        return Err(Error::HeaderReadonly);
    }
    let (_, node) = table.node(target)?;
    let mut writes = Vec::new();
    let mut used = HashSet::new();
    for (steps, _) in node.leaf_values() {
        let path = target.join(&steps);
        let Some(leaf) = table
            .template
            .root
            .descend(&path.steps)
            .and_then(BlockNode::as_leaf)
        else {
            continue;
        };
        if let Some(value) = leaf.property_id.and_then(|id| properties.get(&id)) {
            let value = crate::model::coerce_to_leaf(leaf, value.clone())?;
            used.insert(leaf.property_id.expect("matched"));
            writes.push((path, value));
        }
    }
    for (path, value) in writes {
        table.write_leaf(&path, value);
    }
    Ok(properties
        .keys()
        .copied()
        .filter(|id| !used.contains(id))
        .collect())
}

/// The subtree a catalog pick fills: the data row holding the subject.
pub fn fill_target(table: &TableModule, subject: &CellPath) -> CellPath {
    crate::rows::data_rows(table)
        .into_iter()
        .filter(|r| subject.starts_with(&r.path))
        .max_by_key(|r| r.path.steps.len())
        .map(|r| r.path)
        .unwrap_or_else(|| CellPath::new(subject.record, []))
}

/// Readable one-line summary of an item for listings.
pub fn describe_item(catalog: &Catalog, item: &CatalogItem) -> String {
    catalog
        .fields
        .iter()
        .zip(&item.values)
        .map(|(f, v)| match (&f.unit, v.parse::<f64>()) {
            (Some(u), Ok(n)) => format!("{}={} {u}", f.name, format_number(n)),
            _ => format!("{}={v}", f.name),
        })
        .collect::<Vec<_>>()
        .join("; ")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::structure::parse_structure;

    const PIPES: &str = r#"# steel pipes
catalog Трубы
field DN prop=8 unit=мм
field s unit=мм
field gost
field "Масса 1 м" prop=5 unit=кг
item 57 | 3.5 | 10704-91 | 4.62 ; T=-40..425 P=..1.0 DN=50
item 76 | 3.5 | 10704-91 | 6.26 ; P=..2.5 DN=65
item 89 | 4 | 8732-78 | 8.38
"#;

    #[test]
    fn catalog_parses() {
        let c = load_catalog(PIPES).unwrap();
        assert_eq!(c.object_class, "Трубы");
        assert_eq!(c.items.len(), 3);
        assert_eq!(c.value(1, "Масса 1 м"), Some("6.26"));
        assert_eq!(
            c.items[0].applicability.temperature,
            Some(Bounds {
                min: Some(-40.0),
                max: Some(425.0)
            })
        );
        assert_eq!(c.items[2].applicability, Applicability::default());
    }

    #[test]
    fn catalog_errors() {
        let e = load_catalog("catalog X\nfield a\nfield b\nitem 1 | 2 | 3\n").unwrap_err();
        assert_eq!(e.position().map(|p| p.line), Some(4));
        let e = load_catalog("catalog X\nfield a prop=1\nfield b prop=1\n").unwrap_err();
        assert_eq!(e.code(), "duplicate-property");
        let e = load_catalog("catalog X\nfield a unit=furlong\n").unwrap_err();
        assert_eq!(e.code(), "unknown-unit");
        let c = load_catalog("catalog X\nfield a\n").unwrap();
        assert!(c.items.is_empty());
    }

    #[test]
    fn rules_substitute_fields() {
        let c = load_catalog(PIPES).unwrap();
        let rules = load_rules(
            "rule 3 = \"Труба {DN}×{s} ГОСТ {gost}\"\nrule 5 = \"{Масса 1 м}\" unit кг\n",
        )
        .unwrap();
        let props = apply_rules(&rules, &c, &c.items[0]).unwrap();
        assert_eq!(props[&3].text, "Труба 57×3.5 ГОСТ 10704-91");
        assert_eq!(props[&5], CellValue::number(4.62, Some("кг")));
        assert_eq!(props[&8], CellValue::number(57.0, Some("мм")));
        let bad = load_rules("rule 3 = \"{nope}\"\n").unwrap();
        assert_eq!(
            apply_rules(&bad, &c, &c.items[0]).unwrap_err().code(),
            "unresolved-placeholder"
        );
    }

    #[test]
    fn query_filters_inclusively() {
        let mut store = CatalogStore::default();
        store.add(
            "pipes",
            load_catalog(PIPES).unwrap(),
            PropertyRules::default(),
        );
        let refs = |c: &ConstraintSet| -> Vec<usize> {
            query(&store, "Трубы", c)
                .unwrap()
                .iter()
                .map(|r| r.item)
                .collect()
        };
        assert_eq!(refs(&ConstraintSet::default()), vec![0, 1, 2]);
        let p = ConstraintSet {
            pressure: Some((1.6, "МПа".into())),
            ..Default::default()
        };
        assert_eq!(refs(&p), vec![1, 2]);
        let p = ConstraintSet {
            pressure: Some((10.0, "кгс/см²".into())),
            ..Default::default()
        };
        // 10 кгс/см² is 0.980665 МПа
        assert_eq!(refs(&p), vec![0, 1, 2]);
        assert_eq!(
            query(&store, "Фланцы", &p).unwrap_err().code(),
            "unknown-object-class"
        );
    }

    #[test]
    fn constraints_and_filling() {
        let t = parse_structure(
            r#"table "T" cols {
  leaf "P" [width=10, unit="МПа", role=source]
  leaf "T" [width=10, unit="°C", role=source]
  leaf "Наименование" [width=40, prop=3, object="Трубы", role=subject]
  leaf "Масса" [width=10, prop=5, unit="г"]
}"#,
        )
        .unwrap()
        .into_valid()
        .unwrap();
        let mut m = TableModule::new(t).unwrap();
        m.insert_record(0).unwrap();
        let subject = CellPath::new(1, [2]);
        assert!(gather_constraints(&m, &subject).unwrap().is_empty());
        m.set_cell(&CellPath::new(1, [0]), CellValue::number(1.6, Some("МПа")))
            .unwrap();
        m.set_cell(&CellPath::new(1, [1]), CellValue::number(80.0, None))
            .unwrap();
        let set = gather_constraints(&m, &subject).unwrap();
        assert_eq!(set.pressure, Some((1.6, "МПа".into())));
        assert_eq!(set.temperature, Some((80.0, "°C".into())));

        let mut props = PropertySet::new();
        props.insert(3, CellValue::text("Труба"));
        props.insert(5, CellValue::number(4.62, Some("кг")));
        props.insert(7, CellValue::text("x"));
        let ignored = fill_cells(&mut m, &CellPath::new(1, []), &props).unwrap();
        assert_eq!(ignored, vec![7]);
        assert_eq!(
            m.resolve_cell(&CellPath::new(1, [3])).unwrap().numeric,
            Some(4620.0)
        );
        assert_eq!(
            m.resolve_cell(&CellPath::new(1, [0])).unwrap().numeric,
            Some(1.6)
        );
    }
}
