//! Units of measure attached to cells and catalog fields.
//!
//! Every unit belongs to one dimension and converts to that dimension's base
//! unit by `value * factor + offset`. Only temperature units carry an offset.

use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Dimension {
    /// Base unit: Па.
    Pressure,
    /// Base unit: °C.
    Temperature,
    /// Base unit: мм.
    Length,
    /// Base unit: кг.
    Mass,
}

impl Dimension {
    pub fn name(self) -> &'static str {
        match self {
            Dimension::Pressure => "pressure",
            Dimension::Temperature => "temperature",
            Dimension::Length => "length",
            Dimension::Mass => "mass",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct UnitDef {
    pub symbol: String,
    pub dimension: Dimension,
    pub factor: f64,
    pub offset: f64,
}

impl UnitDef {
    pub fn to_base(&self, value: f64) -> f64 {
        value * self.factor + self.offset
    }

    pub fn from_base(&self, value: f64) -> f64 {
        (value - self.offset) / self.factor
    }
}

#[derive(Debug, Clone, Default)]
pub struct UnitRegistry {
    units: Vec<UnitDef>,
    aliases: Vec<(String, usize)>,
}

impl UnitRegistry {
    pub fn new() -> Self {
        Self::default()
    }

    /// The registry used by the file formats and by cell validation.
    pub fn standard() -> &'static UnitRegistry {
        static STANDARD: OnceLock<UnitRegistry> = OnceLock::new();
        STANDARD.get_or_init(|| {
            use Dimension::*;
            let mut r = UnitRegistry::new();
            r.register("Па", Pressure, 1.0, 0.0, &["Pa"]);
            r.register("кПа", Pressure, 1e3, 0.0, &["kPa"]);
            r.register("МПа", Pressure, 1e6, 0.0, &["MPa"]);
            r.register("бар", Pressure, 1e5, 0.0, &["bar"]);
            r.register("атм", Pressure, 101_325.0, 0.0, &["atm"]);
            // 1 kgf/cm² = 98 066.5 Pa, 1 m H2O = 9 806.65 Pa (standard gravity).
            r.register("кгс/см²", Pressure, 98_066.5, 0.0, &["кгс/см2", "kgf/cm2"]);
            r.register("м вод.ст.", Pressure, 9_806.65, 0.0, &["mH2O"]);
            r.register("мм вод.ст.", Pressure, 9.806_65, 0.0, &["mmH2O"]);
            r.register("мм рт.ст.", Pressure, 133.322_387_415, 0.0, &["mmHg"]);
            r.register("°C", Temperature, 1.0, 0.0, &["C", "degC"]);
            r.register("K", Temperature, 1.0, -273.15, &["К"]);
            r.register("°F", Temperature, 5.0 / 9.0, -160.0 / 9.0, &["F", "degF"]);
            r.register("мм", Length, 1.0, 0.0, &["mm"]);
            r.register("см", Length, 10.0, 0.0, &["cm"]);
            r.register("м", Length, 1000.0, 0.0, &["m"]);
            r.register("кг", Mass, 1.0, 0.0, &["kg"]);
            r.register("г", Mass, 1e-3, 0.0, &["g"]);
            r.register("т", Mass, 1e3, 0.0, &["t"]);
            r
        })
    }

    pub fn register(
        &mut self,
        symbol: &str,
        dimension: Dimension,
        factor: f64,
        offset: f64,
        aliases: &[&str],
    ) {
        let index = self.units.len();
        self.units.push(UnitDef {
            symbol: symbol.to_string(),
            dimension,
            factor,
            offset,
        });
        self.aliases.push((symbol.to_string(), index));
        for alias in aliases {
            self.aliases.push((alias.to_string(), index));
        }
    }

    pub fn lookup(&self, symbol: &str) -> Option<&UnitDef> {
        self.aliases
            .iter()
            .find(|(name, _)| name == symbol)
            .map(|&(_, i)| &self.units[i])
    }

    /// Canonical symbol for a symbol or alias.
    pub fn canonical(&self, symbol: &str) -> Option<&str> {
        self.lookup(symbol).map(|u| u.symbol.as_str())
    }

    pub fn dimension(&self, symbol: &str) -> Result<Dimension> {
        self.lookup(symbol)
            .map(|u| u.dimension)
            .ok_or_else(|| unknown(symbol))
    }

    pub fn symbols(&self) -> impl Iterator<Item = &str> {
        self.units.iter().map(|u| u.symbol.as_str())
    }

    pub fn convert(&self, value: f64, from: &str, to: &str) -> Result<f64> {
        let a = self.lookup(from).ok_or_else(|| unknown(from))?;
        let b = self.lookup(to).ok_or_else(|| unknown(to))?;
        if a.dimension != b.dimension {
            return Err(Error::DimensionMismatch {
                from: a.symbol.clone(),
                to: b.symbol.clone(),
            });
        }
        if a.symbol == b.symbol {
            return Ok(value);
        }
        Ok(b.from_base(a.to_base(value)))
    }

    pub fn to_base(&self, value: f64, unit: &str) -> Result<(f64, Dimension)> {
        let u = self.lookup(unit).ok_or_else(|| unknown(unit))?;
        Ok((u.to_base(value), u.dimension))
    }
}

fn unknown(symbol: &str) -> Error {
    Error::UnknownUnit {
        unit: symbol.to_string(),
        pos: None,
    }
}

/// Converts with the standard registry.
pub fn convert(value: f64, from: &str, to: &str) -> Result<f64> {
    UnitRegistry::standard().convert(value, from, to)
}

/// Parses a quantity such as `1.6МПа`, `80C` or `10 м вод.ст.`.
pub fn parse_quantity(text: &str) -> Result<(f64, String)> {
    let text = text.trim();
    let split = text
        .char_indices()
        .find(|&(i, c)| {
            !(c.is_ascii_digit()
                || c == '.'
                || ((c == '-' || c == '+') && i == 0)
                || ((c == 'e' || c == 'E')
                    && i > 0
                    && text[i + 1..].starts_with(|d: char| d.is_ascii_digit() || d == '-')))
        })
        .map(|(i, _)| i)
        .unwrap_or(text.len());
    let (number, unit) = text.split_at(split);
    let value: f64 = number.parse().map_err(|_| Error::InvalidValue {
        reason: format!("{text:?} is not a quantity"),
    })?;
    let unit = unit.trim();
    let canonical = UnitRegistry::standard()
        .canonical(unit)
        .ok_or_else(|| unknown(unit))?;
    Ok((value, canonical.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs()
    }

    #[test]
    fn kgf_and_water_column_to_mpa() {
        assert!(rel(convert(1.0, "кгс/см²", "МПа").unwrap(), 0.0980665) < 1e-12);
        assert!(rel(convert(10.0, "м вод.ст.", "МПа").unwrap(), 0.0980665) < 1e-12);
    }

    #[test]
    fn temperature_is_affine() {
        assert!((convert(0.0, "K", "°C").unwrap() + 273.15).abs() < 1e-12);
        assert!((convert(212.0, "°F", "°C").unwrap() - 100.0).abs() < 1e-9);
    }

    #[test]
    fn cross_dimension_is_rejected() {
        let err = convert(1.0, "кг", "МПа").unwrap_err();
        assert_eq!(err.code(), "dimension-mismatch");
        assert_eq!(
            convert(1.0, "furlong", "м").unwrap_err().code(),
            "unknown-unit"
        );
    }

    #[test]
    fn aliases_resolve_to_canonical() {
        let r = UnitRegistry::standard();
        assert_eq!(r.canonical("C"), Some("°C"));
        assert_eq!(r.canonical("кгс/см2"), Some("кгс/см²"));
        assert_eq!(r.canonical("bogus"), None);
    }

    #[test]
    fn quantities_parse_with_glued_units() {
        assert_eq!(parse_quantity("1.6МПа").unwrap(), (1.6, "МПа".to_string()));
        assert_eq!(parse_quantity("80C").unwrap(), (80.0, "°C".to_string()));
        assert_eq!(parse_quantity("-40 °C").unwrap(), (-40.0, "°C".to_string()));
        assert_eq!(
            parse_quantity("10 м вод.ст.").unwrap(),
            (10.0, "м вод.ст.".to_string())
        );
        assert!(parse_quantity("МПа").is_err());
    }
}
