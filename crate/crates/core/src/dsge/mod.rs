//! Dynamic structured grammatical evolution: genotypes, mapping and variation.

mod mapper;
mod operators;

use std::collections::BTreeMap;
use std::fmt;

use rand::Rng;
use serde::de::{self, Deserializer};
use serde::ser::{SerializeTuple, Serializer};
use serde::{Deserialize, Serialize};

use crate::grammar::Symbol;

pub use mapper::{map, random_genotype, MapError};
pub use operators::{crossover, crossover_with_mask, mutate};

/// Default derivation depth bound.
pub const DEFAULT_MAX_DEPTH: usize = 17;

/// A stored random number together with its type and inclusive range.
///
/// Serialized as the quadruple `[type, min, max, value]` with type `"int"` or
/// `"float"`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RandValue {
    Int { min: i64, max: i64, value: i64 },
    Float { min: f64, max: f64, value: f64 },
}

impl RandValue {
    /// Draws a fresh value for a `RANDINT`/`RANDFLOAT` symbol. Returns `None`
    /// for any other symbol.
    pub fn sample<R: Rng + ?Sized>(symbol: &Symbol, rng: &mut R) -> Option<Self> {
        match *symbol {
            Symbol::RandInt { lo, hi, .. } => {
                Some(RandValue::Int { min: lo, max: hi, value: rng.random_range(lo..=hi) })
            }
            Symbol::RandFloat { lo, hi, .. } => {
                Some(RandValue::Float { min: lo, max: hi, value: sample_float(lo, hi, rng) })
            }
            _ => None,
        }
    }

    /// Same type and bounds, new value drawn uniformly from the range.
    pub fn resample<R: Rng + ?Sized>(&self, rng: &mut R) -> Self {
        match *self {
            RandValue::Int { min, max, .. } => RandValue::Int { min, max, value: rng.random_range(min..=max) },
            RandValue::Float { min, max, .. } => RandValue::Float { min, max, value: sample_float(min, max, rng) },
        }
    }

    pub fn is_int(&self) -> bool {
        matches!(self, RandValue::Int { .. })
    }

    pub fn in_bounds(&self) -> bool {
        match *self {
            RandValue::Int { min, max, value } => min <= value && value <= max,
            RandValue::Float { min, max, value } => min <= value && value <= max,
        }
    }

    /// True when this tuple was drawn for `symbol` (same type and bounds).
    pub fn fits(&self, symbol: &Symbol) -> bool {
        match (*self, symbol) {
            (RandValue::Int { min, max, .. }, Symbol::RandInt { lo, hi, .. }) => min == *lo && max == *hi,
            (RandValue::Float { min, max, .. }, Symbol::RandFloat { lo, hi, .. }) => min == *lo && max == *hi,
            _ => false,
        }
    }

    /// Text of the value as it appears in a phenotype.
    pub fn render_value(&self) -> String {
        match *self {
            RandValue::Int { value, .. } => value.to_string(),
            RandValue::Float { value, .. } => format!("{value:?}"),
        }
    }
}

fn sample_float<R: Rng + ?Sized>(lo: f64, hi: f64, rng: &mut R) -> f64 {
    if lo == hi {
        lo
    } else {
        rng.random_range(lo..=hi)
    }
}

impl Serialize for RandValue {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let mut t = serializer.serialize_tuple(4)?;
        match *self {
            RandValue::Int { min, max, value } => {
                t.serialize_element("int")?;
                t.serialize_element(&min)?;
                t.serialize_element(&max)?;
                t.serialize_element(&value)?;
            }
            RandValue::Float { min, max, value } => {
                t.serialize_element("float")?;
                t.serialize_element(&min)?;
                t.serialize_element(&max)?;
                t.serialize_element(&value)?;
            }
        }
        t.end()
    }
}

impl<'de> Deserialize<'de> for RandValue {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let (kind, min, max, value): (String, serde_json::Number, serde_json::Number, serde_json::Number) =
            Deserialize::deserialize(deserializer)?;
        let rv = match kind.as_str() {
            "int" => {
                let int = |n: &serde_json::Number| {
                    n.as_i64().ok_or_else(|| de::Error::custom(format!("{n} is not an integer")))
                };
                RandValue::Int { min: int(&min)?, max: int(&max)?, value: int(&value)? }
            }
            "float" => {
                let float =
                    |n: &serde_json::Number| n.as_f64().ok_or_else(|| de::Error::custom(format!("{n} is not a float")));
                RandValue::Float { min: float(&min)?, max: float(&max)?, value: float(&value)? }
            }
            other => return Err(de::Error::custom(format!("unknown random value type {other:?}"))),
        };
        if !rv.in_bounds() {
            return Err(de::Error::custom("random value outside its range"));
        }
        Ok(rv)
    }
}

/// Per-nonterminal codon lists plus the random-value tuples consumed, in
/// order, by the productions of each nonterminal.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Genotype {
    pub codons: BTreeMap<String, Vec<usize>>,
    #[serde(default)]
    pub rand_values: BTreeMap<String, Vec<RandValue>>,
}

impl Genotype {
    pub fn new() -> Self {
        Self::default()
    }

    /// Builder-style helper mostly useful in tests and examples.
    pub fn with_codons(mut self, nonterminal: &str, codons: impl IntoIterator<Item = usize>) -> Self {
        self.codons.insert(nonterminal.to_string(), codons.into_iter().collect());
        self
    }

    pub fn with_rand_values(mut self, nonterminal: &str, values: impl IntoIterator<Item = RandValue>) -> Self {
        self.rand_values.insert(nonterminal.to_string(), values.into_iter().collect());
        self
    }

    pub fn codon_count(&self) -> usize {
        self.codons.values().map(Vec::len).sum()
    }

    pub fn rand_value_count(&self) -> usize {
        self.rand_values.values().map(Vec::len).sum()
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("genotype serializes")
    }
}

/// The terminal token stream of a derivation.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct Phenotype {
    tokens: Vec<String>,
}

impl Phenotype {
    pub fn new(tokens: Vec<String>) -> Self {
        Self { tokens }
    }

    /// Splits phenotype text on whitespace.
    pub fn parse(text: &str) -> Self {
        Self { tokens: text.split_whitespace().map(str::to_string).collect() }
    }

    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }

    pub fn text(&self) -> String {
        self.tokens.join(" ")
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }
}

impl fmt::Display for Phenotype {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.text())
    }
}

impl Serialize for Phenotype {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.text())
    }
}

impl<'de> Deserialize<'de> for Phenotype {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let text = String::deserialize(deserializer)?;
        Ok(Phenotype::parse(&text))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn genotype_json_shape() {
        let geno = Genotype::new().with_codons("s", [0, 1]).with_rand_values(
            "r",
            [RandValue::Float { min: 1.0, max: 30.0, value: 5.2 }, RandValue::Int { min: 5, max: 100, value: 7 }],
        );
        let json = serde_json::to_string(&geno).unwrap();
        assert_eq!(json, r#"{"codons":{"s":[0,1]},"rand_values":{"r":[["float",1.0,30.0,5.2],["int",5,100,7]]}}"#);
        let back: Genotype = serde_json::from_str(&json).unwrap();
        assert_eq!(back, geno);
    }

    #[test]
    fn out_of_range_tuple_rejected() {
        let bad = r#"{"codons":{},"rand_values":{"r":[["int",5,100,700]]}}"#;
        assert!(serde_json::from_str::<Genotype>(bad).is_err());
        let bad_type = r#"{"codons":{},"rand_values":{"r":[["int",5,100,7.5]]}}"#;
        assert!(serde_json::from_str::<Genotype>(bad_type).is_err());
    }

    #[test]
    fn resample_keeps_type_and_bounds() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let rv = RandValue::Float { min: 1.0, max: 30.0, value: 5.2 };
        for _ in 0..1000 {
            let next = rv.resample(&mut rng);
            let RandValue::Float { min, max, value } = next else { panic!("type changed") };
            assert_eq!((min, max), (1.0, 30.0));
            assert!((1.0..=30.0).contains(&value));
        }
    }

    #[test]
    fn phenotype_text_round_trip() {
        let p = Phenotype::parse("classifier:knn  n_neighbors:5");
        assert_eq!(p.tokens().len(), 2);
        assert_eq!(p.text(), "classifier:knn n_neighbors:5");
    }
}
