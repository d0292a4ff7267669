//! Value systems and value vectors.
//!
//! A [`ValueSystem`] is data: an ordered list of dimensions, a partition of
//! those dimensions into higher-order groups, and a set of opposing group
//! pairs. Two systems ship embedded (`schwartz-10`, `mft-5`); anything else is
//! loaded from a TOML definition file with the same schema.
//!
//! A [`ValueVector`] is a length-`d` vector over one system, either in label
//! mode (entries in {0, 1}) or score mode (entries in [0, 1]).

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

const SCHWARTZ_10: &str = include_str!("schwartz-10.toml");
const MFT_5: &str = include_str!("mft-5.toml");

/// Names of the embedded value systems.
pub const BUILTIN_SYSTEMS: [&str; 2] = ["schwartz-10", "mft-5"];

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ValuesError {
    #[error("value system mismatch: `{left}` vs `{right}`")]
    SystemMismatch { left: String, right: String },
    #[error("vector mode mismatch")]
    ModeMismatch,
    #[error("empty input")]
    EmptyInput,
    #[error("unknown dimension `{0}`")]
    UnknownDimension(String),
    #[error("unknown value system `{0}`")]
    UnknownSystem(String),
    #[error("invalid value system: {0}")]
    Invalid(String),
    #[error("invalid vector: {0}")]
    InvalidVector(String),
    #[error("failed to read value system: {0}")]
    Io(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dimension {
    pub id: String,
    pub label: String,
    pub definition: String,
    pub group: String,
    /// Phrases the mock personas use to express this dimension.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub lexicon: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct ValueSystemFile {
    name: String,
    #[serde(default = "default_value_noun")]
    value_noun: String,
    groups: Vec<String>,
    #[serde(default)]
    oppositions: Vec<[String; 2]>,
    dimensions: Vec<Dimension>,
}

fn default_value_noun() -> String {
    "value".to_string()
}

/// A validated value system. Immutable after construction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ValueSystemFile", into = "ValueSystemFile")]
pub struct ValueSystem {
    name: String,
    value_noun: String,
    groups: Vec<String>,
    oppositions: BTreeSet<(String, String)>,
    dimensions: Vec<Dimension>,
}

impl TryFrom<ValueSystemFile> for ValueSystem {
    type Error = ValuesError;

    fn try_from(file: ValueSystemFile) -> Result<Self, Self::Error> {
        if file.dimensions.len() < 2 {
            return Err(ValuesError::Invalid(format!(
                "system `{}` needs at least 2 dimensions, found {}",
                file.name,
                file.dimensions.len()
            )));
        }
        let mut seen = BTreeSet::new();
        for dim in &file.dimensions {
            if !seen.insert(dim.id.as_str()) {
                return Err(ValuesError::Invalid(format!("duplicate dimension id `{}`", dim.id)));
            }
            if !file.groups.contains(&dim.group) {
                return Err(ValuesError::Invalid(format!(
                    "dimension `{}` references undeclared group `{}`",
                    dim.id, dim.group
                )));
            }
        }
        let mut oppositions = BTreeSet::new();
        for [a, b] in &file.oppositions {
            for g in [a, b] {
                if !file.groups.contains(g) {
                    return Err(ValuesError::Invalid(format!("opposition references undeclared group `{g}`")));
                }
            }
            if a == b {
                return Err(ValuesError::Invalid(format!("group `{a}` cannot oppose itself")));
            }
            oppositions.insert(ordered_pair(a, b));
        }
        Ok(ValueSystem {
            name: file.name,
            value_noun: file.value_noun,
            groups: file.groups,
            oppositions,
            dimensions: file.dimensions,
        })
    }
}

impl From<ValueSystem> for ValueSystemFile {
    fn from(sys: ValueSystem) -> Self {
        ValueSystemFile {
            name: sys.name,
            value_noun: sys.value_noun,
            groups: sys.groups,
            oppositions: sys.oppositions.into_iter().map(|(a, b)| [a, b]).collect(),
            dimensions: sys.dimensions,
        }
    }
}

fn ordered_pair(a: &str, b: &str) -> (String, String) {
    if a <= b {
        (a.to_string(), b.to_string())
    } else {
        (b.to_string(), a.to_string())
    }
}

impl ValueSystem {
    pub fn builtin(name: &str) -> Result<Self, ValuesError> {
        let src = match name {
            "schwartz-10" | "schwartz" => SCHWARTZ_10,
            "mft-5" | "mft" => MFT_5,
            other => return Err(ValuesError::UnknownSystem(other.to_string())),
        };
        Self::from_toml(src)
    }

    pub fn schwartz() -> Self {
        Self::builtin("schwartz-10").expect("embedded schwartz-10 definition is valid")
    }

    pub fn mft() -> Self {
        Self::builtin("mft-5").expect("embedded mft-5 definition is valid")
    }

    /// The embedded TOML source of a built-in system, verbatim.
    pub fn builtin_source(name: &str) -> Result<&'static str, ValuesError> {
        match name {
            "schwartz-10" | "schwartz" => Ok(SCHWARTZ_10),
            "mft-5" | "mft" => Ok(MFT_5),
            other => Err(ValuesError::UnknownSystem(other.to_string())),
        }
    }

    pub fn from_toml(src: &str) -> Result<Self, ValuesError> {
        let file: ValueSystemFile = toml::from_str(src).map_err(|e| ValuesError::Invalid(e.to_string()))?;
        file.try_into()
    }

    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(&ValueSystemFile::from(self.clone())).expect("value system serializes")
    }

    /// Resolves a built-in name or a path to a definition file.
    pub fn load(name_or_path: &str) -> Result<Self, ValuesError> {
        if BUILTIN_SYSTEMS.contains(&name_or_path) || name_or_path == "schwartz" || name_or_path == "mft" {
            return Self::builtin(name_or_path);
        }
        let path = Path::new(name_or_path);
        let src = fs::read_to_string(path).map_err(|e| ValuesError::Io(format!("{}: {e}", path.display())))?;
        Self::from_toml(&src)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    /// Singular noun used in prompts, e.g. "Schwartz value".
    pub fn value_noun(&self) -> &str {
        &self.value_noun
    }

    pub fn dimensions(&self) -> &[Dimension] {
        &self.dimensions
    }

    pub fn groups(&self) -> &[String] {
        &self.groups
    }

    pub fn oppositions(&self) -> impl Iterator<Item = (&str, &str)> {
        self.oppositions.iter().map(|(a, b)| (a.as_str(), b.as_str()))
    }

    /// Number of dimensions, `d`.
    pub fn len(&self) -> usize {
        self.dimensions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dimensions.is_empty()
    }

    pub fn index_of(&self, dim: &str) -> Result<usize, ValuesError> {
        self.dimensions
            .iter()
            .position(|d| d.id == dim)
            .ok_or_else(|| ValuesError::UnknownDimension(dim.to_string()))
    }

    pub fn dimension(&self, dim: &str) -> Result<&Dimension, ValuesError> {
        self.index_of(dim).map(|i| &self.dimensions[i])
    }

    /// Looks a dimension up by id or by (case-insensitive) label.
    pub fn find(&self, id_or_label: &str) -> Option<usize> {
        self.dimensions
            .iter()
            .position(|d| d.id == id_or_label || d.label.eq_ignore_ascii_case(id_or_label))
    }

    pub fn group_of(&self, dim: &str) -> Result<&str, ValuesError> {
        self.dimension(dim).map(|d| d.group.as_str())
    }

    pub fn opposes(&self, a: &str, b: &str) -> bool {
        self.oppositions.contains(&ordered_pair(a, b))
    }

    /// Dimensions sharing `dim`'s group (excluding `dim`) and dimensions in a
    /// group that opposes `dim`'s group, both in system order.
    pub fn related_dims(&self, dim: &str) -> Result<(Vec<String>, Vec<String>), ValuesError> {
        let group = self.group_of(dim)?;
        let same = self
            .dimensions
            .iter()
            .filter(|d| d.group == group && d.id != dim)
            .map(|d| d.id.clone())
            .collect();
        let opposing = self
            .dimensions
            .iter()
            .filter(|d| self.opposes(group, &d.group))
            .map(|d| d.id.clone())
            .collect();
        Ok((same, opposing))
    }

    /// Dimension definitions as a numbered list, one per line:
    /// `1. Label - definition`.
    pub fn definitions_list(&self) -> String {
        self.dimensions
            .iter()
            .enumerate()
            .map(|(i, d)| format!("{}. {} - {}", i + 1, d.label, d.definition))
            .collect::<Vec<_>>()
            .join("\n")
    }

    /// Lexicon per dimension id, falling back to the lowercased label for
    /// dimensions without phrases.
    pub fn default_lexicon(&self) -> BTreeMap<String, Vec<String>> {
        self.dimensions
            .iter()
            .map(|d| {
                let phrases = if d.lexicon.is_empty() {
                    vec![d.label.to_lowercase()]
                } else {
                    d.lexicon.clone()
                };
                (d.id.clone(), phrases)
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum VectorMode {
    Label,
    Score,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValueVector {
    system: String,
    mode: VectorMode,
    entries: Vec<f64>,
}

impl ValueVector {
    pub fn zeros(system: &ValueSystem) -> Self {
        ValueVector {
            system: system.name.clone(),
            mode: VectorMode::Label,
            entries: vec![0.0; system.len()],
        }
    }

    pub fn from_bits(system: &ValueSystem, bits: &[bool]) -> Result<Self, ValuesError> {
        if bits.len() != system.len() {
            return Err(ValuesError::InvalidVector(format!(
                "expected {} entries, got {}",
                system.len(),
                bits.len()
            )));
        }
        Ok(ValueVector {
            system: system.name.clone(),
            mode: VectorMode::Label,
            entries: bits.iter().map(|&b| if b { 1.0 } else { 0.0 }).collect(),
        })
    }

    /// Label vector with the listed dimension ids set.
    pub fn from_dims(system: &ValueSystem, dims: &[&str]) -> Result<Self, ValuesError> {
        let mut v = Self::zeros(system);
        for dim in dims {
            let i = system.index_of(dim)?;
            v.entries[i] = 1.0;
        }
        Ok(v)
    }

    pub fn scores(system: &ValueSystem, entries: Vec<f64>) -> Result<Self, ValuesError> {
        if entries.len() != system.len() {
            return Err(ValuesError::InvalidVector(format!(
                "expected {} entries, got {}",
                system.len(),
                entries.len()
            )));
        }
        if let Some(bad) = entries.iter().find(|x| !(0.0..=1.0).contains(*x)) {
            return Err(ValuesError::InvalidVector(format!("score {bad} outside [0, 1]")));
        }
        Ok(ValueVector {
            system: system.name.clone(),
            mode: VectorMode::Score,
            entries,
        })
    }

    /// Copy with entry `i` replaced; the value must stay in [0, 1].
    pub fn with_entry(&self, i: usize, value: f64) -> Result<Self, ValuesError> {
        if i >= self.entries.len() || !(0.0..=1.0).contains(&value) {
            return Err(ValuesError::InvalidVector(format!("entry {i} = {value}")));
        }
        let mut out = self.clone();
        out.entries[i] = value;
        Ok(out)
    }

    pub fn system(&self) -> &str {
        &self.system
    }

    pub fn mode(&self) -> VectorMode {
        self.mode
    }

    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, i: usize) -> f64 {
        self.entries[i]
    }

    pub fn bit(&self, i: usize) -> bool {
        self.entries[i] >= 0.5
    }

    pub fn set_bit(&mut self, i: usize, on: bool) {
        debug_assert_eq!(self.mode, VectorMode::Label);
        self.entries[i] = if on { 1.0 } else { 0.0 };
    }

    /// Number of set bits (label mode).
    pub fn count(&self) -> usize {
        self.entries.iter().filter(|&&x| x >= 0.5).count()
    }

    pub fn ones(&self) -> impl Iterator<Item = usize> + '_ {
        self.entries.iter().enumerate().filter(|(_, &x)| x >= 0.5).map(|(i, _)| i)
    }

    pub fn check_compatible(&self, other: &ValueVector) -> Result<(), ValuesError> {
        if self.system != other.system {
            return Err(ValuesError::SystemMismatch {
                left: self.system.clone(),
                right: other.system.clone(),
            });
        }
        if self.mode != other.mode {
            return Err(ValuesError::ModeMismatch);
        }
        Ok(())
    }

    pub fn intersection_count(&self, other: &ValueVector) -> usize {
        self.entries
            .iter()
            .zip(&other.entries)
            .filter(|(a, b)| **a >= 0.5 && **b >= 0.5)
            .count()
    }

    pub fn union_count(&self, other: &ValueVector) -> usize {
        self.entries
            .iter()
            .zip(&other.entries)
            .filter(|(a, b)| **a >= 0.5 || **b >= 0.5)
            .count()
    }
}

/// Elementwise logical OR of label vectors: the union of expressed values.
pub fn or_aggregate<'a, I>(vectors: I) -> Result<ValueVector, ValuesError>
where
    I: IntoIterator<Item = &'a ValueVector>,
{
    let mut iter = vectors.into_iter();
    let first = iter.next().ok_or(ValuesError::EmptyInput)?;
    if first.mode != VectorMode::Label {
        return Err(ValuesError::ModeMismatch);
    }
    let mut out = first.clone();
    for v in iter {
        out.check_compatible(v)?;
        for (o, x) in out.entries.iter_mut().zip(&v.entries) {
            if *x >= 0.5 {
                *o = 1.0;
            }
        }
    }
    Ok(out)
}

pub fn l1_distance(a: &ValueVector, b: &ValueVector) -> Result<f64, ValuesError> {
    a.check_compatible(b)?;
    Ok(a.entries.iter().zip(&b.entries).map(|(x, y)| (x - y).abs()).sum())
}

/// Per-model orientation: one percentage in [0, 100] per dimension.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrientationProfile {
    pub model: String,
    pub scores: Vec<f64>,
}

#[cfg(test)]
mod tests {
    use super::*;

    fn four_dim() -> ValueSystem {
        ValueSystem::from_toml(
            r#"
            name = "toy"
            groups = ["A", "B"]
            oppositions = [["A", "B"]]
            [[dimensions]]
            id = "d1"
            label = "One"
            definition = "first"
            group = "A"
            [[dimensions]]
            id = "d2"
            label = "Two"
            definition = "second"
            group = "A"
            [[dimensions]]
            id = "d3"
            label = "Three"
            definition = "third"
            group = "B"
            [[dimensions]]
            id = "d4"
            label = "Four"
            definition = "fourth"
            group = "B"
            "#,
        )
        .unwrap()
    }

    #[test]
    fn builtins_have_expected_sizes() {
        assert_eq!(ValueSystem::schwartz().len(), 10);
        assert_eq!(ValueSystem::mft().len(), 5);
    }

    #[test]
    fn builtin_roundtrips_through_toml() {
        for name in BUILTIN_SYSTEMS {
            let sys = ValueSystem::builtin(name).unwrap();
            let back = ValueSystem::from_toml(&sys.to_toml()).unwrap();
            assert_eq!(sys, back);
        }
    }

    #[test]
    fn or_aggregate_examples() {
        let s = ValueSystem::schwartz();
        let a = ValueVector::from_dims(&s, &["self_direction"]).unwrap();
        let b = ValueVector::from_dims(&s, &["stimulation"]).unwrap();
        let out = or_aggregate([&a, &b]).unwrap();
        assert_eq!(out, ValueVector::from_dims(&s, &["self_direction", "stimulation"]).unwrap());

        let z = ValueVector::zeros(&s);
        assert_eq!(or_aggregate([&z]).unwrap(), z);

        let v1 = ValueVector::from_dims(&s, &["self_direction", "stimulation"]).unwrap();
        let v2 = ValueVector::from_dims(&s, &["self_direction"]).unwrap();
        let v3 = ValueVector::from_dims(&s, &["hedonism"]).unwrap();
        let out = or_aggregate([&v1, &v2, &v3]).unwrap();
        assert_eq!(out.entries()[..4], [1.0, 1.0, 1.0, 0.0]);
        assert_eq!(out.count(), 3);
    }

    #[test]
    fn or_aggregate_errors() {
        let s = ValueSystem::schwartz();
        let m = ValueSystem::mft();
        assert_eq!(or_aggregate(std::iter::empty()), Err(ValuesError::EmptyInput));
        let err = or_aggregate([&ValueVector::zeros(&s), &ValueVector::zeros(&m)]).unwrap_err();
        assert!(matches!(err, ValuesError::SystemMismatch { .. }));
    }

    #[test]
    fn l1_examples() {
        let s = ValueSystem::schwartz();
        let a = ValueVector::from_dims(&s, &["self_direction", "stimulation"]).unwrap();
        assert_eq!(l1_distance(&a, &a).unwrap(), 0.0);
        let b = ValueVector::from_dims(&s, &["self_direction"]).unwrap();
        assert_eq!(l1_distance(&a, &b).unwrap(), 1.0);
        let c = ValueVector::from_dims(&s, &["self_direction", "hedonism"]).unwrap();
        let d = ValueVector::from_dims(&s, &["stimulation", "achievement"]).unwrap();
        assert_eq!(l1_distance(&c, &d).unwrap(), 4.0);
        let m = ValueVector::zeros(&ValueSystem::mft());
        assert!(l1_distance(&a, &m).is_err());
    }

    #[test]
    fn related_dims_examples() {
        let s = ValueSystem::schwartz();
        let (same, opposing) = s.related_dims("tradition").unwrap();
        assert!(same.contains(&"security".to_string()));
        assert!(opposing.contains(&"self_direction".to_string()));

        let toy = four_dim();
        let (same, opposing) = toy.related_dims("d1").unwrap();
        assert_eq!(same, vec!["d2"]);
        assert_eq!(opposing, vec!["d3", "d4"]);

        let single = ValueSystem::from_toml(
            r#"
            name = "flat"
            groups = ["g"]
            [[dimensions]]
            id = "a"
            label = "A"
            definition = ""
            group = "g"
            [[dimensions]]
            id = "b"
            label = "B"
            definition = ""
            group = "g"
            "#,
        )
        .unwrap();
        let (same, opposing) = single.related_dims("a").unwrap();
        assert_eq!(same, vec!["b"]);
        assert!(opposing.is_empty());

        assert_eq!(
            toy.related_dims("nope"),
            Err(ValuesError::UnknownDimension("nope".into()))
        );
    }

    #[test]
    fn invalid_systems_rejected() {
        let dup = r#"
            name = "x"
            groups = ["g"]
            [[dimensions]]
            id = "a"
            label = "A"
            definition = ""
            group = "g"
            [[dimensions]]
            id = "a"
            label = "B"
            definition = ""
            group = "g"
        "#;
        assert!(ValueSystem::from_toml(dup).is_err());
        let self_opp = r#"
            name = "x"
            groups = ["g"]
            oppositions = [["g", "g"]]
            [[dimensions]]
            id = "a"
            label = "A"
            definition = ""
            group = "g"
            [[dimensions]]
            id = "b"
            label = "B"
            definition = ""
            group = "g"
        "#;
        assert!(ValueSystem::from_toml(self_opp).is_err());
        let one_dim = r#"
            name = "x"
            groups = ["g"]
            [[dimensions]]
            id = "a"
            label = "A"
            definition = ""
            group = "g"
        "#;
        assert!(ValueSystem::from_toml(one_dim).is_err());
        let bad_group = r#"
            name = "x"
            groups = ["g"]
            [[dimensions]]
            id = "a"
            label = "A"
            definition = ""
            group = "h"
            [[dimensions]]
            id = "b"
            label = "B"
            definition = ""
            group = "g"
        "#;
        assert!(ValueSystem::from_toml(bad_group).is_err());
    }

    #[test]
    fn lexicons_do_not_overlap() {
        // the mock judge relies on substring containment, so no phrase may
        // contain another dimension's phrase
        for sys in [ValueSystem::schwartz(), ValueSystem::mft()] {
            let lex = sys.default_lexicon();
            for (da, pa) in &lex {
                for (db, pb) in &lex {
                    if da == db {
                        continue;
                    }
                    for a in pa {
                        for b in pb {
                            assert!(!a.contains(b.as_str()), "{a} contains {b}");
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn score_vector_bounds() {
        let s = ValueSystem::mft();
        assert!(ValueVector::scores(&s, vec![0.0, 0.5, 1.0, 0.2, 0.3]).is_ok());
        assert!(ValueVector::scores(&s, vec![0.0, 1.5, 1.0, 0.2, 0.3]).is_err());
        assert!(ValueVector::scores(&s, vec![0.0]).is_err());
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn bits() -> impl Strategy<Value = Vec<bool>> {
            proptest::collection::vec(any::<bool>(), 10)
        }

        proptest! {
            #[test]
            fn or_is_idempotent_commutative_associative(a in bits(), b in bits(), c in bits()) {
                let s = ValueSystem::schwartz();
                let (a, b, c) = (
                    ValueVector::from_bits(&s, &a).unwrap(),
                    ValueVector::from_bits(&s, &b).unwrap(),
                    ValueVector::from_bits(&s, &c).unwrap(),
                );
                prop_assert_eq!(or_aggregate([&a, &a]).unwrap(), a.clone());
                prop_assert_eq!(or_aggregate([&a]).unwrap(), a.clone());
                prop_assert_eq!(or_aggregate([&a, &b]).unwrap(), or_aggregate([&b, &a]).unwrap());
                let ab = or_aggregate([&a, &b]).unwrap();
                let bc = or_aggregate([&b, &c]).unwrap();
                prop_assert_eq!(or_aggregate([&ab, &c]).unwrap(), or_aggregate([&a, &bc]).unwrap());
            }

            #[test]
            fn l1_is_metric_and_hamming(a in bits(), b in bits(), c in bits()) {
                let s = ValueSystem::schwartz();
                let hamming = a.iter().zip(&b).filter(|(x, y)| x != y).count() as f64;
                let (va, vb, vc) = (
                    ValueVector::from_bits(&s, &a).unwrap(),
                    ValueVector::from_bits(&s, &b).unwrap(),
                    ValueVector::from_bits(&s, &c).unwrap(),
                );
                let ab = l1_distance(&va, &vb).unwrap();
                prop_assert_eq!(ab, hamming);
                prop_assert_eq!(ab, l1_distance(&vb, &va).unwrap());
                prop_assert_eq!(ab == 0.0, a == b);
                prop_assert!(ab <= l1_distance(&va, &vc).unwrap() + l1_distance(&vc, &vb).unwrap());
            }

            #[test]
            fn l1_metric_on_scores(a in proptest::collection::vec(0.0f64..=1.0, 5),
                                   b in proptest::collection::vec(0.0f64..=1.0, 5),
                                   c in proptest::collection::vec(0.0f64..=1.0, 5)) {
                let s = ValueSystem::mft();
                let va = ValueVector::scores(&s, a).unwrap();
                let vb = ValueVector::scores(&s, b).unwrap();
                let vc = ValueVector::scores(&s, c).unwrap();
                let ab = l1_distance(&va, &vb).unwrap();
                prop_assert!((ab - l1_distance(&vb, &va).unwrap()).abs() < 1e-12);
                prop_assert!(ab <= l1_distance(&va, &vc).unwrap() + l1_distance(&vc, &vb).unwrap() + 1e-12);
            }
        }
    }
}
