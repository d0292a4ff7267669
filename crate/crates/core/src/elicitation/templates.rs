//! Named-placeholder prompt templates.
//!
//! Placeholders are `{name}` with `name` made of lowercase ASCII letters,
//! digits and underscores. Any other brace is literal text; `{{` and `}}`
//! render as single braces.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::ElicitError;

pub const OPINION: &str = "listing1_opinion";
pub const JUDGE: &str = "listing4_judge";
pub const EXPLORE: &str = "listing5_cot_explore";
pub const QUESTION: &str = "listing6_question_from_cot";
pub const REFLECT: &str = "listing7_reflect";
pub const REFINE: &str = "listing8_refine";

pub const TEMPLATE_NAMES: [&str; 6] = [OPINION, JUDGE, EXPLORE, QUESTION, REFLECT, REFINE];

const DEFAULTS: [(&str, &str); 6] = [
    (OPINION, include_str!("templates/listing1_opinion.txt")),
    (JUDGE, include_str!("templates/listing4_judge.txt")),
    (EXPLORE, include_str!("templates/listing5_cot_explore.txt")),
    (QUESTION, include_str!("templates/listing6_question_from_cot.txt")),
    (REFLECT, include_str!("templates/listing7_reflect.txt")),
    (REFINE, include_str!("templates/listing8_refine.txt")),
];

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PromptTemplate {
    pub name: String,
    pub body: String,
}

enum Piece<'a> {
    Text(&'a str),
    Slot(&'a str),
}

fn is_slot_name(s: &str) -> bool {
    !s.is_empty() && s.bytes().all(|b| b.is_ascii_lowercase() || b.is_ascii_digit() || b == b'_')
}

fn pieces(body: &str) -> Vec<Piece<'_>> {
    let mut out = Vec::new();
    let mut rest = body;
    while !rest.is_empty() {
        if let Some(r) = rest.strip_prefix("{{") {
            out.push(Piece::Text("{"));
            rest = r;
            continue;
        }
        if let Some(r) = rest.strip_prefix("}}") {
            out.push(Piece::Text("}"));
            rest = r;
            continue;
        }
        if rest.starts_with('{') {
            if let Some(end) = rest.find('}') {
                let name = &rest[1..end];
                if is_slot_name(name) {
                    out.push(Piece::Slot(name));
                    rest = &rest[end + 1..];
                    continue;
                }
            }
        }
        let first = rest.chars().next().map_or(1, char::len_utf8);
        let next = rest[first..].find(['{', '}']).map(|i| i + first).unwrap_or(rest.len());
        out.push(Piece::Text(&rest[..next]));
        rest = &rest[next..];
    }
    out
}

impl PromptTemplate {
    pub fn new(name: &str, body: &str) -> Self {
        PromptTemplate { name: name.to_string(), body: body.to_string() }
    }

    /// Placeholder names in order of first appearance.
    pub fn placeholders(&self) -> Vec<&str> {
        let mut seen: Vec<&str> = Vec::new();
        for p in pieces(&self.body) {
            if let Piece::Slot(n) = p {
                if !seen.contains(&n) {
                    seen.push(n);
                }
            }
        }
        seen
    }

    pub fn render(&self, bindings: &BTreeMap<String, String>) -> Result<String, ElicitError> {
        let mut out = String::with_capacity(self.body.len());
        for p in pieces(&self.body) {
            match p {
                Piece::Text(t) => out.push_str(t),
                Piece::Slot(n) => out.push_str(bindings.get(n).ok_or_else(|| ElicitError::MissingBinding {
                    template: self.name.clone(),
                    name: n.to_string(),
                })?),
            }
        }
        Ok(out)
    }
}

/// The six prompts the pipeline issues.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Templates {
    by_name: BTreeMap<String, PromptTemplate>,
}

impl Default for Templates {
    fn default() -> Self {
        Self::builtin()
    }
}

impl Templates {
    pub fn builtin() -> Self {
        Templates { by_name: DEFAULTS.iter().map(|(n, b)| (n.to_string(), PromptTemplate::new(n, b))).collect() }
    }

    /// Built-ins overridden by `<dir>/<name>.txt` (or `<dir>/<name>`) where
    /// present.
    pub fn load_dir(dir: impl AsRef<Path>) -> Result<Self, ElicitError> {
        let dir = dir.as_ref();
        let mut t = Self::builtin();
        for name in TEMPLATE_NAMES {
            for candidate in [dir.join(format!("{name}.txt")), dir.join(name)] {
                if candidate.is_file() {
                    let body = fs::read_to_string(&candidate)
                        .map_err(|e| ElicitError::Io(format!("{}: {e}", candidate.display())))?;
                    t.by_name.insert(name.to_string(), PromptTemplate::new(name, &body));
                    break;
                }
            }
        }
        Ok(t)
    }

    /// Writes every template to `<dir>/<name>.txt`.
    pub fn export(&self, dir: impl AsRef<Path>) -> Result<(), ElicitError> {
        let dir = dir.as_ref();
        fs::create_dir_all(dir).map_err(|e| ElicitError::Io(e.to_string()))?;
        for t in self.by_name.values() {
            fs::write(dir.join(format!("{}.txt", t.name)), &t.body).map_err(|e| ElicitError::Io(e.to_string()))?;
        }
        Ok(())
    }

    pub fn get(&self, name: &str) -> &PromptTemplate {
        &self.by_name[name]
    }

    pub fn set(&mut self, template: PromptTemplate) {
        self.by_name.insert(template.name.clone(), template);
    }
}

pub fn bindings<'a>(pairs: impl IntoIterator<Item = (&'a str, String)>) -> BTreeMap<String, String> {
    pairs.into_iter().map(|(k, v)| (k.to_string(), v)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn opinion_prompt_mentions_points() {
        let t = Templates::builtin();
        let b = bindings([
            ("target_question", "Should cities ban cars?".to_string()),
            ("points_num", "3".to_string()),
            ("length_num", "250".to_string()),
        ]);
        let s = t.get(OPINION).render(&b).unwrap();
        assert!(s.contains("list your 3 key points"));
        assert!(s.contains("in 250 words"));
        assert!(!s.contains('{'));
    }

    #[test]
    fn no_placeholders_is_identity() {
        let t = PromptTemplate::new("x", "plain <text: here> and {Not A Slot}");
        assert_eq!(t.render(&BTreeMap::new()).unwrap(), t.body);
        assert!(t.placeholders().is_empty());
    }

    #[test]
    fn missing_binding_is_named() {
        let t = Templates::builtin();
        let err = t.get(OPINION).render(&bindings([("points_num", "3".into())])).unwrap_err();
        assert!(err.to_string().contains("target_question"), "{err}");
    }

    #[test]
    fn escaped_braces() {
        let t = PromptTemplate::new("x", "{{a}} {b}");
        assert_eq!(t.render(&bindings([("b", "B".into())])).unwrap(), "{a} B");
    }

    #[test]
    fn builtin_placeholders() {
        let t = Templates::builtin();
        assert_eq!(t.get(OPINION).placeholders(), ["target_question", "points_num", "length_num"]);
        assert_eq!(t.get(JUDGE).placeholders(), ["value_noun", "value_definitions", "text", "value"]);
        assert_eq!(t.get(EXPLORE).placeholders(), ["general_argument", "specific_arguments"]);
        assert!(t.get(QUESTION).placeholders().is_empty());
        assert_eq!(t.get(REFLECT).placeholders(), ["input_information"]);
        assert!(t.get(REFINE).placeholders().is_empty());
    }

    #[test]
    fn judge_prompt_renders_schwartz_definitions() {
        let sys = crate::values::ValueSystem::schwartz();
        let s = Templates::builtin()
            .get(JUDGE)
            .render(&bindings([
                ("value_noun", sys.value_noun().to_string()),
                ("value_definitions", sys.definitions_list()),
                ("text", "t".into()),
                ("value", "Power".into()),
            ]))
            .unwrap();
        assert!(s.starts_with("For the following task, you can reference the following list of Schwartz values"));
        assert!(s.contains("\n10. Universalism - "));
        assert!(s.contains("whether a text reflects a specific Schwartz value."));
        assert!(s.ends_with("### [Label]: "));
    }

    #[test]
    fn dir_override_and_export() {
        let dir = tempfile::tempdir().unwrap();
        Templates::builtin().export(dir.path()).unwrap();
        assert_eq!(Templates::load_dir(dir.path()).unwrap(), Templates::builtin());
        fs::write(dir.path().join("listing8_refine.txt"), "Refine: {x}").unwrap();
        let t = Templates::load_dir(dir.path()).unwrap();
        assert_eq!(t.get(REFINE).body, "Refine: {x}");
        assert_eq!(t.get(OPINION), Templates::builtin().get(OPINION));
    }
}
