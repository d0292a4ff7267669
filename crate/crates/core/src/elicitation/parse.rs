//! Stance / key-point parsing for opinion answers.

use serde::{Deserialize, Serialize};

use super::ElicitError;
use crate::values::ValueVector;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Stance {
    Yes,
    No,
    Neutral,
}

impl Stance {
    pub fn as_str(self) -> &'static str {
        match self {
            Stance::Yes => "yes",
            Stance::No => "no",
            Stance::Neutral => "neutral",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Opinion {
    pub index: usize,
    pub point: String,
    pub justification: String,
    /// Justification length in words; recorded, never enforced.
    pub words: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub labels: Option<ValueVector>,
}

impl Opinion {
    /// The text handed to the judge: `point: justification`.
    pub fn text(&self) -> String {
        format!("{}: {}", self.point, self.justification)
    }
}

/// Removes markdown emphasis and heading markers.
pub fn strip_markdown(s: &str) -> String {
    let s = s.replace("__", "").replace(['*', '`'], "");
    s.trim_start_matches('#').trim().to_string()
}

fn parse_stance(line: &str) -> Option<Result<Stance, String>> {
    let clean = strip_markdown(line);
    let (head, tail) = clean.split_once(':')?;
    if !head.trim().eq_ignore_ascii_case("stance") {
        return None;
    }
    let word: String = tail
        .trim()
        .trim_start_matches(|c: char| !c.is_alphanumeric())
        .chars()
        .take_while(|c| c.is_alphabetic())
        .collect::<String>()
        .to_lowercase();
    Some(match word.as_str() {
        "yes" => Ok(Stance::Yes),
        "no" => Ok(Stance::No),
        "neutral" => Ok(Stance::Neutral),
        _ => Err(tail.trim().to_string()),
    })
}

/// `N. point: justification` or `N) point: justification`.
fn parse_point(line: &str) -> Option<(String, String)> {
    let clean = strip_markdown(line);
    let digits = clean.bytes().take_while(u8::is_ascii_digit).count();
    if digits == 0 {
        return None;
    }
    let rest = clean[digits..].strip_prefix(['.', ')'])?;
    let (point, justification) = rest.split_once(':')?;
    let point = point.trim().to_string();
    let justification = justification.trim().to_string();
    if point.is_empty() || justification.is_empty() {
        return None;
    }
    Some((point, justification))
}

/// Reads the stance from the first `Stance:` line and up to `l` numbered
/// points in listed order.
pub fn parse_response(raw: &str, l: usize) -> Result<(Stance, Vec<Opinion>), ElicitError> {
    let mut stance = None;
    let mut opinions = Vec::new();
    for line in raw.lines() {
        if stance.is_none() {
            match parse_stance(line) {
                Some(Ok(s)) => {
                    stance = Some(s);
                    continue;
                }
                Some(Err(other)) => return Err(ElicitError::Parse(format!("unrecognized stance `{other}`"))),
                None => {}
            }
        }
        if opinions.len() < l {
            if let Some((point, justification)) = parse_point(line) {
                opinions.push(Opinion {
                    index: opinions.len() + 1,
                    words: justification.split_whitespace().count(),
                    point,
                    justification,
                    labels: None,
                });
            }
        }
    }
    let stance = stance.ok_or_else(|| ElicitError::Parse("no `Stance:` line".into()))?;
    if opinions.is_empty() {
        return Err(ElicitError::Parse("no numbered `point: justification` lines".into()));
    }
    Ok((stance, opinions))
}

/// Inverse of [`parse_response`] for already-parsed answers.
pub fn render_response(stance: Stance, opinions: &[Opinion]) -> String {
    let mut out = format!("Stance: {}\nKey Points:\n", stance.as_str());
    for (i, o) in opinions.iter().enumerate() {
        out.push_str(&format!("{}. {}: {}\n", i + 1, o.point, o.justification));
    }
    out
}
