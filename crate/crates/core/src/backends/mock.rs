//! Deterministic mock personas.
//!
//! A persona holds a per-dimension expression propensity and a lexicon of
//! phrases per dimension. Its answers are pure functions of
//! `(persona seed, request inputs)`:
//!
//! * opinion prompts produce a Listing-style "Stance / Key Points" answer in
//!   which every point independently includes dimension `k` with probability
//!   `1 - (1 - w_k)^(1 + c)`, where `c` counts the context cues (cultural,
//!   legal, ...) in the question; richer questions draw out more values;
//! * judge prompts answer Yes iff the text contains one of the dimension's
//!   lexicon phrases;
//! * exploration and refinement prompts compose a new yes/no question that
//!   carries the best exemplar's cues plus one new cue.

use std::collections::BTreeMap;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{Backend, BackendError, BackendSpec, CompletionRequest, Task};
use crate::text::{fnv1a, mix, normalize, tokenize};
use crate::values::{ValueSystem, ValueVector};

/// Dimension of the hashed bag-of-words mock embedding.
pub const MOCK_EMBED_DIM: usize = 256;

/// Context kinds a question can be grounded in; each one present raises the
/// number of values a persona brings up.
pub const CONTEXT_CUES: [&str; 8] = [
    "cultural",
    "regional",
    "legal",
    "historical",
    "economic",
    "religious",
    "environmental",
    "technological",
];

const ACTORS: [&str; 16] = [
    "city councils",
    "employers",
    "public schools",
    "national governments",
    "local communities",
    "universities",
    "hospitals",
    "tech companies",
    "faith leaders",
    "parents",
    "young adults",
    "retirees",
    "farmers",
    "small businesses",
    "courts",
    "labor unions",
];

const REGIONS: [&str; 16] = [
    "rural Japan",
    "coastal Brazil",
    "northern Nigeria",
    "urban India",
    "the Nordic countries",
    "southern Italy",
    "the American Midwest",
    "Eastern Europe",
    "the Gulf states",
    "rural Kenya",
    "Southeast Asia",
    "the Andes",
    "Quebec",
    "Scotland",
    "Central Asia",
    "Pacific island nations",
];

const SCENARIOS: [&str; 16] = [
    "after a sharp rise in living costs",
    "during an election year",
    "after a widely reported court ruling",
    "while budgets are being cut",
    "as younger voters push for change",
    "after a contested referendum",
    "amid protests outside parliament",
    "as a new trade deal takes effect",
    "after a record heatwave",
    "while a pandemic inquiry is under way",
    "as migration patterns shift",
    "after a data breach made headlines",
    "during a housing shortage",
    "as automation reshapes local jobs",
    "during a national holiday season",
    "while a drought strains farms",
];

/// (question, argument) frames; `{a}` actors, `{r}` region, `{s}` subject.
const FRAMES: [(&str, &str); 6] = [
    ("Should {a} in {r} weigh {s}", "{A} in {r} should weigh {s}"),
    ("Would it be right for {a} in {r} to prioritize {s}", "It would be right for {a} in {r} to prioritize {s}"),
    ("Is it justified for {a} in {r} to act on {s}", "It is justified for {a} in {r} to act on {s}"),
    ("Should {a} in {r} be held responsible for {s}", "{A} in {r} should be held responsible for {s}"),
    ("Do {a} in {r} owe the public a stance on {s}", "{A} in {r} owe the public a stance on {s}"),
    ("Can {a} in {r} fairly ignore {s}", "{A} in {r} cannot fairly ignore {s}"),
];

const NEUTRAL_POINTS: [&str; 6] = [
    "Implementation cost",
    "Evidence base",
    "Practical trade-offs",
    "Long-term effects",
    "Administrative burden",
    "Unclear scope",
];

const STANCES: [&str; 3] = ["yes", "no", "neutral"];

const AUX: [&str; 20] = [
    "is", "are", "should", "do", "does", "did", "can", "could", "will", "would", "must", "may", "might", "has",
    "have", "had", "was", "were", "shall", "am",
];

/// Persona configuration as it appears in a config file. Weights default to
/// `default_weight` for dimensions not listed; the lexicon defaults to the
/// value system's.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PersonaSpec {
    #[serde(default)]
    pub weights: BTreeMap<String, f64>,
    #[serde(default)]
    pub default_weight: f64,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub lexicon: BTreeMap<String, Vec<String>>,
    #[serde(default)]
    pub seed: u64,
}

impl PersonaSpec {
    pub fn uniform(weight: f64, seed: u64) -> Self {
        PersonaSpec { weights: BTreeMap::new(), default_weight: weight, lexicon: BTreeMap::new(), seed }
    }

    pub fn with_weights<'a>(weights: impl IntoIterator<Item = (&'a str, f64)>, seed: u64) -> Self {
        PersonaSpec {
            weights: weights.into_iter().map(|(k, v)| (k.to_string(), v)).collect(),
            default_weight: 0.0,
            lexicon: BTreeMap::new(),
            seed,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MockPersona {
    pub id: String,
    dims: Vec<String>,
    weights: ValueVector,
    lexicon: BTreeMap<String, Vec<String>>,
    pub seed: u64,
}

impl MockPersona {
    pub fn new(id: &str, system: &ValueSystem, spec: &PersonaSpec) -> Result<Self, BackendError> {
        let invalid = |m: String| BackendError::InvalidSpec(format!("persona `{id}`: {m}"));
        for dim in spec.weights.keys().chain(spec.lexicon.keys()) {
            system.index_of(dim).map_err(|e| invalid(e.to_string()))?;
        }
        let entries: Vec<f64> = system
            .dimensions()
            .iter()
            .map(|d| spec.weights.get(&d.id).copied().unwrap_or(spec.default_weight))
            .collect();
        let weights = ValueVector::scores(system, entries).map_err(|e| invalid(e.to_string()))?;
        let mut lexicon = system.default_lexicon();
        for (dim, phrases) in &spec.lexicon {
            lexicon.insert(dim.clone(), phrases.clone());
        }
        if let Some((dim, _)) = lexicon.iter().find(|(_, p)| p.is_empty()) {
            return Err(invalid(format!("lexicon for `{dim}` is empty")));
        }
        Ok(MockPersona {
            id: id.to_string(),
            dims: system.dimensions().iter().map(|d| d.id.clone()).collect(),
            weights,
            lexicon,
            seed: spec.seed,
        })
    }

    pub fn weights(&self) -> &ValueVector {
        &self.weights
    }

    pub fn lexicon(&self) -> &BTreeMap<String, Vec<String>> {
        &self.lexicon
    }

    /// Copy with `weight(dim)` raised by `boost`, clamped to 1.
    pub fn boosted(&self, dim: &str, boost: f64) -> Result<Self, BackendError> {
        let k = self
            .dims
            .iter()
            .position(|d| d == dim)
            .ok_or_else(|| BackendError::InvalidRequest(format!("unknown dimension `{dim}`")))?;
        let w = (self.weights.get(k) + boost.max(0.0)).min(1.0);
        let mut out = self.clone();
        out.weights = self.weights.with_entry(k, w).expect("boosted weight in [0, 1]");
        Ok(out)
    }
}

/// Context cues present in `text`, in [`CONTEXT_CUES`] order.
pub fn context_cues(text: &str) -> Vec<&'static str> {
    let tokens = tokenize(text);
    CONTEXT_CUES.iter().copied().filter(|c| tokens.iter().any(|t| t == c)).collect()
}

fn rng_for(seed: u64, parts: &[&[u8]]) -> ChaCha8Rng {
    let mut s = seed;
    for p in parts {
        s = mix(s, fnv1a(p));
    }
    ChaCha8Rng::seed_from_u64(s)
}

fn capitalize(s: &str) -> String {
    let mut c = s.chars();
    match c.next() {
        Some(f) => f.to_uppercase().collect::<String>() + c.as_str(),
        None => String::new(),
    }
}

fn topic_words(question: &str) -> String {
    let words: Vec<String> = tokenize(question).into_iter().filter(|w| w.len() > 3).take(3).collect();
    if words.is_empty() {
        "this issue".to_string()
    } else {
        words.join(" ")
    }
}

fn join_list(items: &[&str]) -> String {
    match items {
        [] => String::new(),
        [one] => one.to_string(),
        [init @ .., last] => format!("{} and {last}", init.join(", ")),
    }
}

/// Listing-1 style answer: a stance line followed by `points` numbered
/// `point: justification` lines.
pub fn persona_respond(persona: &MockPersona, question: &str, points: usize) -> String {
    let mut rng = rng_for(persona.seed, &[persona.id.as_bytes(), question.as_bytes()]);
    let rounds = 1 + context_cues(question).len() as i32;
    let topic = topic_words(question);
    let stance = STANCES[rng.random_range(0..STANCES.len())];
    let mut out = format!("Stance: {stance}\nKey Points:\n");
    for i in 1..=points.max(1) {
        let mut phrases: Vec<&str> = Vec::new();
        for (k, dim) in persona.dims.iter().enumerate() {
            // fixed draw count per dimension keeps other dimensions' draws
            // unchanged when one weight moves
            let u: f64 = rng.random();
            let options = &persona.lexicon[dim];
            let pick = rng.random_range(0..options.len());
            let p = 1.0 - (1.0 - persona.weights.get(k)).powi(rounds);
            if u < p {
                phrases.push(&options[pick]);
            }
        }
        let neutral = NEUTRAL_POINTS[rng.random_range(0..NEUTRAL_POINTS.len())];
        let line = match phrases.first() {
            None => format!("{i}. {neutral}: the outcome depends on how {topic} is handled in practice."),
            Some(first) => format!(
                "{i}. {}: weighing {topic} brings {} into focus.",
                capitalize(first),
                join_list(&phrases)
            ),
        };
        out.push_str(&line);
        out.push('\n');
    }
    out
}

/// Yes iff `text` contains any of `dim`'s lexicon phrases (case-insensitive).
pub fn persona_judge(lexicon: &BTreeMap<String, Vec<String>>, text: &str, dim: &str) -> Result<bool, BackendError> {
    let phrases = lexicon
        .get(dim)
        .ok_or_else(|| BackendError::InvalidRequest(format!("unknown dimension `{dim}`")))?;
    let lower = text.to_lowercase();
    Ok(phrases.iter().any(|p| lower.contains(&p.to_lowercase())))
}

/// 256-bucket hashed unigram counts, L2-normalized.
pub fn mock_embedding(text: &str) -> Result<Vec<f64>, BackendError> {
    let tokens = tokenize(text);
    if tokens.is_empty() {
        return Err(BackendError::EmptyInput);
    }
    let mut v = vec![0.0; MOCK_EMBED_DIM];
    for t in tokens {
        v[(fnv1a(t.as_bytes()) % MOCK_EMBED_DIM as u64) as usize] += 1.0;
    }
    Ok(normalize(v))
}

/// Subject phrase of a general question: drops a leading auxiliary verb and
/// trailing punctuation, keeps at most eight words.
fn subject_of(general: &str) -> String {
    let mut words: Vec<String> = general
        .split_whitespace()
        .map(|w| w.trim_matches(|c: char| !c.is_alphanumeric() && c != '\'').to_string())
        .filter(|w| !w.is_empty())
        .collect();
    if words.first().is_some_and(|w| AUX.contains(&w.to_lowercase().as_str())) {
        words.remove(0);
    }
    if let Some(first) = words.first_mut() {
        if first.chars().skip(1).all(|c| !c.is_uppercase()) {
            *first = first.to_lowercase();
        }
    }
    words.truncate(8);
    if words.is_empty() {
        "this issue".to_string()
    } else {
        words.join(" ")
    }
}

/// `(text, score)` pairs of a `N. text[Score: s]` listing.
fn exemplars(listing: &str) -> Vec<(String, f64)> {
    listing
        .lines()
        .filter_map(|line| {
            let (body, score) = line.trim().rsplit_once("[Score:")?;
            let score = score.trim().trim_end_matches(']').trim().parse::<f64>().ok()?;
            let text = body.split_once(". ").map(|(_, t)| t).unwrap_or(body).trim().to_string();
            Some((text, score))
        })
        .collect()
}

/// Cues shared by the exemplars scoring at or above the listing mean: the
/// mock generator's reading of what made the good questions good.
fn exemplar_cues(listing: &str) -> Option<Vec<&'static str>> {
    let ex = exemplars(listing);
    if ex.is_empty() {
        return None;
    }
    let avg = ex.iter().map(|(_, s)| s).sum::<f64>() / ex.len() as f64;
    let mut cues: Vec<&'static str> = Vec::new();
    for (text, _) in ex.iter().filter(|(_, s)| *s >= avg) {
        for c in context_cues(text) {
            if !cues.contains(&c) {
                cues.push(c);
            }
        }
    }
    Some(cues)
}

struct Composed {
    cue: Option<&'static str>,
    actors: &'static str,
    region: &'static str,
    argument: String,
    question: String,
}

fn compose(rng: &mut ChaCha8Rng, subject: &str, mut cues: Vec<&'static str>) -> Composed {
    let missing: Vec<&'static str> = CONTEXT_CUES.iter().copied().filter(|c| !cues.contains(c)).collect();
    let cue = if missing.is_empty() { None } else { Some(missing[rng.random_range(0..missing.len())]) };
    if let Some(c) = cue {
        cues.push(c);
    }
    cues.sort_by_key(|c| CONTEXT_CUES.iter().position(|x| x == c));
    let actors = ACTORS[rng.random_range(0..ACTORS.len())];
    let region = REGIONS[rng.random_range(0..REGIONS.len())];
    let (q_frame, a_frame) = FRAMES[rng.random_range(0..FRAMES.len())];
    let scenario = SCENARIOS[rng.random_range(0..SCENARIOS.len())];
    let fill = |f: &str| {
        f.replace("{A}", &capitalize(actors)).replace("{a}", actors).replace("{r}", region).replace("{s}", subject)
    };
    let framing = if cues.is_empty() {
        String::new()
    } else {
        format!(" given its {} implications", join_list(&cues))
    };
    Composed {
        cue,
        actors,
        region,
        argument: format!("{} {scenario}{framing}.", fill(a_frame)),
        question: format!("{} {scenario}{framing}?", fill(q_frame)),
    }
}

#[derive(Debug)]
pub struct MockBackend {
    spec: BackendSpec,
    persona: MockPersona,
    system: Arc<ValueSystem>,
}

impl MockBackend {
    pub fn from_spec(spec: BackendSpec, system: Arc<ValueSystem>) -> Result<Self, BackendError> {
        let persona_spec = spec
            .persona
            .clone()
            .ok_or_else(|| BackendError::InvalidSpec(format!("`{}`: mock backend needs a persona", spec.id)))?;
        let persona = MockPersona::new(&spec.id, &system, &persona_spec)?;
        Ok(MockBackend { spec, persona, system })
    }

    pub fn with_persona(spec: BackendSpec, persona: MockPersona, system: Arc<ValueSystem>) -> Self {
        MockBackend { spec, persona, system }
    }

    pub fn persona(&self) -> &MockPersona {
        &self.persona
    }

    fn binding<'a>(&self, req: &'a CompletionRequest, key: &str) -> Result<&'a str, BackendError> {
        req.bindings
            .get(key)
            .map(String::as_str)
            .ok_or_else(|| BackendError::InvalidRequest(format!("mock `{}` needs binding `{key}`", self.spec.id)))
    }

    fn generation_rng(&self, req: &CompletionRequest, anchor: &str) -> ChaCha8Rng {
        rng_for(self.persona.seed, &[self.persona.id.as_bytes(), anchor.as_bytes(), &req.nonce.to_le_bytes()])
    }
}

impl Backend for MockBackend {
    fn spec(&self) -> &BackendSpec {
        &self.spec
    }

    fn complete(&self, req: &CompletionRequest) -> Result<String, BackendError> {
        match req.task {
            Task::Opinion => {
                let q = self.binding(req, "target_question")?;
                let n = self.binding(req, "points_num")?.trim().parse::<usize>().unwrap_or(3);
                Ok(persona_respond(&self.persona, q, n))
            }
            Task::Judge => {
                let text = self.binding(req, "text")?;
                let value = self.binding(req, "value")?;
                let k = self
                    .system
                    .find(value)
                    .ok_or_else(|| BackendError::InvalidRequest(format!("unknown dimension `{value}`")))?;
                let dim = &self.system.dimensions()[k].id;
                Ok(if persona_judge(&self.persona.lexicon, text, dim)? { "Yes" } else { "No" }.to_string())
            }
            Task::Explore | Task::Question => {
                let general = self.binding(req, "general_argument")?;
                let listing = req.bindings.get("specific_arguments").map(String::as_str).unwrap_or("");
                let cues = exemplar_cues(listing).unwrap_or_else(|| context_cues(general));
                let mut rng = self.generation_rng(req, listing);
                let c = compose(&mut rng, &subject_of(general), cues);
                if req.task == Task::Explore {
                    let angle = c.cue.unwrap_or("practical");
                    Ok(format!(
                        "Let's think step by step. A new {angle} fact: in {}, {} are actively debating {}.",
                        c.region,
                        c.actors,
                        subject_of(general)
                    ))
                } else {
                    Ok(format!("[Argument] : {}\n[Question]: {}", c.argument, c.question))
                }
            }
            Task::Reflect | Task::Refine => {
                let question = self.binding(req, "question")?;
                let general = req.bindings.get("general_question").map(String::as_str).unwrap_or(question);
                let mut rng = self.generation_rng(req, question);
                let c = compose(&mut rng, &subject_of(general), context_cues(question));
                if req.task == Task::Reflect {
                    let angle = c.cue.unwrap_or("concrete");
                    Ok(format!(
                        "Suggestions:\n1. Ground the question in a {angle} setting such as {}.\n2. Keep it a single yes/no question.",
                        c.region
                    ))
                } else {
                    Ok(c.question)
                }
            }
            Task::Free => {
                let head: String = req.last_user().chars().take(80).collect();
                Ok(format!("[{}] {head}", self.spec.id))
            }
        }
    }

    fn embed(&self, text: &str) -> Result<Vec<f64>, BackendError> {
        mock_embedding(text)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::text::cosine;

    fn persona(spec: PersonaSpec) -> MockPersona {
        MockPersona::new("p", &ValueSystem::schwartz(), &spec).unwrap()
    }

    #[test]
    fn respond_is_deterministic() {
        let p = persona(PersonaSpec::uniform(0.4, 7));
        let q = "Should cities ban cars downtown?";
        assert_eq!(persona_respond(&p, q, 3), persona_respond(&p, q, 3));
        assert_ne!(persona_respond(&p, q, 3), persona_respond(&p, "Should schools start later?", 3));
    }

    #[test]
    fn respond_one_hot_uses_only_that_lexicon() {
        let sys = ValueSystem::schwartz();
        let p = persona(PersonaSpec::with_weights([("universalism", 1.0)], 1));
        let uni = &sys.dimension("universalism").unwrap().lexicon;
        let lex = sys.default_lexicon();
        for q in ["Is leisure important?", "Should taxes rise?", "Do zoos help animals?"] {
            let text = persona_respond(&p, q, 3);
            let points: Vec<&str> = text.lines().skip(2).collect();
            assert_eq!(points.len(), 3);
            for line in points {
                assert!(uni.iter().any(|ph| line.contains(ph.as_str())), "{line}");
                for (dim, phrases) in &lex {
                    if dim != "universalism" {
                        assert!(!phrases.iter().any(|ph| line.contains(ph.as_str())));
                    }
                }
            }
        }
    }

    #[test]
    fn respond_uniform_frequencies() {
        // Monte-Carlo oracle: uniform propensities give each dimension about
        // 1/d of all emitted phrases
        let sys = ValueSystem::schwartz();
        let p = persona(PersonaSpec::uniform(0.3, 3));
        let lex = sys.default_lexicon();
        let mut counts = vec![0usize; sys.len()];
        for i in 0..10_000 {
            let text = persona_respond(&p, &format!("Question number {i}?"), 3);
            for line in text.lines().skip(2) {
                for (k, d) in sys.dimensions().iter().enumerate() {
                    counts[k] += lex[&d.id].iter().filter(|ph| line.contains(ph.as_str())).count();
                }
            }
        }
        let total: usize = counts.iter().sum();
        for c in counts {
            let f = c as f64 / total as f64;
            assert!((f - 0.1).abs() <= 0.02, "frequency {f}");
        }
    }

    #[test]
    fn context_cues_raise_expression() {
        let p = persona(PersonaSpec::uniform(0.2, 5));
        let count = |q: &str| {
            (0..300)
                .map(|i| {
                    let t = persona_respond(&p, &format!("{q} {i}?"), 3);
                    ValueSystem::schwartz()
                        .default_lexicon()
                        .values()
                        .flatten()
                        .filter(|ph| t.contains(ph.as_str()))
                        .count()
                })
                .sum::<usize>()
        };
        assert!(count("Should towns ban cars given its legal and economic implications") > count("Should towns ban cars"));
    }

    #[test]
    fn judge_examples() {
        let sys = ValueSystem::schwartz();
        let lex = sys.default_lexicon();
        assert!(persona_judge(&lex, "We need more Public Safety here", "security").unwrap());
        assert!(!persona_judge(&lex, "", "security").unwrap());
        let text = "independent thought matters, as does personal pleasure";
        let hits: Vec<bool> = sys.dimensions().iter().map(|d| persona_judge(&lex, text, &d.id).unwrap()).collect();
        assert_eq!(hits.iter().filter(|&&h| h).count(), 2);
        assert!(hits[0] && hits[2]);
        assert!(persona_judge(&lex, text, "nope").is_err());
    }

    #[test]
    fn embedding_contract() {
        let a = mock_embedding("the same text").unwrap();
        let b = mock_embedding("the same text").unwrap();
        assert!((cosine(&a, &b) - 1.0).abs() < 1e-12);
        assert!((crate::text::norm(&a) - 1.0).abs() < 1e-6);
        assert_eq!(a.len(), MOCK_EMBED_DIM);
        assert_eq!(mock_embedding("  ?? "), Err(BackendError::EmptyInput));
    }

    #[test]
    fn embedding_disjoint_supports() {
        // oracle: when the hashed supports share no bucket, the dot product
        // has no nonzero term
        let bucket = |t: &str| fnv1a(t.as_bytes()) % MOCK_EMBED_DIM as u64;
        let (x, y) = ("apple banana", "river mountain");
        let bx: Vec<u64> = tokenize(x).iter().map(|t| bucket(t)).collect();
        let by: Vec<u64> = tokenize(y).iter().map(|t| bucket(t)).collect();
        assert!(bx.iter().all(|b| !by.contains(b)));
        assert_eq!(cosine(&mock_embedding(x).unwrap(), &mock_embedding(y).unwrap()), 0.0);
    }

    #[test]
    fn boosted_clamps_and_keeps_others() {
        let p = persona(PersonaSpec::with_weights([("power", 0.7), ("security", 0.2)], 1));
        let b = p.boosted("power", 0.5).unwrap();
        let k = ValueSystem::schwartz().index_of("power").unwrap();
        assert_eq!(b.weights().get(k), 1.0);
        let s = ValueSystem::schwartz().index_of("security").unwrap();
        assert_eq!(b.weights().get(s), 0.2);
        assert_eq!(b.weights().system(), "schwartz-10");
        assert!(p.boosted("nope", 0.1).is_err());
    }

    #[test]
    fn generation_adds_a_cue() {
        let sys = Arc::new(ValueSystem::schwartz());
        let spec = BackendSpec::mock("gen", PersonaSpec::uniform(0.3, 9));
        let m = MockBackend::from_spec(spec, sys).unwrap();
        let mut bindings = BTreeMap::new();
        bindings.insert("general_argument".to_string(), "Is leisure time important for people's lives?".to_string());
        bindings.insert(
            "specific_arguments".to_string(),
            "1. Should parents in Quebec weigh leisure time given its legal implications?[Score: 3.5]\n2. Should x?[Score: 1.0]"
                .to_string(),
        );
        let req = CompletionRequest::new(Task::Question, vec![], bindings);
        let reply = m.complete(&req).unwrap();
        let q = reply.lines().find_map(|l| l.strip_prefix("[Question]: ")).unwrap();
        let cues = context_cues(q);
        assert_eq!(cues.len(), 2);
        assert!(cues.contains(&"legal"));
        assert!(q.ends_with('?') && q.contains("leisure time"));
        assert_eq!(reply, m.complete(&req).unwrap());
        assert_ne!(reply, m.complete(&req.clone().with_nonce(1)).unwrap());
    }

    #[test]
    fn subject_extraction() {
        assert_eq!(subject_of("Is leisure time important for people's lives?"), "leisure time important for people's lives");
        assert_eq!(subject_of("Leisure time is important."), "leisure time is important");
        assert_eq!(subject_of("?"), "this issue");
    }
}
