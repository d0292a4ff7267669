//! Opinion elicitation and value labeling.
//!
//! A model answers the opinion prompt; the answer is parsed into a stance and
//! `point: justification` opinions; a judge then labels every opinion, one
//! yes/no call per dimension. The bare question is labeled too (once per
//! distinct text per [`Elicitor`]) so scoring can penalize values the question itself
//! carries.

mod parse;
pub mod templates;

use std::collections::{BTreeMap, HashMap};
use std::sync::{Arc, Mutex};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::backends::{BackendError, CompletionRequest, Message, Registry, Task};
use crate::values::{or_aggregate, ValueSystem, ValueVector, ValuesError};

pub use parse::{parse_response, render_response, strip_markdown, Opinion, Stance};
pub use templates::{bindings, PromptTemplate, Templates, TEMPLATE_NAMES};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ElicitError {
    #[error("template `{template}` needs binding `{name}`")]
    MissingBinding { template: String, name: String },
    #[error("parse error: {0}")]
    Parse(String),
    #[error("judge gave no yes/no for dimension `{dim}`: {reply:?}")]
    Label { dim: String, reply: String },
    #[error(transparent)]
    Backend(#[from] BackendError),
    #[error(transparent)]
    Values(#[from] ValuesError),
    #[error("io: {0}")]
    Io(String),
}

const REPAIR: &str = "Your answer did not follow the required format. Answer again, starting with a line \
                      `Stance: yes`, `Stance: no` or `Stance: neutral`, then `Key Points:` and numbered \
                      `<point>: <justification>` lines.";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ElicitedResponse {
    pub model: String,
    pub question: String,
    pub stance: Stance,
    pub opinions: Vec<Opinion>,
    /// OR over the opinion labels.
    pub vector: ValueVector,
    pub question_labels: ValueVector,
    pub raw: String,
}

impl ElicitedResponse {
    pub fn opinion_vectors(&self) -> Vec<&ValueVector> {
        self.opinions.iter().filter_map(|o| o.labels.as_ref()).collect()
    }
}

/// Yes/no reading of a judge reply: the first word, ignoring leading
/// punctuation and case.
pub fn read_yes_no(reply: &str) -> Option<bool> {
    let word: String = strip_markdown(reply)
        .trim_start_matches(|c: char| !c.is_alphanumeric())
        .chars()
        .take_while(|c| c.is_alphanumeric())
        .collect::<String>()
        .to_lowercase();
    match word.as_str() {
        "yes" => Some(true),
        "no" => Some(false),
        _ => None,
    }
}

/// Elicitation settings plus the question-label cache for one run.
pub struct Elicitor {
    registry: Arc<Registry>,
    templates: Arc<Templates>,
    system: Arc<ValueSystem>,
    judge: String,
    /// Points per answer (L).
    pub points: usize,
    /// Word budget quoted in the opinion prompt.
    pub length_words: usize,
    question_labels: Mutex<HashMap<String, ValueVector>>,
}

impl std::fmt::Debug for Elicitor {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Elicitor").field("judge", &self.judge).field("points", &self.points).finish()
    }
}

impl Elicitor {
    pub fn new(registry: Arc<Registry>, templates: Arc<Templates>, system: Arc<ValueSystem>, judge: &str) -> Self {
        Elicitor {
            registry,
            templates,
            system,
            judge: judge.to_string(),
            points: 3,
            length_words: 250,
            question_labels: Mutex::new(HashMap::new()),
        }
    }

    pub fn with_points(mut self, points: usize) -> Self {
        self.points = points.max(1);
        self
    }

    pub fn system(&self) -> &Arc<ValueSystem> {
        &self.system
    }

    pub fn registry(&self) -> &Arc<Registry> {
        &self.registry
    }

    pub fn templates(&self) -> &Arc<Templates> {
        &self.templates
    }

    /// One judge call; a reply that is neither yes nor no is retried once.
    pub fn label_dimension(&self, text: &str, dim: &str) -> Result<bool, ElicitError> {
        let d = self.system.dimension(dim)?;
        let b = bindings([
            ("value_noun", self.system.value_noun().to_string()),
            ("value_definitions", self.system.definitions_list()),
            ("text", text.to_string()),
            ("value", d.label.clone()),
        ]);
        let prompt = self.templates.get(templates::JUDGE).render(&b)?;
        let req = CompletionRequest::new(Task::Judge, vec![Message::user(prompt)], b);
        let mut reply = String::new();
        for attempt in 0..2u64 {
            reply = self.registry.complete(&self.judge, &req.clone().with_nonce(attempt))?;
            if let Some(bit) = read_yes_no(&reply) {
                return Ok(bit);
            }
        }
        Err(ElicitError::Label { dim: dim.to_string(), reply })
    }

    /// `d` label calls in dimension order; blank text is the zero vector
    /// without calling the judge.
    pub fn label_vector(&self, text: &str) -> Result<ValueVector, ElicitError> {
        let mut v = ValueVector::zeros(&self.system);
        if text.trim().is_empty() {
            return Ok(v);
        }
        let bits: Vec<Result<bool, ElicitError>> =
            self.system.dimensions().par_iter().map(|d| self.label_dimension(text, &d.id)).collect();
        for (k, bit) in bits.into_iter().enumerate() {
            v.set_bit(k, bit?);
        }
        Ok(v)
    }

    /// Labels of the bare question text, computed once per distinct text.
    pub fn question_labels(&self, text: &str) -> Result<ValueVector, ElicitError> {
        if let Some(v) = self.question_labels.lock().expect("cache poisoned").get(text) {
            return Ok(v.clone());
        }
        let v = self.label_vector(text)?;
        Ok(self.question_labels.lock().expect("cache poisoned").entry(text.to_string()).or_insert(v).clone())
    }

    /// Seeds the cache, e.g. from a stored question record.
    pub fn cache_question_labels(&self, text: &str, labels: ValueVector) {
        self.question_labels.lock().expect("cache poisoned").entry(text.to_string()).or_insert(labels);
    }

    fn answer(&self, model: &str, question: &str, nonce: u64) -> Result<(String, Stance, Vec<Opinion>), ElicitError> {
        let b = bindings([
            ("target_question", question.to_string()),
            ("points_num", self.points.to_string()),
            ("length_num", self.length_words.to_string()),
        ]);
        let prompt = self.templates.get(templates::OPINION).render(&b)?;
        let req = CompletionRequest::new(Task::Opinion, vec![Message::user(prompt.clone())], b.clone()).with_nonce(nonce);
        let raw = self.registry.complete(model, &req)?;
        match parse_response(&raw, self.points) {
            Ok((s, o)) => Ok((raw, s, o)),
            Err(first) => {
                log::debug!("{model}: unparsable answer ({first}), retrying with repair note");
                let messages = vec![Message::user(prompt), Message::assistant(raw), Message::user(REPAIR)];
                let raw = self.registry.complete(model, &CompletionRequest::new(Task::Opinion, messages, b).with_nonce(nonce))?;
                let (s, o) = parse_response(&raw, self.points)?;
                Ok((raw, s, o))
            }
        }
    }

    /// Full elicitation of one model on one question.
    pub fn elicit(&self, model: &str, question_id: &str, question: &str) -> Result<ElicitedResponse, ElicitError> {
        self.elicit_with_nonce(model, question_id, question, 0)
    }

    pub fn elicit_with_nonce(
        &self,
        model: &str,
        question_id: &str,
        question: &str,
        nonce: u64,
    ) -> Result<ElicitedResponse, ElicitError> {
        let (raw, stance, mut opinions) = self.answer(model, question, nonce)?;
        let labels: Vec<Result<ValueVector, ElicitError>> =
            opinions.par_iter().map(|o| self.label_vector(&o.text())).collect();
        for (o, l) in opinions.iter_mut().zip(labels) {
            o.labels = Some(l?);
        }
        let vector = or_aggregate(opinions.iter().filter_map(|o| o.labels.as_ref()))?;
        let question_labels = self.question_labels(question)?;
        Ok(ElicitedResponse {
            model: model.to_string(),
            question: question_id.to_string(),
            stance,
            opinions,
            vector,
            question_labels,
            raw,
        })
    }

    /// Elicits every listed model concurrently; results keyed by model id.
    pub fn elicit_all(
        &self,
        models: &[String],
        question_id: &str,
        question: &str,
        nonce: u64,
    ) -> BTreeMap<String, Result<ElicitedResponse, ElicitError>> {
        models
            .par_iter()
            .map(|m| (m.clone(), self.elicit_with_nonce(m, question_id, question, nonce)))
            .collect()
    }

    /// Every model on every `(id, text)` question, ordered by question then
    /// model. The first failure aborts the whole evaluation.
    pub fn evaluate(&self, models: &[String], questions: &[(String, String)]) -> Result<Vec<ElicitedResponse>, ElicitError> {
        let per_q: Vec<Vec<ElicitedResponse>> = questions
            .par_iter()
            .map(|(id, text)| {
                let mut sorted = models.to_vec();
                sorted.sort();
                sorted.iter().map(|m| self.elicit(m, id, text)).collect()
            })
            .collect::<Result<_, _>>()?;
        let mut out: Vec<ElicitedResponse> = per_q.into_iter().flatten().collect();
        out.sort_by(|a, b| (&a.question, &a.model).cmp(&(&b.question, &b.model)));
        Ok(out)
    }
}
