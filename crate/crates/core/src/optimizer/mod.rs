//! Bandit-driven question search.
//!
//! Each seed topic is an arm. A pull selects an arm by UCB, asks generator
//! models (P1) for `N_2` new questions grounded in the arm's best-scored
//! exemplars, deduplicates them against the whole store, refines each one by
//! reflect/refine rounds while the P1 score gain exceeds `τ`, scores the
//! result once with the P2 pool, admits survivors and updates the arm.
//! State is checkpointed after every pull; a resumed run replays to the same
//! store byte for byte under deterministic backends.

pub mod bandit;
pub mod store;

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::backends::{BackendError, CompletionRequest, Message, Task};
use crate::elicitation::{bindings, strip_markdown, templates, ElicitError, ElicitedResponse, Elicitor};
use crate::scoring::{
    composite_score, dedup_check, Embedder, OpinionSimilarity, ScoreBreakdown, ScoreError, SimilarityConfig,
    SimilarityMode,
};
use crate::text::{mean, mix};
use crate::values::ValueVector;

pub use bandit::{try_update_arm, ucb_select, ucb_value, update_arm, ArmState, Selection};
pub use store::QuestionStore;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OptError {
    #[error(transparent)]
    Backend(#[from] BackendError),
    #[error(transparent)]
    Elicit(#[from] ElicitError),
    #[error(transparent)]
    Score(#[from] ScoreError),
    #[error("config: {0}")]
    Config(String),
    #[error("data: {0}")]
    Data(String),
    #[error("io: {0}")]
    Io(String),
}

impl OptError {
    /// Transport failures abort a pull; everything else fails one candidate.
    pub fn is_backend(&self) -> bool {
        matches!(self, OptError::Backend(_) | OptError::Elicit(ElicitError::Backend(_)))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum QuestionStatus {
    Seed,
    Frontier,
    Retired,
    Duplicate,
    Failed,
}

impl QuestionStatus {
    /// Statuses whose texts take part in deduplication and export.
    pub fn is_live(self) -> bool {
        matches!(self, QuestionStatus::Seed | QuestionStatus::Frontier)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub generator: String,
    pub run_id: String,
    pub step: usize,
    /// Logical clock (the pull step), so replays are byte-identical.
    pub timestamp: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Nearest {
    pub id: String,
    pub similarity: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuestionRecord {
    pub id: String,
    pub text: String,
    pub topic_id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub parent_id: Option<String>,
    pub depth: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub score: Option<ScoreBreakdown>,
    pub status: QuestionStatus,
    pub provenance: Provenance,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub question_labels: Option<ValueVector>,
    /// The argument the generator attached to the question.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub background: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nearest: Option<Nearest>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl QuestionRecord {
    pub fn composite(&self) -> Option<f64> {
        self.score.map(|s| s.composite)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    /// B: total pulls.
    pub budget: usize,
    /// N_2: candidates per pull.
    pub explore_width: usize,
    /// τ: minimum P1 score gain to keep a refinement.
    pub tau: f64,
    pub n_shot: usize,
    pub tree_depth: usize,
    /// L: key points per answer.
    pub points: usize,
    pub length_words: usize,
    pub seed: u64,
    pub p1: Vec<String>,
    pub p2: Vec<String>,
    pub judge: String,
    pub embed: Option<String>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            budget: 50,
            explore_width: 3,
            tau: 0.5,
            n_shot: 5,
            tree_depth: 3,
            points: 3,
            length_words: 250,
            seed: 0,
            p1: Vec::new(),
            p2: Vec::new(),
            judge: String::new(),
            embed: None,
        }
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<(), OptError> {
        let bad = |m: &str| Err(OptError::Config(m.to_string()));
        if self.explore_width == 0 {
            return bad("explore_width (N_2) must be >= 1");
        }
        if self.n_shot == 0 || self.points == 0 {
            return bad("n_shot and points must be >= 1");
        }
        if !self.tau.is_finite() {
            return bad("tau must be finite");
        }
        if self.p1.is_empty() {
            return bad("generation pool (P1) is empty");
        }
        if self.p2.len() < 2 {
            return bad("scoring pool (P2) needs at least two models to score a question");
        }
        if self.p1.len() < 2 {
            return bad("generation pool (P1) needs at least two models to score a question");
        }
        if self.judge.is_empty() {
            return bad("no judge backend");
        }
        Ok(())
    }

    pub fn run_id(&self) -> String {
        format!("run-{:016x}", self.seed)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PullSummary {
    pub step: usize,
    pub arm: usize,
    pub candidates: Vec<String>,
    pub admitted: Vec<String>,
    pub duplicates: usize,
    pub failures: usize,
    /// MEAN(Ŝ) over admitted questions.
    pub mean_score: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub aborted: Option<String>,
}

/// Everything needed to continue a run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunState {
    pub run_id: String,
    pub budget: usize,
    pub pulls_done: usize,
    pub next_id: u64,
    pub arms: Vec<ArmState>,
    pub questions: BTreeMap<String, QuestionRecord>,
    pub selections: Vec<Selection>,
    pub trajectory: Vec<PullSummary>,
    /// Store bytes covered by this state.
    pub store_len: u64,
}

impl RunState {
    fn alloc_id(&mut self) -> String {
        let id = format!("q{:06}", self.next_id);
        self.next_id += 1;
        id
    }

    pub fn summary(&self) -> RunSummary {
        let generated = self.questions.values().filter(|q| q.status != QuestionStatus::Seed && q.provenance.step > 0);
        let (mut created, mut dup, mut failed) = (0, 0, 0);
        for q in generated {
            match q.status {
                QuestionStatus::Frontier | QuestionStatus::Retired => created += 1,
                QuestionStatus::Duplicate => dup += 1,
                QuestionStatus::Failed => failed += 1,
                QuestionStatus::Seed => {}
            }
        }
        RunSummary {
            pulls: self.pulls_done,
            questions_created: created,
            duplicates: dup,
            failures: failed,
            trajectory: self.trajectory.iter().map(|p| p.mean_score).collect(),
        }
    }

    /// Questions in id order.
    pub fn records(&self) -> impl DoubleEndedIterator<Item = &QuestionRecord> {
        self.questions.values()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub pulls: usize,
    pub questions_created: usize,
    pub duplicates: usize,
    pub failures: usize,
    /// MEAN(Ŝ) per pull, `None` where nothing was admitted.
    pub trajectory: Vec<Option<f64>>,
}

/// One line of a seed file: plain text, or `{"text": ..., "topic": ...}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeedRow {
    pub text: String,
    #[serde(default)]
    pub topic: Option<String>,
}

/// Parses a seed file; blank lines and `#` comments are skipped.
pub fn parse_seeds(contents: &str) -> Result<Vec<SeedRow>, OptError> {
    let mut out = Vec::new();
    for (n, line) in contents.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if line.starts_with('{') {
            let row: SeedRow =
                serde_json::from_str(line).map_err(|e| OptError::Data(format!("seed line {}: {e}", n + 1)))?;
            out.push(row);
        } else {
            out.push(SeedRow { text: line.to_string(), topic: None });
        }
    }
    if out.is_empty() {
        return Err(OptError::Data("seed file has no questions".into()));
    }
    Ok(out)
}

/// Score plus the answers it was computed from.
#[derive(Debug, Clone, PartialEq)]
pub struct Scored {
    pub score: ScoreBreakdown,
    pub responses: Vec<ElicitedResponse>,
    pub question_labels: ValueVector,
}

/// Pre-admission hook: `Err(reason)` rejects a question.
pub type AdmissionFilter = Arc<dyn Fn(&str) -> Result<(), String> + Send + Sync>;

/// `[Question]: ...` line of a generator reply, if it is a question.
pub fn parse_generated(reply: &str) -> (Option<String>, Option<String>) {
    let mut argument = None;
    let mut question = None;
    for line in reply.lines() {
        let clean = strip_markdown(line);
        let lower = clean.to_lowercase();
        if let Some((head, tail)) = clean.split_once(':') {
            let head = head.trim().to_lowercase();
            if head == "[argument]" || head == "argument" {
                argument = Some(tail.trim().to_string());
            } else if head == "[question]" || head == "question" {
                question = Some(tail.trim().to_string());
            }
        } else if question.is_none() && lower.ends_with('?') {
            question = Some(clean.trim().to_string());
        }
    }
    let question = question.filter(|q| is_question(q));
    (argument.filter(|a| !a.is_empty()), question)
}

fn is_question(q: &str) -> bool {
    q.ends_with('?') && q.split_whitespace().count() >= 3 && !q.contains('\n')
}

/// Filled `[Input Information]` block of the reflection prompt.
pub fn reflection_input(general: &str, question: &str, background: &str, scored: &Scored, labels: &[String]) -> String {
    let mut s = format!("[General question]: {general}\n[Question]: {question}\n[Background]: {background}\n[Generation]:\n");
    for (i, r) in scored.responses.iter().enumerate() {
        let points: Vec<String> = r.opinions.iter().map(|o| o.text()).collect();
        let values: Vec<&str> = r.vector.ones().map(|k| labels[k].as_str()).collect();
        s.push_str(&format!(
            "    [Model-{n} Key-points]: {} [Model-{n} Value]: {}\n",
            points.join(" | "),
            if values.is_empty() { "none".to_string() } else { values.join(", ") },
            n = i + 1
        ));
    }
    s.push_str(&format!("[Reward Score]: {:.3}", scored.score.composite));
    s
}

/// Files backing a run.
#[derive(Debug, Clone)]
pub struct RunFiles {
    pub store: QuestionStore,
    pub checkpoint: PathBuf,
}

impl RunFiles {
    pub fn in_dir(dir: impl AsRef<Path>) -> Self {
        let dir = dir.as_ref();
        RunFiles { store: QuestionStore::new(dir.join("questions.jsonl")), checkpoint: dir.join("checkpoint.json") }
    }

    pub fn save(&self, state: &RunState) -> Result<(), OptError> {
        store::write_json(&self.checkpoint, state)
    }

    /// Loads the checkpoint and cuts the store back to what it covers.
    pub fn resume(&self) -> Result<RunState, OptError> {
        let state: RunState = store::read_json(&self.checkpoint)?;
        self.store.truncate(state.store_len)?;
        Ok(state)
    }
}

/// Search engine over one configuration.
pub struct Optimizer<'a> {
    pub cfg: RunConfig,
    pub sim: SimilarityConfig,
    elicitor: &'a Elicitor,
    embedder: &'a Embedder,
    filter: Option<AdmissionFilter>,
}

struct Candidate {
    generator: String,
    nonce: u64,
    argument: Option<String>,
    question: Option<String>,
}

/// Candidates of one exploration and the (question id, score) exemplars shown.
type Explored = (Vec<Candidate>, Vec<(String, f64)>);

enum Outcome {
    Scored(Box<(String, Option<String>, usize, Scored)>),
    Failed(String),
}

impl<'a> Optimizer<'a> {
    pub fn new(cfg: RunConfig, sim: SimilarityConfig, elicitor: &'a Elicitor, embedder: &'a Embedder) -> Self {
        Optimizer { cfg, sim, elicitor, embedder, filter: None }
    }

    pub fn with_filter(mut self, filter: AdmissionFilter) -> Self {
        self.filter = Some(filter);
        self
    }

    fn similarity(&self) -> OpinionSimilarity<'_> {
        match (self.sim.mode, self.embedder.is_backed()) {
            (SimilarityMode::EmbeddingGreedyF, _) | (SimilarityMode::Auto, true) => {
                OpinionSimilarity::GreedyF(self.embedder)
            }
            _ => OpinionSimilarity::TokenF1,
        }
    }

    /// Scores `text` with every model of `pool`. Models whose answer cannot be
    /// parsed or labeled are left out; transport failures abort.
    pub fn score(&self, question_id: &str, text: &str, pool: &[String], nonce: u64) -> Result<Scored, OptError> {
        let results = self.elicitor.elicit_all(pool, question_id, text, nonce);
        let mut responses = Vec::new();
        for (model, r) in results {
            match r {
                Ok(r) => responses.push(r),
                Err(ElicitError::Backend(e)) => return Err(OptError::Backend(e)),
                Err(e) => log::warn!("{question_id}: elicitation from `{model}` failed: {e}"),
            }
        }
        let question_labels = self.elicitor.question_labels(text)?;
        let refs: Vec<&ElicitedResponse> = responses.iter().collect();
        let score = composite_score(&refs, &question_labels, &self.similarity())?;
        Ok(Scored { score, responses, question_labels })
    }

    /// Reads seed rows into a fresh state: dedup in file order, one arm per
    /// topic, every surviving seed scored once with P2.
    pub fn ingest_seeds(&self, seeds: &[SeedRow]) -> Result<RunState, OptError> {
        self.cfg.validate()?;
        let run_id = self.cfg.run_id();
        let mut state = RunState {
            run_id: run_id.clone(),
            budget: self.cfg.budget,
            pulls_done: 0,
            next_id: 0,
            arms: Vec::new(),
            questions: BTreeMap::new(),
            selections: Vec::new(),
            trajectory: Vec::new(),
            store_len: 0,
        };
        let mut corpus: Vec<(String, Vec<f64>)> = Vec::new();
        let mut pending = Vec::new();
        for (n, row) in seeds.iter().enumerate() {
            let id = state.alloc_id();
            let topic = row.topic.clone().unwrap_or_else(|| format!("t{n:03}"));
            let mut rec = QuestionRecord {
                id: id.clone(),
                text: row.text.trim().to_string(),
                topic_id: topic,
                parent_id: None,
                depth: 0,
                score: None,
                status: QuestionStatus::Seed,
                provenance: Provenance { generator: "seed".into(), run_id: run_id.clone(), step: 0, timestamp: 0 },
                question_labels: None,
                background: None,
                nearest: None,
                note: None,
            };
            let emb = self.embedder.embed(&rec.text).map_err(|e| OptError::Data(format!("seed {}: {e}", n + 1)))?;
            let embs: Vec<Vec<f64>> = corpus.iter().map(|(_, e)| e.clone()).collect();
            let verdict = dedup_check(&emb, &embs, &self.sim);
            if verdict.duplicate {
                let (k, s) = verdict.nearest.expect("duplicate implies a neighbour");
                rec.status = QuestionStatus::Duplicate;
                rec.nearest = Some(Nearest { id: corpus[k].0.clone(), similarity: s.max(verdict.topk_similarity) });
            } else {
                corpus.push((id.clone(), emb));
                pending.push(id.clone());
            }
            state.questions.insert(id, rec);
        }
        let scored: Vec<(String, Result<Scored, OptError>)> = pending
            .par_iter()
            .map(|id| {
                let text = &state.questions[id].text;
                (id.clone(), self.score(id, text, &self.cfg.p2, mix(self.cfg.seed, 0)))
            })
            .collect();
        for (id, r) in scored {
            let rec = state.questions.get_mut(&id).expect("pending id");
            match r {
                Err(e) if e.is_backend() => return Err(e),
                Ok(s) => {
                    rec.score = Some(s.score);
                    rec.question_labels = Some(s.question_labels);
                    match state.arms.iter_mut().find(|a| a.topic_id == rec.topic_id) {
                        Some(arm) => {
                            arm.questions.push(id.clone());
                            arm.scores.push(s.score.composite);
                        }
                        None => {
                            let mut arm = ArmState::new(&rec.topic_id, &id);
                            arm.questions.push(id.clone());
                            arm.scores.push(s.score.composite);
                            state.arms.push(arm);
                        }
                    }
                }
                Err(e) => {
                    rec.status = QuestionStatus::Failed;
                    rec.note = Some(e.to_string());
                }
            }
        }
        if state.arms.is_empty() {
            return Err(OptError::Data("no seed question could be scored".into()));
        }
        Ok(state)
    }

    fn exemplars(&self, state: &RunState, arm: &ArmState) -> Vec<(String, f64)> {
        let mut ex: Vec<(String, f64)> = arm.questions.iter().cloned().zip(arm.scores.iter().copied()).collect();
        ex.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
        ex.truncate(self.cfg.n_shot);
        debug_assert!(ex.iter().all(|(id, _)| state.questions.contains_key(id)));
        ex
    }

    fn generate(&self, general: &str, listing: &str, generator: &str, nonce: u64) -> Result<Candidate, OptError> {
        let t = self.elicitor.templates();
        let b = bindings([("general_argument", general.to_string()), ("specific_arguments", listing.to_string())]);
        let explore = t.get(templates::EXPLORE).render(&b)?;
        let reg = self.elicitor.registry();
        let req = CompletionRequest::new(Task::Explore, vec![Message::user(explore.clone())], b.clone()).with_nonce(nonce);
        let cot = reg.complete(generator, &req)?;
        let ask = t.get(templates::QUESTION).render(&b)?;
        let messages = vec![Message::user(explore), Message::assistant(cot), Message::user(ask)];
        let reply = reg.complete(generator, &CompletionRequest::new(Task::Question, messages, b).with_nonce(nonce))?;
        let (argument, question) = parse_generated(&reply);
        Ok(Candidate { generator: generator.to_string(), nonce, argument, question })
    }

    /// Up to `N_2` raw candidates for `arm` plus the exemplars they were
    /// prompted with. Generator backends rotate round-robin.
    fn explore_raw(&self, state: &RunState, arm: usize, step: usize) -> Result<Explored, OptError> {
        let a = &state.arms[arm];
        let ex = self.exemplars(state, a);
        if ex.is_empty() {
            return Err(OptError::Data(format!("arm `{}` has no questions", a.topic_id)));
        }
        let general = &state.questions[&a.general].text;
        let listing: String = ex
            .iter()
            .enumerate()
            .map(|(i, (id, s))| format!("{}. {}[Score: {s:.3}]", i + 1, state.questions[id].text))
            .collect::<Vec<_>>()
            .join("\n");
        let n2 = self.cfg.explore_width;
        let base = (step.saturating_sub(1)) * n2;
        let step_nonce = mix(self.cfg.seed, step as u64);
        let cands: Vec<Result<Candidate, OptError>> = (0..n2)
            .into_par_iter()
            .map(|c| {
                let generator = &self.cfg.p1[(base + c) % self.cfg.p1.len()];
                self.generate(general, &listing, generator, mix(step_nonce, c as u64))
            })
            .collect();
        Ok((cands.into_iter().collect::<Result<Vec<_>, _>>()?, ex))
    }

    /// Live texts (seed or frontier) with their embeddings, in id order.
    fn live_corpus(&self, state: &RunState) -> Result<Vec<(String, Vec<f64>)>, OptError> {
        state
            .records()
            .filter(|q| q.status.is_live())
            .map(|q| Ok((q.id.clone(), self.embedder.embed(&q.text)?)))
            .collect()
    }

    fn check_dup(&self, text: &str, corpus: &[(String, Vec<f64>)]) -> Result<Option<Nearest>, OptError> {
        let emb = self.embedder.embed(text)?;
        let embs: Vec<Vec<f64>> = corpus.iter().map(|(_, e)| e.clone()).collect();
        let v = dedup_check(&emb, &embs, &self.sim);
        Ok(v.duplicate.then(|| {
            let (k, s) = v.nearest.expect("duplicate implies a neighbour");
            Nearest { id: corpus[k].0.clone(), similarity: s.max(v.topk_similarity) }
        }))
    }

    /// Candidate questions for `arm`: generated, parsed and deduplicated
    /// against the store. Returned records are `frontier` (unscored),
    /// `duplicate` or `failed`; ids are not yet committed to `state`.
    pub fn explore(&self, state: &RunState, arm: usize, step: usize) -> Result<Vec<QuestionRecord>, OptError> {
        let mut scratch = state.clone();
        let (cands, ex) = self.explore_raw(&scratch, arm, step)?;
        let corpus = self.live_corpus(&scratch)?;
        Ok(self.triage(&mut scratch, arm, step, cands, &ex, corpus)?.0)
    }

    fn triage(
        &self,
        state: &mut RunState,
        arm: usize,
        step: usize,
        cands: Vec<Candidate>,
        ex: &[(String, f64)],
        mut corpus: Vec<(String, Vec<f64>)>,
    ) -> Result<(Vec<QuestionRecord>, Vec<u64>), OptError> {
        let topic = state.arms[arm].topic_id.clone();
        let parent = ex.first().map(|(id, _)| id.clone());
        let mut out = Vec::new();
        let mut nonces = Vec::new();
        for c in cands {
            let id = state.alloc_id();
            let mut rec = QuestionRecord {
                id: id.clone(),
                text: c.question.clone().unwrap_or_default(),
                topic_id: topic.clone(),
                parent_id: parent.clone(),
                depth: 0,
                score: None,
                status: QuestionStatus::Frontier,
                provenance: Provenance {
                    generator: c.generator.clone(),
                    run_id: state.run_id.clone(),
                    step,
                    timestamp: step as u64,
                },
                question_labels: None,
                background: c.argument.clone(),
                nearest: None,
                note: None,
            };
            if c.question.is_none() {
                rec.status = QuestionStatus::Failed;
                rec.note = Some("generator reply has no yes/no question".into());
            } else if let Some(n) = self.check_dup(&rec.text, &corpus)? {
                rec.status = QuestionStatus::Duplicate;
                rec.nearest = Some(n);
            } else {
                corpus.push((id.clone(), self.embedder.embed(&rec.text)?));
            }
            out.push(rec);
            nonces.push(c.nonce);
        }
        Ok((out, nonces))
    }

    fn refine_inner(&self, q: &QuestionRecord, general: &str, nonce: u64) -> Result<Outcome, OptError> {
        let mut current = match self.score(&q.id, &q.text, &self.cfg.p1, nonce) {
            Ok(s) => s,
            Err(e) if e.is_backend() => return Err(e),
            Err(e) => return Ok(Outcome::Failed(format!("P1 scoring failed: {e}"))),
        };
        let mut text = q.text.clone();
        let mut depth = q.depth;
        let generator = q.provenance.generator.as_str();
        let t = self.elicitor.templates();
        let reg = self.elicitor.registry();
        let labels: Vec<String> = self.elicitor.system().dimensions().iter().map(|d| d.label.clone()).collect();
        let background = q.background.clone().unwrap_or_else(|| "none".into());
        while depth < self.cfg.tree_depth {
            let round = mix(nonce, depth as u64 + 1);
            let b = bindings([
                ("input_information", reflection_input(general, &text, &background, &current, &labels)),
                ("question", text.clone()),
                ("general_question", general.to_string()),
            ]);
            let reflect = t.get(templates::REFLECT).render(&b)?;
            let req = CompletionRequest::new(Task::Reflect, vec![Message::user(reflect.clone())], b.clone())
                .with_nonce(round);
            let suggestions = reg.complete(generator, &req)?;
            let refine = t.get(templates::REFINE).render(&b)?;
            let messages = vec![Message::user(reflect), Message::assistant(suggestions), Message::user(refine)];
            let reply = reg.complete(generator, &CompletionRequest::new(Task::Refine, messages, b).with_nonce(round))?;
            let Some(candidate) = parse_generated(&reply).1 else {
                log::debug!("{}: refinement is not a yes/no question, keeping predecessor", q.id);
                break;
            };
            let next = match self.score(&q.id, &candidate, &self.cfg.p1, round) {
                Ok(s) => s,
                Err(e) if e.is_backend() => return Err(e),
                Err(_) => break,
            };
            if next.score.composite - current.score.composite > self.cfg.tau {
                text = candidate;
                current = next;
                depth += 1;
            } else {
                break;
            }
        }
        match self.score(&q.id, &text, &self.cfg.p2, nonce) {
            Ok(fin) => Ok(Outcome::Scored(Box::new((text, q.background.clone(), depth, fin)))),
            Err(e) if e.is_backend() => Err(e),
            Err(e) => Ok(Outcome::Failed(format!("P2 scoring failed: {e}"))),
        }
    }

    /// Reflect/refine rounds on `q` while the P1 gain exceeds `τ` and depth
    /// allows, then one P2 score. The returned record carries the kept text,
    /// its depth and the P2 score (status `failed` if scoring failed).
    pub fn refine(&self, q: &QuestionRecord, general: &str, nonce: u64) -> Result<QuestionRecord, OptError> {
        let mut out = q.clone();
        match self.refine_inner(q, general, nonce)? {
            Outcome::Scored(b) => {
                let (text, _, depth, fin) = *b;
                out.text = text;
                out.depth = depth;
                out.score = Some(fin.score);
                out.question_labels = Some(fin.question_labels);
            }
            Outcome::Failed(why) => {
                out.status = QuestionStatus::Failed;
                out.note = Some(why);
            }
        }
        Ok(out)
    }

    /// One full pull; mutates `state` and returns the rows to append.
    pub fn pull(&self, state: &mut RunState) -> Result<Vec<QuestionRecord>, OptError> {
        let step = state.pulls_done + 1;
        let arm = ucb_select(&state.arms, state.budget)?;
        state.selections.push(Selection::record(step, arm, &state.arms));
        let general = state.questions[&state.arms[arm].general].text.clone();
        let mut corpus = self.live_corpus(state)?;

        let explored = self.explore_raw(state, arm, step).and_then(|(cands, ex)| {
            let mut s = state.clone();
            let r = self.triage(&mut s, arm, step, cands, &ex, corpus.clone())?;
            Ok((r, s.next_id))
        });
        let ((mut records, nonces), next_id) = match explored {
            Ok(x) => x,
            Err(e) if e.is_backend() => return Ok(self.abort(state, arm, step, Vec::new(), &e)),
            Err(e) => return Err(e),
        };
        state.next_id = next_id;

        let live: Vec<usize> = (0..records.len()).filter(|&i| records[i].status == QuestionStatus::Frontier).collect();
        let outcomes: Vec<Result<Outcome, OptError>> = live
            .par_iter()
            .map(|&i| self.refine_inner(&records[i], &general, nonces[i]))
            .collect();
        if let Some(e) = outcomes.iter().find_map(|o| o.as_ref().err()) {
            let e = e.clone();
            return Ok(self.abort(state, arm, step, records, &e));
        }

        let mut admitted_scores = Vec::new();
        let mut admitted = Vec::new();
        for (&i, outcome) in live.iter().zip(outcomes) {
            let rec = &mut records[i];
            match outcome.expect("errors handled above") {
                Outcome::Failed(why) => {
                    rec.status = QuestionStatus::Failed;
                    rec.note = Some(why);
                }
                Outcome::Scored(b) => {
                    let (text, _, depth, fin) = *b;
                    rec.text = text;
                    rec.depth = depth;
                    rec.score = Some(fin.score);
                    rec.question_labels = Some(fin.question_labels);
                    if let Some(n) = self.check_dup(&rec.text, &corpus)? {
                        rec.status = QuestionStatus::Duplicate;
                        rec.nearest = Some(n);
                    } else if let Some(Err(why)) = self.filter.as_ref().map(|f| f(&rec.text)) {
                        rec.status = QuestionStatus::Failed;
                        rec.note = Some(format!("rejected by admission filter: {why}"));
                    } else {
                        corpus.push((rec.id.clone(), self.embedder.embed(&rec.text)?));
                        admitted_scores.push(fin.score.composite);
                        admitted.push(rec.id.clone());
                    }
                }
            }
        }
        let a = &mut state.arms[arm];
        for r in records.iter().filter(|r| admitted.contains(&r.id)) {
            a.questions.push(r.id.clone());
            a.scores.push(r.composite().expect("admitted questions are scored"));
        }
        update_arm(a, &admitted_scores);
        state.trajectory.push(PullSummary {
            step,
            arm,
            candidates: records.iter().map(|r| r.id.clone()).collect(),
            admitted,
            duplicates: records.iter().filter(|r| r.status == QuestionStatus::Duplicate).count(),
            failures: records.iter().filter(|r| r.status == QuestionStatus::Failed).count(),
            mean_score: (!admitted_scores.is_empty()).then(|| mean(&admitted_scores)),
            aborted: None,
        });
        for r in &records {
            state.questions.insert(r.id.clone(), r.clone());
        }
        state.pulls_done = step;
        Ok(records)
    }

    fn abort(&self, state: &mut RunState, arm: usize, step: usize, mut records: Vec<QuestionRecord>, e: &OptError) -> Vec<QuestionRecord> {
        log::warn!("pull {step} aborted: {e}");
        for r in records.iter_mut().filter(|r| r.status == QuestionStatus::Frontier) {
            r.status = QuestionStatus::Failed;
            r.note = Some(format!("pull aborted: {e}"));
        }
        update_arm(&mut state.arms[arm], &[]);
        state.trajectory.push(PullSummary {
            step,
            arm,
            candidates: records.iter().map(|r| r.id.clone()).collect(),
            admitted: Vec::new(),
            duplicates: records.iter().filter(|r| r.status == QuestionStatus::Duplicate).count(),
            failures: records.iter().filter(|r| r.status == QuestionStatus::Failed).count(),
            mean_score: None,
            aborted: Some(e.to_string()),
        });
        for r in &records {
            state.questions.insert(r.id.clone(), r.clone());
        }
        state.pulls_done = step;
        records
    }

    /// Pulls until the budget is spent or `stop_after` pulls were made in
    /// this call. With `files`, rows are appended and the state checkpointed
    /// after every pull.
    pub fn run(&self, state: &mut RunState, files: Option<&RunFiles>, stop_after: Option<usize>) -> Result<RunSummary, OptError> {
        let mut made = 0;
        while state.pulls_done < state.budget && stop_after.is_none_or(|n| made < n) {
            let rows = self.pull(state)?;
            if let Some(f) = files {
                state.store_len = f.store.append(&rows)?;
                f.save(state)?;
            }
            made += 1;
        }
        Ok(state.summary())
    }

    /// Writes the seed rows and the initial checkpoint.
    pub fn persist_initial(&self, state: &mut RunState, files: &RunFiles) -> Result<(), OptError> {
        if !files.store.is_empty()? {
            return Err(OptError::Data(format!("{} already exists", files.store.path().display())));
        }
        let rows: Vec<QuestionRecord> = state.records().cloned().collect();
        state.store_len = files.store.append(&rows)?;
        files.save(state)
    }
}

/// Benchmark cut: live scored questions by composite (descending, id
/// ascending on ties), at or above `threshold`, at most `top_n`.
pub fn export_benchmark<'r>(
    records: impl IntoIterator<Item = &'r QuestionRecord>,
    threshold: Option<f64>,
    top_n: Option<usize>,
) -> Vec<QuestionRecord> {
    let mut rows: Vec<QuestionRecord> = records
        .into_iter()
        .filter(|q| q.status.is_live())
        .filter(|q| q.composite().is_some_and(|s| threshold.is_none_or(|t| s >= t)))
        .cloned()
        .collect();
    rows.sort_by(|a, b| {
        b.composite().unwrap_or(f64::MIN).total_cmp(&a.composite().unwrap_or(f64::MIN)).then_with(|| a.id.cmp(&b.id))
    });
    if let Some(n) = top_n {
        rows.truncate(n);
    }
    rows
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::backends::{Backend, BackendSpec, MockBackend, PersonaSpec, Registry};
    use crate::elicitation::Templates;
    use crate::values::ValueSystem;

    const SEEDS: &str = "# topics\nShould governments ban fossil fuel vehicles?\n\n{\"text\": \"Is it fair to tax inherited wealth heavily?\", \"topic\": \"tax\"}\n{\"text\": \"Should estates above a threshold be taxed?\", \"topic\": \"tax\"}\n";

    /// Fails every generation request; answers everything else like a mock.
    struct Flaky(MockBackend);

    impl Backend for Flaky {
        fn spec(&self) -> &BackendSpec {
            self.0.spec()
        }
        fn complete(&self, req: &CompletionRequest) -> Result<String, BackendError> {
            match req.task {
                Task::Explore | Task::Question => {
                    Err(BackendError::Unavailable { id: self.id().into(), attempts: 3, last: "503".into() })
                }
                _ => self.0.complete(req),
            }
        }
        fn embed(&self, text: &str) -> Result<Vec<f64>, BackendError> {
            self.0.embed(text)
        }
    }

    fn elicitor(flaky: bool) -> Elicitor {
        let system = Arc::new(ValueSystem::schwartz());
        let personas = [("a", ["tradition", "security"]), ("b", ["stimulation", "hedonism"]), ("c", ["power", "benevolence"])];
        let mut reg = Registry::new();
        for (id, dims) in personas {
            let spec = BackendSpec::mock(id, PersonaSpec::with_weights(dims.map(|d| (d, 0.4)), 3));
            let m = MockBackend::from_spec(spec, system.clone()).unwrap();
            if flaky && id == "a" {
                reg.insert(Arc::new(Flaky(m))).unwrap();
            } else {
                reg.insert(Arc::new(m)).unwrap();
            }
        }
        let judge = MockBackend::from_spec(BackendSpec::mock("judge", PersonaSpec::uniform(0.0, 0)), system.clone());
        reg.insert(Arc::new(judge.unwrap())).unwrap();
        Elicitor::new(Arc::new(reg), Arc::new(Templates::builtin()), system, "judge")
    }

    fn cfg(budget: usize) -> RunConfig {
        RunConfig {
            budget,
            p1: vec!["a".into(), "b".into()],
            p2: vec!["a".into(), "b".into(), "c".into()],
            judge: "judge".into(),
            ..RunConfig::default()
        }
    }

    #[test]
    fn seed_file_forms() {
        let rows = parse_seeds(SEEDS).unwrap();
        assert_eq!(rows.len(), 3);
        assert_eq!(rows[0].topic, None);
        assert_eq!(rows[2].topic.as_deref(), Some("tax"));
        assert!(parse_seeds("# nothing\n\n").is_err());
        assert!(matches!(parse_seeds("{\"txt\": 1}"), Err(OptError::Data(_))));
    }

    #[test]
    fn generated_reply_parsing() {
        let (a, q) = parse_generated("[Argument] : Towns differ.\n[Question]: Should towns ban cars?");
        assert_eq!(a.as_deref(), Some("Towns differ."));
        assert_eq!(q.as_deref(), Some("Should towns ban cars?"));
        assert_eq!(parse_generated("**[Question]:** Should towns ban cars?").1.as_deref(), Some("Should towns ban cars?"));
        assert_eq!(parse_generated("Should towns ban cars?").1.as_deref(), Some("Should towns ban cars?"));
        assert_eq!(parse_generated("[Question]: Towns should ban cars.").1, None);
        assert_eq!(parse_generated("no question here").1, None);
    }

    #[test]
    fn config_validation() {
        assert!(cfg(1).validate().is_ok());
        assert!(RunConfig { explore_width: 0, ..cfg(1) }.validate().is_err());
        assert!(RunConfig { p2: vec!["a".into()], ..cfg(1) }.validate().is_err());
        assert!(RunConfig { judge: String::new(), ..cfg(1) }.validate().is_err());
    }

    #[test]
    fn seeds_share_arms_by_topic() {
        let e = elicitor(false);
        let emb = Embedder::hashed();
        let opt = Optimizer::new(cfg(0), SimilarityConfig::default(), &e, &emb);
        let state = opt.ingest_seeds(&parse_seeds(SEEDS).unwrap()).unwrap();
        assert_eq!(state.arms.len(), 2);
        assert_eq!(state.arms[1].topic_id, "tax");
        assert_eq!(state.arms[1].questions.len(), 2);
        assert!(state.records().all(|q| q.status == QuestionStatus::Seed && q.score.is_some()));
        // B = 0: nothing happens
        let mut s = state.clone();
        assert_eq!(opt.run(&mut s, None, None).unwrap().pulls, 0);
        assert_eq!(s, state);
    }

    #[test]
    fn duplicate_seed_is_flagged() {
        let e = elicitor(false);
        let emb = Embedder::hashed();
        let opt = Optimizer::new(cfg(0), SimilarityConfig::default(), &e, &emb);
        let rows = parse_seeds("Should towns ban cars?\nShould towns ban cars?\n").unwrap();
        let state = opt.ingest_seeds(&rows).unwrap();
        let dup = &state.questions["q000001"];
        assert_eq!(dup.status, QuestionStatus::Duplicate);
        assert_eq!(dup.nearest.as_ref().unwrap().id, "q000000");
        assert_eq!(state.arms.len(), 1);
    }

    #[test]
    fn pulls_update_arms_and_log() {
        let e = elicitor(false);
        let emb = Embedder::hashed();
        let opt = Optimizer::new(cfg(4), SimilarityConfig::default(), &e, &emb);
        let mut state = opt.ingest_seeds(&parse_seeds(SEEDS).unwrap()).unwrap();
        let summary = opt.run(&mut state, None, None).unwrap();
        assert_eq!(summary.pulls, 4);
        assert_eq!(state.selections.len(), 4);
        assert_eq!(state.selections[0].chosen, 0);
        assert_eq!(state.selections[1].chosen, 1);
        assert_eq!(state.arms.iter().map(|a| a.count).sum::<u64>(), 4);
        for p in &state.trajectory {
            assert_eq!(p.candidates.len(), 3);
            for id in &p.admitted {
                let q = &state.questions[id];
                assert_eq!(q.status, QuestionStatus::Frontier);
                assert!(q.text.ends_with('?') && q.depth <= 3);
                assert_eq!(q.provenance.step, p.step);
                assert!(q.parent_id.is_some());
            }
        }
        for a in &state.arms {
            let means: Vec<f64> = a.pull_means.iter().flatten().copied().collect();
            if means.len() == a.pull_means.len() && !means.is_empty() {
                assert!((a.mean - mean(&means)).abs() < 1e-9);
            }
        }
        assert!(summary.questions_created > 0);
    }

    #[test]
    fn filter_rejects_before_admission() {
        let e = elicitor(false);
        let emb = Embedder::hashed();
        let opt = Optimizer::new(cfg(1), SimilarityConfig::default(), &e, &emb)
            .with_filter(Arc::new(|_: &str| Err("blocked".to_string())));
        let mut state = opt.ingest_seeds(&parse_seeds(SEEDS).unwrap()).unwrap();
        opt.run(&mut state, None, None).unwrap();
        let p = &state.trajectory[0];
        assert!(p.admitted.is_empty() && p.mean_score.is_none());
        assert_eq!(state.arms[0].count, 1);
        assert!(state.records().any(|q| q.note.as_deref().is_some_and(|n| n.contains("blocked"))));
    }

    #[test]
    fn backend_outage_aborts_the_pull() {
        let e = elicitor(true);
        let emb = Embedder::hashed();
        let opt = Optimizer::new(cfg(2), SimilarityConfig::default(), &e, &emb);
        let mut state = opt.ingest_seeds(&parse_seeds(SEEDS).unwrap()).unwrap();
        let summary = opt.run(&mut state, None, None).unwrap();
        assert_eq!(summary.pulls, 2);
        assert!(state.trajectory.iter().all(|p| p.aborted.is_some() && p.admitted.is_empty()));
        assert_eq!(state.arms[0].count, 1);
        assert_eq!(state.arms[0].pull_means, vec![None]);
    }

    #[test]
    fn resume_replays_byte_identically() {
        let e = elicitor(false);
        let emb = Embedder::hashed();
        let opt = Optimizer::new(cfg(5), SimilarityConfig::default(), &e, &emb);
        let seeds = parse_seeds(SEEDS).unwrap();

        let full_dir = tempfile::tempdir().unwrap();
        let full = RunFiles::in_dir(full_dir.path());
        let mut s = opt.ingest_seeds(&seeds).unwrap();
        opt.persist_initial(&mut s, &full).unwrap();
        opt.run(&mut s, Some(&full), None).unwrap();

        let cut_dir = tempfile::tempdir().unwrap();
        let cut = RunFiles::in_dir(cut_dir.path());
        let mut s = opt.ingest_seeds(&seeds).unwrap();
        opt.persist_initial(&mut s, &cut).unwrap();
        opt.run(&mut s, Some(&cut), Some(2)).unwrap();
        // rows written after the checkpoint are discarded on resume
        cut.store.append(&[s.questions["q000000"].clone()]).unwrap();
        let mut s = cut.resume().unwrap();
        assert_eq!(s.pulls_done, 2);
        opt.run(&mut s, Some(&cut), None).unwrap();

        let read = |f: &RunFiles| std::fs::read(f.store.path()).unwrap();
        assert_eq!(read(&full), read(&cut));
        assert_eq!(std::fs::read_to_string(&full.checkpoint).unwrap(), std::fs::read_to_string(&cut.checkpoint).unwrap());
        assert!(opt.persist_initial(&mut s, &cut).is_err());
    }

    #[test]
    fn export_orders_and_cuts() {
        let mk = |id: &str, score: Option<f64>, status| QuestionRecord {
            id: id.into(),
            text: format!("{id}?"),
            topic_id: "t".into(),
            parent_id: None,
            depth: 0,
            score: score.map(|s| ScoreBreakdown::new(s, 0.0, 0.0, 0.0)),
            status,
            provenance: Provenance { generator: "g".into(), run_id: "r".into(), step: 0, timestamp: 0 },
            question_labels: None,
            background: None,
            nearest: None,
            note: None,
        };
        let rows = [
            mk("q1", Some(2.0), QuestionStatus::Seed),
            mk("q2", Some(5.0), QuestionStatus::Frontier),
            mk("q3", Some(9.0), QuestionStatus::Duplicate),
            mk("q4", Some(5.0), QuestionStatus::Frontier),
            mk("q5", None, QuestionStatus::Failed),
        ];
        let ids = |v: Vec<QuestionRecord>| v.into_iter().map(|r| r.id).collect::<Vec<_>>();
        assert_eq!(ids(export_benchmark(&rows, None, None)), ["q2", "q4", "q1"]);
        assert_eq!(ids(export_benchmark(&rows, Some(3.0), None)), ["q2", "q4"]);
        assert_eq!(ids(export_benchmark(&rows, None, Some(1))), ["q2"]);
    }
}
