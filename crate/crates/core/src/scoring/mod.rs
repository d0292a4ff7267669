//! Informativeness score of a question and the similarity helpers behind it.
//!
//! `S = R_VC + R_VD + R_OD - R_Dis / 2`, computed over the labeled answers of
//! `K >= 2` models. Set-size ratios divide by `max(|∩|, 1)`; opinion
//! diversity is one minus the mean similarity over model pairs, so it stays
//! in `[0, 1]`.

use std::collections::{BTreeMap, HashMap};
use std::sync::{Arc, Mutex};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::backends::{mock_embedding, BackendError, Registry};
use crate::elicitation::ElicitedResponse;
use crate::text::{cosine, mean, tokenize};
use crate::values::{l1_distance, ValueVector, ValuesError};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ScoreError {
    #[error("need at least {need} {what}, got {got}")]
    TooFew { what: &'static str, need: usize, got: usize },
    #[error("response from `{0}` has no opinions")]
    NoOpinions(String),
    #[error(transparent)]
    Values(#[from] ValuesError),
    #[error(transparent)]
    Backend(#[from] BackendError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SimilarityMode {
    /// Greedy-F when an embed backend is configured, token-F1 otherwise.
    #[default]
    Auto,
    EmbeddingGreedyF,
    TokenF1,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimilarityConfig {
    pub mode: SimilarityMode,
    /// ε: candidates at or above this similarity are duplicates.
    pub dedup_threshold: f64,
    pub topk: usize,
}

impl Default for SimilarityConfig {
    fn default() -> Self {
        SimilarityConfig { mode: SimilarityMode::Auto, dedup_threshold: 0.85, topk: 3 }
    }
}

impl SimilarityConfig {
    pub fn validate(&self) -> Result<(), String> {
        if !(self.dedup_threshold > 0.0 && self.dedup_threshold < 1.0) {
            return Err(format!("dedup_threshold must be in (0, 1), got {}", self.dedup_threshold));
        }
        if self.topk == 0 {
            return Err("topk must be >= 1".into());
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScoreBreakdown {
    pub r_vc: f64,
    pub r_vd: f64,
    pub r_od: f64,
    pub r_dis: f64,
    pub composite: f64,
}

impl ScoreBreakdown {
    pub fn new(r_vc: f64, r_vd: f64, r_od: f64, r_dis: f64) -> Self {
        ScoreBreakdown { r_vc, r_vd, r_od, r_dis, composite: r_vc + r_vd + r_od - 0.5 * r_dis }
    }
}

/// `|a ∪ b| / max(|a ∩ b|, 1)`; 0 when both are empty.
pub fn jaccard_diversity(a: &ValueVector, b: &ValueVector) -> Result<f64, ValuesError> {
    a.check_compatible(b)?;
    let union = a.union_count(b);
    if union == 0 {
        return Ok(0.0);
    }
    Ok(union as f64 / a.intersection_count(b).max(1) as f64)
}

/// R_VD: Jaccard diversity summed over ordered pairs `i != j`.
pub fn value_diversity(vectors: &[&ValueVector]) -> Result<f64, ScoreError> {
    if vectors.len() < 2 {
        return Err(ScoreError::TooFew { what: "value vectors", need: 2, got: vectors.len() });
    }
    let mut sum = 0.0;
    for (i, a) in vectors.iter().enumerate() {
        for (j, b) in vectors.iter().enumerate() {
            if i != j {
                sum += jaccard_diversity(a, b)?;
            }
        }
    }
    Ok(sum)
}

/// R_VC for one model: `|∪ opinions| / max(|∩ opinions|, 1)`.
pub fn value_conformity(opinions: &[&ValueVector]) -> Result<f64, ScoreError> {
    let (first, rest) = opinions
        .split_first()
        .ok_or(ScoreError::TooFew { what: "opinion vectors", need: 1, got: 0 })?;
    let d = first.len();
    let mut union = vec![false; d];
    let mut inter = vec![true; d];
    for v in std::iter::once(first).chain(rest) {
        first.check_compatible(v)?;
        for k in 0..d {
            union[k] |= v.bit(k);
            inter[k] &= v.bit(k);
        }
    }
    let u = union.iter().filter(|&&b| b).count();
    let i = inter.iter().filter(|&&b| b).count();
    Ok(u as f64 / i.max(1) as f64)
}

/// R_Dis: L1 distance between the response and question vectors.
pub fn disentanglement(response: &ValueVector, question: &ValueVector) -> Result<f64, ValuesError> {
    l1_distance(response, question)
}

/// Unigram-overlap F1 with clipped counts. Two empty texts are identical.
pub fn token_f1(a: &str, b: &str) -> f64 {
    let (ta, tb) = (tokenize(a), tokenize(b));
    if ta.is_empty() && tb.is_empty() {
        return 1.0;
    }
    if ta.is_empty() || tb.is_empty() {
        return 0.0;
    }
    let mut counts: HashMap<&str, i64> = HashMap::new();
    for t in &tb {
        *counts.entry(t).or_default() += 1;
    }
    let mut overlap = 0usize;
    for t in &ta {
        if let Some(c) = counts.get_mut(t.as_str()) {
            if *c > 0 {
                *c -= 1;
                overlap += 1;
            }
        }
    }
    if overlap == 0 {
        return 0.0;
    }
    let p = overlap as f64 / ta.len() as f64;
    let r = overlap as f64 / tb.len() as f64;
    2.0 * p * r / (p + r)
}

/// Text embeddings from a configured backend, or the hashed mock embedding
/// when none is configured. Results are memoized.
pub struct Embedder {
    registry: Option<Arc<Registry>>,
    backend: Option<String>,
    cache: Mutex<HashMap<String, Vec<f64>>>,
}

impl std::fmt::Debug for Embedder {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Embedder").field("backend", &self.backend).finish()
    }
}

impl Embedder {
    pub fn hashed() -> Self {
        Embedder { registry: None, backend: None, cache: Mutex::new(HashMap::new()) }
    }

    pub fn backend(registry: Arc<Registry>, id: &str) -> Self {
        Embedder { registry: Some(registry), backend: Some(id.to_string()), cache: Mutex::new(HashMap::new()) }
    }

    pub fn is_backed(&self) -> bool {
        self.backend.is_some()
    }

    pub fn embed(&self, text: &str) -> Result<Vec<f64>, BackendError> {
        if let Some(v) = self.cache.lock().expect("cache poisoned").get(text) {
            return Ok(v.clone());
        }
        let v = match (&self.registry, &self.backend) {
            (Some(r), Some(id)) => r.embed(id, text)?,
            _ => mock_embedding(text)?,
        };
        self.cache.lock().expect("cache poisoned").insert(text.to_string(), v.clone());
        Ok(v)
    }
}

/// Greedy-matching F-score over token embeddings: each token is matched to
/// its most similar token on the other side.
pub fn greedy_f(a: &str, b: &str, embedder: &Embedder) -> Result<f64, BackendError> {
    let (ta, tb) = (tokenize(a), tokenize(b));
    if ta.is_empty() || tb.is_empty() {
        return Ok(if ta.is_empty() && tb.is_empty() { 1.0 } else { 0.0 });
    }
    let ea = ta.iter().map(|t| embedder.embed(t)).collect::<Result<Vec<_>, _>>()?;
    let eb = tb.iter().map(|t| embedder.embed(t)).collect::<Result<Vec<_>, _>>()?;
    let best = |xs: &[Vec<f64>], ys: &[Vec<f64>]| {
        mean(&xs.iter().map(|x| ys.iter().map(|y| cosine(x, y)).fold(f64::MIN, f64::max)).collect::<Vec<_>>())
    };
    let p = best(&ea, &eb);
    let r = best(&eb, &ea);
    Ok(if p + r <= 0.0 { 0.0 } else { 2.0 * p * r / (p + r) })
}

/// Opinion-text similarity in the resolved mode.
pub enum OpinionSimilarity<'a> {
    TokenF1,
    GreedyF(&'a Embedder),
}

impl OpinionSimilarity<'_> {
    pub fn similarity(&self, a: &str, b: &str) -> Result<f64, ScoreError> {
        Ok(match self {
            OpinionSimilarity::TokenF1 => token_f1(a, b),
            OpinionSimilarity::GreedyF(e) => greedy_f(a, b, e)?,
        })
    }
}

/// Similarity of two opinion sets: every opinion is matched to its most
/// similar counterpart on the other side, and the two directional means are
/// combined as an F-score. Identical sets score 1.
pub fn set_similarity(a: &[String], b: &[String], sim: &OpinionSimilarity) -> Result<f64, ScoreError> {
    let mut m = vec![vec![0.0; b.len()]; a.len()];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            m[i][j] = sim.similarity(x, y)?;
        }
    }
    let p = mean(&m.iter().map(|row| row.iter().copied().fold(0.0, f64::max)).collect::<Vec<_>>());
    let r = mean(&(0..b.len()).map(|j| m.iter().map(|row| row[j]).fold(0.0, f64::max)).collect::<Vec<_>>());
    Ok(if p + r <= 0.0 { 0.0 } else { 2.0 * p * r / (p + r) })
}

/// R_OD: one minus the mean set similarity over unordered model pairs,
/// clamped to [0, 1].
pub fn opinion_diversity(responses: &[&ElicitedResponse], sim: &OpinionSimilarity) -> Result<f64, ScoreError> {
    if responses.len() < 2 {
        return Err(ScoreError::TooFew { what: "responses", need: 2, got: responses.len() });
    }
    if let Some(r) = responses.iter().find(|r| r.opinions.is_empty()) {
        return Err(ScoreError::NoOpinions(r.model.clone()));
    }
    let texts: Vec<Vec<String>> = responses.iter().map(|r| r.opinions.iter().map(|o| o.text()).collect()).collect();
    let mut pair_sims = Vec::new();
    for i in 0..texts.len() {
        for j in i + 1..texts.len() {
            pair_sims.push(set_similarity(&texts[i], &texts[j], sim)?);
        }
    }
    Ok((1.0 - mean(&pair_sims)).clamp(0.0, 1.0))
}

/// Score of one question from its `K >= 2` labeled answers. R_VC and R_Dis
/// are averaged over models.
pub fn composite_score(
    responses: &[&ElicitedResponse],
    question: &ValueVector,
    sim: &OpinionSimilarity,
) -> Result<ScoreBreakdown, ScoreError> {
    if responses.len() < 2 {
        return Err(ScoreError::TooFew { what: "responses", need: 2, got: responses.len() });
    }
    let mut vcs = Vec::with_capacity(responses.len());
    let mut dis = Vec::with_capacity(responses.len());
    for r in responses {
        let ops = r.opinion_vectors();
        if ops.is_empty() {
            return Err(ScoreError::NoOpinions(r.model.clone()));
        }
        vcs.push(value_conformity(&ops)?);
        dis.push(disentanglement(&r.vector, question)?);
    }
    let vectors: Vec<&ValueVector> = responses.iter().map(|r| &r.vector).collect();
    let r_vd = value_diversity(&vectors)?;
    let r_od = opinion_diversity(responses, sim)?;
    Ok(ScoreBreakdown::new(mean(&vcs), r_vd, r_od, mean(&dis)))
}

/// Mean cosine similarity of `candidate` to its `topk` nearest corpus
/// embeddings (fewer if the corpus is smaller); 0 for an empty corpus.
pub fn corpus_similarity(candidate: &[f64], corpus: &[Vec<f64>], topk: usize) -> f64 {
    let mut sims: Vec<f64> = corpus.iter().map(|c| cosine(candidate, c)).collect();
    if sims.is_empty() {
        return 0.0;
    }
    sims.sort_by(|a, b| b.total_cmp(a));
    sims.truncate(topk.max(1));
    mean(&sims)
}

/// Index and similarity of the closest corpus entry (lowest index on ties).
pub fn nearest(candidate: &[f64], corpus: &[Vec<f64>]) -> Option<(usize, f64)> {
    let mut best: Option<(usize, f64)> = None;
    for (i, c) in corpus.iter().enumerate() {
        let s = cosine(candidate, c);
        if best.is_none_or(|(_, b)| s > b) {
            best = Some((i, s));
        }
    }
    best
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DedupVerdict {
    pub duplicate: bool,
    pub topk_similarity: f64,
    pub nearest: Option<(usize, f64)>,
}

/// Duplicate iff the top-k mean or the single nearest similarity reaches ε.
/// The nearest-neighbour arm is what makes an exact repeat a duplicate when
/// the rest of the corpus is dissimilar.
pub fn dedup_check(candidate: &[f64], corpus: &[Vec<f64>], cfg: &SimilarityConfig) -> DedupVerdict {
    let topk = corpus_similarity(candidate, corpus, cfg.topk);
    let near = nearest(candidate, corpus);
    let eps = cfg.dedup_threshold;
    DedupVerdict { duplicate: topk >= eps || near.is_some_and(|(_, s)| s >= eps), topk_similarity: topk, nearest: near }
}

/// Component means across questions, keyed by component name.
pub fn summarize(scores: &[ScoreBreakdown]) -> BTreeMap<&'static str, f64> {
    let col = |f: fn(&ScoreBreakdown) -> f64| mean(&scores.iter().map(f).collect::<Vec<_>>());
    BTreeMap::from([
        ("r_vc", col(|s| s.r_vc)),
        ("r_vd", col(|s| s.r_vd)),
        ("r_od", col(|s| s.r_od)),
        ("r_dis", col(|s| s.r_dis)),
        ("composite", col(|s| s.composite)),
    ])
}
