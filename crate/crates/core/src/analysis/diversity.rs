//! Lexical and semantic diversity of a question corpus.

use std::collections::HashMap;

use rayon::prelude::*;

use super::AnalysisError;
use crate::scoring::Embedder;
use crate::text::{cosine, tokenize};

/// Highest n-gram order used by Self-BLEU.
pub const BLEU_ORDER: usize = 4;
/// Stand-in match count for an order with no matching n-gram.
pub const BLEU_EPSILON: f64 = 1e-9;

type Counts<'a> = HashMap<&'a [String], usize>;

fn ngram_counts(tokens: &[String], n: usize) -> Counts<'_> {
    let mut out = HashMap::new();
    if tokens.len() >= n {
        for g in tokens.windows(n) {
            *out.entry(g).or_insert(0) += 1;
        }
    }
    out
}

/// Per-order `(clipped matches, hypothesis n-grams)` of `hyp` against the
/// references. The clip is the maximum count in any single reference.
pub fn clipped_matches(hyp: &[String], refs: &[&[String]]) -> [(usize, usize); BLEU_ORDER] {
    let mut out = [(0, 0); BLEU_ORDER];
    for (i, slot) in out.iter_mut().enumerate() {
        let n = i + 1;
        let h = ngram_counts(hyp, n);
        let r: Vec<Counts> = refs.iter().map(|t| ngram_counts(t, n)).collect();
        let matched = h
            .iter()
            .map(|(g, c)| (*c).min(r.iter().map(|m| m.get(g).copied().unwrap_or(0)).max().unwrap_or(0)))
            .sum();
        *slot = (matched, hyp.len().saturating_sub(n - 1));
    }
    out
}

/// Smoothed BLEU-4 in `[0, 1]` from match counts and lengths. An order with
/// no match (or no n-gram at all) contributes `ε / max(total, 1)`; the
/// brevity penalty uses the reference length closest to the hypothesis,
/// shorter on ties.
pub fn bleu_from_counts(counts: &[(usize, usize); BLEU_ORDER], hyp_len: usize, ref_lens: &[usize]) -> f64 {
    if hyp_len == 0 {
        return 0.0;
    }
    let log_p: f64 = counts
        .iter()
        .map(|&(m, t)| {
            let m = if m == 0 { BLEU_EPSILON } else { m as f64 };
            (m / t.max(1) as f64).ln()
        })
        .sum::<f64>()
        / BLEU_ORDER as f64;
    let r = ref_lens
        .iter()
        .copied()
        .min_by_key(|&r| (r.abs_diff(hyp_len), r))
        .unwrap_or(hyp_len);
    let bp = if hyp_len > r { 1.0 } else { (1.0 - r as f64 / hyp_len as f64).exp() };
    bp * log_p.exp()
}

/// Mean BLEU-4 of every text against all the others, ×100. Lower is more
/// diverse.
pub fn self_bleu(corpus: &[impl AsRef<str> + Sync]) -> Result<f64, AnalysisError> {
    if corpus.len() < 2 {
        return Err(AnalysisError::Input(format!("self-BLEU needs at least 2 texts, got {}", corpus.len())));
    }
    let toks: Vec<Vec<String>> = corpus.iter().map(|t| tokenize(t.as_ref())).collect();
    let scores: Vec<f64> = (0..toks.len())
        .into_par_iter()
        .map(|i| {
            let refs: Vec<&[String]> =
                toks.iter().enumerate().filter(|(j, _)| *j != i).map(|(_, t)| t.as_slice()).collect();
            let lens: Vec<usize> = refs.iter().map(|r| r.len()).collect();
            bleu_from_counts(&clipped_matches(&toks[i], &refs), toks[i].len(), &lens)
        })
        .collect();
    Ok(100.0 * scores.iter().sum::<f64>() / scores.len() as f64)
}

/// Unique n-grams over total n-grams, pooled across texts. N-grams never
/// span two texts.
pub fn distinct_n(corpus: &[impl AsRef<str>], n: usize) -> Result<f64, AnalysisError> {
    if n == 0 {
        return Err(AnalysisError::Input("distinct-n needs n >= 1".into()));
    }
    let toks: Vec<Vec<String>> = corpus.iter().map(|t| tokenize(t.as_ref())).collect();
    let mut seen: HashMap<&[String], ()> = HashMap::new();
    let mut total = 0usize;
    for t in &toks {
        if t.len() >= n {
            for g in t.windows(n) {
                seen.insert(g, ());
                total += 1;
            }
        }
    }
    if total == 0 {
        return Err(AnalysisError::Input(format!("corpus has no {n}-gram")));
    }
    Ok(seen.len() as f64 / total as f64)
}

/// Mean over `corpus` of the best cosine similarity to any reference text,
/// clamped to `[0, 1]`.
pub fn avg_similarity(
    corpus: &[impl AsRef<str> + Sync],
    reference: &[impl AsRef<str> + Sync],
    embedder: &Embedder,
) -> Result<f64, AnalysisError> {
    if corpus.is_empty() || reference.is_empty() {
        return Err(AnalysisError::Input("similarity needs a non-empty corpus and reference".into()));
    }
    let refs: Vec<Vec<f64>> = reference.par_iter().map(|t| embedder.embed(t.as_ref())).collect::<Result<_, _>>()?;
    let best: Vec<f64> = corpus
        .par_iter()
        .map(|t| {
            let v = embedder.embed(t.as_ref())?;
            Ok(refs.iter().map(|r| cosine(&v, r)).fold(f64::NEG_INFINITY, f64::max).clamp(0.0, 1.0))
        })
        .collect::<Result<_, AnalysisError>>()?;
    Ok(best.iter().sum::<f64>() / best.len() as f64)
}
