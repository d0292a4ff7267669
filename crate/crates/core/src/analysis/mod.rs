//! Benchmark statistics, fold reliability, priming and report output.

pub mod diversity;
pub mod priming;
pub mod reliability;
pub mod report;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::backends::BackendError;
use crate::elicitation::ElicitError;
use crate::optimizer::OptError;
use crate::ranking::RankError;
use crate::scoring::Embedder;
use crate::values::ValuesError;

pub use diversity::{avg_similarity, distinct_n, self_bleu};
pub use priming::{priming_experiment, Panel, PrimingReport};
pub use reliability::{cronbach_alpha, fold_split, kfold_reliability, pearson, reliability_over_folds, spearman, ReliabilityReport};
pub use report::{emit_report, load_report, radar_svg, ReportDoc, ReportFormat};

#[derive(Debug, Error)]
pub enum AnalysisError {
    #[error("undefined input: {0}")]
    Input(String),
    #[error("undefined statistic: {0}")]
    Statistic(String),
    #[error(transparent)]
    Backend(#[from] BackendError),
    #[error(transparent)]
    Elicit(#[from] ElicitError),
    #[error(transparent)]
    Rank(#[from] RankError),
    #[error(transparent)]
    Values(#[from] ValuesError),
    #[error(transparent)]
    Store(#[from] OptError),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusStats {
    pub count: usize,
    /// Whitespace-separated words per question.
    pub avg_length: f64,
    /// In `[0, 100]`; lower is more diverse.
    pub self_bleu: f64,
    pub distinct_2: f64,
    /// Mean best-match cosine to the reference corpus.
    pub avg_similarity: f64,
}

/// All corpus columns at once. `reference` is the corpus novelty is measured
/// against.
pub fn corpus_stats(
    corpus: &[impl AsRef<str> + Sync],
    reference: &[impl AsRef<str> + Sync],
    embedder: &Embedder,
) -> Result<CorpusStats, AnalysisError> {
    let words: usize = corpus.iter().map(|t| t.as_ref().split_whitespace().count()).sum();
    Ok(CorpusStats {
        count: corpus.len(),
        avg_length: words as f64 / corpus.len().max(1) as f64,
        self_bleu: self_bleu(corpus)?,
        distinct_2: distinct_n(corpus, 2)?,
        avg_similarity: avg_similarity(corpus, reference, embedder)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stats_bounds() {
        let c = ["Should cities ban cars downtown?", "Is it fair to tax inherited wealth?", "Should art be publicly funded?"];
        let s = corpus_stats(&c, &c[..1], &Embedder::hashed()).unwrap();
        assert_eq!(s.count, 3);
        assert!((s.avg_length - 17.0 / 3.0).abs() < 1e-12);
        assert!((0.0..=100.0).contains(&s.self_bleu));
        assert!((0.0..=1.0).contains(&s.distinct_2) && (0.0..=1.0).contains(&s.avg_similarity));
    }
}
