//! UCB arm selection and incremental-mean updates.

use serde::{Deserialize, Serialize};

use super::OptError;
use crate::text::mean;

/// Bandit statistics of one topic arm.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArmState {
    pub topic_id: String,
    /// Id of the question that fills the general-argument slot.
    pub general: String,
    /// X_i: question ids in admission order.
    pub questions: Vec<String>,
    /// S_i: their final composite scores.
    pub scores: Vec<f64>,
    /// C_i: completed pulls.
    pub count: u64,
    /// Q_i: running mean of per-pull MEAN(Ŝ).
    pub mean: f64,
    /// MEAN(Ŝ) per pull; `None` where the pull admitted nothing.
    pub pull_means: Vec<Option<f64>>,
}

impl ArmState {
    pub fn new(topic_id: &str, general: &str) -> Self {
        ArmState {
            topic_id: topic_id.to_string(),
            general: general.to_string(),
            questions: Vec::new(),
            scores: Vec::new(),
            count: 0,
            mean: 0.0,
            pull_means: Vec::new(),
        }
    }

    /// `(C, Q)` alone, for synthetic bandit runs.
    pub fn with_stats(count: u64, mean: f64) -> Self {
        let mut a = ArmState::new("", "");
        a.count = count;
        a.mean = mean;
        a
    }
}

/// `Q + sqrt(2 ln B / C)`.
pub fn ucb_value(arm: &ArmState, budget: usize) -> f64 {
    arm.mean + (2.0 * (budget as f64).ln() / arm.count as f64).sqrt()
}

/// Unpulled arms first (lowest index), then argmax of `Q + sqrt(2 ln B / C)`
/// with ties to the lowest index.
pub fn ucb_select(arms: &[ArmState], budget: usize) -> Result<usize, OptError> {
    if arms.is_empty() {
        return Err(OptError::Data("no arms to select from".into()));
    }
    if let Some(i) = arms.iter().position(|a| a.count == 0) {
        return Ok(i);
    }
    let mut best = 0;
    let mut best_v = f64::NEG_INFINITY;
    for (i, a) in arms.iter().enumerate() {
        let v = ucb_value(a, budget);
        if v > best_v {
            best = i;
            best_v = v;
        }
    }
    Ok(best)
}

/// `C += 1`, then `Q += (MEAN(Ŝ) - Q) / C`. An empty `Ŝ` still counts as a
/// pull but leaves `Q` alone.
pub fn update_arm(arm: &mut ArmState, new_scores: &[f64]) {
    arm.count += 1;
    if new_scores.is_empty() {
        arm.pull_means.push(None);
        return;
    }
    let m = mean(new_scores);
    arm.mean += (m - arm.mean) / arm.count as f64;
    arm.pull_means.push(Some(m));
}

/// Strict form of [`update_arm`] for callers that treat an empty `Ŝ` as a
/// contract violation.
pub fn try_update_arm(arm: &mut ArmState, new_scores: &[f64]) -> Result<(), OptError> {
    if new_scores.is_empty() {
        return Err(OptError::Data("update_arm needs at least one score".into()));
    }
    update_arm(arm, new_scores);
    Ok(())
}

/// One logged selection: the `(C, Q)` table the decision was made from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Selection {
    pub step: usize,
    pub chosen: usize,
    pub counts: Vec<u64>,
    pub means: Vec<f64>,
}

impl Selection {
    pub fn record(step: usize, chosen: usize, arms: &[ArmState]) -> Self {
        Selection {
            step,
            chosen,
            counts: arms.iter().map(|a| a.count).collect(),
            means: arms.iter().map(|a| a.mean).collect(),
        }
    }
}
