//! Internal consistency of leaderboards computed on disjoint question folds.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::AnalysisError;
use crate::ranking::{process_run, RankingConfig, ResponseTable};
use crate::values::ValueSystem;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReliabilityReport {
    pub cronbach_alpha: f64,
    /// Mean over (model, dimension) cells of the fold-to-fold coefficient of
    /// variation.
    pub cv: f64,
    /// Mean over fold pairs.
    pub pearson: f64,
    pub spearman: f64,
    pub folds: usize,
}

fn sample_var(xs: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let m = xs.iter().sum::<f64>() / n;
    xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (n - 1.0)
}

/// `k/(k-1) · (1 - Σ var(item) / var(total))` with sample variances.
/// `items[i][r]` is respondent `r`'s score on item `i`.
pub fn cronbach_alpha(items: &[Vec<f64>]) -> Result<f64, AnalysisError> {
    let k = items.len();
    if k < 2 {
        return Err(AnalysisError::Input(format!("alpha needs at least 2 items, got {k}")));
    }
    let n = items[0].len();
    if n < 2 {
        return Err(AnalysisError::Input(format!("alpha needs at least 2 respondents, got {n}")));
    }
    if items.iter().any(|i| i.len() != n) {
        return Err(AnalysisError::Input("items have different respondent counts".into()));
    }
    let totals: Vec<f64> = (0..n).map(|r| items.iter().map(|i| i[r]).sum()).collect();
    let total_var = sample_var(&totals);
    if total_var == 0.0 {
        return Err(AnalysisError::Statistic("total-score variance is zero".into()));
    }
    let item_var: f64 = items.iter().map(|i| sample_var(i)).sum();
    let k = k as f64;
    Ok(k / (k - 1.0) * (1.0 - item_var / total_var))
}

pub fn pearson(a: &[f64], b: &[f64]) -> Result<f64, AnalysisError> {
    if a.len() != b.len() || a.len() < 2 {
        return Err(AnalysisError::Input("correlation needs two equal series of length >= 2".into()));
    }
    let n = a.len() as f64;
    let (ma, mb) = (a.iter().sum::<f64>() / n, b.iter().sum::<f64>() / n);
    let cov: f64 = a.iter().zip(b).map(|(x, y)| (x - ma) * (y - mb)).sum();
    let va: f64 = a.iter().map(|x| (x - ma) * (x - ma)).sum();
    let vb: f64 = b.iter().map(|y| (y - mb) * (y - mb)).sum();
    if va == 0.0 || vb == 0.0 {
        return Err(AnalysisError::Statistic("correlation of a constant series".into()));
    }
    Ok((cov / (va * vb).sqrt()).clamp(-1.0, 1.0))
}

/// 1-based ranks, ties sharing their average rank.
pub fn ranks(xs: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..xs.len()).collect();
    idx.sort_by(|&i, &j| xs[i].total_cmp(&xs[j]));
    let mut out = vec![0.0; xs.len()];
    let mut s = 0;
    while s < idx.len() {
        let mut e = s;
        while e + 1 < idx.len() && xs[idx[e + 1]] == xs[idx[s]] {
            e += 1;
        }
        let avg = (s + e) as f64 / 2.0 + 1.0;
        for &i in &idx[s..=e] {
            out[i] = avg;
        }
        s = e + 1;
    }
    out
}

/// Pearson correlation of tie-averaged ranks.
pub fn spearman(a: &[f64], b: &[f64]) -> Result<f64, AnalysisError> {
    pearson(&ranks(a), &ranks(b))
}

/// Shuffles the ids with `seed` and deals them round-robin into `k` folds.
pub fn fold_split(ids: &[String], k: usize, seed: u64) -> Result<Vec<Vec<String>>, AnalysisError> {
    if k < 2 {
        return Err(AnalysisError::Input(format!("need k >= 2 folds, got {k}")));
    }
    if ids.len() < k {
        return Err(AnalysisError::Input(format!("{} questions cannot fill {k} folds", ids.len())));
    }
    let mut ids = ids.to_vec();
    ids.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let mut folds = vec![Vec::new(); k];
    for (i, id) in ids.into_iter().enumerate() {
        folds[i % k].push(id);
    }
    for f in &mut folds {
        f.sort();
    }
    Ok(folds)
}

/// Ranks each fold separately and compares the leaderboards. Folds are the
/// items; (model, dimension) cells are the respondents.
pub fn reliability_over_folds(
    table: &ResponseTable,
    folds: &[Vec<String>],
    models: &[String],
    system: &ValueSystem,
    cfg: &RankingConfig,
) -> Result<ReliabilityReport, AnalysisError> {
    if folds.len() < 2 {
        return Err(AnalysisError::Input("need at least 2 folds".into()));
    }
    let boards: Vec<Vec<f64>> = folds
        .par_iter()
        .map(|fold| {
            let sub: ResponseTable = fold
                .iter()
                .map(|q| {
                    table
                        .get(q)
                        .map(|v| (q.clone(), v.clone()))
                        .ok_or_else(|| AnalysisError::Input(format!("no responses for question `{q}`")))
                })
                .collect::<Result<_, _>>()?;
            let out = process_run(&sub, models, system, cfg, None, None)?;
            Ok(out.leaderboard.into_iter().flat_map(|p| p.scores).collect())
        })
        .collect::<Result<_, AnalysisError>>()?;

    let alpha = cronbach_alpha(&boards)?;
    let cells = boards[0].len();
    let cv = (0..cells)
        .map(|c| {
            let xs: Vec<f64> = boards.iter().map(|b| b[c]).collect();
            let m = xs.iter().sum::<f64>() / xs.len() as f64;
            if m == 0.0 { 0.0 } else { sample_var(&xs).sqrt() / m.abs() }
        })
        .sum::<f64>()
        / cells as f64;
    let mut p = Vec::new();
    let mut s = Vec::new();
    for i in 0..boards.len() {
        for j in i + 1..boards.len() {
            p.push(pearson(&boards[i], &boards[j])?);
            s.push(spearman(&boards[i], &boards[j])?);
        }
    }
    Ok(ReliabilityReport {
        cronbach_alpha: alpha,
        cv,
        pearson: p.iter().sum::<f64>() / p.len() as f64,
        spearman: s.iter().sum::<f64>() / s.len() as f64,
        folds: folds.len(),
    })
}

/// [`fold_split`] over every question in `table`, then
/// [`reliability_over_folds`].
pub fn kfold_reliability(
    table: &ResponseTable,
    k: usize,
    seed: u64,
    models: &[String],
    system: &ValueSystem,
    cfg: &RankingConfig,
) -> Result<ReliabilityReport, AnalysisError> {
    let ids: Vec<String> = table.keys().cloned().collect();
    let folds = fold_split(&ids, k, seed)?;
    reliability_over_folds(table, &folds, models, system, cfg)
}
