//! Per-(model, dimension) skill ratings from value-expression contests.
//!
//! For every question and dimension the models that expressed the dimension
//! form one team and beat the team of models that stayed silent. Ratings are
//! TrueSkill Gaussians updated by the two-team win rule; the reported
//! orientation score is the mean win rate against the other models.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};
use thiserror::Error;

use crate::elicitation::ElicitedResponse;
use crate::values::{OrientationProfile, ValueSystem, ValueVector, ValuesError};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RankError {
    #[error("config: {0}")]
    Config(String),
    #[error("win rate needs at least one opponent")]
    NoOpponents,
    #[error("no rating for model `{model}` on `{dim}`")]
    MissingRating { model: String, dim: String },
    #[error(transparent)]
    Values(#[from] ValuesError),
    #[error("io: {0}")]
    Io(String),
    #[error("data: {0}")]
    Data(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DrawPolicy {
    /// Unanimous dimensions carry no information and are skipped.
    #[default]
    Skip,
    /// Unanimous dimensions count as a tie between every pair of models.
    Draw,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RankingConfig {
    pub mu0: f64,
    pub sigma0: f64,
    /// Performance noise (β in the TrueSkill literature).
    pub gamma: f64,
    /// Added to σ² before every update.
    pub tau_dynamics: f64,
    pub draw_policy: DrawPolicy,
    /// Sets the draw margin of the outcome model.
    pub draw_probability: f64,
    /// Partial-update factor applied to each member's share.
    pub weight: f64,
}

impl Default for RankingConfig {
    fn default() -> Self {
        RankingConfig {
            mu0: 25.0,
            sigma0: 25.0 / 3.0,
            gamma: 25.0 / 6.0,
            tau_dynamics: 25.0 / 300.0,
            draw_policy: DrawPolicy::Skip,
            draw_probability: 0.10,
            weight: 1.0,
        }
    }
}

impl RankingConfig {
    pub fn validate(&self) -> Result<(), RankError> {
        let pos = [("sigma0", self.sigma0), ("gamma", self.gamma), ("weight", self.weight)];
        for (name, v) in pos {
            if !(v.is_finite() && v > 0.0) {
                return Err(RankError::Config(format!("{name} must be > 0, got {v}")));
            }
        }
        if !self.mu0.is_finite() {
            return Err(RankError::Config("mu0 must be finite".into()));
        }
        if !(self.tau_dynamics.is_finite() && self.tau_dynamics >= 0.0) {
            return Err(RankError::Config("tau_dynamics must be >= 0".into()));
        }
        if !(0.0..1.0).contains(&self.draw_probability) {
            return Err(RankError::Config("draw_probability must be in [0, 1)".into()));
        }
        if self.weight > 1.0 {
            return Err(RankError::Config("weight must be <= 1".into()));
        }
        Ok(())
    }

    /// Draw margin for a match with `players` participants.
    fn draw_margin(&self, players: usize) -> f64 {
        if self.draw_probability == 0.0 {
            return 0.0;
        }
        std_normal().inverse_cdf((self.draw_probability + 1.0) / 2.0) * (players as f64).sqrt() * self.gamma
    }
}

fn std_normal() -> Normal {
    Normal::standard()
}

fn pdf(x: f64) -> f64 {
    (-0.5 * x * x).exp() / (2.0 * std::f64::consts::PI).sqrt()
}

/// Φ through libm's erfc, accurate in both tails.
pub fn cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x / std::f64::consts::SQRT_2)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Rating {
    pub model: String,
    pub dim: String,
    pub mu: f64,
    pub sigma: f64,
}

impl Rating {
    pub fn prior(model: &str, dim: &str, cfg: &RankingConfig) -> Self {
        Rating { model: model.to_string(), dim: dim.to_string(), mu: cfg.mu0, sigma: cfg.sigma0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatchRecord {
    pub question: String,
    pub dim: String,
    pub expressing: BTreeSet<String>,
    pub silent: BTreeSet<String>,
}

/// Model id → OR-aggregated response vector, per question id.
pub type ResponseTable = BTreeMap<String, BTreeMap<String, ValueVector>>;

/// Groups responses by question; a later response for the same (question,
/// model) replaces an earlier one.
pub fn response_table<'r>(responses: impl IntoIterator<Item = &'r ElicitedResponse>) -> ResponseTable {
    let mut t = ResponseTable::new();
    for r in responses {
        t.entry(r.question.clone()).or_default().insert(r.model.clone(), r.vector.clone());
    }
    t
}

/// One record per dimension, partitioning `models` by bit k. Models without
/// a response sit on neither side and are returned as warnings.
pub fn build_matches(
    question: &str,
    vectors: &BTreeMap<String, ValueVector>,
    models: &[String],
    system: &ValueSystem,
) -> Result<(Vec<MatchRecord>, Vec<String>), RankError> {
    let mut warnings = Vec::new();
    let present: Vec<(&String, &ValueVector)> = models
        .iter()
        .filter_map(|m| match vectors.get(m) {
            Some(v) => Some((m, v)),
            None => {
                warnings.push(format!("{question}: no response from `{m}`"));
                None
            }
        })
        .collect();
    let reference = ValueVector::zeros(system);
    for (_, v) in &present {
        v.check_compatible(&reference)?;
    }
    let records = system
        .dimensions()
        .iter()
        .enumerate()
        .map(|(k, d)| {
            let (mut expressing, mut silent) = (BTreeSet::new(), BTreeSet::new());
            for (m, v) in &present {
                if v.bit(k) {
                    expressing.insert((*m).clone());
                } else {
                    silent.insert((*m).clone());
                }
            }
            MatchRecord { question: question.to_string(), dim: d.id.clone(), expressing, silent }
        })
        .collect();
    Ok((records, warnings))
}

fn v_win(t: f64, eps: f64) -> f64 {
    let x = t - eps;
    let denom = cdf(x);
    // far in the losing tail the ratio tends to -x
    if denom < 1e-300 { -x } else { pdf(x) / denom }
}

fn w_win(t: f64, eps: f64) -> f64 {
    let v = v_win(t, eps);
    v * (v + t - eps)
}

fn v_draw(t: f64, eps: f64) -> f64 {
    let a = t.abs();
    let denom = cdf(eps - a) - cdf(-eps - a);
    let v = if denom < 1e-300 { -a - eps } else { (pdf(-eps - a) - pdf(eps - a)) / denom };
    if t < 0.0 { -v } else { v }
}

fn w_draw(t: f64, eps: f64) -> f64 {
    let a = t.abs();
    let denom = cdf(eps - a) - cdf(-eps - a);
    if denom < 1e-300 {
        return 1.0;
    }
    let v = v_draw(a, eps);
    v * v + ((eps - a) * pdf(eps - a) + (eps + a) * pdf(eps + a)) / denom
}

/// Two-team TrueSkill update; `draw` selects the tie outcome, otherwise
/// `first` beats `second`. Returns the updated teams in input order.
pub fn team_update(first: &[Rating], second: &[Rating], draw: bool, cfg: &RankingConfig) -> (Vec<Rating>, Vec<Rating>) {
    if first.is_empty() || second.is_empty() {
        return (first.to_vec(), second.to_vec());
    }
    let tau2 = cfg.tau_dynamics * cfg.tau_dynamics;
    let beta2 = cfg.gamma * cfg.gamma;
    let var = |r: &Rating| r.sigma * r.sigma + tau2;
    let players = first.len() + second.len();
    let c2: f64 = first.iter().chain(second).map(|r| var(r) + beta2).sum();
    let c = c2.sqrt();
    let mu1: f64 = first.iter().map(|r| r.mu).sum();
    let mu2: f64 = second.iter().map(|r| r.mu).sum();
    let t = (mu1 - mu2) / c;
    let eps = cfg.draw_margin(players) / c;
    let (v, w) = if draw { (v_draw(t, eps), w_draw(t, eps)) } else { (v_win(t, eps), w_win(t, eps)) };
    let apply = |team: &[Rating], sign: f64| -> Vec<Rating> {
        team.iter()
            .map(|r| {
                let s2 = var(r);
                let share = cfg.weight * s2 / c;
                let shrink = (1.0 - cfg.weight * s2 / c2 * w).max(f64::EPSILON);
                Rating { mu: r.mu + sign * share * v, sigma: (s2 * shrink).sqrt(), ..r.clone() }
            })
            .collect()
    };
    (apply(first, 1.0), apply(second, -1.0))
}

/// Mean over `opponents` of `Φ((μ_i − μ_j) / √(2(γ² + σ_i² + σ_j²)))`.
pub fn win_rate(me: &Rating, opponents: &[&Rating], cfg: &RankingConfig) -> Result<f64, RankError> {
    let opp: Vec<&&Rating> = opponents.iter().filter(|o| o.model != me.model).collect();
    if opp.is_empty() {
        return Err(RankError::NoOpponents);
    }
    let g2 = cfg.gamma * cfg.gamma;
    let total: f64 = opp
        .iter()
        // σ terms grouped so both directions of a pair round identically
        .map(|o| pairwise_win(me.mu - o.mu, (2.0 * (g2 + (me.sigma * me.sigma + o.sigma * o.sigma))).sqrt()))
        .sum();
    Ok(total / opp.len() as f64)
}

/// `Φ(d / s)` via the lower tail, so that `p(d) + p(−d)` is exactly 1.
fn pairwise_win(d: f64, s: f64) -> f64 {
    let lo = cdf(-(d / s).abs());
    if d >= 0.0 { 1.0 - lo } else { lo }
}

/// All ratings of a run, plus the last question folded in.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Ratings {
    pub system: String,
    pub dims: Vec<String>,
    /// model → one rating per dimension, in system order
    pub table: BTreeMap<String, Vec<Rating>>,
    pub last_question: Option<String>,
    pub matches_played: usize,
    pub matches_skipped: usize,
}

impl Ratings {
    pub fn new(models: &[String], system: &ValueSystem, cfg: &RankingConfig) -> Self {
        let dims: Vec<String> = system.dimensions().iter().map(|d| d.id.clone()).collect();
        let table = models
            .iter()
            .map(|m| (m.clone(), dims.iter().map(|d| Rating::prior(m, d, cfg)).collect()))
            .collect();
        Ratings {
            system: system.name().to_string(),
            dims,
            table,
            last_question: None,
            matches_played: 0,
            matches_skipped: 0,
        }
    }

    pub fn get(&self, model: &str, dim: &str) -> Result<&Rating, RankError> {
        let missing = || RankError::MissingRating { model: model.to_string(), dim: dim.to_string() };
        let k = self.dims.iter().position(|d| d == dim).ok_or_else(missing)?;
        self.table.get(model).map(|v| &v[k]).ok_or_else(missing)
    }

    fn slot(&mut self, model: &str, k: usize) -> &mut Rating {
        &mut self.table.get_mut(model).expect("model rated")[k]
    }

    /// Applies one match under `cfg`'s draw policy.
    pub fn play(&mut self, m: &MatchRecord, cfg: &RankingConfig) -> Result<(), RankError> {
        let k = self
            .dims
            .iter()
            .position(|d| *d == m.dim)
            .ok_or_else(|| RankError::Data(format!("unknown dimension `{}`", m.dim)))?;
        for id in m.expressing.iter().chain(&m.silent) {
            if !self.table.contains_key(id) {
                return Err(RankError::MissingRating { model: id.clone(), dim: m.dim.clone() });
            }
        }
        let team = |s: &Self, ids: &BTreeSet<String>| -> Vec<Rating> { ids.iter().map(|id| s.table[id][k].clone()).collect() };
        if !m.expressing.is_empty() && !m.silent.is_empty() {
            let (w, l) = team_update(&team(self, &m.expressing), &team(self, &m.silent), false, cfg);
            for r in w.into_iter().chain(l) {
                let model = r.model.clone();
                *self.slot(&model, k) = r;
            }
            self.matches_played += 1;
            return Ok(());
        }
        let all: Vec<&String> = m.expressing.iter().chain(&m.silent).collect();
        if cfg.draw_policy == DrawPolicy::Skip || all.len() < 2 {
            self.matches_skipped += 1;
            return Ok(());
        }
        for (i, a) in all.iter().enumerate() {
            for b in &all[i + 1..] {
                let (ra, rb) = (self.table[*a][k].clone(), self.table[*b][k].clone());
                let (x, y) = team_update(&[ra], &[rb], true, cfg);
                *self.slot(a, k) = x.into_iter().next().expect("one rating");
                *self.slot(b, k) = y.into_iter().next().expect("one rating");
            }
        }
        self.matches_played += 1;
        Ok(())
    }

    pub fn save(&self, path: &Path) -> Result<(), RankError> {
        crate::optimizer::store::write_json(path, self).map_err(|e| RankError::Io(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self, RankError> {
        crate::optimizer::store::read_json(path).map_err(|e| RankError::Io(e.to_string()))
    }
}

/// `100 × win_rate` against every other model, per dimension, sorted by
/// model id. A lone model scores 50 everywhere.
pub fn leaderboard(ratings: &Ratings, cfg: &RankingConfig) -> Result<Vec<OrientationProfile>, RankError> {
    if ratings.table.len() == 1 {
        log::warn!("leaderboard with a single model: every score is 50 by convention");
    }
    ratings
        .table
        .iter()
        .map(|(model, mine)| {
            let scores = mine
                .iter()
                .enumerate()
                .map(|(k, me)| {
                    let opp: Vec<&Rating> =
                        ratings.table.iter().filter(|(m, _)| *m != model).map(|(_, v)| &v[k]).collect();
                    if opp.is_empty() { Ok(50.0) } else { Ok(100.0 * win_rate(me, &opp, cfg)?) }
                })
                .collect::<Result<Vec<f64>, RankError>>()?;
            Ok(OrientationProfile { model: model.clone(), scores })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankingOutput {
    pub ratings: Ratings,
    pub leaderboard: Vec<OrientationProfile>,
    pub warnings: Vec<String>,
}

/// Folds every question (ascending id, after `resume.last_question` if
/// given) into the ratings, then scores the leaderboard. With a checkpoint
/// path the ratings are saved after each question.
pub fn process_run(
    table: &ResponseTable,
    models: &[String],
    system: &ValueSystem,
    cfg: &RankingConfig,
    resume: Option<Ratings>,
    checkpoint: Option<&Path>,
) -> Result<RankingOutput, RankError> {
    cfg.validate()?;
    let mut ratings = match resume {
        Some(r) => {
            if r.system != system.name() {
                return Err(RankError::Data(format!("checkpoint is for `{}`, not `{}`", r.system, system.name())));
            }
            r
        }
        None => Ratings::new(models, system, cfg),
    };
    let mut warnings = Vec::new();
    let start = ratings.last_question.clone();
    for (qid, vectors) in table.iter().filter(|(q, _)| start.as_ref().is_none_or(|s| *q > s)) {
        let (records, w) = build_matches(qid, vectors, models, system)?;
        warnings.extend(w);
        for m in &records {
            ratings.play(m, cfg)?;
        }
        ratings.last_question = Some(qid.clone());
        if let Some(p) = checkpoint {
            ratings.save(p)?;
        }
    }
    let leaderboard = leaderboard(&ratings, cfg)?;
    Ok(RankingOutput { ratings, leaderboard, warnings })
}

#[derive(Debug, Serialize)]
struct CsvRow<'a> {
    model: &'a str,
    dimension: &'a str,
    mu: f64,
    sigma: f64,
    win_rate: f64,
}

/// `model,dimension,mu,sigma,win_rate` with win rates in [0, 1].
pub fn leaderboard_csv(out: &RankingOutput) -> Result<String, RankError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for p in &out.leaderboard {
        for (k, rating) in out.ratings.table[&p.model].iter().enumerate() {
            w.serialize(CsvRow {
                model: &p.model,
                dimension: &rating.dim,
                mu: rating.mu,
                sigma: rating.sigma,
                win_rate: p.scores[k] / 100.0,
            })
            .map_err(|e| RankError::Io(e.to_string()))?;
        }
    }
    let bytes = w.into_inner().map_err(|e| RankError::Io(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| RankError::Io(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn cfg() -> RankingConfig {
        RankingConfig::default()
    }

    fn r(model: &str, mu: f64, sigma: f64) -> Rating {
        Rating { model: model.into(), dim: "d".into(), mu, sigma }
    }

    fn system() -> ValueSystem {
        ValueSystem::schwartz()
    }

    #[test]
    fn one_vs_one_reference() {
        let c = cfg();
        let (w, l) = team_update(&[Rating::prior("a", "d", &c)], &[Rating::prior("b", "d", &c)], false, &c);
        assert!((w[0].mu - 29.396).abs() < 1e-3 && (w[0].sigma - 7.171).abs() < 1e-3, "{w:?}");
        assert!((l[0].mu - 20.604).abs() < 1e-3 && (l[0].sigma - 7.171).abs() < 1e-3, "{l:?}");
        let (a, b) = team_update(&[Rating::prior("a", "d", &c)], &[Rating::prior("b", "d", &c)], true, &c);
        assert!((a[0].mu - 25.0).abs() < 1e-9 && (b[0].mu - 25.0).abs() < 1e-9);
        assert!((a[0].sigma - 6.458).abs() < 1e-3, "{a:?}");
    }

    #[test]
    fn empty_side_is_noop() {
        let c = cfg();
        let t = [r("a", 25.0, 8.0)];
        assert_eq!(team_update(&t, &[], false, &c), (t.to_vec(), vec![]));
    }

    #[test]
    fn win_rate_examples() {
        let c = cfg();
        let me = r("a", 25.0, 8.0);
        assert_eq!(win_rate(&me, &[&r("b", 25.0, 3.0)], &c).unwrap(), 0.5);
        let s = (2.0 * (c.gamma.powi(2) + 64.0 + 9.0)).sqrt();
        let p = win_rate(&r("a", 25.0 + s, 8.0), &[&r("b", 25.0, 3.0)], &c).unwrap();
        assert!((p - 0.841_344_746_068_542_9).abs() < 1e-12, "{p}");
        assert!(matches!(win_rate(&me, &[&me], &c), Err(RankError::NoOpponents)));
        assert!(win_rate(&me, &[], &c).is_err());
    }

    #[test]
    fn partition_by_bit() {
        let sys = system();
        let models: Vec<String> = ["m1", "m2", "m3", "m4"].map(String::from).to_vec();
        let v = |bits: &[usize]| {
            let ids: Vec<&str> = bits.iter().map(|&k| sys.dimensions()[k].id.as_str()).collect();
            ValueVector::from_dims(&sys, &ids).unwrap()
        };
        let vectors = BTreeMap::from([("m1".to_string(), v(&[0, 2])), ("m2".to_string(), v(&[0])), ("m3".to_string(), v(&[]))]);
        let (recs, warn) = build_matches("q1", &vectors, &models, &sys).unwrap();
        assert_eq!(recs.len(), 10);
        assert_eq!(recs[0].expressing, BTreeSet::from(["m1".to_string(), "m2".to_string()]));
        assert_eq!(recs[0].silent, BTreeSet::from(["m3".to_string()]));
        assert_eq!(recs[2].expressing.len(), 1);
        assert!(recs[5].expressing.is_empty());
        assert_eq!(warn.len(), 1);
        assert!(warn[0].contains("m4"));
    }

    #[test]
    fn lone_model_and_no_questions() {
        let sys = system();
        let c = cfg();
        let out = process_run(&ResponseTable::new(), &["solo".to_string()], &sys, &c, None, None).unwrap();
        assert!(out.leaderboard[0].scores.iter().all(|&s| s == 50.0));
        let models = vec!["a".to_string(), "b".to_string()];
        let out = process_run(&ResponseTable::new(), &models, &sys, &c, None, None).unwrap();
        assert!(out.leaderboard.iter().all(|p| p.scores.iter().all(|&s| s == 50.0)));
        assert!(out.ratings.table["a"].iter().all(|r| r.mu == c.mu0 && r.sigma == c.sigma0));
    }

    fn always_vs_never(n: usize) -> ResponseTable {
        let sys = system();
        (0..n)
            .map(|i| {
                let a = ValueVector::from_dims(&sys, &["power"]).unwrap();
                let b = ValueVector::zeros(&sys);
                (format!("q{i:04}"), BTreeMap::from([("a".to_string(), a), ("b".to_string(), b)]))
            })
            .collect()
    }

    #[test]
    fn dominant_model_separates() {
        let sys = system();
        let models = vec!["a".to_string(), "b".to_string()];
        let out = process_run(&always_vs_never(500), &models, &sys, &cfg(), None, None).unwrap();
        let k = sys.index_of("power").unwrap();
        assert!(out.leaderboard[0].scores[k] > 95.0);
        assert!(out.leaderboard[1].scores[k] < 5.0);
        // the skipped dimensions keep their priors exactly
        let other = sys.index_of("tradition").unwrap();
        assert_eq!(out.ratings.table["a"][other], Rating::prior("a", "tradition", &cfg()));
        assert_eq!(out.ratings.matches_skipped, 500 * 9);
        assert!(leaderboard_csv(&out).unwrap().starts_with("model,dimension,mu,sigma,win_rate\na,self_direction,25.0,"));
    }

    #[test]
    fn draw_policy_moves_unanimous_dims() {
        let sys = system();
        let models = vec!["a".to_string(), "b".to_string()];
        let c = RankingConfig { draw_policy: DrawPolicy::Draw, ..cfg() };
        let out = process_run(&always_vs_never(3), &models, &sys, &c, None, None).unwrap();
        let other = sys.index_of("tradition").unwrap();
        assert!(out.ratings.table["a"][other].sigma < c.sigma0);
        assert_eq!(out.ratings.matches_skipped, 0);
    }

    #[test]
    fn checkpoint_resume_matches_straight_run() {
        let sys = system();
        let models = vec!["a".to_string(), "b".to_string()];
        let table = always_vs_never(20);
        let straight = process_run(&table, &models, &sys, &cfg(), None, None).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let ck = dir.path().join("ratings.json");
        let half: ResponseTable = table.iter().take(7).map(|(k, v)| (k.clone(), v.clone())).collect();
        process_run(&half, &models, &sys, &cfg(), None, Some(&ck)).unwrap();
        let resumed = process_run(&table, &models, &sys, &cfg(), Some(Ratings::load(&ck).unwrap()), None).unwrap();
        assert_eq!(straight, resumed);
    }

    #[test]
    fn config_checks() {
        assert!(cfg().validate().is_ok());
        assert!(RankingConfig { sigma0: 0.0, ..cfg() }.validate().is_err());
        assert!(RankingConfig { tau_dynamics: -1.0, ..cfg() }.validate().is_err());
        assert!(RankingConfig { draw_probability: 1.0, ..cfg() }.validate().is_err());
    }

    proptest! {
        // Skill gaps stay within a few team deviations; far beyond that the
        // update is smaller than one ulp of μ.
        #[test]
        fn win_moves_means_apart(
            w in proptest::collection::vec((15.0..35.0f64, 0.5..10.0f64), 1..4),
            l in proptest::collection::vec((15.0..35.0f64, 0.5..10.0f64), 1..4),
        ) {
            let c = RankingConfig { tau_dynamics: 0.0, ..cfg() };
            let wt: Vec<Rating> = w.iter().enumerate().map(|(i, (m, s))| r(&format!("w{i}"), *m, *s)).collect();
            let lt: Vec<Rating> = l.iter().enumerate().map(|(i, (m, s))| r(&format!("l{i}"), *m, *s)).collect();
            let (w2, l2) = team_update(&wt, &lt, false, &c);
            for (a, b) in wt.iter().zip(&w2) {
                prop_assert!(b.mu > a.mu);
                prop_assert!(b.sigma <= a.sigma);
            }
            for (a, b) in lt.iter().zip(&l2) {
                prop_assert!(b.mu < a.mu);
                prop_assert!(b.sigma <= a.sigma);
            }
        }

        #[test]
        fn win_rates_complement(mi in 0.0..50.0f64, mj in 0.0..50.0f64, si in 0.1..10.0f64, sj in 0.1..10.0f64) {
            let c = cfg();
            let (a, b) = (r("a", mi, si), r("b", mj, sj));
            let p = win_rate(&a, &[&b], &c).unwrap();
            let q = win_rate(&b, &[&a], &c).unwrap();
            prop_assert_eq!(p + q, 1.0);
            prop_assert!((0.0..=1.0).contains(&p));
        }

        #[test]
        fn equal_priors_zero_sum(n in 1usize..4) {
            let c = cfg();
            let t: Vec<Rating> = (0..n).map(|i| Rating::prior(&format!("a{i}"), "d", &c)).collect();
            let u: Vec<Rating> = (0..n).map(|i| Rating::prior(&format!("b{i}"), "d", &c)).collect();
            let (w, l) = team_update(&t, &u, false, &c);
            prop_assert!(((w[0].mu - 25.0) - (25.0 - l[0].mu)).abs() < 1e-12);
        }
    }
}
