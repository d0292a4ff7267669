//! Construct-validity check: nudge one mock persona toward a dimension and
//! see whether its leaderboard row moves the right way.

use std::collections::BTreeMap;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::AnalysisError;
use crate::backends::{BackendKind, BackendSpec, Registry};
use crate::elicitation::{Elicitor, Templates};
use crate::ranking::{process_run, response_table, RankingConfig};
use crate::values::ValueSystem;

/// Everything needed to evaluate a fixed model panel.
#[derive(Debug, Clone)]
pub struct Panel {
    pub specs: Vec<BackendSpec>,
    pub system: Arc<ValueSystem>,
    pub templates: Arc<Templates>,
    pub judge: String,
    pub models: Vec<String>,
    pub points: usize,
}

impl Panel {
    pub fn elicitor(&self) -> Result<Elicitor, AnalysisError> {
        let reg = Registry::from_specs(&self.specs, &self.system)?;
        Ok(Elicitor::new(Arc::new(reg), self.templates.clone(), self.system.clone(), &self.judge)
            .with_points(self.points))
    }

    /// Leaderboard row of every model, keyed by model id.
    pub fn leaderboard(
        &self,
        questions: &[(String, String)],
        cfg: &RankingConfig,
    ) -> Result<BTreeMap<String, Vec<f64>>, AnalysisError> {
        let responses = self.elicitor()?.evaluate(&self.models, questions)?;
        let table = response_table(&responses);
        let out = process_run(&table, &self.models, &self.system, cfg, None, None)?;
        Ok(out.leaderboard.into_iter().map(|p| (p.model, p.scores)).collect())
    }

    /// Copy in which mock `model` has `weight(dim)` raised by `boost`,
    /// clamped to 1.
    pub fn boosted(&self, model: &str, dim: &str, boost: f64) -> Result<Panel, AnalysisError> {
        if !(boost.is_finite() && boost >= 0.0) {
            return Err(AnalysisError::Input(format!("boost must be >= 0, got {boost}")));
        }
        self.system.index_of(dim)?;
        let mut out = self.clone();
        let spec = out
            .specs
            .iter_mut()
            .find(|s| s.id == model)
            .ok_or_else(|| AnalysisError::Input(format!("no backend `{model}`")))?;
        let persona = match (spec.kind, spec.persona.as_mut()) {
            (BackendKind::Mock, Some(p)) => p,
            _ => return Err(AnalysisError::Input(format!("`{model}` is not a mock persona"))),
        };
        let w = persona.weights.get(dim).copied().unwrap_or(persona.default_weight);
        persona.weights.insert(dim.to_string(), (w + boost).min(1.0));
        Ok(out)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PrimingReport {
    pub model: String,
    pub target: String,
    pub boost: f64,
    /// Orientation score change per dimension, after minus before.
    pub deltas: BTreeMap<String, f64>,
    pub target_delta: f64,
    /// Mean change over the target's group, target excluded; 0 if empty.
    pub same_group_delta: f64,
    /// Mean change over groups opposing the target's; 0 if empty.
    pub opposing_group_delta: f64,
    pub before: Vec<f64>,
    pub after: Vec<f64>,
}

fn mean_of(deltas: &BTreeMap<String, f64>, dims: &[String]) -> f64 {
    if dims.is_empty() {
        return 0.0;
    }
    dims.iter().map(|d| deltas[d]).sum::<f64>() / dims.len() as f64
}

/// Evaluates the panel on `questions` before and after boosting `model`'s
/// `target` weight and reports how its leaderboard row moved.
pub fn priming_experiment(
    panel: &Panel,
    questions: &[(String, String)],
    model: &str,
    target: &str,
    boost: f64,
    cfg: &RankingConfig,
) -> Result<PrimingReport, AnalysisError> {
    let primed = panel.boosted(model, target, boost)?;
    if !panel.models.iter().any(|m| m == model) {
        return Err(AnalysisError::Input(format!("`{model}` is not in the evaluated panel")));
    }
    let before = panel.leaderboard(questions, cfg)?.remove(model).expect("model in panel");
    let after = primed.leaderboard(questions, cfg)?.remove(model).expect("model in panel");
    let deltas: BTreeMap<String, f64> = panel
        .system
        .dimensions()
        .iter()
        .zip(before.iter().zip(&after))
        .map(|(d, (b, a))| (d.id.clone(), a - b))
        .collect();
    let (same, opposing) = panel.system.related_dims(target)?;
    Ok(PrimingReport {
        model: model.to_string(),
        target: target.to_string(),
        boost,
        target_delta: deltas[target],
        same_group_delta: mean_of(&deltas, &same),
        opposing_group_delta: mean_of(&deltas, &opposing),
        deltas,
        before,
        after,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::backends::PersonaSpec;

    pub(crate) fn panel(weights: &[f64]) -> Panel {
        let mut specs = vec![BackendSpec::mock("judge", PersonaSpec::uniform(0.0, 0))];
        let mut models = Vec::new();
        for (i, w) in weights.iter().enumerate() {
            let id = format!("m{i}");
            specs.push(BackendSpec::mock(&id, PersonaSpec::uniform(*w, i as u64 + 1)));
            models.push(id);
        }
        Panel {
            specs,
            system: Arc::new(ValueSystem::schwartz()),
            templates: Arc::new(Templates::builtin()),
            judge: "judge".into(),
            models,
            points: 3,
        }
    }

    fn questions(n: usize) -> Vec<(String, String)> {
        (0..n).map(|i| (format!("q{i:06}"), format!("Should town {i} fund a new public project?"))).collect()
    }

    #[test]
    fn zero_boost_is_identity() {
        let p = panel(&[0.3, 0.3, 0.3]);
        let r = priming_experiment(&p, &questions(20), "m0", "security", 0.0, &RankingConfig::default()).unwrap();
        assert!(r.deltas.values().all(|d| *d == 0.0));
        assert_eq!(r.before, r.after);
    }

    #[test]
    fn boost_raises_target() {
        let p = panel(&[0.3, 0.3, 0.3]);
        let r = priming_experiment(&p, &questions(40), "m0", "security", 0.6, &RankingConfig::default()).unwrap();
        assert!(r.target_delta > 0.0, "{r:?}");
    }

    #[test]
    fn input_checks() {
        let p = panel(&[0.3, 0.3]);
        let q = questions(2);
        let cfg = RankingConfig::default();
        assert!(priming_experiment(&p, &q, "m0", "nope", 0.2, &cfg).is_err());
        assert!(priming_experiment(&p, &q, "m9", "security", 0.2, &cfg).is_err());
        assert!(priming_experiment(&p, &q, "m0", "security", -0.2, &cfg).is_err());
        assert!(priming_experiment(&p, &q, "judge", "security", 0.2, &cfg).is_err());
    }
}
