//! The single TOML document that describes a run.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::backends::BackendSpec;
use crate::optimizer::RunConfig;
use crate::ranking::RankingConfig;
use crate::scoring::SimilarityConfig;
use crate::values::{ValueSystem, BUILTIN_SYSTEMS};

use super::{CliError, Kind};

/// Which backends play which role.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Pools {
    /// P1: cheap models that write and refine candidates.
    pub generation: Vec<String>,
    /// P2: models whose answers score a question.
    pub scoring: Vec<String>,
    pub judge: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub embed: Option<String>,
    /// Models evaluated on the exported benchmark; defaults to `scoring`.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub evaluate: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Paths {
    /// Every command reads and writes here.
    pub out_dir: PathBuf,
    /// Directory of prompt template overrides.
    pub templates: Option<PathBuf>,
    /// Request ledger; defaults to `<out_dir>/ledger.jsonl`.
    pub ledger: Option<PathBuf>,
    /// Seed questions for `init` when none is given on the command line.
    pub seeds: Option<PathBuf>,
}

impl Default for Paths {
    fn default() -> Self {
        Paths { out_dir: PathBuf::from("out"), templates: None, ledger: None, seeds: None }
    }
}

fn default_system() -> String {
    "schwartz-10".into()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    /// Built-in name or path to a value-system TOML file.
    #[serde(default = "default_system")]
    pub value_system: String,
    pub backends: Vec<BackendSpec>,
    pub pools: Pools,
    /// Search settings. Pools are set under `[pools]`, not here.
    #[serde(default)]
    pub run: RunConfig,
    #[serde(default)]
    pub ranking: RankingConfig,
    #[serde(default)]
    pub similarity: SimilarityConfig,
    #[serde(default)]
    pub paths: Paths,
}

fn config_err(msg: impl Into<String>) -> CliError {
    CliError::new(Kind::Config, msg)
}

impl Config {
    /// Parses and validates. Relative paths resolve against `base`.
    pub fn parse(src: &str, base: &Path) -> Result<Config, CliError> {
        let mut cfg: Config = toml::from_str(src).map_err(|e| config_err(e.to_string()))?;
        let r = &cfg.run;
        if !(r.p1.is_empty() && r.p2.is_empty() && r.judge.is_empty() && r.embed.is_none()) {
            return Err(config_err("pools belong under [pools], not [run]"));
        }
        let resolve = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        resolve(&mut cfg.paths.out_dir);
        for p in [&mut cfg.paths.templates, &mut cfg.paths.ledger, &mut cfg.paths.seeds].into_iter().flatten() {
            resolve(p);
        }
        let builtin = BUILTIN_SYSTEMS.contains(&cfg.value_system.as_str()) || ["schwartz", "mft"].contains(&cfg.value_system.as_str());
        if !builtin && Path::new(&cfg.value_system).is_relative() {
            cfg.value_system = base.join(&cfg.value_system).to_string_lossy().into_owned();
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<(Config, String), CliError> {
        let src = std::fs::read_to_string(path).map_err(|e| config_err(format!("{}: {e}", path.display())))?;
        let base = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
        Ok((Config::parse(&src, base)?, src))
    }

    fn validate(&self) -> Result<(), CliError> {
        for b in &self.backends {
            b.validate().map_err(|e| config_err(e.to_string()))?;
        }
        let known = |id: &String| self.backends.iter().any(|b| &b.id == id);
        let p = &self.pools;
        let named = p.generation.iter().chain(&p.scoring).chain(&p.evaluate).chain([&p.judge]).chain(&p.embed);
        for id in named {
            if !known(id) {
                return Err(config_err(format!("pool member `{id}` is not a configured backend")));
            }
        }
        self.run_config().validate().map_err(|e| config_err(e.to_string()))?;
        self.ranking.validate().map_err(|e| config_err(e.to_string()))?;
        self.similarity.validate().map_err(config_err)?;
        self.system()?;
        Ok(())
    }

    pub fn system(&self) -> Result<ValueSystem, CliError> {
        ValueSystem::load(&self.value_system).map_err(|e| config_err(e.to_string()))
    }

    /// `[run]` with the pools filled in.
    pub fn run_config(&self) -> RunConfig {
        RunConfig {
            p1: self.pools.generation.clone(),
            p2: self.pools.scoring.clone(),
            judge: self.pools.judge.clone(),
            embed: self.pools.embed.clone(),
            ..self.run.clone()
        }
    }

    pub fn evaluated_models(&self) -> Vec<String> {
        if self.pools.evaluate.is_empty() { self.pools.scoring.clone() } else { self.pools.evaluate.clone() }
    }

    pub fn ledger_path(&self) -> PathBuf {
        self.paths.ledger.clone().unwrap_or_else(|| self.paths.out_dir.join("ledger.jsonl"))
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

#[cfg(test)]
mod tests {
    use super::*;

    const MIN: &str = r#"
        [[backends]]
        id = "a"
        kind = "mock"
        persona = { default_weight = 0.3, seed = 1 }
        [[backends]]
        id = "b"
        kind = "mock"
        persona = { default_weight = 0.5, seed = 2 }
        [[backends]]
        id = "judge"
        kind = "mock"
        persona = {}
        [pools]
        generation = ["a", "b"]
        scoring = ["a", "b"]
        judge = "judge"
    "#;

    #[test]
    fn defaults_fill_in() {
        let c = Config::parse(MIN, Path::new("/base")).unwrap();
        let r = c.run_config();
        assert_eq!((r.budget, r.explore_width, r.tau, r.n_shot, r.tree_depth, r.points), (50, 3, 0.5, 5, 3, 3));
        assert_eq!(c.similarity.dedup_threshold, 0.85);
        assert_eq!(c.paths.out_dir, PathBuf::from("/base/out"));
        assert_eq!(c.evaluated_models(), vec!["a", "b"]);
        assert_eq!(c.system().unwrap().len(), 10);
    }

    #[test]
    fn rejects_bad_configs() {
        let unknown = MIN.replace("judge = \"judge\"", "judge = \"ghost\"");
        assert!(Config::parse(&unknown, Path::new(".")).is_err());
        let pooled_run = format!("{MIN}\n[run]\np1 = [\"a\"]\n");
        assert!(Config::parse(&pooled_run, Path::new(".")).is_err());
        let typo = format!("{MIN}\n[run]\nbudgte = 3\n");
        assert!(Config::parse(&typo, Path::new(".")).is_err());
        let one_scorer = MIN.replace("scoring = [\"a\", \"b\"]", "scoring = [\"a\"]");
        assert!(Config::parse(&one_scorer, Path::new(".")).is_err());
        assert!(Config::parse(&MIN.replace("kind = \"mock\"\n        persona = {}", "kind = \"chat\""), Path::new(".")).is_err());
    }
}
