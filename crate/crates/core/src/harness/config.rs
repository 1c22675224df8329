use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Duration;

use serde::{Deserialize, Serialize};

use crate::dsge::DEFAULT_MAX_DEPTH;
use crate::evolution::EvolutionConfig;

use super::HarnessError;

/// How the dataset is split into the evolution (train) and final test parts.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum OuterSplit {
    /// Stratified holdout of this fraction as test data.
    Holdout(f64),
    /// Fold `index` of a stratified `k`-fold plan is the test data.
    Fold { index: usize, k: usize },
}

impl FromStr for OuterSplit {
    type Err = String;

    /// Parses `I/K` into a fold split.
    fn from_str(s: &str) -> Result<Self, String> {
        let (i, k) = s.split_once('/').ok_or_else(|| format!("expected I/K, got `{s}`"))?;
        let index = i.trim().parse().map_err(|_| format!("bad fold index in `{s}`"))?;
        let k = k.trim().parse().map_err(|_| format!("bad fold count in `{s}`"))?;
        if k < 2 || index >= k {
            return Err(format!("fold `{s}` needs K >= 2 and I < K"));
        }
        Ok(OuterSplit::Fold { index, k })
    }
}

impl fmt::Display for OuterSplit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            OuterSplit::Holdout(fraction) => write!(f, "holdout {fraction}"),
            OuterSplit::Fold { index, k } => write!(f, "fold {index}/{k}"),
        }
    }
}

/// Flat run configuration. Every key can also be given as a command-line
/// flag of the same name (with `-` for `_`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    /// Grammar file; the shipped pipeline grammar when absent.
    pub grammar: Option<PathBuf>,
    pub dataset: Option<PathBuf>,
    pub label: Option<String>,
    pub missing: String,
    pub seed: u64,
    /// Seed for the outer split and the inner folds; `seed` when absent.
    pub split_seed: Option<u64>,
    pub population: usize,
    pub generations: usize,
    pub tournament_size: usize,
    pub crossover_rate: f64,
    pub mutation_rate: f64,
    pub elite_count: usize,
    pub stall_generations: usize,
    pub budget_secs: f64,
    pub max_depth: usize,
    pub inner_k: usize,
    /// Test fraction; 0.25 when neither this nor `outer_fold` is set.
    pub outer_holdout: Option<f64>,
    /// `I/K`: use fold I of a K-fold plan as the test set.
    pub outer_fold: Option<String>,
    /// How many of the best individuals per generation feed the
    /// method-frequency table.
    pub top_k: usize,
    /// Keep at most this many names per category; the rest become `others`.
    pub max_methods: Option<usize>,
    pub workers: usize,
    pub out: PathBuf,
}

impl Default for RunConfig {
    fn default() -> Self {
        let evo = EvolutionConfig::default();
        Self {
            grammar: None,
            dataset: None,
            label: None,
            missing: "?".into(),
            seed: 0,
            split_seed: None,
            population: evo.population_size,
            generations: evo.max_generations,
            tournament_size: evo.tournament_size,
            crossover_rate: evo.crossover_rate,
            mutation_rate: evo.mutation_rate,
            elite_count: evo.elite_count,
            stall_generations: evo.stall_generations,
            budget_secs: evo.eval_time_budget.as_secs_f64(),
            max_depth: DEFAULT_MAX_DEPTH,
            inner_k: 3,
            outer_holdout: None,
            outer_fold: None,
            top_k: 10,
            max_methods: None,
            workers: 1,
            out: PathBuf::from("out"),
        }
    }
}

/// The parts of [`RunConfig`] that determine results; echoed in reports.
/// Worker count and output directory are left out so that reports from
/// otherwise identical runs compare equal.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfigEcho {
    pub grammar: Option<PathBuf>,
    pub dataset: Option<PathBuf>,
    pub label: Option<String>,
    pub missing: String,
    pub seed: u64,
    pub split_seed: u64,
    pub inner_k: usize,
    pub outer_holdout: Option<f64>,
    pub outer_fold: Option<String>,
    pub top_k: usize,
    pub max_methods: Option<usize>,
    pub evolution: EvolutionConfig,
}

impl RunConfig {
    pub fn from_toml_str(text: &str) -> Result<Self, HarnessError> {
        toml::from_str(text).map_err(|e| HarnessError::Config(e.to_string()))
    }

    pub fn from_toml_file(path: &Path) -> Result<Self, HarnessError> {
        let text = std::fs::read_to_string(path).map_err(|e| HarnessError::io(path, e))?;
        Self::from_toml_str(&text)
    }

    pub fn evolution_config(&self) -> Result<EvolutionConfig, HarnessError> {
        let budget = Duration::try_from_secs_f64(self.budget_secs).map_err(|_| {
            HarnessError::Config(format!("budget_secs must be a positive number, got {}", self.budget_secs))
        })?;
        let cfg = EvolutionConfig {
            population_size: self.population,
            max_generations: self.generations,
            tournament_size: self.tournament_size,
            crossover_rate: self.crossover_rate,
            mutation_rate: self.mutation_rate,
            elite_count: self.elite_count,
            stall_generations: self.stall_generations,
            eval_time_budget: budget,
            master_seed: self.seed,
            max_depth: self.max_depth,
        };
        cfg.validate().map_err(|e| HarnessError::Config(e.to_string()))?;
        Ok(cfg)
    }

    pub fn outer_split(&self) -> Result<OuterSplit, HarnessError> {
        match (self.outer_holdout, &self.outer_fold) {
            (Some(_), Some(_)) => Err(HarnessError::Config("set either outer_holdout or outer_fold, not both".into())),
            (Some(f), None) if f > 0.0 && f < 1.0 => Ok(OuterSplit::Holdout(f)),
            (Some(f), None) => Err(HarnessError::Config(format!("outer_holdout must lie in (0, 1), got {f}"))),
            (None, Some(s)) => s.parse().map_err(HarnessError::Config),
            (None, None) => Ok(OuterSplit::Holdout(0.25)),
        }
    }

    pub fn split_seed(&self) -> u64 {
        self.split_seed.unwrap_or(self.seed)
    }

    /// Checks everything that can be checked without touching files.
    pub fn validate(&self) -> Result<(), HarnessError> {
        self.evolution_config()?;
        self.outer_split()?;
        if self.inner_k < 2 {
            return Err(HarnessError::Config(format!("inner_k must be at least 2, got {}", self.inner_k)));
        }
        if self.top_k == 0 {
            return Err(HarnessError::Config("top_k must be at least 1".into()));
        }
        if self.max_methods == Some(0) {
            return Err(HarnessError::Config("max_methods must be at least 1".into()));
        }
        Ok(())
    }

    pub fn echo(&self) -> Result<ConfigEcho, HarnessError> {
        Ok(ConfigEcho {
            grammar: self.grammar.clone(),
            dataset: self.dataset.clone(),
            label: self.label.clone(),
            missing: self.missing.clone(),
            seed: self.seed,
            split_seed: self.split_seed(),
            inner_k: self.inner_k,
            outer_holdout: self.outer_holdout,
            outer_fold: self.outer_fold.clone(),
            top_k: self.top_k,
            max_methods: self.max_methods,
            evolution: self.evolution_config()?,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn toml_keys_and_defaults() {
        let c =
            RunConfig::from_toml_str("seed = 7\npopulation = 20\nouter_fold = \"3/10\"\nbudget_secs = 2.5\n").unwrap();
        assert_eq!(c.seed, 7);
        assert_eq!(c.population, 20);
        assert_eq!(c.inner_k, 3);
        assert_eq!(c.outer_split().unwrap(), OuterSplit::Fold { index: 3, k: 10 });
        assert_eq!(c.evolution_config().unwrap().eval_time_budget, Duration::from_millis(2500));
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(RunConfig::from_toml_str("populaton = 3\n").is_err());
    }

    #[test]
    fn outer_split_rules() {
        assert_eq!(RunConfig::default().outer_split().unwrap(), OuterSplit::Holdout(0.25));
        let both = RunConfig { outer_holdout: Some(0.3), outer_fold: Some("1/5".into()), ..Default::default() };
        assert!(both.outer_split().is_err());
        assert!("5/5".parse::<OuterSplit>().is_err());
        assert!("x".parse::<OuterSplit>().is_err());
    }

    #[test]
    fn validation() {
        RunConfig::default().validate().unwrap();
        assert!(RunConfig { inner_k: 1, ..Default::default() }.validate().is_err());
        assert!(RunConfig { budget_secs: -1.0, ..Default::default() }.validate().is_err());
        assert!(RunConfig { elite_count: 200, ..Default::default() }.validate().is_err());
    }
}
