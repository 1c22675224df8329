use std::time::Duration;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::dsge::DEFAULT_MAX_DEPTH;

/// Parameters of the generational loop. Defaults follow the reference
/// setup: 100 individuals, 100 generations, binary tournaments, 90%
/// crossover, 10% per-gene mutation, 5 elites, stop after 5 generations
/// without improvement, 5 minutes per evaluation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvolutionConfig {
    pub population_size: usize,
    pub max_generations: usize,
    pub tournament_size: usize,
    pub crossover_rate: f64,
    /// Per-gene probability.
    pub mutation_rate: f64,
    pub elite_count: usize,
    pub stall_generations: usize,
    #[serde(rename = "eval_time_budget_secs", serialize_with = "ser_secs", deserialize_with = "de_secs")]
    pub eval_time_budget: Duration,
    pub master_seed: u64,
    pub max_depth: usize,
}

impl Default for EvolutionConfig {
    fn default() -> Self {
        Self {
            population_size: 100,
            max_generations: 100,
            tournament_size: 2,
            crossover_rate: 0.9,
            mutation_rate: 0.1,
            elite_count: 5,
            stall_generations: 5,
            eval_time_budget: Duration::from_secs(300),
            master_seed: 0,
            max_depth: DEFAULT_MAX_DEPTH,
        }
    }
}

fn ser_secs<S: Serializer>(d: &Duration, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_f64(d.as_secs_f64())
}

fn de_secs<'de, D: Deserializer<'de>>(d: D) -> Result<Duration, D::Error> {
    let secs = f64::deserialize(d)?;
    Duration::try_from_secs_f64(secs).map_err(serde::de::Error::custom)
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ConfigError {
    #[error("population_size must be at least 1")]
    EmptyPopulation,
    #[error("max_generations must be at least 1")]
    NoGenerations,
    #[error("elite_count ({elite}) must be below population_size ({population})")]
    TooManyElites { elite: usize, population: usize },
    #[error("tournament_size must be at least 1")]
    EmptyTournament,
    #[error("{name} must lie in [0, 1], got {value}")]
    Rate { name: &'static str, value: f64 },
    #[error("stall_generations must be at least 1")]
    NoStall,
    #[error("eval_time_budget must be positive")]
    NoBudget,
    #[error("max_depth must be at least 1")]
    NoDepth,
}

impl EvolutionConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.population_size == 0 {
            return Err(ConfigError::EmptyPopulation);
        }
        if self.max_generations == 0 {
            return Err(ConfigError::NoGenerations);
        }
        if self.elite_count >= self.population_size {
            return Err(ConfigError::TooManyElites { elite: self.elite_count, population: self.population_size });
        }
        if self.tournament_size == 0 {
            return Err(ConfigError::EmptyTournament);
        }
        for (name, value) in [("crossover_rate", self.crossover_rate), ("mutation_rate", self.mutation_rate)] {
            if !(0.0..=1.0).contains(&value) {
                return Err(ConfigError::Rate { name, value });
            }
        }
        if self.stall_generations == 0 {
            return Err(ConfigError::NoStall);
        }
        if self.eval_time_budget.is_zero() {
            return Err(ConfigError::NoBudget);
        }
        if self.max_depth == 0 {
            return Err(ConfigError::NoDepth);
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_valid() {
        let c = EvolutionConfig::default();
        c.validate().unwrap();
        assert_eq!(c.tournament_size, 2);
        assert_eq!(c.eval_time_budget, Duration::from_secs(300));
    }

    #[test]
    fn rejects_bad_values() {
        let bad = EvolutionConfig { elite_count: 100, ..Default::default() };
        assert!(matches!(bad.validate(), Err(ConfigError::TooManyElites { .. })));
        let bad = EvolutionConfig { mutation_rate: 1.5, ..Default::default() };
        assert!(matches!(bad.validate(), Err(ConfigError::Rate { name: "mutation_rate", .. })));
        let bad = EvolutionConfig { stall_generations: 0, ..Default::default() };
        assert_eq!(bad.validate(), Err(ConfigError::NoStall));
    }

    #[test]
    fn json_round_trip() {
        let c = EvolutionConfig { eval_time_budget: Duration::from_millis(2500), ..Default::default() };
        let json = serde_json::to_string(&c).unwrap();
        assert!(json.contains("\"eval_time_budget_secs\":2.5"));
        assert_eq!(serde_json::from_str::<EvolutionConfig>(&json).unwrap(), c);
    }
}
