use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::dsge::{Genotype, Phenotype};
use crate::evolution::{EvalStatus, GenerationStats, Individual, StatusCounts, StopReason};
use crate::pipeline::PipelineSpec;

use super::config::ConfigEcho;
use super::HarnessError;

/// Name used for pipelines with nothing in a category.
pub const NONE_BUCKET: &str = "none";
/// Name collecting methods beyond `max_methods`.
pub const OTHERS_BUCKET: &str = "others";

/// Share of each method among the occurrences in one category.
pub type Frequencies = BTreeMap<String, f64>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodFrequencies {
    pub preprocessing: Frequencies,
    pub classifier: Frequencies,
}

/// Method shares among the `top_k` fittest individuals (ties to the lower
/// slot). Each component occurrence counts once; an individual without
/// preprocessors adds one `none` to that category, and one without any
/// classifier (a failed mapping) adds `none` to the classifier category.
pub fn method_frequencies(population: &[Individual], top_k: usize, max_methods: Option<usize>) -> MethodFrequencies {
    let mut order: Vec<usize> = (0..population.len()).collect();
    order.sort_by(|&a, &b| population[b].fitness.total_cmp(&population[a].fitness));
    let mut pre: BTreeMap<String, usize> = BTreeMap::new();
    let mut cls: BTreeMap<String, usize> = BTreeMap::new();
    for &i in order.iter().take(top_k.max(1)) {
        let (p, c) = methods(&population[i].phenotype);
        if p.is_empty() {
            *pre.entry(NONE_BUCKET.into()).or_default() += 1;
        }
        for name in p {
            *pre.entry(name).or_default() += 1;
        }
        *cls.entry(c.unwrap_or_else(|| NONE_BUCKET.into())).or_default() += 1;
    }
    MethodFrequencies { preprocessing: shares(pre, max_methods), classifier: shares(cls, max_methods) }
}

fn methods(phenotype: &Phenotype) -> (Vec<String>, Option<String>) {
    let mut pre = Vec::new();
    let mut cls = None;
    for token in phenotype.tokens() {
        if let Some(name) = token.strip_prefix("preprocessing:") {
            pre.push(name.to_string());
        } else if let Some(name) = token.strip_prefix("classifier:") {
            cls = Some(name.to_string());
        }
    }
    (pre, cls)
}

fn shares(counts: BTreeMap<String, usize>, max_methods: Option<usize>) -> Frequencies {
    let total: usize = counts.values().sum();
    let mut counts: Vec<(String, usize)> = counts.into_iter().collect();
    if let Some(limit) = max_methods {
        if counts.len() > limit {
            // most frequent first, names ascending on ties
            counts.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
            let rest: usize = counts[limit..].iter().map(|(_, n)| n).sum();
            counts.truncate(limit);
            let slot = counts.iter().position(|(name, _)| name == OTHERS_BUCKET);
            match slot {
                Some(i) => counts[i].1 += rest,
                None => counts.push((OTHERS_BUCKET.into(), rest)),
            }
        }
    }
    counts.into_iter().map(|(name, n)| (name, n as f64 / total as f64)).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenerationRecord {
    pub generation: usize,
    pub best: f64,
    pub mean: Option<f64>,
    pub worst: f64,
    pub best_ever: f64,
    pub status_counts: StatusCounts,
    pub new_evaluations: usize,
    pub fitnesses: Vec<f64>,
    pub method_frequencies: MethodFrequencies,
}

impl GenerationRecord {
    pub fn new(stats: &GenerationStats, method_frequencies: MethodFrequencies) -> Self {
        Self {
            generation: stats.generation,
            best: stats.best,
            mean: stats.mean,
            worst: stats.worst,
            best_ever: stats.best_ever,
            status_counts: stats.status_counts,
            new_evaluations: stats.new_evaluations,
            fitnesses: stats.fitnesses.clone(),
            method_frequencies,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GrammarInfo {
    pub source: String,
    pub combination_count: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetInfo {
    pub instances: usize,
    pub features: usize,
    pub class_names: Vec<String>,
    pub feature_names: Vec<String>,
}

/// Row indices into the full dataset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Partition {
    pub outer: String,
    pub train: Vec<usize>,
    pub test: Vec<usize>,
    /// Held-out rows of every inner cross-validation fold.
    pub inner_folds: Vec<Vec<usize>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BestRecord {
    pub genotype: Genotype,
    pub phenotype: Phenotype,
    pub pipeline: Option<PipelineSpec>,
    pub cv_fitness: f64,
    pub status: EvalStatus,
}

impl BestRecord {
    pub fn new(best: &Individual, pipeline: Option<PipelineSpec>) -> Self {
        Self {
            genotype: best.genotype.clone(),
            phenotype: best.phenotype.clone(),
            pipeline,
            cv_fitness: best.fitness,
            status: best.status,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestMetrics {
    pub macro_f: f64,
    pub per_class_f: Vec<f64>,
    pub accuracy: f64,
    /// `confusion_matrix[truth][predicted]`.
    pub confusion_matrix: Vec<Vec<usize>>,
}

impl TestMetrics {
    pub fn compute(truth: &[usize], predicted: &[usize], n_classes: usize) -> Self {
        let correct = truth.iter().zip(predicted).filter(|(t, p)| t == p).count();
        Self {
            macro_f: crate::ml::f_measure(truth, predicted, n_classes),
            per_class_f: crate::ml::per_class_f_measure(truth, predicted, n_classes),
            accuracy: if truth.is_empty() { 0.0 } else { correct as f64 / truth.len() as f64 },
            confusion_matrix: crate::ml::confusion_matrix(truth, predicted, n_classes),
        }
    }
}

/// Outcome of the single final evaluation on the test partition.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TestOutcome {
    Evaluated(TestMetrics),
    Failed(String),
}

impl TestOutcome {
    pub fn metrics(&self) -> Option<&TestMetrics> {
        match self {
            TestOutcome::Evaluated(m) => Some(m),
            TestOutcome::Failed(_) => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Timings {
    pub evolution_secs: f64,
    pub final_evaluation_secs: f64,
    pub total_secs: f64,
}

/// Facts about this particular execution that do not affect results.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Execution {
    pub workers: usize,
    pub out: Option<PathBuf>,
    pub timings: Timings,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub master_seed: u64,
    pub config: ConfigEcho,
    pub grammar: GrammarInfo,
    pub dataset: DatasetInfo,
    pub partition: Partition,
    pub generations: Vec<GenerationRecord>,
    pub stop_reason: StopReason,
    pub total_evaluations: usize,
    pub best: BestRecord,
    pub test: TestOutcome,
    pub execution: Execution,
}

impl RunReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// JSON with the `execution` section removed: identical for runs that
    /// only differ in worker count, output directory or timing.
    pub fn deterministic_json(&self) -> String {
        let mut value = serde_json::to_value(self).expect("report serializes");
        if let Some(obj) = value.as_object_mut() {
            obj.remove("execution");
        }
        serde_json::to_string_pretty(&value).expect("report serializes")
    }

    pub fn read(path: &Path) -> Result<Self, HarnessError> {
        let text = std::fs::read_to_string(path).map_err(|e| HarnessError::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| HarnessError::Report(e.to_string()))
    }

    /// Writes `report.json`, `generations.csv` and `best_pipeline.json`.
    pub fn write(&self, dir: &Path) -> Result<(), HarnessError> {
        std::fs::create_dir_all(dir).map_err(|e| HarnessError::io(dir, e))?;
        let report = dir.join("report.json");
        std::fs::write(&report, self.to_json()).map_err(|e| HarnessError::io(&report, e))?;
        let csv_path = dir.join("generations.csv");
        let mut csv_writer = csv::Writer::from_path(&csv_path).map_err(|e| HarnessError::Csv(e.to_string()))?;
        self.write_generations_csv(&mut csv_writer)?;
        csv_writer.flush().map_err(|e| HarnessError::io(&csv_path, e))?;
        let best = dir.join("best_pipeline.json");
        let best_json = serde_json::json!({
            "phenotype": self.best.phenotype,
            "pipeline": self.best.pipeline,
            "cv_fitness": self.best.cv_fitness,
            "test_macro_f": self.test.metrics().map(|m| m.macro_f),
        });
        std::fs::write(&best, serde_json::to_string_pretty(&best_json).expect("json"))
            .map_err(|e| HarnessError::io(&best, e))?;
        Ok(())
    }

    pub fn write_generations_csv<W: std::io::Write>(&self, w: &mut csv::Writer<W>) -> Result<(), HarnessError> {
        let err = |e: csv::Error| HarnessError::Csv(e.to_string());
        let mut header = vec!["generation", "best", "mean", "worst", "best_ever"];
        header.extend(EvalStatus::ALL.iter().map(|s| s.as_str()));
        header.push("new_evaluations");
        w.write_record(&header).map_err(err)?;
        for g in &self.generations {
            let mut row = vec![
                g.generation.to_string(),
                format!("{:?}", g.best),
                g.mean.map_or(String::new(), |m| format!("{m:?}")),
                format!("{:?}", g.worst),
                format!("{:?}", g.best_ever),
            ];
            row.extend(EvalStatus::ALL.iter().map(|&s| g.status_counts.get(s).to_string()));
            row.push(g.new_evaluations.to_string());
            w.write_record(&row).map_err(err)?;
        }
        Ok(())
    }
}
