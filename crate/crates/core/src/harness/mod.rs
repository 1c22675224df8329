//! Single-run orchestration: outer train/test split, evolution with
//! cross-validated fitness on the training part, one final test evaluation,
//! reports, and replay of a finished run.

mod config;
mod report;

use std::cell::RefCell;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::cancel::CancelToken;
use crate::dsge::{map, MapError, Phenotype};
use crate::evolution::{EvalFailure, EvalStatus, Evaluator, Evolution, EvolutionError};
use crate::grammar::{parse_grammar, GrammarError};
use crate::ml::{
    cv_fitness, load_csv, stratified_folds, stratified_holdout, Dataset, DatasetError, FitContext, FoldError, FoldPlan,
};
use crate::pipeline::{compile, FittedPipeline, PipelineError, PipelineSpec, Registry};

pub use config::{ConfigEcho, OuterSplit, RunConfig};
pub use report::{
    method_frequencies, BestRecord, DatasetInfo, Execution, Frequencies, GenerationRecord, GrammarInfo,
    MethodFrequencies, Partition, RunReport, TestMetrics, TestOutcome, Timings, NONE_BUCKET, OTHERS_BUCKET,
};

#[derive(Debug, thiserror::Error)]
pub enum HarnessError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error(transparent)]
    Dataset(#[from] DatasetError),
    #[error("grammar: {0}")]
    Grammar(#[from] GrammarError),
    #[error("cannot split data: {0}")]
    Split(#[from] FoldError),
    #[error(transparent)]
    Evolution(#[from] EvolutionError),
    #[error("unreadable report: {0}")]
    Report(String),
    #[error("csv output: {0}")]
    Csv(String),
    #[error("stored genotype does not map under this grammar: {0}")]
    GrammarMismatch(MapError),
    #[error("phenotype diverges at token {position}: stored `{stored}`, replayed `{replayed}`")]
    PhenotypeDivergence { position: usize, stored: String, replayed: String },
}

impl HarnessError {
    pub(crate) fn io(path: &Path, source: std::io::Error) -> Self {
        HarnessError::Io { path: path.to_path_buf(), source }
    }
}

/// Seed handed to pipeline components for a given phenotype. Depends only on
/// the run seed and the phenotype text, so cached and recomputed
/// evaluations agree.
pub fn phenotype_seed(master_seed: u64, phenotype: &str) -> u64 {
    // FNV-1a
    let mut hash: u64 = 0xcbf2_9ce4_8422_2325;
    for byte in phenotype.bytes() {
        hash ^= u64::from(byte);
        hash = hash.wrapping_mul(0x0000_0100_0000_01b3);
    }
    hash ^ master_seed
}

/// Fitness = mean macro F-measure over a fixed inner fold plan.
pub struct PipelineEvaluator {
    registry: Registry,
    train: Dataset,
    plan: FoldPlan,
    seed: u64,
}

impl PipelineEvaluator {
    pub fn new(registry: Registry, train: Dataset, plan: FoldPlan, seed: u64) -> Self {
        Self { registry, train, plan, seed }
    }
}

impl Evaluator for PipelineEvaluator {
    fn evaluate(&self, phenotype: &Phenotype, cancel: &CancelToken) -> Result<f64, EvalFailure> {
        let spec = compile(phenotype, &self.registry).map_err(|e| EvalFailure::Compile(e.to_string()))?;
        let ctx = FitContext::new(cancel, phenotype_seed(self.seed, &phenotype.text()));
        cv_fitness(&spec, &self.registry, &self.train, &self.plan, ctx).map_err(|e| match e {
            PipelineError::Timeout => EvalFailure::Timeout,
            PipelineError::Resource(m) => EvalFailure::Resource(m),
        })
    }
}

fn grammar_source(config: &RunConfig) -> Result<String, HarnessError> {
    match &config.grammar {
        Some(path) => std::fs::read_to_string(path).map_err(|e| HarnessError::io(path, e)),
        None => Ok(crate::PIPELINE_GRAMMAR.to_string()),
    }
}

fn load_dataset(config: &RunConfig) -> Result<Dataset, HarnessError> {
    let path = config.dataset.as_ref().ok_or_else(|| HarnessError::Config("no dataset given".into()))?;
    let label = config.label.as_ref().ok_or_else(|| HarnessError::Config("no label column given".into()))?;
    Ok(load_csv(path, label, &config.missing)?)
}

/// Loads grammar and dataset named in `config`, runs, and writes the report
/// files to `config.out`.
pub fn run(config: &RunConfig) -> Result<RunReport, HarnessError> {
    run_with_registry(config, &Registry::standard())
}

pub fn run_with_registry(config: &RunConfig, registry: &Registry) -> Result<RunReport, HarnessError> {
    config.validate()?;
    let source = grammar_source(config)?;
    let dataset = load_dataset(config)?;
    let mut report = execute(config, &source, &dataset, registry)?;
    report.execution.out = Some(config.out.clone());
    report.write(&config.out)?;
    Ok(report)
}

fn split(
    config: &RunConfig,
    dataset: &Dataset,
    rng: &mut ChaCha8Rng,
) -> Result<(Vec<usize>, Vec<usize>), HarnessError> {
    Ok(match config.outer_split()? {
        OuterSplit::Holdout(fraction) => stratified_holdout(dataset.labels(), fraction, rng)?,
        OuterSplit::Fold { index, k } => {
            let plan = stratified_folds(dataset.labels(), k, rng)?;
            (plan.train_indices(index), plan.test_indices(index))
        }
    })
}

/// Runs the full protocol on an in-memory dataset without writing files.
pub fn execute(
    config: &RunConfig,
    grammar_source: &str,
    dataset: &Dataset,
    registry: &Registry,
) -> Result<RunReport, HarnessError> {
    let started = Instant::now();
    config.validate()?;
    let evo_config = config.evolution_config()?;
    let grammar = parse_grammar(grammar_source)?;

    let mut rng = ChaCha8Rng::seed_from_u64(config.split_seed());
    let (train_rows, test_rows) = split(config, dataset, &mut rng)?;
    let train = dataset.subset(&train_rows);
    let test = dataset.subset(&test_rows);
    let plan = stratified_folds(train.labels(), config.inner_k, &mut rng)?;
    let inner_folds =
        (0..plan.k()).map(|f| plan.test_indices(f).into_iter().map(|i| train_rows[i]).collect()).collect();

    let evaluator = PipelineEvaluator::new(registry.clone(), train.clone(), plan, config.seed);
    let records = RefCell::new(Vec::new());
    let result = Evolution::new(&grammar, evo_config.clone(), &evaluator)
        .workers(config.workers)
        .observe(|stats, population| {
            let freq = method_frequencies(population, config.top_k, config.max_methods);
            records.borrow_mut().push(GenerationRecord::new(stats, freq));
        })
        .run()?;
    let evolution_secs = started.elapsed().as_secs_f64();

    let final_started = Instant::now();
    let best = &result.best;
    let pipeline = compile(&best.phenotype, registry).ok();
    let outcome = match (&pipeline, best.status) {
        (Some(spec), EvalStatus::Ok) => final_evaluation(spec, registry, &train, &test, config.seed),
        _ => TestOutcome::Failed("no pipeline was evaluated successfully".into()),
    };
    let final_evaluation_secs = final_started.elapsed().as_secs_f64();

    Ok(RunReport {
        master_seed: config.seed,
        config: config.echo()?,
        grammar: GrammarInfo {
            source: grammar_source.to_string(),
            combination_count: grammar.combination_count().to_string(),
        },
        dataset: DatasetInfo {
            instances: dataset.len(),
            features: dataset.features().cols(),
            class_names: dataset.class_names().to_vec(),
            feature_names: dataset.feature_names().to_vec(),
        },
        partition: Partition {
            outer: config.outer_split()?.to_string(),
            train: train_rows,
            test: test_rows,
            inner_folds,
        },
        generations: records.into_inner(),
        stop_reason: result.stop_reason,
        total_evaluations: result.total_evaluations,
        best: BestRecord::new(best, pipeline),
        test: outcome,
        execution: Execution {
            workers: config.workers,
            out: None,
            timings: Timings { evolution_secs, final_evaluation_secs, total_secs: started.elapsed().as_secs_f64() },
        },
    })
}

/// Trains on all of `train` and scores once on `test`.
pub fn final_evaluation(
    spec: &PipelineSpec,
    registry: &Registry,
    train: &Dataset,
    test: &Dataset,
    seed: u64,
) -> TestOutcome {
    let cancel = CancelToken::new();
    let ctx = FitContext::new(&cancel, phenotype_seed(seed, &spec.render().text()));
    let predicted = FittedPipeline::fit(spec, registry, train.features(), train.labels(), train.n_classes(), ctx)
        .and_then(|fitted| fitted.predict(test.features(), &cancel));
    match predicted {
        Ok(p) => TestOutcome::Evaluated(TestMetrics::compute(test.labels(), &p, test.n_classes())),
        Err(e) => TestOutcome::Failed(e.to_string()),
    }
}

/// Result of re-running the best pipeline of a stored report.
#[derive(Debug, Clone, PartialEq)]
pub struct ReplayOutcome {
    pub phenotype: Phenotype,
    pub pipeline: PipelineSpec,
    pub test: TestOutcome,
    pub stored_test: TestOutcome,
}

impl ReplayOutcome {
    /// True when the replayed test metrics equal the stored ones exactly.
    pub fn matches(&self) -> bool {
        self.test == self.stored_test
    }
}

/// Replays a report file, loading the dataset it names. With
/// `grammar_override` the stored genotype is mapped under that grammar
/// instead of the one embedded in the report.
pub fn replay(report_path: &Path, grammar_override: Option<&Path>) -> Result<ReplayOutcome, HarnessError> {
    let report = RunReport::read(report_path)?;
    let source = match grammar_override {
        Some(path) => std::fs::read_to_string(path).map_err(|e| HarnessError::io(path, e))?,
        None => report.grammar.source.clone(),
    };
    let config = RunConfig {
        dataset: report.config.dataset.clone(),
        label: report.config.label.clone(),
        missing: report.config.missing.clone(),
        ..RunConfig::default()
    };
    let dataset = load_dataset(&config)?;
    replay_report(&report, &source, &dataset, &Registry::standard())
}

/// Re-maps the stored genotype, checks the phenotype token by token, then
/// retrains on the stored training rows and re-evaluates on the test rows.
pub fn replay_report(
    report: &RunReport,
    grammar_source: &str,
    dataset: &Dataset,
    registry: &Registry,
) -> Result<ReplayOutcome, HarnessError> {
    let grammar = parse_grammar(grammar_source)?;
    let max_depth = report.config.evolution.max_depth;
    // growth would mean the stored genotype is incomplete; the token check catches that
    let mut rng = ChaCha8Rng::seed_from_u64(report.master_seed);
    let (phenotype, _) =
        map(&grammar, &report.best.genotype, max_depth, &mut rng).map_err(HarnessError::GrammarMismatch)?;
    let stored = report.best.phenotype.tokens();
    let replayed = phenotype.tokens();
    if let Some(position) = (0..stored.len().max(replayed.len())).find(|&i| stored.get(i) != replayed.get(i)) {
        let show = |t: Option<&String>| t.cloned().unwrap_or_else(|| "<end>".into());
        return Err(HarnessError::PhenotypeDivergence {
            position,
            stored: show(stored.get(position)),
            replayed: show(replayed.get(position)),
        });
    }
    let pipeline = compile(&phenotype, registry).map_err(|e| HarnessError::Report(e.to_string()))?;
    let train = dataset.subset(&report.partition.train);
    let test = dataset.subset(&report.partition.test);
    let outcome = final_evaluation(&pipeline, registry, &train, &test, report.master_seed);
    Ok(ReplayOutcome { phenotype, pipeline, test: outcome, stored_test: report.test.clone() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ml::synthetic::Blobs;

    fn quick_config(seed: u64) -> RunConfig {
        RunConfig { seed, population: 8, generations: 3, elite_count: 1, top_k: 4, ..Default::default() }
    }

    #[test]
    fn seed_hash_is_stable() {
        assert_eq!(phenotype_seed(0, ""), 0xcbf2_9ce4_8422_2325);
        assert_ne!(phenotype_seed(0, "a"), phenotype_seed(1, "a"));
    }

    #[test]
    fn execute_and_replay_in_memory() {
        let ds = Blobs { n_samples: 90, ..Blobs::default() }.generate(3);
        let config = quick_config(11);
        let registry = Registry::standard();
        let report = execute(&config, crate::PIPELINE_GRAMMAR, &ds, &registry).unwrap();
        assert_eq!(report.generations.len(), 3);
        assert!(report.test.metrics().is_some());
        let outcome = replay_report(&report, crate::PIPELINE_GRAMMAR, &ds, &registry).unwrap();
        assert!(outcome.matches());
        assert_eq!(outcome.phenotype, report.best.phenotype);
    }

    #[test]
    fn partitions_are_disjoint() {
        let ds = Blobs { n_samples: 60, ..Blobs::default() }.generate(4);
        let config = RunConfig { outer_fold: Some("2/5".into()), ..quick_config(5) };
        let report = execute(&config, crate::PIPELINE_GRAMMAR, &ds, &Registry::standard()).unwrap();
        let p = &report.partition;
        assert_eq!(p.train.len() + p.test.len(), 60);
        for fold in &p.inner_folds {
            assert!(fold.iter().all(|i| !p.test.contains(i)));
        }
    }
}
