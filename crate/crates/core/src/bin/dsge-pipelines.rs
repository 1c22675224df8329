use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use dsge_pipelines::grammar::parse_grammar;
use dsge_pipelines::harness::{self, RunConfig, TestOutcome};

#[derive(Parser)]
#[command(name = "dsge-pipelines", version, about = "Evolve classification pipelines from a grammar")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one evolutionary search and write report.json, generations.csv and best_pipeline.json
    Run(Box<RunArgs>),
    /// Re-map, retrain and re-evaluate the best pipeline of a report
    Replay {
        #[arg(long)]
        report: PathBuf,
        /// Map the stored genotype under this grammar instead of the embedded one
        #[arg(long)]
        grammar: Option<PathBuf>,
    },
    /// Validate a grammar file and print its size
    GrammarCheck {
        #[arg(long)]
        grammar: PathBuf,
    },
}

#[derive(Args)]
struct RunArgs {
    /// TOML file with any of the keys below; flags take precedence
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    grammar: Option<PathBuf>,
    #[arg(long)]
    dataset: Option<PathBuf>,
    #[arg(long)]
    label: Option<String>,
    #[arg(long)]
    missing: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    split_seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    population: Option<usize>,
    #[arg(long)]
    generations: Option<usize>,
    #[arg(long)]
    tournament_size: Option<usize>,
    #[arg(long)]
    crossover_rate: Option<f64>,
    #[arg(long)]
    mutation_rate: Option<f64>,
    #[arg(long)]
    elite_count: Option<usize>,
    #[arg(long)]
    stall_generations: Option<usize>,
    #[arg(long)]
    budget_secs: Option<f64>,
    #[arg(long)]
    max_depth: Option<usize>,
    #[arg(long)]
    inner_k: Option<usize>,
    #[arg(long, conflicts_with = "outer_fold")]
    outer_holdout: Option<f64>,
    /// I/K: fold I of a K-fold plan is the test set
    #[arg(long)]
    outer_fold: Option<String>,
    #[arg(long)]
    top_k: Option<usize>,
    #[arg(long)]
    max_methods: Option<usize>,
    #[arg(long)]
    workers: Option<usize>,
}

impl RunArgs {
    fn into_config(self) -> Result<RunConfig, harness::HarnessError> {
        let mut c = match &self.config {
            Some(path) => RunConfig::from_toml_file(path)?,
            None => RunConfig::default(),
        };
        macro_rules! set {
            ($($field:ident),*) => { $( if let Some(v) = self.$field { c.$field = v; } )* };
        }
        macro_rules! set_opt {
            ($($field:ident),*) => { $( if self.$field.is_some() { c.$field = self.$field; } )* };
        }
        set!(missing, seed, out, population, generations, tournament_size, crossover_rate, mutation_rate);
        set!(elite_count, stall_generations, budget_secs, max_depth, inner_k, top_k, workers);
        set_opt!(grammar, dataset, label, split_seed, max_methods);
        if self.outer_holdout.is_some() {
            c.outer_holdout = self.outer_holdout;
            c.outer_fold = None;
        }
        if self.outer_fold.is_some() {
            c.outer_fold = self.outer_fold;
            c.outer_holdout = None;
        }
        Ok(c)
    }
}

fn print_test(label: &str, outcome: &TestOutcome) {
    match outcome {
        TestOutcome::Evaluated(m) => println!("{label} macro-F {:.4}  accuracy {:.4}", m.macro_f, m.accuracy),
        TestOutcome::Failed(reason) => println!("{label} failed: {reason}"),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run(args) => args.into_config().and_then(|config| {
            let report = harness::run(&config)?;
            println!("generations: {} ({:?})", report.generations.len(), report.stop_reason);
            println!("best: {}", report.best.phenotype);
            println!("cv fitness: {:.4}", report.best.cv_fitness);
            print_test("test", &report.test);
            println!("report written to {}", config.out.display());
            Ok(true)
        }),
        Command::Replay { report, grammar } => harness::replay(&report, grammar.as_deref()).map(|outcome| {
            println!("phenotype: {}", outcome.phenotype);
            print_test("stored  ", &outcome.stored_test);
            print_test("replayed", &outcome.test);
            if !outcome.matches() {
                eprintln!("replayed test metrics differ from the stored ones");
            }
            outcome.matches()
        }),
        Command::GrammarCheck { grammar } => std::fs::read_to_string(&grammar)
            .map_err(|e| harness::HarnessError::Io { path: grammar.clone(), source: e })
            .and_then(|text| Ok(parse_grammar(&text)?))
            .map(|g| {
                let productions: usize = g.rules().iter().map(|r| r.productions.len()).sum();
                println!("ok: {} nonterminals, {productions} productions", g.rules().len());
                println!("start: <{}>", g.start());
                println!("combinations: {}", g.combination_count());
                true
            }),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
