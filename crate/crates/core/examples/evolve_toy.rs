//! The evolutionary engine with a plain closure as fitness function.
//!
//! cargo run --example evolve_toy

use dsge_pipelines::cancel::CancelToken;
use dsge_pipelines::evolution::{EvalFailure, Evolution, EvolutionConfig};
use dsge_pipelines::grammar::parse_grammar;
use dsge_pipelines::Phenotype;

fn main() {
    // Sentences are sums of digits; fitness rewards getting close to 42.
    let grammar = parse_grammar(
        "<expr> ::= <digit> | <digit> + <expr>\n\
         <digit> ::= d:RANDINT(0,9)\n",
    )
    .unwrap();
    let fitness = |p: &Phenotype, _: &CancelToken| -> Result<f64, EvalFailure> {
        let sum: i64 = p.tokens().iter().filter_map(|t| t.strip_prefix("d:")).map(|v| v.parse::<i64>().unwrap()).sum();
        Ok(1.0 / (1.0 + (sum - 42).abs() as f64))
    };
    let config = EvolutionConfig {
        population_size: 30,
        max_generations: 40,
        stall_generations: 10,
        max_depth: 10,
        master_seed: 7,
        ..Default::default()
    };
    let result = Evolution::new(&grammar, config, &fitness)
        .workers(4)
        .observe(|stats, _| {
            println!("gen {:>2}: best {:.3} mean {:.3}", stats.generation, stats.best, stats.mean.unwrap_or(0.0))
        })
        .run()
        .unwrap();
    println!("stopped: {:?} after {} evaluations", result.stop_reason, result.total_evaluations);
    println!("best: {} (fitness {:.3})", result.best.phenotype, result.best.fitness);
}
