//! Grammar-guided evolution of machine-learning classification pipelines.
//!
//! The search space is a context-free grammar whose terminals name pipeline
//! components (`preprocessing:<name>`, `classifier:<name>`) and their
//! parameters (`param:value`). Individuals are encoded with dynamic structured
//! grammatical evolution: one codon list per nonterminal, grown on demand while
//! mapping, plus stored tuples for bounded random numbers
//! (`RANDINT(lo,hi)` / `RANDFLOAT(lo,hi)` terminals).
//!
//! Evaluation is a two-step mapping: genotype to phenotype (a token stream), then
//! phenotype to an executable [`pipeline::PipelineSpec`] that is scored by
//! stratified cross-validation with the macro-averaged F-measure.
//!
//! ```
//! use dsge_pipelines::grammar::parse_grammar;
//! use dsge_pipelines::dsge::{map, random_genotype};
//! use rand::SeedableRng;
//! use rand_chacha::ChaCha8Rng;
//!
//! let grammar = parse_grammar(
//!     "<s> ::= <a> <b> | <b>\n<a> ::= x | y\n<b> ::= 0 | 1\n",
//! ).unwrap();
//! let mut rng = ChaCha8Rng::seed_from_u64(7);
//! let genotype = random_genotype(&grammar, &mut rng, 17).unwrap();
//! let (phenotype, _) = map(&grammar, &genotype, 17, &mut rng).unwrap();
//! assert!(!phenotype.tokens().is_empty());
//! ```
//!
//! Runnable walkthroughs of every major capability live in the crate's
//! `examples/` directory (`cargo run --example <name>`).

pub mod cancel;
pub mod dsge;
pub mod evolution;
pub mod grammar;
pub mod harness;
pub mod ml;
pub mod pipeline;

/// The pipeline grammar shipped with the crate, matched to [`pipeline::Registry::standard`].
pub const PIPELINE_GRAMMAR: &str = include_str!("../grammars/pipeline.bnf");

pub use cancel::CancelToken;
pub use dsge::{Genotype, Phenotype, RandValue};

pub use grammar::{Grammar, GrammarError, Symbol};

pub use evolution::{EvalStatus, EvolutionConfig, Individual};
pub use pipeline::{ComponentSpec, PipelineSpec, Registry};
