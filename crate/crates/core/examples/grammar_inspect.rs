//! Parse a grammar, query it, and print the size of its search space.
//!
//! cargo run --example grammar_inspect [path/to/grammar.bnf]

use dsge_pipelines::grammar::parse_grammar;
use dsge_pipelines::PIPELINE_GRAMMAR;

fn main() {
    let source = match std::env::args().nth(1) {
        Some(path) => std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{path}: {e}")),
        None => PIPELINE_GRAMMAR.to_string(),
    };
    let grammar = match parse_grammar(&source) {
        Ok(g) => g,
        Err(e) => {
            eprintln!("invalid grammar: {e}");
            std::process::exit(1);
        }
    };

    println!("start symbol: <{}>", grammar.start());
    for rule in grammar.rules() {
        println!("  <{}>: {} alternative(s)", rule.name, grammar.expansion_count(&rule.name).unwrap());
    }
    println!("recursive: {}", grammar.is_recursive());
    println!("minimum derivation depth: {:?}", grammar.min_derivation_depth());
    println!("distinct derivations (random numbers count once): {}", grammar.combination_count());

    let toy = parse_grammar("<s> ::= <a> <b> | <b>\n<a> ::= x | y\n<b> ::= 0 | 1\n").unwrap();
    println!("\ntoy grammar has {} derivations; canonical form:\n{}", toy.combination_count(), toy.render());
}
