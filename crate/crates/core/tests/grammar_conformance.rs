mod common;

use std::fs;
use std::path::Path;

use dsge_pipelines::grammar::{parse_grammar, Combinations, GrammarError};
use num_bigint::BigUint;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn corpus(dir: &str) -> Vec<(String, String)> {
    let root = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/data/grammars").join(dir);
    let mut files: Vec<_> = fs::read_dir(&root)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|x| x == "bnf"))
        .collect();
    files.sort();
    files
        .into_iter()
        .map(|p| (p.file_stem().unwrap().to_string_lossy().into_owned(), fs::read_to_string(&p).unwrap()))
        .collect()
}

#[test]
fn every_valid_file_parses_and_round_trips() {
    let files = corpus("valid");
    assert!(files.len() >= 7);
    for (name, text) in files {
        let g = parse_grammar(&text).unwrap_or_else(|e| panic!("{name}: {e}"));
        let again = parse_grammar(&g.render()).unwrap_or_else(|e| panic!("{name} re-parse: {e}"));
        assert_eq!(g.rules(), again.rules(), "{name}");
        assert_eq!(g.start(), again.start(), "{name}");
    }
}

#[test]
fn every_invalid_file_is_rejected_with_the_expected_error() {
    let files = corpus("invalid");
    assert!(files.len() >= 9);
    for (name, text) in files {
        let err = parse_grammar(&text).expect_err(&name);
        let expected = match name.as_str() {
            "undefined_nonterminal" => {
                matches!(err, GrammarError::UndefinedNonterminal { ref name, .. } if name == "a")
            }
            "duplicate_rule" => matches!(err, GrammarError::DuplicateRule { ref name, line: Some(2) } if name == "s"),
            "unreachable" => matches!(err, GrammarError::Unreachable { ref name } if name == "orphan"),
            "reversed_randint" | "malformed_randfloat" => {
                matches!(err, GrammarError::MalformedRand { line: 1, .. } | GrammarError::InvalidSymbol { .. })
            }
            "missing_arrow" | "empty_alternative" | "continuation_without_rule" => {
                matches!(err, GrammarError::Syntax { .. })
            }
            "empty_file" => matches!(err, GrammarError::NoRules),
            other => panic!("no expectation for {other}"),
        };
        assert!(expected, "{name}: unexpected error {err:?}");
    }
}

#[test]
fn recursion_is_reported_as_non_finite() {
    for (name, text) in corpus("valid") {
        let g = parse_grammar(&text).unwrap();
        let recursive = name.contains("recursi");
        assert_eq!(g.is_recursive(), recursive, "{name}");
        assert_eq!(matches!(g.combination_count(), Combinations::NonFinite), recursive, "{name}");
    }
}

#[test]
fn combination_count_matches_enumeration_on_the_toy_corpus() {
    let corpus = common::toy_corpus();
    assert!(corpus.len() >= 10);
    for text in corpus {
        let g = parse_grammar(text).unwrap();
        let productions: usize = g.rules().iter().map(|r| r.productions.len()).sum();
        assert!(productions <= 12, "{text}");
        let enumerated = common::enumerate_derivations(&g).len();
        assert_eq!(g.combination_count(), Combinations::Finite(BigUint::from(enumerated)), "{text}");
    }
}

#[test]
fn hand_counted_sizes() {
    let expect = [(common::TOY, 6u32), ("<s> ::= <m> <m> <m>\n<m> ::= on | off\n", 8), ("<s> ::= a\n", 1)];
    for (text, n) in expect {
        assert_eq!(parse_grammar(text).unwrap().combination_count(), Combinations::Finite(BigUint::from(n)));
    }
}

#[test]
fn shipped_grammar_is_finite_and_shallow() {
    let g = parse_grammar(dsge_pipelines::PIPELINE_GRAMMAR).unwrap();
    assert!(!g.is_recursive());
    assert_eq!(g.combination_count(), Combinations::Finite(BigUint::from(450u32)));
    assert!(g.min_derivation_depth().unwrap() <= 17);
}

proptest! {
    #[test]
    fn random_grammars_round_trip_and_count(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let source = common::random_grammar_source(&mut rng, 12);
        let g = parse_grammar(&source).unwrap();
        let again = parse_grammar(&g.render()).unwrap();
        prop_assert_eq!(g.rules(), again.rules());
        let enumerated = common::enumerate_derivations(&g).len();
        prop_assert_eq!(g.combination_count(), Combinations::Finite(BigUint::from(enumerated)));
    }
}
