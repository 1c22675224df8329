//! Independent oracles shared by the integration tests and the acceptance
//! suite. Nothing here calls into the library's counting, mapping or metric
//! code; only the plain grammar data structures are read.

#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};

use dsge_pipelines::grammar::{Grammar, Symbol};
use dsge_pipelines::{Genotype, RandValue};
use rand::Rng;

pub const TOY: &str = "<s> ::= <a> <b> | <b>\n<a> ::= x | y\n<b> ::= 0 | 1\n";

fn rule<'g>(g: &'g Grammar, name: &str) -> &'g dsge_pipelines::grammar::Rule {
    g.rules().iter().find(|r| r.name == name).expect("rule exists")
}

/// Every complete derivation tree of a non-recursive grammar, written out as
/// nested choice indices. Random-number terminals contribute one placeholder.
pub fn enumerate_derivations(g: &Grammar) -> BTreeSet<String> {
    fn expand(g: &Grammar, nt: &str) -> Vec<String> {
        let mut out = Vec::new();
        for (i, p) in rule(g, nt).productions.iter().enumerate() {
            let mut partial = vec![format!("{nt}{i}(")];
            for s in &p.symbols {
                let options: Vec<String> = match s {
                    Symbol::NonTerminal(n) => expand(g, n),
                    other => vec![format!("{other}")],
                };
                partial = partial.iter().flat_map(|pre| options.iter().map(move |o| format!("{pre}{o},"))).collect();
            }
            out.extend(partial.into_iter().map(|p| p + ")"));
        }
        out
    }
    expand(g, g.start()).into_iter().collect()
}

/// Sentences derivable with every nonterminal expanded at depth at most
/// `max_depth` (the start symbol sits at depth 1). Random-number terminals
/// appear as their grammar text.
pub fn sentences(g: &Grammar, max_depth: usize) -> BTreeSet<Vec<String>> {
    fn expand(g: &Grammar, nt: &str, depth: usize, max_depth: usize) -> Vec<Vec<String>> {
        if depth > max_depth {
            return Vec::new();
        }
        let mut out = Vec::new();
        for p in &rule(g, nt).productions {
            let mut partial: Vec<Vec<String>> = vec![Vec::new()];
            for s in &p.symbols {
                let options = match s {
                    Symbol::NonTerminal(n) => expand(g, n, depth + 1, max_depth),
                    other => vec![vec![format!("{other}")]],
                };
                partial = partial
                    .iter()
                    .flat_map(|pre| {
                        options.iter().map(move |o| {
                            let mut v = pre.clone();
                            v.extend(o.iter().cloned());
                            v
                        })
                    })
                    .collect();
            }
            out.extend(partial);
        }
        out
    }
    expand(g, g.start(), 1, max_depth).into_iter().collect()
}

fn terminal_matches(s: &Symbol, token: &str) -> bool {
    let split_tag = |tag: &Option<String>| -> Option<String> {
        match tag {
            Some(t) => token.strip_prefix(&format!("{t}:")).map(str::to_string),
            None => Some(token.to_string()),
        }
    };
    match s {
        Symbol::Terminal(t) => t == token,
        Symbol::RandInt { tag, lo, hi } => {
            split_tag(tag).and_then(|v| v.parse::<i64>().ok()).is_some_and(|v| *lo <= v && v <= *hi)
        }
        Symbol::RandFloat { tag, lo, hi } => {
            split_tag(tag).and_then(|v| v.parse::<f64>().ok()).is_some_and(|v| *lo <= v && v <= *hi)
        }
        Symbol::NonTerminal(_) => false,
    }
}

/// Sentence membership by memoised top-down recognition: does the start
/// symbol derive exactly `tokens`? Random-number terminals accept any value
/// within their bounds, with the tag prefix when one is declared.
pub fn is_sentence(g: &Grammar, tokens: &[String]) -> bool {
    struct Recognizer<'a> {
        g: &'a Grammar,
        tokens: &'a [String],
        memo: HashMap<(String, usize), BTreeSet<usize>>,
        active: HashSet<(String, usize)>,
    }
    impl Recognizer<'_> {
        fn nt(&mut self, name: &str, pos: usize) -> BTreeSet<usize> {
            let key = (name.to_string(), pos);
            if let Some(done) = self.memo.get(&key) {
                return done.clone();
            }
            if !self.active.insert(key.clone()) {
                return BTreeSet::new();
            }
            let mut ends = BTreeSet::new();
            for p in rule(self.g, name).productions.clone() {
                let mut positions = BTreeSet::from([pos]);
                for s in &p.symbols {
                    let mut next = BTreeSet::new();
                    for &at in &positions {
                        match s {
                            Symbol::NonTerminal(n) => next.extend(self.nt(n, at)),
                            other => {
                                if at < self.tokens.len() && terminal_matches(other, &self.tokens[at]) {
                                    next.insert(at + 1);
                                }
                            }
                        }
                    }
                    positions = next;
                }
                ends.extend(positions);
            }
            self.active.remove(&key);
            self.memo.insert(key, ends.clone());
            ends
        }
    }
    let mut r = Recognizer { g, tokens, memo: HashMap::new(), active: HashSet::new() };
    r.nt(g.start(), 0).contains(&tokens.len())
}

/// Genes read while re-deriving `genotype` without any growth or repair.
#[derive(Debug, Default, PartialEq)]
pub struct Reads {
    pub tokens: Vec<String>,
    pub codons: BTreeMap<String, usize>,
    pub rand_values: BTreeMap<String, usize>,
}

/// Replays the leftmost derivation encoded by `genotype`. Returns `None` if a
/// codon or tuple is missing or invalid, or the depth bound is exceeded.
pub fn replay_reads(g: &Grammar, genotype: &Genotype, max_depth: usize) -> Option<Reads> {
    fn go(g: &Grammar, geno: &Genotype, nt: &str, depth: usize, max_depth: usize, r: &mut Reads) -> Option<()> {
        if depth > max_depth {
            return None;
        }
        let i = r.codons.entry(nt.to_string()).or_default();
        let codon = *geno.codons.get(nt)?.get(*i)?;
        *i += 1;
        let production = rule(g, nt).productions.get(codon)?.clone();
        for s in &production.symbols {
            match s {
                Symbol::NonTerminal(n) => go(g, geno, n, depth + 1, max_depth, r)?,
                Symbol::Terminal(t) => r.tokens.push(t.clone()),
                Symbol::RandInt { tag, .. } | Symbol::RandFloat { tag, .. } => {
                    let j = r.rand_values.entry(nt.to_string()).or_default();
                    let value = *geno.rand_values.get(nt)?.get(*j)?;
                    *j += 1;
                    let text = match value {
                        RandValue::Int { value, .. } => value.to_string(),
                        RandValue::Float { value, .. } => format!("{value:?}"),
                    };
                    r.tokens.push(match tag {
                        Some(t) => format!("{t}:{text}"),
                        None => text,
                    });
                }
            }
        }
        Some(())
    }
    let mut r = Reads::default();
    go(g, genotype, g.start(), 1, max_depth, &mut r)?;
    Some(r)
}

/// True when every stored codon and tuple was read exactly once.
pub fn consumed_exactly(g: &Grammar, genotype: &Genotype, max_depth: usize) -> bool {
    let Some(reads) = replay_reads(g, genotype, max_depth) else { return false };
    let stored_codons: BTreeMap<String, usize> =
        genotype.codons.iter().filter(|(_, v)| !v.is_empty()).map(|(k, v)| (k.clone(), v.len())).collect();
    let stored_rands: BTreeMap<String, usize> =
        genotype.rand_values.iter().filter(|(_, v)| !v.is_empty()).map(|(k, v)| (k.clone(), v.len())).collect();
    reads.codons == stored_codons && reads.rand_values == stored_rands
}

/// Macro F-measure from an explicit confusion matrix.
pub fn brute_force_macro_f(truth: &[usize], predicted: &[usize], n_classes: usize) -> f64 {
    let mut m = vec![vec![0u64; n_classes]; n_classes];
    for (&t, &p) in truth.iter().zip(predicted) {
        m[t][p] += 1;
    }
    let mut total = 0.0;
    for (c, counts) in m.iter().enumerate() {
        let tp = counts[c] as f64;
        let row: u64 = counts.iter().sum();
        let col: u64 = (0..n_classes).map(|r| m[r][c]).sum();
        let precision = if col == 0 { 0.0 } else { tp / col as f64 };
        let recall = if row == 0 { 0.0 } else { tp / row as f64 };
        total += if precision + recall == 0.0 { 0.0 } else { 2.0 * precision * recall / (precision + recall) };
    }
    total / n_classes as f64
}

/// A random non-recursive grammar source: nonterminal `n{i}` only refers to
/// `n{j}` with `j > i`, and every nonterminal is reachable.
pub fn random_grammar_source<R: Rng>(rng: &mut R, max_productions: usize) -> String {
    let n_nt = rng.random_range(1..=4);
    let mut rules: Vec<Vec<Vec<String>>> = Vec::new();
    let mut budget = max_productions;
    for i in 0..n_nt {
        let remaining_rules = n_nt - i - 1;
        let max_here = (budget - remaining_rules).clamp(1, 3);
        let n_prod = rng.random_range(1..=max_here);
        budget -= n_prod;
        let mut prods = Vec::new();
        for _ in 0..n_prod {
            let len = rng.random_range(1..=3);
            let mut syms = Vec::new();
            for _ in 0..len {
                let roll = rng.random_range(0..10);
                if roll < 3 && i + 1 < n_nt {
                    syms.push(format!("<n{}>", rng.random_range(i + 1..n_nt)));
                } else if roll == 3 {
                    let lo = rng.random_range(-5..5);
                    syms.push(format!("v:RANDINT({lo},{})", lo + rng.random_range(0..10)));
                } else if roll == 4 {
                    syms.push("w:RANDFLOAT(0.5,2.25)".into());
                } else {
                    syms.push(["a", "b", "c", "tag:x", "1"][rng.random_range(0..5)].to_string());
                }
            }
            prods.push(syms);
        }
        rules.push(prods);
    }
    // make sure every rule is referenced from an earlier one
    for j in 1..n_nt {
        let reference = format!("<n{j}>");
        if !rules[..j].iter().flatten().flatten().any(|s| *s == reference) {
            let i = rng.random_range(0..j);
            let p = rng.random_range(0..rules[i].len());
            rules[i][p].push(reference);
        }
    }
    rules
        .iter()
        .enumerate()
        .map(|(i, prods)| {
            let alts: Vec<String> = prods.iter().map(|p| p.join(" ")).collect();
            format!("<n{i}> ::= {}\n", alts.join(" | "))
        })
        .collect()
}

/// Ten small non-recursive grammars with hand-checkable sizes.
pub fn toy_corpus() -> Vec<&'static str> {
    vec![
        TOY,
        "<s> ::= a\n",
        "<s> ::= a | b | c\n",
        "<s> ::= <x> <x>\n<x> ::= 0 | 1 | 2\n",
        "<s> ::= <x> | <y>\n<x> ::= a | b\n<y> ::= c <x>\n",
        "<s> ::= <p> <q> <r>\n<p> ::= a | b\n<q> ::= c | d\n<r> ::= e | f\n",
        "<s> ::= k:RANDINT(0,9) | <t>\n<t> ::= t:RANDFLOAT(0.0,1.0) | u\n",
        "<s> ::= <a> <b> | <b> <a>\n<a> ::= x | y | z\n<b> ::= <c> | w\n<c> ::= 1 | 2\n",
        "<s> ::= <u>\n<u> ::= <v>\n<v> ::= <w>\n<w> ::= q | r\n",
        "<s> ::= <m> <m> <m>\n<m> ::= on | off\n",
        "<s> ::= preprocessing:imputer <st> classifier:knn <k> | classifier:knn <k>\n<st> ::= strategy:mean | strategy:median | strategy:most_frequent\n<k> ::= n_neighbors:RANDINT(1,30)\n",
    ]
}
