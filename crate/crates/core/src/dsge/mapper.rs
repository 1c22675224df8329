use std::collections::HashMap;

use rand::seq::IndexedRandom;
use rand::Rng;

use super::{Genotype, Phenotype, RandValue};
use crate::grammar::{Grammar, Symbol};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum MapError {
    #[error("no derivation of <{start}> fits within depth {max_depth}")]
    InfeasibleDepth { start: String, max_depth: usize },
    #[error("codon {codon} of <{nonterminal}> exceeds the depth bound at depth {depth}")]
    DepthExceeded { nonterminal: String, codon: usize, depth: usize },
    #[error("codon {codon} of <{nonterminal}> is out of range (expansion count {count})")]
    CodonOutOfRange { nonterminal: String, codon: usize, count: usize },
    #[error("random value #{position} of <{nonterminal}> does not match the grammar terminal {symbol}")]
    RandMismatch { nonterminal: String, position: usize, symbol: String },
}

/// How stored genes that no longer fit the derivation are treated.
#[derive(Debug, Clone, Copy)]
pub(super) enum Mode {
    /// Invalid stored genes are errors.
    Strict,
    /// Invalid stored genes are replaced by fresh depth-feasible ones, and each
    /// stored gene is re-drawn with probability `mutation_rate`.
    Repair { mutation_rate: f64 },
}

struct Walker<'a, R: ?Sized> {
    grammar: &'a Grammar,
    input: &'a Genotype,
    max_depth: usize,
    mode: Mode,
    rng: &'a mut R,
    codon_cursor: HashMap<&'a str, usize>,
    rand_cursor: HashMap<&'a str, usize>,
    out: Genotype,
    tokens: Vec<String>,
}

impl<'a, R: Rng + ?Sized> Walker<'a, R> {
    fn feasible(&self, rule: usize, depth: usize) -> Vec<usize> {
        let count = self.grammar.rule_at(rule).productions.len();
        (0..count).filter(|&p| self.fits(rule, p, depth)).collect()
    }

    fn fits(&self, rule: usize, production: usize, depth: usize) -> bool {
        self.grammar.production_depth(rule, production).is_some_and(|d| depth - 1 + d <= self.max_depth)
    }

    fn choose(&mut self, rule: usize, depth: usize, name: &'a str) -> Result<usize, MapError> {
        let count = self.grammar.rule_at(rule).productions.len();
        let position = *self.codon_cursor.entry(name).and_modify(|c| *c += 1).or_insert(1) - 1;
        let stored = self.input.codons.get(name).and_then(|list| list.get(position)).copied();

        let fresh = |walker: &mut Self| -> Result<usize, MapError> {
            let options = walker.feasible(rule, depth);
            options.choose(walker.rng).copied().ok_or_else(|| MapError::DepthExceeded {
                nonterminal: name.to_string(),
                codon: 0,
                depth,
            })
        };

        match (stored, self.mode) {
            (None, _) => fresh(self),
            (Some(codon), Mode::Strict) => {
                if codon >= count {
                    Err(MapError::CodonOutOfRange { nonterminal: name.to_string(), codon, count })
                } else if !self.fits(rule, codon, depth) {
                    Err(MapError::DepthExceeded { nonterminal: name.to_string(), codon, depth })
                } else {
                    Ok(codon)
                }
            }
            (Some(codon), Mode::Repair { mutation_rate }) => {
                if codon >= count || !self.fits(rule, codon, depth) {
                    return fresh(self);
                }
                if mutation_rate > 0.0 && self.rng.random_bool(mutation_rate) {
                    let others: Vec<usize> = self.feasible(rule, depth).into_iter().filter(|&p| p != codon).collect();
                    if let Some(&other) = others.choose(self.rng) {
                        return Ok(other);
                    }
                }
                Ok(codon)
            }
        }
    }

    fn rand_value(&mut self, name: &'a str, symbol: &Symbol) -> Result<RandValue, MapError> {
        let position = *self.rand_cursor.entry(name).and_modify(|c| *c += 1).or_insert(1) - 1;
        let stored = self.input.rand_values.get(name).and_then(|list| list.get(position)).copied();
        let fresh = |rng: &mut R| RandValue::sample(symbol, rng).expect("random symbol");
        match (stored, self.mode) {
            (None, _) => Ok(fresh(self.rng)),
            (Some(v), Mode::Strict) => {
                if v.fits(symbol) && v.in_bounds() {
                    Ok(v)
                } else {
                    Err(MapError::RandMismatch { nonterminal: name.to_string(), position, symbol: symbol.to_string() })
                }
            }
            (Some(v), Mode::Repair { mutation_rate }) => {
                if !(v.fits(symbol) && v.in_bounds()) {
                    Ok(fresh(self.rng))
                } else if mutation_rate > 0.0 && self.rng.random_bool(mutation_rate) {
                    Ok(v.resample(self.rng))
                } else {
                    Ok(v)
                }
            }
        }
    }

    fn expand(&mut self, rule: usize, depth: usize) -> Result<(), MapError> {
        let grammar = self.grammar;
        let name = grammar.rule_at(rule).name.as_str();
        let choice = self.choose(rule, depth, name)?;
        self.out.codons.entry(name.to_string()).or_default().push(choice);

        for symbol in &grammar.rule_at(rule).productions[choice].symbols {
            match symbol {
                Symbol::NonTerminal(child) => {
                    let child = grammar.rule_index(child).expect("validated grammar");
                    self.expand(child, depth + 1)?;
                }
                Symbol::Terminal(text) => self.tokens.push(text.clone()),
                Symbol::RandInt { tag, .. } | Symbol::RandFloat { tag, .. } => {
                    let value = self.rand_value(name, symbol)?;
                    self.tokens.push(match tag {
                        Some(tag) => format!("{tag}:{}", value.render_value()),
                        None => value.render_value(),
                    });
                    self.out.rand_values.entry(name.to_string()).or_default().push(value);
                }
            }
        }
        Ok(())
    }
}

pub(super) fn walk<R: Rng + ?Sized>(
    grammar: &Grammar,
    genotype: &Genotype,
    max_depth: usize,
    mode: Mode,
    rng: &mut R,
) -> Result<(Phenotype, Genotype), MapError> {
    match grammar.min_derivation_depth() {
        Some(d) if d <= max_depth => {}
        _ => return Err(MapError::InfeasibleDepth { start: grammar.start().to_string(), max_depth }),
    }
    let mut walker = Walker {
        grammar,
        input: genotype,
        max_depth,
        mode,
        rng,
        codon_cursor: HashMap::new(),
        rand_cursor: HashMap::new(),
        out: Genotype::default(),
        tokens: Vec::new(),
    };
    walker.expand(0, 1)?;
    Ok((Phenotype::new(walker.tokens), walker.out))
}

/// Maps a genotype to its phenotype by leftmost derivation from the start symbol.
///
/// Each expansion of a nonterminal reads that nonterminal's next codon; a
/// random terminal reads the next stored tuple of the nonterminal whose
/// production contains it. Exhausted lists grow with fresh depth-feasible
/// codons and freshly sampled tuples drawn from `rng`. The returned genotype
/// holds exactly the genes that were read; unread trailing genes are dropped.
pub fn map<R: Rng + ?Sized>(
    grammar: &Grammar,
    genotype: &Genotype,
    max_depth: usize,
    rng: &mut R,
) -> Result<(Phenotype, Genotype), MapError> {
    walk(grammar, genotype, max_depth, Mode::Strict, rng)
}

/// Samples a derivation uniformly among depth-feasible productions at every
/// step and returns its genotype.
pub fn random_genotype<R: Rng + ?Sized>(
    grammar: &Grammar,
    rng: &mut R,
    max_depth: usize,
) -> Result<Genotype, MapError> {
    walk(grammar, &Genotype::default(), max_depth, Mode::Strict, rng).map(|(_, g)| g)
}
