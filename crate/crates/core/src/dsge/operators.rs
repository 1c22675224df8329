//! Variation operators. Both operators finish with a repairing re-map, which
//! grows missing genes, replaces genes that no longer fit the derivation and
//! drops unread ones, so every result maps within the depth bound.

use rand::Rng;

use super::mapper::{walk, MapError, Mode};
use super::Genotype;
use crate::grammar::Grammar;

/// Redraws each codon with probability `per_codon_rate` (uniformly among the
/// other depth-feasible alternatives of its nonterminal) and each stored
/// random value with the same probability (uniformly within its range).
pub fn mutate<R: Rng + ?Sized>(
    grammar: &Grammar,
    genotype: &Genotype,
    rng: &mut R,
    per_codon_rate: f64,
    max_depth: usize,
) -> Result<Genotype, MapError> {
    let rate = per_codon_rate.clamp(0.0, 1.0);
    walk(grammar, genotype, max_depth, Mode::Repair { mutation_rate: rate }, rng).map(|(_, g)| g)
}

/// Per-nonterminal exchange driven by a uniform random mask.
pub fn crossover<R: Rng + ?Sized>(
    grammar: &Grammar,
    a: &Genotype,
    b: &Genotype,
    rng: &mut R,
    max_depth: usize,
) -> Result<(Genotype, Genotype), MapError> {
    let mask: Vec<bool> = grammar.nonterminals().map(|_| rng.random_bool(0.5)).collect();
    crossover_with_mask(grammar, a, b, &mask, rng, max_depth)
}

/// `mask[i]` refers to the i-th nonterminal in grammar order; when set, the
/// first child takes that nonterminal's genes from `b` and the second from `a`.
pub fn crossover_with_mask<R: Rng + ?Sized>(
    grammar: &Grammar,
    a: &Genotype,
    b: &Genotype,
    mask: &[bool],
    rng: &mut R,
    max_depth: usize,
) -> Result<(Genotype, Genotype), MapError> {
    let mut first = Genotype::default();
    let mut second = Genotype::default();
    for (i, name) in grammar.nonterminals().enumerate() {
        let swap = mask.get(i).copied().unwrap_or(false);
        let (to_first, to_second) = if swap { (b, a) } else { (a, b) };
        if let Some(c) = to_first.codons.get(name) {
            first.codons.insert(name.to_string(), c.clone());
        }
        if let Some(r) = to_first.rand_values.get(name) {
            first.rand_values.insert(name.to_string(), r.clone());
        }
        if let Some(c) = to_second.codons.get(name) {
            second.codons.insert(name.to_string(), c.clone());
        }
        if let Some(r) = to_second.rand_values.get(name) {
            second.rand_values.insert(name.to_string(), r.clone());
        }
    }
    let repair = Mode::Repair { mutation_rate: 0.0 };
    let (_, first) = walk(grammar, &first, max_depth, repair, rng)?;
    let (_, second) = walk(grammar, &second, max_depth, repair, rng)?;
    Ok((first, second))
}
