//! Genotypes, mapping with on-demand growth, and the variation operators.
//!
//! cargo run --example dsge_mapping

use dsge_pipelines::dsge::{crossover_with_mask, map, mutate, random_genotype, Genotype, DEFAULT_MAX_DEPTH};
use dsge_pipelines::grammar::parse_grammar;
use dsge_pipelines::PIPELINE_GRAMMAR;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() {
    let toy = parse_grammar("<s> ::= <a> <b> | <b>\n<a> ::= x | y\n<b> ::= 0 | 1\n").unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(1);

    let geno = Genotype::new().with_codons("s", [0]).with_codons("a", [1]).with_codons("b", [0]);
    let (pheno, _) = map(&toy, &geno, DEFAULT_MAX_DEPTH, &mut rng).unwrap();
    println!("{{s:[0], a:[1], b:[0]}} -> {pheno}");

    // `b` has no codons yet: mapping grows one.
    let short = Genotype::new().with_codons("s", [1]);
    let (pheno, grown) = map(&toy, &short, DEFAULT_MAX_DEPTH, &mut rng).unwrap();
    println!("{{s:[1]}} -> {pheno}, grown genotype {}", grown.to_json());

    let a = Genotype::new().with_codons("s", [0]).with_codons("a", [0]).with_codons("b", [0]);
    let b = Genotype::new().with_codons("s", [0]).with_codons("a", [1]).with_codons("b", [1]);
    // mask follows grammar order s, a, b: swap only `a`
    let (c1, c2) = crossover_with_mask(&toy, &a, &b, &[false, true, false], &mut rng, DEFAULT_MAX_DEPTH).unwrap();
    let show = |g: &Genotype, rng: &mut ChaCha8Rng| map(&toy, g, DEFAULT_MAX_DEPTH, rng).unwrap().0.text();
    println!("crossover swapping <a>: [{}] and [{}]", show(&c1, &mut rng), show(&c2, &mut rng));

    let grammar = parse_grammar(PIPELINE_GRAMMAR).unwrap();
    let geno = random_genotype(&grammar, &mut rng, DEFAULT_MAX_DEPTH).unwrap();
    let (pheno, _) = map(&grammar, &geno, DEFAULT_MAX_DEPTH, &mut rng).unwrap();
    println!("\nrandom pipeline: {pheno}");
    println!("genotype JSON: {}", serde_json::to_string(&geno).unwrap());
    for round in 1..=3 {
        let mutant = mutate(&grammar, &geno, &mut rng, 0.3, DEFAULT_MAX_DEPTH).unwrap();
        let (p, _) = map(&grammar, &mutant, DEFAULT_MAX_DEPTH, &mut rng).unwrap();
        println!("mutant {round}: {p}");
    }
}
