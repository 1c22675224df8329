use std::collections::HashMap;
use std::fmt;

use num_bigint::BigUint;

use super::{Rule, Symbol};

/// Size of a grammar's derivation space.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Combinations {
    Finite(BigUint),
    NonFinite,
}

impl fmt::Display for Combinations {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Combinations::Finite(n) => write!(f, "{n}"),
            Combinations::NonFinite => f.write_str("non-finite"),
        }
    }
}

fn children<'a>(rule: &'a Rule, index: &'a HashMap<String, usize>) -> impl Iterator<Item = usize> + 'a {
    rule.productions.iter().flat_map(|p| &p.symbols).filter_map(|s| match s {
        Symbol::NonTerminal(n) => Some(index[n]),
        _ => None,
    })
}

/// Fixpoint over minimum completion depths. A production made only of
/// terminals has depth 1; otherwise 1 + the deepest child's minimum.
pub(super) fn min_depths(
    rules: &[Rule],
    index: &HashMap<String, usize>,
) -> (Vec<Vec<Option<usize>>>, Vec<Option<usize>>) {
    let mut rule_depths: Vec<Option<usize>> = vec![None; rules.len()];
    let mut production_depths: Vec<Vec<Option<usize>>> =
        rules.iter().map(|r| vec![None; r.productions.len()]).collect();
    loop {
        let mut changed = false;
        for (ri, rule) in rules.iter().enumerate() {
            for (pi, production) in rule.productions.iter().enumerate() {
                let mut deepest = Some(0usize);
                for symbol in &production.symbols {
                    if let Symbol::NonTerminal(n) = symbol {
                        deepest = match (deepest, rule_depths[index[n]]) {
                            (Some(a), Some(b)) => Some(a.max(b)),
                            _ => None,
                        };
                    }
                }
                let depth = deepest.map(|d| d + 1);
                if depth.is_some() && (production_depths[ri][pi].is_none() || depth < production_depths[ri][pi]) {
                    production_depths[ri][pi] = depth;
                    changed = true;
                }
            }
            let best = production_depths[ri].iter().flatten().min().copied();
            if best != rule_depths[ri] {
                rule_depths[ri] = best;
                changed = true;
            }
        }
        if !changed {
            return (production_depths, rule_depths);
        }
    }
}

pub(super) fn has_cycle(rules: &[Rule], index: &HashMap<String, usize>) -> bool {
    #[derive(Clone, Copy, PartialEq)]
    enum Mark {
        Fresh,
        Open,
        Done,
    }
    fn visit(i: usize, rules: &[Rule], index: &HashMap<String, usize>, marks: &mut [Mark]) -> bool {
        marks[i] = Mark::Open;
        for j in children(&rules[i], index) {
            let mark = marks[j];
            if mark == Mark::Open || (mark == Mark::Fresh && visit(j, rules, index, marks)) {
                return true;
            }
        }
        marks[i] = Mark::Done;
        false
    }
    let mut marks = vec![Mark::Fresh; rules.len()];
    (0..rules.len()).any(|i| marks[i] == Mark::Fresh && visit(i, rules, index, &mut marks))
}

/// Memoized product-sum over an acyclic grammar.
pub(super) fn count_derivations(rules: &[Rule], index: &HashMap<String, usize>) -> Combinations {
    fn count(i: usize, rules: &[Rule], index: &HashMap<String, usize>, memo: &mut [Option<BigUint>]) -> BigUint {
        if let Some(n) = &memo[i] {
            return n.clone();
        }
        let mut total = BigUint::from(0u32);
        for production in &rules[i].productions {
            let mut product = BigUint::from(1u32);
            for symbol in &production.symbols {
                if let Symbol::NonTerminal(n) = symbol {
                    product *= count(index[n], rules, index, memo);
                }
            }
            total += product;
        }
        memo[i] = Some(total.clone());
        total
    }
    let mut memo = vec![None; rules.len()];
    Combinations::Finite(count(0, rules, index, &mut memo))
}
