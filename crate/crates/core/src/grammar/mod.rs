//! Context-free grammars with bounded random-number terminals.
//!
//! A grammar is an ordered list of rules. The first rule's nonterminal is the
//! start symbol, and the order of productions inside a rule is significant:
//! codons index into it. See `docs/grammar-format.md` for the file format.

mod count;
mod parser;

use std::collections::HashMap;
use std::fmt;

pub use count::Combinations;
pub use parser::parse_grammar;

/// One symbol on the right-hand side of a production.
#[derive(Debug, Clone, PartialEq)]
pub enum Symbol {
    NonTerminal(String),
    Terminal(String),
    /// `tag:RANDINT(lo,hi)`, inclusive on both ends.
    RandInt {
        tag: Option<String>,
        lo: i64,
        hi: i64,
    },
    /// `tag:RANDFLOAT(lo,hi)`, inclusive on both ends.
    RandFloat {
        tag: Option<String>,
        lo: f64,
        hi: f64,
    },
}

impl Symbol {
    pub fn nonterminal(name: impl Into<String>) -> Self {
        Symbol::NonTerminal(name.into())
    }

    pub fn terminal(text: impl Into<String>) -> Self {
        Symbol::Terminal(text.into())
    }

    pub fn is_rand(&self) -> bool {
        matches!(self, Symbol::RandInt { .. } | Symbol::RandFloat { .. })
    }

    fn validate(&self) -> Result<(), String> {
        match self {
            Symbol::NonTerminal(name) => {
                if name.is_empty() || name.chars().any(|c| c.is_whitespace() || "<>|".contains(c)) {
                    return Err(format!("invalid nonterminal name {name:?}"));
                }
            }
            Symbol::Terminal(text) => {
                if text.is_empty() || text.chars().any(|c| c.is_whitespace() || "<>|".contains(c)) {
                    return Err(format!("invalid terminal {text:?}"));
                }
                if text == "::=" {
                    return Err("`::=` cannot be a terminal".into());
                }
            }
            Symbol::RandInt { tag, lo, hi } => {
                validate_tag(tag)?;
                if lo > hi {
                    return Err(format!("RANDINT bounds reversed: {lo} > {hi}"));
                }
            }
            Symbol::RandFloat { tag, lo, hi } => {
                validate_tag(tag)?;
                if !lo.is_finite() || !hi.is_finite() {
                    return Err("RANDFLOAT bounds must be finite".into());
                }
                if lo > hi {
                    return Err(format!("RANDFLOAT bounds reversed: {lo:?} > {hi:?}"));
                }
            }
        }
        Ok(())
    }
}

fn validate_tag(tag: &Option<String>) -> Result<(), String> {
    match tag {
        Some(t) if t.is_empty() || t.chars().any(|c| c.is_whitespace() || "<>|".contains(c)) => {
            Err(format!("invalid parameter tag {t:?}"))
        }
        _ => Ok(()),
    }
}

impl fmt::Display for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let tag_prefix = |tag: &Option<String>| tag.as_ref().map(|t| format!("{t}:")).unwrap_or_default();
        match self {
            Symbol::NonTerminal(name) => write!(f, "<{name}>"),
            Symbol::Terminal(text) => f.write_str(text),
            Symbol::RandInt { tag, lo, hi } => write!(f, "{}RANDINT({lo},{hi})", tag_prefix(tag)),
            Symbol::RandFloat { tag, lo, hi } => write!(f, "{}RANDFLOAT({lo:?},{hi:?})", tag_prefix(tag)),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Production {
    pub symbols: Vec<Symbol>,
}

impl Production {
    pub fn new(symbols: Vec<Symbol>) -> Self {
        Self { symbols }
    }

    fn nonterminals(&self) -> impl Iterator<Item = &str> {
        self.symbols.iter().filter_map(|s| match s {
            Symbol::NonTerminal(n) => Some(n.as_str()),
            _ => None,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Rule {
    pub name: String,
    pub productions: Vec<Production>,
}

fn at_line(line: &Option<usize>) -> String {
    line.map(|l| format!(" (line {l})")).unwrap_or_default()
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum GrammarError {
    #[error("syntax error at line {line}, column {column}: {message}")]
    Syntax { line: usize, column: usize, message: String },
    #[error("malformed random terminal at line {line}, column {column}: {message}")]
    MalformedRand { line: usize, column: usize, message: String },
    #[error("nonterminal <{name}> defined more than once{}", at_line(.line))]
    DuplicateRule { name: String, line: Option<usize> },
    #[error("rule <{name}> has no productions{}", at_line(.line))]
    EmptyRule { name: String, line: Option<usize> },
    #[error("undefined nonterminal <{name}>{}", at_line(.line))]
    UndefinedNonterminal { name: String, line: Option<usize> },
    #[error("nonterminal <{name}> is unreachable from the start symbol")]
    Unreachable { name: String },
    #[error("invalid symbol in rule <{rule}>: {message}")]
    InvalidSymbol { rule: String, message: String },
    #[error("grammar has no rules")]
    NoRules,
    #[error("unknown nonterminal <{0}>")]
    UnknownNonterminal(String),
}

/// A validated context-free grammar `(N, T, P, S)`.
///
/// Immutable once built. Besides the rules it caches, for every production,
/// the minimum depth of a complete derivation rooted at it; the mapper uses
/// these to keep derivations inside the depth bound.
#[derive(Debug, Clone)]
pub struct Grammar {
    rules: Vec<Rule>,
    index: HashMap<String, usize>,
    // min completion depth per rule, per production; None = cannot terminate
    production_depths: Vec<Vec<Option<usize>>>,
    rule_depths: Vec<Option<usize>>,
    recursive: bool,
}

impl PartialEq for Grammar {
    fn eq(&self, other: &Self) -> bool {
        self.rules == other.rules
    }
}

impl Grammar {
    /// Validates `rules` and builds a grammar whose start symbol is the first rule.
    pub fn new(rules: Vec<Rule>) -> Result<Self, GrammarError> {
        if rules.is_empty() {
            return Err(GrammarError::NoRules);
        }
        let mut index = HashMap::with_capacity(rules.len());
        for (i, rule) in rules.iter().enumerate() {
            Symbol::NonTerminal(rule.name.clone())
                .validate()
                .map_err(|message| GrammarError::InvalidSymbol { rule: rule.name.clone(), message })?;
            if index.insert(rule.name.clone(), i).is_some() {
                return Err(GrammarError::DuplicateRule { name: rule.name.clone(), line: None });
            }
        }
        for rule in &rules {
            if rule.productions.is_empty() || rule.productions.iter().any(|p| p.symbols.is_empty()) {
                return Err(GrammarError::EmptyRule { name: rule.name.clone(), line: None });
            }
            for symbol in rule.productions.iter().flat_map(|p| &p.symbols) {
                symbol
                    .validate()
                    .map_err(|message| GrammarError::InvalidSymbol { rule: rule.name.clone(), message })?;
                if let Symbol::NonTerminal(name) = symbol {
                    if !index.contains_key(name) {
                        return Err(GrammarError::UndefinedNonterminal { name: name.clone(), line: None });
                    }
                }
            }
        }

        let mut reached = vec![false; rules.len()];
        let mut stack = vec![0usize];
        reached[0] = true;
        while let Some(i) = stack.pop() {
            for name in rules[i].productions.iter().flat_map(Production::nonterminals) {
                let j = index[name];
                if !reached[j] {
                    reached[j] = true;
                    stack.push(j);
                }
            }
        }
        if let Some(i) = reached.iter().position(|r| !r) {
            return Err(GrammarError::Unreachable { name: rules[i].name.clone() });
        }

        let (production_depths, rule_depths) = count::min_depths(&rules, &index);
        let recursive = count::has_cycle(&rules, &index);
        Ok(Self { rules, index, production_depths, rule_depths, recursive })
    }

    pub fn start(&self) -> &str {
        &self.rules[0].name
    }

    pub fn rules(&self) -> &[Rule] {
        &self.rules
    }

    /// Nonterminal names in definition order.
    pub fn nonterminals(&self) -> impl ExactSizeIterator<Item = &str> + '_ {
        self.rules.iter().map(|r| r.name.as_str())
    }

    pub fn rule(&self, name: &str) -> Option<&Rule> {
        self.index.get(name).map(|&i| &self.rules[i])
    }

    pub fn productions(&self, name: &str) -> Result<&[Production], GrammarError> {
        self.rule(name)
            .map(|r| r.productions.as_slice())
            .ok_or_else(|| GrammarError::UnknownNonterminal(name.to_string()))
    }

    /// Number of alternatives for `name`; the exclusive upper bound of its codons.
    pub fn expansion_count(&self, name: &str) -> Result<usize, GrammarError> {
        self.productions(name).map(<[Production]>::len)
    }

    /// Number of distinct complete derivations, counting every random terminal
    /// as a single choice. Recursive grammars are [`Combinations::NonFinite`].
    pub fn combination_count(&self) -> Combinations {
        if self.recursive {
            Combinations::NonFinite
        } else {
            count::count_derivations(&self.rules, &self.index)
        }
    }

    pub fn is_recursive(&self) -> bool {
        self.recursive
    }

    /// Smallest depth of a complete derivation from the start symbol, or
    /// `None` if the start symbol can never derive a sentence.
    pub fn min_derivation_depth(&self) -> Option<usize> {
        self.rule_depths[0]
    }

    pub(crate) fn rule_index(&self, name: &str) -> Option<usize> {
        self.index.get(name).copied()
    }

    pub(crate) fn rule_at(&self, index: usize) -> &Rule {
        &self.rules[index]
    }

    pub(crate) fn production_depth(&self, rule: usize, production: usize) -> Option<usize> {
        self.production_depths[rule][production]
    }

    /// Serializes back to the text format; `parse_grammar(&g.render())` equals `g`.
    pub fn render(&self) -> String {
        let mut out = String::new();
        for rule in &self.rules {
            out.push('<');
            out.push_str(&rule.name);
            out.push_str("> ::=");
            for (i, production) in rule.productions.iter().enumerate() {
                if i > 0 {
                    out.push_str(" |");
                }
                for symbol in &production.symbols {
                    out.push(' ');
                    out.push_str(&symbol.to_string());
                }
            }
            out.push('\n');
        }
        out
    }
}

impl fmt::Display for Grammar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render())
    }
}

impl std::str::FromStr for Grammar {
    type Err = GrammarError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_grammar(s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const TOY: &str = "<s> ::= <a> <b> | <b>\n<a> ::= x | y\n<b> ::= 0 | 1\n";

    #[test]
    fn expansion_counts() {
        let g = parse_grammar(TOY).unwrap();
        assert_eq!(g.expansion_count("s").unwrap(), 2);
        assert_eq!(g.expansion_count("b").unwrap(), 2);
        let single = parse_grammar("<s> ::= a").unwrap();
        assert_eq!(single.expansion_count("s").unwrap(), 1);
        let strategy =
            parse_grammar("<strategy_imp> ::= strategy:mean | strategy:median | strategy:most_frequent").unwrap();
        assert_eq!(strategy.expansion_count("strategy_imp").unwrap(), 3);
        assert_eq!(g.expansion_count("zzz"), Err(GrammarError::UnknownNonterminal("zzz".into())));
    }

    #[test]
    fn combination_counts() {
        let g = parse_grammar(TOY).unwrap();
        assert_eq!(g.combination_count(), Combinations::Finite(6u32.into()));
        assert_eq!(parse_grammar("<s> ::= a").unwrap().combination_count(), Combinations::Finite(1u32.into()));
        let rec = parse_grammar("<s> ::= <s> a | a").unwrap();
        assert_eq!(rec.combination_count(), Combinations::NonFinite);
        assert!(rec.is_recursive());
    }

    #[test]
    fn rand_terminals_count_once() {
        let g = parse_grammar("<s> ::= k:RANDINT(1,9) <w>\n<w> ::= w:RANDFLOAT(0.0,1.0) | w:none\n").unwrap();
        assert_eq!(g.combination_count(), Combinations::Finite(2u32.into()));
    }

    #[test]
    fn min_depths() {
        let g = parse_grammar("<s> ::= a <s> | a").unwrap();
        assert_eq!(g.min_derivation_depth(), Some(1));
        assert_eq!(g.production_depth(0, 0), Some(2));
        let toy = parse_grammar(TOY).unwrap();
        assert_eq!(toy.min_derivation_depth(), Some(2));
        let dead = parse_grammar("<s> ::= <s> a").unwrap();
        assert_eq!(dead.min_derivation_depth(), None);
    }

    #[test]
    fn programmatic_construction_validates() {
        let err = Grammar::new(vec![Rule {
            name: "s".into(),
            productions: vec![Production::new(vec![Symbol::RandInt { tag: None, lo: 3, hi: 1 }])],
        }])
        .unwrap_err();
        assert!(matches!(err, GrammarError::InvalidSymbol { .. }));
        assert_eq!(Grammar::new(vec![]).unwrap_err(), GrammarError::NoRules);
    }

    #[test]
    fn render_round_trips() {
        let src = "<p> ::= <a> | <a> <b>\n<a> ::= k:RANDINT(-3,7) | RANDFLOAT(1e-10,0.5)\n<b> ::= x:y\n";
        let g = parse_grammar(src).unwrap();
        assert_eq!(parse_grammar(&g.render()).unwrap(), g);
        assert_eq!(g.render(), src);
    }
}
