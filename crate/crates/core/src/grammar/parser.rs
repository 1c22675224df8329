use std::collections::HashMap;

use super::{Grammar, GrammarError, Production, Rule, Symbol};

#[derive(Debug, Clone, PartialEq)]
enum TokKind {
    NonTerminal(String),
    Define,
    Bar,
    Word(String),
}

#[derive(Debug, Clone)]
struct Tok {
    kind: TokKind,
    line: usize,
    column: usize,
}

fn syntax(line: usize, column: usize, message: impl Into<String>) -> GrammarError {
    GrammarError::Syntax { line, column, message: message.into() }
}

fn is_delimiter(c: char) -> bool {
    c.is_whitespace() || c == '|'
}

fn tokenize_line(text: &str, line: usize) -> Result<Vec<Tok>, GrammarError> {
    let chars: Vec<char> = text.chars().collect();
    let mut toks = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let column = i + 1;
        if c.is_whitespace() {
            i += 1;
        } else if c == '#' {
            break;
        } else if c == '|' {
            toks.push(Tok { kind: TokKind::Bar, line, column });
            i += 1;
        } else if c == '<' {
            let mut j = i + 1;
            while j < chars.len() && chars[j] != '>' {
                if chars[j].is_whitespace() || chars[j] == '<' || chars[j] == '|' {
                    return Err(syntax(line, j + 1, "unterminated nonterminal"));
                }
                j += 1;
            }
            if j == chars.len() {
                return Err(syntax(line, column, "unterminated nonterminal"));
            }
            if j == i + 1 {
                return Err(syntax(line, column, "empty nonterminal name"));
            }
            let name: String = chars[i + 1..j].iter().collect();
            toks.push(Tok { kind: TokKind::NonTerminal(name), line, column });
            i = j + 1;
        } else {
            let mut j = i;
            while j < chars.len() && !is_delimiter(chars[j]) {
                if chars[j] == '<' || chars[j] == '>' {
                    return Err(syntax(line, j + 1, "angle bracket inside a terminal"));
                }
                j += 1;
            }
            let word: String = chars[i..j].iter().collect();
            let kind = if word == "::=" { TokKind::Define } else { TokKind::Word(word) };
            toks.push(Tok { kind, line, column });
            i = j;
        }
    }
    Ok(toks)
}

fn parse_number<T: std::str::FromStr>(text: &str) -> Option<T> {
    text.trim().parse().ok()
}

/// Turns a bare word into a terminal or a bounded random terminal.
fn word_symbol(word: &str, line: usize, column: usize) -> Result<Symbol, GrammarError> {
    let malformed = |message: String| GrammarError::MalformedRand { line, column, message };
    let (start, is_int) = match (word.find("RANDINT("), word.find("RANDFLOAT(")) {
        (Some(p), _) => (p, true),
        (None, Some(p)) => (p, false),
        (None, None) => return Ok(Symbol::Terminal(word.to_string())),
    };
    let prefix = &word[..start];
    let tag = if prefix.is_empty() {
        None
    } else if prefix.len() > 1 && prefix.ends_with(':') {
        Some(prefix[..prefix.len() - 1].to_string())
    } else {
        return Err(malformed(format!("random terminal must stand alone or follow a `tag:` prefix, found {word:?}")));
    };
    let open = start + if is_int { "RANDINT(".len() } else { "RANDFLOAT(".len() };
    let Some(body) = word[open..].strip_suffix(')') else {
        return Err(malformed(format!("missing closing parenthesis in {word:?}")));
    };
    let parts: Vec<&str> = body.split(',').collect();
    if parts.len() != 2 {
        return Err(malformed(format!("expected two bounds, found {}", parts.len())));
    }
    if is_int {
        let (Some(lo), Some(hi)) = (parse_number::<i64>(parts[0]), parse_number::<i64>(parts[1])) else {
            return Err(malformed(format!("non-integer RANDINT bounds in {word:?}")));
        };
        if lo > hi {
            return Err(malformed(format!("lower bound {lo} exceeds upper bound {hi}")));
        }
        Ok(Symbol::RandInt { tag, lo, hi })
    } else {
        let (Some(lo), Some(hi)) = (parse_number::<f64>(parts[0]), parse_number::<f64>(parts[1])) else {
            return Err(malformed(format!("non-numeric RANDFLOAT bounds in {word:?}")));
        };
        if !lo.is_finite() || !hi.is_finite() {
            return Err(malformed(format!("RANDFLOAT bounds must be finite in {word:?}")));
        }
        if lo > hi {
            return Err(malformed(format!("lower bound {lo:?} exceeds upper bound {hi:?}")));
        }
        Ok(Symbol::RandFloat { tag, lo, hi })
    }
}

struct RawRule {
    name: String,
    line: usize,
    body: Vec<Tok>,
}

/// Parses and validates a grammar in the BNF-like text format.
///
/// One rule per line, `<name> ::= alt | alt`. A line that is indented, starts
/// with `|`, or follows a line ending in `|` continues the previous rule;
/// `#` at the start of a token begins a comment.
pub fn parse_grammar(source: &str) -> Result<Grammar, GrammarError> {
    let mut raw: Vec<RawRule> = Vec::new();
    let mut previous_ended_with_bar = false;

    for (n, text) in source.lines().enumerate() {
        let line = n + 1;
        let toks = tokenize_line(text, line)?;
        if toks.is_empty() {
            continue;
        }
        let starts_rule =
            toks.len() >= 2 && matches!(toks[0].kind, TokKind::NonTerminal(_)) && toks[1].kind == TokKind::Define;
        if starts_rule {
            if let Some(t) = toks[2..].iter().find(|t| t.kind == TokKind::Define) {
                return Err(syntax(t.line, t.column, "unexpected `::=`"));
            }
            let TokKind::NonTerminal(name) = &toks[0].kind else { unreachable!() };
            raw.push(RawRule { name: name.clone(), line, body: toks[2..].to_vec() });
        } else {
            if let Some(t) = toks.iter().find(|t| t.kind == TokKind::Define) {
                return Err(syntax(t.line, t.column, "`::=` must follow a single nonterminal at the start of a line"));
            }
            let indented = text.starts_with(char::is_whitespace);
            let continues = indented || toks[0].kind == TokKind::Bar || previous_ended_with_bar;
            match raw.last_mut() {
                Some(rule) if continues => rule.body.extend(toks.iter().cloned()),
                _ => {
                    return Err(syntax(line, toks[0].column, "expected a rule definition `<name> ::= ...`"));
                }
            }
        }
        previous_ended_with_bar = toks.last().is_some_and(|t| t.kind == TokKind::Bar);
    }

    if raw.is_empty() {
        return Err(GrammarError::NoRules);
    }

    let mut defined: HashMap<&str, usize> = HashMap::new();
    for rule in &raw {
        if defined.insert(&rule.name, rule.line).is_some() {
            return Err(GrammarError::DuplicateRule { name: rule.name.clone(), line: Some(rule.line) });
        }
    }

    let mut rules = Vec::with_capacity(raw.len());
    for rule in &raw {
        if rule.body.is_empty() {
            return Err(GrammarError::EmptyRule { name: rule.name.clone(), line: Some(rule.line) });
        }
        let mut productions = Vec::new();
        let mut current: Vec<Symbol> = Vec::new();
        let mut last_bar: Option<&Tok> = None;
        for tok in &rule.body {
            match &tok.kind {
                TokKind::Bar => {
                    if current.is_empty() {
                        return Err(syntax(tok.line, tok.column, "empty alternative"));
                    }
                    productions.push(Production::new(std::mem::take(&mut current)));
                    last_bar = Some(tok);
                }
                TokKind::NonTerminal(name) => {
                    if !defined.contains_key(name.as_str()) {
                        return Err(GrammarError::UndefinedNonterminal { name: name.clone(), line: Some(tok.line) });
                    }
                    current.push(Symbol::NonTerminal(name.clone()));
                }
                TokKind::Word(word) => current.push(word_symbol(word, tok.line, tok.column)?),
                TokKind::Define => unreachable!("rejected while grouping"),
            }
        }
        if current.is_empty() {
            let bar = last_bar.expect("non-empty body ends with a bar");
            return Err(syntax(bar.line, bar.column, "empty alternative"));
        }
        productions.push(Production::new(current));
        rules.push(Rule { name: rule.name.clone(), productions });
    }

    Grammar::new(rules)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_line_alternatives() {
        let g = parse_grammar("<s> ::= strategy:mean | strategy:median | strategy:most_frequent").unwrap();
        assert_eq!(g.nonterminals().count(), 1);
        let prods = g.productions("s").unwrap();
        assert_eq!(prods.len(), 3);
        assert_eq!(prods[0].symbols, vec![Symbol::terminal("strategy:mean")]);
    }

    #[test]
    fn minimal_grammar() {
        let g = parse_grammar("<s> ::= a").unwrap();
        assert_eq!(g.productions("s").unwrap(), &[Production::new(vec![Symbol::terminal("a")])]);
        assert_eq!(g.start(), "s");
    }

    #[test]
    fn undefined_nonterminal_is_named() {
        let err = parse_grammar("<s> ::= <t>").unwrap_err();
        assert_eq!(err, GrammarError::UndefinedNonterminal { name: "t".into(), line: Some(1) });
        assert!(err.to_string().contains("<t>"));
    }

    #[test]
    fn continuation_lines() {
        let src = "\
<pipeline> ::= <pre> <alg>
             | <alg>
<pre> ::= a |
  b
<alg> ::= classifier:radius_neighbors <radius>
              weights:uniform
<radius> ::= radius:RANDFLOAT(1.0,30.0)  # inline comment
";
        let g = parse_grammar(src).unwrap();
        assert_eq!(g.expansion_count("pipeline").unwrap(), 2);
        assert_eq!(g.expansion_count("pre").unwrap(), 2);
        let alg = g.productions("alg").unwrap();
        assert_eq!(alg.len(), 1);
        assert_eq!(alg[0].symbols.len(), 3);
        assert_eq!(
            g.productions("radius").unwrap()[0].symbols[0],
            Symbol::RandFloat { tag: Some("radius".into()), lo: 1.0, hi: 30.0 }
        );
    }

    #[test]
    fn rand_bounds() {
        let g = parse_grammar("<s> ::= leaf_size:RANDINT(5,100) | RANDINT(-2,2)").unwrap();
        let prods = g.productions("s").unwrap();
        assert_eq!(prods[0].symbols[0], Symbol::RandInt { tag: Some("leaf_size".into()), lo: 5, hi: 100 });
        assert_eq!(prods[1].symbols, vec![Symbol::RandInt { tag: None, lo: -2, hi: 2 }]);
    }

    #[test]
    fn errors_carry_positions() {
        type Expect = fn(&GrammarError) -> bool;
        let cases: &[(&str, Expect)] = &[
            ("<s> ::= RANDINT(5,1)", |e| matches!(e, GrammarError::MalformedRand { line: 1, column: 9, .. })),
            ("<s> ::= RANDFLOAT(a,1.0)", |e| matches!(e, GrammarError::MalformedRand { .. })),
            ("<s> ::= RANDINT(1.5,2)", |e| matches!(e, GrammarError::MalformedRand { .. })),
            ("<s> ::= xRANDINT(1,2)", |e| matches!(e, GrammarError::MalformedRand { .. })),
            ("<s> ::=", |e| matches!(e, GrammarError::EmptyRule { line: Some(1), .. })),
            ("<s> ::= a | | b", |e| matches!(e, GrammarError::Syntax { line: 1, column: 13, .. })),
            ("<s> ::= a |", |e| matches!(e, GrammarError::Syntax { .. })),
            ("<s> ::= a\n<s> ::= b", |e| matches!(e, GrammarError::DuplicateRule { line: Some(2), .. })),
            ("<s> ::= a\n<t> ::= b", |e| matches!(e, GrammarError::Unreachable { .. })),
            ("<s> ::= <a", |e| matches!(e, GrammarError::Syntax { .. })),
            ("<s> ::= a<b>", |e| matches!(e, GrammarError::Syntax { line: 1, column: 10, .. })),
            ("b\n<s> ::= a", |e| matches!(e, GrammarError::Syntax { line: 1, column: 1, .. })),
            ("<s> ::= a ::= b", |e| matches!(e, GrammarError::Syntax { .. })),
            ("# only comments\n", |e| matches!(e, GrammarError::NoRules)),
        ];
        for (src, check) in cases {
            let err = parse_grammar(src).unwrap_err();
            assert!(check(&err), "{src:?} gave {err:?}");
        }
    }
}
