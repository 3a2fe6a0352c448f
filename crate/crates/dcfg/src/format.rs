//! Text format for grammars and the term expression sublanguage.
//!
//! One declaration per line: `k: <int>`, `alphabet: s1 s2 ...`,
//! `start: <name>`, optionally `nonterminals: A:0 B:2 ...`, and rule
//! lines `A:r -> <term-expr>`. `#` starts a comment.
//!
//! Term expressions: quoted strings `"a0 b0"` (symbols space-separated,
//! `""` is the empty word), tuple literals `("u0","u1")`, bare
//! nonterminal names, `.` or juxtaposition for concatenation, `@j` for
//! intercalation, parentheses. Concatenation binds tighter than
//! intercalation and both associate to the left, so `A @2 B C @1 D`
//! reads as `(A @2 (B C)) @1 D`.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use crate::error::DcfgError;
use crate::grammar::{Grammar, Nonterminal, Rule};
use crate::terms::Term;
use crate::tuple_algebra::{StringTuple, Symbol};

#[derive(Debug, Clone, PartialEq)]
enum Token {
    Ident(String),
    Str(Vec<Symbol>),
    LParen,
    RParen,
    Comma,
    Dot,
    At(usize),
}

fn is_ident_char(c: char) -> bool {
    c.is_alphanumeric() || matches!(c, '_' | '\'' | '^' | '/' | '\\')
}

fn tokenize(line: usize, input: &str) -> Result<Vec<Token>, DcfgError> {
    let err = |message: String| DcfgError::Parse { line, message };
    let mut tokens = Vec::new();
    let mut chars = input.chars().peekable();
    while let Some(&c) = chars.peek() {
        match c {
            c if c.is_whitespace() => {
                chars.next();
            }
            '(' => {
                chars.next();
                tokens.push(Token::LParen);
            }
            ')' => {
                chars.next();
                tokens.push(Token::RParen);
            }
            ',' => {
                chars.next();
                tokens.push(Token::Comma);
            }
            '.' => {
                chars.next();
                tokens.push(Token::Dot);
            }
            '@' => {
                chars.next();
                let mut digits = String::new();
                while let Some(d) = chars.peek().filter(|d| d.is_ascii_digit()) {
                    digits.push(*d);
                    chars.next();
                }
                if digits.is_empty() {
                    return Err(err("expected gap index after '@'".to_string()));
                }
                let j: usize = digits
                    .parse()
                    .map_err(|_| err(format!("bad gap index @{digits}")))?;
                tokens.push(Token::At(j));
            }
            '"' => {
                chars.next();
                let mut content = String::new();
                loop {
                    match chars.next() {
                        Some('"') => break,
                        Some(c) => content.push(c),
                        None => return Err(err("unterminated string literal".to_string())),
                    }
                }
                tokens.push(Token::Str(content.split_whitespace().map(str::to_string).collect()));
            }
            c if is_ident_char(c) => {
                let mut name = String::new();
                while let Some(&c) = chars.peek().filter(|c| is_ident_char(**c)) {
                    name.push(c);
                    chars.next();
                }
                tokens.push(Token::Ident(name));
            }
            other => return Err(err(format!("unexpected character {other:?}"))),
        }
    }
    Ok(tokens)
}

struct TermParser {
    tokens: Vec<Token>,
    pos: usize,
    line: usize,
}

impl TermParser {
    fn err(&self, message: impl Into<String>) -> DcfgError {
        DcfgError::Parse { line: self.line, message: message.into() }
    }

    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos)
    }

    fn peek2(&self) -> Option<&Token> {
        self.tokens.get(self.pos + 1)
    }

    fn next(&mut self) -> Option<Token> {
        let t = self.tokens.get(self.pos).cloned();
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    /// expr := seq ('@' INT seq)*
    fn expr(&mut self) -> Result<Term, DcfgError> {
        let mut term = self.seq()?;
        while let Some(Token::At(j)) = self.peek() {
            let j = *j;
            self.pos += 1;
            let right = self.seq()?;
            term = Term::intercal(j, term, right);
        }
        Ok(term)
    }

    /// seq := item ('.'? item)*
    fn seq(&mut self) -> Result<Term, DcfgError> {
        let mut term = self.item()?;
        loop {
            match self.peek() {
                Some(Token::Dot) => {
                    self.pos += 1;
                    let next = self.item()?;
                    term = Term::concat(term, next);
                }
                Some(Token::Ident(_)) | Some(Token::Str(_)) | Some(Token::LParen) => {
                    let next = self.item()?;
                    term = Term::concat(term, next);
                }
                _ => break,
            }
        }
        Ok(term)
    }

    fn item(&mut self) -> Result<Term, DcfgError> {
        match self.peek() {
            Some(Token::Str(_)) => {
                let Some(Token::Str(syms)) = self.next() else { unreachable!() };
                Ok(Term::tuple(StringTuple::word(syms)))
            }
            Some(Token::Ident(_)) => {
                let Some(Token::Ident(name)) = self.next() else { unreachable!() };
                Ok(Term::nonterm(name))
            }
            Some(Token::LParen) => {
                // A '(' opens a tuple literal when a string literal
                // followed by ',' comes next, otherwise a grouped
                // subexpression.
                if matches!(self.peek2(), Some(Token::Str(_)))
                    && matches!(self.tokens.get(self.pos + 2), Some(Token::Comma))
                {
                    self.tuple_literal()
                } else {
                    self.pos += 1;
                    let term = self.expr()?;
                    match self.next() {
                        Some(Token::RParen) => Ok(term),
                        _ => Err(self.err("expected ')'")),
                    }
                }
            }
            other => Err(self.err(format!("expected a term, found {other:?}"))),
        }
    }

    fn tuple_literal(&mut self) -> Result<Term, DcfgError> {
        self.pos += 1; // '('
        let mut components = Vec::new();
        loop {
            match self.next() {
                Some(Token::Str(syms)) => components.push(syms),
                other => return Err(self.err(format!("expected a string component, found {other:?}"))),
            }
            match self.next() {
                Some(Token::Comma) => continue,
                Some(Token::RParen) => break,
                other => return Err(self.err(format!("expected ',' or ')', found {other:?}"))),
            }
        }
        Ok(Term::tuple(StringTuple::new(components)))
    }
}

/// Parses a term expression.
pub fn parse_term(input: &str, line: usize) -> Result<Term, DcfgError> {
    let tokens = tokenize(line, input)?;
    let mut parser = TermParser { tokens, pos: 0, line };
    let term = parser.expr()?;
    if let Some(tok) = parser.peek() {
        return Err(parser.err(format!("trailing input starting at {tok:?}")));
    }
    Ok(term)
}

fn parse_ranked_name(spec: &str, line: usize) -> Result<(String, usize), DcfgError> {
    let err = |message: String| DcfgError::Parse { line, message };
    let (name, rank) = spec
        .split_once(':')
        .ok_or_else(|| err(format!("expected name:rank, found {spec:?}")))?;
    let name = name.trim();
    let rank: usize = rank
        .trim()
        .parse()
        .map_err(|_| err(format!("bad rank in {spec:?}")))?;
    if name.is_empty() || !name.chars().all(is_ident_char) {
        return Err(err(format!("bad nonterminal name {name:?}")));
    }
    Ok((name.to_string(), rank))
}

/// Parses a grammar file.
pub fn parse_grammar(input: &str) -> Result<Grammar, DcfgError> {
    let mut k: Option<usize> = None;
    let mut alphabet: Option<BTreeSet<Symbol>> = None;
    let mut start: Option<String> = None;
    let mut nonterminals: Vec<Nonterminal> = Vec::new();
    let mut rules: Vec<Rule> = Vec::new();

    let mut declare = |name: String, rank: usize, line: usize| -> Result<(), DcfgError> {
        match nonterminals.iter().find(|n| n.name == name) {
            Some(existing) if existing.rank != rank => Err(DcfgError::Parse {
                line,
                message: format!(
                    "nonterminal {name} declared with rank {rank}, previously {}",
                    existing.rank
                ),
            }),
            Some(_) => Ok(()),
            None => {
                nonterminals.push(Nonterminal { name, rank });
                Ok(())
            }
        }
    };

    for (idx, raw_line) in input.lines().enumerate() {
        let line_no = idx + 1;
        let line = match raw_line.split_once('#') {
            Some((before, _)) => before.trim(),
            None => raw_line.trim(),
        };
        if line.is_empty() {
            continue;
        }
        let err = |message: String| DcfgError::Parse { line: line_no, message };
        if let Some(rest) = line.strip_prefix("k:") {
            k = Some(rest.trim().parse().map_err(|_| err("bad k declaration".to_string()))?);
        } else if let Some(rest) = line.strip_prefix("alphabet:") {
            alphabet = Some(rest.split_whitespace().map(str::to_string).collect());
        } else if let Some(rest) = line.strip_prefix("start:") {
            start = Some(rest.trim().to_string());
        } else if let Some(rest) = line.strip_prefix("nonterminals:") {
            for spec in rest.split_whitespace() {
                let (name, rank) = parse_ranked_name(spec, line_no)?;
                declare(name, rank, line_no)?;
            }
        } else if let Some((lhs, rhs)) = line.split_once("->") {
            let (name, rank) = parse_ranked_name(lhs.trim(), line_no)?;
            declare(name.clone(), rank, line_no)?;
            let term = parse_term(rhs.trim(), line_no)?;
            rules.push(Rule { lhs: name, rhs: term });
        } else {
            return Err(err(format!("unrecognized declaration {line:?}")));
        }
    }

    let k = k.ok_or(DcfgError::Parse { line: 0, message: "missing k declaration".to_string() })?;
    let start = start.ok_or(DcfgError::Parse { line: 0, message: "missing start declaration".to_string() })?;
    Ok(Grammar {
        k,
        alphabet: alphabet.unwrap_or_default(),
        nonterminals,
        rules,
        start,
    })
}

fn print_string(symbols: &[Symbol], out: &mut String) {
    out.push('"');
    out.push_str(&symbols.join(" "));
    out.push('"');
}

fn print_tuple(u: &StringTuple, out: &mut String) {
    if u.rank() == 0 {
        print_string(&u.components()[0], out);
    } else {
        out.push('(');
        for (i, comp) in u.components().iter().enumerate() {
            if i > 0 {
                out.push(',');
            }
            print_string(comp, out);
        }
        out.push(')');
    }
}

fn print_term_prec(term: &Term, out: &mut String, parent_concat: bool, right_child: bool) {
    match term {
        Term::Tuple(u) => print_tuple(u, out),
        Term::Nonterm(name) => out.push_str(name),
        Term::Concat(a, b) => {
            let needs_parens = parent_concat && right_child;
            if needs_parens {
                out.push('(');
            }
            print_term_prec(a, out, true, false);
            out.push(' ');
            print_term_prec(b, out, true, true);
            if needs_parens {
                out.push(')');
            }
        }
        Term::Intercal(j, a, b) => {
            let needs_parens = parent_concat || right_child;
            if needs_parens {
                out.push('(');
            }
            print_term_prec(a, out, false, false);
            let _ = write!(out, " @{j} ");
            print_term_prec(b, out, false, true);
            if needs_parens {
                out.push(')');
            }
        }
    }
}

/// Renders a term in the canonical expression syntax.
pub fn print_term(term: &Term) -> String {
    let mut out = String::new();
    print_term_prec(term, &mut out, false, false);
    out
}

/// Renders a rule line.
pub fn print_rule(rule: &Rule, rank: usize) -> String {
    format!("{}:{} -> {}", rule.lhs, rank, print_term(&rule.rhs))
}

/// Renders a grammar in the canonical file format; `parse_grammar` of
/// the output reproduces the grammar exactly.
pub fn print_grammar(grammar: &Grammar) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "k: {}", grammar.k);
    let alphabet: Vec<&str> = grammar.alphabet.iter().map(String::as_str).collect();
    let _ = writeln!(out, "alphabet: {}", alphabet.join(" "));
    let _ = writeln!(out, "start: {}", grammar.start);
    let decls: Vec<String> = grammar
        .nonterminals
        .iter()
        .map(|n| format!("{}:{}", n.name, n.rank))
        .collect();
    let _ = writeln!(out, "nonterminals: {}", decls.join(" "));
    for rule in &grammar.rules {
        let rank = grammar.nonterm_rank(&rule.lhs).unwrap_or(0);
        let _ = writeln!(out, "{}", print_rule(rule, rank));
    }
    out
}
