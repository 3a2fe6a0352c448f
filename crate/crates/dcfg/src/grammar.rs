//! Grammar representation, validation, the example-language generator,
//! and the bounded-length enumeration oracle that serves as ground truth
//! for the normalization passes.

use std::collections::{BTreeMap, BTreeSet};

use crate::error::DcfgError;
use crate::terms::{RankEnv, Term};
use crate::tuple_algebra::{StringTuple, Symbol};

/// A ranked nonterminal.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Nonterminal {
    pub name: String,
    pub rank: usize,
}

/// A production rule `lhs -> rhs`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Rule {
    pub lhs: String,
    pub rhs: Term,
}

/// A k-displacement context-free grammar.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Grammar {
    pub k: usize,
    pub alphabet: BTreeSet<Symbol>,
    pub nonterminals: Vec<Nonterminal>,
    pub rules: Vec<Rule>,
    pub start: String,
}

impl Grammar {
    /// Declared ranks keyed by nonterminal name.
    pub fn rank_env(&self) -> RankEnv {
        self.nonterminals.iter().map(|n| (n.name.clone(), n.rank)).collect()
    }

    pub fn nonterm_rank(&self, name: &str) -> Option<usize> {
        self.nonterminals.iter().find(|n| n.name == name).map(|n| n.rank)
    }

    pub fn has_nonterm(&self, name: &str) -> bool {
        self.nonterminals.iter().any(|n| n.name == name)
    }

    /// A name not colliding with any declared nonterminal or symbol,
    /// formed from `base` by appending a counter when needed.
    pub fn fresh_name(&self, base: &str, taken: &BTreeSet<String>) -> String {
        let in_use = |name: &str| {
            self.has_nonterm(name) || self.alphabet.contains(name) || taken.contains(name)
        };
        if !in_use(base) {
            return base.to_string();
        }
        for i in 1.. {
            let candidate = format!("{base}'{i}");
            if !in_use(&candidate) {
                return candidate;
            }
        }
        unreachable!()
    }

    /// Checks every grammar invariant, reporting all violations.
    pub fn validate(&self) -> Vec<String> {
        let mut issues = Vec::new();
        let mut seen = BTreeSet::new();
        for nt in &self.nonterminals {
            if !seen.insert(nt.name.clone()) {
                issues.push(format!("duplicate nonterminal {}", nt.name));
            }
            if nt.rank > self.k {
                issues.push(format!("nonterminal {} has rank {} > k = {}", nt.name, nt.rank, self.k));
            }
            if self.alphabet.contains(&nt.name) {
                issues.push(format!("name {} is both a symbol and a nonterminal", nt.name));
            }
        }
        match self.nonterm_rank(&self.start) {
            None => issues.push(format!("start symbol {} is not declared", self.start)),
            Some(r) if r != 0 => issues.push(format!("start symbol {} has rank {r}, expected 0", self.start)),
            Some(_) => {}
        }
        let ranks = self.rank_env();
        for (idx, rule) in self.rules.iter().enumerate() {
            match self.nonterm_rank(&rule.lhs) {
                None => {
                    issues.push(format!("rule {idx}: left side {} is not declared", rule.lhs));
                    continue;
                }
                Some(lhs_rank) => match rule.rhs.rank(&ranks) {
                    Ok(rhs_rank) if rhs_rank != lhs_rank => issues.push(format!(
                        "rule {idx}: rank mismatch, {} has rank {lhs_rank} but right side has rank {rhs_rank}",
                        rule.lhs
                    )),
                    Ok(_) => {}
                    Err(e) => issues.push(format!("rule {idx}: {e}")),
                },
            }
            if let Err(v) = rule.rhs.check_k_correct(self.k, &ranks) {
                issues.push(format!("rule {idx}: not {}-correct: {v}", self.k));
            }
            for nt in rule.rhs.nonterms() {
                if !self.has_nonterm(nt) {
                    issues.push(format!("rule {idx}: undeclared nonterminal {nt}"));
                }
            }
            check_leaves(&rule.rhs, idx, &self.alphabet, &mut issues);
        }
        issues
    }

    /// Convenience wrapper turning a nonempty report into an error.
    pub fn ensure_valid(&self) -> Result<(), DcfgError> {
        let issues = self.validate();
        if issues.is_empty() {
            Ok(())
        } else {
            Err(DcfgError::InvalidGrammar(issues.join("; ")))
        }
    }

    /// True iff every rule's right side mentions at most one nonterminal.
    pub fn is_linear(&self) -> bool {
        self.rules.iter().all(|r| r.rhs.is_linear())
    }
}

fn check_leaves(term: &Term, idx: usize, alphabet: &BTreeSet<Symbol>, issues: &mut Vec<String>) {
    match term {
        Term::Tuple(u) => {
            for s in u.symbols() {
                if !alphabet.contains(s) {
                    issues.push(format!("rule {idx}: symbol {s} is not in the alphabet"));
                }
            }
        }
        Term::Nonterm(_) => {}
        Term::Concat(a, b) | Term::Intercal(_, a, b) => {
            check_leaves(a, idx, alphabet, issues);
            check_leaves(b, idx, alphabet, issues);
        }
    }
}

/// The example grammar family: `G_k` derives
/// `{ a_0^m b_0^m ... a_k^m b_k^m | m >= 0 }`.
pub fn emit_example(k: usize) -> Result<Grammar, DcfgError> {
    if k < 1 {
        return Err(DcfgError::ExampleBound);
    }
    let mut alphabet = BTreeSet::new();
    for i in 0..=k {
        alphabet.insert(format!("a{i}"));
        alphabet.insert(format!("b{i}"));
    }
    // S -> (..(T (.)_1 eps) ..) (.)_1 eps, with k applications: each one
    // lowers the rank by one, taking T from rank k down to rank 0.
    let mut s_body = Term::nonterm("T");
    for _ in 0..k {
        s_body = Term::intercal(1, s_body, Term::tuple(StringTuple::epsilon()));
    }
    // T -> a_0 (T (.)_1 (b_0, a_1) ... (.)_k (b_{k-1}, a_k)) b_k
    let mut inner = Term::nonterm("T");
    for i in 1..=k {
        let pair = StringTuple::new(vec![vec![format!("b{}", i - 1)], vec![format!("a{i}")]]);
        inner = Term::intercal(i, inner, Term::tuple(pair));
    }
    let t_body = Term::concat(
        Term::concat(Term::tuple(StringTuple::symbol("a0")), inner),
        Term::tuple(StringTuple::symbol(format!("b{k}"))),
    );
    Ok(Grammar {
        k,
        alphabet,
        nonterminals: vec![
            Nonterminal { name: "S".to_string(), rank: 0 },
            Nonterminal { name: "T".to_string(), rank: k },
        ],
        rules: vec![
            Rule { lhs: "S".to_string(), rhs: s_body },
            Rule { lhs: "T".to_string(), rhs: t_body },
            Rule { lhs: "T".to_string(), rhs: Term::tuple(StringTuple::all_eps(k)) },
        ],
        start: "S".to_string(),
    })
}

/// Per-nonterminal finite language fragments up to a length bound.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LanguageTable {
    pub bound: usize,
    pub entries: BTreeMap<String, BTreeSet<StringTuple>>,
}

impl LanguageTable {
    pub fn entry(&self, name: &str) -> &BTreeSet<StringTuple> {
        static EMPTY: std::sync::OnceLock<BTreeSet<StringTuple>> = std::sync::OnceLock::new();
        self.entries.get(name).unwrap_or_else(|| EMPTY.get_or_init(BTreeSet::new))
    }
}

/// Bottom-up fixpoint enumeration of every derivable tuple of length at
/// most `bound`, per nonterminal. Both grammar operations are
/// length-additive and leaves have nonnegative length, so cutting every
/// intermediate value at `bound` loses no derivation of a short tuple.
pub fn enumerate(grammar: &Grammar, bound: usize) -> LanguageTable {
    let mut entries: BTreeMap<String, BTreeSet<StringTuple>> = grammar
        .nonterminals
        .iter()
        .map(|n| (n.name.clone(), BTreeSet::new()))
        .collect();
    loop {
        let mut changed = false;
        for rule in &grammar.rules {
            let derived = eval_set(&rule.rhs, &entries, bound);
            let entry = entries.get_mut(&rule.lhs).expect("validated grammar");
            // Borrow juggling: collect first, the sets alias otherwise.
            for value in derived {
                if entry.insert(value) {
                    changed = true;
                }
            }
        }
        if !changed {
            break;
        }
    }
    LanguageTable { bound, entries }
}

/// All values a term can take when every nonterminal occurrence ranges
/// independently over its current entry set, cut at the length bound.
fn eval_set(
    term: &Term,
    entries: &BTreeMap<String, BTreeSet<StringTuple>>,
    bound: usize,
) -> BTreeSet<StringTuple> {
    match term {
        Term::Tuple(u) => {
            if u.len() <= bound {
                [u.clone()].into_iter().collect()
            } else {
                BTreeSet::new()
            }
        }
        Term::Nonterm(name) => entries.get(name).cloned().unwrap_or_default(),
        Term::Concat(a, b) => {
            let left = eval_set(a, entries, bound);
            let right = eval_set(b, entries, bound);
            let mut out = BTreeSet::new();
            for x in &left {
                for y in &right {
                    if x.len() + y.len() <= bound {
                        out.insert(x.concat(y));
                    }
                }
            }
            out
        }
        Term::Intercal(j, a, b) => {
            let left = eval_set(a, entries, bound);
            let right = eval_set(b, entries, bound);
            let mut out = BTreeSet::new();
            for x in &left {
                for y in &right {
                    if x.len() + y.len() <= bound {
                        out.insert(x.intercalate(*j, y).expect("k-correct rule"));
                    }
                }
            }
            out
        }
    }
}

/// Result of comparing two start languages up to a bound.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum EquivResult {
    Equal,
    Differs {
        witness: StringTuple,
        /// True when the witness is derivable in the first grammar only.
        in_first: bool,
    },
}

impl EquivResult {
    pub fn is_equal(&self) -> bool {
        matches!(self, EquivResult::Equal)
    }
}

/// Compares the start-symbol languages of two grammars up to a length
/// bound, returning the smallest tuple present on exactly one side.
pub fn equiv_up_to(g1: &Grammar, g2: &Grammar, bound: usize) -> EquivResult {
    let l1 = enumerate(g1, bound);
    let l2 = enumerate(g2, bound);
    let s1 = l1.entry(&g1.start);
    let s2 = l2.entry(&g2.start);
    let first_only = s1.difference(s2).next();
    let second_only = s2.difference(s1).next();
    match (first_only, second_only) {
        (None, None) => EquivResult::Equal,
        (Some(w), None) => EquivResult::Differs { witness: w.clone(), in_first: true },
        (None, Some(w)) => EquivResult::Differs { witness: w.clone(), in_first: false },
        (Some(w1), Some(w2)) => {
            if w1 <= w2 {
                EquivResult::Differs { witness: w1.clone(), in_first: true }
            } else {
                EquivResult::Differs { witness: w2.clone(), in_first: false }
            }
        }
    }
}
