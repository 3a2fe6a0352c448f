//! The normal-form pipeline for linear grammars: flattening to
//! single-step rules, elimination of all-empty-generating nonterminals,
//! bridge/split construction for empty intercalation arguments, and the
//! final stripping of empty tuple components; plus the shared unary-rule
//! eliminator, pruning, and shape checkers.

mod pass1;
mod pass2;
mod pass3;
mod pass4;

pub use pass1::{pass1_raw, pass1_wellformed};
pub use pass2::{compute_eps_flags, pass2_eliminate_eps, pass2_raw, EpsClass};
pub use pass3::{pass3_bridges_splits, pass3_raw};
pub use pass4::{pass4_strip, strip_core, Side};

use std::collections::{BTreeMap, BTreeSet};

use crate::error::DcfgError;
use crate::grammar::{Grammar, Rule};
use crate::terms::Term;
use crate::tuple_algebra::StringTuple;

/// The four normal-form stages, each with a decidable per-rule shape.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NfStage {
    /// Rules `A -> uB` / `A -> Bu` (`|u| <= 1`, `u` not the empty word),
    /// `A -> B (.)_j u` (`|u| <= 1`), `A -> u` (`|u| <= 1`).
    WellFormed,
    /// As above, but terminal rules have `|u| = 1`, with `S -> eps`
    /// allowed.
    NoEpsNonterm,
    /// As above, plus every intercalation argument has `|u| = 1`.
    NoEpsIntercalArg,
    /// Every constant has `|u| = 1`, plus optionally `S -> eps`.
    Final,
}

/// A rule right side viewed through the single-step shapes the passes
/// work with.
#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) enum ShapedRhs<'a> {
    /// `A -> u B`
    Prepend { u: &'a StringTuple, b: &'a str },
    /// `A -> B u`
    Append { b: &'a str, u: &'a StringTuple },
    /// `A -> B (.)_j u`
    Intercal { b: &'a str, j: usize, u: &'a StringTuple },
    /// `A -> u`
    Terminal { u: &'a StringTuple },
    /// `A -> B` (transient between passes)
    Unary { b: &'a str },
}

pub(crate) fn classify(rhs: &Term) -> Option<ShapedRhs<'_>> {
    match rhs {
        Term::Tuple(u) => Some(ShapedRhs::Terminal { u }),
        Term::Nonterm(b) => Some(ShapedRhs::Unary { b }),
        Term::Concat(a, b) => match (a.as_ref(), b.as_ref()) {
            (Term::Tuple(u), Term::Nonterm(name)) => Some(ShapedRhs::Prepend { u, b: name }),
            (Term::Nonterm(name), Term::Tuple(u)) => Some(ShapedRhs::Append { b: name, u }),
            _ => None,
        },
        Term::Intercal(j, a, b) => match (a.as_ref(), b.as_ref()) {
            (Term::Nonterm(name), Term::Tuple(u)) => {
                Some(ShapedRhs::Intercal { b: name, j: *j, u })
            }
            _ => None,
        },
    }
}

/// Decides a stage's shape predicate, returning the first offending rule
/// index and a reason.
pub fn shape_check(grammar: &Grammar, stage: NfStage) -> Result<(), (usize, String)> {
    for (idx, rule) in grammar.rules.iter().enumerate() {
        if let Err(reason) = check_rule_shape(grammar, rule, stage) {
            return Err((idx, reason));
        }
    }
    Ok(())
}

fn check_rule_shape(grammar: &Grammar, rule: &Rule, stage: NfStage) -> Result<(), String> {
    let shaped = classify(&rule.rhs)
        .ok_or_else(|| "rule is not a single-step rule over one nonterminal".to_string())?;
    let eps_terminal_ok = |u: &StringTuple| {
        // The S -> eps exception, available from NoEpsNonterm on.
        stage != NfStage::WellFormed && rule.lhs == grammar.start && u.is_epsilon()
    };
    match shaped {
        ShapedRhs::Unary { .. } => Err("unary rule".to_string()),
        ShapedRhs::Prepend { u, .. } | ShapedRhs::Append { u, .. } => match stage {
            NfStage::Final => {
                if u.len() != 1 {
                    Err(format!("concatenation constant {u} must have length 1"))
                } else {
                    Ok(())
                }
            }
            _ => {
                if u.len() > 1 {
                    Err(format!("concatenation constant {u} longer than 1"))
                } else if u.is_epsilon() {
                    Err("concatenation with the empty word".to_string())
                } else {
                    Ok(())
                }
            }
        },
        ShapedRhs::Intercal { u, .. } => match stage {
            NfStage::WellFormed | NfStage::NoEpsNonterm => {
                if u.len() > 1 {
                    Err(format!("intercalation argument {u} longer than 1"))
                } else {
                    Ok(())
                }
            }
            NfStage::NoEpsIntercalArg | NfStage::Final => {
                if u.len() != 1 {
                    Err(format!("intercalation argument {u} must have length 1"))
                } else {
                    Ok(())
                }
            }
        },
        ShapedRhs::Terminal { u } => match stage {
            NfStage::WellFormed => {
                if u.len() > 1 {
                    Err(format!("terminal constant {u} longer than 1"))
                } else {
                    Ok(())
                }
            }
            _ => {
                if u.len() == 1 || eps_terminal_ok(u) {
                    Ok(())
                } else {
                    Err(format!("terminal constant {u} must have length 1"))
                }
            }
        },
    }
}

/// How a pipeline-created nonterminal was derived from its base.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Decoration {
    /// Gap `j` fused shut; rank drops by one.
    Bridge(usize),
    /// `l` empty gaps inserted at gap `j`; rank grows by `l - 1`.
    Split(usize, usize),
    /// General pending insertions: each listed tuple is spliced into its
    /// gap of the base (highest gap first).
    Insert(Vec<(usize, StringTuple)>),
    /// `p` trailing empty components removed; rank drops by `p`.
    StripRight(usize),
    /// `p` leading empty components removed; rank drops by `p`.
    StripLeft(usize),
}

/// A derived nonterminal: a base name plus the decoration applied to it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DerivedName {
    pub base: String,
    pub decoration: Decoration,
}

impl DerivedName {
    pub fn render(&self) -> String {
        match &self.decoration {
            Decoration::Bridge(j) => format!("{}^bridge{j}", self.base),
            Decoration::Split(j, l) => format!("{}^split{j}_{l}", self.base),
            Decoration::Insert(items) => {
                let mut out = self.base.clone();
                for (g, w) in items {
                    let enc: String = w
                        .components()
                        .iter()
                        .map(|c| c.join("_"))
                        .collect::<Vec<_>>()
                        .join("''");
                    let enc: String =
                        enc.chars().filter(|c| c.is_alphanumeric() || matches!(c, '_' | '\'')).collect();
                    out.push_str(&format!("^ins{g}_{enc}"));
                }
                out
            }
            Decoration::StripRight(p) => format!("{}/{p}", self.base),
            Decoration::StripLeft(p) => format!("{}\\{p}", self.base),
        }
    }
}

/// A textual transformation log: `+ <rule>` / `- <rule>` / `! <note>`.
#[derive(Debug, Clone, Default)]
pub struct Trace {
    pub lines: Vec<String>,
}

impl Trace {
    pub(crate) fn added(&mut self, lhs_rank: usize, rule: &Rule) {
        self.lines.push(format!("+ {}", crate::format::print_rule(rule, lhs_rank)));
    }

    pub(crate) fn removed(&mut self, lhs_rank: usize, rule: &Rule) {
        self.lines.push(format!("- {}", crate::format::print_rule(rule, lhs_rank)));
    }

    pub(crate) fn note(&mut self, note: impl Into<String>) {
        self.lines.push(format!("! {}", note.into()));
    }

    pub fn render(&self) -> String {
        let mut out = self.lines.join("\n");
        if !out.is_empty() {
            out.push('\n');
        }
        out
    }
}

/// The unpruned result of one pass, carrying the created derived
/// nonterminals and the transformation log.
#[derive(Debug, Clone)]
pub struct PassOutput {
    pub grammar: Grammar,
    pub derived: Vec<(String, DerivedName)>,
    pub trace: Trace,
}

/// Replaces every unary rule `A -> B` by copies of B's non-unary rules,
/// using the reflexive-transitive closure of the unary relation. The
/// language of every nonterminal is preserved.
pub fn eliminate_unary(grammar: &Grammar) -> Grammar {
    let names: Vec<String> = grammar.nonterminals.iter().map(|n| n.name.clone()).collect();
    let mut reach: BTreeMap<String, BTreeSet<String>> = names
        .iter()
        .map(|n| (n.clone(), [n.clone()].into()))
        .collect();
    loop {
        let mut changed = false;
        for rule in &grammar.rules {
            if let Some(ShapedRhs::Unary { b }) = classify(&rule.rhs) {
                let targets = reach.get(b).cloned().unwrap_or_default();
                let entry = reach.entry(rule.lhs.clone()).or_default();
                for t in targets {
                    changed |= entry.insert(t);
                }
            }
        }
        if !changed {
            break;
        }
    }
    let non_unary: Vec<&Rule> = grammar
        .rules
        .iter()
        .filter(|r| !matches!(classify(&r.rhs), Some(ShapedRhs::Unary { .. })))
        .collect();
    let mut rules = Vec::new();
    let mut seen: BTreeSet<(String, String)> = BTreeSet::new();
    for name in &names {
        for target in reach.get(name).into_iter().flatten() {
            for rule in non_unary.iter().filter(|r| &r.lhs == target) {
                let key = (name.clone(), crate::format::print_term(&rule.rhs));
                if seen.insert(key) {
                    rules.push(Rule { lhs: name.clone(), rhs: rule.rhs.clone() });
                }
            }
        }
    }
    Grammar { rules, ..grammar.clone() }
}

/// Drops unproductive nonterminals (empty language at every bound), the
/// rules mentioning them, and everything unreachable from the start
/// symbol. The start symbol is always kept.
pub fn prune(grammar: &Grammar) -> Grammar {
    let mut productive: BTreeSet<String> = BTreeSet::new();
    loop {
        let mut changed = false;
        for rule in &grammar.rules {
            if productive.contains(&rule.lhs) {
                continue;
            }
            if rule.rhs.nonterms().iter().all(|n| productive.contains(*n)) {
                productive.insert(rule.lhs.clone());
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
    let rules: Vec<&Rule> = grammar
        .rules
        .iter()
        .filter(|r| {
            productive.contains(&r.lhs)
                && r.rhs.nonterms().iter().all(|n| productive.contains(*n))
        })
        .collect();
    let mut reachable: BTreeSet<String> = [grammar.start.clone()].into();
    loop {
        let mut changed = false;
        for rule in &rules {
            if reachable.contains(&rule.lhs) {
                for n in rule.rhs.nonterms() {
                    changed |= reachable.insert(n.to_string());
                }
            }
        }
        if !changed {
            break;
        }
    }
    Grammar {
        nonterminals: grammar
            .nonterminals
            .iter()
            .filter(|n| reachable.contains(&n.name))
            .cloned()
            .collect(),
        rules: rules
            .into_iter()
            .filter(|r| reachable.contains(&r.lhs))
            .cloned()
            .collect(),
        ..grammar.clone()
    }
}

pub(crate) fn require_stage(grammar: &Grammar, stage: NfStage) -> Result<(), DcfgError> {
    shape_check(grammar, stage).map_err(|(idx, reason)| DcfgError::WrongStage {
        expected: stage,
        reason: format!("rule {idx}: {reason}"),
    })
}

/// The full pipeline: flattening, empty-tuple elimination, bridges and
/// splits, component stripping.
pub fn normalize(grammar: &Grammar) -> Result<Grammar, DcfgError> {
    let g1 = pass1_wellformed(grammar)?;
    let g2 = pass2_eliminate_eps(&g1)?;
    let g3 = pass3_bridges_splits(&g2)?;
    pass4_strip(&g3)
}

/// Pass selection for [`run_pass`]; `All` chains the four passes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PassSelect {
    WellFormed,
    Eps,
    Bridges,
    Strip,
    All,
}

/// Runs one pass (or the whole pipeline) and returns the result together
/// with the accumulated transformation trace.
pub fn run_pass(grammar: &Grammar, select: PassSelect) -> Result<(Grammar, Trace), DcfgError> {
    let cleanup = |raw: PassOutput, trace: &mut Trace| {
        trace.lines.extend(raw.trace.lines);
        trace.note("unary elimination and pruning");
        prune(&eliminate_unary(&raw.grammar))
    };
    let mut trace = Trace::default();
    let out = match select {
        PassSelect::WellFormed => cleanup(pass1_raw(grammar)?, &mut trace),
        PassSelect::Eps => cleanup(pass2_raw(grammar)?, &mut trace),
        PassSelect::Bridges => cleanup(pass3_raw(grammar)?, &mut trace),
        PassSelect::Strip => {
            let mid = cleanup(strip_core(grammar, Side::Right)?, &mut trace);
            cleanup(strip_core(&mid, Side::Left)?, &mut trace)
        }
        PassSelect::All => {
            let mut g = grammar.clone();
            for sel in [
                PassSelect::WellFormed,
                PassSelect::Eps,
                PassSelect::Bridges,
                PassSelect::Strip,
            ] {
                let (next, t) = run_pass(&g, sel)?;
                trace.lines.extend(t.lines);
                g = next;
            }
            g
        }
    };
    Ok((out, trace))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::format::parse_grammar;
    use crate::grammar::{emit_example, enumerate};

    fn small(text: &str) -> Grammar {
        let g = parse_grammar(text).unwrap();
        g.ensure_valid().unwrap();
        g
    }

    #[test]
    fn eliminate_unary_simple() {
        let g = small("k: 1\nalphabet: b\nstart: A\nnonterminals: A:0 B:0\nA:0 -> B\nB:0 -> \"b\"\n");
        let out = eliminate_unary(&g);
        assert_eq!(out.rules.len(), 2);
        for lhs in ["A", "B"] {
            assert!(out
                .rules
                .iter()
                .any(|r| r.lhs == lhs && matches!(&r.rhs, Term::Tuple(u) if u.len() == 1)));
        }
    }

    #[test]
    fn eliminate_unary_cycle() {
        let g = small(
            "k: 1\nalphabet: b\nstart: A\nnonterminals: A:0 B:0\nA:0 -> B\nB:0 -> A\nB:0 -> \"b\"\n",
        );
        let out = eliminate_unary(&g);
        assert_eq!(out.rules.len(), 2);
        let table = enumerate(&out, 2);
        assert_eq!(table.entry("A"), table.entry("B"));
    }

    #[test]
    fn eliminate_unary_identity_without_unary_rules() {
        let g = small("k: 1\nalphabet: b\nstart: A\nA:0 -> \"b\"\n");
        assert_eq!(eliminate_unary(&g).rules, g.rules);
    }

    #[test]
    fn shape_check_raw_example_fails_wellformed() {
        let g = emit_example(1).unwrap();
        let err = shape_check(&g, NfStage::WellFormed).unwrap_err();
        assert!(err.1.contains("single-step"));
    }

    #[test]
    fn shape_check_eps_start_rule_is_final() {
        let g = small("k: 1\nalphabet: a\nstart: S\nS:0 -> \"\"\n");
        assert!(shape_check(&g, NfStage::Final).is_ok());
        assert!(shape_check(&g, NfStage::WellFormed).is_ok());
        assert!(shape_check(&g, NfStage::NoEpsNonterm).is_ok());
    }

    #[test]
    fn prune_drops_unreachable_and_unproductive() {
        let g = small(
            "k: 1\nalphabet: a b\nstart: S\nnonterminals: S:0 U:0 D:0\nS:0 -> \"a\"\nU:0 -> \"a\" U\nD:0 -> \"b\"\n",
        );
        let out = prune(&g);
        let names: Vec<&str> = out.nonterminals.iter().map(|n| n.name.as_str()).collect();
        assert_eq!(names, vec!["S"]);
        assert_eq!(out.rules.len(), 1);
    }

    #[test]
    fn derived_name_rendering() {
        let b = DerivedName { base: "T".to_string(), decoration: Decoration::Bridge(1) };
        assert_eq!(b.render(), "T^bridge1");
        let s = DerivedName { base: "T".to_string(), decoration: Decoration::Split(2, 3) };
        assert_eq!(s.render(), "T^split2_3");
        let r = DerivedName { base: "A".to_string(), decoration: Decoration::StripRight(1) };
        assert_eq!(r.render(), "A/1");
        let l = DerivedName { base: "A".to_string(), decoration: Decoration::StripLeft(2) };
        assert_eq!(l.render(), "A\\2");
    }
}
