//! Pass 2: elimination of all-empty tuples. Nonterminals that can only
//! produce all-empty tuples disappear; nonterminals that can produce
//! both get ground variants of the rules using them.

use std::collections::BTreeMap;

use crate::error::DcfgError;
use crate::grammar::{enumerate, Grammar, Rule};
use crate::terms::Term;
use crate::tuple_algebra::StringTuple;

use super::{classify, prune, require_stage, NfStage, PassOutput, ShapedRhs, Trace};

/// Classification of a nonterminal by what its language contains.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EpsClass {
    /// Empty language.
    Unproductive,
    /// No all-empty tuple derivable.
    NotEpsGenerating,
    /// Derives the all-empty tuple and at least one other tuple.
    EpsGenerating,
    /// Derives only the all-empty tuple.
    StrictlyEpsGenerating,
}

impl EpsClass {
    pub fn derives_all_empty(self) -> bool {
        matches!(self, EpsClass::EpsGenerating | EpsClass::StrictlyEpsGenerating)
    }
}

/// Three monotone fixpoints over single-step rules: productivity,
/// derivability of the all-empty tuple, and derivability of a tuple
/// containing a symbol.
pub fn compute_eps_flags(grammar: &Grammar) -> Result<BTreeMap<String, EpsClass>, DcfgError> {
    let shaped: Vec<(&str, ShapedRhs)> = grammar
        .rules
        .iter()
        .map(|r| {
            classify(&r.rhs).map(|s| (r.lhs.as_str(), s)).ok_or_else(|| DcfgError::WrongStage {
                expected: NfStage::WellFormed,
                reason: "rule is not a single-step rule".to_string(),
            })
        })
        .collect::<Result<_, _>>()?;
    let fixpoint = |sat: &dyn Fn(&ShapedRhs, &dyn Fn(&str) -> bool) -> bool| {
        let mut set: BTreeMap<&str, bool> =
            grammar.nonterminals.iter().map(|n| (n.name.as_str(), false)).collect();
        loop {
            let mut changed = false;
            for (lhs, rhs) in &shaped {
                if !set[lhs] && sat(rhs, &|n: &str| set.get(n).copied().unwrap_or(false)) {
                    set.insert(lhs, true);
                    changed = true;
                }
            }
            if !changed {
                break;
            }
        }
        set
    };
    let productive = fixpoint(&|rhs, holds| match rhs {
        ShapedRhs::Terminal { .. } => true,
        ShapedRhs::Prepend { b, .. }
        | ShapedRhs::Append { b, .. }
        | ShapedRhs::Intercal { b, .. }
        | ShapedRhs::Unary { b } => holds(b),
    });
    let eps_gen = fixpoint(&|rhs, holds| match rhs {
        ShapedRhs::Terminal { u } => u.is_all_eps(),
        ShapedRhs::Prepend { u, b } | ShapedRhs::Append { b, u } => u.is_all_eps() && holds(b),
        ShapedRhs::Intercal { b, u, .. } => u.is_all_eps() && holds(b),
        ShapedRhs::Unary { b } => holds(b),
    });
    let can_emit = fixpoint(&|rhs, holds| match rhs {
        ShapedRhs::Terminal { u } => u.len() >= 1,
        ShapedRhs::Prepend { u, b } | ShapedRhs::Append { b, u } => {
            holds(b) || (u.len() >= 1 && productive[*b])
        }
        ShapedRhs::Intercal { b, u, .. } => holds(b) || (u.len() >= 1 && productive[*b]),
        ShapedRhs::Unary { b } => holds(b),
    });
    Ok(grammar
        .nonterminals
        .iter()
        .map(|n| {
            let name = n.name.as_str();
            let class = if !productive[name] {
                EpsClass::Unproductive
            } else if !eps_gen[name] {
                EpsClass::NotEpsGenerating
            } else if can_emit[name] {
                EpsClass::EpsGenerating
            } else {
                EpsClass::StrictlyEpsGenerating
            };
            (n.name.clone(), class)
        })
        .collect())
}

/// Ground value of a single-step rule with its nonterminal replaced by
/// the all-empty tuple of the right rank.
fn ground_variant(grammar: &Grammar, rhs: &ShapedRhs) -> Option<StringTuple> {
    let value = match rhs {
        ShapedRhs::Prepend { u, b } => {
            u.concat(&StringTuple::all_eps(grammar.nonterm_rank(b)?))
        }
        ShapedRhs::Append { b, u } => {
            StringTuple::all_eps(grammar.nonterm_rank(b)?).concat(u)
        }
        ShapedRhs::Intercal { b, j, u } => {
            StringTuple::all_eps(grammar.nonterm_rank(b)?).intercalate(*j, u).ok()?
        }
        ShapedRhs::Terminal { .. } | ShapedRhs::Unary { .. } => return None,
    };
    Some(value)
}

pub fn pass2_raw(grammar: &Grammar) -> Result<PassOutput, DcfgError> {
    grammar.ensure_valid()?;
    require_stage(grammar, NfStage::WellFormed)?;
    let flags = compute_eps_flags(grammar)?;
    let class = |name: &str| flags.get(name).copied().unwrap_or(EpsClass::Unproductive);
    let dropped = |name: &str| {
        matches!(class(name), EpsClass::Unproductive | EpsClass::StrictlyEpsGenerating)
    };
    let eps_in_language = !enumerate(grammar, 0).entry(&grammar.start).is_empty();
    let mut trace = Trace::default();
    for n in &grammar.nonterminals {
        trace.note(format!("{}: {:?}", n.name, class(&n.name)));
    }
    let mut rules: Vec<Rule> = Vec::new();
    for rule in &grammar.rules {
        let lhs_rank = grammar.nonterm_rank(&rule.lhs).unwrap_or(0);
        let shaped = classify(&rule.rhs).unwrap();
        if dropped(&rule.lhs) {
            trace.removed(lhs_rank, rule);
            continue;
        }
        match &shaped {
            ShapedRhs::Terminal { u } => {
                if u.len() == 1 {
                    rules.push(rule.clone());
                } else {
                    trace.removed(lhs_rank, rule);
                }
            }
            ShapedRhs::Unary { b } => {
                if dropped(b) {
                    trace.removed(lhs_rank, rule);
                } else {
                    rules.push(rule.clone());
                }
            }
            ShapedRhs::Prepend { b, .. }
            | ShapedRhs::Append { b, .. }
            | ShapedRhs::Intercal { b, .. } => {
                let b_class = class(b);
                if !dropped(b) {
                    rules.push(rule.clone());
                } else {
                    trace.removed(lhs_rank, rule);
                }
                if b_class.derives_all_empty() {
                    // The derivation where B contributed only empties
                    // now needs a ground rule; only length-1 values
                    // keep the shape.
                    if let Some(w) = ground_variant(grammar, &shaped) {
                        if w.len() == 1 {
                            let r = Rule { lhs: rule.lhs.clone(), rhs: Term::tuple(w) };
                            trace.added(lhs_rank, &r);
                            rules.push(r);
                        }
                    }
                }
            }
        }
    }
    let mut nonterminals: Vec<_> = grammar
        .nonterminals
        .iter()
        .filter(|n| n.name == grammar.start || !dropped(&n.name))
        .cloned()
        .collect();
    let mut start = grammar.start.clone();
    if eps_in_language {
        // The start symbol is the one nonterminal still allowed to
        // derive the all-empty tuple; if it occurs on a right side, a
        // fresh start keeps every right-side nonterminal free of it.
        if rules.iter().any(|r| r.rhs.nonterms().contains(&start.as_str())) {
            let fresh = grammar.fresh_name(&start, &Default::default());
            trace.note(format!("new start {fresh}"));
            nonterminals.push(crate::grammar::Nonterminal { name: fresh.clone(), rank: 0 });
            let copies: Vec<Rule> = rules
                .iter()
                .filter(|r| r.lhs == start)
                .map(|r| Rule { lhs: fresh.clone(), rhs: r.rhs.clone() })
                .collect();
            for r in &copies {
                trace.added(0, r);
            }
            rules.extend(copies);
            start = fresh;
        }
        let r = Rule { lhs: start.clone(), rhs: Term::tuple(StringTuple::epsilon()) };
        trace.added(0, &r);
        rules.push(r);
    }
    Ok(PassOutput {
        grammar: Grammar { nonterminals, rules, start, ..grammar.clone() },
        derived: Vec::new(),
        trace,
    })
}

/// Pass 2 proper: after it, no nonterminal other than the start symbol
/// derives the all-empty tuple, and `S -> eps` is present exactly when
/// the all-empty tuple is in the language.
pub fn pass2_eliminate_eps(grammar: &Grammar) -> Result<Grammar, DcfgError> {
    Ok(prune(&pass2_raw(grammar)?.grammar))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::format::parse_grammar;
    use crate::grammar::{emit_example, equiv_up_to};
    use crate::normalization::{pass1_wellformed, shape_check};

    fn wf(text: &str) -> Grammar {
        let g = parse_grammar(text).unwrap();
        g.ensure_valid().unwrap();
        assert!(shape_check(&g, NfStage::WellFormed).is_ok());
        g
    }

    #[test]
    fn flags_on_mixed_grammar() {
        let g = wf(
            "k: 1\nalphabet: a\nstart: S\nnonterminals: S:0 E:0 M:0 U:0\n\
             S:0 -> \"a\" M\nE:0 -> \"\"\nM:0 -> \"\"\nM:0 -> \"a\"\nU:0 -> \"a\" U\n",
        );
        let flags = compute_eps_flags(&g).unwrap();
        assert_eq!(flags["S"], EpsClass::NotEpsGenerating);
        assert_eq!(flags["E"], EpsClass::StrictlyEpsGenerating);
        assert_eq!(flags["M"], EpsClass::EpsGenerating);
        assert_eq!(flags["U"], EpsClass::Unproductive);
    }

    #[test]
    fn eps_rule_only_when_eps_in_language() {
        let g = wf("k: 1\nalphabet: a\nstart: S\nS:0 -> \"\"\nS:0 -> \"a\" S\n");
        let out = pass2_eliminate_eps(&g).unwrap();
        assert!(out
            .rules
            .iter()
            .any(|r| matches!(classify(&r.rhs), Some(ShapedRhs::Terminal { u }) if u.is_epsilon())));
        assert!(equiv_up_to(&g, &out, 6).is_equal());

        let g2 = wf("k: 1\nalphabet: a\nstart: S\nS:0 -> \"a\"\n");
        let out2 = pass2_eliminate_eps(&g2).unwrap();
        assert!(!out2
            .rules
            .iter()
            .any(|r| matches!(classify(&r.rhs), Some(ShapedRhs::Terminal { u }) if u.is_epsilon())));
    }

    #[test]
    fn only_start_derives_all_empty_afterwards() {
        let g = wf(
            "k: 2\nalphabet: a\nstart: S\nnonterminals: S:0 S':1 T:2\n\
             S:0 -> S' @1 \"\"\nS':1 -> T @1 \"\"\nT:2 -> (\"\", \"\", \"\")\nT:2 -> \"a\" T\n",
        );
        let out = pass2_eliminate_eps(&g).unwrap();
        assert!(shape_check(&out, NfStage::NoEpsNonterm).is_ok());
        let flags = compute_eps_flags(&out).unwrap();
        for n in &out.nonterminals {
            if n.name != out.start {
                assert!(!flags[&n.name].derives_all_empty(), "{}", n.name);
            }
        }
        assert!(equiv_up_to(&g, &out, 6).is_equal());
    }

    #[test]
    fn example_grammars_through_pass2() {
        for k in 1..=2 {
            let g = emit_example(k).unwrap();
            let g1 = pass1_wellformed(&g).unwrap();
            let g2 = pass2_eliminate_eps(&g1).unwrap();
            g2.ensure_valid().unwrap();
            assert!(shape_check(&g2, NfStage::NoEpsNonterm).is_ok());
            assert!(equiv_up_to(&g, &g2, 4 * (k + 1)).is_equal());
        }
    }
}
