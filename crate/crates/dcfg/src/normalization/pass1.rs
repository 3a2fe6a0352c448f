//! Pass 1: flatten every rule into a well-formed chain and break the
//! chain into single-step rules over fresh intermediate nonterminals.

use std::collections::BTreeSet;

use crate::error::DcfgError;
use crate::grammar::{Grammar, Nonterminal, Rule};
use crate::terms::{flatten_linear_term, ChainBase, ChainStep, Term};

use super::{eliminate_unary, prune, PassOutput, Trace};

/// Unpruned flattening: each original rule `A -> t` becomes a chain of
/// single-step rules ending in `A`, threaded through fresh intermediate
/// nonterminals. The result may contain unary rules (for chains with no
/// steps over a nonterminal base).
pub fn pass1_raw(grammar: &Grammar) -> Result<PassOutput, DcfgError> {
    grammar.ensure_valid()?;
    if !grammar.is_linear() {
        return Err(DcfgError::NonLinearGrammar);
    }
    let ranks = grammar.rank_env();
    let mut trace = Trace::default();
    let mut taken: BTreeSet<String> = BTreeSet::new();
    let mut nonterminals = grammar.nonterminals.clone();
    let mut rules: Vec<Rule> = Vec::new();
    for rule in &grammar.rules {
        let lhs_rank = grammar.nonterm_rank(&rule.lhs).unwrap_or(0);
        let chain = flatten_linear_term(&rule.rhs, grammar.k, &ranks)?;
        let profile = chain.rank_profile(&ranks)?;
        trace.removed(lhs_rank, rule);
        // Current name and the rules of the chain so far, innermost first.
        let mut current: Option<String> = match &chain.base {
            ChainBase::Nonterm(name) => Some(name.clone()),
            ChainBase::Tuple(_) => None,
        };
        for (idx, step) in chain.steps.iter().enumerate() {
            let lhs = if idx + 1 == chain.steps.len() {
                rule.lhs.clone()
            } else {
                let fresh = grammar.fresh_name(&rule.lhs, &taken);
                taken.insert(fresh.clone());
                nonterminals.push(Nonterminal { name: fresh.clone(), rank: profile[idx + 1] });
                fresh
            };
            let inner = match &current {
                Some(name) => Term::nonterm(name.clone()),
                None => {
                    // Materialize the tuple base as its own nonterminal
                    // so every emitted rule is single-step.
                    let base = grammar.fresh_name(&rule.lhs, &taken);
                    taken.insert(base.clone());
                    nonterminals.push(Nonterminal { name: base.clone(), rank: profile[0] });
                    let ChainBase::Tuple(u) = &chain.base else { unreachable!() };
                    let r = Rule { lhs: base.clone(), rhs: Term::tuple(u.clone()) };
                    trace.added(profile[0], &r);
                    rules.push(r);
                    Term::nonterm(base)
                }
            };
            let rhs = match step {
                ChainStep::Prepend(u) => Term::concat(Term::tuple(u.clone()), inner),
                ChainStep::Append(u) => Term::concat(inner, Term::tuple(u.clone())),
                ChainStep::Intercal(j, u) => Term::intercal(*j, inner, Term::tuple(u.clone())),
            };
            let r = Rule { lhs: lhs.clone(), rhs };
            trace.added(profile[idx + 1], &r);
            rules.push(r);
            current = Some(lhs);
        }
        if chain.steps.is_empty() {
            // The whole right side collapsed to a leaf.
            let rhs = match &chain.base {
                ChainBase::Nonterm(name) => Term::nonterm(name.clone()),
                ChainBase::Tuple(u) => Term::tuple(u.clone()),
            };
            let r = Rule { lhs: rule.lhs.clone(), rhs };
            trace.added(lhs_rank, &r);
            rules.push(r);
        }
    }
    Ok(PassOutput {
        grammar: Grammar { nonterminals, rules, ..grammar.clone() },
        derived: Vec::new(),
        trace,
    })
}

/// Pass 1 proper: flatten, eliminate the unary rules the flattening may
/// leave behind, and prune.
pub fn pass1_wellformed(grammar: &Grammar) -> Result<Grammar, DcfgError> {
    let raw = pass1_raw(grammar)?;
    Ok(prune(&eliminate_unary(&raw.grammar)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grammar::{emit_example, enumerate, equiv_up_to};
    use crate::normalization::{shape_check, NfStage};

    #[test]
    fn example_grammar_flattens_to_wellformed() {
        for k in 1..=2 {
            let g = emit_example(k).unwrap();
            let out = pass1_wellformed(&g).unwrap();
            out.ensure_valid().unwrap();
            assert!(shape_check(&out, NfStage::WellFormed).is_ok());
            assert!(equiv_up_to(&g, &out, 4 * (k + 1)).is_equal());
        }
    }

    #[test]
    fn tuple_base_rules_materialize() {
        let g = crate::format::parse_grammar(
            "k: 1\nalphabet: a b\nstart: S\nS:0 -> \"a b\"\n",
        )
        .unwrap();
        let out = pass1_wellformed(&g).unwrap();
        assert!(shape_check(&out, NfStage::WellFormed).is_ok());
        let words = enumerate(&out, 4);
        assert_eq!(words.entry("S").len(), 1);
    }

    #[test]
    fn nonlinear_grammar_rejected() {
        let g = crate::format::parse_grammar(
            "k: 1\nalphabet: a\nstart: S\nS:0 -> S S\nS:0 -> \"a\"\n",
        )
        .unwrap();
        assert!(matches!(pass1_wellformed(&g), Err(DcfgError::NonLinearGrammar)));
    }
}
