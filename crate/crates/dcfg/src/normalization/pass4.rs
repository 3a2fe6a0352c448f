//! Pass 4: stripping of empty tuple components. Every nonterminal A of
//! rank r gets variants `A/p` (`A\p`) whose language is that of A with
//! exactly `p` trailing (leading) empty components removed; constants
//! then carry their symbol in a definite component, and after both
//! directions every constant has length exactly one.

use std::collections::BTreeMap;

use crate::error::DcfgError;
use crate::grammar::{Grammar, Nonterminal, Rule};
use crate::terms::{RankEnv, Term};
use crate::tuple_algebra::StringTuple;

use super::{
    classify, compute_eps_flags, eliminate_unary, prune, require_stage, Decoration, DerivedName,
    NfStage, PassOutput, ShapedRhs, Trace,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Right,
    Left,
}

/// Mirror image of a term: tuples reversed, concatenation swapped, gap
/// `j` of a rank-`r` left operand becomes gap `r - j + 1`.
fn mirror_term(term: &Term, ranks: &RankEnv) -> Result<Term, DcfgError> {
    Ok(match term {
        Term::Tuple(u) => Term::tuple(u.reversed()),
        Term::Nonterm(n) => Term::nonterm(n.clone()),
        Term::Concat(a, b) => Term::concat(mirror_term(b, ranks)?, mirror_term(a, ranks)?),
        Term::Intercal(j, a, b) => {
            let r = a.rank(ranks)?;
            Term::intercal(r - j + 1, mirror_term(a, ranks)?, mirror_term(b, ranks)?)
        }
    })
}

/// Mirror image of a grammar; an involution that preserves rank,
/// k-correctness, and the single-step shapes.
fn mirror_grammar(grammar: &Grammar) -> Result<Grammar, DcfgError> {
    let ranks = grammar.rank_env();
    let rules = grammar
        .rules
        .iter()
        .map(|r| {
            Ok(Rule { lhs: r.lhs.clone(), rhs: mirror_term(&r.rhs, &ranks)? })
        })
        .collect::<Result<Vec<_>, DcfgError>>()?;
    Ok(Grammar { rules, ..grammar.clone() })
}

/// Index of the component holding the symbol of a length-1 tuple.
fn symbol_pos(u: &StringTuple) -> usize {
    u.components().iter().position(|c| !c.is_empty()).expect("length-1 tuple")
}

struct StripCtx<'a> {
    grammar: &'a Grammar,
    decoration: fn(usize) -> Decoration,
    names: BTreeMap<(String, usize), String>,
    nonterminals: Vec<Nonterminal>,
    derived: Vec<(String, DerivedName)>,
}

impl StripCtx<'_> {
    fn name(&mut self, base: &str, p: usize) -> String {
        let key = (base.to_string(), p);
        if let Some(n) = self.names.get(&key) {
            return n.clone();
        }
        let dn = DerivedName { base: base.to_string(), decoration: (self.decoration)(p) };
        let mut name = dn.render();
        while self.grammar.has_nonterm(&name)
            || self.nonterminals.iter().any(|n| n.name == name)
        {
            name.push('\'');
        }
        let rank = self.grammar.nonterm_rank(base).expect("known base") - p;
        self.nonterminals.push(Nonterminal { name: name.clone(), rank });
        self.derived.push((name.clone(), dn));
        self.names.insert(key, name.clone());
        name
    }
}

/// The trailing-strip construction. The defining property: the language
/// of `A/p` is the set of tuples of `L(A)` with exactly `p` empty
/// trailing components, those components removed.
pub fn strip_core(grammar: &Grammar, side: Side) -> Result<PassOutput, DcfgError> {
    match side {
        Side::Right => strip_right_core(grammar),
        Side::Left => {
            let mirrored = mirror_grammar(grammar)?;
            let out = strip_right_left_core(&mirrored, Decoration::StripLeft)?;
            let back = mirror_grammar(&out.grammar)?;
            Ok(PassOutput { grammar: back, ..out })
        }
    }
}

fn strip_right_core(grammar: &Grammar) -> Result<PassOutput, DcfgError> {
    strip_right_left_core(grammar, Decoration::StripRight)
}

fn strip_right_left_core(
    grammar: &Grammar,
    decoration: fn(usize) -> Decoration,
) -> Result<PassOutput, DcfgError> {
    grammar.ensure_valid()?;
    require_stage(grammar, NfStage::NoEpsIntercalArg)?;
    let flags = compute_eps_flags(grammar)?;
    for rule in &grammar.rules {
        for n in rule.rhs.nonterms() {
            if flags.get(n).is_some_and(|c| c.derives_all_empty()) {
                return Err(DcfgError::WrongStage {
                    expected: NfStage::NoEpsIntercalArg,
                    reason: format!("right-side nonterminal {n} derives the all-empty tuple"),
                });
            }
        }
    }
    let mut ctx = StripCtx {
        grammar,
        decoration,
        names: BTreeMap::new(),
        nonterminals: Vec::new(),
        derived: Vec::new(),
    };
    let mut trace = Trace::default();
    let mut rules: Vec<Rule> = Vec::new();
    let add = |ctx: &mut StripCtx, trace: &mut Trace, rules: &mut Vec<Rule>,
                   lhs_base: &str, p: usize, rhs: Term| {
        let lhs = ctx.name(lhs_base, p);
        let rank = grammar.nonterm_rank(lhs_base).unwrap() - p;
        let rule = Rule { lhs, rhs };
        trace.added(rank, &rule);
        rules.push(rule);
    };
    for rule in &grammar.rules {
        let lhs = rule.lhs.as_str();
        match classify(&rule.rhs).expect("single-step") {
            ShapedRhs::Terminal { u } => {
                if u.is_epsilon() && lhs == grammar.start {
                    add(&mut ctx, &mut trace, &mut rules, lhs, 0, Term::tuple(u.clone()));
                } else {
                    let r = u.trailing_eps();
                    let stripped = u.strip_right(r).expect("strip at trailing run");
                    add(&mut ctx, &mut trace, &mut rules, lhs, r, Term::tuple(stripped));
                }
            }
            ShapedRhs::Prepend { u, b } => {
                for p in 0..=grammar.nonterm_rank(b).unwrap() {
                    let rhs =
                        Term::concat(Term::tuple(u.clone()), Term::nonterm(ctx.name(b, p)));
                    add(&mut ctx, &mut trace, &mut rules, lhs, p, rhs);
                }
            }
            ShapedRhs::Append { b, u } => {
                let rb = grammar.nonterm_rank(b).unwrap();
                if u.is_all_eps() {
                    let m = u.rank();
                    for s in 0..=rb {
                        let rhs = Term::nonterm(ctx.name(b, s));
                        add(&mut ctx, &mut trace, &mut rules, lhs, m + s, rhs);
                    }
                } else {
                    let q = symbol_pos(u);
                    let r = u.rank() - q;
                    let a = u.symbols().next().unwrap().clone();
                    for t in 0..=rb {
                        let mut constant = StringTuple::all_eps(t + q).into_components();
                        constant.last_mut().unwrap().push(a.clone());
                        let rhs = Term::concat(
                            Term::nonterm(ctx.name(b, t)),
                            Term::tuple(StringTuple::new(constant)),
                        );
                        add(&mut ctx, &mut trace, &mut rules, lhs, r, rhs);
                    }
                }
            }
            ShapedRhs::Intercal { b, j, u } => {
                let rb = grammar.nonterm_rank(b).unwrap();
                let q = symbol_pos(u);
                let r = u.rank() - q;
                let a = u.symbols().next().unwrap().clone();
                for t in 0..=(rb - j) {
                    let rhs =
                        Term::intercal(j, Term::nonterm(ctx.name(b, t)), Term::tuple(u.clone()));
                    add(&mut ctx, &mut trace, &mut rules, lhs, t, rhs);
                }
                for t in (rb - j + 1)..=rb {
                    let s = j + t - rb;
                    let mut constant = StringTuple::all_eps(s - 1 + q).into_components();
                    constant.last_mut().unwrap().push(a.clone());
                    let rhs = Term::concat(
                        Term::nonterm(ctx.name(b, t)),
                        Term::tuple(StringTuple::new(constant)),
                    );
                    add(&mut ctx, &mut trace, &mut rules, lhs, rb - j + r, rhs);
                }
            }
            ShapedRhs::Unary { b } => {
                for p in 0..=grammar.nonterm_rank(b).unwrap() {
                    let rhs = Term::nonterm(ctx.name(b, p));
                    add(&mut ctx, &mut trace, &mut rules, lhs, p, rhs);
                }
            }
        }
    }
    let start = ctx.name(&grammar.start, 0);
    Ok(PassOutput {
        grammar: Grammar {
            k: grammar.k,
            alphabet: grammar.alphabet.clone(),
            nonterminals: ctx.nonterminals,
            rules,
            start,
        },
        derived: ctx.derived,
        trace,
    })
}

/// Pass 4 proper: trailing strip, unary elimination and pruning, then
/// the mirrored leading strip with the same cleanup.
pub fn pass4_strip(grammar: &Grammar) -> Result<Grammar, DcfgError> {
    let right = strip_core(grammar, Side::Right)?;
    let mid = prune(&eliminate_unary(&right.grammar));
    let left = strip_core(&mid, Side::Left)?;
    Ok(prune(&eliminate_unary(&left.grammar)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::format::parse_grammar;
    use crate::grammar::{emit_example, enumerate, equiv_up_to};
    use crate::normalization::{
        pass1_wellformed, pass2_eliminate_eps, pass3_bridges_splits, shape_check,
    };

    fn staged(text: &str) -> Grammar {
        let g = parse_grammar(text).unwrap();
        g.ensure_valid().unwrap();
        assert!(shape_check(&g, NfStage::NoEpsIntercalArg).is_ok());
        g
    }

    #[test]
    fn mirror_is_an_involution() {
        let g = emit_example(2).unwrap();
        let m = mirror_grammar(&g).unwrap();
        assert_eq!(mirror_grammar(&m).unwrap().rules, g.rules);
    }

    #[test]
    fn strip_right_matches_defining_property() {
        let g = staged(
            "k: 1\nalphabet: a b\nstart: S\nnonterminals: S:0 T:1\n\
             S:0 -> T @1 \"b\"\nT:1 -> \"a\" T\nT:1 -> T @1 (\"b\", \"\")\n\
             T:1 -> (\"a\", \"\")\nT:1 -> (\"\", \"a\")\n",
        );
        let out = strip_core(&g, Side::Right).unwrap();
        // Combined grammar: originals plus stripped variants.
        let mut combined = out.grammar.clone();
        combined.nonterminals.extend(g.nonterminals.clone());
        combined.rules.extend(g.rules.clone());
        combined.ensure_valid().unwrap();
        let table = enumerate(&combined, 8);
        for (name, dn) in &out.derived {
            let Decoration::StripRight(p) = dn.decoration else { panic!("right strip only") };
            let image: std::collections::BTreeSet<_> = table
                .entry(&dn.base)
                .iter()
                .filter_map(|u| u.strip_right(p))
                .collect();
            assert_eq!(table.entry(name), &image, "{name}");
        }
        assert!(equiv_up_to(&g, &out.grammar, 8).is_equal());
    }

    #[test]
    fn full_pass_reaches_final_shape() {
        for k in 1..=2 {
            let g = emit_example(k).unwrap();
            let g3 = pass3_bridges_splits(
                &pass2_eliminate_eps(&pass1_wellformed(&g).unwrap()).unwrap(),
            )
            .unwrap();
            let g4 = pass4_strip(&g3).unwrap();
            g4.ensure_valid().unwrap();
            assert!(shape_check(&g4, NfStage::Final).is_ok());
            assert!(equiv_up_to(&g, &g4, 4 * (k + 1)).is_equal());
        }
    }

    #[test]
    fn eps_language_survives() {
        let g = staged("k: 1\nalphabet: a\nstart: S\nS:0 -> \"\"\nS:0 -> \"a\"\n");
        let g4 = pass4_strip(&g).unwrap();
        assert!(shape_check(&g4, NfStage::Final).is_ok());
        assert!(equiv_up_to(&g, &g4, 4).is_equal());
    }
}
