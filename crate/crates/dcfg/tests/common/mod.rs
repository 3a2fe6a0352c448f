//! Seeded random generators shared by the integration test targets:
//! string tuples, linear k-correct terms, and small linear grammars.

use std::collections::BTreeSet;

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use dcfg::grammar::{Grammar, Nonterminal, Rule};
use dcfg::terms::Term;
use dcfg::tuple_algebra::StringTuple;

pub const ALPHABET: [&str; 2] = ["a", "b"];

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random tuple of the given rank with total length at most `max_len`.
pub fn rand_tuple_of_rank(rng: &mut ChaCha8Rng, rank: usize, max_len: usize) -> StringTuple {
    let len = rng.gen_range(0..=max_len);
    let mut components = vec![Vec::new(); rank + 1];
    for _ in 0..len {
        let c = rng.gen_range(0..=rank);
        components[c].push(ALPHABET[rng.gen_range(0..ALPHABET.len())].to_string());
    }
    StringTuple::new(components)
}

/// Random tuple with rank at most `max_rank` and length at most `max_len`.
#[allow(dead_code)] // shared across test targets; not every target uses it
pub fn rand_tuple(rng: &mut ChaCha8Rng, max_rank: usize, max_len: usize) -> StringTuple {
    let rank = rng.gen_range(0..=max_rank);
    rand_tuple_of_rank(rng, rank, max_len)
}

/// Random ground k-correct term of the given rank.
pub fn gen_ground_term(rng: &mut ChaCha8Rng, k: usize, depth: usize, target: usize) -> Term {
    assert!(target <= k);
    if depth == 0 || rng.gen_bool(0.3) {
        return Term::tuple(rand_tuple_of_rank(rng, target, 2));
    }
    if rng.gen_bool(0.5) {
        let r1 = rng.gen_range(0..=target);
        Term::concat(
            gen_ground_term(rng, k, depth - 1, r1),
            gen_ground_term(rng, k, depth - 1, target - r1),
        )
    } else {
        // rank(left) + rank(right) - 1 = target with rank(left) in [1, k].
        let lo = (target + 1).saturating_sub(k);
        let hi = target.min(k);
        if lo > hi {
            return Term::tuple(rand_tuple_of_rank(rng, target, 2));
        }
        let rb = rng.gen_range(lo..=hi);
        let ra = target + 1 - rb;
        let j = rng.gen_range(1..=ra);
        Term::intercal(
            j,
            gen_ground_term(rng, k, depth - 1, ra),
            gen_ground_term(rng, k, depth - 1, rb),
        )
    }
}

fn count_leaves_of_rank(term: &Term, rank_wanted: usize) -> usize {
    match term {
        Term::Tuple(u) => usize::from(u.rank() == rank_wanted),
        Term::Nonterm(_) => 0,
        Term::Concat(a, b) | Term::Intercal(_, a, b) => {
            count_leaves_of_rank(a, rank_wanted) + count_leaves_of_rank(b, rank_wanted)
        }
    }
}

/// Replaces the `idx`-th (left-to-right) tuple leaf of the wanted rank.
fn replace_leaf(term: &mut Term, rank_wanted: usize, idx: &mut usize, name: &str) -> bool {
    match term {
        Term::Tuple(u) if u.rank() == rank_wanted => {
            if *idx == 0 {
                *term = Term::nonterm(name);
                true
            } else {
                *idx -= 1;
                false
            }
        }
        Term::Tuple(_) | Term::Nonterm(_) => false,
        Term::Concat(a, b) | Term::Intercal(_, a, b) => {
            replace_leaf(a, rank_wanted, idx, name) || replace_leaf(b, rank_wanted, idx, name)
        }
    }
}

/// Random linear k-correct term of the given rank mentioning the
/// nonterminal at most once (usually once).
pub fn gen_linear_term(
    rng: &mut ChaCha8Rng,
    k: usize,
    depth: usize,
    target: usize,
    nonterm: (&str, usize),
) -> Term {
    for _ in 0..50 {
        let mut term = gen_ground_term(rng, k, depth, target);
        let slots = count_leaves_of_rank(&term, nonterm.1);
        if slots > 0 {
            let mut idx = rng.gen_range(0..slots);
            assert!(replace_leaf(&mut term, nonterm.1, &mut idx, nonterm.0));
            return term;
        }
    }
    gen_ground_term(rng, k, depth, target)
}

/// Small random linear grammar over {a, b}: k <= 3, at most 5
/// nonterminals and 10 rules; always passes validate().
pub fn gen_grammar(seed: u64) -> Grammar {
    let mut rng = rng(seed);
    let k = rng.gen_range(1..=3);
    let n = rng.gen_range(1..=5);
    let mut nonterminals = vec![Nonterminal { name: "N0".to_string(), rank: 0 }];
    for i in 1..n {
        nonterminals.push(Nonterminal { name: format!("N{i}"), rank: rng.gen_range(0..=k) });
    }
    let mut rules = Vec::new();
    for _ in 0..rng.gen_range(3..=10) {
        let lhs = nonterminals.choose(&mut rng).unwrap().clone();
        let rhs = if rng.gen_bool(0.8) {
            let target = nonterminals.choose(&mut rng).unwrap();
            gen_linear_term(&mut rng, k, 3, lhs.rank, (&target.name, target.rank))
        } else {
            gen_ground_term(&mut rng, k, 3, lhs.rank)
        };
        rules.push(Rule { lhs: lhs.name, rhs });
    }
    let g = Grammar {
        k,
        alphabet: ALPHABET.iter().map(|s| s.to_string()).collect::<BTreeSet<_>>(),
        nonterminals,
        rules,
        start: "N0".to_string(),
    };
    assert!(g.validate().is_empty(), "generator must produce valid grammars");
    g
}
