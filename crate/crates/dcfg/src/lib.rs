//! Displacement context-free grammars over string tuples: the tuple
//! algebra (concatenation and intercalation), k-correct terms, linear
//! grammars with a brute-force bounded enumerator, a text format, and
//! the four-pass normal-form pipeline for linear grammars.

pub mod error;
pub mod format;
pub mod grammar;
pub mod normalization;
pub mod terms;
pub mod tuple_algebra;

pub use error::DcfgError;
pub use format::{parse_grammar, parse_term, print_grammar, print_rule, print_term};
pub use grammar::{
    emit_example, enumerate, equiv_up_to, EquivResult, Grammar, LanguageTable, Nonterminal, Rule,
};
pub use normalization::{
    eliminate_unary, normalize, pass1_wellformed, pass2_eliminate_eps, pass3_bridges_splits,
    pass4_strip, prune, shape_check, NfStage,
};
pub use terms::{flatten_linear_term, RankEnv, Term, WellFormedChain};
pub use tuple_algebra::{StringTuple, Symbol};
