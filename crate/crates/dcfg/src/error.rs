use thiserror::Error;

/// Errors raised by the library operations. Check-style operations
/// (`validate`, `check_k_correct`, `shape_check`) report violations in
/// their return value instead of using this type.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DcfgError {
    #[error("gap index {j} out of range for a tuple of rank {rank}")]
    GapOutOfRange { j: usize, rank: usize },
    #[error("unknown nonterminal {0}")]
    UnknownNonterminal(String),
    #[error("nonterminal {name} bound to a tuple of rank {got}, expected {expected}")]
    RankMismatch { name: String, expected: usize, got: usize },
    #[error("unbound nonterminal {0}")]
    UnboundNonterminal(String),
    #[error("term is not linear: contains more than one nonterminal occurrence")]
    NotLinear,
    #[error("term is not {k}-correct: {reason}")]
    NotKCorrect { k: usize, reason: String },
    #[error("grammar is not valid: {0}")]
    InvalidGrammar(String),
    #[error("grammar is not linear")]
    NonLinearGrammar,
    #[error("grammar is not in the expected {expected:?} shape: {reason}")]
    WrongStage { expected: crate::normalization::NfStage, reason: String },
    #[error("example grammars require k >= 1")]
    ExampleBound,
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("work budget exceeded: {0}")]
    Budget(String),
}
