//! Pure algebra of string tuples.
//!
//! A [`StringTuple`] is a nonempty sequence of strings over a symbol
//! alphabet; its rank is the number of gaps between components. The two
//! grammar operations are [`concat`](StringTuple::concat) and
//! [`intercalate`](StringTuple::intercalate); the normalization passes
//! additionally use [`bridge`](StringTuple::bridge),
//! [`split`](StringTuple::split) and the partial
//! [`strip_right`](StringTuple::strip_right) /
//! [`strip_left`](StringTuple::strip_left) operations.

use std::fmt;

use crate::error::DcfgError;

/// A single alphabet symbol. Symbols are atomic identifiers such as
/// `a0`, not single characters.
pub type Symbol = String;

/// A string over the alphabet: a finite sequence of symbols. The empty
/// sequence denotes the empty word.
pub type Str = Vec<Symbol>;

/// A tuple of strings `(u_0, ..., u_k)` with rank `k >= 0`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct StringTuple {
    components: Vec<Str>,
}

impl StringTuple {
    /// Builds a tuple from its components. Panics if `components` is empty.
    pub fn new(components: Vec<Str>) -> Self {
        assert!(!components.is_empty(), "a string tuple has at least one component");
        StringTuple { components }
    }

    /// The empty word as a rank-0 tuple.
    pub fn epsilon() -> Self {
        StringTuple { components: vec![Vec::new()] }
    }

    /// A rank-0 tuple holding the given string.
    pub fn word<S: Into<Symbol>>(symbols: impl IntoIterator<Item = S>) -> Self {
        StringTuple { components: vec![symbols.into_iter().map(Into::into).collect()] }
    }

    /// A rank-0 tuple holding a single symbol.
    pub fn symbol<S: Into<Symbol>>(s: S) -> Self {
        StringTuple { components: vec![vec![s.into()]] }
    }

    /// The all-empty tuple of the given rank (`rank + 1` empty components).
    pub fn all_eps(rank: usize) -> Self {
        StringTuple { components: vec![Vec::new(); rank + 1] }
    }

    pub fn components(&self) -> &[Str] {
        &self.components
    }

    pub fn into_components(self) -> Vec<Str> {
        self.components
    }

    /// Number of gaps: components minus one.
    pub fn rank(&self) -> usize {
        self.components.len() - 1
    }

    /// Total number of symbols across all components.
    pub fn len(&self) -> usize {
        self.components.iter().map(|c| c.len()).sum()
    }

    /// True iff every component is the empty string.
    pub fn is_all_eps(&self) -> bool {
        self.components.iter().all(|c| c.is_empty())
    }

    /// True iff this is the rank-0 empty word.
    pub fn is_epsilon(&self) -> bool {
        self.rank() == 0 && self.len() == 0
    }

    /// Iterates over every symbol of every component.
    pub fn symbols(&self) -> impl Iterator<Item = &Symbol> {
        self.components.iter().flat_map(|c| c.iter())
    }

    /// Concatenation: the last component of `self` is glued to the first
    /// component of `other`. Ranks add.
    pub fn concat(&self, other: &StringTuple) -> StringTuple {
        let mut components = Vec::with_capacity(self.components.len() + other.rank());
        components.extend_from_slice(&self.components[..self.components.len() - 1]);
        let mut mid = self.components.last().unwrap().clone();
        mid.extend_from_slice(&other.components[0]);
        components.push(mid);
        components.extend_from_slice(&other.components[1..]);
        StringTuple { components }
    }

    /// Intercalation: splices `other` into gap `j` of `self` (gaps are
    /// numbered from 1). The result rank is `rank(self) + rank(other) - 1`.
    pub fn intercalate(&self, j: usize, other: &StringTuple) -> Result<StringTuple, DcfgError> {
        if j < 1 || j > self.rank() {
            return Err(DcfgError::GapOutOfRange { j, rank: self.rank() });
        }
        let mut components = Vec::with_capacity(self.rank() + other.rank());
        components.extend_from_slice(&self.components[..j - 1]);
        let mut left = self.components[j - 1].clone();
        left.extend_from_slice(&other.components[0]);
        if other.rank() == 0 {
            left.extend_from_slice(&self.components[j]);
            components.push(left);
        } else {
            components.push(left);
            components.extend_from_slice(&other.components[1..other.components.len() - 1]);
            let mut right = other.components.last().unwrap().clone();
            right.extend_from_slice(&self.components[j]);
            components.push(right);
        }
        components.extend_from_slice(&self.components[j + 1..]);
        Ok(StringTuple { components })
    }

    /// Fuses components `j - 1` and `j`, removing gap `j`. Rank drops by
    /// one; the length is unchanged.
    pub fn bridge(&self, j: usize) -> Result<StringTuple, DcfgError> {
        self.intercalate(j, &StringTuple::epsilon())
    }

    /// Inserts `l - 1` empty components into gap `j` (the all-empty tuple
    /// of rank `l` spliced in). `split(u, j, 1)` is the identity.
    pub fn split(&self, j: usize, l: usize) -> Result<StringTuple, DcfgError> {
        assert!(l >= 1, "split count must be positive");
        self.intercalate(j, &StringTuple::all_eps(l))
    }

    /// Drops the last `p` components provided they are all empty and the
    /// component before them is nonempty. Returns `None` where the
    /// operation is undefined.
    pub fn strip_right(&self, p: usize) -> Option<StringTuple> {
        if self.rank() < p {
            return None;
        }
        let keep = self.components.len() - p;
        if self.components[keep..].iter().any(|c| !c.is_empty()) {
            return None;
        }
        if self.components[keep - 1].is_empty() {
            return None;
        }
        Some(StringTuple { components: self.components[..keep].to_vec() })
    }

    /// Mirror image of [`strip_right`](Self::strip_right): drops the first
    /// `p` components, which must be empty, and the component after them
    /// must be nonempty.
    pub fn strip_left(&self, p: usize) -> Option<StringTuple> {
        if self.rank() < p {
            return None;
        }
        if self.components[..p].iter().any(|c| !c.is_empty()) {
            return None;
        }
        if self.components[p].is_empty() {
            return None;
        }
        Some(StringTuple { components: self.components[p..].to_vec() })
    }

    /// Number of trailing all-empty components.
    pub fn trailing_eps(&self) -> usize {
        self.components.iter().rev().take_while(|c| c.is_empty()).count().min(self.rank())
    }

    /// Number of leading all-empty components.
    pub fn leading_eps(&self) -> usize {
        self.components.iter().take_while(|c| c.is_empty()).count().min(self.rank())
    }

    /// Reverses the tuple: components in reverse order, each component's
    /// symbols reversed. `rev(x . y) = rev(y) . rev(x)` and
    /// `rev(x (.)_j y) = rev(x) (.)_{rk(x)-j+1} rev(y)`.
    pub fn reversed(&self) -> StringTuple {
        StringTuple {
            components: self
                .components
                .iter()
                .rev()
                .map(|c| c.iter().rev().cloned().collect())
                .collect(),
        }
    }

    /// Decomposes the tuple into factors of length and rank at most 1
    /// whose left-to-right concatenation rebuilds it. The empty word
    /// decomposes into no factors; none of the factors is the empty word.
    pub fn factors(&self) -> Vec<StringTuple> {
        let mut out = Vec::new();
        for s in &self.components[0] {
            out.push(StringTuple::symbol(s.clone()));
        }
        for comp in &self.components[1..] {
            match comp.split_first() {
                None => out.push(StringTuple::all_eps(1)),
                Some((first, rest)) => {
                    out.push(StringTuple::new(vec![Vec::new(), vec![first.clone()]]));
                    for s in rest {
                        out.push(StringTuple::symbol(s.clone()));
                    }
                }
            }
        }
        out
    }
}

impl fmt::Display for StringTuple {
    /// Components joined by `|`, symbols space-separated; an empty
    /// component prints as nothing.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, comp) in self.components.iter().enumerate() {
            if i > 0 {
                write!(f, "|")?;
            }
            write!(f, "{}", comp.join(" "))?;
        }
        Ok(())
    }
}
