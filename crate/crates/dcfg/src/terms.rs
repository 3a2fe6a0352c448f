//! Abstract syntax for k-correct terms, rank computation, ground-term
//! evaluation, and the rewriting of linear terms into well-formed chains.

use std::collections::BTreeMap;

use crate::error::DcfgError;
use crate::tuple_algebra::StringTuple;

/// Declared ranks of the nonterminals a term may mention.
pub type RankEnv = BTreeMap<String, usize>;

/// A term over string-tuple leaves and nonterminal leaves, built with
/// concatenation and intercalation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Term {
    Tuple(StringTuple),
    Nonterm(String),
    Concat(Box<Term>, Box<Term>),
    /// `Intercal(j, left, right)` is `left (.)_j right`.
    Intercal(usize, Box<Term>, Box<Term>),
}

impl Term {
    pub fn tuple(u: StringTuple) -> Term {
        Term::Tuple(u)
    }

    pub fn nonterm(name: impl Into<String>) -> Term {
        Term::Nonterm(name.into())
    }

    pub fn concat(left: Term, right: Term) -> Term {
        Term::Concat(Box::new(left), Box::new(right))
    }

    pub fn intercal(j: usize, left: Term, right: Term) -> Term {
        Term::Intercal(j, Box::new(left), Box::new(right))
    }

    /// Structural rank: leaves carry their own rank, concatenation adds
    /// ranks, intercalation adds ranks minus one.
    pub fn rank(&self, ranks: &RankEnv) -> Result<usize, DcfgError> {
        match self {
            Term::Tuple(u) => Ok(u.rank()),
            Term::Nonterm(name) => ranks
                .get(name)
                .copied()
                .ok_or_else(|| DcfgError::UnknownNonterminal(name.clone())),
            Term::Concat(a, b) => Ok(a.rank(ranks)? + b.rank(ranks)?),
            Term::Intercal(_, a, b) => Ok(a.rank(ranks)? + b.rank(ranks)? - 1),
        }
    }

    /// Number of nonterminal leaf occurrences.
    pub fn nonterm_count(&self) -> usize {
        match self {
            Term::Tuple(_) => 0,
            Term::Nonterm(_) => 1,
            Term::Concat(a, b) | Term::Intercal(_, a, b) => {
                a.nonterm_count() + b.nonterm_count()
            }
        }
    }

    /// All nonterminal names occurring in the term, leftmost first.
    pub fn nonterms(&self) -> Vec<&str> {
        let mut out = Vec::new();
        self.collect_nonterms(&mut out);
        out
    }

    fn collect_nonterms<'a>(&'a self, out: &mut Vec<&'a str>) {
        match self {
            Term::Tuple(_) => {}
            Term::Nonterm(name) => out.push(name),
            Term::Concat(a, b) | Term::Intercal(_, a, b) => {
                a.collect_nonterms(out);
                b.collect_nonterms(out);
            }
        }
    }

    /// At most one nonterminal occurrence.
    pub fn is_linear(&self) -> bool {
        self.nonterm_count() <= 1
    }

    pub fn is_ground(&self) -> bool {
        self.nonterm_count() == 0
    }

    /// Checks the k-correctness constraints on every node, reporting the
    /// first violation in leftmost-innermost (post-order) traversal.
    pub fn check_k_correct(&self, k: usize, ranks: &RankEnv) -> Result<(), KViolation> {
        self.check_k_rec(k, ranks, &mut Vec::new())?;
        Ok(())
    }

    fn check_k_rec(
        &self,
        k: usize,
        ranks: &RankEnv,
        path: &mut Vec<usize>,
    ) -> Result<usize, KViolation> {
        let violation = |path: &[usize], reason: String| KViolation {
            path: path.to_vec(),
            reason,
        };
        match self {
            Term::Tuple(u) => {
                if u.rank() > k {
                    return Err(violation(path, format!("tuple leaf rank {} exceeds k = {k}", u.rank())));
                }
                Ok(u.rank())
            }
            Term::Nonterm(name) => match ranks.get(name) {
                Some(&r) if r <= k => Ok(r),
                Some(&r) => Err(violation(path, format!("nonterminal {name} has rank {r} > k = {k}"))),
                None => Err(violation(path, format!("unknown nonterminal {name}"))),
            },
            Term::Concat(a, b) => {
                path.push(0);
                let ra = a.check_k_rec(k, ranks, path)?;
                path.pop();
                path.push(1);
                let rb = b.check_k_rec(k, ranks, path)?;
                path.pop();
                if ra + rb > k {
                    return Err(violation(path, format!("concatenation rank {} exceeds k = {k}", ra + rb)));
                }
                Ok(ra + rb)
            }
            Term::Intercal(j, a, b) => {
                path.push(0);
                let ra = a.check_k_rec(k, ranks, path)?;
                path.pop();
                path.push(1);
                let rb = b.check_k_rec(k, ranks, path)?;
                path.pop();
                if *j < 1 || *j > k {
                    return Err(violation(path, format!("intercalation index {j} outside [1, {k}]")));
                }
                if *j > ra {
                    return Err(violation(path, format!("intercalation index {j} exceeds left rank {ra}")));
                }
                if ra + rb > k + 1 {
                    return Err(violation(path, format!("intercalation rank sum {} exceeds k + 1 = {}", ra + rb, k + 1)));
                }
                Ok(ra + rb - 1)
            }
        }
    }

    /// Homomorphic evaluation; every nonterminal leaf must be bound to a
    /// tuple of its declared rank.
    pub fn evaluate(
        &self,
        bindings: &BTreeMap<String, StringTuple>,
        ranks: &RankEnv,
    ) -> Result<StringTuple, DcfgError> {
        match self {
            Term::Tuple(u) => Ok(u.clone()),
            Term::Nonterm(name) => {
                let value = bindings
                    .get(name)
                    .ok_or_else(|| DcfgError::UnboundNonterminal(name.clone()))?;
                if let Some(&declared) = ranks.get(name) {
                    if value.rank() != declared {
                        return Err(DcfgError::RankMismatch {
                            name: name.clone(),
                            expected: declared,
                            got: value.rank(),
                        });
                    }
                }
                Ok(value.clone())
            }
            Term::Concat(a, b) => Ok(a.evaluate(bindings, ranks)?.concat(&b.evaluate(bindings, ranks)?)),
            Term::Intercal(j, a, b) => {
                a.evaluate(bindings, ranks)?.intercalate(*j, &b.evaluate(bindings, ranks)?)
            }
        }
    }

    /// Evaluation of a ground term.
    pub fn evaluate_ground(&self) -> Result<StringTuple, DcfgError> {
        self.evaluate(&BTreeMap::new(), &RankEnv::new())
    }
}

/// A k-correctness violation: the path of child indices from the root to
/// the offending node, plus a human-readable reason.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KViolation {
    pub path: Vec<usize>,
    pub reason: String,
}

impl std::fmt::Display for KViolation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.path.is_empty() {
            write!(f, "at root: {}", self.reason)
        } else {
            let path: Vec<String> = self.path.iter().map(|i| i.to_string()).collect();
            write!(f, "at node {}: {}", path.join("."), self.reason)
        }
    }
}

/// The base of a well-formed chain: a nonterminal or a tuple of length
/// at most one.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ChainBase {
    Nonterm(String),
    Tuple(StringTuple),
}

/// One unary wrapping step of a well-formed chain.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ChainStep {
    /// `u . x` with `|u| <= 1`, `u` not the empty word.
    Prepend(StringTuple),
    /// `x . u` with `|u| <= 1`, `u` not the empty word.
    Append(StringTuple),
    /// `x (.)_j u` with `|u| <= 1`.
    Intercal(usize, StringTuple),
}

/// A linear term factored as a base leaf plus a sequence of unary
/// wrapping steps, replayed innermost first.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WellFormedChain {
    pub base: ChainBase,
    pub steps: Vec<ChainStep>,
}

impl WellFormedChain {
    /// Rebuilds the chain as a term.
    pub fn replay(&self) -> Term {
        let mut term = match &self.base {
            ChainBase::Nonterm(name) => Term::nonterm(name.clone()),
            ChainBase::Tuple(u) => Term::tuple(u.clone()),
        };
        for step in &self.steps {
            term = match step {
                ChainStep::Prepend(u) => Term::concat(Term::tuple(u.clone()), term),
                ChainStep::Append(u) => Term::concat(term, Term::tuple(u.clone())),
                ChainStep::Intercal(j, u) => Term::intercal(*j, term, Term::tuple(u.clone())),
            };
        }
        term
    }

    fn base_rank(&self, ranks: &RankEnv) -> Result<usize, DcfgError> {
        match &self.base {
            ChainBase::Nonterm(name) => ranks
                .get(name)
                .copied()
                .ok_or_else(|| DcfgError::UnknownNonterminal(name.clone())),
            ChainBase::Tuple(u) => Ok(u.rank()),
        }
    }

    /// Rank of the value after each prefix of the steps; entry 0 is the
    /// base rank, the last entry the rank of the whole chain.
    pub fn rank_profile(&self, ranks: &RankEnv) -> Result<Vec<usize>, DcfgError> {
        let mut profile = vec![self.base_rank(ranks)?];
        for step in &self.steps {
            let r = *profile.last().unwrap();
            let next = match step {
                ChainStep::Prepend(u) | ChainStep::Append(u) => r + u.rank(),
                ChainStep::Intercal(_, u) => r + u.rank() - 1,
            };
            profile.push(next);
        }
        Ok(profile)
    }
}

/// Rewrites a linear k-correct term into a well-formed chain that
/// evaluates to the same tuple under every binding of its nonterminal.
///
/// Ground siblings along the path to the nonterminal are constant-folded
/// and re-emitted as sequences of length-at-most-one steps. Intercalation
/// steps are pushed toward the base past prepend/append steps where the
/// basic term equivalences allow, so the emitted chain lists them
/// innermost first.
pub fn flatten_linear_term(
    term: &Term,
    k: usize,
    ranks: &RankEnv,
) -> Result<WellFormedChain, DcfgError> {
    if !term.is_linear() {
        return Err(DcfgError::NotLinear);
    }
    term.check_k_correct(k, ranks)
        .map_err(|v| DcfgError::NotKCorrect { k, reason: v.to_string() })?;
    flatten_rec(term, ranks)
}

fn flatten_rec(term: &Term, ranks: &RankEnv) -> Result<WellFormedChain, DcfgError> {
    if term.is_ground() {
        return Ok(ground_chain(term.evaluate_ground()?));
    }
    match term {
        Term::Tuple(_) => unreachable!("ground handled above"),
        Term::Nonterm(name) => Ok(WellFormedChain {
            base: ChainBase::Nonterm(name.clone()),
            steps: Vec::new(),
        }),
        Term::Concat(a, b) => {
            if a.nonterm_count() == 1 {
                let mut chain = flatten_rec(a, ranks)?;
                push_appends(&mut chain, &b.evaluate_ground()?);
                Ok(chain)
            } else {
                let mut chain = flatten_rec(b, ranks)?;
                push_prepends(&mut chain, &a.evaluate_ground()?);
                Ok(chain)
            }
        }
        Term::Intercal(j, a, b) => {
            if b.nonterm_count() == 1 {
                // (u_0, ..., u_l) (.)_j alpha  ~  (u_0, ..., u_{j-1}) alpha (u_j, ..., u_l)
                let u = a.evaluate_ground()?;
                let comps = u.into_components();
                let prefix = StringTuple::new(comps[..*j].to_vec());
                let suffix = StringTuple::new(comps[*j..].to_vec());
                let mut chain = flatten_rec(b, ranks)?;
                push_prepends(&mut chain, &prefix);
                push_appends(&mut chain, &suffix);
                Ok(chain)
            } else {
                let u = b.evaluate_ground()?;
                let mut chain = flatten_rec(a, ranks)?;
                insert_intercal_group(&mut chain, *j, &u, ranks)?;
                Ok(chain)
            }
        }
    }
}

/// A ground tuple as a chain: a bare base when the value is short,
/// otherwise the first length-one factor plus append steps for the rest.
fn ground_chain(u: StringTuple) -> WellFormedChain {
    if u.len() <= 1 {
        return WellFormedChain { base: ChainBase::Tuple(u), steps: Vec::new() };
    }
    let factors = u.factors();
    let mut iter = factors.into_iter();
    let base = iter.next().unwrap();
    WellFormedChain {
        base: ChainBase::Tuple(base),
        steps: iter.map(ChainStep::Append).collect(),
    }
}

fn push_appends(chain: &mut WellFormedChain, u: &StringTuple) {
    for f in u.factors() {
        chain.steps.push(ChainStep::Append(f));
    }
}

fn push_prepends(chain: &mut WellFormedChain, u: &StringTuple) {
    for f in u.factors().into_iter().rev() {
        chain.steps.push(ChainStep::Prepend(f));
    }
}

/// Emits the steps realizing `x (.)_j u` for a ground `u` of arbitrary
/// length, as a sequence of intercalations with tuples of length at most
/// one, then slides the group toward the base past prepend/append steps
/// where the commutation equivalences apply.
fn insert_intercal_group(
    chain: &mut WellFormedChain,
    j: usize,
    u: &StringTuple,
    ranks: &RankEnv,
) -> Result<(), DcfgError> {
    if u.rank() == 1 && u.len() == 0 {
        // x (.)_j (eps, eps) ~ x
        return Ok(());
    }
    let profile = chain.rank_profile(ranks)?;
    let mut pos = chain.steps.len();
    let mut j = j;
    while pos > 0 {
        match &chain.steps[pos - 1] {
            // (x . v) (.)_j u ~ (x (.)_j u) . v   when j <= rk(x)
            ChainStep::Append(_) if j <= profile[pos - 1] => pos -= 1,
            // (v . x) (.)_j u ~ v . (x (.)_{j - rk(v)} u)   when j > rk(v)
            ChainStep::Prepend(v) if j > v.rank() => {
                j -= v.rank();
                pos -= 1;
            }
            _ => break,
        }
    }
    let group = intercal_steps(j, u);
    chain.steps.splice(pos..pos, group);
    Ok(())
}

/// Steps realizing `x (.)_j u` on top of the current value, for ground
/// `u` of rank `m`: open the gap with the all-empty tuple of rank `m`
/// where needed, then write the symbols of each component next to the
/// appropriate gap one at a time.
fn intercal_steps(j: usize, u: &StringTuple) -> Vec<ChainStep> {
    let m = u.rank();
    let comps = u.components();
    let mut steps = Vec::new();
    if m == 0 {
        // Filling the gap with a plain string closes it; all symbols but
        // the last are written while the gap is still open.
        let syms = &comps[0];
        match syms.split_last() {
            None => steps.push(ChainStep::Intercal(j, StringTuple::epsilon())),
            Some((last, init)) => {
                for s in init {
                    steps.push(ChainStep::Intercal(
                        j,
                        StringTuple::new(vec![vec![s.clone()], Vec::new()]),
                    ));
                }
                steps.push(ChainStep::Intercal(j, StringTuple::symbol(last.clone())));
            }
        }
        return steps;
    }
    if m >= 2 {
        steps.push(ChainStep::Intercal(j, StringTuple::all_eps(m)));
    }
    // u_0 extends the component left of gap j.
    for s in &comps[0] {
        steps.push(ChainStep::Intercal(j, StringTuple::new(vec![vec![s.clone()], Vec::new()])));
    }
    // u_i (0 < i < m) becomes the component between gaps j+i-1 and j+i.
    for (i, comp) in comps.iter().enumerate().take(m).skip(1) {
        for s in comp {
            steps.push(ChainStep::Intercal(j + i, StringTuple::new(vec![vec![s.clone()], Vec::new()])));
        }
    }
    // u_m is written in front of the component right of gap j+m-1.
    for s in comps[m].iter().rev() {
        steps.push(ChainStep::Intercal(j + m - 1, StringTuple::new(vec![Vec::new(), vec![s.clone()]])));
    }
    steps
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ranks(pairs: &[(&str, usize)]) -> RankEnv {
        pairs.iter().map(|(n, r)| (n.to_string(), *r)).collect()
    }

    fn tup(components: &[&str]) -> StringTuple {
        StringTuple::new(
            components
                .iter()
                .map(|c| {
                    if c.is_empty() {
                        Vec::new()
                    } else {
                        c.split(' ').map(str::to_string).collect()
                    }
                })
                .collect(),
        )
    }

    #[test]
    fn rank_of_leaves_and_nodes() {
        let env = ranks(&[("B", 1), ("C", 1), ("T", 1)]);
        assert_eq!(Term::tuple(tup(&["a", "b"])).rank(&env).unwrap(), 1);
        assert_eq!(
            Term::concat(Term::nonterm("B"), Term::nonterm("C")).rank(&env).unwrap(),
            2
        );
        assert_eq!(
            Term::intercal(1, Term::nonterm("T"), Term::tuple(tup(&["c", "d"]))).rank(&env).unwrap(),
            1
        );
        assert!(Term::nonterm("Z").rank(&env).is_err());
    }

    #[test]
    fn k_correct_accepts_example_rule_body() {
        // T -> a0 (T (.)_1 (b0, a1)) b1 at k = 1.
        let env = ranks(&[("T", 1)]);
        let body = Term::concat(
            Term::concat(
                Term::tuple(tup(&["a0"])),
                Term::intercal(1, Term::nonterm("T"), Term::tuple(tup(&["b0", "a1"]))),
            ),
            Term::tuple(tup(&["b1"])),
        );
        assert!(body.check_k_correct(1, &env).is_ok());
    }

    #[test]
    fn k_correct_rejects_bad_index() {
        let env = ranks(&[("A", 1)]);
        let t = Term::intercal(2, Term::nonterm("A"), Term::tuple(tup(&["a"])));
        let v = t.check_k_correct(2, &env).unwrap_err();
        assert!(v.reason.contains("exceeds left rank"));
    }

    #[test]
    fn k_correct_rejects_rank_overflow() {
        let env = ranks(&[("A", 1), ("B", 1)]);
        let t = Term::concat(Term::nonterm("A"), Term::nonterm("B"));
        let v = t.check_k_correct(1, &env).unwrap_err();
        assert!(v.reason.contains("exceeds k"));
    }

    #[test]
    fn evaluate_example_body() {
        let env = ranks(&[("T", 1)]);
        let body = Term::concat(
            Term::concat(
                Term::tuple(tup(&["a0"])),
                Term::intercal(1, Term::nonterm("T"), Term::tuple(tup(&["b0", "a1"]))),
            ),
            Term::tuple(tup(&["b1"])),
        );
        let mut bindings = BTreeMap::new();
        bindings.insert("T".to_string(), StringTuple::all_eps(1));
        assert_eq!(body.evaluate(&bindings, &env).unwrap(), tup(&["a0 b0", "a1 b1"]));
    }

    #[test]
    fn evaluate_ground_leaf() {
        assert_eq!(Term::tuple(tup(&["x"])).evaluate_ground().unwrap(), tup(&["x"]));
    }

    #[test]
    fn evaluate_intercal_unit() {
        let t = Term::intercal(
            1,
            Term::tuple(StringTuple::all_eps(1)),
            Term::tuple(tup(&["w"])),
        );
        assert_eq!(t.evaluate_ground().unwrap(), tup(&["w"]));
    }

    #[test]
    fn flatten_prepend() {
        let env = ranks(&[("B", 0)]);
        let t = Term::concat(Term::tuple(tup(&["a"])), Term::nonterm("B"));
        let chain = flatten_linear_term(&t, 1, &env).unwrap();
        assert_eq!(chain.base, ChainBase::Nonterm("B".to_string()));
        assert_eq!(chain.steps, vec![ChainStep::Prepend(tup(&["a"]))]);
    }

    #[test]
    fn flatten_intercal_with_nonterm_argument() {
        let env = ranks(&[("B", 0)]);
        let t = Term::intercal(1, Term::tuple(tup(&["u0", "u1"])), Term::nonterm("B"));
        let chain = flatten_linear_term(&t, 1, &env).unwrap();
        assert_eq!(chain.base, ChainBase::Nonterm("B".to_string()));
        assert_eq!(
            chain.steps,
            vec![ChainStep::Prepend(tup(&["u0"])), ChainStep::Append(tup(&["u1"]))]
        );
    }

    #[test]
    fn flatten_pushes_intercal_inward() {
        let env = ranks(&[("B", 1)]);
        let t = Term::intercal(
            1,
            Term::concat(Term::nonterm("B"), Term::tuple(tup(&["c"]))),
            Term::tuple(tup(&["d"])),
        );
        let chain = flatten_linear_term(&t, 1, &env).unwrap();
        assert_eq!(chain.base, ChainBase::Nonterm("B".to_string()));
        assert_eq!(
            chain.steps,
            vec![ChainStep::Intercal(1, tup(&["d"])), ChainStep::Append(tup(&["c"]))]
        );
    }

    #[test]
    fn flatten_ground_folds_to_base() {
        let env = RankEnv::new();
        let t = Term::concat(
            Term::tuple(StringTuple::epsilon()),
            Term::tuple(tup(&["a"])),
        );
        let chain = flatten_linear_term(&t, 1, &env).unwrap();
        assert_eq!(chain.base, ChainBase::Tuple(tup(&["a"])));
        assert!(chain.steps.is_empty());
    }

    #[test]
    fn flatten_rejects_non_linear() {
        let env = ranks(&[("B", 0)]);
        let t = Term::concat(Term::nonterm("B"), Term::nonterm("B"));
        assert_eq!(flatten_linear_term(&t, 1, &env), Err(DcfgError::NotLinear));
    }

    #[test]
    fn flatten_replay_agrees_on_bindings() {
        let env = ranks(&[("B", 1)]);
        let t = Term::intercal(
            1,
            Term::concat(Term::nonterm("B"), Term::tuple(tup(&["c"]))),
            Term::tuple(tup(&["d"])),
        );
        let chain = flatten_linear_term(&t, 2, &env).unwrap();
        let replay = chain.replay();
        for binding in [tup(&["x", "y"]), tup(&["", ""]), tup(&["x y", ""])] {
            let mut b = BTreeMap::new();
            b.insert("B".to_string(), binding);
            assert_eq!(t.evaluate(&b, &env).unwrap(), replay.evaluate(&b, &env).unwrap());
        }
        assert!(replay.check_k_correct(2, &env).is_ok());
    }
}
