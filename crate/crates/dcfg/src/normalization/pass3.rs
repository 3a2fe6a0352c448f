//! Pass 3: removal of all-empty intercalation arguments. An argument of
//! rank 1 makes the intercalation the identity; rank 0 fuses a gap shut
//! (bridge); rank >= 2 splits a gap into several (split). Variants of a
//! nonterminal are built on demand by pushing the insertion through the
//! base's rules.
//!
//! A derived nonterminal is in general a base nonterminal plus a set of
//! pending insertions, one per gap: `L(B, P) = { apply(v, P) : v in
//! L(B) }` where `apply` splices each pending tuple into its gap. The
//! pure bridge and split variants are the single-pending all-empty
//! cases. Pendings with letter content arise when emitting a rule's
//! constant directly would require an intermediate nonterminal of rank
//! `k + 1`: the constant is then folded into the pending set instead and
//! travels down to the base's other rules. Constants that grow beyond
//! one letter on the concatenation side are re-chained through fresh
//! plain nonterminals using the factor decomposition.

use std::collections::BTreeMap;

use crate::error::DcfgError;
use crate::grammar::{Grammar, Nonterminal, Rule};
use crate::terms::Term;
use crate::tuple_algebra::StringTuple;

use super::{
    classify, eliminate_unary, prune, require_stage, Decoration, DerivedName, NfStage,
    PassOutput, ShapedRhs, Trace,
};

/// Pending insertions of a derived nonterminal: gap index -> tuple to
/// splice into that gap. Identity entries (all-empty of rank 1) are
/// never stored.
type Pending = BTreeMap<usize, StringTuple>;

/// Letters a single derived nonterminal's pending insertions may carry
/// in total. A recursion that keeps feeding letters into a gap held by
/// a maximal-rank pending set grows its pending words one letter per
/// round and would otherwise never close. Every tuple such a variant
/// derives contains its pending letters, so a variant past this horizon
/// only derives tuples longer than the horizon; it is therefore given
/// the empty language, which is exact for every comparison bound up to
/// the horizon (all oracles in this crate stay far below it).
const PENDING_LEN_HORIZON: usize = 64;

fn is_identity(w: &StringTuple) -> bool {
    w.is_all_eps() && w.rank() == 1
}

/// Applies every pending insertion to a ground tuple, highest gap first
/// so lower gap indices stay valid.
fn apply(u: &StringTuple, pending: &Pending) -> Result<StringTuple, DcfgError> {
    let mut out = u.clone();
    for (g, w) in pending.iter().rev() {
        out = out.intercalate(*g, w)?;
    }
    Ok(out)
}

struct Ctx {
    k: usize,
    nonterminals: Vec<Nonterminal>,
    rules: Vec<Rule>,
    /// (base, pendings) -> derived nonterminal name.
    names: BTreeMap<(String, Vec<(usize, StringTuple)>), String>,
    /// derived name -> (base, pendings); bases are always plain.
    info: BTreeMap<String, (String, Pending)>,
    /// derived name -> how many of the base's rules were pushed already.
    processed: BTreeMap<String, usize>,
    derived: Vec<(String, DerivedName)>,
    trace: Trace,
    aux_counter: usize,
    budget: usize,
}

impl Ctx {
    fn rank_of(&self, name: &str) -> usize {
        self.nonterminals
            .iter()
            .find(|n| n.name == name)
            .map(|n| n.rank)
            .unwrap_or_else(|| panic!("unknown nonterminal {name}"))
    }

    fn fresh(&self, want: String) -> String {
        let mut name = want;
        while self.nonterminals.iter().any(|n| n.name == name) {
            name.push('\'');
        }
        name
    }

    fn add_rule(&mut self, lhs: String, rhs: Term) {
        let lhs_rank = self.rank_of(&lhs);
        let rule = Rule { lhs, rhs };
        self.trace.added(lhs_rank, &rule);
        self.rules.push(rule);
    }

    fn spend(&mut self) -> Result<(), DcfgError> {
        self.budget = self.budget.checked_sub(1).ok_or_else(|| {
            DcfgError::Budget("bridge/split construction exceeded its work budget".to_string())
        })?;
        Ok(())
    }

    /// Name standing for the base with the given pending insertions;
    /// creates the nonterminal and queues its rule generation on first
    /// use. A derived base is flattened by composing the pending sets.
    fn derived_ref(&mut self, base: &str, mut pending: Pending) -> Result<String, DcfgError> {
        pending.retain(|_, w| !is_identity(w));
        if pending.is_empty() {
            return Ok(base.to_string());
        }
        if let Some((inner_base, inner_pending)) = self.info.get(base).cloned() {
            let merged =
                compose(self.rank_of(&inner_base), &inner_pending, &pending)?;
            return self.derived_ref(&inner_base, merged);
        }
        let key: (String, Vec<(usize, StringTuple)>) = (
            base.to_string(),
            pending.iter().map(|(g, w)| (*g, w.clone())).collect(),
        );
        if let Some(name) = self.names.get(&key) {
            return Ok(name.clone());
        }
        let rank = self.rank_of(base) as isize
            + pending.values().map(|w| w.rank() as isize - 1).sum::<isize>();
        assert!(
            (0..=self.k as isize).contains(&rank),
            "derived nonterminal for {base} would have rank {rank}"
        );
        let rank = rank as usize;
        // A recursion that keeps feeding letters into a pending gap grows
        // the pending words round after round. Such a variant only derives
        // tuples longer than the accumulated letter count, so past the
        // horizon it is closed off as an empty (rule-less) nonterminal.
        if pending.values().map(StringTuple::len).sum::<usize>() > PENDING_LEN_HORIZON {
            let name = self.fresh_aux(&format!("{base}^cut"), rank);
            self.trace.note(format!(
                "{name}: pending insertions for {base} exceed {PENDING_LEN_HORIZON} \
                 letters; the variant derives no tuple shorter than that, so it \
                 is left without rules"
            ));
            self.names.insert(key, name.clone());
            return Ok(name);
        }
        let decoration = match (pending.len(), pending.iter().next()) {
            (1, Some((j, w))) if w.is_all_eps() && w.rank() == 0 => Decoration::Bridge(*j),
            (1, Some((j, w))) if w.is_all_eps() => Decoration::Split(*j, w.rank()),
            _ => Decoration::Insert(key.1.clone()),
        };
        let dn = DerivedName { base: base.to_string(), decoration };
        let name = self.fresh(dn.render());
        self.trace.note(format!("new {name} (rank {rank}) for {base} with pendings"));
        self.nonterminals.push(Nonterminal { name: name.clone(), rank });
        self.names.insert(key, name.clone());
        self.info.insert(name.clone(), (base.to_string(), pending));
        self.processed.insert(name.clone(), 0);
        self.derived.push((name.clone(), dn));
        Ok(name)
    }

    fn fresh_aux(&mut self, prefix: &str, rank: usize) -> String {
        self.aux_counter += 1;
        let name = self.fresh(format!("{prefix}_{}", self.aux_counter));
        self.nonterminals.push(Nonterminal { name: name.clone(), rank });
        name
    }

    /// Builds `factors[0] . (factors[1] . (... . innermost))` as chained
    /// single-step rules; returns the outermost right side.
    fn prepend_onto(
        &mut self,
        prefix: &str,
        factors: &[StringTuple],
        innermost: Term,
        innermost_rank: usize,
    ) -> Term {
        if factors.is_empty() {
            return innermost;
        }
        let mut cur = innermost;
        let mut rank = innermost_rank;
        for f in factors.iter().skip(1).rev() {
            rank += f.rank();
            let name = self.fresh_aux(prefix, rank);
            self.add_rule(name.clone(), Term::concat(Term::tuple(f.clone()), cur));
            cur = Term::nonterm(name);
        }
        Term::concat(Term::tuple(factors[0].clone()), cur)
    }

    /// Builds `((innermost . factors[0]) . factors[1]) ...` as chained
    /// single-step rules; returns the outermost right side.
    fn append_onto(
        &mut self,
        prefix: &str,
        innermost: Term,
        innermost_rank: usize,
        factors: &[StringTuple],
    ) -> Term {
        if factors.is_empty() {
            return innermost;
        }
        let mut cur = innermost;
        let mut rank = innermost_rank;
        for f in &factors[..factors.len() - 1] {
            rank += f.rank();
            let name = self.fresh_aux(prefix, rank);
            self.add_rule(name.clone(), Term::concat(cur, Term::tuple(f.clone())));
            cur = Term::nonterm(name);
        }
        Term::concat(cur, Term::tuple(factors.last().unwrap().clone()))
    }

    /// A right side deriving exactly the ground tuple `u`, chained if it
    /// has more than one letter.
    fn ground_rhs(&mut self, prefix: &str, u: StringTuple) -> Term {
        if u.len() <= 1 {
            return Term::tuple(u);
        }
        let factors = u.factors();
        let last_letter = factors.iter().rposition(|f| f.len() == 1).expect("has letters");
        let mut core = factors[last_letter].clone();
        for f in &factors[last_letter + 1..] {
            core = core.concat(f);
        }
        let core_rank = core.rank();
        let name = self.fresh_aux(prefix, core_rank);
        self.add_rule(name.clone(), Term::tuple(core));
        self.prepend_onto(prefix, &factors[..last_letter], Term::nonterm(name), core_rank)
    }

    /// Pushes the pending insertions through one rule of the base,
    /// adding the resulting rule(s) for the derived nonterminal.
    fn push_one(&mut self, dname: &str, rhs: &Term, pending: &Pending) -> Result<(), DcfgError> {
        let lhs_rank = self.rank_of(dname);
        let shaped = classify(rhs).ok_or_else(|| DcfgError::WrongStage {
            expected: NfStage::NoEpsNonterm,
            reason: "rule is not a single-step rule".to_string(),
        })?;
        let body = match shaped {
            ShapedRhs::Terminal { u } => {
                let u2 = apply(u, pending)?;
                self.ground_rhs(dname, u2)
            }
            ShapedRhs::Unary { b } => Term::nonterm(self.derived_ref(b, pending.clone())?),
            ShapedRhs::Prepend { u, b } => {
                // Composite gaps: u's gaps first, then b's shifted.
                let ru = u.rank();
                let mut pu = Pending::new();
                let mut pb = Pending::new();
                for (g, w) in pending {
                    if *g <= ru {
                        pu.insert(*g, w.clone());
                    } else {
                        pb.insert(g - ru, w.clone());
                    }
                }
                let u2 = apply(u, &pu)?;
                let inner = self.derived_ref(b, pb)?;
                let inner_rank = self.rank_of(&inner);
                if u2.is_epsilon() {
                    Term::nonterm(inner)
                } else if u2.len() <= 1 {
                    Term::concat(Term::tuple(u2), Term::nonterm(inner))
                } else {
                    self.prepend_onto(dname, &u2.factors(), Term::nonterm(inner), inner_rank)
                }
            }
            ShapedRhs::Append { b, u } => {
                let rb = self.rank_of(b);
                let mut pb = Pending::new();
                let mut pu = Pending::new();
                for (g, w) in pending {
                    if *g <= rb {
                        pb.insert(*g, w.clone());
                    } else {
                        pu.insert(g - rb, w.clone());
                    }
                }
                let u2 = apply(u, &pu)?;
                let inner = self.derived_ref(b, pb)?;
                let inner_rank = self.rank_of(&inner);
                if u2.is_epsilon() {
                    Term::nonterm(inner)
                } else if u2.len() <= 1 {
                    Term::concat(Term::nonterm(inner), Term::tuple(u2))
                } else {
                    self.append_onto(dname, Term::nonterm(inner), inner_rank, &u2.factors())
                }
            }
            ShapedRhs::Intercal { b, j: l, u } => {
                // Composite gaps: b's gaps below l, then u's gaps, then
                // b's remaining gaps shifted by rank(u) - 1.
                let ru = u.rank();
                let mut pb = Pending::new();
                let mut pu = Pending::new();
                for (g, w) in pending {
                    if *g < l {
                        pb.insert(*g, w.clone());
                    } else if *g < l + ru {
                        pu.insert(g - l + 1, w.clone());
                    } else {
                        pb.insert(g - ru + 1, w.clone());
                    }
                }
                let u2 = apply(u, &pu)?;
                if is_identity(&u2) {
                    Term::nonterm(self.derived_ref(b, pb)?)
                } else if u2.is_all_eps()
                    || u2.len() > 1
                    || (u2.rank() == 0 && lhs_rank == self.k)
                {
                    // Emitting u2 here would either reintroduce an
                    // all-empty argument, break the single-letter rule
                    // shape, or require an inner nonterminal of rank
                    // k + 1; fold it into the pending set instead.
                    pb.insert(l, u2);
                    Term::nonterm(self.derived_ref(b, pb)?)
                } else {
                    // The position of b's gap l after the insertions
                    // pending below it.
                    let shift: isize = pb
                        .iter()
                        .filter(|(g, _)| **g < l)
                        .map(|(_, w)| w.rank() as isize - 1)
                        .sum();
                    let lp = (l as isize + shift) as usize;
                    let inner = self.derived_ref(b, pb)?;
                    Term::intercal(lp, Term::nonterm(inner), Term::tuple(u2))
                }
            }
        };
        self.add_rule(dname.to_string(), body);
        Ok(())
    }
}

/// Translates `outer` pendings (over the gaps of `(base, inner)`) into
/// pendings over the base's own gaps, folding insertions that land
/// inside an inner pending tuple into that tuple.
fn compose(base_rank: usize, inner: &Pending, outer: &Pending) -> Result<Pending, DcfgError> {
    enum Slot {
        BaseGap(usize),
        Inside(usize, usize),
    }
    let mut slots = Vec::new();
    for i in 1..=base_rank {
        match inner.get(&i) {
            Some(w) => {
                for q in 1..=w.rank() {
                    slots.push(Slot::Inside(i, q));
                }
            }
            None => slots.push(Slot::BaseGap(i)),
        }
    }
    let mut out = inner.clone();
    let mut folds: BTreeMap<usize, Vec<(usize, StringTuple)>> = BTreeMap::new();
    for (g, w) in outer {
        match slots[*g - 1] {
            Slot::BaseGap(i) => {
                out.insert(i, w.clone());
            }
            Slot::Inside(i, q) => folds.entry(i).or_default().push((q, w.clone())),
        }
    }
    for (i, mut items) in folds {
        items.sort_by(|a, b| b.0.cmp(&a.0));
        let mut t = out[&i].clone();
        for (q, w) in items {
            t = t.intercalate(q, &w)?;
        }
        out.insert(i, t);
    }
    Ok(out)
}

pub fn pass3_raw(grammar: &Grammar) -> Result<PassOutput, DcfgError> {
    grammar.ensure_valid()?;
    require_stage(grammar, NfStage::NoEpsNonterm)?;
    let mut ctx = Ctx {
        k: grammar.k,
        nonterminals: grammar.nonterminals.clone(),
        rules: grammar.rules.clone(),
        names: BTreeMap::new(),
        info: BTreeMap::new(),
        processed: BTreeMap::new(),
        derived: Vec::new(),
        trace: Trace::default(),
        aux_counter: 0,
        budget: 10_000,
    };
    loop {
        let mut changed = false;
        // Replace every all-empty intercalation argument in place.
        for idx in 0..ctx.rules.len() {
            let Some(ShapedRhs::Intercal { b, j, u }) = classify(&ctx.rules[idx].rhs) else {
                continue;
            };
            if !u.is_all_eps() {
                continue;
            }
            let (b, j, u) = (b.to_string(), j, u.clone());
            let lhs_rank = ctx.rank_of(&ctx.rules[idx].lhs);
            let old = ctx.rules[idx].clone();
            let name = ctx.derived_ref(&b, [(j, u)].into())?;
            ctx.trace.removed(lhs_rank, &old);
            ctx.rules[idx].rhs = Term::nonterm(name);
            ctx.trace.added(lhs_rank, &ctx.rules[idx]);
            changed = true;
            ctx.spend()?;
        }
        // Push newly visible base rules through every derived
        // nonterminal's pending insertions.
        let mut by_lhs: BTreeMap<String, Vec<Term>> = BTreeMap::new();
        for rule in &ctx.rules {
            by_lhs.entry(rule.lhs.clone()).or_default().push(rule.rhs.clone());
        }
        let derived_names: Vec<String> = ctx.info.keys().cloned().collect();
        for dname in derived_names {
            let (base, pending) = ctx.info[&dname].clone();
            let base_rules = by_lhs.get(&base).map(Vec::as_slice).unwrap_or(&[]);
            let done = ctx.processed[&dname];
            if base_rules.len() > done {
                for rhs in &base_rules[done..] {
                    ctx.push_one(&dname, rhs, &pending)?;
                    ctx.spend()?;
                }
                ctx.processed.insert(dname, base_rules.len());
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
    Ok(PassOutput {
        grammar: Grammar {
            nonterminals: ctx.nonterminals,
            rules: ctx.rules,
            ..grammar.clone()
        },
        derived: ctx.derived,
        trace: ctx.trace,
    })
}

/// Pass 3 proper: afterwards every intercalation argument has length 1.
pub fn pass3_bridges_splits(grammar: &Grammar) -> Result<Grammar, DcfgError> {
    let raw = pass3_raw(grammar)?;
    Ok(prune(&eliminate_unary(&raw.grammar)))
}
