//! Recursive splitting of a rule along fully invariant subgroups.
//!
//! Each split replaces a rule on `G` by its restriction to `H` and the
//! induced rule on `G/H`. Leaves act on invariantly simple groups.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::gca::{GcaError, LocalRule};
use crate::group::{
    are_isomorphic, center, commutator_subgroup, enumerate_endomorphisms,
    fully_invariant_subgroups, invariantly_simple_factorization, is_fully_invariant, is_simple,
    minimal_normal_subgroups, power_subgroup, quotient, subgroup_as_group, subgroup_generated,
    Budgets, Elem, FiniteGroup, GroupKind, Subgroup,
};
use crate::simple_product::{self, SimpleProductRule};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DecomposeError {
    #[error("decomposition stuck: no fully invariant subgroup found for a group of order {order}")]
    Stuck { order: usize, name: Option<String> },
    #[error("group of order {0} is not a product of non-abelian simple groups")]
    NotSimpleProduct(usize),
    #[error("replay failed: {0}")]
    Replay(String),
    #[error(transparent)]
    Gca(#[from] GcaError),
}

/// One step of a leaf's ancestry, applied to the rule produced by the previous step.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "step", rename_all = "snake_case")]
pub enum Step {
    Quotient { members: Vec<Elem>, refinement: bool },
    Restrict { members: Vec<Elem>, refinement: bool },
}

impl Step {
    pub fn is_quotient(&self) -> bool {
        matches!(self, Step::Quotient { .. })
    }
}

/// Where a splitting subgroup came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "source", rename_all = "snake_case")]
pub enum Candidate {
    Commutator,
    Center,
    Socle,
    Power { k: usize },
    Exhaustive,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Component {
    pub gca: LocalRule,
    pub kind: GroupKind,
    pub ancestry: Vec<Step>,
}

impl Component {
    /// Reached from the root through quotient steps only.
    pub fn quotient_only(&self) -> bool {
        self.ancestry.iter().all(Step::is_quotient)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Node {
    Leaf {
        order: usize,
        kind: GroupKind,
        index: usize,
    },
    Split {
        order: usize,
        members: Vec<Elem>,
        via: Candidate,
        refinement: bool,
        subgroup: Box<Node>,
        quotient: Box<Node>,
    },
}

impl Node {
    pub fn order(&self) -> usize {
        match self {
            Node::Leaf { order, .. } | Node::Split { order, .. } => *order,
        }
    }
}

#[derive(Debug, Clone)]
pub struct DecompositionTree {
    pub root: LocalRule,
    /// Leaves in tree order, subgroup branch before quotient branch.
    pub leaves: Vec<Component>,
    pub node: Node,
}

impl DecompositionTree {
    pub fn leaf_orders(&self) -> Vec<usize> {
        self.leaves.iter().map(|c| c.gca.group().order()).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DecomposeOptions {
    pub budgets: Budgets,
    /// Keep splitting abelian leaves of explicit decompositions until they are elementary abelian.
    pub refine_abelian: bool,
}

impl Default for DecomposeOptions {
    fn default() -> Self {
        DecomposeOptions { budgets: Budgets::default(), refine_abelian: true }
    }
}

struct Builder<'a> {
    opts: &'a DecomposeOptions,
    leaves: Vec<Component>,
}

impl Builder<'_> {
    fn leaf(&mut self, rule: LocalRule, kind: GroupKind, ancestry: Vec<Step>) -> Node {
        let index = self.leaves.len();
        let order = rule.group().order();
        self.leaves.push(Component { gca: rule, kind, ancestry });
        Node::Leaf { order, kind, index }
    }

    fn split(
        &mut self,
        rule: &LocalRule,
        h: &Subgroup,
        via: Candidate,
        refinement: bool,
        ancestry: &[Step],
        recurse: &mut dyn FnMut(&mut Self, LocalRule, Vec<Step>) -> Result<Node, DecomposeError>,
    ) -> Result<Node, DecomposeError> {
        let members = h.members().to_vec();
        let sub = rule.restrict(h)?;
        let (quo, _) = rule.quotient_gca(h)?;
        let mut a_sub = ancestry.to_vec();
        a_sub.push(Step::Restrict { members: members.clone(), refinement });
        let mut a_quo = ancestry.to_vec();
        a_quo.push(Step::Quotient { members: members.clone(), refinement });
        let subgroup = Box::new(recurse(self, sub, a_sub)?);
        let quotient = Box::new(recurse(self, quo, a_quo)?);
        Ok(Node::Split { order: rule.group().order(), members, via, refinement, subgroup, quotient })
    }

    fn algorithm1(&mut self, rule: LocalRule, ancestry: Vec<Step>, refinement: bool) -> Result<Node, DecomposeError> {
        let g = rule.group();
        if g.order() == 1 {
            return Ok(self.leaf(rule, GroupKind::Trivial, ancestry));
        }
        if let Some(f) = invariantly_simple_factorization(g) {
            return Ok(self.leaf(rule, f.kind, ancestry));
        }
        let Some((h, via)) = choose_subgroup(g, &self.opts.budgets) else {
            return Err(DecomposeError::Stuck { order: g.order(), name: g.name().map(str::to_owned) });
        };
        self.split(&rule.clone(), &h, via, refinement, &ancestry, &mut |b, r, a| {
            b.algorithm1(r, a, refinement)
        })
    }

    fn algorithm2(&mut self, rule: LocalRule, ancestry: Vec<Step>) -> Result<Node, DecomposeError> {
        let g = rule.group();
        if g.order() == 1 {
            return Ok(self.leaf(rule, GroupKind::Trivial, ancestry));
        }
        let d = commutator_subgroup(g);
        if d.is_trivial() {
            if let Some(f) = invariantly_simple_factorization(g) {
                return Ok(self.leaf(rule, f.kind, ancestry));
            }
            if self.opts.refine_abelian {
                return self.algorithm1(rule, ancestry, true);
            }
            let kind = GroupKind::Abelian { order: g.order() };
            return Ok(self.leaf(rule, kind, ancestry));
        }
        if d.len() == g.order() {
            return self.algorithm1(rule, ancestry, false);
        }
        self.split(&rule.clone(), &d, Candidate::Commutator, false, &ancestry, &mut |b, r, a| {
            b.algorithm2(r, a)
        })
    }
}

/// Splits along the derived series first, then finishes perfect and abelian pieces with [`algorithm1`].
pub fn explicit_decomposition(rule: &LocalRule, opts: &DecomposeOptions) -> Result<DecompositionTree, DecomposeError> {
    let mut b = Builder { opts, leaves: Vec::new() };
    let node = b.algorithm2(rule.clone(), Vec::new())?;
    Ok(DecompositionTree { root: rule.clone(), leaves: b.leaves, node })
}

/// Splits along the first fully invariant subgroup found by the candidate policy.
pub fn algorithm1(rule: &LocalRule, opts: &DecomposeOptions) -> Result<DecompositionTree, DecomposeError> {
    let mut b = Builder { opts, leaves: Vec::new() };
    let node = b.algorithm1(rule.clone(), Vec::new(), false)?;
    Ok(DecompositionTree { root: rule.clone(), leaves: b.leaves, node })
}

fn is_quasi_simple(g: &FiniteGroup) -> bool {
    let z = center(g);
    if z.is_trivial() || z.len() == g.order() || commutator_subgroup(g).len() != g.order() {
        return false;
    }
    quotient(g, &z).is_ok_and(|q| is_simple(&q.quotient))
}

/// Products of the minimal normal subgroups of each isomorphism type, largest first.
fn isotypic_socle_pieces(g: &FiniteGroup, iso_budget: usize) -> Vec<Subgroup> {
    let minimal = minimal_normal_subgroups(g);
    let groups: Vec<FiniteGroup> = minimal.iter().map(|n| subgroup_as_group(g, n)).collect();
    let mut classes: Vec<Vec<usize>> = Vec::new();
    for i in 0..minimal.len() {
        let home = classes.iter_mut().find(|c| {
            are_isomorphic(&groups[c[0]], &groups[i], iso_budget).ok().flatten().is_some()
        });
        match home {
            Some(c) => c.push(i),
            None => classes.push(vec![i]),
        }
    }
    let mut pieces: Vec<Subgroup> = classes
        .iter()
        .map(|c| {
            let gens: Vec<Elem> = c.iter().flat_map(|&i| minimal[i].members().to_vec()).collect();
            subgroup_generated(g, &gens)
        })
        .collect();
    pieces.sort_by(|a, b| b.len().cmp(&a.len()).then_with(|| a.cmp(b)));
    pieces
}

/// The candidate policy: commutator subgroup, center of a quasi-simple group,
/// isotypic socle pieces, power subgroups, then exhaustive search.
///
/// Candidates are checked against `End(G)` when its enumeration fits the
/// budget; otherwise only verbal candidates (and the quasi-simple center) are used.
pub fn choose_subgroup(g: &FiniteGroup, budgets: &Budgets) -> Option<(Subgroup, Candidate)> {
    let n = g.order();
    let endos = (n <= budgets.endo).then(|| enumerate_endomorphisms(g, budgets.endo).ok()).flatten();
    let proper = |h: &Subgroup| !h.is_trivial() && h.len() < n;
    let verified = |h: &Subgroup| endos.as_ref().is_some_and(|e| is_fully_invariant(h, e));

    let d = commutator_subgroup(g);
    if proper(&d) {
        return Some((d, Candidate::Commutator));
    }
    if is_quasi_simple(g) {
        return Some((center(g), Candidate::Center));
    }
    for piece in isotypic_socle_pieces(g, budgets.iso) {
        if proper(&piece) && verified(&piece) {
            return Some((piece, Candidate::Socle));
        }
    }
    let e = g.exponent();
    for k in (2..e).filter(|k| e % k == 0) {
        let h = power_subgroup(g, k);
        if proper(&h) {
            return Some((h, Candidate::Power { k }));
        }
    }
    if n <= budgets.endo && n <= budgets.subgroup {
        let all = fully_invariant_subgroups(g, budgets).ok()?;
        return all.into_iter().find(|h| proper(h)).map(|h| (h, Candidate::Exhaustive));
    }
    None
}

/// Rebuilds a component from the root rule by replaying its ancestry.
pub fn replay(root: &LocalRule, ancestry: &[Step]) -> Result<LocalRule, DecomposeError> {
    let mut rule = root.clone();
    for step in ancestry {
        let (Step::Quotient { members, .. } | Step::Restrict { members, .. }) = step;
        let h = Subgroup::new(rule.group(), members.clone())
            .ok_or_else(|| DecomposeError::Replay(format!("{members:?} is not a subgroup")))?;
        rule = match step {
            Step::Quotient { .. } => rule.quotient_gca(&h)?.0,
            Step::Restrict { .. } => rule.restrict(&h)?,
        };
    }
    Ok(rule)
}

/// Splits a rule on `S^m` into its minimal invariant blocks of factors.
pub fn minimal_split(rule: &LocalRule) -> Result<Vec<LocalRule>, DecomposeError> {
    let g = rule.group();
    let fact = invariantly_simple_factorization(g)
        .filter(|f| !f.kind.is_abelian())
        .ok_or(DecomposeError::NotSimpleProduct(g.order()))?;
    let wiring = SimpleProductRule::from_table_rule(rule, &fact)
        .map_err(|_| DecomposeError::NotSimpleProduct(g.order()))?;
    simple_product::minimal_split(&wiring)
        .into_iter()
        .map(|(block, _)| {
            let gens: Vec<Elem> = block.iter().flat_map(|&t| fact.factors[t].members().to_vec()).collect();
            let h = subgroup_generated(g, &gens);
            Ok(rule.restrict(&h)?)
        })
        .collect()
}
