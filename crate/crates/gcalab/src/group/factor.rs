use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::endo::are_isomorphic;
use super::{
    commutator_subgroup, greedy_generators, normal_closure, subgroup_as_group, subgroup_generated,
    Elem, FiniteGroup, GroupError, Subgroup,
};

const ISO_BUDGET: usize = 1 << 16;

/// Structure type of a group in a decomposition.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum GroupKind {
    ElementaryAbelian { p: usize, rank: usize },
    NonAbelianSimpleProduct { simple_order: usize, m: usize },
    /// Abelian but not elementary abelian; only produced when refinement is disabled.
    Abelian { order: usize },
    Trivial,
}

impl GroupKind {
    pub fn is_abelian(&self) -> bool {
        !matches!(self, GroupKind::NonAbelianSimpleProduct { .. })
    }
}

/// An internal direct product `G = S_1 × … × S_m` of copies of one simple group.
#[derive(Debug, Clone)]
pub struct SimpleFactorization {
    pub kind: GroupKind,
    pub factors: Vec<Subgroup>,
    /// The common simple type.
    pub simple: FiniteGroup,
    /// `embeddings[t][x]` is the image in `G` of `x ∈ simple` under `simple ≅ S_t`.
    pub embeddings: Vec<Vec<Elem>>,
}

/// All subgroups of `g` in subgroup order, built as joins of cyclic subgroups.
pub fn all_subgroups(g: &FiniteGroup, budget: usize) -> Result<Vec<Subgroup>, GroupError> {
    if g.order() > budget {
        return Err(GroupError::BudgetExceeded { order: g.order(), budget });
    }
    let mut cyclic: Vec<(Subgroup, Elem)> = Vec::new();
    let mut seen: BTreeSet<Subgroup> = BTreeSet::new();
    for a in g.elements() {
        let c = subgroup_generated(g, &[a]);
        if seen.insert(c.clone()) {
            cyclic.push((c, a));
        }
    }
    let mut frontier: Vec<(Subgroup, Vec<Elem>)> =
        cyclic.iter().map(|(c, a)| (c.clone(), vec![*a])).collect();
    while !frontier.is_empty() {
        let mut next = Vec::new();
        for (h, gens) in &frontier {
            for (c, a) in &cyclic {
                if c.is_subset(h) {
                    continue;
                }
                let mut jg = gens.clone();
                jg.push(*a);
                let j = subgroup_generated(g, &jg);
                if seen.insert(j.clone()) {
                    next.push((j, jg));
                }
            }
        }
        frontier = next;
    }
    Ok(seen.into_iter().collect())
}

fn conjugacy_class_reps(g: &FiniteGroup) -> Vec<Elem> {
    let mut seen = vec![false; g.order()];
    let mut reps = Vec::new();
    for x in g.elements() {
        if seen[x as usize] {
            continue;
        }
        reps.push(x);
        seen[x as usize] = true;
        let mut stack = vec![x];
        while let Some(y) = stack.pop() {
            for &c in g.generators() {
                let z = g.conj(c, y);
                if !seen[z as usize] {
                    seen[z as usize] = true;
                    stack.push(z);
                }
            }
        }
    }
    reps
}

pub fn is_simple(g: &FiniteGroup) -> bool {
    if g.order() == 1 {
        return false;
    }
    conjugacy_class_reps(g)
        .into_iter()
        .skip(1)
        .all(|x| normal_closure(g, &[x]).len() == g.order())
}

fn elementary_abelian_basis(g: &FiniteGroup) -> Option<(usize, Vec<Elem>)> {
    let n = g.order();
    if n == 1 || !g.is_abelian() {
        return None;
    }
    let p = g.exponent();
    if !(2..p).all(|d| p % d != 0) {
        return None;
    }
    let mut basis = Vec::new();
    let mut span = Subgroup::trivial();
    for x in g.elements() {
        if !span.contains(x) {
            basis.push(x);
            span = subgroup_generated(g, &basis);
        }
    }
    Some((p, basis))
}

/// Factors `g` as a direct product of isomorphic simple groups, if possible.
pub fn invariantly_simple_factorization(g: &FiniteGroup) -> Option<SimpleFactorization> {
    if let Some((p, basis)) = elementary_abelian_basis(g) {
        let simple = super::library::cyclic(p);
        let embeddings: Vec<Vec<Elem>> = basis
            .iter()
            .map(|&b| (0..p).map(|k| g.pow(b, k)).collect())
            .collect();
        let factors = basis.iter().map(|&b| subgroup_generated(g, &[b])).collect();
        return Some(SimpleFactorization {
            kind: GroupKind::ElementaryAbelian { p, rank: basis.len() },
            factors,
            simple,
            embeddings,
        });
    }
    if g.order() == 1 || g.is_abelian() || commutator_subgroup(g).len() != g.order() {
        return None;
    }
    from_metadata(g).or_else(|| from_structure(g))
}

fn from_metadata(g: &FiniteGroup) -> Option<SimpleFactorization> {
    let fs = g.factors()?;
    let simple: FiniteGroup = (*fs[0]).clone();
    if !is_simple(&simple) || simple.is_abelian() {
        return None;
    }
    let m = fs.len();
    let mut strides = vec![1usize; m];
    for t in (0..m.saturating_sub(1)).rev() {
        strides[t] = strides[t + 1] * fs[t + 1].order();
    }
    let mut embeddings = Vec::with_capacity(m);
    for (t, f) in fs.iter().enumerate() {
        let iso = if **f == simple {
            simple.elements().collect()
        } else {
            are_isomorphic(&simple, f, ISO_BUDGET).ok()??
        };
        embeddings.push(iso.iter().map(|&x| (x as usize * strides[t]) as Elem).collect::<Vec<_>>());
    }
    let factors: Vec<Subgroup> = embeddings.iter().map(|e| Subgroup::from_members(e.clone())).collect();
    verify(g, &factors).then(|| SimpleFactorization {
        kind: GroupKind::NonAbelianSimpleProduct { simple_order: simple.order(), m },
        factors,
        simple,
        embeddings,
    })
}

/// Minimal normal subgroups, each the normal closure of one conjugacy class.
pub fn minimal_normal_subgroups(g: &FiniteGroup) -> Vec<Subgroup> {
    let mut closures: BTreeSet<Subgroup> = BTreeSet::new();
    for x in conjugacy_class_reps(g).into_iter().skip(1) {
        closures.insert(normal_closure(g, &[x]));
    }
    closures
        .iter()
        .filter(|n| !closures.iter().any(|o| o != *n && o.is_subset(n)))
        .cloned()
        .collect()
}

fn from_structure(g: &FiniteGroup) -> Option<SimpleFactorization> {
    let minimal = minimal_normal_subgroups(g);
    let simple = subgroup_as_group(g, &minimal[0]);
    if !is_simple(&simple) {
        return None;
    }
    let mut embeddings = Vec::with_capacity(minimal.len());
    for n in &minimal {
        let h = subgroup_as_group(g, n);
        let iso = are_isomorphic(&simple, &h, ISO_BUDGET).ok()??;
        embeddings.push(iso.iter().map(|&x| n.members()[x as usize]).collect::<Vec<_>>());
    }
    verify(g, &minimal).then(|| SimpleFactorization {
        kind: GroupKind::NonAbelianSimpleProduct { simple_order: simple.order(), m: minimal.len() },
        factors: minimal,
        simple,
        embeddings,
    })
}

/// Internal direct product witness: normal, pairwise commuting, orders multiply to `|G|`.
fn verify(g: &FiniteGroup, factors: &[Subgroup]) -> bool {
    let total: usize = factors.iter().map(|f| f.len()).product();
    if total != g.order() {
        return false;
    }
    let gens: Vec<Vec<Elem>> = factors.iter().map(|f| greedy_generators(g, f.members())).collect();
    for (i, f) in factors.iter().enumerate() {
        if !super::is_normal(g, f) {
            return false;
        }
        for gj in &gens[i + 1..] {
            if gens[i].iter().any(|&a| gj.iter().any(|&b| g.mul(a, b) != g.mul(b, a))) {
                return false;
            }
        }
    }
    let all: Vec<Elem> = gens.concat();
    subgroup_generated(g, &all).len() == g.order()
}
