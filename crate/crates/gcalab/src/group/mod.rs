//! Finite groups given by explicit Cayley tables.
//!
//! Elements are indices `0..n` and the identity is always `0`. Every
//! operation is pure and deterministic.

mod endo;
mod factor;
pub mod library;

use std::fmt;
use std::sync::{Arc, OnceLock};

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use endo::{
    are_isomorphic, enumerate_endomorphisms, fully_invariant_subgroups, is_fully_invariant,
};
pub use factor::{
    all_subgroups, invariantly_simple_factorization, is_simple, minimal_normal_subgroups, GroupKind,
    SimpleFactorization,
};

pub type Elem = u32;

#[derive(Debug, Clone, PartialEq, Eq, Error, Serialize, Deserialize)]
pub enum GroupError {
    #[error("malformed table: {0}")]
    Malformed(String),
    #[error("table not closed: entry ({row},{col}) = {value} is outside 0..{order}")]
    NotClosed { row: usize, col: usize, value: usize, order: usize },
    #[error("not associative: ({a}*{b})*{c} != {a}*({b}*{c})")]
    NotAssociative { a: usize, b: usize, c: usize },
    #[error("no two-sided identity element")]
    NoIdentity,
    #[error("element {0} has no two-sided inverse")]
    NoInverse(usize),
    #[error("subgroup is not normal: conjugating {member} by {by} leaves the subgroup")]
    NotNormal { member: Elem, by: Elem },
    #[error("budget exceeded: order {order} exceeds budget {budget}")]
    BudgetExceeded { order: usize, budget: usize },
    #[error("invalid permutation generators: {0}")]
    BadPermutation(String),
}

/// Size limits for the exhaustive searches.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Budgets {
    /// Largest order for which `End(G)` is enumerated.
    pub endo: usize,
    /// Largest order for which all subgroups are enumerated.
    pub subgroup: usize,
    /// Largest order for isomorphism search.
    pub iso: usize,
    /// Largest `q^(2ρ)` accepted by the de Bruijn oracle.
    pub oracle: usize,
    /// Largest number of power-rule compositions for sensitivity detection.
    pub power: usize,
}

impl Default for Budgets {
    fn default() -> Self {
        Budgets { endo: 256, subgroup: 256, iso: 4096, oracle: 65536, power: 256 }
    }
}

/// A finite group as an `n×n` multiplication table.
#[derive(Clone)]
pub struct FiniteGroup {
    name: Option<String>,
    n: usize,
    table: Vec<Elem>,
    inv: Vec<Elem>,
    names: Option<Vec<String>>,
    factors: Option<Vec<Arc<FiniteGroup>>>,
    gens: OnceLock<Vec<Elem>>,
}

impl PartialEq for FiniteGroup {
    fn eq(&self, other: &Self) -> bool {
        self.n == other.n && self.table == other.table
    }
}

impl Eq for FiniteGroup {}

impl fmt::Debug for FiniteGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FiniteGroup")
            .field("name", &self.name)
            .field("order", &self.n)
            .finish()
    }
}

/// Validates a Cayley table and returns the group with its identity moved to index 0.
pub fn validate_group(
    table: &[Vec<usize>],
    names: Option<Vec<String>>,
) -> Result<FiniteGroup, GroupError> {
    let n = table.len();
    if n == 0 {
        return Err(GroupError::Malformed("empty table".into()));
    }
    for (r, row) in table.iter().enumerate() {
        if row.len() != n {
            return Err(GroupError::Malformed(format!(
                "row {r} has length {} but the table has {n} rows",
                row.len()
            )));
        }
    }
    if let Some(ns) = &names {
        if ns.len() != n {
            return Err(GroupError::Malformed(format!(
                "{} names given for {n} elements",
                ns.len()
            )));
        }
    }
    for (r, row) in table.iter().enumerate() {
        for (c, &v) in row.iter().enumerate() {
            if v >= n {
                return Err(GroupError::NotClosed { row: r, col: c, value: v, order: n });
            }
        }
    }
    let e = (0..n)
        .find(|&e| (0..n).all(|x| table[e][x] == x && table[x][e] == x))
        .ok_or(GroupError::NoIdentity)?;
    for (a, row) in table.iter().enumerate() {
        if !(0..n).any(|b| row[b] == e && table[b][a] == e) {
            return Err(GroupError::NoInverse(a));
        }
    }

    // Swap e and 0 so the identity is element 0.
    let relabel = |x: usize| -> usize {
        if x == e {
            0
        } else if x == 0 {
            e
        } else {
            x
        }
    };
    let mut flat = vec![0 as Elem; n * n];
    for a in 0..n {
        for b in 0..n {
            flat[relabel(a) * n + relabel(b)] = relabel(table[a][b]) as Elem;
        }
    }
    let names = names.map(|mut ns| {
        ns.swap(0, e);
        ns
    });
    let g = FiniteGroup::from_parts(None, n, flat, names);
    g.check_associative().map_err(|(a, b, c)| GroupError::NotAssociative {
        a: relabel(a),
        b: relabel(b),
        c: relabel(c),
    })?;
    Ok(g)
}

impl FiniteGroup {
    /// Builds a group from a flat table already known to be a group table with identity 0.
    pub(crate) fn from_parts(
        name: Option<String>,
        n: usize,
        table: Vec<Elem>,
        names: Option<Vec<String>>,
    ) -> FiniteGroup {
        let mut inv = vec![0; n];
        for a in 0..n {
            let row = &table[a * n..(a + 1) * n];
            inv[a] = row.iter().position(|&x| x == 0).unwrap_or(0) as Elem;
        }
        FiniteGroup { name, n, table, inv, names, factors: None, gens: OnceLock::new() }
    }

    pub(crate) fn with_factors(mut self, factors: Vec<Arc<FiniteGroup>>) -> Self {
        self.factors = Some(factors);
        self
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = Some(name.into());
        self
    }

    pub fn name(&self) -> Option<&str> {
        self.name.as_deref()
    }

    pub fn names(&self) -> Option<&[String]> {
        self.names.as_deref()
    }

    /// Direct-product factors recorded by the product constructor, if any.
    pub fn factors(&self) -> Option<&[Arc<FiniteGroup>]> {
        self.factors.as_deref()
    }

    pub fn order(&self) -> usize {
        self.n
    }

    pub fn identity(&self) -> Elem {
        0
    }

    #[inline]
    pub fn mul(&self, a: Elem, b: Elem) -> Elem {
        self.table[a as usize * self.n + b as usize]
    }

    #[inline]
    pub fn inv(&self, a: Elem) -> Elem {
        self.inv[a as usize]
    }

    pub fn inverses(&self) -> &[Elem] {
        &self.inv
    }

    pub fn row(&self, a: Elem) -> &[Elem] {
        &self.table[a as usize * self.n..(a as usize + 1) * self.n]
    }

    pub fn elements(&self) -> impl Iterator<Item = Elem> {
        0..self.n as Elem
    }

    /// The table as nested rows, as written in group files.
    pub fn table_rows(&self) -> Vec<Vec<usize>> {
        (0..self.n as Elem)
            .map(|a| self.row(a).iter().map(|&x| x as usize).collect())
            .collect()
    }

    pub fn conj(&self, g: Elem, x: Elem) -> Elem {
        self.mul(self.mul(g, x), self.inv(g))
    }

    pub fn commutator(&self, a: Elem, b: Elem) -> Elem {
        self.mul(self.mul(a, b), self.mul(self.inv(a), self.inv(b)))
    }

    pub fn pow(&self, a: Elem, k: usize) -> Elem {
        let mut acc = 0;
        for _ in 0..k {
            acc = self.mul(acc, a);
        }
        acc
    }

    pub fn elem_order(&self, a: Elem) -> usize {
        let mut x = a;
        let mut k = 1;
        while x != 0 {
            x = self.mul(x, a);
            k += 1;
        }
        k
    }

    /// Sorted list of element orders.
    pub fn order_profile(&self) -> Vec<usize> {
        let mut v: Vec<usize> = self.elements().map(|a| self.elem_order(a)).collect();
        v.sort_unstable();
        v
    }

    pub fn exponent(&self) -> usize {
        self.elements().map(|a| self.elem_order(a)).fold(1, lcm)
    }

    pub fn is_abelian(&self) -> bool {
        let gens = self.generators();
        gens.iter()
            .all(|&a| gens.iter().all(|&b| self.mul(a, b) == self.mul(b, a)))
    }

    /// A small deterministic generating set: repeatedly add an element of
    /// largest order outside the current span (smallest index on ties).
    pub fn generators(&self) -> &[Elem] {
        self.gens.get_or_init(|| greedy_generators(self, &(0..self.n as Elem).collect::<Vec<_>>()))
    }

    fn check_associative(&self) -> Result<(), (usize, usize, usize)> {
        let n = self.n;
        let test: Vec<Elem> = if n <= 64 {
            self.elements().collect()
        } else {
            // Light's test: checking a right-generating set suffices.
            right_generating_set(self)
        };
        for a in 0..n as Elem {
            for &b in &test {
                let ab = self.mul(a, b);
                for c in 0..n as Elem {
                    if self.mul(ab, c) != self.mul(a, self.mul(b, c)) {
                        return Err((a as usize, b as usize, c as usize));
                    }
                }
            }
        }
        Ok(())
    }
}

fn right_generating_set(g: &FiniteGroup) -> Vec<Elem> {
    let n = g.n;
    let mut gens: Vec<Elem> = Vec::new();
    loop {
        let mut seen = vec![false; n];
        let mut stack: Vec<Elem> = Vec::new();
        for &s in &gens {
            if !seen[s as usize] {
                seen[s as usize] = true;
                stack.push(s);
            }
        }
        while let Some(x) = stack.pop() {
            for &s in &gens {
                let y = g.mul(x, s);
                if !seen[y as usize] {
                    seen[y as usize] = true;
                    stack.push(y);
                }
            }
        }
        match seen.iter().position(|&b| !b) {
            None => return gens,
            Some(x) => gens.push(x as Elem),
        }
    }
}

pub(crate) fn greedy_generators(g: &FiniteGroup, members: &[Elem]) -> Vec<Elem> {
    let orders: Vec<usize> = members.iter().map(|&a| g.elem_order(a)).collect();
    let mut gens = Vec::new();
    let mut span = vec![false; g.n];
    span[0] = true;
    let mut count = 1;
    while count < members.len() {
        let mut best: Option<(usize, Elem)> = None;
        for (i, &a) in members.iter().enumerate() {
            if !span[a as usize] && best.is_none_or(|(o, _)| orders[i] > o) {
                best = Some((orders[i], a));
            }
        }
        let (_, a) = best.expect("span is a proper subset");
        gens.push(a);
        let h = subgroup_generated(g, &gens);
        for &x in h.members() {
            span[x as usize] = true;
        }
        count = h.len();
    }
    gens
}

pub fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

pub fn lcm(a: usize, b: usize) -> usize {
    a / gcd(a, b) * b
}

/// A subgroup given by its sorted member list; the parent group is passed alongside.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Subgroup {
    members: Vec<Elem>,
}

impl Ord for Subgroup {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        (self.members.len(), &self.members).cmp(&(other.members.len(), &other.members))
    }
}

impl PartialOrd for Subgroup {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Subgroup {
    /// Wraps a member set; callers guarantee closure.
    pub(crate) fn from_members(mut members: Vec<Elem>) -> Subgroup {
        members.sort_unstable();
        members.dedup();
        Subgroup { members }
    }

    pub fn trivial() -> Subgroup {
        Subgroup { members: vec![0] }
    }

    pub fn whole(g: &FiniteGroup) -> Subgroup {
        Subgroup { members: g.elements().collect() }
    }

    /// Checks closure in `g` and wraps the set.
    pub fn new(g: &FiniteGroup, members: Vec<Elem>) -> Option<Subgroup> {
        let s = Subgroup::from_members(members);
        if s.members.first() != Some(&0) || s.members.iter().any(|&x| x as usize >= g.order()) {
            return None;
        }
        let gen = subgroup_generated(g, &s.members);
        (gen == s).then_some(s)
    }

    pub fn members(&self) -> &[Elem] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn contains(&self, x: Elem) -> bool {
        self.members.binary_search(&x).is_ok()
    }

    pub fn is_trivial(&self) -> bool {
        self.members.len() == 1
    }

    pub fn is_subset(&self, other: &Subgroup) -> bool {
        self.members.iter().all(|&x| other.contains(x))
    }

    pub fn mask(&self, n: usize) -> Vec<bool> {
        let mut m = vec![false; n];
        for &x in &self.members {
            m[x as usize] = true;
        }
        m
    }
}

/// Smallest subgroup containing `gens`.
pub fn subgroup_generated(g: &FiniteGroup, gens: &[Elem]) -> Subgroup {
    let mut seen = vec![false; g.order()];
    seen[0] = true;
    let mut members = vec![0];
    let mut i = 0;
    while i < members.len() {
        let x = members[i];
        for &s in gens {
            let y = g.mul(x, s);
            if !seen[y as usize] {
                seen[y as usize] = true;
                members.push(y);
            }
        }
        i += 1;
    }
    Subgroup::from_members(members)
}

/// Smallest normal subgroup containing `set`.
pub fn normal_closure(g: &FiniteGroup, set: &[Elem]) -> Subgroup {
    normal_closure_by(g, set, g.generators())
}

fn normal_closure_by(g: &FiniteGroup, set: &[Elem], conjugators: &[Elem]) -> Subgroup {
    let mut gens: Vec<Elem> = set.to_vec();
    loop {
        let h = subgroup_generated(g, &gens);
        let outside = h
            .members()
            .iter()
            .flat_map(|&x| conjugators.iter().map(move |&c| (x, c)))
            .map(|(x, c)| g.conj(c, x))
            .find(|&y| !h.contains(y));
        match outside {
            None => return h,
            Some(y) => gens.push(y),
        }
    }
}

pub fn is_normal(g: &FiniteGroup, h: &Subgroup) -> bool {
    normality_witness(g, h).is_none()
}

fn normality_witness(g: &FiniteGroup, h: &Subgroup) -> Option<(Elem, Elem)> {
    for &c in g.generators() {
        for &x in h.members() {
            if !h.contains(g.conj(c, x)) {
                return Some((x, c));
            }
        }
    }
    None
}

pub fn centralizer(g: &FiniteGroup, set: &[Elem]) -> Subgroup {
    let members = g
        .elements()
        .filter(|&x| set.iter().all(|&s| g.mul(x, s) == g.mul(s, x)))
        .collect();
    Subgroup::from_members(members)
}

pub fn center(g: &FiniteGroup) -> Subgroup {
    centralizer(g, g.generators())
}

pub fn commutator_subgroup(g: &FiniteGroup) -> Subgroup {
    commutator_of(g, &Subgroup::whole(g))
}

/// `[H,H]` for a subgroup `H` of `g`.
pub fn commutator_of(g: &FiniteGroup, h: &Subgroup) -> Subgroup {
    let gens = greedy_generators(g, h.members());
    let comms: Vec<Elem> = gens
        .iter()
        .flat_map(|&a| gens.iter().map(move |&b| (a, b)))
        .map(|(a, b)| g.commutator(a, b))
        .collect();
    normal_closure_by(g, &comms, &gens)
}

/// `G = G⁽⁰⁾ ⊵ G⁽¹⁾ ⊵ …`, stopping at the first repeated term.
pub fn derived_series(g: &FiniteGroup) -> Vec<Subgroup> {
    let mut series = vec![Subgroup::whole(g)];
    loop {
        let next = commutator_of(g, series.last().unwrap());
        if &next == series.last().unwrap() {
            return series;
        }
        series.push(next);
    }
}

pub fn is_solvable(g: &FiniteGroup) -> bool {
    derived_series(g).last().is_some_and(|s| s.is_trivial())
}

/// `⟨g^k : g ∈ G⟩`.
pub fn power_subgroup(g: &FiniteGroup, k: usize) -> Subgroup {
    let powers: Vec<Elem> = g.elements().map(|a| g.pow(a, k)).collect();
    subgroup_generated(g, &powers)
}

/// A subgroup viewed as a group in its own right; element `i` is `h.members()[i]`.
pub fn subgroup_as_group(g: &FiniteGroup, h: &Subgroup) -> FiniteGroup {
    let m = h.members();
    let k = m.len();
    let mut pos = vec![u32::MAX; g.order()];
    for (i, &x) in m.iter().enumerate() {
        pos[x as usize] = i as Elem;
    }
    let mut table = Vec::with_capacity(k * k);
    for &a in m {
        for &b in m {
            table.push(pos[g.mul(a, b) as usize]);
        }
    }
    let names = g
        .names()
        .map(|ns| m.iter().map(|&x| ns[x as usize].clone()).collect());
    FiniteGroup::from_parts(None, k, table, names)
}

/// A quotient `G/N` with projection and coset representatives.
#[derive(Debug, Clone)]
pub struct QuotientData {
    pub quotient: FiniteGroup,
    /// `coset_of[g]` is the quotient element containing `g`; this is the projection map.
    pub coset_of: Vec<Elem>,
    /// Smallest element of each coset.
    pub section: Vec<Elem>,
}

impl QuotientData {
    pub fn projection(&self) -> &[Elem] {
        &self.coset_of
    }
}

pub fn quotient(g: &FiniteGroup, normal: &Subgroup) -> Result<QuotientData, GroupError> {
    if let Some((member, by)) = normality_witness(g, normal) {
        return Err(GroupError::NotNormal { member, by });
    }
    let n = g.order();
    let mut coset_of = vec![u32::MAX; n];
    let mut section = Vec::new();
    for x in 0..n as Elem {
        if coset_of[x as usize] == u32::MAX {
            let k = section.len() as Elem;
            section.push(x);
            for &h in normal.members() {
                coset_of[g.mul(x, h) as usize] = k;
            }
        }
    }
    let q = section.len();
    let mut table = Vec::with_capacity(q * q);
    for &a in &section {
        for &b in &section {
            table.push(coset_of[g.mul(a, b) as usize]);
        }
    }
    let quotient = FiniteGroup::from_parts(None, q, table, None);
    Ok(QuotientData { quotient, coset_of, section })
}

pub fn is_homomorphism(dom: &FiniteGroup, cod: &FiniteGroup, map: &[Elem]) -> bool {
    map.len() == dom.order()
        && map.iter().all(|&y| (y as usize) < cod.order())
        && dom.generators().iter().all(|&s| {
            dom.elements()
                .all(|x| map[dom.mul(x, s) as usize] == cod.mul(map[x as usize], map[s as usize]))
        })
}

pub fn image(cod: &FiniteGroup, map: &[Elem]) -> Subgroup {
    let _ = cod;
    Subgroup::from_members(map.to_vec())
}

pub fn kernel(map: &[Elem]) -> Subgroup {
    Subgroup::from_members(
        map.iter()
            .enumerate()
            .filter(|(_, &y)| y == 0)
            .map(|(x, _)| x as Elem)
            .collect(),
    )
}

/// `f(H)` as a subgroup of the codomain.
pub fn map_subgroup(map: &[Elem], h: &Subgroup) -> Subgroup {
    Subgroup::from_members(h.members().iter().map(|&x| map[x as usize]).collect())
}

/// `f⁻¹(H')` as a subgroup of the domain.
pub fn preimage(map: &[Elem], h: &Subgroup) -> Subgroup {
    Subgroup::from_members(
        map.iter()
            .enumerate()
            .filter(|(_, &y)| h.contains(y))
            .map(|(x, _)| x as Elem)
            .collect(),
    )
}

/// `(f ∘ g)(x) = f(g(x))`.
pub fn compose_maps(f: &[Elem], g: &[Elem]) -> Vec<Elem> {
    g.iter().map(|&y| f[y as usize]).collect()
}
