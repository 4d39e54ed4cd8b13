//! Local rules of group cellular automata and their global maps.
//!
//! A rule of radius `ρ` is a family of endomorphisms `h_{-ρ}, …, h_ρ` with
//! pairwise commuting images; the local map is
//! `f(g_{-ρ}, …, g_ρ) = h_{-ρ}(g_{-ρ}) ⋯ h_ρ(g_ρ)` and the global map is
//! `F(c)_i = f(c_{i-ρ}, …, c_{i+ρ})`.

use std::collections::BTreeMap;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::group::{
    self, is_homomorphism, is_normal, subgroup_as_group, Elem, FiniteGroup, GroupError,
    QuotientData, Subgroup,
};

#[derive(Debug, Clone, PartialEq, Eq, Error, Serialize, Deserialize)]
pub enum GcaError {
    #[error("map at offset {0} is not an endomorphism of the group")]
    NotEndomorphism(i64),
    #[error("images of h_{i} and h_{j} do not commute: {a}*{b} != {b}*{a}")]
    ImagesDoNotCommute { i: i64, j: i64, a: Elem, b: Elem },
    #[error("offset {offset} lies outside the declared radius {radius}")]
    OffsetOutOfRange { offset: i64, radius: usize },
    #[error("subgroup is not invariant: h_{offset}({witness}) leaves it")]
    NotInvariant { offset: i64, witness: Elem },
    #[error("subgroup is not normal")]
    NotNormal,
    #[error("rules act on different groups")]
    GroupMismatch,
}

impl From<GroupError> for GcaError {
    fn from(_: GroupError) -> Self {
        GcaError::NotNormal
    }
}

/// Classification by support.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "class", rename_all = "snake_case")]
pub enum RuleClass {
    ShiftLike { offset: i64, automorphism: bool },
    IdentityLike,
    General,
}

/// A validated local rule, stored with its outer trivial offsets trimmed.
#[derive(Clone)]
pub struct LocalRule {
    group: Arc<FiniteGroup>,
    rho: usize,
    endos: Vec<Vec<Elem>>,
    declared: usize,
}

impl PartialEq for LocalRule {
    fn eq(&self, other: &Self) -> bool {
        self.rho == other.rho && self.endos == other.endos && self.group == other.group
    }
}

impl Eq for LocalRule {}

/// The global map is determined by the rule, so the two share one type.
pub type Gca = LocalRule;

impl std::fmt::Debug for LocalRule {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("LocalRule")
            .field("group", &self.group.name())
            .field("rho", &self.rho)
            .field("endos", &self.endos)
            .finish()
    }
}

fn is_trivial(map: &[Elem]) -> bool {
    map.iter().all(|&x| x == 0)
}

/// Validates endomorphism maps indexed by offset. Missing offsets are trivial.
pub fn validate_rule(
    group: Arc<FiniteGroup>,
    radius: usize,
    maps: &BTreeMap<i64, Vec<Elem>>,
) -> Result<LocalRule, GcaError> {
    for (&off, map) in maps {
        if off.unsigned_abs() as usize > radius {
            return Err(GcaError::OffsetOutOfRange { offset: off, radius });
        }
        if !is_homomorphism(&group, &group, map) {
            return Err(GcaError::NotEndomorphism(off));
        }
    }
    let gens = group.generators();
    let active: Vec<(&i64, &Vec<Elem>)> = maps.iter().filter(|(_, m)| !is_trivial(m)).collect();
    for (x, (&i, hi)) in active.iter().enumerate() {
        for &(&j, hj) in &active[x + 1..] {
            for &s in gens {
                for &t in gens {
                    let (a, b) = (hi[s as usize], hj[t as usize]);
                    if group.mul(a, b) != group.mul(b, a) {
                        return Err(GcaError::ImagesDoNotCommute { i, j, a, b });
                    }
                }
            }
        }
    }
    let n = group.order();
    let endos = (-(radius as i64)..=radius as i64)
        .map(|k| maps.get(&k).cloned().unwrap_or_else(|| vec![0; n]))
        .collect();
    Ok(LocalRule::from_trusted(group, radius, endos))
}

impl LocalRule {
    pub(crate) fn from_trusted(group: Arc<FiniteGroup>, rho: usize, mut endos: Vec<Vec<Elem>>) -> LocalRule {
        debug_assert_eq!(endos.len(), 2 * rho + 1);
        let mut r = rho;
        while r > 0 && is_trivial(&endos[0]) && is_trivial(endos.last().unwrap()) {
            endos.pop();
            endos.remove(0);
            r -= 1;
        }
        LocalRule { group, rho: r, endos, declared: rho }
    }

    /// `h_0 = id`, radius 0.
    pub fn identity(group: Arc<FiniteGroup>) -> LocalRule {
        let id = group.elements().collect();
        LocalRule::from_trusted(group, 0, vec![id])
    }

    /// The shift power `σ^r` with `σ^r(c)_i = c_{i-r}`, i.e. `h_{-r} = id`.
    pub fn shift(group: Arc<FiniteGroup>, r: i64) -> LocalRule {
        let rho = r.unsigned_abs() as usize;
        let n = group.order();
        let mut endos = vec![vec![0; n]; 2 * rho + 1];
        endos[(rho as i64 - r) as usize] = group.elements().collect();
        LocalRule::from_trusted(group, rho, endos)
    }

    pub fn group(&self) -> &FiniteGroup {
        &self.group
    }

    pub fn group_arc(&self) -> &Arc<FiniteGroup> {
        &self.group
    }

    /// Radius after trimming.
    pub fn radius(&self) -> usize {
        self.rho
    }

    /// Radius as declared before trimming.
    pub fn declared_radius(&self) -> usize {
        self.declared
    }

    pub fn offsets(&self) -> std::ops::RangeInclusive<i64> {
        -(self.rho as i64)..=self.rho as i64
    }

    /// `h_k`; offsets outside the radius give the trivial map.
    pub fn endo(&self, k: i64) -> Option<&[Elem]> {
        if k.unsigned_abs() as usize > self.rho {
            None
        } else {
            Some(&self.endos[(k + self.rho as i64) as usize])
        }
    }

    pub fn endos(&self) -> &[Vec<Elem>] {
        &self.endos
    }

    pub fn nontrivial_offsets(&self) -> Vec<i64> {
        self.offsets()
            .filter(|&k| !is_trivial(self.endo(k).unwrap()))
            .collect()
    }

    pub fn is_zero(&self) -> bool {
        self.endos.iter().all(|m| is_trivial(m))
    }

    /// Endomorphism maps keyed by offset, trivial ones omitted.
    pub fn maps(&self) -> BTreeMap<i64, Vec<Elem>> {
        self.offsets()
            .zip(self.endos.iter())
            .filter(|(_, m)| !is_trivial(m))
            .map(|(k, m)| (k, m.clone()))
            .collect()
    }

    /// The local map on a window of `2ρ+1` cells.
    pub fn local(&self, window: &[Elem]) -> Elem {
        debug_assert_eq!(window.len(), self.endos.len());
        window
            .iter()
            .zip(&self.endos)
            .fold(0, |acc, (&g, h)| self.group.mul(acc, h[g as usize]))
    }

    pub fn apply_cells(&self, cells: &[Elem]) -> Vec<Elem> {
        let p = cells.len() as i64;
        let rho = self.rho as i64;
        (0..p)
            .map(|i| {
                let mut acc = 0;
                for (j, h) in self.endos.iter().enumerate() {
                    let idx = (i + j as i64 - rho).rem_euclid(p);
                    acc = self.group.mul(acc, h[cells[idx as usize] as usize]);
                }
                acc
            })
            .collect()
    }

    pub fn apply(&self, c: &PeriodicConfiguration) -> PeriodicConfiguration {
        PeriodicConfiguration { cells: self.apply_cells(&c.cells) }
    }

    pub fn classify(&self) -> RuleClass {
        if self.rho == 0 {
            return RuleClass::IdentityLike;
        }
        match self.nontrivial_offsets().as_slice() {
            [k] => {
                let m = self.endo(*k).unwrap();
                let mut seen = vec![false; m.len()];
                let automorphism = m.iter().all(|&x| !std::mem::replace(&mut seen[x as usize], true));
                RuleClass::ShiftLike { offset: *k, automorphism }
            }
            _ => RuleClass::General,
        }
    }

    /// The rule of `F_self ∘ F_other` (apply `other` first).
    pub fn compose(&self, other: &LocalRule) -> Result<LocalRule, GcaError> {
        if self.group != other.group {
            return Err(GcaError::GroupMismatch);
        }
        let (r1, r2) = (self.rho as i64, other.rho as i64);
        let rho = (r1 + r2) as usize;
        let g = &self.group;
        let mut endos = Vec::with_capacity(2 * rho + 1);
        for k in -(rho as i64)..=rho as i64 {
            let pairs: Vec<(&[Elem], &[Elem])> = (-r1..=r1)
                .filter(|i| (k - i).abs() <= r2)
                .map(|i| (self.endo(i).unwrap(), other.endo(k - i).unwrap()))
                .filter(|(a, b)| !is_trivial(a) && !is_trivial(b))
                .collect();
            let map = g
                .elements()
                .map(|x| {
                    pairs
                        .iter()
                        .fold(0, |acc, (a, b)| g.mul(acc, a[b[x as usize] as usize]))
                })
                .collect();
            endos.push(map);
        }
        Ok(LocalRule::from_trusted(self.group.clone(), rho, endos))
    }

    /// The rule of `F^n`.
    pub fn power(&self, n: usize) -> LocalRule {
        let mut result = LocalRule::identity(self.group.clone());
        let mut base = self.clone();
        let mut e = n;
        while e > 0 {
            if e & 1 == 1 {
                result = result.compose(&base).expect("same group");
            }
            e >>= 1;
            if e > 0 {
                base = base.compose(&base).expect("same group");
            }
        }
        result
    }

    fn check_invariant(&self, h: &Subgroup) -> Result<(), GcaError> {
        for k in self.offsets() {
            let m = self.endo(k).unwrap();
            if let Some(&w) = h.members().iter().find(|&&x| !h.contains(m[x as usize])) {
                return Err(GcaError::NotInvariant { offset: k, witness: w });
            }
        }
        Ok(())
    }

    /// `F̄_H`: the restriction to an invariant normal subgroup, as a rule on `H`.
    pub fn restrict(&self, h: &Subgroup) -> Result<LocalRule, GcaError> {
        if !is_normal(&self.group, h) {
            return Err(GcaError::NotNormal);
        }
        self.check_invariant(h)?;
        let sub = Arc::new(subgroup_as_group(&self.group, h));
        let mut pos = vec![0 as Elem; self.group.order()];
        for (i, &x) in h.members().iter().enumerate() {
            pos[x as usize] = i as Elem;
        }
        let endos = self
            .endos
            .iter()
            .map(|m| h.members().iter().map(|&x| pos[m[x as usize] as usize]).collect())
            .collect();
        Ok(LocalRule::from_trusted(sub, self.rho, endos))
    }

    /// `F̃`: the induced rule on `G/N`, returned with the quotient data.
    pub fn quotient_gca(&self, n: &Subgroup) -> Result<(LocalRule, QuotientData), GcaError> {
        let q = group::quotient(&self.group, n).map_err(|_| GcaError::NotNormal)?;
        self.check_invariant(n)?;
        let endos: Vec<Vec<Elem>> = self
            .endos
            .iter()
            .map(|m| q.section.iter().map(|&x| q.coset_of[m[x as usize] as usize]).collect())
            .collect();
        for (m, mq) in self.endos.iter().zip(&endos) {
            for x in self.group.elements() {
                assert_eq!(
                    q.coset_of[m[x as usize] as usize],
                    mq[q.coset_of[x as usize] as usize],
                    "induced map is not well defined"
                );
            }
        }
        let rule = LocalRule::from_trusted(Arc::new(q.quotient.clone()), self.rho, endos);
        Ok((rule, q))
    }

    /// `h_i(Z_G) ⊆ Z_G` for every offset.
    pub fn preserves_center(&self) -> bool {
        let z = group::center(&self.group);
        self.check_invariant(&z).is_ok()
    }

    /// Every `Im(h_i)` is normal in `G`.
    pub fn images_normal(&self) -> bool {
        self.endos
            .iter()
            .all(|m| is_normal(&self.group, &group::image(&self.group, m)))
    }
}

/// A bi-infinite configuration repeating `cells` with period `cells.len()`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PeriodicConfiguration {
    pub cells: Vec<Elem>,
}

impl PeriodicConfiguration {
    pub fn new(cells: Vec<Elem>) -> Self {
        assert!(!cells.is_empty(), "period must be at least 1");
        PeriodicConfiguration { cells }
    }

    pub fn period(&self) -> usize {
        self.cells.len()
    }

    /// `σ^r(c)_i = c_{i-r}`.
    pub fn rotate(&self, r: i64) -> Self {
        let p = self.cells.len() as i64;
        PeriodicConfiguration {
            cells: (0..p).map(|i| self.cells[(i - r).rem_euclid(p) as usize]).collect(),
        }
    }
}

/// A configuration equal to the identity outside `[start, start + cells.len())`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FiniteConfiguration {
    pub start: i64,
    pub cells: Vec<Elem>,
}

impl LocalRule {
    /// The image of a finite configuration; its support widens by `ρ` on each side.
    pub fn apply_finite(&self, c: &FiniteConfiguration) -> FiniteConfiguration {
        let rho = self.rho as i64;
        let len = c.cells.len() as i64;
        let get = |i: i64| -> Elem {
            if i < 0 || i >= len {
                0
            } else {
                c.cells[i as usize]
            }
        };
        let cells = (-rho..len + rho)
            .map(|i| {
                let w: Vec<Elem> = (i - rho..=i + rho).map(get).collect();
                self.local(&w)
            })
            .collect();
        FiniteConfiguration { start: c.start - rho, cells }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::library::*;

    fn z2() -> Arc<FiniteGroup> {
        Arc::new(cyclic(2))
    }

    pub(crate) fn xor(g: Arc<FiniteGroup>) -> LocalRule {
        let id: Vec<Elem> = g.elements().collect();
        validate_rule(g, 1, &BTreeMap::from([(-1, id.clone()), (1, id)])).unwrap()
    }

    #[test]
    fn xor_is_valid_and_applies() {
        let r = xor(z2());
        assert_eq!(r.radius(), 1);
        let c = PeriodicConfiguration::new(vec![0, 0, 1, 0]);
        assert_eq!(r.apply(&c).cells, vec![0, 1, 0, 1]);
        assert_eq!(r.classify(), RuleClass::General);
    }

    #[test]
    fn shift_rotates() {
        let g = Arc::new(symmetric(3));
        let s = LocalRule::shift(g, 1);
        let c = PeriodicConfiguration::new(vec![1, 2, 3, 4, 5]);
        assert_eq!(s.apply(&c), c.rotate(1));
        assert_eq!(s.apply(&c).cells, vec![5, 1, 2, 3, 4]);
        assert_eq!(s.classify(), RuleClass::ShiftLike { offset: -1, automorphism: true });
    }

    #[test]
    fn identity_like() {
        let g = Arc::new(symmetric(3));
        let r = LocalRule::identity(g);
        let c = PeriodicConfiguration::new(vec![3, 1, 4]);
        assert_eq!(r.apply(&c), c);
        assert_eq!(r.radius(), 0);
        assert_eq!(r.classify(), RuleClass::IdentityLike);
        assert_eq!(r.power(5), r);
    }

    #[test]
    fn non_commuting_images() {
        let g = Arc::new(symmetric(3));
        let id: Vec<Elem> = g.elements().collect();
        let err = validate_rule(g.clone(), 1, &BTreeMap::from([(-1, id.clone()), (1, id)])).unwrap_err();
        match err {
            GcaError::ImagesDoNotCommute { i: -1, j: 1, a, b } => assert_ne!(g.mul(a, b), g.mul(b, a)),
            e => panic!("unexpected {e:?}"),
        }
    }

    #[test]
    fn not_an_endomorphism() {
        let err = validate_rule(z2(), 0, &BTreeMap::from([(0, vec![1, 0])])).unwrap_err();
        assert_eq!(err, GcaError::NotEndomorphism(0));
    }

    #[test]
    fn trimming() {
        let g = z2();
        let id: Vec<Elem> = g.elements().collect();
        let r = validate_rule(g, 2, &BTreeMap::from([(0, id)])).unwrap();
        assert_eq!(r.radius(), 0);
        assert_eq!(r.declared_radius(), 2);
    }

    #[test]
    fn xor_squared_has_outer_terms_only() {
        let r = xor(z2()).power(2);
        assert_eq!(r.radius(), 2);
        assert_eq!(r.nontrivial_offsets(), vec![-2, 2]);
        for k in 1..=4 {
            assert_eq!(xor(z2()).power(1 << k).radius(), 1 << k);
        }
    }

    #[test]
    fn shift_power_radius() {
        let s = LocalRule::shift(z2(), 1);
        assert_eq!(s.power(5).radius(), 5);
        assert_eq!(s.power(5), LocalRule::shift(z2(), 5));
    }

    #[test]
    fn restriction_and_quotient() {
        let z4 = Arc::new(cyclic(4));
        let r = xor(z4.clone());
        let h = Subgroup::new(&z4, vec![0, 2]).unwrap();
        let sub = r.restrict(&h).unwrap();
        assert_eq!(sub.group().order(), 2);
        assert_eq!(sub, xor(Arc::new(sub.group().clone())));
        assert_eq!(r.restrict(&Subgroup::whole(&z4)).unwrap(), r);

        let s3 = Arc::new(symmetric(3));
        let sigma = LocalRule::shift(s3.clone(), 1);
        let t = (0..6).find(|&x| s3.elem_order(x) == 2).unwrap();
        let h2 = group::subgroup_generated(&s3, &[t]);
        assert_eq!(sigma.restrict(&h2), Err(GcaError::NotNormal));

        let a3 = group::commutator_subgroup(&s3);
        let (q, _) = sigma.quotient_gca(&a3).unwrap();
        assert_eq!(q.group().order(), 2);
        let (q1, _) = sigma.quotient_gca(&Subgroup::whole(&s3)).unwrap();
        assert_eq!(q1.group().order(), 1);
        assert_eq!(q1.classify(), RuleClass::IdentityLike);
        let (q0, _) = sigma.quotient_gca(&Subgroup::trivial()).unwrap();
        assert_eq!(q0, sigma);
    }

    #[test]
    fn not_invariant() {
        // swapping the factors of Z2×Z2 moves the first factor
        let v = Arc::new(klein_four());
        let swap: Vec<Elem> = vec![0, 2, 1, 3];
        let r = validate_rule(v.clone(), 0, &BTreeMap::from([(0, swap)])).unwrap();
        let h = Subgroup::new(&v, vec![0, 1]).unwrap();
        assert_eq!(r.restrict(&h), Err(GcaError::NotInvariant { offset: 0, witness: 1 }));
    }

    #[test]
    fn finite_configurations_spread() {
        let r = xor(z2());
        let c = FiniteConfiguration { start: 0, cells: vec![1] };
        let d = r.apply_finite(&c);
        assert_eq!(d, FiniteConfiguration { start: -1, cells: vec![1, 0, 1] });
    }
}
