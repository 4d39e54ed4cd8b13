//! Brute-force checks that treat a rule as a plain finite-alphabet CA.
//!
//! Nothing here uses the algebraic structure beyond evaluating the local
//! map, so these results are an independent check on the deciders.

mod debruijn;
mod entropy;

use std::collections::HashMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use debruijn::{
    debruijn_injective, debruijn_surjective, local_map_balance, BalanceMethod, DeBruijnGraph,
    LocalBalance, PAIR_CAP,
};
pub use entropy::{entropy_estimate, entropy_estimates, EntropyEstimate, SEED_BUDGET};

use crate::gca::{LocalRule, PeriodicConfiguration};
use crate::group::Elem;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OracleError {
    #[error("budget exceeded: {what} above {budget}")]
    BudgetExceeded { what: &'static str, budget: usize },
}

/// `t` rows of evolution; row `r+1` is the image of row `r`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpaceTimeBlock {
    pub width: usize,
    pub height: usize,
    pub cells: Vec<Vec<Elem>>,
}

impl SpaceTimeBlock {
    /// One row per line, cells separated by spaces; `names` replaces indices when given.
    pub fn to_text(&self, names: Option<&[String]>) -> String {
        let mut out = String::new();
        for row in &self.cells {
            let cells: Vec<String> = row
                .iter()
                .map(|&x| names.map_or_else(|| x.to_string(), |n| n[x as usize].clone()))
                .collect();
            out.push_str(&cells.join(" "));
            out.push('\n');
        }
        out
    }

    /// Plain PGM with gray level equal to the element index.
    pub fn to_pgm(&self, alphabet: usize) -> String {
        let max = alphabet.saturating_sub(1).max(1);
        let mut out = format!("P2\n{} {}\n{}\n", self.width, self.height, max);
        for row in &self.cells {
            let line: Vec<String> = row.iter().map(|x| x.to_string()).collect();
            let _ = writeln!(out, "{}", line.join(" "));
        }
        out
    }
}

/// The orbit `c, F(c), …, F^(t-1)(c)` of a periodic configuration.
pub fn simulate(rule: &LocalRule, c: &PeriodicConfiguration, t: usize) -> SpaceTimeBlock {
    let mut cells = Vec::with_capacity(t);
    let mut row = c.cells.clone();
    for _ in 0..t {
        let next = step_ring(rule, &row);
        cells.push(std::mem::replace(&mut row, next));
    }
    SpaceTimeBlock { width: c.period(), height: t, cells }
}

/// One step on a ring, evaluating the local map on each window.
fn step_ring(rule: &LocalRule, row: &[Elem]) -> Vec<Elem> {
    let n = row.len() as i64;
    let rho = rule.radius() as i64;
    let mut window = vec![0 as Elem; 2 * rho as usize + 1];
    (0..n)
        .map(|i| {
            for (j, w) in window.iter_mut().enumerate() {
                *w = row[(i + j as i64 - rho).rem_euclid(n) as usize];
            }
            rule.local(&window)
        })
        .collect()
}

/// Radii of `F^n` for `n = 1..=n_max` and the first repeat among these rules.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RadiusProfile {
    /// `radii[n-1]` is the trimmed radius of `F^n`.
    pub radii: Vec<usize>,
    /// `(m, p)` with `F^m = F^(m+p)`, smallest `m + p`.
    pub repeat: Option<(usize, usize)>,
}

impl RadiusProfile {
    pub fn max_radius(&self) -> usize {
        self.radii.iter().copied().max().unwrap_or(0)
    }

    /// First `n` with `ρ(F^n) > bound`.
    pub fn exceeds(&self, bound: usize) -> Option<usize> {
        self.radii.iter().position(|&r| r > bound).map(|i| i + 1)
    }
}

/// Measures `ρ(F^n)` by evolving single-cell impulses of every generator.
///
/// The ring is wide enough that no impulse wraps around within `n_max`
/// steps, so the nonzero cells after `n` steps are exactly the offsets of
/// the nontrivial endomorphisms of `F^n` (mirrored). Since a homomorphism is
/// fixed by the images of generators, equal impulse states mean equal rules.
/// The scan stops at the first repeat, after which radii are periodic.
pub fn radius_growth_profile(rule: &LocalRule, n_max: usize) -> RadiusProfile {
    let rho = rule.radius();
    let width = 2 * n_max * rho + 1;
    let center = n_max * rho;
    let gens: Vec<Elem> = rule.group().generators().to_vec();
    let mut rows: Vec<Vec<Elem>> = gens
        .iter()
        .map(|&s| {
            let mut r = vec![0 as Elem; width];
            r[center] = s;
            r
        })
        .collect();
    let mut seen: HashMap<Vec<Vec<Elem>>, usize> = HashMap::new();
    let mut radii = Vec::with_capacity(n_max);
    for n in 1..=n_max {
        for r in rows.iter_mut() {
            *r = step_ring(rule, r);
        }
        let radius = rows
            .iter()
            .flat_map(|r| r.iter().enumerate().filter(|(_, &x)| x != 0).map(|(i, _)| i.abs_diff(center)))
            .max()
            .unwrap_or(0);
        radii.push(radius);
        if let Some(&m) = seen.get(&rows) {
            return RadiusProfile { radii, repeat: Some((m, n - m)) };
        }
        seen.insert(rows.clone(), n);
    }
    RadiusProfile { radii, repeat: None }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gca::validate_rule;
    use crate::group::library::*;
    use std::collections::BTreeMap;
    use std::sync::Arc;

    fn xor(n: usize) -> LocalRule {
        let g = cyclic(n);
        let id: Vec<Elem> = g.elements().collect();
        validate_rule(Arc::new(g), 1, &BTreeMap::from([(-1, id.clone()), (1, id)])).unwrap()
    }

    #[test]
    fn debruijn_basics() {
        let b = 65536;
        assert!(debruijn_surjective(&xor(2), b).unwrap());
        assert!(!debruijn_injective(&xor(2), b).unwrap());
        let s = LocalRule::shift(Arc::new(symmetric(3)), 1);
        assert!(debruijn_surjective(&s, b).unwrap());
        assert!(debruijn_injective(&s, b).unwrap());
        let id = LocalRule::identity(Arc::new(cyclic(4)));
        assert!(debruijn_surjective(&id, b).unwrap() && debruijn_injective(&id, b).unwrap());
        let doubling = validate_rule(Arc::new(cyclic(4)), 0, &BTreeMap::from([(0, vec![0, 2, 0, 2])])).unwrap();
        assert!(!debruijn_surjective(&doubling, b).unwrap());
        assert!(!debruijn_injective(&doubling, b).unwrap());
        let zero = validate_rule(Arc::new(cyclic(2)), 1, &BTreeMap::new()).unwrap();
        assert!(!debruijn_surjective(&zero, b).unwrap());
        assert!(matches!(
            debruijn_surjective(&xor(2).power(9), b),
            Err(OracleError::BudgetExceeded { .. })
        ));
    }

    #[test]
    fn kernel_of_two_neighbour_sum() {
        // c_i + c_{i+1} on Z_2 is surjective but two-to-one.
        let r = validate_rule(Arc::new(cyclic(2)), 1, &BTreeMap::from([(0, vec![0, 1]), (1, vec![0, 1])])).unwrap();
        assert!(debruijn_surjective(&r, 65536).unwrap());
        assert!(!debruijn_injective(&r, 65536).unwrap());
    }

    #[test]
    fn profiles() {
        let p = radius_growth_profile(&LocalRule::shift(Arc::new(cyclic(3)), 1), 10);
        assert_eq!(p.radii, (1..=10).collect::<Vec<_>>());
        assert_eq!(p.repeat, None);
        let p = radius_growth_profile(&xor(2), 32);
        assert_eq!(p.radii, (1..=32).collect::<Vec<_>>());
        let p = radius_growth_profile(&LocalRule::identity(Arc::new(symmetric(3))), 10);
        assert_eq!(p.radii, vec![0, 0]);
        assert_eq!(p.repeat, Some((1, 1)));
    }

    #[test]
    fn simulation() {
        let c = PeriodicConfiguration::new(vec![0, 0, 0, 1, 0, 0, 0, 0, 0]);
        let b = simulate(&xor(2), &c, 4);
        assert_eq!(b.cells[1], vec![0, 0, 1, 0, 1, 0, 0, 0, 0]);
        assert_eq!(b.cells[2], vec![0, 1, 0, 0, 0, 1, 0, 0, 0]);
        assert_eq!(b.cells[3], vec![1, 0, 1, 0, 1, 0, 1, 0, 0]);
        let s = simulate(&LocalRule::shift(Arc::new(cyclic(2)), 1), &c, 3);
        assert_eq!(s.cells[2], c.rotate(2).cells);
        assert!(b.to_pgm(2).starts_with("P2\n9 4\n1\n"));
        assert_eq!(b.to_text(None).lines().next().unwrap(), "0 0 0 1 0 0 0 0 0");
    }

    #[test]
    fn local_balance_of_a_non_surjective_gca() {
        // h_{-1}(x, y) = (y, e), h_1(x, y) = (e, y) on Z_3 × Z_3.
        let g = direct_product(&cyclic(3), &cyclic(3));
        let left: Vec<Elem> = g.elements().map(|z| (z % 3) * 3).collect();
        let right: Vec<Elem> = g.elements().map(|z| z % 3).collect();
        let r = validate_rule(Arc::new(g), 1, &BTreeMap::from([(-1, left), (1, right)])).unwrap();
        let bal = local_map_balance(&r, 1 << 22);
        assert!(bal.surjective && bal.balanced);
        assert_eq!(bal.method, BalanceMethod::Count);
        assert!(!debruijn_surjective(&r, 65536).unwrap());
    }
}
