use std::collections::HashSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::gca::LocalRule;
use crate::group::Elem;

/// Largest number of seed words enumerated exactly.
pub const SEED_BUDGET: usize = 1 << 22;

/// `log R(w, t) / t` for one window.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EntropyEstimate {
    pub w: usize,
    pub t: usize,
    pub value: f64,
    /// Distinct `t×w` rectangles found.
    pub rectangles: u64,
    /// Seed words evaluated.
    pub seeds: u64,
    /// All seeds were enumerated; otherwise `seeds` were sampled and `value` is a lower estimate.
    pub exact: bool,
}

/// Counts distinct space-time rectangles of width `w` and height `t`.
///
/// Row `s` of the rectangle depends on the seed row only through offsets in
/// `s·[dmin, dmax]`, where `dmin`/`dmax` bound the nontrivial offsets, so
/// the seed spans `[min(0, (t-1)·dmin), w-1 + max(0, (t-1)·dmax)]`.
pub fn entropy_estimate(rule: &LocalRule, w: usize, t: usize) -> EntropyEstimate {
    assert!(w >= 1 && t >= 1, "window must be nonempty");
    let q = rule.group().order();
    let offs = rule.nontrivial_offsets();
    let (dmin, dmax) = (offs.first().copied().unwrap_or(0), offs.last().copied().unwrap_or(0));
    let steps = (t - 1) as i64;
    let lo = (steps * dmin).min(0);
    let hi = w as i64 - 1 + (steps * dmax).max(0);
    let width = (hi - lo + 1) as usize;
    let total = q.checked_pow(width as u32).filter(|&n| n <= SEED_BUDGET);

    let mut rects: HashSet<Vec<Elem>> = HashSet::new();
    let mut seed = vec![0 as Elem; width];
    let mut rect = Vec::with_capacity(w * t);
    let mut record = |seed: &[Elem], rects: &mut HashSet<Vec<Elem>>| {
        rect.clear();
        evolve(rule, seed, lo, w, t, &mut rect);
        if !rects.contains(&rect) {
            rects.insert(rect.clone());
        }
    };
    let (seeds, exact) = match total {
        Some(n) => {
            for idx in 0..n {
                let mut x = idx;
                for c in seed.iter_mut() {
                    *c = (x % q) as Elem;
                    x /= q;
                }
                record(&seed, &mut rects);
            }
            (n as u64, true)
        }
        None => {
            let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
            for _ in 0..SEED_BUDGET {
                for c in seed.iter_mut() {
                    *c = rng.gen_range(0..q as Elem);
                }
                record(&seed, &mut rects);
            }
            (SEED_BUDGET as u64, false)
        }
    };
    let r = rects.len() as u64;
    EntropyEstimate { w, t, value: (r as f64).ln() / t as f64, rectangles: r, seeds, exact }
}

/// Estimates for `w = 1..=w_max` at fixed height.
pub fn entropy_estimates(rule: &LocalRule, w_max: usize, t: usize) -> Vec<EntropyEstimate> {
    (1..=w_max).map(|w| entropy_estimate(rule, w, t)).collect()
}

/// Writes cells `0..w` of rows `0..t` into `out`, starting from a seed whose
/// first cell sits at coordinate `lo`. Cells outside the seed are never read
/// for these rows, since only nontrivial offsets are evaluated.
fn evolve(rule: &LocalRule, seed: &[Elem], lo: i64, w: usize, t: usize, out: &mut Vec<Elem>) {
    let g = rule.group();
    let terms: Vec<(i64, &[Elem])> = rule
        .nontrivial_offsets()
        .into_iter()
        .map(|k| (k, rule.endo(k).unwrap()))
        .collect();
    let mut row = seed.to_vec();
    let mut start = lo;
    for s in 0..t {
        out.extend((0..w as i64).map(|i| row[(i - start) as usize]));
        if s + 1 == t {
            break;
        }
        // The next row is valid on the coordinates whose neighborhoods lie in the current row.
        let (dmin, dmax) = (terms.first().map_or(0, |x| x.0), terms.last().map_or(0, |x| x.0));
        let end = start + row.len() as i64;
        let (nlo, nhi) = (start - dmin, end - dmax);
        let next: Vec<Elem> = (nlo..nhi)
            .map(|i| {
                terms
                    .iter()
                    .fold(0, |acc, (k, h)| g.mul(acc, h[row[(i + k - start) as usize] as usize]))
            })
            .collect();
        row = next;
        start = nlo;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gca::validate_rule;
    use crate::group::library::*;
    use std::collections::BTreeMap;
    use std::sync::Arc;

    #[test]
    fn shift_counts_are_exact() {
        let s = LocalRule::shift(Arc::new(cyclic(2)), 1);
        let e = entropy_estimate(&s, 4, 8);
        assert!(e.exact);
        assert_eq!(e.rectangles, 1 << 11);
        assert!((e.value - 11.0 / 8.0 * 2f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn identity_estimate_vanishes() {
        let id = LocalRule::identity(Arc::new(cyclic(3)));
        let e = entropy_estimate(&id, 2, 10);
        assert_eq!(e.rectangles, 9);
        assert!(e.value < 0.25);
    }

    #[test]
    fn xor_counts() {
        let g = cyclic(2);
        let id: Vec<Elem> = g.elements().collect();
        let xor = validate_rule(Arc::new(g), 1, &BTreeMap::from([(-1, id.clone()), (1, id)])).unwrap();
        assert_eq!(entropy_estimate(&xor, 1, 10).rectangles, 1 << 10);
        let e = entropy_estimate(&xor, 2, 10);
        assert!(e.exact);
        assert_eq!(e.rectangles, 1 << 20);
        assert!((e.value - 2.0 * 2f64.ln()).abs() < 1e-12);
    }
}
