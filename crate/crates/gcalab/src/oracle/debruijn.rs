use serde::{Deserialize, Serialize};

use super::OracleError;
use crate::gca::LocalRule;
use crate::group::{image, subgroup_generated, Elem};

/// Largest pair graph (`Q²` nodes) held in memory.
pub const PAIR_CAP: usize = 1 << 25;

/// The de Bruijn graph of a rule seen as a plain lookup-table CA.
///
/// The window is trimmed to the span `[dmin, dmax]` of nontrivial offsets,
/// which changes neither surjectivity nor injectivity. Nodes are words of
/// length `span = dmax - dmin` read as base-`q` numbers, most significant
/// first. The edge leaving node `v` by symbol `a` carries the label
/// `f(v·a)` and ends at the last `span` symbols of `v·a`.
#[derive(Debug, Clone)]
pub struct DeBruijnGraph {
    pub q: usize,
    pub span: usize,
    pub nodes: usize,
    /// `labels[v·q + a]`.
    pub labels: Vec<Elem>,
    /// For each node, its out-symbols sorted by label.
    by_label: Vec<Elem>,
}

impl DeBruijnGraph {
    pub fn new(rule: &LocalRule, budget: usize) -> Result<Self, OracleError> {
        let q = rule.group().order();
        let rho = rule.radius() as i64;
        let offs = rule.nontrivial_offsets();
        let (dmin, dmax) = (offs.first().copied().unwrap_or(0), offs.last().copied().unwrap_or(0));
        let span = (dmax - dmin) as usize;
        let nodes = q
            .checked_pow(span as u32)
            .filter(|&n| n <= budget)
            .ok_or(OracleError::BudgetExceeded { what: "de Bruijn nodes", budget })?;
        let mut labels = Vec::with_capacity(nodes * q);
        // Cells outside the span stay at the identity, which every map fixes.
        let mut window = vec![0 as Elem; 2 * rho as usize + 1];
        let first = (dmin + rho) as usize;
        for idx in 0..nodes * q {
            let mut x = idx;
            for j in (0..=span).rev() {
                window[first + j] = (x % q) as Elem;
                x /= q;
            }
            labels.push(rule.local(&window));
        }
        let mut by_label = Vec::with_capacity(nodes * q);
        for v in 0..nodes {
            let mut syms: Vec<Elem> = (0..q as Elem).collect();
            syms.sort_by_key(|&a| (labels[v * q + a as usize], a));
            by_label.extend(syms);
        }
        Ok(DeBruijnGraph { q, span, nodes, labels, by_label })
    }

    #[inline]
    fn next(&self, v: usize, a: usize) -> usize {
        (v * self.q + a) % self.nodes
    }

    #[inline]
    fn label(&self, v: usize, a: usize) -> Elem {
        self.labels[v * self.q + a]
    }

    /// Out-symbols of `v` whose edge carries label `c`.
    fn symbols_with_label(&self, v: usize, c: Elem) -> &[Elem] {
        let seg = &self.by_label[v * self.q..(v + 1) * self.q];
        let lo = seg.partition_point(|&a| self.label(v, a as usize) < c);
        let hi = seg.partition_point(|&a| self.label(v, a as usize) <= c);
        &seg[lo..hi]
    }

    /// Every symbol has exactly `q^span` preimages under the trimmed local map.
    pub fn is_balanced(&self) -> bool {
        let mut counts = vec![0usize; self.q];
        for &c in &self.labels {
            counts[c as usize] += 1;
        }
        counts.iter().all(|&n| n == self.nodes)
    }

    fn pair_count(&self) -> Result<usize, OracleError> {
        self.nodes
            .checked_mul(self.nodes)
            .filter(|&n| n <= PAIR_CAP)
            .ok_or(OracleError::BudgetExceeded { what: "pair graph nodes", budget: PAIR_CAP })
    }

    /// Searches for two distinct equally labelled paths with common endpoints.
    pub fn find_diamond(&self) -> Result<bool, OracleError> {
        let n = self.nodes;
        let mut seen = vec![false; self.pair_count()?];
        let mut stack: Vec<(usize, usize)> = Vec::new();
        for u in 0..n {
            for a in 0..self.q {
                for &b in self.symbols_with_label(u, self.label(u, a)) {
                    let b = b as usize;
                    if b == a {
                        continue;
                    }
                    let (x, y) = (self.next(u, a), self.next(u, b));
                    if x == y {
                        return Ok(true);
                    }
                    if !std::mem::replace(&mut seen[x * n + y], true) {
                        stack.push((x, y));
                    }
                }
            }
        }
        while let Some((u, v)) = stack.pop() {
            for a in 0..self.q {
                for &b in self.symbols_with_label(v, self.label(u, a)) {
                    let (x, y) = (self.next(u, a), self.next(v, b as usize));
                    if x == y {
                        return Ok(true);
                    }
                    if !std::mem::replace(&mut seen[x * n + y], true) {
                        stack.push((x, y));
                    }
                }
            }
        }
        Ok(false)
    }

    /// Whether the pair graph restricted to off-diagonal nodes has a cycle.
    pub fn off_diagonal_cycle(&self) -> Result<bool, OracleError> {
        let n = self.nodes;
        if n == 1 {
            return Ok(false);
        }
        let total = self.pair_count()?;
        let mut outdeg = vec![0u32; total];
        for u in 0..n {
            for v in (0..n).filter(|&v| v != u) {
                let mut d = 0u32;
                for a in 0..self.q {
                    for &b in self.symbols_with_label(v, self.label(u, a)) {
                        if self.next(u, a) != self.next(v, b as usize) {
                            d += 1;
                        }
                    }
                }
                outdeg[u * n + v] = d;
            }
        }
        // Peel nodes without off-diagonal successors; a cycle survives peeling.
        let mut queue: Vec<usize> = (0..total).filter(|&i| i / n != i % n && outdeg[i] == 0).collect();
        let mut removed = queue.len();
        let off_diagonal = total - n;
        let stride = n / self.q;
        while let Some(i) = queue.pop() {
            let (x, y) = (i / n, i % n);
            // Predecessors of x are c·(n/q) + x/q for every leading symbol c.
            for cu in 0..self.q {
                let u = cu * stride + x / self.q;
                let a = x % self.q;
                let lab = self.label(u, a);
                for cv in 0..self.q {
                    let v = cv * stride + y / self.q;
                    if u == v || self.label(v, y % self.q) != lab {
                        continue;
                    }
                    let j = u * n + v;
                    outdeg[j] -= 1;
                    if outdeg[j] == 0 {
                        queue.push(j);
                        removed += 1;
                    }
                }
            }
        }
        Ok(removed < off_diagonal)
    }
}

/// Exact surjectivity; a surjective rule must also be balanced.
pub fn debruijn_surjective(rule: &LocalRule, budget: usize) -> Result<bool, OracleError> {
    let g = DeBruijnGraph::new(rule, budget)?;
    let surjective = !g.find_diamond()?;
    if surjective {
        assert!(g.is_balanced(), "surjective rule with unbalanced local map");
    }
    Ok(surjective)
}

/// Exact injectivity: surjective, and no bi-infinite pair path stays off the diagonal.
pub fn debruijn_injective(rule: &LocalRule, budget: usize) -> Result<bool, OracleError> {
    let g = DeBruijnGraph::new(rule, budget)?;
    if g.find_diamond()? {
        return Ok(false);
    }
    Ok(!g.off_diagonal_cycle()?)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BalanceMethod {
    /// Preimages counted over all windows.
    Count,
    /// The local map is a homomorphism, so its fibers are cosets of one kernel.
    Image,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LocalBalance {
    pub surjective: bool,
    pub balanced: bool,
    pub image_order: usize,
    pub method: BalanceMethod,
}

/// Surjectivity and balance of the local map `G^(2ρ+1) → G`.
pub fn local_map_balance(rule: &LocalRule, window_budget: usize) -> LocalBalance {
    let g = rule.group();
    let q = g.order();
    let width = 2 * rule.radius() + 1;
    if let Some(total) = q.checked_pow(width as u32).filter(|&t| t <= window_budget) {
        let mut counts = vec![0usize; q];
        let mut window = vec![0 as Elem; width];
        for idx in 0..total {
            let mut x = idx;
            for j in (0..width).rev() {
                window[j] = (x % q) as Elem;
                x /= q;
            }
            counts[rule.local(&window) as usize] += 1;
        }
        let image_order = counts.iter().filter(|&&c| c > 0).count();
        let balanced = counts.iter().all(|&c| c == total / q);
        return LocalBalance { surjective: image_order == q, balanced, image_order, method: BalanceMethod::Count };
    }
    let gens: Vec<Elem> = rule
        .endos()
        .iter()
        .flat_map(|h| image(g, h).members().to_vec())
        .collect();
    let image_order = subgroup_generated(g, &gens).len();
    LocalBalance { surjective: image_order == q, balanced: true, image_order, method: BalanceMethod::Image }
}
