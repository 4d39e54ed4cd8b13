//! Rules on `S^m` for a non-abelian simple group `S`.
//!
//! Every endomorphism of `S^m` sends each factor `S_t` either trivially or
//! isomorphically onto factors, and commuting images force distinct offsets
//! to hit distinct factors. A rule is therefore a wiring: each target factor
//! reads at most one source factor, at one offset, through one automorphism.
//! [`SimpleProductRule`] stores that wiring directly, which keeps products
//! such as `A5^4` (order 12 960 000) tractable.

use std::collections::BTreeMap;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::gca::LocalRule;
use crate::group::{self, lcm, Elem, FiniteGroup, SimpleFactorization};

#[derive(Debug, Clone, PartialEq, Eq, Error, Serialize, Deserialize)]
pub enum SimpleProductError {
    #[error("structure violation: {0}")]
    StructureViolation(String),
    #[error("precondition violated: {0}")]
    PreconditionViolated(String),
}

/// `F(c)_{x,target} = auto(c_{x+offset, source})`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Wire {
    pub source: usize,
    pub offset: i64,
    pub auto: Vec<Elem>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SimpleProductRule {
    s: Arc<FiniteGroup>,
    wires: Vec<Option<Wire>>,
}

fn compose_auto(a: &[Elem], b: &[Elem]) -> Vec<Elem> {
    b.iter().map(|&x| a[x as usize]).collect()
}

fn auto_order(a: &[Elem]) -> usize {
    let id: Vec<Elem> = (0..a.len() as Elem).collect();
    let mut p = a.to_vec();
    let mut k = 1;
    while p != id {
        p = compose_auto(a, &p);
        k += 1;
    }
    k
}

impl SimpleProductRule {
    /// Builds a rule from per-target wires. Automorphisms are checked.
    pub fn new(s: Arc<FiniteGroup>, wires: Vec<Option<Wire>>) -> Result<Self, SimpleProductError> {
        let m = wires.len();
        for (t, w) in wires.iter().enumerate() {
            if let Some(w) = w {
                if w.source >= m {
                    return Err(SimpleProductError::StructureViolation(format!(
                        "factor {t} reads missing factor {}",
                        w.source
                    )));
                }
                let mut seen = vec![false; s.order()];
                let bij = w.auto.len() == s.order()
                    && w.auto.iter().all(|&x| (x as usize) < s.order() && !std::mem::replace(&mut seen[x as usize], true));
                if !bij || !group::is_homomorphism(&s, &s, &w.auto) {
                    return Err(SimpleProductError::StructureViolation(format!(
                        "map into factor {t} is not an automorphism"
                    )));
                }
            }
        }
        Ok(SimpleProductRule { s, wires })
    }

    /// `σ^r` on `S^m`.
    pub fn shift(s: Arc<FiniteGroup>, m: usize, r: i64) -> Self {
        let id: Vec<Elem> = s.elements().collect();
        let wires = (0..m)
            .map(|t| Some(Wire { source: t, offset: -r, auto: id.clone() }))
            .collect();
        SimpleProductRule { s, wires }
    }

    pub fn simple(&self) -> &FiniteGroup {
        &self.s
    }

    pub fn m(&self) -> usize {
        self.wires.len()
    }

    pub fn wires(&self) -> &[Option<Wire>] {
        &self.wires
    }

    pub fn radius(&self) -> usize {
        self.wires
            .iter()
            .flatten()
            .map(|w| w.offset.unsigned_abs() as usize)
            .max()
            .unwrap_or(0)
    }

    /// One step on a periodic configuration whose cells are `m`-tuples.
    pub fn apply(&self, cells: &[Vec<Elem>]) -> Vec<Vec<Elem>> {
        let p = cells.len() as i64;
        (0..p)
            .map(|x| {
                self.wires
                    .iter()
                    .map(|w| match w {
                        None => 0,
                        Some(w) => w.auto[cells[(x + w.offset).rem_euclid(p) as usize][w.source] as usize],
                    })
                    .collect()
            })
            .collect()
    }

    /// The rule of `F_self ∘ F_other`.
    pub fn compose(&self, other: &SimpleProductRule) -> SimpleProductRule {
        assert_eq!(self.m(), other.m());
        let wires = self
            .wires
            .iter()
            .map(|w| {
                let w = w.as_ref()?;
                let v = other.wires[w.source].as_ref()?;
                Some(Wire {
                    source: v.source,
                    offset: w.offset + v.offset,
                    auto: compose_auto(&w.auto, &v.auto),
                })
            })
            .collect();
        SimpleProductRule { s: self.s.clone(), wires }
    }

    pub fn power(&self, n: usize) -> SimpleProductRule {
        let id: Vec<Elem> = self.s.elements().collect();
        let mut result = SimpleProductRule {
            s: self.s.clone(),
            wires: (0..self.m())
                .map(|t| Some(Wire { source: t, offset: 0, auto: id.clone() }))
                .collect(),
        };
        let mut base = self.clone();
        let mut e = n;
        while e > 0 {
            if e & 1 == 1 {
                result = result.compose(&base);
            }
            e >>= 1;
            if e > 0 {
                base = base.compose(&base);
            }
        }
        result
    }

    /// The equivalent table rule on `S^m`; feasible only for small `|S|^m`.
    pub fn to_table_rule(&self) -> LocalRule {
        let g = Arc::new(group::library::power(&self.s, self.m()));
        let (q, m) = (self.s.order(), self.m());
        let rho = self.radius();
        let n = g.order();
        let mut endos = vec![vec![0 as Elem; n]; 2 * rho + 1];
        let mut coords = vec![0usize; m];
        for x in 0..n {
            let mut r = x;
            for t in (0..m).rev() {
                coords[t] = r % q;
                r /= q;
            }
            for (t, w) in self.wires.iter().enumerate() {
                if let Some(w) = w {
                    let k = (w.offset + rho as i64) as usize;
                    let img = w.auto[coords[w.source]] as usize;
                    endos[k][x] += (img * q.pow((m - 1 - t) as u32)) as Elem;
                }
            }
        }
        LocalRule::from_trusted(g, rho, endos)
    }

    /// Reads the wiring of a table rule on a factored group.
    pub fn from_table_rule(rule: &LocalRule, fact: &SimpleFactorization) -> Result<Self, SimpleProductError> {
        let g = rule.group();
        let s = &fact.simple;
        let (q, m) = (s.order(), fact.factors.len());
        let mut coords = vec![vec![0 as Elem; m]; g.order()];
        let mut tuple = vec![0usize; m];
        for idx in 0..g.order() {
            let mut r = idx;
            for t in (0..m).rev() {
                tuple[t] = r % q;
                r /= q;
            }
            let x = (0..m).fold(0, |acc, t| g.mul(acc, fact.embeddings[t][tuple[t]]));
            coords[x as usize] = tuple.iter().map(|&v| v as Elem).collect();
        }
        let mut wires: Vec<Option<Wire>> = vec![None; m];
        for k in rule.offsets() {
            let h = rule.endo(k).unwrap();
            for src in 0..m {
                for tgt in 0..m {
                    let auto: Vec<Elem> = s
                        .elements()
                        .map(|x| coords[h[fact.embeddings[src][x as usize] as usize] as usize][tgt])
                        .collect();
                    if auto.iter().all(|&y| y == 0) {
                        continue;
                    }
                    if wires[tgt].is_some() {
                        return Err(SimpleProductError::StructureViolation(format!(
                            "factor {tgt} receives more than one nontrivial map"
                        )));
                    }
                    wires[tgt] = Some(Wire { source: src, offset: k, auto });
                }
            }
        }
        SimpleProductRule::new(Arc::new(s.clone()), wires)
    }

    /// The factor graph of this rule.
    pub fn factor_graph(&self) -> FactorGraph {
        build_factor_graph(self)
    }
}

/// Labeled wiring between simple factors.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FactorGraph {
    pub m: usize,
    /// Per target: `(source, offset label)`.
    pub edges: Vec<Option<(usize, i64)>>,
    /// Factors lying in every kernel.
    pub dead_factors: Vec<usize>,
    /// `r_i`: number of factors in `Im(h_i)`.
    pub r: BTreeMap<i64, usize>,
    /// `π_f` as `permutation[source] = target`, when total.
    pub permutation: Option<Vec<usize>>,
    /// `π_f` in 1-based cycle notation.
    pub cycles: Option<String>,
    pub o: Option<usize>,
    /// Orders of the return automorphisms `ĥ_t`.
    pub hat_orders: Option<Vec<usize>>,
}

pub fn build_factor_graph(rule: &SimpleProductRule) -> FactorGraph {
    let m = rule.m();
    let edges: Vec<Option<(usize, i64)>> = rule
        .wires
        .iter()
        .map(|w| w.as_ref().map(|w| (w.source, w.offset)))
        .collect();
    let mut read = vec![false; m];
    let mut r = BTreeMap::new();
    for &(src, off) in edges.iter().flatten() {
        read[src] = true;
        *r.entry(off).or_insert(0) += 1;
    }
    let dead_factors: Vec<usize> = (0..m).filter(|&t| !read[t]).collect();
    let (mut permutation, mut cycles, mut o, mut hat_orders) = (None, None, None, None);
    if dead_factors.is_empty() {
        let mut perm = vec![0; m];
        for (tgt, e) in edges.iter().enumerate() {
            perm[e.expect("no dead factors").0] = tgt;
        }
        let mut seen = vec![false; m];
        let mut notation = String::new();
        let mut ord = 1;
        let mut hats = vec![0; m];
        for start in 0..m {
            if seen[start] {
                continue;
            }
            let mut cyc = vec![start];
            seen[start] = true;
            let mut t = perm[start];
            while t != start {
                seen[t] = true;
                cyc.push(t);
                t = perm[t];
            }
            ord = lcm(ord, cyc.len());
            for (i, &t) in cyc.iter().enumerate() {
                let mut hat: Vec<Elem> = rule.s.elements().collect();
                for j in 1..=cyc.len() {
                    let tgt = cyc[(i + j) % cyc.len()];
                    hat = compose_auto(&rule.wires[tgt].as_ref().unwrap().auto, &hat);
                }
                hats[t] = auto_order(&hat);
            }
            if cyc.len() > 1 {
                let body: Vec<String> = cyc.iter().map(|t| (t + 1).to_string()).collect();
                notation.push_str(&format!("({})", body.join(",")));
            }
        }
        if notation.is_empty() {
            notation.push_str("()");
        }
        permutation = Some(perm);
        cycles = Some(notation);
        o = Some(ord);
        hat_orders = Some(hats);
    }
    FactorGraph { m, edges, dead_factors, r, permutation, cycles, o, hat_orders }
}

impl FactorGraph {
    /// `Σ_i i·r_i`.
    pub fn label_sum(&self) -> i64 {
        self.r.iter().map(|(&i, &c)| i * c as i64).sum()
    }
}

/// Surjective iff `⋂ Ker(h_j)` is trivial, i.e. no factor is dead.
pub fn is_surjective_simple_product(g: &FactorGraph) -> (bool, Option<usize>) {
    match g.dead_factors.first() {
        Some(&t) => (false, Some(t)),
        None => (true, None),
    }
}

/// Connected blocks of the factor graph, each with its restricted rule.
pub fn minimal_split(rule: &SimpleProductRule) -> Vec<(Vec<usize>, SimpleProductRule)> {
    let m = rule.m();
    let mut parent: Vec<usize> = (0..m).collect();
    fn find(p: &mut [usize], x: usize) -> usize {
        if p[x] != x {
            let r = find(p, p[x]);
            p[x] = r;
        }
        p[x]
    }
    for (tgt, w) in rule.wires.iter().enumerate() {
        if let Some(w) = w {
            let (a, b) = (find(&mut parent, tgt), find(&mut parent, w.source));
            parent[a.max(b)] = a.min(b);
        }
    }
    let mut blocks: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for t in 0..m {
        let root = find(&mut parent, t);
        blocks.entry(root).or_default().push(t);
    }
    blocks
        .into_values()
        .map(|block| {
            let pos: BTreeMap<usize, usize> = block.iter().enumerate().map(|(i, &t)| (t, i)).collect();
            let wires = block
                .iter()
                .map(|&t| {
                    rule.wires[t].as_ref().map(|w| Wire {
                        source: pos[&w.source],
                        offset: w.offset,
                        auto: w.auto.clone(),
                    })
                })
                .collect();
            (block, SimpleProductRule { s: rule.s.clone(), wires })
        })
        .collect()
}

/// `(n, shift)` with `F^n = σ^shift` for a minimal surjective rule.
pub fn shift_power_identity(rule: &SimpleProductRule) -> Result<(usize, i64), SimpleProductError> {
    let g = build_factor_graph(rule);
    if !g.dead_factors.is_empty() {
        return Err(SimpleProductError::PreconditionViolated("rule is not surjective".into()));
    }
    if minimal_split(rule).len() != 1 {
        return Err(SimpleProductError::PreconditionViolated("rule is not minimal".into()));
    }
    let o = g.o.unwrap();
    let n_prime = g.hat_orders.as_ref().unwrap().iter().fold(0, |a, &b| group::gcd(a, b));
    let n = o * n_prime;
    let shift = -(n_prime as i64) * g.label_sum();
    let p = rule.power(n);
    if p != SimpleProductRule::shift(rule.s.clone(), rule.m(), shift) {
        return Err(SimpleProductError::PreconditionViolated(format!(
            "F^{n} differs from the shift by {shift}"
        )));
    }
    Ok((n, shift))
}

/// Backward-path analysis of radii: a reachable cycle with nonzero label sum
/// makes `ρ(F^n)` unbounded.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CycleSumVerdict {
    pub sensitive: bool,
    /// Cycles of the backward graph with their label sums.
    pub cycles: Vec<(Vec<usize>, i64)>,
    /// `max_t ρ` of the power rules for `n = 1..=profile.len()`.
    pub profile: Vec<usize>,
    /// Whether the radius profile matched the verdict.
    pub confirmed: bool,
}

pub fn cycle_sum_sensitivity(rule: &SimpleProductRule, n_max: usize) -> CycleSumVerdict {
    let m = rule.m();
    let src: Vec<Option<(usize, i64)>> = rule
        .wires
        .iter()
        .map(|w| w.as_ref().map(|w| (w.source, w.offset)))
        .collect();
    let mut on_cycle = vec![false; m];
    let mut cycles = Vec::new();
    for start in 0..m {
        if on_cycle[start] {
            continue;
        }
        // Walk backwards m steps; if still alive we are on or past a cycle.
        let mut t = start;
        let mut alive = true;
        for _ in 0..m {
            match src[t] {
                Some((s, _)) => t = s,
                None => {
                    alive = false;
                    break;
                }
            }
        }
        if !alive || on_cycle[t] {
            continue;
        }
        let mut cyc = vec![t];
        let mut sum = src[t].unwrap().1;
        let mut u = src[t].unwrap().0;
        while u != t {
            cyc.push(u);
            sum += src[u].unwrap().1;
            u = src[u].unwrap().0;
        }
        for &c in &cyc {
            on_cycle[c] = true;
        }
        cyc.sort_unstable();
        cycles.push((cyc, sum));
    }
    cycles.sort();
    let sensitive = cycles.iter().any(|&(_, s)| s != 0);

    let mut profile = Vec::with_capacity(n_max);
    let mut p = rule.clone();
    for _ in 0..n_max {
        profile.push(p.radius());
        p = p.compose(rule);
    }
    let bound = 2 * m * rule.radius().max(1);
    let confirmed = if sensitive {
        profile.iter().any(|&r| r > 16)
    } else {
        // Paths reach their cycle within m steps, so zero-sum cycles keep radii bounded.
        profile.iter().all(|&r| r <= bound)
    };
    CycleSumVerdict { sensitive, cycles, profile, confirmed }
}

/// Per-block results for a rule on `S^m`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BlockReport {
    pub factors: Vec<usize>,
    pub surjective: bool,
    pub dead_factor: Option<usize>,
    pub label_sum: i64,
    pub o: Option<usize>,
    pub transitive: bool,
    /// `None` when the cycle-sum analysis could not be confirmed.
    pub sensitive: Option<bool>,
    pub sensitive_by_extension: bool,
    /// `(coefficient numerator, denominator)` of `log|S|` for surjective blocks.
    pub entropy_log_s: Option<(i64, i64)>,
    pub shift_identity: Option<(usize, i64)>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SimpleProductReport {
    pub simple_order: usize,
    pub m: usize,
    pub graph: FactorGraph,
    pub blocks: Vec<BlockReport>,
}

impl SimpleProductReport {
    pub fn surjective(&self) -> bool {
        self.blocks.iter().all(|b| b.surjective)
    }

    pub fn transitive(&self) -> bool {
        self.blocks.iter().all(|b| b.transitive)
    }

    /// `Some(true)` if some block is sensitive, `Some(false)` if all are equicontinuous.
    pub fn sensitive(&self) -> Option<bool> {
        if self.blocks.iter().any(|b| b.sensitive == Some(true)) {
            Some(true)
        } else if self.blocks.iter().all(|b| b.sensitive == Some(false)) {
            Some(false)
        } else {
            None
        }
    }
}

/// Closed-form verdicts per minimal block.
pub fn decide_simple_product(rule: &SimpleProductRule) -> SimpleProductReport {
    let graph = build_factor_graph(rule);
    let blocks = minimal_split(rule)
        .into_iter()
        .map(|(factors, block)| {
            let g = build_factor_graph(&block);
            let (surjective, dead) = is_surjective_simple_product(&g);
            let label_sum = g.label_sum();
            let dead_factor = dead.map(|d| factors[d]);
            if surjective {
                let o = g.o.unwrap() as i64;
                let mb = block.m() as i64;
                let (num, den) = reduce(label_sum.abs() * mb, o);
                BlockReport {
                    factors,
                    surjective,
                    dead_factor,
                    label_sum,
                    o: g.o,
                    transitive: label_sum != 0,
                    sensitive: Some(label_sum != 0),
                    sensitive_by_extension: false,
                    entropy_log_s: Some((num, den)),
                    shift_identity: shift_power_identity(&block).ok(),
                }
            } else {
                let cs = cycle_sum_sensitivity(&block, 64);
                BlockReport {
                    factors,
                    surjective,
                    dead_factor,
                    label_sum,
                    o: None,
                    transitive: false,
                    sensitive: cs.confirmed.then_some(cs.sensitive),
                    sensitive_by_extension: true,
                    entropy_log_s: None,
                    shift_identity: None,
                }
            }
        })
        .collect();
    SimpleProductReport { simple_order: rule.s.order(), m: rule.m(), graph, blocks }
}

fn reduce(a: i64, b: i64) -> (i64, i64) {
    let g = group::gcd(a.unsigned_abs() as usize, b.unsigned_abs() as usize).max(1) as i64;
    (a / g, b / g)
}

/// Inner automorphism `x ↦ g x g⁻¹` of `s`.
pub fn inner_automorphism(s: &FiniteGroup, g: Elem) -> Vec<Elem> {
    s.elements().map(|x| s.conj(g, x)).collect()
}
