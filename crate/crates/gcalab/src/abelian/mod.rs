//! Linear deciders for rules on elementary abelian groups `(Z_p)^k`.
//!
//! A rule becomes a matrix `M(X) = Σ H_i X^i` of Laurent polynomials over
//! the `p`-element field, where column `j` of `H_i` holds the coordinates of
//! `h_i(b_j)` in the chosen basis.

mod laurent;

use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};
use serde_json::json;
use thiserror::Error;

pub use laurent::{determinant, Laurent};

use crate::gca::{GcaError, LocalRule};
use crate::group::{invariantly_simple_factorization, Elem, GroupKind, Subgroup};
use crate::verdict::{Method, Truth, Verdict};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AbelianError {
    #[error("group of order {0} is not elementary abelian")]
    NotElementaryAbelian(usize),
    #[error("rule is not surjective")]
    NotSurjective,
    #[error(transparent)]
    Gca(#[from] GcaError),
}

/// A `k×k` matrix over `Z_p`, row-major.
pub type Matrix = Vec<Vec<u32>>;

/// A rule on `(Z_p)^k` as coefficient matrices.
#[derive(Debug, Clone)]
pub struct MatrixRule {
    pub p: u32,
    pub k: usize,
    pub coeffs: BTreeMap<i64, Matrix>,
    /// `basis[j]` is the group element playing the role of `e_j`.
    pub basis: Vec<Elem>,
    coords: Vec<Vec<u32>>,
    elem_of: HashMap<Vec<u32>, Elem>,
    rule: LocalRule,
}

impl MatrixRule {
    pub fn rule(&self) -> &LocalRule {
        &self.rule
    }

    /// Coordinates of a group element in the basis.
    pub fn coords(&self, x: Elem) -> &[u32] {
        &self.coords[x as usize]
    }

    pub fn element(&self, v: &[u32]) -> Elem {
        self.elem_of[v]
    }

    /// `M(X)` with entry `(r, c)` the polynomial `Σ_i H_i[r][c] X^i`.
    pub fn poly_matrix(&self) -> Vec<Vec<Laurent>> {
        let mut m = vec![vec![Laurent::zero(self.p); self.k]; self.k];
        for (&i, h) in &self.coeffs {
            for r in 0..self.k {
                for c in 0..self.k {
                    m[r][c] = m[r][c].add(&Laurent::monomial(self.p, h[r][c], i));
                }
            }
        }
        m
    }

    pub fn det(&self) -> Laurent {
        determinant(&self.poly_matrix(), self.p)
    }

    /// Largest and smallest offsets with a nonzero coefficient.
    pub fn support(&self) -> Option<(i64, i64)> {
        let nz: Vec<i64> = self
            .coeffs
            .iter()
            .filter(|(_, h)| h.iter().flatten().any(|&c| c != 0))
            .map(|(&i, _)| i)
            .collect();
        Some((*nz.first()?, *nz.last()?))
    }

    pub fn is_zero(&self) -> bool {
        self.support().is_none()
    }
}

/// Converts a rule on an elementary abelian group to matrix form.
pub fn to_matrix_rule(rule: &LocalRule) -> Result<MatrixRule, AbelianError> {
    let g = rule.group();
    let fact = invariantly_simple_factorization(g)
        .ok_or(AbelianError::NotElementaryAbelian(g.order()))?;
    let GroupKind::ElementaryAbelian { p, rank: k } = fact.kind else {
        return Err(AbelianError::NotElementaryAbelian(g.order()));
    };
    let p32 = p as u32;
    let basis: Vec<Elem> = fact.embeddings.iter().map(|e| e[1]).collect();

    let mut coords = vec![Vec::new(); g.order()];
    let mut elem_of = HashMap::new();
    let mut v = vec![0u32; k];
    loop {
        let x = v
            .iter()
            .zip(&basis)
            .fold(0, |acc, (&c, &b)| g.mul(acc, g.pow(b, c as usize)));
        coords[x as usize] = v.clone();
        elem_of.insert(v.clone(), x);
        if !increment(&mut v, p32) {
            break;
        }
    }

    let mut coeffs = BTreeMap::new();
    for i in rule.offsets() {
        let h = rule.endo(i).unwrap();
        let mut mat = vec![vec![0u32; k]; k];
        for (j, &b) in basis.iter().enumerate() {
            for (r, &c) in coords[h[b as usize] as usize].iter().enumerate() {
                mat[r][j] = c;
            }
        }
        for x in g.elements() {
            assert_eq!(
                mat_vec(&mat, &coords[x as usize], p32),
                coords[h[x as usize] as usize],
                "matrix does not represent h_{i}"
            );
        }
        coeffs.insert(i, mat);
    }
    Ok(MatrixRule { p: p32, k, coeffs, basis, coords, elem_of, rule: rule.clone() })
}

fn increment(v: &mut [u32], p: u32) -> bool {
    for c in v.iter_mut() {
        *c += 1;
        if *c < p {
            return true;
        }
        *c = 0;
    }
    false
}

fn mat_vec(m: &Matrix, v: &[u32], p: u32) -> Vec<u32> {
    m.iter()
        .map(|row| (row.iter().zip(v).map(|(&a, &b)| a as u64 * b as u64).sum::<u64>() % p as u64) as u32)
        .collect()
}

fn poly_certificate(d: &Laurent) -> serde_json::Value {
    json!({ "det": { "low": d.low, "coeffs": d.coeffs }, "det_text": d.to_string() })
}

/// Surjectivity iff `det M(X) ≠ 0`; injectivity iff it is a monomial.
pub fn decide_surj_inj_linear(m: &MatrixRule) -> (Verdict, Verdict) {
    let d = m.det();
    let cert = poly_certificate(&d);
    (
        Verdict::from_bool(!d.is_zero(), Method::LeafFormula, cert.clone()),
        Verdict::from_bool(d.is_monomial(), Method::LeafFormula, cert),
    )
}

/// Rank of a set of vectors over `Z_p`, by elimination.
fn row_reduce(rows: &mut Vec<Vec<u32>>, p: u32) -> usize {
    let p64 = p as u64;
    let width = rows.first().map_or(0, |r| r.len());
    let mut rank = 0;
    for col in 0..width {
        let Some(piv) = (rank..rows.len()).find(|&r| rows[r][col] != 0) else {
            continue;
        };
        rows.swap(rank, piv);
        let inv = mod_inverse(rows[rank][col], p);
        for c in rows[rank].iter_mut() {
            *c = ((*c as u64 * inv as u64) % p64) as u32;
        }
        for r in 0..rows.len() {
            if r != rank && rows[r][col] != 0 {
                let f = rows[r][col] as u64;
                for c in 0..width {
                    rows[r][c] = ((rows[r][c] as u64 + (p64 - f) * rows[rank][c] as u64) % p64) as u32;
                }
            }
        }
        rank += 1;
    }
    rows.truncate(rank);
    rank
}

fn mod_inverse(a: u32, p: u32) -> u32 {
    let mut r = 1u64;
    let (mut b, mut e) = (a as u64, p as u64 - 2);
    while e > 0 {
        if e & 1 == 1 {
            r = r * b % p as u64;
        }
        b = b * b % p as u64;
        e >>= 1;
    }
    r as u32
}

/// Smallest subspace containing `v` and closed under every `H_i`, as a reduced basis.
fn invariant_closure(m: &MatrixRule, v: Vec<u32>) -> Vec<Vec<u32>> {
    let mut span = vec![v];
    row_reduce(&mut span, m.p);
    let mut frontier = span.clone();
    while let Some(w) = frontier.pop() {
        for h in m.coeffs.values() {
            let img = mat_vec(h, &w, m.p);
            let mut test = span.clone();
            test.push(img.clone());
            if row_reduce(&mut test, m.p) > span.len() {
                span = test;
                frontier.push(img);
            }
        }
    }
    span
}

/// A split of `(Z_p)^k` along a common invariant subspace.
#[derive(Debug, Clone)]
pub struct Refinement {
    /// Reduced basis of the invariant subspace `W`.
    pub subspace: Vec<Vec<u32>>,
    /// `W` as a subgroup of the leaf group.
    pub subgroup: Subgroup,
    pub sub: MatrixRule,
    pub quotient: MatrixRule,
}

const REFINEMENT_SEARCH: usize = 1 << 16;

/// Finds a proper nonzero subspace invariant under all coefficient matrices.
///
/// Every vector is tried when `p^k` is small, otherwise only the basis
/// vectors, so `None` is exact only in the first case.
pub fn invariant_subspace_refinement(m: &MatrixRule) -> Option<Refinement> {
    if m.k <= 1 {
        return None;
    }
    let exhaustive = (m.p as usize).checked_pow(m.k as u32).is_some_and(|n| n <= REFINEMENT_SEARCH);
    let mut candidates: Vec<Vec<u32>> = (0..m.k)
        .map(|j| (0..m.k).map(|i| (i == j) as u32).collect())
        .collect();
    if exhaustive {
        let mut v = vec![0u32; m.k];
        while increment(&mut v, m.p) {
            // One representative per line: first nonzero entry equal to 1.
            if v.iter().find(|&&c| c != 0) == Some(&1) {
                candidates.push(v.clone());
            }
        }
    }
    for v in candidates {
        let w = invariant_closure(m, v);
        if w.len() < m.k {
            return Some(build_refinement(m, w));
        }
    }
    None
}

fn build_refinement(m: &MatrixRule, w: Vec<Vec<u32>>) -> Refinement {
    let mut members: Vec<Elem> = Vec::new();
    let mut c = vec![0u32; w.len()];
    loop {
        let mut v = vec![0u32; m.k];
        for (coef, row) in c.iter().zip(&w) {
            for (x, &r) in v.iter_mut().zip(row) {
                *x = (*x + coef * r) % m.p;
            }
        }
        members.push(m.element(&v));
        if !increment(&mut c, m.p) {
            break;
        }
    }
    members.sort_unstable();
    let subgroup = Subgroup::from_members(members);
    let sub_rule = m.rule.restrict(&subgroup).expect("invariant subspace");
    let (quot_rule, _) = m.rule.quotient_gca(&subgroup).expect("invariant subspace");
    Refinement {
        subspace: w,
        subgroup,
        sub: to_matrix_rule(&sub_rule).expect("subspace is elementary abelian"),
        quotient: to_matrix_rule(&quot_rule).expect("quotient is elementary abelian"),
    }
}

/// Sensitivity of a linear rule: `True` sensitive, `False` equicontinuous.
///
/// For `k > 1` an equicontinuous rule has all powers in the algebra `Z_p[M]`,
/// which has at most `p^k` elements, so a repeat must appear among the first
/// `p^k + 1` powers. When that many powers fit the budget, the absence of a
/// repeat certifies sensitivity.
pub fn decide_sensitivity_linear(m: &MatrixRule, power_budget: usize) -> Verdict {
    if m.k == 1 {
        let sensitive = m.coeffs.iter().any(|(&i, h)| i != 0 && h[0][0] != 0);
        return Verdict::from_bool(
            sensitive,
            Method::LeafFormula,
            json!({ "rank": 1, "nonzero_offsets": nonzero_offsets(m) }),
        );
    }
    if let Some(r) = invariant_subspace_refinement(m) {
        let a = decide_sensitivity_linear(&r.sub, power_budget);
        let b = decide_sensitivity_linear(&r.quotient, power_budget);
        let value = a.value.or(b.value);
        return Verdict::new(
            value,
            Method::Decomposition,
            json!({ "subspace": r.subspace, "subgroup": a, "quotient": b }),
        );
    }
    let d = m.det();
    if d.spread() > 0 {
        return Verdict::new(
            Truth::True,
            Method::LeafFormula,
            json!({ "det_spread": d.spread(), "det_text": d.to_string() }),
        );
    }
    let bound = (m.p as usize).checked_pow(m.k as u32).map(|n| n + 1);
    let limit = bound.map_or(power_budget, |b| b.min(power_budget));
    let scan = power_scan(m, limit);
    match (scan.repeat, bound) {
        (Some((start, period)), _) => Verdict::new(
            Truth::False,
            Method::LeafFormula,
            json!({ "repeat": { "start": start, "period": period }, "radii": scan.radii }),
        ),
        (None, Some(b)) if b <= power_budget => Verdict::new(
            Truth::True,
            Method::Extension,
            json!({ "no_repeat_within": b, "radii": scan.radii }),
        ),
        _ => Verdict::unknown(
            Method::Extension,
            json!({ "budget": power_budget, "radii": scan.radii }),
        ),
    }
}

fn nonzero_offsets(m: &MatrixRule) -> Vec<i64> {
    m.coeffs
        .iter()
        .filter(|(_, h)| h.iter().flatten().any(|&c| c != 0))
        .map(|(&i, _)| i)
        .collect()
}

/// Powers `M^1, …, M^limit` with their radii and the first repeat.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PowerScan {
    pub radii: Vec<usize>,
    /// `(start, period)` with `M^start = M^(start+period)`.
    pub repeat: Option<(usize, usize)>,
}

pub fn power_scan(m: &MatrixRule, limit: usize) -> PowerScan {
    let base = m.poly_matrix();
    let mut seen: HashMap<Vec<Vec<Laurent>>, usize> = HashMap::new();
    let mut radii = Vec::new();
    let mut cur = base.clone();
    for n in 1..=limit {
        radii.push(poly_radius(&cur));
        if let Some(&s) = seen.get(&cur) {
            return PowerScan { radii, repeat: Some((s, n - s)) };
        }
        seen.insert(cur.clone(), n);
        cur = poly_mat_mul(&cur, &base, m.p);
    }
    PowerScan { radii, repeat: None }
}

fn poly_radius(m: &[Vec<Laurent>]) -> usize {
    m.iter()
        .flatten()
        .filter_map(|e| e.degree_range())
        .map(|(l, h)| l.unsigned_abs().max(h.unsigned_abs()) as usize)
        .max()
        .unwrap_or(0)
}

fn poly_mat_mul(a: &[Vec<Laurent>], b: &[Vec<Laurent>], p: u32) -> Vec<Vec<Laurent>> {
    let k = a.len();
    (0..k)
        .map(|r| {
            (0..k)
                .map(|c| (0..k).fold(Laurent::zero(p), |acc, j| acc.add(&a[r][j].mul(&b[j][c]))))
                .collect()
        })
        .collect()
}

/// Entropy of a nonzero rank-1 rule as a multiple of `log p`.
pub fn entropy_linear_k1(m: &MatrixRule) -> Result<(i64, u32), AbelianError> {
    assert_eq!(m.k, 1, "rank-1 rule expected");
    let (lo, hi) = m.support().ok_or(AbelianError::NotSurjective)?;
    Ok((hi.max(0) - lo.min(0), m.p))
}

/// Topological transitivity of a linear rule, where decidable.
///
/// Rank 1: transitive iff some nonzero offset has a nonzero coefficient.
/// Higher rank: sufficiency through both parts of a refinement, necessity
/// through the quotient part, otherwise unknown.
pub fn decide_transitive_linear(m: &MatrixRule, power_budget: usize) -> Verdict {
    if m.k == 1 {
        let t = m.coeffs.iter().any(|(&i, h)| i != 0 && h[0][0] != 0);
        return Verdict::from_bool(t, Method::LeafFormula, json!({ "nonzero_offsets": nonzero_offsets(m) }));
    }
    let (surj, _) = decide_surj_inj_linear(m);
    if surj.is_false() {
        return Verdict::new(Truth::False, Method::LeafFormula, json!({ "not_surjective": surj.certificate }));
    }
    let sens = decide_sensitivity_linear(m, power_budget);
    if sens.is_false() {
        return Verdict::new(Truth::False, Method::LeafFormula, json!({ "equicontinuous": sens.certificate }));
    }
    if let Some(r) = invariant_subspace_refinement(m) {
        let a = decide_transitive_linear(&r.sub, power_budget);
        let b = decide_transitive_linear(&r.quotient, power_budget);
        let value = if b.is_false() {
            Truth::False
        } else if a.is_true() && b.is_true() {
            Truth::True
        } else {
            Truth::Unknown
        };
        return Verdict::new(
            value,
            Method::Decomposition,
            json!({ "subspace": r.subspace, "subgroup": a, "quotient": b }),
        );
    }
    Verdict::unknown(Method::LeafFormula, json!({ "irreducible_rank": m.k }))
}

/// Entropy as `(coefficient, p)` pairs, `None` when some part is irreducible of rank > 1.
pub fn entropy_linear(m: &MatrixRule) -> Option<Vec<(i64, u32)>> {
    if m.k == 1 {
        return Some(match entropy_linear_k1(m) {
            Ok(t) => vec![t],
            Err(_) => vec![],
        });
    }
    if m.is_zero() {
        return Some(vec![]);
    }
    let r = invariant_subspace_refinement(m)?;
    let mut terms = entropy_linear(&r.sub)?;
    terms.extend(entropy_linear(&r.quotient)?);
    Some(terms)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gca::validate_rule;
    use crate::group::library::*;
    use std::sync::Arc;

    fn rule(g: crate::group::FiniteGroup, radius: usize, maps: &[(i64, Vec<Elem>)]) -> LocalRule {
        let maps: BTreeMap<i64, Vec<Elem>> = maps.iter().cloned().collect();
        validate_rule(Arc::new(g), radius, &maps).unwrap()
    }

    fn v4_matrix_rule(maps: &[(i64, [[u32; 2]; 2])], p: usize) -> MatrixRule {
        let g = elementary_abelian(p, 2);
        let probe = to_matrix_rule(&LocalRule::identity(Arc::new(g.clone()))).unwrap();
        let radius = maps.iter().map(|(i, _)| i.unsigned_abs() as usize).max().unwrap_or(0);
        let endo_maps: Vec<(i64, Vec<Elem>)> = maps
            .iter()
            .map(|(i, h)| {
                let m: Matrix = h.iter().map(|r| r.to_vec()).collect();
                let map = g
                    .elements()
                    .map(|x| probe.element(&mat_vec(&m, probe.coords(x), p as u32)))
                    .collect();
                (*i, map)
            })
            .collect();
        to_matrix_rule(&rule(g, radius, &endo_maps)).unwrap()
    }

    #[test]
    fn scalar_rules() {
        let xor = rule(cyclic(2), 1, &[(-1, vec![0, 1]), (1, vec![0, 1])]);
        let m = to_matrix_rule(&xor).unwrap();
        assert_eq!((m.p, m.k), (2, 1));
        assert_eq!(m.coeffs[&-1], vec![vec![1]]);
        assert_eq!(m.coeffs[&1], vec![vec![1]]);
        let (s, i) = decide_surj_inj_linear(&m);
        assert!(s.is_true() && i.is_false());
        assert_eq!(m.det().to_string(), "X^-1 + X");
        assert!(decide_sensitivity_linear(&m, 256).is_true());
        assert_eq!(entropy_linear_k1(&m).unwrap(), (2, 2));

        let sigma = to_matrix_rule(&LocalRule::shift(Arc::new(cyclic(5)), 1)).unwrap();
        assert_eq!(sigma.coeffs[&-1], vec![vec![1]]);
        let (s, i) = decide_surj_inj_linear(&sigma);
        assert!(s.is_true() && i.is_true());
        assert_eq!(entropy_linear_k1(&sigma).unwrap(), (1, 5));

        let zero = to_matrix_rule(&rule(cyclic(3), 0, &[])).unwrap();
        assert!(decide_surj_inj_linear(&zero).0.is_false());
        assert!(entropy_linear_k1(&zero).is_err());

        let scale = to_matrix_rule(&rule(cyclic(5), 0, &[(0, vec![0, 3, 1, 4, 2])])).unwrap();
        assert!(decide_sensitivity_linear(&scale, 256).is_false());
        assert_eq!(entropy_linear_k1(&scale).unwrap(), (0, 5));
    }

    #[test]
    fn shift_entropy_is_offset_times_log_p() {
        for r in -3i64..=3 {
            let m = to_matrix_rule(&LocalRule::shift(Arc::new(cyclic(3)), r)).unwrap();
            assert_eq!(entropy_linear_k1(&m).unwrap(), (r.abs(), 3));
        }
    }

    #[test]
    fn swap_on_z3_squared() {
        let m = v4_matrix_rule(&[(0, [[0, 1], [1, 0]])], 3);
        assert_eq!(m.coeffs[&0], vec![vec![0, 1], vec![1, 0]]);
        // The swap fixes the diagonal.
        let r = invariant_subspace_refinement(&m).unwrap();
        assert_eq!(r.subgroup.len(), 3);
        assert!(decide_sensitivity_linear(&m, 256).is_false());
        assert!(decide_surj_inj_linear(&m).1.is_true());
    }

    #[test]
    fn unipotent_example_is_equicontinuous() {
        let m = v4_matrix_rule(&[(0, [[1, 1], [0, 1]]), (1, [[0, 1], [0, 0]])], 2);
        let scan = power_scan(&m, 8);
        assert_eq!(scan.repeat, Some((1, 2)));
        assert!(decide_sensitivity_linear(&m, 256).is_false());
    }

    #[test]
    fn irreducible_rules() {
        // [[X,1],[1,0]] over Z_2 has constant determinant and no invariant line.
        let fib = v4_matrix_rule(&[(0, [[0, 1], [1, 0]]), (1, [[1, 0], [0, 0]])], 2);
        assert!(invariant_subspace_refinement(&fib).is_none());
        assert_eq!(fib.det().spread(), 0);
        let v = decide_sensitivity_linear(&fib, 256);
        assert!(v.is_true());
        assert_eq!(v.method, Method::Extension);
        assert!(decide_sensitivity_linear(&fib, 4).is_unknown());
        assert!(entropy_linear(&fib).is_none());

        // Order-3 rotation of (Z_2)^2: irreducible and periodic.
        let rot = v4_matrix_rule(&[(0, [[0, 1], [1, 1]])], 2);
        assert!(invariant_subspace_refinement(&rot).is_none());
        assert!(decide_sensitivity_linear(&rot, 256).is_false());
    }

    #[test]
    fn triangular_rules_split() {
        let m = v4_matrix_rule(&[(-1, [[1, 1], [0, 0]]), (0, [[0, 0], [0, 1]])], 2);
        let r = invariant_subspace_refinement(&m).unwrap();
        assert_eq!(r.subspace, vec![vec![1, 0]]);
        assert_eq!(entropy_linear(&m).unwrap(), vec![(1, 2), (0, 2)]);
        assert!(decide_sensitivity_linear(&m, 256).is_true());
        assert!(decide_transitive_linear(&m, 256).is_false());
    }
}
