use super::factor::all_subgroups;
use super::{Budgets, Elem, FiniteGroup, GroupError, Subgroup};

const UNSET: Elem = Elem::MAX;

/// Extends generator images to a map on `⟨gens⟩`, or `None` if the
/// assignment is not a homomorphism there.
fn extend(dom: &FiniteGroup, cod: &FiniteGroup, gens: &[Elem], imgs: &[Elem]) -> Option<Vec<Elem>> {
    let mut map = vec![UNSET; dom.order()];
    map[0] = 0;
    let mut queue = vec![0 as Elem];
    let mut i = 0;
    while i < queue.len() {
        let x = queue[i];
        let fx = map[x as usize];
        for (&s, &t) in gens.iter().zip(imgs) {
            let y = dom.mul(x, s);
            let v = cod.mul(fx, t);
            match map[y as usize] {
                UNSET => {
                    map[y as usize] = v;
                    queue.push(y);
                }
                w if w != v => return None,
                _ => {}
            }
        }
        i += 1;
    }
    Some(map)
}

fn search(
    dom: &FiniteGroup,
    cod: &FiniteGroup,
    gens: &[Elem],
    cands: &[Vec<Elem>],
    injective: bool,
    first_only: bool,
    imgs: &mut Vec<Elem>,
    out: &mut Vec<Vec<Elem>>,
) {
    let l = imgs.len();
    for &c in &cands[l] {
        imgs.push(c);
        if let Some(map) = extend(dom, cod, &gens[..=l], imgs) {
            let ok = !injective || {
                let mut seen = vec![false; cod.order()];
                map.iter()
                    .filter(|&&y| y != UNSET)
                    .all(|&y| !std::mem::replace(&mut seen[y as usize], true))
            };
            if ok {
                if l + 1 == gens.len() {
                    out.push(map);
                } else {
                    search(dom, cod, gens, cands, injective, first_only, imgs, out);
                }
            }
        }
        imgs.pop();
        if first_only && !out.is_empty() {
            return;
        }
    }
}

/// All endomorphisms of `g`, sorted by their map arrays.
pub fn enumerate_endomorphisms(g: &FiniteGroup, budget: usize) -> Result<Vec<Vec<Elem>>, GroupError> {
    if g.order() > budget {
        return Err(GroupError::BudgetExceeded { order: g.order(), budget });
    }
    let gens = g.generators().to_vec();
    if gens.is_empty() {
        return Ok(vec![vec![0]]);
    }
    let orders: Vec<usize> = g.elements().map(|a| g.elem_order(a)).collect();
    let cands: Vec<Vec<Elem>> = gens
        .iter()
        .map(|&s| {
            let o = orders[s as usize];
            g.elements().filter(|&y| o % orders[y as usize] == 0).collect()
        })
        .collect();
    let mut out = Vec::new();
    search(g, g, &gens, &cands, false, false, &mut Vec::new(), &mut out);
    out.sort();
    Ok(out)
}

pub fn is_fully_invariant(h: &Subgroup, endos: &[Vec<Elem>]) -> bool {
    endos
        .iter()
        .all(|f| h.members().iter().all(|&x| h.contains(f[x as usize])))
}

/// Subgroups mapped into themselves by every endomorphism, in subgroup order.
pub fn fully_invariant_subgroups(g: &FiniteGroup, budgets: &Budgets) -> Result<Vec<Subgroup>, GroupError> {
    let endos = enumerate_endomorphisms(g, budgets.endo)?;
    let subs = all_subgroups(g, budgets.subgroup)?;
    Ok(subs.into_iter().filter(|h| is_fully_invariant(h, &endos)).collect())
}

/// An explicit isomorphism `g1 → g2`, if one exists.
pub fn are_isomorphic(
    g1: &FiniteGroup,
    g2: &FiniteGroup,
    budget: usize,
) -> Result<Option<Vec<Elem>>, GroupError> {
    if g1.order() != g2.order() {
        return Ok(None);
    }
    if g1.order() > budget {
        return Err(GroupError::BudgetExceeded { order: g1.order(), budget });
    }
    if g1.order_profile() != g2.order_profile() || g1.is_abelian() != g2.is_abelian() {
        return Ok(None);
    }
    let gens = g1.generators().to_vec();
    if gens.is_empty() {
        return Ok(Some(vec![0]));
    }
    let orders2: Vec<usize> = g2.elements().map(|a| g2.elem_order(a)).collect();
    let cands: Vec<Vec<Elem>> = gens
        .iter()
        .map(|&s| {
            let o = g1.elem_order(s);
            g2.elements().filter(|&y| orders2[y as usize] == o).collect()
        })
        .collect();
    let mut out = Vec::new();
    search(g1, g2, &gens, &cands, true, true, &mut Vec::new(), &mut out);
    Ok(out.into_iter().next())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::library::*;
    use crate::group::{commutator_subgroup, is_homomorphism};

    /// Every map `G → G` filtered by the homomorphism law, with early exit.
    fn brute_force_endos(g: &FiniteGroup) -> Vec<Vec<Elem>> {
        let n = g.order();
        let mut out = Vec::new();
        let mut map = vec![0 as Elem; n];
        loop {
            let ok = (0..n as Elem).all(|a| {
                (0..n as Elem).all(|b| map[g.mul(a, b) as usize] == g.mul(map[a as usize], map[b as usize]))
            });
            if ok {
                out.push(map.clone());
            }
            let mut i = 0;
            loop {
                if i == n {
                    out.sort();
                    return out;
                }
                map[i] += 1;
                if map[i] as usize == n {
                    map[i] = 0;
                    i += 1;
                } else {
                    break;
                }
            }
        }
    }

    #[test]
    fn endomorphism_counts() {
        assert_eq!(enumerate_endomorphisms(&cyclic(2), 256).unwrap().len(), 2);
        assert_eq!(enumerate_endomorphisms(&cyclic(4), 256).unwrap().len(), 4);
        assert_eq!(enumerate_endomorphisms(&symmetric(3), 256).unwrap().len(), 10);
    }

    #[test]
    fn matches_full_map_filter() {
        for g in [cyclic(2), cyclic(3), cyclic(4), klein_four(), cyclic(5), cyclic(6), symmetric(3)] {
            let fast = enumerate_endomorphisms(&g, 256).unwrap();
            assert_eq!(fast, brute_force_endos(&g), "{:?}", g.name());
            assert!(fast.iter().all(|f| is_homomorphism(&g, &g, f)));
        }
    }

    #[test]
    fn budget_is_enforced() {
        assert!(matches!(
            enumerate_endomorphisms(&symmetric(4), 10),
            Err(GroupError::BudgetExceeded { order: 24, budget: 10 })
        ));
    }

    #[test]
    fn fully_invariant_lists() {
        let b = Budgets::default();
        let s3 = symmetric(3);
        let lens: Vec<usize> = fully_invariant_subgroups(&s3, &b).unwrap().iter().map(|h| h.len()).collect();
        assert_eq!(lens, vec![1, 3, 6]);
        let z4: Vec<Vec<Elem>> = fully_invariant_subgroups(&cyclic(4), &b)
            .unwrap()
            .iter()
            .map(|h| h.members().to_vec())
            .collect();
        assert_eq!(z4, vec![vec![0], vec![0, 2], vec![0, 1, 2, 3]]);
        assert_eq!(fully_invariant_subgroups(&cyclic(7), &b).unwrap().len(), 2);
        let s4 = symmetric(4);
        let fi = fully_invariant_subgroups(&s4, &b).unwrap();
        assert!(fi.contains(&commutator_subgroup(&s4)));
    }

    #[test]
    fn isomorphisms() {
        assert!(are_isomorphic(&symmetric(3), &cyclic(6), 256).unwrap().is_none());
        let f = are_isomorphic(&cyclic(6), &direct_product(&cyclic(2), &cyclic(3)), 256)
            .unwrap()
            .unwrap();
        assert!(is_homomorphism(&cyclic(6), &direct_product(&cyclic(2), &cyclic(3)), &f));
        let d4 = dihedral(4);
        assert!(are_isomorphic(&d4, &d4, 256).unwrap().is_some());
        assert!(are_isomorphic(&d4, &quaternion(), 256).unwrap().is_none());
        assert!(are_isomorphic(&klein_four(), &cyclic(4), 256).unwrap().is_none());
    }
}
