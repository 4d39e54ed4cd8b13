//! Constructors for standard groups.

use std::collections::HashMap;
use std::sync::Arc;

use super::{Elem, FiniteGroup, GroupError};

pub fn trivial() -> FiniteGroup {
    FiniteGroup::from_parts(Some("1".into()), 1, vec![0], None)
}

pub fn cyclic(n: usize) -> FiniteGroup {
    assert!(n >= 1);
    let table = (0..n)
        .flat_map(|a| (0..n).map(move |b| ((a + b) % n) as Elem))
        .collect();
    FiniteGroup::from_parts(Some(format!("Z{n}")), n, table, None)
}

/// `G × H` with factor metadata retained. Element `(a, b)` has index `a·|H| + b`.
pub fn direct_product(g: &FiniteGroup, h: &FiniteGroup) -> FiniteGroup {
    let (n1, n2) = (g.order(), h.order());
    let n = n1 * n2;
    let mut table = Vec::with_capacity(n * n);
    for a1 in 0..n1 as Elem {
        for a2 in 0..n2 as Elem {
            let r1 = g.row(a1);
            let r2 = h.row(a2);
            for &c1 in r1 {
                for &c2 in r2 {
                    table.push(c1 * n2 as Elem + c2);
                }
            }
        }
    }
    let names = match (g.names(), h.names()) {
        (Some(x), Some(y)) => Some(
            x.iter()
                .flat_map(|a| y.iter().map(move |b| format!("({a},{b})")))
                .collect(),
        ),
        _ => None,
    };
    let name = format!(
        "{}x{}",
        g.name().unwrap_or("G"),
        h.name().unwrap_or("H")
    );
    let flat = |x: &FiniteGroup| -> Vec<Arc<FiniteGroup>> {
        match x.factors() {
            Some(f) => f.to_vec(),
            None => vec![Arc::new(x.clone())],
        }
    };
    let mut factors = flat(g);
    factors.extend(flat(h));
    FiniteGroup::from_parts(Some(name), n, table, names).with_factors(factors)
}

/// `G^m` with factor metadata.
pub fn power(g: &FiniteGroup, m: usize) -> FiniteGroup {
    assert!(m >= 1);
    let mut acc = g.clone();
    for _ in 1..m {
        acc = direct_product(&acc, g);
    }
    if m > 1 {
        acc = acc.with_name(format!("{}^{m}", g.name().unwrap_or("G")));
    }
    acc
}

pub fn elementary_abelian(p: usize, k: usize) -> FiniteGroup {
    let g = power(&cyclic(p), k);
    if k > 1 {
        g.with_name(format!("Z{p}^{k}"))
    } else {
        g
    }
}

pub fn klein_four() -> FiniteGroup {
    elementary_abelian(2, 2)
}

/// The group generated by permutations of `0..degree`, with `(a·b)(x) = a(b(x))`.
/// Elements are indexed in lexicographic order of their images, so the identity is 0.
pub fn from_permutations(gens: &[Vec<usize>], degree: usize) -> Result<FiniteGroup, GroupError> {
    if degree == 0 || degree > 64 {
        return Err(GroupError::BadPermutation(format!("degree {degree} not in 1..=64")));
    }
    for (i, p) in gens.iter().enumerate() {
        let mut seen = vec![false; degree];
        if p.len() != degree || p.iter().any(|&x| x >= degree || std::mem::replace(&mut seen[x], true)) {
            return Err(GroupError::BadPermutation(format!(
                "generator {i} is not a permutation of 0..{degree}"
            )));
        }
    }
    let id: Vec<u8> = (0..degree as u8).collect();
    let gens: Vec<Vec<u8>> = gens
        .iter()
        .map(|p| p.iter().map(|&x| x as u8).collect())
        .collect();
    let compose = |a: &[u8], b: &[u8]| -> Vec<u8> { b.iter().map(|&x| a[x as usize]).collect() };

    let mut index: HashMap<Vec<u8>, usize> = HashMap::new();
    let mut elems = vec![id.clone()];
    index.insert(id, 0);
    let mut i = 0;
    while i < elems.len() {
        for s in &gens {
            let y = compose(&elems[i], s);
            if !index.contains_key(&y) {
                index.insert(y.clone(), elems.len());
                elems.push(y);
            }
        }
        i += 1;
        if elems.len() > 1 << 22 {
            return Err(GroupError::BadPermutation("generated group is too large".into()));
        }
    }
    elems.sort();
    let n = elems.len();
    let index: HashMap<&[u8], Elem> = elems
        .iter()
        .enumerate()
        .map(|(i, p)| (p.as_slice(), i as Elem))
        .collect();

    // Right multiplication by each generator, then fill rows along a spanning tree.
    let right: Vec<Vec<Elem>> = gens
        .iter()
        .map(|s| elems.iter().map(|x| index[compose(x, s).as_slice()]).collect())
        .collect();
    let mut parent: Vec<Option<(Elem, usize)>> = vec![None; n];
    let mut order = vec![0 as Elem];
    let mut seen = vec![false; n];
    seen[0] = true;
    let mut k = 0;
    while k < order.len() {
        let x = order[k];
        for (gi, r) in right.iter().enumerate() {
            let y = r[x as usize];
            if !seen[y as usize] {
                seen[y as usize] = true;
                parent[y as usize] = Some((x, gi));
                order.push(y);
            }
        }
        k += 1;
    }
    let mut table = vec![0 as Elem; n * n];
    for a in 0..n {
        table[a * n] = a as Elem;
        for &b in &order[1..] {
            let (p, gi) = parent[b as usize].unwrap();
            let ap = table[a * n + p as usize];
            table[a * n + b as usize] = right[gi][ap as usize];
        }
    }
    Ok(FiniteGroup::from_parts(None, n, table, None))
}

pub fn symmetric(n: usize) -> FiniteGroup {
    assert!(n >= 1);
    if n == 1 {
        return trivial().with_name("S1");
    }
    let cycle: Vec<usize> = (0..n).map(|i| (i + 1) % n).collect();
    let mut swap: Vec<usize> = (0..n).collect();
    swap.swap(0, 1);
    from_permutations(&[cycle, swap], n)
        .unwrap()
        .with_name(format!("S{n}"))
}

pub fn alternating(n: usize) -> FiniteGroup {
    assert!(n >= 3);
    let gens: Vec<Vec<usize>> = (2..n)
        .map(|k| {
            let mut p: Vec<usize> = (0..n).collect();
            p[0] = 1;
            p[1] = k;
            p[k] = 0;
            p
        })
        .collect();
    from_permutations(&gens, n)
        .unwrap()
        .with_name(format!("A{n}"))
}

/// Dihedral group of order `2n` acting on an `n`-gon.
pub fn dihedral(n: usize) -> FiniteGroup {
    assert!(n >= 3);
    let rot: Vec<usize> = (0..n).map(|i| (i + 1) % n).collect();
    let refl: Vec<usize> = (0..n).map(|i| (n - i) % n).collect();
    from_permutations(&[rot, refl], n)
        .unwrap()
        .with_name(format!("D{n}"))
}

/// The quaternion group; element `2u + s` is `(-1)^s · u` for units `u ∈ {1,i,j,k}`.
pub fn quaternion() -> FiniteGroup {
    // unit products: (sign, unit)
    const M: [[(u8, u8); 4]; 4] = [
        [(0, 0), (0, 1), (0, 2), (0, 3)],
        [(0, 1), (1, 0), (0, 3), (1, 2)],
        [(0, 2), (1, 3), (1, 0), (0, 1)],
        [(0, 3), (0, 2), (1, 1), (1, 0)],
    ];
    let mut table = Vec::with_capacity(64);
    for a in 0..8u8 {
        for b in 0..8u8 {
            let (ua, sa) = (a / 2, a % 2);
            let (ub, sb) = (b / 2, b % 2);
            let (s, u) = M[ua as usize][ub as usize];
            table.push((2 * u + (s + sa + sb) % 2) as Elem);
        }
    }
    let names = ["1", "-1", "i", "-i", "j", "-j", "k", "-k"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    FiniteGroup::from_parts(Some("Q8".into()), 8, table, Some(names))
}
