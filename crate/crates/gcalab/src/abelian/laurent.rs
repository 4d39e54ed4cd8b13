use std::fmt;

use serde::{Deserialize, Serialize};

/// A Laurent polynomial `Σ coeffs[j]·X^(low+j)` over the field with `p` elements.
///
/// Always normalized: no zero coefficient at either end, and the zero
/// polynomial has no coefficients and `low = 0`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Laurent {
    pub p: u32,
    pub low: i64,
    pub coeffs: Vec<u32>,
}

impl Laurent {
    pub fn zero(p: u32) -> Self {
        Laurent { p, low: 0, coeffs: Vec::new() }
    }

    pub fn monomial(p: u32, c: u32, exp: i64) -> Self {
        Laurent { p, low: exp, coeffs: vec![c % p] }.normalized()
    }

    pub fn constant(p: u32, c: u32) -> Self {
        Self::monomial(p, c, 0)
    }

    fn normalized(mut self) -> Self {
        while self.coeffs.last() == Some(&0) {
            self.coeffs.pop();
        }
        let lead = self.coeffs.iter().take_while(|&&c| c == 0).count();
        self.coeffs.drain(..lead);
        self.low = if self.coeffs.is_empty() { 0 } else { self.low + lead as i64 };
        self
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// `c·X^s` with `c ≠ 0`.
    pub fn is_monomial(&self) -> bool {
        self.coeffs.len() == 1
    }

    /// Lowest and highest exponent, `None` for zero.
    pub fn degree_range(&self) -> Option<(i64, i64)> {
        (!self.is_zero()).then(|| (self.low, self.low + self.coeffs.len() as i64 - 1))
    }

    /// Degree span `high − low`; zero for the zero polynomial.
    pub fn spread(&self) -> i64 {
        self.degree_range().map_or(0, |(l, h)| h - l)
    }

    pub fn coeff(&self, exp: i64) -> u32 {
        let j = exp - self.low;
        if j < 0 {
            0
        } else {
            self.coeffs.get(j as usize).copied().unwrap_or(0)
        }
    }

    pub fn add(&self, other: &Laurent) -> Laurent {
        if self.is_zero() {
            return other.clone();
        }
        if other.is_zero() {
            return self.clone();
        }
        let p = self.p;
        let low = self.low.min(other.low);
        let high = (self.low + self.coeffs.len() as i64).max(other.low + other.coeffs.len() as i64);
        let coeffs = (low..high).map(|e| (self.coeff(e) + other.coeff(e)) % p).collect();
        Laurent { p, low, coeffs }.normalized()
    }

    pub fn neg(&self) -> Laurent {
        let p = self.p;
        Laurent { p, low: self.low, coeffs: self.coeffs.iter().map(|&c| (p - c) % p).collect() }
            .normalized()
    }

    pub fn sub(&self, other: &Laurent) -> Laurent {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &Laurent) -> Laurent {
        if self.is_zero() || other.is_zero() {
            return Laurent::zero(self.p);
        }
        let p = self.p as u64;
        let mut coeffs = vec![0u64; self.coeffs.len() + other.coeffs.len() - 1];
        for (i, &a) in self.coeffs.iter().enumerate() {
            for (j, &b) in other.coeffs.iter().enumerate() {
                coeffs[i + j] = (coeffs[i + j] + a as u64 * b as u64) % p;
            }
        }
        Laurent { p: self.p, low: self.low + other.low, coeffs: coeffs.into_iter().map(|c| c as u32).collect() }
            .normalized()
    }
}

impl fmt::Display for Laurent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (j, &c) in self.coeffs.iter().enumerate() {
            if c == 0 {
                continue;
            }
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            let e = self.low + j as i64;
            match (c, e) {
                (_, 0) => write!(f, "{c}")?,
                (1, 1) => write!(f, "X")?,
                (1, _) => write!(f, "X^{e}")?,
                (_, 1) => write!(f, "{c}X")?,
                _ => write!(f, "{c}X^{e}")?,
            }
        }
        Ok(())
    }
}

/// Determinant of a square matrix of Laurent polynomials by cofactor expansion.
pub fn determinant(m: &[Vec<Laurent>], p: u32) -> Laurent {
    let k = m.len();
    if k == 0 {
        return Laurent::constant(p, 1);
    }
    let cols: Vec<usize> = (0..k).collect();
    det_minor(m, 0, &cols, p)
}

fn det_minor(m: &[Vec<Laurent>], row: usize, cols: &[usize], p: u32) -> Laurent {
    if cols.len() == 1 {
        return m[row][cols[0]].clone();
    }
    let mut acc = Laurent::zero(p);
    for (j, &c) in cols.iter().enumerate() {
        if m[row][c].is_zero() {
            continue;
        }
        let rest: Vec<usize> = cols.iter().copied().filter(|&x| x != c).collect();
        let term = m[row][c].mul(&det_minor(m, row + 1, &rest, p));
        acc = if j % 2 == 0 { acc.add(&term) } else { acc.sub(&term) };
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn arithmetic() {
        let x = Laurent::monomial(2, 1, 1);
        let xi = Laurent::monomial(2, 1, -1);
        let s = x.add(&xi);
        assert_eq!(s.degree_range(), Some((-1, 1)));
        assert_eq!(s.to_string(), "X^-1 + X");
        assert!(s.add(&s).is_zero());
        let sq = s.mul(&s);
        assert_eq!(sq, Laurent::monomial(2, 1, -2).add(&Laurent::monomial(2, 1, 2)));
        assert!(x.mul(&xi).is_monomial());
        assert_eq!(Laurent::constant(3, 1).neg(), Laurent::constant(3, 2));
    }

    #[test]
    fn determinant_of_two_by_two() {
        let p = 2;
        let x = Laurent::monomial(p, 1, 1);
        let one = Laurent::constant(p, 1);
        let zero = Laurent::zero(p);
        let m = vec![vec![x.clone(), one.clone()], vec![one.clone(), zero.clone()]];
        assert_eq!(determinant(&m, p), one);
        let u = vec![vec![one.clone(), one.add(&x)], vec![zero, one.clone()]];
        assert_eq!(determinant(&u, p), one);
    }
}
