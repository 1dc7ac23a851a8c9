//! Clifford word basis `c(ω^I) ĉ(ω^J)` of `End(Λ*)`, Clifford degrees, and the
//! total-degree calculus on polynomial differential operators.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::exterior::{
    basis_order, basis_position, check_dim, ext_op, hodge_op, word_op, word_sign, word_signed_perm,
    DiffForm, FiberOp, MultiIndex, WordKind,
};
use crate::scalar::Scalar;

/// Coefficients `φ_{IJ}` of `M = Σ φ_{IJ} c(ω^I) ĉ(ω^J)`.
#[derive(Clone, Debug, PartialEq)]
pub struct CliffordWordExpansion<T> {
    pub n: usize,
    pub coefficients: BTreeMap<(MultiIndex, MultiIndex), T>,
}

impl<T: Scalar> CliffordWordExpansion<T> {
    pub fn coefficient(&self, i: MultiIndex, j: MultiIndex) -> T {
        self.coefficients.get(&(i, j)).cloned().unwrap_or_else(T::zero)
    }

    /// Keep only terms with `|I|` in the given range.
    pub fn filtered(&self, keep: impl Fn(MultiIndex, MultiIndex) -> bool) -> Self {
        CliffordWordExpansion {
            n: self.n,
            coefficients: self
                .coefficients
                .iter()
                .filter(|((i, j), _)| keep(*i, *j))
                .map(|(k, v)| (*k, v.clone()))
                .collect(),
        }
    }
}

fn require_rank_one<T: Scalar>(m: &FiberOp<T>) -> Result<()> {
    if m.rank() != 1 {
        return Err(Error::RankNotOne(m.rank()));
    }
    Ok(())
}

/// Expand a rank-1 fiber operator in the word basis. Words are signed
/// permutation matrices that are orthogonal for `Tr(Aᵀ B)` with norm `2^n`.
pub fn expand_clifford_basis<T: Scalar>(m: &FiberOp<T>) -> Result<CliffordWordExpansion<T>> {
    require_rank_one(m)?;
    let n = m.n();
    let order = basis_order(n);
    let scale = T::from_ratio(1, 1i64 << n);
    let mut coefficients: BTreeMap<(MultiIndex, MultiIndex), T> = BTreeMap::new();
    for (row, col, v) in m.matrix().entries() {
        if v.is_zero() {
            continue;
        }
        let (target, source) = (order[row], order[col]);
        let k = target ^ source;
        for i in 0..(1u32 << n) {
            let i = MultiIndex::from_mask(i as u16);
            let j = MultiIndex::from_mask(i.mask() ^ k);
            let s = word_sign(i, j, source);
            let slot = coefficients.entry((i, j)).or_insert_with(T::zero);
            *slot = slot.clone() + T::from_i64(s as i64) * v.clone() * scale.clone();
        }
    }
    coefficients.retain(|_, v| !v.is_zero());
    Ok(CliffordWordExpansion { n, coefficients })
}

/// `Σ φ_{IJ} c(ω^I) ĉ(ω^J)`.
pub fn reconstruct<T: Scalar>(e: &CliffordWordExpansion<T>) -> FiberOp<T> {
    let n = e.n;
    let mut out = FiberOp::zero(n, 1);
    let mut acc = crate::linalg::Matrix::zeros(1 << n, 1 << n);
    for ((i, j), c) in &e.coefficients {
        let k = i.mask() ^ j.mask();
        for s in 0..(1u32 << n) {
            let s = s as u16;
            let row = basis_position(n, MultiIndex::from_mask(s ^ k));
            let col = basis_position(n, MultiIndex::from_mask(s));
            acc.add_at(row, col, T::from_i64(word_sign(*i, *j, s) as i64) * c.clone());
        }
    }
    if let Ok(op) = FiberOp::from_matrix(n, 1, acc) {
        out = op;
    }
    out
}

/// `tr c(ω^I) ĉ(ω^J)` over `Λ*(R^n)`.
pub fn word_trace(n: usize, i: MultiIndex, j: MultiIndex) -> Result<i64> {
    check_dim(n)?;
    Ok(word_signed_perm(n, i, j).trace())
}

/// Gram check: the `4^n` words are pairwise orthogonal with norm `2^n`.
/// Words with different `I △ J` have disjoint supports, so only classes are compared.
pub fn words_orthogonal(n: usize) -> Result<bool> {
    check_dim(n)?;
    let size = 1usize << n;
    let limbs = size.div_ceil(64);
    for k in 0..size as u16 {
        // sign vector of each word in the class as a bitset of negative entries
        let signs: Vec<Vec<u64>> = (0..size as u16)
            .map(|i| {
                let i = MultiIndex::from_mask(i);
                let j = MultiIndex::from_mask(i.mask() ^ k);
                let mut bits = vec![0u64; limbs];
                for s in 0..size {
                    if word_sign(i, j, s as u16) < 0 {
                        bits[s / 64] |= 1 << (s % 64);
                    }
                }
                bits
            })
            .collect();
        for a in 0..size {
            for b in a..size {
                let differ: u32 = signs[a]
                    .iter()
                    .zip(&signs[b])
                    .map(|(x, y)| (x ^ y).count_ones())
                    .sum();
                let dot = size as i64 - 2 * differ as i64;
                let expected = if a == b { size as i64 } else { 0 };
                if dot != expected {
                    return Ok(false);
                }
            }
        }
    }
    Ok(true)
}

/// `(min |I|, max |I|)` over nonzero word coefficients.
pub fn clifford_degrees<T: Scalar>(m: &FiberOp<T>) -> Result<(usize, usize)> {
    let e = expand_clifford_basis(m)?;
    degrees_of(&e)
}

fn degrees_of<T: Scalar>(e: &CliffordWordExpansion<T>) -> Result<(usize, usize)> {
    let live = e
        .coefficients
        .iter()
        .filter(|(_, v)| !v.is_negligible(1e-12))
        .map(|((i, _), _)| i.len());
    let (mut lo, mut hi) = (usize::MAX, 0);
    for d in live {
        lo = lo.min(d);
        hi = hi.max(d);
    }
    if lo == usize::MAX {
        Err(Error::ZeroOperator)
    } else {
        Ok((lo, hi))
    }
}

/// `(*e(w), −c(dvol) e(w))` on `Λ*(R^n)`.
pub fn bridge_operators<T: Scalar>(w: &DiffForm<T>) -> Result<(FiberOp<T>, FiberOp<T>)> {
    let n = w.n();
    let e = ext_op(w, 1)?;
    let star = hodge_op::<T>(n)?.compose(&e)?;
    let cliff = word_op::<T>(n, MultiIndex::full(n), WordKind::C)?
        .compose(&e)?
        .scale(&-T::one());
    Ok((star, cliff))
}

/// `Σ_{a ∈ Λ^k} (X M)_{aa}`: the trace of `X M` over the degree-`k` block.
pub fn degree_block_trace<T: Scalar>(x: &FiberOp<T>, m: &FiberOp<T>, k: usize) -> Result<T> {
    require_rank_one(x)?;
    require_rank_one(m)?;
    let n = x.n();
    let rows: Vec<usize> = crate::exterior::degree_basis(n, k)
        .into_iter()
        .map(|i| basis_position(n, i))
        .collect();
    let dim = 1usize << n;
    let mut acc = T::zero();
    for &a in &rows {
        for b in 0..dim {
            let xa = x.matrix().get(a, b);
            if xa.is_zero() {
                continue;
            }
            let mb = m.matrix().get(b, a);
            if !mb.is_zero() {
                acc = acc + xa.clone() * mb.clone();
            }
        }
    }
    Ok(acc)
}

/// Multi-index over at most 8 coordinates.
pub type Exponent = [u8; 8];

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Truncation {
    pub max_poly: usize,
    pub max_deriv: usize,
}

/// `Σ b_{J,I} x^I ∂^J`, each term with the multiplication applied after the derivative.
#[derive(Clone, Debug, PartialEq)]
pub struct PolyDiffOp<T> {
    pub n: usize,
    pub truncation: Truncation,
    /// Keyed by `(J, I)`: derivative exponent, then polynomial exponent.
    pub terms: BTreeMap<(Exponent, Exponent), FiberOp<T>>,
}

fn order(e: &Exponent) -> usize {
    e.iter().map(|&x| x as usize).sum()
}

fn falling(k: u8, m: u8) -> i64 {
    (0..m).map(|i| (k - i) as i64).product()
}

fn binomial(n: u8, k: u8) -> i64 {
    falling(n, k) / falling(k, k)
}

impl<T: Scalar> PolyDiffOp<T> {
    pub fn zero(n: usize, truncation: Truncation) -> Self {
        PolyDiffOp {
            n,
            truncation,
            terms: BTreeMap::new(),
        }
    }

    /// `coeff · x^poly ∂^deriv`.
    pub fn monomial(
        truncation: Truncation,
        coeff: FiberOp<T>,
        poly: Exponent,
        deriv: Exponent,
    ) -> Result<Self> {
        let mut d = Self::zero(coeff.n(), truncation);
        d.add_term(deriv, poly, coeff)?;
        Ok(d)
    }

    pub fn identity(n: usize, truncation: Truncation) -> Self {
        let mut d = Self::zero(n, truncation);
        d.terms.insert(([0; 8], [0; 8]), FiberOp::identity(n, 1));
        d
    }

    /// `∂/∂x^i` (1-based).
    pub fn partial(n: usize, truncation: Truncation, i: usize) -> Result<Self> {
        let mut deriv = [0u8; 8];
        deriv[i - 1] = 1;
        Self::monomial(truncation, FiberOp::identity(n, 1), [0; 8], deriv)
    }

    /// Multiplication by `x^j` (1-based).
    pub fn coordinate(n: usize, truncation: Truncation, j: usize) -> Result<Self> {
        let mut poly = [0u8; 8];
        poly[j - 1] = 1;
        Self::monomial(truncation, FiberOp::identity(n, 1), poly, [0; 8])
    }

    /// `-Σ_i ∂_i²`.
    pub fn flat_laplacian(n: usize, truncation: Truncation) -> Result<Self> {
        let mut d = Self::zero(n, truncation);
        let minus = FiberOp::identity(n, 1).scale(&-T::one());
        for i in 0..n {
            let mut deriv = [0u8; 8];
            deriv[i] = 2;
            d.add_term(deriv, [0; 8], minus.clone())?;
        }
        Ok(d)
    }

    fn add_term(&mut self, deriv: Exponent, poly: Exponent, coeff: FiberOp<T>) -> Result<()> {
        if order(&poly) > self.truncation.max_poly {
            return Err(Error::TruncationOverflow {
                what: "polynomial",
                order: order(&poly),
                bound: self.truncation.max_poly,
            });
        }
        if order(&deriv) > self.truncation.max_deriv {
            return Err(Error::TruncationOverflow {
                what: "derivative",
                order: order(&deriv),
                bound: self.truncation.max_deriv,
            });
        }
        let key = (deriv, poly);
        let next = match self.terms.get(&key) {
            Some(c) => c.add(&coeff)?,
            None => coeff,
        };
        if next.matrix().is_zero() {
            self.terms.remove(&key);
        } else {
            self.terms.insert(key, next);
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        if self.truncation != other.truncation {
            return Err(Error::IncompatibleTruncation);
        }
        let mut out = self.clone();
        for ((d, p), c) in &other.terms {
            out.add_term(*d, *p, c.clone())?;
        }
        Ok(out)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        let mut neg = other.clone();
        for c in neg.terms.values_mut() {
            *c = c.scale(&-T::one());
        }
        self.add(&neg)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }
}

/// `max_{terms} |J| - |I| + deg_c^U(b_{J,I})`.
pub fn total_degree<T: Scalar>(d: &PolyDiffOp<T>) -> Result<i64> {
    let mut best: Option<i64> = None;
    for ((deriv, poly), c) in &d.terms {
        let (_, upper) = clifford_degrees(c)?;
        let v = order(deriv) as i64 - order(poly) as i64 + upper as i64;
        best = Some(best.map_or(v, |b| b.max(v)));
    }
    best.ok_or(Error::ZeroOperator)
}

/// Operator product with Leibniz expansion: `∂^J x^K = Σ_M C(J,M) (∂^M x^K) ∂^{J-M}`.
pub fn compose<T: Scalar>(a: &PolyDiffOp<T>, b: &PolyDiffOp<T>) -> Result<PolyDiffOp<T>> {
    if a.truncation != b.truncation || a.n != b.n {
        return Err(Error::IncompatibleTruncation);
    }
    let n = a.n;
    let mut out = PolyDiffOp::zero(n, a.truncation);
    for ((ja, ia), ca) in &a.terms {
        for ((jb, ib), cb) in &b.terms {
            let coeff = ca.compose(cb)?;
            // enumerate M ≤ min(J_a, I_b) coordinatewise
            let mut stack: Vec<(usize, Exponent, i64)> = vec![(0, [0; 8], 1)];
            while let Some((pos, m, weight)) = stack.pop() {
                if pos == n {
                    let mut poly = *ia;
                    let mut deriv = *jb;
                    for c in 0..n {
                        poly[c] += ib[c] - m[c];
                        deriv[c] += ja[c] - m[c];
                    }
                    out.add_term(deriv, poly, coeff.scale(&T::from_i64(weight)))?;
                    continue;
                }
                for k in 0..=ja[pos].min(ib[pos]) {
                    let mut m2 = m;
                    m2[pos] = k;
                    let w = weight * binomial(ja[pos], k) * falling(ib[pos], k);
                    stack.push((pos + 1, m2, w));
                }
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{q, Rational};

    #[test]
    fn identity_and_exterior_expansions() {
        let n = 7;
        let id = expand_clifford_basis(&FiberOp::<Rational>::identity(n, 1)).unwrap();
        assert_eq!(id.coefficients.len(), 1);
        assert_eq!(id.coefficient(MultiIndex::EMPTY, MultiIndex::EMPTY), q(1, 1));
        let e1 = ext_op(&DiffForm::<Rational>::basis(n, MultiIndex::single(1)), 1).unwrap();
        let ex = expand_clifford_basis(&e1).unwrap();
        assert_eq!(ex.coefficients.len(), 2);
        assert_eq!(ex.coefficient(MultiIndex::single(1), MultiIndex::EMPTY), q(1, 2));
        assert_eq!(ex.coefficient(MultiIndex::EMPTY, MultiIndex::single(1)), q(1, 2));
        assert_eq!(reconstruct(&ex), e1);
    }

    #[test]
    fn rank_two_rejected() {
        let m = FiberOp::<Rational>::identity(7, 2);
        assert!(matches!(expand_clifford_basis(&m), Err(Error::RankNotOne(2))));
    }

    #[test]
    fn canonical_commutator() {
        let n = 7;
        let tr = Truncation { max_poly: 2, max_deriv: 2 };
        for i in 1..=2 {
            for j in 1..=2 {
                let d = PolyDiffOp::<Rational>::partial(n, tr, i).unwrap();
                let x = PolyDiffOp::<Rational>::coordinate(n, tr, j).unwrap();
                let comm = compose(&d, &x).unwrap().sub(&compose(&x, &d).unwrap()).unwrap();
                if i == j {
                    assert_eq!(comm, PolyDiffOp::identity(n, tr));
                } else {
                    assert!(comm.is_zero());
                }
            }
        }
    }

    #[test]
    fn truncation_overflow_is_reported() {
        let tr = Truncation { max_poly: 1, max_deriv: 1 };
        let x = PolyDiffOp::<Rational>::coordinate(7, tr, 1).unwrap();
        assert!(matches!(compose(&x, &x), Err(Error::TruncationOverflow { .. })));
    }
}
