//! Exterior algebra of R^n with its Clifford module structure.
//!
//! Forms are sparse maps from [`MultiIndex`] to coefficients. Fiber operators
//! act on `Λ*(R^n) ⊗ C^r` with basis vectors ordered lexicographically by the
//! sorted index tuple, tensored with the standard basis of `C^r`.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::OnceLock;

use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::scalar::{rational_to_string, Rational, Scalar};

pub const MAX_DIM: usize = 8;

pub(crate) fn check_dim(n: usize) -> Result<()> {
    if (1..=MAX_DIM).contains(&n) {
        Ok(())
    } else {
        Err(Error::UnsupportedDimension(n))
    }
}

/// Strictly increasing subset of `{1..n}`, stored as a bitmask (bit `i-1` for index `i`).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Default)]
pub struct MultiIndex(u16);

impl MultiIndex {
    pub const EMPTY: MultiIndex = MultiIndex(0);

    pub fn from_mask(mask: u16) -> Self {
        MultiIndex(mask)
    }

    /// Build from 1-based indices, which must be strictly increasing and lie in `1..=n`.
    pub fn new(indices: &[usize], n: usize) -> Result<Self> {
        check_dim(n)?;
        let mut mask = 0u16;
        let mut prev = 0usize;
        for &i in indices {
            if i == 0 || i > n {
                return Err(Error::IndexOutOfRange { index: i, n });
            }
            if i <= prev {
                return Err(Error::NotStrictlyIncreasing(indices.to_vec()));
            }
            prev = i;
            mask |= 1 << (i - 1);
        }
        Ok(MultiIndex(mask))
    }

    pub fn single(i: usize) -> Self {
        MultiIndex(1 << (i - 1))
    }

    pub fn full(n: usize) -> Self {
        MultiIndex(((1u32 << n) - 1) as u16)
    }

    pub fn mask(self) -> u16 {
        self.0
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn contains(self, i: usize) -> bool {
        i >= 1 && self.0 & (1 << (i - 1)) != 0
    }

    /// 1-based indices in increasing order.
    pub fn indices(self) -> Vec<usize> {
        (0..16).filter(|b| self.0 & (1 << b) != 0).map(|b| b + 1).collect()
    }

    pub fn complement(self, n: usize) -> Self {
        MultiIndex(Self::full(n).0 & !self.0)
    }

    pub fn is_disjoint(self, other: Self) -> bool {
        self.0 & other.0 == 0
    }

    pub fn union(self, other: Self) -> Self {
        MultiIndex(self.0 | other.0)
    }

    pub fn symmetric_difference(self, other: Self) -> Self {
        MultiIndex(self.0 ^ other.0)
    }

    /// Parity of the concatenation `(self, complement)` relative to `(1..n)`.
    pub fn permutation_sign(self, n: usize) -> i64 {
        wedge_sign(self.0, self.complement(n).0)
    }
}

impl PartialOrd for MultiIndex {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

/// Graded order: degree first, then lexicographic in the index tuple.
impl Ord for MultiIndex {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.len()
            .cmp(&other.len())
            .then_with(|| self.indices().cmp(&other.indices()))
    }
}

impl fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_empty() {
            return write!(f, "1");
        }
        write!(f, "e")?;
        for i in self.indices() {
            write!(f, "{i}")?;
        }
        Ok(())
    }
}

/// Sign of `e^A ∧ e^B` relative to the sorted basis element (A, B disjoint).
pub(crate) fn wedge_sign(a: u16, b: u16) -> i64 {
    let mut inversions = 0u32;
    let mut rest = b;
    while rest != 0 {
        let y = rest.trailing_zeros();
        rest &= rest - 1;
        inversions += (a >> (y + 1)).count_ones();
    }
    if inversions.is_multiple_of(2) {
        1
    } else {
        -1
    }
}

/// Number of elements of `mask` strictly below 0-based bit `bit`.
#[inline]
pub(crate) fn count_below(mask: u16, bit: u32) -> u32 {
    (mask & ((1u16 << bit) - 1)).count_ones()
}

static BASIS: OnceLock<Vec<(Vec<u16>, Vec<usize>)>> = OnceLock::new();

fn basis_tables(n: usize) -> &'static (Vec<u16>, Vec<usize>) {
    let all = BASIS.get_or_init(|| {
        (0..=MAX_DIM)
            .map(|n| {
                let mut masks: Vec<u16> = (0..(1u32 << n)).map(|m| m as u16).collect();
                masks.sort_by_key(|&m| MultiIndex(m).indices());
                let mut position = vec![0usize; 1 << n];
                for (p, &m) in masks.iter().enumerate() {
                    position[m as usize] = p;
                }
                (masks, position)
            })
            .collect()
    });
    &all[n]
}

/// Basis subsets of `{1..n}` in lexicographic order of their sorted index tuples.
pub fn basis_order(n: usize) -> &'static [u16] {
    &basis_tables(n).0
}

/// Position of a subset in [`basis_order`].
pub fn basis_position(n: usize, index: MultiIndex) -> usize {
    basis_tables(n).1[index.0 as usize]
}

/// The degree-k basis subsets in lexicographic order.
pub fn degree_basis(n: usize, k: usize) -> Vec<MultiIndex> {
    basis_order(n)
        .iter()
        .map(|&m| MultiIndex(m))
        .filter(|m| m.len() == k)
        .collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct DiffForm<T> {
    n: usize,
    terms: BTreeMap<MultiIndex, T>,
}

impl<T: Scalar> DiffForm<T> {
    pub fn zero(n: usize) -> Self {
        DiffForm {
            n,
            terms: BTreeMap::new(),
        }
    }

    pub fn one(n: usize) -> Self {
        Self::basis(n, MultiIndex::EMPTY)
    }

    pub fn basis(n: usize, index: MultiIndex) -> Self {
        Self::term(n, index, T::one())
    }

    pub fn term(n: usize, index: MultiIndex, coeff: T) -> Self {
        let mut f = Self::zero(n);
        f.add_term(index, coeff);
        f
    }

    pub fn constant_form(n: usize, c: T) -> Self {
        Self::term(n, MultiIndex::EMPTY, c)
    }

    /// `dvol = e^{1…n}`.
    pub fn volume(n: usize) -> Self {
        Self::basis(n, MultiIndex::full(n))
    }

    pub fn from_terms(n: usize, terms: impl IntoIterator<Item = (MultiIndex, T)>) -> Self {
        let mut f = Self::zero(n);
        for (i, c) in terms {
            f.add_term(i, c);
        }
        f
    }

    pub fn add_term(&mut self, index: MultiIndex, coeff: T) {
        debug_assert!(index.mask() < (1u32 << self.n) as u16 || self.n == 16);
        if coeff.is_zero() {
            return;
        }
        match self.terms.get_mut(&index) {
            Some(c) => {
                *c = c.clone() + coeff;
                if c.is_zero() {
                    self.terms.remove(&index);
                }
            }
            None => {
                self.terms.insert(index, coeff);
            }
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn terms(&self) -> &BTreeMap<MultiIndex, T> {
        &self.terms
    }

    pub fn coefficient(&self, index: MultiIndex) -> T {
        self.terms.get(&index).cloned().unwrap_or_else(T::zero)
    }

    pub fn top_coefficient(&self) -> T {
        self.coefficient(MultiIndex::full(self.n))
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn degrees(&self) -> BTreeSet<usize> {
        self.terms.keys().map(|i| i.len()).collect()
    }

    /// The degree if the form is homogeneous and nonzero.
    pub fn degree(&self) -> Option<usize> {
        let d = self.degrees();
        if d.len() == 1 {
            d.into_iter().next()
        } else {
            None
        }
    }

    pub fn require_degree(&self, k: usize) -> Result<()> {
        let d = self.degrees();
        if d.iter().all(|&x| x == k) {
            Ok(())
        } else {
            Err(Error::WrongDegree {
                expected: k,
                found: d.into_iter().collect(),
            })
        }
    }

    pub fn component(&self, k: usize) -> Self {
        DiffForm {
            n: self.n,
            terms: self
                .terms
                .iter()
                .filter(|(i, _)| i.len() == k)
                .map(|(i, c)| (*i, c.clone()))
                .collect(),
        }
    }

    pub fn map<U: Scalar>(&self, f: impl Fn(&T) -> U) -> DiffForm<U> {
        DiffForm::from_terms(self.n, self.terms.iter().map(|(i, c)| (*i, f(c))))
    }

    pub fn scale(&self, s: &T) -> Self {
        self.map(|c| c.clone() * s.clone())
    }

    fn check_same_dim(&self, other: &Self) -> Result<()> {
        if self.n == other.n {
            Ok(())
        } else {
            Err(Error::DimensionMismatch {
                left: self.n,
                right: other.n,
            })
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_same_dim(other)?;
        let mut out = self.clone();
        for (i, c) in &other.terms {
            out.add_term(*i, c.clone());
        }
        Ok(out)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.scale(&-T::one()))
    }

    /// Exterior product.
    pub fn wedge(&self, other: &Self) -> Result<Self> {
        self.check_same_dim(other)?;
        let mut out = Self::zero(self.n);
        for (a, ca) in &self.terms {
            for (b, cb) in &other.terms {
                if !a.is_disjoint(*b) {
                    continue;
                }
                let s = wedge_sign(a.mask(), b.mask());
                out.add_term(a.union(*b), T::from_i64(s) * ca.clone() * cb.clone());
            }
        }
        Ok(out)
    }

    /// Hodge star for the Euclidean metric with orientation `e^{1…n}`.
    pub fn hodge_star(&self) -> Self {
        let mut out = Self::zero(self.n);
        for (i, c) in &self.terms {
            let s = i.permutation_sign(self.n);
            out.add_term(i.complement(self.n), T::from_i64(s) * c.clone());
        }
        out
    }

    /// Interior product with the basis vector `e_v` (1-based).
    pub fn interior(&self, v: usize) -> Self {
        let mut out = Self::zero(self.n);
        for (i, c) in &self.terms {
            if i.contains(v) {
                let s = if count_below(i.mask(), (v - 1) as u32).is_multiple_of(2) { 1 } else { -1 };
                out.add_term(
                    MultiIndex::from_mask(i.mask() & !(1 << (v - 1))),
                    T::from_i64(s) * c.clone(),
                );
            }
        }
        out
    }

    /// Euclidean inner product (basis forms orthonormal).
    pub fn inner(&self, other: &Self) -> T {
        self.terms
            .iter()
            .filter_map(|(i, a)| other.terms.get(i).map(|b| a.clone() * b.clone()))
            .fold(T::zero(), |acc, x| acc + x)
    }

    pub fn norm_sq(&self) -> T {
        self.inner(self)
    }

    /// Coordinates in the lexicographic degree-k basis.
    pub fn to_vector(&self, k: usize) -> Vec<T> {
        degree_basis(self.n, k)
            .into_iter()
            .map(|i| self.coefficient(i))
            .collect()
    }

    pub fn from_vector(n: usize, k: usize, v: &[T]) -> Self {
        Self::from_terms(n, degree_basis(n, k).into_iter().zip(v.iter().cloned()))
    }

    pub fn to_expression(&self, fmt_coeff: impl Fn(&T) -> (bool, String)) -> String {
        if self.terms.is_empty() {
            return "0".into();
        }
        let mut out = String::new();
        for (k, (i, c)) in self.terms.iter().enumerate() {
            let (negative, magnitude) = fmt_coeff(c);
            match (k, negative) {
                (0, true) => out.push('-'),
                (0, false) => {}
                (_, true) => out.push_str(" - "),
                (_, false) => out.push_str(" + "),
            }
            let is_unit = magnitude == "1";
            if i.is_empty() {
                out.push_str(&magnitude);
            } else if is_unit {
                out.push_str(&i.to_string());
            } else {
                out.push_str(&format!("{magnitude} {i}"));
            }
        }
        out
    }
}

impl fmt::Display for DiffForm<Rational> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = self.to_expression(|c| {
            let neg = c < &Rational::from_integer(0.into());
            let mag = if neg { -c.clone() } else { c.clone() };
            (neg, rational_to_string(&mag))
        });
        f.write_str(&s)
    }
}

impl fmt::Display for DiffForm<f64> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = self.to_expression(|c| (*c < 0.0, format!("{}", c.abs())));
        f.write_str(&s)
    }
}

/// Monomial operator on `Λ*(R^n)`: each basis vector maps to a signed basis vector.
#[derive(Clone, Debug, PartialEq, Eq)]
pub(crate) struct SignedPerm {
    pub n: usize,
    pub image: Vec<u16>,
    pub sign: Vec<i8>,
}

impl SignedPerm {
    pub fn identity(n: usize) -> Self {
        SignedPerm {
            n,
            image: (0..(1u32 << n)).map(|m| m as u16).collect(),
            sign: vec![1; 1 << n],
        }
    }

    #[cfg(test)]
    /// `c(e^i)` when `hat` is false, `ĉ(e^i)` otherwise; `i` is 1-based.
    pub fn clifford_generator(n: usize, i: usize, hat: bool) -> Self {
        let bit = (i - 1) as u32;
        let mut p = Self::identity(n);
        for s in 0..(1usize << n) {
            let mask = s as u16;
            let below = count_below(mask, bit) % 2 == 1;
            let present = mask & (1 << bit) != 0;
            p.image[s] = mask ^ (1 << bit);
            let negative = below ^ (present && !hat);
            p.sign[s] = if negative { -1 } else { 1 };
        }
        p
    }

    pub fn trace(&self) -> i64 {
        (0..(1usize << self.n))
            .filter(|&s| self.image[s] as usize == s)
            .map(|s| self.sign[s] as i64)
            .sum()
    }

    #[cfg(test)]
    pub fn to_fiber_op<T: Scalar>(&self) -> FiberOp<T> {
        let mut op = FiberOp::zero(self.n, 1);
        for s in 0..(1usize << self.n) {
            let row = basis_position(self.n, MultiIndex(self.image[s]));
            let col = basis_position(self.n, MultiIndex(s as u16));
            op.matrix.set(row, col, T::from_i64(self.sign[s] as i64));
        }
        op
    }
}

/// Sign with which `c(ω^I) ĉ(ω^J)` sends `e^S` to `± e^{S △ I △ J}`.
pub(crate) fn word_sign(i: MultiIndex, j: MultiIndex, s: u16) -> i8 {
    let mut mask = s;
    let mut negative = false;
    for (word, hat) in [(j.mask(), true), (i.mask(), false)] {
        // rightmost generator acts first
        let mut rest = word;
        while rest != 0 {
            let bit = 15 - rest.leading_zeros();
            rest &= !(1 << bit);
            let present = mask & (1 << bit) != 0;
            negative ^= count_below(mask, bit) % 2 == 1;
            negative ^= present && !hat;
            mask ^= 1 << bit;
        }
    }
    if negative {
        -1
    } else {
        1
    }
}

pub(crate) fn word_signed_perm(n: usize, i: MultiIndex, j: MultiIndex) -> SignedPerm {
    let k = i.mask() ^ j.mask();
    let mut p = SignedPerm::identity(n);
    for s in 0..(1usize << n) {
        p.image[s] = (s as u16) ^ k;
        p.sign[s] = word_sign(i, j, s as u16);
    }
    p
}

/// Dense endomorphism of `Λ*(R^n) ⊗ C^r`.
#[derive(Clone, Debug, PartialEq)]
pub struct FiberOp<T> {
    n: usize,
    rank: usize,
    matrix: Matrix<T>,
}

impl<T: Scalar> FiberOp<T> {
    pub fn zero(n: usize, rank: usize) -> Self {
        let dim = (1 << n) * rank;
        FiberOp {
            n,
            rank,
            matrix: Matrix::zeros(dim, dim),
        }
    }

    pub fn identity(n: usize, rank: usize) -> Self {
        FiberOp {
            n,
            rank,
            matrix: Matrix::identity((1 << n) * rank),
        }
    }

    pub fn from_matrix(n: usize, rank: usize, matrix: Matrix<T>) -> Result<Self> {
        check_dim(n)?;
        let dim = (1 << n) * rank;
        if matrix.rows() != dim || matrix.cols() != dim {
            return Err(Error::DimensionMismatch {
                left: dim,
                right: matrix.rows(),
            });
        }
        Ok(FiberOp { n, rank, matrix })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn dim(&self) -> usize {
        self.matrix.rows()
    }

    pub fn matrix(&self) -> &Matrix<T> {
        &self.matrix
    }

    pub fn map<U: Scalar>(&self, f: impl Fn(&T) -> U) -> FiberOp<U> {
        FiberOp {
            n: self.n,
            rank: self.rank,
            matrix: self.matrix.map(f),
        }
    }

    fn check_compatible(&self, other: &Self) -> Result<()> {
        if self.n != other.n {
            return Err(Error::DimensionMismatch {
                left: self.n,
                right: other.n,
            });
        }
        if self.rank != other.rank {
            return Err(Error::RankMismatch {
                left: self.rank,
                right: other.rank,
            });
        }
        Ok(())
    }

    pub fn compose(&self, other: &Self) -> Result<Self> {
        self.check_compatible(other)?;
        Ok(FiberOp {
            n: self.n,
            rank: self.rank,
            matrix: self.matrix.matmul(&other.matrix),
        })
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_compatible(other)?;
        Ok(FiberOp {
            n: self.n,
            rank: self.rank,
            matrix: &self.matrix + &other.matrix,
        })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.check_compatible(other)?;
        Ok(FiberOp {
            n: self.n,
            rank: self.rank,
            matrix: &self.matrix - &other.matrix,
        })
    }

    pub fn scale(&self, s: &T) -> Self {
        FiberOp {
            n: self.n,
            rank: self.rank,
            matrix: self.matrix.scale(s),
        }
    }

    pub fn trace(&self) -> T {
        self.matrix.trace()
    }

    /// `tr(self ∘ other)`.
    pub fn trace_with(&self, other: &Self) -> Result<T> {
        self.check_compatible(other)?;
        Ok(self.matrix.trace_of_product(&other.matrix))
    }

    /// Entrywise transpose, which is the adjoint for real operators.
    pub fn transpose(&self) -> Self {
        FiberOp {
            n: self.n,
            rank: self.rank,
            matrix: self.matrix.transpose(),
        }
    }

    /// `self ⊗ m` for an operator `m` on `C^s`.
    pub fn tensor_bundle(&self, m: &Matrix<T>) -> Self {
        FiberOp {
            n: self.n,
            rank: self.rank * m.rows(),
            matrix: self.matrix.kron(m),
        }
    }

    /// Restriction to the degree-k block (rank 1), rows/cols in lexicographic order.
    pub fn degree_block(&self, k: usize) -> Matrix<T> {
        assert_eq!(self.rank, 1, "degree blocks are taken on the scalar bundle");
        let positions: Vec<usize> = degree_basis(self.n, k)
            .into_iter()
            .map(|i| basis_position(self.n, i))
            .collect();
        Matrix::from_fn(positions.len(), positions.len(), |a, b| {
            self.matrix.get(positions[a], positions[b]).clone()
        })
    }

    /// Apply a rank-1 operator to a form.
    pub fn apply(&self, form: &DiffForm<T>) -> Result<DiffForm<T>> {
        if self.rank != 1 {
            return Err(Error::RankNotOne(self.rank));
        }
        if form.n() != self.n {
            return Err(Error::DimensionMismatch {
                left: self.n,
                right: form.n(),
            });
        }
        let order = basis_order(self.n);
        let mut out = DiffForm::zero(self.n);
        for (i, c) in form.terms() {
            let col = basis_position(self.n, *i);
            for (row, &mask) in order.iter().enumerate() {
                let m = self.matrix.get(row, col);
                if !m.is_zero() {
                    out.add_term(MultiIndex(mask), m.clone() * c.clone());
                }
            }
        }
        Ok(out)
    }
}

/// Left exterior multiplication `e(w)`, tensored with the identity on `C^rank`.
pub fn ext_op<T: Scalar>(w: &DiffForm<T>, rank: usize) -> Result<FiberOp<T>> {
    let n = w.n();
    check_dim(n)?;
    let mut op = FiberOp::zero(n, 1);
    for &s in basis_order(n) {
        let col = basis_position(n, MultiIndex(s));
        for (i, c) in w.terms() {
            if i.mask() & s != 0 {
                continue;
            }
            let sign = wedge_sign(i.mask(), s);
            let row = basis_position(n, MultiIndex(i.mask() | s));
            op.matrix.add_at(row, col, T::from_i64(sign) * c.clone());
        }
    }
    Ok(if rank == 1 {
        op
    } else {
        op.tensor_bundle(&Matrix::identity(rank))
    })
}

/// The adjoint `e*(w)` (interior multiplication) for real forms.
pub fn int_op<T: Scalar>(w: &DiffForm<T>, rank: usize) -> Result<FiberOp<T>> {
    Ok(ext_op(w, rank)?.transpose())
}

fn require_one_form<T: Scalar>(w: &DiffForm<T>) -> Result<()> {
    if w.is_zero() {
        return Ok(());
    }
    w.require_degree(1)
}

/// Clifford multiplication `c(w) = e(w) - e*(w)` by a 1-form.
pub fn cliff_op<T: Scalar>(w: &DiffForm<T>) -> Result<FiberOp<T>> {
    require_one_form(w)?;
    ext_op(w, 1)?.sub(&int_op(w, 1)?)
}

/// `ĉ(w) = e(w) + e*(w)` for a 1-form.
pub fn cliff_hat_op<T: Scalar>(w: &DiffForm<T>) -> Result<FiberOp<T>> {
    require_one_form(w)?;
    ext_op(w, 1)?.add(&int_op(w, 1)?)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum WordKind {
    C,
    CHat,
}

/// Ordered product of `c(e^i)` (or `ĉ(e^i)`) over ascending `i ∈ I`.
pub fn word_op<T: Scalar>(n: usize, index: MultiIndex, kind: WordKind) -> Result<FiberOp<T>> {
    check_dim(n)?;
    let mut op = FiberOp::identity(n, 1);
    for i in index.indices() {
        if i > n {
            return Err(Error::IndexOutOfRange { index: i, n });
        }
        let e = DiffForm::basis(n, MultiIndex::single(i));
        let g = match kind {
            WordKind::C => cliff_op(&e)?,
            WordKind::CHat => cliff_hat_op(&e)?,
        };
        op = op.compose(&g)?;
    }
    Ok(op)
}

/// Matrix of the Hodge star on all of `Λ*(R^n)`.
pub fn hodge_op<T: Scalar>(n: usize) -> Result<FiberOp<T>> {
    check_dim(n)?;
    let mut op = FiberOp::zero(n, 1);
    for &s in basis_order(n) {
        let i = MultiIndex(s);
        let row = basis_position(n, i.complement(n));
        let col = basis_position(n, i);
        op.matrix.set(row, col, T::from_i64(i.permutation_sign(n)));
    }
    Ok(op)
}
