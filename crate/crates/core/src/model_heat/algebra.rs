use std::collections::BTreeMap;

use num_complex::Complex;

use crate::exterior::{wedge_sign, DiffForm, MultiIndex};
use crate::linalg::Matrix;
use crate::scalar::{Rational, RealScalar};

use super::duhamel::DuhamelAlgebra;

/// Element of `Λ^even(R^n) ⊗ Cl(ĉ) ⊗ End(C^r)`. Keys are `(form, ĉ-word)`.
/// Forms are even, so they commute with the word and matrix factors.
#[derive(Clone, Debug, PartialEq)]
pub struct ModelElement<T: RealScalar> {
    n: usize,
    rank: usize,
    terms: BTreeMap<(MultiIndex, MultiIndex), Matrix<Complex<T>>>,
}

impl<T: RealScalar> ModelElement<T> {
    pub fn zero(n: usize, rank: usize) -> Self {
        ModelElement {
            n,
            rank,
            terms: BTreeMap::new(),
        }
    }

    pub fn identity(n: usize, rank: usize) -> Self {
        let mut e = Self::zero(n, rank);
        e.add_term(MultiIndex::EMPTY, MultiIndex::EMPTY, Matrix::identity(rank));
        e
    }

    /// `form ⊗ 1 ⊗ Id_r`.
    pub fn from_form(form: &DiffForm<T>, rank: usize) -> Self {
        let mut e = Self::zero(form.n(), rank);
        for (i, c) in form.terms() {
            let m = Matrix::identity(rank).scale(&Complex::new(c.clone(), T::zero()));
            e.add_term(*i, MultiIndex::EMPTY, m);
        }
        e
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn terms(&self) -> &BTreeMap<(MultiIndex, MultiIndex), Matrix<Complex<T>>> {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn add_term(&mut self, form: MultiIndex, word: MultiIndex, m: Matrix<Complex<T>>) {
        if m.is_zero() {
            return;
        }
        match self.terms.get_mut(&(form, word)) {
            Some(slot) => {
                *slot = &*slot + &m;
                if slot.is_zero() {
                    self.terms.remove(&(form, word));
                }
            }
            None => {
                self.terms.insert((form, word), m);
            }
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for ((f, w), m) in &other.terms {
            out.add_term(*f, *w, m.clone());
        }
        out
    }

    pub fn scale(&self, s: &Complex<T>) -> Self {
        let mut out = Self::zero(self.n, self.rank);
        for ((f, w), m) in &self.terms {
            out.add_term(*f, *w, m.scale(s));
        }
        out
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut out = Self::zero(self.n, self.rank);
        for ((fa, wa), ma) in &self.terms {
            for ((fb, wb), mb) in &other.terms {
                if !fa.is_disjoint(*fb) {
                    continue;
                }
                // ĉ_J ĉ_L: move each l ∈ L left past the larger j ∈ J; ĉ_l² = 1
                let sign = wedge_sign(fa.mask(), fb.mask()) * wedge_sign(wa.mask(), wb.mask());
                let m = (ma * mb).scale(&Complex::new(T::from_i64(sign), T::zero()));
                out.add_term(fa.union(*fb), wa.symmetric_difference(*wb), m);
            }
        }
        out
    }

    /// Product dropping every form component of degree above `max_degree`.
    pub fn mul_truncated(&self, other: &Self, max_degree: usize) -> Self {
        let mut out = Self::zero(self.n, self.rank);
        for ((fa, wa), ma) in &self.terms {
            for ((fb, wb), mb) in &other.terms {
                if !fa.is_disjoint(*fb) || fa.len() + fb.len() > max_degree {
                    continue;
                }
                let sign = wedge_sign(fa.mask(), fb.mask()) * wedge_sign(wa.mask(), wb.mask());
                let m = (ma * mb).scale(&Complex::new(T::from_i64(sign), T::zero()));
                out.add_term(fa.union(*fb), wa.symmetric_difference(*wb), m);
            }
        }
        out
    }

    /// `fiber_trace(self · other)` without forming the product: only pairs
    /// with equal ĉ-words contribute.
    pub fn traced_product(&self, other: &Self, max_degree: usize) -> DiffForm<Complex<T>> {
        let weight = Complex::new(T::from_i64(1 << self.n), T::zero());
        let mut out = DiffForm::zero(self.n);
        for ((fa, wa), ma) in &self.terms {
            for ((fb, wb), mb) in &other.terms {
                if wa != wb || !fa.is_disjoint(*fb) || fa.len() + fb.len() > max_degree {
                    continue;
                }
                let sign = wedge_sign(fa.mask(), fb.mask()) * wedge_sign(wa.mask(), wb.mask());
                let tr = ma.trace_of_product(mb) * weight.clone() * Complex::new(T::from_i64(sign), T::zero());
                out.add_term(fa.union(*fb), tr);
            }
        }
        out
    }

    /// Trace over `Λ* ⊗ C^r`: only the ĉ-scalar part survives, with weight `2^n`.
    pub fn fiber_trace(&self) -> DiffForm<Complex<T>> {
        let weight = Complex::new(T::from_i64(1 << self.n), T::zero());
        DiffForm::from_terms(
            self.n,
            self.terms
                .iter()
                .filter(|((_, w), _)| w.is_empty())
                .map(|((f, _), m)| (*f, m.trace() * weight.clone())),
        )
    }
}

impl<T: RealScalar> DuhamelAlgebra for ModelElement<T> {
    fn product(&self, other: &Self) -> Self {
        self.mul(other)
    }

    fn accumulate(&mut self, other: &Self, weight: &Rational) {
        let w = Complex::new(T::from_rational(weight), T::zero());
        for ((f, wd), m) in &other.terms {
            self.add_term(*f, *wd, m.scale(&w));
        }
    }

    fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }
}
