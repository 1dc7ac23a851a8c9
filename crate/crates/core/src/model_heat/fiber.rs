//! Heat kernel of the untruncated operator `-Σ(∂_i + A_i)² + C` on
//! `Λ*(R^n) ⊗ C^r`, with connection `A_i = (1/2) x^j 𝓡_{ji}` and Weitzenböck
//! term `C = -Σ e^i ι_j 𝓡_{ij}`, where `𝓡_{ij} = R_{ij} ⊗ 1 + 1 ⊗ F_{ij}` and
//! `R_{ij} = Σ R_{ijkl} e^l ι_k`. The trace against `*e(w)` is taken with
//! honest fiber matrices; no Clifford-degree rescaling is involved.

use num_complex::Complex;

use crate::error::Result;
use crate::exterior::{ext_op, hodge_op, int_op, DiffForm, FiberOp, MultiIndex};
use crate::holonomy::HolonomyStructure;
use crate::linalg::Matrix;
use crate::scalar::{q, Rational, RealScalar, Scalar};

use super::curvature::CurvatureData;
use super::duhamel::{duhamel_expand, DuhamelAlgebra, Op, PerturbationTerm};
use super::series::LaurentSeries;
use super::realify;

impl<T: Scalar> DuhamelAlgebra for FiberOp<T> {
    fn product(&self, other: &Self) -> Self {
        self.compose(other).expect("fiber operators of one expansion share their shape")
    }

    fn accumulate(&mut self, other: &Self, weight: &Rational) {
        *self = self
            .add(&other.scale(&T::from_rational(weight)))
            .expect("fiber operators of one expansion share their shape");
    }

    fn is_zero(&self) -> bool {
        self.matrix().is_zero()
    }
}

type C<T> = Complex<T>;

fn lift<T: RealScalar>(op: FiberOp<T>) -> FiberOp<C<T>> {
    op.map(|x| Complex::new(x.clone(), T::zero()))
}

/// `*e(w)` as a fiber operator on `Λ* ⊗ C^r`.
pub fn weight_operator<T: RealScalar>(w: &DiffForm<Rational>, rank: usize) -> Result<FiberOp<C<T>>> {
    let n = w.n();
    let w_t: DiffForm<T> = w.map(T::from_rational);
    let op = hodge_op::<T>(n)?.compose(&ext_op(&w_t, 1)?)?;
    Ok(lift(op).tensor_bundle(&Matrix::identity(rank)))
}

/// Perturbation `V = -x^j 𝓡_{ji} ∂_i - (1/4) x^j x^k 𝓡_{ji} 𝓡_{ki} + C`.
pub fn fiber_perturbation<T: RealScalar>(cd: &CurvatureData<T>) -> Result<Vec<PerturbationTerm<FiberOp<C<T>>>>> {
    let n = cd.n();
    let rank = cd.rank();
    let one_forms: Vec<DiffForm<T>> = (1..=n)
        .map(|i| DiffForm::basis(n, MultiIndex::single(i)))
        .collect();
    let ext: Vec<FiberOp<C<T>>> = one_forms.iter().map(|e| ext_op(e, 1).map(lift)).collect::<Result<_>>()?;
    let int: Vec<FiberOp<C<T>>> = one_forms.iter().map(|e| int_op(e, 1).map(lift)).collect::<Result<_>>()?;
    let mut ei = Vec::with_capacity(n * n);
    for a in 0..n {
        for b in 0..n {
            ei.push(ext[a].compose(&int[b])?);
        }
    }
    let id_r = Matrix::<C<T>>::identity(rank);
    let id_lambda = FiberOp::<C<T>>::identity(n, 1);
    let mut curv: Vec<FiberOp<C<T>>> = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            let mut r_op = FiberOp::zero(n, 1);
            for k in 0..n {
                for l in 0..n {
                    let v = cd.riem(i, j, k, l);
                    if !v.is_zero() {
                        let c = Complex::new(v.clone(), T::zero());
                        r_op = r_op.add(&ei[l * n + k].scale(&c))?;
                    }
                }
            }
            let total = r_op
                .tensor_bundle(&id_r)
                .add(&id_lambda.tensor_bundle(cd.f_matrix(i, j)))?;
            curv.push(total);
        }
    }
    let mut terms = Vec::new();
    let minus = Complex::new(-T::one(), T::zero());
    for i in 0..n {
        for j in 0..n {
            if i != j {
                terms.push(PerturbationTerm {
                    coeff: curv[j * n + i].scale(&minus),
                    ops: vec![Op::X(j), Op::D(i)],
                });
            }
        }
    }
    let quarter = Complex::new(T::from_ratio(-1, 4), T::zero());
    for j in 0..n {
        for k in 0..n {
            let mut acc = FiberOp::zero(n, rank);
            for i in 0..n {
                let (a, b) = (&curv[j * n + i], &curv[k * n + i]);
                if a.is_zero() || b.is_zero() {
                    continue;
                }
                acc = acc.add(&a.compose(b)?)?;
            }
            terms.push(PerturbationTerm {
                coeff: acc.scale(&quarter),
                ops: vec![Op::X(j), Op::X(k)],
            });
        }
    }
    let mut c = FiberOp::zero(n, rank);
    for i in 0..n {
        for j in 0..n {
            let e = ei[i * n + j].tensor_bundle(&id_r);
            c = c.sub(&e.compose(&curv[i * n + j])?)?;
        }
    }
    terms.push(PerturbationTerm { coeff: c, ops: vec![] });
    Ok(terms)
}

/// `Tr(*e(w) e^{-tL}(0,0))` through relative order `t^order`, computed with
/// fiber matrices. Keys of the result are twice the power of `t`.
pub fn fiber_diag_trace<T: RealScalar>(
    s: &HolonomyStructure,
    cd: &CurvatureData<T>,
    order: usize,
) -> Result<LaurentSeries<T>> {
    let n = cd.n();
    if n != s.n {
        return Err(crate::error::Error::DimensionMismatch { left: s.n, right: n });
    }
    let rank = cd.rank();
    let terms = fiber_perturbation(cd)?;
    let kernel = duhamel_expand(
        &terms,
        &FiberOp::identity(n, rank),
        &FiberOp::zero(n, rank),
        order,
        order as i32,
    )?;
    let weight = weight_operator::<T>(&s.defining_form, rank)?;
    let prefactor = Complex::new(T::from_rational(&q(1, 1i64 << n)), T::zero());
    let mut out = LaurentSeries::zero(-(n as i32));
    for (tp, k) in kernel {
        out.add_term(-(n as i32) + 2 * tp, weight.trace_with(&k)? * prefactor.clone());
    }
    realify(out)
}
