use num_complex::Complex;

use crate::error::{Error, Result};
use crate::exterior::{wedge_sign, DiffForm, MultiIndex};
use crate::scalar::{q, Rational, RealScalar, Scalar};

use super::algebra::ModelElement;
use super::curvature::CurvatureData;
use super::series::FormSeries;

/// `n × n` matrix of constant forms.
#[derive(Clone, Debug, PartialEq)]
pub struct FormMatrix<T> {
    pub n: usize,
    entries: Vec<DiffForm<T>>,
}

impl<T: Scalar> FormMatrix<T> {
    pub fn zero(n: usize) -> Self {
        FormMatrix {
            n,
            entries: vec![DiffForm::zero(n); n * n],
        }
    }

    pub fn get(&self, i: usize, j: usize) -> &DiffForm<T> {
        &self.entries[i * self.n + j]
    }

    pub fn set(&mut self, i: usize, j: usize, f: DiffForm<T>) {
        self.entries[i * self.n + j] = f;
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(DiffForm::is_zero)
    }

    pub fn is_symmetric(&self) -> bool {
        (0..self.n).all(|i| (0..self.n).all(|j| self.get(i, j) == self.get(j, i)))
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut out = Self::zero(self.n);
        for i in 0..self.n {
            for j in 0..self.n {
                let mut acc = DiffForm::zero(self.n);
                for k in 0..self.n {
                    let a = self.get(i, k);
                    let b = other.get(k, j);
                    if a.is_zero() || b.is_zero() {
                        continue;
                    }
                    acc = acc.add(&a.wedge(b).unwrap()).unwrap();
                }
                out.set(i, j, acc);
            }
        }
        out
    }

    pub fn trace(&self) -> DiffForm<T> {
        (0..self.n).fold(DiffForm::zero(self.n), |acc, i| acc.add(self.get(i, i)).unwrap())
    }
}

/// `Q_{jk} = -(1/4) Σ_i R̂_{ij} ∧ R̂_{ik}`.
pub fn q_matrix<T: RealScalar>(cd: &CurvatureData<T>) -> FormMatrix<T> {
    let n = cd.n();
    let r_hat: Vec<DiffForm<T>> = (0..n * n).map(|k| cd.r_hat(k / n, k % n)).collect();
    let mut out = FormMatrix::zero(n);
    let quarter = T::from_ratio(-1, 4);
    for j in 0..n {
        for k in 0..n {
            let mut acc = DiffForm::zero(n);
            for i in 0..n {
                let a = &r_hat[i * n + j];
                let b = &r_hat[i * n + k];
                if a.is_zero() || b.is_zero() {
                    continue;
                }
                acc = acc.add(&a.wedge(b).unwrap()).unwrap();
            }
            out.set(j, k, acc.scale(&quarter));
        }
    }
    out
}

/// Taylor coefficients of `log(x / sinh x)` in powers of `x²`.
fn log_x_over_sinh() -> [Rational; 5] {
    [q(-1, 6), q(1, 180), q(-1, 2835), q(1, 37800), q(-1, 467775)]
}

/// `(4πt)^{-n/2} det(X / sinh X)^{1/2}` with `X² = 4t²Q`, exact in `t`.
pub fn mehler_det_factor<T: Scalar>(qm: &FormMatrix<T>) -> Result<FormSeries<T>> {
    let n = qm.n;
    if qm.entries.iter().any(|f| !f.coefficient(MultiIndex::EMPTY).is_zero()) {
        return Err(Error::NonNilpotentQ);
    }
    // (1/2) tr log f(X²) = (1/2) Σ_k c_k 4^k t^{2k} tr(Q^k)
    let mut log_det = FormSeries::zero(n);
    let mut power = qm.clone();
    for (k, c) in log_x_over_sinh().iter().enumerate() {
        let k = k + 1;
        if power.is_zero() {
            break;
        }
        let coeff = T::from_rational(&(c * Rational::from_integer(4i64.pow(k as u32).into()) * q(1, 2)));
        log_det = log_det.add(&FormSeries::from_form(&power.trace().scale(&coeff), 4 * k as i32));
        power = power.mul(qm);
    }
    if !power.is_zero() {
        return Err(Error::InvalidArgument("Q is not nilpotent within the series range".into()));
    }
    let det = log_det.exp_nilpotent();
    let mut prefactor = FormSeries::from_form(&DiffForm::constant_form(n, T::from_rational(&q(1, 1i64 << n))), -(n as i32));
    prefactor.pi_half = -(n as i32);
    Ok(prefactor.mul(&det))
}

/// The exponent `E = β Σ_{ijkl} e^{ij} R_{ijkl} ĉ^l ĉ^k + γ Σ_{i<j} e^{ij} F_{ij}`.
pub fn curvature_exponent<T: RealScalar>(
    cd: &CurvatureData<T>,
    beta: &Rational,
    gamma: &Rational,
) -> ModelElement<T> {
    let n = cd.n();
    let rank = cd.rank();
    let mut e = ModelElement::zero(n, rank);
    let b = T::from_rational(beta);
    for i in 0..n {
        for j in 0..n {
            if i == j {
                continue;
            }
            let form = MultiIndex::from_mask((1 << i) | (1 << j));
            let form_sign = wedge_sign(1 << i, 1 << j);
            for k in 0..n {
                for l in 0..n {
                    if k == l {
                        continue;
                    }
                    let r = cd.riem(i, j, k, l);
                    if r.is_zero() {
                        continue;
                    }
                    let word = MultiIndex::from_mask((1 << k) | (1 << l));
                    let word_sign = wedge_sign(1 << l, 1 << k);
                    let c = b.clone() * r.clone() * T::from_i64(form_sign * word_sign);
                    let m = crate::linalg::Matrix::identity(rank).scale(&Complex::new(c, T::zero()));
                    e.add_term(form, word, m);
                }
            }
        }
    }
    let g = Complex::new(T::from_rational(gamma), T::zero());
    for i in 0..n {
        for j in (i + 1)..n {
            let form = MultiIndex::from_mask((1 << i) | (1 << j));
            e.add_term(form, MultiIndex::EMPTY, cd.f_matrix(i, j).scale(&g));
        }
    }
    e
}

/// `exp(tE)` as coefficients of `t^k`, `k = 0..=n/2`; higher powers vanish.
pub fn curvature_exponential<T: RealScalar>(
    cd: &CurvatureData<T>,
    beta: &Rational,
    gamma: &Rational,
) -> Vec<ModelElement<T>> {
    let e = curvature_exponent(cd, beta, gamma);
    let mut out = vec![ModelElement::identity(cd.n(), cd.rank())];
    for k in 1..=(cd.n() / 2 + 1) {
        let next = out[k - 1]
            .mul(&e)
            .scale(&Complex::new(T::from_ratio(1, k as i64), T::zero()));
        if next.is_zero() {
            break;
        }
        out.push(next);
    }
    out
}

/// Coefficients of `t^k` in `tr_{Λ*⊗C^r} exp(tE)`, keeping forms of degree at
/// most `max_degree` (so `k ≤ max_degree / 2`).
pub fn traced_curvature_exponential<T: RealScalar>(
    cd: &CurvatureData<T>,
    beta: &Rational,
    gamma: &Rational,
    max_degree: usize,
) -> Vec<DiffForm<Complex<T>>> {
    let e = curvature_exponent(cd, beta, gamma);
    let id = ModelElement::identity(cd.n(), cd.rank());
    let mut out = vec![id.fiber_trace()];
    let mut power = id;
    let mut factorial = 1i64;
    for k in 1..=(max_degree / 2) {
        factorial *= k as i64;
        let scale = Complex::new(T::from_ratio(1, factorial), T::zero());
        out.push(power.traced_product(&e, max_degree).scale(&scale));
        if k < max_degree / 2 {
            power = power.mul_truncated(&e, max_degree);
        }
    }
    out
}

/// Diagonal heat kernel `(a / (2π sinh 2ta))^{1/2}` of `-d²/dx² + a²x²`.
pub fn scalar_mehler_diag(a: f64, t: f64) -> f64 {
    (a / (2.0 * std::f64::consts::PI * (2.0 * t * a).sinh())).sqrt()
}

/// `Σ_k e^{-ta(2k+1)} |ψ_k(0)|²` over oscillator eigenfunctions, summed until
/// terms fall below `tol` relative to the running total.
pub fn hermite_diag_sum(a: f64, t: f64, tol: f64) -> f64 {
    // only even states are nonzero at 0: |ψ_{2m}(0)|² = sqrt(a/π) (2m-1)!!/(2m)!!
    let mut weight = (a / std::f64::consts::PI).sqrt();
    let mut total = 0.0;
    for m in 0..1_000_000u64 {
        if m > 0 {
            weight *= (2 * m - 1) as f64 / (2 * m) as f64;
        }
        let term = weight * (-t * a * (4 * m + 1) as f64).exp();
        total += term;
        if term <= tol * total {
            break;
        }
    }
    total
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn q_zero_gives_flat_factor() {
        let qm = FormMatrix::<Rational>::zero(7);
        let d = mehler_det_factor(&qm).unwrap();
        assert_eq!(d.terms().len(), 1);
        assert_eq!(d.pi_half, -7);
        assert_eq!(d.terms()[&(-7, MultiIndex::EMPTY)], q(1, 128));
    }

    #[test]
    fn constant_q_rejected() {
        let mut qm = FormMatrix::<Rational>::zero(7);
        qm.set(0, 0, DiffForm::constant_form(7, q(1, 1)));
        assert!(matches!(mehler_det_factor(&qm), Err(Error::NonNilpotentQ)));
    }

    #[test]
    fn scalar_mehler_matches_hermite() {
        for a in [0.5, 1.0, 2.0] {
            for t in [0.05, 0.3, 1.0] {
                let m = scalar_mehler_diag(a, t);
                let h = hermite_diag_sum(a, t, 1e-17);
                assert!((m - h).abs() / m < 1e-10, "a={a} t={t}: {m} vs {h}");
            }
        }
    }
}
