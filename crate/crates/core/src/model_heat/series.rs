use std::collections::BTreeMap;

use crate::exterior::{wedge_sign, DiffForm, MultiIndex};
use crate::scalar::{RealScalar, Scalar};

/// `coeff · π^{pi_half/2}`, keeping powers of π symbolic.
#[derive(Clone, Debug, PartialEq)]
pub struct PiMultiple<T> {
    pub coeff: T,
    pub pi_half: i32,
}

impl<T: RealScalar> PiMultiple<T> {
    pub fn new(coeff: T, pi_half: i32) -> Self {
        PiMultiple { coeff, pi_half }
    }

    pub fn to_f64(&self) -> f64 {
        self.coeff.to_f64() * std::f64::consts::PI.powf(self.pi_half as f64 / 2.0)
    }

    pub fn mul(&self, other: &Self) -> Self {
        PiMultiple {
            coeff: self.coeff.clone() * other.coeff.clone(),
            pi_half: self.pi_half + other.pi_half,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.coeff.is_zero()
    }
}

/// Laurent polynomial in `t^{1/2}` times `π^{pi_half/2}`. Keys are twice the power of `t`.
#[derive(Clone, Debug, PartialEq)]
pub struct LaurentSeries<T> {
    pub pi_half: i32,
    pub terms: BTreeMap<i32, T>,
}

impl<T: Scalar> LaurentSeries<T> {
    pub fn zero(pi_half: i32) -> Self {
        LaurentSeries {
            pi_half,
            terms: BTreeMap::new(),
        }
    }

    pub fn add_term(&mut self, twice_power: i32, c: T) {
        if c.is_zero() {
            return;
        }
        let slot = self.terms.entry(twice_power).or_insert_with(T::zero);
        *slot = slot.clone() + c;
        if slot.is_zero() {
            self.terms.remove(&twice_power);
        }
    }

    /// Coefficient of `t^{twice_power/2}` (zero when absent).
    pub fn coefficient(&self, twice_power: i32) -> T {
        self.terms.get(&twice_power).cloned().unwrap_or_else(T::zero)
    }

    pub fn scale(&self, s: &T) -> Self {
        let mut out = Self::zero(self.pi_half);
        for (p, c) in &self.terms {
            out.add_term(*p, c.clone() * s.clone());
        }
        out
    }

    /// Drop powers above `t^{max_twice/2}`.
    pub fn truncated(&self, max_twice: i32) -> Self {
        LaurentSeries {
            pi_half: self.pi_half,
            terms: self
                .terms
                .iter()
                .filter(|(p, _)| **p <= max_twice)
                .map(|(p, c)| (*p, c.clone()))
                .collect(),
        }
    }

    pub fn lowest_power(&self) -> Option<i32> {
        self.terms.keys().next().copied()
    }
}

impl<T: RealScalar> LaurentSeries<T> {
    pub fn coefficient_pi(&self, twice_power: i32) -> PiMultiple<T> {
        PiMultiple::new(self.coefficient(twice_power), self.pi_half)
    }

    pub fn evaluate(&self, t: f64) -> f64 {
        let pi = std::f64::consts::PI.powf(self.pi_half as f64 / 2.0);
        self.terms
            .iter()
            .map(|(p, c)| c.to_f64() * t.powf(*p as f64 / 2.0))
            .sum::<f64>()
            * pi
    }

    /// Largest coefficient difference relative to the largest coefficient.
    pub fn relative_distance(&self, other: &Self) -> f64 {
        let pi = |s: &Self| std::f64::consts::PI.powf(s.pi_half as f64 / 2.0);
        let keys: std::collections::BTreeSet<i32> =
            self.terms.keys().chain(other.terms.keys()).copied().collect();
        let mut diff = 0.0f64;
        let mut scale = 0.0f64;
        for k in keys {
            let a = self.coefficient(k).to_f64() * pi(self);
            let b = other.coefficient(k).to_f64() * pi(other);
            diff = diff.max((a - b).abs());
            scale = scale.max(a.abs()).max(b.abs());
        }
        if scale == 0.0 {
            0.0
        } else {
            diff / scale
        }
    }
}

/// Element of `Λ^even(R^n)` with Laurent dependence on `t^{1/2}`, times `π^{pi_half/2}`.
#[derive(Clone, Debug, PartialEq)]
pub struct FormSeries<T> {
    pub n: usize,
    pub pi_half: i32,
    terms: BTreeMap<(i32, MultiIndex), T>,
}

impl<T: Scalar> FormSeries<T> {
    pub fn zero(n: usize) -> Self {
        FormSeries {
            n,
            pi_half: 0,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(n: usize, c: T) -> Self {
        let mut s = Self::zero(n);
        s.add_term(0, MultiIndex::EMPTY, c);
        s
    }

    /// `t^{twice_power/2} · form`.
    pub fn from_form(form: &DiffForm<T>, twice_power: i32) -> Self {
        let mut s = Self::zero(form.n());
        for (i, c) in form.terms() {
            s.add_term(twice_power, *i, c.clone());
        }
        s
    }

    pub fn terms(&self) -> &BTreeMap<(i32, MultiIndex), T> {
        &self.terms
    }

    pub fn add_term(&mut self, twice_power: i32, index: MultiIndex, c: T) {
        if c.is_zero() || index.len() > self.n {
            return;
        }
        let key = (twice_power, index);
        let slot = self.terms.entry(key).or_insert_with(T::zero);
        *slot = slot.clone() + c;
        if slot.is_zero() {
            self.terms.remove(&key);
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.pi_half, other.pi_half, "adding series with different π powers");
        let mut out = self.clone();
        for ((p, i), c) in &other.terms {
            out.add_term(*p, *i, c.clone());
        }
        out
    }

    pub fn scale(&self, s: &T) -> Self {
        let mut out = Self::zero(self.n);
        out.pi_half = self.pi_half;
        for ((p, i), c) in &self.terms {
            out.add_term(*p, *i, c.clone() * s.clone());
        }
        out
    }

    /// Wedge product; forms of degree above `n` vanish automatically.
    pub fn mul(&self, other: &Self) -> Self {
        let mut out = Self::zero(self.n);
        out.pi_half = self.pi_half + other.pi_half;
        for ((p, a), ca) in &self.terms {
            for ((r, b), cb) in &other.terms {
                if !a.is_disjoint(*b) {
                    continue;
                }
                let s = T::from_i64(wedge_sign(a.mask(), b.mask()));
                out.add_term(p + r, a.union(*b), s * ca.clone() * cb.clone());
            }
        }
        out
    }

    /// `exp(self)` for a series without constant part (nilpotent).
    pub fn exp_nilpotent(&self) -> Self {
        assert!(
            self.terms.keys().all(|(_, i)| !i.is_empty()),
            "exp_nilpotent needs a series without degree-0 part"
        );
        let mut out = Self::constant(self.n, T::one());
        let mut power = Self::constant(self.n, T::one());
        for k in 1..=self.n {
            power = power.mul(self).scale(&T::from_ratio(1, k as i64));
            if power.is_zero() {
                break;
            }
            out = out.add(&power);
        }
        out
    }

    /// Drop powers of `t` above `t^{max_twice/2}`.
    pub fn truncated(&self, max_twice: i32) -> Self {
        FormSeries {
            n: self.n,
            pi_half: self.pi_half,
            terms: self
                .terms
                .iter()
                .filter(|((p, _), _)| *p <= max_twice)
                .map(|(k, c)| (*k, c.clone()))
                .collect(),
        }
    }

    /// Coefficient of `dvol` as a Laurent series in `t`.
    pub fn top_component(&self) -> LaurentSeries<T> {
        let top = MultiIndex::full(self.n);
        let mut out = LaurentSeries::zero(self.pi_half);
        for ((p, i), c) in &self.terms {
            if *i == top {
                out.add_term(*p, c.clone());
            }
        }
        out
    }

    /// Wedge on the left with a constant form.
    pub fn wedge_form(&self, w: &DiffForm<T>) -> Self {
        let mut lhs = Self::from_form(w, 0);
        lhs.pi_half = 0;
        lhs.mul(self)
    }
}

/// The form coefficient of `t^{twice_power/2}` in `fs` (the overall `π` factor is `fs.pi_half`).
pub fn extract_t_coefficient<T: Scalar>(fs: &FormSeries<T>, twice_power: i32) -> DiffForm<T> {
    DiffForm::from_terms(
        fs.n,
        fs.terms()
            .iter()
            .filter(|((p, _), _)| *p == twice_power)
            .map(|((_, i), c)| (*i, c.clone())),
    )
}
