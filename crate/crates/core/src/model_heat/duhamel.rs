//! Second-order Duhamel expansion of `e^{-t(L0 + V)}(0,0)` around the flat
//! kernel `L0 = -Σ ∂_i²`, with every Gaussian moment evaluated exactly.
//!
//! `V` is a sum of terms `a · o_1 ⋯ o_m` where `a` is a constant coefficient in
//! some algebra and each `o` is `x^i` or `∂_i`. In the interaction picture
//! `e^{sL0} x^i e^{-sL0} = x^i - 2s ∂_i`, and the kernel at the origin of
//! `e^{-tL0} P` is `(Pᵀ g_t)(0)` for the flat Gaussian `g_t`.

use std::collections::BTreeMap;

use num_traits::{One, Zero};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::scalar::{q, Rational};

pub trait DuhamelAlgebra: Clone + Send + Sync {
    fn product(&self, other: &Self) -> Self;
    /// `self += weight · other`.
    fn accumulate(&mut self, other: &Self, weight: &Rational);
    fn is_zero(&self) -> bool;
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Op {
    /// Multiplication by `x^i` (0-based).
    X(usize),
    /// `∂/∂x^i` (0-based).
    D(usize),
}

#[derive(Clone, Debug)]
pub struct PerturbationTerm<A> {
    pub coeff: A,
    pub ops: Vec<Op>,
}

const MAX_DIM: usize = 8;

/// Polynomial in `z` (exponent vector) with Laurent-in-`t` coefficients.
type Poly = BTreeMap<([u8; MAX_DIM], i32), Rational>;

fn poly_add(p: &mut Poly, key: ([u8; MAX_DIM], i32), c: Rational) {
    if c.is_zero() {
        return;
    }
    let slot = p.entry(key).or_insert_with(Rational::zero);
    *slot += c;
    if slot.is_zero() {
        p.remove(&key);
    }
}

/// `(Wᵀ g)(0) / g(0)` for the operator word `W`, as a Laurent polynomial in `t`.
fn gaussian_moment(word: &[Op]) -> BTreeMap<i32, Rational> {
    let mut p: Poly = BTreeMap::new();
    p.insert(([0; MAX_DIM], 0), Rational::one());
    // Wᵀ = o_mᵀ ⋯ o_1ᵀ, so o_1ᵀ acts on g first
    for op in word {
        let mut next = Poly::new();
        for ((e, tp), c) in &p {
            match *op {
                Op::X(a) => {
                    let mut e2 = *e;
                    e2[a] += 1;
                    poly_add(&mut next, (e2, *tp), c.clone());
                }
                Op::D(b) => {
                    // ∂ᵀ(p g) = -(∂p) g + p z/(2t) g
                    if e[b] > 0 {
                        let mut e2 = *e;
                        e2[b] -= 1;
                        poly_add(&mut next, (e2, *tp), -c.clone() * Rational::from_integer(e[b].into()));
                    }
                    let mut e2 = *e;
                    e2[b] += 1;
                    poly_add(&mut next, (e2, tp - 1), c.clone() * q(1, 2));
                }
            }
        }
        p = next;
    }
    p.into_iter()
        .filter(|((e, _), _)| e.iter().all(|&x| x == 0))
        .map(|((_, tp), c)| (tp, c))
        .collect()
}

/// Expand conjugated factors `V(s_k) ⋯ V(s_1)` into plain words with their
/// `s`-monomials. `factors[0]` carries the latest time.
fn conjugated_words(factors: &[&[Op]]) -> Vec<(Vec<Op>, [u32; 2], Rational)> {
    let k = factors.len();
    let mut out = vec![(Vec::new(), [0u32; 2], Rational::one())];
    for (pos, ops) in factors.iter().enumerate() {
        let label = k - 1 - pos;
        for op in ops.iter() {
            let mut next = Vec::with_capacity(out.len() * 2);
            for (w, s, c) in &out {
                let mut w1 = w.clone();
                w1.push(*op);
                next.push((w1, *s, c.clone()));
                if let Op::X(a) = op {
                    let mut w2 = w.clone();
                    w2.push(Op::D(*a));
                    let mut s2 = *s;
                    s2[label] += 1;
                    next.push((w2, s2, c.clone() * Rational::from_integer((-2).into())));
                }
            }
            out = next;
        }
    }
    out
}

/// Weight of an ordered product of perturbation words, integrated over the time
/// simplex and including the sign `(-1)^k`. Keys are powers of `t`.
pub fn duhamel_weight(factors: &[&[Op]]) -> Result<BTreeMap<i32, Rational>> {
    let k = factors.len();
    if k > 2 {
        return Err(Error::UnsupportedOrder(k));
    }
    let mut acc: BTreeMap<i32, Rational> = BTreeMap::new();
    for (word, s, c) in conjugated_words(factors) {
        let moment = gaussian_moment(&word);
        if moment.is_empty() {
            continue;
        }
        // ∫_0^t s^a = t^{a+1}/(a+1); ∫∫_{s1<s2<t} s1^a s2^b = t^{a+b+2}/((a+1)(a+b+2))
        let (gain, factor) = match k {
            0 => (0, Rational::one()),
            1 => (s[0] as i32 + 1, q(1, s[0] as i64 + 1)),
            _ => {
                let (a, b) = (s[0] as i64, s[1] as i64);
                ((a + b + 2) as i32, q(1, (a + 1) * (a + b + 2)))
            }
        };
        let sign = if k.is_multiple_of(2) { Rational::one() } else { -Rational::one() };
        for (tp, m) in moment {
            let v = m * c.clone() * factor.clone() * sign.clone();
            let slot = acc.entry(tp + gain).or_insert_with(Rational::zero);
            *slot += v;
        }
    }
    acc.retain(|_, v| !v.is_zero());
    Ok(acc)
}

/// Diagonal kernel at the origin divided by `(4πt)^{-n/2}`, as a polynomial in
/// `t` through `t^{max_power}`.
pub fn duhamel_expand<A: DuhamelAlgebra>(
    terms: &[PerturbationTerm<A>],
    identity: &A,
    zero: &A,
    order: usize,
    max_power: i32,
) -> Result<BTreeMap<i32, A>> {
    if order > 2 {
        return Err(Error::UnsupportedOrder(order));
    }
    let mut out: BTreeMap<i32, A> = BTreeMap::new();
    let add = |out: &mut BTreeMap<i32, A>, tp: i32, coeff: &A, w: &Rational| {
        out.entry(tp)
            .or_insert_with(|| zero.clone())
            .accumulate(coeff, w);
    };
    add(&mut out, 0, identity, &Rational::one());
    let live: Vec<&PerturbationTerm<A>> = terms.iter().filter(|t| !t.coeff.is_zero()).collect();
    if order >= 1 {
        for term in &live {
            for (tp, w) in duhamel_weight(&[&term.ops])? {
                if tp <= max_power {
                    add(&mut out, tp, &term.coeff, &w);
                }
            }
        }
    }
    if order >= 2 {
        let partials: Vec<Result<BTreeMap<i32, A>>> = live
            .par_iter()
            .map(|a| {
                let mut local: BTreeMap<i32, A> = BTreeMap::new();
                for b in &live {
                    let weight = duhamel_weight(&[&a.ops, &b.ops])?;
                    let relevant: Vec<_> = weight.into_iter().filter(|(tp, _)| *tp <= max_power).collect();
                    if relevant.is_empty() {
                        continue;
                    }
                    let prod = a.coeff.product(&b.coeff);
                    for (tp, w) in relevant {
                        local
                            .entry(tp)
                            .or_insert_with(|| zero.clone())
                            .accumulate(&prod, &w);
                    }
                }
                Ok(local)
            })
            .collect();
        for partial in partials {
            for (tp, a) in partial? {
                add(&mut out, tp, &a, &Rational::one());
            }
        }
    }
    out.retain(|_, a| !a.is_zero());
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bridge_variance() {
        // first order in x^2: -∫ 2s(t-s)/t ds = -t²/3
        let w = duhamel_weight(&[&[Op::X(0), Op::X(0)]]).unwrap();
        assert_eq!(w, BTreeMap::from([(2, q(-1, 3))]));
        // cross moments vanish
        assert!(duhamel_weight(&[&[Op::X(0), Op::X(1)]]).unwrap().is_empty());
    }

    #[test]
    fn constant_perturbation_orders() {
        let w1 = duhamel_weight(&[&[]]).unwrap();
        assert_eq!(w1, BTreeMap::from([(1, q(-1, 1))]));
        let w2 = duhamel_weight(&[&[], &[]]).unwrap();
        assert_eq!(w2, BTreeMap::from([(2, q(1, 2))]));
    }

    #[test]
    fn rotation_generator_kills_the_diagonal() {
        // x^1 ∂_0 - x^0 ∂_1 annihilates radial functions
        let a = duhamel_weight(&[&[Op::X(1), Op::D(0)]]).unwrap();
        let b = duhamel_weight(&[&[Op::X(0), Op::D(1)]]).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn order_three_rejected() {
        assert!(matches!(
            duhamel_weight(&[&[], &[], &[]]),
            Err(Error::UnsupportedOrder(3))
        ));
    }
}
