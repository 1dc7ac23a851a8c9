//! Spectrum of the Hodge Laplacian on 2-forms of the unit flat torus
//! `R^n / Z^n`, optionally twisted by a flat line bundle with holonomy angles
//! `θ`. Eigen-2-forms are `e^{2πi(k+θ)·x} α` with `α` a constant 2-form, so each
//! lattice point contributes `7` to `Λ_7` and `14` (or `21`) to the large summand.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use num_traits::{ToPrimitive, Zero};
use rayon::prelude::*;
use statrs::function::gamma::gamma;

use crate::error::{Error, Result};
use crate::holonomy::HolonomyKind;
use crate::scalar::{q, Rational};

const FOUR_PI_SQ: f64 = 4.0 * PI * PI;

#[derive(Clone, Debug, PartialEq)]
pub struct SpectralLevel {
    /// `|k + θ|²`.
    pub q: Rational,
    /// `4π² q`.
    pub lambda: f64,
    pub lattice_count: u64,
    pub mult_7: u64,
    pub mult_big: u64,
}

impl SpectralLevel {
    fn new(kind: HolonomyKind, q: Rational, lattice_count: u64) -> Self {
        SpectralLevel {
            lambda: FOUR_PI_SQ * q.to_f64().unwrap_or(f64::NAN),
            q,
            lattice_count,
            mult_7: 7 * lattice_count,
            mult_big: kind.big_dimension() as u64 * lattice_count,
        }
    }

    pub fn is_zero_mode(&self) -> bool {
        self.q.is_zero()
    }
}

/// Truncated 2-form spectrum of a flat torus.
#[derive(Clone, Debug, PartialEq)]
pub struct Spectrum {
    pub kind: HolonomyKind,
    pub q_max: u64,
    pub theta: Vec<Rational>,
    /// Increasing in `q`; zero modes included.
    pub levels: Vec<SpectralLevel>,
}

fn kind_for(n: usize) -> Result<HolonomyKind> {
    match n {
        7 => Ok(HolonomyKind::G2),
        8 => Ok(HolonomyKind::Spin7),
        _ => Err(Error::UnsupportedDimension(n)),
    }
}

/// `r_n(m)` for `m ≤ q_max`, by convolving the one-dimensional counts.
pub fn lattice_counts(n: usize, q_max: u64) -> Vec<u64> {
    let len = q_max as usize + 1;
    let mut one = vec![0u64; len];
    let mut k = 0usize;
    while k * k < len {
        one[k * k] = if k == 0 { 1 } else { 2 };
        k += 1;
    }
    let mut acc = vec![0u64; len];
    acc[0] = 1;
    for _ in 0..n {
        let mut next = vec![0u64; len];
        for (a, &x) in acc.iter().enumerate().filter(|(_, x)| **x != 0) {
            for (b, &y) in one[..len - a].iter().enumerate().filter(|(_, y)| **y != 0) {
                next[a + b] += x * y;
            }
        }
        acc = next;
    }
    acc
}

/// `r_n(m)` by scanning the box `[-R, R]^n` with the norm filter, pruning
/// partial vectors whose norm already exceeds `q_max`.
pub fn brute_force_counts(n: usize, q_max: u64) -> Vec<u64> {
    let radius = (q_max as f64).sqrt().floor() as i64;
    fn scan(dims_left: usize, norm: u64, q_max: u64, radius: i64, out: &mut [u64]) {
        if dims_left == 0 {
            out[norm as usize] += 1;
            return;
        }
        for k in -radius..=radius {
            let next = norm + (k * k) as u64;
            if next <= q_max {
                scan(dims_left - 1, next, q_max, radius, out);
            }
        }
    }
    (-radius..=radius)
        .into_par_iter()
        .map(|k0| {
            let mut out = vec![0u64; q_max as usize + 1];
            let norm = (k0 * k0) as u64;
            if norm <= q_max {
                scan(n - 1, norm, q_max, radius, &mut out);
            }
            out
        })
        .reduce(
            || vec![0u64; q_max as usize + 1],
            |mut a, b| {
                a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
                a
            },
        )
}

/// All levels with `|k|² ≤ q_max` on `R^n / Z^n`, zero modes included.
pub fn enumerate_levels(n: usize, q_max: u64) -> Result<Spectrum> {
    let kind = kind_for(n)?;
    if q_max < 1 {
        return Err(Error::InvalidArgument("q_max must be at least 1".into()));
    }
    let levels = lattice_counts(n, q_max)
        .into_iter()
        .enumerate()
        .filter(|(_, c)| *c > 0)
        .map(|(m, c)| SpectralLevel::new(kind, q(m as i64, 1), c))
        .collect();
    Ok(Spectrum {
        kind,
        q_max,
        theta: vec![Rational::zero(); n],
        levels,
    })
}

/// Levels `|k + θ|² ≤ q_max` for a flat line bundle with holonomy `e^{2πiθ}`.
pub fn twisted_levels(theta: &[Rational], q_max: u64) -> Result<Spectrum> {
    let n = theta.len();
    let kind = kind_for(n)?;
    if q_max < 1 {
        return Err(Error::InvalidArgument("q_max must be at least 1".into()));
    }
    let unit = q(1, 1);
    if theta.iter().any(|t| *t < Rational::zero() || *t >= unit) {
        return Err(Error::InvalidArgument("holonomy angles must lie in [0, 1)".into()));
    }
    let bound = q(q_max as i64, 1);
    let radius = (q_max as f64).sqrt().ceil() as i64 + 1;
    fn scan(
        theta: &[Rational],
        norm: Rational,
        bound: &Rational,
        radius: i64,
        out: &mut BTreeMap<Rational, u64>,
    ) {
        let Some((first, rest)) = theta.split_first() else {
            *out.entry(norm).or_insert(0) += 1;
            return;
        };
        for k in -radius..=radius {
            let x = q(k, 1) + first;
            let next = &norm + &x * &x;
            if next <= *bound {
                scan(rest, next, bound, radius, out);
            }
        }
    }
    let mut counts = BTreeMap::new();
    scan(theta, Rational::zero(), &bound, radius, &mut counts);
    Ok(Spectrum {
        kind,
        q_max,
        theta: theta.to_vec(),
        levels: counts
            .into_iter()
            .map(|(norm, c)| SpectralLevel::new(kind, norm, c))
            .collect(),
    })
}

/// Per-level weight `w_7 · mult_7 + w_big · mult_big`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SpectralWeight {
    pub w7: i64,
    pub w_big: i64,
}

impl SpectralWeight {
    pub const LAMBDA7: SpectralWeight = SpectralWeight { w7: 1, w_big: 0 };
    pub const BIG: SpectralWeight = SpectralWeight { w7: 0, w_big: 1 };

    /// `ζ_δ = 2ζ_7 − ζ_14` (G2) or `3ζ_7 − ζ_21` (Spin(7)): the trace of `*e(w)`.
    pub fn delta(kind: HolonomyKind) -> Self {
        SpectralWeight {
            w7: kind.eigenvalues().0,
            w_big: -1,
        }
    }

    pub fn of(&self, level: &SpectralLevel) -> i64 {
        self.w7 * level.mult_7 as i64 + self.w_big * level.mult_big as i64
    }

    /// Weight carried by a single lattice point.
    pub fn per_lattice_point(&self, kind: HolonomyKind) -> i64 {
        7 * self.w7 + kind.big_dimension() as i64 * self.w_big
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ZetaPartial {
    pub sum: f64,
    /// Bound on the absolute value of the omitted tail `λ > 4π²·cutoff`.
    pub tail_bound: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct MellinReport {
    pub direct: f64,
    pub mellin: f64,
    pub difference: f64,
}

impl Spectrum {
    pub fn n(&self) -> usize {
        self.kind.dimension()
    }

    pub fn lambda_max(&self) -> f64 {
        FOUR_PI_SQ * self.q_max as f64
    }

    /// `(N_7(x), N_big(x))` over nonzero eigenvalues `λ ≤ x`.
    pub fn counting_functions(&self, x: f64) -> Result<(u64, u64)> {
        if x > self.lambda_max() {
            return Err(Error::BeyondRange {
                x,
                limit: self.lambda_max(),
            });
        }
        Ok(self
            .levels
            .iter()
            .filter(|l| !l.is_zero_mode() && l.lambda <= x)
            .fold((0, 0), |(a, b), l| (a + l.mult_7, b + l.mult_big)))
    }

    /// Levels with nonzero eigenvalue and `q ≤ cutoff`.
    fn nonzero_up_to(&self, cutoff: u64) -> impl Iterator<Item = &SpectralLevel> {
        let c = q(cutoff as i64, 1);
        self.levels
            .iter()
            .filter(move |l| !l.is_zero_mode() && l.q <= c)
    }

    /// `Σ_{0<λ≤4π²·cutoff} weight · λ^{-s}` with an integral-comparison tail bound.
    /// Divergent exponents `s ≤ n/2` are rejected unless `allow_divergent`.
    pub fn zeta_partial(
        &self,
        weight: SpectralWeight,
        s: f64,
        cutoff: u64,
        allow_divergent: bool,
    ) -> Result<ZetaPartial> {
        let n = self.n();
        let threshold = n as f64 / 2.0;
        if cutoff > self.q_max {
            return Err(Error::BeyondRange {
                x: cutoff as f64,
                limit: self.q_max as f64,
            });
        }
        if s <= threshold && !allow_divergent {
            return Err(Error::DivergentZeta { s, threshold });
        }
        let sum = self
            .nonzero_up_to(cutoff)
            .map(|l| weight.of(l) as f64 * l.lambda.powf(-s))
            .sum();
        let per_point = weight.per_lattice_point(self.kind).unsigned_abs() as f64;
        let tail_bound = if per_point == 0.0 {
            0.0
        } else if s <= threshold {
            f64::INFINITY
        } else {
            per_point * FOUR_PI_SQ.powf(-s) * lattice_tail_bound(n, (cutoff as f64).sqrt(), s)
        };
        Ok(ZetaPartial { sum, tail_bound })
    }

    /// `Σ mult · e^{-tλ}` over all levels (zero modes included), or the trace
    /// against `*e(w)` when `weighted`.
    pub fn heat_trace(&self, t: f64, weighted: bool) -> Result<f64> {
        if t <= 0.0 {
            return Err(Error::InvalidArgument("t must be positive".into()));
        }
        let weight = if weighted {
            SpectralWeight::delta(self.kind)
        } else {
            SpectralWeight { w7: 1, w_big: 1 }
        };
        Ok(self
            .levels
            .iter()
            .map(|l| weight.of(l) as f64 * (-t * l.lambda).exp())
            .sum())
    }

    /// Compare `Σ w λ^{-s}` with `Γ(s+1)^{-1} ∫_0^∞ t^s Σ w λ e^{-tλ} dt` over
    /// the levels with `0 < q ≤ cutoff`.
    pub fn mellin_equivalence(&self, weight: SpectralWeight, s: f64, cutoff: u64) -> Result<MellinReport> {
        let terms: Vec<(f64, f64)> = self
            .nonzero_up_to(cutoff)
            .map(|l| (weight.of(l) as f64, l.lambda))
            .filter(|(w, _)| *w != 0.0)
            .collect();
        mellin_compare(&terms, s)
    }

    /// `N_7(x) (4π)^{n/2} Γ(n/2 + 1) / (7 x^{n/2})`, which tends to the volume 1.
    pub fn weyl_ratio(&self, x: f64) -> Result<f64> {
        let n = self.n() as f64;
        let (n7, _) = self.counting_functions(x)?;
        Ok(n7 as f64 * (4.0 * PI).powf(n / 2.0) * gamma(n / 2.0 + 1.0) / (7.0 * x.powf(n / 2.0)))
    }
}

/// Upper bound for `Σ_{|k+θ| > R0} |k+θ|^{-2s}` over a shifted unit lattice.
/// Each point owns its unit cube, on which `|x| ≤ |k+θ| + c` with `c = √n/2`.
fn lattice_tail_bound(n: usize, r0: f64, s: f64) -> f64 {
    let c = (n as f64).sqrt() / 2.0;
    let u0 = r0 - 2.0 * c;
    if u0 <= 0.0 {
        return f64::INFINITY;
    }
    // n V_n ∫_{u0}^∞ u^{-2s} (u + c)^{n-1} du
    let vol_ball = PI.powf(n as f64 / 2.0) / gamma(n as f64 / 2.0 + 1.0);
    let mut binom = 1.0;
    let mut total = 0.0;
    for k in 0..n {
        let e = k as f64 + 1.0 - 2.0 * s;
        total += binom * c.powi((n - 1 - k) as i32) * u0.powf(e) / -e;
        binom = binom * (n - 1 - k) as f64 / (k + 1) as f64;
    }
    n as f64 * vol_ball * total
}

fn trapezoid_log(terms: &[(f64, f64)], s: f64, lo: f64, hi: f64, h: f64) -> f64 {
    let steps = ((hi - lo) / h).ceil() as usize;
    let h = (hi - lo) / steps as f64;
    (0..=steps)
        .into_par_iter()
        .map(|i| {
            let u = lo + i as f64 * h;
            let t = u.exp();
            let f: f64 = terms.iter().map(|(w, lam)| w * lam * (-t * lam).exp()).sum();
            let edge = if i == 0 || i == steps { 0.5 } else { 1.0 };
            edge * t.powf(s + 1.0) * f
        })
        .sum::<f64>()
        * h
}

/// Direct sum `Σ w λ^{-s}` against the Mellin transform of `Σ w λ e^{-tλ}`,
/// integrated by the trapezoid rule in `u = ln t`.
pub fn mellin_compare(terms: &[(f64, f64)], s: f64) -> Result<MellinReport> {
    if s <= -1.0 {
        return Err(Error::InvalidArgument("Mellin transform needs s > -1".into()));
    }
    let direct: f64 = terms.iter().map(|(w, lam)| w * lam.powf(-s)).sum();
    if terms.is_empty() {
        return Ok(MellinReport {
            direct,
            mellin: 0.0,
            difference: 0.0,
        });
    }
    let lam_min = terms.iter().map(|t| t.1).fold(f64::INFINITY, f64::min);
    let lam_max = terms.iter().map(|t| t.1).fold(0.0, f64::max);
    // t^{s+1} ≤ e^{-40} below lo; e^{-tλ_min} ≤ e^{-60} above hi
    let lo = ((s + 1.0) / lam_max).ln() - 40.0 / (s + 1.0);
    let hi = (60.0 / lam_min).ln();
    let coarse = trapezoid_log(terms, s, lo, hi, 0.05);
    let fine = trapezoid_log(terms, s, lo, hi, 0.025);
    let scale = terms.iter().map(|(w, lam)| w.abs() * lam.powf(-s)).sum::<f64>();
    if (coarse - fine).abs() > 1e-12 * scale.max(f64::MIN_POSITIVE) {
        return Err(Error::QuadratureFailure(format!(
            "trapezoid steps 0.05 and 0.025 differ by {:e}",
            (coarse - fine).abs()
        )));
    }
    let mellin = fine / gamma(s + 1.0);
    Ok(MellinReport {
        direct,
        mellin,
        difference: (direct - mellin).abs(),
    })
}

/// `dim Λ² · (4πt)^{-n/2} (Σ_m e^{-m²/4t})^n`: the Poisson-dual form of the
/// unweighted heat trace.
pub fn poisson_heat_trace(n: usize, t: f64) -> f64 {
    let mut theta = 0.0;
    for m in 0..1000i64 {
        let term = (-(m * m) as f64 / (4.0 * t)).exp();
        theta += if m == 0 { term } else { 2.0 * term };
        if term < 1e-300 {
            break;
        }
    }
    (n * (n - 1) / 2) as f64 * (4.0 * PI * t).powf(-(n as f64) / 2.0) * theta.powi(n as i32)
}
