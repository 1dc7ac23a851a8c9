//! Chern–Weil forms from constant curvature data, the residue density
//! `w ∧ (p1/3 + c1² − c2)`, and the Γ-factor arithmetic that turns the heat
//! coefficient into the residue of `ζ_δ` at its first pole.
//!
//! Every characteristic form carries an overall `π^{-2}`; forms here store the
//! rational (or float) coefficient of that power.

use num_complex::Complex;
use num_traits::One;

use crate::error::{Error, Result};
use crate::exterior::{DiffForm, MultiIndex};
use crate::holonomy::{instanton_check, HolonomyKind, HolonomyStructure};
use crate::model_heat::{mehler_diag_trace, residue_twice_power, CurvatureData, HeatModel, PiMultiple};
use crate::scalar::{q, Rational, RealScalar, Scalar};

/// A form times `π^{pi_half/2}`.
#[derive(Clone, Debug, PartialEq)]
pub struct PiForm<T> {
    pub form: DiffForm<T>,
    pub pi_half: i32,
}

impl<T: RealScalar> PiForm<T> {
    pub fn coefficient(&self, i: MultiIndex) -> PiMultiple<T> {
        PiMultiple::new(self.form.coefficient(i), self.pi_half)
    }

    /// The `dvol` coefficient: the integral over the unit-volume flat torus.
    pub fn integral(&self) -> PiMultiple<T> {
        self.coefficient(MultiIndex::full(self.form.n()))
    }
}

fn real_part<T: RealScalar>(f: &DiffForm<Complex<T>>, what: &str) -> Result<DiffForm<T>> {
    let scale = f.terms().values().map(Scalar::magnitude).fold(1.0, f64::max);
    for c in f.terms().values() {
        let bad = if T::is_exact() {
            !c.im.is_zero()
        } else {
            c.im.magnitude() > 1e-10 * scale
        };
        if bad {
            return Err(Error::NotSkewHermitian(format!("{what} has an imaginary part")));
        }
    }
    Ok(f.map(|c| c.re.clone()))
}

/// `p1 = −(1/8π²) Σ_{i,j} Ω_{ij} ∧ Ω_{ji}`.
pub fn pontryagin_p1<T: RealScalar>(cd: &CurvatureData<T>) -> PiForm<T> {
    let n = cd.n();
    let omegas: Vec<DiffForm<T>> = (0..n * n).map(|k| cd.omega(k / n, k % n)).collect();
    let mut acc = DiffForm::zero(n);
    for i in 0..n {
        for j in 0..n {
            let (a, b) = (&omegas[i * n + j], &omegas[j * n + i]);
            if !a.is_zero() && !b.is_zero() {
                acc = acc.add(&a.wedge(b).unwrap()).unwrap();
            }
        }
    }
    PiForm {
        form: acc.scale(&T::from_ratio(-1, 8)),
        pi_half: -2 * 2,
    }
}

/// `c1 = (i/2π) tr F̂` and `c2 = −(1/8π²)(tr F̂ ∧ tr F̂ − tr(F̂ ∧ F̂))`.
pub fn chern_forms<T: RealScalar>(cd: &CurvatureData<T>) -> Result<(PiForm<T>, PiForm<T>)> {
    let n = cd.n();
    let r = cd.rank();
    let entries: Vec<DiffForm<Complex<T>>> =
        (0..r * r).map(|k| cd.curvature_form_entry(k / r, k % r)).collect();
    let mut tr = DiffForm::zero(n);
    for a in 0..r {
        tr = tr.add(&entries[a * r + a])?;
    }
    let mut tr_sq = DiffForm::zero(n);
    for a in 0..r {
        for b in 0..r {
            let (x, y) = (&entries[a * r + b], &entries[b * r + a]);
            if !x.is_zero() && !y.is_zero() {
                tr_sq = tr_sq.add(&x.wedge(y)?)?;
            }
        }
    }
    let half_i = Complex::new(T::zero(), T::from_ratio(1, 2));
    let c1 = real_part(&tr.scale(&half_i), "c1")?;
    let minus_eighth = Complex::new(T::from_ratio(-1, 8), T::zero());
    let c2 = real_part(&tr.wedge(&tr)?.sub(&tr_sq)?.scale(&minus_eighth), "c2")?;
    Ok((PiForm { form: c1, pi_half: -2 }, PiForm { form: c2, pi_half: -4 }))
}

/// `p1/3 + c1 ∧ c1 − c2`, coefficient of `π^{-2}`.
pub fn characteristic_combination<T: RealScalar>(cd: &CurvatureData<T>) -> Result<PiForm<T>> {
    let p1 = pontryagin_p1(cd);
    let (c1, c2) = chern_forms(cd)?;
    let form = p1
        .form
        .scale(&T::from_ratio(1, 3))
        .add(&c1.form.wedge(&c1.form)?)?
        .sub(&c2.form)?;
    Ok(PiForm { form, pi_half: -4 })
}

/// `w ∧ (p1/3 + c1² − c2)`, a multiple of `dvol · π^{-2}`.
pub fn residue_density<T: RealScalar>(s: &HolonomyStructure, cd: &CurvatureData<T>) -> Result<PiForm<T>> {
    if cd.n() != s.n {
        return Err(Error::DimensionMismatch { left: s.n, right: cd.n() });
    }
    let combo = characteristic_combination(cd)?;
    let w: DiffForm<T> = s.defining_form.map(T::from_rational);
    Ok(PiForm {
        form: w.wedge(&combo.form)?.component(s.n),
        pi_half: combo.pi_half,
    })
}

/// `2^{4−n} · w ∧ (r·p1/3 + c1²/2 − c2)`: the closed form matched by the
/// calibrated heat model at residue order, with the same `π` bookkeeping as
/// [`residue_density`].
pub fn heat_model_density<T: RealScalar>(s: &HolonomyStructure, cd: &CurvatureData<T>) -> Result<PiForm<T>> {
    if cd.n() != s.n {
        return Err(Error::DimensionMismatch { left: s.n, right: cd.n() });
    }
    let p1 = pontryagin_p1(cd);
    let (c1, c2) = chern_forms(cd)?;
    let ch2 = c1.form.wedge(&c1.form)?.scale(&T::from_ratio(1, 2)).sub(&c2.form)?;
    let combo = p1
        .form
        .scale(&T::from_ratio(cd.rank() as i64, 3))
        .add(&ch2)?
        .scale(&T::from_ratio(1, 1 << (s.n - 4)));
    let w: DiffForm<T> = s.defining_form.map(T::from_rational);
    Ok(PiForm {
        form: w.wedge(&combo)?.component(s.n),
        pi_half: -4,
    })
}

/// `Γ(x)` for `x = twice_x/2 > 0`, as a rational multiple of `π^{0}` or `π^{1/2}`.
pub fn gamma_half_integer(twice_x: u32) -> PiMultiple<Rational> {
    assert!(twice_x > 0, "Γ has a pole at 0");
    if twice_x.is_multiple_of(2) {
        let k = twice_x / 2;
        let v = (1..k).fold(Rational::one(), |acc, m| acc * q(m as i64, 1));
        PiMultiple::new(v, 0)
    } else {
        // Γ(1/2) = √π, Γ(x+1) = xΓ(x)
        let mut v = Rational::one();
        let mut x2 = 1;
        while x2 < twice_x {
            v *= q(x2 as i64, 2);
            x2 += 2;
        }
        PiMultiple::new(v, 1)
    }
}

/// `π^{−deg w/2} / Γ(deg w/2 + 1)`: residue per unit of `∫ w ∧ (p1/3 + c1² − c2)`.
pub fn twisted_constant(kind: HolonomyKind) -> PiMultiple<Rational> {
    let deg = kind.form_degree() as u32;
    let g = gamma_half_integer(deg + 2);
    PiMultiple::new(Rational::one() / g.coeff, -(deg as i32) - g.pi_half)
}

/// Residue per unit of `∫ p1 ∧ w`, as displayed for the untwisted case.
pub fn untwisted_constant(kind: HolonomyKind) -> PiMultiple<Rational> {
    let c = twisted_constant(kind);
    PiMultiple::new(c.coeff * q(1, 3), c.pi_half)
}

/// The published constants `(untwisted, twisted)`.
pub fn displayed_constants(kind: HolonomyKind) -> (PiMultiple<Rational>, PiMultiple<Rational>) {
    match kind {
        HolonomyKind::G2 => (PiMultiple::new(q(4, 9), -4), PiMultiple::new(q(4, 3), -4)),
        HolonomyKind::Spin7 => (PiMultiple::new(q(1, 6), -4), PiMultiple::new(q(1, 2), -4)),
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ResidueReport<T> {
    pub kind: HolonomyKind,
    pub twisted: bool,
    /// `w ∧ (p1/3 + c1² − c2)`.
    pub density: PiForm<T>,
    /// `dvol` coefficient of the density.
    pub integral: PiMultiple<T>,
    /// `b = π^{−deg w/2} · integral`.
    pub b_coefficient: PiMultiple<T>,
    pub residue: PiMultiple<T>,
    /// `deg w / 2`.
    pub pole_location: Rational,
    /// `Γ(pole_location + 1)`.
    pub gamma_factor: PiMultiple<Rational>,
    /// Residue per unit of the displayed integrand: `∫p1∧w` when untwisted, the
    /// full density integral when twisted.
    pub constant: PiMultiple<Rational>,
    /// Whether `constant` equals the published one.
    pub matches_displayed_constant: bool,
    /// Whether `twisted constant × 1/3 = untwisted constant`.
    pub constants_consistent: bool,
}

/// Apply `b = π^{−deg/2}·∫density` and `residue = b / Γ(deg/2 + 1)`.
pub fn residue_value<T: RealScalar>(
    s: &HolonomyStructure,
    twisted: bool,
    density: PiForm<T>,
) -> ResidueReport<T> {
    let deg = s.degree() as i32;
    let integral = density.integral();
    let b = PiMultiple::new(integral.coeff.clone(), integral.pi_half - deg);
    let gamma_factor = gamma_half_integer(deg as u32 + 2);
    let residue = PiMultiple::new(
        b.coeff.clone() / T::from_rational(&gamma_factor.coeff),
        b.pi_half - gamma_factor.pi_half,
    );
    let constant = if twisted {
        twisted_constant(s.kind)
    } else {
        untwisted_constant(s.kind)
    };
    let (shown_untwisted, shown_twisted) = displayed_constants(s.kind);
    let shown = if twisted { &shown_twisted } else { &shown_untwisted };
    let constants_consistent = PiMultiple::new(shown_twisted.coeff.clone() * q(1, 3), shown_twisted.pi_half)
        == shown_untwisted;
    ResidueReport {
        kind: s.kind,
        twisted,
        density,
        integral,
        b_coefficient: b,
        residue,
        pole_location: q(deg as i64, 2),
        gamma_factor,
        matches_displayed_constant: &constant == shown,
        constant,
        constants_consistent,
    }
}

/// Full pipeline from curvature data; `twisted` is set when `F ≠ 0`.
pub fn compute_residue<T: RealScalar>(s: &HolonomyStructure, cd: &CurvatureData<T>) -> Result<ResidueReport<T>> {
    let density = residue_density(s, cd)?;
    Ok(residue_value(s, cd.has_bundle_curvature(), density))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SignStatus {
    /// Flat data: the residue is exactly zero.
    Flat,
    /// Negative residue, as predicted for instantons.
    ConsistentWithCorollary,
    /// Zero residue on curved data.
    Zero,
    /// Positive residue for an instanton: a violation of nonpositivity.
    Violation,
    /// `F` has a `Λ_7` component, so no sign conclusion is drawn.
    NotInstanton,
}

impl SignStatus {
    pub fn label(&self) -> &'static str {
        match self {
            SignStatus::Flat => "flat: residue exactly 0",
            SignStatus::ConsistentWithCorollary => "consistent with Corollary",
            SignStatus::Zero => "residue 0 on curved data",
            SignStatus::Violation => "violates nonpositivity",
            SignStatus::NotInstanton => "not an instanton: no sign conclusion",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SignReport {
    pub status: SignStatus,
    pub residue: f64,
    pub max_lambda7_component: f64,
}

pub fn sign_report<T: RealScalar>(s: &HolonomyStructure, cd: &CurvatureData<T>, tol: f64) -> Result<SignReport> {
    let inst = instanton_check(s, cd, tol)?;
    let report = compute_residue(s, cd)?;
    let residue = report.residue.to_f64();
    let status = if !inst.is_instanton {
        SignStatus::NotInstanton
    } else if cd.is_flat() {
        SignStatus::Flat
    } else if report.residue.coeff.is_negligible(tol) {
        SignStatus::Zero
    } else if residue < 0.0 {
        SignStatus::ConsistentWithCorollary
    } else {
        SignStatus::Violation
    };
    Ok(SignReport {
        status,
        residue,
        max_lambda7_component: inst.max_lambda7_component,
    })
}

/// Heat coefficient at residue order from the calibrated model against the
/// value `π^{−deg/2}·∫w∧(p1/3 + c1² − c2)` predicted by the density.
#[derive(Clone, Debug, PartialEq)]
pub struct PipelineComparison<T> {
    /// Both values are coefficients of `π^{pi_half/2}`.
    pub pi_half: i32,
    pub model: T,
    pub predicted: T,
    pub relative: f64,
}

impl<T: RealScalar> PipelineComparison<T> {
    pub fn consistent(&self, tol: f64) -> bool {
        self.relative <= tol
    }
}

pub fn pipeline_consistency<T: RealScalar>(
    model: &HeatModel,
    s: &HolonomyStructure,
    cd: &CurvatureData<T>,
) -> Result<PipelineComparison<T>> {
    let series = mehler_diag_trace(model, cd)?;
    let target = residue_twice_power(s);
    let report = compute_residue(s, cd)?;
    let b = report.b_coefficient;
    if series.pi_half != b.pi_half {
        return Err(Error::InvalidArgument(format!(
            "π powers differ: π^({}/2) vs π^({}/2)",
            series.pi_half, b.pi_half
        )));
    }
    let m = series.coefficient(target);
    let diff = (m.clone() - b.coeff.clone()).magnitude();
    let scale = m.magnitude().max(b.coeff.magnitude());
    let relative = if scale == 0.0 { 0.0 } else { diff / scale };
    Ok(PipelineComparison {
        pi_half: b.pi_half,
        model: m,
        predicted: b.coeff,
        relative,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::holonomy::standard_structure;

    #[test]
    fn gamma_values() {
        assert_eq!(gamma_half_integer(5), PiMultiple::new(q(3, 4), 1));
        assert_eq!(gamma_half_integer(6), PiMultiple::new(q(2, 1), 0));
        assert_eq!(gamma_half_integer(1), PiMultiple::new(q(1, 1), 1));
        assert_eq!(gamma_half_integer(2), PiMultiple::new(q(1, 1), 0));
    }

    #[test]
    fn constants_from_gamma_arithmetic() {
        for kind in [HolonomyKind::G2, HolonomyKind::Spin7] {
            let (u, t) = displayed_constants(kind);
            assert_eq!(untwisted_constant(kind), u);
            assert_eq!(twisted_constant(kind), t);
        }
    }

    #[test]
    fn coupled_p1() {
        let k = q(1, 1);
        let cd = CurvatureData::from_entries(
            7,
            1,
            &[
                ([1, 2, 1, 2], k.clone()),
                ([1, 2, 3, 4], k.clone()),
                ([3, 4, 3, 4], k.clone()),
            ],
            &[],
        )
        .unwrap();
        let p1 = pontryagin_p1(&cd);
        assert_eq!(p1.form, DiffForm::term(7, MultiIndex::new(&[1, 2, 3, 4], 7).unwrap(), q(1, 1)));
    }

    #[test]
    fn flat_residue_is_zero() {
        let s = standard_structure(HolonomyKind::G2).unwrap();
        let cd = CurvatureData::<Rational>::zero(7, 1).unwrap();
        let r = compute_residue(&s, &cd).unwrap();
        assert!(r.residue.is_zero());
        assert_eq!(r.pole_location, q(3, 2));
        assert!(!r.twisted);
    }
}
