use num_complex::Complex;

use spectral_asymmetry::exterior::{DiffForm, MultiIndex};
use spectral_asymmetry::holonomy::{standard_structure, HolonomyKind};
use spectral_asymmetry::linalg::Matrix;
use spectral_asymmetry::model_heat::{
    curvature_exponential, duhamel_diag_trace, fiber_diag_trace, mehler_det_factor, mehler_diag_trace, q_matrix,
    residue_twice_power, CurvatureData, HeatModel,
};
use spectral_asymmetry::residue::heat_model_density;
use spectral_asymmetry::scalar::{q, Rational};

fn e(n: usize, idx: &[usize]) -> DiffForm<Rational> {
    DiffForm::basis(n, MultiIndex::new(idx, n).unwrap())
}

fn riemann(n: usize, entries: &[([usize; 4], Rational)]) -> CurvatureData<Rational> {
    CurvatureData::from_entries(n, 1, entries, &[]).unwrap()
}

#[test]
fn q_vanishes_for_zero_and_single_plane() {
    let zero = CurvatureData::<Rational>::zero(7, 1).unwrap();
    assert!(q_matrix(&zero).is_zero());
    let kappa = q(5, 3);
    let cd = riemann(7, &[([1, 2, 1, 2], kappa.clone())]);
    assert_eq!(cd.r_hat(0, 1), e(7, &[1, 2]).scale(&(kappa / q(2, 1))));
    assert!(q_matrix(&cd).is_zero());
}

/// `R̂_{12} = R̂_{34} = κ(e^{12} + e^{34})`, which needs `R = 2κ` on the four coupled slots.
fn two_plane(kappa: &Rational) -> CurvatureData<Rational> {
    let r = kappa.clone() * q(2, 1);
    riemann(
        7,
        &[
            ([1, 2, 1, 2], r.clone()),
            ([1, 2, 3, 4], r.clone()),
            ([3, 4, 3, 4], r),
        ],
    )
}

#[test]
fn q_of_two_plane_curvature() {
    let kappa = q(3, 2);
    let cd = two_plane(&kappa);
    let plane = e(7, &[1, 2]).add(&e(7, &[3, 4])).unwrap();
    assert_eq!(cd.r_hat(0, 1), plane.scale(&kappa));
    let qm = q_matrix(&cd);
    // Q_22 = −(1/4) R̂_12 ∧ R̂_12 = −(κ²/2) e^{1234}
    let expected = e(7, &[1, 2, 3, 4]).scale(&(-kappa.clone() * kappa.clone() / q(2, 1)));
    assert_eq!(qm.get(1, 1), &expected);
    assert_eq!(plane.scale(&kappa).wedge(&plane.scale(&kappa)).unwrap().scale(&q(-1, 4)), expected);
}

#[test]
fn det_factor_with_nilpotent_q() {
    let kappa = q(1, 1);
    let cd = two_plane(&kappa);
    let qm = q_matrix(&cd);
    assert!(qm.mul(&qm).is_zero());
    let d = mehler_det_factor(&qm).unwrap();
    // (4πt)^{-7/2} (1 − (t²/3) tr Q)
    let tr = qm.trace();
    assert_eq!(tr, e(7, &[1, 2, 3, 4]).scale(&q(-2, 1)));
    let flat = q(1, 128);
    assert_eq!(d.pi_half, -7);
    assert_eq!(d.terms().len(), 2);
    assert_eq!(d.terms()[&(-7, MultiIndex::EMPTY)], flat);
    let idx = MultiIndex::new(&[1, 2, 3, 4], 7).unwrap();
    assert_eq!(d.terms()[&(-3, idx)], flat * tr.coefficient(idx) * q(-1, 3));
}

#[test]
fn bundle_only_exponential_is_nilpotent_series() {
    let n = 7;
    let f = |re: i64, im: i64| Matrix::from_rows(vec![vec![Complex::new(q(re, 1), q(im, 1))]]);
    let entries = [([1, 2], f(0, 1)), ([3, 4], f(0, -2)), ([5, 6], f(0, 3))];
    let cd = CurvatureData::from_entries(n, 1, &[], &entries).unwrap();
    let half = q(1, 2);
    let series = curvature_exponential(&cd, &q(1, 8), &half);
    // Σ_k (t/2)^k (Σ F_ij e^{ij})^k / k!
    let mut fhat = DiffForm::<Complex<Rational>>::zero(n);
    for (ij, m) in &entries {
        fhat.add_term(MultiIndex::new(ij, n).unwrap(), m.get(0, 0).clone());
    }
    let mut power = DiffForm::<Complex<Rational>>::one(n);
    let mut factor = Complex::new(q(1, 1), q(0, 1));
    assert_eq!(series.len(), 4);
    for (k, elem) in series.iter().enumerate() {
        if k > 0 {
            power = power.wedge(&fhat).unwrap();
            factor *= Complex::new(half.clone() / q(k as i64, 1), q(0, 1));
        }
        let expected = power.scale(&factor);
        assert!(elem.terms().keys().all(|(_, word)| word.is_empty()));
        let got: Vec<_> = elem.terms().iter().map(|((f, _), m)| (*f, m.get(0, 0).clone())).collect();
        let want: Vec<_> = expected.terms().iter().map(|(f, c)| (*f, c.clone())).collect();
        assert_eq!(got, want, "t^{k}");
    }
}

#[test]
fn calibration_values() {
    for (kind, n_norm) in [(HolonomyKind::G2, q(-1, 8)), (HolonomyKind::Spin7, q(-1, 16))] {
        let s = standard_structure(kind).unwrap();
        let m = HeatModel::calibrated(&s).unwrap();
        assert_eq!((m.normalization, m.beta, m.gamma), (n_norm, q(1, 8), q(1, 2)), "{kind}");
    }
}

#[test]
fn flat_data_gives_no_trace_at_residue_order() {
    let s = standard_structure(HolonomyKind::G2).unwrap();
    let m = HeatModel::calibrated(&s).unwrap();
    let zero = CurvatureData::<Rational>::zero(7, 2).unwrap();
    let a = mehler_diag_trace(&m, &zero).unwrap();
    let b = duhamel_diag_trace(&m, &zero, 2).unwrap();
    assert_eq!(a.coefficient(residue_twice_power(&s)), q(0, 1));
    assert_eq!(a, b);
}

#[test]
fn bundle_only_routes_agree_exactly() {
    let s = standard_structure(HolonomyKind::G2).unwrap();
    let m = HeatModel::calibrated(&s).unwrap();
    let cd = CurvatureData::random_exact(7, 2, 9, true).unwrap().without_riemann();
    let a = mehler_diag_trace(&m, &cd).unwrap();
    let b = duhamel_diag_trace(&m, &cd, 2).unwrap();
    assert_eq!(a.truncated(residue_twice_power(&s)), b.truncated(residue_twice_power(&s)));
}

#[test]
fn exact_routes_agree_on_random_data() {
    let s = standard_structure(HolonomyKind::G2).unwrap();
    let m = HeatModel::calibrated(&s).unwrap();
    let target = residue_twice_power(&s);
    let cd = CurvatureData::random_exact(7, 1, 21, true).unwrap();
    let a = mehler_diag_trace(&m, &cd).unwrap();
    let b = duhamel_diag_trace(&m, &cd, 2).unwrap();
    assert_eq!(a.truncated(target), b.truncated(target));
    assert_eq!(a.coefficient(target), heat_model_density(&s, &cd).unwrap().integral().coeff);
}

#[test]
fn spin7_closed_form() {
    let s = standard_structure(HolonomyKind::Spin7).unwrap();
    let m = HeatModel::calibrated(&s).unwrap();
    let target = residue_twice_power(&s);
    let cd = CurvatureData::random_exact(8, 2, 5, true).unwrap();
    let a = mehler_diag_trace(&m, &cd).unwrap();
    assert!(a.lowest_power().is_none_or(|p| p >= target));
    assert_eq!(a.coefficient(target), heat_model_density(&s, &cd).unwrap().integral().coeff);
}

#[test]
fn bianchi_violation_breaks_the_model() {
    // Without the first Bianchi identity the true operator has a term below
    // the residue order, which no Mehler-type model can produce.
    let s = standard_structure(HolonomyKind::G2).unwrap();
    let m = HeatModel::calibrated(&s).unwrap();
    let target = residue_twice_power(&s);
    let cd = CurvatureData::random(7, 1, 3, false).unwrap();
    assert!(!cd.satisfies_bianchi());
    let truth = fiber_diag_trace(&s, &cd, 2).unwrap();
    let model = mehler_diag_trace(&m, &cd).unwrap();
    let below = truth.coefficient(target - 2).abs();
    assert!(below > 1e-6, "expected a t^({}/2) term, got {below}", target - 2);
    assert_eq!(model.coefficient(target - 2), 0.0);
}
