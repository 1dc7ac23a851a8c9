use num_complex::Complex;

use spectral_asymmetry::exterior::{DiffForm, MultiIndex};
use spectral_asymmetry::holonomy::{decompose_two_form, standard_structure, HolonomyKind};
use spectral_asymmetry::linalg::Matrix;
use spectral_asymmetry::model_heat::CurvatureData;
use spectral_asymmetry::residue::{
    chern_forms, compute_residue, pontryagin_p1, residue_density, sign_report, SignStatus,
};
use spectral_asymmetry::scalar::{q, Rational};

fn e(n: usize, idx: &[usize]) -> DiffForm<Rational> {
    DiffForm::basis(n, MultiIndex::new(idx, n).unwrap())
}

/// Test-side `p1 = (1/8π²) Σ_{ij} Ω_ij ∧ Ω_ij` (using `Ω_ji = −Ω_ij`), coefficient of `π^{-2}`.
fn p1_oracle(cd: &CurvatureData<Rational>) -> DiffForm<Rational> {
    let n = cd.n();
    let mut acc = DiffForm::zero(n);
    for i in 0..n {
        for j in 0..n {
            let w = cd.omega(i, j);
            acc = acc.add(&w.wedge(&w).unwrap()).unwrap();
        }
    }
    acc.scale(&q(1, 8))
}

/// `Ω_{ab} = Ω_{cd} = κ(e^{ab} + e^{cd})` for the planes `(a,b)`, `(c,d)`.
fn coupled(n: usize, planes: [[usize; 2]; 2], kappa: &Rational) -> CurvatureData<Rational> {
    let [p, r] = planes;
    CurvatureData::from_entries(
        n,
        1,
        &[
            ([p[0], p[1], p[0], p[1]], kappa.clone()),
            ([p[0], p[1], r[0], r[1]], kappa.clone()),
            ([r[0], r[1], r[0], r[1]], kappa.clone()),
        ],
        &[],
    )
    .unwrap()
}

#[test]
fn block_diagonal_p1_vanishes() {
    let kappa = q(2, 1);
    let cd = CurvatureData::from_entries(
        7,
        1,
        &[([1, 2, 1, 2], kappa.clone()), ([3, 4, 3, 4], kappa)],
        &[],
    )
    .unwrap();
    assert!(pontryagin_p1(&cd).form.is_zero());
    assert!(p1_oracle(&cd).is_zero());
}

#[test]
fn coupled_p1() {
    // Σ over the four ordered pairs of κ²(e^{12}+e^{34})² = 8κ² e^{1234}, over 8π²
    for kappa in [q(1, 1), q(3, 2)] {
        let cd = coupled(7, [[1, 2], [3, 4]], &kappa);
        assert_eq!(cd.omega(0, 1), e(7, &[1, 2]).add(&e(7, &[3, 4])).unwrap().scale(&kappa));
        let p1 = pontryagin_p1(&cd);
        assert_eq!(p1.pi_half, -4);
        let k2 = kappa.clone() * kappa.clone();
        assert_eq!(p1.form, e(7, &[1, 2, 3, 4]).scale(&k2));
        assert_eq!(p1.form, p1_oracle(&cd));
    }
}

#[test]
fn rank_one_chern_forms() {
    let alpha = e(7, &[1, 2]).sub(&e(7, &[3, 6]).scale(&q(2, 1))).unwrap();
    let f = q(5, 2);
    let entries: Vec<_> = alpha
        .terms()
        .iter()
        .map(|(idx, c)| {
            let ij = idx.indices();
            ([ij[0], ij[1]], Matrix::from_rows(vec![vec![Complex::new(q(0, 1), -(c.clone() * f.clone()))]]))
        })
        .collect();
    let cd = CurvatureData::from_entries(7, 1, &[], &entries).unwrap();
    let (c1, c2) = chern_forms(&cd).unwrap();
    // c1 = (f/2π) α
    assert_eq!(c1.pi_half, -2);
    assert_eq!(c1.form, alpha.scale(&(f.clone() / q(2, 1))));
    assert!(c2.form.is_zero());
}

#[test]
fn instanton_density_is_minus_norm_squared() {
    for kind in [HolonomyKind::G2, HolonomyKind::Spin7] {
        let s = standard_structure(kind).unwrap();
        let n = s.n;
        let (_, alpha) = decompose_two_form(&s, &e(n, &[1, 2])).unwrap();
        for f in [q(1, 1), q(-3, 2)] {
            let entries: Vec<_> = alpha
                .terms()
                .iter()
                .map(|(idx, c)| {
                    let ij = idx.indices();
                    (
                        [ij[0], ij[1]],
                        Matrix::from_rows(vec![vec![Complex::new(q(0, 1), -(c.clone() * f.clone()))]]),
                    )
                })
                .collect();
            let cd = CurvatureData::from_entries(n, 1, &[], &entries).unwrap();
            let dens = residue_density(&s, &cd).unwrap();
            assert_eq!(dens.pi_half, -4);
            if kind == HolonomyKind::G2 {
                // (f²/4π²) α∧α∧φ = −(f²/4π²)|α|² dvol since α∧φ = −*α on Λ_14
                let expected = -(f.clone() * f.clone()) / q(4, 1) * alpha.norm_sq();
                assert_eq!(dens.form, DiffForm::volume(n).scale(&expected));
            }
            assert!(dens.integral().coeff < q(0, 1));
            let report = sign_report(&s, &cd, 1e-12).unwrap();
            assert_eq!(report.status, SignStatus::ConsistentWithCorollary);
            assert_eq!(report.status.label(), "consistent with Corollary");
        }
    }
}

#[test]
fn untwisted_density_from_coupled_curvature() {
    let s = standard_structure(HolonomyKind::G2).unwrap();
    let kappa = q(2, 1);
    let cd = coupled(7, [[4, 5], [6, 7]], &kappa);
    let dens = residue_density(&s, &cd).unwrap();
    // p1 = κ² e^{4567}; φ ∧ p1/3 picks the e^{123} coefficient of φ
    let phi123 = s.defining_form.coefficient(MultiIndex::new(&[1, 2, 3], 7).unwrap());
    assert_eq!(dens.integral().coeff, kappa.clone() * kappa / q(3, 1) * phi123);
    let report = compute_residue(&s, &cd).unwrap();
    assert!(!report.twisted);
}

#[test]
fn lambda7_bundle_gets_no_sign_conclusion() {
    let s = standard_structure(HolonomyKind::G2).unwrap();
    let v = s.defining_form.interior(2);
    let entries: Vec<_> = v
        .terms()
        .iter()
        .map(|(idx, c)| {
            let ij = idx.indices();
            ([ij[0], ij[1]], Matrix::from_rows(vec![vec![Complex::new(q(0, 1), c.clone())]]))
        })
        .collect();
    let cd = CurvatureData::from_entries(7, 1, &[], &entries).unwrap();
    assert_eq!(sign_report(&s, &cd, 1e-12).unwrap().status, SignStatus::NotInstanton);
}

#[test]
fn residue_is_quadratic_under_scaling() {
    for kind in [HolonomyKind::G2, HolonomyKind::Spin7] {
        let s = standard_structure(kind).unwrap();
        let cd = CurvatureData::random_exact(s.n, 2, 17, true).unwrap();
        let lambda = q(-5, 3);
        let scaled = cd.scaled(&lambda, &lambda);
        let a = compute_residue(&s, &cd).unwrap().residue;
        let b = compute_residue(&s, &scaled).unwrap().residue;
        assert_eq!(b.coeff, a.coeff * lambda.clone() * lambda);
        assert_eq!(a.pi_half, b.pi_half);
    }
}

#[test]
fn residue_is_gauge_invariant() {
    let s = standard_structure(HolonomyKind::G2).unwrap();
    let cd = CurvatureData::random_exact(7, 2, 23, true).unwrap();
    // real rotation by a Pythagorean angle is unitary
    let c = Complex::new(q(3, 5), q(0, 1));
    let sn = Complex::new(q(4, 5), q(0, 1));
    let u = Matrix::from_rows(vec![vec![c.clone(), -sn.clone()], vec![sn, c]]);
    let rotated = cd.gauge_transform(&u).unwrap();
    assert_eq!(compute_residue(&s, &cd).unwrap().residue, compute_residue(&s, &rotated).unwrap().residue);
}
