//! Acceptance criteria 1–11. Run with `cargo test --test acceptance -- --nocapture`
//! to see one line per criterion.

use std::time::Instant;

use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use statrs::function::gamma::gamma;

use spectral_asymmetry::clifford::{bridge_operators, degree_block_trace, word_trace};
use spectral_asymmetry::exterior::{basis_position, DiffForm, FiberOp, MultiIndex};
use spectral_asymmetry::holonomy::{standard_structure, star_ext_on_two_forms, HolonomyKind, HolonomyStructure};
use spectral_asymmetry::linalg::Matrix;
use spectral_asymmetry::model_heat::{
    duhamel_diag_trace, fiber_diag_trace, mehler_diag_trace, residue_twice_power, scalar_mehler_diag,
    CurvatureData, HeatModel, LaurentSeries,
};
use spectral_asymmetry::residue::{
    characteristic_combination, compute_residue, gamma_half_integer, pontryagin_p1, sign_report, SignStatus,
};
use spectral_asymmetry::scalar::{q, Rational};
use spectral_asymmetry::torus::{enumerate_levels, lattice_counts, poisson_heat_trace, SpectralWeight, Spectrum};
use spectral_asymmetry::verify::instanton_line_bundle;

const ORACLE_TOL: f64 = 1e-8;
const POISSON_TOL: f64 = 1e-6;
const HERMITE_TOL: f64 = 1e-6;
const MELLIN_TOL: f64 = 1e-8;

struct Outcome {
    id: u32,
    pass: bool,
    detail: String,
}

fn report(id: u32, pass: bool, detail: String) -> Outcome {
    println!("criterion {id:>2}: {} | {detail}", if pass { "PASS" } else { "FAIL" });
    Outcome { id, pass, detail }
}

fn info(id: u32, detail: &str) {
    println!("criterion {id:>2}: INFO | {detail}");
}

fn structure(kind: HolonomyKind) -> HolonomyStructure {
    standard_structure(kind).expect("standard structure validates")
}

fn rat(v: i64) -> Rational {
    q(v, 1)
}

// ---------------------------------------------------------------- 1

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let mut pass = true;
    let mut notes = Vec::new();
    for (kind, hi, lo, m_hi, m_lo) in [(HolonomyKind::G2, 2, -1, 7, 14), (HolonomyKind::Spin7, 3, -1, 7, 21)] {
        let s = structure(kind);
        let m = star_ext_on_two_forms(&s);
        let dim = m.rows();
        let id = Matrix::<Rational>::identity(dim);
        // (M − hi)(M − lo) = 0 with M symmetric gives a diagonalizable spectrum in {hi, lo};
        // traces of M and M² then pin both multiplicities.
        let a = &m - &id.scale(&rat(hi));
        let b = &m - &id.scale(&rat(lo));
        let min_poly = (&a * &b).is_zero() && m == m.transpose();
        let m2 = &m * &m;
        let traces = m.trace() == rat(hi * m_hi + lo * m_lo) && m2.trace() == rat(hi * hi * m_hi + lo * lo * m_lo);
        pass &= min_poly && traces && dim == m_hi as usize + m_lo as usize;
        notes.push(format!("{kind}: {{{hi:+} ×{m_hi}, {lo:+} ×{m_lo}}}"));
        if kind == HolonomyKind::G2 {
            // the interior products e_i ⌟ φ span the +2 eigenspace
            for i in 1..=7 {
                let v = s.defining_form.interior(i);
                let image = s.defining_form.wedge(&v).unwrap().hodge_star();
                pass &= image == v.scale(&rat(2));
            }
        }
    }
    let elapsed = start.elapsed().as_secs_f64();
    pass &= elapsed < 1.0;
    report(1, pass, format!("{}, exact; {elapsed:.3} s (< 1 s)", notes.join("; ")))
}

// ---------------------------------------------------------------- 2

/// Signed permutation on the bitmask basis of `Λ*(R^n)`: `e^S ↦ sign[S] e^{perm[S]}`.
#[derive(Clone)]
struct SignedPerm {
    perm: Vec<u16>,
    sign: Vec<i8>,
}

impl SignedPerm {
    fn identity(n: usize) -> Self {
        SignedPerm {
            perm: (0..1u32 << n).map(|s| s as u16).collect(),
            sign: vec![1; 1 << n],
        }
    }

    /// `e^i ∧ · ± ι_i`: sign `(−1)^{#{j ∈ S : j < i}}` from moving `e^i` into place.
    fn generator(n: usize, i: usize, hat: bool) -> Self {
        let bit = 1u16 << (i - 1);
        let mut out = SignedPerm::identity(n);
        for s in 0..(1u32 << n) as u16 {
            let below = (s & (bit - 1)).count_ones();
            let mut sg: i8 = if below.is_multiple_of(2) { 1 } else { -1 };
            if s & bit != 0 && !hat {
                sg = -sg;
            }
            out.perm[s as usize] = s ^ bit;
            out.sign[s as usize] = sg;
        }
        out
    }

    /// `self ∘ other`.
    fn after(&self, other: &SignedPerm) -> SignedPerm {
        let mut out = other.clone();
        for s in 0..other.perm.len() {
            let mid = other.perm[s] as usize;
            out.perm[s] = self.perm[mid];
            out.sign[s] = other.sign[s] * self.sign[mid];
        }
        out
    }

    fn trace(&self) -> i64 {
        (0..self.perm.len())
            .filter(|&s| self.perm[s] as usize == s)
            .map(|s| self.sign[s] as i64)
            .sum()
    }
}

fn word(n: usize, mask: u16, gens: &[SignedPerm]) -> SignedPerm {
    let mut out = SignedPerm::identity(n);
    for i in 1..=n {
        if mask & (1 << (i - 1)) != 0 {
            out = out.after(&gens[i - 1]);
        }
    }
    out
}

fn oracle_word_trace(n: usize, i: u16, j: u16, c: &[SignedPerm], chat: &[SignedPerm]) -> i64 {
    word(n, i, c).after(&word(n, j, chat)).trace()
}

fn criterion_2() -> Outcome {
    let start = Instant::now();
    let mut bad = 0usize;
    let mut lib_vs_oracle = 0usize;
    let mut checked = 0usize;
    for (n, samples) in [(7usize, None), (8, Some(10_000usize))] {
        let c: Vec<_> = (1..=n).map(|i| SignedPerm::generator(n, i, false)).collect();
        let chat: Vec<_> = (1..=n).map(|i| SignedPerm::generator(n, i, true)).collect();
        let pairs: Vec<(u16, u16)> = match samples {
            None => (0..1u32 << n)
                .flat_map(|i| (0..1u32 << n).map(move |j| (i as u16, j as u16)))
                .collect(),
            Some(k) => {
                let mut rng = ChaCha8Rng::seed_from_u64(2);
                let mut v = vec![(0, 0)];
                v.extend((1..k).map(|_| (rng.gen_range(0..1u32 << n) as u16, rng.gen_range(0..1u32 << n) as u16)));
                v
            }
        };
        for (i, j) in pairs {
            let expected = if i == 0 && j == 0 { 1i64 << n } else { 0 };
            let lib = word_trace(n, MultiIndex::from_mask(i), MultiIndex::from_mask(j)).unwrap();
            if lib != expected {
                bad += 1;
            }
            if lib != oracle_word_trace(n, i, j, &c, &chat) {
                lib_vs_oracle += 1;
            }
            checked += 1;
        }
    }
    let elapsed = start.elapsed().as_secs_f64();
    let pass = bad == 0 && lib_vs_oracle == 0 && elapsed < 30.0;
    report(
        2,
        pass,
        format!(
            "{checked} pairs (4^7 exhaustive n=7, 10^4 random n=8): {bad} off the lemma, {lib_vs_oracle} disagreeing with the signed-permutation oracle; (∅,∅) ↦ 128 / 256; {elapsed:.2} s (< 30 s)"
        ),
    )
}

// ---------------------------------------------------------------- 3

/// Random operator preserving form degree, stored on the bitmask basis.
fn random_degree_preserving(n: usize, rng: &mut ChaCha8Rng) -> Vec<i64> {
    let dim = 1usize << n;
    let mut m = vec![0i64; dim * dim];
    for r in 0..dim {
        for c in 0..dim {
            if (r as u32).count_ones() == (c as u32).count_ones() && rng.gen_bool(0.4) {
                m[r * dim + c] = rng.gen_range(-4..=4);
            }
        }
    }
    m
}

fn to_library_op(n: usize, m: &[i64]) -> FiberOp<Rational> {
    let dim = 1usize << n;
    let mut mat = Matrix::zeros(dim, dim);
    for r in 0..dim {
        for c in 0..dim {
            if m[r * dim + c] != 0 {
                let pr = basis_position(n, MultiIndex::from_mask(r as u16));
                let pc = basis_position(n, MultiIndex::from_mask(c as u16));
                mat.set(pr, pc, rat(m[r * dim + c]));
            }
        }
    }
    FiberOp::from_matrix(n, 1, mat).unwrap()
}

fn form_coeff_i64(f: &DiffForm<Rational>, mask: u16) -> i64 {
    let c = f.coefficient(MultiIndex::from_mask(mask));
    assert!(c.is_integer());
    i64::try_from(c.to_integer()).unwrap()
}

fn criterion_3() -> Outcome {
    let mut pass = true;
    let mut notes = Vec::new();
    for kind in [HolonomyKind::G2, HolonomyKind::Spin7] {
        let s = structure(kind);
        let n = s.n;
        let w = &s.defining_form;
        let dim = 1usize << n;
        let two: Vec<u16> = (0..dim as u16).filter(|m| m.count_ones() == 2).collect();
        let c: Vec<_> = (1..=n).map(|i| SignedPerm::generator(n, i, false)).collect();
        let c_dvol = word(n, (dim - 1) as u16, &c);
        // star_rows[S][T] = ⟨e^S, *(w ∧ e^T)⟩, cliff_rows[S][T] = ⟨e^S, c(dvol)(w ∧ e^T)⟩ for S, T of degree 2
        let mut star = vec![vec![0i64; two.len()]; two.len()];
        let mut cliff = vec![vec![0i64; two.len()]; two.len()];
        for (ti, &t) in two.iter().enumerate() {
            let wedge = w.wedge(&DiffForm::basis(n, MultiIndex::from_mask(t))).unwrap();
            let starred = wedge.hodge_star();
            for (si, &sm) in two.iter().enumerate() {
                star[si][ti] = form_coeff_i64(&starred, sm);
            }
            for (idx, coeff) in wedge.terms() {
                let src = idx.mask() as usize;
                let dst = c_dvol.perm[src];
                if let Some(si) = two.iter().position(|&x| x == dst) {
                    let v = i64::try_from(coeff.to_integer()).unwrap();
                    cliff[si][ti] += c_dvol.sign[src] as i64 * v;
                }
            }
        }
        let (lib_star, lib_cliff) = bridge_operators::<Rational>(w).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(33 + n as u64);
        let mut mismatches = 0;
        let mut nonzero = 0;
        for _ in 0..100 {
            let m = random_degree_preserving(n, &mut rng);
            let block = |x: &Vec<Vec<i64>>| -> i64 {
                let mut tr = 0;
                for (si, &sm) in two.iter().enumerate() {
                    for (ti, &t) in two.iter().enumerate() {
                        tr += x[si][ti] * m[t as usize * dim + sm as usize];
                    }
                }
                tr
            };
            let lhs = block(&star);
            let rhs = -block(&cliff);
            let lib_m = to_library_op(n, &m);
            let lib_a = degree_block_trace(&lib_star, &lib_m, 2).unwrap();
            let lib_b = degree_block_trace(&lib_cliff, &lib_m, 2).unwrap();
            if lhs != rhs || lib_a != rat(lhs) || lib_b != rat(rhs) {
                mismatches += 1;
            }
            if lhs != 0 {
                nonzero += 1;
            }
        }
        pass &= mismatches == 0 && nonzero > 0;
        notes.push(format!("{kind}: 100 M ({nonzero} nonzero traces), {mismatches} mismatches"));
    }
    report(3, pass, format!("Tr(*e(w)M) = −Tr(c(dvol)e(w)M) exactly; {}", notes.join("; ")))
}

// ---------------------------------------------------------------- 4

fn criterion_4() -> Outcome {
    let mut pass = true;
    let mut notes = Vec::new();
    for kind in [HolonomyKind::G2, HolonomyKind::Spin7] {
        let s = structure(kind);
        let model = HeatModel::calibrated(&s).unwrap();
        let target = residue_twice_power(&s);
        let mut below = 0;
        let mut at_target = 0;
        for seed in 0..5 {
            let cd = CurvatureData::random_exact(s.n, 1 + (seed as usize % 2), 100 + seed, true).unwrap();
            let series = mehler_diag_trace(&model, &cd).unwrap();
            below += series.terms.keys().filter(|&&p| p < target).count();
            if series.coefficient(target) != q(0, 1) {
                at_target += 1;
            }
        }
        pass &= below == 0 && at_target > 0;
        notes.push(format!(
            "{kind}: 5 exact seeds, {below} nonzero terms below t^({target}/2), {at_target} nonzero at it"
        ));
    }
    // The fiber operator is not organised by form degree, so the cancellation there is not structural.
    let s = structure(HolonomyKind::G2);
    let cd = CurvatureData::random(7, 1, 7, true).unwrap();
    let truth = fiber_diag_trace(&s, &cd, 2).unwrap();
    let target = residue_twice_power(&s);
    let scale = truth.coefficient(target).abs();
    let worst_below = truth
        .terms
        .iter()
        .filter(|(p, _)| **p < target)
        .map(|(_, c)| c.abs())
        .fold(0.0f64, f64::max);
    let ok = scale > 0.0 && worst_below <= 1e-12 * scale;
    pass &= ok;
    notes.push(format!("fiber operator (g2, f64): max |below| / |at order| = {:.2e}", worst_below / scale));
    report(4, pass, notes.join("; "))
}

// ---------------------------------------------------------------- 5

fn gap(a: &LaurentSeries<f64>, b: &LaurentSeries<f64>, target: i32) -> f64 {
    a.truncated(target).relative_distance(&b.truncated(target))
}

fn block_curvature() -> CurvatureData<f64> {
    let i = |x: i64| Complex::new(q(0, 1), rat(x));
    let f = Matrix::from_rows(vec![vec![i(1), Complex::new(q(0, 1), q(0, 1))], vec![Complex::new(q(0, 1), q(0, 1)), i(-2)]]);
    CurvatureData::from_entries(
        7,
        2,
        &[([1, 2, 1, 2], rat(1)), ([3, 4, 3, 4], rat(2)), ([5, 6, 5, 6], q(-1, 2))],
        &[([1, 2], f.clone()), ([3, 5], f)],
    )
    .unwrap()
    .to_f64()
}

fn criterion_5() -> Outcome {
    let start = Instant::now();
    let s = structure(HolonomyKind::G2);
    let model = HeatModel::calibrated(&s).unwrap();
    let target = residue_twice_power(&s);
    let mut cases: Vec<(String, CurvatureData<f64>)> = (1..=5)
        .map(|seed| {
            let rank = if seed % 2 == 0 { 2 } else { 1 };
            (format!("seed {seed} r={rank}"), CurvatureData::random(7, rank, seed, true).unwrap())
        })
        .collect();
    cases.push(("block".into(), block_curvature()));
    cases.push((
        "rank-1 instanton".into(),
        instanton_line_bundle(&s, q(1, 1)).unwrap().to_f64(),
    ));
    let mut worst = 0.0f64;
    let mut notes = Vec::new();
    for (name, cd) in &cases {
        let a = mehler_diag_trace(&model, cd).unwrap();
        let b = duhamel_diag_trace(&model, cd, 2).unwrap();
        let g = gap(&a, &b, target);
        worst = worst.max(g);
        notes.push(format!("{name} {g:.1e}"));
    }
    // independent third route on the instanton and one random seed
    let mut truth_gap = 0.0f64;
    for (_, cd) in [&cases[0], &cases[6]] {
        let a = mehler_diag_trace(&model, cd).unwrap();
        let t = fiber_diag_trace(&s, cd, 2).unwrap();
        truth_gap = truth_gap.max(gap(&a, &t, target));
    }
    let elapsed = start.elapsed().as_secs_f64();
    let pass = worst < ORACLE_TOL && truth_gap < ORACLE_TOL && elapsed < 600.0;
    report(
        5,
        pass,
        format!(
            "Mehler vs Duhamel through t^({target}/2), max relative gap {worst:.2e} (< {ORACLE_TOL:e}) [{}]; vs fiber operator {truth_gap:.2e}; {elapsed:.1} s",
            notes.join(", ")
        ),
    )
}

// ---------------------------------------------------------------- 6

/// `∫ form ∧ w` as the `dvol` coefficient.
fn integrate_against(form: &DiffForm<Rational>, w: &DiffForm<Rational>) -> Rational {
    form.wedge(w).unwrap().top_coefficient()
}

fn criterion_6() -> Outcome {
    let mut pass = true;
    let mut notes = Vec::new();
    // Γ(5/2) = (3/4)√π and Γ(3) = 2, checked against a numerical gamma
    for (twice, expected) in [(5u32, 2.5f64), (6, 3.0)] {
        let g = gamma_half_integer(twice);
        pass &= (g.to_f64() - gamma(expected)).abs() < 1e-14 * gamma(expected);
    }
    pass &= gamma_half_integer(5).coeff == q(3, 4) && gamma_half_integer(5).pi_half == 1;
    pass &= gamma_half_integer(6).coeff == rat(2) && gamma_half_integer(6).pi_half == 0;
    let constants = [
        (HolonomyKind::G2, q(4, 9), q(4, 3)),
        (HolonomyKind::Spin7, q(1, 6), q(1, 2)),
    ];
    for (kind, untwisted, twisted) in &constants {
        let s = structure(*kind);
        let w = &s.defining_form;
        let mut ok = true;
        for seed in 0..3 {
            // untwisted: residue = C·π^{-2}·∫p1∧w
            let cd = CurvatureData::random_exact(s.n, 1, 200 + seed, true).unwrap().without_bundle();
            let p1 = pontryagin_p1(&cd);
            let p = integrate_against(&p1.form, w);
            let r = compute_residue(&s, &cd).unwrap();
            ok &= !r.twisted && r.residue.coeff == untwisted.clone() * p.clone() && r.residue.pi_half == p1.pi_half - 4;
            ok &= r.matches_displayed_constant && r.constant.coeff == *untwisted;
            if *kind == HolonomyKind::G2 {
                // b = π^{-3/2}·P/3
                ok &= r.b_coefficient.coeff == p.clone() / rat(3) && r.b_coefficient.pi_half == p1.pi_half - 3;
            }
            // twisted: residue = C'·π^{-2}·∫(p1/3 + c1² − c2)∧w
            let cd = CurvatureData::random_exact(s.n, 2, 300 + seed, true).unwrap();
            let dens = characteristic_combination(&cd).unwrap();
            let d = integrate_against(&dens.form, w);
            let r = compute_residue(&s, &cd).unwrap();
            ok &= r.twisted && r.residue.coeff == twisted.clone() * d && r.residue.pi_half == dens.pi_half - 4;
            ok &= r.matches_displayed_constant && r.constants_consistent;
        }
        ok &= twisted.clone() * q(1, 3) == *untwisted;
        pass &= ok;
        notes.push(format!("{kind}: ({untwisted})/π², ({twisted})/π² ({})", if ok { "exact" } else { "mismatch" }));
    }
    report(
        6,
        pass,
        format!("{}; Γ(5/2) = (3/4)√π, Γ(3) = 2; twisted × 1/3 = untwisted", notes.join("; ")),
    )
}

// ---------------------------------------------------------------- 7

fn criterion_7() -> Outcome {
    let mut pass = true;
    let mut notes = Vec::new();
    for kind in [HolonomyKind::G2, HolonomyKind::Spin7] {
        let s = structure(kind);
        let flat = CurvatureData::<Rational>::zero(s.n, 1).unwrap();
        let r = compute_residue(&s, &flat).unwrap();
        pass &= r.residue.coeff == q(0, 1);
        pass &= sign_report(&s, &flat, 1e-12).unwrap().status == SignStatus::Flat;
        let mut worst = f64::NEG_INFINITY;
        for f in [q(1, 1), q(-1, 2), q(3, 1)] {
            let cd = instanton_line_bundle(&s, f).unwrap();
            let r = compute_residue(&s, &cd).unwrap();
            pass &= r.residue.coeff < q(0, 1);
            let rep = sign_report(&s, &cd, 1e-12).unwrap();
            pass &= rep.status == SignStatus::ConsistentWithCorollary;
            worst = worst.max(rep.residue);
        }
        notes.push(format!("{kind}: flat residue 0, instanton residues ≤ {worst:.3e} < 0"));
    }
    report(7, pass, notes.join("; "))
}

// ---------------------------------------------------------------- 8

/// Representations of `q` as a sum of `n` squares, by direct recursion.
fn squares_count(n: usize, q: i64) -> u64 {
    if n == 0 {
        return (q == 0) as u64;
    }
    let mut total = 0;
    let mut k = 0i64;
    while k * k <= q {
        let mult = if k == 0 { 1 } else { 2 };
        total += mult * squares_count(n - 1, q - k * k);
        k += 1;
    }
    total
}

fn criterion_8() -> (Outcome, Spectrum) {
    let start = Instant::now();
    let sp = enumerate_levels(7, 400).unwrap();
    let mut pass = sp.levels.iter().all(|l| l.mult_big == 2 * l.mult_7);
    let (mut n7, mut n14) = (0u64, 0u64);
    for l in &sp.levels {
        if !l.is_zero_mode() {
            n7 += l.mult_7;
            n14 += l.mult_big;
        }
        pass &= n14 == 2 * n7;
        pass &= l.mult_7 == 7 * l.lattice_count;
    }
    // lattice counts against a direct recursion
    let counts = lattice_counts(7, 40);
    pass &= (0..=40).all(|k| counts[k] == squares_count(7, k as i64));
    let delta = SpectralWeight::delta(sp.kind);
    for s in [4.0, 5.5] {
        for cutoff in [1, 50, 400] {
            let z = sp.zeta_partial(delta, s, cutoff, false).unwrap();
            pass &= z.sum == 0.0;
        }
    }
    for t in [1e-3, 1e-2, 0.1, 1.0] {
        pass &= sp.heat_trace(t, true).unwrap() == 0.0;
    }
    let elapsed = start.elapsed().as_secs_f64();
    pass &= elapsed < 120.0;
    let out = report(
        8,
        pass,
        format!(
            "{} levels to q_max 400: N_14 = 2 N_7 at every level (N_7 = {n7}); ζ_δ partial sums = 0; weighted trace = 0; {elapsed:.2} s",
            sp.levels.len()
        ),
    );
    (out, sp)
}

// ---------------------------------------------------------------- 9

fn criterion_9(sp: &Spectrum) -> Outcome {
    let leading = |t: f64| 21.0 * (4.0 * std::f64::consts::PI * t).powf(-3.5);
    let t = 0.02;
    let trace = sp.heat_trace(t, false).unwrap();
    let dual = poisson_heat_trace(7, t);
    // test-side dual sum 21 (4πt)^{-7/2} (Σ_m e^{-m²/4t})^7
    let theta: f64 = (-50i64..=50).map(|m| (-(m * m) as f64 / (4.0 * t)).exp()).sum();
    let dual_oracle = leading(t) * theta.powi(7);
    let rel_dual = (trace - dual).abs() / trace;
    let rel_oracle = (trace - dual_oracle).abs() / trace;
    let rel_leading = (trace - leading(t)).abs() / trace;
    let winding = 14.0 * (-1.0 / (4.0 * t)).exp();
    info(
        9,
        &format!(
            "leading term alone at t = 0.02: relative gap {rel_leading:.3e}, equal to the winding correction 14 e^(-1/4t) = {winding:.3e}"
        ),
    );
    let t_small = 0.01;
    let rel_small = (sp.heat_trace(t_small, false).unwrap() - leading(t_small)).abs() / leading(t_small);
    info(9, &format!("leading term alone at t = 0.01: relative gap {rel_small:.3e}"));
    let pass = rel_dual < POISSON_TOL && rel_oracle < POISSON_TOL;
    report(
        9,
        pass,
        format!(
            "t = 0.02: trace {trace:.10e} vs Poisson dual 21(4πt)^(-7/2)θ^7, relative gap {rel_dual:.2e} (< {POISSON_TOL:e})"
        ),
    )
}

// ---------------------------------------------------------------- 10

/// `Σ_m e^{-ta(4m+1)} |ψ_{2m}(0)|²` with `|ψ_{2m}(0)|² = √(a/π) C(2m, m) / 4^m`, via log-gamma.
fn oscillator_eigensum(a: f64, t: f64) -> f64 {
    use statrs::function::gamma::ln_gamma;
    (0..4000u32)
        .map(|m| {
            let m = m as f64;
            let log_w = ln_gamma(2.0 * m + 1.0) - 2.0 * ln_gamma(m + 1.0) - m * 4f64.ln();
            (a / std::f64::consts::PI).sqrt() * (log_w - t * a * (4.0 * m + 1.0)).exp()
        })
        .sum()
}

fn criterion_10() -> Outcome {
    let t = 0.3;
    let mut worst = 0.0f64;
    for a in [0.5, 1.0, 2.0] {
        let m = scalar_mehler_diag(a, t);
        worst = worst.max((m - oscillator_eigensum(a, t)).abs() / m);
    }
    report(
        10,
        worst < HERMITE_TOL,
        format!("a ∈ {{0.5, 1, 2}}, t = 0.3: max relative gap {worst:.2e} (< {HERMITE_TOL:e})"),
    )
}

// ---------------------------------------------------------------- 11

fn criterion_11(sp: &Spectrum) -> Outcome {
    let s = 4.0;
    let cutoff = 60;
    let mut worst = 0.0f64;
    let mut notes = Vec::new();
    for (name, w) in [
        ("Λ7", SpectralWeight::LAMBDA7),
        ("Λ14", SpectralWeight::BIG),
        ("3Λ7 − Λ14", SpectralWeight { w7: 3, w_big: -1 }),
    ] {
        let rep = sp.mellin_equivalence(w, s, cutoff).unwrap();
        let direct: f64 = sp
            .levels
            .iter()
            .filter(|l| !l.is_zero_mode() && l.q <= q(cutoff as i64, 1))
            .map(|l| w.of(l) as f64 * l.lambda.powf(-s))
            .sum();
        let rel = (rep.mellin - direct).abs() / direct.abs();
        worst = worst.max(rel);
        notes.push(format!("{name} {rel:.1e}"));
    }
    report(
        11,
        worst < MELLIN_TOL,
        format!("s = 4, levels q ≤ {cutoff}: max relative gap {worst:.2e} (< {MELLIN_TOL:e}) [{}]", notes.join(", ")),
    )
}

#[test]
fn acceptance_criteria() {
    let mut outcomes = vec![criterion_1(), criterion_2(), criterion_3(), criterion_4(), criterion_5()];
    outcomes.push(criterion_6());
    outcomes.push(criterion_7());
    let (o8, sp) = criterion_8();
    outcomes.push(o8);
    outcomes.push(criterion_9(&sp));
    outcomes.push(criterion_10());
    outcomes.push(criterion_11(&sp));
    let failed: Vec<String> = outcomes
        .iter()
        .filter(|o| !o.pass)
        .map(|o| format!("{}: {}", o.id, o.detail))
        .collect();
    println!("{} of {} criteria pass", outcomes.len() - failed.len(), outcomes.len());
    assert!(failed.is_empty(), "failing criteria: {failed:#?}");
}
