use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::exterior::{check_dim, DiffForm, MultiIndex};
use crate::linalg::Matrix;
use crate::scalar::{q, Rational, RealScalar};

/// Constant curvature data at a point: a Riemann-type tensor `R_{ijkl}` and
/// skew-Hermitian bundle curvature matrices `F_{ij}`. Indices are 0-based in
/// accessors and 1-based in [`CurvatureData::from_entries`].
#[derive(Clone, Debug, PartialEq)]
pub struct CurvatureData<T: RealScalar> {
    n: usize,
    rank: usize,
    r: Vec<T>,
    f: Vec<Matrix<Complex<T>>>,
}

fn r_index(n: usize, i: usize, j: usize, k: usize, l: usize) -> usize {
    ((i * n + j) * n + k) * n + l
}

/// The eight index images of `(i,j,k,l)` under the curvature symmetries, with signs.
fn r_orbit(i: usize, j: usize, k: usize, l: usize) -> [(usize, usize, usize, usize, bool); 8] {
    [
        (i, j, k, l, false),
        (j, i, k, l, true),
        (i, j, l, k, true),
        (j, i, l, k, false),
        (k, l, i, j, false),
        (l, k, i, j, true),
        (k, l, j, i, true),
        (l, k, j, i, false),
    ]
}

impl<T: RealScalar> CurvatureData<T> {
    pub fn zero(n: usize, rank: usize) -> Result<Self> {
        check_dim(n)?;
        if rank == 0 {
            return Err(Error::InvalidArgument("bundle rank must be at least 1".into()));
        }
        Ok(CurvatureData {
            n,
            rank,
            r: vec![T::zero(); n.pow(4)],
            f: vec![Matrix::zeros(rank, rank); n * n],
        })
    }

    /// Build from a dense tensor (`n^4` entries, row-major in `i,j,k,l`) and
    /// `n^2` curvature matrices, rejecting data that violates the symmetries.
    pub fn new(n: usize, rank: usize, r: Vec<T>, f: Vec<Matrix<Complex<T>>>) -> Result<Self> {
        let mut cd = Self::zero(n, rank)?;
        if r.len() != n.pow(4) || f.len() != n * n {
            return Err(Error::InvalidArgument("curvature arrays have the wrong length".into()));
        }
        if f.iter().any(|m| m.rows() != rank || m.cols() != rank) {
            return Err(Error::RankMismatch {
                left: rank,
                right: f.iter().map(Matrix::rows).find(|&x| x != rank).unwrap_or(rank),
            });
        }
        cd.r = r;
        cd.f = f;
        cd.validate()?;
        Ok(cd)
    }

    /// Build from sparse 1-based entries, closing under the index symmetries.
    /// Redundant entries must agree with what the symmetries imply.
    pub fn from_entries(
        n: usize,
        rank: usize,
        r_entries: &[([usize; 4], T)],
        f_entries: &[([usize; 2], Matrix<Complex<T>>)],
    ) -> Result<Self> {
        let mut cd = Self::zero(n, rank)?;
        let mut set_r = vec![false; n.pow(4)];
        for (idx, v) in r_entries {
            if let Some(&bad) = idx.iter().find(|&&x| x == 0 || x > n) {
                return Err(Error::IndexOutOfRange { index: bad, n });
            }
            let [i, j, k, l] = idx.map(|x| x - 1);
            for (a, b, c, d, neg) in r_orbit(i, j, k, l) {
                let value = if neg { -v.clone() } else { v.clone() };
                let slot = r_index(n, a, b, c, d);
                if set_r[slot] && cd.r[slot] != value {
                    return Err(Error::SymmetryViolation(format!(
                        "R[{},{},{},{}] conflicts with a redundant entry",
                        a + 1,
                        b + 1,
                        c + 1,
                        d + 1
                    )));
                }
                set_r[slot] = true;
                cd.r[slot] = value;
            }
        }
        let mut set_f = vec![false; n * n];
        for (idx, m) in f_entries {
            if let Some(&bad) = idx.iter().find(|&&x| x == 0 || x > n) {
                return Err(Error::IndexOutOfRange { index: bad, n });
            }
            if m.rows() != rank || m.cols() != rank {
                return Err(Error::RankMismatch {
                    left: rank,
                    right: m.rows(),
                });
            }
            let (i, j) = (idx[0] - 1, idx[1] - 1);
            for (a, b, value) in [(i, j, m.clone()), (j, i, -m)] {
                let slot = a * n + b;
                if set_f[slot] && cd.f[slot] != value {
                    return Err(Error::SymmetryViolation(format!(
                        "F[{},{}] conflicts with a redundant entry",
                        a + 1,
                        b + 1
                    )));
                }
                set_f[slot] = true;
                cd.f[slot] = value;
            }
        }
        cd.validate()?;
        Ok(cd)
    }

    fn validate(&self) -> Result<()> {
        let n = self.n;
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    for l in 0..n {
                        let v = self.riem(i, j, k, l);
                        for (a, b, c, d, neg) in r_orbit(i, j, k, l) {
                            let w = self.riem(a, b, c, d);
                            let expected = if neg { -v.clone() } else { v.clone() };
                            if !(w.clone() - expected).is_negligible(1e-12) {
                                return Err(Error::SymmetryViolation(format!(
                                    "R[{},{},{},{}] vs R[{},{},{},{}]",
                                    i + 1,
                                    j + 1,
                                    k + 1,
                                    l + 1,
                                    a + 1,
                                    b + 1,
                                    c + 1,
                                    d + 1
                                )));
                            }
                        }
                    }
                }
            }
        }
        for i in 0..n {
            for j in 0..n {
                let sum = self.f_matrix(i, j) + self.f_matrix(j, i);
                if sum.max_abs() > 1e-12 || (T::is_exact() && !sum.is_zero()) {
                    return Err(Error::SymmetryViolation(format!(
                        "F[{},{}] is not antisymmetric in its form indices",
                        i + 1,
                        j + 1
                    )));
                }
                let m = self.f_matrix(i, j);
                let herm = m + &m.transpose().map(|z| z.conj());
                if herm.max_abs() > 1e-12 || (T::is_exact() && !herm.is_zero()) {
                    return Err(Error::NotSkewHermitian(format!("F[{},{}]", i + 1, j + 1)));
                }
            }
        }
        Ok(())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    /// `R_{ijkl}` with 0-based indices.
    pub fn riem(&self, i: usize, j: usize, k: usize, l: usize) -> &T {
        &self.r[r_index(self.n, i, j, k, l)]
    }

    /// `F_{ij}` with 0-based indices.
    pub fn f_matrix(&self, i: usize, j: usize) -> &Matrix<Complex<T>> {
        &self.f[i * self.n + j]
    }

    pub fn is_flat(&self) -> bool {
        self.r.iter().all(|x| x.is_zero()) && self.f.iter().all(Matrix::is_zero)
    }

    pub fn has_riemann(&self) -> bool {
        self.r.iter().any(|x| !x.is_zero())
    }

    pub fn has_bundle_curvature(&self) -> bool {
        self.f.iter().any(|m| !m.is_zero())
    }

    /// `Ω_{ij} = (1/2) Σ_{k,l} R_{ijkl} e^k ∧ e^l`.
    pub fn omega(&self, i: usize, j: usize) -> DiffForm<T> {
        let mut out = DiffForm::zero(self.n);
        for k in 0..self.n {
            for l in (k + 1)..self.n {
                let idx = MultiIndex::from_mask((1 << k) | (1 << l));
                out.add_term(idx, self.riem(i, j, k, l).clone());
            }
        }
        out
    }

    /// `R̂_{ij} = (1/4) Σ_{k,l} R_{ijkl} e^k ∧ e^l`.
    pub fn r_hat(&self, i: usize, j: usize) -> DiffForm<T> {
        self.omega(i, j).scale(&T::from_ratio(1, 2))
    }

    /// Entry `(a,b)` of the matrix-valued 2-form `F̂ = Σ_{i<j} F_{ij} e^{ij}`.
    pub fn curvature_form_entry(&self, a: usize, b: usize) -> DiffForm<Complex<T>> {
        let mut out = DiffForm::zero(self.n);
        for i in 0..self.n {
            for j in (i + 1)..self.n {
                let idx = MultiIndex::from_mask((1 << i) | (1 << j));
                out.add_term(idx, self.f_matrix(i, j).get(a, b).clone());
            }
        }
        out
    }

    /// Largest violation of the first Bianchi identity `R_{ijkl} + R_{iklj} + R_{iljk} = 0`.
    pub fn bianchi_defect(&self) -> f64 {
        let n = self.n;
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    for l in 0..n {
                        let s = self.riem(i, j, k, l).clone()
                            + self.riem(i, k, l, j).clone()
                            + self.riem(i, l, j, k).clone();
                        worst = worst.max(s.magnitude());
                    }
                }
            }
        }
        worst
    }

    pub fn satisfies_bianchi(&self) -> bool {
        let d = self.bianchi_defect();
        if T::is_exact() {
            d == 0.0
        } else {
            d <= 1e-12
        }
    }

    /// Scale `R` by `a` and `F` by `b`.
    pub fn scaled(&self, a: &T, b: &T) -> Self {
        let bc = Complex::new(b.clone(), T::zero());
        CurvatureData {
            n: self.n,
            rank: self.rank,
            r: self.r.iter().map(|x| x.clone() * a.clone()).collect(),
            f: self.f.iter().map(|m| m.scale(&bc)).collect(),
        }
    }

    pub fn without_bundle(&self) -> Self {
        CurvatureData {
            f: vec![Matrix::zeros(self.rank, self.rank); self.n * self.n],
            ..self.clone()
        }
    }

    pub fn without_riemann(&self) -> Self {
        CurvatureData {
            r: vec![T::zero(); self.n.pow(4)],
            ..self.clone()
        }
    }

    /// Replace every `F_{ij}` by `U F_{ij} U^†`.
    pub fn gauge_transform(&self, u: &Matrix<Complex<T>>) -> Result<Self> {
        if u.rows() != self.rank {
            return Err(Error::RankMismatch {
                left: self.rank,
                right: u.rows(),
            });
        }
        let u_dag = u.transpose().map(|z| z.conj());
        Ok(CurvatureData {
            f: self.f.iter().map(|m| &(u * m) * &u_dag).collect(),
            ..self.clone()
        })
    }

    /// Project `R` onto tensors satisfying the first Bianchi identity.
    pub fn bianchi_projected(&self) -> Self {
        let n = self.n;
        let third = T::from_ratio(1, 3);
        let mut r = self.r.clone();
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    for l in 0..n {
                        let cyc = self.riem(i, j, k, l).clone()
                            + self.riem(i, k, l, j).clone()
                            + self.riem(i, l, j, k).clone();
                        r[r_index(n, i, j, k, l)] = self.riem(i, j, k, l).clone() - cyc * third.clone();
                    }
                }
            }
        }
        CurvatureData { r, ..self.clone() }
    }

    /// Random data from a symmetric form on `Λ²` and random skew-Hermitian `F`.
    pub fn random_with(
        n: usize,
        rank: usize,
        seed: u64,
        bianchi: bool,
        mut sample: impl FnMut(&mut ChaCha8Rng) -> T,
    ) -> Result<Self> {
        let mut cd = Self::zero(n, rank)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let pairs: Vec<(usize, usize)> = (0..n)
            .flat_map(|i| ((i + 1)..n).map(move |j| (i, j)))
            .collect();
        for (a, &(i, j)) in pairs.iter().enumerate() {
            for &(k, l) in &pairs[a..] {
                let v = sample(&mut rng);
                for (p, q2, r2, s, neg) in r_orbit(i, j, k, l) {
                    cd.r[r_index(n, p, q2, r2, s)] = if neg { -v.clone() } else { v.clone() };
                }
            }
        }
        for &(i, j) in &pairs {
            let mut m = Matrix::zeros(rank, rank);
            for a in 0..rank {
                for b in a..rank {
                    if a == b {
                        m.set(a, a, Complex::new(T::zero(), sample(&mut rng)));
                    } else {
                        let z = Complex::new(sample(&mut rng), sample(&mut rng));
                        m.set(a, b, z.clone());
                        m.set(b, a, -z.conj());
                    }
                }
            }
            cd.f[j * n + i] = -&m;
            cd.f[i * n + j] = m;
        }
        if bianchi {
            cd = cd.bianchi_projected();
        }
        cd.validate()?;
        Ok(cd)
    }
}

impl CurvatureData<f64> {
    /// Entries uniform in `[-1, 1)`.
    pub fn random(n: usize, rank: usize, seed: u64, bianchi: bool) -> Result<Self> {
        Self::random_with(n, rank, seed, bianchi, |rng| rng.gen_range(-1.0..1.0))
    }
}

impl CurvatureData<Rational> {
    /// Entries `k/2` with `k` uniform in `-3..=3`.
    pub fn random_exact(n: usize, rank: usize, seed: u64, bianchi: bool) -> Result<Self> {
        Self::random_with(n, rank, seed, bianchi, |rng| q(rng.gen_range(-3..=3), 2))
    }

    pub fn to_f64(&self) -> CurvatureData<f64> {
        CurvatureData {
            n: self.n,
            rank: self.rank,
            r: self.r.iter().map(RealScalar::to_f64).collect(),
            f: self
                .f
                .iter()
                .map(|m| m.map(|z| Complex::new(z.re.to_f64(), z.im.to_f64())))
                .collect(),
        }
    }
}
