//! G2 and Spin(7) structures on R^7 / R^8 and the induced splitting of 2-forms.

use std::fmt;

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exterior::{degree_basis, DiffForm, MultiIndex};
use crate::linalg::Matrix;
use crate::model_heat::CurvatureData;
use crate::scalar::{q, Rational, RealScalar, Scalar};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum HolonomyKind {
    G2,
    Spin7,
}

impl HolonomyKind {
    pub fn dimension(self) -> usize {
        match self {
            HolonomyKind::G2 => 7,
            HolonomyKind::Spin7 => 8,
        }
    }

    /// Degree of the defining form.
    pub fn form_degree(self) -> usize {
        match self {
            HolonomyKind::G2 => 3,
            HolonomyKind::Spin7 => 4,
        }
    }

    /// Eigenvalues of `*e(w)` on the small and large summands.
    pub fn eigenvalues(self) -> (i64, i64) {
        match self {
            HolonomyKind::G2 => (2, -1),
            HolonomyKind::Spin7 => (3, -1),
        }
    }

    /// Fiber dimension of the large summand (14 or 21).
    pub fn big_dimension(self) -> usize {
        match self {
            HolonomyKind::G2 => 14,
            HolonomyKind::Spin7 => 21,
        }
    }

    pub fn big_target(self) -> Summand {
        match self {
            HolonomyKind::G2 => Summand::Lambda14,
            HolonomyKind::Spin7 => Summand::Lambda21,
        }
    }
}

impl fmt::Display for HolonomyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            HolonomyKind::G2 => "g2",
            HolonomyKind::Spin7 => "spin7",
        })
    }
}

impl std::str::FromStr for HolonomyKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "g2" => Ok(HolonomyKind::G2),
            "spin7" => Ok(HolonomyKind::Spin7),
            other => Err(Error::Parse(format!("unknown holonomy kind {other:?}"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Summand {
    Lambda7,
    Lambda14,
    Lambda21,
}

impl Summand {
    pub fn dimension(self) -> usize {
        match self {
            Summand::Lambda7 => 7,
            Summand::Lambda14 => 14,
            Summand::Lambda21 => 21,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct HolonomyStructure {
    pub kind: HolonomyKind,
    pub n: usize,
    pub defining_form: DiffForm<Rational>,
    /// `(eigenvalue, multiplicity)` of `*e(w)` on 2-forms, largest first.
    pub eigenvalue_table: Vec<(i64, usize)>,
    /// Sign changes applied to the textbook expression during validation.
    pub corrections: Vec<String>,
    star_ext: Matrix<Rational>,
}

fn standard_phi() -> DiffForm<Rational> {
    let terms: [(&[usize], i64); 7] = [
        (&[1, 2, 3], 1),
        (&[1, 4, 5], 1),
        (&[1, 6, 7], 1),
        (&[2, 4, 6], 1),
        (&[2, 5, 7], -1),
        (&[3, 4, 7], -1),
        (&[3, 5, 6], -1),
    ];
    DiffForm::from_terms(
        7,
        terms
            .iter()
            .map(|(idx, c)| (MultiIndex::new(idx, 7).unwrap(), q(*c, 1))),
    )
}

/// Embed a form on R^7 into R^8 along the first seven coordinates.
fn embed(form: &DiffForm<Rational>, n: usize) -> DiffForm<Rational> {
    DiffForm::from_terms(n, form.terms().iter().map(|(i, c)| (*i, c.clone())))
}

fn cayley_form(phi: &DiffForm<Rational>, flip_last: bool) -> DiffForm<Rational> {
    let e8 = DiffForm::basis(8, MultiIndex::single(8));
    let e8 = if flip_last { e8.scale(&q(-1, 1)) } else { e8 };
    let first = embed(phi, 8).wedge(&e8).unwrap();
    first.add(&embed(&phi.hodge_star(), 8)).unwrap()
}

/// Matrix of `α ↦ *(w ∧ α)` on the lexicographic 2-form basis.
fn star_ext_matrix(w: &DiffForm<Rational>) -> Matrix<Rational> {
    let n = w.n();
    let basis = degree_basis(n, 2);
    let mut m = Matrix::zeros(basis.len(), basis.len());
    for (col, b) in basis.iter().enumerate() {
        let image = w.wedge(&DiffForm::basis(n, *b)).unwrap().hodge_star();
        for (row, a) in basis.iter().enumerate() {
            m.set(row, col, image.coefficient(*a));
        }
    }
    m
}

/// Eigenvalue table from an exact quadratic minimal polynomial and the trace.
fn eigen_table(m: &Matrix<Rational>, hi: i64, lo: i64) -> Option<Vec<(i64, usize)>> {
    let dim = m.rows();
    let id = Matrix::<Rational>::identity(dim);
    let a = &m.clone() - &id.scale(&q(hi, 1));
    let b = &m.clone() - &id.scale(&q(lo, 1));
    if !(&a * &b).is_zero() || m != &m.transpose() {
        return None;
    }
    // hi·m_hi + lo·(dim − m_hi) = trace
    let trace = m.trace();
    let m_hi = (trace - q(lo * dim as i64, 1)) / q(hi - lo, 1);
    if !m_hi.is_integer() {
        return None;
    }
    let m_hi = m_hi.to_integer().try_into().ok()?;
    if m_hi > dim {
        return None;
    }
    Some(vec![(hi, m_hi), (lo, dim - m_hi)])
}

impl HolonomyStructure {
    fn validate(kind: HolonomyKind, form: DiffForm<Rational>, corrections: Vec<String>) -> Option<Self> {
        if kind == HolonomyKind::Spin7 && form.hodge_star() != form {
            return None;
        }
        let star_ext = star_ext_matrix(&form);
        let (hi, lo) = kind.eigenvalues();
        let table = eigen_table(&star_ext, hi, lo)?;
        if table != vec![(hi, 7), (lo, kind.big_dimension())] {
            return None;
        }
        Some(HolonomyStructure {
            kind,
            n: kind.dimension(),
            defining_form: form,
            eigenvalue_table: table,
            corrections,
            star_ext,
        })
    }

    pub fn degree(&self) -> usize {
        self.kind.form_degree()
    }

    pub fn dim_two_forms(&self) -> usize {
        self.n * (self.n - 1) / 2
    }
}

/// Build the standard structure, flipping signs until the eigenvalue and
/// self-duality checks pass.
pub fn standard_structure(kind: HolonomyKind) -> Result<HolonomyStructure> {
    let phi = standard_phi();
    let mut tried = Vec::new();
    for negate in [false, true] {
        let sign = if negate { q(-1, 1) } else { q(1, 1) };
        let flips: &[bool] = match kind {
            HolonomyKind::G2 => &[false],
            HolonomyKind::Spin7 => &[false, true],
        };
        for &flip_last in flips {
            let form = match kind {
                HolonomyKind::G2 => phi.scale(&sign),
                HolonomyKind::Spin7 => cayley_form(&phi, flip_last).scale(&sign),
            };
            let mut corrections = Vec::new();
            if negate {
                corrections.push("defining form negated".to_string());
            }
            if flip_last {
                corrections.push("orientation of the last coordinate reversed".to_string());
            }
            tried.push(corrections.join(", "));
            if let Some(s) = HolonomyStructure::validate(kind, form, corrections) {
                return Ok(s);
            }
        }
    }
    Err(Error::ValidationFailed(format!("{kind}: tried {tried:?}")))
}

/// The symmetric matrix of `*e(w)` on `Λ²`.
pub fn star_ext_on_two_forms(s: &HolonomyStructure) -> Matrix<Rational> {
    s.star_ext.clone()
}

#[derive(Clone, Debug, PartialEq)]
pub struct Projection {
    pub target: Summand,
    pub matrix: Matrix<Rational>,
}

impl Projection {
    pub fn apply<T: Scalar>(&self, alpha: &DiffForm<T>) -> Result<DiffForm<T>> {
        alpha.require_degree(2)?;
        let n = alpha.n();
        let v = alpha.to_vector(2);
        if v.len() != self.matrix.rows() {
            return Err(Error::DimensionMismatch {
                left: self.matrix.rows(),
                right: v.len(),
            });
        }
        let out: Vec<T> = (0..v.len())
            .map(|i| {
                (0..v.len()).fold(T::zero(), |acc, j| {
                    let p = self.matrix.get(i, j);
                    if p == &q(0, 1) || v[j].is_zero() {
                        acc
                    } else {
                        acc + T::from_rational(p) * v[j].clone()
                    }
                })
            })
            .collect();
        Ok(DiffForm::from_vector(n, 2, &out))
    }
}

/// `(P_7, P_big)` as closed-form polynomials in `*e(w)`.
pub fn projections(s: &HolonomyStructure) -> (Projection, Projection) {
    let a = &s.star_ext;
    let id = Matrix::<Rational>::identity(a.rows());
    let (hi, lo) = s.kind.eigenvalues();
    let gap = q(hi - lo, 1);
    // P_hi = (A − lo)/(hi − lo), P_lo = (hi − A)/(hi − lo)
    let p7 = (a - &id.scale(&q(lo, 1))).scale(&(q(1, 1) / gap.clone()));
    let pbig = (&id.scale(&q(hi, 1)) - a).scale(&(q(1, 1) / gap));
    (
        Projection {
            target: Summand::Lambda7,
            matrix: p7,
        },
        Projection {
            target: s.kind.big_target(),
            matrix: pbig,
        },
    )
}

/// Split a 2-form into its `Λ_7` part and the remainder.
pub fn decompose_two_form<T: Scalar>(
    s: &HolonomyStructure,
    alpha: &DiffForm<T>,
) -> Result<(DiffForm<T>, DiffForm<T>)> {
    if alpha.n() != s.n {
        return Err(Error::DimensionMismatch {
            left: s.n,
            right: alpha.n(),
        });
    }
    alpha.require_degree(2)?;
    let (p7, _) = projections(s);
    let a7 = p7.apply(alpha)?;
    let rest = alpha.sub(&a7)?;
    Ok((a7, rest))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct InstantonReport {
    pub is_instanton: bool,
    /// Largest modulus of a `Λ_7` coefficient over all matrix entries of `F`.
    pub max_lambda7_component: f64,
}

/// Check `P_7 F = 0` entrywise on the bundle curvature.
pub fn instanton_check<T: RealScalar>(
    s: &HolonomyStructure,
    cd: &CurvatureData<T>,
    tol: f64,
) -> Result<InstantonReport> {
    if cd.n() != s.n {
        return Err(Error::DimensionMismatch {
            left: s.n,
            right: cd.n(),
        });
    }
    let (p7, _) = projections(s);
    let mut max = 0.0f64;
    let mut exact_zero = true;
    for a in 0..cd.rank() {
        for b in 0..cd.rank() {
            let entry: DiffForm<Complex<T>> = cd.curvature_form_entry(a, b);
            if entry.is_zero() {
                continue;
            }
            let proj = p7.apply(&entry)?;
            for c in proj.terms().values() {
                exact_zero = false;
                max = max.max(c.magnitude());
            }
        }
    }
    let is_instanton = if T::is_exact() { exact_zero } else { max <= tol };
    Ok(InstantonReport {
        is_instanton,
        max_lambda7_component: max,
    })
}
