//! Real quadratic spaces of arbitrary signature.
//!
//! Two arithmetic modes are provided. [`QuadraticSpace`] works in `f64` with a
//! relative tolerance (default `1e-9`) and backs the differential-geometric
//! sampling. [`ExactQuadraticSpace`] works over ℚ and is what lattice and
//! signature computations use, so that an inertia count never depends on a
//! tolerance.
//!
//! Signatures are computed by a symmetric LDLᵀ factorization with
//! Bunch–Parlett pivoting (1×1 or 2×2 pivots). By Sylvester's law of inertia
//! the pivot blocks carry the signature; a 2×2 pivot is only chosen when its
//! determinant is negative, so it always contributes one positive and one
//! negative direction. No eigenvalues are needed, which is what lets the same
//! routine run over ℚ.

use std::sync::Arc;

use nalgebra::{Complex, DMatrix, DVector};
use num_traits::{Signed, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::exact::{bilinear, Rational, RationalMatrix};
use crate::linalg;

pub const DEFAULT_TOLERANCE: f64 = 1e-9;

/// Inertia of a symmetric form.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct Signature {
    pub positive: usize,
    pub negative: usize,
    pub zero: usize,
}

impl Signature {
    pub fn dim(&self) -> usize {
        self.positive + self.negative + self.zero
    }

    pub fn is_nondegenerate(&self) -> bool {
        self.zero == 0
    }
}

// Bunch–Parlett growth constant (1 + √17) / 8.
const PIVOT_ALPHA: f64 = 0.640_388_203_202_208_4;

trait PivotScalar: Clone + Signed + PartialOrd {
    fn scaled(&self, factor: f64) -> Self;
}

impl PivotScalar for f64 {
    fn scaled(&self, factor: f64) -> Self {
        self * factor
    }
}

impl PivotScalar for Rational {
    fn scaled(&self, factor: f64) -> Self {
        self * Rational::from_float(factor).expect("finite pivot constant")
    }
}

/// Inertia of a symmetric matrix given as rows, by LDLᵀ with symmetric pivoting.
fn inertia<T: PivotScalar>(mut a: Vec<Vec<T>>, negligible: impl Fn(&T) -> bool) -> Signature {
    let mut sig = Signature { positive: 0, negative: 0, zero: 0 };
    let mut live: Vec<usize> = (0..a.len()).collect();
    while !live.is_empty() {
        let mut diag: Option<(usize, T)> = None;
        for &k in &live {
            let v = a[k][k].abs();
            if diag.as_ref().is_none_or(|(_, best)| v > *best) {
                diag = Some((k, v));
            }
        }
        let mut off: Option<(usize, usize, T)> = None;
        for (pos, &i) in live.iter().enumerate() {
            for &j in &live[pos + 1..] {
                let v = a[i][j].abs();
                if off.as_ref().is_none_or(|(_, _, best)| v > *best) {
                    off = Some((i, j, v));
                }
            }
        }
        let (k, dmax) = diag.expect("live set is non-empty");
        let omax = off.as_ref().map(|(_, _, v)| v.clone());
        let diag_small = negligible(&dmax);
        let off_small = omax.as_ref().is_none_or(&negligible);
        if diag_small && off_small {
            sig.zero += live.len();
            break;
        }
        let use_single = match &omax {
            None => true,
            Some(o) => !diag_small && dmax >= o.scaled(PIVOT_ALPHA),
        };
        if use_single {
            let pivot = a[k][k].clone();
            if pivot.is_positive() {
                sig.positive += 1;
            } else {
                sig.negative += 1;
            }
            live.retain(|&x| x != k);
            for &i in &live {
                if a[i][k].is_zero() {
                    continue;
                }
                let factor = a[i][k].clone() / pivot.clone();
                for &j in &live {
                    let delta = factor.clone() * a[k][j].clone();
                    a[i][j] = a[i][j].clone() - delta;
                }
            }
        } else {
            let (i, j, _) = off.expect("off-diagonal pivot exists");
            // det = a_ii a_jj − a_ij² < 0 because |a_ii|,|a_jj| < α|a_ij|
            sig.positive += 1;
            sig.negative += 1;
            let (pii, pij, pjj) = (a[i][i].clone(), a[i][j].clone(), a[j][j].clone());
            let det = pii.clone() * pjj.clone() - pij.clone() * pij.clone();
            live.retain(|&x| x != i && x != j);
            let rows: Vec<(usize, T, T)> = live.iter().map(|&r| (r, a[r][i].clone(), a[r][j].clone())).collect();
            for (r, ri, rj) in &rows {
                // [ri rj] P⁻¹ with P⁻¹ = adj(P) / det
                let ci = (ri.clone() * pjj.clone() - rj.clone() * pij.clone()) / det.clone();
                let cj = (rj.clone() * pii.clone() - ri.clone() * pij.clone()) / det.clone();
                for (s, si, sj) in &rows {
                    let delta = ci.clone() * si.clone() + cj.clone() * sj.clone();
                    a[*r][*s] = a[*r][*s].clone() - delta;
                }
            }
        }
    }
    sig
}

/// Signature of a symmetric floating matrix; entries below `tol * max|entry|` count as zero.
pub fn signature_of(m: &DMatrix<f64>, tol: f64) -> Result<Signature> {
    check_symmetric(m, tol)?;
    let scale = linalg::max_abs(m);
    if scale == 0.0 {
        return Ok(Signature { positive: 0, negative: 0, zero: m.nrows() });
    }
    let rows: Vec<Vec<f64>> = m.row_iter().map(|r| r.iter().copied().collect()).collect();
    Ok(inertia(rows, |x: &f64| x.abs() <= tol * scale))
}

/// Exact signature over ℚ.
pub fn signature_exact(m: &RationalMatrix) -> Result<Signature> {
    if m.nrows() != m.ncols() {
        return Err(Error::NotSquare { rows: m.nrows(), cols: m.ncols() });
    }
    if !m.is_symmetric() {
        return Err(Error::NotSymmetric { asymmetry: f64::NAN });
    }
    let rows: Vec<Vec<Rational>> =
        (0..m.nrows()).map(|i| (0..m.ncols()).map(|j| m[(i, j)].clone()).collect()).collect();
    Ok(inertia(rows, Zero::is_zero))
}

fn check_symmetric(m: &DMatrix<f64>, tol: f64) -> Result<()> {
    if m.nrows() != m.ncols() {
        return Err(Error::NotSquare { rows: m.nrows(), cols: m.ncols() });
    }
    let asym = linalg::asymmetry(m);
    if asym > tol * linalg::max_abs(m).max(1.0) {
        return Err(Error::NotSymmetric { asymmetry: asym });
    }
    Ok(())
}

/// Cholesky-style test: every pivot must exceed `tol * max|entry|`.
pub fn is_positive_definite(m: &DMatrix<f64>, tol: f64) -> bool {
    if check_symmetric(m, tol).is_err() {
        return false;
    }
    let n = m.nrows();
    let floor = tol * linalg::max_abs(m);
    let mut a = m.clone();
    for k in 0..n {
        let pivot = a[(k, k)];
        if !(pivot > floor) {
            return false;
        }
        for i in (k + 1)..n {
            let factor = a[(i, k)] / pivot;
            for j in (k + 1)..n {
                a[(i, j)] -= factor * a[(k, j)];
            }
        }
    }
    true
}

/// Exact test: all leading principal minors positive (elimination pivots without pivoting).
pub fn is_positive_definite_exact(m: &RationalMatrix) -> bool {
    if !m.is_symmetric() {
        return false;
    }
    let n = m.nrows();
    let mut a = m.clone();
    for k in 0..n {
        let pivot = a[(k, k)].clone();
        if !pivot.is_positive() {
            return false;
        }
        for i in (k + 1)..n {
            let factor = &a[(i, k)] / &pivot;
            for j in (k + 1)..n {
                let delta = &factor * &a[(k, j)];
                a[(i, j)] -= delta;
            }
        }
    }
    true
}

/// A real vector space with a nondegenerate symmetric bilinear form `q`.
#[derive(Clone, Debug)]
pub struct QuadraticSpace {
    gram: Arc<DMatrix<f64>>,
    scale: f64,
    tolerance: f64,
}

impl PartialEq for QuadraticSpace {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.gram, &other.gram) || *self.gram == *other.gram
    }
}

impl QuadraticSpace {
    pub fn new(gram: DMatrix<f64>) -> Result<Self> {
        Self::with_tolerance(gram, DEFAULT_TOLERANCE)
    }

    pub fn with_tolerance(gram: DMatrix<f64>, tolerance: f64) -> Result<Self> {
        let sig = signature_of(&gram, tolerance)?;
        if !sig.is_nondegenerate() {
            return Err(Error::Degenerate);
        }
        let gram = (&gram + gram.transpose()) * 0.5;
        let scale = linalg::max_abs(&gram);
        Ok(Self { gram: Arc::new(gram), scale, tolerance })
    }

    /// `diag(1,…,1,−1,…,−1)` with `positive` ones and `negative` minus ones.
    pub fn diagonal(positive: usize, negative: usize) -> Self {
        let d = DVector::from_fn(positive + negative, |i, _| if i < positive { 1.0 } else { -1.0 });
        Self::new(DMatrix::from_diagonal(&d)).expect("diagonal ±1 form is nondegenerate")
    }

    pub fn from_rational(m: &RationalMatrix) -> Result<Self> {
        Self::new(m.to_f64())
    }

    pub fn dim(&self) -> usize {
        self.gram.nrows()
    }

    pub fn gram(&self) -> &DMatrix<f64> {
        &self.gram
    }

    pub fn tolerance(&self) -> f64 {
        self.tolerance
    }

    /// Largest absolute Gram entry, the reference scale for relative tolerances.
    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn inner(&self, x: &DVector<f64>, y: &DVector<f64>) -> f64 {
        (x.transpose() * &*self.gram * y)[(0, 0)]
    }

    pub fn norm2(&self, x: &DVector<f64>) -> f64 {
        self.inner(x, x)
    }

    /// Complex-bilinear extension of `q` (no conjugation).
    pub fn inner_c(&self, x: &DVector<Complex<f64>>, y: &DVector<Complex<f64>>) -> Complex<f64> {
        let g = self.gram.map(|v| Complex::new(v, 0.0));
        (x.transpose() * g * y)[(0, 0)]
    }

    /// `q(x, ȳ)`, which is real and positive on positive null vectors when `y = x`.
    pub fn hermitian(&self, x: &DVector<Complex<f64>>, y: &DVector<Complex<f64>>) -> Complex<f64> {
        self.inner_c(x, &y.map(|c| c.conj()))
    }

    pub fn signature(&self) -> Signature {
        signature_of(&self.gram, self.tolerance).expect("gram validated at construction")
    }

    /// Gram matrix of `q` on the columns of `basis`.
    pub fn restrict_form(&self, basis: &DMatrix<f64>) -> DMatrix<f64> {
        let r = basis.transpose() * &*self.gram * basis;
        (&r + r.transpose()) * 0.5
    }

    pub fn is_positive_definite(&self) -> bool {
        is_positive_definite(&self.gram, self.tolerance)
    }

    pub fn subspace(&self, basis: DMatrix<f64>) -> Result<Subspace> {
        Subspace::new(self.clone(), basis)
    }

    /// `{x : q(x, s) = 0 for all s in sub}`.
    pub fn orthogonal_complement(&self, sub: &Subspace) -> OrthogonalComplement {
        let gb = &*self.gram * &sub.basis;
        let basis = linalg::euclidean_complement(&gb, 1e-12);
        let restricted = self.restrict_form(&sub.basis);
        let degenerate = signature_of(&restricted, self.tolerance).map(|s| s.zero > 0).unwrap_or(true);
        OrthogonalComplement {
            complement: Subspace { space: self.clone(), basis },
            degenerate,
        }
    }

    /// Projection of `x` into `line^⊥` along `line`.
    pub fn project_along(&self, line: &DVector<f64>, x: &DVector<f64>) -> Result<DVector<f64>> {
        self.check_len(line)?;
        self.check_len(x)?;
        let ll = self.norm2(line);
        if ll.abs() <= self.tolerance * self.scale * line.norm_squared() {
            return Err(Error::NullLine);
        }
        Ok(x - line * (self.inner(x, line) / ll))
    }

    pub(crate) fn check_len<T: nalgebra::Scalar>(&self, x: &DVector<T>) -> Result<()> {
        if x.len() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), found: x.len() });
        }
        Ok(())
    }

    /// A `q`-orthogonal basis with `q(f_k, f_k) = ±1`, positive vectors first.
    pub fn orthonormal_basis(&self) -> (DMatrix<f64>, Vec<f64>) {
        let eig = nalgebra::SymmetricEigen::new((*self.gram).clone());
        let n = self.dim();
        let mut idx: Vec<usize> = (0..n).collect();
        idx.sort_by(|&a, &b| eig.eigenvalues[b].partial_cmp(&eig.eigenvalues[a]).unwrap());
        let mut f = DMatrix::zeros(n, n);
        let mut eps = Vec::with_capacity(n);
        for (col, &k) in idx.iter().enumerate() {
            let l = eig.eigenvalues[k];
            f.set_column(col, &(eig.eigenvectors.column(k) / l.abs().sqrt()));
            eps.push(l.signum());
        }
        (f, eps)
    }
}

/// A subspace of a quadratic space, stored as an explicit basis (columns).
#[derive(Clone, Debug)]
pub struct Subspace {
    space: QuadraticSpace,
    basis: DMatrix<f64>,
}

impl Subspace {
    pub fn new(space: QuadraticSpace, basis: DMatrix<f64>) -> Result<Self> {
        if basis.nrows() != space.dim() {
            return Err(Error::DimensionMismatch { expected: space.dim(), found: basis.nrows() });
        }
        if linalg::numeric_rank(&basis, 1e-12) < basis.ncols() {
            return Err(Error::LinearlyDependent);
        }
        Ok(Self { space, basis })
    }

    pub fn span(space: &QuadraticSpace, vectors: &[DVector<f64>]) -> Result<Self> {
        let basis = DMatrix::from_columns(vectors);
        Self::new(space.clone(), basis)
    }

    pub fn ambient(&self) -> &QuadraticSpace {
        &self.space
    }

    pub fn basis(&self) -> &DMatrix<f64> {
        &self.basis
    }

    pub fn dim(&self) -> usize {
        self.basis.ncols()
    }

    pub fn restrict_form(&self) -> DMatrix<f64> {
        self.space.restrict_form(&self.basis)
    }

    pub fn contains(&self, x: &DVector<f64>) -> bool {
        let coeffs = self.basis.clone().svd(true, true).solve(x, 1e-14);
        match coeffs {
            Ok(c) => (&self.basis * c - x).norm() <= 1e-9 * x.norm().max(1.0),
            Err(_) => false,
        }
    }
}

/// Result of [`QuadraticSpace::orthogonal_complement`]. `degenerate` is set when
/// `q` restricted to the input is degenerate, in which case the complement
/// meets the input subspace.
#[derive(Clone, Debug)]
pub struct OrthogonalComplement {
    pub complement: Subspace,
    pub degenerate: bool,
}

/// Quadratic space over ℚ.
#[derive(Clone, Debug, PartialEq)]
pub struct ExactQuadraticSpace {
    gram: RationalMatrix,
}

impl ExactQuadraticSpace {
    pub fn new(gram: RationalMatrix) -> Result<Self> {
        if gram.nrows() != gram.ncols() {
            return Err(Error::NotSquare { rows: gram.nrows(), cols: gram.ncols() });
        }
        if !gram.is_symmetric() {
            return Err(Error::NotSymmetric { asymmetry: f64::NAN });
        }
        if gram.determinant()?.is_zero() {
            return Err(Error::Degenerate);
        }
        Ok(Self { gram })
    }

    pub fn gram(&self) -> &RationalMatrix {
        &self.gram
    }

    pub fn dim(&self) -> usize {
        self.gram.nrows()
    }

    pub fn inner(&self, x: &[Rational], y: &[Rational]) -> Rational {
        bilinear(&self.gram, x, y)
    }

    pub fn signature(&self) -> Signature {
        signature_exact(&self.gram).expect("validated at construction")
    }

    pub fn is_positive_definite(&self) -> bool {
        is_positive_definite_exact(&self.gram)
    }

    pub fn restrict_form(&self, basis: &[Vec<Rational>]) -> RationalMatrix {
        let k = basis.len();
        let mut out = RationalMatrix::zeros(k, k);
        for i in 0..k {
            for j in i..k {
                let v = self.inner(&basis[i], &basis[j]);
                out[(j, i)] = v.clone();
                out[(i, j)] = v;
            }
        }
        out
    }

    /// Exact kernel of `Bᵀ G`, plus the degeneracy flag of `q` on `basis`.
    pub fn orthogonal_complement(&self, basis: &[Vec<Rational>]) -> Result<(Vec<Vec<Rational>>, bool)> {
        let b = RationalMatrix::from_columns(basis)?;
        let bt_g = b.transpose().mul(&self.gram)?;
        let complement = bt_g.nullspace();
        let degenerate = self.restrict_form(basis).determinant()?.is_zero();
        Ok((complement, degenerate))
    }

    pub fn project_along(&self, line: &[Rational], x: &[Rational]) -> Result<Vec<Rational>> {
        let ll = self.inner(line, line);
        if ll.is_zero() {
            return Err(Error::NullLine);
        }
        let c = self.inner(x, line) / ll;
        Ok(x.iter().zip(line).map(|(xi, li)| xi - &c * li).collect())
    }
}
