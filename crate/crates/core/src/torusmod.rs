//! Linear complex structures on `ℝ²ⁿ`, the loci compatible with a metric or a
//! symplectic form, the reconstruction of `J` from `(g, ψ)`, tangent-dimension
//! counts and Siegel coordinates.
//!
//! Conventions: `J₀ = [[0, −I], [I, 0]]`, `Ψ_std = [[0, I], [−I, 0]]`,
//! `ψ(u, v) = uᵀΨv` and `ψ_J(u, v) = ψ(u, Jv)`, so that `Ψ_std J₀ = I`.

use std::ops::{Add, Mul, Neg};

use nalgebra::{Complex, DMatrix, DVector};
use num_traits::{One, Zero};
use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::exact::{Rational, RationalMatrix};
use crate::linalg;
use crate::quadspace::is_positive_definite;
use crate::sample::{seeded, uniform_matrix, ChaCha8Rng};

/// `[[0, −I], [I, 0]]`.
pub fn standard_complex_structure(n: usize) -> DMatrix<f64> {
    DMatrix::from_fn(2 * n, 2 * n, |r, c| {
        if r >= n && c + n == r {
            1.0
        } else if r < n && c == r + n {
            -1.0
        } else {
            0.0
        }
    })
}

/// `[[0, I], [−I, 0]]`.
pub fn standard_symplectic(n: usize) -> DMatrix<f64> {
    -standard_complex_structure(n)
}

fn scale_of(m: &DMatrix<f64>) -> f64 {
    linalg::max_abs(m).max(1.0)
}

/// `J² = −I` up to `tol · max(1, ‖J‖²)`.
pub fn is_complex_structure(j: &DMatrix<f64>, tol: f64) -> bool {
    if !j.is_square() || j.nrows() % 2 != 0 {
        return false;
    }
    let n = j.nrows();
    linalg::max_abs(&(j * j + DMatrix::identity(n, n))) <= tol * scale_of(j).powi(2)
}

pub fn is_complex_structure_exact(j: &RationalMatrix) -> bool {
    if j.nrows() != j.ncols() || j.nrows() % 2 != 0 {
        return false;
    }
    let sq = j.mul(j).expect("square");
    (0..j.nrows()).all(|r| (0..j.ncols()).all(|c| sq[(r, c)] == if r == c { -Rational::one() } else { Rational::zero() }))
}

/// `JᵀGJ = G` up to `tol · ‖G‖`.
pub fn is_orthogonal_structure(g: &DMatrix<f64>, j: &DMatrix<f64>, tol: f64) -> bool {
    g.shape() == j.shape() && linalg::max_abs(&(j.transpose() * g * j - g)) <= tol * scale_of(g) * scale_of(j).powi(2)
}

/// `ΨJ` symmetric (up to `tol`) and positive definite.
pub fn is_cau_member(psi: &DMatrix<f64>, j: &DMatrix<f64>, tol: f64) -> bool {
    if psi.shape() != j.shape() {
        return false;
    }
    let m = psi * j;
    let scale = scale_of(&m);
    linalg::asymmetry(&m) <= tol * scale && is_positive_definite(&((&m + m.transpose()) * 0.5), tol * scale)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Orientation {
    Standard,
    Reversed,
}

/// Orientation of `(v₁, Jv₁, …, vₙ, Jvₙ)` for a complex basis `v` picked greedily
/// from the standard basis, relative to the same construction for `J₀`.
pub fn orientation_of(j: &DMatrix<f64>) -> Orientation {
    let dim = j.nrows();
    let mut cols: Vec<DVector<f64>> = Vec::with_capacity(dim);
    for i in 0..dim {
        if cols.len() == dim {
            break;
        }
        let e = DVector::from_fn(dim, |r, _| if r == i { 1.0 } else { 0.0 });
        let je = j * &e;
        let mut trial = cols.clone();
        trial.push(e);
        trial.push(je);
        if linalg::numeric_rank(&DMatrix::from_columns(&trial), 1e-10) == trial.len() {
            cols = trial;
        }
    }
    let det = DMatrix::from_columns(&cols).determinant();
    // for J₀ the greedy basis is (e₁, eₙ₊₁, e₂, eₙ₊₂, …), a permutation of sign (−1)^{n(n−1)/2}
    let n = dim / 2;
    let reference = if (n * (n.saturating_sub(1)) / 2) % 2 == 0 { 1.0 } else { -1.0 };
    if det * reference > 0.0 {
        Orientation::Standard
    } else {
        Orientation::Reversed
    }
}

#[derive(Clone, Debug)]
pub struct LinearComplexStructure {
    pub n: usize,
    pub j: DMatrix<f64>,
    pub orientation: Orientation,
}

impl LinearComplexStructure {
    pub fn new(j: DMatrix<f64>, tol: f64) -> Result<Self> {
        if !is_complex_structure(&j, tol) {
            return Err(Error::NotComplexStructure);
        }
        let orientation = orientation_of(&j);
        Ok(Self { n: j.nrows() / 2, j, orientation })
    }

    pub fn standard(n: usize) -> Self {
        Self { n, j: standard_complex_structure(n), orientation: Orientation::Standard }
    }
}

#[derive(Clone, Debug)]
pub struct SymplecticForm {
    pub psi: DMatrix<f64>,
}

impl SymplecticForm {
    pub fn new(psi: DMatrix<f64>, tol: f64) -> Result<Self> {
        if !psi.is_square() || psi.nrows() % 2 != 0 {
            return Err(Error::BadSymplectic);
        }
        let scale = scale_of(&psi);
        if linalg::max_abs(&(&psi + psi.transpose())) > tol * scale {
            return Err(Error::BadSymplectic);
        }
        let s = linalg::singular_values(&psi);
        if s.last().copied().unwrap_or(0.0) <= tol * s[0] {
            return Err(Error::BadSymplectic);
        }
        Ok(Self { psi })
    }

    pub fn standard(n: usize) -> Self {
        Self { psi: standard_symplectic(n) }
    }

    pub fn n(&self) -> usize {
        self.psi.nrows() / 2
    }
}

#[derive(Clone, Debug)]
pub struct EuclideanMetric {
    pub g: DMatrix<f64>,
}

impl EuclideanMetric {
    pub fn new(g: DMatrix<f64>, tol: f64) -> Result<Self> {
        if !g.is_square() || linalg::asymmetry(&g) > tol * scale_of(&g) || g.clone().cholesky().is_none() {
            return Err(Error::BadMetric);
        }
        Ok(Self { g })
    }

    pub fn identity(n: usize) -> Self {
        Self { g: DMatrix::identity(2 * n, 2 * n) }
    }
}

/// The polar factor of `A = −G⁻¹Ψ` (so `g(Au, v) = ψ(u, v)`) in the `g`-inner
/// product. It is a `g`-orthogonal complex structure and `ΨJ = G|A|` is positive.
pub fn two_out_of_three(g: &EuclideanMetric, psi: &SymplecticForm) -> Result<LinearComplexStructure> {
    if g.g.shape() != psi.psi.shape() {
        return Err(Error::DimensionMismatch { expected: g.g.nrows(), found: psi.psi.nrows() });
    }
    let chol = g.g.clone().cholesky().ok_or(Error::BadMetric)?;
    let l = chol.l();
    let lt_inv = l.transpose().try_inverse().ok_or(Error::BadMetric)?;
    // Ã = Lᵀ A L⁻ᵀ = −L⁻¹ Ψ L⁻ᵀ is antisymmetric
    let l_inv = l.clone().try_inverse().ok_or(Error::BadMetric)?;
    let a = -(&l_inv * &psi.psi * l_inv.transpose());
    let a = (&a - a.transpose()) * 0.5;
    // polar factor U Vᵀ of Ã = U Σ Vᵀ
    let svd = a.svd(true, true);
    if svd.singular_values.min() <= 1e-14 * svd.singular_values.max() {
        return Err(Error::BadSymplectic);
    }
    let jt = svd.u.ok_or(Error::BadSymplectic)? * svd.v_t.ok_or(Error::BadSymplectic)?;
    let j = &lt_inv * jt * l.transpose();
    let n = j.nrows() / 2;
    let unitarity = linalg::max_abs(&(&j * &j + DMatrix::identity(2 * n, 2 * n)));
    if !(unitarity <= 1e-12 * scale_of(&j).powi(2)) {
        return Err(Error::BadSymplectic);
    }
    let orientation = orientation_of(&j);
    Ok(LinearComplexStructure { n, j, orientation })
}

/// Where a tangent space is computed.
#[derive(Clone, Debug)]
pub enum Locus {
    All,
    Orthogonal(DMatrix<f64>),
    Cau(DMatrix<f64>),
    /// Both conditions: the intersection of the two tangent spaces.
    Intersection(DMatrix<f64>, DMatrix<f64>),
}

#[derive(Clone, Debug)]
pub enum ExactLocus {
    All,
    Orthogonal(RationalMatrix),
    Cau(RationalMatrix),
    Intersection(RationalMatrix, RationalMatrix),
}

type Mat<T> = Vec<Vec<T>>;

fn mm<T: Clone + Zero + Add<Output = T> + Mul<Output = T>>(a: &Mat<T>, b: &Mat<T>) -> Mat<T> {
    let (r, k, c) = (a.len(), b.len(), b[0].len());
    (0..r)
        .map(|i| {
            (0..c)
                .map(|j| (0..k).fold(T::zero(), |acc, l| acc + a[i][l].clone() * b[l][j].clone()))
                .collect()
        })
        .collect()
}

fn tr<T: Clone>(a: &Mat<T>) -> Mat<T> {
    (0..a[0].len()).map(|j| a.iter().map(|row| row[j].clone()).collect()).collect()
}

fn add<T: Clone + Add<Output = T>>(a: &Mat<T>, b: &Mat<T>) -> Mat<T> {
    a.iter().zip(b).map(|(x, y)| x.iter().zip(y).map(|(p, q)| p.clone() + q.clone()).collect()).collect()
}

/// Linearized constraints on `X` at `J`, one column per unit matrix `E_pq`:
/// `XJ + JX` always, `XᵀGJ + JᵀGX` with a metric, `ΨX − (ΨX)ᵀ` with a form.
fn constraint_matrix<T>(j: &Mat<T>, g: Option<&Mat<T>>, psi: Option<&Mat<T>>) -> Mat<T>
where
    T: Clone + Zero + One + Add<Output = T> + Mul<Output = T> + Neg<Output = T>,
{
    let d = j.len();
    let mut cols: Vec<Vec<T>> = Vec::with_capacity(d * d);
    let gj = g.map(|g| mm(g, j));
    for p in 0..d {
        for q in 0..d {
            let mut x = vec![vec![T::zero(); d]; d];
            x[p][q] = T::one();
            let mut col: Vec<T> = add(&mm(&x, j), &mm(j, &x)).into_iter().flatten().collect();
            if let Some(gj) = &gj {
                let t = mm(&tr(&x), gj);
                col.extend(add(&t, &tr(&t)).into_iter().flatten());
            }
            if let Some(psi) = psi {
                let t = mm(psi, &x);
                let neg: Mat<T> = tr(&t).into_iter().map(|r| r.into_iter().map(|v| -v).collect()).collect();
                col.extend(add(&t, &neg).into_iter().flatten());
            }
            cols.push(col);
        }
    }
    tr(&cols)
}

fn rows_of(m: &DMatrix<f64>) -> Mat<f64> {
    (0..m.nrows()).map(|r| m.row(r).iter().copied().collect()).collect()
}

fn rows_of_exact(m: &RationalMatrix) -> Mat<Rational> {
    (0..m.nrows()).map(|r| (0..m.ncols()).map(|c| m[(r, c)].clone()).collect()).collect()
}

/// Real dimension of the tangent space of the locus at `J`: the nullity of the
/// linearized constraints, with singular values below `1e−8·σ_max` treated as zero.
pub fn tangent_dimension(locus: &Locus, j: &DMatrix<f64>, tol: f64) -> Result<usize> {
    if !is_complex_structure(j, tol) {
        return Err(Error::NotInLocus);
    }
    let (g, psi) = match locus {
        Locus::All => (None, None),
        Locus::Orthogonal(g) => (Some(g), None),
        Locus::Cau(p) => (None, Some(p)),
        Locus::Intersection(g, p) => (Some(g), Some(p)),
    };
    if g.is_some_and(|g| !is_orthogonal_structure(g, j, tol)) || psi.is_some_and(|p| !is_cau_member(p, j, tol)) {
        return Err(Error::NotInLocus);
    }
    let (gr, pr) = (g.map(rows_of), psi.map(rows_of));
    let m = constraint_matrix(&rows_of(j), gr.as_ref(), pr.as_ref());
    let flat: Vec<f64> = m.iter().flatten().copied().collect();
    let mat = DMatrix::from_row_slice(m.len(), m[0].len(), &flat);
    Ok(mat.ncols() - linalg::numeric_rank(&mat, 1e-8))
}

/// Exact nullity over ℚ.
pub fn tangent_dimension_exact(locus: &ExactLocus, j: &RationalMatrix) -> Result<usize> {
    if !is_complex_structure_exact(j) {
        return Err(Error::NotInLocus);
    }
    let (g, psi) = match locus {
        ExactLocus::All => (None, None),
        ExactLocus::Orthogonal(g) => (Some(g), None),
        ExactLocus::Cau(p) => (None, Some(p)),
        ExactLocus::Intersection(g, p) => (Some(g), Some(p)),
    };
    if let Some(g) = g {
        if j.transpose().mul(g)?.mul(j)? != *g {
            return Err(Error::NotInLocus);
        }
    }
    if let Some(p) = psi {
        let m = p.mul(j)?;
        if !m.is_symmetric() || !crate::quadspace::is_positive_definite_exact(&m) {
            return Err(Error::NotInLocus);
        }
    }
    let (gr, pr) = (g.map(rows_of_exact), psi.map(rows_of_exact));
    let m = constraint_matrix(&rows_of_exact(j), gr.as_ref(), pr.as_ref());
    let ncols = m[0].len();
    Ok(ncols - RationalMatrix::from_rows(m)?.rank())
}

/// Dimension of `T(orthogonal) ∩ T(cau)` at `J = two_out_of_three(g, ψ)`.
pub fn transversality_defect(g: &EuclideanMetric, psi: &SymplecticForm) -> Result<usize> {
    let j = two_out_of_three(g, psi)?;
    tangent_dimension(&Locus::Intersection(g.g.clone(), psi.psi.clone()), &j.j, 1e-10)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct DimensionRow {
    pub n: usize,
    pub all: usize,
    pub orthogonal: usize,
    pub cau: usize,
}

/// Exact tangent dimensions at `(Id, Ψ_std, J₀)`.
pub fn standard_dimensions(n: usize) -> Result<DimensionRow> {
    let j = RationalMatrix::from_f64(&standard_complex_structure(n))?;
    let g = RationalMatrix::identity(2 * n);
    let p = RationalMatrix::from_f64(&standard_symplectic(n))?;
    Ok(DimensionRow {
        n,
        all: tangent_dimension_exact(&ExactLocus::All, &j)?,
        orthogonal: tangent_dimension_exact(&ExactLocus::Orthogonal(g), &j)?,
        cau: tangent_dimension_exact(&ExactLocus::Cau(p), &j)?,
    })
}

/// A Darboux basis `(a₁…aₙ, b₁…bₙ)` with `ψ(aᵢ, bⱼ) = δᵢⱼ`, by symplectic
/// Gram–Schmidt on the standard basis. Columns in that order.
pub fn darboux_basis(psi: &SymplecticForm) -> Result<DMatrix<f64>> {
    let d = psi.psi.nrows();
    let n = d / 2;
    let form = |x: &DVector<f64>, y: &DVector<f64>| (x.transpose() * &psi.psi * y)[(0, 0)];
    let mut pool: Vec<DVector<f64>> = (0..d).map(|i| DVector::from_fn(d, |r, _| if r == i { 1.0 } else { 0.0 })).collect();
    let mut a_vecs = Vec::with_capacity(n);
    let mut b_vecs = Vec::with_capacity(n);
    let scale = scale_of(&psi.psi);
    for _ in 0..n {
        let ia = pool.iter().position(|x| x.norm() > 1e-12).ok_or(Error::BadSymplectic)?;
        let a = pool.remove(ia);
        let (ib, val) = pool
            .iter()
            .enumerate()
            .map(|(i, w)| (i, form(&a, w)))
            .fold((usize::MAX, 0.0f64), |best, cur| if cur.1.abs() > best.1.abs() { cur } else { best });
        if ib == usize::MAX || val.abs() <= 1e-12 * scale {
            return Err(Error::BadSymplectic);
        }
        let b = pool.remove(ib) / val;
        for x in pool.iter_mut() {
            let (xb, xa) = (form(x, &b), form(x, &a));
            *x = &*x - &a * xb + &b * xa;
        }
        a_vecs.push(a);
        b_vecs.push(b);
    }
    a_vecs.extend(b_vecs);
    Ok(DMatrix::from_columns(&a_vecs))
}

/// Siegel coordinate: in a Darboux basis, the `+i`-eigenspace of `J` is spanned by
/// `aₖ − iJaₖ` with coordinate blocks `(E_a; E_b)`, and `Z = E_a E_b⁻¹`.
pub fn siegel_point(psi: &SymplecticForm, j: &DMatrix<f64>, tol: f64) -> Result<DMatrix<Complex<f64>>> {
    if !is_complex_structure(j, tol) || !is_cau_member(&psi.psi, j, tol) {
        return Err(Error::NotInLocus);
    }
    let n = psi.n();
    let p = darboux_basis(psi)?;
    let p_inv = p.clone().try_inverse().ok_or(Error::BadSymplectic)?;
    let a = p.columns(0, n).into_owned();
    let ja = j * &a;
    let eigen = DMatrix::from_fn(2 * n, n, |r, c| Complex::new(a[(r, c)], -ja[(r, c)]));
    let coords = p_inv.map(|x| Complex::new(x, 0.0)) * eigen;
    let ea = coords.rows(0, n).into_owned();
    let eb = coords.rows(n, n).into_owned();
    let eb_inv = eb.try_inverse().ok_or(Error::NotInLocus)?;
    Ok(ea * eb_inv)
}

/// `Zᵀ = Z` to `tol` and `Im Z ≻ 0`.
pub fn is_siegel(z: &DMatrix<Complex<f64>>, tol: f64) -> bool {
    let sym = (z - z.transpose()).iter().fold(0.0f64, |a, x| a.max(x.norm()));
    let im = z.map(|x| x.im);
    sym <= tol * z.iter().fold(1.0f64, |a, x| a.max(x.norm())) && is_positive_definite(&((&im + im.transpose()) * 0.5), 0.0)
}

/// Invertible matrix with positive determinant, entries `δ + U(−1, 1)`.
pub fn random_gl_plus(dim: usize, rng: &mut ChaCha8Rng) -> DMatrix<f64> {
    loop {
        let mut t = DMatrix::identity(dim, dim) * 1.5 + uniform_matrix(dim, dim, 1.0, rng);
        let det = t.determinant();
        if det.abs() < 1e-3 {
            continue;
        }
        if det < 0.0 {
            t.column_mut(0).neg_mut();
        }
        return t;
    }
}

/// `MᵀM + I` for uniform `M`.
pub fn random_metric(n: usize, rng: &mut ChaCha8Rng) -> EuclideanMetric {
    let m = uniform_matrix(2 * n, 2 * n, 1.0, rng);
    EuclideanMetric { g: m.transpose() * &m + DMatrix::identity(2 * n, 2 * n) }
}

/// `TᵀΨ_std T` for `T ∈ GL⁺`; the standard orientation component.
pub fn random_symplectic(n: usize, rng: &mut ChaCha8Rng) -> SymplecticForm {
    let t = random_gl_plus(2 * n, rng);
    SymplecticForm { psi: t.transpose() * standard_symplectic(n) * t }
}

/// `T J₀ T⁻¹` for `T ∈ GL⁺`.
pub fn random_complex_structure(n: usize, rng: &mut ChaCha8Rng) -> LinearComplexStructure {
    let t = random_gl_plus(2 * n, rng);
    let j = &t * standard_complex_structure(n) * t.try_inverse().expect("invertible");
    LinearComplexStructure { n, orientation: orientation_of(&j), j }
}

/// `exp(Ψ⁻¹K)` for a seeded symmetric `K`; `SᵀΨS = Ψ`.
pub fn random_symplectomorphism(psi: &SymplecticForm, seed: u64, scale: f64) -> DMatrix<f64> {
    let d = psi.psi.nrows();
    let mut rng = seeded(seed);
    let bound = scale / (d as f64).sqrt();
    let mut k = DMatrix::zeros(d, d);
    for i in 0..d {
        for j in i..d {
            let v = if bound > 0.0 { rng.random_range(-bound..bound) } else { 0.0 };
            k[(i, j)] = v;
            k[(j, i)] = v;
        }
    }
    let inv = psi.psi.clone().try_inverse().expect("nondegenerate");
    linalg::expm(&(inv * k))
}

/// Residuals of `(J² + I, JᵀGJ − G, ΨJ − (ΨJ)ᵀ)` stacked.
fn locus_residual(g: &DMatrix<f64>, psi: &DMatrix<f64>, j: &DMatrix<f64>) -> DVector<f64> {
    let d = j.nrows();
    let a = j * j + DMatrix::identity(d, d);
    let b = j.transpose() * g * j - g;
    let pj = psi * j;
    let c = &pj - pj.transpose();
    // row-major, matching the constraint rows
    let (a, b, c) = (a.transpose(), b.transpose(), c.transpose());
    DVector::from_iterator(3 * d * d, a.iter().chain(b.iter()).chain(c.iter()).copied())
}

#[derive(Clone, Debug, Serialize)]
pub struct UniquenessProbe {
    pub candidates: usize,
    /// Candidates whose residual dropped below the acceptance level.
    pub converged: usize,
    pub max_distance: f64,
}

/// Perturbs `J` by random conjugations of size `spread` and runs Gauss–Newton on
/// the three constraint families. Every converged candidate should be `J` again.
pub fn uniqueness_probe(g: &EuclideanMetric, psi: &SymplecticForm, candidates: usize, spread: f64, seed: u64) -> Result<UniquenessProbe> {
    let j = two_out_of_three(g, psi)?;
    let d = j.j.nrows();
    let results: Vec<Option<f64>> = (0..candidates)
        .into_par_iter()
        .map(|i| {
            let mut rng = seeded(seed ^ (i as u64).wrapping_mul(0xa24b_aed4_963e_e407));
            let x = uniform_matrix(d, d, spread, &mut rng);
            let t = linalg::expm(&x);
            let mut cand = &t * &j.j * t.try_inverse()?;
            for _ in 0..50 {
                let r = locus_residual(&g.g, &psi.psi, &cand);
                if r.amax() < 1e-14 {
                    break;
                }
                let rows = constraint_matrix(&rows_of(&cand), Some(&rows_of(&g.g)), Some(&rows_of(&psi.psi)));
                let flat: Vec<f64> = rows.iter().flatten().copied().collect();
                let jac = DMatrix::from_row_slice(rows.len(), d * d, &flat);
                let step = jac.svd(true, true).solve(&r, 1e-12).ok()?;
                let step = DMatrix::from_row_slice(d, d, step.as_slice());
                cand -= step;
            }
            let ok = is_complex_structure(&cand, 1e-8)
                && is_orthogonal_structure(&g.g, &cand, 1e-8)
                && is_cau_member(&psi.psi, &cand, 1e-8);
            ok.then(|| linalg::max_abs(&(&cand - &j.j)))
        })
        .collect();
    let dists: Vec<f64> = results.into_iter().flatten().collect();
    Ok(UniquenessProbe {
        candidates,
        converged: dists.len(),
        max_distance: dists.iter().copied().fold(0.0, f64::max),
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct Reconstruction {
    pub n: usize,
    pub j: Vec<Vec<f64>>,
    pub orientation: Orientation,
    pub square_residual: f64,
    pub orthogonality_residual: f64,
    pub cau_asymmetry: f64,
    pub cau_min_eigenvalue: f64,
    pub dimensions: DimensionRow,
    pub transversality_defect: usize,
    pub siegel_real: Vec<Vec<f64>>,
    pub siegel_imag: Vec<Vec<f64>>,
    pub siegel_imag_min_eigenvalue: f64,
}

/// Reconstructs `J` from `(g, ψ)` and audits it.
pub fn reconstruct(g: &EuclideanMetric, psi: &SymplecticForm) -> Result<Reconstruction> {
    let j = two_out_of_three(g, psi)?;
    let d = 2 * j.n;
    let pj = &psi.psi * &j.j;
    let sym = (&pj + pj.transpose()) * 0.5;
    let z = siegel_point(psi, &j.j, 1e-10)?;
    let im = z.map(|x| x.im);
    let im_sym = (&im + im.transpose()) * 0.5;
    let rows = |m: &DMatrix<f64>| rows_of(m);
    let tol = 1e-10;
    let dimensions = DimensionRow {
        n: j.n,
        all: tangent_dimension(&Locus::All, &j.j, tol)?,
        orthogonal: tangent_dimension(&Locus::Orthogonal(g.g.clone()), &j.j, tol)?,
        cau: tangent_dimension(&Locus::Cau(psi.psi.clone()), &j.j, tol)?,
    };
    Ok(Reconstruction {
        n: j.n,
        j: rows(&j.j),
        orientation: j.orientation,
        square_residual: linalg::max_abs(&(&j.j * &j.j + DMatrix::identity(d, d))),
        orthogonality_residual: linalg::max_abs(&(j.j.transpose() * &g.g * &j.j - &g.g)),
        cau_asymmetry: linalg::asymmetry(&pj),
        cau_min_eigenvalue: sym.symmetric_eigenvalues().min(),
        dimensions,
        transversality_defect: tangent_dimension(&Locus::Intersection(g.g.clone(), psi.psi.clone()), &j.j, tol)?,
        siegel_real: rows(&z.map(|x| x.re)),
        siegel_imag: rows(&im),
        siegel_imag_min_eigenvalue: im_sym.symmetric_eigenvalues().min(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn standard_structures() {
        for n in 1..=4 {
            let j0 = standard_complex_structure(n);
            let psi = standard_symplectic(n);
            assert!(is_complex_structure(&j0, 1e-12));
            assert_eq!(&psi * &j0, DMatrix::identity(2 * n, 2 * n));
            assert!(is_orthogonal_structure(&DMatrix::identity(2 * n, 2 * n), &j0, 1e-12));
            assert!(is_cau_member(&psi, &j0, 1e-12));
            assert!(!is_cau_member(&psi, &-&j0, 1e-12));
            assert_eq!(orientation_of(&j0), Orientation::Standard);
            assert!(is_complex_structure_exact(&RationalMatrix::from_f64(&j0).unwrap()));
        }
        let sym = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0]);
        assert!(!is_complex_structure(&sym, 1e-10));
        // −J₀ on ℝ² reverses orientation
        assert_eq!(orientation_of(&-standard_complex_structure(1)), Orientation::Reversed);
    }

    #[test]
    fn conjugates_and_transport() {
        let mut rng = seeded(1);
        for n in 1..=3 {
            let t = random_gl_plus(2 * n, &mut rng);
            let j = &t * standard_complex_structure(n) * t.clone().try_inverse().unwrap();
            assert!(is_complex_structure(&j, 1e-10));
            assert_eq!(orientation_of(&j), Orientation::Standard);
            assert!(!is_orthogonal_structure(&DMatrix::identity(2 * n, 2 * n), &j, 1e-6));
            // J is orthogonal for the metric transported by T⁻¹
            let ti = t.try_inverse().unwrap();
            assert!(is_orthogonal_structure(&(ti.transpose() * &ti), &j, 1e-10));
        }
    }

    #[test]
    fn reconstruction_of_standard_and_scaled() {
        for n in 1..=4 {
            let j = two_out_of_three(&EuclideanMetric::identity(n), &SymplecticForm::standard(n)).unwrap();
            assert!(linalg::max_abs(&(&j.j - standard_complex_structure(n))) < 1e-14);
            let scaled = SymplecticForm { psi: standard_symplectic(n) * 3.7 };
            let k = two_out_of_three(&EuclideanMetric::identity(n), &scaled).unwrap();
            assert!(linalg::max_abs(&(&k.j - &j.j)) < 1e-13);
        }
    }

    #[test]
    fn random_reconstructions() {
        let mut rng = seeded(7);
        for n in 1..=4 {
            for _ in 0..10 {
                let g = random_metric(n, &mut rng);
                let psi = random_symplectic(n, &mut rng);
                let j = two_out_of_three(&g, &psi).unwrap();
                assert!(is_complex_structure(&j.j, 1e-10));
                assert!(is_orthogonal_structure(&g.g, &j.j, 1e-10));
                assert!(is_cau_member(&psi.psi, &j.j, 1e-10));
                assert_eq!(j.orientation, Orientation::Standard);
                assert_eq!(transversality_defect(&g, &psi).unwrap(), 0);
            }
        }
    }

    #[test]
    fn exact_dimension_counts() {
        for n in 1..=4 {
            let row = standard_dimensions(n).unwrap();
            assert_eq!((row.all, row.orthogonal, row.cau), (2 * n * n, n * n - n, n * n + n));
            assert_eq!(row.orthogonal + row.cau, row.all);
        }
    }

    #[test]
    fn float_dimensions_at_random_points() {
        let mut rng = seeded(11);
        for n in 1..=4 {
            let g = random_metric(n, &mut rng);
            let psi = random_symplectic(n, &mut rng);
            let r = reconstruct(&g, &psi).unwrap();
            assert_eq!(r.dimensions, DimensionRow { n, all: 2 * n * n, orthogonal: n * n - n, cau: n * n + n });
            assert_eq!(r.transversality_defect, 0);
            let other = random_complex_structure(n, &mut rng);
            assert_eq!(tangent_dimension(&Locus::All, &other.j, 1e-10).unwrap(), 2 * n * n);
        }
        let n = 2;
        let bad = standard_complex_structure(n) * 2.0;
        assert_eq!(tangent_dimension(&Locus::All, &bad, 1e-10).unwrap_err(), Error::NotInLocus);
        let j0 = standard_complex_structure(n);
        assert_eq!(tangent_dimension(&Locus::Cau(-standard_symplectic(n)), &j0, 1e-10).unwrap_err(), Error::NotInLocus);
    }

    #[test]
    fn degenerate_inputs() {
        assert_eq!(SymplecticForm::new(DMatrix::zeros(4, 4), 1e-10).unwrap_err(), Error::BadSymplectic);
        assert_eq!(SymplecticForm::new(DMatrix::identity(4, 4), 1e-10).unwrap_err(), Error::BadSymplectic);
        assert_eq!(EuclideanMetric::new(-DMatrix::identity(4, 4), 1e-10).unwrap_err(), Error::BadMetric);
        let degenerate = SymplecticForm { psi: DMatrix::zeros(4, 4) };
        assert!(two_out_of_three(&EuclideanMetric::identity(2), &degenerate).is_err());
    }

    #[test]
    fn siegel_coordinates() {
        for n in 1..=3 {
            let z = siegel_point(&SymplecticForm::standard(n), &standard_complex_structure(n), 1e-12).unwrap();
            let want = DMatrix::from_diagonal_element(n, n, Complex::new(0.0, 1.0));
            assert!((z - want).iter().all(|x| x.norm() < 1e-14));
        }
        let mut rng = seeded(4);
        for i in 0..30 {
            let n = 1 + i % 3;
            let g = random_metric(n, &mut rng);
            let psi = random_symplectic(n, &mut rng);
            let p = darboux_basis(&psi).unwrap();
            assert!(linalg::max_abs(&(p.transpose() * &psi.psi * &p - standard_symplectic(n))) < 1e-10);
            let j = two_out_of_three(&g, &psi).unwrap().j;
            assert!(is_siegel(&siegel_point(&psi, &j, 1e-10).unwrap(), 1e-9));
            let s = random_symplectomorphism(&psi, i as u64, 0.5);
            assert!(linalg::max_abs(&(s.transpose() * &psi.psi * &s - &psi.psi)) < 1e-10 * scale_of(&psi.psi));
            let moved = &s * &j * s.try_inverse().unwrap();
            assert!(is_siegel(&siegel_point(&psi, &moved, 1e-9).unwrap(), 1e-9));
        }
        assert_eq!(
            siegel_point(&SymplecticForm::standard(2), &-standard_complex_structure(2), 1e-12).unwrap_err(),
            Error::NotInLocus
        );
    }

    #[test]
    fn local_uniqueness() {
        let mut rng = seeded(9);
        for n in 1..=3 {
            let g = random_metric(n, &mut rng);
            let psi = random_symplectic(n, &mut rng);
            let probe = uniqueness_probe(&g, &psi, 20, 0.05, n as u64).unwrap();
            assert!(probe.converged > 0);
            assert!(probe.max_distance < 1e-6, "{probe:?}");
        }
    }
}
