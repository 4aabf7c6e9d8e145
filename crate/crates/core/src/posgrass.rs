//! The positive Grassmannian `Gr₊₊(V)` of oriented 2-planes on which `q` is
//! positive definite.
//!
//! A plane is stored as an ordered basis `(b₁, b₂)`; the order is the
//! orientation. Nothing here rescales or rotates a basis behind the caller's
//! back: [`OrientedPositivePlane::orthonormalized`] is the one explicit
//! canonicalization step, and it preserves orientation.
//!
//! # Null-vector convention
//!
//! An oriented positive plane corresponds to the complex line spanned by a
//! positive null vector `w ∈ V ⊗ ℂ` (`q(w,w) = 0`, `q(w,w̄) > 0`). The line is
//! chosen so that `(w + w̄, i(w − w̄))` is a positively oriented basis of the
//! plane. For a `q`-orthonormal oriented basis `(e₁, e₂)` this gives
//! `w = e₁ − i e₂`, since `w + w̄ = 2e₁` and `i(w − w̄) = 2e₂`. Reversing the
//! orientation conjugates the line.
//!
//! Representatives are normalized to `q(w, w̄) = 2`, with the phase fixed so
//! that the coordinate of largest modulus (lowest index on ties) is real and
//! positive.
//!
//! For signature `(2,1)` the whole Grassmannian is the open unit disc
//! `{(a,b) : a² + b² < 1}` through [`disc_embed`]; the orthogonal complement of a
//! plane is then a negative line, which is the Cayley–Klein picture of the
//! hyperbolic plane.

use std::sync::Arc;

use nalgebra::{Complex, DMatrix, DVector, Matrix2, Vector2};

use crate::error::{Error, Result};
use crate::linalg;
use crate::quadspace::{is_positive_definite, QuadraticSpace, Signature, Subspace};

type CVector = DVector<Complex<f64>>;

/// Oriented 2-plane with positive-definite restriction of `q`.
#[derive(Clone, Debug)]
pub struct OrientedPositivePlane {
    space: QuadraticSpace,
    basis: DMatrix<f64>,
}

impl OrientedPositivePlane {
    pub fn new(space: &QuadraticSpace, b1: DVector<f64>, b2: DVector<f64>) -> Result<Self> {
        Self::from_basis(space, DMatrix::from_columns(&[b1, b2]))
    }

    /// `basis` is `dim × 2`; its column order is the orientation.
    pub fn from_basis(space: &QuadraticSpace, basis: DMatrix<f64>) -> Result<Self> {
        if basis.nrows() != space.dim() || basis.ncols() != 2 {
            return Err(Error::DimensionMismatch { expected: space.dim(), found: basis.nrows() });
        }
        if !is_positive_definite(&space.restrict_form(&basis), space.tolerance()) {
            return Err(Error::NonPositivePlane);
        }
        Ok(Self { space: space.clone(), basis })
    }

    pub fn space(&self) -> &QuadraticSpace {
        &self.space
    }

    pub fn basis(&self) -> &DMatrix<f64> {
        &self.basis
    }

    pub fn b1(&self) -> DVector<f64> {
        self.basis.column(0).into_owned()
    }

    pub fn b2(&self) -> DVector<f64> {
        self.basis.column(1).into_owned()
    }

    /// Restriction of `q` to the plane in the stored basis.
    pub fn gram2(&self) -> DMatrix<f64> {
        self.space.restrict_form(&self.basis)
    }

    pub fn as_subspace(&self) -> Subspace {
        Subspace::new(self.space.clone(), self.basis.clone()).expect("positive plane has independent basis")
    }

    pub fn reversed(&self) -> Self {
        Self { space: self.space.clone(), basis: DMatrix::from_columns(&[self.b2(), self.b1()]) }
    }

    /// Gram–Schmidt in `q`; the result spans the same plane with the same orientation.
    pub fn orthonormalized(&self) -> Self {
        let (e1, e2) = self.orthonormal_pair();
        Self { space: self.space.clone(), basis: DMatrix::from_columns(&[e1, e2]) }
    }

    fn orthonormal_pair(&self) -> (DVector<f64>, DVector<f64>) {
        let b1 = self.b1();
        let b2 = self.b2();
        let e1 = &b1 / self.space.norm2(&b1).sqrt();
        let r = &b2 - &e1 * self.space.inner(&b2, &e1);
        let e2 = &r / self.space.norm2(&r).sqrt();
        (e1, e2)
    }

    /// Euclidean orthogonal projector onto the plane; basis independent.
    pub fn projector(&self) -> DMatrix<f64> {
        let b = &self.basis;
        let btb = b.transpose() * b;
        b * btb.try_inverse().expect("independent basis") * b.transpose()
    }

    /// Frobenius distance between the projectors of two planes.
    pub fn projector_distance(&self, other: &Self) -> f64 {
        (self.projector() - other.projector()).norm()
    }

    /// Sign of the determinant of the change of basis from `self` to `other`,
    /// meaningful when both span the same plane.
    pub fn relative_orientation(&self, other: &Self) -> f64 {
        let b = &self.basis;
        let c = (b.transpose() * b).try_inverse().expect("independent basis") * b.transpose() * &other.basis;
        c.determinant().signum()
    }

    pub fn same_plane(&self, other: &Self, tol: f64) -> bool {
        self.projector_distance(other) < tol
    }

    pub fn same_oriented_plane(&self, other: &Self, tol: f64) -> bool {
        self.same_plane(other, tol) && self.relative_orientation(other) > 0.0
    }

    /// Plane and orientation equality with the default `1e-9` projector tolerance.
    pub fn approx_eq(&self, other: &Self) -> bool {
        self.same_oriented_plane(other, 1e-9)
    }

    /// Orthonormal frame of the plane together with a `q`-orthonormal frame of `W^⊥`.
    pub fn chart_frame(&self) -> ChartFrame {
        ChartFrame::new(self)
    }

    /// Deterministic text form: a header with the ambient dimension and a frame
    /// label, then one row `b1_k b2_k` per ambient coordinate.
    pub fn to_text(&self, frame: &str) -> String {
        let mut out = format!("plane dim={} frame={}\n", self.space.dim(), frame);
        for k in 0..self.space.dim() {
            out.push_str(&format!("{} {}\n", self.basis[(k, 0)], self.basis[(k, 1)]));
        }
        out
    }

    /// Inverse of [`to_text`](Self::to_text); returns the plane and its frame label.
    pub fn from_text(space: &QuadraticSpace, text: &str) -> Result<(Self, String)> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let header = lines.next().ok_or_else(|| Error::Parse("empty plane text".into()))?;
        let mut dim = None;
        let mut frame = None;
        let mut words = header.split_whitespace();
        if words.next() != Some("plane") {
            return Err(Error::Parse("plane header must start with `plane`".into()));
        }
        for w in words {
            if let Some(d) = w.strip_prefix("dim=") {
                dim = Some(d.parse::<usize>().map_err(|_| Error::Parse(format!("bad dim `{d}`")))?);
            } else if let Some(f) = w.strip_prefix("frame=") {
                frame = Some(f.to_string());
            }
        }
        let dim = dim.ok_or_else(|| Error::Parse("missing dim".into()))?;
        if dim != space.dim() {
            return Err(Error::DimensionMismatch { expected: space.dim(), found: dim });
        }
        let mut basis = DMatrix::zeros(dim, 2);
        for k in 0..dim {
            let row = lines.next().ok_or_else(|| Error::Parse("too few plane rows".into()))?;
            let vals: Vec<f64> = row
                .split_whitespace()
                .map(|t| t.parse::<f64>().map_err(|_| Error::Parse(format!("bad coordinate `{t}`"))))
                .collect::<Result<_>>()?;
            if vals.len() != 2 {
                return Err(Error::Parse("plane rows need two coordinates".into()));
            }
            basis[(k, 0)] = vals[0];
            basis[(k, 1)] = vals[1];
        }
        Ok((Self::from_basis(space, basis)?, frame.unwrap_or_default()))
    }
}

/// A positive null vector `w ∈ V ⊗ ℂ`, understood up to nonzero complex scale.
#[derive(Clone, Debug)]
pub struct PositiveNullVector {
    space: QuadraticSpace,
    v: CVector,
}

impl PositiveNullVector {
    /// Checks `q(v,v) = 0` and `q(v,v̄) > 0` relative to `|v|²`.
    pub fn new(space: &QuadraticSpace, v: CVector) -> Result<Self> {
        space.check_len(&v)?;
        let size = v.norm_squared() * space.scale();
        let null = space.inner_c(&v, &v).norm();
        let pos = space.hermitian(&v, &v).re;
        let tol = space.tolerance().max(1e-10);
        if size == 0.0 || null > tol * size || pos <= tol * size {
            return Err(Error::NotPositiveNull { null_residual: null, positivity: pos });
        }
        Ok(Self { space: space.clone(), v })
    }

    pub(crate) fn new_unchecked(space: &QuadraticSpace, v: CVector) -> Self {
        Self { space: space.clone(), v }
    }

    pub fn from_parts(space: &QuadraticSpace, re: &DVector<f64>, im: &DVector<f64>) -> Result<Self> {
        let v = re.zip_map(im, Complex::new);
        Self::new(space, v)
    }

    pub fn vector(&self) -> &CVector {
        &self.v
    }

    pub fn space(&self) -> &QuadraticSpace {
        &self.space
    }

    pub fn re(&self) -> DVector<f64> {
        self.v.map(|c| c.re)
    }

    pub fn im(&self) -> DVector<f64> {
        self.v.map(|c| c.im)
    }

    pub fn conjugate(&self) -> Self {
        Self { space: self.space.clone(), v: self.v.map(|c| c.conj()) }
    }

    pub fn scaled(&self, lambda: Complex<f64>) -> Self {
        Self { space: self.space.clone(), v: &self.v * lambda }
    }

    /// `|q(v,v)|`.
    pub fn null_residual(&self) -> f64 {
        self.space.inner_c(&self.v, &self.v).norm()
    }

    /// `q(v, v̄)`, real for any complex vector.
    pub fn positivity(&self) -> f64 {
        self.space.hermitian(&self.v, &self.v).re
    }

    /// Representative with `q(w,w̄) = 2` and the largest-modulus coordinate real positive.
    pub fn normalized(&self) -> Self {
        let s = (2.0 / self.positivity()).sqrt();
        let mut v = &self.v * Complex::new(s, 0.0);
        let top = v.iter().fold(0.0f64, |m, c| m.max(c.norm()));
        if let Some(k) = v.iter().position(|c| c.norm() >= top * (1.0 - 1e-12)) {
            let phase = v[k].conj() / v[k].norm();
            v *= phase;
            v[k] = Complex::new(v[k].re, 0.0);
        }
        Self { space: self.space.clone(), v }
    }

    /// Whether two vectors span the same complex line (Cauchy–Schwarz equality).
    pub fn same_line(&self, other: &Self, tol: f64) -> bool {
        let a = &self.v;
        let b = &other.v;
        let inner = a.dotc(b).norm();
        let prod = a.norm() * b.norm();
        prod > 0.0 && (prod - inner) <= tol * prod
    }
}

/// The null line of an oriented positive plane.
pub fn plane_to_null(plane: &OrientedPositivePlane) -> PositiveNullVector {
    let (e1, e2) = plane.orthonormal_pair();
    let w = e1.zip_map(&e2, |a, b| Complex::new(a, -b));
    PositiveNullVector::new_unchecked(&plane.space, w).normalized()
}

/// The oriented plane spanned by `(v + v̄, i(v − v̄)) = (2 Re v, −2 Im v)`.
pub fn null_to_plane(v: &PositiveNullVector) -> Result<OrientedPositivePlane> {
    let checked = PositiveNullVector::new(&v.space, v.v.clone())?;
    let b1 = checked.re() * 2.0;
    let b2 = checked.im() * -2.0;
    OrientedPositivePlane::new(&v.space, b1, b2)
}

/// Frame `(u, v, w)` of a `(2,1)` space: pairwise orthogonal, `q(v,v) = q(w,w) = 1`, `q(u,u) = −1`.
#[derive(Clone, Debug)]
pub struct DiscFrame {
    space: QuadraticSpace,
    pub u: DVector<f64>,
    pub v: DVector<f64>,
    pub w: DVector<f64>,
}

impl DiscFrame {
    pub fn new(space: &QuadraticSpace, u: DVector<f64>, v: DVector<f64>, w: DVector<f64>) -> Result<Self> {
        let tol = 1e-9 * space.scale().max(1.0);
        let checks = [
            (space.norm2(&u) + 1.0, "q(u,u) must be -1"),
            (space.norm2(&v) - 1.0, "q(v,v) must be 1"),
            (space.norm2(&w) - 1.0, "q(w,w) must be 1"),
            (space.inner(&u, &v), "u, v not orthogonal"),
            (space.inner(&u, &w), "u, w not orthogonal"),
            (space.inner(&v, &w), "v, w not orthogonal"),
        ];
        for (residual, msg) in checks {
            if residual.abs() > tol {
                return Err(Error::BadFrame(msg.into()));
            }
        }
        Ok(Self { space: space.clone(), u, v, w })
    }

    /// `v = e₁, w = e₂, u = e₃` in `diag(1, 1, −1)`.
    pub fn standard() -> Self {
        let space = QuadraticSpace::diagonal(2, 1);
        let e = |i: usize| DVector::from_fn(3, |k, _| if k == i { 1.0 } else { 0.0 });
        Self::new(&space, e(2), e(0), e(1)).expect("standard frame")
    }

    pub fn space(&self) -> &QuadraticSpace {
        &self.space
    }
}

/// The plane `⟨v + a u, w + b u⟩`, positive exactly when `a² + b² < 1`.
pub fn disc_embed(a: f64, b: f64, frame: &DiscFrame) -> Result<OrientedPositivePlane> {
    let b1 = &frame.v + &frame.u * a;
    let b2 = &frame.w + &frame.u * b;
    OrientedPositivePlane::new(&frame.space, b1, b2)
}

/// Inverse of [`disc_embed`] on unoriented planes: projecting along `u` onto
/// `⟨v, w⟩` is an isomorphism on a positive plane, and the preimages of `v`
/// and `w` have the form `v + a u`, `w + b u`.
pub fn disc_coords(plane: &OrientedPositivePlane, frame: &DiscFrame) -> Result<(f64, f64)> {
    let sig = plane.space.signature();
    if sig != (Signature { positive: 2, negative: 1, zero: 0 }) {
        return Err(Error::WrongSignature {
            expected_pos: 2,
            expected_neg: 1,
            found_pos: sig.positive,
            found_neg: sig.negative,
        });
    }
    let q = &plane.space;
    let (b1, b2) = (plane.b1(), plane.b2());
    let m = Matrix2::new(q.inner(&b1, &frame.v), q.inner(&b2, &frame.v), q.inner(&b1, &frame.w), q.inner(&b2, &frame.w));
    let inv = m.try_inverse().ok_or(Error::NonPositivePlane)?;
    let lift = |target: Vector2<f64>| {
        let c = inv * target;
        &b1 * c[0] + &b2 * c[1]
    };
    let x = lift(Vector2::new(1.0, 0.0));
    let y = lift(Vector2::new(0.0, 1.0));
    Ok((-q.inner(&x, &frame.u), -q.inner(&y, &frame.u)))
}

/// Projection of a positive plane along a negative line into `l^⊥`; the
/// ordered basis is projected, which fixes the orientation of the image.
pub fn retract(plane: &OrientedPositivePlane, line: &DVector<f64>) -> Result<OrientedPositivePlane> {
    let q = &plane.space;
    q.check_len(line)?;
    if q.norm2(line) >= -q.tolerance() * q.scale() * line.norm_squared() {
        return Err(Error::NonNegativeLine);
    }
    let p1 = q.project_along(line, &plane.b1())?;
    let p2 = q.project_along(line, &plane.b2())?;
    OrientedPositivePlane::new(q, p1, p2)
}

/// Adapted frame at a positive plane `W`: a `q`-orthonormal oriented basis
/// `(e₁, e₂)` of `W` and a `q`-orthogonal basis `f` of `W^⊥` with
/// `q(f_k, f_k) = ε_k = ±1`, positive vectors first.
///
/// A tangent vector at `W` is a map `W → W^⊥`, stored as the
/// `(dim − 2) × 2` matrix `A` with `A e_j = Σ_k A_kj f_k`. The graph chart sends
/// `A` to the plane spanned by `(e₁ + A e₁, e₂ + A e₂)`.
#[derive(Clone, Debug)]
pub struct ChartFrame {
    plane: OrientedPositivePlane,
    e: DMatrix<f64>,
    f: DMatrix<f64>,
    eps: DVector<f64>,
}

impl ChartFrame {
    pub fn new(plane: &OrientedPositivePlane) -> Self {
        let plane = plane.orthonormalized();
        let q = &plane.space;
        let e = plane.basis.clone();
        let ge = q.gram() * &e;
        let c = linalg::euclidean_complement(&ge, 1e-12);
        let gc = q.restrict_form(&c);
        let eig = nalgebra::SymmetricEigen::new(gc);
        let mut idx: Vec<usize> = (0..c.ncols()).collect();
        idx.sort_by(|&a, &b| eig.eigenvalues[b].partial_cmp(&eig.eigenvalues[a]).unwrap());
        let mut f = DMatrix::zeros(q.dim(), c.ncols());
        let mut eps = DVector::zeros(c.ncols());
        for (col, &k) in idx.iter().enumerate() {
            let l = eig.eigenvalues[k];
            f.set_column(col, &(&c * eig.eigenvectors.column(k) / l.abs().sqrt()));
            eps[col] = l.signum();
        }
        Self { plane, e, f, eps }
    }

    pub fn plane(&self) -> &OrientedPositivePlane {
        &self.plane
    }

    pub fn space(&self) -> &QuadraticSpace {
        &self.plane.space
    }

    /// `dim × 2` orthonormal basis of `W`.
    pub fn e(&self) -> &DMatrix<f64> {
        &self.e
    }

    /// `dim × (dim − 2)` basis of `W^⊥`.
    pub fn f(&self) -> &DMatrix<f64> {
        &self.f
    }

    /// `q(f_k, f_k)`, each `±1`.
    pub fn eps(&self) -> &DVector<f64> {
        &self.eps
    }

    pub fn codim(&self) -> usize {
        self.f.ncols()
    }

    /// Real dimension of the tangent space, `2 (dim − 2)`.
    pub fn tangent_dim(&self) -> usize {
        2 * self.codim()
    }

    /// Ambient images `A e₁, A e₂` as a `dim × 2` matrix.
    pub fn ambient_images(&self, a: &DMatrix<f64>) -> DMatrix<f64> {
        &self.f * a
    }

    /// Coordinates in `f` of the `W^⊥`-components of the columns of `x`.
    pub fn perp_coordinates(&self, x: &DMatrix<f64>) -> DMatrix<f64> {
        let g = self.space().gram();
        let mut c = self.f.transpose() * g * x;
        for (k, mut row) in c.row_iter_mut().enumerate() {
            row *= self.eps[k];
        }
        c
    }

    fn check_tangent(&self, a: &DMatrix<f64>) -> Result<()> {
        if a.nrows() != self.codim() || a.ncols() != 2 {
            return Err(Error::DimensionMismatch { expected: self.codim(), found: a.nrows() });
        }
        Ok(())
    }

    /// The graph plane `(e₁ + A e₁, e₂ + A e₂)`.
    pub fn graph_plane(&self, a: &DMatrix<f64>) -> Result<OrientedPositivePlane> {
        self.check_tangent(a)?;
        OrientedPositivePlane::from_basis(self.space(), &self.e + &self.f * a)
    }

    /// Inverse chart: the `A` whose graph plane is `plane`, with matching orientation.
    pub fn chart_coords(&self, plane: &OrientedPositivePlane) -> Result<DMatrix<f64>> {
        let g = self.space().gram();
        let b = plane.basis();
        let p = self.e.transpose() * g * b;
        if p.determinant() <= 0.0 {
            return Err(Error::LeftChart);
        }
        let qm = self.perp_coordinates(b);
        Ok(qm * p.try_inverse().ok_or(Error::LeftChart)?)
    }
}

/// A point of the graph chart around a base plane.
#[derive(Clone, Debug)]
pub struct GraphChartPoint {
    pub frame: Arc<ChartFrame>,
    pub a: DMatrix<f64>,
}

impl GraphChartPoint {
    pub fn new(frame: Arc<ChartFrame>, a: DMatrix<f64>) -> Result<Self> {
        frame.graph_plane(&a)?;
        Ok(Self { frame, a })
    }

    pub fn plane(&self) -> OrientedPositivePlane {
        self.frame.graph_plane(&self.a).expect("validated at construction")
    }
}

/// Graph plane of `A` over `base`; `base` must be `q`-orthonormal, and `A` is
/// expressed in the chart frame of `base` (see [`ChartFrame`]).
pub fn graph_plane(base: &OrientedPositivePlane, a: &DMatrix<f64>) -> Result<OrientedPositivePlane> {
    let g2 = base.gram2();
    if (g2 - DMatrix::<f64>::identity(2, 2)).norm() > 1e-9 {
        return Err(Error::BadFrame("base plane basis is not q-orthonormal".into()));
    }
    ChartFrame::new(base).graph_plane(a)
}

/// The complex structure on `Hom(W, W^⊥)`: `A ↦ A ∘ R` with `R` the rotation by
/// +90° in the oriented plane (`R e₁ = e₂`, `R e₂ = −e₁`). Squares to `−1`.
pub fn rotate90(a: &DMatrix<f64>) -> DMatrix<f64> {
    a * linalg::quarter_turn()
}
