//! The invariant metric `g` and 2-form `ω` on `Gr₊₊(V)`.
//!
//! At a plane `W` a tangent vector is a map `Φ: W → W^⊥`, recorded by the images
//! `(Φ e₁, Φ e₂)` of a `q`-orthonormal oriented basis. Then
//!
//! * `g(Φ, Ψ) = q(Φe₁, Ψe₁) + q(Φe₂, Ψe₂)` (no extra constant),
//! * `ω(Φ, Ψ) = g(IΦ, Ψ) = q(Φe₂, Ψe₁) − q(Φe₁, Ψe₂)`, with `IΦ = Φ ∘ R` and `R`
//!   the rotation by +90° of the oriented plane.
//!
//! Both are unchanged by rotating the basis inside `W`. With this normalization
//! the restriction of `ω` to a twistor line is `4` times the Fubini–Study
//! density `dx ∧ dy / (1 + |z|²)²`.

use std::sync::Arc;

use nalgebra::{Complex, DMatrix, DVector};
use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg;
use crate::perigeo::{period_image_rank, PlaneFamily, SpherePoint, TwistorCurve};
use crate::posgrass::{rotate90, ChartFrame, OrientedPositivePlane};
use crate::quadspace::{signature_of, QuadraticSpace, Signature};
use crate::sample::{random_positive_plane, seeded, uniform_matrix, ChaCha8Rng};

/// A tangent vector `A: W → W^⊥` in the chart frame of its base plane.
#[derive(Clone, Debug)]
pub struct TangentVector {
    pub frame: Arc<ChartFrame>,
    pub a: DMatrix<f64>,
}

impl TangentVector {
    pub fn new(frame: Arc<ChartFrame>, a: DMatrix<f64>) -> Result<Self> {
        if a.nrows() != frame.codim() || a.ncols() != 2 {
            return Err(Error::DimensionMismatch { expected: frame.codim(), found: a.nrows() });
        }
        Ok(Self { frame, a })
    }

    pub fn rotated(&self) -> Self {
        Self { frame: self.frame.clone(), a: rotate90(&self.a) }
    }
}

fn same_base(a: &TangentVector, b: &TangentVector) -> Result<()> {
    if Arc::ptr_eq(&a.frame, &b.frame) || a.frame.plane().approx_eq(b.frame.plane()) && a.frame.f() == b.frame.f() {
        Ok(())
    } else {
        Err(Error::MismatchedBase)
    }
}

/// `g(A, B) = Σ ε_k A_kj B_kj` in the chart frame at the base plane.
pub fn metric_at(a: &TangentVector, b: &TangentVector) -> Result<f64> {
    same_base(a, b)?;
    Ok(chart_metric(a.frame.eps(), &a.a, &b.a))
}

/// `ω(A, B) = g(IA, B)`.
pub fn omega_at(a: &TangentVector, b: &TangentVector) -> Result<f64> {
    same_base(a, b)?;
    Ok(chart_metric(a.frame.eps(), &rotate90(&a.a), &b.a))
}

fn chart_metric(eps: &DVector<f64>, a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    let mut acc = 0.0;
    for k in 0..a.nrows() {
        acc += eps[k] * (a[(k, 0)] * b[(k, 0)] + a[(k, 1)] * b[(k, 1)]);
    }
    acc
}

/// Basis `E_kj` of `Hom(W, W^⊥)` in the order `(k, j)` with `j` fastest.
pub fn tangent_basis(codim: usize) -> Vec<DMatrix<f64>> {
    let mut out = Vec::with_capacity(2 * codim);
    for k in 0..codim {
        for j in 0..2 {
            let mut m = DMatrix::zeros(codim, 2);
            m[(k, j)] = 1.0;
            out.push(m);
        }
    }
    out
}

/// Matrix of `g` (or `ω` when `omega` is set) in the basis [`tangent_basis`].
pub fn form_matrix(frame: &Arc<ChartFrame>, omega: bool) -> DMatrix<f64> {
    let basis: Vec<TangentVector> =
        tangent_basis(frame.codim()).into_iter().map(|a| TangentVector { frame: frame.clone(), a }).collect();
    let n = basis.len();
    DMatrix::from_fn(n, n, |i, j| {
        let f = if omega { omega_at } else { metric_at };
        f(&basis[i], &basis[j]).expect("same base")
    })
}

pub fn metric_signature(frame: &Arc<ChartFrame>) -> Signature {
    signature_of(&form_matrix(frame, false), 1e-12).expect("square matrix")
}

/// Tangent vector at the plane spanned by `basis`, for a curve whose basis has
/// derivative `dbasis`: `Φ = proj_{W^⊥}(Ḃ)·M` with `B M` `q`-orthonormal and `det M > 0`.
/// Returned as the ambient images `(Φe₁, Φe₂)` (`dim × 2`).
pub fn tangent_from_basis_derivative(space: &QuadraticSpace, basis: &DMatrix<f64>, dbasis: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let gram = space.restrict_form(basis);
    let chol = gram.clone().cholesky().ok_or(Error::NonPositivePlane)?;
    // B L^{-T} is q-orthonormal and L^{-T} is upper triangular with positive diagonal
    let m = chol.l().transpose().try_inverse().ok_or(Error::NonPositivePlane)?;
    let g = space.gram();
    let ginv = gram.try_inverse().ok_or(Error::NonPositivePlane)?;
    let along = basis * ginv * (basis.transpose() * g * dbasis);
    Ok((dbasis - along) * m)
}

/// `g` on ambient tangent images.
pub fn ambient_metric(space: &QuadraticSpace, phi: &DMatrix<f64>, psi: &DMatrix<f64>) -> f64 {
    (0..2).map(|j| space.inner(&phi.column(j).into_owned(), &psi.column(j).into_owned())).sum()
}

/// `ω` on ambient tangent images.
pub fn ambient_omega(space: &QuadraticSpace, phi: &DMatrix<f64>, psi: &DMatrix<f64>) -> f64 {
    let c = |m: &DMatrix<f64>, j: usize| m.column(j).into_owned();
    space.inner(&c(phi, 1), &c(psi, 0)) - space.inner(&c(phi, 0), &c(psi, 1))
}

/// `ω(X, Y)` at the chart point `A₀`, for constant chart directions `X, Y`.
pub fn chart_omega(frame: &ChartFrame, a0: &DMatrix<f64>, x: &DMatrix<f64>, y: &DMatrix<f64>) -> Result<f64> {
    let plane = frame.graph_plane(a0).map_err(|_| Error::LeftChart)?;
    let space = frame.space();
    let px = tangent_from_basis_derivative(space, plane.basis(), &(frame.f() * x))?;
    let py = tangent_from_basis_derivative(space, plane.basis(), &(frame.f() * y))?;
    Ok(ambient_omega(space, &px, &py))
}

/// `g(X, Y)` at the chart point `A₀`.
pub fn chart_metric_at(frame: &ChartFrame, a0: &DMatrix<f64>, x: &DMatrix<f64>, y: &DMatrix<f64>) -> Result<f64> {
    let plane = frame.graph_plane(a0).map_err(|_| Error::LeftChart)?;
    let space = frame.space();
    let px = tangent_from_basis_derivative(space, plane.basis(), &(frame.f() * x))?;
    let py = tangent_from_basis_derivative(space, plane.basis(), &(frame.f() * y))?;
    Ok(ambient_metric(space, &px, &py))
}

/// A 2-form on the chart, evaluated at a point on a pair of constant directions.
pub trait ChartForm: Sync {
    fn eval(&self, a: &DMatrix<f64>, x: &DMatrix<f64>, y: &DMatrix<f64>) -> Result<f64>;
}

/// `ω` itself.
pub struct KahlerForm<'a>(pub &'a ChartFrame);

impl ChartForm for KahlerForm<'_> {
    fn eval(&self, a: &DMatrix<f64>, x: &DMatrix<f64>, y: &DMatrix<f64>) -> Result<f64> {
        chart_omega(self.0, a, x, y)
    }
}

/// `(1 + ⟨C, A⟩)·ω`, closed only when `C = 0`.
pub struct ConformalControl<'a> {
    pub frame: &'a ChartFrame,
    pub c: DMatrix<f64>,
}

impl ChartForm for ConformalControl<'_> {
    fn eval(&self, a: &DMatrix<f64>, x: &DMatrix<f64>, y: &DMatrix<f64>) -> Result<f64> {
        Ok((1.0 + self.c.dot(a)) * chart_omega(self.frame, a, x, y)?)
    }
}

/// `|dα(X,Y,Z)|` at `A₀` by central differences of the coefficients along the
/// constant chart fields: `X·α(Y,Z) + Y·α(Z,X) + Z·α(X,Y)`.
pub fn closedness_residual(form: &dyn ChartForm, a0: &DMatrix<f64>, dirs: [&DMatrix<f64>; 3], h: f64) -> Result<f64> {
    if !(h.is_finite() && h > 0.0) {
        return Err(Error::StepUnderflow(h));
    }
    let [x, y, z] = dirs;
    let deriv = |d: &DMatrix<f64>, u: &DMatrix<f64>, v: &DMatrix<f64>| -> Result<f64> {
        let plus = form.eval(&(a0 + d * h), u, v)?;
        let minus = form.eval(&(a0 - d * h), u, v)?;
        Ok((plus - minus) / (2.0 * h))
    };
    Ok((deriv(x, y, z)? + deriv(y, z, x)? + deriv(z, x, y)?).abs())
}

#[derive(Clone, Debug, Serialize)]
pub struct ClosednessReport {
    pub samples: usize,
    pub step: f64,
    pub residual_max: f64,
    pub residual_mean: f64,
    /// `log₂(Σ res(h) / Σ res(h/2))`, expected near 2.
    pub order_estimate: f64,
    /// Largest residual of the non-closed control form.
    pub control_min: f64,
}

/// Random base planes, chart points (entries up to 0.2) and unit direction
/// triples; residuals at `h` and `h/2` and the control form `(1 + ⟨C,A⟩)ω`.
pub fn closedness_sweep(space: &QuadraticSpace, samples: usize, h: f64, seed: u64) -> Result<ClosednessReport> {
    let rows: Vec<Result<(f64, f64, f64)>> = (0..samples)
        .into_par_iter()
        .map(|i| {
            let mut rng = seeded(seed.wrapping_mul(0x9e37_79b9).wrapping_add(i as u64));
            let plane = random_positive_plane(space, &mut rng);
            let frame = plane.chart_frame();
            let k = frame.codim();
            let a0 = uniform_matrix(k, 2, 0.2, &mut rng);
            let unit = |rng: &mut ChaCha8Rng| {
                let m = uniform_matrix(k, 2, 1.0, rng);
                &m / m.norm()
            };
            let (x, y, z) = (unit(&mut rng), unit(&mut rng), unit(&mut rng));
            let form = KahlerForm(&frame);
            let r1 = closedness_residual(&form, &a0, [&x, &y, &z], h)?;
            let r2 = closedness_residual(&form, &a0, [&x, &y, &z], h / 2.0)?;
            let control = ConformalControl { frame: &frame, c: uniform_matrix(k, 2, 1.0, &mut rng) * 5.0 };
            let rc = closedness_residual(&control, &a0, [&x, &y, &z], h)?;
            Ok((r1, r2, rc))
        })
        .collect();
    let rows: Vec<(f64, f64, f64)> = rows.into_iter().collect::<Result<_>>()?;
    let sum1: f64 = rows.iter().map(|r| r.0).sum();
    let sum2: f64 = rows.iter().map(|r| r.1).sum();
    Ok(ClosednessReport {
        samples,
        step: h,
        residual_max: rows.iter().map(|r| r.0).fold(0.0, f64::max),
        residual_mean: sum1 / samples.max(1) as f64,
        order_estimate: (sum1 / sum2).log2(),
        control_min: rows.iter().map(|r| r.2).fold(f64::INFINITY, f64::min),
    })
}

/// `ω(∂x, ∂y)` along the twistor parametrization at `z = x + iy`, times `(1 + |z|²)²`.
pub fn fubini_study_ratio(curve: &TwistorCurve, z: Complex<f64>) -> Result<f64> {
    if !(z.re.is_finite() && z.im.is_finite()) {
        return Err(Error::Parse("twistor parameter must be finite".into()));
    }
    let space = curve.space();
    let w = curve.null_vector(SpherePoint::Finite(z));
    let dw = curve.null_derivative(z);
    let plane_basis = |v: &DVector<Complex<f64>>| DMatrix::from_columns(&[v.map(|c| 2.0 * c.re), v.map(|c| -2.0 * c.im)]);
    let basis = plane_basis(&w);
    let dx = plane_basis(&dw);
    let dy = plane_basis(&(&dw * Complex::new(0.0, 1.0)));
    let px = tangent_from_basis_derivative(space, &basis, &dx)?;
    let py = tangent_from_basis_derivative(space, &basis, &dy)?;
    Ok(ambient_omega(space, &px, &py) * (1.0 + z.norm_sqr()).powi(2))
}

/// `exp(G⁻¹K)` for a seeded antisymmetric `K` with entries up to `scale/√dim`;
/// `QᵀGQ = G` because `G⁻¹K` is `q`-skew.
pub fn random_isometry(space: &QuadraticSpace, seed: u64, scale: f64) -> DMatrix<f64> {
    let n = space.dim();
    let mut rng = seeded(seed);
    let bound = scale / (n as f64).sqrt();
    let mut k = DMatrix::zeros(n, n);
    if bound > 0.0 {
        for i in 0..n {
            for j in (i + 1)..n {
                let v = rng.random_range(-bound..bound);
                k[(i, j)] = v;
                k[(j, i)] = -v;
            }
        }
    }
    let ginv = space.gram().clone().try_inverse().expect("nondegenerate");
    linalg::expm(&(ginv * k))
}

/// `‖QᵀGQ − G‖_max / ‖G‖_max`.
pub fn isometry_defect(space: &QuadraticSpace, q: &DMatrix<f64>) -> f64 {
    let g = space.gram();
    linalg::max_abs(&(q.transpose() * g * q - g)) / space.scale()
}

/// A base plane with a pair of chart tangents.
#[derive(Clone, Debug)]
pub struct TangentSample {
    pub frame: Arc<ChartFrame>,
    pub a: DMatrix<f64>,
    pub b: DMatrix<f64>,
}

pub fn random_tangent_samples(space: &QuadraticSpace, count: usize, seed: u64) -> Vec<TangentSample> {
    let mut rng = seeded(seed);
    (0..count)
        .map(|_| {
            let frame = Arc::new(random_positive_plane(space, &mut rng).chart_frame());
            let k = frame.codim();
            let a = uniform_matrix(k, 2, 1.0, &mut rng);
            let b = uniform_matrix(k, 2, 1.0, &mut rng);
            TangentSample { frame, a, b }
        })
        .collect()
}

#[derive(Clone, Debug, Serialize)]
pub struct InvarianceReport {
    pub metric_residual: f64,
    pub omega_residual: f64,
}

impl InvarianceReport {
    pub fn max(&self) -> f64 {
        self.metric_residual.max(self.omega_residual)
    }
}

/// Pushes each sample through `Q`: the tangent `A` at `W` becomes the velocity of
/// `t ↦ Q·graph_W(tA)`, read in the independent chart frame of `Q·W` by
/// differencing its chart coordinates. Reports the largest change of `g` and `ω`.
pub fn invariance_residual(space: &QuadraticSpace, q: &DMatrix<f64>, samples: &[TangentSample]) -> Result<InvarianceReport> {
    let defect = isometry_defect(space, q);
    if defect > 1e-10 {
        return Err(Error::NotIsometry(defect));
    }
    let per: Vec<Result<(f64, f64)>> = samples
        .par_iter()
        .map(|s| {
            let moved = OrientedPositivePlane::from_basis(space, q * s.frame.plane().basis())?;
            let target = moved.chart_frame();
            let push = |a: &DMatrix<f64>| -> Result<DMatrix<f64>> {
                let coords = |t: f64| -> Result<DMatrix<f64>> {
                    let p = OrientedPositivePlane::from_basis(space, q * s.frame.graph_plane(&(a * t))?.basis())?;
                    target.chart_coords(&p)
                };
                let diff = |h: f64| -> Result<DMatrix<f64>> { Ok((coords(h)? - coords(-h)?) / (2.0 * h)) };
                let (d1, d2) = (diff(1e-3)?, diff(5e-4)?);
                Ok(&d2 + (&d2 - &d1) / 3.0)
            };
            let (pa, pb) = (push(&s.a)?, push(&s.b)?);
            let eps0 = s.frame.eps();
            let eps1 = target.eps();
            let g0 = chart_metric(eps0, &s.a, &s.b);
            let g1 = chart_metric(eps1, &pa, &pb);
            let w0 = chart_metric(eps0, &rotate90(&s.a), &s.b);
            let w1 = chart_metric(eps1, &rotate90(&pa), &pb);
            Ok(((g1 - g0).abs(), (w1 - w0).abs()))
        })
        .collect();
    let mut report = InvarianceReport { metric_residual: 0.0, omega_residual: 0.0 };
    for r in per {
        let (g, w) = r?;
        report.metric_residual = report.metric_residual.max(g);
        report.omega_residual = report.omega_residual.max(w);
    }
    Ok(report)
}

#[derive(Clone, Debug, Serialize)]
pub struct Pullback {
    pub value: f64,
    /// `dφ` has full rank at the point.
    pub immersion: bool,
}

/// `ω(dφ x, dφ y)` at `φ(b)`, with the basis derivatives taken by central
/// differences (two-level Richardson) at step `h`.
pub fn pullback_form(family: &dyn PlaneFamily, b: &[f64], x: &[f64], y: &[f64], h: f64) -> Result<Pullback> {
    let k = family.param_dim();
    for v in [b, x, y] {
        if v.len() != k {
            return Err(Error::DimensionMismatch { expected: k, found: v.len() });
        }
    }
    let base = family.plane(b)?;
    let space = base.space().clone();
    let velocity = |dir: &[f64]| -> Result<DMatrix<f64>> {
        let at = |t: f64| -> Result<DMatrix<f64>> {
            let p: Vec<f64> = b.iter().zip(dir).map(|(bi, di)| bi + t * di).collect();
            Ok(family.plane(&p)?.basis().clone())
        };
        let diff = |s: f64| -> Result<DMatrix<f64>> { Ok((at(s)? - at(-s)?) / (2.0 * s)) };
        let (d1, d2) = (diff(h)?, diff(h / 2.0)?);
        Ok(&d2 + (&d2 - &d1) / 3.0)
    };
    let px = tangent_from_basis_derivative(&space, base.basis(), &velocity(x)?)?;
    let py = tangent_from_basis_derivative(&space, base.basis(), &velocity(y)?)?;
    let rank = period_image_rank(family, &[b.to_vec()], h, 1e-6)?.rank;
    Ok(Pullback { value: ambient_omega(&space, &px, &py), immersion: rank == k })
}
