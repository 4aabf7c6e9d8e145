//! Period-space geometry: period points, twistor curves, Cauchy divisors,
//! recovery of the quadratic form from a Fujiki relation, and a rank
//! estimator for families of positive planes.

mod bbf;
mod fujiki;
mod rank;
mod twistor;

use nalgebra::{Complex, DMatrix, DVector};
use rand::Rng;

use crate::error::{Error, Result};
use crate::posgrass::{OrientedPositivePlane, PositiveNullVector};
use crate::quadspace::{signature_of, QuadraticSpace, Signature};
use crate::sample::ChaCha8Rng;

pub use bbf::{bbf_explicit, CupFunctional, SyntheticCup};
pub use fujiki::{
    fujiki_polarize, fujiki_polarize_polynomial, FujikiOptions, FujikiResult, Normalization, Polynomial,
};
pub use rank::{period_image_rank, ChartPatch, ConstantFamily, PlaneFamily, RankReport};
pub use twistor::{twistor_cauchy_intersection, Intersection, SpherePoint, TwistorCurve};

/// `q(v,v) = 0` and `q(v,v̄) > 0`, both relative to `|v|²` and the Gram scale.
pub fn is_period_point(space: &QuadraticSpace, v: &DVector<Complex<f64>>, tol: f64) -> bool {
    if v.len() != space.dim() {
        return false;
    }
    let size = v.norm_squared() * space.scale();
    size > 0.0 && space.inner_c(v, v).norm() <= tol * size && space.hermitian(v, v).re > tol * size
}

/// `Gr₊₊(v^⊥)` for a positive vector `v`.
#[derive(Clone, Debug)]
pub struct CauchyDivisor {
    space: QuadraticSpace,
    v: DVector<f64>,
}

impl CauchyDivisor {
    pub fn new(space: &QuadraticSpace, v: DVector<f64>) -> Result<Self> {
        space.check_len(&v)?;
        let norm = space.norm2(&v);
        if norm <= space.tolerance() * space.scale() * v.norm_squared() {
            return Err(Error::NonPositiveVector { norm });
        }
        Ok(Self { space: space.clone(), v })
    }

    pub fn vector(&self) -> &DVector<f64> {
        &self.v
    }

    pub fn space(&self) -> &QuadraticSpace {
        &self.space
    }

    /// Largest of `|q(v, b)| / (|v| |b|)` over the basis of `plane`.
    pub fn residual(&self, plane: &OrientedPositivePlane) -> f64 {
        (0..2)
            .map(|j| {
                let b = plane.basis().column(j).into_owned();
                self.space.inner(&self.v, &b).abs() / (self.v.norm() * b.norm())
            })
            .fold(0.0, f64::max)
    }

    /// `q(v, b₁) = q(v, b₂) = 0` to `tol` (relative).
    pub fn contains(&self, plane: &OrientedPositivePlane, tol: f64) -> bool {
        self.residual(plane) <= tol * self.space.scale()
    }

    /// The same test on the null vector: `q(v, w) = 0` (then also `q(v, w̄) = 0`).
    pub fn contains_null(&self, w: &PositiveNullVector, tol: f64) -> bool {
        let vc = self.v.map(|x| Complex::new(x, 0.0));
        let r = self.space.inner_c(&vc, w.vector()).norm() / (self.v.norm() * w.vector().norm());
        r <= tol * self.space.scale()
    }
}

/// The Cauchy divisors through a plane `W`: positive vectors of `W^⊥`, up to scale.
#[derive(Clone, Debug)]
pub struct CauchyThrough {
    plane: OrientedPositivePlane,
    /// `dim × (dim − 2)` `q`-orthogonal basis of `W^⊥`, positive vectors first.
    basis: DMatrix<f64>,
    eps: DVector<f64>,
}

impl CauchyThrough {
    pub fn complement(&self) -> &DMatrix<f64> {
        &self.basis
    }

    pub fn complement_signature(&self) -> Signature {
        signature_of(&self.plane.space().restrict_form(&self.basis), 1e-9).expect("square form")
    }

    /// `v ∈ W^⊥` and `q(v,v) > 0`.
    pub fn contains(&self, v: &DVector<f64>, tol: f64) -> bool {
        let q = self.plane.space();
        let scale = q.scale() * v.norm_squared();
        let orth = (0..2).all(|j| {
            let b = self.plane.basis().column(j).into_owned();
            q.inner(v, &b).abs() <= tol * q.scale() * v.norm() * b.norm()
        });
        orth && q.norm2(v) > tol * scale
    }

    /// A random positive vector of `W^⊥`; `None` when `W^⊥` has no positive direction.
    pub fn sample(&self, rng: &mut ChaCha8Rng) -> Option<CauchyDivisor> {
        let pos = self.eps.iter().filter(|&&e| e > 0.0).count();
        if pos == 0 {
            return None;
        }
        let mut a = DVector::from_fn(pos, |_, _| rng.random_range(-1.0..1.0));
        if a.norm() < 1e-3 {
            a[0] = 1.0;
        }
        let neg = self.eps.len() - pos;
        let mut b = DVector::from_fn(neg, |_, _| rng.random_range(-1.0..1.0));
        if b.norm() > 0.0 {
            b *= rng.random_range(0.0..0.9) * a.norm() / b.norm();
        }
        let mut v = self.basis.columns(0, pos) * a;
        if neg > 0 {
            v += self.basis.columns(pos, neg) * b;
        }
        CauchyDivisor::new(self.plane.space(), v).ok()
    }
}

/// `W^⊥` with its positive cone.
pub fn cauchy_through(plane: &OrientedPositivePlane) -> CauchyThrough {
    let frame = plane.chart_frame();
    CauchyThrough { plane: plane.clone(), basis: frame.f().clone(), eps: frame.eps().clone() }
}
