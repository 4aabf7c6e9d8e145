use nalgebra::{Complex, DMatrix, DVector, Vector3};

use super::CauchyDivisor;
use crate::error::{Error, Result};
use crate::posgrass::{null_to_plane, OrientedPositivePlane, PositiveNullVector};
use crate::quadspace::{is_positive_definite, QuadraticSpace};

type C = Complex<f64>;

/// A point of `ℂ ∪ {∞}`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum SpherePoint {
    Finite(C),
    Infinity,
}

impl SpherePoint {
    pub fn new(re: f64, im: f64) -> Self {
        Self::Finite(C::new(re, im))
    }

    /// `z ↦ −1/z̄`.
    pub fn antipode(self) -> Self {
        match self {
            Self::Infinity => Self::Finite(C::new(0.0, 0.0)),
            Self::Finite(z) if z.norm() == 0.0 => Self::Infinity,
            Self::Finite(z) => Self::Finite(-C::new(1.0, 0.0) / z.conj()),
        }
    }
}

impl From<C> for SpherePoint {
    fn from(z: C) -> Self {
        Self::Finite(z)
    }
}

/// The rational curve `Gr₊₊(U)` for a positive 3-space `U`, parametrized by
/// stereographic projection in a `q`-orthonormal frame `(f₁, f₂, f₃)` of `U`.
///
/// The null vector at `z` is `w(z) = (1 − z²) f₁ − i (1 + z²) f₂ + 2z f₃`, which is
/// polynomial in `z` and satisfies `q(w,w) = 0`, `q(w,w̄) = 2 (1 + |z|²)²`. The plane
/// at `z` is the one of `w(z)`; in frame coordinates its unit normal is
/// `s(z) = (−2x, 2y, 1 − |z|²) / (1 + |z|²)` and `(b₁, b₂, s)` is positively oriented.
/// So `0` gives `(f₁, f₂)`, `∞` gives `(f₁, −f₂)`, and antipodal parameters give
/// the same plane with opposite orientations.
#[derive(Clone, Debug)]
pub struct TwistorCurve {
    space: QuadraticSpace,
    frame: DMatrix<f64>,
}

impl TwistorCurve {
    /// `basis` is `dim × 3`; its Gram–Schmidt orthonormalization is the frame.
    pub fn new(space: &QuadraticSpace, basis: DMatrix<f64>) -> Result<Self> {
        if basis.nrows() != space.dim() || basis.ncols() != 3 {
            return Err(Error::DimensionMismatch { expected: space.dim(), found: basis.nrows() });
        }
        if !is_positive_definite(&space.restrict_form(&basis), space.tolerance()) {
            return Err(Error::NonPositiveSubspace);
        }
        let mut frame = basis.clone();
        for j in 0..3 {
            let mut c = basis.column(j).into_owned();
            for k in 0..j {
                let prev = frame.column(k).into_owned();
                c -= &prev * space.inner(&prev, &c);
            }
            frame.set_column(j, &(&c / space.norm2(&c).sqrt()));
        }
        Ok(Self { space: space.clone(), frame })
    }

    /// The curve through `plane` inside `span(plane, extra)`; the parameter `0` is `plane`.
    pub fn through(plane: &OrientedPositivePlane, extra: &DVector<f64>) -> Result<Self> {
        let b = plane.orthonormalized();
        Self::new(plane.space(), DMatrix::from_columns(&[b.b1(), b.b2(), extra.clone()]))
    }

    pub fn space(&self) -> &QuadraticSpace {
        &self.space
    }

    /// `dim × 3` orthonormal frame `(f₁, f₂, f₃)`.
    pub fn frame(&self) -> &DMatrix<f64> {
        &self.frame
    }

    fn f(&self, k: usize) -> DVector<C> {
        self.frame.column(k).map(|x| C::new(x, 0.0))
    }

    /// The null vector `w(z)`, unnormalized.
    pub fn null_vector(&self, z: SpherePoint) -> DVector<C> {
        let one = C::new(1.0, 0.0);
        let i = C::new(0.0, 1.0);
        match z {
            SpherePoint::Finite(z) => self.f(0) * (one - z * z) - self.f(1) * (i * (one + z * z)) + self.f(2) * (z * 2.0),
            SpherePoint::Infinity => self.f(0) + self.f(1) * i,
        }
    }

    /// `w'(z) = −2z f₁ − 2iz f₂ + 2 f₃`.
    pub fn null_derivative(&self, z: C) -> DVector<C> {
        let i = C::new(0.0, 1.0);
        self.f(0) * (z * -2.0) - self.f(1) * (i * z * 2.0) + self.f(2) * C::new(2.0, 0.0)
    }

    pub fn point(&self, z: SpherePoint) -> OrientedPositivePlane {
        let w = PositiveNullVector::new(&self.space, self.null_vector(z)).expect("twistor null vector is positive");
        null_to_plane(&w).expect("twistor plane is positive")
    }

    /// Unit normal of the plane at `z`, as frame coordinates.
    pub fn normal_coords(&self, z: SpherePoint) -> Vector3<f64> {
        match z {
            SpherePoint::Infinity => Vector3::new(0.0, 0.0, -1.0),
            SpherePoint::Finite(z) => {
                let r2 = z.norm_sqr();
                Vector3::new(-2.0 * z.re, 2.0 * z.im, 1.0 - r2) / (1.0 + r2)
            }
        }
    }

    pub fn normal(&self, z: SpherePoint) -> DVector<f64> {
        let s = self.normal_coords(z);
        &self.frame * DVector::from_column_slice(s.as_slice())
    }

    /// Parameter of the oriented plane with normal `s` (frame coordinates, unit length).
    pub fn parameter_of_normal(s: &Vector3<f64>) -> SpherePoint {
        // inverse of s(z): x = −s₁/(1 + s₃), y = s₂/(1 + s₃); near the south
        // pole use 1 + s₃ = (s₁² + s₂²)/(1 − s₃) to avoid cancellation
        if s[2] >= 0.0 {
            return SpherePoint::new(-s[0] / (1.0 + s[2]), s[1] / (1.0 + s[2]));
        }
        let rho = s[0] * s[0] + s[1] * s[1];
        if rho == 0.0 {
            return SpherePoint::Infinity;
        }
        let k = (1.0 - s[2]) / rho;
        SpherePoint::new(-s[0] * k, s[1] * k)
    }

    /// Largest `q`-residual of the plane's basis outside `U`, relative to the basis norms.
    pub fn containment_residual(&self, plane: &OrientedPositivePlane) -> f64 {
        (0..2)
            .map(|j| {
                let b = plane.basis().column(j).into_owned();
                let mut p = b.clone();
                for k in 0..3 {
                    let f = self.frame.column(k).into_owned();
                    p -= &f * self.space.inner(&f, &b);
                }
                p.norm() / b.norm()
            })
            .fold(0.0, f64::max)
    }
}

/// Result of meeting a twistor curve with a Cauchy divisor.
#[derive(Clone, Debug)]
pub enum Intersection {
    /// The two orientations of the single plane `U ∩ p^⊥`, `p = proj_U(v)`, as
    /// the parameters and planes of a conjugate pair of null lines.
    Hits {
        params: [SpherePoint; 2],
        planes: [OrientedPositivePlane; 2],
    },
    /// `v ⊥ U`: the whole curve lies in the divisor.
    ContainedIn,
}

impl Intersection {
    pub fn count_oriented(&self) -> Option<usize> {
        match self {
            Self::Hits { .. } => Some(2),
            Self::ContainedIn => None,
        }
    }

    /// Oriented count divided by the orientation involution.
    pub fn count_unoriented(&self) -> Option<usize> {
        match self {
            Self::Hits { planes, .. } => Some(if planes[0].same_plane(&planes[1], 1e-9) { 1 } else { 2 }),
            Self::ContainedIn => None,
        }
    }
}

/// Points of the curve lying on the divisor.
pub fn twistor_cauchy_intersection(curve: &TwistorCurve, divisor: &CauchyDivisor) -> Result<Intersection> {
    if curve.space.dim() != divisor.space().dim() {
        return Err(Error::DimensionMismatch { expected: curve.space.dim(), found: divisor.space().dim() });
    }
    let v = divisor.vector();
    let coords = Vector3::from_fn(|k, _| curve.space.inner(&curve.frame.column(k).into_owned(), v));
    let scale = (curve.space.norm2(v).abs()).sqrt().max(v.norm() * 1e-3);
    if coords.norm() <= 1e-10 * scale {
        return Ok(Intersection::ContainedIn);
    }
    let s = coords / coords.norm();
    let z0 = TwistorCurve::parameter_of_normal(&s);
    let z1 = TwistorCurve::parameter_of_normal(&-s);
    let planes = [curve.point(z0), curve.point(z1)];
    Ok(Intersection::Hits { params: [z0, z1], planes })
}
