//! Rank of the differential of a family of positive planes, read through the
//! null-vector picture.

use std::sync::Arc;

use nalgebra::{Complex, DMatrix, DVector};

use super::twistor::{SpherePoint, TwistorCurve};
use crate::error::{Error, Result};
use crate::linalg;
use crate::posgrass::{plane_to_null, rotate90, ChartFrame, OrientedPositivePlane};

/// A smooth map from a parameter domain in `ℝᵏ` to `Gr₊₊(V)`.
///
/// The returned ordered basis must itself depend smoothly on the parameters,
/// since derivatives are taken by differencing it.
pub trait PlaneFamily: Sync {
    fn param_dim(&self) -> usize;
    fn plane(&self, t: &[f64]) -> Result<OrientedPositivePlane>;
}

/// Parameters `(x, y)` of `z = x + iy`.
impl PlaneFamily for TwistorCurve {
    fn param_dim(&self) -> usize {
        2
    }

    fn plane(&self, t: &[f64]) -> Result<OrientedPositivePlane> {
        Ok(self.point(SpherePoint::new(t[0], t[1])))
    }
}

/// `t ↦ graph(Σ t_k D_k)` in the chart of a base plane.
#[derive(Clone, Debug)]
pub struct ChartPatch {
    frame: Arc<ChartFrame>,
    directions: Vec<DMatrix<f64>>,
}

impl ChartPatch {
    pub fn new(frame: Arc<ChartFrame>, directions: Vec<DMatrix<f64>>) -> Self {
        Self { frame, directions }
    }

    /// Complex directions: each `D` contributes the real pair `(D, I·D)`.
    pub fn complex(frame: Arc<ChartFrame>, directions: &[DMatrix<f64>]) -> Self {
        let dirs = directions.iter().flat_map(|d| [d.clone(), rotate90(d)]).collect();
        Self { frame, directions: dirs }
    }

    pub fn frame(&self) -> &Arc<ChartFrame> {
        &self.frame
    }
}

impl PlaneFamily for ChartPatch {
    fn param_dim(&self) -> usize {
        self.directions.len()
    }

    fn plane(&self, t: &[f64]) -> Result<OrientedPositivePlane> {
        let mut a = DMatrix::zeros(self.frame.codim(), 2);
        for (tk, d) in t.iter().zip(&self.directions) {
            a += d * *tk;
        }
        self.frame.graph_plane(&a)
    }
}

/// The same plane for every parameter.
#[derive(Clone, Debug)]
pub struct ConstantFamily {
    pub plane: OrientedPositivePlane,
    pub params: usize,
}

impl PlaneFamily for ConstantFamily {
    fn param_dim(&self) -> usize {
        self.params
    }

    fn plane(&self, _t: &[f64]) -> Result<OrientedPositivePlane> {
        Ok(self.plane.clone())
    }
}

#[derive(Clone, Debug)]
pub struct RankReport {
    /// Real rank at each base point.
    pub ranks: Vec<usize>,
    pub singular_values: Vec<Vec<f64>>,
    /// Maximum over base points: the estimate of the image dimension.
    pub rank: usize,
}

/// Smallest step accepted by the differencing routines.
pub(crate) const MIN_STEP: f64 = 1e-10;

pub(crate) fn check_step(h: f64) -> Result<()> {
    if !(h.is_finite() && h >= MIN_STEP) {
        return Err(Error::StepUnderflow(h));
    }
    Ok(())
}

/// Real Jacobian (`2·dim × k`) of `t ↦ 2w(t)/q(w(t), w̄₀)`, an affine chart of the
/// null-vector line around `w₀ = w(t₀)`.
pub(crate) fn null_jacobian(family: &dyn PlaneFamily, t0: &[f64], h: f64) -> Result<DMatrix<f64>> {
    check_step(h)?;
    let base = plane_to_null(&family.plane(t0)?);
    let space = base.space().clone();
    let anchor = base.vector().map(|z| z.conj());
    let chart = |t: &[f64]| -> Result<DVector<Complex<f64>>> {
        let w = plane_to_null(&family.plane(t)?);
        let l = space.inner_c(w.vector(), &anchor);
        Ok(w.vector() * (Complex::new(2.0, 0.0) / l))
    };
    let k = family.param_dim();
    let dim = space.dim();
    let mut jac = DMatrix::zeros(2 * dim, k);
    for j in 0..k {
        // two-level Richardson on the central difference
        let diff = |step: f64| -> Result<DVector<Complex<f64>>> {
            let mut tp = t0.to_vec();
            let mut tm = t0.to_vec();
            tp[j] += step;
            tm[j] -= step;
            Ok((chart(&tp)? - chart(&tm)?) / Complex::new(2.0 * step, 0.0))
        };
        let d1 = diff(h)?;
        let d2 = diff(h / 2.0)?;
        let d = &d2 + (&d2 - &d1) / Complex::new(3.0, 0.0);
        for r in 0..dim {
            jac[(r, j)] = d[r].re;
            jac[(dim + r, j)] = d[r].im;
        }
    }
    Ok(jac)
}

/// Numerical rank of `d(plane_to_null ∘ φ)` at each base point; singular values
/// above `rank_tol · max(1, σ_max)` count.
pub fn period_image_rank(family: &dyn PlaneFamily, base_points: &[Vec<f64>], h: f64, rank_tol: f64) -> Result<RankReport> {
    let mut ranks = Vec::with_capacity(base_points.len());
    let mut svs = Vec::with_capacity(base_points.len());
    for t in base_points {
        if t.len() != family.param_dim() {
            return Err(Error::DimensionMismatch { expected: family.param_dim(), found: t.len() });
        }
        let jac = null_jacobian(family, t, h)?;
        let s = linalg::singular_values(&jac);
        let top = s.first().copied().unwrap_or(0.0).max(1.0);
        ranks.push(s.iter().filter(|&&x| x > rank_tol * top).count());
        svs.push(s);
    }
    let rank = ranks.iter().copied().max().unwrap_or(0);
    Ok(RankReport { ranks, singular_values: svs, rank })
}
