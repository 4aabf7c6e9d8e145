//! Seeded samplers for planes, lines and vectors of prescribed sign.
//!
//! Every sampler draws from a caller-owned [`ChaCha8Rng`], so a sweep seeded
//! once is reproducible bit for bit.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
pub use rand_chacha::ChaCha8Rng;

use crate::posgrass::OrientedPositivePlane;
use crate::quadspace::QuadraticSpace;

pub fn seeded(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn uniform_matrix(rows: usize, cols: usize, bound: f64, rng: &mut ChaCha8Rng) -> DMatrix<f64> {
    DMatrix::from_fn(rows, cols, |_, _| rng.random_range(-bound..bound))
}

pub fn uniform_vector(len: usize, bound: f64, rng: &mut ChaCha8Rng) -> DVector<f64> {
    DVector::from_fn(len, |_, _| rng.random_range(-bound..bound))
}

fn orthonormal_columns(x: DMatrix<f64>) -> DMatrix<f64> {
    let mut out = x.clone();
    for j in 0..x.ncols() {
        let mut c = x.column(j).into_owned();
        for k in 0..j {
            let prev = out.column(k).into_owned();
            c -= &prev * prev.dot(&c);
        }
        out.set_column(j, &(&c / c.norm()));
    }
    out
}

/// Basis (columns) of a random `k`-dimensional subspace on which `q` is
/// positive definite. The restricted form is bounded away from degeneracy:
/// the negative part has operator norm at most `0.9` relative to the positive part.
pub fn random_positive_subspace(space: &QuadraticSpace, k: usize, rng: &mut ChaCha8Rng) -> DMatrix<f64> {
    signed_subspace(space, k, true, rng)
}

/// Basis of a random `k`-dimensional negative-definite subspace.
pub fn random_negative_subspace(space: &QuadraticSpace, k: usize, rng: &mut ChaCha8Rng) -> DMatrix<f64> {
    signed_subspace(space, k, false, rng)
}

fn signed_subspace(space: &QuadraticSpace, k: usize, positive: bool, rng: &mut ChaCha8Rng) -> DMatrix<f64> {
    let (f, eps) = space.orthonormal_basis();
    let p = eps.iter().filter(|&&e| e > 0.0).count();
    let m = eps.len() - p;
    let (main_cols, other_cols) = if positive { (0..p, p..p + m) } else { (p..p + m, 0..p) };
    assert!(main_cols.len() >= k, "not enough directions of the requested sign");
    let main = f.columns(main_cols.start, main_cols.len()).into_owned();
    let other = f.columns(other_cols.start, other_cols.len()).into_owned();
    let x = orthonormal_columns(uniform_matrix(main.ncols(), k, 1.0, rng));
    let mut basis = &main * x;
    if other.ncols() > 0 {
        let y = uniform_matrix(other.ncols(), k, 1.0, rng);
        let top = y.clone().svd(false, false).singular_values.max();
        if top > 0.0 {
            let r = rng.random_range(0.0..0.9);
            basis += &other * (y * (r / top));
        }
    }
    // random change of basis with bounded condition number
    loop {
        let t = uniform_matrix(k, k, 1.0, rng) + DMatrix::identity(k, k) * 1.5;
        let s = t.clone().svd(false, false).singular_values;
        if s.min() > 0.2 {
            return basis * t;
        }
    }
}

pub fn random_positive_plane(space: &QuadraticSpace, rng: &mut ChaCha8Rng) -> OrientedPositivePlane {
    let b = random_positive_subspace(space, 2, rng);
    let plane = OrientedPositivePlane::from_basis(space, b).expect("sampled plane is positive");
    if rng.random_bool(0.5) {
        plane.reversed()
    } else {
        plane
    }
}

pub fn random_negative_vector(space: &QuadraticSpace, rng: &mut ChaCha8Rng) -> DVector<f64> {
    random_negative_subspace(space, 1, rng).column(0).into_owned()
}

pub fn random_positive_vector(space: &QuadraticSpace, rng: &mut ChaCha8Rng) -> DVector<f64> {
    random_positive_subspace(space, 1, rng).column(0).into_owned()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadspace::is_positive_definite;

    #[test]
    fn sampled_subspaces_have_the_requested_sign() {
        let v = QuadraticSpace::diagonal(3, 4);
        let mut rng = seeded(3);
        for _ in 0..50 {
            let b = random_positive_subspace(&v, 3, &mut rng);
            assert!(is_positive_definite(&v.restrict_form(&b), 1e-9));
            let n = random_negative_subspace(&v, 2, &mut rng);
            assert!(is_positive_definite(&(-v.restrict_form(&n)), 1e-9));
        }
    }

    #[test]
    fn seeding_is_deterministic() {
        let v = QuadraticSpace::diagonal(3, 19);
        let a = random_positive_plane(&v, &mut seeded(11));
        let b = random_positive_plane(&v, &mut seeded(11));
        assert_eq!(a.basis(), b.basis());
    }
}
