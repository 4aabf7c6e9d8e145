//! Small dense helpers shared by the geometry modules.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

pub(crate) fn max_abs(m: &DMatrix<f64>) -> f64 {
    m.iter().fold(0.0, |acc, x| acc.max(x.abs()))
}

pub(crate) fn asymmetry(m: &DMatrix<f64>) -> f64 {
    let mut worst = 0.0f64;
    for i in 0..m.nrows() {
        for j in (i + 1)..m.ncols() {
            worst = worst.max((m[(i, j)] - m[(j, i)]).abs());
        }
    }
    worst
}

/// Singular values of `m` in decreasing order.
pub(crate) fn singular_values(m: &DMatrix<f64>) -> Vec<f64> {
    if m.nrows() == 0 || m.ncols() == 0 {
        return Vec::new();
    }
    let mut s: Vec<f64> = m.clone().svd(false, false).singular_values.iter().copied().collect();
    s.sort_by(|a, b| b.partial_cmp(a).unwrap());
    s
}

/// Numerical rank with a relative singular-value threshold `rel * σ_max`.
pub(crate) fn numeric_rank(m: &DMatrix<f64>, rel: f64) -> usize {
    let s = singular_values(m);
    match s.first() {
        None => 0,
        Some(&top) if top == 0.0 => 0,
        Some(&top) => s.iter().filter(|&&x| x > rel * top).count(),
    }
}

/// Euclidean-orthonormal basis of the Euclidean orthogonal complement of the
/// column span of `cols`. Columns whose singular values fall below
/// `rel * σ_max` are treated as dependent.
pub(crate) fn euclidean_complement(cols: &DMatrix<f64>, rel: f64) -> DMatrix<f64> {
    let n = cols.nrows();
    let rank = numeric_rank(cols, rel);
    if rank == 0 {
        return DMatrix::identity(n, n);
    }
    // projector onto the complement, then its unit-eigenvalue eigenvectors
    let svd = cols.clone().svd(true, false);
    let u = svd.u.expect("requested U");
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&a, &b| svd.singular_values[b].partial_cmp(&svd.singular_values[a]).unwrap());
    let mut p = DMatrix::<f64>::identity(n, n);
    for &k in order.iter().take(rank) {
        let c = u.column(k);
        p -= &c * c.transpose();
    }
    let p = (&p + p.transpose()) * 0.5;
    let eig = SymmetricEigen::new(p);
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&a, &b| eig.eigenvalues[b].partial_cmp(&eig.eigenvalues[a]).unwrap());
    let keep = n - rank;
    let mut out = DMatrix::<f64>::zeros(n, keep);
    for (col, &k) in idx.iter().take(keep).enumerate() {
        let mut v: DVector<f64> = eig.eigenvectors.column(k).into_owned();
        // deterministic sign: largest-magnitude entry positive
        let (imax, _) = v.iter().enumerate().fold((0, 0.0f64), |(bi, bv), (i, x)| {
            if x.abs() > bv + 1e-12 {
                (i, x.abs())
            } else {
                (bi, bv)
            }
        });
        if v[imax] < 0.0 {
            v = -v;
        }
        out.set_column(col, &v);
    }
    out
}

/// Matrix exponential by scaling and squaring with a Taylor series summed
/// until the terms stop changing the result.
pub(crate) fn expm(m: &DMatrix<f64>) -> DMatrix<f64> {
    let n = m.nrows();
    let norm = m.row_iter().map(|r| r.iter().map(|x| x.abs()).sum::<f64>()).fold(0.0, f64::max);
    let mut squarings = 0u32;
    let mut scale = 1.0;
    while norm * scale > 0.5 {
        scale *= 0.5;
        squarings += 1;
    }
    let a = m * scale;
    let mut result = DMatrix::<f64>::identity(n, n);
    let mut term = DMatrix::<f64>::identity(n, n);
    for k in 1..64 {
        term = &term * &a / k as f64;
        let before = result.clone();
        result += &term;
        if result == before {
            break;
        }
    }
    for _ in 0..squarings {
        result = &result * &result;
    }
    result
}

/// The 2×2 rotation by +90°, as the matrix whose columns are the images of
/// the basis vectors: e₁ ↦ e₂, e₂ ↦ −e₁.
pub(crate) fn quarter_turn() -> DMatrix<f64> {
    DMatrix::from_row_slice(2, 2, &[0.0, -1.0, 1.0, 0.0])
}
