//! Recovery of `q` from a functional `F = c·qⁿ` of degree `2n`.
//!
//! At any `α₀` with `F(α₀) ≠ 0`,
//! `Hess F(α₀) − ((n−1)/n) ∇F ∇Fᵀ / F(α₀) = 2cn·q(α₀)^{n−1}·G`,
//! so one Hessian and one gradient determine `q` up to scale. Polynomials with
//! rational coefficients are differentiated symbolically and everything is exact;
//! other callbacks use central differences with Richardson extrapolation.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};
use num_traits::{Signed, ToPrimitive, Zero};
use rand::Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::exact::{parse_rational, rat, Rational, RationalMatrix};
use crate::sample::seeded;

/// Polynomial in `nvars` variables with rational coefficients.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Polynomial {
    nvars: usize,
    terms: BTreeMap<Vec<u32>, Rational>,
}

impl Polynomial {
    pub fn zero(nvars: usize) -> Self {
        Self { nvars, terms: BTreeMap::new() }
    }

    pub fn from_terms(nvars: usize, terms: Vec<(Vec<u32>, Rational)>) -> Result<Self> {
        let mut p = Self::zero(nvars);
        for (exp, coeff) in terms {
            if exp.len() != nvars {
                return Err(Error::DimensionMismatch { expected: nvars, found: exp.len() });
            }
            p.add_term(exp, coeff);
        }
        Ok(p)
    }

    fn add_term(&mut self, exp: Vec<u32>, coeff: Rational) {
        if coeff.is_zero() {
            return;
        }
        let entry = self.terms.entry(exp).or_insert_with(Rational::zero);
        *entry += coeff;
        if entry.is_zero() {
            self.terms.retain(|_, c| !c.is_zero());
        }
    }

    /// `Σ g_ij x_i x_j`.
    pub fn quadratic_form(gram: &RationalMatrix) -> Self {
        let n = gram.nrows();
        let mut p = Self::zero(n);
        for i in 0..n {
            for j in 0..n {
                let mut exp = vec![0; n];
                exp[i] += 1;
                exp[j] += 1;
                p.add_term(exp, gram[(i, j)].clone());
            }
        }
        p
    }

    /// `c · q(x)ⁿ`.
    pub fn fujiki_power(gram: &RationalMatrix, n: u32, c: &Rational) -> Self {
        let q = Self::quadratic_form(gram);
        let mut p = Self::zero(gram.nrows());
        p.add_term(vec![0; gram.nrows()], c.clone());
        for _ in 0..n {
            p = p.mul(&q);
        }
        p
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Vec<u32>, &Rational)> {
        self.terms.iter()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut p = Self::zero(self.nvars);
        for (ea, ca) in &self.terms {
            for (eb, cb) in &other.terms {
                let exp = ea.iter().zip(eb).map(|(a, b)| a + b).collect();
                p.add_term(exp, ca * cb);
            }
        }
        p
    }

    /// Total degree shared by every term, if there is one.
    pub fn homogeneous_degree(&self) -> Option<u32> {
        let mut degrees = self.terms.keys().map(|e| e.iter().sum::<u32>());
        let first = degrees.next()?;
        degrees.all(|d| d == first).then_some(first)
    }

    pub fn derivative(&self, var: usize) -> Self {
        let mut p = Self::zero(self.nvars);
        for (exp, c) in &self.terms {
            if exp[var] > 0 {
                let mut e = exp.clone();
                e[var] -= 1;
                p.add_term(e, c * rat(exp[var] as i64));
            }
        }
        p
    }

    pub fn eval(&self, x: &[Rational]) -> Rational {
        let mut acc = Rational::zero();
        for (exp, c) in &self.terms {
            let mut t = c.clone();
            for (xi, &e) in x.iter().zip(exp) {
                for _ in 0..e {
                    t *= xi;
                }
            }
            acc += t;
        }
        acc
    }

    pub fn eval_f64(&self, x: &[f64]) -> f64 {
        self.terms
            .iter()
            .map(|(exp, c)| {
                let coeff = c.to_f64().unwrap_or(f64::NAN);
                exp.iter().zip(x).fold(coeff, |t, (&e, &xi)| t * xi.powi(e as i32))
            })
            .sum()
    }

    /// Text format: first line `nvars`, then one term per line, the exponents
    /// followed by the coefficient. `#` starts a comment.
    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .map(|l| l.split('#').next().unwrap_or("").trim())
            .filter(|l| !l.is_empty());
        let nvars: usize = lines
            .next()
            .ok_or_else(|| Error::Parse("missing variable count".into()))?
            .parse()
            .map_err(|_| Error::Parse("variable count is not an integer".into()))?;
        let mut p = Self::zero(nvars);
        for line in lines {
            let tokens: Vec<&str> = line.split_whitespace().collect();
            if tokens.len() != nvars + 1 {
                return Err(Error::Parse(format!("term `{line}` needs {nvars} exponents and a coefficient")));
            }
            let exp = tokens[..nvars]
                .iter()
                .map(|t| t.parse::<u32>().map_err(|_| Error::Parse(format!("bad exponent `{t}`"))))
                .collect::<Result<Vec<_>>>()?;
            p.add_term(exp, parse_rational(tokens[nvars])?);
        }
        Ok(p)
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("{}\n", self.nvars);
        for (exp, c) in &self.terms {
            let e: Vec<String> = exp.iter().map(|x| x.to_string()).collect();
            out.push_str(&format!("{} {}\n", e.join(" "), c));
        }
        out
    }
}

/// Which entry of the recovered `q` is set to `+1`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Normalization {
    /// First nonzero entry in row-major order.
    #[default]
    FirstEntry,
    /// Entry of largest absolute value (first on ties).
    LargestEntry,
}

#[derive(Clone, Debug)]
pub struct FujikiOptions {
    pub normalization: Normalization,
    /// Relative residual allowed on the probes (float path).
    pub tolerance: f64,
    pub probes: usize,
    pub seed: u64,
}

impl Default for FujikiOptions {
    fn default() -> Self {
        Self { normalization: Normalization::FirstEntry, tolerance: 1e-8, probes: 32, seed: 0 }
    }
}

#[derive(Clone, Debug)]
pub struct FujikiResult {
    pub n: usize,
    pub q: DMatrix<f64>,
    pub c: f64,
    pub q_exact: Option<RationalMatrix>,
    pub c_exact: Option<Rational>,
    /// Largest relative `|F(α) − c q(α)ⁿ|` on the probes.
    pub residual: f64,
    pub base_point: Vec<f64>,
}

fn candidate_points(dim: usize, seed: u64) -> Vec<Vec<i64>> {
    let mut out = Vec::new();
    for i in 0..dim {
        let mut v = vec![0; dim];
        v[i] = 1;
        out.push(v);
    }
    for i in 0..dim {
        for j in (i + 1)..dim {
            let mut v = vec![0; dim];
            v[i] = 1;
            v[j] = 1;
            out.push(v);
        }
    }
    let mut rng = seeded(seed);
    for _ in 0..64 {
        out.push((0..dim).map(|_| rng.random_range(-3..=3)).collect());
    }
    out
}

fn pick_index<T>(entries: &[T], normalization: Normalization, is_zero: impl Fn(&T) -> bool, abs_gt: impl Fn(&T, &T) -> bool) -> Option<usize> {
    match normalization {
        Normalization::FirstEntry => entries.iter().position(|x| !is_zero(x)),
        Normalization::LargestEntry => {
            let mut best: Option<usize> = None;
            for (k, x) in entries.iter().enumerate() {
                if is_zero(x) {
                    continue;
                }
                if best.is_none_or(|b| abs_gt(x, &entries[b])) {
                    best = Some(k);
                }
            }
            best
        }
    }
}

/// Exact recovery for a polynomial `F` with rational coefficients.
///
/// The identity `F = c·qⁿ` is then checked as an identity of polynomials.
pub fn fujiki_polarize_polynomial(f: &Polynomial, opts: &FujikiOptions) -> Result<FujikiResult> {
    let degree = f.homogeneous_degree().ok_or(Error::NotHomogeneous { degree: 0 })?;
    if degree == 0 || degree % 2 == 1 {
        return Err(Error::NotHomogeneous { degree: degree as usize });
    }
    let n = degree / 2;
    let dim = f.nvars();
    let alpha = candidate_points(dim, opts.seed)
        .into_iter()
        .map(|v| v.into_iter().map(rat).collect::<Vec<_>>())
        .find(|a| !f.eval(a).is_zero())
        .ok_or_else(|| Error::NotFujikiType("functional vanishes on every candidate point".into()))?;
    let fa = f.eval(&alpha);
    let grads: Vec<Polynomial> = (0..dim).map(|i| f.derivative(i)).collect();
    let g: Vec<Rational> = grads.iter().map(|p| p.eval(&alpha)).collect();
    let ratio = Rational::new((n as i64 - 1).into(), (n as i64).into());
    let mut q = RationalMatrix::zeros(dim, dim);
    for i in 0..dim {
        for j in i..dim {
            let h = grads[i].derivative(j).eval(&alpha);
            let v = h - &ratio * &g[i] * &g[j] / &fa;
            q[(i, j)] = v.clone();
            q[(j, i)] = v;
        }
    }
    let entries: Vec<Rational> = (0..dim * dim).map(|k| q[(k / dim, k % dim)].clone()).collect();
    let k = pick_index(&entries, opts.normalization, |x| x.is_zero(), |a, b| a.abs() > b.abs())
        .ok_or_else(|| Error::NotFujikiType("polarized form vanishes".into()))?;
    let pivot = entries[k].clone();
    for i in 0..dim {
        for j in 0..dim {
            q[(i, j)] = &q[(i, j)] / &pivot;
        }
    }
    if q.determinant()?.is_zero() {
        return Err(Error::NotFujikiType("polarized form is degenerate".into()));
    }
    let qa = crate::exact::bilinear(&q, &alpha, &alpha);
    if qa.is_zero() {
        return Err(Error::NotFujikiType("q vanishes at the base point".into()));
    }
    let c = fa / num_traits::pow(qa, n as usize);
    if Polynomial::fujiki_power(&q, n, &c) != *f {
        return Err(Error::NotFujikiType("F differs from c·qⁿ".into()));
    }
    let qf = q.to_f64();
    let cf = c.to_f64().unwrap_or(f64::NAN);
    let residual = probe_residual(&|x: &[f64]| f.eval_f64(x), &qf, cf, n as usize, opts);
    Ok(FujikiResult {
        n: n as usize,
        q: qf,
        c: cf,
        q_exact: Some(q),
        c_exact: Some(c),
        residual,
        base_point: alpha.iter().map(|x| x.to_f64().unwrap_or(f64::NAN)).collect(),
    })
}

fn probe_residual(f: &(dyn Fn(&[f64]) -> f64 + Sync), q: &DMatrix<f64>, c: f64, n: usize, opts: &FujikiOptions) -> f64 {
    let dim = q.nrows();
    let mut rng = seeded(opts.seed ^ 0x5eed);
    let absq = q.abs();
    let mut worst = 0.0f64;
    for _ in 0..opts.probes {
        let x = DVector::from_fn(dim, |_, _| rng.random_range(-1.0..1.0));
        let qx = (x.transpose() * q * &x)[(0, 0)];
        let ax = x.abs();
        let size = c.abs() * (ax.transpose() * &absq * &ax)[(0, 0)].powi(n as i32);
        let r = (f(x.as_slice()) - c * qx.powi(n as i32)).abs() / size.max(f64::MIN_POSITIVE);
        worst = worst.max(r);
    }
    worst
}

/// Richardson extrapolation of a central-difference quantity with an even error series.
fn richardson(mut estimate: impl FnMut(f64) -> f64, h0: f64, levels: usize) -> f64 {
    let mut table: Vec<Vec<f64>> = Vec::with_capacity(levels);
    for k in 0..levels {
        let mut row = vec![estimate(h0 / 2f64.powi(k as i32))];
        for j in 1..=k {
            let factor = 4f64.powi(j as i32) - 1.0;
            let v = row[j - 1] + (row[j - 1] - table[k - 1][j - 1]) / factor;
            row.push(v);
        }
        table.push(row);
    }
    table[levels - 1][levels - 1]
}

/// Floating-point recovery for a callback `F` of degree `2n` on `ℝ^dim`.
///
/// Hessian entries are probed in parallel, so `F` must be `Sync`.
pub fn fujiki_polarize<F>(f: F, dim: usize, n: usize, opts: &FujikiOptions) -> Result<FujikiResult>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    if n == 0 || dim == 0 {
        return Err(Error::NotHomogeneous { degree: 2 * n });
    }
    let deg = 2 * n as i32;
    let mut rng = seeded(opts.seed);
    for _ in 0..8 {
        let x: Vec<f64> = (0..dim).map(|_| rng.random_range(-1.0..1.0)).collect();
        let x2: Vec<f64> = x.iter().map(|v| 2.0 * v).collect();
        let (a, b) = (f(&x), f(&x2));
        let expect = 2f64.powi(deg) * a;
        if (b - expect).abs() > 1e-8 * (expect.abs() + b.abs()).max(f64::MIN_POSITIVE) {
            return Err(Error::NotHomogeneous { degree: 2 * n });
        }
    }
    let alpha: Vec<f64> = candidate_points(dim, opts.seed)
        .into_iter()
        .map(|v| v.into_iter().map(|x| x as f64).collect::<Vec<f64>>())
        .filter(|v| v.iter().any(|&x| x != 0.0))
        .max_by(|a, b| {
            let score = |v: &Vec<f64>| f(v).abs() / v.iter().map(|x| x * x).sum::<f64>().powi(n as i32);
            score(a).total_cmp(&score(b))
        })
        .expect("candidates are nonempty");
    let fa = f(&alpha);
    if fa == 0.0 {
        return Err(Error::NotFujikiType("functional vanishes on every candidate point".into()));
    }
    let h0 = 0.25;
    let shifted = |pairs: &[(usize, f64)]| {
        let mut x = alpha.clone();
        for &(i, d) in pairs {
            x[i] += d;
        }
        f(&x)
    };
    let g: Vec<f64> = (0..dim)
        .into_par_iter()
        .map(|i| richardson(|h| (shifted(&[(i, h)]) - shifted(&[(i, -h)])) / (2.0 * h), h0, 4))
        .collect();
    let pairs: Vec<(usize, usize)> = (0..dim).flat_map(|i| (i..dim).map(move |j| (i, j))).collect();
    let hess: Vec<f64> = pairs
        .par_iter()
        .map(|&(i, j)| {
            richardson(
                |h| {
                    (shifted(&[(i, h), (j, h)]) - shifted(&[(i, h), (j, -h)]) - shifted(&[(i, -h), (j, h)])
                        + shifted(&[(i, -h), (j, -h)]))
                        / (4.0 * h * h)
                },
                h0,
                4,
            )
        })
        .collect();
    let ratio = (n as f64 - 1.0) / n as f64;
    let mut q = DMatrix::zeros(dim, dim);
    for (&(i, j), h) in pairs.iter().zip(&hess) {
        let v = h - ratio * g[i] * g[j] / fa;
        q[(i, j)] = v;
        q[(j, i)] = v;
    }
    let top = q.amax();
    let entries: Vec<f64> = (0..dim * dim).map(|k| q[(k / dim, k % dim)]).collect();
    let k = pick_index(&entries, opts.normalization, |x| x.abs() <= 1e-9 * top, |a, b| a.abs() > b.abs())
        .ok_or_else(|| Error::NotFujikiType("polarized form vanishes".into()))?;
    q /= entries[k];
    let eig = nalgebra::SymmetricEigen::new(q.clone()).eigenvalues;
    if eig.amin() <= 1e-7 * eig.amax() {
        return Err(Error::NotFujikiType("polarized form is degenerate".into()));
    }
    let av = DVector::from_column_slice(&alpha);
    let qa = (av.transpose() * &q * &av)[(0, 0)];
    let c = fa / qa.powi(n as i32);
    let residual = probe_residual(&f, &q, c, n, opts);
    if !(residual <= opts.tolerance) {
        return Err(Error::NotFujikiType(format!("probe residual {residual:e} exceeds {:e}", opts.tolerance)));
    }
    Ok(FujikiResult { n, q, c, q_exact: None, c_exact: None, residual, base_point: alpha })
}

/// `q` scaled so that the entry picked by `normalization` is `+1`; used to compare
/// forms up to scale.
pub(crate) fn normalized(q: &DMatrix<f64>, normalization: Normalization) -> DMatrix<f64> {
    let top = q.amax();
    let entries: Vec<f64> = q.transpose().iter().copied().collect();
    match pick_index(&entries, normalization, |x| x.abs() <= 1e-12 * top, |a, b| a.abs() > b.abs()) {
        Some(k) => q / entries[k],
        None => q.clone(),
    }
}

impl FujikiResult {
    /// Relative Frobenius distance to `reference` after both are normalized the same way.
    pub fn relative_error(&self, reference: &DMatrix<f64>) -> f64 {
        let a = normalized(&self.q, Normalization::LargestEntry);
        let b = normalized(reference, Normalization::LargestEntry);
        (&a - &b).norm() / b.norm()
    }

    pub fn is_exact(&self) -> bool {
        self.q_exact.is_some()
    }
}
