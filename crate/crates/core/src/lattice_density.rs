//! Integral lattices, enumeration of primitive vectors in a coordinate box, and
//! the experiment counting where integral Cauchy divisors cut a holomorphic disc.
//!
//! The height of a lattice vector is its largest absolute coordinate. An
//! indefinite form has infinitely many vectors of any given norm, so the box is
//! the only finite sweep.

use std::collections::BTreeSet;
use std::time::Instant;

use nalgebra::{Complex, DMatrix, DVector};
use num_integer::Integer;
use num_traits::ToPrimitive;
use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::exact::RationalMatrix;
use crate::posgrass::plane_to_null;
use crate::quadspace::{signature_exact, QuadraticSpace, Signature};
use crate::sample::{random_positive_plane, seeded};

type C = Complex<f64>;

/// Integral symmetric nondegenerate Gram matrix.
#[derive(Clone, Debug)]
pub struct IntegralLattice {
    name: String,
    entries: Vec<i64>,
    dim: usize,
    gram: RationalMatrix,
    signature: Signature,
}

impl IntegralLattice {
    pub fn new(name: &str, rows: &[Vec<i64>]) -> Result<Self> {
        let gram = RationalMatrix::from_i64_rows(rows)?;
        let signature = signature_exact(&gram)?;
        if !signature.is_nondegenerate() {
            return Err(Error::Degenerate);
        }
        Ok(Self { name: name.into(), entries: rows.concat(), dim: rows.len(), gram, signature })
    }

    /// From a rational Gram matrix whose entries are all integers.
    pub fn from_rational(name: &str, gram: &RationalMatrix) -> Result<Self> {
        let mut rows = Vec::with_capacity(gram.nrows());
        for i in 0..gram.nrows() {
            let mut row = Vec::with_capacity(gram.ncols());
            for j in 0..gram.ncols() {
                let x = &gram[(i, j)];
                if !x.is_integer() {
                    return Err(Error::Parse(format!("entry ({i},{j}) = {x} is not an integer")));
                }
                row.push(x.to_integer().to_i64().ok_or_else(|| Error::Parse("entry out of range".into()))?);
            }
            rows.push(row);
        }
        Self::new(name, &rows)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn gram(&self) -> &RationalMatrix {
        &self.gram
    }

    pub fn entry(&self, i: usize, j: usize) -> i64 {
        self.entries[i * self.dim + j]
    }

    pub fn signature(&self) -> Signature {
        self.signature
    }

    pub fn space(&self) -> QuadraticSpace {
        QuadraticSpace::from_rational(&self.gram).expect("lattice form is nondegenerate")
    }

    pub fn norm(&self, v: &[i64]) -> i128 {
        let mut acc = 0i128;
        for i in 0..self.dim {
            if v[i] == 0 {
                continue;
            }
            let mut row = 0i128;
            for j in 0..self.dim {
                row += self.entry(i, j) as i128 * v[j] as i128;
            }
            acc += v[i] as i128 * row;
        }
        acc
    }

    pub fn determinant(&self) -> i64 {
        self.gram.determinant().expect("square").to_integer().to_i64().expect("small determinant")
    }
}

fn block_sum(blocks: &[Vec<Vec<i64>>]) -> Vec<Vec<i64>> {
    let n: usize = blocks.iter().map(Vec::len).sum();
    let mut out = vec![vec![0; n]; n];
    let mut offset = 0;
    for b in blocks {
        for (i, row) in b.iter().enumerate() {
            for (j, &x) in row.iter().enumerate() {
                out[offset + i][offset + j] = x;
            }
        }
        offset += b.len();
    }
    out
}

fn hyperbolic_plane() -> Vec<Vec<i64>> {
    vec![vec![0, 1], vec![1, 0]]
}

fn e8_minus() -> Vec<Vec<i64>> {
    // Cartan matrix of E8: chain 0-2-3-4-5-6-7 with node 1 attached to node 3
    let edges = [(0, 2), (2, 3), (3, 4), (4, 5), (5, 6), (6, 7), (1, 3)];
    let mut m = vec![vec![0; 8]; 8];
    for (i, row) in m.iter_mut().enumerate() {
        row[i] = -2;
    }
    for (a, b) in edges {
        m[a][b] = 1;
        m[b][a] = 1;
    }
    m
}

/// `U`, `E8minus`, `K3` (`U³ ⊕ E8(−1)²`), or `diag:p,m`.
pub fn standard_lattice(name: &str) -> Result<IntegralLattice> {
    let unknown = || Error::UnknownLattice(name.to_string());
    match name {
        "U" => IntegralLattice::new("U", &hyperbolic_plane()),
        "E8minus" | "E8(-1)" => IntegralLattice::new("E8minus", &e8_minus()),
        "K3" => {
            let u = hyperbolic_plane();
            let e = e8_minus();
            IntegralLattice::new("K3", &block_sum(&[u.clone(), u.clone(), u, e.clone(), e]))
        }
        _ => {
            let spec = name.strip_prefix("diag:").ok_or_else(unknown)?;
            let (p, m) = spec.split_once(',').ok_or_else(unknown)?;
            let p: usize = p.trim().parse().map_err(|_| unknown())?;
            let m: usize = m.trim().parse().map_err(|_| unknown())?;
            if p + m == 0 {
                return Err(unknown());
            }
            let rows: Vec<Vec<i64>> = (0..p + m)
                .map(|i| (0..p + m).map(|j| if i != j { 0 } else if i < p { 1 } else { -1 }).collect())
                .collect();
            IntegralLattice::new(name, &rows)
        }
    }
}

/// `gcd` of the coordinates is `1`.
pub fn primitive_test(v: &[i64]) -> Result<bool> {
    let g = v.iter().fold(0i64, |acc, &x| acc.gcd(&x));
    if g == 0 {
        return Err(Error::ZeroVector);
    }
    Ok(g == 1)
}

/// Which sign of `q(v,v)` to keep.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum VectorSign {
    /// `q(v,v) > 0`: integral Cauchy divisors.
    #[default]
    Positive,
    /// `q(v,v) < 0`: the classical Noether–Lefschetz loci.
    Negative,
}

#[derive(Clone, Debug)]
pub struct EnumerationOptions {
    pub height: i64,
    /// Coordinates allowed to be nonzero; all of them when `None`.
    pub support: Option<Vec<usize>>,
    pub sign: VectorSign,
    /// Largest box size `(2H + 1)^k` that will be swept.
    pub limit: u128,
}

impl EnumerationOptions {
    pub fn new(height: i64) -> Self {
        Self { height, support: None, sign: VectorSign::Positive, limit: 50_000_000 }
    }
}

/// Primitive vectors of height `≤ H` with the requested sign of `q(v,v)`, one per
/// line (first nonzero coordinate positive), ordered by height then lexicographically.
pub fn enumerate(lattice: &IntegralLattice, opts: &EnumerationOptions) -> Result<Vec<Vec<i64>>> {
    let support: Vec<usize> = match &opts.support {
        Some(s) => {
            if let Some(&bad) = s.iter().find(|&&i| i >= lattice.dim()) {
                return Err(Error::DimensionMismatch { expected: lattice.dim(), found: bad + 1 });
            }
            s.clone()
        }
        None => (0..lattice.dim()).collect(),
    };
    let h = opts.height.max(0);
    let side = (2 * h + 1) as u128;
    let total = side.checked_pow(support.len() as u32).unwrap_or(u128::MAX);
    if total > opts.limit {
        return Err(Error::EnumerationTooLarge(total));
    }
    let total = total as u64;
    let mut out: Vec<Vec<i64>> = (0..total)
        .into_par_iter()
        .filter_map(|idx| {
            let mut v = vec![0i64; lattice.dim()];
            let mut rest = idx;
            for &coord in support.iter().rev() {
                v[coord] = (rest % side as u64) as i64 - h;
                rest /= side as u64;
            }
            let first = v.iter().find(|&&x| x != 0)?;
            if *first < 0 || !primitive_test(&v).ok()? {
                return None;
            }
            let norm = lattice.norm(&v);
            let keep = match opts.sign {
                VectorSign::Positive => norm > 0,
                VectorSign::Negative => norm < 0,
            };
            keep.then_some(v)
        })
        .collect();
    out.sort_by(|a, b| height(a).cmp(&height(b)).then_with(|| a.cmp(b)));
    Ok(out)
}

/// Positive primitive vectors of height `≤ H` over all coordinates.
pub fn enumerate_positive(lattice: &IntegralLattice, height: i64) -> Result<Vec<Vec<i64>>> {
    enumerate(lattice, &EnumerationOptions::new(height))
}

pub fn height(v: &[i64]) -> i64 {
    v.iter().map(|x| x.abs()).max().unwrap_or(0)
}

/// A polynomial null lift `w(t) = Σ t^k w_k` of a holomorphic disc `|t| < 1`
/// into the period domain.
#[derive(Clone, Debug)]
pub struct HolomorphicDisc {
    space: QuadraticSpace,
    coeffs: Vec<DVector<C>>,
}

impl HolomorphicDisc {
    /// Checks `q(w,w) = 0` and `q(w,w̄) > 0` on a polar grid of `|t| ≤ 0.95`.
    pub fn new(space: &QuadraticSpace, coeffs: Vec<DVector<C>>) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(Error::Parse("disc needs at least one coefficient".into()));
        }
        for c in &coeffs {
            space.check_len(c)?;
        }
        let disc = Self { space: space.clone(), coeffs };
        for r in [0.0, 0.3, 0.6, 0.9, 0.95] {
            for k in 0..16 {
                let t = C::from_polar(r, k as f64 * std::f64::consts::TAU / 16.0);
                let w = disc.eval(t);
                let size = w.norm_squared() * space.scale();
                let null = space.inner_c(&w, &w).norm();
                let pos = space.hermitian(&w, &w).re;
                if null > 1e-9 * size || pos <= 1e-9 * size {
                    return Err(Error::BadDisc { t_re: t.re, t_im: t.im });
                }
            }
        }
        Ok(disc)
    }

    /// `w(t) = w₀ + t x − t² q(x,x)/4 · w̄₀`, with `w₀` the null vector of a seeded
    /// positive plane `W₀` (`q(w₀,w̄₀) = 2`) and `x` a complex vector in the negative
    /// part of `W₀^⊥` with `−q(x,x̄) = 0.9`. This is null for every `t` and
    /// `q(w,w̄) ≥ 2 − 0.9|t|² > 0` on the closed disc.
    pub fn seeded(space: &QuadraticSpace, seed: u64) -> Result<Self> {
        let mut rng = seeded(seed);
        let plane = random_positive_plane(space, &mut rng);
        let w0 = plane_to_null(&plane).vector().clone();
        let frame = plane.chart_frame();
        let neg: Vec<usize> = (0..frame.codim()).filter(|&k| frame.eps()[k] < 0.0).collect();
        if neg.is_empty() {
            return Err(Error::WrongSignature {
                expected_pos: 2,
                expected_neg: 1,
                found_pos: space.signature().positive,
                found_neg: space.signature().negative,
            });
        }
        let mut c: Vec<C> = neg.iter().map(|_| C::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))).collect();
        let norm: f64 = c.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        for z in &mut c {
            *z *= 0.9f64.sqrt() / norm;
        }
        let mut x = DVector::from_element(space.dim(), C::new(0.0, 0.0));
        for (ck, &k) in c.iter().zip(&neg) {
            x += frame.f().column(k).map(|v| C::new(v, 0.0)) * *ck;
        }
        let qxx = space.inner_c(&x, &x);
        let w2 = w0.map(|z| z.conj()) * (-qxx / 4.0);
        Self::new(space, vec![w0, x, w2])
    }

    pub fn space(&self) -> &QuadraticSpace {
        &self.space
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coefficients(&self) -> &[DVector<C>] {
        &self.coeffs
    }

    pub fn eval(&self, t: C) -> DVector<C> {
        let mut acc = DVector::from_element(self.space.dim(), C::new(0.0, 0.0));
        for c in self.coeffs.iter().rev() {
            acc = acc * t + c;
        }
        acc
    }

    /// Coefficients of `t ↦ q(w(t), v)`, lowest degree first.
    pub fn pairing(&self, v: &DVector<f64>) -> Vec<C> {
        let gv = self.space.gram() * v;
        self.coeffs
            .iter()
            .map(|c| c.iter().zip(gv.iter()).map(|(a, &b)| a * b).sum())
            .collect()
    }

    /// Text format: first line `degree`, then one row per ambient coordinate with
    /// `re_0 im_0 re_1 im_1 …` for the coefficients of `t⁰, t¹, …`.
    pub fn from_text(space: &QuadraticSpace, text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .map(|l| l.split('#').next().unwrap_or("").trim())
            .filter(|l| !l.is_empty());
        let degree: usize = lines
            .next()
            .ok_or_else(|| Error::Parse("missing degree".into()))?
            .parse()
            .map_err(|_| Error::Parse("degree is not an integer".into()))?;
        let mut coeffs = vec![DVector::from_element(space.dim(), C::new(0.0, 0.0)); degree + 1];
        for i in 0..space.dim() {
            let line = lines.next().ok_or_else(|| Error::Parse("too few disc rows".into()))?;
            let vals: Vec<f64> = line
                .split_whitespace()
                .map(|t| t.parse::<f64>().map_err(|_| Error::Parse(format!("bad number `{t}`"))))
                .collect::<Result<_>>()?;
            if vals.len() != 2 * (degree + 1) {
                return Err(Error::Parse(format!("disc row needs {} numbers", 2 * (degree + 1))));
            }
            for (k, c) in coeffs.iter_mut().enumerate() {
                c[i] = C::new(vals[2 * k], vals[2 * k + 1]);
            }
        }
        Self::new(space, coeffs)
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("{}\n", self.degree());
        for i in 0..self.space.dim() {
            let row: Vec<String> = self.coeffs.iter().flat_map(|c| [c[i].re.to_string(), c[i].im.to_string()]).collect();
            out.push_str(&row.join(" "));
            out.push('\n');
        }
        out
    }
}

fn horner(p: &[C], t: C) -> (C, C) {
    let mut val = C::new(0.0, 0.0);
    let mut der = C::new(0.0, 0.0);
    for c in p.iter().rev() {
        der = der * t + val;
        val = val * t + c;
    }
    (val, der)
}

fn durand_kerner(p: &[C]) -> Vec<C> {
    let d = p.len() - 1;
    let lead = p[d];
    let mut roots: Vec<C> = (0..d).map(|k| C::from_polar(1.0, 0.4 + k as f64 * std::f64::consts::TAU / d as f64) * 0.9).collect();
    for _ in 0..500 {
        let mut moved = 0.0f64;
        for i in 0..d {
            let mut den = lead;
            for j in 0..d {
                if i != j {
                    den *= roots[i] - roots[j];
                }
            }
            let step = horner(p, roots[i]).0 / den;
            roots[i] -= step;
            moved = moved.max(step.norm());
        }
        if moved < 1e-15 {
            break;
        }
    }
    roots
}

/// All complex roots of `Σ p_k t^k` (`p` trimmed so the leading coefficient is nonzero).
fn polynomial_roots(p: &[C]) -> Vec<C> {
    let d = p.len() - 1;
    let lead = p[d];
    let seeds: Vec<C> = match d {
        0 => Vec::new(),
        1 => vec![-p[0] / lead],
        2 => {
            let (a, b, c) = (lead, p[1], p[0]);
            let disc = (b * b - a * c * 4.0).sqrt();
            // the larger-modulus root avoids cancellation; the other follows from the product
            let big = if (b + disc).norm() >= (b - disc).norm() { -(b + disc) / (a * 2.0) } else { -(b - disc) / (a * 2.0) };
            let small = if big.norm() > 0.0 { c / (a * big) } else { C::new(0.0, 0.0) };
            vec![big, small]
        }
        _ => {
            let mut m = DMatrix::from_element(d, d, C::new(0.0, 0.0));
            for i in 1..d {
                m[(i, i - 1)] = C::new(1.0, 0.0);
            }
            for i in 0..d {
                m[(i, d - 1)] = -p[i] / lead;
            }
            match nalgebra::linalg::Schur::try_new(m, 1e-15, 10_000) {
                Some(s) => s.eigenvalues().map(|e| e.iter().copied().collect()).unwrap_or_else(|| durand_kerner(p)),
                None => durand_kerner(p),
            }
        }
    };
    seeds
        .into_iter()
        .map(|mut t| {
            for _ in 0..8 {
                let (v, dv) = horner(p, t);
                if dv.norm() == 0.0 || v.norm() == 0.0 {
                    break;
                }
                t -= v / dv;
            }
            t
        })
        .collect()
}

/// Roots in the open unit disc of `t ↦ q(w(t), v)`.
pub fn disc_hits(disc: &HolomorphicDisc, v: &DVector<f64>) -> Result<Vec<C>> {
    disc.space.check_len(v)?;
    let mut p = disc.pairing(v);
    let top = p.iter().map(|c| c.norm()).fold(0.0, f64::max);
    let floor = 1e-13 * top.max(f64::MIN_POSITIVE);
    while p.len() > 1 && p.last().unwrap().norm() <= floor {
        p.pop();
    }
    if top == 0.0 || (p.len() == 1 && p[0].norm() <= 1e-13 * v.norm() * disc.coeffs[0].norm()) {
        return Err(Error::DiscContainedInDivisor);
    }
    let mut roots: Vec<C> = polynomial_roots(&p).into_iter().filter(|t| t.norm() < 1.0).collect();
    roots.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    Ok(roots)
}

/// A lattice vector and its hits on the disc.
#[derive(Clone, Debug, Serialize)]
pub struct HitRecord {
    pub v: Vec<i64>,
    pub roots: Vec<(f64, f64)>,
    pub height: i64,
    /// Largest `|q(w(t), v)|` over the roots.
    pub residual: f64,
}

pub fn hit_record(disc: &HolomorphicDisc, v: &[i64]) -> Result<HitRecord> {
    let vf = DVector::from_iterator(v.len(), v.iter().map(|&x| x as f64));
    let roots = disc_hits(disc, &vf)?;
    let p = disc.pairing(&vf);
    let residual = roots.iter().map(|&t| horner(&p, t).0.norm()).fold(0.0, f64::max);
    Ok(HitRecord { v: v.to_vec(), roots: roots.iter().map(|t| (t.re, t.im)).collect(), height: height(v), residual })
}

#[derive(Clone, Debug)]
pub struct DensityOptions {
    pub support: Option<Vec<usize>>,
    pub sign: VectorSign,
    pub limit: u128,
    /// Probe grid is `grid × grid` equispaced points of `[−r, r]²` with `|t| ≤ r`.
    pub grid: usize,
    pub probe_radius: f64,
}

impl Default for DensityOptions {
    fn default() -> Self {
        Self { support: None, sign: VectorSign::Positive, limit: 50_000_000, grid: 32, probe_radius: 0.9 }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct DensityRow {
    #[serde(rename = "H")]
    pub height: i64,
    pub n_vectors: usize,
    pub n_hits: usize,
    pub covering_radius: f64,
    /// Largest root residual `|q(w(t), v)|` in this row.
    pub max_residual: f64,
    pub wall_time_ms: f64,
}

/// Covering radius reported when there are no hits: the diameter of the unit disc.
pub const EMPTY_RADIUS: f64 = 2.0;

fn probe_points(grid: usize, r: f64) -> Vec<C> {
    let mut out = Vec::new();
    for i in 0..grid {
        for j in 0..grid {
            let step = if grid > 1 { 2.0 * r / (grid - 1) as f64 } else { 0.0 };
            let t = C::new(-r + step * i as f64, -r + step * j as f64);
            if t.norm() <= r + 1e-12 {
                out.push(t);
            }
        }
    }
    out
}

/// Largest distance from a probe to its nearest hit, using a bucket grid on `[−1,1]²`.
pub fn covering_radius(hits: &[C], grid: usize, probe_radius: f64) -> f64 {
    if hits.is_empty() {
        return EMPTY_RADIUS;
    }
    const B: usize = 40;
    let cell = 2.0 / B as f64;
    let bucket = |x: f64| (((x + 1.0) / cell).floor() as isize).clamp(0, B as isize - 1);
    let mut buckets: Vec<Vec<C>> = vec![Vec::new(); B * B];
    for &h in hits {
        buckets[bucket(h.re) as usize * B + bucket(h.im) as usize].push(h);
    }
    let probes = probe_points(grid, probe_radius);
    probes
        .iter()
        .map(|&p| {
            let (bx, by) = (bucket(p.re), bucket(p.im));
            let mut best = f64::INFINITY;
            for ring in 0..B as isize {
                // every point outside the rings already searched is at least this far
                if best <= (ring as f64 - 1.0).max(0.0) * cell {
                    break;
                }
                for dx in -ring..=ring {
                    for dy in -ring..=ring {
                        if dx.abs() != ring && dy.abs() != ring {
                            continue;
                        }
                        let (x, y) = (bx + dx, by + dy);
                        if x < 0 || y < 0 || x >= B as isize || y >= B as isize {
                            continue;
                        }
                        for h in &buckets[x as usize * B + y as usize] {
                            best = best.min((h - p).norm());
                        }
                    }
                }
            }
            best
        })
        .fold(0.0, f64::max)
}

fn hit_key(t: C) -> (i64, i64) {
    ((t.re * 1e9).round() as i64, (t.im * 1e9).round() as i64)
}

/// For each height: number of enumerated vectors, number of distinct hit
/// parameters, and the covering radius of the hits on the probe grid.
pub fn density_report(disc: &HolomorphicDisc, lattice: &IntegralLattice, heights: &[i64], opts: &DensityOptions) -> Result<Vec<DensityRow>> {
    if heights.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Parse("height schedule must be increasing".into()));
    }
    if disc.space.dim() != lattice.dim() {
        return Err(Error::DimensionMismatch { expected: lattice.dim(), found: disc.space.dim() });
    }
    let mut rows = Vec::with_capacity(heights.len());
    for &h in heights {
        let start = Instant::now();
        let enum_opts = EnumerationOptions { height: h, support: opts.support.clone(), sign: opts.sign, limit: opts.limit };
        let vectors = enumerate(lattice, &enum_opts)?;
        let records: Vec<Result<HitRecord>> = vectors.par_iter().map(|v| hit_record(disc, v)).collect();
        let mut distinct = BTreeSet::new();
        let mut hits = Vec::new();
        let mut max_residual = 0.0f64;
        for r in records {
            let r = match r {
                Ok(r) => r,
                Err(Error::DiscContainedInDivisor) => continue,
                Err(e) => return Err(e),
            };
            max_residual = max_residual.max(r.residual);
            for &(re, im) in &r.roots {
                let t = C::new(re, im);
                if distinct.insert(hit_key(t)) {
                    hits.push(t);
                }
            }
        }
        let radius = covering_radius(&hits, opts.grid, opts.probe_radius);
        rows.push(DensityRow {
            height: h,
            n_vectors: vectors.len(),
            n_hits: distinct.len(),
            covering_radius: radius,
            max_residual,
            wall_time_ms: start.elapsed().as_secs_f64() * 1e3,
        });
    }
    Ok(rows)
}

/// `H,n_vectors,n_hits,covering_radius,max_residual` with a header row, and a
/// trailing `wall_time_ms` column when `include_time` is set.
pub fn density_csv(rows: &[DensityRow], include_time: bool) -> String {
    let mut out = String::from("H,n_vectors,n_hits,covering_radius,max_residual");
    out.push_str(if include_time { ",wall_time_ms\n" } else { "\n" });
    for r in rows {
        out.push_str(&format!("{},{},{},{},{:e}", r.height, r.n_vectors, r.n_hits, r.covering_radius, r.max_residual));
        if include_time {
            out.push_str(&format!(",{:.3}", r.wall_time_ms));
        }
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::perigeo::CauchyDivisor;
    use crate::posgrass::{null_to_plane, PositiveNullVector};

    #[test]
    fn standard_lattices() {
        assert_eq!(standard_lattice("K3").unwrap().signature(), Signature { positive: 3, negative: 19, zero: 0 });
        assert_eq!(standard_lattice("K3").unwrap().dim(), 22);
        assert_eq!(standard_lattice("U").unwrap().signature(), Signature { positive: 1, negative: 1, zero: 0 });
        let e8 = standard_lattice("E8minus").unwrap();
        assert_eq!(e8.determinant(), 1);
        assert_eq!(e8.signature(), Signature { positive: 0, negative: 8, zero: 0 });
        // oracle: the negated form has eight positive eigenvalues
        let eig = nalgebra::SymmetricEigen::new(-e8.gram().to_f64()).eigenvalues;
        assert!(eig.iter().all(|&l| l > 0.0));
        assert_eq!(standard_lattice("diag:2,2").unwrap().signature(), Signature { positive: 2, negative: 2, zero: 0 });
        assert!(matches!(standard_lattice("D4"), Err(Error::UnknownLattice(_))));
        assert!(matches!(standard_lattice("diag:x"), Err(Error::UnknownLattice(_))));
    }

    #[test]
    fn primitivity() {
        assert!(!primitive_test(&[2, 4, 6]).unwrap());
        assert!(primitive_test(&[2, 3]).unwrap());
        assert!(!primitive_test(&[-3, 0, 9]).unwrap());
        assert_eq!(primitive_test(&[0, 0]).unwrap_err(), Error::ZeroVector);
    }

    fn brute_force(lattice: &IntegralLattice, h: i64) -> Vec<Vec<i64>> {
        let d = lattice.dim();
        let mut out = Vec::new();
        let mut v = vec![-h; d];
        loop {
            let nonzero = v.iter().any(|&x| x != 0);
            if nonzero {
                let g = v.iter().fold(0i64, |a, &x| a.gcd(&x));
                let first = *v.iter().find(|&&x| x != 0).unwrap();
                let mut norm = 0i128;
                for i in 0..d {
                    for j in 0..d {
                        norm += lattice.entry(i, j) as i128 * v[i] as i128 * v[j] as i128;
                    }
                }
                if g == 1 && first > 0 && norm > 0 {
                    out.push(v.clone());
                }
            }
            let mut k = d;
            loop {
                if k == 0 {
                    out.sort();
                    return out;
                }
                k -= 1;
                if v[k] < h {
                    v[k] += 1;
                    break;
                }
                v[k] = -h;
            }
        }
    }

    #[test]
    fn enumeration_matches_brute_force() {
        let u = standard_lattice("U").unwrap();
        assert_eq!(enumerate_positive(&u, 1).unwrap(), vec![vec![1, 1]]);
        let l = standard_lattice("diag:2,1").unwrap();
        let h1 = enumerate_positive(&l, 1).unwrap();
        assert!(h1.contains(&vec![1, 1, -1]) && h1.contains(&vec![1, 0, 0]) && h1.contains(&vec![0, 1, 0]));
        for (name, h) in [("diag:2,1", 3), ("diag:2,2", 4), ("U", 10), ("diag:1,2", 6)] {
            let l = standard_lattice(name).unwrap();
            let mut got = enumerate_positive(&l, h).unwrap();
            got.sort();
            assert_eq!(got, brute_force(&l, h), "{name} H={h}");
        }
        let counts: Vec<usize> = (1..6).map(|h| enumerate_positive(&l, h).unwrap().len()).collect();
        assert!(counts.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn enumeration_limits_and_support() {
        let k3 = standard_lattice("K3").unwrap();
        assert!(matches!(enumerate_positive(&k3, 2), Err(Error::EnumerationTooLarge(_))));
        let opts = EnumerationOptions { support: Some((0..6).collect()), ..EnumerationOptions::new(1) };
        let v = enumerate(&k3, &opts).unwrap();
        assert!(!v.is_empty());
        assert!(v.iter().all(|x| k3.norm(x) > 0 && x[6..].iter().all(|&c| c == 0)));
        let neg = EnumerationOptions { sign: VectorSign::Negative, ..EnumerationOptions::new(1) };
        let l = standard_lattice("diag:2,1").unwrap();
        assert!(enumerate(&l, &neg).unwrap().iter().all(|x| l.norm(x) < 0));
    }

    fn hand_disc() -> HolomorphicDisc {
        // w(t) = (1 + t²) e₁ + i (1 − t²) e₂ + 2t e₃ in diag(1,1,−1):
        // q(w,w) = (1 + t²)² − (1 − t²)² − 4t² = 0, q(w,w̄) = 2(1 − |t|²)²
        let v = QuadraticSpace::diagonal(2, 1);
        let z = C::new(0.0, 0.0);
        let one = C::new(1.0, 0.0);
        let i = C::new(0.0, 1.0);
        let coeffs = vec![
            DVector::from_vec(vec![one, i, z]),
            DVector::from_vec(vec![z, z, one * 2.0]),
            DVector::from_vec(vec![one, -i, z]),
        ];
        HolomorphicDisc::new(&v, coeffs).unwrap()
    }

    #[test]
    fn hand_built_disc() {
        let d = hand_disc();
        let roots = disc_hits(&d, &DVector::from_vec(vec![0.0, 0.0, 1.0])).unwrap();
        assert_eq!(roots.len(), 1);
        assert!(roots[0].norm() < 1e-15);
        let text = d.to_text();
        let back = HolomorphicDisc::from_text(d.space(), &text).unwrap();
        assert_eq!(back.coefficients(), d.coefficients());
    }

    #[test]
    fn contained_disc() {
        let v = QuadraticSpace::diagonal(3, 1);
        let one = C::new(1.0, 0.0);
        let z = C::new(0.0, 0.0);
        let i = C::new(0.0, 1.0);
        // constant lift e₁ − i e₂ is orthogonal to e₃
        let d = HolomorphicDisc::new(&v, vec![DVector::from_vec(vec![one, -i, z, z])]).unwrap();
        assert_eq!(disc_hits(&d, &DVector::from_vec(vec![0.0, 0.0, 1.0, 0.0])).unwrap_err(), Error::DiscContainedInDivisor);
        let bad = HolomorphicDisc::new(&v, vec![DVector::from_vec(vec![one, z, z, z])]);
        assert!(matches!(bad, Err(Error::BadDisc { .. })));
    }

    #[test]
    fn random_cubic_lift_roots() {
        // the seeded quadratic lift times (1 + s t) with |s| < 1 stays null and
        // positive on the disc
        let v = QuadraticSpace::diagonal(3, 2);
        let mut rng = seeded(21);
        let base = HolomorphicDisc::seeded(&v, 21).unwrap();
        let s = C::new(0.3, -0.4);
        let mut cubic = vec![DVector::from_element(5, C::new(0.0, 0.0)); 4];
        for (i, c) in base.coefficients().iter().enumerate() {
            cubic[i] += c;
            cubic[i + 1] += c * s;
        }
        let disc = HolomorphicDisc::new(&v, cubic).unwrap();
        assert_eq!(disc.degree(), 3);
        for _ in 0..200 {
            let vec = DVector::from_fn(5, |_, _| rng.random_range(-5.0..5.0));
            let p = disc.pairing(&vec);
            let roots = disc_hits(&disc, &vec).unwrap();
            assert!(roots.len() <= 3);
            for t in roots {
                assert!(t.norm() < 1.0);
                assert!(horner(&p, t).0.norm() < 1e-10);
            }
        }
    }

    #[test]
    fn hits_lie_on_the_divisor() {
        let l = standard_lattice("diag:3,1").unwrap();
        let space = l.space();
        let disc = HolomorphicDisc::seeded(&space, 42).unwrap();
        let mut total = 0;
        for v in enumerate_positive(&l, 3).unwrap() {
            let rec = hit_record(&disc, &v).unwrap();
            total += rec.roots.len();
            assert!(rec.residual < 1e-10);
            let vf = DVector::from_iterator(4, v.iter().map(|&x| x as f64));
            let div = CauchyDivisor::new(&space, vf).unwrap();
            for &(re, im) in &rec.roots {
                let w = PositiveNullVector::new(&space, disc.eval(C::new(re, im))).unwrap();
                assert!(div.contains(&null_to_plane(&w).unwrap(), 1e-9));
            }
        }
        assert!(total > 0);
    }

    #[test]
    fn covering_radius_against_brute_force() {
        let mut rng = seeded(4);
        let hits: Vec<C> = (0..300).map(|_| C::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))).collect();
        let fast = covering_radius(&hits, 32, 0.9);
        let slow = probe_points(32, 0.9)
            .iter()
            .map(|p| hits.iter().map(|h| (h - p).norm()).fold(f64::INFINITY, f64::min))
            .fold(0.0, f64::max);
        assert_eq!(fast, slow);
        assert_eq!(covering_radius(&[], 32, 0.9), EMPTY_RADIUS);
    }

    #[test]
    fn positive_vectors_never_meet_a_two_positive_space() {
        // W ⊕ ℝv would be a positive 3-space inside signature (2,2)
        let l = standard_lattice("diag:2,2").unwrap();
        let disc = HolomorphicDisc::seeded(&l.space(), 42).unwrap();
        let rows = density_report(&disc, &l, &[1, 2, 4], &DensityOptions::default()).unwrap();
        assert!(rows.iter().all(|r| r.n_hits == 0 && r.covering_radius == EMPTY_RADIUS));
        assert!(rows.iter().all(|r| r.n_vectors > 0));
    }

    #[test]
    fn small_density_runs_are_monotone() {
        let l = standard_lattice("diag:2,2").unwrap();
        let disc = HolomorphicDisc::seeded(&l.space(), 42).unwrap();
        let opts = DensityOptions { sign: VectorSign::Negative, ..Default::default() };
        let rows = density_report(&disc, &l, &[1, 2, 4], &opts).unwrap();
        assert!(rows.windows(2).all(|w| w[0].n_hits < w[1].n_hits));
        assert!(rows.windows(2).all(|w| w[0].covering_radius >= w[1].covering_radius));
        assert!(density_csv(&rows, false).starts_with("H,n_vectors,n_hits,covering_radius,max_residual\n"));
        assert!(density_csv(&rows, true).starts_with("H,n_vectors,n_hits,covering_radius,max_residual,wall_time_ms\n"));

        let l = standard_lattice("diag:3,1").unwrap();
        let disc = HolomorphicDisc::seeded(&l.space(), 42).unwrap();
        let rows = density_report(&disc, &l, &[1, 2, 4], &DensityOptions::default()).unwrap();
        assert!(rows.windows(2).all(|w| w[0].n_hits < w[1].n_hits));
        assert!(rows.windows(2).all(|w| w[0].covering_radius >= w[1].covering_radius));
    }
}
