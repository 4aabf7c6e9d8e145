//! Acceptance suite: fourteen criteria, one PASS/FAIL line each. Reference
//! values are recomputed here by independent oracles where one exists.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::Command;
use std::sync::Arc;
use std::time::{Duration, Instant};

use nalgebra::{Complex, DMatrix, DVector, SymmetricEigen};
use num_traits::Zero;
use rand::Rng;

use period_space::exact::{rat, RationalMatrix};
use period_space::lattice_density::{density_report, enumerate, standard_lattice, DensityOptions, EnumerationOptions, HolomorphicDisc, VectorSign};
use period_space::lorkahler::{closedness_sweep, fubini_study_ratio, invariance_residual, pullback_form, random_isometry, random_tangent_samples};
use period_space::perigeo::{
    bbf_explicit, fujiki_polarize, fujiki_polarize_polynomial, period_image_rank, twistor_cauchy_intersection, CauchyDivisor,
    ChartPatch, ConstantFamily, FujikiOptions, Intersection, Polynomial, SpherePoint, SyntheticCup, TwistorCurve,
};
use period_space::posgrass::{disc_embed, null_to_plane, plane_to_null, retract, DiscFrame, OrientedPositivePlane};
use period_space::quadspace::{signature_exact, signature_of, QuadraticSpace, Signature};
use period_space::sample::{random_negative_vector, random_positive_plane, random_positive_subspace, random_positive_vector, seeded, uniform_matrix, uniform_vector};
use period_space::torusmod::{
    is_cau_member, is_complex_structure, is_orthogonal_structure, random_metric, random_symplectic, siegel_point, standard_dimensions,
    transversality_defect, two_out_of_three, uniqueness_probe,
};

/// Pinned tolerances.
mod tol {
    pub const ROUNDTRIP: f64 = 1e-9;
    pub const NULL: f64 = 1e-10;
    pub const ORTHOGONAL: f64 = 1e-10;
    pub const CONTAINMENT: f64 = 1e-10;
    pub const FUJIKI: f64 = 1e-8;
    pub const BBF: f64 = 1e-8;
    pub const CLOSED: f64 = 1e-6;
    pub const ORDER: (f64, f64) = (1.8, 2.2);
    pub const CONTROL: f64 = 1e-3;
    pub const FUBINI_STUDY: f64 = 1e-8;
    pub const INVARIANCE: f64 = 1e-8;
    pub const HIT_RESIDUAL: f64 = 1e-10;
    pub const TORUS: f64 = 1e-10;
    pub const RANK: f64 = 1e-6;
}

type Outcome = Result<String, String>;

fn check(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn k3_space() -> QuadraticSpace {
    QuadraticSpace::new(standard_lattice("K3").unwrap().gram().to_f64()).unwrap()
}

/// Eigenvalue-sign oracle.
fn eigen_signature(m: &DMatrix<f64>) -> (usize, usize) {
    let e = SymmetricEigen::new(m.clone()).eigenvalues;
    let scale = e.amax();
    (e.iter().filter(|&&x| x > 1e-9 * scale).count(), e.iter().filter(|&&x| x < -1e-9 * scale).count())
}

fn restricted(space: &QuadraticSpace, basis: &DMatrix<f64>) -> DMatrix<f64> {
    basis.transpose() * space.gram() * basis
}

fn min_eig(m: &DMatrix<f64>) -> f64 {
    SymmetricEigen::new((m + m.transpose()) * 0.5).eigenvalues.min()
}

fn cq(space: &QuadraticSpace, x: &DVector<Complex<f64>>, y: &DVector<Complex<f64>>) -> Complex<f64> {
    let g = space.gram().map(|v| Complex::new(v, 0.0));
    (x.transpose() * g * y)[(0, 0)]
}

fn c01_signature() -> Outcome {
    let k3 = standard_lattice("K3").unwrap();
    let sig = signature_exact(k3.gram()).unwrap();
    check(sig == Signature { positive: 3, negative: 19, zero: 0 }, || format!("K3 signature {sig:?}"))?;
    check(eigen_signature(&k3.gram().to_f64()) == (3, 19), || "eigenvalue oracle disagrees on K3".into())?;
    let mut rng = seeded(101);
    for trial in 0..100 {
        // a diagonal form or K3, moved by a unit upper-triangular integer matrix
        let (g, expected) = if trial % 10 == 0 {
            (k3.gram().clone(), (3, 19))
        } else {
            let d = rng.random_range(2..=22usize);
            let diag: Vec<i64> = (0..d).map(|_| {
                let v = rng.random_range(1..=5i64);
                if rng.random_bool(0.5) { v } else { -v }
            }).collect();
            let rows: Vec<Vec<i64>> = (0..d).map(|i| (0..d).map(|j| if i == j { diag[i] } else { 0 }).collect()).collect();
            let pos = diag.iter().filter(|&&x| x > 0).count();
            (RationalMatrix::from_i64_rows(&rows).unwrap(), (pos, d - pos))
        };
        let d = g.nrows();
        let p_rows: Vec<Vec<i64>> = (0..d)
            .map(|i| (0..d).map(|j| if i == j { 1 } else if j > i && rng.random_bool(0.3) { rng.random_range(-1..=1) } else { 0 }).collect())
            .collect();
        let p = RationalMatrix::from_i64_rows(&p_rows).unwrap();
        let moved = p.transpose().mul(&g).unwrap().mul(&p).unwrap();
        let exact = signature_exact(&moved).unwrap();
        let float = signature_of(&moved.to_f64(), 1e-9).unwrap();
        let want = Signature { positive: expected.0, negative: expected.1, zero: 0 };
        check(exact == want && float == want, || format!("trial {trial}: exact {exact:?}, float {float:?}, expected {want:?}"))?;
    }
    Ok("K3 = (3,19,0) exactly; 100 basis changes up to dim 22 agree".into())
}

fn c02_lebrun() -> Outcome {
    let space = k3_space();
    let mut rng = seeded(102);
    let (mut dist, mut null, mut minpos) = (0.0f64, 0.0f64, f64::INFINITY);
    for i in 0..1000 {
        let plane = random_positive_plane(&space, &mut rng);
        let w = plane_to_null(&plane);
        let v = w.vector();
        let scale = v.norm_squared();
        null = null.max(cq(&space, v, v).norm() / scale);
        let pos = cq(&space, v, &v.map(|z| z.conj())).re / scale;
        minpos = minpos.min(pos);
        let back = null_to_plane(&w).map_err(|e| format!("sample {i}: {e}"))?;
        // projector oracle built here from the basis
        let proj = |b: &DMatrix<f64>| b * (b.transpose() * b).try_inverse().unwrap() * b.transpose();
        let d = (proj(plane.basis()) - proj(back.basis())).norm();
        let orient = ((plane.basis().transpose() * plane.basis()).try_inverse().unwrap() * plane.basis().transpose() * back.basis()).determinant();
        check(orient > 0.0, || format!("sample {i}: orientation lost"))?;
        dist = dist.max(d);
        let flipped = plane_to_null(&plane.reversed());
        check(flipped.same_line(&w.conjugate(), 1e-12), || format!("sample {i}: conjugation law fails"))?;
    }
    check(dist < tol::ROUNDTRIP, || format!("roundtrip distance {dist:e}"))?;
    check(null < tol::NULL, || format!("null residual {null:e}"))?;
    check(minpos > 0.0, || format!("q(w, w̄) min {minpos:e}"))?;
    Ok(format!("1000 planes in K3: roundtrip {dist:.1e}, |q(w,w)| {null:.1e}, min q(w,w̄) {minpos:.3}"))
}

fn c03_disc() -> Outcome {
    let frame = DiscFrame::standard();
    let mut points = Vec::new();
    for i in 0..200 {
        for j in 0..200 {
            let s = |k: usize| -1.2 + 2.4 * (k as f64 + 0.5) / 200.0;
            points.push((s(i), s(j)));
        }
    }
    let mut rng = seeded(103);
    for _ in 0..500 {
        let th = rng.random_range(0.0..std::f64::consts::TAU);
        let mag = rng.random_range(1e-6..1e-3);
        let r2: f64 = if rng.random_bool(0.5) { 1.0 + mag } else { 1.0 - mag };
        points.push((r2.sqrt() * th.cos(), r2.sqrt() * th.sin()));
    }
    for (k, &(a, b)) in points.iter().enumerate() {
        // Gram of ⟨v + a u, w + b u⟩ in diag(1,1,−1), written out by hand
        let gram = DMatrix::from_row_slice(2, 2, &[1.0 - a * a, -a * b, -a * b, 1.0 - b * b]);
        let oracle = min_eig(&gram) > 0.0;
        let inside = a * a + b * b < 1.0;
        let embedded = disc_embed(a, b, &frame).is_ok();
        check(oracle == inside && embedded == inside, || format!("point {k} ({a}, {b}): oracle {oracle}, embed {embedded}"))?;
    }
    Ok(format!("{} points agree with a²+b²<1, including 500 within 1e-3 of the circle", points.len()))
}

fn c04_retract() -> Outcome {
    let space = k3_space();
    let mut rng = seeded(104);
    let mut perp = 0.0f64;
    for i in 0..1000 {
        let plane = random_positive_plane(&space, &mut rng);
        let l = random_negative_vector(&space, &mut rng);
        let r = retract(&plane, &l).map_err(|e| format!("sample {i}: {e}"))?;
        check(min_eig(&restricted(&space, r.basis())) > 0.0, || format!("sample {i}: image not positive"))?;
        let gl = space.gram() * &l;
        let res = (r.basis().transpose() * &gl).amax() / (r.basis().norm() * l.norm());
        perp = perp.max(res);
    }
    check(perp < tol::ORTHOGONAL, || format!("orthogonality residual {perp:e}"))?;
    let frame = DiscFrame::standard();
    let base = OrientedPositivePlane::new(frame.space(), frame.v.clone(), frame.w.clone()).unwrap();
    let mut fiber = 0.0f64;
    for i in 0..=40 {
        for j in 0..=40 {
            let (a, b) = (-1.0 + i as f64 / 20.0, -1.0 + j as f64 / 20.0);
            if a * a + b * b >= 0.999 {
                continue;
            }
            let r = retract(&disc_embed(a, b, &frame).unwrap(), &frame.u).unwrap();
            check(r.relative_orientation(&base) > 0.0, || format!("fiber point ({a},{b}) flips orientation"))?;
            fiber = fiber.max(r.projector_distance(&base));
        }
    }
    check(fiber < 1e-12, || format!("fiber distance {fiber:e}"))?;
    Ok(format!("1000 retractions positive, ⊥ l to {perp:.1e}; (2,1) fiber collapses to ⟨v,w⟩ ({fiber:.1e})"))
}

fn c05_twistor() -> Outcome {
    let space = k3_space();
    let mut rng = seeded(105);
    let mut worst = 0.0f64;
    for i in 0..1000 {
        let u = random_positive_subspace(&space, 3, &mut rng);
        let curve = TwistorCurve::new(&space, u.clone()).unwrap();
        let v = random_positive_vector(&space, &mut rng);
        let divisor = CauchyDivisor::new(&space, v.clone()).unwrap();
        let Intersection::Hits { planes, .. } = twistor_cauchy_intersection(&curve, &divisor).unwrap() else {
            return Err(format!("sample {i}: reported contained"));
        };
        // oracle: the unique plane of U orthogonal to the q-projection of v onto U
        let gu = restricted(&space, &u);
        let p = &u * gu.clone().try_inverse().unwrap() * (u.transpose() * space.gram() * &v);
        let coeffs = u.transpose() * space.gram() * &p;
        // kernel of the 1×3 row: eigenvectors of c cᵀ with eigenvalue 0
        let eig = SymmetricEigen::new(&coeffs * coeffs.transpose());
        let mut order: Vec<usize> = (0..3).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
        let kernel = DMatrix::from_columns(&[eig.eigenvectors.column(order[0]), eig.eigenvectors.column(order[1])]);
        let w0 = &u * kernel;
        let proj = |b: &DMatrix<f64>| b * (b.transpose() * b).try_inverse().unwrap() * b.transpose();
        for plane in &planes {
            let b = plane.basis();
            let on_divisor = (b.transpose() * space.gram() * &v).amax() / (b.norm() * v.norm());
            let in_u = (b - &u * (u.transpose() * &u).try_inverse().unwrap() * u.transpose() * b).amax() / b.norm();
            let oracle = (proj(b) - proj(&w0)).norm();
            worst = worst.max(on_divisor).max(in_u);
            check(oracle < 1e-8, || format!("sample {i}: hit differs from the oracle plane by {oracle:e}"))?;
        }
        check(planes[0].same_plane(&planes[1], 1e-9) && planes[0].relative_orientation(&planes[1]) < 0.0, || {
            format!("sample {i}: hits are not one plane with both orientations")
        })?;
    }
    check(worst < tol::CONTAINMENT, || format!("containment residual {worst:e}"))?;
    // v ⊥ U, in signature (4,1) where U^⊥ has signature (1,1)
    let s41 = QuadraticSpace::diagonal(4, 1);
    let mut degenerate = 0;
    while degenerate < 20 {
        let u = random_positive_subspace(&s41, 3, &mut rng);
        let curve = TwistorCurve::new(&s41, u.clone()).unwrap();
        let x = uniform_vector(5, 1.0, &mut rng);
        let perp = &x - &u * restricted(&s41, &u).try_inverse().unwrap() * (u.transpose() * s41.gram() * &x);
        let Ok(d) = CauchyDivisor::new(&s41, perp) else { continue };
        check(matches!(twistor_cauchy_intersection(&curve, &d).unwrap(), Intersection::ContainedIn), || "v ⊥ U not reported as contained".into())?;
        degenerate += 1;
    }
    Ok(format!("1000 pairs: one unoriented plane each, residual {worst:.1e}; v ⊥ U reported"))
}

fn random_rational_form(d: usize, rng: &mut impl Rng) -> RationalMatrix {
    loop {
        let mut rows = vec![vec![0i64; d]; d];
        for i in 0..d {
            for j in i..d {
                let v = rng.random_range(-5..=5i64);
                rows[i][j] = v;
                rows[j][i] = v;
            }
        }
        let m = RationalMatrix::from_i64_rows(&rows).unwrap();
        if !m.determinant().unwrap().is_zero() {
            return m;
        }
    }
}

fn c06_fujiki() -> Outcome {
    let mut rng = seeded(106);
    let mut worst = 0.0f64;
    let mut cases = 0;
    for n in 1..=3u32 {
        for trial in 0..6 {
            let d = 2 + (trial % 5);
            let q = random_rational_form(d, &mut rng);
            let c = rat(rng.random_range(1..=7)) / rat(rng.random_range(1..=3));
            let f = Polynomial::fujiki_power(&q, n, &c);
            let opts = FujikiOptions::default();
            let exact = fujiki_polarize_polynomial(&f, &opts).map_err(|e| format!("n={n} d={d}: {e}"))?;
            let qe = exact.q_exact.clone().ok_or("exact path returned no rational form")?;
            // proportionality oracle: qe · q[i0] = q · qe[i0] entrywise
            let (mut i0, mut j0) = (0, 0);
            'find: for i in 0..d {
                for j in 0..d {
                    if !q[(i, j)].is_zero() {
                        (i0, j0) = (i, j);
                        break 'find;
                    }
                }
            }
            for i in 0..d {
                for j in 0..d {
                    check(&qe[(i, j)] * &q[(i0, j0)] == &q[(i, j)] * &qe[(i0, j0)], || format!("n={n} d={d}: exact form not proportional"))?;
                }
            }
            let float = fujiki_polarize(|x: &[f64]| f.eval_f64(x), d, n as usize, &opts).map_err(|e| format!("n={n} d={d}: {e}"))?;
            let qf = q.to_f64();
            let (k, _) = qf.iter().enumerate().max_by(|a, b| a.1.abs().total_cmp(&b.1.abs())).unwrap();
            let lambda = float.q.as_slice()[k] / qf.as_slice()[k];
            let err = (&float.q - &qf * lambda).amax() / (qf.amax() * lambda.abs());
            worst = worst.max(err);
            cases += 1;
        }
    }
    check(worst < tol::FUJIKI, || format!("float relative error {worst:e}"))?;
    // n = 1 identity case
    let k3 = standard_lattice("K3").unwrap();
    let r = fujiki_polarize_polynomial(&Polynomial::quadratic_form(k3.gram()), &FujikiOptions::default()).unwrap();
    let qe = r.q_exact.unwrap();
    let scale = &qe[(0, 1)] / &k3.gram()[(0, 1)];
    for i in 0..22 {
        for j in 0..22 {
            check(&qe[(i, j)] == &(&k3.gram()[(i, j)] * &scale), || "K3 identity case not exact".into())?;
        }
    }
    Ok(format!("{cases} forms, n∈{{1,2,3}}, dim≤6: exact path exact, float error {worst:.1e}; K3 n=1 exact"))
}

fn c07_bbf() -> Outcome {
    let mut rng = seeded(107);
    let base = QuadraticSpace::diagonal(3, 5);
    let p = DMatrix::identity(8, 8) + uniform_matrix(8, 8, 0.3, &mut rng);
    let space = QuadraticSpace::new(p.transpose() * base.gram() * &p).unwrap();
    let mut summary = Vec::new();
    for n in 1..=3 {
        let cup = SyntheticCup::new(space.gram(), 2.0, n);
        let omega = plane_to_null(&random_positive_plane(&space, &mut rng));
        let mut ratios = Vec::new();
        while ratios.len() < 100 {
            let a = uniform_vector(8, 1.0, &mut rng);
            let b = uniform_vector(8, 1.0, &mut rng);
            let qab = (a.transpose() * space.gram() * &b)[(0, 0)];
            if qab.abs() < 0.05 {
                continue;
            }
            ratios.push(bbf_explicit(&cup, omega.vector(), &a, &b).unwrap() / qab);
        }
        let r0 = ratios[0];
        let spread = ratios.iter().map(|r| (r - r0).abs()).fold(0.0, f64::max) / r0.abs();
        check(spread < tol::BBF, || format!("n={n}: ratio spread {spread:e}"))?;
        for _ in 0..10 {
            let w = plane_to_null(&random_positive_plane(&space, &mut rng));
            let re = w.vector().map(|z| 2.0 * z.re);
            let val = bbf_explicit(&cup, w.vector(), &re, &re).unwrap();
            check(val > 0.0, || format!("n={n}: value on σ+σ̄ is {val}"))?;
        }
        summary.push(format!("n={n} ratio {r0:.6} spread {spread:.0e}"));
    }
    Ok(summary.join(", "))
}

fn c08_closedness() -> Outcome {
    let mut out = Vec::new();
    for (p, m) in [(3, 4), (3, 19)] {
        let r = closedness_sweep(&QuadraticSpace::diagonal(p, m), 100, 1e-3, 108).map_err(|e| e.to_string())?;
        check(r.residual_max < tol::CLOSED, || format!("({p},{m}): residual {:e}", r.residual_max))?;
        check((tol::ORDER.0..=tol::ORDER.1).contains(&r.order_estimate), || format!("({p},{m}): order {}", r.order_estimate))?;
        check(r.control_min > tol::CONTROL, || format!("({p},{m}): control {:e}", r.control_min))?;
        out.push(format!("({p},{m}) max {:.1e} order {:.3} control≥{:.1e}", r.residual_max, r.order_estimate, r.control_min));
    }
    Ok(out.join("; "))
}

fn c09_fubini_study() -> Outcome {
    let space = k3_space();
    let mut rng = seeded(109);
    let mut ratios = Vec::new();
    let mut fd_gap = 0.0f64;
    for c in 0..10 {
        let curve = TwistorCurve::new(&space, random_positive_subspace(&space, 3, &mut rng)).unwrap();
        for k in 0..50 {
            let z = Complex::new(rng.random_range(-3.0..3.0), rng.random_range(-3.0..3.0));
            ratios.push(fubini_study_ratio(&curve, z).unwrap());
            if k < 3 {
                // finite-difference cross-check of the analytic derivative
                let pb = pullback_form(&curve, &[z.re, z.im], &[1.0, 0.0], &[0.0, 1.0], 1e-4).unwrap();
                fd_gap = fd_gap.max((pb.value * (1.0 + z.norm_sqr()).powi(2) - ratios.last().unwrap()).abs());
            }
        }
        let _ = c;
    }
    let lo = ratios.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = ratios.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    check((hi - lo) / lo.abs() < tol::FUBINI_STUDY, || format!("ratio range [{lo}, {hi}]"))?;
    check(fd_gap < 1e-5, || format!("finite-difference pullback differs by {fd_gap:e}"))?;
    Ok(format!("500 points on 10 curves: ratio in [{lo:.12}, {hi:.12}]"))
}

fn c10_invariance() -> Outcome {
    let space = k3_space();
    let mut worst = 0.0f64;
    let mut defect = 0.0f64;
    for i in 0..100u64 {
        let q = random_isometry(&space, 1000 + i, 0.5);
        let d = (q.transpose() * space.gram() * &q - space.gram()).amax() / space.gram().amax();
        defect = defect.max(d);
        let r = invariance_residual(&space, &q, &random_tangent_samples(&space, 3, 2000 + i)).map_err(|e| e.to_string())?;
        worst = worst.max(r.max());
    }
    check(defect < 1e-12, || format!("isometry defect {defect:e}"))?;
    check(worst < tol::INVARIANCE, || format!("invariance residual {worst:e}"))?;
    Ok(format!("100 isometries of K3 (defect {defect:.1e}): residual {worst:.1e}"))
}

fn c11_density() -> Outcome {
    let lattice = standard_lattice("diag:2,2").unwrap();
    let disc = HolomorphicDisc::seeded(&lattice.space(), 42).unwrap();
    let opts = DensityOptions { sign: VectorSign::Negative, ..DensityOptions::default() };
    let heights = [1, 2, 4, 8, 16];
    let rows = density_report(&disc, &lattice, &heights, &opts).map_err(|e| e.to_string())?;
    let hits: Vec<usize> = rows.iter().map(|r| r.n_hits).collect();
    let radii: Vec<f64> = rows.iter().map(|r| r.covering_radius).collect();
    check(hits.windows(2).all(|w| w[0] < w[1]), || format!("hits not strictly increasing: {hits:?}"))?;
    check(radii.windows(2).all(|w| w[1] <= w[0]), || format!("radius increases: {radii:?}"))?;
    check(radii[4] < 0.5 * radii[0], || format!("radius(16) = {} vs radius(1) = {}", radii[4], radii[0]))?;
    let res = rows.iter().map(|r| r.max_residual).fold(0.0, f64::max);
    check(res < tol::HIT_RESIDUAL, || format!("hit residual {res:e}"))?;
    // oracle at H = 2: closed-form roots of the quadratic pairing polynomial
    let coeffs = disc.coefficients();
    let mut keys = std::collections::BTreeSet::new();
    let vectors = enumerate(&lattice, &EnumerationOptions { sign: VectorSign::Negative, ..EnumerationOptions::new(2) }).unwrap();
    for v in &vectors {
        let vf = DVector::from_iterator(4, v.iter().map(|&x| Complex::new(x as f64, 0.0)));
        let s = lattice.space();
        let [c0, c1, c2] = [0, 1, 2].map(|k| cq(&s, &coeffs[k], &vf));
        let disc_sqrt = (c1 * c1 - c0 * c2 * 4.0).sqrt();
        for t in [(-c1 + disc_sqrt) / (c2 * 2.0), (-c1 - disc_sqrt) / (c2 * 2.0)] {
            if t.norm() < 1.0 {
                keys.insert(((t.re * 1e6).round() as i64, (t.im * 1e6).round() as i64));
            }
        }
    }
    check(keys.len() == rows[1].n_hits, || format!("oracle finds {} hits at H=2, report {}", keys.len(), rows[1].n_hits))?;
    Ok(format!("hits {hits:?}, radius {:.3} → {:.3}, residual {res:.1e}", radii[0], radii[4]))
}

fn c12_torus() -> Outcome {
    let mut rng = seeded(112);
    for n in 1..=4 {
        let row = standard_dimensions(n).map_err(|e| e.to_string())?;
        check((row.all, row.orthogonal, row.cau) == (2 * n * n, n * n - n, n * n + n), || format!("n={n}: {row:?}"))?;
    }
    for i in 0..100 {
        let n = 1 + i % 4;
        let g = random_metric(n, &mut rng);
        let psi = random_symplectic(n, &mut rng);
        let j = two_out_of_three(&g, &psi).map_err(|e| format!("sample {i} (n={n}): {e}"))?.j;
        check(is_complex_structure(&j, tol::TORUS), || format!("sample {i}: J² ≠ −I"))?;
        check(is_orthogonal_structure(&g.g, &j, tol::TORUS), || format!("sample {i}: not g-orthogonal"))?;
        check(is_cau_member(&psi.psi, &j, tol::TORUS), || format!("sample {i}: ψ(·, J·) not positive"))?;
        // residual oracles written out here
        let d = 2 * n;
        check((&j * &j + DMatrix::identity(d, d)).amax() < 1e-9, || format!("sample {i}: J² residual"))?;
        let pj = &psi.psi * &j;
        check(min_eig(&pj) > 0.0 && (&pj - pj.transpose()).amax() < 1e-9 * pj.amax(), || format!("sample {i}: ΨJ"))?;
        check(transversality_defect(&g, &psi).map_err(|e| e.to_string())? == 0, || format!("sample {i}: defect"))?;
        let z = siegel_point(&psi, &j, tol::TORUS).map_err(|e| format!("sample {i} (n={n}) siegel: {e}"))?;
        let im = z.map(|c| c.im);
        check(im.clone().cholesky().is_some() && (&z - z.transpose()).iter().all(|c| c.norm() < 1e-9), || format!("sample {i}: Z not in Siegel space"))?;
    }
    let g = random_metric(2, &mut rng);
    let psi = random_symplectic(2, &mut rng);
    let probe = uniqueness_probe(&g, &psi, 100, 0.05, 7).map_err(|e| e.to_string())?;
    check(probe.converged > 0 && probe.max_distance < 1e-6, || format!("uniqueness probe {probe:?}"))?;
    Ok(format!("exact dims 2n², n²−n, n²+n for n=1..4; 100 reconstructions; {} uniqueness candidates converged to J", probe.converged))
}

fn c13_rank() -> Outcome {
    let space = QuadraticSpace::diagonal(3, 4);
    let mut rng = seeded(113);
    let curve = TwistorCurve::new(&space, random_positive_subspace(&space, 3, &mut rng)).unwrap();
    let pts = vec![vec![0.1, 0.2], vec![-0.3, 0.05]];
    let r1 = period_image_rank(&curve, &pts, 1e-4, tol::RANK).unwrap().rank;
    let frame = Arc::new(random_positive_plane(&space, &mut rng).chart_frame());
    let dirs = [uniform_matrix(5, 2, 1.0, &mut rng), uniform_matrix(5, 2, 1.0, &mut rng)];
    let patch = ChartPatch::complex(frame, &dirs);
    let r2 = period_image_rank(&patch, &[vec![0.0; 4], vec![0.01, 0.0, -0.02, 0.01]], 1e-4, tol::RANK).unwrap().rank;
    let constant = ConstantFamily { plane: curve.point(SpherePoint::new(0.0, 0.0)), params: 2 };
    let r3 = period_image_rank(&constant, &[vec![0.0; 2]], 1e-4, tol::RANK).unwrap().rank;
    check((r1, r2, r3) == (2, 4, 0), || format!("ranks {r1}, {r2}, {r3}"))?;
    Ok("twistor 2, complex patch 4, constant 0".into())
}

fn run_cli(args: &[&str]) -> (i32, Vec<u8>) {
    let out = Command::new(env!("CARGO_BIN_EXE_period-space")).args(args).output().expect("binary runs");
    (out.status.code().unwrap_or(-1), out.stdout)
}

/// Drops the trailing `wall_time_ms` column of CSV output.
fn without_time(body: &[u8]) -> Vec<u8> {
    let text = String::from_utf8_lossy(body);
    if !text.starts_with("H,") {
        return body.to_vec();
    }
    text.lines().map(|l| l.rsplit_once(',').map(|(a, _)| a).unwrap_or(l).to_string() + "\n").collect::<String>().into_bytes()
}

fn c14_determinism() -> Outcome {
    let dir = std::env::temp_dir().join(format!("period-space-acceptance-{}", std::process::id()));
    std::fs::create_dir_all(&dir).map_err(|e| e.to_string())?;
    let poly = dir.join("f.txt");
    let gram = RationalMatrix::from_i64_rows(&[vec![2, 1, 0], vec![1, -1, 0], vec![0, 0, -3]]).unwrap();
    std::fs::write(&poly, Polynomial::fujiki_power(&gram, 2, &rat(5)).to_text()).map_err(|e| e.to_string())?;
    let poly = poly.to_string_lossy().into_owned();
    let runs: Vec<Vec<&str>> = vec![
        vec!["signature", "--lattice", "K3", "--exact"],
        vec!["lebrun", "--samples", "200"],
        vec!["disc-model", "--grid", "50"],
        vec!["retract", "--samples", "200"],
        vec!["twistor-intersect", "--samples", "200"],
        vec!["closedness", "--samples", "10"],
        vec!["fubini-study", "--curves", "3"],
        vec!["invariance", "--samples", "10"],
        vec!["density", "--negative", "--heights", "1,2,4"],
        vec!["fujiki-polarize", &poly],
        vec!["fujiki-polarize", &poly, "--exact"],
        vec!["torus-reconstruct", "--n", "3"],
        vec!["torus-dims", "--n", "1..4"],
        vec!["period-rank", "--family", "patch"],
    ];
    for args in &runs {
        let mut with_seed = args.clone();
        with_seed.extend(["--seed", "5"]);
        let (c1, o1) = run_cli(&with_seed);
        let (c2, o2) = run_cli(&with_seed);
        check(c1 == 0 && c2 == 0, || format!("{args:?}: exit codes {c1}, {c2}"))?;
        check(without_time(&o1) == without_time(&o2) && !o1.is_empty(), || format!("{args:?}: outputs differ"))?;
    }
    let _ = std::fs::remove_dir_all(&dir);
    Ok(format!("{} invocations covering all 13 subcommands are byte-identical", runs.len()))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome, u64); 14] = [
        ("signature suite", c01_signature, 5),
        ("plane/null-vector roundtrip", c02_lebrun, 5),
        ("disc model", c03_disc, 5),
        ("retraction", c04_retract, 5),
        ("twistor-Cauchy intersection", c05_twistor, 10),
        ("Fujiki polarization", c06_fujiki, 30),
        ("explicit form via cup functional", c07_bbf, 10),
        ("closedness of the Kähler form", c08_closedness, 60),
        ("Fubini-Study constant", c09_fubini_study, 10),
        ("isometry invariance", c10_invariance, 10),
        ("divisor density on a disc", c11_density, 120),
        ("torus suite", c12_torus, 30),
        ("period-rank estimator", c13_rank, 5),
        ("CLI determinism", c14_determinism, 120),
    ];
    let mut failures = 0;
    for (k, (name, f, budget)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let result = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|p| {
            Err(p.downcast_ref::<String>().cloned().or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string())).unwrap_or_default())
        });
        let elapsed = start.elapsed();
        let result = match result {
            Ok(msg) if elapsed > Duration::from_secs(*budget) => Err(format!("{msg}; exceeded {budget} s budget")),
            other => other,
        };
        let secs = elapsed.as_secs_f64();
        match result {
            Ok(msg) => println!("criterion {:02} PASS {name} ({secs:.2} s): {msg}", k + 1),
            Err(msg) => {
                failures += 1;
                println!("criterion {:02} FAIL {name} ({secs:.2} s): {msg}", k + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failures} failed", criteria.len() - failures);
    if failures > 0 {
        std::process::exit(1);
    }
}
