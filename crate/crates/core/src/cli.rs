//! Command-line front end. Every subcommand prints JSON (CSV for `density`) to
//! stdout or `--out`, and a run manifest to `<out>.manifest.json` or stderr.
//!
//! Exit codes: 0 pass, 1 failed check or precondition, 2 usage.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use nalgebra::{Complex, DMatrix, DVector};
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::exact::parse_gram;
use crate::lattice_density::{density_csv, density_report, standard_lattice, DensityOptions, HolomorphicDisc, IntegralLattice, VectorSign};
use crate::lorkahler::{closedness_sweep, fubini_study_ratio, invariance_residual, random_isometry, random_tangent_samples};
use crate::perigeo::{
    fujiki_polarize, fujiki_polarize_polynomial, period_image_rank, twistor_cauchy_intersection, CauchyDivisor, ChartPatch,
    ConstantFamily, FujikiOptions, Intersection, PlaneFamily, Polynomial, SpherePoint, TwistorCurve,
};
use crate::posgrass::{disc_coords, disc_embed, null_to_plane, plane_to_null, retract, DiscFrame, OrientedPositivePlane};
use crate::quadspace::{signature_exact, signature_of, QuadraticSpace, Signature};
use crate::sample::{random_negative_vector, random_positive_plane, random_positive_subspace, random_positive_vector, seeded, uniform_matrix};
use crate::torusmod::{reconstruct, random_metric, random_symplectic, standard_dimensions, EuclideanMetric, SymplecticForm};

#[derive(Parser, Debug)]
#[command(name = "period-space", version, about = "Period-domain geometry checks and experiments")]
pub struct Cli {
    /// Acceptance threshold of the check; each subcommand has its own default.
    #[arg(long, global = true)]
    pub tolerance: Option<f64>,
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Rational arithmetic where supported.
    #[arg(long, global = true)]
    pub exact: bool,
    /// Output file; the manifest goes next to it.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct SignatureArg {
    /// Signature `p,m` of the diagonal ambient form.
    #[arg(long, default_value = "3,19")]
    pub signature: String,
}

impl SignatureArg {
    fn space(&self) -> Result<QuadraticSpace> {
        let (p, m) = parse_pair(&self.signature)?;
        Ok(QuadraticSpace::diagonal(p, m))
    }
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Signature of a named lattice or a Gram file.
    Signature {
        #[arg(long, conflicts_with = "gram")]
        lattice: Option<String>,
        #[arg(long)]
        gram: Option<PathBuf>,
    },
    /// Plane ↔ null-vector round trips and the conjugation law.
    Lebrun {
        #[command(flatten)]
        sig: SignatureArg,
        #[arg(long, default_value_t = 1000)]
        samples: usize,
    },
    /// Positivity of the disc embedding against `a² + b² < 1`.
    DiscModel {
        #[arg(long, default_value_t = 200)]
        grid: usize,
        #[arg(long, default_value_t = 500)]
        boundary: usize,
    },
    /// Retraction along random negative lines.
    Retract {
        #[command(flatten)]
        sig: SignatureArg,
        #[arg(long, default_value_t = 1000)]
        samples: usize,
    },
    /// Intersections of random twistor curves with Cauchy divisors.
    TwistorIntersect {
        #[command(flatten)]
        sig: SignatureArg,
        #[arg(long, default_value_t = 1000)]
        samples: usize,
    },
    /// Finite-difference exterior derivative of the Kähler form.
    Closedness {
        #[arg(long, default_value = "3,4")]
        signature: String,
        #[arg(long, default_value_t = 100)]
        samples: usize,
        #[arg(long, default_value_t = 1e-3)]
        step: f64,
    },
    /// Restriction of the Kähler form to twistor curves against Fubini–Study.
    FubiniStudy {
        #[command(flatten)]
        sig: SignatureArg,
        #[arg(long, default_value_t = 10)]
        curves: usize,
        #[arg(long, default_value_t = 50)]
        points: usize,
    },
    /// Change of the metric and the form under random isometries.
    Invariance {
        #[command(flatten)]
        sig: SignatureArg,
        #[arg(long, default_value_t = 100)]
        samples: usize,
        /// Tangent pairs per isometry.
        #[arg(long, default_value_t = 3)]
        tangents: usize,
    },
    /// Divisor hits on a holomorphic disc by lattice height.
    Density {
        #[arg(long, default_value = "diag:2,2")]
        lattice: String,
        /// `seed:N` or a disc file.
        #[arg(long, default_value = "seed:42")]
        disc: String,
        #[arg(long, default_value = "1,2,4,8")]
        heights: String,
        /// Use negative-norm vectors instead of positive ones.
        #[arg(long)]
        negative: bool,
        /// Restrict enumeration to the first `k` coordinates.
        #[arg(long)]
        support: Option<usize>,
        #[arg(long, default_value_t = 32)]
        grid: usize,
    },
    /// Recover the quadratic form from a homogeneous polynomial file.
    FujikiPolarize {
        /// Polynomial file: one term per line, exponents then coefficient.
        poly: PathBuf,
    },
    /// Reconstruct `J` from a random (or standard) metric and symplectic form.
    TorusReconstruct {
        #[arg(long, default_value_t = 3)]
        n: usize,
        #[arg(long)]
        standard: bool,
    },
    /// Tangent dimensions of the three loci, e.g. `--n 2` or `--n 1..4`.
    TorusDims {
        #[arg(long, default_value = "1..4")]
        n: String,
    },
    /// Rank of the period map of a test family.
    PeriodRank {
        #[arg(long, default_value = "twistor", value_parser = ["twistor", "patch", "constant"])]
        family: String,
        #[arg(long, default_value = "3,4")]
        signature: String,
        #[arg(long, default_value_t = 1e-4)]
        step: f64,
    },
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Signature { .. } => "signature",
            Command::Lebrun { .. } => "lebrun",
            Command::DiscModel { .. } => "disc-model",
            Command::Retract { .. } => "retract",
            Command::TwistorIntersect { .. } => "twistor-intersect",
            Command::Closedness { .. } => "closedness",
            Command::FubiniStudy { .. } => "fubini-study",
            Command::Invariance { .. } => "invariance",
            Command::Density { .. } => "density",
            Command::FujikiPolarize { .. } => "fujiki-polarize",
            Command::TorusReconstruct { .. } => "torus-reconstruct",
            Command::TorusDims { .. } => "torus-dims",
            Command::PeriodRank { .. } => "period-rank",
        }
    }
}

/// Primary output of a subcommand and whether its check passed.
pub struct Outcome {
    pub body: String,
    pub passed: bool,
    pub tolerance: Option<f64>,
}

fn json_outcome<T: Serialize>(value: &T, passed: bool, tolerance: Option<f64>) -> Outcome {
    let mut body = serde_json::to_string_pretty(value).expect("serializable");
    body.push('\n');
    Outcome { body, passed, tolerance }
}

fn parse_pair(s: &str) -> Result<(usize, usize)> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    match parts.as_slice() {
        [p, m] => Ok((
            p.parse().map_err(|_| Error::Parse(format!("bad signature {s:?}")))?,
            m.parse().map_err(|_| Error::Parse(format!("bad signature {s:?}")))?,
        )),
        _ => Err(Error::Parse(format!("expected p,m but got {s:?}"))),
    }
}

fn parse_list<T: std::str::FromStr>(s: &str) -> Result<Vec<T>> {
    s.split(',')
        .map(|t| t.trim().parse().map_err(|_| Error::Parse(format!("bad list entry {t:?}"))))
        .collect()
}

fn parse_range(s: &str) -> Result<Vec<usize>> {
    let bad = || Error::Parse(format!("bad range {s:?}"));
    if let Some((a, b)) = s.split_once("..") {
        let (a, b): (usize, usize) = (a.trim().parse().map_err(|_| bad())?, b.trim().parse().map_err(|_| bad())?);
        if a == 0 || a > b {
            return Err(bad());
        }
        Ok((a..=b).collect())
    } else {
        let n: usize = s.trim().parse().map_err(|_| bad())?;
        if n == 0 {
            return Err(bad());
        }
        Ok(vec![n])
    }
}

fn read(path: &PathBuf) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))
}

/// First few failing sample indices.
fn first_failures(flags: &[bool]) -> Vec<usize> {
    flags.iter().enumerate().filter(|(_, ok)| !**ok).map(|(i, _)| i).take(5).collect()
}

fn cmd_signature(cli: &Cli, lattice: &Option<String>, gram: &Option<PathBuf>) -> Result<Outcome> {
    let m = match (lattice, gram) {
        (Some(name), _) => standard_lattice(name)?.gram().clone(),
        (None, Some(path)) => parse_gram(&read(path)?)?,
        (None, None) => standard_lattice("K3")?.gram().clone(),
    };
    let sig: Signature =
        if cli.exact { signature_exact(&m)? } else { signature_of(&m.to_f64(), cli.tolerance.unwrap_or(1e-9))? };
    Ok(json_outcome(&sig, true, cli.tolerance))
}

fn cmd_lebrun(cli: &Cli, sig: &SignatureArg, samples: usize) -> Result<Outcome> {
    let space = sig.space()?;
    let tol = cli.tolerance.unwrap_or(1e-9);
    let rows: Vec<(f64, f64, f64, bool)> = (0..samples)
        .into_par_iter()
        .map(|i| {
            let mut rng = seeded(cli.seed.wrapping_add(i as u64));
            let plane = random_positive_plane(&space, &mut rng);
            let w = plane_to_null(&plane);
            let back = null_to_plane(&w).expect("positive null vector");
            let dist = if back.relative_orientation(&plane) > 0.0 { plane.projector_distance(&back) } else { f64::INFINITY };
            let conj = plane_to_null(&plane.reversed()).same_line(&w.conjugate(), 1e-12);
            (dist, w.null_residual(), w.positivity(), conj)
        })
        .collect();
    let ok: Vec<bool> = rows.iter().map(|r| r.0 < tol && r.1 < tol * 0.1 && r.2 > 0.0 && r.3).collect();
    let passed = ok.iter().all(|&b| b);
    let report = json!({
        "samples": samples,
        "max_projector_distance": rows.iter().map(|r| r.0).fold(0.0, f64::max),
        "max_null_residual": rows.iter().map(|r| r.1).fold(0.0, f64::max),
        "min_positivity": rows.iter().map(|r| r.2).fold(f64::INFINITY, f64::min),
        "conjugation_law_failures": rows.iter().filter(|r| !r.3).count(),
        "failing_samples": first_failures(&ok),
        "passed": passed,
    });
    Ok(json_outcome(&report, passed, Some(tol)))
}

/// Positivity of the restricted Gram matrix by its eigenvalues.
fn eigen_positive(space: &QuadraticSpace, b1: &DVector<f64>, b2: &DVector<f64>) -> bool {
    let gram = space.restrict_form(&DMatrix::from_columns(&[b1.clone(), b2.clone()]));
    gram.symmetric_eigenvalues().min() > 0.0
}

fn cmd_disc_model(cli: &Cli, grid: usize, boundary: usize) -> Result<Outcome> {
    let frame = DiscFrame::standard();
    let space = frame.space().clone();
    let tol = cli.tolerance.unwrap_or(1e-9);
    let mut points: Vec<(f64, f64)> = Vec::with_capacity(grid * grid + boundary);
    for i in 0..grid {
        for j in 0..grid {
            let s = |k: usize| -1.2 + 2.4 * (k as f64 + 0.5) / grid as f64;
            points.push((s(i), s(j)));
        }
    }
    let mut rng = seeded(cli.seed);
    for _ in 0..boundary {
        use rand::Rng;
        let th = rng.random_range(0.0..std::f64::consts::TAU);
        let r2: f64 = 1.0 + rng.random_range(-9.9e-4..9.9e-4);
        let r = r2.sqrt();
        points.push((r * th.cos(), r * th.sin()));
    }
    let flags: Vec<(bool, f64)> = points
        .par_iter()
        .map(|&(a, b)| {
            let inside = a * a + b * b < 1.0;
            let oracle = eigen_positive(&space, &(&frame.v + &frame.u * a), &(&frame.w + &frame.u * b));
            let embedded = disc_embed(a, b, &frame);
            let roundtrip = match &embedded {
                Ok(p) => disc_coords(p, &frame).map(|(x, y)| (x - a).abs().max((y - b).abs())).unwrap_or(f64::INFINITY),
                Err(_) => 0.0,
            };
            (inside == oracle && embedded.is_ok() == inside && roundtrip < tol, roundtrip)
        })
        .collect();
    let ok: Vec<bool> = flags.iter().map(|f| f.0).collect();
    let passed = ok.iter().all(|&b| b);
    let report = json!({
        "grid_points": grid * grid,
        "boundary_points": boundary,
        "mismatches": ok.iter().filter(|b| !**b).count(),
        "max_roundtrip_error": flags.iter().map(|f| f.1).fold(0.0, f64::max),
        "failing_samples": first_failures(&ok),
        "passed": passed,
    });
    Ok(json_outcome(&report, passed, Some(tol)))
}

fn cmd_retract(cli: &Cli, sig: &SignatureArg, samples: usize) -> Result<Outcome> {
    let space = sig.space()?;
    let tol = cli.tolerance.unwrap_or(1e-10);
    let rows: Vec<(bool, f64)> = (0..samples)
        .into_par_iter()
        .map(|i| {
            let mut rng = seeded(cli.seed.wrapping_add(i as u64));
            let plane = random_positive_plane(&space, &mut rng);
            let l = random_negative_vector(&space, &mut rng);
            match retract(&plane, &l) {
                Ok(r) => {
                    let scale = l.norm() * r.basis().norm();
                    let perp = space.inner(&r.b1(), &l).abs().max(space.inner(&r.b2(), &l).abs()) / scale;
                    (eigen_positive(&space, &r.b1(), &r.b2()), perp)
                }
                Err(_) => (false, f64::INFINITY),
            }
        })
        .collect();
    // fiber in signature (2,1): every disc point retracts onto span(v, w)
    let frame = DiscFrame::standard();
    let base = OrientedPositivePlane::new(frame.space(), frame.v.clone(), frame.w.clone())?;
    let mut fiber_max = 0.0f64;
    for i in 0..41 {
        for j in 0..41 {
            let (a, b) = (-1.0 + i as f64 / 20.0, -1.0 + j as f64 / 20.0);
            if a * a + b * b >= 0.999 {
                continue;
            }
            let r = retract(&disc_embed(a, b, &frame)?, &frame.u)?;
            let d = if r.relative_orientation(&base) > 0.0 { r.projector_distance(&base) } else { f64::INFINITY };
            fiber_max = fiber_max.max(d);
        }
    }
    let ok: Vec<bool> = rows.iter().map(|r| r.0 && r.1 < tol).collect();
    let passed = ok.iter().all(|&b| b) && fiber_max < tol;
    let report = json!({
        "samples": samples,
        "non_positive_images": rows.iter().filter(|r| !r.0).count(),
        "max_orthogonality_residual": rows.iter().map(|r| r.1).fold(0.0, f64::max),
        "fiber_max_distance": fiber_max,
        "failing_samples": first_failures(&ok),
        "passed": passed,
    });
    Ok(json_outcome(&report, passed, Some(tol)))
}

fn cmd_twistor(cli: &Cli, sig: &SignatureArg, samples: usize) -> Result<Outcome> {
    let space = sig.space()?;
    let tol = cli.tolerance.unwrap_or(1e-10);
    let rows: Vec<Result<(bool, f64)>> = (0..samples)
        .into_par_iter()
        .map(|i| {
            let mut rng = seeded(cli.seed.wrapping_add(i as u64));
            let curve = TwistorCurve::new(&space, random_positive_subspace(&space, 3, &mut rng))?;
            let divisor = CauchyDivisor::new(&space, random_positive_vector(&space, &mut rng))?;
            Ok(match twistor_cauchy_intersection(&curve, &divisor)? {
                Intersection::Hits { planes, .. } => {
                    let res = planes
                        .iter()
                        .map(|p| curve.containment_residual(p).max(divisor.residual(p)))
                        .fold(0.0, f64::max);
                    let pair = planes[0].same_plane(&planes[1], 1e-9) && planes[0].relative_orientation(&planes[1]) < 0.0;
                    (pair, res)
                }
                Intersection::ContainedIn => (false, f64::INFINITY),
            })
        })
        .collect();
    let rows: Vec<(bool, f64)> = rows.into_iter().collect::<Result<_>>()?;
    // v ⊥ U: the whole curve lies in the divisor
    let mut rng = seeded(cli.seed ^ 0x5eed);
    let u = random_positive_subspace(&space, 3, &mut rng);
    let curve = TwistorCurve::new(&space, u)?;
    let (frame, _) = space.orthonormal_basis();
    let ucols = curve.frame().clone();
    let perp_positive = (0..space.dim())
        .map(|k| frame.column(k).into_owned())
        .map(|x| {
            let mut y = x.clone();
            for c in 0..3 {
                let f = ucols.column(c).into_owned();
                y -= &f * space.inner(&x, &f);
            }
            y
        })
        .find(|y| space.norm2(y) > 1e-6);
    let degenerate_ok = match perp_positive {
        Some(v) => matches!(twistor_cauchy_intersection(&curve, &CauchyDivisor::new(&space, v)?)?, Intersection::ContainedIn),
        None => true,
    };
    let ok: Vec<bool> = rows.iter().map(|r| r.0 && r.1 < tol).collect();
    let passed = ok.iter().all(|&b| b) && degenerate_ok;
    let report = json!({
        "samples": samples,
        "unoriented_points_per_sample": 1,
        "pair_failures": rows.iter().filter(|r| !r.0).count(),
        "max_residual": rows.iter().map(|r| r.1).fold(0.0, f64::max),
        "degenerate_case_reported": degenerate_ok,
        "failing_samples": first_failures(&ok),
        "passed": passed,
    });
    Ok(json_outcome(&report, passed, Some(tol)))
}

fn cmd_closedness(cli: &Cli, signature: &str, samples: usize, step: f64) -> Result<Outcome> {
    let (p, m) = parse_pair(signature)?;
    let tol = cli.tolerance.unwrap_or(1e-6);
    let r = closedness_sweep(&QuadraticSpace::diagonal(p, m), samples, step, cli.seed)?;
    let passed = r.residual_max < tol && (1.8..=2.2).contains(&r.order_estimate) && r.control_min > 1e-3;
    let mut v = serde_json::to_value(&r).expect("serializable");
    v["passed"] = Value::Bool(passed);
    Ok(json_outcome(&v, passed, Some(tol)))
}

fn cmd_fubini_study(cli: &Cli, sig: &SignatureArg, curves: usize, points: usize) -> Result<Outcome> {
    let space = sig.space()?;
    let tol = cli.tolerance.unwrap_or(1e-8);
    let mut rng = seeded(cli.seed);
    let mut ratios = Vec::with_capacity(curves * points);
    for _ in 0..curves {
        let curve = TwistorCurve::new(&space, random_positive_subspace(&space, 3, &mut rng))?;
        let zs = uniform_matrix(points, 2, 3.0, &mut rng);
        for k in 0..points {
            ratios.push(fubini_study_ratio(&curve, Complex::new(zs[(k, 0)], zs[(k, 1)]))?);
        }
    }
    let lo = ratios.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = ratios.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mean = ratios.iter().sum::<f64>() / ratios.len().max(1) as f64;
    let dev: Vec<f64> = ratios.iter().map(|r| (r - 4.0).abs()).collect();
    let passed = (hi - lo) < tol * mean.abs() && dev.iter().all(|d| *d < tol * 4.0);
    let report = json!({
        "curves": curves,
        "points": points,
        "ratio_min": lo,
        "ratio_max": hi,
        "ratio_mean": mean,
        "expected": 4.0,
        "residual_max": dev.iter().copied().fold(0.0, f64::max),
        "residual_mean": dev.iter().sum::<f64>() / dev.len().max(1) as f64,
        "passed": passed,
    });
    Ok(json_outcome(&report, passed, Some(tol)))
}

fn cmd_invariance(cli: &Cli, sig: &SignatureArg, samples: usize, tangents: usize) -> Result<Outcome> {
    let space = sig.space()?;
    let tol = cli.tolerance.unwrap_or(1e-8);
    let rows: Vec<Result<f64>> = (0..samples)
        .into_par_iter()
        .map(|i| {
            let seed = cli.seed.wrapping_mul(1_000_003).wrapping_add(i as u64);
            let q = random_isometry(&space, seed, 0.5);
            let pairs = random_tangent_samples(&space, tangents, seed ^ 0xabcdef);
            Ok(invariance_residual(&space, &q, &pairs)?.max())
        })
        .collect();
    let rows: Vec<f64> = rows.into_iter().collect::<Result<_>>()?;
    let ok: Vec<bool> = rows.iter().map(|r| *r < tol).collect();
    let passed = ok.iter().all(|&b| b);
    let report = json!({
        "samples": samples,
        "tangents_per_sample": tangents,
        "residual_max": rows.iter().copied().fold(0.0, f64::max),
        "residual_mean": rows.iter().sum::<f64>() / rows.len().max(1) as f64,
        "failing_samples": first_failures(&ok),
        "passed": passed,
    });
    Ok(json_outcome(&report, passed, Some(tol)))
}

struct DensityArgs<'a> {
    lattice: &'a str,
    disc: &'a str,
    heights: &'a str,
    negative: bool,
    support: Option<usize>,
    grid: usize,
}

fn load_lattice(name: &str) -> Result<IntegralLattice> {
    match standard_lattice(name) {
        Ok(l) => Ok(l),
        Err(e) => {
            let path = PathBuf::from(name);
            if path.exists() {
                IntegralLattice::from_rational(name, &parse_gram(&read(&path)?)?)
            } else {
                Err(e)
            }
        }
    }
}

fn cmd_density(cli: &Cli, a: DensityArgs) -> Result<Outcome> {
    let lattice = load_lattice(a.lattice)?;
    let space = lattice.space();
    let disc = match a.disc.strip_prefix("seed:") {
        Some(s) => HolomorphicDisc::seeded(&space, s.parse().map_err(|_| Error::Parse(format!("bad disc seed {s:?}")))?)?,
        None => HolomorphicDisc::from_text(&space, &read(&PathBuf::from(a.disc))?)?,
    };
    let heights: Vec<i64> = parse_list(a.heights)?;
    let opts = DensityOptions {
        support: a.support.map(|k| (0..k).collect()),
        sign: if a.negative { VectorSign::Negative } else { VectorSign::Positive },
        grid: a.grid,
        ..DensityOptions::default()
    };
    let tol = cli.tolerance.unwrap_or(1e-10);
    let rows = density_report(&disc, &lattice, &heights, &opts)?;
    let passed = rows.iter().all(|r| r.max_residual < tol);
    Ok(Outcome { body: density_csv(&rows, true), passed, tolerance: Some(tol) })
}

fn cmd_fujiki(cli: &Cli, poly: &PathBuf) -> Result<Outcome> {
    let f = Polynomial::parse(&read(poly)?)?;
    let opts = FujikiOptions { seed: cli.seed, tolerance: cli.tolerance.unwrap_or(1e-8), ..FujikiOptions::default() };
    let result = if cli.exact {
        fujiki_polarize_polynomial(&f, &opts)?
    } else {
        let degree = f.homogeneous_degree().ok_or(Error::NotHomogeneous { degree: 0 })?;
        if degree == 0 || degree % 2 != 0 {
            return Err(Error::NotHomogeneous { degree: degree as usize });
        }
        fujiki_polarize(|x: &[f64]| f.eval_f64(x), f.nvars(), degree as usize / 2, &opts)?
    };
    let q: Vec<Vec<f64>> = (0..result.q.nrows()).map(|r| result.q.row(r).iter().copied().collect()).collect();
    let report = json!({
        "n": result.n,
        "q": q,
        "c": result.c,
        "exact": result.is_exact(),
        "q_exact": result.q_exact.as_ref().map(|m| {
            (0..m.nrows()).map(|r| (0..m.ncols()).map(|c| m[(r, c)].to_string()).collect::<Vec<_>>()).collect::<Vec<_>>()
        }),
        "c_exact": result.c_exact.as_ref().map(|c| c.to_string()),
        "residual": result.residual,
        "passed": true,
    });
    Ok(json_outcome(&report, true, Some(opts.tolerance)))
}

fn cmd_torus_reconstruct(cli: &Cli, n: usize, standard: bool) -> Result<Outcome> {
    if n == 0 {
        return Err(Error::Parse("n must be at least 1".into()));
    }
    let tol = cli.tolerance.unwrap_or(1e-10);
    let (g, psi) = if standard {
        (EuclideanMetric::identity(n), SymplecticForm::standard(n))
    } else {
        let mut rng = seeded(cli.seed);
        (random_metric(n, &mut rng), random_symplectic(n, &mut rng))
    };
    let r = reconstruct(&g, &psi)?;
    let scale = r.j.iter().flatten().fold(1.0f64, |a, x| a.max(x.abs()));
    let passed = r.square_residual < tol * scale * scale
        && r.orthogonality_residual < tol * scale * scale * g.g.amax().max(1.0)
        && r.cau_min_eigenvalue > 0.0
        && r.transversality_defect == 0
        && r.siegel_imag_min_eigenvalue > 0.0
        && (r.dimensions.all, r.dimensions.orthogonal, r.dimensions.cau) == (2 * n * n, n * n - n, n * n + n);
    let mut v = serde_json::to_value(&r).expect("serializable");
    v["passed"] = Value::Bool(passed);
    Ok(json_outcome(&v, passed, Some(tol)))
}

fn cmd_torus_dims(cli: &Cli, n: &str) -> Result<Outcome> {
    let ns = parse_range(n)?;
    let rows = ns.iter().map(|&n| standard_dimensions(n)).collect::<Result<Vec<_>>>()?;
    let passed = rows.iter().all(|r| (r.all, r.orthogonal, r.cau) == (2 * r.n * r.n, r.n * r.n - r.n, r.n * r.n + r.n));
    if let [row] = rows.as_slice() {
        let v = json!({"all": row.all, "orthogonal": row.orthogonal, "cau": row.cau});
        return Ok(json_outcome(&v, passed, cli.tolerance));
    }
    Ok(json_outcome(&rows, passed, cli.tolerance))
}

fn cmd_period_rank(cli: &Cli, family: &str, signature: &str, step: f64) -> Result<Outcome> {
    let (p, m) = parse_pair(signature)?;
    let space = QuadraticSpace::diagonal(p, m);
    let tol = cli.tolerance.unwrap_or(1e-6);
    let mut rng = seeded(cli.seed);
    let curve = TwistorCurve::new(&space, random_positive_subspace(&space, 3, &mut rng))?;
    let (fam, expected): (Box<dyn PlaneFamily>, usize) = match family {
        "twistor" => (Box::new(curve), 2),
        "patch" => {
            let frame = std::sync::Arc::new(random_positive_plane(&space, &mut rng).chart_frame());
            let k = frame.codim();
            let dirs = [uniform_matrix(k, 2, 1.0, &mut rng), uniform_matrix(k, 2, 1.0, &mut rng)];
            (Box::new(ChartPatch::complex(frame, &dirs)), 4)
        }
        _ => (Box::new(ConstantFamily { plane: curve.point(SpherePoint::new(0.0, 0.0)), params: 2 }), 0),
    };
    let k = fam.param_dim();
    let points: Vec<Vec<f64>> = (0..3).map(|_| uniform_matrix(k, 1, 0.1, &mut rng).iter().copied().collect()).collect();
    let r = period_image_rank(fam.as_ref(), &points, step, tol)?;
    let passed = r.rank == expected;
    let report = json!({
        "family": family,
        "param_dim": k,
        "ranks": r.ranks,
        "rank": r.rank,
        "expected": expected,
        "singular_values": r.singular_values,
        "passed": passed,
    });
    Ok(json_outcome(&report, passed, Some(tol)))
}

fn dispatch(cli: &Cli) -> Result<Outcome> {
    match &cli.command {
        Command::Signature { lattice, gram } => cmd_signature(cli, lattice, gram),
        Command::Lebrun { sig, samples } => cmd_lebrun(cli, sig, *samples),
        Command::DiscModel { grid, boundary } => cmd_disc_model(cli, *grid, *boundary),
        Command::Retract { sig, samples } => cmd_retract(cli, sig, *samples),
        Command::TwistorIntersect { sig, samples } => cmd_twistor(cli, sig, *samples),
        Command::Closedness { signature, samples, step } => cmd_closedness(cli, signature, *samples, *step),
        Command::FubiniStudy { sig, curves, points } => cmd_fubini_study(cli, sig, *curves, *points),
        Command::Invariance { sig, samples, tangents } => cmd_invariance(cli, sig, *samples, *tangents),
        Command::Density { lattice, disc, heights, negative, support, grid } => cmd_density(
            cli,
            DensityArgs { lattice, disc, heights, negative: *negative, support: *support, grid: *grid },
        ),
        Command::FujikiPolarize { poly } => cmd_fujiki(cli, poly),
        Command::TorusReconstruct { n, standard } => cmd_torus_reconstruct(cli, *n, *standard),
        Command::TorusDims { n } => cmd_torus_dims(cli, n),
        Command::PeriodRank { family, signature, step } => cmd_period_rank(cli, family, signature, *step),
    }
}

#[derive(Serialize)]
struct Manifest<'a> {
    subcommand: &'a str,
    args: Vec<String>,
    seed: u64,
    tolerance: Option<f64>,
    exact: bool,
    version: &'static str,
    passed: bool,
    wall_time_ms: f64,
}

/// Parses `args` (including the program name), runs the subcommand and returns the exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args: Vec<OsString> = args.into_iter().map(Into::into).collect();
    let cli = match Cli::try_parse_from(&args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let text = e.render().to_string();
            let _ = if code == 0 { stdout.write_all(text.as_bytes()) } else { stderr.write_all(text.as_bytes()) };
            return code;
        }
    };
    let start = Instant::now();
    let outcome = match dispatch(&cli) {
        Ok(o) => o,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            return 1;
        }
    };
    let manifest = Manifest {
        subcommand: cli.command.name(),
        args: args.iter().skip(1).map(|a| a.to_string_lossy().into_owned()).collect(),
        seed: cli.seed,
        tolerance: outcome.tolerance,
        exact: cli.exact,
        version: env!("CARGO_PKG_VERSION"),
        passed: outcome.passed,
        wall_time_ms: start.elapsed().as_secs_f64() * 1e3,
    };
    let manifest = serde_json::to_string_pretty(&manifest).expect("serializable");
    let written = match &cli.out {
        Some(path) => {
            let mut side = path.clone().into_os_string();
            side.push(".manifest.json");
            std::fs::write(path, &outcome.body).and_then(|_| std::fs::write(PathBuf::from(side), manifest + "\n"))
        }
        None => stdout.write_all(outcome.body.as_bytes()).and_then(|_| writeln!(stderr, "{manifest}")),
    };
    if let Err(e) = written {
        let _ = writeln!(stderr, "error: {e}");
        return 1;
    }
    if outcome.passed {
        0
    } else {
        1
    }
}
