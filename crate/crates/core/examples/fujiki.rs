// Recovering the quadratic form from `F = c·qⁿ`, exactly and numerically, and
// evaluating the two-term formula against a synthetic cup product.

use nalgebra::{Complex, DVector};
use period_space::exact::{rat, RationalMatrix};
use period_space::perigeo::{bbf_explicit, fujiki_polarize, fujiki_polarize_polynomial, FujikiOptions, Polynomial, SyntheticCup};
use period_space::posgrass::plane_to_null;
use period_space::quadspace::QuadraticSpace;
use period_space::sample::{random_positive_plane, seeded, uniform_vector};
use period_space::Result;

pub fn run() -> Result<()> {
    let gram = RationalMatrix::from_i64_rows(&[vec![2, 1, 0], vec![1, -2, 0], vec![0, 0, -1]])?;
    let f = Polynomial::fujiki_power(&gram, 2, &rat(3));
    println!("F = 3 q² has {} terms", f.terms().count());

    let opts = FujikiOptions::default();
    let exact = fujiki_polarize_polynomial(&f, &opts)?;
    println!("exact: n = {}, c = {:?}, q = {:?}", exact.n, exact.c_exact.map(|c| c.to_string()), exact.q_exact);

    let float = fujiki_polarize(|x: &[f64]| f.eval_f64(x), 3, 2, &opts)?;
    println!("float: c = {:.10}, residual {:.1e}, error vs exact {:.1e}", float.c, float.residual, float.relative_error(&gram.to_f64()));

    // a sum of fourth powers is not of the form c·q²
    let quartic = Polynomial::parse("2\n4 0 1\n0 4 1\n")?;
    println!("x⁴ + y⁴: {:?}", fujiki_polarize_polynomial(&quartic, &opts).err());

    // the explicit formula is proportional to q
    let space = QuadraticSpace::diagonal(3, 5);
    let cup = SyntheticCup::new(space.gram(), 1.0, 2);
    let mut rng = seeded(2);
    let omega = plane_to_null(&random_positive_plane(&space, &mut rng));
    for _ in 0..3 {
        let a = uniform_vector(8, 1.0, &mut rng);
        let b = uniform_vector(8, 1.0, &mut rng);
        let val = bbf_explicit(&cup, omega.vector(), &a, &b)?;
        println!("formula / q = {:.10}", val / space.inner(&a, &b));
    }
    let re: DVector<f64> = omega.vector().map(|z: Complex<f64>| 2.0 * z.re);
    println!("value on σ + σ̄: {:.6}", bbf_explicit(&cup, omega.vector(), &re, &re)?);
    Ok(())
}

#[allow(dead_code)]
fn main() {
    if let Err(e) = run() {
        eprintln!("error: {e}");
        std::process::exit(1);
    }
}
