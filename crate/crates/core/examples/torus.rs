// Complex structures on ℝ²ⁿ: reconstruction from a metric and a symplectic
// form, tangent dimensions of the three loci and Siegel coordinates.

use period_space::torusmod::{
    random_metric, random_symplectic, siegel_point, standard_dimensions, two_out_of_three, uniqueness_probe,
    EuclideanMetric, SymplecticForm,
};
use period_space::sample::seeded;
use period_space::Result;

pub fn run() -> Result<()> {
    for n in 1..=4 {
        let row = standard_dimensions(n)?;
        println!("n = {n}: all {}, orthogonal {}, cau {}", row.all, row.orthogonal, row.cau);
    }

    let j0 = two_out_of_three(&EuclideanMetric::identity(2), &SymplecticForm::standard(2))?;
    println!("standard pair gives J₀:{}", j0.j);

    let mut rng = seeded(7);
    let g = random_metric(3, &mut rng);
    let psi = random_symplectic(3, &mut rng);
    let j = two_out_of_three(&g, &psi)?;
    println!("random pair, orientation {:?}", j.orientation);
    let z = siegel_point(&psi, &j.j, 1e-10)?;
    println!("Siegel point Im Z eigenvalues: {}", z.map(|c| c.im).symmetric_eigenvalues().transpose());
    let probe = uniqueness_probe(&g, &psi, 10, 0.05, 1)?;
    println!("{} perturbed candidates converged, max distance to J {:.1e}", probe.converged, probe.max_distance);
    Ok(())
}

#[allow(dead_code)]
fn main() {
    if let Err(e) = run() {
        eprintln!("error: {e}");
        std::process::exit(1);
    }
}
