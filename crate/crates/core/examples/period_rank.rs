// Rank of the period map for test families: a twistor curve, a complex chart
// patch and a constant family.

use std::sync::Arc;

use period_space::perigeo::{period_image_rank, ChartPatch, ConstantFamily, SpherePoint, TwistorCurve};
use period_space::quadspace::QuadraticSpace;
use period_space::sample::{random_positive_plane, random_positive_subspace, seeded, uniform_matrix};
use period_space::Result;

pub fn run() -> Result<()> {
    let space = QuadraticSpace::diagonal(3, 4);
    let mut rng = seeded(4);
    let curve = TwistorCurve::new(&space, random_positive_subspace(&space, 3, &mut rng))?;
    let pts = vec![vec![0.1, 0.2], vec![-0.4, 0.3]];
    println!("twistor curve: rank {}", period_image_rank(&curve, &pts, 1e-4, 1e-6)?.rank);

    let frame = Arc::new(random_positive_plane(&space, &mut rng).chart_frame());
    let dirs = [uniform_matrix(5, 2, 1.0, &mut rng), uniform_matrix(5, 2, 1.0, &mut rng)];
    let patch = ChartPatch::complex(frame, &dirs);
    println!("complex 2-parameter patch: rank {}", period_image_rank(&patch, &[vec![0.0; 4]], 1e-4, 1e-6)?.rank);

    let constant = ConstantFamily { plane: curve.point(SpherePoint::new(0.0, 0.0)), params: 3 };
    println!("constant family: rank {}", period_image_rank(&constant, &[vec![0.0; 3]], 1e-4, 1e-6)?.rank);
    Ok(())
}

#[allow(dead_code)]
fn main() {
    if let Err(e) = run() {
        eprintln!("error: {e}");
        std::process::exit(1);
    }
}
