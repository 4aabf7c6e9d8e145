// The invariant metric and 2-form on the positive Grassmannian: signature,
// closedness, the Fubini–Study constant on twistor curves and invariance.

use std::sync::Arc;

use nalgebra::Complex;
use period_space::lorkahler::{
    closedness_sweep, fubini_study_ratio, invariance_residual, metric_signature, pullback_form, random_isometry,
    random_tangent_samples, isometry_defect,
};
use period_space::perigeo::TwistorCurve;
use period_space::quadspace::QuadraticSpace;
use period_space::sample::{random_positive_plane, random_positive_subspace, seeded};
use period_space::Result;

pub fn run() -> Result<()> {
    let space = QuadraticSpace::diagonal(3, 4);
    let mut rng = seeded(5);
    let frame = Arc::new(random_positive_plane(&space, &mut rng).chart_frame());
    println!("metric signature at a point of Gr₊₊(3,4): {:?}", metric_signature(&frame));

    let closed = closedness_sweep(&space, 20, 1e-3, 1)?;
    println!(
        "dω residual max {:.1e}, order {:.3}, control {:.1e}",
        closed.residual_max, closed.order_estimate, closed.control_min
    );

    let curve = TwistorCurve::new(&space, random_positive_subspace(&space, 3, &mut rng))?;
    for z in [Complex::new(0.0, 0.0), Complex::new(1.5, -0.5)] {
        println!("ω / FS at {z}: {:.12}", fubini_study_ratio(&curve, z)?);
    }
    let pb = pullback_form(&curve, &[0.2, 0.1], &[1.0, 0.0], &[0.0, 1.0], 1e-4)?;
    println!("pullback ω(∂x, ∂y) = {:.8}, immersion: {}", pb.value, pb.immersion);

    let q = random_isometry(&space, 9, 0.5);
    println!("isometry defect {:.1e}", isometry_defect(&space, &q));
    let r = invariance_residual(&space, &q, &random_tangent_samples(&space, 5, 3))?;
    println!("invariance residuals: g {:.1e}, ω {:.1e}", r.metric_residual, r.omega_residual);
    Ok(())
}

#[allow(dead_code)]
fn main() {
    if let Err(e) = run() {
        eprintln!("error: {e}");
        std::process::exit(1);
    }
}
