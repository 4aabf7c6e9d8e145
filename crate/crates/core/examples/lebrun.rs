// Oriented positive planes and positive null vectors: the two descriptions of
// a point of the period space.

use nalgebra::{Complex, DVector};
use period_space::perigeo::is_period_point;
use period_space::posgrass::{null_to_plane, plane_to_null};
use period_space::quadspace::QuadraticSpace;
use period_space::sample::{random_positive_plane, seeded};
use period_space::Result;

pub fn run() -> Result<()> {
    let space = QuadraticSpace::diagonal(3, 19);
    let mut rng = seeded(7);
    let plane = random_positive_plane(&space, &mut rng);

    let w = plane_to_null(&plane);
    println!("q(w,w) = {:.2e}, q(w,w̄) = {:.6}", w.null_residual(), w.positivity());
    println!("period point: {}", is_period_point(&space, w.vector(), 1e-9));

    let back = null_to_plane(&w)?;
    println!("round trip projector distance: {:.2e}", plane.projector_distance(&back));
    println!("same orientation: {}", back.relative_orientation(&plane) > 0.0);

    // reversing the orientation conjugates the null line
    let flipped = plane_to_null(&plane.reversed());
    println!("reversed plane ↦ conjugate line: {}", flipped.same_line(&w.conjugate(), 1e-12));

    // e₁ + i e₄ in signature (3,19) has q(v,v) = 1 − 1 = 0 but q(v,v̄) = 0 too
    let mut v = DVector::from_element(22, Complex::new(0.0, 0.0));
    v[0] = Complex::new(1.0, 0.0);
    v[3] = Complex::new(0.0, 1.0);
    println!("e1 + i e4 is a period point: {}", is_period_point(&space, &v, 1e-9));

    println!("{}", plane.to_text("standard"));
    Ok(())
}

#[allow(dead_code)]
fn main() {
    if let Err(e) = run() {
        eprintln!("error: {e}");
        std::process::exit(1);
    }
}
