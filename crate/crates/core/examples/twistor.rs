// Twistor curves and Cauchy divisors: a generic curve meets a divisor in one
// unoriented plane, seen as a pair of antipodal points of the sphere.

use period_space::perigeo::{cauchy_through, twistor_cauchy_intersection, CauchyDivisor, Intersection, SpherePoint, TwistorCurve};
use period_space::quadspace::QuadraticSpace;
use period_space::sample::{random_positive_subspace, random_positive_vector, seeded};
use period_space::Result;

pub fn run() -> Result<()> {
    let space = QuadraticSpace::diagonal(3, 19);
    let mut rng = seeded(11);
    let curve = TwistorCurve::new(&space, random_positive_subspace(&space, 3, &mut rng))?;
    for z in [SpherePoint::new(0.0, 0.0), SpherePoint::new(0.3, -1.2), SpherePoint::Infinity] {
        let p = curve.point(z);
        println!("{z:?}: containment residual {:.1e}", curve.containment_residual(&p));
    }

    let divisor = CauchyDivisor::new(&space, random_positive_vector(&space, &mut rng))?;
    match twistor_cauchy_intersection(&curve, &divisor)? {
        Intersection::Hits { params, planes } => {
            println!("hits at {:?} and {:?}", params[0], params[1]);
            println!("antipodal: {}", params[0].antipode() == params[1] || planes[0].same_plane(&planes[1], 1e-9));
            for p in &planes {
                println!("  divisor residual {:.1e}, curve residual {:.1e}", divisor.residual(p), curve.containment_residual(p));
            }
        }
        Intersection::ContainedIn => println!("curve lies in the divisor"),
    }

    // the Cauchy divisors through a given plane
    let plane = curve.point(SpherePoint::new(0.5, 0.5));
    let through = cauchy_through(&plane);
    println!("divisors through a plane are indexed by a space of signature {:?}", through.complement_signature());
    if let Some(d) = through.sample(&mut rng) {
        println!("sampled divisor contains it: {}", d.contains(&plane, 1e-9));
    }
    Ok(())
}

#[allow(dead_code)]
fn main() {
    if let Err(e) = run() {
        eprintln!("error: {e}");
        std::process::exit(1);
    }
}
