// Signature (2,1): positive planes form the open unit disc, and retraction
// along a negative line collapses each fiber onto a single plane.

use period_space::posgrass::{disc_coords, disc_embed, retract, DiscFrame, OrientedPositivePlane};
use period_space::quadspace::QuadraticSpace;
use period_space::sample::{random_negative_vector, random_positive_plane, seeded};
use period_space::Result;

pub fn run() -> Result<()> {
    let frame = DiscFrame::standard();
    for (a, b) in [(0.0, 0.0), (0.5, -0.3), (0.7, 0.7), (0.6, 0.8), (1.2, 0.0)] {
        match disc_embed(a, b, &frame) {
            Ok(p) => {
                let (x, y) = disc_coords(&p, &frame)?;
                println!("({a:+.2}, {b:+.2}) positive, coordinates back ({x:+.6}, {y:+.6})");
            }
            Err(e) => println!("({a:+.2}, {b:+.2}) rejected: {e}"),
        }
    }

    // every disc point retracts onto ⟨v, w⟩ along u
    let base = OrientedPositivePlane::new(frame.space(), frame.v.clone(), frame.w.clone())?;
    let r = retract(&disc_embed(0.4, 0.5, &frame)?, &frame.u)?;
    println!("retraction of (0.4, 0.5) lands on ⟨v,w⟩: {}", r.approx_eq(&base));

    // in signature (3,19) the image is positive and orthogonal to the line
    let space = QuadraticSpace::diagonal(3, 19);
    let mut rng = seeded(3);
    let w = random_positive_plane(&space, &mut rng);
    let l = random_negative_vector(&space, &mut rng);
    let image = retract(&w, &l)?;
    println!(
        "q(image, l) = ({:.1e}, {:.1e})",
        space.inner(&image.b1(), &l),
        space.inner(&image.b2(), &l)
    );
    Ok(())
}

#[allow(dead_code)]
fn main() {
    if let Err(e) = run() {
        eprintln!("error: {e}");
        std::process::exit(1);
    }
}
