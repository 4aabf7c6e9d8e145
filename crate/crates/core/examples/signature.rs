// Signatures of integral lattices, exactly and in floating point, and their
// invariance under a change of basis.

use nalgebra::DMatrix;
use period_space::exact::{format_gram, parse_gram, RationalMatrix};
use period_space::lattice_density::standard_lattice;
use period_space::quadspace::{signature_exact, signature_of};
use period_space::sample::{seeded, uniform_matrix};
use period_space::Result;

pub fn run() -> Result<()> {
    for name in ["U", "E8(-1)", "K3", "diag:2,2"] {
        let lattice = standard_lattice(name)?;
        let exact = signature_exact(lattice.gram())?;
        let float = signature_of(&lattice.gram().to_f64(), 1e-9)?;
        println!("{name:>8}: exact {exact:?}, float {float:?}, det {}", lattice.determinant());
        assert_eq!(exact, float);
    }

    // Sylvester's law: PᵀGP has the same signature for invertible P
    let k3 = standard_lattice("K3")?;
    let g = k3.gram().to_f64();
    let mut rng = seeded(1);
    let p = DMatrix::identity(22, 22) + uniform_matrix(22, 22, 0.3, &mut rng);
    let moved = p.transpose() * &g * &p;
    println!("after a random change of basis: {:?}", signature_of(&moved, 1e-9)?);

    // the plain-text Gram format round-trips
    let text = format_gram(k3.gram());
    let back: RationalMatrix = parse_gram(&text)?;
    assert_eq!(&back, k3.gram());
    println!("Gram text of U:\n{}", format_gram(standard_lattice("U")?.gram()));
    Ok(())
}

#[allow(dead_code)]
fn main() {
    if let Err(e) = run() {
        eprintln!("error: {e}");
        std::process::exit(1);
    }
}
