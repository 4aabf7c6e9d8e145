// Hits of integral Cauchy divisors on a holomorphic disc, by lattice height.

use period_space::lattice_density::{density_csv, density_report, standard_lattice, DensityOptions, HolomorphicDisc, VectorSign};
use period_space::Result;

pub fn run() -> Result<()> {
    // in signature (2,2) only negative vectors have divisors meeting the domain
    let lattice = standard_lattice("diag:2,2")?;
    let disc = HolomorphicDisc::seeded(&lattice.space(), 42)?;
    let opts = DensityOptions { sign: VectorSign::Negative, ..DensityOptions::default() };
    let rows = density_report(&disc, &lattice, &[1, 2, 4, 8], &opts)?;
    print!("{}", density_csv(&rows, false));

    // K3, restricted to the U³ block
    let k3 = standard_lattice("K3")?;
    let disc = HolomorphicDisc::seeded(&k3.space(), 42)?;
    let opts = DensityOptions { support: Some((0..6).collect()), ..DensityOptions::default() };
    let rows = density_report(&disc, &k3, &[1, 2], &opts)?;
    print!("{}", density_csv(&rows, false));
    Ok(())
}

#[allow(dead_code)]
fn main() {
    if let Err(e) = run() {
        eprintln!("error: {e}");
        std::process::exit(1);
    }
}
