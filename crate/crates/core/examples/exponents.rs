//! Lyapunov exponents of periodic cocycles and the functionals Δ, Δ_E, Δ*.

use horseshoe_entropy::exponents::{delta, delta_star, delta_with_splitting, SplittingLabel};
use horseshoe_entropy::linalg::{lyapunov_exponents_periodic, PeriodicCocycle, SquareMatrix};
use horseshoe_entropy::systems::{periodic_orbit_cocycle, System, SystemSpec};

fn main() -> horseshoe_entropy::Result<()> {
    let cat = System::new(&SystemSpec::cat_map())?;
    let c = periodic_orbit_cocycle(&cat, &[vec![0.0, 0.0]])?;
    let spec = lyapunov_exponents_periodic(&c)?;
    println!("cat map exponents {:?}", spec.exponents());
    println!("cat map {:?}", delta(&spec));

    // A period-3 cocycle in dimension 3 with a cut after the first exponent.
    let factors = vec![
        SquareMatrix::diag(&[0.5, 2.0, 3.0]),
        SquareMatrix::from_row_major(3, &[1.0, 0.0, 0.0, 0.0, 0.0, -1.0, 0.0, 1.0, 0.0])?,
        SquareMatrix::diag(&[0.25, 1.0, 1.5]),
    ];
    let c3 = PeriodicCocycle::new(factors)?;
    let spec3 = lyapunov_exponents_periodic(&c3)?;
    let split = SplittingLabel::from_cuts(3, &[1])?;
    println!("period 3 exponents {:?}", spec3.exponents());
    println!("with splitting {:?}", delta_with_splitting(&spec3, &split)?);
    println!("delta* over the family {:?}", delta_star(&[(c, SplittingLabel::trivial(2)), (c3, split)])?);
    Ok(())
}
