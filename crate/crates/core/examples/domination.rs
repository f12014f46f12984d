//! Invariant splittings along a periodic orbit and their N-domination.

use horseshoe_entropy::domination::{check_n_domination, finest_dominated_splitting, invariant_splittings, tn_weak};
use horseshoe_entropy::linalg::{PeriodicCocycle, SquareMatrix};

fn main() -> horseshoe_entropy::Result<()> {
    let hyperbolic = PeriodicCocycle::single(SquareMatrix::from_row_major(2, &[2.0, 1.0, 1.0, 1.0])?)?;
    let found = invariant_splittings(&hyperbolic)?;
    for s in &found.candidates {
        let r = check_n_domination(&hyperbolic, s, 1, 12)?;
        println!("index {} status {:?} smallest N {:?}", r.index, r.status, r.smallest_n);
    }

    // Mixed gaps: a strong cut after the first direction, a weak one after the second.
    let weak = PeriodicCocycle::single(SquareMatrix::diag(&[0.1, 1.0, 1.05]))?;
    let f = finest_dominated_splitting(&weak, 8)?;
    println!("cuts {:?} blocks {:?}", f.cuts, f.blocks().blocks());

    let rot = PeriodicCocycle::repeated(SquareMatrix::rotation(std::f64::consts::FRAC_PI_2), 4)?;
    println!("rotation candidates {}", invariant_splittings(&rot)?.candidates.len());
    println!("(4, 3)-weak: {}", tn_weak(&rot, 4, 3)?);
    Ok(())
}
