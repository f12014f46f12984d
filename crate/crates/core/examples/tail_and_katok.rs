//! Two-scale tail entropy and Katok's measure-entropy count on the full 2-shift.

use horseshoe_entropy::estimators::{katok_entropy_estimate, tail_entropy_estimate};
use horseshoe_entropy::symbolic::TransitionMatrix;
use horseshoe_entropy::systems::ShiftSystem;

fn main() -> horseshoe_entropy::Result<()> {
    let s = ShiftSystem::new(TransitionMatrix::all_ones(2));
    let words = s.exhaustive_words(-3, 12)?;
    let t = tail_entropy_estimate(&s, &words, &[2.0, 0.25], &[0.125, 0.5], 10, 5)?;
    for c in &t.cells {
        println!("eps {:<5} delta {:<6} slope {:.4}", c.eps, c.delta, c.slope);
    }
    println!("h* estimate {:.4}, skipped {:?}", t.h_star_estimate, t.skipped);

    for p in [0.5, 0.9] {
        let samples = s.bernoulli_words(&[p, 1.0 - p], -3, 40, 100_000, 1)?;
        let k = katok_entropy_estimate(&s, &samples, 0.25, 10)?;
        let shannon = -(p * p.ln() + (1.0 - p) * (1.0 - p).ln());
        println!("Bernoulli({p}): slope {:.4}, Shannon {:.4}, counts {:?}", k.slope, shannon, k.counts);
    }
    Ok(())
}
