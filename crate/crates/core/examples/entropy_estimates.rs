//! Separated-set entropy estimates on the full shift and the cat map.

use horseshoe_entropy::estimators::{topological_entropy_estimate, GridWindow};
use horseshoe_entropy::symbolic::{sft_entropy, TransitionMatrix};
use horseshoe_entropy::systems::{ShiftSystem, System, SystemSpec};

fn main() -> horseshoe_entropy::Result<()> {
    let t = TransitionMatrix::golden_mean();
    let shift = ShiftSystem::new(t.clone());
    let words = shift.exhaustive_words(-2, 15)?;
    let est = topological_entropy_estimate(&shift, &words, &[0.25], 14, 0)?;
    println!("golden mean: estimate {:.4}, exact {:.4}", est.finest(), sft_entropy(&t)?.entropy);

    let cat = System::new(&SystemSpec::cat_map())?;
    let eps = 2f64.powi(-5);
    let grid = GridWindow::new(vec![0.2, 0.6], eps, 1024)?;
    let est = topological_entropy_estimate(&cat, &grid, &[2.0 * eps, eps], 10, 3)?;
    for s in &est.scales {
        println!("cat map eps {:.4}: slope {:.4} (residual {:.2e})", s.eps, s.slope, s.residual);
    }
    println!("log of the unstable eigenvalue {:.4}", ((3.0 + 5f64.sqrt()) / 2.0).ln());
    Ok(())
}
