//! Box-counting dimension of the middle-thirds Cantor dust against the
//! similarity dimension.

use horseshoe_entropy::estimators::box_counting_dimension;
use horseshoe_entropy::systems::UniformHorseshoe;

fn main() -> horseshoe_entropy::Result<()> {
    let h = UniformHorseshoe::middle_thirds();
    let cloud = h.attractor_cloud(200_000, 36, 7)?;
    let scales: Vec<f64> = (2..=8).map(|k| 3f64.powi(-k)).collect();
    let d = box_counting_dimension(&cloud, &scales)?;
    println!("box counting {:.5} (residual {:.2e})", d.dimension, d.residual);
    println!("2 log 2 / log 3 = {:.5}", 2.0 * 2f64.ln() / 3f64.ln());
    Ok(())
}
