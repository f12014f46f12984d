//! Build the planar affine horseshoe, check its Markov crossings and read off
//! entropy and dimension.

use horseshoe_entropy::horseshoe::{
    assemble_model, conformal_hausdorff_dimension, derive_scales, entropy_gap, verify_markov_crossings,
    ConstructionParams, RectangleFamily,
};

fn main() -> horseshoe_entropy::Result<()> {
    for ell in [100, 1000] {
        let p = ConstructionParams::planar_example(ell);
        let s = derive_scales(&p)?;
        let gap = entropy_gap(&p, &s);
        println!("ell = {ell}: L has {} digits, return time {}", s.l.to_string().len(), s.return_time);
        println!("  entropy {:.6} vs delta {:.6} (gap {:.6})", gap.entropy, gap.delta, gap.gap);

        let model = assemble_model(&p, &s)?;
        let rects = RectangleFamily::new(&p, &s, Some(64))?;
        let r = verify_markov_crossings(&model, &rects)?;
        println!("  {:?} over {} rows, all ones: {}", r.mode, r.rows_checked, r.all_ones);
        for m in &r.margins {
            println!("  {}: log margin {:.3}", m.inequality, m.margin);
        }
        let lam = model.return_exponents();
        let (ls, lu) = (lam[0], lam[lam.len() - 1]);
        println!("  dimension {:.6}", conformal_hausdorff_dimension(s.entropy, ls, lu)?);
    }
    Ok(())
}
