//! Growth of the top-k exterior power, Grassmannian Jacobians and Lagrangian
//! normalization.

use horseshoe_entropy::linalg::{
    grassmann_jacobian, lagrangian_to_standard, sampled_sup_jacobian, symplectic_defect, top_k_log_growth,
    top_k_log_jacobian, PeriodicCocycle, SquareMatrix, SubspaceBasis,
};

fn main() -> horseshoe_entropy::Result<()> {
    let m = SquareMatrix::from_row_major(3, &[2.0, 1.0, 0.0, 1.0, 1.0, 0.0, 0.0, 0.0, 0.5])?;
    for k in 1..=3 {
        println!(
            "k = {k}: log sup Jac = {:.6}, sampled = {:.6}",
            top_k_log_jacobian(&m, k)?,
            sampled_sup_jacobian(&m, k, 2000, 1)?.ln()
        );
    }
    let e = SubspaceBasis::coordinate(3, &[0, 2])?;
    println!("Jacobian on span(e1, e3) = {:.6}", grassmann_jacobian(&m, &e)?);

    let c = PeriodicCocycle::new(vec![m.clone(), m.transpose()])?;
    for n in [5, 10, 20] {
        println!("a_{n}/n for k = 2: {:.6}", top_k_log_growth(&c, 2, n)? / n as f64);
    }

    let cat = SquareMatrix::from_row_major(2, &[2.0, 1.0, 1.0, 1.0])?;
    println!("cat map symplectic defect {:.2e}", symplectic_defect(&cat)?);
    let line = SubspaceBasis::from_columns(&[&[1.0, 2.0]])?;
    let n = lagrangian_to_standard(&line)?;
    println!("normalizer norm {:.4}, inverse norm {:.4}", n.norm, n.inverse_norm);
    Ok(())
}
