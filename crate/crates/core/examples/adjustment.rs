//! Adjustment coefficients, Cramér constants and the cone partition.

use quadrant_ruin::cones::partition;
use quadrant_ruin::models::{adjustment, scale_to_canonical, ClaimDriver, TwoLineModel};

fn main() -> quadrant_ruin::Result<()> {
    // raw reserves and premiums split between two lines in proportions 1/2, 1/2
    let (x1, x2, p1, p2) = scale_to_canonical(0.5, 1.5, 1.5, 0.5, 0.5, 0.5)?;
    println!("canonical reserves ({x1}, {x2}), premiums ({p1}, {p2})");

    let m = TwoLineModel::new(
        ClaimDriver::CompoundPoissonExp {
            lambda: 1.0,
            mu: 2.0,
        },
        p1,
        p2,
    )?;
    let adj = adjustment(&m)?;
    println!(
        "gamma1 {:.6} gamma2 {:.6} gamma3 {:.6} gamma_tilde {:.6}",
        adj.gamma1, adj.gamma2, adj.gamma3, adj.gamma_tilde
    );
    println!("C1 {:.6} C2 {:.6} C2_hat {:.6}", adj.c1, adj.c2, adj.c2_hat);

    let part = partition(&m)?;
    println!(
        "cone slopes s1 {:.6} s2 {:.6} s3 {:.6}",
        part.s1, part.s2, part.s3
    );
    Ok(())
}
