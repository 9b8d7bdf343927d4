//! Exit rate of the SIM probability along rays and a coarse map of cone labels.

use quadrant_ruin::cones::{classify, exit_rate, partition, PartitionKind};
use quadrant_ruin::models::{ClaimDriver, TwoLineModel};
use quadrant_ruin::twodim::exact_triple;

fn main() -> quadrant_ruin::Result<()> {
    let m = TwoLineModel::new(ClaimDriver::StandardBrownian, 3.0, 1.0)?;
    let part = partition(&m)?;
    println!("slopes s1 {} s2 {} s3 {:.6}", part.s1, part.s2, part.s3);

    for a in [0.2, 0.5, 0.8, 1.5] {
        let k = 40.0;
        let empirical = -exact_triple(&m, a * k, k)?.sim.ln() / k;
        println!(
            "a {a:>4}  exit_rate {:.4}  -ln(psi_sim)/K at K=40 {empirical:.4}",
            exit_rate(&m, a)?
        );
    }

    println!("SIM cone labels, x2 down the rows and x1 across");
    for x2 in (1..=5).rev().map(|i| 2.0 * i as f64) {
        let row: Vec<String> = (1..=5)
            .map(|j| {
                classify(&m, 2.0 * j as f64, x2, PartitionKind::Sim)
                    .map(|l| format!("{:>14}", l.as_str()))
            })
            .collect::<quadrant_ruin::Result<_>>()?;
        println!("{x2:>4} {}", row.join(""));
    }
    Ok(())
}
