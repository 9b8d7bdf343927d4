//! Finite-horizon ruin of one line: exact value against the saddlepoint asymptotics.

use quadrant_ruin::finite_time::{ah_asymptotic, finite_ruin, ultimate_ruin};
use quadrant_ruin::models::{ClaimDriver, LineModel};

fn main() -> quadrant_ruin::Result<()> {
    let line = LineModel::new(
        ClaimDriver::CompoundPoissonExp {
            lambda: 1.0,
            mu: 2.0,
        },
        1.0,
    )?;
    println!("ultimate ruin from x=5: {:.8}", ultimate_ruin(&line, 5.0)?);

    // along x = v t the ratio to the asymptotic tends to one
    for v in [0.25, 2.0] {
        println!("v = {v}");
        for t in [25.0, 100.0, 200.0] {
            let x = v * t;
            let exact = finite_ruin(&line, x, t)?;
            let approx = ah_asymptotic(&line, x, t)?;
            println!(
                "  t {t:>5}  exact {:.6e} ({:?})  asymptotic {:.6e}  ratio {:.4}",
                exact.value,
                exact.method,
                approx.value,
                exact.value / approx.value
            );
        }
    }
    Ok(())
}
