//! Exact OR, SIM and AND ruin probabilities, with the Brownian closed forms as a check.

use quadrant_ruin::models::{ClaimDriver, TwoLineModel};
use quadrant_ruin::twodim::{brownian_closed_forms, cone_for, exact_triple, Event};

fn main() -> quadrant_ruin::Result<()> {
    let cpe = TwoLineModel::new(
        ClaimDriver::CompoundPoissonExp {
            lambda: 1.0,
            mu: 2.0,
        },
        3.0,
        1.0,
    )?;
    println!(
        "{:>4} {:>4} {:>12} {:>12} {:>12}  cone(and)",
        "x1", "x2", "or", "sim", "and"
    );
    for (x1, x2) in [(1.0, 3.0), (2.0, 2.0), (4.0, 1.0), (5.0, 8.0)] {
        let t = exact_triple(&cpe, x1, x2)?;
        let cone = cone_for(&cpe, x1, x2, Event::And)?;
        println!(
            "{x1:>4} {x2:>4} {:>12.6e} {:>12.6e} {:>12.6e}  {}",
            t.or,
            t.sim,
            t.and,
            cone.as_str()
        );
        // complementarity
        assert!((t.or + t.and - t.psi1 - t.psi2).abs() <= 2.0 * t.quad_err);
    }

    let bm = TwoLineModel::new(ClaimDriver::StandardBrownian, 3.0, 1.0)?;
    let t = exact_triple(&bm, 1.0, 3.0)?;
    let (or, sim, and) = brownian_closed_forms(&bm, 1.0, 3.0)?;
    println!(
        "brownian assembly  {:.12e} {:.12e} {:.12e}",
        t.or, t.sim, t.and
    );
    println!("brownian closed    {or:.12e} {sim:.12e} {and:.12e}");
    Ok(())
}
