//! Crude and importance-sampled Monte Carlo against the exact engine.

use quadrant_ruin::models::{ClaimDriver, TwoLineModel};
use quadrant_ruin::montecarlo::{default_tilt, estimate, SimConfig};
use quadrant_ruin::twodim::{exact_triple, Event};

fn main() -> quadrant_ruin::Result<()> {
    let m = TwoLineModel::new(
        ClaimDriver::CompoundPoissonExp {
            lambda: 1.0,
            mu: 2.0,
        },
        3.0,
        1.0,
    )?;
    let (x1, x2) = (4.0, 6.0);
    let exact = exact_triple(&m, x1, x2)?;
    for event in [Event::Or, Event::Sim, Event::And] {
        let crude = SimConfig {
            n: 100_000,
            seed: 7,
            ..SimConfig::default()
        };
        let tilted = SimConfig {
            tilt: Some(default_tilt(&m, event)?),
            ..crude
        };
        for (name, cfg) in [("crude", crude), ("tilted", tilted)] {
            let e = estimate(&m, x1, x2, event, &cfg)?;
            println!(
                "{:<4} {name:<7} p_hat {:.4e} ± {:.1e}  exact {:.4e}  covered {}",
                event.as_str(),
                e.p_hat,
                e.std_err,
                exact.get(event),
                e.covers(exact.get(event), 3.0)
            );
        }
    }
    Ok(())
}
