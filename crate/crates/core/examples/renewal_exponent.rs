//! Decay rate of the OR probability for a renewal driver, predicted and fitted by simulation.

use quadrant_ruin::models::{ClaimDriver, Distribution, TwoLineModel};
use quadrant_ruin::montecarlo::{ray_exponent_fit, Horizon, SimConfig};
use quadrant_ruin::twodim::{renewal_exponents, Event};

fn main() -> quadrant_ruin::Result<()> {
    let driver = ClaimDriver::Renewal {
        interarrival: Distribution::Deterministic { value: 1.0 },
        claim: Distribution::Exponential { rate: 1.0 },
    };
    let (p1, p2, a) = (3.0, 1.2, 0.5);
    let pred = renewal_exponents(&driver, p1, p2, a)?;
    println!(
        "gamma1 {:.5} gamma2 {:.5} predicted decay {:.5}",
        pred.gamma1, pred.gamma2, pred.decay_rate
    );

    let m = TwoLineModel::new(driver, p1, p2)?;
    let cfg = SimConfig {
        n: 50_000,
        seed: 12,
        horizon: Horizon::SafeLevel { level: Some(60.0) },
        ..SimConfig::default()
    };
    let fit = ray_exponent_fit(&m, a, &[5.0, 10.0, 15.0, 20.0], Event::Or, &cfg)?;
    for (k, e) in &fit.points {
        println!("  K {k:>4}  p_hat {:.4e} ± {:.1e}", e.p_hat, e.std_err);
    }
    println!("fitted slope {:.4}", fit.slope);
    Ok(())
}
