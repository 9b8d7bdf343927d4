//! Ruin-time law of large numbers and the conditional limit laws, checked by simulation.

use quadrant_ruin::finite_time::{limit_law, LimitSide};
use quadrant_ruin::models::{tilt, ClaimDriver, LineModel};
use quadrant_ruin::montecarlo::{check_limits, LimitCheck, SimConfig};

fn main() -> quadrant_ruin::Result<()> {
    let bm = LineModel::new(ClaimDriver::StandardBrownian, 1.0)?;
    let law = limit_law(&bm, 2.0, LimitSide::ConditionedOnRuin)?;
    println!(
        "ruin side v=2: theta_v {} theta_v' {} mass below zero {:.3}",
        law.theta_v,
        law.theta_v_conj,
        law.mass_negative()
    );

    let cfg = SimConfig {
        n: 50_000,
        seed: 3,
        ..SimConfig::default()
    };
    let drifting = tilt(&bm, -2.0)?.line;
    let checks = [
        (drifting, LimitCheck::LlnRuinTime),
        (
            bm,
            LimitCheck::LimitLaw {
                v: 2.0,
                side: LimitSide::ConditionedOnRuin,
            },
        ),
        (
            tilt(&bm, -3.0)?.line,
            LimitCheck::LimitLaw {
                v: 1.0,
                side: LimitSide::ConditionedOnSurvival,
            },
        ),
    ];
    for (model, what) in checks {
        let r = check_limits(&model, what, &cfg)?;
        println!(
            "{what:?}: statistic {:.4} (threshold {}) pass {}",
            r.statistic, r.threshold, r.pass
        );
    }
    Ok(())
}
