//! Exact values against the leading and two-term expansions along a ray (aK, K).

use quadrant_ruin::models::{ClaimDriver, TwoLineModel};
use quadrant_ruin::twodim::{evaluate, Event, Method, RuinQuery};

fn main() -> quadrant_ruin::Result<()> {
    let m = TwoLineModel::new(
        ClaimDriver::CompoundPoissonExp {
            lambda: 1.0,
            mu: 2.0,
        },
        3.0,
        1.0,
    )?;
    let a = 0.3;
    for event in [Event::Or, Event::Sim, Event::And] {
        println!("{} on a = {a}", event.as_str());
        for k in [10.0, 20.0, 40.0] {
            let q = |method| RuinQuery {
                event,
                x1: a * k,
                x2: k,
                method,
            };
            let exact = evaluate(&m, &q(Method::Exact))?.value;
            let show = |method| match evaluate(&m, &q(method)) {
                Ok(r) => format!("{:.4}", r.value / exact),
                Err(e) => format!("refused ({e})"),
            };
            println!(
                "  K {k:>4}  exact {exact:.6e}  two_term/exact {}  leading/exact {}",
                show(Method::TwoTerm),
                show(Method::Leading)
            );
        }
    }
    Ok(())
}
