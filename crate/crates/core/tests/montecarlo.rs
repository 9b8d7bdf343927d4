use quadrant_ruin::error::RuinError;
use quadrant_ruin::finite_time::LimitSide;
use quadrant_ruin::models::{adjustment, ClaimDriver, LineModel, TwoLineModel};
use quadrant_ruin::montecarlo::{
    check_limits, default_tilt, estimate, estimate_line, simulate, CensorReason, Horizon,
    LimitCheck, SimConfig,
};
use quadrant_ruin::twodim::{exact_triple, Event};

fn cpe2() -> TwoLineModel {
    TwoLineModel::new(
        ClaimDriver::CompoundPoissonExp {
            lambda: 1.0,
            mu: 2.0,
        },
        3.0,
        1.0,
    )
    .unwrap()
}

fn cpe_line() -> LineModel {
    LineModel::new(
        ClaimDriver::CompoundPoissonExp {
            lambda: 1.0,
            mu: 2.0,
        },
        1.0,
    )
    .unwrap()
}

fn config(n: u64, seed: u64) -> SimConfig {
    SimConfig {
        n,
        seed,
        ..SimConfig::default()
    }
}

#[test]
fn path_records_are_consistent() {
    for m in [
        cpe2(),
        TwoLineModel::new(ClaimDriver::StandardBrownian, 3.0, 1.0).unwrap(),
    ] {
        for r in simulate(&m, 1.0, 3.0, &config(5_000, 3)).unwrap() {
            let min = match (r.tau1, r.tau2) {
                (Some(a), Some(b)) => Some(a.min(b)),
                (a, b) => a.or(b),
            };
            assert_eq!(r.tau_or, min);
            if let Some(ts) = r.tau_sim {
                assert!(ts >= r.tau1.unwrap() && ts >= r.tau2.unwrap());
            }
            assert_eq!(r.likelihood_weight, 1.0);
            if r.tau_or.is_none() {
                assert_ne!(r.censor_reason, CensorReason::NotCensored);
            }
        }
    }
}

#[test]
fn tilted_weight_matches_cumulant_form() {
    let m = cpe2();
    let c = default_tilt(&m, Event::Or).unwrap();
    let cfg = SimConfig {
        tilt: Some(c),
        ..config(2_000, 4)
    };
    // κ of the claim surplus per unit time under the base measure
    let rate = -1.0 * c / (2.0 + c);
    for r in simulate(&m, 1.0, 3.0, &cfg).unwrap() {
        let s = 1.0 + 3.0 * r.t_stop - r.reserves[0];
        assert!((s - (3.0 + r.t_stop - r.reserves[1])).abs() < 1e-9);
        let want = (c * s + rate * r.t_stop).exp();
        assert!(
            (r.likelihood_weight / want - 1.0).abs() < 1e-9,
            "{} vs {want}",
            r.likelihood_weight
        );
    }
}

#[test]
fn tilting_reduces_relative_error() {
    let line = cpe_line();
    for x in [10.0, 15.0] {
        let crude = estimate_line(&line, x, &config(50_000, 5)).unwrap();
        let tilted = estimate_line(
            &line,
            x,
            &SimConfig {
                tilt: Some(-1.0),
                ..config(50_000, 5)
            },
        )
        .unwrap();
        assert!(tilted.relative_error() < crude.relative_error(), "x = {x}");
    }
}

#[test]
fn safe_level_bias_is_within_declared_bound() {
    let m = cpe2();
    let g2 = adjustment(&m).unwrap().gamma2;
    let at = |l: f64| {
        let cfg = SimConfig {
            horizon: Horizon::SafeLevel { level: Some(l) },
            ..config(100_000, 6)
        };
        estimate(&m, 1.0, 3.0, Event::Or, &cfg).unwrap()
    };
    let (short, long) = (at(20.0 / g2), at(40.0 / g2));
    // common random numbers: only paths that pass the lower level and ruin later differ
    assert!((short.p_hat - long.p_hat).abs() <= short.bias_bound.unwrap());
}

#[test]
fn zero_reserves_sanity_band() {
    let m = cpe2();
    let exact = exact_triple(&m, 0.0, 0.0).unwrap().or;
    let e = estimate(&m, 0.0, 0.0, Event::Or, &config(50_000, 7)).unwrap();
    assert!(e.p_hat > 0.0 && e.p_hat <= 1.0);
    assert!(e.covers(exact, 4.0));
}

#[test]
fn default_tilt_estimates_cover_exact() {
    for m in [
        cpe2(),
        TwoLineModel::new(ClaimDriver::StandardBrownian, 3.0, 1.0).unwrap(),
    ] {
        let exact = exact_triple(&m, 2.0, 4.0).unwrap();
        for event in [Event::Or, Event::Sim, Event::And] {
            let cfg = SimConfig {
                tilt: Some(default_tilt(&m, event).unwrap()),
                ..config(40_000, 8)
            };
            let e = estimate(&m, 2.0, 4.0, event, &cfg).unwrap();
            assert!(
                e.covers(exact.get(event), 4.0),
                "{:?} {event:?}: {} vs {}",
                m.driver,
                e.p_hat,
                exact.get(event)
            );
        }
    }
}

#[test]
fn lln_example_on_tilted_line() {
    let tilted = quadrant_ruin::models::tilt(&cpe_line(), -1.0).unwrap().line;
    assert!((tilted.drift() + 1.0).abs() < 1e-12);
    let r = check_limits(&tilted, LimitCheck::LlnRuinTime, &config(5_000, 9)).unwrap();
    assert!(r.pass, "{r:?}");
}

#[test]
fn lln_needs_negative_drift() {
    assert!(check_limits(&cpe_line(), LimitCheck::LlnRuinTime, &config(100, 1)).is_err());
}

#[test]
fn too_few_conditioned_paths_is_an_error() {
    let bm = LineModel::new(ClaimDriver::StandardBrownian, 1.0).unwrap();
    let what = LimitCheck::LimitLaw {
        v: 2.0,
        side: LimitSide::ConditionedOnRuin,
    };
    match check_limits(&bm, what, &config(500, 1)) {
        Err(RuinError::InsufficientConditionedSamples { got, need }) => assert!(got < need),
        other => panic!("{other:?}"),
    }
}
