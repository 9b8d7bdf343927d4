use proptest::prelude::*;
use quadrant_ruin::cones::{exit_rate, partition};
use quadrant_ruin::finite_time::{limit_law, LimitSide};
use quadrant_ruin::models::{
    adjustment, joint_cumulant, saddle, tilt, ClaimDriver, LineModel, TwoLineModel,
};
use quadrant_ruin::numerics::{integrate, normal_cdf, root_solve, ToleranceConfig};
use quadrant_ruin::twodim::exact_triple;

fn line() -> impl Strategy<Value = LineModel> {
    prop_oneof![
        (0.2f64..3.0, 0.5f64..3.0, 1.1f64..4.0).prop_map(|(lambda, mu, load)| {
            LineModel::new(
                ClaimDriver::CompoundPoissonExp { lambda, mu },
                load * lambda / mu,
            )
            .unwrap()
        }),
        (0.1f64..3.0).prop_map(|p| LineModel::new(ClaimDriver::StandardBrownian, p).unwrap()),
    ]
}

fn two_line() -> impl Strategy<Value = TwoLineModel> {
    prop_oneof![
        (0.2f64..3.0, 0.5f64..3.0, 1.1f64..3.0, 1.2f64..4.0).prop_map(
            |(lambda, mu, load, ratio)| {
                let p2 = load * lambda / mu;
                TwoLineModel::new(
                    ClaimDriver::CompoundPoissonExp { lambda, mu },
                    p2 * ratio,
                    p2,
                )
                .unwrap()
            }
        ),
        (0.1f64..2.0, 1.2f64..4.0).prop_map(|(p2, ratio)| TwoLineModel::new(
            ClaimDriver::StandardBrownian,
            p2 * ratio,
            p2
        )
        .unwrap()),
    ]
}

/// Points `θ` inside the domain, up to twice the adjustment coefficient.
fn grid(m: &LineModel) -> Vec<f64> {
    let lo = m.theta_lower().max(-10.0) + 1e-3;
    let hi = 2.0 * m.gamma().unwrap();
    (0..50)
        .map(|k| lo + (hi - lo) * (k as f64 + 0.5) / 50.0)
        .collect()
}

proptest! {
    #[test]
    fn root_stays_in_bracket(r in -5.0f64..5.0, w1 in 0.01f64..3.0, w2 in 0.01f64..3.0) {
        let f = |x: f64| (x - r) * (1.0 + x * x);
        let (a, b) = (r - w1, r + w2);
        let x = root_solve(f, (a, b), &ToleranceConfig::default()).unwrap();
        prop_assert!(a <= x && x <= b);
        prop_assert!((x - r).abs() < 1e-9);
    }

    #[test]
    fn normal_cdf_symmetry(z in -8.0f64..8.0) {
        prop_assert!((normal_cdf(z) + normal_cdf(-z) - 1.0).abs() <= 1e-14);
    }

    #[test]
    fn integral_is_additive(a in -3.0f64..0.0, b in 0.0f64..2.0, c in 2.0f64..5.0, k in 0.1f64..3.0) {
        let tol = ToleranceConfig::default();
        let f = |x: f64| (k * x).sin() + x * x;
        let (ab, e1) = integrate(f, a, b, &tol).unwrap();
        let (bc, e2) = integrate(f, b, c, &tol).unwrap();
        let (ac, e3) = integrate(f, a, c, &tol).unwrap();
        prop_assert!((ab + bc - ac).abs() <= 2.0 * (e1 + e2 + e3).max(tol.quad_abs_tol));
    }

    #[test]
    fn cumulant_convex_and_derivatives_consistent(m in line()) {
        for th in grid(&m) {
            // step shrinks near the domain end, where κ''' blows up
            let h = 1e-4 * (1.0 + th.abs()).min(th - m.theta_lower());
            let (km, k0, kp) = (m.kappa(th - h).unwrap(), m.kappa(th).unwrap(), m.kappa(th + h).unwrap());
            prop_assert!(km + kp - 2.0 * k0 > 0.0);
            let d1 = (kp - km) / (2.0 * h);
            let d2 = (kp + km - 2.0 * k0) / (h * h);
            let (a1, a2) = (m.kappa1(th).unwrap(), m.kappa2(th).unwrap());
            prop_assert!((d1 - a1).abs() <= 1e-6 * a1.abs().max(1.0));
            prop_assert!((d2 - a2).abs() <= 1e-4 * a2.abs().max(1.0));
        }
    }

    #[test]
    fn tilts_compose(m in line(), f1 in 0.1f64..0.9, f2 in 0.1f64..0.9) {
        let g = m.gamma().unwrap();
        let (c1, c2) = (-f1 * g * 0.5, -f2 * g * 0.5);
        let twice = tilt(&tilt(&m, c1).unwrap().line, c2).unwrap().line;
        let once = tilt(&m, c1 + c2).unwrap().line;
        for th in [-0.3 * g, 0.0, 0.4 * g, g] {
            let (a, b) = (twice.kappa(th).unwrap(), once.kappa(th).unwrap());
            prop_assert!((a - b).abs() <= 1e-12 * a.abs().max(1.0));
        }
    }

    #[test]
    fn tilted_saddle_shifts(m in line(), f in 0.1f64..0.9, v in 0.05f64..5.0) {
        let c = -f * m.gamma().unwrap();
        let t = tilt(&m, c).unwrap().line;
        let (base, shifted) = (saddle(&m, v), saddle(&t, v));
        if let (Ok(b), Ok(s)) = (base, shifted) {
            prop_assert!((s.theta_v - (b.theta_v - c)).abs() <= 1e-9 * b.theta_v.abs().max(1.0));
            prop_assert!((s.theta_v_conj - (b.theta_v_conj - c)).abs() <= 1e-8 * b.theta_v_conj.abs().max(1.0));
        }
    }

    #[test]
    fn joint_cumulant_vanishes_at_axes(m in two_line()) {
        let adj = adjustment(&m).unwrap();
        prop_assert!(joint_cumulant(&m, -adj.gamma1, 0.0).unwrap().abs() < 1e-10);
        prop_assert!(joint_cumulant(&m, 0.0, -adj.gamma2).unwrap().abs() < 1e-10);
    }

    #[test]
    fn cone_slopes_bracket_gamma_ratio(m in two_line()) {
        let part = partition(&m).unwrap();
        let adj = adjustment(&m).unwrap();
        let r = adj.gamma2 / adj.gamma1;
        prop_assert!(part.s2 < r && r < part.s1, "{} < {r} < {}", part.s2, part.s1);
    }

    #[test]
    fn exit_rate_is_finite_and_positive(m in two_line(), a in 0.05f64..3.0) {
        let part = partition(&m).unwrap();
        prop_assume!((a - part.s1).abs() > 1e-6 && (a - part.s2).abs() > 1e-6);
        let r = exit_rate(&m, a).unwrap();
        prop_assert!(r.is_finite() && r > 0.0);
    }

    #[test]
    fn exact_triple_monotone_in_reserves(m in two_line(), x1 in 0.0f64..5.0, x2 in 0.0f64..5.0, dx in 0.05f64..1.0) {
        let t = exact_triple(&m, x1, x2).unwrap();
        for u in [exact_triple(&m, x1 + dx, x2).unwrap(), exact_triple(&m, x1, x2 + dx).unwrap()] {
            let tol = 2.0 * (t.quad_err + u.quad_err);
            prop_assert!(u.or <= t.or + tol);
            prop_assert!(u.sim <= t.sim + tol);
            prop_assert!(u.and <= t.and + tol);
        }
    }
}

#[test]
fn limit_law_densities_normalise() {
    let tol = ToleranceConfig::default();
    let cpe = LineModel::new(
        ClaimDriver::CompoundPoissonExp {
            lambda: 1.0,
            mu: 2.0,
        },
        1.0,
    )
    .unwrap();
    let bm = LineModel::new(ClaimDriver::StandardBrownian, 1.0).unwrap();
    let cases = [
        (
            tilt(&cpe, -1.0).unwrap().line,
            0.25,
            LimitSide::ConditionedOnSurvival,
        ),
        (
            tilt(&bm, -3.0).unwrap().line,
            1.0,
            LimitSide::ConditionedOnSurvival,
        ),
        (bm, 2.0, LimitSide::ConditionedOnRuin),
        (cpe, 2.0, LimitSide::ConditionedOnRuin),
    ];
    for (m, v, side) in cases {
        let law = limit_law(&m, v, side).unwrap();
        let (neg, _) = integrate(|y| law.density(y), -200.0, 0.0, &tol).unwrap();
        let (pos, _) = integrate(|y| law.density(y), 0.0, 200.0, &tol).unwrap();
        assert!(
            (neg + pos - 1.0).abs() < 1e-10,
            "{side:?} v={v}: {}",
            neg + pos
        );
        for y in [-3.0, -0.5, 0.5, 3.0] {
            assert!(law.density(y) >= 0.0);
        }
    }
}
