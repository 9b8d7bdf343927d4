//! Quadrant geometry: crossing time, cone slopes, ray classification,
//! the ray exponent `γ(a)` and the rate function.

use crate::error::{Result, RuinError};
use crate::models::{adjustment, legendre, ClaimDriver, TwoLineModel};
use serde::Serialize;

pub const RAY_TOL: f64 = 1e-9;

/// Time at which the two reserve lines meet, `((x2 - x1)/(p1 - p2))₊`.
pub fn crossing_time(x1: f64, x2: f64, p1: f64, p2: f64) -> f64 {
    if x2 <= x1 {
        0.0
    } else {
        (x2 - x1) / (p1 - p2)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConePartition {
    pub s1: f64,
    pub s2: f64,
    pub s3: f64,
    /// True iff `κ1'(-γ2) > 0`.
    pub d2_empty: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ConeLabel {
    D1,
    D0,
    D2,
    D0Hat,
    D2Hat,
    BoundaryRay,
    LowerCone,
}

impl ConeLabel {
    pub fn as_str(&self) -> &'static str {
        match self {
            ConeLabel::D1 => "D1",
            ConeLabel::D0 => "D0",
            ConeLabel::D2 => "D2",
            ConeLabel::D0Hat => "D0_hat",
            ConeLabel::D2Hat => "D2_hat",
            ConeLabel::BoundaryRay => "boundary_ray",
            ConeLabel::LowerCone => "lower_cone",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PartitionKind {
    Sim,
    And,
}

fn closed_slopes(model2: &TwoLineModel) -> Option<(f64, f64, f64)> {
    let (p1, p2) = (model2.p1, model2.p2);
    match model2.driver {
        ClaimDriver::CompoundPoissonExp { lambda, mu } => {
            let rho = lambda / mu;
            let s1 = (p1 * p1 / rho - p1) / (p1 * p1 / rho - p2);
            let s2 = (p2 * p2 / rho - p1).max(0.0) / (p2 * p2 / rho - p2);
            let s3 = if rho > p2 * p2 / p1 {
                let r = rho * p1 * p1 / (p2 * p2);
                (r - p1) / (r - p2)
            } else {
                s2
            };
            Some((s1, s2, s3))
        }
        ClaimDriver::StandardBrownian => {
            let s1 = p1 / (2.0 * p1 - p2);
            let s2 = (2.0 * p2 - p1).max(0.0) / p2;
            let s3 = if p1 > 2.0 * p2 {
                (p1 - 2.0 * p2) / (2.0 * p1 - 3.0 * p2)
            } else {
                s2
            };
            Some((s1, s2, s3))
        }
        ClaimDriver::Renewal { .. } => None,
    }
}

/// Cone slopes from derivative ratios, checked against the closed forms.
pub fn partition(model2: &TwoLineModel) -> Result<ConePartition> {
    let adj = adjustment(model2)?;
    let (l1, l2) = (&model2.line1, &model2.line2);
    let ratio = |g: f64| l1.k1(-g) / l2.k1(-g);
    let s1 = ratio(adj.gamma1);
    let d2_empty = l1.k1(-adj.gamma2) > 0.0;
    let s2 = ratio(adj.gamma2).max(0.0);
    let s3 = if d2_empty { ratio(adj.gamma3) } else { s2 };
    if let Some((c1, c2, c3)) = closed_slopes(model2) {
        for (name, a, b) in [("s1", s1, c1), ("s2", s2, c2), ("s3", s3, c3)] {
            if (a - b).abs() > 1e-10 {
                return Err(RuinError::CrossCheck(format!(
                    "{name}: derivative ratio {a} vs closed form {b}"
                )));
            }
        }
    }
    Ok(ConePartition {
        s1,
        s2,
        s3,
        d2_empty,
    })
}

fn near(a: f64, s: f64) -> bool {
    (a - s).abs() < RAY_TOL * s.max(1.0)
}

/// Cone of the ray through `(x1, x2)`, verified against the crossing-time test.
pub fn classify(model2: &TwoLineModel, x1: f64, x2: f64, kind: PartitionKind) -> Result<ConeLabel> {
    if !(x1 >= 0.0 && x2 > 0.0) {
        return Err(RuinError::OutOfRange(format!(
            "reserves must be positive, got ({x1}, {x2})"
        )));
    }
    if x2 <= x1 {
        return Ok(ConeLabel::LowerCone);
    }
    let part = partition(model2)?;
    let a = x1 / x2;
    let lower = match kind {
        PartitionKind::Sim => part.s2,
        PartitionKind::And => part.s3,
    };
    if near(a, part.s1) || near(a, lower) {
        return Ok(ConeLabel::BoundaryRay);
    }
    let label = match (kind, a > part.s1, a < lower) {
        (_, true, _) => ConeLabel::D1,
        (PartitionKind::Sim, _, true) => ConeLabel::D2,
        (PartitionKind::Sim, _, false) => ConeLabel::D0,
        (PartitionKind::And, _, true) => ConeLabel::D2Hat,
        (PartitionKind::And, _, false) => ConeLabel::D0Hat,
    };

    // the same cones through the crossing time T and T_i = x_i/(-κ_i'(-γ_i))
    let adj = adjustment(model2)?;
    let t = crossing_time(x1, x2, model2.p1, model2.p2);
    let t1 = x1 / -model2.line1.k1(-adj.gamma1);
    let g_low = match kind {
        PartitionKind::Sim => adj.gamma2,
        PartitionKind::And => adj.gamma3,
    };
    let speed2 = -model2.line2.k1(-g_low);
    let in_low = match kind {
        PartitionKind::Sim if part.d2_empty => false,
        _ => t > x2 / speed2,
    };
    let by_time = if t < t1 {
        ConeLabel::D1
    } else if in_low {
        if kind == PartitionKind::Sim {
            ConeLabel::D2
        } else {
            ConeLabel::D2Hat
        }
    } else if kind == PartitionKind::Sim {
        ConeLabel::D0
    } else {
        ConeLabel::D0Hat
    };
    if by_time != label {
        return Err(RuinError::CrossCheck(format!(
            "ray a = {a}: slope test gives {label:?}, crossing-time test gives {by_time:?}"
        )));
    }
    Ok(label)
}

/// `v_a = (p1 - p2)/(1 - a)`.
pub fn ray_velocity(model2: &TwoLineModel, a: f64) -> f64 {
    (model2.p1 - model2.p2) / (1.0 - a)
}

/// `γ(a) = κ2*(-v_a)/v_a` for `0 < a < ā`.
pub fn gamma_ray(model2: &TwoLineModel, a: f64) -> Result<f64> {
    let a_bar = model2.a_bar();
    if !(a > 0.0 && a < a_bar) {
        return Err(RuinError::OutOfRange(format!(
            "ray slope must lie in (0, {a_bar}), got {a}"
        )));
    }
    let v = ray_velocity(model2, a);
    Ok(legendre(&model2.line2, v)? / v)
}

/// Value on the diagonal, `-θ̲`.
pub fn diagonal_rate(model2: &TwoLineModel) -> f64 {
    let boundary = -model2.line2.theta_lower();
    // the same number read as the limit of γ(a) as a increases to 1
    let limit = gamma_ray(model2, 1.0 - 1e-9).unwrap_or(f64::NAN);
    log::debug!(
        "diagonal rate: infimum over the Cramér boundary {boundary}, limit a -> 1 gives {limit}"
    );
    boundary
}

/// `γ` extended to every slope `a > 0`, with `|v_a|` off the upper cone.
pub fn gamma_support(model2: &TwoLineModel, a: f64) -> Result<f64> {
    if !(a > 0.0) || !a.is_finite() {
        return Err(RuinError::OutOfRange(format!(
            "slope must be positive, got {a}"
        )));
    }
    if a == 1.0 {
        return Ok(diagonal_rate(model2));
    }
    if a < 1.0 {
        return gamma_ray(model2, a);
    }
    let v = ray_velocity(model2, a).abs();
    Ok(legendre(&model2.line2, v)? / v)
}

/// `Ĩ(x1, x2) = |x2| γ(x1/x2)` on the negative quadrant.
pub fn rate_function(model2: &TwoLineModel, x1: f64, x2: f64) -> Result<f64> {
    if !(x1 < 0.0 && x2 < 0.0) {
        return Err(RuinError::OutOfRange(format!(
            "rate function needs x1, x2 < 0, got ({x1}, {x2})"
        )));
    }
    Ok(x2.abs() * gamma_support(model2, x1 / x2)?)
}

/// Logarithmic decay rate of `ψ_sim(aK, K)`.
pub fn exit_rate(model2: &TwoLineModel, a: f64) -> Result<f64> {
    if !(a > 0.0) {
        return Err(RuinError::OutOfRange(format!(
            "slope must be positive, got {a}"
        )));
    }
    let part = partition(model2)?;
    let adj = adjustment(model2)?;
    if a <= part.s2 {
        Ok(adj.gamma2)
    } else if a >= part.s1 {
        Ok(a * adj.gamma1)
    } else {
        gamma_ray(model2, a)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cpe_ref() -> TwoLineModel {
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

    fn bm(p1: f64, p2: f64) -> TwoLineModel {
        TwoLineModel::new(ClaimDriver::StandardBrownian, p1, p2).unwrap()
    }

    #[test]
    fn crossing_times() {
        assert_eq!(crossing_time(1.0, 3.0, 3.0, 1.0), 1.0);
        assert_eq!(crossing_time(2.0, 2.0, 3.0, 1.0), 0.0);
        assert_eq!(crossing_time(0.0, 5.0, 2.0, 1.0), 5.0);
    }

    #[test]
    fn partition_examples() {
        let p = partition(&cpe_ref()).unwrap();
        assert!((p.s1 - 15.0 / 17.0).abs() < 1e-12);
        assert_eq!(p.s2, 0.0);
        assert!((p.s3 - 3.0 / 7.0).abs() < 1e-12);
        assert!(p.d2_empty);

        let p = partition(&bm(3.0, 1.0)).unwrap();
        assert!((p.s1 - 0.6).abs() < 1e-12);
        assert_eq!(p.s2, 0.0);
        assert!((p.s3 - 1.0 / 3.0).abs() < 1e-12);

        let p = partition(&bm(3.0, 2.0)).unwrap();
        assert!((p.s2 - 0.5).abs() < 1e-12);
        assert!(!p.d2_empty);
        assert_eq!(p.s3, p.s2);
    }

    #[test]
    fn classify_examples() {
        let m = cpe_ref();
        assert_eq!(
            classify(&m, 9.0, 10.0, PartitionKind::Sim).unwrap(),
            ConeLabel::D1
        );
        assert_eq!(
            classify(&m, 5.0, 10.0, PartitionKind::And).unwrap(),
            ConeLabel::D0Hat
        );
        assert_eq!(
            classify(&m, 3.0, 10.0, PartitionKind::And).unwrap(),
            ConeLabel::D2Hat
        );
        assert_eq!(
            classify(&m, 3.0, 10.0, PartitionKind::Sim).unwrap(),
            ConeLabel::D0
        );
        assert_eq!(
            classify(&m, 10.0, 10.0, PartitionKind::Sim).unwrap(),
            ConeLabel::LowerCone
        );
        assert_eq!(
            classify(&m, 15.0, 17.0, PartitionKind::Sim).unwrap(),
            ConeLabel::BoundaryRay
        );
        let b = bm(3.0, 2.0);
        assert_eq!(
            classify(&b, 0.3, 1.0, PartitionKind::Sim).unwrap(),
            ConeLabel::D2
        );
    }

    #[test]
    fn gamma_ray_examples() {
        assert!((gamma_ray(&bm(3.0, 1.0), 0.5).unwrap() - 3.125).abs() < 1e-12);
        let m = cpe_ref();
        let g = gamma_ray(&m, 0.6).unwrap();
        assert!((g - 6.071_796_769_724_491 / 5.0).abs() < 1e-12);
        assert!(g > 1.0);
        let p = partition(&m).unwrap();
        let adj = adjustment(&m).unwrap();
        assert!((gamma_ray(&m, p.s1).unwrap() - p.s1 * adj.gamma1).abs() < 1e-10);
        assert!(gamma_ray(&m, 1.0).is_err());
    }

    #[test]
    fn rate_function_examples() {
        let b = bm(3.0, 1.0);
        assert!((rate_function(&b, -0.5, -1.0).unwrap() - 3.125).abs() < 1e-12);
        let r1 = rate_function(&b, -0.7, -1.3).unwrap();
        let r2 = rate_function(&b, -1.4, -2.6).unwrap();
        assert!((r2 - 2.0 * r1).abs() < 1e-12);
        let m = cpe_ref();
        assert!(
            (rate_function(&m, -6.0, -10.0).unwrap() - 10.0 * 1.214_359_353_944_898).abs() < 1e-9
        );
        assert!(rate_function(&b, 0.5, -1.0).is_err());
        assert_eq!(rate_function(&m, -1.0, -1.0).unwrap(), 2.0);
        assert_eq!(rate_function(&b, -1.0, -1.0).unwrap(), f64::INFINITY);
    }

    #[test]
    fn exit_rate_examples() {
        assert!((exit_rate(&bm(3.0, 1.0), 0.8).unwrap() - 4.8).abs() < 1e-12);
        assert!((exit_rate(&bm(3.0, 1.0), 0.5).unwrap() - 3.125).abs() < 1e-12);
        assert!((exit_rate(&bm(3.0, 2.0), 0.3).unwrap() - 4.0).abs() < 1e-12);
    }

    #[test]
    fn exit_rate_is_continuous_at_junctions() {
        for m in [cpe_ref(), bm(3.0, 1.0), bm(3.0, 2.0)] {
            let p = partition(&m).unwrap();
            let adj = adjustment(&m).unwrap();
            assert!((gamma_ray(&m, p.s1).unwrap() - p.s1 * adj.gamma1).abs() < 1e-8);
            if p.s2 > 0.0 {
                assert!((gamma_ray(&m, p.s2).unwrap() - adj.gamma2).abs() < 1e-8);
            }
        }
    }
}
