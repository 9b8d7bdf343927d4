//! One-dimensional ruin: ultimate and finite-time probabilities, the
//! saddle-point asymptotics in `(x, t)` and the conditional limit laws.

use crate::error::{Result, RuinError};
use crate::models::{saddle, ClaimDriver, LineModel};
use crate::numerics::{
    bessel_i_scaled, integrate_adaptive, integrate_upper_tail, ln_normal_cdf, QuadSettings,
};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum FiniteMethod {
    /// Spectral integral over `[s-, s+]`.
    ExactCpe,
    /// Integral of the Bessel-form ruin-time density.
    ExactCpeDensity,
    ExactBrownian,
    AhAsymptotic,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FiniteRuinResult {
    pub value: f64,
    pub method: FiniteMethod,
    pub quad_err: f64,
}

/// `ψ(x,t)`, `P(t < τ < ∞)` and `P(τ > t)`, each computed without subtracting
/// nearby numbers.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FiniteParts {
    pub ruin_by: f64,
    pub ruin_after: f64,
    pub survival: f64,
    pub quad_err: f64,
}

fn check_args(x: f64, t: f64) -> Result<()> {
    if !(x >= 0.0 && x.is_finite()) {
        return Err(RuinError::OutOfRange(format!(
            "reserve must be finite and nonnegative, got {x}"
        )));
    }
    if !(t >= 0.0) || t.is_nan() {
        return Err(RuinError::OutOfRange(format!(
            "time must be nonnegative, got {t}"
        )));
    }
    Ok(())
}

fn cpe_params(model: &LineModel) -> Result<(f64, f64, f64)> {
    match model.driver() {
        ClaimDriver::CompoundPoissonExp { lambda, mu } => Ok((lambda, mu, model.p())),
        ClaimDriver::StandardBrownian => Err(RuinError::UnsupportedDriver(
            "expected compound Poisson".into(),
        )),
        ClaimDriver::Renewal { .. } => Err(RuinError::UnsupportedDriver(
            "no finite-time formula for renewal drivers; use Monte Carlo".into(),
        )),
    }
}

/// `ψ(x) = C e^{-γx}`, or 1 without a positive drift.
pub fn ultimate_ruin(model: &LineModel, x: f64) -> Result<f64> {
    check_args(x, 0.0)?;
    if !model.driver().is_levy() {
        return Err(RuinError::UnsupportedDriver(
            "renewal constants are not available".into(),
        ));
    }
    match model.closed_form_adjustment() {
        Some((g, c)) => Ok(c * (-g * x).exp()),
        None => Ok(1.0),
    }
}

/// Density of the ruin time `τ(x)` at `t`.
pub fn ruin_time_density(model: &LineModel, x: f64, t: f64) -> Result<f64> {
    check_args(x, t)?;
    match model.driver() {
        ClaimDriver::CompoundPoissonExp { lambda, mu } => {
            Ok(cpe_density(lambda, mu, model.p(), x, t))
        }
        ClaimDriver::StandardBrownian => {
            if t == 0.0 {
                return Ok(0.0);
            }
            let m = model.p();
            Ok(x / ((2.0 * PI).sqrt() * t.powf(1.5)) * (-(x + m * t).powi(2) / (2.0 * t)).exp())
        }
        ClaimDriver::Renewal { .. } => Err(RuinError::UnsupportedDriver(
            "renewal ruin-time density".into(),
        )),
    }
}

fn cpe_density(lambda: f64, mu: f64, p: f64, x: f64, s: f64) -> f64 {
    if s == 0.0 {
        return lambda * (-mu * x).exp();
    }
    let r = x + p * s;
    let z = 2.0 * (lambda * mu * s * r).sqrt();
    let i1_term = if z < 1e-8 {
        1.0
    } else {
        2.0 / z * bessel_i_scaled(1, z)
    };
    let mix = x / r * bessel_i_scaled(0, z) + p * s / r * i1_term;
    // -(λ+μp)s + z without cancellation for large s
    let eps = x / (p * s);
    let root_gap = eps / ((1.0 + eps).sqrt() + 1.0);
    let expo = -(lambda.sqrt() - (mu * p).sqrt()).powi(2) * s
        + 2.0 * (lambda * mu * p).sqrt() * s * root_gap;
    lambda * (-mu * x + expo).exp() * mix
}

fn density_settings() -> QuadSettings {
    QuadSettings {
        abs_tol: 1e-300,
        rel_tol: 1e-11,
        max_panels: 2000,
        initial_panels: 8,
    }
}

fn integrate_breaks<F: Fn(f64) -> f64>(f: &F, breaks: &[f64]) -> Result<(f64, f64)> {
    let s = density_settings();
    let (mut v, mut e) = (0.0, 0.0);
    for w in breaks.windows(2) {
        if w[1] > w[0] {
            let q = integrate_adaptive(f, w[0], w[1], &s)?;
            v += q.value;
            e += q.err;
        }
    }
    Ok((v, e))
}

/// Head `∫_0^t` and tail `∫_t^∞` of the ruin-time density.
fn cpe_density_split(lambda: f64, mu: f64, p: f64, x: f64, t: f64) -> Result<(f64, f64, f64)> {
    let f = |s: f64| cpe_density(lambda, mu, p, x, s);
    let h = 0.25 / (lambda + mu * p);
    let s_minus = (lambda.sqrt() - (mu * p).sqrt()).powi(2);
    // typical ruin time: reserve over the speed of the drift conditioned on ruin
    let speed = if lambda / mu > p {
        lambda / mu - p
    } else {
        mu * p * p / lambda - p
    };
    let s_star = if speed > 0.0 { x / speed } else { x / p };

    let mut head_breaks = vec![0.0];
    let mut b = h;
    while b < t {
        head_breaks.push(b);
        b *= 2.0;
    }
    if s_star > 0.0 && s_star < t {
        head_breaks.push(s_star);
    }
    head_breaks.push(t);
    head_breaks.sort_by(f64::total_cmp);
    let (head, e1) = integrate_breaks(&f, &head_breaks)?;

    let mut tail_breaks = vec![t];
    let mut d = h.max(t);
    let mut last = t;
    for _ in 0..240 {
        last = t + d;
        tail_breaks.push(last);
        if last > 4.0 * s_star && (last * s_minus > 60.0 || f(last) * last < 1e-20) {
            break;
        }
        d *= 2.0;
    }
    if s_star > t && s_star < last {
        tail_breaks.push(s_star);
        tail_breaks.sort_by(f64::total_cmp);
    }
    let (mid, e2) = integrate_breaks(&f, &tail_breaks)?;
    // a power-law remainder (zero drift) is left in the error estimate
    let rest = f(last) * last;
    if rest < 1e-20 {
        return Ok((head, mid, e1 + e2 + 2.0 * rest));
    }
    let q = integrate_upper_tail(f, last, last, &density_settings())?;
    Ok((head, mid + q.value, e1 + e2 + q.err))
}

fn brownian_parts(m: f64, x: f64, t: f64) -> FiniteParts {
    let ult = if m > 0.0 { (-2.0 * m * x).exp() } else { 1.0 };
    if t == 0.0 {
        let by = if x == 0.0 { 1.0 } else { 0.0 };
        return FiniteParts {
            ruin_by: by,
            ruin_after: ult - by,
            survival: 1.0 - by,
            quad_err: 0.0,
        };
    }
    let st = t.sqrt();
    let l1 = ln_normal_cdf(-(x + m * t) / st);
    let l2 = -2.0 * m * x + ln_normal_cdf((m * t - x) / st);
    let hi = l1.max(l2);
    let ruin_by = if hi == f64::NEG_INFINITY {
        0.0
    } else {
        (hi + ((l1 - hi).exp() + (l2 - hi).exp()).ln()).exp()
    };
    if m > 0.0 {
        let l3 = -2.0 * m * x + ln_normal_cdf((x - m * t) / st);
        let after = if l3 == f64::NEG_INFINITY {
            0.0
        } else {
            (l3.exp() * -(l1 - l3).exp_m1()).max(0.0)
        };
        FiniteParts {
            ruin_by,
            ruin_after: after,
            survival: -(-2.0 * m * x).exp_m1() + after,
            quad_err: 0.0,
        }
    } else {
        let la = ln_normal_cdf((x + m * t) / st);
        let surv = if la == f64::NEG_INFINITY {
            0.0
        } else {
            (la.exp() * -(l2 - la).exp_m1()).max(0.0)
        };
        FiniteParts {
            ruin_by,
            ruin_after: surv,
            survival: surv,
            quad_err: 0.0,
        }
    }
}

/// Finite-time decomposition used by the two-dimensional engine.
pub fn finite_parts(model: &LineModel, x: f64, t: f64) -> Result<FiniteParts> {
    check_args(x, t)?;
    match model.driver() {
        ClaimDriver::StandardBrownian => Ok(brownian_parts(model.p(), x, t)),
        ClaimDriver::CompoundPoissonExp { lambda, mu } => {
            let p = model.p();
            let gamma = mu - lambda / p;
            let ult = if gamma > 0.0 {
                lambda / (mu * p) * (-gamma * x).exp()
            } else {
                1.0
            };
            let base = if gamma > 0.0 { 1.0 - ult } else { 0.0 };
            if t == 0.0 {
                return Ok(FiniteParts {
                    ruin_by: 0.0,
                    ruin_after: ult,
                    survival: 1.0,
                    quad_err: 0.0,
                });
            }
            let (head, tail, err) = cpe_density_split(lambda, mu, p, x, t)?;
            let defect = (head + tail - ult).abs();
            Ok(FiniteParts {
                ruin_by: head.min(1.0),
                ruin_after: tail,
                survival: (base + tail).min(1.0),
                quad_err: err + defect,
            })
        }
        ClaimDriver::Renewal { .. } => Err(RuinError::UnsupportedDriver(
            "no finite-time formula for renewal drivers; use Monte Carlo".into(),
        )),
    }
}

/// Spectral value of `w(x,t)` with its quadrature error and absolute mass.
fn cpe_spectral_w(lambda: f64, mu: f64, p: f64, x: f64, t: f64) -> Result<(f64, f64, f64)> {
    let sq_l = lambda.sqrt();
    let sq_mp = (mu * p).sqrt();
    let s_minus = (sq_l - sq_mp).powi(2);
    let s_plus = (sq_l + sq_mp).powi(2);
    if s_minus <= 1e-14 * s_plus {
        return Err(RuinError::BoundaryVelocity {
            v: lambda,
            boundary: mu * p,
        });
    }
    let span = s_plus - s_minus;
    let g = |u: f64| {
        let (su, cu) = u.sin_cos();
        let q = s_minus + span * su * su;
        let dq = 2.0 * span * su * cu;
        let a = (lambda - mu * p - q) / (2.0 * p);
        let disc = (4.0 * p * q * mu - (lambda - mu * p - q).powi(2)).max(0.0);
        let b = disc.sqrt() / (2.0 * p);
        let arg = ((p * mu + lambda - q) / (2.0 * (lambda * mu * p).sqrt())).clamp(-1.0, 1.0);
        let phi = arg.acos();
        (a * x - q * t).exp() * (b * x + phi).sin() / q * dq
    };
    let settings = QuadSettings {
        abs_tol: 1e-300,
        rel_tol: 1e-12,
        max_panels: 4000,
        initial_panels: 16,
    };
    let q = integrate_adaptive(g, 0.0, 0.5 * PI, &settings)?;
    let pref = (lambda / (mu * p)).sqrt() / PI;
    Ok((pref * q.value, pref * q.err, pref * q.abs_mass))
}

/// `ψ(x,t)` from the spectral representation with no fallback:
/// `1 - ψ(x,t) = [1 - Ce^{-γx}] 1(γ>0) + w(x,t)`.
pub fn finite_ruin_spectral(model: &LineModel, x: f64, t: f64) -> Result<FiniteRuinResult> {
    check_args(x, t)?;
    let (lambda, mu, p) = cpe_params(model)?;
    if t == 0.0 {
        return Ok(FiniteRuinResult {
            value: 0.0,
            method: FiniteMethod::ExactCpe,
            quad_err: 0.0,
        });
    }
    let gamma = mu - lambda / p;
    let base = if gamma > 0.0 {
        1.0 - lambda / (mu * p) * (-gamma * x).exp()
    } else {
        0.0
    };
    let (w, err, abs_mass) = cpe_spectral_w(lambda, mu, p, x, t)?;
    let raw = 1.0 - (base + w);
    Ok(FiniteRuinResult {
        value: raw.clamp(0.0, 1.0),
        method: FiniteMethod::ExactCpe,
        quad_err: err + abs_mass * 4.0 * f64::EPSILON,
    })
}

/// `ψ(x,t)`. For compound Poisson the spectral integral is used when it is
/// well conditioned, the density integral otherwise.
pub fn finite_ruin(model: &LineModel, x: f64, t: f64) -> Result<FiniteRuinResult> {
    check_args(x, t)?;
    match model.driver() {
        ClaimDriver::StandardBrownian => {
            let parts = brownian_parts(model.p(), x, t);
            Ok(FiniteRuinResult {
                value: parts.ruin_by,
                method: FiniteMethod::ExactBrownian,
                quad_err: 0.0,
            })
        }
        ClaimDriver::CompoundPoissonExp { .. } => {
            if let Ok(r) = finite_ruin_spectral(model, x, t) {
                if r.quad_err <= 1e-9 * r.value.min(1.0 - r.value) {
                    return Ok(r);
                }
            }
            let parts = finite_parts(model, x, t)?;
            Ok(FiniteRuinResult {
                value: parts.ruin_by,
                method: FiniteMethod::ExactCpeDensity,
                quad_err: parts.quad_err,
            })
        }
        ClaimDriver::Renewal { .. } => Err(RuinError::UnsupportedDriver(
            "no finite-time formula for renewal drivers; use Monte Carlo".into(),
        )),
    }
}

/// `P(t < τ(x) < ∞)`.
pub fn ruin_after(model: &LineModel, x: f64, t: f64) -> Result<f64> {
    Ok(finite_parts(model, x, t)?.ruin_after.max(0.0))
}

/// `P(τ(x) > t)`.
pub fn survival(model: &LineModel, x: f64, t: f64) -> Result<f64> {
    Ok(finite_parts(model, x, t)?.survival)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum AhBranch {
    /// `C e^{-ζx}`
    Cramer,
    /// `|D(v)| t^{-1/2} e^{-tκ*(-v)}`
    Saddle,
}

/// Both branches of the `(x,t)` asymptotics and which one describes `ψ(x,t)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AhBranches {
    pub v: f64,
    pub zeta: f64,
    pub constant: f64,
    pub critical_velocity: f64,
    pub d: f64,
    pub cramer: f64,
    pub saddle: f64,
    /// Branch for `ψ(x,t)`; `w(x,t)` takes the other one.
    pub ruin_by_branch: AhBranch,
}

impl AhBranches {
    pub fn ruin_by(&self) -> f64 {
        match self.ruin_by_branch {
            AhBranch::Cramer => self.cramer,
            AhBranch::Saddle => self.saddle,
        }
    }

    pub fn ruin_after(&self) -> f64 {
        match self.ruin_by_branch {
            AhBranch::Cramer => self.saddle,
            AhBranch::Saddle => self.cramer,
        }
    }
}

/// `c(v) = (θ'_v - θ_v)/(θ_v θ'_v)`.
pub fn c_of_v(theta_v: f64, theta_conj: f64) -> f64 {
    (theta_conj - theta_v) / (theta_v * theta_conj)
}

pub fn ah_branches(model: &LineModel, x: f64, t: f64) -> Result<AhBranches> {
    check_args(x, t)?;
    if !model.driver().is_levy() {
        return Err(RuinError::UnsupportedDriver("renewal driver".into()));
    }
    if !(t > 0.0 && x > 0.0) {
        return Err(RuinError::OutOfRange(
            "asymptotics need x > 0 and t > 0".into(),
        ));
    }
    let v = x / t;
    let (zeta, constant) = match model.closed_form_adjustment() {
        Some((g, c)) => (g, c),
        None => (0.0, 1.0),
    };
    let critical = -model.k1(-zeta);
    if (v - critical).abs() <= 1e-6 * critical.abs().max(1e-300) {
        return Err(RuinError::BoundaryVelocity {
            v,
            boundary: critical,
        });
    }
    let sd = saddle(model, v)?;
    let d = c_of_v(sd.theta_v, sd.theta_v_conj) / (2.0 * PI * sd.kpp).sqrt();
    Ok(AhBranches {
        v,
        zeta,
        constant,
        critical_velocity: critical,
        d,
        cramer: constant * (-zeta * x).exp(),
        saddle: d.abs() / t.sqrt() * (-t * sd.kstar).exp(),
        ruin_by_branch: if v < critical {
            AhBranch::Cramer
        } else {
            AhBranch::Saddle
        },
    })
}

/// Regime-correct asymptotic value of `ψ(x,t)`.
pub fn ah_asymptotic(model: &LineModel, x: f64, t: f64) -> Result<FiniteRuinResult> {
    let b = ah_branches(model, x, t)?;
    Ok(FiniteRuinResult {
        value: b.ruin_by(),
        method: FiniteMethod::AhAsymptotic,
        quad_err: 0.0,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LimitSide {
    ConditionedOnSurvival,
    ConditionedOnRuin,
}

/// Limit law of `X(t)` given survival (or ruin) by `t`, started at `x = vt`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LimitLaw {
    pub side: LimitSide,
    pub theta_v: f64,
    pub theta_v_conj: f64,
    pub c_v: f64,
}

impl LimitLaw {
    pub fn density(&self, y: f64) -> f64 {
        let (th, thc) = (self.theta_v, self.theta_v_conj);
        match self.side {
            LimitSide::ConditionedOnSurvival => {
                if y <= 0.0 {
                    0.0
                } else {
                    ((-th * y).exp() - (-thc * y).exp()) / self.c_v
                }
            }
            LimitSide::ConditionedOnRuin => {
                let e = if y > 0.0 {
                    (-thc * y).exp()
                } else {
                    (-th * y).exp()
                };
                e / self.c_v.abs()
            }
        }
    }

    pub fn cdf(&self, y: f64) -> f64 {
        let (th, thc) = (self.theta_v, self.theta_v_conj);
        match self.side {
            LimitSide::ConditionedOnSurvival => {
                if y <= 0.0 {
                    0.0
                } else {
                    ((-(-th * y).exp_m1()) / th - (-(-thc * y).exp_m1()) / thc) / self.c_v
                }
            }
            LimitSide::ConditionedOnRuin => {
                let c = self.c_v.abs();
                if y <= 0.0 {
                    (-th * y).exp() / (-th) / c
                } else {
                    self.mass_negative() + (-(-thc * y).exp_m1()) / thc / c
                }
            }
        }
    }

    pub fn mass_negative(&self) -> f64 {
        match self.side {
            LimitSide::ConditionedOnSurvival => 0.0,
            LimitSide::ConditionedOnRuin => 1.0 / (-self.theta_v * self.c_v.abs()),
        }
    }

    pub fn mass_positive(&self) -> f64 {
        match self.side {
            LimitSide::ConditionedOnSurvival => 1.0,
            LimitSide::ConditionedOnRuin => 1.0 / (self.theta_v_conj * self.c_v.abs()),
        }
    }
}

pub fn limit_law(model: &LineModel, v: f64, side: LimitSide) -> Result<LimitLaw> {
    let mean_velocity = -model.drift();
    match side {
        LimitSide::ConditionedOnSurvival if !(v > 0.0 && v < mean_velocity) => {
            return Err(RuinError::OutOfRange(format!(
                "survival side needs 0 < v < -κ'(0) = {mean_velocity}, got {v}"
            )))
        }
        LimitSide::ConditionedOnRuin if !(v > mean_velocity.max(0.0)) => {
            return Err(RuinError::OutOfRange(format!(
                "ruin side needs v > -κ'(0) = {mean_velocity}, got {v}"
            )))
        }
        _ => {}
    }
    let sd = saddle(model, v)?;
    let (th, thc) = (sd.theta_v, sd.theta_v_conj);
    let signs_ok = match side {
        LimitSide::ConditionedOnSurvival => thc > th && th > 0.0,
        LimitSide::ConditionedOnRuin => thc > 0.0 && th < 0.0,
    };
    if !signs_ok {
        return Err(RuinError::OutOfRange(format!(
            "shifts θ_v = {th}, θ'_v = {thc} do not give a proper density on this side"
        )));
    }
    Ok(LimitLaw {
        side,
        theta_v: th,
        theta_v_conj: thc,
        c_v: c_of_v(th, thc),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::tilt;
    use crate::numerics::normal_cdf;

    fn cpe(lambda: f64, mu: f64, p: f64) -> LineModel {
        LineModel::new(ClaimDriver::CompoundPoissonExp { lambda, mu }, p).unwrap()
    }

    fn bm(p: f64) -> LineModel {
        LineModel::new(ClaimDriver::StandardBrownian, p).unwrap()
    }

    // (λ, μ, p, x, t) → ψ(x,t) from 30-digit quadrature of the ruin-time density
    const CPE_TABLE: [(f64, f64, f64, f64, f64, f64); 5] = [
        (1.0, 2.0, 1.0, 1.0, 2.0, 0.125_928_358_686_537_7),
        (1.0, 2.0, 1.0, 5.0, 5.0, 0.001_770_738_299_411_8),
        (1.0, 2.0, 3.0, 2.0, 1.0, 0.005_632_644_955_818_9),
        (2.0, 1.0, 1.0, 1.0, 3.0, 0.795_932_249_234_242_9),
        (1.0, 2.0, 1.0, 0.0, 1.0, 0.366_204_626_241_073_8),
    ];

    #[test]
    fn ultimate_examples() {
        assert!((ultimate_ruin(&cpe(1.0, 2.0, 3.0), 0.0).unwrap() - 1.0 / 6.0).abs() < 1e-15);
        assert!((ultimate_ruin(&bm(1.0), 1.0).unwrap() - (-2f64).exp()).abs() < 1e-15);
        assert!(
            (ultimate_ruin(&cpe(1.0, 2.0, 1.0), 2.0).unwrap() - 0.5 * (-2f64).exp()).abs() < 1e-15
        );
        assert_eq!(ultimate_ruin(&cpe(2.0, 1.0, 1.0), 2.0).unwrap(), 1.0);
    }

    #[test]
    fn both_cpe_routes_match_reference() {
        for (l, m, p, x, t, want) in CPE_TABLE {
            let line = cpe(l, m, p);
            let spec = finite_ruin_spectral(&line, x, t).unwrap().value;
            let dens = finite_parts(&line, x, t).unwrap().ruin_by;
            assert!((spec - want).abs() < 1e-12, "spectral {spec} vs {want}");
            assert!(
                (dens - want).abs() < 1e-12 * want.max(1e-3),
                "density {dens} vs {want}"
            );
        }
    }

    #[test]
    fn brownian_example() {
        let want = 1.0 - (normal_cdf(2.0) - (-2f64).exp() * 0.5);
        let r = finite_ruin(&bm(1.0), 1.0, 1.0).unwrap();
        assert_eq!(r.method, FiniteMethod::ExactBrownian);
        assert!((r.value - want).abs() < 1e-15);
        assert!((r.value - 0.090_417_7).abs() < 1e-7);
        let after = ruin_after(&bm(1.0), 1.0, 1.0).unwrap();
        assert!((after - ((-2f64).exp() - want)).abs() < 1e-15);
    }

    #[test]
    fn long_horizon_reaches_ultimate() {
        for line in [cpe(1.0, 2.0, 1.0), cpe(1.0, 2.0, 3.0), bm(1.0)] {
            let psi = ultimate_ruin(&line, 1.0).unwrap();
            let r = finite_ruin(&line, 1.0, 1e6).unwrap();
            assert!((r.value - psi).abs() < 1e-6);
            assert!(ruin_after(&line, 1.0, 1e6).unwrap() < 1e-6);
        }
    }

    #[test]
    fn zero_horizon() {
        let line = cpe(1.0, 2.0, 1.0);
        assert_eq!(
            ruin_after(&line, 1.0, 0.0).unwrap(),
            ultimate_ruin(&line, 1.0).unwrap()
        );
        assert_eq!(finite_ruin(&line, 1.0, 0.0).unwrap().value, 0.0);
    }

    #[test]
    fn parts_are_consistent() {
        for line in [
            cpe(1.0, 2.0, 1.0),
            tilt(&cpe(1.0, 2.0, 3.0), -5.0 / 3.0).unwrap().line,
            bm(0.7),
            tilt(&bm(1.0), -2.0).unwrap().line,
        ] {
            for (x, t) in [(0.5, 0.3), (2.0, 4.0), (10.0, 3.0)] {
                let pr = finite_parts(&line, x, t).unwrap();
                let psi = ultimate_ruin(&line, x).unwrap();
                assert!((pr.ruin_by + pr.survival - 1.0).abs() < 1e-10);
                assert!((pr.ruin_by + pr.ruin_after - psi).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn negative_drift_is_eventually_certain() {
        let line = tilt(&cpe(1.0, 2.0, 1.0), -1.0).unwrap().line;
        assert!(line.drift() < 0.0);
        let r = finite_ruin(&line, 2.0, 1e4).unwrap();
        assert!((r.value - 1.0).abs() < 1e-10);
    }

    #[test]
    fn monotone_in_t_and_x() {
        let line = cpe(1.0, 2.0, 1.0);
        let mut prev = 0.0;
        for k in 1..=20 {
            let v = finite_ruin(&line, 1.0, 0.5 * k as f64).unwrap();
            assert!(v.value + 2.0 * v.quad_err >= prev);
            prev = v.value;
        }
        let mut prev = 1.0;
        for k in 0..=20 {
            let v = finite_ruin(&line, 0.5 * k as f64, 3.0).unwrap();
            assert!(v.value <= prev + 2.0 * v.quad_err);
            prev = v.value;
        }
    }

    #[test]
    fn spectral_refuses_zero_gamma() {
        let line = cpe(2.0, 1.0, 2.0);
        assert!(matches!(
            finite_ruin_spectral(&line, 1.0, 1.0),
            Err(RuinError::BoundaryVelocity { .. })
        ));
        let r = finite_ruin(&line, 1.0, 1.0);
        assert!(r.is_ok(), "{r:?}");
    }

    #[test]
    fn renewal_is_refused() {
        let line = LineModel::new(
            ClaimDriver::Renewal {
                interarrival: crate::models::Distribution::Deterministic { value: 1.0 },
                claim: crate::models::Distribution::Exponential { rate: 2.0 },
            },
            1.0,
        )
        .unwrap();
        assert!(matches!(
            finite_ruin(&line, 1.0, 1.0),
            Err(RuinError::UnsupportedDriver(_))
        ));
    }

    #[test]
    fn ah_examples() {
        let line = cpe(1.0, 2.0, 1.0);
        let b = ah_branches(&line, 5.0, 10.0).unwrap();
        assert!((b.critical_velocity - 1.0).abs() < 1e-14);
        assert_eq!(b.ruin_by_branch, AhBranch::Cramer);
        assert!((b.ruin_by() - 0.5 * (-5f64).exp()).abs() < 1e-15);

        let b = ah_branches(&bm(1.0), 4.0, 1.0).unwrap();
        assert_eq!(b.ruin_by_branch, AhBranch::Saddle);
        let d = 8.0 / 15.0 / (2.0 * PI).sqrt();
        assert!((b.d.abs() - d).abs() < 1e-12);
        assert!((b.saddle - d * (-12.5f64).exp()).abs() < 1e-15);

        assert!(matches!(
            ah_asymptotic(&line, 3.0, 3.0),
            Err(RuinError::BoundaryVelocity { .. })
        ));
    }

    #[test]
    fn ah_ratio_improves_along_rays() {
        let line = cpe(1.0, 2.0, 1.0);
        for v in [0.5, 1.5] {
            let ratio = |t: f64| {
                let x = v * t;
                let b = ah_branches(&line, x, t).unwrap();
                let pr = finite_parts(&line, x, t).unwrap();
                match b.ruin_by_branch {
                    AhBranch::Cramer => pr.ruin_after / b.ruin_after(),
                    AhBranch::Saddle => pr.ruin_by / b.ruin_by(),
                }
            };
            let (r100, r400) = (ratio(100.0), ratio(400.0));
            assert!((r400 - 1.0).abs() < 0.15, "v={v}: {r400}");
            assert!((r400 - 1.0).abs() < (r100 - 1.0).abs());
        }
    }

    #[test]
    fn limit_law_examples() {
        assert!(matches!(
            limit_law(&bm(1.0), 0.5, LimitSide::ConditionedOnSurvival),
            Err(RuinError::OutOfRange(_))
        ));
        let neg = tilt(&cpe(1.0, 2.0, 1.0), -1.0).unwrap().line;
        let law = limit_law(&neg, 0.5, LimitSide::ConditionedOnSurvival).unwrap();
        let q = integrate_upper_tail(|y| law.density(y), 0.0, 1.0, &QuadSettings::relative(1e-13))
            .unwrap();
        assert!((q.value - 1.0).abs() < 1e-10);
        assert!((law.cdf(1e3) - 1.0).abs() < 1e-12);

        for v in [1.5, 3.0] {
            let law = limit_law(&neg, v, LimitSide::ConditionedOnRuin).unwrap();
            assert!((law.mass_negative() + law.mass_positive() - 1.0).abs() < 1e-10);
            assert!((law.cdf(0.0) - law.mass_negative()).abs() < 1e-14);
        }
        let law = limit_law(
            &tilt(&bm(1.0), -2.0).unwrap().line,
            2.0,
            LimitSide::ConditionedOnRuin,
        )
        .unwrap();
        assert!((law.mass_negative() + law.mass_positive() - 1.0).abs() < 1e-12);
    }
}
