//! Claim drivers, line models and their cumulant calculus.

use crate::error::{Result, RuinError};
use crate::numerics::{integrate_upper_tail, root_solve, QuadSettings, ToleranceConfig};
use rand::Rng;
use rand_distr::{Distribution as _, Exp1, Gamma as GammaSampler};
use serde::{Deserialize, Serialize};

/// A nonnegative law with a known moment generating function.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Distribution {
    Exponential {
        rate: f64,
    },
    Deterministic {
        value: f64,
    },
    Gamma {
        shape: f64,
        rate: f64,
    },
    /// Support `[scale, ∞)`; no exponential moments for positive arguments.
    Pareto {
        shape: f64,
        scale: f64,
    },
}

impl Distribution {
    pub fn validate(&self) -> Result<()> {
        let ok = match *self {
            Distribution::Exponential { rate } => rate > 0.0 && rate.is_finite(),
            Distribution::Deterministic { value } => value > 0.0 && value.is_finite(),
            Distribution::Gamma { shape, rate } => {
                shape > 0.0 && rate > 0.0 && shape.is_finite() && rate.is_finite()
            }
            Distribution::Pareto { shape, scale } => {
                shape > 1.0 && scale > 0.0 && shape.is_finite() && scale.is_finite()
            }
        };
        if ok {
            Ok(())
        } else {
            Err(RuinError::InvalidModel(format!(
                "bad distribution parameters {self:?}"
            )))
        }
    }

    pub fn mean(&self) -> f64 {
        match *self {
            Distribution::Exponential { rate } => 1.0 / rate,
            Distribution::Deterministic { value } => value,
            Distribution::Gamma { shape, rate } => shape / rate,
            Distribution::Pareto { shape, scale } => shape * scale / (shape - 1.0),
        }
    }

    /// Supremum of the arguments with a finite mgf (open interval).
    pub fn mgf_upper(&self) -> f64 {
        match *self {
            Distribution::Exponential { rate } | Distribution::Gamma { rate, .. } => rate,
            Distribution::Deterministic { .. } => f64::INFINITY,
            Distribution::Pareto { .. } => 0.0,
        }
    }

    /// `E[e^{sY}]`, or `None` where it is infinite.
    pub fn mgf(&self, s: f64) -> Option<f64> {
        if s == 0.0 {
            return Some(1.0);
        }
        if s >= self.mgf_upper() {
            return None;
        }
        match *self {
            Distribution::Exponential { rate } => Some(rate / (rate - s)),
            Distribution::Deterministic { value } => Some((s * value).exp()),
            Distribution::Gamma { shape, rate } => Some((rate / (rate - s)).powf(shape)),
            Distribution::Pareto { shape, scale } => {
                let dens =
                    |y: f64| shape * scale.powf(shape) * y.powf(-shape - 1.0) * (s * y).exp();
                integrate_upper_tail(dens, scale, scale, &QuadSettings::relative(1e-12))
                    .ok()
                    .map(|q| q.value)
            }
        }
    }

    /// The law with density proportional to `e^{sy}` times the original one.
    pub fn tilted(&self, s: f64) -> Result<Distribution> {
        if s >= self.mgf_upper() {
            return Err(RuinError::OutOfDomain {
                value: s,
                lower: f64::NEG_INFINITY,
                upper: self.mgf_upper(),
            });
        }
        match *self {
            Distribution::Exponential { rate } => Ok(Distribution::Exponential { rate: rate - s }),
            Distribution::Deterministic { .. } => Ok(*self),
            Distribution::Gamma { shape, rate } => Ok(Distribution::Gamma {
                shape,
                rate: rate - s,
            }),
            Distribution::Pareto { .. } if s == 0.0 => Ok(*self),
            Distribution::Pareto { .. } => Err(RuinError::UnsupportedDriver(
                "tilted Pareto laws are not available".into(),
            )),
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match *self {
            Distribution::Exponential { rate } => {
                let e: f64 = Exp1.sample(rng);
                e / rate
            }
            Distribution::Deterministic { value } => value,
            Distribution::Gamma { shape, rate } => GammaSampler::new(shape, 1.0 / rate)
                .expect("validated gamma parameters")
                .sample(rng),
            Distribution::Pareto { shape, scale } => {
                let u: f64 = rng.random();
                scale * (1.0 - u).powf(-1.0 / shape)
            }
        }
    }
}

/// The law of the aggregate claim process `S`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ClaimDriver {
    CompoundPoissonExp {
        lambda: f64,
        mu: f64,
    },
    StandardBrownian,
    Renewal {
        interarrival: Distribution,
        claim: Distribution,
    },
}

impl ClaimDriver {
    pub fn validate(&self) -> Result<()> {
        match *self {
            ClaimDriver::CompoundPoissonExp { lambda, mu } => {
                if lambda > 0.0 && mu > 0.0 && lambda.is_finite() && mu.is_finite() {
                    Ok(())
                } else {
                    Err(RuinError::InvalidModel(format!(
                        "compound Poisson needs lambda > 0 and mu > 0, got lambda={lambda}, mu={mu}"
                    )))
                }
            }
            ClaimDriver::StandardBrownian => Ok(()),
            ClaimDriver::Renewal {
                interarrival,
                claim,
            } => {
                interarrival.validate()?;
                claim.validate()
            }
        }
    }

    pub fn is_levy(&self) -> bool {
        !matches!(self, ClaimDriver::Renewal { .. })
    }

    pub fn name(&self) -> &'static str {
        match self {
            ClaimDriver::CompoundPoissonExp { .. } => "cpe",
            ClaimDriver::StandardBrownian => "brownian",
            ClaimDriver::Renewal { .. } => "renewal",
        }
    }
}

/// One coordinate `X(t) = x + p t - S(t)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LineModel {
    driver: ClaimDriver,
    p: f64,
}

impl LineModel {
    pub fn new(driver: ClaimDriver, p: f64) -> Result<Self> {
        driver.validate()?;
        if !(p > 0.0 && p.is_finite()) {
            return Err(RuinError::InvalidModel(format!(
                "premium rate must be positive, got {p}"
            )));
        }
        Ok(LineModel { driver, p })
    }

    /// Tilted Brownian lines may carry any real drift.
    pub(crate) fn with_drift(driver: ClaimDriver, p: f64) -> Self {
        LineModel { driver, p }
    }

    pub fn driver(&self) -> ClaimDriver {
        self.driver
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    fn levy_only(&self) -> Result<()> {
        if self.driver.is_levy() {
            Ok(())
        } else {
            Err(RuinError::UnsupportedDriver(
                "the renewal driver has no cumulant exponent; use renewal_adjustment or Monte Carlo".into(),
            ))
        }
    }

    fn check_domain(&self, theta: f64) -> Result<()> {
        self.levy_only()?;
        let lo = self.theta_lower();
        if theta > lo && theta.is_finite() {
            Ok(())
        } else {
            Err(RuinError::OutOfDomain {
                value: theta,
                lower: lo,
                upper: f64::INFINITY,
            })
        }
    }

    /// Lower end of the domain of κ.
    pub fn theta_lower(&self) -> f64 {
        match self.driver {
            ClaimDriver::CompoundPoissonExp { mu, .. } => -mu,
            ClaimDriver::StandardBrownian => f64::NEG_INFINITY,
            ClaimDriver::Renewal { claim, .. } => -claim.mgf_upper(),
        }
    }

    /// `lim κ'(θ)` as θ decreases to the lower domain end.
    pub fn v_lower(&self) -> f64 {
        f64::NEG_INFINITY
    }

    pub(crate) fn k0(&self, theta: f64) -> f64 {
        match self.driver {
            ClaimDriver::CompoundPoissonExp { lambda, mu } => {
                self.p * theta - lambda * theta / (mu + theta)
            }
            ClaimDriver::StandardBrownian => 0.5 * theta * theta + self.p * theta,
            ClaimDriver::Renewal { .. } => f64::NAN,
        }
    }

    pub(crate) fn k1(&self, theta: f64) -> f64 {
        match self.driver {
            ClaimDriver::CompoundPoissonExp { lambda, mu } => {
                let d = mu + theta;
                self.p - lambda * mu / (d * d)
            }
            ClaimDriver::StandardBrownian => theta + self.p,
            ClaimDriver::Renewal { .. } => f64::NAN,
        }
    }

    pub(crate) fn k2(&self, theta: f64) -> f64 {
        match self.driver {
            ClaimDriver::CompoundPoissonExp { lambda, mu } => {
                let d = mu + theta;
                2.0 * lambda * mu / (d * d * d)
            }
            ClaimDriver::StandardBrownian => 1.0,
            ClaimDriver::Renewal { .. } => f64::NAN,
        }
    }

    /// Cumulant exponent `κ(θ) = log E e^{θ(X(1)-x)}`.
    pub fn kappa(&self, theta: f64) -> Result<f64> {
        self.check_domain(theta)?;
        if theta == 0.0 {
            return Ok(0.0);
        }
        Ok(self.k0(theta))
    }

    pub fn kappa1(&self, theta: f64) -> Result<f64> {
        self.check_domain(theta)?;
        Ok(self.k1(theta))
    }

    pub fn kappa2(&self, theta: f64) -> Result<f64> {
        self.check_domain(theta)?;
        Ok(self.k2(theta))
    }

    /// Mean drift per unit time.
    pub fn drift(&self) -> f64 {
        match self.driver {
            ClaimDriver::CompoundPoissonExp { lambda, mu } => self.p - lambda / mu,
            ClaimDriver::StandardBrownian => self.p,
            ClaimDriver::Renewal {
                interarrival,
                claim,
            } => self.p - claim.mean() / interarrival.mean(),
        }
    }

    pub fn net_profit(&self) -> bool {
        self.drift() > 0.0
    }

    /// The θ with `κ'(θ) = s`, for Lévy drivers.
    pub fn theta_for_slope(&self, s: f64) -> Result<f64> {
        self.levy_only()?;
        match self.driver {
            ClaimDriver::CompoundPoissonExp { lambda, mu } => {
                if !(s < self.p) {
                    return Err(RuinError::OutOfRange(format!(
                        "slope {s} is not below the premium rate {}",
                        self.p
                    )));
                }
                Ok(-mu + (lambda * mu / (self.p - s)).sqrt())
            }
            ClaimDriver::StandardBrownian => Ok(s - self.p),
            ClaimDriver::Renewal { .. } => unreachable!(),
        }
    }

    /// Minimiser of κ.
    pub fn theta_min(&self) -> Result<f64> {
        self.theta_for_slope(0.0)
    }

    /// Closed-form adjustment coefficient and Cramér constant, when the net-profit condition holds.
    pub fn closed_form_adjustment(&self) -> Option<(f64, f64)> {
        if !self.net_profit() {
            return None;
        }
        match self.driver {
            ClaimDriver::CompoundPoissonExp { lambda, mu } => {
                Some((mu - lambda / self.p, lambda / (mu * self.p)))
            }
            ClaimDriver::StandardBrownian => Some((2.0 * self.p, 1.0)),
            ClaimDriver::Renewal { .. } => None,
        }
    }

    /// Adjustment coefficient γ with `κ(-γ) = 0`: the closed form, verified by a bracketed root.
    pub fn gamma(&self) -> Result<f64> {
        self.levy_only()?;
        let (g, _) = self.closed_form_adjustment().ok_or_else(|| {
            RuinError::NoAdjustment(format!(
                "net-profit condition fails: drift {}",
                self.drift()
            ))
        })?;
        let root = self.gamma_by_root()?;
        if (root - g).abs() > 1e-10 * g.max(1.0) {
            return Err(RuinError::CrossCheck(format!(
                "adjustment coefficient: closed form {g} vs root {root}"
            )));
        }
        Ok(g)
    }

    fn gamma_by_root(&self) -> Result<f64> {
        let tol = ToleranceConfig::default();
        let f = |s: f64| self.k0(-s);
        let hi = self.upper_bracket(f, 1.0)?;
        root_solve(f, (hi * 1e-9, hi), &tol)
    }

    /// Largest root `s` of `κ(-s) = κ(-g)`, i.e. the other zero of the tilted exponent.
    pub(crate) fn upper_bracket<F: Fn(f64) -> f64>(&self, f: F, start: f64) -> Result<f64> {
        match self.driver {
            ClaimDriver::CompoundPoissonExp { mu, .. } => Ok(mu * (1.0 - 1e-12)),
            _ => {
                let mut hi = start.max(1e-3);
                for _ in 0..200 {
                    if f(hi) > 0.0 {
                        return Ok(hi);
                    }
                    hi *= 2.0;
                }
                Err(RuinError::NoSignChange { lo: 0.0, hi })
            }
        }
    }

    /// Cramér constant `C = -κ'(0)/κ'(-γ)`.
    pub fn cramer_constant(&self) -> Result<f64> {
        let g = self.gamma()?;
        Ok(-self.k1(0.0) / self.k1(-g))
    }
}

/// The degenerate pair: both lines driven by the same `S`, premium rates `p1 > p2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoLineModel {
    pub driver: ClaimDriver,
    pub p1: f64,
    pub p2: f64,
    pub line1: LineModel,
    pub line2: LineModel,
}

impl TwoLineModel {
    pub fn new(driver: ClaimDriver, p1: f64, p2: f64) -> Result<Self> {
        let line1 = LineModel::new(driver, p1)?;
        let line2 = LineModel::new(driver, p2)?;
        if !(p1 > p2) {
            return Err(RuinError::InvalidModel(format!(
                "premium rates must satisfy p1 > p2, got p1={p1}, p2={p2}"
            )));
        }
        Ok(TwoLineModel {
            driver,
            p1,
            p2,
            line1,
            line2,
        })
    }

    pub fn line(&self, i: usize) -> &LineModel {
        if i == 1 {
            &self.line1
        } else {
            &self.line2
        }
    }

    /// `ā = 1 + (p1 - p2)/v̲`.
    pub fn a_bar(&self) -> f64 {
        1.0 + (self.p1 - self.p2) / self.line2.v_lower()
    }

    pub fn check_net_profit(&self) -> Result<()> {
        for (i, l) in [(1, &self.line1), (2, &self.line2)] {
            if !l.net_profit() {
                return Err(RuinError::InvalidModel(format!(
                    "net-profit condition fails on line {i}: mean drift {} <= 0",
                    l.drift()
                )));
            }
        }
        Ok(())
    }
}

/// A line viewed under the exponentially tilted measure `P^(c)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TiltedModel {
    pub base: LineModel,
    pub shift: f64,
    pub line: LineModel,
}

pub fn tilt(model: &LineModel, c: f64) -> Result<TiltedModel> {
    model.check_domain(c)?;
    let line = match model.driver {
        ClaimDriver::CompoundPoissonExp { lambda, mu } => LineModel {
            driver: ClaimDriver::CompoundPoissonExp {
                lambda: lambda * mu / (mu + c),
                mu: mu + c,
            },
            p: model.p,
        },
        ClaimDriver::StandardBrownian => {
            LineModel::with_drift(ClaimDriver::StandardBrownian, model.p + c)
        }
        ClaimDriver::Renewal { .. } => unreachable!(),
    };
    Ok(TiltedModel {
        base: *model,
        shift: c,
        line,
    })
}

pub fn cumulant(model: &LineModel, theta: f64) -> Result<f64> {
    model.kappa(theta)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AdjustmentData {
    pub gamma1: f64,
    pub gamma2: f64,
    pub gamma3: f64,
    pub gamma_tilde: f64,
    pub zeta1: f64,
    pub zeta2: f64,
    pub c1: f64,
    pub c2: f64,
    pub c2_hat: f64,
}

pub fn adjustment(model2: &TwoLineModel) -> Result<AdjustmentData> {
    let (l1, l2) = (&model2.line1, &model2.line2);
    let g1 = l1.gamma()?;
    let g2 = l2.gamma()?;
    let c1 = l1.cramer_constant()?;
    let c2 = l2.cramer_constant()?;
    for (name, closed, general) in [
        ("C1", l1.closed_form_adjustment().map(|x| x.1), c1),
        ("C2", l2.closed_form_adjustment().map(|x| x.1), c2),
    ] {
        if let Some(cf) = closed {
            if (cf - general).abs() > 1e-10 * cf.abs().max(1.0) {
                return Err(RuinError::CrossCheck(format!(
                    "{name}: closed form {cf} vs {general}"
                )));
            }
        }
    }
    let g3 = gamma3(model2, g2)?;
    let c2_hat = if g3 > g2 {
        -c2 * l1.k1(-g2) / l1.k1(-g3)
    } else {
        c2
    };
    Ok(AdjustmentData {
        gamma1: g1,
        gamma2: g2,
        gamma3: g3,
        gamma_tilde: g3 - g2,
        zeta1: g1,
        zeta2: g2,
        c1,
        c2,
        c2_hat,
    })
}

fn gamma3(model2: &TwoLineModel, g2: f64) -> Result<f64> {
    let l1 = &model2.line1;
    if l1.k1(-g2) <= 0.0 {
        return Ok(g2);
    }
    let target = l1.k0(-g2);
    let f = |s: f64| l1.k0(-s) - target;
    let lo = -l1.theta_min()?;
    let hi = l1.upper_bracket(f, 2.0 * lo)?;
    let root = root_solve(f, (lo, hi), &ToleranceConfig::default())?;
    let closed = match model2.driver {
        ClaimDriver::CompoundPoissonExp { lambda, mu } => {
            let rho = lambda / mu;
            Some(g2 + mu / model2.p2 * (rho - model2.p2 * model2.p2 / model2.p1))
        }
        ClaimDriver::StandardBrownian => Some(2.0 * model2.p1 - 2.0 * model2.p2),
        ClaimDriver::Renewal { .. } => None,
    };
    if let Some(c) = closed {
        if (c - root).abs() > 1e-10 * c.max(1.0) {
            return Err(RuinError::CrossCheck(format!(
                "gamma3: closed form {c} vs root {root}"
            )));
        }
        return Ok(c);
    }
    Ok(root)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SaddleData {
    pub v: f64,
    pub theta_v: f64,
    pub theta_v_conj: f64,
    pub kstar: f64,
    pub kpp: f64,
}

/// The other solution `θ' > θ` of `κ(θ') = κ(θ)`, for θ left of the minimiser.
pub fn conjugate(model: &LineModel, theta: f64) -> Result<f64> {
    model.check_domain(theta)?;
    let tmin = model.theta_min()?;
    if theta > tmin {
        return Err(RuinError::NoConjugate(theta));
    }
    if theta == tmin {
        return Ok(theta);
    }
    let level = model.k0(theta);
    let g = |th: f64| model.k0(th) - level;
    let step = (tmin - theta).max(1.0);
    let mut hi = tmin + step;
    let mut found = false;
    for _ in 0..200 {
        if g(hi) > 0.0 {
            found = true;
            break;
        }
        hi = tmin + 2.0 * (hi - tmin);
    }
    if !found {
        return Err(RuinError::NoConjugate(theta));
    }
    let tol = ToleranceConfig {
        root_abs_tol: 1e-13 * step.max(hi.abs()),
        ..ToleranceConfig::default()
    };
    let mut r = root_solve(g, (tmin, hi), &tol)?;
    // Newton polish; κ' > 0 to the right of the minimiser
    for _ in 0..3 {
        let d = model.k1(r);
        if !(d > 0.0) {
            break;
        }
        let next = r - g(r) / d;
        if !(next > tmin && next < hi) || g(next).abs() >= g(r).abs() {
            break;
        }
        r = next;
    }
    Ok(r)
}

/// `κ*(-v) = sup_β [-vβ - κ(β)]`.
pub fn legendre(model: &LineModel, v: f64) -> Result<f64> {
    let th = model.theta_for_slope(-v)?;
    Ok(-v * th - model.k0(th))
}

pub fn saddle(model: &LineModel, v: f64) -> Result<SaddleData> {
    model.levy_only()?;
    if !(v > 0.0 && v < -model.v_lower()) {
        return Err(RuinError::OutOfRange(format!(
            "velocity {v} must lie in (0, -v_lower)"
        )));
    }
    let theta_v = model.theta_for_slope(-v)?;
    let theta_v_conj = conjugate(model, theta_v)?;
    Ok(SaddleData {
        v,
        theta_v,
        theta_v_conj,
        kstar: -v * theta_v - model.k0(theta_v),
        kpp: model.k2(theta_v),
    })
}

pub fn joint_cumulant(model2: &TwoLineModel, theta1: f64, theta2: f64) -> Result<f64> {
    Ok(model2.line1.kappa(theta1 + theta2)? - theta2 * (model2.p1 - model2.p2))
}

/// Maps raw reserves, premiums and proportions to canonical coordinates.
pub fn scale_to_canonical(
    u1: f64,
    u2: f64,
    c1: f64,
    c2: f64,
    delta1: f64,
    delta2: f64,
) -> Result<(f64, f64, f64, f64)> {
    if !(delta1 > 0.0 && delta2 > 0.0) || (delta1 + delta2 - 1.0).abs() > 1e-12 {
        return Err(RuinError::InvalidProportions(format!(
            "need delta1, delta2 > 0 with delta1 + delta2 = 1, got ({delta1}, {delta2})"
        )));
    }
    Ok((u1 / delta1, u2 / delta2, c1 / delta1, c2 / delta2))
}

/// Positive root of `E[e^{-γpζ}] E[e^{γσ}] = 1` for a renewal driver.
pub fn renewal_adjustment(driver: &ClaimDriver, p: f64) -> Result<f64> {
    let (interarrival, claim) = match *driver {
        ClaimDriver::Renewal {
            interarrival,
            claim,
        } => (interarrival, claim),
        ClaimDriver::CompoundPoissonExp { lambda, mu } => (
            Distribution::Exponential { rate: lambda },
            Distribution::Exponential { rate: mu },
        ),
        ClaimDriver::StandardBrownian => {
            return Err(RuinError::UnsupportedDriver(
                "Brownian driver has no renewal structure".into(),
            ))
        }
    };
    driver.validate()?;
    let upper = claim.mgf_upper();
    if !(upper > 0.0) {
        return Err(RuinError::NoAdjustment(
            "claim mgf is infinite for every positive argument".into(),
        ));
    }
    let h = |g: f64| -> f64 {
        match (interarrival.mgf(-g * p), claim.mgf(g)) {
            (Some(a), Some(b)) => a * b - 1.0,
            _ => f64::INFINITY,
        }
    };
    let span = if upper.is_finite() { upper } else { 1.0 };
    // scan for the first negative point, then the first positive point after it
    let mut lo = None;
    let mut hi = None;
    let grid = 400;
    for k in 1..=grid * 64 {
        let g = if upper.is_finite() {
            upper * (k as f64 / grid as f64).min(1.0 - 1e-12)
        } else {
            span * k as f64 / grid as f64
        };
        if upper.is_finite() && k > grid {
            break;
        }
        let v = h(g);
        if v < 0.0 && lo.is_none() {
            lo = Some(g);
        }
        if v > 0.0 && lo.is_some() {
            hi = Some(g);
            break;
        }
    }
    match (lo, hi) {
        (Some(a), Some(b)) => root_solve(h, (a, b), &ToleranceConfig::default()),
        _ => Err(RuinError::NoAdjustment(
            "Lundberg equation has no sign change in the claim mgf domain".into(),
        )),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cpe(lambda: f64, mu: f64, p: f64) -> LineModel {
        LineModel::new(ClaimDriver::CompoundPoissonExp { lambda, mu }, p).unwrap()
    }

    fn bm(p: f64) -> LineModel {
        LineModel::new(ClaimDriver::StandardBrownian, p).unwrap()
    }

    #[test]
    fn scaling_examples() {
        assert_eq!(
            scale_to_canonical(1.0, 1.0, 1.5, 0.5, 0.5, 0.5).unwrap(),
            (2.0, 2.0, 3.0, 1.0)
        );
        let (x1, x2, p1, p2) = scale_to_canonical(0.6, 0.8, 1.8, 0.4, 0.6, 0.4).unwrap();
        for (got, want) in [(x1, 1.0), (x2, 2.0), (p1, 3.0), (p2, 1.0)] {
            assert!((got - want).abs() < 1e-15);
        }
        assert!(matches!(
            scale_to_canonical(2.0, 3.0, 3.0, 1.0, 1.0, 0.0),
            Err(RuinError::InvalidProportions(_))
        ));
    }

    #[test]
    fn cumulant_examples() {
        assert!((cpe(1.0, 2.0, 3.0).kappa(-1.0).unwrap() + 2.0).abs() < 1e-15);
        assert_eq!(cpe(1.0, 2.0, 3.0).kappa(0.0).unwrap(), 0.0);
        assert_eq!(bm(1.0).kappa(-2.0).unwrap(), 0.0);
        assert!(matches!(
            cpe(1.0, 2.0, 3.0).kappa(-2.0),
            Err(RuinError::OutOfDomain { .. })
        ));
    }

    #[test]
    fn adjustment_of_reference_model() {
        let m = TwoLineModel::new(
            ClaimDriver::CompoundPoissonExp {
                lambda: 1.0,
                mu: 2.0,
            },
            3.0,
            1.0,
        )
        .unwrap();
        let a = adjustment(&m).unwrap();
        assert!((a.gamma1 - 5.0 / 3.0).abs() < 1e-14);
        assert!((a.gamma2 - 1.0).abs() < 1e-14);
        assert!((a.c1 - 1.0 / 6.0).abs() < 1e-14);
        assert!((a.c2 - 0.5).abs() < 1e-14);
        assert!((a.gamma3 - 4.0 / 3.0).abs() < 1e-12);
        assert!((a.gamma_tilde - 1.0 / 3.0).abs() < 1e-12);
        assert!((m.line1.kappa(-a.gamma3).unwrap() + 2.0).abs() < 1e-12);
        assert!((a.c2_hat - 1.0 / 3.0).abs() < 1e-12);
        assert!((a.c2_hat - m.p2 / m.p1).abs() < 1e-12);
    }

    #[test]
    fn degenerate_gamma3() {
        let m = TwoLineModel::new(ClaimDriver::StandardBrownian, 3.0, 2.0).unwrap();
        let a = adjustment(&m).unwrap();
        assert_eq!(a.gamma3, a.gamma2);
        assert_eq!(a.c2_hat, a.c2);
    }

    #[test]
    fn tilt_examples() {
        let m = cpe(1.0, 2.0, 3.0);
        let t = tilt(&m, -5.0 / 3.0).unwrap();
        match t.line.driver() {
            ClaimDriver::CompoundPoissonExp { lambda, mu } => {
                assert!((lambda - 6.0).abs() < 1e-12);
                assert!((mu - 1.0 / 3.0).abs() < 1e-12);
            }
            _ => panic!(),
        }
        let t = tilt(&m, -1.0).unwrap();
        assert_eq!(
            t.line.driver(),
            ClaimDriver::CompoundPoissonExp {
                lambda: 2.0,
                mu: 1.0
            }
        );
        assert!((t.line.drift() - 1.0).abs() < 1e-15);
        assert_eq!(tilt(&m, 0.0).unwrap().line, m);
    }

    #[test]
    fn saddle_examples() {
        let s = saddle(&bm(1.0), 4.0).unwrap();
        assert!((s.theta_v + 5.0).abs() < 1e-14);
        assert!((s.theta_v_conj - 3.0).abs() < 1e-11);
        assert!((s.kstar - 12.5).abs() < 1e-12);

        let m = cpe(1.0, 2.0, 1.0);
        let s = saddle(&m, 5.0).unwrap();
        assert!((s.theta_v - (-2.0 + 1.0 / 3f64.sqrt())).abs() < 1e-14);
        // grid maximisation of -5β - κ(β)
        let mut best = f64::NEG_INFINITY;
        let n = 400_000;
        for i in 1..n {
            let b = -2.0 + 4.0 * i as f64 / n as f64;
            best = best.max(-5.0 * b - m.k0(b));
        }
        assert!((s.kstar - best).abs() < 1e-8);
        assert!((s.kstar - 6.071_796_769_724_491).abs() < 1e-12);
        let k = m.k0(s.theta_v);
        let closed = -k * 2.0 / (1.0 * s.theta_v);
        assert!((s.theta_v_conj - closed).abs() < 1e-11);
    }

    #[test]
    fn saddle_at_mean_drift() {
        // negative drift line: κ'(0) = -1, so v = 1 is the mean velocity
        let line = tilt(&cpe(1.0, 2.0, 1.0), -1.0).unwrap().line;
        let s = saddle(&line, 1.0).unwrap();
        assert!(s.theta_v.abs() < 1e-15);
        assert!(s.kstar.abs() < 1e-15);
    }

    #[test]
    fn joint_cumulant_examples() {
        let m = TwoLineModel::new(
            ClaimDriver::CompoundPoissonExp {
                lambda: 1.0,
                mu: 2.0,
            },
            3.0,
            1.0,
        )
        .unwrap();
        assert_eq!(joint_cumulant(&m, 0.0, 0.0).unwrap(), 0.0);
        assert!(joint_cumulant(&m, -5.0 / 3.0, 0.0).unwrap().abs() < 1e-14);
        assert!(joint_cumulant(&m, 0.0, -1.0).unwrap().abs() < 1e-14);
        assert!((joint_cumulant(&m, -1.0, 0.0).unwrap() + 2.0).abs() < 1e-14);
    }

    #[test]
    fn renewal_examples() {
        let poisson = ClaimDriver::Renewal {
            interarrival: Distribution::Exponential { rate: 1.0 },
            claim: Distribution::Exponential { rate: 2.0 },
        };
        assert!((renewal_adjustment(&poisson, 3.0).unwrap() - 5.0 / 3.0).abs() < 1e-11);
        let det = ClaimDriver::Renewal {
            interarrival: Distribution::Deterministic { value: 1.0 },
            claim: Distribution::Exponential { rate: 2.0 },
        };
        let g = renewal_adjustment(&det, 1.0).unwrap();
        assert!(((-g).exp() * 2.0 / (2.0 - g) - 1.0).abs() < 1e-12);
        let heavy = ClaimDriver::Renewal {
            interarrival: Distribution::Exponential { rate: 1.0 },
            claim: Distribution::Pareto {
                shape: 3.0,
                scale: 0.5,
            },
        };
        assert!(matches!(
            renewal_adjustment(&heavy, 2.0),
            Err(RuinError::NoAdjustment(_))
        ));
    }

    #[test]
    fn rejects_bad_models() {
        assert!(TwoLineModel::new(ClaimDriver::StandardBrownian, 1.0, 3.0).is_err());
        assert!(LineModel::new(
            ClaimDriver::CompoundPoissonExp {
                lambda: -1.0,
                mu: 2.0
            },
            1.0
        )
        .is_err());
        let m = TwoLineModel::new(
            ClaimDriver::CompoundPoissonExp {
                lambda: 1.0,
                mu: 2.0,
            },
            3.0,
            0.4,
        )
        .unwrap();
        assert!(m.check_net_profit().is_err());
        assert!(matches!(adjustment(&m), Err(RuinError::NoAdjustment(_))));
    }
}
