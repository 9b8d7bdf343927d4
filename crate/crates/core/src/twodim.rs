//! Two-dimensional ruin probabilities: exact values through tilted
//! one-dimensional finite-time ruin, two-term expansions, leading asymptotics
//! along rays and renewal exponents.

use crate::cones::{
    classify, crossing_time, gamma_ray, partition, ray_velocity, ConeLabel, PartitionKind, RAY_TOL,
};
use crate::error::{Result, RuinError};
use crate::finite_time::{finite_parts, ultimate_ruin};
use crate::models::{
    adjustment, conjugate, renewal_adjustment, tilt, AdjustmentData, ClaimDriver, LineModel,
    TwoLineModel,
};
use crate::numerics::ln_normal_cdf;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::f64::consts::PI;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Event {
    Or,
    Sim,
    And,
    Line1,
    Line2,
}

impl Event {
    pub fn as_str(&self) -> &'static str {
        match self {
            Event::Or => "or",
            Event::Sim => "sim",
            Event::And => "and",
            Event::Line1 => "line1",
            Event::Line2 => "line2",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Exact,
    TwoTerm,
    Leading,
    Mc,
}

impl Method {
    pub fn as_str(&self) -> &'static str {
        match self {
            Method::Exact => "exact",
            Method::TwoTerm => "two_term",
            Method::Leading => "leading",
            Method::Mc => "mc",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RuinQuery {
    pub event: Event,
    pub x1: f64,
    pub x2: f64,
    pub method: Method,
}

pub type Diagnostics = BTreeMap<String, f64>;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RuinEstimate {
    pub value: f64,
    pub method: Method,
    pub cone: Option<ConeLabel>,
    pub diagnostics: Diagnostics,
}

/// All three exact probabilities at one reserve pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ExactTriple {
    pub or: f64,
    pub sim: f64,
    pub and: f64,
    pub psi1: f64,
    pub psi2: f64,
    pub crossing_time: f64,
    /// Absolute error bound shared by the three values, on the scale of
    /// `psi1 + psi2`; loose for a `sim` far below that scale.
    pub quad_err: f64,
}

impl ExactTriple {
    pub fn get(&self, event: Event) -> f64 {
        match event {
            Event::Or => self.or,
            Event::Sim => self.sim,
            Event::And => self.and,
            Event::Line1 => self.psi1,
            Event::Line2 => self.psi2,
        }
    }
}

fn check_reserves(x1: f64, x2: f64) -> Result<()> {
    if x1 >= 0.0 && x2 >= 0.0 && x1.is_finite() && x2.is_finite() {
        Ok(())
    } else {
        Err(RuinError::OutOfRange(format!(
            "reserves must be finite and nonnegative, got ({x1}, {x2})"
        )))
    }
}

fn levy_only(model2: &TwoLineModel) -> Result<()> {
    if model2.driver.is_levy() {
        Ok(())
    } else {
        Err(RuinError::UnsupportedDriver(
            "renewal drivers have exponents only; use Monte Carlo for probabilities".into(),
        ))
    }
}

fn tilted(line: &LineModel, c: f64) -> Result<LineModel> {
    Ok(tilt(line, c)?.line)
}

/// Exact ψ_or, ψ_sim, ψ_and from finite-time ruin of each line under the
/// measures tilted by the other line's adjustment coefficient.
pub fn exact_triple(model2: &TwoLineModel, x1: f64, x2: f64) -> Result<ExactTriple> {
    check_reserves(x1, x2)?;
    levy_only(model2)?;
    let (l1, l2) = (&model2.line1, &model2.line2);
    let psi1 = ultimate_ruin(l1, x1)?;
    let psi2 = ultimate_ruin(l2, x2)?;
    let t = crossing_time(x1, x2, model2.p1, model2.p2);
    // closed-form parts still carry a few ulps from exp/erfc and the sums
    let rounding = 16.0 * f64::EPSILON * (psi1 + psi2);
    if t == 0.0 {
        return Ok(ExactTriple {
            or: psi2,
            sim: psi1,
            and: psi1,
            psi1,
            psi2,
            crossing_time: 0.0,
            quad_err: rounding,
        });
    }
    let adj = adjustment(model2)?;
    let p1 = finite_parts(l1, x1, t)?;
    let p1t = finite_parts(&tilted(l1, -adj.gamma2)?, x1, t)?;
    let p2 = finite_parts(l2, x2, t)?;
    let p2t = finite_parts(&tilted(l2, -adj.gamma1)?, x2, t)?;
    Ok(ExactTriple {
        or: p1.ruin_by + psi2 * p1t.survival,
        sim: p2.ruin_by + psi1 * p2t.survival,
        and: p1.ruin_after + psi2 * p1t.ruin_by,
        psi1,
        psi2,
        crossing_time: t,
        quad_err: rounding + p1.quad_err + p2.quad_err + psi2 * p1t.quad_err + psi1 * p2t.quad_err,
    })
}

fn signed_sum(pos: &[f64], neg: &[f64]) -> f64 {
    let to_sum = |ls: &[f64]| ls.iter().map(|l| l.exp()).sum::<f64>();
    to_sum(pos) - to_sum(neg)
}

/// Brownian closed forms for `(ψ_or, ψ_sim, ψ_and)` with `x2 > x1`, written
/// term by term with `a(x, p) = (x + pT)/√T` and each product formed in log space.
pub fn brownian_closed_forms(model2: &TwoLineModel, x1: f64, x2: f64) -> Result<(f64, f64, f64)> {
    check_reserves(x1, x2)?;
    if model2.driver != ClaimDriver::StandardBrownian {
        return Err(RuinError::UnsupportedDriver(
            "closed forms exist for the Brownian driver only".into(),
        ));
    }
    if x2 <= x1 {
        return Err(RuinError::OutOfRange("closed forms need x2 > x1".into()));
    }
    let (p1, p2) = (model2.p1, model2.p2);
    let t = crossing_time(x1, x2, p1, p2);
    let st = t.sqrt();
    let a = |x: f64, p: f64| (x + p * t) / st;
    let lp = ln_normal_cdf;
    let q = p1 - 2.0 * p2;
    let r = p2 - 2.0 * p1;
    let or = signed_sum(
        &[
            lp(-a(x1, p1)),
            -2.0 * p1 * x1 + lp(a(-x1, p1)),
            -2.0 * p2 * x2 + lp(a(x1, q)),
        ],
        &[-2.0 * p2 * x2 - 2.0 * x1 * q + lp(a(-x1, q))],
    );
    let sim = signed_sum(
        &[
            lp(-a(x2, p2)),
            -2.0 * p2 * x2 + lp(a(-x2, p2)),
            -2.0 * p1 * x1 + lp(a(x2, r)),
        ],
        &[-2.0 * p1 * x1 - 2.0 * x2 * r + lp(a(-x2, r))],
    );
    let and = signed_sum(
        &[
            -2.0 * p1 * x1 + lp(-a(-x1, p1)),
            -2.0 * p2 * x2 - 2.0 * x1 * q + lp(a(-x1, q)),
            -2.0 * p2 * x2 + lp(-a(x1, q)),
        ],
        &[lp(-a(x1, p1))],
    );
    Ok((or, sim, and))
}

fn agree(a: f64, b: f64, rel: f64) -> bool {
    (a - b).abs() <= rel * a.abs().max(b.abs()) || (a - b).abs() < 1e-300
}

/// Exact value of a single event; Brownian models are computed by two routes
/// that must agree to 1e-8.
pub fn exact(model2: &TwoLineModel, query: &RuinQuery) -> Result<RuinEstimate> {
    let tri = exact_triple(model2, query.x1, query.x2)?;
    let mut diagnostics = Diagnostics::new();
    diagnostics.insert("quad_err".into(), tri.quad_err);
    diagnostics.insert("crossing_time".into(), tri.crossing_time);
    if model2.driver == ClaimDriver::StandardBrownian && tri.crossing_time > 0.0 {
        let (or, sim, and) = brownian_closed_forms(model2, query.x1, query.x2)?;
        for (name, a, b) in [
            ("or", tri.or, or),
            ("sim", tri.sim, sim),
            ("and", tri.and, and),
        ] {
            if !agree(a, b, 1e-8) {
                return Err(RuinError::CrossCheck(format!(
                    "{name}: tilted decomposition {a} vs closed form {b}"
                )));
            }
        }
        let second = match query.event {
            Event::Or => or,
            Event::Sim => sim,
            Event::And => and,
            e => tri.get(e),
        };
        diagnostics.insert("closed_form".into(), second);
    }
    let cone = cone_for(model2, query.x1, query.x2, query.event).ok();
    Ok(RuinEstimate {
        value: tri.get(query.event).clamp(0.0, 1.0),
        method: Method::Exact,
        cone,
        diagnostics,
    })
}

/// Cone of `(x1, x2)` in the SIM partition, or the AND partition for `Event::And`.
pub fn cone_for(model2: &TwoLineModel, x1: f64, x2: f64, event: Event) -> Result<ConeLabel> {
    let kind = if event == Event::And {
        PartitionKind::And
    } else {
        PartitionKind::Sim
    };
    classify(model2, x1, x2, kind)
}

/// Laplace transform `ψ*(θ) = ∫_0^∞ e^{-θx} ψ(x) dx = 1/θ - κ'(0)/κ(θ)`.
pub fn psi_star(line: &LineModel, theta: f64) -> Result<f64> {
    let d = line.kappa1(0.0)?;
    if !(d > 0.0) {
        return Err(RuinError::NoAdjustment(
            "Laplace transform needs a positive drift".into(),
        ));
    }
    if theta.abs() < 1e-7 {
        return Ok(line.kappa2(0.0)? / (2.0 * d));
    }
    let k = line.kappa(theta)?;
    if k == 0.0 {
        return Err(RuinError::OutOfDomain {
            value: theta,
            lower: -line.gamma()?,
            upper: f64::INFINITY,
        });
    }
    Ok(1.0 / theta - d / k)
}

/// Laplace transform of the survival probability, `κ'(0)/κ(θ)` for `θ > 0`.
pub fn psi_bar_star(line: &LineModel, theta: f64) -> Result<f64> {
    if !(theta > 0.0) {
        return Err(RuinError::OutOfDomain {
            value: theta,
            lower: 0.0,
            upper: f64::INFINITY,
        });
    }
    Ok(line.kappa1(0.0)? / line.kappa(theta)?)
}

/// `c(θ', θ, c) = (θ' - θ)/((θ' + c)(θ + c))`.
fn c_norm(theta_conj: f64, theta: f64, c: f64) -> f64 {
    (theta_conj - theta) / ((theta_conj + c) * (theta + c))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExpansionTerms {
    pub term1: f64,
    pub term2: f64,
    pub constants: BTreeMap<String, f64>,
    pub cone: ConeLabel,
    pub velocity: f64,
}

impl ExpansionTerms {
    pub fn total(&self) -> f64 {
        self.term1 + self.term2
    }
}

fn guard_velocity(v: f64, boundary: f64) -> Result<()> {
    if (v - boundary).abs() <= 1e-6 * boundary.abs() {
        Err(RuinError::BoundaryVelocity { v, boundary })
    } else {
        Ok(())
    }
}

fn lower_cone_terms(
    model2: &TwoLineModel,
    x1: f64,
    x2: f64,
    event: Event,
) -> Result<ExpansionTerms> {
    let tri = exact_triple(model2, x1, x2)?;
    Ok(ExpansionTerms {
        term1: tri.get(event),
        term2: 0.0,
        constants: BTreeMap::new(),
        cone: ConeLabel::LowerCone,
        velocity: f64::INFINITY,
    })
}

struct Setup {
    adj: AdjustmentData,
    t: f64,
    v: f64,
}

fn setup(model2: &TwoLineModel, x1: f64, x2: f64) -> Result<Setup> {
    check_reserves(x1, x2)?;
    levy_only(model2)?;
    let adj = adjustment(model2)?;
    let t = crossing_time(x1, x2, model2.p1, model2.p2);
    Ok(Setup { adj, t, v: x2 / t })
}

/// `ψ_or ≈ ψ1(x1,T) + C̃2(v) e^{-γ2 x2} ψ̄1^{(-γ2)}(x1,T)`.
pub fn two_term_or(model2: &TwoLineModel, x1: f64, x2: f64) -> Result<ExpansionTerms> {
    let s = setup(model2, x1, x2)?;
    if s.t == 0.0 {
        return lower_cone_terms(model2, x1, x2, Event::Or);
    }
    let (l1, l2) = (&model2.line1, &model2.line2);
    let g2 = s.adj.gamma2;
    let vb = -l2.k1(-g2);
    guard_velocity(s.v, vb)?;
    let mut constants = BTreeMap::new();
    let c_tilde = if s.v > vb {
        s.adj.c2
    } else {
        let th = l2.theta_for_slope(-s.v)?;
        let th1 = conjugate(l1, th)?;
        let value = (psi_star(l2, th)? - psi_star(l2, th1)?) / c_norm(th1, th, g2);
        if let Ok(th2) = conjugate(l2, th) {
            if let (Ok(a), Ok(b)) = (psi_star(l2, th), psi_star(l2, th2)) {
                constants.insert("alt_reading".into(), (a - b) / c_norm(th2, th, g2));
            }
        }
        value
    };
    constants.insert("c_tilde2".into(), c_tilde);
    let term1 = finite_parts(l1, x1, s.t)?.ruin_by;
    let surv = finite_parts(&tilted(l1, -g2)?, x1, s.t)?.survival;
    Ok(ExpansionTerms {
        term1,
        term2: c_tilde * (-g2 * x2).exp() * surv,
        constants,
        cone: cone_for(model2, x1, x2, Event::Or)?,
        velocity: s.v,
    })
}

/// `ψ_sim ≈ ψ2(x2,T) + C̃1(v) e^{-γ1 x1} ψ̄2^{(-γ1)}(x2,T)`.
pub fn two_term_sim(model2: &TwoLineModel, x1: f64, x2: f64) -> Result<ExpansionTerms> {
    let s = setup(model2, x1, x2)?;
    if s.t == 0.0 {
        return lower_cone_terms(model2, x1, x2, Event::Sim);
    }
    let (l1, l2) = (&model2.line1, &model2.line2);
    let g1 = s.adj.gamma1;
    let vb = -l2.k1(-g1);
    guard_velocity(s.v, vb)?;
    let mut constants = BTreeMap::new();
    let c_tilde = if s.v > vb {
        s.adj.c1
    } else {
        let th = l2.theta_for_slope(-s.v)?;
        let th2 = conjugate(l2, th)?;
        let value = (psi_star(l1, th)? - psi_star(l1, th2)?) / c_norm(th2, th, g1);
        if let Ok(th1) = conjugate(l1, th) {
            if let (Ok(a), Ok(b)) = (psi_star(l1, th), psi_star(l1, th1)) {
                constants.insert("alt_reading".into(), (a - b) / c_norm(th1, th, g1));
            }
        }
        value
    };
    constants.insert("c_tilde1".into(), c_tilde);
    let term1 = finite_parts(l2, x2, s.t)?.ruin_by;
    let surv = finite_parts(&tilted(l2, -g1)?, x2, s.t)?.survival;
    Ok(ExpansionTerms {
        term1,
        term2: c_tilde * (-g1 * x1).exp() * surv,
        constants,
        cone: cone_for(model2, x1, x2, Event::Sim)?,
        velocity: s.v,
    })
}

/// `ψ_and ≈ w1(x1,T) + C̄2 e^{-γ2 x2} ψ2^{(-γ2)}(x2,T) + C̄1 e^{-γ2 x2 - γ̃ x1} ψ1^{(-γ3)}(x1,T)`;
/// `term2` holds the last two summands.
pub fn two_term_and(model2: &TwoLineModel, x1: f64, x2: f64) -> Result<ExpansionTerms> {
    let s = setup(model2, x1, x2)?;
    if s.t == 0.0 {
        return lower_cone_terms(model2, x1, x2, Event::And);
    }
    let (l1, l2) = (&model2.line1, &model2.line2);
    let (g2, g3) = (s.adj.gamma2, s.adj.gamma3);
    let vb = -l2.k1(-g3);
    guard_velocity(s.v, vb)?;
    let (c_bar2, c_bar1) = if s.v < vb {
        (0.0, s.adj.c2_hat)
    } else {
        let th = l2.theta_for_slope(-s.v)?;
        let th1 = conjugate(l1, th)?;
        let th2 = conjugate(l2, th)?;
        let cb2 = psi_bar_star(l2, th2)? / c_norm(th2, th, g2).abs();
        let cb1 = (psi_star(l2, th1)? - 1.0 / th) / c_norm(th1, th, g3).abs();
        (cb2, cb1)
    };
    let w1 = finite_parts(l1, x1, s.t)?.ruin_after;
    let a2 = if c_bar2 != 0.0 {
        c_bar2 * (-g2 * x2).exp() * finite_parts(&tilted(l2, -g2)?, x2, s.t)?.ruin_by
    } else {
        0.0
    };
    let a1 = c_bar1
        * (-g2 * x2 - s.adj.gamma_tilde * x1).exp()
        * finite_parts(&tilted(l1, -g3)?, x1, s.t)?.ruin_by;
    let mut constants = BTreeMap::new();
    constants.insert("c_bar1".into(), c_bar1);
    constants.insert("c_bar2".into(), c_bar2);
    constants.insert("term_c_bar1".into(), a1);
    constants.insert("term_c_bar2".into(), a2);
    Ok(ExpansionTerms {
        term1: w1,
        term2: a2 + a1,
        constants,
        cone: cone_for(model2, x1, x2, Event::And)?,
        velocity: s.v,
    })
}

/// Brackets and common factor of the sharp constants at velocity `w`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DBrackets {
    pub theta_w: f64,
    pub theta_conj: f64,
    /// `(θ^{(i)} - θ_w)/|θ_w θ^{(i)}|`
    pub prime: f64,
    /// `1/θ_w - 1/θ^{(i)} + κ'_j(0)/κ_j(θ^{(i)}) - κ'_j(0)/κ_j(θ_w)`, `j = 3 - i`
    pub sharp: f64,
    /// `√w/√(2π κ''(θ_w))`
    pub factor: f64,
}

impl DBrackets {
    pub fn d_prime(&self) -> f64 {
        self.prime * self.factor
    }

    pub fn d_sharp(&self) -> f64 {
        self.sharp * self.factor
    }
}

/// `κ2'(θ_w) = -w` and `θ^{(i)}` the `κ_i`-conjugate of `θ_w`.
pub fn d_brackets(model2: &TwoLineModel, i: usize, w: f64) -> Result<DBrackets> {
    if !(i == 1 || i == 2) {
        return Err(RuinError::OutOfRange(format!(
            "line index must be 1 or 2, got {i}"
        )));
    }
    let line_i = model2.line(i);
    let other = model2.line(3 - i);
    let th = model2.line2.theta_for_slope(-w)?;
    let thc = conjugate(line_i, th)?;
    let d0 = other.kappa1(0.0)?;
    Ok(DBrackets {
        theta_w: th,
        theta_conj: thc,
        prime: (thc - th) / (th * thc).abs(),
        sharp: 1.0 / th - 1.0 / thc + d0 / other.kappa(thc)? - d0 / other.kappa(th)?,
        factor: w.sqrt() / (2.0 * PI * model2.line2.kappa2(th)?).sqrt(),
    })
}

fn boundary_error(model2: &TwoLineModel, a: f64, kind: PartitionKind) -> Result<RuinError> {
    let part = partition(model2)?;
    let lower = if kind == PartitionKind::Sim {
        part.s2
    } else {
        part.s3
    };
    let boundary = if (a - part.s1).abs() < RAY_TOL * part.s1.max(1.0) {
        part.s1
    } else {
        lower
    };
    Ok(RuinError::BoundaryRay { a, boundary })
}

/// Leading-order asymptotics of the event along the ray through `(x1, x2)`.
pub fn leading(model2: &TwoLineModel, x1: f64, x2: f64, event: Event) -> Result<RuinEstimate> {
    check_reserves(x1, x2)?;
    levy_only(model2)?;
    let adj = adjustment(model2)?;
    let (g1, g2) = (adj.gamma1, adj.gamma2);
    let lead1 = adj.c1 * (-g1 * x1).exp();
    let lead2 = adj.c2 * (-g2 * x2).exp();
    let mut diagnostics = Diagnostics::new();
    let (value, cone) = match event {
        Event::Line1 => (lead1, None),
        Event::Line2 => (lead2, None),
        Event::Or => {
            if x2 <= x1 {
                (lead2, Some(ConeLabel::LowerCone))
            } else {
                (
                    lead2 + lead1,
                    classify(model2, x1, x2, PartitionKind::Sim).ok(),
                )
            }
        }
        Event::Sim | Event::And => {
            let kind = if event == Event::Sim {
                PartitionKind::Sim
            } else {
                PartitionKind::And
            };
            let label = classify(model2, x1, x2, kind)?;
            let a = x1 / x2;
            let value = match label {
                ConeLabel::LowerCone => lead1,
                ConeLabel::BoundaryRay => return Err(boundary_error(model2, a, kind)?),
                ConeLabel::D1 => lead1,
                ConeLabel::D2 => lead2,
                ConeLabel::D2Hat => adj.c2_hat * (-adj.gamma3 * x1 - g2 * (x2 - x1)).exp(),
                ConeLabel::D0 | ConeLabel::D0Hat => {
                    let w = ray_velocity(model2, a);
                    let ga = gamma_ray(model2, a)?;
                    let d = if label == ConeLabel::D0 {
                        let b = d_brackets(model2, 2, w)?;
                        b.d_sharp() + b.d_prime()
                    } else {
                        let b = d_brackets(model2, 1, w)?;
                        b.d_prime() - b.d_sharp()
                    };
                    diagnostics.insert("gamma_a".into(), ga);
                    diagnostics.insert("prefactor".into(), d);
                    d / x2.sqrt() * (-ga * x2).exp()
                }
            };
            (value, Some(label))
        }
    };
    Ok(RuinEstimate {
        value,
        method: Method::Leading,
        cone,
        diagnostics,
    })
}

/// Two-term expansion of a single event.
pub fn two_term(model2: &TwoLineModel, query: &RuinQuery) -> Result<RuinEstimate> {
    let terms = match query.event {
        Event::Or => two_term_or(model2, query.x1, query.x2)?,
        Event::Sim => two_term_sim(model2, query.x1, query.x2)?,
        Event::And => two_term_and(model2, query.x1, query.x2)?,
        Event::Line1 | Event::Line2 => {
            return exact(model2, query).map(|e| RuinEstimate {
                method: Method::TwoTerm,
                ..e
            })
        }
    };
    let mut diagnostics: Diagnostics = terms.constants.clone();
    diagnostics.insert("term1".into(), terms.term1);
    diagnostics.insert("term2".into(), terms.term2);
    diagnostics.insert("velocity".into(), terms.velocity);
    Ok(RuinEstimate {
        value: terms.total(),
        method: Method::TwoTerm,
        cone: Some(terms.cone),
        diagnostics,
    })
}

/// Deterministic methods (exact, two-term, leading).
pub fn evaluate(model2: &TwoLineModel, query: &RuinQuery) -> Result<RuinEstimate> {
    match query.method {
        Method::Exact => exact(model2, query),
        Method::TwoTerm => two_term(model2, query),
        Method::Leading => leading(model2, query.x1, query.x2, query.event),
        Method::Mc => Err(RuinError::OutOfRange(
            "Monte Carlo queries go through montecarlo::estimate".into(),
        )),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RenewalExponents {
    pub gamma1: f64,
    pub gamma2: f64,
    /// `min{γ2, a γ1}`, the decay rate of `ψ_or(aK, K)` in `K`.
    pub decay_rate: f64,
}

pub fn renewal_exponents(
    driver: &ClaimDriver,
    p1: f64,
    p2: f64,
    a: f64,
) -> Result<RenewalExponents> {
    if !(p1 > p2 && p2 > 0.0) {
        return Err(RuinError::InvalidModel(format!(
            "premium rates must satisfy p1 > p2 > 0, got ({p1}, {p2})"
        )));
    }
    if !(a > 0.0) {
        return Err(RuinError::OutOfRange(format!(
            "slope must be positive, got {a}"
        )));
    }
    let gamma1 = renewal_adjustment(driver, p1)?;
    let gamma2 = renewal_adjustment(driver, p2)?;
    Ok(RenewalExponents {
        gamma1,
        gamma2,
        decay_rate: gamma2.min(a * gamma1),
    })
}
