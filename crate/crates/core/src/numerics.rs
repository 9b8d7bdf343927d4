//! Scalar primitives: bracketed roots, adaptive Gauss-Kronrod quadrature,
//! the normal distribution and exponentially scaled modified Bessel functions.

use crate::error::{Result, RuinError};
use std::collections::BinaryHeap;
use std::f64::consts::{FRAC_1_SQRT_2, PI};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ToleranceConfig {
    pub root_abs_tol: f64,
    pub quad_abs_tol: f64,
    pub max_iterations: usize,
}

impl Default for ToleranceConfig {
    fn default() -> Self {
        ToleranceConfig {
            root_abs_tol: 1e-12,
            quad_abs_tol: 1e-10,
            max_iterations: 200,
        }
    }
}

impl ToleranceConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.root_abs_tol > 0.0 && self.quad_abs_tol > 0.0) || self.max_iterations == 0 {
            return Err(RuinError::InvalidModel(format!(
                "tolerances must be positive and max_iterations >= 1, got {self:?}"
            )));
        }
        Ok(())
    }
}

/// Bisection on a sign-changing bracket. The returned point always lies in the bracket.
pub fn root_solve<F: Fn(f64) -> f64>(
    f: F,
    bracket: (f64, f64),
    tol: &ToleranceConfig,
) -> Result<f64> {
    let (mut lo, mut hi) = if bracket.0 <= bracket.1 {
        bracket
    } else {
        (bracket.1, bracket.0)
    };
    let mut flo = f(lo);
    let fhi = f(hi);
    if flo == 0.0 {
        return Ok(lo);
    }
    if fhi == 0.0 {
        return Ok(hi);
    }
    if flo.is_nan() || fhi.is_nan() || flo.signum() == fhi.signum() {
        return Err(RuinError::NoSignChange { lo, hi });
    }
    for _ in 0..tol.max_iterations {
        let mid = 0.5 * (lo + hi);
        let width = hi - lo;
        if width <= tol.root_abs_tol
            || width <= 4.0 * f64::EPSILON * mid.abs()
            || mid <= lo
            || mid >= hi
        {
            return Ok(mid);
        }
        let fm = f(mid);
        if fm == 0.0 {
            return Ok(mid);
        }
        if fm.signum() == flo.signum() {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    Err(RuinError::MaxIterations {
        what: "root_solve",
        iterations: tol.max_iterations,
    })
}

const XGK: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
];
const WGK: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];
const WG: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

#[derive(Debug, Clone, Copy)]
struct Panel {
    a: f64,
    b: f64,
    value: f64,
    err: f64,
    abs: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.err == other.err
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Panel {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.err.total_cmp(&other.err)
    }
}

fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> Panel {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kron = fc * WGK[7];
    let mut gauss = fc * WG[3];
    let mut abs = fc.abs() * WGK[7];
    for j in 0..7 {
        let x = h * XGK[j];
        let f1 = f(c - x);
        let f2 = f(c + x);
        kron += WGK[j] * (f1 + f2);
        abs += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            gauss += WG[j / 2] * (f1 + f2);
        }
    }
    Panel {
        a,
        b,
        value: kron * h,
        err: ((kron - gauss) * h).abs(),
        abs: abs * h.abs(),
    }
}

/// Settings for [`integrate_adaptive`]: stop once the summed panel error is
/// below `max(abs_tol, rel_tol * |value|)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadSettings {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_panels: usize,
    pub initial_panels: usize,
}

impl QuadSettings {
    pub fn relative(rel_tol: f64) -> Self {
        QuadSettings {
            abs_tol: 0.0,
            rel_tol,
            max_panels: 4000,
            initial_panels: 8,
        }
    }
}

/// Result of an adaptive quadrature, with `abs_mass` the integral of |f|.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quadrature {
    pub value: f64,
    pub err: f64,
    pub abs_mass: f64,
}

pub fn integrate_adaptive<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    b: f64,
    s: &QuadSettings,
) -> Result<Quadrature> {
    if !(a < b) {
        if a == b {
            return Ok(Quadrature {
                value: 0.0,
                err: 0.0,
                abs_mass: 0.0,
            });
        }
        return Err(RuinError::OutOfRange(format!(
            "integration bounds [{a}, {b}] are reversed"
        )));
    }
    let n0 = s.initial_panels.max(1);
    let mut heap = BinaryHeap::with_capacity(s.max_panels + n0);
    let mut value = 0.0;
    let mut err = 0.0;
    for i in 0..n0 {
        let lo = a + (b - a) * i as f64 / n0 as f64;
        let hi = if i + 1 == n0 {
            b
        } else {
            a + (b - a) * (i + 1) as f64 / n0 as f64
        };
        let p = gk15(&f, lo, hi);
        value += p.value;
        err += p.err;
        heap.push(p);
    }
    let mut panels = n0;
    loop {
        if !value.is_finite() {
            return Err(RuinError::OutOfRange("integrand is not finite".into()));
        }
        if err <= s.abs_tol.max(s.rel_tol * value.abs()) {
            break;
        }
        if panels >= s.max_panels {
            return Err(RuinError::MaxIterations {
                what: "integrate",
                iterations: panels,
            });
        }
        let worst = heap.pop().expect("heap holds at least one panel");
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            // panel cannot be split further in floating point
            heap.push(Panel { err: 0.0, ..worst });
            err -= worst.err;
            continue;
        }
        let left = gk15(&f, worst.a, mid);
        let right = gk15(&f, mid, worst.b);
        value += left.value + right.value - worst.value;
        err += left.err + right.err - worst.err;
        heap.push(left);
        heap.push(right);
        panels += 1;
    }
    // re-sum to shed the drift of the running updates
    let (mut v, mut e, mut m) = (0.0, 0.0, 0.0);
    for p in heap.iter() {
        v += p.value;
        e += p.err;
        m += p.abs;
    }
    Ok(Quadrature {
        value: v,
        err: e,
        abs_mass: m,
    })
}

/// Integral over `[a, ∞)` through `s = a + scale·u/(1-u)`.
pub fn integrate_upper_tail<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    scale: f64,
    s: &QuadSettings,
) -> Result<Quadrature> {
    let g = |u: f64| {
        let one_minus = 1.0 - u;
        if one_minus <= 0.0 {
            return 0.0;
        }
        let jac = scale / (one_minus * one_minus);
        let v = f(a + scale * u / one_minus);
        if v == 0.0 {
            0.0
        } else {
            v * jac
        }
    };
    integrate_adaptive(g, 0.0, 1.0, s)
}

/// Adaptive Gauss-Kronrod (7/15) quadrature to `tol.quad_abs_tol` with a
/// budget of `tol.max_iterations` panel splits.
pub fn integrate<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    b: f64,
    tol: &ToleranceConfig,
) -> Result<(f64, f64)> {
    let s = QuadSettings {
        abs_tol: tol.quad_abs_tol,
        rel_tol: 0.0,
        max_panels: tol.max_iterations,
        initial_panels: 1,
    };
    let q = integrate_adaptive(f, a, b, &s)?;
    Ok((q.value, q.err))
}

pub fn normal_cdf(z: f64) -> f64 {
    0.5 * libm::erfc(-z * FRAC_1_SQRT_2)
}

pub fn normal_pdf(z: f64) -> f64 {
    (-0.5 * z * z).exp() / (2.0 * PI).sqrt()
}

/// `ln Φ(z)`, finite far into the lower tail.
pub fn ln_normal_cdf(z: f64) -> f64 {
    if z > 0.0 {
        return (-normal_cdf(-z)).ln_1p();
    }
    if z > -20.0 {
        return normal_cdf(z).ln();
    }
    // Mills ratio series
    let z2 = z * z;
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 1..12 {
        term *= -((2 * k - 1) as f64) / z2;
        sum += term;
    }
    -0.5 * z2 - (-z).ln() - 0.5 * (2.0 * PI).ln() + sum.ln()
}

pub fn normal_quantile(p: f64) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return Err(RuinError::OutOfRange(format!(
            "quantile level {p} not in (0,1)"
        )));
    }
    let tol = ToleranceConfig {
        root_abs_tol: 1e-14,
        ..ToleranceConfig::default()
    };
    root_solve(|z| normal_cdf(z) - p, (-40.0, 40.0), &tol)
}

/// `I_ν(z)·e^{-z}` for ν ∈ {0, 1, 2} and z ≥ 0.
pub fn bessel_i_scaled(nu: u32, z: f64) -> f64 {
    assert!(nu <= 2, "only orders 0, 1, 2 are supported");
    assert!(z >= 0.0, "argument must be nonnegative");
    if z <= 30.0 {
        let half = 0.5 * z;
        let q = half * half;
        let mut fact_nu = 1.0;
        for j in 1..=nu {
            fact_nu *= j as f64;
        }
        let mut term = half.powi(nu as i32) / fact_nu;
        let mut sum = term;
        let mut k = 0u32;
        loop {
            k += 1;
            term *= q / (k as f64 * (k + nu) as f64);
            sum += term;
            if term <= 1e-17 * sum || k > 500 {
                break;
            }
        }
        sum * (-z).exp()
    } else {
        let mu = 4.0 * (nu * nu) as f64;
        let mut term = 1.0;
        let mut sum = 1.0;
        for k in 1..80 {
            let odd = (2 * k - 1) as f64;
            let next = -term * (mu - odd * odd) / (k as f64 * 8.0 * z);
            if next.abs() >= term.abs() {
                break;
            }
            term = next;
            sum += term;
            if term.abs() < 1e-17 * sum.abs() {
                break;
            }
        }
        sum / (2.0 * PI * z).sqrt()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn root_of_quadratic() {
        let r = root_solve(|x| x * x - 4.0, (0.0, 5.0), &ToleranceConfig::default()).unwrap();
        assert!((r - 2.0).abs() < 1e-12);
    }

    #[test]
    fn root_of_cumulant_at_minus_gamma() {
        // κ(θ) = θ - θ/(2+θ), the root of κ(-s) on (0, 2) is μ - λ/p = 1
        let k = |s: f64| -s + s / (2.0 - s);
        let r = root_solve(k, (1e-6, 2.0 - 1e-9), &ToleranceConfig::default()).unwrap();
        assert!((r - 1.0).abs() < 1e-11);
    }

    #[test]
    fn same_sign_is_rejected() {
        let e = root_solve(|x| x * x + 1.0, (-1.0, 1.0), &ToleranceConfig::default());
        assert!(matches!(e, Err(RuinError::NoSignChange { .. })));
    }

    #[test]
    fn root_budget_is_enforced() {
        let tol = ToleranceConfig {
            max_iterations: 3,
            ..Default::default()
        };
        let e = root_solve(|x| x - 0.3, (0.0, 1.0), &tol);
        assert!(matches!(e, Err(RuinError::MaxIterations { .. })));
    }

    #[test]
    fn constant_and_sine_integrals() {
        let tol = ToleranceConfig::default();
        let (v, e) = integrate(|_| 1.0, 0.0, 1.0, &tol).unwrap();
        assert!((v - 1.0).abs() < 1e-15 && e < 1e-15);
        let (v, e) = integrate(f64::sin, 0.0, PI, &tol).unwrap();
        assert!((v - 2.0).abs() < 1e-12, "{v}");
        assert!(e <= 1e-10);
    }

    #[test]
    fn additivity_over_subintervals() {
        let tol = ToleranceConfig::default();
        let f = |x: f64| (x * x).exp() * x.cos();
        let (ab, _) = integrate(f, 0.0, 0.7, &tol).unwrap();
        let (bc, _) = integrate(f, 0.7, 1.6, &tol).unwrap();
        let (ac, _) = integrate(f, 0.0, 1.6, &tol).unwrap();
        assert!((ab + bc - ac).abs() < 2.0 * tol.quad_abs_tol);
    }

    #[test]
    fn tail_integral_of_exponential() {
        let q = integrate_upper_tail(
            |x| (-2.0 * x).exp(),
            1.0,
            1.0,
            &QuadSettings::relative(1e-12),
        )
        .unwrap();
        assert!((q.value - 0.5 * (-2.0f64).exp()).abs() < 1e-14);
    }

    #[test]
    fn normal_cdf_values() {
        assert_eq!(normal_cdf(0.0), 0.5);
        assert!((normal_cdf(40.0) - 1.0).abs() <= 1e-15);
        // high-precision erf oracle
        assert!((normal_cdf(2.0) - 0.977_249_868_051_820_8).abs() < 1e-15);
        assert!((normal_cdf(-3.0) - 0.001_349_898_031_630_094_6).abs() < 1e-17);
    }

    #[test]
    fn log_cdf_deep_tail() {
        // ln Φ(-30) from a 50-digit evaluation
        assert!((ln_normal_cdf(-30.0) - (-454.321_243_956_343_2)).abs() < 1e-9);
        assert!((ln_normal_cdf(-5.0) - normal_cdf(-5.0).ln()).abs() < 1e-13);
        assert!((ln_normal_cdf(-20.0) - (-203.917_155_371_097_5)).abs() < 1e-9);
        assert!((ln_normal_cdf(-20.000001) - ln_normal_cdf(-19.999999)).abs() < 1e-4);
    }

    #[test]
    fn quantile_inverts_cdf() {
        let z = normal_quantile(0.975).unwrap();
        assert!((z - 1.959_963_984_540_054).abs() < 1e-12);
    }

    #[test]
    fn scaled_bessel_reference_values() {
        // reference values from arbitrary-precision evaluation
        let cases = [
            (0, 1.0, 0.465_759_607_593_640_44),
            (1, 1.0, 0.207_910_415_349_708_45),
            (2, 1.0, 0.049_938_776_894_223_539),
            (0, 30.0, 0.073_145_946_482_237_294),
            (1, 30.0, 0.071_916_330_598_647_555),
            (0, 45.0, 0.059_638_115_011_731_949),
            (2, 45.0, 0.057_017_150_427_900_809),
        ];
        for (nu, z, want) in cases {
            let got = bessel_i_scaled(nu, z);
            assert!(
                ((got - want) / want).abs() < 1e-13,
                "I_{nu}({z}): {got} vs {want}"
            );
        }
        assert_eq!(bessel_i_scaled(1, 0.0), 0.0);
        assert_eq!(bessel_i_scaled(0, 0.0), 1.0);
    }
}
