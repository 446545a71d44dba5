//! Closed-form bounds, barrier profiles and auxiliary scalar functions.
//!
//! Every function here is a pure evaluation in `f64`. The reference values
//! used by the test suite come from an arbitrary-precision generator
//! (`tests/fixtures/generate_golden.py`) so nothing in this module depends
//! on extended precision at runtime.

use std::f64::consts::{FRAC_PI_2, PI};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// π²/4, the upper limit for δ²κ.
pub const CRITICAL_PRODUCT: f64 = PI * PI / 4.0;

/// π²/8, the limit for the linear-in-δ²κ form of the estimate.
pub const LINEAR_REGIME_PRODUCT: f64 = PI * PI / 8.0;

/// Fraction of [`CRITICAL_PRODUCT`] above which a budget is flagged as near-degenerate.
pub const NEAR_DEGENERATE_FRACTION: f64 = 0.95;

/// Disc radius δ together with a two-sided curvature bound κ (|K| ≤ κ).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurvatureBudget {
    delta: f64,
    kappa: f64,
}

impl CurvatureBudget {
    pub fn new(delta: f64, kappa: f64) -> Result<Self> {
        if !(delta.is_finite() && delta > 0.0) {
            return Err(Error::Domain(format!("delta must be positive, got {delta}")));
        }
        if !(kappa.is_finite() && kappa > 0.0) {
            return Err(Error::Domain(format!("kappa must be positive, got {kappa}")));
        }
        let product = delta * delta * kappa;
        if product >= CRITICAL_PRODUCT {
            return Err(Error::Hypothesis(format!(
                "delta^2 * kappa = {product:.6} must be below pi^2/4 = {CRITICAL_PRODUCT:.6}"
            )));
        }
        Ok(Self { delta, kappa })
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    /// The dimensionless product t = δ²κ.
    pub fn product(&self) -> f64 {
        self.delta * self.delta * self.kappa
    }

    /// The angle x = δ√κ, always in (0, π/2).
    pub fn angle(&self) -> f64 {
        self.delta * self.kappa.sqrt()
    }

    pub fn near_degenerate(&self) -> bool {
        self.product() > NEAR_DEGENERATE_FRACTION * CRITICAL_PRODUCT
    }

    pub fn in_linear_regime(&self) -> bool {
        self.product() < LINEAR_REGIME_PRODUCT
    }
}

/// Additive constants that make the chord barriers hold on the boundary.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BarrierConstants {
    pub c_h: f64,
    pub c_s: f64,
}

/// A closed interval `[lower, upper]` of positive reals.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RatioBounds {
    pub lower: f64,
    pub upper: f64,
}

impl RatioBounds {
    pub fn new(lower: f64, upper: f64) -> Self {
        debug_assert!(lower <= upper, "lower {lower} > upper {upper}");
        Self { lower, upper }
    }

    pub fn contains(&self, value: f64, tolerance: f64) -> bool {
        value >= self.lower - tolerance && value <= self.upper + tolerance
    }

    pub fn contains_interval(&self, other: &RatioBounds) -> bool {
        self.lower <= other.lower && other.upper <= self.upper
    }
}

/// The normalised bracket factor (π²/4)·(sinh(√t)·tan(√t)/t)² as a function of t = δ²κ.
pub fn bracket_term(t: f64) -> f64 {
    let x = t.sqrt();
    let r = x.sinh() * x.tan() / t;
    CRITICAL_PRODUCT * r * r
}

/// Upper bound for sup |log φ| over the disc.
pub fn theorem_bound(budget: &CurvatureBudget) -> f64 {
    let t = budget.product();
    0.5 * t * (1.0 + bracket_term(t))
}

/// The simplified estimate, valid when δ²κ < π²/8: `(8δ²κ, [e^{-4δ²κ}, e^{4δ²κ}])`.
pub fn corollary_bound(budget: &CurvatureBudget) -> Result<(f64, RatioBounds)> {
    let t = budget.product();
    if !budget.in_linear_regime() {
        return Err(Error::Hypothesis(format!(
            "delta^2 * kappa = {t:.6} must be below pi^2/8 = {LINEAR_REGIME_PRODUCT:.6}"
        )));
    }
    Ok((8.0 * t, RatioBounds::new((-4.0 * t).exp(), (4.0 * t).exp())))
}

fn half_angle(distance: f64, kappa: f64) -> Result<f64> {
    if !(kappa.is_finite() && kappa > 0.0) {
        return Err(Error::Domain(format!("kappa must be positive, got {kappa}")));
    }
    if !(distance.is_finite() && distance > 0.0) {
        return Err(Error::Domain(format!("distance must be positive, got {distance}")));
    }
    let arg = distance * kappa.sqrt();
    if arg >= PI {
        return Err(Error::Domain(format!(
            "distance * sqrt(kappa) = {arg:.6} must be below pi"
        )));
    }
    Ok(0.5 * arg)
}

/// Superharmonic barrier modelled on the constant-curvature sphere: −log tan(d√κ/2).
pub fn barrier_spherical(distance: f64, kappa: f64) -> Result<f64> {
    Ok(-half_angle(distance, kappa)?.tan().ln())
}

/// Subharmonic barrier modelled on the hyperbolic plane: −log tanh(d√κ/2).
pub fn barrier_hyperbolic(distance: f64, kappa: f64) -> Result<f64> {
    Ok(-half_angle(distance, kappa)?.tanh().ln())
}

pub fn barrier_constants(budget: &CurvatureBudget) -> BarrierConstants {
    let x = budget.angle();
    BarrierConstants {
        c_h: (x.sin() / (PI * x.cosh())).ln(),
        c_s: (PI * x.sinh() * x.tan() / (4.0 * x)).ln(),
    }
}

/// Bounds on the unit-disc conformal factor at the centre of the disc.
pub fn center_factor_bounds(budget: &CurvatureBudget) -> RatioBounds {
    let k = budget.kappa();
    let y = 0.5 * budget.angle();
    RatioBounds::new(4.0 / k * y.tanh().powi(2), 4.0 / k * y.tan().powi(2))
}

/// Bounds on the unit-disc conformal factor along the boundary circle.
pub fn boundary_factor_bounds(budget: &CurvatureBudget) -> RatioBounds {
    let k = budget.kappa();
    let x = budget.angle();
    RatioBounds::new(x.sin().powi(2) / k, x.sinh().powi(2) / k)
}

/// Bounds on d_M(p, q) / |w(p) − w(q)| for any two points of the disc.
pub fn distance_ratio_bounds(budget: &CurvatureBudget) -> RatioBounds {
    let (d, k) = (budget.delta(), budget.kappa());
    let x = budget.angle();
    RatioBounds::new(
        2.0 / PI * x.sin() / (k.sqrt() * x.cosh()),
        FRAC_PI_2 * x.sinh() * x.tan() / (d * k),
    )
}

/// Bounds on d_M(q₁, q₂) / |w(q₁) − w(q₂)| for two boundary points.
pub fn boundary_distance_ratio_bounds(budget: &CurvatureBudget) -> RatioBounds {
    let (d, k) = (budget.delta(), budget.kappa());
    let x = budget.angle();
    RatioBounds::new(
        2.0 * d * x.sin() / (PI * x.sinh()),
        PI * x.sinh() / (2.0 * k.sqrt()),
    )
}

/// Bounds shared by the boundary arc-length ratios: `[sin(δ√κ)/√κ, sinh(δ√κ)/√κ]`.
pub fn arc_ratio_bounds(budget: &CurvatureBudget) -> RatioBounds {
    let sk = budget.kappa().sqrt();
    let x = budget.angle();
    RatioBounds::new(x.sin() / sk, x.sinh() / sk)
}

/// Upper bound π/(2δ) for the ratio between the central angle and the distance
/// of two boundary points.
pub fn angle_distance_bound(delta: f64) -> Result<f64> {
    if !(delta.is_finite() && delta > 0.0) {
        return Err(Error::Domain(format!("delta must be positive, got {delta}")));
    }
    Ok(FRAC_PI_2 / delta)
}

/// f(x) = arccos(cos²a + sin²a·cos x)/x, the normalised opposite side of an
/// isosceles spherical triangle with legs `a` and apex angle `x`.
pub fn spherical_angle_profile(a: f64, x: f64) -> Result<f64> {
    if !(a > 0.0 && a < FRAC_PI_2) {
        return Err(Error::Domain(format!("a must lie in (0, pi/2), got {a}")));
    }
    if !(x > 0.0 && x <= PI) {
        return Err(Error::Domain(format!("x must lie in (0, pi], got {x}")));
    }
    // 1 − cos c = 2 sin²a sin²(x/2) keeps precision for small apex angles.
    let s = a.sin() * (0.5 * x).sin();
    let c = 2.0 * s.min(1.0).asin();
    Ok(c / x)
}

/// Outcome of the scalar inequalities used to pass from factor bounds to log bounds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AppendixChecks {
    /// sinh(x)/x < exp(x²/4)
    pub sinh_below_gaussian: bool,
    /// sin(x)/x > exp(−x²/4)
    pub sin_above_gaussian: bool,
    /// x ↦ x/tanh(ax) has a positive centred difference at x.
    pub tanh_ratio_increasing: bool,
    /// x ↦ x/tan(ax) has a negative centred difference at x; `None` when ax ≥ π/2.
    pub tan_ratio_decreasing: Option<bool>,
}

/// Step used for the centred monotonicity differences.
pub const MONOTONICITY_STEP: f64 = 1e-6;

fn centred_difference(f: impl Fn(f64) -> f64, x: f64) -> f64 {
    let h = MONOTONICITY_STEP.min(0.5 * x);
    f(x + h) - f(x - h)
}

pub fn appendix_inequalities(x: f64, a: f64) -> Result<AppendixChecks> {
    if !(x.is_finite() && x > 0.0) {
        return Err(Error::Domain(format!("x must be positive, got {x}")));
    }
    if x >= FRAC_PI_2 {
        return Err(Error::Domain(format!(
            "the sine inequality requires x < pi/2, got {x}"
        )));
    }
    if !(a.is_finite() && a > 0.0) {
        return Err(Error::Domain(format!("a must be positive, got {a}")));
    }
    let g = (-0.25 * x * x).exp();
    let tan_ratio_decreasing = if a * (x + MONOTONICITY_STEP) < FRAC_PI_2 {
        Some(centred_difference(|s| s / (a * s).tan(), x) < 0.0)
    } else {
        None
    };
    Ok(AppendixChecks {
        sinh_below_gaussian: sinh_below_gaussian(x),
        sin_above_gaussian: x.sin() / x > g,
        tanh_ratio_increasing: centred_difference(|s| s / (a * s).tanh(), x) > 0.0,
        tan_ratio_decreasing,
    })
}

/// sinh(x)/x < exp(x²/4), valid for every x > 0.
pub fn sinh_below_gaussian(x: f64) -> bool {
    x.sinh() / x < (0.25 * x * x).exp()
}

/// sup |u| ≤ sup_∂ |u| + (δ²/4)·sup |Δu| for u on the disc of radius δ.
pub fn max_principle_estimate(boundary_sup: f64, laplacian_sup: f64, delta: f64) -> f64 {
    debug_assert!(boundary_sup >= 0.0 && laplacian_sup >= 0.0 && delta > 0.0);
    boundary_sup + 0.25 * delta * delta * laplacian_sup
}

/// Every closed-form quantity for one budget, in a printable order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundSummary {
    pub budget: CurvatureBudget,
    pub theorem_bound: f64,
    pub corollary: Option<(f64, RatioBounds)>,
    pub barrier_constants: BarrierConstants,
    pub center_factor: RatioBounds,
    pub boundary_factor: RatioBounds,
    pub distance_ratio: RatioBounds,
    pub boundary_distance_ratio: RatioBounds,
    pub arc_ratio: RatioBounds,
    pub angle_distance: f64,
    pub near_degenerate: bool,
}

impl BoundSummary {
    pub fn for_budget(budget: &CurvatureBudget) -> Self {
        Self {
            budget: *budget,
            theorem_bound: theorem_bound(budget),
            corollary: corollary_bound(budget).ok(),
            barrier_constants: barrier_constants(budget),
            center_factor: center_factor_bounds(budget),
            boundary_factor: boundary_factor_bounds(budget),
            distance_ratio: distance_ratio_bounds(budget),
            boundary_distance_ratio: boundary_distance_ratio_bounds(budget),
            arc_ratio: arc_ratio_bounds(budget),
            angle_distance: FRAC_PI_2 / budget.delta(),
            near_degenerate: budget.near_degenerate(),
        }
    }
}
