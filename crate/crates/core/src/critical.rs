//! Critical-disorder thresholds and the scalar rate functions of the
//! fractional moment method.
//!
//! Every threshold is the larger root of `lambda = a ln(lambda)`:
//!
//! | threshold            | `a`                      |
//! |----------------------|--------------------------|
//! | Anderson             | `mu_d e`                 |
//! | two-step expansion   | `sqrt(2d(2d-1)) e`       |
//! | single-step (`Γ_0`)  | `2d e`                   |
//! | Aizenman–Graf        | `4d e`                   |
//!
//! The Aizenman–Graf value corresponds to the decoupling constant
//! `D(s) = (1 - s)/2`; no attempt is made here to improve that constant.

use alloc::vec::Vec;
use core::f64::consts::E;

use crate::{Error, Result};

const ROOT_TOLERANCE: f64 = 1e-12;
const MAX_ITERATIONS: usize = 200;

/// Certified larger root of `lambda = a ln(lambda)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Root {
    pub a: f64,
    pub lambda: f64,
    /// `|lambda - a ln(lambda)|`
    pub residual: f64,
    pub iterations: usize,
}

impl Root {
    /// `a / lambda < 1`: the slope of `a ln` is below one, so this is the
    /// upper intersection.
    pub fn is_larger_root(&self) -> bool {
        self.a / self.lambda < 1.0
    }
}

/// Larger root of `lambda = a ln(lambda)` for `a > e`.
///
/// Newton's method from `a^2`, safeguarded by bisection on `[a, a^3]` where
/// `f(lambda) = lambda - a ln(lambda)` changes sign and is increasing.
pub fn solve_fixed_point(a: f64) -> Result<Root> {
    if !(a.is_finite() && a > E) {
        return Err(Error::NoRoot { a });
    }
    let f = |x: f64| x - a * libm::log(x);
    let (mut lo, mut hi) = (a, a * a * a);
    let mut x = a * a;
    for iteration in 1..=MAX_ITERATIONS {
        let fx = f(x);
        if fx.abs() < ROOT_TOLERANCE {
            return Ok(Root {
                a,
                lambda: x,
                residual: fx.abs(),
                iterations: iteration,
            });
        }
        if fx < 0.0 {
            lo = x;
        } else {
            hi = x;
        }
        let newton = x - fx / (1.0 - a / x);
        let next = if newton > lo && newton < hi {
            newton
        } else {
            0.5 * (lo + hi)
        };
        if next == x || hi - lo <= 4.0 * f64::EPSILON * hi {
            // Bracket exhausted at machine precision.
            let best = if f(lo).abs() < f(hi).abs() { lo } else { hi };
            return Ok(Root {
                a,
                lambda: best,
                residual: f(best).abs(),
                iterations: iteration,
            });
        }
        x = next;
    }
    Err(Error::NonConvergence {
        what: "fixed-point solver",
        iterations: MAX_ITERATIONS,
        residual: f(x).abs(),
    })
}

/// `gamma(lambda) = e ln(lambda) / lambda`, defined for `lambda >= e`.
pub fn gamma_fn(lambda: f64) -> Result<f64> {
    if !(lambda.is_finite() && lambda >= E) {
        return Err(Error::Domain { what: "lambda", value: lambda });
    }
    Ok(E * libm::log(lambda) / lambda)
}

fn check_exponent(s: f64) -> Result<()> {
    if s > 0.0 && s < 1.0 {
        Ok(())
    } else {
        Err(Error::Domain { what: "s", value: s })
    }
}

/// `Γ(s) = lambda^{-s} / (1 - s)`.
pub fn gamma_big(s: f64, lambda: f64) -> Result<f64> {
    check_exponent(s)?;
    if !(lambda > 0.0) {
        return Err(Error::Domain { what: "lambda", value: lambda });
    }
    Ok(libm::pow(lambda, -s) / (1.0 - s))
}

/// `Γ_0(s) = 2d Γ(s)`.
pub fn gamma_zero(s: f64, lambda: f64, dimension: usize) -> Result<f64> {
    Ok(2.0 * dimension as f64 * gamma_big(s, lambda)?)
}

/// Minimisation of `Γ(s)` over `s ∈ (0, 1)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GammaProfile {
    pub lambda: f64,
    /// `1 - 1/ln(lambda)` when `lambda > e`, else `0` (degenerate).
    pub s_crit: f64,
    /// `Γ(s_crit) = e ln(lambda)/lambda`, or the infimum `1` reached as `s -> 0`.
    pub minimum: f64,
    /// `Γ` is strictly increasing on `(0, 1)` (`lambda <= e`).
    pub increasing: bool,
}

pub fn gamma_profile(lambda: f64) -> Result<GammaProfile> {
    if !(lambda.is_finite() && lambda > 0.0) {
        return Err(Error::Domain { what: "lambda", value: lambda });
    }
    if lambda > E {
        let ln = libm::log(lambda);
        Ok(GammaProfile {
            lambda,
            s_crit: 1.0 - 1.0 / ln,
            minimum: E * ln / lambda,
            increasing: false,
        })
    } else {
        Ok(GammaProfile {
            lambda,
            s_crit: 0.0,
            minimum: 1.0,
            increasing: true,
        })
    }
}

/// `s_crit = 1 - 1/ln(lambda)`, requires `lambda > e`.
pub fn s_crit(lambda: f64) -> Result<f64> {
    if !(lambda.is_finite() && lambda > E) {
        return Err(Error::Domain { what: "lambda", value: lambda });
    }
    Ok(1.0 - 1.0 / libm::log(lambda))
}

/// `m_eps(lambda) = -ln gamma(lambda) - ln(mu + eps)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mass {
    pub value: f64,
    /// `false` when `lambda` is not above the threshold for `mu + eps`.
    pub positive: bool,
}

pub fn mass(lambda: f64, mu: f64, eps: f64) -> Result<Mass> {
    if !(eps > 0.0) {
        return Err(Error::Domain { what: "eps", value: eps });
    }
    if !(mu > 0.0) {
        return Err(Error::Domain { what: "mu", value: mu });
    }
    if !(lambda.is_finite() && lambda > 1.0) {
        return Err(Error::Domain { what: "lambda", value: lambda });
    }
    let gamma = E * libm::log(lambda) / lambda;
    let value = -libm::log(gamma) - libm::log(mu + eps);
    Ok(Mass {
        value,
        positive: value > 0.0,
    })
}

/// Rate parameters attached to a disorder strength `lambda > e`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateParams {
    pub lambda: f64,
    pub gamma_of_lambda: f64,
    pub s_crit: f64,
}

impl RateParams {
    pub fn new(lambda: f64) -> Result<Self> {
        Ok(Self {
            lambda,
            gamma_of_lambda: gamma_fn(lambda)?,
            s_crit: s_crit(lambda)?,
        })
    }

    pub fn mass(&self, mu: f64, eps: f64) -> Result<Mass> {
        mass(self.lambda, mu, eps)
    }
}

/// Thresholds for one dimension.
#[derive(Debug, Clone, PartialEq)]
pub struct CriterionReport {
    pub dimension: usize,
    pub mu_upper: f64,
    pub lambda_and: Root,
    pub lambda_ag: Root,
    pub lambda_intermediate: Root,
    pub lambda_two_step: Root,
}

impl CriterionReport {
    pub fn new(dimension: usize, mu_upper: f64) -> Result<Self> {
        if dimension == 0 {
            return Err(Error::InvalidInput("dimension must be positive"));
        }
        let d = dimension as f64;
        Ok(Self {
            dimension,
            mu_upper,
            lambda_and: solve_fixed_point(mu_upper * E)?,
            lambda_ag: solve_fixed_point(4.0 * d * E)?,
            lambda_intermediate: solve_fixed_point(2.0 * d * E)?,
            lambda_two_step: solve_fixed_point(libm::sqrt(2.0 * d * (2.0 * d - 1.0)) * E)?,
        })
    }

    pub fn roots(&self) -> [&Root; 4] {
        [
            &self.lambda_and,
            &self.lambda_two_step,
            &self.lambda_intermediate,
            &self.lambda_ag,
        ]
    }

    pub fn max_residual(&self) -> f64 {
        self.roots().iter().map(|r| r.residual).fold(0.0, f64::max)
    }

    /// `lambda_And < lambda_two_step < lambda_intermediate < lambda_AG`.
    pub fn is_strictly_ordered(&self) -> bool {
        self.roots().windows(2).all(|w| w[0].lambda < w[1].lambda)
    }
}

/// Upper bounds on `mu_d` for `d = 2..6` used as the default table.
pub const TABLE_ONE_MU: [(usize, f64); 5] =
    [(2, 2.68), (3, 4.72), (4, 6.81), (5, 8.86), (6, 10.89)];

pub fn table_one(mu_uppers: &[(usize, f64)]) -> Result<Vec<CriterionReport>> {
    mu_uppers
        .iter()
        .map(|&(d, mu)| CriterionReport::new(d, mu))
        .collect()
}

/// Rounds up in the last of `decimals` printed digits.
pub fn round_up(value: f64, decimals: i32) -> f64 {
    let scale = libm::pow(10.0, decimals as f64);
    let scaled = value * scale;
    // Absorb representation error so exact decimals do not bump.
    let nearest = libm::round(scaled);
    if (scaled - nearest).abs() <= 1e-9 * scaled.abs().max(1.0) {
        nearest / scale
    } else {
        libm::ceil(scaled) / scale
    }
}
