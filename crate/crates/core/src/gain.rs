//! Expected terminal wealth of a buy-and-hold option portfolio as a function
//! of the stock's appreciation rate, and the machinery around it.
//!
//! Under drift `a` the terminal price is the risk-neutral terminal price scaled
//! by `y = e^{(a−r)T}`, so the expected payoff is a Black-Scholes value at the
//! shifted spot `y·S₀`, compounded at the bond rate:
//!
//! ```text
//! h(a) = e^{rT} [μ_p p(y S₀, K_p) + μ_c c(y S₀, K_c)]
//! R(y) = h(r + ln(y)/T)
//! ```
//!
//! `R` is convex in `y` and `R(1) = e^{rT}X₀`. A balanced strategy has
//! `R'(1) = 0`, so its average gain `h(a) − e^{rT}X₀` is minimal (zero) at
//! `a = r`. Any other proportion tilts `R'(1)` away from zero and some drift
//! on the descent side loses money.

use rayon::prelude::*;

use crate::bs::{self, MarketParams};
use crate::error::{require_finite, require_positive, Error, Result};
use crate::strategy::{self, StrategySpec};

/// Strategies whose call/put proportion is within this relative distance of
/// the balanced ratio are treated as balanced.
pub const RATIO_TOLERANCE: f64 = 1e-12;

/// Half-width, in drift units per year, of the bracket searched for a
/// negative-gain drift.
pub const WITNESS_BRACKET: f64 = 2.0;

/// One row of a gain curve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GainPoint {
    pub drift: f64,
    pub expected_wealth: f64,
    pub riskfree_wealth: f64,
    pub average_gain: f64,
}

/// Strictly increasing, finite drift values.
#[derive(Debug, Clone, PartialEq)]
pub struct DriftGrid(Vec<f64>);

impl DriftGrid {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidGrid("drift grid is empty".into()));
        }
        if let Some(bad) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::InvalidGrid(format!("non-finite drift {bad}")));
        }
        if values.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidGrid(
                "drift values must be strictly increasing".into(),
            ));
        }
        Ok(Self(values))
    }

    /// `steps` evenly spaced values from `min` to `max` inclusive.
    pub fn linspace(min: f64, max: f64, steps: usize) -> Result<Self> {
        if !(min.is_finite() && max.is_finite() && min < max) {
            return Err(Error::InvalidGrid(format!(
                "need finite a-min < a-max (got {min}, {max})"
            )));
        }
        if steps < 2 {
            return Err(Error::InvalidGrid(format!(
                "need at least 2 steps (got {steps})"
            )));
        }
        let span = max - min;
        let last = (steps - 1) as f64;
        let values = (0..steps)
            .map(|i| {
                if i + 1 == steps {
                    max
                } else {
                    min + span * (i as f64 / last)
                }
            })
            .collect();
        Self::new(values)
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }
}

/// `y = e^{(a−r)T}`
pub fn drift_to_y(m: &MarketParams, drift: f64) -> f64 {
    ((drift - m.rate()) * m.maturity()).exp()
}

/// `a = r + ln(y)/T`
pub fn y_to_drift(m: &MarketParams, y: f64) -> f64 {
    m.rate() + y.ln() / m.maturity()
}

/// Expected payoff `h(a) = E_a X_T` under stock drift `a`.
pub fn expected_terminal_wealth(s: &StrategySpec, m: &MarketParams, drift: f64) -> Result<f64> {
    require_finite("drift", drift)?;
    r_function(s, m, drift_to_y(m, drift))
}

/// `e^{rT}X₀`, the terminal wealth of putting the premium in the bond.
pub fn riskfree_wealth(s: &StrategySpec, m: &MarketParams) -> Result<f64> {
    Ok(m.growth() * strategy::initial_wealth(s, m)?)
}

/// Average gain `h(a) − e^{rT}X₀`.
pub fn average_gain(s: &StrategySpec, m: &MarketParams, drift: f64) -> Result<f64> {
    Ok(expected_terminal_wealth(s, m, drift)? - riskfree_wealth(s, m)?)
}

/// Expected payoff as a function of the drift factor `y`.
pub fn r_function(s: &StrategySpec, m: &MarketParams, y: f64) -> Result<f64> {
    require_positive("y", y)?;
    let shifted = m.with_spot(y * m.spot())?;
    Ok(m.growth() * strategy::initial_wealth(s, &shifted)?)
}

/// `R'(y) = e^{rT}S₀ [μ_p(Φ(d_p) − 1) + μ_c Φ(d_c)]` with `d` taken at `y·S₀`.
pub fn r_derivative(s: &StrategySpec, m: &MarketParams, y: f64) -> Result<f64> {
    require_positive("y", y)?;
    let delta = strategy::portfolio_delta(s, y * m.spot(), 0.0, m)?;
    Ok(m.growth() * m.spot() * delta)
}

pub fn gain_point(s: &StrategySpec, m: &MarketParams, drift: f64) -> Result<GainPoint> {
    let expected_wealth = expected_terminal_wealth(s, m, drift)?;
    let riskfree_wealth = riskfree_wealth(s, m)?;
    Ok(GainPoint {
        drift,
        expected_wealth,
        riskfree_wealth,
        average_gain: expected_wealth - riskfree_wealth,
    })
}

/// Gain at every drift of the grid, in grid order.
pub fn gain_curve(s: &StrategySpec, m: &MarketParams, grid: &DriftGrid) -> Result<Vec<GainPoint>> {
    grid.values()
        .par_iter()
        .map(|&a| gain_point(s, m, a))
        .collect()
}

/// Smallest second difference of `R` found on a grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConvexityReport {
    /// Minimum of the three-point estimates of `R''`.
    pub min_second_difference: f64,
    /// Interior grid point where the minimum occurs.
    pub location: f64,
    pub all_positive: bool,
}

/// Checks convexity of `R` through three-point second differences on a
/// strictly increasing grid of positive `y` values.
///
/// Each option is split into its forward-intrinsic hinge and the price of the
/// out-of-the-money option on the same strike (by parity the two sum to
/// either premium). The hinge is differenced in closed form and the
/// out-of-the-money part numerically, which keeps deep in-the-money legs from
/// burying the curvature under rounding noise.
pub fn verify_convexity(s: &StrategySpec, m: &MarketParams, y_grid: &[f64]) -> Result<ConvexityReport> {
    if y_grid.len() < 3 {
        return Err(Error::InvalidGrid(format!(
            "second differences need at least 3 points (got {})",
            y_grid.len()
        )));
    }
    if y_grid.iter().any(|y| !(y.is_finite() && *y > 0.0)) {
        return Err(Error::InvalidGrid("y values must be finite and > 0".into()));
    }
    if y_grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidGrid("y values must be strictly increasing".into()));
    }

    let legs = [
        (s.put_quantity(), s.put_strike()),
        (s.call_quantity(), s.call_strike()),
    ];
    let x: Vec<f64> = y_grid.iter().map(|y| y * m.spot()).collect();
    let otm: Vec<f64> = x
        .iter()
        .map(|&xi| {
            let at = m.with_spot(xi)?;
            legs.iter().try_fold(0.0, |acc, &(mu, k)| {
                if mu == 0.0 {
                    return Ok(acc);
                }
                let v = if xi <= k * m.discount() {
                    bs::call_price(&at, k)?
                } else {
                    bs::put_price(&at, k)?
                };
                Ok(acc + mu * v)
            })
        })
        .collect::<Result<_>>()?;

    let mut report = ConvexityReport {
        min_second_difference: f64::INFINITY,
        location: f64::NAN,
        all_positive: true,
    };
    for i in 1..x.len() - 1 {
        let (x0, x1, x2) = (x[i - 1], x[i], x[i + 1]);
        let (h0, h1) = (x1 - x0, x2 - x1);
        let smooth = 2.0 * ((otm[i + 1] - otm[i]) / h1 - (otm[i] - otm[i - 1]) / h0) / (h0 + h1);
        let kinks: f64 = legs
            .iter()
            .map(|&(mu, k)| mu * hinge_second_difference(k * m.discount(), x0, x1, x2))
            .sum();
        // d²R/dy² = S₀² d²R/dx²
        let d2 = m.growth() * m.spot() * m.spot() * (smooth + kinks);
        if d2 <= 0.0 {
            report.all_positive = false;
        }
        if d2 < report.min_second_difference {
            report.min_second_difference = d2;
            report.location = y_grid[i];
        }
    }
    Ok(report)
}

/// Three-point second difference of `x ↦ (x − f)⁺` on `x0 < x1 < x2`.
fn hinge_second_difference(f: f64, x0: f64, x1: f64, x2: f64) -> f64 {
    let (h0, h1) = (x1 - x0, x2 - x1);
    let slope_jump = if f <= x0 || f >= x2 {
        0.0
    } else if f <= x1 {
        (f - x0) / h0
    } else {
        (x2 - f) / h1
    };
    2.0 * slope_jump / (h0 + h1)
}

/// For a strategy off the balanced proportion, a drift at which its average
/// gain is negative; `None` for balanced strategies.
///
/// Walks away from `a = r` in the direction in which `R` decreases, doubling
/// the step until `R'` changes sign (or the bracket edge is reached), then
/// bisects on the sign of `R'` to land on the minimum of the gain.
pub fn find_negative_gain_witness(s: &StrategySpec, m: &MarketParams) -> Result<Option<f64>> {
    if strategy::ratio_deviation(s, m)? <= RATIO_TOLERANCE {
        return Ok(None);
    }
    let r = m.rate();
    let direction = if r_derivative(s, m, 1.0)? > 0.0 { -1.0 } else { 1.0 };
    // derivative of R along the search direction, as a function of distance
    let slope = |dist: f64| -> Result<f64> {
        Ok(direction * r_derivative(s, m, drift_to_y(m, r + direction * dist))?)
    };

    let mut lo = 0.0;
    let mut hi = 1e-3;
    let mut crossed = false;
    loop {
        if slope(hi)? >= 0.0 {
            crossed = true;
            break;
        }
        if hi >= WITNESS_BRACKET {
            break;
        }
        lo = hi;
        hi = (2.0 * hi).min(WITNESS_BRACKET);
    }

    let dist = if crossed {
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if slope(mid)? >= 0.0 {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        0.5 * (lo + hi)
    } else {
        WITNESS_BRACKET
    };

    let witness = r + direction * dist;
    if average_gain(s, m, witness)? < 0.0 {
        Ok(Some(witness))
    } else {
        Err(Error::WitnessNotFound {
            lo: r - WITNESS_BRACKET,
            hi: r + WITNESS_BRACKET,
        })
    }
}

/// Average gain when the drift itself is random, independent of the
/// Brownian motion: `Σ pᵢ · gain(aᵢ)`.
pub fn expected_gain_random_drift(
    s: &StrategySpec,
    m: &MarketParams,
    drift_samples: &[(f64, f64)],
) -> Result<f64> {
    if drift_samples.is_empty() {
        return Err(Error::InvalidDistribution("no drift samples".into()));
    }
    let mut total = 0.0;
    for &(a, p) in drift_samples {
        if !a.is_finite() {
            return Err(Error::InvalidDistribution(format!("non-finite drift {a}")));
        }
        if !(p.is_finite() && p >= 0.0) {
            return Err(Error::InvalidDistribution(format!(
                "probability must be >= 0 (got {p})"
            )));
        }
        total += p;
    }
    if (total - 1.0).abs() > 1e-12 {
        return Err(Error::InvalidDistribution(format!(
            "probabilities sum to {total}, not 1"
        )));
    }
    drift_samples
        .iter()
        .map(|&(a, p)| Ok(p * average_gain(s, m, a)?))
        .sum()
}
