//! One-put/one-call option portfolios bought at time zero and held to expiry.

use crate::bs::{self, MarketParams};
use crate::error::{require, require_non_negative, require_positive, Error, Result};

/// Quantities and strikes of the put and call legs.
///
/// Quantities are real-valued; the balanced ratio is irrational in general.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StrategySpec {
    put_strike: f64,
    put_quantity: f64,
    call_strike: f64,
    call_quantity: f64,
}

impl StrategySpec {
    pub fn new(
        put_strike: f64,
        put_quantity: f64,
        call_strike: f64,
        call_quantity: f64,
    ) -> Result<Self> {
        require_positive("put_strike", put_strike)?;
        require_positive("call_strike", call_strike)?;
        require_non_negative("put_quantity", put_quantity)?;
        require_non_negative("call_quantity", call_quantity)?;
        if put_quantity + call_quantity <= 0.0 {
            return Err(Error::InvalidStrategy(
                "portfolio holds neither puts nor calls".into(),
            ));
        }
        Ok(Self {
            put_strike,
            put_quantity,
            call_strike,
            call_quantity,
        })
    }

    pub fn put_strike(&self) -> f64 {
        self.put_strike
    }

    pub fn put_quantity(&self) -> f64 {
        self.put_quantity
    }

    pub fn call_strike(&self) -> f64 {
        self.call_strike
    }

    pub fn call_quantity(&self) -> f64 {
        self.call_quantity
    }

    /// Both quantities multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Result<Self> {
        require_positive("scale factor", factor)?;
        Self::new(
            self.put_strike,
            self.put_quantity * factor,
            self.call_strike,
            self.call_quantity * factor,
        )
    }

    /// Rescales the quantities so that the premium paid at time zero equals
    /// `budget`, keeping the put/call proportion.
    pub fn with_budget(&self, m: &MarketParams, budget: f64) -> Result<Self> {
        require_positive("budget", budget)?;
        let x0 = initial_wealth(self, m)?;
        require(x0 > 0.0, "initial wealth", "> 0 to rescale", x0)?;
        self.scaled(budget / x0)
    }
}

/// Value and spot sensitivity of the portfolio before expiry.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PortfolioState {
    pub value: f64,
    pub delta: f64,
    pub spot: f64,
    pub time: f64,
}

/// Call-per-put proportion `(1 − Φ(d_p)) / Φ(d_c)` that makes the portfolio's
/// average gain nonnegative for every stock drift.
pub fn balanced_ratio(m: &MarketParams, put_strike: f64, call_strike: f64) -> Result<f64> {
    let put_delta = bs::put_delta(m, put_strike)?;
    let call_delta = bs::call_delta(m, call_strike)?;
    Ok(-put_delta / call_delta)
}

/// One put at `put_strike` and the balancing number of calls at `call_strike`.
pub fn make_balanced_strategy(
    m: &MarketParams,
    put_strike: f64,
    call_strike: f64,
) -> Result<StrategySpec> {
    let ratio = balanced_ratio(m, put_strike, call_strike)?;
    StrategySpec::new(put_strike, 1.0, call_strike, ratio)
}

/// Premium `X₀ = μ_p·p(K_p) + μ_c·c(K_c)` paid at time zero.
pub fn initial_wealth(s: &StrategySpec, m: &MarketParams) -> Result<f64> {
    Ok(s.put_quantity * bs::put_price(m, s.put_strike)?
        + s.call_quantity * bs::call_price(m, s.call_strike)?)
}

/// Payoff at expiry, `μ_p(K_p − S_T)⁺ + μ_c(S_T − K_c)⁺`.
pub fn terminal_payoff(s: &StrategySpec, terminal_price: f64) -> Result<f64> {
    require_non_negative("terminal_price", terminal_price)?;
    Ok(payoff(s, terminal_price))
}

#[inline]
pub(crate) fn payoff(s: &StrategySpec, terminal_price: f64) -> f64 {
    s.put_quantity * (s.put_strike - terminal_price).max(0.0)
        + s.call_quantity * (terminal_price - s.call_strike).max(0.0)
}

fn remaining(m: &MarketParams, spot: f64, time: f64) -> Result<MarketParams> {
    require(
        time.is_finite() && time >= 0.0,
        "time",
        "finite and >= 0",
        time,
    )?;
    require(
        time < m.maturity(),
        "time",
        "before maturity (use terminal_payoff at expiry)",
        time,
    )?;
    m.with_spot(spot)?.with_maturity(m.maturity() - time)
}

/// Portfolio value `Q(x, t)` at spot `x` and time `t < T`.
pub fn portfolio_value(s: &StrategySpec, spot: f64, time: f64, m: &MarketParams) -> Result<f64> {
    initial_wealth(s, &remaining(m, spot, time)?)
}

/// Portfolio delta `∂Q/∂x` at spot `x` and time `t < T`.
pub fn portfolio_delta(s: &StrategySpec, spot: f64, time: f64, m: &MarketParams) -> Result<f64> {
    let at = remaining(m, spot, time)?;
    Ok(s.put_quantity * bs::put_delta(&at, s.put_strike)?
        + s.call_quantity * bs::call_delta(&at, s.call_strike)?)
}

pub fn portfolio_state(
    s: &StrategySpec,
    spot: f64,
    time: f64,
    m: &MarketParams,
) -> Result<PortfolioState> {
    Ok(PortfolioState {
        value: portfolio_value(s, spot, time, m)?,
        delta: portfolio_delta(s, spot, time, m)?,
        spot,
        time,
    })
}

/// Relative deviation of the strategy's call/put proportion from the
/// balanced ratio. Infinite when the strategy holds no puts.
pub fn ratio_deviation(s: &StrategySpec, m: &MarketParams) -> Result<f64> {
    let target = balanced_ratio(m, s.put_strike, s.call_strike)?;
    if s.put_quantity == 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok((s.call_quantity / s.put_quantity - target).abs() / target)
}
