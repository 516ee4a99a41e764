//! Closed-form Black-Scholes prices and spot sensitivities for European
//! puts and calls on a non-dividend stock.

use crate::error::{require_non_negative, require_positive, Result};
use crate::normal::{norm_cdf, norm_pdf};

/// Model constants: stock and bond at time zero, short rate, volatility and
/// option maturity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MarketParams {
    spot: f64,
    rate: f64,
    volatility: f64,
    maturity: f64,
    bond_initial: f64,
}

impl MarketParams {
    /// Validates and builds market parameters with `B₀ = 1`.
    pub fn new(spot: f64, rate: f64, volatility: f64, maturity: f64) -> Result<Self> {
        Self::with_bond(spot, rate, volatility, maturity, 1.0)
    }

    pub fn with_bond(
        spot: f64,
        rate: f64,
        volatility: f64,
        maturity: f64,
        bond_initial: f64,
    ) -> Result<Self> {
        require_positive("spot", spot)?;
        require_non_negative("rate", rate)?;
        require_positive("volatility", volatility)?;
        require_positive("maturity", maturity)?;
        require_positive("bond_initial", bond_initial)?;
        Ok(Self {
            spot,
            rate,
            volatility,
            maturity,
            bond_initial,
        })
    }

    pub fn spot(&self) -> f64 {
        self.spot
    }

    pub fn rate(&self) -> f64 {
        self.rate
    }

    pub fn volatility(&self) -> f64 {
        self.volatility
    }

    pub fn maturity(&self) -> f64 {
        self.maturity
    }

    pub fn bond_initial(&self) -> f64 {
        self.bond_initial
    }

    /// Same market seen from a different current stock price.
    pub fn with_spot(&self, spot: f64) -> Result<Self> {
        require_positive("spot", spot)?;
        Ok(Self { spot, ..*self })
    }

    /// Same market with a different time to expiry.
    pub fn with_maturity(&self, maturity: f64) -> Result<Self> {
        require_positive("maturity", maturity)?;
        Ok(Self { maturity, ..*self })
    }

    /// `e^{-rT}`
    pub fn discount(&self) -> f64 {
        (-self.rate * self.maturity).exp()
    }

    /// `e^{rT}`, the growth of one unit invested in the bond until expiry.
    pub fn growth(&self) -> f64 {
        (self.rate * self.maturity).exp()
    }

    /// `σ√T`
    pub fn total_vol(&self) -> f64 {
        self.volatility * self.maturity.sqrt()
    }
}

/// The `d` and `d⁻` arguments of the Black-Scholes formula.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DTerms {
    pub d_plus: f64,
    pub d_minus: f64,
}

pub fn d_terms(m: &MarketParams, strike: f64) -> Result<DTerms> {
    require_positive("strike", strike)?;
    Ok(d_terms_unchecked(m, strike))
}

#[inline]
fn d_terms_unchecked(m: &MarketParams, strike: f64) -> DTerms {
    let sd = m.total_vol();
    let v = m.volatility;
    let d_plus = ((m.spot / strike).ln() + m.maturity * (m.rate + 0.5 * v * v)) / sd;
    DTerms {
        d_plus,
        d_minus: d_plus - sd,
    }
}

/// Call premium `S₀Φ(d) − Ke^{−rT}Φ(d⁻)`.
pub fn call_price(m: &MarketParams, strike: f64) -> Result<f64> {
    let d = d_terms(m, strike)?;
    let value = m.spot * norm_cdf(d.d_plus) - strike * m.discount() * norm_cdf(d.d_minus);
    Ok(value.max(0.0))
}

/// Put premium `Ke^{−rT}Φ(−d⁻) − S₀Φ(−d)`.
///
/// Algebraically identical to `call − S₀ + Ke^{−rT}`, but evaluated from the
/// lower tails so that out-of-the-money puts keep their relative precision.
pub fn put_price(m: &MarketParams, strike: f64) -> Result<f64> {
    let d = d_terms(m, strike)?;
    let value = strike * m.discount() * norm_cdf(-d.d_minus) - m.spot * norm_cdf(-d.d_plus);
    Ok(value.max(0.0))
}

/// `∂c/∂S₀ = Φ(d)`
pub fn call_delta(m: &MarketParams, strike: f64) -> Result<f64> {
    Ok(norm_cdf(d_terms(m, strike)?.d_plus))
}

/// `∂p/∂S₀ = Φ(d) − 1`
pub fn put_delta(m: &MarketParams, strike: f64) -> Result<f64> {
    Ok(call_delta(m, strike)? - 1.0)
}

/// Second spot derivative `φ(d)/(S₀σ√T)`, shared by put and call.
pub fn price_convexity(m: &MarketParams, strike: f64) -> Result<f64> {
    let d = d_terms(m, strike)?;
    Ok(norm_pdf(d.d_plus) / (m.spot * m.total_vol()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn strong_example() -> MarketParams {
        MarketParams::new(30.0, 0.05, 0.45, 0.25).unwrap()
    }

    #[test]
    fn rejects_degenerate_markets() {
        assert!(MarketParams::new(0.0, 0.05, 0.45, 0.25).is_err());
        assert!(MarketParams::new(30.0, -0.01, 0.45, 0.25).is_err());
        assert!(MarketParams::new(30.0, 0.05, 0.0, 0.25).is_err());
        assert!(MarketParams::new(30.0, 0.05, 0.45, 0.0).is_err());
        assert!(MarketParams::new(f64::NAN, 0.05, 0.45, 0.25).is_err());
        assert!(MarketParams::with_bond(30.0, 0.05, 0.45, 0.25, 0.0).is_err());
    }

    #[test]
    fn rejects_bad_strikes() {
        let m = strong_example();
        for k in [0.0, -1.0, f64::NAN] {
            assert!(d_terms(&m, k).is_err());
            assert!(call_price(&m, k).is_err());
            assert!(put_price(&m, k).is_err());
            assert!(call_delta(&m, k).is_err());
            assert!(put_delta(&m, k).is_err());
            assert!(price_convexity(&m, k).is_err());
        }
    }

    #[test]
    fn d_terms_reference_cases() {
        let m = strong_example();
        let d = d_terms(&m, 25.0).unwrap();
        assert!((d.d_plus - 0.978).abs() < 1e-3);
        assert_eq!(d.d_minus, d.d_plus - 0.45 * 0.5);
        let atm = d_terms(&m, 30.0).unwrap();
        assert!((atm.d_plus - 0.168).abs() < 1e-3);

        let zero_rate = MarketParams::new(30.0, 0.0, 0.45, 0.25).unwrap();
        let d = d_terms(&zero_rate, 30.0).unwrap();
        assert!((d.d_plus - 0.1125).abs() < 1e-15);
        assert!((d.d_minus + 0.1125).abs() < 1e-15);
    }

    #[test]
    fn limiting_prices() {
        let tiny_vol = MarketParams::new(30.0, 0.0, 1e-6, 0.25).unwrap();
        assert!((call_price(&tiny_vol, 25.0).unwrap() - 5.0).abs() < 1e-9);

        let m = strong_example();
        assert!(call_price(&m, 3000.0).unwrap() < 1e-6);
        assert!(put_price(&m, 0.01).unwrap() < 1e-6);
        assert!(1.0 - call_delta(&m, 0.3).unwrap() < 1e-6);
        assert!(put_delta(&m, 0.3).unwrap() > -1e-6);
        let far = price_convexity(&m, 3000.0).unwrap();
        assert!(far > 0.0 && far < 1e-6);
    }

    #[test]
    fn deltas_match_reference_example() {
        let m = strong_example();
        assert!((call_delta(&m, 25.0).unwrap() - 0.836).abs() < 1e-3);
        assert!((put_delta(&m, 25.0).unwrap() + 0.164).abs() < 1e-3);
        assert!((call_delta(&m, 30.0).unwrap() - 0.567).abs() < 1e-3);
    }

    #[test]
    fn convexity_matches_second_difference() {
        let m = strong_example();
        let h = 1e-3 * m.spot();
        let c = |s: f64| call_price(&m.with_spot(s).unwrap(), 25.0).unwrap();
        let fd = (c(30.0 + h) - 2.0 * c(30.0) + c(30.0 - h)) / (h * h);
        let exact = price_convexity(&m, 25.0).unwrap();
        assert!(exact > 0.0);
        assert!(((fd - exact) / exact).abs() < 1e-4, "{fd} vs {exact}");

        let p = |s: f64| put_price(&m.with_spot(s).unwrap(), 25.0).unwrap();
        let fd_put = (p(30.0 + h) - 2.0 * p(30.0) + p(30.0 - h)) / (h * h);
        assert!((fd_put - fd).abs() < 1e-6);
    }

    #[test]
    fn prices_monotone_in_strike() {
        let m = strong_example();
        let mut last_call = f64::INFINITY;
        let mut last_put = -1.0;
        for i in 1..=200 {
            let k = 0.5 * i as f64;
            let c = call_price(&m, k).unwrap();
            let p = put_price(&m, k).unwrap();
            assert!(c <= last_call && p >= last_put, "k={k}");
            last_call = c;
            last_put = p;
        }
    }

    fn market() -> impl Strategy<Value = MarketParams> {
        (1.0..500.0f64, 0.0..0.2f64, 0.05..1.0f64, 0.05..3.0f64)
            .prop_map(|(s, r, v, t)| MarketParams::new(s, r, v, t).unwrap())
    }

    proptest! {
        #[test]
        fn parity_holds(m in market(), moneyness in 0.5..2.0f64) {
            let k = moneyness * m.spot();
            let c = call_price(&m, k).unwrap();
            let p = put_price(&m, k).unwrap();
            prop_assert!((p - c + m.spot() - k * m.discount()).abs() <= 1e-12);
            prop_assert!(c < m.spot() && c > 0.0);
            prop_assert!(p >= 0.0 && p <= k * m.discount());
        }

        // The O(h²) truncation error of the central difference scales like
        // 1/(σ²T); below σ√T ≈ 0.02 it exceeds 1e-6 at h = 1e-4·S₀.
        #[test]
        fn deltas_match_central_differences(
            m in (1.0..500.0f64, 0.0..0.2f64, 0.1..1.0f64, 0.1..3.0f64)
                .prop_map(|(s, r, v, t)| MarketParams::new(s, r, v, t).unwrap()),
            moneyness in 0.5..2.0f64,
        ) {
            let k = moneyness * m.spot();
            let h = 1e-4 * m.spot();
            let up = m.with_spot(m.spot() + h).unwrap();
            let down = m.with_spot(m.spot() - h).unwrap();
            let fd_call = (call_price(&up, k).unwrap() - call_price(&down, k).unwrap()) / (2.0 * h);
            let fd_put = (put_price(&up, k).unwrap() - put_price(&down, k).unwrap()) / (2.0 * h);
            prop_assert!((fd_call - call_delta(&m, k).unwrap()).abs() < 1e-6);
            prop_assert!((fd_put - put_delta(&m, k).unwrap()).abs() < 1e-6);
            prop_assert_eq!(put_delta(&m, k).unwrap(), call_delta(&m, k).unwrap() - 1.0);
        }

        #[test]
        fn convexity_positive(m in market(), moneyness in 0.5..2.0f64) {
            prop_assert!(price_convexity(&m, moneyness * m.spot()).unwrap() > 0.0);
        }
    }
}
