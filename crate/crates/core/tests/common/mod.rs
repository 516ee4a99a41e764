#![allow(dead_code)]

use optgain::MarketParams;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// A random market with a put strike and a call strike.
#[derive(Debug, Clone, Copy)]
pub struct Case {
    pub market: MarketParams,
    pub put_strike: f64,
    pub call_strike: f64,
}

/// Markets drawn uniformly from S₀ ∈ [1, 500], σ ∈ [0.05, 1], r ∈ [0, 0.2],
/// T ∈ [0.05, 3]. Strikes sit within two standard deviations of log-moneyness,
/// `K = S₀ exp(σ√T u)` with `u ∈ [−2, 2]`, drawn independently per leg.
pub fn random_cases(count: usize, seed: u64) -> Vec<Case> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let spot = rng.random_range(1.0..=500.0);
            let vol = rng.random_range(0.05..=1.0);
            let rate = rng.random_range(0.0..=0.2);
            let maturity = rng.random_range(0.05..=3.0);
            let market = MarketParams::new(spot, rate, vol, maturity).unwrap();
            let sd = market.total_vol();
            let put_strike = spot * (sd * rng.random_range(-2.0..=2.0)).exp();
            let call_strike = spot * (sd * rng.random_range(-2.0..=2.0)).exp();
            Case {
                market,
                put_strike,
                call_strike,
            }
        })
        .collect()
}

/// Market of the worked textbook example: S₀ = 30, r = 5%, σ = 45%, T = 3 months.
pub fn textbook_market() -> MarketParams {
    MarketParams::new(30.0, 0.05, 0.45, 0.25).unwrap()
}
