//! Monte Carlo counterparts of the analytic results, and the two seller
//! strategies: delta-hedged replication and keeping the premium in bonds.
//!
//! Stock paths follow the exact lognormal solution
//! `S_t = S₀ exp((a − σ²/2)t + σ w_t)`, so the only discretization in the
//! module is the hedge rebalancing grid.
//!
//! Path `i` draws its normals from a ChaCha8 generator keyed by `seed` on
//! stream `i`. Paths are grouped into fixed-size blocks whose statistics are
//! merged in block order, so every estimate is bit-identical no matter how
//! many worker threads rayon uses.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::bs::MarketParams;
use crate::error::{require_finite, Error, Result};
use crate::strategy::{self, StrategySpec};

const BLOCK_SIZE: usize = 4096;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimConfig {
    pub path_count: usize,
    /// Rebalancing dates for the hedging simulation.
    pub step_count: usize,
    pub seed: u64,
    /// Real-world appreciation rate of the stock.
    pub drift: f64,
}

impl SimConfig {
    pub fn new(path_count: usize, step_count: usize, seed: u64, drift: f64) -> Result<Self> {
        let cfg = Self {
            path_count,
            step_count,
            seed,
            drift,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.path_count == 0 {
            return Err(Error::Domain {
                name: "path_count",
                requirement: ">= 1",
                value: 0.0,
            });
        }
        if self.step_count == 0 {
            return Err(Error::Domain {
                name: "step_count",
                requirement: ">= 1",
                value: 0.0,
            });
        }
        require_finite("drift", self.drift)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McEstimate {
    pub mean: f64,
    /// Unbiased sample standard deviation over `√path_count`.
    pub std_error: f64,
    pub path_count: usize,
    pub seed: u64,
}

/// Terminal seller wealth `Ŷ_T = Y_T − X_T` under discrete delta hedging.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HedgeResult {
    pub mean_error: f64,
    pub rms_error: f64,
    pub path_count: usize,
    pub step_count: usize,
    /// Shares bought at time zero, `Δ(S₀, 0)`.
    pub initial_shares: f64,
}

/// The random stream for path `index`.
pub fn path_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// `S_T = S₀ exp((a − σ²/2)T + σ√T z)` for a standard normal draw `z`.
pub fn terminal_price_sample(m: &MarketParams, drift: f64, normal_draw: f64) -> Result<f64> {
    require_finite("drift", drift)?;
    require_finite("normal_draw", normal_draw)?;
    Ok(terminal_price(m, drift, normal_draw))
}

#[inline]
fn terminal_price(m: &MarketParams, drift: f64, z: f64) -> f64 {
    let v = m.volatility();
    m.spot() * ((drift - 0.5 * v * v) * m.maturity() + m.total_vol() * z).exp()
}

/// Running mean and sum of squared deviations.
#[derive(Debug, Clone, Copy, Default)]
struct Moments {
    n: f64,
    mean: f64,
    m2: f64,
}

impl Moments {
    fn push(&mut self, x: f64) {
        self.n += 1.0;
        let delta = x - self.mean;
        self.mean += delta / self.n;
        self.m2 += delta * (x - self.mean);
    }

    fn merge(self, other: Moments) -> Moments {
        if self.n == 0.0 {
            return other;
        }
        let n = self.n + other.n;
        let delta = other.mean - self.mean;
        Moments {
            n,
            mean: self.mean + delta * other.n / n,
            m2: self.m2 + other.m2 + delta * delta * self.n * other.n / n,
        }
    }

    fn sample_variance(&self) -> f64 {
        if self.n > 1.0 {
            self.m2 / (self.n - 1.0)
        } else {
            0.0
        }
    }
}

/// Evaluates `sample` once per path and reduces the results
/// deterministically.
fn simulate<F>(path_count: usize, seed: u64, sample: F) -> Result<Moments>
where
    F: Fn(&mut ChaCha8Rng) -> Result<f64> + Sync,
{
    let blocks = path_count.div_ceil(BLOCK_SIZE);
    let partial: Vec<Moments> = (0..blocks)
        .into_par_iter()
        .map(|b| {
            let start = b * BLOCK_SIZE;
            let end = (start + BLOCK_SIZE).min(path_count);
            let mut acc = Moments::default();
            for i in start..end {
                let mut rng = path_rng(seed, i as u64);
                acc.push(sample(&mut rng)?);
            }
            Ok(acc)
        })
        .collect::<Result<_>>()?;
    Ok(partial.into_iter().fold(Moments::default(), Moments::merge))
}

/// Mean of the portfolio payoff over independent terminal prices under the
/// configured drift.
pub fn mc_expected_payoff(s: &StrategySpec, m: &MarketParams, cfg: &SimConfig) -> Result<McEstimate> {
    cfg.validate()?;
    let moments = simulate(cfg.path_count, cfg.seed, |rng| {
        let z: f64 = rng.sample(StandardNormal);
        Ok(strategy::payoff(s, terminal_price(m, cfg.drift, z)))
    })?;
    Ok(McEstimate {
        mean: moments.mean,
        std_error: (moments.sample_variance() / moments.n).sqrt(),
        path_count: cfg.path_count,
        seed: cfg.seed,
    })
}

/// Discounted terminal stock price `e^{−rT}S_T`; a martingale check at
/// `drift = r`.
pub fn mc_discounted_terminal_price(m: &MarketParams, cfg: &SimConfig) -> Result<McEstimate> {
    cfg.validate()?;
    let df = m.discount();
    let moments = simulate(cfg.path_count, cfg.seed, |rng| {
        let z: f64 = rng.sample(StandardNormal);
        Ok(df * terminal_price(m, cfg.drift, z))
    })?;
    Ok(McEstimate {
        mean: moments.mean,
        std_error: (moments.sample_variance() / moments.n).sqrt(),
        path_count: cfg.path_count,
        seed: cfg.seed,
    })
}

/// Seller who receives `X₀`, trades `Δ(S_{t_k}, t_k)` shares at each
/// rebalancing date `t_k = kT/N` with the rest in the bond, and pays the
/// claim at expiry.
pub fn simulate_delta_hedge(s: &StrategySpec, m: &MarketParams, cfg: &SimConfig) -> Result<HedgeResult> {
    cfg.validate()?;
    let n = cfg.step_count;
    let dt = m.maturity() / n as f64;
    let bond_growth = (m.rate() * dt).exp();
    let v = m.volatility();
    let log_drift = (cfg.drift - 0.5 * v * v) * dt;
    let log_vol = v * dt.sqrt();
    let premium = strategy::initial_wealth(s, m)?;
    let initial_shares = strategy::portfolio_delta(s, m.spot(), 0.0, m)?;

    let moments = simulate(cfg.path_count, cfg.seed, |rng| {
        let mut spot = m.spot();
        let mut shares = initial_shares;
        let mut bond = premium - shares * spot;
        for k in 1..n {
            let z: f64 = rng.sample(StandardNormal);
            spot *= (log_drift + log_vol * z).exp();
            bond *= bond_growth;
            let wealth = shares * spot + bond;
            shares = strategy::portfolio_delta(s, spot, k as f64 * dt, m)?;
            bond = wealth - shares * spot;
        }
        let z: f64 = rng.sample(StandardNormal);
        spot *= (log_drift + log_vol * z).exp();
        bond *= bond_growth;
        Ok(shares * spot + bond - strategy::payoff(s, spot))
    })?;

    Ok(HedgeResult {
        mean_error: moments.mean,
        rms_error: (moments.m2 / moments.n + moments.mean * moments.mean).sqrt(),
        path_count: cfg.path_count,
        step_count: n,
        initial_shares,
    })
}

/// Seller who keeps the premium in the bond: net terminal wealth
/// `e^{rT}X₀ − X_T`, estimated on the same paths as [`mc_expected_payoff`].
pub fn seller_bonds_only(s: &StrategySpec, m: &MarketParams, cfg: &SimConfig) -> Result<McEstimate> {
    let buyer = mc_expected_payoff(s, m, cfg)?;
    let bond_wealth = m.growth() * strategy::initial_wealth(s, m)?;
    Ok(McEstimate {
        mean: bond_wealth - buyer.mean,
        ..buyer
    })
}
