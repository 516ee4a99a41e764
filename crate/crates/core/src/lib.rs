//! Buy-and-hold put/call portfolios under the Black-Scholes model.
//!
//! The library prices the two legs in closed form ([`bs`]), builds the
//! portfolio whose call/put proportion `(1 − Φ(d_p))/Φ(d_c)` makes it
//! delta-neutral at inception ([`strategy`]), and studies its expected gain
//! over the bond as the stock's drift varies ([`gain`]). For a balanced
//! portfolio that gain is zero at `a = r` and positive for every other drift.
//! [`mc`] re-derives the same quantities by simulation and runs the seller's
//! side of the trade.

pub mod bs;
pub mod cli;
pub mod config;
pub mod error;
pub mod gain;
pub mod mc;
pub mod normal;
pub mod output;
pub mod strategy;

pub use bs::{MarketParams, DTerms};
pub use error::{Error, Result};
pub use gain::{DriftGrid, GainPoint};
pub use mc::{HedgeResult, McEstimate, SimConfig};
pub use strategy::{PortfolioState, StrategySpec};
