//! The `optgain` command line.
//!
//! Every numeric flag may also come from a `key = value` file given with
//! `--config`; flags win over the file. Exit codes: 0 success, 1 a
//! verification failed (or output could not be written), 2 bad usage.

use std::ffi::OsString;
use std::fmt;
use std::io::Write;
use std::path::PathBuf;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand};

use crate::bs::{self, MarketParams};
use crate::config::{parse_config, Config};
use crate::error::Error;
use crate::gain::{self, DriftGrid};
use crate::mc::{self, SimConfig};
use crate::output::{self, fmt_fixed, fmt_sig, Table};
use crate::strategy::{self, StrategySpec};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

const TABLE_DIGITS: usize = 6;
/// Pass/fail threshold for analytic vs simulated values, in standard errors.
pub const Z_THRESHOLD: f64 = 3.0;

/// Keys accepted in a configuration file.
pub const CONFIG_KEYS: &[&str] = &[
    "spot",
    "rate",
    "vol",
    "maturity",
    "strike",
    "put-strike",
    "call-strike",
    "mu-p",
    "mu-c",
    "budget",
    "a-min",
    "a-max",
    "a-steps",
    "paths",
    "hedge-paths",
    "steps",
    "seed",
    "drift",
    "drifts",
    "digits",
    "out",
];

#[derive(Debug, Parser)]
#[command(
    name = "optgain",
    version,
    about = "Balanced put/call portfolios under Black-Scholes"
)]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Black-Scholes prices, deltas and d terms for the given strikes
    Price(PriceArgs),
    /// Build the balanced put/call portfolio
    Balance(BalanceArgs),
    /// Tabulate the average gain over a grid of stock drifts (CSV)
    GainCurve(GainCurveArgs),
    /// Compare analytic expected payoffs with Monte Carlo
    Verify(VerifyArgs),
    /// Simulate the seller: delta hedging and premium-in-bonds
    Seller(SellerArgs),
}

#[derive(Debug, Args)]
struct CommonArgs {
    /// key = value file supplying defaults for any flag
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, allow_negative_numbers = true)]
    spot: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    rate: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    vol: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    maturity: Option<f64>,
    /// Digits after the point in tables, significant digits in CSV
    #[arg(long)]
    digits: Option<usize>,
    /// Write the report to this file instead of standard output
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct StrikeArgs {
    /// Strike used for any leg without its own strike flag
    #[arg(long, allow_negative_numbers = true)]
    strike: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    put_strike: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    call_strike: Option<f64>,
}

#[derive(Debug, Args)]
struct QuantityArgs {
    /// Number of puts (default 1)
    #[arg(long, allow_negative_numbers = true)]
    mu_p: Option<f64>,
    /// Number of calls; omit to use the balanced proportion
    #[arg(long, allow_negative_numbers = true)]
    mu_c: Option<f64>,
    /// Rescale both quantities so that the premium equals this amount
    #[arg(long, allow_negative_numbers = true)]
    budget: Option<f64>,
}

#[derive(Debug, Args)]
struct PriceArgs {
    #[command(flatten)]
    common: CommonArgs,
    #[command(flatten)]
    strikes: StrikeArgs,
}

#[derive(Debug, Args)]
struct BalanceArgs {
    #[command(flatten)]
    common: CommonArgs,
    #[command(flatten)]
    strikes: StrikeArgs,
    /// Number of puts (default 1)
    #[arg(long, allow_negative_numbers = true)]
    mu_p: Option<f64>,
    /// Rescale both quantities so that the premium equals this amount
    #[arg(long, allow_negative_numbers = true)]
    budget: Option<f64>,
}

#[derive(Debug, Args)]
struct GainCurveArgs {
    #[command(flatten)]
    common: CommonArgs,
    #[command(flatten)]
    strikes: StrikeArgs,
    #[command(flatten)]
    quantities: QuantityArgs,
    /// Lowest drift (default r - 0.5)
    #[arg(long, allow_negative_numbers = true)]
    a_min: Option<f64>,
    /// Highest drift (default r + 0.5)
    #[arg(long, allow_negative_numbers = true)]
    a_max: Option<f64>,
    /// Number of grid points, at least 2 (default 101)
    #[arg(long)]
    a_steps: Option<usize>,
}

#[derive(Debug, Args)]
struct VerifyArgs {
    #[command(flatten)]
    common: CommonArgs,
    #[command(flatten)]
    strikes: StrikeArgs,
    #[command(flatten)]
    quantities: QuantityArgs,
    /// Simulated paths per drift (default 1000000)
    #[arg(long)]
    paths: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Comma-separated drifts (default r-0.2,r,r+0.2)
    #[arg(long, allow_hyphen_values = true)]
    drifts: Option<List<f64>>,
}

#[derive(Debug, Args)]
struct SellerArgs {
    #[command(flatten)]
    common: CommonArgs,
    #[command(flatten)]
    strikes: StrikeArgs,
    #[command(flatten)]
    quantities: QuantityArgs,
    /// Paths for the premium-in-bonds estimate (default 1000000)
    #[arg(long)]
    paths: Option<usize>,
    /// Paths for the delta-hedging simulation (default 10000)
    #[arg(long)]
    hedge_paths: Option<usize>,
    /// Comma-separated rebalancing counts (default 32,64,128,256)
    #[arg(long)]
    steps: Option<List<usize>>,
    #[arg(long)]
    seed: Option<u64>,
    /// Stock drift used for the simulation (default r)
    #[arg(long, allow_negative_numbers = true)]
    drift: Option<f64>,
}

/// Comma-separated list value.
#[derive(Debug, Clone, PartialEq)]
pub struct List<T>(pub Vec<T>);

impl<T: FromStr> FromStr for List<T> {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_list(s).map(List)
    }
}

/// Parses `1,2, 3` into its items; empty lists and empty items are errors.
pub fn parse_list<T: FromStr>(s: &str) -> Result<Vec<T>, String> {
    if s.trim().is_empty() {
        return Err("empty list".into());
    }
    s.split(',')
        .map(|item| {
            let item = item.trim();
            item.parse()
                .map_err(|_| format!("cannot parse list item {item:?}"))
        })
        .collect()
}

/// A usage problem tied to the flag (or config key) that caused it.
#[derive(Debug, Clone, PartialEq)]
pub struct UsageError {
    pub flag: String,
    pub message: String,
}

impl UsageError {
    fn new(flag: impl Into<String>, message: impl Into<String>) -> Self {
        Self {
            flag: flag.into(),
            message: message.into(),
        }
    }
}

impl fmt::Display for UsageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.flag, self.message)
    }
}

impl From<Error> for UsageError {
    fn from(e: Error) -> Self {
        let flag = match &e {
            Error::Domain { name, .. } => match *name {
                "spot" => "--spot",
                "rate" => "--rate",
                "volatility" => "--vol",
                "maturity" => "--maturity",
                "strike" => "--strike",
                "put_strike" => "--put-strike",
                "call_strike" => "--call-strike",
                "put_quantity" => "--mu-p",
                "call_quantity" => "--mu-c",
                "budget" => "--budget",
                "drift" => "--drift",
                "path_count" => "--paths",
                "step_count" => "--steps",
                _ => "input",
            },
            Error::InvalidGrid(_) => "--a-min/--a-max/--a-steps",
            Error::InvalidStrategy(_) => "--mu-p/--mu-c",
            _ => "input",
        };
        UsageError::new(flag, e.to_string())
    }
}

enum Failure {
    Usage(UsageError),
    Runtime(String),
}

impl From<UsageError> for Failure {
    fn from(e: UsageError) -> Self {
        Failure::Usage(e)
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Usage(e.into())
    }
}

/// Flag values backed by an optional configuration file.
struct Settings {
    config: Config,
}

impl Settings {
    fn load(path: Option<&PathBuf>) -> Result<Self, UsageError> {
        let Some(path) = path else {
            return Ok(Self {
                config: Config::default(),
            });
        };
        let text = std::fs::read_to_string(path)
            .map_err(|e| UsageError::new("--config", format!("{}: {e}", path.display())))?;
        let config = parse_config(&text)
            .map_err(|e| UsageError::new("--config", format!("{}: {e}", path.display())))?;
        if let Some(bad) = config.keys().find(|k| !CONFIG_KEYS.contains(k)) {
            return Err(UsageError::new(
                "--config",
                format!(
                    "{}: unknown key {bad:?} on line {}",
                    path.display(),
                    config.line_of(bad).unwrap_or(0)
                ),
            ));
        }
        Ok(Self { config })
    }

    fn get<T: FromStr>(&self, flag: Option<T>, key: &str) -> Result<Option<T>, UsageError> {
        if flag.is_some() {
            return Ok(flag);
        }
        match self.config.get(key) {
            None => Ok(None),
            Some(raw) => raw.parse().map(Some).map_err(|_| {
                UsageError::new(
                    format!("--{key}"),
                    format!(
                        "cannot parse {raw:?} (config line {})",
                        self.config.line_of(key).unwrap_or(0)
                    ),
                )
            }),
        }
    }

    fn require<T: FromStr>(&self, flag: Option<T>, key: &str) -> Result<T, UsageError> {
        self.get(flag, key)?
            .ok_or_else(|| UsageError::new(format!("--{key}"), "is required"))
    }

    fn market(&self, c: &CommonArgs) -> Result<MarketParams, UsageError> {
        let spot = self.require(c.spot, "spot")?;
        let rate = self.require(c.rate, "rate")?;
        let vol = self.require(c.vol, "vol")?;
        let maturity = self.require(c.maturity, "maturity")?;
        Ok(MarketParams::new(spot, rate, vol, maturity)?)
    }

    fn digits(&self, c: &CommonArgs, default: usize) -> Result<usize, UsageError> {
        let d = self.get(c.digits, "digits")?.unwrap_or(default);
        if !(1..=30).contains(&d) {
            return Err(UsageError::new("--digits", format!("must be in 1..=30 (got {d})")));
        }
        Ok(d)
    }

    fn out(&self, c: &CommonArgs) -> Result<Option<PathBuf>, UsageError> {
        self.get(c.out.clone(), "out")
    }

    /// (put strike, call strike), each falling back to `--strike`.
    fn strikes(&self, s: &StrikeArgs) -> Result<(f64, f64), UsageError> {
        let shared = self.get(s.strike, "strike")?;
        let put = self.get(s.put_strike, "put-strike")?.or(shared);
        let call = self.get(s.call_strike, "call-strike")?.or(shared);
        match (put, call) {
            (Some(p), Some(c)) => Ok((p, c)),
            (None, _) => Err(UsageError::new("--put-strike", "is required (or --strike)")),
            (_, None) => Err(UsageError::new("--call-strike", "is required (or --strike)")),
        }
    }

    fn strategy(
        &self,
        m: &MarketParams,
        strikes: &StrikeArgs,
        mu_p: Option<f64>,
        mu_c: Option<f64>,
        budget: Option<f64>,
    ) -> Result<StrategySpec, UsageError> {
        let (kp, kc) = self.strikes(strikes)?;
        let mu_p = self.get(mu_p, "mu-p")?.unwrap_or(1.0);
        let spec = match mu_c {
            Some(mu_c) => StrategySpec::new(kp, mu_p, kc, mu_c)?,
            None => {
                if !(mu_p.is_finite() && mu_p > 0.0) {
                    return Err(UsageError::new(
                        "--mu-p",
                        format!("must be > 0 for a balanced portfolio (got {mu_p})"),
                    ));
                }
                strategy::make_balanced_strategy(m, kp, kc)?.scaled(mu_p)?
            }
        };
        match self.get(budget, "budget")? {
            Some(b) => Ok(spec.with_budget(m, b)?),
            None => Ok(spec),
        }
    }

    fn quantities(
        &self,
        m: &MarketParams,
        strikes: &StrikeArgs,
        q: &QuantityArgs,
    ) -> Result<StrategySpec, UsageError> {
        let mu_c = self.get(q.mu_c, "mu-c")?;
        self.strategy(m, strikes, q.mu_p, mu_c, q.budget)
    }
}

/// Parses `args` (including the program name), runs the command and returns
/// the process exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = e.exit_code();
            let text = e.render().to_string();
            if code == 0 {
                let _ = stdout.write_all(text.as_bytes());
                return EXIT_OK;
            }
            let _ = stderr.write_all(text.as_bytes());
            return EXIT_USAGE;
        }
    };

    let result = match &cli.command {
        Command::Price(a) => with_settings(&a.common, |s| cmd_price(s, a)),
        Command::Balance(a) => with_settings(&a.common, |s| cmd_balance(s, a)),
        Command::GainCurve(a) => with_settings(&a.common, |s| cmd_gain_curve(s, a)),
        Command::Verify(a) => with_settings(&a.common, |s| cmd_verify(s, a)),
        Command::Seller(a) => with_settings(&a.common, |s| cmd_seller(s, a)),
    };

    match result {
        Ok((out_path, report, code)) => {
            let written = match out_path {
                Some(path) => std::fs::write(&path, report.as_bytes())
                    .map_err(|e| format!("cannot write {}: {e}", path.display())),
                None => stdout
                    .write_all(report.as_bytes())
                    .map_err(|e| format!("cannot write output: {e}")),
            };
            match written {
                Ok(()) => code,
                Err(msg) => {
                    let _ = writeln!(stderr, "error: {msg}");
                    EXIT_FAILURE
                }
            }
        }
        Err(Failure::Usage(e)) => {
            let _ = writeln!(stderr, "error: {e}");
            EXIT_USAGE
        }
        Err(Failure::Runtime(msg)) => {
            let _ = writeln!(stderr, "error: {msg}");
            EXIT_FAILURE
        }
    }
}

type Outcome = Result<(Option<PathBuf>, String, i32), Failure>;

fn with_settings<F>(common: &CommonArgs, f: F) -> Outcome
where
    F: FnOnce(&Settings) -> Result<(String, i32), Failure>,
{
    let settings = Settings::load(common.config.as_ref())?;
    let out = settings.out(common)?;
    let (report, code) = f(&settings)?;
    Ok((out, report, code))
}

fn key_values(rows: &[(&str, String)]) -> String {
    let width = rows.iter().map(|(k, _)| k.len()).max().unwrap_or(0);
    rows.iter()
        .map(|(k, v)| format!("{k:<width$}  {v}\n"))
        .collect()
}

fn cmd_price(s: &Settings, a: &PriceArgs) -> Result<(String, i32), Failure> {
    let m = s.market(&a.common)?;
    let digits = s.digits(&a.common, TABLE_DIGITS)?;
    let mut strikes = Vec::new();
    for (flag, key) in [
        (a.strikes.strike, "strike"),
        (a.strikes.put_strike, "put-strike"),
        (a.strikes.call_strike, "call-strike"),
    ] {
        if let Some(k) = s.get(flag, key)? {
            if !(k.is_finite() && k > 0.0) {
                return Err(UsageError::new(
                    format!("--{key}"),
                    format!("strike must be finite and > 0 (got {k})"),
                )
                .into());
            }
            if !strikes.contains(&k) {
                strikes.push(k);
            }
        }
    }
    if strikes.is_empty() {
        return Err(UsageError::new("--strike", "is required (or --put-strike/--call-strike)").into());
    }

    let mut table = Table::new([
        "strike",
        "d",
        "d_minus",
        "call",
        "put",
        "call_delta",
        "put_delta",
        "gamma",
    ]);
    for k in strikes {
        let d = bs::d_terms(&m, k)?;
        table.row(
            [
                k,
                d.d_plus,
                d.d_minus,
                bs::call_price(&m, k)?,
                bs::put_price(&m, k)?,
                bs::call_delta(&m, k)?,
                bs::put_delta(&m, k)?,
                bs::price_convexity(&m, k)?,
            ]
            .iter()
            .map(|&v| fmt_fixed(v, digits))
            .collect(),
        );
    }
    Ok((table.render(), EXIT_OK))
}

fn cmd_balance(s: &Settings, a: &BalanceArgs) -> Result<(String, i32), Failure> {
    let m = s.market(&a.common)?;
    let digits = s.digits(&a.common, TABLE_DIGITS)?;
    let spec = s.strategy(&m, &a.strikes, a.mu_p, None, a.budget)?;
    let x0 = strategy::initial_wealth(&spec, &m)?;
    let delta = strategy::portfolio_delta(&spec, m.spot(), 0.0, &m)?;
    let f = |v: f64| fmt_fixed(v, digits);
    Ok((
        key_values(&[
            ("put_strike", f(spec.put_strike())),
            ("call_strike", f(spec.call_strike())),
            ("mu_p", f(spec.put_quantity())),
            ("mu_c", f(spec.call_quantity())),
            ("ratio", f(spec.call_quantity() / spec.put_quantity())),
            ("initial_wealth", f(x0)),
            ("initial_delta", fmt_sig(delta, digits)),
        ]),
        EXIT_OK,
    ))
}

fn cmd_gain_curve(s: &Settings, a: &GainCurveArgs) -> Result<(String, i32), Failure> {
    let m = s.market(&a.common)?;
    let digits = s.digits(&a.common, output::LOSSLESS_DIGITS)?;
    let spec = s.quantities(&m, &a.strikes, &a.quantities)?;
    let a_min = s.get(a.a_min, "a-min")?.unwrap_or(m.rate() - 0.5);
    let a_max = s.get(a.a_max, "a-max")?.unwrap_or(m.rate() + 0.5);
    let steps = s.get(a.a_steps, "a-steps")?.unwrap_or(101);
    if a_min.is_nan() || a_max.is_nan() || a_min >= a_max {
        return Err(UsageError::new(
            "--a-min",
            format!("must be below --a-max (got {a_min} >= {a_max})"),
        )
        .into());
    }
    if steps < 2 {
        return Err(UsageError::new("--a-steps", format!("must be at least 2 (got {steps})")).into());
    }
    let grid = DriftGrid::linspace(a_min, a_max, steps)?;
    let points = gain::gain_curve(&spec, &m, &grid)?;
    let mut buf = Vec::new();
    output::write_gain_curve(&mut buf, &points, digits)
        .map_err(|e| Failure::Runtime(e.to_string()))?;
    let text = String::from_utf8(buf).map_err(|e| Failure::Runtime(e.to_string()))?;
    Ok((text, EXIT_OK))
}

fn positive_count(value: usize, flag: &str) -> Result<usize, UsageError> {
    if value == 0 {
        Err(UsageError::new(flag, "must be at least 1 (got 0)"))
    } else {
        Ok(value)
    }
}

/// z-score of a simulated mean against its analytic value.
pub fn z_score(analytic: f64, mean: f64, std_error: f64) -> f64 {
    let diff = mean - analytic;
    if std_error > 0.0 {
        diff / std_error
    } else if diff == 0.0 {
        0.0
    } else {
        f64::INFINITY.copysign(diff)
    }
}

fn cmd_verify(s: &Settings, a: &VerifyArgs) -> Result<(String, i32), Failure> {
    let m = s.market(&a.common)?;
    let digits = s.digits(&a.common, TABLE_DIGITS)?;
    let spec = s.quantities(&m, &a.strikes, &a.quantities)?;
    let paths = positive_count(s.get(a.paths, "paths")?.unwrap_or(1_000_000), "--paths")?;
    let seed = s.get(a.seed, "seed")?.unwrap_or(1);
    let drifts = match s.get(a.drifts.clone(), "drifts")? {
        Some(List(d)) => d,
        None => vec![m.rate() - 0.2, m.rate(), m.rate() + 0.2],
    };
    if let Some(bad) = drifts.iter().find(|d| !d.is_finite()) {
        return Err(UsageError::new("--drifts", format!("drift must be finite (got {bad})")).into());
    }

    let mut table = Table::new(["drift", "analytic", "mc_mean", "std_error", "z", "result"]);
    let mut all_pass = true;
    for &drift in &drifts {
        let analytic = gain::expected_terminal_wealth(&spec, &m, drift)?;
        let est = mc::mc_expected_payoff(&spec, &m, &SimConfig::new(paths, 1, seed, drift)?)?;
        let z = z_score(analytic, est.mean, est.std_error);
        let pass = z.abs() <= Z_THRESHOLD;
        all_pass &= pass;
        table.row(vec![
            fmt_fixed(drift, digits),
            fmt_fixed(analytic, digits),
            fmt_fixed(est.mean, digits),
            fmt_fixed(est.std_error, digits),
            format!("{z:.2}"),
            if pass { "PASS" } else { "FAIL" }.to_string(),
        ]);
    }
    let mut report = format!("paths {paths}, seed {seed}\n");
    report.push_str(&table.render());
    Ok((report, if all_pass { EXIT_OK } else { EXIT_FAILURE }))
}

fn cmd_seller(s: &Settings, a: &SellerArgs) -> Result<(String, i32), Failure> {
    let m = s.market(&a.common)?;
    let digits = s.digits(&a.common, TABLE_DIGITS)?;
    let spec = s.quantities(&m, &a.strikes, &a.quantities)?;
    let paths = positive_count(s.get(a.paths, "paths")?.unwrap_or(1_000_000), "--paths")?;
    let hedge_paths = positive_count(
        s.get(a.hedge_paths, "hedge-paths")?.unwrap_or(10_000),
        "--hedge-paths",
    )?;
    let steps = match s.get(a.steps.clone(), "steps")? {
        Some(List(v)) => v,
        None => vec![32, 64, 128, 256],
    };
    for &n in &steps {
        positive_count(n, "--steps")?;
    }
    let seed = s.get(a.seed, "seed")?.unwrap_or(1);
    let drift = s.get(a.drift, "drift")?.unwrap_or(m.rate());
    if !drift.is_finite() {
        return Err(UsageError::new("--drift", format!("must be finite (got {drift})")).into());
    }
    let x0 = strategy::initial_wealth(&spec, &m)?;

    let mut report = format!(
        "premium X0 {}, drift {}, seed {seed}\n\n",
        fmt_fixed(x0, digits),
        fmt_fixed(drift, digits)
    );
    report.push_str(&format!("strategy I: delta hedging, {hedge_paths} paths\n"));
    let mut hedge = Table::new(["steps", "mean_error", "rms_error", "rms_over_x0"]);
    for &n in &steps {
        let r = mc::simulate_delta_hedge(&spec, &m, &SimConfig::new(hedge_paths, n, seed, drift)?)?;
        hedge.row(vec![
            n.to_string(),
            fmt_fixed(r.mean_error, digits),
            fmt_fixed(r.rms_error, digits),
            fmt_fixed(r.rms_error / x0, digits),
        ]);
    }
    report.push_str(&hedge.render());

    let est = mc::seller_bonds_only(&spec, &m, &SimConfig::new(paths, 1, seed, drift)?)?;
    report.push_str(&format!("\nstrategy II: premium in bonds, {paths} paths\n"));
    let mut bonds = Table::new(["bond_wealth", "mean_net_wealth", "std_error", "z"]);
    bonds.row(vec![
        fmt_fixed(m.growth() * x0, digits),
        fmt_fixed(est.mean, digits),
        fmt_fixed(est.std_error, digits),
        format!("{:.2}", z_score(0.0, est.mean, est.std_error)),
    ]);
    report.push_str(&bonds.render());
    Ok((report, EXIT_OK))
}
