use std::fs;
use std::path::PathBuf;
use std::process::Command;

use optgain::cli::{run, EXIT_FAILURE, EXIT_OK, EXIT_USAGE};
use optgain::output::{parse_gain_curve, GAIN_CURVE_HEADER};

const MARKET: &[&str] = &["--spot", "30", "--rate", "0.05", "--vol", "0.45", "--maturity", "0.25"];

fn invoke(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("optgain").chain(args.iter().copied());
    let code = run(argv, &mut out, &mut err);
    (
        code,
        String::from_utf8(out).unwrap(),
        String::from_utf8(err).unwrap(),
    )
}

fn with_market(cmd: &str, extra: &[&str]) -> Vec<String> {
    std::iter::once(cmd)
        .chain(MARKET.iter().copied())
        .chain(extra.iter().copied())
        .map(String::from)
        .collect()
}

fn invoke_owned(args: &[String]) -> (i32, String, String) {
    let refs: Vec<&str> = args.iter().map(String::as_str).collect();
    invoke(&refs)
}

fn column(table: &str, name: &str) -> Vec<f64> {
    let mut lines = table.lines().filter(|l| !l.trim().is_empty());
    let header: Vec<&str> = lines.next().unwrap().split_whitespace().collect();
    let idx = header.iter().position(|h| *h == name).unwrap();
    lines
        .map(|l| l.split_whitespace().nth(idx).unwrap().parse().unwrap())
        .collect()
}

fn key_value(text: &str, key: &str) -> f64 {
    text.lines()
        .find_map(|l| {
            let mut it = l.split_whitespace();
            (it.next() == Some(key)).then(|| it.next().unwrap().parse().unwrap())
        })
        .unwrap_or_else(|| panic!("{key} missing in\n{text}"))
}

fn scratch_dir(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("optgain-cli-{}-{name}", std::process::id()));
    fs::create_dir_all(&dir).unwrap();
    dir
}

#[test]
fn price_table_for_the_textbook_strike() {
    let (code, out, err) = invoke_owned(&with_market("price", &["--strike", "25"]));
    assert_eq!(code, EXIT_OK, "{err}");
    assert!((column(&out, "d")[0] - 0.978).abs() <= 1e-3);
    assert!((column(&out, "call_delta")[0] - 0.836).abs() <= 1e-3);
    let parity = column(&out, "call")[0] - column(&out, "put")[0] - 30.0 + 25.0 * (-0.05f64 * 0.25).exp();
    assert!(parity.abs() < 1e-5);
}

#[test]
fn price_at_the_money_delta() {
    let (code, out, _) = invoke_owned(&with_market("price", &["--strike", "30"]));
    assert_eq!(code, EXIT_OK);
    assert!((column(&out, "call_delta")[0] - 0.567).abs() <= 1e-3);
    assert!((column(&out, "d")[0] - 0.168).abs() <= 1e-3);
}

#[test]
fn price_lists_both_legs_when_strikes_differ() {
    let (code, out, _) = invoke_owned(&with_market("price", &["--put-strike", "25", "--call-strike", "35"]));
    assert_eq!(code, EXIT_OK);
    assert_eq!(column(&out, "strike"), vec![25.0, 35.0]);
}

#[test]
fn zero_volatility_is_a_usage_error() {
    let (code, out, err) = invoke(&["price", "--spot", "30", "--rate", "0.05", "--vol", "0", "--maturity", "0.25", "--strike", "25"]);
    assert_eq!(code, EXIT_USAGE);
    assert!(out.is_empty());
    assert!(err.starts_with("error: --vol"), "{err}");
}

#[test]
fn missing_and_unknown_arguments() {
    let (code, _, err) = invoke(&["price", "--spot", "30"]);
    assert_eq!(code, EXIT_USAGE);
    assert!(err.contains("is required"), "{err}");
    assert_eq!(invoke(&["frobnicate"]).0, EXIT_USAGE);
    assert_eq!(invoke(&[]).0, EXIT_USAGE);
    assert_eq!(invoke_owned(&with_market("price", &["--strike", "abc"])).0, EXIT_USAGE);
}

#[test]
fn help_exits_cleanly() {
    let (code, out, _) = invoke(&["--help"]);
    assert_eq!(code, EXIT_OK);
    assert!(out.contains("gain-curve"));
}

#[test]
fn balance_reports_textbook_ratios() {
    for (strike, ratio) in [("25", 0.1962), ("30", 0.7637)] {
        let (code, out, err) = invoke_owned(&with_market("balance", &["--strike", strike]));
        assert_eq!(code, EXIT_OK, "{err}");
        assert!((key_value(&out, "ratio") - ratio).abs() <= 2e-3, "{out}");
        assert_eq!(key_value(&out, "mu_p"), 1.0);
        assert!(key_value(&out, "initial_delta").abs() < 1e-10);
    }
}

#[test]
fn balance_budget_rescales_premium() {
    let (code, out, _) = invoke_owned(&with_market("balance", &["--strike", "25", "--budget", "100"]));
    assert_eq!(code, EXIT_OK);
    assert!((key_value(&out, "initial_wealth") - 100.0).abs() < 1e-4);
    assert!((key_value(&out, "ratio") - 0.1962).abs() <= 2e-3);
}

#[test]
fn gain_curve_csv_round_trips() {
    let (code, out, err) = invoke_owned(&with_market("gain-curve", &["--strike", "25", "--a-min", "-0.45", "--a-max", "0.55", "--a-steps", "21"]));
    assert_eq!(code, EXIT_OK, "{err}");
    assert_eq!(out.lines().next(), Some(GAIN_CURVE_HEADER));
    let points = parse_gain_curve(&out).unwrap();
    assert_eq!(points.len(), 21);
    let at_r = &points[10];
    assert!((at_r.drift - 0.05).abs() < 1e-12);
    assert!(at_r.average_gain.abs() <= 1e-10 * at_r.riskfree_wealth);
    for (i, p) in points.iter().enumerate() {
        assert_eq!(p.average_gain, p.expected_wealth - p.riskfree_wealth);
        if i != 10 {
            assert!(p.average_gain > 0.0, "row {i}: {p:?}");
        }
    }
}

#[test]
fn gain_curve_off_ratio_has_a_losing_row() {
    // μ_c above the balanced 0.196 loses for drifts just below r
    let (code, out, _) = invoke_owned(&with_market("gain-curve", &["--strike", "25", "--mu-c", "0.3", "--a-min", "-0.15", "--a-max", "0.05", "--a-steps", "21"]));
    assert_eq!(code, EXIT_OK);
    let points = parse_gain_curve(&out).unwrap();
    assert!(points.iter().any(|p| p.average_gain < 0.0));
}

#[test]
fn gain_curve_rejects_bad_grids() {
    let (code, _, err) = invoke_owned(&with_market("gain-curve", &["--strike", "25", "--a-min", "1", "--a-max", "0"]));
    assert_eq!(code, EXIT_USAGE);
    assert!(err.contains("--a-min"), "{err}");
    assert_eq!(invoke_owned(&with_market("gain-curve", &["--strike", "25", "--a-steps", "1"])).0, EXIT_USAGE);
}

#[test]
fn verify_passes_and_validates_paths() {
    let (code, out, err) = invoke_owned(&with_market("verify", &["--strike", "25", "--paths", "200000", "--drifts", "-0.15,0.05,0.25"]));
    assert_eq!(code, EXIT_OK, "{out}{err}");
    assert!(out.starts_with("paths 200000, seed 1\n"));
    assert_eq!(out.matches("PASS").count(), 3, "{out}");
    assert!(!out.contains("FAIL"));

    let (code, _, err) = invoke_owned(&with_market("verify", &["--strike", "25", "--paths", "0"]));
    assert_eq!(code, EXIT_USAGE);
    assert!(err.contains("--paths"), "{err}");
    assert_eq!(invoke_owned(&with_market("verify", &["--strike", "25", "--drifts", "0.1,x"])).0, EXIT_USAGE);
}

#[test]
fn seller_report_shows_shrinking_hedge_error() {
    let (code, out, err) = invoke_owned(&with_market("seller", &["--strike", "25", "--paths", "100000", "--hedge-paths", "4000", "--drift", "0.25"]));
    assert_eq!(code, EXIT_OK, "{err}");
    let (hedge, bonds) = out.split_once("strategy II").unwrap();
    let hedge_table = hedge.split_once("paths\n").unwrap().1;
    let rms = column(hedge_table, "rms_error");
    assert_eq!(column(hedge_table, "steps"), vec![32.0, 64.0, 128.0, 256.0]);
    assert!(rms.windows(2).all(|w| w[1] < w[0]), "{rms:?}");
    let bonds_table = bonds.split_once("paths\n").unwrap().1;
    assert!(column(bonds_table, "z")[0] < -3.0, "{out}");
}

#[test]
fn config_file_supplies_defaults_and_flags_override() {
    let dir = scratch_dir("config");
    let path = dir.join("market.conf");
    fs::write(&path, "# textbook market\nspot = 30\nrate = 0.05\nvol = 0.45\nmaturity = 0.25\nstrike = 25\n").unwrap();
    let cfg = path.to_str().unwrap();

    let (code, out, err) = invoke(&["balance", "--config", cfg]);
    assert_eq!(code, EXIT_OK, "{err}");
    assert!((key_value(&out, "ratio") - 0.1962).abs() <= 2e-3);

    let (code, out, _) = invoke(&["balance", "--config", cfg, "--strike", "30"]);
    assert_eq!(code, EXIT_OK);
    assert!((key_value(&out, "ratio") - 0.7637).abs() <= 2e-3);

    let bad = dir.join("bad.conf");
    fs::write(&bad, "spot = 30\ncolour = blue\n").unwrap();
    let (code, _, err) = invoke(&["balance", "--config", bad.to_str().unwrap()]);
    assert_eq!(code, EXIT_USAGE);
    assert!(err.contains("colour"), "{err}");

    let (code, _, _) = invoke(&["balance", "--config", dir.join("missing.conf").to_str().unwrap()]);
    assert_eq!(code, EXIT_USAGE);
    fs::remove_dir_all(dir).unwrap();
}

#[test]
fn out_flag_writes_file_and_reports_io_errors() {
    let dir = scratch_dir("out");
    let target = dir.join("curve.csv");
    let mut args = with_market("gain-curve", &["--strike", "25", "--a-steps", "5", "--out"]);
    args.push(target.to_str().unwrap().to_string());
    let (code, out, _) = invoke_owned(&args);
    assert_eq!(code, EXIT_OK);
    assert!(out.is_empty());
    assert_eq!(parse_gain_curve(&fs::read_to_string(&target).unwrap()).unwrap().len(), 5);

    let mut args = with_market("price", &["--strike", "25", "--out"]);
    args.push(dir.join("no/such/dir/x.txt").to_str().unwrap().to_string());
    let (code, _, err) = invoke_owned(&args);
    assert_eq!(code, EXIT_FAILURE);
    assert!(err.starts_with("error:"), "{err}");
    fs::remove_dir_all(dir).unwrap();
}

#[test]
fn binary_output_is_reproducible() {
    let exe = env!("CARGO_BIN_EXE_optgain");
    let args = with_market("verify", &["--strike", "25", "--paths", "50000", "--seed", "7"]);
    let first = Command::new(exe).args(&args).output().unwrap();
    let second = Command::new(exe).args(&args).output().unwrap();
    assert_eq!(first.status.code(), Some(EXIT_OK));
    assert_eq!(first.stdout, second.stdout);

    let bad = Command::new(exe).args(["price", "--vol", "-1"]).output().unwrap();
    assert_eq!(bad.status.code(), Some(EXIT_USAGE));
}
