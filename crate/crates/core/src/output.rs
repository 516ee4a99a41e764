//! Text renderings: aligned tables for people, CSV for machines.

use std::fmt::Write as _;
use std::io::{self, Write};

use thiserror::Error;

use crate::gain::GainPoint;

pub const GAIN_CURVE_HEADER: &str = "a,expected_wealth,riskfree_wealth,average_gain";

/// Significant digits that make any `f64` survive a text round trip.
pub const LOSSLESS_DIGITS: usize = 17;

/// Scientific notation with `digits` significant digits, e.g. `1.5000e-3`.
pub fn fmt_sig(x: f64, digits: usize) -> String {
    format!("{:.*e}", digits.max(1) - 1, x)
}

/// Fixed notation with `digits` decimals.
pub fn fmt_fixed(x: f64, digits: usize) -> String {
    format!("{x:.digits$}")
}

pub fn write_gain_curve<W: Write>(out: &mut W, points: &[GainPoint], digits: usize) -> io::Result<()> {
    writeln!(out, "{GAIN_CURVE_HEADER}")?;
    for p in points {
        writeln!(
            out,
            "{},{},{},{}",
            fmt_sig(p.drift, digits),
            fmt_sig(p.expected_wealth, digits),
            fmt_sig(p.riskfree_wealth, digits),
            fmt_sig(p.average_gain, digits),
        )?;
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CsvError {
    #[error("missing header row")]
    MissingHeader,
    #[error("unexpected header {0:?}")]
    BadHeader(String),
    #[error("line {line}: expected 4 fields, found {found}")]
    FieldCount { line: usize, found: usize },
    #[error("line {line}: cannot parse {field:?} as a number")]
    BadNumber { line: usize, field: String },
}

/// Reads a gain curve written by [`write_gain_curve`]. Accepts LF or CRLF
/// line endings and a trailing newline.
pub fn parse_gain_curve(text: &str) -> Result<Vec<GainPoint>, CsvError> {
    let mut lines = text.lines().enumerate();
    let header = match lines.next() {
        Some((_, h)) => h.trim_end_matches('\r'),
        None => return Err(CsvError::MissingHeader),
    };
    if header != GAIN_CURVE_HEADER {
        return Err(CsvError::BadHeader(header.to_string()));
    }
    let mut points = Vec::new();
    for (idx, raw) in lines {
        let line = raw.trim_end_matches('\r');
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 4 {
            return Err(CsvError::FieldCount {
                line: idx + 1,
                found: fields.len(),
            });
        }
        let mut values = [0.0; 4];
        for (slot, field) in values.iter_mut().zip(&fields) {
            *slot = field.trim().parse().map_err(|_| CsvError::BadNumber {
                line: idx + 1,
                field: field.to_string(),
            })?;
        }
        points.push(GainPoint {
            drift: values[0],
            expected_wealth: values[1],
            riskfree_wealth: values[2],
            average_gain: values[3],
        });
    }
    Ok(points)
}

/// Right-aligned plain-text table.
#[derive(Debug, Default)]
pub struct Table {
    header: Vec<String>,
    rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new<I, S>(header: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        Self {
            header: header.into_iter().map(Into::into).collect(),
            rows: Vec::new(),
        }
    }

    pub fn row(&mut self, cells: Vec<String>) {
        debug_assert_eq!(cells.len(), self.header.len());
        self.rows.push(cells);
    }

    pub fn render(&self) -> String {
        let mut widths: Vec<usize> = self.header.iter().map(|h| h.len()).collect();
        for row in &self.rows {
            for (w, cell) in widths.iter_mut().zip(row) {
                *w = (*w).max(cell.len());
            }
        }
        let mut out = String::new();
        for line in std::iter::once(&self.header).chain(&self.rows) {
            let cells: Vec<String> = line
                .iter()
                .zip(&widths)
                .map(|(c, w)| format!("{c:>w$}"))
                .collect();
            let _ = writeln!(out, "{}", cells.join("  "));
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn header_and_layout() {
        let p = GainPoint {
            drift: 0.05,
            expected_wealth: 2.0,
            riskfree_wealth: 2.0,
            average_gain: 0.0,
        };
        let mut buf = Vec::new();
        write_gain_curve(&mut buf, &[p], LOSSLESS_DIGITS).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("a,expected_wealth,riskfree_wealth,average_gain\n"));
        assert!(!text.contains('\r'));
        assert_eq!(text.lines().count(), 2);
        assert_eq!(parse_gain_curve(&text).unwrap(), vec![p]);
    }

    #[test]
    fn rejects_malformed_csv() {
        assert_eq!(parse_gain_curve(""), Err(CsvError::MissingHeader));
        assert!(matches!(parse_gain_curve("x,y\n"), Err(CsvError::BadHeader(_))));
        let h = GAIN_CURVE_HEADER;
        assert!(matches!(
            parse_gain_curve(&format!("{h}\n1,2,3\n")),
            Err(CsvError::FieldCount { line: 2, found: 3 })
        ));
        assert!(matches!(
            parse_gain_curve(&format!("{h}\n1,2,3,abc\n")),
            Err(CsvError::BadNumber { line: 2, .. })
        ));
        assert_eq!(parse_gain_curve(&format!("{h}\r\n1,2,3,4\r\n")).unwrap().len(), 1);
    }

    #[test]
    fn table_alignment() {
        let mut t = Table::new(["k", "value"]);
        t.row(vec!["25".into(), "1.5".into()]);
        assert_eq!(t.render(), " k  value\n25    1.5\n");
    }

    proptest! {
        #[test]
        fn seventeen_digits_round_trip(x in any::<f64>().prop_filter("finite", |v| v.is_finite())) {
            let back: f64 = fmt_sig(x, LOSSLESS_DIGITS).parse().unwrap();
            prop_assert_eq!(back.to_bits(), x.to_bits());
        }
    }
}
