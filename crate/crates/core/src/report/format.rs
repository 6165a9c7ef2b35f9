//! Display rules shared by every table and chart: at most two decimals
//! (trailing zeros dropped), thousands separators and integer rounding from
//! 1,000 upward, and a true minus sign.

use crate::pipeline::{MetricRow, MetricUnit};

const MINUS: char = '\u{2212}';

/// `v` with at most two decimals and no trailing zeros.
pub fn decimal(v: f64) -> String {
    let s = format!("{v:.2}");
    let s = if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    };
    let s = if s == "-0" { "0".to_string() } else { s };
    s.replacen('-', &MINUS.to_string(), 1)
}

/// Rounded to an integer with `,` every three digits.
pub fn thousands(v: f64) -> String {
    let r = v.round();
    let digits = format!("{}", r.abs() as u64);
    let mut out = String::new();
    for (i, ch) in digits.chars().enumerate() {
        if i > 0 && (digits.len() - i) % 3 == 0 {
            out.push(',');
        }
        out.push(ch);
    }
    if r < 0.0 {
        out.insert(0, MINUS);
    }
    out
}

pub fn quantity(v: f64) -> String {
    if v.abs() >= 1000.0 {
        thousands(v)
    } else {
        decimal(v)
    }
}

fn signed(v: f64) -> String {
    let d = decimal(v);
    if d == "0" || d.starts_with(MINUS) {
        d
    } else {
        format!("+{d}")
    }
}

pub fn signed_percent(v: f64) -> String {
    format!("{}%", signed(v))
}

pub fn signed_points(v: f64) -> String {
    format!("{} pp", signed(v))
}

pub fn value_cell(row: &MetricRow, v: f64) -> String {
    match row.unit {
        MetricUnit::Percent => format!("{}%", decimal(v)),
        _ => quantity(v),
    }
}

/// Percentage metrics: points, then relative change in parentheses.
/// Other metrics: relative change, or `n/a` when the baseline is zero.
pub fn improvement_cell(row: &MetricRow) -> String {
    match (row.delta_pp, row.delta_relative) {
        (Some(pp), Some(rel)) => format!("{} ({})", signed_points(pp), signed_percent(rel)),
        (Some(pp), None) => signed_points(pp),
        (None, Some(rel)) => signed_percent(rel),
        (None, None) => "n/a".into(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn display_rules() {
        assert_eq!(decimal(3.6), "3.6");
        assert_eq!(decimal(87.666666), "87.67");
        assert_eq!(decimal(-0.001), "0");
        assert_eq!(decimal(-26.666), "\u{2212}26.67");
        assert_eq!(thousands(20_000.0000001), "20,000");
        assert_eq!(thousands(999.6), "1,000");
        assert_eq!(thousands(1_234_567.0), "1,234,567");
        assert_eq!(quantity(22.0), "22");
        assert_eq!(quantity(15_000.0), "15,000");
        assert_eq!(signed_percent(-25.0), "\u{2212}25%");
        assert_eq!(signed_points(17.0), "+17 pp");
        assert_eq!(signed_percent(0.0), "0%");
    }
}
