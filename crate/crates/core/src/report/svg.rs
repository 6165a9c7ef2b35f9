//! Grouped bar charts (baseline vs framework per metric) as standalone SVG.

use std::fmt::{self, Write as _};
use std::str::FromStr;

use super::format::value_cell;
use super::ReportError;
use crate::pipeline::{ImprovementReport, MetricRow, MetricUnit};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ChartKind {
    Recovery,
    Energy,
    Carbon,
    Waste,
    Comparison,
}

impl ChartKind {
    pub const ALL: [ChartKind; 5] = [
        ChartKind::Recovery,
        ChartKind::Energy,
        ChartKind::Carbon,
        ChartKind::Waste,
        ChartKind::Comparison,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ChartKind::Recovery => "recovery",
            ChartKind::Energy => "energy",
            ChartKind::Carbon => "carbon",
            ChartKind::Waste => "waste",
            ChartKind::Comparison => "comparison",
        }
    }

    fn title(self) -> &'static str {
        match self {
            ChartKind::Recovery => "Element recovery rates",
            ChartKind::Energy => "Process energy consumption",
            ChartKind::Carbon => "CO₂ emissions",
            ChartKind::Waste => "Urban waste management",
            ChartKind::Comparison => "Baseline vs framework",
        }
    }

    fn selects(self, row: &MetricRow) -> bool {
        match self {
            ChartKind::Recovery => row.key.ends_with("_recovery") && row.key != "average_recovery",
            ChartKind::Energy => row.key == "energy",
            ChartKind::Carbon => row.key == "co2",
            ChartKind::Waste => row.key == "classification_accuracy" || row.key == "transport_share",
            ChartKind::Comparison => row.unit == MetricUnit::Percent,
        }
    }
}

impl fmt::Display for ChartKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ChartKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| format!("unknown chart kind `{s}`"))
    }
}

const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 420.0;
const LEFT: f64 = 80.0;
const RIGHT: f64 = 20.0;
const TOP: f64 = 60.0;
const BOTTOM: f64 = 70.0;
const BASELINE_FILL: &str = "#9e9e9e";
const FRAMEWORK_FILL: &str = "#2e7d32";
const TICKS: usize = 5;

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

/// Axis maximum rounded up to 1, 2, 2.5 or 5 times a power of ten.
fn nice_max(v: f64) -> f64 {
    if v <= 0.0 {
        return 1.0;
    }
    let mag = 10f64.powf(v.log10().floor());
    for m in [1.0, 2.0, 2.5, 5.0, 10.0] {
        if m * mag >= v {
            return m * mag;
        }
    }
    10.0 * mag
}

fn short_label(label: &str) -> &str {
    label.split(" (").next().unwrap_or(label)
}

fn axis_label(rows: &[&MetricRow]) -> &'static str {
    let unit = rows[0].unit;
    if rows.iter().any(|r| r.unit != unit) {
        return "value";
    }
    match unit {
        MetricUnit::Percent => "percent",
        MetricUnit::Kwh => "kWh",
        MetricUnit::Tons => "tons CO₂",
        MetricUnit::Kg => "kg CO₂",
    }
}

pub fn render_chart(report: &ImprovementReport, kind: ChartKind) -> Result<String, ReportError> {
    let rows: Vec<&MetricRow> = report.rows.iter().filter(|r| kind.selects(r)).collect();
    if rows.is_empty() {
        return Err(ReportError::MissingMetric(kind.to_string()));
    }
    let max = nice_max(rows.iter().map(|r| r.baseline.max(r.framework)).fold(0.0, f64::max));
    let plot_w = WIDTH - LEFT - RIGHT;
    let plot_h = HEIGHT - TOP - BOTTOM;
    let group_w = plot_w / rows.len() as f64;
    let bar_w = (group_w * 0.3).min(80.0);
    let y_of = |v: f64| TOP + plot_h * (1.0 - v.max(0.0) / max);

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<text x="{:.2}" y="28" text-anchor="middle" font-size="16" font-weight="bold">{}</text>"#,
        WIDTH / 2.0,
        escape(kind.title())
    );

    for i in 0..=TICKS {
        let v = max * i as f64 / TICKS as f64;
        let y = y_of(v);
        let _ = writeln!(
            s,
            r##"<line x1="{LEFT:.2}" y1="{y:.2}" x2="{:.2}" y2="{y:.2}" stroke="#e0e0e0"/>"##,
            WIDTH - RIGHT
        );
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{}</text>"#,
            LEFT - 8.0,
            y + 4.0,
            escape(&super::format::quantity(v))
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="20" y="{:.2}" text-anchor="middle" transform="rotate(-90 20 {:.2})">{}</text>"#,
        TOP + plot_h / 2.0,
        TOP + plot_h / 2.0,
        escape(axis_label(&rows))
    );
    let _ = writeln!(
        s,
        r#"<line x1="{LEFT:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="black"/>"#,
        TOP + plot_h,
        WIDTH - RIGHT,
        TOP + plot_h
    );
    let _ = writeln!(
        s,
        r#"<line x1="{LEFT:.2}" y1="{TOP:.2}" x2="{LEFT:.2}" y2="{:.2}" stroke="black"/>"#,
        TOP + plot_h
    );

    for (g, row) in rows.iter().enumerate() {
        let center = LEFT + group_w * (g as f64 + 0.5);
        for (k, (v, fill)) in [(row.baseline, BASELINE_FILL), (row.framework, FRAMEWORK_FILL)]
            .into_iter()
            .enumerate()
        {
            let x = center + (k as f64 - 1.0) * bar_w;
            let y = y_of(v);
            let _ = writeln!(
                s,
                r#"<rect x="{x:.2}" y="{y:.2}" width="{bar_w:.2}" height="{:.2}" fill="{fill}"/>"#,
                TOP + plot_h - y
            );
            let _ = writeln!(
                s,
                r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
                x + bar_w / 2.0,
                y - 4.0,
                escape(&value_cell(row, v))
            );
        }
        let _ = writeln!(
            s,
            r#"<text x="{center:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
            TOP + plot_h + 20.0,
            escape(short_label(&row.label))
        );
    }

    let ly = HEIGHT - 22.0;
    for (i, (name, fill)) in [("Baseline", BASELINE_FILL), ("Framework", FRAMEWORK_FILL)].into_iter().enumerate() {
        let x = WIDTH / 2.0 - 110.0 + i as f64 * 120.0;
        let _ = writeln!(
            s,
            r#"<rect x="{x:.2}" y="{:.2}" width="14" height="14" fill="{fill}"/>"#,
            ly - 11.0
        );
        let _ = writeln!(s, r#"<text x="{:.2}" y="{ly:.2}">{name}</text>"#, x + 20.0);
    }
    s.push_str("</svg>\n");
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nice_axis() {
        assert_eq!(nice_max(90.0), 100.0);
        assert_eq!(nice_max(20_000.0), 20_000.0);
        assert_eq!(nice_max(21_000.0), 25_000.0);
        assert_eq!(nice_max(0.0), 1.0);
        assert_eq!(nice_max(3.2), 5.0);
    }
}
