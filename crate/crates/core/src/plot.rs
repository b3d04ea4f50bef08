//! Minimal SVG line charts of success rates.
//!
//! The x axis is the first of `T`, `L`, `lambda`, `u`, `C` that varies across
//! rows; when none does, rows are placed by their position within a series.
//! Each series (algorithm, plus `u` for PSS) gets a polyline with Wilson
//! whiskers at every point.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::harness::{read_csv, series, ExperimentSummary};

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 400.0;
const MARGIN_LEFT: f64 = 60.0;
const MARGIN_RIGHT: f64 = 140.0;
const MARGIN_TOP: f64 = 30.0;
const MARGIN_BOTTOM: f64 = 50.0;
const COLORS: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"];

type Axis = (&'static str, fn(&ExperimentSummary) -> f64);

const AXES: [Axis; 5] = [
    ("T", |s| s.horizon as f64),
    ("L", |s| s.arms as f64),
    ("lambda", |s| s.lambda),
    ("u", |s| s.u.unwrap_or(f64::NAN)),
    ("C", |s| s.budget),
];

/// Name of the swept column, or `None` if every row shares all of them.
pub fn swept_axis(summaries: &[ExperimentSummary]) -> Option<Axis> {
    AXES.into_iter().find(|(_, get)| {
        let mut values = summaries.iter().map(get).filter(|v| !v.is_nan());
        match values.next() {
            Some(first) => values.any(|v| v != first),
            None => false,
        }
    })
}

pub fn render_svg(summaries: &[ExperimentSummary], title: &str) -> String {
    let axis = swept_axis(summaries);
    let groups = series(summaries);
    let x_of = |index: usize, s: &ExperimentSummary| match axis {
        Some((_, get)) => get(s),
        None => index as f64,
    };

    let xs: Vec<f64> = groups
        .values()
        .flat_map(|rows| rows.iter().enumerate().map(|(i, s)| x_of(i, s)))
        .filter(|v| v.is_finite())
        .collect();
    let (mut x_min, mut x_max) = xs
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
    if !x_min.is_finite() {
        (x_min, x_max) = (0.0, 1.0);
    }
    if x_max == x_min {
        x_min -= 0.5;
        x_max += 0.5;
    }

    let plot_w = WIDTH - MARGIN_LEFT - MARGIN_RIGHT;
    let plot_h = HEIGHT - MARGIN_TOP - MARGIN_BOTTOM;
    let px = |x: f64| MARGIN_LEFT + (x - x_min) / (x_max - x_min) * plot_w;
    let py = |y: f64| MARGIN_TOP + (1.0 - y) * plot_h;

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(svg, r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);
    let _ = writeln!(
        svg,
        r#"<text x="{:.2}" y="18" text-anchor="middle" font-size="14">{}</text>"#,
        MARGIN_LEFT + plot_w / 2.0,
        escape(title)
    );

    // axes and gridlines
    let _ = writeln!(
        svg,
        r#"<rect x="{MARGIN_LEFT}" y="{MARGIN_TOP}" width="{plot_w}" height="{plot_h}" fill="none" stroke="black"/>"#
    );
    for k in 0..=5 {
        let y = k as f64 / 5.0;
        let _ = writeln!(
            svg,
            r##"<line x1="{MARGIN_LEFT}" y1="{0:.2}" x2="{1:.2}" y2="{0:.2}" stroke="#ddd"/><text x="{2:.2}" y="{3:.2}" text-anchor="end">{4}%</text>"##,
            py(y),
            MARGIN_LEFT + plot_w,
            MARGIN_LEFT - 6.0,
            py(y) + 4.0,
            (y * 100.0).round()
        );
    }
    let mut ticks: Vec<f64> = xs.clone();
    ticks.sort_by(f64::total_cmp);
    ticks.dedup();
    for x in ticks {
        let _ = writeln!(
            svg,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
            px(x),
            MARGIN_TOP + plot_h + 16.0,
            x
        );
    }
    let _ = writeln!(
        svg,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
        MARGIN_LEFT + plot_w / 2.0,
        HEIGHT - 12.0,
        axis.map(|(name, _)| name).unwrap_or("row")
    );
    let _ = writeln!(
        svg,
        r#"<text x="16" y="{:.2}" text-anchor="middle" transform="rotate(-90 16 {:.2})">success rate</text>"#,
        MARGIN_TOP + plot_h / 2.0,
        MARGIN_TOP + plot_h / 2.0
    );

    for (k, (label, rows)) in groups.iter().enumerate() {
        let color = COLORS[k % COLORS.len()];
        let mut points: Vec<(f64, &ExperimentSummary)> =
            rows.iter().enumerate().map(|(i, s)| (x_of(i, s), *s)).collect();
        points.sort_by(|a, b| a.0.total_cmp(&b.0));
        let path: Vec<String> = points
            .iter()
            .map(|(x, s)| format!("{:.2},{:.2}", px(*x), py(s.success_rate)))
            .collect();
        let _ = writeln!(
            svg,
            r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="2"/>"#,
            path.join(" ")
        );
        for (x, s) in &points {
            let cx = px(*x);
            let _ = writeln!(
                svg,
                r#"<line x1="{cx:.2}" y1="{:.2}" x2="{cx:.2}" y2="{:.2}" stroke="{color}"/><circle cx="{cx:.2}" cy="{:.2}" r="3" fill="{color}"/>"#,
                py(s.ci_low),
                py(s.ci_high),
                py(s.success_rate)
            );
        }
        let ly = MARGIN_TOP + 10.0 + 18.0 * k as f64;
        let lx = WIDTH - MARGIN_RIGHT + 12.0;
        let _ = writeln!(
            svg,
            r#"<line x1="{lx:.2}" y1="{ly:.2}" x2="{:.2}" y2="{ly:.2}" stroke="{color}" stroke-width="2"/><text x="{:.2}" y="{:.2}">{}</text>"#,
            lx + 20.0,
            lx + 26.0,
            ly + 4.0,
            escape(label)
        );
    }
    svg.push_str("</svg>\n");
    svg
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Reads a summary CSV and writes its chart.
pub fn plot_csv(csv_path: &Path, svg_path: &Path, title: &str) -> Result<()> {
    let summaries = read_csv(csv_path)?;
    std::fs::write(svg_path, render_svg(&summaries, title)).map_err(|e| Error::io(svg_path, e))
}
