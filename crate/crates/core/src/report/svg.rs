//! Self-contained SVG line charts with per-seed traces and a mean ± std band.

use std::fmt::Write as _;

use super::mean_std;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 400.0;
const LEFT: f64 = 60.0;
const RIGHT: f64 = 120.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 50.0;
const COLORS: [&str; 10] =
    ["#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"];

/// One trace: (x, y) points in x order.
#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    pub label: String,
    pub points: Vec<(f64, f64)>,
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Mean and population std across series at each shared point index, using
/// the x values of the first series; truncated to the shortest series.
pub fn band(series: &[Series]) -> Vec<(f64, f64, f64)> {
    let Some(first) = series.first() else { return Vec::new() };
    let n = series.iter().map(|s| s.points.len()).min().unwrap_or(0);
    (0..n)
        .map(|i| {
            let ys: Vec<f64> = series.iter().map(|s| s.points[i].1).collect();
            let (m, sd) = mean_std(&ys);
            (first.points[i].0, m, sd)
        })
        .collect()
}

/// Renders a chart; identical inputs give identical bytes.
pub fn render_chart(title: &str, y_label: &str, series: &[Series]) -> String {
    let pts = series.iter().flat_map(|s| s.points.iter());
    let (mut x0, mut x1, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, 0.0f64);
    for (x, y) in pts {
        x0 = x0.min(*x);
        x1 = x1.max(*x);
        y1 = y1.max(*y);
    }
    if !x0.is_finite() {
        (x0, x1) = (0.0, 1.0);
    }
    if x1 <= x0 {
        x1 = x0 + 1.0;
    }
    let y1 = if y1 <= 0.0 { 1.0 } else { y1 };
    let pw = WIDTH - LEFT - RIGHT;
    let ph = HEIGHT - TOP - BOTTOM;
    let sx = |x: f64| LEFT + (x - x0) / (x1 - x0) * pw;
    let sy = |y: f64| TOP + ph - y / y1 * ph;

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);
    let _ =
        writeln!(s, r#"<text x="{}" y="20" text-anchor="middle" font-size="14">{}</text>"#, WIDTH / 2.0, escape(title));
    // Axes with ticks at the ends and the middle.
    let _ = writeln!(
        s,
        r#"<path d="M{LEFT:.2},{TOP:.2} L{LEFT:.2},{:.2} L{:.2},{:.2}" fill="none" stroke="black"/>"#,
        TOP + ph,
        LEFT + pw,
        TOP + ph
    );
    for k in 0..=2 {
        let fx = x0 + (x1 - x0) * k as f64 / 2.0;
        let fy = y1 * k as f64 / 2.0;
        let _ = writeln!(s, r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#, sx(fx), TOP + ph + 18.0, fx);
        let _ =
            writeln!(s, r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{:.1}</text>"#, LEFT - 6.0, sy(fy) + 4.0, fy);
    }
    let _ =
        writeln!(s, r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">step</text>"#, LEFT + pw / 2.0, HEIGHT - 10.0);
    let _ = writeln!(
        s,
        r#"<text x="15" y="{:.2}" text-anchor="middle" transform="rotate(-90 15 {:.2})">{}</text>"#,
        TOP + ph / 2.0,
        TOP + ph / 2.0,
        escape(y_label)
    );

    let b = band(series);
    if !b.is_empty() {
        let upper: Vec<String> = b.iter().map(|(x, m, sd)| format!("{:.2},{:.2}", sx(*x), sy(m + sd))).collect();
        let lower: Vec<String> = b.iter().rev().map(|(x, m, sd)| format!("{:.2},{:.2}", sx(*x), sy(m - sd))).collect();
        let _ = writeln!(
            s,
            r#"<polygon class="band" points="{} {}" fill="black" fill-opacity="0.12" stroke="none"/>"#,
            upper.join(" "),
            lower.join(" ")
        );
    }
    for (i, ser) in series.iter().enumerate() {
        let color = COLORS[i % COLORS.len()];
        let pts: Vec<String> = ser.points.iter().map(|(x, y)| format!("{:.2},{:.2}", sx(*x), sy(*y))).collect();
        let _ = writeln!(
            s,
            r#"<polyline class="trace" points="{}" fill="none" stroke="{color}" stroke-width="1"/>"#,
            pts.join(" ")
        );
        let ly = TOP + 14.0 * i as f64;
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="{:.2}" fill="{color}">{}</text>"#,
            LEFT + pw + 10.0,
            ly + 10.0,
            escape(&ser.label)
        );
    }
    if !b.is_empty() {
        let pts: Vec<String> = b.iter().map(|(x, m, _)| format!("{:.2},{:.2}", sx(*x), sy(*m))).collect();
        let _ = writeln!(
            s,
            r#"<polyline class="mean" points="{}" fill="none" stroke="black" stroke-width="2"/>"#,
            pts.join(" ")
        );
    }
    s.push_str("</svg>\n");
    s
}
