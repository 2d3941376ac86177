//! Just enough SVG for the report figures.

use std::fmt::Write;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 400.0;
const MARGIN_L: f64 = 70.0;
const MARGIN_R: f64 = 150.0;
const MARGIN_T: f64 = 40.0;
const MARGIN_B: f64 = 50.0;

const PALETTE: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#17becf",
];

pub(crate) fn escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            _ => out.push(c),
        }
    }
    out
}

fn header(out: &mut String, w: f64, h: f64) {
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(out, r#"<rect width="{w}" height="{h}" fill="white"/>"#);
}

fn text(out: &mut String, x: f64, y: f64, anchor: &str, extra: &str, s: &str) {
    let _ = writeln!(
        out,
        r#"<text x="{x:.1}" y="{y:.1}" text-anchor="{anchor}"{extra}>{}</text>"#,
        escape(s)
    );
}

pub(crate) struct Series {
    pub name: String,
    pub points: Vec<(f64, f64)>,
}

fn bounds(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = values.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
    if !lo.is_finite() {
        (0.0, 1.0)
    } else if hi - lo < 1e-12 {
        (lo - 0.5, hi + 0.5)
    } else {
        let pad = 0.05 * (hi - lo);
        (lo - pad, hi + pad)
    }
}

/// Line chart with a legend to the right of the plot area.
pub(crate) fn line_plot(title: &str, x_label: &str, y_label: &str, series: &[Series]) -> String {
    let pts = || series.iter().flat_map(|s| s.points.iter()).filter(|p| p.0.is_finite() && p.1.is_finite());
    let (x0, x1) = bounds(pts().map(|p| p.0));
    let (y0, y1) = bounds(pts().map(|p| p.1));
    let pw = WIDTH - MARGIN_L - MARGIN_R;
    let ph = HEIGHT - MARGIN_T - MARGIN_B;
    let sx = |x: f64| MARGIN_L + (x - x0) / (x1 - x0) * pw;
    let sy = |y: f64| MARGIN_T + (y1 - y) / (y1 - y0) * ph;

    let mut out = String::new();
    header(&mut out, WIDTH, HEIGHT);
    text(&mut out, WIDTH / 2.0, 22.0, "middle", r#" font-size="14""#, title);
    let _ = writeln!(
        out,
        r#"<rect x="{MARGIN_L}" y="{MARGIN_T}" width="{pw}" height="{ph}" fill="none" stroke="black"/>"#
    );
    for i in 0..=4 {
        let f = i as f64 / 4.0;
        let (xv, yv) = (x0 + f * (x1 - x0), y0 + f * (y1 - y0));
        text(&mut out, sx(xv), HEIGHT - MARGIN_B + 16.0, "middle", "", &format!("{xv:.0}"));
        text(&mut out, MARGIN_L - 6.0, sy(yv) + 4.0, "end", "", &format!("{yv:.1}"));
    }
    text(&mut out, MARGIN_L + pw / 2.0, HEIGHT - 12.0, "middle", "", x_label);
    let (cx, cy) = (16.0, MARGIN_T + ph / 2.0);
    text(&mut out, cx, cy, "middle", &format!(r#" transform="rotate(-90 {cx} {cy})""#), y_label);

    for (i, s) in series.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let mut d = String::new();
        for &(x, y) in s.points.iter().filter(|p| p.0.is_finite() && p.1.is_finite()) {
            let _ = write!(d, "{:.2},{:.2} ", sx(x), sy(y));
        }
        let _ = writeln!(
            out,
            r#"<polyline fill="none" stroke="{color}" stroke-width="1" points="{}"/>"#,
            d.trim_end()
        );
        let ly = MARGIN_T + 14.0 + 18.0 * i as f64;
        let lx = WIDTH - MARGIN_R + 10.0;
        let _ = writeln!(
            out,
            r#"<line x1="{lx}" y1="{:.1}" x2="{:.1}" y2="{:.1}" stroke="{color}" stroke-width="2"/>"#,
            ly - 4.0,
            lx + 18.0,
            ly - 4.0
        );
        text(&mut out, lx + 24.0, ly, "start", "", &s.name);
    }
    out.push_str("</svg>\n");
    out
}

/// Square heatmap; `counts[r][c]` with rows = actual, columns = predicted.
/// Each cell shows the count and its share of the row.
pub(crate) fn heatmap(title: &str, labels: &[&str], counts: &[Vec<u64>]) -> String {
    let n = labels.len();
    let cell = 120.0;
    let (left, top) = (130.0, 70.0);
    let w = left + cell * n as f64 + 30.0;
    let h = top + cell * n as f64 + 50.0;

    let mut out = String::new();
    header(&mut out, w, h);
    text(&mut out, w / 2.0, 22.0, "middle", r#" font-size="14""#, title);
    text(&mut out, left + cell * n as f64 / 2.0, 48.0, "middle", "", "predicted");
    let (cx, cy) = (20.0, top + cell * n as f64 / 2.0);
    text(&mut out, cx, cy, "middle", &format!(r#" transform="rotate(-90 {cx} {cy})""#), "actual");
    for (i, l) in labels.iter().enumerate() {
        let c = left + cell * (i as f64 + 0.5);
        text(&mut out, c, top - 6.0, "middle", "", l);
        text(&mut out, left - 8.0, top + cell * (i as f64 + 0.5) + 4.0, "end", "", l);
    }
    for (r, row) in counts.iter().enumerate() {
        let total: u64 = row.iter().sum();
        for (c, &v) in row.iter().enumerate() {
            let share = if total > 0 { v as f64 / total as f64 } else { 0.0 };
            // white → blue by row share
            let shade = (255.0 - 200.0 * share).round() as u8;
            let (x, y) = (left + cell * c as f64, top + cell * r as f64);
            let ink = if share > 0.6 { "white" } else { "black" };
            let _ = writeln!(
                out,
                r##"<g class="cell" data-row="{r}" data-col="{c}"><rect x="{x}" y="{y}" width="{cell}" height="{cell}" fill="rgb({shade},{shade},255)" stroke="#444"/>"##
            );
            let extra = format!(r#" fill="{ink}""#);
            text(&mut out, x + cell / 2.0, y + cell / 2.0 - 4.0, "middle", &extra, &v.to_string());
            text(
                &mut out,
                x + cell / 2.0,
                y + cell / 2.0 + 14.0,
                "middle",
                &extra,
                &format!("{:.2}%", 100.0 * share),
            );
            out.push_str("</g>\n");
        }
    }
    out.push_str("</svg>\n");
    out
}
