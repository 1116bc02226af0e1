//! Objective-gap versus wall-clock line plots as standalone SVG.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::trace::Trace;

const WIDTH: f64 = 800.0;
const HEIGHT: f64 = 500.0;
const LEFT: f64 = 80.0;
const RIGHT: f64 = 180.0;
const TOP: f64 = 50.0;
const BOTTOM: f64 = 60.0;

const PALETTE: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#17becf",
];

fn escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&apos;"),
            c => out.push(c),
        }
    }
    out
}

/// Render `f_t - f_min` on a log10 axis against seconds, one polyline per
/// trace, where `f_min` is the smallest finite objective over all traces.
/// Gaps are floored at `1e-16 · max(1, |f_min|)` so the minimiser itself
/// stays on the chart.
pub fn plot_traces(traces: &[Trace]) -> Result<String> {
    if traces.is_empty() {
        return Err(Error::Input("nothing to plot".into()));
    }
    let f_min = traces
        .iter()
        .filter_map(Trace::min_objective)
        .min_by(f64::total_cmp)
        .ok_or_else(|| Error::Input("traces contain no finite objective".into()))?;
    let floor = 1e-16 * f_min.abs().max(1.0);

    let series: Vec<Vec<(f64, f64)>> = traces
        .iter()
        .map(|t| {
            t.rows
                .iter()
                .filter(|r| r.objective.is_finite())
                .map(|r| (r.seconds, (r.objective - f_min).max(floor).log10()))
                .collect()
        })
        .collect();
    let points = series.iter().flatten();
    let t_max = points.clone().map(|p| p.0).fold(0.0f64, f64::max);
    let t_max = if t_max > 0.0 { t_max } else { 1.0 };
    let y_lo = points.clone().map(|p| p.1).fold(f64::INFINITY, f64::min).floor();
    let y_hi = points.map(|p| p.1).fold(f64::NEG_INFINITY, f64::max).ceil();
    let y_hi = if y_hi > y_lo { y_hi } else { y_lo + 1.0 };

    let plot_w = WIDTH - LEFT - RIGHT;
    let plot_h = HEIGHT - TOP - BOTTOM;
    let sx = |t: f64| LEFT + plot_w * t / t_max;
    let sy = |v: f64| TOP + plot_h * (y_hi - v) / (y_hi - y_lo);

    let mut svg = String::new();
    let w = &mut svg;
    writeln!(
        w,
        r#"<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 {WIDTH} {HEIGHT}" width="{WIDTH}" height="{HEIGHT}" font-family="sans-serif" font-size="12">"#
    )
    .unwrap();
    let title = format!("objective gap f - f_min, f_min = {f_min:.12e} (minimum over all traces)");
    writeln!(w, "<title>{}</title>", escape(&title)).unwrap();
    writeln!(w, r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#).unwrap();
    writeln!(
        w,
        r#"<text x="{}" y="24" text-anchor="middle" font-size="14">{}</text>"#,
        WIDTH / 2.0,
        escape(&title)
    )
    .unwrap();

    // axes and decade grid
    writeln!(
        w,
        r##"<rect x="{LEFT}" y="{TOP}" width="{plot_w}" height="{plot_h}" fill="none" stroke="#333"/>"##
    )
    .unwrap();
    let decades = (y_hi - y_lo) as i64;
    let stride = (decades / 10 + 1).max(1);
    let mut e = y_lo as i64;
    while e <= y_hi as i64 {
        let y = sy(e as f64);
        writeln!(
            w,
            r##"<line x1="{LEFT}" y1="{y:.2}" x2="{:.2}" y2="{y:.2}" stroke="#ddd"/><text x="{:.2}" y="{:.2}" text-anchor="end">1e{e}</text>"##,
            LEFT + plot_w,
            LEFT - 6.0,
            y + 4.0
        )
        .unwrap();
        e += stride;
    }
    for k in 0..=5 {
        let t = t_max * k as f64 / 5.0;
        let x = sx(t);
        writeln!(
            w,
            r##"<line x1="{x:.2}" y1="{:.2}" x2="{x:.2}" y2="{:.2}" stroke="#333"/><text x="{x:.2}" y="{:.2}" text-anchor="middle">{t:.3}</text>"##,
            TOP + plot_h,
            TOP + plot_h + 5.0,
            TOP + plot_h + 20.0
        )
        .unwrap();
    }
    writeln!(
        w,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">wall-clock seconds (preprocessing included)</text>"#,
        LEFT + plot_w / 2.0,
        HEIGHT - 15.0
    )
    .unwrap();
    writeln!(
        w,
        r#"<text transform="translate(20 {:.2}) rotate(-90)" text-anchor="middle">f - f_min</text>"#,
        TOP + plot_h / 2.0
    )
    .unwrap();

    for (k, (trace, pts)) in traces.iter().zip(&series).enumerate() {
        let color = PALETTE[k % PALETTE.len()];
        let coords: Vec<String> = pts
            .iter()
            .map(|&(t, v)| format!("{:.2},{:.2}", sx(t), sy(v)))
            .collect();
        writeln!(
            w,
            r#"<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{}"/>"#,
            coords.join(" ")
        )
        .unwrap();
        let ly = TOP + 10.0 + 18.0 * k as f64;
        let lx = LEFT + plot_w + 12.0;
        let mut name = trace.label.clone();
        if trace.label != trace.solver {
            name = format!("{} ({})", trace.label, trace.solver);
        }
        if trace.diverged() {
            name.push_str(" [diverged]");
        }
        writeln!(
            w,
            r#"<line x1="{lx:.2}" y1="{ly:.2}" x2="{:.2}" y2="{ly:.2}" stroke="{color}" stroke-width="2"/><text x="{:.2}" y="{:.2}">{}</text>"#,
            lx + 20.0,
            lx + 26.0,
            ly + 4.0,
            escape(&name)
        )
        .unwrap();
    }
    svg.push_str("</svg>\n");
    Ok(svg)
}
