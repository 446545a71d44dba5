use std::fmt::Write;

use isoflat::uniformize::ChartExport;

/// Smallest half-range of the colour scale, so that roundoff in a flat chart stays white.
pub const SCALE_FLOOR: f64 = 1e-6;

const CANVAS: f64 = 520.0;
const MARGIN: f64 = 20.0;
const LEGEND_WIDTH: f64 = 90.0;
const NEGATIVE: [f64; 3] = [59.0, 76.0, 192.0];
const POSITIVE: [f64; 3] = [180.0, 4.0, 38.0];

/// Diverging colour for `value` on a linear scale over [−half_range, half_range]:
/// blue below zero, white at zero, red above.
pub fn diverging_color(value: f64, half_range: f64) -> String {
    let s = (value / half_range).clamp(-1.0, 1.0);
    let end = if s < 0.0 { NEGATIVE } else { POSITIVE };
    let a = s.abs();
    let c = end.map(|e| (255.0 + a * (e - 255.0)).round() as u8);
    format!("#{:02x}{:02x}{:02x}", c[0], c[1], c[2])
}

fn log_factor(chart: &ChartExport) -> Vec<f64> {
    chart.phi.iter().map(|p| p.ln()).collect()
}

/// Half-range of the colour scale: sup|log φ| floored at [`SCALE_FLOOR`].
pub fn color_half_range(chart: &ChartExport) -> f64 {
    log_factor(chart).iter().fold(0.0f64, |m, v| m.max(v.abs())).max(SCALE_FLOOR)
}

/// Heatmap of log φ over the background disc: one square cell per node, clipped to
/// the boundary loop, with the loop drawn on top and a colour bar on the right.
pub fn render_log_factor_svg(chart: &ChartExport) -> String {
    let values = log_factor(chart);
    let range = color_half_range(chart);
    let extent = chart
        .x
        .iter()
        .zip(&chart.y)
        .fold(0.0f64, |m, (x, y)| m.max(x.abs()).max(y.abs()))
        + chart.h;
    let scale = (CANVAS - 2.0 * MARGIN) / (2.0 * extent);
    let px = |x: f64| MARGIN + (x + extent) * scale;
    let py = |y: f64| MARGIN + (extent - y) * scale;
    let cell = chart.h * scale;

    let mut s = String::new();
    let width = CANVAS + LEGEND_WIDTH;
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{CANVAS}" viewBox="0 0 {width} {CANVAS}">"#
    );
    let _ = writeln!(s, "<title>log phi, {} metric, h = {}</title>", chart.metric, chart.h);
    let loop_points: String = chart
        .boundary_loop
        .iter()
        .map(|&k| format!("{:.3},{:.3}", px(chart.x[k]), py(chart.y[k])))
        .collect::<Vec<_>>()
        .join(" ");
    let _ = writeln!(s, r#"<defs><clipPath id="disc"><polygon points="{loop_points}"/></clipPath></defs>"#);
    let _ = writeln!(s, r#"<g id="field" clip-path="url(#disc)" shape-rendering="crispEdges">"#);
    for (k, v) in values.iter().enumerate() {
        let _ = writeln!(
            s,
            r#"<rect x="{:.3}" y="{:.3}" width="{:.3}" height="{:.3}" fill="{}"/>"#,
            px(chart.x[k]) - 0.5 * cell,
            py(chart.y[k]) - 0.5 * cell,
            cell,
            cell,
            diverging_color(*v, range)
        );
    }
    s.push_str("</g>\n");
    let _ = writeln!(
        s,
        r#"<polygon id="boundary" points="{loop_points}" fill="none" stroke="black" stroke-width="1.5"/>"#
    );

    // Colour bar from +range (top) to −range (bottom).
    let bar_x = CANVAS + 10.0;
    let bar_h = CANVAS - 2.0 * MARGIN;
    let steps = 64;
    s.push_str("<g id=\"legend\">\n");
    for i in 0..steps {
        let v = range * (1.0 - 2.0 * (i as f64 + 0.5) / steps as f64);
        let _ = writeln!(
            s,
            r#"<rect x="{bar_x:.1}" y="{:.3}" width="16" height="{:.3}" fill="{}"/>"#,
            MARGIN + bar_h * i as f64 / steps as f64,
            bar_h / steps as f64 + 0.5,
            diverging_color(v, range)
        );
    }
    for (label, y) in [(range, MARGIN), (0.0, MARGIN + 0.5 * bar_h), (-range, MARGIN + bar_h)] {
        let _ = writeln!(
            s,
            r#"<text x="{:.1}" y="{:.1}" font-family="sans-serif" font-size="11">{label:+.3e}</text>"#,
            bar_x + 20.0,
            y + 4.0
        );
    }
    s.push_str("</g>\n</svg>\n");
    s
}
