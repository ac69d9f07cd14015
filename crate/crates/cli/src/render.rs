//! Deterministic SVG scatter plots of 2D and 3D embeddings.
//!
//! 3D embeddings are drawn as an orthographic projection onto the first two
//! axes with marker size encoding the third. Colors come from a fixed
//! palette indexed by cluster id (cycling past 16 clusters); without a
//! cluster column every marker uses the first palette color. Identical
//! input always produces identical bytes.

use crate::cmd::CliError;

const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 540.0;
const MARGIN: f64 = 60.0;

const PALETTE: [&str; 16] = [
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2", "#17becf",
    "#bcbd22", "#4e79a7", "#f28e2b", "#59a14f", "#b07aa1", "#76b7b2", "#edc948", "#9c755f",
];
const NOISE_COLOR: &str = "#999999";

fn color_for(cluster: Option<i64>) -> &'static str {
    match cluster {
        None => PALETTE[0],
        Some(c) if c < 0 => NOISE_COLOR,
        Some(c) => PALETTE[(c as usize) % PALETTE.len()],
    }
}

/// Map data values on one axis into pixel coordinates; a degenerate range
/// centers every point.
fn axis_scale(values: &[f64], out_lo: f64, out_hi: f64) -> impl Fn(f64) -> f64 {
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let span = hi - lo;
    move |v| {
        if span == 0.0 {
            (out_lo + out_hi) / 2.0
        } else {
            out_lo + (v - lo) / span * (out_hi - out_lo)
        }
    }
}

/// Render one marker plus text label per point.
pub fn render_scatter(
    names: &[String],
    coords: &[Vec<f64>],
    clusters: Option<&[i64]>,
) -> Result<String, CliError> {
    let d = coords.first().map_or(0, Vec::len);
    if !(d == 2 || d == 3) {
        return Err(CliError::data(format!(
            "scatter rendering requires a 2- or 3-dimensional embedding, got {d}"
        )));
    }
    if let Some(labels) = clusters {
        if labels.len() != names.len() {
            return Err(CliError::data("cluster column length mismatch".to_string()));
        }
    }

    let xs: Vec<f64> = coords.iter().map(|r| r[0]).collect();
    let ys: Vec<f64> = coords.iter().map(|r| r[1]).collect();
    let sx = axis_scale(&xs, MARGIN, WIDTH - MARGIN);
    // SVG y grows downward.
    let sy = axis_scale(&ys, HEIGHT - MARGIN, MARGIN);
    let radius: Box<dyn Fn(usize) -> f64> = if d == 3 {
        let zs: Vec<f64> = coords.iter().map(|r| r[2]).collect();
        let sz = axis_scale(&zs, 3.0, 9.0);
        Box::new(move |i: usize| sz(zs[i]))
    } else {
        Box::new(|_| 5.0)
    };

    let mut svg = String::new();
    svg.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH}\" height=\"{HEIGHT}\" \
         viewBox=\"0 0 {WIDTH} {HEIGHT}\">\n"
    ));
    svg.push_str(&format!(
        "  <rect x=\"0\" y=\"0\" width=\"{WIDTH}\" height=\"{HEIGHT}\" fill=\"white\"/>\n"
    ));
    svg.push_str(&format!(
        "  <rect x=\"{m}\" y=\"{m}\" width=\"{w:.2}\" height=\"{h:.2}\" fill=\"none\" \
         stroke=\"#cccccc\"/>\n",
        m = MARGIN,
        w = WIDTH - 2.0 * MARGIN,
        h = HEIGHT - 2.0 * MARGIN
    ));
    for (i, name) in names.iter().enumerate() {
        let cx = sx(coords[i][0]);
        let cy = sy(coords[i][1]);
        let r = radius(i);
        let fill = color_for(clusters.map(|c| c[i]));
        svg.push_str(&format!(
            "  <circle cx=\"{cx:.2}\" cy=\"{cy:.2}\" r=\"{r:.2}\" fill=\"{fill}\" \
             fill-opacity=\"0.85\" stroke=\"#333333\" stroke-width=\"0.5\"/>\n"
        ));
        svg.push_str(&format!(
            "  <text x=\"{x:.2}\" y=\"{y:.2}\" font-family=\"sans-serif\" font-size=\"10\" \
             fill=\"#333333\">{text}</text>\n",
            x = cx + r + 2.0,
            y = cy + 3.5,
            text = escape(name)
        ));
    }
    svg.push_str("</svg>\n");
    Ok(svg)
}

fn escape(text: &str) -> String {
    text.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}
