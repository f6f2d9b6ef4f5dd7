//! Minimal static SVG line plots (no plotting dependency).

use crate::error::Result;
use std::fmt::Write as _;
use std::path::Path;

const WIDTH: f64 = 820.0;
const HEIGHT: f64 = 560.0;
const MARGIN_L: f64 = 80.0;
const MARGIN_R: f64 = 30.0;
const MARGIN_T: f64 = 50.0;
const MARGIN_B: f64 = 60.0;

const COLORS: &[&str] = &[
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#17becf",
];

pub struct PlotSpec<'a> {
    pub title: &'a str,
    pub x_label: &'a str,
    pub y_label: &'a str,
    pub log_x: bool,
    pub log_y: bool,
    /// (legend label, points)
    pub series: Vec<(String, Vec<(f64, f64)>)>,
}

fn transform(v: f64, log: bool) -> Option<f64> {
    if log {
        if v > 0.0 {
            Some(v.log10())
        } else {
            None
        }
    } else if v.is_finite() {
        Some(v)
    } else {
        None
    }
}

/// Write a line plot; points that cannot be shown on the chosen axes
/// (non-finite, or non-positive on a log axis) are dropped.
pub fn write_plot(path: &Path, spec: &PlotSpec) -> Result<()> {
    let mapped: Vec<(String, Vec<(f64, f64)>)> = spec
        .series
        .iter()
        .map(|(name, pts)| {
            let m: Vec<(f64, f64)> = pts
                .iter()
                .filter_map(|&(x, y)| {
                    Some((transform(x, spec.log_x)?, transform(y, spec.log_y)?))
                })
                .collect();
            (name.clone(), m)
        })
        .collect();

    let all: Vec<(f64, f64)> = mapped.iter().flat_map(|(_, p)| p.iter().copied()).collect();
    let (x0, x1, y0, y1) = if all.is_empty() {
        (0.0, 1.0, 0.0, 1.0)
    } else {
        let xmin = all.iter().map(|p| p.0).fold(f64::INFINITY, f64::min);
        let xmax = all.iter().map(|p| p.0).fold(f64::NEG_INFINITY, f64::max);
        let ymin = all.iter().map(|p| p.1).fold(f64::INFINITY, f64::min);
        let ymax = all.iter().map(|p| p.1).fold(f64::NEG_INFINITY, f64::max);
        let pad = |lo: f64, hi: f64| {
            let d = (hi - lo).abs().max(1e-12);
            (lo - 0.05 * d, hi + 0.05 * d)
        };
        let (a, b) = pad(xmin, xmax);
        let (c, d) = pad(ymin, ymax);
        (a, b, c, d)
    };
    let px = |x: f64| MARGIN_L + (x - x0) / (x1 - x0) * (WIDTH - MARGIN_L - MARGIN_R);
    let py = |y: f64| HEIGHT - MARGIN_B - (y - y0) / (y1 - y0) * (HEIGHT - MARGIN_T - MARGIN_B);

    let mut s = String::new();
    let _ = writeln!(
        s,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH}\" height=\"{HEIGHT}\" viewBox=\"0 0 {WIDTH} {HEIGHT}\">"
    );
    let _ = writeln!(s, "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>");
    let _ = writeln!(
        s,
        "<text x=\"{}\" y=\"26\" font-family=\"sans-serif\" font-size=\"17\" text-anchor=\"middle\">{}</text>",
        WIDTH / 2.0,
        spec.title
    );
    // axes
    let _ = writeln!(
        s,
        "<line x1=\"{MARGIN_L}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"black\"/>",
        HEIGHT - MARGIN_B,
        WIDTH - MARGIN_R,
        HEIGHT - MARGIN_B
    );
    let _ = writeln!(
        s,
        "<line x1=\"{MARGIN_L}\" y1=\"{MARGIN_T}\" x2=\"{MARGIN_L}\" y2=\"{}\" stroke=\"black\"/>",
        HEIGHT - MARGIN_B
    );
    // ticks
    for i in 0..=5 {
        let fx = x0 + (x1 - x0) * i as f64 / 5.0;
        let fy = y0 + (y1 - y0) * i as f64 / 5.0;
        let label = |v: f64, log: bool| {
            if log {
                format!("1e{v:.1}")
            } else {
                format!("{v:.3}")
            }
        };
        let _ = writeln!(
            s,
            "<line x1=\"{0}\" y1=\"{1}\" x2=\"{0}\" y2=\"{2}\" stroke=\"black\"/>\
             <text x=\"{0}\" y=\"{3}\" font-family=\"sans-serif\" font-size=\"11\" text-anchor=\"middle\">{4}</text>",
            px(fx),
            HEIGHT - MARGIN_B,
            HEIGHT - MARGIN_B + 6.0,
            HEIGHT - MARGIN_B + 20.0,
            label(fx, spec.log_x)
        );
        let _ = writeln!(
            s,
            "<line x1=\"{1}\" y1=\"{0}\" x2=\"{2}\" y2=\"{0}\" stroke=\"black\"/>\
             <text x=\"{3}\" y=\"{4}\" font-family=\"sans-serif\" font-size=\"11\" text-anchor=\"end\">{5}</text>",
            py(fy),
            MARGIN_L - 6.0,
            MARGIN_L,
            MARGIN_L - 10.0,
            py(fy) + 4.0,
            label(fy, spec.log_y)
        );
    }
    let _ = writeln!(
        s,
        "<text x=\"{}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"13\" text-anchor=\"middle\">{}</text>",
        (MARGIN_L + WIDTH - MARGIN_R) / 2.0,
        HEIGHT - 14.0,
        spec.x_label
    );
    let _ = writeln!(
        s,
        "<text x=\"20\" y=\"{}\" font-family=\"sans-serif\" font-size=\"13\" text-anchor=\"middle\" transform=\"rotate(-90 20 {0})\">{}</text>",
        (MARGIN_T + HEIGHT - MARGIN_B) / 2.0,
        spec.y_label
    );
    // series
    for (k, (name, pts)) in mapped.iter().enumerate() {
        let color = COLORS[k % COLORS.len()];
        if pts.len() > 1 {
            let path_d: Vec<String> = pts
                .iter()
                .enumerate()
                .map(|(i, &(x, y))| {
                    format!("{}{:.2},{:.2}", if i == 0 { "M" } else { "L" }, px(x), py(y))
                })
                .collect();
            let _ = writeln!(
                s,
                "<path d=\"{}\" fill=\"none\" stroke=\"{color}\" stroke-width=\"1.5\"/>",
                path_d.join(" ")
            );
        }
        for &(x, y) in pts {
            let _ = writeln!(
                s,
                "<circle cx=\"{:.2}\" cy=\"{:.2}\" r=\"2.5\" fill=\"{color}\"/>",
                px(x),
                py(y)
            );
        }
        let _ = writeln!(
            s,
            "<text x=\"{}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"12\" fill=\"{color}\">{name}</text>",
            WIDTH - MARGIN_R - 180.0,
            MARGIN_T + 16.0 * (k + 1) as f64
        );
    }
    let _ = writeln!(s, "</svg>");
    super::persist::write_text(path, &s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use tempfile::tempdir;

    #[test]
    fn writes_wellformed_svg() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("plot.svg");
        let spec = PlotSpec {
            title: "test",
            x_label: "x",
            y_label: "y",
            log_x: true,
            log_y: true,
            series: vec![(
                "series".into(),
                vec![(0.5, 2.0), (0.25, 4.0), (0.125, 8.0), (-1.0, 3.0)],
            )],
        };
        write_plot(&path, &spec).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert!(text.starts_with("<svg"));
        assert!(text.trim_end().ends_with("</svg>"));
        assert_eq!(text.matches("<circle").count(), 3); // negative x dropped on log axis
    }
}
