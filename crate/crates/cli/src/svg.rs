//! Minimal static line charts as standalone SVG documents.

use std::fmt::Write as _;
use std::path::Path;

use anyhow::Result;

pub struct LineChart {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    series: Vec<Series>,
}

struct Series {
    label: String,
    color: &'static str,
    points: Vec<(f64, f64)>,
}

const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 440.0;
const MARGIN_L: f64 = 70.0;
const MARGIN_R: f64 = 20.0;
const MARGIN_T: f64 = 40.0;
const MARGIN_B: f64 = 50.0;

pub const PALETTE: [&str; 5] = ["#222222", "#2a9d3f", "#c23a3a", "#2a5fc2", "#b8860b"];

impl LineChart {
    pub fn new(title: &str, x_label: &str, y_label: &str) -> Self {
        LineChart {
            title: title.to_owned(),
            x_label: x_label.to_owned(),
            y_label: y_label.to_owned(),
            series: Vec::new(),
        }
    }

    pub fn add_series(&mut self, label: &str, color: &'static str, points: Vec<(f64, f64)>) {
        self.series.push(Series {
            label: label.to_owned(),
            color,
            points,
        });
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.render())?;
        Ok(())
    }

    fn render(&self) -> String {
        let mut xs: Vec<f64> = Vec::new();
        let mut ys: Vec<f64> = Vec::new();
        for s in &self.series {
            for &(x, y) in &s.points {
                if x.is_finite() && y.is_finite() {
                    xs.push(x);
                    ys.push(y);
                }
            }
        }
        let (x_min, x_max) = bounds(&xs);
        let (y_min, y_max) = bounds(&ys);
        let x_span = (x_max - x_min).max(1e-12);
        let y_span = (y_max - y_min).max(1e-12);
        let plot_w = WIDTH - MARGIN_L - MARGIN_R;
        let plot_h = HEIGHT - MARGIN_T - MARGIN_B;
        let sx = |x: f64| MARGIN_L + (x - x_min) / x_span * plot_w;
        let sy = |y: f64| MARGIN_T + plot_h - (y - y_min) / y_span * plot_h;

        let mut svg = String::new();
        let _ = writeln!(
            svg,
            "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH}\" height=\"{HEIGHT}\" viewBox=\"0 0 {WIDTH} {HEIGHT}\">"
        );
        let _ = writeln!(svg, "<rect width=\"{WIDTH}\" height=\"{HEIGHT}\" fill=\"white\"/>");
        let _ = writeln!(
            svg,
            "<text x=\"{}\" y=\"22\" font-family=\"sans-serif\" font-size=\"15\" text-anchor=\"middle\">{}</text>",
            WIDTH / 2.0,
            escape(&self.title)
        );

        // Axes.
        let _ = writeln!(
            svg,
            "<line x1=\"{MARGIN_L}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"#444\"/>",
            HEIGHT - MARGIN_B,
            WIDTH - MARGIN_R,
            HEIGHT - MARGIN_B
        );
        let _ = writeln!(
            svg,
            "<line x1=\"{MARGIN_L}\" y1=\"{MARGIN_T}\" x2=\"{MARGIN_L}\" y2=\"{}\" stroke=\"#444\"/>",
            HEIGHT - MARGIN_B
        );

        // Ticks: five per axis.
        for i in 0..=4 {
            let fx = x_min + x_span * i as f64 / 4.0;
            let px = sx(fx);
            let _ = writeln!(
                svg,
                "<line x1=\"{px}\" y1=\"{}\" x2=\"{px}\" y2=\"{}\" stroke=\"#444\"/>",
                HEIGHT - MARGIN_B,
                HEIGHT - MARGIN_B + 5.0
            );
            let _ = writeln!(
                svg,
                "<text x=\"{px}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"11\" text-anchor=\"middle\">{}</text>",
                HEIGHT - MARGIN_B + 18.0,
                format_tick(fx)
            );
            let fy = y_min + y_span * i as f64 / 4.0;
            let py = sy(fy);
            let _ = writeln!(
                svg,
                "<line x1=\"{}\" y1=\"{py}\" x2=\"{MARGIN_L}\" y2=\"{py}\" stroke=\"#444\"/>",
                MARGIN_L - 5.0
            );
            let _ = writeln!(
                svg,
                "<text x=\"{}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"11\" text-anchor=\"end\">{}</text>",
                MARGIN_L - 8.0,
                py + 4.0,
                format_tick(fy)
            );
        }

        // Axis labels.
        let _ = writeln!(
            svg,
            "<text x=\"{}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"12\" text-anchor=\"middle\">{}</text>",
            MARGIN_L + plot_w / 2.0,
            HEIGHT - 12.0,
            escape(&self.x_label)
        );
        let _ = writeln!(
            svg,
            "<text x=\"16\" y=\"{}\" font-family=\"sans-serif\" font-size=\"12\" text-anchor=\"middle\" transform=\"rotate(-90 16 {})\">{}</text>",
            MARGIN_T + plot_h / 2.0,
            MARGIN_T + plot_h / 2.0,
            escape(&self.y_label)
        );

        // Series polylines and legend.
        for (i, s) in self.series.iter().enumerate() {
            let mut points = String::new();
            for &(x, y) in &s.points {
                if x.is_finite() && y.is_finite() {
                    let _ = write!(points, "{:.2},{:.2} ", sx(x), sy(y));
                }
            }
            let _ = writeln!(
                svg,
                "<polyline fill=\"none\" stroke=\"{}\" stroke-width=\"1.6\" points=\"{}\"/>",
                s.color,
                points.trim_end()
            );
            let ly = MARGIN_T + 14.0 * i as f64;
            let _ = writeln!(
                svg,
                "<line x1=\"{}\" y1=\"{ly}\" x2=\"{}\" y2=\"{ly}\" stroke=\"{}\" stroke-width=\"2\"/>",
                WIDTH - 190.0,
                WIDTH - 165.0,
                s.color
            );
            let _ = writeln!(
                svg,
                "<text x=\"{}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"11\">{}</text>",
                WIDTH - 158.0,
                ly + 4.0,
                escape(&s.label)
            );
        }

        svg.push_str("</svg>\n");
        svg
    }
}

fn bounds(values: &[f64]) -> (f64, f64) {
    if values.is_empty() {
        return (0.0, 1.0);
    }
    let min = values.iter().cloned().fold(f64::INFINITY, f64::min);
    let max = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if min == max {
        (min - 0.5, max + 0.5)
    } else {
        (min, max)
    }
}

fn format_tick(v: f64) -> String {
    if v == 0.0 {
        "0".to_owned()
    } else if v.abs() >= 1000.0 || v.abs() < 0.01 {
        format!("{v:.1e}")
    } else {
        format!("{v:.2}")
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}
