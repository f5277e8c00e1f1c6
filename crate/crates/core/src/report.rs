//! Summary-figure data: empirical CDFs, category bars, and a small SVG
//! renderer for both.

use serde::Serialize;

/// One step of an empirical cumulative distribution function.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EcdfPoint {
    pub value: f64,
    pub fraction: f64,
}

/// Empirical CDF of a sample: sorted values with cumulative fractions.
pub fn ecdf(values: &[f64]) -> Vec<EcdfPoint> {
    let mut sorted: Vec<f64> = values.iter().copied().filter(|v| v.is_finite()).collect();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("finite values"));
    let n = sorted.len();
    sorted
        .into_iter()
        .enumerate()
        .map(|(i, value)| EcdfPoint {
            value,
            fraction: (i + 1) as f64 / n as f64,
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Bar {
    pub label: String,
    pub value: f64,
}

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 400.0;
const MARGIN: f64 = 56.0;

fn svg_header(title: &str) -> String {
    format!(
        concat!(
            "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w}\" height=\"{h}\" ",
            "viewBox=\"0 0 {w} {h}\" font-family=\"sans-serif\" font-size=\"12\">\n",
            "<rect width=\"{w}\" height=\"{h}\" fill=\"white\"/>\n",
            "<text x=\"{cx}\" y=\"20\" text-anchor=\"middle\" font-size=\"14\">{title}</text>\n"
        ),
        w = WIDTH,
        h = HEIGHT,
        cx = WIDTH / 2.0,
        title = escape(title),
    )
}

fn escape(text: &str) -> String {
    text.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn fmt(v: f64) -> String {
    if v == v.trunc() && v.abs() < 1e9 {
        format!("{}", v as i64)
    } else {
        format!("{v:.2}")
    }
}

/// Render an ECDF as a step polyline with axes.
pub fn ecdf_svg(title: &str, x_label: &str, points: &[EcdfPoint]) -> String {
    let mut out = svg_header(title);
    let (x0, y0) = (MARGIN, HEIGHT - MARGIN);
    let (x1, y1) = (WIDTH - MARGIN, MARGIN);
    out.push_str(&format!(
        "<line x1=\"{x0}\" y1=\"{y0}\" x2=\"{x1}\" y2=\"{y0}\" stroke=\"black\"/>\n\
         <line x1=\"{x0}\" y1=\"{y0}\" x2=\"{x0}\" y2=\"{y1}\" stroke=\"black\"/>\n"
    ));
    out.push_str(&format!(
        "<text x=\"{}\" y=\"{}\" text-anchor=\"middle\">{}</text>\n",
        (x0 + x1) / 2.0,
        HEIGHT - 12.0,
        escape(x_label)
    ));
    out.push_str(&format!(
        "<text x=\"16\" y=\"{}\" text-anchor=\"middle\" transform=\"rotate(-90 16 {})\">cumulative fraction</text>\n",
        (y0 + y1) / 2.0,
        (y0 + y1) / 2.0
    ));

    if !points.is_empty() {
        let vmin = points.first().expect("nonempty").value;
        let vmax = points.last().expect("nonempty").value;
        let span = if (vmax - vmin).abs() < f64::EPSILON { 1.0 } else { vmax - vmin };
        let px = |v: f64| x0 + (v - vmin) / span * (x1 - x0);
        let py = |f: f64| y0 - f * (y0 - y1);

        let mut d = format!("M {} {}", px(vmin), py(0.0));
        let mut prev = 0.0;
        for p in points {
            d.push_str(&format!(" L {} {}", px(p.value), py(prev)));
            d.push_str(&format!(" L {} {}", px(p.value), py(p.fraction)));
            prev = p.fraction;
        }
        out.push_str(&format!(
            "<path d=\"{d}\" fill=\"none\" stroke=\"steelblue\" stroke-width=\"1.5\"/>\n"
        ));
        for frac in [0.0, 0.25, 0.5, 0.75, 1.0] {
            out.push_str(&format!(
                "<text x=\"{}\" y=\"{}\" text-anchor=\"end\">{frac:.2}</text>\n",
                x0 - 6.0,
                py(frac) + 4.0
            ));
        }
        for v in [vmin, vmin + span / 2.0, vmax] {
            out.push_str(&format!(
                "<text x=\"{}\" y=\"{}\" text-anchor=\"middle\">{}</text>\n",
                px(v),
                y0 + 16.0,
                fmt(v)
            ));
        }
    }
    out.push_str("</svg>\n");
    out
}

/// Render labelled bars (values in any unit; heights normalized to max).
pub fn bar_svg(title: &str, y_label: &str, bars: &[Bar]) -> String {
    let mut out = svg_header(title);
    let (x0, y0) = (MARGIN, HEIGHT - MARGIN);
    let (x1, y1) = (WIDTH - MARGIN, MARGIN);
    out.push_str(&format!(
        "<line x1=\"{x0}\" y1=\"{y0}\" x2=\"{x1}\" y2=\"{y0}\" stroke=\"black\"/>\n\
         <line x1=\"{x0}\" y1=\"{y0}\" x2=\"{x0}\" y2=\"{y1}\" stroke=\"black\"/>\n"
    ));
    out.push_str(&format!(
        "<text x=\"16\" y=\"{}\" text-anchor=\"middle\" transform=\"rotate(-90 16 {})\">{}</text>\n",
        (y0 + y1) / 2.0,
        (y0 + y1) / 2.0,
        escape(y_label)
    ));

    if !bars.is_empty() {
        let max = bars.iter().map(|b| b.value).fold(0.0_f64, f64::max).max(1e-9);
        let slot = (x1 - x0) / bars.len() as f64;
        for (i, bar) in bars.iter().enumerate() {
            let h = bar.value / max * (y0 - y1);
            let bx = x0 + slot * i as f64 + slot * 0.15;
            let bw = slot * 0.7;
            out.push_str(&format!(
                "<rect x=\"{bx:.1}\" y=\"{:.1}\" width=\"{bw:.1}\" height=\"{h:.1}\" fill=\"steelblue\"/>\n",
                y0 - h
            ));
            out.push_str(&format!(
                "<text x=\"{:.1}\" y=\"{}\" text-anchor=\"middle\">{}</text>\n",
                bx + bw / 2.0,
                y0 + 16.0,
                escape(&bar.label)
            ));
            out.push_str(&format!(
                "<text x=\"{:.1}\" y=\"{:.1}\" text-anchor=\"middle\">{}</text>\n",
                bx + bw / 2.0,
                y0 - h - 4.0,
                fmt(bar.value)
            ));
        }
    }
    out.push_str("</svg>\n");
    out
}

/// One column of a stacked bar chart: a label and one value per series.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StackedColumn {
    pub label: String,
    pub values: Vec<f64>,
}

const PALETTE: [&str; 6] = [
    "#d62728", "#1f77b4", "#2ca02c", "#9467bd", "#ff7f0e", "#7f7f7f",
];

/// Render stacked columns (each column normalized to its own total).
pub fn stacked_bar_svg(title: &str, series: &[&str], columns: &[StackedColumn]) -> String {
    let mut out = svg_header(title);
    let (x0, y0) = (MARGIN, HEIGHT - MARGIN);
    let (x1, y1) = (WIDTH - MARGIN, MARGIN);
    out.push_str(&format!(
        "<line x1=\"{x0}\" y1=\"{y0}\" x2=\"{x1}\" y2=\"{y0}\" stroke=\"black\"/>\n"
    ));

    for (i, name) in series.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let lx = x1 - 90.0;
        let ly = y1 + 16.0 * i as f64;
        out.push_str(&format!(
            "<rect x=\"{lx}\" y=\"{}\" width=\"10\" height=\"10\" fill=\"{color}\"/>\n\
             <text x=\"{}\" y=\"{}\">{}</text>\n",
            ly - 9.0,
            lx + 14.0,
            ly,
            escape(name)
        ));
    }

    if !columns.is_empty() {
        let slot = (x1 - x0) / columns.len() as f64;
        for (i, column) in columns.iter().enumerate() {
            let total: f64 = column.values.iter().sum();
            let bx = x0 + slot * i as f64 + slot * 0.15;
            let bw = slot * 0.7;
            let mut base = y0;
            if total > 0.0 {
                for (j, value) in column.values.iter().enumerate() {
                    let h = value / total * (y0 - y1);
                    if h > 0.0 {
                        base -= h;
                        out.push_str(&format!(
                            "<rect x=\"{bx:.1}\" y=\"{base:.1}\" width=\"{bw:.1}\" height=\"{h:.1}\" fill=\"{}\"/>\n",
                            PALETTE[j % PALETTE.len()]
                        ));
                    }
                }
            }
            out.push_str(&format!(
                "<text x=\"{:.1}\" y=\"{}\" text-anchor=\"middle\">{}</text>\n",
                bx + bw / 2.0,
                y0 + 16.0,
                escape(&column.label)
            ));
        }
    }
    out.push_str("</svg>\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ecdf_steps_to_one() {
        let points = ecdf(&[3.0, 1.0, 2.0, 2.0]);
        assert_eq!(points.len(), 4);
        assert_eq!(points[0].value, 1.0);
        assert_eq!(points.last().unwrap().fraction, 1.0);
        assert!((points[1].fraction - 0.5).abs() < 1e-12);
    }

    #[test]
    fn ecdf_of_empty_is_empty() {
        assert!(ecdf(&[]).is_empty());
    }

    #[test]
    fn svg_outputs_are_well_formed_enough() {
        let points = ecdf(&[1.0, 5.0, 10.0]);
        let svg = ecdf_svg("days out of date", "days", &points);
        assert!(svg.starts_with("<svg"));
        assert!(svg.ends_with("</svg>\n"));
        assert!(svg.contains("steelblue"));

        let bars = bar_svg(
            "flows",
            "percent",
            &[
                Bar { label: "instant".into(), value: 90.0 },
                Bar { label: "delayed".into(), value: 10.0 },
            ],
        );
        assert!(bars.contains("<rect"));
        assert!(bars.matches("<rect").count() >= 3);
    }
}
