//! Minimal hand-emitted SVG line charts: log or linear axes, one polyline
//! per series, optional point marker. No drawing dependency; the CSV
//! sidecars written next to each chart are the testable artifact.

use std::fmt::Write;

const WIDTH: f64 = 900.0;
const HEIGHT: f64 = 560.0;
const MARGIN_L: f64 = 80.0;
const MARGIN_R: f64 = 30.0;
const MARGIN_T: f64 = 50.0;
const MARGIN_B: f64 = 60.0;

const PALETTE: [&str; 10] = [
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f",
    "#bcbd22", "#17becf",
];

pub struct Chart<'a> {
    pub title: &'a str,
    pub x_label: &'a str,
    pub y_label: &'a str,
    pub log_x: bool,
    pub log_y: bool,
    /// (name, points); names appear as polyline ids.
    pub series: Vec<(String, Vec<(f64, f64)>)>,
    /// Highlighted point (drawn as a circle with a label).
    pub marker: Option<(f64, f64, String)>,
}

struct AxisMap {
    min: f64,
    max: f64,
    log: bool,
    pixel_lo: f64,
    pixel_hi: f64,
}

impl AxisMap {
    fn project(&self, v: f64) -> f64 {
        let (v, min, max) = if self.log {
            (v.log10(), self.min.log10(), self.max.log10())
        } else {
            (v, self.min, self.max)
        };
        let t = if max > min { (v - min) / (max - min) } else { 0.5 };
        self.pixel_lo + t * (self.pixel_hi - self.pixel_lo)
    }

    fn ticks(&self) -> Vec<f64> {
        if self.log {
            let lo = self.min.log10().floor() as i32;
            let hi = self.max.log10().ceil() as i32;
            (lo..=hi)
                .map(|d| 10f64.powi(d))
                .filter(|t| *t >= self.min * 0.999 && *t <= self.max * 1.001)
                .collect()
        } else {
            let span = self.max - self.min;
            if span <= 0.0 {
                return vec![self.min];
            }
            let step = 10f64.powf(span.log10().floor());
            let step = if span / step > 5.0 { step } else { step / 2.0 };
            let mut t = (self.min / step).ceil() * step;
            let mut out = Vec::new();
            while t <= self.max + 1e-12 * span {
                out.push(t);
                t += step;
            }
            out
        }
    }
}

fn fmt_tick(v: f64) -> String {
    if v == 0.0 {
        return "0".into();
    }
    let a = v.abs();
    if !(0.01..10000.0).contains(&a) {
        format!("{v:.0e}")
    } else if a >= 1.0 {
        let s = format!("{v:.1}");
        s.strip_suffix(".0").unwrap_or(&s).to_string()
    } else {
        format!("{v:.3}")
    }
}

pub fn render(chart: &Chart) -> String {
    let mut x_min = f64::INFINITY;
    let mut x_max = f64::NEG_INFINITY;
    let mut y_min = f64::INFINITY;
    let mut y_max = f64::NEG_INFINITY;
    let mut cover = |x: f64, y: f64| {
        x_min = x_min.min(x);
        x_max = x_max.max(x);
        y_min = y_min.min(y);
        y_max = y_max.max(y);
    };
    for (_, points) in &chart.series {
        for &(x, y) in points {
            cover(x, y);
        }
    }
    if let Some((x, y, _)) = &chart.marker {
        cover(*x, *y);
    }
    if !chart.log_y {
        let pad = 0.05 * (y_max - y_min).max(1e-12);
        y_min -= pad;
        y_max += pad;
    }

    let x_axis = AxisMap {
        min: x_min,
        max: x_max,
        log: chart.log_x,
        pixel_lo: MARGIN_L,
        pixel_hi: WIDTH - MARGIN_R,
    };
    let y_axis = AxisMap {
        min: y_min,
        max: y_max,
        log: chart.log_y,
        pixel_lo: HEIGHT - MARGIN_B,
        pixel_hi: MARGIN_T,
    };

    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">"#
    );
    let _ = writeln!(out, r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);
    let _ = writeln!(
        out,
        r#"<text x="{}" y="28" font-family="sans-serif" font-size="18" text-anchor="middle">{}</text>"#,
        WIDTH / 2.0,
        chart.title
    );

    // Axes.
    let _ = writeln!(
        out,
        r#"<line x1="{MARGIN_L}" y1="{0}" x2="{1}" y2="{0}" stroke="black"/>"#,
        HEIGHT - MARGIN_B,
        WIDTH - MARGIN_R
    );
    let _ = writeln!(
        out,
        r#"<line x1="{MARGIN_L}" y1="{MARGIN_T}" x2="{MARGIN_L}" y2="{}" stroke="black"/>"#,
        HEIGHT - MARGIN_B
    );

    for tick in x_axis.ticks() {
        let x = x_axis.project(tick);
        let _ = writeln!(
            out,
            r##"<line x1="{x}" y1="{0}" x2="{x}" y2="{1}" stroke="#cccccc" stroke-dasharray="3,3"/>"##,
            MARGIN_T,
            HEIGHT - MARGIN_B
        );
        let _ = writeln!(
            out,
            r#"<text x="{x}" y="{}" font-family="sans-serif" font-size="12" text-anchor="middle">{}</text>"#,
            HEIGHT - MARGIN_B + 18.0,
            fmt_tick(tick)
        );
    }
    for tick in y_axis.ticks() {
        let y = y_axis.project(tick);
        let _ = writeln!(
            out,
            r##"<line x1="{MARGIN_L}" y1="{y}" x2="{}" y2="{y}" stroke="#cccccc" stroke-dasharray="3,3"/>"##,
            WIDTH - MARGIN_R
        );
        let _ = writeln!(
            out,
            r#"<text x="{}" y="{}" font-family="sans-serif" font-size="12" text-anchor="end">{}</text>"#,
            MARGIN_L - 6.0,
            y + 4.0,
            fmt_tick(tick)
        );
    }

    let _ = writeln!(
        out,
        r#"<text x="{}" y="{}" font-family="sans-serif" font-size="14" text-anchor="middle">{}</text>"#,
        (MARGIN_L + WIDTH - MARGIN_R) / 2.0,
        HEIGHT - 14.0,
        chart.x_label
    );
    let _ = writeln!(
        out,
        r#"<text x="20" y="{}" font-family="sans-serif" font-size="14" text-anchor="middle" transform="rotate(-90 20 {0})">{1}</text>"#,
        (MARGIN_T + HEIGHT - MARGIN_B) / 2.0,
        chart.y_label
    );

    for (i, (name, points)) in chart.series.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let coords: Vec<String> = points
            .iter()
            .map(|&(x, y)| format!("{:.2},{:.2}", x_axis.project(x), y_axis.project(y)))
            .collect();
        let _ = writeln!(
            out,
            r#"<polyline id="{}" fill="none" stroke="{color}" stroke-width="1.5" points="{}"/>"#,
            xml_escape(name),
            coords.join(" ")
        );
    }

    if let Some((x, y, label)) = &chart.marker {
        let px = x_axis.project(*x);
        let py = y_axis.project(*y);
        let _ = writeln!(
            out,
            r##"<circle cx="{px:.2}" cy="{py:.2}" r="5" fill="none" stroke="#d62728" stroke-width="2"/>"##
        );
        let _ = writeln!(
            out,
            r##"<text x="{:.2}" y="{:.2}" font-family="sans-serif" font-size="12" fill="#d62728">{}</text>"##,
            px + 8.0,
            py - 8.0,
            xml_escape(label)
        );
    }

    out.push_str("</svg>\n");
    out
}

fn xml_escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}
