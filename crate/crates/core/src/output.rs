//! Number formatting and minimal SVG scatter plots for result files.

use std::fmt::Write;

/// Round-trippable float text with 17 significant digits.
pub fn float(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        format!("{x}")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Marker {
    Dot,
    Circle,
    Cross,
}

#[derive(Debug, Clone)]
pub struct Series {
    pub name: String,
    pub color: String,
    pub marker: Marker,
    pub points: Vec<[f64; 2]>,
}

/// Scatter plot with linear axes fitted to the data.
#[derive(Debug, Clone, Default)]
pub struct ScatterPlot {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub series: Vec<Series>,
}

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 520.0;
const MARGIN: f64 = 60.0;

impl ScatterPlot {
    pub fn new(title: &str, x_label: &str, y_label: &str) -> Self {
        Self {
            title: title.into(),
            x_label: x_label.into(),
            y_label: y_label.into(),
            series: Vec::new(),
        }
    }

    pub fn add(&mut self, name: &str, color: &str, marker: Marker, points: Vec<[f64; 2]>) -> &mut Self {
        self.series.push(Series {
            name: name.into(),
            color: color.into(),
            marker,
            points,
        });
        self
    }

    fn bounds(&self) -> ([f64; 2], [f64; 2]) {
        let mut x = [f64::INFINITY, f64::NEG_INFINITY];
        let mut y = x;
        for p in self.series.iter().flat_map(|s| &s.points).filter(|p| p[0].is_finite() && p[1].is_finite()) {
            x = [x[0].min(p[0]), x[1].max(p[0])];
            y = [y[0].min(p[1]), y[1].max(p[1])];
        }
        let pad = |r: [f64; 2]| {
            if !r[0].is_finite() {
                return [0.0, 1.0];
            }
            let w = (r[1] - r[0]).max(1e-12);
            [r[0] - 0.05 * w, r[1] + 0.05 * w]
        };
        (pad(x), pad(y))
    }

    pub fn to_svg(&self) -> String {
        let (xr, yr) = self.bounds();
        let sx = |x: f64| MARGIN + (x - xr[0]) / (xr[1] - xr[0]) * (WIDTH - 2.0 * MARGIN);
        let sy = |y: f64| HEIGHT - MARGIN - (y - yr[0]) / (yr[1] - yr[0]) * (HEIGHT - 2.0 * MARGIN);
        let mut s = String::new();
        let _ = writeln!(
            s,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
        );
        let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
        let _ = writeln!(
            s,
            r#"<rect x="{MARGIN}" y="{MARGIN}" width="{}" height="{}" fill="none" stroke="black"/>"#,
            WIDTH - 2.0 * MARGIN,
            HEIGHT - 2.0 * MARGIN
        );
        let _ = writeln!(s, r#"<text x="{}" y="30" text-anchor="middle" font-size="14">{}</text>"#, WIDTH / 2.0, escape(&self.title));
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#,
            WIDTH / 2.0,
            HEIGHT - 15.0,
            escape(&self.x_label)
        );
        let _ = writeln!(
            s,
            r#"<text x="15" y="{}" text-anchor="middle" transform="rotate(-90 15 {})">{}</text>"#,
            HEIGHT / 2.0,
            HEIGHT / 2.0,
            escape(&self.y_label)
        );
        for i in 0..=4 {
            let f = i as f64 / 4.0;
            let xv = xr[0] + f * (xr[1] - xr[0]);
            let yv = yr[0] + f * (yr[1] - yr[0]);
            let _ = writeln!(
                s,
                r#"<text x="{:.1}" y="{}" text-anchor="middle">{xv:.3}</text>"#,
                sx(xv),
                HEIGHT - MARGIN + 16.0
            );
            let _ = writeln!(
                s,
                r#"<text x="{}" y="{:.1}" text-anchor="end">{yv:.3}</text>"#,
                MARGIN - 4.0,
                sy(yv) + 4.0
            );
        }
        for (i, series) in self.series.iter().enumerate() {
            let _ = writeln!(s, r#"<g fill="{0}" stroke="{0}">"#, series.color);
            for p in series.points.iter().filter(|p| p[0].is_finite() && p[1].is_finite()) {
                let (x, y) = (sx(p[0]), sy(p[1]));
                let _ = match series.marker {
                    Marker::Dot => writeln!(s, r#"<circle cx="{x:.2}" cy="{y:.2}" r="1.2" stroke="none"/>"#),
                    Marker::Circle => writeln!(s, r#"<circle cx="{x:.2}" cy="{y:.2}" r="3" fill="none"/>"#),
                    Marker::Cross => writeln!(
                        s,
                        r#"<path d="M{:.2} {:.2}L{:.2} {:.2}M{:.2} {:.2}L{:.2} {:.2}" fill="none"/>"#,
                        x - 3.0,
                        y - 3.0,
                        x + 3.0,
                        y + 3.0,
                        x - 3.0,
                        y + 3.0,
                        x + 3.0,
                        y - 3.0
                    ),
                };
            }
            let _ = writeln!(s, "</g>");
            let _ = writeln!(
                s,
                r#"<text x="{}" y="{}" fill="{}">{}</text>"#,
                WIDTH - MARGIN - 120.0,
                MARGIN + 16.0 * (i + 1) as f64,
                series.color,
                escape(&series.name)
            );
        }
        s.push_str("</svg>\n");
        s
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn float_round_trips() {
        for x in [0.1, 1.0 / 3.0, -2.5e-300, 6.02214076e23, f64::MIN_POSITIVE] {
            assert_eq!(float(x).parse::<f64>().unwrap(), x);
        }
        assert_eq!(float(0.5), "5.0000000000000000e-1");
    }

    #[test]
    fn svg_contains_every_point() {
        let mut plot = ScatterPlot::new("t", "x", "y");
        plot.add("a", "black", Marker::Circle, vec![[0.0, 0.0], [1.0, 2.0]]);
        plot.add("b", "gray", Marker::Cross, vec![[0.5, f64::NAN], [0.5, 1.0]]);
        let svg = plot.to_svg();
        assert!(svg.starts_with("<svg") && svg.trim_end().ends_with("</svg>"));
        assert_eq!(svg.matches("<circle").count(), 2);
        assert_eq!(svg.matches("<path").count(), 1);
    }
}
