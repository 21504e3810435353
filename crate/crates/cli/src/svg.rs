//! Static SVG figures built from plain polylines, polygons and circles.

use std::fmt::Write;

use crate::table::fmt_num;

const PANEL_W: f64 = 360.0;
const PANEL_H: f64 = 240.0;
const MARGIN: f64 = 44.0;
const COLUMNS: usize = 2;

/// One panel of the learning figure: the posterior after `title`'s signals.
#[derive(Debug, Clone, PartialEq)]
pub struct StagePanel {
    pub title: String,
    pub path: Vec<(f64, f64)>,
    pub signals: Vec<(f64, f64)>,
    /// `(t, mean, lower, upper)`.
    pub band: Vec<(f64, f64, f64, f64)>,
}

#[derive(Debug, Clone, Copy)]
struct Bounds {
    x0: f64,
    x1: f64,
    y0: f64,
    y1: f64,
}

impl Bounds {
    fn from_points(xs: impl Iterator<Item = f64> + Clone, ys: impl Iterator<Item = f64> + Clone) -> Self {
        let (x0, x1) = min_max(xs);
        let (y0, y1) = min_max(ys);
        let pad = 0.05 * (y1 - y0).max(1e-9);
        Bounds {
            x0,
            x1: if x1 > x0 { x1 } else { x0 + 1.0 },
            y0: y0 - pad,
            y1: y1 + pad,
        }
    }
}

fn min_max(it: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = it.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
    if lo.is_finite() {
        (lo, hi)
    } else {
        (0.0, 1.0)
    }
}

/// Maps data coordinates into the panel whose top-left corner is `(ox, oy)`.
struct Frame {
    ox: f64,
    oy: f64,
    b: Bounds,
}

impl Frame {
    fn x(&self, v: f64) -> f64 {
        self.ox + MARGIN + (v - self.b.x0) / (self.b.x1 - self.b.x0) * (PANEL_W - 1.5 * MARGIN)
    }

    fn y(&self, v: f64) -> f64 {
        self.oy + PANEL_H - MARGIN + (v - self.b.y0) / (self.b.y1 - self.b.y0) * -(PANEL_H - 1.5 * MARGIN)
    }

    fn points(&self, pts: impl Iterator<Item = (f64, f64)>) -> String {
        pts.map(|(a, b)| format!("{:.2},{:.2}", self.x(a), self.y(b)))
            .collect::<Vec<_>>()
            .join(" ")
    }

    fn axes(&self, out: &mut String, title: &str) {
        let (l, r) = (self.x(self.b.x0), self.x(self.b.x1));
        let (bot, top) = (self.y(self.b.y0), self.y(self.b.y1));
        let _ = writeln!(
            out,
            r##"<rect x="{l:.2}" y="{top:.2}" width="{:.2}" height="{:.2}" fill="none" stroke="#444"/>"##,
            r - l,
            bot - top
        );
        let _ = writeln!(
            out,
            r#"<text x="{:.2}" y="{:.2}" font-size="12">{}</text>"#,
            l,
            top - 8.0,
            escape(title)
        );
        for (v, anchor, x) in [(self.b.x0, "start", l), (self.b.x1, "end", r)] {
            let _ = writeln!(
                out,
                r#"<text x="{x:.2}" y="{:.2}" font-size="10" text-anchor="{anchor}">{}</text>"#,
                bot + 14.0,
                short(v)
            );
        }
        for (v, y) in [(self.b.y0, bot), (self.b.y1, top + 8.0)] {
            let _ = writeln!(
                out,
                r#"<text x="{:.2}" y="{y:.2}" font-size="10" text-anchor="end">{}</text>"#,
                l - 4.0,
                short(v)
            );
        }
    }
}

fn short(v: f64) -> String {
    fmt_num((v * 1e3).round() / 1e3)
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn document(panels: usize, body: &str) -> String {
    let cols = panels.clamp(1, COLUMNS);
    let rows = panels.div_ceil(COLUMNS).max(1);
    let (w, h) = (cols as f64 * PANEL_W, rows as f64 * PANEL_H);
    format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w}\" height=\"{h}\" viewBox=\"0 0 {w} {h}\" font-family=\"sans-serif\">\n\
         <rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n{body}</svg>\n"
    )
}

fn frame_at(k: usize, b: Bounds) -> Frame {
    Frame {
        ox: (k % COLUMNS) as f64 * PANEL_W,
        oy: (k / COLUMNS) as f64 * PANEL_H,
        b,
    }
}

/// One panel per stage on shared axes: the 95% band in gray, the posterior
/// mean in blue, the realized path in black and the signals seen so far as
/// red dots.
pub fn learning_figure(panels: &[StagePanel]) -> String {
    let xs = panels
        .iter()
        .flat_map(|p| p.band.iter().map(|b| b.0).chain(p.path.iter().map(|q| q.0)));
    let ys = panels.iter().flat_map(|p| {
        p.band
            .iter()
            .flat_map(|b| [b.2, b.3])
            .chain(p.path.iter().map(|q| q.1))
            .chain(p.signals.iter().map(|s| s.1))
    });
    let bounds = Bounds::from_points(xs.clone(), ys.clone());

    let mut body = String::new();
    for (k, panel) in panels.iter().enumerate() {
        let f = frame_at(k, bounds);
        let outline: Vec<(f64, f64)> = panel
            .band
            .iter()
            .map(|b| (b.0, b.3))
            .chain(panel.band.iter().rev().map(|b| (b.0, b.2)))
            .collect();
        let _ = writeln!(
            body,
            r##"<polygon points="{}" fill="#d9d9d9" stroke="none"/>"##,
            f.points(outline.into_iter())
        );
        let _ = writeln!(
            body,
            r##"<polyline points="{}" fill="none" stroke="#1f4e9c" stroke-width="1.5"/>"##,
            f.points(panel.band.iter().map(|b| (b.0, b.1)))
        );
        let _ = writeln!(
            body,
            r##"<polyline points="{}" fill="none" stroke="black" stroke-width="0.8"/>"##,
            f.points(panel.path.iter().copied())
        );
        for &(t, s) in &panel.signals {
            let _ = writeln!(
                body,
                r##"<circle cx="{:.2}" cy="{:.2}" r="3" fill="#c0392b"/>"##,
                f.x(t),
                f.y(s)
            );
        }
        f.axes(&mut body, &panel.title);
    }
    document(panels.len(), &body)
}

/// A named series for [`series_figure`].
#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    pub label: String,
    pub color: &'static str,
    pub points: Vec<(f64, f64)>,
}

/// Panels of line-and-dot series, each panel with its own axes.
pub fn series_figure(panels: &[(String, Vec<Series>)]) -> String {
    let mut body = String::new();
    for (k, (title, series)) in panels.iter().enumerate() {
        let xs = series.iter().flat_map(|s| s.points.iter().map(|p| p.0));
        let ys = series.iter().flat_map(|s| s.points.iter().map(|p| p.1));
        let f = frame_at(k, Bounds::from_points(xs, ys));
        for (j, s) in series.iter().enumerate() {
            let _ = writeln!(
                body,
                r#"<polyline points="{}" fill="none" stroke="{}" stroke-width="1.2"/>"#,
                f.points(s.points.iter().copied()),
                s.color
            );
            for &(x, y) in &s.points {
                let _ = writeln!(
                    body,
                    r#"<circle cx="{:.2}" cy="{:.2}" r="2" fill="{}"/>"#,
                    f.x(x),
                    f.y(y),
                    s.color
                );
            }
            let _ = writeln!(
                body,
                r#"<text x="{:.2}" y="{:.2}" font-size="10" text-anchor="end" fill="{}">{}</text>"#,
                f.ox + PANEL_W - MARGIN / 2.0 - 4.0,
                f.oy + 1.5 * MARGIN + 12.0 * j as f64 - 10.0,
                s.color,
                escape(&s.label)
            );
        }
        f.axes(&mut body, title);
    }
    document(panels.len(), &body)
}
