//! Minimal SVG scatter plots.
//!
//! Each point is a `<circle>` carrying its data coordinates in `data-x` and
//! `data-y` and its group in `data-group`, so plots can be read back
//! without inverting the pixel transform. Colors cycle through [`PALETTE`]
//! by group.

use std::fmt::Write as _;

use crate::error::{Error, Result};

pub const PALETTE: [&str; 10] =
    ["#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"];

const SIZE: f64 = 600.0;
const MARGIN: f64 = 50.0;
const RADIUS: f64 = 1.2;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScatterPoint {
    pub group: usize,
    pub x: f64,
    pub y: f64,
}

fn range(vals: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = vals.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
    if !lo.is_finite() {
        return (-1.0, 1.0);
    }
    if hi - lo < 1e-12 {
        return (lo - 0.5, hi + 0.5);
    }
    (lo, hi)
}

pub fn scatter_svg(points: &[ScatterPoint], x_label: &str, y_label: &str, title: &str) -> String {
    let (x0, x1) = range(points.iter().map(|p| p.x));
    let (y0, y1) = range(points.iter().map(|p| p.y));
    let span = SIZE - 2.0 * MARGIN;
    let px = |x: f64| MARGIN + (x - x0) / (x1 - x0) * span;
    let py = |y: f64| SIZE - MARGIN - (y - y0) / (y1 - y0) * span;

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{SIZE}" height="{SIZE}" viewBox="0 0 {SIZE} {SIZE}">"#
    );
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ =
        writeln!(s, r#"<rect x="{MARGIN}" y="{MARGIN}" width="{span}" height="{span}" fill="none" stroke="black"/>"#);
    let _ = writeln!(s, r#"<text x="{}" y="30" text-anchor="middle">{}</text>"#, SIZE / 2.0, escape(title));
    let _ =
        writeln!(s, r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#, SIZE / 2.0, SIZE - 15.0, escape(x_label));
    let _ = writeln!(
        s,
        r#"<text x="15" y="{}" text-anchor="middle" transform="rotate(-90 15 {})">{}</text>"#,
        SIZE / 2.0,
        SIZE / 2.0,
        escape(y_label)
    );
    for (v, x, anchor) in [(x0, MARGIN, "start"), (x1, SIZE - MARGIN, "end")] {
        let _ = writeln!(
            s,
            r#"<text x="{x}" y="{}" font-size="10" text-anchor="{anchor}">{v:.4}</text>"#,
            SIZE - MARGIN + 14.0
        );
    }
    for (v, y) in [(y0, SIZE - MARGIN), (y1, MARGIN + 10.0)] {
        let _ = writeln!(s, r#"<text x="{}" y="{y}" font-size="10" text-anchor="end">{v:.4}</text>"#, MARGIN - 4.0);
    }
    for p in points {
        let _ = writeln!(
            s,
            r#"<circle cx="{:.2}" cy="{:.2}" r="{RADIUS}" fill="{}" data-group="{}" data-x="{:?}" data-y="{:?}"/>"#,
            px(p.x),
            py(p.y),
            PALETTE[p.group % PALETTE.len()],
            p.group,
            p.x,
            p.y
        );
    }
    s.push_str("</svg>\n");
    s
}

/// Reads back the points written by [`scatter_svg`], in document order.
pub fn parse_scatter_svg(text: &str) -> Result<Vec<ScatterPoint>> {
    if !text.trim_start().starts_with("<svg") {
        return Err(Error::Parse { line: 1, msg: "not an svg document".into() });
    }
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if !line.starts_with("<circle") {
            continue;
        }
        let attr = |name: &str| -> Result<&str> {
            let key = format!(" {name}=\"");
            let start =
                line.find(&key).ok_or_else(|| Error::Parse { line: i + 1, msg: format!("missing `{name}`") })?
                    + key.len();
            let len = line[start..]
                .find('"')
                .ok_or_else(|| Error::Parse { line: i + 1, msg: "unterminated attribute".into() })?;
            Ok(&line[start..start + len])
        };
        let bad = |name: &str| Error::Parse { line: i + 1, msg: format!("bad `{name}` value") };
        out.push(ScatterPoint {
            group: attr("data-group")?.parse().map_err(|_| bad("data-group"))?,
            x: attr("data-x")?.parse().map_err(|_| bad("data-x"))?,
            y: attr("data-y")?.parse().map_err(|_| bad("data-y"))?,
        });
    }
    Ok(out)
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn points_round_trip() {
        let pts: Vec<ScatterPoint> = (0..25)
            .map(|k| ScatterPoint { group: k % 12, x: (k as f64 * 0.37).sin(), y: 1.0 / (k as f64 + 3.0) })
            .collect();
        let svg = scatter_svg(&pts, "y1", "y2", "x2 = 0 <section>");
        assert!(svg.contains("x2 = 0 &lt;section&gt;"));
        assert_eq!(parse_scatter_svg(&svg).unwrap(), pts);
    }

    #[test]
    fn colors_cycle_by_group() {
        let pts = [ScatterPoint { group: 0, x: 0.0, y: 0.0 }, ScatterPoint { group: 10, x: 1.0, y: 1.0 }];
        let svg = scatter_svg(&pts, "a", "b", "");
        assert_eq!(svg.matches(PALETTE[0]).count(), 2);
    }

    #[test]
    fn empty_plot_is_valid() {
        let svg = scatter_svg(&[], "a", "b", "empty");
        assert!(parse_scatter_svg(&svg).unwrap().is_empty());
    }
}
