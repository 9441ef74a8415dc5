//! Minimal SVG line charts, one 800×400 panel per profile.

use std::fmt::Write as _;

pub const PANEL_W: f64 = 800.0;
pub const PANEL_H: f64 = 400.0;
const MARGIN: (f64, f64, f64, f64) = (70.0, 20.0, 36.0, 44.0); // left, right, top, bottom

pub struct Series {
    pub label: String,
    pub color: &'static str,
    pub points: Vec<(f64, f64)>,
}

pub struct Panel {
    pub title: String,
    pub series: Vec<Series>,
}

/// Tick positions at a 1/2/5 step covering `[lo, hi]`.
fn ticks(lo: f64, hi: f64, target: usize) -> Vec<f64> {
    let span = hi - lo;
    if !(span > 0.0) {
        return vec![lo];
    }
    let raw = span / target as f64;
    let mag = 10f64.powf(raw.log10().floor());
    let step = [1.0, 2.0, 5.0, 10.0].iter().map(|m| m * mag).find(|s| span / s <= target as f64).unwrap_or(10.0 * mag);
    let first = (lo / step).ceil() as i64;
    let last = (hi / step).floor() as i64;
    (first..=last).map(|k| k as f64 * step).collect()
}

fn fmt_tick(v: f64) -> String {
    let s = format!("{v:.4}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" {
        "0".into()
    } else {
        s.into()
    }
}

fn panel_into(svg: &mut String, panel: &Panel, ox: f64, oy: f64) {
    let (ml, mr, mt, mb) = MARGIN;
    let (pw, ph) = (PANEL_W - ml - mr, PANEL_H - mt - mb);
    let all = panel.series.iter().flat_map(|s| s.points.iter());
    let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for &(x, y) in all {
        x0 = x0.min(x);
        x1 = x1.max(x);
        y0 = y0.min(y);
        y1 = y1.max(y);
    }
    if !(x1 > x0) {
        x1 = x0 + 1.0;
    }
    if !(y1 > y0) {
        y0 -= 0.5;
        y1 += 0.5;
    }
    let pad = 0.05 * (y1 - y0);
    let (y0, y1) = (y0 - pad, y1 + pad);
    let sx = |x: f64| ox + ml + (x - x0) / (x1 - x0) * pw;
    let sy = |y: f64| oy + mt + (y1 - y) / (y1 - y0) * ph;

    let _ = writeln!(svg, r#"<g font-family="sans-serif" font-size="12">"#);
    let _ = writeln!(
        svg,
        r#"<rect x="{:.1}" y="{:.1}" width="{pw:.1}" height="{ph:.1}" fill="none" stroke="black"/>"#,
        ox + ml,
        oy + mt
    );
    let _ = writeln!(
        svg,
        r#"<text x="{:.1}" y="{:.1}" text-anchor="middle" font-size="14">{}</text>"#,
        ox + PANEL_W / 2.0,
        oy + 22.0,
        panel.title
    );
    for t in ticks(x0, x1, 8) {
        let x = sx(t);
        let yb = oy + mt + ph;
        let _ = writeln!(svg, r#"<line x1="{x:.1}" y1="{yb:.1}" x2="{x:.1}" y2="{:.1}" stroke="black"/>"#, yb + 5.0);
        let _ = writeln!(svg, r#"<text x="{x:.1}" y="{:.1}" text-anchor="middle">{}</text>"#, yb + 18.0, fmt_tick(t));
    }
    for t in ticks(y0, y1, 6) {
        let y = sy(t);
        let xl = ox + ml;
        let _ = writeln!(svg, r#"<line x1="{:.1}" y1="{y:.1}" x2="{xl:.1}" y2="{y:.1}" stroke="black"/>"#, xl - 5.0);
        let _ =
            writeln!(svg, r#"<text x="{:.1}" y="{:.1}" text-anchor="end">{}</text>"#, xl - 8.0, y + 4.0, fmt_tick(t));
    }
    if y0 < 0.0 && y1 > 0.0 {
        let y = sy(0.0);
        let _ = writeln!(
            svg,
            r##"<line x1="{:.1}" y1="{y:.1}" x2="{:.1}" y2="{y:.1}" stroke="#bbb" stroke-dasharray="4 4"/>"##,
            ox + ml,
            ox + ml + pw
        );
    }
    let _ = writeln!(
        svg,
        r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">φ</text>"#,
        ox + ml + pw / 2.0,
        oy + PANEL_H - 6.0
    );
    for (k, s) in panel.series.iter().enumerate() {
        let _ = write!(svg, r#"<polyline fill="none" stroke="{}" stroke-width="1.5" points=""#, s.color);
        for &(x, y) in &s.points {
            let _ = write!(svg, "{:.2},{:.2} ", sx(x), sy(y));
        }
        let _ = writeln!(svg, r#""/>"#);
        let ly = oy + mt + 16.0 + 16.0 * k as f64;
        let lx = ox + ml + pw - 90.0;
        let _ = writeln!(
            svg,
            r#"<line x1="{lx:.1}" y1="{:.1}" x2="{:.1}" y2="{:.1}" stroke="{}" stroke-width="2"/>"#,
            ly - 4.0,
            lx + 20.0,
            ly - 4.0,
            s.color
        );
        let _ = writeln!(svg, r#"<text x="{:.1}" y="{ly:.1}">{}</text>"#, lx + 26.0, s.label);
    }
    let _ = writeln!(svg, "</g>");
}

/// Lays panels out row by row in `cols` columns.
pub fn render(panels: &[Panel], cols: usize) -> String {
    let cols = cols.max(1);
    let rows = panels.len().div_ceil(cols).max(1);
    let (w, h) = (PANEL_W * cols as f64, PANEL_H * rows as f64);
    let mut svg = String::new();
    let _ = writeln!(svg, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}">"#);
    let _ = writeln!(svg, r#"<rect width="100%" height="100%" fill="white"/>"#);
    for (i, panel) in panels.iter().enumerate() {
        panel_into(&mut svg, panel, PANEL_W * (i % cols) as f64, PANEL_H * (i / cols) as f64);
    }
    svg.push_str("</svg>\n");
    svg
}

/// `W` and `𝒜W` against `φ`.
pub fn profile_panel(title: String, phi: &[f64], w: &[f64], aw: &[f64]) -> Panel {
    let zip = |v: &[f64]| phi.iter().copied().zip(v.iter().copied()).collect();
    Panel {
        title,
        series: vec![
            Series { label: "W".into(), color: "#1f77b4", points: zip(w) },
            Series { label: "AW".into(), color: "#d62728", points: zip(aw) },
        ],
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ticks_are_round() {
        assert_eq!(ticks(-6.0, 6.0, 8), vec![-6.0, -4.0, -2.0, 0.0, 2.0, 4.0, 6.0]);
        assert_eq!(fmt_tick(0.5), "0.5");
        assert_eq!(fmt_tick(-0.0), "0");
    }

    #[test]
    fn layout_has_one_group_per_panel() {
        let phi = [-1.0, 0.0, 1.0];
        let p = profile_panel("a".into(), &phi, &[0.0, 1.0, 0.0], &[0.1, 0.8, 0.1]);
        let q = profile_panel("b".into(), &phi, &[0.0, 2.0, 0.0], &[0.2, 1.5, 0.2]);
        let svg = render(&[p, q], 2);
        assert!(svg.starts_with("<svg"));
        assert!(svg.contains(r#"viewBox="0 0 1600 400""#));
        assert_eq!(svg.matches("<polyline").count(), 4);
    }
}
