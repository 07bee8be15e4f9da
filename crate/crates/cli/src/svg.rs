//! Minimal standalone SVG rendering of result tables.

use std::fmt::Write;

use crate::experiments::PlotKind;
use crate::table::Table;

const W: f64 = 720.0;
const H: f64 = 460.0;
const L: f64 = 70.0;
const R: f64 = 180.0;
const T: f64 = 20.0;
const B: f64 = 50.0;
const PALETTE: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#17becf",
];

fn range(vals: impl Iterator<Item = f64>) -> Option<(f64, f64)> {
    let (lo, hi) = vals
        .filter(|v| v.is_finite())
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| {
            (a.min(v), b.max(v))
        });
    if lo > hi {
        None
    } else if lo == hi {
        Some((lo - 0.5, hi + 0.5))
    } else {
        Some((lo, hi))
    }
}

fn frame(out: &mut String, x_label: &str, y_label: &str, xr: (f64, f64), yr: (f64, f64)) {
    let _ = write!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" font-family="sans-serif" font-size="11">
<rect width="{W}" height="{H}" fill="white"/>
<rect x="{L}" y="{T}" width="{}" height="{}" fill="none" stroke="black"/>
<text x="{}" y="{}" text-anchor="middle">{x_label}</text>
<text x="15" y="{}" text-anchor="middle" transform="rotate(-90 15 {})">{y_label}</text>
"#,
        W - L - R,
        H - T - B,
        L + (W - L - R) / 2.0,
        H - 12.0,
        T + (H - T - B) / 2.0,
        T + (H - T - B) / 2.0,
    );
    for k in 0..=4 {
        let f = k as f64 / 4.0;
        let x = L + f * (W - L - R);
        let y = H - B - f * (H - T - B);
        let _ = writeln!(
            out,
            r#"<text x="{x:.1}" y="{:.1}" text-anchor="middle">{:.3}</text><text x="{:.1}" y="{:.1}" text-anchor="end">{:.3}</text>"#,
            H - B + 15.0,
            xr.0 + f * (xr.1 - xr.0),
            L - 5.0,
            y + 4.0,
            yr.0 + f * (yr.1 - yr.0),
        );
    }
}

fn lines(t: &Table, x: &str, ys: &[String], log_y: bool) -> Option<String> {
    let xs = t.column(x)?;
    let tf = |v: f64| if log_y { v.log10() } else { v };
    let series: Vec<(String, Vec<Option<f64>>)> = ys
        .iter()
        .filter_map(|y| {
            Some((
                y.clone(),
                t.column(y)?.into_iter().map(|v| v.map(tf)).collect(),
            ))
        })
        .collect();
    let xr = range(xs.iter().flatten().copied())?;
    let yr = range(series.iter().flat_map(|(_, v)| v.iter().flatten().copied()))?;
    let sx = |v: f64| L + (v - xr.0) / (xr.1 - xr.0) * (W - L - R);
    let sy = |v: f64| H - B - (v - yr.0) / (yr.1 - yr.0) * (H - T - B);
    let mut out = String::new();
    frame(
        &mut out,
        x,
        if log_y { "log10(value)" } else { "value" },
        xr,
        yr,
    );
    for (k, (name, vals)) in series.iter().enumerate() {
        let color = PALETTE[k % PALETTE.len()];
        // gaps (empty cells) split the polyline
        let mut path = String::new();
        let mut pen_down = false;
        for (xv, yv) in xs.iter().zip(vals) {
            match (xv, yv) {
                (Some(a), Some(b)) if b.is_finite() => {
                    let _ = write!(
                        path,
                        "{}{:.2},{:.2} ",
                        if pen_down { "L" } else { "M" },
                        sx(*a),
                        sy(*b)
                    );
                    pen_down = true;
                }
                _ => pen_down = false,
            }
        }
        let _ = writeln!(
            out,
            r#"<path d="{path}" fill="none" stroke="{color}" stroke-width="1.2"/>"#
        );
        let ly = T + 15.0 + 16.0 * k as f64;
        let _ = writeln!(
            out,
            r#"<line x1="{}" y1="{ly}" x2="{}" y2="{ly}" stroke="{color}" stroke-width="2"/><text x="{}" y="{}">{}</text>"#,
            W - R + 10.0,
            W - R + 30.0,
            W - R + 35.0,
            ly + 4.0,
            escape(name)
        );
    }
    out.push_str("</svg>\n");
    Some(out)
}

fn heatmap(t: &Table, x: &str, y: &str, z: &str, contour: f64) -> Option<String> {
    let (xs, ys, zs) = (t.column(x)?, t.column(y)?, t.column(z)?);
    let mut ux: Vec<f64> = xs.iter().flatten().copied().collect();
    let mut uy: Vec<f64> = ys.iter().flatten().copied().collect();
    for u in [&mut ux, &mut uy] {
        u.sort_by(f64::total_cmp);
        u.dedup();
    }
    let xr = range(ux.iter().copied())?;
    let yr = range(uy.iter().copied())?;
    let logz: Vec<Option<f64>> = zs
        .iter()
        .map(|v| v.filter(|v| *v > 0.0).map(f64::log10))
        .collect();
    let zmax = logz
        .iter()
        .flatten()
        .fold(0.0f64, |m, v| m.max(v.abs()))
        .max(1e-12);
    let (cw, ch) = ((W - L - R) / ux.len() as f64, (H - T - B) / uy.len() as f64);
    let ix = |v: f64| ux.partition_point(|u| *u < v);
    let iy = |v: f64| uy.partition_point(|u| *u < v);
    let mut grid = vec![vec![None; ux.len()]; uy.len()];
    let mut out = String::new();
    frame(&mut out, x, y, xr, yr);
    for ((xv, yv), zv) in xs.iter().zip(&ys).zip(&logz) {
        let (Some(a), Some(b)) = (xv, yv) else {
            continue;
        };
        let (i, j) = (ix(*a), iy(*b));
        grid[j][i] = *zv;
        // diverging map centred on log10(z) = 0
        let fill = match zv {
            Some(v) => {
                let s = (v / zmax).clamp(-1.0, 1.0);
                let (r, g, bl) = if s >= 0.0 {
                    (255.0, 255.0 * (1.0 - s), 255.0 * (1.0 - s))
                } else {
                    (255.0 * (1.0 + s), 255.0 * (1.0 + s), 255.0)
                };
                format!("rgb({},{},{})", r as u8, g as u8, bl as u8)
            }
            None => "#888".into(),
        };
        let _ = writeln!(
            out,
            r#"<rect x="{:.2}" y="{:.2}" width="{:.2}" height="{:.2}" fill="{fill}"/>"#,
            L + i as f64 * cw,
            H - B - (j + 1) as f64 * ch,
            cw + 0.3,
            ch + 0.3
        );
    }
    // cell edges where the ratio crosses the contour level
    let c = contour.log10();
    let side = |v: Option<f64>| v.map(|v| v < c);
    for j in 0..uy.len() {
        for i in 0..ux.len() {
            let here = side(grid[j][i]);
            if i + 1 < ux.len()
                && here.is_some()
                && side(grid[j][i + 1]).is_some()
                && here != side(grid[j][i + 1])
            {
                let xe = L + (i + 1) as f64 * cw;
                let _ = writeln!(
                    out,
                    r#"<line x1="{xe:.2}" y1="{:.2}" x2="{xe:.2}" y2="{:.2}" stroke="black" stroke-width="1.5"/>"#,
                    H - B - j as f64 * ch,
                    H - B - (j + 1) as f64 * ch
                );
            }
            if j + 1 < uy.len()
                && here.is_some()
                && side(grid[j + 1][i]).is_some()
                && here != side(grid[j + 1][i])
            {
                let ye = H - B - (j + 1) as f64 * ch;
                let _ = writeln!(
                    out,
                    r#"<line x1="{:.2}" y1="{ye:.2}" x2="{:.2}" y2="{ye:.2}" stroke="black" stroke-width="1.5"/>"#,
                    L + i as f64 * cw,
                    L + (i + 1) as f64 * cw
                );
            }
        }
    }
    let _ = writeln!(
        out,
        r#"<text x="{}" y="{}">{} (log color, black: = {contour})</text>"#,
        W - R + 10.0,
        T + 15.0,
        escape(z)
    );
    out.push_str("</svg>\n");
    Some(out)
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}

/// Renders a table; `None` when the referenced columns are missing or empty.
pub fn render(t: &Table, kind: &PlotKind) -> Option<String> {
    match kind {
        PlotKind::Lines { x, ys, log_y } => lines(t, x, ys, *log_y),
        PlotKind::Heatmap { x, y, z, contour } => heatmap(t, x, y, z, *contour),
    }
}
