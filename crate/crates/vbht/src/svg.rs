//! Minimal SVG charts: scatter series with distinct markers, and polylines.

use std::fmt::Write;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Marker {
    Circle,
    Triangle,
    /// Points joined in order, no markers.
    Line,
}

#[derive(Debug, Clone)]
pub struct Series {
    pub name: String,
    pub color: &'static str,
    pub marker: Marker,
    pub points: Vec<(f64, f64)>,
}

#[derive(Debug, Clone)]
pub struct Plot {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub log_x: bool,
    pub series: Vec<Series>,
}

const W: f64 = 640.0;
const H: f64 = 440.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 170.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 60.0;

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

fn tick_label(v: f64) -> String {
    let s = format!("{:.4}", v);
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" {
        "0".into()
    } else {
        s.into()
    }
}

// 1-2-5 steps giving roughly five intervals.
fn linear_ticks(lo: f64, hi: f64) -> Vec<f64> {
    let raw = (hi - lo) / 5.0;
    let mag = 10f64.powf(raw.log10().floor());
    let step = [1.0, 2.0, 5.0, 10.0]
        .iter()
        .map(|m| m * mag)
        .find(|s| *s >= raw)
        .unwrap_or(10.0 * mag);
    let first = (lo / step - 1e-9).ceil() as i64;
    let last = (hi / step + 1e-9).floor() as i64;
    (first..=last).map(|k| k as f64 * step).collect()
}

fn log_ticks(lo: f64, hi: f64, xs: &[f64]) -> Vec<f64> {
    let mut distinct: Vec<f64> = xs.to_vec();
    distinct.sort_by(f64::total_cmp);
    distinct.dedup();
    if distinct.len() <= 12 {
        return distinct;
    }
    let mut p = 10f64.powf(lo.log10().ceil());
    let mut out = Vec::new();
    while p <= hi * (1.0 + 1e-12) {
        out.push(p);
        p *= 10.0;
    }
    out
}

fn span(lo: f64, hi: f64) -> (f64, f64) {
    if hi > lo {
        (lo, hi)
    } else {
        let pad = if lo == 0.0 { 1.0 } else { lo.abs() * 0.1 };
        (lo - pad, hi + pad)
    }
}

impl Plot {
    pub fn to_svg(&self) -> String {
        let pts = || self.series.iter().flat_map(|s| s.points.iter().copied());
        let finite: Vec<(f64, f64)> = pts()
            .filter(|(x, y)| x.is_finite() && y.is_finite() && (!self.log_x || *x > 0.0))
            .collect();
        let xs: Vec<f64> = finite.iter().map(|p| p.0).collect();
        let fold = |v: &mut dyn Iterator<Item = f64>| {
            v.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), x| {
                (a.min(x), b.max(x))
            })
        };
        let (mut x0, mut x1) = fold(&mut xs.iter().copied());
        let (mut y0, mut y1) = fold(&mut finite.iter().map(|p| p.1));
        if finite.is_empty() {
            (x0, x1, y0, y1) = (1.0, 10.0, 0.0, 1.0);
        }
        let tx = |x: f64| if self.log_x { x.ln() } else { x };
        let (tx0, tx1) = span(tx(x0), tx(x1));
        let (ty0, ty1) = span(y0, y1);
        let pad_x = (tx1 - tx0) * 0.05;
        let pad_y = (ty1 - ty0) * 0.05;
        let (tx0, tx1, ty0, ty1) = (tx0 - pad_x, tx1 + pad_x, ty0 - pad_y, ty1 + pad_y);
        let pw = W - LEFT - RIGHT;
        let ph = H - TOP - BOTTOM;
        let px = |x: f64| LEFT + (tx(x) - tx0) / (tx1 - tx0) * pw;
        let py = |y: f64| TOP + ph - (y - ty0) / (ty1 - ty0) * ph;

        let mut s = String::new();
        let _ = writeln!(
            s,
            r#"<?xml version="1.0" encoding="UTF-8"?>
<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}" font-family="sans-serif" font-size="12">
<rect width="{W}" height="{H}" fill="white"/>
<text x="{}" y="24" text-anchor="middle" font-size="14">{}</text>"#,
            LEFT + pw / 2.0,
            escape(&self.title)
        );
        let _ = writeln!(
            s,
            r#"<rect x="{LEFT}" y="{TOP}" width="{pw}" height="{ph}" fill="none" stroke="black"/>"#
        );

        let xticks = if self.log_x {
            log_ticks(x0, x1, &xs)
        } else {
            linear_ticks(tx0, tx1)
        };
        for t in xticks {
            let x = px(t);
            let _ = writeln!(
                s,
                r#"<line x1="{x:.2}" y1="{b}" x2="{x:.2}" y2="{b2}" stroke="black"/><text x="{x:.2}" y="{ly}" text-anchor="middle">{}</text>"#,
                tick_label(t),
                b = TOP + ph,
                b2 = TOP + ph + 5.0,
                ly = TOP + ph + 18.0
            );
        }
        for t in linear_ticks(ty0, ty1) {
            let y = py(t);
            let _ = writeln!(
                s,
                r#"<line x1="{l2}" y1="{y:.2}" x2="{LEFT}" y2="{y:.2}" stroke="black"/><text x="{lx}" y="{ty:.2}" text-anchor="end">{}</text>"#,
                tick_label(t),
                l2 = LEFT - 5.0,
                lx = LEFT - 8.0,
                ty = y + 4.0
            );
        }
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#,
            LEFT + pw / 2.0,
            H - 16.0,
            escape(&self.x_label)
        );
        let _ = writeln!(
            s,
            r#"<text x="18" y="{cy}" text-anchor="middle" transform="rotate(-90 18 {cy})">{}</text>"#,
            escape(&self.y_label),
            cy = TOP + ph / 2.0
        );

        for (i, series) in self.series.iter().enumerate() {
            let c = series.color;
            let _ = writeln!(
                s,
                r#"<g class="series" id="series-{i}" data-name="{}">"#,
                escape(&series.name)
            );
            let visible = series
                .points
                .iter()
                .filter(|(x, y)| x.is_finite() && y.is_finite() && (!self.log_x || *x > 0.0));
            match series.marker {
                Marker::Line => {
                    let path: Vec<String> = visible
                        .map(|&(x, y)| format!("{:.2},{:.2}", px(x), py(y)))
                        .collect();
                    let _ = writeln!(
                        s,
                        r#"<polyline fill="none" stroke="{c}" stroke-width="2" points="{}"/>"#,
                        path.join(" ")
                    );
                }
                Marker::Circle => {
                    for &(x, y) in visible {
                        let _ = writeln!(
                            s,
                            r#"<circle cx="{:.2}" cy="{:.2}" r="3" fill="none" stroke="{c}"/>"#,
                            px(x),
                            py(y)
                        );
                    }
                }
                Marker::Triangle => {
                    for &(x, y) in visible {
                        let (cx, cy) = (px(x), py(y));
                        let _ = writeln!(
                            s,
                            r#"<polygon points="{:.2},{:.2} {:.2},{:.2} {:.2},{:.2}" fill="{c}"/>"#,
                            cx,
                            cy - 4.0,
                            cx - 3.5,
                            cy + 3.0,
                            cx + 3.5,
                            cy + 3.0
                        );
                    }
                }
            }
            s.push_str("</g>\n");

            let ly = TOP + 14.0 + 20.0 * i as f64;
            let lx = W - RIGHT + 16.0;
            let swatch = match series.marker {
                Marker::Circle => {
                    format!(r#"<circle cx="{lx}" cy="{ly}" r="3" fill="none" stroke="{c}"/>"#)
                }
                Marker::Triangle => format!(
                    r#"<polygon points="{lx},{} {},{} {},{}" fill="{c}"/>"#,
                    ly - 4.0,
                    lx - 3.5,
                    ly + 3.0,
                    lx + 3.5,
                    ly + 3.0
                ),
                Marker::Line => format!(
                    r#"<line x1="{}" y1="{ly}" x2="{}" y2="{ly}" stroke="{c}" stroke-width="2"/>"#,
                    lx - 8.0,
                    lx + 8.0
                ),
            };
            let _ = writeln!(
                s,
                r#"{swatch}<text x="{}" y="{}">{}</text>"#,
                lx + 12.0,
                ly + 4.0,
                escape(&series.name)
            );
        }
        s.push_str("</svg>\n");
        s
    }
}
