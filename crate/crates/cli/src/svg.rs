//! Static SVG line plot of `Qmax` against `N`, one series per partition rule.

use std::collections::BTreeMap;
use std::fmt::Write;

use fockbell::bell::{SweepRow, CIRELSON_BOUND, LOCAL_BOUND};

const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 480.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 150.0;
const TOP: f64 = 30.0;
const BOTTOM: f64 = 55.0;
const PALETTE: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"];

struct Axis {
    lo: f64,
    hi: f64,
    log: bool,
}

impl Axis {
    fn transform(&self, v: f64) -> f64 {
        if self.log {
            v.log2()
        } else {
            v
        }
    }

    fn fraction(&self, v: f64) -> f64 {
        let (lo, hi) = (self.transform(self.lo), self.transform(self.hi));
        if hi > lo {
            (self.transform(v) - lo) / (hi - lo)
        } else {
            0.5
        }
    }

    fn ticks(&self) -> Vec<f64> {
        if self.log {
            let mut t = Vec::new();
            let mut v = 2f64.powi(self.lo.log2().floor() as i32);
            while v <= self.hi * (1.0 + 1e-9) {
                if v >= self.lo * (1.0 - 1e-9) {
                    t.push(v);
                }
                v *= 2.0;
            }
            t
        } else {
            nice_ticks(self.lo, self.hi)
        }
    }
}

fn nice_ticks(lo: f64, hi: f64) -> Vec<f64> {
    let span = (hi - lo).max(f64::EPSILON);
    let raw = span / 6.0;
    let mag = 10f64.powf(raw.log10().floor());
    let step = [1.0, 2.0, 5.0, 10.0]
        .iter()
        .map(|m| m * mag)
        .find(|s| span / s <= 7.0)
        .unwrap_or(10.0 * mag);
    let first = (lo / step).ceil() as i64;
    let last = (hi / step).floor() as i64;
    (first..=last).map(|k| k as f64 * step).collect()
}

fn label(v: f64) -> String {
    let s = format!("{v:.3}");
    s.trim_end_matches('0').trim_end_matches('.').to_string()
}

pub fn render(rows: &[SweepRow], log_x: bool) -> String {
    let mut series: BTreeMap<String, Vec<(f64, f64)>> = BTreeMap::new();
    for r in rows {
        series
            .entry(format!("P = {}", r.rule))
            .or_default()
            .push((r.n as f64, r.q_max));
    }
    for pts in series.values_mut() {
        pts.sort_by(|a, b| a.0.total_cmp(&b.0));
    }

    let n_lo = rows.iter().map(|r| r.n as f64).fold(f64::INFINITY, f64::min);
    let n_hi = rows.iter().map(|r| r.n as f64).fold(f64::NEG_INFINITY, f64::max);
    let (n_lo, n_hi) = if n_lo.is_finite() { (n_lo, n_hi) } else { (2.0, 4.0) };
    let q_lo = rows.iter().map(|r| r.q_max).fold(LOCAL_BOUND, f64::min);
    let q_hi = rows.iter().map(|r| r.q_max).fold(CIRELSON_BOUND, f64::max);
    let pad = 0.05 * (q_hi - q_lo);
    let x = Axis { lo: n_lo, hi: n_hi, log: log_x };
    let y = Axis { lo: q_lo - pad, hi: q_hi + pad, log: false };

    let plot_w = WIDTH - LEFT - RIGHT;
    let plot_h = HEIGHT - TOP - BOTTOM;
    let px = |v: f64| LEFT + x.fraction(v) * plot_w;
    let py = |v: f64| TOP + (1.0 - y.fraction(v)) * plot_h;

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<rect x="{LEFT}" y="{TOP}" width="{plot_w}" height="{plot_h}" fill="none" stroke="black"/>"#
    );

    for t in x.ticks() {
        let xp = px(t);
        let _ = writeln!(
            s,
            r#"<line x1="{xp:.2}" y1="{:.2}" x2="{xp:.2}" y2="{:.2}" stroke="black"/><text x="{xp:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
            TOP + plot_h,
            TOP + plot_h + 5.0,
            TOP + plot_h + 19.0,
            label(t)
        );
    }
    for t in y.ticks() {
        let yp = py(t);
        let _ = writeln!(
            s,
            r#"<line x1="{:.2}" y1="{yp:.2}" x2="{LEFT}" y2="{yp:.2}" stroke="black"/><text x="{:.2}" y="{:.2}" text-anchor="end">{}</text>"#,
            LEFT - 5.0,
            LEFT - 8.0,
            yp + 4.0,
            label(t)
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">N</text>"#,
        LEFT + plot_w / 2.0,
        HEIGHT - 12.0
    );
    let _ = writeln!(
        s,
        r#"<text x="18" y="{:.2}" text-anchor="middle" transform="rotate(-90 18 {:.2})">Qmax</text>"#,
        TOP + plot_h / 2.0,
        TOP + plot_h / 2.0
    );

    for (value, name) in [(LOCAL_BOUND, "Q = 2"), (CIRELSON_BOUND, "Q = 2√2")] {
        let yp = py(value);
        let _ = writeln!(
            s,
            r##"<line x1="{LEFT}" y1="{yp:.2}" x2="{:.2}" y2="{yp:.2}" stroke="#555" stroke-dasharray="6 4"/><text x="{:.2}" y="{:.2}" fill="#555">{name}</text>"##,
            LEFT + plot_w,
            LEFT + plot_w + 6.0,
            yp + 4.0
        );
    }

    for (i, (name, pts)) in series.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let path = pts
            .iter()
            .map(|&(n, q)| format!("{:.2},{:.2}", px(n), py(q)))
            .collect::<Vec<_>>()
            .join(" ");
        let _ = writeln!(
            s,
            r#"<polyline points="{path}" fill="none" stroke="{color}" stroke-width="1.5"/>"#
        );
        for &(n, q) in pts {
            let _ = writeln!(
                s,
                r#"<circle cx="{:.2}" cy="{:.2}" r="2.5" fill="{color}"/>"#,
                px(n),
                py(q)
            );
        }
        let ly = TOP + 40.0 + 18.0 * i as f64;
        let lx = LEFT + plot_w + 10.0;
        let _ = writeln!(
            s,
            r#"<line x1="{lx:.2}" y1="{ly:.2}" x2="{:.2}" y2="{ly:.2}" stroke="{color}" stroke-width="2"/><text x="{:.2}" y="{:.2}">{name}</text>"#,
            lx + 20.0,
            lx + 26.0,
            ly + 4.0
        );
    }
    s.push_str("</svg>\n");
    s
}
