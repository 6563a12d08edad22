//! SVG learning curves with shaded ±1 standard deviation bands.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use super::aggregate::AggregateRow;
use crate::surrogate::SurrogateKind;

const WIDTH: f64 = 800.0;
const HEIGHT: f64 = 500.0;
const LEFT: f64 = 80.0;
const RIGHT: f64 = 170.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 60.0;

fn color(kind: SurrogateKind) -> &'static str {
    match kind {
        SurrogateKind::Rectangular => "#1f77b4",
        SurrogateKind::Triangular => "#2ca02c",
        SurrogateKind::Trapezoidal => "#d62728",
    }
}

/// Roughly `target` round tick values covering `[lo, hi]`.
pub fn nice_ticks(lo: f64, hi: f64, target: usize) -> Vec<f64> {
    if !(hi > lo) {
        return vec![lo];
    }
    let raw = (hi - lo) / target.max(1) as f64;
    let mag = 10f64.powf(raw.log10().floor());
    let step = [1.0, 2.0, 5.0, 10.0]
        .iter()
        .map(|m| m * mag)
        .find(|s| *s >= raw)
        .unwrap_or(10.0 * mag);
    let first = (lo / step).ceil() as i64;
    let last = (hi / step).floor() as i64;
    (first..=last).map(|i| i as f64 * step).collect()
}

fn fmt_tick(x: f64) -> String {
    if x.abs() >= 1e4 && x.fract() == 0.0 {
        format!("{}k", x / 1e3)
    } else {
        let s = format!("{x:.3}");
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    }
}

pub fn render_svg(rows: &[AggregateRow]) -> String {
    let mut series: BTreeMap<SurrogateKind, Vec<&AggregateRow>> = BTreeMap::new();
    for r in rows {
        series.entry(r.surrogate).or_default().push(r);
    }
    let xs = rows.iter().map(|r| r.env_step as f64);
    let (x_lo, x_hi) = (
        xs.clone().fold(f64::INFINITY, f64::min).min(0.0),
        xs.fold(f64::NEG_INFINITY, f64::max),
    );
    let y_lo = rows.iter().map(|r| r.mean_return - r.std_return).fold(f64::INFINITY, f64::min);
    let y_hi = rows.iter().map(|r| r.mean_return + r.std_return).fold(f64::NEG_INFINITY, f64::max);
    let pad = ((y_hi - y_lo) * 0.05).max(1e-9);
    let (y_lo, y_hi) = (y_lo - pad, y_hi + pad);
    let x_hi = if x_hi > x_lo { x_hi } else { x_lo + 1.0 };

    let plot_w = WIDTH - LEFT - RIGHT;
    let plot_h = HEIGHT - TOP - BOTTOM;
    let sx = |x: f64| LEFT + (x - x_lo) / (x_hi - x_lo) * plot_w;
    let sy = |y: f64| TOP + (y_hi - y) / (y_hi - y_lo) * plot_h;

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);

    for t in nice_ticks(y_lo, y_hi, 6) {
        let y = sy(t);
        let _ = writeln!(
            s,
            r##"<line x1="{LEFT}" y1="{y:.2}" x2="{:.2}" y2="{y:.2}" stroke="#dddddd"/><text x="{:.2}" y="{:.2}" text-anchor="end">{}</text>"##,
            LEFT + plot_w,
            LEFT - 6.0,
            y + 4.0,
            fmt_tick(t)
        );
    }
    for t in nice_ticks(x_lo, x_hi, 6) {
        let x = sx(t);
        let _ = writeln!(
            s,
            r##"<line x1="{x:.2}" y1="{TOP}" x2="{x:.2}" y2="{:.2}" stroke="#eeeeee"/><text x="{x:.2}" y="{:.2}" text-anchor="middle">{}</text>"##,
            TOP + plot_h,
            TOP + plot_h + 18.0,
            fmt_tick(t)
        );
    }
    let _ = writeln!(
        s,
        r#"<rect x="{LEFT}" y="{TOP}" width="{plot_w}" height="{plot_h}" fill="none" stroke="black"/>"#
    );
    let _ = writeln!(
        s,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">environment steps</text>"#,
        LEFT + plot_w / 2.0,
        HEIGHT - 15.0
    );
    let _ = writeln!(
        s,
        r#"<text x="18" y="{:.2}" text-anchor="middle" transform="rotate(-90 18 {:.2})">evaluation return</text>"#,
        TOP + plot_h / 2.0,
        TOP + plot_h / 2.0
    );

    for (kind, pts) in &series {
        let c = color(*kind);
        let mut band = String::new();
        for p in pts.iter() {
            let _ = write!(band, "{:.2},{:.2} ", sx(p.env_step as f64), sy(p.mean_return + p.std_return));
        }
        for p in pts.iter().rev() {
            let _ = write!(band, "{:.2},{:.2} ", sx(p.env_step as f64), sy(p.mean_return - p.std_return));
        }
        let _ = writeln!(
            s,
            r#"<polygon class="band" data-surrogate="{}" points="{}" fill="{c}" fill-opacity="0.2" stroke="none"/>"#,
            kind.tag(),
            band.trim_end()
        );
        let line: Vec<String> = pts
            .iter()
            .map(|p| format!("{:.2},{:.2}", sx(p.env_step as f64), sy(p.mean_return)))
            .collect();
        let _ = writeln!(
            s,
            r#"<polyline class="mean" data-surrogate="{}" points="{}" fill="none" stroke="{c}" stroke-width="2"/>"#,
            kind.tag(),
            line.join(" ")
        );
    }

    let lx = WIDTH - RIGHT + 15.0;
    for (i, (kind, pts)) in series.iter().enumerate() {
        let y = TOP + 10.0 + 20.0 * i as f64;
        let n = pts.first().map_or(0, |p| p.n_seeds);
        let _ = writeln!(
            s,
            r#"<line x1="{lx}" y1="{y}" x2="{:.2}" y2="{y}" stroke="{}" stroke-width="2"/><text x="{:.2}" y="{:.2}">{} (n={n})</text>"#,
            lx + 20.0,
            color(*kind),
            lx + 26.0,
            y + 4.0,
            kind.tag()
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="{lx}" y="{:.2}" font-size="11">shaded: ±1 std</text><text x="{lx}" y="{:.2}" font-size="11">(population, across seeds)</text>"#,
        TOP + 20.0 * series.len() as f64 + 20.0,
        TOP + 20.0 * series.len() as f64 + 34.0
    );
    s.push_str("</svg>\n");
    s
}
