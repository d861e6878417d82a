//! Side-by-side profiles of a kink and its partner as CSV and SVG.

use std::fmt::Write as _;

use crate::error::Result;
use crate::pipeline::PresetRun;

pub const FIGURE_POINTS: usize = 1001;
pub const FIGURE_WIDTHS: f64 = 10.0;

const VIEW_W: f64 = 800.0;
const VIEW_H: f64 = 500.0;
const MARGIN_L: f64 = 70.0;
const MARGIN_R: f64 = 30.0;
const MARGIN_T: f64 = 30.0;
const MARGIN_B: f64 = 60.0;

#[derive(Debug, Clone, PartialEq)]
pub struct FigureData {
    pub title: String,
    pub xi: Vec<f64>,
    pub original: Vec<f64>,
    /// Magnitude of the partner kink.
    pub susy: Vec<f64>,
}

impl FigureData {
    /// Samples both kinks over `ξ0 ± 10` widths of the wider one. The partner
    /// curve is its magnitude profile, so reflected and formal partners are
    /// drawn on the same side as the original.
    pub fn from_run(run: &PresetRun) -> Result<Self> {
        let partner = run.partner_kink.magnitude();
        let half = FIGURE_WIDTHS * run.kink.natural_width().max(partner.natural_width());
        let centre = run.kink.shift;
        let n = FIGURE_POINTS;
        let mut data = FigureData {
            title: format!("{}: kink and partner kink, gamma = {:.6}", run.preset, run.pair.gamma),
            xi: Vec::with_capacity(n),
            original: Vec::with_capacity(n),
            susy: Vec::with_capacity(n),
        };
        for i in 0..n {
            let xi = centre - half + 2.0 * half * i as f64 / (n - 1) as f64;
            data.xi.push(xi);
            data.original.push(run.kink.value(xi)?);
            data.susy.push(partner.value(xi)?);
        }
        Ok(data)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("xi,u_original,u_susy\n");
        for i in 0..self.xi.len() {
            writeln!(out, "{:.16e},{:.16e},{:.16e}", self.xi[i], self.original[i], self.susy[i])
                .expect("write to String");
        }
        out
    }

    pub fn to_svg(&self) -> String {
        let (x0, x1) = (self.xi[0], *self.xi.last().expect("non-empty"));
        let (mut y0, mut y1) = self
            .original
            .iter()
            .chain(&self.susy)
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
        if y1 - y0 < 1e-12 {
            y1 = y0 + 1.0;
        }
        let pad = 0.05 * (y1 - y0);
        y0 -= pad;
        y1 += pad;

        let plot_w = VIEW_W - MARGIN_L - MARGIN_R;
        let plot_h = VIEW_H - MARGIN_T - MARGIN_B;
        let sx = |x: f64| MARGIN_L + (x - x0) / (x1 - x0) * plot_w;
        let sy = |y: f64| MARGIN_T + (1.0 - (y - y0) / (y1 - y0)) * plot_h;

        let mut s = String::new();
        let w = &mut s;
        writeln!(
            w,
            r#"<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 {VIEW_W} {VIEW_H}" width="{VIEW_W}" height="{VIEW_H}" font-family="sans-serif" font-size="12">"#
        )
        .unwrap();
        writeln!(w, r#"<rect x="0" y="0" width="{VIEW_W}" height="{VIEW_H}" fill="white"/>"#).unwrap();
        writeln!(
            w,
            r#"<text x="{:.2}" y="18" text-anchor="middle">{}</text>"#,
            VIEW_W / 2.0,
            escape(&self.title)
        )
        .unwrap();

        // axes
        let (bx, by) = (MARGIN_L, MARGIN_T + plot_h);
        writeln!(
            w,
            r#"<path d="M{bx:.2} {MARGIN_T:.2} L{bx:.2} {by:.2} L{:.2} {by:.2}" fill="none" stroke="black"/>"#,
            MARGIN_L + plot_w
        )
        .unwrap();
        for t in ticks(x0, x1, 8) {
            let px = sx(t);
            writeln!(w, r#"<line x1="{px:.2}" y1="{by:.2}" x2="{px:.2}" y2="{:.2}" stroke="black"/>"#, by + 5.0).unwrap();
            writeln!(w, r#"<text x="{px:.2}" y="{:.2}" text-anchor="middle">{}</text>"#, by + 20.0, label(t)).unwrap();
        }
        for t in ticks(y0, y1, 6) {
            let py = sy(t);
            writeln!(w, r#"<line x1="{:.2}" y1="{py:.2}" x2="{bx:.2}" y2="{py:.2}" stroke="black"/>"#, bx - 5.0).unwrap();
            writeln!(w, r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{}</text>"#, bx - 8.0, py + 4.0, label(t)).unwrap();
        }
        writeln!(w, r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">xi</text>"#, MARGIN_L + plot_w / 2.0, VIEW_H - 15.0).unwrap();
        writeln!(w, r#"<text x="18" y="{:.2}" text-anchor="middle" transform="rotate(-90 18 {:.2})">u</text>"#, MARGIN_T + plot_h / 2.0, MARGIN_T + plot_h / 2.0).unwrap();

        for (ys, colour, name, dy) in [
            (&self.original, "#1f77b4", "original kink", 0.0),
            (&self.susy, "#d62728", "partner kink", 18.0),
        ] {
            let mut pts = String::new();
            for (x, y) in self.xi.iter().zip(ys.iter()) {
                write!(pts, "{:.2},{:.2} ", sx(*x), sy(*y)).unwrap();
            }
            writeln!(w, r#"<polyline fill="none" stroke="{colour}" stroke-width="2" points="{}"/>"#, pts.trim_end()).unwrap();
            let ly = MARGIN_T + 15.0 + dy;
            let lx = VIEW_W - MARGIN_R - 150.0;
            writeln!(w, r#"<line x1="{lx:.2}" y1="{ly:.2}" x2="{:.2}" y2="{ly:.2}" stroke="{colour}" stroke-width="2"/>"#, lx + 25.0).unwrap();
            writeln!(w, r#"<text x="{:.2}" y="{:.2}">{name}</text>"#, lx + 32.0, ly + 4.0).unwrap();
        }
        s.push_str("</svg>\n");
        s
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Round tick positions covering `[lo, hi]` with roughly `target` ticks.
fn ticks(lo: f64, hi: f64, target: usize) -> Vec<f64> {
    let raw = (hi - lo) / target as f64;
    let mag = 10f64.powf(raw.log10().floor());
    let step = [1.0, 2.0, 5.0, 10.0]
        .into_iter()
        .map(|k| k * mag)
        .find(|s| *s >= raw)
        .unwrap_or(10.0 * mag);
    let first = (lo / step).ceil() as i64;
    let last = (hi / step).floor() as i64;
    (first..=last).map(|k| k as f64 * step).collect()
}

fn label(v: f64) -> String {
    let v = if v.abs() < 1e-12 { 0.0 } else { v };
    let s = format!("{v:.3}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    s.to_string()
}
