//! Static SVG figures of planar frequency sets and piecewise wavelets.

use std::fmt::Write;

use crate::error::{Error, Result};
use crate::freqset::FrequencySet;
use crate::rational;
use crate::wavelet::{ExactValue, PiecewiseWavelet};

/// Longer side of the drawing area in pixels.
const CANVAS: f64 = 480.0;
const MARGIN: f64 = 24.0;
const LEGEND_ROW: f64 = 18.0;
const PALETTE: [&str; 8] = ["#4e79a7", "#e15759", "#59a14f", "#f28e2b", "#b07aa1", "#76b7b2", "#edc948", "#9c755f"];

/// Axis-aligned window in 2π-units.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Viewport {
    pub x: (f64, f64),
    pub y: (f64, f64),
}

impl Viewport {
    /// The bounding box of `s` padded by 5%, or `[-1, 1]^2` when `s` is empty.
    pub fn fit(s: &FrequencySet) -> Self {
        let Some((lo, hi)) = s.bounding_box() else {
            return Viewport { x: (-1.0, 1.0), y: (-1.0, 1.0) };
        };
        let lo: Vec<f64> = lo.iter().map(rational::to_f64).collect();
        let hi: Vec<f64> = hi.iter().map(rational::to_f64).collect();
        let pad = 0.05 * (hi[0] - lo[0]).max(hi[1] - lo[1]);
        Viewport { x: (lo[0] - pad, hi[0] + pad), y: (lo[1] - pad, hi[1] + pad) }
    }

    fn size(&self) -> (f64, f64) {
        let (w, h) = (self.x.1 - self.x.0, self.y.1 - self.y.0);
        let s = CANVAS / w.max(h);
        (w * s, h * s)
    }

    fn px(&self, p: (f64, f64)) -> (f64, f64) {
        let (w, h) = self.size();
        (MARGIN + (p.0 - self.x.0) / (self.x.1 - self.x.0) * w, MARGIN + (self.y.1 - p.1) / (self.y.1 - self.y.0) * h)
    }
}

/// Every piece of `s` as one filled polygon.
pub fn render_set(s: &FrequencySet, viewport: Option<Viewport>) -> Result<String> {
    check_planar(s)?;
    let vp = viewport.unwrap_or_else(|| Viewport::fit(s));
    let fills = vec![0; s.len()];
    Ok(draw(s, &fills, &[], &vp))
}

/// Pieces coloured by value, with one legend row per distinct value.
pub fn render_wavelet(w: &PiecewiseWavelet, viewport: Option<Viewport>) -> Result<String> {
    let s = w.support();
    check_planar(s)?;
    let vp = viewport.unwrap_or_else(|| Viewport::fit(s));
    let mut legend: Vec<&ExactValue> = Vec::new();
    let fills: Vec<usize> = w
        .values()
        .iter()
        .map(|v| match legend.iter().position(|u| *u == v) {
            Some(i) => i,
            None => {
                legend.push(v);
                legend.len() - 1
            }
        })
        .collect();
    let labels: Vec<String> = legend.iter().map(|v| value_label(v)).collect();
    Ok(draw(s, &fills, &labels, &vp))
}

fn check_planar(s: &FrequencySet) -> Result<()> {
    if s.n() != 2 {
        return Err(Error::DimensionMismatch { expected: 2, found: s.n() });
    }
    Ok(())
}

fn value_label(v: &ExactValue) -> String {
    let m = if rational::is_integer(v.m()) { v.m().numer().to_string() } else { rational::format(v.m()) };
    if v.e() == 1 {
        format!("{m}·√2")
    } else {
        m
    }
}

/// Vertices of a convex polygon in counter-clockwise order.
fn polygon(vertices: &[Vec<rational::Rational>]) -> Vec<(f64, f64)> {
    let mut pts: Vec<(f64, f64)> =
        vertices.iter().map(|v| (rational::to_f64(&v[0]), rational::to_f64(&v[1]))).collect();
    let c = pts.iter().fold((0.0, 0.0), |a, p| (a.0 + p.0, a.1 + p.1));
    let c = (c.0 / pts.len() as f64, c.1 / pts.len() as f64);
    pts.sort_by(|a, b| (a.1 - c.1).atan2(a.0 - c.0).total_cmp(&(b.1 - c.1).atan2(b.0 - c.0)));
    pts
}

fn draw(s: &FrequencySet, fills: &[usize], legend: &[String], vp: &Viewport) -> String {
    let (w, h) = vp.size();
    let total_w = w + 2.0 * MARGIN;
    let total_h = h + 2.0 * MARGIN + legend.len() as f64 * LEGEND_ROW;
    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{total_w:.0}" height="{total_h:.0}" viewBox="0 0 {total_w:.2} {total_h:.2}">"#
    );
    let _ = writeln!(out, r#"<rect x="0" y="0" width="{total_w:.2}" height="{total_h:.2}" fill="white"/>"#);
    let axes = [((vp.x.0, 0.0), (vp.x.1, 0.0)), ((0.0, vp.y.0), (0.0, vp.y.1))];
    for (a, b) in axes {
        let (a, b) = (vp.px(a), vp.px(b));
        let _ = writeln!(
            out,
            r##"<line x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="#bbbbbb" stroke-width="1"/>"##,
            a.0, a.1, b.0, b.1
        );
    }
    for (piece, &fill) in s.pieces().iter().zip(fills) {
        let pts: Vec<String> = polygon(piece.vertices())
            .into_iter()
            .map(|p| {
                let q = vp.px(p);
                format!("{:.2},{:.2}", q.0, q.1)
            })
            .collect();
        let _ = writeln!(
            out,
            r##"<polygon points="{}" fill="{}" fill-opacity="0.8" stroke="#222222" stroke-width="0.5"/>"##,
            pts.join(" "),
            PALETTE[fill % PALETTE.len()]
        );
    }
    for (i, label) in legend.iter().enumerate() {
        let y = h + 2.0 * MARGIN + i as f64 * LEGEND_ROW;
        let _ = writeln!(
            out,
            r##"<rect x="{MARGIN:.2}" y="{:.2}" width="12" height="12" fill="{}"/><text x="{:.2}" y="{:.2}" font-family="sans-serif" font-size="12">{label}</text>"##,
            y - 10.0,
            PALETTE[i % PALETTE.len()],
            MARGIN + 18.0,
            y
        );
    }
    out.push_str("</svg>\n");
    out
}
