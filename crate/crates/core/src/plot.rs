//! Minimal SVG output: tessellations coloured by cell area and step-function
//! plots (thin realisations, thick averages, dashed reference).

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::geometry::Tessellation;
use crate::numeric::{quantile_sorted, ExtReal};
use crate::process::GeneratorSet;
use crate::stepfn::StepCdf;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CurveStyle {
    Realization,
    Average,
    Reference,
}

impl CurveStyle {
    fn attrs(self) -> &'static str {
        match self {
            CurveStyle::Realization => r##"class="realization" stroke="#3b6fd8" stroke-width="0.8" stroke-opacity="0.6""##,
            CurveStyle::Average => r##"class="average" stroke="#000000" stroke-width="2.2""##,
            CurveStyle::Reference => r##"class="reference" stroke="#d83b3b" stroke-width="1.6" stroke-dasharray="6 4""##,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum CurveData {
    Step(StepCdf),
    /// Sampled `(z, value)` pairs; infinite values are clipped and marked.
    Points(Vec<(f64, ExtReal)>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Curve {
    pub label: String,
    pub data: CurveData,
    pub style: CurveStyle,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlotSpec {
    pub curves: Vec<Curve>,
    pub x_range: Option<(f64, f64)>,
    pub y_range: Option<(f64, f64)>,
    pub width: f64,
    pub height: f64,
}

impl PlotSpec {
    pub fn new(curves: Vec<Curve>) -> Self {
        Self {
            curves,
            x_range: None,
            y_range: None,
            width: 640.0,
            height: 420.0,
        }
    }
}

const MARGIN: f64 = 48.0;

fn data_extent(spec: &PlotSpec) -> ((f64, f64), (f64, f64)) {
    let mut xmax: f64 = 0.0;
    let mut ymax: f64 = 0.0;
    for c in &spec.curves {
        match &c.data {
            CurveData::Step(f) => {
                xmax = xmax.max(f.locations().last().copied().unwrap_or(0.0));
                ymax = ymax.max(f.terminal());
            }
            CurveData::Points(p) => {
                for (z, v) in p {
                    xmax = xmax.max(*z);
                    if let ExtReal::Finite(v) = v {
                        ymax = ymax.max(*v);
                    }
                }
            }
        }
    }
    let x = spec.x_range.unwrap_or((0.0, if xmax > 0.0 { 1.05 * xmax } else { 1.0 }));
    let y = spec.y_range.unwrap_or((0.0, if ymax > 0.0 { 1.05 * ymax } else { 1.0 }));
    (x, y)
}

/// Renders the plot; each curve is exactly one `<path>` element.
pub fn render_plot(spec: &PlotSpec) -> Result<String> {
    if spec.curves.is_empty() {
        return Err(Error::invalid("a plot needs at least one curve"));
    }
    if !(spec.width > 2.0 * MARGIN && spec.height > 2.0 * MARGIN) {
        return Err(Error::invalid("canvas too small"));
    }
    let ((x0, x1), (y0, y1)) = data_extent(spec);
    let (pw, ph) = (spec.width - 2.0 * MARGIN, spec.height - 2.0 * MARGIN);
    let sx = |x: f64| MARGIN + (x - x0) / (x1 - x0) * pw;
    let sy = |y: f64| MARGIN + ph - (y.clamp(y0, y1) - y0) / (y1 - y0) * ph;

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}">"#,
        w = spec.width,
        h = spec.height
    );
    let _ = writeln!(s, r##"<rect x="0" y="0" width="{}" height="{}" fill="#ffffff"/>"##, spec.width, spec.height);
    // axes and ticks
    let _ = writeln!(
        s,
        r##"<line x1="{a}" y1="{b}" x2="{c}" y2="{b}" stroke="#444"/><line x1="{a}" y1="{b}" x2="{a}" y2="{d}" stroke="#444"/>"##,
        a = MARGIN,
        b = MARGIN + ph,
        c = MARGIN + pw,
        d = MARGIN
    );
    for i in 0..=5 {
        let t = i as f64 / 5.0;
        let (xv, yv) = (x0 + t * (x1 - x0), y0 + t * (y1 - y0));
        let _ = writeln!(
            s,
            r##"<text x="{}" y="{}" font-size="10" text-anchor="middle">{}</text><text x="{}" y="{}" font-size="10" text-anchor="end">{}</text>"##,
            sx(xv),
            MARGIN + ph + 14.0,
            tick(xv),
            MARGIN - 4.0,
            sy(yv) + 3.0,
            tick(yv)
        );
    }
    let mut markers = String::new();
    for c in &spec.curves {
        let mut d = String::new();
        match &c.data {
            CurveData::Step(f) => {
                let _ = write!(d, "M{:.3},{:.3}", sx(x0), sy(f.eval(x0)));
                let mut level = f.eval(x0);
                for (h, v) in f.points().filter(|&(h, _)| h > x0 && h <= x1) {
                    let _ = write!(d, " H{:.3} V{:.3}", sx(h), sy(v));
                    level = v;
                }
                let _ = write!(d, " H{:.3}", sx(x1));
                let _ = level;
            }
            CurveData::Points(p) => {
                let mut first = true;
                for (z, v) in p.iter().filter(|(z, _)| *z >= x0 && *z <= x1) {
                    let y = match v {
                        ExtReal::Finite(v) if *v <= y1 => *v,
                        _ => {
                            let _ = writeln!(
                                markers,
                                r##"<circle class="clipped" cx="{:.3}" cy="{:.3}" r="2.5" fill="#d83b3b"/>"##,
                                sx(*z),
                                sy(y1)
                            );
                            y1
                        }
                    };
                    let _ = write!(d, "{}{:.3},{:.3}", if first { "M" } else { " L" }, sx(*z), sy(y));
                    first = false;
                }
            }
        }
        let _ = writeln!(
            s,
            r#"<path {} fill="none" d="{}"><title>{}</title></path>"#,
            c.style.attrs(),
            d,
            escape(&c.label)
        );
    }
    s.push_str(&markers);
    s.push_str("</svg>\n");
    Ok(s)
}

fn tick(v: f64) -> String {
    let r = (v * 100.0).round() / 100.0;
    format!("{r}")
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Colour ramp from pale yellow to dark blue.
fn ramp(t: f64) -> String {
    let t = t.clamp(0.0, 1.0);
    let lerp = |a: f64, b: f64| (a + (b - a) * t).round() as u8;
    format!("#{:02x}{:02x}{:02x}", lerp(255.0, 24.0), lerp(237.0, 58.0), lerp(160.0, 140.0))
}

/// Renders the nonempty cells, filled by area quantile, optionally with a
/// circle at each generator whose radius is proportional to its weight.
pub fn render_tessellation(tess: &Tessellation, gens: Option<&GeneratorSet>, width: f64) -> String {
    let clip = tess.clip;
    let scale = width / clip.width();
    let height = clip.height() * scale;
    let tx = |x: f64| (x - clip.min[0]) * scale;
    let ty = |y: f64| (clip.max[1] - y) * scale;

    let mut areas: Vec<f64> = tess.nonempty().map(|c| c.area).collect();
    areas.sort_by(f64::total_cmp);

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width:.1}" height="{height:.1}" viewBox="0 0 {width:.3} {height:.3}">"#
    );
    for c in tess.nonempty() {
        let rank = areas.partition_point(|&a| a < c.area) as f64 / (areas.len().max(2) - 1) as f64;
        let mut d = String::new();
        for (i, v) in c.polygon.iter().enumerate() {
            let _ = write!(d, "{}{:.3},{:.3}", if i == 0 { "M" } else { " L" }, tx(v[0]), ty(v[1]));
        }
        d.push_str(" Z");
        let _ = writeln!(
            s,
            r##"<path class="cell" data-index="{}" fill="{}" stroke="#202020" stroke-width="0.4" d="{}"/>"##,
            c.index,
            ramp(rank),
            d
        );
    }
    if let Some(g) = gens {
        let hmax = g.points.iter().map(|p| p.h).fold(0.0, f64::max);
        let rmax = 0.02 * width;
        for p in &g.points {
            if !clip.contains([p.x[0], p.x[1]]) {
                continue;
            }
            let r = if hmax > 0.0 { rmax * p.h / hmax } else { 0.0 };
            let _ = writeln!(
                s,
                r##"<circle class="generator" cx="{:.3}" cy="{:.3}" r="{:.3}" fill="none" stroke="#b02020" stroke-width="0.5"/>"##,
                tx(p.x[0]),
                ty(p.x[1]),
                r
            );
        }
    }
    s.push_str("</svg>\n");
    s
}

/// Evenly spaced quantiles of cell areas, handy for legends.
pub fn area_quantiles(tess: &Tessellation, k: usize) -> Vec<f64> {
    let mut areas: Vec<f64> = tess.nonempty().map(|c| c.area).collect();
    if areas.is_empty() {
        return Vec::new();
    }
    areas.sort_by(f64::total_cmp);
    (0..=k).map(|i| quantile_sorted(&areas, i as f64 / k as f64)).collect()
}
