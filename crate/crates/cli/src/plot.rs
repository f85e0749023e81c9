//! Nyquist data as CSV and as a static SVG polyline with optional
//! reference circles.

use std::fmt::Write as _;

use hyperreal::rational::Realization;
use hyperreal::sets::EtaParam;
use num_complex::Complex64;

pub struct NyquistData {
    pub omega: Vec<f64>,
    pub values: Vec<Complex64>,
}

/// Entry `(0, 0)` of `F(iω)` on `±` a log grid of `points` frequencies in
/// `[lo, hi]`, ordered by increasing `ω`.
pub fn nyquist(r: &Realization, lo: f64, hi: f64, points: usize) -> NyquistData {
    let points = points.max(2);
    let grid: Vec<f64> = (0..points)
        .map(|i| lo * (hi / lo).powf(i as f64 / (points - 1) as f64))
        .collect();
    let omega: Vec<f64> = grid.iter().rev().map(|w| -w).chain(grid.iter().copied()).collect();
    let mut data = NyquistData {
        omega: Vec::with_capacity(omega.len()),
        values: Vec::with_capacity(omega.len()),
    };
    for w in omega {
        if let Ok(v) = r.eval_freq(w) {
            data.omega.push(w);
            data.values.push(v[(0, 0)]);
        }
    }
    data
}

pub fn to_csv(data: &NyquistData) -> String {
    let mut out = String::from("omega,re,im\n");
    for (w, z) in data.omega.iter().zip(&data.values) {
        let _ = writeln!(out, "{w:e},{:e},{:e}", z.re, z.im);
    }
    out
}

struct Circle {
    center: f64,
    radius: f64,
    color: &'static str,
}

/// Curve plus, for finite `η`, the disk `|z − η| ≤ √(η²−1)` and the circle
/// `|z| = √((η−1)/(η+1))`.
pub fn to_svg(data: &NyquistData, eta: Option<EtaParam>) -> String {
    let mut circles = Vec::new();
    if let Some(EtaParam::Finite(e)) = eta {
        circles.push(Circle {
            center: e,
            radius: (e * e - 1.0).sqrt(),
            color: "red",
        });
        circles.push(Circle {
            center: 0.0,
            radius: ((e - 1.0) / (e + 1.0)).sqrt(),
            color: "green",
        });
    }
    let finite = data.values.iter().filter(|z| z.re.is_finite() && z.im.is_finite());
    let (mut x0, mut x1, mut y0, mut y1) = (-1.0f64, 1.0f64, -1.0f64, 1.0f64);
    for z in finite.clone() {
        x0 = x0.min(z.re);
        x1 = x1.max(z.re);
        y0 = y0.min(z.im);
        y1 = y1.max(z.im);
    }
    for c in &circles {
        x0 = x0.min(c.center - c.radius);
        x1 = x1.max(c.center + c.radius);
        y0 = y0.min(-c.radius);
        y1 = y1.max(c.radius);
    }
    let size = 480.0;
    let pad = 20.0;
    let span = (x1 - x0).max(y1 - y0).max(1e-12);
    let scale = (size - 2.0 * pad) / span;
    let px = |x: f64| pad + (x - x0) * scale;
    let py = |y: f64| size - pad - (y - y0) * scale;
    let mut out = String::new();
    let _ = writeln!(out, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{size}" viewBox="0 0 {size} {size}">"#);
    let _ = writeln!(out, r#"<line x1="{:.3}" y1="{:.3}" x2="{:.3}" y2="{:.3}" stroke="gray"/>"#, px(x0), py(0.0), px(x1), py(0.0));
    let _ = writeln!(out, r#"<line x1="{:.3}" y1="{:.3}" x2="{:.3}" y2="{:.3}" stroke="gray"/>"#, px(0.0), py(y0), px(0.0), py(y1));
    for c in &circles {
        let _ = writeln!(
            out,
            r#"<circle cx="{:.3}" cy="{:.3}" r="{:.3}" fill="none" stroke="{}"/>"#,
            px(c.center),
            py(0.0),
            c.radius * scale,
            c.color
        );
    }
    let pts: Vec<String> = finite.map(|z| format!("{:.3},{:.3}", px(z.re), py(z.im))).collect();
    let _ = writeln!(out, r#"<polyline points="{}" fill="none" stroke="blue"/>"#, pts.join(" "));
    out.push_str("</svg>\n");
    out
}
