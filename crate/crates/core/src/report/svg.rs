//! Deterministic SVG phase portraits.

use std::fmt::Write as _;
use std::path::Path;

use num_complex::Complex;

use super::{AnalysisError, AnalysisReport};
use crate::classify::TracedOrbit;
use crate::flow::Orbit;

const SIZE: f64 = 800.0;
const MARGIN: f64 = 50.0;
const MAX_POINTS: usize = 2000;
const TICKS: usize = 5;

struct Frame {
    lo: Complex<f64>,
    hi: Complex<f64>,
    scale: f64,
}

impl Frame {
    fn new(report: &AnalysisReport) -> Self {
        let lo = Complex::new(report.region.lo[0], report.region.lo[1]);
        let hi = Complex::new(report.region.hi[0], report.region.hi[1]);
        let span = (hi.re - lo.re).max(hi.im - lo.im);
        Self {
            lo,
            hi,
            scale: (SIZE - 2.0 * MARGIN) / span,
        }
    }

    fn width(&self) -> f64 {
        (self.hi.re - self.lo.re) * self.scale + 2.0 * MARGIN
    }

    fn height(&self) -> f64 {
        (self.hi.im - self.lo.im) * self.scale + 2.0 * MARGIN
    }

    /// Screen coordinates with the imaginary axis pointing up, clipped to
    /// twice the box.
    fn map(&self, z: Complex<f64>) -> (f64, f64) {
        let (w, h) = (self.hi.re - self.lo.re, self.hi.im - self.lo.im);
        let x = z.re.clamp(self.lo.re - 0.5 * w, self.hi.re + 0.5 * w);
        let y = z.im.clamp(self.lo.im - 0.5 * h, self.hi.im + 0.5 * h);
        (
            MARGIN + (x - self.lo.re) * self.scale,
            MARGIN + (self.hi.im - y) * self.scale,
        )
    }
}

fn decimate(points: &[Complex<f64>]) -> Vec<Complex<f64>> {
    if points.len() <= MAX_POINTS {
        return points.to_vec();
    }
    let stride = points.len().div_ceil(MAX_POINTS - 1);
    let mut out: Vec<Complex<f64>> = points.iter().step_by(stride).copied().collect();
    if out.last() != points.last() {
        out.push(*points.last().unwrap());
    }
    out
}

/// Point and unit tangent at fraction `s` of the arc length.
fn at_arc_fraction(points: &[Complex<f64>], s: f64) -> Option<(Complex<f64>, Complex<f64>)> {
    let lengths: Vec<f64> = points.windows(2).map(|w| (w[1] - w[0]).norm()).collect();
    let total: f64 = lengths.iter().sum();
    if !(total > 0.0) {
        return None;
    }
    let mut target = s * total;
    for (i, len) in lengths.iter().enumerate() {
        if target <= *len && *len > 0.0 {
            let d = points[i + 1] - points[i];
            return Some((points[i] + d * (target / len), d / len));
        }
        target -= len;
    }
    None
}

fn write_orbit(out: &mut String, frame: &Frame, orbit: &Orbit<f64>, color: &str) {
    // time increases toward the end for forward halves and toward the seed for backward ones
    let mut points = decimate(&orbit.points);
    if orbit.direction == crate::flow::Direction::Backward {
        points.reverse();
    }
    if points.len() < 2 {
        return;
    }
    let coords: Vec<String> = points
        .iter()
        .map(|z| {
            let (x, y) = frame.map(*z);
            format!("{x:.3},{y:.3}")
        })
        .collect();
    let _ = writeln!(
        out,
        r#"<polyline fill="none" stroke="{color}" stroke-width="1" points="{}"/>"#,
        coords.join(" ")
    );
    for s in [1.0 / 3.0, 2.0 / 3.0] {
        let Some((p, t)) = at_arc_fraction(&points, s) else { continue };
        let (x, y) = frame.map(p);
        // screen tangent has the imaginary part flipped
        let (tx, ty) = (t.re, -t.im);
        let (nx, ny) = (-ty, tx);
        let len = 7.0;
        let tip = (x + tx * len * 0.5, y + ty * len * 0.5);
        let base = (x - tx * len * 0.5, y - ty * len * 0.5);
        let left = (base.0 + nx * len * 0.4, base.1 + ny * len * 0.4);
        let right = (base.0 - nx * len * 0.4, base.1 - ny * len * 0.4);
        let _ = writeln!(
            out,
            r#"<polygon fill="{color}" points="{:.3},{:.3} {:.3},{:.3} {:.3},{:.3}"/>"#,
            tip.0, tip.1, left.0, left.1, right.0, right.1
        );
    }
}

fn write_axes(out: &mut String, frame: &Frame) {
    let (x0, y1) = frame.map(frame.lo);
    let (x1, y0) = frame.map(frame.hi);
    let _ = writeln!(
        out,
        r##"<rect x="{x0:.3}" y="{y0:.3}" width="{:.3}" height="{:.3}" fill="none" stroke="#444" stroke-width="1"/>"##,
        x1 - x0,
        y1 - y0
    );
    if frame.lo.im < 0.0 && frame.hi.im > 0.0 {
        let (_, y) = frame.map(Complex::new(0.0, 0.0));
        let _ = writeln!(
            out,
            r##"<line x1="{x0:.3}" y1="{y:.3}" x2="{x1:.3}" y2="{y:.3}" stroke="#bbb" stroke-width="0.8"/>"##
        );
    }
    if frame.lo.re < 0.0 && frame.hi.re > 0.0 {
        let (x, _) = frame.map(Complex::new(0.0, 0.0));
        let _ = writeln!(
            out,
            r##"<line x1="{x:.3}" y1="{y0:.3}" x2="{x:.3}" y2="{y1:.3}" stroke="#bbb" stroke-width="0.8"/>"##
        );
    }
    for k in 0..TICKS {
        let s = k as f64 / (TICKS - 1) as f64;
        let re = frame.lo.re + s * (frame.hi.re - frame.lo.re);
        let im = frame.lo.im + s * (frame.hi.im - frame.lo.im);
        let (x, _) = frame.map(Complex::new(re, frame.lo.im));
        let (_, y) = frame.map(Complex::new(frame.lo.re, im));
        let _ = writeln!(
            out,
            r##"<line x1="{x:.3}" y1="{y1:.3}" x2="{x:.3}" y2="{:.3}" stroke="#444"/><text x="{x:.3}" y="{:.3}" font-size="11" text-anchor="middle">{re:.3}</text>"##,
            y1 + 5.0,
            y1 + 18.0
        );
        let _ = writeln!(
            out,
            r##"<line x1="{x0:.3}" y1="{y:.3}" x2="{:.3}" y2="{y:.3}" stroke="#444"/><text x="{:.3}" y="{:.3}" font-size="11" text-anchor="end">{im:.3}</text>"##,
            x0 - 5.0,
            x0 - 8.0,
            y + 4.0
        );
    }
}

fn write_equilibria(out: &mut String, frame: &Frame, report: &AnalysisReport) {
    let diag = (frame.hi - frame.lo).norm();
    for e in &report.equilibria {
        let a = Complex::new(e.location[0], e.location[1]);
        let (x, y) = frame.map(a);
        for d in &e.directions {
            let tip = a + Complex::from_polar(0.1 * diag, d.theta);
            let (tx, ty) = frame.map(tip);
            let color = if d.time_sign == "forward" { "#1f5fbf" } else { "#c0392b" };
            let _ = writeln!(
                out,
                r#"<line x1="{x:.3}" y1="{y:.3}" x2="{tx:.3}" y2="{ty:.3}" stroke="{color}" stroke-width="1.5"/>"#
            );
        }
        let r = 2.5 + 1.5 * e.order as f64;
        let _ = writeln!(
            out,
            r##"<circle cx="{x:.3}" cy="{y:.3}" r="{r:.3}" fill="#111"><title>order {} {}</title></circle>"##,
            e.order, e.kind
        );
    }
}

/// SVG text for `report` with the traced orbits.
pub fn svg_document(report: &AnalysisReport, orbits: &[TracedOrbit<f64>]) -> String {
    let frame = Frame::new(report);
    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{:.0}" height="{:.0}" viewBox="0 0 {:.3} {:.3}">"#,
        frame.width(),
        frame.height(),
        frame.width(),
        frame.height()
    );
    let _ = writeln!(out, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(out, "<title>{}</title>", escape(&report.function));
    write_axes(&mut out, &frame);
    for traced in orbits {
        for (side, color) in [(&traced.forward, "#2e7d32"), (&traced.backward, "#8e44ad")] {
            if let Ok(orbit) = side {
                write_orbit(&mut out, &frame, orbit, color);
            }
        }
    }
    write_equilibria(&mut out, &frame, report);
    out.push_str("</svg>\n");
    out
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

pub fn render_svg(report: &AnalysisReport, orbits: &[TracedOrbit<f64>], path: &Path) -> Result<(), AnalysisError> {
    std::fs::write(path, svg_document(report, orbits))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::report::{analyze, parse_box, AnalysisInput, SeedSpec};

    fn run(function: &str, b: &str, seeds: &str) -> crate::report::Analysis {
        analyze(&AnalysisInput {
            function: function.into(),
            region: parse_box(b).unwrap(),
            seeds: SeedSpec::parse(seeds).unwrap(),
            config: Default::default(),
        })
        .unwrap()
    }

    #[test]
    fn empty_orbit_list_draws_axes_and_equilibria() {
        let a = run("z-1", "-2,-2,2,2", "list:0.5");
        let svg = svg_document(&a.report, &[]);
        assert!(svg.starts_with("<svg"));
        assert!(!svg.contains("<polyline"));
        assert_eq!(svg.matches("<circle").count(), 1);
        assert_eq!(svg.matches("<text").count(), 2 * TICKS);
    }

    #[test]
    fn rays_per_equilibrium() {
        let a = run("z^3*(z-1)^3", "-0.5,-0.75,1.5,0.75", "list:0.5");
        let svg = svg_document(&a.report, &a.orbits);
        let rays = svg.matches(r#"stroke-width="1.5""#).count();
        assert_eq!(rays, 8);
        assert_eq!(svg.matches("<polyline").count(), 2);
        assert_eq!(svg.matches("<polygon").count(), 4);
        assert_eq!(svg, svg_document(&a.report, &a.orbits));
    }

    #[test]
    fn decimation_keeps_endpoints() {
        let pts: Vec<Complex<f64>> = (0..10_001).map(|k| Complex::new(k as f64, 0.0)).collect();
        let d = decimate(&pts);
        assert!(d.len() <= MAX_POINTS);
        assert_eq!(d[0], pts[0]);
        assert_eq!(d.last(), pts.last());
    }
}
