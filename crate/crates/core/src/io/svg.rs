use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt::Write;

use crate::geometry::Point2;
use crate::metrics::Representation;
use crate::shapes::{oriented_corners, Shape};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OverlayStyle {
    pub stroke_width: f64,
    /// Draw the ground-truth contour underneath the shapes.
    pub show_contour: bool,
}

impl Default for OverlayStyle {
    fn default() -> Self {
        Self { stroke_width: 1.0, show_contour: true }
    }
}

/// An object to draw: its contour and fitted shapes.
#[derive(Debug, Clone, Copy)]
pub struct OverlayObject<'a> {
    pub contour: &'a [Point2],
    pub shapes: &'a BTreeMap<Representation, Shape>,
}

fn color(rep: Representation) -> &'static str {
    match rep {
        Representation::Standard => "#e6194b",
        Representation::Curved => "#3cb44b",
        Representation::Oriented => "#4363d8",
        Representation::Ellipse => "#f58231",
        Representation::Polygon { adaptive: true, .. } => "#911eb4",
        Representation::Polygon { n, .. } if n <= 4 => "#42d4f4",
        Representation::Polygon { .. } => "#f032e6",
    }
}

fn pt(p: Point2) -> String {
    format!("{:.2},{:.2}", p.x, p.y)
}

fn closed_path(points: &[Point2]) -> String {
    let mut d = String::new();
    for (i, &p) in points.iter().enumerate() {
        let _ = write!(d, "{}{} ", if i == 0 { "M" } else { "L" }, pt(p));
    }
    d.push('Z');
    d
}

/// SVG element for one shape.
pub fn shape_element(shape: &Shape) -> String {
    match shape {
        Shape::Standard(b) => format!(
            "<rect x=\"{:.2}\" y=\"{:.2}\" width=\"{:.2}\" height=\"{:.2}\"/>",
            b.center.x - 0.5 * b.width,
            b.center.y - 0.5 * b.height,
            b.width,
            b.height
        ),
        Shape::Oriented(b) => {
            let c = oriented_corners(b.center, b.width, b.height, b.angle_deg.to_radians());
            format!("<path d=\"{}\"/>", closed_path(&c))
        }
        Shape::Ellipse(e) => format!(
            "<ellipse cx=\"{:.2}\" cy=\"{:.2}\" rx=\"{:.2}\" ry=\"{:.2}\" transform=\"rotate({:.3} {:.2} {:.2})\"/>",
            e.center.x,
            e.center.y,
            0.5 * e.major,
            0.5 * e.minor,
            e.angle_deg,
            e.center.x,
            e.center.y
        ),
        Shape::Curved(b) => {
            if b.degenerate {
                return format!("<path d=\"{}\"/>", closed_path(&b.corners()));
            }
            let [inner0, outer0, outer1, inner1] = b.corners();
            let large = ((b.theta2 - b.theta1) > PI) as u8;
            // Angles grow clockwise on screen (y down), which is SVG's
            // positive sweep direction.
            format!(
                "<path d=\"M{} A{:.2},{:.2} 0 {large} 1 {} L{} A{:.2},{:.2} 0 {large} 0 {} Z\"/>",
                pt(outer0),
                b.r2,
                b.r2,
                pt(outer1),
                pt(inner1),
                b.r1,
                b.r1,
                pt(inner0)
            )
        }
        Shape::Polygon(p) => format!("<path d=\"{}\"/>", closed_path(&p.absolute_vertices())),
        Shape::Polar(p) => format!("<path d=\"{}\"/>", closed_path(&p.vertices())),
    }
}

fn header(width: usize, height: usize) -> String {
    format!(
        "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" \
         width=\"{width}\" height=\"{height}\" viewBox=\"0 0 {width} {height}\">\n\
         <rect x=\"0\" y=\"0\" width=\"{width}\" height=\"{height}\" fill=\"#202020\"/>\n"
    )
}

/// One `<g>` layer per representation, color coded; output depends only on
/// the input.
pub fn render_overlay(width: usize, height: usize, objects: &[OverlayObject], style: &OverlayStyle) -> String {
    let mut out = header(width, height);
    if style.show_contour {
        let _ = writeln!(out, "<g id=\"contours\" fill=\"#808080\" fill-opacity=\"0.35\" stroke=\"none\">");
        for o in objects.iter().filter(|o| o.contour.len() >= 3) {
            let _ = writeln!(out, "<path d=\"{}\"/>", closed_path(o.contour));
        }
        out.push_str("</g>\n");
    }
    let mut reps: Vec<Representation> = objects.iter().flat_map(|o| o.shapes.keys().copied()).collect();
    reps.sort();
    reps.dedup();
    for rep in reps {
        let _ = writeln!(
            out,
            "<g id=\"{rep}\" fill=\"none\" stroke=\"{}\" stroke-width=\"{}\">",
            color(rep),
            style.stroke_width
        );
        for o in objects {
            if let Some(s) = o.shapes.get(&rep) {
                let _ = writeln!(out, "{}", shape_element(s));
            }
        }
        out.push_str("</g>\n");
    }
    out.push_str("</svg>\n");
    out
}

/// Open polylines, e.g. projected line curves.
pub fn render_polylines(width: usize, height: usize, curves: &[Vec<Point2>], stroke: &str) -> String {
    let mut out = header(width, height);
    let _ = writeln!(out, "<g id=\"curves\" fill=\"none\" stroke=\"{stroke}\" stroke-width=\"1\">");
    for c in curves {
        let pts: Vec<String> = c.iter().map(|&p| pt(p)).collect();
        let _ = writeln!(out, "<polyline points=\"{}\"/>", pts.join(" "));
    }
    out.push_str("</g>\n</svg>\n");
    out
}
