//! Planar diagrams as SVG.

use std::fmt::Write as _;

use super::io::{DiagramDoc, Job};
use crate::dataset::SiteKind;
use crate::error::{GvdError, Result};

/// Segment of the line `n·x = h` inside `[-b, b]²`.
fn clip_line(n: &[f64], h: f64, b: f64) -> Option<([f64; 2], [f64; 2])> {
    let p = [h * n[0], h * n[1]];
    let t = [-n[1], n[0]];
    let (mut lo, mut hi) = (f64::NEG_INFINITY, f64::INFINITY);
    for k in 0..2 {
        if t[k].abs() < 1e-15 {
            if p[k].abs() > b {
                return None;
            }
            continue;
        }
        let a = (-b - p[k]) / t[k];
        let c = (b - p[k]) / t[k];
        lo = lo.max(a.min(c));
        hi = hi.min(a.max(c));
    }
    (lo < hi).then(|| ([p[0] + lo * t[0], p[1] + lo * t[1]], [p[0] + hi * t[0], p[1] + hi * t[1]]))
}

pub fn render_svg_string(doc: &DiagramDoc, job: &Job) -> Result<String> {
    if doc.meta.dimension != 2 {
        return Err(GvdError::Unsupported(format!(
            "SVG output needs a planar diagram, got dimension {}",
            doc.meta.dimension
        )));
    }
    let b = doc.meta.bbox;
    let w = b / 250.0;
    let mut s = String::new();
    // y grows upward in the diagram, downward in SVG
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" viewBox="{} {} {} {}">"#,
        -b,
        -b,
        2.0 * b,
        2.0 * b
    );
    let _ = writeln!(s, r#"<g transform="scale(1,-1)" fill="none" stroke-width="{w}">"#);
    let _ = writeln!(
        s,
        r##"<rect x="{}" y="{}" width="{}" height="{}" stroke="#bbb"/>"##,
        -b,
        -b,
        2.0 * b,
        2.0 * b
    );

    match job {
        Job::Extremal(ds) => {
            for site in ds.sites() {
                match &site.kind {
                    SiteKind::PointOutside(p) | SiteKind::PointInside(p) => {
                        let c = p.coords();
                        let _ = writeln!(
                            s,
                            r##"<circle class="site-point" cx="{}" cy="{}" r="{}" fill="#333"/>"##,
                            c[0],
                            c[1],
                            3.0 * w
                        );
                    }
                    SiteKind::PowerSphere { center, radius } | SiteKind::ExteriorSphere { center, radius } => {
                        let _ = writeln!(
                            s,
                            r##"<circle class="site-circle" cx="{}" cy="{}" r="{}" stroke="#333"/>"##,
                            center[0], center[1], radius
                        );
                    }
                    SiteKind::HalfSpace(h) => {
                        if let Some((p, q)) = clip_line(h.normal(), h.height(), b) {
                            let _ = writeln!(
                                s,
                                r##"<line class="site-halfspace" x1="{}" y1="{}" x2="{}" y2="{}" stroke="#333"/>"##,
                                p[0], p[1], q[0], q[1]
                            );
                        }
                    }
                }
            }
        }
        Job::Affine { functions, .. } => {
            for f in functions {
                let _ = writeln!(
                    s,
                    r##"<circle class="site-point" cx="{}" cy="{}" r="{}" fill="#333"/>"##,
                    f.q[0],
                    f.q[1],
                    3.0 * w
                );
            }
        }
    }

    for e in &doc.edges {
        let pts: Vec<String> = e.polyline.iter().map(|p| format!("{},{}", p[0], p[1])).collect();
        let _ = writeln!(s, r##"<polyline class="edge" points="{}" stroke="#c03"/>"##, pts.join(" "));
    }
    for v in &doc.vertices {
        let _ = writeln!(
            s,
            r##"<circle class="vertex" cx="{}" cy="{}" r="{}" fill="#06c"/>"##,
            v.center[0],
            v.center[1],
            4.0 * w
        );
    }
    s.push_str("</g>\n</svg>\n");
    Ok(s)
}

pub fn render_svg(doc: &DiagramDoc, job: &Job, path: &std::path::Path) -> Result<()> {
    let text = render_svg_string(doc, job)?;
    std::fs::write(path, text)?;
    Ok(())
}
