//! Plain SVG rendering of a 2-D point cloud with an approximating graph.

use std::fmt::Write;

use crate::accuracy::Dataset;
use crate::error::{Error, Result};
use crate::graph::EmbeddedGraph;

const WIDTH_PX: f64 = 800.0;

/// Data points as light circles, edges as lines, nodes as dark circles.
/// The view box covers data and nodes with a 5% margin; y points up.
pub fn render_svg(data: &Dataset, graph: Option<&EmbeddedGraph>) -> Result<String> {
    let dims_ok = data.dim() == 2 && graph.is_none_or(|g| g.dim() == 2);
    if !dims_ok {
        return Err(Error::Unsupported("plotting supports 2-D only".into()));
    }
    let mut lo = [f64::INFINITY; 2];
    let mut hi = [f64::NEG_INFINITY; 2];
    let nodes: &[Vec<f64>] = graph.map(|g| g.positions()).unwrap_or(&[]);
    for p in data.points().chain(nodes.iter().map(Vec::as_slice)) {
        for k in 0..2 {
            lo[k] = lo[k].min(p[k]);
            hi[k] = hi[k].max(p[k]);
        }
    }
    let mut span = [hi[0] - lo[0], hi[1] - lo[1]];
    let extent = span[0].max(span[1]).max(f64::MIN_POSITIVE);
    for s in &mut span {
        if *s <= 0.0 {
            *s = extent;
        }
    }
    let margin = [0.05 * span[0], 0.05 * span[1]];
    let (x0, y0) = (lo[0] - margin[0], -(hi[1] + margin[1]));
    let (w, h) = (span[0] + 2.0 * margin[0], span[1] + 2.0 * margin[1]);
    let height_px = (WIDTH_PX * h / w).clamp(100.0, 4000.0);
    let r_data = 0.004 * extent;
    let r_node = 0.008 * extent;
    let stroke = 0.003 * extent;

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH_PX}" height="{height_px:.0}" viewBox="{x0} {y0} {w} {h}">"#
    );
    let _ = writeln!(s, r##"<rect x="{x0}" y="{y0}" width="{w}" height="{h}" fill="#ffffff"/>"##);
    let _ = writeln!(s, r##"<g fill="#9ecae1" stroke="none">"##);
    for p in data.points() {
        let _ = writeln!(s, r#"<circle cx="{}" cy="{}" r="{r_data}"/>"#, p[0], -p[1]);
    }
    let _ = writeln!(s, "</g>");
    if let Some(g) = graph {
        let _ = writeln!(s, r##"<g stroke="#d62728" stroke-width="{stroke}">"##);
        for &(a, b) in g.edges() {
            let (pa, pb) = (g.position(a), g.position(b));
            let _ = writeln!(
                s,
                r#"<line x1="{}" y1="{}" x2="{}" y2="{}"/>"#,
                pa[0], -pa[1], pb[0], -pb[1]
            );
        }
        let _ = writeln!(s, "</g>");
        let _ = writeln!(s, r##"<g fill="#08306b" stroke="none">"##);
        for p in g.positions() {
            let _ = writeln!(s, r#"<circle cx="{}" cy="{}" r="{r_node}"/>"#, p[0], -p[1]);
        }
        let _ = writeln!(s, "</g>");
    }
    s.push_str("</svg>\n");
    Ok(s)
}
