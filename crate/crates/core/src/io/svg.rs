use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::error::Result;
use crate::extract::{ExtractedComplex, FacetLabel};
use crate::geom::BBox;

const SIZE: f64 = 512.0;

/// Renders a 2D complex: surface cells in black, box-clipped boundary cells
/// in light grey. The y axis points up.
pub fn svg_string(complex: &ExtractedComplex, bbox: &BBox) -> String {
    let w = bbox.max[0] - bbox.min[0];
    let h = bbox.max[1] - bbox.min[1];
    let s = SIZE / w.max(h).max(f64::MIN_POSITIVE);
    let map = |p: &[f64; 3]| ((p[0] - bbox.min[0]) * s, (bbox.max[1] - p[1]) * s);
    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{:.0}" height="{:.0}" viewBox="0 0 {:.3} {:.3}">"#,
        w * s,
        h * s,
        w * s,
        h * s
    );
    let _ = writeln!(out, r#"<rect width="100%" height="100%" fill="white"/>"#);
    for (cell, label) in complex.cells.iter().zip(&complex.cell_labels) {
        if cell.len() != 2 {
            continue;
        }
        let (a, b) = (map(&complex.vertices[cell[0]]), map(&complex.vertices[cell[1]]));
        let (color, width) = match label {
            FacetLabel::Boundary { .. } => ("#cccccc", 0.5),
            _ => ("black", 1.5),
        };
        let _ = writeln!(
            out,
            r#"<line x1="{:.3}" y1="{:.3}" x2="{:.3}" y2="{:.3}" stroke="{color}" stroke-width="{width}"/>"#,
            a.0, a.1, b.0, b.1
        );
    }
    out.push_str("</svg>\n");
    out
}

pub fn save_svg(complex: &ExtractedComplex, bbox: &BBox, path: &Path) -> Result<()> {
    fs::write(path, svg_string(complex, bbox))?;
    Ok(())
}
