use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::Serialize;

use crate::error::Result;
use crate::extract::{Degeneracy, ExtractedComplex, FacetLabel};

/// OBJ text for a complex: polygons as `f`, segments as `l`. Boundary
/// cells are skipped.
pub fn complex_obj_string(c: &ExtractedComplex) -> String {
    let mut s = String::new();
    for v in &c.vertices {
        let _ = writeln!(s, "v {} {} {}", v[0], v[1], v[2]);
    }
    for (cell, label) in c.cells.iter().zip(&c.cell_labels) {
        if matches!(label, FacetLabel::Boundary { .. }) {
            continue;
        }
        let tag = if cell.len() == 2 { "l" } else { "f" };
        s.push_str(tag);
        for &i in cell {
            let _ = write!(s, " {}", i + 1);
        }
        s.push('\n');
    }
    s
}

#[derive(Serialize)]
struct Sidecar<'a> {
    dim: usize,
    vertices: usize,
    labels: Vec<&'a FacetLabel>,
    degeneracies: &'a [Degeneracy],
}

/// Writes `<stem>.obj` and a `<stem>.json` sidecar carrying per-cell labels
/// (in OBJ element order) and degeneracy reports.
pub fn save_complex(c: &ExtractedComplex, obj_path: &Path) -> Result<()> {
    fs::write(obj_path, complex_obj_string(c))?;
    let sidecar = Sidecar {
        dim: c.dim,
        vertices: c.vertices.len(),
        labels: c
            .cell_labels
            .iter()
            .filter(|l| !matches!(l, FacetLabel::Boundary { .. }))
            .collect(),
        degeneracies: &c.degeneracies,
    };
    let mut s = serde_json::to_string_pretty(&sidecar)?;
    s.push('\n');
    fs::write(obj_path.with_extension("json"), s)?;
    Ok(())
}
