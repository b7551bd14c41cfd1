use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::{BBox, Vec3};
use crate::mesh::TriMesh;

/// Uniform scale followed by a translation: `p -> scale * p + translation`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Similarity {
    pub scale: f64,
    pub translation: Vec3,
}

impl Similarity {
    pub const IDENTITY: Similarity = Similarity {
        scale: 1.0,
        translation: [0.0; 3],
    };

    pub fn apply(&self, p: &Vec3) -> Vec3 {
        [0, 1, 2].map(|k| self.scale * p[k] + self.translation[k])
    }

    pub fn inverse(&self) -> Similarity {
        Similarity {
            scale: 1.0 / self.scale,
            translation: self.translation.map(|t| -t / self.scale),
        }
    }

    pub fn apply_mesh(&self, mesh: &TriMesh) -> TriMesh {
        TriMesh::new(
            mesh.vertices.iter().map(|p| self.apply(p)).collect(),
            mesh.faces.clone(),
        )
    }
}

/// Similarity centering `bbox` at the origin with its longest axis
/// spanning exactly [-1, 1].
pub fn box_normalization(bbox: &BBox, dim: usize) -> Result<Similarity> {
    let ext = bbox.extent();
    let longest = ext[..dim].iter().copied().fold(0.0, f64::max);
    if !(longest > 0.0) || !longest.is_finite() {
        return Err(Error::DegenerateBBox);
    }
    let scale = 2.0 / longest;
    let c = bbox.center();
    let mut translation = [0.0; 3];
    for k in 0..dim {
        translation[k] = -scale * c[k];
    }
    Ok(Similarity { scale, translation })
}

/// Normalizes a mesh into [-1, 1]^3. Returns the normalized mesh and the
/// inverse transform mapping results back to the original coordinates.
pub fn normalize_to_box(mesh: &TriMesh) -> Result<(TriMesh, Similarity)> {
    if mesh.vertices.is_empty() {
        return Err(Error::EmptyInput("mesh"));
    }
    let bbox = mesh.bbox().ok_or(Error::EmptyInput("mesh"))?;
    let fwd = box_normalization(&bbox, 3)?;
    let mut out = fwd.apply_mesh(mesh);
    // pin the extreme coordinates of the longest axis exactly
    let axis = (0..3)
        .max_by(|&a, &b| bbox.extent()[a].total_cmp(&bbox.extent()[b]))
        .unwrap_or(0);
    for (v, orig) in out.vertices.iter_mut().zip(&mesh.vertices) {
        if orig[axis] == bbox.min[axis] {
            v[axis] = -1.0;
        } else if orig[axis] == bbox.max[axis] {
            v[axis] = 1.0;
        }
    }
    Ok((out, fwd.inverse()))
}
