use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::{self, Vec3};

/// Tolerance on `|n| = 1`.
pub const UNIT_TOL: f64 = 1e-6;

/// Surface samples with unit normals.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrientedSampleSet {
    pub dim: usize,
    pub points: Vec<Vec3>,
    pub normals: Vec<Vec3>,
    /// Mesh path or synthetic-shape name.
    pub source: String,
}

impl OrientedSampleSet {
    /// Builds a sample set, requiring unit normals.
    pub fn new(dim: usize, points: Vec<Vec3>, normals: Vec<Vec3>, source: impl Into<String>) -> Result<Self> {
        let s = OrientedSampleSet {
            dim,
            points,
            normals,
            source: source.into(),
        };
        s.validate()?;
        Ok(s)
    }

    /// Builds a sample set, rescaling normals to unit length. Rescaled
    /// normals are logged; zero normals are still an error.
    pub fn normalized(dim: usize, points: Vec<Vec3>, mut normals: Vec<Vec3>, source: impl Into<String>) -> Result<Self> {
        let mut fixed = 0usize;
        for (i, n) in normals.iter_mut().enumerate() {
            let len = geom::norm(n);
            if !(len > 0.0 && len.is_finite()) {
                return Err(Error::NonUnitNormal { index: i, norm: len });
            }
            if (len - 1.0).abs() > UNIT_TOL {
                fixed += 1;
            }
            *n = geom::scale(n, 1.0 / len);
        }
        if fixed > 0 {
            log::warn!("normalized {fixed} non-unit normals");
        }
        Self::new(dim, points, normals, source)
    }

    pub fn validate(&self) -> Result<()> {
        if self.dim != 2 && self.dim != 3 {
            return Err(Error::InvalidModel(format!("sample dimension {}", self.dim)));
        }
        if self.points.is_empty() {
            return Err(Error::EmptyInput("oriented sample set"));
        }
        if self.points.len() != self.normals.len() {
            return Err(Error::InvalidModel(format!(
                "{} points but {} normals",
                self.points.len(),
                self.normals.len()
            )));
        }
        for (i, n) in self.normals.iter().enumerate() {
            let len = geom::norm(n);
            if (len - 1.0).abs() > UNIT_TOL || !len.is_finite() {
                return Err(Error::NonUnitNormal { index: i, norm: len });
            }
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}
