//! Inside/outside classifiers used by the grid constructions.

use std::fmt;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::geom::{self, Vec3};
use crate::mesh::TriMesh;

/// Deterministic point classifier.
pub trait OccupancyOracle: Send + Sync {
    fn inside(&self, x: &Vec3) -> bool;
}

impl<F> OccupancyOracle for F
where
    F: Fn(&Vec3) -> bool + Send + Sync,
{
    fn inside(&self, x: &Vec3) -> bool {
        self(x)
    }
}

/// Inverts another oracle.
pub struct Complement<O>(pub O);

impl<O: OccupancyOracle> OccupancyOracle for Complement<O> {
    fn inside(&self, x: &Vec3) -> bool {
        !self.0.inside(x)
    }
}

/// Named synthetic shapes, all centered at the origin.
#[derive(Clone)]
pub enum ShapeOracle {
    Circle { r: f64 },
    /// Axis-aligned square of side `a`.
    Square { a: f64 },
    Sphere { r: f64 },
    /// Axis-aligned cube of side `a`.
    Cube { a: f64 },
    /// Torus around the z axis.
    Torus { major: f64, minor: f64 },
    /// Generalized winding number of a closed triangle mesh.
    Mesh { path: PathBuf, mesh: Arc<TriMesh> },
}

impl fmt::Debug for ShapeOracle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.name())
    }
}

impl ShapeOracle {
    /// Parses `circle(r)`, `square(a)`, `sphere(r)`, `cube(a)`, `torus(R,r)`
    /// or `mesh(path)`.
    pub fn parse(spec: &str) -> Result<Self> {
        let spec = spec.trim();
        let (name, args) = match spec.find('(') {
            Some(i) if spec.ends_with(')') => (&spec[..i], &spec[i + 1..spec.len() - 1]),
            _ => return Err(Error::UnknownShape(spec.to_string())),
        };
        if name == "mesh" {
            return Self::mesh(Path::new(args.trim()));
        }
        let nums: Vec<f64> = args
            .split(',')
            .map(|a| a.trim().parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|_| Error::UnknownShape(spec.to_string()))?;
        match (name, nums.as_slice()) {
            ("circle", [r]) => Ok(ShapeOracle::Circle { r: *r }),
            ("square", [a]) => Ok(ShapeOracle::Square { a: *a }),
            ("sphere", [r]) => Ok(ShapeOracle::Sphere { r: *r }),
            ("cube", [a]) => Ok(ShapeOracle::Cube { a: *a }),
            ("torus", [major, minor]) => Ok(ShapeOracle::Torus {
                major: *major,
                minor: *minor,
            }),
            _ => Err(Error::UnknownShape(spec.to_string())),
        }
    }

    pub fn mesh(path: &Path) -> Result<Self> {
        let mesh = crate::io::load_mesh(path)?.mesh;
        Ok(ShapeOracle::Mesh {
            path: path.to_path_buf(),
            mesh: Arc::new(mesh),
        })
    }

    pub fn name(&self) -> String {
        match self {
            ShapeOracle::Circle { r } => format!("circle({r})"),
            ShapeOracle::Square { a } => format!("square({a})"),
            ShapeOracle::Sphere { r } => format!("sphere({r})"),
            ShapeOracle::Cube { a } => format!("cube({a})"),
            ShapeOracle::Torus { major, minor } => format!("torus({major},{minor})"),
            ShapeOracle::Mesh { path, .. } => format!("mesh({})", path.display()),
        }
    }

    /// Natural dimension of the shape.
    pub fn dim(&self) -> usize {
        match self {
            ShapeOracle::Circle { .. } | ShapeOracle::Square { .. } => 2,
            _ => 3,
        }
    }

    /// Signed distance where it has a closed form (negative inside).
    pub fn signed_distance(&self, x: &Vec3) -> Option<f64> {
        match self {
            ShapeOracle::Circle { r } => Some((x[0] * x[0] + x[1] * x[1]).sqrt() - r),
            ShapeOracle::Sphere { r } => Some(geom::norm(x) - r),
            ShapeOracle::Torus { major, minor } => {
                let q = (x[0] * x[0] + x[1] * x[1]).sqrt() - major;
                Some((q * q + x[2] * x[2]).sqrt() - minor)
            }
            ShapeOracle::Square { a } => Some(box_distance(x, a / 2.0, 2)),
            ShapeOracle::Cube { a } => Some(box_distance(x, a / 2.0, 3)),
            ShapeOracle::Mesh { .. } => None,
        }
    }
}

impl OccupancyOracle for ShapeOracle {
    fn inside(&self, x: &Vec3) -> bool {
        match self {
            ShapeOracle::Mesh { mesh, .. } => winding_number(mesh, x) > 0.5,
            _ => self.signed_distance(x).is_some_and(|d| d < 0.0),
        }
    }
}

fn box_distance(x: &Vec3, h: f64, dim: usize) -> f64 {
    let q: Vec<f64> = x[..dim].iter().map(|v| v.abs() - h).collect();
    let outside = q.iter().map(|v| v.max(0.0).powi(2)).sum::<f64>().sqrt();
    outside + q.iter().copied().fold(f64::NEG_INFINITY, f64::max).min(0.0)
}

/// Generalized winding number of a triangle mesh at `p`
/// (solid-angle sum over `4 pi`, Van Oosterom–Strackee formula).
pub fn winding_number(mesh: &TriMesh, p: &Vec3) -> f64 {
    let mut total = 0.0;
    for &[ia, ib, ic] in &mesh.faces {
        let a = geom::sub(&mesh.vertices[ia], p);
        let b = geom::sub(&mesh.vertices[ib], p);
        let c = geom::sub(&mesh.vertices[ic], p);
        let (la, lb, lc) = (geom::norm(&a), geom::norm(&b), geom::norm(&c));
        let det = geom::dot(&a, &geom::cross(&b, &c));
        let den = la * lb * lc + geom::dot(&a, &b) * lc + geom::dot(&b, &c) * la + geom::dot(&c, &a) * lb;
        total += 2.0 * det.atan2(den);
    }
    total / (4.0 * std::f64::consts::PI)
}
