//! End-to-end flows shared by the command-line tool and the tests: sample a
//! shape, fit, extract, compare.

use std::f64::consts::PI;

use rand::distributions::{Distribution, Uniform};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::extract::{extract_tropical, marching_cubes, marching_squares, sample_grid, ExtractOptions, ExtractedComplex};
use crate::field::PatchworkModel;
use crate::geom::{self, BBox, Vec3};
use crate::init::{digital_curve_grid, digital_surface_grid, OrientedSampleSet, ShapeOracle, DEFAULT_MAX_TERMS};
use crate::mesh::TriMesh;
use crate::metrics::{self, compare_meshes, MetricReport};
use crate::shapes;
use crate::train::{fit, FitConfig, FitReport};

/// Box used for grid extraction; slightly larger than [-1, 1] so shapes
/// touching the unit box still close up.
pub fn extraction_box(dim: usize) -> BBox {
    BBox::symmetric(dim, 1.1)
}

/// A triangle mesh approximating a 3D shape, for metrics.
pub fn reference_mesh(shape: &ShapeOracle) -> Result<TriMesh> {
    match shape {
        ShapeOracle::Sphere { r } => Ok(shapes::icosphere(*r, 6)),
        ShapeOracle::Cube { a } => Ok(shapes::cube(a / 2.0)),
        ShapeOracle::Torus { major, minor } => Ok(shapes::torus(*major, *minor, 256, 128)),
        ShapeOracle::Mesh { mesh, .. } => Ok((**mesh).clone()),
        _ => Err(Error::InvalidConfig(format!("{} is not a 3D shape", shape.name()))),
    }
}

/// `m` oriented samples drawn uniformly from the boundary of `shape`.
pub fn sample_shape<R: Rng>(shape: &ShapeOracle, m: usize, rng: &mut R) -> Result<OrientedSampleSet> {
    if m == 0 {
        return Err(Error::EmptyInput("sample count"));
    }
    let mut points = Vec::with_capacity(m);
    let mut normals = Vec::with_capacity(m);
    match shape {
        ShapeOracle::Circle { r } => {
            let angle = Uniform::new(0.0, 2.0 * PI);
            for _ in 0..m {
                let t = angle.sample(rng);
                let n = [t.cos(), t.sin(), 0.0];
                points.push(geom::scale(&n, *r));
                normals.push(n);
            }
        }
        ShapeOracle::Square { a } => {
            let h = a / 2.0;
            let u = Uniform::new(-h, h);
            for _ in 0..m {
                let side = rng.gen_range(0..4);
                let t = u.sample(rng);
                let (p, n) = match side {
                    0 => ([h, t, 0.0], [1.0, 0.0, 0.0]),
                    1 => ([-h, t, 0.0], [-1.0, 0.0, 0.0]),
                    2 => ([t, h, 0.0], [0.0, 1.0, 0.0]),
                    _ => ([t, -h, 0.0], [0.0, -1.0, 0.0]),
                };
                points.push(p);
                normals.push(n);
            }
        }
        ShapeOracle::Sphere { r } => {
            for _ in 0..m {
                let g: Vec3 = [0, 1, 2].map(|_| rng.sample(StandardNormal));
                let n = geom::scale(&g, 1.0 / geom::norm(&g));
                points.push(geom::scale(&n, *r));
                normals.push(n);
            }
        }
        ShapeOracle::Cube { a } => {
            let h = a / 2.0;
            let u = Uniform::new(-h, h);
            for _ in 0..m {
                let axis = rng.gen_range(0..3);
                let sign = if rng.gen::<bool>() { 1.0 } else { -1.0 };
                let mut p: Vec3 = [u.sample(rng), u.sample(rng), u.sample(rng)];
                p[axis] = sign * h;
                let mut n = [0.0; 3];
                n[axis] = sign;
                points.push(p);
                normals.push(n);
            }
        }
        _ => {
            let mesh = reference_mesh(shape)?;
            return sample_mesh_oriented(&mesh, m, rng);
        }
    }
    OrientedSampleSet::new(shape.dim(), points, normals, shape.name())
}

/// Area-weighted samples on a mesh with face normals.
pub fn sample_mesh_oriented<R: Rng>(mesh: &TriMesh, m: usize, rng: &mut R) -> Result<OrientedSampleSet> {
    let areas: Vec<f64> = (0..mesh.faces.len()).map(|f| mesh.face_area(f)).collect();
    let picks = metrics::sample_weighted(&areas, m, rng, |f, rng| {
        let [a, b, c] = mesh.triangle(f);
        let (r1, r2): (f64, f64) = (rng.gen(), rng.gen());
        let s = r1.sqrt();
        let p = [0, 1, 2].map(|k| (1.0 - s) * a[k] + s * (1.0 - r2) * b[k] + s * r2 * c[k]);
        (p, mesh.face_normal(f).unwrap_or([0.0, 0.0, 1.0]))
    });
    if picks.is_empty() {
        return Err(Error::DegenerateMesh("mesh has no area".into()));
    }
    let (points, normals) = picks.into_iter().unzip();
    OrientedSampleSet::new(3, points, normals, "mesh")
}

/// Marching-cubes mesh of the smooth field on a `res`^3 grid.
pub fn extract_mesh(model: &PatchworkModel, res: usize, bbox: &BBox) -> Result<TriMesh> {
    marching_cubes(&sample_grid(model, res, bbox)?)
}

/// Marching-squares contour of the smooth field on a `res`^2 grid.
pub fn extract_contour(model: &PatchworkModel, res: usize, bbox: &BBox) -> Result<ExtractedComplex> {
    marching_squares(&sample_grid(model, res, bbox)?)
}

/// Settings for the end-to-end demo.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DemoConfig {
    pub shape: String,
    pub samples: usize,
    pub fit: FitConfig,
    pub mc_resolution: usize,
    pub metric_samples: usize,
    pub construct_n: usize,
}

impl Default for DemoConfig {
    fn default() -> Self {
        DemoConfig {
            shape: "sphere(1)".into(),
            samples: 1024,
            fit: FitConfig::default(),
            mc_resolution: 128,
            metric_samples: metrics::DEFAULT_SAMPLES,
            construct_n: 10,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricRow {
    pub label: String,
    pub parameters: usize,
    pub metrics: MetricReport,
}

#[derive(Debug, Clone)]
pub struct DemoOutcome {
    pub samples: OrientedSampleSet,
    pub model: PatchworkModel,
    pub report: FitReport,
    pub mesh: TriMesh,
    pub constructed: PatchworkModel,
    pub rows: Vec<MetricRow>,
}

/// Constructs a grid model of `shape`, fits a model to samples of it,
/// extracts both and reports metrics against the reference mesh.
pub fn run_demo(cfg: &DemoConfig) -> Result<DemoOutcome> {
    let shape = ShapeOracle::parse(&cfg.shape)?;
    if shape.dim() != 3 {
        return Err(Error::InvalidConfig("the demo needs a 3D shape".into()));
    }
    let gt = reference_mesh(&shape)?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.fit.seed);
    let samples = sample_shape(&shape, cfg.samples, &mut rng)?;
    let metric_seed = cfg.fit.seed.wrapping_add(1);
    let mut rows = Vec::new();

    let constructed = digital_surface_grid(cfg.construct_n, &shape, DEFAULT_MAX_TERMS)?;
    let complex = extract_tropical(&constructed, &ExtractOptions::new(3))?;
    let cmesh = complex.to_mesh();
    if !cmesh.is_empty() {
        rows.push(MetricRow {
            label: format!("construct N={}", cfg.construct_n),
            parameters: constructed.parameter_count(),
            metrics: compare_meshes(&cmesh, &gt, cfg.metric_samples, metric_seed)?,
        });
    }

    let (model, report) = fit(&samples, &cfg.fit)?;
    let mesh = extract_mesh(&model, cfg.mc_resolution, &extraction_box(3))?;
    if mesh.is_empty() {
        log::warn!("fitted field has no zero crossing on the grid");
    } else {
        rows.push(MetricRow {
            label: "fit".into(),
            parameters: model.parameter_count(),
            metrics: compare_meshes(&mesh, &gt, cfg.metric_samples, metric_seed)?,
        });
    }
    Ok(DemoOutcome {
        samples,
        model,
        report,
        mesh,
        constructed,
        rows,
    })
}

/// 2D counterpart of [`digital_surface_grid`] kept here for symmetry in
/// callers that dispatch on dimension.
pub fn construct_grid(n: usize, shape: &ShapeOracle) -> Result<PatchworkModel> {
    match shape.dim() {
        2 => digital_curve_grid(n, shape),
        _ => digital_surface_grid(n, shape, DEFAULT_MAX_TERMS),
    }
}
