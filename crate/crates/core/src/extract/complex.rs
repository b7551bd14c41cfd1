use std::collections::{HashMap, HashSet};

use serde::{Deserialize, Serialize};

use crate::geom::{self, Vec3};
use crate::mesh::TriMesh;

/// Origin of a cell in an [`ExtractedComplex`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum FacetLabel {
    /// Level-set output with no term attribution.
    Contour,
    /// Facet where Minus term `inner` meets Plus term `outer`.
    Active { inner: usize, outer: usize },
    /// Facet produced by clipping the cell of `inner` to the bounding box.
    Boundary { inner: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DegeneracyKind {
    /// A Minus cell with empty interior that still touches the arrangement.
    EmptyInterior,
    /// More terms tie at a vertex than general position allows.
    Vertex,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Degeneracy {
    pub kind: DegeneracyKind,
    pub point: Vec3,
    pub terms: Vec<usize>,
}

/// One full-dimensional cell of the negative region.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InteriorCell {
    pub term: usize,
    pub center: Vec3,
    pub radius: f64,
    /// Indices into [`ExtractedComplex::cells`].
    pub facets: Vec<usize>,
    /// Minus terms whose cells share a facet with this one.
    pub neighbors: Vec<usize>,
}

/// Cell complex produced by extraction. In 2D cells are segments (two vertex
/// indices); in 3D they are planar polygons. Orientation keeps the negative
/// side on the left of segments and behind polygons (normals point out).
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ExtractedComplex {
    pub dim: usize,
    pub vertices: Vec<Vec3>,
    pub cells: Vec<Vec<usize>>,
    pub cell_labels: Vec<FacetLabel>,
    pub interior_cells: Vec<InteriorCell>,
    pub degeneracies: Vec<Degeneracy>,
}

impl ExtractedComplex {
    pub fn empty(dim: usize) -> Self {
        ExtractedComplex {
            dim,
            ..Default::default()
        }
    }

    fn is_surface(label: &FacetLabel) -> bool {
        !matches!(label, FacetLabel::Boundary { .. })
    }

    /// Cells lying on the zero set (active facets or contour pieces).
    pub fn surface_cells(&self) -> impl Iterator<Item = &Vec<usize>> {
        self.cells
            .iter()
            .zip(&self.cell_labels)
            .filter(|(_, l)| Self::is_surface(l))
            .map(|(c, _)| c)
    }

    pub fn surface_count(&self) -> usize {
        self.cell_labels.iter().filter(|l| Self::is_surface(l)).count()
    }

    pub fn active_count(&self) -> usize {
        self.cell_labels
            .iter()
            .filter(|l| matches!(l, FacetLabel::Active { .. }))
            .count()
    }

    /// Total length (2D) or area (3D) of the surface cells.
    pub fn surface_measure(&self) -> f64 {
        self.surface_cells()
            .map(|c| {
                if self.dim == 2 {
                    geom::dist(&self.vertices[c[0]], &self.vertices[c[1]])
                } else {
                    polygon_area(&self.vertices, c)
                }
            })
            .sum()
    }

    /// Euler characteristic `V - E (+ F)` of the surface cells, counting only
    /// vertices and edges they use.
    pub fn euler_characteristic(&self) -> i64 {
        let mut verts = HashSet::new();
        let mut edges = HashSet::new();
        let mut faces = 0i64;
        for c in self.surface_cells() {
            verts.extend(c.iter().copied());
            if self.dim == 2 {
                edges.insert((c[0].min(c[1]), c[0].max(c[1])));
            } else {
                faces += 1;
                for k in 0..c.len() {
                    let (a, b) = (c[k], c[(k + 1) % c.len()]);
                    edges.insert((a.min(b), a.max(b)));
                }
            }
        }
        verts.len() as i64 - edges.len() as i64 + faces
    }

    /// Segments of a 2D complex as coordinate pairs.
    pub fn segments(&self) -> Vec<(Vec3, Vec3)> {
        self.surface_cells()
            .filter(|c| c.len() == 2)
            .map(|c| (self.vertices[c[0]], self.vertices[c[1]]))
            .collect()
    }

    /// Fan-triangulated surface polygons (3D only; empty in 2D).
    pub fn to_mesh(&self) -> TriMesh {
        let mut faces = Vec::new();
        if self.dim == 3 {
            for c in self.surface_cells() {
                for k in 1..c.len().saturating_sub(1) {
                    faces.push([c[0], c[k], c[k + 1]]);
                }
            }
        }
        let mut mesh = TriMesh::new(self.vertices.clone(), faces);
        mesh.compact();
        mesh
    }

    /// Points sampled uniformly along the surface cells.
    pub fn sample_surface<R: rand::Rng>(&self, count: usize, rng: &mut R) -> Vec<Vec3> {
        if self.dim == 3 {
            return crate::metrics::sample_mesh_surface(&self.to_mesh(), count, rng);
        }
        let segs = self.segments();
        let lens: Vec<f64> = segs.iter().map(|(a, b)| geom::dist(a, b)).collect();
        crate::metrics::sample_weighted(&lens, count, rng, |k, rng| {
            let t: f64 = rng.gen();
            geom::lerp(&segs[k].0, &segs[k].1, t)
        })
    }
}

pub(crate) fn polygon_area(verts: &[Vec3], poly: &[usize]) -> f64 {
    let mut acc = [0.0; 3];
    let p0 = verts[poly[0]];
    for k in 1..poly.len().saturating_sub(1) {
        let a = geom::sub(&verts[poly[k]], &p0);
        let b = geom::sub(&verts[poly[k + 1]], &p0);
        acc = geom::add(&acc, &geom::cross(&a, &b));
    }
    0.5 * geom::norm(&acc)
}

/// Merges points closer than `tol` (grid hashing with neighbour lookup).
pub(crate) struct Welder {
    tol: f64,
    buckets: HashMap<[i64; 3], Vec<usize>>,
    pub verts: Vec<Vec3>,
}

impl Welder {
    pub fn new(tol: f64) -> Self {
        Welder {
            tol: tol.max(f64::MIN_POSITIVE),
            buckets: HashMap::new(),
            verts: Vec::new(),
        }
    }

    fn key(&self, p: &Vec3) -> [i64; 3] {
        [0, 1, 2].map(|k| (p[k] / self.tol).floor() as i64)
    }

    pub fn insert(&mut self, p: Vec3) -> usize {
        let key = self.key(&p);
        for dx in -1..=1 {
            for dy in -1..=1 {
                for dz in -1..=1 {
                    let k = [key[0] + dx, key[1] + dy, key[2] + dz];
                    if let Some(ids) = self.buckets.get(&k) {
                        for &id in ids {
                            if geom::dist(&self.verts[id], &p) <= self.tol {
                                return id;
                            }
                        }
                    }
                }
            }
        }
        let id = self.verts.len();
        self.verts.push(p);
        self.buckets.entry(key).or_default().push(id);
        id
    }
}
