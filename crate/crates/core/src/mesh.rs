//! Indexed triangle meshes.

use std::collections::HashSet;

use crate::geom::{self, BBox, Vec3};

#[derive(Debug, Clone, Default, PartialEq)]
pub struct TriMesh {
    pub vertices: Vec<Vec3>,
    pub faces: Vec<[usize; 3]>,
}

impl TriMesh {
    pub fn new(vertices: Vec<Vec3>, faces: Vec<[usize; 3]>) -> Self {
        TriMesh { vertices, faces }
    }

    pub fn is_empty(&self) -> bool {
        self.faces.is_empty()
    }

    pub fn triangle(&self, f: usize) -> [Vec3; 3] {
        let [a, b, c] = self.faces[f];
        [self.vertices[a], self.vertices[b], self.vertices[c]]
    }

    /// Unnormalized face normal (twice the area vector).
    pub fn face_cross(&self, f: usize) -> Vec3 {
        let [a, b, c] = self.triangle(f);
        geom::cross(&geom::sub(&b, &a), &geom::sub(&c, &a))
    }

    pub fn face_area(&self, f: usize) -> f64 {
        0.5 * geom::norm(&self.face_cross(f))
    }

    pub fn face_normal(&self, f: usize) -> Option<Vec3> {
        let c = self.face_cross(f);
        let n = geom::norm(&c);
        (n > 0.0).then(|| geom::scale(&c, 1.0 / n))
    }

    pub fn area(&self) -> f64 {
        (0..self.faces.len()).map(|f| self.face_area(f)).sum()
    }

    pub fn bbox(&self) -> Option<BBox> {
        BBox::from_points(self.vertices.iter())
    }

    /// `V - E + F` over referenced vertices and unique undirected edges.
    pub fn euler_characteristic(&self) -> i64 {
        let mut verts = HashSet::new();
        let mut edges = HashSet::new();
        for f in &self.faces {
            for k in 0..3 {
                let (a, b) = (f[k], f[(k + 1) % 3]);
                verts.insert(a);
                edges.insert((a.min(b), a.max(b)));
            }
        }
        verts.len() as i64 - edges.len() as i64 + self.faces.len() as i64
    }

    /// True when every undirected edge is shared by exactly two faces.
    pub fn is_closed_manifold(&self) -> bool {
        let mut count = std::collections::HashMap::new();
        for f in &self.faces {
            for k in 0..3 {
                let (a, b) = (f[k], f[(k + 1) % 3]);
                *count.entry((a.min(b), a.max(b))).or_insert(0usize) += 1;
            }
        }
        !count.is_empty() && count.values().all(|&c| c == 2)
    }

    /// Signed volume (positive for outward-oriented closed meshes).
    pub fn signed_volume(&self) -> f64 {
        self.faces
            .iter()
            .map(|&[a, b, c]| {
                let (a, b, c) = (self.vertices[a], self.vertices[b], self.vertices[c]);
                geom::dot(&a, &geom::cross(&b, &c)) / 6.0
            })
            .sum()
    }

    /// Removes faces with zero area; returns how many were dropped.
    pub fn drop_degenerate(&mut self) -> usize {
        let before = self.faces.len();
        let verts = &self.vertices;
        self.faces.retain(|&[a, b, c]| {
            a != b && b != c && a != c && {
                let cr = geom::cross(&geom::sub(&verts[b], &verts[a]), &geom::sub(&verts[c], &verts[a]));
                geom::norm(&cr) > 0.0
            }
        });
        before - self.faces.len()
    }

    /// Drops vertices no face references, preserving order.
    pub fn compact(&mut self) {
        let mut remap = vec![usize::MAX; self.vertices.len()];
        let mut verts = Vec::new();
        for f in &mut self.faces {
            for v in f.iter_mut() {
                if remap[*v] == usize::MAX {
                    remap[*v] = verts.len();
                    verts.push(self.vertices[*v]);
                }
                *v = remap[*v];
            }
        }
        self.vertices = verts;
    }
}
