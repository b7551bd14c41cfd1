//! Convex polygons and polyhedra with labelled facets, built by successive
//! halfspace clipping of a box.

use std::collections::HashMap;

use super::lp::Halfspace;
use crate::geom::{self, BBox, Vec3};

/// Which constraint produced a facet.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Tag {
    Bbox,
    Term(usize),
}

/// Vertices within this signed distance of a plane count as on it.
const ON_PLANE: f64 = 1e-10;

/// Convex polygon in the plane; edge `k` runs from `verts[k]` to
/// `verts[k + 1]` (counter-clockwise) and carries `tags[k]`.
#[derive(Debug, Clone)]
pub struct Polygon {
    pub verts: Vec<Vec3>,
    pub tags: Vec<Tag>,
}

impl Polygon {
    pub fn from_bbox(b: &BBox) -> Self {
        let (lo, hi) = (b.min, b.max);
        Polygon {
            verts: vec![
                [lo[0], lo[1], 0.0],
                [hi[0], lo[1], 0.0],
                [hi[0], hi[1], 0.0],
                [lo[0], hi[1], 0.0],
            ],
            tags: vec![Tag::Bbox; 4],
        }
    }

    pub fn is_empty(&self) -> bool {
        self.verts.len() < 3
    }

    /// Keeps the part where `h <= 0`; the new edge is tagged `tag`.
    pub fn clip(&mut self, h: &Halfspace, tag: Tag) {
        let n = self.verts.len();
        if n < 3 {
            return;
        }
        let s: Vec<f64> = self.verts.iter().map(|v| h.eval(v)).collect();
        if s.iter().all(|&v| v <= ON_PLANE) {
            return;
        }
        if s.iter().all(|&v| v >= -ON_PLANE) {
            self.verts.clear();
            self.tags.clear();
            return;
        }
        let mut verts = Vec::with_capacity(n + 1);
        let mut tags = Vec::with_capacity(n + 1);
        for k in 0..n {
            let j = (k + 1) % n;
            let (pk, pj) = (self.verts[k], self.verts[j]);
            let (sk, sj) = (s[k], s[j]);
            let ink = sk <= ON_PLANE;
            let inj = sj <= ON_PLANE;
            if ink {
                verts.push(pk);
                tags.push(self.tags[k]);
            }
            if ink != inj {
                let t = sk / (sk - sj);
                let p = geom::lerp(&pk, &pj, t);
                if ink {
                    // leaving: the following edge lies on the cutting line
                    if sk.abs() > ON_PLANE {
                        verts.push(p);
                        tags.push(tag);
                    } else {
                        *tags.last_mut().expect("pushed") = tag;
                    }
                } else if sj.abs() > ON_PLANE {
                    verts.push(p);
                    tags.push(self.tags[k]);
                }
            }
        }
        self.verts = verts;
        self.tags = tags;
        self.dedup();
    }

    fn dedup(&mut self) {
        let mut k = 0;
        while self.verts.len() >= 3 && k < self.verts.len() {
            let j = (k + 1) % self.verts.len();
            if geom::dist(&self.verts[k], &self.verts[j]) <= ON_PLANE {
                // zero-length edge k: the previous edge now runs into vertex j
                self.verts.remove(k);
                self.tags.remove(k);
            } else {
                k += 1;
            }
        }
        if self.verts.len() < 3 {
            self.verts.clear();
            self.tags.clear();
        }
    }

    pub fn max_dist(&self, c: &Vec3) -> f64 {
        self.verts.iter().map(|v| geom::dist(v, c)).fold(0.0, f64::max)
    }
}

/// Convex polyhedron; each face lists vertex indices counter-clockwise as
/// seen from outside.
#[derive(Debug, Clone)]
pub struct Polyhedron {
    pub verts: Vec<Vec3>,
    pub faces: Vec<Vec<usize>>,
    pub tags: Vec<Tag>,
}

impl Polyhedron {
    pub fn from_bbox(b: &BBox) -> Self {
        let (lo, hi) = (b.min, b.max);
        let verts = (0..8)
            .map(|i| {
                [
                    if i & 1 == 0 { lo[0] } else { hi[0] },
                    if i & 2 == 0 { lo[1] } else { hi[1] },
                    if i & 4 == 0 { lo[2] } else { hi[2] },
                ]
            })
            .collect();
        let faces = vec![
            vec![0, 4, 6, 2], // x = lo
            vec![1, 3, 7, 5], // x = hi
            vec![0, 1, 5, 4], // y = lo
            vec![2, 6, 7, 3], // y = hi
            vec![0, 2, 3, 1], // z = lo
            vec![4, 5, 7, 6], // z = hi
        ];
        Polyhedron {
            verts,
            faces,
            tags: vec![Tag::Bbox; 6],
        }
    }

    pub fn is_empty(&self) -> bool {
        self.faces.len() < 4
    }

    /// Vertices referenced by at least one face.
    pub fn used_vertices(&self) -> Vec<usize> {
        let mut used = vec![false; self.verts.len()];
        for f in &self.faces {
            for &v in f {
                used[v] = true;
            }
        }
        (0..self.verts.len()).filter(|&i| used[i]).collect()
    }

    pub fn max_dist(&self, c: &Vec3) -> f64 {
        self.used_vertices()
            .into_iter()
            .map(|i| geom::dist(&self.verts[i], c))
            .fold(0.0, f64::max)
    }

    /// Keeps the part where `h <= 0`; the cap face is tagged `tag`.
    pub fn clip(&mut self, h: &Halfspace, tag: Tag) {
        if self.is_empty() {
            return;
        }
        let s: Vec<f64> = self.verts.iter().map(|v| h.eval(v)).collect();
        let used = self.used_vertices();
        if used.iter().all(|&i| s[i] <= ON_PLANE) {
            return;
        }
        if used.iter().all(|&i| s[i] >= -ON_PLANE) {
            self.faces.clear();
            self.tags.clear();
            return;
        }
        let inside = |i: usize| s[i] <= ON_PLANE;
        let mut cut: HashMap<(usize, usize), usize> = HashMap::new();
        // cap edges as (from, to): reversed face edges along the plane
        let mut cap_next: HashMap<usize, usize> = HashMap::new();
        let mut faces = Vec::with_capacity(self.faces.len() + 1);
        let mut tags = Vec::with_capacity(self.faces.len() + 1);
        let old_faces = std::mem::take(&mut self.faces);
        let old_tags = std::mem::take(&mut self.tags);
        for (face, ftag) in old_faces.into_iter().zip(old_tags) {
            if face.iter().all(|&i| inside(i)) {
                faces.push(face);
                tags.push(ftag);
                continue;
            }
            let n = face.len();
            let mut out: Vec<usize> = Vec::with_capacity(n + 1);
            let mut exit = None;
            let mut entry = None;
            for k in 0..n {
                let (a, b) = (face[k], face[(k + 1) % n]);
                if inside(a) {
                    out.push(a);
                }
                if inside(a) != inside(b) {
                    let (pin, pout) = if inside(a) { (a, b) } else { (b, a) };
                    let id = if s[pin].abs() <= ON_PLANE {
                        pin
                    } else {
                        let key = (pin.min(pout), pin.max(pout));
                        *cut.entry(key).or_insert_with(|| {
                            let t = s[pin] / (s[pin] - s[pout]);
                            self.verts.push(geom::lerp(&self.verts[pin], &self.verts[pout], t));
                            self.verts.len() - 1
                        })
                    };
                    if out.last() != Some(&id) {
                        out.push(id);
                    }
                    if inside(a) {
                        exit = Some(id);
                    } else {
                        entry = Some(id);
                    }
                }
            }
            if out.len() >= 2 && out.first() == out.last() {
                out.pop();
            }
            if let (Some(a), Some(b)) = (exit, entry) {
                if a != b {
                    cap_next.insert(b, a);
                }
            }
            if out.len() >= 3 {
                faces.push(out);
                tags.push(ftag);
            }
        }
        if let Some((&start, _)) = cap_next.iter().min_by_key(|(k, _)| **k) {
            let mut cap = vec![start];
            let mut cur = start;
            while let Some(&nx) = cap_next.get(&cur) {
                if nx == start || cap.len() > cap_next.len() {
                    break;
                }
                cap.push(nx);
                cur = nx;
            }
            if cap.len() >= 3 {
                faces.push(cap);
                tags.push(tag);
            }
        }
        self.faces = faces;
        self.tags = tags;
        if self.faces.len() < 4 {
            self.faces.clear();
            self.tags.clear();
        }
    }
}
