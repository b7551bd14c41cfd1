//! Marching squares and a face-consistent marching cubes.
//!
//! Both treat exact zeros as slightly positive. Ambiguous faces are resolved
//! by the sign of the bilinear value at the face center (the corner mean).
//! Because neighbouring cubes see the same face decision, surfaces are
//! watertight.

use std::collections::HashMap;

use super::complex::{ExtractedComplex, FacetLabel};
use super::grid::ScalarGrid;
use crate::error::{Error, Result};
use crate::geom::{self, Vec3};
use crate::mesh::TriMesh;

const ZERO_NUDGE: f64 = 1e-12;

#[inline]
fn nudged(v: f64) -> f64 {
    if v == 0.0 {
        ZERO_NUDGE
    } else {
        v
    }
}

/// Crossing point on the edge between nodes with values `va` and `vb`.
fn interp(pa: &Vec3, pb: &Vec3, va: f64, vb: f64) -> Vec3 {
    let t = va / (va - vb);
    geom::lerp(pa, pb, t)
}

/// Given the four corner values of a face in counter-clockwise order, returns
/// contour segments as `(from_edge, to_edge)` pairs, where edge `k` joins
/// corners `k` and `k + 1`. The negative region lies to the left of each
/// segment when the face is viewed with its corners counter-clockwise.
fn face_segments(v: [f64; 4]) -> ([(usize, usize); 2], usize) {
    let mut starts = [0usize; 2];
    let mut ends = [0usize; 2];
    let (mut ns, mut ne) = (0, 0);
    let mut crossing = [None; 4];
    for k in 0..4 {
        let (a, b) = (v[k] < 0.0, v[(k + 1) % 4] < 0.0);
        if a && !b {
            crossing[k] = Some(true);
            starts[ns] = k;
            ns += 1;
        } else if !a && b {
            crossing[k] = Some(false);
            ends[ne] = k;
            ne += 1;
        }
    }
    let mut out = [(0, 0); 2];
    if ns == 0 {
        return (out, 0);
    }
    if ns == 1 {
        out[0] = (starts[0], ends[0]);
        return (out, 1);
    }
    let center_negative = v.iter().sum::<f64>() < 0.0;
    for (slot, &s) in out.iter_mut().zip(&starts) {
        // negative center joins the negative corners: walk forward to the
        // next end; otherwise cut off the negative corner behind
        let mut k = s;
        loop {
            k = if center_negative { (k + 1) % 4 } else { (k + 3) % 4 };
            if crossing[k] == Some(false) {
                break;
            }
        }
        *slot = (s, k);
    }
    (out, 2)
}

/// Zero contour of a 2D grid as oriented segments.
pub fn marching_squares(grid: &ScalarGrid) -> Result<ExtractedComplex> {
    if grid.dim != 2 {
        return Err(Error::DimensionMismatch {
            expected: 2,
            got: grid.dim,
        });
    }
    let n = grid.res;
    let vals: Vec<f64> = grid.values.iter().map(|&v| nudged(v)).collect();
    let mut out = ExtractedComplex::empty(2);
    // edge ids: horizontal edge at node i -> 2i, vertical -> 2i + 1
    let mut ids: HashMap<usize, usize> = HashMap::new();
    let mut vertex = |node_a: usize, node_b: usize, key: usize, out: &mut ExtractedComplex| -> usize {
        *ids.entry(key).or_insert_with(|| {
            let (ia, ib) = (node_a, node_b);
            let pa = grid.node(ia % n, ia / n, 0);
            let pb = grid.node(ib % n, ib / n, 0);
            out.vertices.push(interp(&pa, &pb, vals[ia], vals[ib]));
            out.vertices.len() - 1
        })
    };
    for iy in 0..n - 1 {
        for ix in 0..n - 1 {
            let c = [
                ix + n * iy,
                ix + 1 + n * iy,
                ix + 1 + n * (iy + 1),
                ix + n * (iy + 1),
            ];
            let v = c.map(|i| vals[i]);
            let (segs, count) = face_segments(v);
            let edge_key = |e: usize| match e {
                0 => 2 * c[0],
                1 => 2 * c[1] + 1,
                2 => 2 * c[3],
                _ => 2 * c[0] + 1,
            };
            let edge_nodes = |e: usize| (c[e], c[(e + 1) % 4]);
            for &(s, e) in &segs[..count] {
                let (a0, a1) = edge_nodes(s);
                let (b0, b1) = edge_nodes(e);
                let va = vertex(a0, a1, edge_key(s), &mut out);
                let vb = vertex(b0, b1, edge_key(e), &mut out);
                out.cells.push(vec![va, vb]);
                out.cell_labels.push(FacetLabel::Contour);
            }
        }
    }
    Ok(out)
}

/// Cube corner `c` has offset bits x = c & 1, y = (c >> 1) & 1, z = c >> 2.
/// Faces list corners counter-clockwise seen from outside the cube.
const FACES: [[usize; 4]; 6] = [
    [0, 4, 6, 2], // -x
    [1, 3, 7, 5], // +x
    [0, 1, 5, 4], // -y
    [2, 6, 7, 3], // +y
    [0, 2, 3, 1], // -z
    [4, 5, 7, 6], // +z
];

/// Zero isosurface of a 3D grid as a triangle mesh with outward normals
/// (pointing toward positive values).
pub fn marching_cubes(grid: &ScalarGrid) -> Result<TriMesh> {
    if grid.dim != 3 {
        return Err(Error::DimensionMismatch {
            expected: 3,
            got: grid.dim,
        });
    }
    let n = grid.res;
    let vals: Vec<f64> = grid.values.iter().map(|&v| nudged(v)).collect();
    let mut vertices: Vec<Vec3> = Vec::new();
    let mut ids: HashMap<(usize, usize), usize> = HashMap::new();
    let mut faces: Vec<[usize; 3]> = Vec::new();
    let node = |i: usize| grid.node(i % n, (i / n) % n, i / (n * n));

    for iz in 0..n - 1 {
        for iy in 0..n - 1 {
            for ix in 0..n - 1 {
                let base = grid.index(ix, iy, iz);
                let corner: [usize; 8] = std::array::from_fn(|c| {
                    base + (c & 1) + n * (((c >> 1) & 1) + n * (c >> 2))
                });
                let v = corner.map(|i| vals[i]);
                let neg = v.iter().filter(|&&x| x < 0.0).count();
                if neg == 0 || neg == 8 {
                    continue;
                }
                // next[a] = b links crossing cube-edges (as corner pairs)
                let mut next: Vec<((usize, usize), (usize, usize))> = Vec::with_capacity(12);
                let mut ambiguous = false;
                for f in &FACES {
                    let fv = f.map(|c| v[c]);
                    let (segs, count) = face_segments(fv);
                    ambiguous |= count == 2;
                    for &(s, e) in &segs[..count] {
                        let ea = (f[s], f[(s + 1) % 4]);
                        let eb = (f[e], f[(e + 1) % 4]);
                        next.push((norm_edge(ea), norm_edge(eb)));
                    }
                }
                let mut used = vec![false; next.len()];
                for start in 0..next.len() {
                    if used[start] {
                        continue;
                    }
                    let mut lp = Vec::new();
                    let mut k = start;
                    while !used[k] {
                        used[k] = true;
                        lp.push(next[k].0);
                        let to = next[k].1;
                        match next.iter().position(|e| e.0 == to) {
                            Some(j) => k = j,
                            None => break,
                        }
                    }
                    if lp.len() < 3 {
                        continue;
                    }
                    let vid: Vec<usize> = lp
                        .iter()
                        .map(|&(a, b)| {
                            let (ga, gb) = (corner[a], corner[b]);
                            let key = (ga.min(gb), ga.max(gb));
                            *ids.entry(key).or_insert_with(|| {
                                vertices.push(interp(&node(ga), &node(gb), vals[ga], vals[gb]));
                                vertices.len() - 1
                            })
                        })
                        .collect();
                    // loops circle the negative side counter-clockwise seen
                    // from outside the cube; reverse for outward normals.
                    // A fan diagonal across an ambiguous face could coincide
                    // with an edge of the neighbouring cube, so such loops
                    // are split around their centroid instead.
                    if ambiguous && vid.len() > 3 {
                        let mut c = [0.0; 3];
                        for &i in &vid {
                            c = geom::add(&c, &vertices[i]);
                        }
                        vertices.push(geom::scale(&c, 1.0 / vid.len() as f64));
                        let ci = vertices.len() - 1;
                        for t in 0..vid.len() {
                            faces.push([ci, vid[(t + 1) % vid.len()], vid[t]]);
                        }
                    } else {
                        for t in 1..vid.len() - 1 {
                            faces.push([vid[0], vid[t + 1], vid[t]]);
                        }
                    }
                }
            }
        }
    }
    Ok(TriMesh::new(vertices, faces))
}

fn norm_edge(e: (usize, usize)) -> (usize, usize) {
    (e.0.min(e.1), e.0.max(e.1))
}
