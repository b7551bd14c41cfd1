//! Analytic reference meshes used by demos and tests.

use std::collections::HashMap;
use std::f64::consts::PI;

use crate::geom::{self, Vec3};
use crate::mesh::TriMesh;

/// Subdivided icosahedron projected onto a sphere.
pub fn icosphere(radius: f64, subdivisions: usize) -> TriMesh {
    let t = (1.0 + 5f64.sqrt()) / 2.0;
    let mut verts: Vec<Vec3> = vec![
        [-1.0, t, 0.0],
        [1.0, t, 0.0],
        [-1.0, -t, 0.0],
        [1.0, -t, 0.0],
        [0.0, -1.0, t],
        [0.0, 1.0, t],
        [0.0, -1.0, -t],
        [0.0, 1.0, -t],
        [t, 0.0, -1.0],
        [t, 0.0, 1.0],
        [-t, 0.0, -1.0],
        [-t, 0.0, 1.0],
    ];
    let mut faces: Vec<[usize; 3]> = vec![
        [0, 11, 5],
        [0, 5, 1],
        [0, 1, 7],
        [0, 7, 10],
        [0, 10, 11],
        [1, 5, 9],
        [5, 11, 4],
        [11, 10, 2],
        [10, 7, 6],
        [7, 1, 8],
        [3, 9, 4],
        [3, 4, 2],
        [3, 2, 6],
        [3, 6, 8],
        [3, 8, 9],
        [4, 9, 5],
        [2, 4, 11],
        [6, 2, 10],
        [8, 6, 7],
        [9, 8, 1],
    ];
    for v in &mut verts {
        *v = geom::scale(v, 1.0 / geom::norm(v));
    }
    for _ in 0..subdivisions {
        let mut mid: HashMap<(usize, usize), usize> = HashMap::new();
        let mut next = Vec::with_capacity(faces.len() * 4);
        let mut midpoint = |a: usize, b: usize, verts: &mut Vec<Vec3>| -> usize {
            *mid.entry((a.min(b), a.max(b))).or_insert_with(|| {
                let m = geom::lerp(&verts[a], &verts[b], 0.5);
                verts.push(geom::scale(&m, 1.0 / geom::norm(&m)));
                verts.len() - 1
            })
        };
        for &[a, b, c] in &faces {
            let ab = midpoint(a, b, &mut verts);
            let bc = midpoint(b, c, &mut verts);
            let ca = midpoint(c, a, &mut verts);
            next.extend_from_slice(&[[a, ab, ca], [b, bc, ab], [c, ca, bc], [ab, bc, ca]]);
        }
        faces = next;
    }
    for v in &mut verts {
        *v = geom::scale(v, radius);
    }
    TriMesh::new(verts, faces)
}

/// Axis-aligned cube `[-h, h]^3`, two triangles per face, outward winding.
pub fn cube(h: f64) -> TriMesh {
    let mut verts = Vec::with_capacity(8);
    for i in 0..8 {
        verts.push([
            if i & 1 != 0 { h } else { -h },
            if i & 2 != 0 { h } else { -h },
            if i & 4 != 0 { h } else { -h },
        ]);
    }
    let quads = [
        [0, 2, 3, 1], // z-
        [4, 5, 7, 6], // z+
        [0, 1, 5, 4], // y-
        [2, 6, 7, 3], // y+
        [0, 4, 6, 2], // x-
        [1, 3, 7, 5], // x+
    ];
    let mut faces = Vec::with_capacity(12);
    for q in quads {
        faces.push([q[0], q[1], q[2]]);
        faces.push([q[0], q[2], q[3]]);
    }
    TriMesh::new(verts, faces)
}

/// Torus around the z axis with major radius `r_major`, tube radius `r_minor`.
pub fn torus(r_major: f64, r_minor: f64, segments: usize, rings: usize) -> TriMesh {
    let mut verts = Vec::with_capacity(segments * rings);
    for i in 0..segments {
        let u = 2.0 * PI * i as f64 / segments as f64;
        for j in 0..rings {
            let v = 2.0 * PI * j as f64 / rings as f64;
            let r = r_major + r_minor * v.cos();
            verts.push([r * u.cos(), r * u.sin(), r_minor * v.sin()]);
        }
    }
    let id = |i: usize, j: usize| (i % segments) * rings + (j % rings);
    let mut faces = Vec::with_capacity(2 * segments * rings);
    for i in 0..segments {
        for j in 0..rings {
            let (a, b, c, d) = (id(i, j), id(i + 1, j), id(i + 1, j + 1), id(i, j + 1));
            faces.push([a, b, c]);
            faces.push([a, c, d]);
        }
    }
    TriMesh::new(verts, faces)
}

/// `n` nearly uniform points on the unit sphere (Fibonacci lattice).
pub fn fibonacci_sphere(n: usize) -> Vec<Vec3> {
    let golden = PI * (3.0 - 5f64.sqrt());
    (0..n)
        .map(|i| {
            let z = 1.0 - 2.0 * (i as f64 + 0.5) / n as f64;
            let r = (1.0 - z * z).sqrt();
            let th = golden * i as f64;
            [r * th.cos(), r * th.sin(), z]
        })
        .collect()
}

/// Outward unit normals of the 12 faces of a regular dodecahedron (the
/// vertex directions of an icosahedron).
pub fn dodecahedron_normals() -> [Vec3; 12] {
    let phi = (1.0 + 5f64.sqrt()) / 2.0;
    let s = 1.0 / (1.0 + phi * phi).sqrt();
    let mut out = [[0.0; 3]; 12];
    let mut k = 0;
    for a in [-1.0, 1.0] {
        for b in [-phi, phi] {
            for p in [[0.0, a, b], [a, b, 0.0], [b, 0.0, a]] {
                out[k] = geom::scale(&p, s);
                k += 1;
            }
        }
    }
    out
}

/// Regular dodecahedron of the given inradius as a tropical model: twelve
/// Plus terms whose zero planes contain the faces and one constant Minus
/// term, whose cell is the solid.
pub fn dodecahedron_model(inradius: f64, beta: f64) -> crate::Result<crate::PatchworkModel> {
    use crate::field::{Group, LinearTerm, PatchworkModel};
    let mut terms: Vec<LinearTerm> = dodecahedron_normals()
        .iter()
        .map(|n| LinearTerm::new(*n, -inradius, Group::Plus))
        .collect();
    terms.push(LinearTerm::new([0.0; 3], 0.0, Group::Minus));
    PatchworkModel::new(3, beta, beta, terms)
}
