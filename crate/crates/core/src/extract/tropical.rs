//! Exact extraction of the tropical zero set: every full-dimensional cell of
//! a Minus term is a convex polyhedron, and its facets shared with Plus cells
//! form the surface.

use std::collections::BTreeSet;

use rayon::prelude::*;

use super::complex::{Degeneracy, DegeneracyKind, ExtractedComplex, FacetLabel, InteriorCell, Welder};
use super::lp::{chebyshev_unchecked, Halfspace, LpStatus};
use super::polytope::{Polygon, Polyhedron, Tag};
use crate::error::Result;
use crate::field::{Group, PatchworkModel};
use crate::geom::{self, BBox, Vec3};

#[derive(Debug, Clone, PartialEq)]
pub struct ExtractOptions {
    /// Cells are clipped to this box.
    pub bbox: BBox,
    /// Cells whose inscribed radius is at most this are treated as empty.
    pub min_radius: f64,
    /// Vertices closer than `snap * diagonal` are merged.
    pub snap: f64,
    /// Terms within this value of the maximum count as tied.
    pub tie_tol: f64,
}

impl ExtractOptions {
    pub fn new(dim: usize) -> Self {
        ExtractOptions {
            bbox: BBox::symmetric(dim, 1.5),
            min_radius: 1e-9,
            snap: 1e-7,
            tie_tol: 1e-9,
        }
    }
}

/// Normalized constraint `<n, x> + o <= 0` saying term `term` does not
/// exceed the cell's own term.
#[derive(Debug, Clone, Copy)]
struct Constraint {
    h: Halfspace,
    term: usize,
}

enum Cell {
    Empty,
    Degenerate(Degeneracy),
    Full(CellGeometry),
}

struct CellGeometry {
    center: Vec3,
    radius: f64,
    verts: Vec<Vec3>,
    /// Faces as vertex index loops (segments in 2D).
    faces: Vec<Vec<usize>>,
    tags: Vec<Tag>,
    vertex_ties: Vec<(Vec3, Vec<usize>)>,
}

/// Extracts the zero set of the tropical form of `model`.
pub fn extract_tropical(model: &PatchworkModel, opts: &ExtractOptions) -> Result<ExtractedComplex> {
    model.validate()?;
    let dim = model.dim;
    let active: Vec<usize> = (0..model.len()).filter(|&i| model.terms[i].active).collect();
    let minus: Vec<usize> = active
        .iter()
        .copied()
        .filter(|&i| model.terms[i].group == Group::Minus)
        .collect();
    let cells: Vec<Cell> = minus
        .par_iter()
        .map(|&i| build_cell(model, &active, i, opts))
        .collect();

    let diag = opts.bbox.diagonal();
    let mut welder = Welder::new(opts.snap * diag);
    let mut out = ExtractedComplex::empty(dim);
    let mut seen_ties: BTreeSet<(usize, Vec<usize>)> = BTreeSet::new();
    for (&i, cell) in minus.iter().zip(cells) {
        let g = match cell {
            Cell::Empty => continue,
            Cell::Degenerate(d) => {
                out.degeneracies.push(d);
                continue;
            }
            Cell::Full(g) => g,
        };
        let ids: Vec<usize> = g.verts.iter().map(|&p| welder.insert(p)).collect();
        let mut facets = Vec::new();
        let mut neighbors = Vec::new();
        for (face, tag) in g.faces.iter().zip(&g.tags) {
            let label = match *tag {
                Tag::Bbox => FacetLabel::Boundary { inner: i },
                Tag::Term(j) if model.terms[j].group == Group::Plus => FacetLabel::Active { inner: i, outer: j },
                Tag::Term(j) => {
                    neighbors.push(j);
                    continue;
                }
            };
            let mut poly: Vec<usize> = face.iter().map(|&v| ids[v]).collect();
            poly.dedup();
            while poly.len() > 1 && poly.first() == poly.last() {
                poly.pop();
            }
            let needed = if dim == 2 { 2 } else { 3 };
            if poly.len() < needed {
                continue;
            }
            facets.push(out.cells.len());
            out.cells.push(poly);
            out.cell_labels.push(label);
        }
        for (p, terms) in g.vertex_ties {
            let id = welder.insert(p);
            if seen_ties.insert((id, terms.clone())) {
                out.degeneracies.push(Degeneracy {
                    kind: DegeneracyKind::Vertex,
                    point: welder.verts[id],
                    terms,
                });
            }
        }
        neighbors.sort_unstable();
        neighbors.dedup();
        out.interior_cells.push(InteriorCell {
            term: i,
            center: g.center,
            radius: g.radius,
            facets,
            neighbors,
        });
    }
    out.vertices = welder.verts;
    compact_vertices(&mut out);
    if !out.degeneracies.is_empty() {
        log::debug!("extraction found {} degenerate configurations", out.degeneracies.len());
    }
    Ok(out)
}

fn compact_vertices(c: &mut ExtractedComplex) {
    let mut remap = vec![usize::MAX; c.vertices.len()];
    let mut verts = Vec::new();
    for cell in &mut c.cells {
        for v in cell.iter_mut() {
            if remap[*v] == usize::MAX {
                remap[*v] = verts.len();
                verts.push(c.vertices[*v]);
            }
            *v = remap[*v];
        }
    }
    c.vertices = verts;
}

fn bbox_halfspaces(b: &BBox, dim: usize) -> Vec<Halfspace> {
    let mut out = Vec::with_capacity(2 * dim);
    for k in 0..dim {
        let mut n = [0.0; 3];
        n[k] = 1.0;
        out.push(Halfspace::new(n, -b.max[k]));
        n[k] = -1.0;
        out.push(Halfspace::new(n, b.min[k]));
    }
    out
}

fn constraints_for(model: &PatchworkModel, active: &[usize], i: usize) -> Option<Vec<Constraint>> {
    let ti = &model.terms[i];
    let mut out = Vec::with_capacity(active.len());
    for &j in active {
        if j == i {
            continue;
        }
        let tj = &model.terms[j];
        let n = geom::sub(&tj.slope, &ti.slope);
        let o = tj.offset - ti.offset;
        let len = geom::norm(&n);
        if len < 1e-14 {
            if o > 0.0 {
                return None; // dominated everywhere
            }
            continue;
        }
        out.push(Constraint {
            h: Halfspace::new(geom::scale(&n, 1.0 / len), o / len),
            term: j,
        });
    }
    Some(out)
}

/// Chebyshev center by cutting planes: solve on a working set, add the most
/// violated constraints, repeat.
fn center_of(cons: &[Constraint], bbox: &[Halfspace], dim: usize) -> (Vec3, f64, bool) {
    const BATCH: usize = 24;
    let mut work: Vec<Halfspace> = bbox.to_vec();
    let mut used = vec![false; cons.len()];
    loop {
        let res = chebyshev_unchecked(&work, dim);
        if res.status == LpStatus::Infeasible {
            return (res.x, f64::NEG_INFINITY, false);
        }
        let mut violated: Vec<(f64, usize)> = cons
            .iter()
            .enumerate()
            .filter(|(k, _)| !used[*k])
            .filter_map(|(k, c)| {
                let v = c.h.eval(&res.x) + res.y;
                (v > 1e-11).then_some((v, k))
            })
            .collect();
        if violated.is_empty() {
            return (res.x, res.y, true);
        }
        if violated.len() > BATCH {
            violated.select_nth_unstable_by(BATCH, |a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
            violated.truncate(BATCH);
        }
        violated.sort_by_key(|v| v.1);
        for (_, k) in violated {
            used[k] = true;
            work.push(cons[k].h);
        }
    }
}

fn build_cell(model: &PatchworkModel, active: &[usize], i: usize, opts: &ExtractOptions) -> Cell {
    let dim = model.dim;
    let Some(cons) = constraints_for(model, active, i) else {
        return Cell::Empty;
    };
    let bbox = bbox_halfspaces(&opts.bbox, dim);
    let (center, radius, feasible) = center_of(&cons, &bbox, dim);
    if !feasible || radius < -opts.min_radius {
        return Cell::Empty;
    }
    if radius <= opts.min_radius {
        let mut terms: Vec<usize> = cons
            .iter()
            .filter(|c| c.h.eval(&center).abs() <= opts.min_radius.max(opts.tie_tol))
            .map(|c| c.term)
            .collect();
        if terms.is_empty() {
            // touches only the bounding box
            return Cell::Empty;
        }
        terms.push(i);
        terms.sort_unstable();
        return Cell::Degenerate(Degeneracy {
            kind: DegeneracyKind::EmptyInterior,
            point: center,
            terms,
        });
    }

    // distance from the center to each constraint plane
    let mut order: Vec<(f64, usize)> = cons
        .iter()
        .enumerate()
        .map(|(k, c)| (-c.h.eval(&center), k))
        .collect();
    let mut g = if dim == 2 {
        clip_cell(Shape::Polygon(Polygon::from_bbox(&opts.bbox)), &cons, &mut order, &center)
    } else {
        clip_cell(Shape::Polyhedron(Polyhedron::from_bbox(&opts.bbox)), &cons, &mut order, &center)
    };
    g.center = center;
    g.radius = radius;
    g.vertex_ties = vertex_ties(&g.verts, &cons, &order, i, dim, opts.tie_tol);
    Cell::Full(g)
}

enum Shape {
    Polygon(Polygon),
    Polyhedron(Polyhedron),
}

impl Shape {
    fn clip(&mut self, h: &Halfspace, tag: Tag) {
        match self {
            Shape::Polygon(p) => p.clip(h, tag),
            Shape::Polyhedron(p) => p.clip(h, tag),
        }
    }

    fn max_dist(&self, c: &Vec3) -> f64 {
        match self {
            Shape::Polygon(p) => p.max_dist(c),
            Shape::Polyhedron(p) => p.max_dist(c),
        }
    }
}

/// Clips the box by constraints nearest the center first, stopping once the
/// remaining planes lie beyond the current circumradius. `order` is left
/// holding the constraints that were considered.
fn clip_cell(mut shape: Shape, cons: &[Constraint], order: &mut Vec<(f64, usize)>, center: &Vec3) -> CellGeometry {
    const FIRST: usize = 32;
    let cmp = |a: &(f64, usize), b: &(f64, usize)| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1));
    if order.len() > FIRST {
        order.select_nth_unstable_by(FIRST, cmp);
    }
    let head = order.len().min(FIRST);
    order[..head].sort_by(cmp);
    for &(_, k) in &order[..head] {
        shape.clip(&cons[k].h, Tag::Term(cons[k].term));
    }
    let mut r = shape.max_dist(center);
    let mut rest: Vec<(f64, usize)> = order[head..].iter().copied().filter(|v| v.0 <= r).collect();
    rest.sort_by(cmp);
    for &(d, k) in &rest {
        if d > r {
            break;
        }
        shape.clip(&cons[k].h, Tag::Term(cons[k].term));
        r = shape.max_dist(center);
    }
    order.truncate(head);
    order.extend(rest.into_iter().filter(|v| v.0 <= r + 1e-9));

    match shape {
        Shape::Polygon(p) => {
            let n = p.verts.len();
            CellGeometry {
                center: *center,
                radius: 0.0,
                faces: (0..n).map(|k| vec![k, (k + 1) % n]).collect(),
                verts: p.verts,
                tags: p.tags,
                vertex_ties: Vec::new(),
            }
        }
        Shape::Polyhedron(p) => {
            let used = p.used_vertices();
            let mut remap = vec![usize::MAX; p.verts.len()];
            for (new, &old) in used.iter().enumerate() {
                remap[old] = new;
            }
            CellGeometry {
                center: *center,
                radius: 0.0,
                verts: used.iter().map(|&k| p.verts[k]).collect(),
                faces: p
                    .faces
                    .iter()
                    .map(|f| f.iter().map(|&v| remap[v]).collect())
                    .collect(),
                tags: p.tags,
                vertex_ties: Vec::new(),
            }
        }
    }
}

/// Vertices where more than `dim + 1` terms attain the maximum.
fn vertex_ties(
    verts: &[Vec3],
    cons: &[Constraint],
    considered: &[(f64, usize)],
    i: usize,
    dim: usize,
    tol: f64,
) -> Vec<(Vec3, Vec<usize>)> {
    let mut out = Vec::new();
    for v in verts {
        let mut terms: Vec<usize> = considered
            .iter()
            .filter(|(_, k)| cons[*k].h.eval(v).abs() <= tol)
            .map(|(_, k)| cons[*k].term)
            .collect();
        if terms.len() + 1 > dim + 1 {
            terms.push(i);
            terms.sort_unstable();
            terms.dedup();
            out.push((*v, terms));
        }
    }
    out
}
