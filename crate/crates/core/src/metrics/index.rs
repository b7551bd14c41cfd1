use rstar::primitives::GeomWithData;
use rstar::RTree;

use crate::geom::{self, Vec3};

type Entry = GeomWithData<Vec3, u32>;

/// Exact nearest-neighbour queries over a fixed point set.
pub struct PointIndex {
    tree: RTree<Entry>,
}

impl PointIndex {
    pub fn new(points: &[Vec3]) -> Self {
        assert!(points.len() <= u32::MAX as usize, "point set too large to index");
        let entries = points
            .iter()
            .enumerate()
            .map(|(i, p)| Entry::new(*p, i as u32))
            .collect();
        PointIndex {
            tree: RTree::bulk_load(entries),
        }
    }

    pub fn len(&self) -> usize {
        self.tree.size()
    }

    pub fn is_empty(&self) -> bool {
        self.tree.size() == 0
    }

    /// Index and distance of the nearest stored point, or `None` when empty.
    pub fn nearest(&self, q: &Vec3) -> Option<(usize, f64)> {
        self.tree
            .nearest_neighbor(*q)
            .map(|e| (e.data as usize, geom::dist(e.geom(), q)))
    }
}
