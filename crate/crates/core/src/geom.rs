//! Fixed-size vector helpers.
//!
//! Points and slopes are stored as `[f64; 3]`; 2D data keeps the third
//! component at zero so the same kernels serve both dimensions.

pub type Vec3 = [f64; 3];

#[inline]
pub fn dot(a: &Vec3, b: &Vec3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

#[inline]
pub fn add(a: &Vec3, b: &Vec3) -> Vec3 {
    [a[0] + b[0], a[1] + b[1], a[2] + b[2]]
}

#[inline]
pub fn sub(a: &Vec3, b: &Vec3) -> Vec3 {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

#[inline]
pub fn scale(a: &Vec3, s: f64) -> Vec3 {
    [a[0] * s, a[1] * s, a[2] * s]
}

#[inline]
pub fn cross(a: &Vec3, b: &Vec3) -> Vec3 {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

#[inline]
pub fn norm(a: &Vec3) -> f64 {
    dot(a, a).sqrt()
}

#[inline]
pub fn dist(a: &Vec3, b: &Vec3) -> f64 {
    norm(&sub(a, b))
}

#[inline]
pub fn dist2(a: &Vec3, b: &Vec3) -> f64 {
    let d = sub(a, b);
    dot(&d, &d)
}

#[inline]
pub fn lerp(a: &Vec3, b: &Vec3, t: f64) -> Vec3 {
    [
        a[0] + (b[0] - a[0]) * t,
        a[1] + (b[1] - a[1]) * t,
        a[2] + (b[2] - a[2]) * t,
    ]
}

/// Pads a `dim`-length slice into a `Vec3`.
#[inline]
pub fn pad(x: &[f64]) -> Vec3 {
    let mut out = [0.0; 3];
    out[..x.len()].copy_from_slice(x);
    out
}

/// Axis-aligned box in up to three dimensions.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct BBox {
    pub min: Vec3,
    pub max: Vec3,
}

impl BBox {
    /// The cube `[-h, h]^dim` (unused axes collapse to zero).
    pub fn symmetric(dim: usize, h: f64) -> Self {
        let mut min = [0.0; 3];
        let mut max = [0.0; 3];
        for k in 0..dim {
            min[k] = -h;
            max[k] = h;
        }
        BBox { min, max }
    }

    pub fn from_points<'a>(points: impl IntoIterator<Item = &'a Vec3>) -> Option<Self> {
        let mut it = points.into_iter();
        let first = *it.next()?;
        let mut b = BBox {
            min: first,
            max: first,
        };
        for p in it {
            for k in 0..3 {
                b.min[k] = b.min[k].min(p[k]);
                b.max[k] = b.max[k].max(p[k]);
            }
        }
        Some(b)
    }

    pub fn extent(&self) -> Vec3 {
        sub(&self.max, &self.min)
    }

    pub fn max_extent(&self) -> f64 {
        let e = self.extent();
        e[0].max(e[1]).max(e[2])
    }

    pub fn diagonal(&self) -> f64 {
        norm(&self.extent())
    }

    pub fn center(&self) -> Vec3 {
        scale(&add(&self.min, &self.max), 0.5)
    }

    pub fn contains(&self, p: &Vec3, tol: f64) -> bool {
        (0..3).all(|k| p[k] >= self.min[k] - tol && p[k] <= self.max[k] + tol)
    }
}
