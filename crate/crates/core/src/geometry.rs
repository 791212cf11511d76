//! Planar points and the pixel grids laid over the region of interest.

use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

/// A point (or vector) in the imaging plane, in metres.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const ORIGIN: Point = Point { x: 0.0, y: 0.0 };

    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    /// Point at `radius` from `center` in direction `angle` (radians, CCW from +x).
    pub fn polar(center: Point, radius: f64, angle: f64) -> Self {
        let (s, c) = angle.sin_cos();
        Self::new(center.x + radius * c, center.y + radius * s)
    }

    pub fn dot(self, other: Point) -> f64 {
        self.x * other.x + self.y * other.y
    }

    /// z-component of the 3-D cross product.
    pub fn cross(self, other: Point) -> f64 {
        self.x * other.y - self.y * other.x
    }

    pub fn norm(self) -> f64 {
        (self.x * self.x + self.y * self.y).sqrt()
    }

    pub fn distance(self, other: Point) -> f64 {
        (self - other).norm()
    }

    /// Unit vector in the same direction. Returns the zero vector unchanged.
    pub fn unit(self) -> Point {
        let n = self.norm();
        if n == 0.0 {
            self
        } else {
            self * (1.0 / n)
        }
    }

    /// Polar angle in radians.
    pub fn angle(self) -> f64 {
        self.y.atan2(self.x)
    }
}

impl Add for Point {
    type Output = Point;
    fn add(self, rhs: Point) -> Point {
        Point::new(self.x + rhs.x, self.y + rhs.y)
    }
}

impl Sub for Point {
    type Output = Point;
    fn sub(self, rhs: Point) -> Point {
        Point::new(self.x - rhs.x, self.y - rhs.y)
    }
}

impl Mul<f64> for Point {
    type Output = Point;
    fn mul(self, rhs: f64) -> Point {
        Point::new(self.x * rhs, self.y * rhs)
    }
}

impl Neg for Point {
    type Output = Point;
    fn neg(self) -> Point {
        Point::new(-self.x, -self.y)
    }
}

/// Angle between two directions, in `[0, π]`.
pub(crate) fn angle_between(a: Point, b: Point) -> f64 {
    a.cross(b).abs().atan2(a.dot(b))
}

/// A regular pixel lattice. Pixel `(ix, iy)` sits at
/// `origin + (ix * spacing, iy * spacing)`; storage is row-major in `iy`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub origin: Point,
    pub spacing: f64,
    pub nx: usize,
    pub ny: usize,
}

impl GridSpec {
    pub fn new(origin: Point, spacing: f64, nx: usize, ny: usize) -> crate::Result<Self> {
        if !(spacing > 0.0) || !spacing.is_finite() {
            return Err(crate::Error::InvalidParameter(format!(
                "grid spacing must be positive, got {spacing}"
            )));
        }
        if nx == 0 || ny == 0 {
            return Err(crate::Error::InvalidParameter("grid must have pixels".into()));
        }
        Ok(Self { origin, spacing, nx, ny })
    }

    /// Square `n x n` grid of the given spacing centred on `center`.
    pub fn centered(center: Point, spacing: f64, n: usize) -> crate::Result<Self> {
        let half = (n as f64 - 1.0) * spacing / 2.0;
        Self::new(Point::new(center.x - half, center.y - half), spacing, n, n)
    }

    pub fn len(&self) -> usize {
        self.nx * self.ny
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn index(&self, ix: usize, iy: usize) -> usize {
        iy * self.nx + ix
    }

    pub fn coords(&self, index: usize) -> (usize, usize) {
        (index % self.nx, index / self.nx)
    }

    pub fn point(&self, index: usize) -> Point {
        let (ix, iy) = self.coords(index);
        Point::new(
            self.origin.x + ix as f64 * self.spacing,
            self.origin.y + iy as f64 * self.spacing,
        )
    }

    /// Index of the pixel nearest to `p`, if it falls on the grid.
    pub fn nearest(&self, p: Point) -> Option<usize> {
        let fx = ((p.x - self.origin.x) / self.spacing).round();
        let fy = ((p.y - self.origin.y) / self.spacing).round();
        if fx < 0.0 || fy < 0.0 || fx >= self.nx as f64 || fy >= self.ny as f64 {
            return None;
        }
        Some(self.index(fx as usize, fy as usize))
    }

    pub fn points(&self) -> impl Iterator<Item = Point> + '_ {
        (0..self.len()).map(move |i| self.point(i))
    }
}

/// Cross-section of an extended object.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "lowercase")]
pub enum Footprint {
    Disk { center: Point, radius: f64 },
    /// Axis-aligned rectangle.
    Rect { center: Point, width: f64, height: f64 },
}

impl Footprint {
    pub fn center(&self) -> Point {
        match *self {
            Footprint::Disk { center, .. } | Footprint::Rect { center, .. } => center,
        }
    }

    pub fn contains(&self, p: Point) -> bool {
        match *self {
            Footprint::Disk { center, radius } => p.distance(center) <= radius,
            Footprint::Rect { center, width, height } => {
                (p.x - center.x).abs() <= width / 2.0 && (p.y - center.y).abs() <= height / 2.0
            }
        }
    }

    /// Farthest distance from the centre to the outline.
    pub fn extent(&self) -> f64 {
        match *self {
            Footprint::Disk { radius, .. } => radius,
            Footprint::Rect { width, height, .. } => 0.5 * width.hypot(height),
        }
    }

    /// Points of a square lattice with the given spacing, anchored at the
    /// centre, that fall inside the footprint.
    pub fn point_cloud(&self, spacing: f64) -> Vec<Point> {
        let c = self.center();
        let k = (self.extent() / spacing).ceil() as i64;
        let mut out = Vec::new();
        for iy in -k..=k {
            for ix in -k..=k {
                let p = Point::new(c.x + ix as f64 * spacing, c.y + iy as f64 * spacing);
                if self.contains(p) {
                    out.push(p);
                }
            }
        }
        out
    }
}
