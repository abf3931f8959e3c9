//! Ambient metric-space primitives: points, the product metric on the
//! collar cylinder, analytic set descriptors and exact distances to them.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::curve::BaseCurve;
use crate::error::{CollarError, Result};
use crate::sampling;

/// A point of the ambient space, coordinates in R^n.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Point(pub Vec<f64>);

impl Point {
    pub fn new(coords: Vec<f64>) -> Self {
        Point(coords)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|c| c.is_finite())
    }

    pub fn dist(&self, other: &Point) -> f64 {
        debug_assert_eq!(self.dim(), other.dim());
        self.0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt()
    }

    pub fn sub(&self, other: &Point) -> Vec<f64> {
        self.0.iter().zip(&other.0).map(|(a, b)| a - b).collect()
    }

    pub fn add_scaled(&self, dir: &[f64], s: f64) -> Point {
        Point(
            self.0
                .iter()
                .zip(dir)
                .map(|(a, d)| a + s * d)
                .collect(),
        )
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// A point of the collar cylinder B x [0,1] (or B x [-1,1] for bicollars).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CollarPoint {
    pub base: Point,
    pub height: f64,
}

impl CollarPoint {
    pub fn new(base: Point, height: f64) -> Self {
        CollarPoint { base, height }
    }
}

/// Axis-aligned bounding box.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BoxBounds {
    pub min: Vec<f64>,
    pub max: Vec<f64>,
}

impl BoxBounds {
    pub fn diameter(&self) -> f64 {
        self.min
            .iter()
            .zip(&self.max)
            .map(|(a, b)| (b - a) * (b - a))
            .sum::<f64>()
            .sqrt()
    }

    pub fn contains(&self, p: &Point) -> bool {
        p.0.iter()
            .zip(self.min.iter().zip(&self.max))
            .all(|(c, (lo, hi))| *c >= *lo && *c <= *hi)
    }
}

/// Analytic region descriptors, serialized as `{"kind": ..., ...}`.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Region {
    Box { min: Vec<f64>, max: Vec<f64> },
    Ball { center: Vec<f64>, radius: f64 },
    /// The circle itself (a curve, not the disk).
    Circle { center: Vec<f64>, radius: f64 },
    /// `{x : normal . x >= offset}`.
    Halfplane { normal: Vec<f64>, offset: f64 },
    Polyline { vertices: Vec<Vec<f64>>, closed: bool },
}

impl Region {
    pub fn contains(&self, p: &Point) -> bool {
        match self {
            Region::Box { min, max } => p
                .0
                .iter()
                .zip(min.iter().zip(max))
                .all(|(c, (lo, hi))| *c >= *lo && *c <= *hi),
            Region::Ball { center, radius } => {
                norm(&p.sub(&Point(center.clone()))) <= *radius
            }
            Region::Circle { center, radius } => {
                (norm(&p.sub(&Point(center.clone()))) - radius).abs() <= 1e-12
            }
            Region::Halfplane { normal, offset } => dot(&p.0, normal) >= *offset,
            Region::Polyline { .. } => self.dist_to(p) <= 1e-12,
        }
    }

    /// Exact Euclidean distance from `p` to the region (0 inside).
    pub fn dist_to(&self, p: &Point) -> f64 {
        match self {
            Region::Box { min, max } => {
                let mut sq = 0.0;
                for (c, (lo, hi)) in p.0.iter().zip(min.iter().zip(max)) {
                    let d = if c < lo {
                        lo - c
                    } else if c > hi {
                        c - hi
                    } else {
                        0.0
                    };
                    sq += d * d;
                }
                sq.sqrt()
            }
            Region::Ball { center, radius } => {
                (norm(&p.sub(&Point(center.clone()))) - radius).max(0.0)
            }
            Region::Circle { center, radius } => {
                (norm(&p.sub(&Point(center.clone()))) - radius).abs()
            }
            Region::Halfplane { normal, offset } => {
                let n = norm(normal);
                ((offset - dot(&p.0, normal)) / n).max(0.0)
            }
            Region::Polyline { vertices, closed } => {
                let n = vertices.len();
                let mut best = f64::INFINITY;
                let last = if *closed { n } else { n - 1 };
                for i in 0..last {
                    let a = &vertices[i];
                    let b = &vertices[(i + 1) % n];
                    best = best.min(point_segment_dist(&p.0, a, b));
                }
                best
            }
        }
    }

    /// Exact distance from `p` to the complement of the region
    /// (0 outside or on the boundary).
    pub fn dist_to_complement(&self, p: &Point) -> f64 {
        match self {
            Region::Box { min, max } => {
                if !self.contains(p) {
                    return 0.0;
                }
                p.0.iter()
                    .zip(min.iter().zip(max))
                    .map(|(c, (lo, hi))| (c - lo).min(hi - c))
                    .fold(f64::INFINITY, f64::min)
            }
            Region::Ball { center, radius } => {
                (radius - norm(&p.sub(&Point(center.clone())))).max(0.0)
            }
            // Curves have empty interior; their complement is dense.
            Region::Circle { .. } | Region::Polyline { .. } => 0.0,
            Region::Halfplane { normal, offset } => {
                let n = norm(normal);
                ((dot(&p.0, normal) - offset) / n).max(0.0)
            }
        }
    }
}

pub fn point_segment_dist(p: &[f64], a: &[f64], b: &[f64]) -> f64 {
    let ab: Vec<f64> = a.iter().zip(b).map(|(x, y)| y - x).collect();
    let ap: Vec<f64> = a.iter().zip(p).map(|(x, y)| y - x).collect();
    let len_sq = dot(&ab, &ab);
    let t = if len_sq <= 0.0 {
        0.0
    } else {
        (dot(&ap, &ab) / len_sq).clamp(0.0, 1.0)
    };
    let mut sq = 0.0;
    for i in 0..p.len() {
        let d = p[i] - (a[i] + t * ab[i]);
        sq += d * d;
    }
    sq.sqrt()
}

/// Target of a distance query: an analytic region, the complement of one,
/// a sampled point cloud, or the empty set.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum SetDescriptor {
    Region { region: Region },
    Complement { region: Region },
    Points { points: Vec<Vec<f64>>, resolution: f64 },
    Empty,
}

impl SetDescriptor {
    pub fn is_empty(&self) -> bool {
        match self {
            SetDescriptor::Empty => true,
            SetDescriptor::Points { points, .. } => points.is_empty(),
            _ => false,
        }
    }

    /// Membership in the described set (closure for analytic regions;
    /// within `resolution` for point clouds).
    pub fn contains(&self, p: &Point) -> bool {
        match self {
            SetDescriptor::Region { region } => region.contains(p),
            SetDescriptor::Complement { region } => region.dist_to_complement(p) <= 0.0,
            SetDescriptor::Points { points, resolution } => points
                .iter()
                .any(|q| norm(&p.sub(&Point(q.clone()))) <= *resolution),
            SetDescriptor::Empty => false,
        }
    }
}

/// Distance from `p` to the set described by `s`.
///
/// Analytic descriptors are exact. Point clouds return the minimum over
/// samples, an upper bound of the true infimum. The empty set returns
/// `f64::INFINITY`.
pub fn dist_to_set(p: &Point, s: &SetDescriptor) -> f64 {
    match s {
        SetDescriptor::Region { region } => region.dist_to(p),
        SetDescriptor::Complement { region } => region.dist_to_complement(p),
        SetDescriptor::Points { points, .. } => points
            .iter()
            .map(|q| norm(&p.sub(&Point(q.clone()))))
            .fold(f64::INFINITY, f64::min),
        SetDescriptor::Empty => f64::INFINITY,
    }
}

pub type DistFn = Arc<dyn Fn(&Point, &Point) -> f64 + Send + Sync>;

/// A concrete metric domain: ambient R^n with the Euclidean metric (or a
/// user-supplied override), a base curve realizing the closed set B, and
/// deterministic samplers.
#[derive(Clone)]
pub struct MetricDomain {
    pub dim: usize,
    pub base: BaseCurve,
    pub region_bounds: BoxBounds,
    /// Optional replacement for the Euclidean ambient distance.
    pub dist_override: Option<DistFn>,
    /// The space X being collared (balls are taken relative to it);
    /// `None` means all of R^n.
    pub ambient: Option<SetDescriptor>,
}

impl std::fmt::Debug for MetricDomain {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("MetricDomain")
            .field("dim", &self.dim)
            .field("base", &self.base)
            .field("region_bounds", &self.region_bounds)
            .field("custom_dist", &self.dist_override.is_some())
            .finish()
    }
}

impl MetricDomain {
    pub fn euclidean(base: BaseCurve, region_bounds: BoxBounds) -> Self {
        let dim = base.dim();
        MetricDomain {
            dim,
            base,
            region_bounds,
            dist_override: None,
            ambient: None,
        }
    }

    pub fn with_ambient(mut self, ambient: SetDescriptor) -> Self {
        self.ambient = Some(ambient);
        self
    }

    /// Membership in the collared space X (everything when unset).
    pub fn in_ambient(&self, p: &Point) -> bool {
        match &self.ambient {
            Some(s) => s.contains(p),
            None => true,
        }
    }

    pub fn ambient_dist(&self, a: &Point, b: &Point) -> f64 {
        match &self.dist_override {
            Some(f) => f(a, b),
            None => a.dist(b),
        }
    }

    pub fn check_dim(&self, p: &Point) -> Result<()> {
        if p.dim() != self.dim {
            return Err(CollarError::DimensionMismatch(p.dim(), self.dim));
        }
        Ok(())
    }

    pub fn base_membership(&self, p: &Point) -> bool {
        p.dim() == self.dim && self.base.dist_to_curve(p) <= 1e-7
    }

    /// Deterministic low-discrepancy sample of the base set.
    pub fn base_sample(&self, count: usize, seed: u64) -> Vec<Point> {
        sampling::sample_curve(&self.base, count, seed)
    }
}

/// Product metric on the collar cylinder:
/// `dist((x,s),(y,t)) = dist(x,y) + |s - t|`.
pub fn product_distance(p: &CollarPoint, q: &CollarPoint, dom: &MetricDomain) -> Result<f64> {
    dom.check_dim(&p.base)?;
    dom.check_dim(&q.base)?;
    Ok(dom.ambient_dist(&p.base, &q.base) + (p.height - q.height).abs())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curve::BaseCurve;

    fn dom2() -> MetricDomain {
        MetricDomain::euclidean(
            BaseCurve::Segment {
                a: Point(vec![0.0, 0.0]),
                b: Point(vec![3.0, 0.0]),
            },
            BoxBounds {
                min: vec![-1.0, -1.0],
                max: vec![4.0, 2.0],
            },
        )
    }

    #[test]
    fn product_distance_identical_points_is_zero() {
        let dom = dom2();
        let p = CollarPoint::new(Point(vec![1.0, 0.0]), 0.0);
        assert_eq!(product_distance(&p, &p, &dom).unwrap(), 0.0);
    }

    #[test]
    fn product_distance_same_base_height_gap_one() {
        let dom = dom2();
        let p = CollarPoint::new(Point(vec![2.0, 0.0]), 0.0);
        let q = CollarPoint::new(Point(vec![2.0, 0.0]), 1.0);
        assert_eq!(product_distance(&p, &q, &dom).unwrap(), 1.0);
    }

    #[test]
    fn product_distance_hand_computed() {
        let dom = dom2();
        let p = CollarPoint::new(Point(vec![0.0, 0.0]), 0.2);
        let q = CollarPoint::new(Point(vec![3.0, 4.0]), 0.5);
        let d = product_distance(&p, &q, &dom).unwrap();
        assert!((d - 5.3).abs() < 1e-15);
    }

    #[test]
    fn product_distance_dimension_mismatch_errors() {
        let dom = dom2();
        let p = CollarPoint::new(Point(vec![0.0]), 0.0);
        let q = CollarPoint::new(Point(vec![0.0, 0.0]), 0.0);
        assert!(product_distance(&p, &q, &dom).is_err());
    }

    #[test]
    fn dist_to_ball_complement_from_center() {
        let s = SetDescriptor::Complement {
            region: Region::Ball {
                center: vec![0.0, 0.0],
                radius: 1.0,
            },
        };
        let d = dist_to_set(&Point(vec![0.0, 0.0]), &s);
        assert_eq!(d, 1.0);
    }

    #[test]
    fn dist_to_set_zero_when_inside() {
        let s = SetDescriptor::Complement {
            region: Region::Ball {
                center: vec![0.0, 0.0],
                radius: 1.0,
            },
        };
        // Points outside the ball lie in the complement target.
        assert_eq!(dist_to_set(&Point(vec![2.0, 0.0]), &s), 0.0);
    }

    #[test]
    fn dist_to_unit_disk() {
        let s = SetDescriptor::Region {
            region: Region::Ball {
                center: vec![0.0, 0.0],
                radius: 1.0,
            },
        };
        let d = dist_to_set(&Point(vec![2.0, 0.0]), &s);
        assert!((d - 1.0).abs() < 1e-15);
    }

    #[test]
    fn empty_set_is_infinitely_far() {
        assert_eq!(dist_to_set(&Point(vec![0.0, 0.0]), &SetDescriptor::Empty), f64::INFINITY);
    }

    #[test]
    fn box_complement_distance_interior() {
        let r = Region::Box {
            min: vec![0.0, 0.0],
            max: vec![2.0, 1.0],
        };
        assert_eq!(r.dist_to_complement(&Point(vec![0.5, 0.5])), 0.5);
        assert_eq!(r.dist_to_complement(&Point(vec![3.0, 0.5])), 0.0);
    }
}
