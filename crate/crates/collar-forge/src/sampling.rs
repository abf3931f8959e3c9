//! Deterministic low-discrepancy sampling. Halton sequences with a
//! seed-derived Cranley-Patterson rotation give reproducible, well-spread
//! samples whose determinism is bit-stable across platforms (everything
//! is integer arithmetic plus a fixed sequence of f64 operations).

use crate::curve::BaseCurve;
use crate::error::{CollarError, Result};
use crate::metric::{BoxBounds, Point, Region};

/// SplitMix64 step; the standard 64-bit mixer.
pub fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9E3779B97F4A7C15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58476D1CE4E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D049BB133111EB);
    z ^ (z >> 31)
}

/// Uniform f64 in [0,1) from a u64.
pub fn unit_f64(x: u64) -> f64 {
    (x >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

const PRIMES: [u64; 8] = [2, 3, 5, 7, 11, 13, 17, 19];

fn radical_inverse(mut i: u64, base: u64) -> f64 {
    let inv = 1.0 / base as f64;
    let mut result = 0.0;
    let mut f = inv;
    while i > 0 {
        result += (i % base) as f64 * f;
        i /= base;
        f *= inv;
    }
    result
}

/// Seeded Halton sampler over the unit cube.
pub struct Halton {
    dim: usize,
    index: u64,
    shift: Vec<f64>,
}

impl Halton {
    pub fn new(dim: usize, seed: u64) -> Self {
        assert!(dim <= PRIMES.len(), "Halton sampler limited to {} dims", PRIMES.len());
        let mut state = seed ^ 0xA076_1D64_78BD_642F;
        let shift = (0..dim).map(|_| unit_f64(splitmix64(&mut state))).collect();
        Halton {
            dim,
            // Skip the degenerate leading points of the raw sequence.
            index: 20,
            shift,
        }
    }

    pub fn next_point(&mut self) -> Vec<f64> {
        let i = self.index;
        self.index += 1;
        (0..self.dim)
            .map(|d| {
                let v = radical_inverse(i, PRIMES[d]) + self.shift[d];
                v - v.floor()
            })
            .collect()
    }
}

/// `count` low-discrepancy points in the box. Errors when the box has a
/// degenerate (zero-width) side.
pub fn sample_box(bounds: &BoxBounds, count: usize, seed: u64) -> Result<Vec<Point>> {
    let dim = bounds.min.len();
    for (lo, hi) in bounds.min.iter().zip(&bounds.max) {
        if !(hi > lo) {
            return Err(CollarError::DegenerateRegion(format!(
                "box side [{lo}, {hi}] has no volume"
            )));
        }
    }
    let mut h = Halton::new(dim, seed);
    Ok((0..count)
        .map(|_| {
            let u = h.next_point();
            Point(
                u.iter()
                    .zip(bounds.min.iter().zip(&bounds.max))
                    .map(|(t, (lo, hi))| lo + t * (hi - lo))
                    .collect(),
            )
        })
        .collect())
}

/// `count` points on the curve via its 1D arclength parameter.
pub fn sample_curve(curve: &BaseCurve, count: usize, seed: u64) -> Vec<Point> {
    sample_curve_params(curve, count, seed)
        .into_iter()
        .map(|s| curve.point_at(s))
        .collect()
}

/// The underlying parameters of `sample_curve`.
pub fn sample_curve_params(curve: &BaseCurve, count: usize, seed: u64) -> Vec<f64> {
    let len = curve.total_len();
    let mut h = Halton::new(1, seed);
    (0..count).map(|_| h.next_point()[0] * len).collect()
}

/// Low-discrepancy sample of a region by rejection from its bounding box.
///
/// For the measure-zero `circle` region the points are placed directly on
/// the circle at exact radius instead.
pub fn sample_region(region: &Region, count: usize, seed: u64) -> Result<Vec<Point>> {
    match region {
        Region::Circle { center, radius } => {
            let curve = BaseCurve::Circle {
                center: Point(center.clone()),
                radius: *radius,
            };
            Ok(sample_curve(&curve, count, seed))
        }
        Region::Polyline { vertices, closed } => {
            if !*closed {
                return Err(CollarError::Unsupported("sampling open polylines"));
            }
            let curve = BaseCurve::ClosedPolyline {
                vertices: vertices.iter().cloned().map(Point).collect(),
            };
            Ok(sample_curve(&curve, count, seed))
        }
        _ => {
            let bounds = region_bounding_box(region)?;
            let mut h = Halton::new(bounds.min.len(), seed);
            let mut out = Vec::with_capacity(count);
            let budget = count.saturating_mul(1000).max(10_000);
            for _ in 0..budget {
                if out.len() == count {
                    break;
                }
                let u = h.next_point();
                let p = Point(
                    u.iter()
                        .zip(bounds.min.iter().zip(&bounds.max))
                        .map(|(t, (lo, hi))| lo + t * (hi - lo))
                        .collect(),
                );
                if region.contains(&p) {
                    out.push(p);
                }
            }
            if out.len() < count {
                return Err(CollarError::DegenerateRegion(
                    "rejection sampling exhausted its budget".into(),
                ));
            }
            Ok(out)
        }
    }
}

fn region_bounding_box(region: &Region) -> Result<BoxBounds> {
    Ok(match region {
        Region::Box { min, max } => BoxBounds {
            min: min.clone(),
            max: max.clone(),
        },
        Region::Ball { center, radius } => BoxBounds {
            min: center.iter().map(|c| c - radius).collect(),
            max: center.iter().map(|c| c + radius).collect(),
        },
        Region::Circle { center, radius } => BoxBounds {
            min: center.iter().map(|c| c - radius).collect(),
            max: center.iter().map(|c| c + radius).collect(),
        },
        Region::Halfplane { .. } => {
            return Err(CollarError::Unsupported("sampling an unbounded halfplane"))
        }
        Region::Polyline { vertices, .. } => {
            let dim = vertices[0].len();
            let mut min = vec![f64::INFINITY; dim];
            let mut max = vec![f64::NEG_INFINITY; dim];
            for v in vertices {
                for d in 0..dim {
                    min[d] = min[d].min(v[d]);
                    max[d] = max[d].max(v[d]);
                }
            }
            BoxBounds { min, max }
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric::norm;

    #[test]
    fn splitmix_is_deterministic() {
        let mut a = 42u64;
        let mut b = 42u64;
        for _ in 0..10 {
            assert_eq!(splitmix64(&mut a), splitmix64(&mut b));
        }
    }

    #[test]
    fn sample_box_respects_bounds_and_seed() {
        let bounds = BoxBounds {
            min: vec![-1.0, 2.0],
            max: vec![1.0, 3.0],
        };
        let pts = sample_box(&bounds, 200, 7).unwrap();
        assert_eq!(pts.len(), 200);
        assert!(pts.iter().all(|p| bounds.contains(p)));
        let again = sample_box(&bounds, 200, 7).unwrap();
        assert_eq!(pts, again);
        let other = sample_box(&bounds, 200, 8).unwrap();
        assert_ne!(pts, other);
    }

    #[test]
    fn sample_box_zero_volume_errors() {
        let bounds = BoxBounds {
            min: vec![0.0, 1.0],
            max: vec![1.0, 1.0],
        };
        assert!(sample_box(&bounds, 10, 0).is_err());
    }

    #[test]
    fn circle_samples_sit_at_exact_radius() {
        let region = Region::Circle {
            center: vec![2.0, -1.0],
            radius: 3.0,
        };
        let pts = sample_region(&region, 4, 11).unwrap();
        assert_eq!(pts.len(), 4);
        for p in &pts {
            let r = norm(&[p.0[0] - 2.0, p.0[1] + 1.0]);
            assert!((r - 3.0).abs() < 1e-12, "radius {r}");
        }
    }

    #[test]
    fn ball_rejection_sampling_stays_inside() {
        let region = Region::Ball {
            center: vec![0.0, 0.0],
            radius: 1.0,
        };
        let pts = sample_region(&region, 100, 3).unwrap();
        assert!(pts.iter().all(|p| norm(&p.0) <= 1.0 + 1e-15));
    }

    #[test]
    fn halton_covers_the_unit_square_reasonably() {
        let mut h = Halton::new(2, 1);
        let mut quad = [0usize; 4];
        for _ in 0..400 {
            let p = h.next_point();
            let q = (p[0] >= 0.5) as usize * 2 + (p[1] >= 0.5) as usize;
            quad[q] += 1;
        }
        for &c in &quad {
            assert!(c > 60, "quadrant counts {quad:?}");
        }
    }
}
