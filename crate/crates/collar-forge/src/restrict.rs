//! Restriction of a local collar away from a closed set, and the merge
//! of collars with pairwise disjoint bases into one local collar.
//!
//! The cut function d is assembled from per-cell safe heights: each net
//! point on the base carries the largest height (found by bisection, with
//! a safety factor) whose whole fiber band over its double cell misses
//! the forbidden set; hat functions on the net blend the radii into a
//! Lipschitz function, and a value between two radii valid on
//! overlapping cells stays valid.

use std::sync::Arc;

use crate::charts::{Chart, ChartRef, CutFn, RestrictedChart, UnionChart};
use crate::curve::ArcInterval;
use crate::error::{CollarError, Result};
use crate::metric::{dist_to_set, MetricDomain, Point, SetDescriptor};

const HEIGHT_RESOLUTION: f64 = 1e-6;
const SAFETY: f64 = 0.95;

/// Largest t in (0,1] with c(x,s) outside A for all s <= t, up to the
/// bisection resolution. Returns 0 when even tiny heights enter A.
fn entry_height(chart: &dyn Chart, x: &Point, target: &SetDescriptor) -> Result<f64> {
    let blocked = |t: f64| -> Result<bool> {
        let y = chart.forward(x, t)?;
        Ok(dist_to_set(&y, target) <= 0.0)
    };
    const SCAN: usize = 64;
    let mut first_blocked = None;
    for k in 1..=SCAN {
        let t = k as f64 / SCAN as f64;
        if blocked(t)? {
            first_blocked = Some(k);
            break;
        }
    }
    let k = match first_blocked {
        None => return Ok(1.0),
        Some(k) => k,
    };
    let mut lo = (k - 1) as f64 / SCAN as f64;
    let mut hi = k as f64 / SCAN as f64;
    while hi - lo > HEIGHT_RESOLUTION {
        let mid = 0.5 * (lo + hi);
        if blocked(mid)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(lo)
}

struct CutProfile {
    arc: ArcInterval,
    radii: Vec<f64>,
}

impl CutProfile {
    fn eval(&self, u: f64) -> f64 {
        let n = self.radii.len();
        if n == 1 {
            return self.radii[0];
        }
        let h = self.arc.len / (n - 1) as f64;
        let s = (u / h).clamp(0.0, (n - 1) as f64);
        let i = (s.floor() as usize).min(n - 2);
        let frac = s - i as f64;
        self.radii[i] * (1.0 - frac) + self.radii[i + 1] * frac
    }
}

/// Restrict a collar chart so that its image avoids the closed set `A`.
pub fn restrict_collar(
    chart: ChartRef,
    a: &SetDescriptor,
    dom: &MetricDomain,
) -> Result<ChartRef> {
    if a.is_empty() {
        return Ok(chart);
    }
    let arcs = chart.base_arcs();
    // The closed set must stay clear of the base.
    for arc in &arcs {
        for k in 0..=256 {
            let s = dom
                .base
                .wrap_param(arc.start + arc.len * k as f64 / 256.0);
            if dist_to_set(&dom.base.point_at(s), a) <= 0.0 {
                return Err(CollarError::RegionTouchesBase);
            }
        }
    }
    let mut profiles = Vec::new();
    for arc in &arcs {
        const CELLS: usize = 64;
        const PER_CELL: usize = 8;
        let h = arc.len / CELLS as f64;
        let mut radii = Vec::with_capacity(CELLS + 1);
        for k in 0..=CELLS {
            let center = k as f64 * h;
            let lo = (center - h).max(0.0);
            let hi = (center + h).min(arc.len);
            let mut r = 1.0f64;
            for j in 0..=PER_CELL {
                let u = lo + (hi - lo) * j as f64 / PER_CELL as f64;
                let x = dom.base.point_at(dom.base.wrap_param(arc.start + u));
                r = r.min(entry_height(chart.as_ref(), &x, a)?);
            }
            let r = (r * SAFETY).min(1.0);
            if r <= 0.0 {
                return Err(CollarError::DegenerateRegion(format!(
                    "no positive collar height available near parameter {}",
                    arc.start + center
                )));
            }
            radii.push(r);
        }
        profiles.push(CutProfile { arc: *arc, radii });
    }
    let curve = dom.base.clone();
    let cut: CutFn = Arc::new(move |x: &Point| {
        let s = curve.param_of(x);
        for p in &profiles {
            if curve.arc_contains(&p.arc, s) {
                let u = if curve.cyclic() {
                    (s - p.arc.start).rem_euclid(curve.total_len())
                } else {
                    s - p.arc.start
                };
                return p.eval(u.clamp(0.0, p.arc.len));
            }
        }
        1.0
    });
    Ok(Arc::new(RestrictedChart { inner: chart, cut }))
}

/// Merge collars over pairwise disjoint bases into a single local collar
/// by restricting each image into its separating open region and
/// dispatching on base membership.
pub fn merge_discrete_collars(
    parts: Vec<(ChartRef, SetDescriptor)>,
    dom: &MetricDomain,
) -> Result<ChartRef> {
    if parts.is_empty() {
        return Err(CollarError::InvalidParameter("no collars to merge".into()));
    }
    if parts.len() == 1 {
        return Ok(parts.into_iter().next().unwrap().0);
    }
    // Base separation: positive gap between any two base arcs.
    let samples: Vec<Vec<Point>> = parts
        .iter()
        .map(|(c, _)| {
            c.base_arcs()
                .iter()
                .flat_map(|arc| {
                    (0..=64).map(|k| {
                        dom.base
                            .point_at(dom.base.wrap_param(arc.start + arc.len * k as f64 / 64.0))
                    })
                })
                .collect()
        })
        .collect();
    for i in 0..parts.len() {
        for j in (i + 1)..parts.len() {
            let gap = samples[i]
                .iter()
                .flat_map(|p| samples[j].iter().map(move |q| p.dist(q)))
                .fold(f64::INFINITY, f64::min);
            if gap <= 0.0 {
                return Err(CollarError::InvalidParameter(format!(
                    "bases {i} and {j} are not disjoint"
                )));
            }
            // The separating regions must not both claim a sampled point.
            for p in samples[i].iter().chain(&samples[j]) {
                if parts[i].1.contains(p) && parts[j].1.contains(p) {
                    return Err(CollarError::InvalidParameter(format!(
                        "separating regions {i} and {j} overlap at {:?}",
                        p.0
                    )));
                }
            }
        }
    }
    // Each base must sit inside its own separating region.
    for (k, (_, o)) in parts.iter().enumerate() {
        if !samples[k].iter().all(|p| o.contains(p)) {
            return Err(CollarError::InvalidParameter(format!(
                "separating region {k} does not contain its base"
            )));
        }
    }
    let mut restricted = Vec::with_capacity(parts.len());
    for (chart, o) in parts {
        // Keep the image inside O by restricting away from its complement.
        let forbidden = match &o {
            SetDescriptor::Region { region } => SetDescriptor::Complement {
                region: region.clone(),
            },
            SetDescriptor::Complement { region } => SetDescriptor::Region {
                region: region.clone(),
            },
            _ => {
                return Err(CollarError::Unsupported(
                    "separating regions must be analytic",
                ))
            }
        };
        restricted.push(restrict_collar(chart, &forbidden, dom)?);
    }
    Ok(Arc::new(UnionChart::new(restricted, dom.base.clone())))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::charts::AffineStripChart;
    use crate::curve::BaseCurve;
    use crate::metric::{BoxBounds, Region};

    fn strip_dom() -> MetricDomain {
        MetricDomain::euclidean(
            BaseCurve::Segment {
                a: Point(vec![0.0, 0.0]),
                b: Point(vec![3.0, 0.0]),
            },
            BoxBounds {
                min: vec![-0.5, -0.5],
                max: vec![3.5, 1.5],
            },
        )
    }

    fn vertical(arc: ArcInterval, dom: &MetricDomain) -> ChartRef {
        Arc::new(AffineStripChart::new(&dom.base, arc, [0.0, 1.0]).unwrap())
    }

    #[test]
    fn empty_set_leaves_collar_unchanged() {
        let dom = strip_dom();
        let c = vertical(ArcInterval::new(0.0, 3.0), &dom);
        let r = restrict_collar(c.clone(), &SetDescriptor::Empty, &dom).unwrap();
        let x = Point(vec![1.0, 0.0]);
        assert_eq!(
            r.forward(&x, 0.7).unwrap(),
            c.forward(&x, 0.7).unwrap()
        );
    }

    #[test]
    fn halfplane_restriction_keeps_images_below() {
        let dom = strip_dom();
        let c = vertical(ArcInterval::new(0.0, 3.0), &dom);
        let a = SetDescriptor::Region {
            region: Region::Halfplane {
                normal: vec![0.0, 1.0],
                offset: 0.5,
            },
        };
        let r = restrict_collar(c, &a, &dom).unwrap();
        for p in dom.base_sample(200, 2) {
            for t in [0.25, 0.5, 0.75, 1.0] {
                let y = r.forward(&p, t).unwrap();
                assert!(y.0[1] < 0.5, "image {:?} at t={t}", y.0);
            }
            let y0 = r.forward(&p, 0.0).unwrap();
            assert!(y0.dist(&p) < 1e-12);
        }
    }

    #[test]
    fn set_touching_base_is_rejected() {
        let dom = strip_dom();
        let c = vertical(ArcInterval::new(0.0, 3.0), &dom);
        let a = SetDescriptor::Region {
            region: Region::Ball {
                center: vec![1.5, 0.0],
                radius: 0.1,
            },
        };
        assert!(matches!(
            restrict_collar(c, &a, &dom),
            Err(CollarError::RegionTouchesBase)
        ));
    }

    #[test]
    fn merged_collar_dispatches_piecewise() {
        let dom = strip_dom();
        let c1 = vertical(ArcInterval::new(0.0, 1.0), &dom);
        let c2 = vertical(ArcInterval::new(2.0, 1.0), &dom);
        let o1 = SetDescriptor::Region {
            region: Region::Box {
                min: vec![-0.2, -0.2],
                max: vec![1.2, 1.2],
            },
        };
        let o2 = SetDescriptor::Region {
            region: Region::Box {
                min: vec![1.8, -0.2],
                max: vec![3.2, 1.2],
            },
        };
        let merged = merge_discrete_collars(vec![(c1, o1), (c2, o2)], &dom).unwrap();
        let left = merged.forward(&Point(vec![0.5, 0.0]), 1.0).unwrap();
        assert!((left.0[0] - 0.5).abs() < 1e-12 && left.0[1] > 0.5);
        assert!(left.0[1] <= 1.2);
        let right = merged.forward(&Point(vec![2.5, 0.0]), 0.5).unwrap();
        assert!((right.0[0] - 2.5).abs() < 1e-12 && right.0[1] > 0.0);
        assert!(matches!(
            merged.forward(&Point(vec![1.5, 0.0]), 0.5),
            Err(CollarError::OutsideBase(_))
        ));
    }

    #[test]
    fn overlapping_bases_rejected() {
        let dom = strip_dom();
        let c1 = vertical(ArcInterval::new(0.0, 2.0), &dom);
        let c2 = vertical(ArcInterval::new(1.0, 2.0), &dom);
        let o = SetDescriptor::Region {
            region: Region::Box {
                min: vec![-1.0, -1.0],
                max: vec![4.0, 2.0],
            },
        };
        assert!(merge_discrete_collars(vec![(c1, o.clone()), (c2, o)], &dom).is_err());
    }
}
