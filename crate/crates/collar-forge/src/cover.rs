//! Finite covers of the base set: Lebesgue-number and order estimation.
//! Members are relatively open subsets of B, stored as arc intervals of
//! the base curve so that distances to their complements within B are
//! exact.

use serde::{Deserialize, Serialize};

use crate::curve::ArcInterval;
use crate::error::{CollarError, Result};
use crate::metric::{MetricDomain, Point};
use crate::sampling;

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Cover {
    pub labels: Vec<String>,
    pub members: Vec<ArcInterval>,
}

impl Cover {
    pub fn new(labels: Vec<String>, members: Vec<ArcInterval>) -> Result<Self> {
        if labels.len() != members.len() {
            return Err(CollarError::InvalidParameter(format!(
                "{} labels for {} members",
                labels.len(),
                members.len()
            )));
        }
        if members.is_empty() {
            return Err(CollarError::NotACover("no members".into()));
        }
        Ok(Cover { labels, members })
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    /// Membership of a base parameter in member `alpha`.
    pub fn member_contains(&self, dom: &MetricDomain, alpha: usize, s: f64) -> bool {
        dom.base.arc_contains(&self.members[alpha], s)
    }

    /// Exact distance from a base point to `B \ U_alpha`.
    pub fn dist_to_member_complement(&self, dom: &MetricDomain, alpha: usize, p: &Point) -> f64 {
        dom.base.dist_to_arc_complement(p, &self.members[alpha])
    }

    fn covered(&self, dom: &MetricDomain, s: f64) -> bool {
        (0..self.len()).any(|a| self.member_contains(dom, a, s))
    }
}

/// Parameters probed by the sampled cover checks: a low-discrepancy set
/// plus an inclusive uniform grid (which pins down interval endpoints).
fn probe_params(dom: &MetricDomain, resolution: usize, seed: u64) -> Vec<f64> {
    let len = dom.base.total_len();
    let n = resolution.max(16);
    let mut params = sampling::sample_curve_params(&dom.base, n, seed);
    let grid = n.min(4096);
    for i in 0..=grid {
        params.push(len * i as f64 / grid as f64);
    }
    params
}

/// Largest `delta` from the geometric grid `{diam * 2^-k}` such that
/// every probed base point x has `B(x, delta) ∩ B` inside one member: a
/// certified-on-samples lower bound for the true Lebesgue number.
pub fn estimate_lebesgue(
    cover: &Cover,
    dom: &MetricDomain,
    resolution: usize,
    seed: u64,
) -> Result<f64> {
    let params = probe_params(dom, resolution, seed);
    // Per-sample largest admissible radius: max over members containing
    // the point of the exact distance to that member's complement.
    let mut min_radius = f64::INFINITY;
    for &s in &params {
        let p = dom.base.point_at(s);
        let mut best = 0.0f64;
        let mut hit = false;
        for a in 0..cover.len() {
            if cover.member_contains(dom, a, s) {
                hit = true;
                best = best.max(cover.dist_to_member_complement(dom, a, &p));
            }
        }
        if !hit {
            return Err(CollarError::NotACover(format!(
                "sampled base point {:?} lies in no member",
                p.0
            )));
        }
        min_radius = min_radius.min(best);
    }
    let delta_max = dom.region_bounds.diameter();
    if min_radius >= delta_max {
        return Ok(delta_max);
    }
    let mut delta = delta_max;
    for _ in 0..200 {
        if delta <= min_radius {
            return Ok(delta);
        }
        delta *= 0.5;
    }
    Err(CollarError::NotACover(
        "no positive Lebesgue number certified on the grid".into(),
    ))
}

/// Max over probed parameters of the number of members containing them.
pub fn compute_order_at(cover: &Cover, dom: &MetricDomain, params: &[f64]) -> usize {
    params
        .iter()
        .map(|&s| (0..cover.len()).filter(|&a| cover.member_contains(dom, a, s)).count())
        .max()
        .unwrap_or(0)
        .max(1)
}

pub fn compute_order(
    cover: &Cover,
    dom: &MetricDomain,
    samples: usize,
    seed: u64,
) -> Result<usize> {
    let params = probe_params(dom, samples, seed);
    for &s in &params {
        if !cover.covered(dom, s) {
            return Err(CollarError::NotACover(format!(
                "parameter {s} uncovered during order estimation"
            )));
        }
    }
    Ok(compute_order_at(cover, dom, &params))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curve::BaseCurve;
    use crate::metric::BoxBounds;

    fn interval_dom() -> MetricDomain {
        MetricDomain::euclidean(
            BaseCurve::Segment {
                a: Point(vec![0.0]),
                b: Point(vec![3.0]),
            },
            BoxBounds {
                min: vec![0.0],
                max: vec![3.0],
            },
        )
    }

    pub fn two_member_cover() -> Cover {
        Cover::new(
            vec!["U1".into(), "U2".into()],
            vec![ArcInterval::new(0.0, 2.0), ArcInterval::new(1.0, 2.0)],
        )
        .unwrap()
    }

    #[test]
    fn single_member_gives_diameter() {
        let dom = interval_dom();
        let cover = Cover::new(vec!["all".into()], vec![ArcInterval::new(0.0, 3.0)]).unwrap();
        let d = estimate_lebesgue(&cover, &dom, 500, 0).unwrap();
        assert_eq!(d, 3.0);
    }

    #[test]
    fn two_member_interval_cover_lebesgue() {
        let dom = interval_dom();
        let d = estimate_lebesgue(&two_member_cover(), &dom, 2000, 0).unwrap();
        // True Lebesgue number is 0.5 (binding at x = 1.5).
        assert!(d > 0.0 && d <= 0.5, "delta = {d}");
    }

    #[test]
    fn gap_is_not_a_cover() {
        let dom = interval_dom();
        let cover = Cover::new(
            vec!["a".into(), "b".into()],
            vec![ArcInterval::new(0.0, 1.0), ArcInterval::new(2.0, 1.0)],
        )
        .unwrap();
        assert!(matches!(
            estimate_lebesgue(&cover, &dom, 500, 0),
            Err(CollarError::NotACover(_))
        ));
    }

    #[test]
    fn order_of_two_member_cover_is_two() {
        let dom = interval_dom();
        assert_eq!(compute_order(&two_member_cover(), &dom, 1000, 0).unwrap(), 2);
        let single = Cover::new(vec!["all".into()], vec![ArcInterval::new(0.0, 3.0)]).unwrap();
        assert_eq!(compute_order(&single, &dom, 1000, 0).unwrap(), 1);
    }

    #[test]
    fn order_three_arcs_with_common_point_on_circle() {
        let dom = MetricDomain::euclidean(
            BaseCurve::Circle {
                center: Point(vec![0.0, 0.0]),
                radius: 1.0,
            },
            BoxBounds {
                min: vec![-1.0, -1.0],
                max: vec![1.0, 1.0],
            },
        );
        let len = dom.base.total_len();
        // Three arcs of 2/3 the circle each, all containing parameter 0.
        let cover = Cover::new(
            vec!["a".into(), "b".into(), "c".into()],
            vec![
                ArcInterval::new(0.0, 2.0 * len / 3.0),
                ArcInterval::new(len / 3.0, 2.0 * len / 3.0),
                ArcInterval::new(2.0 * len / 3.0, 2.0 * len / 3.0),
            ],
        )
        .unwrap();
        // The triple point is placed into the probe set explicitly.
        let mut params = sampling::sample_curve_params(&dom.base, 500, 0);
        params.push(0.0);
        assert_eq!(compute_order_at(&cover, &dom, &params), 3);
    }
}
