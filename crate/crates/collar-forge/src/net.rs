//! Maximal tau-separated nets by greedy insertion over a dense candidate
//! sample, and the dimension-dependent constants of the covering chain.

use serde::{Deserialize, Serialize};

use crate::error::{CollarError, Result};
use crate::metric::{MetricDomain, Point};

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SeparatedNet {
    pub tau: f64,
    pub points: Vec<Point>,
}

impl SeparatedNet {
    /// Exact minimum pairwise distance (INFINITY for < 2 points).
    pub fn min_separation(&self, dom: &MetricDomain) -> f64 {
        let mut best = f64::INFINITY;
        for i in 0..self.points.len() {
            for j in (i + 1)..self.points.len() {
                best = best.min(dom.ambient_dist(&self.points[i], &self.points[j]));
            }
        }
        best
    }

    pub fn covering_radius_over(&self, dom: &MetricDomain, probes: &[Point]) -> f64 {
        probes
            .iter()
            .map(|p| {
                self.points
                    .iter()
                    .map(|q| dom.ambient_dist(p, q))
                    .fold(f64::INFINITY, f64::min)
            })
            .fold(0.0, f64::max)
    }
}

/// Candidate points for greedy insertion: an inclusive uniform parameter
/// grid swept in order, then low-discrepancy extras. The grid ordering
/// makes 1D outputs predictable (left to right).
pub fn net_candidates(dom: &MetricDomain, count: usize, seed: u64) -> Vec<Point> {
    let len = dom.base.total_len();
    let grid = count.max(8);
    let last = if dom.base.cyclic() { grid - 1 } else { grid };
    let mut out: Vec<Point> = (0..=last)
        .map(|i| dom.base.point_at(len * i as f64 / grid as f64))
        .collect();
    out.extend(dom.base_sample(count, seed));
    out
}

/// Greedy realization of a maximal tau-separated subset of B. Separation
/// is exact; maximality (covering radius <= tau) holds over the candidate
/// set by construction and is re-certified.
pub fn greedy_maximal_net(dom: &MetricDomain, tau: f64, seed: u64) -> Result<SeparatedNet> {
    if !(tau > 0.0) {
        return Err(CollarError::InvalidParameter(format!("tau = {tau}")));
    }
    if !dom
        .region_bounds
        .min
        .iter()
        .chain(&dom.region_bounds.max)
        .all(|v| v.is_finite())
    {
        return Err(CollarError::InvalidParameter(
            "unbounded region bounds".into(),
        ));
    }
    let candidates = net_candidates(dom, 3000, seed);
    let mut points: Vec<Point> = Vec::new();
    for c in &candidates {
        if points.iter().all(|p| dom.ambient_dist(p, c) >= tau) {
            points.push(c.clone());
        }
    }
    let net = SeparatedNet { tau, points };
    let radius = net.covering_radius_over(dom, &candidates);
    if radius > tau {
        return Err(CollarError::ValidationFailed {
            check: "net covering".into(),
            detail: format!("covering radius {radius} > tau {tau}"),
        });
    }
    Ok(net)
}

/// The quantitative constants of the dimension-n covering chain for a
/// collar constant C >= 1: net multiplicity N', cover order N, weight
/// Lipschitz constants L and L_Sigma, and interior margin zeta.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NetConstants {
    pub n_prime: f64,
    pub n_order: f64,
    pub l: f64,
    pub l_sigma: f64,
    pub zeta: f64,
}

pub fn net_constants(n: usize, c: f64) -> Result<NetConstants> {
    if n < 1 {
        return Err(CollarError::InvalidParameter("dimension must be >= 1".into()));
    }
    if !(c >= 1.0) {
        return Err(CollarError::InvalidParameter(format!(
            "collar constant {c} < 1"
        )));
    }
    let n_prime = 5f64.powi(n as i32);
    let n_order = (8.0 * c + 9.0).powi(n as i32);
    Ok(NetConstants {
        n_prime,
        n_order,
        l: 2.0 * (n_prime - 1.0),
        l_sigma: 2.0 * n_prime,
        zeta: 0.25 / c,
    })
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

    #[test]
    fn interval_unit_net_is_the_integers() {
        let net = greedy_maximal_net(&interval_dom(), 1.0, 0).unwrap();
        let coords: Vec<f64> = net.points.iter().map(|p| p.0[0]).collect();
        assert_eq!(coords, vec![0.0, 1.0, 2.0, 3.0]);
        assert!(net.min_separation(&interval_dom()) >= 1.0);
    }

    #[test]
    fn huge_tau_gives_single_point() {
        let net = greedy_maximal_net(&interval_dom(), 10.0, 0).unwrap();
        assert_eq!(net.points.len(), 1);
    }

    #[test]
    fn separation_is_exact_on_circle() {
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
        let net = greedy_maximal_net(&dom, 0.3, 5).unwrap();
        assert!(net.min_separation(&dom) >= 0.3);
        let probes = dom.base_sample(2000, 9);
        assert!(net.covering_radius_over(&dom, &probes) <= 0.3 + 1e-2);
    }

    #[test]
    fn net_constants_match_closed_forms() {
        let c1 = net_constants(1, 1.0).unwrap();
        assert_eq!(
            (c1.n_prime, c1.n_order, c1.l, c1.l_sigma, c1.zeta),
            (5.0, 17.0, 8.0, 10.0, 0.25)
        );
        let c2 = net_constants(2, 1.0).unwrap();
        assert_eq!(
            (c2.n_prime, c2.n_order, c2.l, c2.l_sigma, c2.zeta),
            (25.0, 289.0, 48.0, 50.0, 0.25)
        );
        let c3 = net_constants(1, 2.0).unwrap();
        assert_eq!(c3.zeta, 0.125);
        assert_eq!(c3.n_order, 25.0);
    }

    #[test]
    fn invalid_parameters_rejected() {
        assert!(net_constants(0, 1.0).is_err());
        assert!(net_constants(2, 0.5).is_err());
        assert!(greedy_maximal_net(&interval_dom(), 0.0, 0).is_err());
    }
}
