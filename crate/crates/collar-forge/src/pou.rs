//! Quantitative Lipschitz partition of unity subordinate to a finite
//! cover of the base curve. Members shrink to V_alpha = {x in U_alpha :
//! dist(x, B \ U_alpha) > delta - delta0}; bumps are
//! f_alpha(x) = min(1, dist(x, B \ V_alpha)) and weights their
//! normalization. Distances to complements are exact, so bumps vanish
//! exactly outside the shrunken sets.

use crate::cover::Cover;
use crate::curve::ArcInterval;
use crate::error::{CollarError, Result};
use crate::metric::{MetricDomain, Point};

/// The shrunken set V_alpha, a sub-arc of its cover member.
#[derive(Clone, Debug, PartialEq)]
pub enum Shrunk {
    Whole,
    Arc(ArcInterval),
    Empty,
}

#[derive(Clone, Debug)]
pub struct PartitionOfUnity {
    pub cover: Cover,
    pub delta: f64,
    pub delta0: f64,
    pub shrunk: Vec<Shrunk>,
    pub order: usize,
    /// Lipschitz bound for a single weight over its member: (N-1)/delta0.
    pub l_member: f64,
    /// Global Lipschitz bound for weights and partial sums: N/delta0.
    pub l_sum: f64,
    dom: MetricDomain,
}

impl PartitionOfUnity {
    pub fn len(&self) -> usize {
        self.cover.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cover.is_empty()
    }

    pub fn domain(&self) -> &MetricDomain {
        &self.dom
    }

    /// The bump f_alpha(x) = min(1, dist(x, B \ V_alpha)).
    pub fn bump(&self, alpha: usize, p: &Point) -> f64 {
        match &self.shrunk[alpha] {
            Shrunk::Whole => 1.0,
            Shrunk::Empty => 0.0,
            Shrunk::Arc(arc) => {
                let d = self.dom.base.dist_to_arc_complement(p, arc);
                // Projection round-off can leave ~1e-16 residue for points
                // inside the complement; every point carries some bump of
                // size >= delta0, so snapping cannot create a gap.
                if d < 1e-12 {
                    0.0
                } else {
                    d.min(1.0)
                }
            }
        }
    }

    /// All normalized weights at a base point.
    pub fn weights(&self, p: &Point) -> Result<Vec<f64>> {
        let f: Vec<f64> = (0..self.len()).map(|a| self.bump(a, p)).collect();
        let total: f64 = f.iter().sum();
        if total <= 0.0 {
            return Err(CollarError::ShrunkenCoverGap(p.0.clone()));
        }
        Ok(f.into_iter().map(|v| v / total).collect())
    }

    pub fn weight(&self, alpha: usize, p: &Point) -> Result<f64> {
        Ok(self.weights(p)?[alpha])
    }

    /// Cumulative sums lambda_{Sigma,i} = lambda_1 + ... + lambda_i,
    /// indexed so that entry i holds the sum of the first i weights
    /// (entry 0 is 0, last entry is 1).
    pub fn cumulative(&self, p: &Point) -> Result<Vec<f64>> {
        let w = self.weights(p)?;
        let mut out = Vec::with_capacity(w.len() + 1);
        let mut acc = 0.0;
        out.push(0.0);
        for v in w {
            acc += v;
            out.push(acc);
        }
        Ok(out)
    }
}

/// Locate V_alpha = {s in member : dist(point_at(s), B \ U_alpha) > thr}
/// by a scan over the member window followed by bisection on the exact
/// distance predicate. For the convex base curves used here the set is a
/// single sub-arc.
fn find_shrunk(dom: &MetricDomain, member: &ArcInterval, thr: f64) -> Shrunk {
    let curve = &dom.base;
    let total = curve.total_len();
    if member.len >= total - 1e-12 {
        // V = B when the member is the whole curve (complement empty).
        return Shrunk::Whole;
    }
    let inside = |u: f64| {
        let s = curve.wrap_param(member.start + u);
        curve.dist_to_arc_complement(&curve.point_at(s), member) > thr
    };
    const K: usize = 512;
    let step = member.len / K as f64;
    let flags: Vec<bool> = (0..=K).map(|i| inside(i as f64 * step)).collect();
    let first = flags.iter().position(|f| *f);
    let first = match first {
        Some(i) => i,
        None => return Shrunk::Empty,
    };
    let last = flags.iter().rposition(|f| *f).unwrap();
    let bisect = |mut lo: f64, mut hi: f64, want_at_hi: bool| {
        for _ in 0..80 {
            let mid = 0.5 * (lo + hi);
            if inside(mid) == want_at_hi {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        0.5 * (lo + hi)
    };
    let u0 = if first == 0 {
        0.0
    } else {
        bisect((first - 1) as f64 * step, first as f64 * step, true)
    };
    let u1 = if last == K {
        member.len
    } else {
        bisect((last + 1) as f64 * step, last as f64 * step, true)
    };
    if u1 <= u0 {
        return Shrunk::Empty;
    }
    Shrunk::Arc(ArcInterval::new(
        curve.wrap_param(member.start + u0),
        u1 - u0,
    ))
}

/// Build the partition of unity for a cover with Lebesgue number `delta`
/// (caller-certified) and shrink margin `delta0`.
pub fn build_pou(
    cover: &Cover,
    delta: f64,
    delta0: f64,
    dom: &MetricDomain,
) -> Result<PartitionOfUnity> {
    if !(delta > 0.0) {
        return Err(CollarError::InvalidParameter(format!("delta = {delta}")));
    }
    if !(delta0 > 0.0 && delta0 < delta) {
        return Err(CollarError::InvalidParameter(format!(
            "delta0 = {delta0} not in (0, {delta})"
        )));
    }
    let thr = delta - delta0;
    let shrunk: Vec<Shrunk> = cover
        .members
        .iter()
        .map(|m| find_shrunk(dom, m, thr))
        .collect();
    let order = crate::cover::compute_order(cover, dom, 2000, 0)?;
    let pou = PartitionOfUnity {
        cover: cover.clone(),
        delta,
        delta0,
        shrunk,
        order,
        l_member: (order.saturating_sub(1)) as f64 / delta0,
        l_sum: order as f64 / delta0,
        dom: dom.clone(),
    };
    // The shrunken sets must still cover B: every sampled base point
    // needs a positive bump somewhere.
    for p in dom.base_sample(1000, 1) {
        pou.weights(&p)?;
    }
    let len = dom.base.total_len();
    for i in 0..=512 {
        let p = dom.base.point_at(len * i as f64 / 512.0);
        pou.weights(&p)?;
    }
    Ok(pou)
}
