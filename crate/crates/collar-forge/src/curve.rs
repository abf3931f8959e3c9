//! Arclength-parametrized base curves realizing the closed set B, and
//! exact Euclidean distances to sub-arcs. Cover members and collar bases
//! are arc intervals in the curve parameter, so distances to complements
//! of members reduce to distances to finite unions of segments or
//! circular arcs, which are exact.

use serde::{Deserialize, Serialize};

use crate::error::{CollarError, Result};
use crate::metric::{dot, norm, point_segment_dist, Point};

const TAU: f64 = std::f64::consts::TAU;

/// A parameter interval `[start, start + len]` on a curve. On cyclic
/// curves the interval wraps modulo the total length. `len` equal to the
/// total length denotes the whole curve.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ArcInterval {
    pub start: f64,
    pub len: f64,
}

impl ArcInterval {
    pub fn new(start: f64, len: f64) -> Self {
        ArcInterval { start, len }
    }

    pub fn end(&self) -> f64 {
        self.start + self.len
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub enum BaseCurve {
    /// Straight segment from `a` to `b`; parameter is arclength from `a`.
    Segment { a: Point, b: Point },
    /// Circle; parameter is arclength CCW from angle 0.
    Circle { center: Point, radius: f64 },
    /// Closed polygonal loop; parameter is arclength from `vertices[0]`.
    ClosedPolyline { vertices: Vec<Point> },
}

impl BaseCurve {
    pub fn dim(&self) -> usize {
        match self {
            BaseCurve::Segment { a, .. } => a.dim(),
            BaseCurve::Circle { center, .. } => center.dim(),
            BaseCurve::ClosedPolyline { vertices } => vertices[0].dim(),
        }
    }

    pub fn cyclic(&self) -> bool {
        !matches!(self, BaseCurve::Segment { .. })
    }

    pub fn total_len(&self) -> f64 {
        match self {
            BaseCurve::Segment { a, b } => a.dist(b),
            BaseCurve::Circle { radius, .. } => TAU * radius,
            BaseCurve::ClosedPolyline { vertices } => {
                let n = vertices.len();
                (0..n).map(|i| vertices[i].dist(&vertices[(i + 1) % n])).sum()
            }
        }
    }

    /// Wrap a parameter into `[0, L)` on cyclic curves; clamp on segments.
    pub fn wrap_param(&self, s: f64) -> f64 {
        let len = self.total_len();
        if self.cyclic() {
            let r = s.rem_euclid(len);
            if r == len {
                0.0
            } else {
                r
            }
        } else {
            s.clamp(0.0, len)
        }
    }

    /// Signed cyclic difference `s - t`, mapped into `(-L/2, L/2]` on
    /// cyclic curves.
    pub fn signed_param_diff(&self, s: f64, t: f64) -> f64 {
        if !self.cyclic() {
            return s - t;
        }
        let len = self.total_len();
        let mut d = (s - t).rem_euclid(len);
        if d > len / 2.0 {
            d -= len;
        }
        d
    }

    pub fn point_at(&self, s: f64) -> Point {
        let s = self.wrap_param(s);
        match self {
            BaseCurve::Segment { a, b } => {
                let len = a.dist(b);
                let dir = b.sub(a);
                a.add_scaled(&dir, s / len)
            }
            BaseCurve::Circle { center, radius } => {
                let th = s / radius;
                Point(vec![
                    center.0[0] + radius * th.cos(),
                    center.0[1] + radius * th.sin(),
                ])
            }
            BaseCurve::ClosedPolyline { vertices } => {
                let n = vertices.len();
                let mut rem = s;
                for i in 0..n {
                    let a = &vertices[i];
                    let b = &vertices[(i + 1) % n];
                    let l = a.dist(b);
                    if rem <= l || i == n - 1 {
                        let dir = b.sub(a);
                        return a.add_scaled(&dir, (rem / l).min(1.0));
                    }
                    rem -= l;
                }
                unreachable!()
            }
        }
    }

    /// Parameter of the point on the curve nearest to `p`.
    pub fn param_of(&self, p: &Point) -> f64 {
        match self {
            BaseCurve::Segment { a, b } => {
                let len = a.dist(b);
                let dir: Vec<f64> = b.sub(a);
                let t = dot(&p.sub(a), &dir) / (len * len);
                (t * len).clamp(0.0, len)
            }
            BaseCurve::Circle { center, radius } => {
                let d = p.sub(center);
                let th = d[1].atan2(d[0]).rem_euclid(TAU);
                self.wrap_param(th * radius)
            }
            BaseCurve::ClosedPolyline { vertices } => {
                let n = vertices.len();
                let mut best = (f64::INFINITY, 0.0);
                let mut cum = 0.0;
                for i in 0..n {
                    let a = &vertices[i];
                    let b = &vertices[(i + 1) % n];
                    let l = a.dist(b);
                    let dir: Vec<f64> = b.sub(a);
                    let t = (dot(&p.sub(a), &dir) / (l * l)).clamp(0.0, 1.0);
                    let q = a.add_scaled(&dir, t);
                    let d = p.dist(&q);
                    if d < best.0 {
                        best = (d, cum + t * l);
                    }
                    cum += l;
                }
                self.wrap_param(best.1)
            }
        }
    }

    pub fn dist_to_curve(&self, p: &Point) -> f64 {
        match self {
            BaseCurve::Segment { a, b } => point_segment_dist(&p.0, &a.0, &b.0),
            BaseCurve::Circle { center, radius } => (norm(&p.sub(center)) - radius).abs(),
            BaseCurve::ClosedPolyline { vertices } => {
                let n = vertices.len();
                (0..n)
                    .map(|i| point_segment_dist(&p.0, &vertices[i].0, &vertices[(i + 1) % n].0))
                    .fold(f64::INFINITY, f64::min)
            }
        }
    }

    /// Does the closed arc contain the parameter `s`?
    pub fn arc_contains(&self, arc: &ArcInterval, s: f64) -> bool {
        let len = self.total_len();
        if arc.len >= len - 1e-12 {
            return true;
        }
        if self.cyclic() {
            let d = (s - arc.start).rem_euclid(len);
            d <= arc.len + 1e-12 || d >= len - 1e-12
        } else {
            s >= arc.start - 1e-12 && s <= arc.end() + 1e-12
        }
    }

    /// Exact Euclidean distance from `p` to the closed sub-arc.
    pub fn dist_to_arc(&self, p: &Point, arc: &ArcInterval) -> f64 {
        let len = self.total_len();
        if arc.len >= len - 1e-12 {
            return self.dist_to_curve(p);
        }
        match self {
            BaseCurve::Segment { .. } => {
                let a = self.point_at(arc.start);
                let b = self.point_at(arc.end().min(len));
                point_segment_dist(&p.0, &a.0, &b.0)
            }
            BaseCurve::Circle { center, radius } => {
                // Clamp the angular coordinate of p into the arc range.
                let sp = self.param_of(p);
                let d = (sp - arc.start).rem_euclid(len);
                if d <= arc.len {
                    (norm(&p.sub(center)) - radius).abs()
                } else {
                    let e0 = self.point_at(arc.start);
                    let e1 = self.point_at(arc.end());
                    p.dist(&e0).min(p.dist(&e1))
                }
            }
            BaseCurve::ClosedPolyline { .. } => self
                .arc_segments(arc)
                .iter()
                .map(|(a, b)| point_segment_dist(&p.0, &a.0, &b.0))
                .fold(f64::INFINITY, f64::min),
        }
    }

    /// Realize a sub-arc of a polyline as segments (splitting at vertices).
    fn arc_segments(&self, arc: &ArcInterval) -> Vec<(Point, Point)> {
        let vertices = match self {
            BaseCurve::ClosedPolyline { vertices } => vertices,
            _ => unreachable!(),
        };
        let n = vertices.len();
        let mut cuts = vec![0.0];
        let mut cum = 0.0;
        for i in 0..n {
            cum += vertices[i].dist(&vertices[(i + 1) % n]);
            cuts.push(cum);
        }
        let total = cum;
        // Walk from arc.start over at most arc.len of arclength.
        let mut out = Vec::new();
        let mut s = arc.start.rem_euclid(total);
        let mut remaining = arc.len.min(total);
        while remaining > 1e-15 {
            // Edge containing s.
            let mut idx = 0;
            for i in 0..n {
                if s >= cuts[i] - 1e-15 && s < cuts[i + 1] - 1e-15 {
                    idx = i;
                    break;
                }
                if i == n - 1 {
                    idx = n - 1;
                }
            }
            let edge_end = cuts[idx + 1];
            let step = (edge_end - s).min(remaining).max(1e-15);
            out.push((self.point_at(s), self.point_at(s + step)));
            s = self.wrap_param(s + step);
            remaining -= step;
            if out.len() > 4 * n + 4 {
                break; // numerical safety
            }
        }
        out
    }

    /// Complement of a sub-arc within the curve, as closed arcs.
    pub fn complement_arcs(&self, arc: &ArcInterval) -> Vec<ArcInterval> {
        let len = self.total_len();
        if arc.len >= len - 1e-12 {
            return Vec::new();
        }
        if self.cyclic() {
            vec![ArcInterval::new(self.wrap_param(arc.end()), len - arc.len)]
        } else {
            let mut out = Vec::new();
            if arc.start > 1e-15 {
                out.push(ArcInterval::new(0.0, arc.start));
            }
            if arc.end() < len - 1e-15 {
                out.push(ArcInterval::new(arc.end(), len - arc.end()));
            }
            out
        }
    }

    /// Exact distance from `p` to the complement of `arc` within the
    /// curve; `INFINITY` when the arc is the whole curve.
    pub fn dist_to_arc_complement(&self, p: &Point, arc: &ArcInterval) -> f64 {
        self.complement_arcs(arc)
            .iter()
            .map(|a| self.dist_to_arc(p, a))
            .fold(f64::INFINITY, f64::min)
    }

    /// Convert a region intersected with the curve into an arc interval,
    /// refining the endpoints by bisection on the exact membership
    /// predicate. Errors when the intersection is empty.
    pub fn arc_from_region(&self, region: &crate::metric::Region, scan: usize) -> Result<ArcInterval> {
        let len = self.total_len();
        let n = scan.max(16);
        let inside = |s: f64| region.contains(&self.point_at(s));
        let flags: Vec<bool> = (0..n).map(|i| inside(len * i as f64 / n as f64)).collect();
        if flags.iter().all(|f| *f) {
            return Ok(ArcInterval::new(0.0, len));
        }
        if flags.iter().all(|f| !*f) {
            return Err(CollarError::DegenerateRegion(
                "region does not meet the base curve on the scan grid".into(),
            ));
        }
        // Find a false->true transition for the start.
        let step = len / n as f64;
        let mut start_idx = None;
        for i in 0..n {
            let prev = flags[(i + n - 1) % n];
            if !prev && flags[i] {
                start_idx = Some(i);
                break;
            }
        }
        let i0 = start_idx.ok_or_else(|| {
            CollarError::DegenerateRegion("no membership transition found".into())
        })?;
        let refine = |mut lo: f64, mut hi: f64, want_inside_at_hi: bool| {
            for _ in 0..90 {
                let mid = 0.5 * (lo + hi);
                if inside(self.wrap_param(mid)) == want_inside_at_hi {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            0.5 * (lo + hi)
        };
        let s_start = refine((i0 as f64 - 1.0) * step, i0 as f64 * step, true);
        // Walk forward to the true->false transition.
        let mut j = i0;
        let mut count = 0;
        while flags[(j + 1) % n] && count < n {
            j = (j + 1) % n;
            count += 1;
        }
        let s_end = refine(j as f64 * step, (j as f64 + 1.0) * step, false);
        let arc_len = if self.cyclic() {
            (s_end - s_start).rem_euclid(len)
        } else {
            s_end - s_start
        };
        Ok(ArcInterval::new(self.wrap_param(s_start), arc_len))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn seg() -> BaseCurve {
        BaseCurve::Segment {
            a: Point(vec![0.0]),
            b: Point(vec![3.0]),
        }
    }

    #[test]
    fn segment_params_roundtrip() {
        let c = seg();
        assert_eq!(c.total_len(), 3.0);
        let p = c.point_at(1.5);
        assert_eq!(p.0[0], 1.5);
        assert_eq!(c.param_of(&p), 1.5);
    }

    #[test]
    fn segment_arc_complement_distance() {
        let c = seg();
        // U = [0, 2): complement [2, 3].
        let arc = ArcInterval::new(0.0, 2.0);
        let d = c.dist_to_arc_complement(&Point(vec![0.5]), &arc);
        assert!((d - 1.5).abs() < 1e-15);
        assert_eq!(c.dist_to_arc_complement(&Point(vec![2.5]), &arc), 0.0);
    }

    #[test]
    fn full_arc_complement_is_empty() {
        let c = seg();
        let arc = ArcInterval::new(0.0, 3.0);
        assert!(c.complement_arcs(&arc).is_empty());
        assert_eq!(
            c.dist_to_arc_complement(&Point(vec![1.0]), &arc),
            f64::INFINITY
        );
    }

    #[test]
    fn circle_arc_distance() {
        let c = BaseCurve::Circle {
            center: Point(vec![0.0, 0.0]),
            radius: 1.0,
        };
        // Quarter arc from angle 0 to pi/2.
        let arc = ArcInterval::new(0.0, std::f64::consts::FRAC_PI_2);
        let p = c.point_at(std::f64::consts::PI); // (-1, 0)
        // Nearest arc point is (0,1): chord sqrt(2).
        assert!((c.dist_to_arc(&p, &arc) - 2f64.sqrt()).abs() < 1e-12);
        let q = c.point_at(0.3);
        assert!(c.dist_to_arc(&q, &arc) < 1e-12);
    }

    #[test]
    fn polyline_square_params() {
        let c = BaseCurve::ClosedPolyline {
            vertices: vec![
                Point(vec![1.0, -1.0]),
                Point(vec![1.0, 1.0]),
                Point(vec![-1.0, 1.0]),
                Point(vec![-1.0, -1.0]),
            ],
        };
        assert_eq!(c.total_len(), 8.0);
        let p = c.point_at(1.0);
        assert!((p.0[0] - 1.0).abs() < 1e-15 && p.0[1].abs() < 1e-15);
        assert!((c.param_of(&p) - 1.0).abs() < 1e-12);
        // Wrap-around arc across the starting corner.
        let arc = ArcInterval::new(7.0, 2.0);
        assert!(c.arc_contains(&arc, 0.5));
        assert!(!c.arc_contains(&arc, 3.0));
    }

    #[test]
    fn arc_from_region_on_segment() {
        let c = BaseCurve::Segment {
            a: Point(vec![0.0, 0.0]),
            b: Point(vec![3.0, 0.0]),
        };
        let r = crate::metric::Region::Ball {
            center: vec![1.0, 0.0],
            radius: 0.5,
        };
        let arc = c.arc_from_region(&r, 256).unwrap();
        assert!((arc.start - 0.5).abs() < 1e-9);
        assert!((arc.len - 1.0).abs() < 1e-9);
    }
}
