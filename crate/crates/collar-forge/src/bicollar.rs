//! Two-sided collars: orientation against a side predicate, gluing of
//! one-sided components, the epsilon restriction that makes the glued
//! map bi-Lipschitz, and the midpoint criterion.

use std::sync::Arc;

use crate::charts::{Chart, ChartRef, HalfChart, Side};
use crate::curve::ArcInterval;
use crate::error::{CollarError, Result};
use crate::estimator::{collar_pairs, estimate_constant, Direction, PairConfig, Witness};
use crate::metric::{CollarPoint, MetricDomain, Point};
use crate::sampling::Halton;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SideLabel {
    Plus,
    Minus,
    Base,
}

pub type SidePredicate = Arc<dyn Fn(&Point) -> SideLabel + Send + Sync>;

#[derive(Clone)]
pub struct Bicollar {
    pub chart: ChartRef,
    pub side: SidePredicate,
}

impl Bicollar {
    pub fn new(chart: ChartRef, side: SidePredicate) -> Result<Self> {
        if chart.height_range() != (-1.0, 1.0) {
            return Err(CollarError::InvalidParameter(
                "bicollar chart must span heights [-1, 1]".into(),
            ));
        }
        Ok(Bicollar { chart, side })
    }

    pub fn plus(&self) -> ChartRef {
        Arc::new(HalfChart::new(self.chart.clone(), Side::Plus))
    }

    pub fn minus(&self) -> ChartRef {
        Arc::new(HalfChart::new(self.chart.clone(), Side::Minus))
    }

    pub fn forward(&self, x: &Point, t: f64) -> Result<Point> {
        self.chart.forward(x, t)
    }
}

/// Height flip applied fiberwise where a probe lands on the wrong side.
struct OrientedChart {
    inner: ChartRef,
    side: SidePredicate,
    probe_height: f64,
}

impl OrientedChart {
    fn flipped(&self, x: &Point) -> Result<bool> {
        let y = self.inner.forward(x, self.probe_height)?;
        Ok((self.side)(&y) == SideLabel::Minus)
    }
}

impl Chart for OrientedChart {
    fn forward(&self, x: &Point, t: f64) -> Result<Point> {
        let t = if self.flipped(x)? { -t } else { t };
        self.inner.forward(x, t)
    }

    fn inverse(&self, y: &Point) -> Result<CollarPoint> {
        let mut p = self.inner.inverse(y)?;
        if self.flipped(&p.base)? {
            p.height = -p.height;
        }
        Ok(p)
    }

    fn in_image(&self, y: &Point) -> bool {
        self.inner.in_image(y)
    }

    fn base_arcs(&self) -> Vec<ArcInterval> {
        self.inner.base_arcs()
    }

    fn height_range(&self) -> (f64, f64) {
        (-1.0, 1.0)
    }

    fn declared(&self) -> crate::charts::Declared {
        self.inner.declared()
    }
}

fn chart_base_samples(dom: &MetricDomain, chart: &dyn Chart, per_arc: usize, seed: u64) -> Vec<Point> {
    let mut out = Vec::new();
    for (k, arc) in chart.base_arcs().iter().enumerate() {
        let mut h = Halton::new(1, seed ^ (k as u64 + 1).wrapping_mul(0x9e37));
        for _ in 0..per_arc {
            let s = dom.base.wrap_param(arc.start + h.next_point()[0] * arc.len);
            out.push(dom.base.point_at(s));
        }
    }
    out
}

/// Reorient a raw bicollar chart so positive heights land on the plus
/// side. Fibers that cross sides are rejected.
pub fn orient_bicollar(
    raw: ChartRef,
    side: SidePredicate,
    dom: &MetricDomain,
) -> Result<Bicollar> {
    // Each sampled fiber must stay on one side for positive heights.
    for x in chart_base_samples(dom, raw.as_ref(), 120, 0x0eee) {
        let mut seen: Option<SideLabel> = None;
        for t in [0.05, 0.25, 0.5, 0.75, 1.0] {
            let y = raw.forward(&x, t)?;
            let lab = side(&y);
            if lab == SideLabel::Base {
                continue;
            }
            match seen {
                None => seen = Some(lab),
                Some(prev) if prev != lab => {
                    return Err(CollarError::NotTwoSided(x.0.clone()))
                }
                _ => {}
            }
        }
    }
    let oriented = OrientedChart {
        inner: raw,
        side: side.clone(),
        probe_height: 0.5,
    };
    Bicollar::new(Arc::new(oriented), side)
}

/// Glue one-sided collars into a bicollar:
/// c(x,t) = c_plus(x,t) for t >= 0, c_minus(x,-t) for t < 0.
struct GluedChart {
    plus: ChartRef,
    minus: ChartRef,
}

impl Chart for GluedChart {
    fn forward(&self, x: &Point, t: f64) -> Result<Point> {
        if t >= 0.0 {
            self.plus.forward(x, t)
        } else {
            self.minus.forward(x, -t)
        }
    }

    fn inverse(&self, y: &Point) -> Result<CollarPoint> {
        if self.plus.in_image(y) {
            return self.plus.inverse(y);
        }
        let mut p = self.minus.inverse(y)?;
        p.height = -p.height;
        Ok(p)
    }

    fn in_image(&self, y: &Point) -> bool {
        self.plus.in_image(y) || self.minus.in_image(y)
    }

    fn base_arcs(&self) -> Vec<ArcInterval> {
        self.plus.base_arcs()
    }

    fn height_range(&self) -> (f64, f64) {
        (-1.0, 1.0)
    }
}

pub fn glue_bicollar(
    c_plus: ChartRef,
    c_minus: ChartRef,
    side: SidePredicate,
    dom: &MetricDomain,
) -> Result<Bicollar> {
    for chart in [&c_plus, &c_minus] {
        if chart.height_range() != (0.0, 1.0) {
            return Err(CollarError::InvalidParameter(
                "glue components must be one-sided collars".into(),
            ));
        }
    }
    // Shared base: both components must restrict to the identity on the
    // same sampled base points.
    for x in chart_base_samples(dom, c_plus.as_ref(), 120, 0x91e) {
        let yp = c_plus.forward(&x, 0.0)?;
        let ym = c_minus.forward(&x, 0.0).map_err(|_| {
            CollarError::InconsistentFixture(format!("bases differ near {:?}", x.0))
        })?;
        if yp.dist(&x) > 1e-10 || ym.dist(&x) > 1e-10 {
            return Err(CollarError::InconsistentFixture(format!(
                "component does not fix the base at {:?}",
                x.0
            )));
        }
    }
    Bicollar::new(
        Arc::new(GluedChart {
            plus: c_plus,
            minus: c_minus,
        }),
        side,
    )
}

/// Which admissibility condition produced the epsilon.
#[derive(Clone, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct EpsilonResult {
    pub eps: f64,
    pub binding: String,
}

/// eps = min(1, delta/(L iL_max), delta/(4 L)).
pub fn bicollar_epsilon(l_c: f64, il_alpha_max: f64, delta: f64) -> Result<EpsilonResult> {
    if !(l_c > 0.0 && il_alpha_max > 0.0 && delta > 0.0) {
        return Err(CollarError::InvalidParameter(
            "epsilon inputs must be positive".into(),
        ));
    }
    if delta > 1.0 + 1e-12 {
        // The separation scale cannot exceed the height range; clamp
        // rather than reject so oversized inputs degrade gracefully.
    }
    let a = delta / (l_c * il_alpha_max);
    let b = delta / (4.0 * l_c);
    let (eps, binding) = if 1.0 <= a && 1.0 <= b {
        (1.0, "unit cap")
    } else if a <= b {
        (a, "inversion condition L iL eps <= delta")
    } else {
        (b, "margin condition 4 L eps <= delta")
    };
    Ok(EpsilonResult {
        eps,
        binding: binding.into(),
    })
}

/// Bicollar restricted to heights [-eps, eps], with the declared inverse
/// bound evaluated both verbatim (reciprocal factor) and with the factor
/// replaced by the product constant itself.
pub struct RestrictedBicollar {
    pub chart: ChartRef,
    pub eps: f64,
    pub il_bound_verbatim: f64,
    pub il_bound_alternate: f64,
}

struct EpsChart {
    inner: ChartRef,
    eps: f64,
}

impl Chart for EpsChart {
    fn forward(&self, x: &Point, t: f64) -> Result<Point> {
        if t.abs() > self.eps + 1e-12 {
            return Err(CollarError::InvalidParameter(format!(
                "height {t} outside [-{0}, {0}]",
                self.eps
            )));
        }
        self.inner.forward(x, t)
    }

    fn inverse(&self, y: &Point) -> Result<CollarPoint> {
        let p = self.inner.inverse(y)?;
        if p.height.abs() > self.eps + 1e-12 {
            return Err(CollarError::InversionFailed {
                residual: p.height.abs() - self.eps,
            });
        }
        Ok(p)
    }

    fn in_image(&self, y: &Point) -> bool {
        match self.inner.inverse(y) {
            Ok(p) => p.height.abs() <= self.eps + 1e-12,
            Err(_) => false,
        }
    }

    fn base_arcs(&self) -> Vec<ArcInterval> {
        self.inner.base_arcs()
    }

    fn height_range(&self) -> (f64, f64) {
        (-self.eps, self.eps)
    }
}

/// Constants feeding the restriction bound.
#[derive(Clone, Copy, Debug)]
pub struct RestrictionConstants {
    pub l_c: f64,
    pub il_plus: f64,
    pub il_minus: f64,
    /// max over local charts of bL(c_alpha).
    pub bl_alpha_max: f64,
    /// max over local charts of 1/bL(c_alpha).
    pub bl_alpha_recip_max: f64,
    pub delta: f64,
}

pub fn restrict_bicollar(
    bi: &Bicollar,
    eps: f64,
    k: &RestrictionConstants,
    il_alpha_max: f64,
) -> Result<RestrictedBicollar> {
    let max_eps = bicollar_epsilon(k.l_c, il_alpha_max, k.delta)?.eps;
    if eps > max_eps + 1e-12 {
        return Err(CollarError::EpsilonTooLarge { eps, max: max_eps });
    }
    let factor = 2.0 * (1.0 + 2.0 * eps / k.delta) * k.il_plus.max(k.il_minus);
    Ok(RestrictedBicollar {
        chart: Arc::new(EpsChart {
            inner: bi.chart.clone(),
            eps,
        }),
        eps,
        il_bound_verbatim: factor * k.bl_alpha_recip_max,
        il_bound_alternate: factor * k.bl_alpha_max,
    })
}

/// Outcome of the pasting estimate: one-sided constants measured with the
/// projections of every cross-side pair included, so the glued estimate
/// is dominated by construction.
pub struct PastingCheck {
    pub l_glued: f64,
    pub l_plus: f64,
    pub l_minus: f64,
    pub witness: Witness,
    pub cross_pairs: usize,
}

pub fn pasting_check(
    bi: &Bicollar,
    dom: &MetricDomain,
    n_pairs: usize,
    n_cross: usize,
    seed: u64,
) -> Result<PastingCheck> {
    let arcs = bi.chart.base_arcs();
    let plus = bi.plus();
    let minus = bi.minus();

    let mut plus_pairs = collar_pairs(dom, &arcs, (0.0, 1.0), &PairConfig {
        n_pairs: n_pairs / 2,
        seed,
    });
    let mut minus_pairs = collar_pairs(dom, &arcs, (0.0, 1.0), &PairConfig {
        n_pairs: n_pairs / 2,
        seed: seed ^ 0x77,
    });

    // Cross-side pairs, stratified over height decades; their base and
    // height projections join the one-sided pair sets.
    let glued_pairs = {
        let mut h = Halton::new(4, seed ^ 0xcc);
        let total: f64 = arcs.iter().map(|a| a.len).sum();
        let at = |w: f64| {
            let mut u = w * total;
            for a in &arcs {
                if u <= a.len {
                    return dom.base.point_at(dom.base.wrap_param(a.start + u));
                }
                u -= a.len;
            }
            dom.base.point_at(arcs[0].start)
        };
        let decades = [1.0, 0.1, 0.01, 1e-3, 1e-4];
        let mut out = Vec::with_capacity(n_cross);
        for i in 0..n_cross {
            let u = h.next_point();
            let cap = decades[i % decades.len()];
            let x = at(u[0]);
            let y = at(u[1]);
            let s = (u[2] * cap).max(1e-9);
            let t = -(u[3] * cap).max(1e-9);
            out.push((CollarPoint::new(x, s), CollarPoint::new(y, t)));
        }
        out
    };

    // Glued estimate over same-side and cross-side pairs.
    let mut all_pairs = collar_pairs(dom, &arcs, (-1.0, 1.0), &PairConfig {
        n_pairs,
        seed: seed ^ 0x3333,
    });
    all_pairs.extend(glued_pairs.iter().cloned());
    let cross_pairs = glued_pairs.len();

    // Every glued pair projects into the one-sided sets: same-side pairs
    // verbatim (the glued quotient equals the one-sided quotient), and
    // mixed pairs through the base via the triangle inequality. With the
    // base-to-base projections included in both sets, every glued
    // quotient is dominated by a sampled one-sided quotient, so
    // l_glued <= max(l_plus, l_minus) holds by construction.
    for (p, q) in &all_pairs {
        let (s, t) = (p.height, q.height);
        if s >= 0.0 && t >= 0.0 {
            plus_pairs.push((p.clone(), q.clone()));
        } else if s <= 0.0 && t <= 0.0 {
            minus_pairs.push((
                CollarPoint::new(p.base.clone(), -s),
                CollarPoint::new(q.base.clone(), -t),
            ));
        } else {
            let (hp, hm) = if s > 0.0 { (p, q) } else { (q, p) };
            plus_pairs.push((hp.clone(), CollarPoint::new(hp.base.clone(), 0.0)));
            minus_pairs.push((
                CollarPoint::new(hm.base.clone(), -hm.height),
                CollarPoint::new(hm.base.clone(), 0.0),
            ));
            // Base-to-base projections keep both one-sided maxima >= 1.
            if hp.base.dist(&hm.base) > 1e-12 {
                let bb = (
                    CollarPoint::new(hp.base.clone(), 0.0),
                    CollarPoint::new(hm.base.clone(), 0.0),
                );
                plus_pairs.push(bb.clone());
                minus_pairs.push(bb);
            }
        }
    }

    let plus_map = |x: &Point, t: f64| plus.forward(x, t);
    let minus_map = |x: &Point, t: f64| minus.forward(x, t);
    let glued_map = |x: &Point, t: f64| bi.chart.forward(x, t);
    let l_plus = estimate_constant(&plus_map, dom, &plus_pairs, Direction::Forward)?;
    let l_minus = estimate_constant(&minus_map, dom, &minus_pairs, Direction::Forward)?;
    let l_glued = estimate_constant(&glued_map, dom, &all_pairs, Direction::Forward)?;

    Ok(PastingCheck {
        l_glued: l_glued.value,
        l_plus: l_plus.value,
        l_minus: l_minus.value,
        witness: l_glued.witness,
        cross_pairs,
    })
}

/// Smallest sampled alpha >= 1 such that every sampled cross-side image
/// pair admits a sampled base point z with
/// d(c(x,s), z) + d(z, c(y,t)) <= alpha d(c(x,s), c(y,t)).
pub fn midpoint_alpha(
    bi: &Bicollar,
    dom: &MetricDomain,
    samples: usize,
    seed: u64,
) -> Result<f64> {
    let witness_pool = dom.base_sample(samples.max(64), seed ^ 0xa1fa);
    let arcs = bi.chart.base_arcs();
    let total: f64 = arcs.iter().map(|a| a.len).sum();
    let mut h = Halton::new(4, seed);
    let mut alpha = 1.0f64;
    let mut used = 0;
    for _ in 0..samples {
        let u = h.next_point();
        let pick = |w: f64| {
            let mut v = w * total;
            for a in &arcs {
                if v <= a.len {
                    return dom.base.point_at(dom.base.wrap_param(a.start + v));
                }
                v -= a.len;
            }
            dom.base.point_at(arcs[0].start)
        };
        let x = pick(u[0]);
        let y = pick(u[1]);
        let s = u[2].max(1e-6);
        let t = -u[3].max(1e-6);
        let cp = bi.forward(&x, s)?;
        let cm = bi.forward(&y, t)?;
        let gap = dom.ambient_dist(&cp, &cm);
        if gap < 1e-12 {
            continue;
        }
        let best = witness_pool
            .iter()
            .map(|z| dom.ambient_dist(&cp, z) + dom.ambient_dist(z, &cm))
            .fold(f64::INFINITY, f64::min);
        alpha = alpha.max(best / gap);
        used += 1;
    }
    if used == 0 {
        return Err(CollarError::DegeneratePairs);
    }
    Ok(alpha)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::charts::EdgeBiChart;
    use crate::curve::BaseCurve;
    use crate::metric::{BoxBounds, Region};

    fn square_dom() -> MetricDomain {
        MetricDomain::euclidean(
            BaseCurve::ClosedPolyline {
                vertices: vec![
                    Point(vec![1.0, -1.0]),
                    Point(vec![1.0, 1.0]),
                    Point(vec![-1.0, 1.0]),
                    Point(vec![-1.0, -1.0]),
                ],
            },
            BoxBounds {
                min: vec![-1.5, -1.5],
                max: vec![1.5, 1.5],
            },
        )
    }

    fn square_side() -> SidePredicate {
        let region = Region::Box {
            min: vec![-1.0, -1.0],
            max: vec![1.0, 1.0],
        };
        Arc::new(move |p: &Point| {
            let inside = region.dist_to_complement(p);
            let outside = region.dist_to(p);
            if outside > 1e-12 {
                SideLabel::Plus
            } else if inside > 1e-12 {
                SideLabel::Minus
            } else {
                SideLabel::Base
            }
        })
    }

    fn edge_chart() -> ChartRef {
        Arc::new(EdgeBiChart::new(&square_dom().base, ArcInterval::new(0.4, 1.2), 0.2).unwrap())
    }

    /// The same edge chart with heights negated: lands on the wrong side.
    struct FlippedEdge(ChartRef);

    impl Chart for FlippedEdge {
        fn forward(&self, x: &Point, t: f64) -> Result<Point> {
            self.0.forward(x, -t)
        }
        fn inverse(&self, y: &Point) -> Result<CollarPoint> {
            let mut p = self.0.inverse(y)?;
            p.height = -p.height;
            Ok(p)
        }
        fn in_image(&self, y: &Point) -> bool {
            self.0.in_image(y)
        }
        fn base_arcs(&self) -> Vec<ArcInterval> {
            self.0.base_arcs()
        }
        fn height_range(&self) -> (f64, f64) {
            (-1.0, 1.0)
        }
    }

    #[test]
    fn orient_keeps_correct_chart() {
        let dom = square_dom();
        let bi = orient_bicollar(edge_chart(), square_side(), &dom).unwrap();
        let x = dom.base.point_at(1.0);
        for t in [0.3, 0.9] {
            assert_eq!((bi.side)(&bi.forward(&x, t).unwrap()), SideLabel::Plus);
            assert_eq!((bi.side)(&bi.forward(&x, -t).unwrap()), SideLabel::Minus);
        }
        // Matches the raw chart on samples.
        let raw = edge_chart();
        assert_eq!(bi.forward(&x, 0.5).unwrap(), raw.forward(&x, 0.5).unwrap());
    }

    #[test]
    fn orient_fixes_globally_flipped_chart() {
        let dom = square_dom();
        let flipped: ChartRef = Arc::new(FlippedEdge(edge_chart()));
        let bi = orient_bicollar(flipped, square_side(), &dom).unwrap();
        let x = dom.base.point_at(1.0);
        let y = bi.forward(&x, 0.5).unwrap();
        assert_eq!((bi.side)(&y), SideLabel::Plus);
        // Equals the unflipped chart with the height negated away.
        assert_eq!(y, edge_chart().forward(&x, 0.5).unwrap());
    }

    #[test]
    fn glued_components_roundtrip() {
        let dom = square_dom();
        let bi = orient_bicollar(edge_chart(), square_side(), &dom).unwrap();
        let glued = glue_bicollar(bi.plus(), bi.minus(), square_side(), &dom).unwrap();
        let x = dom.base.point_at(1.0);
        assert_eq!(glued.forward(&x, 0.0).unwrap(), x);
        for t in [-0.8, -0.2, 0.4, 1.0] {
            assert_eq!(
                glued.forward(&x, t).unwrap(),
                bi.forward(&x, t).unwrap(),
                "t = {t}"
            );
        }
    }

    #[test]
    fn epsilon_plugin_values() {
        let e = bicollar_epsilon(1.0, 1.0, 1.0).unwrap();
        assert_eq!(e.eps, 0.25);
        assert!(e.binding.contains("margin"));
        let e = bicollar_epsilon(2.0, 10.0, 1.0).unwrap();
        assert_eq!(e.eps, 0.05);
        assert!(e.binding.contains("inversion"));
        let e = bicollar_epsilon(1.0, 1.0, 4.0).unwrap();
        assert_eq!(e.eps, 1.0);
        assert_eq!(e.binding, "unit cap");
    }

    #[test]
    fn epsilon_monotonicity() {
        let base = bicollar_epsilon(1.0, 2.0, 0.5).unwrap().eps;
        assert!(bicollar_epsilon(2.0, 2.0, 0.5).unwrap().eps <= base);
        assert!(bicollar_epsilon(1.0, 4.0, 0.5).unwrap().eps <= base);
        assert!(bicollar_epsilon(1.0, 2.0, 0.9).unwrap().eps >= base);
    }

    #[test]
    fn restriction_rejects_oversized_epsilon() {
        let dom = square_dom();
        let bi = orient_bicollar(edge_chart(), square_side(), &dom).unwrap();
        let k = RestrictionConstants {
            l_c: 1.0,
            il_plus: 2.0,
            il_minus: 2.0,
            bl_alpha_max: 2.0,
            bl_alpha_recip_max: 1.0,
            delta: 1.0,
        };
        assert!(restrict_bicollar(&bi, 0.25, &k, 1.0).is_ok());
        assert!(matches!(
            restrict_bicollar(&bi, 0.3, &k, 1.0),
            Err(CollarError::EpsilonTooLarge { .. })
        ));
    }

    #[test]
    fn pasting_estimate_is_dominated() {
        let dom = square_dom();
        let bi = orient_bicollar(edge_chart(), square_side(), &dom).unwrap();
        let pc = pasting_check(&bi, &dom, 2000, 300, 3).unwrap();
        assert!(pc.l_glued <= pc.l_plus.max(pc.l_minus) + 1e-9);
        assert!(pc.l_plus >= 1.0 && pc.l_minus >= 1.0);
    }

    #[test]
    fn midpoint_alpha_reasonable_on_edge() {
        let dom = square_dom();
        let bi = orient_bicollar(edge_chart(), square_side(), &dom).unwrap();
        let alpha = midpoint_alpha(&bi, &dom, 200, 1).unwrap();
        assert!(alpha >= 1.0);
        assert!(alpha.is_finite());
    }
}
