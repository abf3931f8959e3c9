//! Analytic chart library: exact forward maps, inverses and image
//! predicates for the shipped geometries. Collar charts use heights in
//! [0,1]; bicollar charts use [-1,1] with the convention that negative
//! heights land on the minus side (domain interior in the planar
//! fixtures) and positive heights on the plus side.

use std::sync::Arc;

use crate::curve::{ArcInterval, BaseCurve};
use crate::error::{CollarError, Result};
use crate::metric::{dot, norm, CollarPoint, Point};

/// Optionally declared Lipschitz data for a chart, used by verification
/// reports; `None` means "measure it, don't trust a declaration".
#[derive(Clone, Copy, Debug, Default)]
pub struct Declared {
    pub l: Option<f64>,
    pub il: Option<f64>,
}

impl Declared {
    pub fn none() -> Self {
        Declared::default()
    }

    pub fn bl(&self) -> Option<f64> {
        match (self.l, self.il) {
            (Some(l), Some(il)) => Some(l * il),
            _ => None,
        }
    }
}

pub trait Chart: Send + Sync {
    /// The embedding at (x, t); `x` must lie on the chart base.
    fn forward(&self, x: &Point, t: f64) -> Result<Point>;

    /// Inverse on the image; errors off the image.
    fn inverse(&self, y: &Point) -> Result<CollarPoint>;

    /// Exact membership in the chart image.
    fn in_image(&self, y: &Point) -> bool;

    /// Closure of the base, as arcs of the base curve.
    fn base_arcs(&self) -> Vec<ArcInterval>;

    /// Height interval: (0,1) for collars, (-1,1) for bicollars.
    fn height_range(&self) -> (f64, f64);

    fn declared(&self) -> Declared {
        Declared::none()
    }
}

pub type ChartRef = Arc<dyn Chart>;

fn check_height(t: f64, range: (f64, f64)) -> Result<f64> {
    if t < range.0 - 1e-9 || t > range.1 + 1e-9 {
        return Err(CollarError::InvalidParameter(format!(
            "height {t} outside [{}, {}]",
            range.0, range.1
        )));
    }
    Ok(t.clamp(range.0, range.1))
}

/// Radial collar of a circle inside its disk: c(x,t) = center + (1-t/2)(x-center).
pub struct RadialChart {
    pub center: Point,
    pub radius: f64,
    curve: BaseCurve,
}

impl RadialChart {
    pub fn new(center: Point, radius: f64) -> Result<Self> {
        if !(radius > 0.0) {
            return Err(CollarError::InvalidParameter(format!("radius {radius}")));
        }
        let curve = BaseCurve::Circle {
            center: center.clone(),
            radius,
        };
        Ok(RadialChart {
            center,
            radius,
            curve,
        })
    }
}

impl Chart for RadialChart {
    fn forward(&self, x: &Point, t: f64) -> Result<Point> {
        let t = check_height(t, (0.0, 1.0))?;
        let d = x.sub(&self.center);
        if (norm(&d) - self.radius).abs() > 1e-7 {
            return Err(CollarError::OutsideBase(x.0.clone()));
        }
        Ok(self.center.add_scaled(&d, 1.0 - t / 2.0))
    }

    fn inverse(&self, y: &Point) -> Result<CollarPoint> {
        let d = y.sub(&self.center);
        let rho = norm(&d);
        if rho < self.radius / 2.0 - 1e-9 || rho > self.radius + 1e-9 {
            return Err(CollarError::InversionFailed {
                residual: (rho - self.radius.clamp(self.radius / 2.0, self.radius)).abs(),
            });
        }
        let t = 2.0 * (1.0 - rho / self.radius);
        let base = self.center.add_scaled(&d, self.radius / rho);
        Ok(CollarPoint::new(base, t.clamp(0.0, 1.0)))
    }

    fn in_image(&self, y: &Point) -> bool {
        let rho = norm(&y.sub(&self.center));
        rho >= self.radius / 2.0 && rho <= self.radius
    }

    fn base_arcs(&self) -> Vec<ArcInterval> {
        vec![ArcInterval::new(0.0, self.curve.total_len())]
    }

    fn height_range(&self) -> (f64, f64) {
        (0.0, 1.0)
    }

    fn declared(&self) -> Declared {
        // Forward constant: height derivative has norm radius/2, base
        // derivative factor (1 - t/2) <= 1; under the product metric the
        // constant is the max of the two.
        Declared {
            l: Some(1f64.max(self.radius / 2.0)),
            il: None,
        }
    }
}

/// Affine strip collar over a horizontal segment: c((u,0), t) = (u,0) + t v.
pub struct AffineStripChart {
    pub arc: ArcInterval,
    pub v: [f64; 2],
    origin: Point,
    dir: [f64; 2],
}

impl AffineStripChart {
    /// `curve` must be a straight segment; the chart covers `arc` of it.
    pub fn new(curve: &BaseCurve, arc: ArcInterval, v: [f64; 2]) -> Result<Self> {
        let (a, b) = match curve {
            BaseCurve::Segment { a, b } => (a.clone(), b.clone()),
            _ => return Err(CollarError::Unsupported("affine strip needs a segment base")),
        };
        if v[1].abs() < 1e-12 {
            return Err(CollarError::DegenerateRegion(
                "strip direction parallel to the base".into(),
            ));
        }
        let len = a.dist(&b);
        let dir = [(b.0[0] - a.0[0]) / len, (b.0[1] - a.0[1]) / len];
        Ok(AffineStripChart {
            arc,
            v,
            origin: a,
            dir,
        })
    }

    fn coords(&self, y: &Point) -> (f64, f64) {
        // Solve origin + u dir + t v = y.
        let rel = y.sub(&self.origin);
        let det = self.dir[0] * self.v[1] - self.dir[1] * self.v[0];
        let u = (rel[0] * self.v[1] - rel[1] * self.v[0]) / det;
        let t = (self.dir[0] * rel[1] - self.dir[1] * rel[0]) / det;
        (u, t)
    }
}

impl Chart for AffineStripChart {
    fn forward(&self, x: &Point, t: f64) -> Result<Point> {
        let t = check_height(t, (0.0, 1.0))?;
        let (u, off) = self.coords(x);
        if off.abs() > 1e-7 || u < self.arc.start - 1e-7 || u > self.arc.end() + 1e-7 {
            return Err(CollarError::OutsideBase(x.0.clone()));
        }
        Ok(x.add_scaled(&[self.v[0], self.v[1]], t))
    }

    fn inverse(&self, y: &Point) -> Result<CollarPoint> {
        let (u, t) = self.coords(y);
        if !self.in_image(y) {
            return Err(CollarError::InversionFailed {
                residual: (t.clamp(0.0, 1.0) - t)
                    .abs()
                    .max((u.clamp(self.arc.start, self.arc.end()) - u).abs()),
            });
        }
        let base = self.origin.add_scaled(&self.dir, u);
        Ok(CollarPoint::new(base, t.clamp(0.0, 1.0)))
    }

    fn in_image(&self, y: &Point) -> bool {
        let (u, t) = self.coords(y);
        u >= self.arc.start - 1e-12
            && u <= self.arc.end() + 1e-12
            && t >= -1e-12
            && t <= 1.0 + 1e-12
    }

    fn base_arcs(&self) -> Vec<ArcInterval> {
        vec![self.arc]
    }

    fn height_range(&self) -> (f64, f64) {
        (0.0, 1.0)
    }

    fn declared(&self) -> Declared {
        // (u,t) -> origin + u dir + t v is linear; product (l1) metric on
        // the cylinder gives the max column norm forward and the
        // (l2 -> l1) norm of the inverse matrix backward.
        let l = 1f64.max(norm(&self.v));
        let det = (self.dir[0] * self.v[1] - self.dir[1] * self.v[0]).abs();
        // Rows of the inverse matrix.
        let r1 = [self.v[1] / det, -self.v[0] / det];
        let r2 = [-self.dir[1] / det, self.dir[0] / det];
        let plus = norm(&[r1[0] + r2[0], r1[1] + r2[1]]);
        let minus = norm(&[r1[0] - r2[0], r1[1] - r2[1]]);
        Declared {
            l: Some(l),
            il: Some(plus.max(minus)),
        }
    }
}

/// Flat bicollar chart over the interior of one polygon edge:
/// c(x,t) = x + t w n_out, heights in [-1,1].
pub struct EdgeBiChart {
    pub arc: ArcInterval,
    pub w: f64,
    p0: Point,
    dir: [f64; 2],
    n_out: [f64; 2],
}

impl EdgeBiChart {
    /// `arc` must lie inside a single edge of the (CCW) polyline.
    pub fn new(curve: &BaseCurve, arc: ArcInterval, w: f64) -> Result<Self> {
        if !(w > 0.0) {
            return Err(CollarError::InvalidParameter(format!("width {w}")));
        }
        let p0 = curve.point_at(arc.start);
        let p1 = curve.point_at(arc.start + arc.len);
        let len = p0.dist(&p1);
        if (len - arc.len).abs() > 1e-9 {
            return Err(CollarError::DegenerateRegion(
                "edge chart arc spans a corner".into(),
            ));
        }
        let dir = [(p1.0[0] - p0.0[0]) / len, (p1.0[1] - p0.0[1]) / len];
        // CCW orientation: outward normal is the clockwise rotation.
        let n_out = [dir[1], -dir[0]];
        Ok(EdgeBiChart {
            arc,
            w,
            p0,
            dir,
            n_out,
        })
    }

    fn coords(&self, y: &Point) -> (f64, f64) {
        let rel = y.sub(&self.p0);
        (dot(&rel, &self.dir), dot(&rel, &self.n_out) / self.w)
    }
}

impl Chart for EdgeBiChart {
    fn forward(&self, x: &Point, t: f64) -> Result<Point> {
        let t = check_height(t, (-1.0, 1.0))?;
        let (u, off) = self.coords(x);
        if off.abs() * self.w > 1e-7 || u < -1e-7 || u > self.arc.len + 1e-7 {
            return Err(CollarError::OutsideBase(x.0.clone()));
        }
        Ok(x.add_scaled(&self.n_out, t * self.w))
    }

    fn inverse(&self, y: &Point) -> Result<CollarPoint> {
        let (u, t) = self.coords(y);
        if !self.in_image(y) {
            return Err(CollarError::InversionFailed {
                residual: (u.clamp(0.0, self.arc.len) - u)
                    .abs()
                    .max((t.clamp(-1.0, 1.0) - t).abs() * self.w),
            });
        }
        let base = self.p0.add_scaled(&self.dir, u.clamp(0.0, self.arc.len));
        Ok(CollarPoint::new(base, t.clamp(-1.0, 1.0)))
    }

    fn in_image(&self, y: &Point) -> bool {
        let (u, t) = self.coords(y);
        u >= -1e-12 && u <= self.arc.len + 1e-12 && t.abs() <= 1.0 + 1e-12
    }

    fn base_arcs(&self) -> Vec<ArcInterval> {
        vec![self.arc]
    }

    fn height_range(&self) -> (f64, f64) {
        (-1.0, 1.0)
    }

    fn declared(&self) -> Declared {
        Declared {
            l: Some(1f64.max(self.w)),
            il: Some((1.0 + 1.0 / (self.w * self.w)).sqrt()),
        }
    }
}

/// Corner bicollar chart: unfolds the right angle at a polygon vertex by
/// an angle-scaling map in polar coordinates around the vertex. Interior
/// heights fill the quarter-plane wedge, exterior heights the
/// three-quarter wedge.
pub struct WedgeBiChart {
    curve: BaseCurve,
    pub corner_param: f64,
    pub half_width: f64,
    pub w: f64,
    v: Point,
    e1: [f64; 2],
    e2: [f64; 2],
}

impl WedgeBiChart {
    pub fn new(curve: &BaseCurve, corner_param: f64, half_width: f64, w: f64) -> Result<Self> {
        if !(half_width > 0.0 && w > 0.0) {
            return Err(CollarError::InvalidParameter(
                "wedge chart needs positive half-width and height scale".into(),
            ));
        }
        let v = curve.point_at(corner_param);
        let eps = 1e-7;
        let fwd = curve.point_at(corner_param + eps);
        let back = curve.point_at(curve.wrap_param(corner_param - eps));
        let d1 = fwd.sub(&v);
        let d2 = back.sub(&v);
        let (n1, n2) = (norm(&d1), norm(&d2));
        let e1 = [d1[0] / n1, d1[1] / n1];
        let e2 = [d2[0] / n2, d2[1] / n2];
        if dot(&e1, &e2).abs() > 1e-6 {
            return Err(CollarError::DegenerateRegion(
                "wedge chart requires a right-angle corner".into(),
            ));
        }
        Ok(WedgeBiChart {
            curve: curve.clone(),
            corner_param,
            half_width,
            w,
            v,
            e1,
            e2,
        })
    }

    fn embed(&self, rho: f64, theta: f64) -> Point {
        let (s, c) = theta.sin_cos();
        Point(vec![
            self.v.0[0] + rho * (c * self.e1[0] + s * self.e2[0]),
            self.v.0[1] + rho * (c * self.e1[1] + s * self.e2[1]),
        ])
    }
}

impl Chart for WedgeBiChart {
    fn forward(&self, x: &Point, t: f64) -> Result<Point> {
        let t = check_height(t, (-1.0, 1.0))?;
        if self.curve.dist_to_curve(x) > 1e-7 {
            return Err(CollarError::OutsideBase(x.0.clone()));
        }
        let u = self
            .curve
            .signed_param_diff(self.curve.param_of(x), self.corner_param);
        if u.abs() > self.half_width + 1e-7 {
            return Err(CollarError::OutsideBase(x.0.clone()));
        }
        let zeta = [u, t.abs() * self.w];
        let rho = norm(&zeta);
        if rho == 0.0 {
            return Ok(self.v.clone());
        }
        let phi = zeta[1].atan2(zeta[0]);
        // Interior (t < 0): upper half-plane folded onto the quarter
        // wedge. Exterior (t > 0): folded onto the complementary
        // three-quarter wedge, swept clockwise from e1.
        let theta = if t <= 0.0 { phi / 2.0 } else { -1.5 * phi };
        Ok(self.embed(rho, theta))
    }

    fn inverse(&self, y: &Point) -> Result<CollarPoint> {
        let rel = y.sub(&self.v);
        let xi = dot(&rel, &self.e1);
        let eta = dot(&rel, &self.e2);
        let rho = norm(&rel);
        if rho == 0.0 {
            return Ok(CollarPoint::new(self.v.clone(), 0.0));
        }
        let theta = eta.atan2(xi);
        let (u, t) = if (0.0..=std::f64::consts::FRAC_PI_2).contains(&theta) {
            let phi = 2.0 * theta;
            (rho * phi.cos(), -rho * phi.sin() / self.w)
        } else {
            let shifted = if theta < 0.0 {
                theta
            } else {
                theta - std::f64::consts::TAU
            };
            let phi = -shifted / 1.5;
            (rho * phi.cos(), rho * phi.sin() / self.w)
        };
        if u.abs() > self.half_width + 1e-9 || t.abs() > 1.0 + 1e-9 {
            return Err(CollarError::InversionFailed {
                residual: (u.abs() - self.half_width)
                    .max((t.abs() - 1.0) * self.w)
                    .max(0.0),
            });
        }
        let base = self
            .curve
            .point_at(self.curve.wrap_param(self.corner_param + u));
        Ok(CollarPoint::new(base, t.clamp(-1.0, 1.0)))
    }

    fn in_image(&self, y: &Point) -> bool {
        self.inverse(y).is_ok()
    }

    fn base_arcs(&self) -> Vec<ArcInterval> {
        vec![ArcInterval::new(
            self.curve
                .wrap_param(self.corner_param - self.half_width),
            2.0 * self.half_width,
        )]
    }

    fn height_range(&self) -> (f64, f64) {
        (-1.0, 1.0)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    Plus,
    Minus,
}

/// One-sided view of a bicollar chart, with heights renormalized to [0,1].
pub struct HalfChart {
    pub inner: ChartRef,
    pub side: Side,
}

impl HalfChart {
    pub fn new(inner: ChartRef, side: Side) -> Self {
        HalfChart { inner, side }
    }

    fn signed(&self, t: f64) -> f64 {
        match self.side {
            Side::Plus => t,
            Side::Minus => -t,
        }
    }
}

impl Chart for HalfChart {
    fn forward(&self, x: &Point, t: f64) -> Result<Point> {
        let t = check_height(t, (0.0, 1.0))?;
        self.inner.forward(x, self.signed(t))
    }

    fn inverse(&self, y: &Point) -> Result<CollarPoint> {
        let p = self.inner.inverse(y)?;
        let t = self.signed(p.height);
        if t < -1e-9 {
            return Err(CollarError::InversionFailed { residual: -t });
        }
        Ok(CollarPoint::new(p.base, t.max(0.0)))
    }

    fn in_image(&self, y: &Point) -> bool {
        match self.inner.inverse(y) {
            Ok(p) => self.signed(p.height) >= -1e-12,
            Err(_) => false,
        }
    }

    fn base_arcs(&self) -> Vec<ArcInterval> {
        self.inner.base_arcs()
    }

    fn height_range(&self) -> (f64, f64) {
        (0.0, 1.0)
    }

    fn declared(&self) -> Declared {
        // Height reflection is an isometry of the cylinder metric.
        self.inner.declared()
    }
}

pub type CutFn = Arc<dyn Fn(&Point) -> f64 + Send + Sync>;

/// Height-rescaled chart (x,t) -> inner(x, t d(x)) for a cut function
/// d: base -> (0,1].
pub struct RestrictedChart {
    pub inner: ChartRef,
    pub cut: CutFn,
}

impl Chart for RestrictedChart {
    fn forward(&self, x: &Point, t: f64) -> Result<Point> {
        let t = check_height(t, (0.0, 1.0))?;
        self.inner.forward(x, t * (self.cut)(x))
    }

    fn inverse(&self, y: &Point) -> Result<CollarPoint> {
        let p = self.inner.inverse(y)?;
        let d = (self.cut)(&p.base);
        let t = p.height / d;
        if t > 1.0 + 1e-9 {
            return Err(CollarError::InversionFailed {
                residual: (t - 1.0) * d,
            });
        }
        Ok(CollarPoint::new(p.base, t.clamp(0.0, 1.0)))
    }

    fn in_image(&self, y: &Point) -> bool {
        match self.inner.inverse(y) {
            Ok(p) => p.height <= (self.cut)(&p.base) + 1e-12,
            Err(_) => false,
        }
    }

    fn base_arcs(&self) -> Vec<ArcInterval> {
        self.inner.base_arcs()
    }

    fn height_range(&self) -> (f64, f64) {
        (0.0, 1.0)
    }
}

/// Piecewise chart over pairwise disjoint bases.
pub struct UnionChart {
    pub parts: Vec<ChartRef>,
    curve: BaseCurve,
}

impl UnionChart {
    pub fn new(parts: Vec<ChartRef>, curve: BaseCurve) -> Self {
        UnionChart { parts, curve }
    }

    fn part_for(&self, x: &Point) -> Result<&ChartRef> {
        let s = self.curve.param_of(x);
        self.parts
            .iter()
            .find(|c| c.base_arcs().iter().any(|a| self.curve.arc_contains(a, s)))
            .ok_or_else(|| CollarError::OutsideBase(x.0.clone()))
    }
}

impl Chart for UnionChart {
    fn forward(&self, x: &Point, t: f64) -> Result<Point> {
        self.part_for(x)?.forward(x, t)
    }

    fn inverse(&self, y: &Point) -> Result<CollarPoint> {
        for part in &self.parts {
            if part.in_image(y) {
                return part.inverse(y);
            }
        }
        Err(CollarError::InversionFailed {
            residual: f64::INFINITY,
        })
    }

    fn in_image(&self, y: &Point) -> bool {
        self.parts.iter().any(|c| c.in_image(y))
    }

    fn base_arcs(&self) -> Vec<ArcInterval> {
        self.parts.iter().flat_map(|c| c.base_arcs()).collect()
    }

    fn height_range(&self) -> (f64, f64) {
        self.parts
            .first()
            .map(|c| c.height_range())
            .unwrap_or((0.0, 1.0))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit_square() -> BaseCurve {
        BaseCurve::ClosedPolyline {
            vertices: vec![
                Point(vec![1.0, -1.0]),
                Point(vec![1.0, 1.0]),
                Point(vec![-1.0, 1.0]),
                Point(vec![-1.0, -1.0]),
            ],
        }
    }

    #[test]
    fn radial_chart_roundtrip_and_values() {
        let c = RadialChart::new(Point(vec![0.0, 0.0]), 1.0).unwrap();
        let x = Point(vec![1.0, 0.0]);
        let y = c.forward(&x, 1.0).unwrap();
        assert!((y.0[0] - 0.5).abs() < 1e-15 && y.0[1].abs() < 1e-15);
        let p = c.inverse(&y).unwrap();
        assert!(p.base.dist(&x) < 1e-12 && (p.height - 1.0).abs() < 1e-12);
        assert!(c.in_image(&Point(vec![0.7, 0.0])));
        assert!(!c.in_image(&Point(vec![0.3, 0.0])));
    }

    #[test]
    fn edge_chart_exact_roundtrip() {
        let sq = unit_square();
        // Middle of the first (right) edge, away from corners.
        let arc = ArcInterval::new(0.5, 1.0);
        let c = EdgeBiChart::new(&sq, arc, 0.2).unwrap();
        let x = sq.point_at(1.0);
        let out = c.forward(&x, 1.0).unwrap();
        assert!((out.0[0] - 1.2).abs() < 1e-15, "outward is +x: {:?}", out.0);
        let inn = c.forward(&x, -0.5).unwrap();
        assert!((inn.0[0] - 0.9).abs() < 1e-15);
        let p = c.inverse(&inn).unwrap();
        assert!(p.base.dist(&x) < 1e-12 && (p.height + 0.5).abs() < 1e-12);
    }

    #[test]
    fn edge_chart_rejects_corner_spanning_arc() {
        let sq = unit_square();
        assert!(EdgeBiChart::new(&sq, ArcInterval::new(1.5, 1.0), 0.2).is_err());
    }

    #[test]
    fn wedge_chart_fixes_base_and_separates_sides() {
        let sq = unit_square();
        // Corner at param 2.0 = vertex (1,1).
        let c = WedgeBiChart::new(&sq, 2.0, 0.6, 0.2).unwrap();
        for u in [-0.5, -0.2, 0.0, 0.3, 0.55] {
            let x = sq.point_at(sq.wrap_param(2.0 + u));
            let y0 = c.forward(&x, 0.0).unwrap();
            assert!(y0.dist(&x) < 1e-9, "base identity at u={u}");
            let yin = c.forward(&x, -0.7).unwrap();
            assert!(
                yin.0[0].abs() < 1.0 && yin.0[1].abs() < 1.0,
                "t<0 must be interior at u={u}: {:?}",
                yin.0
            );
            let yout = c.forward(&x, 0.7).unwrap();
            assert!(
                yout.0[0].abs() > 1.0 || yout.0[1].abs() > 1.0,
                "t>0 must be exterior at u={u}: {:?}",
                yout.0
            );
        }
    }

    #[test]
    fn wedge_chart_roundtrip() {
        let sq = unit_square();
        let c = WedgeBiChart::new(&sq, 2.0, 0.6, 0.2).unwrap();
        for u in [-0.55, -0.3, -0.01, 0.0, 0.2, 0.5] {
            for t in [-1.0, -0.4, 0.0, 0.3, 1.0] {
                let x = sq.point_at(sq.wrap_param(2.0 + u));
                let y = c.forward(&x, t).unwrap();
                let p = c.inverse(&y).unwrap();
                // At the corner the base parameter is only recoverable
                // when t = 0 or u != 0.
                let back = c.forward(&p.base, p.height).unwrap();
                assert!(
                    back.dist(&y) < 1e-9,
                    "roundtrip image mismatch u={u} t={t}"
                );
                if u.abs() > 1e-9 || t == 0.0 {
                    assert!(
                        p.base.dist(&x) < 1e-9 && (p.height - t).abs() < 1e-9,
                        "roundtrip u={u} t={t}: got {:?}, {}",
                        p.base.0,
                        p.height
                    );
                }
            }
        }
    }

    #[test]
    fn half_chart_views() {
        let sq = unit_square();
        let bi: ChartRef = Arc::new(EdgeBiChart::new(&sq, ArcInterval::new(0.5, 1.0), 0.2).unwrap());
        let minus = HalfChart::new(bi.clone(), Side::Minus);
        let x = sq.point_at(1.0);
        let y = minus.forward(&x, 0.5).unwrap();
        assert_eq!(y, bi.forward(&x, -0.5).unwrap());
        assert!(minus.in_image(&y));
        let plus_pt = bi.forward(&x, 0.5).unwrap();
        assert!(!minus.in_image(&plus_pt));
        let p = minus.inverse(&y).unwrap();
        assert!((p.height - 0.5).abs() < 1e-12);
    }

    #[test]
    fn affine_strip_roundtrip_and_constants() {
        let seg = BaseCurve::Segment {
            a: Point(vec![0.0, 0.0]),
            b: Point(vec![3.0, 0.0]),
        };
        let c = AffineStripChart::new(&seg, ArcInterval::new(0.0, 2.0), [0.1, 0.5]).unwrap();
        let x = Point(vec![1.0, 0.0]);
        let y = c.forward(&x, 0.8).unwrap();
        assert!((y.0[0] - 1.08).abs() < 1e-15 && (y.0[1] - 0.4).abs() < 1e-15);
        let p = c.inverse(&y).unwrap();
        assert!(p.base.dist(&x) < 1e-12 && (p.height - 0.8).abs() < 1e-12);
        let d = c.declared();
        assert!((d.l.unwrap() - 1.0f64.max((0.26f64).sqrt())).abs() < 1e-12);
        assert!(d.il.unwrap() >= 1.0);
    }

    #[test]
    fn restricted_chart_rescales_height() {
        let seg = BaseCurve::Segment {
            a: Point(vec![0.0, 0.0]),
            b: Point(vec![3.0, 0.0]),
        };
        let inner: ChartRef =
            Arc::new(AffineStripChart::new(&seg, ArcInterval::new(0.0, 3.0), [0.0, 1.0]).unwrap());
        let cut: CutFn = Arc::new(|_x: &Point| 0.4);
        let c = RestrictedChart { inner, cut };
        let x = Point(vec![1.0, 0.0]);
        let y = c.forward(&x, 1.0).unwrap();
        assert!((y.0[1] - 0.4).abs() < 1e-15);
        let p = c.inverse(&y).unwrap();
        assert!((p.height - 1.0).abs() < 1e-12);
        assert!(!c.in_image(&Point(vec![1.0, 0.5])));
    }
}
