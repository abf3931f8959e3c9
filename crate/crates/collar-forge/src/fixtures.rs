//! Shipped analytic fixtures: circle-in-disk, square boundary with
//! corner wedges, and the two-collar strip. Each fixture carries exact
//! charts, a cover of the base with a certified Lebesgue number, and
//! (for two-sided geometries) a side predicate.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::bicollar::{glue_bicollar, Bicollar, SideLabel, SidePredicate};
use crate::charts::{
    AffineStripChart, Chart, ChartRef, Declared, EdgeBiChart, HalfChart, RadialChart, Side,
    WedgeBiChart,
};
use crate::collar::{
    build_global_collar, GlobalCollar, GlobalCollarChart, LocalCollar, ValidationConfig,
};
use crate::cover::{estimate_lebesgue, Cover};
use crate::curve::{ArcInterval, BaseCurve};
use crate::error::{CollarError, Result};
use crate::metric::{BoxBounds, CollarPoint, MetricDomain, Point, Region, SetDescriptor};
use crate::pou::{build_pou, PartitionOfUnity};

pub struct Fixture {
    pub name: String,
    pub params: serde_json::Value,
    pub dom: MetricDomain,
    pub cover: Cover,
    pub delta: f64,
    pub delta0: f64,
    /// Chart per cover member; two-sided fixtures store bicollar charts.
    pub charts: Vec<ChartRef>,
    pub two_sided: bool,
    pub side: Option<SidePredicate>,
    /// Enumeration order of the collars (indices into `charts`).
    pub order: Vec<usize>,
    /// Ambient space for the one-sided construction (minus side).
    minus_ambient: Option<SetDescriptor>,
    plus_ambient: Option<SetDescriptor>,
}

/// On-disk form of a fixture configuration.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FixtureSpec {
    pub name: String,
    pub params: serde_json::Value,
    pub base: BaseCurve,
    pub members: Vec<ArcInterval>,
    pub labels: Vec<String>,
    pub delta: f64,
    pub delta0: f64,
    pub height_range: [f64; 2],
    pub order: Vec<usize>,
}

impl Fixture {
    pub fn spec(&self) -> FixtureSpec {
        let hr = self.charts[0].height_range();
        FixtureSpec {
            name: self.name.clone(),
            params: self.params.clone(),
            base: self.dom.base.clone(),
            members: self.cover.members.clone(),
            labels: self.cover.labels.clone(),
            delta: self.delta,
            delta0: self.delta0,
            height_range: [hr.0, hr.1],
            order: self.order.clone(),
        }
    }

    pub fn with_order(mut self, order: Vec<usize>) -> Result<Self> {
        let mut seen = vec![false; self.charts.len()];
        for &i in &order {
            if i >= self.charts.len() || seen[i] {
                return Err(CollarError::InvalidParameter(format!(
                    "order {order:?} is not a permutation of 0..{}",
                    self.charts.len()
                )));
            }
            seen[i] = true;
        }
        if order.len() != self.charts.len() {
            return Err(CollarError::InvalidParameter(
                "order must list every collar exactly once".into(),
            ));
        }
        self.order = order;
        Ok(self)
    }

    fn ordered_cover(&self) -> Result<Cover> {
        Cover::new(
            self.order
                .iter()
                .map(|&i| self.cover.labels[i].clone())
                .collect(),
            self.order.iter().map(|&i| self.cover.members[i]).collect(),
        )
    }

    /// One-sided chart list in enumeration order for the given side.
    pub fn one_sided_charts(&self, side: Side) -> Vec<ChartRef> {
        self.order
            .iter()
            .map(|&i| {
                let c = self.charts[i].clone();
                if self.two_sided {
                    Arc::new(HalfChart::new(c, side)) as ChartRef
                } else {
                    c
                }
            })
            .collect()
    }

    pub fn build_pou(&self) -> Result<PartitionOfUnity> {
        build_pou(&self.ordered_cover()?, self.delta, self.delta0, &self.dom)
    }

    fn dom_for(&self, side: Side) -> MetricDomain {
        let mut dom = self.dom.clone();
        dom.ambient = match side {
            Side::Minus => self.minus_ambient.clone(),
            Side::Plus => self.plus_ambient.clone(),
        };
        dom
    }

    /// The global collar on the minus side (the collared domain itself).
    pub fn build_global(&self, cfg: &ValidationConfig) -> Result<GlobalCollar> {
        self.build_global_side(Side::Minus, cfg)
    }

    pub fn build_global_side(&self, side: Side, cfg: &ValidationConfig) -> Result<GlobalCollar> {
        let dom = self.dom_for(side);
        let pou = build_pou(&self.ordered_cover()?, self.delta, self.delta0, &dom)?;
        let collars = self
            .one_sided_charts(side)
            .into_iter()
            .enumerate()
            .map(|(k, c)| LocalCollar::new(k, self.cover.labels[self.order[k]].clone(), c))
            .collect();
        build_global_collar(collars, pou, &dom, cfg)
    }

    /// Glued global bicollar: exterior global collar on the plus side,
    /// interior on the minus side.
    pub fn build_glued_bicollar(
        &self,
        cfg: &ValidationConfig,
    ) -> Result<(Bicollar, Arc<GlobalCollar>, Arc<GlobalCollar>)> {
        if !self.two_sided {
            return Err(CollarError::Unsupported("fixture is one-sided"));
        }
        let side = self
            .side
            .clone()
            .ok_or(CollarError::Unsupported("fixture lacks a side predicate"))?;
        let interior = Arc::new(self.build_global_side(Side::Minus, cfg)?);
        let exterior = Arc::new(self.build_global_side(Side::Plus, cfg)?);
        let c_minus: ChartRef = Arc::new(GlobalCollarChart {
            gc: interior.clone(),
        });
        let c_plus: ChartRef = Arc::new(GlobalCollarChart {
            gc: exterior.clone(),
        });
        let bi = glue_bicollar(c_plus, c_minus, side, &self.dom)?;
        Ok((bi, interior, exterior))
    }
}

/// Chart wrapper replacing the declared constants; used to exercise the
/// falsification path.
pub struct MisdeclaredChart {
    pub inner: ChartRef,
    pub declared: Declared,
}

impl Chart for MisdeclaredChart {
    fn forward(&self, x: &Point, t: f64) -> Result<Point> {
        self.inner.forward(x, t)
    }
    fn inverse(&self, y: &Point) -> Result<CollarPoint> {
        self.inner.inverse(y)
    }
    fn in_image(&self, y: &Point) -> bool {
        self.inner.in_image(y)
    }
    fn base_arcs(&self) -> Vec<ArcInterval> {
        self.inner.base_arcs()
    }
    fn height_range(&self) -> (f64, f64) {
        self.inner.height_range()
    }
    fn declared(&self) -> Declared {
        self.declared
    }
}

/// Circle of radius r collared into its disk by c(x,t) = (1 - t/2) x.
pub fn make_circle_in_disk(r: f64) -> Result<Fixture> {
    if !(r > 0.0) {
        return Err(CollarError::InvalidParameter(format!("radius {r}")));
    }
    let center = Point(vec![0.0, 0.0]);
    let base = BaseCurve::Circle {
        center: center.clone(),
        radius: r,
    };
    let bounds = BoxBounds {
        min: vec![-1.5 * r, -1.5 * r],
        max: vec![1.5 * r, 1.5 * r],
    };
    let dom = MetricDomain::euclidean(base.clone(), bounds);
    let cover = Cover::new(
        vec!["circle".into()],
        vec![ArcInterval::new(0.0, base.total_len())],
    )?;
    let delta = estimate_lebesgue(&cover, &dom, 512, 0)?;
    let chart: ChartRef = Arc::new(RadialChart::new(center, r)?);
    Ok(Fixture {
        name: "circle".into(),
        params: serde_json::json!({ "r": r }),
        dom,
        cover,
        delta,
        delta0: delta / 2.0,
        charts: vec![chart],
        two_sided: false,
        side: None,
        order: vec![0],
        minus_ambient: Some(SetDescriptor::Region {
            region: Region::Ball {
                center: vec![0.0, 0.0],
                radius: r,
            },
        }),
        plus_ambient: None,
    })
}

/// The circle fixture with a deliberately false declared constant.
pub fn make_circle_misdeclared(r: f64) -> Result<Fixture> {
    let mut fixture = make_circle_in_disk(r)?;
    fixture.name = "circle_misdeclared".into();
    fixture.charts = vec![Arc::new(MisdeclaredChart {
        inner: fixture.charts[0].clone(),
        declared: Declared {
            l: Some(0.01),
            il: None,
        },
    })];
    Ok(fixture)
}

/// Axis-aligned square boundary of the given side length, centered at
/// the origin, with 4 corner wedge charts (n_collars = 4) or 4 wedges
/// plus 4 edge charts (n_collars = 8).
pub fn make_square_boundary(side_len: f64, n_collars: usize) -> Result<Fixture> {
    if !(side_len > 0.0) {
        return Err(CollarError::InvalidParameter(format!("side {side_len}")));
    }
    if n_collars != 4 && n_collars != 8 {
        return Err(CollarError::InvalidParameter(format!(
            "n_collars must be 4 or 8, got {n_collars}"
        )));
    }
    let s = side_len / 2.0;
    let base = BaseCurve::ClosedPolyline {
        vertices: vec![
            Point(vec![s, -s]),
            Point(vec![s, s]),
            Point(vec![-s, s]),
            Point(vec![-s, -s]),
        ],
    };
    let bounds = BoxBounds {
        min: vec![-1.5 * s, -1.5 * s],
        max: vec![1.5 * s, 1.5 * s],
    };
    let dom = MetricDomain::euclidean(base.clone(), bounds);
    let w = 0.2 * side_len;
    let perim = base.total_len();

    let mut charts: Vec<ChartRef> = Vec::new();
    let mut labels = Vec::new();
    let mut members = Vec::new();
    let wedge_half = if n_collars == 4 {
        0.625 * side_len
    } else {
        0.35 * side_len
    };
    for k in 0..4 {
        let corner = k as f64 * side_len;
        charts.push(Arc::new(WedgeBiChart::new(&base, corner, wedge_half, w)?));
        labels.push(format!("corner{k}"));
        members.push(ArcInterval::new(
            base.wrap_param(corner - wedge_half),
            2.0 * wedge_half,
        ));
    }
    if n_collars == 8 {
        for k in 0..4 {
            let start = k as f64 * side_len + 0.25 * side_len;
            let arc = ArcInterval::new(base.wrap_param(start), 0.5 * side_len);
            charts.push(Arc::new(EdgeBiChart::new(&base, arc, w)?));
            labels.push(format!("edge{k}"));
            members.push(arc);
        }
    }
    let _ = perim;
    let cover = Cover::new(labels, members)?;
    let delta = estimate_lebesgue(&cover, &dom, 4096, 0)?;

    let region = Region::Box {
        min: vec![-s, -s],
        max: vec![s, s],
    };
    let side_region = region.clone();
    let side: SidePredicate = Arc::new(move |p: &Point| {
        if side_region.dist_to(p) > 1e-12 {
            SideLabel::Plus
        } else if side_region.dist_to_complement(p) > 1e-12 {
            SideLabel::Minus
        } else {
            SideLabel::Base
        }
    });
    let order = (0..charts.len()).collect();
    Ok(Fixture {
        name: "square".into(),
        params: serde_json::json!({ "side": side_len, "n_collars": n_collars }),
        dom,
        cover,
        delta,
        delta0: delta / 2.0,
        charts,
        two_sided: true,
        side: Some(side),
        order,
        minus_ambient: Some(SetDescriptor::Region {
            region: region.clone(),
        }),
        plus_ambient: Some(SetDescriptor::Complement { region }),
    })
}

/// Two overlapping affine collars over B = [0,3] x {0}: one vertical
/// over [0,2], one sheared by `tilt` over [1,3].
pub fn make_strip_two_collar(tilt: f64) -> Result<Fixture> {
    if !(tilt.abs() < 0.5) {
        return Err(CollarError::InvalidParameter(format!(
            "tilt {tilt} outside (-0.5, 0.5)"
        )));
    }
    let base = BaseCurve::Segment {
        a: Point(vec![0.0, 0.0]),
        b: Point(vec![3.0, 0.0]),
    };
    let bounds = BoxBounds {
        min: vec![-0.5, -0.5],
        max: vec![3.5, 1.5],
    };
    let dom = MetricDomain::euclidean(base.clone(), bounds);
    let u1 = ArcInterval::new(0.0, 2.0);
    let u2 = ArcInterval::new(1.0, 2.0);
    let cover = Cover::new(vec!["vertical".into(), "tilted".into()], vec![u1, u2])?;
    let h = 0.5;
    let c1: ChartRef = Arc::new(AffineStripChart::new(&base, u1, [0.0, h])?);
    let c2: ChartRef = Arc::new(AffineStripChart::new(&base, u2, [tilt * h, h])?);
    Ok(Fixture {
        name: "strip".into(),
        params: serde_json::json!({ "tilt": tilt }),
        dom,
        cover,
        delta: 0.5,
        delta0: 0.25,
        charts: vec![c1, c2],
        two_sided: false,
        side: None,
        order: vec![0, 1],
        minus_ambient: Some(SetDescriptor::Region {
            region: Region::Halfplane {
                normal: vec![0.0, 1.0],
                offset: 0.0,
            },
        }),
        plus_ambient: None,
    })
}

/// Build a fixture by name with JSON parameters (the CLI entry point).
pub fn make_fixture(name: &str, params: &serde_json::Value) -> Result<Fixture> {
    let getf = |key: &str, default: f64| -> f64 {
        params.get(key).and_then(|v| v.as_f64()).unwrap_or(default)
    };
    match name {
        "circle" => make_circle_in_disk(getf("r", 1.0)),
        "circle_misdeclared" => make_circle_misdeclared(getf("r", 1.0)),
        "square" => make_square_boundary(
            getf("side", 2.0),
            params
                .get("n_collars")
                .and_then(|v| v.as_u64())
                .unwrap_or(4) as usize,
        ),
        "strip" => make_strip_two_collar(getf("tilt", 0.2)),
        other => Err(CollarError::InvalidParameter(format!(
            "unknown fixture '{other}'"
        ))),
    }
}

pub fn fixture_from_spec(spec: &FixtureSpec) -> Result<Fixture> {
    let f = make_fixture(&spec.name, &spec.params)?;
    f.with_order(spec.order.clone())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn circle_fixture_basics() {
        let f = make_circle_in_disk(1.0).unwrap();
        assert_eq!(f.charts.len(), 1);
        let x = Point(vec![1.0, 0.0]);
        let y = f.charts[0].forward(&x, 1.0).unwrap();
        assert!((y.0[0] - 0.5).abs() < 1e-15);
        assert!(make_circle_in_disk(-1.0).is_err());
    }

    #[test]
    fn circle_il_witness_quotient() {
        for r in [1.0, 0.1, 0.01] {
            let f = make_circle_in_disk(r).unwrap();
            let x = Point(vec![r, 0.0]);
            let y0 = f.charts[0].forward(&x, 0.0).unwrap();
            let y1 = f.charts[0].forward(&x, 1.0).unwrap();
            // Cylinder distance 1 against image distance r/2.
            let q = 1.0 / y0.dist(&y1);
            assert!((q - 2.0 / r).abs() < 1e-9 * q, "r = {r}");
            assert!(q >= 1.0 / r);
        }
    }

    #[test]
    fn strip_rejects_large_tilt() {
        assert!(make_strip_two_collar(0.5).is_err());
        assert!(make_strip_two_collar(-0.7).is_err());
        assert!(make_strip_two_collar(0.2).is_ok());
    }

    #[test]
    fn square_cover_has_positive_lebesgue_number() {
        for n in [4, 8] {
            let f = make_square_boundary(2.0, n).unwrap();
            assert!(f.delta > 0.0, "n = {n}");
            assert_eq!(f.charts.len(), n);
        }
        assert!(make_square_boundary(2.0, 5).is_err());
    }

    #[test]
    fn order_permutation_validated() {
        let f = make_strip_two_collar(0.0).unwrap();
        assert!(f.with_order(vec![1, 0]).is_ok());
        let f = make_strip_two_collar(0.0).unwrap();
        assert!(f.with_order(vec![0, 0]).is_err());
        let f = make_strip_two_collar(0.0).unwrap();
        assert!(f.with_order(vec![0]).is_err());
    }

    #[test]
    fn spec_roundtrip() {
        let f = make_square_boundary(2.0, 8).unwrap().with_order(
            vec![4, 0, 5, 1, 6, 2, 7, 3],
        ).unwrap();
        let spec = f.spec();
        let json = serde_json::to_string(&spec).unwrap();
        let back: FixtureSpec = serde_json::from_str(&json).unwrap();
        let g = fixture_from_spec(&back).unwrap();
        assert_eq!(g.order, f.order);
        assert_eq!(g.charts.len(), 8);
    }

    #[test]
    fn strip_global_collar_builds() {
        let f = make_strip_two_collar(0.2).unwrap();
        let gc = f.build_global(&ValidationConfig::default()).unwrap();
        let x = Point(vec![1.5, 0.0]);
        let y = gc.evaluate(&x, 0.0).unwrap();
        assert!(y.dist(&x) < 1e-12);
    }

    #[test]
    fn circle_global_collar_is_single_chart() {
        let f = make_circle_in_disk(1.0).unwrap();
        let gc = f.build_global(&ValidationConfig::default()).unwrap();
        let x = Point(vec![0.0, 1.0]);
        for t in [0.0, 0.4, 1.0] {
            let h = gc.evaluate(&x, t).unwrap();
            let direct = f.charts[0].forward(&x, t / 2.0).unwrap();
            assert!(h.dist(&direct) <= 1e-12);
        }
    }
}
