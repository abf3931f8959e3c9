//! The recursive global collar: local collars are pasted by compressing
//! each already-used chart's inner band (push maps) and inserting the
//! next chart into the freed space. Region dispatch follows the running
//! sums of the partition of unity.

use std::sync::Arc;

use crate::charts::{Chart, ChartRef};
use crate::error::{CollarError, Result};
use crate::metric::{CollarPoint, MetricDomain, Point};
use crate::pou::PartitionOfUnity;
use crate::sampling;

#[derive(Clone)]
pub struct LocalCollar {
    pub index: usize,
    pub label: String,
    pub chart: ChartRef,
}

impl LocalCollar {
    pub fn new(index: usize, label: impl Into<String>, chart: ChartRef) -> Self {
        LocalCollar {
            index,
            label: label.into(),
            chart,
        }
    }

    pub fn forward(&self, x: &Point, t: f64) -> Result<Point> {
        self.chart.forward(x, t)
    }

    pub fn inverse(&self, y: &Point) -> Result<CollarPoint> {
        self.chart.inverse(y)
    }

    pub fn in_image(&self, y: &Point) -> bool {
        self.chart.in_image(y)
    }
}

/// The height reparametrization that halves the inner band: for t < 3/4,
/// lambda/2 + (3/4 - lambda/2)(4/3) t; the identity above 3/4. Continuous
/// at the breakpoint and strictly increasing in t.
pub fn xi_transform(lambda: f64, t: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&lambda) {
        return Err(CollarError::InvalidParameter(format!(
            "weight {lambda} outside [0,1]"
        )));
    }
    if !(0.0..=1.0).contains(&t) {
        return Err(CollarError::InvalidParameter(format!(
            "height {t} outside [0,1]"
        )));
    }
    if t >= 0.75 {
        Ok(t)
    } else {
        Ok(lambda / 2.0 + (0.75 - lambda / 2.0) * (4.0 / 3.0) * t)
    }
}

#[derive(Clone, Copy, Debug)]
pub struct ValidationConfig {
    pub base_samples: usize,
    pub cylinder_samples: usize,
    pub injectivity_samples: usize,
    pub fiber_grid: usize,
    pub seed: u64,
}

impl Default for ValidationConfig {
    fn default() -> Self {
        ValidationConfig {
            base_samples: 1000,
            cylinder_samples: 1000,
            injectivity_samples: 2000,
            fiber_grid: 200,
            seed: 0,
        }
    }
}

pub struct GlobalCollar {
    pub collars: Vec<LocalCollar>,
    pub pou: PartitionOfUnity,
    pub dom: MetricDomain,
}

impl GlobalCollar {
    pub fn weights(&self, x: &Point) -> Result<Vec<f64>> {
        self.pou.weights(x)
    }

    /// Running sums lambda_{Sigma,0..m} (first entry 0, last 1).
    pub fn cumulative(&self, x: &Point) -> Result<Vec<f64>> {
        self.pou.cumulative(x)
    }

    /// Largest index with a positive weight (1-based).
    pub fn locality_index(&self, x: &Point) -> Result<usize> {
        let w = self.weights(x)?;
        w.iter()
            .rposition(|&v| v > 0.0)
            .map(|i| i + 1)
            .ok_or_else(|| CollarError::ShrunkenCoverGap(x.0.clone()))
    }

    /// Smallest region index j with t <= lambda_{Sigma,j}(x) + 1e-12;
    /// index 0 is reserved for the base slice t = 0.
    pub fn region_index(&self, x: &Point, t: f64) -> Result<usize> {
        if t > 1.0 + 1e-12 {
            return Err(CollarError::InvalidParameter(format!("height {t} > 1")));
        }
        if t <= 0.0 {
            return Ok(0);
        }
        let cum = self.cumulative(x)?;
        for j in 1..cum.len() {
            if t <= cum[j] + 1e-12 {
                return Ok(j);
            }
        }
        Ok(cum.len() - 1)
    }

    /// The push map g_i: compress chart i's image below height 3/4
    /// according to the weight at the fiber base; identity elsewhere.
    pub fn push_map(&self, i: usize, y: &Point) -> Result<Point> {
        let chart = &self.collars[i].chart;
        if !chart.in_image(y) {
            return Ok(y.clone());
        }
        let p = chart.inverse(y)?;
        if p.height < -1e-9 || p.height > 1.0 + 1e-9 {
            return Err(CollarError::InvalidParameter(format!(
                "inverted height {} outside [0,1]",
                p.height
            )));
        }
        let lam = self.weights(&p.base)?[i];
        let t2 = xi_transform(lam, p.height.clamp(0.0, 1.0))?;
        chart.forward(&p.base, t2)
    }

    /// G_i = g_1 ∘ g_2 ∘ ... ∘ g_i.
    pub fn push_chain(&self, upto: usize, y: &Point) -> Result<Point> {
        let mut z = y.clone();
        for k in (0..upto).rev() {
            z = self.push_map(k, &z)?;
        }
        Ok(z)
    }

    /// Evaluate through a specific region formula:
    /// h_j(x,t) = G_{j-1}(c_j(x, (t - lambda_{Sigma,j-1}(x)) / 2)).
    pub fn evaluate_region(&self, j: usize, x: &Point, t: f64) -> Result<Point> {
        if j == 0 {
            return Ok(x.clone());
        }
        let cum = self.cumulative(x)?;
        let s = ((t - cum[j - 1]) / 2.0).clamp(0.0, 0.5);
        let y = self.collars[j - 1].forward(x, s)?;
        self.push_chain(j - 1, &y)
    }

    /// The global collar map h(x,t).
    pub fn evaluate(&self, x: &Point, t: f64) -> Result<Point> {
        if !self.dom.base_membership(x) {
            return Err(CollarError::OutsideBase(x.0.clone()));
        }
        let j = self.region_index(x, t)?;
        self.evaluate_region(j, x, t)
    }
}

/// A validated global collar exposed through the chart interface
/// (forward-only: the recursion has no closed-form inverse).
pub struct GlobalCollarChart {
    pub gc: Arc<GlobalCollar>,
}

impl Chart for GlobalCollarChart {
    fn forward(&self, x: &Point, t: f64) -> Result<Point> {
        self.gc.evaluate(x, t)
    }

    fn inverse(&self, _y: &Point) -> Result<CollarPoint> {
        Err(CollarError::Unsupported("global collar inversion"))
    }

    fn in_image(&self, _y: &Point) -> bool {
        false
    }

    fn base_arcs(&self) -> Vec<crate::curve::ArcInterval> {
        vec![crate::curve::ArcInterval::new(
            0.0,
            self.gc.dom.base.total_len(),
        )]
    }

    fn height_range(&self) -> (f64, f64) {
        (0.0, 1.0)
    }
}

fn fail(check: &str, detail: String) -> CollarError {
    CollarError::ValidationFailed {
        check: check.to_string(),
        detail,
    }
}

/// Sample points of a chart's base: low-discrepancy parameters within
/// its arcs.
fn chart_base_points(dom: &MetricDomain, chart: &dyn Chart, count: usize, seed: u64) -> Vec<Point> {
    let arcs = chart.base_arcs();
    let per = (count / arcs.len().max(1)).max(4);
    let mut out = Vec::new();
    for (k, arc) in arcs.iter().enumerate() {
        let mut h = sampling::Halton::new(1, seed ^ (k as u64).wrapping_mul(0x9E37));
        for _ in 0..per {
            let u = h.next_point()[0] * arc.len;
            out.push(dom.base.point_at(dom.base.wrap_param(arc.start + u)));
        }
    }
    out
}

fn validate_local(dom: &MetricDomain, collar: &LocalCollar, cfg: &ValidationConfig) -> Result<()> {
    let pts = chart_base_points(dom, collar.chart.as_ref(), 200, cfg.seed);
    let (lo, hi) = collar.chart.height_range();
    let mut h = sampling::Halton::new(1, cfg.seed ^ 0x51ab);
    for x in &pts {
        let y0 = collar.forward(x, 0.0)?;
        if y0.dist(x) > 1e-12 {
            return Err(fail(
                "base identity",
                format!("|c(x,0) - x| = {} at {:?}", y0.dist(x), x.0),
            ));
        }
        let t = lo + h.next_point()[0] * (hi - lo);
        let y = collar.forward(x, t)?;
        if !collar.in_image(&y) {
            return Err(fail(
                "image predicate",
                format!("c(x,{t}) not classified in-image at {:?}", x.0),
            ));
        }
        let p = collar.inverse(&y)?;
        let residual = p.base.dist(x) + (p.height - t).abs();
        // The corner point of a wedge chart collapses base information;
        // accept any preimage that reproduces the same image point.
        if residual > 1e-10 {
            let back = collar.forward(&p.base, p.height)?;
            if back.dist(&y) > 1e-10 {
                return Err(fail(
                    "inverse roundtrip",
                    format!("residual {residual} at {:?}, t = {t}", x.0),
                ));
            }
        }
    }
    Ok(())
}

pub fn build_global_collar(
    collars: Vec<LocalCollar>,
    pou: PartitionOfUnity,
    dom: &MetricDomain,
    cfg: &ValidationConfig,
) -> Result<GlobalCollar> {
    if collars.len() != pou.len() {
        return Err(CollarError::NotACover(format!(
            "{} collars for {} cover members",
            collars.len(),
            pou.len()
        )));
    }
    for c in &collars {
        if c.chart.height_range() != (0.0, 1.0) {
            return Err(CollarError::InvalidParameter(format!(
                "collar {} is not one-sided",
                c.label
            )));
        }
        validate_local(dom, c, cfg)?;
    }
    let gc = GlobalCollar {
        collars,
        pou,
        dom: dom.clone(),
    };

    let base_pts = dom.base_sample(cfg.base_samples, cfg.seed);
    for x in &base_pts {
        let y = gc.evaluate(x, 0.0)?;
        if y.dist(x) > 1e-10 {
            return Err(fail(
                "global base identity",
                format!("|h(x,0) - x| = {} at {:?}", y.dist(x), x.0),
            ));
        }
    }

    // Pasting condition: at t = lambda_{Sigma,j}(x) the formulas for
    // regions j and j+1 must agree.
    for x in base_pts.iter().take(200) {
        let cum = gc.cumulative(x)?;
        for j in 1..gc.collars.len() {
            let t = cum[j];
            // The interface is meaningful only where both adjacent
            // regions have positive width at this base point.
            if cum[j] - cum[j - 1] <= 1e-9 || cum[j + 1] - cum[j] <= 1e-9 {
                continue;
            }
            let a = gc.evaluate_region(j, x, t)?;
            let b = gc.evaluate_region(j + 1, x, t.min(1.0))?;
            if a.dist(&b) > 1e-9 {
                return Err(fail(
                    "boundary continuity",
                    format!(
                        "regions {j}/{} disagree by {} at {:?}, t = {t}",
                        j + 1,
                        a.dist(&b),
                        x.0
                    ),
                ));
            }
        }
    }

    // Sampled injectivity on the cylinder.
    let n = cfg.injectivity_samples;
    let params = sampling::sample_curve_params(&dom.base, n, cfg.seed ^ 0xfeed);
    let mut hh = sampling::Halton::new(1, cfg.seed ^ 0xbeef);
    let mut inputs = Vec::with_capacity(n);
    let mut images = Vec::with_capacity(n);
    for &s in &params {
        let x = dom.base.point_at(s);
        let t = hh.next_point()[0];
        let y = gc.evaluate(&x, t)?;
        inputs.push((x, t));
        images.push(y);
    }
    for i in 0..n {
        for j in (i + 1)..n {
            if images[i].dist(&images[j]) < 1e-12 {
                let din = inputs[i].0.dist(&inputs[j].0) + (inputs[i].1 - inputs[j].1).abs();
                if din > 1e-10 {
                    return Err(fail(
                        "injectivity",
                        format!(
                            "inputs {:?},{} and {:?},{} collide",
                            inputs[i].0 .0, inputs[i].1, inputs[j].0 .0, inputs[j].1
                        ),
                    ));
                }
            }
        }
    }

    // Fiber monotonicity: t -> h(x,t) injective along sampled fibers.
    for x in base_pts.iter().take(20) {
        let mut prev: Option<(f64, Point)> = None;
        for k in 0..=cfg.fiber_grid {
            let t = k as f64 / cfg.fiber_grid as f64;
            let y = gc.evaluate(x, t)?;
            if let Some((tp, yp)) = &prev {
                if (t - tp).abs() > 1e-6 && y.dist(yp) == 0.0 {
                    return Err(fail(
                        "fiber monotonicity",
                        format!("fiber at {:?} stalls between t={tp} and t={t}", x.0),
                    ));
                }
            }
            prev = Some((t, y));
        }
    }

    Ok(gc)
}
