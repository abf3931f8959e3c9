//! Sampled Lipschitz estimation and the closed-form bound evaluation.
//! Estimates are maxima of difference quotients over deterministic,
//! stratified pair sets and are therefore lower bounds of the true
//! constants; the verification direction (estimate <= bound) is sound.

use serde::{Deserialize, Serialize};

use crate::collar::GlobalCollar;
use crate::curve::ArcInterval;
use crate::error::{CollarError, Result};
use crate::metric::{CollarPoint, MetricDomain, Point};
use crate::pou::Shrunk;
use crate::sampling::{splitmix64, unit_f64, Halton};

/// Thread budget for pair sweeps; COLLAR_FORGE_THREADS caps it.
pub fn sweep_threads() -> usize {
    let hw = std::thread::available_parallelism()
        .map(|n| n.get())
        .unwrap_or(1);
    let cap = std::env::var("COLLAR_FORGE_THREADS")
        .ok()
        .and_then(|v| v.parse::<usize>().ok())
        .filter(|&n| n >= 1)
        .unwrap_or(hw);
    cap.min(hw.max(1)).clamp(1, 64)
}

#[derive(Clone, Copy, Debug)]
pub struct PairConfig {
    pub n_pairs: usize,
    pub seed: u64,
}

impl Default for PairConfig {
    fn default() -> Self {
        PairConfig {
            n_pairs: 10_000,
            seed: 0,
        }
    }
}

/// Stratified pairs on arcs x height-range: half global, half local
/// perturbations at scales 1e-2 and 1e-4 (derivative-like quotients).
pub fn collar_pairs(
    dom: &MetricDomain,
    arcs: &[ArcInterval],
    height_range: (f64, f64),
    cfg: &PairConfig,
) -> Vec<(CollarPoint, CollarPoint)> {
    let curve = &dom.base;
    let total_arc: f64 = arcs.iter().map(|a| a.len).sum();
    let mut h = Halton::new(4, cfg.seed);
    let mut rng = cfg.seed ^ 0xc0ffee;
    let point_at = |w: f64, t: f64| -> CollarPoint {
        // w in [0,1) selects a position along the concatenated arcs.
        let mut u = w * total_arc;
        for a in arcs {
            if u <= a.len {
                let s = curve.wrap_param(a.start + u);
                return CollarPoint::new(curve.point_at(s), t);
            }
            u -= a.len;
        }
        let a = arcs.last().unwrap();
        CollarPoint::new(curve.point_at(curve.wrap_param(a.start + a.len)), t)
    };
    let span = height_range.1 - height_range.0;
    let mut out = Vec::with_capacity(cfg.n_pairs);
    let n_global = cfg.n_pairs / 2;
    for _ in 0..n_global {
        let u = h.next_point();
        out.push((
            point_at(u[0], height_range.0 + u[1] * span),
            point_at(u[2], height_range.0 + u[3] * span),
        ));
    }
    let scales = [1e-2, 1e-4];
    while out.len() < cfg.n_pairs {
        let u = h.next_point();
        let scale = scales[(splitmix64(&mut rng) & 1) as usize];
        let p = point_at(u[0], height_range.0 + u[1] * span);
        let dw = (u[2] - 0.5) * 2.0 * scale;
        let dt = (unit_f64(splitmix64(&mut rng)) - 0.5) * 2.0 * scale * span;
        let q = point_at(
            (u[0] + dw / total_arc).rem_euclid(1.0),
            (p.height + dt).clamp(height_range.0, height_range.1),
        );
        out.push((p, q));
    }
    out
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Witness {
    pub x: Vec<f64>,
    pub s: f64,
    pub y: Vec<f64>,
    pub t: f64,
    pub in_dist: f64,
    pub out_dist: f64,
    pub quotient: f64,
}

#[derive(Clone, Debug)]
pub struct Estimate {
    pub value: f64,
    pub witness: Witness,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Direction {
    Forward,
    Inverse,
}

fn pair_key(p: &CollarPoint, q: &CollarPoint) -> Vec<f64> {
    let mut k = p.base.0.clone();
    k.push(p.height);
    k.extend_from_slice(&q.base.0);
    k.push(q.height);
    k
}

fn lex_less(a: &[f64], b: &[f64]) -> bool {
    for (x, y) in a.iter().zip(b) {
        if x < y {
            return true;
        }
        if x > y {
            return false;
        }
    }
    false
}

/// Max difference quotient over the pairs; `Forward` measures
/// dist(f p, f q) / dist(p, q), `Inverse` the reciprocal quotient.
/// Deterministic: ties resolve to the lexicographically smallest pair.
pub fn estimate_constant<F>(
    map: &F,
    dom: &MetricDomain,
    pairs: &[(CollarPoint, CollarPoint)],
    dir: Direction,
) -> Result<Estimate>
where
    F: Fn(&Point, f64) -> Result<Point> + Sync,
{
    let threads = sweep_threads().min(pairs.len().max(1));
    let chunk = pairs.len().div_ceil(threads);
    let results: Vec<Result<Vec<Option<Witness>>>> = std::thread::scope(|scope| {
        let handles: Vec<_> = pairs
            .chunks(chunk)
            .map(|slice| {
                scope.spawn(move || {
                    slice
                        .iter()
                        .map(|(p, q)| -> Result<Option<Witness>> {
                            let din =
                                dom.ambient_dist(&p.base, &q.base) + (p.height - q.height).abs();
                            let fp = map(&p.base, p.height)?;
                            let fq = map(&q.base, q.height)?;
                            let dout = dom.ambient_dist(&fp, &fq);
                            let (num, den) = match dir {
                                Direction::Forward => (dout, din),
                                Direction::Inverse => (din, dout),
                            };
                            if den < 1e-12 {
                                return Ok(None);
                            }
                            Ok(Some(Witness {
                                x: p.base.0.clone(),
                                s: p.height,
                                y: q.base.0.clone(),
                                t: q.height,
                                in_dist: din,
                                out_dist: dout,
                                quotient: num / den,
                            }))
                        })
                        .collect()
                })
            })
            .collect();
        handles.into_iter().map(|h| h.join().unwrap()).collect()
    });
    let mut best: Option<(Witness, Vec<f64>)> = None;
    for chunk_result in results {
        for w in chunk_result?.into_iter().flatten() {
            let key = {
                let p = CollarPoint::new(Point(w.x.clone()), w.s);
                let q = CollarPoint::new(Point(w.y.clone()), w.t);
                pair_key(&p, &q)
            };
            let take = match &best {
                None => true,
                Some((bw, bk)) => {
                    w.quotient > bw.quotient
                        || (w.quotient == bw.quotient && lex_less(&key, bk))
                }
            };
            if take {
                best = Some((w, key));
            }
        }
    }
    match best {
        Some((witness, _)) => Ok(Estimate {
            value: witness.quotient,
            witness,
        }),
        None => Err(CollarError::DegeneratePairs),
    }
}

/// All quotients over the pairs, for CSV export.
pub fn quotient_rows<F>(
    map: &F,
    dom: &MetricDomain,
    pairs: &[(CollarPoint, CollarPoint)],
) -> Result<Vec<Witness>>
where
    F: Fn(&Point, f64) -> Result<Point> + Sync,
{
    let mut rows = Vec::with_capacity(pairs.len());
    for (p, q) in pairs {
        let din = dom.ambient_dist(&p.base, &q.base) + (p.height - q.height).abs();
        if din < 1e-12 {
            continue;
        }
        let fp = map(&p.base, p.height)?;
        let fq = map(&q.base, q.height)?;
        let dout = dom.ambient_dist(&fp, &fq);
        rows.push(Witness {
            x: p.base.0.clone(),
            s: p.height,
            y: q.base.0.clone(),
            t: q.height,
            in_dist: din,
            out_dist: dout,
            quotient: dout / din,
        });
    }
    Ok(rows)
}

/// Interior margin: largest grid value z such that every sampled point of
/// every c_i(supp(lambda_i) x [0, 0.75]) keeps a z-ball inside the chart
/// image (probed in 32 directions). 2D only.
pub fn estimate_zeta(gc: &GlobalCollar, resolution: f64) -> Result<f64> {
    if gc.dom.dim != 2 {
        return Err(CollarError::Unsupported("zeta estimation beyond the plane"));
    }
    let mut probes: Vec<(usize, Point)> = Vec::new();
    for (i, collar) in gc.collars.iter().enumerate() {
        let arc = match &gc.pou.shrunk[i] {
            Shrunk::Whole => ArcInterval::new(0.0, gc.dom.base.total_len()),
            Shrunk::Arc(a) => *a,
            Shrunk::Empty => continue,
        };
        let mut h = Halton::new(2, 0x5eed ^ i as u64);
        for _ in 0..160 {
            let u = h.next_point();
            let s = gc.dom.base.wrap_param(arc.start + u[0] * arc.len);
            let x = gc.dom.base.point_at(s);
            let z = collar.forward(&x, 0.75 * u[1])?;
            if !collar.in_image(&z) {
                return Err(CollarError::InconsistentFixture(format!(
                    "image sample of collar {i} fails its own membership at {:?}",
                    z.0
                )));
            }
            probes.push((i, z));
        }
    }
    let dirs: Vec<[f64; 2]> = (0..32)
        .map(|k| {
            let th = std::f64::consts::TAU * k as f64 / 32.0;
            [th.cos(), th.sin()]
        })
        .collect();
    // Balls are relative to the collared space X: probes leaving X are
    // ignored.
    let ball_inside = |zeta: f64| -> bool {
        probes.iter().all(|(i, z)| {
            dirs.iter().all(|d| {
                let p = z.add_scaled(d, zeta);
                !gc.dom.in_ambient(&p) || gc.collars[*i].in_image(&p)
            })
        })
    };
    let mut zeta = gc.dom.region_bounds.diameter();
    while zeta > resolution {
        if ball_inside(zeta) {
            return Ok(zeta);
        }
        zeta *= 0.5;
    }
    Err(CollarError::InconsistentFixture(format!(
        "interior margin below resolution {resolution}"
    )))
}

/// Max over i of the number of earlier-or-equal chart images meeting
/// W_i, tested on image samples.
pub fn overlap_chain_count(gc: &GlobalCollar) -> Result<usize> {
    let m = gc.collars.len();
    let mut image_samples: Vec<Vec<Point>> = Vec::with_capacity(m);
    for (i, collar) in gc.collars.iter().enumerate() {
        let mut pts = Vec::new();
        for arc in collar.chart.base_arcs() {
            let mut h = Halton::new(2, 0xace ^ (i as u64) << 3);
            for _ in 0..120 {
                let u = h.next_point();
                let s = gc.dom.base.wrap_param(arc.start + u[0] * arc.len);
                pts.push(collar.forward(&gc.dom.base.point_at(s), u[1])?);
            }
        }
        image_samples.push(pts);
    }
    let meet = |i: usize, j: usize| -> bool {
        image_samples[j]
            .iter()
            .any(|z| gc.collars[i].in_image(z))
            || image_samples[i]
                .iter()
                .any(|z| gc.collars[j].in_image(z))
    };
    let mut n = 1;
    for i in 0..m {
        let count = (0..=i).filter(|&j| j == i || meet(i, j)).count();
        n = n.max(count);
    }
    Ok(n)
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct ConstantBundle {
    pub l: f64,
    pub l_sigma: f64,
    pub c: f64,
    pub c_b: f64,
    pub zeta: f64,
    pub n: usize,
}

/// Forward bound: C (1 + L_Sigma/2)(1 + 2 L_Sigma) max(1+2L, 1+1/zeta)^N C_b^N.
pub fn closed_form_bound_l(b: &ConstantBundle) -> f64 {
    let core = (1.0 + 2.0 * b.l).max(1.0 + 1.0 / b.zeta);
    b.c * (1.0 + b.l_sigma / 2.0)
        * (1.0 + 2.0 * b.l_sigma)
        * core.powi(b.n as i32)
        * b.c_b.powi(b.n as i32)
}

/// Inverse bound: C (1 + L_Sigma/2) C_b^{2N} (1 + C/zeta + L/2)^N (3 + 1/zeta + 3L)^N.
/// The two power bases appear inside one-argument maxima in the source
/// formula and are evaluated as written.
pub fn closed_form_bound_il(b: &ConstantBundle) -> f64 {
    b.c * (1.0 + b.l_sigma / 2.0)
        * b.c_b.powi(2 * b.n as i32)
        * (1.0 + b.c / b.zeta + b.l / 2.0).powi(b.n as i32)
        * (3.0 + 1.0 / b.zeta + 3.0 * b.l).powi(b.n as i32)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Verdict {
    pub check: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LipschitzReport {
    pub constants: ConstantBundle,
    pub bounds: Bounds,
    pub estimates: Estimates,
    pub verdicts: Vec<Verdict>,
    pub witnesses: Witnesses,
    #[serde(skip)]
    pub quotients: Vec<Witness>,
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct Bounds {
    pub l: f64,
    pub il: f64,
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct Estimates {
    pub l_hat: f64,
    pub il_hat: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Witnesses {
    pub l: Witness,
    pub il: Witness,
}

impl LipschitzReport {
    pub fn passed(&self) -> bool {
        self.verdicts.iter().all(|v| v.passed)
    }
}

#[derive(Clone, Copy, Debug)]
pub struct VerifyConfig {
    pub n_pairs: usize,
    pub seed: u64,
    pub zeta_resolution: f64,
    pub keep_quotients: bool,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        VerifyConfig {
            n_pairs: 10_000,
            seed: 0,
            zeta_resolution: 1e-4,
            keep_quotients: false,
        }
    }
}

/// Measure the constants of a global collar, evaluate the closed-form
/// bounds, estimate the collar's own constants by sampling, and compare.
pub fn verify(gc: &GlobalCollar, cfg: &VerifyConfig) -> Result<LipschitzReport> {
    let dom = &gc.dom;
    let mut verdicts = Vec::new();

    // Per-chart constants (declared where available, measured otherwise;
    // declarations are cross-checked against measurements).
    let mut c_max = 1.0f64;
    let mut cb_max = 1.0f64;
    for (i, collar) in gc.collars.iter().enumerate() {
        let arcs = collar.chart.base_arcs();
        let pairs = collar_pairs(
            dom,
            &arcs,
            collar.chart.height_range(),
            &PairConfig {
                n_pairs: (cfg.n_pairs / gc.collars.len().max(1)).max(500),
                seed: cfg.seed ^ (i as u64 + 1).wrapping_mul(0x9e37_79b9),
            },
        );
        let chart = collar.chart.clone();
        let map = move |x: &Point, t: f64| chart.forward(x, t);
        let l_est = estimate_constant(&map, dom, &pairs, Direction::Forward)?;
        let il_est = estimate_constant(&map, dom, &pairs, Direction::Inverse)?;
        let declared = collar.chart.declared();
        let l_i = match declared.l {
            Some(dl) => {
                let ok = l_est.value <= dl * 1.01 + 1e-9;
                verdicts.push(Verdict {
                    check: format!("declared L({})", collar.label),
                    passed: ok,
                    detail: format!(
                        "sampled {:.6} vs declared {:.6}; witness ({:?},{:.4})-({:?},{:.4})",
                        l_est.value,
                        dl,
                        l_est.witness.x,
                        l_est.witness.s,
                        l_est.witness.y,
                        l_est.witness.t
                    ),
                });
                dl.max(if ok { dl } else { l_est.value })
            }
            None => l_est.value,
        };
        let il_i = match declared.il {
            Some(dil) => {
                let ok = il_est.value <= dil * 1.01 + 1e-9;
                verdicts.push(Verdict {
                    check: format!("declared iL({})", collar.label),
                    passed: ok,
                    detail: format!("sampled {:.6} vs declared {dil:.6}", il_est.value),
                });
                dil.max(if ok { dil } else { il_est.value })
            }
            None => il_est.value,
        };
        c_max = c_max.max(l_i);
        cb_max = cb_max.max(l_i * il_i.max(1.0));
    }

    let zeta = estimate_zeta(gc, cfg.zeta_resolution)?;
    let n = overlap_chain_count(gc)?;
    let bundle = ConstantBundle {
        l: gc.pou.l_member,
        l_sigma: gc.pou.l_sum,
        c: c_max,
        c_b: cb_max,
        zeta,
        n,
    };
    let bounds = Bounds {
        l: closed_form_bound_l(&bundle),
        il: closed_form_bound_il(&bundle),
    };

    // Estimate the global collar's constants.
    let whole = ArcInterval::new(0.0, dom.base.total_len());
    let pairs = collar_pairs(
        dom,
        &[whole],
        (0.0, 1.0),
        &PairConfig {
            n_pairs: cfg.n_pairs,
            seed: cfg.seed ^ 0x8cafe,
        },
    );
    let gc_map = |x: &Point, t: f64| gc.evaluate(x, t);
    let l_hat = estimate_constant(&gc_map, dom, &pairs, Direction::Forward)?;
    let il_hat = estimate_constant(&gc_map, dom, &pairs, Direction::Inverse)?;

    verdicts.push(Verdict {
        check: "L(h) <= closed-form bound".into(),
        passed: l_hat.value <= bounds.l + 1e-9,
        detail: format!("sampled {:.6} vs bound {:.6}", l_hat.value, bounds.l),
    });
    verdicts.push(Verdict {
        check: "iL(h) <= closed-form bound".into(),
        passed: il_hat.value <= bounds.il + 1e-9,
        detail: format!("sampled {:.6} vs bound {:.6}", il_hat.value, bounds.il),
    });

    let quotients = if cfg.keep_quotients {
        quotient_rows(&gc_map, dom, &pairs)?
    } else {
        Vec::new()
    };

    Ok(LipschitzReport {
        constants: bundle,
        bounds,
        estimates: Estimates {
            l_hat: l_hat.value,
            il_hat: il_hat.value,
        },
        verdicts,
        witnesses: Witnesses {
            l: l_hat.witness,
            il: il_hat.witness,
        },
        quotients,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curve::BaseCurve;
    use crate::metric::BoxBounds;

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

    fn pairs(dom: &MetricDomain, n: usize) -> Vec<(CollarPoint, CollarPoint)> {
        collar_pairs(
            dom,
            &[ArcInterval::new(0.0, 3.0)],
            (0.0, 1.0),
            &PairConfig { n_pairs: n, seed: 7 },
        )
    }

    #[test]
    fn pair_generation_is_deterministic() {
        let dom = strip_dom();
        let a = pairs(&dom, 500);
        let b = pairs(&dom, 500);
        assert_eq!(a.len(), 500);
        for (p, q) in a.iter().zip(&b) {
            assert_eq!(p.0.base, q.0.base);
            assert_eq!(p.1.height, q.1.height);
        }
    }

    #[test]
    fn vertical_embedding_has_unit_forward_constant() {
        let dom = strip_dom();
        let map = |x: &Point, t: f64| -> Result<Point> {
            Ok(Point(vec![x.0[0], x.0[1] + t]))
        };
        let ps = pairs(&dom, 4000);
        let est = estimate_constant(&map, &dom, &ps, Direction::Forward).unwrap();
        // Isometry onto the product factors: quotient never exceeds 1 and
        // pure-height pairs realize it.
        assert!(est.value <= 1.0 + 1e-12, "L = {}", est.value);
        assert!(est.value > 0.95, "L = {}", est.value);
        let inv = estimate_constant(&map, &dom, &ps, Direction::Inverse).unwrap();
        // Inverse quotient (|dx| + |dt|) / sqrt(dx^2 + dt^2) <= sqrt 2.
        assert!(inv.value <= 2f64.sqrt() + 1e-12, "iL = {}", inv.value);
        assert!(inv.value >= 1.0);
    }

    #[test]
    fn doubled_map_doubles_the_constant() {
        let dom = strip_dom();
        let map = |x: &Point, t: f64| -> Result<Point> {
            Ok(Point(vec![x.0[0], x.0[1] + 2.0 * t]))
        };
        let ps = pairs(&dom, 4000);
        let est = estimate_constant(&map, &dom, &ps, Direction::Forward).unwrap();
        assert!(est.value <= 2.0 + 1e-12 && est.value > 1.9, "L = {}", est.value);
        assert!(est.witness.quotient == est.value);
    }

    #[test]
    fn forward_bound_plugin_values() {
        let b = ConstantBundle { l: 0.0, l_sigma: 0.0, c: 1.0, c_b: 1.0, zeta: 1.0, n: 1 };
        assert_eq!(closed_form_bound_l(&b), 2.0);
        let b = ConstantBundle { l: 1.0, l_sigma: 2.0, c: 1.0, c_b: 1.0, zeta: 0.25, n: 1 };
        assert_eq!(closed_form_bound_l(&b), 50.0);
    }

    #[test]
    fn inverse_bound_plugin_values() {
        let b = ConstantBundle { l: 0.0, l_sigma: 0.0, c: 1.0, c_b: 1.0, zeta: 1.0, n: 1 };
        assert_eq!(closed_form_bound_il(&b), 8.0);
    }

    #[test]
    fn zero_overlap_degenerates_to_prefactor() {
        let b = ConstantBundle { l: 5.0, l_sigma: 4.0, c: 2.0, c_b: 3.0, zeta: 0.1, n: 0 };
        assert_eq!(closed_form_bound_l(&b), 2.0 * 3.0 * 9.0);
        assert_eq!(closed_form_bound_il(&b), 2.0 * 3.0);
    }

    #[test]
    fn bounds_monotone_in_each_constant() {
        let base = ConstantBundle { l: 1.0, l_sigma: 2.0, c: 1.5, c_b: 1.2, zeta: 0.25, n: 2 };
        let l0 = closed_form_bound_l(&base);
        let il0 = closed_form_bound_il(&base);
        for f in [
            |b: &mut ConstantBundle| b.l += 0.5,
            |b: &mut ConstantBundle| b.l_sigma += 0.5,
            |b: &mut ConstantBundle| b.c += 0.5,
            |b: &mut ConstantBundle| b.c_b += 0.5,
            |b: &mut ConstantBundle| b.zeta -= 0.1,
            |b: &mut ConstantBundle| b.n += 1,
        ] {
            let mut b = base;
            f(&mut b);
            assert!(closed_form_bound_l(&b) >= l0);
            assert!(closed_form_bound_il(&b) >= il0);
        }
    }
}
