//! Brute-force reference solvers used to check [`barycenter`](super::barycenter).

use super::{active_indices, objective_argmax, BarycenterResult, WeightedPointSet};
use crate::error::{Error, Result};
use crate::model::{minkowski, tangent_basis, ModelKind, ModelPoint};
use crate::par::Execution;
use crate::space::{ConvexSubset, GeodesicSpace, ModelSpace, RTree, TreePoint};

/// Scan points per axis preceding each golden-section search of the chart
/// oracle.
pub const DEFAULT_ORACLE_RESOLUTION: usize = 65;
/// Relative width at which the oracle's line searches stop.
const LINE_TOL: f64 = 1e-13;
const MAX_CHART_DIM: usize = 3;

/// Spaces with an independent reference solver.
pub trait OracleSolve: GeodesicSpace + Sized {
    fn oracle(set: &WeightedPointSet<Self>, resolution: usize) -> Result<BarycenterResult<Self::Point>>;
}

/// Reference minimizer of the objective: scanned line searches in a chart
/// for model spaces, exact edge-wise minimization for trees.
pub fn oracle_grid<S: OracleSolve>(
    set: &WeightedPointSet<S>,
    resolution: usize,
) -> Result<BarycenterResult<S::Point>> {
    S::oracle(set, resolution)
}

impl OracleSolve for ModelSpace {
    fn oracle(set: &WeightedPointSet<Self>, resolution: usize) -> Result<BarycenterResult<ModelPoint>> {
        chart_oracle(set, set.space(), resolution)
    }
}

impl OracleSolve for ConvexSubset<ModelSpace> {
    fn oracle(set: &WeightedPointSet<Self>, resolution: usize) -> Result<BarycenterResult<ModelPoint>> {
        chart_oracle(set, set.space().ambient(), resolution)
    }
}

impl OracleSolve for RTree {
    fn oracle(set: &WeightedPointSet<Self>, _resolution: usize) -> Result<BarycenterResult<TreePoint>> {
        tree_oracle(set)
    }
}

fn finish<S: GeodesicSpace>(
    set: &WeightedPointSet<S>,
    point: S::Point,
    iterations: usize,
    residual: f64,
) -> BarycenterResult<S::Point> {
    let radius = objective_argmax(set, &point, Execution::Sequential).1;
    BarycenterResult {
        active_indices: active_indices(set, &point, radius, 1e-6),
        barycenter: point,
        baryradius: radius,
        iterations,
        residual,
    }
}

/// Chart of a model space centred at `base` in which geodesics are straight
/// lines: the identity for `E^n`, the gnomonic projection for spheres and the
/// Klein model for hyperbolic space.
struct ProjectiveChart {
    kind: ModelKind,
    base: Vec<f64>,
    frame: Vec<Vec<f64>>,
}

impl ProjectiveChart {
    fn new(space: &ModelSpace, base: &ModelPoint) -> Self {
        ProjectiveChart {
            kind: space.kind(),
            base: base.coords().to_vec(),
            frame: tangent_basis(space.kind(), base.coords()),
        }
    }

    /// Half-width of a box whose image contains the ball `B(base, radius)`.
    fn reach(space: &ModelSpace, radius: f64) -> f64 {
        let k = space.curvature().k();
        let a = radius * k.abs().sqrt();
        match space.kind() {
            ModelKind::Euclidean => radius,
            ModelKind::Sphere => a.tan(),
            ModelKind::Hyperboloid => a.tanh(),
        }
    }

    fn point(&self, v: &[f64]) -> Option<ModelPoint> {
        let mut w = self.base.clone();
        for (e, c) in self.frame.iter().zip(v) {
            w.iter_mut().zip(e).for_each(|(a, b)| *a += c * b);
        }
        let scale = match self.kind {
            ModelKind::Euclidean => 1.0,
            ModelKind::Sphere => w.iter().map(|a| a * a).sum::<f64>().sqrt(),
            ModelKind::Hyperboloid => {
                let q = -minkowski(&w, &w);
                if q <= 0.0 {
                    return None;
                }
                q.sqrt()
            }
        };
        w.iter_mut().for_each(|a| *a /= scale);
        Some(ModelPoint::from_parts_unchecked(self.kind, w))
    }
}

/// Minimizer of `f` on `[lo, hi]`: the best of `scan` evenly spaced samples,
/// refined by golden-section search on the neighbouring cells. Exact up to
/// the line tolerance for unimodal `f`.
fn line_search(f: &mut dyn FnMut(f64) -> f64, lo: f64, hi: f64, scan: usize) -> (f64, f64) {
    let h = (hi - lo) / (scan - 1) as f64;
    let (mut best_t, mut best) = (lo, f64::INFINITY);
    for i in 0..scan {
        let t = lo + i as f64 * h;
        let v = f(t);
        if v < best {
            best = v;
            best_t = t;
        }
    }
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = ((best_t - h).max(lo), (best_t + h).min(hi));
    let (mut c, mut d) = (b - g * (b - a), a + g * (b - a));
    let (mut fc, mut fd) = (f(c), f(d));
    while b - a > LINE_TOL * (hi - lo) {
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = f(d);
        }
    }
    let t = (a + b) / 2.0;
    let v = f(t);
    if v <= best {
        (t, v)
    } else {
        (best_t, best)
    }
}

/// Coordinate-wise nested minimization: `min_{v_0} min_{v_1} ... f(v)`.
fn nested_minimize(
    v: &mut Vec<f64>,
    axis: usize,
    half: f64,
    scan: usize,
    f: &dyn Fn(&[f64]) -> f64,
) -> f64 {
    if axis == v.len() {
        return f(v);
    }
    let mut inner = |t: f64| {
        v[axis] = t;
        nested_minimize(v, axis + 1, half, scan, f)
    };
    let (t, _) = line_search(&mut inner, -half, half, scan);
    v[axis] = t;
    nested_minimize(v, axis + 1, half, scan, f)
}

/// Reference solver for model spaces and their convex subsets. The
/// barycenter lies in the ball `B(p0, R)`, `R = max d(p0, p)`, around the
/// first positive-weight point `p0`. In a chart where geodesics are lines,
/// sublevel sets of the objective (intersections of balls) are convex, so
/// the objective is unimodal along every line and so is each partial minimum
/// of it; nested line searches over a box covering the ball therefore find
/// the minimum.
fn chart_oracle<S: GeodesicSpace<Point = ModelPoint>>(
    set: &WeightedPointSet<S>,
    ambient: &ModelSpace,
    resolution: usize,
) -> Result<BarycenterResult<ModelPoint>> {
    let space = set.space();
    let n = ambient.dim();
    if n > MAX_CHART_DIM {
        return Err(Error::Unsupported(format!("chart oracle is limited to dimension {MAX_CHART_DIM}, got {n}")));
    }
    if resolution < 3 {
        return Err(Error::invalid("oracle resolution must be at least 3"));
    }
    let p0 = set
        .points()
        .iter()
        .zip(set.weights())
        .find(|(_, &w)| w > 0.0)
        .map(|(p, _)| p.clone())
        .expect("some weight is positive");
    let radius = set.points().iter().map(|p| space.distance(&p0, p)).fold(0.0, f64::max);
    if radius == 0.0 {
        return Ok(finish(set, p0, 0, 0.0));
    }
    let chart = ProjectiveChart::new(ambient, &p0);
    let half = ProjectiveChart::reach(ambient, radius) * (1.0 + 1e-9);
    // Outside the chart's domain or the subset, a penalty that grows away
    // from the centre keeps every line profile unimodal.
    let penalty = |v: &[f64]| 1e300 * (1.0 + v.iter().map(|c| c * c).sum::<f64>());
    let eval = |v: &[f64]| match chart.point(v) {
        Some(x) if space.contains(&x) => objective_argmax(set, &x, Execution::Sequential).1,
        _ => penalty(v),
    };
    let mut v = vec![0.0; n];
    nested_minimize(&mut v, 0, half, resolution, &eval);
    let point = chart.point(&v).expect("minimizer lies in the chart domain");
    Ok(finish(set, point, resolution.pow(n as u32), LINE_TOL * half))
}

/// One linear piece `slope * s + intercept` of the objective along an edge.
#[derive(Clone, Copy)]
struct Line {
    slope: f64,
    intercept: f64,
}

impl Line {
    fn at(&self, s: f64) -> f64 {
        self.slope * s + self.intercept
    }
}

/// Exact minimizer on a finite tree. Along an edge of length `L`, parametrized
/// by the offset `s`, each weighted distance is `u (s + a)` or `u (L - s + b)`
/// for points off the edge and `u |s - o|` for points on it, so the objective
/// is a maximum of lines with slopes `+-u`. Its minimum on `[0, L]` sits at an
/// endpoint or where a rising line meets a falling one.
pub fn tree_oracle(set: &WeightedPointSet<RTree>) -> Result<BarycenterResult<TreePoint>> {
    let tree = set.space();
    let positive: Vec<(TreePoint, f64)> = set
        .points()
        .iter()
        .zip(set.weights())
        .filter(|(_, &w)| w > 0.0)
        .map(|(p, &w)| (*p, w))
        .collect();
    let per_edge = Execution::default().map_range(tree.edge_count(), |e| {
        let len = tree.edge_length(e);
        let (from, to) = (tree.vertex_point(tree.edge_endpoints(e).0), tree.vertex_point(tree.edge_endpoints(e).1));
        let mut rising = Vec::new();
        let mut falling = Vec::new();
        for (p, u) in &positive {
            if p.edge == e {
                rising.push(Line { slope: *u, intercept: -u * p.offset });
                falling.push(Line { slope: -u, intercept: u * p.offset });
            } else {
                let a = tree.tree_distance(&from, p);
                let b = tree.tree_distance(&to, p);
                // Off the edge, p is reached through exactly one endpoint.
                if a <= b {
                    rising.push(Line { slope: *u, intercept: u * a });
                } else {
                    falling.push(Line { slope: -u, intercept: u * (len + b) });
                }
            }
        }
        let value = |s: f64| {
            rising.iter().chain(&falling).map(|l| l.at(s)).fold(0.0, f64::max)
        };
        let mut candidates = vec![0.0, len];
        for r in &rising {
            for f in &falling {
                let s = (f.intercept - r.intercept) / (r.slope - f.slope);
                if s > 0.0 && s < len {
                    candidates.push(s);
                }
            }
        }
        candidates
            .into_iter()
            .map(|s| (s, value(s)))
            .fold((0.0, f64::INFINITY), |best, c| if c.1 < best.1 { c } else { best })
    });
    let (edge, (offset, _)) = per_edge
        .into_iter()
        .enumerate()
        .fold(None::<(usize, (f64, f64))>, |best, cur| match best {
            Some(b) if b.1 .1 <= cur.1 .1 => Some(b),
            _ => Some(cur),
        })
        .expect("trees have edges");
    let point = tree.point(edge, offset.clamp(0.0, tree.edge_length(edge)))?;
    Ok(finish(set, point, tree.edge_count(), 0.0))
}
