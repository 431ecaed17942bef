//! Hausdorff distances, finite resolutions, and convergence of barycenters
//! along sequences of weighted sets in a common ambient space.

use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::ModelPoint;
use crate::par::Execution;
use crate::report::Report;
use crate::solver::{barycenter, diameter, SolverOptions, WeightedPointSet};
use crate::space::{GeodesicSpace, ModelSpace};

/// Relative sizes of the convergence ladder, as fractions of the limit's
/// diameter.
pub const LADDER: [f64; 3] = [0.1, 0.01, 0.001];

fn directed<S: GeodesicSpace>(space: &S, a: &[S::Point], b: &[S::Point], exec: Execution) -> f64 {
    exec.map(a, |x| b.iter().map(|y| space.distance(x, y)).fold(f64::INFINITY, f64::min))
        .into_iter()
        .fold(0.0, f64::max)
}

/// `max(max_a min_b d(a, b), max_b min_a d(a, b))`.
pub fn hausdorff_distance<S: GeodesicSpace>(space: &S, a: &[S::Point], b: &[S::Point]) -> Result<f64> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::invalid("Hausdorff distance needs non-empty sets"));
    }
    let exec = Execution::default();
    Ok(directed(space, a, b, exec).max(directed(space, b, a, exec)))
}

/// Two finite sets placed in one ambient space at Hausdorff distance below
/// `delta`. The embeddings are identities.
#[derive(Clone, Debug)]
pub struct FiniteResolution<P> {
    pub set_a: Vec<P>,
    pub set_b: Vec<P>,
    pub delta: f64,
    /// The measured Hausdorff distance, an upper bound for the
    /// Gromov-Hausdorff distance of the two sets.
    pub hausdorff: f64,
}

impl<P: Clone> FiniteResolution<P> {
    pub fn new<S: GeodesicSpace<Point = P>>(space: &S, set_a: Vec<P>, set_b: Vec<P>, delta: f64) -> Result<Self> {
        let hausdorff = hausdorff_distance(space, &set_a, &set_b)?;
        if !(hausdorff < delta) {
            return Err(Error::invalid(format!("sets are {hausdorff} apart, not within delta = {delta}")));
        }
        Ok(FiniteResolution { set_a, set_b, delta, hausdorff })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Stage<P> {
    pub points: Vec<P>,
    pub weights: Vec<f64>,
    pub delta: f64,
}

/// Weighted sets `(X_n, u_n)` approaching `(X, u)`.
#[derive(Clone, Debug)]
pub struct ConvergingSequence<P> {
    stages: Vec<Stage<P>>,
    limit: (Vec<P>, Vec<f64>),
    /// Largest diameter over stages and limit.
    diameter_bound: f64,
    /// Largest weight over stages and limit.
    weight_bound: f64,
}

impl<P: Clone + Send + Sync> ConvergingSequence<P> {
    pub fn new<S: GeodesicSpace<Point = P>>(
        space: &S,
        stages: Vec<Stage<P>>,
        limit_points: Vec<P>,
        limit_weights: Vec<f64>,
    ) -> Result<Self> {
        if stages.is_empty() {
            return Err(Error::invalid("sequence has no stages"));
        }
        WeightedPointSet::new(space, limit_points.clone(), limit_weights.clone())?;
        let exec = Execution::default();
        let mut diameter_bound = diameter(space, &limit_points, exec);
        let mut weight_bound = limit_weights.iter().copied().fold(0.0, f64::max);
        for (n, stage) in stages.iter().enumerate() {
            WeightedPointSet::new(space, stage.points.clone(), stage.weights.clone())?;
            if n > 0 && !(stage.delta < stages[n - 1].delta) {
                return Err(Error::invalid(format!("stage {n}: deltas must strictly decrease")));
            }
            let h = hausdorff_distance(space, &stage.points, &limit_points)?;
            if !(h < stage.delta) {
                return Err(Error::invalid(format!(
                    "stage {n} is {h} from the limit, not within delta = {}",
                    stage.delta
                )));
            }
            diameter_bound = diameter_bound.max(diameter(space, &stage.points, exec));
            weight_bound = stage.weights.iter().copied().fold(weight_bound, f64::max);
        }
        Ok(ConvergingSequence { stages, limit: (limit_points, limit_weights), diameter_bound, weight_bound })
    }

    pub fn stages(&self) -> &[Stage<P>] {
        &self.stages
    }

    pub fn limit_points(&self) -> &[P] {
        &self.limit.0
    }

    pub fn limit_weights(&self) -> &[f64] {
        &self.limit.1
    }

    /// Uniform bounds `(b, m)` on diameters and weights.
    pub fn bounds(&self) -> (f64, f64) {
        (self.diameter_bound, self.weight_bound)
    }
}

/// For every stage `n >= first_stage`: all pairs `x_n`, `x` with
/// `d(x_n, x) < delta_n` have `|u_n(x_n) - u(x)| < epsilon`. One report per
/// stage; the measured value is the largest such weight gap.
pub fn weight_convergence_check<S: GeodesicSpace>(
    space: &S,
    seq: &ConvergingSequence<S::Point>,
    epsilon: f64,
    first_stage: usize,
) -> Vec<Report> {
    let (lp, lw) = (seq.limit_points(), seq.limit_weights());
    seq.stages
        .iter()
        .enumerate()
        .skip(first_stage)
        .map(|(n, stage)| {
            let gaps = Execution::default().map_range(stage.points.len(), |i| {
                lp.iter()
                    .zip(lw)
                    .filter(|(x, _)| space.distance(&stage.points[i], x) < stage.delta)
                    .map(|(_, w)| (stage.weights[i] - w).abs())
                    .fold(0.0, f64::max)
            });
            let gap = gaps.into_iter().fold(0.0, f64::max);
            let mut r = Report::at_most("weight-convergence", format!("stage-{n}"), gap, epsilon);
            r.pass = gap < epsilon;
            r
        })
        .collect()
}

#[derive(Clone, Debug, Serialize)]
pub struct LimitReport<P> {
    pub stage_barycenters: Vec<P>,
    pub limit_barycenter: P,
    /// `d(q_n, q_u)` per stage.
    pub distances: Vec<f64>,
    /// For each ladder rung `s`, the first stage after which every `d(q_n, q_u) < s`.
    pub ladder: Vec<(f64, Option<usize>)>,
    /// Gromov-Hausdorff upper bounds per stage: the Hausdorff distance to the limit.
    pub gh_bounds: Vec<f64>,
}

impl<P> LimitReport<P> {
    pub fn reports(&self, instance: &str) -> Vec<Report> {
        let last = *self.distances.last().expect("sequences have stages");
        self.ladder
            .iter()
            .map(|&(s, from)| {
                let r = Report::at_most("gh", format!("{instance}/ladder-{s:e}"), last, s);
                let r = Report { pass: last < s && from.is_some(), ..r };
                match from {
                    Some(n) => r.with_note(format!("below from stage {n}")),
                    None => r.with_note("never below"),
                }
            })
            .collect()
    }
}

/// Barycenters of each stage and of the limit, with the convergence ladder
/// `s in LADDER * diam(limit)`. Needs a space of non-positive curvature.
pub fn barycenter_limit<S: GeodesicSpace>(
    space: &S,
    seq: &ConvergingSequence<S::Point>,
    opts: &SolverOptions,
) -> Result<LimitReport<S::Point>> {
    if space.curvature().k() > 0.0 {
        return Err(Error::Unsupported("barycenter limits are checked in spaces of curvature <= 0".into()));
    }
    let limit = WeightedPointSet::new(space, seq.limit.0.clone(), seq.limit.1.clone())?;
    let q = barycenter(&limit, opts)?.barycenter;
    let stage_opts = SolverOptions { execution: Execution::Sequential, ..*opts };
    let stage_results = opts.execution.map(&seq.stages, |stage| -> Result<(S::Point, f64)> {
        let set = WeightedPointSet::new(space, stage.points.clone(), stage.weights.clone())?;
        let qn = barycenter(&set, &stage_opts)?.barycenter;
        let h = hausdorff_distance(space, &stage.points, &seq.limit.0)?;
        Ok((qn, h))
    });
    let mut stage_barycenters = Vec::new();
    let mut gh_bounds = Vec::new();
    for r in stage_results {
        let (qn, h) = r?;
        stage_barycenters.push(qn);
        gh_bounds.push(h);
    }
    let distances: Vec<f64> = stage_barycenters.iter().map(|qn| space.distance(qn, &q)).collect();
    let diam = diameter(space, &seq.limit.0, opts.execution);
    let ladder = LADDER
        .iter()
        .map(|&frac| {
            let s = frac * diam;
            // First index from which all later distances are below s.
            let from = (0..distances.len()).find(|&n| distances[n..].iter().all(|&d| d < s));
            (s, from)
        })
        .collect();
    Ok(LimitReport { stage_barycenters, limit_barycenter: q, distances, ladder, gh_bounds })
}

/// `d_H(B(q_n, r) ∩ X_n, B(q_u, r) ∩ X)` against `d(q_n, q_u) + 2 delta_n`
/// for one stage. Empty balls are reported as failures.
pub fn pointed_ball_check<S: GeodesicSpace>(
    space: &S,
    stage: &Stage<S::Point>,
    limit_points: &[S::Point],
    qn: &S::Point,
    q: &S::Point,
    radius: f64,
    instance: &str,
) -> Result<Report> {
    let ball = |pts: &[S::Point], c: &S::Point| -> Vec<S::Point> {
        pts.iter().filter(|p| space.distance(p, c) <= radius).cloned().collect()
    };
    let (bn, b) = (ball(&stage.points, qn), ball(limit_points, q));
    let bound = space.distance(qn, q) + 2.0 * stage.delta;
    if bn.is_empty() || b.is_empty() {
        return Ok(Report::at_most("pointed-ball", instance, f64::INFINITY, bound).failed("empty ball sample"));
    }
    let h = hausdorff_distance(space, &bn, &b)?;
    let mut r = Report::at_most("pointed-ball", instance, h, bound);
    r.pass = h < bound;
    Ok(r)
}

/// Uniform grid of `n >= 2` points on `[0, 1]`.
pub fn unit_grid(n: usize) -> Vec<ModelPoint> {
    (0..n).map(|i| ModelPoint::euclidean(vec![i as f64 / (n - 1) as f64]).expect("finite")).collect()
}

/// Dyadic grids of `[0, 1]` with `2^level + 1` points for each level in
/// `levels`, converging to the grid at `limit_level`, with weights `u(x)`.
/// `delta_n` is the grid's half-spacing plus a relative margin.
pub fn grid_sequence(
    levels: &[u32],
    limit_level: u32,
    u: impl Fn(f64) -> f64,
) -> Result<(ModelSpace, ConvergingSequence<ModelPoint>)> {
    let space = ModelSpace::euclidean(1)?;
    let weights = |pts: &[ModelPoint]| pts.iter().map(|p| u(p.coords()[0])).collect::<Vec<_>>();
    let stages = levels
        .iter()
        .map(|&l| {
            if l >= limit_level {
                return Err(Error::invalid("stage grids must be coarser than the limit grid"));
            }
            let points = unit_grid((1 << l) + 1);
            let w = weights(&points);
            Ok(Stage { points, weights: w, delta: 0.5f64.powi(l as i32 + 1) * 1.01 })
        })
        .collect::<Result<Vec<_>>>()?;
    let limit = unit_grid((1 << limit_level) + 1);
    let lw = weights(&limit);
    let seq = ConvergingSequence::new(&space, stages, limit, lw)?;
    Ok((space, seq))
}

/// Stages obtained by moving each limit point by less than `scales[n]`
/// (uniform direction, uniform length), keeping the weights.
pub fn jitter_sequence(
    space: &ModelSpace,
    rng: &mut impl Rng,
    points: Vec<ModelPoint>,
    weights: Vec<f64>,
    scales: &[f64],
) -> Result<ConvergingSequence<ModelPoint>> {
    use crate::space::TangentChart;
    let stages = scales
        .iter()
        .map(|&eps| {
            let moved = points
                .iter()
                .map(|p| {
                    let frame = space.frame(p);
                    let mut v: Vec<f64> = (0..space.dim()).map(|_| rng.gen_range(-1.0..=1.0)).collect();
                    let len = v.iter().map(|c| c * c).sum::<f64>().sqrt().max(1e-300);
                    let r = rng.gen_range(0.0..0.99) * eps;
                    v.iter_mut().for_each(|c| *c *= r / len);
                    space.chart_exp(p, &frame, &v)
                })
                .collect();
            Stage { points: moved, weights: weights.clone(), delta: eps }
        })
        .collect();
    ConvergingSequence::new(space, stages, points, weights)
}
