//! Barycenters `q_u` and baryradii `r_u`: the minimizer and minimum of
//! `x -> max_p u(p) d(x, p)`.
//!
//! The solver warms up with farthest-point geodesic descent and then runs a
//! support-exchange loop: it solves the problem exactly on a small support set
//! (closed form for pairs, Newton on the equal-value system in a tangent chart
//! for larger sets), adds the most violated point of `P`, and repeats until no
//! point is violated. A golden-section line search along geodesics is the
//! fallback when the exchange cannot make progress.

mod exchange;
mod oracle;

pub use oracle::{oracle_grid, tree_oracle, OracleSolve, DEFAULT_ORACLE_RESOLUTION};

use std::fmt;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::par::Execution;
use crate::space::GeodesicSpace;

/// Distance below which two points are treated as one.
pub const DUPLICATE_TOL: f64 = 1e-12;

/// A finite set `P` in a geodesic space with a weight function `u >= 0`.
#[derive(Clone, Debug)]
pub struct WeightedPointSet<'a, S: GeodesicSpace> {
    space: &'a S,
    points: Vec<S::Point>,
    weights: Vec<f64>,
}

impl<'a, S: GeodesicSpace> WeightedPointSet<'a, S> {
    pub fn new(space: &'a S, points: Vec<S::Point>, weights: Vec<f64>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::invalid("point set is empty"));
        }
        if points.len() != weights.len() {
            return Err(Error::invalid(format!(
                "{} points but {} weights",
                points.len(),
                weights.len()
            )));
        }
        for (i, w) in weights.iter().enumerate() {
            if !(w.is_finite() && *w >= 0.0) {
                return Err(Error::invalid(format!("weight {i} is {w}; weights must be finite and >= 0")));
            }
        }
        if weights.iter().all(|&w| w == 0.0) {
            return Err(Error::invalid("all weights are zero"));
        }
        for p in &points {
            space.validate_point(p)?;
        }
        Ok(WeightedPointSet { space, points, weights })
    }

    /// Unit weights.
    pub fn uniform(space: &'a S, points: Vec<S::Point>) -> Result<Self> {
        let n = points.len();
        Self::new(space, points, vec![1.0; n])
    }

    pub fn space(&self) -> &'a S {
        self.space
    }

    pub fn points(&self) -> &[S::Point] {
        &self.points
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Same points, new weights.
    pub fn with_weights(&self, weights: Vec<f64>) -> Result<Self> {
        Self::new(self.space, self.points.clone(), weights)
    }

    /// Largest pairwise distance.
    pub fn diameter(&self, exec: Execution) -> f64 {
        diameter(self.space, &self.points, exec)
    }

    /// For `k > 0` the diameter must stay below `D_k / 4`, relaxed to
    /// `D_k / 2` when every positive weight is the same.
    pub fn check_diameter(&self, exec: Execution) -> Result<()> {
        let cap = self.space.curvature().diameter_cap();
        if !cap.is_finite() {
            return Ok(());
        }
        let mut positive = self.weights.iter().filter(|&&w| w > 0.0);
        let first = *positive.next().expect("some weight is positive");
        let limit = if positive.all(|&w| w == first) { cap / 2.0 } else { cap / 4.0 };
        // diam <= 2 max d(p_0, p) settles most sets without the quadratic scan.
        let reach = exec.argmax(self.len(), |i| self.space.distance(&self.points[0], &self.points[i])).map_or(0.0, |r| r.1);
        if 2.0 * reach < limit {
            return Ok(());
        }
        let d = self.diameter(exec);
        if d >= limit {
            return Err(Error::DiameterBound { diameter: d, limit });
        }
        Ok(())
    }
}

pub fn diameter<S: GeodesicSpace>(space: &S, points: &[S::Point], exec: Execution) -> f64 {
    exec.map_range(points.len(), |i| {
        points[i + 1..].iter().map(|q| space.distance(&points[i], q)).fold(0.0, f64::max)
    })
    .into_iter()
    .fold(0.0, f64::max)
}

/// `max_p u(p) d(x, p)` together with the lowest index attaining it.
pub fn objective_argmax<S: GeodesicSpace>(
    set: &WeightedPointSet<S>,
    x: &S::Point,
    exec: Execution,
) -> (usize, f64) {
    let (space, points, weights) = (set.space, &set.points, &set.weights);
    exec.argmax(points.len(), |i| {
        if weights[i] == 0.0 {
            0.0
        } else {
            weights[i] * space.distance(x, &points[i])
        }
    })
    .expect("point sets are non-empty")
}

pub fn objective<S: GeodesicSpace>(set: &WeightedPointSet<S>, x: &S::Point) -> f64 {
    objective_argmax(set, x, Execution::default()).1
}

/// Indices `i` with `u_i > 0` and `u_i d(x, p_i) >= r (1 - activity_tol)`.
pub fn active_indices<S: GeodesicSpace>(
    set: &WeightedPointSet<S>,
    x: &S::Point,
    radius: f64,
    activity_tol: f64,
) -> Vec<usize> {
    let threshold = radius * (1.0 - activity_tol);
    (0..set.len())
        .filter(|&i| {
            set.weights[i] > 0.0 && set.weights[i] * set.space.distance(x, &set.points[i]) >= threshold
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BarycenterResult<P> {
    pub barycenter: P,
    pub baryradius: f64,
    pub active_indices: Vec<usize>,
    pub iterations: usize,
    /// Length of the final step.
    pub residual: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SolverOptions {
    /// Target accuracy of the barycenter, as a distance.
    pub tol: f64,
    pub max_iter: usize,
    /// Relative slack when reporting active indices.
    pub activity_tol: f64,
    /// Step-size constant `c0` of the descent steps `c0 / (j + 2)`.
    pub step0: f64,
    /// Descent iterations spent warming up before the exchange loop.
    pub descent_iters: usize,
    pub execution: Execution,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            tol: 1e-8,
            max_iter: 50_000,
            activity_tol: 1e-6,
            step0: 1.0,
            descent_iters: 200,
            execution: Execution::default(),
        }
    }
}

impl SolverOptions {
    pub fn with_tol(mut self, tol: f64) -> Self {
        self.tol = tol;
        self
    }

    pub fn with_max_iter(mut self, max_iter: usize) -> Self {
        self.max_iter = max_iter;
        self
    }

    pub fn with_execution(mut self, execution: Execution) -> Self {
        self.execution = execution;
        self
    }

    fn validate(&self) -> Result<()> {
        if !(self.tol > 0.0 && self.tol.is_finite()) {
            return Err(Error::invalid(format!("tolerance must be positive, got {}", self.tol)));
        }
        if self.max_iter == 0 {
            return Err(Error::invalid("max_iter must be positive"));
        }
        if !(self.step0 > 0.0 && self.step0 <= 1.0) {
            return Err(Error::invalid(format!("step constant must lie in (0, 1], got {}", self.step0)));
        }
        Ok(())
    }
}

/// Failure of [`barycenter`]. Non-convergence carries the best iterate found.
#[derive(Clone, Debug, PartialEq)]
pub enum SolveError<P> {
    Invalid(Error),
    NonConvergence { best: BarycenterResult<P> },
}

impl<P> From<Error> for SolveError<P> {
    fn from(e: Error) -> Self {
        SolveError::Invalid(e)
    }
}

impl<P> From<SolveError<P>> for Error {
    fn from(e: SolveError<P>) -> Self {
        match e {
            SolveError::Invalid(e) => e,
            SolveError::NonConvergence { best } => Error::NonConvergence {
                iterations: best.iterations,
                residual: best.residual,
            },
        }
    }
}

impl<P> fmt::Display for SolveError<P> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SolveError::Invalid(e) => e.fmt(f),
            SolveError::NonConvergence { best } => write!(
                f,
                "no convergence after {} iterations (residual {:e}); best radius {}",
                best.iterations, best.residual, best.baryradius
            ),
        }
    }
}

impl<P: fmt::Debug> std::error::Error for SolveError<P> {}

pub type SolveResult<P> = std::result::Result<BarycenterResult<P>, SolveError<P>>;

/// Reduced problem: positive weights only, coincident points merged.
pub(crate) struct Reduced<P> {
    pub points: Vec<P>,
    pub weights: Vec<f64>,
}

/// The positive-weight points. Coincident points are merged later, when the
/// exchange loop meets them, so that reduction stays linear in `|P|`.
fn reduce<S: GeodesicSpace>(set: &WeightedPointSet<S>) -> Reduced<S::Point> {
    let positive = (0..set.len()).filter(|&i| set.weights[i] > 0.0);
    let (points, weights) = positive.map(|i| (set.points[i].clone(), set.weights[i])).unzip();
    Reduced { points, weights }
}

/// True when every reduced point lies within [`DUPLICATE_TOL`] of the first.
fn all_coincide<S: GeodesicSpace>(space: &S, red: &Reduced<S::Point>, exec: Execution) -> bool {
    let first = &red.points[0];
    exec.argmax(red.points.len(), |i| space.distance(first, &red.points[i])).is_none_or(|(_, d)| d <= DUPLICATE_TOL)
}

/// The barycenter of `set` with its weights.
pub fn barycenter<S: GeodesicSpace>(set: &WeightedPointSet<S>, opts: &SolverOptions) -> SolveResult<S::Point> {
    opts.validate()?;
    set.check_diameter(opts.execution)?;
    let reduced = reduce(set);
    let run = if all_coincide(set.space, &reduced, opts.execution) {
        let heaviest = (0..reduced.points.len())
            .max_by(|&a, &b| reduced.weights[a].total_cmp(&reduced.weights[b]).then(b.cmp(&a)))
            .expect("some weight is positive");
        exchange::Run { point: reduced.points[heaviest].clone(), iterations: 0, residual: 0.0, converged: true }
    } else {
        exchange::solve(set.space, &reduced, opts)?
    };
    let radius = objective_argmax(set, &run.point, opts.execution).1;
    let result = BarycenterResult {
        active_indices: active_indices(set, &run.point, radius, opts.activity_tol),
        barycenter: run.point,
        baryradius: radius,
        iterations: run.iterations,
        residual: run.residual,
    };
    if run.converged {
        Ok(result)
    } else {
        Err(SolveError::NonConvergence { best: result })
    }
}

/// Center and radius of the smallest closed ball containing `points`.
pub fn circumcenter<S: GeodesicSpace>(
    space: &S,
    points: Vec<S::Point>,
    opts: &SolverOptions,
) -> SolveResult<S::Point> {
    let set = WeightedPointSet::uniform(space, points)?;
    barycenter(&set, opts)
}

/// Minimizer of `x -> max_p u(p) d(x, p)^t`, via the identity
/// `min max u d^t = (min max u^(1/t) d)^t`.
pub fn barycenter_pow<S: GeodesicSpace>(
    set: &WeightedPointSet<S>,
    t: f64,
    opts: &SolverOptions,
) -> SolveResult<S::Point> {
    if !(t > 0.0 && t.is_finite()) {
        return Err(Error::invalid(format!("exponent must be positive, got {t}")).into());
    }
    if t == 1.0 {
        return barycenter(set, opts);
    }
    let rooted = set.with_weights(set.weights.iter().map(|w| w.powf(1.0 / t)).collect())?;
    let lift = |mut r: BarycenterResult<S::Point>| {
        r.baryradius = r.baryradius.powf(t);
        r
    };
    match barycenter(&rooted, opts) {
        Ok(r) => Ok(lift(r)),
        Err(SolveError::NonConvergence { best }) => Err(SolveError::NonConvergence { best: lift(best) }),
        Err(e) => Err(e),
    }
}
