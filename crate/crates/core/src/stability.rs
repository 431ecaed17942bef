//! Numerical checks of the continuity, perturbation and fixed-point
//! properties of barycenters.

use rand::Rng;

use crate::corpus;
use crate::error::{Error, Result};
use crate::isometry::Isometry;
use crate::model::{ModelKind, ModelPoint};
use crate::report::Report;
use crate::solver::{barycenter, circumcenter, SolverOptions, WeightedPointSet, DUPLICATE_TOL};
use crate::space::{GeodesicSpace, ModelSpace};

/// Tolerance for matching `g(P)` with `P` and their weights.
pub const ORBIT_TOL: f64 = 1e-9;
/// Multiple of the solver tolerance allowed for `d(g q, q)`.
pub const FIXED_POINT_FACTOR: f64 = 10.0;
/// Random weight perturbations tried per candidate `delta`.
pub const CONTINUITY_TRIALS: usize = 100;
/// Smallest `delta` the continuity bisection will try.
pub const CONTINUITY_FLOOR: f64 = 1e-12;
/// Slack on Jung's bound.
pub const JUNG_SLACK: f64 = 1e-9;

/// `f_delta`: images of the points of `P` moved by less than `delta`.
#[derive(Clone, Debug)]
pub struct DeltaFunction<P> {
    images: Vec<P>,
    delta: f64,
}

impl<P: Clone> DeltaFunction<P> {
    pub fn new<S: GeodesicSpace<Point = P>>(space: &S, domain: &[P], images: Vec<P>, delta: f64) -> Result<Self> {
        if domain.len() != images.len() {
            return Err(Error::invalid(format!("{} points but {} images", domain.len(), images.len())));
        }
        for (i, (p, q)) in domain.iter().zip(&images).enumerate() {
            space.validate_point(q)?;
            let d = space.distance(p, q);
            if !(d < delta) {
                return Err(Error::invalid(format!("point {i} moves by {d}, not less than delta = {delta}")));
            }
        }
        Ok(DeltaFunction { images, delta })
    }

    pub fn identity(domain: &[P], delta: f64) -> Self {
        DeltaFunction { images: domain.to_vec(), delta }
    }

    pub fn images(&self) -> &[P] {
        &self.images
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }
}

/// `|r_u - r_u'| <= 2 r_1 delta` for weights on the same points with
/// `sup |u - u'| < delta`.
pub fn radius_lipschitz_check<S: GeodesicSpace>(
    a: &WeightedPointSet<S>,
    b: &WeightedPointSet<S>,
    delta: f64,
    opts: &SolverOptions,
    instance: &str,
) -> Result<Report> {
    if a.points() != b.points() {
        return Err(Error::invalid("weight functions are defined on different point lists"));
    }
    let sup = a.weights().iter().zip(b.weights()).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
    if !(sup < delta) {
        return Err(Error::invalid(format!("weights differ by {sup}, not less than delta = {delta}")));
    }
    let ra = barycenter(a, opts)?.baryradius;
    let rb = barycenter(b, opts)?.baryradius;
    let r1 = circumcenter(a.space(), a.points().to_vec(), opts)?.baryradius;
    Ok(Report::at_most("radius-lipschitz", instance, (ra - rb).abs(), 2.0 * r1 * delta))
}

#[derive(Clone, Debug, PartialEq)]
pub struct ContinuityEstimate {
    /// Largest `delta` found for which every sampled perturbation moved the
    /// barycenter by less than `epsilon`.
    pub delta: f64,
    pub max_displacement: f64,
    /// False when the bisection reached [`CONTINUITY_FLOOR`] without success.
    pub found: bool,
}

/// Searches for `delta` such that weight perturbations of sup-norm below
/// `delta` move the barycenter by less than `epsilon`, using
/// [`CONTINUITY_TRIALS`] seeded random perturbations per candidate.
pub fn barycenter_continuity_check<S: GeodesicSpace>(
    set: &WeightedPointSet<S>,
    epsilon: f64,
    seed: u64,
    opts: &SolverOptions,
) -> Result<ContinuityEstimate> {
    if !(epsilon > 0.0) {
        return Err(Error::invalid("epsilon must be positive"));
    }
    let q = barycenter(set, opts)?.barycenter;
    let worst = |delta: f64| -> Result<f64> {
        let mut rng = corpus::rng(seed);
        let mut worst = 0.0f64;
        for _ in 0..CONTINUITY_TRIALS {
            let w: Vec<f64> = set
                .weights()
                .iter()
                .map(|u| (u + delta * rng.gen_range(-1.0..1.0)).max(0.0))
                .collect();
            if w.iter().all(|&x| x == 0.0) {
                continue;
            }
            let r = barycenter(&set.with_weights(w)?, opts)?;
            worst = worst.max(set.space().distance(&q, &r.barycenter));
        }
        Ok(worst)
    };
    let mut delta = set.weights().iter().copied().fold(0.0, f64::max);
    let mut fail = f64::INFINITY;
    loop {
        let w = worst(delta)?;
        if w < epsilon {
            // Widen toward the last failing value.
            let (mut good, mut good_w) = (delta, w);
            if fail.is_finite() {
                for _ in 0..8 {
                    let mid = (good + fail) / 2.0;
                    let wm = worst(mid)?;
                    if wm < epsilon {
                        good = mid;
                        good_w = wm;
                    } else {
                        fail = mid;
                    }
                }
            }
            return Ok(ContinuityEstimate { delta: good, max_displacement: good_w, found: true });
        }
        fail = delta;
        delta /= 2.0;
        if delta < CONTINUITY_FLOOR {
            return Ok(ContinuityEstimate { delta, max_displacement: w, found: false });
        }
    }
}

/// `|r_u - r'| <= (sup u) delta`, where `r'` is the baryradius of `f_delta(P)`
/// with weights `u'(p') = sup { u(p) : f_delta(p) = p' }`. The measured
/// barycenter displacement is recorded in the note.
pub fn point_perturbation_check<S: GeodesicSpace>(
    set: &WeightedPointSet<S>,
    f: &DeltaFunction<S::Point>,
    opts: &SolverOptions,
    instance: &str,
) -> Result<Report> {
    let space = set.space();
    if f.images.len() != set.len() {
        return Err(Error::invalid("delta-function has the wrong number of images"));
    }
    for (i, (p, q)) in set.points().iter().zip(&f.images).enumerate() {
        if !(space.distance(p, q) < f.delta) {
            return Err(Error::invalid(format!("image {i} violates the delta bound")));
        }
    }
    let mut points: Vec<S::Point> = Vec::new();
    let mut weights: Vec<f64> = Vec::new();
    for (q, &u) in f.images.iter().zip(set.weights()) {
        match points.iter().position(|p| space.distance(p, q) <= DUPLICATE_TOL) {
            Some(j) => weights[j] = weights[j].max(u),
            None => {
                points.push(q.clone());
                weights.push(u);
            }
        }
    }
    let moved = WeightedPointSet::new(space, points, weights)?;
    let r = barycenter(set, opts)?;
    let r2 = barycenter(&moved, opts)?;
    let sup = set.weights().iter().copied().fold(0.0, f64::max);
    Ok(Report::at_most("point-perturbation", instance, (r.baryradius - r2.baryradius).abs(), sup * f.delta)
        .with_note(format!("barycenter moved {:e}", space.distance(&r.barycenter, &r2.barycenter))))
}

/// Checks that `g` permutes `P` and preserves `u`.
pub fn check_invariant<S: GeodesicSpace, G: Isometry<S>>(set: &WeightedPointSet<S>, g: &G) -> Result<()> {
    let space = set.space();
    for (i, (p, u)) in set.points().iter().zip(set.weights()).enumerate() {
        let gp = g.apply(space, p);
        let hit = set
            .points()
            .iter()
            .zip(set.weights())
            .any(|(q, w)| space.distance(&gp, q) <= ORBIT_TOL && (u - w).abs() <= ORBIT_TOL);
        if !hit {
            return Err(Error::HypothesisViolation(format!(
                "the isometry maps point {i} outside the weighted set"
            )));
        }
    }
    Ok(())
}

/// `d(g q_u, q_u) <= 10 tol` for each isometry in `group` (a generating
/// set suffices for a common fixed point). Positive curvature is outside
/// the flat setting of the underlying result; such reports carry a note.
pub fn fixed_point_check<S: GeodesicSpace, G: Isometry<S>>(
    set: &WeightedPointSet<S>,
    group: &[G],
    opts: &SolverOptions,
    instance: &str,
) -> Result<Report> {
    for g in group {
        check_invariant(set, g)?;
    }
    let space = set.space();
    let q = barycenter(set, opts)?.barycenter;
    let moved = group.iter().map(|g| space.distance(&g.apply(space, &q), &q)).fold(0.0, f64::max);
    let report = Report::at_most("fixed-point", instance, moved, FIXED_POINT_FACTOR * opts.tol);
    Ok(if space.curvature().k() != 0.0 {
        report.with_note("curved model space: extrapolation beyond the flat case")
    } else {
        report
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct JungReport {
    pub circumradius: f64,
    pub diameter: f64,
    pub bound: f64,
    /// Within `1e-6` of equality.
    pub near_equality: bool,
    pub report: Report,
}

/// `r_1 <= sqrt(n / (2 (n + 1))) diam(P)` in `E^n`.
pub fn jung_verify(points: &[ModelPoint], opts: &SolverOptions, instance: &str) -> Result<JungReport> {
    let first = points.first().ok_or_else(|| Error::invalid("empty point set"))?;
    if first.kind() != ModelKind::Euclidean {
        return Err(Error::invalid("Jung's bound is checked in Euclidean space"));
    }
    let n = first.dim();
    let space = ModelSpace::euclidean(n)?;
    let r1 = circumcenter(&space, points.to_vec(), opts)?.baryradius;
    let diameter = crate::solver::diameter(&space, points, opts.execution);
    let bound = (n as f64 / (2.0 * (n as f64 + 1.0))).sqrt() * diameter;
    let report = Report::at_most("jung", instance, r1, bound + JUNG_SLACK);
    Ok(JungReport {
        circumradius: r1,
        diameter,
        bound,
        near_equality: (bound - r1).abs() <= 1e-6,
        report,
    })
}

/// Resolution data for the product-approximation inequality: finite sets
/// `X`, `Y` in one space with functions `f` on `X`, `g` on `Y`.
#[derive(Clone, Debug)]
pub struct FapData<P> {
    pub xs: Vec<P>,
    pub f: Vec<f64>,
    pub ys: Vec<P>,
    pub g: Vec<f64>,
    pub delta: f64,
}

/// For all `x, x'` in `X` and `y, y'` in `Y` with `d(x, y) < delta` and
/// `d(x', y') < delta`, checks
/// `|f(x') d(x, x') - g(y') d(y, y')| <= 2 delta m + epsilon b + 2 delta epsilon`,
/// with `epsilon` just above the largest `|f(x) - g(y)|` over close pairs,
/// `m` the largest function value and `b` the larger diameter.
pub fn fap_check<S: GeodesicSpace>(space: &S, data: &FapData<S::Point>, instance: &str) -> Result<Report> {
    if data.xs.len() != data.f.len() || data.ys.len() != data.g.len() || data.xs.is_empty() || data.ys.is_empty() {
        return Err(Error::invalid("resolution data has mismatched or empty lists"));
    }
    if data.f.iter().chain(&data.g).any(|v| !(*v >= 0.0)) {
        return Err(Error::invalid("functions must be non-negative"));
    }
    let close: Vec<(usize, usize)> = (0..data.xs.len())
        .flat_map(|i| (0..data.ys.len()).map(move |j| (i, j)))
        .filter(|&(i, j)| space.distance(&data.xs[i], &data.ys[j]) < data.delta)
        .collect();
    let gap = close.iter().map(|&(i, j)| (data.f[i] - data.g[j]).abs()).fold(0.0, f64::max);
    let epsilon = gap * (1.0 + 1e-12) + f64::MIN_POSITIVE;
    let m = data.f.iter().chain(&data.g).copied().fold(0.0, f64::max);
    let b = crate::solver::diameter(space, &data.xs, Default::default())
        .max(crate::solver::diameter(space, &data.ys, Default::default()));
    let bound = 2.0 * data.delta * m + epsilon * b + 2.0 * data.delta * epsilon;
    let mut worst = 0.0f64;
    for &(i, j) in &close {
        for &(i2, j2) in &close {
            let lhs = data.f[i2] * space.distance(&data.xs[i], &data.xs[i2]);
            let rhs = data.g[j2] * space.distance(&data.ys[j], &data.ys[j2]);
            worst = worst.max((lhs - rhs).abs());
        }
    }
    Ok(Report::at_most("fap", instance, worst, bound)
        .with_note(format!("{} close pairs, epsilon {epsilon:e}", close.len())))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line(xs: &[f64]) -> (ModelSpace, Vec<ModelPoint>) {
        let s = ModelSpace::euclidean(1).unwrap();
        let pts = xs.iter().map(|&x| s.point(vec![x]).unwrap()).collect();
        (s, pts)
    }

    #[test]
    fn identical_weights_have_zero_gap() {
        let (s, pts) = line(&[1.0, 3.0, 4.0]);
        let a = WeightedPointSet::new(&s, pts, vec![1.0, 4.0, 3.0]).unwrap();
        let r = radius_lipschitz_check(&a, &a, 1e-3, &SolverOptions::default(), "id").unwrap();
        assert_eq!(r.measured, 0.0);
        assert!(r.pass);
    }

    #[test]
    fn delta_function_rejects_large_moves() {
        let (s, pts) = line(&[0.0, 1.0]);
        let moved = vec![s.point(vec![0.5]).unwrap(), pts[1].clone()];
        assert!(DeltaFunction::new(&s, &pts, moved, 0.1).is_err());
    }

    #[test]
    fn merged_images_keep_the_larger_weight() {
        let (s, pts) = line(&[0.0, 0.01, 1.0]);
        let images = vec![pts[0].clone(), pts[0].clone(), pts[2].clone()];
        let f = DeltaFunction::new(&s, &pts, images, 0.02).unwrap();
        let set = WeightedPointSet::new(&s, pts, vec![1.0, 3.0, 1.0]).unwrap();
        let r = point_perturbation_check(&set, &f, &SolverOptions::default(), "merge").unwrap();
        assert!(r.pass, "{r:?}");
    }
}
