//! Descent warm-up, support exchange, and golden-section fallback.

use nalgebra::{DMatrix, DVector};

use super::{Reduced, SolverOptions, DUPLICATE_TOL};
use crate::error::Result;
use crate::space::{GeodesicSpace, TangentChart};

/// Relative slack when deciding whether a point violates the current radius.
const VIOLATION_TOL: f64 = 1e-10;
/// Newton stops once a step is shorter than this fraction of the radius scale.
const NEWTON_STEP_TOL: f64 = 1e-14;
const NEWTON_MAX_ITER: usize = 60;
/// Smallest admissible multiplier for a support point.
const MULTIPLIER_TOL: f64 = -1e-8;
/// Cap on exchange rounds; each round strictly increases the radius.
const MAX_ROUNDS: usize = 1000;

pub(crate) struct Run<P> {
    pub point: P,
    pub iterations: usize,
    pub residual: f64,
    pub converged: bool,
}

struct Farthest<'a, S: GeodesicSpace> {
    space: &'a S,
    red: &'a Reduced<S::Point>,
    opts: &'a SolverOptions,
}

impl<S: GeodesicSpace> Farthest<'_, S> {
    fn eval(&self, x: &S::Point) -> (usize, f64) {
        let (pts, w) = (&self.red.points, &self.red.weights);
        self.opts
            .execution
            .argmax(pts.len(), |i| w[i] * self.space.distance(x, &pts[i]))
            .expect("reduced sets are non-empty")
    }

    fn value(&self, x: &S::Point) -> f64 {
        self.eval(x).1
    }
}

/// Exact solution on a subset of the reduced points.
struct Candidate<P> {
    point: P,
    radius: f64,
    basis: Vec<usize>,
    iterations: usize,
    last_step: f64,
}

pub(crate) fn solve<S: GeodesicSpace>(
    space: &S,
    red: &Reduced<S::Point>,
    opts: &SolverOptions,
) -> Result<Run<S::Point>> {
    let far = Farthest { space, red, opts };
    let mut iterations = 0;

    // Farthest-point geodesic descent, keeping the best iterate.
    let mut x = space.initial_guess(&red.points, &red.weights);
    let (mut best, mut best_f) = (x.clone(), far.value(&x));
    let budget = opts.descent_iters.min(opts.max_iter);
    for j in 0..budget {
        let (i, f) = far.eval(&x);
        if f < best_f {
            best = x.clone();
            best_f = f;
        }
        let eta = (opts.step0 / (j + 2) as f64).min(1.0);
        x = space.geodesic_point(&x, &red.points[i], eta)?;
        iterations += 1;
    }
    if far.value(&x) < best_f {
        best = x;
    }

    let chart = space.tangent_chart();
    let max_support = chart.map_or(2, |c| c.chart_dim() + 1);
    let mut support = vec![far.eval(&best).0];
    for _ in 0..MAX_ROUNDS {
        let Some(cand) = solve_support(space, chart, red, &support, max_support)? else {
            break;
        };
        iterations += cand.iterations;
        let (j, fj) = far.eval(&cand.point);
        let feasible = fj <= cand.radius * (1.0 + VIOLATION_TOL);
        if feasible || iterations >= opts.max_iter {
            // Out of budget, the residual is the excess of the farthest point.
            let residual = if feasible { cand.last_step } else { fj - cand.radius };
            return Ok(Run { point: cand.point, iterations, residual, converged: feasible });
        }
        if far.value(&cand.point) < far.value(&best) {
            best = cand.point;
        }
        // A violating point replaces any support point it coincides with.
        support = cand.basis;
        support.retain(|&i| space.distance(&red.points[i], &red.points[j]) > DUPLICATE_TOL);
        support.push(j);
    }
    fallback(&far, best, iterations)
}

/// Solves the problem restricted to `support`, whose last element is the
/// newest point. The optimum of the restricted problem is attained by some
/// basis containing that point, so only such bases are tried, smallest first.
/// A basis solution that is optimal for its own points and feasible for all
/// of `support` is optimal for `support`.
fn solve_support<S: GeodesicSpace>(
    space: &S,
    chart: Option<&dyn TangentChart<S::Point>>,
    red: &Reduced<S::Point>,
    support: &[usize],
    max_support: usize,
) -> Result<Option<Candidate<S::Point>>> {
    let (&newest, others) = support.split_last().expect("support is non-empty");
    let mut masks: Vec<u32> = (0..1u32 << others.len()).collect();
    masks.sort_by_key(|m| (m.count_ones(), *m));
    for mask in masks {
        if mask.count_ones() as usize + 1 > max_support {
            break;
        }
        let mut basis: Vec<usize> = (0..others.len()).filter(|b| mask >> b & 1 == 1).map(|b| others[b]).collect();
        basis.push(newest);
        let cand = match basis.len() {
            1 => Some(Candidate {
                point: red.points[newest].clone(),
                radius: 0.0,
                basis,
                iterations: 0,
                last_step: 0.0,
            }),
            2 => Some(pair_point(space, red, basis)?),
            _ => match chart {
                Some(chart) => balanced_point(space, chart, red, basis)?,
                None => None,
            },
        };
        let Some(cand) = cand else { continue };
        let feasible = support.iter().all(|&i| {
            red.weights[i] * space.distance(&cand.point, &red.points[i])
                <= cand.radius * (1.0 + VIOLATION_TOL)
        });
        if feasible {
            return Ok(Some(cand));
        }
    }
    Ok(None)
}

/// The point on the geodesic `[p_a, p_b]` where `u_a d(x, p_a) = u_b d(x, p_b)`.
fn pair_point<S: GeodesicSpace>(
    space: &S,
    red: &Reduced<S::Point>,
    basis: Vec<usize>,
) -> Result<Candidate<S::Point>> {
    let (a, b) = (basis[0], basis[1]);
    let (ua, ub) = (red.weights[a], red.weights[b]);
    let t = ub / (ua + ub);
    let point = space.geodesic_point(&red.points[a], &red.points[b], t)?;
    let radius = (ua * space.distance(&point, &red.points[a])).max(ub * space.distance(&point, &red.points[b]));
    Ok(Candidate { point, radius, basis, iterations: 1, last_step: 0.0 })
}

/// Orthonormal basis (at most `limit` vectors) of the span of `vectors`.
fn orthonormal_span(vectors: &[Vec<f64>], limit: usize) -> Vec<Vec<f64>> {
    let mut basis: Vec<Vec<f64>> = Vec::new();
    for v in vectors {
        if basis.len() == limit {
            break;
        }
        let mut w = v.clone();
        for _ in 0..2 {
            for q in &basis {
                let c: f64 = w.iter().zip(q).map(|(a, b)| a * b).sum();
                w.iter_mut().zip(q).for_each(|(a, b)| *a -= c * b);
            }
        }
        let len = w.iter().map(|a| a * a).sum::<f64>().sqrt();
        if len > 1e-9 {
            basis.push(w.into_iter().map(|a| a / len).collect());
        }
    }
    basis
}

/// Distances and unit directions from `x` to the basis points.
fn local_data<P>(
    space: &impl GeodesicSpace<Point = P>,
    chart: &dyn TangentChart<P>,
    red: &Reduced<P>,
    basis: &[usize],
    x: &P,
    frame: &[Vec<f64>],
) -> Option<(Vec<f64>, Vec<Vec<f64>>)> {
    let mut d = Vec::with_capacity(basis.len());
    let mut w = Vec::with_capacity(basis.len());
    for &i in basis {
        d.push(space.distance(x, &red.points[i]));
        w.push(chart.direction_components(x, &red.points[i], frame)?);
    }
    Some((d, w))
}

/// Newton's method for the point where all `u_i d(x, p_i)` agree, inside the
/// totally geodesic span of the basis points. Each step linearizes the
/// distances in exponential coordinates at the current point; the gradient of
/// `d(., p)` there is minus the unit direction toward `p`. Returns `None`
/// when the system is degenerate, Newton fails, or a multiplier is negative.
fn balanced_point<S: GeodesicSpace>(
    space: &S,
    chart: &dyn TangentChart<S::Point>,
    red: &Reduced<S::Point>,
    basis: Vec<usize>,
) -> Result<Option<Candidate<S::Point>>> {
    let m = basis.len();
    let u: Vec<f64> = basis.iter().map(|&i| red.weights[i]).collect();
    let mut x = red.points[basis[0]].clone();
    for (step, &i) in basis.iter().enumerate().skip(1) {
        x = space.geodesic_point(&x, &red.points[i], 1.0 / (step + 1) as f64)?;
    }
    let spread = basis
        .iter()
        .map(|&i| space.distance(&red.points[basis[0]], &red.points[i]))
        .fold(0.0, f64::max);
    let cap = space.curvature().diameter_cap() / 2.0;
    let mut last_step = f64::INFINITY;
    let mut iterations = 0;
    let mut converged = false;
    for _ in 0..NEWTON_MAX_ITER {
        iterations += 1;
        let frame = chart.frame(&x);
        let Some((d, w)) = local_data(space, chart, red, &basis, &x, &frame) else {
            return Ok(None);
        };
        let q = orthonormal_span(&w, m - 1);
        if q.len() < m - 1 {
            return Ok(None);
        }
        let mut a = DMatrix::zeros(m, m);
        let mut rhs = DVector::zeros(m);
        for i in 0..m {
            for (k, qk) in q.iter().enumerate() {
                a[(i, k)] = -u[i] * dot(&w[i], qk);
            }
            a[(i, m - 1)] = -1.0;
            rhs[i] = -u[i] * d[i];
        }
        let Some(sol) = a.lu().solve(&rhs) else {
            return Ok(None);
        };
        let mut v = vec![0.0; frame.len()];
        for (k, qk) in q.iter().enumerate() {
            v.iter_mut().zip(qk).for_each(|(a, b)| *a += sol[k] * b);
        }
        last_step = v.iter().map(|a| a * a).sum::<f64>().sqrt();
        if !last_step.is_finite() || last_step > 10.0 * spread + 1.0 {
            return Ok(None);
        }
        x = chart.chart_exp(&x, &frame, &v);
        let scale = d.iter().copied().fold(0.0, f64::max);
        if last_step <= NEWTON_STEP_TOL * scale.max(f64::MIN_POSITIVE) {
            converged = true;
            break;
        }
    }
    if !converged {
        return Ok(None);
    }
    for &i in &basis {
        if space.distance(&x, &red.points[i]) >= cap {
            return Ok(None);
        }
    }

    // Multipliers: sum_i lambda_i u_i w_i = 0 within the span, sum lambda = 1.
    let frame = chart.frame(&x);
    let Some((d, w)) = local_data(space, chart, red, &basis, &x, &frame) else {
        return Ok(None);
    };
    let q = orthonormal_span(&w, m - 1);
    if q.len() < m - 1 {
        return Ok(None);
    }
    let mut a = DMatrix::zeros(m, m);
    let mut rhs = DVector::zeros(m);
    for i in 0..m {
        for (k, qk) in q.iter().enumerate() {
            a[(k, i)] = u[i] * dot(&w[i], qk);
        }
        a[(m - 1, i)] = 1.0;
    }
    rhs[m - 1] = 1.0;
    let Some(lambda) = a.lu().solve(&rhs) else {
        return Ok(None);
    };
    if lambda.iter().any(|&l| !(l >= MULTIPLIER_TOL)) {
        return Ok(None);
    }
    let values: Vec<f64> = d.iter().zip(&u).map(|(d, u)| d * u).collect();
    let radius = values.iter().copied().fold(0.0, f64::max);
    let low = values.iter().copied().fold(f64::INFINITY, f64::min);
    if radius - low > 1e-9 * radius {
        return Ok(None);
    }
    Ok(Some(Candidate { point: x, radius, basis, iterations, last_step }))
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Golden-section search for the minimum of `f` on `[0, 1]`.
fn golden<F: FnMut(f64) -> Result<f64>>(mut f: F, tol: f64) -> Result<f64> {
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (0.0, 1.0);
    let (mut c, mut d) = (b - g * (b - a), a + g * (b - a));
    let (mut fc, mut fd) = (f(c)?, f(d)?);
    while b - a > tol {
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = f(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = f(d)?;
        }
    }
    Ok((a + b) / 2.0)
}

/// More descent, then alternating exact line searches toward the current
/// farthest point until the step falls below `tol`.
fn fallback<S: GeodesicSpace>(
    far: &Farthest<S>,
    start: S::Point,
    mut iterations: usize,
) -> Result<Run<S::Point>> {
    let (space, red, opts) = (far.space, far.red, far.opts);
    let mut x = start.clone();
    let (mut best, mut best_f) = (start, far.value(&x));
    let descent_end = iterations + opts.max_iter.saturating_sub(iterations) / 2;
    let mut j = opts.descent_iters;
    while iterations < descent_end {
        let (i, f) = far.eval(&x);
        if f < best_f {
            best = x.clone();
            best_f = f;
        }
        let eta = (opts.step0 / (j + 2) as f64).min(1.0);
        x = space.geodesic_point(&x, &red.points[i], eta)?;
        j += 1;
        iterations += 1;
    }
    let mut x = best;
    let mut residual = f64::INFINITY;
    while iterations < opts.max_iter {
        iterations += 1;
        let (i, _) = far.eval(&x);
        let target = &red.points[i];
        let len = space.distance(&x, target);
        if len == 0.0 {
            residual = 0.0;
            break;
        }
        let t = golden(|t| Ok(far.value(&space.geodesic_point(&x, target, t)?)), opts.tol / len / 4.0)?;
        let y = space.geodesic_point(&x, target, t)?;
        residual = space.distance(&x, &y);
        if far.value(&y) <= far.value(&x) {
            x = y;
        }
        if residual < opts.tol {
            break;
        }
    }
    Ok(Run { point: x, iterations, residual, converged: residual < opts.tol })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn golden_finds_parabola_minimum() {
        let t = golden(|t| Ok((t - 0.3f64).powi(2)), 1e-10).unwrap();
        assert!((t - 0.3).abs() < 1e-9);
    }

    #[test]
    fn span_drops_dependent_vectors() {
        let q = orthonormal_span(&[vec![1.0, 0.0], vec![2.0, 0.0], vec![0.0, 3.0]], 2);
        assert_eq!(q, vec![vec![1.0, 0.0], vec![0.0, 1.0]]);
    }
}
