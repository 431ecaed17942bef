//! Seeded verification suites behind `catbary verify` and the acceptance
//! run. Each suite returns one [`Report`] per checked instance and property.

use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};
use rand::Rng;

use crate::corpus::{self, Instance, ModelFamily, TreeShape};
use crate::error::{Error, Result};
use crate::gh::{self, barycenter_limit, pointed_ball_check, ConvergingSequence, LimitReport};
use crate::isometry::{Isometry, LinearIsometry};
use crate::model::{m_k_constant, Curvature, MkGrid, ModelKind, ModelPoint};
use crate::par::Execution;
use crate::report::Report;
use crate::retraction::{self, BallCover, CoverOptions};
use crate::solver::{barycenter, circumcenter, SolverOptions, WeightedPointSet};
use crate::space::{ConvexSubset, GeodesicSpace, ModelSpace, RTree, TangentChart, TreeAutomorphism, TreePoint};
use crate::stability::{
    self, barycenter_continuity_check, fap_check, fixed_point_check, jung_verify, point_perturbation_check,
    radius_lipschitz_check, DeltaFunction, FapData,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Suite {
    Jung,
    Scaling,
    Containment,
    Continuity,
    FixedPoint,
    Gh,
    Retraction,
    Mk,
}

impl Suite {
    pub const ALL: [Suite; 8] = [
        Suite::Jung,
        Suite::Scaling,
        Suite::Containment,
        Suite::Continuity,
        Suite::FixedPoint,
        Suite::Gh,
        Suite::Retraction,
        Suite::Mk,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Jung => "jung",
            Suite::Scaling => "scaling",
            Suite::Containment => "containment",
            Suite::Continuity => "continuity",
            Suite::FixedPoint => "fixed-point",
            Suite::Gh => "gh",
            Suite::Retraction => "retraction",
            Suite::Mk => "mk",
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Suite::ALL
            .into_iter()
            .find(|suite| suite.name() == s)
            .ok_or_else(|| Error::invalid(format!("unknown suite {s:?}")))
    }
}

/// Model families of the invariant corpus.
pub const MODEL_FAMILIES: [ModelFamily; 5] = [
    ModelFamily::Euclidean(1),
    ModelFamily::Euclidean(2),
    ModelFamily::Euclidean(3),
    ModelFamily::Sphere,
    ModelFamily::Hyperbolic,
];

/// Runs `suite` on the corpus drawn from `seed`; `count` is the number of
/// instances per space family (total clouds for `jung`; unused by `mk`).
pub fn run(suite: Suite, seed: u64, count: usize, opts: &SolverOptions) -> Result<Vec<Report>> {
    match suite {
        Suite::Jung => jung_suite(seed, count, opts),
        Suite::Scaling => invariant_suite(seed, count, opts, scaling_reports, scaling_reports),
        Suite::Containment => invariant_suite(seed, count, opts, containment_model, containment_reports),
        Suite::Continuity => {
            let mut out = continuity_suite(seed, count, opts)?;
            out.extend(fap_suite(seed, count)?);
            Ok(out)
        }
        Suite::FixedPoint => fixed_point_suite(seed, count, opts),
        Suite::Gh => gh_suite(seed, count, opts),
        Suite::Retraction => retraction_suite(seed, opts),
        Suite::Mk => mk_suite(),
    }
}

fn inner(opts: &SolverOptions) -> SolverOptions {
    SolverOptions { execution: Execution::Sequential, ..*opts }
}

/// Maps `f` over items in parallel and flattens the per-item reports.
fn collect<T: Sync>(exec: Execution, items: &[T], f: impl Fn(&T) -> Result<Vec<Report>> + Sync + Send) -> Result<Vec<Report>> {
    let mut out = Vec::new();
    for r in exec.map(items, f) {
        out.extend(r?);
    }
    Ok(out)
}

fn tree_corpus(seed: u64, count: usize) -> Vec<Instance<RTree>> {
    TreeShape::ALL.iter().flat_map(|&s| corpus::tree_instances(s, seed, count)).collect()
}

fn model_corpus(seed: u64, count: usize) -> Vec<(ModelFamily, Instance<ModelSpace>)> {
    MODEL_FAMILIES
        .iter()
        .flat_map(|&f| corpus::model_instances(f, seed, count).into_iter().map(move |i| (f, i)))
        .collect()
}

// Jung ----------------------------------------------------------------------

fn jung_suite(seed: u64, count: usize, opts: &SolverOptions) -> Result<Vec<Report>> {
    let mut rng = corpus::rng(seed);
    let clouds: Vec<(String, Vec<ModelPoint>)> = (0..count)
        .map(|i| {
            let dim = 2 + i % 2;
            let n = rng.gen_range(corpus::SIZE_RANGE.0..=corpus::SIZE_RANGE.1);
            (format!("E{dim}-{seed}-{i}"), corpus::euclidean_cloud(&mut rng, dim, n))
        })
        .collect();
    let o = inner(opts);
    let mut out = collect(opts.execution, &clouds, |(id, pts)| Ok(vec![jung_verify(pts, &o, id)?.report]))?;
    for dim in [2, 3] {
        let j = jung_verify(&corpus::regular_simplex(dim)?, &o, &format!("simplex-{dim}"))?;
        out.push(Report::at_most("jung-equality", format!("simplex-{dim}"), (j.bound - j.circumradius).abs(), 1e-6));
    }
    Ok(out)
}

// Scaling, zero weights, containment, hull ----------------------------------

fn invariant_suite(
    seed: u64,
    count: usize,
    opts: &SolverOptions,
    model: impl Fn(&Instance<ModelSpace>, ModelFamily, u64, &SolverOptions) -> Result<Vec<Report>> + Sync + Send,
    tree: impl Fn(&Instance<RTree>, TreeShape, u64, &SolverOptions) -> Result<Vec<Report>> + Sync + Send,
) -> Result<Vec<Report>> {
    let o = inner(opts);
    let mut out = collect(opts.execution, &model_corpus(seed, count), |(f, inst)| model(inst, *f, seed, &o))?;
    let trees: Vec<(TreeShape, Instance<RTree>)> = TreeShape::ALL
        .iter()
        .flat_map(|&s| corpus::tree_instances(s, seed, count).into_iter().map(move |i| (s, i)))
        .collect();
    out.extend(collect(opts.execution, &trees, |(s, inst)| tree(inst, *s, seed, &o))?);
    Ok(out)
}

/// Source of extra points for an instance's space.
trait ExtraPoints: GeodesicSpace {
    type Family: Copy;
    fn extra(&self, family: Self::Family, rng: &mut corpus::CorpusRng) -> Self::Point;
}

impl ExtraPoints for ModelSpace {
    type Family = ModelFamily;
    fn extra(&self, family: ModelFamily, rng: &mut corpus::CorpusRng) -> ModelPoint {
        corpus::model_points(rng, family, 1).remove(0)
    }
}

impl ExtraPoints for RTree {
    type Family = TreeShape;
    fn extra(&self, _: TreeShape, rng: &mut corpus::CorpusRng) -> TreePoint {
        corpus::tree_point(rng, self)
    }
}

fn instance_rng(seed: u64, id: &str) -> corpus::CorpusRng {
    // FNV-1a of the id keeps per-instance streams independent of iteration order.
    let h = id.bytes().fold(0xcbf2_9ce4_8422_2325u64, |h, b| (h ^ b as u64).wrapping_mul(0x100_0000_01b3));
    corpus::rng(seed ^ h)
}

/// Scaling `u -> lambda u` multiplies the radius by `lambda` and keeps the
/// barycenter; zero-weight points change nothing.
fn scaling_reports<S: ExtraPoints>(
    inst: &Instance<S>,
    family: S::Family,
    seed: u64,
    opts: &SolverOptions,
) -> Result<Vec<Report>> {
    let mut rng = instance_rng(seed, &inst.id);
    let space = &inst.space;
    let set = WeightedPointSet::new(space, inst.points.clone(), inst.weights.clone())?;
    let a = barycenter(&set, opts)?;
    let lambda = 10f64.powf(rng.gen_range(-1.0..=1.0));
    let b = barycenter(&set.with_weights(inst.weights.iter().map(|w| lambda * w).collect())?, opts)?;
    let ratio = b.baryradius / a.baryradius;
    let mut out = vec![
        Report::at_most("scaling-radius", format!("{}/lambda-{lambda:.4}", inst.id), (ratio - lambda).abs(), 1e-9),
        Report::at_most("scaling-point", inst.id.clone(), space.distance(&a.barycenter, &b.barycenter), 2.0 * opts.tol),
    ];
    let mut points = inst.points.clone();
    let mut weights = inst.weights.clone();
    for _ in 0..rng.gen_range(1..=5) {
        let at = rng.gen_range(0..=points.len());
        points.insert(at, space.extra(family, &mut rng));
        weights.insert(at, 0.0);
    }
    let c = barycenter(&WeightedPointSet::new(space, points, weights)?, opts)?;
    let moved = space.distance(&a.barycenter, &c.barycenter);
    let mut z = Report::at_most("zero-weight", inst.id.clone(), moved, 0.0)
        .with_note(format!("radius difference {:e}", (a.baryradius - c.baryradius).abs()));
    z.pass = moved == 0.0 && a.baryradius == c.baryradius;
    out.push(z);
    Ok(out)
}

/// `q_u` lies in the closed circumball `B(q_1, r_1)`.
fn containment_reports<S: GeodesicSpace>(
    inst: &Instance<S>,
    _family: impl Copy,
    _seed: u64,
    opts: &SolverOptions,
) -> Result<Vec<Report>> {
    let set = WeightedPointSet::new(&inst.space, inst.points.clone(), inst.weights.clone())?;
    let q = barycenter(&set, opts)?.barycenter;
    let c = circumcenter(&inst.space, inst.points.clone(), opts)?;
    let excess = inst.space.distance(&q, &c.barycenter) - c.baryradius;
    Ok(vec![Report::at_most("containment", inst.id.clone(), excess.max(0.0), opts.tol)
        .with_note(format!("d(q_u, q_1) - r_1 = {excess:e}"))])
}

/// Containment plus, in `E^n`, membership of `q_u` in the convex hull.
fn containment_model(
    inst: &Instance<ModelSpace>,
    family: ModelFamily,
    seed: u64,
    opts: &SolverOptions,
) -> Result<Vec<Report>> {
    let mut out = containment_reports(inst, family, seed, opts)?;
    if inst.space.kind() == ModelKind::Euclidean {
        let set = WeightedPointSet::new(&inst.space, inst.points.clone(), inst.weights.clone())?;
        let q = barycenter(&set, opts)?.barycenter;
        let pts: Vec<&[f64]> = inst.points.iter().map(|p| p.coords()).collect();
        out.push(Report::at_most("hull", inst.id.clone(), hull_distance(&pts, q.coords()), opts.tol));
    }
    Ok(out)
}

/// Euclidean distance from `q` to the convex hull of `points`, by Wolfe's
/// minimum-norm-point algorithm applied to `points - q`.
pub fn hull_distance(points: &[&[f64]], q: &[f64]) -> f64 {
    let ps: Vec<DVector<f64>> =
        points.iter().map(|p| DVector::from_iterator(q.len(), p.iter().zip(q).map(|(a, b)| a - b))).collect();
    if ps.is_empty() {
        return f64::INFINITY;
    }
    let scale = ps.iter().map(|p| p.norm_squared()).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
    let start = (0..ps.len()).min_by(|&a, &b| ps[a].norm_squared().total_cmp(&ps[b].norm_squared())).unwrap();
    let mut support = vec![start];
    let mut lambda = vec![1.0];
    let combine = |s: &[usize], l: &[f64]| s.iter().zip(l).fold(DVector::zeros(q.len()), |acc, (&i, &w)| acc + &ps[i] * w);
    let mut x = ps[start].clone();
    for _ in 0..10 * ps.len() + 100 {
        let j = (0..ps.len()).min_by(|&a, &b| x.dot(&ps[a]).total_cmp(&x.dot(&ps[b]))).unwrap();
        if x.norm_squared() - x.dot(&ps[j]) <= 1e-15 * scale || support.contains(&j) {
            break;
        }
        support.push(j);
        lambda.push(0.0);
        loop {
            // Affine minimizer of the support: minimise |sum a_i p_i| with sum a_i = 1.
            let m = support.len();
            let mut sys = DMatrix::zeros(m + 1, m + 1);
            for a in 0..m {
                for b in 0..m {
                    sys[(a, b)] = ps[support[a]].dot(&ps[support[b]]);
                }
                sys[(a, m)] = 1.0;
                sys[(m, a)] = 1.0;
            }
            let mut rhs = DVector::zeros(m + 1);
            rhs[m] = 1.0;
            let Some(sol) = sys.lu().solve(&rhs) else {
                return combine(&support, &lambda).norm();
            };
            let alpha: Vec<f64> = (0..m).map(|i| sol[i]).collect();
            if alpha.iter().all(|&a| a > 1e-14) {
                lambda = alpha;
                break;
            }
            let theta = (0..m)
                .filter(|&i| alpha[i] <= 1e-14)
                .map(|i| lambda[i] / (lambda[i] - alpha[i]))
                .fold(1.0, f64::min);
            for i in 0..m {
                lambda[i] += theta * (alpha[i] - lambda[i]);
            }
            let keep: Vec<usize> = (0..m).filter(|&i| lambda[i] > 1e-14).collect();
            support = keep.iter().map(|&i| support[i]).collect();
            lambda = keep.iter().map(|&i| lambda[i]).collect();
            let total: f64 = lambda.iter().sum();
            lambda.iter_mut().for_each(|l| *l /= total);
        }
        x = combine(&support, &lambda);
    }
    x.norm()
}

// Continuity and stability --------------------------------------------------

/// Moves `p` by a random amount below `delta`.
trait Perturb: GeodesicSpace {
    fn perturb(&self, p: &Self::Point, delta: f64, rng: &mut corpus::CorpusRng) -> Self::Point;
}

impl Perturb for ModelSpace {
    fn perturb(&self, p: &ModelPoint, delta: f64, rng: &mut corpus::CorpusRng) -> ModelPoint {
        let frame = self.frame(p);
        let mut v: Vec<f64> = (0..self.dim()).map(|_| rng.gen_range(-1.0..=1.0)).collect();
        let len = v.iter().map(|c| c * c).sum::<f64>().sqrt().max(1e-300);
        let r = rng.gen_range(0.0..0.99) * delta;
        v.iter_mut().for_each(|c| *c *= r / len);
        self.chart_exp(p, &frame, &v)
    }
}

impl Perturb for RTree {
    fn perturb(&self, p: &TreePoint, delta: f64, rng: &mut corpus::CorpusRng) -> TreePoint {
        let target = corpus::tree_point(rng, self);
        let d = self.distance(p, &target);
        if d == 0.0 {
            return *p;
        }
        let r = rng.gen_range(0.0..0.99) * delta;
        self.tree_geodesic_point(p, &target, (r / d).min(1.0)).expect("t within [0, 1]")
    }
}

/// Instances on which the `delta`-search of barycenter continuity runs.
const CONTINUITY_SEARCHES: usize = 3;

fn stability_reports<S: Perturb>(inst: &Instance<S>, index: usize, seed: u64, opts: &SolverOptions) -> Result<Vec<Report>> {
    let mut rng = instance_rng(seed, &inst.id);
    let space = &inst.space;
    let set = WeightedPointSet::new(space, inst.points.clone(), inst.weights.clone())?;
    let delta = rng.gen_range(0.001..0.05);
    let w2: Vec<f64> = inst.weights.iter().map(|w| (w + 0.99 * delta * rng.gen_range(-1.0..=1.0)).max(0.0)).collect();
    let mut out = vec![radius_lipschitz_check(&set, &set.with_weights(w2)?, delta, opts, &inst.id)?];
    // A delta-function: move every point, and glue some points onto a close neighbour.
    let mut images: Vec<S::Point> = inst.points.iter().map(|p| space.perturb(p, delta, &mut rng)).collect();
    for i in 0..images.len() {
        if let Some(j) = (0..i).find(|&j| space.distance(&inst.points[i], &images[j]) < delta) {
            if rng.gen_bool(0.5) {
                images[i] = images[j].clone();
            }
        }
    }
    let f = DeltaFunction::new(space, &inst.points, images, delta)?;
    out.push(point_perturbation_check(&set, &f, opts, &inst.id)?);
    if index < CONTINUITY_SEARCHES {
        let est = barycenter_continuity_check(&set, 0.05, seed, opts)?;
        let r = Report::above("barycenter-continuity", inst.id.clone(), est.delta, stability::CONTINUITY_FLOOR)
            .with_note(format!("max displacement {:e} at delta {:e}", est.max_displacement, est.delta));
        out.push(if est.found { r } else { r.failed("no delta found") });
    }
    Ok(out)
}

pub fn continuity_suite(seed: u64, count: usize, opts: &SolverOptions) -> Result<Vec<Report>> {
    let o = inner(opts);
    let models: Vec<(usize, Instance<ModelSpace>)> = MODEL_FAMILIES
        .iter()
        .flat_map(|&f| corpus::model_instances(f, seed, count).into_iter().enumerate())
        .collect();
    let mut out = collect(opts.execution, &models, |(i, inst)| stability_reports(inst, *i, seed, &o))?;
    let trees: Vec<(usize, Instance<RTree>)> = TreeShape::ALL
        .iter()
        .flat_map(|&s| corpus::tree_instances(s, seed, count).into_iter().enumerate())
        .collect();
    out.extend(collect(opts.execution, &trees, |(i, inst)| stability_reports(inst, *i, seed, &o))?);
    Ok(out)
}

fn fap_reports<S: Perturb>(inst: &Instance<S>, seed: u64) -> Result<Vec<Report>> {
    let mut rng = instance_rng(seed ^ 0xfa, &inst.id);
    let delta = rng.gen_range(0.005..0.1);
    let ys: Vec<S::Point> = inst.points.iter().map(|p| inst.space.perturb(p, delta, &mut rng)).collect();
    let g: Vec<f64> = inst.weights.iter().map(|w| (w + 0.05 * rng.gen_range(-1.0..=1.0)).max(0.0)).collect();
    let data = FapData { xs: inst.points.clone(), f: inst.weights.clone(), ys, g, delta };
    Ok(vec![fap_check(&inst.space, &data, &inst.id)?])
}

/// Product-approximation inequality on sampled resolution data: each set
/// paired with a perturbed copy and perturbed weights.
pub fn fap_suite(seed: u64, count: usize) -> Result<Vec<Report>> {
    let mut out = collect(Execution::default(), &model_corpus(seed, count), |(_, inst)| fap_reports(inst, seed))?;
    out.extend(collect(Execution::default(), &tree_corpus(seed, count), |inst| fap_reports(inst, seed))?);
    Ok(out)
}

// Isometries ----------------------------------------------------------------

/// `q(gP) = g q(P)` within `10 tol`.
fn equivariance<S: GeodesicSpace, G: Isometry<S>>(
    space: &S,
    points: &[S::Point],
    weights: &[f64],
    g: &G,
    opts: &SolverOptions,
    instance: &str,
) -> Result<Report> {
    let set = WeightedPointSet::new(space, points.to_vec(), weights.to_vec())?;
    let q = barycenter(&set, opts)?.barycenter;
    let moved: Vec<S::Point> = points.iter().map(|p| g.apply(space, p)).collect();
    let qg = barycenter(&WeightedPointSet::new(space, moved, weights.to_vec())?, opts)?.barycenter;
    Ok(Report::at_most("equivariance", instance, space.distance(&qg, &g.apply(space, &q)), 10.0 * opts.tol))
}

/// Rotation by `2 pi / m` fixing the base point of `space`.
fn base_rotation(space: &ModelSpace, m: usize, center: &[f64]) -> Result<LinearIsometry> {
    let theta = std::f64::consts::TAU / m as f64;
    match space.kind() {
        ModelKind::Euclidean => {
            let n = space.dim();
            let r = LinearIsometry::plane_rotation(n, 0, 1.min(n - 1), theta);
            let c = DVector::from_column_slice(center);
            let t = &c - &r * &c;
            LinearIsometry::euclidean_rigid(r, t.as_slice().to_vec())
        }
        // Base point e_1 of the sphere is fixed by rotations of the last two axes.
        ModelKind::Sphere => LinearIsometry::sphere_orthogonal(LinearIsometry::plane_rotation(3, 1, 2, theta)),
        ModelKind::Hyperboloid => LinearIsometry::lorentz(LinearIsometry::plane_rotation(3, 0, 1, theta)),
    }
}

/// Automorphism of `RTree::binary` swapping the two subtrees of the root.
fn binary_swap(tree: &RTree) -> Result<TreeAutomorphism> {
    let n = tree.vertex_count();
    let perm = (0..n)
        .map(|i| {
            if i == 0 {
                return 0;
            }
            // Heap index i at level l: flip the top bit below the root.
            let level = usize::BITS - (i + 1).leading_zeros() - 1;
            ((i + 1) ^ (1 << (level - 1))) - 1
        })
        .collect();
    TreeAutomorphism::new(tree, perm)
}

fn symmetric_star(legs: usize) -> Result<(RTree, TreeAutomorphism)> {
    let tree = RTree::star(&vec![1.0; legs])?;
    let perm = (0..=legs).map(|v| if v == 0 { 0 } else { v % legs + 1 }).collect();
    let g = TreeAutomorphism::new(&tree, perm)?;
    Ok((tree, g))
}

pub fn fixed_point_suite(seed: u64, count: usize, opts: &SolverOptions) -> Result<Vec<Report>> {
    let o = inner(opts);
    let mut out = collect(opts.execution, &model_corpus(seed, count), |(_, inst)| {
        let mut rng = instance_rng(seed ^ 0x15, &inst.id);
        let g = LinearIsometry::random_for(&inst.space, &mut rng);
        Ok(vec![equivariance(&inst.space, &inst.points, &inst.weights, &g, &o, &inst.id)?])
    })?;
    let (star, rot) = symmetric_star(5)?;
    let binary = RTree::binary(&[1.0, 0.6, 0.35])?;
    let swap = binary_swap(&binary)?;
    let mut rng = corpus::rng(seed ^ 0x7e);
    for i in 0..count {
        for (tree, g, label) in [(&star, &rot, "star5"), (&binary, &swap, "binary")] {
            let n = rng.gen_range(3..=12);
            let pts: Vec<TreePoint> = (0..n).map(|_| corpus::tree_point(&mut rng, tree)).collect();
            let w = corpus::weights(&mut rng, n);
            out.push(equivariance(tree, &pts, &w, g, &o, &format!("{label}-{seed}-{i}"))?);
        }
    }
    // Orbits of random seeds under cyclic groups have the group's fixed point as barycenter.
    let families = [ModelFamily::Euclidean(2), ModelFamily::Euclidean(3), ModelFamily::Sphere, ModelFamily::Hyperbolic];
    let jobs: Vec<(ModelFamily, usize)> = families.iter().flat_map(|&f| (0..count).map(move |i| (f, i))).collect();
    out.extend(collect(opts.execution, &jobs, |&(family, i)| {
        let id = format!("orbit-{}-{seed}-{i}", family.label());
        let mut rng = instance_rng(seed, &id);
        let space = family.space();
        let m = rng.gen_range(2..=6);
        let k = rng.gen_range(1..=4);
        let center: Vec<f64> = (0..space.dim()).map(|_| rng.gen_range(-0.5..=0.5)).collect();
        let g = base_rotation(&space, m, &center)?;
        let seeds = corpus::model_points(&mut rng, family, k);
        let w = corpus::weights(&mut rng, k);
        let (mut pts, mut ws) = (Vec::new(), Vec::new());
        for (p, u) in seeds.iter().zip(&w) {
            let mut q = p.clone();
            for _ in 0..m {
                pts.push(q.clone());
                ws.push(*u);
                q = g.apply(&space, &q);
            }
        }
        let set = WeightedPointSet::new(&space, pts, ws)?;
        Ok(vec![fixed_point_check(&set, &[g], &o, &id)?])
    })?);
    let mut rng = corpus::rng(seed ^ 0xf1);
    for i in 0..count {
        let k = rng.gen_range(1..=3);
        let (mut pts, mut ws) = (Vec::new(), Vec::new());
        for _ in 0..k {
            let mut p = corpus::tree_point(&mut rng, &star);
            let u = rng.gen_range(corpus::WEIGHT_RANGE.0..=corpus::WEIGHT_RANGE.1);
            for _ in 0..5 {
                pts.push(p);
                ws.push(u);
                p = rot.apply(&star, &p);
            }
        }
        let set = WeightedPointSet::new(&star, pts, ws)?;
        out.push(fixed_point_check(&set, std::slice::from_ref(&rot), &o, &format!("orbit-star5-{seed}-{i}"))?);
    }
    Ok(out)
}

// Gromov-Hausdorff limits ---------------------------------------------------

/// Stage levels and limit level of the dyadic grid demo on `[0, 1]`.
pub const GRID_LEVELS: std::ops::RangeInclusive<u32> = 2..=12;
pub const GRID_LIMIT_LEVEL: u32 = 14;
/// Radius of the pointed balls compared at each stage.
const POINTED_RADIUS: f64 = 0.25;

pub struct GhDemo {
    pub space: ModelSpace,
    pub sequence: ConvergingSequence<ModelPoint>,
    pub limit: LimitReport<ModelPoint>,
    pub reports: Vec<Report>,
}

/// Dyadic grids of `[0, 1]` with `u(x) = x^2` converging to a fine grid.
pub fn gh_demo(opts: &SolverOptions) -> Result<GhDemo> {
    let levels: Vec<u32> = GRID_LEVELS.collect();
    let (space, sequence) = gh::grid_sequence(&levels, GRID_LIMIT_LEVEL, |x| x * x)?;
    let limit = barycenter_limit(&space, &sequence, opts)?;
    let mut reports = limit.reports("grid-x2");
    reports.extend(pointed_balls(&space, &sequence, &limit, "grid-x2")?);
    Ok(GhDemo { space, sequence, limit, reports })
}

fn pointed_balls<S: GeodesicSpace>(
    space: &S,
    seq: &ConvergingSequence<S::Point>,
    limit: &LimitReport<S::Point>,
    instance: &str,
) -> Result<Vec<Report>> {
    seq.stages()
        .iter()
        .enumerate()
        .map(|(n, st)| {
            pointed_ball_check(
                space,
                st,
                seq.limit_points(),
                &limit.stage_barycenters[n],
                &limit.limit_barycenter,
                POINTED_RADIUS,
                &format!("{instance}/stage-{n}"),
            )
        })
        .collect()
}

/// Jitter scales of the random-sequence part of the gh suite.
const JITTER_SCALES: [f64; 7] = [0.1, 0.03, 0.01, 3e-3, 1e-3, 1e-4, 1e-5];

pub fn gh_suite(seed: u64, count: usize, opts: &SolverOptions) -> Result<Vec<Report>> {
    let mut out = gh_demo(opts)?.reports;
    let jobs: Vec<Instance<ModelSpace>> = [ModelFamily::Euclidean(2), ModelFamily::Hyperbolic]
        .iter()
        .flat_map(|&f| corpus::model_instances(f, seed, count))
        .collect();
    let o = inner(opts);
    out.extend(collect(opts.execution, &jobs, |inst| {
        let mut rng = instance_rng(seed ^ 0x6b, &inst.id);
        let seq = gh::jitter_sequence(&inst.space, &mut rng, inst.points.clone(), inst.weights.clone(), &JITTER_SCALES)?;
        let limit = barycenter_limit(&inst.space, &seq, &o)?;
        Ok(limit.reports(&inst.id))
    })?);
    Ok(out)
}

// Retraction ----------------------------------------------------------------

pub const RETRACTION_WINDOW: f64 = 2.0;
pub const RETRACTION_PACKING: f64 = 0.25;
/// Narrow enough that the `epsilon = 0.01` probes reach the cover.
pub const RETRACTION_COLLAR: f64 = 5e-4;
pub const BOUNDARY_SAMPLES: usize = 200;
pub const PROBE_EPSILONS: [f64; 2] = [0.1, 0.01];

fn window_opts() -> CoverOptions {
    CoverOptions::new(RETRACTION_PACKING).with_collar(RETRACTION_COLLAR)
}

/// Identity, image containment, boundary modulus, factor-6 and local
/// continuity reports for one target.
pub fn retraction_reports(
    cover: &BallCover,
    boundary: &[Vec<f64>],
    label: &str,
    seed: u64,
    opts: &SolverOptions,
) -> Result<Vec<Report>> {
    let relabel = |mut r: Report| {
        r.instance = format!("{label}/{}", r.instance);
        r
    };
    let (id, image) = retraction::retraction_property_check(cover, 101, opts)?;
    let mut out = vec![relabel(id), relabel(image)];
    for eps in PROBE_EPSILONS {
        let (m, h) = retraction::continuity_probe(cover, boundary, eps, seed, opts)?;
        out.push(relabel(m));
        out.push(relabel(h));
    }
    let (_, local) = retraction::local_continuity_check(cover, 1e-2, 200, seed, opts)?;
    out.push(relabel(local));
    Ok(out)
}

pub fn unit_disk() -> Result<ConvexSubset<ModelSpace>> {
    ConvexSubset::ball(vec![0.0, 0.0], 1.0)
}

pub fn retraction_window() -> (Vec<f64>, Vec<f64>) {
    (vec![-RETRACTION_WINDOW; 2], vec![RETRACTION_WINDOW; 2])
}

/// The unit disk in `[-2, 2]^2`.
pub fn disk_demo(seed: u64, opts: &SolverOptions) -> Result<Vec<Report>> {
    let disk = unit_disk()?;
    let (lo, hi) = retraction_window();
    let cover = BallCover::build(&disk, lo, hi, window_opts())?;
    retraction_reports(&cover, &retraction::circle_samples(1.0, BOUNDARY_SAMPLES), "disk", seed, opts)
}

fn square_boundary(count: usize) -> Vec<Vec<f64>> {
    (0..count)
        .map(|i| {
            let t = 8.0 * i as f64 / count as f64;
            let (side, s) = ((t / 2.0).floor(), t % 2.0 - 1.0);
            match side as u8 {
                0 => vec![s, -1.0],
                1 => vec![1.0, s],
                2 => vec![-s, 1.0],
                _ => vec![-1.0, -s],
            }
        })
        .collect()
}

pub fn retraction_suite(seed: u64, opts: &SolverOptions) -> Result<Vec<Report>> {
    let mut out = disk_demo(seed, opts)?;
    let (lo, hi) = retraction_window();
    let half = ConvexSubset::half_space(vec![0.0, 1.0], 0.0)?;
    let cover = BallCover::build(&half, lo.clone(), hi.clone(), window_opts())?;
    let line: Vec<Vec<f64>> = (0..BOUNDARY_SAMPLES).map(|i| vec![-1.5 + 3.0 * i as f64 / (BOUNDARY_SAMPLES - 1) as f64, 0.0]).collect();
    out.extend(retraction_reports(&cover, &line, "half-plane", seed, opts)?);
    let square = ConvexSubset::axis_box(vec![-1.0, -1.0], vec![1.0, 1.0])?;
    let cover = BallCover::build(&square, lo, hi, window_opts())?;
    out.extend(retraction_reports(&cover, &square_boundary(BOUNDARY_SAMPLES), "square", seed, opts)?);
    Ok(out)
}

// m_k -----------------------------------------------------------------------

/// `(k, r, s)` triples of the positivity grid.
pub fn mk_grid() -> Vec<(f64, f64, f64)> {
    let mut out = Vec::new();
    for k in [-1.0, 0.0, 1.0] {
        for (r, s) in [(0.1, 0.3), (0.3, 0.9), (1.0, 2.0)] {
            if k <= 0.0 || s < 1.0 {
                out.push((k, r, s));
            }
        }
    }
    out
}

pub fn mk_suite() -> Result<Vec<Report>> {
    let grid = mk_grid();
    let values = Execution::default().map(&grid, |&(k, r, s)| m_k_constant(Curvature::new(k)?, r, s, MkGrid::default()));
    grid.iter()
        .zip(values)
        .map(|(&(k, r, s), m)| Ok(Report::above("mk", format!("k{k}-r{r}-s{s}"), m?, 0.0)))
        .collect()
}
