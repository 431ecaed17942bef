use catbary::corpus::{self, ModelFamily};
use catbary::isometry::{distortion, LinearIsometry};
use catbary::model::ModelPoint;
use catbary::solver::{oracle_grid, SolverOptions, WeightedPointSet};
use catbary::space::{GeodesicSpace, ModelSpace, RTree, TreeAutomorphism};
use catbary::stability::{
    barycenter_continuity_check, fap_check, fixed_point_check, jung_verify, point_perturbation_check,
    radius_lipschitz_check, DeltaFunction, FapData,
};
use catbary::Error;
use proptest::prelude::*;

fn line(xs: &[f64]) -> (ModelSpace, Vec<ModelPoint>) {
    let s = ModelSpace::euclidean(1).unwrap();
    let pts = xs.iter().map(|&x| s.point(vec![x]).unwrap()).collect();
    (s, pts)
}

fn example() -> (ModelSpace, Vec<ModelPoint>, Vec<f64>) {
    let (s, pts) = line(&[1.0, 3.0, 4.0]);
    (s, pts, vec![1.0, 4.0, 3.0])
}

#[test]
fn radius_lipschitz_examples() {
    let (s, pts, w) = example();
    let opts = SolverOptions::default();
    let set = WeightedPointSet::new(&s, pts, w).unwrap();
    let same = radius_lipschitz_check(&set, &set, 1e-3, &opts, "same").unwrap();
    assert_eq!(same.measured, 0.0);
    let bumped = set.with_weights(vec![1.0, 4.01, 3.0]).unwrap();
    let r = radius_lipschitz_check(&set, &bumped, 0.011, &opts, "bump").unwrap();
    assert!(r.pass);
    // r_1 = 1.5 on [1, 4].
    assert!((r.bound - 2.0 * 1.5 * 0.011).abs() < 1e-12);
    let o1 = oracle_grid(&set, 65).unwrap().baryradius;
    let o2 = oracle_grid(&bumped, 65).unwrap().baryradius;
    assert!(((o1 - o2).abs() - r.measured).abs() < 1e-9);
    let inst = corpus::model_instances(ModelFamily::Euclidean(2), 5, 1).remove(0);
    let set = WeightedPointSet::new(&inst.space, inst.points, inst.weights.clone()).unwrap();
    let w2: Vec<f64> = inst.weights.iter().enumerate().map(|(i, w)| w + if i % 2 == 0 { 9e-4 } else { -9e-4 }).collect();
    assert!(radius_lipschitz_check(&set, &set.with_weights(w2).unwrap(), 1e-3, &opts, "e2").unwrap().pass);
    let (s2, other) = line(&[1.0, 3.0, 5.0]);
    let moved = WeightedPointSet::new(&s2, other, vec![1.0, 4.0, 3.0]).unwrap();
    assert!(matches!(radius_lipschitz_check(&set_of(&s), &moved, 1.0, &opts, "x"), Err(Error::InvalidInput(_))));
}

fn set_of(s: &ModelSpace) -> WeightedPointSet<'_, ModelSpace> {
    let (_, pts, w) = example();
    WeightedPointSet::new(s, pts, w).unwrap()
}

#[test]
fn continuity_examples() {
    let (s, pts, w) = example();
    let set = WeightedPointSet::new(&s, pts, w).unwrap();
    let opts = SolverOptions::default();
    let loose = barycenter_continuity_check(&set, 3.0 + 1e-9, 1, &opts).unwrap();
    assert!(loose.found && loose.delta == 4.0);
    let tight = barycenter_continuity_check(&set, 1e-2, 1, &opts).unwrap();
    assert!(tight.found && tight.max_displacement < 1e-2 && tight.delta > 0.0);

    // Balance point b / (a + b) of weights (a, b) on {0, 1}.
    let (s, pts) = line(&[0.0, 1.0]);
    let set = WeightedPointSet::new(&s, pts, vec![1.0, 2.0]).unwrap();
    let est = barycenter_continuity_check(&set, 0.05, 2, &opts).unwrap();
    let d = est.delta;
    let q = |a: f64, b: f64| b / (a + b);
    let analytic = (q(1.0 - d, 2.0 + d) - q(1.0, 2.0)).abs().max((q(1.0 + d, 2.0 - d) - q(1.0, 2.0)).abs());
    assert!(est.found && est.max_displacement <= analytic + 1e-9);
}

#[test]
fn point_perturbation_examples() {
    let (s, pts, w) = example();
    let opts = SolverOptions::default();
    let set = WeightedPointSet::new(&s, pts.clone(), w).unwrap();
    let id = DeltaFunction::identity(&pts, 1e-3);
    assert_eq!(point_perturbation_check(&set, &id, &opts, "id").unwrap().measured, 0.0);
    let jittered: Vec<ModelPoint> =
        pts.iter().zip([0.9e-3, -0.5e-3, 0.7e-3]).map(|(p, j)| s.point(vec![p.coords()[0] + j]).unwrap()).collect();
    let f = DeltaFunction::new(&s, &pts, jittered, 1e-3).unwrap();
    let r = point_perturbation_check(&set, &f, &opts, "jitter").unwrap();
    assert!(r.pass && (r.bound - 4e-3).abs() < 1e-15);
    let inst = corpus::model_instances(ModelFamily::Euclidean(2), 6, 1).remove(0);
    let set = WeightedPointSet::new(&inst.space, inst.points.clone(), inst.weights).unwrap();
    let moved = inst.points.iter().map(|p| s2_shift(p, 0.9e-4)).collect();
    let f = DeltaFunction::new(&inst.space, &inst.points, moved, 1e-4).unwrap();
    assert!(point_perturbation_check(&set, &f, &opts, "e2").unwrap().pass);
    let far = vec![s.point(vec![2.0]).unwrap(), pts[1].clone(), pts[2].clone()];
    assert!(DeltaFunction::new(&s, &pts, far, 1e-3).is_err());
}

fn s2_shift(p: &ModelPoint, by: f64) -> ModelPoint {
    ModelPoint::euclidean(vec![p.coords()[0] + by, p.coords()[1]]).unwrap()
}

fn pentagon() -> (ModelSpace, Vec<ModelPoint>, LinearIsometry) {
    let s = ModelSpace::euclidean(2).unwrap();
    let pts = (0..5)
        .map(|i| {
            let t = std::f64::consts::TAU * i as f64 / 5.0;
            ModelPoint::euclidean(vec![t.cos(), t.sin()]).unwrap()
        })
        .collect();
    let g = LinearIsometry::euclidean_rigid(
        LinearIsometry::plane_rotation(2, 0, 1, std::f64::consts::TAU / 5.0),
        vec![0.0, 0.0],
    )
    .unwrap();
    (s, pts, g)
}

#[test]
fn fixed_point_examples() {
    let opts = SolverOptions::default();
    let (s, pts, g) = pentagon();
    let set = WeightedPointSet::uniform(&s, pts.clone()).unwrap();
    assert!(fixed_point_check(&set, std::slice::from_ref(&g), &opts, "pentagon").unwrap().pass);
    // The full rotation group with orbit-constant weights: the inner and
    // outer pentagons carry different weights.
    let mut all = pts.clone();
    all.extend(pts.iter().map(|p| ModelPoint::euclidean(vec![0.5 * p.coords()[0], 0.5 * p.coords()[1]]).unwrap()));
    let set = WeightedPointSet::new(&s, all, [vec![1.0; 5], vec![3.0; 5]].concat()).unwrap();
    let group: Vec<LinearIsometry> =
        (1..5).map(|j| (0..j - 1).fold(g.clone(), |acc, _| acc.then(&g).unwrap())).collect();
    assert!(fixed_point_check(&set, &group, &opts, "pentagon-group").unwrap().pass);
    // Star with equal legs, leaves permuted cyclically.
    let star = RTree::star(&[1.0; 4]).unwrap();
    let rot = TreeAutomorphism::new(&star, vec![0, 2, 3, 4, 1]).unwrap();
    let leaves: Vec<_> = (1..5).map(|v| star.vertex_point(v)).collect();
    let set = WeightedPointSet::new(&star, leaves, vec![2.0; 4]).unwrap();
    let r = fixed_point_check(&set, &[rot], &opts, "star").unwrap();
    assert!(r.pass && r.measured == 0.0);
    // An isometry that moves the set violates the hypothesis.
    let set = WeightedPointSet::new(&s, pts, vec![1.0, 2.0, 1.0, 1.0, 1.0]).unwrap();
    assert!(matches!(fixed_point_check(&set, &[g], &opts, "x"), Err(Error::HypothesisViolation(_))));
}

#[test]
fn jung_examples() {
    let opts = SolverOptions::default();
    let tri = corpus::regular_simplex(2).unwrap();
    let j = jung_verify(&tri, &opts, "simplex").unwrap();
    assert!((j.circumradius - 1.0 / 3f64.sqrt()).abs() < 1e-12 && j.near_equality && j.report.pass);
    let two = vec![ModelPoint::euclidean(vec![0.0, 0.0, 0.0]).unwrap(), ModelPoint::euclidean(vec![1.0, 2.0, 2.0]).unwrap()];
    let j = jung_verify(&two, &opts, "two").unwrap();
    assert!((j.circumradius - 1.5).abs() < 1e-12 && j.report.pass && !j.near_equality);
    let mut rng = corpus::rng(11);
    for i in 0..100 {
        let pts = corpus::euclidean_cloud(&mut rng, 3, 4 + i % 20);
        assert!(jung_verify(&pts, &opts, "e3").unwrap().report.pass);
    }
}

proptest! {
    #[test]
    fn isometries_preserve_distances(family in 0usize..4, seed in any::<u64>()) {
        let fam = [ModelFamily::Euclidean(2), ModelFamily::Euclidean(3), ModelFamily::Sphere, ModelFamily::Hyperbolic][family];
        let s = fam.space();
        let mut rng = corpus::rng(seed);
        let g = LinearIsometry::random_for(&s, &mut rng);
        let pts = corpus::model_points(&mut rng, fam, 10);
        prop_assert!(distortion(&s, &g, &pts) < 1e-9);
    }

    /// The product-approximation inequality on a cloud and a jittered copy.
    #[test]
    fn fap_bound_holds(seed in any::<u64>(), delta in 1e-4..0.2f64, noise in 0.0..0.3f64) {
        let s = ModelSpace::euclidean(2).unwrap();
        let mut rng = corpus::rng(seed);
        let xs = corpus::euclidean_cloud(&mut rng, 2, 12);
        let ys: Vec<ModelPoint> = xs.iter().map(|p| {
            let a: f64 = rand::Rng::gen_range(&mut rng, 0.0..std::f64::consts::TAU);
            let r: f64 = rand::Rng::gen_range(&mut rng, 0.0..0.99) * delta;
            ModelPoint::euclidean(vec![p.coords()[0] + r * a.cos(), p.coords()[1] + r * a.sin()]).unwrap()
        }).collect();
        let f = corpus::weights(&mut rng, 12);
        let g = f.iter().map(|v| (v + noise * rand::Rng::gen_range(&mut rng, -1.0..=1.0)).max(0.0)).collect();
        let report = fap_check(&s, &FapData { xs, f, ys, g, delta }, "fap").unwrap();
        prop_assert!(report.pass, "{:?}", report);
    }
}

#[test]
fn curved_fixed_points_are_labelled() {
    let s = ModelSpace::hyperbolic(-1.0, 2).unwrap();
    let g = LinearIsometry::lorentz(LinearIsometry::plane_rotation(3, 0, 1, std::f64::consts::PI)).unwrap();
    let p = ModelPoint::hyperboloid_lift(&[0.5, 0.2]);
    let set = WeightedPointSet::uniform(&s, vec![p.clone(), catbary::isometry::Isometry::apply(&g, &s, &p)]).unwrap();
    let r = fixed_point_check(&set, &[g], &SolverOptions::default(), "h2").unwrap();
    assert!(r.pass && r.note.is_some());
    assert!(s.distance(&p, &p) == 0.0);
}
