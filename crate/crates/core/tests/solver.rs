use catbary::corpus::{self, ModelFamily, TreeShape};
use catbary::model::ModelPoint;
use catbary::solver::{
    barycenter, barycenter_pow, circumcenter, objective, oracle_grid, SolveError, SolverOptions,
    WeightedPointSet, DEFAULT_ORACLE_RESOLUTION,
};
use catbary::space::{GeodesicSpace, ModelSpace, RTree};
use catbary::Error;

fn line(xs: &[f64]) -> (ModelSpace, Vec<ModelPoint>) {
    let s = ModelSpace::euclidean(1).unwrap();
    let pts = xs.iter().map(|&x| s.point(vec![x]).unwrap()).collect();
    (s, pts)
}

/// In a tree (and on a line) the optimum is fixed by a single pair:
/// `r = max u_p u_q d(p, q) / (u_p + u_q)`.
fn pairwise_radius<S: GeodesicSpace>(space: &S, pts: &[S::Point], w: &[f64]) -> f64 {
    let mut r = 0.0f64;
    for i in 0..pts.len() {
        for j in 0..i {
            r = r.max(w[i] * w[j] * space.distance(&pts[i], &pts[j]) / (w[i] + w[j]));
        }
    }
    r
}

#[test]
fn three_point_line_example() {
    let (s, pts) = line(&[1.0, 3.0, 4.0]);
    let set = WeightedPointSet::new(&s, pts, vec![1.0, 4.0, 3.0]).unwrap();
    let r = barycenter(&set, &SolverOptions::default()).unwrap();
    assert!((r.barycenter.coords()[0] - 3.25).abs() < 1e-12);
    assert!((r.baryradius - 2.25).abs() < 1e-12);
    assert_eq!(r.active_indices, vec![0, 2]);
}

#[test]
fn dense_samples_with_quadratic_weight() {
    let (s, pts) = line(&(0..10_000).map(|i| (i as f64 + 0.5) / 10_000.0).collect::<Vec<_>>());
    let w = pts.iter().map(|p| p.coords()[0].powi(2)).collect();
    let set = WeightedPointSet::new(&s, pts, w).unwrap();
    let r = barycenter(&set, &SolverOptions::default()).unwrap();
    assert!((r.barycenter.coords()[0] - 0.894).abs() < 5e-4, "{:?}", r.barycenter);
}

#[test]
fn two_point_balance() {
    let (s, pts) = line(&[0.0, 1.0]);
    let set = WeightedPointSet::new(&s, pts, vec![1.0, 2.0]).unwrap();
    let r = barycenter(&set, &SolverOptions::default()).unwrap();
    assert!((r.barycenter.coords()[0] - 2.0 / 3.0).abs() < 1e-12);
    assert!((r.baryradius - 2.0 / 3.0).abs() < 1e-12);
}

#[test]
fn equilateral_circumcenter() {
    let s = ModelSpace::euclidean(2).unwrap();
    let h = 3f64.sqrt() / 2.0;
    let pts = vec![
        s.point(vec![0.0, 0.0]).unwrap(),
        s.point(vec![1.0, 0.0]).unwrap(),
        s.point(vec![0.5, h]).unwrap(),
    ];
    let r = circumcenter(&s, pts, &SolverOptions::default()).unwrap();
    assert!((r.baryradius - 1.0 / 3f64.sqrt()).abs() < 1e-12);
    let c = r.barycenter.coords();
    assert!((c[0] - 0.5).abs() < 1e-12 && (c[1] - h / 3.0).abs() < 1e-12);
    assert_eq!(r.active_indices, vec![0, 1, 2]);
}

#[test]
fn obtuse_triangle_uses_longest_side() {
    let s = ModelSpace::euclidean(2).unwrap();
    let pts = vec![
        s.point(vec![0.0, 0.0]).unwrap(),
        s.point(vec![4.0, 0.0]).unwrap(),
        s.point(vec![2.0, 0.5]).unwrap(),
    ];
    let r = circumcenter(&s, pts, &SolverOptions::default()).unwrap();
    assert!((r.baryradius - 2.0).abs() < 1e-12);
    assert_eq!(r.active_indices, vec![0, 1]);
}

#[test]
fn tetrahedron_circumcenter() {
    let s = ModelSpace::euclidean(3).unwrap();
    let pts = corpus::regular_simplex(3).unwrap();
    let r = circumcenter(&s, pts, &SolverOptions::default()).unwrap();
    assert!((r.baryradius - 6f64.sqrt() / 4.0).abs() < 1e-12);
    assert!(r.barycenter.coords().iter().all(|c| c.abs() < 1e-12));
}

#[test]
fn sphere_pair_midpoint() {
    let s = ModelSpace::sphere(1.0, 2).unwrap();
    let a = s.point(vec![1.0, 0.0, 0.0]).unwrap();
    let b = s.point(vec![0.3f64.cos(), 0.3f64.sin(), 0.0]).unwrap();
    let r = circumcenter(&s, vec![a, b], &SolverOptions::default()).unwrap();
    assert!((r.baryradius - 0.15).abs() < 1e-12);
    let c = r.barycenter.coords();
    assert!((c[0] - 0.15f64.cos()).abs() < 1e-12 && (c[1] - 0.15f64.sin()).abs() < 1e-12);
}

#[test]
fn sphere_diameter_bound_is_enforced() {
    let s = ModelSpace::sphere(1.0, 2).unwrap();
    let a = s.point(vec![1.0, 0.0, 0.0]).unwrap();
    let b = s.point(vec![0.2, 0.96f64.sqrt(), 0.0]).unwrap();
    let set = WeightedPointSet::new(&s, vec![a.clone(), b.clone()], vec![1.0, 2.0]).unwrap();
    let err = barycenter(&set, &SolverOptions::default()).unwrap_err();
    assert!(matches!(err, SolveError::Invalid(Error::DiameterBound { .. })));
    // Equal weights relax the bound to D_k / 2.
    let set = WeightedPointSet::uniform(&s, vec![a, b]).unwrap();
    assert!(barycenter(&set, &SolverOptions::default()).is_ok());
}

#[test]
fn power_matches_line_grid() {
    let (s, pts) = line(&[1.0, 3.0, 4.0]);
    let u = [1.0, 4.0, 3.0];
    let set = WeightedPointSet::new(&s, pts, u.to_vec()).unwrap();
    let r = barycenter_pow(&set, 2.0, &SolverOptions::default()).unwrap();
    let f = |x: f64| [1.0, 3.0, 4.0].iter().zip(&u).map(|(p, w)| w * (x - p).powi(2)).fold(0.0, f64::max);
    let (mut best_x, mut best) = (0.0, f64::INFINITY);
    for i in 0..=300_000 {
        let x = 1.0 + 3.0 * i as f64 / 300_000.0;
        if f(x) < best {
            best = f(x);
            best_x = x;
        }
    }
    assert!((r.barycenter.coords()[0] - best_x).abs() < 1e-5);
    assert!(r.baryradius <= best && best - r.baryradius < 1e-4);
}

#[test]
fn model_corpora_match_grid_oracle() {
    for family in [ModelFamily::Euclidean(1), ModelFamily::Euclidean(2), ModelFamily::Sphere, ModelFamily::Hyperbolic] {
        for inst in corpus::model_instances(family, 11, 10) {
            let set = WeightedPointSet::new(&inst.space, inst.points.clone(), inst.weights.clone()).unwrap();
            let r = barycenter(&set, &SolverOptions::default()).unwrap();
            let o = oracle_grid(&set, DEFAULT_ORACLE_RESOLUTION).unwrap();
            assert!(r.baryradius <= o.baryradius + 1e-9 * (1.0 + o.baryradius), "{} {} {}", inst.id, r.baryradius, o.baryradius);
            assert!(o.baryradius - r.baryradius <= 1e-6 * (1.0 + r.baryradius), "{} {} {}", inst.id, r.baryradius, o.baryradius);
            assert!(inst.space.distance(&r.barycenter, &o.barycenter) < 1e-6, "{}", inst.id);
        }
    }
}

#[test]
fn line_corpus_matches_pairwise_formula() {
    for inst in corpus::model_instances(ModelFamily::Euclidean(1), 3, 30) {
        let set = WeightedPointSet::new(&inst.space, inst.points.clone(), inst.weights.clone()).unwrap();
        let r = barycenter(&set, &SolverOptions::default()).unwrap();
        let exact = pairwise_radius(&inst.space, &inst.points, &inst.weights);
        assert!((r.baryradius - exact).abs() < 1e-12 * (1.0 + exact), "{}", inst.id);
    }
}

#[test]
fn tree_corpora_match_exact_solvers() {
    for shape in TreeShape::ALL {
        for inst in corpus::tree_instances(shape, 5, 20) {
            let set = WeightedPointSet::new(&inst.space, inst.points.clone(), inst.weights.clone()).unwrap();
            let r = barycenter(&set, &SolverOptions::default()).unwrap();
            let o = oracle_grid(&set, 0).unwrap();
            let exact = pairwise_radius(&inst.space, &inst.points, &inst.weights);
            assert!((o.baryradius - exact).abs() < 1e-12, "{}", inst.id);
            assert!((r.baryradius - exact).abs() < 1e-12, "{}", inst.id);
            assert!(inst.space.distance(&r.barycenter, &o.barycenter) < 1e-9, "{}", inst.id);
        }
    }
}

#[test]
fn random_probes_never_beat_the_barycenter() {
    use rand::Rng;
    let mut rng = corpus::rng(99);
    for inst in corpus::model_instances(ModelFamily::Euclidean(3), 21, 10) {
        let set = WeightedPointSet::new(&inst.space, inst.points.clone(), inst.weights.clone()).unwrap();
        let r = barycenter(&set, &SolverOptions::default()).unwrap();
        for _ in 0..1000 {
            let x = inst.space.point((0..3).map(|_| rng.gen_range(-1.0..1.0)).collect()).unwrap();
            assert!(objective(&set, &x) >= r.baryradius - 1e-12);
        }
    }
}

#[test]
fn star_tree_weighted_example() {
    let t = RTree::star(&[1.0, 1.0, 1.0]).unwrap();
    let leaves: Vec<_> = (1..=3).map(|v| t.vertex_point(v)).collect();
    let set = WeightedPointSet::new(&t, leaves, vec![2.0, 1.0, 1.0]).unwrap();
    let o = oracle_grid(&set, 0).unwrap();
    assert!((o.baryradius - 4.0 / 3.0).abs() < 1e-15);
    assert_eq!(o.barycenter.edge, 0);
    assert!((o.barycenter.offset - 1.0 / 3.0).abs() < 1e-15);
}

#[test]
fn objective_examples() {
    let (s, pts) = line(&[2.0]);
    let set = WeightedPointSet::new(&s, pts.clone(), vec![5.0]).unwrap();
    assert_eq!(objective(&set, &pts[0]), 0.0);
    let (s, pts) = line(&[0.0, 2.0]);
    let set = WeightedPointSet::uniform(&s, pts).unwrap();
    assert_eq!(objective(&set, &s.point(vec![1.0]).unwrap()), 1.0);
}

#[test]
fn power_examples() {
    let (s, pts) = line(&[0.0, 1.0]);
    let set = WeightedPointSet::uniform(&s, pts).unwrap();
    let r = barycenter_pow(&set, 2.0, &SolverOptions::default()).unwrap();
    assert!((r.barycenter.coords()[0] - 0.5).abs() < 1e-12);
    assert!((r.baryradius - 0.25).abs() < 1e-12);
    let one = barycenter_pow(&set, 1.0, &SolverOptions::default()).unwrap();
    assert_eq!(one, barycenter(&set, &SolverOptions::default()).unwrap());
    assert!(barycenter_pow(&set, 0.0, &SolverOptions::default()).is_err());
}

#[test]
fn two_point_circumcenter_is_the_midpoint() {
    let s = ModelSpace::hyperbolic(-1.0, 2).unwrap();
    let (p, q) = (ModelPoint::hyperboloid_lift(&[0.4, -0.2]), ModelPoint::hyperboloid_lift(&[-1.0, 0.7]));
    let d = s.distance(&p, &q);
    let r = circumcenter(&s, vec![p.clone(), q.clone()], &SolverOptions::default()).unwrap();
    assert!((r.baryradius - d / 2.0).abs() < 1e-12);
    assert!(s.distance(&r.barycenter, &s.geodesic_point(&p, &q, 0.5).unwrap()) < 1e-9);
}

#[test]
fn all_zero_weights_are_rejected() {
    let (s, pts) = line(&[0.0, 1.0]);
    assert!(matches!(WeightedPointSet::new(&s, pts, vec![0.0, 0.0]), Err(Error::InvalidInput(_))));
}

#[test]
fn exhausted_budget_reports_the_best_iterate() {
    let fam = ModelFamily::Euclidean(2);
    let inst = corpus::model_instances(fam, 3, 1).remove(0);
    let set = WeightedPointSet::new(&inst.space, inst.points, inst.weights).unwrap();
    let opts = SolverOptions { descent_iters: 1, ..SolverOptions::default() }.with_max_iter(1);
    match barycenter(&set, &opts) {
        Err(SolveError::NonConvergence { best }) => {
            assert!((best.baryradius - objective(&set, &best.barycenter)).abs() < 1e-12);
        }
        other => panic!("expected non-convergence, got {other:?}"),
    }
}

mod invariants {
    use super::*;
    use catbary::isometry::{Isometry, LinearIsometry};
    use catbary::suites::hull_distance;
    use proptest::prelude::*;

    const FAMILIES: [ModelFamily; 5] = [
        ModelFamily::Euclidean(1),
        ModelFamily::Euclidean(2),
        ModelFamily::Euclidean(3),
        ModelFamily::Sphere,
        ModelFamily::Hyperbolic,
    ];

    fn instance() -> impl Strategy<Value = (ModelFamily, Vec<ModelPoint>, Vec<f64>, u64)> {
        (0usize..FAMILIES.len(), 2usize..16, any::<u64>()).prop_map(|(f, n, seed)| {
            let fam = FAMILIES[f];
            let mut rng = corpus::rng(seed);
            let pts = corpus::model_points(&mut rng, fam, n);
            let w = corpus::weights(&mut rng, n);
            (fam, pts, w, seed)
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn scaling((fam, pts, w, _) in instance(), lambda in 0.1..10.0f64) {
            let s = fam.space();
            let opts = SolverOptions::default();
            let set = WeightedPointSet::new(&s, pts, w.clone()).unwrap();
            let a = barycenter(&set, &opts).unwrap();
            let b = barycenter(&set.with_weights(w.iter().map(|x| lambda * x).collect()).unwrap(), &opts).unwrap();
            prop_assert!((b.baryradius / a.baryradius - lambda).abs() <= 1e-9);
            prop_assert!(s.distance(&a.barycenter, &b.barycenter) <= 2.0 * opts.tol);
        }

        #[test]
        fn zero_weights_change_nothing((fam, pts, w, seed) in instance(), extra in 1usize..4) {
            let s = fam.space();
            let opts = SolverOptions::default();
            let a = barycenter(&WeightedPointSet::new(&s, pts.clone(), w.clone()).unwrap(), &opts).unwrap();
            let mut rng = corpus::rng(seed ^ 1);
            let (mut p2, mut w2) = (pts, w);
            p2.extend(corpus::model_points(&mut rng, fam, extra));
            w2.extend(std::iter::repeat_n(0.0, extra));
            let b = barycenter(&WeightedPointSet::new(&s, p2, w2).unwrap(), &opts).unwrap();
            prop_assert_eq!(a.barycenter, b.barycenter);
            prop_assert_eq!(a.baryradius, b.baryradius);
        }

        /// `q_u` lies in every closed ball containing `P`: balls centred at
        /// random points and at the circumcenter.
        #[test]
        fn containment((fam, pts, w, seed) in instance()) {
            let s = fam.space();
            let opts = SolverOptions::default();
            let q = barycenter(&WeightedPointSet::new(&s, pts.clone(), w).unwrap(), &opts).unwrap().barycenter;
            let c = circumcenter(&s, pts.clone(), &opts).unwrap();
            prop_assert!(s.distance(&q, &c.barycenter) <= c.baryradius + opts.tol);
            let mut rng = corpus::rng(seed ^ 2);
            for x in corpus::model_points(&mut rng, fam, 5) {
                let r = pts.iter().map(|p| s.distance(&x, p)).fold(0.0, f64::max);
                if r < s.curvature().diameter_cap() / 2.0 {
                    prop_assert!(s.distance(&q, &x) <= r + opts.tol);
                }
            }
        }

        #[test]
        fn hull_membership(dim in 1usize..4, n in 2usize..20, seed in any::<u64>()) {
            let fam = ModelFamily::Euclidean(dim);
            let s = fam.space();
            let mut rng = corpus::rng(seed);
            let pts = corpus::model_points(&mut rng, fam, n);
            let w = corpus::weights(&mut rng, n);
            let opts = SolverOptions::default();
            let q = barycenter(&WeightedPointSet::new(&s, pts.clone(), w).unwrap(), &opts).unwrap().barycenter;
            let coords: Vec<&[f64]> = pts.iter().map(|p| p.coords()).collect();
            prop_assert!(hull_distance(&coords, q.coords()) <= opts.tol);
        }

        #[test]
        fn isometry_equivariance((fam, pts, w, seed) in instance()) {
            let s = fam.space();
            let opts = SolverOptions::default();
            let g = LinearIsometry::random_for(&s, &mut corpus::rng(seed ^ 3));
            let q = barycenter(&WeightedPointSet::new(&s, pts.clone(), w.clone()).unwrap(), &opts).unwrap().barycenter;
            let moved = pts.iter().map(|p| g.apply(&s, p)).collect();
            let qg = barycenter(&WeightedPointSet::new(&s, moved, w).unwrap(), &opts).unwrap().barycenter;
            prop_assert!(s.distance(&qg, &g.apply(&s, &q)) <= 10.0 * opts.tol);
        }

        /// Two distinct points of positive weight force a positive radius.
        #[test]
        fn radius_is_positive((fam, pts, w, _) in instance()) {
            let s = fam.space();
            let r = barycenter(&WeightedPointSet::new(&s, pts, w).unwrap(), &SolverOptions::default()).unwrap();
            prop_assert!(r.baryradius > 0.0);
        }

        #[test]
        fn tree_scaling_and_zero_weights(shape in 0usize..3, seed in any::<u64>(), lambda in 0.1..10.0f64) {
            let inst = corpus::tree_instances(TreeShape::ALL[shape], seed, 1).remove(0);
            let opts = SolverOptions::default();
            let set = WeightedPointSet::new(&inst.space, inst.points.clone(), inst.weights.clone()).unwrap();
            let a = barycenter(&set, &opts).unwrap();
            let b = barycenter(&set.with_weights(inst.weights.iter().map(|x| lambda * x).collect()).unwrap(), &opts).unwrap();
            prop_assert!((b.baryradius / a.baryradius - lambda).abs() <= 1e-9);
            prop_assert!(inst.space.distance(&a.barycenter, &b.barycenter) <= 2.0 * opts.tol);
            let mut rng = corpus::rng(seed ^ 4);
            let (mut p2, mut w2) = (inst.points.clone(), inst.weights.clone());
            p2.push(corpus::tree_point(&mut rng, &inst.space));
            w2.push(0.0);
            let c = barycenter(&WeightedPointSet::new(&inst.space, p2, w2).unwrap(), &opts).unwrap();
            prop_assert_eq!(a.barycenter, c.barycenter);
        }
    }
}
