use catbary::corpus::{self, ModelFamily};
use catbary::gh::{
    barycenter_limit, grid_sequence, hausdorff_distance, jitter_sequence, pointed_ball_check, unit_grid,
    weight_convergence_check, ConvergingSequence, FiniteResolution, Stage,
};
use catbary::model::ModelPoint;
use catbary::solver::SolverOptions;
use catbary::space::ModelSpace;
use catbary::Error;
use proptest::prelude::*;

fn pts(coords: &[&[f64]]) -> Vec<ModelPoint> {
    coords.iter().map(|c| ModelPoint::euclidean(c.to_vec()).unwrap()).collect()
}

#[test]
fn hausdorff_examples() {
    let e1 = ModelSpace::euclidean(1).unwrap();
    let a = pts(&[&[0.0], &[1.0]]);
    assert_eq!(hausdorff_distance(&e1, &a, &a).unwrap(), 0.0);
    assert_eq!(hausdorff_distance(&e1, &pts(&[&[0.0]]), &pts(&[&[3.0]])).unwrap(), 3.0);
    let e2 = ModelSpace::euclidean(2).unwrap();
    let square = pts(&[&[0.0, 0.0], &[1.0, 0.0], &[0.0, 1.0], &[1.0, 1.0]]);
    let mut with_center = square.clone();
    with_center.extend(pts(&[&[0.5, 0.5]]));
    let h = hausdorff_distance(&e2, &square, &with_center).unwrap();
    assert!((h - 2f64.sqrt() / 2.0).abs() < 1e-15);
    assert!(matches!(hausdorff_distance(&e2, &square, &[]), Err(Error::InvalidInput(_))));
}

#[test]
fn resolutions_need_close_sets() {
    let e1 = ModelSpace::euclidean(1).unwrap();
    assert!(FiniteResolution::new(&e1, pts(&[&[0.0]]), pts(&[&[0.5]]), 0.6).is_ok());
    assert!(FiniteResolution::new(&e1, pts(&[&[0.0]]), pts(&[&[0.5]]), 0.5).is_err());
}

#[test]
fn weight_convergence_examples() {
    let e1 = ModelSpace::euclidean(1).unwrap();
    let grid = unit_grid(9);
    let w = vec![1.0; 9];
    let stages = vec![Stage { points: grid.clone(), weights: w.clone(), delta: 0.1 }];
    let constant = ConvergingSequence::new(&e1, stages, grid.clone(), w).unwrap();
    assert!(weight_convergence_check(&e1, &constant, 1e-12, 0).iter().all(|r| r.pass));

    let (space, seq) = grid_sequence(&[2, 3, 4, 5], 8, |x| x * x).unwrap();
    // |x^2 - y^2| <= 2 |x - y| on [0, 1] plus the grid offset squared.
    let d0 = seq.stages()[0].delta;
    assert!(weight_convergence_check(&space, &seq, 2.0 * d0 + d0 * d0, 0).iter().all(|r| r.pass));

    let step = |x: f64| if x < 0.5 { 0.0 } else { 1.0 };
    let (space, seq) = grid_sequence(&[2, 3, 4], 6, step).unwrap();
    let reports = weight_convergence_check(&space, &seq, 0.5, 0);
    assert!(reports.iter().all(|r| !r.pass));
}

#[test]
fn constant_sequence_has_zero_distances() {
    let e2 = ModelSpace::euclidean(2).unwrap();
    let inst = corpus::model_instances(ModelFamily::Euclidean(2), 9, 1).remove(0);
    let stages = (1..4)
        .map(|n| Stage { points: inst.points.clone(), weights: inst.weights.clone(), delta: 1.0 / n as f64 })
        .collect();
    let seq = ConvergingSequence::new(&e2, stages, inst.points.clone(), inst.weights.clone()).unwrap();
    let lim = barycenter_limit(&e2, &seq, &SolverOptions::default()).unwrap();
    assert!(lim.distances.iter().all(|&d| d == 0.0));
    assert!(lim.reports("constant").iter().all(|r| r.pass));
}

#[test]
fn grid_sequence_approaches_the_worked_value() {
    let (space, seq) = grid_sequence(&(2..=12).collect::<Vec<_>>(), 14, |x| x * x).unwrap();
    let lim = barycenter_limit(&space, &seq, &SolverOptions::default()).unwrap();
    let q = lim.limit_barycenter.coords()[0];
    assert!((q - 0.894).abs() < 5e-4, "{q}");
    assert!(lim.reports("grid").iter().all(|r| r.pass), "{:?}", lim.ladder);
    for (n, st) in seq.stages().iter().enumerate() {
        assert!(lim.gh_bounds[n] < st.delta);
        let r = pointed_ball_check(&space, st, seq.limit_points(), &lim.stage_barycenters[n], &lim.limit_barycenter, 0.25, "grid")
            .unwrap();
        assert!(r.pass, "{r:?}");
    }
}

#[test]
fn jittered_clouds_converge() {
    let inst = corpus::model_instances(ModelFamily::Euclidean(2), 4, 1).remove(0);
    let scales: Vec<f64> = (1..=20).map(|n| 0.5f64.powi(n)).collect();
    let seq = jitter_sequence(&inst.space, &mut corpus::rng(4), inst.points, inst.weights, &scales).unwrap();
    let lim = barycenter_limit(&inst.space, &seq, &SolverOptions::default()).unwrap();
    assert!(lim.ladder.iter().all(|(_, from)| from.is_some()), "{:?}", lim.distances);
}

#[test]
fn positive_curvature_is_unsupported() {
    let s = ModelSpace::sphere(1.0, 2).unwrap();
    let p = vec![s.base_point()];
    let seq = ConvergingSequence::new(&s, vec![Stage { points: p.clone(), weights: vec![1.0], delta: 0.1 }], p, vec![1.0])
        .unwrap();
    assert!(matches!(barycenter_limit(&s, &seq, &SolverOptions::default()), Err(Error::Unsupported(_))));
}

proptest! {
    #[test]
    fn hausdorff_triangle_inequality(seed in any::<u64>(), na in 1usize..8, nb in 1usize..8, nc in 1usize..8) {
        let s = ModelSpace::euclidean(2).unwrap();
        let mut rng = corpus::rng(seed);
        let a = corpus::euclidean_cloud(&mut rng, 2, na);
        let b = corpus::euclidean_cloud(&mut rng, 2, nb);
        let c = corpus::euclidean_cloud(&mut rng, 2, nc);
        let h = |x: &[ModelPoint], y: &[ModelPoint]| hausdorff_distance(&s, x, y).unwrap();
        prop_assert_eq!(h(&a, &b), h(&b, &a));
        prop_assert!(h(&a, &c) <= h(&a, &b) + h(&b, &c) + 1e-9);
    }
}
