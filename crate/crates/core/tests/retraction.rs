use catbary::model::ModelPoint;
use catbary::retraction::{
    circle_samples, continuity_probe, local_continuity_check, retraction_property_check, BallCover, CoverOptions,
    RetractMode,
};
use catbary::solver::SolverOptions;
use catbary::space::ConvexSubset;
use catbary::suites::{retraction_reports, retraction_window, unit_disk};
use catbary::Error;

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt()
}

fn coarse() -> CoverOptions {
    CoverOptions::new(0.25).with_collar(1e-2)
}

#[test]
fn disk_cover_passes_all_checks() {
    let disk = unit_disk().unwrap();
    let (lo, hi) = retraction_window();
    let cover = BallCover::build(&disk, lo, hi, coarse()).unwrap();
    let opts = SolverOptions::default();
    let (id, image) = retraction_property_check(&cover, 41, &opts).unwrap();
    assert!(id.pass && image.pass, "{id:?} {image:?}");
    let boundary = circle_samples(1.0, 64);
    let (m, h) = continuity_probe(&cover, &boundary, 0.1, 3, &opts).unwrap();
    assert!(m.pass && h.pass, "{m:?} {h:?}");
    let (scales, local) = local_continuity_check(&cover, 1e-2, 50, 3, &opts).unwrap();
    assert!(local.pass && scales.len() == 3);
}

#[test]
fn half_plane_and_square_targets() {
    let opts = SolverOptions::default();
    let (lo, hi) = retraction_window();
    let half = ConvexSubset::half_space(vec![0.0, 1.0], 0.0).unwrap();
    let cover = BallCover::build(&half, lo.clone(), hi.clone(), coarse()).unwrap();
    let line: Vec<Vec<f64>> = (0..40).map(|i| vec![-1.5 + 3.0 * i as f64 / 39.0, 0.0]).collect();
    let reports = retraction_reports(&cover, &line, "half-plane", 5, &opts).unwrap();
    assert!(reports.iter().all(|r| r.pass), "{reports:?}");
    // Points below the line land on or above it.
    let (img, mode) = cover.retract_with_mode(&[0.3, -1.0], &opts).unwrap();
    assert_eq!(mode, RetractMode::Cover);
    assert!(img[1] >= -1e-12);

    let square = ConvexSubset::axis_box(vec![-1.0, -1.0], vec![1.0, 1.0]).unwrap();
    let cover = BallCover::build(&square, lo, hi, coarse()).unwrap();
    let corners = vec![vec![1.0, 1.0], vec![-1.0, 1.0], vec![-1.0, -1.0], vec![1.0, -1.0]];
    for eps in [0.1, 0.01] {
        let (m, h) = continuity_probe(&cover, &corners, eps, 9, &opts).unwrap();
        assert!(m.pass && h.pass, "{m:?} {h:?}");
    }
}

#[test]
fn window_inside_target_is_identity() {
    let big = ConvexSubset::ball(vec![0.0, 0.0], 10.0).unwrap();
    let cover = BallCover::build(&big, vec![-1.0, -1.0], vec![1.0, 1.0], coarse()).unwrap();
    assert!(cover.members().is_empty());
    let y = [0.25, -0.5];
    assert_eq!(cover.retract_with_mode(&y, &SolverOptions::default()).unwrap(), (y.to_vec(), RetractMode::Identity));
}

#[test]
fn partition_of_unity_examples() {
    let disk = unit_disk().unwrap();
    let (lo, hi) = retraction_window();
    let cover = BallCover::build(&disk, lo, hi, coarse()).unwrap();
    // Far from a half-plane, one cell gives one member and two side-by-side
    // cells give congruent balls.
    let half = ConvexSubset::half_space(vec![0.0, 1.0], 0.0).unwrap();
    let one = BallCover::build(&half, vec![0.0, -5.25], vec![0.25, -5.0], coarse()).unwrap();
    assert_eq!(one.members().len(), 1);
    assert_eq!(one.partition_of_unity(&[0.1, -5.2]).unwrap(), vec![(0, 1.0)]);
    let two = BallCover::build(&half, vec![0.0, -5.25], vec![0.5, -5.0], coarse()).unwrap();
    assert_eq!(two.members().len(), 2);
    let w = two.partition_of_unity(&[0.25, -5.125]).unwrap();
    assert!(w.iter().all(|&(_, u)| (u - 0.5).abs() < 1e-12), "{w:?}");

    for y in [[1.5, 0.3], [-1.9, 1.9], [0.2, -1.01 - 1e-2]] {
        let w = cover.partition_of_unity(&y).unwrap();
        assert!((w.iter().map(|(_, u)| u).sum::<f64>() - 1.0).abs() < 1e-12);
    }
    assert!(matches!(cover.partition_of_unity(&[0.0, 0.5]), Err(Error::NotApplicable(_))));
    assert!(matches!(cover.partition_of_unity(&[1.0 + 1e-3, 0.0]), Err(Error::Uncovered(_))));
}

#[test]
fn retracting_outside_point_respects_the_anchor_bound() {
    let disk = unit_disk().unwrap();
    let (lo, hi) = retraction_window();
    let cover = BallCover::build(&disk, lo, hi, coarse()).unwrap();
    let opts = SolverOptions::default();
    let (img, mode) = cover.retract_with_mode(&[1.5, 0.0], &opts).unwrap();
    assert_eq!(mode, RetractMode::Cover);
    assert!(disk.distance_to_set(&ModelPoint::euclidean(img.clone()).unwrap()) < 1e-9);
    // Anchors of balls through y lie within 6 d(x, y) of the nearest boundary point x.
    assert!(dist(&img, &[1.0, 0.0]) < 6.0 * 0.5);
    let (img, mode) = cover.retract_with_mode(&[1.0 + 1e-3, 0.0], &opts).unwrap();
    assert_eq!(mode, RetractMode::Collar);
    assert!(dist(&img, &[1.0, 0.0]) < 1e-12);
}

#[test]
fn bad_windows_are_rejected() {
    let disk = unit_disk().unwrap();
    assert!(BallCover::build(&disk, vec![1.0, 0.0], vec![0.0, 1.0], coarse()).is_err());
    assert!(BallCover::build(&disk, vec![0.0], vec![1.0], coarse()).is_err());
    assert!(BallCover::build(&disk, vec![-1.0, -1.0], vec![1.0, 1.0], CoverOptions::new(0.0)).is_err());
}
