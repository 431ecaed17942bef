//! Seeded random instances shared by the verification suites, the CLI and
//! the tests.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::model::ModelPoint;
use crate::space::{GeodesicSpace, ModelSpace, RTree, TangentChart, TreePoint};

pub type CorpusRng = ChaCha8Rng;

pub fn rng(seed: u64) -> CorpusRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Range of random weights.
pub const WEIGHT_RANGE: (f64, f64) = (0.2, 2.0);
/// Geodesic radius of the caps sampled on spheres.
pub const SPHERE_CAP_RADIUS: f64 = 0.3;
/// Geodesic radius of the balls sampled in hyperbolic space.
pub const HYPERBOLIC_RADIUS: f64 = 1.5;
/// Range of instance sizes.
pub const SIZE_RANGE: (usize, usize) = (3, 30);

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ModelFamily {
    Euclidean(usize),
    /// `S^2` with `k = 1`.
    Sphere,
    /// `H^2` with `k = -1`.
    Hyperbolic,
}

impl ModelFamily {
    pub fn space(self) -> ModelSpace {
        match self {
            ModelFamily::Euclidean(n) => ModelSpace::euclidean(n),
            ModelFamily::Sphere => ModelSpace::sphere(1.0, 2),
            ModelFamily::Hyperbolic => ModelSpace::hyperbolic(-1.0, 2),
        }
        .expect("fixed corpus spaces are valid")
    }

    pub fn label(self) -> String {
        match self {
            ModelFamily::Euclidean(n) => format!("E{n}"),
            ModelFamily::Sphere => "S2".into(),
            ModelFamily::Hyperbolic => "H2".into(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum TreeShape {
    Star,
    Caterpillar,
    Binary,
}

impl TreeShape {
    pub const ALL: [TreeShape; 3] = [TreeShape::Star, TreeShape::Caterpillar, TreeShape::Binary];

    pub fn tree(self) -> RTree {
        match self {
            TreeShape::Star => RTree::star(&[1.0, 0.7, 1.3, 0.5, 1.1]),
            TreeShape::Caterpillar => {
                let mut names: Vec<String> = (0..5).map(|i| format!("s{i}")).collect();
                names.extend((0..4).map(|i| format!("h{i}")));
                let edges = [
                    (0, 1, 0.8),
                    (1, 2, 1.2),
                    (2, 3, 0.6),
                    (3, 4, 1.0),
                    (1, 5, 0.5),
                    (2, 6, 0.9),
                    (3, 7, 0.4),
                    (3, 8, 0.7),
                ];
                RTree::new(names, &edges)
            }
            TreeShape::Binary => RTree::binary(&[1.0, 0.6, 0.35]),
        }
        .expect("fixed corpus trees are valid")
    }

    pub fn label(self) -> &'static str {
        match self {
            TreeShape::Star => "star",
            TreeShape::Caterpillar => "caterpillar",
            TreeShape::Binary => "binary",
        }
    }
}

#[derive(Clone, Debug)]
pub struct Instance<S: GeodesicSpace> {
    pub id: String,
    pub space: S,
    pub points: Vec<S::Point>,
    pub weights: Vec<f64>,
}

pub fn weights(rng: &mut impl Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.gen_range(WEIGHT_RANGE.0..=WEIGHT_RANGE.1)).collect()
}

/// Uniform sample of the cube `[-1, 1]^n`.
pub fn euclidean_cloud(rng: &mut impl Rng, dim: usize, n: usize) -> Vec<ModelPoint> {
    (0..n)
        .map(|_| {
            ModelPoint::euclidean((0..dim).map(|_| rng.gen_range(-1.0..=1.0)).collect())
                .expect("finite coordinates")
        })
        .collect()
}

/// Uniform sample (in exponential coordinates) of the ball of the given
/// radius around the base point.
pub fn model_ball(rng: &mut impl Rng, space: &ModelSpace, radius: f64, n: usize) -> Vec<ModelPoint> {
    let base = space.base_point();
    let frame = space.frame(&base);
    let dim = space.dim();
    (0..n)
        .map(|_| loop {
            let v: Vec<f64> = (0..dim).map(|_| rng.gen_range(-radius..=radius)).collect();
            if v.iter().map(|c| c * c).sum::<f64>() <= radius * radius {
                break space.chart_exp(&base, &frame, &v);
            }
        })
        .collect()
}

pub fn model_points(rng: &mut impl Rng, family: ModelFamily, n: usize) -> Vec<ModelPoint> {
    let space = family.space();
    match family {
        ModelFamily::Euclidean(dim) => euclidean_cloud(rng, dim, n),
        ModelFamily::Sphere => model_ball(rng, &space, SPHERE_CAP_RADIUS, n),
        ModelFamily::Hyperbolic => model_ball(rng, &space, HYPERBOLIC_RADIUS, n),
    }
}

/// Random point of `tree`: a vertex with probability 1/5, else uniform on a
/// random edge.
pub fn tree_point(rng: &mut impl Rng, tree: &RTree) -> TreePoint {
    if rng.gen_bool(0.2) {
        return tree.vertex_point(rng.gen_range(0..tree.vertex_count()));
    }
    let e = rng.gen_range(0..tree.edge_count());
    let offset = rng.gen_range(0.0..=tree.edge_length(e));
    tree.point(e, offset).expect("offset within the edge")
}

pub fn model_instances(family: ModelFamily, seed: u64, count: usize) -> Vec<Instance<ModelSpace>> {
    let mut rng = rng(seed);
    (0..count)
        .map(|i| {
            let n = rng.gen_range(SIZE_RANGE.0..=SIZE_RANGE.1);
            let points = model_points(&mut rng, family, n);
            Instance {
                id: format!("{}-{seed}-{i}", family.label()),
                space: family.space(),
                points,
                weights: weights(&mut rng, n),
            }
        })
        .collect()
}

pub fn tree_instances(shape: TreeShape, seed: u64, count: usize) -> Vec<Instance<RTree>> {
    let mut rng = rng(seed);
    let tree = shape.tree();
    (0..count)
        .map(|i| {
            let n = rng.gen_range(SIZE_RANGE.0..=SIZE_RANGE.1);
            let points = (0..n).map(|_| tree_point(&mut rng, &tree)).collect();
            Instance {
                id: format!("{}-{seed}-{i}", shape.label()),
                space: tree.clone(),
                points,
                weights: weights(&mut rng, n),
            }
        })
        .collect()
}

/// Vertices of the regular simplex with unit edges in `E^n`, centred at the
/// origin.
pub fn regular_simplex(dim: usize) -> Result<Vec<ModelPoint>> {
    // Standard basis of R^(n+1) lies in the hyperplane sum = 1 with edge sqrt 2;
    // express it in an orthonormal basis of that hyperplane.
    let m = dim + 1;
    let centroid = 1.0 / m as f64;
    let mut basis: Vec<Vec<f64>> = Vec::new();
    for j in 0..dim {
        let mut v = vec![0.0; m];
        v[j] = 1.0;
        v[j + 1] = -1.0;
        for q in &basis {
            let c: f64 = v.iter().zip(q).map(|(a, b)| a * b).sum();
            v.iter_mut().zip(q).for_each(|(a, b)| *a -= c * b);
        }
        let len = v.iter().map(|a| a * a).sum::<f64>().sqrt();
        basis.push(v.into_iter().map(|a| a / len).collect());
    }
    (0..m)
        .map(|i| {
            let coords = basis
                .iter()
                .map(|q| q.iter().enumerate().map(|(j, b)| ((i == j) as u8 as f64 - centroid) * b).sum::<f64>())
                .map(|c| c / 2f64.sqrt())
                .collect();
            ModelPoint::euclidean(coords)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn corpus_is_deterministic() {
        let a = model_instances(ModelFamily::Sphere, 7, 3);
        let b = model_instances(ModelFamily::Sphere, 7, 3);
        for (x, y) in a.iter().zip(&b) {
            assert_eq!(x.points, y.points);
            assert_eq!(x.weights, y.weights);
        }
    }

    #[test]
    fn simplex_has_unit_edges() {
        for dim in 1..=3 {
            let s = regular_simplex(dim).unwrap();
            let space = ModelSpace::euclidean(dim).unwrap();
            for i in 0..s.len() {
                for j in 0..i {
                    assert!((space.distance(&s[i], &s[j]) - 1.0).abs() < 1e-14);
                }
            }
        }
    }

    #[test]
    fn sphere_caps_respect_radius() {
        let space = ModelFamily::Sphere.space();
        let base = space.base_point();
        for inst in model_instances(ModelFamily::Sphere, 1, 5) {
            for p in &inst.points {
                assert!(space.distance(&base, p) <= SPHERE_CAP_RADIUS + 1e-12);
            }
        }
    }
}
