//! Geodesic spaces the barycenter solver runs over.

mod model;
mod subset;
mod tree;

pub use model::ModelSpace;
pub use subset::ConvexSubset;
pub use tree::{EdgeSpec, RTree, TreeAutomorphism, TreePoint, TreeSpec};

use std::fmt::Debug;

use rand::Rng;

use crate::error::Result;
use crate::model::{comparison_triangle, Curvature, TriangleSide};

/// A uniquely geodesic metric space, assumed CAT(k) for its
/// [`curvature`](GeodesicSpace::curvature).
pub trait GeodesicSpace: Sync {
    type Point: Clone + Debug + PartialEq + Send + Sync;

    fn distance(&self, x: &Self::Point, y: &Self::Point) -> f64;

    /// Point at parameter `t` in `[0, 1]` of the geodesic from `x` to `y`.
    fn geodesic_point(&self, x: &Self::Point, y: &Self::Point, t: f64) -> Result<Self::Point>;

    fn curvature(&self) -> Curvature;

    fn validate_point(&self, x: &Self::Point) -> Result<()>;

    /// Membership predicate; always true except for subset spaces.
    fn contains(&self, _x: &Self::Point) -> bool {
        true
    }

    /// Starting point for barycenter iterations.
    fn initial_guess(&self, points: &[Self::Point], weights: &[f64]) -> Self::Point;

    /// Local coordinates, when the space has a smooth structure.
    fn tangent_chart(&self) -> Option<&dyn TangentChart<Self::Point>> {
        None
    }
}

/// Exponential-map coordinates around a base point.
pub trait TangentChart<P>: Sync {
    fn chart_dim(&self) -> usize;

    /// Orthonormal tangent frame at `base`.
    fn frame(&self, base: &P) -> Vec<Vec<f64>>;

    /// The point reached from `base` along `sum v_j frame_j`; `|v|` is the
    /// distance travelled.
    fn chart_exp(&self, base: &P, frame: &[Vec<f64>], v: &[f64]) -> P;

    /// Components against `frame` of the unit tangent at `x` pointing toward
    /// `p`. `None` if `x == p`.
    fn direction_components(&self, x: &P, p: &P, frame: &[Vec<f64>]) -> Option<Vec<f64>>;
}

/// Largest excess `d(x', y') - d(x'_bar, y'_bar)` over `samples` random
/// comparison-point pairs on the given triangles. Non-positive (up to
/// rounding) in a CAT(k) space. A sampled test, not a certificate.
pub fn cat_inequality_excess<S, R>(
    space: &S,
    triangles: &[(S::Point, S::Point, S::Point)],
    samples: usize,
    rng: &mut R,
) -> Result<f64>
where
    S: GeodesicSpace,
    R: Rng,
{
    let k = space.curvature();
    let sides = [TriangleSide::XY, TriangleSide::YZ, TriangleSide::XZ];
    let mut worst = f64::NEG_INFINITY;
    for (x, y, z) in triangles {
        let (a, b, c) = (space.distance(y, z), space.distance(x, z), space.distance(x, y));
        if a + b + c >= 2.0 * k.diameter_cap() {
            continue;
        }
        let tri = comparison_triangle(k, a, b, c)?;
        let endpoints = |side: TriangleSide| match side {
            TriangleSide::XY => (x, y),
            TriangleSide::YZ => (y, z),
            TriangleSide::XZ => (x, z),
        };
        for _ in 0..samples {
            let s1 = sides[rng.gen_range(0..3)];
            let s2 = sides[rng.gen_range(0..3)];
            let (t1, t2): (f64, f64) = (rng.gen(), rng.gen());
            let (p1, q1) = endpoints(s1);
            let (p2, q2) = endpoints(s2);
            let u = space.geodesic_point(p1, q1, t1)?;
            let v = space.geodesic_point(p2, q2, t2)?;
            let actual = space.distance(&u, &v);
            let bound = tri.comparison_distance(
                s1,
                t1 * tri.side_length(s1),
                s2,
                t2 * tri.side_length(s2),
            )?;
            worst = worst.max(actual - bound);
        }
    }
    Ok(worst)
}
