//! Closed convex subsets of a geodesic space.

use std::fmt;

use super::{GeodesicSpace, TangentChart};
use crate::error::{Error, Result};
use crate::model::{Curvature, ModelKind, ModelPoint};

type Membership<P> = Box<dyn Fn(&P) -> bool + Send + Sync>;
type Projector<P> = Box<dyn Fn(&P) -> P + Send + Sync>;

/// Slack allowed by the built-in membership tests.
pub const MEMBERSHIP_TOL: f64 = 1e-12;

/// Points of `ambient` satisfying a membership predicate, with the ambient
/// geodesics. `projector` should return the nearest member; it is only used
/// by the retraction module and by [`initial_guess`](GeodesicSpace::initial_guess).
pub struct ConvexSubset<S: GeodesicSpace> {
    ambient: S,
    membership: Membership<S::Point>,
    projector: Projector<S::Point>,
    samples: usize,
}

impl<S: GeodesicSpace + fmt::Debug> fmt::Debug for ConvexSubset<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ConvexSubset").field("ambient", &self.ambient).finish_non_exhaustive()
    }
}

impl<S: GeodesicSpace> ConvexSubset<S> {
    pub fn new(
        ambient: S,
        membership: impl Fn(&S::Point) -> bool + Send + Sync + 'static,
        projector: impl Fn(&S::Point) -> S::Point + Send + Sync + 'static,
    ) -> Self {
        ConvexSubset {
            ambient,
            membership: Box::new(membership),
            projector: Box::new(projector),
            samples: 16,
        }
    }

    /// Number of interior points sampled on each geodesic to detect
    /// non-convexity.
    pub fn with_geodesic_samples(mut self, samples: usize) -> Self {
        self.samples = samples;
        self
    }

    pub fn ambient(&self) -> &S {
        &self.ambient
    }

    pub fn project(&self, x: &S::Point) -> S::Point {
        (self.projector)(x)
    }

    /// `d(x, X)` as measured through the projector.
    pub fn distance_to_set(&self, x: &S::Point) -> f64 {
        if (self.membership)(x) {
            0.0
        } else {
            self.ambient.distance(x, &self.project(x))
        }
    }
}

fn euclidean_point(coords: Vec<f64>) -> ModelPoint {
    ModelPoint::from_parts_unchecked(ModelKind::Euclidean, coords)
}

fn check_euclidean(dim: usize, what: &str, len: usize) -> Result<super::ModelSpace> {
    if len != dim {
        return Err(Error::invalid(format!("{what} has dimension {len}, expected {dim}")));
    }
    super::ModelSpace::euclidean(dim)
}

impl ConvexSubset<super::ModelSpace> {
    /// Closed ball in `E^n`.
    pub fn ball(center: Vec<f64>, radius: f64) -> Result<Self> {
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(Error::invalid(format!("ball radius must be positive, got {radius}")));
        }
        let space = check_euclidean(center.len(), "center", center.len())?;
        let c = center.clone();
        let member = move |x: &ModelPoint| {
            let d2: f64 = x.coords().iter().zip(&c).map(|(a, b)| (a - b).powi(2)).sum();
            d2.sqrt() <= radius + MEMBERSHIP_TOL
        };
        let project = move |x: &ModelPoint| {
            let diff: Vec<f64> = x.coords().iter().zip(&center).map(|(a, b)| a - b).collect();
            let d = diff.iter().map(|v| v * v).sum::<f64>().sqrt();
            if d <= radius {
                return x.clone();
            }
            euclidean_point(center.iter().zip(&diff).map(|(c, v)| c + radius * v / d).collect())
        };
        Ok(ConvexSubset::new(space, member, project))
    }

    /// Closed half-space `{x : <normal, x> >= offset}` in `E^n`.
    pub fn half_space(normal: Vec<f64>, offset: f64) -> Result<Self> {
        let len = normal.iter().map(|v| v * v).sum::<f64>().sqrt();
        if !(len > 0.0 && len.is_finite()) {
            return Err(Error::invalid("half-space normal must be non-zero"));
        }
        let space = check_euclidean(normal.len(), "normal", normal.len())?;
        let n: Vec<f64> = normal.iter().map(|v| v / len).collect();
        let b = offset / len;
        let n2 = n.clone();
        let member = move |x: &ModelPoint| {
            x.coords().iter().zip(&n).map(|(a, c)| a * c).sum::<f64>() >= b - MEMBERSHIP_TOL
        };
        let project = move |x: &ModelPoint| {
            let s: f64 = x.coords().iter().zip(&n2).map(|(a, c)| a * c).sum();
            if s >= b {
                return x.clone();
            }
            euclidean_point(x.coords().iter().zip(&n2).map(|(a, c)| a + (b - s) * c).collect())
        };
        Ok(ConvexSubset::new(space, member, project))
    }

    /// Axis-aligned box `[lo, hi]` in `E^n`.
    pub fn axis_box(lo: Vec<f64>, hi: Vec<f64>) -> Result<Self> {
        let space = check_euclidean(lo.len(), "upper corner", hi.len())?;
        if lo.iter().zip(&hi).any(|(a, b)| !(a <= b)) {
            return Err(Error::invalid("box corners must satisfy lo <= hi"));
        }
        let (lo2, hi2) = (lo.clone(), hi.clone());
        let member = move |x: &ModelPoint| {
            x.coords()
                .iter()
                .zip(lo.iter().zip(&hi))
                .all(|(v, (a, b))| *v >= a - MEMBERSHIP_TOL && *v <= b + MEMBERSHIP_TOL)
        };
        let project = move |x: &ModelPoint| {
            euclidean_point(
                x.coords().iter().zip(lo2.iter().zip(&hi2)).map(|(v, (a, b))| v.clamp(*a, *b)).collect(),
            )
        };
        Ok(ConvexSubset::new(space, member, project))
    }
}

impl<S: GeodesicSpace> GeodesicSpace for ConvexSubset<S> {
    type Point = S::Point;

    fn distance(&self, x: &S::Point, y: &S::Point) -> f64 {
        self.ambient.distance(x, y)
    }

    fn geodesic_point(&self, x: &S::Point, y: &S::Point, t: f64) -> Result<S::Point> {
        for p in [x, y] {
            if !(self.membership)(p) {
                return Err(Error::invalid(format!("{p:?} is not in the subset")));
            }
        }
        for i in 1..=self.samples {
            let s = i as f64 / (self.samples + 1) as f64;
            let q = self.ambient.geodesic_point(x, y, s)?;
            if !(self.membership)(&q) {
                return Err(Error::ConvexityViolation(format!(
                    "geodesic from {x:?} to {y:?} leaves the set at parameter {s}"
                )));
            }
        }
        self.ambient.geodesic_point(x, y, t)
    }

    fn curvature(&self) -> Curvature {
        self.ambient.curvature()
    }

    fn validate_point(&self, x: &S::Point) -> Result<()> {
        self.ambient.validate_point(x)?;
        if !(self.membership)(x) {
            return Err(Error::invalid(format!("{x:?} is not in the subset")));
        }
        Ok(())
    }

    fn contains(&self, x: &S::Point) -> bool {
        self.ambient.contains(x) && (self.membership)(x)
    }

    fn initial_guess(&self, points: &[S::Point], weights: &[f64]) -> S::Point {
        let guess = self.ambient.initial_guess(points, weights);
        if (self.membership)(&guess) {
            guess
        } else {
            self.project(&guess)
        }
    }

    fn tangent_chart(&self) -> Option<&dyn TangentChart<S::Point>> {
        self.ambient.tangent_chart()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pt(c: &[f64]) -> ModelPoint {
        ModelPoint::euclidean(c.to_vec()).unwrap()
    }

    #[test]
    fn ball_projects_radially() {
        let disk = ConvexSubset::ball(vec![0.0, 0.0], 1.0).unwrap();
        let p = disk.project(&pt(&[3.0, 4.0]));
        assert!((p.coords()[0] - 0.6).abs() < 1e-15 && (p.coords()[1] - 0.8).abs() < 1e-15);
        assert_eq!(disk.distance_to_set(&pt(&[3.0, 4.0])), 4.0);
        assert_eq!(disk.distance_to_set(&pt(&[0.1, 0.1])), 0.0);
    }

    #[test]
    fn half_space_and_box_projections() {
        let h = ConvexSubset::half_space(vec![2.0, 0.0], 0.0).unwrap();
        assert_eq!(h.project(&pt(&[-1.0, 5.0])).coords(), &[0.0, 5.0]);
        let b = ConvexSubset::axis_box(vec![0.0, 0.0], vec![1.0, 1.0]).unwrap();
        assert_eq!(b.project(&pt(&[2.0, -1.0])).coords(), &[1.0, 0.0]);
        assert!(ConvexSubset::axis_box(vec![1.0], vec![0.0]).is_err());
    }

    #[test]
    fn non_member_endpoints_are_rejected() {
        let disk = ConvexSubset::ball(vec![0.0, 0.0], 1.0).unwrap();
        assert!(disk.geodesic_point(&pt(&[0.0, 0.0]), &pt(&[2.0, 0.0]), 0.5).is_err());
        assert!(disk.validate_point(&pt(&[2.0, 0.0])).is_err());
    }
}
