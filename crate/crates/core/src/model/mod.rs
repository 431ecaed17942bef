//! Closed-form geometry of the constant-curvature model spaces `M^n_k`.
//!
//! Points of the sphere and of hyperbolic space are stored in their unit
//! embeddings (the unit sphere in `R^{n+1}` and the upper sheet of the
//! hyperboloid `x|x = -1` for the Lorentzian form). The curvature only rescales
//! distances: `d_k = d_unit / sqrt(|k|)`.

mod chart;
mod mk;
mod triangle;

pub use chart::{exp_ambient, tangent_basis, unit_direction};
pub use mk::{m_k_constant, MkGrid};
pub use triangle::{
    comparison_point, comparison_triangle, law_of_cosines, ComparisonTriangle, TriangleSide,
};

use serde::{Serialize, Serializer};

use crate::error::{Error, Result};

/// Tolerance for the embedding invariants of sphere and hyperboloid points.
pub const EMBEDDING_TOL: f64 = 1e-9;
/// Slack allowed on inverse trig/hyperbolic arguments before rejecting them.
pub const DOMAIN_TOL: f64 = 1e-12;

/// Curvature `k` together with the model diameter `D_k`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Curvature {
    k: f64,
    d_cap: f64,
}

impl Curvature {
    pub fn new(k: f64) -> Result<Self> {
        if !k.is_finite() {
            return Err(Error::invalid(format!("curvature must be finite, got {k}")));
        }
        let d_cap = if k > 0.0 {
            std::f64::consts::PI / k.sqrt()
        } else {
            f64::INFINITY
        };
        Ok(Curvature { k, d_cap })
    }

    pub fn flat() -> Self {
        Curvature { k: 0.0, d_cap: f64::INFINITY }
    }

    pub fn k(&self) -> f64 {
        self.k
    }

    /// `D_k`: `pi / sqrt(k)` for positive curvature, infinite otherwise.
    pub fn diameter_cap(&self) -> f64 {
        self.d_cap
    }

    pub fn kind(&self) -> ModelKind {
        if self.k > 0.0 {
            ModelKind::Sphere
        } else if self.k < 0.0 {
            ModelKind::Hyperboloid
        } else {
            ModelKind::Euclidean
        }
    }

    /// `sqrt(|k|)`, or 1 in the flat case. Unit-model lengths divided by this
    /// give lengths in `M_k`.
    pub(crate) fn scale(&self) -> f64 {
        if self.k == 0.0 {
            1.0
        } else {
            self.k.abs().sqrt()
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ModelKind {
    Euclidean,
    Sphere,
    Hyperboloid,
}

/// A point of `E^n`, `S^n` or `H^n` in ambient coordinates.
#[derive(Clone, Debug, PartialEq)]
pub struct ModelPoint {
    kind: ModelKind,
    coords: Vec<f64>,
}

impl ModelPoint {
    pub fn euclidean(coords: Vec<f64>) -> Result<Self> {
        let p = ModelPoint { kind: ModelKind::Euclidean, coords };
        p.validate()?;
        Ok(p)
    }

    /// A point of the unit sphere; `coords` must have unit norm within 1e-9.
    pub fn sphere(coords: Vec<f64>) -> Result<Self> {
        let p = ModelPoint { kind: ModelKind::Sphere, coords };
        p.validate()?;
        Ok(p)
    }

    /// Point of the upper hyperboloid sheet, last coordinate is the time-like one.
    pub fn hyperboloid(coords: Vec<f64>) -> Result<Self> {
        let p = ModelPoint { kind: ModelKind::Hyperboloid, coords };
        p.validate()?;
        Ok(p)
    }

    /// Lifts spatial coordinates `x` to `(x, sqrt(1 + |x|^2))` on the hyperboloid.
    pub fn hyperboloid_lift(spatial: &[f64]) -> Self {
        let mut coords = spatial.to_vec();
        coords.push((1.0 + dot(spatial, spatial)).sqrt());
        ModelPoint { kind: ModelKind::Hyperboloid, coords }
    }

    /// Radially projects a non-zero vector onto the unit sphere.
    pub fn sphere_normalized(coords: Vec<f64>) -> Result<Self> {
        let n = norm(&coords);
        if !(n > 0.0) || !n.is_finite() {
            return Err(Error::invalid("cannot normalize a zero vector onto the sphere"));
        }
        Ok(ModelPoint {
            kind: ModelKind::Sphere,
            coords: coords.into_iter().map(|c| c / n).collect(),
        })
    }

    /// The canonical base point: origin, `e_1`, or `(0, .., 0, 1)`.
    pub fn base(kind: ModelKind, dim: usize) -> Self {
        let coords = match kind {
            ModelKind::Euclidean => vec![0.0; dim],
            ModelKind::Sphere => {
                let mut c = vec![0.0; dim + 1];
                c[0] = 1.0;
                c
            }
            ModelKind::Hyperboloid => {
                let mut c = vec![0.0; dim + 1];
                c[dim] = 1.0;
                c
            }
        };
        ModelPoint { kind, coords }
    }

    pub(crate) fn from_parts_unchecked(kind: ModelKind, coords: Vec<f64>) -> Self {
        ModelPoint { kind, coords }
    }

    pub fn kind(&self) -> ModelKind {
        self.kind
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn into_coords(self) -> Vec<f64> {
        self.coords
    }

    /// Intrinsic dimension `n`.
    pub fn dim(&self) -> usize {
        match self.kind {
            ModelKind::Euclidean => self.coords.len(),
            _ => self.coords.len().saturating_sub(1),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.coords.iter().any(|c| !c.is_finite()) {
            return Err(Error::invalid("point has non-finite coordinates"));
        }
        match self.kind {
            ModelKind::Euclidean => {
                if self.coords.is_empty() {
                    return Err(Error::invalid("euclidean point needs at least one coordinate"));
                }
            }
            ModelKind::Sphere => {
                if self.coords.len() < 2 {
                    return Err(Error::invalid("sphere point needs at least two coordinates"));
                }
                let n = norm(&self.coords);
                if (n - 1.0).abs() > EMBEDDING_TOL {
                    return Err(Error::invalid(format!("sphere point has norm {n}, expected 1")));
                }
            }
            ModelKind::Hyperboloid => {
                if self.coords.len() < 2 {
                    return Err(Error::invalid("hyperboloid point needs at least two coordinates"));
                }
                let q = minkowski(&self.coords, &self.coords);
                if (q + 1.0).abs() > EMBEDDING_TOL {
                    return Err(Error::invalid(format!(
                        "hyperboloid point has x|x = {q}, expected -1"
                    )));
                }
                if *self.coords.last().unwrap() <= 0.0 {
                    return Err(Error::invalid("hyperboloid point is not on the upper sheet"));
                }
            }
        }
        Ok(())
    }

    /// Re-imposes the embedding constraint after floating-point drift.
    pub(crate) fn renormalized(mut self) -> Self {
        match self.kind {
            ModelKind::Euclidean => {}
            ModelKind::Sphere => {
                let n = norm(&self.coords);
                self.coords.iter_mut().for_each(|c| *c /= n);
            }
            ModelKind::Hyperboloid => {
                let q = (-minkowski(&self.coords, &self.coords)).sqrt();
                self.coords.iter_mut().for_each(|c| *c /= q);
            }
        }
        self
    }
}

impl Serialize for ModelPoint {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        self.coords.serialize(serializer)
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Lorentzian form `x|_H y = sum_{i<n} x_i y_i - x_n y_n`.
pub fn minkowski(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len();
    dot(&a[..n - 1], &b[..n - 1]) - a[n - 1] * b[n - 1]
}

/// Inner product of the ambient space the model of `kind` is embedded in.
pub(crate) fn ambient_inner(kind: ModelKind, a: &[f64], b: &[f64]) -> f64 {
    match kind {
        ModelKind::Hyperboloid => minkowski(a, b),
        _ => dot(a, b),
    }
}

fn check_compatible(k: Curvature, x: &ModelPoint, y: &ModelPoint) -> Result<()> {
    if x.kind != y.kind {
        return Err(Error::invalid(format!(
            "points of different kinds: {:?} and {:?}",
            x.kind, y.kind
        )));
    }
    if x.coords.len() != y.coords.len() {
        return Err(Error::invalid(format!(
            "points of different dimensions: {} and {}",
            x.dim(),
            y.dim()
        )));
    }
    if x.kind != k.kind() {
        return Err(Error::invalid(format!(
            "{:?} point does not belong to a model space of curvature {}",
            x.kind,
            k.k()
        )));
    }
    Ok(())
}

/// Distance in the unit model (angle on the sphere, `k = -1` distance on the
/// hyperboloid). Uses chord formulas, which stay accurate for nearby points.
pub(crate) fn unit_distance(kind: ModelKind, x: &[f64], y: &[f64]) -> f64 {
    match kind {
        ModelKind::Euclidean => {
            x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt()
        }
        ModelKind::Sphere => {
            let chord = x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
            if chord <= 1.9 {
                2.0 * (0.5 * chord).min(1.0).asin()
            } else {
                let anti = x.iter().zip(y).map(|(a, b)| (a + b) * (a + b)).sum::<f64>().sqrt();
                std::f64::consts::PI - 2.0 * (0.5 * anti).min(1.0).asin()
            }
        }
        ModelKind::Hyperboloid => {
            let z = -minkowski(x, y);
            if z > 1.5 {
                z.acosh()
            } else {
                let diff: Vec<f64> = x.iter().zip(y).map(|(a, b)| a - b).collect();
                let q = minkowski(&diff, &diff).max(0.0);
                2.0 * (0.5 * q.sqrt()).asinh()
            }
        }
    }
}

pub(crate) fn distance_unchecked(k: Curvature, x: &ModelPoint, y: &ModelPoint) -> f64 {
    unit_distance(x.kind, &x.coords, &y.coords) / k.scale()
}

/// Metric of `M^n_k`.
pub fn model_distance(k: Curvature, x: &ModelPoint, y: &ModelPoint) -> Result<f64> {
    check_compatible(k, x, y)?;
    if x.kind == ModelKind::Hyperboloid {
        // The chord branch hides gross violations of the acosh domain; check it.
        let z = -minkowski(&x.coords, &y.coords);
        if z < 1.0 - DOMAIN_TOL {
            return Err(Error::NumericDomain(format!("arccosh argument {z} below 1")));
        }
    }
    Ok(distance_unchecked(k, x, y))
}

/// Point at parameter `t` of the unique geodesic from `x` to `y`, so that
/// `d(x, γ(t)) = t d(x, y)`.
pub fn geodesic_point(k: Curvature, x: &ModelPoint, y: &ModelPoint, t: f64) -> Result<ModelPoint> {
    check_compatible(k, x, y)?;
    if !(0.0..=1.0).contains(&t) {
        return Err(Error::invalid(format!("geodesic parameter {t} outside [0, 1]")));
    }
    if k.kind() == ModelKind::Sphere {
        let d = distance_unchecked(k, x, y);
        if d >= k.diameter_cap() * (1.0 - 1e-12) {
            return Err(Error::NoUniqueGeodesic { distance: d, cap: k.diameter_cap() });
        }
    }
    Ok(geodesic_unchecked(x, y, t))
}

pub(crate) fn geodesic_unchecked(x: &ModelPoint, y: &ModelPoint, t: f64) -> ModelPoint {
    if t == 0.0 {
        return x.clone();
    }
    if t == 1.0 {
        return y.clone();
    }
    let kind = x.kind;
    let coords = match kind {
        ModelKind::Euclidean => {
            x.coords.iter().zip(&y.coords).map(|(a, b)| a + t * (b - a)).collect()
        }
        ModelKind::Sphere | ModelKind::Hyperboloid => {
            let theta = unit_distance(kind, &x.coords, &y.coords);
            if theta < 1e-300 {
                return x.clone();
            }
            let (wa, wb) = if kind == ModelKind::Sphere {
                let s = theta.sin();
                (((1.0 - t) * theta).sin() / s, (t * theta).sin() / s)
            } else {
                let s = theta.sinh();
                (((1.0 - t) * theta).sinh() / s, (t * theta).sinh() / s)
            };
            x.coords.iter().zip(&y.coords).map(|(a, b)| wa * a + wb * b).collect()
        }
    };
    ModelPoint { kind, coords }.renormalized()
}
