use super::{GeodesicSpace, TangentChart};
use crate::error::{Error, Result};
use crate::model::{
    ambient_inner, distance_unchecked, exp_ambient, geodesic_point,
    minkowski, tangent_basis, unit_direction, Curvature, ModelKind, ModelPoint,
};

/// The model space `M^n_k` as a [`GeodesicSpace`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ModelSpace {
    k: Curvature,
    dim: usize,
}

impl ModelSpace {
    pub fn new(k: Curvature, dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::invalid("model space dimension must be positive"));
        }
        Ok(ModelSpace { k, dim })
    }

    pub fn euclidean(dim: usize) -> Result<Self> {
        Self::new(Curvature::flat(), dim)
    }

    pub fn sphere(k: f64, dim: usize) -> Result<Self> {
        if !(k > 0.0) {
            return Err(Error::invalid(format!("sphere needs k > 0, got {k}")));
        }
        Self::new(Curvature::new(k)?, dim)
    }

    pub fn hyperbolic(k: f64, dim: usize) -> Result<Self> {
        if !(k < 0.0) {
            return Err(Error::invalid(format!("hyperbolic space needs k < 0, got {k}")));
        }
        Self::new(Curvature::new(k)?, dim)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn kind(&self) -> ModelKind {
        self.k.kind()
    }

    /// Builds and validates a point from ambient coordinates.
    pub fn point(&self, coords: Vec<f64>) -> Result<ModelPoint> {
        let p = match self.kind() {
            ModelKind::Euclidean => ModelPoint::euclidean(coords)?,
            ModelKind::Sphere => ModelPoint::sphere(coords)?,
            ModelKind::Hyperboloid => ModelPoint::hyperboloid(coords)?,
        };
        self.validate_point(&p)?;
        Ok(p)
    }

    pub fn base_point(&self) -> ModelPoint {
        ModelPoint::base(self.kind(), self.dim)
    }
}

impl GeodesicSpace for ModelSpace {
    type Point = ModelPoint;

    fn distance(&self, x: &ModelPoint, y: &ModelPoint) -> f64 {
        distance_unchecked(self.k, x, y)
    }

    fn geodesic_point(&self, x: &ModelPoint, y: &ModelPoint, t: f64) -> Result<ModelPoint> {
        geodesic_point(self.k, x, y, t)
    }

    fn curvature(&self) -> Curvature {
        self.k
    }

    fn validate_point(&self, x: &ModelPoint) -> Result<()> {
        x.validate()?;
        if x.kind() != self.kind() || x.dim() != self.dim {
            return Err(Error::invalid(format!(
                "{:?} point of dimension {} does not belong to {:?} space of dimension {}",
                x.kind(),
                x.dim(),
                self.kind(),
                self.dim
            )));
        }
        Ok(())
    }

    fn contains(&self, x: &ModelPoint) -> bool {
        self.validate_point(x).is_ok()
    }

    /// Weighted mean, pushed back onto the sphere or hyperboloid.
    fn initial_guess(&self, points: &[ModelPoint], weights: &[f64]) -> ModelPoint {
        let total: f64 = weights.iter().sum();
        let m = points[0].coords().len();
        let mut mean = vec![0.0; m];
        for (p, w) in points.iter().zip(weights) {
            mean.iter_mut().zip(p.coords()).for_each(|(a, c)| *a += w / total * c);
        }
        let kind = self.kind();
        let fallback = || {
            let i = (0..weights.len())
                .max_by(|&a, &b| weights[a].total_cmp(&weights[b]).then(b.cmp(&a)))
                .unwrap_or(0);
            points[i].clone()
        };
        match kind {
            ModelKind::Euclidean => ModelPoint::from_parts_unchecked(kind, mean),
            ModelKind::Sphere => ModelPoint::sphere_normalized(mean).unwrap_or_else(|_| fallback()),
            ModelKind::Hyperboloid => {
                let q = -minkowski(&mean, &mean);
                if q > 0.0 && mean[m - 1] > 0.0 {
                    ModelPoint::from_parts_unchecked(kind, mean).renormalized()
                } else {
                    fallback()
                }
            }
        }
    }

    fn tangent_chart(&self) -> Option<&dyn TangentChart<ModelPoint>> {
        Some(self)
    }
}

impl TangentChart<ModelPoint> for ModelSpace {
    fn chart_dim(&self) -> usize {
        self.dim
    }

    fn frame(&self, base: &ModelPoint) -> Vec<Vec<f64>> {
        tangent_basis(self.kind(), base.coords())
    }

    fn chart_exp(&self, base: &ModelPoint, frame: &[Vec<f64>], v: &[f64]) -> ModelPoint {
        let s = self.k.scale();
        let mut w = vec![0.0; base.coords().len()];
        for (e, c) in frame.iter().zip(v) {
            w.iter_mut().zip(e).for_each(|(a, b)| *a += s * c * b);
        }
        ModelPoint::from_parts_unchecked(self.kind(), exp_ambient(self.kind(), base.coords(), &w))
            .renormalized()
    }

    fn direction_components(
        &self,
        x: &ModelPoint,
        p: &ModelPoint,
        frame: &[Vec<f64>],
    ) -> Option<Vec<f64>> {
        let kind = self.kind();
        let u = unit_direction(kind, x.coords(), p.coords())?;
        Some(frame.iter().map(|e| ambient_inner(kind, &u, e)).collect())
    }
}
