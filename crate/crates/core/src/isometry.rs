//! Isometries of model spaces and metric trees.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::model::{ModelKind, ModelPoint};
use crate::space::{GeodesicSpace, ModelSpace, RTree, TreeAutomorphism};

/// Entry-wise tolerance on the defining matrix identities.
const MATRIX_TOL: f64 = 1e-9;

pub trait Isometry<S: GeodesicSpace>: Sync {
    fn apply(&self, space: &S, p: &S::Point) -> S::Point;
}

/// `x -> M x + t` on the ambient coordinates of a model space: a rigid
/// motion of `E^n`, an orthogonal map of a sphere, or a Lorentz
/// transformation of the hyperboloid (where `t = 0`).
#[derive(Clone, Debug, PartialEq)]
pub struct LinearIsometry {
    kind: ModelKind,
    matrix: DMatrix<f64>,
    translation: DVector<f64>,
}

fn check_square(m: &DMatrix<f64>, size: usize) -> Result<()> {
    if m.nrows() != size || m.ncols() != size {
        return Err(Error::invalid(format!(
            "expected a {size}x{size} matrix, got {}x{}",
            m.nrows(),
            m.ncols()
        )));
    }
    Ok(())
}

fn check_identity(m: &DMatrix<f64>, target: &DMatrix<f64>, what: &str) -> Result<()> {
    let err = (m - target).abs().max();
    if !(err <= MATRIX_TOL) {
        return Err(Error::invalid(format!("matrix is not {what} (deviation {err:e})")));
    }
    Ok(())
}

fn lorentz_form(size: usize) -> DMatrix<f64> {
    let mut j = DMatrix::identity(size, size);
    j[(size - 1, size - 1)] = -1.0;
    j
}

impl LinearIsometry {
    pub fn euclidean_rigid(matrix: DMatrix<f64>, translation: Vec<f64>) -> Result<Self> {
        let n = translation.len();
        check_square(&matrix, n)?;
        check_identity(&(matrix.transpose() * &matrix), &DMatrix::identity(n, n), "orthogonal")?;
        Ok(LinearIsometry { kind: ModelKind::Euclidean, matrix, translation: DVector::from_vec(translation) })
    }

    /// Orthogonal map of `R^(n+1)` acting on `S^n`.
    pub fn sphere_orthogonal(matrix: DMatrix<f64>) -> Result<Self> {
        let m = matrix.nrows();
        check_square(&matrix, m)?;
        check_identity(&(matrix.transpose() * &matrix), &DMatrix::identity(m, m), "orthogonal")?;
        Ok(LinearIsometry { kind: ModelKind::Sphere, matrix, translation: DVector::zeros(m) })
    }

    /// Orthochronous Lorentz map of `R^(n,1)` acting on the hyperboloid.
    pub fn lorentz(matrix: DMatrix<f64>) -> Result<Self> {
        let m = matrix.nrows();
        check_square(&matrix, m)?;
        let j = lorentz_form(m);
        let scale = matrix.abs().max().max(1.0).powi(2);
        let err = (matrix.transpose() * &j * &matrix - &j).abs().max();
        if !(err <= MATRIX_TOL * scale) {
            return Err(Error::invalid(format!("matrix does not preserve the Lorentz form (deviation {err:e})")));
        }
        if !(matrix[(m - 1, m - 1)] > 0.0) {
            return Err(Error::invalid("Lorentz map swaps the sheets of the hyperboloid"));
        }
        Ok(LinearIsometry { kind: ModelKind::Hyperboloid, matrix, translation: DVector::zeros(m) })
    }

    /// Rotation by `theta` in the `(i, j)` coordinate plane of `R^size`.
    pub fn plane_rotation(size: usize, i: usize, j: usize, theta: f64) -> DMatrix<f64> {
        let mut m = DMatrix::identity(size, size);
        let (s, c) = theta.sin_cos();
        m[(i, i)] = c;
        m[(j, j)] = c;
        m[(i, j)] = -s;
        m[(j, i)] = s;
        m
    }

    /// Boost with the given rapidity along spatial axis `axis` of `R^(n,1)`,
    /// `size = n + 1`.
    pub fn boost(size: usize, axis: usize, rapidity: f64) -> DMatrix<f64> {
        let mut m = DMatrix::identity(size, size);
        let t = size - 1;
        let (s, c) = (rapidity.sinh(), rapidity.cosh());
        m[(axis, axis)] = c;
        m[(t, t)] = c;
        m[(axis, t)] = s;
        m[(t, axis)] = s;
        m
    }

    /// Haar-random orthogonal matrix (QR of a Gaussian matrix with the sign
    /// convention that makes `R` have a positive diagonal).
    pub fn random_orthogonal(rng: &mut impl Rng, size: usize) -> DMatrix<f64> {
        let g = DMatrix::from_fn(size, size, |_, _| rng.sample::<f64, _>(StandardNormal));
        let qr = g.qr();
        let (mut q, r) = (qr.q(), qr.r());
        for j in 0..size {
            if r[(j, j)] < 0.0 {
                q.column_mut(j).neg_mut();
            }
        }
        q
    }

    /// A random isometry of `space`: rotation plus translation in `[-1, 1]^n`
    /// for `E^n`, a random orthogonal map for spheres, a spatial rotation
    /// followed by a boost of rapidity at most 1/2 for hyperbolic space.
    pub fn random_for(space: &ModelSpace, rng: &mut impl Rng) -> Self {
        let n = space.dim();
        match space.kind() {
            ModelKind::Euclidean => {
                let t = (0..n).map(|_| rng.gen_range(-1.0..=1.0)).collect();
                Self::euclidean_rigid(Self::random_orthogonal(rng, n), t)
            }
            ModelKind::Sphere => Self::sphere_orthogonal(Self::random_orthogonal(rng, n + 1)),
            ModelKind::Hyperboloid => {
                let mut rot = DMatrix::identity(n + 1, n + 1);
                rot.view_mut((0, 0), (n, n)).copy_from(&Self::random_orthogonal(rng, n));
                let boost = Self::boost(n + 1, rng.gen_range(0..n), rng.gen_range(-0.5..=0.5));
                Self::lorentz(boost * rot)
            }
        }
        .expect("generated matrices satisfy their identities")
    }

    pub fn kind(&self) -> ModelKind {
        self.kind
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn translation(&self) -> &DVector<f64> {
        &self.translation
    }

    /// `self` followed by `other`.
    pub fn then(&self, other: &LinearIsometry) -> Result<Self> {
        if self.kind != other.kind || self.matrix.nrows() != other.matrix.nrows() {
            return Err(Error::invalid("cannot compose isometries of different spaces"));
        }
        Ok(LinearIsometry {
            kind: self.kind,
            matrix: &other.matrix * &self.matrix,
            translation: &other.matrix * &self.translation + &other.translation,
        })
    }

    pub fn apply_point(&self, p: &ModelPoint) -> ModelPoint {
        let x = DVector::from_column_slice(p.coords());
        let y = &self.matrix * x + &self.translation;
        ModelPoint::from_parts_unchecked(self.kind, y.as_slice().to_vec()).renormalized()
    }
}

impl Isometry<ModelSpace> for LinearIsometry {
    fn apply(&self, _space: &ModelSpace, p: &ModelPoint) -> ModelPoint {
        self.apply_point(p)
    }
}

impl Isometry<RTree> for TreeAutomorphism {
    fn apply(&self, space: &RTree, p: &crate::space::TreePoint) -> crate::space::TreePoint {
        TreeAutomorphism::apply(self, space, p)
    }
}

/// Largest `|d(g x, g y) - d(x, y)|` over pairs drawn from `points`.
pub fn distortion<S: GeodesicSpace, G: Isometry<S>>(space: &S, g: &G, points: &[S::Point]) -> f64 {
    let images: Vec<S::Point> = points.iter().map(|p| g.apply(space, p)).collect();
    let mut worst = 0.0f64;
    for i in 0..points.len() {
        for j in 0..i {
            worst = worst.max((space.distance(&images[i], &images[j]) - space.distance(&points[i], &points[j])).abs());
        }
    }
    worst
}
