use super::{ambient_inner, dot, minkowski, ModelKind};

/// Projects an ambient vector onto the tangent space at `base`.
fn project_tangent(kind: ModelKind, base: &[f64], v: &[f64]) -> Vec<f64> {
    match kind {
        ModelKind::Euclidean => v.to_vec(),
        ModelKind::Sphere => {
            let c = dot(v, base);
            v.iter().zip(base).map(|(a, b)| a - c * b).collect()
        }
        ModelKind::Hyperboloid => {
            let c = minkowski(v, base);
            v.iter().zip(base).map(|(a, b)| a + c * b).collect()
        }
    }
}

/// Orthonormal basis (for the ambient form) of the tangent space at `base`,
/// obtained by Gram-Schmidt on the projected coordinate axes, in axis order.
pub fn tangent_basis(kind: ModelKind, base: &[f64]) -> Vec<Vec<f64>> {
    let ambient = base.len();
    let dim = match kind {
        ModelKind::Euclidean => ambient,
        _ => ambient - 1,
    };
    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(dim);
    for axis in 0..ambient {
        if basis.len() == dim {
            break;
        }
        let mut e = vec![0.0; ambient];
        e[axis] = 1.0;
        let mut v = project_tangent(kind, base, &e);
        for b in &basis {
            let c = ambient_inner(kind, &v, b);
            v.iter_mut().zip(b).for_each(|(x, y)| *x -= c * y);
        }
        let n2 = ambient_inner(kind, &v, &v);
        if n2 > 1e-6 {
            let n = n2.sqrt();
            v.iter_mut().for_each(|x| *x /= n);
            basis.push(v);
        }
    }
    basis
}

/// Exponential map in the unit model: follows the tangent vector `w` at
/// `base` for its full (ambient-form) length.
pub fn exp_ambient(kind: ModelKind, base: &[f64], w: &[f64]) -> Vec<f64> {
    match kind {
        ModelKind::Euclidean => base.iter().zip(w).map(|(a, b)| a + b).collect(),
        ModelKind::Sphere | ModelKind::Hyperboloid => {
            let len = ambient_inner(kind, w, w).max(0.0).sqrt();
            if len < 1e-300 {
                return base.to_vec();
            }
            let (c, s) = if kind == ModelKind::Sphere {
                (len.cos(), len.sin() / len)
            } else {
                (len.cosh(), len.sinh() / len)
            };
            base.iter().zip(w).map(|(a, b)| c * a + s * b).collect()
        }
    }
}

/// Unit tangent vector at `from` pointing along the geodesic to `to`, or
/// `None` when the points coincide.
pub fn unit_direction(kind: ModelKind, from: &[f64], to: &[f64]) -> Option<Vec<f64>> {
    let v = match kind {
        ModelKind::Euclidean => to.iter().zip(from).map(|(a, b)| a - b).collect(),
        _ => project_tangent(kind, from, to),
    };
    let n = ambient_inner(kind, &v, &v).max(0.0).sqrt();
    if n < 1e-300 || !n.is_finite() {
        return None;
    }
    Some(v.into_iter().map(|x| x / n).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{unit_distance, ModelPoint};

    #[test]
    fn sphere_basis_at_e1_is_e2_e3() {
        let b = tangent_basis(ModelKind::Sphere, &[1.0, 0.0, 0.0]);
        assert_eq!(b, vec![vec![0.0, 1.0, 0.0], vec![0.0, 0.0, 1.0]]);
    }

    #[test]
    fn hyperboloid_basis_is_orthonormal() {
        let p = ModelPoint::hyperboloid_lift(&[0.7, -0.4]);
        let b = tangent_basis(ModelKind::Hyperboloid, p.coords());
        assert_eq!(b.len(), 2);
        for (i, u) in b.iter().enumerate() {
            assert!(minkowski(u, p.coords()).abs() < 1e-12);
            for (j, v) in b.iter().enumerate() {
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((minkowski(u, v) - want).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn exp_moves_by_tangent_length() {
        for kind in [ModelKind::Sphere, ModelKind::Hyperboloid] {
            let base = ModelPoint::base(kind, 2);
            let basis = tangent_basis(kind, base.coords());
            let w: Vec<f64> = basis[0].iter().zip(&basis[1]).map(|(a, b)| 0.3 * a - 0.4 * b).collect();
            let q = exp_ambient(kind, base.coords(), &w);
            assert!((unit_distance(kind, base.coords(), &q) - 0.5).abs() < 1e-14);
        }
    }
}
