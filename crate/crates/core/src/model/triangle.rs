use super::{
    distance_unchecked, exp_ambient, geodesic_unchecked, tangent_basis, Curvature, ModelKind,
    ModelPoint, DOMAIN_TOL,
};
use crate::error::{Error, Result};

fn check_side(name: &str, v: f64) -> Result<()> {
    if !v.is_finite() || v < 0.0 {
        return Err(Error::invalid(format!("side {name} must be finite and non-negative, got {v}")));
    }
    Ok(())
}

fn clamp_unit(h: f64, what: &str) -> Result<f64> {
    if !(-DOMAIN_TOL..=1.0 + DOMAIN_TOL).contains(&h) {
        return Err(Error::NumericDomain(format!("{what} = {h} outside [0, 1]")));
    }
    Ok(h.clamp(0.0, 1.0))
}

/// Side `a` opposite the angle `alpha` enclosed by sides `b` and `c` of a
/// triangle in `M^2_k`.
///
/// Evaluated in haversine form, `hav(a) = hav(b - c) + sin b sin c hav(alpha)`
/// and its flat and hyperbolic analogues, which is stable for thin triangles
/// and for curvature close to zero.
pub fn law_of_cosines(k: Curvature, b: f64, c: f64, alpha: f64) -> Result<f64> {
    check_side("b", b)?;
    check_side("c", c)?;
    if !(0.0..=std::f64::consts::PI).contains(&alpha) {
        return Err(Error::invalid(format!("angle {alpha} outside [0, pi]")));
    }
    if k.kind() == ModelKind::Sphere && (b >= k.diameter_cap() || c >= k.diameter_cap()) {
        return Err(Error::invalid(format!(
            "sides {b}, {c} must be below the diameter bound {}",
            k.diameter_cap()
        )));
    }
    let half = (0.5 * alpha).sin().powi(2);
    let s = k.scale();
    let (bb, cc) = (s * b, s * c);
    let a = match k.kind() {
        ModelKind::Euclidean => ((b - c).powi(2) + 4.0 * b * c * half).sqrt(),
        ModelKind::Sphere => {
            let h = (0.5 * (bb - cc)).sin().powi(2) + bb.sin() * cc.sin() * half;
            2.0 * clamp_unit(h, "haversine")?.sqrt().asin() / s
        }
        ModelKind::Hyperboloid => {
            let h = (0.5 * (bb - cc)).sinh().powi(2) + bb.sinh() * cc.sinh() * half;
            2.0 * h.max(0.0).sqrt().asinh() / s
        }
    };
    Ok(a)
}

/// Angle opposite side `a`, between sides `b` and `c`.
fn angle_from_sides(k: Curvature, a: f64, b: f64, c: f64) -> Result<f64> {
    if b == 0.0 || c == 0.0 {
        return Ok(0.0);
    }
    let s = k.scale();
    let (aa, bb, cc) = (s * a, s * b, s * c);
    let h = match k.kind() {
        ModelKind::Euclidean => (a * a - (b - c).powi(2)) / (4.0 * b * c),
        ModelKind::Sphere => {
            ((0.5 * aa).sin().powi(2) - (0.5 * (bb - cc)).sin().powi(2)) / (bb.sin() * cc.sin())
        }
        ModelKind::Hyperboloid => {
            ((0.5 * aa).sinh().powi(2) - (0.5 * (bb - cc)).sinh().powi(2))
                / (bb.sinh() * cc.sinh())
        }
    };
    Ok(2.0 * clamp_unit(h, "half-angle haversine")?.sqrt().asin())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum TriangleSide {
    XY,
    YZ,
    XZ,
}

/// Triangle in `M^2_k` with vertices `[x, y, z]` and sides
/// `a = d(y, z)`, `b = d(x, z)`, `c = d(x, y)`.
#[derive(Clone, Debug, PartialEq)]
pub struct ComparisonTriangle {
    pub k: Curvature,
    pub vertices: [ModelPoint; 3],
    pub sides: (f64, f64, f64),
}

impl ComparisonTriangle {
    pub fn side_length(&self, side: TriangleSide) -> f64 {
        match side {
            TriangleSide::XY => self.sides.2,
            TriangleSide::YZ => self.sides.0,
            TriangleSide::XZ => self.sides.1,
        }
    }

    fn side_vertices(&self, side: TriangleSide) -> (&ModelPoint, &ModelPoint) {
        let [x, y, z] = &self.vertices;
        match side {
            TriangleSide::XY => (x, y),
            TriangleSide::YZ => (y, z),
            TriangleSide::XZ => (x, z),
        }
    }

    /// Distance between comparison points at arc lengths `s1` on `side1` and
    /// `s2` on `side2`.
    pub fn comparison_distance(
        &self,
        side1: TriangleSide,
        s1: f64,
        side2: TriangleSide,
        s2: f64,
    ) -> Result<f64> {
        let p = comparison_point(self, side1, s1)?;
        let q = comparison_point(self, side2, s2)?;
        Ok(distance_unchecked(self.k, &p, &q))
    }
}

/// Canonically placed triangle in `M^2_k` with side lengths `(a, b, c)`:
/// `x` at the base point, `y` at distance `c` along the first tangent axis and
/// `z` in the half plane of the second tangent axis.
pub fn comparison_triangle(k: Curvature, a: f64, b: f64, c: f64) -> Result<ComparisonTriangle> {
    for (name, v) in [("a", a), ("b", b), ("c", c)] {
        check_side(name, v).map_err(|e| Error::InfeasibleTriangle(e.to_string()))?;
    }
    let perimeter = a + b + c;
    let slack = 1e-12 * perimeter.max(1.0);
    if a > b + c + slack || b > a + c + slack || c > a + b + slack {
        return Err(Error::InfeasibleTriangle(format!(
            "sides ({a}, {b}, {c}) violate the triangle inequality"
        )));
    }
    if perimeter >= 2.0 * k.diameter_cap() {
        return Err(Error::InfeasibleTriangle(format!(
            "perimeter {perimeter} is not below 2 D_k = {}",
            2.0 * k.diameter_cap()
        )));
    }
    let alpha = angle_from_sides(k, a, b, c)?;
    let kind = k.kind();
    let base = ModelPoint::base(kind, 2);
    let basis = tangent_basis(kind, base.coords());
    let s = k.scale();
    let along = |len: f64, angle: f64| -> ModelPoint {
        let (ca, sa) = (angle.cos(), angle.sin());
        let w: Vec<f64> = basis[0]
            .iter()
            .zip(&basis[1])
            .map(|(e1, e2)| s * len * (ca * e1 + sa * e2))
            .collect();
        ModelPoint::from_parts_unchecked(kind, exp_ambient(kind, base.coords(), &w)).renormalized()
    };
    let y = along(c, 0.0);
    let z = along(b, alpha);
    Ok(ComparisonTriangle { k, vertices: [base, y, z], sides: (a, b, c) })
}

/// Point on `side` at arc length `s` from the side's first vertex.
pub fn comparison_point(tri: &ComparisonTriangle, side: TriangleSide, s: f64) -> Result<ModelPoint> {
    let len = tri.side_length(side);
    let slack = 1e-12 * len.max(1.0);
    if !s.is_finite() || s < -slack || s > len + slack {
        return Err(Error::invalid(format!("arc length {s} outside [0, {len}]")));
    }
    let (p, q) = tri.side_vertices(side);
    if len == 0.0 {
        return Ok(p.clone());
    }
    Ok(geodesic_unchecked(p, q, (s / len).clamp(0.0, 1.0)))
}
