use super::{law_of_cosines, Curvature};
use crate::error::{Error, Result};

/// Resolution of the `(rho, theta)` search behind [`m_k_constant`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MkGrid {
    pub n_rho: usize,
    pub n_theta: usize,
    /// Spacing reduction of the single refinement pass around the coarse minimum.
    pub refine: f64,
}

impl Default for MkGrid {
    fn default() -> Self {
        MkGrid { n_rho: 256, n_theta: 256, refine: 10.0 }
    }
}

/// Minimum over the closed ball `W = B(x, r)` and the sphere `Z` of radius
/// `s` around `x` of `d(w, z) - d(w, pi(z))`, where `pi` projects `z`
/// radially onto the sphere of radius `r`.
///
/// By rotational symmetry `z` is fixed and `w` is swept over polar
/// coordinates `(rho, theta)`, `theta` measured from the direction of `z`.
pub fn m_k_constant(k: Curvature, r: f64, s: f64, grid: MkGrid) -> Result<f64> {
    if !(r > 0.0 && r < s && s.is_finite()) {
        return Err(Error::invalid(format!("m_k needs 0 < r < s, got r = {r}, s = {s}")));
    }
    if s >= 0.5 * k.diameter_cap() {
        return Err(Error::invalid(format!(
            "m_k needs s < D_k / 2 = {}, got {s}",
            0.5 * k.diameter_cap()
        )));
    }
    if grid.n_rho < 2 || grid.n_theta < 2 || !(grid.refine >= 1.0) {
        return Err(Error::invalid("m_k grid needs at least 2x2 nodes and refine >= 1"));
    }
    let pi = std::f64::consts::PI;
    let f = |rho: f64, theta: f64| -> Result<f64> {
        Ok(law_of_cosines(k, rho, s, theta)? - law_of_cosines(k, rho, r, theta)?)
    };
    let sweep = |rho0: f64, rho1: f64, th0: f64, th1: f64| -> Result<(f64, f64, f64)> {
        let mut best = (f64::INFINITY, rho0, th0);
        for i in 0..grid.n_rho {
            let rho = rho0 + (rho1 - rho0) * i as f64 / (grid.n_rho - 1) as f64;
            for j in 0..grid.n_theta {
                let th = th0 + (th1 - th0) * j as f64 / (grid.n_theta - 1) as f64;
                let v = f(rho, th)?;
                if v < best.0 {
                    best = (v, rho, th);
                }
            }
        }
        Ok(best)
    };
    let (coarse, rho_c, th_c) = sweep(0.0, r, 0.0, pi)?;
    let h_rho = r / (grid.n_rho - 1) as f64;
    let h_th = pi / (grid.n_theta - 1) as f64;
    let half_rho = 0.5 * (grid.n_rho - 1) as f64 * h_rho / grid.refine;
    let half_th = 0.5 * (grid.n_theta - 1) as f64 * h_th / grid.refine;
    let (fine, _, _) = sweep(
        (rho_c - half_rho).max(0.0),
        (rho_c + half_rho).min(r),
        (th_c - half_th).max(0.0),
        (th_c + half_th).min(pi),
    )?;
    Ok(coarse.min(fine))
}
