//! The inverse-square model that a classical reduction to the line produces:
//! `Σ (p_j² + x_j²) + α² Σ_{j≠k} (x_j − x_k)⁻²`.
//!
//! Only its ground energy is needed. The closed form uses the hard-core
//! exponent `λ ≥ 1` with `λ(λ−1) = α²`; a radial solver for the relative
//! motion of two particles serves as an independent check.

use crate::error::{Error, Result};

/// Calogero model with ordered-pair coupling `g = 2α²`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CalogeroModel {
    pub particles: usize,
    pub alpha: f64,
}

impl CalogeroModel {
    pub fn new(particles: usize, alpha: f64) -> Self {
        CalogeroModel { particles, alpha }
    }

    /// Coefficient of `(x_1 − x_2)⁻²` after summing both orders of each pair.
    pub fn pair_coupling(&self) -> f64 {
        2.0 * self.alpha * self.alpha
    }

    /// Root `λ = (1 + √(1 + 2g))/2 ≥ 1` of `λ(λ−1) = g/2`.
    pub fn lambda(&self) -> f64 {
        0.5 * (1.0 + (1.0 + 2.0 * self.pair_coupling()).sqrt())
    }

    /// `N + λ N (N − 1)`
    pub fn ground_energy(&self) -> f64 {
        let n = self.particles as f64;
        n + self.lambda() * n * (n - 1.0)
    }
}

pub fn calogero_ground_energy(n: usize, alpha: f64) -> f64 {
    CalogeroModel::new(n, alpha).ground_energy()
}

/// Ground-energy jump of the two-particle model between `α` and its
/// representative in `[0, 2)`. The anyon spectrum is 2-periodic in `α`; this
/// quantity is nonzero whenever `α ∉ [0, 2)`.
pub fn periodicity_defect(alpha: f64) -> f64 {
    calogero_ground_energy(2, alpha) - calogero_ground_energy(2, alpha.rem_euclid(2.0))
}

/// Logarithmic radial grid `r = e^t`, uniform in `t`, Dirichlet at both ends.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadialGrid {
    pub r_min: f64,
    pub r_max: f64,
    /// Interior points of the coarse grid; the fine grid doubles the spacing
    /// resolution.
    pub points: usize,
}

impl Default for RadialGrid {
    fn default() -> Self {
        RadialGrid {
            r_min: 1e-8,
            r_max: 12.0,
            points: 4000,
        }
    }
}

/// Two-grid result of the radial solver.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadialEstimate {
    pub coarse: f64,
    pub fine: f64,
    /// Richardson extrapolation assuming second-order convergence.
    pub energy: f64,
    /// `|fine − extrapolated|`, an a-posteriori error indicator.
    pub error_estimate: f64,
}

/// Lowest eigenvalue of `−2∂_r² + r²/2 + 2α²/r²` on `r > 0` with vanishing
/// boundary values: the relative part of the two-particle model.
///
/// With `r = e^t` and `f = r^{1/2} g` the problem becomes the symmetric
/// tridiagonal pencil `−2g'' + (2α² + ½) g + r⁴g/2 = E r² g`; eigenvalues are
/// located by Sturm counts of `A − E B` and bisection.
pub fn calogero_pair_relative(alpha: f64, grid: RadialGrid) -> Result<RadialEstimate> {
    if !(grid.r_min > 0.0 && grid.r_max > grid.r_min) {
        return Err(Error::Configuration("radial grid needs 0 < r_min < r_max".into()));
    }
    if grid.points < 50 {
        return Err(Error::Configuration("radial grid needs at least 50 points".into()));
    }
    let coarse = lowest_radial_eigenvalue(alpha, grid.r_min, grid.r_max, grid.points);
    let fine = lowest_radial_eigenvalue(alpha, grid.r_min, grid.r_max, 2 * grid.points + 1);
    let energy = fine + (fine - coarse) / 3.0;
    Ok(RadialEstimate {
        coarse,
        fine,
        energy,
        error_estimate: (fine - energy).abs(),
    })
}

fn lowest_radial_eigenvalue(alpha: f64, r_min: f64, r_max: f64, points: usize) -> f64 {
    let (t0, t1) = (r_min.ln(), r_max.ln());
    let dt = (t1 - t0) / (points + 1) as f64;
    let off = -2.0 / (dt * dt);
    let mut diag = Vec::with_capacity(points);
    let mut mass = Vec::with_capacity(points);
    for i in 1..=points {
        let r = (t0 + i as f64 * dt).exp();
        let r2 = r * r;
        diag.push(4.0 / (dt * dt) + 2.0 * alpha * alpha + 0.5 + 0.5 * r2 * r2);
        mass.push(r2);
    }
    let count_below = |e: f64| -> usize {
        let mut negatives = 0;
        let mut d = 1.0;
        for i in 0..points {
            let mut piv = diag[i] - e * mass[i];
            if i > 0 {
                piv -= off * off / d;
            }
            if piv == 0.0 {
                piv = -f64::EPSILON * diag[i].abs();
            }
            if piv < 0.0 {
                negatives += 1;
            }
            d = piv;
        }
        negatives
    };
    let mut lo = 0.0;
    let mut hi = 4.0;
    while count_below(hi) == 0 {
        lo = hi;
        hi *= 2.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if count_below(mid) == 0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}
