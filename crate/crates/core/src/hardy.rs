//! Hardy constants: the best `c` in
//!
//! ```text
//! Σ_j ⟨Ψ, (−i∇_j + αA_j)² Ψ⟩ ≥ c ∫ Σ_{j<k} |x_j − x_k|⁻² |Ψ|²
//! ```
//!
//! For two particles the left side is `2(−i∇ + αA₀)²` in the relative
//! coordinate and the constant is known in closed form. The quadratic forms
//! are conformally invariant: with `r = eᵗ` both become flat integrals over
//! the cylinder `(t, θ)`, which is how [`HardyGrid::LogPolar`] discretizes
//! them.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::geometry::{peierls_link_phase, vector_potential, Point2};
use crate::pair::{magnetic_laplacian_triplets, Grid2D, SolveSettings};
use crate::sparse::{inner, lowest_eigenpairs, LanczosOptions, SparseHermitianOperator, C64};
use crate::vmc::{ratio_statistics, run_chains, McSettings};

/// `2·min_{q even} (q + α)²`.
pub fn hardy_pair_analytic(alpha: f64) -> f64 {
    let r = alpha.rem_euclid(2.0);
    let d = r.min(2.0 - r);
    2.0 * d * d
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HardyMethod {
    AnalyticPair,
    RayleighGrid,
    VariationalUpper,
}

#[derive(Debug, Clone, PartialEq)]
pub struct HardyEstimate {
    pub alpha: f64,
    pub particles: usize,
    pub value: f64,
    /// Monte-Carlo error, when the value is a sample estimate.
    pub standard_error: Option<f64>,
    pub method: HardyMethod,
    /// Human-readable discretization or trial description.
    pub resolution: String,
}

/// Discretizations of the pair Rayleigh quotient.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum HardyGrid {
    /// `t = ln r ∈ [−T/2, T/2]` with Dirichlet ends, periodic θ.
    LogPolar { extent: f64, nt: usize, ntheta: usize },
    /// Cell-centred square `[−L, L]²`, weight `1/|r|²` on the nodes.
    Cartesian { half_width: f64, n: usize },
}

impl HardyGrid {
    /// Log-polar refinement ladder: each level doubles the radial range in
    /// `t` and halves the angular spacing.
    pub fn log_polar(level: u32) -> Self {
        let s = 1usize << level;
        HardyGrid::LogPolar {
            extent: 20.0 * s as f64,
            nt: 80 * s,
            ntheta: 32 * s,
        }
    }

    pub fn describe(&self) -> String {
        match *self {
            HardyGrid::LogPolar { extent, nt, ntheta } => format!("log-polar T={extent} {nt}x{ntheta}"),
            HardyGrid::Cartesian { half_width, n } => format!("cartesian L={half_width} {n}x{n}"),
        }
    }
}

/// The discretized pair forms: kinetic operator `K`, diagonal weight `W`
/// and the reflection `r → −r` on grid vectors.
#[derive(Debug, Clone)]
pub struct HardyProblem {
    pub alpha: f64,
    pub grid: HardyGrid,
    kinetic: SparseHermitianOperator,
    weight: Vec<f64>,
    mirror: Vec<usize>,
}

impl HardyProblem {
    pub fn new(alpha: f64, grid: HardyGrid) -> Result<Self> {
        if !alpha.is_finite() {
            return Err(Error::Domain("statistics parameter must be finite".into()));
        }
        match grid {
            HardyGrid::LogPolar { extent, nt, ntheta } => {
                if nt < 2 || ntheta < 4 || ntheta % 2 == 1 || !(extent > 0.0) {
                    return Err(Error::Configuration(format!("invalid log-polar grid {}", grid.describe())));
                }
                let dt = extent / nt as f64;
                let dth = 2.0 * std::f64::consts::PI / ntheta as f64;
                let idx = |i: usize, j: usize| i * ntheta + j;
                let point = |i: usize, j: usize| {
                    let r = (-extent / 2.0 + (i as f64 + 0.5) * dt).exp();
                    let th = j as f64 * dth;
                    Point2::new(r * th.cos(), r * th.sin())
                };
                let mut t = Vec::with_capacity(5 * nt * ntheta);
                let diag = 2.0 * (2.0 / (dt * dt) + 2.0 / (dth * dth));
                for i in 0..nt {
                    for j in 0..ntheta {
                        let a = idx(i, j);
                        t.push((a, a, C64::new(diag, 0.0)));
                        if i + 1 < nt {
                            let hop = C64::new(-2.0 / (dt * dt), 0.0);
                            t.push((a, idx(i + 1, j), hop));
                            t.push((idx(i + 1, j), a, hop));
                        }
                        let jn = (j + 1) % ntheta;
                        let phase = peierls_link_phase(point(i, j), point(i, jn), alpha)?;
                        let hop = C64::from_polar(2.0 / (dth * dth), phase) * -1.0;
                        t.push((a, idx(i, jn), hop));
                        t.push((idx(i, jn), a, hop.conj()));
                    }
                }
                let kinetic = SparseHermitianOperator::from_triplets(nt * ntheta, t)?;
                let mirror = (0..nt * ntheta).map(|k| idx(k / ntheta, (k % ntheta + ntheta / 2) % ntheta)).collect();
                Ok(HardyProblem {
                    alpha,
                    grid,
                    kinetic,
                    weight: vec![1.0; nt * ntheta],
                    mirror,
                })
            }
            HardyGrid::Cartesian { half_width, n } => {
                let g = Grid2D::new(n, n, half_width, half_width)?;
                let kinetic = SparseHermitianOperator::from_triplets(g.len(), magnetic_laplacian_triplets(&g, alpha, 2.0)?)?;
                let weight = g.points().map(|p| 1.0 / p.norm_sq()).collect();
                let mirror = (0..g.len()).map(|k| g.mirror(k)).collect();
                Ok(HardyProblem {
                    alpha,
                    grid,
                    kinetic,
                    weight,
                    mirror,
                })
            }
        }
    }

    pub fn dim(&self) -> usize {
        self.weight.len()
    }

    pub fn reflect(&self, v: &[C64]) -> Vec<C64> {
        self.mirror.iter().map(|&k| v[k]).collect()
    }

    /// `(v + Pv)/2`.
    pub fn even_part(&self, v: &[C64]) -> Vec<C64> {
        v.iter().zip(self.reflect(v)).map(|(a, b)| (a + b) * 0.5).collect()
    }

    /// `⟨v, Kv⟩ / ⟨v, Wv⟩`.
    pub fn quotient(&self, v: &[C64]) -> Result<f64> {
        let kv = self.kinetic.matvec(v)?;
        let num = inner(v, &kv).re;
        let den: f64 = v.iter().zip(&self.weight).map(|(z, w)| z.norm_sqr() * w).sum();
        Ok(num / den)
    }

    /// `W^{−1/2} K W^{−1/2}` restricted to reflection-even vectors, in the
    /// orthonormal basis `(e_k + e_{Pk})/√2` over one representative per orbit.
    fn even_symmetrized(&self) -> Result<SparseHermitianOperator> {
        let n = self.dim();
        let mut rep = vec![usize::MAX; n];
        let mut count = 0;
        for k in 0..n {
            if k < self.mirror[k] {
                rep[k] = count;
                count += 1;
            } else if k == self.mirror[k] {
                return Err(Error::Configuration("reflection has a fixed grid point".into()));
            }
        }
        let mut t = Vec::with_capacity(self.kinetic.nnz());
        for (a, b, v) in self.kinetic.entries() {
            if rep[a] == usize::MAX {
                continue;
            }
            let b = if rep[b] == usize::MAX { self.mirror[b] } else { b };
            t.push((rep[a], rep[b], v / (self.weight[a] * self.weight[b]).sqrt()));
        }
        SparseHermitianOperator::from_triplets(count, t)
    }
}

/// Smallest even-sector generalized Rayleigh quotient on `grid`.
pub fn hardy_rayleigh_pair(alpha: f64, grid: HardyGrid, s: SolveSettings) -> Result<HardyEstimate> {
    let hp = HardyProblem::new(alpha, grid)?;
    let m = hp.even_symmetrized()?;
    let k = s.k.clamp(1, 2);
    let res = lowest_eigenpairs(&m, LanczosOptions::new(k).tol(s.tol).seed(s.seed).max_iter(s.max_iter))?;
    if !res.is_complete() {
        return Err(Error::Contract(format!(
            "eigensolver stopped with {} of {} pairs converged",
            res.converged, k
        )));
    }
    Ok(HardyEstimate {
        alpha,
        particles: 2,
        value: res.eigenvalues[0],
        standard_error: None,
        method: HardyMethod::RayleighGrid,
        resolution: grid.describe(),
    })
}

/// Three-particle trial `Φ = e^{−Σ|x_j|²/(2σ²)} ∏_{j<k} (r²/(r² + a²))^{β/2}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HardyTrial {
    pub sigma: f64,
    pub core: f64,
    pub exponent: f64,
}

impl Default for HardyTrial {
    fn default() -> Self {
        HardyTrial {
            sigma: 1.0,
            core: 1.0,
            exponent: 1.0,
        }
    }
}

fn pair_sum(p: &[Point2], mut f: impl FnMut(usize, usize, Point2)) {
    for j in 0..p.len() {
        for k in j + 1..p.len() {
            f(j, k, p[j] - p[k]);
        }
    }
}

/// Monte-Carlo Rayleigh quotient of a [`HardyTrial`], an upper bound on the
/// three-particle constant.
///
/// Coordinates are sampled in units of σ, so the result depends on the trial
/// only through `a/σ` and β. Samples are drawn from `Φ²(1 + Σ_{j<k} r⁻²)`
/// and reweighted; the extra factor keeps every integrand bounded near
/// coincidences.
pub fn hardy_upper_bound_n3(alpha: f64, trial: HardyTrial, mc: McSettings) -> Result<HardyEstimate> {
    if !(trial.sigma > 0.0 && trial.core > 0.0 && trial.exponent > 0.0) {
        return Err(Error::Domain("trial width, core and exponent must be positive".into()));
    }
    if mc.chains < 2 || mc.per_chain == 0 {
        return Err(Error::Configuration("at least two non-empty chains are needed".into()));
    }
    let a2 = (trial.core / trial.sigma).powi(2);
    let beta = trial.exponent;
    let points = |c: &[f64]| -> Vec<Point2> { (0..3).map(|j| Point2::new(c[2 * j], c[2 * j + 1])).collect() };
    let inv_sum = |p: &[Point2]| {
        let mut s = 0.0;
        pair_sum(p, |_, _, d| s += 1.0 / d.norm_sq());
        s
    };
    let log_density = |c: &[f64]| -> Option<f64> {
        let p = points(c);
        let mut lp = -p.iter().map(|q| q.norm_sq()).sum::<f64>();
        let mut coincident = false;
        pair_sum(&p, |_, _, d| {
            let r2 = d.norm_sq();
            coincident |= r2 == 0.0;
            lp += beta * (r2 / (r2 + a2)).ln();
        });
        if coincident {
            return None;
        }
        Some(lp + (1.0 + inv_sum(&p)).ln())
    };
    let observe = |c: &[f64], _: &mut ChaCha8Rng| {
        let p = points(c);
        let mut grad: Vec<Point2> = p.iter().map(|&q| -1.0 * q).collect();
        pair_sum(&p, |j, k, d| {
            let r2 = d.norm_sq();
            let g = beta * a2 / (r2 * (r2 + a2)) * d;
            grad[j] = grad[j] + g;
            grad[k] = grad[k] - g;
        });
        let mut num = 0.0;
        for j in 0..3 {
            num += grad[j].norm_sq();
            num += alpha * alpha * vector_potential(&p, j).map(|a| a.norm_sq()).unwrap_or(f64::NAN);
        }
        let den = inv_sum(&p);
        let w = 1.0 / (1.0 + den);
        vec![num * w, den * w]
    };
    let init = |chain: u64| {
        let mut rng = ChaCha8Rng::seed_from_u64(mc.seed ^ 0x6a09_e667_f3bc_c908);
        rng.set_stream(chain);
        (0..3)
            .flat_map(|j| {
                let th = 2.0 * std::f64::consts::PI * j as f64 / 3.0;
                [th.cos() + 0.1 * rng.random_range(-1.0..1.0), th.sin() + 0.1 * rng.random_range(-1.0..1.0)]
            })
            .collect()
    };
    let out = run_chains(&mc, init, log_density, observe);
    let num: Vec<f64> = out.iter().map(|o| o.means[0]).collect();
    let den: Vec<f64> = out.iter().map(|o| o.means[1]).collect();
    let (value, se) = ratio_statistics(&num, &den);
    if !value.is_finite() || !se.is_finite() {
        return Err(Error::Contract("Monte-Carlo quotient is not finite".into()));
    }
    Ok(HardyEstimate {
        alpha,
        particles: 3,
        value,
        standard_error: Some(se),
        method: HardyMethod::VariationalUpper,
        resolution: format!(
            "sigma={} core={} exponent={} samples={}",
            trial.sigma,
            trial.core,
            trial.exponent,
            mc.samples()
        ),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sparse::random_unit_vector;

    #[test]
    fn analytic_examples() {
        assert_eq!(hardy_pair_analytic(1.0), 2.0);
        assert_eq!(hardy_pair_analytic(0.0), 0.0);
        assert_eq!(hardy_pair_analytic(0.5), 0.5);
        assert!((hardy_pair_analytic(1.5) - 0.5).abs() < 1e-15);
        assert!((hardy_pair_analytic(2.25) - hardy_pair_analytic(0.25)).abs() < 1e-15);
    }

    #[test]
    fn log_polar_ring_carries_the_flux() {
        let hp = HardyProblem::new(0.3, HardyGrid::LogPolar { extent: 4.0, nt: 4, ntheta: 8 }).unwrap();
        let k = &hp.kinetic;
        let mut flux = 0.0;
        for j in 0..8 {
            flux += (-k.entry(j, (j + 1) % 8)).arg();
        }
        assert!((flux - 2.0 * std::f64::consts::PI * 0.3).abs() < 1e-12);
        assert!(crate::sparse::hermitian_pairing_defect(k, 1) < 1e-10);
    }

    #[test]
    fn coarse_log_polar_values() {
        let s = SolveSettings::default();
        let e1 = hardy_rayleigh_pair(1.0, HardyGrid::log_polar(0), s).unwrap();
        assert!(e1.value > 1.95 && e1.value < 2.06, "{}", e1.value);
        let e0 = hardy_rayleigh_pair(0.0, HardyGrid::log_polar(0), s).unwrap();
        assert!(e0.value > 0.0 && e0.value < 0.06);
    }

    #[test]
    fn random_even_vectors_respect_the_bound() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for alpha in [0.25, 0.5, 0.75, 1.0] {
            let hp = HardyProblem::new(alpha, HardyGrid::log_polar(0)).unwrap();
            for _ in 0..10 {
                let v = hp.even_part(&random_unit_vector(hp.dim(), &mut rng));
                assert!(hp.quotient(&v).unwrap() >= hardy_pair_analytic(alpha) - 0.01);
            }
        }
    }

    #[test]
    fn n3_quotient_is_dilation_invariant() {
        let mut mc = McSettings::new(4);
        mc.per_chain = 2000;
        mc.burn_in = 500;
        mc.chains = 4;
        let t1 = HardyTrial { sigma: 1.0, core: 0.5, exponent: 1.0 };
        let t2 = HardyTrial { sigma: 3.0, core: 1.5, exponent: 1.0 };
        let a = hardy_upper_bound_n3(1.0, t1, mc).unwrap();
        let b = hardy_upper_bound_n3(1.0, t2, mc).unwrap();
        assert_eq!(a.value, b.value);
        assert!(a.value > 0.0);
    }

    #[test]
    fn rejects_invalid_grids() {
        assert!(HardyProblem::new(1.0, HardyGrid::LogPolar { extent: 10.0, nt: 10, ntheta: 7 }).is_err());
        assert!(HardyProblem::new(1.0, HardyGrid::Cartesian { half_width: 8.0, n: 11 }).is_err());
        let bad = HardyTrial { sigma: 0.0, ..HardyTrial::default() };
        assert!(hardy_upper_bound_n3(1.0, bad, McSettings::new(1)).is_err());
    }
}
