//! Energies of the gauged trial states
//!
//! ```text
//! Ψ = ψ_k(x₁..x_N) · ∏ u_ε(y_j) · ∏_{j<k} e^{−iαS(x_j − x_k)}
//! ```
//!
//! The splitting identity gives their energy in closed form; [`mc_energy`]
//! recomputes it by Metropolis sampling of the full magnetic kinetic energy.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geometry::{grad_phase_s, phase_s, vector_potential, vector_potential_a0, Point2};
use crate::oscillator::{gauss_hermite, transverse_ground};
use crate::tonks::{tg_eigenfunction, OccupationSet, TgEigenstate};

pub const MAX_MC_PARTICLES: usize = 6;
/// Proposals closer than this to a coincidence `x_j = x_k` are rejected.
pub const DIAGONAL_GUARD: f64 = 1e-12;

/// Trial state: limit-model eigenfunction, frozen transverse modes, and the
/// singular gauge phase.
#[derive(Debug, Clone, PartialEq)]
pub struct AnsatzState {
    pub occupations: OccupationSet,
    pub alpha: f64,
    pub epsilon: f64,
}

impl AnsatzState {
    pub fn new(occupations: OccupationSet, alpha: f64, epsilon: f64) -> Result<Self> {
        if !(epsilon > 0.0 && epsilon.is_finite()) {
            return Err(Error::Domain(format!("anisotropy must be positive, got {epsilon}")));
        }
        if !alpha.is_finite() {
            return Err(Error::Domain("statistics parameter must be finite".into()));
        }
        Ok(AnsatzState { occupations, alpha, epsilon })
    }

    pub fn particles(&self) -> usize {
        self.occupations.particles()
    }

    /// `Θ = −α Σ_{j<k} S(x_j − x_k)`.
    pub fn phase(&self, positions: &[Point2]) -> Result<f64> {
        let mut theta = 0.0;
        for j in 0..positions.len() {
            for k in j + 1..positions.len() {
                theta -= self.alpha * phase_s(positions[j] - positions[k])?;
            }
        }
        Ok(theta)
    }
}

/// `N e_ε + λ¹ᴰ`: the energy of the trial state in closed form.
pub fn splitting_energy(state: &AnsatzState) -> f64 {
    state.particles() as f64 / state.epsilon + state.occupations.energy()
}

/// Monte-Carlo run parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McSettings {
    pub chains: usize,
    pub per_chain: usize,
    pub burn_in: usize,
    /// Initial proposal scale; adapted during burn-in, then frozen.
    pub step: f64,
    pub seed: u64,
}

impl McSettings {
    pub fn new(seed: u64) -> Self {
        McSettings {
            chains: 16,
            per_chain: 62_500,
            burn_in: 5_000,
            step: 0.5,
            seed,
        }
    }

    pub fn samples(&self) -> usize {
        self.chains * self.per_chain
    }

    fn validate(&self) -> Result<()> {
        if self.chains < 2 {
            return Err(Error::Configuration("at least two chains are needed for an error bar".into()));
        }
        if self.per_chain == 0 || !(self.step > 0.0) {
            return Err(Error::Configuration("chain length and step must be positive".into()));
        }
        Ok(())
    }
}

/// Mean with an across-chain standard error.
#[derive(Debug, Clone, PartialEq)]
pub struct MCEstimate {
    pub mean: f64,
    pub standard_error: f64,
    pub samples: usize,
    pub seed: u64,
    pub chains: usize,
    /// Acceptance rate after burn-in.
    pub acceptance: f64,
    /// Proposals rejected for landing in the diagonal guard band.
    pub rejected: usize,
}

/// Per-chain averages of a vector of observables.
pub(crate) struct ChainOutput {
    pub means: Vec<f64>,
    pub accepted: usize,
    pub rejected: usize,
}

/// Random-walk Metropolis on `exp(log_density)`. The proposal moves every
/// coordinate by `step·N(0,1)`; `step` is tuned towards acceptance 0.2–0.6
/// during burn-in, then frozen. `log_density` returns `None` inside the
/// guard band. `observe` may draw further, exactly distributed variables
/// from the chain's generator.
pub(crate) fn metropolis_chain(
    x0: Vec<f64>,
    settings: &McSettings,
    chain: u64,
    log_density: impl Fn(&[f64]) -> Option<f64>,
    observe: impl Fn(&[f64], &mut ChaCha8Rng) -> Vec<f64>,
) -> ChainOutput {
    let mut rng = ChaCha8Rng::seed_from_u64(settings.seed);
    rng.set_stream(chain);
    let mut x = x0;
    let mut lp = log_density(&x).unwrap_or(f64::NEG_INFINITY);
    let mut step = settings.step;
    let mut proposal = x.clone();
    let mut rejected = 0usize;

    let mut advance = |x: &mut Vec<f64>, lp: &mut f64, step: f64, rng: &mut ChaCha8Rng, rejected: &mut usize| {
        for (p, xi) in proposal.iter_mut().zip(x.iter()) {
            let z: f64 = rng.sample(StandardNormal);
            *p = xi + step * z;
        }
        let u: f64 = rng.random();
        match log_density(&proposal) {
            None => {
                *rejected += 1;
                false
            }
            Some(lq) if lq.is_finite() && (lq >= *lp || u < (lq - *lp).exp()) => {
                x.copy_from_slice(&proposal);
                *lp = lq;
                true
            }
            Some(_) => false,
        }
    };

    let window = 100;
    let mut acc_window = 0;
    for it in 1..=settings.burn_in {
        if advance(&mut x, &mut lp, step, &mut rng, &mut rejected) {
            acc_window += 1;
        }
        if it % window == 0 {
            let rate = acc_window as f64 / window as f64;
            if rate > 0.5 {
                step *= 1.15;
            } else if rate < 0.3 {
                step *= 0.85;
            }
            acc_window = 0;
        }
    }
    rejected = 0;
    let mut accepted = 0;
    let mut sums: Vec<f64> = Vec::new();
    for _ in 0..settings.per_chain {
        if advance(&mut x, &mut lp, step, &mut rng, &mut rejected) {
            accepted += 1;
        }
        let o = observe(&x, &mut rng);
        if sums.is_empty() {
            sums = o;
        } else {
            sums.iter_mut().zip(o).for_each(|(s, v)| *s += v);
        }
    }
    let m = settings.per_chain as f64;
    ChainOutput {
        means: sums.into_iter().map(|s| s / m).collect(),
        accepted,
        rejected,
    }
}

/// Run all chains in parallel; output in chain order.
pub(crate) fn run_chains(
    settings: &McSettings,
    init: impl Fn(u64) -> Vec<f64> + Sync,
    log_density: impl Fn(&[f64]) -> Option<f64> + Sync,
    observe: impl Fn(&[f64], &mut ChaCha8Rng) -> Vec<f64> + Sync,
) -> Vec<ChainOutput> {
    (0..settings.chains as u64)
        .into_par_iter()
        .map(|c| metropolis_chain(init(c), settings, c, &log_density, &observe))
        .collect()
}

/// Mean and standard error of per-chain means.
pub(crate) fn chain_statistics(values: &[f64]) -> (f64, f64) {
    let c = values.len() as f64;
    let mean = values.iter().sum::<f64>() / c;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (c - 1.0);
    (mean, (var / c).sqrt())
}

/// Distinct starting abscissae: Gauss–Hermite nodes, jittered per chain.
pub(crate) fn quantile_start(n: usize, chain: u64, seed: u64) -> Result<Vec<f64>> {
    let nodes = gauss_hermite(n)?.nodes;
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9e37_79b9_7f4a_7c15);
    rng.set_stream(chain);
    Ok(nodes.iter().map(|x| x + 0.05 * rng.random_range(-1.0..1.0)).collect())
}

fn min_gap(xs: &[f64]) -> f64 {
    let mut g = f64::INFINITY;
    for j in 0..xs.len() {
        for k in j + 1..xs.len() {
            g = g.min((xs[j] - xs[k]).abs());
        }
    }
    g
}

/// Local kinetic-plus-trap energy `Σ_j |(−i∇_j + αA_j)Ψ|²/|Ψ|² + V` at
/// `coords = [x₁..x_N, y₁..y_N]`.
///
/// The phase gradient comes from `∇S` and the potential from `A₀`
/// separately, so their cancellation is computed rather than assumed.
pub fn local_energy(state: &AnsatzState, psi: &TgEigenstate, coords: &[f64]) -> Result<f64> {
    let n = state.particles();
    let (xs, ys) = coords.split_at(n);
    let (_, grad) = psi.value_and_log_gradient(xs)?;
    let grad = grad.ok_or_else(|| Error::Domain("local energy at a node of the trial state".into()))?;
    let u = transverse_ground(state.epsilon)?;
    let pos: Vec<Point2> = xs.iter().zip(ys).map(|(&x, &y)| Point2::new(x, y)).collect();
    let mut e = 0.0;
    for j in 0..n {
        let dy = u.log_derivative(ys[j]);
        e += grad[j] * grad[j] + dy * dy;
        let mut m = state.alpha * vector_potential(&pos, j)?;
        for k in 0..n {
            if k != j {
                m = m - state.alpha * grad_phase_s(pos[j] - pos[k])?;
            }
        }
        e += m.norm_sq();
        e += xs[j] * xs[j] + ys[j] * ys[j] / (state.epsilon * state.epsilon);
    }
    Ok(e)
}

/// Weight of the nodeless component in the sampling density.
pub const DEFENSIVE_WEIGHT: f64 = 0.1;

/// `(|ψ|², |ψ|² E_L)` at `coords`; the product stays finite at the nodes
/// where `E_L` alone diverges.
fn energy_density(state: &AnsatzState, psi: &TgEigenstate, coords: &[f64]) -> Result<(f64, f64)> {
    let n = state.particles();
    let (value, grad) = psi.value_and_log_gradient(&coords[..n])?;
    if value == 0.0 || grad.is_none() {
        return Ok((0.0, 0.0));
    }
    let p2 = value * value;
    Ok((p2, p2 * local_energy(state, psi, coords)?))
}

/// Monte-Carlo estimate of the trial-state energy `⟨Ψ, HΨ⟩ / ⟨Ψ, Ψ⟩`.
///
/// The longitudinal coordinates follow a Metropolis walk on
/// `q = |ψ_k|² + c∏v₀(x_j)²` and the transverse ones are redrawn exactly
/// from `∏u_ε²` at every step. Reweighting by `|ψ_k|²/q` recovers the
/// `|Ψ|²` average. Sampling `|ψ_k|²` alone would leave the estimator with
/// infinite variance: `|∂ log ψ|²` grows like the inverse squared distance
/// to a node.
pub fn mc_energy(state: &AnsatzState, settings: McSettings) -> Result<MCEstimate> {
    settings.validate()?;
    let n = state.particles();
    if n > MAX_MC_PARTICLES {
        return Err(Error::Capacity(format!("at most {MAX_MC_PARTICLES} particles, got {n}")));
    }
    let psi = tg_eigenfunction(&state.occupations);
    let width = (state.epsilon / 2.0).sqrt();
    let ln_g0 = -(n as f64) * std::f64::consts::PI.ln() / 2.0 + DEFENSIVE_WEIGHT.ln();
    let log_q = move |xs: &[f64], p2: f64| -> f64 {
        let lg = ln_g0 - xs.iter().map(|x| x * x).sum::<f64>();
        let lp = p2.ln();
        let hi = lg.max(lp);
        hi + ((lg - hi).exp() + (lp - hi).exp()).ln()
    };
    let log_density = |xs: &[f64]| -> Option<f64> {
        if min_gap(xs) < DIAGONAL_GUARD {
            return None;
        }
        let v = psi.value(xs).ok()?;
        Some(log_q(xs, v * v))
    };
    let observe = |xs: &[f64], rng: &mut ChaCha8Rng| {
        let mut c = xs.to_vec();
        c.extend((0..n).map(|_| width * rng.sample::<f64, _>(StandardNormal)));
        match energy_density(state, &psi, &c) {
            Ok((p2, e)) => {
                let w = (-log_q(xs, p2)).exp();
                vec![e * w, p2 * w]
            }
            Err(_) => vec![f64::NAN, f64::NAN],
        }
    };
    let init = |c: u64| quantile_start(n, c, settings.seed).expect("valid particle count");
    let out = run_chains(&settings, init, log_density, observe);
    let num: Vec<f64> = out.iter().map(|o| o.means[0]).collect();
    let den: Vec<f64> = out.iter().map(|o| o.means[1]).collect();
    if num.iter().chain(&den).any(|m| !m.is_finite()) {
        return Err(Error::Contract("non-finite local energy on an accepted sample".into()));
    }
    let (mean, se) = ratio_statistics(&num, &den);
    let accepted: usize = out.iter().map(|o| o.accepted).sum();
    Ok(MCEstimate {
        mean,
        standard_error: se,
        samples: settings.samples(),
        seed: settings.seed,
        chains: settings.chains,
        acceptance: accepted as f64 / settings.samples() as f64,
        rejected: out.iter().map(|o| o.rejected).sum(),
    })
}

/// Ratio of means `ΣN/ΣD` with a first-order (delta-method) standard error
/// from the per-chain values.
pub(crate) fn ratio_statistics(num: &[f64], den: &[f64]) -> (f64, f64) {
    let c = num.len() as f64;
    let nm = num.iter().sum::<f64>() / c;
    let dm = den.iter().sum::<f64>() / c;
    let r = nm / dm;
    let resid: Vec<f64> = num.iter().zip(den).map(|(a, b)| a - r * b).collect();
    let (_, se) = chain_statistics(&resid);
    (r, se / dm.abs())
}

/// A real test function with its analytic gradient.
#[derive(Debug, Clone, Copy)]
pub struct Probe {
    pub value: fn(Point2) -> f64,
    pub gradient: fn(Point2) -> Point2,
}

impl Probe {
    /// `x e^{−|r|²/2}`, vanishing on the discontinuity line of `S`.
    pub fn nodal_gaussian() -> Self {
        Probe {
            value: |r| r.x * (-0.5 * r.norm_sq()).exp(),
            gradient: |r| {
                let g = (-0.5 * r.norm_sq()).exp();
                Point2::new(g * (1.0 - r.x * r.x), -g * r.x * r.y)
            },
        }
    }

    /// `e^{−|r|²/2}`, nonzero on the line.
    pub fn gaussian() -> Self {
        Probe {
            value: |r| (-0.5 * r.norm_sq()).exp(),
            gradient: |r| {
                let g = (-0.5 * r.norm_sq()).exp();
                Point2::new(-g * r.x, -g * r.y)
            },
        }
    }
}

/// `|(−i∇ + αA₀)(f e^{−iαS})|² − |∇f|²` at `r`.
pub fn gauge_pointwise_check(alpha: f64, r: Point2, probe: &Probe) -> Result<f64> {
    let f = (probe.value)(r);
    let df = (probe.gradient)(r);
    let ds = grad_phase_s(r)?;
    let a = vector_potential_a0(r)?;
    // e^{iαS}(−i∇ + αA₀)(f e^{−iαS}) = −i∇f + αf(A₀ − ∇S)
    let re = alpha * f * (a - ds);
    let im = -1.0 * df;
    Ok(re.norm_sq() + im.norm_sq() - df.norm_sq())
}

/// Discrete counterpart of the gauge check over the square `[−1, 1]²`:
/// `Σ_links |e^{iα∫A₀}Ψ_b − Ψ_a|² − Σ_links |f_b − f_a|²` with
/// `Ψ = f e^{−iαS}` on a cell-centred grid of spacing `h`.
///
/// The phase `e^{−iαS}` jumps across `x = 0`; the jump costs nothing only if
/// `f` vanishes there. For a nodal probe the result tends to 0 with `h`, for
/// a nodeless one it grows like `1/h`.
pub fn gauge_strip_energy(alpha: f64, probe: &Probe, h: f64) -> Result<f64> {
    let n = (2.0 / h).round() as usize;
    if n < 2 || n % 2 == 1 || ((n as f64) * h - 2.0).abs() > 1e-9 {
        return Err(Error::Domain(format!("spacing {h} must split [−1, 1] into an even number of cells")));
    }
    let p = |i: usize, j: usize| Point2::new((i as f64 + 0.5) * h - 1.0, (j as f64 + 0.5) * h - 1.0);
    let psi = |q: Point2| -> Result<num_complex::Complex64> {
        Ok(num_complex::Complex64::from_polar((probe.value)(q), -alpha * phase_s(q)?))
    };
    let mut gauged = 0.0;
    let mut plain = 0.0;
    for i in 0..n {
        for j in 0..n {
            let a = p(i, j);
            for b in [(i + 1, j), (i, j + 1)] {
                if b.0 >= n || b.1 >= n {
                    continue;
                }
                let b = p(b.0, b.1);
                let link = num_complex::Complex64::from_polar(1.0, alpha * crate::geometry::peierls_link_phase(a, b, 1.0)?);
                gauged += (link * psi(b)? - psi(a)?).norm_sqr();
                plain += ((probe.value)(b) - (probe.value)(a)).powi(2);
            }
        }
    }
    Ok(gauged - plain)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn occ(v: &[usize]) -> OccupationSet {
        OccupationSet::new(v.to_vec()).unwrap()
    }

    #[test]
    fn splitting_examples() {
        assert_eq!(splitting_energy(&AnsatzState::new(occ(&[0, 1]), 0.3, 0.5).unwrap()), 8.0);
        assert_eq!(splitting_energy(&AnsatzState::new(occ(&[0, 1, 2]), 0.5, 0.25).unwrap()), 21.0);
        assert_eq!(splitting_energy(&AnsatzState::new(occ(&[0]), 1.0, 1.0).unwrap()), 2.0);
    }

    #[test]
    fn local_energy_magnetic_term_cancels() {
        let s0 = AnsatzState::new(occ(&[0, 1, 2]), 0.0, 0.5).unwrap();
        let s1 = AnsatzState::new(occ(&[0, 1, 2]), 0.8, 0.5).unwrap();
        let psi = tg_eigenfunction(&s0.occupations);
        let c = [0.3, -0.8, 1.1, 0.2, -0.4, 0.05];
        let e0 = local_energy(&s0, &psi, &c).unwrap();
        let e1 = local_energy(&s1, &psi, &c).unwrap();
        assert!((e0 - e1).abs() < 1e-10 * e0);
    }

    #[test]
    fn pair_energy_within_three_sigma() {
        let s = AnsatzState::new(occ(&[0, 1]), 0.5, 0.5).unwrap();
        let mut m = McSettings::new(11);
        m.per_chain = 20_000;
        let e = mc_energy(&s, m).unwrap();
        assert!((e.mean - 8.0).abs() <= 3.0 * e.standard_error, "{e:?}");
        assert!(e.standard_error < 0.1);
        assert!((0.2..=0.6).contains(&e.acceptance), "{}", e.acceptance);
    }

    #[test]
    fn deterministic_given_seed() {
        let s = AnsatzState::new(occ(&[0, 2]), 1.0, 0.25).unwrap();
        let mut m = McSettings::new(3);
        m.per_chain = 2_000;
        m.burn_in = 500;
        let a = mc_energy(&s, m).unwrap();
        let b = mc_energy(&s, m).unwrap();
        assert_eq!(a.mean.to_bits(), b.mean.to_bits());
        assert_eq!(a.standard_error.to_bits(), b.standard_error.to_bits());
    }

    #[test]
    fn rejects_bad_settings() {
        let s = AnsatzState::new(occ(&[0, 1]), 0.5, 0.5).unwrap();
        let mut m = McSettings::new(1);
        m.chains = 1;
        assert!(mc_energy(&s, m).is_err());
        let big = AnsatzState::new(OccupationSet::ground(7).unwrap(), 0.5, 0.5).unwrap();
        assert!(matches!(mc_energy(&big, McSettings::new(1)), Err(Error::Capacity(_))));
        assert!(AnsatzState::new(occ(&[0]), 0.5, -1.0).is_err());
    }

    #[test]
    fn pointwise_gauge_examples() {
        let r = Point2::new(1.0, 0.3);
        assert!(gauge_pointwise_check(0.7, r, &Probe::nodal_gaussian()).unwrap().abs() <= 1e-10);
        assert_eq!(gauge_pointwise_check(0.0, r, &Probe::gaussian()).unwrap().abs(), 0.0);
        assert!(gauge_pointwise_check(0.7, Point2::new(0.0, 1.0), &Probe::gaussian()).is_err());
    }

    #[test]
    fn probe_gradients_match_differences() {
        let d = 1e-6;
        for probe in [Probe::nodal_gaussian(), Probe::gaussian()] {
            let r = Point2::new(0.4, -0.7);
            let g = (probe.gradient)(r);
            let gx = ((probe.value)(Point2::new(r.x + d, r.y)) - (probe.value)(Point2::new(r.x - d, r.y))) / (2.0 * d);
            let gy = ((probe.value)(Point2::new(r.x, r.y + d)) - (probe.value)(Point2::new(r.x, r.y - d))) / (2.0 * d);
            assert!((g.x - gx).abs() < 1e-8 && (g.y - gy).abs() < 1e-8);
        }
    }

    #[test]
    fn nodal_condition_is_necessary_for_the_gauge() {
        let alpha = 0.7;
        let nodal: Vec<f64> = [0.1, 0.05, 0.025]
            .iter()
            .map(|&h| gauge_strip_energy(alpha, &Probe::nodal_gaussian(), h).unwrap())
            .collect();
        let plain: Vec<f64> = [0.1, 0.05, 0.025]
            .iter()
            .map(|&h| gauge_strip_energy(alpha, &Probe::gaussian(), h).unwrap())
            .collect();
        assert!(nodal[2].abs() < nodal[0].abs() && nodal[2].abs() < 0.05);
        // ~1/h growth
        assert!(plain[1] > 1.8 * plain[0] && plain[2] > 1.8 * plain[1]);
    }
}
