//! The impenetrable-boson (Tonks–Girardeau) limit model.
//!
//! `Σ_j −∂²_{x_j} + x_j²` on functions vanishing whenever two coordinates
//! coincide. The Bose–Fermi mapping gives every eigenfunction as
//! `(N!)^(−1/2) ∏_{i<j} sgn(x_i − x_j) det[v_{n_a}(x_b)]`, labeled by a
//! strictly increasing set of occupied oscillator levels, with energy
//! `Σ (2n_a + 1)`.
//!
//! Sign convention: the overall sign is fixed so that ψ is positive-definite
//! in sign structure on the wedge `x₁ < x₂ < … < x_N` (the sgn product uses
//! `sgn(x_j − x_i)` for `i < j`), and ψ is defined to be exactly zero at any
//! coincidence.

use std::cmp::Reverse;
use std::collections::{BTreeSet, BinaryHeap};

use crate::error::{Error, Result};
use crate::linalg::Lu;
use crate::oscillator::{gauss_hermite, hermite_functions, hermite_polynomial_parts};

pub const MAX_PARTICLES: usize = 12;
pub const MAX_LEVEL_COUNT: usize = 10_000;
/// Largest N accepted by the tensor-product norm check.
pub const MAX_NORM_CHECK_PARTICLES: usize = 4;

/// Strictly increasing list of occupied oscillator levels.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct OccupationSet(Vec<usize>);

impl OccupationSet {
    pub fn new(levels: Vec<usize>) -> Result<Self> {
        if levels.is_empty() {
            return Err(Error::Domain("occupation set must be non-empty".into()));
        }
        if levels.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Domain(format!("levels {levels:?} are not strictly increasing")));
        }
        Ok(OccupationSet(levels))
    }

    /// Lowest set `{0, 1, …, N−1}`.
    pub fn ground(n: usize) -> Result<Self> {
        Self::new((0..n).collect())
    }

    pub fn levels(&self) -> &[usize] {
        &self.0
    }

    pub fn particles(&self) -> usize {
        self.0.len()
    }

    /// `Σ (2nᵢ + 1)`
    pub fn energy(&self) -> f64 {
        self.integer_energy() as f64
    }

    pub fn integer_energy(&self) -> u64 {
        self.0.iter().map(|&n| 2 * n as u64 + 1).sum()
    }
}

impl std::fmt::Display for OccupationSet {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|n| n.to_string()).collect();
        write!(f, "{{{}}}", parts.join(","))
    }
}

/// One energy of the limit model with all occupation sets realizing it.
#[derive(Debug, Clone, PartialEq)]
pub struct TgLevel {
    pub energy: f64,
    pub occupations: Vec<OccupationSet>,
}

impl TgLevel {
    pub fn multiplicity(&self) -> usize {
        self.occupations.len()
    }
}

/// Lowest eigenvalues of the N-particle limit model, grouped by energy.
///
/// States are produced best-first from `{0, …, N−1}`: the successors of a
/// set raise one level by one without breaking strict monotonicity. At least
/// `count` states are returned; the last level is always complete.
pub fn tg_levels(n: usize, count: usize) -> Result<Vec<TgLevel>> {
    if n == 0 || n > MAX_PARTICLES {
        return Err(Error::Capacity(format!("N = {n} outside 1..={MAX_PARTICLES}")));
    }
    if count == 0 || count > MAX_LEVEL_COUNT {
        return Err(Error::Capacity(format!("count = {count} outside 1..={MAX_LEVEL_COUNT}")));
    }
    let start = OccupationSet::ground(n)?;
    let mut heap = BinaryHeap::new();
    let mut seen = BTreeSet::new();
    heap.push(Reverse((start.integer_energy(), start.clone())));
    seen.insert(start);

    let mut levels: Vec<TgLevel> = Vec::new();
    let mut emitted = 0usize;
    let mut last_energy = None;
    while let Some(Reverse((e, occ))) = heap.pop() {
        if emitted >= count && last_energy != Some(e) {
            break;
        }
        for i in 0..n {
            let raised = occ.0[i] + 1;
            if i + 1 < n && raised >= occ.0[i + 1] {
                continue;
            }
            let mut next = occ.0.clone();
            next[i] = raised;
            let next = OccupationSet(next);
            if seen.insert(next.clone()) {
                heap.push(Reverse((next.integer_energy(), next)));
            }
        }
        match levels.last_mut() {
            Some(level) if last_energy == Some(e) => level.occupations.push(occ),
            _ => levels.push(TgLevel {
                energy: e as f64,
                occupations: vec![occ],
            }),
        }
        last_energy = Some(e);
        emitted += 1;
    }
    Ok(levels)
}

/// Flatten grouped levels into `count` (energy, occupation) states.
pub fn tg_states(n: usize, count: usize) -> Result<Vec<(f64, OccupationSet)>> {
    let levels = tg_levels(n, count)?;
    Ok(levels
        .into_iter()
        .flat_map(|l| {
            let e = l.energy;
            l.occupations.into_iter().map(move |o| (e, o))
        })
        .take(count)
        .collect())
}

/// A Bose–Fermi mapped eigenfunction of the limit model.
#[derive(Debug, Clone, PartialEq)]
pub struct TgEigenstate {
    occupations: OccupationSet,
    norm: f64,
}

pub fn tg_eigenfunction(occ: &OccupationSet) -> TgEigenstate {
    let n = occ.particles();
    let factorial: f64 = (1..=n).map(|k| k as f64).product();
    TgEigenstate {
        occupations: occ.clone(),
        norm: factorial.sqrt().recip(),
    }
}

impl TgEigenstate {
    pub fn occupations(&self) -> &OccupationSet {
        &self.occupations
    }

    pub fn energy(&self) -> f64 {
        self.occupations.energy()
    }

    pub fn particles(&self) -> usize {
        self.occupations.particles()
    }

    /// `∏_{i<j} sgn(x_j − x_i)`, or 0 at a coincidence.
    fn ordering_sign(xs: &[f64]) -> f64 {
        let mut s = 1.0;
        for i in 0..xs.len() {
            for j in i + 1..xs.len() {
                if xs[i] == xs[j] {
                    return 0.0;
                }
                if xs[j] < xs[i] {
                    s = -s;
                }
            }
        }
        s
    }

    /// Orbital matrix `M[a][b] = v_{n_a}(x_b)`, row-major.
    fn orbital_matrix(&self, xs: &[f64], modes: impl Fn(usize, f64) -> Vec<f64>) -> Vec<f64> {
        let n = xs.len();
        let levels = self.occupations.levels();
        let top = *levels.last().unwrap();
        let mut m = vec![0.0; n * n];
        for (b, &x) in xs.iter().enumerate() {
            let v = modes(top, x);
            for (a, &lvl) in levels.iter().enumerate() {
                m[a * n + b] = v[lvl];
            }
        }
        m
    }

    fn check_arity(&self, xs: &[f64]) -> Result<()> {
        if xs.len() != self.particles() {
            return Err(Error::Contract(format!(
                "state has {} particles, got {} coordinates",
                self.particles(),
                xs.len()
            )));
        }
        Ok(())
    }

    pub fn value(&self, xs: &[f64]) -> Result<f64> {
        self.check_arity(xs)?;
        let sign = Self::ordering_sign(xs);
        if sign == 0.0 {
            return Ok(0.0);
        }
        let m = self.orbital_matrix(xs, hermite_functions);
        Ok(self.norm * sign * Lu::new(xs.len(), m).determinant())
    }

    /// Value with the Gaussian factor `∏ e^{−x_b²/2}` removed; the integrand
    /// of Gauss–Hermite quadrature for `|ψ|²` is the square of this.
    fn polynomial_part(&self, xs: &[f64]) -> f64 {
        let sign = Self::ordering_sign(xs);
        if sign == 0.0 {
            return 0.0;
        }
        let m = self.orbital_matrix(xs, hermite_polynomial_parts);
        self.norm * sign * Lu::new(xs.len(), m).determinant()
    }

    /// Value and logarithmic gradient `∂_j ψ / ψ`.
    ///
    /// Column `j` of the orbital matrix is the only one depending on `x_j`,
    /// so `∂_j det M / det M = Σ_a (M⁻¹)_{j a} v'_{n_a}(x_j)`.
    /// `None` for the gradient at a node of the determinant.
    pub fn value_and_log_gradient(&self, xs: &[f64]) -> Result<(f64, Option<Vec<f64>>)> {
        self.check_arity(xs)?;
        let n = xs.len();
        let sign = Self::ordering_sign(xs);
        if sign == 0.0 {
            return Ok((0.0, None));
        }
        let m = self.orbital_matrix(xs, hermite_functions);
        let lu = Lu::new(n, m);
        let value = self.norm * sign * lu.determinant();
        let Some(inv) = lu.inverse() else {
            return Ok((value, None));
        };
        let levels = self.occupations.levels();
        let top = *levels.last().unwrap();
        let mut grad = vec![0.0; n];
        for (j, &x) in xs.iter().enumerate() {
            let v = hermite_functions(top + 1, x);
            let mut g = 0.0;
            for (a, &lvl) in levels.iter().enumerate() {
                let lower = if lvl > 0 { (lvl as f64 / 2.0).sqrt() * v[lvl - 1] } else { 0.0 };
                let dv = lower - ((lvl as f64 + 1.0) / 2.0).sqrt() * v[lvl + 1];
                g += inv[j * n + a] * dv;
            }
            grad[j] = g;
        }
        Ok((value, Some(grad)))
    }
}

/// `∫ |ψ|²` over ℝᴺ by tensor-product Gauss–Hermite quadrature.
pub fn tg_norm_check(occ: &OccupationSet, quadrature_degree: usize) -> Result<f64> {
    let n = occ.particles();
    if n > MAX_NORM_CHECK_PARTICLES {
        return Err(Error::Capacity(format!(
            "tensor quadrature limited to N ≤ {MAX_NORM_CHECK_PARTICLES}, got {n}"
        )));
    }
    let rule = gauss_hermite(quadrature_degree)?;
    let psi = tg_eigenfunction(occ);
    let q = rule.nodes.len();
    let mut idx = vec![0usize; n];
    let mut xs = vec![0.0; n];
    let mut total = 0.0;
    loop {
        let mut w = 1.0;
        for (d, &i) in idx.iter().enumerate() {
            xs[d] = rule.nodes[i];
            w *= rule.weights[i];
        }
        let p = psi.polynomial_part(&xs);
        total += w * p * p;
        let mut d = 0;
        loop {
            if d == n {
                return Ok(total);
            }
            idx[d] += 1;
            if idx[d] < q {
                break;
            }
            idx[d] = 0;
            d += 1;
        }
    }
}

/// `|ψ(x₀+δ, x₀−δ, rest)| / δ`: the slope with which ψ vanishes across the
/// diagonal `x₁ = x₂`. The first two coordinates are replaced; `rest` fills
/// the others.
pub fn diagonal_vanishing_rate(occ: &OccupationSet, x0: f64, delta: f64, rest: &[f64]) -> Result<f64> {
    if !(delta > 0.0) {
        return Err(Error::Domain("delta must be positive".into()));
    }
    let psi = tg_eigenfunction(occ);
    let mut xs = vec![x0 + delta, x0 - delta];
    xs.extend_from_slice(rest);
    Ok(psi.value(&xs)?.abs() / delta)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oscillator::ho_mode;

    fn occ(v: &[usize]) -> OccupationSet {
        OccupationSet::new(v.to_vec()).unwrap()
    }

    /// All strictly increasing N-tuples with entries below `cap`.
    fn brute_force_energies(n: usize, cap: usize) -> Vec<u64> {
        fn rec(n: usize, start: usize, cap: usize, acc: u64, out: &mut Vec<u64>) {
            if n == 0 {
                out.push(acc);
                return;
            }
            for l in start..cap {
                rec(n - 1, l + 1, cap, acc + 2 * l as u64 + 1, out);
            }
        }
        let mut out = Vec::new();
        rec(n, 0, cap, 0, &mut out);
        out.sort_unstable();
        out
    }

    #[test]
    fn occupation_invariants() {
        assert!(OccupationSet::new(vec![1, 1]).is_err());
        assert!(OccupationSet::new(vec![2, 1]).is_err());
        assert!(OccupationSet::new(vec![]).is_err());
        assert_eq!(occ(&[0, 1]).energy(), 4.0);
    }

    #[test]
    fn level_examples() {
        let l = tg_levels(2, 1).unwrap();
        assert_eq!(l[0].energy, 4.0);
        assert_eq!(l[0].occupations, vec![occ(&[0, 1])]);
        assert_eq!(tg_levels(5, 1).unwrap()[0].energy, 25.0);
        let states = tg_states(2, 4).unwrap();
        let e: Vec<f64> = states.iter().map(|s| s.0).collect();
        assert_eq!(e, vec![4.0, 6.0, 8.0, 8.0]);
        let sets: BTreeSet<_> = states.into_iter().map(|s| s.1).collect();
        let want: BTreeSet<_> = [occ(&[0, 1]), occ(&[0, 2]), occ(&[0, 3]), occ(&[1, 2])].into();
        assert_eq!(sets, want);
        assert!(tg_levels(13, 1).is_err());
        assert!(tg_levels(2, 10_001).is_err());
    }

    #[test]
    fn ground_energy_is_n_squared() {
        for n in 1..=12u64 {
            assert_eq!(tg_levels(n as usize, 1).unwrap()[0].energy, (n * n) as f64);
        }
    }

    #[test]
    fn multiplicities_match_exhaustive_enumeration() {
        for n in 1..=4 {
            let cap = n + 12;
            let all = brute_force_energies(n, cap);
            let levels = tg_levels(n, 200).unwrap();
            for l in &levels {
                let m = (l.energy as u64 - (n * n) as u64) / 2;
                if m > 10 {
                    break;
                }
                let brute = all.iter().filter(|&&e| e == l.energy as u64).count();
                assert_eq!(l.multiplicity(), brute, "N={n} E={}", l.energy);
            }
            // no energies skipped
            let found: Vec<u64> = levels.iter().map(|l| l.energy as u64).collect();
            let mut distinct = all.clone();
            distinct.dedup();
            assert_eq!(&distinct[..found.len().min(8)], &found[..found.len().min(8)]);
        }
    }

    #[test]
    fn eigenfunction_examples() {
        let psi = tg_eigenfunction(&occ(&[0, 1]));
        assert_eq!(psi.value(&[0.5, 0.5]).unwrap(), 0.0);
        let a = psi.value(&[0.3, -1.2]).unwrap();
        let b = psi.value(&[-1.2, 0.3]).unwrap();
        assert!((a - b).abs() < 1e-15);
        // direct 2×2 determinant at (1, −1)
        let (v0, v1) = (ho_mode(0).unwrap(), ho_mode(1).unwrap());
        let det = v0.value(1.0) * v1.value(-1.0) - v0.value(-1.0) * v1.value(1.0);
        let want = det.abs() / 2f64.sqrt();
        let got = psi.value(&[1.0, -1.0]).unwrap();
        assert!((got - want).abs() < 1e-15);
        assert!(got > 0.0);
        // closed form 2·π^{-1/2}·e^{-1}
        assert!((want - 2.0 / std::f64::consts::PI.sqrt() * (-1f64).exp()).abs() < 1e-15);
    }

    #[test]
    fn symmetric_and_vanishing_on_diagonals() {
        let psi = tg_eigenfunction(&occ(&[0, 2, 3]));
        let x = [0.4, -0.9, 1.3];
        let base = psi.value(&x).unwrap();
        for perm in [[1, 0, 2], [2, 1, 0], [0, 2, 1], [1, 2, 0], [2, 0, 1]] {
            let y: Vec<f64> = perm.iter().map(|&i| x[i]).collect();
            assert!((psi.value(&y).unwrap() - base).abs() < 1e-14);
        }
        for &(i, j) in &[(0, 1), (0, 2), (1, 2)] {
            let mut y = x;
            y[j] = y[i];
            assert!(psi.value(&y).unwrap().abs() <= 1e-12);
        }
    }

    #[test]
    fn ground_state_positive_on_fundamental_wedge() {
        for n in 1..=5 {
            let psi = tg_eigenfunction(&OccupationSet::ground(n).unwrap());
            let xs: Vec<f64> = (0..n).map(|i| -1.0 + i as f64 * 0.6).collect();
            assert!(psi.value(&xs).unwrap() > 0.0, "N={n}");
        }
    }

    #[test]
    fn norm_checks() {
        assert!((tg_norm_check(&occ(&[0]), 20).unwrap() - 1.0).abs() < 1e-12);
        assert!((tg_norm_check(&occ(&[0, 1]), 40).unwrap() - 1.0).abs() < 1e-8);
        assert!((tg_norm_check(&occ(&[0, 1, 2]), 30).unwrap() - 1.0).abs() < 1e-6);
        assert!(tg_norm_check(&occ(&[0, 1, 2, 3, 4]), 10).is_err());
    }

    #[test]
    fn linear_vanishing_across_diagonal() {
        for levels in [[0usize, 1], [0, 2]] {
            let o = occ(&levels);
            // {0, 2} vanishes to second order at the origin, so probe off it
            let r3 = diagonal_vanishing_rate(&o, 0.4, 1e-3, &[]).unwrap();
            let r4 = diagonal_vanishing_rate(&o, 0.4, 1e-4, &[]).unwrap();
            assert!(r3 > 0.0);
            assert!((r3 - r4).abs() / r4 < 0.01, "{levels:?}: {r3} vs {r4}");
            let a = diagonal_vanishing_rate(&o, -0.7, 0.02, &[]).unwrap();
            let b = diagonal_vanishing_rate(&o, -0.7, 0.01, &[]).unwrap();
            assert!((a - b).abs() < 0.05 * b);
        }
    }

    #[test]
    fn log_gradient_matches_differences() {
        let psi = tg_eigenfunction(&occ(&[0, 1, 3]));
        let x = [0.2, -0.7, 1.1];
        let (v, g) = psi.value_and_log_gradient(&x).unwrap();
        let g = g.unwrap();
        let h = 1e-6;
        for j in 0..3 {
            let mut p = x;
            let mut m = x;
            p[j] += h;
            m[j] -= h;
            let fd = (psi.value(&p).unwrap() - psi.value(&m).unwrap()) / (2.0 * h);
            assert!((fd / v - g[j]).abs() < 1e-6);
        }
    }

    #[test]
    fn energy_residual_by_finite_differences() {
        // −Δψ + |x|²ψ − Eψ on a coarse grid away from the diagonal, N = 2
        let psi = tg_eigenfunction(&occ(&[0, 1]));
        let e = psi.energy();
        let f = |a: f64, b: f64| psi.value(&[a, b]).unwrap();
        for &h in &[0.02, 0.01] {
            let mut worst: f64 = 0.0;
            for &(a, b) in &[(0.8, -0.5), (-1.2, 0.4), (1.5, 0.2)] {
                let lap = (f(a + h, b) + f(a - h, b) + f(a, b + h) + f(a, b - h) - 4.0 * f(a, b)) / (h * h);
                let res = -lap + (a * a + b * b) * f(a, b) - e * f(a, b);
                worst = worst.max(res.abs());
            }
            assert!(worst < 0.5 * h * h, "h={h}: {worst}");
        }
    }
}
