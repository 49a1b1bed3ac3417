//! The two-anyon problem.
//!
//! For a harmonic trap the pair Hamiltonian separates into a centre-of-mass
//! oscillator, solved in closed form by [`com_levels`], and the relative
//! operator
//!
//! ```text
//! 2(−i∇ + α A₀(r))² + x²/2 + y²/(2ε²)
//! ```
//!
//! which carries a single Aharonov–Bohm flux at the origin. The relative
//! operator is discretized on a [`Grid2D`] whose origin sits at the centre of
//! a plaquette, with Peierls phases on every link; the bosonic states are the
//! even ones under `r → −r`.

use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{Error, Result};
use crate::geometry::{peierls_link_phase, phase_s, Point2};
use crate::sparse::{
    inner, lowest_eigenpairs, norm, HermitianOperator, LanczosOptions, SparseHermitianOperator, C64,
};

pub const DEFAULT_HALF_WIDTH_X: f64 = 8.0;
/// Transverse half-width in units of `√ε`.
pub const DEFAULT_TRANSVERSE_WIDTHS: f64 = 10.0;
pub const DEFAULT_NX: usize = 160;
pub const DEFAULT_NY: usize = 200;
pub const MAX_COM_LEVELS: usize = 1000;

/// Cell-centred rectangular grid on `[−L_x, L_x] × [−L_y, L_y]`.
///
/// Point counts are even, so the origin is the centre of a plaquette and no
/// grid point or link touches it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid2D {
    pub nx: usize,
    pub ny: usize,
    pub half_width: (f64, f64),
}

impl Grid2D {
    pub fn new(nx: usize, ny: usize, lx: f64, ly: f64) -> Result<Self> {
        if nx < 2 || ny < 2 || nx % 2 == 1 || ny % 2 == 1 {
            return Err(Error::Configuration(format!(
                "grid {nx}x{ny} would place the flux on a vertex; point counts must be even and at least 2"
            )));
        }
        if !(lx > 0.0 && ly > 0.0 && lx.is_finite() && ly.is_finite()) {
            return Err(Error::Configuration(format!("box half-widths must be positive, got ({lx}, {ly})")));
        }
        Ok(Grid2D { nx, ny, half_width: (lx, ly) })
    }

    pub fn spacing(&self) -> (f64, f64) {
        (2.0 * self.half_width.0 / self.nx as f64, 2.0 * self.half_width.1 / self.ny as f64)
    }

    pub fn len(&self) -> usize {
        self.nx * self.ny
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn index(&self, i: usize, j: usize) -> usize {
        i * self.ny + j
    }

    pub fn point(&self, i: usize, j: usize) -> Point2 {
        let (hx, hy) = self.spacing();
        Point2::new(
            (i as f64 - (self.nx as f64 - 1.0) / 2.0) * hx,
            (j as f64 - (self.ny as f64 - 1.0) / 2.0) * hy,
        )
    }

    /// Points in storage order.
    pub fn points(&self) -> impl Iterator<Item = Point2> + '_ {
        (0..self.nx).flat_map(move |i| (0..self.ny).map(move |j| self.point(i, j)))
    }

    /// Storage index of the reflected point `−r`.
    pub fn mirror(&self, idx: usize) -> usize {
        let (i, j) = (idx / self.ny, idx % self.ny);
        self.index(self.nx - 1 - i, self.ny - 1 - j)
    }

    pub fn reflect(&self, v: &[C64]) -> Vec<C64> {
        (0..v.len()).map(|k| v[self.mirror(k)]).collect()
    }

    /// `Σ |v|² h_x h_y` over the points where `keep` holds.
    pub fn mass_where(&self, v: &[C64], keep: impl Fn(Point2) -> bool) -> f64 {
        let (hx, hy) = self.spacing();
        self.points().zip(v).filter(|(p, _)| keep(*p)).map(|(_, z)| z.norm_sqr()).sum::<f64>() * hx * hy
    }
}

/// Triplets of `c(−i∇ + αA₀)²` with Dirichlet walls: hopping
/// `−(c/h²)·e^{iα∫A₀}` along each link, diagonal `c(2/h_x² + 2/h_y²)`.
pub(crate) fn magnetic_laplacian_triplets(grid: &Grid2D, alpha: f64, c: f64) -> Result<Vec<(usize, usize, C64)>> {
    let (hx, hy) = grid.spacing();
    let mut t = Vec::with_capacity(5 * grid.len());
    let diag = c * (2.0 / (hx * hx) + 2.0 / (hy * hy));
    for i in 0..grid.nx {
        for j in 0..grid.ny {
            let a = grid.index(i, j);
            let pa = grid.point(i, j);
            t.push((a, a, C64::new(diag, 0.0)));
            for (di, dj, h) in [(1, 0, hx), (0, 1, hy)] {
                if i + di >= grid.nx || j + dj >= grid.ny {
                    continue;
                }
                let b = grid.index(i + di, j + dj);
                let phase = peierls_link_phase(pa, grid.point(i + di, j + dj), alpha)?;
                let hop = C64::from_polar(c / (h * h), phase) * -1.0;
                t.push((a, b, hop));
                t.push((b, a, hop.conj()));
            }
        }
    }
    Ok(t)
}

/// Levels `(2n+1) + (2m+1)/ε` of the centre-of-mass oscillator
/// `½(−i∇_R)² + 2X² + 2Y²/ε²`, ascending, with multiplicity.
pub fn com_levels(epsilon: f64, count: usize) -> Result<Vec<f64>> {
    if !(epsilon > 0.0 && epsilon.is_finite()) {
        return Err(Error::Domain(format!("anisotropy must be positive, got {epsilon}")));
    }
    if count > MAX_COM_LEVELS {
        return Err(Error::Capacity(format!("at most {MAX_COM_LEVELS} levels, asked for {count}")));
    }
    if count == 0 {
        return Ok(Vec::new());
    }
    // the pure-X ladder already supplies `count` levels below this bound
    let bound = (2 * count - 1) as f64 + 1.0 / epsilon;
    let mut out = Vec::new();
    for m in 0.. {
        let ey = (2 * m + 1) as f64 / epsilon;
        if 1.0 + ey > bound {
            break;
        }
        for n in 0..count {
            let e = (2 * n + 1) as f64 + ey;
            if e > bound {
                break;
            }
            out.push(e);
        }
    }
    out.sort_by(f64::total_cmp);
    out.truncate(count);
    Ok(out)
}

/// One flux, one trap anisotropy, one grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairProblem {
    pub alpha: f64,
    pub epsilon: f64,
    pub grid: Grid2D,
}

impl PairProblem {
    /// Default box `8 × 10√ε` at the default resolution.
    pub fn new(alpha: f64, epsilon: f64) -> Result<Self> {
        Self::with_resolution(alpha, epsilon, DEFAULT_NX, DEFAULT_NY)
    }

    pub fn with_resolution(alpha: f64, epsilon: f64, nx: usize, ny: usize) -> Result<Self> {
        if !(epsilon > 0.0 && epsilon.is_finite()) {
            return Err(Error::Domain(format!("anisotropy must be positive, got {epsilon}")));
        }
        if !alpha.is_finite() {
            return Err(Error::Domain("statistics parameter must be finite".into()));
        }
        let grid = Grid2D::new(nx, ny, DEFAULT_HALF_WIDTH_X, DEFAULT_TRANSVERSE_WIDTHS * epsilon.sqrt())?;
        Ok(PairProblem { alpha, epsilon, grid })
    }

    pub fn with_box(mut self, lx: f64, ly: f64) -> Result<Self> {
        self.grid = Grid2D::new(self.grid.nx, self.grid.ny, lx, ly)?;
        Ok(self)
    }

    /// Same box with both spacings halved.
    pub fn refined(&self) -> Self {
        let mut p = *self;
        p.grid.nx *= 2;
        p.grid.ny *= 2;
        p
    }

    /// Same box with both spacings doubled; needs counts divisible by 4.
    pub fn coarsened(&self) -> Result<Self> {
        let mut p = *self;
        p.grid = Grid2D::new(p.grid.nx / 2, p.grid.ny / 2, p.grid.half_width.0, p.grid.half_width.1)?;
        if p.grid.nx * 2 != self.grid.nx || p.grid.ny * 2 != self.grid.ny {
            return Err(Error::Configuration("coarsening needs point counts divisible by 4".into()));
        }
        Ok(p)
    }

    /// Distance of α to the nearest even integer; near the flux the relative
    /// wavefunctions behave like `r^γ`.
    pub fn flux_exponent(&self) -> f64 {
        let r = self.alpha.rem_euclid(2.0);
        r.min(2.0 - r)
    }

    /// Expected order of the grid error, `min(2, 2γ)`, or 2 without flux.
    pub fn convergence_order(&self) -> f64 {
        let g = self.flux_exponent();
        if g == 0.0 {
            2.0
        } else {
            (2.0 * g).min(2.0)
        }
    }

    pub fn transverse_energy(&self) -> f64 {
        1.0 / self.epsilon
    }
}

pub fn build_relative_hamiltonian(p: &PairProblem) -> Result<SparseHermitianOperator> {
    let mut t = magnetic_laplacian_triplets(&p.grid, p.alpha, 2.0)?;
    let inv_eps2 = 1.0 / (p.epsilon * p.epsilon);
    for (k, q) in p.grid.points().enumerate() {
        t.push((k, k, C64::new(0.5 * q.x * q.x + 0.5 * q.y * q.y * inv_eps2, 0.0)));
    }
    SparseHermitianOperator::from_triplets(p.grid.len(), t)
}

/// Result of the plaquette-flux audit of a grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FluxAudit {
    /// Flux through the plaquette around the origin.
    pub central_flux: f64,
    /// Largest `|flux|` through any other plaquette.
    pub max_stray_flux: f64,
    pub plaquettes: usize,
}

/// Sum the link phases around every plaquette.
pub fn flux_audit(grid: &Grid2D, alpha: f64) -> Result<FluxAudit> {
    let (ci, cj) = (grid.nx / 2 - 1, grid.ny / 2 - 1);
    let mut central = 0.0;
    let mut stray: f64 = 0.0;
    for i in 0..grid.nx - 1 {
        for j in 0..grid.ny - 1 {
            let c = [grid.point(i, j), grid.point(i + 1, j), grid.point(i + 1, j + 1), grid.point(i, j + 1)];
            let mut flux = 0.0;
            for k in 0..4 {
                flux += peierls_link_phase(c[k], c[(k + 1) % 4], alpha)?;
            }
            if (i, j) == (ci, cj) {
                central = flux;
            } else {
                stray = stray.max(flux.abs());
            }
        }
    }
    Ok(FluxAudit {
        central_flux: central,
        max_stray_flux: stray,
        plaquettes: (grid.nx - 1) * (grid.ny - 1),
    })
}

/// An eigenpair of the relative operator.
#[derive(Debug, Clone, PartialEq)]
pub struct RelativeState {
    /// Grid values with unit Euclidean norm, in [`Grid2D`] storage order.
    pub values: Vec<C64>,
    pub eigenvalue: f64,
    /// `+1` (bosonic) or `−1`.
    pub parity: i8,
    /// `⟨ψ, Pψ⟩`; close to ±1 for a properly resolved state.
    pub parity_expectation: f64,
    pub residual: f64,
}

/// Rotate eigenvectors inside each near-degenerate cluster so that each has
/// definite parity, then recompute Rayleigh quotients and residuals.
pub(crate) fn resolve_parity(
    op: &dyn HermitianOperator,
    values: &[f64],
    vectors: &[Vec<C64>],
    reflect: impl Fn(&[C64]) -> Vec<C64>,
    cluster_gap: f64,
) -> Vec<RelativeState> {
    let mut out = Vec::with_capacity(values.len());
    let n = op.dim();
    let mut start = 0;
    while start < values.len() {
        let mut end = start + 1;
        while end < values.len() && values[end] - values[end - 1] <= cluster_gap * values[end].abs().max(1.0) {
            end += 1;
        }
        let block = &vectors[start..end];
        let mirrored: Vec<Vec<C64>> = block.iter().map(|v| reflect(v)).collect();
        let c = block.len();
        let m = DMatrix::<C64>::from_fn(c, c, |a, b| inner(&block[a], &mirrored[b]));
        let m = (&m + m.adjoint()) * C64::new(0.5, 0.0);
        let eig = SymmetricEigen::new(m);
        for col in 0..c {
            let mut v = vec![C64::new(0.0, 0.0); n];
            for (a, b) in block.iter().enumerate() {
                let w = eig.eigenvectors[(a, col)];
                for (vi, bi) in v.iter_mut().zip(b) {
                    *vi += w * bi;
                }
            }
            let s = 1.0 / norm(&v);
            v.iter_mut().for_each(|z| *z *= s);
            let mut av = vec![C64::new(0.0, 0.0); n];
            op.apply(&v, &mut av);
            let lam = inner(&v, &av).re;
            let residual = av.iter().zip(&v).map(|(a, b)| (a - b * lam).norm_sqr()).sum::<f64>().sqrt();
            let pe = inner(&v, &reflect(&v)).re;
            out.push(RelativeState {
                values: v,
                eigenvalue: lam,
                parity: if pe >= 0.0 { 1 } else { -1 },
                parity_expectation: pe,
                residual,
            });
        }
        start = end;
    }
    out.sort_by(|a, b| a.eigenvalue.total_cmp(&b.eigenvalue));
    out
}

/// Lowest relative eigenpairs with parity labels.
#[derive(Debug, Clone, PartialEq)]
pub struct RelativeSpectrum {
    pub problem: PairProblem,
    /// Ascending; both parities.
    pub states: Vec<RelativeState>,
    /// Operator applications used by the solver.
    pub iterations: usize,
    /// Every requested pair met the tolerance.
    pub complete: bool,
}

impl RelativeSpectrum {
    /// The bosonic sector.
    pub fn even(&self) -> impl Iterator<Item = &RelativeState> {
        self.states.iter().filter(|s| s.parity > 0)
    }

    pub fn ground_even(&self) -> Option<&RelativeState> {
        self.even().next()
    }

    /// Lowest even eigenvalue minus the transverse energy `1/ε`.
    pub fn shifted_ground(&self) -> Option<f64> {
        self.ground_even().map(|s| s.eigenvalue - self.problem.transverse_energy())
    }
}

/// Solver settings shared by the pair studies.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveSettings {
    pub k: usize,
    pub tol: f64,
    pub seed: u64,
    pub max_iter: usize,
}

impl Default for SolveSettings {
    fn default() -> Self {
        SolveSettings {
            k: 4,
            tol: 1e-7,
            seed: 2024,
            max_iter: 200_000,
        }
    }
}

pub fn relative_spectrum(p: &PairProblem, s: SolveSettings) -> Result<RelativeSpectrum> {
    let op = build_relative_hamiltonian(p)?;
    let res = lowest_eigenpairs(&op, LanczosOptions::new(s.k).tol(s.tol).seed(s.seed).max_iter(s.max_iter))?;
    let complete = res.is_complete();
    let states = resolve_parity(&op, &res.eigenvalues, &res.eigenvectors, |v| p.grid.reflect(v), 1e-6);
    Ok(RelativeSpectrum {
        problem: *p,
        states,
        iterations: res.iterations,
        complete,
    })
}

/// `|⟨ψ, T⟩|²` with the normalized limit profile
/// `T = e^{−iαS(r)}·|x|e^{−x²/4}·e^{−y²/(4ε)}`.
pub fn trial_overlap(state: &RelativeState, p: &PairProblem) -> Result<f64> {
    let mut t = Vec::with_capacity(p.grid.len());
    for q in p.grid.points() {
        let s = phase_s(q)?;
        let amp = q.x.abs() * (-q.x * q.x / 4.0).exp() * (-q.y * q.y / (4.0 * p.epsilon)).exp();
        t.push(C64::from_polar(amp, -p.alpha * s));
    }
    let nt = norm(&t);
    let nv = norm(&state.values);
    Ok((inner(&state.values, &t).norm() / (nt * nv)).powi(2))
}

/// Fraction of `|ψ|²` in the strip `|x| < η`.
pub fn diagonal_mass(state: &RelativeState, p: &PairProblem, eta: f64) -> Result<f64> {
    if !(eta > 0.0 && eta < p.grid.half_width.0) {
        return Err(Error::Domain(format!("strip half-width {eta} outside (0, L_x)")));
    }
    let total = p.grid.mass_where(&state.values, |_| true);
    Ok(p.grid.mass_where(&state.values, |q| q.x.abs() < eta) / total)
}

/// Two-grid extrapolation for an error of order `h^order`; `fine` uses half
/// the spacing of `coarse`.
pub fn richardson(coarse: f64, fine: f64, order: f64) -> f64 {
    fine + (fine - coarse) / (2f64.powf(order) - 1.0)
}

/// One row of the convergence table.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceRow {
    pub alpha: f64,
    pub epsilon: f64,
    pub resolution: (usize, usize),
    /// Lowest even relative eigenvalue minus `1/ε`.
    pub shifted: f64,
    /// `|shifted − 3|`.
    pub deviation: f64,
    /// Two-grid value from this grid and the grid with doubled spacing.
    pub extrapolated: Option<f64>,
    pub overlap: f64,
    /// Fraction of `|ψ|²` with `|x| < √ε`.
    pub diagonal_mass: f64,
    pub residual: f64,
    pub complete: bool,
}

/// Pair-study options beyond the solver settings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StudyOptions {
    pub resolution: (usize, usize),
    /// Longitudinal half-width; the transverse one stays `10√ε`.
    pub half_width_x: f64,
    pub solve: SolveSettings,
    /// Also solve on the coarsened grid and extrapolate.
    pub extrapolate: bool,
}

impl Default for StudyOptions {
    fn default() -> Self {
        StudyOptions {
            resolution: (DEFAULT_NX, DEFAULT_NY),
            half_width_x: DEFAULT_HALF_WIDTH_X,
            solve: SolveSettings::default(),
            extrapolate: false,
        }
    }
}

/// Solve one `(α, ε)` point and derive every diagnostic of the study.
pub fn study_point(alpha: f64, epsilon: f64, o: StudyOptions) -> Result<ConvergenceRow> {
    let p = PairProblem::with_resolution(alpha, epsilon, o.resolution.0, o.resolution.1)?;
    let p = p.with_box(o.half_width_x, p.grid.half_width.1)?;
    let spec = relative_spectrum(&p, o.solve)?;
    let g = spec
        .ground_even()
        .ok_or_else(|| Error::Contract(format!("no even state among the lowest {} at α={alpha}, ε={epsilon}", o.solve.k)))?;
    let shifted = g.eigenvalue - p.transverse_energy();
    let mut complete = spec.complete;
    let extrapolated = if o.extrapolate {
        let c = p.coarsened()?;
        let cs = relative_spectrum(&c, o.solve)?;
        complete &= cs.complete;
        cs.shifted_ground().map(|e| richardson(e, shifted, p.convergence_order()))
    } else {
        None
    };
    Ok(ConvergenceRow {
        alpha,
        epsilon,
        resolution: o.resolution,
        shifted,
        deviation: (shifted - 3.0).abs(),
        extrapolated,
        overlap: trial_overlap(g, &p)?,
        diagonal_mass: diagonal_mass(g, &p, epsilon.sqrt())?,
        residual: g.residual,
        complete,
    })
}

/// The `(α, ε)` table, α-major in input order. `epsilons` must be
/// descending.
pub fn convergence_study(alphas: &[f64], epsilons: &[f64], o: StudyOptions) -> Result<Vec<ConvergenceRow>> {
    if epsilons.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::Configuration("anisotropies must be listed in descending order".into()));
    }
    let mut rows = Vec::with_capacity(alphas.len() * epsilons.len());
    for &a in alphas {
        for &e in epsilons {
            rows.push(study_point(a, e, o)?);
        }
    }
    Ok(rows)
}
