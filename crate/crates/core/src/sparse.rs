//! Compressed-row complex Hermitian operators and a thick-restart Lanczos
//! eigensolver for their lowest eigenpairs.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};

pub type C64 = Complex64;

/// Rows per parallel task in `matvec`; each row is reduced sequentially so
/// results do not depend on the thread count.
const ROW_CHUNK: usize = 4096;

/// Anything that can apply a Hermitian matrix to a vector.
pub trait HermitianOperator: Sync {
    fn dim(&self) -> usize;
    /// `y ← A x`; both slices have length `dim()`.
    fn apply(&self, x: &[C64], y: &mut [C64]);
}

/// Hermitian matrix in compressed-row storage with sorted column indices.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseHermitianOperator {
    dim: usize,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<C64>,
}

impl SparseHermitianOperator {
    /// Assemble from `(row, col, value)` triplets; duplicates are summed.
    /// Fails unless the stored entries satisfy `A = A†` to round-off.
    pub fn from_triplets(dim: usize, mut triplets: Vec<(usize, usize, C64)>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::Contract("operator dimension must be positive".into()));
        }
        if let Some(&(i, j, _)) = triplets.iter().find(|t| t.0 >= dim || t.1 >= dim) {
            return Err(Error::Contract(format!("entry ({i}, {j}) outside a {dim}x{dim} operator")));
        }
        triplets.sort_unstable_by_key(|t| (t.0, t.1));
        let mut row_ptr = vec![0usize; dim + 1];
        let mut cols = Vec::with_capacity(triplets.len());
        let mut vals: Vec<C64> = Vec::with_capacity(triplets.len());
        let mut last: Option<(usize, usize)> = None;
        for (i, j, v) in triplets {
            if last == Some((i, j)) {
                *vals.last_mut().unwrap() += v;
                continue;
            }
            cols.push(j);
            vals.push(v);
            row_ptr[i + 1] += 1;
            last = Some((i, j));
        }
        for i in 0..dim {
            row_ptr[i + 1] += row_ptr[i];
        }
        let op = SparseHermitianOperator { dim, row_ptr, cols, vals };
        let scale = op.max_abs().max(f64::MIN_POSITIVE);
        let defect = op.hermiticity_defect();
        if defect > 1e-12 * scale {
            return Err(Error::Contract(format!(
                "stored entries are not Hermitian (defect {defect:e})"
            )));
        }
        Ok(op)
    }

    pub fn identity(dim: usize) -> Self {
        Self::diagonal(&vec![1.0; dim]).expect("identity of positive dimension")
    }

    pub fn diagonal(values: &[f64]) -> Result<Self> {
        let t = values.iter().enumerate().map(|(i, &v)| (i, i, C64::new(v, 0.0))).collect();
        Self::from_triplets(values.len(), t)
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    pub fn max_abs(&self) -> f64 {
        self.vals.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// Stored entry `A[i][j]` (zero when absent).
    pub fn entry(&self, i: usize, j: usize) -> C64 {
        let (lo, hi) = (self.row_ptr[i], self.row_ptr[i + 1]);
        match self.cols[lo..hi].binary_search(&j) {
            Ok(p) => self.vals[lo + p],
            Err(_) => C64::new(0.0, 0.0),
        }
    }

    /// `max |A[i][j] − conj(A[j][i])|` over stored entries.
    pub fn hermiticity_defect(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 0..self.dim {
            for p in self.row_ptr[i]..self.row_ptr[i + 1] {
                let j = self.cols[p];
                worst = worst.max((self.vals[p] - self.entry(j, i).conj()).norm());
            }
        }
        worst
    }

    /// Iterate over stored `(row, col, value)` entries.
    pub fn entries(&self) -> impl Iterator<Item = (usize, usize, C64)> + '_ {
        (0..self.dim).flat_map(move |i| {
            (self.row_ptr[i]..self.row_ptr[i + 1]).map(move |p| (i, self.cols[p], self.vals[p]))
        })
    }

    /// `D A D` for a real diagonal `D`.
    pub fn scaled_symmetric(&self, d: &[f64]) -> Result<Self> {
        if d.len() != self.dim {
            return Err(Error::Contract("scaling length differs from operator dimension".into()));
        }
        let mut out = self.clone();
        for i in 0..self.dim {
            for p in out.row_ptr[i]..out.row_ptr[i + 1] {
                out.vals[p] *= d[i] * d[out.cols[p]];
            }
        }
        Ok(out)
    }

    pub fn matvec(&self, v: &[C64]) -> Result<Vec<C64>> {
        if v.len() != self.dim {
            return Err(Error::Contract(format!(
                "vector of length {} applied to a {}-dimensional operator",
                v.len(),
                self.dim
            )));
        }
        let mut y = vec![C64::new(0.0, 0.0); self.dim];
        self.apply(v, &mut y);
        Ok(y)
    }

    fn row_dot(&self, i: usize, x: &[C64]) -> C64 {
        let mut acc = C64::new(0.0, 0.0);
        for p in self.row_ptr[i]..self.row_ptr[i + 1] {
            acc += self.vals[p] * x[self.cols[p]];
        }
        acc
    }
}

impl HermitianOperator for SparseHermitianOperator {
    fn dim(&self) -> usize {
        self.dim
    }

    fn apply(&self, x: &[C64], y: &mut [C64]) {
        if self.dim >= 2 * ROW_CHUNK {
            y.par_chunks_mut(ROW_CHUNK).enumerate().for_each(|(c, chunk)| {
                let base = c * ROW_CHUNK;
                for (k, out) in chunk.iter_mut().enumerate() {
                    *out = self.row_dot(base + k, x);
                }
            });
        } else {
            for (i, out) in y.iter_mut().enumerate() {
                *out = self.row_dot(i, x);
            }
        }
    }
}

/// `⟨u, v⟩ = Σ conj(uᵢ) vᵢ`
pub fn inner(u: &[C64], v: &[C64]) -> C64 {
    let mut acc = C64::new(0.0, 0.0);
    for (a, b) in u.iter().zip(v) {
        acc += a.conj() * b;
    }
    acc
}

pub fn norm(v: &[C64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

fn axpy(alpha: C64, x: &[C64], y: &mut [C64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

fn scale(v: &mut [C64], s: f64) {
    for z in v.iter_mut() {
        *z *= s;
    }
}

/// Seeded unit vector with independent uniform real and imaginary parts.
pub fn random_unit_vector(dim: usize, rng: &mut ChaCha8Rng) -> Vec<C64> {
    let mut v: Vec<C64> = (0..dim)
        .map(|_| C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
        .collect();
    let n = norm(&v);
    scale(&mut v, 1.0 / n);
    v
}

/// `|⟨u, Av⟩ − conj⟨v, Au⟩|` for seeded random `u, v`.
pub fn hermitian_pairing_defect(op: &dyn HermitianOperator, seed: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = op.dim();
    let u = random_unit_vector(n, &mut rng);
    let v = random_unit_vector(n, &mut rng);
    let mut au = vec![C64::new(0.0, 0.0); n];
    let mut av = vec![C64::new(0.0, 0.0); n];
    op.apply(&u, &mut au);
    op.apply(&v, &mut av);
    (inner(&u, &av) - inner(&v, &au).conj()).norm()
}

/// Settings of [`lowest_eigenpairs`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LanczosOptions {
    /// Number of lowest eigenpairs wanted.
    pub k: usize,
    /// Absolute residual tolerance `‖Av − λv‖`.
    pub tol: f64,
    /// Budget of operator applications over all restarts and probes.
    pub max_iter: usize,
    pub seed: u64,
    /// Krylov basis size per restart cycle; 0 picks a default.
    pub basis_size: usize,
}

impl LanczosOptions {
    pub fn new(k: usize) -> Self {
        LanczosOptions {
            k,
            tol: 1e-8,
            max_iter: 200_000,
            seed: 0x5eed,
            basis_size: 0,
        }
    }

    pub fn tol(mut self, tol: f64) -> Self {
        self.tol = tol;
        self
    }

    pub fn seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn max_iter(mut self, max_iter: usize) -> Self {
        self.max_iter = max_iter;
        self
    }

    pub fn basis_size(mut self, m: usize) -> Self {
        self.basis_size = m;
        self
    }
}

/// Lowest eigenpairs with residual certificates.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenResult {
    /// Ascending.
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: Vec<Vec<C64>>,
    /// `‖Av − λv‖` recomputed from the returned pairs.
    pub residuals: Vec<f64>,
    /// Operator applications used.
    pub iterations: usize,
    pub seed: u64,
    /// Number of leading pairs meeting the tolerance. Equal to the number of
    /// requested pairs on success; smaller when `max_iter` ran out.
    pub converged: usize,
}

impl EigenResult {
    pub fn is_complete(&self) -> bool {
        self.converged == self.eigenvalues.len()
    }
}

/// Ritz pairs from one restarted Lanczos run.
struct RunOutcome {
    values: Vec<f64>,
    vectors: Vec<Vec<C64>>,
    converged: bool,
    matvecs: usize,
}

/// The `k` smallest eigenpairs of a Hermitian operator.
///
/// Thick-restart Lanczos with full (twice-iterated Gram–Schmidt)
/// reorthogonalization. A single Krylov sequence sees only one direction of
/// an exactly degenerate eigenspace, so once `k` pairs converge the solver
/// repeats the run in the orthogonal complement of the pairs found; any
/// eigenvalue it uncovers below the current `k`-th is merged in. Identical
/// inputs and seed give bitwise-identical output.
pub fn lowest_eigenpairs(op: &dyn HermitianOperator, opts: LanczosOptions) -> Result<EigenResult> {
    let n = op.dim();
    if opts.k == 0 || opts.k > n {
        return Err(Error::Contract(format!("cannot compute {} eigenpairs of a {n}-dimensional operator", opts.k)));
    }
    if !(opts.tol > 0.0) {
        return Err(Error::Contract("tolerance must be positive".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let cluster = 10.0 * opts.tol;
    let mut budget = opts.max_iter;

    let first = restarted_lanczos(op, opts.k, opts, &[], &mut rng, budget);
    budget = budget.saturating_sub(first.matvecs);
    let mut used = first.matvecs;
    let mut values = first.values;
    let mut vectors = first.vectors;
    let mut complete = first.converged;

    while complete && values.len() + 1 <= n && budget > 0 {
        let probe = restarted_lanczos(op, 1, opts, &vectors, &mut rng, budget);
        budget = budget.saturating_sub(probe.matvecs);
        used += probe.matvecs;
        if !probe.converged {
            complete = false;
            break;
        }
        let kth = *values.last().unwrap();
        if probe.values[0] < kth - cluster || values.len() < opts.k {
            let mut pairs: Vec<(f64, Vec<C64>)> = values.into_iter().zip(vectors).collect();
            pairs.push((probe.values[0], probe.vectors.into_iter().next().unwrap()));
            pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
            pairs.truncate(opts.k);
            (values, vectors) = pairs.into_iter().unzip();
        } else {
            break;
        }
    }

    let mut residuals = Vec::with_capacity(values.len());
    let mut av = vec![C64::new(0.0, 0.0); n];
    for (lam, v) in values.iter().zip(&vectors) {
        op.apply(v, &mut av);
        let r: f64 = av.iter().zip(v).map(|(a, b)| (a - b * lam).norm_sqr()).sum::<f64>().sqrt();
        residuals.push(r);
    }
    used += values.len();
    let converged = residuals.iter().take_while(|&&r| r <= opts.tol).count();
    let converged = if complete { converged } else { converged.min(values.len().saturating_sub(1)) };
    Ok(EigenResult {
        eigenvalues: values,
        eigenvectors: vectors,
        residuals,
        iterations: used,
        seed: opts.seed,
        converged,
    })
}

/// Orthogonalize `w` against `locked` and `basis` with up to two
/// Gram–Schmidt passes, returning the accumulated coefficients `⟨bᵢ, w⟩` for
/// the `basis` vectors.
fn orthogonalize(w: &mut [C64], locked: &[Vec<C64>], basis: &[Vec<C64>]) -> Vec<C64> {
    let mut coeff = vec![C64::new(0.0, 0.0); basis.len()];
    let before = norm(w);
    for pass in 0..2 {
        for q in locked {
            let c = inner(q, w);
            axpy(-c, q, w);
        }
        let c: Vec<C64> = basis.iter().map(|b| inner(b, w)).collect();
        for (b, &ci) in basis.iter().zip(&c) {
            axpy(-ci, b, w);
        }
        for (acc, ci) in coeff.iter_mut().zip(c) {
            *acc += ci;
        }
        // second pass only when cancellation was severe
        if pass == 0 && norm(w) > 0.717 * before {
            break;
        }
    }
    coeff
}

fn restarted_lanczos(
    op: &dyn HermitianOperator,
    nev: usize,
    opts: LanczosOptions,
    locked: &[Vec<C64>],
    rng: &mut ChaCha8Rng,
    budget: usize,
) -> RunOutcome {
    let n = op.dim();
    let free = n - locked.len();
    let nev = nev.min(free);
    let default_m = (3 * nev).max(nev + 60);
    let m_req = if opts.basis_size > 0 { opts.basis_size.max(nev + 2) } else { default_m };
    let m = m_req.min(free);
    let keep = if m == free { m } else { (nev + (m - nev) / 2).min(m - 1) };

    let zero = C64::new(0.0, 0.0);
    let mut h = DMatrix::<C64>::zeros(m, m);
    let mut basis: Vec<Vec<C64>> = Vec::with_capacity(m + 1);
    let mut start = random_unit_vector(n, rng);
    orthogonalize(&mut start, locked, &[]);
    let s = norm(&start);
    scale(&mut start, 1.0 / s);
    basis.push(start);

    let mut matvecs = 0usize;
    let mut j0 = 0usize;
    let mut w = vec![zero; n];
    loop {
        // expand the basis to m vectors
        let mut beta_last = 0.0;
        let mut size = m;
        for j in j0..m {
            op.apply(&basis[j], &mut w);
            matvecs += 1;
            let coeff = orthogonalize(&mut w, locked, &basis);
            for (i, c) in coeff.into_iter().enumerate() {
                h[(i, j)] = c;
            }
            let mut beta = norm(&w);
            let mut next = w.clone();
            if beta <= 1e-13 * h[(j, j)].norm().max(1.0) {
                // invariant subspace: continue with a fresh direction
                beta = 0.0;
                next = random_unit_vector(n, rng);
                orthogonalize(&mut next, locked, &basis);
                let nn = norm(&next);
                if nn < 1e-8 {
                    size = j + 1;
                    beta_last = 0.0;
                    break;
                }
                scale(&mut next, 1.0 / nn);
            } else {
                scale(&mut next, 1.0 / beta);
            }
            if j + 1 < m {
                h[(j + 1, j)] = C64::new(beta, 0.0);
            }
            beta_last = beta;
            basis.push(next);
        }

        let hs = {
            let sub = h.view((0, 0), (size, size)).into_owned();
            (&sub + sub.adjoint()) * C64::new(0.5, 0.0)
        };

        let eig = SymmetricEigen::new(hs);
        let mut order: Vec<usize> = (0..size).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
        let theta: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i]).collect();
        let y = DMatrix::from_fn(size, size, |r, c| eig.eigenvectors[(r, order[c])]);
        let est: Vec<f64> = (0..size).map(|i| beta_last * y[(size - 1, i)].norm()).collect();

        let want = nev.min(size);
        // include the whole cluster around the last wanted value
        let mut need = want;
        while need < size && theta[need] - theta[want - 1] < 10.0 * opts.tol {
            need += 1;
        }
        let converged = est[..need].iter().all(|&r| r <= opts.tol);
        let exhausted = matvecs >= budget;
        if converged || exhausted || size < m {
            let vectors = (0..want).map(|c| combine(&basis[..size], &y, c)).collect();
            return RunOutcome {
                values: theta[..want].to_vec(),
                vectors,
                converged: converged || size < m,
                matvecs,
            };
        }

        // thick restart: keep `keep` Ritz vectors and the residual direction
        let residual_dir = basis.pop().expect("basis holds m+1 vectors");
        let kept: Vec<Vec<C64>> = (0..keep).map(|c| combine(&basis[..size], &y, c)).collect();
        basis = kept;
        basis.push(residual_dir);
        h.fill(zero);
        for i in 0..keep {
            h[(i, i)] = C64::new(theta[i], 0.0);
            let b = y[(size - 1, i)] * beta_last;
            h[(keep, i)] = b;
            h[(i, keep)] = b.conj();
        }
        j0 = keep;
    }
}

/// `Σ_r basis[r] · y[r][col]`
fn combine(basis: &[Vec<C64>], y: &DMatrix<C64>, col: usize) -> Vec<C64> {
    let n = basis[0].len();
    let mut out = vec![C64::new(0.0, 0.0); n];
    for (r, b) in basis.iter().enumerate() {
        axpy(y[(r, col)], b, &mut out);
    }
    out
}
