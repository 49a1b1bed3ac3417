//! Harmonic-oscillator eigenfunctions and Gauss–Hermite quadrature.
//!
//! Modes are eigenfunctions of `−∂² + x²` with eigenvalue `2n+1`, evaluated
//! by the normalized three-term recurrence
//! `v_{n+1} = √(2/(n+1)) x v_n − √(n/(n+1)) v_{n−1}`, which never forms the
//! raw Hermite polynomials and so stays finite far beyond `n ≈ 30`.

use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Largest mode index supported by the recurrence.
pub const MAX_MODE: usize = 200;
/// Largest Gauss–Hermite rule.
pub const MAX_RULE: usize = 200;
/// Quadrature degree used for inner products of modes.
pub const DEFAULT_RULE: usize = 128;

/// `π^(−1/4)`
pub fn pi_quarter_inv() -> f64 {
    PI.powf(-0.25)
}

/// Values `v_0(x), …, v_n(x)` of the normalized Hermite functions.
pub fn hermite_functions(n: usize, x: f64) -> Vec<f64> {
    scaled_hermite(n, x, (-0.5 * x * x).exp())
}

/// Values of the polynomial parts `v_k(x) e^{x²/2}`, `k = 0..=n`; these are
/// the integrands needed by Gauss–Hermite quadrature.
pub fn hermite_polynomial_parts(n: usize, x: f64) -> Vec<f64> {
    scaled_hermite(n, x, 1.0)
}

fn scaled_hermite(n: usize, x: f64, envelope: f64) -> Vec<f64> {
    let mut v = Vec::with_capacity(n + 1);
    v.push(pi_quarter_inv() * envelope);
    if n >= 1 {
        v.push(std::f64::consts::SQRT_2 * x * v[0]);
    }
    for k in 1..n {
        let next = (2.0 / (k as f64 + 1.0)).sqrt() * x * v[k] - (k as f64 / (k as f64 + 1.0)).sqrt() * v[k - 1];
        v.push(next);
    }
    v
}

/// One-dimensional oscillator eigenfunction `v_n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OscillatorMode {
    index: usize,
}

impl OscillatorMode {
    pub fn index(&self) -> usize {
        self.index
    }

    /// `2n + 1`
    pub fn eigenvalue(&self) -> f64 {
        (2 * self.index + 1) as f64
    }

    /// `(−1)ⁿ`
    pub fn parity(&self) -> i32 {
        if self.index % 2 == 0 {
            1
        } else {
            -1
        }
    }

    pub fn value(&self, x: f64) -> f64 {
        hermite_functions(self.index, x)[self.index]
    }

    /// `v_n'(x) = √(n/2) v_{n−1}(x) − √((n+1)/2) v_{n+1}(x)`
    pub fn derivative(&self, x: f64) -> f64 {
        let n = self.index;
        let v = hermite_functions(n + 1, x);
        let lower = if n > 0 { (n as f64 / 2.0).sqrt() * v[n - 1] } else { 0.0 };
        lower - ((n as f64 + 1.0) / 2.0).sqrt() * v[n + 1]
    }
}

pub fn ho_mode(n: usize) -> Result<OscillatorMode> {
    if n > MAX_MODE {
        return Err(Error::Capacity(format!("mode index {n} exceeds {MAX_MODE}")));
    }
    Ok(OscillatorMode { index: n })
}

/// Ground state of the transverse oscillator `−∂_y² + y²/ε²`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransverseGround {
    epsilon: f64,
}

impl TransverseGround {
    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    /// `e_ε = 1/ε`
    pub fn energy(&self) -> f64 {
        1.0 / self.epsilon
    }

    /// `u_ε(y) = (πε)^(−1/4) exp(−y²/(2ε))`
    pub fn value(&self, y: f64) -> f64 {
        (PI * self.epsilon).powf(-0.25) * (-y * y / (2.0 * self.epsilon)).exp()
    }

    /// `u_ε'(y) / u_ε(y) = −y/ε`
    pub fn log_derivative(&self, y: f64) -> f64 {
        -y / self.epsilon
    }
}

pub fn transverse_ground(epsilon: f64) -> Result<TransverseGround> {
    if !(epsilon > 0.0) || !epsilon.is_finite() {
        return Err(Error::Domain(format!("anisotropy must be positive, got {epsilon}")));
    }
    Ok(TransverseGround { epsilon })
}

/// Gauss–Hermite rule for the weight `exp(−x²)`.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussHermite {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussHermite {
    /// `Σ wᵢ f(xᵢ) ≈ ∫ f(x) e^{−x²} dx`
    pub fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(&x, &w)| w * f(x)).sum()
    }
}

/// Nodes (ascending) and weights of the `n`-point Gauss–Hermite rule.
///
/// Newton iteration on the orthonormal recurrence, seeded with the usual
/// asymptotic guesses for the largest roots.
pub fn gauss_hermite(n: usize) -> Result<GaussHermite> {
    if n == 0 || n > MAX_RULE {
        return Err(Error::Capacity(format!("Gauss-Hermite order {n} outside 1..={MAX_RULE}")));
    }
    // Jacobi-matrix eigenvalues as starting points, polished by Newton.
    let jacobi = nalgebra::DMatrix::<f64>::from_fn(n, n, |i, j| {
        if i + 1 == j || j + 1 == i {
            (i.max(j) as f64 / 2.0).sqrt()
        } else {
            0.0
        }
    });
    let mut guesses: Vec<f64> = nalgebra::SymmetricEigen::new(jacobi).eigenvalues.iter().copied().collect();
    guesses.sort_by(|a, b| b.total_cmp(a));
    let m = n.div_ceil(2);
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..m {
        let mut z = guesses[i];
        for _ in 0..10 {
            let (p, d) = orthonormal_hermite_and_derivative(n, z);
            let dz = p / d;
            z -= dz;
            if dz.abs() <= 1e-15 * z.abs().max(1.0) {
                break;
            }
        }
        let (_, dp) = orthonormal_hermite_and_derivative(n, z);
        x[i] = z;
        x[n - 1 - i] = -z;
        w[i] = 2.0 / (dp * dp);
        w[n - 1 - i] = w[i];
    }
    if n % 2 == 1 {
        x[m - 1] = 0.0;
    }
    x.reverse();
    w.reverse();
    Ok(GaussHermite { nodes: x, weights: w })
}

/// Orthonormal Hermite polynomial `p_n(z)` (weight `e^{−z²}`) and its
/// derivative `√(2n) p_{n−1}(z)`.
fn orthonormal_hermite_and_derivative(n: usize, z: f64) -> (f64, f64) {
    let mut p1 = pi_quarter_inv();
    let mut p2 = 0.0;
    for j in 1..=n {
        let jf = j as f64;
        let p3 = p2;
        p2 = p1;
        p1 = z * (2.0 / jf).sqrt() * p2 - ((jf - 1.0) / jf).sqrt() * p3;
    }
    (p1, (2.0 * n as f64).sqrt() * p2)
}

/// `∫ v_a v_b dx` by Gauss–Hermite quadrature of the polynomial parts.
pub fn mode_overlap(a: usize, b: usize, rule: &GaussHermite) -> f64 {
    let top = a.max(b);
    rule.integrate(|x| {
        let p = hermite_polynomial_parts(top, x);
        p[a] * p[b]
    })
}
