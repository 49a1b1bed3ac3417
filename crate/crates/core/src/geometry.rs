//! Pointwise geometry of the magnetic gauge picture.
//!
//! Every anyon sees the others as Aharonov–Bohm fluxes. For a unit flux at
//! the origin the vector potential is `A₀(r) = r^⊥ / |r|²`; the N-body
//! potential felt by particle `j` is the sum of `A₀(x_j − x_k)` over `k ≠ j`.
//! This module collects that potential, the singular phases that gauge it
//! away near the horizontal axis, lattice link phases, and the classical
//! Hamilton function obtained by confining the particles to a line.

use std::f64::consts::PI;
use std::ops::{Add, Mul, Neg, Sub};

use crate::error::{Error, Result};

/// A point (or vector) of the plane, in trap units.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Point2 {
    pub x: f64,
    pub y: f64,
}

impl Point2 {
    pub const ORIGIN: Point2 = Point2 { x: 0.0, y: 0.0 };

    pub const fn new(x: f64, y: f64) -> Self {
        Point2 { x, y }
    }

    /// Rotation by +π/2: `(x, y)^⊥ = (−y, x)`.
    pub fn perp(self) -> Self {
        Point2::new(-self.y, self.x)
    }

    pub fn dot(self, other: Point2) -> f64 {
        self.x * other.x + self.y * other.y
    }

    /// z-component of the planar cross product.
    pub fn cross(self, other: Point2) -> f64 {
        self.x * other.y - self.y * other.x
    }

    pub fn norm_sq(self) -> f64 {
        self.dot(self)
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }
}

impl Add for Point2 {
    type Output = Point2;
    fn add(self, rhs: Point2) -> Point2 {
        Point2::new(self.x + rhs.x, self.y + rhs.y)
    }
}

impl Sub for Point2 {
    type Output = Point2;
    fn sub(self, rhs: Point2) -> Point2 {
        Point2::new(self.x - rhs.x, self.y - rhs.y)
    }
}

impl Neg for Point2 {
    type Output = Point2;
    fn neg(self) -> Point2 {
        Point2::new(-self.x, -self.y)
    }
}

impl Mul<Point2> for f64 {
    type Output = Point2;
    fn mul(self, rhs: Point2) -> Point2 {
        Point2::new(self * rhs.x, self * rhs.y)
    }
}

/// Reduce an angle to the branch `(−π, π]`.
pub fn reduce_angle(theta: f64) -> f64 {
    let mut t = theta % (2.0 * PI);
    if t <= -PI {
        t += 2.0 * PI;
    } else if t > PI {
        t -= 2.0 * PI;
    }
    t
}

/// Vector potential of a unit Aharonov–Bohm flux at the origin.
pub fn vector_potential_a0(r: Point2) -> Result<Point2> {
    let n2 = r.norm_sq();
    if n2 == 0.0 {
        return Err(Error::Domain("A0 is singular at the flux position".into()));
    }
    Ok((1.0 / n2) * r.perp())
}

/// Total potential `A(x_j) = Σ_{k≠j} A₀(x_j − x_k)` felt by particle `j`.
pub fn vector_potential(positions: &[Point2], j: usize) -> Result<Point2> {
    let mut acc = Point2::ORIGIN;
    for (k, &xk) in positions.iter().enumerate() {
        if k != j {
            acc = acc + vector_potential_a0(positions[j] - xk)?;
        }
    }
    Ok(acc)
}

/// Exchange angle `φ_jk = arg(a − b)` of the singular gauge transformation,
/// on the branch `(−π, π]`.
pub fn singular_gauge_phase(a: Point2, b: Point2) -> Result<f64> {
    let d = a - b;
    if d.norm_sq() == 0.0 {
        return Err(Error::Domain("exchange angle undefined for coincident points".into()));
    }
    // atan2 returns [−π, π]; −π only for y = −0.0
    Ok(reduce_angle(d.y.atan2(d.x)))
}

/// The singular phase `S(r) = arctan(y/x)`, even under `r → −r`.
pub fn phase_s(r: Point2) -> Result<f64> {
    if r.x == 0.0 {
        return Err(Error::Domain("S is discontinuous on the line x = 0".into()));
    }
    Ok((r.y / r.x).atan())
}

/// Analytic gradient of `S`, obtained through the chain rule of `arctan`.
pub fn grad_phase_s(r: Point2) -> Result<Point2> {
    if r.x == 0.0 {
        return Err(Error::Domain("S is discontinuous on the line x = 0".into()));
    }
    let q = r.y / r.x;
    let d = 1.0 / (1.0 + q * q);
    Ok(Point2::new(-d * r.y / (r.x * r.x), d / r.x))
}

/// `∇S(r) − A₀(r)`, identically zero off the discontinuity line.
pub fn gauge_residual(r: Point2) -> Result<Point2> {
    Ok(grad_phase_s(r)? - vector_potential_a0(r)?)
}

/// `∇S̃(r) − A₀(r)` for the linearized phase `S̃ = y/x`.
///
/// Its norm is `y²/(x²|r|)`, so `|∇S̃ − A₀| ≤ |y|/x²`.
pub fn tilde_gauge_residual(r: Point2) -> Result<Point2> {
    if r.x == 0.0 {
        return Err(Error::Domain("S~ is singular on the line x = 0".into()));
    }
    let grad = Point2::new(-r.y / (r.x * r.x), 1.0 / r.x);
    Ok(grad - vector_potential_a0(r)?)
}

/// Cyclic three-body sum
/// `Σ_cyc (p₁−p₂)^⊥/|p₁−p₂|² · (p₁−p₃)^⊥/|p₁−p₃|²`, equal to `1/(2R²)` with
/// `R` the circumradius of the triangle. Zero for collinear points.
pub fn circumradius_sum(p1: Point2, p2: Point2, p3: Point2) -> Result<f64> {
    let term = |a: Point2, b: Point2, c: Point2| -> Result<f64> {
        let u = a - b;
        let v = a - c;
        let (nu, nv) = (u.norm_sq(), v.norm_sq());
        if nu == 0.0 || nv == 0.0 {
            return Err(Error::Domain("circumradius sum needs distinct points".into()));
        }
        Ok(u.perp().dot(v.perp()) / (nu * nv))
    };
    Ok(term(p1, p2, p3)? + term(p2, p3, p1)? + term(p3, p1, p2)?)
}

/// A lattice link carrying the Peierls phase of `α A₀`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseLink {
    pub from: Point2,
    pub to: Point2,
    /// Phase in radians, reduced to `(−π, π]`.
    pub phase: f64,
}

impl PhaseLink {
    pub fn new(from: Point2, to: Point2, alpha: f64) -> Result<Self> {
        let phase = reduce_angle(peierls_link_phase(from, to, alpha)?);
        Ok(PhaseLink { from, to, phase })
    }

    pub fn reversed(&self) -> Self {
        PhaseLink {
            from: self.to,
            to: self.from,
            phase: reduce_angle(-self.phase),
        }
    }
}

/// `α ∫_a^b A₀ · dl` along the straight segment from `a` to `b`.
///
/// The line integral of `A₀` is the signed angle subtended by the segment at
/// the origin, `atan2(a × b, a · b)`, so the result is exact. Not reduced
/// modulo 2π: `α` times an angle in `(−π, π)`.
pub fn peierls_link_phase(a: Point2, b: Point2, alpha: f64) -> Result<f64> {
    let cross = a.cross(b);
    let dot = a.dot(b);
    if cross == 0.0 && dot <= 0.0 {
        return Err(Error::Domain("link segment passes through the flux".into()));
    }
    Ok(alpha * cross.atan2(dot))
}

/// Term-by-term evaluation of the classical Hamilton function of N charged
/// particles carrying Aharonov–Bohm fluxes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClassicalEnergy {
    /// `Σ_j |p_j|² + |x_j|²`
    pub kinetic_trap: f64,
    /// `2α Σ_{j≠k} p_j · (x_j − x_k)^⊥ / |x_j − x_k|²`
    pub cross: f64,
    /// `α² Σ_{j≠k≠ℓ} (x_j−x_k)^⊥/|x_j−x_k|² · (x_j−x_ℓ)^⊥/|x_j−x_ℓ|²`
    pub three_body: f64,
    /// `α² Σ_{j≠k} 1/|x_j − x_k|²`
    pub two_body: f64,
}

impl ClassicalEnergy {
    pub fn total(&self) -> f64 {
        self.kinetic_trap + self.cross + self.three_body + self.two_body
    }
}

pub fn classical_hamiltonian(
    positions: &[Point2],
    momenta: &[Point2],
    alpha: f64,
) -> Result<ClassicalEnergy> {
    if positions.len() != momenta.len() {
        return Err(Error::Contract(format!(
            "{} positions but {} momenta",
            positions.len(),
            momenta.len()
        )));
    }
    let n = positions.len();
    let mut e = ClassicalEnergy {
        kinetic_trap: 0.0,
        cross: 0.0,
        three_body: 0.0,
        two_body: 0.0,
    };
    for j in 0..n {
        e.kinetic_trap += momenta[j].norm_sq() + positions[j].norm_sq();
        for k in 0..n {
            if k == j {
                continue;
            }
            let ajk = vector_potential_a0(positions[j] - positions[k])
                .map_err(|_| Error::Domain("coincident particle positions".into()))?;
            e.cross += 2.0 * alpha * momenta[j].dot(ajk);
            e.two_body += alpha * alpha * ajk.norm_sq();
            for l in 0..n {
                if l == j || l == k {
                    continue;
                }
                let ajl = vector_potential_a0(positions[j] - positions[l])
                    .map_err(|_| Error::Domain("coincident particle positions".into()))?;
                e.three_body += alpha * alpha * ajk.dot(ajl);
            }
        }
    }
    Ok(e)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn a0_examples() {
        let a = vector_potential_a0(Point2::new(1.0, 0.0)).unwrap();
        assert_eq!(a, Point2::new(0.0, 1.0));
        let a = vector_potential_a0(Point2::new(0.0, 2.0)).unwrap();
        assert!(close(a.x, -0.5, 1e-15) && close(a.y, 0.0, 1e-15));
        assert!(matches!(vector_potential_a0(Point2::ORIGIN), Err(Error::Domain(_))));
    }

    #[test]
    fn a0_is_divergence_and_curl_free_off_origin() {
        let h = 1e-4;
        let p = Point2::new(0.7, -0.4);
        let f = |q: Point2| vector_potential_a0(q).unwrap();
        let dx = (f(p + Point2::new(h, 0.0)) - f(p - Point2::new(h, 0.0))).x / (2.0 * h);
        let dy = (f(p + Point2::new(0.0, h)) - f(p - Point2::new(0.0, h))).y / (2.0 * h);
        assert!((dx + dy).abs() < 1e-7);
        let cx = (f(p + Point2::new(h, 0.0)) - f(p - Point2::new(h, 0.0))).y / (2.0 * h);
        let cy = (f(p + Point2::new(0.0, h)) - f(p - Point2::new(0.0, h))).x / (2.0 * h);
        assert!((cx - cy).abs() < 1e-7);
    }

    #[test]
    fn exchange_angle() {
        let o = Point2::ORIGIN;
        assert!(close(singular_gauge_phase(Point2::new(1.0, 1.0), o).unwrap(), PI / 4.0, 1e-15));
        assert!(close(singular_gauge_phase(Point2::new(0.0, 1.0), o).unwrap(), PI / 2.0, 1e-15));
        assert!(singular_gauge_phase(o, o).is_err());
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..1000 {
            let a = Point2::new(rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0));
            let b = Point2::new(rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0));
            let d = singular_gauge_phase(a, b).unwrap() - singular_gauge_phase(b, a).unwrap();
            assert!(close(d.abs(), PI, 1e-12), "{d}");
        }
    }

    #[test]
    fn phase_s_examples() {
        assert!(close(phase_s(Point2::new(1.0, 1.0)).unwrap(), PI / 4.0, 1e-15));
        assert!(phase_s(Point2::new(0.0, 1.0)).is_err());
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..10_000 {
            let r = Point2::new(rng.random_range(-5.0..5.0), rng.random_range(-5.0..5.0));
            assert_eq!(phase_s(r).unwrap(), phase_s(-r).unwrap());
        }
    }

    #[test]
    fn gauge_residual_vanishes() {
        for r in [Point2::new(1.0, 0.1), Point2::new(-2.0, 3.0)] {
            let g = gauge_residual(r).unwrap();
            assert!(g.norm() < 1e-12);
        }
        assert!(gauge_residual(Point2::new(0.0, 1.0)).is_err());
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..10_000 {
            let r = Point2::new(rng.random_range(-4.0..4.0), rng.random_range(-4.0..4.0));
            // relative to |A0| since both sides blow up near the flux
            let g = gauge_residual(r).unwrap();
            assert!(g.norm() <= 1e-12 * (1.0 + 1.0 / r.norm()));
        }
    }

    #[test]
    fn finite_difference_gradient_of_s_matches_a0() {
        let r = Point2::new(1.0, 0.5);
        let h = 1e-4;
        let s = |q: Point2| phase_s(q).unwrap();
        let g = Point2::new(
            (s(r + Point2::new(h, 0.0)) - s(r - Point2::new(h, 0.0))) / (2.0 * h),
            (s(r + Point2::new(0.0, h)) - s(r - Point2::new(0.0, h))) / (2.0 * h),
        );
        let a = vector_potential_a0(r).unwrap();
        // central differences: error O(h²) with O(1) third derivatives here
        assert!((g - a).norm() < 1e-8);
    }

    #[test]
    fn tilde_residual_bound() {
        assert!(tilde_gauge_residual(Point2::new(1.0, 0.0)).unwrap().norm() == 0.0);
        assert!(tilde_gauge_residual(Point2::new(0.0, 0.3)).is_err());
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..10_000 {
            let x: f64 = rng.random_range(-3.0..3.0);
            if x == 0.0 {
                continue;
            }
            let y = x.abs() * rng.random_range(-1.0..1.0);
            let r = Point2::new(x, y);
            let res = tilde_gauge_residual(r).unwrap().norm();
            // direct evaluation of the closed-form norm as an independent route
            let direct = y * y / (x * x * r.norm());
            assert!((res - direct).abs() <= 1e-12 * (1.0 + direct));
            assert!(res <= 2.0 * y.abs() / (x * x) + 1e-15);
        }
        let small = tilde_gauge_residual(Point2::new(1.0, 0.1)).unwrap().norm();
        let large = tilde_gauge_residual(Point2::new(1.0, 0.5)).unwrap().norm();
        assert!(small < large);
    }

    fn circumradius(a: Point2, b: Point2, c: Point2) -> f64 {
        let (la, lb, lc) = ((b - c).norm(), (a - c).norm(), (a - b).norm());
        let area = 0.5 * (b - a).cross(c - a).abs();
        la * lb * lc / (4.0 * area)
    }

    #[test]
    fn circumradius_identity() {
        let eq = circumradius_sum(
            Point2::new(0.0, 0.0),
            Point2::new(1.0, 0.0),
            Point2::new(0.5, 3f64.sqrt() / 2.0),
        )
        .unwrap();
        assert!(close(eq, 1.5, 1e-14));
        let col = circumradius_sum(Point2::new(0.0, 0.0), Point2::new(1.0, 0.0), Point2::new(2.0, 0.0))
            .unwrap();
        assert!(col.abs() < 1e-15);
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        for _ in 0..1000 {
            let p: Vec<Point2> = (0..3)
                .map(|_| Point2::new(rng.random_range(-3.0..3.0), rng.random_range(-3.0..3.0)))
                .collect();
            let r = circumradius(p[0], p[1], p[2]);
            let want = 1.0 / (2.0 * r * r);
            let got = circumradius_sum(p[0], p[1], p[2]).unwrap();
            // each term is bounded by 1/(|u||v|); cancellation loses relative accuracy
            let scale: f64 = (0..3)
                .map(|i| 1.0 / ((p[i] - p[(i + 1) % 3]).norm() * (p[i] - p[(i + 2) % 3]).norm()))
                .sum();
            assert!((got - want).abs() <= 1e-12 * scale, "{got} vs {want}");
        }
        assert!(circumradius_sum(Point2::ORIGIN, Point2::ORIGIN, Point2::new(1.0, 0.0)).is_err());
    }

    #[test]
    fn circumradius_sum_tends_to_zero_near_collinearity() {
        let mut prev = f64::INFINITY;
        for k in 1..8 {
            let t = 10f64.powi(-k);
            let v = circumradius_sum(Point2::new(0.0, 0.0), Point2::new(1.0, t), Point2::new(2.0, 0.0))
                .unwrap()
                .abs();
            assert!(v < prev);
            prev = v;
        }
        assert!(prev < 1e-12);
    }

    #[test]
    fn link_phase_examples() {
        let h = 0.1;
        let p = peierls_link_phase(Point2::new(1.0, -h / 2.0), Point2::new(1.0, h / 2.0), 1.0).unwrap();
        assert!(close(p, 2.0 * (h / 2.0f64).atan(), 1e-15));
        assert!(close(p, 0.0999, 1e-4));
        assert!(peierls_link_phase(Point2::new(-1.0, 0.0), Point2::new(1.0, 0.0), 0.5).is_err());

        let alpha = 0.37;
        let loop_flux = |c: Point2, s: f64| -> f64 {
            let v = [
                c + Point2::new(-s, -s),
                c + Point2::new(s, -s),
                c + Point2::new(s, s),
                c + Point2::new(-s, s),
            ];
            (0..4).map(|i| peierls_link_phase(v[i], v[(i + 1) % 4], alpha).unwrap()).sum()
        };
        assert!(close(loop_flux(Point2::ORIGIN, 0.05), 2.0 * PI * alpha, 1e-12));
        assert!(close(loop_flux(Point2::new(0.3, -0.2), 0.05), 0.0, 1e-12));
        assert!(close(loop_flux(Point2::new(0.1, 0.0), 0.05), 0.0, 1e-12));
    }

    #[test]
    fn phase_link_antisymmetry() {
        let l = PhaseLink::new(Point2::new(1.0, 0.2), Point2::new(0.4, 1.1), 0.8).unwrap();
        let r = l.reversed();
        assert_eq!(r.from, l.to);
        assert!(close(r.phase, -l.phase, 1e-15));
        let direct = PhaseLink::new(l.to, l.from, 0.8).unwrap();
        assert!(close(direct.phase, -l.phase, 1e-15));
    }

    #[test]
    fn classical_terms_on_the_line() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for n in 2..=6 {
            let xs: Vec<Point2> = (0..n).map(|_| Point2::new(rng.random_range(-3.0..3.0), 0.0)).collect();
            let ps: Vec<Point2> = (0..n).map(|_| Point2::new(rng.random_range(-2.0..2.0), 0.0)).collect();
            let alpha = rng.random_range(0.0..2.0);
            let e = classical_hamiltonian(&xs, &ps, alpha).unwrap();
            assert_eq!(e.cross, 0.0);
            assert!(e.three_body.abs() < 1e-12);
            let mut reduced = 0.0;
            for j in 0..n {
                reduced += ps[j].x.powi(2) + xs[j].x.powi(2);
                for k in 0..n {
                    if k != j {
                        reduced += alpha * alpha / (xs[j].x - xs[k].x).powi(2);
                    }
                }
            }
            assert!((e.total() - reduced).abs() <= 1e-12 * reduced.abs().max(1.0));
        }
    }

    #[test]
    fn classical_terms_match_square_expansion() {
        let mut rng = ChaCha8Rng::seed_from_u64(19);
        for n in 2..=6 {
            let xs: Vec<Point2> = (0..n)
                .map(|_| Point2::new(rng.random_range(-3.0..3.0), rng.random_range(-3.0..3.0)))
                .collect();
            let ps: Vec<Point2> = (0..n)
                .map(|_| Point2::new(rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0)))
                .collect();
            let alpha = rng.random_range(-1.0..1.0);
            let e = classical_hamiltonian(&xs, &ps, alpha).unwrap();
            let brute: f64 = (0..n)
                .map(|j| {
                    let a = vector_potential(&xs, j).unwrap();
                    (ps[j] + alpha * a).norm_sq() + xs[j].norm_sq()
                })
                .sum();
            assert!((e.total() - brute).abs() <= 1e-12 * brute.abs());
        }
        let dup = [Point2::new(1.0, 1.0), Point2::new(1.0, 1.0)];
        assert!(classical_hamiltonian(&dup, &[Point2::ORIGIN; 2], 1.0).is_err());
    }
}
