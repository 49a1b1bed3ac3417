use anyonlab::calogero::{calogero_ground_energy, CalogeroModel};
use anyonlab::geometry::{
    circumradius_sum, classical_hamiltonian, gauge_residual, peierls_link_phase, vector_potential_a0, Point2,
};
use anyonlab::hardy::{hardy_pair_analytic, HardyGrid, HardyProblem};
use anyonlab::oscillator::ho_mode;
use anyonlab::sparse::{inner, lowest_eigenpairs, random_unit_vector, LanczosOptions, SparseHermitianOperator, C64};
use anyonlab::tonks::{tg_eigenfunction, tg_levels, OccupationSet};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn point() -> impl Strategy<Value = Point2> {
    (-5.0..5.0f64, -5.0..5.0f64).prop_map(|(x, y)| Point2::new(x, y))
}

fn off_origin() -> impl Strategy<Value = Point2> {
    point().prop_filter("away from the flux", |p| p.norm() > 1e-3)
}

proptest! {
    #[test]
    fn gauge_residual_vanishes(r in off_origin()) {
        let res = gauge_residual(r).unwrap();
        let scale = vector_potential_a0(r).unwrap().norm();
        prop_assert!(res.norm() <= 1e-12 * scale.max(1.0));
    }

    #[test]
    fn link_phases_are_antisymmetric(a in off_origin(), b in off_origin(), alpha in -3.0..3.0f64) {
        prop_assume!(!(a.cross(b) == 0.0 && a.dot(b) <= 0.0));
        let f = peierls_link_phase(a, b, alpha).unwrap();
        let r = peierls_link_phase(b, a, alpha).unwrap();
        prop_assert!((f + r).abs() <= 1e-12 * (1.0 + f.abs()));
    }

    #[test]
    fn circumradius_matches_side_formula(p in point(), q in point(), s in point()) {
        let (a, b, c) = ((q - s).norm(), (p - s).norm(), (p - q).norm());
        let area = 0.5 * (q - p).cross(s - p).abs();
        prop_assume!(area > 1e-3 * (a * b).max(b * c).max(a * c));
        let r = a * b * c / (4.0 * area);
        let lhs = circumradius_sum(p, q, s).unwrap();
        let want = 1.0 / (2.0 * r * r);
        prop_assert!((lhs - want).abs() <= 1e-10 * want, "{} {}", lhs, want);
    }

    #[test]
    fn classical_energy_on_the_line(
        xs in prop::collection::vec(-4.0..4.0f64, 2..=6),
        ps in prop::collection::vec(-3.0..3.0f64, 6),
        alpha in -2.0..2.0f64,
    ) {
        let mut sorted = xs.clone();
        sorted.sort_by(f64::total_cmp);
        prop_assume!(sorted.windows(2).all(|w| w[1] - w[0] > 0.05));
        let n = xs.len();
        let pos: Vec<Point2> = xs.iter().map(|&x| Point2::new(x, 0.0)).collect();
        let mom: Vec<Point2> = ps[..n].iter().map(|&p| Point2::new(p, 0.0)).collect();
        let e = classical_hamiltonian(&pos, &mom, alpha).unwrap();
        let mut want = 0.0;
        for j in 0..n {
            want += ps[j] * ps[j] + xs[j] * xs[j];
            for k in 0..n {
                if k != j {
                    want += alpha * alpha / (xs[j] - xs[k]).powi(2);
                }
            }
        }
        prop_assert!(e.cross.abs() <= 1e-12 && e.three_body.abs() <= 1e-12);
        prop_assert!((e.total() - want).abs() <= 1e-12 * want);
    }

    #[test]
    fn oscillator_modes_have_parity(n in 0usize..40, x in -6.0..6.0f64) {
        let m = ho_mode(n).unwrap();
        let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
        prop_assert!((m.value(-x) - sign * m.value(x)).abs() <= 1e-12);
    }

    #[test]
    fn tg_ground_energy_is_n_squared(n in 1usize..=12) {
        let lv = tg_levels(n, 1).unwrap();
        prop_assert_eq!(lv[0].energy, (n * n) as f64);
    }

    #[test]
    fn tg_states_are_exchange_symmetric(
        xs in prop::collection::vec(-3.0..3.0f64, 3),
        i in 0usize..3,
        j in 0usize..3,
    ) {
        let psi = tg_eigenfunction(&OccupationSet::new(vec![0, 1, 3]).unwrap());
        let mut ys = xs.clone();
        ys.swap(i, j);
        let (a, b) = (psi.value(&xs).unwrap(), psi.value(&ys).unwrap());
        prop_assert!((a - b).abs() <= 1e-12 * (1.0 + a.abs()));
    }

    #[test]
    fn calogero_indicial_equation(alpha in -4.0..4.0f64) {
        let l = CalogeroModel::new(2, alpha).lambda();
        prop_assert!((l * (l - 1.0) - alpha * alpha).abs() <= 1e-14 * (1.0 + alpha * alpha));
        prop_assert_eq!(calogero_ground_energy(3, alpha), calogero_ground_energy(3, -alpha));
    }

    #[test]
    fn lowest_eigenvalue_is_a_variational_lower_bound(seed in any::<u64>(), dim in 8usize..40) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut t = Vec::new();
        for i in 0..dim {
            t.push((i, i, C64::new(random_unit_vector(1, &mut rng)[0].re * 3.0, 0.0)));
            let j = (i * 7 + 3) % dim;
            if j > i {
                let z = random_unit_vector(1, &mut rng)[0];
                t.push((i, j, z));
                t.push((j, i, z.conj()));
            }
        }
        let op = SparseHermitianOperator::from_triplets(dim, t).unwrap();
        let res = lowest_eigenpairs(&op, LanczosOptions::new(1).tol(1e-10).seed(seed)).unwrap();
        for _ in 0..5 {
            let u = random_unit_vector(dim, &mut rng);
            let q = inner(&u, &op.matvec(&u).unwrap()).re;
            prop_assert!(res.eigenvalues[0] <= q + 1e-8);
        }
    }
}

#[test]
fn random_even_trials_respect_the_pair_constant() {
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    for alpha in [0.25, 0.5, 0.75, 1.0] {
        for grid in [HardyGrid::log_polar(0), HardyGrid::Cartesian { half_width: 6.0, n: 40 }] {
            let hp = HardyProblem::new(alpha, grid).unwrap();
            for _ in 0..50 {
                let v = hp.even_part(&random_unit_vector(hp.dim(), &mut rng));
                assert!(hp.quotient(&v).unwrap() >= hardy_pair_analytic(alpha) - 1e-9);
            }
        }
    }
}
