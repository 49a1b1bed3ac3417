use anyonlab::hardy::{hardy_rayleigh_pair, HardyGrid};
use anyonlab::pair::{relative_spectrum, PairProblem, SolveSettings};
use anyonlab::sparse::{lowest_eigenpairs, LanczosOptions, SparseHermitianOperator, C64};
use anyonlab::tonks::OccupationSet;
use anyonlab::vmc::{mc_energy, splitting_energy, AnsatzState, McSettings};

fn spectrum(alpha: f64) -> Vec<f64> {
    let p = PairProblem::with_resolution(alpha, 0.5, 40, 40).unwrap();
    let s = SolveSettings {
        k: 4,
        tol: 1e-10,
        ..SolveSettings::default()
    };
    let sp = relative_spectrum(&p, s).unwrap();
    assert!(sp.complete);
    sp.states.iter().map(|st| st.eigenvalue).collect()
}

fn assert_close(a: &[f64], b: &[f64], tol: f64) {
    for (x, y) in a.iter().zip(b) {
        assert!((x - y).abs() <= tol, "{x} vs {y}");
    }
}

#[test]
fn discretized_oscillator_levels() {
    let h = 0.01;
    let n = 1999;
    let mut t = Vec::new();
    for i in 0..n {
        let x = -10.0 + (i + 1) as f64 * h;
        t.push((i, i, C64::new(2.0 / (h * h) + x * x, 0.0)));
        if i + 1 < n {
            t.push((i, i + 1, C64::new(-1.0 / (h * h), 0.0)));
            t.push((i + 1, i, C64::new(-1.0 / (h * h), 0.0)));
        }
    }
    let op = SparseHermitianOperator::from_triplets(n, t).unwrap();
    let res = lowest_eigenpairs(&op, LanczosOptions::new(5).tol(1e-10)).unwrap();
    assert!(res.is_complete());
    for (k, e) in res.eigenvalues.iter().enumerate() {
        assert!((e - (2 * k + 1) as f64).abs() < 1e-3, "{k}: {e}");
    }
}

#[test]
fn pair_spectrum_is_periodic_and_conjugation_symmetric() {
    let base = spectrum(0.6);
    assert_close(&base, &spectrum(2.6), 1e-8);
    assert_close(&base, &spectrum(-0.6), 1e-8);
    assert_close(&base, &spectrum(1.4), 1e-8);
}

#[test]
fn hardy_estimates_decrease_under_refinement() {
    let s = SolveSettings::default();
    let a = hardy_rayleigh_pair(1.0, HardyGrid::log_polar(0), s).unwrap().value;
    let b = hardy_rayleigh_pair(1.0, HardyGrid::log_polar(1), s).unwrap().value;
    assert!(b < a && b > 2.0 && a <= 2.05, "{a} {b}");
    let c = hardy_rayleigh_pair(0.5, HardyGrid::log_polar(0), s).unwrap().value;
    let d = hardy_rayleigh_pair(0.5, HardyGrid::log_polar(1), s).unwrap().value;
    assert!((d - 0.5).abs() < (c - 0.5).abs());
}

#[test]
fn splitting_energy_agrees_with_sampling() {
    let cases = [(vec![0, 1], 0.5), (vec![0, 1], 0.25), (vec![0, 1, 2], 0.5), (vec![0, 1, 2], 0.25)];
    for (occ, eps) in cases {
        for alpha in [0.0, 0.5, 1.0] {
            let st = AnsatzState::new(OccupationSet::new(occ.clone()).unwrap(), alpha, eps).unwrap();
            let mut mc = McSettings::new(11);
            mc.per_chain = 8000;
            mc.burn_in = 2000;
            let est = mc_energy(&st, mc).unwrap();
            let want = splitting_energy(&st);
            assert!(
                (est.mean - want).abs() <= 3.0 * est.standard_error,
                "{occ:?} eps={eps} alpha={alpha}: {} ± {} vs {want}",
                est.mean,
                est.standard_error
            );
            assert!((0.2..=0.6).contains(&est.acceptance), "acceptance {}", est.acceptance);
        }
    }
}
