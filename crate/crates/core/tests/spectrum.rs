use lle_spectra::frobenius::BoundaryKind;
use lle_spectra::lle::{build_w, spectrum_lle_with, SolverMode, SpectrumOptions};
use lle_spectra::matching::{find_eigenvalues, secular_interval, Phase, SpectralSolver};
use lle_spectra::sampling::{grid_disc, grid_interval};
use lle_spectra::{Domain, Execution};
use proptest::prelude::*;

// Frozen after cross-checking against the Rayleigh quotient and J = 20.
const INTERVAL_05: [f64; 8] = [
    0.0,
    1.261958439141587,
    5.137380162452001,
    11.837222979425018,
    21.583664135512315,
    34.54066130005157,
    50.801751240436545,
    70.40386439144783,
];

const DISC_05: [(f64, u32); 7] = [
    (0.0, 0),
    (0.3668468186977513, 1),
    (1.0421424958902659, 2),
    (1.5359968749326511, 0),
    (2.022096172743316, 3),
    (3.0056375849573804, 1),
    (3.3075409720928457, 4),
];

#[test]
fn interval_eigenvalues_are_locked() {
    let s = SpectralSolver::new(Domain::Interval, 0.05).unwrap();
    let got = s.lowest(BoundaryKind::Neumann, 8, Execution::default()).unwrap().lambdas();
    for (g, want) in got.iter().zip(INTERVAL_05) {
        assert!((g - want).abs() <= 1e-9 * want.max(1.0), "{g} vs {want}");
    }
    for l in &INTERVAL_05[1..] {
        assert!(secular_interval(*l, 0.05, BoundaryKind::Neumann).unwrap().abs() < 1e-9);
    }
}

#[test]
fn disc_eigenvalues_are_locked_with_multiplicity() {
    let spectrum = find_eigenvalues(Domain::Disc, 0.05, BoundaryKind::Neumann, 6, 3.4).unwrap();
    let mut expected = Vec::new();
    for (l, nu) in DISC_05 {
        expected.push((l, nu, if nu == 0 { Phase::Constant } else { Phase::Cos }));
        if nu > 0 {
            expected.push((l, nu, Phase::Sin));
        }
    }
    assert_eq!(spectrum.eigenvalues.len(), expected.len());
    for (e, (l, nu, phase)) in spectrum.eigenvalues.iter().zip(expected) {
        assert_eq!((e.nu, e.phase), (nu, phase));
        assert!((e.lambda - l).abs() <= 1e-9 * l.max(1.0), "{} vs {l}", e.lambda);
    }
}

#[test]
fn dirichlet_smallest_is_locked() {
    for (domain, want) in [(Domain::Interval, 1.6901662759421097), (Domain::Disc, 0.7361350755195186)] {
        let s = SpectralSolver::new(domain, 0.05).unwrap();
        let l = s.lowest(BoundaryKind::Dirichlet, 1, Execution::default()).unwrap().eigenvalues[0].lambda;
        assert!((l - want).abs() < 1e-9, "{domain}: {l}");
    }
}

#[test]
fn lle_tracks_the_analytic_spectrum_on_a_small_grid() {
    let w = build_w(&grid_interval(1000).unwrap(), 0.05).unwrap();
    let r =
        spectrum_lle_with(&w, 8, &SpectrumOptions { mode: Some(SolverMode::DenseNonsymmetric), ..Default::default() })
            .unwrap();
    assert!(r.eigenvalues[0].abs() < 1e-9);
    for j in 1..8 {
        let rel = (r.eigenvalues[j] - INTERVAL_05[j]).abs() / INTERVAL_05[j];
        assert!(rel < 0.1, "j = {j}: {} vs {}", r.eigenvalues[j], INTERVAL_05[j]);
    }
}

#[test]
fn sparse_mode_on_disc_has_constant_kernel() {
    let w = build_w(&grid_disc(61).unwrap(), 0.1).unwrap();
    let r =
        spectrum_lle_with(&w, 3, &SpectrumOptions { mode: Some(SolverMode::SparseNonsymmetric), ..Default::default() })
            .unwrap();
    assert!(r.eigenvalues[0].abs() < 1e-8, "{:?}", r.eigenvalues);
    assert!(r.eigenvalues.iter().all(|&l| l > -1e-6));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn weights_are_row_stochastic(n in 200usize..800, eps in 0.03f64..0.1) {
        let w = build_w(&grid_interval(n).unwrap(), eps).unwrap();
        prop_assert!(w.row_sum_defect() < 1e-10);
        prop_assert!(w.kernel_residual() < 1e-12);
    }

    #[test]
    fn disc_weights_are_row_stochastic(m in 21usize..51, eps in 0.12f64..0.3) {
        let w = build_w(&grid_disc(m).unwrap(), eps).unwrap();
        prop_assert!(w.row_sum_defect() < 1e-10);
        prop_assert!(w.kernel_residual() < 1e-12);
    }

    #[test]
    fn interval_roots_shrink_toward_the_limit(eps in 0.005f64..0.05) {
        let s = SpectralSolver::new(Domain::Interval, eps).unwrap();
        let l = s.lowest(BoundaryKind::Neumann, 3, Execution::Sequential).unwrap().lambdas();
        prop_assert_eq!(l[0], 0.0);
        prop_assert!(l[1] > 0.0 && l[2] > l[1]);
        prop_assert!(secular_interval(l[1], eps, BoundaryKind::Neumann).unwrap().abs() < 1e-9);
    }
}
