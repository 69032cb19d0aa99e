use approx::assert_abs_diff_eq;
use esd_core::linalg::hermitian_eigenvalues;
use esd_core::measures::{relation_phi, wootters_spectrum};
use esd_core::sampling::{random_density_matrix, random_x_state, seeded_rng, XKind};
use esd_core::*;
use num_complex::Complex64;
use proptest::prelude::*;

fn pure_strategy() -> impl Strategy<Value = PureState> {
    prop::array::uniform8(-1.0f64..1.0)
        .prop_filter("nonzero", |v| v.iter().map(|x| x * x).sum::<f64>() > 1e-3)
        .prop_map(|v| {
            let z = |k: usize| Complex64::new(v[2 * k], v[2 * k + 1]);
            PureState::normalized(z(0), z(1), z(2), z(3)).unwrap()
        })
}

fn mixed_strategy() -> impl Strategy<Value = DensityMatrix> {
    (any::<u64>(), 1usize..=4).prop_map(|(seed, rank)| random_density_matrix(&mut seeded_rng(seed), rank).unwrap())
}

fn x_strategy() -> impl Strategy<Value = DensityMatrix> {
    (
        any::<u64>(),
        prop::sample::select(vec![XKind::Coherence23, XKind::Coherence14]),
    )
        .prop_map(|(seed, kind)| random_x_state(&mut seeded_rng(seed), kind).unwrap())
}

fn sorted(mut v: [f64; 4]) -> [f64; 4] {
    v.sort_by(|a, b| b.partial_cmp(a).unwrap());
    v
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn density_invariants(rho in mixed_strategy()) {
        prop_assert!((rho.trace() - 1.0).abs() <= 1e-9);
        prop_assert!(rho.matrix().hermitian_deviation() <= 1e-10);
        prop_assert!(rho.spectrum().unwrap().min() >= -1e-8);
    }

    #[test]
    fn partial_transpose_involution(rho in mixed_strategy()) {
        let m = *rho.matrix();
        let pt = partial_transpose_b(&m);
        prop_assert_eq!(partial_transpose_b(&pt), m);
        prop_assert!((pt.trace() - m.trace()).norm() <= 1e-15);
        prop_assert!(pt.hermitian_deviation() <= 1e-10);
        prop_assert!((hermitian_eigenvalues(&pt).unwrap().sum() - 1.0).abs() <= 1e-9);
    }

    #[test]
    fn phase_invariance(psi in pure_strategy(), t1 in 0.0f64..6.3, t2 in 0.0f64..6.3, t3 in 0.0f64..6.3) {
        let t4 = t2 + t3 - t1;
        let a = density_from_pure(&psi);
        let b = density_from_pure(&psi.with_phases([t1, t2, t3, t4]));
        let (wa, wb) = (wootters_spectrum(&a).unwrap(), wootters_spectrum(&b).unwrap());
        for (x, y) in sorted(wa.values).iter().zip(sorted(wb.values)) {
            prop_assert!((x - y).abs() <= 1e-10);
        }
        let pa = hermitian_eigenvalues(&partial_transpose_b(a.matrix())).unwrap();
        let pb = hermitian_eigenvalues(&partial_transpose_b(b.matrix())).unwrap();
        for (x, y) in pa.values.iter().zip(pb.values) {
            prop_assert!((x - y).abs() <= 1e-10);
        }
    }

    #[test]
    fn local_phases_leave_measures_unchanged(psi in pure_strategy(), th in prop::array::uniform3(0.0f64..6.3)) {
        let phases = [th[0], th[1], th[2], th[1] + th[2] - th[0]];
        let a = measure_pair(&density_from_pure(&psi)).unwrap();
        let b = measure_pair(&density_from_pure(&psi.with_phases(phases))).unwrap();
        prop_assert!((a.concurrence - b.concurrence).abs() <= 1e-10);
        prop_assert!((a.log_negativity - b.log_negativity).abs() <= 1e-10);
    }

    #[test]
    fn family_measures_ignore_phases(amp in 0.01f64..0.99, th in prop::array::uniform4(0.0f64..6.3)) {
        for family in [EprFamily::Noon, EprFamily::Phi] {
            let psi = family.state(amp).unwrap();
            let a = measure_pair(&density_from_pure(&psi)).unwrap();
            let b = measure_pair(&density_from_pure(&psi.with_phases(th))).unwrap();
            prop_assert!((a.concurrence - b.concurrence).abs() <= 1e-10);
            prop_assert!((a.log_negativity - b.log_negativity).abs() <= 1e-10);
        }
    }

    #[test]
    fn pure_state_relation(psi in pure_strategy()) {
        let m = measure_pair(&density_from_pure(&psi)).unwrap();
        prop_assert!((m.log_negativity - (1.0 + m.concurrence).log2()).abs() <= 1e-9);
    }

    #[test]
    fn measures_in_range(rho in mixed_strategy()) {
        let m = measure_pair(&rho).unwrap();
        prop_assert!((0.0..=1.0 + 1e-9).contains(&m.concurrence));
        prop_assert!((0.0..=1.0 + 1e-9).contains(&m.log_negativity));
    }

    #[test]
    fn zero_sets_agree(rho in mixed_strategy()) {
        let m = measure_pair(&rho).unwrap();
        prop_assert_eq!(m.concurrence > 1e-9, m.log_negativity > 1e-9);
    }

    #[test]
    fn x_shortcuts_match_general(rho in x_strategy()) {
        prop_assert!((concurrence_x(&rho).unwrap() - concurrence(&rho).unwrap()).abs() <= 1e-9);
        prop_assert!((log_negativity_x(&rho).unwrap() - log_negativity(&rho).unwrap()).abs() <= 1e-9);
    }

    #[test]
    fn phi_pattern_n_dominates(p1 in 0.0f64..1.0, p4 in 0.0f64..1.0, u in 0.0f64..=1.0) {
        let (p1, p4) = (p1 * 0.5, p4 * 0.5);
        let q = 0.5 * (1.0 - p1 - p4);
        let c14 = Complex64::new(u * (p1 * p4).sqrt(), 0.0);
        let rho = esd_core::measures::x_state([p1, q, q, p4], Complex64::new(0.0, 0.0), c14).unwrap();
        let (n, c) = relation_phi(&rho).unwrap();
        prop_assert!(n >= c - 1e-9);
        if n <= c + 1e-9 {
            prop_assert!(c <= 1e-9 || c >= 1.0 - 1e-9);
        }
        prop_assert!((n - log_negativity(&rho).unwrap()).abs() <= 1e-9);
        prop_assert!((c - concurrence(&rho).unwrap()).abs() <= 1e-9);
    }

    #[test]
    fn closed_forms_preserve_density_invariants(
        rho in mixed_strategy(), nbar in 0.0f64..2.0, gamma in 0.1f64..3.0, t in 0.0f64..10.0,
    ) {
        let p = SymmetricParams::new(gamma, nbar).unwrap();
        let m = *evolve_analytic(&rho, &p, t).matrix();
        prop_assert!(DensityMatrix::new(m).is_ok());
        prop_assert!(esd_core::dynamics::evolve_analytic_matrix(rho.matrix(), &p, 0.0).max_abs_diff(rho.matrix()) <= 1e-12);
    }

    #[test]
    fn coherence_decay_law(psi in pure_strategy(), nbar in 0.0f64..1.0, t in 0.0f64..5.0) {
        let p = SymmetricParams::new(1.0, nbar).unwrap();
        let rho0 = density_from_pure(&psi);
        let rho = evolve_analytic(&rho0, &p, t);
        let decay = (-p.eta() * t).exp();
        prop_assert!((rho.get(0, 3).norm() - rho0.get(0, 3).norm() * decay).abs() <= 1e-15);
        prop_assert!((rho.get(1, 2).norm() - rho0.get(1, 2).norm() * decay).abs() <= 1e-15);
    }

    #[test]
    fn asymmetric_rk4_keeps_trace_and_hermiticity(
        rho in mixed_strategy(), ga in 0.2f64..2.0, gb in 0.2f64..2.0, na in 0.0f64..1.0, nb in 0.0f64..1.0,
    ) {
        let p = ReservoirParams::new(ga, gb, na, nb).unwrap();
        let grid = TimeGrid::new(0.0, 2.0, 20).unwrap();
        let traj = evolve_rk4_substeps(&rho, &p, &grid, 20).unwrap();
        for s in &traj.samples {
            prop_assert!((s.rho.trace() - 1.0).abs() <= 1e-9);
            prop_assert!(s.rho.matrix().hermitian_deviation() <= 1e-10);
            prop_assert!(s.rho.spectrum().unwrap().min() >= -1e-8);
        }
    }
}

#[test]
fn rk4_coherence_decay_law() {
    let psi = PureState::normalized(
        Complex64::new(0.4, 0.1),
        Complex64::new(0.5, -0.2),
        Complex64::new(-0.3, 0.4),
        Complex64::new(0.2, 0.5),
    )
    .unwrap();
    let rho0 = density_from_pure(&psi);
    for nbar in [0.0, 0.1, 0.5] {
        let p = SymmetricParams::new(1.0, nbar).unwrap();
        let grid = TimeGrid::new(0.0, 5.0, 50).unwrap();
        let traj = evolve_rk4_substeps(&rho0, &p.reservoir(), &grid, 100).unwrap();
        for s in &traj.samples {
            let decay = (-p.eta() * s.t).exp();
            assert_abs_diff_eq!(s.rho.get(0, 3).norm(), rho0.get(0, 3).norm() * decay, epsilon = 1e-7);
            assert_abs_diff_eq!(s.rho.get(1, 2).norm(), rho0.get(1, 2).norm() * decay, epsilon = 1e-7);
        }
    }
}

#[test]
fn steady_state_is_stationary() {
    for nbar in [0.0, 0.05, 0.25, 0.5, 2.0, 10.0] {
        let p = SymmetricParams::new(1.7, nbar).unwrap();
        let ss = steady_state(&p);
        assert!(lindblad_rhs(&ss, &p.reservoir()).max_abs() <= 1e-12);
        assert_abs_diff_eq!(ss.trace(), 1.0, epsilon = 1e-15);
    }
}
