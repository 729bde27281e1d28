mod common;

use std::f64::consts::PI;

use common::*;
use freqgate::matrix::unitarity_defect;
use freqgate::metrics::fidelity_against;
use freqgate::optimize::{aliasing_check, DesignProblem, ParameterVector};
use freqgate::{
    compose_cascade, success_probability, toeplitz_from_drive, Cascade, FourierDrive, GateTarget, ModeLattice,
    ShaperPattern,
};
use ndarray::Array2;
use num_complex::Complex64;
use proptest::prelude::*;

fn drive_strategy(max_harmonics: usize) -> impl Strategy<Value = (Vec<f64>, Vec<f64>)> {
    (1..=max_harmonics).prop_flat_map(|p| (prop::collection::vec(0.0..PI, p), prop::collection::vec(-PI..PI, p)))
}

fn drive((amps, phases): &(Vec<f64>, Vec<f64>)) -> FourierDrive {
    FourierDrive::from_components(amps, phases).unwrap()
}

fn complex_matrix(d: usize) -> impl Strategy<Value = Array2<Complex64>> {
    prop::collection::vec((-1.0..1.0f64, -1.0..1.0f64), d * d)
        .prop_map(move |v| Array2::from_shape_vec((d, d), v.into_iter().map(|(a, b)| c(a, b)).collect()).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn lossless_cascades_are_unitary(
        log_m in 4u32..=10,
        first in drive_strategy(3),
        second in drive_strategy(3),
        seed_phases in prop::collection::vec(-PI..PI, 16),
    ) {
        let m = 1usize << log_m;
        let lattice = ModeLattice::centered(m, 2).unwrap();
        let phases: Vec<f64> = (0..m).map(|i| seed_phases[i % 16] * (1.0 + i as f64 / m as f64)).collect();
        let v = compose_cascade(&drive(&first), &ShaperPattern::from_phases(phases), &drive(&second), &lattice)
            .unwrap();
        prop_assert!(unitarity_defect(v.entries()) < 1e-10);
    }

    #[test]
    fn single_modulator_matches_degenerate_cascade(half in 4usize..=48, first in drive_strategy(3)) {
        let m = 2 * half;
        let lattice = ModeLattice::centered(m, 2).unwrap();
        let d = drive(&first);
        prop_assume!(d.validate_for(m).is_ok());
        let toeplitz = toeplitz_from_drive(&d, &lattice).unwrap();
        let cascade = compose_cascade(&d, &ShaperPattern::flat(m), &FourierDrive::zero(), &lattice).unwrap();
        prop_assert!(max_diff(toeplitz.entries(), cascade.entries()) < 1e-12);
        // circulant structure: entry (r, c) depends only on r − c
        let e = toeplitz.entries();
        for r in 0..m {
            prop_assert!((e[[r, 0]] - e[[(r + 1) % m, 1]]).norm() < 1e-12);
        }
    }

    #[test]
    fn cascade_matches_dense_products(
        first in drive_strategy(2),
        second in drive_strategy(2),
        phases in prop::collection::vec(-PI..PI, 32),
    ) {
        let m = 32;
        let lattice = ModeLattice::centered(m, 2).unwrap();
        let v = compose_cascade(&drive(&first), &ShaperPattern::from_phases(phases.clone()), &drive(&second), &lattice)
            .unwrap();
        let oracle = dense_cascade((&first.0, &first.1), &phases, (&second.0, &second.1), m);
        prop_assert!(max_diff(v.entries(), &oracle) < 1e-12);
    }

    #[test]
    fn sideband_coefficients_match_bessel_and_quadrature(beta in 0.0..3.0f64, theta in -PI..PI) {
        let m = 64;
        let lattice = ModeLattice::centered(m, 2).unwrap();
        let t = toeplitz_from_drive(&FourierDrive::single_tone(beta, theta).unwrap(), &lattice).unwrap();
        let e = t.entries();
        let mut parseval = 0.0;
        for k in -8i32..=8 {
            // entry (n + k, n) carries sideband k
            let z = e[[(20 + k) as usize, 20]];
            let bessel = Complex64::from_polar(bessel_j(k, beta), k as f64 * theta);
            prop_assert!((z - bessel).norm() < 1e-10, "k = {k}: {z} vs {bessel}");
            prop_assert!((z - tone_coefficient(beta, theta, k, 4096)).norm() < 1e-10);
        }
        for r in 0..m {
            parseval += e[[r, 20]].norm_sqr();
        }
        prop_assert!((parseval - 1.0).abs() < 1e-12);
    }

    #[test]
    fn window_translation_leaves_metrics_unchanged(
        first in drive_strategy(2),
        second in drive_strategy(2),
        phases in prop::collection::vec(-PI..PI, 12),
        shift in 0usize..40,
    ) {
        let m = 128;
        let target = GateTarget::hadamard();
        let base = ModeLattice::new(m, 2, 40).unwrap();
        let moved = base.with_offset(40 + shift).unwrap();
        let shaper = ShaperPattern::windowed(m, 35, &phases).unwrap();
        let (d1, d2) = (drive(&first), drive(&second));
        let a = compose_cascade(&d1, &shaper, &d2, &base).unwrap();
        let b = compose_cascade(&d1, &shaper.shifted(shift), &d2, &moved).unwrap();
        let (fa, pa) = freqgate::gate_metrics(&a.truncate(), &target).unwrap();
        let (fb, pb) = freqgate::gate_metrics(&b.truncate(), &target).unwrap();
        prop_assert!((fa - fb).abs() < 1e-10 && (pa - pb).abs() < 1e-10);
        prop_assert!(max_diff(&a.truncate(), &b.truncate()) < 1e-10);
    }

    #[test]
    fn fidelity_ignores_global_scalars(
        v in complex_matrix(3),
        r in 0.05..5.0f64,
        phase in -PI..PI,
    ) {
        prop_assume!(v.iter().map(|z| z.norm_sqr()).sum::<f64>() > 1e-3);
        let u = dft_target(3);
        let f = fidelity_against(&v, &u).unwrap();
        let scaled = v.mapv(|z| z * Complex64::from_polar(r, phase));
        prop_assert!((fidelity_against(&scaled, &u).unwrap() - f).abs() < 1e-12);
        prop_assert!((metrics_oracle(&v, &u).0 - f).abs() < 1e-12);
        prop_assert!((-1e-12..=1.0 + 1e-12).contains(&f));
    }

    #[test]
    fn truncated_metrics_are_bounded(first in drive_strategy(2), second in drive_strategy(2)) {
        let lattice = ModeLattice::centered(64, 3).unwrap();
        let v = Cascade::new(&drive(&first), &ShaperPattern::flat(64), &drive(&second), &lattice).unwrap();
        let block = v.window_block();
        let p = success_probability(&block);
        prop_assert!((0.0..=1.0 + 1e-12).contains(&p));
        let (f, p_oracle) = metrics_oracle(&block, &dft_target(3));
        prop_assert!((p - p_oracle).abs() < 1e-12);
        prop_assert!((-1e-12..=1.0 + 1e-12).contains(&f));
    }
}

#[test]
fn dft_and_fidelity_of_target_itself() {
    let f = freqgate::dft_matrix(16).unwrap();
    assert!(max_diff(&f, &dense_dft(16)) < 1e-14);
    for d in 2..=7 {
        let t = GateTarget::dft(d).unwrap();
        assert!(max_diff(t.matrix(), &dft_target(d)) < 1e-14);
        let (fid, p) = freqgate::gate_metrics(t.matrix(), &t).unwrap();
        assert!((fid - 1.0).abs() < 1e-12 && (p - 1.0).abs() < 1e-12);
    }
    assert!(max_diff(GateTarget::hadamard().matrix(), &hadamard()) < 1e-15);
}

#[test]
fn weak_drives_alias_negligibly_on_doubled_lattice() {
    let problem = DesignProblem::new(GateTarget::hadamard(), 2).unwrap();
    let mut values = vec![0.3; problem.shaper_window];
    values.extend([0.8, 0.2, 0.1, -0.4, 0.7, 0.1, 1.0, 2.0]);
    let params = ParameterVector::for_problem(values, &problem).unwrap();
    let report = aliasing_check(&params, &problem, 2).unwrap();
    assert_eq!(report.mode_count, 256);
    assert!(report.delta_fidelity.abs() < 1e-6 && report.delta_success.abs() < 1e-6, "{report:?}");
}
