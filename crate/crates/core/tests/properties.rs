use cvbell_core::bell::{build_bell_operator, BellScenario, Symmetry, TSIRELSON_BOUND};
use cvbell_core::fock::{BeamSplitter, DensityOperator, HermitianOperator, LossChannel, ModeBasis, StateVector, C64};
use cvbell_core::local::{apply_filters, lossy_psi2};
use cvbell_core::measurement::{ideal_binned_homodyne, lossy_binned_homodyne, photodetection_povm, HomodyneConvention};
use cvbell_core::source::{ancilla_mixture, bucket_pattern_probabilities, two_mode_squeezed, AncillaModel};
use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_density(basis: &ModeBasis, seed: u64) -> DensityOperator {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let d = basis.dimension();
    let g = DMatrix::from_fn(d, d, |_, _| {
        C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
    });
    DensityOperator::new(basis.clone(), &g * g.adjoint())
        .unwrap()
        .normalize()
        .unwrap()
}

fn random_state(basis: &ModeBasis, seed: u64) -> StateVector {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let v = DVector::from_fn(basis.dimension(), |_, _| {
        C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
    });
    StateVector::new(basis.clone(), v).unwrap().normalize().unwrap()
}

fn conventions() -> impl Strategy<Value = HomodyneConvention> {
    prop_oneof![
        Just(HomodyneConvention::RealHermite),
        Just(HomodyneConvention::QuarterTurn)
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn loss_composes_multiplicatively(seed in any::<u64>(), e1 in 0.0..=1.0f64, e2 in 0.0..=1.0f64, mode in 0usize..2) {
        let basis = ModeBasis::uniform(2, 3).unwrap();
        let rho = random_density(&basis, seed);
        let two = LossChannel::new(e2).unwrap().apply(&LossChannel::new(e1).unwrap().apply(&rho, mode).unwrap(), mode).unwrap();
        let one = LossChannel::new(e1 * e2).unwrap().apply(&rho, mode).unwrap();
        prop_assert!(two.max_abs_diff(&one) < 1e-12);
    }

    #[test]
    fn loss_preserves_trace_and_positivity(seed in any::<u64>(), eta in 0.0..=1.0f64) {
        let basis = ModeBasis::uniform(2, 3).unwrap();
        let rho = random_density(&basis, seed);
        let out = LossChannel::new(eta).unwrap().apply(&rho, 1).unwrap();
        prop_assert!((out.trace() - 1.0).abs() < 1e-12);
        prop_assert!(out.min_eigenvalue().unwrap() > -1e-12);
        prop_assert!(out.hermiticity_defect() < 1e-14);
    }

    #[test]
    fn homodyne_loss_in_state_equals_loss_in_povm(
        seed in any::<u64>(), eta in 0.0..=1.0f64, delta in 0.0..5.0f64, conv in conventions(),
    ) {
        let basis = ModeBasis::single(5);
        let rho = random_density(&basis, seed);
        let lossy_state = LossChannel::new(eta).unwrap().apply(&rho, 0).unwrap();
        let ideal = ideal_binned_homodyne(delta, 5, conv).unwrap();
        let povm = lossy_binned_homodyne(eta, delta, 5, conv).unwrap();
        let a = lossy_state.expectation(&ideal).unwrap();
        let b = rho.expectation(&povm.plus).unwrap();
        prop_assert!((a - b).abs() < 1e-12, "{} vs {}", a, b);
    }

    #[test]
    fn photodetection_loss_in_state_equals_loss_in_povm(seed in any::<u64>(), eta in 0.0..=1.0f64) {
        let basis = ModeBasis::single(6);
        let rho = random_density(&basis, seed);
        let lossy_state = LossChannel::new(eta).unwrap().apply(&rho, 0).unwrap();
        let ideal = photodetection_povm(1.0, 6).unwrap();
        let povm = photodetection_povm(eta, 6).unwrap();
        let a = lossy_state.expectation(&ideal.minus).unwrap();
        let b = rho.expectation(&povm.minus).unwrap();
        prop_assert!((a - b).abs() < 1e-12);
    }

    #[test]
    fn povms_are_complete_and_positive(
        eta in 0.0..=1.0f64, delta in 0.0..6.0f64, cutoff in 0usize..7, conv in conventions(),
    ) {
        for povm in [
            lossy_binned_homodyne(eta, delta, cutoff, conv).unwrap(),
            photodetection_povm(eta, cutoff).unwrap(),
        ] {
            prop_assert!(povm.completeness_defect().unwrap() < 1e-12);
            prop_assert!(povm.min_eigenvalue().unwrap() > -1e-10);
        }
    }

    #[test]
    fn bell_operator_respects_tsirelson_bound(
        eta_t in 0.0..=1.0f64, eta_d in 0.0..=1.0f64, delta in 0.0..6.0f64,
        asymmetric in any::<bool>(), seed in any::<u64>(),
    ) {
        let symmetry = if asymmetric { Symmetry::Asymmetric } else { Symmetry::Symmetric };
        let s = BellScenario::new(symmetry, eta_t, eta_d).unwrap().with_delta(delta).with_cutoff(3);
        let b = build_bell_operator(&s).unwrap();
        let e = b.eig().unwrap();
        prop_assert!(e.values.iter().all(|v| v.abs() <= TSIRELSON_BOUND + 1e-9));
        // eigen residuals
        for (k, &value) in e.values.iter().enumerate() {
            let v = e.vectors.column(k);
            let r = (b.matrix() * v - v * C64::new(value, 0.0)).norm();
            prop_assert!(r <= 1e-10, "residual {}", r);
        }
        let psi = random_state(b.basis(), seed);
        prop_assert!(psi.expectation(&b).unwrap().abs() <= TSIRELSON_BOUND + 1e-9);
    }

    #[test]
    fn beam_splitter_conserves_photons(seed in any::<u64>(), t in 0.0..=1.0f64, phase in -3.2..3.2f64) {
        let basis = ModeBasis::new(&[3, 3], Some(3)).unwrap();
        let psi = random_state(&basis, seed);
        let bs = BeamSplitter::new(t, phase).unwrap();
        let out = bs.apply(&psi, 0, 1).unwrap();
        prop_assert!((out.norm() - 1.0).abs() < 1e-12);
        let n = HermitianOperator::total_number(&basis);
        prop_assert!((out.expectation(&n).unwrap() - psi.expectation(&n).unwrap()).abs() < 1e-12);
        let back = bs.inverse().apply(&out, 0, 1).unwrap();
        prop_assert!((back.fidelity(&psi).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn herald_outcomes_are_normalized(
        lambda in 0.0..0.4f64, t in 0.01..=1.0f64, coupling in 0.0..=1.0f64, eff in 0.0..=1.0f64,
    ) {
        let pair = two_mode_squeezed(lambda, 5).unwrap();
        let loss = LossChannel::new(coupling).unwrap();
        let mut branches = Vec::new();
        for b in loss.branches(&pair.state, 0).unwrap() {
            branches.extend(loss.branches(&b, 1).unwrap());
        }
        let ancilla = ancilla_mixture(&AncillaModel::IdealSinglePhoton, coupling).unwrap();
        let p = bucket_pattern_probabilities(&branches, &ancilla, t, eff).unwrap();
        prop_assert!(p.iter().all(|&x| x >= -1e-15));
        prop_assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn filters_keep_states_physical(eta in 0.0..=1.0f64, gain in 1.0..5.0f64, m in 1u32..5) {
        let rho = apply_filters(&lossy_psi2(eta).unwrap(), gain, m).unwrap();
        prop_assert!(rho.hermiticity_defect() < 1e-10);
        prop_assert!(rho.min_eigenvalue().unwrap() > -1e-10);
        prop_assert!((rho.trace() - 1.0).abs() < 1e-12);
    }
}

#[test]
fn unit_gain_filter_keeps_unit_trace() {
    for eta in [0.1, 0.5, 0.9] {
        let rho = lossy_psi2(eta).unwrap();
        assert!((rho.trace() - 1.0).abs() < 1e-15);
        let f = apply_filters(&rho, 1.0, 1).unwrap();
        assert!(f.max_abs_diff(&rho) < 1e-15);
    }
}
