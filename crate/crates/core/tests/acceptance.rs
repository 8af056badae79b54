//! Acceptance criteria, one line each. Runs without the libtest harness so
//! the lines are always printed; exits non-zero when any criterion fails.

use std::f64::consts::FRAC_1_SQRT_2;
use std::process::ExitCode;
use std::time::Instant;

use cvbell_core::bell::{
    build_bell_operator, critical_efficiency, BellScenario, SolverOptions, StateSource, Symmetry, ThresholdSolve,
    ThresholdTarget, TSIRELSON_BOUND,
};
use cvbell_core::fock::{DensityOperator, LossChannel, ModeBasis, StateVector, C64};
use cvbell_core::local::{
    combined_source_and_local, filtered_chsh, filtered_critical_transmission, multi_filter_curve, FilterConfig,
};
use cvbell_core::measurement::{ideal_binned_homodyne, lossy_binned_homodyne, photodetection_povm, HomodyneConvention};
use cvbell_core::source::{
    ancilla_mixture, bucket_pattern_probabilities, log_spaced, source_region_boundary, two_mode_squeezed, AncillaModel,
    SourceConfig, SourceSearch,
};

struct Report {
    failures: usize,
}

impl Report {
    fn line(&mut self, id: &str, ok: bool, detail: String) {
        if !ok {
            self.failures += 1;
        }
        println!("{} criterion {id}: {detail}", if ok { "PASS" } else { "FAIL" });
    }
}

fn within(value: f64, target: f64, tol: f64) -> bool {
    (value - target).abs() <= tol
}

fn solve(target: ThresholdTarget, symmetry: Symmetry, source: &StateSource, options: &SolverOptions) -> ThresholdSolve {
    critical_efficiency(target, 1.0, symmetry, source, options).expect("threshold solve")
}

fn threshold(s: &ThresholdSolve) -> f64 {
    s.threshold().unwrap_or(f64::NAN)
}

fn psi2_source() -> StateSource {
    StateSource::Pure(psi2_reference())
}

fn coefficients(s: &ThresholdSolve) -> [f64; 3] {
    let state = s
        .at_threshold
        .as_ref()
        .and_then(|r| r.optimal_state.as_ref())
        .expect("optimal state at threshold");
    let a = |o: [usize; 2]| state.amplitude(&o);
    let c = [a([0, 0]), a([2, 0]), a([0, 2])];
    // fix the global phase on the largest coefficient; its sign stays free
    let k = (0..3).max_by(|&i, &j| c[i].norm().total_cmp(&c[j].norm())).unwrap();
    let phase = c[k] / c[k].norm();
    let real: Vec<f64> = c.iter().map(|z| (z / phase).re).collect();
    [real[0], real[1], real[2]]
}

fn matches_up_to_sign(found: [f64; 3], expected: [f64; 3], tol: f64) -> bool {
    [1.0, -1.0]
        .iter()
        .any(|s| found.iter().zip(expected).all(|(f, e)| (s * f - e).abs() <= tol))
}

fn local_threshold(gain: f64, applications: u32, options: &SolverOptions) -> f64 {
    let input = DensityOperator::from_pure(&psi2_reference());
    let config = FilterConfig {
        gain,
        applications,
        ..Default::default()
    };
    threshold(&filtered_critical_transmission(&input, &config, options).expect("filtered threshold"))
}

fn small_search() -> SourceSearch {
    SourceSearch {
        squeezing: vec![0.02, 0.05, 0.1],
        transmission: log_spaced(1e-4, 0.999, 24),
        refine: true,
    }
}

fn main() -> ExitCode {
    let mut r = Report { failures: 0 };
    let options = SolverOptions::default();
    let optimal = StateSource::OptimalSubspace;

    // 1
    let start = Instant::now();
    let sym_t = solve(ThresholdTarget::Transmission, Symmetry::Symmetric, &optimal, &options);
    let elapsed = start.elapsed().as_secs_f64();
    let v = threshold(&sym_t);
    r.line(
        "1",
        within(v, 0.805, 0.005) && elapsed < 30.0,
        format!("symmetric transmission threshold {v:.4} (0.805 ± 0.005) in {elapsed:.2} s (< 30 s)"),
    );

    // 2
    let sym_d = solve(ThresholdTarget::Detection, Symmetry::Symmetric, &optimal, &options);
    let asym_d = solve(ThresholdTarget::Detection, Symmetry::Asymmetric, &optimal, &options);
    let (a, b) = (threshold(&sym_d), threshold(&asym_d));
    r.line(
        "2",
        within(a, 0.648, 0.005) && within(b, 0.648, 0.005),
        format!("detection threshold symmetric {a:.4}, asymmetric {b:.4} (0.648 ± 0.005)"),
    );

    // 3
    let asym_t = solve(ThresholdTarget::Transmission, Symmetry::Asymmetric, &optimal, &options);
    let v = threshold(&asym_t);
    r.line(
        "3",
        within(v, 0.667, 0.005),
        format!("asymmetric transmission threshold {v:.4} (0.667 ± 0.005)"),
    );

    // 4
    let checks = [
        ("symmetric transmission", &sym_t, [0.18, -0.70, -0.70]),
        ("symmetric detection", &sym_d, [0.22, -0.69, -0.69]),
        ("asymmetric detection", &asym_d, [0.22, -0.69, -0.69]),
        ("asymmetric transmission", &asym_t, [0.13, -0.86, -0.49]),
    ];
    let mut ok = true;
    let mut parts = Vec::new();
    for (name, s, expected) in checks {
        let c = coefficients(s);
        ok &= matches_up_to_sign(c, expected, 0.02);
        parts.push(format!("{name} ({:.3}, {:.3}, {:.3})", c[0], c[1], c[2]));
    }
    r.line(
        "4",
        ok,
        format!("optimal states [|00>, |20>, |02>] within 0.02: {}", parts.join("; ")),
    );

    // 5
    let t = threshold(&solve(
        ThresholdTarget::Transmission,
        Symmetry::Symmetric,
        &psi2_source(),
        &options,
    ));
    let d = threshold(&solve(
        ThresholdTarget::Detection,
        Symmetry::Symmetric,
        &psi2_source(),
        &options,
    ));
    r.line(
        "5",
        within(t, 0.84, 0.01) && within(d, 0.711, 0.005),
        format!("fixed (|20>+|02>)/√2: transmission {t:.4} (0.84 ± 0.01), detection {d:.4} (0.711 ± 0.005)"),
    );

    // 6
    let g2 = local_threshold(2.0, 1, &options);
    let g3 = local_threshold(3.0, 1, &options);
    let curve = multi_filter_curve(&FilterConfig::default(), 4, &options).expect("multi-filter curve");
    let m: Vec<f64> = curve
        .points
        .iter()
        .map(|p| p.bisection.threshold.unwrap_or(f64::NAN))
        .collect();
    let r2 = curve.log_fit.map(|f| f.r_squared).unwrap_or(f64::NAN);
    r.line(
        "6",
        within(g2, 0.62, 0.01) && within(g3, 0.50, 0.01) && within(m[2], 0.20, 0.02) && r2 >= 0.98,
        format!(
            "local filters g=2 {g2:.4} (0.62 ± 0.01), g=3 {g3:.4} (0.50 ± 0.01), g=2 m=3 {:.4} (0.20 ± 0.02), \
             m=1..4 [{:.4}, {:.4}, {:.4}, {:.4}] log-linear R² {r2:.4} (≥ 0.98)",
            m[2], m[0], m[1], m[2], m[3]
        ),
    );

    // 7
    let input = DensityOperator::from_pure(&psi2_reference());
    let feasible = FilterConfig {
        detection_efficiency: 0.8,
        ..Default::default()
    };
    let chsh = filtered_chsh(&input, &feasible, 0.8, &options)
        .expect("feasibility point")
        .chsh_value;
    r.line(
        "7",
        chsh > 2.0,
        format!("g=2 filters at η_d = η_t = 0.8: CHSH {chsh:.6} (> 2)"),
    );

    // 8
    let wide = SolverOptions { cutoff: 6, ..options };
    let pairs = [
        (
            "symmetric transmission",
            threshold(&sym_t),
            threshold(&solve(
                ThresholdTarget::Transmission,
                Symmetry::Symmetric,
                &optimal,
                &wide,
            )),
        ),
        (
            "symmetric detection",
            threshold(&sym_d),
            threshold(&solve(ThresholdTarget::Detection, Symmetry::Symmetric, &optimal, &wide)),
        ),
        (
            "asymmetric detection",
            threshold(&asym_d),
            threshold(&solve(
                ThresholdTarget::Detection,
                Symmetry::Asymmetric,
                &optimal,
                &wide,
            )),
        ),
        (
            "asymmetric transmission",
            threshold(&asym_t),
            threshold(&solve(
                ThresholdTarget::Transmission,
                Symmetry::Asymmetric,
                &optimal,
                &wide,
            )),
        ),
        (
            "fixed-state transmission",
            t,
            threshold(&solve(
                ThresholdTarget::Transmission,
                Symmetry::Symmetric,
                &psi2_source(),
                &wide,
            )),
        ),
        (
            "fixed-state detection",
            d,
            threshold(&solve(
                ThresholdTarget::Detection,
                Symmetry::Symmetric,
                &psi2_source(),
                &wide,
            )),
        ),
        ("filter g=2", g2, local_threshold(2.0, 1, &wide)),
        ("filter g=3", g3, local_threshold(3.0, 1, &wide)),
        ("filter g=2 m=3", m[2], local_threshold(2.0, 3, &wide)),
    ];
    let worst = pairs.iter().map(|(_, a, b)| (a - b).abs()).fold(0.0, f64::max);
    r.line(
        "8",
        worst <= 0.005,
        format!(
            "cutoff 2 → 6, largest threshold change {worst:.2e} (≤ 0.005) over {} thresholds",
            pairs.len()
        ),
    );

    // 9
    let filter = FilterConfig::default();
    let base = SourceConfig {
        cutoff: 3,
        ..Default::default()
    };
    let report = combined_source_and_local(&base, &small_search(), &filter, &options).expect("combined scheme");
    let gain = report.improvement().unwrap_or(f64::NAN);
    r.line(
        "9",
        gain <= 0.01,
        format!(
            "g=2 filters: ψ₂ input {:.4}, amplified-source input {:.4}, improvement {gain:.4} (≤ 0.01)",
            report.psi2.threshold.unwrap_or(f64::NAN),
            report.source.threshold.unwrap_or(f64::NAN)
        ),
    );

    // 10
    let (ok, detail) = property_suite();
    r.line("10a", ok, detail);
    let (ok, detail) = coupling_curves(&options);
    r.line("10b", ok, detail);

    if r.failures == 0 {
        println!("all acceptance criteria passed");
        ExitCode::SUCCESS
    } else {
        println!("{} acceptance line(s) failed", r.failures);
        ExitCode::FAILURE
    }
}

fn random_density(basis: &ModeBasis, seed: u64) -> DensityOperator {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let d = basis.dimension();
    let g = nalgebra::DMatrix::from_fn(d, d, |_, _| {
        C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
    });
    DensityOperator::new(basis.clone(), &g * g.adjoint())
        .unwrap()
        .normalize()
        .unwrap()
}

/// Deterministic sweep of the invariants; returns the worst deviation seen
/// for each.
fn property_suite() -> (bool, String) {
    let etas = [0.0, 0.25, 0.5, 0.648, 0.805, 0.9, 1.0];
    let deltas = [0.0, 0.3, 0.6, 1.0, 2.0, 4.0, 6.0];
    let conventions = [HomodyneConvention::QuarterTurn, HomodyneConvention::RealHermite];

    let mut completeness: f64 = 0.0;
    let mut negativity: f64 = 0.0;
    for &eta in &etas {
        for cutoff in [2, 4, 6] {
            let mut povms = vec![photodetection_povm(eta, cutoff).unwrap()];
            for &delta in &deltas {
                for conv in conventions {
                    povms.push(lossy_binned_homodyne(eta, delta, cutoff, conv).unwrap());
                }
            }
            for p in povms {
                completeness = completeness.max(p.completeness_defect().unwrap());
                negativity = negativity.max(-p.min_eigenvalue().unwrap());
            }
        }
    }

    let basis = ModeBasis::uniform(2, 3).unwrap();
    let mut semigroup: f64 = 0.0;
    for (seed, (&a, &b)) in etas.iter().zip(etas.iter().rev()).enumerate() {
        let rho = random_density(&basis, seed as u64);
        let two = LossChannel::new(b)
            .unwrap()
            .apply(&LossChannel::new(a).unwrap().apply(&rho, 0).unwrap(), 0)
            .unwrap();
        let one = LossChannel::new(a * b).unwrap().apply(&rho, 0).unwrap();
        semigroup = semigroup.max(two.max_abs_diff(&one));
    }

    let single = ModeBasis::single(5);
    let mut equivalence: f64 = 0.0;
    for (seed, &eta) in etas.iter().enumerate() {
        let rho = random_density(&single, 100 + seed as u64);
        let lossy = LossChannel::new(eta).unwrap().apply(&rho, 0).unwrap();
        for &delta in &deltas {
            let ideal = ideal_binned_homodyne(delta, 5, HomodyneConvention::QuarterTurn).unwrap();
            let povm = lossy_binned_homodyne(eta, delta, 5, HomodyneConvention::QuarterTurn).unwrap();
            let diff = lossy.expectation(&ideal).unwrap() - rho.expectation(&povm.plus).unwrap();
            equivalence = equivalence.max(diff.abs());
        }
        let diff = lossy.expectation(&photodetection_povm(1.0, 5).unwrap().minus).unwrap()
            - rho.expectation(&photodetection_povm(eta, 5).unwrap().minus).unwrap();
        equivalence = equivalence.max(diff.abs());
    }

    let mut herald: f64 = 0.0;
    for (lambda, t, coupling, eff) in [(0.1, 0.3, 1.0, 1.0), (0.3, 0.05, 0.9, 0.7), (0.02, 0.5, 0.5, 0.2)] {
        let pair = two_mode_squeezed(lambda, 5).unwrap();
        let loss = LossChannel::new(coupling).unwrap();
        let mut branches = Vec::new();
        for b in loss.branches(&pair.state, 0).unwrap() {
            branches.extend(loss.branches(&b, 1).unwrap());
        }
        let ancilla = ancilla_mixture(&AncillaModel::IdealSinglePhoton, coupling).unwrap();
        let p = bucket_pattern_probabilities(&branches, &ancilla, t, eff).unwrap();
        herald = herald.max((p.iter().sum::<f64>() - 1.0).abs());
    }

    let mut tsirelson = f64::NEG_INFINITY;
    let mut residual: f64 = 0.0;
    for &eta in &etas {
        for &delta in &deltas {
            for symmetry in [Symmetry::Symmetric, Symmetry::Asymmetric] {
                let s = BellScenario::new(symmetry, eta, 1.0 - 0.5 * eta)
                    .unwrap()
                    .with_delta(delta)
                    .with_cutoff(3);
                let b = build_bell_operator(&s).unwrap();
                let e = b.eig().unwrap();
                for (k, &value) in e.values.iter().enumerate() {
                    tsirelson = tsirelson.max(value.abs());
                    let v = e.vectors.column(k);
                    residual = residual.max((b.matrix() * v - v * C64::new(value, 0.0)).norm());
                }
            }
        }
    }

    let ok = completeness <= 1e-12
        && negativity <= 1e-10
        && semigroup <= 1e-12
        && equivalence <= 1e-12
        && herald <= 1e-10
        && tsirelson <= TSIRELSON_BOUND + 1e-9
        && residual <= 1e-10;
    (
        ok,
        format!(
            "properties: POVM completeness {completeness:.1e}, negativity {negativity:.1e}, loss semigroup \
             {semigroup:.1e}, state/POVM loss {equivalence:.1e}, herald normalization {herald:.1e}, \
             max |eigenvalue| {tsirelson:.4} (≤ 2√2), eigen residual {residual:.1e}"
        ),
    )
}

/// Source curves at coupling 1 and 0.9 (symmetric): strict dominance and the
/// composition `η_t*(0.9) = η_t*(1) / 0.9`.
fn coupling_curves(options: &SolverOptions) -> (bool, String) {
    let grid = [1.0, 0.9];
    let search = small_search();
    let curve = |coupling: f64| -> Vec<f64> {
        let base = SourceConfig {
            coupling,
            cutoff: 3,
            ..Default::default()
        };
        source_region_boundary(&grid, Symmetry::Symmetric, &base, &search, options)
            .expect("source boundary")
            .iter()
            .map(|p| p.critical_transmission().unwrap_or(f64::NAN))
            .collect()
    };
    let (full, lossy) = (curve(1.0), curve(0.9));
    let dominance = full.iter().zip(&lossy).all(|(a, b)| b > a);
    let composition = full
        .iter()
        .zip(&lossy)
        .map(|(a, b)| (b - a / 0.9).abs())
        .fold(0.0, f64::max);
    let ok = dominance && composition <= 0.005;
    let detail = grid
        .iter()
        .zip(full.iter().zip(&lossy))
        .map(|(d, (a, b))| format!("η_d={d}: {a:.4} / {b:.4} (composition {:.4})", a / 0.9))
        .collect::<Vec<_>>()
        .join("; ");
    (
        ok,
        format!(
            "coupling 1 / 0.9 source thresholds {detail}; dominance {dominance}, composition error \
             {composition:.4} (≤ 0.005)"
        ),
    )
}

fn psi2_reference() -> StateVector {
    let basis = ModeBasis::uniform(2, 2).unwrap();
    StateVector::from_terms(&basis, &[(FRAC_1_SQRT_2, &[2, 0]), (FRAC_1_SQRT_2, &[0, 2])]).unwrap()
}
