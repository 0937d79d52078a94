use approx::assert_relative_eq;
use proptest::prelude::*;
use spinflip_core::oracle::{mode_sum_gamma, Evolution, ModeGrid};
use spinflip_core::{
    decoherence_curve, gamma_pulsed, gamma_pulsed_interference, gamma_unperturbed,
    pulse_frequency_scan, EnvironmentSpec, Error, Execution, PulseSequence, QuadratureConfig,
};
use statrs::function::gamma::gamma;

fn cfg() -> QuadratureConfig {
    QuadratureConfig::default()
}

/// Vacuum `Γ₀` for a power-law bath at T = 0, n ≠ 1.
fn zero_temperature_gamma(alpha: f64, wc: f64, n: f64, t: f64) -> f64 {
    let x = wc * t;
    let s = n - 1.0;
    alpha * gamma(s) * wc.powf(s) * (1.0 - (1.0 + x * x).powf(-s / 2.0) * (s * x.atan()).cos())
}

#[test]
fn zero_temperature_power_law_closed_forms() {
    for n in [0.5, 2.0, 3.0] {
        let env = EnvironmentSpec::new(0.2, 1.3, n, 0.0).unwrap();
        for t in [0.05, 0.7, 4.0, 30.0] {
            let r = gamma_unperturbed(&env, t, &cfg()).unwrap();
            let want = zero_temperature_gamma(0.2, 1.3, n, t);
            assert_relative_eq!(r.gamma_total, want, max_relative = 1e-7);
        }
    }
}

#[test]
fn classical_limit_approaches_linear_growth() {
    // at T ≫ ω_c the thermal part tends to 2αT[t atan(ω_c t) - ln(1 + ω_c² t²)/(2ω_c)]
    let env = EnvironmentSpec::ohmic(0.25, 1.0, 1e4).unwrap();
    for t in [0.5, 3.0, 20.0] {
        let r = gamma_unperturbed(&env, t, &cfg()).unwrap();
        let approx = 2.0 * 0.25 * 1e4 * (t * t.atan() - (1.0 + t * t).ln() / 2.0);
        assert_relative_eq!(r.gamma_thermal, approx, max_relative = 1e-3);
    }
}

#[test]
fn two_thousand_mode_grid_matches_quadrature() {
    for ratio in [1e-2, 1e2] {
        let env = EnvironmentSpec::with_cutoff_ratio(0.25, 1.0, 1.0, ratio).unwrap();
        let grid = ModeGrid::discretize(&env, env.frequency_ceiling(30.0), 2000).unwrap();
        let t = 1.0;
        let free = gamma_unperturbed(&env, t, &cfg()).unwrap().gamma_total;
        let sum = mode_sum_gamma(&grid, env.temperature(), &Evolution::Free(t)).unwrap();
        assert_relative_eq!(free, sum, max_relative = 1e-3);
        for n in [1, 2, 5, 10, 20] {
            let seq = PulseSequence::spanning(n, t).unwrap();
            let q = gamma_pulsed(&env, &seq, &cfg()).unwrap().gamma_total;
            let s = mode_sum_gamma(&grid, env.temperature(), &Evolution::Pulsed(seq)).unwrap();
            assert_relative_eq!(q, s, max_relative = 1e-3);
        }
    }
}

#[test]
fn interference_route_agrees_with_kernel_route() {
    let env = EnvironmentSpec::with_cutoff_ratio(0.25, 1.0, 1.0, 1.0).unwrap();
    for (n, dt) in [(1, 0.4), (3, 1.1), (7, 2.0)] {
        let seq = PulseSequence::new(n, dt).unwrap();
        let a = gamma_pulsed(&env, &seq, &cfg()).unwrap();
        let b = gamma_pulsed_interference(&env, &seq, &cfg()).unwrap();
        assert_relative_eq!(a.gamma_total, b.gamma_total, max_relative = 1e-7);
    }
}

#[test]
fn one_fast_cycle_beats_free_evolution() {
    let env = EnvironmentSpec::ohmic(0.25, 1.0, 0.0).unwrap();
    let seq = PulseSequence::new(1, 0.5).unwrap();
    let r = gamma_pulsed(&env, &seq, &cfg()).unwrap();
    let free = gamma_unperturbed(&env, 1.0, &cfg()).unwrap();
    assert!(r.gamma_total < free.gamma_total);
}

#[test]
fn scans_and_curves_keep_order_and_report_per_point() {
    let env = EnvironmentSpec::with_cutoff_ratio(0.25, 1.0, 1.0, 1e2).unwrap();
    let scan = pulse_frequency_scan(&env, 10.0, &[8, 1, 3], &cfg()).unwrap();
    let cycles: Vec<u64> = scan.iter().map(|p| p.cycles).collect();
    assert_eq!(cycles, vec![1, 3, 8]);
    assert_relative_eq!(scan[0].tau_c_over_dt, 0.2, max_relative = 1e-15);
    assert!(pulse_frequency_scan(&env, 10.0, &[0, 1], &cfg()).is_err());

    let curve = decoherence_curve(&env, &[0.0, 1.0, 5.0], &cfg()).unwrap();
    assert_eq!(curve[0].result.as_ref().unwrap().coherence, 1.0);
    assert!(decoherence_curve(&env, &[1.0, 1.0], &cfg()).is_err());
    assert!(decoherence_curve(&env, &[], &cfg()).is_err());
}

#[test]
fn tiny_panel_budget_fails_cleanly() {
    let env = EnvironmentSpec::ohmic(0.25, 1.0, 1.0).unwrap();
    let cfg = QuadratureConfig {
        max_panels: 64,
        ..QuadratureConfig::default()
    };
    match gamma_unperturbed(&env, 1e3, &cfg) {
        Err(Error::QuadratureNotConverged { .. }) => {}
        other => panic!("expected quadrature failure, got {other:?}"),
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn sequential_and_parallel_are_bitwise_equal(
        n in 1u64..30,
        dt in 0.01f64..3.0,
        log_ratio in -2.0f64..2.0,
    ) {
        let env = EnvironmentSpec::with_cutoff_ratio(0.25, 1.0, 1.0, 10f64.powf(log_ratio)).unwrap();
        let seq = PulseSequence::new(n, dt).unwrap();
        let s = gamma_pulsed(&env, &seq, &cfg().with_execution(Execution::Sequential)).unwrap();
        let p = gamma_pulsed(&env, &seq, &cfg().with_execution(Execution::Parallel)).unwrap();
        prop_assert_eq!(s.gamma_total.to_bits(), p.gamma_total.to_bits());
    }

    #[test]
    fn vacuum_and_thermal_add_up(
        t in 0.01f64..50.0,
        log_ratio in -2.0f64..2.0,
        n in prop::sample::select(vec![0.5, 1.0, 2.0]),
    ) {
        let env = EnvironmentSpec::with_cutoff_ratio(0.3, 1.0, n, 10f64.powf(log_ratio)).unwrap();
        let r = gamma_unperturbed(&env, t, &cfg()).unwrap();
        let sum = r.gamma_vacuum + r.gamma_thermal;
        prop_assert!((r.gamma_total - sum).abs() <= r.quadrature_error_estimate + 1e-12 * r.gamma_total);
        prop_assert!(((-r.gamma_vacuum).exp() * (-r.gamma_thermal).exp() - r.coherence).abs() <= 1e-9);
    }

    #[test]
    fn result_does_not_depend_on_tolerance(
        n in 1u64..12,
        dt in 0.05f64..2.0,
        log_ratio in -2.0f64..2.0,
    ) {
        let env = EnvironmentSpec::with_cutoff_ratio(0.25, 1.0, 1.0, 10f64.powf(log_ratio)).unwrap();
        let seq = PulseSequence::new(n, dt).unwrap();
        let loose = gamma_pulsed(&env, &seq, &QuadratureConfig::with_tolerance(1e-6)).unwrap();
        let tight = gamma_pulsed(&env, &seq, &QuadratureConfig::with_tolerance(1e-11)).unwrap();
        prop_assert!((loose.gamma_total - tight.gamma_total).abs() <= 1e-5 * tight.gamma_total);
    }
}
