use std::f64::consts::{PI, TAU};

use proptest::prelude::*;
use qclock::cost::{cost_matrix, mean_cost_bound, product_cost_closed_form, CostFunction, CostLabel};
use qclock::measurement::{
    circular_rms_error, mean_cost_direct, mutual_information, outcome_distribution, posterior,
    phase_state_posterior_closed_form,
};
use qclock::sim::{build_state, StateKind};
use qclock::solver::smallest_eigenpair;
use qclock::states::{
    energy_stats, max_energy_spread_state, phase_state, product_state, ClockState,
};

fn random_state() -> impl Strategy<Value = ClockState> {
    (1usize..40).prop_flat_map(|n| {
        prop::collection::vec(0.0f64..1.0, n + 1).prop_filter_map("zero vector", move |v| {
            ClockState::normalized(n, v).ok()
        })
    })
}

#[test]
fn constructors_are_normalized() {
    for n in 1..=512 {
        for s in [
            product_state(n).unwrap(),
            phase_state(n).unwrap(),
            max_energy_spread_state(n).unwrap(),
        ] {
            let norm: f64 = s.amplitudes().iter().map(|a| a * a).sum();
            assert!((norm - 1.0).abs() <= 1e-12, "n={n}");
        }
        let a = product_state(n).unwrap();
        let a = a.amplitudes();
        assert!((0..=n).all(|m| a[m] == a[n - m]));
    }
}

#[test]
fn product_closed_form_matches_bound() {
    let f = CostFunction::canonical(CostLabel::Sin2, 1).unwrap();
    for n in 1..=512 {
        let bound = mean_cost_bound(&product_state(n).unwrap(), &f);
        assert!((bound - product_cost_closed_form(n).unwrap()).abs() < 1e-10, "n={n}");
    }
}

#[test]
fn evaluate_is_even_and_periodic() {
    for label in CostLabel::CANONICAL {
        let f = CostFunction::canonical(label, 256).unwrap();
        for i in 0..1000 {
            let t = -3.0 * PI + 6.0 * PI * i as f64 / 999.0;
            assert!((f.evaluate(t) - f.evaluate(-t)).abs() < 1e-12);
            assert!((f.evaluate(t) - f.evaluate(t + TAU)).abs() < 1e-12, "{label} t={t}");
        }
    }
}

#[test]
fn spread_state_has_the_largest_energy_spread() {
    for n in 1..=64 {
        let de = energy_stats(&max_energy_spread_state(n).unwrap()).energy_stddev;
        assert!((de - n as f64 / 2.0).abs() < 1e-12);
    }
}

#[test]
fn canonical_states_obey_time_energy_relation() {
    for n in 1..=64 {
        for kind in StateKind::CANONICAL {
            let s = build_state(kind, n, Some(CostLabel::Sin2)).unwrap().state;
            let dt = circular_rms_error(&s);
            let de = energy_stats(&s).energy_stddev;
            assert!(dt * de >= 0.5 - 1e-9, "{kind} n={n}: {}", dt * de);
            assert!(dt >= 1.0 / n as f64);
        }
    }
}

#[test]
fn posterior_born_rule_matches_fejer_kernel() {
    for n in [1, 5, 20, 33] {
        let grid = 8 * (n + 1) * 7;
        for j in [0, n / 2, n] {
            let a = posterior(&phase_state(n).unwrap(), j, grid).unwrap();
            let b = phase_state_posterior_closed_form(n, j, grid).unwrap();
            let sup = a
                .density
                .iter()
                .zip(&b.density)
                .map(|(x, y)| (x - y).abs())
                .fold(0.0, f64::max);
            assert!(sup < 1e-8, "n={n} j={j} sup={sup}");
        }
    }
}

#[test]
fn holevo_saturation_on_canonical_states() {
    for n in [1, 3, 8] {
        for kind in StateKind::CANONICAL {
            for label in CostLabel::CANONICAL {
                let s = build_state(kind, n, Some(label)).unwrap().state;
                let f = CostFunction::for_ions(label, n).unwrap();
                let d = mean_cost_direct(&s, &f);
                assert!((d - mean_cost_bound(&s, &f)).abs() < 1e-9, "{kind} {label} n={n}");
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn energy_spread_never_exceeds_half_n(s in random_state()) {
        let st = energy_stats(&s);
        let n = s.n_ions() as f64;
        prop_assert!(st.energy_stddev <= n / 2.0 + 1e-12);
        prop_assert!(st.mean_energy >= 0.0 && st.mean_energy <= n);
    }

    #[test]
    fn sin2_cost_respects_resolution_bound(s in random_state()) {
        let f = CostFunction::canonical(CostLabel::Sin2, 1).unwrap();
        let n = s.n_ions() as f64;
        prop_assert!(mean_cost_bound(&s, &f) >= 1.0 / (n * n) - 1e-12);
    }

    #[test]
    fn outcomes_are_complete(s in random_state(), t in -50.0f64..50.0) {
        let p = outcome_distribution(&s, t).probabilities;
        prop_assert!(p.iter().all(|x| *x >= 0.0));
        prop_assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn outcomes_shift_covariantly(s in random_state(), t in 0.0f64..TAU) {
        let dim = s.dim();
        let p = outcome_distribution(&s, t).probabilities;
        let q = outcome_distribution(&s, t + TAU / dim as f64).probabilities;
        for j in 0..dim {
            prop_assert!((q[(j + 1) % dim] - p[j]).abs() < 1e-12);
        }
    }

    #[test]
    fn information_below_holevo_bound(s in random_state()) {
        let mi = mutual_information(&s);
        prop_assert!(mi.bits <= mi.holevo_bound_bits + 1e-9);
        prop_assert!(mi.bits >= -1e-9);
    }

    #[test]
    fn holevo_saturation_random_states(s in random_state(), which in 0usize..4) {
        let label = CostLabel::CANONICAL[which];
        let f = CostFunction::for_ions(label, s.n_ions()).unwrap();
        prop_assert!((mean_cost_direct(&s, &f) - mean_cost_bound(&s, &f)).abs() < 1e-9);
    }

    #[test]
    fn eigenvalue_is_variational_minimum(
        n in 1usize..30,
        which in 0usize..4,
        raw in prop::collection::vec(-1.0f64..1.0, 100 * 31),
    ) {
        let f = CostFunction::for_ions(CostLabel::CANONICAL[which], n).unwrap();
        let m = cost_matrix(&f, n).unwrap();
        let lambda = smallest_eigenpair(&m).unwrap().eigenvalue;
        for chunk in raw.chunks(31).take(100) {
            let u = &chunk[..=n];
            let norm = u.iter().map(|x| x * x).sum::<f64>().sqrt();
            if norm == 0.0 {
                continue;
            }
            let v: Vec<f64> = u.iter().map(|x| x / norm).collect();
            prop_assert!(m.quadratic_form(&v) >= lambda - 1e-10);
        }
    }
}
