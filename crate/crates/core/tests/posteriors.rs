use std::f64::consts::PI;

use qclock::cost::{CostFunction, CostLabel};
use qclock::measurement::{
    optimal_kernel_normalization, optimal_state_kernel, optimal_state_posterior_closed_form,
    phase_state_kernel, posterior, PosteriorGrid,
};
use qclock::solver::optimal_state;
use qclock::states::{phase_state, ClockState};

fn sin2_optimum(n: usize) -> ClockState {
    let f = CostFunction::canonical(CostLabel::Sin2, 1).unwrap();
    optimal_state(&f, n).unwrap().state
}

/// The approximate optimum `sin(pi (m + 1/2) / (N+1))`.
fn sine_profile(n: usize) -> ClockState {
    let amps = (0..=n)
        .map(|m| (PI * (m as f64 + 0.5) / (n + 1) as f64).sin())
        .collect();
    ClockState::normalized(n, amps).unwrap()
}

/// Sup-norm distance to the quoted kernel, relative to the posterior peak,
/// skipping grid points next to the removable singularities.
fn relative_distance_to_quoted_kernel(p: &PosteriorGrid, n: usize) -> f64 {
    let norm = optimal_kernel_normalization(n);
    let d = PI / (n + 1) as f64;
    let mut sup = 0.0_f64;
    for i in 0..p.grid.len() {
        let t = p.offset(i);
        if (t.abs() - d).abs() < 1e-3 {
            continue;
        }
        sup = sup.max((p.density[i] - norm * optimal_state_kernel(n, t)).abs());
    }
    sup / p.peak()
}

#[test]
fn quoted_kernel_describes_the_sine_profile_state() {
    let n = 20;
    let p = posterior(&sine_profile(n), 10, 21 * 100).unwrap();
    assert!(relative_distance_to_quoted_kernel(&p, n) < 0.02);
}

#[test]
fn quoted_kernel_approximates_the_exact_optimum() {
    // frozen distances for the exact eigenvector: 3.9% at N=20, then ~1/N
    let p = posterior(&sin2_optimum(20), 10, 21 * 100).unwrap();
    let d20 = relative_distance_to_quoted_kernel(&p, 20);
    assert!(d20 < 0.04, "{d20}");
    let p = posterior(&sin2_optimum(80), 40, 81 * 40).unwrap();
    let d80 = relative_distance_to_quoted_kernel(&p, 80);
    assert!(d80 < 0.012 && d80 < d20 / 3.0, "{d80}");
}

#[test]
fn quoted_normalization_is_close() {
    for n in [20, 60] {
        let renormalized = optimal_state_posterior_closed_form(n, 0, 200 * (n + 1)).unwrap();
        // constant the numerical renormalization put in front of the kernel
        let raw_peak = optimal_state_kernel(n, 0.0);
        let implied = renormalized.peak() / raw_peak;
        let quoted = optimal_kernel_normalization(n);
        assert!((implied / quoted - 1.0).abs() < 0.01, "n={n}: {implied} vs {quoted}");
    }
}

#[test]
fn sine_profile_overlaps_exact_optimum() {
    let overlap = |n: usize| -> f64 {
        let a = sin2_optimum(n);
        let b = sine_profile(n);
        a.amplitudes().iter().zip(b.amplitudes()).map(|(x, y)| x * y).sum()
    };
    // 0.998963 at N=20, crossing 0.999 at N=21
    assert!((overlap(20) - 0.998_963).abs() < 1e-6);
    for n in [21, 32, 64, 128, 256] {
        assert!(overlap(n) >= 0.999, "n={n}");
    }
}

#[test]
fn central_peak_widths() {
    let n = 20;
    let n1 = 21.0;
    // phase state: first zeros at 2 pi/(N+1)
    assert!(phase_state_kernel(n, 2.0 * PI / n1).abs() < 1e-12);
    assert!(phase_state_kernel(n, 1.9 * PI / n1) > 0.0);
    // optimal state: removable point at pi/(N+1), first zeros at 3 pi/(N+1)
    assert!(optimal_state_kernel(n, PI / n1) > 0.0);
    assert!(optimal_state_kernel(n, 3.0 * PI / n1).abs() < 1e-12 * optimal_state_kernel(n, 0.0));
    for k in 1..290 {
        let t = 3.0 * PI / n1 * k as f64 / 290.0;
        assert!(optimal_state_kernel(n, t) > 0.0, "t={t}");
    }
}

/// Kernel density averaged over one oscillation period centered at `t`.
fn lobe_average(n: usize, t: f64) -> f64 {
    let w = std::f64::consts::TAU / (n + 1) as f64;
    let k = 2000;
    let norm = optimal_kernel_normalization(n);
    (0..k)
        .map(|i| norm * optimal_state_kernel(n, t - w / 2.0 + w * (i as f64 + 0.5) / k as f64))
        .sum::<f64>()
        / k as f64
}

#[test]
fn optimal_tails_follow_inverse_quartic_law() {
    let mut scaled = Vec::new();
    for n in [20, 40] {
        for t in [PI / 4.0, PI / 2.0] {
            scaled.push(lobe_average(n, t) * (n as f64).powi(3) * t.powi(4));
        }
    }
    let lo = scaled.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = scaled.iter().copied().fold(0.0, f64::max);
    assert!(hi / lo < 2.0, "{scaled:?}");
}

#[test]
fn optimal_posterior_tails_far_below_phase_tails() {
    let n = 20;
    let grid = 21 * 64;
    let opt = posterior(&sin2_optimum(n), 10, grid).unwrap();
    let phase = posterior(&phase_state(n).unwrap(), 10, grid).unwrap();
    let half = PI / 21.0;
    for t in [PI / 2.0, 3.0 * PI / 4.0, PI - half] {
        let o = opt.band_average(t, half);
        let p = phase.band_average(t, half);
        assert!(5.0 * o <= p, "t={t}: {o} vs {p}");
    }
}
