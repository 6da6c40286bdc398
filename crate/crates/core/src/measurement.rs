//! The optimal covariant measurement and the statistics it produces.
//!
//! The measurement projects onto the phase states
//! `|Psi_j> = e^{i t_j H} |Psi_0>` with `t_j = 2 pi j / (N+1)`. They form an
//! orthonormal basis, so this is an ordinary von Neumann measurement, and
//! outcome `j` is read as the time estimate `t_j`. For a state evolved for
//! time `t` the outcome probabilities are
//!
//! ```text
//! P(t_j | t) = |sum_m a_m e^{-i m (t - t_j)}|^2 / (N + 1)
//! ```
//!
//! Integrals over `t` use the periodic trapezoid rule, which is exact for
//! trigonometric polynomials of degree below the number of nodes.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::cost::{mean_cost_bound, wrap_angle, CostFunction};
use crate::error::{ClockError, Result};
use crate::states::ClockState;

/// Window around a removable singularity inside which a closed-form kernel
/// is replaced by its analytic limit.
pub const SINGULARITY_WINDOW: f64 = 1e-6;

/// Default grid for posterior plots, per Hilbert-space dimension.
pub const POSTERIOR_POINTS_PER_DIM: usize = 64;

/// Default quadrature density for the mutual information.
pub const INFO_POINTS_PER_DIM: usize = 32;

/// Estimate `t_j = 2 pi j / (N+1)` attached to outcome `j`.
pub fn outcome_time(n_ions: usize, j: usize) -> f64 {
    TAU * j as f64 / (n_ions + 1) as f64
}

/// Uniform grid `t_i = 2 pi i / M` on `[0, 2 pi)`.
pub fn uniform_grid(points: usize) -> Vec<f64> {
    (0..points).map(|i| TAU * i as f64 / points as f64).collect()
}

/// `integral_0^{2pi} g(t) dt` from samples on [`uniform_grid`].
pub fn periodic_trapezoid(samples: &[f64]) -> f64 {
    if samples.is_empty() {
        return 0.0;
    }
    TAU * samples.iter().sum::<f64>() / samples.len() as f64
}

/// Precomputed phase-state basis for one dimension.
struct PhaseBasis {
    dim: usize,
    /// `twiddle[r] = e^{2 pi i r / (N+1)}`.
    twiddle: Vec<Complex64>,
}

impl PhaseBasis {
    fn new(dim: usize) -> Self {
        let twiddle = (0..dim)
            .map(|r| Complex64::from_polar(1.0, TAU * r as f64 / dim as f64))
            .collect();
        Self { dim, twiddle }
    }

    fn probabilities(&self, amps: &[f64], t: f64) -> Vec<f64> {
        let t = t.rem_euclid(TAU);
        let evolved: Vec<Complex64> = amps
            .iter()
            .enumerate()
            .map(|(m, &a)| Complex64::from_polar(a, -(m as f64) * t))
            .collect();
        let scale = 1.0 / self.dim as f64;
        (0..self.dim)
            .map(|j| {
                let mut acc = Complex64::new(0.0, 0.0);
                for (m, b) in evolved.iter().enumerate() {
                    acc += b * self.twiddle[(m * j) % self.dim];
                }
                acc.norm_sqr() * scale
            })
            .collect()
    }
}

/// `P(t_j | t)` for all outcomes `j`, for a true time `t`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OutcomeDistribution {
    pub n_ions: usize,
    /// True time reduced to `[0, 2 pi)`.
    pub true_time: f64,
    pub probabilities: Vec<f64>,
}

pub fn outcome_distribution(state: &ClockState, t: f64) -> OutcomeDistribution {
    let basis = PhaseBasis::new(state.dim());
    OutcomeDistribution {
        n_ions: state.n_ions(),
        true_time: t.rem_euclid(TAU),
        probabilities: basis.probabilities(state.amplitudes(), t),
    }
}

/// Posterior density `P(t | t_r)` under a uniform prior, sampled on a
/// uniform grid over `[0, 2 pi)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PosteriorGrid {
    /// Outcome index when the estimate is one of the discrete `t_j`.
    pub outcome_index: Option<usize>,
    pub estimate: f64,
    pub grid: Vec<f64>,
    /// Density in 1/radian.
    pub density: Vec<f64>,
}

impl PosteriorGrid {
    pub fn integral(&self) -> f64 {
        periodic_trapezoid(&self.density)
    }

    pub fn peak(&self) -> f64 {
        self.density.iter().copied().fold(0.0, f64::max)
    }

    /// Signed offset `T = t - t_r` of grid point `i`, in `(-pi, pi]`.
    pub fn offset(&self, i: usize) -> f64 {
        wrap_angle(self.grid[i] - self.estimate)
    }

    /// Largest `|T|` on the grid whose density is at least half the peak.
    pub fn half_width_at_half_max(&self) -> f64 {
        let half = 0.5 * self.peak();
        (0..self.grid.len())
            .filter(|&i| self.density[i] >= half)
            .map(|i| self.offset(i).abs())
            .fold(0.0, f64::max)
    }

    /// Mean density over grid points with `||T| - center| <= half_window`.
    pub fn band_average(&self, center: f64, half_window: f64) -> f64 {
        let (mut sum, mut count) = (0.0, 0usize);
        for i in 0..self.grid.len() {
            if (self.offset(i).abs() - center).abs() <= half_window {
                sum += self.density[i];
                count += 1;
            }
        }
        if count == 0 {
            0.0
        } else {
            sum / count as f64
        }
    }
}

fn check_grid(state: &ClockState, grid_size: usize) -> Result<()> {
    let required = 4 * state.dim();
    if grid_size < required {
        Err(ClockError::GridTooCoarse {
            grid: grid_size,
            required,
        })
    } else {
        Ok(())
    }
}

/// Born-rule posterior for an arbitrary estimate `t_r`, as produced by the
/// continuous covariant family `e^{i t_r H}|Psi_0>`. The shape depends on
/// `t - t_r` only.
pub fn posterior_at_estimate(
    state: &ClockState,
    estimate: f64,
    grid_size: usize,
) -> Result<PosteriorGrid> {
    check_grid(state, grid_size)?;
    let grid = uniform_grid(grid_size);
    let amps = state.amplitudes();
    let dim = state.dim() as f64;
    let mut density: Vec<f64> = grid
        .iter()
        .map(|&t| {
            let x = (t - estimate).rem_euclid(TAU);
            let mut acc = Complex64::new(0.0, 0.0);
            for (m, &a) in amps.iter().enumerate() {
                acc += Complex64::from_polar(a, -(m as f64) * x);
            }
            acc.norm_sqr() / dim
        })
        .collect();
    let z = periodic_trapezoid(&density);
    density.iter_mut().for_each(|d| *d /= z);
    Ok(PosteriorGrid {
        outcome_index: None,
        estimate: estimate.rem_euclid(TAU),
        grid,
        density,
    })
}

/// Posterior of the true time given outcome `j`.
pub fn posterior(state: &ClockState, outcome_index: usize, grid_size: usize) -> Result<PosteriorGrid> {
    if outcome_index > state.n_ions() {
        return Err(ClockError::InvalidConfig(format!(
            "outcome {outcome_index} out of range 0..={}",
            state.n_ions()
        )));
    }
    let mut p = posterior_at_estimate(state, outcome_time(state.n_ions(), outcome_index), grid_size)?;
    p.outcome_index = Some(outcome_index);
    Ok(p)
}

/// Phase-state posterior kernel
/// `[1 - cos((N+1)T)] / [2 pi (N+1) (1 - cos T)]`, a normalized Fejer kernel.
pub fn phase_state_kernel(n_ions: usize, offset: f64) -> f64 {
    let n1 = (n_ions + 1) as f64;
    let s = (0.5 * offset).sin();
    if wrap_angle(offset).abs() < SINGULARITY_WINDOW {
        return n1 / TAU;
    }
    let num = (0.5 * n1 * offset).sin();
    num * num / (n1 * s * s) / TAU
}

/// Normalization constant quoted for the optimal-state kernel,
/// `pi / (4 (N+1)^3)`. It is approximate.
pub fn optimal_kernel_normalization(n_ions: usize) -> f64 {
    PI / (4.0 * ((n_ions + 1) as f64).powi(3))
}

/// Unnormalized optimal-state kernel
/// `[1 + cos((N+1)T)](1 + cos T) / ([1 - cos(T + d)][1 - cos(T - d)])`
/// with `d = pi/(N+1)`, written with half-angle identities.
pub fn optimal_state_kernel(n_ions: usize, offset: f64) -> f64 {
    let n1 = (n_ions + 1) as f64;
    let d = PI / n1;
    let t = wrap_angle(offset);
    let near = |x: f64| wrap_angle(x).abs() < SINGULARITY_WINDOW;
    if near(t - d) || near(t + d) {
        return n1 * n1 * (0.5 * d).cos().powi(2) / d.sin().powi(2);
    }
    let c1 = (0.5 * n1 * t).cos();
    let c2 = (0.5 * t).cos();
    let s1 = (0.5 * (t - d)).sin();
    let s2 = (0.5 * (t + d)).sin();
    (c1 * c1 * c2 * c2) / (s1 * s1 * s2 * s2)
}

fn closed_form_grid(
    n_ions: usize,
    outcome_index: usize,
    grid_size: usize,
    kernel: impl Fn(f64) -> f64,
) -> Result<PosteriorGrid> {
    if n_ions == 0 {
        return Err(ClockError::InvalidDimension);
    }
    if grid_size == 0 {
        return Err(ClockError::GridTooCoarse {
            grid: 0,
            required: 1,
        });
    }
    let estimate = outcome_time(n_ions, outcome_index);
    let grid = uniform_grid(grid_size);
    let density = grid.iter().map(|&t| kernel(t - estimate)).collect();
    Ok(PosteriorGrid {
        outcome_index: Some(outcome_index),
        estimate,
        grid,
        density,
    })
}

/// Closed-form posterior of the phase state for outcome `j`.
pub fn phase_state_posterior_closed_form(
    n_ions: usize,
    outcome_index: usize,
    grid_size: usize,
) -> Result<PosteriorGrid> {
    closed_form_grid(n_ions, outcome_index, grid_size, |x| phase_state_kernel(n_ions, x))
}

/// Approximate closed-form posterior of the optimal `sin2` state. The
/// normalization is recomputed on the grid instead of using
/// [`optimal_kernel_normalization`].
pub fn optimal_state_posterior_closed_form(
    n_ions: usize,
    outcome_index: usize,
    grid_size: usize,
) -> Result<PosteriorGrid> {
    let mut p = closed_form_grid(n_ions, outcome_index, grid_size, |x| {
        optimal_state_kernel(n_ions, x)
    })?;
    let z = p.integral();
    p.density.iter_mut().for_each(|d| *d /= z);
    Ok(p)
}

/// Quadrature size used by [`mean_cost_direct`].
pub fn mean_cost_grid_size(state: &ClockState, f: &CostFunction) -> usize {
    8 * (state.n_ions() + f.order().max(1))
}

/// Mean cost of estimating `t` by `t_j`, integrated against the outcome
/// statistics: `sum_j int P(t_j|t) f(t_j - t) dt / 2pi`.
pub fn mean_cost_direct(state: &ClockState, f: &CostFunction) -> f64 {
    mean_cost_direct_with_grid(state, f, mean_cost_grid_size(state, f))
}

pub fn mean_cost_direct_with_grid(state: &ClockState, f: &CostFunction, grid_size: usize) -> f64 {
    let basis = PhaseBasis::new(state.dim());
    let n = state.n_ions();
    let times: Vec<f64> = (0..=n).map(|j| outcome_time(n, j)).collect();
    let per_point: Vec<f64> = uniform_grid(grid_size)
        .par_iter()
        .map(|&t| {
            let p = basis.probabilities(state.amplitudes(), t);
            p.iter()
                .zip(&times)
                .map(|(pj, tj)| pj * f.evaluate(tj - t))
                .sum::<f64>()
        })
        .collect();
    per_point.iter().sum::<f64>() / grid_size as f64
}

/// Circular RMS error `sqrt(mean wrap(t_est - t)^2)` of the measurement.
///
/// The integral is evaluated exactly: with `t^2 = pi^2/3 + 4 sum_k (-1)^k
/// cos(k t) / k^2` on `(-pi, pi]`, it reduces to
/// `pi^2/3 + 4 sum_k (-1)^k c_k / k^2` over the amplitude autocorrelation.
pub fn circular_rms_error(state: &ClockState) -> f64 {
    let c = state.autocorrelation();
    let mut acc = PI * PI / 3.0 * c[0];
    for (k, ck) in c.iter().enumerate().skip(1) {
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        acc += 4.0 * sign * ck / (k * k) as f64;
    }
    acc.max(0.0).sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MutualInformation {
    pub bits: f64,
    pub nats: f64,
    /// `log2(N+1)`, the most any measurement of the clock can reveal.
    pub holevo_bound_bits: f64,
}

/// Information about `t` carried by the outcome, for a uniform prior.
///
/// Uses the outcome-side decomposition
/// `I = log2(N+1) + (1/2pi) int sum_j P(t_j|t) log2 P(t_j|t) dt`,
/// valid because covariance makes every outcome equally likely a priori.
pub fn mutual_information(state: &ClockState) -> MutualInformation {
    mutual_information_with_grid(state, INFO_POINTS_PER_DIM * state.dim())
}

pub fn mutual_information_with_grid(state: &ClockState, grid_size: usize) -> MutualInformation {
    let basis = PhaseBasis::new(state.dim());
    let per_point: Vec<f64> = uniform_grid(grid_size)
        .par_iter()
        .map(|&t| {
            basis
                .probabilities(state.amplitudes(), t)
                .iter()
                .filter(|p| **p > 0.0)
                .map(|p| p * p.log2())
                .sum::<f64>()
        })
        .collect();
    let bound = (state.dim() as f64).log2();
    let bits = bound + per_point.iter().sum::<f64>() / grid_size as f64;
    MutualInformation {
        bits,
        nats: bits * std::f64::consts::LN_2,
        holevo_bound_bits: bound,
    }
}

/// Summary of how well a state performs as a clock under cost `f`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EstimationReport {
    pub mean_cost: f64,
    pub circular_rms_error: f64,
    pub mutual_information_bits: f64,
}

pub fn estimation_report(state: &ClockState, f: &CostFunction) -> EstimationReport {
    EstimationReport {
        mean_cost: mean_cost_bound(state, f),
        circular_rms_error: circular_rms_error(state),
        mutual_information_bits: mutual_information(state).bits,
    }
}
