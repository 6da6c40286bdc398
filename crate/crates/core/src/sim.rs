//! Seeded Monte Carlo runs of the clock and analytic scans over `N`.
//!
//! Sample `i` draws from its own ChaCha8 stream: the generator is seeded
//! with `seed` and switched to stream `i`, so results never depend on how
//! samples are spread over threads. Per-sample values are reduced by a
//! fixed pairwise tree in sample order.

use std::f64::consts::{PI, TAU};
use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::cost::{mean_cost_bound, wrap_angle, CostFunction, CostLabel, PLOT_ORDER};
use crate::error::{ClockError, Result};
use crate::measurement::{circular_rms_error, mutual_information, outcome_distribution, outcome_time};
use crate::solver::optimal_state;
use crate::states::{
    basis_state, max_energy_spread_state, phase_state, product_state, ClockState,
};

pub const DEFAULT_BINS: usize = 101;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum StateKind {
    Product,
    Phase,
    /// Lowest eigenvector of the cost matrix; needs a cost.
    Optimal,
    MaxSpread,
    /// Energy eigenstate `|level>`, a diagnostic with no time information.
    Basis { level: usize },
}

impl StateKind {
    pub const CANONICAL: [StateKind; 4] = [
        StateKind::Product,
        StateKind::Phase,
        StateKind::Optimal,
        StateKind::MaxSpread,
    ];

    pub fn name(&self) -> String {
        match self {
            StateKind::Product => "product".into(),
            StateKind::Phase => "phase".into(),
            StateKind::Optimal => "optimal".into(),
            StateKind::MaxSpread => "max_spread".into(),
            StateKind::Basis { level } => format!("basis{level}"),
        }
    }
}

impl fmt::Display for StateKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

impl FromStr for StateKind {
    type Err = ClockError;

    /// Accepts `product`, `phase`, `optimal`, `max_spread` and `basis<k>`.
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "product" => Ok(StateKind::Product),
            "phase" => Ok(StateKind::Phase),
            "optimal" => Ok(StateKind::Optimal),
            "max_spread" => Ok(StateKind::MaxSpread),
            other => other
                .strip_prefix("basis")
                .and_then(|k| if k.is_empty() { Some(0) } else { k.parse().ok() })
                .map(|level| StateKind::Basis { level })
                .ok_or_else(|| ClockError::UnknownStateKind(other.to_string())),
        }
    }
}

/// A constructed state, with the solver's eigenvalue for `Optimal`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BuiltState {
    pub state: ClockState,
    pub eigenvalue: Option<f64>,
}

/// Builds a state of the given kind. The optimal kind minimizes the cost
/// truncated at order `N`.
pub fn build_state(kind: StateKind, n_ions: usize, cost: Option<CostLabel>) -> Result<BuiltState> {
    let state = match kind {
        StateKind::Product => product_state(n_ions)?,
        StateKind::Phase => phase_state(n_ions)?,
        StateKind::MaxSpread => max_energy_spread_state(n_ions)?,
        StateKind::Basis { level } => basis_state(n_ions, level)?,
        StateKind::Optimal => {
            let label = cost.ok_or(ClockError::MissingCost)?;
            let f = CostFunction::for_ions(label, n_ions)?;
            let opt = optimal_state(&f, n_ions)?;
            return Ok(BuiltState {
                state: opt.state,
                eigenvalue: Some(opt.mean_cost),
            });
        }
    };
    Ok(BuiltState {
        state,
        eigenvalue: None,
    })
}

/// Cost function used for pointwise evaluation in simulations.
pub fn simulation_cost(label: CostLabel, n_ions: usize) -> Result<CostFunction> {
    let order = if label.is_finite_series() {
        1
    } else {
        PLOT_ORDER.max(n_ions)
    };
    CostFunction::canonical(label, order)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimConfig {
    pub state_kind: StateKind,
    pub n_ions: usize,
    pub cost: CostLabel,
    pub samples: usize,
    pub seed: u64,
    pub bins: usize,
}

impl SimConfig {
    pub fn new(state_kind: StateKind, n_ions: usize, cost: CostLabel, samples: usize, seed: u64) -> Self {
        Self {
            state_kind,
            n_ions,
            cost,
            samples,
            seed,
            bins: DEFAULT_BINS,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.samples == 0 {
            return Err(ClockError::InvalidConfig("samples must be at least 1".into()));
        }
        if self.bins == 0 {
            return Err(ClockError::InvalidConfig("bins must be at least 1".into()));
        }
        if self.n_ions == 0 {
            return Err(ClockError::InvalidDimension);
        }
        Ok(())
    }
}

/// Counts of wrapped errors `t_j - t` in equal bins over `(-pi, pi]`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ErrorHistogram {
    /// Bin `b` covers `[edges[b], edges[b+1])`; the last bin also holds `pi`.
    pub edges: Vec<f64>,
    pub counts: Vec<u64>,
}

impl ErrorHistogram {
    fn new(bins: usize) -> Self {
        Self {
            edges: (0..=bins).map(|b| -PI + TAU * b as f64 / bins as f64).collect(),
            counts: vec![0; bins],
        }
    }

    fn bin_of(&self, err: f64) -> usize {
        let bins = self.counts.len();
        let b = ((err + PI) / TAU * bins as f64).floor();
        (b.max(0.0) as usize).min(bins - 1)
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimResult {
    pub config: SimConfig,
    pub empirical_mean_cost: f64,
    /// Root mean squared wrapped error.
    pub empirical_delta_t: f64,
    /// Sample standard deviation of the cost over `sqrt(S)`.
    pub standard_error_cost: f64,
    pub histogram: ErrorHistogram,
}

/// Draws one `(cost, error)` pair for sample `index`.
fn draw_sample(state: &ClockState, f: &CostFunction, seed: u64, index: u64) -> (f64, f64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    let t = TAU * rng.gen::<f64>();
    let u = rng.gen::<f64>();
    let dist = outcome_distribution(state, t);
    let probs = &dist.probabilities;
    let mut acc = 0.0;
    let mut outcome = probs.len() - 1;
    for (j, p) in probs.iter().enumerate() {
        acc += p;
        if u < acc {
            outcome = j;
            break;
        }
    }
    let diff = outcome_time(state.n_ions(), outcome) - t;
    (f.evaluate(diff), wrap_angle(diff))
}

/// Sum with a fixed binary tree over the slice order.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    match xs.len() {
        0 => 0.0,
        1 => xs[0],
        2..=8 => xs.iter().sum(),
        n => {
            let (a, b) = xs.split_at(n / 2);
            pairwise_sum(a) + pairwise_sum(b)
        }
    }
}

pub fn run_simulation(config: &SimConfig) -> Result<SimResult> {
    config.validate()?;
    let built = build_state(config.state_kind, config.n_ions, Some(config.cost))?;
    let f = simulation_cost(config.cost, config.n_ions)?;
    let state = &built.state;

    let draws: Vec<(f64, f64)> = (0..config.samples as u64)
        .into_par_iter()
        .map(|i| draw_sample(state, &f, config.seed, i))
        .collect();

    let s = config.samples as f64;
    let costs: Vec<f64> = draws.iter().map(|d| d.0).collect();
    let mean = pairwise_sum(&costs) / s;
    let sq_dev: Vec<f64> = costs.iter().map(|c| (c - mean).powi(2)).collect();
    let variance = if config.samples > 1 {
        pairwise_sum(&sq_dev) / (s - 1.0)
    } else {
        0.0
    };
    let sq_err: Vec<f64> = draws.iter().map(|d| d.1 * d.1).collect();

    let mut histogram = ErrorHistogram::new(config.bins);
    for (_, err) in &draws {
        let b = histogram.bin_of(*err);
        histogram.counts[b] += 1;
    }

    Ok(SimResult {
        config: config.clone(),
        empirical_mean_cost: mean,
        empirical_delta_t: (pairwise_sum(&sq_err) / s).sqrt(),
        standard_error_cost: (variance / s).sqrt(),
        histogram,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScanMetrics {
    pub mean_cost: f64,
    pub delta_t: f64,
    pub mutual_information_bits: f64,
    pub energy_stddev: f64,
    /// Whether the amplitudes equal the phase state's within `1e-9`.
    pub matches_phase_state: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScanRow {
    pub n_ions: usize,
    pub kind: StateKind,
    pub metrics: std::result::Result<ScanMetrics, ClockError>,
}

fn scan_one(kind: StateKind, label: CostLabel, n_ions: usize) -> Result<ScanMetrics> {
    let built = build_state(kind, n_ions, Some(label))?;
    let f = CostFunction::for_ions(label, n_ions)?;
    let state = &built.state;
    let phase_amp = 1.0 / (state.dim() as f64).sqrt();
    Ok(ScanMetrics {
        mean_cost: mean_cost_bound(state, &f),
        delta_t: circular_rms_error(state),
        mutual_information_bits: mutual_information(state).bits,
        energy_stddev: crate::states::energy_stats(state).energy_stddev,
        matches_phase_state: state
            .amplitudes()
            .iter()
            .all(|a| (a - phase_amp).abs() <= 1e-9),
    })
}

/// Analytic figures of merit for every `(N, kind)` pair, rows ordered by
/// `N` then by `kinds`.
pub fn scan_n(kinds: &[StateKind], label: CostLabel, n_values: &[usize]) -> Result<Vec<ScanRow>> {
    if kinds.is_empty() || n_values.is_empty() {
        return Err(ClockError::InvalidConfig("scan needs at least one N and one kind".into()));
    }
    if n_values.contains(&0) {
        return Err(ClockError::InvalidDimension);
    }
    let jobs: Vec<(usize, StateKind)> = n_values
        .iter()
        .flat_map(|&n| kinds.iter().map(move |&k| (n, k)))
        .collect();
    Ok(jobs
        .into_par_iter()
        .map(|(n_ions, kind)| ScanRow {
            n_ions,
            kind,
            metrics: scan_one(kind, label, n_ions),
        })
        .collect())
}
