//! Clock states in the symmetric energy basis.
//!
//! A clock built from `N` two-level ions lives, without loss of generality,
//! in the `N + 1` dimensional symmetric subspace spanned by `|m>`, the state
//! with `m` quanta of energy (`E_m = m`, `hbar = 1`). A pure state is stored
//! as its real, nonnegative amplitude vector `a_0..a_N`.

use serde::Serialize;

use crate::error::{ClockError, Result};

/// Tolerance on `sum a_m^2 = 1` accepted by [`ClockState::new`].
pub const NORM_TOLERANCE: f64 = 1e-12;

/// A pure clock state `sum_m a_m |m>` with real nonnegative amplitudes.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClockState {
    n_ions: usize,
    amplitudes: Vec<f64>,
}

impl ClockState {
    /// Wraps an amplitude vector after checking length, sign and normalization.
    pub fn new(n_ions: usize, amplitudes: Vec<f64>) -> Result<Self> {
        check_ions(n_ions)?;
        if amplitudes.len() != n_ions + 1 {
            return Err(ClockError::DimensionMismatch {
                expected: n_ions + 1,
                found: amplitudes.len(),
            });
        }
        if let Some((index, &value)) = amplitudes
            .iter()
            .enumerate()
            .find(|(_, a)| !a.is_finite() || **a < 0.0)
        {
            return Err(ClockError::InvalidAmplitude { index, value });
        }
        let norm_sq: f64 = amplitudes.iter().map(|a| a * a).sum();
        if (norm_sq - 1.0).abs() > NORM_TOLERANCE {
            return Err(ClockError::NotNormalized { norm_sq });
        }
        Ok(Self { n_ions, amplitudes })
    }

    /// Like [`ClockState::new`] but rescales the vector to unit norm first.
    pub fn normalized(n_ions: usize, mut amplitudes: Vec<f64>) -> Result<Self> {
        let norm = amplitudes.iter().map(|a| a * a).sum::<f64>().sqrt();
        if norm > 0.0 && norm.is_finite() {
            amplitudes.iter_mut().for_each(|a| *a /= norm);
        }
        Self::new(n_ions, amplitudes)
    }

    pub fn n_ions(&self) -> usize {
        self.n_ions
    }

    /// Hilbert-space dimension `N + 1`.
    pub fn dim(&self) -> usize {
        self.n_ions + 1
    }

    pub fn amplitudes(&self) -> &[f64] {
        &self.amplitudes
    }

    /// Autocorrelation `c_k = sum_m a_m a_{m+k}` for `k = 0..=N`.
    ///
    /// Every covariant-measurement statistic of the state depends on the
    /// amplitudes only through this sequence.
    pub fn autocorrelation(&self) -> Vec<f64> {
        let a = &self.amplitudes;
        (0..a.len())
            .map(|k| a.iter().zip(&a[k..]).map(|(x, y)| x * y).sum())
            .collect()
    }
}

fn check_ions(n_ions: usize) -> Result<()> {
    if n_ions == 0 {
        Err(ClockError::InvalidDimension)
    } else {
        Ok(())
    }
}

/// `ln k!` for `k = 0..=n`, accumulated term by term.
pub(crate) fn ln_factorials(n: usize) -> Vec<f64> {
    let mut table = Vec::with_capacity(n + 1);
    let mut acc = 0.0;
    table.push(acc);
    for k in 1..=n {
        acc += (k as f64).ln();
        table.push(acc);
    }
    table
}

/// `ln C(n, m)` for `m = 0..=n`, symmetric in `m <-> n - m` bit for bit.
pub(crate) fn ln_binomials(n: usize) -> Vec<f64> {
    let lf = ln_factorials(n);
    let mut out = vec![0.0; n + 1];
    for m in 0..=n / 2 {
        let v = lf[n] - lf[m] - lf[n - m];
        out[m] = v;
        out[n - m] = v;
    }
    out
}

/// Every ion in `(|0> + |1>)/sqrt(2)`, projected onto the symmetric basis:
/// `a_m = sqrt(C(N, m)) / 2^(N/2)`.
pub fn product_state(n_ions: usize) -> Result<ClockState> {
    check_ions(n_ions)?;
    let half_ln2 = 0.5 * n_ions as f64 * std::f64::consts::LN_2;
    let amps = ln_binomials(n_ions)
        .into_iter()
        .map(|lc| (0.5 * lc - half_ln2).exp())
        .collect();
    ClockState::normalized(n_ions, amps)
}

/// The phase state `|Psi_0> = (N+1)^(-1/2) sum_m |m>`.
pub fn phase_state(n_ions: usize) -> Result<ClockState> {
    check_ions(n_ions)?;
    let a = 1.0 / ((n_ions + 1) as f64).sqrt();
    ClockState::new(n_ions, vec![a; n_ions + 1])
}

/// `(|0> + |N>)/sqrt(2)`, the state with the largest energy spread `N/2`.
pub fn max_energy_spread_state(n_ions: usize) -> Result<ClockState> {
    check_ions(n_ions)?;
    let mut amps = vec![0.0; n_ions + 1];
    amps[0] = std::f64::consts::FRAC_1_SQRT_2;
    amps[n_ions] = std::f64::consts::FRAC_1_SQRT_2;
    ClockState::new(n_ions, amps)
}

/// The energy eigenstate `|level>`. It does not evolve and records no time.
pub fn basis_state(n_ions: usize, level: usize) -> Result<ClockState> {
    check_ions(n_ions)?;
    if level > n_ions {
        return Err(ClockError::InvalidConfig(format!(
            "basis level {level} exceeds N = {n_ions}"
        )));
    }
    let mut amps = vec![0.0; n_ions + 1];
    amps[level] = 1.0;
    ClockState::new(n_ions, amps)
}

/// Energy moments of a clock state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EnergyStats {
    pub mean_energy: f64,
    /// `Delta E = sqrt(<H^2> - <H>^2)`.
    pub energy_stddev: f64,
    /// The resolution limit `Delta t >= 1/N` obtained from `Delta E <= N/2`.
    pub resolution_bound: f64,
}

pub fn energy_stats(state: &ClockState) -> EnergyStats {
    let (mut m1, mut m2) = (0.0, 0.0);
    for (m, a) in state.amplitudes().iter().enumerate() {
        let p = a * a;
        let e = m as f64;
        m1 += e * p;
        m2 += e * e * p;
    }
    EnergyStats {
        mean_energy: m1,
        energy_stddev: (m2 - m1 * m1).max(0.0).sqrt(),
        resolution_bound: 1.0 / state.n_ions() as f64,
    }
}
