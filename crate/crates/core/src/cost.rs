//! Periodic even cost functions and the cost matrix `F`.
//!
//! A cost is written as a cosine series `f(t) = w0 - sum_k w_k cos(k t)` with
//! `w_k >= 0` for `k >= 1`. For a pure state with real amplitudes `a`, the
//! best mean cost reachable by any measurement is the quadratic form
//! `a^T F a` with
//!
//! ```text
//! F_mm' = w0 delta_mm' - 1/2 sum_k w_k (delta_{m,m'+k} + delta_{m+k,m'})
//! ```
//!
//! Only `w_0..w_N` enter `F`, so finite truncation at order `N` is exact.

use std::f64::consts::{PI, TAU};
use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::error::{ClockError, Result};
use crate::states::{ln_binomials, ClockState};

/// Truncation order used for pointwise evaluation of infinite series.
pub const PLOT_ORDER: usize = 256;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CostLabel {
    /// `4 sin^2(t/2) = 2 (1 - cos t)`.
    Sin2,
    /// `|t|` on the principal interval `(-pi, pi]`.
    Abs,
    /// `|sin(t/2)|`.
    AbsSinHalf,
    /// `-delta(t mod 2 pi)`.
    NegDelta,
    Custom,
}

impl CostLabel {
    pub const CANONICAL: [CostLabel; 4] = [
        CostLabel::Sin2,
        CostLabel::Abs,
        CostLabel::AbsSinHalf,
        CostLabel::NegDelta,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            CostLabel::Sin2 => "sin2",
            CostLabel::Abs => "abs",
            CostLabel::AbsSinHalf => "abs_sin_half",
            CostLabel::NegDelta => "neg_delta",
            CostLabel::Custom => "custom",
        }
    }

    /// Whether the Fourier series stops after finitely many terms.
    pub fn is_finite_series(self) -> bool {
        matches!(self, CostLabel::Sin2 | CostLabel::Custom)
    }
}

impl fmt::Display for CostLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for CostLabel {
    type Err = ClockError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "sin2" => Ok(CostLabel::Sin2),
            "abs" => Ok(CostLabel::Abs),
            "abs_sin_half" => Ok(CostLabel::AbsSinHalf),
            "neg_delta" => Ok(CostLabel::NegDelta),
            other => Err(ClockError::UnknownCost(other.to_string())),
        }
    }
}

/// Fourier data `(w0, w_1..w_K)` of a cost function.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CostFunction {
    label: CostLabel,
    w0: f64,
    coefficients: Vec<f64>,
}

impl CostFunction {
    /// A user-supplied series. `coefficients[k-1]` is `w_k`.
    pub fn custom(w0: f64, coefficients: Vec<f64>) -> Result<Self> {
        Self::with_label(CostLabel::Custom, w0, coefficients)
    }

    fn with_label(label: CostLabel, w0: f64, coefficients: Vec<f64>) -> Result<Self> {
        if !w0.is_finite() {
            return Err(ClockError::InvalidConfig("w0 must be finite".into()));
        }
        if let Some((i, &value)) = coefficients
            .iter()
            .enumerate()
            .find(|(_, w)| !w.is_finite() || **w < 0.0)
        {
            return Err(ClockError::NegativeCoefficient { index: i + 1, value });
        }
        Ok(Self {
            label,
            w0,
            coefficients,
        })
    }

    /// Truncated Fourier series of one of the canonical costs.
    pub fn canonical(label: CostLabel, order: usize) -> Result<Self> {
        if order == 0 {
            return Err(ClockError::InvalidOrder);
        }
        let (w0, coefficients) = match label {
            CostLabel::Sin2 => (2.0, vec![2.0]),
            CostLabel::Abs => (
                PI / 2.0,
                (1..=order)
                    .map(|k| {
                        if k % 2 == 1 {
                            4.0 / (PI * (k * k) as f64)
                        } else {
                            0.0
                        }
                    })
                    .collect(),
            ),
            CostLabel::AbsSinHalf => (
                2.0 / PI,
                (1..=order)
                    .map(|k| 4.0 / (PI * (4 * k * k - 1) as f64))
                    .collect(),
            ),
            CostLabel::NegDelta => (-1.0 / TAU, vec![1.0 / PI; order]),
            CostLabel::Custom => {
                return Err(ClockError::UnknownCost("custom".into()));
            }
        };
        Self::with_label(label, w0, coefficients)
    }

    /// Canonical cost truncated at order `N`, which is exact for matrices.
    pub fn for_ions(label: CostLabel, n_ions: usize) -> Result<Self> {
        Self::canonical(label, n_ions.max(1))
    }

    pub fn label(&self) -> CostLabel {
        self.label
    }

    pub fn w0(&self) -> f64 {
        self.w0
    }

    /// `w_1..w_K`.
    pub fn coefficients(&self) -> &[f64] {
        &self.coefficients
    }

    /// `w_k`, zero past the truncation order.
    pub fn weight(&self, k: usize) -> f64 {
        if k == 0 {
            self.w0
        } else {
            self.coefficients.get(k - 1).copied().unwrap_or(0.0)
        }
    }

    pub fn order(&self) -> usize {
        self.coefficients.len()
    }

    /// The truncated series at `t`. The argument is first mapped to `|t|`
    /// with `t` in `(-pi, pi]`, so the result is exactly even and periodic up
    /// to the rounding of the reduction.
    pub fn evaluate(&self, t: f64) -> f64 {
        let x = wrap_angle(t).abs();
        let mut acc = self.w0;
        for (i, w) in self.coefficients.iter().enumerate() {
            if *w != 0.0 {
                acc -= w * ((i + 1) as f64 * x).cos();
            }
        }
        acc
    }
}

/// Maps `x` to `(-pi, pi]`.
pub fn wrap_angle(x: f64) -> f64 {
    let r = (x + PI).rem_euclid(TAU) - PI;
    if r == -PI {
        PI
    } else {
        r
    }
}

/// Dense real symmetric matrix, stored row-major, with its bandwidth.
#[derive(Debug, Clone, PartialEq)]
pub struct CostMatrix {
    dim: usize,
    entries: Vec<f64>,
    bandwidth: usize,
}

impl CostMatrix {
    /// Wraps arbitrary symmetric data.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let dim = rows.len();
        if dim == 0 || rows.iter().any(|r| r.len() != dim) {
            return Err(ClockError::NotSymmetric);
        }
        let mut entries = Vec::with_capacity(dim * dim);
        for r in rows {
            entries.extend_from_slice(r);
        }
        let mut bandwidth = 0;
        for i in 0..dim {
            for j in 0..dim {
                let v = entries[i * dim + j];
                if !v.is_finite() || v != entries[j * dim + i] {
                    return Err(ClockError::NotSymmetric);
                }
                if v != 0.0 {
                    bandwidth = bandwidth.max(i.abs_diff(j));
                }
            }
        }
        Ok(Self {
            dim,
            entries,
            bandwidth,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn bandwidth(&self) -> usize {
        self.bandwidth
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.dim + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.entries[i * self.dim..(i + 1) * self.dim]
    }

    pub fn mul_vec(&self, v: &[f64]) -> Vec<f64> {
        (0..self.dim)
            .map(|i| self.row(i).iter().zip(v).map(|(a, b)| a * b).sum())
            .collect()
    }

    /// `v^T F v`.
    pub fn quadratic_form(&self, v: &[f64]) -> f64 {
        self.mul_vec(v).iter().zip(v).map(|(a, b)| a * b).sum()
    }

    /// Maximum absolute row sum.
    pub fn norm_inf(&self) -> f64 {
        (0..self.dim)
            .map(|i| self.row(i).iter().map(|x| x.abs()).sum::<f64>())
            .fold(0.0, f64::max)
    }
}

/// Builds `F` for `N` ions. Coefficients beyond `k = N` are ignored.
pub fn cost_matrix(f: &CostFunction, n_ions: usize) -> Result<CostMatrix> {
    if n_ions == 0 {
        return Err(ClockError::InvalidDimension);
    }
    let dim = n_ions + 1;
    let mut entries = vec![0.0; dim * dim];
    for i in 0..dim {
        entries[i * dim + i] = f.w0();
        for j in (i + 1)..dim {
            let v = -0.5 * f.weight(j - i);
            entries[i * dim + j] = v;
            entries[j * dim + i] = v;
        }
    }
    let bandwidth = (1..dim).rev().find(|&k| f.weight(k) != 0.0).unwrap_or(0);
    Ok(CostMatrix {
        dim,
        entries,
        bandwidth,
    })
}

/// Holevo's lower bound on the mean cost of `state`, attained by the
/// covariant phase-state measurement:
/// `w0 - sum_{k=1..N} w_k sum_m a_m a_{m+k}`.
pub fn mean_cost_bound(state: &ClockState, f: &CostFunction) -> f64 {
    let c = state.autocorrelation();
    let mut acc = f.w0() * c[0];
    for (k, ck) in c.iter().enumerate().skip(1) {
        let w = f.weight(k);
        if w != 0.0 {
            acc -= w * ck;
        }
    }
    acc
}

/// `2 [1 - 2^-N sum_{i<N} sqrt(C(N,i) C(N,i+1))]`, the `sin2` cost of the
/// product state, summed in the log domain.
pub fn product_cost_closed_form(n_ions: usize) -> Result<f64> {
    if n_ions == 0 {
        return Err(ClockError::InvalidDimension);
    }
    let lc = ln_binomials(n_ions);
    let ln2n = n_ions as f64 * std::f64::consts::LN_2;
    let s: f64 = lc
        .windows(2)
        .map(|w| (0.5 * (w[0] + w[1]) - ln2n).exp())
        .sum();
    Ok(2.0 * (1.0 - s))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::states::{phase_state, product_state};

    #[test]
    fn canonical_series() {
        let f = CostFunction::canonical(CostLabel::Sin2, 7).unwrap();
        assert_eq!((f.w0(), f.coefficients()), (2.0, &[2.0][..]));

        let f = CostFunction::canonical(CostLabel::NegDelta, 3).unwrap();
        assert_eq!(f.w0(), -1.0 / TAU);
        assert_eq!(f.coefficients(), &[1.0 / PI; 3]);

        let f = CostFunction::canonical(CostLabel::Abs, 4).unwrap();
        let want = [4.0 / PI, 0.0, 4.0 / (9.0 * PI), 0.0];
        for (w, e) in f.coefficients().iter().zip(want) {
            assert!((w - e).abs() < 1e-15);
        }
        assert!(CostFunction::canonical(CostLabel::Abs, 0).is_err());
        assert!("cubic".parse::<CostLabel>().is_err());
    }

    #[test]
    fn custom_rejects_negative_weights() {
        assert!(matches!(
            CostFunction::custom(1.0, vec![0.5, -0.1]),
            Err(ClockError::NegativeCoefficient { index: 2, .. })
        ));
        // negative w0 is allowed
        assert!(CostFunction::custom(-3.0, vec![1.0]).is_ok());
    }

    #[test]
    fn sin2_values() {
        let f = CostFunction::canonical(CostLabel::Sin2, 1).unwrap();
        assert!((f.evaluate(PI) - 4.0).abs() < 1e-15);
        assert_eq!(f.evaluate(0.0), 0.0);
        for t in [0.3, 1.7, -2.5] {
            let want = 4.0 * (t / 2.0_f64).sin().powi(2);
            assert!((f.evaluate(t) - want).abs() < 1e-14);
        }
    }

    #[test]
    fn abs_series_tail_bound() {
        let f = CostFunction::canonical(CostLabel::Abs, 64).unwrap();
        assert!((f.evaluate(PI / 2.0) - PI / 2.0).abs() < 2e-2);
    }

    #[test]
    fn wrap_boundaries() {
        assert_eq!(wrap_angle(PI), PI);
        assert_eq!(wrap_angle(-PI), PI);
        assert!((wrap_angle(3.0 * PI / 2.0) + PI / 2.0).abs() < 1e-15);
        assert_eq!(wrap_angle(0.0), 0.0);
    }

    #[test]
    fn small_matrices() {
        let sin2 = CostFunction::canonical(CostLabel::Sin2, 1).unwrap();
        let m = cost_matrix(&sin2, 2).unwrap();
        let want = [[2.0, -1.0, 0.0], [-1.0, 2.0, -1.0], [0.0, -1.0, 2.0]];
        for i in 0..3 {
            for j in 0..3 {
                assert_eq!(m.get(i, j), want[i][j]);
            }
        }
        assert_eq!(m.bandwidth(), 1);

        let nd = CostFunction::canonical(CostLabel::NegDelta, 2).unwrap();
        let m = cost_matrix(&nd, 2).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                assert!((m.get(i, j) + 1.0 / TAU).abs() < 1e-16);
            }
        }
        assert_eq!(m.bandwidth(), 2);
    }

    #[test]
    fn zero_padding_is_irrelevant() {
        let mut padded = vec![2.0];
        padded.extend(std::iter::repeat(0.0).take(39));
        let a = cost_matrix(&CostFunction::custom(2.0, vec![2.0]).unwrap(), 5).unwrap();
        let b = cost_matrix(&CostFunction::custom(2.0, padded).unwrap(), 5).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn high_order_coefficients_ignored() {
        let f = CostFunction::canonical(CostLabel::NegDelta, 50).unwrap();
        let g = CostFunction::canonical(CostLabel::NegDelta, 4).unwrap();
        assert_eq!(cost_matrix(&f, 4).unwrap(), cost_matrix(&g, 4).unwrap());
        assert_eq!(cost_matrix(&f, 4).unwrap().bandwidth(), 4);
    }

    #[test]
    fn bound_examples() {
        let sin2 = CostFunction::canonical(CostLabel::Sin2, 1).unwrap();
        assert!((mean_cost_bound(&phase_state(2).unwrap(), &sin2) - 2.0 / 3.0).abs() < 1e-15);
        let p2 = mean_cost_bound(&product_state(2).unwrap(), &sin2);
        assert!((p2 - (2.0 - 2f64.sqrt())).abs() < 1e-15);

        for n in [2, 5, 20] {
            let nd = CostFunction::for_ions(CostLabel::NegDelta, n).unwrap();
            let v = mean_cost_bound(&phase_state(n).unwrap(), &nd);
            assert!((v + (n + 1) as f64 / TAU).abs() < 1e-12);
        }
    }

    #[test]
    fn product_closed_form() {
        assert!((product_cost_closed_form(1).unwrap() - 1.0).abs() < 1e-15);
        assert!((product_cost_closed_form(2).unwrap() - (2.0 - 2f64.sqrt())).abs() < 1e-15);
        let v = product_cost_closed_form(400).unwrap() * 400.0;
        assert!((0.9..=1.1).contains(&v), "{v}");
        assert!(product_cost_closed_form(0).is_err());
    }
}
