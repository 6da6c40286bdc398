//! Smallest eigenpair of a real symmetric matrix.
//!
//! The optimal clock state for a cost `f` minimizes `a^T F a` on the unit
//! sphere, i.e. it is the eigenvector of the lowest eigenvalue of `F`.
//!
//! Method: dense matrices are reduced to tridiagonal form by Householder
//! reflections (skipped when the recorded bandwidth is at most one). The
//! lowest eigenvalue of the tridiagonal matrix is located by Sturm-count
//! bisection, and its eigenvector by inverse iteration with the shift at the
//! bisection's lower end, where the `LDL^T` pivots are known to be positive.
//! The vector is mapped back through the reflectors and the reported
//! eigenvalue is its Rayleigh quotient on the original matrix.

use serde::Serialize;

use crate::cost::{cost_matrix, CostFunction, CostMatrix};
use crate::error::{ClockError, Result};
use crate::states::ClockState;

/// Residual accepted relative to `||F||_inf`.
pub const RESIDUAL_TOLERANCE: f64 = 1e-10;

/// Entries more negative than this after sign fixing are a convention error.
pub const SIGN_TOLERANCE: f64 = 1e-10;

const MAX_BISECTIONS: usize = 2048;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EigenPair {
    pub eigenvalue: f64,
    pub eigenvector: Vec<f64>,
    /// `||F v - lambda v||_2`.
    pub residual_norm: f64,
}

struct Tridiagonal {
    diag: Vec<f64>,
    off: Vec<f64>,
    /// Unit Householder vectors; reflector `k` acts on indices `k+1..n`.
    reflectors: Vec<Vec<f64>>,
}

fn tridiagonalize(f: &CostMatrix) -> Tridiagonal {
    let n = f.dim();
    if f.bandwidth() <= 1 {
        return Tridiagonal {
            diag: (0..n).map(|i| f.get(i, i)).collect(),
            off: (0..n.saturating_sub(1)).map(|i| f.get(i + 1, i)).collect(),
            reflectors: Vec::new(),
        };
    }

    let mut a: Vec<Vec<f64>> = (0..n).map(|i| f.row(i).to_vec()).collect();
    let mut off = vec![0.0; n - 1];
    let mut reflectors = Vec::with_capacity(n.saturating_sub(2));

    for k in 0..n.saturating_sub(2) {
        let x: Vec<f64> = (k + 1..n).map(|i| a[i][k]).collect();
        let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        let tail = x[1..].iter().map(|v| v * v).sum::<f64>();
        if tail == 0.0 {
            off[k] = x[0];
            reflectors.push(Vec::new());
            continue;
        }
        let alpha = if x[0] >= 0.0 { -norm } else { norm };
        let mut v = x;
        v[0] -= alpha;
        let vn = v.iter().map(|t| t * t).sum::<f64>().sqrt();
        v.iter_mut().for_each(|t| *t /= vn);

        // trailing block B <- H B H with H = I - 2 v v^T:
        // p = B v, q = p - (v^T p) v, B <- B - 2 (v q^T + q v^T)
        let m = n - k - 1;
        let p: Vec<f64> = (0..m)
            .map(|i| (0..m).map(|j| a[k + 1 + i][k + 1 + j] * v[j]).sum())
            .collect();
        let kappa: f64 = v.iter().zip(&p).map(|(x, y)| x * y).sum();
        let q: Vec<f64> = p.iter().zip(&v).map(|(pi, vi)| pi - kappa * vi).collect();
        for i in 0..m {
            for j in 0..m {
                a[k + 1 + i][k + 1 + j] -= 2.0 * (v[i] * q[j] + q[i] * v[j]);
            }
        }
        off[k] = alpha;
        for i in k + 2..n {
            a[i][k] = 0.0;
            a[k][i] = 0.0;
        }
        reflectors.push(v);
    }
    if n >= 2 {
        off[n - 2] = a[n - 1][n - 2];
    }
    Tridiagonal {
        diag: (0..n).map(|i| a[i][i]).collect(),
        off,
        reflectors,
    }
}

impl Tridiagonal {
    /// Number of `LDL^T` pivots of `T - sigma I` that are not strictly
    /// positive, i.e. the number of eigenvalues `<= sigma`.
    fn count_at_or_below(&self, sigma: f64) -> usize {
        let mut count = 0;
        let mut q = 1.0;
        for i in 0..self.diag.len() {
            let coupling = if i == 0 {
                0.0
            } else {
                self.off[i - 1] * self.off[i - 1] / q
            };
            q = self.diag[i] - sigma - coupling;
            if q <= 0.0 {
                count += 1;
                if q == 0.0 {
                    q = -f64::MIN_POSITIVE;
                }
            }
        }
        count
    }

    fn gershgorin(&self) -> (f64, f64) {
        let n = self.diag.len();
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for i in 0..n {
            let r = if i > 0 { self.off[i - 1].abs() } else { 0.0 }
                + if i + 1 < n { self.off[i].abs() } else { 0.0 };
            lo = lo.min(self.diag[i] - r);
            hi = hi.max(self.diag[i] + r);
        }
        (lo, hi)
    }

    /// Bracket `[lo, hi]` of the lowest eigenvalue with no eigenvalue `<= lo`.
    fn lowest_eigenvalue(&self) -> (f64, f64) {
        let (glo, ghi) = self.gershgorin();
        let scale = glo.abs().max(ghi.abs()).max(f64::MIN_POSITIVE);
        let mut lo = glo - 1e-3 * scale - f64::MIN_POSITIVE;
        let mut hi = ghi + 1e-3 * scale;
        while self.count_at_or_below(lo) > 0 {
            lo -= scale;
        }
        for _ in 0..MAX_BISECTIONS {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if self.count_at_or_below(mid) == 0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        (lo, hi)
    }

    /// Solves `(T - sigma I) x = b`; all pivots must be positive.
    fn solve_shifted(&self, sigma: f64, b: &[f64]) -> Vec<f64> {
        let n = self.diag.len();
        let mut d = vec![0.0; n];
        let mut l = vec![0.0; n];
        for i in 0..n {
            d[i] = if i == 0 {
                self.diag[0] - sigma
            } else {
                // same arithmetic as the Sturm count, so the signs agree
                l[i] = self.off[i - 1] / d[i - 1];
                self.diag[i] - sigma - self.off[i - 1] * self.off[i - 1] / d[i - 1]
            };
            if d[i] <= 0.0 {
                d[i] = f64::EPSILON * f64::MIN_POSITIVE.sqrt();
            }
        }
        let mut z = b.to_vec();
        for i in 1..n {
            z[i] -= l[i] * z[i - 1];
        }
        for i in 0..n {
            z[i] /= d[i];
        }
        for i in (0..n.saturating_sub(1)).rev() {
            z[i] -= l[i + 1] * z[i + 1];
        }
        z
    }

    fn mul_vec(&self, v: &[f64]) -> Vec<f64> {
        let n = self.diag.len();
        (0..n)
            .map(|i| {
                let mut s = self.diag[i] * v[i];
                if i > 0 {
                    s += self.off[i - 1] * v[i - 1];
                }
                if i + 1 < n {
                    s += self.off[i] * v[i + 1];
                }
                s
            })
            .collect()
    }

    fn back_transform(&self, y: &mut [f64]) {
        for (k, v) in self.reflectors.iter().enumerate().rev() {
            if v.is_empty() {
                continue;
            }
            let seg = &mut y[k + 1..];
            let dot: f64 = seg.iter().zip(v).map(|(a, b)| a * b).sum();
            for (s, vi) in seg.iter_mut().zip(v) {
                *s -= 2.0 * dot * vi;
            }
        }
    }
}

fn normalize(v: &mut [f64]) -> f64 {
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm > 0.0 && norm.is_finite() {
        v.iter_mut().for_each(|x| *x /= norm);
    }
    norm
}

fn residual(f: &CostMatrix, lambda: f64, v: &[f64]) -> f64 {
    f.mul_vec(v)
        .iter()
        .zip(v)
        .map(|(fv, vi)| (fv - lambda * vi).powi(2))
        .sum::<f64>()
        .sqrt()
}

/// Deterministic start vector with no special symmetry.
fn start_vector(n: usize) -> Vec<f64> {
    const GOLDEN: f64 = 0.618_033_988_749_894_9;
    let mut v: Vec<f64> = (0..n)
        .map(|i| 1.0 + 0.5 * ((i as f64 + 1.0) * GOLDEN).fract())
        .collect();
    normalize(&mut v);
    v
}

/// Lowest eigenvalue and a unit eigenvector of `f`.
///
/// The vector is signed so that its largest-magnitude entry (first one on
/// ties) is positive. Fails with [`ClockError::NoConvergence`] when the
/// residual contract `||F v - lambda v|| <= 1e-10 ||F||_inf` is not met
/// within `10 * dim` inverse-iteration steps.
pub fn smallest_eigenpair(f: &CostMatrix) -> Result<EigenPair> {
    let n = f.dim();
    let tri = tridiagonalize(f);
    let (sigma, _) = tri.lowest_eigenvalue();

    let tol = RESIDUAL_TOLERANCE * f.norm_inf();
    let tri_scale = {
        let (lo, hi) = tri.gershgorin();
        lo.abs().max(hi.abs())
    };
    let budget = 10 * n;

    let mut y = start_vector(n);
    let mut iterations = 0;
    while iterations < budget {
        iterations += 1;
        let mut x = tri.solve_shifted(sigma, &y);
        if !x.iter().all(|t| t.is_finite()) || normalize(&mut x) == 0.0 {
            break;
        }
        y = x;
        let ty = tri.mul_vec(&y);
        let rho: f64 = ty.iter().zip(&y).map(|(a, b)| a * b).sum();
        let r = ty
            .iter()
            .zip(&y)
            .map(|(a, b)| (a - rho * b).powi(2))
            .sum::<f64>()
            .sqrt();
        if r <= 1e-13 * tri_scale.max(f64::MIN_POSITIVE) {
            break;
        }
    }

    tri.back_transform(&mut y);
    normalize(&mut y);
    fix_sign(&mut y);
    let eigenvalue = f.quadratic_form(&y);
    let residual_norm = residual(f, eigenvalue, &y);
    if !(residual_norm <= tol) {
        return Err(ClockError::NoConvergence {
            iterations,
            residual: residual_norm,
        });
    }
    Ok(EigenPair {
        eigenvalue,
        eigenvector: y,
        residual_norm,
    })
}

fn fix_sign(v: &mut [f64]) {
    let mut best = 0;
    for (i, x) in v.iter().enumerate() {
        if x.abs() > v[best].abs() {
            best = i;
        }
    }
    if v.get(best).is_some_and(|x| *x < 0.0) {
        v.iter_mut().for_each(|x| *x = -*x);
    }
}

/// Optimal clock state for cost `f` together with its achieved mean cost.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OptimalState {
    pub state: ClockState,
    /// Minimal mean cost, the lowest eigenvalue of `F`.
    pub mean_cost: f64,
    pub residual_norm: f64,
}

/// The state minimizing Holevo's mean-cost bound for `f` on `N` ions.
pub fn optimal_state(f: &CostFunction, n_ions: usize) -> Result<OptimalState> {
    let matrix = cost_matrix(f, n_ions)?;
    let pair = smallest_eigenpair(&matrix)?;
    let mut amps = pair.eigenvector;
    for (index, a) in amps.iter_mut().enumerate() {
        if *a < -SIGN_TOLERANCE {
            return Err(ClockError::SignConvention { index, value: *a });
        }
        if *a < 0.0 {
            *a = 0.0;
        }
    }
    let state = ClockState::normalized(n_ions, amps)?;
    Ok(OptimalState {
        state,
        mean_cost: pair.eigenvalue,
        residual_norm: pair.residual_norm,
    })
}
