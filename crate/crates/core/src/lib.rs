//! Optimal quantum clocks built from `N` two-level ions.
//!
//! The library works in the symmetric subspace of the ions, where a clock
//! state is a real amplitude vector over the energy levels `|m>`,
//! `m = 0..N`. It provides:
//!
//! - [`states`]: product, phase, maximal-spread and energy-eigenstate clocks;
//! - [`cost`]: periodic even cost functions as cosine series, the cost
//!   matrix `F` and Holevo's mean-cost bound;
//! - [`solver`]: the lowest eigenpair of `F`, i.e. the optimal clock state;
//! - [`measurement`]: the phase-state measurement, posteriors, circular
//!   error and mutual information;
//! - [`sim`]: seeded Monte Carlo runs and scans over `N`.
//!
//! ```
//! use qclock::{cost::{CostFunction, CostLabel}, solver::optimal_state};
//!
//! let sin2 = CostFunction::canonical(CostLabel::Sin2, 1).unwrap();
//! let opt = optimal_state(&sin2, 20).unwrap();
//! let exact = 2.0 - 2.0 * (std::f64::consts::PI / 22.0).cos();
//! assert!((opt.mean_cost - exact).abs() < 1e-12);
//! ```
//!
//! A longer walk-through lives in the guide under `book/`.

pub mod cost;
pub mod error;
pub mod measurement;
pub mod sim;
pub mod solver;
pub mod states;

pub use error::{ClockError, Result};

// Compile and run the guide's code listings as doctests.
#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../README.md")]
    mod readme {}
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/states.md")]
    mod states {}
    #[doc = include_str!("../../../book/src/cost.md")]
    mod cost {}
    #[doc = include_str!("../../../book/src/solver.md")]
    mod solver {}
    #[doc = include_str!("../../../book/src/measurement.md")]
    mod measurement {}
    #[doc = include_str!("../../../book/src/information.md")]
    mod information {}
    #[doc = include_str!("../../../book/src/simulation.md")]
    mod simulation {}
}
