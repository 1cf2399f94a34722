//! Gaussian covariance-matrix toolkit for a two-mode squeezed vacuum shared
//! between an inertial observer (mode `A`) and a uniformly accelerated one
//! whose field splits into the Rindler modes `I` and `II`.
//!
//! Conventions used throughout: `ħ = 1`, `a = (q + ip)/√2`, so the vacuum
//! has quadrature variance 1/2 and physical states have symplectic
//! eigenvalues `≥ 1/2`. Logarithms are natural.
//!
//! * [`symplectic`] builds covariance matrices and symplectic maps and
//!   assembles the three-mode state.
//! * [`entanglement`] computes partial transposes, symplectic spectra and
//!   the logarithmic negativity.
//! * [`fock`] is a brute-force truncated Fock-space oracle used to check the
//!   Gaussian results.
//! * [`cli`] holds the sweep/verify machinery behind the `unruh-gauss` binary.

pub mod cli;
pub mod entanglement;
mod error;
pub mod fock;
pub mod symplectic;

pub use entanglement::{
    lambda_closed_form, log_negativity, partial_transpose, purity, symplectic_eigenvalues,
    EntanglementReport, Partition,
};
pub use error::{Error, Result};
pub use symplectic::{
    analytic_entries, apply, build_scenario_state, marginal, two_mode_squeezer, unruh_map,
    vacuum_covariance, AnalyticEntries, CovarianceMatrix, ModeLabel, ScenarioParams, SymplecticMap,
};
