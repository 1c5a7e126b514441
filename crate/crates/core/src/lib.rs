//! Fractional-order SIQR epidemic dynamics with reinfection.
//!
//! - [`fractional`]: Caputo fractional ODE solver (Adams–Bashforth–Moulton
//!   PECE on a uniform grid), Mittag-Leffler reference values and an
//!   empirical convergence-order estimator.
//! - [`model`]: parameters, α-power rate scaling and the SIQR vector field.
//! - [`analysis`]: disease-free equilibrium, `R0`, stability and sensitivity.
//! - [`scenarios`]: baseline runs, sweeps and the (σ, θ) end-state grid.
//! - [`output`]: CSV and SVG writers.

pub mod analysis;
pub mod fractional;
pub mod model;
pub mod output;
pub mod scenarios;

pub use analysis::{AnalysisError, SensitivityReport, StabilityReport, Verdict};
pub use fractional::{FractionalError, FractionalOrder, GridFunction, SolverConfig};
pub use model::{ModelParams, StateVector};
pub use scenarios::{Execution, GridResult, ScenarioError, Scenarios, Summary, Trajectory};
