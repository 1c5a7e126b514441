//! SIQR model with reinfection.
//!
//! Parameters are stored as base rates; every rate enters the vector field
//! raised to the fractional order (`λ^α`, `β^α`, ...). The reinfection rate
//! is not a free parameter: `r^α = β^α·p^α` with `p` the residual
//! susceptibility of recovered individuals.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::fractional::{self, FractionalOrder, GridFunction, SolverConfig};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("parameter {name} = {value} violates {constraint}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        constraint: &'static str,
    },
    #[error("state component {name} = {value} must be finite and non-negative")]
    InvalidState { name: &'static str, value: f64 },
}

/// Raises a base rate to the fractional order. `0^α = 0` for all admissible α.
#[inline]
pub fn effective_rate(base: f64, alpha: FractionalOrder) -> f64 {
    base.powf(alpha.value())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelParams {
    /// Recruitment of susceptibles (individuals/day).
    pub lambda: f64,
    /// Contact rate (1/(individuals·day)).
    pub beta: f64,
    /// Isolation rate of infected (1/day).
    pub sigma: f64,
    /// Recovery rate of isolated (1/day).
    pub theta: f64,
    /// Natural death rate, shared by all compartments (1/day).
    pub mu: f64,
    /// Susceptibility due to previous infection, in `[0, 1)`.
    pub p: f64,
    pub alpha: FractionalOrder,
}

impl Default for ModelParams {
    fn default() -> Self {
        ModelParams::table3()
    }
}

impl ModelParams {
    /// Literature baseline rates at integer order with `p = 0.30`.
    pub fn table3() -> Self {
        ModelParams {
            lambda: 1.45e-1,
            beta: 3.80e-4,
            sigma: 1.69e-2,
            theta: 1.81e-2,
            mu: 4.10e-4,
            p: 0.30,
            alpha: FractionalOrder::ONE,
        }
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        let rates = [
            ("lambda", self.lambda),
            ("beta", self.beta),
            ("sigma", self.sigma),
            ("theta", self.theta),
            ("mu", self.mu),
        ];
        for (name, value) in rates {
            if !(value.is_finite() && value >= 0.0) {
                return Err(ModelError::InvalidParameter {
                    name,
                    value,
                    constraint: "rate >= 0",
                });
            }
        }
        if !(self.p >= 0.0 && self.p < 1.0) {
            return Err(ModelError::InvalidParameter {
                name: "p",
                value: self.p,
                constraint: "p in [0, 1)",
            });
        }
        Ok(())
    }

    pub fn with_alpha(mut self, alpha: FractionalOrder) -> Self {
        self.alpha = alpha;
        self
    }

    /// Base reinfection rate `r = β·p`.
    pub fn reinfection_rate(&self) -> f64 {
        self.beta * self.p
    }

    pub fn effective(&self) -> EffectiveRates {
        let a = self.alpha;
        let beta = effective_rate(self.beta, a);
        EffectiveRates {
            lambda: effective_rate(self.lambda, a),
            beta,
            sigma: effective_rate(self.sigma, a),
            theta: effective_rate(self.theta, a),
            mu: effective_rate(self.mu, a),
            r: beta * effective_rate(self.p, a),
        }
    }
}

/// Rates after α-power scaling; these are what the vector field uses.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EffectiveRates {
    pub lambda: f64,
    pub beta: f64,
    pub sigma: f64,
    pub theta: f64,
    pub mu: f64,
    pub r: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StateVector {
    #[serde(rename = "S")]
    pub s: f64,
    #[serde(rename = "I")]
    pub i: f64,
    #[serde(rename = "Q")]
    pub q: f64,
    #[serde(rename = "R")]
    pub r: f64,
}

impl Default for StateVector {
    fn default() -> Self {
        default_initial_state()
    }
}

impl StateVector {
    pub const DIM: usize = 4;

    pub const fn new(s: f64, i: f64, q: f64, r: f64) -> Self {
        StateVector { s, i, q, r }
    }

    /// Builds an initial condition, rejecting negative or non-finite entries.
    pub fn initial(s: f64, i: f64, q: f64, r: f64) -> Result<Self, ModelError> {
        let state = StateVector { s, i, q, r };
        state.validate_initial()?;
        Ok(state)
    }

    pub fn validate_initial(&self) -> Result<(), ModelError> {
        for (name, value) in self.named() {
            if !(value.is_finite() && value >= 0.0) {
                return Err(ModelError::InvalidState { name, value });
            }
        }
        Ok(())
    }

    pub fn named(&self) -> [(&'static str, f64); 4] {
        [("S", self.s), ("I", self.i), ("Q", self.q), ("R", self.r)]
    }

    pub fn to_array(self) -> [f64; 4] {
        [self.s, self.i, self.q, self.r]
    }

    pub fn from_slice(y: &[f64]) -> Self {
        StateVector::new(y[0], y[1], y[2], y[3])
    }

    pub fn total(&self) -> f64 {
        self.s + self.i + self.q + self.r
    }

    pub fn is_finite(&self) -> bool {
        self.to_array().iter().all(|v| v.is_finite())
    }

    pub fn min_component(&self) -> f64 {
        self.to_array().into_iter().fold(f64::INFINITY, f64::min)
    }
}

/// `S(0), I(0), Q(0), R(0)` used throughout the scenarios.
pub fn default_initial_state() -> StateVector {
    StateVector::new(153.0, 138.0, 68.0, 20.0)
}

/// Vector field on effective rates, writing `(dS, dI, dQ, dR)` into `dy`.
#[inline]
pub fn siqr_field(k: &EffectiveRates, y: &[f64], dy: &mut [f64]) {
    let (s, i, q, r) = (y[0], y[1], y[2], y[3]);
    let infection = k.beta * s * i;
    let reinfection = k.r * r * i;
    dy[0] = k.lambda - infection - k.mu * s;
    dy[1] = infection + reinfection - k.sigma * i - k.mu * i;
    dy[2] = k.sigma * i - k.theta * q - k.mu * q;
    dy[3] = k.theta * q - reinfection - k.mu * r;
}

/// Right-hand side of the Caputo SIQR system at state `y`. The system is
/// autonomous; `t` is accepted for interface symmetry with the solver.
pub fn siqr_rhs(params: &ModelParams, _t: f64, y: &StateVector) -> StateVector {
    let mut dy = [0.0; 4];
    siqr_field(&params.effective(), &y.to_array(), &mut dy);
    StateVector::from_slice(&dy)
}

/// Integrates the model from `initial` with the fractional PECE solver.
pub fn simulate(
    params: &ModelParams,
    initial: &StateVector,
    config: &SolverConfig,
) -> fractional::Result<GridFunction> {
    let rates = params.effective();
    fractional::solve_caputo_ivp(
        |_, y, dy| siqr_field(&rates, y, dy),
        &initial.to_array(),
        params.alpha,
        config,
    )
}
