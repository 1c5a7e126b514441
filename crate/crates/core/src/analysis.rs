//! Disease-free equilibrium, basic reproduction number, local stability and
//! sensitivity of `R0`.
//!
//! Everything here is evaluated on effective (α-powered) rates.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{EffectiveRates, ModelParams, StateVector};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AnalysisError {
    #[error("natural death rate is zero; the disease-free equilibrium is undefined")]
    ZeroDeathRate,
    #[error("transition matrix V is singular (det = {0})")]
    SingularV(f64),
    #[error("R0 = {0} is within 1e-9 of the threshold; stability is undecided")]
    BoundaryCase(f64),
    #[error("sensitivity index undefined: {0} is zero")]
    ZeroRate(&'static str),
    #[error("stability verdict disagrees with eigenvalues (R0 = {r0}, max eigenvalue = {max_eigenvalue})")]
    InconsistentVerdict { r0: f64, max_eigenvalue: f64 },
}

pub type Result<T> = std::result::Result<T, AnalysisError>;

const BOUNDARY_TOLERANCE: f64 = 1e-9;
const FD_RELATIVE_STEP: f64 = 1e-6;

fn rates(params: &ModelParams) -> Result<EffectiveRates> {
    let k = params.effective();
    if k.mu == 0.0 {
        return Err(AnalysisError::ZeroDeathRate);
    }
    Ok(k)
}

pub fn disease_free_equilibrium(params: &ModelParams) -> Result<StateVector> {
    let k = rates(params)?;
    Ok(StateVector::new(k.lambda / k.mu, 0.0, 0.0, 0.0))
}

fn r0_from_rates(lambda: f64, beta: f64, sigma: f64, mu: f64) -> f64 {
    beta * lambda / (mu * (sigma + mu))
}

/// `R0 = β^α λ^α / (μ^α (σ^α + μ^α))`.
pub fn r0_closed_form(params: &ModelParams) -> Result<f64> {
    let k = rates(params)?;
    Ok(r0_from_rates(k.lambda, k.beta, k.sigma, k.mu))
}

type Mat2 = [[f64; 2]; 2];

fn mat_mul(a: &Mat2, b: &Mat2) -> Mat2 {
    let mut c = [[0.0; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            c[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
        }
    }
    c
}

fn spectral_radius(m: &Mat2) -> f64 {
    let trace = m[0][0] + m[1][1];
    let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
    let half = 0.5 * trace;
    let disc = half * half - det;
    if disc >= 0.0 {
        let root = disc.sqrt();
        (half + root).abs().max((half - root).abs())
    } else {
        // Complex pair: |λ|² = det.
        det.sqrt()
    }
}

/// Next-generation matrix `F` and transition matrix `V` on the infected
/// subsystem `(I, R)`, evaluated at the disease-free equilibrium.
pub fn next_generation_matrices(params: &ModelParams) -> Result<(Mat2, Mat2)> {
    let k = rates(params)?;
    let s_star = k.lambda / k.mu;
    let (i_star, r_star) = (0.0, 0.0);
    let f = [
        [k.beta * s_star + k.r * r_star, k.beta * i_star],
        [0.0, 0.0],
    ];
    let v = [
        [k.sigma + k.mu, 0.0],
        [k.beta * s_star, k.beta * i_star + k.mu],
    ];
    Ok((f, v))
}

/// `R0` as the spectral radius of `F·V⁻¹`.
pub fn r0_ngm(params: &ModelParams) -> Result<f64> {
    let (f, v) = next_generation_matrices(params)?;
    let det = v[0][0] * v[1][1] - v[0][1] * v[1][0];
    if det == 0.0 {
        return Err(AnalysisError::SingularV(det));
    }
    let v_inv = [
        [v[1][1] / det, -v[0][1] / det],
        [-v[1][0] / det, v[0][0] / det],
    ];
    Ok(spectral_radius(&mat_mul(&f, &v_inv)))
}

/// Eigenvalues of the Jacobian at the disease-free equilibrium, in the fixed
/// order `[−θ−μ, (βλ − μ² − μσ)/μ, −μ, −μ]`.
pub fn dfe_eigenvalues(params: &ModelParams) -> Result<[f64; 4]> {
    let k = rates(params)?;
    Ok([
        -k.theta - k.mu,
        (k.beta * k.lambda - k.mu * k.mu - k.mu * k.sigma) / k.mu,
        -k.mu,
        -k.mu,
    ])
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    LocallyAsymptoticallyStable,
    Unstable,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StabilityReport {
    pub dfe: StateVector,
    pub r0: f64,
    pub eigenvalues: [f64; 4],
    pub verdict: Verdict,
}

/// Local stability of the disease-free equilibrium: stable iff `R0 < 1`.
///
/// Refuses `R0 ≈ 1`, and cross-checks the verdict against the sign of the
/// largest eigenvalue.
pub fn classify_dfe(params: &ModelParams) -> Result<StabilityReport> {
    let dfe = disease_free_equilibrium(params)?;
    let r0 = r0_closed_form(params)?;
    if (r0 - 1.0).abs() < BOUNDARY_TOLERANCE {
        return Err(AnalysisError::BoundaryCase(r0));
    }
    let eigenvalues = dfe_eigenvalues(params)?;
    let verdict = if r0 < 1.0 {
        Verdict::LocallyAsymptoticallyStable
    } else {
        Verdict::Unstable
    };
    let max_eigenvalue = eigenvalues.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let eigen_stable = max_eigenvalue < 0.0;
    if eigen_stable != (verdict == Verdict::LocallyAsymptoticallyStable) {
        return Err(AnalysisError::InconsistentVerdict { r0, max_eigenvalue });
    }
    Ok(StabilityReport {
        dfe,
        r0,
        eigenvalues,
        verdict,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FiniteDifferenceCheck {
    pub parameter: String,
    pub analytic: f64,
    pub numeric: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SensitivityReport {
    pub gamma_lambda: f64,
    pub gamma_beta: f64,
    pub gamma_sigma: f64,
    pub finite_difference_check: Vec<FiniteDifferenceCheck>,
}

/// Central-difference elasticity `(∂R0/∂x)·(x/R0)` of `r0(x)` at `x`.
fn numeric_elasticity(r0: impl Fn(f64) -> f64, x: f64) -> f64 {
    let dx = FD_RELATIVE_STEP * x;
    let derivative = (r0(x + dx) - r0(x - dx)) / (2.0 * dx);
    derivative * x / r0(x)
}

/// Normalized sensitivity indices of `R0` with respect to the effective
/// recruitment, contact and isolation rates.
pub fn sensitivity_indices(params: &ModelParams) -> Result<SensitivityReport> {
    let k = params.effective();
    if k.mu == 0.0 {
        return Err(AnalysisError::ZeroRate("mu"));
    }
    if k.sigma == 0.0 {
        return Err(AnalysisError::ZeroRate("sigma"));
    }
    let gamma_lambda = 1.0;
    let gamma_beta = 1.0;
    let gamma_sigma = -k.sigma / (k.sigma + k.mu);

    let mut checks = Vec::with_capacity(3);
    // Elasticities are undefined at a zero rate or zero R0; skip those rows.
    if k.lambda > 0.0 && k.beta > 0.0 {
        checks.push(FiniteDifferenceCheck {
            parameter: "lambda".into(),
            analytic: gamma_lambda,
            numeric: numeric_elasticity(|x| r0_from_rates(x, k.beta, k.sigma, k.mu), k.lambda),
        });
        checks.push(FiniteDifferenceCheck {
            parameter: "beta".into(),
            analytic: gamma_beta,
            numeric: numeric_elasticity(|x| r0_from_rates(k.lambda, x, k.sigma, k.mu), k.beta),
        });
        checks.push(FiniteDifferenceCheck {
            parameter: "sigma".into(),
            analytic: gamma_sigma,
            numeric: numeric_elasticity(|x| r0_from_rates(k.lambda, k.beta, x, k.mu), k.sigma),
        });
    }

    Ok(SensitivityReport {
        gamma_lambda,
        gamma_beta,
        gamma_sigma,
        finite_difference_check: checks,
    })
}
