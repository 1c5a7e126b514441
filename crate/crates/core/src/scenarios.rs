//! Numerical experiments: baseline runs over fractional orders, isolation and
//! reinfection sweeps, and the (σ, θ) end-state grid.
//!
//! Sweep and grid cells are independent solves. [`Execution::Parallel`]
//! distributes them over the rayon pool; results are always assembled in
//! input order, so both execution modes produce identical output.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::fractional::{FractionalError, FractionalOrder, GridFunction, SolverConfig};
use crate::model::{self, default_initial_state, ModelError, ModelParams, StateVector};

/// Fractional orders shown in the published time-series figures.
pub const FIGURE_ALPHAS: [f64; 3] = [0.96, 0.98, 1.0];
pub const SIGMA_SWEEP_VALUES: [f64; 3] = [1.69e-2, 3.19e-2, 5.69e-2];
pub const REINFECTION_SWEEP_VALUES: [f64; 3] = [0.20, 0.30, 0.40];
pub const DEFAULT_HORIZON: f64 = 300.0;
pub const CONTOUR_HORIZON: f64 = 1000.0;
pub const CONTOUR_AXIS_POINTS: usize = 25;
pub const CONTOUR_AXIS_RANGE: (f64, f64) = (1e-3, 1e-1);
pub const DEFAULT_THRESHOLD: f64 = 100.0;

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error(transparent)]
    Solver(#[from] FractionalError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("grid cell sigma = {sigma}, theta = {theta} failed: {source}")]
    CellFailed {
        sigma: f64,
        theta: f64,
        #[source]
        source: FractionalError,
    },
    #[error("invalid sweep: {0}")]
    InvalidSweep(String),
}

pub type Result<T> = std::result::Result<T, ScenarioError>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Execution {
    Sequential,
    #[default]
    Parallel,
}

/// One labelled simulation run.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub grid: GridFunction,
    pub params: ModelParams,
    pub config: SolverConfig,
    pub label: String,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grid.is_empty()
    }

    pub fn times(&self) -> &[f64] {
        self.grid.times()
    }

    pub fn state(&self, k: usize) -> StateVector {
        StateVector::from_slice(self.grid.value(k))
    }

    pub fn final_state(&self) -> StateVector {
        StateVector::from_slice(self.grid.last())
    }

    pub fn infected(&self) -> impl Iterator<Item = f64> + '_ {
        self.grid.component(1)
    }

    pub fn states(&self) -> impl Iterator<Item = (f64, StateVector)> + '_ {
        self.grid.iter().map(|(t, y)| (t, StateVector::from_slice(y)))
    }

    /// Smallest component over the whole run.
    pub fn min_component(&self) -> f64 {
        self.states()
            .map(|(_, s)| s.min_component())
            .fold(f64::INFINITY, f64::min)
    }
}

/// Runs one labelled simulation.
pub fn simulate(
    label: impl Into<String>,
    params: &ModelParams,
    initial: &StateVector,
    config: &SolverConfig,
) -> Result<Trajectory> {
    let label = label.into();
    if label.is_empty() {
        return Err(ScenarioError::InvalidSweep("trajectory label is empty".into()));
    }
    params.validate()?;
    let grid = model::simulate(params, initial, config)?;
    Ok(Trajectory {
        grid,
        params: *params,
        config: *config,
        label,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SweepParameter {
    Sigma,
    Theta,
    P,
    Alpha,
}

impl SweepParameter {
    pub fn name(self) -> &'static str {
        match self {
            SweepParameter::Sigma => "sigma",
            SweepParameter::Theta => "theta",
            SweepParameter::P => "p",
            SweepParameter::Alpha => "alpha",
        }
    }

    /// Returns `base` with this parameter set to `value`, range-checked.
    pub fn apply(self, base: &ModelParams, value: f64) -> Result<ModelParams> {
        let mut params = *base;
        match self {
            SweepParameter::Sigma => params.sigma = value,
            SweepParameter::Theta => params.theta = value,
            SweepParameter::P => params.p = value,
            SweepParameter::Alpha => params.alpha = FractionalOrder::new(value)?,
        }
        params.validate()?;
        Ok(params)
    }
}

/// A one-parameter sweep around `base`.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub varying: SweepParameter,
    pub values: Vec<f64>,
    pub base: ModelParams,
    pub horizon: SolverConfig,
}

impl SweepSpec {
    fn cases(&self) -> Result<Vec<(String, ModelParams)>> {
        if self.values.is_empty() {
            return Err(ScenarioError::InvalidSweep("no sweep values".into()));
        }
        self.values
            .iter()
            .map(|&v| {
                let params = self.varying.apply(&self.base, v)?;
                Ok((format!("{}={}", self.varying.name(), v), params))
            })
            .collect()
    }
}

/// End-of-horizon infected and recovered densities over a (σ, θ) grid.
#[derive(Debug, Clone, PartialEq)]
pub struct GridResult {
    pub sigma_values: Vec<f64>,
    pub theta_values: Vec<f64>,
    /// `infected_at_end[i][j]` for `sigma_values[i]`, `theta_values[j]`.
    pub infected_at_end: Vec<Vec<f64>>,
    pub recovered_at_end: Vec<Vec<f64>>,
}

impl GridResult {
    /// Long-form rows `(sigma, theta, final_I, final_R)`, sigma-major.
    pub fn cells(&self) -> impl Iterator<Item = (f64, f64, f64, f64)> + '_ {
        self.sigma_values.iter().enumerate().flat_map(move |(i, &s)| {
            self.theta_values
                .iter()
                .enumerate()
                .map(move |(j, &t)| (s, t, self.infected_at_end[i][j], self.recovered_at_end[i][j]))
        })
    }
}

/// `n` log-spaced points over `[lo, hi]`, endpoints included.
pub fn log_space(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![lo],
        _ => {
            let (a, b) = (lo.log10(), hi.log10());
            (0..n)
                .map(|k| {
                    if k == n - 1 {
                        hi
                    } else {
                        10f64.powf(a + (b - a) * k as f64 / (n - 1) as f64)
                    }
                })
                .collect()
        }
    }
}

pub fn default_contour_axis() -> Vec<f64> {
    log_space(CONTOUR_AXIS_RANGE.0, CONTOUR_AXIS_RANGE.1, CONTOUR_AXIS_POINTS)
}

/// Shared settings for every experiment. Each scenario overrides only the
/// parameters it varies; everything else comes from `base`.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenarios {
    pub base: ModelParams,
    pub initial: StateVector,
    pub solver: SolverConfig,
    pub contour_horizon: f64,
    pub execution: Execution,
}

impl Default for Scenarios {
    fn default() -> Self {
        Scenarios {
            base: ModelParams::table3(),
            initial: default_initial_state(),
            solver: SolverConfig {
                step_size: SolverConfig::DEFAULT_STEP,
                t_end: DEFAULT_HORIZON,
                corrector_iterations: 1,
            },
            contour_horizon: CONTOUR_HORIZON,
            execution: Execution::Parallel,
        }
    }
}

impl Scenarios {
    pub fn with_execution(mut self, execution: Execution) -> Self {
        self.execution = execution;
        self
    }

    fn run_cases(&self, cases: Vec<(String, ModelParams)>, config: &SolverConfig) -> Result<Vec<Trajectory>> {
        let run = |(label, params): (String, ModelParams)| simulate(label, &params, &self.initial, config);
        match self.execution {
            Execution::Sequential => cases.into_iter().map(run).collect(),
            Execution::Parallel => cases.into_par_iter().map(run).collect(),
        }
    }

    fn alpha_cases(&self, alphas: &[f64]) -> Result<Vec<(String, ModelParams)>> {
        alphas
            .iter()
            .map(|&a| {
                let params = self.base.with_alpha(FractionalOrder::new(a)?);
                Ok((format!("alpha={a}"), params))
            })
            .collect()
    }

    pub fn run_simulation(&self, label: &str) -> Result<Trajectory> {
        simulate(label, &self.base, &self.initial, &self.solver)
    }

    /// One run per fractional order with the base parameters.
    pub fn run_baseline(&self, alphas: &[f64]) -> Result<Vec<Trajectory>> {
        if alphas.is_empty() {
            return Err(ScenarioError::InvalidSweep("no fractional orders".into()));
        }
        let cases = self.alpha_cases(alphas)?;
        self.run_cases(cases, &self.solver)
    }

    pub fn run_sweep(&self, spec: &SweepSpec) -> Result<Vec<Trajectory>> {
        spec.horizon.validate()?;
        self.run_cases(spec.cases()?, &spec.horizon)
    }

    /// Isolation rates × fractional orders, sigma-major.
    pub fn run_sigma_sweep(&self) -> Result<Vec<Trajectory>> {
        self.run_product(SweepParameter::Sigma, &SIGMA_SWEEP_VALUES, &FIGURE_ALPHAS)
    }

    /// Reinfection susceptibilities × fractional orders, p-major.
    pub fn run_reinfection_sweep(&self) -> Result<Vec<Trajectory>> {
        self.run_product(SweepParameter::P, &REINFECTION_SWEEP_VALUES, &FIGURE_ALPHAS)
    }

    fn run_product(&self, varying: SweepParameter, values: &[f64], alphas: &[f64]) -> Result<Vec<Trajectory>> {
        let mut cases = Vec::with_capacity(values.len() * alphas.len());
        for &v in values {
            let swept = varying.apply(&self.base, v)?;
            for &a in alphas {
                let params = swept.with_alpha(FractionalOrder::new(a)?);
                cases.push((format!("{}={v};alpha={a}", varying.name()), params));
            }
        }
        self.run_cases(cases, &self.solver)
    }

    /// Final infected and recovered densities at `contour_horizon` with
    /// `α = 1`, for every `(σ, θ)` pair.
    pub fn run_contour(&self, sigma_axis: &[f64], theta_axis: &[f64]) -> Result<GridResult> {
        if sigma_axis.is_empty() || theta_axis.is_empty() {
            return Err(ScenarioError::InvalidSweep("contour axes must be nonempty".into()));
        }
        if let Some(v) = sigma_axis.iter().chain(theta_axis).find(|v| !(**v > 0.0 && v.is_finite())) {
            return Err(ScenarioError::InvalidSweep(format!("contour axis value {v} is not positive")));
        }
        let config = SolverConfig {
            t_end: self.contour_horizon,
            ..self.solver
        };
        config.validate()?;
        let base = self.base.with_alpha(FractionalOrder::ONE);
        base.validate()?;

        let cells: Vec<(f64, f64)> = sigma_axis
            .iter()
            .flat_map(|&s| theta_axis.iter().map(move |&t| (s, t)))
            .collect();
        let run = |&(sigma, theta): &(f64, f64)| {
            let params = ModelParams { sigma, theta, ..base };
            model::simulate(&params, &self.initial, &config)
                .map(|grid| StateVector::from_slice(grid.last()))
                .map_err(|source| ScenarioError::CellFailed { sigma, theta, source })
        };
        let results: Vec<Result<StateVector>> = match self.execution {
            Execution::Sequential => cells.iter().map(run).collect(),
            Execution::Parallel => cells.par_iter().map(run).collect(),
        };
        // Report the first failing cell in row-major order.
        let finals = results.into_iter().collect::<Result<Vec<_>>>()?;

        let cols = theta_axis.len();
        let infected_at_end = finals.chunks(cols).map(|row| row.iter().map(|s| s.i).collect()).collect();
        let recovered_at_end = finals.chunks(cols).map(|row| row.iter().map(|s| s.r).collect()).collect();
        Ok(GridResult {
            sigma_values: sigma_axis.to_vec(),
            theta_values: theta_axis.to_vec(),
            infected_at_end,
            recovered_at_end,
        })
    }
}

/// Headline numbers of one run.
#[derive(Debug, Clone, PartialEq)]
pub struct Summary {
    pub label: String,
    pub peak_infected: f64,
    pub peak_time: f64,
    pub final_state: StateVector,
    /// First grid time with `I < threshold`; `None` if it never happens.
    pub below_threshold_time: Option<f64>,
}

/// Peak infected (first grid argmax), final state and first time infected is
/// below `threshold`.
pub fn summarize(trajectory: &Trajectory, threshold: f64) -> Summary {
    let times = trajectory.times();
    let mut peak_infected = f64::NEG_INFINITY;
    let mut peak_time = 0.0;
    let mut below_threshold_time = None;
    for (&t, i) in times.iter().zip(trajectory.infected()) {
        if i > peak_infected {
            peak_infected = i;
            peak_time = t;
        }
        if below_threshold_time.is_none() && i < threshold {
            below_threshold_time = Some(t);
        }
    }
    Summary {
        label: trajectory.label.clone(),
        peak_infected,
        peak_time,
        final_state: trajectory.final_state(),
        below_threshold_time,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn short() -> Scenarios {
        Scenarios {
            solver: SolverConfig::new(0.1, 20.0).unwrap(),
            contour_horizon: 20.0,
            ..Scenarios::default()
        }
    }

    fn synthetic(infected: &[f64]) -> Trajectory {
        let values = infected.iter().flat_map(|&i| [1.0, i, 0.0, 0.0]).collect();
        Trajectory {
            grid: GridFunction::from_values(0.5, 4, values).unwrap(),
            params: ModelParams::table3(),
            config: SolverConfig::new(0.5, 0.5 * (infected.len() - 1).max(1) as f64).unwrap(),
            label: "synthetic".into(),
        }
    }

    #[test]
    fn summarize_degenerate_series() {
        let s = summarize(&synthetic(&[0.0; 5]), DEFAULT_THRESHOLD);
        assert_eq!(s.peak_infected, 0.0);
        assert_eq!(s.peak_time, 0.0);
        assert_eq!(s.below_threshold_time, Some(0.0));
    }

    #[test]
    fn summarize_monotone_and_ties() {
        let s = summarize(&synthetic(&[300.0, 250.0, 150.0, 90.0, 10.0]), DEFAULT_THRESHOLD);
        assert_eq!(s.peak_infected, 300.0);
        assert_eq!(s.peak_time, 0.0);
        assert_eq!(s.below_threshold_time, Some(1.5));
        assert_eq!(s.final_state.i, 10.0);

        let s = summarize(&synthetic(&[120.0, 200.0, 200.0, 150.0]), DEFAULT_THRESHOLD);
        assert_eq!(s.peak_time, 0.5);
        assert_eq!(s.below_threshold_time, None);
    }

    #[test]
    fn log_space_endpoints() {
        let axis = default_contour_axis();
        assert_eq!(axis.len(), 25);
        assert_eq!(axis[0], 1e-3);
        assert_eq!(axis[24], 1e-1);
        assert!((axis[12] - 1e-2).abs() < 1e-15);
        assert!(axis.windows(2).all(|w| w[1] > w[0]));
        assert_eq!(log_space(0.5, 2.0, 1), vec![0.5]);
        assert!(log_space(0.5, 2.0, 0).is_empty());
    }

    #[test]
    fn sweep_parameter_ranges() {
        let base = ModelParams::table3();
        assert!(SweepParameter::P.apply(&base, 1.0).is_err());
        assert!(SweepParameter::Alpha.apply(&base, 1.5).is_err());
        assert!(SweepParameter::Sigma.apply(&base, -0.1).is_err());
        assert_eq!(SweepParameter::Theta.apply(&base, 0.5).unwrap().theta, 0.5);
    }

    #[test]
    fn sweep_runs_each_value() {
        let sc = short();
        let spec = SweepSpec {
            varying: SweepParameter::Theta,
            values: vec![1e-2, 2e-2],
            base: sc.base,
            horizon: sc.solver,
        };
        let runs = sc.run_sweep(&spec).unwrap();
        assert_eq!(runs.len(), 2);
        assert_eq!(runs[1].params.theta, 2e-2);
        assert_eq!(runs[0].label, "theta=0.01");

        let empty = SweepSpec { values: vec![], ..spec };
        assert!(matches!(sc.run_sweep(&empty), Err(ScenarioError::InvalidSweep(_))));
    }

    #[test]
    fn baseline_lengths_and_labels() {
        let runs = short().run_baseline(&FIGURE_ALPHAS).unwrap();
        assert_eq!(runs.len(), 3);
        for (run, a) in runs.iter().zip(FIGURE_ALPHAS) {
            assert_eq!(run.len(), 201);
            assert_eq!(run.params.alpha.value(), a);
            assert!(!run.label.is_empty());
        }
        assert!(short().run_baseline(&[1.2]).is_err());
        assert!(short().run_baseline(&[]).is_err());
    }

    #[test]
    fn sweeps_cover_the_product() {
        let sc = short();
        let sigma = sc.run_sigma_sweep().unwrap();
        assert_eq!(sigma.len(), 9);
        assert_eq!(sigma[0].params.sigma, 1.69e-2);
        assert_eq!(sigma[8].params.sigma, 5.69e-2);
        assert!(sigma.iter().all(|t| t.params.p == 0.30));
        let p = sc.run_reinfection_sweep().unwrap();
        assert_eq!(p.len(), 9);
        assert_eq!(p[3].params.p, 0.30);
        assert_eq!(p[3].params.alpha.value(), 0.96);
    }

    #[test]
    fn sequential_and_parallel_agree() {
        let par = short().run_sigma_sweep().unwrap();
        let seq = short().with_execution(Execution::Sequential).run_sigma_sweep().unwrap();
        assert_eq!(par, seq);

        let axis = [1e-2, 5e-2];
        let a = short().run_contour(&axis, &axis).unwrap();
        let b = short().with_execution(Execution::Sequential).run_contour(&axis, &axis).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn single_cell_grid_matches_direct_run() {
        let sc = short();
        let grid = sc.run_contour(&[2e-2], &[3e-2]).unwrap();
        let params = ModelParams {
            sigma: 2e-2,
            theta: 3e-2,
            ..sc.base
        };
        let config = SolverConfig { t_end: sc.contour_horizon, ..sc.solver };
        let direct = simulate("cell", &params, &sc.initial, &config).unwrap().final_state();
        assert_eq!(grid.infected_at_end, vec![vec![direct.i]]);
        assert_eq!(grid.recovered_at_end, vec![vec![direct.r]]);
        assert_eq!(grid.cells().count(), 1);
    }

    #[test]
    fn contour_rejects_bad_axes() {
        let sc = short();
        assert!(sc.run_contour(&[], &[1e-2]).is_err());
        assert!(sc.run_contour(&[0.0], &[1e-2]).is_err());
        assert!(sc.run_contour(&[1e-2], &[-1.0]).is_err());
    }

    #[test]
    fn failing_cell_is_identified() {
        let sc = Scenarios {
            initial: StateVector::new(1e200, 1e200, 0.0, 0.0),
            ..short()
        };
        match sc.run_contour(&[1e-2], &[2e-2]) {
            Err(ScenarioError::CellFailed { sigma, theta, .. }) => {
                assert_eq!((sigma, theta), (1e-2, 2e-2));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn empty_label_rejected() {
        let sc = short();
        assert!(simulate("", &sc.base, &sc.initial, &sc.solver).is_err());
    }
}
