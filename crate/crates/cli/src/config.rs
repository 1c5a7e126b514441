//! Run configuration: defaults, JSON config file and `--dotted.key value`
//! overrides, applied in that order of increasing precedence.

use std::path::{Path, PathBuf};

use fosiqr_core::fractional::SolverConfig;
use fosiqr_core::model::{default_initial_state, ModelParams, StateVector};
use fosiqr_core::scenarios::{
    default_contour_axis, Execution, CONTOUR_HORIZON, DEFAULT_HORIZON, DEFAULT_THRESHOLD, FIGURE_ALPHAS,
};
use fosiqr_core::FractionalOrder;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScenarioKind {
    #[default]
    Simulate,
    Baseline,
    SigmaSweep,
    ReinfectionSweep,
    Contour,
    Analyze,
}

impl ScenarioKind {
    pub const ALL: [ScenarioKind; 6] = [
        ScenarioKind::Simulate,
        ScenarioKind::Baseline,
        ScenarioKind::SigmaSweep,
        ScenarioKind::ReinfectionSweep,
        ScenarioKind::Contour,
        ScenarioKind::Analyze,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ScenarioKind::Simulate => "simulate",
            ScenarioKind::Baseline => "baseline",
            ScenarioKind::SigmaSweep => "sigma-sweep",
            ScenarioKind::ReinfectionSweep => "reinfection-sweep",
            ScenarioKind::Contour => "contour",
            ScenarioKind::Analyze => "analyze",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.name() == name)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ContourConfig {
    pub sigma: Vec<f64>,
    pub theta: Vec<f64>,
    pub t_end: f64,
}

impl Default for ContourConfig {
    fn default() -> Self {
        ContourConfig {
            sigma: default_contour_axis(),
            theta: default_contour_axis(),
            t_end: CONTOUR_HORIZON,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub params: ModelParams,
    pub initial_state: StateVector,
    pub solver: SolverConfig,
    pub scenario: ScenarioKind,
    pub output_dir: PathBuf,
    pub emit_svg: bool,
    /// Fractional orders for the `baseline` scenario.
    pub alphas: Vec<f64>,
    /// Infected level reported as `t_below_threshold` in summaries.
    pub threshold: f64,
    pub contour: ContourConfig,
    pub execution: Execution,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            params: ModelParams::table3(),
            initial_state: default_initial_state(),
            solver: SolverConfig {
                step_size: SolverConfig::DEFAULT_STEP,
                t_end: DEFAULT_HORIZON,
                corrector_iterations: 1,
            },
            scenario: ScenarioKind::Simulate,
            output_dir: PathBuf::from("output"),
            emit_svg: false,
            alphas: FIGURE_ALPHAS.to_vec(),
            threshold: DEFAULT_THRESHOLD,
            contour: ContourConfig::default(),
            execution: Execution::Parallel,
        }
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<(), CliError> {
        let invalid = |msg: String| Err(CliError::Validation(msg));
        self.params.validate().map_err(|e| CliError::Validation(e.to_string()))?;
        self.initial_state
            .validate_initial()
            .map_err(|e| CliError::Validation(e.to_string()))?;
        self.solver.validate().map_err(|e| CliError::Validation(e.to_string()))?;
        if self.alphas.is_empty() {
            return invalid("alphas must be nonempty".into());
        }
        for &a in &self.alphas {
            FractionalOrder::new(a).map_err(|e| CliError::Validation(format!("alphas: {e}")))?;
        }
        if !self.threshold.is_finite() {
            return invalid(format!("threshold must be finite, got {}", self.threshold));
        }
        for (name, axis) in [("contour.sigma", &self.contour.sigma), ("contour.theta", &self.contour.theta)] {
            if axis.is_empty() {
                return invalid(format!("{name} must be nonempty"));
            }
            if let Some(v) = axis.iter().find(|v| !(v.is_finite() && **v > 0.0)) {
                return invalid(format!("{name} values must be positive, got {v}"));
            }
        }
        SolverConfig {
            t_end: self.contour.t_end,
            ..self.solver
        }
        .validate()
        .map_err(|e| CliError::Validation(format!("contour.t_end: {e}")))?;
        Ok(())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("RunConfig serializes")
    }
}

/// Merges `overlay` into `base`, rejecting keys `base` does not have.
fn merge(base: &mut Value, overlay: Value, path: &str) -> Result<(), CliError> {
    match (base, overlay) {
        (Value::Object(base), Value::Object(overlay)) => {
            for (key, value) in overlay {
                let child = if path.is_empty() { key.clone() } else { format!("{path}.{key}") };
                match base.get_mut(&key) {
                    Some(slot) => merge(slot, value, &child)?,
                    None => return Err(CliError::UnknownKey(child)),
                }
            }
            Ok(())
        }
        (Value::Object(_), other) => Err(CliError::Validation(format!(
            "{} must be an object, got {other}",
            if path.is_empty() { "config" } else { path }
        ))),
        (slot, value) => {
            *slot = value;
            Ok(())
        }
    }
}

fn apply_override(tree: &mut Value, key: &str, raw: &str) -> Result<(), CliError> {
    let mut node = tree;
    for part in key.split('.') {
        node = match node {
            Value::Object(map) => map.get_mut(part),
            _ => None,
        }
        .ok_or_else(|| CliError::UnknownKey(key.to_string()))?;
    }
    let value = match node {
        Value::String(_) => Value::String(raw.to_string()),
        _ => serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.to_string())),
    };
    merge(node, value, key)
}

/// Builds a validated [`RunConfig`] from defaults, an optional JSON file and
/// ordered `(dotted.key, value)` overrides.
pub fn parse_config(file: Option<&Path>, overrides: &[(String, String)]) -> Result<RunConfig, CliError> {
    let mut tree = serde_json::to_value(RunConfig::default()).expect("defaults serialize");
    if let Some(path) = file {
        let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let parsed: Value = serde_json::from_str(&text).map_err(|e| CliError::Parse {
            origin: path.display().to_string(),
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        })?;
        if !parsed.is_object() {
            return Err(CliError::Validation("config file must contain a JSON object".into()));
        }
        merge(&mut tree, parsed, "")?;
    }
    for (key, value) in overrides {
        apply_override(&mut tree, key, value)?;
    }
    let config: RunConfig = serde_json::from_value(tree).map_err(|e| CliError::Validation(e.to_string()))?;
    config.validate()?;
    Ok(config)
}

/// What the command line asked for.
#[derive(Debug, Clone, PartialEq)]
pub enum Command {
    Help,
    Run(Box<RunConfig>),
}

/// Parses `argv[1..]`: an optional subcommand plus global flags and dotted
/// overrides.
pub fn parse_args<I, S>(args: I) -> Result<Command, CliError>
where
    I: IntoIterator<Item = S>,
    S: AsRef<str>,
{
    let mut scenario = None;
    let mut config_path: Option<PathBuf> = None;
    let mut overrides: Vec<(String, String)> = Vec::new();
    let mut args = args.into_iter().map(|a| a.as_ref().to_string());

    while let Some(arg) = args.next() {
        let Some(flag) = arg.strip_prefix("--") else {
            if arg == "-h" {
                return Ok(Command::Help);
            }
            if scenario.is_some() {
                return Err(CliError::Usage(format!("unexpected argument '{arg}'")));
            }
            scenario = Some(
                ScenarioKind::from_name(&arg)
                    .ok_or_else(|| CliError::Usage(format!("unknown subcommand '{arg}'")))?,
            );
            continue;
        };
        let (name, inline) = match flag.split_once('=') {
            Some((n, v)) => (n.to_string(), Some(v.to_string())),
            None => (flag.to_string(), None),
        };
        if name == "help" {
            return Ok(Command::Help);
        }
        if name == "svg" {
            if inline.is_some() {
                return Err(CliError::Usage("--svg takes no value".into()));
            }
            overrides.push(("emit_svg".into(), "true".into()));
            continue;
        }
        let value = match inline {
            Some(v) => v,
            None => args
                .next()
                .ok_or_else(|| CliError::Usage(format!("--{name} expects a value")))?,
        };
        match name.as_str() {
            "config" => config_path = Some(PathBuf::from(value)),
            "out" => overrides.push(("output_dir".into(), value)),
            "step" => overrides.push(("solver.step_size".into(), value)),
            "horizon" => overrides.push(("solver.t_end".into(), value)),
            "" => return Err(CliError::Usage("empty flag '--'".into())),
            _ => overrides.push((name, value)),
        }
    }
    if let Some(kind) = scenario {
        overrides.push(("scenario".into(), kind.name().into()));
    }
    parse_config(config_path.as_deref(), &overrides).map(|c| Command::Run(Box::new(c)))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ov(pairs: &[(&str, &str)]) -> Vec<(String, String)> {
        pairs.iter().map(|(k, v)| (k.to_string(), v.to_string())).collect()
    }

    #[test]
    fn empty_input_gives_defaults() {
        let config = parse_config(None, &[]).unwrap();
        assert_eq!(config, RunConfig::default());
        assert_eq!(config.params, ModelParams::table3());
        assert_eq!(config.params.alpha.value(), 1.0);
        assert_eq!(config.initial_state.to_array(), [153.0, 138.0, 68.0, 20.0]);
        assert_eq!(config.solver.step_size, 0.05);
        assert_eq!(config.solver.t_end, 300.0);
    }

    #[test]
    fn alpha_out_of_range_is_validation_error() {
        let err = parse_config(None, &ov(&[("params.alpha", "1.5")])).unwrap_err();
        assert!(matches!(err, CliError::Validation(_)), "{err:?}");
        assert!(err.to_string().contains("(0, 1]"));
    }

    #[test]
    fn p_outside_unit_interval_names_invariant() {
        let err = parse_config(None, &ov(&[("params.p", "1.0")])).unwrap_err();
        assert!(err.to_string().contains("p in [0, 1)"), "{err}");
    }

    #[test]
    fn overrides_beat_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("cfg.json");
        std::fs::write(&path, r#"{"params": {"p": 0.2, "sigma": 0.0319}}"#).unwrap();
        let config = parse_config(Some(&path), &ov(&[("params.p", "0.4")])).unwrap();
        assert_eq!(config.params.p, 0.4);
        assert_eq!(config.params.sigma, 0.0319);
        assert_eq!(config.params.beta, ModelParams::table3().beta);
    }

    #[test]
    fn unknown_keys_rejected() {
        let err = parse_config(None, &ov(&[("params.gamma", "1")])).unwrap_err();
        assert!(matches!(err, CliError::UnknownKey(ref k) if k == "params.gamma"));

        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("cfg.json");
        std::fs::write(&path, r#"{"solver": {"order": 2}}"#).unwrap();
        let err = parse_config(Some(&path), &[]).unwrap_err();
        assert!(matches!(err, CliError::UnknownKey(ref k) if k == "solver.order"));
    }

    #[test]
    fn parse_error_carries_position() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("cfg.json");
        std::fs::write(&path, "{\n  \"params\": {\n    \"p\": 0.2,,\n  }\n}").unwrap();
        match parse_config(Some(&path), &[]).unwrap_err() {
            CliError::Parse { line, column, .. } => {
                assert_eq!(line, 3);
                assert!(column > 0);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn json_round_trip() {
        let mut config = RunConfig::default();
        config.params.p = 0.123_456_789;
        config.params.alpha = FractionalOrder::new(0.96).unwrap();
        config.scenario = ScenarioKind::Contour;
        config.contour.sigma = vec![0.0169];
        config.emit_svg = true;
        config.execution = Execution::Sequential;
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("cfg.json");
        std::fs::write(&path, config.to_json()).unwrap();
        assert_eq!(parse_config(Some(&path), &[]).unwrap(), config);
    }

    #[test]
    fn args_map_to_overrides() {
        let Command::Run(config) = parse_args([
            "baseline",
            "--out",
            "/tmp/x",
            "--svg",
            "--step",
            "0.1",
            "--horizon=50",
            "--params.sigma",
            "3.19e-2",
            "--alphas",
            "[0.9,1]",
        ])
        .unwrap() else {
            panic!("expected run");
        };
        assert_eq!(config.scenario, ScenarioKind::Baseline);
        assert_eq!(config.output_dir, PathBuf::from("/tmp/x"));
        assert!(config.emit_svg);
        assert_eq!(config.solver.step_size, 0.1);
        assert_eq!(config.solver.t_end, 50.0);
        assert_eq!(config.params.sigma, 3.19e-2);
        assert_eq!(config.alphas, vec![0.9, 1.0]);
    }

    #[test]
    fn string_targets_keep_raw_text() {
        let config = parse_config(None, &ov(&[("output_dir", "123")])).unwrap();
        assert_eq!(config.output_dir, PathBuf::from("123"));
    }

    #[test]
    fn bad_args() {
        assert!(matches!(parse_args(["frobnicate"]), Err(CliError::Usage(_))));
        assert!(matches!(parse_args(["--step"]), Err(CliError::Usage(_))));
        assert!(matches!(parse_args(["baseline", "contour"]), Err(CliError::Usage(_))));
        assert_eq!(parse_args(["--help"]).unwrap(), Command::Help);
        assert!(matches!(
            parse_args(["--step", "-1"]),
            Err(CliError::Validation(_))
        ));
        assert!(matches!(
            parse_args(["--contour.sigma", "[]"]),
            Err(CliError::Validation(_))
        ));
        assert!(matches!(
            parse_args(["--params", "3"]),
            Err(CliError::Validation(_))
        ));
    }
}
