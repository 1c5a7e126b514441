use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use fosiqr_core::analysis::{classify_dfe, sensitivity_indices};
use fosiqr_core::output::{
    heatmap_svg, trajectories_svg, write_grid_csv, write_summary_csv, write_trajectory_csv,
};
use fosiqr_core::scenarios::{summarize, Scenarios, Trajectory};

use crate::config::{RunConfig, ScenarioKind};
use crate::error::CliError;

const COMPARTMENTS: [&str; 4] = ["S", "I", "Q", "R"];

struct Writer<'a, W: Write> {
    dir: &'a Path,
    console: &'a mut W,
}

impl<W: Write> Writer<'_, W> {
    fn io_err(path: &Path, source: std::io::Error) -> CliError {
        CliError::Io {
            path: path.to_path_buf(),
            source,
        }
    }

    fn create(&mut self, name: &str, note: &str, fill: impl FnOnce(&mut BufWriter<File>) -> std::io::Result<()>) -> Result<PathBuf, CliError> {
        let path = self.dir.join(name);
        let file = File::create(&path).map_err(|e| Self::io_err(&path, e))?;
        let mut buf = BufWriter::new(file);
        fill(&mut buf)
            .and_then(|()| buf.flush())
            .map_err(|e| Self::io_err(&path, e))?;
        let line = if note.is_empty() {
            format!("wrote {}", path.display())
        } else {
            format!("wrote {} ({note})", path.display())
        };
        writeln!(self.console, "{line}").map_err(|e| Self::io_err(Path::new("<stdout>"), e))?;
        Ok(path)
    }

    fn csv(&mut self, name: &str, note: &str, fill: impl FnOnce(&mut BufWriter<File>) -> csv::Result<()>) -> Result<PathBuf, CliError> {
        self.create(name, note, |w| fill(w).map_err(std::io::Error::from))
    }

    fn text(&mut self, name: &str, note: &str, body: &str) -> Result<PathBuf, CliError> {
        self.create(name, note, |w| w.write_all(body.as_bytes()))
    }
}

fn file_stem(label: &str) -> String {
    label.replace('=', "-").replace(';', "_")
}

fn write_runs<W: Write>(
    out: &mut Writer<'_, W>,
    prefix: &str,
    runs: &[Trajectory],
    config: &RunConfig,
    plot: &[usize],
) -> Result<(), CliError> {
    for run in runs {
        let name = format!("{prefix}_{}.csv", file_stem(&run.label));
        out.csv(&name, &run.label, |w| write_trajectory_csv(w, run))?;
    }
    let summaries: Vec<_> = runs.iter().map(|r| summarize(r, config.threshold)).collect();
    let note = format!("{} runs", summaries.len());
    out.csv(&format!("{prefix}_summary.csv"), &note, |w| write_summary_csv(w, &summaries))?;
    if config.emit_svg {
        for &c in plot {
            let title = format!("{prefix}: {}(t)", COMPARTMENTS[c]);
            out.text(
                &format!("{prefix}_{}.svg", COMPARTMENTS[c]),
                "",
                &trajectories_svg(runs, c, &title),
            )?;
        }
    }
    Ok(())
}

/// Runs the configured scenario and writes its artifacts into `output_dir`,
/// printing one line per file to `console`.
pub fn dispatch<W: Write>(config: &RunConfig, console: &mut W) -> Result<(), CliError> {
    config.validate()?;
    fs::create_dir_all(&config.output_dir).map_err(|source| CliError::Io {
        path: config.output_dir.clone(),
        source,
    })?;
    let scenarios = Scenarios {
        base: config.params,
        initial: config.initial_state,
        solver: config.solver,
        contour_horizon: config.contour.t_end,
        execution: config.execution,
    };
    let mut out = Writer {
        dir: &config.output_dir,
        console,
    };
    let all = [0, 1, 2, 3];

    match config.scenario {
        ScenarioKind::Simulate => {
            let run = scenarios.run_simulation("simulate")?;
            write_runs(&mut out, "simulate", std::slice::from_ref(&run), config, &all)?;
        }
        ScenarioKind::Baseline => {
            let runs = scenarios.run_baseline(&config.alphas)?;
            write_runs(&mut out, "baseline", &runs, config, &all)?;
        }
        ScenarioKind::SigmaSweep => {
            let runs = scenarios.run_sigma_sweep()?;
            write_runs(&mut out, "sigma-sweep", &runs, config, &[1, 2])?;
        }
        ScenarioKind::ReinfectionSweep => {
            let runs = scenarios.run_reinfection_sweep()?;
            write_runs(&mut out, "reinfection-sweep", &runs, config, &[1, 2])?;
        }
        ScenarioKind::Contour => {
            let grid = scenarios.run_contour(&config.contour.sigma, &config.contour.theta)?;
            let note = format!("{}x{} cells", grid.sigma_values.len(), grid.theta_values.len());
            out.csv("contour.csv", &note, |w| write_grid_csv(w, &grid))?;
            if config.emit_svg {
                let horizon = config.contour.t_end;
                out.text(
                    "contour_infected.svg",
                    "",
                    &heatmap_svg(&grid, &grid.infected_at_end, &format!("Infected after {horizon} days")),
                )?;
                out.text(
                    "contour_recovered.svg",
                    "",
                    &heatmap_svg(&grid, &grid.recovered_at_end, &format!("Recovered after {horizon} days")),
                )?;
            }
        }
        ScenarioKind::Analyze => {
            let stability = classify_dfe(&config.params)?;
            let sensitivity = sensitivity_indices(&config.params)?;
            let note = format!("r0 = {:.4}, verdict {:?}", stability.r0, stability.verdict);
            let body = serde_json::to_string_pretty(&stability).expect("report serializes") + "\n";
            out.text("stability.json", &note, &body)?;
            let note = format!("gamma_sigma = {:.4}", sensitivity.gamma_sigma);
            let body = serde_json::to_string_pretty(&sensitivity).expect("report serializes") + "\n";
            out.text("sensitivity.json", &note, &body)?;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn file_stems_are_path_safe() {
        assert_eq!(file_stem("sigma=0.0169;alpha=1"), "sigma-0.0169_alpha-1");
    }

    #[test]
    fn unwritable_output_is_io_error() {
        let dir = tempfile::tempdir().unwrap();
        let blocker = dir.path().join("file");
        fs::write(&blocker, "x").unwrap();
        let config = RunConfig {
            output_dir: blocker.join("sub"),
            scenario: ScenarioKind::Analyze,
            ..RunConfig::default()
        };
        let err = dispatch(&config, &mut Vec::new()).unwrap_err();
        assert_eq!(err.exit_code(), 5);
    }

    #[test]
    fn analysis_errors_propagate() {
        let dir = tempfile::tempdir().unwrap();
        let mut config = RunConfig {
            output_dir: dir.path().to_path_buf(),
            scenario: ScenarioKind::Analyze,
            ..RunConfig::default()
        };
        config.params.mu = 0.0;
        let err = dispatch(&config, &mut Vec::new()).unwrap_err();
        assert!(matches!(err, CliError::Analysis(_)));
        assert_eq!(err.exit_code(), 7);
    }
}
