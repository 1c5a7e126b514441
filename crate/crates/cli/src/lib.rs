//! Command-line front end: configuration layering and scenario dispatch.

pub mod config;
pub mod error;
pub mod run;

pub use config::{parse_args, parse_config, Command, ContourConfig, RunConfig, ScenarioKind};
pub use error::CliError;
pub use run::dispatch;

pub const HELP: &str = "\
fosiqr - fractional-order SIQR epidemic model with reinfection

USAGE:
    fosiqr [SUBCOMMAND] [OPTIONS] [--<dotted.key> <value>]...

SUBCOMMANDS:
    simulate            single run with the configured parameters (default)
    baseline            one run per fractional order in `alphas`
    sigma-sweep         isolation rates {0.0169, 0.0319, 0.0569} x orders {0.96, 0.98, 1}
    reinfection-sweep   susceptibility p {0.20, 0.30, 0.40} x orders {0.96, 0.98, 1}
    contour             final infected/recovered over a (sigma, theta) grid, alpha = 1
    analyze             disease-free equilibrium, R0, stability and sensitivity (JSON)

OPTIONS:
    --config <path>     JSON configuration file
    --out <dir>         output directory (output_dir)
    --svg               also write SVG plots (emit_svg)
    --step <h>          solver step size in days (solver.step_size)
    --horizon <days>    integration horizon (solver.t_end)
    --<key> <value>     override any configuration key, e.g. --params.sigma 3.19e-2,
                        --params.alpha 0.96, --contour.sigma [0.0169], --execution sequential
    -h, --help          print this help

Precedence: command-line overrides > config file > built-in defaults.
Unknown keys are rejected.

CONFIGURATION KEYS:
    params.{lambda,beta,sigma,theta,mu,p,alpha}   base rates, p in [0,1), alpha in (0,1]
    initial_state.{S,I,Q,R}                       initial densities (>= 0)
    solver.{step_size,t_end,corrector_iterations}
    scenario, output_dir, emit_svg, alphas, threshold, execution (parallel|sequential)
    contour.{sigma,theta,t_end}                   grid axes (JSON arrays) and horizon

EXIT STATUS:
    0   success
    2   usage error (unknown subcommand, missing flag value)
    3   configuration file is not valid JSON
    4   invalid configuration (unknown key, out-of-range value)
    5   I/O error (unreadable config, unwritable output)
    6   solver error (non-finite state)
    7   analysis error (zero death rate, R0 at threshold)
    8   scenario error (failed grid cell, invalid sweep)

Errors are reported on stderr as a single line starting with `error:`.
";
