use std::collections::BTreeSet;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use nvmag_cli::error::{CliError, Result, EXIT_OK};
use nvmag_cli::{
    analyze, builtin, bundle_node, checks, load_scenario, report_sensitivity, reproduction,
    run_checks, run_scenario, sensitivity, template_from_trace, trace_io, write_bundle, Format,
    Method, Node, SensitivityRun, Windows,
};

#[derive(Parser)]
#[command(
    name = "nvmag",
    version,
    about = "NV-diamond action-potential magnetometry simulator"
)]
struct Cli {
    /// Output format for reports.
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario end to end and report the detection figures.
    Simulate {
        /// Builtin name or path to a scenario TOML file.
        scenario: String,
        /// Directory for the emitted traces.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Estimate the sensitivity of a scenario's sensor chain.
    Sensitivity {
        scenario: String,
        /// Estimators to run (default: all).
        #[arg(long, value_enum, value_delimiter = ',')]
        methods: Vec<Method>,
        #[arg(long, default_value_t = 150)]
        trials: usize,
    },
    /// Score a calibrated trace, optionally through a matched-filter template.
    Detect {
        trace: PathBuf,
        #[arg(long)]
        template: Option<PathBuf>,
        #[arg(long, num_args = 2, default_values_t = [0.099, 0.105])]
        signal_window: Vec<f64>,
        #[arg(long, num_args = 2, default_values_t = [0.15, 0.24])]
        quiet_window: Vec<f64>,
        #[arg(long, default_value_t = 1)]
        n_avg: usize,
    },
    /// Run the reversal checks with noise disabled.
    Checks,
    /// Print a builtin scenario as TOML.
    DumpBuiltin { name: String },
    /// Recompute the closed-form reference numbers and the reversal checks.
    Report,
}

fn read(path: &Path) -> Result<nvmag::Trace> {
    Ok(trace_io::read_trace(path)?.1)
}

fn run(cli: Cli) -> Result<()> {
    let out = |node: &Node| print!("{}", cli.format.render(node));
    match cli.command {
        Command::Simulate { scenario, out: dir } => {
            let s = load_scenario(&scenario)?;
            let bundle = run_scenario(&s)?;
            if let Some(dir) = dir {
                write_bundle(&dir, &bundle)?;
            }
            out(&bundle_node(&s, &bundle)?);
        }
        Command::Sensitivity {
            scenario,
            methods,
            trials,
        } => {
            let s = load_scenario(&scenario)?;
            let methods: BTreeSet<Method> = if methods.is_empty() {
                Method::all()
            } else {
                methods.into_iter().collect()
            };
            let run = SensitivityRun {
                n_trials: trials,
                ..SensitivityRun::default()
            };
            let r = report_sensitivity(&s, &run, &methods)?;
            out(&sensitivity::sensitivity_node(&s, &r));
        }
        Command::Detect {
            trace,
            template,
            signal_window,
            quiet_window,
            n_avg,
        } => {
            let record = read(&trace)?;
            let template = template
                .map(|p| read(&p).and_then(|t| template_from_trace(&t)))
                .transpose()?;
            let w = Windows {
                signal: (signal_window[0], signal_window[1]),
                quiet: (quiet_window[0], quiet_window[1]),
                n_avg,
            };
            out(&analyze(&record, template.as_ref(), &w)?);
        }
        Command::Checks => {
            let rows = run_checks()?;
            out(&checks::checks_node(&rows));
            let failed = rows.iter().filter(|r| !r.passed).count();
            if failed > 0 {
                return Err(CliError::ChecksFailed(failed));
            }
        }
        Command::DumpBuiltin { name } => print!("{}", builtin(&name)?.to_toml()),
        Command::Report => {
            let rows = reproduction::reproduction_table()?;
            let check_rows = run_checks()?;
            let node = Node::map()
                .with("reference_numbers", reproduction::table_node(&rows))
                .with("checks", checks::checks_node(&check_rows));
            out(&node);
            let failed = check_rows.iter().filter(|r| !r.passed).count();
            if failed > 0 {
                return Err(CliError::ChecksFailed(failed));
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::from(EXIT_OK as u8),
        Err(e) => {
            eprintln!("nvmag: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
