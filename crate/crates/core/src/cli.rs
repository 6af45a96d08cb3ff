//! Command-line front end: `run`, `sweep`, `diff` and `check`.
//!
//! Exit codes: 0 success, 1 validation failure, 2 I/O failure,
//! 3 numeric instability.

use std::ffi::OsString;
use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};

use crate::analysis::{diff_velocity, sweep};
use crate::check::run_checks;
use crate::error::{Error, Result};
use crate::io::{parse_config, read_trajectory, write_diff, write_sweep_summary, write_trajectory, RunConfig};
use crate::schedule::Termination;

#[derive(Debug, Parser)]
#[command(name = "repopulation", version, about = "Tumor repopulation under weekly fractionated radiotherapy")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Simulate one course and write its trajectory table.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Defaults to the config's `output` key, then stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Simulate one course per value of a parameter.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        param: String,
        #[arg(long, value_delimiter = ',', required = true, allow_hyphen_values = true)]
        values: Vec<f64>,
        #[arg(long)]
        out_dir: PathBuf,
        /// Velocity threshold for the first-crossing column of the summary.
        #[arg(long, default_value_t = 0.05)]
        phi_threshold: f64,
    },
    /// Write the velocity difference `A - B` of two trajectory tables.
    Diff {
        a: PathBuf,
        b: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the invariant suite for a config; exits 1 if any check fails.
    Check {
        #[arg(long)]
        config: PathBuf,
    },
}

fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::Io(io::Error::new(e.kind(), format!("{}: {e}", path.display()))))
}

fn load_config(path: &Path) -> Result<RunConfig> {
    parse_config(&read_text(path)?)
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| Error::Io(io::Error::new(e.kind(), format!("{}: {e}", path.display()))))
}

fn with_output<F>(path: Option<&Path>, write: F) -> Result<()>
where
    F: FnOnce(&mut dyn Write) -> Result<()>,
{
    match path {
        Some(path) => {
            let mut file = create(path)?;
            write(&mut file)?;
            file.flush()?;
        }
        None => {
            let stdout = io::stdout();
            let mut lock = stdout.lock();
            write(&mut lock)?;
        }
    }
    Ok(())
}

fn report_termination(termination: Termination) {
    if let Termination::Extinct { day } = termination {
        eprintln!("population extinct on day {day}; course stopped early");
    }
}

fn execute(command: Command) -> Result<i32> {
    match command {
        Command::Run { config, out } => {
            let config = load_config(&config)?;
            let trajectory = config.scenario()?.run()?;
            report_termination(trajectory.termination);
            let out = out.or_else(|| config.output.as_ref().map(PathBuf::from));
            with_output(out.as_deref(), |w| write_trajectory(&trajectory, w))?;
            Ok(0)
        }
        Command::Sweep { config, param, values, out_dir, phi_threshold } => {
            let scenario = load_config(&config)?.scenario()?;
            let entries = sweep(&scenario, &param, &values, phi_threshold);
            fs::create_dir_all(&out_dir)?;
            let mut failed = false;
            for entry in &entries {
                match &entry.outcome {
                    Ok(run) => {
                        let path = out_dir.join(format!("{param}_{}.csv", entry.value));
                        let mut file = create(&path)?;
                        write_trajectory(&run.trajectory, &mut file)?;
                        file.flush()?;
                    }
                    Err(e) => {
                        failed = true;
                        eprintln!("{param} = {}: {e}", entry.value);
                    }
                }
            }
            let mut summary = create(&out_dir.join("summary.csv"))?;
            write_sweep_summary(&param, &entries, &mut summary)?;
            summary.flush()?;
            Ok(i32::from(failed))
        }
        Command::Diff { a, b, out } => {
            let ta = read_trajectory(&read_text(&a)?)?;
            let tb = read_trajectory(&read_text(&b)?)?;
            let diff = diff_velocity(&ta, &tb)?;
            if diff.unmatched > 0 {
                eprintln!("{} records without a partner were skipped", diff.unmatched);
            }
            eprintln!("sign pattern of A - B: {}", diff.sign_pattern());
            with_output(out.as_deref(), |w| write_diff(&diff, w))?;
            Ok(0)
        }
        Command::Check { config } => {
            let report = run_checks(&load_config(&config)?.scenario()?)?;
            for item in &report.items {
                println!("{item}");
            }
            Ok(if report.passed() { 0 } else { 1 })
        }
    }
}

/// Parses `args` (including the program name) and runs the subcommand.
pub fn cli_main<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match execute(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
