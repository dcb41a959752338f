//! Command-line front end. [`run`] does all the work so tests can drive it
//! in-process; the binary only forwards `std::env::args`.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};

use crate::codegen::generate;
use crate::program::{ProgramDoc, ProgramError};
use crate::programs::EXAMPLES;
use crate::sim::run_trace;
use crate::solution::Solution;
use crate::trace_file::{ResultsDoc, TraceDoc};

pub const EXIT_OK: i32 = 0;
pub const EXIT_IO: i32 = 1;
pub const EXIT_SEMANTIC: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "parrot", version, about = "Check, simulate and generate P4 for flow processor programs")]
pub struct CliConfig {
    #[command(subcommand)]
    pub command: Cmd,
}

#[derive(Debug, Subcommand)]
pub enum Cmd {
    /// Load a program and run every semantic check.
    Check { program: PathBuf },
    /// Write the P4 fragments, the template and the combined program.
    Generate {
        program: PathBuf,
        #[arg(short, long)]
        out: PathBuf,
    },
    /// Run a packet trace through the simulator.
    Simulate {
        program: PathBuf,
        #[arg(short, long)]
        trace: PathBuf,
        /// Overrides the seed in the trace file (default 0).
        #[arg(long)]
        seed: Option<u64>,
        /// Write results here instead of stdout.
        #[arg(short, long)]
        out: Option<PathBuf>,
        /// Include the per-command trace in each result.
        #[arg(long)]
        trace_commands: bool,
    },
    /// Write the built-in example programs.
    Examples {
        name: Option<String>,
        #[arg(short, long, default_value = ".")]
        out: PathBuf,
    },
}

/// Parses `args` (including the program name) and runs the subcommand.
/// Returns the process exit status.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cfg = match CliConfig::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            let text = e.render().to_string();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(stdout, "{text}");
                    EXIT_OK
                }
                _ => {
                    let _ = write!(stderr, "{text}");
                    EXIT_IO
                }
            };
        }
    };
    match execute(cfg.command, stdout) {
        Ok(()) => EXIT_OK,
        Err(Failure { code, message }) => {
            let _ = writeln!(stderr, "{message}");
            code
        }
    }
}

struct Failure {
    code: i32,
    message: String,
}

impl From<ProgramError> for Failure {
    fn from(e: ProgramError) -> Self {
        let message = match &e {
            ProgramError::Io { .. } => format!("error[Io]: {e}"),
            _ => e.to_string(),
        };
        Failure {
            code: e.exit_code(),
            message,
        }
    }
}

fn io_failure(what: impl std::fmt::Display) -> Failure {
    Failure {
        code: EXIT_IO,
        message: format!("error[Io]: {what}"),
    }
}

fn load(path: &Path) -> Result<Solution, Failure> {
    Ok(ProgramDoc::from_path(path)?.build()?)
}

fn execute(cmd: Cmd, stdout: &mut dyn Write) -> Result<(), Failure> {
    match cmd {
        Cmd::Check { program } => {
            let s = load(&program)?;
            let _ = writeln!(
                stdout,
                "ok: {} processor(s), {} selector(s)",
                s.processors().len(),
                s.selectors().len()
            );
        }
        Cmd::Generate { program, out } => {
            let s = load(&program)?;
            let files = generate(&s).map_err(io_failure)?;
            let written = files.write_atomic(&out).map_err(io_failure)?;
            for path in written {
                let _ = writeln!(stdout, "{}", path.display());
            }
        }
        Cmd::Simulate {
            program,
            trace,
            seed,
            out,
            trace_commands,
        } => {
            let s = load(&program)?;
            let doc = TraceDoc::from_path(&trace)?;
            let packets = doc.packets()?;
            let seed = seed.or(doc.seed.map(|n| n.0)).unwrap_or(0);
            let results = run_trace(&s, &packets, seed);
            let text = ResultsDoc::new(seed, &results, trace_commands).to_json();
            match out {
                Some(path) => std::fs::write(&path, text)
                    .map_err(|e| io_failure(format!("cannot write {}: {e}", path.display())))?,
                None => {
                    let _ = write!(stdout, "{text}");
                }
            }
        }
        Cmd::Examples { name, out } => {
            let chosen: Vec<(&str, &str)> = match name {
                None => EXAMPLES.to_vec(),
                Some(n) => match EXAMPLES.iter().find(|(e, _)| *e == n) {
                    Some(e) => vec![*e],
                    None => {
                        let names: Vec<&str> = EXAMPLES.iter().map(|(e, _)| *e).collect();
                        return Err(Failure {
                            code: EXIT_SEMANTIC,
                            message: format!(
                                "error[UnknownExample]: no example named `{n}`; available: {}",
                                names.join(", ")
                            ),
                        });
                    }
                },
            };
            std::fs::create_dir_all(&out)
                .map_err(|e| io_failure(format!("cannot create {}: {e}", out.display())))?;
            for (n, text) in chosen {
                let path = out.join(format!("{n}.json"));
                std::fs::write(&path, text)
                    .map_err(|e| io_failure(format!("cannot write {}: {e}", path.display())))?;
                let _ = writeln!(stdout, "{}", path.display());
            }
        }
    }
    Ok(())
}
