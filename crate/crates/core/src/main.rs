use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use tapevm::bench::{self, BenchOptions, BurgersConfig};
use tapevm::evaluator::{evaluate_dir, parse_seed, Mode};
use tapevm::ir::{parse_program, ExecConfig, MachineState, MemPreset, DEFAULT_MAX_STEPS};
use tapevm::par::Exec;
use tapevm::recorder::run_recording_with;
use tapevm::tape::{self, TapeReader, TAPE_FILE};

#[derive(Parser)]
#[command(
    name = "tapevm",
    version,
    about = "Record and evaluate Jacobian tapes of IR programs"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a program and record its tape.
    Run {
        /// Directory for tape.bin, inputs.idx and outputs.idx.
        #[arg(long, value_name = "DIR")]
        record: PathBuf,
        program: PathBuf,
        /// Memory initializer `addr=value` (F64 unless prefixed, e.g. `f32:1.5`).
        #[arg(long = "mem", value_name = "ADDR=VALUE", num_args = 1.., value_parser = parse_preset)]
        mem: Vec<MemPreset>,
        #[arg(long, default_value_t = DEFAULT_MAX_STEPS)]
        max_steps: u64,
    },
    /// Evaluate a recorded tape.
    Eval {
        #[arg(long)]
        dir: PathBuf,
        #[arg(long, default_value = "reverse", value_parser = parse_mode)]
        mode: Mode,
        /// `index=value`; replaces the default seeds.
        #[arg(long = "seed", value_name = "IDX=VALUE")]
        seeds: Vec<String>,
    },
    /// Inspect a tape file.
    Tape {
        #[command(subcommand)]
        command: TapeCommand,
    },
    /// Benchmarks.
    Bench {
        #[command(subcommand)]
        command: BenchCommand,
    },
}

#[derive(Subcommand)]
enum TapeCommand {
    /// Block count, byte size and number of nonzero index pairs.
    Stats { dir: PathBuf },
    /// One line per block: `i: idx1 idx2 d1 d2`.
    Dump { dir: PathBuf },
    /// Check that every block refers only to earlier blocks.
    Lint { dir: PathBuf },
}

#[derive(Clone, Copy, ValueEnum)]
enum ReportFormat {
    Json,
    Text,
}

#[derive(Subcommand)]
enum BenchCommand {
    /// 2-D Burgers' equation solver.
    Burgers {
        #[arg(long)]
        nx: usize,
        #[arg(long)]
        nt: usize,
        #[arg(long)]
        dir: PathBuf,
        #[arg(long, value_enum, default_value = "text")]
        report: ReportFormat,
        /// Check only this many evenly spaced inputs against finite differences.
        #[arg(long)]
        fd_inputs: Option<usize>,
        /// Run the finite-difference oracle on one thread.
        #[arg(long)]
        sequential: bool,
    },
}

fn parse_preset(s: &str) -> Result<MemPreset, String> {
    s.parse()
}

fn parse_mode(s: &str) -> Result<Mode, String> {
    s.parse()
}

type BoxError = Box<dyn std::error::Error>;

fn run(cli: Cli) -> Result<(), BoxError> {
    match cli.command {
        Command::Run {
            record,
            program,
            mem,
            max_steps,
        } => {
            let text = std::fs::read_to_string(&program)
                .map_err(|e| format!("{}: {e}", program.display()))?;
            let p = parse_program(&text).map_err(|e| format!("{}: {e}", program.display()))?;
            let mut state = MachineState::for_program(&p);
            for preset in &mem {
                state.apply_preset(preset).ok_or_else(|| {
                    format!("memory preset at {:#x} is out of range", preset.addr)
                })?;
            }
            let session = run_recording_with(&p, state, &record, ExecConfig { max_steps })?;
            for w in &session.warnings {
                eprintln!("warning: {w}");
            }
            for v in &session.output_values {
                println!("{v}");
            }
        }
        Command::Eval { dir, mode, seeds } => {
            let seeds = seeds
                .iter()
                .map(|s| parse_seed(s))
                .collect::<Result<Vec<_>, _>>()?;
            print!("{}", evaluate_dir(&dir, mode, &seeds)?);
        }
        Command::Tape { command } => match command {
            TapeCommand::Stats { dir } => {
                let r = TapeReader::open(dir.join(TAPE_FILE))?;
                let s = tape::tape_stats(&r)?;
                println!("blocks {}", s.blocks);
                println!("bytes {}", s.bytes);
                println!("nonzero_pairs {}", s.nonzero_pairs);
            }
            TapeCommand::Dump { dir } => {
                let r = TapeReader::open(dir.join(TAPE_FILE))?;
                print!("{}", tape::dump(&r)?);
            }
            TapeCommand::Lint { dir } => {
                let r = TapeReader::open(dir.join(TAPE_FILE))?;
                tape::lint(&r)?;
                println!("ok");
            }
        },
        Command::Bench { command } => match command {
            BenchCommand::Burgers {
                nx,
                nt,
                dir,
                report,
                fd_inputs,
                sequential,
            } => {
                let cfg = BurgersConfig::new(nx, nt);
                let opts = BenchOptions {
                    exec: if sequential {
                        Exec::Sequential
                    } else {
                        Exec::default()
                    },
                    fd_inputs,
                    ..BenchOptions::default()
                };
                let outcome = bench::run_burgers(&cfg, &dir, &opts)?;
                match report {
                    ReportFormat::Json => {
                        println!("{}", serde_json::to_string_pretty(&outcome.report)?)
                    }
                    ReportFormat::Text => print!("{}", bench::render_text(&cfg, &outcome)),
                }
            }
        },
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
